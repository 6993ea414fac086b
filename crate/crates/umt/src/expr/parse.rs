//! Recursive-descent parser for the expression language.
//!
//! Precedence, loosest first: `=>`, `or`, `&`, comparisons (`=` `/=` `:`
//! `<:`), `\/`, `-` (set subtraction), then navigation and postfix calls.

use crate::error::{Result, UmtError};
use crate::lexer::{Cursor, Tok};

use super::{BinOp, Expr, ExprKind};

/// Parse a complete expression from a standalone source string.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut cur = Cursor::from_source(text)?;
    let e = expr(&mut cur)?;
    if !cur.at_end() {
        return Err(UmtError::syntax(
            cur.pos(),
            format!("unexpected {} after expression", cur.peek().unwrap()),
        ));
    }
    Ok(e)
}

/// Parse an expression from an ongoing token stream (used by the spec
/// parser). Stops at the first token that cannot extend the expression.
pub fn expr(cur: &mut Cursor) -> Result<Expr> {
    implies(cur)
}

fn implies(cur: &mut Cursor) -> Result<Expr> {
    let lhs = or_expr(cur)?;
    if cur.eat(&Tok::Implies) {
        let pos = lhs.pos;
        let rhs = implies(cur)?; // right-associative
        return Ok(Expr::new(
            ExprKind::Binary {
                op: BinOp::Implies,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        ));
    }
    Ok(lhs)
}

fn or_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = and_expr(cur)?;
    while cur.eat_kw("or") {
        let rhs = and_expr(cur)?;
        let pos = lhs.pos;
        lhs = Expr::new(
            ExprKind::Binary {
                op: BinOp::Or,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        );
    }
    Ok(lhs)
}

fn and_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = cmp(cur)?;
    while cur.eat(&Tok::Amp) {
        let rhs = cmp(cur)?;
        let pos = lhs.pos;
        lhs = Expr::new(
            ExprKind::Binary {
                op: BinOp::And,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        );
    }
    Ok(lhs)
}

fn cmp(cur: &mut Cursor) -> Result<Expr> {
    let lhs = union_expr(cur)?;
    let op = match cur.peek() {
        Some(Tok::Eq) => BinOp::Eq,
        Some(Tok::Ne) => BinOp::Ne,
        Some(Tok::Colon) => BinOp::In,
        Some(Tok::Subset) => BinOp::Subset,
        _ => return Ok(lhs),
    };
    cur.advance();
    let rhs = union_expr(cur)?;
    let pos = lhs.pos;
    Ok(Expr::new(
        ExprKind::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        },
        pos,
    ))
}

fn union_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = minus_expr(cur)?;
    while cur.eat(&Tok::Union) {
        let rhs = minus_expr(cur)?;
        let pos = lhs.pos;
        lhs = Expr::new(
            ExprKind::Binary {
                op: BinOp::Union,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        );
    }
    Ok(lhs)
}

fn minus_expr(cur: &mut Cursor) -> Result<Expr> {
    let mut lhs = postfix(cur)?;
    while cur.eat(&Tok::Minus) {
        let rhs = postfix(cur)?;
        let pos = lhs.pos;
        lhs = Expr::new(
            ExprKind::Binary {
                op: BinOp::Minus,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            pos,
        );
    }
    Ok(lhs)
}

fn postfix(cur: &mut Cursor) -> Result<Expr> {
    let mut e = primary(cur)?;
    loop {
        if cur.eat(&Tok::Dot) {
            let (feature, pos) = cur.expect_ident()?;
            e = Expr::new(
                ExprKind::Nav {
                    recv: Box::new(e),
                    feature,
                    decl: None,
                },
                pos,
            );
        } else if cur.eat(&Tok::AtPre) {
            let pos = e.pos;
            e = Expr::new(ExprKind::AtPre(Box::new(e)), pos);
        } else if cur.peek() == Some(&Tok::Arrow) {
            cur.advance();
            let (call, cpos) = cur.expect_ident()?;
            cur.expect(&Tok::LParen)?;
            e = match call.as_str() {
                "size" => {
                    cur.expect(&Tok::RParen)?;
                    Expr::new(ExprKind::SizeOf(Box::new(e)), cpos)
                }
                "isDeleted" => {
                    cur.expect(&Tok::RParen)?;
                    Expr::new(ExprKind::IsDeleted(Box::new(e)), cpos)
                }
                "select" => {
                    // `select(v | pred)` or binderless `select(pred)`
                    let binder = if matches!(cur.peek(), Some(Tok::Ident(_)))
                        && cur.peek2() == Some(&Tok::Pipe)
                    {
                        let (b, _) = cur.expect_ident()?;
                        cur.expect(&Tok::Pipe)?;
                        Some(b)
                    } else {
                        None
                    };
                    let pred = expr(cur)?;
                    cur.expect(&Tok::RParen)?;
                    Expr::new(
                        ExprKind::Select {
                            src: Box::new(e),
                            binder,
                            pred: Box::new(pred),
                        },
                        cpos,
                    )
                }
                "exists" | "exists1" => {
                    let (binder, _) = cur.expect_ident()?;
                    cur.expect(&Tok::Pipe)?;
                    let body = expr(cur)?;
                    cur.expect(&Tok::RParen)?;
                    Expr::new(
                        ExprKind::Exists {
                            src: Box::new(e),
                            binder,
                            body: Box::new(body),
                            unique: call == "exists1",
                        },
                        cpos,
                    )
                }
                other => {
                    return Err(UmtError::syntax(
                        cpos,
                        format!("unknown operation `->{other}`; expected size, select, exists, exists1 or isDeleted"),
                    ));
                }
            };
        } else {
            return Ok(e);
        }
    }
}

fn primary(cur: &mut Cursor) -> Result<Expr> {
    let pos = cur.pos();
    match cur.peek() {
        Some(Tok::Int(n)) => {
            let n = *n;
            cur.advance();
            Ok(Expr::new(ExprKind::IntLit(n), pos))
        }
        Some(Tok::Str(s)) => {
            let s = s.clone();
            cur.advance();
            Ok(Expr::new(ExprKind::StrLit(s), pos))
        }
        Some(Tok::LBrace) => {
            cur.advance();
            cur.expect(&Tok::RBrace)?;
            Ok(Expr::new(ExprKind::EmptySet, pos))
        }
        Some(Tok::LParen) => {
            cur.advance();
            let e = expr(cur)?;
            cur.expect(&Tok::RParen)?;
            Ok(e)
        }
        Some(Tok::Ident(_)) => {
            let (name, pos) = cur.expect_ident()?;
            if cur.eat(&Tok::LBracket) {
                let index = expr(cur)?;
                cur.expect(&Tok::RBracket)?;
                Ok(Expr::new(
                    ExprKind::KeyLookup {
                        entity: name,
                        index: Box::new(index),
                    },
                    pos,
                ))
            } else {
                Ok(Expr::new(ExprKind::Name(name), pos))
            }
        }
        Some(other) => Err(UmtError::syntax(
            pos,
            format!("unexpected {other} in expression"),
        )),
        None => Err(UmtError::syntax(
            pos,
            "unexpected end of input in expression",
        )),
    }
}
