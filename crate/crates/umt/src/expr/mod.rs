//! The first-order/OCL-style expression language used by assumptions and
//! constraints: navigation, set operations, `select`/`size`/`exists`/
//! `exists1`/`isDeleted`, key lookup `Entity[keys]`, and `@pre`.
//!
//! Expressions go through three stages:
//!
//! 1. [`parse::parse_expr`] builds a raw AST in which bare identifiers are
//!    [`ExprKind::Name`] nodes.
//! 2. [`resolve::Resolver`] rewrites names to variables, self-navigations or
//!    type extents against the loaded metamodels, synthesizes binders for
//!    binderless `select`, and annotates navigations with their declaring
//!    entity. Resolution order for a bare name: innermost binder, outer
//!    binders, parameters, context-entity features, entity names.
//! 3. [`eval::eval`] evaluates a resolved expression against a model state.
//!    Query mode rejects effectful forms (`isDeleted`, creation `exists`);
//!    declarative mode reads them as checks over existing instances.

pub mod eval;
pub mod footprint;
pub mod parse;
pub mod post;
pub mod resolve;

use crate::error::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Eq,      // =
    Ne,      // /=
    In,      // :
    Subset,  // <:
    Union,   // \/
    Minus,   // -
    And,     // &
    Or,      // or
    Implies, // =>
}

impl std::fmt::Display for BinOp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::In => ":",
            BinOp::Subset => "<:",
            BinOp::Union => "\\/",
            BinOp::Minus => "-",
            BinOp::And => "&",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    IntLit(i64),
    StrLit(String),
    EmptySet,
    /// Unresolved identifier; only present before resolution.
    Name(String),
    /// The context object of a constraint or assumption.
    SelfVar,
    /// Iterator/binder variable or spec parameter.
    Var(String),
    Nav {
        recv: Box<Expr>,
        feature: String,
        /// Entity that declares the feature; filled in by the resolver.
        decl: Option<String>,
    },
    AtPre(Box<Expr>),
    /// An entity name used as an expression: the current extent.
    TypeExtent(String),
    /// `Entity[keys]`: extent members whose key value lies in `keys`.
    KeyLookup {
        entity: String,
        index: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    SizeOf(Box<Expr>),
    Select {
        src: Box<Expr>,
        binder: Option<String>,
        pred: Box<Expr>,
    },
    /// `exists` / `exists1` (`unique` = true for `exists1`).
    Exists {
        src: Box<Expr>,
        binder: String,
        body: Box<Expr>,
        unique: bool,
    },
    IsDeleted(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    pub fn new(kind: ExprKind, pos: Pos) -> Expr {
        Expr { kind, pos }
    }

    /// Flatten a chain of `&` conjuncts in source order.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            if let ExprKind::Binary {
                op: BinOp::And,
                lhs,
                rhs,
            } = &e.kind
            {
                walk(lhs, out);
                walk(rhs, out);
            } else {
                out.push(e);
            }
        }
        walk(self, &mut out);
        out
    }
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ExprKind::IntLit(n) => write!(f, "{n}"),
            ExprKind::StrLit(s) => write!(f, "\"{s}\""),
            ExprKind::EmptySet => write!(f, "{{}}"),
            ExprKind::Name(n) | ExprKind::Var(n) => write!(f, "{n}"),
            ExprKind::SelfVar => write!(f, "self"),
            ExprKind::Nav { recv, feature, .. } => {
                if matches!(recv.kind, ExprKind::SelfVar) {
                    write!(f, "{feature}")
                } else {
                    write!(f, "{recv}.{feature}")
                }
            }
            ExprKind::AtPre(e) => write!(f, "{e}@pre"),
            ExprKind::TypeExtent(e) => write!(f, "{e}"),
            ExprKind::KeyLookup { entity, index } => write!(f, "{entity}[{index}]"),
            ExprKind::Binary { op, lhs, rhs } => write!(f, "({lhs} {op} {rhs})"),
            ExprKind::SizeOf(e) => write!(f, "{e}->size()"),
            ExprKind::Select { src, binder, pred } => match binder {
                Some(b) if !b.starts_with('$') => write!(f, "{src}->select({b} | {pred})"),
                _ => write!(f, "{src}->select({pred})"),
            },
            ExprKind::Exists {
                src,
                binder,
                body,
                unique,
            } => {
                let kw = if *unique { "exists1" } else { "exists" };
                write!(f, "{src}->{kw}({binder} | {body})")
            }
            ExprKind::IsDeleted(e) => write!(f, "{e}->isDeleted()"),
        }
    }
}
