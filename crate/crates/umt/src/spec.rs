//! Transformation specifications: assumptions plus an ordered list of
//! constraints, parsed and resolved against the loaded metamodels.
//!
//! File format (`--` comments):
//!
//! ```text
//! transformation Name (param : String, ...)
//!
//! assumption [Label] [on Entity] : expr
//!
//! constraint [Label] [on Entity] : [antecedent =>] succedent
//! ```
//!
//! Antecedent conjuncts of the form `v : coll` where `v` is not otherwise
//! bound become iterator variables; the rest is the residual antecedent.
//! Each constraint's succedent is classified as creation, update-in-place,
//! deletion, or — when it has no context entity — static (run once).

use std::collections::BTreeMap;

use crate::error::{Result, UmtError};
use crate::expr::eval::{as_bool, eval, Env, EvalMode};
use crate::expr::parse as eparse;
use crate::expr::post::{post_atoms, PostAtom};
use crate::expr::resolve::{Resolver, Type};
use crate::expr::{BinOp, Expr, ExprKind};
use crate::lexer::{Cursor, Tok};
use crate::metamodel::{MetamodelSet, ValueType};
use crate::model::{ModelState, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Creation,
    UpdateInPlace,
    Deletion,
    Static,
}

impl std::fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintKind::Creation => write!(f, "creation"),
            ConstraintKind::UpdateInPlace => write!(f, "update-in-place"),
            ConstraintKind::Deletion => write!(f, "deletion"),
            ConstraintKind::Static => write!(f, "static"),
        }
    }
}

/// An iterator variable harvested from the antecedent: `v : domain`.
#[derive(Debug, Clone)]
pub struct IterVar {
    pub var: String,
    pub domain: Expr,
    pub elem_entity: String,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub label: String,
    pub context: Option<String>,
    pub iterators: Vec<IterVar>,
    /// Residual antecedent after iterator extraction; `None` means true.
    pub antecedent: Option<Expr>,
    pub succedent: Expr,
    pub kind: ConstraintKind,
    /// Normalized source text, for reports.
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Assumption {
    pub label: String,
    pub context: Option<String>,
    pub expr: Expr,
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct TransformationSpec {
    pub name: String,
    pub params: Vec<(String, ValueType)>,
    pub assumptions: Vec<Assumption>,
    pub constraints: Vec<Constraint>,
}

/// Result of checking one assumption against a model.
#[derive(Debug, Clone)]
pub struct AssumptionVerdict {
    pub label: String,
    pub passed: bool,
    /// Label of the first violating context object, if any.
    pub witness: Option<String>,
    pub text: String,
}

impl std::fmt::Display for AssumptionVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            write!(f, "assumption {}: pass", self.label)
        } else {
            match &self.witness {
                Some(w) => write!(
                    f,
                    "assumption {}: FAIL witness={} ({})",
                    self.label, w, self.text
                ),
                None => write!(f, "assumption {}: FAIL ({})", self.label, self.text),
            }
        }
    }
}

impl TransformationSpec {
    pub fn parse(text: &str, mm: &MetamodelSet) -> Result<TransformationSpec> {
        let mut cur = Cursor::from_source(text)?;
        cur.expect_kw("transformation")?;
        let (name, _) = cur.expect_ident()?;
        let mut params: Vec<(String, ValueType)> = Vec::new();
        if cur.eat(&Tok::LParen) {
            while !cur.eat(&Tok::RParen) {
                if !params.is_empty() {
                    cur.expect(&Tok::Comma)?;
                }
                let (pname, _) = cur.expect_ident()?;
                cur.expect(&Tok::Colon)?;
                let (ty, tpos) = cur.expect_ident()?;
                let vt = match ty.as_str() {
                    "String" => ValueType::Str,
                    "Int" => ValueType::Int,
                    other => {
                        return Err(UmtError::syntax(
                            tpos,
                            format!("parameter type must be String or Int, found `{other}`"),
                        ));
                    }
                };
                params.push((pname, vt));
            }
        }

        let mut assumptions = Vec::new();
        let mut constraints = Vec::new();
        while !cur.at_end() {
            let pos = cur.pos();
            if cur.eat_kw("assumption") {
                let (label, context) =
                    label_and_context(&mut cur, format!("Asm{}", assumptions.len()))?;
                check_context(mm, context.as_deref(), pos)?;
                cur.expect(&Tok::Colon)?;
                let raw = eparse::expr(&mut cur)?;
                let text = raw.to_string();
                let mut resolver = Resolver::new(mm, &params, context.as_deref());
                let (expr, ty) = resolver.resolve(&raw)?;
                if !matches!(ty, Type::Bool | Type::Unknown) {
                    return Err(UmtError::resolve(
                        raw.pos,
                        format!("assumption must be boolean, found {ty}"),
                    ));
                }
                assumptions.push(Assumption {
                    label,
                    context,
                    expr,
                    text,
                });
            } else if cur.eat_kw("constraint") {
                let (label, context) =
                    label_and_context(&mut cur, format!("C{}", constraints.len() + 1))?;
                check_context(mm, context.as_deref(), pos)?;
                cur.expect(&Tok::Colon)?;
                let raw = eparse::expr(&mut cur)?;
                constraints.push(build_constraint(mm, &params, label, context, raw)?);
            } else {
                return Err(UmtError::syntax(
                    pos,
                    format!(
                        "expected `assumption` or `constraint`, found {}",
                        cur.peek()
                            .map(|t| t.to_string())
                            .unwrap_or_else(|| "end of input".into())
                    ),
                ));
            }
        }
        Ok(TransformationSpec {
            name,
            params,
            assumptions,
            constraints,
        })
    }
}

fn check_context(mm: &MetamodelSet, context: Option<&str>, pos: crate::error::Pos) -> Result<()> {
    if let Some(ctx) = context {
        if mm.entity(ctx).is_none() {
            return Err(UmtError::resolve(
                pos,
                format!("unknown context entity `{ctx}`"),
            ));
        }
    }
    Ok(())
}

fn label_and_context(cur: &mut Cursor, default_label: String) -> Result<(String, Option<String>)> {
    let mut label = default_label;
    if let Some(Tok::Ident(s)) = cur.peek() {
        if s != "on" {
            label = cur.expect_ident()?.0;
        }
    }
    let context = if cur.eat_kw("on") {
        Some(cur.expect_ident()?.0)
    } else {
        None
    };
    Ok((label, context))
}

fn build_constraint(
    mm: &MetamodelSet,
    params: &[(String, ValueType)],
    label: String,
    context: Option<String>,
    raw: Expr,
) -> Result<Constraint> {
    let text = raw.to_string();
    let (raw_antecedent, raw_succedent) = match raw.kind {
        ExprKind::Binary {
            op: BinOp::Implies,
            lhs,
            rhs,
        } => (Some(*lhs), *rhs),
        _ => (None, raw),
    };

    let mut resolver = Resolver::new(mm, params, context.as_deref());
    let mut iterators: Vec<IterVar> = Vec::new();
    let mut residual_raw: Vec<Expr> = Vec::new();

    if let Some(ante) = &raw_antecedent {
        for conjunct in ante.conjuncts() {
            if let ExprKind::Binary {
                op: BinOp::In,
                lhs,
                rhs,
            } = &conjunct.kind
            {
                if let ExprKind::Name(v) = &lhs.kind {
                    if !resolver.name_resolves(v) {
                        let (domain, dty) = resolver.resolve(rhs)?;
                        let elem = dty.elem();
                        let elem_entity = match &elem {
                            Type::Obj(e) => e.clone(),
                            _ => {
                                return Err(UmtError::resolve(
                                    conjunct.pos,
                                    format!(
                                        "iterator `{v}` must range over a collection of objects, found {dty}"
                                    ),
                                ));
                            }
                        };
                        resolver.push_binder(v, elem);
                        iterators.push(IterVar {
                            var: v.clone(),
                            domain,
                            elem_entity,
                        });
                        continue;
                    }
                }
            }
            residual_raw.push(conjunct.clone());
        }
    }

    let antecedent = match residual_raw.len() {
        0 => None,
        _ => {
            let mut it = residual_raw.into_iter();
            let first = it.next().unwrap();
            let combined = it.fold(first, |acc, c| {
                let pos = acc.pos;
                Expr::new(
                    ExprKind::Binary {
                        op: BinOp::And,
                        lhs: Box::new(acc),
                        rhs: Box::new(c),
                    },
                    pos,
                )
            });
            let (resolved, ty) = resolver.resolve(&combined)?;
            if !matches!(ty, Type::Bool | Type::Unknown) {
                return Err(UmtError::resolve(
                    combined.pos,
                    format!("antecedent must be boolean, found {ty}"),
                ));
            }
            Some(resolved)
        }
    };

    let (succedent, _) = resolver.resolve(&raw_succedent)?;
    let atoms = post_atoms(&succedent, mm)?;
    let kind = classify_atoms(&atoms, context.as_deref(), &succedent)?;

    Ok(Constraint {
        label,
        context,
        iterators,
        antecedent,
        succedent,
        kind,
        text,
    })
}

fn classify_atoms(
    atoms: &[PostAtom<'_>],
    context: Option<&str>,
    succedent: &Expr,
) -> Result<ConstraintKind> {
    let deletes = atoms
        .iter()
        .filter(|a| matches!(a, PostAtom::DeleteAll { .. }))
        .count();
    let creates = atoms
        .iter()
        .filter(|a| matches!(a, PostAtom::Create { .. }))
        .count();
    if deletes > 0 && deletes != atoms.len() {
        return Err(UmtError::resolve(
            succedent.pos,
            "unclassifiable succedent: `isDeleted` atoms cannot be mixed with other effects",
        ));
    }
    if context.is_none() {
        return Ok(ConstraintKind::Static);
    }
    Ok(if deletes > 0 {
        ConstraintKind::Deletion
    } else if creates > 0 {
        ConstraintKind::Creation
    } else {
        ConstraintKind::UpdateInPlace
    })
}

/// Evaluate every assumption against a model. Context assumptions are
/// checked for each extent member; the first violating object is the witness.
pub fn check_assumptions(
    spec: &TransformationSpec,
    state: &ModelState,
    params: &BTreeMap<String, Value>,
) -> Result<Vec<AssumptionVerdict>> {
    let mut out = Vec::new();
    for asm in &spec.assumptions {
        let mut verdict = AssumptionVerdict {
            label: asm.label.clone(),
            passed: true,
            witness: None,
            text: asm.text.clone(),
        };
        match &asm.context {
            Some(entity) => {
                for &id in state.extent(entity) {
                    let mut env = Env::new(params, None).with_self(id);
                    let ok = as_bool(&eval(&asm.expr, &mut env, state, EvalMode::Declarative)?)?;
                    if !ok {
                        verdict.passed = false;
                        verdict.witness = Some(state.label_of(id).to_string());
                        break;
                    }
                }
            }
            None => {
                let mut env = Env::new(params, None);
                let ok = as_bool(&eval(&asm.expr, &mut env, state, EvalMode::Declarative)?)?;
                verdict.passed = ok;
            }
        }
        out.push(verdict);
    }
    Ok(out)
}
