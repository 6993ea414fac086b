//! Structural decomposition of succedents into constructive atoms.
//!
//! A succedent is a conjunction of atoms, each of which the engine knows how
//! to establish:
//!
//! - `Entity->exists(v | body)` / `Entity->exists1(v | body)` — creation;
//! - `x.f = expr` (or mirrored) — feature assignment on a bound object;
//! - `x : y.role` — insertion into a navigated collection;
//! - `coll->isDeleted()` — deletion of the collection's members.
//!
//! Anything else is a non-constructive atom and is rejected when the spec is
//! loaded.

use crate::error::{Pos, Result, UmtError};
use crate::metamodel::MetamodelSet;

use super::resolve::static_elem_entity;
use super::{BinOp, Expr, ExprKind};

/// The object a write applies to: the context object or a bound variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetVar<'a> {
    SelfObject,
    Var(&'a str),
}

impl std::fmt::Display for TargetVar<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TargetVar::SelfObject => write!(f, "self"),
            TargetVar::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug)]
pub enum PostAtom<'a> {
    Create {
        entity: &'a str,
        unique: bool,
        binder: &'a str,
        body: Vec<PostAtom<'a>>,
        pos: Pos,
    },
    Assign {
        target: TargetVar<'a>,
        feature: &'a str,
        /// Entity declaring the feature.
        decl: &'a str,
        rhs: &'a Expr,
        pos: Pos,
    },
    Insert {
        member: &'a Expr,
        owner: TargetVar<'a>,
        feature: &'a str,
        decl: &'a str,
        pos: Pos,
    },
    DeleteAll {
        coll: &'a Expr,
        /// Static element entity of the collection.
        entity: String,
        pos: Pos,
    },
}

fn target_var<'a>(e: &'a Expr) -> Option<(TargetVar<'a>, &'a str, &'a str)> {
    if let ExprKind::Nav {
        recv,
        feature,
        decl: Some(decl),
    } = &e.kind
    {
        match &recv.kind {
            ExprKind::SelfVar => Some((TargetVar::SelfObject, feature, decl)),
            ExprKind::Var(v) => Some((TargetVar::Var(v), feature, decl)),
            _ => None,
        }
    } else {
        None
    }
}

/// Decompose a resolved succedent into atoms, validating every conjunct.
pub fn post_atoms<'a>(succedent: &'a Expr, mm: &MetamodelSet) -> Result<Vec<PostAtom<'a>>> {
    succedent.conjuncts().iter().map(|c| atom(c, mm)).collect()
}

fn atom<'a>(e: &'a Expr, mm: &MetamodelSet) -> Result<PostAtom<'a>> {
    let pos = e.pos;
    match &e.kind {
        ExprKind::Exists {
            src,
            binder,
            body,
            unique,
        } => {
            let ExprKind::TypeExtent(entity) = &src.kind else {
                return Err(UmtError::resolve(
                    pos,
                    "only `Entity->exists(..)` over a type extent can be established constructively",
                ));
            };
            let body = post_atoms(body, mm)?;
            Ok(PostAtom::Create {
                entity,
                unique: *unique,
                binder,
                body,
                pos,
            })
        }
        ExprKind::Binary {
            op: BinOp::Eq,
            lhs,
            rhs,
        } => {
            if let Some((target, feature, decl)) = target_var(lhs) {
                Ok(PostAtom::Assign {
                    target,
                    feature,
                    decl,
                    rhs,
                    pos,
                })
            } else if let Some((target, feature, decl)) = target_var(rhs) {
                Ok(PostAtom::Assign {
                    target,
                    feature,
                    decl,
                    rhs: lhs,
                    pos,
                })
            } else {
                Err(UmtError::resolve(
                    pos,
                    format!("non-constructive atom `{e}`: neither side is a feature of a bound variable"),
                ))
            }
        }
        ExprKind::Binary {
            op: BinOp::In,
            lhs,
            rhs,
        } => {
            let Some((owner, feature, decl)) = target_var(rhs) else {
                return Err(UmtError::resolve(
                    pos,
                    format!("non-constructive atom `{e}`: membership target must be a navigated collection"),
                ));
            };
            Ok(PostAtom::Insert {
                member: lhs,
                owner,
                feature,
                decl,
                pos,
            })
        }
        ExprKind::IsDeleted(coll) => {
            let entity = static_elem_entity(coll, mm).ok_or_else(|| {
                UmtError::resolve(
                    pos,
                    format!("cannot determine the element entity of `{coll}`"),
                )
            })?;
            Ok(PostAtom::DeleteAll { coll, entity, pos })
        }
        _ => Err(UmtError::resolve(
            pos,
            format!("non-constructive atom `{e}`"),
        )),
    }
}

/// Binder variables introduced by creation atoms, recursively.
pub fn creation_binders<'a>(atoms: &[PostAtom<'a>]) -> Vec<&'a str> {
    let mut out = Vec::new();
    fn walk<'a>(atoms: &[PostAtom<'a>], out: &mut Vec<&'a str>) {
        for a in atoms {
            if let PostAtom::Create { binder, body, .. } = a {
                out.push(binder);
                walk(body, out);
            }
        }
    }
    walk(atoms, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;
    use crate::expr::resolve::Resolver;
    use crate::metamodel::Metamodel;

    fn mm() -> MetamodelSet {
        MetamodelSet::single(
            Metamodel::parse(
                "entity Graph { nodes : set(Node) ; edges : set(Edge) ; }\n\
                 entity Node { name : String ; }\n\
                 entity Edge { src : opt(Node) ; trg : opt(Node) ; }",
            )
            .unwrap(),
        )
    }

    #[test]
    fn decomposes_creation_with_nested_atoms() {
        let mm = mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        let (e, _) = r
            .resolve(&parse_expr("Edge->exists1(e3 | e3.src = nodes & e3 : edges)").unwrap())
            .unwrap();
        let atoms = post_atoms(&e, &mm).unwrap();
        assert_eq!(atoms.len(), 1);
        let PostAtom::Create {
            entity,
            unique,
            body,
            ..
        } = &atoms[0]
        else {
            panic!()
        };
        assert_eq!(*entity, "Edge");
        assert!(unique);
        assert_eq!(body.len(), 2);
        assert!(matches!(
            body[0],
            PostAtom::Assign {
                target: TargetVar::Var("e3"),
                ..
            }
        ));
        assert!(matches!(
            body[1],
            PostAtom::Insert {
                owner: TargetVar::SelfObject,
                ..
            }
        ));
        assert_eq!(creation_binders(&atoms), vec!["e3"]);
    }

    #[test]
    fn mirrored_assignment_targets_the_bound_side() {
        let mm = mm();
        let mut r = Resolver::new(&mm, &[], Some("Edge"));
        let (e, _) = r.resolve(&parse_expr("{} = src").unwrap()).unwrap();
        let atoms = post_atoms(&e, &mm).unwrap();
        let PostAtom::Assign {
            target,
            feature,
            rhs,
            ..
        } = &atoms[0]
        else {
            panic!()
        };
        assert!(matches!(target, TargetVar::SelfObject));
        assert_eq!(*feature, "src");
        assert!(matches!(rhs.kind, ExprKind::EmptySet));
    }

    #[test]
    fn rejects_non_constructive_atoms() {
        let mm = mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        let (e, _) = r
            .resolve(&parse_expr("nodes->size() = edges->size()").unwrap())
            .unwrap();
        assert!(post_atoms(&e, &mm).is_err());
    }

    #[test]
    fn deletion_atom_resolves_element_entity() {
        let mm = mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        let (e, _) = r
            .resolve(&parse_expr("edges->select(src = {})->isDeleted()").unwrap())
            .unwrap();
        let atoms = post_atoms(&e, &mm).unwrap();
        let PostAtom::DeleteAll { entity, .. } = &atoms[0] else {
            panic!()
        };
        assert_eq!(entity, "Edge");
    }
}
