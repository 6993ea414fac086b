//! Read and write footprints of expressions, the raw material for the
//! static non-interference check and for target-entity ordering.
//!
//! Reads are `(entity, feature-or-extent, atPre)` triples, with features
//! attributed to their declaring entity. Writes are the four effect kinds a
//! succedent can cause. The extent probe performed by a creation-form
//! `exists`/`exists1` is deliberately not a read: check-then-create
//! inspecting its own target extent is how unique creation works.

use std::collections::BTreeSet;

use crate::metamodel::{FeatureRef, MetamodelSet};

use super::post::{PostAtom, TargetVar};
use super::{Expr, ExprKind};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReadTarget {
    Extent(String),
    Feature { entity: String, feature: String },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ReadItem {
    pub target: ReadTarget,
    pub at_pre: bool,
}

impl std::fmt::Display for ReadItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let when = if self.at_pre { "pre" } else { "live" };
        match &self.target {
            ReadTarget::Extent(e) => write!(f, "read of extent ({e}) [{when}]"),
            ReadTarget::Feature { entity, feature } => {
                write!(f, "read of ({entity}, {feature}) [{when}]")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum WriteItem {
    CreateExtent(String),
    AssignFeature {
        entity: String,
        feature: String,
        new_object_only: bool,
    },
    InsertInto {
        entity: String,
        feature: String,
    },
    DeleteFrom(String),
}

impl std::fmt::Display for WriteItem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WriteItem::CreateExtent(e) => write!(f, "CreateExtent({e})"),
            WriteItem::AssignFeature {
                entity,
                feature,
                new_object_only,
            } => {
                let kind = if *new_object_only { "new" } else { "existing" };
                write!(f, "AssignFeature({entity}, {feature}, {kind})")
            }
            WriteItem::InsertInto { entity, feature } => {
                write!(f, "InsertInto({entity}, {feature})")
            }
            WriteItem::DeleteFrom(e) => write!(f, "DeleteFrom({e})"),
        }
    }
}

/// Every datum a query-mode evaluation of `e` may consult.
pub fn read_footprint(e: &Expr, mm: &MetamodelSet) -> BTreeSet<ReadItem> {
    let mut out = BTreeSet::new();
    collect_reads(e, mm, false, &mut out);
    out
}

fn collect_reads(e: &Expr, mm: &MetamodelSet, pre: bool, out: &mut BTreeSet<ReadItem>) {
    match &e.kind {
        ExprKind::IntLit(_)
        | ExprKind::StrLit(_)
        | ExprKind::EmptySet
        | ExprKind::Name(_)
        | ExprKind::SelfVar
        | ExprKind::Var(_) => {}
        ExprKind::Nav {
            recv,
            feature,
            decl,
        } => {
            if let Some(decl) = decl {
                out.insert(ReadItem {
                    target: ReadTarget::Feature {
                        entity: decl.clone(),
                        feature: feature.clone(),
                    },
                    at_pre: pre,
                });
            }
            collect_reads(recv, mm, pre, out);
        }
        ExprKind::AtPre(inner) => collect_reads(inner, mm, true, out),
        ExprKind::TypeExtent(entity) => {
            out.insert(ReadItem {
                target: ReadTarget::Extent(entity.clone()),
                at_pre: pre,
            });
        }
        ExprKind::KeyLookup { entity, index } => {
            out.insert(ReadItem {
                target: ReadTarget::Extent(entity.clone()),
                at_pre: pre,
            });
            if let Ok(Some((decl, attr))) = mm.key_attribute(entity) {
                out.insert(ReadItem {
                    target: ReadTarget::Feature {
                        entity: decl.to_string(),
                        feature: attr.name.clone(),
                    },
                    at_pre: pre,
                });
            }
            collect_reads(index, mm, pre, out);
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_reads(lhs, mm, pre, out);
            collect_reads(rhs, mm, pre, out);
        }
        ExprKind::SizeOf(inner) | ExprKind::IsDeleted(inner) => collect_reads(inner, mm, pre, out),
        ExprKind::Select { src, pred, .. } => {
            collect_reads(src, mm, pre, out);
            collect_reads(pred, mm, pre, out);
        }
        ExprKind::Exists { src, body, .. } => {
            collect_reads(src, mm, pre, out);
            collect_reads(body, mm, pre, out);
        }
    }
}

/// The write effects of a succedent, decomposed into atoms.
pub fn write_footprint(atoms: &[PostAtom<'_>]) -> Vec<WriteItem> {
    let mut out = Vec::new();
    let mut created: Vec<&str> = Vec::new();
    collect_writes(atoms, &mut created, &mut out);
    out
}

fn collect_writes<'a>(
    atoms: &[PostAtom<'a>],
    created: &mut Vec<&'a str>,
    out: &mut Vec<WriteItem>,
) {
    for a in atoms {
        match a {
            PostAtom::Create {
                entity,
                binder,
                body,
                ..
            } => {
                out.push(WriteItem::CreateExtent(entity.to_string()));
                created.push(binder);
                collect_writes(body, created, out);
            }
            PostAtom::Assign {
                target,
                feature,
                decl,
                ..
            } => {
                let new_object_only = match target {
                    TargetVar::SelfObject => false,
                    TargetVar::Var(v) => created.contains(v),
                };
                out.push(WriteItem::AssignFeature {
                    entity: decl.to_string(),
                    feature: feature.to_string(),
                    new_object_only,
                });
            }
            PostAtom::Insert { feature, decl, .. } => {
                out.push(WriteItem::InsertInto {
                    entity: decl.to_string(),
                    feature: feature.to_string(),
                });
            }
            PostAtom::DeleteAll { entity, .. } => {
                out.push(WriteItem::DeleteFrom(entity.clone()));
            }
        }
    }
}

/// Reads performed while establishing a succedent: right-hand sides of
/// assignments, inserted members and deletion filters. Write targets and
/// creation extent probes are excluded.
pub fn succedent_reads(atoms: &[PostAtom<'_>], mm: &MetamodelSet) -> BTreeSet<ReadItem> {
    let mut out = BTreeSet::new();
    collect_succedent_reads(atoms, mm, &mut out);
    out
}

fn collect_succedent_reads(
    atoms: &[PostAtom<'_>],
    mm: &MetamodelSet,
    out: &mut BTreeSet<ReadItem>,
) {
    for a in atoms {
        match a {
            PostAtom::Create { body, .. } => collect_succedent_reads(body, mm, out),
            PostAtom::Assign { rhs, .. } => collect_reads(rhs, mm, false, out),
            PostAtom::Insert { member, .. } => collect_reads(member, mm, false, out),
            PostAtom::DeleteAll { coll, .. } => collect_reads(coll, mm, false, out),
        }
    }
}

/// Source expressions a succedent evaluates (for dependency analysis).
pub fn succedent_read_exprs<'a>(atoms: &'a [PostAtom<'a>]) -> Vec<&'a Expr> {
    let mut out = Vec::new();
    fn walk<'a>(atoms: &'a [PostAtom<'a>], out: &mut Vec<&'a Expr>) {
        for a in atoms {
            match a {
                PostAtom::Create { body, .. } => walk(body, out),
                PostAtom::Assign { rhs, .. } => out.push(rhs),
                PostAtom::Insert { member, .. } => out.push(member),
                PostAtom::DeleteAll { coll, .. } => out.push(coll),
            }
        }
    }
    walk(atoms, &mut out);
    out
}

/// Entities whose instances a live (non-`@pre`) evaluation of `e` reads:
/// extents, key-lookup entities and the target entities of navigated ends.
/// `@pre` subtrees contribute nothing.
pub fn dependency_entities(e: &Expr, mm: &MetamodelSet, out: &mut BTreeSet<String>) {
    match &e.kind {
        ExprKind::AtPre(_) => {}
        ExprKind::TypeExtent(entity) => {
            out.insert(entity.clone());
        }
        ExprKind::KeyLookup { entity, index } => {
            out.insert(entity.clone());
            dependency_entities(index, mm, out);
        }
        ExprKind::Nav {
            recv,
            feature,
            decl,
        } => {
            if let Some(decl) = decl {
                if let Ok(Some(FeatureRef::End { end, .. })) = mm.lookup_feature(decl, feature) {
                    out.insert(end.target.clone());
                }
            }
            dependency_entities(recv, mm, out);
        }
        ExprKind::Binary { lhs, rhs, .. } => {
            dependency_entities(lhs, mm, out);
            dependency_entities(rhs, mm, out);
        }
        ExprKind::SizeOf(inner) | ExprKind::IsDeleted(inner) => dependency_entities(inner, mm, out),
        ExprKind::Select { src, pred, .. } => {
            dependency_entities(src, mm, out);
            dependency_entities(pred, mm, out);
        }
        ExprKind::Exists { src, body, .. } => {
            // the probe of a creation form targets the created entity itself
            // and never orders phases; collection sources still count
            if !matches!(src.kind, ExprKind::TypeExtent(_)) {
                dependency_entities(src, mm, out);
            }
            dependency_entities(body, mm, out);
        }
        _ => {}
    }
}
