//! Name resolution and light type checking of parsed expressions against a
//! metamodel set, a context entity, parameters and binder scopes.

use crate::error::{Pos, Result, UmtError};
use crate::metamodel::{FeatureRef, MetamodelSet, ValueType};

use super::{BinOp, Expr, ExprKind};

/// Static types of expression results.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Type {
    Int,
    Str,
    Bool,
    Obj(String),
    Coll(Box<Type>),
    /// `{}` or a collection whose element type could not be reconciled.
    EmptyColl,
    Unknown,
}

impl Type {
    pub fn coll_of(elem: Type) -> Type {
        Type::Coll(Box::new(elem))
    }

    pub fn is_coll(&self) -> bool {
        matches!(self, Type::Coll(_) | Type::EmptyColl)
    }

    /// Element type of a collection (`Unknown` for `{}`).
    pub fn elem(&self) -> Type {
        match self {
            Type::Coll(t) => (**t).clone(),
            Type::EmptyColl => Type::Unknown,
            _ => Type::Unknown,
        }
    }

    /// Entity name if this is an object or a collection of objects.
    pub fn entity(&self) -> Option<&str> {
        match self {
            Type::Obj(e) => Some(e),
            Type::Coll(t) => t.entity(),
            _ => None,
        }
    }
}

impl std::fmt::Display for Type {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Type::Int => write!(f, "Int"),
            Type::Str => write!(f, "String"),
            Type::Bool => write!(f, "Boolean"),
            Type::Obj(e) => write!(f, "{e}"),
            Type::Coll(t) => write!(f, "collection of {t}"),
            Type::EmptyColl => write!(f, "empty collection"),
            Type::Unknown => write!(f, "unknown"),
        }
    }
}

impl From<ValueType> for Type {
    fn from(v: ValueType) -> Type {
        match v {
            ValueType::Str => Type::Str,
            ValueType::Int => Type::Int,
        }
    }
}

#[derive(Debug, Clone)]
enum Layer {
    /// An explicit binder: `exists(e2 | ...)`, iterator variables, params.
    Binder { name: String, ty: Type },
    /// A binderless `select`: features of the element entity resolve bare,
    /// rewritten as navigations from the synthesized binder.
    Implicit { synth: String, entity: String },
}

/// Resolves and type-checks expressions. One resolver per scope context
/// (spec parameters + optional context entity); binder layers are pushed
/// and popped as quantifiers are entered.
pub struct Resolver<'a> {
    mm: &'a MetamodelSet,
    params: Vec<(String, Type)>,
    context: Option<String>,
    layers: Vec<Layer>,
    synth_counter: u32,
}

impl<'a> Resolver<'a> {
    pub fn new(
        mm: &'a MetamodelSet,
        params: &[(String, ValueType)],
        context: Option<&str>,
    ) -> Resolver<'a> {
        Resolver {
            mm,
            params: params
                .iter()
                .map(|(n, t)| (n.clone(), Type::from(*t)))
                .collect(),
            context: context.map(|s| s.to_string()),
            layers: Vec::new(),
            synth_counter: 0,
        }
    }

    pub fn push_binder(&mut self, name: &str, ty: Type) {
        self.layers.push(Layer::Binder {
            name: name.to_string(),
            ty,
        });
    }

    pub fn pop_binder(&mut self) {
        self.layers.pop();
    }

    /// Would a bare name resolve at all in the current scope?
    pub fn name_resolves(&self, name: &str) -> bool {
        for layer in self.layers.iter().rev() {
            match layer {
                Layer::Binder { name: n, .. } if n == name => return true,
                Layer::Implicit { entity, .. } => {
                    if matches!(self.mm.lookup_feature(entity, name), Ok(Some(_))) {
                        return true;
                    }
                }
                _ => {}
            }
        }
        if self.params.iter().any(|(n, _)| n == name) {
            return true;
        }
        if let Some(ctx) = &self.context {
            if matches!(self.mm.lookup_feature(ctx, name), Ok(Some(_))) {
                return true;
            }
        }
        self.mm.entity(name).is_some()
    }

    fn resolve_name(&self, name: &str, pos: Pos) -> Result<(Expr, Type)> {
        for layer in self.layers.iter().rev() {
            match layer {
                Layer::Binder { name: n, ty } if n == name => {
                    return Ok((Expr::new(ExprKind::Var(name.to_string()), pos), ty.clone()));
                }
                Layer::Implicit { synth, entity } => {
                    if let Some(fref) = self.mm.lookup_feature(entity, name)? {
                        let recv = Expr::new(ExprKind::Var(synth.clone()), pos);
                        return Ok(self.nav_result(recv, name, fref, false, pos));
                    }
                }
                _ => {}
            }
        }
        if let Some((_, ty)) = self.params.iter().find(|(n, _)| n == name) {
            return Ok((Expr::new(ExprKind::Var(name.to_string()), pos), ty.clone()));
        }
        if let Some(ctx) = self.context.clone() {
            if let Some(fref) = self.mm.lookup_feature(&ctx, name)? {
                let recv = Expr::new(ExprKind::SelfVar, pos);
                return Ok(self.nav_result(recv, name, fref, false, pos));
            }
        }
        if self.mm.entity(name).is_some() {
            return Ok((
                Expr::new(ExprKind::TypeExtent(name.to_string()), pos),
                Type::coll_of(Type::Obj(name.to_string())),
            ));
        }
        Err(UmtError::resolve(
            pos,
            format!("cannot resolve name `{name}`"),
        ))
    }

    /// Build the resolved navigation node and its type. `flatten` is true
    /// when the receiver is a collection.
    fn nav_result(
        &self,
        recv: Expr,
        feature: &str,
        fref: FeatureRef<'_>,
        flatten: bool,
        pos: Pos,
    ) -> (Expr, Type) {
        let decl = fref.decl_entity().to_string();
        let ty = match fref {
            FeatureRef::Attr { attr, .. } => {
                let scalar = Type::from(attr.value_type);
                if flatten {
                    Type::coll_of(scalar)
                } else {
                    scalar
                }
            }
            FeatureRef::End { end, .. } => Type::coll_of(Type::Obj(end.target.clone())),
        };
        (
            Expr::new(
                ExprKind::Nav {
                    recv: Box::new(recv),
                    feature: feature.to_string(),
                    decl: Some(decl),
                },
                pos,
            ),
            ty,
        )
    }

    /// Resolve a parsed expression, producing the rewritten tree and its type.
    pub fn resolve(&mut self, e: &Expr) -> Result<(Expr, Type)> {
        self.resolve_inner(e, false)
    }

    fn resolve_inner(&mut self, e: &Expr, in_pre: bool) -> Result<(Expr, Type)> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::IntLit(n) => Ok((Expr::new(ExprKind::IntLit(*n), pos), Type::Int)),
            ExprKind::StrLit(s) => Ok((Expr::new(ExprKind::StrLit(s.clone()), pos), Type::Str)),
            ExprKind::EmptySet => Ok((Expr::new(ExprKind::EmptySet, pos), Type::EmptyColl)),
            ExprKind::Name(n) => self.resolve_name(n, pos),
            ExprKind::SelfVar => {
                let ctx = self.context.clone().ok_or_else(|| {
                    UmtError::resolve(pos, "`self` used without a context entity")
                })?;
                Ok((Expr::new(ExprKind::SelfVar, pos), Type::Obj(ctx)))
            }
            ExprKind::Var(n) => self.resolve_name(n, pos),
            ExprKind::Nav { recv, feature, .. } => {
                let resolved_recv = match self.resolve_inner(recv, in_pre) {
                    Ok(ok) => ok,
                    // Specs conventionally write `g.edges` inside a
                    // constraint on Graph for the context object's own
                    // `edges`. If the receiver name does not resolve but the
                    // feature exists on the context entity, read it as a
                    // self-navigation.
                    Err(err @ UmtError::Resolve { .. }) => {
                        if let (ExprKind::Name(_), Some(ctx)) = (&recv.kind, self.context.clone()) {
                            if self.mm.lookup_feature(&ctx, feature)?.is_some() {
                                (Expr::new(ExprKind::SelfVar, recv.pos), Type::Obj(ctx))
                            } else {
                                return Err(err);
                            }
                        } else {
                            return Err(err);
                        }
                    }
                    Err(err) => return Err(err),
                };
                let (recv_expr, recv_ty) = resolved_recv;
                match &recv_ty {
                    Type::Obj(entity) => {
                        let fref = self.mm.lookup_feature(entity, feature)?.ok_or_else(|| {
                            UmtError::resolve(
                                pos,
                                format!("entity `{entity}` has no feature `{feature}`"),
                            )
                        })?;
                        Ok(self.nav_result(recv_expr, feature, fref, false, pos))
                    }
                    Type::Coll(inner) => match inner.as_ref() {
                        Type::Obj(entity) => {
                            let fref =
                                self.mm.lookup_feature(entity, feature)?.ok_or_else(|| {
                                    UmtError::resolve(
                                        pos,
                                        format!("entity `{entity}` has no feature `{feature}`"),
                                    )
                                })?;
                            Ok(self.nav_result(recv_expr, feature, fref, true, pos))
                        }
                        other => Err(UmtError::resolve(
                            pos,
                            format!("cannot navigate `{feature}` over a collection of {other}"),
                        )),
                    },
                    other => Err(UmtError::resolve(
                        pos,
                        format!("cannot navigate `{feature}` on a value of type {other}"),
                    )),
                }
            }
            ExprKind::AtPre(inner) => {
                if in_pre {
                    return Err(UmtError::resolve(
                        pos,
                        "`@pre` cannot be nested inside `@pre`",
                    ));
                }
                let (ie, ty) = self.resolve_inner(inner, true)?;
                Ok((Expr::new(ExprKind::AtPre(Box::new(ie)), pos), ty))
            }
            ExprKind::TypeExtent(entity) => {
                self.mm
                    .entity(entity)
                    .ok_or_else(|| UmtError::resolve(pos, format!("unknown entity `{entity}`")))?;
                Ok((
                    Expr::new(ExprKind::TypeExtent(entity.clone()), pos),
                    Type::coll_of(Type::Obj(entity.clone())),
                ))
            }
            ExprKind::KeyLookup { entity, index } => {
                self.mm
                    .entity(entity)
                    .ok_or_else(|| UmtError::resolve(pos, format!("unknown entity `{entity}`")))?;
                if self.mm.key_attribute(entity)?.is_none() {
                    return Err(UmtError::resolve(
                        pos,
                        format!("entity `{entity}` has no key attribute, so `{entity}[..]` is not available"),
                    ));
                }
                let (idx, ity) = self.resolve_inner(index, in_pre)?;
                match &ity {
                    Type::Str | Type::EmptyColl | Type::Unknown => {}
                    Type::Coll(t) if matches!(t.as_ref(), Type::Str | Type::Unknown) => {}
                    other => {
                        return Err(UmtError::resolve(
                            pos,
                            format!("key lookup expects string keys, found {other}"),
                        ));
                    }
                }
                Ok((
                    Expr::new(
                        ExprKind::KeyLookup {
                            entity: entity.clone(),
                            index: Box::new(idx),
                        },
                        pos,
                    ),
                    Type::coll_of(Type::Obj(entity.clone())),
                ))
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let (le, lt) = self.resolve_inner(lhs, in_pre)?;
                let (re, rt) = self.resolve_inner(rhs, in_pre)?;
                let ty = self.binary_type(*op, &lt, &rt, pos)?;
                Ok((
                    Expr::new(
                        ExprKind::Binary {
                            op: *op,
                            lhs: Box::new(le),
                            rhs: Box::new(re),
                        },
                        pos,
                    ),
                    ty,
                ))
            }
            ExprKind::SizeOf(inner) => {
                let (ie, ty) = self.resolve_inner(inner, in_pre)?;
                if !ty.is_coll() && ty != Type::Unknown {
                    return Err(UmtError::resolve(
                        pos,
                        format!("`->size()` expects a collection, found {ty}"),
                    ));
                }
                Ok((Expr::new(ExprKind::SizeOf(Box::new(ie)), pos), Type::Int))
            }
            ExprKind::Select { src, binder, pred } => {
                let (se, st) = self.resolve_inner(src, in_pre)?;
                if !st.is_coll() {
                    return Err(UmtError::resolve(
                        pos,
                        format!("`->select(..)` expects a collection, found {st}"),
                    ));
                }
                let elem = st.elem();
                let binder_name = match binder {
                    Some(b) => {
                        self.layers.push(Layer::Binder {
                            name: b.clone(),
                            ty: elem,
                        });
                        b.clone()
                    }
                    None => {
                        let entity = match &elem {
                            Type::Obj(e) => e.clone(),
                            other => {
                                return Err(UmtError::resolve(
                                    pos,
                                    format!(
                                        "binderless `select` needs a collection of objects, found collection of {other}"
                                    ),
                                ));
                            }
                        };
                        self.synth_counter += 1;
                        let synth = format!("${}", self.synth_counter);
                        self.layers.push(Layer::Implicit {
                            synth: synth.clone(),
                            entity,
                        });
                        synth
                    }
                };
                let pred_res = self.resolve_inner(pred, in_pre);
                self.layers.pop();
                let (pe, pt) = pred_res?;
                self.require_bool(&pt, pred.pos, "select predicate")?;
                Ok((
                    Expr::new(
                        ExprKind::Select {
                            src: Box::new(se),
                            binder: Some(binder_name),
                            pred: Box::new(pe),
                        },
                        pos,
                    ),
                    st,
                ))
            }
            ExprKind::Exists {
                src,
                binder,
                body,
                unique,
            } => {
                let (se, st) = self.resolve_inner(src, in_pre)?;
                if !st.is_coll() {
                    return Err(UmtError::resolve(
                        pos,
                        format!("`->exists(..)` expects a collection or entity, found {st}"),
                    ));
                }
                self.layers.push(Layer::Binder {
                    name: binder.clone(),
                    ty: st.elem(),
                });
                let body_res = self.resolve_inner(body, in_pre);
                self.layers.pop();
                let (be, bt) = body_res?;
                self.require_bool(&bt, body.pos, "exists body")?;
                Ok((
                    Expr::new(
                        ExprKind::Exists {
                            src: Box::new(se),
                            binder: binder.clone(),
                            body: Box::new(be),
                            unique: *unique,
                        },
                        pos,
                    ),
                    Type::Bool,
                ))
            }
            ExprKind::IsDeleted(coll) => {
                let (ce, ct) = self.resolve_inner(coll, in_pre)?;
                if !ct.is_coll() {
                    return Err(UmtError::resolve(
                        pos,
                        format!("`->isDeleted()` expects a collection, found {ct}"),
                    ));
                }
                Ok((
                    Expr::new(ExprKind::IsDeleted(Box::new(ce)), pos),
                    Type::Bool,
                ))
            }
        }
    }

    fn require_bool(&self, ty: &Type, pos: Pos, what: &str) -> Result<()> {
        if matches!(ty, Type::Bool | Type::Unknown) {
            Ok(())
        } else {
            Err(UmtError::resolve(
                pos,
                format!("{what} must be boolean, found {ty}"),
            ))
        }
    }

    fn binary_type(&self, op: BinOp, lt: &Type, rt: &Type, pos: Pos) -> Result<Type> {
        match op {
            BinOp::Eq | BinOp::Ne => {
                if self.comparable_types(lt, rt) {
                    Ok(Type::Bool)
                } else {
                    Err(UmtError::resolve(
                        pos,
                        format!("cannot compare {lt} with {rt}"),
                    ))
                }
            }
            BinOp::In => {
                if rt.is_coll() || *rt == Type::Unknown {
                    Ok(Type::Bool)
                } else {
                    Err(UmtError::resolve(
                        pos,
                        format!("`:` expects a collection on the right, found {rt}"),
                    ))
                }
            }
            BinOp::Subset => {
                if (lt.is_coll() || *lt == Type::Unknown) && (rt.is_coll() || *rt == Type::Unknown)
                {
                    Ok(Type::Bool)
                } else {
                    Err(UmtError::resolve(
                        pos,
                        format!("`<:` expects collections, found {lt} and {rt}"),
                    ))
                }
            }
            BinOp::Union | BinOp::Minus => {
                if !(lt.is_coll() || *lt == Type::Unknown)
                    || !(rt.is_coll() || *rt == Type::Unknown)
                {
                    return Err(UmtError::resolve(
                        pos,
                        format!("set operation expects collections, found {lt} and {rt}"),
                    ));
                }
                Ok(self.unify_colls(lt, rt))
            }
            BinOp::And | BinOp::Or | BinOp::Implies => {
                self.require_bool(lt, pos, "boolean operand")?;
                self.require_bool(rt, pos, "boolean operand")?;
                Ok(Type::Bool)
            }
        }
    }

    fn comparable_types(&self, a: &Type, b: &Type) -> bool {
        use Type::*;
        match (a, b) {
            (Unknown, _) | (_, Unknown) | (EmptyColl, _) | (_, EmptyColl) => true,
            (Int, Int) | (Str, Str) | (Bool, Bool) => true,
            (Obj(_), Obj(_)) => true,
            (Coll(x), Coll(y)) => self.comparable_types(x, y),
            // singleton coercion between a collection and a scalar
            (Coll(x), y) => self.comparable_types(x, y),
            (x, Coll(y)) => self.comparable_types(x, y),
            _ => false,
        }
    }

    /// Element-unify two collection types; object elements unify to their
    /// nearest common supertype when one exists.
    fn unify_colls(&self, a: &Type, b: &Type) -> Type {
        match (a, b) {
            (Type::EmptyColl, other) | (other, Type::EmptyColl) => other.clone(),
            (Type::Coll(x), Type::Coll(y)) => {
                let elem = match (x.as_ref(), y.as_ref()) {
                    (tx, ty) if tx == ty => tx.clone(),
                    (Type::Obj(ea), Type::Obj(eb)) => {
                        let anc_a: Vec<&str> = self
                            .mm
                            .ancestry(ea)
                            .iter()
                            .map(|e| e.name.as_str())
                            .collect();
                        match self
                            .mm
                            .ancestry(eb)
                            .iter()
                            .map(|e| e.name.as_str())
                            .find(|n| anc_a.contains(n))
                        {
                            Some(common) => Type::Obj(common.to_string()),
                            None => Type::Unknown,
                        }
                    }
                    _ => Type::Unknown,
                };
                Type::coll_of(elem)
            }
            _ => Type::Unknown,
        }
    }
}

/// Best-effort element entity of a resolved collection expression, used to
/// type deletion targets and iteration domains.
pub fn static_elem_entity(e: &Expr, mm: &MetamodelSet) -> Option<String> {
    match &e.kind {
        ExprKind::TypeExtent(entity) | ExprKind::KeyLookup { entity, .. } => Some(entity.clone()),
        ExprKind::AtPre(inner) => static_elem_entity(inner, mm),
        ExprKind::Select { src, .. } => static_elem_entity(src, mm),
        ExprKind::Nav {
            feature,
            decl: Some(decl),
            ..
        } => match mm.lookup_feature(decl, feature).ok().flatten() {
            Some(FeatureRef::End { end, .. }) => Some(end.target.clone()),
            _ => None,
        },
        ExprKind::Binary {
            op: BinOp::Union | BinOp::Minus,
            lhs,
            rhs,
        } => {
            let le = static_elem_entity(lhs, mm);
            let re = static_elem_entity(rhs, mm);
            match (le, re) {
                (Some(a), Some(b)) => {
                    if a == b {
                        Some(a)
                    } else {
                        let anc_a: Vec<String> =
                            mm.ancestry(&a).iter().map(|e| e.name.clone()).collect();
                        mm.ancestry(&b)
                            .iter()
                            .map(|e| e.name.clone())
                            .find(|n| anc_a.contains(n))
                    }
                }
                (Some(a), None) | (None, Some(a)) => Some(a),
                _ => None,
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;
    use crate::metamodel::Metamodel;

    fn graph_mm() -> MetamodelSet {
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
    fn bare_feature_resolves_to_self_navigation() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        let (e, ty) = r.resolve(&parse_expr("nodes->size()").unwrap()).unwrap();
        assert_eq!(ty, Type::Int);
        let ExprKind::SizeOf(inner) = e.kind else {
            panic!()
        };
        let ExprKind::Nav { recv, decl, .. } = inner.kind else {
            panic!()
        };
        assert!(matches!(recv.kind, ExprKind::SelfVar));
        assert_eq!(decl.as_deref(), Some("Graph"));
    }

    #[test]
    fn binderless_select_shifts_to_element_features() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        let (e, _) = r
            .resolve(&parse_expr("edges->select(src = trg)").unwrap())
            .unwrap();
        let ExprKind::Select { binder, pred, .. } = e.kind else {
            panic!()
        };
        let b = binder.unwrap();
        assert!(b.starts_with('$'));
        let ExprKind::Binary { lhs, .. } = pred.kind else {
            panic!()
        };
        let ExprKind::Nav { recv, decl, .. } = lhs.kind else {
            panic!()
        };
        assert!(matches!(recv.kind, ExprKind::Var(v) if v == b));
        assert_eq!(decl.as_deref(), Some("Edge"));
    }

    #[test]
    fn unresolvable_receiver_falls_back_to_self() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        // `g.edges` written inside a constraint on Graph means the context graph
        let (e, _) = r.resolve(&parse_expr("g.edges->size()").unwrap()).unwrap();
        let ExprKind::SizeOf(inner) = e.kind else {
            panic!()
        };
        let ExprKind::Nav { recv, .. } = inner.kind else {
            panic!()
        };
        assert!(matches!(recv.kind, ExprKind::SelfVar));
        // but an unresolvable feature still errors
        assert!(r.resolve(&parse_expr("g.nosuch").unwrap()).is_err());
    }

    #[test]
    fn binder_shadows_the_self_alias() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        r.push_binder("g", Type::Obj("Graph".into()));
        let (e, _) = r.resolve(&parse_expr("g.edges").unwrap()).unwrap();
        let ExprKind::Nav { recv, .. } = e.kind else {
            panic!()
        };
        assert!(matches!(recv.kind, ExprKind::Var(v) if v == "g"));
        r.pop_binder();
    }

    #[test]
    fn entity_name_resolves_to_extent() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], None);
        let (e, ty) = r.resolve(&parse_expr("Node->size()").unwrap()).unwrap();
        assert_eq!(ty, Type::Int);
        let ExprKind::SizeOf(inner) = e.kind else {
            panic!()
        };
        assert!(matches!(inner.kind, ExprKind::TypeExtent(n) if n == "Node"));
    }

    #[test]
    fn nested_at_pre_is_rejected() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        assert!(r.resolve(&parse_expr("edges@pre@pre").unwrap()).is_err());
        assert!(r.resolve(&parse_expr("edges@pre").unwrap()).is_ok());
    }

    #[test]
    fn unknown_name_is_an_error() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Graph"));
        assert!(r.resolve(&parse_expr("nonsense").unwrap()).is_err());
    }

    #[test]
    fn params_resolve_and_type_check() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[("n1".into(), ValueType::Str)], Some("Graph"));
        let (_, ty) = r
            .resolve(&parse_expr("nodes->select(name = n1)").unwrap())
            .unwrap();
        assert_eq!(ty, Type::coll_of(Type::Obj("Node".into())));
        // Int param compared with a String attribute is a type error
        let mut r2 = Resolver::new(&mm, &[("k".into(), ValueType::Int)], Some("Graph"));
        assert!(r2
            .resolve(&parse_expr("nodes->select(name = k)").unwrap())
            .is_err());
    }

    #[test]
    fn mismatched_scalar_comparison_is_rejected() {
        let mm = graph_mm();
        let mut r = Resolver::new(&mm, &[], Some("Node"));
        assert!(r.resolve(&parse_expr("name = 3").unwrap()).is_err());
    }
}
