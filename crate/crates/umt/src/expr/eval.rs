//! Side-effect-free evaluation of resolved expressions against a model state.
//!
//! Booleans are represented as `Int 0/1` internally; they never appear in
//! model slots. Navigation over a collection flattens (union of the feature
//! values over the elements). Equality between a collection and a scalar
//! coerces the scalar to a singleton.
//!
//! Two modes:
//! - `Query`: rejects `isDeleted` and creation-form `exists`/`exists1`
//!   (those rooted at a live type extent) as "effectful expression in query
//!   context". Used while running transformations.
//! - `Declarative`: reads the same forms as checks over existing instances;
//!   `exists1` means "exactly one", `isDeleted(coll)` means the pre-state
//!   members of `coll` are gone and nothing in the current state matches.
//!   Used by the post-run verifier and the assumption checker.

use std::collections::BTreeMap;

use crate::error::{Result, UmtError};
use crate::metamodel::FeatureRef;
use crate::model::{ModelState, ObjectId, Value};

use super::{BinOp, Expr, ExprKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Query,
    Declarative,
}

/// Evaluation environment: the context object, quantifier bindings, spec
/// parameters and the optional pre-state snapshot.
pub struct Env<'a> {
    pub self_object: Option<ObjectId>,
    pub bindings: Vec<(String, Value)>,
    pub params: &'a BTreeMap<String, Value>,
    pub pre: Option<&'a ModelState>,
}

impl<'a> Env<'a> {
    pub fn new(params: &'a BTreeMap<String, Value>, pre: Option<&'a ModelState>) -> Env<'a> {
        Env {
            self_object: None,
            bindings: Vec::new(),
            params,
            pre,
        }
    }

    pub fn with_self(mut self, id: ObjectId) -> Env<'a> {
        self.self_object = Some(id);
        self
    }

    fn lookup(&self, name: &str) -> Option<Value> {
        self.bindings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .or_else(|| self.params.get(name).cloned())
    }
}

pub fn bool_val(b: bool) -> Value {
    Value::Int(b as i64)
}

pub fn as_bool(v: &Value) -> Result<bool> {
    match v {
        Value::Int(0) => Ok(false),
        Value::Int(1) => Ok(true),
        other => Err(UmtError::runtime(format!(
            "expected a boolean, found {other:?}"
        ))),
    }
}

/// Equality with singleton coercion between collections and scalars.
pub fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Coll(..), Value::Coll(..)) => a == b,
        (Value::Coll(..), scalar) => a == &Value::Coll(vec![scalar.clone()], false),
        (scalar, Value::Coll(..)) => &Value::Coll(vec![scalar.clone()], false) == b,
        _ => a == b,
    }
}

pub fn eval(e: &Expr, env: &mut Env, state: &ModelState, mode: EvalMode) -> Result<Value> {
    match &e.kind {
        ExprKind::IntLit(n) => Ok(Value::Int(*n)),
        ExprKind::StrLit(s) => Ok(Value::Str(s.clone())),
        ExprKind::EmptySet => Ok(Value::empty_set()),
        ExprKind::Name(n) => Err(UmtError::runtime(format!(
            "unresolved name `{n}` at evaluation"
        ))),
        ExprKind::SelfVar => env
            .self_object
            .map(Value::Ref)
            .ok_or_else(|| UmtError::runtime("no context object bound for `self`")),
        ExprKind::Var(n) => env
            .lookup(n)
            .ok_or_else(|| UmtError::runtime(format!("unbound variable `{n}`"))),
        ExprKind::Nav { recv, feature, .. } => {
            let rv = eval(recv, env, state, mode)?;
            navigate(&rv, feature, state)
        }
        ExprKind::AtPre(inner) => {
            let pre = env
                .pre
                .ok_or_else(|| UmtError::runtime("`@pre` used without a pre-state snapshot"))?;
            eval(inner, env, pre, mode)
        }
        ExprKind::TypeExtent(entity) => {
            state.metamodels().entity_checked(entity)?;
            Ok(Value::Coll(
                state
                    .extent(entity)
                    .iter()
                    .map(|&id| Value::Ref(id))
                    .collect(),
                false,
            ))
        }
        ExprKind::KeyLookup { entity, index } => {
            let idx = eval(index, env, state, mode)?;
            let (keys, _) = idx.coerce_coll();
            let mut strs = Vec::with_capacity(keys.len());
            for k in keys {
                match k {
                    Value::Str(s) => strs.push(s),
                    other => {
                        return Err(UmtError::runtime(format!(
                            "key lookup `{entity}[..]` expects string keys, found {}",
                            other.type_name()
                        )));
                    }
                }
            }
            let ids = state.key_lookup(entity, &strs)?;
            Ok(Value::Coll(
                ids.into_iter().map(Value::Ref).collect(),
                false,
            ))
        }
        ExprKind::Binary { op, lhs, rhs } => eval_binary(*op, lhs, rhs, env, state, mode),
        ExprKind::SizeOf(inner) => {
            let v = eval(inner, env, state, mode)?;
            match v {
                Value::Coll(elems, _) => Ok(Value::Int(elems.len() as i64)),
                other => Err(UmtError::runtime(format!(
                    "`->size()` expects a collection, found {}",
                    other.type_name()
                ))),
            }
        }
        ExprKind::Select { src, binder, pred } => {
            let sv = eval(src, env, state, mode)?;
            let Value::Coll(elems, ordered) = sv else {
                return Err(UmtError::runtime("`->select(..)` expects a collection"));
            };
            let binder = binder.as_deref().ok_or_else(|| {
                UmtError::runtime("select binder missing; expression not resolved")
            })?;
            let mut kept = Vec::new();
            for elem in elems {
                env.bindings.push((binder.to_string(), elem.clone()));
                let keep = eval(pred, env, state, mode).and_then(|v| as_bool(&v));
                env.bindings.pop();
                if keep? {
                    kept.push(elem);
                }
            }
            Ok(Value::Coll(kept, ordered))
        }
        ExprKind::Exists {
            src,
            binder,
            body,
            unique,
        } => {
            if mode == EvalMode::Query && matches!(src.kind, ExprKind::TypeExtent(_)) {
                return Err(UmtError::runtime(
                    "effectful expression in query context: creation-form exists over a type extent",
                ));
            }
            let sv = eval(src, env, state, mode)?;
            let Value::Coll(elems, _) = sv else {
                return Err(UmtError::runtime("`->exists(..)` expects a collection"));
            };
            let mut hits = 0usize;
            for elem in elems {
                env.bindings.push((binder.clone(), elem));
                let hit = eval(body, env, state, mode).and_then(|v| as_bool(&v));
                env.bindings.pop();
                if hit? {
                    hits += 1;
                    if !unique && hits > 0 {
                        return Ok(bool_val(true));
                    }
                    if *unique && hits > 1 {
                        return Ok(bool_val(false));
                    }
                }
            }
            Ok(bool_val(if *unique { hits == 1 } else { hits > 0 }))
        }
        ExprKind::IsDeleted(coll) => {
            if mode == EvalMode::Query {
                return Err(UmtError::runtime(
                    "effectful expression in query context: `->isDeleted()`",
                ));
            }
            let pre = env.pre.ok_or_else(|| {
                UmtError::runtime("`->isDeleted()` verification needs a pre-state")
            })?;
            // the members selected at the start of the transformation are gone
            let before = eval(coll, env, pre, EvalMode::Declarative)?;
            let (members, _) = before.coerce_coll();
            for m in &members {
                if let Value::Ref(id) = m {
                    if state.contains(*id) {
                        return Ok(bool_val(false));
                    }
                }
            }
            // and nothing in the current state matches the filter anymore
            let now = eval(coll, env, state, EvalMode::Declarative)?;
            let (live, _) = now.coerce_coll();
            Ok(bool_val(live.is_empty()))
        }
    }
}

fn navigate(recv: &Value, feature: &str, state: &ModelState) -> Result<Value> {
    match recv {
        Value::Ref(id) => state.read_feature(*id, feature),
        Value::Coll(elems, ordered) => {
            let mut out: Vec<Value> = Vec::new();
            let mut out_ordered = *ordered;
            let mut any_end = false;
            for elem in elems {
                let Value::Ref(id) = elem else {
                    return Err(UmtError::runtime(format!(
                        "cannot navigate `{feature}` over a collection of {}",
                        elem.type_name()
                    )));
                };
                let v = state.read_feature(*id, feature)?;
                match v {
                    Value::Coll(inner, io) => {
                        any_end = true;
                        out_ordered = *ordered && io;
                        for m in inner {
                            if out_ordered || !out.contains(&m) {
                                out.push(m);
                            }
                        }
                    }
                    scalar => {
                        if !out.contains(&scalar) {
                            out.push(scalar);
                        }
                    }
                }
            }
            if !any_end {
                out_ordered = false; // attribute values form a set
            }
            Ok(Value::Coll(out, out_ordered))
        }
        other => Err(UmtError::runtime(format!(
            "cannot navigate `{feature}` on a {}",
            other.type_name()
        ))),
    }
}

fn eval_binary(
    op: BinOp,
    lhs: &Expr,
    rhs: &Expr,
    env: &mut Env,
    state: &ModelState,
    mode: EvalMode,
) -> Result<Value> {
    // boolean connectives short-circuit
    match op {
        BinOp::And => {
            if !as_bool(&eval(lhs, env, state, mode)?)? {
                return Ok(bool_val(false));
            }
            return Ok(bool_val(as_bool(&eval(rhs, env, state, mode)?)?));
        }
        BinOp::Or => {
            if as_bool(&eval(lhs, env, state, mode)?)? {
                return Ok(bool_val(true));
            }
            return Ok(bool_val(as_bool(&eval(rhs, env, state, mode)?)?));
        }
        BinOp::Implies => {
            if !as_bool(&eval(lhs, env, state, mode)?)? {
                return Ok(bool_val(true));
            }
            return Ok(bool_val(as_bool(&eval(rhs, env, state, mode)?)?));
        }
        _ => {}
    }
    let lv = eval(lhs, env, state, mode)?;
    let rv = eval(rhs, env, state, mode)?;
    match op {
        BinOp::Eq => Ok(bool_val(values_equal(&lv, &rv))),
        BinOp::Ne => Ok(bool_val(!values_equal(&lv, &rv))),
        BinOp::In => {
            let Value::Coll(elems, _) = &rv else {
                return Err(UmtError::runtime("`:` expects a collection on the right"));
            };
            Ok(bool_val(elems.iter().any(|m| m == &lv)))
        }
        BinOp::Subset => {
            let (ls, _) = lv.coerce_coll();
            let (rs, _) = rv.coerce_coll();
            Ok(bool_val(ls.iter().all(|m| rs.contains(m))))
        }
        BinOp::Union => Ok(lv.set_union(&rv)),
        BinOp::Minus => Ok(lv.set_minus(&rv)),
        BinOp::And | BinOp::Or | BinOp::Implies => unreachable!(),
    }
}

/// Query-mode evaluation against a state, exposed for measures and tests.
pub fn eval_query(
    e: &Expr,
    state: &ModelState,
    pre: Option<&ModelState>,
    params: &BTreeMap<String, Value>,
    self_object: Option<ObjectId>,
) -> Result<Value> {
    let mut env = Env::new(params, pre);
    env.self_object = self_object;
    eval(e, &mut env, state, EvalMode::Query)
}

/// Whether a feature read should flatten (used by tests and diagnostics).
#[allow(dead_code)]
fn is_end(state: &ModelState, entity: &str, feature: &str) -> bool {
    matches!(
        state.metamodels().lookup_feature(entity, feature),
        Ok(Some(FeatureRef::End { .. }))
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr;
    use crate::expr::resolve::Resolver;
    use crate::metamodel::{Metamodel, MetamodelSet};
    use std::sync::Arc;

    const GRAPH_MM: &str = "\
entity Graph { nodes : set(Node) ; edges : set(Edge) ; }
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
";

    const SINGLE_EDGE: &str = "\
g : Graph
n1 : Node
n1.name = \"n1\"
n1 : g.nodes
n2 : Node
n2.name = \"n2\"
n2 : g.nodes
e : Edge
n1 : e.src
n2 : e.trg
e : g.edges
";

    fn setup() -> (ModelState, ObjectId) {
        let mm = Arc::new(MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap()));
        let state = ModelState::parse(SINGLE_EDGE, mm).unwrap();
        let g = state.lookup_label("g").unwrap();
        (state, g)
    }

    fn eval_on_graph(state: &ModelState, g: ObjectId, src: &str) -> Result<Value> {
        let mm = state.metamodels();
        let mut r = Resolver::new(mm, &[], Some("Graph"));
        let (e, _) = r.resolve(&parse_expr(src).unwrap())?;
        let params = BTreeMap::new();
        eval_query(&e, state, None, &params, Some(g))
    }

    #[test]
    fn counts_nodes() {
        let (state, g) = setup();
        assert_eq!(
            eval_on_graph(&state, g, "nodes->size()").unwrap(),
            Value::Int(2)
        );
    }

    #[test]
    fn counts_looping_edges() {
        let (state, g) = setup();
        let v = eval_on_graph(&state, g, "edges->select(src = trg & trg /= {})->size()").unwrap();
        assert_eq!(v, Value::Int(0));
    }

    #[test]
    fn counts_isolated_nodes() {
        let (state, g) = setup();
        let v = eval_on_graph(&state, g, "(nodes - (edges.src \\/ edges.trg))->size()").unwrap();
        assert_eq!(v, Value::Int(0));
    }

    #[test]
    fn checks_endpoint_containment() {
        let (state, g) = setup();
        let v = eval_on_graph(&state, g, "edges.src <: nodes & edges.trg <: nodes").unwrap();
        assert_eq!(v, Value::Int(1));
    }

    #[test]
    fn eval_does_not_mutate_the_state() {
        let (state, g) = setup();
        let before = state.serialize();
        eval_on_graph(&state, g, "edges->select(src = {} or trg = {})->size()").unwrap();
        assert_eq!(before, state.serialize());
    }

    #[test]
    fn at_pre_reads_the_snapshot() {
        let (mut state, g) = setup();
        let snap = state.snapshot();
        let e = state.lookup_label("e").unwrap();
        let n2 = state.lookup_label("n2").unwrap();
        state.set_end(e, "src", Value::Ref(n2)).unwrap();
        let mm = state.metamodels();
        let mut r = Resolver::new(mm, &[], Some("Graph"));
        let (expr, _) = r
            .resolve(&parse_expr("edges.src@pre = edges.src").unwrap())
            .unwrap();
        let params = BTreeMap::new();
        let v = eval_query(&expr, &state, Some(snap.state()), &params, Some(g)).unwrap();
        assert_eq!(v, Value::Int(0)); // pre src was n1, live src is n2

        // without a snapshot @pre is an error
        assert!(eval_query(&expr, &state, None, &params, Some(g)).is_err());
    }

    #[test]
    fn effectful_forms_are_rejected_in_query_mode() {
        let (state, g) = setup();
        let err =
            eval_on_graph(&state, g, "nodes->select(name = \"n1\")->isDeleted()").unwrap_err();
        assert!(err.to_string().contains("effectful"));
        let err2 = eval_on_graph(&state, g, "Edge->exists(x | x.src = x.trg)").unwrap_err();
        assert!(err2.to_string().contains("effectful"));
    }

    #[test]
    fn declarative_mode_quantifies_extents() {
        let (state, g) = setup();
        let mm = state.metamodels();
        let mut r = Resolver::new(mm, &[], Some("Graph"));
        let (e, _) = r
            .resolve(&parse_expr("Edge->exists1(x | x.src = x.trg)").unwrap())
            .unwrap();
        let params = BTreeMap::new();
        let mut env = Env::new(&params, None);
        env.self_object = Some(g);
        let v = eval(&e, &mut env, &state, EvalMode::Declarative).unwrap();
        assert_eq!(v, Value::Int(0)); // the single edge is not a loop
    }

    #[test]
    fn scalar_coll_coercion_is_symmetric() {
        let a = Value::Str("x".into());
        let c = Value::Coll(vec![Value::Str("x".into())], false);
        assert!(values_equal(&a, &c));
        assert!(values_equal(&c, &a));
        let d = Value::Coll(vec![], false);
        assert!(!values_equal(&a, &d));
        assert!(!values_equal(&d, &a));
    }
}
