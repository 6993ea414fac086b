//! Property tests for the value algebra, footprint soundness, iterator
//! extraction and plan ordering.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use umt::expr::eval::{eval_query, values_equal};
use umt::expr::footprint::{read_footprint, ReadItem, ReadTarget};
use umt::expr::parse::parse_expr;
use umt::expr::resolve::{Resolver, Type};
use umt::metamodel::{Metamodel, MetamodelSet};
use umt::model::{ModelState, ObjectId, Value};
use umt::planner;
use umt::spec::TransformationSpec;

const GRAPHX_MM: &str = "\
entity Graph { nodes : set(Node) ; edges : set(Edge) ; cycles : set(ThreeCycle) ; }
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
entity ThreeCycle { elements : set(Node) ; }
entity IntResult { num : Int ; }
";

fn graphx() -> Arc<MetamodelSet> {
    Arc::new(MetamodelSet::single(Metamodel::parse(GRAPHX_MM).unwrap()))
}

// ---- value algebra -------------------------------------------------------

fn arb_scalar() -> impl Strategy<Value = Value> {
    prop_oneof![
        (0i64..5).prop_map(Value::Int),
        "[a-c]{0,2}".prop_map(Value::Str),
    ]
}

fn arb_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        arb_scalar(),
        proptest::collection::vec(arb_scalar(), 0..5).prop_map(Value::set),
        proptest::collection::vec(arb_scalar(), 0..5).prop_map(Value::seq),
    ]
}

proptest! {
    #[test]
    fn union_is_commutative_on_unordered(xs in proptest::collection::vec(arb_scalar(), 0..6),
                                         ys in proptest::collection::vec(arb_scalar(), 0..6)) {
        let a = Value::set(xs);
        let b = Value::set(ys);
        prop_assert_eq!(a.set_union(&b), b.set_union(&a));
    }

    #[test]
    fn union_is_idempotent(xs in proptest::collection::vec(arb_scalar(), 0..6)) {
        let a = Value::set(xs);
        prop_assert_eq!(a.set_union(&a), a);
    }

    #[test]
    fn self_subtraction_is_empty(v in arb_value()) {
        let diff = v.set_minus(&v);
        let (elems, _) = diff.coerce_coll();
        prop_assert!(elems.is_empty());
    }

    #[test]
    fn scalar_coercion_is_symmetric(a in arb_value(), b in arb_value()) {
        prop_assert_eq!(values_equal(&a, &b), values_equal(&b, &a));
    }

    #[test]
    fn unordered_equality_is_permutation_invariant(xs in proptest::collection::vec(arb_scalar(), 0..6)) {
        let mut rev = xs.clone();
        rev.reverse();
        prop_assert_eq!(Value::set(xs), Value::set(rev));
    }
}

// ---- footprint soundness ---------------------------------------------------

/// Mutations that write a known set of read items; a mutation whose writes
/// are disjoint from an expression's read footprint must not change the
/// expression's value.
struct Mutation {
    name: &'static str,
    writes: Vec<ReadItem>,
    apply: fn(&mut ModelState, &mut StdRng),
}

fn feature(entity: &str, feature: &str) -> ReadItem {
    ReadItem {
        target: ReadTarget::Feature {
            entity: entity.into(),
            feature: feature.into(),
        },
        at_pre: false,
    }
}

fn extent(entity: &str) -> ReadItem {
    ReadItem {
        target: ReadTarget::Extent(entity.into()),
        at_pre: false,
    }
}

fn mutations() -> Vec<Mutation> {
    vec![
        Mutation {
            name: "rename a node",
            writes: vec![feature("Node", "name")],
            apply: |s, rng| {
                let nodes = s.extent("Node").to_vec();
                if let Some(&n) = nodes.get(
                    rng.random_range(0..nodes.len().max(1))
                        .min(nodes.len().saturating_sub(1)),
                ) {
                    s.set_attr(
                        n,
                        "name",
                        Value::Str(format!("renamed{}", rng.random_range(0..100))),
                    )
                    .unwrap();
                }
            },
        },
        Mutation {
            name: "create a detached IntResult",
            writes: vec![extent("IntResult")],
            apply: |s, _| {
                s.create("IntResult").unwrap();
            },
        },
        Mutation {
            name: "record a cycle on the graph",
            writes: vec![extent("ThreeCycle"), feature("Graph", "cycles")],
            apply: |s, _| {
                let g = s.extent("Graph")[0];
                let tc = s.create("ThreeCycle").unwrap();
                s.insert_member(g, "cycles", tc).unwrap();
            },
        },
        Mutation {
            name: "set an IntResult num",
            writes: vec![feature("IntResult", "num"), extent("IntResult")],
            apply: |s, rng| {
                let r = s.create("IntResult").unwrap();
                s.set_attr(r, "num", Value::Int(rng.random_range(0..100)))
                    .unwrap();
            },
        },
    ]
}

fn random_graph(rng: &mut StdRng, mm: &Arc<MetamodelSet>) -> ModelState {
    let mut s = ModelState::new(Arc::clone(mm));
    let g = s.create_labeled("Graph", "g").unwrap();
    let n = rng.random_range(1..=8usize);
    let mut nodes = Vec::new();
    for i in 0..n {
        let id = s.create_labeled("Node", &format!("n{i}")).unwrap();
        s.set_attr(id, "name", Value::Str(format!("n{i}"))).unwrap();
        s.insert_member(g, "nodes", id).unwrap();
        nodes.push(id);
    }
    for i in 0..rng.random_range(0..=15usize) {
        let e = s.create_labeled("Edge", &format!("e{i}")).unwrap();
        s.insert_member(g, "edges", e).unwrap();
        if rng.random_range(0..8) != 0 {
            s.insert_member(e, "src", nodes[rng.random_range(0..nodes.len())])
                .unwrap();
        }
        if rng.random_range(0..8) != 0 {
            s.insert_member(e, "trg", nodes[rng.random_range(0..nodes.len())])
                .unwrap();
        }
    }
    s
}

fn overlaps(mm: &MetamodelSet, write: &ReadItem, read: &ReadItem) -> bool {
    if read.at_pre {
        return false;
    }
    match (&write.target, &read.target) {
        (ReadTarget::Extent(a), ReadTarget::Extent(b)) => mm.comparable(a, b),
        (
            ReadTarget::Feature {
                entity: ea,
                feature: fa,
            },
            ReadTarget::Feature {
                entity: eb,
                feature: fb,
            },
        ) => fa == fb && mm.comparable(ea, eb),
        _ => false,
    }
}

#[test]
fn read_footprint_is_sound_under_disjoint_mutation() {
    let mm = graphx();
    let exprs = [
        "nodes->size()",
        "edges->select(src = trg & trg /= {})->size()",
        "edges->select(src = {} or trg = {})->size()",
        "(nodes - (edges.src \\/ edges.trg))->size()",
        "edges.src <: nodes & edges.trg <: nodes",
        "cycles->size()",
        "IntResult->size()",
    ];
    let params = BTreeMap::new();
    let mut rng = StdRng::seed_from_u64(99);
    for round in 0..30 {
        let state = random_graph(&mut rng, &mm);
        let g = state.extent("Graph")[0];
        for src in &exprs {
            let mut resolver = Resolver::new(&mm, &[], Some("Graph"));
            let (expr, _) = resolver.resolve(&parse_expr(src).unwrap()).unwrap();
            let reads = read_footprint(&expr, &mm);
            let before = eval_query(&expr, &state, None, &params, Some(g)).unwrap();
            for m in mutations() {
                let disjoint = m
                    .writes
                    .iter()
                    .all(|w| reads.iter().all(|r| !overlaps(&mm, w, r)));
                if !disjoint {
                    continue;
                }
                let mut mutated = state.clone();
                (m.apply)(&mut mutated, &mut rng);
                let after = eval_query(&expr, &mutated, None, &params, Some(g)).unwrap();
                assert_eq!(
                    before, after,
                    "round {round}: `{src}` changed under footprint-disjoint mutation `{}`",
                    m.name
                );
            }
        }
    }
}

#[test]
fn eval_agrees_with_snapshot_when_pre_free() {
    let mm = graphx();
    let params = BTreeMap::new();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..10 {
        let state = random_graph(&mut rng, &mm);
        let g = state.extent("Graph")[0];
        let snap = state.snapshot();
        for src in [
            "nodes->size()",
            "(nodes - (edges.src \\/ edges.trg))->size()",
        ] {
            let mut resolver = Resolver::new(&mm, &[], Some("Graph"));
            let (expr, _) = resolver.resolve(&parse_expr(src).unwrap()).unwrap();
            let live = eval_query(&expr, &state, None, &params, Some(g)).unwrap();
            let frozen = eval_query(&expr, snap.state(), None, &params, Some(g)).unwrap();
            assert_eq!(live, frozen);
        }
    }
}

// ---- iterator extraction ---------------------------------------------------

#[test]
fn iterator_extraction_preserves_antecedent_semantics() {
    // re-conjoining the membership atoms and evaluating the full antecedent
    // gives the same truth value as the residual, for every binding drawn
    // from the iterator domains
    let mm = graphx();
    let spec_src = "\
transformation TransitiveEdges
constraint Cons on Graph :
  e1 : edges@pre & e2 : edges@pre &
  e1.trg = e2.src & e1.src /= {} & e1.trg /= {} & e2.trg /= {}
  => Edge->exists1(e3 | e3.src = e1.src & e3.trg = e2.trg & e3 : edges)
";
    let spec = TransformationSpec::parse(spec_src, &mm).unwrap();
    let c = &spec.constraints[0];

    let full_src = "e1 : edges@pre & e2 : edges@pre & e1.trg = e2.src & e1.src /= {} & e1.trg /= {} & e2.trg /= {}";
    let mut resolver = Resolver::new(&mm, &[], Some("Graph"));
    resolver.push_binder("e1", Type::Obj("Edge".into()));
    resolver.push_binder("e2", Type::Obj("Edge".into()));
    let (full, _) = resolver.resolve(&parse_expr(full_src).unwrap()).unwrap();

    let params = BTreeMap::new();
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..10 {
        let state = random_graph(&mut rng, &mm);
        let pre = state.snapshot();
        let g = state.extent("Graph")[0];
        let edges: Vec<ObjectId> = state.extent("Edge").to_vec();
        for &e1 in &edges {
            for &e2 in &edges {
                let residual = {
                    let mut env = umt::expr::eval::Env::new(&params, Some(pre.state()));
                    env.self_object = Some(g);
                    env.bindings.push(("e1".into(), Value::Ref(e1)));
                    env.bindings.push(("e2".into(), Value::Ref(e2)));
                    umt::expr::eval::eval(
                        c.antecedent.as_ref().unwrap(),
                        &mut env,
                        &state,
                        umt::expr::eval::EvalMode::Query,
                    )
                    .unwrap()
                };
                let whole = {
                    let mut env = umt::expr::eval::Env::new(&params, Some(pre.state()));
                    env.self_object = Some(g);
                    env.bindings.push(("e1".into(), Value::Ref(e1)));
                    env.bindings.push(("e2".into(), Value::Ref(e2)));
                    umt::expr::eval::eval(&full, &mut env, &state, umt::expr::eval::EvalMode::Query)
                        .unwrap()
                };
                assert_eq!(residual, whole);
            }
        }
    }
}

/// Dynamic soundness spot-check for accepted constraints: executing the
/// phase and re-evaluating the antecedent over the frozen iterator domains
/// yields the same satisfied-binding set as before execution.
#[test]
fn accepted_phases_do_not_disturb_their_own_bindings() {
    let mm = graphx();
    let spec_src = "\
transformation TransitiveEdges
constraint Cons on Graph :
  e1 : edges@pre & e2 : edges@pre &
  e1.trg = e2.src & e1.src /= {} & e1.trg /= {} & e2.trg /= {}
  => Edge->exists1(e3 | e3.src = e1.src & e3.trg = e2.trg & e3 : edges)
";
    let spec = TransformationSpec::parse(spec_src, &mm).unwrap();
    let plan = planner::derive_plan(&spec, &mm).unwrap();
    assert!(plan.all_ok());
    let c = &spec.constraints[0];
    let params = BTreeMap::new();

    let bindings_against =
        |state: &ModelState, pre: &ModelState, domain: &[ObjectId]| -> Vec<(ObjectId, ObjectId)> {
            let g = pre.lookup_label("g").unwrap();
            let mut out = Vec::new();
            for &e1 in domain {
                for &e2 in domain {
                    let mut env = umt::expr::eval::Env::new(&params, Some(pre));
                    env.self_object = Some(g);
                    env.bindings.push(("e1".into(), Value::Ref(e1)));
                    env.bindings.push(("e2".into(), Value::Ref(e2)));
                    let sat = umt::expr::eval::eval(
                        c.antecedent.as_ref().unwrap(),
                        &mut env,
                        state,
                        umt::expr::eval::EvalMode::Query,
                    )
                    .unwrap();
                    if sat == Value::Int(1) {
                        out.push((e1, e2));
                    }
                }
            }
            out
        };

    let mut rng = StdRng::seed_from_u64(17);
    for _ in 0..10 {
        // unique-signature edges so the run is well-defined under the spec
        let mut state = ModelState::new(Arc::clone(&mm));
        let g = state.create_labeled("Graph", "g").unwrap();
        let n = rng.random_range(2..=6usize);
        let mut nodes = Vec::new();
        for i in 0..n {
            let id = state.create_labeled("Node", &format!("n{i}")).unwrap();
            state.insert_member(g, "nodes", id).unwrap();
            nodes.push(id);
        }
        let mut sigs: Vec<(ObjectId, ObjectId)> = Vec::new();
        for &a in &nodes {
            for &b in &nodes {
                sigs.push((a, b));
            }
        }
        for i in 0..sigs.len() {
            let j = rng.random_range(i..sigs.len());
            sigs.swap(i, j);
        }
        for (i, (a, b)) in sigs
            .into_iter()
            .take(rng.random_range(0..=8usize))
            .enumerate()
        {
            let e = state.create_labeled("Edge", &format!("e{i}")).unwrap();
            state.insert_member(g, "edges", e).unwrap();
            state.insert_member(e, "src", a).unwrap();
            state.insert_member(e, "trg", b).unwrap();
        }

        let pre = state.snapshot();
        let frozen_domain: Vec<ObjectId> = pre.state().extent("Edge").to_vec();
        let before = bindings_against(&state, pre.state(), &frozen_domain);
        let result = umt::engine::run(&spec, &plan, state, &params, false).unwrap();
        let after = bindings_against(&result.final_state, pre.state(), &frozen_domain);
        assert_eq!(before, after);
    }
}

// ---- plan ordering ----------------------------------------------------------

#[test]
fn plan_order_respects_entity_order() {
    let mm1 = Metamodel::parse(
        "abstract entity ModelElement1 { id1 : String ; }\n\
         entity Node1 extends ModelElement1 { name : String ; }\n\
         entity Edge1 extends ModelElement1 { src1 : opt(Node1) ; trg1 : opt(Node1) ; }\n\
         entity Graph1 extends ModelElement1 { nodes : set(Node1) ; edges : set(Edge1) ; }",
    )
    .unwrap();
    let mm2 = Metamodel::parse(
        "abstract entity ModelElement2 { id2 : String (key) ; text : String ; }\n\
         entity Node2 extends ModelElement2 { }\n\
         entity Edge2 extends ModelElement2 { src2 : opt(Node2) ; trg2 : opt(Node2) ; }\n\
         entity Graph2 extends ModelElement2 { gcs : set(ModelElement2) ; }",
    )
    .unwrap();
    let mm = MetamodelSet::new(vec![mm1, mm2]);
    let spec = TransformationSpec::parse(
        "transformation Migration\n\
         constraint C2 on Edge1 : Edge2->exists(e2 | e2.id2 = id1 & e2.src2 = Node2[src1.id1] & e2.trg2 = Node2[trg1.id1])\n\
         constraint C3 on Graph1 : Graph2->exists(g2 | g2.id2 = id1 & g2.gcs = Node2[nodes.id1] \\/ Edge2[edges.id1])\n\
         constraint C1 on Node1 : Node2->exists(n2 | n2.id2 = id1 & n2.text = name)",
        &mm,
    )
    .unwrap();
    let plan = planner::derive_plan(&spec, &mm).unwrap();

    // post-hoc scan: for every pair (T1, T2), every phase creating T1 comes
    // before every phase creating T2
    let creates = |idx: usize, entity: &str| -> bool {
        let c = &spec.constraints[plan.phases[idx].constraint_index];
        c.succedent
            .to_string()
            .contains(&format!("{entity}->exists"))
    };
    for (t1, t2) in &plan.order.pairs {
        for i in 0..plan.phases.len() {
            for j in 0..plan.phases.len() {
                if creates(i, t1) && creates(j, t2) {
                    assert!(i < j, "{t1} < {t2} violated by phases {i} and {j}");
                }
            }
        }
    }
}
