//! Phase planning: derive the target-entity partial order from the
//! constraints, topologically order one phase per constraint, and statically
//! check each constraint's non-interference condition.
//!
//! Entity order: `T1 < T2` when some constraint creates `T2` and reads `T1`
//! instances (extent, key lookup, or a navigated end typed at `T1`) to define
//! features of `T2`. Reads under `@pre` do not order anything, and only
//! entities that some phase actually creates participate. Every phase
//! creating `T1` (or a subtype) must precede every phase creating `T2` (or a
//! subtype); incomparable phases keep their spec order.
//!
//! Non-interference: a constraint may be run as one fixed iteration only if
//! its updates cannot affect the data it reads or the collections it
//! iterates. `@pre` reads and assignments confined to objects created by the
//! same constraint are exempt. Deletion constraints evaluate their selection
//! arguments before applying any deletes, so those reads are exempt from
//! their own delete conflicts. The verdict is advisory for `plan` and a
//! hard gate for `run` (unless forced).

use std::collections::BTreeSet;

use crate::error::{Result, UmtError};
use crate::expr::footprint::{
    dependency_entities, read_footprint, succedent_read_exprs, succedent_reads, write_footprint,
    ReadItem, ReadTarget, WriteItem,
};
use crate::expr::post::post_atoms;
use crate::metamodel::MetamodelSet;
use crate::spec::{Constraint, ConstraintKind, TransformationSpec};

/// The derived partial order over target entities.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EntityOrder {
    pub pairs: BTreeSet<(String, String)>,
}

impl std::fmt::Display for EntityOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (a, b) in &self.pairs {
            writeln!(f, "{a} < {b}")?;
        }
        Ok(())
    }
}

/// What a conflicting write collides with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReadLike {
    Item(ReadItem),
    /// Live iteration over an iterator domain with this element entity.
    Iteration(String),
    /// The extent of the context entity, which the phase iterates.
    ContextExtent(String),
}

impl std::fmt::Display for ReadLike {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadLike::Item(r) => write!(f, "{r}"),
            ReadLike::Iteration(e) => write!(f, "live iteration over {e}"),
            ReadLike::ContextExtent(e) => write!(f, "context extent ({e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Conflict {
    pub read: ReadLike,
    pub write: WriteItem,
}

impl std::fmt::Display for Conflict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} vs {}", self.write, self.read)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    Rejected(Vec<Conflict>),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Ok)
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Ok => write!(f, "ok"),
            Verdict::Rejected(cs) => {
                write!(f, "REJECTED")?;
                for c in cs {
                    write!(f, "\n    {c}")?;
                }
                Ok(())
            }
        }
    }
}

/// One phase of the derived design: a single constraint applied by a fixed
/// iteration over its (frozen) context extent and iterator domains.
#[derive(Debug, Clone)]
pub struct Phase {
    pub constraint_index: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub phases: Vec<Phase>,
    pub order: EntityOrder,
}

impl Plan {
    pub fn all_ok(&self) -> bool {
        self.phases.iter().all(|p| p.verdict.is_ok())
    }

    pub fn render(&self, spec: &TransformationSpec) -> String {
        let mut out = String::new();
        for (i, phase) in self.phases.iter().enumerate() {
            let c = &spec.constraints[phase.constraint_index];
            out.push_str(&format!("phase {}: {}", i + 1, c.label));
            if let Some(ctx) = &c.context {
                out.push_str(&format!(" on {ctx}"));
            }
            out.push_str(&format!(" ({})", c.kind));
            if !c.iterators.is_empty() {
                let doms: Vec<String> = c
                    .iterators
                    .iter()
                    .map(|it| format!("{} : {}", it.var, it.domain))
                    .collect();
                out.push_str(&format!(" iterators: {}", doms.join(", ")));
            }
            out.push_str(&format!(" verdict={}\n", phase.verdict));
        }
        out.push_str("entity order:\n");
        if self.order.pairs.is_empty() {
            out.push_str("  (empty)\n");
        } else {
            for (a, b) in &self.order.pairs {
                out.push_str(&format!("  {a} < {b}\n"));
            }
        }
        out
    }
}

/// Entities created by a constraint's succedent.
fn created_entities(c: &Constraint, mm: &MetamodelSet) -> Result<BTreeSet<String>> {
    let atoms = post_atoms(&c.succedent, mm)?;
    Ok(write_footprint(&atoms)
        .into_iter()
        .filter_map(|w| match w {
            WriteItem::CreateExtent(e) => Some(e),
            _ => None,
        })
        .collect())
}

/// Entities whose instances a constraint reads live.
fn read_entities(c: &Constraint, mm: &MetamodelSet) -> Result<BTreeSet<String>> {
    let mut deps = BTreeSet::new();
    for it in &c.iterators {
        dependency_entities(&it.domain, mm, &mut deps);
    }
    if let Some(ante) = &c.antecedent {
        dependency_entities(ante, mm, &mut deps);
    }
    let atoms = post_atoms(&c.succedent, mm)?;
    for e in succedent_read_exprs(&atoms) {
        dependency_entities(e, mm, &mut deps);
    }
    Ok(deps)
}

/// Compute the target-entity partial order for a spec.
pub fn entity_order(spec: &TransformationSpec, mm: &MetamodelSet) -> Result<EntityOrder> {
    let mut created_by_any: BTreeSet<String> = BTreeSet::new();
    let mut per_constraint: Vec<(BTreeSet<String>, BTreeSet<String>)> = Vec::new();
    for c in &spec.constraints {
        let created = created_entities(c, mm)?;
        let reads = read_entities(c, mm)?;
        created_by_any.extend(created.iter().cloned());
        per_constraint.push((created, reads));
    }
    let mut pairs = BTreeSet::new();
    for (created, reads) in &per_constraint {
        for t2 in created {
            for t1 in reads {
                if t1 != t2 && created_by_any.contains(t1) {
                    pairs.insert((t1.clone(), t2.clone()));
                }
            }
        }
    }
    let order = EntityOrder { pairs };
    if let Some(cycle) = find_cycle(&order) {
        return Err(UmtError::Cycle(cycle.join(" < ")));
    }
    Ok(order)
}

fn find_cycle(order: &EntityOrder) -> Option<Vec<String>> {
    let nodes: BTreeSet<&str> = order
        .pairs
        .iter()
        .flat_map(|(a, b)| [a.as_str(), b.as_str()])
        .collect();
    // DFS with an explicit path for cycle reporting
    fn visit<'a>(
        n: &'a str,
        order: &'a EntityOrder,
        path: &mut Vec<&'a str>,
        done: &mut BTreeSet<&'a str>,
    ) -> Option<Vec<String>> {
        if done.contains(n) {
            return None;
        }
        if let Some(start) = path.iter().position(|&p| p == n) {
            let mut cycle: Vec<String> = path[start..].iter().map(|s| s.to_string()).collect();
            cycle.push(n.to_string());
            return Some(cycle);
        }
        path.push(n);
        for (a, b) in &order.pairs {
            if a == n {
                if let Some(c) = visit(b, order, path, done) {
                    return Some(c);
                }
            }
        }
        path.pop();
        done.insert(n);
        None
    }
    let mut done = BTreeSet::new();
    for n in nodes {
        let mut path = Vec::new();
        if let Some(c) = visit(n, order, &mut path, &mut done) {
            return Some(c);
        }
    }
    None
}

/// Derive the phased design: one phase per constraint, topologically sorted
/// by the entity order (stable for incomparable phases), each carrying its
/// interference verdict.
pub fn derive_plan(spec: &TransformationSpec, mm: &MetamodelSet) -> Result<Plan> {
    let order = entity_order(spec, mm)?;
    let n = spec.constraints.len();
    let mut created: Vec<BTreeSet<String>> = Vec::with_capacity(n);
    for c in &spec.constraints {
        created.push(created_entities(c, mm)?);
    }
    // p must precede q when p creates (a subtype of) T1 and q creates
    // (a subtype of) T2 for some pair T1 < T2
    let mut preds: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (t1, t2) in &order.pairs {
        for p in 0..n {
            if !created[p].iter().any(|e| mm.is_subtype(e, t1)) {
                continue;
            }
            for q in 0..n {
                if p != q && created[q].iter().any(|e| mm.is_subtype(e, t2)) {
                    preds[q].insert(p);
                }
            }
        }
    }
    let mut placed = vec![false; n];
    let mut phases = Vec::with_capacity(n);
    while phases.len() < n {
        let next = (0..n)
            .find(|&i| !placed[i] && preds[i].iter().all(|&p| placed[p]))
            .ok_or_else(|| UmtError::Cycle("phases are mutually dependent".to_string()))?;
        placed[next] = true;
        phases.push(Phase {
            constraint_index: next,
            verdict: non_interference(&spec.constraints[next], mm)?,
        });
    }
    Ok(Plan { phases, order })
}

/// Statically check the non-interference condition for one constraint.
pub fn non_interference(c: &Constraint, mm: &MetamodelSet) -> Result<Verdict> {
    let atoms = post_atoms(&c.succedent, mm)?;
    let writes = write_footprint(&atoms);

    // reads the iteration itself performs
    let mut reads: BTreeSet<ReadItem> = BTreeSet::new();
    for it in &c.iterators {
        reads.extend(read_footprint(&it.domain, mm));
    }
    if let Some(ante) = &c.antecedent {
        reads.extend(read_footprint(ante, mm));
    }
    // reads performed while establishing the succedent; a deletion constraint
    // evaluates these before applying its deletes (evaluate-then-apply), so
    // they cannot observe its own writes
    if c.kind != ConstraintKind::Deletion {
        reads.extend(succedent_reads(&atoms, mm));
    }
    // pre-state reads can never conflict
    let live_reads: Vec<&ReadItem> = reads.iter().filter(|r| !r.at_pre).collect();

    // live iterator domains, by element entity
    let live_iterations: Vec<&str> = c
        .iterators
        .iter()
        .filter(|it| read_footprint(&it.domain, mm).iter().any(|r| !r.at_pre))
        .map(|it| it.elem_entity.as_str())
        .collect();

    let mut conflicts: Vec<Conflict> = Vec::new();
    let mut push = |read: ReadLike, write: &WriteItem| {
        let c = Conflict {
            read,
            write: write.clone(),
        };
        if !conflicts.contains(&c) {
            conflicts.push(c);
        }
    };

    for w in &writes {
        match w {
            WriteItem::CreateExtent(e) => {
                if let Some(ctx) = &c.context {
                    if mm.is_subtype(e, ctx) {
                        push(ReadLike::ContextExtent(ctx.clone()), w);
                    }
                }
                for r in &live_reads {
                    if let ReadTarget::Extent(f) = &r.target {
                        if mm.is_subtype(e, f) {
                            push(ReadLike::Item((*r).clone()), w);
                        }
                    }
                }
                for it in &live_iterations {
                    if mm.is_subtype(e, it) {
                        push(ReadLike::Iteration(it.to_string()), w);
                    }
                }
            }
            WriteItem::AssignFeature {
                new_object_only: true,
                ..
            } => {}
            WriteItem::AssignFeature {
                entity,
                feature,
                new_object_only: false,
            }
            | WriteItem::InsertInto { entity, feature } => {
                for r in &live_reads {
                    if let ReadTarget::Feature {
                        entity: re,
                        feature: rf,
                    } = &r.target
                    {
                        if rf == feature && mm.comparable(re, entity) {
                            push(ReadLike::Item((*r).clone()), w);
                        }
                    }
                }
            }
            WriteItem::DeleteFrom(e) => {
                if let Some(ctx) = &c.context {
                    if mm.comparable(e, ctx) {
                        push(ReadLike::ContextExtent(ctx.clone()), w);
                    }
                }
                for r in &live_reads {
                    match &r.target {
                        // deleting E instances can change any feature of E
                        ReadTarget::Feature { entity: re, .. } if mm.comparable(re, e) => {
                            push(ReadLike::Item((*r).clone()), w);
                        }
                        ReadTarget::Extent(f) if mm.comparable(f, e) => {
                            push(ReadLike::Item((*r).clone()), w);
                        }
                        _ => {}
                    }
                }
                for it in &live_iterations {
                    if mm.comparable(it, e) {
                        push(ReadLike::Iteration(it.to_string()), w);
                    }
                }
                // deletion also unlinks the deleted objects from every end
                // typed at (a relative of) E anywhere in the metamodels
                for ent in mm.entities() {
                    for end in &ent.ends {
                        if !mm.comparable(&end.target, e) {
                            continue;
                        }
                        for r in &live_reads {
                            if let ReadTarget::Feature {
                                entity: re,
                                feature: rf,
                            } = &r.target
                            {
                                if rf == &end.name && mm.comparable(re, &ent.name) {
                                    push(ReadLike::Item((*r).clone()), w);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    Ok(if conflicts.is_empty() {
        Verdict::Ok
    } else {
        Verdict::Rejected(conflicts)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::Metamodel;
    use crate::spec::TransformationSpec;

    const GRAPH_MM: &str = "\
entity Graph { nodes : set(Node) ; edges : set(Edge) ; }
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
";

    const MIG_MM1: &str = "\
abstract entity ModelElement1 { id1 : String ; }
entity Node1 extends ModelElement1 { name : String ; }
entity Edge1 extends ModelElement1 { src1 : opt(Node1) ; trg1 : opt(Node1) ; }
entity Graph1 extends ModelElement1 { nodes : set(Node1) ; edges : set(Edge1) ; }
";

    const MIG_MM2: &str = "\
abstract entity ModelElement2 { id2 : String (key) ; text : String ; }
entity Node2 extends ModelElement2 { }
entity Edge2 extends ModelElement2 { src2 : opt(Node2) ; trg2 : opt(Node2) ; }
entity Graph2 extends ModelElement2 { gcs : set(ModelElement2) ; }
";

    const MIGRATION_SPEC: &str = "\
transformation Migration
assumption Asm1 : ModelElement2->size() = 0
constraint C1 on Node1 : Node2->exists(n2 | n2.id2 = id1 & n2.text = name)
constraint C2 on Edge1 : Edge2->exists(e2 | e2.id2 = id1 & e2.text = \"\" & e2.src2 = Node2[src1.id1] & e2.trg2 = Node2[trg1.id1])
constraint C3 on Graph1 : Graph2->exists(g2 | g2.id2 = id1 & g2.gcs = Node2[nodes.id1] \\/ Edge2[edges.id1])
";

    const MIGRATION_SPEC_REVERSED: &str = "\
transformation Migration
constraint C3 on Graph1 : Graph2->exists(g2 | g2.id2 = id1 & g2.gcs = Node2[nodes.id1] \\/ Edge2[edges.id1])
constraint C2 on Edge1 : Edge2->exists(e2 | e2.id2 = id1 & e2.text = \"\" & e2.src2 = Node2[src1.id1] & e2.trg2 = Node2[trg1.id1])
constraint C1 on Node1 : Node2->exists(n2 | n2.id2 = id1 & n2.text = name)
";

    const TRANSITIVE_SPEC: &str = "\
transformation TransitiveEdges
constraint Cons on Graph :
  e1 : edges@pre & e2 : edges@pre &
  e1.trg = e2.src & e1.src /= {} & e1.trg /= {} & e2.trg /= {}
  => Edge->exists1(e3 | e3.src = e1.src & e3.trg = e2.trg & e3 : edges)
";

    const TRANSITIVE_CLOSURE_VARIANT: &str = "\
transformation TransitiveClosure
constraint Cons on Graph :
  e1 : edges & e2 : edges &
  e1.trg = e2.src & e1.src /= {} & e1.trg /= {} & e2.trg /= {}
  => Edge->exists1(e3 | e3.src = e1.src & e3.trg = e2.trg & e3 : edges)
";

    const QUERIES_SPEC: &str = "\
transformation GraphQueries
constraint Q1 on Graph : IntResult->exists(r | r.num = nodes->size())
constraint Q2 on Graph : IntResult->exists(r | r.num = edges->select(src = trg & trg /= {})->size())
constraint C1 on Graph :
  e1 : edges & e2 : edges & e3 : edges &
  e1.trg = e2.src & e2.trg = e3.src & e3.trg = e1.src &
  (e1.src \\/ e2.src \\/ e3.src)->size() = 3
  => ThreeCycle->exists1(tc | tc.elements = (e1.src \\/ e2.src \\/ e3.src) & tc : cycles)
constraint C2 on Graph : IntResult->exists(r | r.num = cycles->size())
";

    const QUERIES_MM: &str = "\
entity Graph { nodes : set(Node) ; edges : set(Edge) ; cycles : set(ThreeCycle) ; }
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
entity ThreeCycle { elements : set(Node) ; }
entity IntResult { num : Int ; }
";

    fn graph_mm() -> MetamodelSet {
        MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap())
    }

    fn mig_mm() -> MetamodelSet {
        MetamodelSet::new(vec![
            Metamodel::parse(MIG_MM1).unwrap(),
            Metamodel::parse(MIG_MM2).unwrap(),
        ])
    }

    fn pair(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn migration_entity_order() {
        let mm = mig_mm();
        let spec = TransformationSpec::parse(MIGRATION_SPEC, &mm).unwrap();
        let order = entity_order(&spec, &mm).unwrap();
        let expected: BTreeSet<(String, String)> = [
            pair("Node2", "Edge2"),
            pair("Node2", "Graph2"),
            pair("Edge2", "Graph2"),
        ]
        .into_iter()
        .collect();
        assert_eq!(order.pairs, expected);
    }

    #[test]
    fn single_constraint_specs_have_empty_order() {
        let mm = graph_mm();
        for src in [
            TRANSITIVE_SPEC,
            "transformation Reverse\nconstraint C1 on Edge : src = trg@pre & trg = src@pre",
            "transformation DeleteNodes(n1 : String)\nconstraint C1 on Graph : nodes->select(name = n1)->isDeleted()",
        ] {
            let spec = TransformationSpec::parse(src, &mm).unwrap();
            let order = entity_order(&spec, &mm).unwrap();
            assert!(order.pairs.is_empty(), "expected empty order for:\n{src}");
        }
    }

    #[test]
    fn queries_order_cycles_before_results() {
        let mm = MetamodelSet::single(Metamodel::parse(QUERIES_MM).unwrap());
        let spec = TransformationSpec::parse(QUERIES_SPEC, &mm).unwrap();
        let order = entity_order(&spec, &mm).unwrap();
        let expected: BTreeSet<(String, String)> =
            [pair("ThreeCycle", "IntResult")].into_iter().collect();
        assert_eq!(order.pairs, expected);
        // C1 is scheduled before every IntResult-creating phase
        let plan = derive_plan(&spec, &mm).unwrap();
        let labels: Vec<&str> = plan
            .phases
            .iter()
            .map(|p| spec.constraints[p.constraint_index].label.as_str())
            .collect();
        assert_eq!(labels, vec!["C1", "Q1", "Q2", "C2"]);
    }

    #[test]
    fn migration_plan_is_three_phases_in_dependency_order() {
        let mm = mig_mm();
        for src in [MIGRATION_SPEC, MIGRATION_SPEC_REVERSED] {
            let spec = TransformationSpec::parse(src, &mm).unwrap();
            let plan = derive_plan(&spec, &mm).unwrap();
            let labels: Vec<&str> = plan
                .phases
                .iter()
                .map(|p| spec.constraints[p.constraint_index].label.as_str())
                .collect();
            assert_eq!(labels, vec!["C1", "C2", "C3"]);
            assert!(plan.all_ok());
        }
    }

    #[test]
    fn plan_is_deterministic() {
        let mm = mig_mm();
        let spec = TransformationSpec::parse(MIGRATION_SPEC, &mm).unwrap();
        let a = derive_plan(&spec, &mm).unwrap().render(&spec);
        let b = derive_plan(&spec, &mm).unwrap().render(&spec);
        assert_eq!(a, b);
    }

    #[test]
    fn transitive_spec_is_ok() {
        let mm = graph_mm();
        let spec = TransformationSpec::parse(TRANSITIVE_SPEC, &mm).unwrap();
        let verdict = non_interference(&spec.constraints[0], &mm).unwrap();
        assert_eq!(verdict, Verdict::Ok);
    }

    #[test]
    fn transitive_closure_variant_is_rejected() {
        let mm = graph_mm();
        let spec = TransformationSpec::parse(TRANSITIVE_CLOSURE_VARIANT, &mm).unwrap();
        let verdict = non_interference(&spec.constraints[0], &mm).unwrap();
        let Verdict::Rejected(conflicts) = verdict else {
            panic!("expected rejection");
        };
        // the insertion into the live iterated collection must be reported
        assert!(
            conflicts.iter().any(|c| {
                matches!(&c.write, WriteItem::InsertInto { entity, feature }
                    if entity == "Graph" && feature == "edges")
                    && matches!(&c.read, ReadLike::Item(r)
                        if matches!(&r.target, ReadTarget::Feature { entity, feature }
                            if entity == "Graph" && feature == "edges") && !r.at_pre)
            }),
            "missing (Graph, edges) conflict: {conflicts:?}"
        );
    }

    #[test]
    fn reverse_is_ok_because_reads_are_at_pre() {
        let mm = graph_mm();
        let spec = TransformationSpec::parse(
            "transformation Reverse\nconstraint C1 on Edge : src = trg@pre & trg = src@pre",
            &mm,
        )
        .unwrap();
        assert_eq!(
            non_interference(&spec.constraints[0], &mm).unwrap(),
            Verdict::Ok
        );
        // without @pre the same constraint interferes with itself
        let live = TransformationSpec::parse(
            "transformation Reverse\nconstraint C1 on Edge : src = trg & trg = src",
            &mm,
        )
        .unwrap();
        assert!(matches!(
            non_interference(&live.constraints[0], &mm).unwrap(),
            Verdict::Rejected(_)
        ));
    }

    #[test]
    fn deletion_is_ok_via_evaluate_then_apply() {
        let mm = graph_mm();
        let spec = TransformationSpec::parse(
            "transformation DeleteNodes(n1 : String)\nconstraint C1 on Graph : \
             edges->select(src.name = n1 or trg.name = n1)->isDeleted() & nodes->select(name = n1)->isDeleted()",
            &mm,
        )
        .unwrap();
        assert_eq!(
            non_interference(&spec.constraints[0], &mm).unwrap(),
            Verdict::Ok
        );
        // deleting the context entity itself is always rejected
        let bad = TransformationSpec::parse(
            "transformation Bad\nconstraint C1 on Graph : Graph->select(g | g.nodes = {})->isDeleted()",
            &mm,
        )
        .unwrap();
        assert!(matches!(
            non_interference(&bad.constraints[0], &mm).unwrap(),
            Verdict::Rejected(_)
        ));
    }

    #[test]
    fn queries_and_cycle_constraints_are_ok() {
        let mm = MetamodelSet::single(Metamodel::parse(QUERIES_MM).unwrap());
        let spec = TransformationSpec::parse(QUERIES_SPEC, &mm).unwrap();
        for c in &spec.constraints {
            assert_eq!(
                non_interference(c, &mm).unwrap(),
                Verdict::Ok,
                "constraint {}",
                c.label
            );
        }
    }

    #[test]
    fn cycle_detection_names_the_cycle() {
        // A reads B to create A, B reads A to create B
        let mm = MetamodelSet::single(
            Metamodel::parse(
                "entity A { others : set(B) ; }\nentity B { others2 : set(A) ; }\nentity Root { key : String ; }",
            )
            .unwrap(),
        );
        let spec = TransformationSpec::parse(
            "transformation Loop\n\
             constraint C1 on Root : A->exists(a | a.others = B)\n\
             constraint C2 on Root : B->exists(b | b.others2 = A)",
            &mm,
        )
        .unwrap();
        let err = entity_order(&spec, &mm).unwrap_err();
        assert!(matches!(err, UmtError::Cycle(_)));
    }
}
