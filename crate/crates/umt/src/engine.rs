//! Plan execution and post-run verification.
//!
//! Execution interprets each constraint's succedent constructively:
//! `Entity->exists(v | body)` creates an instance and establishes the body;
//! `exists1` first searches the extent for an instance matching the body's
//! identity atoms (feature equations on the bound variable with evaluable
//! right-hand sides) and only creates when none exists; `x.f = e` assigns;
//! `x : y.role` inserts idempotently; `coll->isDeleted()` deletes the
//! members, with all selection arguments evaluated before any delete is
//! applied (evaluate-then-apply).
//!
//! The `@pre` baseline is a single snapshot taken before the first phase.
//! Context extents and iterator domains are frozen as their loops are
//! entered, so every phase performs a fixed number of iterations. Iterator
//! bindings are not implicitly distinct; specs encode distinctness in their
//! antecedents when they need it.
//!
//! After a run, [`verify_cons`] re-evaluates every constraint declaratively
//! over the (final state, pre state) pair and reports a falsifying witness
//! if construction failed to establish it.

use std::collections::BTreeMap;

use crate::error::{Result, UmtError};
pub use crate::expr::eval::eval_query;
use crate::expr::eval::{as_bool, eval, Env, EvalMode};
use crate::expr::post::{post_atoms, PostAtom, TargetVar};
use crate::expr::{Expr, ExprKind};
use crate::metamodel::FeatureRef;
use crate::model::{ModelState, ObjectId, Snapshot, Value};
use crate::planner::Plan;
use crate::spec::{Constraint, ConstraintKind, TransformationSpec};

/// One recorded effect, sufficient to replay the run from the pre-state.
#[derive(Debug, Clone)]
pub enum Effect {
    Create {
        entity: String,
        id: ObjectId,
        label: String,
    },
    Assign {
        object: ObjectId,
        feature: String,
        value: Value,
    },
    Insert {
        owner: ObjectId,
        feature: String,
        member: ObjectId,
    },
    Delete {
        targets: Vec<ObjectId>,
    },
}

#[derive(Debug, Clone)]
pub struct EffectRecord {
    pub phase: usize,
    /// Binding at the time of the effect, e.g. `self=g e1=a e2=b`.
    pub binding: String,
    pub effect: Effect,
}

/// Iteration accounting for one phase.
#[derive(Debug, Clone)]
pub struct PhaseStats {
    pub label: String,
    /// Leaf bindings counted by a dry walk of the frozen domains before any
    /// effect of this context object is applied.
    pub expected_bindings: u64,
    /// Leaf bindings actually processed.
    pub visited_bindings: u64,
    /// Bindings whose antecedent held.
    pub applied: u64,
}

#[derive(Debug)]
pub struct RunResult {
    pub final_state: ModelState,
    pub pre_state: Snapshot,
    pub trace: Vec<EffectRecord>,
    pub created: BTreeMap<String, usize>,
    pub deleted: BTreeMap<String, usize>,
    pub phase_stats: Vec<PhaseStats>,
    pub params: BTreeMap<String, Value>,
}

/// Verdict of declaratively re-checking one constraint after a run.
#[derive(Debug, Clone)]
pub struct ConstraintVerdict {
    pub label: String,
    pub passed: bool,
    pub witness: Option<String>,
    pub text: String,
}

impl std::fmt::Display for ConstraintVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.passed {
            write!(f, "constraint {}: pass", self.label)
        } else {
            match &self.witness {
                Some(w) => write!(
                    f,
                    "constraint {}: FAIL witness: {w} ({})",
                    self.label, self.text
                ),
                None => write!(f, "constraint {}: FAIL ({})", self.label, self.text),
            }
        }
    }
}

struct Runner<'a> {
    params: &'a BTreeMap<String, Value>,
    trace: Vec<EffectRecord>,
    created: BTreeMap<String, usize>,
    deleted: BTreeMap<String, usize>,
    phase: usize,
    binding_desc: String,
}

/// Execute a plan against a model. The caller is responsible for having
/// checked assumptions; interference verdicts must be `Ok` unless `force`.
pub fn run(
    spec: &TransformationSpec,
    plan: &Plan,
    mut state: ModelState,
    params: &BTreeMap<String, Value>,
    force: bool,
) -> Result<RunResult> {
    if !force && !plan.all_ok() {
        return Err(UmtError::runtime(
            "plan has rejected phases; refusing to run without force",
        ));
    }
    for (name, _) in &spec.params {
        if !params.contains_key(name) {
            return Err(UmtError::runtime(format!(
                "missing value for parameter `{name}`"
            )));
        }
    }
    for name in params.keys() {
        if !spec.params.iter().any(|(n, _)| n == name) {
            return Err(UmtError::runtime(format!("unknown parameter `{name}`")));
        }
    }

    state.reset_fresh_counter();
    let pre = state.snapshot();
    let mut runner = Runner {
        params,
        trace: Vec::new(),
        created: BTreeMap::new(),
        deleted: BTreeMap::new(),
        phase: 0,
        binding_desc: String::new(),
    };
    let mut stats = Vec::with_capacity(plan.phases.len());
    for (i, phase) in plan.phases.iter().enumerate() {
        runner.phase = i;
        let c = &spec.constraints[phase.constraint_index];
        stats.push(runner.execute_phase(c, &mut state, pre.state())?);
    }
    Ok(RunResult {
        final_state: state,
        pre_state: pre,
        trace: runner.trace,
        created: runner.created,
        deleted: runner.deleted,
        phase_stats: stats,
        params: params.clone(),
    })
}

impl<'a> Runner<'a> {
    fn execute_phase(
        &mut self,
        c: &Constraint,
        state: &mut ModelState,
        pre: &ModelState,
    ) -> Result<PhaseStats> {
        let mut stats = PhaseStats {
            label: c.label.clone(),
            expected_bindings: 0,
            visited_bindings: 0,
            applied: 0,
        };
        // freeze the context extent at phase entry
        let contexts: Vec<Option<ObjectId>> = match &c.context {
            Some(entity) => {
                state.metamodels().entity_checked(entity)?;
                state.extent(entity).iter().map(|&id| Some(id)).collect()
            }
            None => vec![None],
        };
        for ctx in contexts {
            // dry walk: how many leaf bindings do the frozen domains yield
            // before this context object causes any effect?
            let mut env = Env::new(self.params, Some(pre));
            env.self_object = ctx;
            stats.expected_bindings += count_bindings(c, &mut env, state, 0)?;

            let mut env = Env::new(self.params, Some(pre));
            env.self_object = ctx;
            self.iterate(c, &mut env, state, 0, &mut stats)?;
        }
        Ok(stats)
    }

    fn iterate(
        &mut self,
        c: &Constraint,
        env: &mut Env<'_>,
        state: &mut ModelState,
        depth: usize,
        stats: &mut PhaseStats,
    ) -> Result<()> {
        if depth == c.iterators.len() {
            stats.visited_bindings += 1;
            return self.apply_binding(c, env, state, stats);
        }
        let it = &c.iterators[depth];
        // freezing = materializing the domain at loop entry
        let domain = eval(&it.domain, env, state, EvalMode::Query)?;
        let Value::Coll(elems, _) = domain else {
            return Err(UmtError::runtime(format!(
                "iterator `{}` domain did not evaluate to a collection",
                it.var
            )));
        };
        for elem in elems {
            env.bindings.push((it.var.clone(), elem));
            let r = self.iterate(c, env, state, depth + 1, stats);
            env.bindings.pop();
            r?;
        }
        Ok(())
    }

    fn apply_binding(
        &mut self,
        c: &Constraint,
        env: &mut Env<'_>,
        state: &mut ModelState,
        stats: &mut PhaseStats,
    ) -> Result<()> {
        self.binding_desc = describe_binding(env, state);
        if let Some(ante) = &c.antecedent {
            if !as_bool(&eval(ante, env, state, EvalMode::Query)?)? {
                return Ok(());
            }
        }
        stats.applied += 1;
        let atoms = post_atoms(&c.succedent, state.metamodels())?;
        if c.kind == ConstraintKind::Deletion {
            // evaluate every selection before applying any delete
            let mut pending: Vec<Vec<ObjectId>> = Vec::new();
            for atom in &atoms {
                let PostAtom::DeleteAll { coll, .. } = atom else {
                    return Err(UmtError::runtime(
                        "deletion constraint with a non-delete atom",
                    ));
                };
                pending.push(self.eval_refs(coll, env, state)?);
            }
            for targets in pending {
                self.delete(state, targets)?;
            }
            return Ok(());
        }
        self.establish(&atoms, env, state)
    }

    fn establish(
        &mut self,
        atoms: &[PostAtom<'_>],
        env: &mut Env<'_>,
        state: &mut ModelState,
    ) -> Result<()> {
        for atom in atoms {
            match atom {
                PostAtom::Create {
                    entity,
                    unique,
                    binder,
                    body,
                    ..
                } => {
                    let matched = if *unique {
                        self.find_unique_match(entity, binder, body, env, state)?
                    } else {
                        None
                    };
                    match matched {
                        Some((id, identity_idx)) => {
                            env.bindings.push((binder.to_string(), Value::Ref(id)));
                            let rest: Vec<&PostAtom<'_>> = body
                                .iter()
                                .enumerate()
                                .filter(|(i, _)| !identity_idx.contains(i))
                                .map(|(_, a)| a)
                                .collect();
                            let r = self.establish_refs(&rest, env, state);
                            env.bindings.pop();
                            r?;
                        }
                        None => {
                            let id = state.create(entity)?;
                            *self.created.entry(entity.to_string()).or_default() += 1;
                            self.record(Effect::Create {
                                entity: entity.to_string(),
                                id,
                                label: state.label_of(id).to_string(),
                            });
                            env.bindings.push((binder.to_string(), Value::Ref(id)));
                            let r = self.establish(body, env, state);
                            env.bindings.pop();
                            r?;
                        }
                    }
                }
                PostAtom::Assign {
                    target,
                    feature,
                    rhs,
                    ..
                } => {
                    let id = self.target_object(target, env)?;
                    let value = eval(rhs, env, state, EvalMode::Query)?;
                    self.assign(state, id, feature, value)?;
                }
                PostAtom::Insert {
                    member,
                    owner,
                    feature,
                    ..
                } => {
                    let owner_id = self.target_object(owner, env)?;
                    let mv = eval(member, env, state, EvalMode::Query)?;
                    let Value::Ref(member_id) = mv else {
                        return Err(UmtError::runtime(format!(
                            "membership atom expects an object, found {}",
                            mv.type_name()
                        )));
                    };
                    if state.insert_member(owner_id, feature, member_id)? {
                        self.record(Effect::Insert {
                            owner: owner_id,
                            feature: feature.to_string(),
                            member: member_id,
                        });
                    }
                }
                PostAtom::DeleteAll { coll, .. } => {
                    let targets = self.eval_refs(coll, env, state)?;
                    self.delete(state, targets)?;
                }
            }
        }
        Ok(())
    }

    fn establish_refs(
        &mut self,
        atoms: &[&PostAtom<'_>],
        env: &mut Env<'_>,
        state: &mut ModelState,
    ) -> Result<()> {
        for atom in atoms {
            self.establish(std::slice::from_ref(*atom), env, state)?;
        }
        Ok(())
    }

    /// For `exists1`: evaluate the identity atoms (feature equations on the
    /// binder with right-hand sides that are evaluable before creation) and
    /// search the extent for an instance satisfying all of them. Returns the
    /// match and the body indices of the identity atoms.
    fn find_unique_match(
        &mut self,
        entity: &str,
        binder: &str,
        body: &[PostAtom<'_>],
        env: &mut Env<'_>,
        state: &mut ModelState,
    ) -> Result<Option<(ObjectId, Vec<usize>)>> {
        let mut identity: Vec<(usize, &str, Value)> = Vec::new();
        for (i, atom) in body.iter().enumerate() {
            if let PostAtom::Assign {
                target: TargetVar::Var(v),
                feature,
                rhs,
                ..
            } = atom
            {
                if *v == binder && !mentions_var(rhs, binder) && !contains_creation(rhs) {
                    let value = eval(rhs, env, state, EvalMode::Query)?;
                    identity.push((i, feature, value));
                }
            }
        }
        // with no identity atoms every extent member matches vacuously
        let extent: Vec<ObjectId> = state.extent(entity).to_vec();
        for id in extent {
            let mut all = true;
            for (_, feature, value) in &identity {
                let have = state.read_feature(id, feature)?;
                if !crate::expr::eval::values_equal(&have, value) {
                    all = false;
                    break;
                }
            }
            if all {
                let idx = identity.iter().map(|(i, _, _)| *i).collect();
                return Ok(Some((id, idx)));
            }
        }
        Ok(None)
    }

    fn target_object(&self, target: &TargetVar<'_>, env: &Env<'_>) -> Result<ObjectId> {
        let v = match target {
            TargetVar::SelfObject => env
                .self_object
                .map(Value::Ref)
                .ok_or_else(|| UmtError::runtime("no context object for an assignment to self"))?,
            TargetVar::Var(name) => env
                .bindings
                .iter()
                .rev()
                .find(|(n, _)| n == name)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| UmtError::runtime(format!("unbound variable `{name}`")))?,
        };
        match v {
            Value::Ref(id) => Ok(id),
            other => Err(UmtError::runtime(format!(
                "assignment target must be an object, found {}",
                other.type_name()
            ))),
        }
    }

    fn assign(
        &mut self,
        state: &mut ModelState,
        id: ObjectId,
        feature: &str,
        value: Value,
    ) -> Result<()> {
        let entity = state.entity_of(id)?.to_string();
        let fref = state
            .metamodels()
            .lookup_feature(&entity, feature)?
            .ok_or_else(|| {
                UmtError::runtime(format!("entity `{entity}` has no feature `{feature}`"))
            })?;
        match fref {
            FeatureRef::Attr { .. } => {
                // a singleton collection assigned to an attribute is unwrapped
                let scalar = match value {
                    Value::Coll(mut v, _) if v.len() == 1 => v.pop().unwrap(),
                    other => other,
                };
                state.set_attr(id, feature, scalar.clone())?;
                self.record(Effect::Assign {
                    object: id,
                    feature: feature.to_string(),
                    value: scalar,
                });
            }
            FeatureRef::End { .. } => {
                state.set_end(id, feature, value)?;
                let stored = state
                    .slot(id, feature)
                    .cloned()
                    .unwrap_or_else(Value::empty_set);
                self.record(Effect::Assign {
                    object: id,
                    feature: feature.to_string(),
                    value: stored,
                });
            }
        }
        Ok(())
    }

    fn eval_refs(
        &self,
        coll: &Expr,
        env: &mut Env<'_>,
        state: &ModelState,
    ) -> Result<Vec<ObjectId>> {
        let v = eval(coll, env, state, EvalMode::Query)?;
        let (elems, _) = v.coerce_coll();
        let mut out = Vec::with_capacity(elems.len());
        for e in elems {
            match e {
                Value::Ref(id) => out.push(id),
                other => {
                    return Err(UmtError::runtime(format!(
                        "`->isDeleted()` expects objects, found {}",
                        other.type_name()
                    )));
                }
            }
        }
        Ok(out)
    }

    fn delete(&mut self, state: &mut ModelState, targets: Vec<ObjectId>) -> Result<()> {
        // an earlier conjunct of the same binding may have deleted overlaps
        let live: Vec<ObjectId> = targets
            .into_iter()
            .filter(|&id| state.contains(id))
            .collect();
        if live.is_empty() {
            return Ok(());
        }
        for &id in &live {
            let entity = state.entity_of(id)?.to_string();
            *self.deleted.entry(entity).or_default() += 1;
        }
        state.delete(&live)?;
        self.record(Effect::Delete { targets: live });
        Ok(())
    }

    fn record(&mut self, effect: Effect) {
        self.trace.push(EffectRecord {
            phase: self.phase,
            binding: self.binding_desc.clone(),
            effect,
        });
    }
}

fn describe_binding(env: &Env<'_>, state: &ModelState) -> String {
    let mut parts = Vec::new();
    if let Some(id) = env.self_object {
        parts.push(format!("self={}", state.label_of(id)));
    }
    for (name, v) in &env.bindings {
        match v {
            Value::Ref(id) => parts.push(format!("{name}={}", state.label_of(*id))),
            other => parts.push(format!("{name}={other:?}")),
        }
    }
    parts.join(" ")
}

fn count_bindings(
    c: &Constraint,
    env: &mut Env<'_>,
    state: &ModelState,
    depth: usize,
) -> Result<u64> {
    if depth == c.iterators.len() {
        return Ok(1);
    }
    let it = &c.iterators[depth];
    let domain = eval(&it.domain, env, state, EvalMode::Query)?;
    let Value::Coll(elems, _) = domain else {
        return Err(UmtError::runtime(format!(
            "iterator `{}` domain did not evaluate to a collection",
            it.var
        )));
    };
    let mut total = 0u64;
    for elem in elems {
        env.bindings.push((it.var.clone(), elem));
        let r = count_bindings(c, env, state, depth + 1);
        env.bindings.pop();
        total += r?;
    }
    Ok(total)
}

fn mentions_var(e: &Expr, var: &str) -> bool {
    match &e.kind {
        ExprKind::Var(v) => v == var,
        ExprKind::Nav { recv, .. } => mentions_var(recv, var),
        ExprKind::AtPre(i) | ExprKind::SizeOf(i) | ExprKind::IsDeleted(i) => mentions_var(i, var),
        ExprKind::KeyLookup { index, .. } => mentions_var(index, var),
        ExprKind::Binary { lhs, rhs, .. } => mentions_var(lhs, var) || mentions_var(rhs, var),
        ExprKind::Select { src, pred, binder } => {
            mentions_var(src, var) || (binder.as_deref() != Some(var) && mentions_var(pred, var))
        }
        ExprKind::Exists {
            src, body, binder, ..
        } => mentions_var(src, var) || (binder != var && mentions_var(body, var)),
        _ => false,
    }
}

fn contains_creation(e: &Expr) -> bool {
    match &e.kind {
        ExprKind::Exists { src, .. } => matches!(src.kind, ExprKind::TypeExtent(_)),
        ExprKind::Nav { recv, .. } => contains_creation(recv),
        ExprKind::AtPre(i) | ExprKind::SizeOf(i) | ExprKind::IsDeleted(i) => contains_creation(i),
        ExprKind::KeyLookup { index, .. } => contains_creation(index),
        ExprKind::Binary { lhs, rhs, .. } => contains_creation(lhs) || contains_creation(rhs),
        ExprKind::Select { src, pred, .. } => contains_creation(src) || contains_creation(pred),
        _ => false,
    }
}

/// Re-check every constraint declaratively over a (final, pre) state pair.
pub fn verify_cons(
    spec: &TransformationSpec,
    final_state: &ModelState,
    pre_state: &ModelState,
    params: &BTreeMap<String, Value>,
) -> Result<Vec<ConstraintVerdict>> {
    let mut out = Vec::new();
    for c in &spec.constraints {
        out.push(verify_constraint(c, final_state, pre_state, params)?);
    }
    Ok(out)
}

fn verify_constraint(
    c: &Constraint,
    final_state: &ModelState,
    pre_state: &ModelState,
    params: &BTreeMap<String, Value>,
) -> Result<ConstraintVerdict> {
    let contexts: Vec<Option<ObjectId>> = match &c.context {
        Some(entity) => final_state
            .extent(entity)
            .iter()
            .map(|&id| Some(id))
            .collect(),
        None => vec![None],
    };
    let mut verdict = ConstraintVerdict {
        label: c.label.clone(),
        passed: true,
        witness: None,
        text: c.text.clone(),
    };
    for ctx in contexts {
        let mut env = Env::new(params, Some(pre_state));
        env.self_object = ctx;
        if !verify_bindings(c, &mut env, final_state, 0)? {
            verdict.passed = false;
            verdict.witness = Some(match ctx {
                Some(id) => format!("self={}", final_state.label_of(id)),
                None => "(no context)".to_string(),
            });
            break;
        }
    }
    Ok(verdict)
}

fn verify_bindings(
    c: &Constraint,
    env: &mut Env<'_>,
    final_state: &ModelState,
    depth: usize,
) -> Result<bool> {
    if depth == c.iterators.len() {
        if let Some(ante) = &c.antecedent {
            if !as_bool(&eval(ante, env, final_state, EvalMode::Declarative)?)? {
                return Ok(true);
            }
        }
        return as_bool(&eval(
            &c.succedent,
            env,
            final_state,
            EvalMode::Declarative,
        )?);
    }
    let it = &c.iterators[depth];
    let domain = eval(&it.domain, env, final_state, EvalMode::Declarative)?;
    let (elems, _) = domain.coerce_coll();
    for elem in elems {
        env.bindings.push((it.var.clone(), elem));
        let ok = verify_bindings(c, env, final_state, depth + 1);
        env.bindings.pop();
        if !ok? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Replay a trace against (a copy of) the pre-state. Fresh labels and ids
/// are deterministic, so replay reproduces the final state exactly.
pub fn replay(trace: &[EffectRecord], pre: &Snapshot) -> Result<ModelState> {
    let mut state = pre.state().clone();
    state.reset_fresh_counter();
    for rec in trace {
        match &rec.effect {
            Effect::Create { entity, id, label } => {
                let got = state.create_labeled(entity, label)?;
                if got != *id {
                    return Err(UmtError::runtime(format!(
                        "replay divergence: created {} as id {:?}, expected {:?}",
                        label, got, id
                    )));
                }
            }
            Effect::Assign {
                object,
                feature,
                value,
            } => match value {
                Value::Coll(..) | Value::Ref(_) => {
                    state.set_end(*object, feature, value.clone())?
                }
                scalar => state.set_attr(*object, feature, scalar.clone())?,
            },
            Effect::Insert {
                owner,
                feature,
                member,
            } => {
                state.insert_member(*owner, feature, *member)?;
            }
            Effect::Delete { targets } => state.delete(targets)?,
        }
    }
    Ok(state)
}
