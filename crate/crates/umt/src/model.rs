//! Object models: per-entity extents, attribute slots, link collections,
//! a key index, and frozen pre-state snapshots.
//!
//! The text format is one statement per line:
//!
//! ```text
//! n1 : Node            -- declare an object
//! n1.name = "n1"       -- set an attribute
//! n1 : g.nodes         -- add n1 to g's `nodes` collection
//! ```
//!
//! Objects appear in their entity's extent and in every ancestor extent.
//! Extents are insertion-ordered, so iteration and serialization are
//! deterministic. Deleting objects unlinks them from every collection in the
//! state; it never cascades to other objects.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Pos, Result, UmtError};
use crate::lexer::{Cursor, Tok};
use crate::metamodel::{FeatureRef, MetamodelSet, Multiplicity, ValueType};

/// Opaque object identity. Never reused within a state, even after deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObjectId(u32);

impl ObjectId {
    pub fn index(&self) -> u32 {
        self.0
    }
}

/// Runtime values: scalars, object references and collections.
///
/// A collection carries an `ordered` flag. Unordered collections compare
/// equal under permutation and are kept duplicate-free; ordered collections
/// compare positionally. Element insertion order is preserved either way, so
/// serialization stays deterministic.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Str(String),
    Ref(ObjectId),
    Coll(Vec<Value>, bool),
}

impl Value {
    pub fn empty_set() -> Value {
        Value::Coll(Vec::new(), false)
    }

    /// Build an unordered collection, dropping duplicates.
    pub fn set(elems: Vec<Value>) -> Value {
        let mut out: Vec<Value> = Vec::with_capacity(elems.len());
        for e in elems {
            if !out.iter().any(|x| x == &e) {
                out.push(e);
            }
        }
        Value::Coll(out, false)
    }

    pub fn seq(elems: Vec<Value>) -> Value {
        Value::Coll(elems, true)
    }

    pub fn is_coll(&self) -> bool {
        matches!(self, Value::Coll(..))
    }

    pub fn as_coll(&self) -> Option<(&[Value], bool)> {
        match self {
            Value::Coll(v, o) => Some((v, *o)),
            _ => None,
        }
    }

    /// Treat scalars as singleton unordered collections.
    pub fn coerce_coll(&self) -> (Vec<Value>, bool) {
        match self {
            Value::Coll(v, o) => (v.clone(), *o),
            other => (vec![other.clone()], false),
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Str(_) => "String",
            Value::Ref(_) => "object",
            Value::Coll(..) => "collection",
        }
    }

    /// Set union. Scalars coerce to singletons. Only when both operands are
    /// ordered does the result stay an ordered concatenation; otherwise it
    /// is an unordered, duplicate-free collection.
    pub fn set_union(&self, other: &Value) -> Value {
        let (ls, lo) = self.coerce_coll();
        let (rs, ro) = other.coerce_coll();
        if lo && ro {
            let mut out = ls;
            out.extend(rs);
            Value::Coll(out, true)
        } else {
            let mut out: Vec<Value> = Vec::with_capacity(ls.len() + rs.len());
            for m in ls.into_iter().chain(rs) {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
            Value::Coll(out, false)
        }
    }

    /// Set subtraction; keeps the left operand's ordering.
    pub fn set_minus(&self, other: &Value) -> Value {
        let (ls, lo) = self.coerce_coll();
        let (rs, _) = other.coerce_coll();
        Value::Coll(ls.into_iter().filter(|m| !rs.contains(m)).collect(), lo)
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Ref(a), Value::Ref(b)) => a == b,
            (Value::Coll(xs, xo), Value::Coll(ys, yo)) => {
                if *xo && *yo {
                    xs == ys
                } else {
                    // Set comparison: mutual inclusion (both sides are small).
                    xs.iter().all(|x| ys.contains(x)) && ys.iter().all(|y| xs.contains(y))
                }
            }
            _ => false,
        }
    }
}

impl Eq for Value {}

#[derive(Debug, Clone)]
struct ObjectData {
    entity: String,
    label: String,
    /// feature name -> value; ends are always present, attributes only once set.
    slots: HashMap<String, Value>,
}

/// A mutable object model tied to the metamodel set it conforms to.
#[derive(Debug, Clone)]
pub struct ModelState {
    mm: Arc<MetamodelSet>,
    objects: HashMap<ObjectId, ObjectData>,
    /// entity name -> insertion-ordered extent (includes subtype instances).
    extents: HashMap<String, Vec<ObjectId>>,
    labels: HashMap<String, ObjectId>,
    /// (key-declaring entity, key value) -> owner.
    key_index: HashMap<(String, String), ObjectId>,
    next_id: u32,
    fresh_counter: u32,
}

/// A frozen, independent copy of a [`ModelState`]. Immutable by construction:
/// only shared access to the underlying state is exposed.
#[derive(Debug, Clone)]
pub struct Snapshot(ModelState);

impl Snapshot {
    pub fn state(&self) -> &ModelState {
        &self.0
    }
}

impl ModelState {
    pub fn new(mm: Arc<MetamodelSet>) -> ModelState {
        ModelState {
            mm,
            objects: HashMap::new(),
            extents: HashMap::new(),
            labels: HashMap::new(),
            key_index: HashMap::new(),
            next_id: 0,
            fresh_counter: 0,
        }
    }

    pub fn metamodels(&self) -> &MetamodelSet {
        &self.mm
    }

    pub fn metamodels_arc(&self) -> Arc<MetamodelSet> {
        Arc::clone(&self.mm)
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.objects.contains_key(&id)
    }

    pub fn entity_of(&self, id: ObjectId) -> Result<&str> {
        self.objects
            .get(&id)
            .map(|o| o.entity.as_str())
            .ok_or_else(|| UmtError::runtime(format!("unknown object id {}", id.0)))
    }

    pub fn label_of(&self, id: ObjectId) -> &str {
        self.objects
            .get(&id)
            .map(|o| o.label.as_str())
            .unwrap_or("<deleted>")
    }

    pub fn lookup_label(&self, label: &str) -> Option<ObjectId> {
        self.labels.get(label).copied()
    }

    /// Insertion-ordered extent of an entity (subtype instances included).
    pub fn extent(&self, entity: &str) -> &[ObjectId] {
        self.extents
            .get(entity)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// All live objects in creation order.
    pub fn all_objects(&self) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = self.objects.keys().copied().collect();
        ids.sort();
        ids
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    /// Create a fresh instance of a concrete entity with a generated label.
    pub fn create(&mut self, entity: &str) -> Result<ObjectId> {
        let label = self.fresh_label(entity);
        self.create_labeled(entity, &label)
    }

    /// Create a fresh instance with the given label. End slots start out as
    /// empty collections; attributes stay unset until assigned.
    pub fn create_labeled(&mut self, entity: &str, label: &str) -> Result<ObjectId> {
        let decl = self.mm.entity_checked(entity)?;
        if decl.is_abstract {
            return Err(UmtError::runtime(format!(
                "cannot instantiate abstract entity `{entity}`"
            )));
        }
        if self.labels.contains_key(label) {
            return Err(UmtError::runtime(format!(
                "duplicate object name `{label}`"
            )));
        }
        let id = ObjectId(self.next_id);
        self.next_id += 1;
        let mut slots = HashMap::new();
        for anc in self.mm.ancestry(entity) {
            for end in &anc.ends {
                slots.insert(end.name.clone(), Value::Coll(Vec::new(), end.ordered));
            }
        }
        self.objects.insert(
            id,
            ObjectData {
                entity: entity.to_string(),
                label: label.to_string(),
                slots,
            },
        );
        for anc in self.mm.ancestry(entity) {
            self.extents.entry(anc.name.clone()).or_default().push(id);
        }
        self.labels.insert(label.to_string(), id);
        Ok(id)
    }

    fn fresh_label(&mut self, entity: &str) -> String {
        loop {
            self.fresh_counter += 1;
            let label = format!("{}{}", entity.to_lowercase(), self.fresh_counter);
            if !self.labels.contains_key(&label) {
                return label;
            }
        }
    }

    /// Reset the fresh-label counter (one counter per engine run).
    pub fn reset_fresh_counter(&mut self) {
        self.fresh_counter = 0;
    }

    /// Raw slot access; `None` for unset attributes.
    pub fn slot(&self, id: ObjectId, feature: &str) -> Option<&Value> {
        self.objects.get(&id).and_then(|o| o.slots.get(feature))
    }

    /// Read a feature with total semantics: unset String reads as `""`,
    /// unset Int as `0`. End slots always exist.
    pub fn read_feature(&self, id: ObjectId, feature: &str) -> Result<Value> {
        let entity = self.entity_of(id)?.to_string();
        let fref = self.mm.lookup_feature(&entity, feature)?.ok_or_else(|| {
            UmtError::runtime(format!("entity `{entity}` has no feature `{feature}`"))
        })?;
        if let Some(v) = self.slot(id, feature) {
            return Ok(v.clone());
        }
        match fref {
            FeatureRef::Attr { attr, .. } => Ok(match attr.value_type {
                ValueType::Str => Value::Str(String::new()),
                ValueType::Int => Value::Int(0),
            }),
            FeatureRef::End { end, .. } => Ok(Value::Coll(Vec::new(), end.ordered)),
        }
    }

    /// Assign an attribute, keeping the key index consistent. Duplicate key
    /// values within the declaring entity's extent are rejected.
    pub fn set_attr(&mut self, id: ObjectId, feature: &str, value: Value) -> Result<()> {
        let entity = self.entity_of(id)?.to_string();
        let fref = self.mm.lookup_feature(&entity, feature)?.ok_or_else(|| {
            UmtError::runtime(format!("entity `{entity}` has no feature `{feature}`"))
        })?;
        let FeatureRef::Attr { decl, attr } = fref else {
            return Err(UmtError::runtime(format!(
                "`{entity}.{feature}` is an association end; use membership statements to populate it"
            )));
        };
        match (attr.value_type, &value) {
            (ValueType::Str, Value::Str(_)) | (ValueType::Int, Value::Int(_)) => {}
            _ => {
                return Err(UmtError::runtime(format!(
                    "type mismatch assigning `{entity}.{feature}`: expected {}, found {}",
                    attr.value_type,
                    value.type_name()
                )));
            }
        }
        if attr.is_key {
            let decl = decl.to_string();
            let Value::Str(new_key) = &value else {
                unreachable!()
            };
            if let Some(&holder) = self.key_index.get(&(decl.clone(), new_key.clone())) {
                if holder != id {
                    return Err(UmtError::runtime(format!(
                        "duplicate key `{new_key}` for `{decl}` (held by `{}`)",
                        self.label_of(holder)
                    )));
                }
            }
            if let Some(Value::Str(old)) = self.slot(id, feature).cloned() {
                self.key_index.remove(&(decl.clone(), old));
            }
            self.key_index.insert((decl, new_key.clone()), id);
        }
        self.objects
            .get_mut(&id)
            .unwrap()
            .slots
            .insert(feature.to_string(), value);
        Ok(())
    }

    /// Replace the whole collection of an association end. Scalar refs are
    /// wrapped as singletons. Checks member types and opt multiplicity.
    pub fn set_end(&mut self, id: ObjectId, feature: &str, value: Value) -> Result<()> {
        let entity = self.entity_of(id)?.to_string();
        let fref = self.mm.lookup_feature(&entity, feature)?.ok_or_else(|| {
            UmtError::runtime(format!("entity `{entity}` has no feature `{feature}`"))
        })?;
        let FeatureRef::End { end, .. } = fref else {
            return Err(UmtError::runtime(format!(
                "`{entity}.{feature}` is an attribute, not an end"
            )));
        };
        let end = end.clone();
        let members: Vec<Value> = match value {
            Value::Ref(r) => vec![Value::Ref(r)],
            Value::Coll(v, _) => v,
            other => {
                return Err(UmtError::runtime(format!(
                    "type mismatch assigning end `{entity}.{feature}`: found {}",
                    other.type_name()
                )));
            }
        };
        let mut coll = Vec::with_capacity(members.len());
        for m in members {
            let Value::Ref(r) = m else {
                return Err(UmtError::runtime(format!(
                    "end `{entity}.{feature}` can only hold object references"
                )));
            };
            self.check_member(&entity, feature, &end.target, r)?;
            if end.ordered || !coll.contains(&Value::Ref(r)) {
                coll.push(Value::Ref(r));
            }
        }
        if end.multiplicity == Multiplicity::Opt && coll.len() > 1 {
            return Err(UmtError::runtime(format!(
                "end `{entity}.{feature}` has multiplicity 0..1 but got {} members",
                coll.len()
            )));
        }
        self.objects
            .get_mut(&id)
            .unwrap()
            .slots
            .insert(feature.to_string(), Value::Coll(coll, end.ordered));
        Ok(())
    }

    fn check_member(&self, entity: &str, feature: &str, target: &str, r: ObjectId) -> Result<()> {
        let ment = self.entity_of(r)?;
        if !self.mm.is_subtype(ment, target) {
            return Err(UmtError::runtime(format!(
                "`{}` is a {ment}, not a {target}, so it cannot appear in `{entity}.{feature}`",
                self.label_of(r)
            )));
        }
        Ok(())
    }

    /// Add one member to an association end. Idempotent for unordered ends;
    /// ordered ends append. Returns whether the collection changed.
    pub fn insert_member(
        &mut self,
        owner: ObjectId,
        feature: &str,
        member: ObjectId,
    ) -> Result<bool> {
        let entity = self.entity_of(owner)?.to_string();
        let fref = self.mm.lookup_feature(&entity, feature)?.ok_or_else(|| {
            UmtError::runtime(format!("entity `{entity}` has no feature `{feature}`"))
        })?;
        let FeatureRef::End { end, .. } = fref else {
            return Err(UmtError::runtime(format!(
                "`{entity}.{feature}` is an attribute; membership statements need an association end"
            )));
        };
        let end = end.clone();
        self.check_member(&entity, feature, &end.target, member)?;
        let slot = self
            .objects
            .get_mut(&owner)
            .unwrap()
            .slots
            .entry(feature.to_string())
            .or_insert_with(|| Value::Coll(Vec::new(), end.ordered));
        let Value::Coll(coll, _) = slot else {
            unreachable!()
        };
        if !end.ordered && coll.contains(&Value::Ref(member)) {
            return Ok(false);
        }
        if end.multiplicity == Multiplicity::Opt && !coll.is_empty() {
            return Err(UmtError::runtime(format!(
                "end `{entity}.{feature}` has multiplicity 0..1 and is already occupied"
            )));
        }
        coll.push(Value::Ref(member));
        Ok(true)
    }

    /// Delete objects: remove them from every extent, drop their slots and
    /// key entries, and unlink every reference to them from collections
    /// anywhere in the state. Unlink only, no transitive deletion.
    pub fn delete(&mut self, targets: &[ObjectId]) -> Result<()> {
        for &t in targets {
            if !self.objects.contains_key(&t) {
                return Err(UmtError::runtime(format!(
                    "cannot delete unknown object id {}",
                    t.0
                )));
            }
        }
        if targets.is_empty() {
            return Ok(());
        }
        for &t in targets {
            let data = self.objects.remove(&t).unwrap();
            for anc in self.mm.ancestry(&data.entity) {
                if let Some(ext) = self.extents.get_mut(&anc.name) {
                    ext.retain(|&id| id != t);
                }
            }
            self.labels.remove(&data.label);
        }
        self.key_index.retain(|_, id| !targets.contains(id));
        for data in self.objects.values_mut() {
            for v in data.slots.values_mut() {
                if let Value::Coll(coll, _) = v {
                    coll.retain(|m| !matches!(m, Value::Ref(r) if targets.contains(r)));
                }
            }
        }
        Ok(())
    }

    /// All extent members of `entity` whose key value lies in `keys`.
    /// Missing keys contribute nothing. The result preserves key order.
    pub fn key_lookup(&self, entity: &str, keys: &[String]) -> Result<Vec<ObjectId>> {
        let (decl, _) = self
            .mm
            .key_attribute(entity)?
            .ok_or_else(|| UmtError::runtime(format!("entity `{entity}` has no key attribute")))?;
        let decl = decl.to_string();
        let mut out = Vec::new();
        for k in keys {
            if let Some(&id) = self.key_index.get(&(decl.clone(), k.clone())) {
                if self.mm.is_subtype(self.entity_of(id)?, entity) && !out.contains(&id) {
                    out.push(id);
                }
            }
        }
        Ok(out)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(self.clone())
    }

    /// Parse the line-oriented model format against the given metamodels.
    pub fn parse(text: &str, mm: Arc<MetamodelSet>) -> Result<ModelState> {
        let mut state = ModelState::new(mm);
        let mut cur = Cursor::from_source(text)?;
        while !cur.at_end() {
            let pos = cur.pos();
            let (name, _) = cur.expect_ident()?;
            match cur.peek() {
                Some(Tok::Colon) => {
                    cur.advance();
                    let (rhs, rpos) = cur.expect_ident()?;
                    if cur.eat(&Tok::Dot) {
                        // membership: name : rhs.role
                        let (role, _) = cur.expect_ident()?;
                        let member = state.lookup_label(&name).ok_or_else(|| {
                            UmtError::syntax(pos, format!("unknown object `{name}`"))
                        })?;
                        let owner = state.lookup_label(&rhs).ok_or_else(|| {
                            UmtError::syntax(rpos, format!("unknown object `{rhs}`"))
                        })?;
                        state
                            .insert_member(owner, &role, member)
                            .map_err(|e| at_pos(pos, e))?;
                    } else {
                        // declaration: name : Entity
                        state
                            .create_labeled(&rhs, &name)
                            .map_err(|e| at_pos(pos, e))?;
                    }
                }
                Some(Tok::Dot) => {
                    cur.advance();
                    let (attr, _) = cur.expect_ident()?;
                    cur.expect(&Tok::Eq)?;
                    let vpos = cur.pos();
                    let value = match cur.advance().map(|t| t.tok) {
                        Some(Tok::Str(s)) => Value::Str(s),
                        Some(Tok::Int(n)) => Value::Int(n),
                        other => {
                            return Err(UmtError::syntax(
                                vpos,
                                format!(
                                    "expected string or integer literal, found {}",
                                    other
                                        .map(|t| t.to_string())
                                        .unwrap_or_else(|| "end of input".into())
                                ),
                            ));
                        }
                    };
                    let id = state
                        .lookup_label(&name)
                        .ok_or_else(|| UmtError::syntax(pos, format!("unknown object `{name}`")))?;
                    state
                        .set_attr(id, &attr, value)
                        .map_err(|e| at_pos(pos, e))?;
                }
                _ => {
                    return Err(UmtError::syntax(
                        cur.pos(),
                        "expected `:` or `.` after identifier".to_string(),
                    ));
                }
            }
        }
        Ok(state)
    }

    /// Serialize to the text format: declarations and attribute statements in
    /// creation order, then membership statements owner by owner. The output
    /// reparses to an isomorphic state.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let order = self.all_objects();
        for &id in &order {
            let data = &self.objects[&id];
            out.push_str(&format!("{} : {}\n", data.label, data.entity));
            // attributes in declared order, inherited (root-most) first
            let ancestry = self.mm.ancestry(&data.entity);
            for anc in ancestry.iter().rev() {
                for a in &anc.attributes {
                    if let Some(v) = data.slots.get(&a.name) {
                        match v {
                            Value::Str(s) => {
                                out.push_str(&format!("{}.{} = \"{}\"\n", data.label, a.name, s))
                            }
                            Value::Int(n) => {
                                out.push_str(&format!("{}.{} = {}\n", data.label, a.name, n))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
        for &id in &order {
            let data = &self.objects[&id];
            let ancestry = self.mm.ancestry(&data.entity);
            for anc in ancestry.iter().rev() {
                for end in &anc.ends {
                    if let Some(Value::Coll(coll, _)) = data.slots.get(&end.name) {
                        for m in coll {
                            if let Value::Ref(r) = m {
                                out.push_str(&format!(
                                    "{} : {}.{}\n",
                                    self.label_of(*r),
                                    data.label,
                                    end.name
                                ));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Structural equality up to object identity: matching per-entity extent
    /// sizes, and equal labels, attributes and links under the bijection that
    /// pairs objects by position in their concrete entity's extent.
    pub fn isomorphic_to(&self, other: &ModelState) -> bool {
        if self.objects.len() != other.objects.len() {
            return false;
        }
        let mut map: HashMap<ObjectId, ObjectId> = HashMap::new();
        for e in self.mm.entities() {
            let a = self.extent(&e.name);
            let b = other.extent(&e.name);
            if a.len() != b.len() {
                return false;
            }
            for (&x, &y) in a.iter().zip(b.iter()) {
                if self.objects[&x].entity == e.name {
                    map.insert(x, y);
                }
            }
        }
        if map.len() != self.objects.len() {
            return false;
        }
        for (&id, data) in &self.objects {
            let oid = map[&id];
            let Some(odata) = other.objects.get(&oid) else {
                return false;
            };
            if data.entity != odata.entity || data.label != odata.label {
                return false;
            }
            // compare slots; unset attributes read as defaults on both sides
            let ancestry = self.mm.ancestry(&data.entity);
            for anc in &ancestry {
                for a in &anc.attributes {
                    let va = self.read_feature(id, &a.name).unwrap();
                    let vb = other.read_feature(oid, &a.name).unwrap();
                    if va != vb {
                        return false;
                    }
                }
                for end in &anc.ends {
                    let Ok(Value::Coll(ca, _)) = self.read_feature(id, &end.name) else {
                        return false;
                    };
                    let Ok(Value::Coll(cb, _)) = other.read_feature(oid, &end.name) else {
                        return false;
                    };
                    if ca.len() != cb.len() {
                        return false;
                    }
                    for (ma, mb) in ca.iter().zip(cb.iter()) {
                        match (ma, mb) {
                            (Value::Ref(ra), Value::Ref(rb)) => {
                                if map.get(ra) != Some(rb) {
                                    return false;
                                }
                            }
                            _ => return false,
                        }
                    }
                }
            }
        }
        true
    }
}

fn at_pos(pos: Pos, err: UmtError) -> UmtError {
    match err {
        UmtError::Runtime(msg) => UmtError::Syntax { pos, message: msg },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::Metamodel;

    pub(crate) const GRAPH_MM: &str = "\
entity Graph {
  nodes : set(Node) ;
  edges : set(Edge) ;
}
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
";

    pub(crate) const SINGLE_EDGE_MODEL: &str = "\
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

    const MIG2_MM: &str = "\
abstract entity ModelElement2 {
  id2 : String (key) ;
  text : String ;
}
entity Node2 extends ModelElement2 { }
entity Edge2 extends ModelElement2 { src2 : opt(Node2) ; trg2 : opt(Node2) ; }
entity Graph2 extends ModelElement2 { gcs : set(ModelElement2) ; }
";

    fn graph_mm() -> Arc<MetamodelSet> {
        Arc::new(MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap()))
    }

    fn mig2_mm() -> Arc<MetamodelSet> {
        Arc::new(MetamodelSet::single(Metamodel::parse(MIG2_MM).unwrap()))
    }

    fn single_edge_state() -> ModelState {
        ModelState::parse(SINGLE_EDGE_MODEL, graph_mm()).unwrap()
    }

    #[test]
    fn parses_single_edge_model() {
        let s = single_edge_state();
        assert_eq!(s.extent("Graph").len(), 1);
        assert_eq!(s.extent("Node").len(), 2);
        assert_eq!(s.extent("Edge").len(), 1);
        let e = s.lookup_label("e").unwrap();
        let n1 = s.lookup_label("n1").unwrap();
        let n2 = s.lookup_label("n2").unwrap();
        assert_eq!(
            s.read_feature(e, "src").unwrap(),
            Value::set(vec![Value::Ref(n1)])
        );
        assert_eq!(
            s.read_feature(e, "trg").unwrap(),
            Value::set(vec![Value::Ref(n2)])
        );
    }

    #[test]
    fn parses_empty_model() {
        let s = ModelState::parse("", graph_mm()).unwrap();
        assert_eq!(s.object_count(), 0);
    }

    #[test]
    fn rejects_abstract_instantiation() {
        let err = ModelState::parse("x : ModelElement2\n", mig2_mm()).unwrap_err();
        assert!(err.to_string().contains("abstract"));
    }

    #[test]
    fn rejects_forward_reference() {
        let src = "n1 : g.nodes\ng : Graph\nn1 : Node\n";
        let err = ModelState::parse(src, graph_mm()).unwrap_err();
        assert!(err.to_string().contains("unknown object"));
    }

    #[test]
    fn rejects_opt_end_overfill() {
        let src = "g : Graph\nn1 : Node\nn2 : Node\ne : Edge\nn1 : e.src\nn2 : e.src\n";
        let err = ModelState::parse(src, graph_mm()).unwrap_err();
        assert!(err.to_string().contains("0..1"));
    }

    #[test]
    fn rejects_attribute_type_mismatch() {
        let err = ModelState::parse("n : Node\nn.name = 5\n", graph_mm()).unwrap_err();
        assert!(err.to_string().contains("type mismatch"));
    }

    #[test]
    fn membership_form_rejected_for_attributes() {
        // the scalar assignment form is reserved for attributes, and vice versa
        let err = ModelState::parse("g : Graph\ng.nodes = \"x\"\n", graph_mm()).unwrap_err();
        assert!(err.to_string().contains("association end"));
    }

    #[test]
    fn create_appears_in_ancestor_extents() {
        let mut s = ModelState::new(mig2_mm());
        let id = s.create("Node2").unwrap();
        assert_eq!(s.extent("Node2"), &[id]);
        assert_eq!(s.extent("ModelElement2"), &[id]);
    }

    #[test]
    fn create_gives_distinct_ids_and_labels() {
        let mut s = ModelState::new(graph_mm());
        let a = s.create("Node").unwrap();
        let b = s.create("Node").unwrap();
        assert_ne!(a, b);
        assert_ne!(s.label_of(a), s.label_of(b));
        assert_eq!(s.label_of(a), "node1");
    }

    #[test]
    fn delete_unlinks_dangling_edge() {
        let mut s = single_edge_state();
        let n1 = s.lookup_label("n1").unwrap();
        s.delete(&[n1]).unwrap();
        let e = s.lookup_label("e").unwrap();
        assert_eq!(s.read_feature(e, "src").unwrap(), Value::empty_set());
        assert_eq!(s.extent("Node").len(), 1);
        // no reference to the deleted object survives anywhere
        for id in s.all_objects() {
            for anc in s.metamodels().ancestry(s.entity_of(id).unwrap()).iter() {
                for end in &anc.ends {
                    if let Some(Value::Coll(coll, _)) = s.slot(id, &end.name) {
                        assert!(!coll.contains(&Value::Ref(n1)));
                    }
                }
            }
        }
    }

    #[test]
    fn delete_of_nothing_is_noop() {
        let mut s = single_edge_state();
        let before = s.serialize();
        s.delete(&[]).unwrap();
        assert_eq!(before, s.serialize());
    }

    #[test]
    fn delete_edge_leaves_nodes() {
        let mut s = single_edge_state();
        let e = s.lookup_label("e").unwrap();
        let g = s.lookup_label("g").unwrap();
        s.delete(&[e]).unwrap();
        assert_eq!(s.read_feature(g, "edges").unwrap(), Value::empty_set());
        assert_eq!(s.extent("Node").len(), 2);
    }

    #[test]
    fn key_lookup_finds_by_inherited_key() {
        let mut s = ModelState::new(mig2_mm());
        let n = s.create("Node2").unwrap();
        s.set_attr(n, "id2", Value::Str("n1".into())).unwrap();
        assert_eq!(s.key_lookup("Node2", &["n1".into()]).unwrap(), vec![n]);
        assert_eq!(s.key_lookup("Node2", &[]).unwrap(), Vec::<ObjectId>::new());
        assert_eq!(
            s.key_lookup("Node2", &["absent".into()]).unwrap(),
            Vec::<ObjectId>::new()
        );
        // lookup through the abstract root also works
        assert_eq!(
            s.key_lookup("ModelElement2", &["n1".into()]).unwrap(),
            vec![n]
        );
        // an Edge2 key is not returned for a Node2 lookup
        let e = s.create("Edge2").unwrap();
        s.set_attr(e, "id2", Value::Str("e1".into())).unwrap();
        assert_eq!(
            s.key_lookup("Node2", &["e1".into()]).unwrap(),
            Vec::<ObjectId>::new()
        );
    }

    #[test]
    fn key_lookup_requires_key_attribute() {
        let s = single_edge_state();
        assert!(s.key_lookup("Node", &["n1".into()]).is_err());
    }

    #[test]
    fn duplicate_key_is_rejected() {
        let mut s = ModelState::new(mig2_mm());
        let a = s.create("Node2").unwrap();
        let b = s.create("Node2").unwrap();
        s.set_attr(a, "id2", Value::Str("k".into())).unwrap();
        let err = s.set_attr(b, "id2", Value::Str("k".into())).unwrap_err();
        assert!(err.to_string().contains("duplicate key"));
        // reassigning the same object is fine
        s.set_attr(a, "id2", Value::Str("k2".into())).unwrap();
        s.set_attr(b, "id2", Value::Str("k".into())).unwrap();
    }

    #[test]
    fn snapshot_is_unaffected_by_mutation() {
        let mut s = single_edge_state();
        let snap = s.snapshot();
        let e = s.lookup_label("e").unwrap();
        let n1 = s.lookup_label("n1").unwrap();
        let n2 = s.lookup_label("n2").unwrap();
        s.set_end(e, "src", Value::Ref(n2)).unwrap();
        s.set_end(e, "trg", Value::Ref(n1)).unwrap();
        assert_eq!(
            snap.state().read_feature(e, "src").unwrap(),
            Value::set(vec![Value::Ref(n1)])
        );
        assert_eq!(
            s.read_feature(e, "src").unwrap(),
            Value::set(vec![Value::Ref(n2)])
        );
    }

    #[test]
    fn snapshot_of_empty_state_is_empty() {
        let s = ModelState::new(graph_mm());
        assert_eq!(s.snapshot().state().object_count(), 0);
    }

    #[test]
    fn snapshot_is_isomorphic_when_unmutated() {
        let s = single_edge_state();
        assert!(s.isomorphic_to(s.snapshot().state()));
    }

    #[test]
    fn serialize_round_trips_single_edge_model() {
        let s = single_edge_state();
        let text = s.serialize();
        assert_eq!(text.lines().count(), 11);
        let reparsed = ModelState::parse(&text, graph_mm()).unwrap();
        assert!(s.isomorphic_to(&reparsed));
    }

    #[test]
    fn serialize_empty_state() {
        let s = ModelState::new(graph_mm());
        assert_eq!(s.serialize(), "");
    }

    #[test]
    fn unordered_collections_compare_under_permutation() {
        let a = Value::set(vec![Value::Int(1), Value::Int(2)]);
        let b = Value::set(vec![Value::Int(2), Value::Int(1)]);
        assert_eq!(a, b);
        let c = Value::seq(vec![Value::Int(1), Value::Int(2)]);
        let d = Value::seq(vec![Value::Int(2), Value::Int(1)]);
        assert_ne!(c, d);
    }

    #[test]
    fn extent_containment_holds_after_operations() {
        let mut s = ModelState::new(mig2_mm());
        let a = s.create("Node2").unwrap();
        let g = s.create("Graph2").unwrap();
        s.insert_member(g, "gcs", a).unwrap();
        s.delete(&[a]).unwrap();
        for id in s.all_objects() {
            let entity = s.entity_of(id).unwrap().to_string();
            for anc in s.metamodels().ancestry(&entity) {
                assert!(s.extent(&anc.name).contains(&id));
            }
        }
        assert_eq!(s.extent("ModelElement2").len(), 1);
    }

    #[test]
    fn seq_ends_preserve_order_and_duplicates() {
        let mm = Arc::new(MetamodelSet::single(
            Metamodel::parse("entity Log { entries : seq(Entry) ; }\nentity Entry { }").unwrap(),
        ));
        let mut s = ModelState::new(Arc::clone(&mm));
        let log = s.create_labeled("Log", "log").unwrap();
        let a = s.create_labeled("Entry", "a").unwrap();
        let b = s.create_labeled("Entry", "b").unwrap();
        s.insert_member(log, "entries", b).unwrap();
        s.insert_member(log, "entries", a).unwrap();
        s.insert_member(log, "entries", b).unwrap();
        assert_eq!(
            s.read_feature(log, "entries").unwrap(),
            Value::seq(vec![Value::Ref(b), Value::Ref(a), Value::Ref(b)])
        );
        let reparsed = ModelState::parse(&s.serialize(), mm).unwrap();
        assert!(s.isomorphic_to(&reparsed));
    }
}
