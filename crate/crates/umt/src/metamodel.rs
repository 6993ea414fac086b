//! Metamodel definitions: entities with single inheritance, typed attributes
//! (optionally key-designated) and association ends with multiplicity.
//!
//! The textual grammar is:
//!
//! ```text
//! [abstract] entity Name [extends Parent] {
//!     ident : String [(key)] ;
//!     ident : Int ;
//!     ident : set(Entity) ;     -- many, unordered
//!     ident : opt(Entity) ;     -- 0..1
//!     ident : seq(Entity) ;     -- many, ordered
//! }
//! ```
//!
//! Restrictions checked by [`MetamodelSet::validate`]: no multiple inheritance
//! (enforced by the grammar), all non-leaf entities abstract, feature names
//! unique per entity including inherited ones, at most one (string-valued)
//! key attribute per inherited feature set.

use std::collections::{HashMap, HashSet};

use crate::error::{Diagnostic, Result, UmtError};
use crate::lexer::{Cursor, Tok};

/// Scalar attribute types. The engine's case studies only need these two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    Str,
    Int,
}

impl std::fmt::Display for ValueType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValueType::Str => write!(f, "String"),
            ValueType::Int => write!(f, "Int"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attribute {
    pub name: String,
    pub value_type: ValueType,
    pub is_key: bool,
}

/// Association-end multiplicity: `opt` is 0..1, `many` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Opt,
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationEnd {
    pub name: String,
    pub target: String,
    pub multiplicity: Multiplicity,
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub name: String,
    pub is_abstract: bool,
    pub parent: Option<String>,
    pub attributes: Vec<Attribute>,
    pub ends: Vec<AssociationEnd>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Metamodel {
    pub name: String,
    pub entities: Vec<Entity>,
}

/// Either kind of feature, with the entity that declares it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureRef<'a> {
    Attr {
        decl: &'a str,
        attr: &'a Attribute,
    },
    End {
        decl: &'a str,
        end: &'a AssociationEnd,
    },
}

impl<'a> FeatureRef<'a> {
    pub fn decl_entity(&self) -> &'a str {
        match self {
            FeatureRef::Attr { decl, .. } | FeatureRef::End { decl, .. } => decl,
        }
    }

    pub fn name(&self) -> &'a str {
        match self {
            FeatureRef::Attr { attr, .. } => &attr.name,
            FeatureRef::End { end, .. } => &end.name,
        }
    }
}

impl Metamodel {
    /// Parse the textual format. Performs no validation beyond syntax, except
    /// that duplicate entity names are rejected outright.
    pub fn parse(text: &str) -> Result<Metamodel> {
        let mut cur = Cursor::from_source(text)?;
        let mut entities: Vec<Entity> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        while !cur.at_end() {
            let is_abstract = cur.eat_kw("abstract");
            cur.expect_kw("entity")?;
            let (name, npos) = cur.expect_ident()?;
            if !seen.insert(name.clone()) {
                return Err(UmtError::syntax(
                    npos,
                    format!("duplicate entity name `{name}`"),
                ));
            }
            let parent = if cur.eat_kw("extends") {
                Some(cur.expect_ident()?.0)
            } else {
                None
            };
            cur.expect(&Tok::LBrace)?;
            let mut attributes = Vec::new();
            let mut ends = Vec::new();
            let mut feature_names: HashSet<String> = HashSet::new();
            while !cur.eat(&Tok::RBrace) {
                let (fname, fpos) = cur.expect_ident()?;
                if !feature_names.insert(fname.clone()) {
                    return Err(UmtError::syntax(
                        fpos,
                        format!("duplicate feature `{fname}` on entity `{name}`"),
                    ));
                }
                cur.expect(&Tok::Colon)?;
                let (kind, kpos) = cur.expect_ident()?;
                match kind.as_str() {
                    "String" => {
                        let is_key = if cur.eat(&Tok::LParen) {
                            cur.expect_kw("key")?;
                            cur.expect(&Tok::RParen)?;
                            true
                        } else {
                            false
                        };
                        attributes.push(Attribute {
                            name: fname,
                            value_type: ValueType::Str,
                            is_key,
                        });
                    }
                    "Int" => {
                        attributes.push(Attribute {
                            name: fname,
                            value_type: ValueType::Int,
                            is_key: false,
                        });
                    }
                    "set" | "opt" | "seq" => {
                        cur.expect(&Tok::LParen)?;
                        let (target, _) = cur.expect_ident()?;
                        cur.expect(&Tok::RParen)?;
                        let (multiplicity, ordered) = match kind.as_str() {
                            "set" => (Multiplicity::Many, false),
                            "opt" => (Multiplicity::Opt, false),
                            _ => (Multiplicity::Many, true),
                        };
                        ends.push(AssociationEnd {
                            name: fname,
                            target,
                            multiplicity,
                            ordered,
                        });
                    }
                    other => {
                        return Err(UmtError::syntax(
                            kpos,
                            format!("expected String, Int, set(..), opt(..) or seq(..), found `{other}`"),
                        ));
                    }
                }
                cur.expect(&Tok::Semi)?;
            }
            entities.push(Entity {
                name,
                is_abstract,
                parent,
                attributes,
                ends,
            });
        }
        Ok(Metamodel {
            name: String::new(),
            entities,
        })
    }

    /// Render back to the textual format. `parse(to_text(mm))` is structurally
    /// equal to `mm` up to the metamodel name, which has no surface syntax.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entities {
            if e.is_abstract {
                out.push_str("abstract ");
            }
            out.push_str("entity ");
            out.push_str(&e.name);
            if let Some(p) = &e.parent {
                out.push_str(" extends ");
                out.push_str(p);
            }
            out.push_str(" {\n");
            for a in &e.attributes {
                let key = if a.is_key { " (key)" } else { "" };
                out.push_str(&format!("  {} : {}{} ;\n", a.name, a.value_type, key));
            }
            for end in &e.ends {
                let kind = match (end.multiplicity, end.ordered) {
                    (Multiplicity::Opt, _) => "opt",
                    (Multiplicity::Many, true) => "seq",
                    (Multiplicity::Many, false) => "set",
                };
                out.push_str(&format!("  {} : {}({}) ;\n", end.name, kind, end.target));
            }
            out.push_str("}\n");
        }
        out
    }
}

/// One or two metamodels loaded together (source and target language).
/// Entity names are global across the set.
#[derive(Debug, Clone, Default)]
pub struct MetamodelSet {
    pub metamodels: Vec<Metamodel>,
    index: HashMap<String, (usize, usize)>,
}

impl MetamodelSet {
    pub fn new(metamodels: Vec<Metamodel>) -> MetamodelSet {
        let mut index = HashMap::new();
        for (mi, mm) in metamodels.iter().enumerate() {
            for (ei, e) in mm.entities.iter().enumerate() {
                // First declaration wins; duplicates surface in validate().
                index.entry(e.name.clone()).or_insert((mi, ei));
            }
        }
        MetamodelSet { metamodels, index }
    }

    pub fn single(mm: Metamodel) -> MetamodelSet {
        MetamodelSet::new(vec![mm])
    }

    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.index
            .get(name)
            .map(|&(mi, ei)| &self.metamodels[mi].entities[ei])
    }

    pub fn entity_checked(&self, name: &str) -> Result<&Entity> {
        self.entity(name)
            .ok_or_else(|| UmtError::runtime(format!("unknown entity `{name}`")))
    }

    pub fn entities(&self) -> impl Iterator<Item = &Entity> {
        self.metamodels.iter().flat_map(|mm| mm.entities.iter())
    }

    /// The entity itself followed by its ancestors, nearest first.
    /// Stops if the parent chain is broken or cyclic.
    pub fn ancestry<'a>(&'a self, entity: &str) -> Vec<&'a Entity> {
        let mut out = Vec::new();
        let mut visited: HashSet<&str> = HashSet::new();
        let mut cur = self.entity(entity);
        while let Some(e) = cur {
            if !visited.insert(&e.name) {
                break;
            }
            out.push(e);
            cur = e.parent.as_deref().and_then(|p| self.entity(p));
        }
        out
    }

    /// `sub` equals `sup` or inherits from it (transitively).
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        self.ancestry(sub).iter().any(|e| e.name == sup)
    }

    /// Related in either direction of the inheritance hierarchy.
    pub fn comparable(&self, a: &str, b: &str) -> bool {
        self.is_subtype(a, b) || self.is_subtype(b, a)
    }

    pub fn has_children(&self, entity: &str) -> bool {
        self.entities().any(|e| e.parent.as_deref() == Some(entity))
    }

    /// Feature declared on the entity or the nearest ancestor.
    pub fn lookup_feature(&self, entity: &str, feature: &str) -> Result<Option<FeatureRef<'_>>> {
        self.entity_checked(entity)?;
        for e in self.ancestry(entity) {
            if let Some(a) = e.attributes.iter().find(|a| a.name == feature) {
                return Ok(Some(FeatureRef::Attr {
                    decl: &e.name,
                    attr: a,
                }));
            }
            if let Some(end) = e.ends.iter().find(|end| end.name == feature) {
                return Ok(Some(FeatureRef::End { decl: &e.name, end }));
            }
        }
        Ok(None)
    }

    /// The unique inherited key attribute of the entity, with its declaring
    /// entity, or `None` if the entity has no key.
    pub fn key_attribute(&self, entity: &str) -> Result<Option<(&str, &Attribute)>> {
        self.entity_checked(entity)?;
        for e in self.ancestry(entity) {
            if let Some(a) = e.attributes.iter().find(|a| a.is_key) {
                return Ok(Some((&e.name, a)));
            }
        }
        Ok(None)
    }

    /// Check every structural rule. Returns an empty collection iff the set is
    /// well-formed. Diagnostics are sorted, so the result is independent of
    /// declaration order.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let mut seen: HashSet<&str> = HashSet::new();
        for e in self.entities() {
            if !seen.insert(&e.name) {
                diags.push(Diagnostic {
                    rule: "duplicate-entity",
                    location: e.name.clone(),
                    message: format!("entity `{}` is declared more than once", e.name),
                });
            }
        }
        for mm in &self.metamodels {
            for e in &mm.entities {
                // inheritance stays within one language definition
                if let Some(p) = &e.parent {
                    if !mm.entities.iter().any(|other| &other.name == p) {
                        diags.push(Diagnostic {
                            rule: "unresolved-parent",
                            location: e.name.clone(),
                            message: format!(
                                "parent `{p}` of entity `{}` is not declared in the same metamodel",
                                e.name
                            ),
                        });
                    }
                }
            }
        }
        for e in self.entities() {
            // Walk the parent chain; report a cycle if we come back around.
            let mut visited: HashSet<&str> = HashSet::new();
            let mut cur: Option<&Entity> = Some(e);
            while let Some(c) = cur {
                if !visited.insert(&c.name) {
                    if c.name == e.name {
                        diags.push(Diagnostic {
                            rule: "inheritance-cycle",
                            location: e.name.clone(),
                            message: format!("entity `{}` inherits from itself", e.name),
                        });
                    }
                    break;
                }
                cur = c.parent.as_deref().and_then(|p| self.entity(p));
            }
            if !e.is_abstract && self.has_children(&e.name) {
                diags.push(Diagnostic {
                    rule: "non-leaf-abstract",
                    location: e.name.clone(),
                    message: format!("non-leaf entity `{}` must be abstract", e.name),
                });
            }
            for end in &e.ends {
                if self.entity(&end.target).is_none() {
                    diags.push(Diagnostic {
                        rule: "unresolved-end-target",
                        location: format!("{}.{}", e.name, end.name),
                        message: format!("end target `{}` is not declared", end.target),
                    });
                }
            }
            for a in &e.attributes {
                if a.is_key && a.value_type != ValueType::Str {
                    diags.push(Diagnostic {
                        rule: "key-not-string",
                        location: format!("{}.{}", e.name, a.name),
                        message: "key attributes must be String-valued".to_string(),
                    });
                }
            }
            // Inherited feature-set checks (skip if the chain is cyclic,
            // ancestry() already guards against looping).
            let ancestry = self.ancestry(&e.name);
            let mut names: HashSet<&str> = HashSet::new();
            let mut keys = 0usize;
            for anc in &ancestry {
                for a in &anc.attributes {
                    if !names.insert(&a.name) && anc.name != e.name {
                        diags.push(Diagnostic {
                            rule: "duplicate-feature",
                            location: format!("{}.{}", e.name, a.name),
                            message: format!(
                                "feature `{}` on `{}` collides with an inherited feature",
                                a.name, e.name
                            ),
                        });
                    }
                    if a.is_key {
                        keys += 1;
                    }
                }
                for end in &anc.ends {
                    if !names.insert(&end.name) && anc.name != e.name {
                        diags.push(Diagnostic {
                            rule: "duplicate-feature",
                            location: format!("{}.{}", e.name, end.name),
                            message: format!(
                                "feature `{}` on `{}` collides with an inherited feature",
                                end.name, e.name
                            ),
                        });
                    }
                }
            }
            if keys > 1 {
                diags.push(Diagnostic {
                    rule: "multiple-keys",
                    location: e.name.clone(),
                    message: format!("entity `{}` has more than one key attribute", e.name),
                });
            }
        }
        diags.sort();
        diags.dedup();
        diags
    }

    /// Shorthand: validate and convert findings into a hard error.
    pub fn validated(self) -> Result<MetamodelSet> {
        let diags = self.validate();
        if diags.is_empty() {
            Ok(self)
        } else {
            Err(UmtError::Invalid(diags))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const GRAPH_MM: &str = "\
entity Graph {
  nodes : set(Node) ;
  edges : set(Edge) ;
}
entity Node { name : String ; }
entity Edge { src : opt(Node) ; trg : opt(Node) ; }
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

    #[test]
    fn parses_graph_metamodel() {
        let mm = Metamodel::parse(GRAPH_MM).unwrap();
        assert_eq!(mm.entities.len(), 3);
        assert_eq!(mm.entities[0].name, "Graph");
        assert_eq!(mm.entities[0].ends.len(), 2);
        assert_eq!(mm.entities[2].ends[0].multiplicity, Multiplicity::Opt);
    }

    #[test]
    fn parses_empty_input() {
        let mm = Metamodel::parse("").unwrap();
        assert!(mm.entities.is_empty());
    }

    #[test]
    fn parses_migration_target() {
        let mm = Metamodel::parse(MIG2_MM).unwrap();
        assert_eq!(mm.entities.len(), 4);
        let with_parent = mm
            .entities
            .iter()
            .filter(|e| e.parent.as_deref() == Some("ModelElement2"))
            .count();
        assert_eq!(with_parent, 3);
        assert!(mm.entities[0].is_abstract);
    }

    #[test]
    fn duplicate_entity_is_a_parse_error() {
        let err = Metamodel::parse("entity A { }\nentity A { }").unwrap_err();
        assert!(err.to_string().contains("duplicate entity name"));
    }

    #[test]
    fn validate_accepts_graph_metamodel() {
        let set = MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap());
        assert!(set.validate().is_empty());
    }

    #[test]
    fn validate_flags_concrete_non_leaf() {
        let src = "entity A { }\nentity B extends A { }";
        let set = MetamodelSet::single(Metamodel::parse(src).unwrap());
        let diags = set.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, "non-leaf-abstract");
    }

    #[test]
    fn validate_flags_unresolved_end_target() {
        let src = "entity A { x : set(Missing) ; }";
        let set = MetamodelSet::single(Metamodel::parse(src).unwrap());
        let diags = set.validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, "unresolved-end-target");
    }

    #[test]
    fn validate_is_order_independent() {
        let fwd = "entity A { }\nentity B extends A { }\nentity C { x : set(Gone) ; }";
        let rev = "entity C { x : set(Gone) ; }\nentity B extends A { }\nentity A { }";
        let d1 = MetamodelSet::single(Metamodel::parse(fwd).unwrap()).validate();
        let d2 = MetamodelSet::single(Metamodel::parse(rev).unwrap()).validate();
        assert_eq!(d1, d2);
    }

    #[test]
    fn validate_flags_inheritance_cycle() {
        let src = "abstract entity A extends B { }\nabstract entity B extends A { }";
        let set = MetamodelSet::single(Metamodel::parse(src).unwrap());
        assert!(set.validate().iter().any(|d| d.rule == "inheritance-cycle"));
    }

    #[test]
    fn validate_flags_inherited_feature_collision() {
        let src = "abstract entity A { x : String ; }\nentity B extends A { x : Int ; }";
        let set = MetamodelSet::single(Metamodel::parse(src).unwrap());
        assert!(set.validate().iter().any(|d| d.rule == "duplicate-feature"));
    }

    #[test]
    fn validate_flags_multiple_keys_in_inherited_set() {
        let src =
            "abstract entity A { k1 : String (key) ; }\nentity B extends A { k2 : String (key) ; }";
        let set = MetamodelSet::single(Metamodel::parse(src).unwrap());
        let diags = set.validate();
        assert!(diags.iter().any(|d| d.rule == "multiple-keys" && d.location == "B"));
    }

    #[test]
    fn validate_rejects_cross_metamodel_inheritance() {
        // end targets may cross metamodels, parents may not
        let a = Metamodel::parse("abstract entity Base { }").unwrap();
        let b = Metamodel::parse("entity Sub extends Base { x : set(Base) ; }").unwrap();
        let diags = MetamodelSet::new(vec![a, b]).validate();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, "unresolved-parent");
    }

    #[test]
    fn lookup_feature_walks_inheritance() {
        let set = MetamodelSet::single(Metamodel::parse(MIG2_MM).unwrap());
        let f = set.lookup_feature("Node2", "id2").unwrap().unwrap();
        match f {
            FeatureRef::Attr { decl, attr } => {
                assert_eq!(decl, "ModelElement2");
                assert!(attr.is_key);
            }
            _ => panic!("expected attribute"),
        }
        let set2 = MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap());
        let src = set2.lookup_feature("Edge", "src").unwrap().unwrap();
        match src {
            FeatureRef::End { end, .. } => assert_eq!(end.target, "Node"),
            _ => panic!("expected end"),
        }
        assert!(set2.lookup_feature("Node", "nosuch").unwrap().is_none());
        assert!(set2.lookup_feature("Nope", "x").is_err());
    }

    #[test]
    fn lookup_matches_parent_when_not_redeclared() {
        let set = MetamodelSet::single(Metamodel::parse(MIG2_MM).unwrap());
        let on_child = set.lookup_feature("Edge2", "text").unwrap().unwrap();
        let on_parent = set
            .lookup_feature("ModelElement2", "text")
            .unwrap()
            .unwrap();
        assert_eq!(on_child, on_parent);
    }

    #[test]
    fn key_attribute_resolution() {
        let set = MetamodelSet::single(Metamodel::parse(MIG2_MM).unwrap());
        assert_eq!(set.key_attribute("Edge2").unwrap().unwrap().1.name, "id2");
        assert_eq!(
            set.key_attribute("ModelElement2").unwrap().unwrap().1.name,
            "id2"
        );
        let set2 = MetamodelSet::single(Metamodel::parse(GRAPH_MM).unwrap());
        assert!(set2.key_attribute("Node").unwrap().is_none());
    }

    #[test]
    fn round_trips_through_text() {
        for src in [GRAPH_MM, MIG2_MM] {
            let mm = Metamodel::parse(src).unwrap();
            let reparsed = Metamodel::parse(&mm.to_text()).unwrap();
            assert_eq!(mm.entities, reparsed.entities);
        }
    }
}
