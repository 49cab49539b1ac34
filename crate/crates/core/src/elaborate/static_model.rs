//! Class model → static model: effective signatures, inheritance closure,
//! association link ends with multiplicity predicates, and constraints.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::dsl::{
    AssocDecl, AssocKind, ClassModelAst, Domain, GenDecl, Literal, Multiplicity, Pos, SnapshotAst, TypeRef,
};
use crate::model::{
    AttrType, ClassHierarchy, InheritanceRelation, Label, MethodSig, ObjectId, ObjectState, Signature,
    SystemState, Term, Value, ValueType,
};

use super::terms::{compile, literal_value, Scope, Ty};
use super::ElabError;

/// Largest integer range expanded into an explicit domain.
const MAX_DOMAIN: i64 = 4096;

/// One side of a binary association as seen from an object at the other end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkEnd {
    /// `assoc.TargetClass`.
    pub key: String,
    pub assoc: String,
    pub target_class: String,
    /// Admissible number of linked objects.
    pub mult: Multiplicity,
    pub kind: AssocKind,
    /// The linked objects are the aggregates of this object.
    pub toward_aggregate: bool,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    pub class: String,
    pub predicate: Term,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct ClassInfo {
    pub name: String,
    pub is_abstract: bool,
    pub pos: Pos,
}

/// The elaborated class model.
#[derive(Debug, Clone)]
pub struct StaticModel {
    pub hierarchy: ClassHierarchy,
    pub classes: BTreeMap<String, ClassInfo>,
    /// Effective (inherited) signature per class.
    pub signatures: BTreeMap<String, Signature>,
    /// Effective link ends per class, keyed by link-set key.
    pub link_ends: BTreeMap<String, BTreeMap<String, LinkEnd>>,
    pub associations: Vec<AssocDecl>,
    pub generalizations: Vec<GenDecl>,
    pub constraints: Vec<Constraint>,
    /// Problems tolerated while building; empty for a well-formed model.
    pub problems: Vec<ElabError>,
}

fn value_type(t: &TypeRef) -> ValueType {
    match t {
        TypeRef::Int => ValueType::Int,
        TypeRef::Bool => ValueType::Bool,
        TypeRef::Str => ValueType::Str,
        TypeRef::Class(c) => ValueType::Class(c.clone()),
    }
}

fn attr_type(a: &crate::dsl::AttrDecl) -> Result<AttrType, ElabError> {
    let ty = value_type(&a.ty);
    let bad = |m: &str| ElabError::GuardTypeError {
        message: format!("domain of `{}`: {m}", a.name),
        pos: a.pos,
    };
    let domain = match &a.domain {
        None => None,
        Some(Domain::Range(lo, hi)) => {
            if ty != ValueType::Int {
                return Err(bad("ranges apply to int attributes"));
            }
            if hi < lo || hi - lo >= MAX_DOMAIN {
                return Err(bad("empty or oversized range"));
            }
            Some((*lo..=*hi).map(Value::Int).collect())
        }
        Some(Domain::Values(vs)) => {
            let vals: Option<Vec<Value>> = vs.iter().map(literal_value).collect();
            let vals = vals.ok_or_else(|| bad("object literal in domain"))?;
            let ok = vals.iter().all(|v| {
                matches!(
                    (v, &ty),
                    (Value::Int(_), ValueType::Int) | (Value::Bool(_), ValueType::Bool) | (Value::Str(_), ValueType::Str)
                )
            });
            if !ok || vals.is_empty() {
                return Err(bad("values do not match the attribute type"));
            }
            let mut dedup = Vec::new();
            for v in vals {
                if !dedup.contains(&v) {
                    dedup.push(v);
                }
            }
            Some(dedup)
        }
    };
    Ok(AttrType { ty, domain })
}

impl StaticModel {
    /// Builds the model, recording problems instead of failing. A
    /// generalization edge closing a cycle is dropped from the closure;
    /// conflicting members keep the subclass's declaration.
    pub fn build(ast: &ClassModelAst) -> StaticModel {
        let mut problems = Vec::new();
        let mut declared = BTreeMap::new();
        let mut classes = BTreeMap::new();
        for c in &ast.classes {
            let mut sig = Signature::default();
            for a in &c.attributes {
                match attr_type(a) {
                    Ok(t) => {
                        sig.attributes.insert(a.name.clone(), t);
                    }
                    Err(e) => problems.push(e),
                }
            }
            for o in &c.operations {
                sig.methods.insert(
                    o.name.clone(),
                    MethodSig {
                        params: o.params.iter().map(value_type).collect(),
                        result: o.result.as_ref().map(value_type),
                    },
                );
            }
            declared.insert(c.name.clone(), sig);
            classes.insert(
                c.name.clone(),
                ClassInfo {
                    name: c.name.clone(),
                    is_abstract: c.is_abstract,
                    pos: c.pos,
                },
            );
        }

        // edges are added in document order; one that would close a cycle is
        // reported and left out
        let mut kept: Vec<(String, String)> = Vec::new();
        let mut closing = None;
        for g in &ast.generalizations {
            kept.push((g.sub.clone(), g.sup.clone()));
            if !InheritanceRelation::new(classes.keys().cloned(), kept.iter().cloned()).is_acyclic() {
                kept.pop();
                closing.get_or_insert(g.pos);
            }
        }
        if let Some(pos) = closing {
            let all = InheritanceRelation::new(
                classes.keys().cloned(),
                ast.generalizations.iter().map(|g| (g.sub.clone(), g.sup.clone())),
            );
            problems.push(ElabError::CyclicInheritance {
                classes: all.cyclic_classes().into_iter().collect(),
                pos,
            });
        }
        let inheritance = InheritanceRelation::new(classes.keys().cloned(), kept);
        let hierarchy = ClassHierarchy {
            declared,
            abstract_classes: ast
                .classes
                .iter()
                .filter(|c| c.is_abstract)
                .map(|c| c.name.clone())
                .collect(),
            inheritance,
        };

        let mut signatures = BTreeMap::new();
        for c in &ast.classes {
            let sig = match hierarchy.effective_signature(&c.name) {
                Ok(s) => s,
                Err(e) => {
                    problems.push(ElabError::from_model(e, c.pos));
                    lenient_signature(&hierarchy, &c.name)
                }
            };
            signatures.insert(c.name.clone(), sig);
        }

        let mut direct_ends: BTreeMap<String, Vec<LinkEnd>> = BTreeMap::new();
        for a in &ast.associations {
            if a.kind == AssocKind::Composition && a.left.mult.upper.is_none_or(|u| u > 1) {
                problems.push(ElabError::CompositionMultiplicity {
                    assoc: a.name.clone(),
                    mult: a.left.mult.to_string(),
                    pos: a.left.pos,
                });
            }
            // object at the right end sees the left end, and vice versa
            direct_ends.entry(a.right.class.clone()).or_default().push(LinkEnd {
                key: format!("{}.{}", a.name, a.left.class),
                assoc: a.name.clone(),
                target_class: a.left.class.clone(),
                mult: a.left.mult,
                kind: a.kind,
                toward_aggregate: a.kind != AssocKind::Plain,
                pos: a.left.pos,
            });
            if a.left.class != a.right.class {
                direct_ends.entry(a.left.class.clone()).or_default().push(LinkEnd {
                    key: format!("{}.{}", a.name, a.right.class),
                    assoc: a.name.clone(),
                    target_class: a.right.class.clone(),
                    mult: a.right.mult,
                    kind: a.kind,
                    toward_aggregate: false,
                    pos: a.right.pos,
                });
            }
        }
        let mut link_ends = BTreeMap::new();
        for c in classes.keys() {
            let mut ends = BTreeMap::new();
            for sup in hierarchy.inheritance.superclasses(c) {
                for e in direct_ends.get(sup).into_iter().flatten() {
                    ends.entry(e.key.clone()).or_insert_with(|| e.clone());
                }
            }
            link_ends.insert(c.clone(), ends);
        }

        let mut model = StaticModel {
            hierarchy,
            classes,
            signatures,
            link_ends,
            associations: ast.associations.clone(),
            generalizations: ast.generalizations.clone(),
            constraints: Vec::new(),
            problems,
        };
        for k in &ast.constraints {
            let scope = ClassScope {
                model: &model,
                class: &k.class,
            };
            match compile(&k.expr, &scope) {
                Ok((t, Ty::Bool)) => model.constraints.push(Constraint {
                    name: k.name.clone(),
                    class: k.class.clone(),
                    predicate: t,
                    pos: k.pos,
                }),
                Ok(_) => model.problems.push(ElabError::GuardTypeError {
                    message: format!("constraint `{}` is not a boolean predicate", k.name),
                    pos: k.pos,
                }),
                Err(e) => model.problems.push(e),
            }
        }
        model
    }

    pub fn is_abstract(&self, class: &str) -> bool {
        self.classes.get(class).is_some_and(|c| c.is_abstract)
    }

    pub fn signature(&self, class: &str) -> Option<&Signature> {
        self.signatures.get(class)
    }

    pub fn link_ends_of(&self, class: &str) -> impl Iterator<Item = &LinkEnd> {
        self.link_ends.get(class).into_iter().flat_map(|m| m.values())
    }

    /// Resolves `assoc.Class` or a bare association name to a link-set key
    /// of `class`.
    pub fn resolve_link_key(&self, class: &str, key: &str) -> Result<&LinkEnd, String> {
        let ends = self.link_ends.get(class).ok_or_else(|| format!("unknown class {class}"))?;
        if let Some(e) = ends.get(key) {
            return Ok(e);
        }
        let matches: Vec<&LinkEnd> = ends.values().filter(|e| e.assoc == key).collect();
        match matches.as_slice() {
            [one] => Ok(one),
            [] => Err(format!("{class} has no link set `{key}`")),
            _ => Err(format!("link set `{key}` of {class} is ambiguous; qualify it")),
        }
    }

    pub fn is_subclass(&self, c: &str, d: &str) -> bool {
        self.hierarchy.inheritance.is_subclass(c, d).unwrap_or(false)
    }
}

/// Declared members plus every non-conflicting inherited one.
fn lenient_signature(h: &ClassHierarchy, c: &str) -> Signature {
    let mut sig = h.declared.get(c).cloned().unwrap_or_default();
    let mut supers: Vec<&str> = h.inheritance.superclasses(c).filter(|s| *s != c).collect();
    supers.sort();
    for s in supers {
        if let Some(d) = h.declared.get(s) {
            for (k, v) in &d.attributes {
                if !sig.methods.contains_key(k) {
                    sig.attributes.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
            for (k, v) in &d.methods {
                if !sig.attributes.contains_key(k) {
                    sig.methods.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
        }
    }
    sig
}

/// Attributes, `self` and link counts of one class.
pub(crate) struct ClassScope<'a> {
    pub model: &'a StaticModel,
    pub class: &'a str,
}

impl Scope for ClassScope<'_> {
    fn name(&self, name: &str) -> Option<(Term, Ty)> {
        if name == "self" {
            return Some((Term::SelfRef, Ty::Ref));
        }
        let a = self.model.signature(self.class)?.attributes.get(name)?;
        Some((Term::Attr(name.to_string()), Ty::of(&a.ty)))
    }

    fn link_key(&self, key: &str) -> Result<String, String> {
        self.model.resolve_link_key(self.class, key).map(|e| e.key.clone())
    }
}

/// Strict elaboration: fails on the first recorded problem.
pub fn elaborate_static(ast: &ClassModelAst) -> Result<StaticModel, ElabError> {
    let model = StaticModel::build(ast);
    match model.problems.first() {
        Some(e) => Err(e.clone()),
        None => Ok(model),
    }
}

/// System state described by a snapshot, before any control state is chosen
/// (labels are empty). Identifiers are allocated in document order.
#[derive(Debug, Clone)]
pub struct SnapshotState {
    pub state: SystemState,
    pub ids: BTreeMap<String, ObjectId>,
    pub positions: BTreeMap<ObjectId, Pos>,
}

impl SnapshotState {
    pub fn id(&self, name: &str) -> Option<&ObjectId> {
        self.ids.get(name)
    }

    pub fn name_of(&self, id: &ObjectId) -> Option<&str> {
        self.ids.iter().find(|(_, v)| *v == id).map(|(k, _)| k.as_str())
    }
}

/// Installs a snapshot's objects, attribute values and links. Link
/// orientation follows the association ends; `--` links install both
/// directions, `->` links only the first object's side.
pub fn snapshot_state(model: &StaticModel, snap: &SnapshotAst) -> Result<SnapshotState, ElabError> {
    let mut ids = BTreeMap::new();
    let mut positions = BTreeMap::new();
    for (k, o) in snap.objects.iter().enumerate() {
        if !model.classes.contains_key(&o.class) {
            return Err(ElabError::UnknownClass {
                class: o.class.clone(),
                pos: o.pos,
            });
        }
        let id = ObjectId::initial(o.class.clone(), k as u32);
        positions.insert(id.clone(), o.pos);
        ids.insert(o.name.clone(), id);
    }
    let mut alive = BTreeMap::new();
    for o in &snap.objects {
        let sig = &model.signatures[&o.class];
        let mut valuation: BTreeMap<String, Value> = sig
            .attributes
            .iter()
            .map(|(k, t)| (k.clone(), t.default_value()))
            .collect();
        for b in &o.bindings {
            if !valuation.contains_key(&b.attr) {
                return Err(ElabError::UnknownName {
                    name: b.attr.clone(),
                    pos: b.pos,
                });
            }
            let v = match &b.value {
                Literal::Object(name) => Value::Ref(ids.get(name).cloned().ok_or_else(|| ElabError::UnknownName {
                    name: name.clone(),
                    pos: b.pos,
                })?),
                lit => literal_value(lit).expect("non-object literal"),
            };
            valuation.insert(b.attr.clone(), v);
        }
        let links = model
            .link_ends_of(&o.class)
            .map(|e| (e.key.clone(), BTreeSet::new()))
            .collect();
        alive.insert(
            ids[&o.name].clone(),
            ObjectState {
                control: Label(Vec::new()),
                valuation,
                links,
            },
        );
    }
    for l in &snap.links {
        let assoc = model
            .associations
            .iter()
            .find(|a| a.name == l.assoc)
            .ok_or_else(|| ElabError::UnknownName {
                name: l.assoc.clone(),
                pos: l.pos,
            })?;
        let unknown = |n: &str| ElabError::UnknownName {
            name: n.to_string(),
            pos: l.pos,
        };
        let from = ids.get(&l.from).ok_or_else(|| unknown(&l.from))?.clone();
        let to = ids.get(&l.to).ok_or_else(|| unknown(&l.to))?.clone();
        let from_left = model.is_subclass(from.class(), &assoc.left.class)
            && model.is_subclass(to.class(), &assoc.right.class);
        let (from_key, to_key) = if from_left {
            (
                format!("{}.{}", assoc.name, assoc.right.class),
                format!("{}.{}", assoc.name, assoc.left.class),
            )
        } else if model.is_subclass(from.class(), &assoc.right.class)
            && model.is_subclass(to.class(), &assoc.left.class)
        {
            (
                format!("{}.{}", assoc.name, assoc.left.class),
                format!("{}.{}", assoc.name, assoc.right.class),
            )
        } else {
            return Err(ElabError::UnknownName {
                name: l.assoc.clone(),
                pos: l.pos,
            });
        };
        alive
            .get_mut(&from)
            .unwrap()
            .links
            .entry(from_key)
            .or_default()
            .insert(to.clone());
        if l.bidirectional {
            alive.get_mut(&to).unwrap().links.entry(to_key).or_default().insert(from);
        }
    }
    Ok(SnapshotState {
        state: SystemState { alive, clock: 0 },
        ids,
        positions,
    })
}
