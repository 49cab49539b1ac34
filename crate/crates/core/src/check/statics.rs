//! Rules over the class model and the declarations of other documents.

use std::collections::BTreeSet;

use crate::dsl::{SnapshotAst, StateDiagramAst};
use crate::elaborate::{ElabError, StaticModel};

use super::catalog::Rule;
use super::violation::{normalize, Violation};

fn from_problem(e: &ElabError) -> Violation {
    let pos = e.pos().unwrap_or_default();
    match e {
        ElabError::CyclicInheritance { classes, .. } => {
            Violation::new(Rule::S002, classes.join(", "), pos, e.to_string())
        }
        ElabError::CompositionMultiplicity { assoc, .. } => Violation::new(Rule::S004, assoc.clone(), pos, e.to_string()),
        ElabError::SignatureConflict { class, .. } => Violation::new(Rule::S001, class.clone(), pos, e.to_string()),
        other => Violation::new(Rule::S006, "model", pos, other.to_string()),
    }
}

/// Signature extension along every generalization, plus the
/// problems recorded while elaborating the model.
pub fn check_model(model: &StaticModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for p in &model.problems {
        match p {
            // reported below, once per member
            ElabError::SignatureConflict { .. } => {}
            _ => out.push(from_problem(p)),
        }
    }
    for (c, info) in &model.classes {
        let own = &model.signatures[c];
        for d in model.hierarchy.inheritance.superclasses(c).filter(|d| d != c) {
            let Some(sup) = model.signatures.get(d) else { continue };
            for member in sup.missing_from(own) {
                if seen.insert((c.clone(), member.clone())) {
                    out.push(Violation::new(
                        Rule::S001,
                        c.clone(),
                        info.pos,
                        format!("{c} does not carry member `{member}` of its superclass {d} unchanged"),
                    ));
                }
            }
        }
    }
    out
}

/// Snapshot objects of abstract classes.
pub fn check_instances(model: &StaticModel, snapshot: &SnapshotAst) -> Vec<Violation> {
    snapshot
        .objects
        .iter()
        .filter(|o| model.is_abstract(&o.class))
        .map(|o| {
            Violation::new(
                Rule::S003,
                o.name.clone(),
                o.pos,
                format!("object {} instantiates abstract class {}", o.name, o.class),
            )
        })
        .collect()
}

/// Event selectors outside the owning class's signature.
pub fn check_diagram(model: &StaticModel, diagram: &StateDiagramAst) -> Vec<Violation> {
    let owner = diagram.owner.clone().unwrap_or_default();
    let Some(sig) = model.signature(&owner) else {
        let pos = diagram.states.first().map(|s| s.pos).unwrap_or_default();
        return vec![Violation::new(
            Rule::S006,
            owner.clone(),
            pos,
            format!("state diagram owner `{owner}` is not a declared class"),
        )];
    };
    diagram
        .transitions
        .iter()
        .filter_map(|t| t.event.as_ref())
        .filter(|ev| !sig.methods.contains_key(&ev.selector))
        .map(|ev| {
            Violation::new(
                Rule::S005,
                format!("{owner}.{}", ev.selector),
                ev.pos,
                format!("event `{}` is not a method of {owner}", ev.selector),
            )
        })
        .collect()
}

/// All static rules: the model, abstract instances in each snapshot and
/// event selectors of each diagram.
pub fn check_static(
    model: &StaticModel,
    snapshots: &[(String, SnapshotAst)],
    diagrams: &[(String, StateDiagramAst)],
) -> Vec<Violation> {
    let mut out = check_model(model);
    for (name, s) in snapshots {
        out.extend(check_instances(model, s).into_iter().map(|v| v.in_document(name)));
    }
    for (name, d) in diagrams {
        out.extend(check_diagram(model, d).into_iter().map(|v| v.in_document(name)));
    }
    normalize(&mut out);
    out
}
