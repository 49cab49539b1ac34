//! Joint checking of a document set: the bounded stand-in for a nonempty
//! intersection of the documents' semantics.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;

use crate::conform::{check_exemplary, ConformOptions, ConformanceReport, OrderMode, Verdict, WorldTemplate};
use crate::dsl::{ClassModelAst, SequenceDiagramAst, SnapshotAst, StateDiagramAst, UnhandledPolicy};
use crate::elaborate::{compile_diagram, passive_sts, snapshot_state, BuildOptions, StaticModel, DEFAULT_BUDGET};
use crate::model::StateTransitionSystem;
use crate::simulate::{Policy, System, Termination, World};

use super::catalog::{Rule, Severity};
use super::refinement::{check_refinement, RefinementStatus, RefinementVerdict};
use super::state::{check_initial, check_state, Naming};
use super::statics::check_static;
use super::violation::{normalize, Violation};

/// Parsed documents, each with the name used in reports.
#[derive(Debug, Clone, Default)]
pub struct Documents {
    pub model: Option<(String, ClassModelAst)>,
    pub diagrams: Vec<(String, StateDiagramAst)>,
    pub snapshots: Vec<(String, SnapshotAst)>,
    pub sequences: Vec<(String, SequenceDiagramAst)>,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub horizon: usize,
    pub budget: usize,
    pub seed: u64,
    pub policy: Policy,
    /// Overrides the policy each diagram declares.
    pub unhandled: Option<UnhandledPolicy>,
    /// Check state rules after every tick instead of only at quiescence.
    pub per_tick: bool,
    pub order: OrderMode,
    /// Pairs of diagram names: (abstract, concrete).
    pub refinements: Vec<(String, String)>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            horizon: 10,
            budget: DEFAULT_BUDGET,
            seed: 0,
            policy: Policy::Concurrent,
            unhandled: None,
            per_tick: false,
            order: OrderMode::Global,
            refinements: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JointVerdict {
    JointlySatisfiable,
    NotSatisfiable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementResult {
    pub abstract_diagram: String,
    pub concrete_diagram: String,
    pub verdict: RefinementVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub verdict: JointVerdict,
    /// Horizon of every dynamic check in the report.
    pub bound: usize,
    pub violations: Vec<Violation>,
    #[serde(skip)]
    pub conformance: Vec<ConformanceReport>,
    pub refinements: Vec<RefinementResult>,
}

impl Report {
    pub fn rules(&self) -> BTreeSet<super::Rule> {
        self.violations.iter().map(|v| v.rule).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["conformance"] = self.conformance.iter().map(ConformanceReport::to_json).collect();
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in &self.violations {
            s.push_str(&v.to_string());
            s.push('\n');
        }
        for c in &self.conformance {
            let verdict = format!("{:?}", c.verdict).to_lowercase();
            s.push_str(&format!("sequence {}: {verdict} at bound {}\n", c.diagram, c.bound));
        }
        for r in &self.refinements {
            let status = format!("{:?}", r.verdict.status).to_lowercase();
            s.push_str(&format!(
                "refinement {} <= {}: {status} at bound {}\n",
                r.concrete_diagram, r.abstract_diagram, r.verdict.bound
            ));
        }
        let verdict = match self.verdict {
            JointVerdict::JointlySatisfiable => "jointly satisfiable",
            JointVerdict::NotSatisfiable => "not satisfiable",
            JointVerdict::Inconclusive => "inconclusive",
        };
        s.push_str(&format!("{verdict} at bound {}\n", self.bound));
        s
    }
}

fn model_name(docs: &Documents) -> &str {
    docs.model.as_ref().map_or("model", |(n, _)| n)
}

/// Compiles each diagram on its own so failures can be localized; returns
/// `None` when any diagram fails.
fn compile_all(
    docs: &Documents,
    model: &StaticModel,
    opts: &CheckOptions,
    out: &mut Vec<Violation>,
) -> Option<(BTreeMap<String, StateTransitionSystem>, BTreeMap<String, StateTransitionSystem>)> {
    let build = BuildOptions {
        policy: opts.unhandled,
        budget: DEFAULT_BUDGET,
    };
    let mut by_doc = BTreeMap::new();
    let mut by_class = BTreeMap::new();
    let mut ok = true;
    for (name, d) in &docs.diagrams {
        let owner = d.owner.clone().unwrap_or_default();
        match compile_diagram(d, model, &owner, &build) {
            Ok(sts) => {
                by_doc.insert(name.clone(), sts.clone());
                by_class.entry(owner).or_insert(sts);
            }
            Err(e) => {
                ok = false;
                out.push(Violation::new(Rule::S006, owner, e.pos().unwrap_or_default(), e.to_string()).in_document(name));
            }
        }
    }
    for c in model.classes.values().filter(|c| !c.is_abstract) {
        if !by_class.contains_key(&c.name) {
            match passive_sts(model, &c.name) {
                Ok(sts) => {
                    by_class.insert(c.name.clone(), sts);
                }
                Err(e) => {
                    ok = false;
                    out.push(Violation::new(Rule::S006, c.name.clone(), c.pos, e.to_string()).in_document(model_name(docs)));
                }
            }
        }
    }
    ok.then_some((by_class, by_doc))
}

fn first_per_subject(vs: Vec<Violation>, seen: &mut BTreeSet<(super::Rule, String)>, out: &mut Vec<Violation>) {
    for v in vs {
        if seen.insert((v.rule, v.subject.clone())) {
            out.push(v);
        }
    }
}

fn check_snapshot(
    name: &str,
    snap: &SnapshotAst,
    model: &StaticModel,
    stss: Option<&BTreeMap<String, StateTransitionSystem>>,
    opts: &CheckOptions,
    out: &mut Vec<Violation>,
) {
    if snap.objects.iter().any(|o| model.is_abstract(&o.class)) {
        // already reported; no state can be built
        return;
    }
    let state = match snapshot_state(model, snap) {
        Ok(s) => s,
        Err(e) => {
            out.push(Violation::new(Rule::S006, name, e.pos().unwrap_or_default(), e.to_string()).in_document(name));
            return;
        }
    };
    let naming = Naming { snapshot: Some(&state) };
    let mut seen = BTreeSet::new();
    let mut found = Vec::new();
    first_per_subject(check_state(&state.state, model, naming), &mut seen, &mut found);
    let Some(stss) = stss else {
        out.extend(found.into_iter().map(|v| v.in_document(name)));
        return;
    };
    let initial = check_initial(&state, stss);
    let runnable = initial.is_empty();
    first_per_subject(initial, &mut seen, &mut found);
    if runnable {
        let system = Arc::new(System {
            model: model.clone(),
            snapshot: state.clone(),
            stss: stss.clone(),
        });
        match World::new(system, opts.seed, opts.policy) {
            Ok(world) => {
                let exec = world.run(opts.horizon);
                let states: Vec<_> = if opts.per_tick {
                    exec.trajectory.iter().collect()
                } else if exec.termination == Termination::Quiescent {
                    vec![&exec.final_state]
                } else {
                    Vec::new()
                };
                for s in states {
                    first_per_subject(check_state(s, model, naming), &mut seen, &mut found);
                }
            }
            Err(e) => found.push(Violation::new(Rule::S006, name, Default::default(), e.to_string())),
        }
    }
    out.extend(found.into_iter().map(|v| v.in_document(name)));
}

/// Runs every static, state, initial-state, conformance and refinement check
/// the documents admit. The verdict is "jointly satisfiable" only when no
/// rule fires and every sequence diagram has a witness within the bound.
pub fn check_documents(docs: &Documents, opts: &CheckOptions) -> Report {
    let ast = docs.model.as_ref().map(|(_, m)| m.clone()).unwrap_or_default();
    let model = StaticModel::build(&ast);
    let mname = model_name(docs).to_string();
    let mut out: Vec<Violation> = check_static(&model, &docs.snapshots, &docs.diagrams)
        .into_iter()
        .map(|v| if v.document.is_none() { v.in_document(&mname) } else { v })
        .collect();
    let model_ok = model.problems.is_empty() && !out.iter().any(|v| v.rule == Rule::S005 || v.rule == Rule::S006);
    let compiled = if model_ok { compile_all(docs, &model, opts, &mut out) } else { None };
    let stss = compiled.as_ref().map(|(c, _)| c);

    for (name, snap) in &docs.snapshots {
        check_snapshot(name, snap, &model, stss, opts, &mut out);
    }

    let mut conformance = Vec::new();
    if let Some(stss) = stss {
        let template = WorldTemplate {
            model: model.clone(),
            snapshot: docs.snapshots.first().map(|(_, s)| s.clone()).unwrap_or_default(),
            stss: stss.clone(),
        };
        let copts = ConformOptions {
            horizon: opts.horizon,
            budget: opts.budget,
            policy: opts.policy,
            order: opts.order,
        };
        for (name, seq) in &docs.sequences {
            match check_exemplary(seq, &template, &copts) {
                Ok(r) => {
                    for d in &r.transitions.defects {
                        out.push(
                            Violation::new(Rule::C003, format!("{}.{}", d.role, d.interaction), d.pos, d.message.clone())
                                .in_document(name),
                        );
                    }
                    let pos = r.first_failing_pos.unwrap_or_default();
                    match r.verdict {
                        Verdict::Conforms => {}
                        Verdict::Fails => out.push(
                            Violation::new(
                                Rule::C001,
                                seq.name.clone(),
                                pos,
                                format!(
                                    "no execution up to horizon {} realizes `{}`; interaction {} is never reached",
                                    r.bound,
                                    seq.name,
                                    r.first_failing.unwrap_or(0) + 1
                                ),
                            )
                            .in_document(name),
                        ),
                        Verdict::Inconclusive => out.push(
                            Violation::new(
                                Rule::C002,
                                seq.name.clone(),
                                pos,
                                format!("budget exhausted before a witness for `{}` was found at horizon {}", seq.name, r.bound),
                            )
                            .in_document(name),
                        ),
                    }
                    conformance.push(r);
                }
                Err(e) => out.push(Violation::new(Rule::S006, seq.name.clone(), Default::default(), e.to_string()).in_document(name)),
            }
        }
    }

    let mut refinements = Vec::new();
    if let Some((_, by_doc)) = &compiled {
        for (a, c) in &opts.refinements {
            let (Some(abs), Some(conc)) = (by_doc.get(a), by_doc.get(c)) else {
                out.push(Violation::new(Rule::S006, format!("{c} <= {a}"), Default::default(), format!("refinement names unknown diagram `{a}` or `{c}`")));
                continue;
            };
            let verdict = check_refinement(abs, conc, opts.horizon, opts.budget);
            let subject = format!("{c} <= {a}");
            match verdict.status {
                RefinementStatus::Holds => {}
                RefinementStatus::Fails => out.push(
                    Violation::new(
                        Rule::R001,
                        subject,
                        Default::default(),
                        format!("{c} produces an output {a} cannot on an input of length {}", verdict.counterexample.as_ref().map_or(0, |x| x.input.len())),
                    )
                    .in_document(c),
                ),
                RefinementStatus::Inconclusive => out.push(
                    Violation::new(Rule::R002, subject, Default::default(), format!("budget exhausted before horizon {}", verdict.bound)).in_document(c),
                ),
            }
            refinements.push(RefinementResult {
                abstract_diagram: a.clone(),
                concrete_diagram: c.clone(),
                verdict,
            });
        }
    }

    normalize(&mut out);
    let verdict = if out.iter().any(|v| v.severity == Severity::Error) {
        JointVerdict::NotSatisfiable
    } else if out.is_empty() {
        JointVerdict::JointlySatisfiable
    } else {
        JointVerdict::Inconclusive
    };
    Report {
        verdict,
        bound: opts.horizon,
        violations: out,
        conformance,
        refinements,
    }
}
