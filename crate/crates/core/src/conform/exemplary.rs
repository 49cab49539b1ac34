//! Existential conformance of a system to a sequence diagram.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::dsl::{ArgPattern, ObjectDecl, Pos, SequenceDiagramAst, SnapshotAst};
use crate::elaborate::{literal_value, StaticModel, DEFAULT_BUDGET};
use crate::model::{Message, ObjectId, StateTransitionSystem};
use crate::simulate::{explore, EventKind, Execution, Policy, System, World};

use super::automata::{derive_automata, Direction};
use super::mapping::{map_abstract_transitions, TransitionMap};
use super::ConformError;

/// How the diagram's vertical order constrains an execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderMode {
    /// The related sends occur in diagram order across all lifelines.
    #[default]
    Global,
    /// Each lifeline sees its own chain in order; no order across lifelines.
    PerLifeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConformOptions {
    pub horizon: usize,
    /// Bound on simulated ticks during the search.
    pub budget: usize,
    pub policy: Policy,
    pub order: OrderMode,
}

impl Default for ConformOptions {
    fn default() -> Self {
        ConformOptions {
            horizon: 10,
            budget: DEFAULT_BUDGET,
            policy: Policy::Concurrent,
            order: OrderMode::Global,
        }
    }
}

/// Everything needed to instantiate the system under test.
#[derive(Debug, Clone)]
pub struct WorldTemplate {
    pub model: StaticModel,
    pub snapshot: SnapshotAst,
    pub stss: BTreeMap<String, StateTransitionSystem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Conforms,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConformanceReport {
    pub diagram: String,
    pub verdict: Verdict,
    /// Horizon the verdict is bounded by.
    pub bound: usize,
    pub order: OrderMode,
    pub binding: BTreeMap<String, ObjectId>,
    /// Ticks needed by the witness to send and deliver every interaction.
    pub witness_horizon: Option<usize>,
    #[serde(skip)]
    pub witness: Option<Execution>,
    /// Index of the first interaction no explored execution realizes.
    pub first_failing: Option<usize>,
    pub first_failing_pos: Option<Pos>,
    pub transitions: TransitionMap,
    pub runs: usize,
    pub incomplete: bool,
}

impl ConformanceReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        let trace: Option<Vec<serde_json::Value>> = self.witness.as_ref().map(|w| {
            w.trace()
                .lines()
                .map(|l| serde_json::from_str(l).expect("trace line is JSON"))
                .collect()
        });
        v["witness"] = serde_json::to_value(trace).expect("trace serializes");
        v
    }
}

/// One event of an object's projection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Projected {
    pub tick: usize,
    pub direction: Direction,
    pub message: Message,
    pub seq: u64,
}

/// Time-ordered sends (out) and deliveries (in) of one object.
pub fn project(exec: &Execution, id: &ObjectId) -> Vec<Projected> {
    exec.events
        .iter()
        .filter_map(|e| {
            let direction = match e.kind {
                EventKind::Send if e.from == *id => Direction::Out,
                EventKind::Deliver if e.to == *id => Direction::In,
                _ => return None,
            };
            Some(Projected {
                tick: e.tick,
                direction,
                message: Message {
                    sender: e.from.clone(),
                    receiver: e.to.clone(),
                    selector: e.selector.clone().unwrap_or_default(),
                    args: e.args.clone(),
                    creation: false,
                },
                seq: e.seq.unwrap_or_default(),
            })
        })
        .collect()
}

fn args_match(pattern: &[ArgPattern], args: &[crate::model::Value]) -> bool {
    pattern.is_empty()
        || (pattern.len() == args.len()
            && pattern.iter().zip(args).all(|(p, a)| match p {
                ArgPattern::Wild => true,
                ArgPattern::Lit(l) => literal_value(l).as_ref() == Some(a),
            }))
}

/// How far `exec` realizes the diagram under `binding`: the number of
/// leading interactions matched, each sent and delivered, and the ticks
/// used. A message between bound roles whose selector occurs between
/// them in the diagram is related; in global mode the related sends must
/// begin with the interactions in order; in per-lifeline mode every role's
/// related sends and deliveries must begin with its chain.
pub fn realizes(
    seq: &SequenceDiagramAst,
    binding: &BTreeMap<String, ObjectId>,
    exec: &Execution,
    order: OrderMode,
) -> (usize, usize) {
    let n = seq.interactions.len();
    let ends: Vec<(&ObjectId, &ObjectId)> = seq
        .interactions
        .iter()
        .map(|m| (&binding[&m.from], &binding[&m.to]))
        .collect();
    let related = |from: &ObjectId, to: &ObjectId, sel: &str| {
        seq.interactions
            .iter()
            .zip(&ends)
            .any(|(m, (f, t))| *f == from && *t == to && m.selector == sel)
    };
    let fits = |i: usize, from: &ObjectId, to: &ObjectId, sel: &str, args: &[crate::model::Value]| {
        let m = &seq.interactions[i];
        ends[i] == (from, to) && m.selector == sel && args_match(&m.args, args)
    };
    let delivered: BTreeMap<u64, usize> = exec
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Deliver)
        .filter_map(|e| Some((e.seq?, e.tick)))
        .collect();
    match order {
        OrderMode::Global => {
            let mut k = 0;
            let mut ticks = 0;
            for e in exec.events.iter().filter(|e| e.kind == EventKind::Send) {
                if k == n {
                    break;
                }
                let sel = e.selector.as_deref().unwrap_or_default();
                if !related(&e.from, &e.to, sel) {
                    continue;
                }
                if !fits(k, &e.from, &e.to, sel, &e.args) {
                    break;
                }
                match e.seq.and_then(|s| delivered.get(&s)) {
                    Some(&t) => ticks = ticks.max(t + 1),
                    None => break,
                }
                k += 1;
            }
            (k, ticks)
        }
        OrderMode::PerLifeline => {
            let autos = derive_automata(seq);
            let mut worst = n;
            let mut ticks = 0;
            for (role, a) in &autos {
                let Some(id) = binding.get(role) else { continue };
                let mut j = 0;
                for p in project(exec, id) {
                    if j == a.transitions.len() {
                        break;
                    }
                    let m = &p.message;
                    if !related(&m.sender, &m.receiver, &m.selector) {
                        continue;
                    }
                    let at = &a.transitions[j];
                    if p.direction != at.direction || !fits(at.interaction, &m.sender, &m.receiver, &m.selector, &m.args) {
                        break;
                    }
                    ticks = ticks.max(p.tick + 1);
                    j += 1;
                }
                if j < a.transitions.len() {
                    worst = worst.min(a.transitions[j].interaction);
                }
            }
            (worst, ticks)
        }
    }
}

/// Binds each role to the snapshot object of the same name, else to the
/// objects of its class; roles without a candidate get a fresh object.
fn bind_roles(
    seq: &SequenceDiagramAst,
    template: &WorldTemplate,
) -> Result<(SnapshotAst, Vec<(String, Vec<String>)>), ConformError> {
    let mut snap = template.snapshot.clone();
    let mut cands = Vec::new();
    for l in &seq.lifelines {
        if !template.model.classes.contains_key(&l.class) {
            return Err(ConformError::UnknownRoleClass {
                role: l.role.clone(),
                class: l.class.clone(),
            });
        }
        let fits = |o: &ObjectDecl| template.model.is_subclass(&o.class, &l.class);
        let named: Vec<String> = snap.objects.iter().filter(|o| o.name == l.role && fits(o)).map(|o| o.name.clone()).collect();
        let c: Vec<String> = if !named.is_empty() {
            named
        } else {
            snap.objects.iter().filter(|o| fits(o)).map(|o| o.name.clone()).collect()
        };
        let c = if c.is_empty() {
            let mut name = l.role.clone();
            while snap.object(&name).is_some() {
                name.push('\'');
            }
            snap.objects.push(ObjectDecl {
                name: name.clone(),
                anonymous: false,
                class: l.class.clone(),
                bindings: Vec::new(),
                pos: l.pos,
            });
            vec![name]
        } else {
            c
        };
        cands.push((l.role.clone(), c));
    }
    Ok((snap, cands))
}

/// Injective role bindings, in a fixed order.
fn bindings(cands: &[(String, Vec<String>)]) -> Vec<BTreeMap<String, String>> {
    fn go(i: usize, cands: &[(String, Vec<String>)], cur: &mut BTreeMap<String, String>, out: &mut Vec<BTreeMap<String, String>>) {
        if i == cands.len() {
            out.push(cur.clone());
            return;
        }
        let (role, cs) = &cands[i];
        for c in cs {
            if cur.values().any(|v| v == c) {
                continue;
            }
            cur.insert(role.clone(), c.clone());
            go(i + 1, cands, cur, out);
            cur.remove(role);
        }
    }
    let mut out = Vec::new();
    go(0, cands, &mut BTreeMap::new(), &mut out);
    out
}

/// Searches the executions up to the horizon for one realizing the diagram.
/// The verdict is `fails` only when the search was exhaustive.
pub fn check_exemplary(
    seq: &SequenceDiagramAst,
    template: &WorldTemplate,
    opts: &ConformOptions,
) -> Result<ConformanceReport, ConformError> {
    let autos = derive_automata(seq);
    let transitions = map_abstract_transitions(&autos, &template.stss, &template.model)?;
    let (snap, cands) = bind_roles(seq, template)?;
    let system = System::new(template.model.clone(), &snap, template.stss.clone())?;
    let ids = |b: &BTreeMap<String, String>| -> BTreeMap<String, ObjectId> {
        b.iter().map(|(r, o)| (r.clone(), system.snapshot.ids[o].clone())).collect()
    };
    let all: Vec<BTreeMap<String, ObjectId>> = bindings(&cands).iter().map(ids).collect();
    let n = seq.interactions.len();
    let mut report = ConformanceReport {
        diagram: seq.name.clone(),
        verdict: Verdict::Fails,
        bound: opts.horizon,
        order: opts.order,
        binding: all.first().cloned().unwrap_or_default(),
        witness_horizon: None,
        witness: None,
        first_failing: None,
        first_failing_pos: None,
        transitions,
        runs: 0,
        incomplete: false,
    };
    if n == 0 {
        report.verdict = Verdict::Conforms;
        report.witness_horizon = Some(0);
        report.witness = Some(World::new(system.clone(), 0, opts.policy)?.run(0));
        return Ok(report);
    }
    let mut best = 0;
    let mut witness = None;
    let ex = explore(&system, opts.policy, opts.horizon, opts.budget, |exec| {
        for b in &all {
            let (k, ticks) = realizes(seq, b, &exec, opts.order);
            if k == n {
                witness = Some((b.clone(), ticks, exec));
                return ControlFlow::Break(());
            }
            best = best.max(k);
        }
        ControlFlow::Continue(())
    })?;
    report.runs = ex.runs;
    report.incomplete = ex.incomplete;
    match witness {
        Some((b, ticks, exec)) => {
            report.verdict = Verdict::Conforms;
            report.binding = b;
            report.witness_horizon = Some(ticks);
            report.witness = Some(exec);
        }
        None => {
            report.verdict = if ex.incomplete { Verdict::Inconclusive } else { Verdict::Fails };
            report.first_failing = Some(best);
            report.first_failing_pos = Some(seq.interactions[best].pos);
        }
    }
    Ok(report)
}
