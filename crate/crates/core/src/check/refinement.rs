//! Bounded refinement: inclusion of output-stream sets per input stream.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::model::{InputStream, InputSymbol, OutputStream, StateId, StateTransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RefinementStatus {
    Holds,
    Fails,
    /// The budget ran out before every input stream up to the bound was
    /// examined; no violation was found among those that were.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub input: InputStream,
    /// Produced by the concrete automaton on `input`, impossible for the
    /// abstract one.
    pub output: OutputStream,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefinementVerdict {
    pub status: RefinementStatus,
    /// Input streams were examined up to this length.
    pub bound: usize,
    pub counterexample: Option<Counterexample>,
    /// Frontier nodes visited.
    pub spent: usize,
}

impl RefinementVerdict {
    pub fn holds(&self) -> bool {
        self.status == RefinementStatus::Holds
    }
}

type Frontier = BTreeSet<(StateId, OutputStream)>;

fn advance(sts: &StateTransitionSystem, frontier: &Frontier, input: Option<&InputSymbol>) -> Frontier {
    let mut next = Frontier::new();
    for (s, out) in frontier {
        for (_, s2, events) in sts.step(*s, input) {
            let mut o = out.clone();
            o.push(events);
            next.insert((s2, o));
        }
    }
    next
}

fn start(sts: &StateTransitionSystem) -> Frontier {
    sts.initial().iter().map(|&s| (s, Vec::new())).collect()
}

/// Inputs the refinement quantifies over: an idle tick and every symbol of
/// either alphabet whose selector the abstract automaton accepts.
pub fn refinement_inputs(abs: &StateTransitionSystem, conc: &StateTransitionSystem) -> Vec<Option<InputSymbol>> {
    let symbols: BTreeSet<&InputSymbol> = abs
        .alphabet()
        .iter()
        .chain(conc.alphabet())
        .filter(|i| abs.accepted().contains(&i.selector))
        .collect();
    std::iter::once(None).chain(symbols.into_iter().cloned().map(Some)).collect()
}

/// Whether some run of `sts` produces `output` on `input`.
pub fn replay(sts: &StateTransitionSystem, input: &[Option<InputSymbol>], output: &[Vec<crate::model::OutEvent>]) -> bool {
    if input.len() != output.len() {
        return false;
    }
    let mut states: BTreeSet<StateId> = sts.initial().clone();
    for (x, want) in input.iter().zip(output) {
        let mut next = BTreeSet::new();
        for &s in &states {
            for (_, s2, events) in sts.step(s, x.as_ref()) {
                if &events == want {
                    next.insert(s2);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        states = next;
    }
    true
}

type Level = Vec<(InputStream, Frontier, Frontier)>;

fn violation(prefix: &InputStream, a: &Frontier, c: &Frontier) -> Option<Counterexample> {
    let allowed: BTreeSet<&OutputStream> = a.iter().map(|(_, o)| o).collect();
    c.iter().find(|(_, o)| !allowed.contains(o)).map(|(_, o)| Counterexample {
        input: prefix.clone(),
        output: o.clone(),
    })
}

/// Checks that on every input stream of length at most `horizon`, each
/// output stream of `concrete` is also one of `abstract_`. Input streams are
/// searched breadth-first in alphabet order, so the counterexample is a
/// shortest violating pair. The budget is charged as frontiers are built.
/// The verdict is only ever a statement about the bound.
pub fn check_refinement(
    abstract_: &StateTransitionSystem,
    concrete: &StateTransitionSystem,
    horizon: usize,
    budget: usize,
) -> RefinementVerdict {
    let inputs = refinement_inputs(abstract_, concrete);
    let (a0, c0) = (start(abstract_), start(concrete));
    let mut spent = a0.len() + c0.len();
    if spent > budget {
        return verdict(RefinementStatus::Inconclusive, horizon, None, spent);
    }
    if let Some(cx) = violation(&Vec::new(), &a0, &c0) {
        return verdict(RefinementStatus::Fails, horizon, Some(cx), spent);
    }
    let mut level: Level = vec![(Vec::new(), a0, c0)];
    for _ in 0..horizon {
        let mut next = Level::new();
        for (prefix, a, c) in &level {
            for x in &inputs {
                let (a2, c2) = (advance(abstract_, a, x.as_ref()), advance(concrete, c, x.as_ref()));
                spent += a2.len() + c2.len();
                let mut p = prefix.clone();
                p.push(x.clone());
                if let Some(cx) = violation(&p, &a2, &c2) {
                    return verdict(RefinementStatus::Fails, horizon, Some(cx), spent);
                }
                if spent > budget {
                    return verdict(RefinementStatus::Inconclusive, horizon, None, spent);
                }
                next.push((p, a2, c2));
            }
        }
        level = next;
    }
    verdict(RefinementStatus::Holds, horizon, None, spent)
}

fn verdict(status: RefinementStatus, bound: usize, counterexample: Option<Counterexample>, spent: usize) -> RefinementVerdict {
    RefinementVerdict {
        status,
        bound,
        counterexample,
        spent,
    }
}
