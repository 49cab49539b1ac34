//! Black-box behavior of a state transition system up to a horizon.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::model::{Behavior, InputSymbol, OutputStream, StateId, StateTransitionSystem};

use super::sts_build::DEFAULT_BUDGET;
use super::ElabError;

type Frontier = BTreeSet<(StateId, OutputStream)>;
type Relation = BTreeMap<Vec<Option<InputSymbol>>, BTreeSet<OutputStream>>;

pub fn derive_blackbox(sts: &StateTransitionSystem, horizon: usize) -> Result<Behavior, ElabError> {
    derive_blackbox_with(sts, horizon, DEFAULT_BUDGET)
}

/// Per-tick inputs: an idle tick or one symbol of the accepted alphabet.
pub fn tick_inputs(sts: &StateTransitionSystem) -> Vec<Option<InputSymbol>> {
    std::iter::once(None)
        .chain(
            sts.alphabet()
                .iter()
                .filter(|i| sts.accepted().contains(&i.selector))
                .cloned()
                .map(Some),
        )
        .collect()
}

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

struct Search<'a> {
    sts: &'a StateTransitionSystem,
    inputs: &'a [Option<InputSymbol>],
    horizon: usize,
    budget: usize,
    spent: &'a AtomicUsize,
}

impl Search<'_> {
    fn explore(&self, prefix: &mut Vec<Option<InputSymbol>>, frontier: &Frontier, rel: &mut Relation) -> Result<(), ()> {
        let spent = self.spent.fetch_add(frontier.len().max(1), Ordering::Relaxed) + frontier.len().max(1);
        if spent > self.budget {
            return Err(());
        }
        rel.insert(prefix.clone(), frontier.iter().map(|(_, o)| o.clone()).collect());
        if prefix.len() == self.horizon {
            return Ok(());
        }
        for x in self.inputs {
            let next = advance(self.sts, frontier, x.as_ref());
            prefix.push(x.clone());
            let r = self.explore(prefix, &next, rel);
            prefix.pop();
            r?;
        }
        Ok(())
    }
}

/// For every input stream of length at most `horizon` over [`tick_inputs`],
/// the exact set of output streams of runs from any initial state. Fails
/// when more than `budget` (prefix, state, output) nodes would be visited.
/// The first tick is explored in parallel; the result does not depend on the
/// number of threads.
pub fn derive_blackbox_with(sts: &StateTransitionSystem, horizon: usize, budget: usize) -> Result<Behavior, ElabError> {
    let inputs = tick_inputs(sts);
    let root: Frontier = sts.initial().iter().map(|&s| (s, Vec::new())).collect();
    let spent = AtomicUsize::new(root.len());
    let too_large = ElabError::HorizonTooLarge { horizon, budget };
    if root.len() > budget {
        return Err(too_large);
    }
    let mut relation = Relation::new();
    relation.insert(Vec::new(), std::iter::once(Vec::new()).collect());
    if horizon == 0 {
        return Ok(Behavior { horizon, relation });
    }
    let search = Search {
        sts,
        inputs: &inputs,
        horizon,
        budget,
        spent: &spent,
    };
    let parts: Vec<Result<Relation, ()>> = inputs
        .par_iter()
        .map(|x| {
            let mut rel = Relation::new();
            let next = advance(sts, &root, x.as_ref());
            search.explore(&mut vec![x.clone()], &next, &mut rel).map(|_| rel)
        })
        .collect();
    for p in parts {
        relation.extend(p.map_err(|_| too_large.clone())?);
    }
    Ok(Behavior { horizon, relation })
}
