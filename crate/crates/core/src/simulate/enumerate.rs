//! Exhaustive exploration of scheduler and transition choices.

use std::collections::BTreeMap;
use std::ops::ControlFlow;
use std::sync::Arc;

use super::execution::Execution;
use super::world::{Chooser, Policy, System, World};
use super::SimError;

/// Distinct executions up to a horizon. `incomplete` is set when the budget
/// ran out before every choice sequence was explored.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub executions: Vec<Execution>,
    pub incomplete: bool,
    /// Simulated ticks spent, counting one per world initialization.
    pub spent: usize,
}

/// Outcome of [`explore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exploration {
    pub incomplete: bool,
    /// The visitor asked to stop.
    pub stopped: bool,
    pub spent: usize,
    pub runs: usize,
}

/// Depth-first over choice sequences, replaying each from the initial
/// world; `visit` sees every run (duplicates included) in a fixed order and
/// may stop the search. `budget` bounds the total number of simulated ticks.
pub fn explore(
    system: &Arc<System>,
    policy: Policy,
    horizon: usize,
    budget: usize,
    mut visit: impl FnMut(Execution) -> ControlFlow<()>,
) -> Result<Exploration, SimError> {
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    let mut out = Exploration {
        incomplete: false,
        stopped: false,
        spent: 0,
        runs: 0,
    };
    while let Some(script) = stack.pop() {
        if out.spent >= budget {
            out.incomplete = true;
            break;
        }
        let chooser = Chooser::Script {
            script: script.clone(),
            log: Vec::new(),
        };
        let mut world = World::with_chooser(system.clone(), chooser, policy)?.without_trajectory();
        let exec = world.run_in_place(horizon);
        out.spent += exec.ticks + 1;
        out.runs += 1;
        let Chooser::Script { log, .. } = world.into_chooser() else {
            unreachable!("scripted world")
        };
        for i in (script.len()..log.len()).rev() {
            for alt in (1..log[i].1).rev() {
                let mut next: Vec<usize> = log[..i].iter().map(|c| c.0).collect();
                next.push(alt);
                stack.push(next);
            }
        }
        if visit(exec).is_break() {
            out.stopped = true;
            break;
        }
    }
    Ok(out)
}

/// Every distinct execution up to `horizon`, deduplicated by trace and
/// returned in trace order.
pub fn enumerate_executions(
    system: &Arc<System>,
    policy: Policy,
    horizon: usize,
    budget: usize,
) -> Result<Enumeration, SimError> {
    let mut found: BTreeMap<String, Execution> = BTreeMap::new();
    let ex = explore(system, policy, horizon, budget, |exec| {
        found.entry(exec.trace()).or_insert(exec);
        ControlFlow::Continue(())
    })?;
    Ok(Enumeration {
        executions: found.into_values().collect(),
        incomplete: ex.incomplete,
        spent: ex.spent,
    })
}
