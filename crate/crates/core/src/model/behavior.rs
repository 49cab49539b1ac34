use std::collections::{BTreeMap, BTreeSet};

use super::sts::{InputSymbol, OutEvent};

/// One input per time unit; `None` is a tick without input.
pub type InputStream = Vec<Option<InputSymbol>>;
/// The output messages of each time unit.
pub type OutputStream = Vec<Vec<OutEvent>>;

/// Horizon-bounded black-box behavior: for every input stream of length up to
/// the horizon, the set of output streams some run can produce.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Behavior {
    pub horizon: usize,
    pub relation: BTreeMap<InputStream, BTreeSet<OutputStream>>,
}

impl Behavior {
    pub fn outputs(&self, input: &[Option<InputSymbol>]) -> Option<&BTreeSet<OutputStream>> {
        self.relation.get(input)
    }

    /// Restriction to input streams of length at most `h`.
    pub fn restrict(&self, h: usize) -> Behavior {
        Behavior {
            horizon: h.min(self.horizon),
            relation: self
                .relation
                .iter()
                .filter(|(i, _)| i.len() <= h)
                .map(|(i, o)| (i.clone(), o.clone()))
                .collect(),
        }
    }

    /// Outputs for an input of length `n`, truncated to `n - 1` ticks, equal
    /// the outputs recorded for its prefix.
    pub fn is_prefix_consistent(&self) -> bool {
        self.relation.iter().filter(|(i, _)| !i.is_empty()).all(|(i, outs)| {
            let prefix = &i[..i.len() - 1];
            let truncated: BTreeSet<OutputStream> =
                outs.iter().map(|o| o[..o.len() - 1].to_vec()).collect();
            match self.relation.get(prefix) {
                Some(p) => truncated.is_subset(p) && (outs.is_empty() || !p.is_empty()),
                None => false,
            }
        })
    }

    /// Total message count across all output streams of one input.
    pub fn output_set_size(&self, input: &[Option<InputSymbol>]) -> usize {
        self.outputs(input).map_or(0, BTreeSet::len)
    }
}
