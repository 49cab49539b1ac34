//! Statechart flattening: OR-states become unions of their members' state
//! sets, AND-states the product of their regions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::dsl::{EventDecl, Expr, Pos, SendDecl, StateDiagramAst, StateKind, StateNode, UnhandledPolicy};
use crate::model::Label;

use super::ElabError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatTransition {
    pub source: usize,
    pub target: usize,
    pub event: Option<EventDecl>,
    pub guard: Option<Expr>,
    pub sends: Vec<SendDecl>,
    /// Index of the diagram transition this one was expanded from.
    pub origin: usize,
    pub pos: Pos,
}

/// A diagram without composite states. Each label lists the active leaf
/// states of one configuration in document order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlatStateDiagram {
    pub owner: Option<String>,
    pub policy: UnhandledPolicy,
    pub labels: Vec<Label>,
    pub initial: Vec<usize>,
    pub transitions: Vec<FlatTransition>,
}

impl FlatStateDiagram {
    pub fn label_index(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Leaf names reachable from the initial labels.
    pub fn reachable_leaves(&self) -> BTreeSet<String> {
        let mut seen = vec![false; self.labels.len()];
        let mut stack = self.initial.clone();
        for &i in &stack {
            seen[i] = true;
        }
        while let Some(s) = stack.pop() {
            for t in self.transitions.iter().filter(|t| t.source == s) {
                if !seen[t.target] {
                    seen[t.target] = true;
                    stack.push(t.target);
                }
            }
        }
        (0..self.labels.len())
            .filter(|&i| seen[i])
            .flat_map(|i| self.labels[i].0.iter().cloned())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Simple,
    Or,
    And,
}

struct Node {
    name: String,
    kind: Kind,
    children: Vec<usize>,
    initial: Option<usize>,
    parent: Option<usize>,
}

/// Node arena; index 0 is the implicit root OR-state.
struct Tree {
    nodes: Vec<Node>,
    /// Preorder rank of each node, used to order leaves in labels.
    rank: Vec<usize>,
}

impl Tree {
    fn build(ast: &StateDiagramAst) -> Tree {
        let mut tree = Tree {
            nodes: vec![Node {
                name: ast.owner.clone().unwrap_or_else(|| "<top>".into()),
                kind: Kind::Or,
                children: Vec::new(),
                initial: None,
                parent: None,
            }],
            rank: vec![0],
        };
        let kids: Vec<usize> = ast.states.iter().map(|s| tree.add(s, 0)).collect();
        tree.nodes[0].initial = ast
            .initial
            .as_ref()
            .and_then(|i| kids.iter().copied().find(|&k| tree.nodes[k].name == *i));
        tree.nodes[0].children = kids;
        tree
    }

    fn add(&mut self, s: &StateNode, parent: usize) -> usize {
        let id = self.nodes.len();
        let kind = match s.kind {
            StateKind::Simple => Kind::Simple,
            StateKind::Or { .. } => Kind::Or,
            StateKind::And { .. } => Kind::And,
        };
        self.nodes.push(Node {
            name: s.name.clone(),
            kind,
            children: Vec::new(),
            initial: None,
            parent: Some(parent),
        });
        self.rank.push(id);
        let kids: Vec<usize> = s.children().iter().map(|c| self.add(c, id)).collect();
        if let StateKind::Or { initial: Some(i), .. } = &s.kind {
            self.nodes[id].initial = kids.iter().copied().find(|&k| self.nodes[k].name == *i);
        }
        self.nodes[id].children = kids;
        id
    }

    fn find(&self, name: &str) -> Option<usize> {
        (1..self.nodes.len()).find(|&i| self.nodes[i].name == name)
    }

    fn is_ancestor(&self, a: usize, mut n: usize) -> bool {
        loop {
            if n == a {
                return true;
            }
            match self.nodes[n].parent {
                Some(p) => n = p,
                None => return false,
            }
        }
    }

    /// Leaf sets of all configurations of `n`.
    fn configs(&self, n: usize) -> Vec<Vec<usize>> {
        let node = &self.nodes[n];
        match node.kind {
            Kind::Simple => vec![vec![n]],
            Kind::Or => node.children.iter().flat_map(|&c| self.configs(c)).collect(),
            Kind::And => node.children.iter().fold(vec![Vec::new()], |acc, &r| {
                let rc = self.configs(r);
                acc.iter()
                    .flat_map(|a| {
                        rc.iter().map(move |b| {
                            let mut v = a.clone();
                            v.extend(b);
                            v
                        })
                    })
                    .collect()
            }),
        }
    }

    fn no_initial(&self, n: usize) -> ElabError {
        ElabError::NoInitial {
            composite: self.nodes[n].name.clone(),
        }
    }

    /// Leaves of the default configuration of `n`.
    fn entry(&self, n: usize) -> Result<Vec<usize>, ElabError> {
        let node = &self.nodes[n];
        match node.kind {
            Kind::Simple => Ok(vec![n]),
            Kind::Or => self.entry(node.initial.ok_or_else(|| self.no_initial(n))?),
            Kind::And => {
                let mut out = Vec::new();
                for &r in &node.children {
                    out.extend(self.entry(r)?);
                }
                Ok(out)
            }
        }
    }

    /// Leaves entered when descending from `n` towards its descendant `d`,
    /// with default entry everywhere off the path.
    fn enter_towards(&self, n: usize, d: usize) -> Result<Vec<usize>, ElabError> {
        if n == d {
            return self.entry(n);
        }
        let node = &self.nodes[n];
        match node.kind {
            Kind::Simple => Ok(vec![n]),
            Kind::Or => {
                let c = node.children.iter().copied().find(|&c| self.is_ancestor(c, d)).expect("path child");
                self.enter_towards(c, d)
            }
            Kind::And => {
                let mut out = Vec::new();
                for &r in &node.children {
                    if self.is_ancestor(r, d) {
                        out.extend(self.enter_towards(r, d)?);
                    } else {
                        out.extend(self.entry(r)?);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Lowest OR-state that is a proper ancestor of both `s` and `d`.
    fn scope(&self, s: usize, d: usize) -> usize {
        let mut n = self.nodes[s].parent.unwrap_or(0);
        loop {
            if self.nodes[n].kind == Kind::Or && self.is_ancestor(n, d) && n != d {
                return n;
            }
            n = self.nodes[n].parent.unwrap_or(0);
        }
    }

    fn label(&self, leaves: &[usize]) -> Label {
        let mut l = leaves.to_vec();
        l.sort_by_key(|&x| self.rank[x]);
        Label(l.into_iter().map(|x| self.nodes[x].name.clone()).collect())
    }
}

/// Flattens a resolved state diagram. Transitions leaving a composite state
/// are expanded to every configuration inside it; transitions entering one
/// land in its default configuration.
pub fn flatten(ast: &StateDiagramAst) -> Result<FlatStateDiagram, ElabError> {
    let tree = Tree::build(ast);
    for (i, n) in tree.nodes.iter().enumerate() {
        if n.kind == Kind::Or && n.initial.is_none() && (i > 0 || !n.children.is_empty()) {
            return Err(tree.no_initial(i));
        }
    }
    let configs = if tree.nodes[0].children.is_empty() {
        Vec::new()
    } else {
        tree.configs(0)
    };
    let labels: Vec<Label> = configs.iter().map(|c| tree.label(c)).collect();
    let index_of = |leaves: &[usize]| {
        let l = tree.label(leaves);
        labels.iter().position(|x| *x == l).expect("configuration label")
    };
    let initial = if configs.is_empty() {
        Vec::new()
    } else {
        vec![index_of(&tree.entry(0)?)]
    };

    let mut transitions = Vec::new();
    for (k, t) in ast.transitions.iter().enumerate() {
        let unknown = |n: &str| ElabError::UnknownName {
            name: n.to_string(),
            pos: t.pos,
        };
        let s = tree.find(&t.source).ok_or_else(|| unknown(&t.source))?;
        let d = tree.find(&t.target).ok_or_else(|| unknown(&t.target))?;
        let scope = tree.scope(s, d);
        let entered = tree.enter_towards(scope, d)?;
        for (ci, c) in configs.iter().enumerate() {
            if !c.iter().any(|&leaf| tree.is_ancestor(s, leaf)) {
                continue;
            }
            let mut next: Vec<usize> = c.iter().copied().filter(|&leaf| !tree.is_ancestor(scope, leaf)).collect();
            next.extend(&entered);
            transitions.push(FlatTransition {
                source: ci,
                target: index_of(&next),
                event: t.event.clone(),
                guard: t.guard.clone(),
                sends: t.sends.clone(),
                origin: k,
                pos: t.pos,
            });
        }
    }
    Ok(FlatStateDiagram {
        owner: ast.owner.clone(),
        policy: ast.unhandled.unwrap_or_default(),
        labels,
        initial,
        transitions,
    })
}
