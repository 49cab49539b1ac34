//! Random generators and independent oracles shared by the integration
//! tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use umlsem::dsl::{
    parse_class_model, parse_snapshot, parse_state_diagram, StateDiagramAst, StateKind, StateNode, TransitionDecl,
    UnhandledPolicy,
};
use umlsem::elaborate::{automata, compile_diagram, elaborate_static, BuildOptions, StaticModel};
use umlsem::model::{InputSymbol, StateTransitionSystem};
use umlsem::simulate::{EventKind, Execution, System};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// Flat machines
// ---------------------------------------------------------------------------

pub const OUTPUTS: [&str; 3] = ["x", "y", "z"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trans {
    pub src: usize,
    pub tgt: usize,
    /// Input index; `None` is spontaneous.
    pub trigger: Option<usize>,
    /// Required value of the attribute `m`, if guarded.
    pub guard: Option<i64>,
    pub outs: Vec<&'static str>,
}

/// A flat state machine of class `P` with inputs `i0..`, sending to the
/// single `Q` object linked under `out`.
#[derive(Debug, Clone)]
pub struct Machine {
    pub states: usize,
    pub inputs: usize,
    pub trans: Vec<Trans>,
}

impl Machine {
    pub fn random(r: &mut ChaCha8Rng, max_states: usize, max_inputs: usize, guards: bool) -> Machine {
        let states = r.gen_range(1..=max_states);
        let inputs = r.gen_range(1..=max_inputs);
        let n = r.gen_range(0..=states * (inputs + 1));
        let trans = (0..n).map(|_| Machine::random_trans(r, states, inputs, guards)).collect();
        Machine { states, inputs, trans }
    }

    fn random_trans(r: &mut ChaCha8Rng, states: usize, inputs: usize, guards: bool) -> Trans {
        let trigger = if r.gen_bool(0.2) { None } else { Some(r.gen_range(0..inputs)) };
        let outs = (0..r.gen_range(0..=2)).map(|_| OUTPUTS[r.gen_range(0..2)]).collect();
        Trans {
            src: r.gen_range(0..states),
            tgt: r.gen_range(0..states),
            trigger,
            guard: (guards && r.gen_bool(0.3)).then(|| r.gen_range(0..=1)),
            outs,
        }
    }

    /// Adds a transition sharing source and trigger with an existing
    /// triggered one, so the machine is nondeterministic.
    pub fn with_branch(mut self, r: &mut ChaCha8Rng) -> Machine {
        let src = r.gen_range(0..self.states);
        let trigger = Some(r.gen_range(0..self.inputs));
        for k in 0..2 {
            self.trans.push(Trans {
                src,
                tgt: r.gen_range(0..self.states),
                trigger,
                guard: None,
                outs: vec![OUTPUTS[k]],
            });
        }
        self
    }

    pub fn model_text(&self) -> String {
        let ops: String = (0..self.inputs).map(|i| format!(" op i{i}()")).collect();
        format!(
            "class P {{ attr m: int in 0..1{ops} }}\nclass Q {{ op x() op y() op z() }}\nassoc out P[0..1] -- Q[0..1]\n"
        )
    }

    pub fn diagram_text(&self, policy: UnhandledPolicy) -> String {
        let p = match policy {
            UnhandledPolicy::Ignore => "ignore",
            UnhandledPolicy::Chaos => "chaos",
        };
        let mut s = format!("statechart P unhandled {p}\ninitial S0\n");
        for i in 0..self.states {
            s.push_str(&format!("state S{i}\n"));
        }
        for t in &self.trans {
            s.push_str(&format!("trans S{} -> S{}", t.src, t.tgt));
            if let Some(e) = t.trigger {
                s.push_str(&format!(" on i{e}"));
            }
            if let Some(g) = t.guard {
                s.push_str(&format!(" [m == {g}]"));
            }
            if !t.outs.is_empty() {
                let sends: Vec<String> = t.outs.iter().map(|o| format!("out!{o}()")).collect();
                s.push_str(&format!(" / {}", sends.join(", ")));
            }
            s.push('\n');
        }
        s
    }

    pub fn static_model(&self) -> StaticModel {
        elaborate_static(&parse_class_model(&self.model_text()).unwrap()).unwrap()
    }

    pub fn sts(&self, policy: UnhandledPolicy) -> StateTransitionSystem {
        let model = self.static_model();
        let d = parse_state_diagram(&self.diagram_text(policy)).unwrap();
        compile_diagram(&d, &model, "P", &BuildOptions::default()).unwrap()
    }

    /// Symbol of input `i` in the automaton's alphabet.
    pub fn symbol(i: usize) -> InputSymbol {
        InputSymbol::new(format!("i{i}"), Vec::new())
    }

    /// Successors under ignore semantics, for an unguarded machine: an
    /// input no transition takes leaves the state alone; without input, a
    /// spontaneous transition must fire if there is one.
    pub fn step(&self, s: usize, input: Option<usize>) -> Vec<(usize, Vec<String>)> {
        let fire: Vec<(usize, Vec<String>)> = self
            .trans
            .iter()
            .filter(|t| t.src == s && t.trigger == input)
            .map(|t| (t.tgt, t.outs.iter().map(|o| o.to_string()).collect()))
            .collect();
        if fire.is_empty() {
            vec![(s, Vec::new())]
        } else {
            fire
        }
    }

    /// Output streams (selectors per tick) of every run on `input`, found by
    /// enumerating runs one by one.
    pub fn outputs(&self, input: &[Option<usize>]) -> BTreeSet<Vec<Vec<String>>> {
        fn go(m: &Machine, s: usize, rest: &[Option<usize>], acc: &mut Vec<Vec<String>>, out: &mut BTreeSet<Vec<Vec<String>>>) {
            let Some((x, tail)) = rest.split_first() else {
                out.insert(acc.clone());
                return;
            };
            for (s2, o) in m.step(s, *x) {
                acc.push(o);
                go(m, s2, tail, acc, out);
                acc.pop();
            }
        }
        let mut out = BTreeSet::new();
        go(self, 0, input, &mut Vec::new(), &mut out);
        out
    }

    /// Every input stream of length at most `h`.
    pub fn input_streams(&self, h: usize) -> Vec<Vec<Option<usize>>> {
        let alphabet: Vec<Option<usize>> = std::iter::once(None).chain((0..self.inputs).map(Some)).collect();
        let mut all = vec![Vec::new()];
        let mut level = vec![Vec::new()];
        for _ in 0..h {
            let mut next = Vec::new();
            for p in &level {
                for x in &alphabet {
                    let mut q: Vec<Option<usize>> = p.clone();
                    q.push(*x);
                    next.push(q);
                }
            }
            all.extend(next.iter().cloned());
            level = next;
        }
        all
    }

    /// Brute-force refinement: on every input up to `h`, each output stream
    /// of `self` is one of `abs`.
    pub fn refines(&self, abs: &Machine, h: usize) -> bool {
        assert_eq!(self.inputs, abs.inputs);
        self.input_streams(h)
            .iter()
            .all(|i| self.outputs(i).is_subset(&abs.outputs(i)))
    }

    /// States reachable within `h` ticks.
    pub fn reachable(&self, h: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([0]);
        let mut frontier = vec![0];
        for _ in 0..h {
            let mut next = Vec::new();
            for &s in &frontier {
                for x in std::iter::once(None).chain((0..self.inputs).map(Some)) {
                    for (s2, _) in self.step(s, x) {
                        if seen.insert(s2) {
                            next.push(s2);
                        }
                    }
                }
            }
            frontier = next;
        }
        seen
    }

    /// Indices of transitions sharing source and trigger with another one.
    pub fn nondeterministic(&self) -> Vec<usize> {
        (0..self.trans.len())
            .filter(|&k| {
                let t = &self.trans[k];
                self.trans
                    .iter()
                    .enumerate()
                    .any(|(j, u)| j != k && u.src == t.src && u.trigger == t.trigger && u.guard.is_none() && t.guard.is_none())
            })
            .collect()
    }
}

/// Selector-only view of an automaton output stream.
pub fn selectors(o: &[Vec<umlsem::model::OutEvent>]) -> Vec<Vec<String>> {
    o.iter().map(|tick| tick.iter().map(|e| e.selector.clone()).collect()).collect()
}

pub fn to_symbols(input: &[Option<usize>]) -> Vec<Option<InputSymbol>> {
    input.iter().map(|x| x.map(Machine::symbol)).collect()
}

// ---------------------------------------------------------------------------
// Hierarchical diagrams
// ---------------------------------------------------------------------------

/// Builds a random hierarchical diagram with unique state names and random
/// transitions between arbitrary states.
pub fn random_chart(r: &mut ChaCha8Rng) -> StateDiagramAst {
    fn node(r: &mut ChaCha8Rng, depth: usize, next: &mut usize) -> StateNode {
        let name = format!("N{next}");
        *next += 1;
        let roll = if depth >= 3 { 0 } else { r.gen_range(0..6) };
        let kind = match roll {
            0..=2 => StateKind::Simple,
            3 | 4 => {
                let children: Vec<StateNode> = (0..r.gen_range(1..=3)).map(|_| node(r, depth + 1, next)).collect();
                let initial = Some(children[r.gen_range(0..children.len())].name.clone());
                StateKind::Or { initial, children }
            }
            _ => {
                let regions = (0..r.gen_range(1..=3))
                    .map(|_| {
                        let name = format!("N{next}");
                        *next += 1;
                        let children: Vec<StateNode> =
                            (0..r.gen_range(1..=2)).map(|_| node(r, depth + 1, next)).collect();
                        let initial = Some(children[r.gen_range(0..children.len())].name.clone());
                        StateNode {
                            name,
                            anonymous: false,
                            kind: StateKind::Or { initial, children },
                            pos: Default::default(),
                        }
                    })
                    .collect();
                StateKind::And { regions }
            }
        };
        StateNode {
            name,
            anonymous: false,
            kind,
            pos: Default::default(),
        }
    }
    let mut next = 0;
    let states: Vec<StateNode> = (0..r.gen_range(1..=4)).map(|_| node(r, 1, &mut next)).collect();
    let initial = Some(states[r.gen_range(0..states.len())].name.clone());
    let mut d = StateDiagramAst {
        owner: Some("P".into()),
        unhandled: None,
        states,
        initial,
        transitions: Vec::new(),
    };
    let names: Vec<String> = d.walk().iter().map(|n| n.name.clone()).collect();
    for _ in 0..r.gen_range(0..=names.len() + 2) {
        d.transitions.push(TransitionDecl {
            source: names[r.gen_range(0..names.len())].clone(),
            target: names[r.gen_range(0..names.len())].clone(),
            event: None,
            guard: None,
            sends: Vec::new(),
            pos: Default::default(),
        });
    }
    d
}

/// Number of configurations: one per simple state, summed over OR-states,
/// multiplied over AND-regions.
pub fn count_configurations(d: &StateDiagramAst) -> usize {
    fn count(n: &StateNode) -> usize {
        match &n.kind {
            StateKind::Simple => 1,
            StateKind::Or { children, .. } => children.iter().map(count).sum(),
            StateKind::And { regions } => regions.iter().map(count).product(),
        }
    }
    d.states.iter().map(count).sum()
}

/// Hierarchical semantics computed on the tree itself: a configuration is a
/// set of active leaves; a transition from `s` to `d` is enabled when a leaf
/// below `s` is active, exits everything below the lowest OR-state properly
/// containing both, and enters `d` through its ancestors.
pub struct Chart<'a> {
    parent: BTreeMap<&'a str, Option<&'a StateNode>>,
    nodes: BTreeMap<&'a str, &'a StateNode>,
    root: &'a [StateNode],
    root_initial: &'a str,
}

impl<'a> Chart<'a> {
    pub fn new(d: &'a StateDiagramAst) -> Chart<'a> {
        fn index<'a>(n: &'a StateNode, p: Option<&'a StateNode>, c: &mut Chart<'a>) {
            c.parent.insert(&n.name, p);
            c.nodes.insert(&n.name, n);
            for k in n.children() {
                index(k, Some(n), c);
            }
        }
        let mut c = Chart {
            parent: BTreeMap::new(),
            nodes: BTreeMap::new(),
            root: &d.states,
            root_initial: d.initial.as_deref().unwrap(),
        };
        for s in &d.states {
            index(s, None, &mut c);
        }
        c
    }

    fn leaves(&self, n: &'a StateNode, out: &mut BTreeSet<String>) {
        if n.children().is_empty() && matches!(n.kind, StateKind::Simple) {
            out.insert(n.name.clone());
        }
        for c in n.children() {
            self.leaves(c, out);
        }
    }

    fn default_entry(&self, n: &'a StateNode, out: &mut BTreeSet<String>) {
        match &n.kind {
            StateKind::Simple => {
                out.insert(n.name.clone());
            }
            StateKind::Or { initial, .. } => self.default_entry(self.nodes[initial.as_deref().unwrap()], out),
            StateKind::And { regions } => regions.iter().for_each(|r| self.default_entry(r, out)),
        }
    }

    /// Ancestors of `n`, innermost first, excluding `n`.
    fn ancestors(&self, n: &str) -> Vec<&'a StateNode> {
        let mut out = Vec::new();
        let mut cur = self.parent[n];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p.name.as_str()];
        }
        out
    }

    fn below(&self, a: &str, n: &str) -> bool {
        a == n || self.ancestors(n).iter().any(|x| x.name == a)
    }

    pub fn initial(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.default_entry(self.nodes[self.root_initial], &mut out);
        out
    }

    /// Enters `d` from just inside `scope` (`None` is the diagram root).
    fn enter(&self, scope: Option<&'a StateNode>, d: &str) -> BTreeSet<String> {
        // path from the scope's child down to d
        let mut path: Vec<&'a StateNode> = self.ancestors(d).into_iter().rev().collect();
        if let Some(s) = scope {
            let i = path.iter().position(|p| p.name == s.name).unwrap();
            path.drain(..=i);
        }
        path.push(self.nodes[d]);
        let mut out = BTreeSet::new();
        for (i, p) in path.iter().enumerate() {
            let last = i + 1 == path.len();
            if last {
                self.default_entry(p, &mut out);
            } else if let StateKind::And { regions } = &p.kind {
                for r in regions {
                    if r.name != path[i + 1].name {
                        self.default_entry(r, &mut out);
                    }
                }
            }
        }
        out
    }

    pub fn fire(&self, config: &BTreeSet<String>, s: &str, d: &str) -> Option<BTreeSet<String>> {
        if !config.iter().any(|l| self.below(s, l)) {
            return None;
        }
        let scope = self
            .ancestors(s)
            .into_iter()
            .find(|a| matches!(a.kind, StateKind::Or { .. }) && a.name != d && self.below(&a.name, d));
        let mut next: BTreeSet<String> = match scope {
            Some(sc) => {
                let mut inside = BTreeSet::new();
                self.leaves(sc, &mut inside);
                config.difference(&inside).cloned().collect()
            }
            None => BTreeSet::new(),
        };
        next.extend(self.enter(scope, d));
        Some(next)
    }

    /// Leaves of every configuration reachable from the initial one.
    pub fn reachable_leaves(&self, d: &StateDiagramAst) -> BTreeSet<String> {
        let start = self.initial();
        let mut seen = BTreeSet::from([start.clone()]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for t in &d.transitions {
                if let Some(n) = self.fire(&c, &t.source, &t.target) {
                    if seen.insert(n.clone()) {
                        queue.push_back(n);
                    }
                }
            }
        }
        let _ = self.root;
        seen.into_iter().flatten().collect()
    }
}

// ---------------------------------------------------------------------------
// Closed systems and medium axioms
// ---------------------------------------------------------------------------

/// A random closed system: up to six `N` objects, each linked to one
/// successor, all running one random diagram of up to five states that
/// forwards and answers `m0..m2` messages.
pub fn random_system(r: &mut ChaCha8Rng) -> std::sync::Arc<System> {
    let model_text = "class N { op m0(int) op m1(int) op m2(int) }\nassoc next N[0..*] -- N[0..*]\n";
    let model = elaborate_static(&parse_class_model(model_text).unwrap()).unwrap();
    let states = r.gen_range(1..=5);
    let mut d = String::from("statechart N\ninitial S0\n");
    for i in 0..states {
        d.push_str(&format!("state S{i}\n"));
    }
    for _ in 0..r.gen_range(1..=states * 3) {
        let (s, t) = (r.gen_range(0..states), r.gen_range(0..states));
        let sel = format!("m{}", r.gen_range(0..3));
        let target = if r.gen_bool(0.3) { "sender" } else { "next" };
        match r.gen_range(0..3) {
            0 => d.push_str(&format!("trans S{s} -> S{t} / next!{sel}({})\n", r.gen_range(0..5))),
            1 => d.push_str(&format!("trans S{s} -> S{t} on m{}(v) / {target}!{sel}(v + 1)\n", r.gen_range(0..3))),
            _ => d.push_str(&format!("trans S{s} -> S{t} on m{}(_)\n", r.gen_range(0..3))),
        }
    }
    let objects = r.gen_range(1..=6);
    let mut snap = String::new();
    for i in 0..objects {
        snap.push_str(&format!("obj o{i}: N {{}}\n"));
    }
    for i in 0..objects {
        snap.push_str(&format!("link next o{i} -> o{}\n", r.gen_range(0..objects)));
    }
    let diagram = parse_state_diagram(&d).unwrap();
    let stss = automata(&model, &[diagram], &BuildOptions::default()).unwrap();
    System::new(model, &parse_snapshot(&snap).unwrap(), stss).unwrap()
}

/// Per-pair FIFO order, conservation and immutability of messages, checked
/// on the trace events of an execution.
pub fn medium_axioms(exec: &Execution) -> Result<(), String> {
    type Key = (String, String);
    let mut sent: BTreeMap<u64, (usize, Key, Option<String>, Vec<umlsem::model::Value>)> = BTreeMap::new();
    let mut per_pair_sent: BTreeMap<Key, Vec<u64>> = BTreeMap::new();
    let mut per_pair_delivered: BTreeMap<Key, Vec<u64>> = BTreeMap::new();
    let mut delivered = BTreeSet::new();
    for e in &exec.events {
        let key = (e.from.to_string(), e.to.to_string());
        match e.kind {
            EventKind::Send => {
                let seq = e.seq.ok_or("send without sequence number")?;
                if sent.insert(seq, (e.tick, key.clone(), e.selector.clone(), e.args.clone())).is_some() {
                    return Err(format!("sequence number {seq} sent twice"));
                }
                per_pair_sent.entry(key).or_default().push(seq);
            }
            EventKind::Deliver => {
                let seq = e.seq.ok_or("delivery without sequence number")?;
                let Some((tick, k, sel, args)) = sent.get(&seq) else {
                    return Err(format!("message {seq} delivered but never sent"));
                };
                if !delivered.insert(seq) {
                    return Err(format!("message {seq} delivered twice"));
                }
                if *k != key || *sel != e.selector || *args != e.args {
                    return Err(format!("message {seq} changed in transit"));
                }
                if e.tick <= *tick {
                    return Err(format!("message {seq} delivered in the tick it was sent"));
                }
                per_pair_delivered.entry(key).or_default().push(seq);
            }
            _ => {}
        }
    }
    for (pair, got) in &per_pair_delivered {
        let order = &per_pair_sent[pair];
        if order[..got.len()] != got[..] {
            return Err(format!("FIFO order broken between {} and {}", pair.0, pair.1));
        }
    }
    if sent.len() != delivered.len() + exec.in_flight.len() {
        return Err(format!(
            "{} sent, {} delivered, {} in flight",
            sent.len(),
            delivered.len(),
            exec.in_flight.len()
        ));
    }
    let mut pending: Vec<(String, String, String, Vec<umlsem::model::Value>)> = sent
        .iter()
        .filter(|(s, _)| !delivered.contains(*s))
        .map(|(_, (_, k, sel, a))| (k.0.clone(), k.1.clone(), sel.clone().unwrap_or_default(), a.clone()))
        .collect();
    let mut flying: Vec<(String, String, String, Vec<umlsem::model::Value>)> = exec
        .in_flight
        .iter()
        .map(|m| (m.sender.to_string(), m.receiver.to_string(), m.selector.clone(), m.args.clone()))
        .collect();
    pending.sort();
    flying.sort();
    if pending != flying {
        return Err("undelivered messages differ from those in flight".into());
    }
    Ok(())
}
