//! State transition systems: the per-class automaton of the system model.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::dsl::UnhandledPolicy;

use super::state::Label;
use super::term::{Bindings, Env, Term};
use super::value::Value;
use super::ModelError;

pub type StateId = usize;

/// A concrete input message as seen by one object: selector and arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct InputSymbol {
    pub selector: String,
    pub args: Vec<Value>,
}

impl InputSymbol {
    pub fn new(selector: impl Into<String>, args: Vec<Value>) -> Self {
        InputSymbol {
            selector: selector.into(),
            args,
        }
    }
}

impl fmt::Display for InputSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(Value::to_string).collect();
        write!(f, "{}({})", self.selector, args.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamPattern {
    Bind(String),
    Lit(Value),
    Wild,
}

/// Input event signature of a transition. An empty parameter list matches
/// any arguments.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventSpec {
    pub selector: String,
    pub params: Vec<ParamPattern>,
}

impl EventSpec {
    pub fn any(selector: impl Into<String>) -> Self {
        EventSpec {
            selector: selector.into(),
            params: Vec::new(),
        }
    }

    pub fn matches(&self, selector: &str, args: &[Value]) -> Option<Bindings> {
        if selector != self.selector {
            return None;
        }
        let mut b = Bindings::new();
        if self.params.is_empty() {
            return Some(b);
        }
        if self.params.len() != args.len() {
            return None;
        }
        for (p, a) in self.params.iter().zip(args) {
            match p {
                ParamPattern::Bind(name) => {
                    b.insert(name.clone(), a.clone());
                }
                ParamPattern::Lit(v) if v != a => return None,
                ParamPattern::Lit(_) | ParamPattern::Wild => {}
            }
        }
        Some(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Trigger {
    /// No input message; fires on its own.
    Spontaneous,
    Event(EventSpec),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SendTargetSpec {
    /// Every member of a link set.
    Link(String),
    /// Object reference bound by the triggering event.
    Binder(String),
    /// Sender of the triggering message.
    Sender,
    /// A freshly created object of the class.
    New(String),
}

impl fmt::Display for SendTargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SendTargetSpec::Link(k) | SendTargetSpec::Binder(k) => write!(f, "{k}"),
            SendTargetSpec::Sender => write!(f, "sender"),
            SendTargetSpec::New(c) => write!(f, "new {c}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SendTemplate {
    pub target: SendTargetSpec,
    pub selector: String,
    pub args: Vec<Term>,
}

impl fmt::Display for SendTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.args.iter().map(Term::to_string).collect();
        write!(f, "{}!{}({})", self.target, self.selector, args.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum TransitionKind {
    /// Derived from a diagram transition.
    Explicit,
    /// Unmatched event, state unchanged.
    Default,
    /// Unmatched event, arbitrary successor and output.
    Chaos,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub source: StateId,
    pub target: StateId,
    pub trigger: Trigger,
    /// Residual guard over event binders; attribute parts are already decided.
    pub guard: Option<Term>,
    pub outputs: Vec<SendTemplate>,
    pub kind: TransitionKind,
    /// Index of the originating flat diagram transition.
    pub origin: Option<usize>,
}

impl Transition {
    pub fn selector(&self) -> Option<&str> {
        match &self.trigger {
            Trigger::Event(e) => Some(&e.selector),
            Trigger::Spontaneous => None,
        }
    }
}

/// One state: a flat control label plus the values of the tracked
/// (guard-relevant) attributes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StsState {
    pub control: usize,
    pub valuation: Vec<Value>,
}

/// Output message as observed in a black-box view: target description,
/// selector and arguments, with unknown arguments kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct OutEvent {
    pub target: String,
    pub selector: String,
    pub args: Vec<OutArg>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum OutArg {
    Val(Value),
    Sym(String),
}

impl fmt::Display for OutEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| match a {
                OutArg::Val(v) => v.to_string(),
                OutArg::Sym(s) => s.clone(),
            })
            .collect();
        write!(f, "{}!{}({})", self.target, self.selector, args.join(","))
    }
}

/// Everything needed to build a [`StateTransitionSystem`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StsParts {
    pub class: String,
    pub labels: Vec<Label>,
    pub tracked: Vec<String>,
    pub states: Vec<StsState>,
    pub initial: BTreeSet<StateId>,
    pub transitions: Vec<Transition>,
    /// Selectors of the class's methods (the input interface).
    pub accepted: BTreeSet<String>,
    /// Finite input alphabet used for black-box enumeration.
    pub alphabet: Vec<InputSymbol>,
    pub policy: UnhandledPolicy,
}

/// Nondeterministic automaton `(states, initial, δ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTransitionSystem {
    parts: StsParts,
    outgoing: Vec<Vec<usize>>,
    index: HashMap<(usize, Vec<Value>), StateId>,
}

/// Evaluation environment for one state and one event binding.
struct StepEnv<'a> {
    tracked: &'a [String],
    valuation: &'a [Value],
    bindings: &'a Bindings,
    ext: Option<&'a dyn Env>,
}

impl Env for StepEnv<'_> {
    fn attr(&self, name: &str) -> Option<Value> {
        match self.tracked.iter().position(|t| t == name) {
            Some(i) => Some(self.valuation[i].clone()),
            None => self.ext.and_then(|e| e.attr(name)),
        }
    }
    fn binder(&self, name: &str) -> Option<Value> {
        self.bindings.get(name).cloned()
    }
    fn link_count(&self, key: &str) -> Option<i64> {
        self.ext.and_then(|e| e.link_count(key))
    }
    fn self_id(&self) -> Option<Value> {
        self.ext.and_then(|e| e.self_id())
    }
    fn sender(&self) -> Option<Value> {
        self.ext.and_then(|e| e.sender())
    }
}

impl StateTransitionSystem {
    pub fn from_parts(parts: StsParts) -> Result<Self, ModelError> {
        let bad = |m: String| Err(ModelError::InvalidSts(m));
        if parts.initial.is_empty() {
            return bad("no initial state".into());
        }
        let n = parts.states.len();
        let mut index = HashMap::new();
        for (i, s) in parts.states.iter().enumerate() {
            if s.control >= parts.labels.len() {
                return bad(format!("state {i} has no label"));
            }
            if s.valuation.len() != parts.tracked.len() {
                return bad(format!("state {i} valuation arity"));
            }
            if index.insert((s.control, s.valuation.clone()), i).is_some() {
                return bad(format!("state {i} duplicated"));
            }
        }
        if let Some(i) = parts.initial.iter().find(|i| **i >= n) {
            return bad(format!("initial state {i} out of range"));
        }
        let mut outgoing = vec![Vec::new(); n];
        for (k, t) in parts.transitions.iter().enumerate() {
            if t.source >= n || t.target >= n {
                return bad(format!("transition {k} endpoint out of range"));
            }
            outgoing[t.source].push(k);
        }
        Ok(StateTransitionSystem {
            parts,
            outgoing,
            index,
        })
    }

    pub fn into_parts(self) -> StsParts {
        self.parts
    }

    pub fn parts(&self) -> &StsParts {
        &self.parts
    }

    pub fn class(&self) -> &str {
        &self.parts.class
    }

    pub fn labels(&self) -> &[Label] {
        &self.parts.labels
    }

    pub fn tracked(&self) -> &[String] {
        &self.parts.tracked
    }

    pub fn states(&self) -> &[StsState] {
        &self.parts.states
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.parts.initial
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.parts.transitions
    }

    pub fn accepted(&self) -> &BTreeSet<String> {
        &self.parts.accepted
    }

    pub fn alphabet(&self) -> &[InputSymbol] {
        &self.parts.alphabet
    }

    pub fn policy(&self) -> UnhandledPolicy {
        self.parts.policy
    }

    pub fn label(&self, s: StateId) -> &Label {
        &self.parts.labels[self.parts.states[s].control]
    }

    pub fn find_state(&self, control: usize, valuation: &[Value]) -> Option<StateId> {
        self.index.get(&(control, valuation.to_vec())).copied()
    }

    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = (usize, &Transition)> {
        self.outgoing[s].iter().map(move |&k| (k, &self.parts.transitions[k]))
    }

    fn guard_ok(&self, t: &Transition, s: StateId, b: &Bindings, ext: Option<&dyn Env>) -> bool {
        match &t.guard {
            None => true,
            Some(g) => {
                let env = StepEnv {
                    tracked: &self.parts.tracked,
                    valuation: &self.parts.states[s].valuation,
                    bindings: b,
                    ext,
                };
                g.holds(&env) == Some(true)
            }
        }
    }

    /// Transitions that may fire in state `s` on `input` (or spontaneously
    /// when `input` is `None`), with the bindings of the matched event.
    ///
    /// Default and chaos transitions are candidates only when no explicit
    /// transition matches. `ext` supplies untracked attributes, link counts
    /// and identities when running inside a world.
    pub fn fire_options(
        &self,
        s: StateId,
        input: Option<(&str, &[Value])>,
        ext: Option<&dyn Env>,
    ) -> Vec<(usize, Bindings)> {
        match input {
            None => self
                .outgoing(s)
                .filter(|(_, t)| t.kind == TransitionKind::Explicit && t.trigger == Trigger::Spontaneous)
                .filter(|(_, t)| self.guard_ok(t, s, &Bindings::new(), ext))
                .map(|(k, _)| (k, Bindings::new()))
                .collect(),
            Some((sel, args)) => {
                let mut explicit = Vec::new();
                let mut fallback = Vec::new();
                for (k, t) in self.outgoing(s) {
                    let Trigger::Event(ev) = &t.trigger else { continue };
                    let Some(b) = ev.matches(sel, args) else { continue };
                    if t.kind == TransitionKind::Explicit {
                        if self.guard_ok(t, s, &b, ext) {
                            explicit.push((k, b));
                        }
                    } else {
                        fallback.push((k, b));
                    }
                }
                if explicit.is_empty() {
                    fallback
                } else {
                    explicit
                }
            }
        }
    }

    /// Black-box step from `s`: each option is (transition, successor,
    /// outputs). With no input and no enabled spontaneous transition the
    /// object idles (transition `None`). An input nothing accepts blocks.
    pub fn step(&self, s: StateId, input: Option<&InputSymbol>) -> Vec<(Option<usize>, StateId, Vec<OutEvent>)> {
        let opts = self.fire_options(s, input.map(|i| (i.selector.as_str(), i.args.as_slice())), None);
        if input.is_none() && opts.is_empty() {
            return vec![(None, s, Vec::new())];
        }
        opts.into_iter()
            .map(|(k, b)| {
                let t = &self.parts.transitions[k];
                (Some(k), t.target, self.out_events(k, &b))
            })
            .collect()
    }

    /// Outputs of transition `k` under `bindings`, as symbolic events.
    pub fn out_events(&self, k: usize, bindings: &Bindings) -> Vec<OutEvent> {
        let t = &self.parts.transitions[k];
        let env = StepEnv {
            tracked: &self.parts.tracked,
            valuation: &self.parts.states[t.source].valuation,
            bindings,
            ext: None,
        };
        t.outputs
            .iter()
            .map(|o| {
                let target = match &o.target {
                    SendTargetSpec::Binder(b) => match bindings.get(b) {
                        Some(v) => v.to_string(),
                        None => b.clone(),
                    },
                    other => other.to_string(),
                };
                OutEvent {
                    target,
                    selector: o.selector.clone(),
                    args: o
                        .args
                        .iter()
                        .map(|a| match a.eval(&env) {
                            Some(v) => OutArg::Val(v),
                            None => OutArg::Sym(a.to_string()),
                        })
                        .collect(),
                }
            })
            .collect()
    }

    /// Whether every state reacts to every accepted selector of the input
    /// alphabet: the totality that the ignore policy guarantees.
    pub fn is_input_total(&self) -> bool {
        (0..self.parts.states.len()).all(|s| {
            self.parts
                .alphabet
                .iter()
                .filter(|i| self.parts.accepted.contains(&i.selector))
                .all(|i| !self.step(s, Some(i)).is_empty())
        })
    }
}
