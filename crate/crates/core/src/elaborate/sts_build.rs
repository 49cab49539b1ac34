//! Flat state diagram + static model → state transition system.

use std::collections::{BTreeMap, BTreeSet};

use crate::dsl::{Expr, Literal, Pattern, Pos, SendDecl, SendTarget, UnhandledPolicy};
use crate::model::{
    EventSpec, InputSymbol, Label, ObjectId, ParamPattern, SendTargetSpec, SendTemplate, Signature, StateTransitionSystem,
    StsParts, StsState, Term, Transition, TransitionKind, Trigger, Value, ValueType,
};

use super::flatten::FlatStateDiagram;
use super::static_model::StaticModel;
use super::terms::{compile, literal_value, Scope, Ty};
use super::ElabError;

/// Default bound on the number of concrete transitions.
pub const DEFAULT_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Overrides the diagram's unhandled-event policy.
    pub policy: Option<UnhandledPolicy>,
    pub budget: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            policy: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Attributes, event binders, `self` and `sender` of one transition.
struct TransScope<'a> {
    sig: &'a Signature,
    binders: &'a BTreeMap<String, Ty>,
}

impl Scope for TransScope<'_> {
    fn name(&self, name: &str) -> Option<(Term, Ty)> {
        if let Some(ty) = self.binders.get(name) {
            return Some((Term::Binder(name.to_string()), *ty));
        }
        match name {
            "self" => Some((Term::SelfRef, Ty::Ref)),
            "sender" => Some((Term::Sender, Ty::Ref)),
            _ => {
                let a = self.sig.attributes.get(name)?;
                Some((Term::Attr(name.to_string()), Ty::of(&a.ty)))
            }
        }
    }

    fn link_key(&self, key: &str) -> Result<String, String> {
        Err(format!("link-set cardinality `#{key}` is not available in transitions"))
    }
}

fn type_error(pos: Pos, message: String) -> ElabError {
    ElabError::GuardTypeError { message, pos }
}

fn value_matches(v: &Value, t: &ValueType) -> bool {
    matches!(
        (v, t),
        (Value::Int(_), ValueType::Int) | (Value::Bool(_), ValueType::Bool) | (Value::Str(_), ValueType::Str)
    )
}

/// One flat transition after name resolution and typing.
struct Compiled {
    trigger: Trigger,
    guard: Option<Term>,
    outputs: Vec<SendTemplate>,
}

struct Builder<'a> {
    model: &'a StaticModel,
    class: &'a str,
    sig: &'a Signature,
}

impl Builder<'_> {
    fn compile_transition(&self, ft: &super::flatten::FlatTransition) -> Result<Compiled, ElabError> {
        let mut binders = BTreeMap::new();
        let trigger = match &ft.event {
            None => Trigger::Spontaneous,
            Some(ev) => {
                let m = self.sig.methods.get(&ev.selector).ok_or_else(|| ElabError::UnknownSelector {
                    selector: ev.selector.clone(),
                    class: self.class.to_string(),
                    pos: ev.pos,
                })?;
                if !ev.params.is_empty() && ev.params.len() != m.params.len() {
                    return Err(type_error(
                        ev.pos,
                        format!(
                            "event `{}` has {} parameters, the method takes {}",
                            ev.selector,
                            ev.params.len(),
                            m.params.len()
                        ),
                    ));
                }
                let mut params = Vec::new();
                for (p, ty) in ev.params.iter().zip(&m.params) {
                    params.push(match p {
                        Pattern::Wild => ParamPattern::Wild,
                        Pattern::Bind(b) => {
                            binders.insert(b.clone(), Ty::of(ty));
                            ParamPattern::Bind(b.clone())
                        }
                        Pattern::Lit(l) => {
                            let v = literal_value(l)
                                .filter(|v| value_matches(v, ty))
                                .ok_or_else(|| type_error(ev.pos, format!("pattern does not match parameter type {ty}")))?;
                            ParamPattern::Lit(v)
                        }
                    });
                }
                Trigger::Event(EventSpec {
                    selector: ev.selector.clone(),
                    params,
                })
            }
        };
        let scope = TransScope {
            sig: self.sig,
            binders: &binders,
        };
        let guard = match &ft.guard {
            None => None,
            Some(g) => match compile(g, &scope)? {
                (t, Ty::Bool) => Some(t),
                _ => return Err(type_error(g.pos(), "guard is not a boolean expression".into())),
            },
        };
        let outputs = ft
            .sends
            .iter()
            .map(|s| self.compile_send(s, &scope, &binders))
            .collect::<Result<_, _>>()?;
        Ok(Compiled {
            trigger,
            guard,
            outputs,
        })
    }

    fn compile_send(
        &self,
        s: &SendDecl,
        scope: &TransScope<'_>,
        binders: &BTreeMap<String, Ty>,
    ) -> Result<SendTemplate, ElabError> {
        let (target, class) = match &s.target {
            SendTarget::New(c) => {
                if !self.model.classes.contains_key(c) {
                    return Err(ElabError::UnknownClass {
                        class: c.clone(),
                        pos: s.pos,
                    });
                }
                if self.model.is_abstract(c) {
                    return Err(ElabError::AbstractInstantiation {
                        class: c.clone(),
                        pos: s.pos,
                    });
                }
                (SendTargetSpec::New(c.clone()), Some(c.clone()))
            }
            SendTarget::Name(n) => match binders.get(n) {
                Some(Ty::Ref) => (SendTargetSpec::Binder(n.clone()), None),
                Some(_) => return Err(type_error(s.pos, format!("`{n}` is not an object reference"))),
                None if n == "sender" => (SendTargetSpec::Sender, None),
                None => {
                    let end = self.model.resolve_link_key(self.class, n).map_err(|_| ElabError::UnknownName {
                        name: n.clone(),
                        pos: s.pos,
                    })?;
                    (SendTargetSpec::Link(end.key.clone()), Some(end.target_class.clone()))
                }
            },
        };
        let mut args = Vec::new();
        for a in &s.args {
            args.push(compile(a, scope)?.0);
        }
        if let Some(c) = class {
            let m = self
                .model
                .signature(&c)
                .and_then(|sig| sig.methods.get(&s.selector))
                .ok_or_else(|| ElabError::UnknownSelector {
                    selector: s.selector.clone(),
                    class: c.clone(),
                    pos: s.pos,
                })?;
            if m.params.len() != args.len() {
                return Err(type_error(
                    s.pos,
                    format!("`{}` takes {} arguments, {} given", s.selector, m.params.len(), args.len()),
                ));
            }
        }
        Ok(SendTemplate {
            target,
            selector: s.selector.clone(),
            args,
        })
    }
}

/// Tracked-attribute environment for partial guard evaluation.
struct ValEnv<'a> {
    tracked: &'a [String],
    valuation: &'a [Value],
}

impl crate::model::Env for ValEnv<'_> {
    fn attr(&self, name: &str) -> Option<Value> {
        self.tracked.iter().position(|t| t == name).map(|i| self.valuation[i].clone())
    }
}

fn valuations(domains: &[Vec<Value>]) -> Vec<Vec<Value>> {
    domains.iter().fold(vec![Vec::new()], |acc, d| {
        acc.iter()
            .flat_map(|v| {
                d.iter().map(move |x| {
                    let mut v = v.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect()
    })
}

fn collect_literals(e: &Expr, ints: &mut BTreeSet<i64>, strs: &mut BTreeSet<String>) {
    match e {
        Expr::Lit(Literal::Int(n), _) => {
            ints.insert(*n);
        }
        Expr::Lit(Literal::Str(s), _) => {
            strs.insert(s.clone());
        }
        Expr::Lit(..) | Expr::Name(..) | Expr::Count(..) => {}
        Expr::Not(x, _) | Expr::Neg(x, _) => collect_literals(x, ints, strs),
        Expr::Bin(_, l, r) => {
            collect_literals(l, ints, strs);
            collect_literals(r, ints, strs);
        }
    }
}

/// Representative input symbols per accepted selector: integer parameters
/// range over 0 and the diagram's literals with their neighbours, strings over
/// the literals and "", references over the environment object.
fn derive_alphabet(sig: &Signature, flat: &FlatStateDiagram) -> Vec<InputSymbol> {
    let mut out = Vec::new();
    for (sel, m) in &sig.methods {
        let mut ints = BTreeSet::from([0]);
        let mut strs = BTreeSet::from([String::new()]);
        for t in &flat.transitions {
            let Some(ev) = t.event.as_ref().filter(|e| e.selector == *sel) else {
                continue;
            };
            for p in &ev.params {
                match p {
                    Pattern::Lit(Literal::Int(n)) => {
                        ints.insert(*n);
                    }
                    Pattern::Lit(Literal::Str(s)) => {
                        strs.insert(s.clone());
                    }
                    _ => {}
                }
            }
            if let Some(g) = &t.guard {
                collect_literals(g, &mut ints, &mut strs);
            }
        }
        let ints: BTreeSet<i64> = ints
            .iter()
            .flat_map(|&n| [n.saturating_sub(1), n, n.saturating_add(1)])
            .collect();
        let domains: Vec<Vec<Value>> = m
            .params
            .iter()
            .map(|ty| match ty {
                ValueType::Int => ints.iter().map(|&n| Value::Int(n)).collect(),
                ValueType::Bool => vec![Value::Bool(false), Value::Bool(true)],
                ValueType::Str => strs.iter().map(|s| Value::Str(s.clone())).collect(),
                ValueType::Class(_) => vec![Value::Ref(ObjectId::environment())],
            })
            .collect();
        for args in valuations(&domains) {
            out.push(InputSymbol::new(sel.clone(), args));
        }
    }
    out
}

/// Output words a chaotic step may emit: sequences, up to the longest send
/// clause of the diagram, over its sends that need no event bindings.
fn chaos_words(compiled: &[Compiled]) -> Vec<Vec<SendTemplate>> {
    fn closed(t: &Term) -> bool {
        match t {
            Term::Binder(_) | Term::Sender => false,
            Term::Not(x) | Term::Neg(x) => closed(x),
            Term::Bin(_, l, r) => closed(l) && closed(r),
            _ => true,
        }
    }
    let letters: BTreeSet<SendTemplate> = compiled
        .iter()
        .flat_map(|c| &c.outputs)
        .filter(|o| matches!(o.target, SendTargetSpec::Link(_) | SendTargetSpec::New(_)) && o.args.iter().all(closed))
        .cloned()
        .collect();
    let max_len = compiled.iter().map(|c| c.outputs.len()).max().unwrap_or(0);
    let mut words = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in &letters {
                let mut w2: Vec<SendTemplate> = w.clone();
                w2.push(l.clone());
                next.push(w2);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    words
}

fn covers(t: &Transition, selector: &str) -> bool {
    match &t.trigger {
        Trigger::Event(ev) => {
            ev.selector == selector && t.guard.is_none() && ev.params.iter().all(|p| !matches!(p, ParamPattern::Lit(_)))
        }
        Trigger::Spontaneous => false,
    }
}

pub fn build_sts(flat: &FlatStateDiagram, model: &StaticModel, class: &str) -> Result<StateTransitionSystem, ElabError> {
    build_sts_with(flat, model, class, &BuildOptions::default())
}

/// Builds the automaton of `class` from its flat diagram. States pair a flat
/// label with a valuation of the attributes read by guards; those need finite
/// domains. Explicit transitions keep the valuation unchanged.
pub fn build_sts_with(
    flat: &FlatStateDiagram,
    model: &StaticModel,
    class: &str,
    opts: &BuildOptions,
) -> Result<StateTransitionSystem, ElabError> {
    let sig = model.signature(class).ok_or_else(|| ElabError::UnknownClass {
        class: class.to_string(),
        pos: Pos::default(),
    })?;
    if flat.initial.is_empty() {
        return Err(ElabError::NoInitial {
            composite: flat.owner.clone().unwrap_or_else(|| class.to_string()),
        });
    }
    let b = Builder { model, class, sig };
    let compiled: Vec<Compiled> = flat.transitions.iter().map(|t| b.compile_transition(t)).collect::<Result<_, _>>()?;

    let mut tracked = BTreeSet::new();
    for (c, ft) in compiled.iter().zip(&flat.transitions) {
        if let Some(g) = &c.guard {
            for a in g.attrs() {
                if tracked.insert(a.to_string()) && sig.attributes[a].finite_domain().is_none() {
                    return Err(type_error(
                        ft.pos,
                        format!("attribute `{a}` is read by a guard but has no finite domain"),
                    ));
                }
            }
        }
    }
    let tracked: Vec<String> = tracked.into_iter().collect();
    let domains: Vec<Vec<Value>> = tracked
        .iter()
        .map(|a| sig.attributes[a].finite_domain().expect("checked"))
        .collect();
    let vals = valuations(&domains);
    let nvals = vals.len();
    let n_states = flat.labels.len() * nvals;
    let budget_err = || ElabError::BudgetExceeded { budget: opts.budget };
    if n_states > opts.budget {
        return Err(budget_err());
    }
    let states: Vec<StsState> = (0..flat.labels.len())
        .flat_map(|c| {
            vals.iter().map(move |v| StsState {
                control: c,
                valuation: v.clone(),
            })
        })
        .collect();
    let initial = flat
        .initial
        .iter()
        .flat_map(|&c| (0..nvals).map(move |v| c * nvals + v))
        .collect();

    let mut transitions = Vec::new();
    for (k, (c, ft)) in compiled.iter().zip(&flat.transitions).enumerate() {
        for (vi, v) in vals.iter().enumerate() {
            let guard = match &c.guard {
                None => None,
                Some(g) => match g.holds(&ValEnv {
                    tracked: &tracked,
                    valuation: v,
                }) {
                    Some(false) => continue,
                    Some(true) => None,
                    None => Some(g.clone()),
                },
            };
            transitions.push(Transition {
                source: ft.source * nvals + vi,
                target: ft.target * nvals + vi,
                trigger: c.trigger.clone(),
                guard,
                outputs: c.outputs.clone(),
                kind: TransitionKind::Explicit,
                origin: Some(k),
            });
            if transitions.len() > opts.budget {
                return Err(budget_err());
            }
        }
    }

    let policy = opts.policy.unwrap_or(flat.policy);
    let words = match policy {
        UnhandledPolicy::Chaos => chaos_words(&compiled),
        UnhandledPolicy::Ignore => Vec::new(),
    };
    let mut by_source: Vec<Vec<usize>> = vec![Vec::new(); n_states];
    for (k, t) in transitions.iter().enumerate() {
        by_source[t.source].push(k);
    }
    let mut fallback = Vec::new();
    for s in 0..n_states {
        for sel in sig.methods.keys() {
            if by_source[s].iter().any(|&k| covers(&transitions[k], sel)) {
                continue;
            }
            let trigger = Trigger::Event(EventSpec::any(sel.clone()));
            match policy {
                UnhandledPolicy::Ignore => fallback.push(Transition {
                    source: s,
                    target: s,
                    trigger,
                    guard: None,
                    outputs: Vec::new(),
                    kind: TransitionKind::Default,
                    origin: None,
                }),
                UnhandledPolicy::Chaos => {
                    for d in 0..n_states {
                        for w in &words {
                            fallback.push(Transition {
                                source: s,
                                target: d,
                                trigger: trigger.clone(),
                                guard: None,
                                outputs: w.clone(),
                                kind: TransitionKind::Chaos,
                                origin: None,
                            });
                        }
                    }
                }
            }
            if transitions.len() + fallback.len() > opts.budget {
                return Err(budget_err());
            }
        }
    }
    transitions.extend(fallback);

    let parts = StsParts {
        class: class.to_string(),
        labels: flat.labels.clone(),
        tracked,
        states,
        initial,
        transitions,
        accepted: sig.methods.keys().cloned().collect(),
        alphabet: derive_alphabet(sig, flat),
        policy,
    };
    StateTransitionSystem::from_parts(parts).map_err(|e| ElabError::from_model(e, Pos::default()))
}

/// Automaton of a class without a state diagram: one state that accepts and
/// ignores every method.
pub fn passive_sts(model: &StaticModel, class: &str) -> Result<StateTransitionSystem, ElabError> {
    let flat = FlatStateDiagram {
        owner: Some(class.to_string()),
        policy: UnhandledPolicy::Ignore,
        labels: vec![Label::single("idle")],
        initial: vec![0],
        transitions: Vec::new(),
    };
    build_sts(&flat, model, class)
}
