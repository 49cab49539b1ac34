//! Closed systems of objects executing over discrete time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::SnapshotAst;
use crate::elaborate::{snapshot_state, SnapshotState, StaticModel};
use crate::model::{
    Bindings, Env, Message, ObjectId, ObjectState, SendTargetSpec, StateId, StateTransitionSystem, SystemState,
    Value,
};

use super::execution::{EventKind, Execution, FireInfo, ObjectHistory, Termination, TraceEvent};
use super::medium::{InFlight, Medium};
use super::SimError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    /// Every object may act in every tick.
    #[default]
    Concurrent,
    /// Exactly one object acts per tick.
    Sequential,
}

impl FromStr for Policy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "concurrent" => Ok(Policy::Concurrent),
            "sequential" => Ok(Policy::Sequential),
            _ => Err(format!("unknown policy `{s}` (expected concurrent or sequential)")),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Concurrent => "concurrent",
            Policy::Sequential => "sequential",
        })
    }
}

/// Static part of a closed system: class model, initial objects and one
/// automaton per class.
#[derive(Debug)]
pub struct System {
    pub model: StaticModel,
    pub snapshot: SnapshotState,
    pub stss: BTreeMap<String, StateTransitionSystem>,
}

impl System {
    /// Checks that every object's class, and every class that may be
    /// created, has an automaton and is concrete.
    pub fn new(
        model: StaticModel,
        snapshot: &SnapshotAst,
        stss: BTreeMap<String, StateTransitionSystem>,
    ) -> Result<Arc<System>, SimError> {
        let snapshot = snapshot_state(&model, snapshot)?;
        for (name, id) in &snapshot.ids {
            if model.is_abstract(id.class()) {
                return Err(SimError::AbstractInstantiation {
                    class: id.class().to_string(),
                    object: name.clone(),
                });
            }
            if !stss.contains_key(id.class()) {
                return Err(SimError::NoSts(id.class().to_string()));
            }
        }
        for sts in stss.values() {
            for t in sts.transitions() {
                for o in &t.outputs {
                    if let SendTargetSpec::New(c) = &o.target {
                        if !stss.contains_key(c) {
                            return Err(SimError::NoSts(c.clone()));
                        }
                    }
                }
            }
        }
        Ok(Arc::new(System { model, snapshot, stss }))
    }
}

/// Source of nondeterministic choices: seeded random or scripted.
#[derive(Debug, Clone)]
pub(crate) enum Chooser {
    Random(ChaCha8Rng),
    /// Follows `script`, then takes the first alternative; records every
    /// choice point as (taken, arity).
    Script {
        script: Vec<usize>,
        log: Vec<(usize, usize)>,
    },
}

impl Chooser {
    fn choose(&mut self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        match self {
            Chooser::Random(rng) => rng.gen_range(0..n),
            Chooser::Script { script, log } => {
                let k = script.get(log.len()).copied().unwrap_or(0).min(n - 1);
                log.push((k, n));
                k
            }
        }
    }
}

#[derive(Debug, Clone)]
struct ObjectRt {
    state: StateId,
    obj: ObjectState,
    /// Created objects become active with their first message.
    active: bool,
    created: u32,
}

/// Attributes, links and identities of one object for guard evaluation.
struct ObjEnv<'a> {
    id: &'a ObjectId,
    obj: &'a ObjectState,
    sender: Option<&'a ObjectId>,
}

impl Env for ObjEnv<'_> {
    fn attr(&self, name: &str) -> Option<Value> {
        self.obj.valuation.get(name).cloned()
    }
    fn link_count(&self, key: &str) -> Option<i64> {
        self.obj.links.get(key).map(|s| s.len() as i64)
    }
    fn self_id(&self) -> Option<Value> {
        Some(Value::Ref(self.id.clone()))
    }
    fn sender(&self) -> Option<Value> {
        self.sender.map(|s| Value::Ref(s.clone()))
    }
}

/// Binder values layered over an object environment.
struct BoundEnv<'a> {
    base: ObjEnv<'a>,
    bindings: &'a Bindings,
}

impl Env for BoundEnv<'_> {
    fn attr(&self, name: &str) -> Option<Value> {
        self.base.attr(name)
    }
    fn binder(&self, name: &str) -> Option<Value> {
        self.bindings.get(name).cloned()
    }
    fn link_count(&self, key: &str) -> Option<i64> {
        self.base.link_count(key)
    }
    fn self_id(&self) -> Option<Value> {
        self.base.self_id()
    }
    fn sender(&self) -> Option<Value> {
        self.base.sender()
    }
}

/// Mutable simulation state of one closed system.
#[derive(Debug, Clone)]
pub struct World {
    system: Arc<System>,
    objects: BTreeMap<ObjectId, ObjectRt>,
    medium: Medium,
    chooser: Chooser,
    policy: Policy,
    clock: usize,
    seq: u64,
    record_trajectory: bool,
    initial: SystemState,
    histories: BTreeMap<ObjectId, ObjectHistory>,
    events: Vec<TraceEvent>,
    trajectory: Vec<SystemState>,
}

pub fn init_world(
    model: &StaticModel,
    snapshot: &SnapshotAst,
    stss: &BTreeMap<String, StateTransitionSystem>,
    seed: u64,
    policy: Policy,
) -> Result<World, SimError> {
    let system = System::new(model.clone(), snapshot, stss.clone())?;
    World::new(system, seed, policy)
}

impl World {
    /// Places the snapshot objects in initial states of their automata,
    /// choosing among the states that agree with their attribute values.
    pub fn new(system: Arc<System>, seed: u64, policy: Policy) -> Result<World, SimError> {
        World::with_chooser(system, Chooser::Random(ChaCha8Rng::seed_from_u64(seed)), policy)
    }

    pub(crate) fn with_chooser(system: Arc<System>, chooser: Chooser, policy: Policy) -> Result<World, SimError> {
        let mut w = World {
            system: system.clone(),
            objects: BTreeMap::new(),
            medium: Medium::default(),
            chooser,
            policy,
            clock: 0,
            seq: 0,
            record_trajectory: true,
            initial: SystemState::default(),
            histories: BTreeMap::new(),
            events: Vec::new(),
            trajectory: Vec::new(),
        };
        for (id, obj) in &system.snapshot.state.alive {
            let name = system.snapshot.name_of(id).unwrap_or_default().to_string();
            let state = w.pick_initial(id, obj).ok_or_else(|| SimError::InitialStateEmpty {
                class: id.class().to_string(),
                object: name,
            })?;
            let mut obj = obj.clone();
            obj.control = system.stss[id.class()].label(state).clone();
            w.objects.insert(
                id.clone(),
                ObjectRt {
                    state,
                    obj,
                    active: true,
                    created: 0,
                },
            );
            w.histories.insert(
                id.clone(),
                ObjectHistory {
                    class: id.class().to_string(),
                    ..ObjectHistory::default()
                },
            );
        }
        w.initial = w.state();
        w.trajectory.push(w.initial.clone());
        Ok(w)
    }

    /// Keep only the final state instead of one state per tick.
    pub fn without_trajectory(mut self) -> Self {
        self.record_trajectory = false;
        self
    }

    fn pick_initial(&mut self, id: &ObjectId, obj: &ObjectState) -> Option<StateId> {
        let sts = &self.system.stss[id.class()];
        let fits: Vec<StateId> = sts
            .initial()
            .iter()
            .copied()
            .filter(|&s| {
                sts.tracked()
                    .iter()
                    .zip(&sts.states()[s].valuation)
                    .all(|(a, v)| obj.valuation.get(a) == Some(v))
            })
            .collect();
        if fits.is_empty() {
            return None;
        }
        Some(fits[self.chooser.choose(fits.len())])
    }

    pub fn clock(&self) -> usize {
        self.clock
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn system(&self) -> &Arc<System> {
        &self.system
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn state(&self) -> SystemState {
        SystemState {
            alive: self.objects.iter().map(|(id, o)| (id.clone(), o.obj.clone())).collect(),
            clock: self.clock as u64,
        }
    }

    fn sts(&self, id: &ObjectId) -> &StateTransitionSystem {
        &self.system.stss[id.class()]
    }

    fn spontaneous(&self, id: &ObjectId) -> Vec<(usize, Bindings)> {
        let o = &self.objects[id];
        if !o.active {
            return Vec::new();
        }
        let env = ObjEnv {
            id,
            obj: &o.obj,
            sender: None,
        };
        self.sts(id).fire_options(o.state, None, Some(&env))
    }

    /// Empty medium and no enabled spontaneous transition.
    pub fn is_quiescent(&self) -> bool {
        self.medium.is_empty() && self.objects.keys().all(|id| self.spontaneous(id).is_empty())
    }

    /// Options of one object in the current tick: deliverable buffer heads
    /// (by sender) and, if any is enabled, spontaneous firing.
    fn options(&self, id: &ObjectId) -> (Vec<ObjectId>, bool) {
        let senders = self.medium.deliverable(id, self.clock);
        (senders, !self.spontaneous(id).is_empty())
    }

    /// Advances one tick.
    pub fn step(&mut self) {
        let t = self.clock;
        let ids: Vec<ObjectId> = self.objects.keys().cloned().collect();
        match self.policy {
            Policy::Concurrent => {
                for id in &ids {
                    let (senders, spont) = self.options(id);
                    let n = senders.len() + usize::from(spont);
                    if n == 0 {
                        continue;
                    }
                    let k = self.chooser.choose(n);
                    self.act(id, senders.get(k), t);
                }
            }
            Policy::Sequential => {
                let mut all = Vec::new();
                for id in &ids {
                    let (senders, spont) = self.options(id);
                    all.extend(senders.into_iter().map(|s| (id.clone(), Some(s))));
                    if spont {
                        all.push((id.clone(), None));
                    }
                }
                if !all.is_empty() {
                    let k = self.chooser.choose(all.len());
                    let (id, sender) = all.swap_remove(k);
                    self.act(&id, sender.as_ref(), t);
                }
            }
        }
        self.clock += 1;
        if self.record_trajectory {
            self.trajectory.push(self.state());
        }
    }

    /// Consumes the head message from `sender`, or fires spontaneously.
    fn act(&mut self, id: &ObjectId, sender: Option<&ObjectId>, t: usize) {
        let incoming = sender.map(|s| self.medium.dequeue(s, id).expect("deliverable message"));
        if let Some(m) = &incoming {
            self.record(t, EventKind::Deliver, &m.message, Some(m.seq));
            self.histories.entry(id.clone()).or_default().input.push(t, m.message.clone());
        }
        let o = &self.objects[id];
        let opts = {
            let env = ObjEnv {
                id,
                obj: &o.obj,
                sender: incoming.as_ref().map(|m| &m.message.sender),
            };
            let input = incoming.as_ref().map(|m| (m.message.selector.as_str(), m.message.args.as_slice()));
            self.sts(id).fire_options(o.state, input, Some(&env))
        };
        if let Some(rt) = self.objects.get_mut(id) {
            rt.active = true;
        }
        if opts.is_empty() {
            return;
        }
        let (k, bindings) = opts[self.chooser.choose(opts.len())].clone();
        self.fire(id, k, &bindings, incoming.as_ref().map(|m| &m.message), t);
    }

    fn fire(&mut self, id: &ObjectId, k: usize, bindings: &Bindings, trigger: Option<&Message>, t: usize) {
        let system = self.system.clone();
        let sts = &system.stss[id.class()];
        let tr = &sts.transitions()[k];
        let source = self.objects[id].state;
        self.events.push(TraceEvent {
            tick: t,
            kind: EventKind::Fire,
            from: id.clone(),
            to: id.clone(),
            selector: trigger.map(|m| m.selector.clone()),
            args: trigger.map(|m| m.args.clone()).unwrap_or_default(),
            seq: None,
            fire: Some(FireInfo {
                source: sts.label(source).clone(),
                target: sts.label(tr.target).clone(),
                transition: k,
                transition_kind: tr.kind,
            }),
        });
        let mut out = Vec::new();
        {
            let o = &self.objects[id];
            let env = BoundEnv {
                base: ObjEnv {
                    id,
                    obj: &o.obj,
                    sender: trigger.map(|m| &m.sender),
                },
                bindings,
            };
            for tpl in &tr.outputs {
                let args: Vec<Value> = tpl.args.iter().map(|a| a.eval(&env).unwrap_or(Value::Null)).collect();
                let receivers: Vec<(ObjectId, bool)> = match &tpl.target {
                    SendTargetSpec::Link(key) => o
                        .obj
                        .links
                        .get(key)
                        .into_iter()
                        .flatten()
                        .map(|r| (r.clone(), false))
                        .collect(),
                    SendTargetSpec::Binder(b) => match bindings.get(b) {
                        Some(Value::Ref(r)) if self.objects.contains_key(r) => vec![(r.clone(), false)],
                        _ => Vec::new(),
                    },
                    SendTargetSpec::Sender => trigger.map(|m| (m.sender.clone(), false)).into_iter().collect(),
                    SendTargetSpec::New(c) => {
                        let n = self.objects[id].created;
                        vec![(ObjectId::created_by(id, n, c.clone()), true)]
                    }
                };
                for (r, creation) in receivers {
                    out.push(Message {
                        sender: id.clone(),
                        receiver: r,
                        selector: tpl.selector.clone(),
                        args: args.clone(),
                        creation,
                    });
                }
            }
        }
        let target = tr.target;
        let label = sts.label(target).clone();
        if let Some(rt) = self.objects.get_mut(id) {
            rt.state = target;
            rt.obj.control = label;
        }
        for m in out {
            if m.creation {
                self.create(id, &m.receiver, t);
            }
            let seq = self.seq;
            self.seq += 1;
            self.record(t, EventKind::Send, &m, Some(seq));
            self.histories.entry(id.clone()).or_default().output.push(t, m.clone());
            self.medium.enqueue(InFlight {
                message: m,
                sent: t,
                seq,
            });
        }
    }

    /// Allocates `new_id` from `creator`'s creatables. The new object starts
    /// inactive in an initial state with default attribute values, linked to
    /// its creator when exactly one association end of the creator admits it.
    fn create(&mut self, creator: &ObjectId, new_id: &ObjectId, t: usize) {
        let system = self.system.clone();
        let model = &system.model;
        let class = new_id.class();
        let sig = &model.signatures[class];
        let mut obj = ObjectState {
            control: crate::model::Label(Vec::new()),
            valuation: sig.attributes.iter().map(|(k, a)| (k.clone(), a.default_value())).collect(),
            links: model.link_ends_of(class).map(|e| (e.key.clone(), Default::default())).collect(),
        };
        let fwd: Vec<_> = model
            .link_ends_of(creator.class())
            .filter(|e| model.is_subclass(class, &e.target_class))
            .collect();
        if let [end] = fwd.as_slice() {
            let back = model
                .link_ends_of(class)
                .find(|e| e.assoc == end.assoc && model.is_subclass(creator.class(), &e.target_class));
            if let Some(back) = back {
                obj.links.entry(back.key.clone()).or_default().insert(creator.clone());
                if let Some(c) = self.objects.get_mut(creator) {
                    c.obj.links.entry(end.key.clone()).or_default().insert(new_id.clone());
                }
            }
        }
        let state = self
            .pick_initial(new_id, &obj)
            .or_else(|| system.stss[class].initial().iter().next().copied())
            .expect("automata have initial states");
        obj.control = system.stss[class].label(state).clone();
        if let Some(c) = self.objects.get_mut(creator) {
            c.created += 1;
        }
        self.objects.insert(
            new_id.clone(),
            ObjectRt {
                state,
                obj,
                active: false,
                created: 0,
            },
        );
        self.histories.insert(
            new_id.clone(),
            ObjectHistory {
                class: class.to_string(),
                ..ObjectHistory::default()
            },
        );
        self.events.push(TraceEvent {
            tick: t,
            kind: EventKind::Create,
            from: creator.clone(),
            to: new_id.clone(),
            selector: None,
            args: Vec::new(),
            seq: Some(self.seq),
            fire: None,
        });
    }

    fn record(&mut self, t: usize, kind: EventKind, m: &Message, seq: Option<u64>) {
        self.events.push(TraceEvent {
            tick: t,
            kind,
            from: m.sender.clone(),
            to: m.receiver.clone(),
            selector: Some(m.selector.clone()),
            args: m.args.clone(),
            seq,
            fire: None,
        });
    }

    pub(crate) fn into_chooser(self) -> Chooser {
        self.chooser
    }

    /// Runs to the horizon or to quiescence, whichever comes first.
    pub fn run(mut self, horizon: usize) -> Execution {
        self.run_in_place(horizon)
    }

    pub(crate) fn run_in_place(&mut self, horizon: usize) -> Execution {
        let mut termination = Termination::Horizon;
        while self.clock < horizon {
            if self.is_quiescent() {
                termination = Termination::Quiescent;
                break;
            }
            self.step();
        }
        if self.clock == horizon && horizon == 0 && self.is_quiescent() {
            termination = Termination::Quiescent;
        }
        let ticks = self.clock;
        for h in self.histories.values_mut() {
            h.input.extend_to(ticks);
            h.output.extend_to(ticks);
        }
        Execution {
            horizon,
            ticks,
            histories: self.histories.clone(),
            events: self.events.clone(),
            trajectory: self.trajectory.clone(),
            initial: self.initial.clone(),
            final_state: self.state(),
            in_flight: self.medium.in_flight().map(|m| m.message.clone()).collect(),
            termination,
        }
    }
}

/// Convenience: `world.run(horizon)`.
pub fn run(world: World, horizon: usize) -> Execution {
    world.run(horizon)
}
