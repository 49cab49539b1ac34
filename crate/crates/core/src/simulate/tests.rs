use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::dsl::{parse_class_model, parse_snapshot, parse_state_diagram};
use crate::elaborate::{automata, elaborate_static, BuildOptions};
use crate::model::{Label, ObjectId};

fn system(model: &str, diagrams: &[&str], snap: &str) -> Arc<System> {
    let m = elaborate_static(&parse_class_model(model).unwrap()).unwrap();
    let ds: Vec<_> = diagrams.iter().map(|d| parse_state_diagram(d).unwrap()).collect();
    let stss = automata(&m, &ds, &BuildOptions::default()).unwrap();
    System::new(m, &parse_snapshot(snap).unwrap(), stss).unwrap()
}

const PP_MODEL: &str = "class Pinger { op pong() }\nclass Ponger { op ping() }\nassoc plays Pinger[1] -- Ponger[1]";
const PINGER: &str = "statechart Pinger\ninitial Start; state Start; state Wait\ntrans Start -> Wait / plays!ping()\ntrans Wait -> Wait on pong / plays!ping()";
const PONGER: &str = "statechart Ponger\ninitial Idle; state Idle\ntrans Idle -> Idle on ping / sender!pong()";
const PP_SNAP: &str = "obj pi: Pinger {}\nobj po: Ponger {}\nlink plays pi -- po";

fn pingpong() -> Arc<System> {
    system(PP_MODEL, &[PINGER, PONGER], PP_SNAP)
}

#[test]
fn empty_snapshot_is_quiescent() {
    let s = system("class A {}", &[], "");
    let w = World::new(s, 1, Policy::Concurrent).unwrap();
    assert!(w.state().alive.is_empty());
    let e = w.run(10);
    assert_eq!(e.termination, Termination::Quiescent);
    assert_eq!(e.ticks, 0);
}

#[test]
fn snapshot_links_on_both_ends() {
    let s = system(
        "class Branch { attr stock: int }\nclass CentralOffice {}\nassoc coordinates CentralOffice[1] -- Branch[0..*]",
        &[],
        "obj c1: CentralOffice {}\nobj b1: Branch { stock = 5 }\nlink coordinates c1 -- b1",
    );
    let w = World::new(s.clone(), 0, Policy::Concurrent).unwrap();
    let st = w.state();
    assert_eq!(st.alive.len(), 2);
    let c1 = s.snapshot.id("c1").unwrap();
    let b1 = s.snapshot.id("b1").unwrap();
    assert!(st.alive[b1].links["coordinates.CentralOffice"].contains(c1));
    assert!(st.alive[c1].links["coordinates.Branch"].contains(b1));
}

#[test]
fn abstract_snapshot_object_rejected() {
    let m = elaborate_static(&parse_class_model("abstract class L {}").unwrap()).unwrap();
    let stss = automata(&m, &[], &BuildOptions::default()).unwrap();
    let e = System::new(m, &parse_snapshot("obj l: L {}").unwrap(), stss).unwrap_err();
    assert!(matches!(e, SimError::AbstractInstantiation { .. }));
}

#[test]
fn quiescent_step_only_advances_clock() {
    let s = system(PP_MODEL, &[], PP_SNAP);
    let mut w = World::new(s, 3, Policy::Concurrent).unwrap();
    let before = w.state();
    assert!(w.is_quiescent());
    w.step();
    let after = w.state();
    assert_eq!(after.alive, before.alive);
    assert_eq!(after.clock, before.clock + 1);
}

#[test]
fn horizon_zero() {
    let w = World::new(pingpong(), 0, Policy::Concurrent).unwrap();
    let init = w.state();
    let e = w.run(0);
    assert_eq!(e.ticks, 0);
    assert_eq!(e.trajectory, vec![init]);
    assert!(e.histories.values().all(|h| h.input.message_count() == 0 && h.output.message_count() == 0));
    assert_eq!(e.trace().lines().count(), 1);
}

#[test]
fn pingpong_six_ticks() {
    let s = pingpong();
    let e = World::new(s.clone(), 0, Policy::Concurrent).unwrap().run(6);
    assert_eq!(e.ticks, 6);
    assert_eq!(e.termination, Termination::Horizon);
    let pi = s.snapshot.id("pi").unwrap();
    let po = s.snapshot.id("po").unwrap();
    let sends: Vec<(usize, &ObjectId, &str)> =
        e.sends().map(|ev| (ev.tick, &ev.from, ev.selector.as_deref().unwrap())).collect();
    assert_eq!(sends.len(), 6);
    for (k, (tick, from, sel)) in sends.iter().enumerate() {
        assert_eq!(*tick, k);
        if k % 2 == 0 {
            assert_eq!((*from, *sel), (pi, "ping"));
        } else {
            assert_eq!((*from, *sel), (po, "pong"));
        }
    }
    // each message is consumed exactly one tick after it was sent
    for d in e.deliveries() {
        let s = e.sends().find(|s| s.seq == d.seq).unwrap();
        assert_eq!(d.tick, s.tick + 1);
        assert_eq!(d.args, s.args);
    }
    assert_eq!(e.in_flight.len(), 1);
    assert_eq!(e.trace().lines().filter(|l| l.contains("\"kind\":\"tick\"")).count(), 6);
}

#[test]
fn fifo_per_pair() {
    let s = system(
        "class A { op go() }\nclass B { op m1() op m2() }\nassoc peer A[*] -- B[*]",
        &[
            "statechart A\ninitial S; state S; state T\ntrans S -> T / peer!m1(), peer!m2()",
            "statechart B\ninitial S; state S; trans S -> S on m1; trans S -> S on m2",
        ],
        "obj a: A {}\nobj b: B {}\nlink peer a -- b",
    );
    let e = World::new(s, 9, Policy::Concurrent).unwrap().run(10);
    let got: Vec<_> = e.deliveries().map(|d| (d.tick, d.selector.clone().unwrap())).collect();
    assert_eq!(got, vec![(1, "m1".to_string()), (2, "m2".to_string())]);
    assert_eq!(e.termination, Termination::Quiescent);
}

#[test]
fn seeded_runs_are_reproducible() {
    let s = system(
        "class A { op go() }\nclass B { op m(int) }\nassoc peer A[*] -- B[*]",
        &[
            "statechart A\ninitial S; state S; state T; state U\ntrans S -> T / peer!m(1)\ntrans S -> U / peer!m(2)\ntrans T -> S / peer!m(3)\ntrans U -> S",
            "statechart B\ninitial S; state S; trans S -> S on m(x)",
        ],
        "obj a: A {}\nobj b1: B {}\nobj b2: B {}\nlink peer a -- b1\nlink peer a -- b2",
    );
    let run = |seed| World::new(s.clone(), seed, Policy::Concurrent).unwrap().run(40).trace();
    assert_eq!(run(7), run(7));
    assert!((0..20).any(|seed| run(seed) != run(7)));
}

#[test]
fn enumeration_counts() {
    // deterministic closed system
    let e = enumerate_executions(&pingpong(), Policy::Concurrent, 4, 10_000).unwrap();
    assert_eq!(e.executions.len(), 1);
    assert!(!e.incomplete);

    let branching = system(
        "class A { op go() }\nclass B { op m(int) }\nassoc peer A[*] -- B[*]",
        &[
            "statechart A\ninitial S; state S; state T; state U\ntrans S -> T / peer!m(1)\ntrans S -> U / peer!m(2)",
            "statechart B\ninitial S; state S; trans S -> S on m(x)",
        ],
        "obj a: A {}\nobj b: B {}\nlink peer a -- b",
    );
    let e = enumerate_executions(&branching, Policy::Concurrent, 5, 10_000).unwrap();
    assert_eq!(e.executions.len(), 2);
    let e = enumerate_executions(&branching, Policy::Concurrent, 5, 1).unwrap();
    assert!(e.incomplete);
}

#[test]
fn random_runs_are_enumerated() {
    let s = system(
        "class A { op go() }\nclass B { op m(int) }\nassoc peer A[*] -- B[*]",
        &[
            "statechart A\ninitial S; state S; state T\ntrans S -> T / peer!m(1)\ntrans S -> T / peer!m(2)\ntrans T -> S / peer!m(3)",
            "statechart B\ninitial S; state S; trans S -> S on m(x)",
        ],
        "obj a: A {}\nobj b1: B {}\nobj b2: B {}\nlink peer a -- b1\nlink peer a -- b2",
    );
    let all = enumerate_executions(&s, Policy::Sequential, 5, 1_000_000).unwrap();
    assert!(!all.incomplete);
    let traces: std::collections::BTreeSet<String> = all.executions.iter().map(Execution::trace).collect();
    for seed in 0..30 {
        let t = World::new(s.clone(), seed, Policy::Sequential).unwrap().run(5).trace();
        assert!(traces.contains(&t), "seed {seed}");
    }
}

#[test]
fn creation_by_message() {
    let s = system(
        "class Factory { op ack() }\nclass Widget { op hello() }\nassoc made Factory[1] -- Widget[*]",
        &[
            "statechart Factory\ninitial S; state S; state Done\ntrans S -> Done / new Widget!hello()",
            "statechart Widget\ninitial Born; state Born; state Up\ntrans Born -> Up / made!ack()\ntrans Born -> Up on hello / sender!ack()",
        ],
        "obj f: Factory {}",
    );
    let e = World::new(s.clone(), 0, Policy::Concurrent).unwrap().run(5);
    let f = s.snapshot.id("f").unwrap();
    let w = ObjectId::created_by(f, 0, "Widget");
    assert_eq!(w.tag(), &[0, 0]);
    assert!(e.final_state.alive.contains_key(&w));
    assert_eq!(e.final_state.alive[&w].control, Label::single("Up"));
    assert!(e.final_state.alive[f].links["made.Widget"].contains(&w));
    let create = e.events.iter().position(|ev| ev.kind == EventKind::Create).unwrap();
    let first_in = e.events.iter().position(|ev| ev.kind == EventKind::Deliver && ev.to == w).unwrap();
    let first_out = e.events.iter().position(|ev| ev.kind == EventKind::Send && ev.from == w).unwrap();
    assert!(create < first_in && first_in < first_out);
    // the spontaneous transition never fires: the widget's first act is the delivery
    assert_eq!(e.histories[&w].output.ticks[1][0].selector, "ack");
}

#[test]
fn sequential_policy_one_actor_per_tick() {
    let s = system(
        "class A { op m() }\nassoc peer A[*] -- A[*]",
        &["statechart A\ninitial S; state S; state T\ntrans S -> T / peer!m()"],
        "obj a: A {}\nobj b: A {}\nlink peer a -- b",
    );
    let e = World::new(s, 4, Policy::Sequential).unwrap().run(6);
    let mut per_tick: BTreeMap<usize, usize> = BTreeMap::new();
    for ev in e.events.iter().filter(|ev| ev.kind == EventKind::Fire) {
        *per_tick.entry(ev.tick).or_default() += 1;
    }
    assert!(per_tick.values().all(|&n| n == 1));
}
