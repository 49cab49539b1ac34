use super::*;

const FIG3: &str = "class Branch { attr stock: int }\nclass CentralOffice {}\nassoc coordinates CentralOffice[1] -- Branch[0..*]";

#[test]
fn warehouse_class_model() {
    let m = parse_class_model(FIG3).unwrap();
    assert_eq!(m.classes.len(), 2);
    assert_eq!(m.associations.len(), 1);
    let a = &m.associations[0];
    assert_eq!(a.left.class, "CentralOffice");
    assert_eq!(a.left.mult, Multiplicity::exactly(1));
    assert_eq!(a.right.mult, Multiplicity::MANY);
    assert_eq!(m.classes[0].pos.line, 1);
    assert_eq!(a.pos.line, 3);
}

#[test]
fn empty_class_model() {
    let m = parse_class_model("").unwrap();
    assert!(m.classes.is_empty() && m.associations.is_empty());
}

#[test]
fn undeclared_attribute_type() {
    let e = parse_class_model("class A { attr x: Undeclared }").unwrap_err();
    match e {
        DslError::Resolve { name, pos, .. } => {
            assert_eq!(name, "Undeclared");
            assert_eq!((pos.line, pos.col), (1, 11));
        }
        other => panic!("{other:?}"),
    }
    // a declared class or a base type resolves
    parse_class_model("class A { attr x: B attr y: int }\nclass B {}").unwrap();
}

#[test]
fn packages_are_name_spaces() {
    let m = parse_class_model(
        "package shop { class Item {} class Cart { attr first: Item } }\n\
         package stock { class Item {} }\n\
         assoc holds shop::Cart[1] -- shop::Item[*]",
    )
    .unwrap();
    assert_eq!(m.classes[1].attributes[0].ty, TypeRef::Class("shop::Item".into()));
    assert_eq!(m.associations[0].right.class, "shop::Item");
    let e = parse_class_model("package a { class X {} } package b { class X {} } class Y { attr x: X }")
        .unwrap_err();
    assert!(matches!(e, DslError::Resolve { .. }));
    let e = parse_class_model("class X {} class X {}").unwrap_err();
    assert!(matches!(e, DslError::Resolve { .. }));
}

#[test]
fn multiplicities_and_kinds() {
    let m = parse_class_model(
        "class W {} class P {}\nassoc a W[1] *-- P[2]\nassoc b W[0..1] o-- P[3..*]",
    )
    .unwrap();
    assert_eq!(m.associations[0].kind, AssocKind::Composition);
    assert_eq!(m.associations[0].right.mult, Multiplicity::exactly(2));
    assert_eq!(m.associations[1].kind, AssocKind::Aggregate);
    assert_eq!(
        m.associations[1].right.mult,
        Multiplicity {
            lower: 3,
            upper: None
        }
    );
    assert!(parse_class_model("class W {}\nassoc a W[3..1] -- W[1]").is_err());
}

#[test]
fn minimal_state_diagram() {
    let d = parse_state_diagram("initial Idle; state Idle; state Dialing; trans Idle -> Dialing on liftReceiver")
        .unwrap();
    assert_eq!(d.states.len(), 2);
    assert!(d.states.iter().all(|s| s.kind == StateKind::Simple));
    assert_eq!(d.transitions.len(), 1);
    assert_eq!(d.transitions[0].event.as_ref().unwrap().selector, "liftReceiver");
    assert_eq!(d.initial.as_deref(), Some("Idle"));
}

#[test]
fn nested_state_diagram_depth() {
    let d = parse_state_diagram(
        "initial Busy\n\
         state Busy { initial A; state A; state B }\n\
         and Talk {\n\
           region { initial X; state X; state Y }\n\
           region R2 { initial U; state U; state V }\n\
         }\n\
         trans Busy -> Talk on connect",
    )
    .unwrap();
    assert_eq!(d.depth(), 2);
    let busy = d.find("Busy").unwrap();
    assert_eq!(busy.children().len(), 2);
    let talk = d.find("Talk").unwrap();
    assert_eq!(talk.children().len(), 2);
    assert!(talk.children().iter().all(|r| r.children().len() == 2));
    assert_eq!(talk.children()[0].name, "$s1");
    assert!(talk.children()[0].anonymous);
}

#[test]
fn two_initial_markers_rejected() {
    let e = parse_state_diagram("initial A\ninitial B\nstate A\nstate B").unwrap_err();
    match e {
        DslError::Syntax { pos, .. } => assert_eq!(pos.line, 2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn transition_endpoints_resolve() {
    let e = parse_state_diagram("initial A; state A; trans A -> Nowhere on f").unwrap_err();
    assert!(matches!(e, DslError::Resolve { ref name, .. } if name == "Nowhere"));
}

#[test]
fn transition_clauses() {
    let d = parse_state_diagram(
        "statechart Exchange unhandled chaos\n\
         initial S; state S\n\
         trans S -> S on dial(d, 3, _) [d > 0 and not (ok == false)] / lines.Caller!tone(d, \"x\"), new Worker!start(self)",
    )
    .unwrap();
    assert_eq!(d.owner.as_deref(), Some("Exchange"));
    assert_eq!(d.unhandled, Some(UnhandledPolicy::Chaos));
    let t = &d.transitions[0];
    let ev = t.event.as_ref().unwrap();
    assert_eq!(
        ev.params,
        vec![Pattern::Bind("d".into()), Pattern::Lit(Literal::Int(3)), Pattern::Wild]
    );
    assert_eq!(t.sends.len(), 2);
    assert_eq!(t.sends[0].target, SendTarget::Name("lines.Caller".into()));
    assert_eq!(t.sends[1].target, SendTarget::New("Worker".into()));
}

const PHONE: &str = "seq call\n\
    lifeline caller: Caller\n\
    lifeline exch: Exchange\n\
    lifeline recv: Receiver\n\
    msg caller -> exch liftReceiver\n\
    msg exch -> caller dialTone\n\
    msg caller -> exch dialDigit(7)\n\
    msg exch -> recv ringTone\n\
    msg recv -> exch answer\n";

#[test]
fn phone_call_sequence() {
    let s = parse_sequence_diagram(PHONE).unwrap();
    assert_eq!(s.lifelines.len(), 3);
    assert_eq!(s.interactions.len(), 5);
    assert_eq!(s.interactions[2].args, vec![ArgPattern::Lit(Literal::Int(7))]);
}

#[test]
fn self_directed_message() {
    let s = parse_sequence_diagram("seq solo\nlifeline a: A\nmsg a -> a tick").unwrap();
    assert_eq!(s.interactions.len(), 1);
}

#[test]
fn undeclared_role() {
    let e = parse_sequence_diagram("seq s\nlifeline a: A\nmsg a -> b hello").unwrap_err();
    match e {
        DslError::Resolve { name, pos, .. } => {
            assert_eq!(name, "b");
            assert_eq!(pos.line, 3);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse_sequence_diagram("seq s\nlifeline a: A\n"),
        Err(DslError::Syntax { .. })
    ));
}

#[test]
fn warehouse_snapshot() {
    let mut s = parse_snapshot(
        "obj c1: CentralOffice {}; obj b1: Branch { stock = 5 }; link coordinates c1 -- b1",
    )
    .unwrap();
    assert_eq!(s.objects.len(), 2);
    assert_eq!(s.links.len(), 1);
    assert!(s.links[0].bidirectional);
    let m = parse_class_model(FIG3).unwrap();
    resolve_snapshot(&mut s, &m).unwrap();
}

#[test]
fn anonymous_object() {
    let s = parse_snapshot(": Branch {}\nobj : Branch {}").unwrap();
    assert_eq!(s.objects[0].name, "$o1");
    assert!(s.objects[0].anonymous);
    assert_eq!(s.objects[1].name, "$o2");
}

#[test]
fn link_outside_association_table() {
    let m = parse_class_model(
        "class Branch {} class CentralOffice {} class Truck {}\n\
         assoc coordinates CentralOffice[1] -- Branch[*]",
    )
    .unwrap();
    let mut s = parse_snapshot("obj t: Truck {}; obj b: Branch {}; link coordinates t -- b").unwrap();
    let e = resolve_snapshot(&mut s, &m).unwrap_err();
    assert!(matches!(e, DslError::Resolve { ref name, .. } if name == "coordinates"));

    let mut s = parse_snapshot("obj b: Branch { colour = 3 }").unwrap();
    assert!(resolve_snapshot(&mut s, &m).is_err());
}

#[test]
fn error_positions_inside_input() {
    for bad in ["class {", "class A { attr }", "assoc x A[1] ~ B", "\n\n  gen A <", "class A { op f(int }"] {
        let e = parse_class_model(bad).unwrap_err();
        let lines = bad.lines().count().max(1) as u32;
        assert!(e.pos().line >= 1 && e.pos().line <= lines + 1, "{bad:?} -> {e}");
    }
}

#[test]
fn printing_round_trips() {
    let m = parse_class_model(
        "package p { abstract class A { attr x: int in 0..3 attr s: string in {\"a\", \"b\"} op f(int, bool): int } }\n\
         class B extends p::A { attr r: p::A }\n\
         assoc owns B[0..1] *-- p::A[*] { attr since: int }\n\
         constraint pos on B: x + 1 > 0 and not (#owns.p::A == 2)",
    )
    .unwrap();
    let again = parse_class_model(&print::class_model(&m)).unwrap();
    assert_eq!(m, again);

    let d = parse_state_diagram(
        "statechart B\ninitial S\nstate S { initial T; state T; state }\nand { region { initial U; state U } }\n\
         trans T -> $s2 on f(x, -2) [x >= -1] / owns!g(x, self)",
    )
    .unwrap();
    assert_eq!(d, parse_state_diagram(&print::state_diagram(&d)).unwrap());

    let s = parse_sequence_diagram(PHONE).unwrap();
    assert_eq!(s, parse_sequence_diagram(&print::sequence_diagram(&s)).unwrap());

    let n = parse_snapshot("snapshot w\nobj a: A { n = -3; s = \"q\\\"\" }\n: A {}\nlink r a -> $o1").unwrap();
    assert_eq!(n, parse_snapshot(&print::snapshot(&n)).unwrap());
}
