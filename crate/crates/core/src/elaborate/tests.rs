use super::*;
use crate::dsl::{parse_class_model, parse_state_diagram, parse_snapshot, AssocKind, Multiplicity, UnhandledPolicy};
use crate::model::{InputSymbol, Label, TransitionKind, Value};

fn model(text: &str) -> StaticModel {
    elaborate_static(&parse_class_model(text).unwrap()).unwrap()
}

fn sts(class_text: &str, class: &str, diagram: &str, opts: BuildOptions) -> crate::model::StateTransitionSystem {
    let m = model(class_text);
    compile_diagram(&parse_state_diagram(diagram).unwrap(), &m, class, &opts).unwrap()
}

const FIG3: &str = "class Branch { attr stock: int }\nclass CentralOffice {}\nassoc coordinates CentralOffice[1] -- Branch[0..*]";

#[test]
fn association_link_sets() {
    let m = model(FIG3);
    let b = &m.link_ends["Branch"]["coordinates.CentralOffice"];
    assert_eq!(b.mult, Multiplicity::exactly(1));
    assert_eq!(b.target_class, "CentralOffice");
    let c = &m.link_ends["CentralOffice"]["coordinates.Branch"];
    assert_eq!(c.mult, Multiplicity::MANY);
    assert!(c.mult.admits(0));
    assert!(!b.mult.admits(2));
}

#[test]
fn no_associations_no_link_sets() {
    let m = model("class A { attr x: int }");
    assert!(m.link_ends["A"].is_empty());
    let snap = parse_snapshot("obj a: A { x = 4 }").unwrap();
    let st = snapshot_state(&m, &snap).unwrap();
    let obj = &st.state.alive[st.id("a").unwrap()];
    assert!(obj.links.is_empty());
    assert_eq!(obj.valuation.len(), 1);
    assert_eq!(obj.valuation["x"], Value::Int(4));
}

#[test]
fn composition_aggregate_multiplicity() {
    let e = elaborate_static(&parse_class_model("class Whole {} class Part {}\nassoc has Whole[0..2] *-- Part[*]").unwrap())
        .unwrap_err();
    assert!(matches!(e, ElabError::CompositionMultiplicity { ref assoc, .. } if assoc == "has"), "{e}");
    let m = model("class Whole {} class Part {}\nassoc has Whole[0..1] *-- Part[*]");
    let end = &m.link_ends["Part"]["has.Whole"];
    assert!(end.toward_aggregate);
    assert_eq!(end.kind, AssocKind::Composition);
}

#[test]
fn inheritance_problems() {
    let e = elaborate_static(&parse_class_model("class A {} class B {}\ngen A < B\ngen B < A").unwrap()).unwrap_err();
    assert!(matches!(e, ElabError::CyclicInheritance { ref classes, .. } if classes.len() == 2));
    let e = elaborate_static(
        &parse_class_model("class A { attr x: int } class B { attr x: string }\ngen B < A").unwrap(),
    )
    .unwrap_err();
    assert!(matches!(e, ElabError::SignatureConflict { ref name, .. } if name == "x"));
    let m = model("class A { attr x: int } class B { op f() }\ngen B < A");
    let sig = m.signature("B").unwrap();
    assert!(sig.attributes.contains_key("x") && sig.methods.contains_key("f"));
}

#[test]
fn inherited_link_sets_and_snapshot_links() {
    let m = model(
        "abstract class Location {} class Branch {} class Office {}\ngen Branch < Location\n\
         assoc near Location[0..1] -- Office[*]",
    );
    assert!(m.link_ends["Branch"].contains_key("near.Office"));
    let snap = parse_snapshot("obj o: Office {}\nobj b: Branch {}\nlink near o -- b").unwrap();
    let st = snapshot_state(&m, &snap).unwrap();
    let (o, b) = (st.id("o").unwrap(), st.id("b").unwrap());
    assert!(st.state.alive[b].links["near.Office"].contains(o));
    assert!(st.state.alive[o].links["near.Location"].contains(b));
    assert_eq!(o.tag(), &[0]);
    assert_eq!(b.tag(), &[1]);
}

#[test]
fn constraints_compile() {
    let m = model("class A { attr x: int }\nconstraint pos on A: x >= 0");
    assert_eq!(m.constraints.len(), 1);
    let bad = StaticModel::build(&parse_class_model("class A { attr x: int }\nconstraint pos on A: x + 1").unwrap());
    assert_eq!(bad.problems.len(), 1);
}

#[test]
fn flatten_simple_is_identity() {
    let d = parse_state_diagram("initial A; state A; state B; trans A -> B on f; trans B -> A on g").unwrap();
    let f = flatten(&d).unwrap();
    assert_eq!(f.labels, vec![Label::single("A"), Label::single("B")]);
    assert_eq!(f.initial, vec![0]);
    assert_eq!(f.transitions.len(), 2);
    assert_eq!((f.transitions[0].source, f.transitions[0].target), (0, 1));
}

#[test]
fn flatten_and_product() {
    let d = parse_state_diagram(
        "initial P\nand P {\n region R1 { initial a; state a; state b }\n region R2 { initial x; state x; state y; state z }\n}",
    )
    .unwrap();
    let f = flatten(&d).unwrap();
    assert_eq!(f.labels.len(), 6);
    assert_eq!(f.labels[f.initial[0]], Label(vec!["a".into(), "x".into()]));
}

#[test]
fn flatten_or_source_expansion() {
    let d = parse_state_diagram(
        "initial On\nstate On { initial a; state a; state b; state c }\nstate Off\ntrans On -> Off on stop\ntrans Off -> On on go",
    )
    .unwrap();
    let f = flatten(&d).unwrap();
    assert_eq!(f.labels.len(), 4);
    let stops: Vec<_> = f.transitions.iter().filter(|t| t.origin == 0).collect();
    assert_eq!(stops.len(), 3);
    let off = f.label_index(&Label::single("Off")).unwrap();
    assert!(stops.iter().all(|t| t.target == off));
    // entering a composite lands in its initial configuration
    let go = f.transitions.iter().find(|t| t.origin == 1).unwrap();
    assert_eq!(f.labels[go.target], Label::single("a"));
}

#[test]
fn flatten_cross_region_entry() {
    let d = parse_state_diagram(
        "initial Idle\nstate Idle\nand P {\n region { initial a; state a; state b }\n region { initial x; state x; state y }\n}\n\
         trans Idle -> y on f\ntrans b -> a on g",
    )
    .unwrap();
    let f = flatten(&d).unwrap();
    let t = f.transitions.iter().find(|t| t.origin == 0).unwrap();
    assert_eq!(f.labels[t.target], Label(vec!["a".into(), "y".into()]));
    // a region-local step keeps the other region's leaf
    let local: Vec<_> = f.transitions.iter().filter(|t| t.origin == 1).map(|t| (f.labels[t.source].clone(), f.labels[t.target].clone())).collect();
    assert_eq!(local.len(), 2);
    assert!(local.contains(&(Label(vec!["b".into(), "y".into()]), Label(vec!["a".into(), "y".into()]))));
}

#[test]
fn flatten_missing_initial() {
    let d = parse_state_diagram("initial On\nstate On { state a; state b }").unwrap();
    assert!(matches!(flatten(&d), Err(ElabError::NoInitial { composite }) if composite == "On"));
}

const SINGLE: &str = "class K { op f() }";

#[test]
fn ignore_mode_self_loop() {
    let s = sts(SINGLE, "K", "initial S; state S", BuildOptions::default());
    assert_eq!(s.states().len(), 1);
    assert_eq!(s.transitions().len(), 1);
    let t = &s.transitions()[0];
    assert_eq!((t.source, t.target, t.kind), (0, 0, TransitionKind::Default));
    assert_eq!(t.selector(), Some("f"));
    assert!(t.outputs.is_empty());
    assert!(s.is_input_total());
}

#[test]
fn chaos_mode_all_successors() {
    let opts = BuildOptions {
        policy: Some(UnhandledPolicy::Chaos),
        ..BuildOptions::default()
    };
    let s = sts(SINGLE, "K", "initial S; state S", opts);
    assert_eq!(s.transitions().len(), 1);
    assert_eq!(s.transitions()[0].kind, TransitionKind::Chaos);

    let cm = "class K { op f() op g() }\nassoc peer K[*] -- P[*]\nclass P { op h() }";
    let s = sts(cm, "K", "statechart K unhandled chaos\ninitial A; state A; state B\ntrans A -> B on g / peer!h()", BuildOptions::default());
    // f in A and B, g in B: each goes to 2 states with output words {ε, h}
    let chaos: Vec<_> = s.transitions().iter().filter(|t| t.kind == TransitionKind::Chaos).collect();
    assert_eq!(chaos.len(), 3 * 2 * 2);
}

#[test]
fn guards_split_valuations() {
    let s = sts(
        "class K { attr x: int in 0..1 op f() }",
        "K",
        "initial S; state S; state T; trans S -> T on f [x > 0]",
        BuildOptions::default(),
    );
    assert_eq!(s.tracked(), &["x".to_string()]);
    assert_eq!(s.states().len(), 4);
    let explicit: Vec<_> = s.transitions().iter().filter(|t| t.kind == TransitionKind::Explicit).collect();
    assert_eq!(explicit.len(), 1);
    assert_eq!(s.states()[explicit[0].source].valuation, vec![Value::Int(1)]);
    assert!(explicit[0].guard.is_none());
}

#[test]
fn build_errors() {
    let m = model(SINGLE);
    let d = parse_state_diagram("initial S; state S; trans S -> S on nope").unwrap();
    let e = compile_diagram(&d, &m, "K", &BuildOptions::default()).unwrap_err();
    assert!(matches!(e, ElabError::UnknownSelector { ref selector, .. } if selector == "nope"));
    assert_eq!(e.pos().unwrap().line, 1);
    let m = model("class K { attr n: int op f() }");
    let d = parse_state_diagram("initial S; state S; trans S -> S on f [n]").unwrap();
    assert!(matches!(compile_diagram(&d, &m, "K", &BuildOptions::default()), Err(ElabError::GuardTypeError { .. })));
    let d = parse_state_diagram("initial S; state S; trans S -> S on f [n > 1]").unwrap();
    assert!(matches!(compile_diagram(&d, &m, "K", &BuildOptions::default()), Err(ElabError::GuardTypeError { .. })));
}

#[test]
fn blackbox_horizon_zero() {
    let s = sts(SINGLE, "K", "initial S; state S", BuildOptions::default());
    let b = derive_blackbox(&s, 0).unwrap();
    assert_eq!(b.relation.len(), 1);
    assert_eq!(b.outputs(&[]).unwrap().len(), 1);
}

const ECHO_MODEL: &str = "class E { op ping(int) }\nassoc out E[*] -- Sink[*]\nclass Sink { op pong(int) }";

#[test]
fn blackbox_deterministic_echo() {
    let s = sts(
        ECHO_MODEL,
        "E",
        "initial A; state A; state B\ntrans A -> B on ping(n) / out!pong(n)\ntrans B -> A on ping(n) / out!pong(n + 1)",
        BuildOptions::default(),
    );
    let b = derive_blackbox(&s, 2).unwrap();
    assert!(b.relation.values().all(|o| o.len() == 1));
    let p = |n| Some(InputSymbol::new("ping", vec![Value::Int(n)]));
    let outs = b.outputs(&[p(0), p(0)]).unwrap();
    let out = outs.iter().next().unwrap();
    assert_eq!(out[0][0].to_string(), "out.Sink!pong(0)");
    assert_eq!(out[1][0].to_string(), "out.Sink!pong(1)");
    assert!(b.is_prefix_consistent());
}

#[test]
fn blackbox_nondeterministic_branch() {
    let s = sts(
        ECHO_MODEL,
        "E",
        "initial A; state A; state B; state C\ntrans A -> B on ping(n) / out!pong(1)\ntrans A -> C on ping(n) / out!pong(2)",
        BuildOptions::default(),
    );
    let b = derive_blackbox(&s, 1).unwrap();
    let p = Some(InputSymbol::new("ping", vec![Value::Int(0)]));
    assert_eq!(b.output_set_size(&[p]), 2);
    assert_eq!(b.output_set_size(&[None]), 1);
}

#[test]
fn blackbox_budget() {
    let s = sts(ECHO_MODEL, "E", "initial A; state A", BuildOptions::default());
    assert!(matches!(derive_blackbox_with(&s, 6, 50), Err(ElabError::HorizonTooLarge { .. })));
}

#[test]
fn passive_class_ignores_everything() {
    let m = model(SINGLE);
    let s = passive_sts(&m, "K").unwrap();
    assert_eq!(s.states().len(), 1);
    assert!(s.is_input_total());
}
