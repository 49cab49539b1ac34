mod common;

use proptest::prelude::*;
use rand::Rng;
use umlsem::check::{check_state, Naming, Rule};
use umlsem::dsl::{parse_class_model, parse_snapshot};
use umlsem::elaborate::{elaborate_static, snapshot_state};

use common::rng;

const MODEL: &str = "class Hub {}\nclass Spoke {}\nassoc wires Hub[0..1] -- Spoke[0..2]\n";

fn upper_breaches(snap: &str) -> usize {
    let model = elaborate_static(&parse_class_model(MODEL).unwrap()).unwrap();
    let s = snapshot_state(&model, &parse_snapshot(snap).unwrap()).unwrap();
    check_state(&s.state, &model, Naming { snapshot: Some(&s) })
        .iter()
        .filter(|v| v.rule == Rule::D001)
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Lower bounds are all 0 here, so every D001 is an upper-bound breach;
    /// dropping one link never adds one.
    #[test]
    fn removing_a_link_never_adds_upper_bound_breaches(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (hubs, spokes) = (r.gen_range(1..4), r.gen_range(1..5));
        let mut objs = String::new();
        for i in 0..hubs { objs.push_str(&format!("obj h{i}: Hub {{}}\n")); }
        for i in 0..spokes { objs.push_str(&format!("obj s{i}: Spoke {{}}\n")); }
        let mut links: Vec<String> = (0..r.gen_range(1..8))
            .map(|_| format!("link wires h{} -- s{}\n", r.gen_range(0..hubs), r.gen_range(0..spokes)))
            .collect();
        links.sort();
        links.dedup();
        let full = format!("{objs}{}", links.concat());
        let drop = r.gen_range(0..links.len());
        let fewer: String = links.iter().enumerate().filter(|(i, _)| *i != drop).map(|(_, l)| l.as_str()).collect();
        let reduced = format!("{objs}{fewer}");
        prop_assert!(upper_breaches(&reduced) <= upper_breaches(&full));
    }
}
