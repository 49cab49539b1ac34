mod common;

use proptest::prelude::*;
use rand::Rng;
use umlsem::check::{check_refinement, replay, RefinementStatus};
use umlsem::dsl::UnhandledPolicy;

use common::{rng, Machine};

const BUDGET: usize = 2_000_000;

fn prune(m: &Machine, r: &mut rand_chacha::ChaCha8Rng) -> Option<Machine> {
    let nd = m.nondeterministic();
    if nd.is_empty() {
        return None;
    }
    let mut p = m.clone();
    p.trans.remove(nd[r.gen_range(0..nd.len())]);
    Some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn reflexive(seed in any::<u64>(), h in 0usize..5) {
        let m = Machine::random(&mut rng(seed), 5, 3, true);
        let s = m.sts(UnhandledPolicy::Ignore);
        prop_assert!(check_refinement(&s, &s, h, BUDGET).holds());
    }

    #[test]
    fn agrees_with_brute_force(a in any::<u64>(), b in any::<u64>(), h in 1usize..4) {
        let mut r = rng(a);
        let m1 = Machine::random(&mut r, 4, 2, false);
        let mut m2 = Machine::random(&mut rng(b), 4, 2, false);
        m2.inputs = m1.inputs;
        m2.trans.retain(|t| t.trigger.is_none_or(|e| e < m1.inputs));
        let v = check_refinement(&m1.sts(UnhandledPolicy::Ignore), &m2.sts(UnhandledPolicy::Ignore), h, BUDGET);
        prop_assert_ne!(v.status, RefinementStatus::Inconclusive);
        prop_assert_eq!(v.holds(), m2.refines(&m1, h));
        if let Some(cx) = v.counterexample {
            prop_assert!(replay(&m2.sts(UnhandledPolicy::Ignore), &cx.input, &cx.output));
            prop_assert!(!replay(&m1.sts(UnhandledPolicy::Ignore), &cx.input, &cx.output));
        }
    }

    #[test]
    fn transitive_on_pruning_chains(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = Machine::random(&mut r, 4, 2, false).with_branch(&mut r).with_branch(&mut r);
        let Some(b) = prune(&a, &mut r) else { return Ok(()) };
        let Some(c) = prune(&b, &mut r) else { return Ok(()) };
        prop_assert!(b.refines(&a, 3) && c.refines(&b, 3));
        let (sa, sc) = (a.sts(UnhandledPolicy::Ignore), c.sts(UnhandledPolicy::Ignore));
        prop_assert!(check_refinement(&sa, &sc, 3, BUDGET).holds());
    }

    #[test]
    fn ignore_refines_chaos(seed in any::<u64>()) {
        let m = Machine::random(&mut rng(seed), 3, 2, false);
        let v = check_refinement(&m.sts(UnhandledPolicy::Chaos), &m.sts(UnhandledPolicy::Ignore), 3, BUDGET);
        prop_assert!(v.holds(), "{:?}", v);
    }
}

#[test]
fn bound_is_always_reported() {
    let m = Machine::random(&mut rng(9), 3, 2, false);
    let s = m.sts(UnhandledPolicy::Ignore);
    for h in 0..4 {
        assert_eq!(check_refinement(&s, &s, h, BUDGET).bound, h);
    }
}
