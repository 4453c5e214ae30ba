//! Randomised checks of the commitment and distinguisher contracts.

use chslab_core::commitment::{binding_sum, random_strategy, CommitmentParams};
use chslab_core::locc::{locc_advantage_closed_form, ppt_vs_haar_bound};
use chslab_core::typespace::sample_haar;
use chslab_core::Limits;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_senders_respect_sum_binding(seed in any::<u64>(), n in 2u32..=3, p in 1usize..=2) {
        let cp = CommitmentParams::new(1, n, p, 0).unwrap();
        let common = sample_haar(1 << n, seed ^ 0xc0ffee).unwrap();
        let sender = random_strategy(&cp, seed, &Limits::default()).unwrap();
        let o = binding_sum(&sender, &common, &cp).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&o.p0));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&o.p1));
        prop_assert!(o.p0 + o.p1 <= o.bound + 1e-9, "{o:?}");
    }

    #[test]
    fn advantage_is_a_positive_probability_gap(t in 1u64..=6, extra in 0u64..200) {
        let d = 2 * t + extra;
        let a = locc_advantage_closed_form(d, t).unwrap();
        prop_assert!(a > 0.0 && a <= 1.0, "d={d}, t={t}: {a}");
    }
}

#[test]
fn lower_bound_never_exceeds_upper_bound() {
    for (d, t) in [(3, 1), (4, 1), (5, 1), (6, 1), (7, 1), (5, 2)] {
        let s = ppt_vs_haar_bound(d, t, &Limits::default()).unwrap();
        let gap = s.true_gap.expect("small enough to build the true moments");
        assert!(s.advantage <= gap + 1e-12, "d={d}, t={t}: {s:?}");
    }
}
