use chslab_core::commitment::{
    binding_sum, builtin_strategies, commit_state, fidelity_bound_check, hiding_distance,
    random_strategy, receiver_accept_prob_pure, CommitmentParams,
};
use chslab_core::pseudorandomness::{prs_multikey_hybrids, PseudoParams};
use chslab_core::rng::derive_seed;
use chslab_core::typespace::sample_haar;

use super::{Ctx, Experiment, Outcome, Validated};
use crate::report::ModeTag::Exact;
use crate::report::Recorder;

pub const COMMITMENT: Experiment = Experiment {
    name: "commitment",
    operation: "commitment::receiver_accept_prob_pure, binding_sum",
    asserts: "honest openings always accept; every sender strategy has p0 + p1 within the sum-binding bound",
    defaults: &[("lambda", 1), ("n", 2), ("p", 1), ("strategies", 20)],
    body: commitment_body,
};

fn commitment_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let cp = CommitmentParams::new(
        ctx.params.u32("lambda")?,
        ctx.params.u32("n")?,
        ctx.params.usize("p")?,
        0,
    )
    .validated()?;
    let strategies = ctx.params.get("strategies")?;
    let common = sample_haar(1 << cp.n, derive_seed(ctx.seed, 0))?;
    for (b, name) in [(false, "completeness_0"), (true, "completeness_1")] {
        let state = commit_state(b, &common, &cp, &ctx.limits)?;
        rec.eq(
            name,
            receiver_accept_prob_pure(b, &state, &common, &cp)?,
            Exact,
            1.0,
            1e-12,
        );
    }
    for (name, sender) in builtin_strategies(&common, &cp, &ctx.limits)? {
        let o = binding_sum(&sender, &common, &cp)?;
        rec.le(
            &format!("binding_{name}"),
            o.p0 + o.p1,
            Exact,
            o.bound,
            1e-9,
        );
    }
    if strategies > 0 {
        let mut worst: Option<(f64, f64)> = None;
        for i in 0..strategies {
            let sender = random_strategy(&cp, derive_seed(ctx.seed, i + 1), &ctx.limits)?;
            let o = binding_sum(&sender, &common, &cp)?;
            if worst.is_none_or(|(s, _)| o.p0 + o.p1 > s) {
                worst = Some((o.p0 + o.p1, o.bound));
            }
        }
        let (sum, bound) = worst.expect("at least one strategy");
        rec.le("binding_random_max", sum, Exact, bound, 1e-9);
    }
    Ok(())
}

pub const COMMITMENT_FIDELITY: Experiment = Experiment {
    name: "commitment-fidelity",
    operation: "commitment::fidelity_bound_check",
    asserts: "key-averaged common state has fidelity at most 2^-(n-lambda) with the maximally mixed state",
    defaults: &[("lambda", 1), ("n", 2), ("seeds", 100)],
    body: fidelity_body,
};

fn fidelity_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let lambda = ctx.params.u32("lambda")?;
    let n = ctx.params.u32("n")?;
    CommitmentParams::new(lambda, n, 1, 0).validated()?;
    let seeds = ctx.params.count("seeds", 1 << 20)?;
    let mut worst = (f64::NEG_INFINITY, 0.0);
    for i in 0..seeds {
        let common = sample_haar(1 << n, derive_seed(ctx.seed, i))?;
        let f = fidelity_bound_check(lambda, n, &common)?;
        if f.fidelity - f.bound > worst.0 - worst.1 {
            worst = (f.fidelity, f.bound);
        }
    }
    rec.le("max_fidelity", worst.0, Exact, worst.1, 1e-9);
    Ok(())
}

pub const COMMITMENT_HIDING: Experiment = Experiment {
    name: "commitment-hiding",
    operation: "commitment::hiding_distance",
    asserts: "hiding distance equals the multi-key hybrid distance with one copy per key",
    defaults: &[("lambda", 1), ("n", 2), ("p", 1), ("t", 1)],
    body: hiding_body,
};

fn hiding_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let cp = CommitmentParams::new(
        ctx.params.u32("lambda")?,
        ctx.params.u32("n")?,
        ctx.params.usize("p")?,
        ctx.params.usize("t")?,
    )
    .validated()?;
    let hybrid = PseudoParams::prs(cp.lambda, cp.n, 1, cp.t).validated()?;
    let td = hiding_distance(&cp, &ctx.limits)?;
    let reference = prs_multikey_hybrids(&hybrid, cp.p, &ctx.limits)?.td;
    rec.eq("hiding_distance", td, Exact, reference, 1e-10);
    Ok(())
}
