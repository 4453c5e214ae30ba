use chslab_core::combinatorics::binom;
use chslab_core::locc::{
    kneser_one_norm, locc_advantage_closed_form, locc_advantage_mc, ppt_diff_norm,
    ppt_vs_haar_bound, KneserParams, LoccParams,
};

use super::{Ctx, Experiment, Failure, Outcome, Validated};
use crate::report::ModeTag::Exact;
use crate::report::Recorder;

pub const KNESER: Experiment = Experiment {
    name: "kneser",
    operation: "locc::kneser_one_norm",
    asserts: "spectral 1-norm of K(v,k) equals 2^k (v-1)(v-3)...(v-2k+1)/k!",
    defaults: &[("v", 5), ("k", 2)],
    body: kneser_body,
};

fn kneser_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let kp = KneserParams::new(ctx.params.usize("v")?, ctx.params.usize("k")?).validated()?;
    let r = kneser_one_norm(&kp, &ctx.limits)?;
    rec.eq("one_norm", r.exact, Exact, r.formula, 1e-8);
    Ok(())
}

pub const KNESER_SWEEP: Experiment = Experiment {
    name: "kneser-sweep",
    operation: "locc::kneser_one_norm",
    asserts: "the Kneser 1-norm formula holds on every K(v,k) with v >= 2k+1 and at most max_vertices vertices",
    defaults: &[("max_vertices", 200)],
    body: kneser_sweep_body,
};

fn kneser_sweep_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let max = ctx.params.count("max_vertices", 5000)? as u128;
    let (mut graphs, mut worst) = (0u64, 0.0f64);
    let mut k = 1usize;
    while binom(2 * k as u64 + 1, k as u64).is_some_and(|c| c <= max) {
        let mut v = 2 * k + 1;
        while binom(v as u64, k as u64).is_some_and(|c| c <= max) {
            let r = kneser_one_norm(&KneserParams::new(v, k)?, &ctx.limits)?;
            worst = worst.max((r.exact - r.formula).abs());
            match (v, k) {
                (5, 2) => rec.eq("one_norm_K(5,2)", r.exact, Exact, 16.0, 1e-8),
                (7, 3) => rec.eq("one_norm_K(7,3)", r.exact, Exact, 64.0, 1e-8),
                _ => {}
            }
            graphs += 1;
            v += 1;
        }
        k += 1;
    }
    rec.info("graphs", graphs as f64, Exact);
    rec.eq("max_formula_deviation", worst, Exact, 0.0, 1e-8);
    Ok(())
}

pub const PPT_CHAIN: Experiment = Experiment {
    name: "ppt-chain",
    operation: "locc::ppt_diff_norm",
    asserts: "exact partial-transpose gap <= Kneser block sum = closed sum <= factorial bound <= exp(2t^2/(d-2t+2)) - 1",
    defaults: &[("d", 6), ("t", 2)],
    body: ppt_chain_body,
};

fn ppt_args(ctx: &Ctx) -> Result<(usize, usize), Failure> {
    let d = ctx.params.usize("d")?;
    let t = ctx.params.usize("t")?;
    if t == 0 || d <= 2 * t || d > 64 {
        return Err(Failure::Config(format!(
            "need t >= 1 and 2t < d <= 64, got d={d}, t={t}"
        )));
    }
    Ok((d, t))
}

fn ppt_chain_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let (d, t) = ppt_args(ctx)?;
    let c = ppt_diff_norm(d, t, &ctx.limits)?;
    rec.le("exact_vs_kneser_sum", c.exact, Exact, c.kneser_sum, 1e-8);
    rec.eq(
        "kneser_sum_vs_closed_sum",
        c.kneser_sum,
        Exact,
        c.middle,
        1e-8,
    );
    rec.le(
        "closed_sum_vs_factorial",
        c.middle,
        Exact,
        c.factorial_bound,
        1e-8,
    );
    rec.le(
        "factorial_vs_series",
        c.factorial_bound,
        Exact,
        c.series_bound,
        1e-8,
    );
    Ok(())
}

pub const PPT_SANDWICH: Experiment = Experiment {
    name: "ppt-sandwich",
    operation: "locc::ppt_vs_haar_bound",
    asserts: "collision distinguisher advantage <= half the partial-transpose norm between the true moments",
    defaults: &[("d", 4), ("t", 1)],
    body: ppt_sandwich_body,
};

fn ppt_sandwich_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let (d, t) = ppt_args(ctx)?;
    let s = ppt_vs_haar_bound(d, t, &ctx.limits)?;
    rec.info("surrogate_gap", s.surrogate_gap, Exact);
    match s.true_gap {
        Some(gap) => rec.le("advantage_vs_true_gap", s.advantage, Exact, gap, 1e-12),
        None => rec.error("advantage_vs_true_gap", "DimensionOverflow"),
    }
    if let (Some(r), Some(g)) = (s.rho_slack, s.sigma_slack) {
        rec.info("identical_surrogate_slack", r, Exact);
        rec.info("independent_surrogate_slack", g, Exact);
    }
    Ok(())
}

pub const LOCC_ADVANTAGE: Experiment = Experiment {
    name: "locc-advantage",
    operation: "locc::locc_advantage_closed_form, locc_advantage_mc",
    asserts: "sampled collision-test advantage is within 4 sigma of the closed form",
    defaults: &[("d", 4), ("t", 1), ("trials", 1_000_000)],
    body: locc_body,
};

fn locc_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let d = ctx.params.get("d")?;
    let t = ctx.params.usize("t")?;
    let lp = LoccParams::new(d, t, ctx.params.count("trials", 1 << 40)?, ctx.seed).validated()?;
    if d < 2 * t as u64 {
        return Err(Failure::Config(format!("need d >= 2t, got d={d}, t={t}")));
    }
    let exact = locc_advantage_closed_form(d, t as u64)?;
    rec.info("closed_form", exact, Exact);
    let mc = locc_advantage_mc(&lp);
    rec.within_sigma("sampled_advantage", mc.estimate, mc.stderr, exact, 4.0);
    rec.info("scaled_advantage", exact * d as f64 / (t * t) as f64, Exact);
    Ok(())
}
