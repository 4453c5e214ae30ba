use chslab_core::combinatorics::binom_f64;
use chslab_core::typespace::{
    enumerate_types, haar_moment, haar_moment_mc, prob_good_type, sym_projector, type_bipartition,
    type_mixture, type_state,
};
use chslab_core::{PrefixParams, C64};

use super::{record_density, Ctx, Experiment, Failure, Outcome, Validated};
use crate::report::ModeTag::{Exact, Sampled};
use crate::report::Recorder;

pub const HAAR_MOMENT: Experiment = Experiment {
    name: "haar-moment",
    operation: "typespace::haar_moment, sym_projector, type_mixture",
    asserts:
        "symmetric projector over C(d+t-1,t) equals the uniform mixture of type states entrywise",
    defaults: &[("d", 2), ("t", 2)],
    body: haar_moment_body,
};

fn haar_moment_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let d = ctx.params.usize("d")?;
    let t = ctx.params.usize("t")?;
    if d == 0 {
        return Err(Failure::Config("d must be at least 1".into()));
    }
    let scaled =
        sym_projector(d, t, &ctx.limits)?.scale(1.0 / binom_f64((d + t - 1) as u64, t as u64));
    let mixture = type_mixture(d, t, &ctx.limits)?;
    rec.eq(
        "projector_vs_type_mixture",
        scaled.max_abs_diff(&mixture)?,
        Exact,
        0.0,
        1e-12,
    );
    let moment = haar_moment(d, t, &ctx.limits)?;
    record_density(rec, "moment", &moment)
}

pub const HAAR_MOMENT_MC: Experiment = Experiment {
    name: "haar-moment-mc",
    operation: "typespace::haar_moment_mc",
    asserts: "sample mean of t-fold Haar states matches the exact moment in max entry",
    defaults: &[("d", 2), ("t", 2), ("samples", 100_000)],
    body: haar_moment_mc_body,
};

fn haar_moment_mc_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let d = ctx.params.usize("d")?;
    let t = ctx.params.usize("t")?;
    let samples = ctx.params.count("samples", 1 << 32)?;
    if d == 0 {
        return Err(Failure::Config("d must be at least 1".into()));
    }
    let exact = haar_moment(d, t, &ctx.limits)?;
    let mc = haar_moment_mc(d, t, samples, ctx.seed, &ctx.limits)?;
    rec.le(
        "max_entry_deviation",
        mc.max_abs_diff(&exact)?,
        Sampled,
        5e-3,
        0.0,
    );
    Ok(())
}

pub const BIPARTITION: Experiment = Experiment {
    name: "bipartition",
    operation: "typespace::type_bipartition",
    asserts: "every collision-free type state splits as an equal-weight sum over x-subsets",
    defaults: &[("d", 5), ("t", 3), ("x", 1)],
    body: bipartition_body,
};

fn bipartition_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let d = ctx.params.usize("d")?;
    let t = ctx.params.usize("t")?;
    let x = ctx.params.usize("x")?;
    if d == 0 || x > t {
        return Err(Failure::Config(format!(
            "need d >= 1 and x <= t, got d={d}, t={t}, x={x}"
        )));
    }
    let mut worst = 0.0f64;
    let mut checked = 0u64;
    for ty in enumerate_types(d, t, &ctx.limits)? {
        if !ty.collision_free() {
            continue;
        }
        let split = type_bipartition(&ty, x)?;
        let want = type_state(&ty, &ctx.limits)?;
        let mut acc = want.amplitudes().map(|_| C64::new(0.0, 0.0));
        for (left, right) in &split.pairs {
            let l = type_state(left, &ctx.limits)?.into_amplitudes();
            let r = type_state(right, &ctx.limits)?.into_amplitudes();
            acc += l.kronecker(&r) * C64::new(split.coefficient, 0.0);
        }
        let err = (acc - want.amplitudes())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        checked += 1;
    }
    rec.info("collision_free_types", checked as f64, Exact);
    rec.eq("max_reconstruction_error", worst, Exact, 0.0, 1e-12);
    Ok(())
}

pub const GOOD_TYPE_PROBABILITY: Experiment = Experiment {
    name: "good-type-probability",
    operation: "typespace::prob_good_type",
    asserts: "sampled fraction of prefix-collision-free types agrees with exact enumeration",
    defaults: &[
        ("n", 2),
        ("m", 0),
        ("ell", 1),
        ("t", 3),
        ("trials", 100_000),
    ],
    body: good_type_body,
};

fn good_type_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let p = PrefixParams::new(
        ctx.params.u32("n")?,
        ctx.params.u32("m")?,
        ctx.params.usize("ell")?,
        ctx.params.usize("t")?,
    )
    .validated()?;
    let trials = ctx.params.count("trials", 1 << 40)?;
    let r = prob_good_type(&p, trials, ctx.seed, &ctx.limits)?;
    let exact = *r.exact.numer() as f64 / *r.exact.denom() as f64;
    rec.info("exact_probability", exact, Exact);
    rec.within_sigma("sampled_probability", r.mc.mean, r.mc.stderr, exact, 4.0);
    Ok(())
}
