use chslab_core::combinatorics::permutations;
use chslab_core::pseudorandomness::{
    check_perm_split, lemma_nice_t_check, lemma_prfs_type_check, onewayness_quantity, prfs_hybrids,
    prs_hybrids, rank_attack, KeyAveraging, PrfsInput, PseudoParams,
};
use chslab_core::typespace::{
    enumerate_types, is_l_fold_prefix_collision_free, is_prefix_collision_free_up_to,
};
use chslab_core::{Mode, PrefixParams};

use super::{record_density, Ctx, Experiment, Failure, Outcome, Validated};
use crate::report::ModeTag::Exact;
use crate::report::Recorder;

pub const DISENTANGLING: Experiment = Experiment {
    name: "disentangling",
    operation: "pseudorandomness::check_perm_split, lemma_nice_t_check",
    asserts: "on every good type, key averaging kills cross-block permutations and disentangles the keyed block",
    defaults: &[("n", 2), ("m", 0), ("ell", 1), ("t", 1)],
    body: disentangling_body,
};

fn disentangling_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let ell = ctx.params.usize("ell")?;
    let spectators = ctx.params.usize("t")?;
    let total = ell + spectators;
    let p =
        PrefixParams::new(ctx.params.u32("n")?, ctx.params.u32("m")?, ell, total).validated()?;
    let perms = permutations(total);
    let (mut good, mut split_failures, mut worst) = (0u64, 0u64, 0.0f64);
    for ty in enumerate_types(p.alphabet_dim(), total, &ctx.limits)? {
        if !is_l_fold_prefix_collision_free(&ty, &p, &ctx.limits)? {
            continue;
        }
        good += 1;
        for v in ty.arrangements() {
            for sigma in &perms {
                if !check_perm_split(&v, sigma, &p, &ctx.limits)? {
                    split_failures += 1;
                }
            }
        }
        worst = worst.max(lemma_nice_t_check(&ty, &p, &ctx.limits)?.discrepancy);
    }
    rec.info("good_types", good as f64, Exact);
    rec.eq(
        "perm_split_failures",
        split_failures as f64,
        Exact,
        0.0,
        0.0,
    );
    rec.lt("nice_t_max_discrepancy", worst, Exact, 1e-12);
    Ok(())
}

pub const PRFS_TYPE: Experiment = Experiment {
    name: "prfs-type",
    operation: "pseudorandomness::lemma_prfs_type_check",
    asserts: "function-like key averaging of a good type state equals the sequential disjoint-subset mixture",
    defaults: &[("lambda", 1), ("m", 1), ("n", 2), ("q", 2), ("ell", 1), ("t", 0)],
    body: prfs_type_body,
};

fn prfs_type_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let lambda = ctx.params.u32("lambda")?;
    let m_in = ctx.params.u32("m")?;
    let n = ctx.params.u32("n")?;
    let q = ctx.params.usize("q")?;
    let ell = ctx.params.usize("ell")?;
    let spectators = ctx.params.usize("t")?;
    if n < lambda || m_in > 16 || q == 0 || q as u64 > 1u64 << m_in {
        return Err(Failure::Config(format!(
            "need lambda <= n and 1 <= q <= 2^m, got lambda={lambda}, n={n}, m={m_in}, q={q}"
        )));
    }
    let keyed = q * ell;
    let p = PrefixParams::new(lambda, n - lambda, keyed, keyed + spectators).validated()?;
    let queries: Vec<PrfsInput> = (0..q as u64)
        .map(|j| PrfsInput::from_u64(j, m_in))
        .collect();
    let ells = vec![ell; q];
    let (mut checked, mut worst) = (0u64, 0.0f64);
    let mut mode = Mode::Exact;
    for ty in enumerate_types(p.alphabet_dim(), p.t, &ctx.limits)? {
        if !is_prefix_collision_free_up_to(&ty, &p, &ctx.limits)? {
            continue;
        }
        let c = lemma_prfs_type_check(&ty, &queries, &ells, &p, &KeyAveraging::Exact, &ctx.limits)?;
        worst = worst.max(c.discrepancy);
        mode = c.mode;
        checked += 1;
    }
    rec.info(
        "key_configurations",
        2f64.powi((2 * m_in * lambda) as i32),
        Exact,
    );
    rec.info("good_types", checked as f64, Exact);
    if checked == 0 {
        return Err(Failure::Config(
            "no type passes the collision-freeness precondition".into(),
        ));
    }
    rec.lt("max_discrepancy", worst, mode.into(), 1e-12);
    Ok(())
}

pub const PRS_HYBRID: Experiment = Experiment {
    name: "prs-hybrid",
    operation: "pseudorandomness::prs_hybrids",
    asserts:
        "exact generator-side state is a density matrix; no generator copies means zero distance",
    defaults: &[("lambda", 2), ("n", 2), ("ell", 1), ("t", 1)],
    body: prs_hybrid_body,
};

fn prs_hybrid_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let ell = ctx.params.usize("ell")?;
    let p = PseudoParams::prs(
        ctx.params.u32("lambda")?,
        ctx.params.u32("n")?,
        ell,
        ctx.params.usize("t")?,
    )
    .validated()?;
    let r = prs_hybrids(&p, &ctx.limits)?;
    record_density(rec, "rho", &r.rho)?;
    record_density(rec, "sigma", &r.sigma)?;
    if ell == 0 {
        rec.eq("td", r.td, r.mode.into(), 0.0, 0.0);
    } else {
        rec.info("td", r.td, r.mode.into());
    }
    rec.info("reference_bound", r.bound, Exact);
    Ok(())
}

pub const PRS_DECAY: Experiment = Experiment {
    name: "prs-decay",
    operation: "pseudorandomness::prs_hybrids",
    asserts: "with key length equal to register size, the hybrid distance strictly decreases as both grow",
    defaults: &[("ell", 1), ("t", 1), ("n_from", 2), ("n_to", 3)],
    body: prs_decay_body,
};

fn prs_decay_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let ell = ctx.params.usize("ell")?;
    let t = ctx.params.usize("t")?;
    let from = ctx.params.u32("n_from")?;
    let to = ctx.params.u32("n_to")?;
    if from < 1 || to <= from {
        return Err(Failure::Config(format!(
            "need 1 <= n_from < n_to, got {from}, {to}"
        )));
    }
    let params = (from..=to)
        .map(|n| PseudoParams::prs(n, n, ell, t).validated())
        .collect::<Result<Vec<_>, _>>()?;
    let mut previous: Option<f64> = None;
    for p in &params {
        let r = prs_hybrids(p, &ctx.limits)?;
        match previous {
            None => rec.info(&format!("td_n{}", p.n), r.td, r.mode.into()),
            Some(prev) => rec.lt(&format!("td_n{}", p.n), r.td, r.mode.into(), prev),
        }
        previous = Some(r.td);
    }
    Ok(())
}

pub const PRFS_HYBRID: Experiment = Experiment {
    name: "prfs-hybrid",
    operation: "pseudorandomness::prfs_hybrids",
    asserts:
        "function-like generator state over distinct queries is a density matrix; distance recorded",
    defaults: &[
        ("lambda", 1),
        ("n", 2),
        ("m", 1),
        ("q", 2),
        ("ell", 1),
        ("t", 1),
        ("samples", 4096),
    ],
    body: prfs_hybrid_body,
};

fn prfs_hybrid_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let m_in = ctx.params.u32("m")?;
    let q = ctx.params.usize("q")?;
    if m_in > 16 || q == 0 || q as u64 > 1u64 << m_in {
        return Err(Failure::Config(format!(
            "need 1 <= q <= 2^m, got m={m_in}, q={q}"
        )));
    }
    let p = PseudoParams::new(
        ctx.params.u32("lambda")?,
        ctx.params.u32("n")?,
        m_in,
        ctx.params.usize("t")?,
        vec![ctx.params.usize("ell")?; q],
    )
    .validated()?;
    let samples = ctx.params.count("samples", 1 << 32)?;
    let queries: Vec<PrfsInput> = (0..q as u64)
        .map(|j| PrfsInput::from_u64(j, m_in))
        .collect();
    let averaging = KeyAveraging::Auto {
        samples,
        seed: ctx.seed,
    };
    let r = prfs_hybrids(&p, &queries, &averaging, &ctx.limits)?;
    record_density(rec, "rho", &r.rho)?;
    rec.info("td", r.td, r.mode.into());
    if let Some(se) = r.td_stderr {
        rec.info("td_stderr", se, r.mode.into());
    }
    rec.info("reference_bound", r.bound, Exact);
    Ok(())
}

pub const RANK_ATTACK: Experiment = Experiment {
    name: "rank-attack",
    operation: "pseudorandomness::rank_attack",
    asserts: "support projection of the generator state accepts it surely and the Haar state at most rank0/rank1",
    defaults: &[("lambda", 2), ("n", 2), ("ell", 1), ("t", 2)],
    body: rank_attack_body,
};

fn rank_attack_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let p = PseudoParams::prs(
        ctx.params.u32("lambda")?,
        ctx.params.u32("n")?,
        ctx.params.usize("ell")?,
        ctx.params.usize("t")?,
    )
    .validated()?;
    let r = rank_attack(&p, &ctx.limits)?;
    rec.eq("rank_haar", r.rank1 as f64, Exact, r.rank1_formula, 0.0);
    rec.le("rank_generator", r.rank0 as f64, Exact, r.rank0_bound, 0.0);
    rec.eq("accept_generator", r.accept_pseudo, Exact, 1.0, 1e-9);
    rec.le(
        "accept_haar",
        r.accept_haar,
        Exact,
        r.rank0 as f64 / r.rank1 as f64,
        1e-9,
    );
    rec.le(
        "accept_haar_vs_ratio_bound",
        r.accept_haar,
        Exact,
        r.ratio_bound,
        1e-9,
    );
    Ok(())
}

pub const ONEWAY: Experiment = Experiment {
    name: "oneway",
    operation: "pseudorandomness::onewayness_quantity",
    asserts: "mean pretty-good-measurement overlap is at most (m+1)/d",
    defaults: &[("n", 1), ("m", 1)],
    body: oneway_body,
};

fn oneway_body(ctx: &Ctx, rec: &mut Recorder) -> Outcome {
    let n = ctx.params.u32("n")?;
    let m = ctx.params.usize("m")?;
    if !(1..=20).contains(&n) {
        return Err(Failure::Config(format!("n must be in 1..=20, got {n}")));
    }
    let r = onewayness_quantity(n, m, &ctx.limits)?;
    rec.le("overlap", r.value, Exact, r.bound, 1e-9);
    Ok(())
}
