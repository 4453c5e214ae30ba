//! Identical versus independent Haar copies under local measurements.
//!
//! Two parties each hold `t` copies: either of one shared Haar state or of two
//! independent ones. This module evaluates the collision distinguisher (closed
//! form and sampling), the partial-transpose norm that bounds every PPT
//! measurement, and the Kneser-graph spectra behind that bound.

mod kneser;
mod ppt;

pub use kneser::{kneser_adjacency, kneser_formula, kneser_one_norm, KneserNorm, KneserParams};
pub use ppt::{ppt_diff_norm, ppt_vs_haar_bound, PptChain, PptSandwich};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use rand_distr::Exp1;

use crate::combinatorics::binom_big;
use crate::rng::{parallel_count, Estimate};
use crate::{Error, Result};

/// Advantage of "output 1 iff the `2t` outcomes are distinct":
/// `Pr[distinct | independent] - Pr[distinct | identical]`, exact.
pub fn locc_advantage_closed_form(d: u64, t: u64) -> Result<f64> {
    locc_advantage_exact(d, t)?
        .to_f64()
        .ok_or_else(|| Error::ParameterError("advantage not representable".into()))
}

/// The same advantage as an exact rational.
pub fn locc_advantage_exact(d: u64, t: u64) -> Result<BigRational> {
    if d < 2 * t || d == 0 {
        return Err(Error::ParameterError(format!(
            "need d >= 2t and d >= 1, got d={d}, t={t}"
        )));
    }
    let r = |num: num_bigint::BigUint, den: num_bigint::BigUint| {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    };
    let independent = r(
        binom_big(d, t) * binom_big(d - t, t),
        binom_big(d + t - 1, t).pow(2),
    );
    let identical = r(binom_big(d, 2 * t), binom_big(d + 2 * t - 1, 2 * t));
    Ok(independent - identical)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoccParams {
    /// Local dimension of each copy.
    pub d: u64,
    /// Copies per party.
    pub t: usize,
    pub trials: u64,
    pub seed: u64,
}

impl LoccParams {
    pub fn new(d: u64, t: usize, trials: u64, seed: u64) -> Result<Self> {
        if d < 2 || trials == 0 || t == 0 {
            return Err(Error::ParameterError(format!(
                "need d >= 2, t >= 1, trials >= 1; got d={d}, t={t}, trials={trials}"
            )));
        }
        if d > 1 << 24 {
            return Err(Error::ParameterError(format!(
                "d={d} is too large to sample"
            )));
        }
        Ok(LoccParams { d, t, trials, seed })
    }
}

/// Monte Carlo difference of two independent proportions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvantageEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub independent: Estimate,
    pub identical: Estimate,
}

/// Measures `count` copies of a freshly sampled Haar state in the computational basis.
///
/// The outcome weights are squared moduli of i.i.d. complex Gaussian
/// amplitudes, i.e. of an unnormalised Haar state; `cumulative` is scratch.
fn measure_copies<R: Rng + ?Sized>(
    d: usize,
    count: usize,
    rng: &mut R,
    cumulative: &mut Vec<f64>,
    out: &mut Vec<usize>,
) {
    cumulative.clear();
    let mut acc = 0.0;
    for _ in 0..d {
        let w: f64 = rng.sample(Exp1);
        acc += w;
        cumulative.push(acc);
    }
    for _ in 0..count {
        let u = rng.random::<f64>() * acc;
        let x = cumulative.partition_point(|&c| c <= u).min(d - 1);
        out.push(x);
    }
}

fn all_distinct(xs: &mut [usize]) -> bool {
    xs.sort_unstable();
    xs.windows(2).all(|w| w[0] != w[1])
}

/// Estimates the collision distinguisher's advantage. Each trial draws three
/// fresh Haar states: one shared by both parties, and one per party for the
/// independent case.
pub fn locc_advantage_mc(lp: &LoccParams) -> AdvantageEstimate {
    let d = lp.d as usize;
    let t = lp.t;
    let [ind, ide] = parallel_count(lp.seed, lp.trials, |rng| {
        let mut cum = Vec::with_capacity(d);
        let mut out = Vec::with_capacity(2 * t);
        measure_copies(d, t, rng, &mut cum, &mut out);
        measure_copies(d, t, rng, &mut cum, &mut out);
        let independent = all_distinct(&mut out);
        out.clear();
        measure_copies(d, 2 * t, rng, &mut cum, &mut out);
        let identical = all_distinct(&mut out);
        [u64::from(independent), u64::from(identical)]
    });
    let independent = Estimate::proportion(ind, lp.trials);
    let identical = Estimate::proportion(ide, lp.trials);
    AdvantageEstimate {
        estimate: independent.mean - identical.mean,
        stderr: independent.stderr.hypot(identical.stderr),
        independent,
        identical,
    }
}
