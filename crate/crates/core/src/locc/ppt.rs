use std::collections::HashMap;

use nalgebra::DMatrix;

use super::kneser::{kneser_formula, kneser_one_norm, KneserParams};
use super::locc_advantage_closed_form;
use crate::combinatorics::{binom, binom_f64, factorial, Combinations};
use crate::numkit::{
    partial_transpose, real_symmetric_eigenvalues, trace_distance, trace_norm, Limits, Operator,
    C64,
};
use crate::typespace::{haar_moment, type_state, TypeVector};
use crate::{Error, Result};

/// The bound chain for `|| rho~^G - sigma~^G ||_1`, where `rho~` mixes
/// collision-free types of size `2t` and `sigma~` mixes disjoint pairs of
/// `t`-subsets, and `^G` transposes the second party.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptChain {
    pub exact: f64,
    /// Triangle inequality over the `(C, I)` blocks, each block costed by its Kneser 1-norm.
    pub kneser_sum: f64,
    /// The same sum with binomials cancelled.
    pub middle: f64,
    pub factorial_bound: f64,
    pub series_bound: f64,
}

struct SubsetIndex {
    masks: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SubsetIndex {
    fn new(d: usize, t: usize) -> Self {
        let masks: Vec<u64> = Combinations::new(d, t)
            .map(|s| s.iter().fold(0u64, |m, &i| m | 1 << i))
            .collect();
        let index = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        SubsetIndex { masks, index }
    }

    fn len(&self) -> usize {
        self.masks.len()
    }

    fn of(&self, mask: u64) -> usize {
        self.index[&mask]
    }
}

fn check(d: usize, t: usize, limits: &Limits) -> Result<usize> {
    if t == 0 || d <= 2 * t || d > 64 {
        return Err(Error::ParameterError(format!(
            "need 1 <= t, 2t < d <= 64; got d={d}, t={t}"
        )));
    }
    let n = binom(d as u64, t as u64).expect("d <= 64");
    limits.check_enum(n * n)?;
    limits.check_dim(n * n)?;
    Ok(n as usize)
}

fn t_subsets_of(mask: u64, t: usize) -> Vec<u64> {
    let bits: Vec<u64> = (0..64)
        .filter(|i| mask >> i & 1 == 1)
        .map(|i| 1u64 << i)
        .collect();
    Combinations::new(bits.len(), t)
        .map(|s| s.iter().fold(0u64, |m, &i| m | bits[i]))
        .collect()
}

/// `rho~` and `sigma~` in the basis `|S_A>|S_B>` of pairs of `t`-subset type states.
pub(crate) fn surrogates_in_set_basis(
    d: usize,
    t: usize,
    limits: &Limits,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = check(d, t, limits)?;
    let sets = SubsetIndex::new(d, t);
    let full = (1u64 << d) - 1;
    let mut rho = DMatrix::<f64>::zeros(n * n, n * n);
    let big = SubsetIndex::new(d, 2 * t);
    let w = 1.0 / (big.len() as f64 * binom_f64(2 * t as u64, t as u64));
    for &tm in &big.masks {
        // |T> = C(2t,t)^{-1/2} sum_X |T\X>_A |X>_B
        let halves = t_subsets_of(tm, t);
        for &x in &halves {
            for &y in &halves {
                let r = sets.of(tm & !x) * n + sets.of(x);
                let c = sets.of(tm & !y) * n + sets.of(y);
                rho[(r, c)] += w;
            }
        }
    }
    let mut sigma = DMatrix::<f64>::zeros(n * n, n * n);
    let pairs = binom_f64(d as u64, t as u64) * binom_f64((d - t) as u64, t as u64);
    for &a in &sets.masks {
        for b in t_subsets_of(full & !a, t) {
            let i = sets.of(a) * n + sets.of(b);
            sigma[(i, i)] += 1.0 / pairs;
        }
    }
    Ok((rho, sigma))
}

/// Partial transpose on the second factor of an `n*n`-indexed matrix.
pub(crate) fn transpose_second(m: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let (a, b) = (r / n, r % n);
        let (a2, b2) = (c / n, c % n);
        m[(a * n + b2, a2 * n + b)]
    })
}

fn symmetric_trace_norm(m: DMatrix<f64>) -> Result<f64> {
    Ok(real_symmetric_eigenvalues(m)?.iter().map(|x| x.abs()).sum())
}

pub fn ppt_diff_norm(d: usize, t: usize, limits: &Limits) -> Result<PptChain> {
    let n = check(d, t, limits)?;
    let (rho, sigma) = surrogates_in_set_basis(d, t, limits)?;
    let exact = symmetric_trace_norm(transpose_second(&rho, n) - transpose_second(&sigma, n))?;

    let prefactor = 1.0 / (binom_f64(d as u64, 2 * t as u64) * binom_f64(2 * t as u64, t as u64));
    let mut kneser_sum = 0.0;
    let mut middle = 0.0;
    let mut factorial_bound = 0.0;
    for s in 0..t {
        let kp = KneserParams::new(d - 2 * s, t - s)?;
        let block = match kneser_one_norm(&kp, limits) {
            Ok(k) => k.exact,
            Err(Error::EnumerationTooLarge { .. } | Error::DimensionOverflow { .. }) => {
                kneser_formula(kp.v, kp.k)
            }
            Err(e) => return Err(e),
        };
        kneser_sum += binom_f64(d as u64, s as u64) * binom_f64((d - s) as u64, s as u64) * block;

        let k = t - s;
        let ratio = factorial(t as u64) / factorial(s as u64);
        let tail: f64 = (s..t).map(|j| (d - 2 * j) as f64).product();
        middle += 2f64.powi(k as i32) * ratio * ratio / (factorial(k as u64) * tail);
        factorial_bound += 2f64.powi(k as i32) * (t as f64).powi(2 * k as i32)
            / (factorial(k as u64) * ((d - 2 * t + 2) as f64).powi(k as i32));
    }
    Ok(PptChain {
        exact,
        kneser_sum: kneser_sum * prefactor,
        middle,
        factorial_bound,
        series_bound: (2.0 * (t * t) as f64 / (d - 2 * t + 2) as f64).exp() - 1.0,
    })
}

/// Lower and upper sides of the identical-versus-independent gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptSandwich {
    /// Collision distinguisher's advantage.
    pub advantage: f64,
    /// Half the partial-transpose norm between the collision-free surrogates.
    pub surrogate_gap: f64,
    /// Half the partial-transpose norm between the true Haar moments, when they fit.
    pub true_gap: Option<f64>,
    /// Trace distance from the identical-copies moment to its surrogate.
    pub rho_slack: Option<f64>,
    /// Trace distance from the independent-copies moment to its surrogate.
    pub sigma_slack: Option<f64>,
}

fn projector_mixture(
    d: usize,
    states: &[Vec<usize>],
    parts: usize,
    limits: &Limits,
) -> Result<Operator> {
    // Each entry of `states` lists `parts` disjoint blocks of equal size laid out in order.
    let first = &states[0];
    let block = first.len() / parts;
    let shape = crate::numkit::RegisterShape::uniform(d, first.len())?;
    let mut m = DMatrix::<C64>::zeros(shape.total(), shape.total());
    let w = 1.0 / states.len() as f64;
    for elems in states {
        let mut v = nalgebra::DVector::from_element(1, C64::new(1.0, 0.0));
        for p in 0..parts {
            let ty = TypeVector::from_elements(d, &elems[p * block..(p + 1) * block])?;
            v = v.kronecker(type_state(&ty, limits)?.amplitudes());
        }
        let nz: Vec<(usize, C64)> = v
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        for &(i, a) in &nz {
            for &(j, b) in &nz {
                m[(i, j)] += a * b.conj() * w;
            }
        }
    }
    Operator::hermitian(shape, m)
}

pub fn ppt_vs_haar_bound(d: usize, t: usize, limits: &Limits) -> Result<PptSandwich> {
    if t == 0 {
        return Ok(PptSandwich {
            advantage: 0.0,
            surrogate_gap: 0.0,
            true_gap: Some(0.0),
            rho_slack: Some(0.0),
            sigma_slack: Some(0.0),
        });
    }
    let chain = ppt_diff_norm(d, t, limits)?;
    let advantage = locc_advantage_closed_form(d as u64, t as u64)?;
    let fits = limits.check_power(d, 2 * t).is_ok();
    let (mut true_gap, mut rho_slack, mut sigma_slack) = (None, None, None);
    if fits {
        let rho = haar_moment(d, 2 * t, limits)?;
        let one = haar_moment(d, t, limits)?;
        let sigma = crate::numkit::Tensor::tensor_capped(&one, &one, limits)?;
        let b: Vec<usize> = (t..2 * t).collect();
        let diff = partial_transpose(&rho, &b)?.sub(&partial_transpose(&sigma, &b)?)?;
        true_gap = Some(0.5 * trace_norm(&diff)?);

        let whole: Vec<Vec<usize>> = Combinations::new(d, 2 * t).collect();
        let mut split = Vec::new();
        for a in Combinations::new(d, t) {
            let rest: Vec<usize> = (0..d).filter(|x| !a.contains(x)).collect();
            for b in Combinations::new(rest.len(), t) {
                let mut e = a.clone();
                e.extend(b.iter().map(|&i| rest[i]));
                split.push(e);
            }
        }
        rho_slack = Some(trace_distance(
            &rho,
            &projector_mixture(d, &whole, 1, limits)?,
        )?);
        sigma_slack = Some(trace_distance(
            &sigma,
            &projector_mixture(d, &split, 2, limits)?,
        )?);
    }
    Ok(PptSandwich {
        advantage,
        surrogate_gap: 0.5 * chain.exact,
        true_gap,
        rho_slack,
        sigma_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn assert_chain(c: &PptChain) {
        assert!(c.exact <= c.kneser_sum + 1e-8, "{c:?}");
        assert!((c.kneser_sum - c.middle).abs() < 1e-8, "{c:?}");
        assert!(c.middle <= c.factorial_bound + 1e-12, "{c:?}");
        assert!(c.factorial_bound <= c.series_bound + 1e-12, "{c:?}");
    }

    #[test]
    fn single_copy_chain() {
        let c = ppt_diff_norm(6, 1, &lim()).unwrap();
        assert!((c.middle - 2.0 / 6.0).abs() < 1e-14);
        assert!((c.kneser_sum - 2.0 / 6.0).abs() < 1e-12);
        // For one copy the difference is one Kneser block, so the triangle step is tight.
        assert!((c.exact - c.kneser_sum).abs() < 1e-10);
        assert_chain(&c);
    }

    #[test]
    fn chain_holds_on_grid() {
        for (d, t) in [(6, 2), (8, 2), (7, 3), (9, 2)] {
            assert_chain(&ppt_diff_norm(d, t, &lim()).unwrap());
        }
    }

    #[test]
    fn surrogates_are_states_and_sigma_is_transpose_invariant() {
        let (d, t) = (6, 2);
        let n = 15;
        let (rho, sigma) = surrogates_in_set_basis(d, t, &lim()).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12 && (sigma.trace() - 1.0).abs() < 1e-12);
        assert_eq!(transpose_second(&sigma, n), sigma);
        let vals = real_symmetric_eigenvalues(rho.clone()).unwrap();
        assert!(vals.iter().all(|&v| v > -1e-12));
        // The X = Y part of rho~^G is exactly sigma~.
        let diag_part = DMatrix::from_fn(n * n, n * n, |r, c| {
            if r == c {
                transpose_second(&rho, n)[(r, c)]
            } else {
                0.0
            }
        });
        assert!((diag_part - &sigma).amax() < 1e-15);
    }

    #[test]
    fn explicit_blocks_reproduce_kneser_sum() {
        // Build every K_{C,I} block on its own and add up the trace norms.
        let (d, t) = (6usize, 2usize);
        let n = 15;
        let sets = SubsetIndex::new(d, t);
        let full = (1u64 << d) - 1;
        let mut total = 0.0;
        for s in 0..t {
            for c in Combinations::new(d, s) {
                let cm = c.iter().fold(0u64, |m, &i| m | 1 << i);
                for i in t_subsets_of(full & !cm, s) {
                    let rest = full & !cm & !i;
                    let mut k = DMatrix::<f64>::zeros(n * n, n * n);
                    let parts = t_subsets_of(rest, t - s);
                    for &x in &parts {
                        for &y in &parts {
                            if x & y == 0 {
                                let r = sets.of(cm | y) * n + sets.of(i | y);
                                let col = sets.of(cm | x) * n + sets.of(i | x);
                                k[(r, col)] += 1.0;
                            }
                        }
                    }
                    let norm = symmetric_trace_norm(k).unwrap();
                    assert!(norm.is_finite(), "s={s} c={cm:b} i={i:b}");
                    total += norm;
                }
            }
        }
        let prefactor = 1.0 / (binom_f64(6, 4) * binom_f64(4, 2));
        let c = ppt_diff_norm(d, t, &lim()).unwrap();
        assert!(
            (total * prefactor - c.kneser_sum).abs() < 1e-9,
            "{} vs {}",
            total * prefactor,
            c.kneser_sum
        );
    }

    #[test]
    fn sandwich_on_true_states() {
        for d in [4, 6] {
            let s = ppt_vs_haar_bound(d, 1, &lim()).unwrap();
            let gap = s.true_gap.unwrap();
            assert!(s.advantage <= gap + 1e-12, "{s:?}");
            assert!(
                s.advantage
                    <= s.surrogate_gap + s.rho_slack.unwrap() + s.sigma_slack.unwrap() + 1e-12
            );
        }
        let s = ppt_vs_haar_bound(4, 1, &lim()).unwrap();
        assert!((s.true_gap.unwrap() - 0.1875).abs() < 1e-12, "{s:?}");
        assert_eq!(ppt_vs_haar_bound(4, 0, &lim()).unwrap().true_gap, Some(0.0));
    }

    #[test]
    fn true_states_skipped_beyond_cap() {
        let small = Limits {
            dim: 300,
            enumeration: 1_000_000,
        };
        let s = ppt_vs_haar_bound(6, 2, &small).unwrap();
        assert!(s.true_gap.is_none() && s.surrogate_gap > 0.0);
    }

    #[test]
    fn rejects_small_dimension() {
        assert!(ppt_diff_norm(4, 2, &lim()).is_err());
    }
}
