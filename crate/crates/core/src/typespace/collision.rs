use std::collections::HashSet;

use num_rational::Ratio;
use rayon::prelude::*;

use super::{enumerate_types, sample_type, TypeVector};
use crate::combinatorics::{binom, Combinations};
use crate::numkit::Limits;
use crate::rng::{parallel_count, Estimate};
use crate::{Error, Result};

/// Bit lengths and sizes for prefix-collision checks over `(n + m)`-bit symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrefixParams {
    /// Prefix length in bits.
    pub n: u32,
    /// Suffix length in bits.
    pub m: u32,
    /// Size of the compared sub-multisets.
    pub ell: usize,
    /// Size of the type.
    pub t: usize,
}

impl PrefixParams {
    pub fn new(n: u32, m: u32, ell: usize, t: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::ParameterError(
                "prefix length must be at least 1".into(),
            ));
        }
        if ell < 1 || ell > t {
            return Err(Error::ParameterError(format!(
                "need 1 <= ell <= t, got ell={ell}, t={t}"
            )));
        }
        if n + m > 40 {
            return Err(Error::ParameterError(format!(
                "{} symbol bits is too many",
                n + m
            )));
        }
        Ok(PrefixParams { n, m, ell, t })
    }

    pub fn alphabet_dim(&self) -> usize {
        1usize << (self.n + self.m)
    }

    fn with_ell(self, ell: usize) -> Self {
        PrefixParams { ell, ..self }
    }

    fn check_cap(&self, limits: &Limits) -> Result<()> {
        let c = binom(self.t as u64, self.ell as u64).unwrap_or(u128::MAX);
        limits.check_enum(c.saturating_mul(c))
    }
}

fn passes(elements: &[usize], ell: usize, m: u32) -> bool {
    let mut seen = HashSet::new();
    Combinations::new(elements.len(), ell).all(|pick| {
        let x = pick.iter().fold(0usize, |acc, &i| acc ^ elements[i]);
        seen.insert(x >> m)
    })
}

/// Whether no two distinct size-`ell` sub-multisets of `ty` have XORs with equal
/// `n`-bit prefixes.
///
/// Sub-multisets are distinguished by the positions they are drawn from, so a
/// repeated symbol makes a type fail whenever `t > ell`.
pub fn is_l_fold_prefix_collision_free(
    ty: &TypeVector,
    p: &PrefixParams,
    limits: &Limits,
) -> Result<bool> {
    if ty.alphabet_dim() != p.alphabet_dim() {
        return Err(Error::ShapeMismatch(format!(
            "type alphabet {} but parameters need {}",
            ty.alphabet_dim(),
            p.alphabet_dim()
        )));
    }
    if ty.total() != p.t {
        return Err(Error::ParameterError(format!(
            "type has size {} but parameters say {}",
            ty.total(),
            p.t
        )));
    }
    p.check_cap(limits)?;
    Ok(passes(&ty.elements(), p.ell, p.m))
}

/// `i`-fold prefix collision-freeness for every `i` in `1..=ell`.
pub fn is_prefix_collision_free_up_to(
    ty: &TypeVector,
    p: &PrefixParams,
    limits: &Limits,
) -> Result<bool> {
    for i in 1..=p.ell {
        if !is_l_fold_prefix_collision_free(ty, &p.with_ell(i), limits)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact fraction of uniformly random types that pass the predicate.
pub fn prob_good_type_exact(p: &PrefixParams, limits: &Limits) -> Result<Ratio<u64>> {
    p.check_cap(limits)?;
    let types = enumerate_types(p.alphabet_dim(), p.t, limits)?;
    let good = types
        .par_iter()
        .filter(|ty| passes(&ty.elements(), p.ell, p.m))
        .count();
    Ok(Ratio::new(good as u64, types.len() as u64))
}

/// Monte Carlo estimate of the same fraction.
pub fn prob_good_type_mc(
    p: &PrefixParams,
    trials: u64,
    seed: u64,
    limits: &Limits,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(Error::ParameterError("need at least one trial".into()));
    }
    p.check_cap(limits)?;
    let d = p.alphabet_dim();
    let [good] = parallel_count(seed, trials, |rng| {
        let ty = sample_type(d, p.t, rng);
        [u64::from(passes(&ty.elements(), p.ell, p.m))]
    });
    Ok(Estimate::proportion(good, trials))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodTypeProbability {
    pub exact: Ratio<u64>,
    pub mc: Estimate,
}

pub fn prob_good_type(
    p: &PrefixParams,
    trials: u64,
    seed: u64,
    limits: &Limits,
) -> Result<GoodTypeProbability> {
    Ok(GoodTypeProbability {
        exact: prob_good_type_exact(p, limits)?,
        mc: prob_good_type_mc(p, trials, seed, limits)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn check(elements: &[usize], n: u32, m: u32, ell: usize) -> bool {
        let p = PrefixParams::new(n, m, ell, elements.len()).unwrap();
        let ty = TypeVector::from_elements(p.alphabet_dim(), elements).unwrap();
        is_l_fold_prefix_collision_free(&ty, &p, &lim()).unwrap()
    }

    /// Pairwise comparison over position subsets, straight from the definition.
    fn oracle(elements: &[usize], ell: usize, m: u32) -> bool {
        let subsets: Vec<Vec<usize>> = Combinations::new(elements.len(), ell).collect();
        let xor = |s: &Vec<usize>| s.iter().fold(0, |a, &i| a ^ elements[i]) >> m;
        for (i, a) in subsets.iter().enumerate() {
            for b in &subsets[i + 1..] {
                if xor(a) == xor(b) {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn predicate_examples() {
        assert!(check(&[0b00, 0b10], 1, 1, 1));
        assert!(!check(&[0b00, 0b01], 1, 1, 1));
        assert!(!check(&[0b000, 0b001, 0b010, 0b011], 2, 1, 2));
        assert!(!check(&[3, 3], 2, 0, 1));
        assert!(check(&[3, 3], 2, 0, 2));
    }

    #[test]
    fn predicate_validates_inputs() {
        let p = PrefixParams::new(1, 1, 1, 2).unwrap();
        let wrong_dim = TypeVector::from_elements(8, &[0, 1]).unwrap();
        assert!(matches!(
            is_l_fold_prefix_collision_free(&wrong_dim, &p, &lim()),
            Err(Error::ShapeMismatch(_))
        ));
        let wrong_size = TypeVector::from_elements(4, &[0]).unwrap();
        assert!(is_l_fold_prefix_collision_free(&wrong_size, &p, &lim()).is_err());
        assert!(PrefixParams::new(0, 1, 1, 1).is_err());
        assert!(PrefixParams::new(1, 1, 3, 2).is_err());
        let big = PrefixParams::new(4, 0, 5, 12).unwrap();
        let ty = TypeVector::from_elements(16, &[0; 12]).unwrap();
        let small = Limits {
            dim: 16,
            enumeration: 1000,
        };
        assert!(matches!(
            is_l_fold_prefix_collision_free(&ty, &big, &small),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn predicate_matches_pairwise_oracle() {
        for (n, m, ell, t) in [
            (1, 1, 1, 2),
            (2, 1, 2, 3),
            (2, 0, 1, 3),
            (1, 2, 2, 4),
            (3, 0, 2, 4),
        ] {
            let p = PrefixParams::new(n, m, ell, t).unwrap();
            for ty in enumerate_types(p.alphabet_dim(), t, &lim()).unwrap() {
                let got = is_l_fold_prefix_collision_free(&ty, &p, &lim()).unwrap();
                assert_eq!(got, oracle(&ty.elements(), ell, m), "{ty:?}");
            }
        }
    }

    #[test]
    fn exact_probability_examples() {
        let p = PrefixParams::new(1, 0, 1, 1).unwrap();
        assert_eq!(
            prob_good_type_exact(&p, &lim()).unwrap(),
            Ratio::from_integer(1)
        );
        let p = PrefixParams::new(2, 0, 1, 2).unwrap();
        assert_eq!(prob_good_type_exact(&p, &lim()).unwrap(), Ratio::new(6, 10));
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        for (n, m, ell, t) in [(2, 0, 1, 2), (3, 1, 1, 3), (4, 0, 2, 4)] {
            let p = PrefixParams::new(n, m, ell, t).unwrap();
            let r = prob_good_type(&p, 100_000, 23, &lim()).unwrap();
            let exact = *r.exact.numer() as f64 / *r.exact.denom() as f64;
            assert!(r.mc.z_score(exact) < 4.0, "{p:?}: {:?} vs {exact}", r.mc);
        }
    }

    #[test]
    fn ell_fold_implies_smaller_folds() {
        for (n, m, ell, t) in [(3, 0, 1, 3), (2, 1, 1, 3), (3, 1, 2, 5), (4, 0, 2, 5)] {
            let p = PrefixParams::new(n, m, ell, t).unwrap();
            assert!(t > 2 * ell);
            for ty in enumerate_types(p.alphabet_dim(), t, &lim()).unwrap() {
                if is_l_fold_prefix_collision_free(&ty, &p, &lim()).unwrap() {
                    assert!(
                        is_prefix_collision_free_up_to(&ty, &p, &lim()).unwrap(),
                        "{ty:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn good_fraction_nondecreasing_in_prefix_length() {
        for (m, ell, t) in [(0, 1, 2), (1, 1, 3), (0, 2, 3)] {
            let mut prev = Ratio::from_integer(0u64);
            for n in 1..=4 {
                let p = PrefixParams::new(n, m, ell, t).unwrap();
                let r = prob_good_type_exact(&p, &lim()).unwrap();
                assert!(r >= prev, "m={m} ell={ell} t={t} n={n}");
                prev = r;
            }
        }
    }
}
