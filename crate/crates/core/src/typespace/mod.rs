//! Types over an alphabet `[0, d)` and their quantum lifts.
//!
//! A type of size `t` is a multiset of `t` symbols. Its type state is the
//! uniform superposition over all distinct arrangements of the multiset in a
//! `t`-register system. The span of type states is the symmetric subspace.

mod collision;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::combinatorics::{binom, factorial, next_permutation, permutations, Combinations};
use crate::numkit::{haar_state_from_rng, Limits, Operator, RegisterShape, StateVector, C64};
use crate::rng::{parallel_mean, stream_rng};
use crate::{Error, Result};

pub use collision::{
    is_l_fold_prefix_collision_free, is_prefix_collision_free_up_to, prob_good_type,
    prob_good_type_exact, prob_good_type_mc, GoodTypeProbability, PrefixParams,
};

/// A multiset over `[0, alphabet_dim)`, stored as sorted `(symbol, multiplicity)` pairs.
///
/// The derived ordering compares the pair lists lexicographically and is the
/// canonical type order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    entries: Vec<(usize, usize)>,
    alphabet_dim: usize,
    total: usize,
}

impl TypeVector {
    pub fn new(
        alphabet_dim: usize,
        counts: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable();
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::ParameterError(format!(
                    "symbol {} listed twice",
                    w[0].0
                )));
            }
        }
        if let Some(&(x, _)) = entries.iter().find(|&&(x, _)| x >= alphabet_dim) {
            return Err(Error::ParameterError(format!(
                "symbol {x} outside alphabet of size {alphabet_dim}"
            )));
        }
        let total = entries.iter().map(|&(_, c)| c).sum();
        Ok(TypeVector {
            entries,
            alphabet_dim,
            total,
        })
    }

    /// The type of a list of symbols (order and repetition as given).
    pub fn from_elements(alphabet_dim: usize, elements: &[usize]) -> Result<Self> {
        let mut sorted = elements.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for x in sorted {
            match counts.last_mut() {
                Some((y, c)) if *y == x => *c += 1,
                _ => counts.push((x, 1)),
            }
        }
        Self::new(alphabet_dim, counts)
    }

    pub fn alphabet_dim(&self) -> usize {
        self.alphabet_dim
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn multiplicity(&self, symbol: usize) -> usize {
        self.entries
            .binary_search_by_key(&symbol, |&(x, _)| x)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Sorted symbols, each repeated by its multiplicity.
    pub fn elements(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(x, c)| std::iter::repeat_n(x, c))
            .collect()
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.iter().map(|&(x, _)| x).collect()
    }

    pub fn collision_free(&self) -> bool {
        self.entries.iter().all(|&(_, c)| c == 1)
    }

    /// Number of distinct arrangements, `t! / prod_i T_i!`.
    pub fn arrangement_count(&self) -> f64 {
        self.entries
            .iter()
            .fold(factorial(self.total as u64), |acc, &(_, c)| {
                acc / factorial(c as u64)
            })
    }

    /// Every distinct ordering of the multiset, in lexicographic order.
    pub fn arrangements(&self) -> Vec<Vec<usize>> {
        let mut current = self.elements();
        let mut out = Vec::new();
        loop {
            out.push(current.clone());
            if !next_permutation(&mut current) {
                return out;
            }
        }
    }

    /// Multiset sum `self + other`.
    pub fn union(&self, other: &TypeVector) -> Result<TypeVector> {
        if self.alphabet_dim != other.alphabet_dim {
            return Err(Error::ShapeMismatch(
                "types over different alphabets".into(),
            ));
        }
        let mut e = self.elements();
        e.extend(other.elements());
        Self::from_elements(self.alphabet_dim, &e)
    }

    fn flat_index(&self, arrangement: &[usize]) -> usize {
        arrangement
            .iter()
            .fold(0, |acc, &x| acc * self.alphabet_dim + x)
    }
}

/// All types of size `t` over `[0, d)` in canonical order.
pub fn enumerate_types(d: usize, t: usize, limits: &Limits) -> Result<Vec<TypeVector>> {
    let count = binom((d + t - 1) as u64, t as u64).unwrap_or(u128::MAX);
    limits.check_enum(count)?;
    let mut out = Vec::with_capacity(count as usize);
    let mut seq = vec![0usize; t];
    loop {
        out.push(TypeVector::from_elements(d, &seq)?);
        // Advance the nondecreasing sequence.
        let mut i = t;
        loop {
            if i == 0 {
                out.sort_unstable();
                return Ok(out);
            }
            i -= 1;
            if seq[i] + 1 < d {
                let v = seq[i] + 1;
                for s in &mut seq[i..] {
                    *s = v;
                }
                break;
            }
        }
    }
}

fn shape_for(d: usize, t: usize, limits: &Limits) -> Result<RegisterShape> {
    limits.check_power(d, t)?;
    RegisterShape::uniform(d, t)
}

/// The type state: uniform superposition of the arrangements of `ty`.
pub fn type_state(ty: &TypeVector, limits: &Limits) -> Result<StateVector> {
    let shape = shape_for(ty.alphabet_dim, ty.total, limits)?;
    let amp = C64::new(ty.arrangement_count().recip().sqrt(), 0.0);
    let mut v = DVector::zeros(shape.total());
    for a in ty.arrangements() {
        v[ty.flat_index(&a)] = amp;
    }
    StateVector::new(shape, v)
}

/// Symmetric-subspace projector `(1/t!) sum_pi P_pi`, built from register permutations.
pub fn sym_projector(d: usize, t: usize, limits: &Limits) -> Result<Operator> {
    let shape = shape_for(d, t, limits)?;
    let perms = permutations(t);
    limits.check_enum(perms.len() as u128)?;
    let n = shape.total();
    let w = 1.0 / perms.len() as f64;
    let mut m = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        let digits = shape.digits(j);
        for p in &perms {
            let permuted: Vec<usize> = p.iter().map(|&k| digits[k]).collect();
            m[(shape.flat(&permuted), j)] += C64::new(w, 0.0);
        }
    }
    Operator::hermitian(shape, m)
}

/// Uniform mixture of the type-state projectors of size `t` over `[0, d)`.
pub fn type_mixture(d: usize, t: usize, limits: &Limits) -> Result<Operator> {
    let shape = shape_for(d, t, limits)?;
    let types = enumerate_types(d, t, limits)?;
    let n = shape.total();
    let mut m = DMatrix::<C64>::zeros(n, n);
    let w = 1.0 / types.len() as f64;
    for ty in &types {
        let idx: Vec<usize> = ty.arrangements().iter().map(|a| ty.flat_index(a)).collect();
        let val = C64::new(w / ty.arrangement_count(), 0.0);
        for &i in &idx {
            for &j in &idx {
                m[(i, j)] += val;
            }
        }
    }
    Operator::hermitian(shape, m)
}

/// Exact `t`-th moment of a Haar-random state in dimension `d`.
pub fn haar_moment(d: usize, t: usize, limits: &Limits) -> Result<Operator> {
    let p = sym_projector(d, t, limits)?;
    let count = binom((d + t - 1) as u64, t as u64).unwrap_or(u128::MAX) as f64;
    Ok(p.scale(1.0 / count))
}

/// Sample mean of `|psi><psi|^{(x) t}` over `samples` Haar states.
pub fn haar_moment_mc(
    d: usize,
    t: usize,
    samples: u64,
    seed: u64,
    limits: &Limits,
) -> Result<Operator> {
    let shape = shape_for(d, t, limits)?;
    if samples == 0 {
        return Err(Error::ParameterError("need at least one sample".into()));
    }
    let n = shape.total();
    let one = RegisterShape::new(vec![d])?;
    let flat = parallel_mean(seed, samples, 2 * n * n, |rng, out| {
        let s = haar_state_from_rng(one.clone(), rng);
        let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
        for _ in 0..t {
            v = v.kronecker(s.amplitudes());
        }
        for j in 0..n {
            for i in 0..n {
                let z = v[i] * v[j].conj();
                out[2 * (j * n + i)] = z.re;
                out[2 * (j * n + i) + 1] = z.im;
            }
        }
    });
    let m = DMatrix::from_fn(n, n, |i, j| {
        C64::new(flat[2 * (j * n + i)], flat[2 * (j * n + i) + 1])
    });
    Operator::hermitian(shape, m)
}

/// A Haar-random state in dimension `d`, deterministic in `seed`.
pub fn sample_haar(d: usize, seed: u64) -> Result<StateVector> {
    let shape = RegisterShape::new(vec![d])?;
    Ok(haar_state_from_rng(shape, &mut stream_rng(seed, 0)))
}

/// A uniformly random type of size `t` over `[0, d)` (stars and bars).
pub fn sample_type<R: Rng + ?Sized>(d: usize, t: usize, rng: &mut R) -> TypeVector {
    let mut bars: Vec<usize> = rand::seq::index::sample(rng, d + t - 1, t).into_vec();
    bars.sort_unstable();
    let elements: Vec<usize> = bars.iter().enumerate().map(|(i, &b)| b - i).collect();
    TypeVector::from_elements(d, &elements).expect("stars-and-bars symbols lie in the alphabet")
}

/// Splitting of a collision-free type state into `|X>|T \ X>` terms.
#[derive(Debug, Clone, PartialEq)]
pub struct Bipartition {
    pub coefficient: f64,
    pub pairs: Vec<(TypeVector, TypeVector)>,
}

/// All ways to split a collision-free `ty` into a size-`x` part and its complement.
pub fn type_bipartition(ty: &TypeVector, x: usize) -> Result<Bipartition> {
    if !ty.collision_free() {
        return Err(Error::NotCollisionFree);
    }
    if x > ty.total {
        return Err(Error::ParameterError(format!(
            "part size {x} exceeds type size {}",
            ty.total
        )));
    }
    let support = ty.support();
    let pairs = Combinations::new(support.len(), x)
        .map(|pick| {
            let chosen: Vec<usize> = pick.iter().map(|&i| support[i]).collect();
            let rest: Vec<usize> = support
                .iter()
                .copied()
                .filter(|s| !chosen.contains(s))
                .collect();
            (
                TypeVector::from_elements(ty.alphabet_dim, &chosen).unwrap(),
                TypeVector::from_elements(ty.alphabet_dim, &rest).unwrap(),
            )
        })
        .collect::<Vec<_>>();
    Ok(Bipartition {
        coefficient: (pairs.len() as f64).recip().sqrt(),
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{fidelity, Tensor};
    use crate::rng::parallel_count;

    fn lim() -> Limits {
        Limits::default()
    }

    fn ty(d: usize, e: &[usize]) -> TypeVector {
        TypeVector::from_elements(d, e).unwrap()
    }

    #[test]
    fn enumeration_counts() {
        let two = enumerate_types(2, 1, &lim()).unwrap();
        assert_eq!(two, vec![ty(2, &[0]), ty(2, &[1])]);
        assert_eq!(enumerate_types(2, 2, &lim()).unwrap().len(), 3);
        let four = enumerate_types(4, 2, &lim()).unwrap();
        assert_eq!(four.len(), 10);
        let mut dedup = four.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 10);
        assert!(four.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn enumeration_cap() {
        let l = Limits {
            dim: 16,
            enumeration: 9,
        };
        assert!(matches!(
            enumerate_types(4, 2, &l),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(TypeVector::new(2, [(2, 1)]).is_err());
        assert!(TypeVector::new(4, [(1, 1), (1, 2)]).is_err());
        assert_eq!(
            TypeVector::new(4, [(3, 0), (1, 2)]).unwrap().entries(),
            &[(1, 2)]
        );
    }

    #[test]
    fn type_state_examples() {
        let s = type_state(&ty(4, &[2]), &lim()).unwrap();
        assert_eq!(
            s,
            StateVector::basis(RegisterShape::new(vec![4]).unwrap(), 2).unwrap()
        );

        let s = type_state(&ty(2, &[0, 1]), &lim()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        let want = [0.0, h, h, 0.0];
        for (a, w) in s.amplitudes().iter().zip(want) {
            assert!((a.re - w).abs() < 1e-15 && a.im == 0.0);
        }

        let s = type_state(&ty(2, &[0, 0]), &lim()).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn type_states_are_orthonormal() {
        for (d, t) in [(2, 2), (2, 3), (4, 2)] {
            let types = enumerate_types(d, t, &lim()).unwrap();
            let states: Vec<_> = types
                .iter()
                .map(|x| type_state(x, &lim()).unwrap())
                .collect();
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((a.inner(b).unwrap() - C64::new(want, 0.0)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn symmetric_projector_matches_type_states() {
        assert_eq!(
            sym_projector(2, 1, &lim()).unwrap(),
            Operator::identity(RegisterShape::uniform(2, 1).unwrap())
        );
        let p = sym_projector(2, 2, &lim()).unwrap();
        let mut from_types = Operator::zeros(p.shape().clone());
        for x in enumerate_types(2, 2, &lim()).unwrap() {
            from_types = from_types
                .add(&type_state(&x, &lim()).unwrap().to_density())
                .unwrap();
        }
        assert!(p.max_abs_diff(&from_types).unwrap() < 1e-12);
        assert!(p.compose(&p).unwrap().max_abs_diff(&p).unwrap() < 1e-12);
        assert_eq!(crate::numkit::numeric_rank(&p, 1e-8).unwrap(), 3);
    }

    #[test]
    fn haar_moment_two_routes_agree() {
        for (d, t) in [(2, 1), (2, 2), (2, 3), (3, 2), (4, 2), (2, 4)] {
            let a = haar_moment(d, t, &lim()).unwrap();
            let b = type_mixture(d, t, &lim()).unwrap();
            assert!(a.max_abs_diff(&b).unwrap() < 1e-12, "d={d} t={t}");
            assert!((a.trace().re - 1.0).abs() < 1e-12);
        }
        let m1 = haar_moment(2, 1, &lim()).unwrap();
        assert!(
            m1.max_abs_diff(&Operator::maximally_mixed(
                RegisterShape::uniform(2, 1).unwrap()
            ))
            .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn haar_moment_matches_sampling() {
        let samples = 100_000u64;
        let scale = 1u64 << 40;
        let sums: [u64; 32] = parallel_count(17, samples, |rng| {
            let s = haar_state_from_rng(RegisterShape::uniform(2, 1).unwrap(), rng);
            let ss = s.tensor(&s).unwrap();
            let rho = ss.to_density();
            let mut out = [0u64; 32];
            for (k, z) in rho.matrix().iter().enumerate() {
                // Offset keeps the fixed-point accumulators nonnegative.
                out[2 * k] = ((z.re + 1.0) * scale as f64) as u64;
                out[2 * k + 1] = ((z.im + 1.0) * scale as f64) as u64;
            }
            out
        });
        let exact = haar_moment(2, 2, &lim()).unwrap();
        let mut worst = 0.0f64;
        for (k, z) in exact.matrix().iter().enumerate() {
            let re = sums[2 * k] as f64 / scale as f64 / samples as f64 - 1.0;
            let im = sums[2 * k + 1] as f64 / scale as f64 / samples as f64 - 1.0;
            worst = worst.max((C64::new(re, im) - z).norm());
        }
        assert!(worst < 5e-3, "max entry error {worst}");
    }

    #[test]
    fn sampled_moment_is_close_and_reproducible() {
        let a = haar_moment_mc(2, 2, 20_000, 3, &lim()).unwrap();
        let exact = haar_moment(2, 2, &lim()).unwrap();
        assert!(a.max_abs_diff(&exact).unwrap() < 1e-2);
        assert_eq!(a, haar_moment_mc(2, 2, 20_000, 3, &lim()).unwrap());
    }

    #[test]
    fn sample_haar_properties() {
        for seed in [0, 1, 99, u64::MAX] {
            assert!((sample_haar(8, seed).unwrap().amplitudes().norm() - 1.0).abs() < 1e-12);
        }
        let a = sample_haar(4, 0b1010).unwrap().to_density();
        let b = sample_haar(4, 0b1011).unwrap().to_density();
        assert!(fidelity(&a, &b).unwrap() < 0.999);

        let n = 100_000u64;
        let scale = 1u64 << 40;
        let [acc] = parallel_count(5, n, |rng| {
            let s = haar_state_from_rng(RegisterShape::new(vec![4]).unwrap(), rng);
            [(s.amplitudes()[0].norm_sqr() * scale as f64) as u64]
        });
        let mean = acc as f64 / scale as f64 / n as f64;
        assert!((mean - 0.25).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn sampled_types_are_uniform() {
        let types = enumerate_types(4, 2, &lim()).unwrap();
        let mut counts = vec![0u64; types.len()];
        let mut rng = stream_rng(8, 0);
        let n = 50_000;
        for _ in 0..n {
            let t = sample_type(4, 2, &mut rng);
            counts[types.binary_search(&t).unwrap()] += 1;
        }
        let expected = n as f64 / types.len() as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // 9 degrees of freedom; 27.9 is the 0.999 quantile.
        assert!(chi2 < 27.9, "chi2 {chi2}");
    }

    #[test]
    fn bipartition_examples() {
        let b = type_bipartition(&ty(2, &[0, 1]), 1).unwrap();
        assert_eq!(
            b.pairs,
            vec![(ty(2, &[0]), ty(2, &[1])), (ty(2, &[1]), ty(2, &[0]))]
        );
        assert!((b.coefficient - 1.0 / 2f64.sqrt()).abs() < 1e-15);

        let t = ty(4, &[0, 2, 3]);
        let b = type_bipartition(&t, 0).unwrap();
        assert_eq!(b.pairs, vec![(ty(4, &[]), t.clone())]);
        assert_eq!(b.coefficient, 1.0);

        assert!(matches!(
            type_bipartition(&ty(4, &[1, 1]), 1),
            Err(Error::NotCollisionFree)
        ));
        assert!(type_bipartition(&t, 4).is_err());
    }

    #[test]
    fn bipartition_reconstructs_type_state() {
        for (elements, x) in [
            (vec![0, 1, 2], 1),
            (vec![0, 1, 2], 2),
            (vec![0, 1, 3], 3),
            (vec![0, 1, 2, 3], 2),
        ] {
            let t = ty(4, &elements);
            let b = type_bipartition(&t, x).unwrap();
            assert_eq!(
                b.pairs.len() as u128,
                binom(elements.len() as u64, x as u64).unwrap()
            );
            let want = type_state(&t, &lim()).unwrap();
            let mut acc = DVector::<C64>::zeros(want.amplitudes().len());
            for (left, right) in &b.pairs {
                let l = type_state(left, &lim()).unwrap().into_amplitudes();
                let r = type_state(right, &lim()).unwrap().into_amplitudes();
                acc += l.kronecker(&r) * C64::new(b.coefficient, 0.0);
            }
            let err = (acc - want.amplitudes())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12);
        }
    }
}
