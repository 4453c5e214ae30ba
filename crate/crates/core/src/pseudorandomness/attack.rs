use nalgebra::DMatrix;

use super::{phase, PseudoParams};
use crate::combinatorics::binom_f64;
use crate::numkit::{
    numeric_rank, pinv_sqrt, support_projector, Limits, Operator, Tensor, C64, RANK_REL_THRESHOLD,
};
use crate::typespace::haar_moment;
use crate::{Error, Result};

/// A keyed family of unitaries acting on one register, used as a
/// single-copy state generator.
pub trait KeyedUnitaryFamily: Sync {
    fn register_dim(&self) -> usize;
    fn key_count(&self) -> u64;
    fn unitary(&self, key: u64) -> DMatrix<C64>;
}

/// The Pauli-Z state generator as a unitary family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseKeyGenerator {
    pub lambda: u32,
    pub n: u32,
}

impl KeyedUnitaryFamily for PhaseKeyGenerator {
    fn register_dim(&self) -> usize {
        1 << self.n
    }

    fn key_count(&self) -> u64 {
        1 << self.lambda
    }

    fn unitary(&self, key: u64) -> DMatrix<C64> {
        let d = self.register_dim();
        let shift = self.n - self.lambda;
        let mut u = DMatrix::zeros(d, d);
        for y in 0..d {
            u[(y, y)] = phase(key & (y as u64 >> shift));
        }
        u
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankAttackReport {
    pub rank0: usize,
    pub rank1: usize,
    /// `C(d + ell - 1, ell) * C(d + t - 1, t)`.
    pub rank1_formula: f64,
    /// `keys * C(d + ell + t - 1, ell + t)`.
    pub rank0_bound: f64,
    /// Acceptance probability of the support projector on the generator state.
    pub accept_pseudo: f64,
    /// Acceptance probability of the support projector on the Haar state.
    pub accept_haar: f64,
    /// `keys / C(ell + t, ell) * prod_{i < ell} (1 + t / (d + i))`.
    pub ratio_bound: f64,
}

/// Rank attack on the Pauli-Z generator; `p.ells[0]` generator copies next to
/// `p.t` copies of the common state.
pub fn rank_attack(p: &PseudoParams, limits: &Limits) -> Result<RankAttackReport> {
    if p.q() != 1 {
        return Err(Error::ParameterError(
            "the rank attack takes one query".into(),
        ));
    }
    let generator = PhaseKeyGenerator {
        lambda: p.lambda,
        n: p.n,
    };
    rank_attack_with(&generator, p.ells[0], p.t, limits)
}

/// Rank attack against any keyed unitary family: project onto the support of
/// the averaged generator state and measure both hypotheses.
pub fn rank_attack_with(
    family: &dyn KeyedUnitaryFamily,
    ell: usize,
    t: usize,
    limits: &Limits,
) -> Result<RankAttackReport> {
    let d = family.register_dim();
    limits.check_power(d, ell + t)?;
    limits.check_enum(family.key_count() as u128)?;
    let moment = haar_moment(d, ell + t, limits)?;
    let spectators = DMatrix::<C64>::identity(d.pow(t as u32), d.pow(t as u32));
    let mut acc: Option<Operator> = None;
    for key in 0..family.key_count() {
        let u = family.unitary(key);
        let dev = (&u * u.adjoint() - DMatrix::<C64>::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        let mut full = DMatrix::<C64>::identity(1, 1);
        for _ in 0..ell {
            full = full.kronecker(&u);
        }
        let term = moment.conjugate(&full.kronecker(&spectators))?;
        acc = Some(match acc {
            None => term,
            Some(a) => a.add(&term)?,
        });
    }
    let rho0 = acc
        .ok_or_else(|| Error::ParameterError("empty key space".into()))?
        .scale(1.0 / family.key_count() as f64);
    let rho1 = haar_moment(d, ell, limits)?.tensor_capped(&haar_moment(d, t, limits)?, limits)?;

    let proj = support_projector(&rho0, RANK_REL_THRESHOLD)?;
    let keys = family.key_count() as f64;
    let ratio_bound = (0..ell).fold(keys / binom_f64((ell + t) as u64, ell as u64), |acc, i| {
        acc * (1.0 + t as f64 / (d + i) as f64)
    });
    Ok(RankAttackReport {
        rank0: numeric_rank(&rho0, RANK_REL_THRESHOLD)?,
        rank1: numeric_rank(&rho1, RANK_REL_THRESHOLD)?,
        rank1_formula: binom_f64((d + ell - 1) as u64, ell as u64)
            * binom_f64((d + t - 1) as u64, t as u64),
        rank0_bound: keys * binom_f64((d + ell + t - 1) as u64, (ell + t) as u64),
        accept_pseudo: proj.trace_product(&rho0)?.re,
        accept_haar: proj.trace_product(&rho1)?.re,
        ratio_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnewayReport {
    pub value: f64,
    /// `(m + 1) / d`.
    pub bound: f64,
}

/// Mean over `x` of `Tr(rho_x S rho_x S)` with `S` the pseudo-inverse square
/// root of `sum_x rho_x`, where `rho_x` is the `(m+1)`-copy Haar moment on
/// `n`-qubit registers with `Z^x` conjugating the first copy.
pub fn onewayness_quantity(n: u32, m: usize, limits: &Limits) -> Result<OnewayReport> {
    if !(1..=20).contains(&n) {
        return Err(Error::ParameterError(format!(
            "register size {n} out of range"
        )));
    }
    let d = 1usize << n;
    limits.check_power(d, m + 1)?;
    limits.check_enum(d as u128)?;
    let moment = haar_moment(d, m + 1, limits)?;
    let shape = moment.shape().clone();
    let first_stride = shape.strides()[0];
    let rhos: Vec<Operator> = (0..d)
        .map(|x| {
            let phases: Vec<C64> = (0..shape.total())
                .map(|i| phase((x & (i / first_stride)) as u64))
                .collect();
            moment.conjugate_diagonal(&phases)
        })
        .collect::<Result<_>>()?;
    let mut sigma = Operator::zeros(shape);
    for r in &rhos {
        sigma = sigma.add(r)?;
    }
    let s = pinv_sqrt(&sigma, 1e-10)?;
    let mut total = 0.0;
    for r in &rhos {
        let a = r.compose(&s)?;
        total += a.trace_product(&a)?.re;
    }
    Ok(OnewayReport {
        value: total / d as f64,
        bound: (m + 1) as f64 / d as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::haar_unitary;
    use crate::rng::stream_rng;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn rank_attack_reference_point() {
        let r = rank_attack(&PseudoParams::prs(2, 2, 1, 2).unwrap(), &lim()).unwrap();
        assert_eq!(r.rank1, 40);
        assert_eq!(r.rank1_formula, 40.0);
        assert!((r.accept_pseudo - 1.0).abs() < 1e-9);
        assert!(r.accept_haar <= r.rank0 as f64 / r.rank1 as f64 + 1e-9);
        assert!(r.rank0 as f64 <= r.rank0_bound);
        assert!((r.ratio_bound - 2.0).abs() < 1e-12);
        assert!((r.ratio_bound - r.rank0_bound / r.rank1_formula).abs() < 1e-12);
    }

    #[test]
    fn rank_attack_inequality_across_points() {
        for (lambda, n, ell, t) in [
            (1, 1, 1, 1),
            (1, 2, 1, 1),
            (2, 2, 2, 1),
            (1, 1, 2, 3),
            (2, 3, 1, 1),
        ] {
            let r = rank_attack(&PseudoParams::prs(lambda, n, ell, t).unwrap(), &lim()).unwrap();
            assert_eq!(r.rank1 as f64, r.rank1_formula);
            assert!((r.accept_pseudo - 1.0).abs() < 1e-9);
            assert!(
                r.accept_haar <= r.rank0 as f64 / r.rank1 as f64 + 1e-9,
                "{r:?}"
            );
            assert!((r.ratio_bound - r.rank0_bound / r.rank1_formula).abs() < 1e-9);
        }
    }

    struct RandomFamily(Vec<DMatrix<C64>>);

    impl KeyedUnitaryFamily for RandomFamily {
        fn register_dim(&self) -> usize {
            self.0[0].nrows()
        }
        fn key_count(&self) -> u64 {
            self.0.len() as u64
        }
        fn unitary(&self, key: u64) -> DMatrix<C64> {
            self.0[key as usize].clone()
        }
    }

    #[test]
    fn attack_hook_accepts_other_families() {
        let mut rng = stream_rng(4, 0);
        let fam = RandomFamily((0..3).map(|_| haar_unitary(2, &mut rng)).collect());
        let r = rank_attack_with(&fam, 1, 2, &lim()).unwrap();
        assert!((r.accept_pseudo - 1.0).abs() < 1e-9);
        assert!(r.accept_haar <= r.rank0 as f64 / r.rank1 as f64 + 1e-9);

        let bad = RandomFamily(vec![DMatrix::from_element(2, 2, C64::new(1.0, 0.0))]);
        assert!(matches!(
            rank_attack_with(&bad, 1, 1, &lim()),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn onewayness_without_extra_copies_is_tight() {
        for n in 1..=3 {
            let r = onewayness_quantity(n, 0, &lim()).unwrap();
            let d = (1 << n) as f64;
            assert!((r.value - 1.0 / d).abs() < 1e-12);
            assert_eq!(r.bound, 1.0 / d);
        }
    }

    #[test]
    fn onewayness_bound_holds() {
        for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let r = onewayness_quantity(n, m, &lim()).unwrap();
            assert!(r.value <= r.bound + 1e-9, "n={n} m={m}: {r:?}");
            assert!(r.value > 0.0);
        }
    }
}
