//! A commitment scheme built from copies of the common state.
//!
//! Each of `p` register pairs `(C_i, R_i)` holds either the key-superposed
//! state `2^{-lambda/2} sum_k (Z^k (x) I)|theta>|k 0...0>` (bit 0) or the
//! maximally entangled state (bit 1). Opening sends `R`; the receiver runs a
//! SWAP test per pair against a fresh copy, which accepts with the POVM
//! element `prod_i (I + |psi_b><psi_b|) / 2`.
//!
//! Pair registers are laid out `C_1, R_1, C_2, R_2, ...`, with a malicious
//! sender's private register `E` last.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::combinatorics::Combinations;
use crate::numkit::{
    apply_on_registers, fidelity, haar_state_from_rng, haar_unitary, partial_trace, trace_distance,
    Limits, Operator, RegisterShape, StateVector, Tensor, C64,
};
use crate::pseudorandomness::{prs_apply, KeyAveraging, KeySchedule, KeyTwirl, PrsKey};
use crate::rng::stream_rng;
use crate::typespace::haar_moment;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitmentParams {
    pub lambda: u32,
    pub n: u32,
    /// Number of register pairs.
    pub p: usize,
    /// Copies of the common state held by a hiding adversary.
    pub t: usize,
}

impl CommitmentParams {
    pub fn new(lambda: u32, n: u32, p: usize, t: usize) -> Result<Self> {
        if n < lambda + 1 {
            return Err(Error::ParameterError(format!(
                "need n >= lambda + 1, got lambda={lambda}, n={n}"
            )));
        }
        if n > 12 || p < 1 {
            return Err(Error::ParameterError(format!("unsupported n={n}, p={p}")));
        }
        Ok(CommitmentParams { lambda, n, p, t })
    }

    fn register_dim(&self) -> usize {
        1 << self.n
    }

    fn pair_shape(&self) -> RegisterShape {
        RegisterShape::uniform(self.register_dim(), 2).expect("n >= 1")
    }

    fn check_common(&self, common: &StateVector) -> Result<()> {
        if common.shape().total() != self.register_dim() {
            return Err(Error::ShapeMismatch(format!(
                "common state has dimension {}, expected {}",
                common.shape().total(),
                self.register_dim()
            )));
        }
        Ok(())
    }
}

/// The committed state of one `(C, R)` pair.
pub fn commit_pair_state(
    b: bool,
    common: &StateVector,
    cp: &CommitmentParams,
) -> Result<StateVector> {
    cp.check_common(common)?;
    let d = cp.register_dim();
    let shape = cp.pair_shape();
    let mut amps = DVector::<C64>::zeros(d * d);
    if b {
        let w = C64::new((d as f64).recip().sqrt(), 0.0);
        for j in 0..d {
            amps[j * d + j] = w;
        }
    } else {
        let keys = 1u64 << cp.lambda;
        let w = (keys as f64).recip().sqrt();
        let flat = StateVector::new(
            RegisterShape::uniform(2, cp.n as usize)?,
            common.amplitudes().clone(),
        )?;
        for k in 0..keys {
            let phased = prs_apply(&PrsKey::new(k, cp.lambda)?, &flat)?;
            let r = (k as usize) << (cp.n - cp.lambda);
            for c in 0..d {
                amps[c * d + r] += phased.amplitudes()[c] * w;
            }
        }
    }
    StateVector::new(shape, amps)
}

/// The `p`-fold commitment to `b`.
pub fn commit_state(
    b: bool,
    common: &StateVector,
    cp: &CommitmentParams,
    limits: &Limits,
) -> Result<StateVector> {
    limits.check_power(cp.register_dim(), 2 * cp.p)?;
    let pair = commit_pair_state(b, common, cp)?;
    let mut acc = pair.clone();
    for _ in 1..cp.p {
        acc = acc.tensor_capped(&pair, limits)?;
    }
    Ok(acc)
}

/// Probability that every SWAP test accepts a claimed `(C, R)` state as `b`.
pub fn receiver_accept_prob(
    b: bool,
    claimed: &Operator,
    common: &StateVector,
    cp: &CommitmentParams,
) -> Result<f64> {
    let d = cp.register_dim();
    if claimed.shape().dims() != vec![d; 2 * cp.p].as_slice() {
        return Err(Error::ShapeMismatch(format!(
            "claimed state has registers {:?}, expected {} pairs of dimension {d}",
            claimed.shape().dims(),
            cp.p
        )));
    }
    let pair = commit_pair_state(b, common, cp)?;
    // Expand prod (I + P)/2 over the subsets S of pairs that get the projector.
    let mut total = 0.0;
    for size in 0..=cp.p {
        for subset in Combinations::new(cp.p, size) {
            let keep: Vec<usize> = subset.iter().flat_map(|&i| [2 * i, 2 * i + 1]).collect();
            let reduced = partial_trace(claimed, &keep)?;
            let mut psi = DVector::from_element(1, C64::new(1.0, 0.0));
            for _ in 0..size {
                psi = psi.kronecker(pair.amplitudes());
            }
            total += (psi.adjoint() * reduced.matrix() * &psi)[(0, 0)].re;
        }
    }
    Ok(total / 2f64.powi(cp.p as i32))
}

/// Same probability for a pure state on `(C, R, extra...)`, tracing out any
/// registers after the `2p` pair registers.
pub fn receiver_accept_prob_pure(
    b: bool,
    state: &StateVector,
    common: &StateVector,
    cp: &CommitmentParams,
) -> Result<f64> {
    let d = cp.register_dim();
    let dims = state.shape().dims();
    if dims.len() < 2 * cp.p || dims[..2 * cp.p].iter().any(|&x| x != d) {
        return Err(Error::ShapeMismatch(format!(
            "state registers {dims:?} do not start with {} pairs of dimension {d}",
            cp.p
        )));
    }
    let pair = commit_pair_state(b, common, cp)?;
    let proj = pair.amplitudes() * pair.amplitudes().adjoint();
    let mut v = state.amplitudes().clone();
    for i in 0..cp.p {
        let current = StateVector::new(state.shape().clone(), v.clone()).ok();
        let applied = match current {
            Some(s) => apply_on_registers(&s, &[2 * i, 2 * i + 1], &proj)?,
            None => apply_unnormalized(state.shape(), &v, &[2 * i, 2 * i + 1], &proj)?,
        };
        v = (v + applied).unscale(2.0);
    }
    Ok(state.amplitudes().dotc(&v).re)
}

fn apply_unnormalized(
    shape: &RegisterShape,
    v: &DVector<C64>,
    regs: &[usize],
    op: &DMatrix<C64>,
) -> Result<DVector<C64>> {
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(v.clone());
    }
    let s = StateVector::new(shape.clone(), v.unscale(norm))?;
    Ok(apply_on_registers(&s, regs, op)? * C64::new(norm, 0.0))
}

/// Exact trace distance between the receiver's views of commitments to 0 and
/// to 1, each next to `t` copies of the common state, averaged over Haar.
pub fn hiding_distance(cp: &CommitmentParams, limits: &Limits) -> Result<f64> {
    let d = cp.register_dim();
    limits.check_power(d, cp.p + cp.t)?;
    let moment = haar_moment(d, cp.p + cp.t, limits)?;
    // Tracing R out of the bit-0 pair leaves the key-averaged Z^k conjugation of theta.
    let slots = (0..cp.p)
        .map(Some)
        .chain(std::iter::repeat_n(None, cp.t))
        .collect();
    let twirl = KeyTwirl::new(
        cp.n,
        cp.lambda.max(1),
        slots,
        KeySchedule::Independent { keys: cp.p },
    )?;
    let zero = if cp.lambda == 0 {
        moment
    } else {
        twirl.apply(&moment, &KeyAveraging::Exact, limits)?.0
    };
    let one = Operator::maximally_mixed(RegisterShape::uniform(d, cp.p)?)
        .tensor_capped(&haar_moment(d, cp.t, limits)?, limits)?;
    trace_distance(&zero, &one)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityCheck {
    pub fidelity: f64,
    /// `2^{-(n - lambda)}`.
    pub bound: f64,
}

/// Fidelity between the key-averaged common state and the maximally mixed state.
pub fn fidelity_bound_check(lambda: u32, n: u32, common: &StateVector) -> Result<FidelityCheck> {
    let cp = CommitmentParams::new(lambda, n, 1, 0)?;
    cp.check_common(common)?;
    let flat = StateVector::new(
        RegisterShape::uniform(2, n as usize)?,
        common.amplitudes().clone(),
    )?;
    let keys = 1u64 << lambda;
    let mut rho = Operator::zeros(flat.shape().clone());
    for k in 0..keys {
        rho = rho.add(&prs_apply(&PrsKey::new(k, lambda)?, &flat)?.to_density())?;
    }
    let rho = rho.scale(1.0 / keys as f64);
    Ok(FidelityCheck {
        fidelity: fidelity(&rho, &Operator::maximally_mixed(flat.shape().clone()))?,
        bound: 2f64.powi(-((n - lambda) as i32)),
    })
}

/// A cheating sender: an initial state on `(C_1, R_1, ..., C_p, R_p, E)` and
/// one opening unitary per bit acting on `(R_1, ..., R_p, E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaliciousSender {
    initial: StateVector,
    reveal: [DMatrix<C64>; 2],
}

impl MaliciousSender {
    pub fn new(
        initial: StateVector,
        reveal0: DMatrix<C64>,
        reveal1: DMatrix<C64>,
        cp: &CommitmentParams,
    ) -> Result<Self> {
        let d = cp.register_dim();
        let dims = initial.shape().dims();
        if dims.len() != 2 * cp.p + 1 || dims[..2 * cp.p].iter().any(|&x| x != d) {
            return Err(Error::ShapeMismatch(format!(
                "sender state registers {dims:?} do not match {} pairs plus one private register",
                cp.p
            )));
        }
        let re_dim = d.pow(cp.p as u32) * dims[2 * cp.p];
        for u in [&reveal0, &reveal1] {
            if u.nrows() != re_dim || u.ncols() != re_dim {
                return Err(Error::ShapeMismatch(format!(
                    "opening unitary must be {re_dim}x{re_dim}"
                )));
            }
            let dev = (u * u.adjoint() - DMatrix::<C64>::identity(re_dim, re_dim))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            if dev > 1e-10 {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(MaliciousSender {
            initial,
            reveal: [reveal0, reveal1],
        })
    }

    fn open_registers(&self, cp: &CommitmentParams) -> Vec<usize> {
        (0..cp.p)
            .map(|i| 2 * i + 1)
            .chain(std::iter::once(2 * cp.p))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BindingOutcome {
    pub p0: f64,
    pub p1: f64,
    /// `1 + ((1 + 2^{-(n - lambda)/2}) / 2)^p`.
    pub bound: f64,
}

pub fn sum_binding_bound(cp: &CommitmentParams) -> f64 {
    1.0 + ((1.0 + 2f64.powf(-((cp.n - cp.lambda) as f64) / 2.0)) / 2.0).powi(cp.p as i32)
}

/// Exact opening probabilities for both bits against one strategy.
pub fn binding_sum(
    strategy: &MaliciousSender,
    common: &StateVector,
    cp: &CommitmentParams,
) -> Result<BindingOutcome> {
    let regs = strategy.open_registers(cp);
    let mut probs = [0.0; 2];
    for (b, prob) in probs.iter_mut().enumerate() {
        let opened = apply_on_registers(&strategy.initial, &regs, &strategy.reveal[b])?;
        let opened = StateVector::normalized(strategy.initial.shape().clone(), opened)?;
        *prob = receiver_accept_prob_pure(b == 1, &opened, common, cp)?;
    }
    Ok(BindingOutcome {
        p0: probs[0],
        p1: probs[1],
        bound: sum_binding_bound(cp),
    })
}

fn with_private_qubit(s: &StateVector) -> Result<StateVector> {
    s.tensor_capped(
        &StateVector::basis(RegisterShape::new(vec![2])?, 0)?,
        &Limits {
            dim: usize::MAX,
            enumeration: 0,
        },
    )
}

/// Uhlmann unitary `V` on `R` maximising `|<to| (I (x) V) |from>|` for pair states.
fn uhlmann_unitary(from: &StateVector, to: &StateVector, d: usize) -> Result<DMatrix<C64>> {
    let a0 = DMatrix::from_fn(d, d, |c, r| from.amplitudes()[c * d + r]);
    let a1 = DMatrix::from_fn(d, d, |c, r| to.amplitudes()[c * d + r]);
    let svd = (a1.adjoint() * a0)
        .try_svd(true, true, f64::EPSILON, 0)
        .ok_or(Error::EigsFailed)?;
    let (w, v_t) = (
        svd.u.ok_or(Error::EigsFailed)?,
        svd.v_t.ok_or(Error::EigsFailed)?,
    );
    Ok((v_t.adjoint() * w.adjoint()).transpose())
}

/// Built-in strategies, by name.
///
/// - `honest-0`, `honest-1`: commit honestly, open honestly for either bit.
/// - `commit-psi1-open-both`: commit to 1 and never touch `R`.
/// - `superposition-open-both`: commit to the normalised sum of both commitments.
/// - `honest0-uhlmann1`: commit to 0; for bit 1 rotate each `R_i` onto the
///   bit-1 state as well as any unitary on `R_i` can.
pub fn builtin_strategies(
    common: &StateVector,
    cp: &CommitmentParams,
    limits: &Limits,
) -> Result<Vec<(&'static str, MaliciousSender)>> {
    let d = cp.register_dim();
    let re_dim = d.pow(cp.p as u32) * 2;
    limits.check_dim((d.pow(2 * cp.p as u32) * 2) as u128)?;
    let id = DMatrix::<C64>::identity(re_dim, re_dim);
    let zero = commit_state(false, common, cp, limits)?;
    let one = commit_state(true, common, cp, limits)?;
    let sum = StateVector::normalized(zero.shape().clone(), zero.amplitudes() + one.amplitudes())?;

    let v = uhlmann_unitary(
        &commit_pair_state(false, common, cp)?,
        &commit_pair_state(true, common, cp)?,
        d,
    )?;
    let mut rotate = DMatrix::<C64>::identity(1, 1);
    for _ in 0..cp.p {
        rotate = rotate.kronecker(&v);
    }
    let rotate = rotate.kronecker(&DMatrix::<C64>::identity(2, 2));

    Ok(vec![
        (
            "honest-0",
            MaliciousSender::new(with_private_qubit(&zero)?, id.clone(), id.clone(), cp)?,
        ),
        (
            "honest-1",
            MaliciousSender::new(with_private_qubit(&one)?, id.clone(), id.clone(), cp)?,
        ),
        (
            "commit-psi1-open-both",
            MaliciousSender::new(with_private_qubit(&one)?, id.clone(), id.clone(), cp)?,
        ),
        (
            "superposition-open-both",
            MaliciousSender::new(with_private_qubit(&sum)?, id.clone(), id.clone(), cp)?,
        ),
        (
            "honest0-uhlmann1",
            MaliciousSender::new(with_private_qubit(&zero)?, id, rotate, cp)?,
        ),
    ])
}

/// A random strategy: Haar initial state on `(C, R, E)` with a one-qubit `E`
/// and Haar opening unitaries on `(R, E)`.
pub fn random_strategy(
    cp: &CommitmentParams,
    seed: u64,
    limits: &Limits,
) -> Result<MaliciousSender> {
    let d = cp.register_dim();
    let mut dims = vec![d; 2 * cp.p];
    dims.push(2);
    let shape = RegisterShape::new(dims)?;
    limits.check_dim(shape.total() as u128)?;
    let mut rng = stream_rng(seed, 0);
    let initial = haar_state_from_rng(shape, &mut rng);
    let re_dim = d.pow(cp.p as u32) * 2;
    let u0 = haar_unitary(re_dim, &mut rng);
    let u1 = haar_unitary(re_dim, &mut rng);
    // Burn one draw so strategies from adjacent seeds never share a stream prefix.
    let _: u64 = rng.random();
    MaliciousSender::new(initial, u0, u1, cp)
}
