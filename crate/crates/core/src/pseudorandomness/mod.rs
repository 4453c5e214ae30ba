//! Pauli-Z based pseudorandom state and function-like state generators.
//!
//! The state generator maps a key `k` of `lambda` bits and an `n`-qubit state
//! to `(Z^k (x) I)` applied to it, where `Z^k` acts on the first `lambda`
//! qubits. The function-like variant XORs one key block per input bit.

mod attack;
mod hybrids;
mod lemmas;
mod twirl;

use nalgebra::DVector;

use crate::numkit::{StateVector, C64};
use crate::{Error, Result};

pub use attack::{
    onewayness_quantity, rank_attack, rank_attack_with, KeyedUnitaryFamily, OnewayReport,
    RankAttackReport,
};
pub use hybrids::{prfs_hybrids, prs_hybrids, prs_multikey_hybrids, HybridReport};
pub use lemmas::{
    check_perm_split, lemma_nice_t_check, lemma_prfs_type_check, perm_split_coefficient, LemmaCheck,
};
pub use twirl::{KeyAveraging, KeySchedule, KeyTwirl};

/// A state-generator key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrsKey {
    bits: u64,
    lambda: u32,
}

impl PrsKey {
    /// `bits` holds the key big-endian: its most significant of `lambda` bits
    /// acts on qubit 0.
    pub fn new(bits: u64, lambda: u32) -> Result<Self> {
        if lambda > 63 || bits >> lambda != 0 {
            return Err(Error::ParameterError(format!(
                "key {bits:#b} does not fit in {lambda} bits"
            )));
        }
        Ok(PrsKey { bits, lambda })
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn lambda(&self) -> u32 {
        self.lambda
    }
}

/// A function-like generator key: `2m` blocks of `lambda_prime` bits,
/// stored as `blocks[b * m + i]` for input position `i` and bit value `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrfsKey {
    lambda_prime: u32,
    m: u32,
    blocks: Vec<u64>,
}

impl PrfsKey {
    pub fn new(lambda_prime: u32, m: u32, blocks: Vec<u64>) -> Result<Self> {
        if blocks.len() != 2 * m as usize {
            return Err(Error::ParameterError(format!(
                "{} key blocks for input length {m}",
                blocks.len()
            )));
        }
        if lambda_prime > 63 || blocks.iter().any(|b| b >> lambda_prime != 0) {
            return Err(Error::ParameterError(format!(
                "key block does not fit in {lambda_prime} bits"
            )));
        }
        Ok(PrfsKey {
            lambda_prime,
            m,
            blocks,
        })
    }

    pub fn block(&self, position: usize, bit: bool) -> u64 {
        self.blocks[usize::from(bit) * self.m as usize + position]
    }

    /// XOR of the blocks selected by `x`.
    pub fn effective_key(&self, x: &PrfsInput) -> Result<PrsKey> {
        if x.len() != self.m as usize {
            return Err(Error::ParameterError(format!(
                "input of length {} for key with m = {}",
                x.len(),
                self.m
            )));
        }
        let k = x
            .bits()
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc ^ self.block(i, b));
        PrsKey::new(k, self.lambda_prime)
    }
}

/// A function-like generator input `x` in `{0,1}^m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrfsInput {
    bits: Vec<bool>,
}

impl PrfsInput {
    pub fn new(bits: Vec<bool>) -> Self {
        PrfsInput { bits }
    }

    /// The `m`-bit input whose big-endian encoding is `value`.
    pub fn from_u64(value: u64, m: u32) -> Self {
        PrfsInput {
            bits: (0..m).map(|i| (value >> (m - 1 - i)) & 1 == 1).collect(),
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Parameters shared by the hybrid experiments.
///
/// `lambda` is the key length (per block for the function-like generator),
/// `n` the number of qubits per register, `m` the function input length, `t`
/// the number of common-state copies and `ells[i]` the number of generator
/// outputs requested for query `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoParams {
    pub lambda: u32,
    pub n: u32,
    pub m: u32,
    pub t: usize,
    pub ells: Vec<usize>,
}

impl PseudoParams {
    pub fn new(lambda: u32, n: u32, m: u32, t: usize, ells: Vec<usize>) -> Result<Self> {
        if lambda < 1 || n < lambda {
            return Err(Error::ParameterError(format!(
                "need 1 <= lambda <= n, got lambda={lambda}, n={n}"
            )));
        }
        if n > 20 {
            return Err(Error::ParameterError(format!(
                "{n} qubits per register is too many"
            )));
        }
        if ells.is_empty() {
            return Err(Error::ParameterError(
                "at least one query is required".into(),
            ));
        }
        Ok(PseudoParams {
            lambda,
            n,
            m,
            t,
            ells,
        })
    }

    /// Single-query parameters for the state generator.
    pub fn prs(lambda: u32, n: u32, ell: usize, t: usize) -> Result<Self> {
        Self::new(lambda, n, 0, t, vec![ell])
    }

    pub fn ell(&self) -> usize {
        self.ells.iter().sum()
    }

    pub fn q(&self) -> usize {
        self.ells.len()
    }

    pub fn register_dim(&self) -> usize {
        1usize << self.n
    }
}

fn qubit_count(s: &StateVector) -> Result<u32> {
    let total = s.shape().total();
    if !total.is_power_of_two() {
        return Err(Error::ShapeMismatch(format!(
            "flat dimension {total} is not a qubit register"
        )));
    }
    Ok(total.trailing_zeros())
}

/// Phase `(-1)^{<k, first lambda bits of y>}` on every basis index `y`.
pub fn prs_apply(key: &PrsKey, s: &StateVector) -> Result<StateVector> {
    let n = qubit_count(s)?;
    if n < key.lambda {
        return Err(Error::ShapeMismatch(format!(
            "{n}-qubit state is shorter than a {}-bit key",
            key.lambda
        )));
    }
    let shift = n - key.lambda;
    let amps = DVector::from_fn(s.amplitudes().len(), |y, _| {
        let parity = ((y as u64 >> shift) & key.bits).count_ones() & 1;
        if parity == 1 {
            -s.amplitudes()[y]
        } else {
            s.amplitudes()[y]
        }
    });
    StateVector::new(s.shape().clone(), amps)
}

pub fn prfs_apply(key: &PrfsKey, x: &PrfsInput, s: &StateVector) -> Result<StateVector> {
    prs_apply(&key.effective_key(x)?, s)
}

pub(crate) fn phase(bits: u64) -> C64 {
    if bits.count_ones() & 1 == 1 {
        C64::new(-1.0, 0.0)
    } else {
        C64::new(1.0, 0.0)
    }
}
