use std::collections::HashMap;

use rand::Rng;

use super::PrfsInput;
use crate::numkit::{Limits, Operator};
use crate::rng::{stream_rng, Mode};
use crate::{Error, Result};

/// How per-query keys are derived from one uniformly random key configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KeySchedule {
    /// `keys` independent uniform keys; query `j` uses key `j`.
    Independent { keys: usize },
    /// Function-like generator with `m`-bit inputs; query `j` uses the
    /// effective key of `queries[j]`.
    FunctionLike { m: u32, queries: Vec<PrfsInput> },
}

/// Whether to average over every key configuration or a uniform sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeyAveraging {
    /// Enumerate every configuration; fails if the key space exceeds the cap.
    Exact,
    /// Average over `samples` uniformly drawn configurations.
    Sampled { samples: u64, seed: u64 },
    /// Exact when within the cap, otherwise sampled.
    Auto { samples: u64, seed: u64 },
}

/// Average of `D_K rho D_K^dagger` over key configurations `K`, where `D_K`
/// applies `Z^{e_j(K)}` to the leading `key_bits` qubits of every register
/// assigned to query `j`. Registers with no query are left alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyTwirl {
    register_qubits: u32,
    key_bits: u32,
    slots: Vec<Option<usize>>,
    schedule: KeySchedule,
}

impl KeyTwirl {
    pub fn new(
        register_qubits: u32,
        key_bits: u32,
        slots: Vec<Option<usize>>,
        schedule: KeySchedule,
    ) -> Result<Self> {
        if key_bits < 1 || key_bits > register_qubits {
            return Err(Error::ParameterError(format!(
                "key length {key_bits} must be in 1..={register_qubits}"
            )));
        }
        let queries = match &schedule {
            KeySchedule::Independent { keys } => *keys,
            KeySchedule::FunctionLike { m, queries } => {
                if queries.iter().any(|x| x.len() != *m as usize) {
                    return Err(Error::ParameterError(format!(
                        "every query must have {m} bits"
                    )));
                }
                queries.len()
            }
        };
        if let Some(bad) = slots.iter().flatten().find(|&&j| j >= queries) {
            return Err(Error::ParameterError(format!(
                "register assigned to missing query {bad}"
            )));
        }
        if queries as u64 * key_bits as u64 > 64 {
            return Err(Error::ParameterError(
                "too many query key bits to track".into(),
            ));
        }
        let twirl = KeyTwirl {
            register_qubits,
            key_bits,
            slots,
            schedule,
        };
        if twirl.config_bits() > 64 {
            return Err(Error::ParameterError(format!(
                "{}-bit key space is not supported",
                twirl.config_bits()
            )));
        }
        Ok(twirl)
    }

    pub fn queries(&self) -> usize {
        match &self.schedule {
            KeySchedule::Independent { keys } => *keys,
            KeySchedule::FunctionLike { queries, .. } => queries.len(),
        }
    }

    /// Bit length of one key configuration.
    pub fn config_bits(&self) -> u32 {
        match &self.schedule {
            KeySchedule::Independent { keys } => *keys as u32 * self.key_bits,
            KeySchedule::FunctionLike { m, .. } => 2 * m * self.key_bits,
        }
    }

    fn key_mask(&self) -> u64 {
        (1u64 << self.key_bits) - 1
    }

    fn effective_keys(&self, config: u64, out: &mut [u64]) {
        let mask = self.key_mask();
        let lam = self.key_bits;
        match &self.schedule {
            KeySchedule::Independent { .. } => {
                for (j, e) in out.iter_mut().enumerate() {
                    *e = (config >> (j as u32 * lam)) & mask;
                }
            }
            KeySchedule::FunctionLike { m, queries } => {
                for (e, x) in out.iter_mut().zip(queries) {
                    *e = x.bits().iter().enumerate().fold(0, |acc, (i, &b)| {
                        let block = u32::from(b) * m + i as u32;
                        acc ^ ((config >> (block * lam)) & mask)
                    });
                }
            }
        }
    }

    /// The key configurations an averaging request resolves to.
    pub fn key_configs(
        &self,
        averaging: &KeyAveraging,
        limits: &Limits,
    ) -> Result<(Vec<u64>, Mode)> {
        let bits = self.config_bits();
        let count = 1u128 << bits;
        let sample = |samples: u64, seed: u64| -> Result<(Vec<u64>, Mode)> {
            if samples == 0 {
                return Err(Error::ParameterError("need at least one key sample".into()));
            }
            limits.check_enum(samples as u128)?;
            let mut rng = stream_rng(seed, 0);
            let mask = if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            };
            let keys = (0..samples).map(|_| rng.random::<u64>() & mask).collect();
            Ok((keys, Mode::Sampled { samples }))
        };
        match *averaging {
            KeyAveraging::Exact => {
                limits.check_enum(count)?;
                Ok(((0..count as u64).collect(), Mode::Exact))
            }
            KeyAveraging::Sampled { samples, seed } => sample(samples, seed),
            KeyAveraging::Auto { samples, seed } => {
                if limits.check_enum(count).is_ok() {
                    Ok(((0..count as u64).collect(), Mode::Exact))
                } else {
                    sample(samples, seed)
                }
            }
        }
    }

    pub fn apply(
        &self,
        op: &Operator,
        averaging: &KeyAveraging,
        limits: &Limits,
    ) -> Result<(Operator, Mode)> {
        let (keys, mode) = self.key_configs(averaging, limits)?;
        Ok((self.apply_with_keys(op, &keys)?, mode))
    }

    /// Twirl averaged over an explicit list of key configurations.
    pub fn apply_with_keys(&self, op: &Operator, keys: &[u64]) -> Result<Operator> {
        if keys.is_empty() {
            return Err(Error::ParameterError("empty key list".into()));
        }
        let dims = op.shape().dims();
        let reg = 1usize << self.register_qubits;
        if dims.len() != self.slots.len() || dims.iter().any(|&d| d != reg) {
            return Err(Error::ShapeMismatch(format!(
                "twirl expects {} registers of dimension {reg}, got {:?}",
                self.slots.len(),
                dims
            )));
        }
        // Each basis index is summarised by the XOR of key-bit prefixes of the
        // registers each query touches; phases depend on nothing else.
        let shift = self.register_qubits - self.key_bits;
        let lam = self.key_bits;
        let shape = op.shape();
        let mut class_of_code: HashMap<u64, usize> = HashMap::new();
        let mut codes: Vec<u64> = Vec::new();
        let class: Vec<usize> =
            (0..shape.total())
                .map(|i| {
                    let code = shape.digits(i).iter().zip(&self.slots).fold(
                        0u64,
                        |acc, (&digit, slot)| match slot {
                            Some(j) => acc ^ (((digit >> shift) as u64) << (*j as u32 * lam)),
                            None => acc,
                        },
                    );
                    *class_of_code.entry(code).or_insert_with(|| {
                        codes.push(code);
                        codes.len() - 1
                    })
                })
                .collect();

        let q = self.queries();
        let mut effective = vec![0u64; keys.len() * q];
        for (k, chunk) in keys.iter().zip(effective.chunks_mut(q.max(1))) {
            if q > 0 {
                self.effective_keys(*k, chunk);
            }
        }
        let mask = self.key_mask();
        let mut mean_sign: HashMap<u64, f64> = HashMap::new();
        let mut weight = vec![0.0; codes.len() * codes.len()];
        for (a, &ca) in codes.iter().enumerate() {
            for (b, &cb) in codes.iter().enumerate() {
                let diff = ca ^ cb;
                weight[a * codes.len() + b] = *mean_sign.entry(diff).or_insert_with(|| {
                    let mut sum: i64 = 0;
                    for e in effective.chunks(q.max(1)) {
                        let parity = (0..q).fold(0u32, |acc, j| {
                            acc ^ ((e[j] & (diff >> (j as u32 * lam)) & mask).count_ones() & 1)
                        });
                        sum += if parity == 0 { 1 } else { -1 };
                    }
                    sum as f64 / keys.len() as f64
                });
            }
        }
        let nc = codes.len();
        Ok(op.mask(|i, j| weight[class[i] * nc + class[j]]))
    }
}
