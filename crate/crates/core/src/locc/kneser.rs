use nalgebra::DMatrix;

use crate::combinatorics::{binom, Combinations};
use crate::numkit::{real_symmetric_eigenvalues, Limits, Operator, RegisterShape, C64};
use crate::{Error, Result};

/// The Kneser graph on `k`-subsets of `0..v`, adjacent when disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KneserParams {
    pub v: usize,
    pub k: usize,
}

impl KneserParams {
    pub fn new(v: usize, k: usize) -> Result<Self> {
        if k == 0 || v < 2 * k {
            return Err(Error::ParameterError(format!(
                "need 1 <= k and 2k <= v; got v={v}, k={k}"
            )));
        }
        if binom(v as u64, k as u64).is_none() {
            return Err(Error::ParameterError(format!(
                "K({v},{k}) has too many vertices to count"
            )));
        }
        Ok(KneserParams { v, k })
    }

    pub fn vertex_count(&self) -> u128 {
        binom(self.v as u64, self.k as u64).expect("checked in new")
    }
}

fn disjoint(a: &[usize], b: &[usize]) -> bool {
    // Both sorted: merge-walk.
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return false,
        }
    }
    true
}

pub(crate) fn adjacency_real(kp: &KneserParams, limits: &Limits) -> Result<DMatrix<f64>> {
    let n = kp.vertex_count();
    limits.check_enum(n * n)?;
    limits.check_dim(n)?;
    let sets: Vec<Vec<usize>> = Combinations::new(kp.v, kp.k).collect();
    Ok(DMatrix::from_fn(sets.len(), sets.len(), |i, j| {
        f64::from(u8::from(disjoint(&sets[i], &sets[j])))
    }))
}

pub fn kneser_adjacency(kp: &KneserParams, limits: &Limits) -> Result<Operator> {
    let a = adjacency_real(kp, limits)?;
    let shape = RegisterShape::new(vec![a.nrows()])?;
    Ok(Operator::hermitian_unchecked(
        shape,
        a.map(|x| C64::new(x, 0.0)),
    ))
}

/// `2^k (v-1)(v-3)...(v-2k+1) / k!`.
pub fn kneser_formula(v: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * 2.0 * (v + 1 - 2 * i) as f64 / i as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KneserNorm {
    /// Sum of absolute eigenvalues of the adjacency matrix.
    pub exact: f64,
    pub formula: f64,
}

pub fn kneser_one_norm(kp: &KneserParams, limits: &Limits) -> Result<KneserNorm> {
    let a = adjacency_real(kp, limits)?;
    let exact = real_symmetric_eigenvalues(a)?.iter().map(|x| x.abs()).sum();
    Ok(KneserNorm {
        exact,
        formula: kneser_formula(kp.v, kp.k),
    })
}
