//! Fixtures shared by the benchmarks.

use chslab_core::typespace::{haar_moment, sample_haar};
use chslab_core::{Limits, Operator, Result, StateVector};

pub const SEED: u64 = 0x5eed;

/// Haar common state on `n` qubits.
pub fn common_state(n: u32) -> Result<StateVector> {
    sample_haar(1 << n, SEED)
}

/// The identical-copies and independent-copies moments for `t` copies per party.
pub fn moment_pair(d: usize, t: usize) -> Result<(Operator, Operator)> {
    let limits = Limits::default();
    let joint = haar_moment(d, 2 * t, &limits)?;
    let one = haar_moment(d, t, &limits)?;
    let product = chslab_core::numkit::Tensor::tensor_capped(&one, &one, &limits)?;
    Ok((joint, product))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(common_state(2).unwrap().shape().total(), 4);
        let (a, b) = moment_pair(3, 1).unwrap();
        assert_eq!(a.dim(), b.dim());
    }
}
