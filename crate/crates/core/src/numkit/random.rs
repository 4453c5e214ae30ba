use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{RegisterShape, StateVector, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random state on `shape`, from normalised complex Gaussian amplitudes.
pub fn haar_state_from_rng<R: Rng + ?Sized>(shape: RegisterShape, rng: &mut R) -> StateVector {
    let n = shape.total();
    let amps = DVector::from_fn(n, |_, _| gaussian(rng));
    StateVector::normalized(shape, amps).expect("Gaussian vector is nonzero almost surely")
}

/// Haar-random `d x d` unitary: QR of a Ginibre matrix with the phases of R's diagonal removed.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..d {
        let rc = r[(c, c)];
        let phase = if rc.norm() > 0.0 {
            rc / rc.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    q
}
