use nalgebra::DMatrix;

use super::{Operator, C64, HERMITIAN_TOL, PSD_TOL};
use crate::{Error, Result};

const SYMMETRIZE_TOL: f64 = 1e-8;

fn hermitian_matrix(m: &Operator) -> Result<DMatrix<C64>> {
    if m.matrix()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::EigsFailed);
    }
    if m.hermitian_hint() {
        return Ok(m.matrix().clone());
    }
    let dev = m.hermiticity_deviation();
    if dev > SYMMETRIZE_TOL {
        return Err(Error::PreconditionViolated(format!(
            "spectral routine needs a Hermitian input, deviation {dev:e}"
        )));
    }
    let a = m.matrix();
    Ok((a + a.adjoint()).unscale(2.0))
}

fn real_part(a: &DMatrix<C64>) -> Option<DMatrix<f64>> {
    a.iter().all(|z| z.im == 0.0).then(|| a.map(|z| z.re))
}

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian operator.
pub fn eigh(m: &Operator) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let a = hermitian_matrix(m)?;
    let (vals, vecs) = if let Some(re) = real_part(&a) {
        let e = re
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigsFailed)?;
        (e.eigenvalues, e.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let e = a
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(Error::EigsFailed)?;
        (e.eigenvalues, e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(vecs.nrows(), vecs.ncols(), |r, c| vecs[(r, order[c])]);
    Ok((sorted_vals, sorted_vecs))
}

/// Eigenvalues (ascending) of a Hermitian operator.
pub fn eigvalsh(m: &Operator) -> Result<Vec<f64>> {
    let a = hermitian_matrix(m)?;
    let vals = match real_part(&a) {
        Some(re) => return real_symmetric_eigenvalues(re),
        None => {
            let fast = a.symmetric_eigenvalues();
            if fast.iter().all(|v| v.is_finite()) {
                fast
            } else {
                a.try_symmetric_eigen(f64::EPSILON, 0)
                    .ok_or(Error::EigsFailed)?
                    .eigenvalues
            }
        }
    };
    sorted_finite(vals.iter().copied())
}

/// Ascending eigenvalues of a real symmetric matrix.
///
/// The eigenvalue-only routine occasionally returns NaN on matrices with
/// exactly decoupled zero blocks; the full decomposition is used then.
pub fn real_symmetric_eigenvalues(m: DMatrix<f64>) -> Result<Vec<f64>> {
    let fast = m.symmetric_eigenvalues();
    if fast.iter().all(|v| v.is_finite()) {
        return sorted_finite(fast.iter().copied());
    }
    // Zero rows carry zero eigenvalues; drop them and decompose the rest.
    let live: Vec<usize> = (0..m.nrows())
        .filter(|&i| m.row(i).iter().any(|&x| x != 0.0))
        .collect();
    let zeros = m.nrows() - live.len();
    let sub = DMatrix::from_fn(live.len(), live.len(), |i, j| m[(live[i], live[j])]);
    let e = sub
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or(Error::EigsFailed)?;
    sorted_finite(
        e.eigenvalues
            .iter()
            .copied()
            .chain(std::iter::repeat_n(0.0, zeros)),
    )
}

fn sorted_finite(vals: impl Iterator<Item = f64>) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = vals.collect();
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigsFailed);
    }
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sum of singular values; eigenvalue route when the Hermitian hint is set.
pub fn trace_norm(m: &Operator) -> Result<f64> {
    if m.hermitian_hint() {
        return Ok(eigvalsh(m)?.iter().map(|v| v.abs()).sum());
    }
    if m.matrix()
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::EigsFailed);
    }
    let svd = m
        .matrix()
        .clone()
        .try_svd(false, false, f64::EPSILON, 0)
        .ok_or(Error::EigsFailed)?;
    Ok(svd.singular_values.iter().sum())
}

pub fn trace_distance(a: &Operator, b: &Operator) -> Result<f64> {
    Ok(0.5 * trace_norm(&a.sub(b)?)?)
}

fn rebuild(vals: &[f64], vecs: &DMatrix<C64>, f: impl Fn(f64) -> f64) -> DMatrix<C64> {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (c, &v) in vals.iter().enumerate() {
        let w = f(v);
        scaled.column_mut(c).scale_mut(w);
    }
    let out = &scaled * vecs.adjoint();
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(out[(i, i)].re, 0.0)
        } else {
            (out[(i, j)] + out[(j, i)].conj()) * 0.5
        }
    })
}

fn check_psd(vals: &[f64]) -> Result<()> {
    match vals.first() {
        Some(&min) if min < -PSD_TOL => Err(Error::NotPsd(min)),
        _ => Ok(()),
    }
}

fn clip(v: f64) -> f64 {
    if v < 0.0 {
        debug_assert!(v >= -PSD_TOL || v.is_nan());
        0.0
    } else {
        v
    }
}

/// Principal square root of a PSD operator; small negative eigenvalues are clipped.
pub fn psd_sqrt(m: &Operator) -> Result<Operator> {
    let (vals, vecs) = eigh(m)?;
    check_psd(&vals)?;
    Ok(Operator::hermitian_unchecked(
        m.shape().clone(),
        rebuild(&vals, &vecs, |v| clip(v).sqrt()),
    ))
}

/// Pseudo-inverse square root: eigenvalues at or below `cutoff` map to zero.
pub fn pinv_sqrt(m: &Operator, cutoff: f64) -> Result<Operator> {
    let (vals, vecs) = eigh(m)?;
    check_psd(&vals)?;
    Ok(Operator::hermitian_unchecked(
        m.shape().clone(),
        rebuild(
            &vals,
            &vecs,
            |v| if v <= cutoff { 0.0 } else { v.powf(-0.5) },
        ),
    ))
}

/// Number of eigenvalues with `|v| > rel_threshold * max |v|`.
pub fn numeric_rank(m: &Operator, rel_threshold: f64) -> Result<usize> {
    let vals = eigvalsh(m)?;
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if max == 0.0 {
        return Ok(0);
    }
    Ok(vals
        .iter()
        .filter(|v| v.abs() > rel_threshold * max)
        .count())
}

/// Orthogonal projector onto the span of eigenvectors with `|v| > rel_threshold * max |v|`.
pub fn support_projector(m: &Operator, rel_threshold: f64) -> Result<Operator> {
    let (vals, vecs) = eigh(m)?;
    let max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(Operator::hermitian_unchecked(
        m.shape().clone(),
        rebuild(&vals, &vecs, |v| {
            if max > 0.0 && v.abs() > rel_threshold * max {
                1.0
            } else {
                0.0
            }
        }),
    ))
}

/// Squared-trace fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
pub fn fidelity(a: &Operator, b: &Operator) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch("fidelity of different shapes".into()));
    }
    for op in [a, b] {
        let dev = op.hermiticity_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::PreconditionViolated(format!(
                "fidelity input deviates from Hermitian by {dev:e}"
            )));
        }
    }
    check_psd(&eigvalsh(b)?)?;
    let root = psd_sqrt(a)?;
    let inner = root.matrix() * b.matrix() * root.matrix();
    let inner =
        Operator::hermitian_unchecked(a.shape().clone(), (&inner + inner.adjoint()).unscale(2.0));
    let vals = eigvalsh(&inner)?;
    // Eigenvalues within rounding of zero would otherwise add ~1e-8 each after the square root.
    let top = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = top * vals.len() as f64 * f64::EPSILON;
    let s: f64 = vals
        .iter()
        .map(|&v| if v <= floor { 0.0 } else { v.sqrt() })
        .sum();
    Ok((s * s).min(1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::{RegisterShape, StateVector};
    use nalgebra::DVector;

    fn q(k: usize) -> RegisterShape {
        RegisterShape::uniform(2, k).unwrap()
    }

    fn diag(shape: RegisterShape, d: &[f64]) -> Operator {
        let v = DVector::from_iterator(d.len(), d.iter().map(|&x| C64::new(x, 0.0)));
        Operator::hermitian(shape, DMatrix::from_diagonal(&v)).unwrap()
    }

    fn ket(i: usize) -> Operator {
        StateVector::basis(q(1), i).unwrap().to_density()
    }

    #[test]
    fn trace_norm_examples() {
        assert!((trace_norm(&Operator::identity(q(2))).unwrap() - 4.0).abs() < 1e-14);
        assert_eq!(trace_norm(&Operator::zeros(q(2))).unwrap(), 0.0);
        let m = ket(0).sub(&Operator::maximally_mixed(q(1))).unwrap();
        assert!((trace_norm(&m).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_trace_norm_uses_singular_values() {
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(3.0, 0.0);
        let op = Operator::new(q(1), m).unwrap();
        assert!((trace_norm(&op).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let mixed = Operator::maximally_mixed(q(1));
        assert_eq!(trace_distance(&mixed, &mixed).unwrap(), 0.0);
        assert!((trace_distance(&ket(0), &ket(1)).unwrap() - 1.0).abs() < 1e-14);
        assert!((trace_distance(&ket(0), &mixed).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            trace_distance(&mixed, &Operator::maximally_mixed(q(2))),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn fidelity_examples() {
        let mixed = Operator::maximally_mixed(q(1));
        assert!((fidelity(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&ket(0), &ket(1)).unwrap().abs() < 1e-12);
        assert!((fidelity(&ket(0), &mixed).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_negative_input() {
        let bad = diag(q(1), &[1.1, -0.1]);
        assert!(matches!(fidelity(&bad, &ket(0)), Err(Error::NotPsd(_))));
        assert!(matches!(fidelity(&ket(0), &bad), Err(Error::NotPsd(_))));
    }

    #[test]
    fn pinv_sqrt_examples() {
        let id = Operator::identity(q(1));
        assert!(pinv_sqrt(&id, 0.5).unwrap().max_abs_diff(&id).unwrap() < 1e-14);
        let four = ket(0).scale(4.0);
        assert!(
            pinv_sqrt(&four, 1e-12)
                .unwrap()
                .max_abs_diff(&ket(0).scale(0.5))
                .unwrap()
                < 1e-14
        );
        let d = diag(q(1), &[1.0, 0.0]);
        assert!(pinv_sqrt(&d, 1e-12).unwrap().max_abs_diff(&d).unwrap() < 1e-14);
        assert!(matches!(
            pinv_sqrt(&diag(q(1), &[1.0, -0.5]), 1e-12),
            Err(Error::NotPsd(_))
        ));
    }

    #[test]
    fn clipping_tolerates_roundoff() {
        let d = diag(q(1), &[1.0, -5e-10]);
        let r = psd_sqrt(&d).unwrap();
        assert_eq!(r.matrix()[(1, 1)].re, 0.0);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&Operator::identity(q(2)), 1e-8).unwrap(), 4);
        let p = StateVector::basis(q(2), 0).unwrap().to_density();
        assert_eq!(numeric_rank(&p, 1e-8).unwrap(), 1);
        assert_eq!(numeric_rank(&Operator::zeros(q(2)), 1e-8).unwrap(), 0);
        let proj = support_projector(&diag(q(2), &[0.5, 0.0, 0.25, 1e-12]), 1e-8).unwrap();
        assert!(
            proj.max_abs_diff(&diag(q(2), &[1.0, 0.0, 1.0, 0.0]))
                .unwrap()
                < 1e-14
        );
    }

    #[test]
    fn complex_eigh_reconstructs() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(2.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let op = Operator::hermitian(q(1), m.clone()).unwrap();
        let (vals, vecs) = eigh(&op).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-12 && (vals[1] - 3.0).abs() < 1e-12);
        let back = &vecs
            * DMatrix::from_diagonal(&DVector::from_iterator(
                2,
                vals.iter().map(|&v| C64::new(v, 0.0)),
            ))
            * vecs.adjoint();
        assert!((back - m).norm() < 1e-12);
    }

    #[test]
    fn sparse_embedded_block_has_finite_spectrum() {
        // A 3-cycle scattered through a large zero matrix.
        let idx = [7usize, 90, 201];
        let mut m = DMatrix::<f64>::zeros(225, 225);
        for a in 0..3 {
            for b in 0..3 {
                if a != b {
                    m[(idx[a], idx[b])] = 1.0;
                }
            }
        }
        let vals = real_symmetric_eigenvalues(m).unwrap();
        assert_eq!(vals.len(), 225);
        assert!((vals.iter().map(|v| v.abs()).sum::<f64>() - 4.0).abs() < 1e-12);
        assert!((vals[224] - 2.0).abs() < 1e-12 && (vals[0] + 1.0).abs() < 1e-12);
    }
}
