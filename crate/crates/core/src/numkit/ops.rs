use nalgebra::{DMatrix, DVector};

use super::{Limits, Operator, RegisterShape, StateVector, C64};
use crate::{Error, Result};

/// Kronecker product under the big-endian register convention.
pub trait Tensor: Sized {
    fn tensor_capped(&self, other: &Self, limits: &Limits) -> Result<Self>;

    fn tensor(&self, other: &Self) -> Result<Self> {
        self.tensor_capped(other, &Limits::default())
    }
}

impl Tensor for StateVector {
    fn tensor_capped(&self, other: &Self, limits: &Limits) -> Result<Self> {
        limits.check_dim(self.shape().total() as u128 * other.shape().total() as u128)?;
        let amplitudes = self.amplitudes().kronecker(other.amplitudes());
        StateVector::new(self.shape().concat(other.shape()), amplitudes)
    }
}

impl Tensor for Operator {
    fn tensor_capped(&self, other: &Self, limits: &Limits) -> Result<Self> {
        limits.check_dim(self.dim() as u128 * other.dim() as u128)?;
        let matrix = self.matrix().kronecker(other.matrix());
        let shape = self.shape().concat(other.shape());
        if self.hermitian_hint() && other.hermitian_hint() {
            Ok(Operator::hermitian_unchecked(shape, matrix))
        } else {
            Operator::new(shape, matrix)
        }
    }
}

fn normalized_set(shape: &RegisterShape, regs: &[usize]) -> Result<Vec<usize>> {
    shape.check_registers(regs)?;
    let mut v = regs.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Splits flat indices into (kept part, traced part) offsets.
struct Split {
    kept_shape: RegisterShape,
    kept_offset: Vec<usize>,
    traced_offset: Vec<usize>,
}

fn split(shape: &RegisterShape, keep: &[usize]) -> Split {
    let strides = shape.strides();
    let traced: Vec<usize> = (0..shape.num_registers())
        .filter(|r| !keep.contains(r))
        .collect();
    let kept_shape = RegisterShape::new(keep.iter().map(|&r| shape.dims()[r]).collect())
        .expect("sub-shape of a valid shape");
    let traced_shape = RegisterShape::new(traced.iter().map(|&r| shape.dims()[r]).collect())
        .expect("sub-shape of a valid shape");
    let offsets = |regs: &[usize], sub: &RegisterShape| -> Vec<usize> {
        (0..sub.total())
            .map(|i| {
                sub.digits(i)
                    .iter()
                    .zip(regs)
                    .map(|(&x, &r)| x * strides[r])
                    .sum()
            })
            .collect()
    };
    Split {
        kept_offset: offsets(keep, &kept_shape),
        traced_offset: offsets(&traced, &traced_shape),
        kept_shape,
    }
}

/// Traces out every register not listed in `keep`.
pub fn partial_trace(m: &Operator, keep: &[usize]) -> Result<Operator> {
    let keep = normalized_set(m.shape(), keep)?;
    let sp = split(m.shape(), &keep);
    let n = sp.kept_shape.total();
    let src = m.matrix();
    let matrix = DMatrix::from_fn(n, n, |i, j| {
        let (oi, oj) = (sp.kept_offset[i], sp.kept_offset[j]);
        sp.traced_offset
            .iter()
            .map(|&t| src[(oi + t, oj + t)])
            .sum::<C64>()
    });
    if m.hermitian_hint() {
        Ok(Operator::hermitian_unchecked(sp.kept_shape, matrix))
    } else {
        Operator::new(sp.kept_shape, matrix)
    }
}

/// Transposes the listed tensor factors in the computational basis.
pub fn partial_transpose(m: &Operator, over: &[usize]) -> Result<Operator> {
    let over = normalized_set(m.shape(), over)?;
    let shape = m.shape();
    let n = shape.total();
    let strides = shape.strides();
    let src = m.matrix();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        let di = shape.digits(i);
        for j in 0..n {
            let dj = shape.digits(j);
            let (mut ni, mut nj) = (i, j);
            for &r in &over {
                let delta = (dj[r] as isize - di[r] as isize) * strides[r] as isize;
                ni = (ni as isize + delta) as usize;
                nj = (nj as isize - delta) as usize;
            }
            out[(ni, nj)] = src[(i, j)];
        }
    }
    if m.hermitian_hint() {
        Ok(Operator::hermitian_unchecked(shape.clone(), out))
    } else {
        Operator::new(shape.clone(), out)
    }
}

/// Applies `local` (acting on `regs`, in the listed order) to a state,
/// leaving the other registers untouched. The result need not be normalised.
pub fn apply_on_registers(
    state: &StateVector,
    regs: &[usize],
    local: &DMatrix<C64>,
) -> Result<DVector<C64>> {
    let shape = state.shape();
    shape.check_registers(regs)?;
    for (k, r) in regs.iter().enumerate() {
        if regs[..k].contains(r) {
            return Err(Error::ShapeMismatch(format!("register {r} listed twice")));
        }
    }
    let local_dim: usize = regs.iter().map(|&r| shape.dims()[r]).product();
    if local.nrows() != local_dim || local.ncols() != local_dim {
        return Err(Error::ShapeMismatch(format!(
            "local operator is {}x{}, registers need {local_dim}",
            local.nrows(),
            local.ncols()
        )));
    }
    let strides = shape.strides();
    let local_shape = RegisterShape::new(regs.iter().map(|&r| shape.dims()[r]).collect())?;
    let local_offset: Vec<usize> = (0..local_dim)
        .map(|i| {
            local_shape
                .digits(i)
                .iter()
                .zip(regs)
                .map(|(&x, &r)| x * strides[r])
                .sum()
        })
        .collect();
    let rest: Vec<usize> = (0..shape.num_registers())
        .filter(|r| !regs.contains(r))
        .collect();
    let rest_shape = RegisterShape::new(rest.iter().map(|&r| shape.dims()[r]).collect())?;
    let amps = state.amplitudes();
    let mut out = DVector::zeros(shape.total());
    let mut buf = DVector::zeros(local_dim);
    for e in 0..rest_shape.total() {
        let base: usize = rest_shape
            .digits(e)
            .iter()
            .zip(&rest)
            .map(|(&x, &r)| x * strides[r])
            .sum();
        for (k, &off) in local_offset.iter().enumerate() {
            buf[k] = amps[base + off];
        }
        let res = local * &buf;
        for (k, &off) in local_offset.iter().enumerate() {
            out[base + off] = res[k];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::trace_norm;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn qubits(k: usize) -> RegisterShape {
        RegisterShape::uniform(2, k).unwrap()
    }

    fn bell() -> StateVector {
        let h = 1.0 / 2f64.sqrt();
        StateVector::new(
            qubits(2),
            DVector::from_vec(vec![c(h), c(0.0), c(0.0), c(h)]),
        )
        .unwrap()
    }

    fn unit(shape: RegisterShape, i: usize, j: usize) -> Operator {
        let n = shape.total();
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = c(1.0);
        Operator::new(shape, m).unwrap()
    }

    #[test]
    fn basis_tensor() {
        let zero = StateVector::basis(qubits(1), 0).unwrap();
        let one = StateVector::basis(qubits(1), 1).unwrap();
        let t = zero.tensor(&one).unwrap();
        assert_eq!(t.amplitudes()[1], c(1.0));
        assert_eq!(t.shape().dims(), &[2, 2]);
    }

    #[test]
    fn identity_tensor() {
        let i2 = Operator::identity(qubits(1));
        assert_eq!(i2.tensor(&i2).unwrap(), Operator::identity(qubits(2)));
    }

    #[test]
    fn phase_on_first_qubit() {
        let z = Operator::hermitian(
            qubits(1),
            DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1.0)])),
        )
        .unwrap();
        let zi = z.tensor(&Operator::identity(qubits(1))).unwrap();
        let ket = StateVector::basis(qubits(2), 2).unwrap();
        let out = zi.matrix() * ket.amplitudes();
        assert_eq!(out[2], c(-1.0));
    }

    #[test]
    fn tensor_respects_cap() {
        let big = Operator::identity(RegisterShape::uniform(2, 7).unwrap());
        let limits = Limits {
            dim: 128,
            enumeration: 10,
        };
        assert!(matches!(
            big.tensor_capped(&big, &limits),
            Err(Error::DimensionOverflow { .. })
        ));
        let state = StateVector::basis(RegisterShape::uniform(2, 8).unwrap(), 0).unwrap();
        assert!(state.tensor(&state).is_err());
    }

    #[test]
    fn product_state_trace() {
        let a = StateVector::basis(qubits(1), 0).unwrap().to_density();
        let b = Operator::maximally_mixed(qubits(1));
        let ab = a.tensor(&b).unwrap();
        assert!(partial_trace(&ab, &[0]).unwrap().max_abs_diff(&a).unwrap() < 1e-15);
        assert!(partial_trace(&ab, &[1]).unwrap().max_abs_diff(&b).unwrap() < 1e-15);
    }

    #[test]
    fn bell_reduced_state_is_mixed() {
        let r = partial_trace(&bell().to_density(), &[0]).unwrap();
        assert!(
            r.max_abs_diff(&Operator::maximally_mixed(qubits(1)))
                .unwrap()
                < 1e-15
        );
    }

    #[test]
    fn trace_over_everything() {
        let rho = bell().to_density();
        let r = partial_trace(&rho, &[]).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((r.matrix()[(0, 0)] - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn bad_register_index() {
        let rho = bell().to_density();
        assert!(matches!(
            partial_trace(&rho, &[2]),
            Err(Error::BadRegisterIndex { .. })
        ));
        assert!(matches!(
            partial_transpose(&rho, &[5]),
            Err(Error::BadRegisterIndex { .. })
        ));
    }

    #[test]
    fn transpose_matrix_unit() {
        let m = unit(qubits(2), 1, 2);
        let t = partial_transpose(&m, &[1]).unwrap();
        assert_eq!(t, unit(qubits(2), 0, 3));
    }

    #[test]
    fn transpose_product_rule() {
        let a = StateVector::basis(qubits(1), 1).unwrap().to_density();
        let mut b = DMatrix::zeros(2, 2);
        b[(0, 1)] = C64::new(0.0, 1.0);
        b[(1, 0)] = C64::new(3.0, -2.0);
        let b = Operator::new(qubits(1), b).unwrap();
        let bt = Operator::new(qubits(1), b.matrix().transpose()).unwrap();
        let lhs = partial_transpose(&a.tensor(&b).unwrap(), &[1]).unwrap();
        assert!(lhs.max_abs_diff(&a.tensor(&bt).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn bell_partial_transpose_norm() {
        let t = partial_transpose(&bell().to_density(), &[1]).unwrap();
        assert!((trace_norm(&t).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn apply_local_matches_kronecker() {
        let shape = RegisterShape::new(vec![2, 3, 2]).unwrap();
        let amps = DVector::from_fn(12, |i, _| C64::new(i as f64 + 1.0, (i % 3) as f64));
        let state = StateVector::normalized(shape.clone(), amps).unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let got = apply_on_registers(&state, &[2], &x).unwrap();
        let full = DMatrix::<C64>::identity(6, 6).kronecker(&x);
        let want = full * state.amplitudes();
        assert!((got - want).norm() < 1e-14);

        let local = DMatrix::from_fn(4, 4, |i, j| C64::new((i * 4 + j) as f64, 1.0));
        let got = apply_on_registers(&state, &[0, 2], &local).unwrap();
        let mut want = DVector::zeros(12);
        for idx in 0..12 {
            let d = shape.digits(idx);
            for a in 0..2 {
                for b in 0..2 {
                    let src = shape.flat(&[a, d[1], b]);
                    want[idx] += local[(d[0] * 2 + d[2], a * 2 + b)] * state.amplitudes()[src];
                }
            }
        }
        assert!((got - want).norm() < 1e-12);
    }
}
