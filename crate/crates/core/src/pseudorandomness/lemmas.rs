use nalgebra::{DMatrix, DVector};

use super::twirl::{KeyAveraging, KeySchedule, KeyTwirl};
use super::PrfsInput;
use crate::combinatorics::Combinations;
use crate::numkit::{Limits, Operator, RegisterShape, C64};
use crate::rng::Mode;
use crate::typespace::{
    is_l_fold_prefix_collision_free, is_prefix_collision_free_up_to, type_state, PrefixParams,
    TypeVector,
};
use crate::{Error, Result};

/// Outcome of comparing two independently computed sides of an identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaCheck {
    /// Largest entrywise modulus of the difference.
    pub discrepancy: f64,
    pub mode: Mode,
}

fn require_good(ty: &TypeVector, p: &PrefixParams, limits: &Limits) -> Result<()> {
    if !is_l_fold_prefix_collision_free(ty, p, limits)? {
        return Err(Error::PreconditionViolated(format!(
            "type is not {}-fold {}-prefix collision-free",
            p.ell, p.n
        )));
    }
    Ok(())
}

/// Key average of the phase picked up by `|v><sigma(v)|` when `Z^k` hits the
/// first `ell` positions, enumerating all `2^n` keys.
pub fn perm_split_coefficient(
    v: &[usize],
    sigma: &[usize],
    p: &PrefixParams,
    limits: &Limits,
) -> Result<f64> {
    limits.check_enum(1u128 << p.n)?;
    let permuted: Vec<usize> = sigma.iter().map(|&s| v[s]).collect();
    let prefix_xor = |w: &[usize]| {
        w[..p.ell]
            .iter()
            .fold(0u64, |acc, &x| acc ^ (x >> p.m) as u64)
    };
    let (a, b) = (prefix_xor(v), prefix_xor(&permuted));
    let mut sum: i64 = 0;
    for k in 0..1u64 << p.n {
        let parity = ((k & a).count_ones() + (k & b).count_ones()) & 1;
        sum += if parity == 0 { 1 } else { -1 };
    }
    Ok(sum as f64 / (1u64 << p.n) as f64)
}

/// Checks that the key average of `|v><sigma(v)|` is the matrix unit itself
/// when `sigma` keeps the keyed block `[0, ell)` in place and zero otherwise.
pub fn check_perm_split(
    v: &[usize],
    sigma: &[usize],
    p: &PrefixParams,
    limits: &Limits,
) -> Result<bool> {
    if v.len() != p.t || sigma.len() != p.t {
        return Err(Error::ParameterError(format!(
            "tuple and permutation must both have length {}",
            p.t
        )));
    }
    let mut seen = vec![false; p.t];
    for &s in sigma {
        if s >= p.t || std::mem::replace(&mut seen[s], true) {
            return Err(Error::ParameterError("sigma is not a permutation".into()));
        }
    }
    let ty = TypeVector::from_elements(p.alphabet_dim(), v)?;
    require_good(&ty, p, limits)?;
    let keeps_block = sigma[..p.ell].iter().all(|&s| s < p.ell);
    let expected = if keeps_block { 1.0 } else { 0.0 };
    let coefficient = perm_split_coefficient(v, sigma, p, limits)?;
    Ok((coefficient - expected).abs() <= 1e-12)
}

fn outer_add(acc: &mut DMatrix<C64>, v: &DVector<C64>, weight: f64) {
    let n = v.len();
    let nz: Vec<usize> = (0..n).filter(|&i| v[i].norm_sqr() > 0.0).collect();
    for &i in &nz {
        for &j in &nz {
            acc[(i, j)] += v[i] * v[j].conj() * weight;
        }
    }
}

fn sub_type(ty: &TypeVector, elements: &[usize], positions: &[usize]) -> Result<TypeVector> {
    let picked: Vec<usize> = positions.iter().map(|&i| elements[i]).collect();
    TypeVector::from_elements(ty.alphabet_dim(), &picked)
}

/// Mixture over sequentially drawn disjoint position subsets of sizes
/// `ells[0], ells[1], ...` with the remainder last.
fn subset_mixture(ty: &TypeVector, ells: &[usize], limits: &Limits) -> Result<Operator> {
    let elements = ty.elements();
    let d = ty.alphabet_dim();
    limits.check_power(d, elements.len())?;
    let shape = RegisterShape::uniform(d, elements.len())?;
    let n = shape.total();
    let mut acc = DMatrix::<C64>::zeros(n, n);

    struct Frame<'a> {
        ty: &'a TypeVector,
        elements: &'a [usize],
        ells: &'a [usize],
        limits: &'a Limits,
    }

    fn recurse(
        f: &Frame,
        depth: usize,
        remaining: Vec<usize>,
        prefix: DVector<C64>,
        weight: f64,
        acc: &mut DMatrix<C64>,
    ) -> Result<()> {
        if depth == f.ells.len() {
            let rest = type_state(&sub_type(f.ty, f.elements, &remaining)?, f.limits)?;
            outer_add(acc, &prefix.kronecker(rest.amplitudes()), weight);
            return Ok(());
        }
        let picks: Vec<Vec<usize>> = Combinations::new(remaining.len(), f.ells[depth]).collect();
        let w = weight / picks.len() as f64;
        for pick in picks {
            let chosen: Vec<usize> = pick.iter().map(|&i| remaining[i]).collect();
            let left: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|x| !chosen.contains(x))
                .collect();
            let part = type_state(&sub_type(f.ty, f.elements, &chosen)?, f.limits)?;
            recurse(
                f,
                depth + 1,
                left,
                prefix.kronecker(part.amplitudes()),
                w,
                acc,
            )?;
        }
        Ok(())
    }

    let frame = Frame {
        ty,
        elements: &elements,
        ells,
        limits,
    };
    let start = DVector::from_element(1, C64::new(1.0, 0.0));
    recurse(
        &frame,
        0,
        (0..elements.len()).collect(),
        start,
        1.0,
        &mut acc,
    )?;
    Operator::hermitian(shape, acc)
}

fn slots_for(ells: &[usize], spectators: usize) -> Vec<Option<usize>> {
    ells.iter()
        .enumerate()
        .flat_map(|(j, &l)| std::iter::repeat_n(Some(j), l))
        .chain(std::iter::repeat_n(None, spectators))
        .collect()
}

/// Compares the key-averaged type state (first `ell` registers keyed) with
/// the uniform mixture of `|X><X| (x) |T \ X><T \ X|` over `ell`-subsets `X`.
pub fn lemma_nice_t_check(
    ty: &TypeVector,
    p: &PrefixParams,
    limits: &Limits,
) -> Result<LemmaCheck> {
    require_good(ty, p, limits)?;
    limits.check_power(ty.alphabet_dim(), ty.total())?;
    let twirl = KeyTwirl::new(
        p.n + p.m,
        p.n,
        slots_for(&[p.ell], p.t - p.ell),
        KeySchedule::Independent { keys: 1 },
    )?;
    let rho = type_state(ty, limits)?.to_density();
    let (lhs, mode) = twirl.apply(&rho, &KeyAveraging::Exact, limits)?;
    let rhs = subset_mixture(ty, &[p.ell], limits)?;
    Ok(LemmaCheck {
        discrepancy: lhs.max_abs_diff(&rhs)?,
        mode,
    })
}

/// Compares the function-like generator's key average over `queries` (query
/// `j` keying `ells[j]` registers) applied to `|T><T|` with the mixture over
/// sequentially drawn disjoint subsets.
///
/// Requires distinct queries and `i`-fold prefix collision-freeness of `T`
/// for every `i <= sum(ells)`.
pub fn lemma_prfs_type_check(
    ty: &TypeVector,
    queries: &[PrfsInput],
    ells: &[usize],
    p: &PrefixParams,
    averaging: &KeyAveraging,
    limits: &Limits,
) -> Result<LemmaCheck> {
    if queries.is_empty() || queries.len() != ells.len() {
        return Err(Error::ParameterError(
            "one multiplicity per query is required".into(),
        ));
    }
    if ells.iter().sum::<usize>() != p.ell {
        return Err(Error::ParameterError(format!(
            "multiplicities sum to {} but ell is {}",
            ells.iter().sum::<usize>(),
            p.ell
        )));
    }
    for (i, x) in queries.iter().enumerate() {
        if queries[..i].contains(x) {
            return Err(Error::PreconditionViolated(
                "queries must be distinct".into(),
            ));
        }
    }
    let m_in = queries[0].len() as u32;
    if !is_prefix_collision_free_up_to(ty, p, limits)? {
        return Err(Error::PreconditionViolated(format!(
            "type is not i-fold {}-prefix collision-free for every i <= {}",
            p.n, p.ell
        )));
    }
    limits.check_power(ty.alphabet_dim(), ty.total())?;
    let twirl = KeyTwirl::new(
        p.n + p.m,
        p.n,
        slots_for(ells, p.t - p.ell),
        KeySchedule::FunctionLike {
            m: m_in,
            queries: queries.to_vec(),
        },
    )?;
    let rho = type_state(ty, limits)?.to_density();
    let (lhs, mode) = twirl.apply(&rho, averaging, limits)?;
    let rhs = subset_mixture(ty, ells, limits)?;
    Ok(LemmaCheck {
        discrepancy: lhs.max_abs_diff(&rhs)?,
        mode,
    })
}
