use super::twirl::{KeyAveraging, KeySchedule, KeyTwirl};
use super::{PrfsInput, PseudoParams};
use crate::numkit::{trace_distance, Limits, Operator, Tensor};
use crate::rng::{derive_seed, Mode};
use crate::typespace::haar_moment;
use crate::{Error, Result};

/// Generator-side state, ideal state, their trace distance and the
/// constant-free reference value of the asymptotic bound.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridReport {
    pub rho: Operator,
    pub sigma: Operator,
    pub td: f64,
    /// Standard error of `td` across key-sample batches (sampled mode only).
    pub td_stderr: Option<f64>,
    pub bound: f64,
    pub mode: Mode,
}

const SAMPLE_BATCHES: u64 = 8;

fn keyed_slots(blocks: &[usize], spectators: usize) -> Vec<Option<usize>> {
    blocks
        .iter()
        .enumerate()
        .flat_map(|(j, &l)| std::iter::repeat_n(Some(j), l))
        .chain(std::iter::repeat_n(None, spectators))
        .collect()
}

/// `moment(ells[0]) (x) moment(ells[1]) (x) ... (x) moment(t)`.
fn ideal_state(d: usize, blocks: &[usize], t: usize, limits: &Limits) -> Result<Operator> {
    let mut acc = haar_moment(d, 0, limits)?;
    for &l in blocks.iter().chain(std::iter::once(&t)) {
        acc = acc.tensor_capped(&haar_moment(d, l, limits)?, limits)?;
    }
    Ok(acc)
}

fn reference_bound(blocks: usize, ell: usize, total: usize, lambda: u32) -> f64 {
    blocks as f64 * (total as f64).powi(2 * ell as i32) / 2f64.powi(lambda as i32)
}

/// Exact state-generator hybrid: `ell` keyed copies followed by `t` copies of
/// the common state, against independent Haar copies.
pub fn prs_hybrids(p: &PseudoParams, limits: &Limits) -> Result<HybridReport> {
    if p.q() != 1 {
        return Err(Error::ParameterError(
            "the state-generator hybrid takes one query".into(),
        ));
    }
    prs_multikey_hybrids(p, 1, limits)
}

/// Exact multi-key hybrid: `keys` independent keys, each keying `ell` copies.
pub fn prs_multikey_hybrids(
    p: &PseudoParams,
    keys: usize,
    limits: &Limits,
) -> Result<HybridReport> {
    if keys < 1 {
        return Err(Error::ParameterError("need at least one key".into()));
    }
    let ell = p.ells[0];
    let d = p.register_dim();
    let total = keys * ell + p.t;
    limits.check_power(d, total)?;
    let blocks = vec![ell; keys];
    let twirl = KeyTwirl::new(
        p.n,
        p.lambda,
        keyed_slots(&blocks, p.t),
        KeySchedule::Independent { keys },
    )?;
    let (rho, mode) = twirl.apply(
        &haar_moment(d, total, limits)?,
        &KeyAveraging::Exact,
        limits,
    )?;
    let sigma = ideal_state(d, &blocks, p.t, limits)?;
    Ok(HybridReport {
        td: trace_distance(&rho, &sigma)?,
        td_stderr: None,
        bound: reference_bound(keys, ell, keys * ell + p.t, p.lambda),
        rho,
        sigma,
        mode,
    })
}

/// Function-like generator hybrid over distinct `queries`, query `j` taking
/// `p.ells[j]` copies. Sampled key averaging is split into batches whose
/// spread gives the reported standard error.
pub fn prfs_hybrids(
    p: &PseudoParams,
    queries: &[PrfsInput],
    averaging: &KeyAveraging,
    limits: &Limits,
) -> Result<HybridReport> {
    if queries.len() != p.q() {
        return Err(Error::ParameterError(format!(
            "{} queries for {} multiplicities",
            queries.len(),
            p.q()
        )));
    }
    if queries.iter().any(|x| x.len() != p.m as usize) {
        return Err(Error::ParameterError(format!(
            "queries must have {} bits",
            p.m
        )));
    }
    for (i, x) in queries.iter().enumerate() {
        if queries[..i].contains(x) {
            return Err(Error::PreconditionViolated(
                "queries must be distinct".into(),
            ));
        }
    }
    let d = p.register_dim();
    let total = p.ell() + p.t;
    limits.check_power(d, total)?;
    let twirl = KeyTwirl::new(
        p.n,
        p.lambda,
        keyed_slots(&p.ells, p.t),
        KeySchedule::FunctionLike {
            m: p.m,
            queries: queries.to_vec(),
        },
    )?;
    let moment = haar_moment(d, total, limits)?;
    let sigma = ideal_state(d, &p.ells, p.t, limits)?;
    let bound = reference_bound(1, p.ell(), total, p.lambda);
    let (keys, mode) = twirl.key_configs(averaging, limits)?;
    match mode {
        Mode::Exact => {
            let rho = twirl.apply_with_keys(&moment, &keys)?;
            Ok(HybridReport {
                td: trace_distance(&rho, &sigma)?,
                td_stderr: None,
                bound,
                rho,
                sigma,
                mode,
            })
        }
        Mode::Sampled { samples } => {
            let seed = match averaging {
                KeyAveraging::Sampled { seed, .. } | KeyAveraging::Auto { seed, .. } => *seed,
                KeyAveraging::Exact => unreachable!("exact averaging never samples"),
            };
            let batches = SAMPLE_BATCHES.min(samples);
            let mut rho: Option<Operator> = None;
            let mut tds = Vec::new();
            for b in 0..batches {
                let size = samples / batches + u64::from(b < samples % batches);
                let request = KeyAveraging::Sampled {
                    samples: size,
                    seed: derive_seed(seed, b),
                };
                let (batch_keys, _) = twirl.key_configs(&request, limits)?;
                let part = twirl.apply_with_keys(&moment, &batch_keys)?;
                tds.push(trace_distance(&part, &sigma)?);
                let weighted = part.scale(size as f64 / samples as f64);
                rho = Some(match rho {
                    None => weighted,
                    Some(acc) => acc.add(&weighted)?,
                });
            }
            let rho = rho.expect("at least one batch");
            let mean = tds.iter().sum::<f64>() / tds.len() as f64;
            let stderr = if tds.len() > 1 {
                let var =
                    tds.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (tds.len() - 1) as f64;
                (var / tds.len() as f64).sqrt()
            } else {
                f64::NAN
            };
            Ok(HybridReport {
                td: trace_distance(&rho, &sigma)?,
                td_stderr: Some(stderr),
                bound,
                rho,
                sigma,
                mode,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn prs(lambda: u32, n: u32, ell: usize, t: usize) -> HybridReport {
        prs_hybrids(&PseudoParams::prs(lambda, n, ell, t).unwrap(), &lim()).unwrap()
    }

    #[test]
    fn no_generator_output_means_no_distance() {
        let r = prs(2, 2, 0, 2);
        assert_eq!(r.td, 0.0);
        assert_eq!(r.rho, r.sigma);
    }

    #[test]
    fn single_copy_without_spectators_is_exact() {
        let r = prs(2, 2, 1, 0);
        assert!(r.td < 1e-14);
    }

    #[test]
    fn distance_shrinks_with_key_length() {
        let small = prs(2, 2, 1, 1);
        let large = prs(3, 3, 1, 1);
        assert!(
            small.td <= 1.0 && large.td < small.td,
            "{} vs {}",
            small.td,
            large.td
        );
        assert!(small.rho.check_density().is_ok());
        assert_eq!(small.bound, 4.0 / 4.0);
    }

    #[test]
    fn multikey_with_one_key_matches_single_key() {
        let p = PseudoParams::prs(2, 2, 1, 1).unwrap();
        let a = prs_hybrids(&p, &lim()).unwrap();
        let b = prs_multikey_hybrids(&p, 1, &lim()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multikey_distance_nonincreasing_in_key_length() {
        let small =
            prs_multikey_hybrids(&PseudoParams::prs(2, 2, 1, 0).unwrap(), 2, &lim()).unwrap();
        let large =
            prs_multikey_hybrids(&PseudoParams::prs(3, 3, 1, 0).unwrap(), 2, &lim()).unwrap();
        assert!(large.td <= small.td + 1e-12);
        assert_eq!(small.rho.dim(), 16);
        assert!(small.rho.check_density().is_ok());
    }

    #[test]
    fn single_query_function_like_matches_state_generator() {
        for (lambda, n, m, ell, t) in [(1, 1, 1, 1, 1), (2, 2, 1, 1, 1), (1, 2, 2, 2, 0)] {
            let p = PseudoParams::new(lambda, n, m, t, vec![ell]).unwrap();
            let f = prfs_hybrids(
                &p,
                &[PrfsInput::from_u64(1, m)],
                &KeyAveraging::Exact,
                &lim(),
            )
            .unwrap();
            let s = prs(lambda, n, ell, t);
            assert!((f.td - s.td).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_multiplicities_give_zero_distance() {
        let p = PseudoParams::new(1, 2, 1, 1, vec![0, 0]).unwrap();
        let q = [PrfsInput::from_u64(0, 1), PrfsInput::from_u64(1, 1)];
        assert_eq!(
            prfs_hybrids(&p, &q, &KeyAveraging::Exact, &lim())
                .unwrap()
                .td,
            0.0
        );
    }

    #[test]
    fn two_query_function_like_hybrid() {
        let p = PseudoParams::new(2, 2, 1, 0, vec![1, 1]).unwrap();
        let q = [PrfsInput::from_u64(0, 1), PrfsInput::from_u64(1, 1)];
        let r = prfs_hybrids(&p, &q, &KeyAveraging::Exact, &lim()).unwrap();
        assert_eq!(r.mode, Mode::Exact);
        assert!(r.td >= 0.0 && r.td <= 1.0);
        assert!(r.rho.check_density().is_ok());
        // With lambda = n both keys dephase completely, leaving the diagonal of
        // the two-copy moment (1/10 on |aa>, 1/20 on |ab>) against I/16.
        assert!((r.td - 0.15).abs() < 1e-12, "{}", r.td);

        let dup = [PrfsInput::from_u64(0, 1), PrfsInput::from_u64(0, 1)];
        assert!(prfs_hybrids(&p, &dup, &KeyAveraging::Exact, &lim()).is_err());
    }

    #[test]
    fn sampled_mode_reports_spread() {
        let p = PseudoParams::new(1, 2, 2, 1, vec![1, 1]).unwrap();
        let q = [PrfsInput::from_u64(0, 2), PrfsInput::from_u64(3, 2)];
        let exact = prfs_hybrids(&p, &q, &KeyAveraging::Exact, &lim()).unwrap();
        let sampled = prfs_hybrids(
            &p,
            &q,
            &KeyAveraging::Sampled {
                samples: 4000,
                seed: 1,
            },
            &lim(),
        )
        .unwrap();
        assert_eq!(sampled.mode, Mode::Sampled { samples: 4000 });
        let se = sampled.td_stderr.unwrap();
        assert!(se.is_finite());
        assert!(
            (sampled.td - exact.td).abs() < 0.05,
            "{} vs {}",
            sampled.td,
            exact.td
        );
        let again = prfs_hybrids(
            &p,
            &q,
            &KeyAveraging::Sampled {
                samples: 4000,
                seed: 1,
            },
            &lim(),
        )
        .unwrap();
        assert_eq!(sampled, again);
    }
}
