//! Seeded, splittable randomness and Monte Carlo bookkeeping.
//!
//! Every random draw comes from a ChaCha8 stream keyed by `(seed, stream-id)`.
//! Monte Carlo loops split their trials over a fixed number of streams, so
//! the result does not depend on how many worker threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Number of independent streams a Monte Carlo run is split into.
pub const MC_STREAMS: u64 = 64;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes a parent seed with an index into a child seed (splitmix64 finaliser).
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    let mut z = parent ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Whether a reported number was computed exactly or estimated by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { samples: u64 },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled { .. } => "sampled",
        }
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: u64,
}

impl Estimate {
    /// Binomial proportion estimate.
    pub fn proportion(successes: u64, trials: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Estimate {
            mean: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// Number of standard errors separating the estimate from `value`.
    pub fn z_score(&self, value: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == value {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - value).abs() / self.stderr
        }
    }
}

/// Runs `trials` independent trials split across [`MC_STREAMS`] streams and
/// sums the per-trial integer outcomes. `trial` receives the stream's RNG.
/// Integer accumulation keeps the result bit-identical across thread counts.
pub fn parallel_count<const K: usize, F>(seed: u64, trials: u64, trial: F) -> [u64; K]
where
    F: Fn(&mut ChaCha8Rng) -> [u64; K] + Sync,
{
    let per = trials / MC_STREAMS;
    let extra = trials % MC_STREAMS;
    let partials: Vec<[u64; K]> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            let n = per + u64::from(s < extra);
            let mut acc = [0u64; K];
            for _ in 0..n {
                let r = trial(&mut rng);
                for (a, b) in acc.iter_mut().zip(r) {
                    *a += b;
                }
            }
            acc
        })
        .collect();
    partials.into_iter().fold([0u64; K], |mut acc, r| {
        for (a, b) in acc.iter_mut().zip(r) {
            *a += b;
        }
        acc
    })
}

/// Mean of a vector-valued trial over `trials` draws, split across
/// [`MC_STREAMS`] streams. Each stream sums in order and streams are combined
/// in index order, so the result does not depend on the thread count.
pub fn parallel_mean<F>(seed: u64, trials: u64, len: usize, trial: F) -> Vec<f64>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let per = trials / MC_STREAMS;
    let extra = trials % MC_STREAMS;
    let partials: Vec<Vec<f64>> = (0..MC_STREAMS)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s);
            let mut acc = vec![0.0; len];
            let mut buf = vec![0.0; len];
            for _ in 0..per + u64::from(s < extra) {
                buf.iter_mut().for_each(|x| *x = 0.0);
                trial(&mut rng, &mut buf);
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; len];
    for p in partials {
        for (a, b) in total.iter_mut().zip(p) {
            *a += b;
        }
    }
    total.iter_mut().for_each(|x| *x /= trials as f64);
    total
}
