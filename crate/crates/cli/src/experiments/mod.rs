//! The experiment registry.
//!
//! Each entry names the core operation it drives, its default parameters and
//! the property its checks assert. Parameters are validated before anything
//! is allocated: an unknown key, an out-of-range value or a rejected
//! parameter struct is a configuration error, while failures inside the
//! computation (caps, numerical contracts) become failed checks.

use std::collections::BTreeMap;

use chslab_core::Limits;

use crate::report::Recorder;
use crate::CliError;

mod commitment;
mod locc;
mod pseudo;
mod typespace;

/// Why an experiment stopped early.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Module(chslab_core::Error),
}

impl From<chslab_core::Error> for Failure {
    fn from(e: chslab_core::Error) -> Self {
        Failure::Module(e)
    }
}

pub type Outcome = std::result::Result<(), Failure>;

/// Maps a constructor's rejection to a configuration error.
pub(crate) trait Validated<T> {
    fn validated(self) -> std::result::Result<T, Failure>;
}

impl<T> Validated<T> for chslab_core::Result<T> {
    fn validated(self) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.to_string()))
    }
}

/// Resolved parameters: registry defaults overlaid with the config block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params(BTreeMap<String, u64>);

impl Params {
    pub fn get(&self, key: &str) -> std::result::Result<u64, Failure> {
        self.0
            .get(key)
            .copied()
            .ok_or_else(|| Failure::Config(format!("missing parameter `{key}`")))
    }

    pub fn u32(&self, key: &str) -> std::result::Result<u32, Failure> {
        let v = self.get(key)?;
        u32::try_from(v)
            .ok()
            .filter(|&x| x <= 64)
            .ok_or_else(|| Failure::Config(format!("`{key}` = {v} is out of range")))
    }

    pub fn usize(&self, key: &str) -> std::result::Result<usize, Failure> {
        let v = self.get(key)?;
        usize::try_from(v).map_err(|_| Failure::Config(format!("`{key}` = {v} is out of range")))
    }

    /// A positive count with an upper limit.
    pub fn count(&self, key: &str, max: u64) -> std::result::Result<u64, Failure> {
        let v = self.get(key)?;
        if v == 0 || v > max {
            return Err(Failure::Config(format!(
                "`{key}` must be in 1..={max}, got {v}"
            )));
        }
        Ok(v)
    }

    pub fn into_map(self) -> BTreeMap<String, u64> {
        self.0
    }
}

/// What an experiment body gets to work with.
pub struct Ctx<'a> {
    pub params: &'a Params,
    pub seed: u64,
    pub limits: Limits,
}

pub struct Experiment {
    pub name: &'static str,
    /// The core operation(s) exercised.
    pub operation: &'static str,
    /// The property asserted by the checks.
    pub asserts: &'static str,
    pub defaults: &'static [(&'static str, u64)],
    pub body: fn(&Ctx, &mut Recorder) -> Outcome,
}

impl Experiment {
    /// Overlays `overrides` on the defaults, rejecting unknown keys.
    pub fn resolve(&self, overrides: &BTreeMap<String, u64>) -> Result<Params, CliError> {
        let mut map: BTreeMap<String, u64> = self
            .defaults
            .iter()
            .map(|&(k, v)| (k.to_string(), v))
            .collect();
        for (k, &v) in overrides {
            match map.get_mut(k) {
                Some(slot) => *slot = v,
                None => {
                    let known: Vec<&str> = self.defaults.iter().map(|d| d.0).collect();
                    return Err(CliError::ConfigInvalid(format!(
                        "experiment `{}` has no parameter `{k}` (expected one of: {})",
                        self.name,
                        known.join(", ")
                    )));
                }
            }
        }
        Ok(Params(map))
    }
}

pub static REGISTRY: &[Experiment] = &[
    typespace::HAAR_MOMENT,
    typespace::HAAR_MOMENT_MC,
    typespace::BIPARTITION,
    typespace::GOOD_TYPE_PROBABILITY,
    pseudo::DISENTANGLING,
    pseudo::PRFS_TYPE,
    pseudo::PRS_HYBRID,
    pseudo::PRS_DECAY,
    pseudo::PRFS_HYBRID,
    pseudo::RANK_ATTACK,
    pseudo::ONEWAY,
    commitment::COMMITMENT,
    commitment::COMMITMENT_FIDELITY,
    commitment::COMMITMENT_HIDING,
    locc::KNESER,
    locc::KNESER_SWEEP,
    locc::PPT_CHAIN,
    locc::PPT_SANDWICH,
    locc::LOCC_ADVANTAGE,
];

pub fn lookup(name: &str) -> Result<&'static Experiment, CliError> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::ConfigInvalid(format!(
            "unknown experiment `{name}` (known: {})",
            names.join(", ")
        ))
    })
}

/// Density-matrix contract: unit trace, Hermitian, no negative eigenvalues.
pub(crate) fn record_density(
    rec: &mut Recorder,
    prefix: &str,
    rho: &chslab_core::Operator,
) -> Outcome {
    use crate::report::ModeTag::Exact;
    rec.eq(
        &format!("{prefix}_trace"),
        rho.trace().re,
        Exact,
        1.0,
        1e-10,
    );
    rec.le(
        &format!("{prefix}_hermiticity_deviation"),
        rho.hermiticity_deviation(),
        Exact,
        0.0,
        1e-10,
    );
    let min = chslab_core::numkit::eigvalsh(rho)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    rec.ge(&format!("{prefix}_min_eigenvalue"), min, Exact, 0.0, 1e-8);
    Ok(())
}
