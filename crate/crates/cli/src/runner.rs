//! Running single configs and named suites.

use chslab_core::rng::derive_seed;
use rayon::prelude::*;

use crate::config::{Caps, ExperimentConfig};
use crate::experiments::{lookup, Ctx, Failure};
use crate::report::{Recorder, Report, Run};
use crate::CliError;

type Entry = (&'static str, &'static [(&'static str, u64)]);

const LEMMAS: &[Entry] = &[
    ("haar-moment", &[("d", 2), ("t", 2)]),
    ("haar-moment", &[("d", 2), ("t", 3)]),
    ("haar-moment", &[("d", 4), ("t", 2)]),
    ("bipartition", &[("d", 5), ("t", 3), ("x", 1)]),
    ("bipartition", &[("d", 6), ("t", 4), ("x", 2)]),
    ("disentangling", &[("n", 2), ("m", 0), ("ell", 1), ("t", 1)]),
    ("disentangling", &[("n", 2), ("m", 0), ("ell", 1), ("t", 2)]),
    ("disentangling", &[("n", 2), ("m", 1), ("ell", 1), ("t", 1)]),
    ("disentangling", &[("n", 2), ("m", 1), ("ell", 1), ("t", 2)]),
    (
        "prfs-type",
        &[
            ("lambda", 1),
            ("m", 1),
            ("n", 2),
            ("q", 2),
            ("ell", 1),
            ("t", 0),
        ],
    ),
    (
        "prfs-type",
        &[
            ("lambda", 1),
            ("m", 2),
            ("n", 2),
            ("q", 2),
            ("ell", 1),
            ("t", 0),
        ],
    ),
    (
        "prfs-type",
        &[
            ("lambda", 2),
            ("m", 1),
            ("n", 2),
            ("q", 2),
            ("ell", 1),
            ("t", 1),
        ],
    ),
    (
        "prfs-type",
        &[
            ("lambda", 2),
            ("m", 1),
            ("n", 3),
            ("q", 2),
            ("ell", 1),
            ("t", 1),
        ],
    ),
    ("kneser", &[("v", 5), ("k", 2)]),
    ("kneser", &[("v", 7), ("k", 3)]),
    ("kneser-sweep", &[("max_vertices", 200)]),
];

const BOUNDS: &[Entry] = &[
    (
        "prs-hybrid",
        &[("lambda", 2), ("n", 2), ("ell", 1), ("t", 1)],
    ),
    (
        "prs-hybrid",
        &[("lambda", 2), ("n", 2), ("ell", 0), ("t", 1)],
    ),
    (
        "prs-decay",
        &[("ell", 1), ("t", 1), ("n_from", 2), ("n_to", 3)],
    ),
    (
        "prfs-hybrid",
        &[
            ("lambda", 1),
            ("n", 2),
            ("m", 1),
            ("q", 2),
            ("ell", 1),
            ("t", 1),
        ],
    ),
    (
        "rank-attack",
        &[("lambda", 2), ("n", 2), ("ell", 1), ("t", 2)],
    ),
    ("oneway", &[("n", 1), ("m", 1)]),
    ("oneway", &[("n", 2), ("m", 1)]),
    (
        "commitment-fidelity",
        &[("lambda", 1), ("n", 2), ("seeds", 100)],
    ),
    (
        "commitment-fidelity",
        &[("lambda", 2), ("n", 3), ("seeds", 100)],
    ),
    (
        "commitment",
        &[("lambda", 1), ("n", 2), ("p", 1), ("strategies", 20)],
    ),
    (
        "commitment",
        &[("lambda", 1), ("n", 2), ("p", 2), ("strategies", 20)],
    ),
    (
        "commitment",
        &[("lambda", 1), ("n", 3), ("p", 1), ("strategies", 20)],
    ),
    (
        "commitment",
        &[("lambda", 1), ("n", 3), ("p", 2), ("strategies", 20)],
    ),
    (
        "commitment-hiding",
        &[("lambda", 1), ("n", 2), ("p", 1), ("t", 1)],
    ),
    (
        "commitment-hiding",
        &[("lambda", 1), ("n", 3), ("p", 1), ("t", 1)],
    ),
    (
        "commitment-hiding",
        &[("lambda", 2), ("n", 3), ("p", 1), ("t", 1)],
    ),
    ("ppt-chain", &[("d", 6), ("t", 1)]),
    ("ppt-chain", &[("d", 6), ("t", 2)]),
    ("ppt-chain", &[("d", 8), ("t", 2)]),
    ("ppt-sandwich", &[("d", 4), ("t", 1)]),
    ("ppt-sandwich", &[("d", 6), ("t", 1)]),
];

const MONTECARLO: &[Entry] = &[
    (
        "haar-moment-mc",
        &[("d", 2), ("t", 2), ("samples", 100_000)],
    ),
    (
        "good-type-probability",
        &[
            ("n", 2),
            ("m", 0),
            ("ell", 1),
            ("t", 3),
            ("trials", 100_000),
        ],
    ),
    (
        "good-type-probability",
        &[
            ("n", 2),
            ("m", 1),
            ("ell", 2),
            ("t", 3),
            ("trials", 1_000_000),
        ],
    ),
    (
        "locc-advantage",
        &[("d", 4), ("t", 1), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 16), ("t", 1), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 16), ("t", 2), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 16), ("t", 4), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 64), ("t", 1), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 64), ("t", 2), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 64), ("t", 4), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 1024), ("t", 1), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 1024), ("t", 2), ("trials", 1_000_000)],
    ),
    (
        "locc-advantage",
        &[("d", 1024), ("t", 4), ("trials", 1_000_000)],
    ),
];

pub const SUITES: &[&str] = &["lemmas", "bounds", "montecarlo", "all"];

/// The configs of a suite in declaration order, without seeds.
pub fn suite_configs(name: &str) -> Result<Vec<ExperimentConfig>, CliError> {
    let entries: Vec<&Entry> = match name {
        "lemmas" => LEMMAS.iter().collect(),
        "bounds" => BOUNDS.iter().collect(),
        "montecarlo" => MONTECARLO.iter().collect(),
        "all" => LEMMAS.iter().chain(BOUNDS).chain(MONTECARLO).collect(),
        _ => {
            return Err(CliError::ConfigInvalid(format!(
                "unknown suite `{name}` (known: {})",
                SUITES.join(", ")
            )))
        }
    };
    Ok(entries
        .into_iter()
        .map(|(exp, params)| {
            params
                .iter()
                .fold(ExperimentConfig::new(exp), |c, &(k, v)| c.with_param(k, v))
        })
        .collect())
}

fn execute(config: &ExperimentConfig) -> Result<Run, CliError> {
    let exp = lookup(&config.experiment)?;
    let params = exp.resolve(&config.params)?;
    let ctx = Ctx {
        params: &params,
        seed: config.seed,
        limits: config.caps.limits(),
    };
    let mut rec = Recorder::new(&config.tolerances);
    match (exp.body)(&ctx, &mut rec) {
        Ok(()) => {}
        Err(Failure::Config(msg)) => {
            return Err(CliError::ConfigInvalid(format!("{}: {msg}", exp.name)));
        }
        Err(Failure::Module(e)) => rec.error("error", e.kind()),
    }
    Ok(Run {
        experiment: exp.name.to_string(),
        params: params.into_map(),
        seed: config.seed,
        checks: rec.finish(),
    })
}

/// Runs one config. Deterministic in `(config, config.seed)`.
pub fn run(config: &ExperimentConfig) -> Result<Report, CliError> {
    let r = execute(config)?;
    Ok(Report::new(
        r.experiment.clone(),
        config.seed,
        config.caps,
        vec![r],
    ))
}

/// Runs every config of a suite. Experiment `i` gets seed
/// `derive_seed(seed, i)`; with `jobs > 1` experiments run concurrently on a
/// dedicated pool and the report keeps declaration order.
pub fn run_suite(name: &str, seed: u64, caps: Caps, jobs: usize) -> Result<Report, CliError> {
    let configs: Vec<ExperimentConfig> = suite_configs(name)?
        .into_iter()
        .enumerate()
        .map(|(i, mut c)| {
            c.seed = derive_seed(seed, i as u64);
            c.caps = caps;
            c
        })
        .collect();
    for c in &configs {
        lookup(&c.experiment)?.resolve(&c.params)?;
    }
    let runs: Vec<Run> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?;
        pool.install(|| configs.par_iter().map(execute).collect::<Result<_, _>>())?
    } else {
        configs.iter().map(execute).collect::<Result<_, _>>()?
    };
    Ok(Report::new(format!("suite:{name}"), seed, caps, runs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Verdict;

    #[test]
    fn every_suite_entry_resolves() {
        for s in SUITES {
            for c in suite_configs(s).unwrap() {
                lookup(&c.experiment).unwrap().resolve(&c.params).unwrap();
            }
        }
        assert!(matches!(
            suite_configs("fast"),
            Err(CliError::ConfigInvalid(_))
        ));
    }

    #[test]
    fn kneser_example() {
        let r = run(&ExperimentConfig::new("kneser")
            .with_param("v", 5)
            .with_param("k", 2))
        .unwrap();
        let c = &r.runs[0].checks[0];
        assert_eq!(c.value, Some(16.0));
        assert_eq!(c.reference, Some(16.0));
        assert!(r.passed);
    }

    #[test]
    fn cap_violation_is_a_failed_check() {
        let mut c = ExperimentConfig::new("haar-moment")
            .with_param("d", 4)
            .with_param("t", 4);
        c.caps.dim = 16;
        let r = run(&c).unwrap();
        assert!(!r.passed);
        let last = r.runs[0].checks.last().unwrap();
        assert_eq!(last.verdict, Verdict::Fail);
        assert_eq!(last.error.as_deref(), Some("DimensionOverflow"));
    }

    #[test]
    fn rejected_parameters_are_config_errors() {
        let c = ExperimentConfig::new("prs-hybrid")
            .with_param("lambda", 3)
            .with_param("n", 2);
        assert!(matches!(run(&c), Err(CliError::ConfigInvalid(_))));
        let c = ExperimentConfig::new("ppt-chain")
            .with_param("d", 3)
            .with_param("t", 2);
        assert!(matches!(run(&c), Err(CliError::ConfigInvalid(_))));
    }

    #[test]
    fn prs_hybrid_example() {
        let r = run(&ExperimentConfig::new("prs-hybrid")).unwrap();
        assert!(r.passed, "{}", r.summary_table());
        let names: Vec<&str> = r.runs[0].checks.iter().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"td") && names.contains(&"rho_min_eigenvalue"));
    }

    #[test]
    fn suite_is_independent_of_job_count() {
        let a = run_suite("lemmas", 3, Caps::default(), 1).unwrap();
        let b = run_suite("lemmas", 3, Caps::default(), 4).unwrap();
        assert_eq!(a.without_timings(), b.without_timings());
        assert!(a.passed, "{}", a.summary_table());
    }
}
