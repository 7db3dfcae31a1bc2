//! Run configuration: command-line flags layered over an optional TOML file.
//!
//! Every field has a default:
//!
//! | field         | default                                   |
//! |---------------|-------------------------------------------|
//! | `case`        | `1`                                       |
//! | `n`           | `10`, or the length of `[[env]]`          |
//! | `p`           | `N` (case 3), or the length of `particles`|
//! | `j`           | `1` (case 2)                              |
//! | `seed`        | `0`                                       |
//! | `g_min/g_max` | `0` / `1`                                 |
//! | `phase_mode`  | `real`                                    |
//! | `t_start`     | `0`                                       |
//! | `t_max`       | `40 / ḡ` with `ḡ = (g_min + g_max)/2`     |
//! | `steps`       | `2000`                                    |
//! | `threshold`   | `1/e`                                     |
//! | `persistence` | `5`                                       |
//! | `samples`     | `1` (no ensemble)                         |
//! | `out`         | `$SPINBATH_OUT_DIR`, else `out`           |
//! | system        | `a = b = 1/√2`                            |
//! | observable    | system block `(0, 0, 1)`, spin-x particles|

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;
use spinbath_core::analysis::{DEFAULT_PERSISTENCE, DEFAULT_THRESHOLD};
use spinbath_core::ensemble::{PhaseMode, SamplingPolicy};
use spinbath_core::{
    Convention, EnvQubit, ObservableSpec, ParticleObservable, SystemObservable, SystemQubit,
    TimeGrid, C64,
};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const OUT_DIR_ENV: &str = "SPINBATH_OUT_DIR";
pub const DEFAULT_N: usize = 10;
pub const DEFAULT_STEPS: usize = 2000;
/// Default `t_max` in units of `1/ḡ`.
pub const DEFAULT_SPAN: f64 = 40.0;
/// Below this many samples per fastest period the grid is reported as coarse.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
pub enum CaseKind {
    #[value(name = "1")]
    #[serde(rename = "1")]
    Case1,
    #[value(name = "2")]
    #[serde(rename = "2")]
    Case2,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Case3,
    #[value(name = "general")]
    #[serde(rename = "general")]
    General,
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Case1 => "1",
            Self::Case2 => "2",
            Self::Case3 => "3",
            Self::General => "general",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseArg {
    Real,
    Random,
}

impl From<PhaseArg> for PhaseMode {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Real => PhaseMode::RealAmplitudes,
            PhaseArg::Random => PhaseMode::RandomPhases,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub case: Option<CaseKind>,
    /// Number of environment particles.
    #[arg(long)]
    pub n: Option<usize>,
    /// Observed particles in case 3.
    #[arg(long)]
    pub p: Option<usize>,
    /// Observed particle in case 2 (1-based).
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub g_min: Option<f64>,
    #[arg(long)]
    pub g_max: Option<f64>,
    #[arg(long, value_enum)]
    pub phase_mode: Option<PhaseArg>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Decoherence threshold on the normalized |value|² metric.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Samples a drop must persist for.
    #[arg(long)]
    pub persistence: Option<usize>,
    /// Ensemble size for case 1; 1 means a single seeded instance.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Use the literal single-particle and diagonal-branch forms.
    #[arg(long)]
    pub strict_paper: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub schema_version: u32,
    pub case: Option<CaseKind>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub j: Option<usize>,
    pub threshold: Option<f64>,
    pub persistence: Option<usize>,
    pub samples: Option<usize>,
    pub strict_paper: Option<bool>,
    pub out: Option<PathBuf>,
    pub system: Option<FileSystem>,
    pub sampling: Option<FileSampling>,
    pub grid: Option<FileGrid>,
    pub observable: Option<FileObservable>,
    pub env: Option<Vec<FileEnv>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSystem {
    pub a: [f64; 2],
    pub b: [f64; 2],
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSampling {
    pub seed: Option<u64>,
    pub g_min: Option<f64>,
    pub g_max: Option<f64>,
    pub phase_mode: Option<PhaseArg>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    pub t_start: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileBlock {
    pub uu: f64,
    pub dd: f64,
    #[serde(default)]
    pub ud: [f64; 2],
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileObservable {
    pub system: Option<FileBlock>,
    pub particles: Option<Vec<FileBlock>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEnv {
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub g: f64,
}

fn c(z: [f64; 2]) -> C64 {
    C64::new(z[0], z[1])
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseKind,
    pub n: usize,
    /// Case 3 only.
    pub p: Option<usize>,
    /// Case 2 only.
    pub j: Option<usize>,
    pub system: SystemQubit,
    pub policy: SamplingPolicy,
    /// Explicit bath; overrides sampling.
    pub env: Option<Vec<EnvQubit>>,
    pub grid: TimeGrid,
    pub threshold: f64,
    pub persistence: usize,
    pub samples: usize,
    pub convention: Convention,
    pub system_block: SystemObservable,
    /// Case 2: one block. Case 3: `p` blocks. General: `N` blocks.
    pub particle_blocks: Vec<ParticleObservable>,
    pub out: PathBuf,
}

impl RunConfig {
    /// The general-case observable.
    pub fn general_spec(&self) -> ObservableSpec {
        ObservableSpec::new(self.system_block, self.particle_blocks.clone())
    }

    /// Whether the grid resolves the fastest coupling.
    pub fn grid_is_coarse(&self) -> bool {
        let g_max = match &self.env {
            Some(env) => env.iter().map(|q| q.g().abs()).fold(0.0, f64::max),
            None => self.policy.g_max,
        };
        if g_max == 0.0 {
            return false;
        }
        let period = std::f64::consts::TAU / g_max;
        period / self.grid.spacing() < MIN_SAMPLES_PER_PERIOD
    }
}

pub fn read_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    parse_file(&text).map_err(|e| match e {
        CliError::ConfigFile { source, .. } => CliError::ConfigFile {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

pub fn parse_file(text: &str) -> CliResult<FileConfig> {
    let file: FileConfig = toml::from_str(text).map_err(|e| CliError::ConfigFile {
        path: PathBuf::from("<inline>"),
        source: Box::new(e),
    })?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::field(
            "schema_version",
            format!("expected {SCHEMA_VERSION}, found {}", file.schema_version),
        ));
    }
    Ok(file)
}

/// Loads the config file named by `args`, if any, and resolves.
pub fn parse_config(args: &RunArgs) -> CliResult<RunConfig> {
    let file = match &args.config {
        Some(p) => read_file(p)?,
        None => FileConfig {
            schema_version: SCHEMA_VERSION,
            ..FileConfig::default()
        },
    };
    resolve(args, &file)
}

fn positive(field: &'static str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::field(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn block(field: &'static str, b: &FileBlock) -> CliResult<ParticleObservable> {
    if !(b.uu.is_finite() && b.dd.is_finite() && b.ud.iter().all(|x| x.is_finite())) {
        return Err(CliError::field(field, "coefficients must be finite"));
    }
    Ok(ParticleObservable::new(b.uu, b.dd, c(b.ud)))
}

/// Merges flags over `file` over the defaults and validates the result.
pub fn resolve(args: &RunArgs, file: &FileConfig) -> CliResult<RunConfig> {
    let sampling = file.sampling.clone().unwrap_or_default();
    let grid_file = file.grid.clone().unwrap_or_default();
    let obs = file.observable.clone().unwrap_or_default();

    let case = args.case.or(file.case).unwrap_or(CaseKind::Case1);

    let system = match &file.system {
        Some(s) => SystemQubit::new(c(s.a), c(s.b))
            .map_err(|e| CliError::field("system", e.to_string()))?,
        None => SystemQubit::plus(),
    };

    let env = match &file.env {
        Some(list) if list.is_empty() => return Err(CliError::field("env", "empty list")),
        Some(list) => Some(
            list.iter()
                .enumerate()
                .map(|(i, e)| {
                    EnvQubit::new(c(e.alpha), c(e.beta), e.g)
                        .map_err(|err| CliError::field("env", format!("entry {}: {err}", i + 1)))
                })
                .collect::<CliResult<Vec<_>>>()?,
        ),
        None => None,
    };

    let n = match (args.n.or(file.n), &env) {
        (Some(n), Some(env)) if n != env.len() => {
            return Err(CliError::field(
                "n",
                format!("{n} disagrees with the {} explicit env entries", env.len()),
            ))
        }
        (_, Some(env)) => env.len(),
        (Some(0), None) => return Err(CliError::field("n", "must be at least 1")),
        (Some(n), None) => n,
        (None, None) => DEFAULT_N,
    };

    let phase_mode = args
        .phase_mode
        .or(sampling.phase_mode)
        .unwrap_or(PhaseArg::Real);
    let policy = SamplingPolicy::new(
        args.seed.or(sampling.seed).unwrap_or(0),
        args.g_min.or(sampling.g_min).unwrap_or(0.0),
        args.g_max.or(sampling.g_max).unwrap_or(1.0),
        phase_mode.into(),
    )
    .map_err(|e| CliError::field("g_min/g_max", e.to_string()))?;

    let t_start = grid_file.t_start.unwrap_or(0.0);
    if !t_start.is_finite() {
        return Err(CliError::field("t_start", "must be finite"));
    }
    let t_max = match args.t_max.or(grid_file.t_max) {
        Some(t) => positive("t_max", t)?,
        None => t_start + DEFAULT_SPAN / policy.g_mean(),
    };
    let steps = args.steps.or(grid_file.steps).unwrap_or(DEFAULT_STEPS);
    if steps < 2 {
        return Err(CliError::field("steps", "must be at least 2"));
    }
    if t_max <= t_start {
        return Err(CliError::field("t_max", "must exceed t_start"));
    }
    let grid = TimeGrid::new(t_start, t_max, steps)
        .map_err(|e| CliError::field("t_max", e.to_string()))?;

    let threshold = args
        .threshold
        .or(file.threshold)
        .unwrap_or(DEFAULT_THRESHOLD);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(CliError::field(
            "threshold",
            format!("must lie in (0, 1), got {threshold}"),
        ));
    }
    let persistence = args
        .persistence
        .or(file.persistence)
        .unwrap_or(DEFAULT_PERSISTENCE);
    let samples = args.samples.or(file.samples).unwrap_or(1);
    if samples == 0 {
        return Err(CliError::field("samples", "must be at least 1"));
    }
    if samples > 1 && case != CaseKind::Case1 {
        return Err(CliError::field(
            "samples",
            "ensembles are only supported for case 1",
        ));
    }

    let convention = if args.strict_paper || file.strict_paper.unwrap_or(false) {
        Convention::StrictPaper
    } else {
        Convention::OracleConsistent
    };

    let system_block = match &obs.system {
        Some(b) => {
            let blk = block("observable.system", b)?;
            SystemObservable::new(blk.e_uu, blk.e_dd, blk.e_ud)
        }
        None => SystemObservable::new(0.0, 0.0, C64::new(1.0, 0.0)),
    };
    let file_blocks = match &obs.particles {
        Some(list) => Some(
            list.iter()
                .map(|b| block("observable.particles", b))
                .collect::<CliResult<Vec<_>>>()?,
        ),
        None => None,
    };

    let mut p = None;
    let mut j = None;
    let particle_blocks = match case {
        CaseKind::Case1 => Vec::new(),
        CaseKind::Case2 => {
            let jj = args.j.or(file.j).unwrap_or(1);
            if jj == 0 || jj > n {
                return Err(CliError::field("j", format!("j = {jj} is outside 1..={n}")));
            }
            j = Some(jj);
            match file_blocks {
                Some(b) if b.len() == 1 => b,
                Some(b) => {
                    return Err(CliError::field(
                        "observable.particles",
                        format!("case 2 takes one block, found {}", b.len()),
                    ))
                }
                None => vec![ParticleObservable::spin_x()],
            }
        }
        CaseKind::Case3 => {
            let pp = args
                .p
                .or(file.p)
                .or(file_blocks.as_ref().map(Vec::len))
                .unwrap_or(n);
            if pp == 0 {
                return Err(CliError::field("p", "must be at least 1"));
            }
            if pp > n {
                return Err(CliError::field("p", format!("p exceeds N ({pp} > {n})")));
            }
            p = Some(pp);
            match file_blocks {
                Some(b) if b.len() == pp => b,
                Some(b) => {
                    return Err(CliError::field(
                        "observable.particles",
                        format!("expected p = {pp} blocks, found {}", b.len()),
                    ))
                }
                None => vec![ParticleObservable::spin_x(); pp],
            }
        }
        CaseKind::General => match file_blocks {
            Some(b) if b.len() == n => b,
            Some(b) => {
                return Err(CliError::field(
                    "observable.particles",
                    format!("expected N = {n} blocks, found {}", b.len()),
                ))
            }
            None => {
                return Err(CliError::field(
                    "observable.particles",
                    "the general case needs one block per particle in the config file",
                ))
            }
        },
    };

    let out = match args.out.clone().or(file.out.clone()) {
        Some(o) => o,
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("out")),
    };

    Ok(RunConfig {
        case,
        n,
        p,
        j,
        system,
        policy,
        env,
        grid,
        threshold,
        persistence,
        samples,
        convention,
        system_block,
        particle_blocks,
        out,
    })
}
