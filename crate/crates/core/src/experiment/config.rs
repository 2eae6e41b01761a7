use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::filling::{FillingKind, FillingMap};
use crate::process::{BinaryChain, ProcessSpec};

/// Base seed used when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_240_517;
pub const DEFAULT_P: f64 = 0.7;
pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_MARGIN_TRIALS: usize = 20;
pub const DEFAULT_K_MAX: u32 = 8;
/// Largest moment order whose semicircle reference fits in `u64`.
pub const MAX_K_MAX: u32 = 60;
pub const DEFAULT_INDEX_BUDGET: u64 = 12;
pub const DEFAULT_N_LIST: [usize; 3] = [500, 1000, 2000];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Spectrum,
    Verify,
    FourthMoment,
    ReproduceFig1,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Spectrum => "spectrum",
            Mode::Verify => "verify",
            Mode::FourthMoment => "fourth-moment",
            Mode::ReproduceFig1 => "reproduce-fig1",
        }
    }

    fn default_n(self) -> usize {
        match self {
            Mode::Spectrum => 1000,
            Mode::Verify => 200,
            Mode::FourthMoment => 500,
            Mode::ReproduceFig1 => 2000,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spectrum" => Ok(Mode::Spectrum),
            "verify" => Ok(Mode::Verify),
            "fourth-moment" => Ok(Mode::FourthMoment),
            "reproduce-fig1" => Ok(Mode::ReproduceFig1),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// `diagonal`, `rowwise` or `custom:PATH`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FillingChoice {
    Diagonal,
    RowWise,
    Custom(PathBuf),
}

impl FillingChoice {
    pub fn kind(&self) -> FillingKind {
        match self {
            FillingChoice::Diagonal => FillingKind::Diagonal,
            FillingChoice::RowWise => FillingKind::RowWise,
            FillingChoice::Custom(_) => FillingKind::Custom,
        }
    }

    /// Builds the map at dimension `n`. A custom table fixes its own
    /// dimension, which must agree.
    pub fn build(&self, n: usize) -> Result<FillingMap, Error> {
        Ok(match self {
            FillingChoice::Diagonal => FillingMap::diagonal(n)?,
            FillingChoice::RowWise => FillingMap::row_wise(n)?,
            FillingChoice::Custom(path) => {
                let map = FillingMap::load_custom(path)?;
                if map.n() != n {
                    return Err(Error::Config(format!(
                        "custom filling {} has N = {}, config asks for n = {n}",
                        path.display(),
                        map.n()
                    )));
                }
                map
            }
        })
    }
}

impl FromStr for FillingChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "diagonal" => Ok(FillingChoice::Diagonal),
            "rowwise" => Ok(FillingChoice::RowWise),
            _ => match s.strip_prefix("custom:") {
                Some(path) if !path.is_empty() => Ok(FillingChoice::Custom(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown filling {s:?}; expected diagonal, rowwise or custom:PATH"
                )),
            },
        }
    }
}

impl TryFrom<String> for FillingChoice {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FillingChoice> for String {
    fn from(f: FillingChoice) -> String {
        f.to_string()
    }
}

impl fmt::Display for FillingChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FillingChoice::Diagonal => f.write_str("diagonal"),
            FillingChoice::RowWise => f.write_str("rowwise"),
            FillingChoice::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

/// The JSON config file. Every field is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mode: Option<Mode>,
    pub process: Option<ProcessSpec>,
    pub filling: Option<FillingChoice>,
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    #[serde(alias = "kMax")]
    pub k_max: Option<u32>,
    pub output: Option<PathBuf>,
    #[serde(alias = "nList")]
    pub n_list: Option<Vec<usize>>,
    #[serde(alias = "indexBudget")]
    pub index_budget: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))
    }
}

/// Command-line values; each one wins over the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    /// Replaces the process with a binary chain.
    pub p: Option<f64>,
    pub filling: Option<FillingChoice>,
    pub k_max: Option<u32>,
}

/// A fully resolved experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub process: ProcessSpec,
    pub filling: FillingChoice,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub k_max: u32,
    /// Kept out of the manifest so outputs do not depend on where they land.
    #[serde(skip)]
    pub output: PathBuf,
    pub n_list: Vec<usize>,
    pub index_budget: u64,
}

impl ExperimentConfig {
    pub fn resolve(mode: Mode, file: ConfigFile, cli: Overrides) -> Result<Self, Error> {
        if let Some(m) = file.mode {
            if m != mode {
                return Err(Error::Config(format!(
                    "config file is for mode {m}, command line asks for {mode}"
                )));
            }
        }
        let process = match cli.p {
            Some(p) => ProcessSpec::Binary(
                BinaryChain::new(p).map_err(|e| Error::Config(format!("--p: {e}")))?,
            ),
            None => file
                .process
                .unwrap_or_else(|| ProcessSpec::Binary(BinaryChain::new(DEFAULT_P).unwrap())),
        };
        let default_trials = match mode {
            Mode::FourthMoment => DEFAULT_MARGIN_TRIALS,
            _ => DEFAULT_TRIALS,
        };
        let config = ExperimentConfig {
            mode,
            process,
            filling: cli.filling.or(file.filling).unwrap_or(FillingChoice::Diagonal),
            n: cli.n.or(file.n).unwrap_or(mode.default_n()),
            trials: cli.trials.or(file.trials).unwrap_or(default_trials),
            seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            k_max: cli.k_max.or(file.k_max).unwrap_or(DEFAULT_K_MAX),
            output: cli
                .output
                .or(file.output)
                .unwrap_or_else(|| PathBuf::from(format!("specfill-{mode}"))),
            n_list: file.n_list.unwrap_or_else(|| DEFAULT_N_LIST.to_vec()),
            index_budget: file.index_budget.unwrap_or(DEFAULT_INDEX_BUDGET),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.k_max > MAX_K_MAX {
            return fail(format!("k_max must be <= {MAX_K_MAX}, got {}", self.k_max));
        }
        if self.mode == Mode::FourthMoment {
            if self.trials < 2 {
                return fail("fourth-moment mode needs at least 2 trials".into());
            }
            if self.n_list.is_empty() || self.n_list.contains(&0) {
                return fail("n_list must be non-empty with entries >= 1".into());
            }
            if let FillingChoice::Custom(_) = self.filling {
                return fail("fourth-moment mode runs over several N; custom fillings have one".into());
            }
        }
        if self.mode == Mode::Verify {
            if self.k_max < 2 || self.k_max % 2 != 0 {
                return fail(format!("k_max must be even and >= 2 in verify mode, got {}", self.k_max));
            }
            if self.index_budget < 4 {
                return fail("index_budget must be at least 4".into());
            }
            if self.n > crate::verify::MAX_FIBER_N {
                return fail(format!(
                    "verify mode scans fibers exhaustively; n must be <= {}",
                    crate::verify::MAX_FIBER_N
                ));
            }
            if let ProcessSpec::Gaussian(_) = self.process {
                return fail("verify mode needs a finite-state process".into());
            }
        }
        Ok(())
    }
}
