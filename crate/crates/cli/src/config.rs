use std::path::PathBuf;

use majorana_core::stellar::DEFAULT_TOLERANCE;
use majorana_core::Convention;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Fully resolved settings for one run. Every field has a value after
/// resolution so the echoed config is self-contained.
///
/// Precedence: built-in defaults, then `--config FILE`, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    pub input: Option<PathBuf>,
    pub other: Option<PathBuf>,
    pub drive: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub convention: Convention,
    pub tolerance: f64,
    /// Colatitude bands of the field grid; azimuth uses twice as many.
    pub grid: usize,
    pub seed: u64,
    pub steps: usize,
    pub samples: usize,
    pub format: Format,
    pub sequential: bool,
    pub max_l: Option<usize>,
    pub two_s: Option<usize>,
    pub n: Option<usize>,
    pub cyclic: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: String::new(),
            input: None,
            other: None,
            drive: None,
            output: None,
            trajectory: None,
            convention: Convention::default(),
            tolerance: DEFAULT_TOLERANCE,
            grid: 32,
            seed: 0,
            steps: 2000,
            samples: 1,
            format: Format::Json,
            sequential: false,
            max_l: None,
            two_s: None,
            n: None,
            cyclic: None,
        }
    }
}
