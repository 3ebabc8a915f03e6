use clap::{Args, ValueEnum};

use qlab_core::context::{Mode, QContext};
use qlab_core::error::QError;
use qlab_core::grammar::parse_real;

pub const TOL_ENV: &str = "Q_LAB_TOL";
pub const DEFAULT_TOL: f64 = 1e-9;

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DIVERGENCE: u8 = 3;
pub const EXIT_CATALOG_MISS: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalarMode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformMode {
    Numeric,
    Catalog,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Output {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Deformation parameter, `1/2` or `0.5`.
    #[arg(long, default_value = "1/2")]
    pub q: String,
    /// Comparison tolerance; falls back to `Q_LAB_TOL`, then 1e-9.
    #[arg(long)]
    pub tol: Option<String>,
    /// Lattice index window `kmin,kmax` for numeric sums.
    #[arg(long, allow_hyphen_values = true)]
    pub k_window: Option<String>,
    #[arg(long, value_enum, default_value = "json")]
    pub output: Output,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Recorded for reproducibility; every built-in suite is a fixed grid.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        let code = match &e {
            QError::Divergence { .. } | QError::Convergence { .. } | QError::Limit(_) => EXIT_DIVERGENCE,
            QError::CatalogMiss(_) | QError::NoMatch(_) | QError::UnsupportedMultiplicity(_) => EXIT_CATALOG_MISS,
            QError::Residual { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::usage(format!("cannot write report: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl Common {
    pub fn context(&self, mode: ScalarMode) -> CliResult<QContext> {
        let mode = match mode {
            ScalarMode::Exact => Mode::Exact,
            ScalarMode::Float => Mode::Float,
        };
        Ok(QContext::parse(&self.q, mode)?)
    }

    pub fn tol(&self) -> CliResult<f64> {
        let text = match &self.tol {
            Some(t) => t.clone(),
            None => match std::env::var(TOL_ENV) {
                Ok(t) => t,
                Err(_) => return Ok(DEFAULT_TOL),
            },
        };
        let tol = parse_real(&text)?;
        if tol <= 0.0 {
            return Err(CliError::usage(format!("tolerance must be positive, got {text}")));
        }
        Ok(tol)
    }

    pub fn k_window(&self) -> CliResult<Option<(i64, i64)>> {
        let Some(text) = &self.k_window else {
            return Ok(None);
        };
        let bad = || CliError::usage(format!("k-window must be `kmin,kmax`, got `{text}`"));
        let (a, b) = text.split_once(',').ok_or_else(bad)?;
        let (a, b) = (a.trim().parse::<i64>().map_err(|_| bad())?, b.trim().parse::<i64>().map_err(|_| bad())?);
        if a >= b {
            return Err(bad());
        }
        Ok(Some((a, b)))
    }
}
