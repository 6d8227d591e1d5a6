//! Command-line surface and the parsing of list/range values.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gentile_core::basis::Subspace;
use gentile_core::heisenberg::{CasimirForm, MATCH_TOL};
use gentile_core::reptheory::CasimirVariant;
use gentile_core::verify::{IdentityId, Interpretation, DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_TOLERANCE, TIGHT_TOLERANCE};
use gentile_core::engine::eigen::{DEGENERACY_TOL, DENSE_CAP};
use gentile_core::BOSE_PROXY_N;
use serde::Serialize;

use crate::error::CliError;

/// Longest axis a single range may expand to.
const MAX_AXIS: usize = 10_000;

#[derive(Debug, Parser)]
#[command(name = "gentile", version, about = "Gentile-statistics operator identities, exchange spectra and partition tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate operator identities over a parameter grid.
    Verify(VerifyArgs),
    /// Exchange-model spectra by exact diagonalization and Casimir values.
    Spectrum(SpectrumArgs),
    /// Partitions with their Casimir values and Weyl dimensions.
    Partitions(PartitionsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report path; `-` writes to stdout. Defaults to
    /// `$GENTILE_REPORT_DIR/gentile-<command>.<ext>`, else the working directory.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Leave the generation time out of JSON reports.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Dense,
    Sampled,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Maximum occupations: `1..3`, `1,2,5`, or `bose` for the large-n proxy.
    #[arg(long, default_value = "1..3")]
    pub n: String,
    #[arg(long, default_value = "2..3")]
    pub nu: String,
    #[arg(long, default_value = "2")]
    pub m: String,
    /// Comma list of `full` and `sector:<t>`.
    #[arg(long, default_value = "full,sector:1")]
    pub subspace: String,
    /// Readings of `Re[·]`: `entrywise_real`, `hermitian_part`, or `both`.
    #[arg(long, default_value = "both")]
    pub interpretation: String,
    /// Comma list of identity names; all by default.
    #[arg(long)]
    pub identity: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Dense)]
    pub mode: ModeArg,
    /// Sample vectors in sampled mode (at least 32).
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Tolerance of the identities checked at round-off level.
    #[arg(long, default_value_t = TIGHT_TOLERANCE)]
    pub tight_tol: f64,
    /// Largest basis evaluated in dense mode.
    #[arg(long, default_value_t = DENSE_CAP)]
    pub cap: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value = "2")]
    pub nu: String,
    #[arg(long, default_value = "2")]
    pub m: String,
    #[arg(long, default_value = "1")]
    pub n: String,
    /// Compare every Casimir route against the ED spectrum.
    #[arg(long)]
    pub compare: bool,
    /// Casimir eigenvalue variants: `raw`, `shifted`, or `both`.
    #[arg(long, default_value = "both")]
    pub variant: String,
    /// Closed forms: comma list of `bose`, `fermi`, `general`.
    #[arg(long, default_value = "bose,fermi,general")]
    pub form: String,
    #[arg(long, default_value_t = DEGENERACY_TOL)]
    pub degeneracy_tol: f64,
    #[arg(long, default_value_t = MATCH_TOL)]
    pub match_tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PartitionsArgs {
    /// Number of boxes.
    #[arg(long = "N", id = "total")]
    pub total: u32,
    /// Maximum number of parts; defaults to N.
    #[arg(long)]
    pub m: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn split(list: &str) -> impl Iterator<Item = &str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn push_unique<T: PartialEq>(out: &mut Vec<T>, v: T) {
    if !out.contains(&v) {
        out.push(v);
    }
}

/// Parses `1..3`, `1,2,5` or a mix into distinct values in input order;
/// ranges are inclusive. `bose` stands for the large-n proxy.
pub fn parse_u32_list(flag: &str, text: &str) -> Result<Vec<u32>, CliError> {
    let bad = |detail: String| CliError::Config(format!("--{flag}: {detail}"));
    let mut out = Vec::new();
    for item in split(text) {
        if item.eq_ignore_ascii_case("bose") {
            push_unique(&mut out, BOSE_PROXY_N);
        } else if let Some((lo, hi)) = item.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u32 = lo.trim().parse().map_err(|_| bad(format!("bad range start in {item:?}")))?;
            let hi: u32 = hi.trim().parse().map_err(|_| bad(format!("bad range end in {item:?}")))?;
            if lo > hi {
                return Err(bad(format!("empty range {item:?}")));
            }
            if (hi - lo) as usize >= MAX_AXIS {
                return Err(bad(format!("range {item:?} is longer than {MAX_AXIS}")));
            }
            for v in lo..=hi {
                push_unique(&mut out, v);
            }
        } else {
            let v = item.parse().map_err(|_| bad(format!("not an integer: {item:?}")))?;
            push_unique(&mut out, v);
        }
    }
    if out.is_empty() {
        return Err(bad("no values".into()));
    }
    Ok(out)
}

pub fn parse_usize_list(flag: &str, text: &str) -> Result<Vec<usize>, CliError> {
    Ok(parse_u32_list(flag, text)?.into_iter().map(|v| v as usize).collect())
}

pub fn parse_subspaces(text: &str) -> Result<Vec<Subspace>, CliError> {
    let mut out = Vec::new();
    for item in split(text) {
        let s: Subspace = item.parse().map_err(|e| CliError::Config(format!("--subspace: {e}")))?;
        push_unique(&mut out, s);
    }
    if out.is_empty() {
        return Err(CliError::Config("--subspace: no values".into()));
    }
    Ok(out)
}

pub fn parse_interpretations(text: &str) -> Result<Vec<Interpretation>, CliError> {
    let mut out = Vec::new();
    for item in split(text) {
        if item == "both" {
            for i in Interpretation::BOTH {
                push_unique(&mut out, i);
            }
            continue;
        }
        let i: Interpretation = item.parse().map_err(|e| CliError::Config(format!("--interpretation: {e}")))?;
        if i == Interpretation::NotApplicable {
            return Err(CliError::Config("--interpretation: not_applicable is not a reading of Re".into()));
        }
        push_unique(&mut out, i);
    }
    if out.is_empty() {
        return Err(CliError::Config("--interpretation: no values".into()));
    }
    Ok(out)
}

pub fn parse_identities(text: Option<&str>) -> Result<Vec<IdentityId>, CliError> {
    let Some(text) = text else {
        return Ok(IdentityId::ALL.to_vec());
    };
    let mut out = Vec::new();
    for item in split(text) {
        let id: IdentityId = item.parse().map_err(|e| CliError::Config(format!("--identity: {e}")))?;
        push_unique(&mut out, id);
    }
    if out.is_empty() {
        return Err(CliError::Config("--identity: no values".into()));
    }
    Ok(out)
}

pub fn parse_variants(text: &str) -> Result<Vec<CasimirVariant>, CliError> {
    let mut out = Vec::new();
    for item in split(text) {
        match item {
            "both" => CasimirVariant::ALL.into_iter().for_each(|v| push_unique(&mut out, v)),
            "raw" => push_unique(&mut out, CasimirVariant::Raw),
            "shifted" => push_unique(&mut out, CasimirVariant::Shifted),
            other => return Err(CliError::Config(format!("--variant: unknown variant {other:?}"))),
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("--variant: no values".into()));
    }
    Ok(out)
}

/// Limit-form names; `general` is instantiated per `n` later.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormName {
    Bose,
    Fermi,
    General,
}

impl FormName {
    pub fn at(self, n: u32) -> CasimirForm {
        match self {
            FormName::Bose => CasimirForm::Bose,
            FormName::Fermi => CasimirForm::Fermi,
            FormName::General => CasimirForm::General { n },
        }
    }
}

pub fn parse_forms(text: &str) -> Result<Vec<FormName>, CliError> {
    let mut out = Vec::new();
    for item in split(text) {
        let f = match item {
            "bose" => FormName::Bose,
            "fermi" => FormName::Fermi,
            "general" => FormName::General,
            other => return Err(CliError::Config(format!("--form: unknown form {other:?}"))),
        };
        push_unique(&mut out, f);
    }
    if out.is_empty() {
        return Err(CliError::Config("--form: no values".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_u32_list("n", "1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_u32_list("n", "1..=2,5, 2").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_u32_list("n", "bose,1").unwrap(), vec![BOSE_PROXY_N, 1]);
        assert!(parse_u32_list("n", "3..1").is_err());
        assert!(parse_u32_list("n", "x").is_err());
        assert!(parse_u32_list("n", "").is_err());
        assert!(parse_u32_list("n", "0..20000").is_err());
    }

    #[test]
    fn named_lists() {
        assert_eq!(
            parse_subspaces("full, sector:1").unwrap(),
            vec![Subspace::Full, Subspace::Sector(1)]
        );
        assert!(parse_subspaces("sector").is_err());
        assert_eq!(parse_interpretations("both").unwrap(), Interpretation::BOTH.to_vec());
        assert!(parse_interpretations("not_applicable").is_err());
        assert_eq!(parse_identities(Some("theorem_eq3")).unwrap(), vec![IdentityId::TheoremEq3]);
        assert_eq!(parse_identities(None).unwrap().len(), 14);
        assert_eq!(parse_variants("shifted,raw").unwrap(), vec![CasimirVariant::Shifted, CasimirVariant::Raw]);
        assert!(parse_forms("bose,weird").is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
