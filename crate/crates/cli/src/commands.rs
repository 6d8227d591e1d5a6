//! The three subcommands. Each returns the process exit code.

use std::fmt::Write as _;

use gentile_core::basis::Subspace;
use gentile_core::heisenberg::{spectrum_report, CasimirRoute, SpectrumReport, HAMILTONIAN_CONSTANT};
use gentile_core::reptheory::{casimir_sp, casimir_value, partitions_of, weyl_dimension, CasimirVariant, Partition};
use gentile_core::verify::{run_grid, GridReport, GridSpec, IdentitySummary, Mode, Tolerances, Verdict};
use gentile_core::GentileOrder;
use serde::Serialize;

use crate::args::{self, Format, FormName, ModeArg, PartitionsArgs, SpectrumArgs, VerifyArgs};
use crate::error::{CliError, EXIT_CONFIG, EXIT_GUARANTEED_FAILURE, EXIT_OK};
use crate::report::{csv_bytes, encode, num, opt_num, Envelope, Target};

/// Largest number of tasks a single invocation may expand to.
pub const MAX_TASKS: usize = 10_000;

/// Prints to stdout, or to stderr when stdout carries the report.
fn summary_out(target: &Target, text: &str) {
    if target.is_stdout() {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyConfig {
    pub command: &'static str,
    #[serde(flatten)]
    pub grid: GridSpec,
    pub format: Format,
    #[serde(skip)]
    pub timestamp: bool,
}

pub fn verify_grid(a: &VerifyArgs) -> Result<GridSpec, CliError> {
    let mode = match a.mode {
        ModeArg::Dense => Mode::Dense,
        ModeArg::Sampled => Mode::Sampled {
            samples: a.samples,
            seed: a.seed,
        },
    };
    if !(a.tol > 0.0 && a.tight_tol > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }
    let spec = GridSpec {
        n: args::parse_u32_list("n", &a.n)?,
        nu: args::parse_usize_list("nu", &a.nu)?,
        m: args::parse_usize_list("m", &a.m)?,
        subspaces: args::parse_subspaces(&a.subspace)?,
        interpretations: args::parse_interpretations(&a.interpretation)?,
        identities: args::parse_identities(a.identity.as_deref())?,
        mode,
        tolerances: Tolerances {
            default: a.tol,
            tight: a.tight_tol,
        },
        dense_cap: a.cap,
    };
    spec.validate()?;
    let tasks = spec.task_count();
    if tasks > MAX_TASKS {
        return Err(CliError::Config(format!("grid expands to {tasks} tasks, limit is {MAX_TASKS}")));
    }
    Ok(spec)
}

#[derive(Debug, Serialize)]
struct VerifyBody<'a> {
    summary: &'a [IdentitySummary],
    verdicts: &'a [Verdict],
}

pub const VERIFY_CSV_HEADER: [&str; 16] = [
    "identity",
    "n",
    "nu",
    "m",
    "subspace",
    "interpretation",
    "mode",
    "samples",
    "seed",
    "residual",
    "tolerance",
    "guaranteed",
    "status",
    "sizing_error",
    "auxiliary",
    "diagnostic",
];

fn verdict_row(v: &Verdict) -> Vec<String> {
    let t = &v.task;
    let (mode, samples, seed) = match t.mode {
        Mode::Dense => ("dense", String::new(), String::new()),
        Mode::Sampled { samples, seed } => ("sampled", samples.to_string(), seed.to_string()),
    };
    let aux = v
        .auxiliary
        .iter()
        .map(|a| format!("{}={}:{}", a.label, num(a.residual), a.status.as_str()))
        .collect::<Vec<_>>()
        .join(";");
    vec![
        t.identity.to_string(),
        t.n.to_string(),
        t.nu.to_string(),
        t.m.to_string(),
        t.subspace.to_string(),
        t.interpretation.to_string(),
        mode.to_string(),
        samples,
        seed,
        opt_num(v.residual),
        num(v.tolerance),
        v.guaranteed.to_string(),
        v.status.as_str().to_string(),
        v.sizing_error.to_string(),
        aux,
        v.diagnostic.clone().unwrap_or_default(),
    ]
}

fn verify_summary(report: &GridReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<26} {:>5} {:>5} {:>12} {:>13}",
        "identity", "pass", "fail", "report_only", "max_residual"
    );
    for row in &report.summary {
        let max = report
            .verdicts
            .iter()
            .filter(|v| v.task.identity == row.identity)
            .filter_map(|v| v.residual)
            .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |a| a.max(r))));
        let max = max.map_or("-".to_string(), |r| format!("{r:.3e}"));
        let _ = writeln!(
            s,
            "{:<26} {:>5} {:>5} {:>12} {:>13}",
            row.identity.as_str(),
            row.pass,
            row.fail,
            row.report_only,
            max
        );
    }
    let _ = writeln!(
        s,
        "{} verdicts, {} guaranteed failure(s), {} sizing/config error(s)",
        report.verdicts.len(),
        report.guaranteed_failures(),
        report.sizing_errors()
    );
    s
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<u8, CliError> {
    let grid = verify_grid(a)?;
    let report = run_grid(&grid)?;
    let config = VerifyConfig {
        command: "verify",
        grid,
        format: a.output.format,
        timestamp: !a.output.no_timestamp,
    };
    let body = VerifyBody {
        summary: &report.summary,
        verdicts: &report.verdicts,
    };
    let envelope = Envelope::new(&config, body, config.timestamp);
    let bytes = encode(a.output.format, &envelope, || {
        csv_bytes(&VERIFY_CSV_HEADER, report.verdicts.iter().map(verdict_row))
    })?;
    let target = Target::resolve(&a.output, "verify");
    target.write(&bytes)?;
    summary_out(&target, &verify_summary(&report));

    if report.sizing_errors() > 0 {
        for v in report.verdicts.iter().filter(|v| v.sizing_error).take(5) {
            eprintln!(
                "error: {} at n={} nu={} m={} {}: {}",
                v.task.identity,
                v.task.n,
                v.task.nu,
                v.task.m,
                v.task.subspace,
                v.diagnostic.as_deref().unwrap_or("")
            );
        }
        return Ok(EXIT_CONFIG);
    }
    if report.guaranteed_failures() > 0 {
        return Ok(EXIT_GUARANTEED_FAILURE);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct SpectrumConfig {
    pub command: &'static str,
    pub nu: Vec<usize>,
    pub m: Vec<usize>,
    pub n: Vec<u32>,
    pub compare: bool,
    pub variants: Vec<CasimirVariant>,
    pub forms: Vec<&'static str>,
    pub sector: Subspace,
    pub hamiltonian_constant: f64,
    pub degeneracy_tol: f64,
    pub match_tol: f64,
    pub format: Format,
    #[serde(skip)]
    pub timestamp: bool,
}

#[derive(Debug, Serialize)]
struct SpectrumBody<'a> {
    spectra: &'a [SpectrumReport],
}

pub const SPECTRUM_CSV_HEADER: [&str; 8] = ["nu", "m", "n", "source", "eigenvalue", "multiplicity", "partition", "singular"];

/// ED rows carry observed multiplicities; Casimir rows carry the Weyl
/// dimension of their partition in the multiplicity column.
fn spectrum_rows(r: &SpectrumReport) -> Vec<Vec<String>> {
    let head = |source: String| vec![r.nu.to_string(), r.m.to_string(), r.n.to_string(), source];
    let mut rows = Vec::new();
    for l in &r.ed_spectrum {
        let mut row = head("ed".into());
        row.extend([num(l.value), l.multiplicity.to_string(), String::new(), "false".into()]);
        rows.push(row);
    }
    for c in &r.casimir {
        for l in &c.levels {
            let mut row = head(format!("casimir:{}", c.label));
            row.extend([
                opt_num(l.eigenvalue),
                l.weyl_dimension.to_string(),
                l.partition.to_string(),
                c.singular.to_string(),
            ]);
            rows.push(row);
        }
    }
    rows
}

fn spectrum_summary(reports: &[SpectrumReport], compare: bool) -> String {
    let mut s = String::new();
    for r in reports {
        let levels = r
            .ed_spectrum
            .iter()
            .map(|l| format!("{:.6} x{}", l.value, l.multiplicity))
            .collect::<Vec<_>>()
            .join(", ");
        let _ = writeln!(s, "nu={} m={} n={} dim={}  ED: {levels}", r.nu, r.m, r.n, r.sector_dimension);
        for c in r.casimir.iter().filter(|c| c.singular) {
            let _ = writeln!(s, "  {:<24} singular prefactor", c.label);
        }
        if compare {
            for mm in r.matches.iter().filter(|m| !m.singular) {
                let factors = mm
                    .multiplicity_factors
                    .iter()
                    .map(|(p, f)| format!("{p}:{}", f.map_or("-".into(), |f| format!("{f}"))))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(
                    s,
                    "  {:<24} match={:<5} sign={:+} deviation={:.3e} factors {factors}",
                    mm.label,
                    mm.eigenvalues_match,
                    mm.observed_sign.unwrap_or(1),
                    mm.max_deviation.unwrap_or(f64::NAN).min(mm.max_deviation_flipped.unwrap_or(f64::NAN)),
                );
            }
        }
    }
    s
}

pub fn cmd_spectrum(a: &SpectrumArgs) -> Result<u8, CliError> {
    let nus = args::parse_usize_list("nu", &a.nu)?;
    let ms = args::parse_usize_list("m", &a.m)?;
    let ns = args::parse_u32_list("n", &a.n)?;
    let variants = args::parse_variants(&a.variant)?;
    let forms = args::parse_forms(&a.form)?;
    if nus.len() * ms.len() * ns.len() > MAX_TASKS {
        return Err(CliError::Config(format!("spectrum grid exceeds {MAX_TASKS} runs")));
    }
    if !(a.degeneracy_tol > 0.0 && a.match_tol > 0.0) {
        return Err(CliError::Config("tolerances must be positive".into()));
    }

    let mut reports = Vec::new();
    for &nu in &nus {
        for &m in &ms {
            for &n in &ns {
                let order = GentileOrder::new(n)?;
                let routes: Vec<CasimirRoute> = forms
                    .iter()
                    .flat_map(|f| variants.iter().map(move |&v| CasimirRoute::new(f.at(n), v)))
                    .collect();
                let mut r = spectrum_report(nu, m, order, &routes, a.degeneracy_tol, a.match_tol)?;
                if !a.compare {
                    r.matches.clear();
                }
                reports.push(r);
            }
        }
    }

    let config = SpectrumConfig {
        command: "spectrum",
        nu: nus,
        m: ms,
        n: ns,
        compare: a.compare,
        variants,
        forms: forms
            .iter()
            .map(|f| match f {
                FormName::Bose => "bose",
                FormName::Fermi => "fermi",
                FormName::General => "general",
            })
            .collect(),
        sector: Subspace::SPIN,
        hamiltonian_constant: HAMILTONIAN_CONSTANT,
        degeneracy_tol: a.degeneracy_tol,
        match_tol: a.match_tol,
        format: a.output.format,
        timestamp: !a.output.no_timestamp,
    };
    let envelope = Envelope::new(&config, SpectrumBody { spectra: &reports }, config.timestamp);
    let bytes = encode(a.output.format, &envelope, || {
        csv_bytes(&SPECTRUM_CSV_HEADER, reports.iter().flat_map(spectrum_rows))
    })?;
    let target = Target::resolve(&a.output, "spectrum");
    target.write(&bytes)?;
    summary_out(&target, &spectrum_summary(&reports, a.compare));
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct PartitionsConfig {
    pub command: &'static str,
    #[serde(rename = "N")]
    pub total: u32,
    pub m: usize,
    pub format: Format,
    #[serde(skip)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub partition: Partition,
    pub s1: i128,
    pub s2: i128,
    pub c1_raw: i128,
    pub c2_raw: i128,
    pub c1_shifted: i128,
    pub c2_shifted: i128,
    pub weyl_dim: u128,
}

pub fn partition_table(total: u32, m: usize) -> Result<Vec<PartitionRow>, CliError> {
    if m == 0 {
        return Err(CliError::Config("--m must be at least 1".into()));
    }
    partitions_of(total, m)
        .into_iter()
        .map(|p| {
            Ok(PartitionRow {
                s1: casimir_sp(1, &p, m)?,
                s2: casimir_sp(2, &p, m)?,
                c1_raw: casimir_value(1, &p, m, CasimirVariant::Raw)?,
                c2_raw: casimir_value(2, &p, m, CasimirVariant::Raw)?,
                c1_shifted: casimir_value(1, &p, m, CasimirVariant::Shifted)?,
                c2_shifted: casimir_value(2, &p, m, CasimirVariant::Shifted)?,
                weyl_dim: weyl_dimension(&p, m)?,
                partition: p,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct PartitionsBody<'a> {
    partitions: &'a [PartitionRow],
}

pub const PARTITIONS_CSV_HEADER: [&str; 10] = [
    "N",
    "m",
    "partition",
    "s1",
    "s2",
    "c1_raw",
    "c2_raw",
    "c1_shifted",
    "c2_shifted",
    "weyl_dim",
];

pub fn cmd_partitions(a: &PartitionsArgs) -> Result<u8, CliError> {
    let m = a.m.unwrap_or(a.total.max(1) as usize);
    let rows = partition_table(a.total, m)?;
    let config = PartitionsConfig {
        command: "partitions",
        total: a.total,
        m,
        format: a.output.format,
        timestamp: !a.output.no_timestamp,
    };
    let envelope = Envelope::new(&config, PartitionsBody { partitions: &rows }, config.timestamp);
    let bytes = encode(a.output.format, &envelope, || {
        csv_bytes(
            &PARTITIONS_CSV_HEADER,
            rows.iter().map(|r| {
                vec![
                    a.total.to_string(),
                    m.to_string(),
                    r.partition.to_string(),
                    r.s1.to_string(),
                    r.s2.to_string(),
                    r.c1_raw.to_string(),
                    r.c2_raw.to_string(),
                    r.c1_shifted.to_string(),
                    r.c2_shifted.to_string(),
                    r.weyl_dim.to_string(),
                ]
            }),
        )
    })?;
    let target = Target::resolve(&a.output, "partitions");
    target.write(&bytes)?;

    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:>6} {:>8} {:>10} {:>10}", "partition", "S1", "S2", "C2 shifted", "weyl dim");
    for r in &rows {
        let _ = writeln!(
            s,
            "{:<20} {:>6} {:>8} {:>10} {:>10}",
            r.partition.to_string(),
            r.s1,
            r.s2,
            r.c2_shifted,
            r.weyl_dim
        );
    }
    let _ = writeln!(s, "{} partition(s) of {} into at most {} parts", rows.len(), a.total, m);
    summary_out(&target, &s);
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_table_examples() {
        let rows = partition_table(2, 2).unwrap();
        let got: Vec<_> = rows.iter().map(|r| (r.partition.to_string(), r.s2, r.c2_shifted, r.weyl_dim)).collect();
        assert_eq!(got, vec![("(2,0)".to_string(), 8, 6, 3), ("(1,1)".to_string(), 4, 2, 1)]);
        assert_eq!(partition_table(4, 4).unwrap().len(), 5);
        let zero = partition_table(0, 3).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero[0].weyl_dim, 1);
        assert!(partition_table(3, 0).is_err());
    }
}
