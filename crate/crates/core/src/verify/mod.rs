//! Registry of operator identities evaluated as numeric residuals over a
//! parameter grid.
//!
//! Every identity is either guaranteed (its verdict passes or fails against a
//! tolerance) or contested (its residual is recorded as `report_only` and
//! never counts as a failure). Auxiliary checks attached to a verdict carry
//! their own status and the same distinction.

mod expr;
mod recipes;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{FockBasis, Subspace, DEFAULT_BASIS_CAP};
use crate::engine::eigen::DENSE_CAP;
use crate::error::{GentileError, Result};
use crate::scalars::GentileOrder;

pub use expr::{sample_vectors, stable_hash, Evaluator, Expr, Mode, DEFAULT_SAMPLES, DEFAULT_SEED, MIN_SAMPLES};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const TIGHT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IdentityId {
    #[serde(rename = "NBRACKET_EQ6")]
    NbracketEq6,
    #[serde(rename = "PHASE_EQ7")]
    PhaseEq7,
    #[serde(rename = "PHASE_EQ8")]
    PhaseEq8,
    #[serde(rename = "FG_CONSISTENCY_EQ13_14")]
    FgConsistencyEq13_14,
    #[serde(rename = "COMMUTATOR_EQ12")]
    CommutatorEq12,
    #[serde(rename = "BRACKET_FN_EQ19_NBRACKET")]
    BracketFnEq19Nbracket,
    #[serde(rename = "BRACKET_FN_EQ19_PLAIN")]
    BracketFnEq19Plain,
    #[serde(rename = "QUARTIC_EQ22")]
    QuarticEq22,
    #[serde(rename = "DUALITY_TAU_E")]
    DualityTauE,
    #[serde(rename = "THEOREM_EQ3")]
    TheoremEq3,
    #[serde(rename = "LIMIT_EQ5")]
    LimitEq5,
    #[serde(rename = "HERMITICITY_CASIMIR")]
    HermiticityCasimir,
    #[serde(rename = "SECTOR_CONSERVATION")]
    SectorConservation,
    #[serde(rename = "CASIMIR_SPECTRUM_MATCH")]
    CasimirSpectrumMatch,
}

impl IdentityId {
    pub const ALL: [IdentityId; 14] = [
        IdentityId::NbracketEq6,
        IdentityId::PhaseEq7,
        IdentityId::PhaseEq8,
        IdentityId::FgConsistencyEq13_14,
        IdentityId::CommutatorEq12,
        IdentityId::BracketFnEq19Nbracket,
        IdentityId::BracketFnEq19Plain,
        IdentityId::QuarticEq22,
        IdentityId::DualityTauE,
        IdentityId::TheoremEq3,
        IdentityId::LimitEq5,
        IdentityId::HermiticityCasimir,
        IdentityId::SectorConservation,
        IdentityId::CasimirSpectrumMatch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            IdentityId::NbracketEq6 => "NBRACKET_EQ6",
            IdentityId::PhaseEq7 => "PHASE_EQ7",
            IdentityId::PhaseEq8 => "PHASE_EQ8",
            IdentityId::FgConsistencyEq13_14 => "FG_CONSISTENCY_EQ13_14",
            IdentityId::CommutatorEq12 => "COMMUTATOR_EQ12",
            IdentityId::BracketFnEq19Nbracket => "BRACKET_FN_EQ19_NBRACKET",
            IdentityId::BracketFnEq19Plain => "BRACKET_FN_EQ19_PLAIN",
            IdentityId::QuarticEq22 => "QUARTIC_EQ22",
            IdentityId::DualityTauE => "DUALITY_TAU_E",
            IdentityId::TheoremEq3 => "THEOREM_EQ3",
            IdentityId::LimitEq5 => "LIMIT_EQ5",
            IdentityId::HermiticityCasimir => "HERMITICITY_CASIMIR",
            IdentityId::SectorConservation => "SECTOR_CONSERVATION",
            IdentityId::CasimirSpectrumMatch => "CASIMIR_SPECTRUM_MATCH",
        }
    }

    /// Guaranteed identities are asserted; the rest only report residuals.
    ///
    /// The printed phase of the creation-operator relation contradicts the
    /// adjoint of the annihilation-operator relation for `n ≥ 2`, so
    /// `PHASE_EQ8` is contested; its adjoint-consistent form is a guaranteed
    /// auxiliary check.
    pub fn is_guaranteed(self) -> bool {
        matches!(
            self,
            IdentityId::NbracketEq6
                | IdentityId::PhaseEq7
                | IdentityId::FgConsistencyEq13_14
                | IdentityId::BracketFnEq19Plain
                | IdentityId::HermiticityCasimir
                | IdentityId::SectorConservation
        )
    }

    /// Identities evaluated on the `(n+1)`-dimensional single-mode ladder;
    /// they ignore `ν`, `m` and the subspace of the grid point.
    pub fn is_single_mode(self) -> bool {
        matches!(
            self,
            IdentityId::NbracketEq6
                | IdentityId::PhaseEq7
                | IdentityId::PhaseEq8
                | IdentityId::FgConsistencyEq13_14
                | IdentityId::BracketFnEq19Nbracket
                | IdentityId::BracketFnEq19Plain
                | IdentityId::QuarticEq22
        )
    }

    pub fn tolerance(self, spec: &Tolerances) -> f64 {
        match self {
            IdentityId::FgConsistencyEq13_14 | IdentityId::BracketFnEq19Plain => spec.tight,
            _ => spec.default,
        }
    }

    /// Whether the identity takes a real-part interpretation.
    pub fn uses_interpretation(self) -> bool {
        self == IdentityId::TheoremEq3
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdentityId {
    type Err = GentileError;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GentileError::InvalidParameter(format!("unknown identity {s:?}")))
    }
}

/// Reading of `Re[·]` applied to an operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// Real part of every matrix entry in the occupation basis.
    EntrywiseReal,
    /// `(A + A†)/2`.
    HermitianPart,
    NotApplicable,
}

impl Interpretation {
    pub const BOTH: [Interpretation; 2] = [Interpretation::EntrywiseReal, Interpretation::HermitianPart];

    pub fn as_str(self) -> &'static str {
        match self {
            Interpretation::EntrywiseReal => "entrywise_real",
            Interpretation::HermitianPart => "hermitian_part",
            Interpretation::NotApplicable => "not_applicable",
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Interpretation {
    type Err = GentileError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "entrywise_real" | "entrywise" => Ok(Interpretation::EntrywiseReal),
            "hermitian_part" | "hermitian" => Ok(Interpretation::HermitianPart),
            "not_applicable" => Ok(Interpretation::NotApplicable),
            other => Err(GentileError::InvalidParameter(format!("unknown interpretation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub default: f64,
    pub tight: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            default: DEFAULT_TOLERANCE,
            tight: TIGHT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerificationTask {
    pub identity: IdentityId,
    pub n: u32,
    pub nu: usize,
    pub m: usize,
    pub subspace: Subspace,
    pub interpretation: Interpretation,
    pub mode: Mode,
}

impl VerificationTask {
    /// Sort key; also feeds the per-task sampling seed.
    pub fn key(&self) -> String {
        format!(
            "{}|n={}|nu={}|m={}|{}|{}",
            self.identity, self.n, self.nu, self.m, self.subspace, self.interpretation
        )
    }

    fn sort_key(&self) -> (u32, usize, usize, Subspace, IdentityId, Interpretation) {
        (self.n, self.nu, self.m, self.subspace, self.identity, self.interpretation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
}

impl Status {
    fn judge(guaranteed: bool, residual: f64, tolerance: f64) -> Status {
        if !guaranteed {
            Status::ReportOnly
        } else if residual < tolerance {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::ReportOnly => "report_only",
        }
    }
}

/// A secondary residual attached to a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxCheck {
    pub label: String,
    pub residual: f64,
    pub tolerance: f64,
    pub guaranteed: bool,
    pub status: Status,
}

impl AuxCheck {
    pub fn new(label: impl Into<String>, residual: f64, tolerance: f64, guaranteed: bool) -> Self {
        Self {
            label: label.into(),
            residual,
            tolerance,
            guaranteed,
            status: Status::judge(guaranteed, residual, tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub task: VerificationTask,
    /// `None` when the task could not be evaluated.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub guaranteed: bool,
    pub status: Status,
    pub auxiliary: Vec<AuxCheck>,
    pub diagnostic: Option<String>,
    /// The task failed on a sizing or configuration error.
    pub sizing_error: bool,
}

impl Verdict {
    /// False when this verdict or one of its guaranteed auxiliary checks
    /// failed on a guaranteed identity.
    pub fn guaranteed_ok(&self) -> bool {
        let own = !(self.guaranteed && self.status == Status::Fail);
        own && self.auxiliary.iter().all(|a| !(a.guaranteed && a.status == Status::Fail))
    }

    fn from_error(task: VerificationTask, tolerance: f64, err: &GentileError) -> Self {
        let sizing_error = err.is_sizing() || err.is_config();
        Verdict {
            task,
            residual: None,
            tolerance,
            guaranteed: task.identity.is_guaranteed(),
            status: Status::Fail,
            auxiliary: Vec::new(),
            diagnostic: Some(err.to_string()),
            sizing_error,
        }
    }
}

/// A finite product of parameter values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: Vec<u32>,
    pub nu: Vec<usize>,
    pub m: Vec<usize>,
    pub subspaces: Vec<Subspace>,
    pub interpretations: Vec<Interpretation>,
    pub identities: Vec<IdentityId>,
    pub mode: Mode,
    pub tolerances: Tolerances,
    /// Largest basis evaluated in dense mode.
    pub dense_cap: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: vec![1, 2, 3],
            nu: vec![2, 3],
            m: vec![2],
            subspaces: vec![Subspace::Full, Subspace::SPIN],
            interpretations: Interpretation::BOTH.to_vec(),
            identities: IdentityId::ALL.to_vec(),
            mode: Mode::Dense,
            tolerances: Tolerances::default(),
            dense_cap: DENSE_CAP,
        }
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<GridPoint> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &nu in &self.nu {
                for &m in &self.m {
                    for &subspace in &self.subspaces {
                        out.push(GridPoint { n, nu, m, subspace });
                    }
                }
            }
        }
        out
    }

    /// Tasks at one grid point: one per identity, and one per
    /// interpretation for identities that take one.
    pub fn tasks_at(&self, p: GridPoint) -> Vec<VerificationTask> {
        let mut tasks = Vec::new();
        for &identity in &self.identities {
            let interps: Vec<Interpretation> = if identity.uses_interpretation() {
                self.interpretations.clone()
            } else {
                vec![Interpretation::NotApplicable]
            };
            for interpretation in interps {
                tasks.push(VerificationTask {
                    identity,
                    n: p.n,
                    nu: p.nu,
                    m: p.m,
                    subspace: p.subspace,
                    interpretation,
                    mode: self.mode,
                });
            }
        }
        tasks
    }

    pub fn task_count(&self) -> usize {
        self.points().into_iter().map(|p| self.tasks_at(p).len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        self.mode.validate()?;
        if self.n.is_empty() || self.nu.is_empty() || self.m.is_empty() || self.subspaces.is_empty() {
            return Err(GentileError::InvalidParameter("empty grid axis".into()));
        }
        if self.interpretations.is_empty() && self.identities.iter().any(|i| i.uses_interpretation()) {
            return Err(GentileError::InvalidParameter("no interpretation selected".into()));
        }
        if self.interpretations.contains(&Interpretation::NotApplicable) {
            return Err(GentileError::InvalidParameter(
                "interpretation must be entrywise_real or hermitian_part".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: u32,
    pub nu: usize,
    pub m: usize,
    pub subspace: Subspace,
}

/// Per-identity status counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentitySummary {
    pub identity: IdentityId,
    pub pass: usize,
    pub fail: usize,
    pub report_only: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub verdicts: Vec<Verdict>,
    pub summary: Vec<IdentitySummary>,
}

impl GridReport {
    pub fn guaranteed_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| !v.guaranteed_ok()).count()
    }

    pub fn sizing_errors(&self) -> usize {
        self.verdicts.iter().filter(|v| v.sizing_error).count()
    }
}

fn summarize(verdicts: &[Verdict]) -> Vec<IdentitySummary> {
    IdentityId::ALL
        .into_iter()
        .filter_map(|identity| {
            let mine: Vec<_> = verdicts.iter().filter(|v| v.task.identity == identity).collect();
            (!mine.is_empty()).then(|| IdentitySummary {
                identity,
                pass: mine.iter().filter(|v| v.status == Status::Pass).count(),
                fail: mine.iter().filter(|v| v.status == Status::Fail).count(),
                report_only: mine.iter().filter(|v| v.status == Status::ReportOnly).count(),
            })
        })
        .collect()
}

fn basis_for(p: GridPoint, mode: Mode, dense_cap: usize) -> Result<FockBasis> {
    let order = GentileOrder::new(p.n)?;
    let cap = match mode {
        Mode::Dense => dense_cap,
        Mode::Sampled { .. } => DEFAULT_BASIS_CAP,
    };
    FockBasis::enumerate_with_cap(p.nu, p.m, order, p.subspace, cap)
}

fn run_point(spec: &GridSpec, p: GridPoint) -> Vec<Verdict> {
    let tasks = spec.tasks_at(p);
    let order = match GentileOrder::new(p.n) {
        Ok(o) => o,
        Err(e) => {
            return tasks
                .into_iter()
                .map(|t| Verdict::from_error(t, t.identity.tolerance(&spec.tolerances), &e))
                .collect()
        }
    };
    let needs_basis = tasks.iter().any(|t| !t.identity.is_single_mode());
    let basis = needs_basis.then(|| basis_for(p, spec.mode, spec.dense_cap));
    let ctx = recipes::Context::new(order, basis.as_ref(), spec.mode, spec.dense_cap, spec.tolerances);
    tasks.into_iter().map(|t| ctx.run(t)).collect()
}

/// Evaluates every task of the grid. Grid points run in parallel; the
/// output is sorted by task key and does not depend on scheduling.
pub fn run_grid(spec: &GridSpec) -> Result<GridReport> {
    spec.validate()?;
    let mut verdicts: Vec<Verdict> = spec
        .points()
        .into_par_iter()
        .flat_map_iter(|p| run_point(spec, p))
        .collect();
    verdicts.sort_by_key(|v| v.task.sort_key());
    let summary = summarize(&verdicts);
    Ok(GridReport { verdicts, summary })
}

/// Evaluates one task with default tolerances and cap.
pub fn run_task(task: VerificationTask) -> Verdict {
    run_task_with(task, Tolerances::default(), DENSE_CAP)
}

pub fn run_task_with(task: VerificationTask, tolerances: Tolerances, dense_cap: usize) -> Verdict {
    let spec = GridSpec {
        n: vec![task.n],
        nu: vec![task.nu],
        m: vec![task.m],
        subspaces: vec![task.subspace],
        interpretations: if task.identity.uses_interpretation() {
            vec![task.interpretation]
        } else {
            Interpretation::BOTH.to_vec()
        },
        identities: vec![task.identity],
        mode: task.mode,
        tolerances,
        dense_cap,
    };
    let tol = task.identity.tolerance(&tolerances);
    if let Err(e) = spec.validate() {
        return Verdict::from_error(task, tol, &e);
    }
    let p = GridPoint {
        n: task.n,
        nu: task.nu,
        m: task.m,
        subspace: task.subspace,
    };
    run_point(&spec, p).into_iter().next().expect("one task per point")
}
