//! One residual recipe per identity.

use std::cell::OnceCell;

use num_complex::Complex64;

use super::expr::{Evaluator, Expr, Mode};
use super::{AuxCheck, IdentityId, Interpretation, Status, Tolerances, Verdict, VerificationTask};
use crate::basis::{FockBasis, ModeIndex, Subspace, DEFAULT_BASIS_CAP};
use crate::engine::eigen::{cluster, eigenvalues_hermitian, DEGENERACY_TOL, DENSE_CAP};
use crate::engine::generators::{position_total_blocks, OperatorBuilder};
use crate::engine::ladder::{embed, single_mode_ops, SingleModeSet};
use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};
use crate::heisenberg::hausdorff;
use crate::reptheory::{casimir_value, partitions_of, CasimirVariant};
use crate::scalars::{occ_f, occ_g, GentileOrder};

struct Outcome {
    residual: f64,
    aux: Vec<AuxCheck>,
    diagnostic: Option<String>,
}

impl Outcome {
    fn plain(residual: f64) -> Self {
        Self {
            residual,
            aux: Vec::new(),
            diagnostic: None,
        }
    }
}

/// Operators shared by every task at one grid point.
pub(super) struct Context<'b> {
    order: GentileOrder,
    basis: Option<&'b Result<FockBasis>>,
    builder: Option<OperatorBuilder<'b>>,
    ladder: OnceCell<SingleModeSet>,
    mode: Mode,
    dense_cap: usize,
    tol: Tolerances,
}

impl<'b> Context<'b> {
    pub(super) fn new(
        order: GentileOrder,
        basis: Option<&'b Result<FockBasis>>,
        mode: Mode,
        dense_cap: usize,
        tol: Tolerances,
    ) -> Self {
        let builder = match basis {
            Some(Ok(b)) => Some(OperatorBuilder::new(b)),
            _ => None,
        };
        Self {
            order,
            basis,
            builder,
            ladder: OnceCell::new(),
            mode,
            dense_cap,
            tol,
        }
    }

    pub(super) fn run(&self, task: VerificationTask) -> Verdict {
        let tolerance = task.identity.tolerance(&self.tol);
        let guaranteed = task.identity.is_guaranteed();
        let eval = Evaluator::new(self.mode, &task.key());
        match self.evaluate(task, &eval) {
            Ok(out) => Verdict {
                task,
                residual: Some(out.residual),
                tolerance,
                guaranteed,
                status: Status::judge(guaranteed, out.residual, tolerance),
                auxiliary: out.aux,
                diagnostic: out.diagnostic,
                sizing_error: false,
            },
            Err(e) => Verdict::from_error(task, tolerance, &e),
        }
    }

    fn evaluate(&self, task: VerificationTask, ev: &Evaluator) -> Result<Outcome> {
        match task.identity {
            IdentityId::NbracketEq6 => self.nbracket(ev),
            IdentityId::PhaseEq7 => self.phase_annihilation(ev),
            IdentityId::PhaseEq8 => self.phase_creation(ev),
            IdentityId::FgConsistencyEq13_14 => self.fg_consistency(ev),
            IdentityId::BracketFnEq19Plain => self.bracket_fn(ev, Complex64::new(1.0, 0.0)),
            IdentityId::BracketFnEq19Nbracket => self.bracket_fn(ev, self.order.phase()),
            IdentityId::QuarticEq22 => self.quartic(ev),
            IdentityId::CommutatorEq12 => self.generator_commutator(ev),
            IdentityId::TheoremEq3 => self.theorem(ev, task.interpretation),
            IdentityId::LimitEq5 => self.limit(ev),
            IdentityId::DualityTauE => self.duality(ev),
            IdentityId::HermiticityCasimir => self.hermiticity(ev),
            IdentityId::SectorConservation => self.conservation(ev),
            IdentityId::CasimirSpectrumMatch => self.spectrum_match(),
        }
    }

    fn dim_cap(&self) -> usize {
        match self.mode {
            Mode::Dense => self.dense_cap,
            Mode::Sampled { .. } => DEFAULT_BASIS_CAP,
        }
    }

    fn ladder(&self) -> Result<&SingleModeSet> {
        let dim = self.order.ladder_dim();
        if dim > self.dim_cap() {
            return Err(GentileError::DenseCap { dim, cap: self.dim_cap() });
        }
        Ok(self.ladder.get_or_init(|| single_mode_ops(self.order)))
    }

    fn builder(&self) -> Result<&OperatorBuilder<'b>> {
        match (&self.builder, self.basis) {
            (Some(b), _) => Ok(b),
            (None, Some(Err(e))) => Err(e.clone()),
            (None, _) => Err(GentileError::InvalidParameter("no basis for a multi-mode identity".into())),
        }
    }

    fn ladder_diag(&self, func: impl Fn(u32, GentileOrder) -> Result<f64>) -> Result<ComplexOperator> {
        let s = self.ladder()?;
        let values = (0..=self.order.n()).map(|v| func(v, self.order)).collect::<Result<Vec<f64>>>()?;
        Ok(ComplexOperator::real_diagonal(&values, s.identity().tag()))
    }

    fn nbracket(&self, ev: &Evaluator) -> Result<Outcome> {
        let s = self.ladder()?;
        let q = self.order.phase();
        let id = s.identity();
        let same = Expr::like(&id).bracket(&s.b, &s.a_dag, q).term(-1.0, &[&id]);
        let mut out = Outcome::plain(ev.norm(&same)?);

        // distinct modes commute, so one representative pair covers them all
        match FockBasis::enumerate_with_cap(1, 2, self.order, Subspace::Full, self.dim_cap()) {
            Ok(two) => {
                let b1 = embed(&s.b, ModeIndex::new(1, 1), &two)?;
                let ad2 = embed(&s.a_dag, ModeIndex::new(1, 2), &two)?;
                let cross = Expr::like(&b1).bracket(&b1, &ad2, q);
                out.aux
                    .push(AuxCheck::new("cross_mode", ev.norm(&cross)?, self.tol.default, false));
            }
            Err(e) if e.is_sizing() => out.diagnostic = Some(format!("cross-mode check skipped: {e}")),
            Err(e) => return Err(e),
        }
        Ok(out)
    }

    fn phase_annihilation(&self, ev: &Evaluator) -> Result<Outcome> {
        let s = self.ladder()?;
        let e = Expr::like(&s.a).bracket(&s.a, &s.b, self.order.half_phase());
        Ok(Outcome::plain(ev.norm(&e)?))
    }

    fn phase_creation(&self, ev: &Evaluator) -> Result<Outcome> {
        let s = self.ladder()?;
        let printed = Expr::like(&s.a).bracket(&s.a_dag, &s.b_dag, self.order.phase());
        let adjoint = Expr::like(&s.a).bracket(&s.a_dag, &s.b_dag, self.order.half_phase());
        let mut out = Outcome::plain(ev.norm(&printed)?);
        out.aux
            .push(AuxCheck::new("adjoint_phase", ev.norm(&adjoint)?, self.tol.default, true));
        Ok(out)
    }

    fn fg_consistency(&self, ev: &Evaluator) -> Result<Outcome> {
        let s = self.ladder()?;
        let g = self.ladder_diag(occ_g)?;
        let f = self.ladder_diag(occ_f)?;
        let gram = Expr::like(&g).term(1.0, &[&s.a_dag, &s.a]).term(-1.0, &[&g]);
        let diff = Expr::like(&f).commutator(&s.a, &s.a_dag).term(-1.0, &[&f]);
        let mut out = Outcome::plain(ev.max_norm([&gram, &diff])?);

        let top = self.order.n() as usize;
        let top_column = (0..=top)
            .map(|r| s.a_dag.get(r, top).norm().max(s.b_dag.get(r, top).norm()))
            .fold(0.0, f64::max);
        out.aux
            .push(AuxCheck::new("top_state_annihilation", top_column, self.tol.tight, true));
        Ok(out)
    }

    fn bracket_fn(&self, ev: &Evaluator, phase: Complex64) -> Result<Outcome> {
        let s = self.ladder()?;
        let f = self.ladder_diag(occ_f)?;
        let on_b = Expr::like(&f).bracket(&s.b, &s.b_dag, phase).term(-1.0, &[&f]);
        let on_a = Expr::like(&f).bracket(&s.a, &s.a_dag, phase).term(-1.0, &[&f]);
        Ok(Outcome::plain(ev.max_norm([&on_b, &on_a])?))
    }

    fn quartic(&self, ev: &Evaluator) -> Result<Outcome> {
        let s = self.ladder()?;
        let q = self.order.phase();
        let (a, b, ad, bd) = (&s.a, &s.b, &s.a_dag, &s.b_dag);
        let creation = Expr::like(a)
            .term(1.0, &[ad, bd, ad, bd, bd, ad, bd, ad])
            .term(-q, &[bd, ad, bd, ad, ad, bd, ad, bd]);
        let annihilation = Expr::like(a)
            .term(1.0, &[a, b, a, b, b, a, b, a])
            .term(-q, &[b, a, b, a, a, b, a, b]);
        let mut out = Outcome::plain(ev.max_norm([&creation, &annihilation])?);
        out.aux
            .push(AuxCheck::new("creation_words", ev.norm(&creation)?, self.tol.default, false));
        out.aux
            .push(AuxCheck::new("annihilation_words", ev.norm(&annihilation)?, self.tol.default, false));
        Ok(out)
    }

    fn generator_commutator(&self, ev: &Evaluator) -> Result<Outcome> {
        let b = self.builder()?;
        let basis = b.basis();
        let (nu, m) = (basis.nu(), basis.m());
        let order = self.order;
        // Σ_i [f(N_l^i) g(N_k^i) − f(N_k^i) g(N_l^i)], indexed by (l, k)
        let mut corrections = Vec::with_capacity(m * m);
        for l in 0..m {
            for k in 0..m {
                let values = basis
                    .iter()
                    .map(|s| {
                        (0..nu).try_fold(0.0, |acc, i| {
                            let (nl, nk) = (s[i * m + l], s[i * m + k]);
                            Ok(acc + occ_f(nl, order)? * occ_g(nk, order)? - occ_f(nk, order)? * occ_g(nl, order)?)
                        })
                    })
                    .collect::<Result<Vec<f64>>>()?;
                corrections.push(ComplexOperator::real_diagonal(&values, basis.tag()));
            }
        }
        let mut es = Vec::with_capacity(m * m);
        for k in 1..=m {
            for l in 1..=m {
                es.push(b.e(k, l)?);
            }
        }
        let e = |k: usize, l: usize| es[(k - 1) * m + (l - 1)];
        let mut exprs = Vec::new();
        for k in 1..=m {
            for l in 1..=m {
                for p in 1..=m {
                    for q in 1..=m {
                        let mut x = Expr::like(e(k, l)).commutator(e(k, l), e(p, q));
                        if l == p {
                            x = x.term(-1.0, &[e(k, q)]);
                        }
                        if q == k {
                            x = x.term(1.0, &[e(p, l)]);
                        }
                        if l == p && q == k {
                            x = x.term(-2.0, &[&corrections[(l - 1) * m + (k - 1)]]);
                        }
                        exprs.push(x);
                    }
                }
            }
        }
        Ok(Outcome::plain(ev.max_norm(&exprs)?))
    }

    /// `P` with its partner under the chosen real-part reading: the
    /// entrywise conjugate or the adjoint.
    fn class_sum_pair(&self, interp: Interpretation) -> Result<(&ComplexOperator, ComplexOperator)> {
        let p = self.builder()?.class_sum()?;
        let partner = match interp {
            Interpretation::EntrywiseReal => p.entrywise_conjugate(),
            Interpretation::HermitianPart => p.adjoint(),
            Interpretation::NotApplicable => {
                return Err(GentileError::InvalidParameter(
                    "the theorem needs a real-part interpretation".into(),
                ))
            }
        };
        Ok((p, partner))
    }

    /// `Re[q·s·P] + m·ΣJ − (½C₂ − (m/2)C₁)`.
    fn theorem_expr<'e>(
        &self,
        p: &'e ComplexOperator,
        partner: &'e ComplexOperator,
        j: &'e ComplexOperator,
        c1: &'e ComplexOperator,
        c2: &'e ComplexOperator,
        exchange_scale: f64,
    ) -> Expr<'e> {
        let q = self.order.phase();
        let m = c1.tag().m as f64;
        Expr::like(p)
            .term(q * (0.5 * exchange_scale), &[p])
            .term(q.conj() * (0.5 * exchange_scale), &[partner])
            .term(m, &[j])
            .term(-0.5, &[c2])
            .term(0.5 * m, &[c1])
    }

    fn theorem(&self, ev: &Evaluator, interp: Interpretation) -> Result<Outcome> {
        let b = self.builder()?;
        let (p, partner) = self.class_sum_pair(interp)?;
        let j = b.j_sum()?;
        let (c1, c2) = (b.c1()?, b.c2()?);
        let normalized = self.theorem_expr(p, &partner, &j, c1, c2, 1.0);
        // the exchange words without the ½ weight
        let unnormalized = self.theorem_expr(p, &partner, &j, c1, c2, 2.0);
        let mut out = Outcome::plain(ev.norm(&normalized)?);
        out.aux.push(AuxCheck::new(
            "unnormalized_exchange",
            ev.norm(&unnormalized)?,
            self.tol.default,
            false,
        ));
        Ok(out)
    }

    fn limit(&self, ev: &Evaluator) -> Result<Outcome> {
        let b = self.builder()?;
        let fermi = self.order.n() == 1;
        let sign = if fermi { -1.0 } else { 1.0 };
        let p = b.class_sum()?;
        let n_total = b.total_number()?;
        let (c1, c2) = (b.c1()?, b.c2()?);
        let m = b.basis().m() as f64;
        let limit = Expr::like(p)
            .term(sign, &[p])
            .term(-m, &[&n_total])
            .term(-0.5, &[c2])
            .term(0.5 * m, &[c1]);
        let mut out = Outcome::plain(ev.norm(&limit)?);
        out.diagnostic = Some(if fermi { "sign -, Fermi form" } else { "sign +, Bose form" }.into());
        if fermi {
            // theorem residual (entrywise reading) minus limit residual; the
            // Casimir terms cancel exactly
            let (_, conj) = self.class_sum_pair(Interpretation::EntrywiseReal)?;
            let j = b.j_sum()?;
            let q = self.order.phase();
            let gap = Expr::like(p)
                .term(q * 0.5, &[p])
                .term(q.conj() * 0.5, &[&conj])
                .term(m, &[&j])
                .term(-sign, &[p])
                .term(m, &[&n_total]);
            out.aux
                .push(AuxCheck::new("theorem_consistency", ev.norm(&gap)?, self.tol.tight, true));
        }
        Ok(out)
    }

    fn taus(&self) -> Result<Vec<&ComplexOperator>> {
        let b = self.builder()?;
        let nu = b.basis().nu();
        let mut out = Vec::new();
        for i in 1..nu {
            for j in i + 1..=nu {
                out.push(b.tau(i, j)?);
            }
        }
        Ok(out)
    }

    fn generators(&self) -> Result<Vec<&ComplexOperator>> {
        let b = self.builder()?;
        let m = b.basis().m();
        let mut out = Vec::with_capacity(m * m);
        for k in 1..=m {
            for l in 1..=m {
                out.push(b.e(k, l)?);
            }
        }
        Ok(out)
    }

    fn duality(&self, ev: &Evaluator) -> Result<Outcome> {
        let b = self.builder()?;
        if b.basis().nu() < 2 {
            return Err(GentileError::InvalidParameter("duality needs nu >= 2".into()));
        }
        let taus = self.taus()?;
        let es = self.generators()?;
        let exprs: Vec<Expr> = taus
            .iter()
            .flat_map(|&t| es.iter().map(move |&e| Expr::like(t).commutator(t, e)))
            .collect();
        Ok(Outcome::plain(ev.max_norm(&exprs)?))
    }

    fn hermiticity(&self, ev: &Evaluator) -> Result<Outcome> {
        let b = self.builder()?;
        let (c1, c2) = (b.c1()?, b.c2()?);
        let (c1a, c2a) = (c1.adjoint(), c2.adjoint());
        let e1 = Expr::like(c1).term(1.0, &[c1]).term(-1.0, &[&c1a]);
        let e2 = Expr::like(c2).term(1.0, &[c2]).term(-1.0, &[&c2a]);
        Ok(Outcome::plain(ev.max_norm([&e1, &e2])?))
    }

    fn conservation(&self, ev: &Evaluator) -> Result<Outcome> {
        let b = self.builder()?;
        let nu = b.basis().nu();
        let mut ops = self.generators()?;
        if nu >= 2 {
            ops.extend(self.taus()?);
            ops.push(b.class_sum()?);
        }
        ops.push(b.c1()?);
        ops.push(b.c2()?);
        let totals = (1..=nu).map(|i| b.position_total(i)).collect::<Result<Vec<_>>>()?;
        let exprs: Vec<Expr> = ops
            .iter()
            .flat_map(|&o| totals.iter().map(move |t| Expr::like(o).commutator(o, t)))
            .collect();
        let commutators = ev.max_norm(&exprs)?;
        let leakage = b.leakage();
        let mut out = Outcome::plain(commutators.max(leakage));
        out.aux.push(AuxCheck::new("leakage", leakage, self.tol.tight, true));
        Ok(out)
    }

    /// Distinct eigenvalues of `C₁`, `C₂` per conserved block, against the
    /// Casimir values of the partitions of the block's particle count.
    fn spectrum_match(&self) -> Result<Outcome> {
        let b = self.builder()?;
        let basis = b.basis();
        let m = basis.m();
        let (c1, c2) = (b.c1()?, b.c2()?);
        let blocks = if basis.is_full() {
            position_total_blocks(basis)
        } else {
            let totals = basis.position_totals(basis.state(0));
            vec![(totals, (0..basis.dim()).collect())]
        };
        let distinct = |op: &ComplexOperator, idx: &[usize]| -> Result<Vec<f64>> {
            let sub = op.submatrix(idx, basis.tag());
            let values = eigenvalues_hermitian(&sub, DENSE_CAP)?;
            Ok(cluster(&values, DEGENERACY_TOL).into_iter().map(|l| l.value).collect())
        };
        let mut worst = [0.0f64; 2];
        for (totals, idx) in &blocks {
            let particles: u32 = totals.iter().sum();
            let (e1, e2) = (distinct(c1, idx)?, distinct(c2, idx)?);
            let parts = partitions_of(particles, m);
            for (slot, variant) in CasimirVariant::ALL.into_iter().enumerate() {
                let predict = |p: u32| {
                    parts
                        .iter()
                        .map(|l| casimir_value(p, l, m, variant).map(|v| v as f64))
                        .collect::<Result<Vec<f64>>>()
                };
                let dev = hausdorff(&e1, &predict(1)?).max(hausdorff(&e2, &predict(2)?));
                worst[slot] = worst[slot].max(dev);
            }
        }
        let (best_slot, best) = worst
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("two variants");
        let mut out = Outcome::plain(best);
        for (slot, variant) in CasimirVariant::ALL.into_iter().enumerate() {
            out.aux.push(AuxCheck::new(
                format!("variant:{variant}"),
                worst[slot],
                self.tol.default,
                false,
            ));
        }
        out.diagnostic = Some(format!(
            "best variant {} over {} block(s)",
            CasimirVariant::ALL[best_slot],
            blocks.len()
        ));
        Ok(out)
    }
}
