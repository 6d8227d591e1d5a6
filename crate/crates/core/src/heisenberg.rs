//! All-pairs exchange model `H = Σ_{i<j} τ_ij` on the spin sector, solved by
//! exact diagonalization and by Casimir eigenvalues over partitions.
//!
//! The additive constant relating `H` to `Σ ½ S_i·S_j` is fixed to zero.

use std::fmt;

use serde::Serialize;

use crate::basis::{FockBasis, Subspace};
use crate::engine::eigen::{eigensolve_hermitian, Level, HERMITIAN_TOL};
use crate::engine::generators::OperatorBuilder;
use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};
use crate::reptheory::{casimir_value, partitions_of, weyl_dimension, CasimirVariant, Partition};
use crate::scalars::{coupling_j, GentileOrder};

/// Default tolerance for eigenvalue agreement between the two routes.
pub const MATCH_TOL: f64 = 1e-9;

/// The constant dropped from `H`.
pub const HAMILTONIAN_CONSTANT: f64 = 0.0;

/// Exchange Hamiltonian on the sector with `sector_total` particles per
/// position, returned with the basis it acts on.
pub fn build_hamiltonian(
    nu: usize,
    m: usize,
    order: GentileOrder,
    sector_total: u32,
) -> Result<(FockBasis, ComplexOperator)> {
    if nu < 2 {
        return Err(GentileError::InvalidParameter(format!(
            "exchange model needs nu >= 2, got {nu}"
        )));
    }
    let basis = FockBasis::enumerate(nu, m, order, Subspace::Sector(sector_total))?;
    let h = OperatorBuilder::new(&basis).class_sum()?.clone();
    Ok((basis, h))
}

/// Clustered ED spectrum; refuses non-Hermitian input.
pub fn spectrum_ed(h: &ComplexOperator, degeneracy_tol: f64) -> Result<Vec<Level>> {
    let asymmetry = h.asymmetry();
    if asymmetry >= HERMITIAN_TOL {
        return Err(GentileError::NonHermitian { asymmetry });
    }
    eigensolve_hermitian(h, degeneracy_tol)
}

/// Which closed form turns Casimir eigenvalues into exchange energies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum CasimirForm {
    /// `H = ½C₂ − (m/2)C₁`.
    Bose,
    /// `H = −(½C₂ − (m/2)C₁)`.
    Fermi,
    /// `H = sec(2π/(n+1))·(½C₂ − (m/2)C₁ − m·ν·J(1))`.
    General { n: u32 },
}

impl CasimirForm {
    pub fn label(&self) -> &'static str {
        match self {
            CasimirForm::Bose => "bose",
            CasimirForm::Fermi => "fermi",
            CasimirForm::General { .. } => "general",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CasimirRoute {
    #[serde(flatten)]
    pub form: CasimirForm,
    pub variant: CasimirVariant,
}

impl CasimirRoute {
    pub fn new(form: CasimirForm, variant: CasimirVariant) -> Self {
        Self { form, variant }
    }

    /// Every form and variant for order `n`.
    pub fn all(order: GentileOrder) -> Vec<CasimirRoute> {
        let forms = [CasimirForm::Bose, CasimirForm::Fermi, CasimirForm::General { n: order.n() }];
        forms
            .into_iter()
            .flat_map(|form| CasimirVariant::ALL.into_iter().map(move |v| CasimirRoute::new(form, v)))
            .collect()
    }
}

impl fmt::Display for CasimirRoute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.variant, self.form.label())
    }
}

/// One partition's predicted exchange energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasimirLevel {
    pub partition: Partition,
    /// `None` when the route's prefactor is singular.
    pub eigenvalue: Option<f64>,
    pub weyl_dimension: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CasimirSpectrum {
    pub route: CasimirRoute,
    pub label: String,
    pub singular: bool,
    pub levels: Vec<CasimirLevel>,
}

/// Exchange energies predicted for every partition of `ν` into at most `m`
/// parts. `General` forms at `cos(2π/(n+1)) = 0` come back flagged singular.
pub fn spectrum_casimir(nu: usize, m: usize, route: CasimirRoute) -> Result<CasimirSpectrum> {
    let total = u32::try_from(nu).map_err(|_| GentileError::InvalidParameter(format!("nu={nu} too large")))?;
    let prefactor = match route.form {
        CasimirForm::Bose => Some((1.0, 0.0)),
        CasimirForm::Fermi => Some((-1.0, 0.0)),
        CasimirForm::General { n } => {
            let order = GentileOrder::new(n)?;
            let cos = (2.0 * order.angle()).cos();
            if cos.abs() < 1e-12 {
                None
            } else {
                let shift = m as f64 * nu as f64 * coupling_j(1, order)?;
                Some((1.0 / cos, shift))
            }
        }
    };
    let levels = partitions_of(total, m)
        .into_iter()
        .map(|lam| {
            let c1 = casimir_value(1, &lam, m, route.variant)? as f64;
            let c2 = casimir_value(2, &lam, m, route.variant)? as f64;
            // `+ 0.0` keeps negative zero out of reports
            let eigenvalue = prefactor.map(|(scale, shift)| scale * (0.5 * c2 - 0.5 * m as f64 * c1 - shift) + 0.0);
            Ok(CasimirLevel {
                weyl_dimension: weyl_dimension(&lam, m)?,
                partition: lam,
                eigenvalue,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CasimirSpectrum {
        route,
        label: route.to_string(),
        singular: prefactor.is_none(),
        levels,
    })
}

/// How well one Casimir route reproduces the ED spectrum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatch {
    pub label: String,
    pub singular: bool,
    /// Hausdorff distance between the ED and predicted eigenvalue sets.
    pub max_deviation: Option<f64>,
    /// Same, with the predicted energies negated.
    pub max_deviation_flipped: Option<f64>,
    /// `+1` or `−1`: the orientation with the smaller deviation.
    pub observed_sign: Option<i8>,
    pub eigenvalues_match: bool,
    /// ED multiplicity divided by the summed Weyl dimensions sharing the
    /// level, per partition; `None` where no ED level matched.
    pub multiplicity_factors: Vec<(Partition, Option<f64>)>,
}

/// Hausdorff distance between two finite point sets on the line.
pub(crate) fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |x: &[f64], y: &[f64]| {
        x.iter()
            .map(|&v| y.iter().map(|&w| (v - w).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Multiset comparison of an ED spectrum with one Casimir route.
pub fn compare_spectra(ed: &[Level], casimir: &CasimirSpectrum, tol: f64) -> SpectrumMatch {
    if casimir.singular {
        return SpectrumMatch {
            label: casimir.label.clone(),
            singular: true,
            max_deviation: None,
            max_deviation_flipped: None,
            observed_sign: None,
            eigenvalues_match: false,
            multiplicity_factors: casimir.levels.iter().map(|l| (l.partition.clone(), None)).collect(),
        };
    }
    let ed_values: Vec<f64> = ed.iter().map(|l| l.value).collect();
    let predicted: Vec<f64> = casimir.levels.iter().filter_map(|l| l.eigenvalue).collect();
    let flipped: Vec<f64> = predicted.iter().map(|v| -v).collect();
    let direct = hausdorff(&ed_values, &predicted);
    let reversed = hausdorff(&ed_values, &flipped);

    let factors_for = |sign: f64| -> Vec<(Partition, Option<f64>)> {
        casimir
            .levels
            .iter()
            .map(|level| {
                let target = sign * level.eigenvalue.expect("non-singular");
                let ed_level = ed.iter().find(|l| (l.value - target).abs() < tol);
                let shared_dims: u128 = casimir
                    .levels
                    .iter()
                    .filter(|o| (sign * o.eigenvalue.expect("non-singular") - target).abs() < tol)
                    .map(|o| o.weyl_dimension)
                    .sum();
                let factor = ed_level.map(|l| l.multiplicity as f64 / shared_dims as f64);
                (level.partition.clone(), factor)
            })
            .collect()
    };
    let inconsistent = |factors: &[(Partition, Option<f64>)]| {
        factors
            .iter()
            .filter(|(_, f)| !matches!(f, Some(x) if *x >= 1.0 && x.fract() == 0.0))
            .count()
    };
    // orientation: eigenvalue agreement first, then whole multiplicity
    // factors, which separates the two signs when both value sets coincide
    let (sign, factors) = [(1.0, direct), (-1.0, reversed)]
        .into_iter()
        .map(|(sign, dev)| {
            let f = factors_for(sign);
            ((dev >= tol, inconsistent(&f), dev), sign, f)
        })
        .min_by(|a, b| {
            (a.0 .0, a.0 .1)
                .cmp(&(b.0 .0, b.0 .1))
                .then(a.0 .2.total_cmp(&b.0 .2))
        })
        .map(|(_, sign, f)| (sign, f))
        .expect("two orientations");

    SpectrumMatch {
        label: casimir.label.clone(),
        singular: false,
        max_deviation: Some(direct),
        max_deviation_flipped: Some(reversed),
        observed_sign: Some(sign as i8),
        eigenvalues_match: direct.min(reversed) < tol,
        multiplicity_factors: factors,
    }
}

/// Everything computed for one `(ν, m, n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub nu: usize,
    pub m: usize,
    pub n: u32,
    pub sector_total: u32,
    pub hamiltonian_constant: f64,
    pub sector_dimension: usize,
    pub ed_spectrum: Vec<Level>,
    pub casimir: Vec<CasimirSpectrum>,
    pub matches: Vec<SpectrumMatch>,
}

/// Builds `H`, diagonalizes it, evaluates every requested Casimir route and
/// compares each against the ED spectrum.
pub fn spectrum_report(
    nu: usize,
    m: usize,
    order: GentileOrder,
    routes: &[CasimirRoute],
    degeneracy_tol: f64,
    match_tol: f64,
) -> Result<SpectrumReport> {
    let (basis, h) = build_hamiltonian(nu, m, order, 1)?;
    let ed = spectrum_ed(&h, degeneracy_tol)?;
    let casimir = routes
        .iter()
        .map(|&r| spectrum_casimir(nu, m, r))
        .collect::<Result<Vec<_>>>()?;
    let matches = casimir.iter().map(|c| compare_spectra(&ed, c, match_tol)).collect();
    Ok(SpectrumReport {
        nu,
        m,
        n: order.n(),
        sector_total: 1,
        hamiltonian_constant: HAMILTONIAN_CONSTANT,
        sector_dimension: basis.dim(),
        ed_spectrum: ed,
        casimir,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::eigen::DEGENERACY_TOL;
    use crate::scalars::BOSE_PROXY_N;

    fn ord(n: u32) -> GentileOrder {
        GentileOrder::new(n).unwrap()
    }

    fn bose_shifted() -> CasimirRoute {
        CasimirRoute::new(CasimirForm::Bose, CasimirVariant::Shifted)
    }

    fn levels(spec: &[Level]) -> Vec<(f64, usize)> {
        spec.iter().map(|l| (l.value, l.multiplicity)).collect()
    }

    fn assert_levels(got: &[Level], expected: &[(f64, usize)], tol: f64) {
        assert_eq!(got.len(), expected.len(), "{:?}", levels(got));
        for (g, &(v, mult)) in got.iter().zip(expected) {
            assert!((g.value - v).abs() < tol, "{:?}", levels(got));
            assert_eq!(g.multiplicity, mult);
        }
    }

    // brute-force oracle: permutation matrix of Σ swaps on m^ν product states
    fn swap_sum_dense(nu: usize, m: usize) -> nalgebra::DMatrix<f64> {
        let dim = m.pow(nu as u32);
        let digits = |mut x: usize| {
            let mut d = vec![0; nu];
            for slot in d.iter_mut().rev() {
                *slot = x % m;
                x /= m;
            }
            d
        };
        let index = |d: &[usize]| d.iter().fold(0, |acc, &x| acc * m + x);
        let mut out = nalgebra::DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let d = digits(col);
            for i in 0..nu {
                for j in i + 1..nu {
                    let mut s = d.clone();
                    s.swap(i, j);
                    out[(index(&s), col)] += 1.0;
                }
            }
        }
        out
    }

    #[test]
    fn two_sites_singlet_triplet() {
        let (_, h) = build_hamiltonian(2, 2, ord(1), 1).unwrap();
        assert_eq!(h.dim(), 4);
        assert_levels(&spectrum_ed(&h, DEGENERACY_TOL).unwrap(), &[(-1.0, 1), (1.0, 3)], 1e-10);
    }

    #[test]
    fn three_sites() {
        let (_, h) = build_hamiltonian(3, 2, ord(1), 1).unwrap();
        assert_levels(&spectrum_ed(&h, DEGENERACY_TOL).unwrap(), &[(0.0, 4), (3.0, 4)], 1e-10);
    }

    #[test]
    fn sector_hamiltonian_equals_swap_sum_at_every_order() {
        for n in [1, 2, 4, BOSE_PROXY_N] {
            for (nu, m) in [(2, 2), (3, 2), (3, 3)] {
                let (basis, h) = build_hamiltonian(nu, m, ord(n), 1).unwrap();
                // sector states are one-hot per position, in the same order as the oracle's digits
                assert_eq!(basis.dim(), m.pow(nu as u32));
                let oracle = swap_sum_dense(nu, m);
                let got = h.to_dense().map(|z| z.re);
                assert!((got - oracle).abs().max() < 1e-12, "n={n} nu={nu} m={m}");
            }
        }
    }

    #[test]
    fn casimir_examples() {
        let s = spectrum_casimir(2, 2, bose_shifted()).unwrap();
        let got: Vec<_> = s.levels.iter().map(|l| (l.partition.to_string(), l.eigenvalue.unwrap(), l.weyl_dimension)).collect();
        assert_eq!(got, vec![("(2,0)".to_string(), 1.0, 3), ("(1,1)".to_string(), -1.0, 1)]);

        let s = spectrum_casimir(3, 2, bose_shifted()).unwrap();
        let got: Vec<_> = s.levels.iter().map(|l| (l.partition.to_string(), l.eigenvalue.unwrap(), l.weyl_dimension)).collect();
        assert_eq!(got, vec![("(3,0)".to_string(), 3.0, 4), ("(2,1)".to_string(), 0.0, 2)]);

        let fermi = spectrum_casimir(2, 2, CasimirRoute::new(CasimirForm::Fermi, CasimirVariant::Shifted)).unwrap();
        let values: Vec<f64> = fermi.levels.iter().map(|l| l.eigenvalue.unwrap()).collect();
        assert_eq!(values, vec![-1.0, 1.0]);
    }

    #[test]
    fn general_form_is_singular_at_n3() {
        let s = spectrum_casimir(2, 2, CasimirRoute::new(CasimirForm::General { n: 3 }, CasimirVariant::Shifted)).unwrap();
        assert!(s.singular);
        assert!(s.levels.iter().all(|l| l.eigenvalue.is_none()));
        let s = spectrum_casimir(2, 2, CasimirRoute::new(CasimirForm::General { n: 2 }, CasimirVariant::Shifted)).unwrap();
        assert!(!s.singular);
    }

    #[test]
    fn compare_two_and_three_sites() {
        let report = spectrum_report(2, 2, ord(1), &[bose_shifted()], DEGENERACY_TOL, MATCH_TOL).unwrap();
        let mm = &report.matches[0];
        assert!(mm.eigenvalues_match);
        assert_eq!(mm.observed_sign, Some(1));
        assert!(mm.max_deviation.unwrap() < 1e-10);
        let factors: Vec<Option<f64>> = mm.multiplicity_factors.iter().map(|(_, f)| *f).collect();
        assert_eq!(factors, vec![Some(1.0), Some(1.0)]);

        let report = spectrum_report(3, 2, ord(1), &[bose_shifted()], DEGENERACY_TOL, MATCH_TOL).unwrap();
        let mm = &report.matches[0];
        assert!(mm.eigenvalues_match);
        let factors: Vec<Option<f64>> = mm.multiplicity_factors.iter().map(|(_, f)| *f).collect();
        assert_eq!(factors, vec![Some(1.0), Some(2.0)]);
    }

    #[test]
    fn fermi_form_orients_by_multiplicity() {
        // both orientations give the value set {−1, +1}; only the flipped one
        // puts the triplet on (2,0)
        let fermi = CasimirRoute::new(CasimirForm::Fermi, CasimirVariant::Shifted);
        let report = spectrum_report(2, 2, ord(1), &[fermi], DEGENERACY_TOL, MATCH_TOL).unwrap();
        let mm = &report.matches[0];
        assert!(mm.eigenvalues_match);
        assert_eq!(mm.observed_sign, Some(-1));
        let factors: Vec<Option<f64>> = mm.multiplicity_factors.iter().map(|(_, f)| *f).collect();
        assert_eq!(factors, vec![Some(1.0), Some(1.0)]);
    }

    #[test]
    fn raw_variant_deviates() {
        let raw = CasimirRoute::new(CasimirForm::Bose, CasimirVariant::Raw);
        let s = spectrum_casimir(2, 2, raw).unwrap();
        let values: Vec<f64> = s.levels.iter().map(|l| l.eigenvalue.unwrap()).collect();
        assert_eq!(values, vec![2.0, 0.0]);
        let report = spectrum_report(2, 2, ord(1), &[raw], DEGENERACY_TOL, MATCH_TOL).unwrap();
        assert!(!report.matches[0].eigenvalues_match);
        assert!(report.matches[0].max_deviation.unwrap() > 0.5);
    }

    #[test]
    fn grid_invariants() {
        for n in [1, 2, BOSE_PROXY_N] {
            for nu in 2..=4 {
                for m in 2..=3 {
                    let (basis, h) = build_hamiltonian(nu, m, ord(n), 1).unwrap();
                    assert!(h.asymmetry() < 1e-10);
                    let ed = spectrum_ed(&h, DEGENERACY_TOL).unwrap();
                    assert_eq!(ed.iter().map(|l| l.multiplicity).sum::<usize>(), m.pow(nu as u32));
                    let trace: f64 = (0..basis.dim()).map(|i| h.get(i, i).re).sum();
                    let eig_sum: f64 = ed.iter().map(|l| l.value * l.multiplicity as f64).sum();
                    assert!((trace - eig_sum).abs() < 1e-9);

                    let ops = OperatorBuilder::new(&basis);
                    for k in 1..=m {
                        assert!(h.commutator(ops.e(k, k).unwrap()).unwrap().max_abs() < 1e-10);
                    }

                    let route = bose_shifted();
                    let mm = compare_spectra(&ed, &spectrum_casimir(nu, m, route).unwrap(), MATCH_TOL);
                    assert!(mm.eigenvalues_match, "n={n} nu={nu} m={m}: {mm:?}");
                    for (_, f) in &mm.multiplicity_factors {
                        let f = f.expect("every partition level present in ED");
                        assert!((f - f.round()).abs() < 1e-12 && f >= 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_single_site() {
        assert!(build_hamiltonian(1, 2, ord(1), 1).is_err());
    }
}
