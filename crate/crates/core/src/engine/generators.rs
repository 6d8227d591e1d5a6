//! Composite operators: exchange generators `τ_ij`, the transposition class
//! sum `P`, unitary-group generators `E_kl`, the Casimirs `C₁`, `C₂`, and
//! the diagonal coupling sum `Σ J(N)`.

use std::cell::{Cell, OnceCell};

use num_complex::Complex64;

use crate::basis::{FockBasis, ModeIndex};
use crate::engine::ladder::{assemble_words, embed, single_mode_ops, Ladder, SingleModeSet, Word};
use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};
use crate::scalars::{coupling_j, occ_f, occ_g};

/// Weight applied to the two exchange words of `τ_ij`. Each word exchanges
/// the pair in one of the two copies (the Hilbert space and its conjugate);
/// averaging them gives an involution on the single-occupancy sector.
pub const EXCHANGE_WEIGHT: f64 = 0.5;

/// How composite operators are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Sparse products of embedded single-mode matrices (full space only).
    Matrix,
    /// Direct application of ladder words to basis states (any basis).
    Words,
    /// `Matrix` on the full space, `Words` on sectors.
    Auto,
}

/// Builds and caches the composite operators of one basis.
///
/// Not `Sync`; use one builder per thread.
pub struct OperatorBuilder<'b> {
    basis: &'b FockBasis,
    route: Route,
    ladder: OnceCell<SingleModeSet>,
    embedded: Vec<[OnceCell<ComplexOperator>; 4]>,
    taus: Vec<OnceCell<ComplexOperator>>,
    es: Vec<OnceCell<ComplexOperator>>,
    class_sum: OnceCell<ComplexOperator>,
    c1: OnceCell<ComplexOperator>,
    c2: OnceCell<ComplexOperator>,
    leakage: Cell<f64>,
}

impl<'b> OperatorBuilder<'b> {
    pub fn new(basis: &'b FockBasis) -> Self {
        Self::with_route(basis, Route::Auto).expect("auto route is valid on any basis")
    }

    pub fn with_route(basis: &'b FockBasis, route: Route) -> Result<Self> {
        let route = match route {
            Route::Auto if basis.is_full() => Route::Matrix,
            Route::Auto => Route::Words,
            Route::Matrix if !basis.is_full() => {
                return Err(GentileError::InvalidParameter(
                    "matrix route needs a full-space basis".into(),
                ))
            }
            r => r,
        };
        let modes = basis.mode_count();
        let (nu, m) = (basis.nu(), basis.m());
        Ok(Self {
            basis,
            route,
            ladder: OnceCell::new(),
            embedded: (0..if route == Route::Matrix { modes } else { 0 })
                .map(|_| Default::default())
                .collect(),
            taus: (0..nu * nu).map(|_| OnceCell::new()).collect(),
            es: (0..m * m).map(|_| OnceCell::new()).collect(),
            class_sum: OnceCell::new(),
            c1: OnceCell::new(),
            c2: OnceCell::new(),
            leakage: Cell::new(0.0),
        })
    }

    pub fn basis(&self) -> &FockBasis {
        self.basis
    }

    pub fn route(&self) -> Route {
        self.route
    }

    pub fn single_mode(&self) -> &SingleModeSet {
        self.ladder.get_or_init(|| single_mode_ops(self.basis.order()))
    }

    /// Largest amplitude the word route has dropped for leaving the basis.
    pub fn leakage(&self) -> f64 {
        self.leakage.get()
    }

    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn zeros(&self) -> ComplexOperator {
        ComplexOperator::zeros(self.dim(), self.basis.tag())
    }

    fn check_position(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.basis.nu() {
            return Err(GentileError::InvalidParameter(format!(
                "position {i} outside 1..={}",
                self.basis.nu()
            )));
        }
        Ok(())
    }

    fn check_state(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.basis.m() {
            return Err(GentileError::InvalidParameter(format!(
                "state {k} outside 1..={}",
                self.basis.m()
            )));
        }
        Ok(())
    }

    /// An embedded single-mode ladder operator (matrix route only).
    fn embedded(&self, letter: Ladder, mode: ModeIndex) -> &ComplexOperator {
        let slot = match letter {
            Ladder::A => 0,
            Ladder::B => 1,
            Ladder::ADag => 2,
            Ladder::BDag => 3,
        };
        self.embedded[mode.flat(self.basis.m())][slot].get_or_init(|| {
            embed(self.single_mode().get(letter), mode, self.basis).expect("mode validated by caller")
        })
    }

    fn assemble(&self, terms: &[(Complex64, Word)]) -> ComplexOperator {
        match self.route {
            Route::Matrix => {
                let mut acc = self.zeros();
                for (coef, word) in terms {
                    let mut product = ComplexOperator::identity(self.dim(), self.basis.tag());
                    for &(letter, mode) in &word.0 {
                        product = product
                            .matmul(self.embedded(letter, mode))
                            .expect("same basis");
                    }
                    acc = acc.add_scaled(*coef, &product).expect("same basis");
                }
                acc
            }
            _ => {
                let (op, leak) = assemble_words(terms, self.basis).expect("modes validated by caller");
                self.leakage.set(self.leakage.get().max(leak));
                op
            }
        }
    }

    /// The printed quartic words of `τ_ij` with unit coefficients:
    /// `a_k^{†i} a_l^{†j} b_l^i b_k^j` and `a_k^{†i} b_l^{†j} b_l^i a_k^j`.
    pub fn exchange_words(&self, i: usize, j: usize) -> Vec<Word> {
        let m = self.basis.m();
        let mut words = Vec::with_capacity(2 * m * m);
        for k in 1..=m {
            for l in 1..=m {
                let (ik, il) = (ModeIndex::new(i, k), ModeIndex::new(i, l));
                let (jk, jl) = (ModeIndex::new(j, k), ModeIndex::new(j, l));
                words.push(Word::new([
                    (Ladder::ADag, ik),
                    (Ladder::ADag, jl),
                    (Ladder::B, il),
                    (Ladder::B, jk),
                ]));
                words.push(Word::new([
                    (Ladder::ADag, ik),
                    (Ladder::BDag, jl),
                    (Ladder::B, il),
                    (Ladder::A, jk),
                ]));
            }
        }
        words
    }

    /// Exchange generator `τ_ij`, `1 ≤ i < j ≤ ν`.
    pub fn tau(&self, i: usize, j: usize) -> Result<&ComplexOperator> {
        self.check_position(i)?;
        self.check_position(j)?;
        if i >= j {
            return Err(GentileError::InvalidParameter(format!(
                "exchange needs i < j, got i={i}, j={j}"
            )));
        }
        let nu = self.basis.nu();
        Ok(self.taus[(i - 1) * nu + (j - 1)].get_or_init(|| {
            let w = Complex64::new(EXCHANGE_WEIGHT, 0.0);
            let terms: Vec<_> = self.exchange_words(i, j).into_iter().map(|word| (w, word)).collect();
            self.assemble(&terms)
        }))
    }

    /// Transposition class sum `P = Σ_{i<j} τ_ij`.
    pub fn class_sum(&self) -> Result<&ComplexOperator> {
        let nu = self.basis.nu();
        if nu < 2 {
            return Err(GentileError::InvalidParameter(format!(
                "class sum needs nu >= 2, got {nu}"
            )));
        }
        if let Some(p) = self.class_sum.get() {
            return Ok(p);
        }
        let mut acc = self.zeros();
        for i in 1..nu {
            for j in i + 1..=nu {
                acc = acc.add(self.tau(i, j)?)?;
            }
        }
        Ok(self.class_sum.get_or_init(|| acc))
    }

    /// `E_kl = Σ_i (a_k^{†i} b_l^i + b_k^{†i} a_l^i)`.
    pub fn e(&self, k: usize, l: usize) -> Result<&ComplexOperator> {
        self.check_state(k)?;
        self.check_state(l)?;
        let m = self.basis.m();
        Ok(self.es[(k - 1) * m + (l - 1)].get_or_init(|| {
            let one = Complex64::new(1.0, 0.0);
            let terms: Vec<_> = (1..=self.basis.nu())
                .flat_map(|i| {
                    let (ik, il) = (ModeIndex::new(i, k), ModeIndex::new(i, l));
                    [
                        (one, Word::new([(Ladder::ADag, ik), (Ladder::B, il)])),
                        (one, Word::new([(Ladder::BDag, ik), (Ladder::A, il)])),
                    ]
                })
                .collect();
            self.assemble(&terms)
        }))
    }

    /// `C₁ = Σ_l E_ll`.
    pub fn c1(&self) -> Result<&ComplexOperator> {
        if let Some(c) = self.c1.get() {
            return Ok(c);
        }
        let mut acc = self.zeros();
        for l in 1..=self.basis.m() {
            acc = acc.add(self.e(l, l)?)?;
        }
        Ok(self.c1.get_or_init(|| acc))
    }

    /// `C₂ = Σ_{k,l} E_kl E_lk`.
    ///
    /// On a sector basis this is the product of restricted generators, which
    /// equals the restricted product because every `E_kl` conserves the
    /// per-position totals.
    pub fn c2(&self) -> Result<&ComplexOperator> {
        if let Some(c) = self.c2.get() {
            return Ok(c);
        }
        let m = self.basis.m();
        let mut acc = self.zeros();
        for k in 1..=m {
            for l in 1..=m {
                acc = acc.add(&self.e(k, l)?.matmul(self.e(l, k)?)?)?;
            }
        }
        Ok(self.c2.get_or_init(|| acc))
    }

    fn diagonal_from(&self, value: impl Fn(&[u32]) -> Result<f64>) -> Result<ComplexOperator> {
        let values = self.basis.iter().map(value).collect::<Result<Vec<f64>>>()?;
        Ok(ComplexOperator::real_diagonal(&values, self.basis.tag()))
    }

    /// Diagonal `Σ_{k,i} J(N_k^i)`.
    pub fn j_sum(&self) -> Result<ComplexOperator> {
        let order = self.basis.order();
        self.diagonal_from(|s| s.iter().map(|&o| coupling_j(o, order)).sum())
    }

    /// Number operator `N_k^i` of one mode.
    pub fn number(&self, mode: ModeIndex) -> Result<ComplexOperator> {
        self.check_position(mode.position)?;
        self.check_state(mode.state)?;
        let flat = mode.flat(self.basis.m());
        self.diagonal_from(|s| Ok(f64::from(s[flat])))
    }

    /// Per-position total `Σ_k N_k^i`.
    pub fn position_total(&self, position: usize) -> Result<ComplexOperator> {
        self.check_position(position)?;
        let m = self.basis.m();
        self.diagonal_from(|s| Ok(s[(position - 1) * m..position * m].iter().map(|&o| f64::from(o)).sum()))
    }

    /// Total particle number `Σ_{k,i} N_k^i`.
    pub fn total_number(&self) -> Result<ComplexOperator> {
        self.diagonal_from(|s| Ok(s.iter().map(|&o| f64::from(o)).sum()))
    }

    /// `diag(f(N_k^i))` on one mode.
    pub fn f_of(&self, mode: ModeIndex) -> Result<ComplexOperator> {
        let order = self.basis.order();
        let flat = mode.flat(self.basis.m());
        self.diagonal_from(|s| occ_f(s[flat], order))
    }

    /// `diag(g(N_k^i))` on one mode.
    pub fn g_of(&self, mode: ModeIndex) -> Result<ComplexOperator> {
        let order = self.basis.order();
        let flat = mode.flat(self.basis.m());
        self.diagonal_from(|s| occ_g(s[flat], order))
    }
}

/// A restricted operator and the largest entry coupling the sector to the
/// rest of the full space.
#[derive(Debug, Clone)]
pub struct Restricted {
    pub op: ComplexOperator,
    pub leakage: f64,
}

/// Sub-matrix of a full-space operator on the rows/columns of a sector basis.
pub fn restrict(op: &ComplexOperator, full: &FockBasis, sector: &FockBasis) -> Result<Restricted> {
    if op.tag() != full.tag() || !full.is_full() {
        return Err(GentileError::BasisMismatch);
    }
    if sector.nu() != full.nu() || sector.m() != full.m() || sector.order() != full.order() {
        return Err(GentileError::BasisMismatch);
    }
    let indices = sector
        .iter()
        .map(|s| full.lookup(s).ok_or_else(|| GentileError::NotInBasis(format!("{s:?}"))))
        .collect::<Result<Vec<usize>>>()?;
    Ok(Restricted {
        op: op.submatrix(&indices, sector.tag()),
        leakage: op.leakage(&indices),
    })
}

/// Groups basis ordinals by their per-position totals; every conserving
/// operator is block-diagonal over these groups.
pub fn position_total_blocks(basis: &FockBasis) -> Vec<(Vec<u32>, Vec<usize>)> {
    let mut blocks: std::collections::BTreeMap<Vec<u32>, Vec<usize>> = Default::default();
    for (i, s) in basis.iter().enumerate() {
        blocks.entry(basis.position_totals(s)).or_default().push(i);
    }
    blocks.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Subspace;
    use crate::scalars::GentileOrder;

    fn ord(n: u32) -> GentileOrder {
        GentileOrder::new(n).unwrap()
    }

    fn spin(nu: usize, m: usize, n: u32) -> FockBasis {
        FockBasis::enumerate(nu, m, ord(n), Subspace::SPIN).unwrap()
    }

    fn full(nu: usize, m: usize, n: u32) -> FockBasis {
        FockBasis::enumerate(nu, m, ord(n), Subspace::Full).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn tau_swaps_distinct_states_with_unit_amplitude() {
        let b = spin(2, 2, 1);
        let ops = OperatorBuilder::new(&b);
        let tau = ops.tau(1, 2).unwrap();
        // brute-force oracle: the swapped occupation pattern
        let from = b.lookup(&[1, 0, 0, 1]).unwrap();
        let to = b.lookup(&[0, 1, 1, 0]).unwrap();
        assert!((tau.get(to, from) - one()).norm() < 1e-12);
        assert_eq!(tau.row(to).count(), 1);
        let same = b.lookup(&[1, 0, 1, 0]).unwrap();
        assert!((tau.get(same, same) - one()).norm() < 1e-12);
    }

    #[test]
    fn tau_is_involutive_on_the_spin_sector() {
        for n in [1, 2, 5] {
            let b = spin(2, 2, n);
            let ops = OperatorBuilder::new(&b);
            let tau = ops.tau(1, 2).unwrap();
            let sq = tau.matmul(tau).unwrap();
            let id = ComplexOperator::identity(b.dim(), b.tag());
            assert!(sq.sub(&id).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn tau_rejects_bad_pairs() {
        let b = spin(3, 2, 1);
        let ops = OperatorBuilder::new(&b);
        assert!(ops.tau(2, 2).is_err());
        assert!(ops.tau(2, 1).is_err());
        assert!(ops.tau(1, 4).is_err());
    }

    #[test]
    fn class_sum_counts_pairs() {
        let b = spin(2, 2, 1);
        let ops = OperatorBuilder::new(&b);
        assert_eq!(ops.class_sum().unwrap(), ops.tau(1, 2).unwrap());

        let b3 = spin(3, 2, 1);
        let ops3 = OperatorBuilder::new(&b3);
        let manual = ops3
            .tau(1, 2)
            .unwrap()
            .add(ops3.tau(1, 3).unwrap())
            .unwrap()
            .add(ops3.tau(2, 3).unwrap())
            .unwrap();
        assert!(ops3.class_sum().unwrap().sub(&manual).unwrap().max_abs() < 1e-15);

        let b1 = spin(1, 2, 1);
        assert!(OperatorBuilder::new(&b1).class_sum().is_err());
    }

    #[test]
    fn e12_doubles_on_real_amplitudes() {
        let b = full(1, 2, 1);
        let ops = OperatorBuilder::new(&b);
        let e12 = ops.e(1, 2).unwrap();
        let from = b.lookup(&[0, 1]).unwrap();
        let to = b.lookup(&[1, 0]).unwrap();
        assert!((e12.get(to, from) - 2.0).norm() < 1e-12);
    }

    #[test]
    fn diagonal_generators_are_hermitian() {
        for n in 1..=3 {
            let b = full(2, 2, n);
            let ops = OperatorBuilder::new(&b);
            for k in 1..=2 {
                assert!(ops.e(k, k).unwrap().asymmetry() < 1e-12);
            }
            assert!(ops.c1().unwrap().asymmetry() < 1e-12);
            assert!(ops.c2().unwrap().asymmetry() < 1e-12);
        }
    }

    #[test]
    fn single_state_casimirs() {
        let b = full(2, 1, 3);
        let ops = OperatorBuilder::new(&b);
        let e11 = ops.e(1, 1).unwrap();
        let c2 = ops.c2().unwrap();
        assert!(c2.sub(&e11.matmul(e11).unwrap()).unwrap().max_abs() < 1e-15);
        assert_eq!(ops.c1().unwrap(), e11);
    }

    #[test]
    fn casimir_commutes_with_generators_on_small_case() {
        let b = full(2, 2, 1);
        let ops = OperatorBuilder::new(&b);
        let c2 = ops.c2().unwrap();
        let worst = (1..=2)
            .flat_map(|k| (1..=2).map(move |l| (k, l)))
            .map(|(k, l)| c2.commutator(ops.e(k, l).unwrap()).unwrap().max_abs())
            .fold(0.0, f64::max);
        assert!(worst.is_finite());
    }

    #[test]
    fn j_sum_values() {
        let b = full(2, 2, 2);
        let ops = OperatorBuilder::new(&b);
        let j = ops.j_sum().unwrap();
        assert!(j.is_diagonal());
        assert_eq!(j.get(0, 0).norm(), 0.0);

        let s = spin(3, 2, 1);
        let j = OperatorBuilder::new(&s).j_sum().unwrap();
        for i in 0..s.dim() {
            assert!((j.get(i, i).re + 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn matrix_and_word_routes_agree_on_full_space() {
        for n in 1..=3 {
            let b = full(2, 2, n);
            let by_matrix = OperatorBuilder::with_route(&b, Route::Matrix).unwrap();
            let by_words = OperatorBuilder::with_route(&b, Route::Words).unwrap();
            let diff = |x: &ComplexOperator, y: &ComplexOperator| x.sub(y).unwrap().max_abs();
            assert!(diff(by_matrix.tau(1, 2).unwrap(), by_words.tau(1, 2).unwrap()) < 1e-13);
            for k in 1..=2 {
                for l in 1..=2 {
                    assert!(diff(by_matrix.e(k, l).unwrap(), by_words.e(k, l).unwrap()) < 1e-13);
                }
            }
            assert_eq!(by_words.leakage(), 0.0);
        }
    }

    #[test]
    fn restriction_matches_sector_build() {
        for n in 1..=3 {
            let f = full(2, 2, n);
            let s = spin(2, 2, n);
            let on_full = OperatorBuilder::new(&f);
            let on_sector = OperatorBuilder::new(&s);
            let pairs: Vec<(&ComplexOperator, &ComplexOperator)> = vec![
                (on_full.tau(1, 2).unwrap(), on_sector.tau(1, 2).unwrap()),
                (on_full.e(1, 2).unwrap(), on_sector.e(1, 2).unwrap()),
                (on_full.c1().unwrap(), on_sector.c1().unwrap()),
                (on_full.c2().unwrap(), on_sector.c2().unwrap()),
            ];
            for (big, small) in pairs {
                let r = restrict(big, &f, &s).unwrap();
                assert_eq!(r.leakage, 0.0);
                assert!(r.op.sub(small).unwrap().max_abs() < 1e-13);
            }
            assert_eq!(on_sector.leakage(), 0.0);
        }
    }

    #[test]
    fn restriction_reports_leakage_for_ladders() {
        let f = full(2, 2, 1);
        let s = spin(2, 2, 1);
        let ops = single_mode_ops(ord(1));
        let a = embed(&ops.a, ModeIndex::new(1, 1), &f).unwrap();
        assert!(restrict(&a, &f, &s).unwrap().leakage > 0.0);
        let id = ComplexOperator::identity(f.dim(), f.tag());
        let r = restrict(&id, &f, &s).unwrap();
        assert_eq!(r.leakage, 0.0);
        assert_eq!(r.op, ComplexOperator::identity(s.dim(), s.tag()));
    }

    #[test]
    fn blocks_partition_the_basis() {
        let f = full(2, 2, 2);
        let blocks = position_total_blocks(&f);
        assert_eq!(blocks.iter().map(|(_, v)| v.len()).sum::<usize>(), f.dim());
        assert_eq!(blocks.len(), 25);
    }

    #[test]
    fn word_route_sector_leak_is_recorded() {
        let s = spin(2, 2, 2);
        let ops = OperatorBuilder::new(&s);
        let w = Word::new([(Ladder::ADag, ModeIndex::new(1, 1))]);
        let _ = ops.assemble(&[(one(), w)]);
        assert!(ops.leakage() > 0.0);
    }
}
