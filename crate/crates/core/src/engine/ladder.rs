//! Gentile ladder operators: single-mode matrices, their embedding into the
//! multi-mode space, and direct application of operator words to
//! occupation states.
//!
//! Amplitudes follow
//!
//! ```text
//! a†|ν⟩ = √⟨ν+1⟩ |ν+1⟩     b|ν⟩ = √⟨ν⟩ |ν−1⟩
//! b†|ν⟩ = √⟨ν+1⟩* |ν+1⟩    a|ν⟩ = √⟨ν⟩* |ν−1⟩
//! ```
//!
//! with the principal square root. Distinct modes commute: there are no
//! phase strings between modes.

use num_complex::Complex64;

use crate::basis::{BasisTag, FockBasis, ModeIndex};
use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};
use crate::scalars::{bracket_nu, GentileOrder};

/// One ladder letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    A,
    B,
    ADag,
    BDag,
}

impl Ladder {
    /// Action on a single-mode occupation: the new occupation and amplitude,
    /// or `None` when the result vanishes (below the vacuum or above `n`).
    #[inline]
    pub fn act(self, occupation: u32, order: GentileOrder) -> Option<(u32, Complex64)> {
        match self {
            Ladder::ADag | Ladder::BDag => {
                if occupation >= order.n() {
                    return None;
                }
                let br = bracket_nu(occupation + 1, order);
                let amp = if self == Ladder::ADag { br.sqrt() } else { br.conj().sqrt() };
                Some((occupation + 1, amp))
            }
            Ladder::A | Ladder::B => {
                if occupation == 0 {
                    return None;
                }
                let br = bracket_nu(occupation, order);
                let amp = if self == Ladder::B { br.sqrt() } else { br.conj().sqrt() };
                Some((occupation - 1, amp))
            }
        }
    }
}

/// The five single-mode matrices on the `(n+1)`-dimensional ladder.
#[derive(Debug, Clone)]
pub struct SingleModeSet {
    pub order: GentileOrder,
    pub a: ComplexOperator,
    pub b: ComplexOperator,
    pub a_dag: ComplexOperator,
    pub b_dag: ComplexOperator,
    pub num: ComplexOperator,
}

impl SingleModeSet {
    pub fn get(&self, letter: Ladder) -> &ComplexOperator {
        match letter {
            Ladder::A => &self.a,
            Ladder::B => &self.b,
            Ladder::ADag => &self.a_dag,
            Ladder::BDag => &self.b_dag,
        }
    }

    pub fn identity(&self) -> ComplexOperator {
        ComplexOperator::identity(self.order.ladder_dim(), BasisTag::single_mode(self.order))
    }

    /// `diag(func(0), …, func(n))`.
    pub fn diag_fn(&self, func: impl Fn(u32) -> f64) -> ComplexOperator {
        let values: Vec<f64> = (0..=self.order.n()).map(func).collect();
        ComplexOperator::real_diagonal(&values, BasisTag::single_mode(self.order))
    }
}

/// Builds `a, b, a†, b†, N` for one mode.
pub fn single_mode_ops(order: GentileOrder) -> SingleModeSet {
    let dim = order.ladder_dim();
    let tag = BasisTag::single_mode(order);
    let build = |letter: Ladder| {
        let triplets = (0..=order.n()).filter_map(|col| {
            letter
                .act(col, order)
                .map(|(row, amp)| (row as usize, col as usize, amp))
        });
        ComplexOperator::from_triplets(dim, tag, triplets.collect::<Vec<_>>())
    };
    let num: Vec<f64> = (0..=order.n()).map(f64::from).collect();
    SingleModeSet {
        order,
        a: build(Ladder::A),
        b: build(Ladder::B),
        a_dag: build(Ladder::ADag),
        b_dag: build(Ladder::BDag),
        num: ComplexOperator::real_diagonal(&num, tag),
    }
}

/// Places a single-mode operator on `mode` of a full-space basis, identity
/// elsewhere.
pub fn embed(op: &ComplexOperator, mode: ModeIndex, basis: &FockBasis) -> Result<ComplexOperator> {
    let order = basis.order();
    if op.tag() != BasisTag::single_mode(order) || op.dim() != order.ladder_dim() {
        return Err(GentileError::BasisMismatch);
    }
    if !basis.is_full() {
        return Err(GentileError::InvalidParameter(
            "embedding requires a full-space basis; restrict afterwards".into(),
        ));
    }
    check_mode(mode, basis)?;
    let flat = mode.flat(basis.m());
    let stride = basis.stride(flat).expect("full basis has strides");

    // column-wise view of the single-mode operator
    let mut columns: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); op.dim()];
    for (r, c, v) in op.triplets() {
        columns[c].push((r, v));
    }

    let mut triplets = Vec::with_capacity(op.nnz() * (basis.dim() / op.dim()).max(1));
    for (col, state) in basis.iter().enumerate() {
        let occ = state[flat] as usize;
        let base = col - occ * stride;
        for &(r, v) in &columns[occ] {
            triplets.push((base + r * stride, col, v));
        }
    }
    Ok(ComplexOperator::from_triplets(basis.dim(), basis.tag(), triplets))
}

fn check_mode(mode: ModeIndex, basis: &FockBasis) -> Result<()> {
    if mode.position == 0 || mode.position > basis.nu() || mode.state == 0 || mode.state > basis.m() {
        return Err(GentileError::InvalidParameter(format!(
            "mode (position {}, state {}) outside nu={}, m={}",
            mode.position,
            mode.state,
            basis.nu(),
            basis.m()
        )));
    }
    Ok(())
}

/// A product of ladder letters, written left to right as printed and applied
/// right to left.
#[derive(Debug, Clone, PartialEq)]
pub struct Word(pub Vec<(Ladder, ModeIndex)>);

impl Word {
    pub fn new(letters: impl IntoIterator<Item = (Ladder, ModeIndex)>) -> Self {
        Self(letters.into_iter().collect())
    }

    /// Applies the word to an occupation vector in place; returns the
    /// amplitude, or `None` if any letter annihilates the state.
    pub fn apply(&self, occupations: &mut [u32], m: usize, order: GentileOrder) -> Option<Complex64> {
        let mut amp = Complex64::new(1.0, 0.0);
        for &(letter, mode) in self.0.iter().rev() {
            let slot = &mut occupations[mode.flat(m)];
            let (next, a) = letter.act(*slot, order)?;
            *slot = next;
            amp *= a;
        }
        Some(amp)
    }
}

/// Assembles `Σ coef·word` directly on any basis (full or sector) by applying
/// each word to each basis state. Results landing outside the basis are
/// dropped and their largest magnitude is returned as the leakage.
pub fn assemble_words(terms: &[(Complex64, Word)], basis: &FockBasis) -> Result<(ComplexOperator, f64)> {
    for (_, w) in terms {
        for &(_, mode) in &w.0 {
            check_mode(mode, basis)?;
        }
    }
    let order = basis.order();
    let m = basis.m();
    let mut leakage = 0.0f64;
    let mut scratch = vec![0u32; basis.mode_count()];
    let mut triplets = Vec::new();
    for (col, state) in basis.iter().enumerate() {
        for (coef, word) in terms {
            scratch.copy_from_slice(state);
            if let Some(amp) = word.apply(&mut scratch, m, order) {
                let value = coef * amp;
                match basis.lookup(&scratch) {
                    Some(row) => triplets.push((row, col, value)),
                    None => leakage = leakage.max(value.norm()),
                }
            }
        }
    }
    Ok((ComplexOperator::from_triplets(basis.dim(), basis.tag(), triplets), leakage))
}
