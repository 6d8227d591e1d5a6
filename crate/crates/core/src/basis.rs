//! Occupation-number basis over `ν` positions × `m` states.
//!
//! Modes are flattened position-major: mode `(i, k)` (1-based) sits at
//! `(i−1)·m + (k−1)`. Basis states are ordered lexicographically in the
//! flattened occupation vector, ascending.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GentileError, Result};
use crate::scalars::GentileOrder;

/// Default ceiling on basis dimension.
pub const DEFAULT_BASIS_CAP: usize = 1 << 20;

/// A single `(position, state)` mode, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub position: usize,
    pub state: usize,
}

impl ModeIndex {
    pub fn new(position: usize, state: usize) -> Self {
        Self { position, state }
    }

    #[inline]
    pub fn flat(self, m: usize) -> usize {
        (self.position - 1) * m + (self.state - 1)
    }

    #[inline]
    pub fn from_flat(flat: usize, m: usize) -> Self {
        Self {
            position: flat / m + 1,
            state: flat % m + 1,
        }
    }
}

/// Which part of the Fock space a basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Subspace {
    Full,
    /// Every position holds exactly this many particles.
    Sector(u32),
}

impl Subspace {
    /// The spin realization: one particle per position.
    pub const SPIN: Subspace = Subspace::Sector(1);

    /// Per-position total fixed by this subspace, if any.
    pub fn fixed_total(self) -> Option<u32> {
        match self {
            Subspace::Full => None,
            Subspace::Sector(t) => Some(t),
        }
    }
}

impl fmt::Display for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subspace::Full => f.write_str("full"),
            Subspace::Sector(t) => write!(f, "sector:{t}"),
        }
    }
}

impl FromStr for Subspace {
    type Err = GentileError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full" {
            return Ok(Subspace::Full);
        }
        if let Some(t) = s.strip_prefix("sector:") {
            return t
                .parse()
                .map(Subspace::Sector)
                .map_err(|_| GentileError::InvalidParameter(format!("bad sector total in {s:?}")));
        }
        Err(GentileError::InvalidParameter(format!(
            "subspace must be `full` or `sector:<t>`, got {s:?}"
        )))
    }
}

impl From<Subspace> for String {
    fn from(s: Subspace) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Subspace {
    type Error = GentileError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Identifies the space an operator acts on; operators only combine when
/// their tags agree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisTag {
    pub n: u32,
    pub nu: usize,
    pub m: usize,
    pub subspace: Subspace,
}

impl BasisTag {
    /// The `(n+1)`-dimensional single-mode ladder.
    pub fn single_mode(order: GentileOrder) -> Self {
        Self {
            n: order.n(),
            nu: 1,
            m: 1,
            subspace: Subspace::Full,
        }
    }
}

/// Occupations `N_k^i` of every mode, flattened position-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OccupationState(Vec<u32>);

impl OccupationState {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self(occupations)
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, mode: ModeIndex, m: usize) -> u32 {
        self.0[mode.flat(m)]
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl std::ops::Deref for OccupationState {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

#[derive(Debug, Clone)]
enum Lookup {
    /// Full space: the ordinal is the occupation vector read in base `n+1`.
    MixedRadix,
    Table(HashMap<Box<[u32]>, usize>),
}

/// An enumerated, indexed occupation basis. Immutable once built.
#[derive(Debug, Clone)]
pub struct FockBasis {
    nu: usize,
    m: usize,
    order: GentileOrder,
    subspace: Subspace,
    dim: usize,
    states: Vec<u32>,
    lookup: Lookup,
}

impl FockBasis {
    /// Enumerates with the default cap of `2^20` states.
    pub fn enumerate(nu: usize, m: usize, order: GentileOrder, subspace: Subspace) -> Result<Self> {
        Self::enumerate_with_cap(nu, m, order, subspace, DEFAULT_BASIS_CAP)
    }

    pub fn enumerate_with_cap(
        nu: usize,
        m: usize,
        order: GentileOrder,
        subspace: Subspace,
        cap: usize,
    ) -> Result<Self> {
        if nu == 0 || m == 0 {
            return Err(GentileError::InvalidParameter(format!(
                "need nu >= 1 and m >= 1, got nu={nu}, m={m}"
            )));
        }
        let n = order.n();
        let dim = Self::dimension(nu, m, order, subspace)?;
        let sizing = |dim| GentileError::Sizing { n, nu, m, dim, cap };
        let dim = match dim {
            Some(d) if d <= cap as u128 => d as usize,
            other => return Err(sizing(other)),
        };

        let modes = nu * m;
        match subspace {
            Subspace::Full => {
                let radix = n + 1;
                let mut states = vec![0u32; dim * modes];
                let mut current = vec![0u32; modes];
                for idx in 0..dim {
                    states[idx * modes..(idx + 1) * modes].copy_from_slice(&current);
                    // odometer, last mode fastest
                    for slot in current.iter_mut().rev() {
                        *slot += 1;
                        if *slot < radix {
                            break;
                        }
                        *slot = 0;
                    }
                }
                Ok(Self {
                    nu,
                    m,
                    order,
                    subspace,
                    dim,
                    states,
                    lookup: Lookup::MixedRadix,
                })
            }
            Subspace::Sector(total) => {
                let local = compositions(total, m, n);
                let mut states = Vec::with_capacity(dim * modes);
                let mut digits = vec![0usize; nu];
                for _ in 0..dim {
                    for &d in &digits {
                        states.extend_from_slice(&local[d]);
                    }
                    for slot in digits.iter_mut().rev() {
                        *slot += 1;
                        if *slot < local.len() {
                            break;
                        }
                        *slot = 0;
                    }
                }
                let table = states
                    .chunks_exact(modes)
                    .enumerate()
                    .map(|(i, s)| (s.to_vec().into_boxed_slice(), i))
                    .collect();
                Ok(Self {
                    nu,
                    m,
                    order,
                    subspace,
                    dim,
                    states,
                    lookup: Lookup::Table(table),
                })
            }
        }
    }

    /// Basis dimension without enumerating; `None` on integer overflow.
    pub fn dimension(nu: usize, m: usize, order: GentileOrder, subspace: Subspace) -> Result<Option<u128>> {
        let n = order.n();
        match subspace {
            Subspace::Full => {
                let exp = u32::try_from(nu * m).ok();
                Ok(exp.and_then(|e| (u128::from(n) + 1).checked_pow(e)))
            }
            Subspace::Sector(total) => {
                if u128::from(total) > u128::from(n) * m as u128 {
                    return Err(GentileError::InvalidSector { total, n, m });
                }
                let per_position = count_compositions(total, m, n);
                let exp = u32::try_from(nu).ok();
                Ok(exp.and_then(|e| per_position.checked_pow(e)))
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn order(&self) -> GentileOrder {
        self.order
    }

    #[inline]
    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.nu * self.m
    }

    pub fn is_full(&self) -> bool {
        self.subspace == Subspace::Full
    }

    pub fn tag(&self) -> BasisTag {
        BasisTag {
            n: self.order.n(),
            nu: self.nu,
            m: self.m,
            subspace: self.subspace,
        }
    }

    /// Occupations of the `index`-th state. Panics when out of range.
    #[inline]
    pub fn state(&self, index: usize) -> &[u32] {
        let w = self.mode_count();
        &self.states[index * w..(index + 1) * w]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.states.chunks_exact(self.mode_count())
    }

    /// Ordinal of an occupation vector, or `None` when it is outside the basis.
    pub fn lookup(&self, occupations: &[u32]) -> Option<usize> {
        if occupations.len() != self.mode_count() {
            return None;
        }
        match &self.lookup {
            Lookup::MixedRadix => {
                let radix = self.order.n() as usize + 1;
                let mut idx = 0usize;
                for &o in occupations {
                    if o as usize >= radix {
                        return None;
                    }
                    idx = idx * radix + o as usize;
                }
                Some(idx)
            }
            Lookup::Table(t) => t.get(occupations).copied(),
        }
    }

    /// Ordinal distance between neighbouring values of one mode in the full
    /// space; `None` for sector bases.
    pub fn stride(&self, flat_mode: usize) -> Option<usize> {
        match self.lookup {
            Lookup::MixedRadix => {
                let radix = self.order.n() as usize + 1;
                Some(radix.pow((self.mode_count() - 1 - flat_mode) as u32))
            }
            Lookup::Table(_) => None,
        }
    }

    pub fn state_to_index(&self, state: &OccupationState) -> Result<usize> {
        let occ = state.as_slice();
        if occ.len() != self.mode_count() {
            return Err(GentileError::NotInBasis(format!(
                "expected {} occupations, got {}",
                self.mode_count(),
                occ.len()
            )));
        }
        if let Some(&o) = occ.iter().find(|&&o| o > self.order.n()) {
            return Err(GentileError::OccupationOutOfRange {
                occupation: o,
                n: self.order.n(),
            });
        }
        self.lookup(occ).ok_or_else(|| {
            GentileError::NotInBasis(format!("{occ:?} violates the {} constraint", self.subspace))
        })
    }

    pub fn index_to_state(&self, index: usize) -> Result<OccupationState> {
        if index >= self.dim {
            return Err(GentileError::IndexOutOfRange { index, dim: self.dim });
        }
        Ok(OccupationState::new(self.state(index).to_vec()))
    }

    /// Per-position particle totals `Σ_k N_k^i` of an occupation vector.
    pub fn position_totals(&self, occupations: &[u32]) -> Vec<u32> {
        occupations.chunks_exact(self.m).map(|c| c.iter().sum()).collect()
    }
}

/// Compositions of `total` into `parts` entries each ≤ `cap`, ascending lex.
fn compositions(total: u32, parts: usize, cap: u32) -> Vec<Vec<u32>> {
    fn go(total: u32, parts: usize, cap: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            if total <= cap {
                prefix.push(total);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for first in 0..=total.min(cap) {
            prefix.push(first);
            go(total - first, parts - 1, cap, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, parts, cap, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn count_compositions(total: u32, parts: usize, cap: u32) -> u128 {
    // ways[s] = number of ways to reach sum s with the parts placed so far
    let t = total as usize;
    let mut ways = vec![0u128; t + 1];
    ways[0] = 1;
    for _ in 0..parts {
        let mut next = vec![0u128; t + 1];
        for (s, &w) in ways.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let top = (t - s).min(cap as usize);
            for v in 0..=top {
                next[s + v] += w;
            }
        }
        ways = next;
    }
    ways[t]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ord(n: u32) -> GentileOrder {
        GentileOrder::new(n).unwrap()
    }

    // brute force: every vector in [0, n]^{νm}, filtered by the sector rule
    fn brute(nu: usize, m: usize, n: u32, sector: Option<u32>) -> Vec<Vec<u32>> {
        let modes = nu * m;
        let total = (n as usize + 1).pow(modes as u32);
        let mut out = Vec::new();
        for mut code in 0..total {
            let mut v = vec![0u32; modes];
            for slot in v.iter_mut().rev() {
                *slot = (code % (n as usize + 1)) as u32;
                code /= n as usize + 1;
            }
            let ok = match sector {
                None => true,
                Some(t) => v.chunks(m).all(|c| c.iter().sum::<u32>() == t),
            };
            if ok {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn mode_flattening_round_trips() {
        for m in 1..5 {
            for flat in 0..20 {
                let mode = ModeIndex::from_flat(flat, m);
                assert_eq!(mode.flat(m), flat);
                assert!(mode.state >= 1 && mode.state <= m);
            }
        }
    }

    #[test]
    fn dimension_examples() {
        let full = FockBasis::enumerate(2, 2, ord(1), Subspace::Full).unwrap();
        assert_eq!(full.dim(), 16);
        let spin = FockBasis::enumerate(2, 2, ord(1), Subspace::SPIN).unwrap();
        assert_eq!(spin.dim(), 4);
        let b = FockBasis::enumerate(3, 2, ord(2), Subspace::SPIN).unwrap();
        assert_eq!(b.dim(), brute(3, 2, 2, Some(1)).len());
        assert_eq!(b.dim(), 8);
    }

    #[test]
    fn grid_matches_brute_force() {
        for n in 1..=3 {
            for nu in 1..=3 {
                for m in 1..=3 {
                    if (n as usize + 1).pow((nu * m) as u32) > 1 << 16 {
                        continue;
                    }
                    let full = FockBasis::enumerate(nu, m, ord(n), Subspace::Full).unwrap();
                    let oracle = brute(nu, m, n, None);
                    assert_eq!(full.dim(), (n as usize + 1).pow((nu * m) as u32));
                    assert!(full.iter().eq(oracle.iter().map(|v| v.as_slice())));

                    for t in 0..=2 {
                        let sector = FockBasis::enumerate(nu, m, ord(n), Subspace::Sector(t));
                        if t > n * m as u32 {
                            assert!(matches!(sector, Err(GentileError::InvalidSector { .. })));
                            continue;
                        }
                        let sector = sector.unwrap();
                        let oracle = brute(nu, m, n, Some(t));
                        assert!(sector.iter().eq(oracle.iter().map(|v| v.as_slice())), "n={n} nu={nu} m={m} t={t}");
                        if t == 1 {
                            assert_eq!(sector.dim(), m.pow(nu as u32));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sector_is_subsequence_of_full() {
        let full = FockBasis::enumerate(3, 2, ord(2), Subspace::Full).unwrap();
        let sector = FockBasis::enumerate(3, 2, ord(2), Subspace::SPIN).unwrap();
        let positions: Vec<usize> = sector.iter().map(|s| full.lookup(s).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn endpoints_and_unary_ladder() {
        let full = FockBasis::enumerate(2, 2, ord(2), Subspace::Full).unwrap();
        assert_eq!(full.index_to_state(0).unwrap().as_slice(), &[0, 0, 0, 0]);
        assert_eq!(full.index_to_state(full.dim() - 1).unwrap().as_slice(), &[2, 2, 2, 2]);
        let unary = FockBasis::enumerate(1, 1, ord(2), Subspace::Full).unwrap();
        assert_eq!(unary.state_to_index(&OccupationState::new(vec![2])).unwrap(), 2);
    }

    #[test]
    fn single_occupancy_patterns() {
        let spin = FockBasis::enumerate(2, 2, ord(1), Subspace::SPIN).unwrap();
        let got: Vec<Vec<u32>> = (0..spin.dim())
            .map(|i| spin.index_to_state(i).unwrap().into_inner())
            .collect();
        assert_eq!(
            got,
            vec![vec![0, 1, 0, 1], vec![0, 1, 1, 0], vec![1, 0, 0, 1], vec![1, 0, 1, 0]]
        );
    }

    #[test]
    fn membership_errors() {
        let spin = FockBasis::enumerate(2, 2, ord(1), Subspace::SPIN).unwrap();
        assert!(matches!(
            spin.state_to_index(&OccupationState::new(vec![2, 0, 0, 1])),
            Err(GentileError::OccupationOutOfRange { .. })
        ));
        assert!(matches!(
            spin.state_to_index(&OccupationState::new(vec![1, 1, 0, 1])),
            Err(GentileError::NotInBasis(_))
        ));
        assert!(matches!(spin.index_to_state(4), Err(GentileError::IndexOutOfRange { index: 4, dim: 4 })));
    }

    #[test]
    fn sizing_error_names_parameters() {
        let err = FockBasis::enumerate(4, 3, ord(3), Subspace::Full).unwrap_err();
        assert_eq!(
            err,
            GentileError::Sizing { n: 3, nu: 4, m: 3, dim: Some(4u128.pow(12)), cap: DEFAULT_BASIS_CAP }
        );
        let err = FockBasis::enumerate(4, 2, GentileOrder::bose_proxy(), Subspace::Full).unwrap_err();
        assert!(matches!(err, GentileError::Sizing { dim: None, .. }));
        // the spin sector at the Bose proxy stays small
        let spin = FockBasis::enumerate(4, 3, GentileOrder::bose_proxy(), Subspace::SPIN).unwrap();
        assert_eq!(spin.dim(), 81);
    }

    #[test]
    fn subspace_parses() {
        assert_eq!("full".parse::<Subspace>().unwrap(), Subspace::Full);
        assert_eq!("sector:2".parse::<Subspace>().unwrap(), Subspace::Sector(2));
        assert!("sector:x".parse::<Subspace>().is_err());
        assert_eq!(Subspace::SPIN.to_string(), "sector:1");
    }

    proptest! {
        #[test]
        fn index_round_trip(n in 1u32..4, nu in 1usize..4, m in 1usize..4, sector in proptest::bool::ANY, pick in 0usize..100_000) {
            let subspace = if sector { Subspace::SPIN } else { Subspace::Full };
            let basis = FockBasis::enumerate(nu, m, ord(n), subspace);
            prop_assume!(basis.is_ok());
            let basis = basis.unwrap();
            let idx = pick % basis.dim();
            let state = basis.index_to_state(idx).unwrap();
            prop_assert_eq!(basis.state_to_index(&state).unwrap(), idx);
        }
    }
}
