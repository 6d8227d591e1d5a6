//! Closed-form scalars of Gentile statistics: q-numbers, the occupation
//! functions `f` and `g`, and the coupling `J`.
//!
//! All angles are expressed through `x = π/(n+1)`; the phase is
//! `q = e^{2ix}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GentileError, Result};

/// Finite stand-in for the Bose limit `n → ∞`.
pub const BOSE_PROXY_N: u32 = 1_000_000;

/// The statistics parameter: maximum occupation `n` of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct GentileOrder {
    n: u32,
}

impl GentileOrder {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(GentileError::InvalidOrder(0));
        }
        Ok(Self { n })
    }

    pub fn fermi() -> Self {
        Self { n: 1 }
    }

    pub fn bose_proxy() -> Self {
        Self { n: BOSE_PROXY_N }
    }

    #[inline]
    pub fn n(self) -> u32 {
        self.n
    }

    /// Single-mode Hilbert space dimension `n + 1`.
    #[inline]
    pub fn ladder_dim(self) -> usize {
        self.n as usize + 1
    }

    /// `π/(n+1)`.
    #[inline]
    pub fn angle(self) -> f64 {
        PI / (f64::from(self.n) + 1.0)
    }

    /// `q = e^{i2π/(n+1)}`, the n-bracket phase.
    #[inline]
    pub fn phase(self) -> Complex64 {
        Complex64::from_polar(1.0, 2.0 * self.angle())
    }

    /// `e^{iπ/(n+1)}`, the square root of [`phase`](Self::phase).
    #[inline]
    pub fn half_phase(self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle())
    }

    fn check_occupation(self, occupation: u32) -> Result<()> {
        if occupation > self.n {
            Err(GentileError::OccupationOutOfRange {
                occupation,
                n: self.n,
            })
        } else {
            Ok(())
        }
    }
}

impl TryFrom<u32> for GentileOrder {
    type Error = GentileError;

    fn try_from(n: u32) -> Result<Self> {
        Self::new(n)
    }
}

impl From<GentileOrder> for u32 {
    fn from(order: GentileOrder) -> u32 {
        order.n
    }
}

/// The q-number `⟨ν⟩_n = (1 − q^ν)/(1 − q)`.
///
/// Evaluated as `e^{i(ν−1)x}·sin(νx)/sin(x)`, which is the same geometric sum
/// without the `1 − q` cancellation at large `n`. Any `ν` with `q^ν = 1`
/// (in particular `ν = 0` and `ν = n+1`) returns an exact zero.
pub fn bracket_nu(nu: u32, order: GentileOrder) -> Complex64 {
    let period = u64::from(order.n) + 1;
    if u64::from(nu) % period == 0 {
        return Complex64::new(0.0, 0.0);
    }
    if nu == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let x = order.angle();
    let nu = f64::from(nu);
    let modulus = (nu * x).sin() / x.sin();
    Complex64::from_polar(1.0, (nu - 1.0) * x) * modulus
}

// g by the trig formula, valid past the ladder top.
fn g_unchecked(occupation: u32, order: GentileOrder) -> f64 {
    let x = order.angle();
    (f64::from(occupation) * x).sin() / x.sin()
}

/// `g(N) = csc(π/(n+1))·sin(Nπ/(n+1))`, the spectrum of `a†a`.
pub fn occ_g(occupation: u32, order: GentileOrder) -> Result<f64> {
    order.check_occupation(occupation)?;
    Ok(g_unchecked(occupation, order))
}

/// `f(N) = csc(x)(cos x − 1)sin(Nx) + cos(Nx)`, the spectrum of `aa† − a†a`.
pub fn occ_f(occupation: u32, order: GentileOrder) -> Result<f64> {
    order.check_occupation(occupation)?;
    let x = order.angle();
    let nx = f64::from(occupation) * x;
    Ok((x.cos() - 1.0) / x.sin() * nx.sin() + nx.cos())
}

/// The theorem's coupling
/// `J(N) = −2 csc²(x)·sin(x/2)·sin(Nx)·sin((2N+n)x/2)`.
pub fn coupling_j(occupation: u32, order: GentileOrder) -> Result<f64> {
    order.check_occupation(occupation)?;
    let x = order.angle();
    let big_n = f64::from(occupation);
    let n = f64::from(order.n);
    let csc = 1.0 / x.sin();
    Ok(-2.0 * csc * csc * (0.5 * x).sin() * (big_n * x).sin() * ((2.0 * big_n + n) * 0.5 * x).sin())
}

/// `g(N+1) − g(N)` with `g` continued by its trig formula; the reference
/// value `occ_f` must agree with.
pub fn g_difference(occupation: u32, order: GentileOrder) -> Result<f64> {
    order.check_occupation(occupation)?;
    Ok(g_unchecked(occupation + 1, order) - g_unchecked(occupation, order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn ord(n: u32) -> GentileOrder {
        GentileOrder::new(n).unwrap()
    }

    #[test]
    fn order_rejects_zero() {
        assert_eq!(GentileOrder::new(0), Err(GentileError::InvalidOrder(0)));
    }

    #[test]
    fn phase_is_a_root_of_unity() {
        for n in [1, 2, 3, 7, 50, BOSE_PROXY_N] {
            let o = ord(n);
            let q = o.phase();
            assert!((q.norm() - 1.0).abs() < 1e-15);
            // q^(n+1) via the angle, avoiding a million multiplications
            let full_turn = Complex64::from_polar(1.0, 2.0 * o.angle() * (f64::from(n) + 1.0));
            assert!((full_turn - 1.0).norm() < 1e-12);
            if n <= 50 {
                assert!((q.powu(n + 1) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn bracket_examples() {
        for n in [1, 2, 5, BOSE_PROXY_N] {
            assert_eq!(bracket_nu(0, ord(n)), Complex64::new(0.0, 0.0));
            assert_eq!(bracket_nu(1, ord(n)), Complex64::new(1.0, 0.0));
            assert_eq!(bracket_nu(n + 1, ord(n)), Complex64::new(0.0, 0.0));
        }
        // 1 + q with q = e^{i2π/3}, by hand
        let expected = Complex64::new(0.5, 3f64.sqrt() / 2.0);
        assert!((bracket_nu(2, ord(2)) - expected).norm() < 1e-15);
    }

    #[test]
    fn bracket_matches_geometric_sum() {
        // independent route: Σ_{j<ν} q^j
        for n in 1..=9u32 {
            let q = ord(n).phase();
            for nu in 0..=n + 1 {
                let sum: Complex64 = (0..nu).map(|j| q.powu(j)).sum();
                assert!((bracket_nu(nu, ord(n)) - sum).norm() < 1e-12, "n={n} nu={nu}");
            }
        }
    }

    #[test]
    fn g_examples() {
        assert_eq!(occ_g(0, ord(4)).unwrap(), 0.0);
        assert_abs_diff_eq!(occ_g(1, ord(4)).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(occ_g(2, ord(3)).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
        assert!(matches!(
            occ_g(4, ord(3)),
            Err(GentileError::OccupationOutOfRange { occupation: 4, n: 3 })
        ));
    }

    #[test]
    fn f_examples() {
        for n in [1, 2, 9] {
            assert_abs_diff_eq!(occ_f(0, ord(n)).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(occ_f(1, ord(1)).unwrap(), -1.0, epsilon = 1e-15);
        assert!(occ_f(2, ord(1)).is_err());
    }

    #[test]
    fn f_converges_to_one_at_large_n() {
        // convergence oracle: distance to +1 shrinks as n grows
        let dists: Vec<f64> = [100u32, 10_000, BOSE_PROXY_N]
            .iter()
            .map(|&n| (occ_f(1, ord(n)).unwrap() - 1.0).abs())
            .collect();
        assert!(dists[0] > dists[1] && dists[1] > dists[2]);
        assert!(dists[2] < 1e-5);
    }

    #[test]
    fn j_examples() {
        for n in [1, 3, 8] {
            assert_eq!(coupling_j(0, ord(n)).unwrap(), 0.0);
        }
        assert_abs_diff_eq!(coupling_j(1, ord(1)).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coupling_j(1, ord(BOSE_PROXY_N)).unwrap(), -1.0, epsilon = 1e-5);
        assert!(coupling_j(2, ord(1)).is_err());
    }

    #[test]
    fn bose_proxy_limits() {
        let o = GentileOrder::bose_proxy();
        for big_n in 0..=3u32 {
            let j = coupling_j(big_n, o).unwrap();
            assert!((j + f64::from(big_n)).abs() < 1e-4, "J({big_n}) = {j}");
            let b = bracket_nu(big_n, o);
            assert!((b - f64::from(big_n)).norm() < 1e-4, "<{big_n}> = {b}");
        }
    }

    proptest! {
        #[test]
        fn modulus_of_bracket_is_g(n in 1u32..200, frac in 0.0f64..=1.0) {
            let o = ord(n);
            let nu = (frac * f64::from(n)).round() as u32;
            prop_assert!((bracket_nu(nu, o).norm() - occ_g(nu, o).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn f_is_forward_difference_of_g(n in 1u32..200, frac in 0.0f64..=1.0) {
            let o = ord(n);
            let big_n = (frac * f64::from(n)).round() as u32;
            let f = occ_f(big_n, o).unwrap();
            let d = g_difference(big_n, o).unwrap();
            prop_assert!((f - d).abs() < 1e-12, "n={} N={} f={} d={}", n, big_n, f, d);
        }
    }
}
