//! Linear combinations of operator products, evaluated either as an
//! assembled sparse matrix (max entry magnitude) or matrix-free on seeded
//! random vectors (max `‖Rv‖∞ / ‖v‖∞`).

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::basis::BasisTag;
use crate::engine::sparse::ComplexOperator;
use crate::error::{GentileError, Result};

/// Fewest sample vectors accepted in sampled mode.
pub const MIN_SAMPLES: usize = 32;
pub const DEFAULT_SAMPLES: usize = 64;
pub const DEFAULT_SEED: u64 = 42;

/// How a residual norm is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mode {
    Dense,
    Sampled { samples: usize, seed: u64 },
}

impl Mode {
    pub fn sampled_default() -> Self {
        Mode::Sampled {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(self) -> Result<Self> {
        match self {
            Mode::Sampled { samples, .. } if samples < MIN_SAMPLES => Err(GentileError::InvalidParameter(format!(
                "sampled mode needs at least {MIN_SAMPLES} vectors, got {samples}"
            ))),
            m => Ok(m),
        }
    }
}

/// `Σ coef · F₁F₂⋯F_r`, with factors applied right to left.
pub struct Expr<'a> {
    dim: usize,
    tag: BasisTag,
    terms: Vec<(Complex64, Vec<&'a ComplexOperator>)>,
}

impl<'a> Expr<'a> {
    pub fn new(dim: usize, tag: BasisTag) -> Self {
        Self {
            dim,
            tag,
            terms: Vec::new(),
        }
    }

    pub fn like(op: &ComplexOperator) -> Self {
        Self::new(op.dim(), op.tag())
    }

    pub fn term(mut self, coef: impl Into<Complex64>, factors: &[&'a ComplexOperator]) -> Self {
        self.terms.push((coef.into(), factors.to_vec()));
        self
    }

    /// Adds `X·Y − s·Y·X`.
    pub fn bracket(self, x: &'a ComplexOperator, y: &'a ComplexOperator, s: Complex64) -> Self {
        self.term(1.0, &[x, y]).term(-s, &[y, x])
    }

    pub fn commutator(self, x: &'a ComplexOperator, y: &'a ComplexOperator) -> Self {
        self.bracket(x, y, Complex64::new(1.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn to_operator(&self) -> Result<ComplexOperator> {
        let mut acc = ComplexOperator::zeros(self.dim, self.tag);
        for (coef, factors) in &self.terms {
            let mut product = ComplexOperator::identity(self.dim, self.tag);
            for f in factors {
                product = product.matmul(f)?;
            }
            acc = acc.add_scaled(*coef, &product)?;
        }
        Ok(acc)
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(GentileError::DimensionMismatch {
                left: self.dim,
                right: v.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        for (coef, factors) in &self.terms {
            let mut w = v.to_vec();
            for f in factors.iter().rev() {
                if f.dim() != self.dim || f.tag() != self.tag {
                    return Err(GentileError::BasisMismatch);
                }
                w = f.apply(&w);
            }
            for (o, x) in out.iter_mut().zip(w) {
                *o += coef * x;
            }
        }
        Ok(out)
    }
}

fn sup_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `k` complex vectors with independent entries of unit variance.
pub fn sample_vectors(dim: usize, samples: usize, seed: u64) -> Vec<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    (0..samples)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(scale * re, scale * im)
                })
                .collect()
        })
        .collect()
}

/// 64-bit FNV-1a, used to derive per-task seeds that do not depend on
/// scheduling order.
pub fn stable_hash(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Residual norms for one task; sample vectors are drawn per dimension from
/// the task seed.
pub struct Evaluator {
    mode: Mode,
    task_seed: u64,
    cache: std::cell::RefCell<std::collections::HashMap<usize, std::rc::Rc<Vec<Vec<Complex64>>>>>,
}

impl Evaluator {
    pub fn new(mode: Mode, task_key: &str) -> Self {
        let task_seed = match mode {
            Mode::Dense => 0,
            Mode::Sampled { seed, .. } => seed ^ stable_hash(task_key.as_bytes()),
        };
        Self {
            mode,
            task_seed,
            cache: Default::default(),
        }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    fn vectors(&self, dim: usize, samples: usize) -> std::rc::Rc<Vec<Vec<Complex64>>> {
        self.cache
            .borrow_mut()
            .entry(dim)
            .or_insert_with(|| std::rc::Rc::new(sample_vectors(dim, samples, self.task_seed ^ dim as u64)))
            .clone()
    }

    pub fn norm(&self, expr: &Expr<'_>) -> Result<f64> {
        match self.mode {
            Mode::Dense => Ok(expr.to_operator()?.max_abs()),
            Mode::Sampled { samples, .. } => {
                let mut worst = 0.0f64;
                for v in self.vectors(expr.dim(), samples).iter() {
                    let denom = sup_norm(v);
                    if denom > 0.0 {
                        worst = worst.max(sup_norm(&expr.apply(v)?) / denom);
                    }
                }
                Ok(worst)
            }
        }
    }

    /// Largest norm over several expressions; zero for an empty set.
    pub fn max_norm<'e>(&self, exprs: impl IntoIterator<Item = &'e Expr<'e>>) -> Result<f64> {
        let mut worst = 0.0f64;
        for e in exprs {
            worst = worst.max(self.norm(e)?);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::Subspace;

    fn tag() -> BasisTag {
        BasisTag { n: 1, nu: 1, m: 2, subspace: Subspace::Full }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matrix_and_vector_evaluation_agree() {
        let x = ComplexOperator::from_triplets(3, tag(), [(0, 1, c(1.0, 2.0)), (2, 0, c(0.0, -1.0)), (1, 1, c(3.0, 0.0))]);
        let y = ComplexOperator::from_triplets(3, tag(), [(1, 2, c(0.5, 0.0)), (0, 0, c(-1.0, 1.0))]);
        let e = Expr::like(&x).bracket(&x, &y, c(0.0, 1.0)).term(2.0, &[&y]);
        let m = e.to_operator().unwrap();
        for v in sample_vectors(3, 4, 7) {
            let direct = m.apply(&v);
            let lazy = e.apply(&v).unwrap();
            for (a, b) in direct.iter().zip(&lazy) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sampled_norm_is_bounded_by_row_sum() {
        let x = ComplexOperator::from_triplets(3, tag(), [(0, 1, c(1.0, 0.0)), (0, 2, c(1.0, 0.0)), (2, 2, c(0.0, 0.5))]);
        let e = Expr::like(&x).term(1.0, &[&x]);
        let sampled = Evaluator::new(Mode::sampled_default(), "t").norm(&e).unwrap();
        let dense = Evaluator::new(Mode::Dense, "t").norm(&e).unwrap();
        assert_eq!(dense, 1.0);
        assert!(sampled <= x.max_row_sum() + 1e-12);
        assert!(sampled > 0.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_vectors(5, 3, 42), sample_vectors(5, 3, 42));
        assert_ne!(sample_vectors(5, 3, 42), sample_vectors(5, 3, 43));
        let a = Evaluator::new(Mode::sampled_default(), "key");
        let b = Evaluator::new(Mode::sampled_default(), "key");
        assert_eq!(a.vectors(4, 64), b.vectors(4, 64));
    }

    #[test]
    fn samples_have_unit_variance() {
        let v = sample_vectors(20_000, 1, 1).remove(0);
        let var = v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64;
        assert!((var - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn rejects_too_few_samples() {
        assert!(Mode::Sampled { samples: 31, seed: 0 }.validate().is_err());
        assert!(Mode::Sampled { samples: 32, seed: 0 }.validate().is_ok());
    }
}
