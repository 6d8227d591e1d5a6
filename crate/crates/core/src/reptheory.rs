//! Integer partitions and the unitary-group data attached to them: Casimir
//! eigenvalues `S_p` and Weyl dimensions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GentileError, Result};

/// A weakly decreasing tuple of nonnegative integers, possibly zero-padded.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(GentileError::InvalidParameter(format!(
                "partition must be weakly decreasing: {parts:?}"
            )));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.0.iter().take_while(|&&p| p > 0).count()
    }

    /// The parts zero-padded (or zero-trimmed) to exactly `m` entries.
    pub fn padded(&self, m: usize) -> Result<Vec<u32>> {
        if self.length() > m {
            return Err(GentileError::InvalidParameter(format!(
                "partition {self} has more than m={m} nonzero parts"
            )));
        }
        let mut parts: Vec<u32> = self.0.iter().copied().take(m).collect();
        parts.resize(m, 0);
        Ok(parts)
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = GentileError;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Vec<u32> {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// All partitions of `total` into at most `max_parts` parts, reverse
/// lexicographic, each zero-padded to `max_parts` entries.
pub fn partitions_of(total: u32, max_parts: usize) -> Vec<Partition> {
    fn go(remaining: u32, cap: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        let mut first = remaining.min(cap);
        // the rest must fit into slots-1 parts no bigger than `first`
        while first >= 1 && u64::from(first) * slots as u64 >= u64::from(remaining) {
            prefix.push(first);
            go(remaining - first, first, slots - 1, prefix, out);
            prefix.pop();
            first -= 1;
        }
    }
    if max_parts == 0 {
        return Vec::new();
    }
    let mut raw = Vec::new();
    go(total, total, max_parts, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|mut p| {
            p.resize(max_parts, 0);
            Partition(p)
        })
        .collect()
}

/// Which Casimir eigenvalue statement to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CasimirVariant {
    /// `⟨C_p⟩ = S_p`.
    Raw,
    /// `⟨C₁⟩ = S₁`, `⟨C₂⟩ = S₂ − (m−1)S₁`.
    Shifted,
}

impl CasimirVariant {
    pub const ALL: [CasimirVariant; 2] = [CasimirVariant::Raw, CasimirVariant::Shifted];

    pub fn as_str(self) -> &'static str {
        match self {
            CasimirVariant::Raw => "raw",
            CasimirVariant::Shifted => "shifted",
        }
    }
}

impl fmt::Display for CasimirVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `S_p = Σ_{i=1}^{m} [(a_i + m − i)^p − (m − i)^p]`.
pub fn casimir_sp(p: u32, partition: &Partition, m: usize) -> Result<i128> {
    let parts = partition.padded(m)?;
    let overflow = || GentileError::InvalidParameter(format!("S_{p} overflows for {partition}"));
    let mut acc: i128 = 0;
    for (idx, &a) in parts.iter().enumerate() {
        let shift = (m - 1 - idx) as i128;
        let hi = (i128::from(a) + shift).checked_pow(p).ok_or_else(overflow)?;
        let lo = shift.checked_pow(p).ok_or_else(overflow)?;
        acc = acc.checked_add(hi - lo).ok_or_else(overflow)?;
    }
    Ok(acc)
}

/// Predicted eigenvalue of `C_p`, `p ∈ {1, 2}`, under `variant`.
pub fn casimir_value(p: u32, partition: &Partition, m: usize, variant: CasimirVariant) -> Result<i128> {
    match (p, variant) {
        (1, _) => casimir_sp(1, partition, m),
        (2, CasimirVariant::Raw) => casimir_sp(2, partition, m),
        (2, CasimirVariant::Shifted) => {
            Ok(casimir_sp(2, partition, m)? - (m as i128 - 1) * casimir_sp(1, partition, m)?)
        }
        (p, _) => Err(GentileError::UnsupportedOrder(p)),
    }
}

/// Dimension of the `U(m)` irrep labelled by `partition`:
/// `Π_{i<j} (a_i − a_j + j − i)/(j − i)`.
pub fn weyl_dimension(partition: &Partition, m: usize) -> Result<u128> {
    let parts = partition.padded(m)?;
    let overflow = || GentileError::InvalidParameter(format!("Weyl dimension overflows for {partition}"));
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..m {
        for j in i + 1..m {
            let gap = u128::from(parts[i] - parts[j]) + (j - i) as u128;
            num = num.checked_mul(gap).ok_or_else(overflow)?;
            den = den.checked_mul((j - i) as u128).ok_or_else(overflow)?;
            let g = gcd(num, den);
            num /= g;
            den /= g;
        }
    }
    debug_assert_eq!(den, 1);
    Ok(num / den)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
