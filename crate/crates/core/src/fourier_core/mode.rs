use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use std::fmt;

/// Integer mode vector ν ∈ Z^d.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mode(SmallVec<[i32; 4]>);

impl Mode {
    pub fn zero(d: usize) -> Self {
        Mode(SmallVec::from_elem(0, d))
    }

    pub fn new(components: &[i32]) -> Self {
        Mode(SmallVec::from_slice(components))
    }

    /// One-dimensional mode.
    pub fn scalar(n: i32) -> Self {
        Mode::new(&[n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// |ν| = |ν₁| + … + |ν_d|.
    pub fn l1(&self) -> u32 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn neg(&self) -> Self {
        Mode(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Mode) -> Self {
        Mode(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Mode) -> Self {
        Mode(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// True when the first nonzero component is positive.
    pub fn is_canonical(&self) -> bool {
        match self.0.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        }
    }

    pub fn dot(&self, omega: &[f64]) -> f64 {
        self.0.iter().zip(omega).map(|(&n, &w)| n as f64 * w).sum()
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<i32>> for Mode {
    fn from(v: Vec<i32>) -> Self {
        Mode(SmallVec::from_vec(v))
    }
}

/// All modes of dimension `d` with 0 < |ν| ≤ `radius`, in lexicographic order.
pub fn modes_within(d: usize, radius: u32) -> Vec<Mode> {
    let mut out = Vec::new();
    let mut current = vec![0i32; d];
    fill(&mut current, 0, radius as i32, &mut out);
    out.retain(|m| !m.is_zero());
    out.sort();
    out
}

fn fill(current: &mut Vec<i32>, idx: usize, left: i32, out: &mut Vec<Mode>) {
    if idx == current.len() {
        out.push(Mode::new(current));
        return;
    }
    for c in -left..=left {
        current[idx] = c;
        fill(current, idx + 1, left - c.abs(), out);
    }
    current[idx] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_modes_in_ball() {
        assert_eq!(modes_within(1, 3).len(), 6);
        // 2d ℓ¹ ball of radius r holds 2r² + 2r + 1 points
        assert_eq!(modes_within(2, 4).len(), 2 * 16 + 8);
    }

    #[test]
    fn canonical_half() {
        assert!(Mode::new(&[0, 2]).is_canonical());
        assert!(!Mode::new(&[-1, 2]).is_canonical());
        assert!(!Mode::zero(2).is_canonical());
    }
}
