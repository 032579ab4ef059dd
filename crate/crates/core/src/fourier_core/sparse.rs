//! Sparse mode maps over a generic coefficient field.

use super::coeff::Coeff;
use super::mode::Mode;
use super::series::convolve_terms;
use std::collections::BTreeMap;

pub type SparseMap<T> = BTreeMap<Mode, T>;

pub fn add_terms<T: Coeff>(acc: &mut SparseMap<T>, terms: &[(Mode, T)]) {
    for (m, c) in terms {
        match acc.get_mut(m) {
            Some(v) => *v += *c,
            None => {
                acc.insert(m.clone(), *c);
            }
        }
    }
}

pub fn terms_of<T: Coeff>(map: &SparseMap<T>) -> Vec<(Mode, T)> {
    map.iter().map(|(m, c)| (m.clone(), *c)).collect()
}

/// Σ_ν a(ν) b(−ν), the zero mode of a ⊛ b.
pub fn zero_mode_pairing<T: Coeff>(a: &[(Mode, T)], b: &SparseMap<T>) -> T {
    let mut s = T::zero();
    for (m, c) in a {
        if let Some(v) = b.get(&m.neg()) {
            s += *c * *v;
        }
    }
    s
}

/// p-fold convolution powers P_p^(j) = Σ y^(i₁) ⊛ … ⊛ y^(i_p) over i₁+…+i_p = j, iₖ ≥ 1.
///
/// Built incrementally: `prepare(j)` fills the powers p ≥ 2 from orders below j,
/// `set_linear(j, y)` records P_1^(j) = y^(j).
pub struct PowerTable<T: Coeff> {
    dim: usize,
    max_power: usize,
    // table[p][j]
    table: Vec<Vec<Vec<(Mode, T)>>>,
}

impl<T: Coeff> PowerTable<T> {
    pub fn new(dim: usize, max_power: usize) -> Self {
        let mut table = Vec::with_capacity(max_power + 1);
        for _ in 0..=max_power {
            table.push(vec![Vec::new()]); // j = 0 entry is empty
        }
        PowerTable { dim, max_power, table }
    }

    pub fn prepare(&mut self, j: usize) {
        for p in 2..=self.max_power {
            let mut acc: SparseMap<T> = BTreeMap::new();
            if j >= p {
                for i in 1..=(j + 1 - p) {
                    let y = &self.table[1][i];
                    let lower = &self.table[p - 1][j - i];
                    if y.is_empty() || lower.is_empty() {
                        continue;
                    }
                    add_terms(&mut acc, &convolve_terms(self.dim, y, lower));
                }
            }
            debug_assert_eq!(self.table[p].len(), j);
            self.table[p].push(terms_of(&acc));
        }
    }

    pub fn set_linear(&mut self, j: usize, y: Vec<(Mode, T)>) {
        debug_assert_eq!(self.table[1].len(), j);
        self.table[1].push(y);
    }

    pub fn power(&self, p: usize, j: usize) -> &[(Mode, T)] {
        &self.table[p][j]
    }
}
