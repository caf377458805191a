//! Exhaustive spectrum tables and the cumulative state count `C(E)`.

use serde::Serialize;

use super::{CostFunction, ENUMERATION_LIMIT};
use crate::error::{Error, Result};

/// One distinct energy and the number of assignments attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: u64,
}

/// Exact levels of a CSP: integer numerators over a shared denominator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactLevels {
    pub denominator: i64,
    /// `(numerator, multiplicity)`, ascending.
    pub levels: Vec<(i64, u64)>,
}

/// Sorted multiset of all `2^n` energies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumTable {
    n: usize,
    levels: Vec<Level>,
    /// `cumulative[i]` = number of assignments with energy `<= levels[i].energy`.
    cumulative: Vec<u64>,
    optimal: Vec<u64>,
    exact: Option<ExactLevels>,
}

impl SpectrumTable {
    /// Build from a full energy array (index = assignment).
    pub fn from_energies(n: usize, energies: &[f64]) -> Result<Self> {
        if energies.len() != 1usize << n {
            return Err(Error::InvalidParameter(format!("expected 2^{n} energies, got {}", energies.len())));
        }
        let mut sorted = energies.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let mut levels: Vec<Level> = Vec::new();
        for e in sorted {
            match levels.last_mut() {
                Some(l) if l.energy == e => l.multiplicity += 1,
                _ => levels.push(Level { energy: e, multiplicity: 1 }),
            }
        }
        let e_star = levels[0].energy;
        let optimal = (0..energies.len() as u64).filter(|&x| energies[x as usize] == e_star).collect();
        Self::finish(n, levels, optimal, None)
    }

    fn from_numerators(n: usize, numerators: &[i64], denominator: i64) -> Result<Self> {
        let mut sorted = numerators.to_vec();
        sorted.sort_unstable();
        let mut exact: Vec<(i64, u64)> = Vec::new();
        for v in sorted {
            match exact.last_mut() {
                Some(l) if l.0 == v => l.1 += 1,
                _ => exact.push((v, 1)),
            }
        }
        let d = denominator as f64;
        let levels = exact.iter().map(|&(v, m)| Level { energy: v as f64 / d, multiplicity: m }).collect();
        let best = exact[0].0;
        let optimal = (0..numerators.len() as u64).filter(|&x| numerators[x as usize] == best).collect();
        Self::finish(n, levels, optimal, Some(ExactLevels { denominator, levels: exact }))
    }

    fn finish(n: usize, levels: Vec<Level>, optimal: Vec<u64>, exact: Option<ExactLevels>) -> Result<Self> {
        if levels[0].energy >= 0.0 {
            return Err(Error::Degenerate(format!("E* = {} is not negative", levels[0].energy)));
        }
        let cumulative = levels
            .iter()
            .scan(0u64, |acc, l| {
                *acc += l.multiplicity;
                Some(*acc)
            })
            .collect();
        Ok(Self { n, levels, cumulative, optimal, exact })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Distinct levels, ascending.
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Optimal value `E* < 0`.
    pub fn e_star(&self) -> f64 {
        self.levels[0].energy
    }

    /// All assignments attaining `E*`, ascending.
    pub fn optimal(&self) -> &[u64] {
        &self.optimal
    }

    /// Exact rational levels (CSP instances only).
    pub fn exact(&self) -> Option<&ExactLevels> {
        self.exact.as_ref()
    }

    /// Total number of assignments, `2^n`.
    pub fn total(&self) -> u64 {
        *self.cumulative.last().expect("non-empty table")
    }

    /// `C(E) = |{z : H(z) <= E}|`.
    pub fn cumulative_states(&self, e: f64) -> u64 {
        let idx = self.levels.partition_point(|l| l.energy <= e);
        if idx == 0 {
            0
        } else {
            self.cumulative[idx - 1]
        }
    }

    /// `sum_E E * mult(E)`; exactly zero for CSP tables, rounding-level for floats.
    pub fn energy_sum(&self) -> f64 {
        match &self.exact {
            Some(ex) => {
                let s: i128 = ex.levels.iter().map(|&(v, m)| v as i128 * m as i128).sum();
                s as f64 / ex.denominator as f64
            }
            None => self.levels.iter().map(|l| l.energy * l.multiplicity as f64).sum(),
        }
    }
}

/// Enumerate all `2^n` energies of `cost` into a [`SpectrumTable`].
///
/// Refuses `n` above [`ENUMERATION_LIMIT`] and rejects functions with `E* >= 0`.
pub fn enumerate_spectrum(cost: &CostFunction) -> Result<SpectrumTable> {
    let n = cost.n();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT, what: "exhaustive enumeration" });
    }
    match cost {
        CostFunction::Csp(c) => SpectrumTable::from_numerators(n, &c.numerators(), c.denominator()),
        CostFunction::Poly(p) => SpectrumTable::from_energies(n, &p.energies()),
    }
}

/// `C(E)` from a table (free-function form).
pub fn cumulative_states(table: &SpectrumTable, e: f64) -> u64 {
    table.cumulative_states(e)
}
