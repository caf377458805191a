//! Classical cost functions over `{+1,-1}^n`.
//!
//! Two representations are supported:
//!
//! * [`PolyCost`] — a sum of monomials `c_S * prod_{i in S} z_i` with no
//!   constant term (MAX-Ek-LIN2, QUBO, the Gaussian k-spin ensemble);
//! * [`CspCost`] — a sum of clauses, each worth `-1` on its `s` satisfying
//!   local assignments and `s/(2^k - s)` on the others, so every clause
//!   averages to zero over its `2^k` local assignments.
//!
//! Both are mean-zero over the hypercube, so the optimum `E*` is strictly
//! negative unless the function vanishes identically (which is rejected).
//!
//! CSP values are exact rationals. Every clause value is an integer multiple
//! of `1/D`, where `D` is the least common multiple of the clause
//! denominators `2^k - s`, so a whole CSP energy is an `i64` numerator over
//! that shared `D`. Energy comparisons, the mean-zero identity and `E*` are
//! therefore exact.
//!
//! # Assignment encoding
//!
//! An assignment is a `u64` whose bit `i` is set iff `z_i = -1`. With this
//! encoding the monomial `prod_{i in S} z_i` equals
//! `(-1)^{popcount(x & mask_S)}`, and a single bit flip is `x ^ (1 << i)`.

mod depolarizing;
mod ensembles;
mod json;
mod reduction;
mod spectrum;

pub use depolarizing::{check_depolarizing, check_subdepolarizing, DepolarizingReport, SubdepolarizingReport};
pub use ensembles::{
    for_each_combination, sample_csp, sample_k_spin, sample_k_spin_indexed, sample_max_ek_lin2, sample_random_kcnf,
    sample_random_kcnf_indexed,
};
pub use json::{from_json, to_json};
pub use reduction::qubo_to_e2lin2;
pub use spectrum::{cumulative_states, enumerate_spectrum, ExactLevels, Level, SpectrumTable};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `n` for which a full `2^n` table is built.
pub const ENUMERATION_LIMIT: usize = 26;

/// Below this size energies are summed term by term; above it a fast
/// Walsh–Hadamard transform is used.
const DIRECT_EVALUATION_LIMIT: usize = 16;

/// Spin value of variable `i` in assignment `x`.
#[inline]
pub fn spin(x: u64, i: usize) -> i8 {
    if (x >> i) & 1 == 1 {
        -1
    } else {
        1
    }
}

/// Encode a `±1` vector as an assignment index.
pub fn assignment_from_spins(z: &[i8]) -> Result<u64> {
    if z.len() > 64 {
        return Err(Error::MalformedInstance(format!("assignment of length {} exceeds 64", z.len())));
    }
    let mut x = 0u64;
    for (i, &s) in z.iter().enumerate() {
        match s {
            1 => {}
            -1 => x |= 1 << i,
            _ => return Err(Error::MalformedInstance(format!("entry {i} of assignment is {s}, expected ±1"))),
        }
    }
    Ok(x)
}

/// Decode an assignment index into a `±1` vector of length `n`.
pub fn spins_from_assignment(x: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| spin(x, i)).collect()
}

/// Where an instance came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Provenance {
    /// Ensemble tag, e.g. `"k-spin"`, `"k-cnf"`, `"max-ek-lin2"` or `"explicit"`.
    pub ensemble: String,
    /// Master seed, if sampled.
    pub seed: Option<u64>,
    /// Instance index within the seeded ensemble.
    pub index: Option<u64>,
}

impl Provenance {
    pub fn explicit() -> Self {
        Self { ensemble: "explicit".into(), seed: None, index: None }
    }

    pub fn sampled(ensemble: &str, seed: u64, index: u64) -> Self {
        Self { ensemble: ensemble.into(), seed: Some(seed), index: Some(index) }
    }
}

fn check_vars(n: usize, vars: &[usize]) -> Result<u64> {
    if vars.is_empty() {
        return Err(Error::MalformedInstance("empty variable set (constant terms are not allowed)".into()));
    }
    let mut mask = 0u64;
    for &v in vars {
        if v >= n {
            return Err(Error::MalformedInstance(format!("variable index {v} out of range for n = {n}")));
        }
        if mask & (1 << v) != 0 {
            return Err(Error::MalformedInstance(format!("variable {v} repeated within a term")));
        }
        mask |= 1 << v;
    }
    Ok(mask)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > 63 {
        return Err(Error::MalformedInstance(format!("n = {n} outside 1..=63")));
    }
    Ok(())
}

/// One monomial `coef * prod_{i in vars} z_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    vars: Vec<usize>,
    mask: u64,
    coef: f64,
}

impl Monomial {
    /// Variables in ascending order.
    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn coef(&self) -> f64 {
        self.coef
    }

    pub fn degree(&self) -> usize {
        self.vars.len()
    }

    /// Bit mask of the variables.
    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Value of the monomial (without coefficient) at `x`.
    #[inline]
    pub fn sign(&self, x: u64) -> f64 {
        if (x & self.mask).count_ones() & 1 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// A polynomial cost function without constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyCost {
    n: usize,
    terms: Vec<Monomial>,
    /// Origin of the instance; carried through serialization.
    pub provenance: Provenance,
}

impl PolyCost {
    /// Build from `(variables, coefficient)` pairs.
    ///
    /// Variables within a term are sorted; repeated or out-of-range indices,
    /// empty variable sets and identically-zero polynomials are rejected.
    pub fn new(n: usize, terms: Vec<(Vec<usize>, f64)>) -> Result<Self> {
        check_n(n)?;
        let mut out = Vec::with_capacity(terms.len());
        for (mut vars, coef) in terms {
            if !coef.is_finite() {
                return Err(Error::MalformedInstance(format!("non-finite coefficient {coef}")));
            }
            let mask = check_vars(n, &vars)?;
            vars.sort_unstable();
            out.push(Monomial { vars, mask, coef });
        }
        // Reject the zero polynomial, including cancellations between repeats.
        let mut merged = std::collections::BTreeMap::<u64, f64>::new();
        for t in &out {
            *merged.entry(t.mask).or_default() += t.coef;
        }
        if merged.values().all(|&c| c == 0.0) {
            return Err(Error::Degenerate("polynomial is identically zero".into()));
        }
        Ok(Self { n, terms: out, provenance: Provenance::explicit() })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Largest monomial degree.
    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    /// `H(x)` summed in term order.
    #[inline]
    pub fn evaluate_index(&self, x: u64) -> f64 {
        self.terms.iter().map(|t| t.coef * t.sign(x)).sum()
    }

    /// All `2^n` energies, indexed by assignment.
    ///
    /// For `n <= 16` each entry is the term-order sum of
    /// [`evaluate_index`](Self::evaluate_index), bit for bit. Larger
    /// instances use the fast Walsh–Hadamard transform of the coefficient
    /// vector, which costs `O(n 2^n)` rather than `O(terms 2^n)` and agrees
    /// with direct evaluation up to rounding.
    pub fn energies(&self) -> Vec<f64> {
        let size = 1usize << self.n;
        if self.n <= DIRECT_EVALUATION_LIMIT {
            return (0..size as u64).map(|x| self.evaluate_index(x)).collect();
        }
        let mut a = vec![0.0f64; size];
        for t in &self.terms {
            a[t.mask as usize] += t.coef;
        }
        walsh_hadamard(&mut a);
        a
    }
}

/// In-place unnormalized Walsh–Hadamard transform:
/// `a'[x] = sum_S a[S] (-1)^{popcount(x & S)}`.
fn walsh_hadamard(a: &mut [f64]) {
    let mut h = 1;
    while h < a.len() {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (u, v) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*u, *v);
                *u = p + q;
                *v = p - q;
            }
        }
        h *= 2;
    }
}

/// One CSP clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    vars: Vec<usize>,
    satisfying: Vec<u32>,
    /// `table[p]` is true iff local pattern `p` satisfies the clause.
    table: Vec<bool>,
}

impl Clause {
    /// A clause on `vars` whose satisfying local patterns are `satisfying`.
    ///
    /// Bit `j` of a local pattern refers to `vars[j]` and is set iff that
    /// variable equals `-1`. The variable order is kept as given.
    pub fn new(vars: Vec<usize>, satisfying: Vec<u32>) -> Result<Self> {
        let k = vars.len();
        if k == 0 || k > 16 {
            return Err(Error::MalformedInstance(format!("clause arity {k} outside 1..=16")));
        }
        let size = 1usize << k;
        let mut table = vec![false; size];
        for &p in &satisfying {
            if p as usize >= size {
                return Err(Error::MalformedInstance(format!("pattern {p} out of range for arity {k}")));
            }
            table[p as usize] = true;
        }
        let s = table.iter().filter(|&&b| b).count();
        if s == 0 || s == size {
            return Err(Error::MalformedInstance(format!(
                "clause must have between 1 and 2^k - 1 satisfying patterns, got {s}"
            )));
        }
        let satisfying = (0..size as u32).filter(|&p| table[p as usize]).collect();
        Ok(Self { vars, satisfying, table })
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Sorted satisfying local patterns.
    pub fn satisfying(&self) -> &[u32] {
        &self.satisfying
    }

    /// Number of satisfying local patterns `s`.
    pub fn s(&self) -> u64 {
        self.satisfying.len() as u64
    }

    /// Denominator `2^k - s` of the unsatisfied value.
    pub fn denominator(&self) -> u64 {
        (1u64 << self.arity()) - self.s()
    }

    /// Value on unsatisfying patterns, `s/(2^k - s)`.
    pub fn unsat_value(&self) -> Ratio<i64> {
        Ratio::new(self.s() as i64, self.denominator() as i64)
    }

    /// Local pattern of assignment `x`.
    #[inline]
    pub fn pattern(&self, x: u64) -> usize {
        self.vars.iter().enumerate().fold(0usize, |p, (j, &v)| p | ((((x >> v) & 1) as usize) << j))
    }

    #[inline]
    pub fn is_satisfied(&self, x: u64) -> bool {
        self.table[self.pattern(x)]
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A constraint-satisfaction cost function with exact rational values.
#[derive(Debug, Clone, PartialEq)]
pub struct CspCost {
    n: usize,
    clauses: Vec<Clause>,
    denominator: i64,
    /// `(numerator if satisfied, numerator if not)` per clause, over `denominator`.
    values: Vec<(i64, i64)>,
    pub provenance: Provenance,
}

impl CspCost {
    pub fn new(n: usize, clauses: Vec<Clause>) -> Result<Self> {
        check_n(n)?;
        if clauses.is_empty() {
            return Err(Error::Degenerate("CSP without clauses is identically zero".into()));
        }
        for c in &clauses {
            check_vars(n, c.vars())?;
        }
        let denominator = clauses.iter().fold(1u64, |acc, c| {
            let d = c.denominator();
            acc / gcd(acc, d) * d
        });
        let denominator = i64::try_from(denominator)
            .map_err(|_| Error::MalformedInstance("common clause denominator overflows i64".into()))?;
        let values =
            clauses.iter().map(|c| (-denominator, c.s() as i64 * (denominator / c.denominator() as i64))).collect();
        Ok(Self { n, clauses, denominator, values, provenance: Provenance::explicit() })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Number of clauses `m`.
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    /// Largest clause arity.
    pub fn max_arity(&self) -> usize {
        self.clauses.iter().map(Clause::arity).max().unwrap_or(0)
    }

    /// Shared denominator `D` of all energies.
    pub fn denominator(&self) -> i64 {
        self.denominator
    }

    /// `D * H(x)`, exactly.
    pub fn numerator_index(&self, x: u64) -> i64 {
        self.clauses
            .iter()
            .zip(&self.values)
            .map(|(c, &(sat, unsat))| if c.is_satisfied(x) { sat } else { unsat })
            .sum()
    }

    /// `H(x)` as an exact rational.
    pub fn evaluate_exact(&self, x: u64) -> Ratio<i64> {
        Ratio::new(self.numerator_index(x), self.denominator)
    }

    /// `H(x)` rounded once to binary64.
    pub fn evaluate_index(&self, x: u64) -> f64 {
        self.numerator_index(x) as f64 / self.denominator as f64
    }

    /// All `2^n` exact numerators, indexed by assignment.
    pub fn numerators(&self) -> Vec<i64> {
        let size = 1usize << self.n;
        let mut out = vec![0i64; size];
        for (c, &(sat, unsat)) in self.clauses.iter().zip(&self.values) {
            for (x, e) in out.iter_mut().enumerate() {
                *e += if c.is_satisfied(x as u64) { sat } else { unsat };
            }
        }
        out
    }

    /// All `2^n` energies as binary64 (each a single rounding of the exact value).
    pub fn energies(&self) -> Vec<f64> {
        let d = self.denominator as f64;
        self.numerators().into_iter().map(|v| v as f64 / d).collect()
    }
}

/// Either cost representation.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFunction {
    Poly(PolyCost),
    Csp(CspCost),
}

impl From<PolyCost> for CostFunction {
    fn from(c: PolyCost) -> Self {
        CostFunction::Poly(c)
    }
}

impl From<CspCost> for CostFunction {
    fn from(c: CspCost) -> Self {
        CostFunction::Csp(c)
    }
}

impl CostFunction {
    pub fn n(&self) -> usize {
        match self {
            CostFunction::Poly(p) => p.n(),
            CostFunction::Csp(c) => c.n(),
        }
    }

    /// Locality: maximum monomial degree or clause arity.
    pub fn k(&self) -> usize {
        match self {
            CostFunction::Poly(p) => p.max_degree(),
            CostFunction::Csp(c) => c.max_arity(),
        }
    }

    /// `"poly"` or `"csp"`.
    pub fn kind(&self) -> &'static str {
        match self {
            CostFunction::Poly(_) => "poly",
            CostFunction::Csp(_) => "csp",
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            CostFunction::Poly(p) => &p.provenance,
            CostFunction::Csp(c) => &c.provenance,
        }
    }

    /// `H(z)` for a `±1` vector of length `n`.
    pub fn evaluate(&self, z: &[i8]) -> Result<f64> {
        if z.len() != self.n() {
            return Err(Error::MalformedInstance(format!("assignment has length {}, expected {}", z.len(), self.n())));
        }
        Ok(self.evaluate_index(assignment_from_spins(z)?))
    }

    #[inline]
    pub fn evaluate_index(&self, x: u64) -> f64 {
        match self {
            CostFunction::Poly(p) => p.evaluate_index(x),
            CostFunction::Csp(c) => c.evaluate_index(x),
        }
    }

    /// All `2^n` energies. Refuses `n` above [`ENUMERATION_LIMIT`].
    pub fn energies(&self) -> Result<Vec<f64>> {
        if self.n() > ENUMERATION_LIMIT {
            return Err(Error::TooLarge { n: self.n(), limit: ENUMERATION_LIMIT, what: "exhaustive enumeration" });
        }
        Ok(match self {
            CostFunction::Poly(p) => p.energies(),
            CostFunction::Csp(c) => c.energies(),
        })
    }
}
