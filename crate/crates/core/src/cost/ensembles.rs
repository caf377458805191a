//! Seeded random instance ensembles.

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Clause, CspCost, PolyCost, Provenance};
use crate::rng::stream_rng;

/// Call `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut c: Vec<usize> = (0..k).collect();
    loop {
        f(&c);
        // Find the rightmost position that can still advance.
        let mut i = k;
        while i > 0 && c[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        c[i - 1] += 1;
        for j in i..k {
            c[j] = c[j - 1] + 1;
        }
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// k-spin instance with index 0 under `seed`.
pub fn sample_k_spin(n: usize, k: usize, seed: u64) -> PolyCost {
    sample_k_spin_indexed(n, k, seed, 0)
}

/// k-spin instance `index` under `seed`: every `k`-subset carries
/// `J * sqrt(k! / n^{k-1})` with `J ~ N(0,1)`, drawn in lexicographic order.
///
/// # Panics
/// If `k == 0` or `k > n`.
pub fn sample_k_spin_indexed(n: usize, k: usize, seed: u64, index: u64) -> PolyCost {
    assert!(k >= 1 && k <= n, "need 1 <= k <= n (k = {k}, n = {n})");
    let scale = (factorial(k) / (n as f64).powi(k as i32 - 1)).sqrt();
    let mut rng = stream_rng(seed, index);
    let mut terms = Vec::new();
    for_each_combination(n, k, |vars| {
        let j: f64 = rng.sample(StandardNormal);
        terms.push((vars.to_vec(), j * scale));
    });
    PolyCost::new(n, terms)
        .expect("Gaussian coefficients are almost surely nonzero")
        .with_provenance(Provenance::sampled("k-spin", seed, index))
}

fn random_vars(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    let mut vars = index::sample(rng, n, k).into_vec();
    vars.sort_unstable();
    vars
}

/// Random k-CNF with index 0 under `seed`.
pub fn sample_random_kcnf(n: usize, k: usize, m: usize, seed: u64) -> CspCost {
    sample_random_kcnf_indexed(n, k, m, seed, 0)
}

/// Random k-CNF: each clause picks `k` distinct variables uniformly and one
/// uniformly random forbidden local pattern, so `s = 2^k - 1`.
///
/// # Panics
/// If `k > n`, `k == 0` or `m == 0` (the empty formula is identically zero).
pub fn sample_random_kcnf_indexed(n: usize, k: usize, m: usize, seed: u64, index: u64) -> CspCost {
    let mut rng = stream_rng(seed, index);
    let size = 1u32 << k;
    let clauses = (0..m)
        .map(|_| {
            let vars = random_vars(&mut rng, n, k);
            let forbidden = rng.gen_range(0..size);
            Clause::new(vars, (0..size).filter(|&p| p != forbidden).collect()).expect("valid clause")
        })
        .collect();
    CspCost::new(n, clauses).expect("non-empty formula").with_provenance(Provenance::sampled("k-cnf", seed, index))
}

/// General random MAX-k-CSP: each clause has `s` satisfying local patterns
/// drawn uniformly without replacement from the `2^k` possibilities.
///
/// # Panics
/// If `s` is not in `1..2^k`, `k > n`, or `m == 0`.
pub fn sample_csp(n: usize, k: usize, m: usize, s: usize, seed: u64, index: u64) -> CspCost {
    let size = 1usize << k;
    assert!(s >= 1 && s < size, "need 1 <= s <= 2^k - 1");
    let mut rng = stream_rng(seed, index);
    let clauses = (0..m)
        .map(|_| {
            let vars = random_vars(&mut rng, n, k);
            let sat = index::sample(&mut rng, size, s).into_iter().map(|p| p as u32).collect();
            Clause::new(vars, sat).expect("valid clause")
        })
        .collect();
    CspCost::new(n, clauses).expect("non-empty formula").with_provenance(Provenance::sampled("max-k-csp", seed, index))
}

/// Random MAX-Ek-LIN2: `m` degree-`k` monomials on uniformly random
/// variable sets with independent uniform `±1` coefficients.
///
/// Returns `None` in the (rare) event that the sampled terms cancel to zero.
pub fn sample_max_ek_lin2(n: usize, k: usize, m: usize, seed: u64, index: u64) -> Option<PolyCost> {
    let mut rng = stream_rng(seed, index);
    let terms = (0..m)
        .map(|_| {
            let vars = random_vars(&mut rng, n, k);
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            (vars, sign)
        })
        .collect();
    PolyCost::new(n, terms).ok().map(|p| p.with_provenance(Provenance::sampled("max-ek-lin2", seed, index)))
}
