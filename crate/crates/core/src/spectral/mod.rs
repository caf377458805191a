//! The operator `H_b = -X/n + b g_eta(H/|E*|)` and its low-lying spectrum.
//!
//! `H_b` is never stored as a matrix. The diagonal `g_eta(H(z)/|E*|)` is
//! precomputed once per instance (the factor `b` is applied on the fly, so a
//! scan over `b` reuses it) and the transverse field is applied as `n`
//! single-bit-flip neighbour sums.

pub mod dense;
pub mod lanczos;

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::rng::aux_rng;
use crate::transform::EtaTransform;
use lanczos::{dot, lowest_eigenpair, norm, LanczosOptions, LinearOperator, Target};

pub use dense::{dense_deflated_ground_energy, dense_spectrum, DenseSpectrum, DENSE_LIMIT};

/// Largest `n` accepted by the Lanczos path.
pub const LANCZOS_LIMIT: usize = 26;
/// Default tolerance of the dense path.
pub const DENSE_TOL: f64 = 1e-10;
/// Default tolerance of the Lanczos path.
pub const LANCZOS_TOL: f64 = 1e-8;

/// Chunk of basis states processed together by `matvec` (32 KiB of f64).
const CHUNK_BITS: usize = 12;

/// Implicit `H_b`.
#[derive(Debug, Clone)]
pub struct HbOperator {
    n: usize,
    eta: f64,
    b: f64,
    /// `|E*|` (or the guess `W` used in its place).
    scale: f64,
    /// `g_eta(H(z)/scale)` for every assignment.
    g: Vec<f64>,
    /// Minimizers of `H`.
    optimal: Vec<u64>,
    e_star: f64,
    clamped: u64,
}

impl HbOperator {
    /// Operator for `cost` normalized by its true optimum.
    pub fn new(cost: &CostFunction, eta: f64, b: f64) -> Result<Self> {
        if cost.n() > LANCZOS_LIMIT {
            return Err(Error::TooLarge { n: cost.n(), limit: LANCZOS_LIMIT, what: "H_b construction" });
        }
        let energies = cost.energies()?;
        Self::from_energies(cost.n(), &energies, None, eta, b)
    }

    /// Operator from a full energy array. `scale` replaces `|E*|` in the
    /// normalization when given (used when `E*` is unknown).
    pub fn from_energies(n: usize, energies: &[f64], scale: Option<f64>, eta: f64, b: f64) -> Result<Self> {
        if energies.len() != 1usize << n {
            return Err(Error::InvalidParameter("energy array has wrong length".into()));
        }
        if !b.is_finite() {
            return Err(Error::InvalidParameter(format!("b = {b} is not finite")));
        }
        let t = EtaTransform::new(eta)?;
        let e_star = energies.iter().copied().fold(f64::INFINITY, f64::min);
        if !(e_star < 0.0) {
            return Err(Error::Degenerate(format!("E* = {e_star} is not negative")));
        }
        let scale = scale.unwrap_or(-e_star);
        if !(scale > 0.0) {
            return Err(Error::InvalidParameter(format!("normalization {scale} must be positive")));
        }
        let g = energies.iter().map(|&e| t.g(e / scale)).collect();
        let optimal = (0..energies.len() as u64).filter(|&x| energies[x as usize] == e_star).collect();
        Ok(Self { n, eta, b, scale, g, optimal, e_star, clamped: t.clamp_count() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn e_star(&self) -> f64 {
        self.e_star
    }

    /// Normalization used in place of `|E*|`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Minimizers of the cost function.
    pub fn optimal(&self) -> &[u64] {
        &self.optimal
    }

    /// How many normalized energies were clamped to `-1`.
    pub fn clamp_count(&self) -> u64 {
        self.clamped
    }

    /// Change `b` without recomputing the diagonal.
    pub fn set_b(&mut self, b: f64) {
        self.b = b;
    }

    /// `g_eta(H(z)/|E*|)` (without the factor `b`).
    pub fn g_values(&self) -> &[f64] {
        &self.g
    }

    /// Diagonal entry `b g_eta(H(x)/|E*|)`.
    pub fn diag_entry(&self, x: usize) -> f64 {
        self.b * self.g[x]
    }

    /// `out = H_b v`.
    ///
    /// Work is split into chunks of `2^12` basis states. Within a chunk the
    /// low-bit neighbours are summed in cache; high-bit neighbours are read
    /// from the partner chunks. Every output entry is produced by the same
    /// sequence of floating-point operations regardless of thread count.
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) {
        assert_eq!(v.len(), self.dim(), "dimension mismatch");
        assert_eq!(out.len(), self.dim(), "dimension mismatch");
        let n = self.n;
        let c = n.min(CHUNK_BITS);
        let csize = 1usize << c;
        let inv_n = 1.0 / n as f64;
        let b = self.b;
        out.par_chunks_mut(csize).enumerate().for_each(|(ci, o)| {
            let base = ci << c;
            let vc = &v[base..base + csize];
            o.iter_mut().for_each(|x| *x = 0.0);
            for i in 0..c {
                let s = 1usize << i;
                for blk in (0..csize).step_by(2 * s) {
                    let (lo, hi) = o[blk..blk + 2 * s].split_at_mut(s);
                    let (vlo, vhi) = vc[blk..blk + 2 * s].split_at(s);
                    for j in 0..s {
                        lo[j] += vhi[j];
                        hi[j] += vlo[j];
                    }
                }
            }
            for hb in c..n {
                let partner = base ^ (1usize << hb);
                for (oj, pj) in o.iter_mut().zip(&v[partner..partner + csize]) {
                    *oj += pj;
                }
            }
            let g = &self.g[base..base + csize];
            for j in 0..csize {
                o[j] = b * g[j] * vc[j] - inv_n * o[j];
            }
        });
    }

    /// `<+|H_b|+>`; at most `-1` because `g <= 0`.
    pub fn plus_expectation(&self) -> f64 {
        -1.0 + self.b * self.g.iter().sum::<f64>() / self.dim() as f64
    }
}

impl LinearOperator for HbOperator {
    fn dim(&self) -> usize {
        HbOperator::dim(self)
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.matvec(v, out)
    }
}

/// `-A`, used to obtain the largest eigenvalue with the lowest-eigenpair solver.
struct Negated<'a>(&'a HbOperator);

impl LinearOperator for Negated<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.0.matvec(v, out);
        out.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Uniform superposition `|+>`.
pub fn plus_state(n: usize) -> Vec<f64> {
    let dim = 1usize << n;
    vec![1.0 / (dim as f64).sqrt(); dim]
}

/// Eigensolver choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
    /// Dense up to `n = 10`, Lanczos above.
    Auto,
}

impl Method {
    fn resolve(self, n: usize) -> Method {
        match self {
            Method::Auto if n <= 10 => Method::Dense,
            Method::Auto => Method::Lanczos,
            m => m,
        }
    }

    /// Default tolerance of this method.
    pub fn default_tol(self, n: usize) -> f64 {
        match self.resolve(n) {
            Method::Dense => DENSE_TOL,
            _ => LANCZOS_TOL,
        }
    }
}

/// Options for [`ground_state_with`].
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub method: Method,
    /// Eigenvalue tolerance; the ground vector is converged to residual `tol/10`.
    pub tol: f64,
    /// Also compute the largest eigenvalue.
    pub want_max: bool,
    /// Number of low eigenvalues to compute (at least 2).
    pub levels: usize,
    /// Seed for the start vectors.
    pub seed: u64,
}

impl SolveOptions {
    pub fn new(method: Method, n: usize) -> Self {
        Self { method, tol: method.default_tol(n), want_max: true, levels: 2, seed: 0x5eed }
    }
}

/// Low-lying spectrum of `H_b` plus the overlaps that govern the runtime.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSummary {
    pub n: usize,
    pub b: f64,
    pub eta: f64,
    pub method: Method,
    /// Ground energy `E_b`.
    pub e_ground: f64,
    /// First excited energy.
    pub e_excited: f64,
    /// Further excited energies if requested (`E_2`, ...).
    pub e_higher: Vec<f64>,
    /// Largest eigenvalue `E'_b`, if computed.
    pub e_max: Option<f64>,
    /// Ground vector with the non-negative sign convention.
    #[serde(skip)]
    pub psi: Vec<f64>,
    /// `<+|psi_b>`.
    pub overlap_plus: f64,
    /// `||Pi* psi_b||`.
    pub overlap_opt: f64,
    /// `(z*, <z*|psi_b>)` for every optimal assignment.
    pub overlap_zstar: Vec<(u64, f64)>,
    /// Two lowest eigenvalues closer than `10 tol`.
    pub degenerate: bool,
    pub tol: f64,
    /// Residual norm of the ground pair.
    pub residual: f64,
    pub matvecs: usize,
    /// Most negative entry of the sign-fixed vector before zero-clamping.
    pub min_entry: f64,
}

impl SpectralSummary {
    /// `E_1 - E_0`.
    pub fn gap(&self) -> f64 {
        self.e_excited - self.e_ground
    }

    /// `<z|psi_b>`.
    pub fn amplitude(&self, z: u64) -> f64 {
        self.psi[z as usize]
    }
}

/// Ground state with default options for `method`.
pub fn ground_state(op: &HbOperator, method: Method, tol: f64) -> Result<SpectralSummary> {
    let mut opts = SolveOptions::new(method, op.n());
    opts.tol = tol;
    ground_state_with(op, &opts)
}

fn random_vector(dim: usize, seed: u64, purpose: u64) -> Vec<f64> {
    let mut rng = aux_rng(seed, dim as u64, purpose);
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Ground state, low excited energies and optionally the top eigenvalue.
pub fn ground_state_with(op: &HbOperator, opts: &SolveOptions) -> Result<SpectralSummary> {
    let n = op.n();
    let method = opts.method.resolve(n);
    let levels = opts.levels.max(2);
    let (mut values, mut psi, residual, matvecs, e_max) = match method {
        Method::Dense => {
            let spec = dense_spectrum(op)?;
            let values: Vec<f64> = spec.values[..levels.min(spec.values.len())].to_vec();
            let e_max = *spec.values.last().expect("non-empty spectrum");
            (values, spec.vector(0), 0.0, 0, Some(e_max))
        }
        _ => {
            if n > LANCZOS_LIMIT {
                return Err(Error::TooLarge { n, limit: LANCZOS_LIMIT, what: "Lanczos" });
            }
            let dim = op.dim();
            // Start near |+>, with a seeded random admixture.
            let r = random_vector(dim, opts.seed, 1);
            let rn = norm(&r);
            let amp = 1.0 / (dim as f64).sqrt();
            let start: Vec<f64> = r.iter().map(|x| amp + 0.1 * x / rn).collect();
            let mut lo = LanczosOptions::for_dim(dim, opts.tol / 10.0, Target::Vector);
            let ground = lowest_eigenpair(op, &[], &start, &lo)?;
            let mut matvecs = ground.matvecs;
            let mut values = vec![ground.value];
            let mut found: Vec<Vec<f64>> = vec![ground.vector];
            lo.tol = opts.tol;
            lo.target = Target::Value;
            for level in 1..levels {
                let start = random_vector(dim, opts.seed, 1 + level as u64);
                let defl: Vec<&[f64]> = found.iter().map(|v| v.as_slice()).collect();
                let mut lo_level = lo;
                if level + 1 < levels {
                    // Deflating an inaccurate vector leaks into the next level.
                    lo_level.target = Target::Vector;
                    lo_level.tol = opts.tol / 10.0;
                }
                let pair = lowest_eigenpair(op, &defl, &start, &lo_level)?;
                matvecs += pair.matvecs;
                values.push(pair.value);
                found.push(pair.vector);
            }
            let e_max = if opts.want_max {
                let start = random_vector(dim, opts.seed, 99);
                let top = lowest_eigenpair(&Negated(op), &[], &start, &lo)?;
                matvecs += top.matvecs;
                Some(-top.value)
            } else {
                None
            };
            let psi = found.swap_remove(0);
            (values, psi, ground.residual, matvecs, e_max)
        }
    };
    values.truncate(levels);

    // Sign convention: the entry of largest magnitude is positive.
    let (imax, _) =
        psi.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    if psi[imax] < 0.0 {
        psi.iter_mut().for_each(|x| *x = -*x);
    }
    let min_entry = psi.iter().copied().fold(f64::INFINITY, f64::min);
    for x in psi.iter_mut() {
        if *x < 0.0 && *x > -1e-8 {
            *x = 0.0;
        }
    }
    let dim = op.dim() as f64;
    let overlap_plus = psi.iter().sum::<f64>() / dim.sqrt();
    let overlap_zstar: Vec<(u64, f64)> = op.optimal().iter().map(|&z| (z, psi[z as usize])).collect();
    let overlap_opt = overlap_zstar.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
    let tol = opts.tol;
    Ok(SpectralSummary {
        n,
        b: op.b(),
        eta: op.eta(),
        method,
        e_ground: values[0],
        e_excited: values[1],
        e_higher: values[2..].to_vec(),
        e_max,
        degenerate: (values[1] - values[0]).abs() < 10.0 * tol,
        psi,
        overlap_plus,
        overlap_opt,
        overlap_zstar,
        tol,
        residual,
        matvecs,
        min_entry,
    })
}

/// Ground energy of `H_b` restricted to the complement of `|+>`.
pub fn deflated_ground_energy(op: &HbOperator, method: Method, tol: f64) -> Result<f64> {
    match method.resolve(op.n()) {
        Method::Dense => dense_deflated_ground_energy(op),
        _ => {
            let dim = op.dim();
            let plus = plus_state(op.n());
            let start = random_vector(dim, 0x5eed, 7);
            let lo = LanczosOptions::for_dim(dim, tol, Target::Value);
            Ok(lowest_eigenpair(op, &[&plus], &start, &lo)?.value)
        }
    }
}

/// `P_l v = (H_b/E_b)^l v` stored as `exp(log_scale) * direction`.
#[derive(Debug, Clone)]
pub struct ScaledVector {
    pub direction: Vec<f64>,
    pub log_scale: f64,
    pub power: usize,
}

impl ScaledVector {
    /// Entry `z` of the represented vector.
    pub fn entry(&self, z: usize) -> f64 {
        self.direction[z] * self.log_scale.exp()
    }

    /// The represented vector (may overflow for huge scales).
    pub fn to_vec(&self) -> Vec<f64> {
        let s = self.log_scale.exp();
        self.direction.iter().map(|x| x * s).collect()
    }

    /// Apply one more factor `H_b/E_b`.
    pub fn step(&mut self, op: &HbOperator, e_b: f64) {
        let mut out = vec![0.0; self.direction.len()];
        op.matvec(&self.direction, &mut out);
        let inv = 1.0 / e_b;
        out.iter_mut().for_each(|x| *x *= inv);
        let nrm = norm(&out);
        if nrm > 0.0 {
            out.iter_mut().for_each(|x| *x /= nrm);
            self.log_scale += nrm.ln();
        }
        self.direction = out;
        self.power += 1;
    }
}

/// `(H_b/E_b)^ell v` with per-step renormalization.
pub fn apply_p_ell(op: &HbOperator, e_b: f64, ell: usize, v: &[f64]) -> Result<ScaledVector> {
    if e_b == 0.0 || !e_b.is_finite() {
        return Err(Error::InvalidParameter(format!("E_b = {e_b} cannot normalize P_l")));
    }
    if v.len() != op.dim() {
        return Err(Error::InvalidParameter("vector has wrong dimension".into()));
    }
    let nrm = norm(v);
    let mut sv = if nrm > 0.0 {
        ScaledVector { direction: v.iter().map(|x| x / nrm).collect(), log_scale: nrm.ln(), power: 0 }
    } else {
        ScaledVector { direction: v.to_vec(), log_scale: 0.0, power: 0 }
    };
    for _ in 0..ell {
        sv.step(op, e_b);
    }
    Ok(sv)
}

/// `<+|P_l|z>` for every `z`, for each requested power (ascending), using
/// the symmetry of `P_l`: `<+|P_l|z> = (P_l |+>)_z`.
pub fn plus_p_ell(op: &HbOperator, e_b: f64, ells: &[usize]) -> Result<Vec<ScaledVector>> {
    let mut sorted = ells.to_vec();
    sorted.sort_unstable();
    let mut cur = apply_p_ell(op, e_b, 0, &plus_state(op.n()))?;
    let mut out = Vec::with_capacity(sorted.len());
    for &l in &sorted {
        while cur.power < l {
            cur.step(op, e_b);
        }
        out.push(cur.clone());
    }
    Ok(out)
}

/// Inner product helper re-exported for callers that work with raw vectors.
pub fn inner(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b)
}

const PSI_MAGIC: &[u8; 4] = b"PSIB";

/// Header of a ground-vector dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiHeader {
    pub n: u32,
    pub b: f64,
    pub eta: f64,
    pub seed: u64,
}

/// Write `psi` as `PSIB | n:u32 | b:f64 | eta:f64 | seed:u64 | 2^n f64`, little endian.
pub fn write_psi(path: &Path, header: PsiHeader, psi: &[f64]) -> Result<()> {
    if psi.len() != 1usize << header.n {
        return Err(Error::InvalidParameter("psi length does not match header n".into()));
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(PSI_MAGIC)?;
    f.write_all(&header.n.to_le_bytes())?;
    f.write_all(&header.b.to_le_bytes())?;
    f.write_all(&header.eta.to_le_bytes())?;
    f.write_all(&header.seed.to_le_bytes())?;
    for x in psi {
        f.write_all(&x.to_le_bytes())?;
    }
    f.flush()?;
    Ok(())
}

/// Read a dump written by [`write_psi`].
pub fn read_psi(path: &Path) -> Result<(PsiHeader, Vec<f64>)> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)?;
    if &magic != PSI_MAGIC {
        return Err(Error::Format("not a psi dump".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    f.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4);
    if n as usize > LANCZOS_LIMIT {
        return Err(Error::Format(format!("psi dump claims n = {n}")));
    }
    f.read_exact(&mut b8)?;
    let b = f64::from_le_bytes(b8);
    f.read_exact(&mut b8)?;
    let eta = f64::from_le_bytes(b8);
    f.read_exact(&mut b8)?;
    let seed = u64::from_le_bytes(b8);
    let mut psi = Vec::with_capacity(1 << n);
    for _ in 0..(1usize << n) {
        f.read_exact(&mut b8)?;
        psi.push(f64::from_le_bytes(b8));
    }
    Ok((PsiHeader { n, b, eta, seed }, psi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{sample_k_spin, PolyCost};
    use proptest::prelude::*;

    fn kspin_op(n: usize, seed: u64, eta: f64, b: f64) -> HbOperator {
        HbOperator::new(&sample_k_spin(n, 3, seed).into(), eta, b).unwrap()
    }

    #[test]
    fn plus_is_eigenvector_at_b_zero() {
        let op = kspin_op(6, 1, 0.5, 0.0);
        let plus = plus_state(6);
        let mut out = vec![0.0; 64];
        op.matvec(&plus, &mut out);
        for (o, p) in out.iter().zip(&plus) {
            assert!((o + p).abs() < 1e-15);
        }
    }

    #[test]
    fn hadamard_single_excitation_at_b_zero() {
        let n = 7;
        let op = kspin_op(n, 2, 0.5, 0.0);
        // |-> on qubit 3, |+> elsewhere: amplitude (-1)^{x_3} / sqrt(2^n).
        let amp = 1.0 / ((1 << n) as f64).sqrt();
        let v: Vec<f64> = (0..1u64 << n).map(|x| if x >> 3 & 1 == 1 { -amp } else { amp }).collect();
        let mut out = vec![0.0; v.len()];
        op.matvec(&v, &mut out);
        let lambda = -1.0 + 2.0 / n as f64;
        for (o, x) in out.iter().zip(&v) {
            assert!((o - lambda * x).abs() < 1e-14);
        }
    }

    #[test]
    fn chunked_matvec_matches_dense_assembly() {
        // n = 13 exercises the cross-chunk path (CHUNK_BITS = 12).
        let op = kspin_op(13, 3, 0.4, 0.9);
        let dim = op.dim();
        let v = random_vector(dim, 5, 0);
        let mut fast = vec![0.0; dim];
        op.matvec(&v, &mut fast);
        for x in (0..dim).step_by(37) {
            let mut s = op.diag_entry(x) * v[x];
            for i in 0..13 {
                s -= v[x ^ (1 << i)] / 13.0;
            }
            assert!((s - fast[x]).abs() < 1e-13);
        }
    }

    #[test]
    fn diagonal_range_and_variational_bound() {
        let op = kspin_op(8, 4, 0.3, 0.8);
        for x in 0..op.dim() {
            let d = op.diag_entry(x);
            assert!((-0.8..=0.0).contains(&d));
        }
        assert!(op.plus_expectation() <= -1.0);
        assert_eq!(op.optimal().len(), 1);
    }

    #[test]
    fn b_zero_closed_forms_dense_and_lanczos() {
        for method in [Method::Dense, Method::Lanczos] {
            let n = 8;
            let op = kspin_op(n, 5, 0.5, 0.0);
            let s = ground_state(&op, method, method.default_tol(n)).unwrap();
            let tol = 10.0 * s.tol;
            assert!((s.e_ground + 1.0).abs() < tol, "{method:?} {}", s.e_ground);
            assert!((s.gap() - 2.0 / n as f64).abs() < tol, "{method:?} gap {}", s.gap());
            assert!((s.overlap_plus - 1.0).abs() < tol);
            let zs = s.overlap_zstar[0].1;
            assert!((zs - 2f64.powf(-(n as f64) / 2.0)).abs() < tol);
            assert!((s.e_max.unwrap() - 1.0).abs() < tol);
        }
    }

    #[test]
    fn lanczos_matches_dense_with_b() {
        let op = kspin_op(10, 11, 0.5, 0.3);
        let d = ground_state(&op, Method::Dense, DENSE_TOL).unwrap();
        let l = ground_state(&op, Method::Lanczos, LANCZOS_TOL).unwrap();
        assert!((d.e_ground - l.e_ground).abs() < 1e-8);
        assert!((d.e_excited - l.e_excited).abs() < 1e-8);
        assert!((d.e_max.unwrap() - l.e_max.unwrap()).abs() < 1e-8);
        assert!((d.overlap_plus - l.overlap_plus).abs() < 1e-7);
        assert!((d.overlap_opt - l.overlap_opt).abs() < 1e-7);
        assert!(d.psi.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn large_b_localizes_on_optimum() {
        let op = kspin_op(8, 13, 0.5, 1e3);
        let s = ground_state(&op, Method::Dense, DENSE_TOL).unwrap();
        assert!(s.overlap_opt > 0.99);
    }

    #[test]
    fn perron_frobenius_positivity() {
        let op = kspin_op(9, 17, 0.5, 0.6);
        let s = ground_state(&op, Method::Dense, DENSE_TOL).unwrap();
        assert!(s.min_entry > 0.0);
    }

    #[test]
    fn deflated_energy_dense_vs_lanczos_and_interlacing() {
        let op = kspin_op(9, 19, 0.5, 0.7);
        let d = deflated_ground_energy(&op, Method::Dense, DENSE_TOL).unwrap();
        let l = deflated_ground_energy(&op, Method::Lanczos, LANCZOS_TOL).unwrap();
        assert!((d - l).abs() < 1e-8, "{d} vs {l}");
        let s = ground_state(&op, Method::Dense, DENSE_TOL).unwrap();
        assert!(d >= s.e_ground - 1e-12);
        let zero = kspin_op(9, 19, 0.5, 0.0);
        let d0 = deflated_ground_energy(&zero, Method::Dense, DENSE_TOL).unwrap();
        assert!((d0 - (-1.0 + 2.0 / 9.0)).abs() < 1e-10);
    }

    #[test]
    fn p_ell_reference_behaviour() {
        let n = 8;
        let op0 = kspin_op(n, 23, 0.5, 0.0);
        let plus = plus_state(n);
        let id = apply_p_ell(&op0, -1.0, 0, &plus).unwrap();
        assert!(id.to_vec().iter().zip(&plus).all(|(a, b)| (a - b).abs() < 1e-15));
        for sv in plus_p_ell(&op0, -1.0, &[1, 5, 40]).unwrap() {
            for z in [0usize, 17, 255] {
                assert!((sv.entry(z) - 2f64.powf(-(n as f64) / 2.0)).abs() < 1e-12);
            }
        }
        // Convergence to the spectral projector at large l.
        let op = kspin_op(n, 23, 0.5, 0.5);
        let s = ground_state(&op, Method::Dense, DENSE_TOL).unwrap();
        let z = op.optimal()[0] as usize;
        let target = s.overlap_plus * s.psi[z];
        let pl = plus_p_ell(&op, s.e_ground, &[4000]).unwrap();
        assert!((pl[0].entry(z) - target).abs() < 1e-9);
    }

    #[test]
    fn psi_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("psi.bin");
        let psi: Vec<f64> = (0..16).map(|i| i as f64 * 0.25).collect();
        let h = PsiHeader { n: 4, b: 0.7, eta: 0.5, seed: 42 };
        write_psi(&p, h, &psi).unwrap();
        let (h2, psi2) = read_psi(&p).unwrap();
        assert_eq!(h, h2);
        assert_eq!(psi, psi2);
        assert_eq!(std::fs::metadata(&p).unwrap().len(), 4 + 4 + 8 + 8 + 8 + 16 * 8);
    }

    #[test]
    fn unique_optimum_detected_for_degree_two() {
        // Even degree: optimum appears together with its global flip.
        let h: CostFunction = PolyCost::new(3, vec![(vec![0, 1], 1.0), (vec![1, 2], 0.5)]).unwrap().into();
        let op = HbOperator::new(&h, 0.5, 0.1).unwrap();
        assert_eq!(op.optimal().len(), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn matvec_is_symmetric(seed in 0u64..1000, b in 0.0f64..2.0) {
            let op = kspin_op(9, seed, 0.5, b);
            let u = random_vector(op.dim(), seed, 3);
            let v = random_vector(op.dim(), seed, 4);
            let mut hu = vec![0.0; op.dim()];
            let mut hv = vec![0.0; op.dim()];
            op.matvec(&u, &mut hu);
            op.matvec(&v, &mut hv);
            prop_assert!((dot(&u, &hv) - dot(&hu, &v)).abs() < 1e-10);
        }
    }
}
