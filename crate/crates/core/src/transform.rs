//! Scalar functions and closed-form parameter formulas.
//!
//! Everything here is a pure function of its arguments. The only piece of
//! state is the clamp counter carried by [`EtaTransform`], which records how
//! often a normalized energy fell (by rounding) below `-1`.

use std::f64::consts::{LN_2, PI};
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{invalid, Result};

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        invalid(format!("eta must lie in (0,1), got {eta}"))
    }
}

/// The flooding transform `g_eta(x) = min(0, (x + 1 - eta)/eta)`.
///
/// Inputs below `-1` are clamped to `-1` (so the result is `-1`).
pub fn g_eta(eta: f64, x: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(g_unchecked(eta, x.max(-1.0)))
}

/// `f(x) = -g_eta(-x) = max(0, (x - 1 + eta)/eta)`.
pub fn f_eta(eta: f64, x: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(-g_unchecked(eta, (-x).max(-1.0)))
}

#[inline]
fn g_unchecked(eta: f64, x: f64) -> f64 {
    // Compare against the threshold itself so that g(-(1-eta)) is exactly 0.
    let threshold = -(1.0 - eta);
    if x >= threshold {
        0.0
    } else {
        ((x - threshold) / eta).max(-1.0)
    }
}

/// `g_eta` bundled with a counter of clamped inputs.
#[derive(Debug)]
pub struct EtaTransform {
    eta: f64,
    clamped: AtomicU64,
}

impl Clone for EtaTransform {
    fn clone(&self) -> Self {
        Self { eta: self.eta, clamped: AtomicU64::new(self.clamp_count()) }
    }
}

impl EtaTransform {
    pub fn new(eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(Self { eta, clamped: AtomicU64::new(0) })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `g_eta(x)`, counting inputs below `-1`.
    #[inline]
    pub fn g(&self, x: f64) -> f64 {
        if x < -1.0 {
            self.clamped.fetch_add(1, Ordering::Relaxed);
            return -1.0;
        }
        g_unchecked(self.eta, x)
    }

    /// `f(x) = -g(-x)`.
    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        -self.g(-x)
    }

    /// Number of clamped inputs seen so far.
    pub fn clamp_count(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }
}

/// `F(x) = 1 - x + x ln x` on `[0, 1]`, with `F(0) = 1`.
pub fn big_f(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        1.0 - x + x * x.ln()
    }
}

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(q: f64) -> f64 {
    let h = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    h(q) + h(1.0 - q)
}

/// `tau^{-1}(y) = H_2(1/2 - sqrt(1 - y^2)/2)`.
pub fn tau_inverse(y: f64) -> f64 {
    let r = (1.0 - y * y).max(0.0).sqrt();
    binary_entropy(0.5 - 0.5 * r)
}

/// Tail-bound exponent for MAX-k-CSP:
/// `gamma = ratio^2 (1-eta)^2 / (2 ln2 * 2^{2k} k^2)` with `ratio = |E*|/m`.
pub fn gamma_csp(k: u32, ratio: f64, eta: f64) -> f64 {
    let k = k as f64;
    ratio * ratio * (1.0 - eta).powi(2) / (2.0 * LN_2 * 4f64.powf(k) * k * k)
}

/// Tail-bound exponent for the k-spin ensemble:
/// `gamma = (1-eta)^2 / (32 pi ln2 k^2)`.
pub fn gamma_kspin(k: u32, eta: f64) -> f64 {
    let k = k as f64;
    (1.0 - eta).powi(2) / (32.0 * PI * LN_2 * k * k)
}

/// Largest `b` allowed by the tail-bound lemma: `ln2 * gamma / (2 + ln2)`.
pub fn b_max(gamma: f64) -> f64 {
    LN_2 * gamma / (2.0 + LN_2)
}

/// Grid coordinates used when `E*` is unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaPhi {
    pub theta: f64,
    pub phi: f64,
}

/// Map `(W, eta', b', Q)` to `theta = W(1-eta')/Q`, `phi = b' Q/(eta' W)`.
pub fn reparameterize(w: f64, eta_p: f64, b_p: f64, q: f64) -> Result<ThetaPhi> {
    check_eta(eta_p)?;
    if !(0.0..1.0).contains(&b_p) {
        return invalid(format!("b' must lie in [0,1), got {b_p}"));
    }
    if !(w > 0.0 && w <= q) {
        return invalid(format!("need 0 < W <= Q, got W={w}, Q={q}"));
    }
    Ok(ThetaPhi { theta: w * (1.0 - eta_p) / q, phi: b_p * q / (eta_p * w) })
}

/// Inverse map at the true optimum: returns `(eta, b)` with
/// `eta = 1 - Q theta/|E*|` and `b = (|E*|/Q) phi - phi theta`.
pub fn inverse_reparameterize(tp: ThetaPhi, q: f64, e_star_abs: f64) -> (f64, f64) {
    let eta = 1.0 - q * tp.theta / e_star_abs;
    let b = (e_star_abs / q) * tp.phi - tp.phi * tp.theta;
    (eta, b)
}
