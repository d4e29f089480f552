//! Closed-form constants and inequalities of the area-law argument.
//!
//! Everything here is a pure function; inputs such as the decay rate `γ` and
//! prefactor `C` are supplied by the caller (measured or assumed).

use std::f64::consts::LN_2;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("{what} must be positive and finite, got {value}")]
    NonPositive { what: &'static str, value: f64 },
    #[error("R_K = {r} is outside [0, 1/2]; the envelope does not apply")]
    EnvelopeInapplicable { r: f64 },
    #[error("gamma = {gamma} must exceed 2 ln 2 for the eigenvalue tail to be summable")]
    SlowDecay { gamma: f64 },
    #[error("missing {what} at index {index}")]
    MissingEntry { what: &'static str, index: i64 },
}

fn positive(what: &'static str, value: f64) -> Result<f64, BoundsError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(BoundsError::NonPositive { what, value })
    }
}

/// `A = (δ / (2(2λ + δ)))²`.
pub fn constant_a(lambda: f64, delta: f64) -> Result<f64, BoundsError> {
    positive("lambda", lambda)?;
    positive("delta", delta)?;
    Ok((delta / (2.0 * (2.0 * lambda + delta))).powi(2))
}

/// A real sequence indexed by integers starting at `first`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub first: i64,
    pub values: Vec<f64>,
}

impl Window {
    pub fn new(first: i64, values: Vec<f64>) -> Self {
        Self { first, values }
    }

    pub fn constant(first: i64, len: usize, value: f64) -> Self {
        Self { first, values: vec![value; len] }
    }

    pub fn get(&self, i: i64) -> Option<f64> {
        usize::try_from(i - self.first).ok().and_then(|j| self.values.get(j).copied())
    }

    pub fn indices(&self) -> std::ops::Range<i64> {
        self.first..self.first + self.values.len() as i64
    }
}

/// `Π_{i=1..k} δ_{x+i} / (2(δ_{x+i} + λ_{x+i−1,x+i} + λ_{x+i,x+i+1}))`.
/// `lambdas` is indexed by the left end of each bond.
pub fn disorder_product(x: i64, k: usize, lambdas: &Window, deltas: &Window) -> Result<f64, BoundsError> {
    let mut prod = 1.0;
    for i in 1..=k as i64 {
        let y = x + i;
        let d = deltas.get(y).ok_or(BoundsError::MissingEntry { what: "delta", index: y })?;
        let left = lambdas.get(y - 1).ok_or(BoundsError::MissingEntry { what: "lambda", index: y - 1 })?;
        let right = lambdas.get(y).ok_or(BoundsError::MissingEntry { what: "lambda", index: y })?;
        prod *= d / (2.0 * (d + left + right));
    }
    Ok(prod)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisorderCheck {
    pub holds: bool,
    /// Largest `λ_{x,x±1}/δ_x` over the window, if any bond touches it.
    pub worst_ratio: Option<f64>,
    pub worst_site: Option<i64>,
}

/// Whether `λ_{x,y}/δ_x ≤ λ/δ` for every site `x` of `deltas` and each bond at `x`.
pub fn check_disorder_condition(lambdas: &Window, deltas: &Window, lambda: f64, delta: f64) -> DisorderCheck {
    let bound = lambda / delta;
    let mut worst: Option<(f64, i64)> = None;
    for x in deltas.indices() {
        let d = deltas.values[(x - deltas.first) as usize];
        for bond in [x - 1, x] {
            if let Some(l) = lambdas.get(bond) {
                let r = l / d;
                if worst.is_none_or(|(w, _)| r > w) {
                    worst = Some((r, x));
                }
            }
        }
    }
    DisorderCheck {
        holds: worst.is_none_or(|(w, _)| w <= bound),
        worst_ratio: worst.map(|w| w.0),
        worst_site: worst.map(|w| w.1),
    }
}

/// `R_K = C₁ e^{−γK/2}`.
pub fn r_k(c1: f64, gamma: f64, k: u32) -> f64 {
    c1 * (-0.5 * gamma * k as f64).exp()
}

/// `(A^{2K}(1 − R_K), A^{−2K}(1 + R_K))`, valid for `0 ≤ R_K ≤ 1/2`.
pub fn lemma1_envelope(a: f64, k: u32, r: f64) -> Result<(f64, f64), BoundsError> {
    positive("A", a)?;
    if !(0.0..=0.5).contains(&r) {
        return Err(BoundsError::EnvelopeInapplicable { r });
    }
    let a2k = a.powi(2 * k as i32);
    Ok((a2k * (1.0 - r), (1.0 + r) / a2k))
}

/// `min{2, C e^{−γm}}`.
pub fn norm_bound(c: f64, gamma: f64, m: u32) -> f64 {
    (c * (-gamma * m as f64).exp()).min(2.0)
}

/// Smallest integer `K ≥ 2` with `C e^{−γK} ≤ 1`.
///
/// The comparison `ln C ≤ γK` allows a relative slack of `1e−12` so that exact
/// boundary cases such as `C = e⁴, γ = 1` are not pushed up by rounding.
pub fn choose_k(c: f64, gamma: f64) -> Result<u32, BoundsError> {
    positive("C", c)?;
    positive("gamma", gamma)?;
    let ratio = c.ln() / gamma;
    let slack = 1e-12 * ratio.abs().max(1.0);
    Ok(((ratio - slack).ceil().max(2.0)) as u32)
}

/// Decay rates entering the separate steps of the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedRates {
    pub gamma: f64,
    /// `γ/3`, the rate of the reduced-density bound for the full slit box.
    pub third: f64,
    /// `2γ/7`, the rate obtained through the staircase circuit.
    pub two_sevenths: f64,
    /// `γ/2`, the rate of `R_K`.
    pub half: f64,
}

pub fn derived_rates(gamma: f64) -> DerivedRates {
    DerivedRates {
        gamma,
        third: gamma / 3.0,
        two_sevenths: 2.0 * gamma / 7.0,
        half: gamma / 2.0,
    }
}

/// Every constant of the entropy bound `S ≤ 2(K+2) + c₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBound {
    #[serde(rename = "K")]
    pub k: u32,
    pub xi: f64,
    pub c: f64,
    pub nu: f64,
    /// `log₂ ν = 2(K+2)`, the bound on the head of the spectrum.
    pub s1_bound: f64,
    pub c1: f64,
    /// Upper bound on the neglected part of the `c₁` series.
    pub c1_remainder: f64,
    pub bound: f64,
}

/// Default accuracy of the `c₁` series.
pub const C1_TOLERANCE: f64 = 1e-9;

pub fn entropy_bound(c: f64, gamma: f64) -> Result<EntropyBound, BoundsError> {
    entropy_bound_with(c, gamma, C1_TOLERANCE)
}

/// As [`entropy_bound`] with an explicit bound on the series remainder.
pub fn entropy_bound_with(c_big: f64, gamma: f64, tol: f64) -> Result<EntropyBound, BoundsError> {
    positive("C", c_big)?;
    positive("gamma", gamma)?;
    positive("tolerance", tol)?;
    if gamma <= 2.0 * LN_2 {
        return Err(BoundsError::SlowDecay { gamma });
    }
    let k = choose_k(c_big, gamma)?;
    let xi = gamma / (2.0 * LN_2);
    let c = (gamma * (k + 1) as f64).exp() / (1.0 - (-gamma).exp());
    let nu_exp = 2 * (k + 2);
    let nu = 2f64.powi(nu_exp as i32);
    let (c1, c1_remainder) = tail_entropy(c, xi, nu, tol);
    let s1_bound = nu_exp as f64;
    Ok(EntropyBound {
        k,
        xi,
        c,
        nu,
        s1_bound,
        c1,
        c1_remainder,
        bound: s1_bound + c1,
    })
}

/// `x^{−s}(p ln x + r)` and its derivatives, which keep this shape.
#[derive(Debug, Clone, Copy)]
struct LogPower {
    s: f64,
    p: f64,
    r: f64,
}

impl LogPower {
    fn eval(&self, x: f64) -> f64 {
        x.powf(-self.s) * (self.p * x.ln() + self.r)
    }

    fn derivative(&self) -> Self {
        Self {
            s: self.s + 1.0,
            p: -self.s * self.p,
            r: self.p - self.s * self.r,
        }
    }

    /// `∫_x^∞` for `s > 1`.
    fn tail_integral(&self, x: f64) -> f64 {
        let e = self.s - 1.0;
        x.powf(-e) * ((self.p * x.ln() + self.r) / e + self.p / (e * e))
    }

    /// Point beyond which the sign is that of `p`.
    fn sign_settles_at(&self) -> f64 {
        if self.p == 0.0 {
            0.0
        } else {
            (-self.r / self.p).exp()
        }
    }
}

/// Even-index Bernoulli numbers `B₂, B₄, B₆, B₈`.
const BERNOULLI: [f64; 4] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0];

/// `−Σ_{j>ν} (c/j^ξ) log₂(c/j^ξ)` by direct summation to `N` plus an
/// Euler–Maclaurin tail with three correction terms. Returns the sum and a
/// bound on the Euler–Maclaurin remainder, which is at most `tol`.
fn tail_entropy(c: f64, xi: f64, nu: f64, tol: f64) -> (f64, f64) {
    // (c/j^ξ)(ξ log₂ j − log₂ c) = j^{−ξ}(p ln j + r)
    let f = LogPower {
        s: xi,
        p: c * xi / LN_2,
        r: -c * c.ln() / LN_2,
    };
    let derivs: Vec<LogPower> = std::iter::successors(Some(f), |d| Some(d.derivative())).take(9).collect();
    let remainder = |n: f64| {
        // |R| ≤ 2ζ(8)/(2π)^8 ∫_N^∞ |f⁽⁸⁾|, the total variation of f⁽⁷⁾ on [N, ∞),
        // which has at most one turning point
        let zeta8 = std::f64::consts::PI.powi(8) / 9450.0;
        let turn = derivs[8].sign_settles_at();
        let tv = if turn > n {
            (derivs[7].eval(n) - derivs[7].eval(turn)).abs() + derivs[7].eval(turn).abs()
        } else {
            derivs[7].eval(n).abs()
        };
        2.0 * zeta8 / (2.0 * std::f64::consts::PI).powi(8) * tv
    };
    let first = nu.floor() + 1.0;
    let mut n = first;
    let mut step = 64.0;
    while remainder(n) > tol {
        n = first + step;
        step *= 2.0;
    }
    let mut sum = Neumaier::default();
    let mut j = first;
    while j < n {
        sum.add(f.eval(j));
        j += 1.0;
    }
    // Σ_{j≥N} f(j) = ∫_N^∞ f + f(N)/2 − Σ_k B_{2k}/(2k)! f^{(2k−1)}(N) + R
    sum.add(f.tail_integral(n));
    sum.add(0.5 * f.eval(n));
    let mut fact = 1.0;
    for (k, b) in BERNOULLI.iter().enumerate().take(3) {
        let order = 2 * k + 2;
        fact *= ((order - 1) * order) as f64;
        sum.add(-b / fact * derivs[order - 1].eval(n));
    }
    (sum.total(), remainder(n))
}

/// Compensated summation.
#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}
