//! Scalar constants: Gamma/Beta, the normalisation `c_{N,s}` of the singular
//! integral, sphere areas, ball volumes, the integrals `E_m(m+2s)` and the
//! ratio `b_N(s)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_adaptive;

/// Order `s` of the fractional Laplacian, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if s.is_finite() && s > 0.0 && s < 1.0 {
            Ok(Self(s))
        } else {
            Err(Error::InvalidOrder(s))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(s: FractionalOrder) -> f64 {
        s.0
    }
}

impl std::fmt::Display for FractionalOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Largest argument for which `Γ(x)` is finite in `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// `Γ(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange { what: "gamma_fn (requires x > 0)", value: x });
    }
    if x > GAMMA_MAX_ARG {
        return Err(Error::OutOfRange { what: "gamma_fn (overflow)", value: x });
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return Ok((1..x as u64).map(|k| k as f64).product());
    }
    Ok(libm::tgamma(x))
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfRange { what: "ln_gamma (requires x > 0)", value: x });
    }
    Ok(libm::lgamma(x))
}

/// Euler Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`.
pub fn beta_fn(a: f64, b: f64) -> Result<f64> {
    if a + b < 150.0 {
        Ok(gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?)
    } else {
        Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::OutOfRange { what: "dimension N (requires N >= 1)", value: 0.0 })
    } else {
        Ok(())
    }
}

/// `c_{N,s} = 2^{2s} π^{-N/2} s Γ((N+2s)/2) / Γ(1-s)`.
pub fn c_ns(n: usize, s: FractionalOrder) -> Result<f64> {
    check_dim(n)?;
    let s = s.get();
    let nf = n as f64;
    Ok(4f64.powf(s) * PI.powf(-0.5 * nf) * s * gamma_fn(0.5 * (nf + 2.0 * s))? / gamma_fn(1.0 - s)?)
}

/// Area `ω_{N-1}` of the unit sphere `S^{N-1}` (`ω_0 = 2`).
pub fn sphere_area(n: usize) -> Result<f64> {
    check_dim(n)?;
    if n == 1 {
        return Ok(2.0);
    }
    let nf = n as f64;
    Ok(2.0 * PI.powf(0.5 * nf) / gamma_fn(0.5 * nf)?)
}

/// Volume `|B_1|` of the unit ball, `ω_{N-1}/N`.
pub fn ball_volume(n: usize) -> Result<f64> {
    Ok(sphere_area(n)? / n as f64)
}

/// `E_m(m+2s) = ∫_0^∞ t^{m-2} (1+t²)^{-(m+2s)/2} dt` from its two-step recursion.
pub fn e_m(m: usize, s: FractionalOrder) -> Result<f64> {
    if m < 2 {
        return Err(Error::OutOfRange { what: "e_m (requires m >= 2)", value: m as f64 });
    }
    let sv = s.get();
    let (mut value, start) = if m % 2 == 0 {
        (0.5 * beta_fn(0.5, sv + 0.5)?, 2)
    } else {
        (1.0 / (1.0 + 2.0 * sv), 3)
    };
    let mut k = start + 2;
    while k <= m {
        let kf = k as f64;
        value *= (kf - 3.0) / (kf + 2.0 * sv - 2.0);
        k += 2;
    }
    Ok(value)
}

/// `E_m(m+2s)` by adaptive quadrature: `[0, 1]` directly and the tail through
/// `t → 1/t`, which maps it to `∫_0^1 u^{2s} (1+u²)^{-(m+2s)/2} du`.
pub fn e_m_quadrature(m: usize, s: FractionalOrder, tol: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::OutOfRange { what: "e_m_quadrature (requires m >= 2)", value: m as f64 });
    }
    let sv = s.get();
    let p = 0.5 * (m as f64 + 2.0 * sv);
    let mi = m as i32 - 2;
    let head = integrate_adaptive(|t| t.powi(mi) * (1.0 + t * t).powf(-p), 0.0, 1.0, 0.5 * tol)?;
    let tail = integrate_adaptive(|u| u.powf(2.0 * sv) * (1.0 + u * u).powf(-p), 0.0, 1.0, 0.5 * tol)?;
    Ok(head + tail)
}

fn b_ns_with(n: usize, s: FractionalOrder, e_n: f64) -> Result<f64> {
    let sv = s.get();
    let nf = n as f64;
    Ok(2.0 / gamma_fn(sv + 0.5)? * gamma_fn(0.5 * (nf + 2.0 * sv))? / gamma_fn(0.5 * (nf - 1.0))? * e_n)
}

/// `b_N(s) = 2/Γ(s+1/2) · Γ((N+2s)/2)/Γ((N-1)/2) · E_N(N+2s)`; `b_1 ≡ 1`.
pub fn b_ns(n: usize, s: FractionalOrder) -> Result<f64> {
    check_dim(n)?;
    if n == 1 {
        return Ok(1.0);
    }
    b_ns_with(n, s, e_m(n, s)?)
}

/// `b_N(s)` with `E_N` taken from [`e_m_quadrature`].
pub fn b_ns_quadrature(n: usize, s: FractionalOrder, tol: f64) -> Result<f64> {
    check_dim(n)?;
    if n == 1 {
        return Ok(1.0);
    }
    b_ns_with(n, s, e_m_quadrature(n, s, tol)?)
}

/// All dimension-dependent constants for one `(N, s)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsTable {
    #[serde(rename = "N")]
    pub n: usize,
    pub s: FractionalOrder,
    pub c_ns: f64,
    pub omega_nm1: f64,
    pub vol_b1: f64,
    /// `E_N(N+2s)`; absent for `N = 1` where the integral family starts at `m = 2`.
    pub e_n: Option<f64>,
    pub b_ns: f64,
}

impl ConstantsTable {
    pub fn compute(n: usize, s: FractionalOrder) -> Result<Self> {
        let omega_nm1 = sphere_area(n)?;
        Ok(Self {
            n,
            s,
            c_ns: c_ns(n, s)?,
            omega_nm1,
            vol_b1: omega_nm1 / n as f64,
            e_n: if n >= 2 { Some(e_m(n, s)?) } else { None },
            b_ns: b_ns(n, s)?,
        })
    }
}
