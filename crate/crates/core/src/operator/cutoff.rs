use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::Domain;

use super::{Grid, GridFunction};

/// Coefficients of the quintic smoothstep `10t³ − 15t⁴ + 6t⁵`, lowest order first.
const QUINTIC: [f64; 6] = [0.0, 0.0, 0.0, 10.0, -15.0, 6.0];

/// `η₀`: 0 for `t ≤ 0`, 1 for `t ≥ 1`, quintic smoothstep in between.
pub fn eta0(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t))
    }
}

pub fn eta0_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (1.0 - t) * (1.0 - t)
    }
}

pub fn eta0_second_derivative(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    }
}

/// The ramp `η₀` together with its measured sup norms.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffProfile {
    pub coefficients: [f64; 6],
    /// `max_{[0,1]} max(|η₀|, |η₀′|, |η₀″|)`
    pub c2_norm: f64,
    /// `max_{[0,1]} |η₀′|`
    pub max_slope: f64,
}

impl CutoffProfile {
    /// Number of uniform samples on `[0, 1]` used for the measured norms.
    pub const SAMPLES: usize = 200_000;

    pub fn quintic() -> Self {
        let mut c2: f64 = 0.0;
        let mut slope: f64 = 0.0;
        for j in 0..=Self::SAMPLES {
            let t = j as f64 / Self::SAMPLES as f64;
            let d1 = eta0_derivative(t).abs();
            c2 = c2.max(eta0(t).abs()).max(d1).max(eta0_second_derivative(t).abs());
            slope = slope.max(d1);
        }
        Self { coefficients: QUINTIC, c2_norm: c2, max_slope: slope }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else if t >= 1.0 {
            1.0
        } else {
            self.coefficients.iter().rev().fold(0.0, |acc, &a| acc * t + a)
        }
    }
}

impl CutoffProfile {
    /// Process-wide instance of [`CutoffProfile::quintic`].
    pub fn shared() -> &'static CutoffProfile {
        static PROFILE: OnceLock<CutoffProfile> = OnceLock::new();
        PROFILE.get_or_init(CutoffProfile::quintic)
    }
}

impl Default for CutoffProfile {
    fn default() -> Self {
        Self::quintic()
    }
}

/// `w_σ(x) = η₀(ρ(x)/σ)` inside the domain and 0 outside, as a closed-form function.
#[derive(Debug, Clone)]
pub struct Cutoff<'a> {
    pub domain: &'a Domain,
    pub sigma: f64,
    max_slope: f64,
}

impl<'a> Cutoff<'a> {
    pub fn new(domain: &'a Domain, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::OutOfRange { what: "sigma (requires sigma > 0)", value: sigma });
        }
        Ok(Self { domain, sigma, max_slope: CutoffProfile::shared().max_slope })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let sd = self.domain.signed_distance(x);
        if sd <= 0.0 || !self.domain.contains(x) {
            0.0
        } else {
            eta0(sd / self.sigma)
        }
    }

    /// Measured Lipschitz constant: `max|η₀′| / σ`, since `ρ` is 1-Lipschitz.
    pub fn lipschitz(&self) -> f64 {
        self.max_slope / self.sigma
    }
}

/// Sample `w_σ` on `grid`. Requires `σ ≥ 4h`.
pub fn w_sigma(d: &Domain, sigma: f64, grid: &Grid) -> Result<GridFunction> {
    if sigma < 4.0 * grid.h() {
        return Err(Error::Resolution(format!(
            "sigma = {sigma} is below 4h = {}",
            4.0 * grid.h()
        )));
    }
    let w = Cutoff::new(d, sigma)?;
    Ok(GridFunction::sample(grid, d, |x| w.value(x)))
}
