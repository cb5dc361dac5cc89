//! Numerical checks of the pointwise estimates behind the upper bound: the
//! plane-wave symbol, the size of `(−Δ)^s w_σ`, and the cross term `𝓛^s_z w_σ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::operator::{apply_pointwise, mixed_term, Cutoff, CutoffProfile, QuadratureScheme};
use crate::special::{c_ns, sphere_area, FractionalOrder};

/// Golden-angle spiral of `count` points filling the disk of radius `radius` about `center`.
pub fn sunflower_points(count: usize, center: [f64; 2], radius: f64) -> Vec<[f64; 2]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|j| {
            let r = radius * ((j as f64 + 0.5) / count as f64).sqrt();
            let t = golden * j as f64;
            [center[0] + r * t.cos(), center[1] + r * t.sin()]
        })
        .collect()
}

/// Plane-wave evaluation at two near-ball radii and its Richardson value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWaveCheck {
    pub n: usize,
    pub s: f64,
    pub z_norm: f64,
    pub coarse: f64,
    pub fine: f64,
    pub extrapolated: f64,
    pub relative_error: f64,
}

/// Window radius and panel width for plane waves.
pub const PLANE_WAVE_WINDOW: f64 = 32.0;
pub const PLANE_WAVE_RESOLUTION: f64 = 0.25;

/// `(−Δ)^s e^{ix·z}` at `x = 0` divided by `|z|^{2s}`, with the near ball of
/// radius `1/(8|z|)` and half of it, combined for the `h^{4−2s}` error.
pub fn plane_wave_check(n: usize, s: FractionalOrder, z_norm: f64) -> Result<PlaneWaveCheck> {
    if !(z_norm > 0.0) {
        return Err(Error::OutOfRange { what: "|z| (requires |z| > 0)", value: z_norm });
    }
    let dir: Vec<f64> = if n == 1 { vec![1.0] } else { vec![0.6, 0.8] };
    let z: Vec<f64> = dir.iter().map(|d| d * z_norm).collect();
    let u = |y: &[f64]| Complex64::from_polar(1.0, y.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>());
    let h0 = 1.0 / (8.0 * z_norm);
    let q = QuadratureScheme::windowed(n, s, h0, PLANE_WAVE_WINDOW, PLANE_WAVE_RESOLUTION)?;
    let x = vec![0.0; n];
    let coarse = apply_pointwise(&u, &x, &q)?.re;
    let fine = apply_pointwise(&u, &x, &q.clone().with_h(0.5 * h0))?.re;
    let p = 4.0 - 2.0 * s.get();
    let f = 2f64.powf(p);
    let extrapolated = (f * fine - coarse) / (f - 1.0);
    let exact = z_norm.powf(2.0 * s.get());
    Ok(PlaneWaveCheck {
        n,
        s: s.get(),
        z_norm,
        coarse,
        fine,
        extrapolated,
        relative_error: (extrapolated - exact).abs() / exact,
    })
}

/// `(c_{N,s}/2)·‖η₀‖_{C²}·ω_{N−1}σ^{−2s}(1/s + 1/(1−s))`.
pub fn cutoff_estimate_bound(n: usize, s: FractionalOrder, sigma: f64, c2_norm: f64) -> Result<f64> {
    let sv = s.get();
    Ok(0.5 * c_ns(n, s)? * c2_norm * sphere_area(n)? * sigma.powf(-2.0 * sv) * (1.0 / sv + 1.0 / (1.0 - sv)))
}

/// Largest measured `|(−Δ)^s w_σ|` over a point set against the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffCheck {
    pub s: f64,
    pub sigma: f64,
    pub points: usize,
    pub max_measured: f64,
    pub bound: f64,
    /// the bound as stated, `2c_{N,s}ω_{N−1}σ^{−2s}`
    pub stated_bound: f64,
    pub holds: bool,
}

/// Evaluate `(−Δ)^s w_σ` at each point with near ball `σ/16` and panel width `σ/4`.
pub fn cutoff_estimate_check(d: &Domain, s: FractionalOrder, sigma: f64, points: &[Vec<f64>]) -> Result<CutoffCheck> {
    let n = d.dim();
    let w = Cutoff::new(d, sigma)?;
    let u = |y: &[f64]| Complex64::new(w.value(y), 0.0);
    let q = QuadratureScheme::compact(n, s, sigma / 16.0, d.box_diameter(), sigma / 4.0)?;
    let mut max_measured: f64 = 0.0;
    for x in points {
        if !d.contains(x) {
            return Err(Error::Hypothesis(format!("sample point {x:?} outside the domain")));
        }
        max_measured = max_measured.max(apply_pointwise(&u, x, &q)?.norm());
    }
    let bound = cutoff_estimate_bound(n, s, sigma, CutoffProfile::shared().c2_norm)?;
    let stated_bound = 2.0 * c_ns(n, s)? * sphere_area(n)? * sigma.powf(-2.0 * s.get());
    Ok(CutoffCheck {
        s: s.get(),
        sigma,
        points: points.len(),
        max_measured,
        bound,
        stated_bound,
        holds: max_measured <= bound,
    })
}

/// Both forms of the cross-term bound for given `|z|`, `R` and Lipschitz constant `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedBound {
    /// `c[Lω|z|^{2s−1}/(2(1−s)) + 2Lω G_s + (ω/s)(4R)^{−2s}]`
    pub rigorous: f64,
    /// the three-term case formula with `2/σ` replaced by `L`
    pub literal: f64,
}

/// Requires `|z| ≥ 1/(4R)`.
pub fn mixed_term_bound(n: usize, s: FractionalOrder, z_norm: f64, big_r: f64, lipschitz: f64) -> Result<MixedBound> {
    if !(z_norm * 4.0 * big_r >= 1.0) {
        return Err(Error::Hypothesis(format!("|z| = {z_norm} is below 1/(4R)")));
    }
    let sv = s.get();
    let c = c_ns(n, s)?;
    let omega = sphere_area(n)?;
    let l = lipschitz;
    let near = l * omega * z_norm.powf(2.0 * sv - 1.0) / (2.0 * (1.0 - sv));
    // G_s = ∫_{1/|z|}^{4R} r^{−2s} dr, bounded above in the s > 1/2 case
    let (g, literal_middle) = if sv > 0.5 {
        let g = z_norm.powf(2.0 * sv - 1.0) / (2.0 * sv - 1.0);
        (g, 0.5 * l * omega * g)
    } else if sv == 0.5 {
        let g = (4.0 * big_r * z_norm).ln();
        (g, 0.5 * l * omega * (z_norm.ln() + (4.0 * big_r).ln()))
    } else {
        let g = (4.0 * big_r).powf(1.0 - 2.0 * sv) / (1.0 - 2.0 * sv);
        (g, 0.5 * l * omega * g)
    };
    let rigorous = c * (near + 2.0 * l * omega * g + omega / sv * (4.0 * big_r).powf(-2.0 * sv));
    let literal = c * (near + literal_middle + omega / (2.0 * sv) * big_r.powf(-2.0 * sv));
    Ok(MixedBound { rigorous, literal })
}

/// One sampled cross-term evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedSample {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub measured: f64,
    pub bound: MixedBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedCheck {
    pub s: f64,
    pub sigma: f64,
    pub samples: Vec<MixedSample>,
    /// every sample below the rigorous bound
    pub holds: bool,
    /// every sample below the literal bound
    pub literal_holds: bool,
    /// largest `measured / rigorous`
    pub worst_ratio: f64,
}

/// Cross-term samples at points `x` paired with frequencies `z`, `R` the inradius.
pub fn mixed_term_check(
    d: &Domain,
    s: FractionalOrder,
    sigma: f64,
    big_r: f64,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<MixedCheck> {
    let n = d.dim();
    let q = QuadratureScheme::compact(n, s, sigma / 16.0, d.box_diameter(), sigma / 4.0)?;
    let lipschitz = Cutoff::new(d, sigma)?.lipschitz();
    let mut samples = Vec::with_capacity(pairs.len());
    for (x, z) in pairs {
        let zn = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let measured = mixed_term(d, sigma, z, x, &q)?.norm();
        let bound = mixed_term_bound(n, s, zn, big_r, lipschitz)?;
        samples.push(MixedSample { x: x.clone(), z: z.clone(), measured, bound });
    }
    let holds = samples.iter().all(|m| m.measured <= m.bound.rigorous);
    let literal_holds = samples.iter().all(|m| m.measured <= m.bound.literal);
    let worst_ratio = samples.iter().map(|m| m.measured / m.bound.rigorous).fold(0.0, f64::max);
    Ok(MixedCheck { s: s.get(), sigma, samples, holds, literal_holds, worst_ratio })
}

/// Interior sample points of the unit ball of dimension `n` within `radius`:
/// a sunflower in the disk, evenly spaced points on the interval.
pub fn ball_samples(n: usize, count: usize, radius: f64) -> Vec<Vec<f64>> {
    if n == 1 {
        let step = if count > 1 { 2.0 * radius / (count - 1) as f64 } else { 0.0 };
        (0..count).map(|j| vec![if count > 1 { -radius + step * j as f64 } else { 0.0 }]).collect()
    } else {
        sunflower_points(count, [0.0, 0.0], radius).iter().map(|p| p.to_vec()).collect()
    }
}

/// `(x, z)` pairs in the unit ball of dimension `n` with `|z|` spread
/// geometrically over `[1.5, 12]`.
pub fn default_mixed_pairs(n: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let xs = ball_samples(n, count, 0.95);
    let golden = PI * (5f64.sqrt() - 1.0);
    xs.into_iter()
        .enumerate()
        .map(|(j, x)| {
            let t = if count > 1 { j as f64 / (count - 1) as f64 } else { 0.0 };
            let zn = 1.5 * 8f64.powf(t);
            let a = golden * j as f64 + 0.4;
            let z = if n == 1 { vec![zn * a.cos().signum()] } else { vec![zn * a.cos(), zn * a.sin()] };
            (x, z)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sunflower_stays_inside() {
        let p = sunflower_points(100, [0.0, 0.0], 0.9);
        assert_eq!(p.len(), 100);
        assert!(p.iter().all(|x| x[0].hypot(x[1]) < 0.9));
        let line = ball_samples(1, 5, 0.5);
        assert_eq!(line, vec![vec![-0.5], vec![-0.25], vec![0.0], vec![0.25], vec![0.5]]);
        let pairs = default_mixed_pairs(1, 20);
        assert!(pairs.iter().all(|(x, z)| x[0].abs() <= 0.95 && (1.5..=12.0 + 1e-12).contains(&z[0].abs())));
    }

    #[test]
    fn mixed_bound_dominates_literal() {
        for s in [0.25, 0.5, 0.75] {
            let s = FractionalOrder::new(s).unwrap();
            let b = mixed_term_bound(2, s, 3.0, 1.0, 7.5).unwrap();
            assert!(b.rigorous > b.literal);
        }
        assert!(mixed_term_bound(2, FractionalOrder::new(0.5).unwrap(), 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn cutoff_bound_exceeds_the_proof_chain() {
        let s = FractionalOrder::new(0.5).unwrap();
        let c = c_ns(2, s).unwrap();
        let omega = 2.0 * PI;
        let sigma: f64 = 0.25;
        let c2 = 10.0 / 3f64.sqrt();
        let chain = 0.5 * c * omega * sigma.powf(-1.0) * (c2 / (2.0 * 0.5) + 2.0);
        assert!(cutoff_estimate_bound(2, s, sigma, c2).unwrap() >= chain);
    }
}
