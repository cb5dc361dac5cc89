use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature::GaussLegendre;
use crate::special::{c_ns, sphere_area, FractionalOrder};

use super::cutoff::Cutoff;

/// Treatment of the ball `|ζ| < h` around the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NearCorrection {
    /// second-order Taylor expansion, with the Laplacian replaced by the
    /// 2N+1 point central difference of step `h`
    SecondDifference,
}

/// How the integral beyond the quadrature region is accounted for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel {
    /// `u` vanishes beyond `r_far` from the evaluation point; the tail is
    /// exactly `u(x)·c_{N,s}ω_{N−1}r_far^{−2s}/(2s)`
    CompactSupport,
    /// the kernel is multiplied by a `C^∞` window equal to 1 on `[0, R]` and
    /// 0 beyond `2R`; the non-oscillatory part of the complement is added
    /// back analytically and the oscillatory part is dropped
    SmoothWindow { radius: f64 },
}

/// Parameters of the pointwise quadrature for `(−Δ)^s u(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    pub n: usize,
    pub s: FractionalOrder,
    /// radius of the Taylor-corrected ball around the singularity
    pub h: f64,
    /// outer radius of the quadrature region
    pub r_far: f64,
    pub near_correction: NearCorrection,
    pub tail: TailModel,
    pub tail_coefficient: f64,
    /// panel width and arc length used for `r ≤ inner_radius`
    pub inner_radius: f64,
    pub inner_resolution: f64,
    /// panel width and arc length used beyond `inner_radius`
    pub outer_resolution: f64,
    pub gauss_order: usize,
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

impl QuadratureScheme {
    pub const DEFAULT_GAUSS_ORDER: usize = 12;

    /// For `u` supported in a set of diameter `diameter` containing the
    /// evaluation point: `r_far = diameter + 2`.
    pub fn compact(n: usize, s: FractionalOrder, h: f64, diameter: f64, resolution: f64) -> Result<Self> {
        Self::check(n, h, resolution)?;
        let r_far = diameter + 2.0;
        let sv = s.get();
        let tail_coefficient = c_ns(n, s)? * sphere_area(n)? * r_far.powf(-2.0 * sv) / (2.0 * sv);
        Ok(Self {
            n,
            s,
            h,
            r_far,
            near_correction: NearCorrection::SecondDifference,
            tail: TailModel::CompactSupport,
            tail_coefficient,
            inner_radius: r_far,
            inner_resolution: resolution,
            outer_resolution: resolution,
            gauss_order: Self::DEFAULT_GAUSS_ORDER,
        })
    }

    /// Smooth window of radius `radius`, for bounded oscillatory `u`.
    pub fn windowed(n: usize, s: FractionalOrder, h: f64, radius: f64, resolution: f64) -> Result<Self> {
        Self::check(n, h, resolution)?;
        if !(radius > h) {
            return Err(Error::OutOfRange { what: "window radius (requires radius > h)", value: radius });
        }
        let sv = s.get();
        let rule = GaussLegendre::new(24);
        let pieces = 16;
        let mut blend = 0.0;
        for p in 0..pieces {
            let a = radius * (1.0 + p as f64 / pieces as f64);
            let b = radius * (1.0 + (p + 1) as f64 / pieces as f64);
            blend += rule.integrate(a, b, |r| smooth_step(r / radius - 1.0) * r.powf(-1.0 - 2.0 * sv));
        }
        let tail_coefficient =
            c_ns(n, s)? * sphere_area(n)? * (blend + (2.0 * radius).powf(-2.0 * sv) / (2.0 * sv));
        Ok(Self {
            n,
            s,
            h,
            r_far: 2.0 * radius,
            near_correction: NearCorrection::SecondDifference,
            tail: TailModel::SmoothWindow { radius },
            tail_coefficient,
            inner_radius: 0.0,
            inner_resolution: resolution,
            outer_resolution: resolution,
            gauss_order: Self::DEFAULT_GAUSS_ORDER,
        })
    }

    /// Use a finer resolution for `r ≤ radius`.
    pub fn with_inner(mut self, radius: f64, resolution: f64) -> Self {
        self.inner_radius = radius;
        self.inner_resolution = resolution;
        self
    }

    pub fn with_h(mut self, h: f64) -> Self {
        self.h = h;
        self
    }

    fn check(n: usize, h: f64, resolution: f64) -> Result<()> {
        if !(1..=2).contains(&n) {
            return Err(Error::Dimension(format!("pointwise quadrature for N = {n}")));
        }
        if !(h > 0.0 && resolution > 0.0 && h.is_finite() && resolution.is_finite()) {
            return Err(Error::Resolution(format!("h = {h} and resolution = {resolution} must be positive")));
        }
        Ok(())
    }

    /// Kernel window `χ(r)`.
    pub fn window(&self, r: f64) -> f64 {
        match self.tail {
            TailModel::CompactSupport => {
                if r <= self.r_far {
                    1.0
                } else {
                    0.0
                }
            }
            TailModel::SmoothWindow { radius } => 1.0 - smooth_step(r / radius - 1.0),
        }
    }

    fn resolution_at(&self, r: f64) -> f64 {
        if r < self.inner_radius {
            self.inner_resolution
        } else {
            self.outer_resolution
        }
    }

    /// Radial panels covering `[h, r_far]`: widths double from `h` up to the
    /// local resolution, then stay at the resolution.
    pub fn radial_panels(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut a = self.h;
        let mut graded = self.h;
        while a < self.r_far * (1.0 - 1e-14) {
            let target = self.resolution_at(a);
            let width = graded.min(target);
            let mut b = (a + width).min(self.r_far);
            if a < self.inner_radius && b > self.inner_radius {
                b = self.inner_radius;
            }
            out.push((a, b));
            a = b;
            if graded < target {
                graded *= 2.0;
            }
        }
        out
    }

    fn angular_nodes(&self, r: f64) -> usize {
        ((PI * r / self.resolution_at(r)).ceil() as usize).max(32)
    }

    /// `∫_{h<|ζ|} χ(|ζ|) g(ζ) |ζ|^{−N−2s} dζ`, with `g` symmetrised over `±ζ`.
    fn far_integral<G: Fn(&[f64]) -> Complex64>(&self, g: G) -> Complex64 {
        let rule = GaussLegendre::new(self.gauss_order);
        let p = -1.0 - 2.0 * self.s.get();
        let mut total = Complex64::new(0.0, 0.0);
        for (a, b) in self.radial_panels() {
            for (r, w) in rule.mapped(a, b) {
                let chi = self.window(r);
                if chi == 0.0 {
                    continue;
                }
                let shell = if self.n == 1 {
                    g(&[r]) + g(&[-r])
                } else {
                    let m = self.angular_nodes(r);
                    let dth = PI / m as f64;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..m {
                        let (sn, cs) = (j as f64 * dth).sin_cos();
                        acc += g(&[r * cs, r * sn]) + g(&[-r * cs, -r * sn]);
                    }
                    acc * dth
                };
                total += shell * (w * chi * r.powf(p));
            }
        }
        total
    }

    /// `∫_{|ζ|<h} ζ_k² |ζ|^{−N−2s} dζ`, the same for every axis `k`.
    fn near_moment(&self) -> Result<f64> {
        let sv = self.s.get();
        Ok(sphere_area(self.n)? * self.h.powf(2.0 - 2.0 * sv) / (self.n as f64 * (2.0 - 2.0 * sv)))
    }
}

fn shifted(x: &[f64], d: &[f64]) -> [f64; 2] {
    let mut y = [0.0; 2];
    for k in 0..x.len() {
        y[k] = x[k] + d[k];
    }
    y
}

fn finite(v: Complex64, what: &'static str) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Quadrature value of `(−Δ)^s u(x)` in the symmetric second-difference form.
pub fn apply_pointwise(u: &dyn Fn(&[f64]) -> Complex64, x: &[f64], q: &QuadratureScheme) -> Result<Complex64> {
    let n = q.n;
    if x.len() != n {
        return Err(Error::Dimension(format!("point of dimension {} for an N = {n} scheme", x.len())));
    }
    let c = c_ns(n, q.s)?;
    let ux = finite(u(x), "u(x)")?;
    let at = |d: &[f64]| u(&shifted(x, d)[..n]);
    let mut lap = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let mut e = [0.0; 2];
        e[k] = q.h;
        let plus = at(&e[..n]);
        e[k] = -q.h;
        let minus = at(&e[..n]);
        lap += plus + minus - ux * 2.0;
    }
    lap /= q.h * q.h;
    let near = -0.5 * c * q.near_moment()? * lap;
    let far = c * q.far_integral(|z| ux - at(z));
    finite(near + far + ux * q.tail_coefficient, "apply_pointwise")
}

/// `c_{N,s} ∫_{|ζ|<ρ} (1 − cos(ζ·z)) |ζ|^{−N−2s} dζ`, which tends to `|z|^{2s}` as `ρ → ∞`.
pub fn plane_wave_partial_symbol(n: usize, s: FractionalOrder, zn: f64, rho: f64) -> Result<f64> {
    if zn == 0.0 {
        return Ok(0.0);
    }
    let sv = s.get();
    let shell = |r: f64| -> f64 {
        let x = r * zn;
        if n == 1 {
            4.0 * (0.5 * x).sin().powi(2)
        } else if x < 1e-3 {
            2.0 * PI * (x * x / 4.0 - x.powi(4) / 64.0)
        } else {
            2.0 * PI * (1.0 - libm::j0(x))
        }
    };
    let rule = GaussLegendre::new(16);
    let f = |r: f64| shell(r) * r.powf(-1.0 - 2.0 * sv);
    let knee = (1.0 / zn).min(rho);
    // geometric panels towards the origin, where the integrand behaves like r^{1-2s}
    let mut total = 0.0;
    let mut b = knee;
    for _ in 0..80 {
        let a = 0.5 * b;
        total += rule.integrate(a, b, f);
        b = a;
    }
    let width = 0.5 / zn;
    let mut a = knee;
    while a < rho {
        let b = (a + width).min(rho);
        total += rule.integrate(a, b, f);
        a = b;
    }
    Ok(c_ns(n, s)? * total)
}

/// Quadrature value of the cross term
/// `𝓛^s_z w_σ(x) = c_{N,s} ∫ (w_σ(x) − w_σ(x̃))(e^{ix̃·z} − e^{ix·z}) |x − x̃|^{−N−2s} dx̃`.
///
/// The scheme must be of compact-support type with `r_far` beyond the
/// bounding-box diameter of `d`. Past `r_far` the integrand reduces to
/// `w_σ(x)(e^{ix̃·z} − e^{ix·z})`, which is integrated exactly through the
/// plane-wave symbol.
pub fn mixed_term(d: &Domain, sigma: f64, z: &[f64], x: &[f64], q: &QuadratureScheme) -> Result<Complex64> {
    let n = q.n;
    if x.len() != n || z.len() != n || d.dim() != n {
        return Err(Error::Dimension("point, frequency and domain dimensions differ".into()));
    }
    if !d.contains(x) {
        return Err(Error::Hypothesis(format!("mixed_term evaluated at {x:?} outside the domain")));
    }
    if q.tail != TailModel::CompactSupport || q.r_far <= d.box_diameter() {
        return Err(Error::Hypothesis(
            "mixed_term needs a compact-support scheme reaching past the domain".into(),
        ));
    }
    let c = c_ns(n, q.s)?;
    let w = Cutoff::new(d, sigma)?;
    let dot = |y: &[f64]| y.iter().zip(z).map(|(a, b)| a * b).sum::<f64>();
    let zn = dot(z).sqrt();
    let wx = w.value(x);
    let ex = Complex64::from_polar(1.0, dot(x));
    let mut grad_dot_z = 0.0;
    for k in 0..n {
        let mut e = [0.0; 2];
        e[k] = q.h;
        let plus = w.value(&shifted(x, &e[..n])[..n]);
        e[k] = -q.h;
        let minus = w.value(&shifted(x, &e[..n])[..n]);
        grad_dot_z += z[k] * (plus - minus) / (2.0 * q.h);
    }
    let near = Complex64::new(0.0, -1.0) * ex * (c * grad_dot_z * q.near_moment()?);
    let far = c * q.far_integral(|zeta| {
        let y = shifted(x, zeta);
        let y = &y[..n];
        (Complex64::from_polar(1.0, dot(y)) - ex) * (wx - w.value(y))
    });
    let outside = zn.powf(2.0 * q.s.get()) - plane_wave_partial_symbol(n, q.s, zn, q.r_far)?;
    let tail = -ex * (wx * outside);
    finite(near + far + tail, "mixed_term")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_symbol_approaches_full_symbol() {
        for (n, s) in [(1, 0.25), (1, 0.75), (2, 0.5)] {
            let s = ord(s);
            let zn: f64 = 2.0;
            let full = zn.powf(2.0 * s.get());
            let rho = 200.0;
            let part = plane_wave_partial_symbol(n, s, zn, rho).unwrap();
            // the remainder is at most c ω ρ^{-2s}/s in absolute value
            let bound = c_ns(n, s).unwrap() * sphere_area(n).unwrap() * rho.powf(-2.0 * s.get()) / s.get();
            assert!((full - part).abs() <= bound, "n={n} full={full} part={part}");
        }
    }

    fn ord(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn constant_has_zero_second_difference_part() {
        // for u ≡ 1 only the analytic tail survives, and it equals the tail coefficient
        let q = QuadratureScheme::compact(2, ord(0.4), 0.05, 2.0, 0.1).unwrap();
        let v = apply_pointwise(&|_| Complex64::new(1.0, 0.0), &[0.1, 0.2], &q).unwrap();
        assert!((v.re - q.tail_coefficient).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn compact_tail_closed_form() {
        let s = ord(0.3);
        let q = QuadratureScheme::compact(1, s, 0.01, 2.0, 0.1).unwrap();
        let exact = c_ns(1, s).unwrap() * 2.0 * 4f64.powf(-0.6) / 0.6;
        assert!((q.tail_coefficient - exact).abs() < 1e-12 * exact);
        assert!(q.r_far >= 2.0);
    }

    #[test]
    fn panels_cover_the_far_region() {
        let q = QuadratureScheme::windowed(2, ord(0.5), 0.01, 4.0, 0.25).unwrap().with_inner(2.0, 0.05);
        let p = q.radial_panels();
        assert_eq!(p[0].0, 0.01);
        assert!((p.last().unwrap().1 - 8.0).abs() < 1e-12);
        assert!(p.windows(2).all(|w| w[0].1 == w[1].0));
        assert!(p.iter().all(|(a, b)| b - a <= if *a < 2.0 { 0.05 } else { 0.25 } + 1e-15));
    }

    #[test]
    fn plane_wave_in_one_dimension() {
        let s = ord(0.5);
        let zf = 2.0;
        let q = QuadratureScheme::windowed(1, s, 1.0 / 64.0, 32.0, 0.25).unwrap();
        let v = apply_pointwise(&|y| Complex64::from_polar(1.0, zf * y[0]), &[0.0], &q).unwrap();
        assert!((v.re - zf).abs() < 1e-3 * zf, "{v}");
        assert!(v.im.abs() < 1e-8);
    }

    #[test]
    fn mixed_term_vanishes_at_zero_frequency() {
        let d = Domain::unit_disk();
        let q = QuadratureScheme::compact(2, ord(0.5), 0.01, d.box_diameter(), 0.05).unwrap();
        let v = mixed_term(&d, 0.25, &[0.0, 0.0], &[0.1, 0.0], &q).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mixed_term_rejects_windowed_scheme() {
        let d = Domain::unit_disk();
        let q = QuadratureScheme::windowed(2, ord(0.5), 0.01, 4.0, 0.25).unwrap();
        assert!(mixed_term(&d, 0.25, &[1.0, 0.0], &[0.0, 0.0], &q).is_err());
    }
}
