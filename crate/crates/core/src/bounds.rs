//! Closed-form eigenvalue bounds (Weyl / Berezin–Li–Yau / Kröger type), the
//! numeric Rayleigh–Ritz quotient built from modulated cutoffs, and the
//! Cesàro ratio.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::eigen::Spectrum;
use crate::error::{Error, Result};
use crate::geometry::{Domain, GeometryReport};
use crate::operator::{w_sigma, Cutoff, Discretization, GridFunction};
use crate::special::{ball_volume, c_ns, sphere_area, FractionalOrder};

/// `(2π)^{2s} N/(N+2s) (|B₁||Ω|)^{−2s/N}`.
pub fn weyl_constant(n: usize, s: FractionalOrder, vol: f64) -> Result<f64> {
    let sv = s.get();
    let nf = n as f64;
    Ok((2.0 * PI).powf(2.0 * sv) * nf / (nf + 2.0 * sv) * (ball_volume(n)? * vol).powf(-2.0 * sv / nf))
}

/// `(2π)^{2s} N/(N+2s) (|B₁||Ω|)^{−2s/N} k^{1+2s/N}`.
pub fn weyl_main_term(n: usize, s: FractionalOrder, vol: f64, k: usize) -> Result<f64> {
    check_vol(vol)?;
    let e = 1.0 + 2.0 * s.get() / n as f64;
    Ok(weyl_constant(n, s, vol)? * (k as f64).powf(e))
}

/// Lower bound for the single eigenvalue `λ_k`.
pub fn liyau_lower_k(n: usize, s: FractionalOrder, vol: f64, k: usize) -> Result<f64> {
    check_vol(vol)?;
    Ok(weyl_constant(n, s, vol)? * (k as f64).powf(2.0 * s.get() / n as f64))
}

/// Lower bound for `Σ_{i≤k} λ_i`; the same expression as [`weyl_main_term`], 0 for `k = 0`.
pub fn liyau_lower_sum(n: usize, s: FractionalOrder, vol: f64, k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    weyl_main_term(n, s, vol, k)
}

fn check_vol(vol: f64) -> Result<()> {
    if vol > 0.0 && vol.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "volume (requires vol > 0)", value: vol })
    }
}

/// The three-case function `φ_s(r, R)`.
pub fn phi_s(r: f64, big_r: f64, s: FractionalOrder, n: usize) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::OutOfRange { what: "phi_s (requires r > 1)", value: r });
    }
    if !(big_r > 0.0) {
        return Err(Error::OutOfRange { what: "phi_s (requires R > 0)", value: big_r });
    }
    let sv = s.get();
    let nf = n as f64;
    let omega = sphere_area(n)?;
    Ok(if sv > 0.5 {
        omega * r.powf(nf + 2.0 * sv - 1.0) / ((2.0 * sv - 1.0) * (nf + 2.0 * sv - 1.0))
    } else if sv == 0.5 {
        omega * r.powf(nf) * (r.ln() + (4.0 * big_r).ln()) / nf
    } else {
        omega * r.powf(nf) / (nf * (1.0 - 2.0 * sv)) * (4.0 * big_r).powf(1.0 - 2.0 * sv)
    })
}

/// The four non-leading terms of the upper-bound numerator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiTerms {
    /// `(ω r^N/N)(2c_{N,s}/σ^{2s}) ∫w_σ`
    pub cutoff: f64,
    /// `ω r^{N+2s−1}|Ω| / (σ(N+2s−1)(1−s))`
    pub near: f64,
    /// `φ_s(r, R)|Ω|/σ`
    pub middle: f64,
    /// `ω r^N R^{−2s}|Ω| / (2σsN)`
    pub tail: f64,
    pub phi: f64,
}

impl PsiTerms {
    pub fn total(&self) -> f64 {
        self.cutoff + self.near + self.middle + self.tail
    }
}

/// `Ψ_s(r, σ)`; requires `r ≥ 1/σ`.
pub fn psi_s(r: f64, sigma: f64, n: usize, s: FractionalOrder, big_r: f64, vol: f64, int_w: f64) -> Result<PsiTerms> {
    if !(sigma > 0.0) || r * sigma < 1.0 - 1e-12 {
        return Err(Error::Hypothesis(format!("psi_s needs r >= 1/sigma (r = {r}, sigma = {sigma})")));
    }
    check_vol(vol)?;
    let sv = s.get();
    let nf = n as f64;
    let omega = sphere_area(n)?;
    let c = c_ns(n, s)?;
    let phi = phi_s(r, big_r, s, n)?;
    Ok(PsiTerms {
        cutoff: omega * r.powf(nf) / nf * 2.0 * c * sigma.powf(-2.0 * sv) * int_w,
        near: omega * r.powf(nf + 2.0 * sv - 1.0) * vol / (sigma * (nf + 2.0 * sv - 1.0) * (1.0 - sv)),
        middle: phi * vol / sigma,
        tail: omega * r.powf(nf) * big_r.powf(-2.0 * sv) * vol / (2.0 * sigma * sv * nf),
        phi,
    })
}

/// Midpoint-rule integrals of `w_σ` and `w_σ²` over the domain, with the
/// distance function tabulated once at the cell centres.
#[derive(Debug, Clone)]
pub struct CutoffIntegrator {
    rho: Vec<f64>,
    cell_volume: f64,
}

impl CutoffIntegrator {
    pub const CELLS_1D: usize = 1024;
    pub const CELLS_2D: usize = 256;

    pub fn new(d: &Domain) -> Self {
        let (lo, hi) = d.bounding_box();
        let m = if d.dim() == 1 { Self::CELLS_1D } else { Self::CELLS_2D };
        let hs: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / m as f64).collect();
        let mut rho = Vec::new();
        let total = m.pow(d.dim() as u32);
        for idx in 0..total {
            let x: Vec<f64> = if d.dim() == 1 {
                vec![lo[0] + (idx as f64 + 0.5) * hs[0]]
            } else {
                vec![lo[0] + ((idx / m) as f64 + 0.5) * hs[0], lo[1] + ((idx % m) as f64 + 0.5) * hs[1]]
            };
            if d.contains(&x) {
                rho.push(d.distance_to_boundary(&x));
            }
        }
        Self { rho, cell_volume: hs.iter().product() }
    }

    /// `(∫w_σ, ∫w_σ²)`.
    pub fn integrals(&self, sigma: f64) -> (f64, f64) {
        let (a, b) = self.rho.iter().fold((0.0, 0.0), |(a, b), &r| {
            let w = crate::operator::eta0(r / sigma);
            (a + w, b + w * w)
        });
        (a * self.cell_volume, b * self.cell_volume)
    }

    pub fn volume(&self) -> f64 {
        self.rho.len() as f64 * self.cell_volume
    }
}

/// Result of the sum upper bound for one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KrogerBound {
    pub k: usize,
    pub upper: f64,
    /// `(2π)^{−N}(ω/(N+2s)) r^{N+2s} ∫w_σ²`
    pub main: f64,
    /// `upper − weyl_main_term(k)`
    pub remainder: f64,
    /// `remainder / k^{1+s/N}`
    pub c1: f64,
    pub r: f64,
    pub sigma: f64,
    pub int_w: f64,
    pub int_w2: f64,
    pub psi: PsiTerms,
    /// the same bound with `∫w_σ` replaced by `|Ω|`
    pub upper_with_volume: f64,
    /// whether `B_R ⊂ Ω ⊂ B_{2R}` holds for the inradius
    pub hypothesis_ok: bool,
}

/// Upper bound for `Σ_{i≤k} λ_i` with `σ = r^{−s/2}` and `r` solving
/// `ω r^N/N ∫w_σ² = (2π)^N (k+1)`.
pub fn kroger_upper_sum(
    d: &Domain,
    s: FractionalOrder,
    k: usize,
    geometry: &GeometryReport,
    integrator: &CutoffIntegrator,
) -> Result<KrogerBound> {
    if k == 0 {
        return Err(Error::OutOfRange { what: "kroger_upper_sum (requires k >= 1)", value: 0.0 });
    }
    let n = d.dim();
    let nf = n as f64;
    let sv = s.get();
    let omega = sphere_area(n)?;
    let target = (2.0 * PI).powf(nf) * (k as f64 + 1.0);
    let g = |r: f64| {
        let sigma = r.powf(-0.5 * sv);
        omega * r.powf(nf) / nf * integrator.integrals(sigma).1 - target
    };
    let mut lo = 1.0;
    if g(lo) >= 0.0 {
        return Err(Error::Bracket(format!("g(1) >= 0 for k = {k}; the domain is too large for this k")));
    }
    let mut hi = 2.0;
    let mut doublings = 0;
    while g(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::Bracket(format!("no sign change of g up to r = {hi}")));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let sigma = r.powf(-0.5 * sv);
    let (int_w, int_w2) = integrator.integrals(sigma);
    let vol = d.volume();
    let psi = psi_s(r, sigma, n, s, geometry.r, vol, int_w)?;
    let scale = (2.0 * PI).powf(-nf);
    let main = scale * omega / (nf + 2.0 * sv) * r.powf(nf + 2.0 * sv) * int_w2;
    let upper = main + scale * psi.total();
    let upper_with_volume = upper + scale * psi.cutoff * (vol / int_w - 1.0);
    let remainder = upper - weyl_main_term(n, s, vol, k)?;
    let c1 = remainder / (k as f64).powf(1.0 + sv / nf);
    Ok(KrogerBound {
        k,
        upper,
        main,
        remainder,
        c1,
        r,
        sigma,
        int_w,
        int_w2,
        psi,
        upper_with_volume,
        hypothesis_ok: geometry.circum_ok,
    })
}

fn fft_2d(data: &mut [Complex64], p: usize, planner: &mut FftPlanner<f64>, inverse: bool) {
    let fft = if inverse { planner.plan_fft_inverse(p) } else { planner.plan_fft_forward(p) };
    for row in data.chunks_mut(p) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); p];
    for j in 0..p {
        for i in 0..p {
            col[i] = data[i * p + j];
        }
        fft.process(&mut col);
        for i in 0..p {
            data[i * p + j] = col[i];
        }
    }
}

/// Modulated cutoffs `w_σ e^{ix·z}` projected against the first `k`
/// eigenfunctions, with Fourier transforms on a zero-padded lattice.
#[derive(Debug, Clone)]
pub struct TestFunctionFamily {
    pub sigma: f64,
    pub w: GridFunction,
    /// `w_σ φ_i` on the full grid
    pub products: Vec<GridFunction>,
    /// padded length per axis
    pub pad: usize,
    /// frequency spacing `2π/(pad·h)`
    pub dz: f64,
    /// `|𝓕(w_σ φ_i)(z_m)|²` on the lattice, row-major over `m ∈ [0, pad)^N`
    pub spectra: Vec<Vec<f64>>,
}

/// Zero-padding factor of the frequency lattice.
pub const PADDING: usize = 4;

impl TestFunctionFamily {
    pub fn new(disc: &Discretization, spec: &Spectrum, sigma: f64, k: usize) -> Result<Self> {
        if k > spec.eigenvectors.len() {
            return Err(Error::OutOfRange { what: "k (exceeds computed eigenpairs)", value: k as f64 });
        }
        let grid = &disc.grid;
        let n = grid.dim();
        let h = grid.h();
        let w = w_sigma(&disc.domain, sigma, grid)?;
        let pad = PADDING * grid.shape().iter().copied().max().unwrap_or(1);
        let dz = 2.0 * PI / (pad as f64 * h);
        let mut planner = FftPlanner::new();
        let norm = (2.0 * PI).powf(-(n as f64)) * h.powi(2 * n as i32);
        let mut products = Vec::with_capacity(k);
        let mut spectra = Vec::with_capacity(k);
        for phi in spec.eigenvectors.iter().take(k) {
            let phi_full = disc.to_grid_function(phi)?;
            let prod = GridFunction {
                grid: grid.clone(),
                values: w.values.iter().zip(&phi_full.values).map(|(a, b)| a * b).collect(),
            };
            let mut buf = vec![Complex64::new(0.0, 0.0); pad.pow(n as u32)];
            for (idx, &v) in prod.values.iter().enumerate() {
                let m = grid.multi_index(idx);
                let flat = if n == 1 { m[0] } else { m[0] * pad + m[1] };
                buf[flat] = Complex64::new(v, 0.0);
            }
            if n == 1 {
                planner.plan_fft_forward(pad).process(&mut buf);
            } else {
                fft_2d(&mut buf, pad, &mut planner, false);
            }
            spectra.push(buf.iter().map(|c| c.norm_sqr() * norm).collect());
            products.push(prod);
        }
        Ok(Self { sigma, w, products, pad, dz, spectra })
    }

    fn dim(&self) -> usize {
        self.w.grid.dim()
    }

    fn signed(&self, m: usize) -> f64 {
        let p = self.pad;
        if m < p.div_ceil(2) {
            m as f64
        } else {
            m as f64 - p as f64
        }
    }

    /// `|z_m|` for every lattice index, row-major.
    fn lattice_norms(&self) -> Vec<f64> {
        let p = self.pad;
        if self.dim() == 1 {
            (0..p).map(|m| (self.signed(m) * self.dz).abs()).collect()
        } else {
            (0..p * p).map(|idx| self.dz * self.signed(idx / p).hypot(self.signed(idx % p))).collect()
        }
    }

    /// `Σ_{|z|≤r} |𝓕(w_σφ_i)(z)|² Δz^N` for each `i`.
    pub fn ball_masses(&self, r: f64) -> Vec<f64> {
        let norms = self.lattice_norms();
        let cell = self.dz.powi(self.dim() as i32);
        self.spectra
            .iter()
            .map(|sp| sp.iter().zip(&norms).filter(|(_, &z)| z <= r).map(|(v, _)| v).sum::<f64>() * cell)
            .collect()
    }

    /// `max_i |Σ_z |𝓕(w_σφ_i)|² Δz^N − ‖w_σφ_i‖²|`.
    pub fn parseval_residual(&self) -> f64 {
        let cell = self.dz.powi(self.dim() as i32);
        self.spectra
            .iter()
            .zip(&self.products)
            .map(|(sp, p)| (sp.iter().sum::<f64>() * cell - p.inner(p)).abs())
            .fold(0.0, f64::max)
    }

    /// Number of lattice frequencies in the closed ball of radius `r`.
    pub fn ball_count(&self, r: f64) -> usize {
        self.lattice_norms().iter().filter(|&&z| z <= r).count()
    }
}

/// Numeric Rayleigh–Ritz bound with its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrBound {
    pub value: f64,
    pub numerator: f64,
    pub denominator: f64,
    /// `∫_{B_r} |𝓕(w_σφ_i)|²` for `i ≤ k`
    pub projections: Vec<f64>,
    /// `Σ_{z∈B_r} ⟨w_σe^{ix·z}, A w_σe^{ix·z}⟩ Δz^N`
    pub energy: f64,
}

/// Upper bound for the discrete `λ_{k+1}` from the quotient of
/// `Σ_{z∈B_r}⟨v_{z,k}, A v_{z,k}⟩` and `Σ_{z∈B_r}‖v_{z,k}‖²`, with
/// `v_{z,k}` the modulated cutoff minus its projection on `φ_1..φ_k`.
pub fn rr_numeric_bound(spec: &Spectrum, disc: &Discretization, k: usize, r: f64, sigma: f64) -> Result<RrBound> {
    let grid = &disc.grid;
    let h = grid.h();
    let n = grid.dim();
    if r > PI / h {
        return Err(Error::Resolution(format!("frequency radius {r} exceeds the lattice limit pi/h = {}", PI / h)));
    }
    let fam = TestFunctionFamily::new(disc, spec, sigma, k)?;
    let projections = fam.ball_masses(r);
    let cell = fam.dz.powi(n as i32);
    let p = fam.pad;
    let mut planner = FftPlanner::new();

    // autocorrelation C_w(d) = Σ_x w(x) w(x+d) and ball sum S(d) = Σ_{z∈B_r} e^{i z·d h}
    let size = p.pow(n as u32);
    let mut wbuf = vec![Complex64::new(0.0, 0.0); size];
    for (idx, &v) in fam.w.values.iter().enumerate() {
        let m = grid.multi_index(idx);
        wbuf[if n == 1 { m[0] } else { m[0] * p + m[1] }] = Complex64::new(v, 0.0);
    }
    let norms = fam.lattice_norms();
    let mut ball: Vec<Complex64> =
        norms.iter().map(|&z| Complex64::new(if z <= r { 1.0 } else { 0.0 }, 0.0)).collect();
    if n == 1 {
        planner.plan_fft_forward(p).process(&mut wbuf);
        wbuf.iter_mut().for_each(|c| *c = Complex64::new(c.norm_sqr(), 0.0));
        planner.plan_fft_inverse(p).process(&mut wbuf);
        planner.plan_fft_inverse(p).process(&mut ball);
    } else {
        fft_2d(&mut wbuf, p, &mut planner, false);
        wbuf.iter_mut().for_each(|c| *c = Complex64::new(c.norm_sqr(), 0.0));
        fft_2d(&mut wbuf, p, &mut planner, true);
        fft_2d(&mut ball, p, &mut planner, true);
    }
    let inv = 1.0 / size as f64;
    let weights = &disc.weights;
    let scale = weights.c * h.powf(-2.0 * disc.s.get());
    let shape = grid.shape();
    let ext0 = shape[0] as i64;
    let ext1 = if n == 1 { 1 } else { shape[1] as i64 };
    let mut energy = 0.0;
    for d0 in -(ext0 - 1)..ext0 {
        for d1 in -(ext1 - 1)..ext1 {
            let q = [d0.unsigned_abs() as usize, d1.unsigned_abs() as usize];
            let a = if q == [0, 0] { scale * weights.diagonal() } else { -scale * weights.coupling(q) };
            let i0 = d0.rem_euclid(p as i64) as usize;
            let i1 = d1.rem_euclid(p as i64) as usize;
            let flat = if n == 1 { i0 } else { i0 * p + i1 };
            let cw = wbuf[flat].re * inv;
            let sd = ball[flat].re;
            energy += a * cw * sd;
        }
    }
    energy *= h.powi(n as i32) * cell;
    let two_pi_n = (2.0 * PI).powf(n as f64);
    let lam_proj: f64 = spec.eigenvalues.iter().zip(&projections).map(|(l, a)| l * a).sum();
    let numerator = energy - two_pi_n * lam_proj;
    let count = fam.ball_count(r) as f64;
    let w_norm2 = fam.w.inner(&fam.w);
    let denominator = count * cell * w_norm2 - two_pi_n * projections.iter().sum::<f64>();
    if !(denominator > 0.0) {
        return Err(Error::RadiusTooSmall { denominator });
    }
    Ok(RrBound { value: numerator / denominator, numerator, denominator, projections, energy })
}

/// `k^{−1−2s/N} Σ_{i≤k} λ_i`.
pub fn cesaro_ratio(eigenvalues: &[f64], n: usize, s: FractionalOrder, k: usize) -> Result<f64> {
    if k == 0 || k > eigenvalues.len() {
        return Err(Error::OutOfRange { what: "cesaro_ratio (requires 1 <= k <= k_max)", value: k as f64 });
    }
    let sum: f64 = eigenvalues[..k].iter().sum();
    Ok(sum * (k as f64).powf(-1.0 - 2.0 * s.get() / n as f64))
}

/// Closed-form Lipschitz bound used for the cross-term estimate.
pub fn cutoff_lipschitz(d: &Domain, sigma: f64) -> Result<f64> {
    Ok(Cutoff::new(d, sigma)?.lipschitz())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ord(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn weyl_examples() {
        let v = weyl_main_term(1, ord(0.5), 2.0, 1).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-14);
        let a = weyl_main_term(2, ord(0.5), PI, 10).unwrap();
        // (2π)·(2/3)·π⁻¹·10^{3/2}
        assert!((a / (4.0 / 3.0 * 10f64.powf(1.5)) - 1.0).abs() < 1e-14);
        assert!((liyau_lower_k(1, ord(0.5), 2.0, 1).unwrap() - PI / 4.0).abs() < 1e-14);
        assert_eq!(liyau_lower_sum(1, ord(0.5), 2.0, 0).unwrap(), 0.0);
        let r = weyl_main_term(2, ord(0.3), 1.7, 14).unwrap() / weyl_main_term(2, ord(0.3), 1.7, 7).unwrap();
        assert!((r - 2f64.powf(1.3)).abs() < 1e-13);
    }

    #[test]
    fn phi_examples() {
        let a = phi_s(10.0, 1.0, ord(0.75), 1).unwrap();
        assert!((a - 2.0 * 10f64.powf(1.5) / 0.75).abs() < 1e-12);
        let b = phi_s(10.0, 1.0, ord(0.25), 2).unwrap();
        assert!((b - 400.0 * PI).abs() < 1e-10);
        let big_r = 0.7;
        let r = std::f64::consts::E / (4.0 * big_r);
        assert!(phi_s(r, big_r, ord(0.5), 1).is_err() || r > 1.0);
        let r = 3.0;
        let big_r = std::f64::consts::E / (4.0 * r);
        let c = phi_s(r, big_r, ord(0.5), 2).unwrap();
        assert!((c - 2.0 * PI * r * r / 2.0).abs() < 1e-12);
    }

    #[test]
    fn psi_requires_large_r() {
        assert!(psi_s(1.0, 0.5, 1, ord(0.5), 1.0, 2.0, 1.5).is_err());
        let t = psi_s(16.0, 0.5, 1, ord(0.5), 1.0, 2.0, 1.5).unwrap();
        assert!(t.cutoff > 0.0 && t.near > 0.0 && t.middle > 0.0 && t.tail > 0.0);
        let t2 = psi_s(16.0, 0.5, 1, ord(0.5), 1.0, 4.0, 1.5).unwrap();
        assert!((t2.near - 2.0 * t.near).abs() < 1e-12 * t.near);
        assert!((t2.middle - 2.0 * t.middle).abs() < 1e-12 * t.middle);
        assert!((t2.tail - 2.0 * t.tail).abs() < 1e-12 * t.tail);
    }

    #[test]
    fn cesaro_first_term() {
        assert_eq!(cesaro_ratio(&[1.5, 2.0], 1, ord(0.5), 1).unwrap(), 1.5);
    }
}
