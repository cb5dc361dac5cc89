//! Verification suites, one per acceptance item.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{kroger_upper_sum, weyl_constant, CutoffIntegrator};
use crate::error::{Error, Result};
use crate::estimates::{
    ball_samples, cutoff_estimate_check, default_mixed_pairs, mixed_term_check, plane_wave_check,
};
use crate::geometry::{check_geometry, Domain};
use crate::operator::{oracle::brute_force_matrix_1d, Discretization};
use crate::report::{BoundReport, Refinement};
use crate::special::{b_ns, b_ns_quadrature, e_m, FractionalOrder};

/// Suite names in acceptance order.
pub const SUITE_NAMES: [&str; 10] = [
    "constants-identity",
    "half-order",
    "plane-wave",
    "cutoff-estimate",
    "mixed-term",
    "oracle-equivalence",
    "sandwich",
    "remainder-order",
    "cesaro",
    "eigensolver-hygiene",
];

/// Wall-clock budgets in seconds, same order as [`SUITE_NAMES`].
pub const BUDGETS: [f64; 10] = [1.0, 1.0, 30.0, 60.0, 60.0, 10.0, 300.0, 60.0, 60.0, 60.0];

/// 1D and 2D finest spacings used by the sandwich and Cesàro suites.
pub const INTERVAL_H: f64 = 2.0 / 2048.0;
pub const DISK_H: f64 = 2.0 / 64.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub index: usize,
    pub name: String,
    pub passed: bool,
    pub within_budget: bool,
    pub seconds: f64,
    pub budget: f64,
    pub detail: String,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<20} {:>8.2}s / {:>5.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            self.name,
            self.seconds,
            self.budget,
            self.detail
        )
    }
}

fn ord(s: f64) -> Result<FractionalOrder> {
    FractionalOrder::new(s)
}

fn tenths() -> Vec<f64> {
    (1..=9).map(|j| j as f64 / 10.0).collect()
}

fn constants_identity() -> Result<(bool, String)> {
    let mut worst_rec: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for n in 2..=12 {
        for s in tenths() {
            let s = ord(s)?;
            worst_rec = worst_rec.max((b_ns(n, s)? - 1.0).abs());
            worst_quad = worst_quad.max((b_ns_quadrature(n, s, 1e-10)? - 1.0).abs());
        }
    }
    Ok((
        worst_rec <= 1e-10 && worst_quad <= 1e-6,
        format!("max |b-1|: recursion {worst_rec:.2e} (tol 1e-10), quadrature {worst_quad:.2e} (tol 1e-6)"),
    ))
}

fn half_order() -> Result<(bool, String)> {
    let s = ord(0.5)?;
    let mut worst: f64 = 0.0;
    for m in 4..=12 {
        let exact = 1.0 / (m as f64 - 1.0);
        worst = worst.max((e_m(m, s)? - exact).abs());
    }
    Ok((worst <= 1e-12, format!("max |E_m - 1/(m-1)| over m=4..12: {worst:.2e} (tol 1e-12)")))
}

fn plane_wave() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        for s in [0.25, 0.5, 0.75] {
            for z in [1.0, 2.0, 4.0] {
                worst = worst.max(plane_wave_check(n, ord(s)?, z)?.relative_error);
            }
        }
    }
    Ok((worst <= 1e-3, format!("max relative error {worst:.2e} over 18 cases (tol 1e-3)")))
}

fn cutoff_estimate() -> Result<(bool, String)> {
    let d = Domain::unit_disk();
    let pts = ball_samples(2, 100, 0.99);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut stated_exceeded = 0;
    for s in [0.25, 0.5, 0.75] {
        for sigma in [0.1, 0.25] {
            let c = cutoff_estimate_check(&d, ord(s)?, sigma, &pts)?;
            ok &= c.holds;
            worst = worst.max(c.max_measured / c.bound);
            if c.max_measured > c.stated_bound {
                stated_exceeded += 1;
            }
        }
    }
    Ok((
        ok,
        format!("max measured/bound {worst:.3}; stated 2c*omega*sigma^-2s exceeded in {stated_exceeded}/6 cases"),
    ))
}

fn mixed_term() -> Result<(bool, String)> {
    let d = Domain::unit_disk();
    let pairs = default_mixed_pairs(2, 20);
    let mut ok = true;
    let mut literal = true;
    let mut worst: f64 = 0.0;
    for s in [0.75, 0.5, 0.25] {
        let c = mixed_term_check(&d, ord(s)?, 0.25, 1.0, &pairs)?;
        ok &= c.holds;
        literal &= c.literal_holds;
        worst = worst.max(c.worst_ratio);
    }
    Ok((ok, format!("3 cases x 20 pairs, max measured/bound {worst:.3}; literal form holds: {literal}")))
}

fn oracle_equivalence() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    let cases = [(-1.0, 1.0, 2.0 / 9.0), (0.0, 0.7, 0.1), (-0.3, 1.1, 0.2)];
    let mut count = 0;
    for (a, b, h) in cases {
        let d = Domain::interval(a, b)?;
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let s = ord(s)?;
            let disc = Discretization::new(&d, s, h)?;
            let oracle = brute_force_matrix_1d(&d, s, h, 8)?;
            for (x, y) in disc.matrix.as_slice().iter().zip(oracle.as_slice()) {
                worst = worst.max((x - y).abs());
            }
            count += 1;
        }
    }
    Ok((worst <= 1e-10, format!("{count} matrices, max entry difference {worst:.2e} (tol 1e-10)")))
}

fn sandwich() -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, h, k_max) in [(Domain::interval(-1.0, 1.0)?, INTERVAL_H, 50), (Domain::unit_disk(), DISK_H, 30)] {
        for s in [0.25, 0.5, 0.75] {
            let report = BoundReport::compute(&d, ord(s)?, h, k_max)?;
            let c = report.sandwich();
            ok &= c.lower_ok && c.upper_ok;
            let tightest = report
                .rows
                .iter()
                .map(|r| (r.sum_lambda - r.liyau_lower_sum) / r.sum_lambda)
                .fold(f64::INFINITY, f64::min);
            parts.push(format!(
                "N={} s={s}: {}{} (min lower gap {:.1}%)",
                d.dim(),
                if c.lower_ok && c.upper_ok { "ok" } else { "VIOLATED" },
                if c.rr_ok { "" } else { ", rr violated" },
                100.0 * tightest
            ));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn remainder_order() -> Result<(bool, String)> {
    let d = Domain::interval(-1.0, 1.0)?;
    let s = ord(0.5)?;
    let g = check_geometry(&d)?;
    let integ = CutoffIntegrator::new(&d);
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for k in 20..=200 {
        let c1 = kroger_upper_sum(&d, s, k, &g, &integ)?.c1;
        lo = lo.min(c1);
        hi = hi.max(c1);
    }
    let ratio = hi / lo;
    Ok((lo > 0.0 && ratio < 3.0, format!("c1 in [{lo:.4}, {hi:.4}] over k=20..200, ratio {ratio:.3} (tol < 3)")))
}

fn cesaro() -> Result<(bool, String)> {
    let d = Domain::interval(-1.0, 1.0)?;
    let s = ord(0.5)?;
    let refinement = Refinement::compute(&d, s, INTERVAL_H, 50)?;
    let vals = refinement.values();
    let w = weyl_constant(1, s, d.volume())?;
    let ratio = |k: usize| -> Result<f64> { crate::bounds::cesaro_ratio(&vals, 1, s, k) };
    let gap10 = (ratio(10)? / w - 1.0).abs();
    let gap50 = (ratio(50)? / w - 1.0).abs();
    let mut above = true;
    for k in 1..=50 {
        above &= ratio(k)? >= w;
    }
    Ok((
        gap50 < gap10 && above,
        format!("gap at k=10 {gap10:.4e}, at k=50 {gap50:.4e}; ratio >= W for k=1..50: {above}"),
    ))
}

fn eigensolver_hygiene() -> Result<(bool, String)> {
    let s = ord(0.5)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (d, h) in [(Domain::interval(-1.0, 1.0)?, 2.0 / 512.0), (Domain::unit_disk(), 2.0 / 32.0)] {
        let sp = Discretization::new(&d, s, h)?.spectrum(4)?;
        let orth = sp.orthonormality_residual();
        let phi = &sp.eigenvectors[0];
        let definite = phi.iter().all(|&v| v > 0.0) || phi.iter().all(|&v| v < 0.0);
        let gap = sp.eigenvalues[1] - sp.eigenvalues[0];
        ok &= orth <= 1e-10 && definite && gap > 1e-6;
        parts.push(format!("N={}: orth {orth:.1e}, phi1 definite {definite}, gap {gap:.4}", d.dim()));
    }
    Ok((ok, parts.join("; ")))
}

/// Run one suite by name.
pub fn run(name: &str) -> Result<Outcome> {
    let index = SUITE_NAMES
        .iter()
        .position(|&n| n == name)
        .ok_or_else(|| Error::Hypothesis(format!("unknown suite '{name}'")))?;
    let start = Instant::now();
    let result = match index {
        0 => constants_identity(),
        1 => half_order(),
        2 => plane_wave(),
        3 => cutoff_estimate(),
        4 => mixed_term(),
        5 => oracle_equivalence(),
        6 => sandwich(),
        7 => remainder_order(),
        8 => cesaro(),
        _ => eigensolver_hygiene(),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let budget = BUDGETS[index];
    Ok(Outcome { index: index + 1, name: name.to_string(), passed, within_budget: seconds <= budget, seconds, budget, detail })
}

/// Run every suite (`"all"`) or a single one.
pub fn run_suite(name: &str) -> Result<Vec<Outcome>> {
    if name == "all" {
        SUITE_NAMES.iter().map(|n| run(n)).collect()
    } else {
        Ok(vec![run(name)?])
    }
}
