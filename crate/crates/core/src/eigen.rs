//! Ascending eigenpairs of the discretized operator, Rayleigh quotients and
//! Richardson extrapolation across nested resolutions.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Discretization, SymmetricMatrix};

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 4000;

/// Relative gap below which eigenvalues are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Ascending eigenvalues with eigenvectors orthonormal under `h^N Σ u_i v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub h: f64,
    pub n: usize,
    pub s: Option<f64>,
    pub domain: Option<String>,
    pub eigenvalues: Vec<f64>,
    /// values at the unknowns, in the same order as the matrix rows
    pub eigenvectors: Vec<Vec<f64>>,
    pub k_max: usize,
    /// `‖Aφ − λφ‖ / (λ‖φ‖)` per pair
    pub residuals: Vec<f64>,
}

impl Spectrum {
    /// `max_{i,j} |⟨φ_i, φ_j⟩_h − δ_ij|`.
    pub fn orthonormality_residual(&self) -> f64 {
        let hn = self.h.powi(self.n as i32);
        let mut worst: f64 = 0.0;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate().skip(i) {
                let ip = hn * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).abs());
            }
        }
        worst
    }

    /// Partial sums `Σ_{i≤k} λ_i` for `k = 1..=k_max`.
    pub fn partial_sums(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .scan(0.0, |acc, &l| {
                *acc += l;
                Some(*acc)
            })
            .collect()
    }
}

/// The `k_max` smallest eigenpairs of `A` (`A φ = λ φ` with the discrete
/// `L²` normalization `h^N Σ φ_i² = 1`).
pub fn solve_spectrum(a: &SymmetricMatrix, h: f64, n: usize, k_max: usize) -> Result<Spectrum> {
    let dim = a.dim();
    if k_max == 0 || k_max > dim {
        return Err(Error::OutOfRange { what: "k_max (requires 1 <= k_max <= dim A)", value: k_max as f64 });
    }
    let (vals, vecs) = if dim <= DENSE_LIMIT { dense_eigs(a, k_max)? } else { lanczos_eigs(a, k_max)? };
    finish(a, h, n, vals, vecs)
}

impl Discretization {
    pub fn spectrum(&self, k_max: usize) -> Result<Spectrum> {
        let mut sp = solve_spectrum(&self.matrix, self.h(), self.grid.dim(), k_max)?;
        sp.s = Some(self.s.get());
        sp.domain = Some(self.domain.spec_string());
        Ok(sp)
    }
}

fn to_faer(a: &SymmetricMatrix) -> Mat<f64> {
    Mat::from_fn(a.dim(), a.dim(), |i, j| a.get(i, j))
}

fn dense_eigs(a: &SymmetricMatrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let m = to_faer(a);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::NoConvergence { residual: f64::NAN, detail: format!("{e:?}") })?;
    let s = evd.S();
    let u = evd.U();
    let dim = a.dim();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let vals = order[..k].iter().map(|&i| s[i]).collect();
    let vecs = order[..k].iter().map(|&j| (0..dim).map(|i| u[(i, j)]).collect()).collect();
    Ok((vals, vecs))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = dot(v, v).sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Shift-invert Lanczos with full reorthogonalization: Krylov space of `A⁻¹`
/// through a Cholesky factorization, enlarged until the `k` smallest Ritz
/// pairs satisfy the residual test on `A`.
fn lanczos_eigs(a: &SymmetricMatrix, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let dim = a.dim();
    let llt = to_faer(a)
        .llt(Side::Lower)
        .map_err(|e| Error::NoConvergence { residual: f64::NAN, detail: format!("Cholesky: {e:?}") })?;
    let apply_inv = |v: &[f64]| -> Vec<f64> {
        let rhs = Mat::from_fn(dim, 1, |i, _| v[i]);
        let x = llt.solve(&rhs);
        (0..dim).map(|i| x[(i, 0)]).collect()
    };
    let mut m = (2 * k + 20).min(dim);
    let mut start: Vec<f64> = (0..dim).map(|i| 1.0 + 0.1 * ((i as f64) * 0.618_033_988_75).sin()).collect();
    normalize(&mut start);
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last_residual = f64::INFINITY;
    loop {
        while alpha.len() < m {
            let j = alpha.len();
            let mut w = apply_inv(&basis[j]);
            let aj = dot(&w, &basis[j]);
            alpha.push(aj);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
                }
            }
            let b = normalize(&mut w);
            if b < 1e-13 {
                // invariant subspace: the Ritz pairs are exact
                m = alpha.len();
                break;
            }
            beta.push(b);
            basis.push(w);
        }
        let mm = alpha.len();
        let t = Mat::from_fn(mm, mm, |i, j| {
            if i == j {
                alpha[i]
            } else if i == j + 1 || j == i + 1 {
                beta[i.min(j)]
            } else {
                0.0
            }
        });
        let evd = t
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::NoConvergence { residual: f64::NAN, detail: format!("{e:?}") })?;
        let theta = evd.S();
        let y = evd.U();
        // largest eigenvalues of A⁻¹ are the smallest of A
        let mut order: Vec<usize> = (0..mm).collect();
        order.sort_by(|&i, &j| theta[j].total_cmp(&theta[i]));
        let take = k.min(mm);
        let mut vals = Vec::with_capacity(take);
        let mut vecs = Vec::with_capacity(take);
        let mut worst: f64 = 0.0;
        for &c in &order[..take] {
            let mut v = vec![0.0; dim];
            for (j, q) in basis.iter().enumerate().take(mm) {
                let coef = y[(j, c)];
                v.iter_mut().zip(q).for_each(|(x, qq)| *x += coef * qq);
            }
            normalize(&mut v);
            let av = a.matvec(&v);
            let lam = dot(&av, &v);
            let r = av.iter().zip(&v).map(|(p, q)| (p - lam * q).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(r / lam.abs());
            vals.push(lam);
            vecs.push(v);
        }
        last_residual = last_residual.min(worst);
        if take == k && worst <= 1e-10 {
            return Ok((vals, vecs));
        }
        if mm >= dim || m >= dim {
            return Err(Error::NoConvergence {
                residual: last_residual,
                detail: format!("Lanczos exhausted the space of dimension {dim}"),
            });
        }
        m = (2 * m).min(dim);
    }
}

/// Canonical orthonormal basis of the span of `vs`: pivoted Gram–Schmidt on
/// the projector columns, which depends only on the subspace.
fn canonical_basis(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = vs[0].len();
    let m = vs.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(m);
    for _ in 0..m {
        // residual projector column norms: ‖P e_i‖² − Σ_prev ⟨b, e_i⟩²
        let mut best = (0usize, -1.0f64);
        for i in 0..dim {
            let p: f64 = vs.iter().map(|v| v[i] * v[i]).sum::<f64>()
                - out.iter().map(|b| b[i] * b[i]).sum::<f64>();
            if p > best.1 + 1e-12 {
                best = (i, p);
            }
        }
        let i = best.0;
        let mut col: Vec<f64> = (0..dim).map(|r| vs.iter().map(|v| v[r] * v[i]).sum()).collect();
        for b in &out {
            let c = dot(&col, b);
            col.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        for b in &out {
            let c = dot(&col, b);
            col.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        normalize(&mut col);
        out.push(col);
    }
    out
}

fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() * (1.0 + 1e-12) {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-12 {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

fn finish(a: &SymmetricMatrix, h: f64, n: usize, vals: Vec<f64>, mut vecs: Vec<Vec<f64>>) -> Result<Spectrum> {
    let k = vals.len();
    if let Some(bad) = vals.iter().find(|&&l| !(l > 0.0)) {
        return Err(Error::NoConvergence { residual: *bad, detail: "nonpositive eigenvalue".into() });
    }
    let mut i = 0;
    while i < k {
        let mut j = i + 1;
        while j < k && (vals[j] - vals[j - 1]).abs() <= CLUSTER_TOL * vals[j] {
            j += 1;
        }
        if j - i > 1 {
            let mut block = canonical_basis(&vecs[i..j]);
            block.iter_mut().for_each(|v| fix_sign(v));
            block.sort_by(|x, y| lexicographic(x, y));
            for (slot, v) in vecs[i..j].iter_mut().zip(block) {
                *slot = v;
            }
        } else {
            fix_sign(&mut vecs[i]);
        }
        i = j;
    }
    let scale = h.powf(-0.5 * n as f64);
    let mut residuals = Vec::with_capacity(k);
    for (v, &lam) in vecs.iter_mut().zip(&vals) {
        let av = a.matvec(v);
        let r = av.iter().zip(v.iter()).map(|(p, q)| (p - lam * q).powi(2)).sum::<f64>().sqrt();
        let nv = dot(v, v).sqrt();
        residuals.push(r / (lam * nv));
        v.iter_mut().for_each(|x| *x *= scale);
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    if worst > 1e-8 {
        return Err(Error::NoConvergence { residual: worst, detail: "eigenpair residual test".into() });
    }
    Ok(Spectrum { h, n, s: None, domain: None, eigenvalues: vals, eigenvectors: vecs, k_max: k, residuals })
}

/// `uᵀAu / uᵀu`.
pub fn rayleigh_quotient(u: &[f64], a: &SymmetricMatrix) -> Result<f64> {
    if u.len() != a.dim() {
        return Err(Error::Dimension(format!("vector of length {} for a {}-dim matrix", u.len(), a.dim())));
    }
    let nn = dot(u, u);
    if nn == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(a.quadratic_form(u) / nn)
}

/// One extrapolated eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    /// observed order `p`; `None` when the triple was flagged
    pub order: Option<f64>,
    /// discretization error estimate, see [`extrapolate`]
    pub error: f64,
    pub flagged: bool,
}

/// Smallest observed order accepted for extrapolation.
pub const MIN_ORDER: f64 = 0.5;

/// Richardson extrapolation of eigenvalues computed at `h`, `h/2`, `h/4`.
///
/// A triple is extrapolated when it is strictly monotone with an observed
/// order of at least [`MIN_ORDER`]; its error is `|λ_{h/2} − λ_{h/4}|`.
/// Otherwise it is flagged and keeps the finest value. A monotone but slowly
/// contracting triple then gets the tail bound `|λ_{h/2} − λ_{h/4}|/(2^{p_min} − 1)`,
/// a non-monotone one the larger of the two differences.
pub fn extrapolate(e1: &[f64], e2: &[f64], e3: &[f64]) -> Result<Vec<Extrapolated>> {
    if e1.len() != e2.len() || e2.len() != e3.len() {
        return Err(Error::Dimension("eigenvalue lists of different lengths".into()));
    }
    Ok(e1
        .iter()
        .zip(e2)
        .zip(e3)
        .map(|((&l1, &l2), &l3)| {
            let d1 = l1 - l2;
            let d2 = l2 - l3;
            let monotone = d1 != 0.0 && d2 != 0.0 && d1.signum() == d2.signum() && d2.abs() < d1.abs();
            if !monotone {
                return Extrapolated { value: l3, order: None, error: d1.abs().max(d2.abs()), flagged: true };
            }
            let ratio = d1 / d2;
            let p = ratio.log2();
            if p < MIN_ORDER {
                let error = d2.abs() / (2f64.powf(MIN_ORDER) - 1.0);
                return Extrapolated { value: l3, order: None, error, flagged: true };
            }
            let value = l3 - d2 / (ratio - 1.0);
            Extrapolated { value, order: Some(p), error: d2.abs(), flagged: false }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(vals: &[f64]) -> SymmetricMatrix {
        let n = vals.len();
        let mut d = vec![0.0; n * n];
        for (i, v) in vals.iter().enumerate() {
            d[i * n + i] = *v;
        }
        SymmetricMatrix::from_row_major(n, d).unwrap()
    }

    #[test]
    fn synthetic_richardson_recovers_limit() {
        let (lam, c, p) = (3.25, 0.7, 1.3);
        let at = |h: f64| lam + c * h.powf(p);
        let out = extrapolate(&[at(0.1)], &[at(0.05)], &[at(0.025)]).unwrap();
        assert!((out[0].value - lam).abs() < 1e-10);
        assert!((out[0].order.unwrap() - p).abs() < 1e-10);
    }

    #[test]
    fn identical_inputs_are_flagged() {
        let out = extrapolate(&[2.0], &[2.0], &[2.0]).unwrap();
        assert!(out[0].flagged && out[0].order.is_none());
        assert_eq!(out[0].value, 2.0);
    }

    #[test]
    fn slow_contraction_keeps_finest_value() {
        // differences 1.0 then 0.9: observed order ≈ 0.15
        let out = extrapolate(&[12.0], &[11.0], &[10.1]).unwrap();
        assert!(out[0].flagged);
        assert_eq!(out[0].value, 10.1);
        assert!((out[0].error - 0.9 / (2f64.sqrt() - 1.0)).abs() < 1e-12);
        // non-monotone: error is the larger difference
        let out = extrapolate(&[1.0], &[1.2], &[1.1]).unwrap();
        assert!((out[0].error - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_examples() {
        let a = diag(&[1.0, 2.0, 5.0]);
        assert_eq!(rayleigh_quotient(&[1.0, 0.0, 0.0], &a).unwrap(), 1.0);
        assert!((rayleigh_quotient(&[1.0, 1.0, 0.0], &a).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(rayleigh_quotient(&[0.0; 3], &a), Err(Error::ZeroVector)));
    }

    #[test]
    fn degenerate_cluster_is_canonical() {
        let a = diag(&[1.0, 1.0, 3.0]);
        let sp = solve_spectrum(&a, 1.0, 1, 3).unwrap();
        assert_eq!(sp.eigenvalues[..2], [1.0, 1.0]);
        // the cluster basis is the coordinate basis, sorted lexicographically
        assert_eq!(sp.eigenvectors[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(sp.eigenvectors[1], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn lanczos_matches_dense() {
        // 1D discrete Laplacian plus a shift, dimension 300
        let n = 300;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.5;
            if i + 1 < n {
                d[i * n + i + 1] = -1.0;
                d[(i + 1) * n + i] = -1.0;
            }
        }
        let a = SymmetricMatrix::from_row_major(n, d).unwrap();
        let (dv, _) = dense_eigs(&a, 6).unwrap();
        let (lv, lvecs) = lanczos_eigs(&a, 6).unwrap();
        for (x, y) in dv.iter().zip(&lv) {
            assert!((x - y).abs() < 1e-10 * x, "{x} vs {y}");
        }
        let sp = finish(&a, 1.0, 1, lv, lvecs).unwrap();
        assert!(sp.orthonormality_residual() < 1e-10);
    }
}
