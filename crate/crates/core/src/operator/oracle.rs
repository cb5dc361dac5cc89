//! Brute-force reference for the 1D collocation matrix: every entry is
//! integrated at physical scale by adaptive quadrature, without the
//! closed-form lattice weights.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature::integrate_adaptive;
use crate::special::{c_ns, FractionalOrder};

use super::{Grid, SymmetricMatrix};

const TOL: f64 = 1e-14;

/// Reference matrix for an interval with at most `max_nodes` unknowns.
pub fn brute_force_matrix_1d(d: &Domain, s: FractionalOrder, h: f64, max_nodes: usize) -> Result<SymmetricMatrix> {
    if d.dim() != 1 {
        return Err(Error::Dimension("the brute-force oracle is one-dimensional".into()));
    }
    let grid = Grid::covering(d, h)?;
    let interior = grid.interior_indices(d);
    if interior.len() > max_nodes {
        return Err(Error::Resolution(format!("{} unknowns exceed the oracle limit {max_nodes}", interior.len())));
    }
    let sv = s.get();
    let c = c_ns(1, s)?;
    // ∫_{-h}^{h} |ζ|^{1-2s}
    let near = 2.0 * integrate_adaptive(|z| z.powf(1.0 - 2.0 * sv), 0.0, h, TOL)?;
    // ∫_{|ζ|>h} |ζ|^{-1-2s}, with ζ = h/t on each half-line
    let far = 2.0 * h.powf(-2.0 * sv) * integrate_adaptive(|t| t.powf(2.0 * sv - 1.0), 0.0, 1.0, TOL)?;
    let hat = |q: usize| -> Result<f64> {
        if q == 0 {
            return Ok(0.0);
        }
        let centre = q as f64 * h;
        let f = |z: f64| (1.0 - ((z - centre) / h).abs()).max(0.0) * z.powf(-1.0 - 2.0 * sv);
        let left = integrate_adaptive(f, (centre - h).max(h), centre, TOL)?;
        let right = integrate_adaptive(f, centre, centre + h, TOL)?;
        Ok(left + right)
    };
    let n = interior.len();
    let mut data = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let q = interior[a].abs_diff(interior[b]);
            data[a * n + b] = if q == 0 {
                c * (near / (h * h) + far)
            } else {
                let stencil = if q == 1 { near / (2.0 * h * h) } else { 0.0 };
                -c * (hat(q)? + stencil)
            };
        }
    }
    SymmetricMatrix::from_row_major(n, data)
}
