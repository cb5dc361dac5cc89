//! The integral fractional Laplacian with exterior Dirichlet condition:
//! uniform grids, the cutoff family `w_σ`, pointwise quadrature, the
//! collocation matrix, and the cross term `𝓛^s_z`.

mod assembly;
mod cutoff;
pub mod oracle;
mod pointwise;

pub use assembly::{assemble_matrix, Discretization, KernelWeights, SymmetricMatrix};
pub use cutoff::{eta0, eta0_derivative, eta0_second_derivative, w_sigma, Cutoff, CutoffProfile};
pub use pointwise::{apply_pointwise, mixed_term, plane_wave_partial_symbol, NearCorrection, QuadratureScheme, TailModel};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Minimum number of interior nodes along each axis.
pub const MIN_NODES_PER_AXIS: usize = 4;

/// Uniform grid of nodes strictly inside a bounding box.
///
/// Along each axis the nodes are `lo + j·h` for `j = 1, …, n`, with `n` the
/// largest count that stays strictly below the upper face. Flat indices run
/// over the last axis fastest, so they follow lexicographic node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    lo: Vec<f64>,
    h: f64,
    shape: Vec<usize>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: &[f64], h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Resolution(format!("cell size h = {h} must be positive")));
        }
        if lo.len() != hi.len() || lo.is_empty() || lo.len() > 2 {
            return Err(Error::Dimension(format!("grid box of dimension {}", lo.len())));
        }
        let shape = lo
            .iter()
            .zip(hi)
            .map(|(a, b)| (((b - a) / h - 1e-9).ceil() as usize).saturating_sub(1))
            .collect();
        Ok(Self { lo, h, shape })
    }

    /// Grid over the bounding box of `d`.
    pub fn covering(d: &Domain, h: f64) -> Result<Self> {
        let (lo, hi) = d.bounding_box();
        Self::new(lo, &hi, h)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-axis node indices of flat index `idx`.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [idx, 0]
        } else {
            [idx / self.shape[1], idx % self.shape[1]]
        }
    }

    pub fn flat_index(&self, m: [usize; 2]) -> usize {
        if self.dim() == 1 {
            m[0]
        } else {
            m[0] * self.shape[1] + m[1]
        }
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let m = self.multi_index(idx);
        (0..self.dim()).map(|k| self.lo[k] + (m[k] + 1) as f64 * self.h).collect()
    }

    /// Flat indices of the nodes inside `d`, ascending.
    pub fn interior_indices(&self, d: &Domain) -> Vec<usize> {
        (0..self.len()).filter(|&i| d.contains(&self.node(i))).collect()
    }

    /// Fail unless `d` has at least [`MIN_NODES_PER_AXIS`] interior nodes along every axis.
    pub fn check_resolution(&self, interior: &[usize]) -> Result<()> {
        for axis in 0..self.dim() {
            let mut seen = vec![false; self.shape[axis]];
            for &i in interior {
                seen[self.multi_index(i)[axis]] = true;
            }
            let count = seen.iter().filter(|&&b| b).count();
            if count < MIN_NODES_PER_AXIS {
                return Err(Error::Resolution(format!(
                    "only {count} interior node positions along axis {axis} (need {MIN_NODES_PER_AXIS})"
                )));
            }
        }
        Ok(())
    }
}

/// Values on all nodes of a [`Grid`], exactly zero at nodes outside the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T = f64> {
    pub grid: Grid,
    pub values: Vec<T>,
}

impl<T: Copy + Default> GridFunction<T> {
    /// Sample `f` at the nodes inside `d`; nodes outside get `T::default()`.
    pub fn sample<F: Fn(&[f64]) -> T>(grid: &Grid, d: &Domain, f: F) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                if d.contains(&x) {
                    f(&x)
                } else {
                    T::default()
                }
            })
            .collect();
        Self { grid: grid.clone(), values }
    }

    /// Scatter interior values (ordered as `interior`) onto the full grid.
    pub fn from_interior(grid: &Grid, interior: &[usize], vals: &[T]) -> Result<Self> {
        if interior.len() != vals.len() {
            return Err(Error::Dimension(format!(
                "{} interior values for {} interior nodes",
                vals.len(),
                interior.len()
            )));
        }
        let mut values = vec![T::default(); grid.len()];
        for (&i, &v) in interior.iter().zip(vals) {
            values[i] = v;
        }
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn gather(&self, interior: &[usize]) -> Vec<T> {
        interior.iter().map(|&i| self.values[i]).collect()
    }
}

impl GridFunction<f64> {
    /// Discrete `L²` inner product `h^N Σ u_i v_i`.
    pub fn inner(&self, other: &Self) -> f64 {
        let hn = self.grid.h.powi(self.grid.dim() as i32);
        hn * self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
    }

    /// Midpoint-rule integral `h^N Σ u_i`.
    pub fn integral(&self) -> f64 {
        self.grid.h.powi(self.grid.dim() as i32) * self.values.iter().sum::<f64>()
    }

    pub fn to_complex(&self) -> GridFunction<Complex64> {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}
