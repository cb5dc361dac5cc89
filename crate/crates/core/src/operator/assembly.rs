use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature::{integrate_adaptive, power_integral, GaussLegendre};
use crate::special::{c_ns, FractionalOrder};

use super::{Grid, GridFunction};

/// `∫_0^{π/4} cos^p θ dθ`.
fn cos_power_octant(p: f64) -> Result<f64> {
    integrate_adaptive(|t| t.cos().powf(p), 0.0, std::f64::consts::FRAC_PI_4, 1e-15)
}

/// Translation-invariant lattice weights at unit spacing.
///
/// With `C = [−1, 1]^N` and `φ` the piecewise (bi)linear hat at the origin:
/// `near = ∫_C |ζ|^{2−N−2s}`, `far_self = ∫_{ℝ^N∖C} |ζ|^{−N−2s}` and
/// `hat(q) = ∫_{ℝ^N∖C} φ(ζ−q) |ζ|^{−N−2s}`.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    n: usize,
    s: f64,
    /// `c_{N,s}`
    pub c: f64,
    pub near: f64,
    pub far_self: f64,
    extent: [usize; 2],
    table: Vec<f64>,
}

impl KernelWeights {
    /// Weights for all offsets with `|q_k| < extent[k]`.
    pub fn new(n: usize, s: FractionalOrder, extent: [usize; 2]) -> Result<Self> {
        let c = c_ns(n, s)?;
        let sv = s.get();
        let (near, far_self) = match n {
            1 => (2.0 / (2.0 - 2.0 * sv), 2.0 / (2.0 * sv)),
            2 => (
                8.0 / (2.0 - 2.0 * sv) * cos_power_octant(2.0 * sv - 2.0)?,
                8.0 / (2.0 * sv) * cos_power_octant(2.0 * sv)?,
            ),
            _ => return Err(Error::Dimension(format!("kernel weights for N = {n}"))),
        };
        let extent = if n == 1 { [extent[0].max(1), 1] } else { [extent[0].max(1), extent[1].max(1)] };
        let mut table = vec![0.0; extent[0] * extent[1]];
        if n == 1 {
            for (q, t) in table.iter_mut().enumerate() {
                *t = hat_integral_1d(q, sv);
            }
        } else {
            let rules = [GaussLegendre::new(12), GaussLegendre::new(6), GaussLegendre::new(4)];
            table.par_iter_mut().enumerate().for_each(|(k, t)| {
                let (q0, q1) = (k / extent[1], k % extent[1]);
                *t = hat_integral_2d(q0 as i64, q1 as i64, sv, &rules);
            });
        }
        Ok(Self { n, s: sv, c, near, far_self, extent, table })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    /// `hat(q)` for `|q_k| < extent[k]`.
    pub fn hat(&self, q: [usize; 2]) -> f64 {
        self.table[q[0] * self.extent[1] + q[1]]
    }

    /// Unit-spacing coefficient `κ(q)` with `A_ij = −c_{N,s} h^{−2s} κ(x_j − x_i)` off the diagonal.
    pub fn coupling(&self, q: [usize; 2]) -> f64 {
        let axis_neighbour = q[0] + q[1] == 1;
        let stencil = if axis_neighbour { self.near / (2 * self.n) as f64 } else { 0.0 };
        self.hat(q) + stencil
    }

    /// Unit-spacing diagonal coefficient, `A_ii = c_{N,s} h^{−2s} (near + far_self)`.
    pub fn diagonal(&self) -> f64 {
        self.near + self.far_self
    }
}

/// `∫_{|ζ|≥1} φ(ζ − q) |ζ|^{−1−2s} dζ` for the 1D hat `φ(y) = (1 − |y|)_+`.
fn hat_integral_1d(q: usize, s: f64) -> f64 {
    let e0 = -2.0 * s;
    let e1 = 1.0 - 2.0 * s;
    match q {
        0 => 0.0,
        1 => 2.0 * power_integral(1.0, 2.0, e0) - power_integral(1.0, 2.0, e1),
        _ => {
            let qf = q as f64;
            (1.0 - qf) * power_integral(qf - 1.0, qf, e0)
                + power_integral(qf - 1.0, qf, e1)
                + (1.0 + qf) * power_integral(qf, qf + 1.0, e0)
                - power_integral(qf, qf + 1.0, e1)
        }
    }
}

/// Same for the bilinear hat in 2D: the four unit cells of its support that
/// lie outside `[−1, 1]²`, each by tensor Gauss–Legendre.
fn hat_integral_2d(q0: i64, q1: i64, s: f64, rules: &[GaussLegendre; 3]) -> f64 {
    let reach = q0.abs().max(q1.abs());
    let rule = if reach <= 3 {
        &rules[0]
    } else if reach <= 10 {
        &rules[1]
    } else {
        &rules[2]
    };
    let p = -1.0 - s;
    let mut total = 0.0;
    for a in [q0 - 1, q0] {
        for b in [q1 - 1, q1] {
            // unit cells [a, a+1] × [b, b+1] inside [−1, 1]² carry no far-field weight
            if (-1..=0).contains(&a) && (-1..=0).contains(&b) {
                continue;
            }
            let (ax, bx) = (a as f64, b as f64);
            for (x, wx) in rule.mapped(ax, ax + 1.0) {
                let fx = 1.0 - (x - q0 as f64).abs();
                for (y, wy) in rule.mapped(bx, bx + 1.0) {
                    let fy = 1.0 - (y - q1 as f64).abs();
                    total += wx * wy * fx * fy * (x * x + y * y).powf(p);
                }
            }
        }
    }
    total
}

/// Dense symmetric matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Wrap row-major data; fails unless the data is exactly symmetric.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        let m = Self { n, data };
        if !m.is_symmetric() {
            return Err(Error::Dimension("matrix is not symmetric".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .par_chunks(self.n.max(1))
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// Collocation discretization of `(−Δ)^s` on the interior nodes of a grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub domain: Domain,
    pub s: FractionalOrder,
    pub grid: Grid,
    /// flat grid indices of the unknowns, ascending
    pub interior: Vec<usize>,
    pub weights: KernelWeights,
    pub matrix: SymmetricMatrix,
}

impl Discretization {
    pub fn new(domain: &Domain, s: FractionalOrder, h: f64) -> Result<Self> {
        let grid = Grid::covering(domain, h)?;
        let interior = grid.interior_indices(domain);
        grid.check_resolution(&interior)?;
        let n = grid.dim();
        let shape = grid.shape();
        let extent = if n == 1 { [shape[0], 1] } else { [shape[0].max(shape[1]), shape[0].max(shape[1])] };
        let weights = KernelWeights::new(n, s, extent)?;
        let scale = weights.c * h.powf(-2.0 * s.get());
        let diag = scale * weights.diagonal();
        let dim = interior.len();
        let coords: Vec<[usize; 2]> = interior.iter().map(|&i| grid.multi_index(i)).collect();
        let mut data = vec![0.0; dim * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(a, row)| {
            let ma = coords[a];
            for (b, entry) in row.iter_mut().enumerate() {
                *entry = if a == b {
                    diag
                } else {
                    let mb = coords[b];
                    let q = [ma[0].abs_diff(mb[0]), ma[1].abs_diff(mb[1])];
                    -scale * weights.coupling(q)
                };
            }
        });
        let matrix = SymmetricMatrix::from_row_major(dim, data)?;
        let ones = vec![1.0; dim];
        if let Some(bad) = matrix.matvec(&ones).iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Hypothesis(format!("row sum at unknown {bad} is not positive")));
        }
        Ok(Self { domain: domain.clone(), s, grid, interior, weights, matrix })
    }

    pub fn dim(&self) -> usize {
        self.interior.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Interior node coordinates in unknown order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        self.interior.iter().map(|&i| self.grid.node(i)).collect()
    }

    /// Full-grid function from a vector of unknowns.
    pub fn to_grid_function(&self, vals: &[f64]) -> Result<GridFunction> {
        GridFunction::from_interior(&self.grid, &self.interior, vals)
    }
}

/// The collocation matrix of `(−Δ)^s` with exterior Dirichlet condition on
/// the interior nodes of the grid of spacing `h` over the bounding box of `d`.
pub fn assemble_matrix(d: &Domain, s: FractionalOrder, h: f64) -> Result<SymmetricMatrix> {
    Ok(Discretization::new(d, s, h)?.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::sphere_area;

    fn ord(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn lattice_sum_rule_1d() {
        // Σ_q hat(q) = far_self, with the tail beyond Q bounded by ∫_{Q}^∞ 2ζ^{-1-2s}
        for s in [0.25, 0.5, 0.75] {
            let q_max = 4000;
            let w = KernelWeights::new(1, ord(s), [q_max + 1, 1]).unwrap();
            let sum: f64 = 2.0 * (1..=q_max).map(|q| w.hat([q, 0])).sum::<f64>();
            let rest = w.far_self - sum;
            let upper = 2.0 * (q_max as f64).powf(-2.0 * s) / (2.0 * s);
            let lower = 2.0 * (q_max as f64 + 1.0).powf(-2.0 * s) / (2.0 * s);
            assert!(rest > 0.0 && rest <= upper && rest >= lower * 0.99, "s={s} rest={rest}");
        }
    }

    #[test]
    fn lattice_sum_rule_2d() {
        for s in [0.25, 0.75] {
            let q = 40usize;
            let w = KernelWeights::new(2, ord(s), [q + 1, q + 1]).unwrap();
            let mut sum = 0.0;
            for a in -(q as i64)..=q as i64 {
                for b in -(q as i64)..=q as i64 {
                    sum += w.hat([a.unsigned_abs() as usize, b.unsigned_abs() as usize]);
                }
            }
            let rest = w.far_self - sum;
            let omega = sphere_area(2).unwrap();
            let tail = |r: f64| omega * r.powf(-2.0 * s) / (2.0 * s);
            let qf = q as f64;
            assert!(rest <= tail(qf) && rest >= tail(2f64.sqrt() * (qf + 1.0)), "s={s} rest={rest}");
        }
    }

    #[test]
    fn near_weight_matches_quadrature() {
        let s = 0.3;
        let w = KernelWeights::new(2, ord(s), [2, 2]).unwrap();
        // ∫_{[-1,1]²} |ζ|^{-2s} by nested adaptive quadrature
        let inner = |x: f64| integrate_adaptive(|y| (x * x + y * y).powf(-s), 0.0, 1.0, 1e-13).unwrap();
        let v = 4.0 * integrate_adaptive(inner, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - w.near).abs() < 1e-9, "{v} vs {}", w.near);
    }

    #[test]
    fn matrix_is_symmetric_and_diagonally_dominant() {
        let d = Domain::unit_disk();
        let disc = Discretization::new(&d, ord(0.5), 0.25).unwrap();
        let a = &disc.matrix;
        assert!(a.is_symmetric());
        for i in 0..a.dim() {
            let off: f64 = (0..a.dim()).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
            assert!(a.get(i, i) > off);
            assert!((0..a.dim()).all(|j| j == i || a.get(i, j) < 0.0));
        }
    }

    #[test]
    fn resolution_guard() {
        let d = Domain::interval(-1.0, 1.0).unwrap();
        assert!(matches!(Discretization::new(&d, ord(0.5), 0.5), Err(Error::Resolution(_))));
    }
}
