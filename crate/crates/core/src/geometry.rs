//! Bounded domains in one and two dimensions: membership, distance to the
//! boundary, measure, level sets of the distance function, and the inradius /
//! circumradius / level-set hypotheses of the eigenvalue-sum upper bound.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary mask on a uniform grid of square cells.
///
/// Cell `(ix, iy)` covers `[x0 + ix·h, x0 + (ix+1)·h] × [y0 + iy·h, y0 + (iy+1)·h]`;
/// row `iy = 0` is the bottom row.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    nx: usize,
    ny: usize,
    h: f64,
    origin: [f64; 2],
    inside: Vec<bool>,
    /// signed distance at cell centres: positive inside, boundary on cell interfaces
    sdf: Vec<f64>,
    source: Option<String>,
}

impl RasterMask {
    pub fn new(nx: usize, ny: usize, h: f64, origin: [f64; 2], inside: Vec<bool>) -> Result<Self> {
        if nx == 0 || ny == 0 || inside.len() != nx * ny {
            return Err(Error::InvalidDomain(format!(
                "raster mask size {} does not match {nx}x{ny}",
                inside.len()
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidDomain(format!("raster cell size {h} must be positive")));
        }
        if !inside.iter().any(|&b| b) {
            return Err(Error::InvalidDomain("raster mask has no interior cell".into()));
        }
        let sdf = signed_distance_field(nx, ny, h, &inside);
        Ok(Self { nx, ny, h, origin, inside, sdf, source: None })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn cell_size(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn is_inside(&self, ix: usize, iy: usize) -> bool {
        self.inside[iy * self.nx + ix]
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> [f64; 2] {
        [
            self.origin[0] + (ix as f64 + 0.5) * self.h,
            self.origin[1] + (iy as f64 + 0.5) * self.h,
        ]
    }

    pub fn center_distance(&self, ix: usize, iy: usize) -> f64 {
        self.sdf[iy * self.nx + ix]
    }

    fn cell_of(&self, x: &[f64]) -> Option<(usize, usize)> {
        let fx = (x[0] - self.origin[0]) / self.h;
        let fy = (x[1] - self.origin[1]) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        (ix < self.nx && iy < self.ny).then_some((ix, iy))
    }

    fn contains(&self, x: &[f64]) -> bool {
        self.cell_of(x).is_some_and(|(ix, iy)| self.is_inside(ix, iy))
    }

    /// Bilinear interpolation of the cell-centre field, extended outside the
    /// frame by the distance to the nearest frame point.
    fn signed_distance(&self, x: &[f64]) -> f64 {
        let lo = [self.origin[0] + 0.5 * self.h, self.origin[1] + 0.5 * self.h];
        let hi = [
            self.origin[0] + (self.nx as f64 - 0.5) * self.h,
            self.origin[1] + (self.ny as f64 - 0.5) * self.h,
        ];
        let cx = x[0].clamp(lo[0], hi[0]);
        let cy = x[1].clamp(lo[1], hi[1]);
        let excess = ((x[0] - cx).powi(2) + (x[1] - cy).powi(2)).sqrt();
        let gx = (cx - lo[0]) / self.h;
        let gy = (cy - lo[1]) / self.h;
        let ix = (gx.floor() as usize).min(self.nx.saturating_sub(2));
        let iy = (gy.floor() as usize).min(self.ny.saturating_sub(2));
        let tx = if self.nx > 1 { gx - ix as f64 } else { 0.0 };
        let ty = if self.ny > 1 { gy - iy as f64 } else { 0.0 };
        let ix1 = (ix + 1).min(self.nx - 1);
        let iy1 = (iy + 1).min(self.ny - 1);
        let f = |i: usize, j: usize| self.sdf[j * self.nx + i];
        let v = (1.0 - tx) * (1.0 - ty) * f(ix, iy)
            + tx * (1.0 - ty) * f(ix1, iy)
            + (1.0 - tx) * ty * f(ix, iy1)
            + tx * ty * f(ix1, iy1);
        if excess > 0.0 {
            v.min(0.0) - excess
        } else {
            v
        }
    }

    fn count_above(&self, t: f64) -> usize {
        self.sdf
            .iter()
            .zip(&self.inside)
            .filter(|(&d, &inn)| inn && d > t)
            .count()
    }
}

/// Squared 1D distance transform (Felzenszwalb–Huttenlocher lower envelope).
fn edt_1d(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let mut first = None;
    for (q, &fq) in f.iter().enumerate() {
        if fq.is_finite() {
            first = Some(q);
            break;
        }
    }
    let Some(q0) = first else {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    };
    v[0] = q0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in q0 + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let p = v[k];
            let sx = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if sx <= z[k] {
                // k == 0 is impossible here since z[0] = -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = sx;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    let mut k = 0usize;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Exact squared Euclidean distance (in cell units) from every cell to the
/// nearest cell with `target == true`, by one pass along columns and one
/// pass along rows.
fn squared_edt(nx: usize, ny: usize, target: &[bool]) -> Vec<f64> {
    let mut grid: Vec<f64> = target.iter().map(|&t| if t { 0.0 } else { f64::INFINITY }).collect();
    let mut col = vec![0.0; ny];
    let mut res = vec![0.0; ny];
    for ix in 0..nx {
        for iy in 0..ny {
            col[iy] = grid[iy * nx + ix];
        }
        edt_1d(&col, &mut res);
        for iy in 0..ny {
            grid[iy * nx + ix] = res[iy];
        }
    }
    let mut row_out = vec![0.0; nx];
    for iy in 0..ny {
        let row = &grid[iy * nx..(iy + 1) * nx];
        edt_1d(row, &mut row_out);
        grid[iy * nx..(iy + 1) * nx].copy_from_slice(&row_out);
    }
    grid
}

fn signed_distance_field(nx: usize, ny: usize, h: f64, inside: &[bool]) -> Vec<f64> {
    // pad by one ring of exterior cells so that the frame counts as outside
    let px = nx + 2;
    let py = ny + 2;
    let mut pin = vec![false; px * py];
    for iy in 0..ny {
        for ix in 0..nx {
            pin[(iy + 1) * px + ix + 1] = inside[iy * nx + ix];
        }
    }
    let pout: Vec<bool> = pin.iter().map(|b| !b).collect();
    let to_out = squared_edt(px, py, &pout);
    let to_in = squared_edt(px, py, &pin);
    let mut sdf = vec![0.0; nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let p = (iy + 1) * px + ix + 1;
            sdf[iy * nx + ix] = if pin[p] {
                to_out[p].sqrt() * h - 0.5 * h
            } else {
                -(to_in[p].sqrt() * h - 0.5 * h)
            };
        }
    }
    sdf
}

/// A bounded open domain `Ω ⊂ ℝ^N`, `N ∈ {1, 2}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Interval { a: f64, b: f64 },
    Ball { center: [f64; 2], radius: f64 },
    Rect { lo: [f64; 2], hi: [f64; 2] },
    Raster(RasterMask),
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if a.is_finite() && b.is_finite() && a < b {
            Ok(Domain::Interval { a, b })
        } else {
            Err(Error::InvalidDomain(format!("interval ({a}, {b}) is empty or unbounded")))
        }
    }

    pub fn ball(center: [f64; 2], radius: f64) -> Result<Self> {
        if radius > 0.0 && radius.is_finite() && center.iter().all(|c| c.is_finite()) {
            Ok(Domain::Ball { center, radius })
        } else {
            Err(Error::InvalidDomain(format!("ball radius {radius} must be positive")))
        }
    }

    pub fn unit_disk() -> Self {
        Domain::Ball { center: [0.0, 0.0], radius: 1.0 }
    }

    pub fn rect(lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        if lo.iter().chain(&hi).all(|c| c.is_finite()) && lo[0] < hi[0] && lo[1] < hi[1] {
            Ok(Domain::Rect { lo, hi })
        } else {
            Err(Error::InvalidDomain(format!("box {lo:?}..{hi:?} is empty")))
        }
    }

    pub fn raster(mask: RasterMask) -> Self {
        Domain::Raster(mask)
    }

    /// Rasterise an indicator function on cells of size `h` covering `[lo, hi]`.
    pub fn raster_from_fn<F: Fn(f64, f64) -> bool>(lo: [f64; 2], hi: [f64; 2], h: f64, inside: F) -> Result<Self> {
        let nx = ((hi[0] - lo[0]) / h - 1e-9).ceil().max(1.0) as usize;
        let ny = ((hi[1] - lo[1]) / h - 1e-9).ceil().max(1.0) as usize;
        let mut cells = vec![false; nx * ny];
        for iy in 0..ny {
            for ix in 0..nx {
                let x = lo[0] + (ix as f64 + 0.5) * h;
                let y = lo[1] + (iy as f64 + 0.5) * h;
                cells[iy * nx + ix] = inside(x, y);
            }
        }
        Ok(Domain::Raster(RasterMask::new(nx, ny, h, lo, cells)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Domain::Interval { a, b } => (vec![*a], vec![*b]),
            Domain::Ball { center, radius } => (
                vec![center[0] - radius, center[1] - radius],
                vec![center[0] + radius, center[1] + radius],
            ),
            Domain::Rect { lo, hi } => (lo.to_vec(), hi.to_vec()),
            Domain::Raster(m) => (
                m.origin.to_vec(),
                vec![m.origin[0] + m.nx as f64 * m.h, m.origin[1] + m.ny as f64 * m.h],
            ),
        }
    }

    /// Diameter of the bounding box.
    pub fn box_diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.iter().zip(&hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Raster(m) => m.contains(x),
            _ => self.signed_distance(x) > 0.0,
        }
    }

    /// Distance to `∂Ω`, positive inside and negative outside.
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Domain::Ball { center, radius } => {
                radius - ((x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2)).sqrt()
            }
            Domain::Rect { lo, hi } => {
                let dx = (lo[0] - x[0]).max(x[0] - hi[0]);
                let dy = (lo[1] - x[1]).max(x[1] - hi[1]);
                if dx <= 0.0 && dy <= 0.0 {
                    -dx.max(dy)
                } else {
                    -(dx.max(0.0).powi(2) + dy.max(0.0).powi(2)).sqrt()
                }
            }
            Domain::Raster(m) => m.signed_distance(x),
        }
    }

    /// `ρ(x) = dist(x, ∂Ω)`, for points inside or outside.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        self.signed_distance(x).abs()
    }

    /// `|Ω|`.
    pub fn volume(&self) -> f64 {
        match self {
            Domain::Interval { a, b } => b - a,
            Domain::Ball { radius, .. } => PI * radius * radius,
            Domain::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
            Domain::Raster(m) => m.inside.iter().filter(|&&b| b).count() as f64 * m.h * m.h,
        }
    }

    /// Largest value of `ρ` over `Ω` where it is known in closed form.
    fn analytic_inradius(&self) -> Option<f64> {
        match self {
            Domain::Interval { a, b } => Some(0.5 * (b - a)),
            Domain::Ball { radius, .. } => Some(*radius),
            Domain::Rect { lo, hi } => Some(0.5 * (hi[0] - lo[0]).min(hi[1] - lo[1])),
            Domain::Raster(_) => None,
        }
    }

    /// `(N-1)`-dimensional measure of `Ω_t = {x ∈ Ω : ρ(x) = t}`.
    pub fn level_set_measure(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::OutOfRange { what: "level_set_measure (requires t > 0)", value: t });
        }
        Ok(match self {
            Domain::Interval { a, b } => {
                let half = 0.5 * (b - a);
                if t < half {
                    2.0
                } else {
                    0.0
                }
            }
            Domain::Ball { radius, .. } => {
                if t < *radius {
                    2.0 * PI * (radius - t)
                } else {
                    0.0
                }
            }
            Domain::Rect { lo, hi } => {
                let lx = hi[0] - lo[0] - 2.0 * t;
                let ly = hi[1] - lo[1] - 2.0 * t;
                if lx > 0.0 && ly > 0.0 {
                    2.0 * (lx + ly)
                } else {
                    0.0
                }
            }
            Domain::Raster(m) => {
                let area = m.h * m.h;
                let above = |tt: f64| m.count_above(tt) as f64 * area;
                let inradius = m.sdf.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                if t >= inradius {
                    0.0
                } else {
                    ((above(t - m.h) - above(t + m.h)) / (2.0 * m.h)).max(0.0)
                }
            }
        })
    }

    /// Grammar: `interval:a,b`, `ball:r` or `ball:r@cx,cy`, `box:ax,ay,bx,by`, `raster:<path>`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::DomainSpec(format!("missing ':' in '{spec}'")))?;
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: std::result::Result<Vec<f64>, _> = rest.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let v = v.map_err(|e| Error::DomainSpec(format!("bad number in '{spec}': {e}")))?;
            if v.len() != n {
                return Err(Error::DomainSpec(format!("'{kind}' expects {n} numbers, got {}", v.len())));
            }
            Ok(v)
        };
        let d = match kind.trim() {
            "interval" => {
                let v = nums(2)?;
                Domain::interval(v[0], v[1])
            }
            "ball" => match rest.split_once('@') {
                Some((r, c)) => {
                    let v: std::result::Result<Vec<f64>, _> =
                        std::iter::once(r).chain(c.split(',')).map(|t| t.trim().parse::<f64>()).collect();
                    match v {
                        Ok(v) if v.len() == 3 => Domain::ball([v[1], v[2]], v[0]),
                        _ => Err(Error::DomainSpec(format!("'ball:r@cx,cy' expected, got '{spec}'"))),
                    }
                }
                None => {
                    let v = nums(1)?;
                    Domain::ball([0.0, 0.0], v[0])
                }
            },
            "box" => {
                let v = nums(4)?;
                Domain::rect([v[0], v[1]], [v[2], v[3]])
            }
            "raster" => {
                let mut m = read_pgm_mask(Path::new(rest))?;
                m.source = Some(rest.to_string());
                Ok(Domain::Raster(m))
            }
            other => return Err(Error::DomainSpec(format!("unknown domain kind '{other}'"))),
        };
        d.map_err(|e| Error::DomainSpec(e.to_string()))
    }

    /// Canonical spec string (inverse of [`Domain::parse_spec`] for the analytic kinds).
    pub fn spec_string(&self) -> String {
        match self {
            Domain::Interval { a, b } => format!("interval:{a},{b}"),
            Domain::Ball { center, radius } if center == &[0.0, 0.0] => format!("ball:{radius}"),
            Domain::Ball { center, radius } => format!("ball:{radius}@{},{}", center[0], center[1]),
            Domain::Rect { lo, hi } => format!("box:{},{},{},{}", lo[0], lo[1], hi[0], hi[1]),
            Domain::Raster(m) => match &m.source {
                Some(p) => format!("raster:{p}"),
                None => format!("raster:<{}x{} h={}>", m.nx, m.ny, m.h),
            },
        }
    }

    /// Points sampled on `∂Ω`.
    pub fn boundary_samples(&self) -> Vec<Vec<f64>> {
        match self {
            Domain::Interval { a, b } => vec![vec![*a], vec![*b]],
            Domain::Ball { center, radius } => (0..720)
                .map(|i| {
                    let th = 2.0 * PI * i as f64 / 720.0;
                    vec![center[0] + radius * th.cos(), center[1] + radius * th.sin()]
                })
                .collect(),
            Domain::Rect { lo, hi } => {
                let mut pts = Vec::new();
                let m = 256;
                for i in 0..=m {
                    let t = i as f64 / m as f64;
                    let x = lo[0] + t * (hi[0] - lo[0]);
                    let y = lo[1] + t * (hi[1] - lo[1]);
                    pts.push(vec![x, lo[1]]);
                    pts.push(vec![x, hi[1]]);
                    pts.push(vec![lo[0], y]);
                    pts.push(vec![hi[0], y]);
                }
                pts
            }
            Domain::Raster(m) => {
                let mut pts = Vec::new();
                let inside = |ix: isize, iy: isize| {
                    ix >= 0
                        && iy >= 0
                        && (ix as usize) < m.nx
                        && (iy as usize) < m.ny
                        && m.is_inside(ix as usize, iy as usize)
                };
                for iy in 0..m.ny as isize {
                    for ix in 0..m.nx as isize {
                        if !inside(ix, iy) {
                            continue;
                        }
                        let c = m.cell_center(ix as usize, iy as usize);
                        for (dx, dy) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                            if !inside(ix + dx, iy + dy) {
                                pts.push(vec![c[0] + 0.5 * m.h * dx as f64, c[1] + 0.5 * m.h * dy as f64]);
                            }
                        }
                    }
                }
                pts
            }
        }
    }

    /// Nodes on which the inscribed-ball centre is searched, in lexicographic order.
    fn search_nodes(&self) -> Vec<Vec<f64>> {
        match self {
            Domain::Raster(m) => {
                let mut pts = Vec::new();
                for ix in 0..m.nx {
                    for iy in 0..m.ny {
                        pts.push(m.cell_center(ix, iy).to_vec());
                    }
                }
                pts
            }
            _ => {
                let (lo, hi) = self.bounding_box();
                if self.dim() == 1 {
                    let m = 2049;
                    (0..m).map(|i| vec![lo[0] + (hi[0] - lo[0]) * i as f64 / (m - 1) as f64]).collect()
                } else {
                    let m = 513;
                    let mut pts = Vec::with_capacity(m * m);
                    for i in 0..m {
                        let x = lo[0] + (hi[0] - lo[0]) * i as f64 / (m - 1) as f64;
                        for j in 0..m {
                            let y = lo[1] + (hi[1] - lo[1]) * j as f64 / (m - 1) as f64;
                            pts.push(vec![x, y]);
                        }
                    }
                    pts
                }
            }
        }
    }
}

/// Number of `t` samples used to estimate the level-set constant `c₀`.
pub const LEVEL_SET_SAMPLES: usize = 64;

/// Inradius witness and the geometric hypotheses of the upper bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// inradius `R`, the maximum of `ρ` over the search grid
    #[serde(rename = "R")]
    pub r: f64,
    pub center: Vec<f64>,
    /// whether `Ω ⊂ B_{2R}(center)` on the sampled boundary points
    pub circum_ok: bool,
    pub max_boundary_distance: f64,
    /// `max_t |Ω_t| / R^{N-1}` over the sampled `t`
    pub c0: f64,
    pub t_samples: Vec<(f64, f64)>,
    pub volume: f64,
}

pub fn check_geometry(d: &Domain) -> Result<GeometryReport> {
    check_geometry_with(d, LEVEL_SET_SAMPLES)
}

pub fn check_geometry_with(d: &Domain, t_count: usize) -> Result<GeometryReport> {
    let mut best = f64::NEG_INFINITY;
    let mut center = Vec::new();
    for p in d.search_nodes() {
        if !d.contains(&p) {
            continue;
        }
        let rho = d.distance_to_boundary(&p);
        if rho > best + 1e-12 {
            best = rho;
            center = p;
        }
    }
    if !(best > 0.0) {
        return Err(Error::InvalidDomain("no interior search node found".into()));
    }
    // grid search is exact on the analytic kinds whenever the centre is a node
    let r = match d.analytic_inradius() {
        Some(exact) if (exact - best).abs() < 1e-9 * exact.max(1.0) => exact,
        _ => best,
    };
    let max_boundary_distance = d
        .boundary_samples()
        .iter()
        .map(|p| p.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let circum_ok = max_boundary_distance <= 2.0 * r * (1.0 + 1e-12);
    let n = d.dim();
    let t_max = r * (1.0 - 1.0 / LEVEL_SET_SAMPLES as f64);
    let mut t_samples = Vec::with_capacity(t_count);
    let mut c0 = 0.0f64;
    for j in 0..t_count {
        let t = t_max * (j as f64 + 0.5) / t_count as f64;
        let m = d.level_set_measure(t)?;
        c0 = c0.max(m / r.powi(n as i32 - 1));
        t_samples.push((t, m));
    }
    Ok(GeometryReport { r, center, circum_ok, max_boundary_distance, c0, t_samples, volume: d.volume() })
}

/// Read a binary PGM (`P5`) mask. Nonzero pixels are interior; the cell size
/// comes from a header comment `# h=<cellsize>` and an optional
/// `# origin=<x>,<y>` sets the lower-left corner (default `0,0`).
pub fn read_pgm_mask(path: &Path) -> Result<RasterMask> {
    let bytes = fs::read(path)?;
    parse_pgm_mask(&bytes)
}

pub fn parse_pgm_mask(bytes: &[u8]) -> Result<RasterMask> {
    let bad = |m: &str| Error::DomainSpec(format!("PGM: {m}"));
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    let mut h = None;
    let mut origin = [0.0, 0.0];
    while tokens.len() < 4 {
        if pos >= bytes.len() {
            return Err(bad("truncated header"));
        }
        let c = bytes[pos];
        if c == b'#' {
            let end = bytes[pos..].iter().position(|&b| b == b'\n').map_or(bytes.len(), |e| pos + e);
            let line = String::from_utf8_lossy(&bytes[pos + 1..end]).trim().to_string();
            if let Some(v) = line.strip_prefix("h=") {
                h = Some(v.trim().parse::<f64>().map_err(|e| bad(&format!("bad h: {e}")))?);
            } else if let Some(v) = line.strip_prefix("origin=") {
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad("origin needs two numbers"));
                }
                for (o, p) in origin.iter_mut().zip(parts) {
                    *o = p.trim().parse::<f64>().map_err(|e| bad(&format!("bad origin: {e}")))?;
                }
            }
            pos = end;
        } else if c.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).to_string());
        }
    }
    if tokens[0] != "P5" {
        return Err(bad("only binary P5 masks are supported"));
    }
    let parse = |t: &str| t.parse::<usize>().map_err(|e| bad(&format!("bad header value '{t}': {e}")));
    let width = parse(&tokens[1])?;
    let height = parse(&tokens[2])?;
    let maxval = parse(&tokens[3])?;
    if maxval == 0 || maxval > 65535 {
        return Err(bad("maxval out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let bpp = if maxval < 256 { 1 } else { 2 };
    let need = width * height * bpp;
    if bytes.len() < pos + need {
        return Err(bad("truncated pixel data"));
    }
    let h = h.ok_or_else(|| bad("missing '# h=<cellsize>' comment"))?;
    let data = &bytes[pos..pos + need];
    let mut inside = vec![false; width * height];
    for row in 0..height {
        let iy = height - 1 - row;
        for ix in 0..width {
            let k = (row * width + ix) * bpp;
            let v = if bpp == 1 { data[k] as u16 } else { u16::from_be_bytes([data[k], data[k + 1]]) };
            inside[iy * width + ix] = v != 0;
        }
    }
    RasterMask::new(width, height, h, origin, inside)
}

pub fn write_pgm_mask(mask: &RasterMask, path: &Path) -> Result<()> {
    let mut out = format!(
        "P5\n# h={}\n# origin={},{}\n{} {}\n255\n",
        mask.h, mask.origin[0], mask.origin[1], mask.nx, mask.ny
    )
    .into_bytes();
    for row in 0..mask.ny {
        let iy = mask.ny - 1 - row;
        for ix in 0..mask.nx {
            out.push(if mask.is_inside(ix, iy) { 255 } else { 0 });
        }
    }
    fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_raster(h: f64) -> Domain {
        Domain::raster_from_fn([0.0, 0.0], [1.0, 1.0], h, |_, _| true).unwrap()
    }

    #[test]
    fn distance_examples() {
        let i = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(i.distance_to_boundary(&[0.0]), 1.0);
        let r = 1.7;
        let b = Domain::ball([0.0, 0.0], r).unwrap();
        assert!((b.distance_to_boundary(&[0.5 * r * 0.6, 0.5 * r * 0.8]) - 0.5 * r).abs() < 1e-15);
        let sq = Domain::rect([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert!((sq.distance_to_boundary(&[0.1, 0.4]) - 0.1).abs() < 1e-15);
        // outside the square: distance to the nearest corner
        assert!((sq.distance_to_boundary(&[2.0, 2.0]) - 2f64.sqrt()).abs() < 1e-15);
        assert!(!sq.contains(&[2.0, 2.0]));
    }

    #[test]
    fn volumes() {
        assert_eq!(Domain::interval(-1.0, 1.0).unwrap().volume(), 2.0);
        assert!((Domain::unit_disk().volume() - PI).abs() < 1e-15);
        let h = 1.0 / 64.0;
        let v = unit_square_raster(h).volume();
        assert!((v - 1.0).abs() <= h * 4.0);
    }

    #[test]
    fn level_sets_closed_forms() {
        let r = 1.3;
        let disk = Domain::ball([0.0, 0.0], r).unwrap();
        assert!((disk.level_set_measure(0.3).unwrap() - 2.0 * PI * (r - 0.3)).abs() < 1e-14);
        assert_eq!(disk.level_set_measure(1.5).unwrap(), 0.0);
        let i = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(i.level_set_measure(0.7).unwrap(), 2.0);
        let l = 2.0;
        let sq = Domain::rect([0.0, 0.0], [l, l]).unwrap();
        assert!((sq.level_set_measure(0.25).unwrap() - 4.0 * (l - 0.5)).abs() < 1e-14);
        assert!(sq.level_set_measure(0.0).is_err());
    }

    #[test]
    fn raster_distance_within_cell_diagonal() {
        let h = 1.0 / 64.0;
        let disk_r = Domain::raster_from_fn([-1.0, -1.0], [1.0, 1.0], h, |x, y| x * x + y * y < 1.0).unwrap();
        let exact = Domain::unit_disk();
        for k in 0..200 {
            let t = k as f64 * 0.61803398875 % 1.0;
            let u = k as f64 * 0.41421356237 % 1.0;
            let p = [1.8 * t - 0.9, 1.8 * u - 0.9];
            let e = exact.signed_distance(&p);
            let a = disk_r.signed_distance(&p);
            assert!((e - a).abs() <= h * 2f64.sqrt(), "p={p:?} exact={e} raster={a}");
        }
    }

    #[test]
    fn check_geometry_examples() {
        let g = check_geometry(&Domain::unit_disk()).unwrap();
        assert_eq!(g.r, 1.0);
        assert!(g.circum_ok);
        assert!((g.c0 - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        let g = check_geometry(&Domain::interval(-1.0, 1.0).unwrap()).unwrap();
        assert_eq!(g.r, 1.0);
        assert!(g.circum_ok);
        assert_eq!(g.c0, 2.0);
        assert_eq!(g.center, vec![0.0]);
        let sq = check_geometry(&Domain::rect([0.0, 0.0], [1.0, 1.0]).unwrap()).unwrap();
        assert_eq!(sq.r, 0.5);
        assert!(sq.circum_ok); // corner at distance √2/2 ≤ 1
        assert!((sq.c0 - 4.0 / 0.5).abs() < 0.05 * 8.0);
    }

    #[test]
    fn ellipse_violates_circumradius_condition() {
        // semi-axes 2 and 0.5: R = 0.5 but the tips sit at distance 2 > 2R
        let h = 1.0 / 32.0;
        let e = Domain::raster_from_fn([-2.0, -0.5], [2.0, 0.5], h, |x, y| (x / 2.0).powi(2) + (y / 0.5).powi(2) < 1.0)
            .unwrap();
        let g = check_geometry(&e).unwrap();
        assert!((g.r - 0.5).abs() <= 2.0 * h, "R={}", g.r);
        assert!(!g.circum_ok);
        assert!(g.max_boundary_distance > 1.9);
    }

    #[test]
    fn raster_geometry_matches_analytic_within_two_cells() {
        let h = 1.0 / 64.0;
        let disk_r = Domain::raster_from_fn([-1.0, -1.0], [1.0, 1.0], h, |x, y| x * x + y * y < 1.0).unwrap();
        let g = check_geometry(&disk_r).unwrap();
        assert!((g.r - 1.0).abs() <= 2.0 * h);
        assert!(g.circum_ok);
    }

    #[test]
    fn coarea_recovers_volume() {
        let h = 1.0 / 128.0;
        let doms = [
            Domain::unit_disk(),
            Domain::interval(-1.0, 1.0).unwrap(),
            Domain::rect([0.0, 0.0], [2.0, 1.0]).unwrap(),
            Domain::raster_from_fn([-1.0, -1.0], [1.0, 1.0], h, |x, y| x * x + y * y < 1.0).unwrap(),
        ];
        for d in &doms {
            let rmax = 1.0;
            let m = 4000;
            let dt = rmax / m as f64;
            let integral: f64 = (0..m).map(|j| d.level_set_measure((j as f64 + 0.5) * dt).unwrap() * dt).sum();
            let v = d.volume();
            assert!(((integral - v) / v).abs() < 0.02, "{} integral={integral} volume={v}", d.spec_string());
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(Domain::parse_spec("interval:-1,1").unwrap(), Domain::interval(-1.0, 1.0).unwrap());
        assert_eq!(Domain::parse_spec("ball:2").unwrap(), Domain::ball([0.0, 0.0], 2.0).unwrap());
        assert_eq!(
            Domain::parse_spec("box:0,0,1,2").unwrap(),
            Domain::rect([0.0, 0.0], [1.0, 2.0]).unwrap()
        );
        for bad in ["interval:1", "circle:1", "ball", "box:0,0,1,x", "interval:1,-1", "ball:-1"] {
            assert!(Domain::parse_spec(bad).is_err(), "{bad}");
        }
        let round = Domain::interval(-1.0, 1.0).unwrap();
        assert_eq!(Domain::parse_spec(&round.spec_string()).unwrap(), round);
        let off = Domain::ball([1.5, -0.25], 0.5).unwrap();
        assert_eq!(Domain::parse_spec(&off.spec_string()).unwrap(), off);
        assert!(Domain::parse_spec("ball:1@2").is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let h = 0.125;
        let Domain::Raster(m) =
            Domain::raster_from_fn([0.0, 0.0], [2.0, 1.0], h, |x, y| x > 0.5 && y < 0.75).unwrap()
        else {
            unreachable!()
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("mask.pgm");
        write_pgm_mask(&m, &p).unwrap();
        let back = read_pgm_mask(&p).unwrap();
        assert_eq!(back.nx, m.nx);
        assert_eq!(back.ny, m.ny);
        assert_eq!(back.inside, m.inside);
        assert_eq!(back.h, h);
        let spec = format!("raster:{}", p.display());
        let d = Domain::parse_spec(&spec).unwrap();
        assert!((d.volume() - 1.5 * 0.75).abs() < 1e-12);
    }

    #[test]
    fn pgm_requires_cell_size() {
        let bytes = b"P5\n2 1\n255\n\xff\x00";
        assert!(parse_pgm_mask(bytes).is_err());
        let ok = b"P5\n# h=0.5\n2 1\n255\n\xff\x00";
        let m = parse_pgm_mask(ok).unwrap();
        assert!(m.is_inside(0, 0) && !m.is_inside(1, 0));
    }

    #[test]
    fn empty_raster_rejected() {
        assert!(Domain::raster_from_fn([0.0, 0.0], [1.0, 1.0], 0.25, |_, _| false).is_err());
    }
}
