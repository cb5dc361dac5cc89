//! Per-`k` bound reports built from three nested resolutions, with JSON and
//! CSV output.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    cesaro_ratio, kroger_upper_sum, liyau_lower_sum, rr_numeric_bound, weyl_constant, weyl_main_term,
    CutoffIntegrator, PsiTerms,
};
use crate::eigen::{extrapolate, Extrapolated, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{check_geometry, Domain, GeometryReport};
use crate::operator::{CutoffProfile, Discretization};
use crate::special::FractionalOrder;

/// Round to 12 significant digits.
pub fn round_sig(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Text form used in CSV output.
pub fn format_number(v: f64) -> String {
    let r = round_sig(v);
    let a = r.abs();
    if r != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{r:e}")
    } else {
        format!("{r}")
    }
}

/// Spectra at `4h`, `2h`, `h` and their extrapolation.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub finest: Discretization,
    pub spectra: [Spectrum; 3],
    pub extrapolated: Vec<Extrapolated>,
    pub dims: [usize; 3],
}

impl Refinement {
    /// The `count` lowest eigenpairs at each of `4h`, `2h`, `h`.
    pub fn compute(d: &Domain, s: FractionalOrder, h: f64, count: usize) -> Result<Self> {
        let mut spectra = Vec::with_capacity(3);
        let mut dims = [0; 3];
        let mut finest = None;
        for (level, f) in [4.0, 2.0, 1.0].into_iter().enumerate() {
            let disc = Discretization::new(d, s, f * h)?;
            if disc.dim() < count {
                return Err(Error::Resolution(format!(
                    "{} unknowns at spacing {} cannot hold {count} eigenpairs",
                    disc.dim(),
                    f * h
                )));
            }
            dims[level] = disc.dim();
            spectra.push(disc.spectrum(count)?);
            if level == 2 {
                finest = Some(disc);
            }
        }
        let extrapolated = extrapolate(&spectra[0].eigenvalues, &spectra[1].eigenvalues, &spectra[2].eigenvalues)?;
        let spectra: [Spectrum; 3] = spectra.try_into().map_err(|_| Error::Dimension("three levels".into()))?;
        Ok(Self { finest: finest.ok_or_else(|| Error::Dimension("no finest level".into()))?, spectra, extrapolated, dims })
    }

    pub fn values(&self) -> Vec<f64> {
        self.extrapolated.iter().map(|e| e.value).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub domain: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub s: f64,
    /// spacings from coarsest to finest
    pub h: [f64; 3],
    pub dims: [usize; 3],
    pub k_max: usize,
    pub inradius: f64,
    pub circum_ok: bool,
    pub volume: f64,
    pub weyl_constant: f64,
    pub cutoff_c2_norm: f64,
    pub orthonormality_residual: f64,
    /// eigenvalues whose three-level sequence was not cleanly convergent
    pub flagged: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub k: usize,
    pub lambda_k: f64,
    pub lambda_error: f64,
    pub sum_lambda: f64,
    pub sum_error: f64,
    pub liyau_lower_sum: f64,
    pub weyl_main: f64,
    pub kroger_upper_sum: f64,
    /// the same bound with `∫w_σ` replaced by `|Ω|`
    pub kroger_upper_with_volume: f64,
    /// bound for `λ_{k+1}`
    pub rr_numeric_bound: Option<f64>,
    pub lambda_next: Option<f64>,
    pub lambda_next_error: Option<f64>,
    pub cesaro_ratio: f64,
    pub r: f64,
    pub sigma: f64,
    pub c1_emp: f64,
    pub psi: PsiTerms,
    pub psi_total: f64,
}

/// Column order of the CSV output.
pub const CSV_COLUMNS: [&str; 11] = [
    "k",
    "lambda_k",
    "sum_lambda",
    "liyau_lower_sum",
    "weyl_main",
    "kroger_upper_sum",
    "rr_numeric_bound",
    "cesaro_ratio",
    "r",
    "sigma",
    "c1_emp",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub meta: ReportMeta,
    pub rows: Vec<BoundRow>,
}

/// Outcome of the two-sided comparison, margins applied to the eigenvalue side.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SandwichCheck {
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub rr_ok: bool,
    pub weyl_ok: bool,
    pub failures: Vec<String>,
}

impl BoundRow {
    /// Fields in [`CSV_COLUMNS`] order; an infinite Rayleigh–Ritz value is left empty.
    pub fn csv_record(&self) -> [String; 11] {
        [
            self.k.to_string(),
            format_number(self.lambda_k),
            format_number(self.sum_lambda),
            format_number(self.liyau_lower_sum),
            format_number(self.weyl_main),
            format_number(self.kroger_upper_sum),
            self.rr_numeric_bound.map(format_number).unwrap_or_default(),
            format_number(self.cesaro_ratio),
            format_number(self.r),
            format_number(self.sigma),
            format_number(self.c1_emp),
        ]
    }
}

impl BoundReport {
    /// Report for `k = 1..=k_max` from spectra at `4h`, `2h`, `h`.
    pub fn compute(d: &Domain, s: FractionalOrder, h: f64, k_max: usize) -> Result<Self> {
        let refinement = Refinement::compute(d, s, h, k_max + 1)?;
        let geometry = check_geometry(d)?;
        Self::from_refinement(d, s, &refinement, &geometry, k_max)
    }

    pub fn from_refinement(
        d: &Domain,
        s: FractionalOrder,
        refinement: &Refinement,
        geometry: &GeometryReport,
        k_max: usize,
    ) -> Result<Self> {
        let ex = &refinement.extrapolated;
        if k_max == 0 || k_max > ex.len() {
            return Err(Error::OutOfRange { what: "k_max (requires 1 <= k_max <= computed eigenpairs)", value: k_max as f64 });
        }
        let n = d.dim();
        let vol = d.volume();
        let values = refinement.values();
        let integrator = CutoffIntegrator::new(d);
        let finest = &refinement.spectra[2];
        let disc = &refinement.finest;
        let rows = (1..=k_max)
            .into_par_iter()
            .map(|k| -> Result<BoundRow> {
                let kb = kroger_upper_sum(d, s, k, geometry, &integrator)?;
                let rr = rr_numeric_bound(finest, disc, k, kb.r, kb.sigma).ok().map(|b| b.value);
                let sum_lambda: f64 = values[..k].iter().sum();
                let sum_error: f64 = ex[..k].iter().map(|e| e.error).sum();
                let next = ex.get(k);
                Ok(BoundRow {
                    k,
                    lambda_k: round_sig(values[k - 1]),
                    lambda_error: round_sig(ex[k - 1].error),
                    sum_lambda: round_sig(sum_lambda),
                    sum_error: round_sig(sum_error),
                    liyau_lower_sum: round_sig(liyau_lower_sum(n, s, vol, k)?),
                    weyl_main: round_sig(weyl_main_term(n, s, vol, k)?),
                    kroger_upper_sum: round_sig(kb.upper),
                    kroger_upper_with_volume: round_sig(kb.upper_with_volume),
                    rr_numeric_bound: rr.map(round_sig),
                    lambda_next: next.map(|e| round_sig(e.value)),
                    lambda_next_error: next.map(|e| round_sig(e.error)),
                    cesaro_ratio: round_sig(cesaro_ratio(&values, n, s, k)?),
                    r: round_sig(kb.r),
                    sigma: round_sig(kb.sigma),
                    c1_emp: round_sig(kb.c1),
                    psi: PsiTerms {
                        cutoff: round_sig(kb.psi.cutoff),
                        near: round_sig(kb.psi.near),
                        middle: round_sig(kb.psi.middle),
                        tail: round_sig(kb.psi.tail),
                        phi: round_sig(kb.psi.phi),
                    },
                    psi_total: round_sig(kb.psi.total()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let hs = [refinement.spectra[0].h, refinement.spectra[1].h, finest.h];
        let meta = ReportMeta {
            domain: d.spec_string(),
            n,
            s: s.get(),
            h: hs.map(round_sig),
            dims: refinement.dims,
            k_max,
            inradius: round_sig(geometry.r),
            circum_ok: geometry.circum_ok,
            volume: round_sig(vol),
            weyl_constant: round_sig(weyl_constant(n, s, vol)?),
            cutoff_c2_norm: round_sig(CutoffProfile::shared().c2_norm),
            orthonormality_residual: round_sig(finest.orthonormality_residual()),
            flagged: ex.iter().filter(|e| e.flagged).count(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        Ok(Self { meta, rows })
    }

    /// Lower and upper sum bounds against `Σλ ± 2·sum_error`, and the
    /// Rayleigh–Ritz value against `λ_{k+1} − 2·error` wherever it is finite.
    pub fn sandwich(&self) -> SandwichCheck {
        let mut c = SandwichCheck { lower_ok: true, upper_ok: true, rr_ok: true, weyl_ok: true, failures: vec![] };
        for row in &self.rows {
            let margin = 2.0 * row.sum_error;
            if row.liyau_lower_sum > row.sum_lambda + margin {
                c.lower_ok = false;
                c.failures.push(format!("k={}: lower {} > sum {}", row.k, row.liyau_lower_sum, row.sum_lambda));
            }
            if row.sum_lambda - margin > row.kroger_upper_sum {
                c.upper_ok = false;
                c.failures.push(format!("k={}: sum {} > upper {}", row.k, row.sum_lambda, row.kroger_upper_sum));
            }
            if row.weyl_main > row.kroger_upper_sum {
                c.weyl_ok = false;
                c.failures.push(format!("k={}: weyl {} > upper {}", row.k, row.weyl_main, row.kroger_upper_sum));
            }
            if let (Some(rr), Some(next), Some(err)) = (row.rr_numeric_bound, row.lambda_next, row.lambda_next_error) {
                if next - 2.0 * err > rr {
                    c.rr_ok = false;
                    c.failures.push(format!("k={}: lambda_next {} > rr {}", row.k, next, rr));
                }
            }
        }
        c
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.csv_record())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))
    }
}

/// Output format of a report file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    /// From a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Write `report` to `path` in `format`.
pub fn emit_report(report: &BoundReport, path: &Path, format: Format) -> Result<()> {
    let text = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Csv => report.to_csv()?,
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(std::f64::consts::PI), 3.14159265359);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(-1234.56789012345), -1234.56789012);
        assert_eq!(format_number(1.5e-7), "1.5e-7");
        assert_eq!(format_number(2.25), "2.25");
    }

    #[test]
    fn empty_report_has_header_only() {
        let meta = ReportMeta {
            domain: "interval:-1,1".into(),
            n: 1,
            s: 0.5,
            h: [0.1, 0.05, 0.025],
            dims: [19, 39, 79],
            k_max: 0,
            inradius: 1.0,
            circum_ok: true,
            volume: 2.0,
            weyl_constant: 0.785398163397,
            cutoff_c2_norm: 5.7735026919,
            orthonormality_residual: 0.0,
            flagged: 0,
            version: "0".into(),
        };
        let r = BoundReport { meta, rows: vec![] };
        assert_eq!(r.to_csv().unwrap().trim_end(), CSV_COLUMNS.join(","));
        assert_eq!(BoundReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    }
}
