//! Similarity surrogates.
//!
//! The analytic default is a length-saturation factor times an SINR logistic:
//!
//! ```text
//! xi(u, SINR) = (1 - exp(-c u)) / (1 + exp(-a (SINR_dB - b(u)))),  b(u) = b0 - b1 u
//! ```
//!
//! Tables are comma-separated grids: the header row holds SINR breakpoints in
//! dB after a leading label cell, every further row starts with a symbol
//! length `u` followed by one similarity per breakpoint. Lookups are bilinear
//! and clamp at the grid edges.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::SemanticsError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSurrogate {
    /// `a`: logistic slope per dB.
    pub slope_per_db: f64,
    /// `b0`: SINR midpoint in dB at `u = 0`.
    pub midpoint_db: f64,
    /// `b1`: midpoint reduction per unit of symbol length.
    pub midpoint_shift_db_per_u: f64,
    /// `c`: length-saturation rate.
    pub length_rate: f64,
}

impl Default for AnalyticSurrogate {
    fn default() -> Self {
        AnalyticSurrogate { slope_per_db: 0.5, midpoint_db: 10.0, midpoint_shift_db_per_u: 0.2, length_rate: 0.3 }
    }
}

impl AnalyticSurrogate {
    pub fn validate(&self) -> Result<(), SemanticsError> {
        if self.slope_per_db > 0.0 && self.length_rate > 0.0 && self.midpoint_shift_db_per_u >= 0.0 && self.midpoint_db.is_finite() {
            Ok(())
        } else {
            Err(SemanticsError::Invalid(
                "semantic.surrogate: slope and length rate must be positive, midpoint shift non-negative".into(),
            ))
        }
    }

    pub fn eval(&self, u: f64, sinr: f64) -> f64 {
        let sinr_db = 10.0 * sinr.log10();
        let midpoint = self.midpoint_db - self.midpoint_shift_db_per_u * u;
        let length = 1.0 - (-self.length_rate * u).exp();
        let channel = 1.0 / (1.0 + (-self.slope_per_db * (sinr_db - midpoint)).exp());
        (length * channel).clamp(0.0, 1.0)
    }
}

/// Grid of similarity values over `(u, SINR_dB)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTable {
    pub u_values: Vec<f64>,
    pub sinr_db: Vec<f64>,
    /// Row-major, one row per `u` value.
    pub cells: Vec<f64>,
}

/// Index of the lower bracket and the interpolation weight, plus whether the
/// query was clamped.
fn bracket(axis: &[f64], x: f64) -> (usize, f64, bool) {
    let last = axis.len() - 1;
    if axis.len() == 1 {
        return (0, 0.0, x != axis[0]);
    }
    if x.is_nan() || x <= axis[0] {
        return (0, 0.0, x < axis[0] || x.is_nan());
    }
    if x >= axis[last] {
        return (last - 1, 1.0, x > axis[last]);
    }
    let hi = axis.partition_point(|&v| v <= x);
    let lo = hi - 1;
    (lo, (x - axis[lo]) / (axis[hi] - axis[lo]), false)
}

impl SimilarityTable {
    fn cell(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.sinr_db.len() + j]
    }

    /// Bilinear lookup; the flag reports whether `u` left the grid.
    pub fn lookup(&self, u: f64, sinr_db: f64) -> (f64, bool) {
        let (i, tu, u_clamped) = bracket(&self.u_values, u);
        let (j, ts, _) = bracket(&self.sinr_db, sinr_db);
        let i1 = (i + 1).min(self.u_values.len() - 1);
        let j1 = (j + 1).min(self.sinr_db.len() - 1);
        let top = self.cell(i, j) * (1.0 - ts) + self.cell(i, j1) * ts;
        let bottom = self.cell(i1, j) * (1.0 - ts) + self.cell(i1, j1) * ts;
        ((top * (1.0 - tu) + bottom * tu).clamp(0.0, 1.0), u_clamped)
    }

    fn validate(&self) -> Result<(), SemanticsError> {
        let cols = self.sinr_db.len();
        for (j, w) in self.sinr_db.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(SemanticsError::TableCell {
                    line: 1,
                    column: j + 3,
                    message: format!("SINR breakpoints must increase ({} after {})", w[1], w[0]),
                });
            }
        }
        for (i, w) in self.u_values.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(SemanticsError::TableCell {
                    line: i + 3,
                    column: 1,
                    message: format!("u values must increase ({} after {})", w[1], w[0]),
                });
            }
        }
        for i in 0..self.u_values.len() {
            for j in 0..cols {
                let v = self.cell(i, j);
                let at = |message: String| SemanticsError::TableCell { line: i + 2, column: j + 2, message };
                if !(0.0..=1.0).contains(&v) {
                    return Err(at(format!("similarity {v} outside [0, 1]")));
                }
                if j > 0 && v < self.cell(i, j - 1) {
                    return Err(at(format!("similarity decreases with SINR ({v} < {})", self.cell(i, j - 1))));
                }
                if i > 0 && v < self.cell(i - 1, j) {
                    return Err(at(format!("similarity decreases with u ({v} < {})", self.cell(i - 1, j))));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SurrogateKind {
    Analytic(AnalyticSurrogate),
    Table(SimilarityTable),
}

/// Maps symbol lengths and SINRs to semantic similarity in `[0, 1]`.
#[derive(Debug, Serialize, Deserialize)]
pub struct SimilaritySurrogate {
    pub kind: SurrogateKind,
    #[serde(skip)]
    clamped: AtomicU64,
}

impl Clone for SimilaritySurrogate {
    fn clone(&self) -> Self {
        SimilaritySurrogate { kind: self.kind.clone(), clamped: AtomicU64::new(self.clamp_count()) }
    }
}

impl PartialEq for SimilaritySurrogate {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl SimilaritySurrogate {
    pub fn analytic(params: AnalyticSurrogate) -> Self {
        SimilaritySurrogate { kind: SurrogateKind::Analytic(params), clamped: AtomicU64::new(0) }
    }

    pub fn table(table: SimilarityTable) -> Self {
        SimilaritySurrogate { kind: SurrogateKind::Table(table), clamped: AtomicU64::new(0) }
    }

    /// Number of table lookups whose `u` fell outside the grid.
    pub fn clamp_count(&self) -> u64 {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Single-modal similarity for text at `u` suts/word and linear `sinr`.
    pub fn similarity_sm(&self, u: f64, sinr: f64) -> f64 {
        match &self.kind {
            SurrogateKind::Analytic(a) => a.eval(u, sinr),
            SurrogateKind::Table(t) => {
                let (v, clamped) = t.lookup(u, 10.0 * sinr.log10());
                if clamped {
                    self.clamped.fetch_add(1, Ordering::Relaxed);
                }
                v
            }
        }
    }

    /// Multi-modal similarity: geometric mean of the text and image stream
    /// similarities.
    pub fn similarity_mm(&self, u_text: f64, u_image: f64, sinr_text: f64, sinr_image: f64) -> f64 {
        let t = self.similarity_sm(u_text, sinr_text);
        let i = self.similarity_sm(u_image, sinr_image);
        (t * i).sqrt()
    }
}

/// Parses the comma-separated grid format described in the module docs.
pub fn parse_similarity_table(text: &str) -> Result<SimilaritySurrogate, SemanticsError> {
    let rows: Vec<(usize, Vec<&str>)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| (i, l.split(',').map(str::trim).collect()))
        .collect();
    let Some(((header_line, header), body)) = rows.split_first() else {
        return Err(SemanticsError::Table("empty table".into()));
    };
    let num = |line: usize, column: usize, s: &str| {
        s.parse::<f64>().map_err(|_| SemanticsError::TableCell {
            line,
            column,
            message: format!("not a number: {s:?}"),
        })
    };
    if header.len() < 2 {
        return Err(SemanticsError::TableCell { line: *header_line, column: 2, message: "no SINR breakpoints".into() });
    }
    let sinr_db = header[1..]
        .iter()
        .enumerate()
        .map(|(j, s)| num(*header_line, j + 2, s))
        .collect::<Result<Vec<_>, _>>()?;
    if body.is_empty() {
        return Err(SemanticsError::Table("no u rows".into()));
    }
    let mut u_values = Vec::with_capacity(body.len());
    let mut cells = Vec::with_capacity(body.len() * sinr_db.len());
    for (line, fields) in body {
        if fields.len() != sinr_db.len() + 1 {
            return Err(SemanticsError::TableCell {
                line: *line,
                column: fields.len().min(sinr_db.len() + 1),
                message: format!("expected {} cells, found {}", sinr_db.len() + 1, fields.len()),
            });
        }
        u_values.push(num(*line, 1, fields[0])?);
        for (j, s) in fields[1..].iter().enumerate() {
            cells.push(num(*line, j + 2, s)?);
        }
    }
    let table = SimilarityTable { u_values, sinr_db, cells };
    table.validate()?;
    Ok(SimilaritySurrogate::table(table))
}

pub fn load_similarity_table(path: impl AsRef<Path>) -> Result<SimilaritySurrogate, SemanticsError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| SemanticsError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_similarity_table(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn db(x: f64) -> f64 {
        10f64.powf(x / 10.0)
    }

    #[test]
    fn analytic_reference_value() {
        let s = SimilaritySurrogate::analytic(AnalyticSurrogate::default());
        let xi = s.similarity_sm(10.0, db(8.0));
        assert!((xi - (1.0 - (-3.0f64).exp()) * 0.5).abs() < 1e-12);
        assert!((xi - 0.4751).abs() < 1e-4);
    }

    #[test]
    fn analytic_limits() {
        let s = SimilaritySurrogate::analytic(AnalyticSurrogate::default());
        assert!(s.similarity_sm(200.0, 1e30) > 1.0 - 1e-12);
        assert_eq!(s.similarity_sm(10.0, 0.0), 0.0);
    }

    #[test]
    fn multimodal_geometric_mean() {
        let s = SimilaritySurrogate::analytic(AnalyticSurrogate::default());
        assert!(s.similarity_mm(500.0, 500.0, 1e30, 1e30) > 1.0 - 1e-12);
        assert_eq!(s.similarity_mm(10.0, 10.0, 0.0, 1e6), 0.0);
        let single = s.similarity_sm(12.0, db(15.0));
        let joint = s.similarity_mm(12.0, 12.0, db(15.0), db(15.0));
        assert!((single - joint).abs() < 1e-15);
    }

    #[test]
    fn constant_table() {
        let s = parse_similarity_table("u,0,20\n1,1.0,1.0\n30,1.0,1.0\n").unwrap();
        for (u, snr) in [(1.0, 0.0), (5.0, 7.0), (30.0, 20.0), (100.0, -40.0)] {
            assert_eq!(s.similarity_sm(u, db(snr)), 1.0);
        }
    }

    #[test]
    fn table_grid_points_and_midpoint() {
        let s = parse_similarity_table("u\\sinr_db,0,10\n5,0,1\n15,0,1\n").unwrap();
        assert_eq!(s.similarity_sm(5.0, db(10.0)), 1.0);
        assert_eq!(s.similarity_sm(15.0, db(0.0)), 0.0);
        let mid = s.similarity_sm(10.0, db(5.0));
        assert!((mid - 0.5).abs() < 1e-12);
        assert_eq!(s.clamp_count(), 0);
        let _ = s.similarity_sm(40.0, db(5.0));
        assert_eq!(s.clamp_count(), 1);
    }

    #[test]
    fn table_rejects_bad_grids() {
        let err = parse_similarity_table("u,0,10\n5,0.5,0.4\n").unwrap_err();
        assert!(matches!(err, SemanticsError::TableCell { line: 2, column: 3, .. }), "{err:?}");
        let err = parse_similarity_table("u,0,10\n5,0.5,0.6\n10,0.4,0.7\n").unwrap_err();
        assert!(matches!(err, SemanticsError::TableCell { line: 3, column: 2, .. }), "{err:?}");
        let err = parse_similarity_table("u,0,10\n5,0.5,1.2\n").unwrap_err();
        assert!(matches!(err, SemanticsError::TableCell { column: 3, .. }), "{err:?}");
        assert!(parse_similarity_table("u,10,0\n5,0.5,0.6\n").is_err());
        assert!(parse_similarity_table("").is_err());
        assert!(parse_similarity_table("u,0,10\n5,0.5\n").is_err());
    }

    #[test]
    fn grid_sampled_monotonicity_of_default() {
        let s = SimilaritySurrogate::analytic(AnalyticSurrogate::default());
        for u in 1..=40 {
            let mut prev = 0.0;
            for step in -60..=80 {
                let xi = s.similarity_sm(u as f64, db(step as f64));
                assert!((0.0..=1.0).contains(&xi));
                assert!(xi >= prev);
                prev = xi;
                let longer = s.similarity_sm(u as f64 + 1.0, db(step as f64));
                assert!(longer >= xi);
            }
        }
    }
}
