//! Deterministic CSV and JSON output.
//!
//! Floats are printed with 17 significant digits (round-trip exact for
//! doubles) and fixed field order; identical inputs produce byte-identical
//! files. Non-finite values appear as `NaN` in CSV and `null` in JSON.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::grid::SurfaceGrid;
use crate::verify::ResidualReport;

/// 17-significant-digit float formatting used by every data file.
pub fn f17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "NaN".to_string()
    }
}

fn raw_f64(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    raw_f64(*x).serialize(s)
}

#[derive(Serialize)]
struct JsonParams {
    #[serde(serialize_with = "ser_f64")]
    b: f64,
    #[serde(serialize_with = "ser_f64")]
    c3: f64,
    #[serde(serialize_with = "ser_f64")]
    rho: f64,
    branch: &'static str,
    im_sign: &'static str,
    alpha_side: &'static str,
}

impl JsonParams {
    fn of(p: &crate::params::ModelParams) -> JsonParams {
        JsonParams {
            b: p.b,
            c3: p.c3,
            rho: p.rho,
            branch: p.branch.as_str(),
            im_sign: p.im_sign.as_str(),
            alpha_side: p.alpha_side.as_str(),
        }
    }
}

#[derive(Serialize)]
struct JsonGrid {
    n_u: usize,
    n_v: usize,
    #[serde(serialize_with = "ser_f64")]
    h: f64,
    #[serde(serialize_with = "ser_f64")]
    v_step: f64,
    #[serde(serialize_with = "ser_f64")]
    margin_frac: f64,
    stop_reason: &'static str,
}

struct JsonEntry<'a>(&'a crate::verify::ResidualEntry);

impl Serialize for JsonEntry<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("entry", 5)?;
        st.serialize_field("name", self.0.name)?;
        st.serialize_field("max_abs", &raw_f64(self.0.max_abs))?;
        st.serialize_field("tolerance", &raw_f64(self.0.tolerance))?;
        match self.0.order {
            Some(o) => st.serialize_field("order", &raw_f64(o))?,
            None => st.serialize_field("order", &Option::<f64>::None)?,
        }
        st.serialize_field("pass", &self.0.pass)?;
        st.end()
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    params: JsonParams,
    grid: JsonGrid,
    residuals: Vec<JsonEntry<'a>>,
    verdict: &'static str,
}

/// Serialize a residual report to the canonical JSON schema.
pub fn report_to_json(report: &ResidualReport) -> String {
    let doc = JsonReport {
        params: JsonParams::of(&report.params),
        grid: JsonGrid {
            n_u: report.n_u,
            n_v: report.n_v,
            h: report.h,
            v_step: report.v_step,
            margin_frac: report.margin_frac,
            stop_reason: report.stop_reason.as_str(),
        },
        residuals: report.entries.iter().map(JsonEntry).collect(),
        verdict: if report.verdict { "pass" } else { "fail" },
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("report serialization");
    out.push('\n');
    out
}

/// Exact column header of the grid CSV schema.
pub const GRID_CSV_HEADER: &str = "u,v,alpha,re_a,im_a,re_mu,im_mu,re_c,im_c,g,K_closed,K_gauss,re_phi1,im_phi1,re_phi2,im_phi2,re_gamma,im_gamma";

/// Grid as CSV: one row per (u, v) cell, u outer, v inner.
pub fn grid_to_csv(grid: &SurfaceGrid) -> String {
    let mut out = String::with_capacity(grid.n_u() * grid.n_v() * 200);
    out.push_str(GRID_CSV_HEADER);
    out.push('\n');
    for col in &grid.columns {
        for &v in &grid.v_nodes {
            let (c_re, c_im) = match col.c {
                Some(c) => (c.re, c.im),
                None => (f64::NAN, f64::NAN),
            };
            let (p2re, p2im, gre, gim) = match &col.hopf {
                Some(h) => (
                    h.phi2_coeff.re,
                    h.phi2_coeff.im,
                    h.gamma.re,
                    h.gamma.im,
                ),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            let fields = [
                col.u, v, col.alpha, col.a.re, col.a.im, col.mu.re, col.mu.im, c_re, c_im,
                col.g, col.k_closed, col.k_gauss, col.phi1.re, col.phi1.im, p2re, p2im, gre, gim,
            ];
            let row: Vec<String> = fields.iter().map(|&x| f17(x)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// Grid as JSON: the CSV columns as a header array plus number rows.
pub fn grid_to_json(grid: &SurfaceGrid) -> String {
    #[derive(Serialize)]
    struct JsonGridFile<'a> {
        params: JsonParams,
        header: Vec<&'a str>,
        rows: Vec<Vec<Box<RawValue>>>,
    }
    let mut rows = Vec::with_capacity(grid.n_u() * grid.n_v());
    for col in &grid.columns {
        for &v in &grid.v_nodes {
            let (c_re, c_im) = match col.c {
                Some(c) => (c.re, c.im),
                None => (f64::NAN, f64::NAN),
            };
            let (p2re, p2im, gre, gim) = match &col.hopf {
                Some(h) => (h.phi2_coeff.re, h.phi2_coeff.im, h.gamma.re, h.gamma.im),
                None => (f64::NAN, f64::NAN, f64::NAN, f64::NAN),
            };
            let fields = [
                col.u, v, col.alpha, col.a.re, col.a.im, col.mu.re, col.mu.im, c_re, c_im,
                col.g, col.k_closed, col.k_gauss, col.phi1.re, col.phi1.im, p2re, p2im, gre, gim,
            ];
            rows.push(fields.iter().map(|&x| raw_f64(x)).collect());
        }
    }
    let doc = JsonGridFile {
        params: JsonParams::of(&grid.profile.params),
        header: GRID_CSV_HEADER.split(',').collect(),
        rows,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("grid serialization");
    out.push('\n');
    out
}
