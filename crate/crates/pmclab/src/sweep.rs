//! Parameter sweep over the shape constant: curvature landscape, the
//! curvature bound, and the Hopf-ratio constancy check, as plot-ready rows.

use crate::error::{Error, Result};
use crate::formulas::{a_of_alpha, c_of, gauss_curvature_closed, hopf_coefficients, mu_of};
use crate::params::{alpha_from_sin_sq, AlphaSide, ModelParams, EIGHT_NINTHS};
use crate::report::f17;

/// One (c3, sin^2 alpha) sample.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub c3: f64,
    pub sin_sq: f64,
    pub k_closed: f64,
    /// Max of k_closed over this c3's samples.
    pub sup_k: f64,
    /// Closed-form curvature at sin^2 = 8/9, the boundary limit (-2 b^2).
    pub k_limit: f64,
    /// | |gamma|^2 - 2 (8 - 9 c3) |; NaN where c is undefined (c3 > 8/9).
    pub gamma_sq_dev: f64,
    pub bound_pass: bool,
    pub gamma_pass: bool,
}

pub const SWEEP_CSV_HEADER: &str =
    "c3,sin_sq_alpha,K_closed,sup_K,K_limit,gamma_sq_dev,bound_pass,gamma_pass";

/// Sample `steps` values of c3 in [c3_min, c3_max] (inclusive, linear) with
/// `samples` interior sin^2 points per admissible interval. The range must
/// avoid the excluded constants 0 and 8/9.
pub fn run_sweep(
    b: f64,
    c3_min: f64,
    c3_max: f64,
    steps: usize,
    samples: usize,
) -> Result<Vec<SweepRow>> {
    if !(c3_min <= c3_max) || !c3_min.is_finite() || !c3_max.is_finite() {
        return Err(Error::Usage(format!(
            "invalid c3 range [{c3_min}, {c3_max}]"
        )));
    }
    if c3_min <= 0.0 && c3_max >= 0.0 {
        return Err(Error::DegenerateConstant { c3: 0.0 });
    }
    if c3_min <= EIGHT_NINTHS && c3_max >= EIGHT_NINTHS {
        return Err(Error::DegenerateConstant { c3: EIGHT_NINTHS });
    }
    if steps == 0 || samples == 0 {
        return Err(Error::Usage("steps and samples must be positive".into()));
    }
    let mut rows = Vec::with_capacity(steps * samples);
    for i in 0..steps {
        let c3 = if steps == 1 {
            c3_min
        } else {
            c3_min + i as f64 * (c3_max - c3_min) / (steps - 1) as f64
        };
        let params = ModelParams::family(b, c3)?;
        let iv = params.interval();
        let alpha_limit = alpha_from_sin_sq(EIGHT_NINTHS, AlphaSide::Acute)?;
        let k_limit = gauss_curvature_closed(alpha_limit, b, c3)?;
        let mut batch = Vec::with_capacity(samples);
        let mut sup_k = f64::NEG_INFINITY;
        for k in 0..samples {
            let s = iv.lo + (k + 1) as f64 * iv.width() / (samples + 1) as f64;
            let alpha = alpha_from_sin_sq(s, AlphaSide::Acute)?;
            let k_closed = gauss_curvature_closed(alpha, b, c3)?;
            sup_k = sup_k.max(k_closed);
            let gamma_sq_dev = match gamma_dev_at(&params, alpha, c3) {
                Some(d) => d,
                None => f64::NAN,
            };
            batch.push((c3, s, k_closed, gamma_sq_dev));
        }
        let bound_applicable = 8.0 - 9.0 * c3 > 0.0;
        for (c3, s, k_closed, gamma_sq_dev) in batch {
            rows.push(SweepRow {
                c3,
                sin_sq: s,
                k_closed,
                sup_k,
                k_limit,
                gamma_sq_dev,
                bound_pass: bound_applicable && k_closed <= -2.0 * b * b + 1e-9 * b * b,
                gamma_pass: gamma_sq_dev.is_finite() && gamma_sq_dev <= 1e-8,
            });
        }
    }
    Ok(rows)
}

fn gamma_dev_at(params: &ModelParams, alpha: f64, c3: f64) -> Option<f64> {
    let a = a_of_alpha(alpha, params).ok()?;
    let c = c_of(alpha, 0.0, a, params.b, params.rho, 0.0).ok()?;
    let mu = mu_of(1.0, a, params.b).ok()?;
    let h = hopf_coefficients(alpha, a, c, mu, params.b, params.rho).ok()?;
    Some((h.gamma.norm_sqr() - 2.0 * (8.0 - 9.0 * c3)).abs())
}

/// Sweep rows as deterministic CSV (flags as 0/1).
pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 140 + 80);
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            f17(r.c3),
            f17(r.sin_sq),
            f17(r.k_closed),
            f17(r.sup_k),
            f17(r.k_limit),
            f17(r.gamma_sq_dev),
            u8::from(r.bound_pass),
            u8::from(r.gamma_pass),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_branch_sweep_satisfies_the_bound() {
        let rows = run_sweep(1.0, 0.1, 0.8, 8, 50).unwrap();
        assert_eq!(rows.len(), 8 * 50);
        for r in &rows {
            assert!(r.bound_pass, "bound fails at c3={} s={}", r.c3, r.sin_sq);
            assert!(r.k_closed <= -2.0 + 1e-9);
            assert!(r.gamma_pass, "gamma fails at c3={} s={}", r.c3, r.sin_sq);
            assert!((r.k_limit + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ranges_crossing_excluded_constants_are_rejected() {
        assert!(matches!(
            run_sweep(1.0, -0.5, 0.5, 4, 4),
            Err(Error::DegenerateConstant { .. })
        ));
        assert!(matches!(
            run_sweep(1.0, 0.5, 0.95, 4, 4),
            Err(Error::DegenerateConstant { .. })
        ));
    }

    #[test]
    fn curvature_scales_exactly_with_b_squared() {
        let r1 = run_sweep(1.0, 0.1, 0.8, 4, 10).unwrap();
        let r2 = run_sweep(2.0, 0.1, 0.8, 4, 10).unwrap();
        for (a, b) in r1.iter().zip(r2.iter()) {
            assert_eq!(b.k_closed, 4.0 * a.k_closed);
            assert_eq!(b.sup_k, 4.0 * a.sup_k);
            assert_eq!(b.k_limit, 4.0 * a.k_limit);
        }
    }

    #[test]
    fn neg_branch_sweep() {
        let rows = run_sweep(1.0, -1.0, -0.1, 5, 20).unwrap();
        for r in &rows {
            assert!(r.bound_pass);
            assert!(r.gamma_pass);
        }
    }
}
