//! Sampled surface data over a rectangular (u, v) grid.
//!
//! Every field is a function of u alone (the phase constant is zero), so the
//! v direction only replicates values; the verifier still differences along
//! v to confirm that flatness. Cells where |c|^2 would be negative are
//! marked invalid and reported, not dropped.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::formulas::{
    a_of_alpha, c_of, c_radicand, gauss_curvature_closed, gauss_curvature_from_a,
    hopf_coefficients, tau_of_a, HopfCoefficients,
};
use crate::profile::AlphaProfile;

/// Per-node values shared by every v at the same u.
#[derive(Debug, Clone)]
pub struct GridColumn {
    pub u: f64,
    pub alpha: f64,
    pub a: Complex64,
    pub tau: Complex64,
    pub mu: Complex64,
    pub g: f64,
    /// |c|^2 before the square root; may be negative (then `c` is `None`).
    pub radicand: f64,
    pub c: Option<Complex64>,
    pub k_closed: f64,
    pub k_gauss: f64,
    pub hopf: Option<HopfCoefficients>,
    /// mu^2 (8 b a - 3 rho sin^2 alpha), defined whether or not c exists.
    pub phi1: Complex64,
}

/// The sampled grid: u-columns times v-nodes.
#[derive(Debug, Clone)]
pub struct SurfaceGrid {
    pub profile: AlphaProfile,
    pub v_nodes: Vec<f64>,
    pub columns: Vec<GridColumn>,
    /// (u index, v index) pairs where c is undefined.
    pub invalid_cells: Vec<(usize, usize)>,
}

impl SurfaceGrid {
    pub fn n_u(&self) -> usize {
        self.columns.len()
    }

    pub fn n_v(&self) -> usize {
        self.v_nodes.len()
    }

    pub fn v_step(&self) -> f64 {
        if self.v_nodes.len() > 1 {
            self.v_nodes[1] - self.v_nodes[0]
        } else {
            0.0
        }
    }
}

/// Uniform v-lattice of `count` nodes spaced by `step`, centered on v = 0.
pub fn centered_v_nodes(count: usize, step: f64) -> Vec<f64> {
    let mid = (count.saturating_sub(1)) as f64 / 2.0;
    (0..count).map(|j| (j as f64 - mid) * step).collect()
}

/// Evaluate every pointwise quantity at each (u, v) node of the profile.
/// The phase constant is zero, so c is evaluated with k1 = 0 and all fields
/// are exactly v-independent.
pub fn build_grid(profile: &AlphaProfile, v_nodes: Vec<f64>) -> Result<SurfaceGrid> {
    if profile.is_empty() {
        return Err(Error::GridTooSmall { n_u: 0 });
    }
    if v_nodes.is_empty() {
        return Err(Error::Usage("v_nodes must be nonempty".into()));
    }
    let p = &profile.params;
    let mut columns = Vec::with_capacity(profile.len());
    let mut invalid_cells = Vec::new();
    for i in 0..profile.len() {
        let alpha = profile.alpha[i];
        let g = profile.g[i];
        let mu = profile.mu[i];
        let a = a_of_alpha(alpha, p)?;
        let tau = tau_of_a(a, p.b)?;
        let radicand = c_radicand(alpha, a, p.rho);
        let (c, hopf) = if radicand >= 0.0 {
            let c = c_of(alpha, 0.0, a, p.b, p.rho, 0.0)?;
            let hopf = hopf_coefficients(alpha, a, c, mu, p.b, p.rho).ok();
            (Some(c), hopf)
        } else {
            for (j, _) in v_nodes.iter().enumerate() {
                invalid_cells.push((i, j));
            }
            (None, None)
        };
        let s = alpha.sin().powi(2);
        let phi1 = mu * mu * (8.0 * p.b * a - 3.0 * p.rho * s);
        columns.push(GridColumn {
            u: profile.u_nodes[i],
            alpha,
            a,
            tau,
            mu,
            g,
            radicand,
            c,
            k_closed: gauss_curvature_closed(alpha, p.b, p.c3)?,
            k_gauss: gauss_curvature_from_a(alpha, a, p.b, p.rho),
            hopf,
            phi1,
        });
    }
    Ok(SurfaceGrid {
        profile: profile.clone(),
        v_nodes,
        columns,
        invalid_cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;
    use crate::profile::integrate_profile;
    use std::f64::consts::PI;

    #[test]
    fn single_v_node_matches_profile() {
        let p = ModelParams::family(1.0, 0.5).unwrap();
        let prof = integrate_profile(&p, PI / 3.0, 0.05, 1e-3).unwrap();
        let grid = build_grid(&prof, vec![0.0]).unwrap();
        assert_eq!(grid.n_u(), prof.len());
        assert_eq!(grid.n_v(), 1);
        for (col, (&al, &g)) in grid.columns.iter().zip(prof.alpha.iter().zip(prof.g.iter())) {
            assert_eq!(col.alpha, al);
            assert_eq!(col.g, g);
        }
        assert!(grid.invalid_cells.is_empty());
    }

    #[test]
    fn v_translation_invariance_is_exact() {
        let p = ModelParams::family(1.0, 0.5).unwrap();
        let prof = integrate_profile(&p, PI / 3.0, 0.05, 1e-3).unwrap();
        let g1 = build_grid(&prof, centered_v_nodes(5, 1e-3)).unwrap();
        let shifted: Vec<f64> = centered_v_nodes(5, 1e-3).iter().map(|v| v + 3.7).collect();
        let g2 = build_grid(&prof, shifted).unwrap();
        for (c1, c2) in g1.columns.iter().zip(g2.columns.iter()) {
            assert_eq!(c1.c, c2.c);
            assert_eq!(c1.k_gauss, c2.k_gauss);
            assert_eq!(c1.phi1, c2.phi1);
        }
    }

    #[test]
    fn anchor_node_curvatures() {
        let p = ModelParams::family(1.0, 0.5).unwrap();
        let prof = integrate_profile(&p, PI / 3.0, 0.05, 1e-3).unwrap();
        let grid = build_grid(&prof, vec![0.0]).unwrap();
        let col = &grid.columns[prof.origin];
        let expected = -81.0 / 28.0;
        assert!((col.k_closed - expected).abs() < 1e-12);
        assert!((col.k_gauss - expected).abs() < 1e-9);
    }

    #[test]
    fn high_branch_marks_all_cells_invalid() {
        // |c|^2 < 0 on the whole high branch: every cell is reported
        let p = ModelParams::family(1.0, 0.95).unwrap();
        let prof = integrate_profile(&p, p.default_alpha0(), 0.05, 1e-3).unwrap();
        let grid = build_grid(&prof, centered_v_nodes(3, 1e-3)).unwrap();
        assert_eq!(grid.invalid_cells.len(), grid.n_u() * grid.n_v());
        for col in &grid.columns {
            assert!(col.radicand < 0.0);
            assert!(col.c.is_none());
            assert!(col.hopf.is_none());
        }
    }

    #[test]
    fn centered_nodes_are_symmetric() {
        let v = centered_v_nodes(5, 0.5);
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let v = centered_v_nodes(1, 0.5);
        assert_eq!(v, vec![0.0]);
    }
}
