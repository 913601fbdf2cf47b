//! Model parameters and the admissible ranges of the Kaehler angle.
//!
//! The family is parametrized by a scale `b` (half the mean-curvature norm)
//! and a shape constant `c3`. For a given `c3` the squared imaginary part of
//! the normalized second-fundamental-form ratio is positive only when
//! sin^2(alpha) lies in one specific interval; `admissible_intervals` returns
//! it. The three possible interval kinds are named branches.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Endpoint guard: evaluations and the integrator reject points whose
/// sin^2(alpha) is within this distance of an open interval endpoint.
pub const DEFAULT_DELTA: f64 = 1e-6;

pub const EIGHT_NINTHS: f64 = 8.0 / 9.0;

/// Which admissible interval of sin^2(alpha) the parameters select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// c3 in (0, 8/9): sin^2(alpha) in (c3, 8/9).
    LowPos,
    /// c3 > 8/9: sin^2(alpha) in (8/9, min(c3, 1)).
    HighPos,
    /// c3 < 0: sin^2(alpha) in (8/9, 1].
    Neg,
}

impl Branch {
    /// The unique branch whose interval is nonempty for this `c3`.
    pub fn infer(c3: f64) -> Result<Branch> {
        check_c3(c3)?;
        if c3 < 0.0 {
            Ok(Branch::Neg)
        } else if c3 < EIGHT_NINTHS {
            Ok(Branch::LowPos)
        } else {
            Ok(Branch::HighPos)
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::LowPos => "low_pos",
            Branch::HighPos => "high_pos",
            Branch::Neg => "neg",
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Branch> {
        match s {
            "low_pos" | "lowpos" | "low-pos" => Ok(Branch::LowPos),
            "high_pos" | "highpos" | "high-pos" => Ok(Branch::HighPos),
            "neg" => Ok(Branch::Neg),
            other => Err(Error::Usage(format!("unknown branch {other:?}"))),
        }
    }
}

/// Sign choice for the imaginary part of `a` (the two choices are conjugate
/// families; orientation reversal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImSign {
    Plus,
    Minus,
}

impl ImSign {
    pub fn factor(&self) -> f64 {
        match self {
            ImSign::Plus => 1.0,
            ImSign::Minus => -1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            ImSign::Plus => "plus",
            ImSign::Minus => "minus",
        }
    }
}

impl std::str::FromStr for ImSign {
    type Err = Error;
    fn from_str(s: &str) -> Result<ImSign> {
        match s {
            "plus" | "+" => Ok(ImSign::Plus),
            "minus" | "-" => Ok(ImSign::Minus),
            other => Err(Error::Usage(format!("unknown im_sign {other:?}"))),
        }
    }
}

/// Which of the two angles with a given sin^2 to use when constructing alpha
/// from a target sin^2(alpha). alpha itself is always passed explicitly to
/// the evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSide {
    /// alpha in (0, pi/2).
    Acute,
    /// alpha in (pi/2, pi).
    Obtuse,
}

impl AlphaSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlphaSide::Acute => "acute",
            AlphaSide::Obtuse => "obtuse",
        }
    }
}

impl std::str::FromStr for AlphaSide {
    type Err = Error;
    fn from_str(s: &str) -> Result<AlphaSide> {
        match s {
            "acute" | "acute_side" => Ok(AlphaSide::Acute),
            "obtuse" | "obtuse_side" => Ok(AlphaSide::Obtuse),
            other => Err(Error::Usage(format!("unknown alpha_side {other:?}"))),
        }
    }
}

/// An admissible open interval of sin^2(alpha). The upper bound is closed
/// exactly when sin^2(alpha) = 1 itself is admissible (the trajectory then
/// crosses alpha = pi/2 smoothly).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinSqInterval {
    pub lo: f64,
    pub hi: f64,
    pub hi_closed: bool,
    pub branch: Branch,
}

impl SinSqInterval {
    pub fn contains(&self, s: f64) -> bool {
        s > self.lo && (s < self.hi || (self.hi_closed && s <= self.hi))
    }

    /// Strict interior with the endpoint guard applied to open endpoints.
    pub fn contains_guarded(&self, s: f64, delta: f64) -> bool {
        if s <= self.lo + delta {
            return false;
        }
        if self.hi_closed {
            s <= self.hi
        } else {
            s < self.hi - delta
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Distance from `s` to the nearest open endpoint (an infinite distance
    /// is never needed; the closed end reports the distance to `lo`).
    pub fn open_endpoint_distance(&self, s: f64) -> f64 {
        let d_lo = s - self.lo;
        if self.hi_closed {
            d_lo
        } else {
            d_lo.min(self.hi - s)
        }
    }
}

/// Angle in (0, pi) with the requested sin^2, on the requested side of pi/2.
pub fn alpha_from_sin_sq(s: f64, side: AlphaSide) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) || !s.is_finite() {
        return Err(Error::OutsideAdmissibleRegion { sin_sq: s });
    }
    let acute = s.sqrt().asin();
    Ok(match side {
        AlphaSide::Acute => acute,
        AlphaSide::Obtuse => std::f64::consts::PI - acute,
    })
}

fn check_c3(c3: f64) -> Result<()> {
    if !c3.is_finite() || c3 == 0.0 || 8.0 - 9.0 * c3 == 0.0 {
        return Err(Error::DegenerateConstant { c3 });
    }
    Ok(())
}

/// All nonempty admissible intervals of sin^2(alpha) for this `c3`.
/// There is exactly one for every valid `c3`.
pub fn admissible_intervals(c3: f64) -> Result<Vec<SinSqInterval>> {
    check_c3(c3)?;
    let interval = if c3 < 0.0 {
        SinSqInterval {
            lo: EIGHT_NINTHS,
            hi: 1.0,
            hi_closed: true,
            branch: Branch::Neg,
        }
    } else if c3 < EIGHT_NINTHS {
        SinSqInterval {
            lo: c3,
            hi: EIGHT_NINTHS,
            hi_closed: false,
            branch: Branch::LowPos,
        }
    } else {
        // sin^2(alpha) is capped at 1; the cap is attained iff c3 > 1.
        SinSqInterval {
            lo: EIGHT_NINTHS,
            hi: c3.min(1.0),
            hi_closed: c3 > 1.0,
            branch: Branch::HighPos,
        }
    };
    Ok(vec![interval])
}

/// Interval selected by an explicit branch; errors if that branch is empty
/// for this `c3`.
pub fn interval_for(c3: f64, branch: Branch) -> Result<SinSqInterval> {
    let inferred = Branch::infer(c3)?;
    if inferred != branch {
        return Err(Error::InvalidParams(format!(
            "branch {} is empty for c3 = {c3}; the nonempty branch is {}",
            branch.as_str(),
            inferred.as_str()
        )));
    }
    Ok(admissible_intervals(c3)?[0])
}

/// Defining constants of the family: scale `b`, shape constant `c3`, the
/// ambient curvature parameter `rho`, and the discrete choices.
///
/// For the constructed family `rho = -3 b^2` exactly; `with_rho_scale`
/// perturbs it for negative controls while keeping `a(alpha)` fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub b: f64,
    pub c3: f64,
    pub rho: f64,
    pub branch: Branch,
    pub im_sign: ImSign,
    pub alpha_side: AlphaSide,
}

impl ModelParams {
    /// Family parameters with `rho = -3 b^2` and the branch inferred from `c3`.
    pub fn family(b: f64, c3: f64) -> Result<ModelParams> {
        let branch = Branch::infer(c3)?;
        let params = ModelParams {
            b,
            c3,
            rho: -3.0 * b * b,
            branch,
            im_sign: ImSign::Plus,
            alpha_side: AlphaSide::Acute,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_im_sign(mut self, im_sign: ImSign) -> ModelParams {
        self.im_sign = im_sign;
        self
    }

    pub fn with_alpha_side(mut self, alpha_side: AlphaSide) -> ModelParams {
        self.alpha_side = alpha_side;
        self
    }

    /// Negative-control variant: `rho = -3 b^2 * scale`.
    pub fn with_rho_scale(mut self, scale: f64) -> ModelParams {
        self.rho = -3.0 * self.b * self.b * scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidParams(format!("b = {} must be positive", self.b)));
        }
        check_c3(self.c3)?;
        if !self.rho.is_finite() {
            return Err(Error::InvalidParams("rho must be finite".into()));
        }
        let inferred = Branch::infer(self.c3)?;
        if inferred != self.branch {
            return Err(Error::InvalidParams(format!(
                "branch {} is inconsistent with c3 = {} (expected {})",
                self.branch.as_str(),
                self.c3,
                inferred.as_str()
            )));
        }
        Ok(())
    }

    /// `c4 = -c3` when `c3 < 0`, the constant used by the negative-branch
    /// formula for Im a. Zero otherwise.
    pub fn c4(&self) -> f64 {
        (-self.c3).max(0.0)
    }

    pub fn interval(&self) -> SinSqInterval {
        // validated at construction; infer cannot fail here
        admissible_intervals(self.c3).expect("validated c3")[0]
    }

    /// Default initial angle: sin^2 at the interval midpoint, on the
    /// configured side.
    pub fn default_alpha0(&self) -> f64 {
        let s = self.interval().midpoint();
        alpha_from_sin_sq(s, self.alpha_side).expect("midpoint is in (0, 1)")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_low_pos() {
        let v = admissible_intervals(0.5).unwrap();
        assert_eq!(v.len(), 1);
        let i = v[0];
        assert_eq!(i.branch, Branch::LowPos);
        assert_eq!(i.lo, 0.5);
        assert_eq!(i.hi, EIGHT_NINTHS);
        assert!(!i.hi_closed);
    }

    #[test]
    fn interval_neg_closed_above() {
        let v = admissible_intervals(-0.25).unwrap();
        let i = v[0];
        assert_eq!(i.branch, Branch::Neg);
        assert_eq!(i.lo, EIGHT_NINTHS);
        assert_eq!(i.hi, 1.0);
        assert!(i.hi_closed);
        assert!(i.contains(1.0));
        assert!(!i.contains(EIGHT_NINTHS));
    }

    #[test]
    fn interval_degenerate_constants() {
        assert!(matches!(
            admissible_intervals(0.0),
            Err(Error::DegenerateConstant { .. })
        ));
        assert!(matches!(
            admissible_intervals(EIGHT_NINTHS),
            Err(Error::DegenerateConstant { .. })
        ));
    }

    #[test]
    fn interval_high_pos_at_one() {
        // c3 = 1: open at 1 because sin^2(alpha) < c3 is strict
        let v = admissible_intervals(1.0).unwrap();
        let i = v[0];
        assert_eq!(i.branch, Branch::HighPos);
        assert_eq!(i.lo, EIGHT_NINTHS);
        assert_eq!(i.hi, 1.0);
        assert!(!i.hi_closed);
        // c3 > 1: capped at 1, attained
        let v = admissible_intervals(1.5).unwrap();
        assert_eq!(v[0].hi, 1.0);
        assert!(v[0].hi_closed);
    }

    #[test]
    fn branch_consistency_enforced() {
        assert!(ModelParams::family(1.0, 0.5).is_ok());
        let mut p = ModelParams::family(1.0, 0.5).unwrap();
        p.branch = Branch::Neg;
        assert!(p.validate().is_err());
        assert!(interval_for(0.95, Branch::LowPos).is_err());
        assert!(interval_for(0.95, Branch::HighPos).is_ok());
    }

    #[test]
    fn family_rho_is_exactly_minus_three_b_sq() {
        for b in [0.5, 1.0, 2.0, 3.7] {
            let p = ModelParams::family(b, 0.5).unwrap();
            assert_eq!(p.rho + 3.0 * b * b, 0.0);
        }
    }

    #[test]
    fn alpha_side_selection() {
        let s = 0.75;
        let acute = alpha_from_sin_sq(s, AlphaSide::Acute).unwrap();
        let obtuse = alpha_from_sin_sq(s, AlphaSide::Obtuse).unwrap();
        assert!(acute < std::f64::consts::FRAC_PI_2);
        assert!(obtuse > std::f64::consts::FRAC_PI_2);
        assert!((acute.sin().powi(2) - s).abs() < 1e-15);
        assert!((obtuse.sin().powi(2) - s).abs() < 1e-15);
    }

    #[test]
    fn guard_respects_closed_end() {
        let i = admissible_intervals(-0.25).unwrap()[0];
        assert!(i.contains_guarded(1.0, 1e-6));
        assert!(!i.contains_guarded(EIGHT_NINTHS + 1e-9, 1e-6));
        let j = admissible_intervals(0.5).unwrap()[0];
        assert!(!j.contains_guarded(EIGHT_NINTHS - 1e-9, 1e-6));
        assert!(j.contains_guarded(0.75, 1e-6));
    }
}
