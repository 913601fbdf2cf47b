//! Closed-form pointwise evaluators: the second-fundamental-form data
//! a(alpha), c(alpha), the integrating-factor derivative F(alpha), the metric
//! coefficient mu, Gaussian curvature by two independent routes, and the
//! Hopf-differential coefficients.
//!
//! Everything here is pure and stateless; all functions take alpha in
//! (0, pi) explicitly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// Denominators with modulus below this are treated as singular.
const SINGULAR_ABS: f64 = 1e-300;

fn cot(alpha: f64) -> Result<f64> {
    let s = alpha.sin();
    if s == 0.0 || !alpha.is_finite() {
        return Err(Error::SingularAngle);
    }
    Ok(alpha.cos() / s)
}

fn sin_sq(alpha: f64) -> f64 {
    let s = alpha.sin();
    s * s
}

/// y^2 = (Im tau)^2 as a function of s = sin^2(alpha):
/// 8 c3 / ((8 - 9 s)(s - c3)). Positive strictly inside the admissible
/// interval, singular at its endpoints.
pub fn y_squared(s: f64, c3: f64) -> Result<f64> {
    let y2 = 8.0 * c3 / ((8.0 - 9.0 * s) * (-c3 + s));
    if !y2.is_finite() || y2 <= 0.0 {
        return Err(Error::OutsideAdmissibleRegion { sin_sq: s });
    }
    Ok(y2)
}

/// The closed-form a(alpha) of the family. Real part is a rational function
/// of sin^2(alpha); the imaginary part carries the branch square root, with
/// its sign chosen by `params.im_sign`.
pub fn a_of_alpha(alpha: f64, params: &ModelParams) -> Result<Complex64> {
    let s = sin_sq(alpha);
    if !params.interval().contains(s) {
        return Err(Error::OutsideAdmissibleRegion { sin_sq: s });
    }
    let b = params.b;
    let c3 = params.c3;
    let re = b / (8.0 - 9.0 * c3) * (-16.0 * c3 + (8.0 + 27.0 * c3) * s - 18.0 * s * s) / s;
    let im_mag = if c3 > 0.0 {
        b * c3.sqrt() / (2.0_f64.sqrt() * (8.0 - 9.0 * c3))
            * (8.0 - 9.0 * s)
            * ((8.0 - 9.0 * s) * (-c3 + s)).sqrt()
            / s
    } else {
        let c4 = -c3;
        b * c4.sqrt() / (2.0_f64.sqrt() * (8.0 + 9.0 * c4))
            * (9.0 * s - 8.0)
            * ((9.0 * s - 8.0) * (c4 + s)).sqrt()
            / s
    };
    Ok(Complex64::new(re, params.im_sign.factor() * im_mag))
}

/// tau = (a - b)/(a + b).
pub fn tau_of_a(a: Complex64, b: f64) -> Result<Complex64> {
    let den = a + b;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    Ok((a - b) / den)
}

/// Inverse of `tau_of_a`: a = b (1 + tau)/(1 - tau).
pub fn a_of_tau(tau: Complex64, b: f64) -> Result<Complex64> {
    let den = Complex64::new(1.0, 0.0) - tau;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    Ok(b * (Complex64::new(1.0, 0.0) + tau) / den)
}

/// F(alpha) = (|a - b|^2 + (3 rho / 2) sin^2(alpha)) / |a + b|^2 * cot(alpha).
/// Numerator and denominator are real by conjugate symmetry, so this is
/// computed in real arithmetic.
pub fn f_of_alpha(alpha: f64, a: Complex64, b: f64, rho: f64) -> Result<f64> {
    let ct = cot(alpha)?;
    let den = (a + b).norm_sqr();
    if den < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    let num = (a - b).norm_sqr() + 1.5 * rho * sin_sq(alpha);
    Ok(num / den * ct)
}

/// Closed-form derivative of a along alpha:
/// cot(alpha)/(conj(a) + b) * (-2 b a + 2 |a|^2 + (3 rho / 2) sin^2(alpha)).
pub fn da_dalpha(alpha: f64, a: Complex64, b: f64, rho: f64) -> Result<Complex64> {
    let ct = cot(alpha)?;
    let den = a.conj() + b;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    let num = -2.0 * b * a + 2.0 * a.norm_sqr() + 1.5 * rho * sin_sq(alpha);
    Ok(ct / den * num)
}

/// Closed-form derivative of |a|^2 along alpha:
/// cot(alpha)/|a + b|^2 * (|a|^2 - b^2)(4 |a|^2 - (4/3) rho + 3 rho sin^2(alpha)).
pub fn d_abs_a_sq_dalpha(alpha: f64, a: Complex64, b: f64, rho: f64) -> Result<f64> {
    let ct = cot(alpha)?;
    let den = (a + b).norm_sqr();
    if den < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    let aa = a.norm_sqr();
    Ok(ct / den * (aa - b * b) * (4.0 * aa - 4.0 / 3.0 * rho + 3.0 * rho * sin_sq(alpha)))
}

/// d(log mu)/dalpha = -(conj(a) - b)/(conj(a) + b) * cot(alpha)
/// = -conj(tau) * cot(alpha).
pub fn dlogmu_dalpha(alpha: f64, a: Complex64, b: f64) -> Result<Complex64> {
    let ct = cot(alpha)?;
    let den = a.conj() + b;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    Ok(-(a.conj() - b) / den * ct)
}

/// mu = g / (a + b), with g the accumulated integrating factor.
pub fn mu_of(g: f64, a: Complex64, b: f64) -> Result<Complex64> {
    let den = a + b;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    Ok(g / den)
}

/// Squared modulus of c from the normal-curvature relation:
/// |c|^2 = |a|^2 + (rho/2)(-2 + 3 sin^2(alpha)).
pub fn c_radicand(alpha: f64, a: Complex64, rho: f64) -> f64 {
    a.norm_sqr() + 0.5 * rho * (-2.0 + 3.0 * sin_sq(alpha))
}

/// Nonnegative square root of the radicand; errors when |c|^2 < 0, i.e. no
/// surface with these data exists.
pub fn c_modulus(alpha: f64, a: Complex64, rho: f64) -> Result<f64> {
    let radicand = c_radicand(alpha, a, rho);
    if radicand < 0.0 {
        return Err(Error::NegativeRadicand { radicand });
    }
    Ok(radicand.sqrt())
}

/// c = |c| * (conj(a) + b)/(a + b) * exp(-i k1 v), built as modulus times
/// phase so |c| equals `c_modulus` to the last ulp. The phase factor
/// (conj(a) + b)/(a + b) equals exp(-2 i theta) with theta = arg(a + b).
pub fn c_of(alpha: f64, v: f64, a: Complex64, b: f64, rho: f64, k1: f64) -> Result<Complex64> {
    let modulus = c_modulus(alpha, a, rho)?;
    let den = a + b;
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    let theta = den.arg();
    let phase = -2.0 * theta - k1 * v;
    Ok(Complex64::from_polar(modulus, phase))
}

/// Kaehler-angle phase constant diagnostic. Returns half of
/// rho mu (8|a|^2 + 9 b (a + conj a) sin^2 a - 8 b^2 + 18 b^2 sin^2 a)
/// / ((conj a + b)(|a|^2 + rho/2(-2 + 3 sin^2 a))) * cot(alpha),
/// i.e. the phase constant itself. Vanishes identically on the family.
pub fn k1_expression(alpha: f64, a: Complex64, mu: Complex64, b: f64, rho: f64) -> Result<Complex64> {
    let ct = cot(alpha)?;
    let den = (a.conj() + b) * c_radicand(alpha, a, rho);
    if den.norm() < SINGULAR_ABS {
        return Err(Error::SingularDenominator);
    }
    let num = identity_31_residual(alpha, a, b);
    Ok(0.5 * rho * mu * num / den * ct)
}

/// 8|a|^2 + 9 b (a + conj a) sin^2(alpha) - 8 b^2 + 18 b^2 sin^2(alpha).
/// Zero on the family; the numerator of `k1_expression`.
pub fn identity_31_residual(alpha: f64, a: Complex64, b: f64) -> f64 {
    let s = sin_sq(alpha);
    8.0 * a.norm_sqr() + 9.0 * b * (2.0 * a.re) * s - 8.0 * b * b + 18.0 * b * b * s
}

/// Gaussian curvature from the ambient-curvature relation:
/// K = -4(|a|^2 - b^2) + 6 rho cos^2(alpha).
///
/// cos^2 is computed as 1 - sin^2 so the totally real case alpha = pi/2
/// (where sin is exactly 1) yields an exact zero for a = -b.
pub fn gauss_curvature_from_a(alpha: f64, a: Complex64, b: f64, rho: f64) -> f64 {
    let cos_sq = 1.0 - sin_sq(alpha);
    -4.0 * (a.norm_sqr() - b * b) + 6.0 * rho * cos_sq
}

/// Gaussian curvature of the family in closed form:
/// K = -2 b^2 / (8 - 9 c3) * ((9 sin^2(alpha) - 8)^2 + (8 - 9 c3)).
/// Independent of the route through a(alpha).
pub fn gauss_curvature_closed(alpha: f64, b: f64, c3: f64) -> Result<f64> {
    let e = 8.0 - 9.0 * c3;
    if e == 0.0 {
        return Err(Error::DegenerateConstant { c3 });
    }
    let s = sin_sq(alpha);
    let t = 9.0 * s - 8.0;
    Ok(-2.0 * b * b / e * (t * t + e))
}

/// Curvature values of the real-a regime: the pair
/// (-2 b^2, -2 (2 (a + b)^2 + b^2)); the second is always <= the first.
pub fn real_a_curvatures(a: f64, b: f64) -> (f64, f64) {
    let constant_alpha = -2.0 * b * b;
    let t = a + b;
    let varying_alpha = -2.0 * (2.0 * t * t + b * b);
    (constant_alpha, varying_alpha)
}

/// Coefficients of the two holomorphic quadratic differentials and derived
/// constants. `c1`, `c2` are the per-point values of the two conserved
/// coefficients; `gamma` is their ratio normalized by b.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopfCoefficients {
    /// mu^2 (8 b a - 3 rho sin^2 alpha)
    pub phi1_coeff: Complex64,
    /// mu^2 conj(c)
    pub phi2_coeff: Complex64,
    /// 8 b (conj(c) + a) - 3 rho sin^2 alpha, before the mu^2 factor
    pub q_coeff: Complex64,
    /// 8 b (conj(c) - a) + 3 rho sin^2 alpha, before the mu^2 factor
    pub qprime_coeff: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
    /// (8 b a - 3 rho sin^2 alpha) / (b conj(c))
    pub gamma: Complex64,
    pub k1: f64,
}

/// All Hopf-differential data at one point. Requires c != 0 (gamma is a
/// ratio against conj(c)).
pub fn hopf_coefficients(
    alpha: f64,
    a: Complex64,
    c: Complex64,
    mu: Complex64,
    b: f64,
    rho: f64,
) -> Result<HopfCoefficients> {
    if c.norm() == 0.0 {
        return Err(Error::ZeroC);
    }
    let s = sin_sq(alpha);
    let cbar = c.conj();
    let mu2 = mu * mu;
    let base = 8.0 * b * a - 3.0 * rho * s;
    let phi1_coeff = mu2 * base;
    let phi2_coeff = mu2 * cbar;
    let q_coeff = 8.0 * b * (cbar + a) - 3.0 * rho * s;
    let qprime_coeff = 8.0 * b * (cbar - a) + 3.0 * rho * s;
    let gamma = base / (b * cbar);
    let k1 = match k1_expression(alpha, a, mu, b, rho) {
        Ok(z) => z.re,
        Err(_) => f64::NAN,
    };
    Ok(HopfCoefficients {
        phi1_coeff,
        phi2_coeff,
        q_coeff,
        qprime_coeff,
        c1: phi1_coeff,
        c2: phi2_coeff,
        gamma,
        k1,
    })
}

/// All pointwise quantities of the family at one (alpha, g, v) state.
#[derive(Debug, Clone, Copy)]
pub struct SecondFundamentalPoint {
    pub alpha: f64,
    pub a: Complex64,
    pub tau: Complex64,
    /// Im tau
    pub y: f64,
    pub c: Complex64,
    pub c_modulus: f64,
    /// arg(a + b)
    pub theta: f64,
    /// arg(c)
    pub nu: f64,
    pub mu: Complex64,
    /// integrating factor exp of the accumulated F integral
    pub g: f64,
}

impl SecondFundamentalPoint {
    /// Evaluate the family at `alpha` with integrating factor `g`, at
    /// v-coordinate `v` (immaterial here since the phase constant is zero).
    pub fn at(params: &ModelParams, alpha: f64, g: f64, v: f64) -> Result<SecondFundamentalPoint> {
        let a = a_of_alpha(alpha, params)?;
        let tau = tau_of_a(a, params.b)?;
        let mu = mu_of(g, a, params.b)?;
        let c_mod = c_modulus(alpha, a, params.rho)?;
        let c = c_of(alpha, v, a, params.b, params.rho, 0.0)?;
        let theta = (a + params.b).arg();
        Ok(SecondFundamentalPoint {
            alpha,
            a,
            tau,
            y: tau.im,
            c,
            c_modulus: c_mod,
            theta,
            nu: c.arg(),
            mu,
            g,
        })
    }
}
