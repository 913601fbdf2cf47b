//! Integration of the adapted-coordinate system.
//!
//! In the coordinate w = u + iv adapted to the family, the Kaehler angle and
//! the integrating factor g satisfy the autonomous system
//!
//!     d(alpha)/du = 2 g,      dg/du = 2 F(alpha) g^2,
//!
//! with g(0) = 1 fixing the gauge. The metric coefficient mu is recovered
//! algebraically as g/(a + b) at every node, so the closed-form relation for
//! d(log mu)/d(alpha) stays available as an independent verification target.
//!
//! Marching uses fixed-step classical fourth-order Runge-Kutta on a uniform
//! u-lattice, symmetric about u = 0. Near the interval endpoints the
//! dynamics degenerate; each lattice step is then computed in halved
//! substeps, and the march stops before any state enters the endpoint guard.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formulas::{a_of_alpha, f_of_alpha, mu_of};
use crate::params::{ModelParams, DEFAULT_DELTA};

/// Why the march ended on a given side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Reached the requested span.
    SpanExhausted,
    /// sin^2(alpha) came within delta of an interval endpoint.
    EndpointProximity,
    /// Substep halving fell below the minimum step.
    StepUnderflow,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::SpanExhausted => "span_exhausted",
            StopReason::EndpointProximity => "endpoint_proximity",
            StopReason::StepUnderflow => "step_underflow",
        }
    }
}

/// Tuning knobs for the march; `delta` is the endpoint guard in sin^2 units.
#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub u_span: f64,
    pub h: f64,
    pub delta: f64,
    /// A lattice step may be split into at most 2^max_halvings substeps.
    pub max_halvings: u32,
}

impl IntegrateOptions {
    pub fn new(u_span: f64, h: f64) -> IntegrateOptions {
        IntegrateOptions {
            u_span,
            h,
            delta: DEFAULT_DELTA,
            max_halvings: 12,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> IntegrateOptions {
        self.delta = delta;
        self
    }
}

/// The integrated trajectory: alpha, g and mu sampled on a uniform u-lattice
/// symmetric about u = 0.
#[derive(Debug, Clone)]
pub struct AlphaProfile {
    pub params: ModelParams,
    pub u_nodes: Vec<f64>,
    pub alpha: Vec<f64>,
    pub g: Vec<f64>,
    pub mu: Vec<Complex64>,
    /// Combined reason; underflow dominates proximity dominates exhaustion.
    pub stop_reason: StopReason,
    pub stop_forward: StopReason,
    pub stop_backward: StopReason,
    pub h: f64,
    pub delta: f64,
    /// Index of the u = 0 node.
    pub origin: usize,
}

impl AlphaProfile {
    pub fn len(&self) -> usize {
        self.u_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u_nodes.is_empty()
    }
}

#[derive(Clone, Copy)]
struct State {
    alpha: f64,
    g: f64,
}

fn derivative(params: &ModelParams, st: State) -> Result<(f64, f64)> {
    let a = a_of_alpha(st.alpha, params)?;
    let f = f_of_alpha(st.alpha, a, params.b, params.rho)?;
    Ok((2.0 * st.g, 2.0 * f * st.g * st.g))
}

fn rk4_step(params: &ModelParams, st: State, h: f64) -> Result<State> {
    let (k1a, k1g) = derivative(params, st)?;
    let mid1 = State {
        alpha: st.alpha + 0.5 * h * k1a,
        g: st.g + 0.5 * h * k1g,
    };
    let (k2a, k2g) = derivative(params, mid1)?;
    let mid2 = State {
        alpha: st.alpha + 0.5 * h * k2a,
        g: st.g + 0.5 * h * k2g,
    };
    let (k3a, k3g) = derivative(params, mid2)?;
    let end = State {
        alpha: st.alpha + h * k3a,
        g: st.g + h * k3g,
    };
    let (k4a, k4g) = derivative(params, end)?;
    Ok(State {
        alpha: st.alpha + h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        g: st.g + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
    })
}

enum StepOutcome {
    Accepted(State),
    Stopped(StopReason),
}

/// A state is acceptable when it is finite, keeps g > 0, advances alpha in
/// the march direction, and stays outside the endpoint guard.
fn acceptable(params: &ModelParams, prev: State, next: State, dir: f64, delta: f64) -> bool {
    if !(next.alpha.is_finite() && next.g.is_finite()) || next.g <= 0.0 {
        return false;
    }
    if (next.alpha - prev.alpha) * dir <= 0.0 {
        return false;
    }
    let s = next.alpha.sin().powi(2);
    params.interval().contains_guarded(s, delta)
}

/// Advance one lattice step of size dir*h, refining into substeps near the
/// endpoints. Refinement doubles the substep count until every intermediate
/// state is acceptable or the substep underflows.
fn lattice_step(
    params: &ModelParams,
    st: State,
    dir: f64,
    h: f64,
    delta: f64,
    max_halvings: u32,
) -> Result<StepOutcome> {
    let mut n_sub: u64 = 1;
    let mut saw_guard_violation = false;
    for halving in 0..=max_halvings {
        let sub_h = dir * h / n_sub as f64;
        let mut cur = st;
        let mut ok = true;
        for _ in 0..n_sub {
            match rk4_step(params, cur, sub_h) {
                Ok(next) => {
                    if !acceptable(params, cur, next, dir, delta) {
                        if next.alpha.is_finite() && next.g.is_finite() {
                            saw_guard_violation = true;
                        }
                        ok = false;
                        break;
                    }
                    cur = next;
                }
                Err(Error::OutsideAdmissibleRegion { .. })
                | Err(Error::SingularDenominator)
                | Err(Error::SingularAngle) => {
                    // a stage left the admissible region: endpoint behavior
                    saw_guard_violation = true;
                    ok = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if ok {
            return Ok(StepOutcome::Accepted(cur));
        }
        if halving == max_halvings {
            break;
        }
        n_sub *= 2;
    }
    if saw_guard_violation {
        Ok(StepOutcome::Stopped(StopReason::EndpointProximity))
    } else {
        Ok(StepOutcome::Stopped(StopReason::StepUnderflow))
    }
}

fn march(
    params: &ModelParams,
    start: State,
    n_steps: usize,
    dir: f64,
    opts: &IntegrateOptions,
) -> Result<(Vec<State>, StopReason)> {
    let mut nodes = Vec::with_capacity(n_steps);
    let mut cur = start;
    for _ in 0..n_steps {
        match lattice_step(params, cur, dir, opts.h, opts.delta, opts.max_halvings)? {
            StepOutcome::Accepted(next) => {
                if !(next.alpha.is_finite() && next.g.is_finite()) {
                    return Err(Error::NonFiniteState {
                        u: dir * opts.h * (nodes.len() + 1) as f64,
                    });
                }
                nodes.push(next);
                cur = next;
            }
            StepOutcome::Stopped(reason) => return Ok((nodes, reason)),
        }
    }
    Ok((nodes, StopReason::SpanExhausted))
}

fn combine(a: StopReason, b: StopReason) -> StopReason {
    use StopReason::*;
    match (a, b) {
        (StepUnderflow, _) | (_, StepUnderflow) => StepUnderflow,
        (EndpointProximity, _) | (_, EndpointProximity) => EndpointProximity,
        _ => SpanExhausted,
    }
}

/// Integrate the profile over [-u_span, u_span] from (alpha0, g = 1) with
/// the default endpoint guard.
pub fn integrate_profile(
    params: &ModelParams,
    alpha0: f64,
    u_span: f64,
    h: f64,
) -> Result<AlphaProfile> {
    integrate_profile_with(params, alpha0, IntegrateOptions::new(u_span, h))
}

/// Integrate with explicit options. The start must be strictly inside the
/// branch interval (guard applied); g at u = 0 is 1 by gauge choice.
pub fn integrate_profile_with(
    params: &ModelParams,
    alpha0: f64,
    opts: IntegrateOptions,
) -> Result<AlphaProfile> {
    params.validate()?;
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(Error::Usage(format!("step h = {} must be positive", opts.h)));
    }
    if !(opts.u_span >= 0.0 && opts.u_span.is_finite()) {
        return Err(Error::Usage(format!(
            "u_span = {} must be nonnegative",
            opts.u_span
        )));
    }
    let s0 = alpha0.sin().powi(2);
    if !params.interval().contains_guarded(s0, opts.delta) {
        return Err(Error::InadmissibleStart { sin_sq: s0 });
    }
    // the first derivative evaluation also validates the start
    let start = State { alpha: alpha0, g: 1.0 };
    derivative(params, start).map_err(|_| Error::InadmissibleStart { sin_sq: s0 })?;

    let n_steps = (opts.u_span / opts.h).round() as usize;
    let (fwd, stop_forward) = march(params, start, n_steps, 1.0, &opts)?;
    let (bwd, stop_backward) = march(params, start, n_steps, -1.0, &opts)?;

    let n = bwd.len() + 1 + fwd.len();
    let origin = bwd.len();
    let mut u_nodes = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for (i, st) in bwd.iter().rev().chain(std::iter::once(&start)).chain(fwd.iter()).enumerate() {
        u_nodes.push((i as f64 - origin as f64) * opts.h);
        alpha.push(st.alpha);
        g.push(st.g);
    }
    let mut mu = Vec::with_capacity(n);
    for i in 0..n {
        let a = a_of_alpha(alpha[i], params)?;
        mu.push(mu_of(g[i], a, params.b)?);
    }
    Ok(AlphaProfile {
        params: *params,
        u_nodes,
        alpha,
        g,
        mu,
        stop_reason: combine(stop_forward, stop_backward),
        stop_forward,
        stop_backward,
        h: opts.h,
        delta: opts.delta,
        origin,
    })
}

/// One-directional march from an explicit (alpha, g) state; used by the
/// reverse-integration checks.
pub fn integrate_from(
    params: &ModelParams,
    alpha0: f64,
    g0: f64,
    signed_span: f64,
    h: f64,
    delta: f64,
) -> Result<(Vec<f64>, Vec<f64>, StopReason)> {
    params.validate()?;
    let dir = if signed_span < 0.0 { -1.0 } else { 1.0 };
    let n_steps = (signed_span.abs() / h).round() as usize;
    let opts = IntegrateOptions::new(signed_span.abs(), h).with_delta(delta);
    let start = State { alpha: alpha0, g: g0 };
    let (nodes, reason) = march(params, start, n_steps, dir, &opts)?;
    let mut alphas = vec![alpha0];
    let mut gs = vec![g0];
    alphas.extend(nodes.iter().map(|s| s.alpha));
    gs.extend(nodes.iter().map(|s| s.g));
    Ok((alphas, gs, reason))
}
