//! The initial-value problem `x' = (a x + b s + c) / x` on `Omega`, integrated
//! in both directions from a seed together with the height `g' = sqrt(1 - x'^2)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RicciError};
use crate::geometry::ProfileCurve;
use crate::numeric::ode::{dopri5, OdeOptions, OdeStop, StepCheck};
use crate::params::{in_omega, RicciParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvpOptions {
    /// Stop once `(a x + b s + c)^2 >= (1 - eps) x^2` or `x <= eps`.
    pub eps_boundary: f64,
    /// Integrate over `|s| <= max(span, |s0|)`.
    pub span: f64,
    /// Local error per unit step.
    pub tol: f64,
    /// Defaults to `span / 100`.
    pub h_max: Option<f64>,
    /// Per direction.
    pub max_steps: usize,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            eps_boundary: 1e-8,
            span: 10.0,
            tol: 1e-10,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

/// Why integration ended in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IvpStop {
    Span,
    /// `|x'|` reached `sqrt(1 - eps)`.
    Tangent,
    /// `x` dropped to `eps`.
    Collapse,
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IvpSolution {
    pub curve: ProfileCurve,
    pub backward: IvpStop,
    pub forward: IvpStop,
}

/// [`solve_ivp_with`] with default options apart from `eps_boundary`.
pub fn solve_ivp(params: &RicciParams, s0: f64, x0: f64, eps_boundary: f64) -> Result<ProfileCurve> {
    let opts = IvpOptions {
        eps_boundary,
        ..IvpOptions::default()
    };
    Ok(solve_ivp_with(params, s0, x0, &opts)?.curve)
}

pub fn solve_ivp_with(params: &RicciParams, s0: f64, x0: f64, opts: &IvpOptions) -> Result<IvpSolution> {
    if !in_omega(params, s0, x0) {
        return Err(RicciError::NotInOmega { s: s0, x: x0 });
    }
    let p = *params;
    let eps = opts.eps_boundary;
    let limit = opts.span.max(s0.abs());
    let ode = OdeOptions {
        tol: opts.tol,
        h_init: 1e-3,
        h_max: opts.h_max.unwrap_or(opts.span / 100.0),
        h_min: 1e-14,
        max_steps: opts.max_steps,
    };
    let rhs = move |s: f64, y: &[f64; 2]| {
        let fp = p.rhs(s, y[0]) / y[0];
        [fp, (1.0 - fp * fp).max(0.0).sqrt()]
    };
    let run = |s_end: f64| {
        let mut event = IvpStop::Span;
        let traj = dopri5(rhs, s0, [x0, 0.0], s_end, ode, |s, y| {
            let x = y[0];
            if !x.is_finite() || x <= 0.0 {
                return StepCheck::Overshoot;
            }
            let r = p.rhs(s, x);
            if r * r >= x * x {
                return StepCheck::Overshoot;
            }
            if x <= eps {
                event = IvpStop::Collapse;
                return StepCheck::Stop;
            }
            if r * r >= (1.0 - eps) * x * x {
                event = IvpStop::Tangent;
                return StepCheck::Stop;
            }
            StepCheck::Continue
        });
        let stop = match traj.stop {
            OdeStop::Event => event,
            OdeStop::EndReached => IvpStop::Span,
            OdeStop::StepUnderflow => IvpStop::StepUnderflow,
            OdeStop::MaxSteps => IvpStop::MaxSteps,
        };
        (traj, stop)
    };
    let (back, backward) = run(-limit);
    let (fwd, forward) = run(limit);
    let mut pts: Vec<(f64, f64, f64)> = back
        .s
        .iter()
        .zip(&back.y)
        .rev()
        .map(|(&s, y)| (s, y[0], y[1]))
        .collect();
    pts.extend(fwd.s.iter().zip(&fwd.y).skip(1).map(|(&s, y)| (s, y[0], y[1])));
    // only (a, b, c) enter the ODE; d and the branch follow from the seed
    let fitted = super::calibrate(params, s0, x0).unwrap_or(*params);
    Ok(IvpSolution {
        curve: ProfileCurve::from_points(&fitted, s0, pts),
        backward,
        forward,
    })
}
