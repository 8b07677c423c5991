//! Dormand–Prince 5(4) integrator with proportional-integral step control.
//!
//! The error norm is per unit step: a step of length `h` is accepted when the
//! embedded error estimate is at most `tol * |h| * max(1, |y|)` in every
//! component.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Local error allowed per unit of the independent variable.
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            tol: 1e-10,
            h_init: 1e-3,
            h_max: 0.1,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

/// Verdict of the caller on a step that passed error control.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepCheck {
    Continue,
    /// Accept the step and stop integrating.
    Stop,
    /// Reject the step and retry with half the step size.
    Overshoot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeStop {
    Event,
    EndReached,
    StepUnderflow,
    MaxSteps,
}

#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub s: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub stop: OdeStop,
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// Integrates `y' = rhs(s, y)` from `s0` towards `s_end`, recording every
/// accepted step (including the initial point).
pub fn dopri5<const N: usize, F, C>(
    rhs: F,
    s0: f64,
    y0: [f64; N],
    s_end: f64,
    opts: OdeOptions,
    mut check: C,
) -> Trajectory<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &[f64; N]) -> StepCheck,
{
    let dir = if s_end >= s0 { 1.0 } else { -1.0 };
    let mut traj = Trajectory {
        s: vec![s0],
        y: vec![y0],
        stop: OdeStop::EndReached,
        rejected: 0,
    };
    let mut s = s0;
    let mut y = y0;
    let mut k1 = rhs(s, &y);
    let mut h = opts.h_init.min(opts.h_max).min((s_end - s0).abs());
    let mut err_prev: f64 = 1.0;
    let mut steps = 0usize;

    while (s_end - s) * dir > 0.0 {
        if steps >= opts.max_steps {
            traj.stop = OdeStop::MaxSteps;
            return traj;
        }
        if h < opts.h_min * s.abs().max(1.0) {
            traj.stop = OdeStop::StepUnderflow;
            return traj;
        }
        let mut last = false;
        if h >= (s_end - s).abs() {
            h = (s_end - s).abs();
            last = true;
        }
        let hs = dir * h;
        let k2 = rhs(s + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = rhs(s + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(
            s + C4 * hs,
            &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
        );
        let k5 = rhs(
            s + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = rhs(
            s + hs,
            &axpy(
                &y,
                hs,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            hs,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        let s_new = if last { s_end } else { s + hs };
        let k7 = rhs(s_new, &y_new);

        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = hs
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = opts.tol * h * y[i].abs().max(y_new[i].abs()).max(1.0);
            err = err.max(e.abs() / scale);
        }
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            traj.rejected += 1;
            h *= 0.2;
            continue;
        }
        if err > 1.0 {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.25)).clamp(0.2, 1.0);
            continue;
        }
        match check(s_new, &y_new) {
            StepCheck::Overshoot => {
                h *= 0.5;
                continue;
            }
            verdict => {
                steps += 1;
                s = s_new;
                y = y_new;
                k1 = k7;
                traj.s.push(s);
                traj.y.push(y);
                if verdict == StepCheck::Stop {
                    traj.stop = OdeStop::Event;
                    return traj;
                }
            }
        }
        let err_c = err.max(1e-10);
        let fac = 0.9 * err_c.powf(-0.175) * err_prev.powf(0.1);
        h = (h * fac.clamp(0.2, 5.0)).min(opts.h_max);
        err_prev = err_c;
    }
    traj
}
