//! Adaptive Dormand–Prince 5(4) integrator for autonomous scalar ODEs
//! `y' = F(y)`, with step rejection and blow-up detection.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Local error control: a step is accepted when
/// `|y5 - y4| <= abs + rel * max(|y|, |y_new|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance<S> {
    pub abs: S,
    pub rel: S,
}

impl<S: Real> Tolerance<S> {
    pub fn uniform(tol: S) -> Self {
        Tolerance { abs: tol, rel: tol }
    }
}

/// Magnitude past which the solution is declared to have blown up.
const BLOW_UP: f64 = 1e150;

#[derive(Clone, Copy, Debug)]
struct Stepper<S> {
    t: S,
    y: S,
    h: S,
    k1: S,
}

/// Integrate from `y0` at time 0 and report the solution at each of the
/// nondecreasing `times`.
pub fn integrate_at<S: Real>(
    rhs: impl Fn(S) -> S,
    y0: S,
    times: &[S],
    tol: Tolerance<S>,
) -> Result<Vec<S>> {
    let Some(&t_max) = times.last() else {
        return Ok(Vec::new());
    };
    let mut st = Stepper {
        t: S::zero(),
        y: y0,
        h: initial_step(t_max),
        k1: rhs(y0),
    };
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        if target < st.t {
            return Err(Error::Domain("times must be nondecreasing and >= 0".into()));
        }
        advance(&rhs, &mut st, target, tol)?;
        out.push(st.y);
    }
    Ok(out)
}

/// Solution of `y' = F(y)`, `y(0) = y0`, at time `t`.
pub fn integrate<S: Real>(rhs: impl Fn(S) -> S, y0: S, t: S, tol: Tolerance<S>) -> Result<S> {
    integrate_at(rhs, y0, &[t], tol).map(|v| v[0])
}

fn initial_step<S: Real>(t_max: S) -> S {
    let h = t_max * S::lit(1e-2);
    if h > S::zero() {
        h.min(S::lit(1e-2))
    } else {
        S::lit(1e-3)
    }
}

fn advance<S: Real>(
    rhs: &impl Fn(S) -> S,
    st: &mut Stepper<S>,
    target: S,
    tol: Tolerance<S>,
) -> Result<()> {
    let c = |x: f64| S::lit(x);
    let min_step = S::epsilon() * S::lit(16.0);
    while st.t < target {
        let remaining = target - st.t;
        let last = st.h >= remaining;
        let h = if last { remaining } else { st.h };

        let y = st.y;
        let k1 = st.k1;
        let k2 = rhs(y + h * c(1.0 / 5.0) * k1);
        let k3 = rhs(y + h * (c(3.0 / 40.0) * k1 + c(9.0 / 40.0) * k2));
        let k4 = rhs(y + h * (c(44.0 / 45.0) * k1 - c(56.0 / 15.0) * k2 + c(32.0 / 9.0) * k3));
        let k5 = rhs(
            y + h
                * (c(19372.0 / 6561.0) * k1 - c(25360.0 / 2187.0) * k2
                    + c(64448.0 / 6561.0) * k3
                    - c(212.0 / 729.0) * k4),
        );
        let k6 = rhs(
            y + h
                * (c(9017.0 / 3168.0) * k1 - c(355.0 / 33.0) * k2 + c(46732.0 / 5247.0) * k3
                    + c(49.0 / 176.0) * k4
                    - c(5103.0 / 18656.0) * k5),
        );
        let y5 = y + h
            * (c(35.0 / 384.0) * k1 + c(500.0 / 1113.0) * k3 + c(125.0 / 192.0) * k4
                - c(2187.0 / 6784.0) * k5
                + c(11.0 / 84.0) * k6);
        let k7 = rhs(y5);
        let y4 = y + h
            * (c(5179.0 / 57600.0) * k1 + c(7571.0 / 16695.0) * k3 + c(393.0 / 640.0) * k4
                - c(92097.0 / 339200.0) * k5
                + c(187.0 / 2100.0) * k6
                + c(1.0 / 40.0) * k7);

        let scale = tol.abs + tol.rel * y.abs().max(y5.abs());
        let err = (y5 - y4).abs() / scale;

        if !y5.is_finite() || !err.is_finite() {
            st.h = h * c(0.25);
            if st.h <= min_step * (S::one() + st.t) {
                return Err(Error::BlowUp {
                    time: st.t.to_f64_lossy(),
                });
            }
            continue;
        }

        if err <= S::one() {
            st.t = if last { target } else { st.t + h };
            st.y = y5;
            st.k1 = k7;
            if st.y.abs() > c(BLOW_UP) {
                return Err(Error::BlowUp {
                    time: st.t.to_f64_lossy(),
                });
            }
            let grow = if err.is_zero() {
                c(5.0)
            } else {
                (c(0.9) * err.powf(c(-0.2))).min(c(5.0)).max(c(0.2))
            };
            // Keep the step proposal when the last step was clipped to hit
            // the target exactly.
            if !last || h >= st.h {
                st.h = h * grow;
            }
        } else {
            let shrink = (c(0.9) * err.powf(c(-0.25))).max(c(0.1));
            st.h = h * shrink;
            if st.h <= min_step * (S::one() + st.t.abs()) {
                if y.abs() > c(1e100) {
                    return Err(Error::BlowUp {
                        time: st.t.to_f64_lossy(),
                    });
                }
                return Err(Error::StepUnderflow {
                    time: st.t.to_f64_lossy(),
                });
            }
        }
    }
    Ok(())
}
