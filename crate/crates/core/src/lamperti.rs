//! The Lamperti time change `L(f) = f ∘ κ` and its inverse.
//!
//! `θ_t = ∫_0^t f(s) ds` and `κ` is its right-inverse. On event paths both are
//! piecewise linear with exactly known knots, so `L` only rescales holding
//! times (`h ↦ v·h` at value `v`) and `L⁻¹` undoes it (`h ↦ h/v`). On grid
//! paths the functionals are accumulated by the trapezoid rule and inverted
//! piecewise linearly; the output keeps the input step.

use crate::error::{Error, Result};
use crate::paths::{CadlagPath, ExtReal, Horizon, PathKind, Terminal};
use crate::scalar::Scalar;

/// Values at or below this floor are treated as `0` when dividing by a grid
/// path (`κ̃` accumulates `1/g`).
pub const VALUE_FLOOR: f64 = 1e-300;

/// Behaviour of a [`TimeChange`] after its last knot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Tail<S> {
    /// Continues linearly with the given slope (`0` means constant).
    Slope(S),
    /// Jumps to `∞` immediately after the last knot.
    Saturate,
    /// Unknown past the last knot (the source path was truncated there).
    Undefined,
}

/// Nondecreasing piecewise-linear function on `[0, ∞)` with values in `[0, ∞]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChange<S> {
    knots: Vec<S>,
    levels: Vec<S>,
    tail: Tail<S>,
}

impl<S: Scalar> TimeChange<S> {
    pub fn knots(&self) -> &[S] {
        &self.knots
    }

    pub fn levels(&self) -> &[S] {
        &self.levels
    }

    pub fn tail(&self) -> Tail<S> {
        self.tail
    }

    /// Value at the last knot.
    pub fn last_level(&self) -> S {
        *self.levels.last().expect("time change has a knot at 0")
    }

    /// Limit at `∞`.
    pub fn total(&self) -> ExtReal<S> {
        match self.tail {
            Tail::Slope(s) if s.is_zero() => ExtReal::Finite(self.last_level()),
            Tail::Slope(_) | Tail::Saturate => ExtReal::Infinity,
            Tail::Undefined => ExtReal::Finite(self.last_level()),
        }
    }

    /// `θ_t = ∫_0^t f(s) ds`.
    pub fn additive(f: &CadlagPath<S>) -> Self {
        Self::accumulate(f, Weight::Identity)
    }

    /// `κ̃_t = ∫_0^t ds / g(s)`.
    pub fn reciprocal(g: &CadlagPath<S>) -> Self {
        Self::accumulate(g, Weight::Reciprocal)
    }

    fn accumulate(f: &CadlagPath<S>, w: Weight) -> Self {
        let times = f.times();
        let values = f.values();
        let n = values.len();
        let floor = S::from_f64(VALUE_FLOOR).unwrap_or_else(S::zero);
        let grid = matches!(f.kind(), PathKind::Grid { .. });
        // rate(v) = v for θ, 1/v for κ̃; `None` means infinite rate.
        let rate = |v: ExtReal<S>| -> Option<S> {
            match (w, v) {
                (Weight::Identity, ExtReal::Finite(x)) => Some(x),
                (Weight::Identity, ExtReal::Infinity) => None,
                (Weight::Reciprocal, ExtReal::Finite(x)) => {
                    if x <= floor {
                        None
                    } else {
                        Some(S::one() / x)
                    }
                }
                (Weight::Reciprocal, ExtReal::Infinity) => Some(S::zero()),
            }
        };

        let mut knots = vec![S::zero()];
        let mut levels = vec![S::zero()];
        let mut level = S::zero();
        for i in 0..n {
            let r = match rate(values[i]) {
                Some(r) => r,
                None => {
                    return TimeChange {
                        knots,
                        levels,
                        tail: Tail::Saturate,
                    }
                }
            };
            if i + 1 == n {
                break;
            }
            let h = times[i + 1] - times[i];
            let next = values[i + 1];
            let inc = if grid && !next.is_absorbing() {
                match rate(next) {
                    Some(r1) => (r + r1) * h / S::lit(2.0),
                    None => r * h,
                }
            } else if grid && next.is_zero() && matches!(w, Weight::Identity) {
                r * h / S::lit(2.0)
            } else {
                r * h
            };
            level = level + inc;
            knots.push(times[i + 1]);
            levels.push(level);
        }
        let last_rate = rate(f.last_value()).expect("checked in loop");
        let tail = match f.horizon() {
            Some(hz) => {
                let extra = hz.get() - f.last_time();
                if extra > S::zero() {
                    knots.push(hz.get());
                    levels.push(level + last_rate * extra);
                }
                if f.last_value().is_absorbing() {
                    Tail::Slope(S::zero())
                } else {
                    Tail::Undefined
                }
            }
            None => Tail::Slope(last_rate),
        };
        TimeChange {
            knots,
            levels,
            tail,
        }
    }

    /// Evaluate at `t ≥ 0`.
    pub fn eval(&self, t: S) -> Result<ExtReal<S>> {
        if t < S::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        let last = *self.knots.last().expect("knot at 0");
        if t <= last {
            let i = self.knots.partition_point(|k| *k <= t);
            if i == self.knots.len() {
                return Ok(ExtReal::Finite(self.last_level()));
            }
            let (k0, k1) = (self.knots[i - 1], self.knots[i]);
            let (l0, l1) = (self.levels[i - 1], self.levels[i]);
            return Ok(ExtReal::Finite(l0 + (l1 - l0) * (t - k0) / (k1 - k0)));
        }
        match self.tail {
            Tail::Slope(s) => Ok(ExtReal::Finite(self.last_level() + s * (t - last))),
            Tail::Saturate => Ok(ExtReal::Infinity),
            Tail::Undefined => Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                horizon: last.to_f64_lossy(),
            }),
        }
    }

    /// `inf{u ≥ 0 : self(u) > t}` with `inf ∅ = ∞`.
    pub fn right_inverse(&self, t: S) -> Result<ExtReal<S>> {
        if t < S::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        let i = self.levels.partition_point(|l| *l <= t);
        if i < self.levels.len() {
            let (k0, k1) = (self.knots[i - 1], self.knots[i]);
            let (l0, l1) = (self.levels[i - 1], self.levels[i]);
            return Ok(ExtReal::Finite(k0 + (t - l0) * (k1 - k0) / (l1 - l0)));
        }
        let last = *self.knots.last().expect("knot at 0");
        match self.tail {
            Tail::Slope(s) if s.is_zero() => Ok(ExtReal::Infinity),
            Tail::Slope(s) => Ok(ExtReal::Finite(last + (t - self.last_level()) / s)),
            Tail::Saturate => Ok(ExtReal::Finite(last)),
            Tail::Undefined => Err(Error::OutOfDomain {
                t: t.to_f64_lossy(),
                horizon: self.last_level().to_f64_lossy(),
            }),
        }
    }
}

#[derive(Clone, Copy)]
enum Weight {
    Identity,
    Reciprocal,
}

/// `θ_t(f) = ∫_0^t f(s) ds`.
pub fn theta<S: Scalar>(f: &CadlagPath<S>, t: S) -> Result<ExtReal<S>> {
    TimeChange::additive(f).eval(t)
}

/// `θ_∞(f)`, the total integral of the path.
pub fn theta_total<S: Scalar>(f: &CadlagPath<S>) -> Result<ExtReal<S>> {
    if f.is_truncated() {
        return Err(Error::Truncated);
    }
    Ok(TimeChange::additive(f).total())
}

/// `κ_t(f) = inf{u : θ_u > t}`.
pub fn kappa<S: Scalar>(f: &CadlagPath<S>, t: S) -> Result<ExtReal<S>> {
    TimeChange::additive(f).right_inverse(t)
}

/// `κ̃_∞(g) = ∫_0^∞ ds / g(s)`: the time at which `L⁻¹(g)` reaches the end of
/// `g`. When `g(∞) = ∞` this is the explosion time.
pub fn kappa_tilde_total<S: Scalar>(g: &CadlagPath<S>) -> Result<ExtReal<S>> {
    if g.is_truncated() {
        return Err(Error::Truncated);
    }
    Ok(TimeChange::reciprocal(g).total())
}

fn check_input<S: Scalar>(f: &CadlagPath<S>) -> Result<()> {
    f.validate().map_err(|v| Error::InvalidPath(v.to_string()))
}

/// Truncated paths whose last value is absorbing are members of `D`.
fn normalized_end<S: Scalar>(
    last: ExtReal<S>,
    terminal: Terminal,
    horizon: Option<S>,
) -> Result<(Terminal, Option<Horizon<S>>)> {
    if last.is_zero() {
        Ok((Terminal::Zero, None))
    } else if last.is_infinite() {
        Ok((Terminal::Infinity, None))
    } else {
        Ok((terminal, horizon.map(Horizon::new).transpose()?))
    }
}

/// Scale every holding time of an event path by `factor(value)`.
fn rescale_holding<S: Scalar>(
    f: &CadlagPath<S>,
    factor: impl Fn(S) -> S,
) -> Result<CadlagPath<S>> {
    let values = f.values();
    let times = f.times();
    let n = values.len();
    let mut out = Vec::with_capacity(n);
    let mut now = S::zero();
    out.push(now);
    for i in 0..n - 1 {
        let v = values[i]
            .finite()
            .ok_or_else(|| Error::InvalidPath("∞ before the last interval".into()))?;
        now = now + (times[i + 1] - times[i]) * factor(v);
        out.push(now);
    }
    let horizon = match (f.horizon(), f.last_value()) {
        (Some(h), ExtReal::Finite(v)) if !v.is_zero() => {
            Some(now + (h.get() - f.last_time()) * factor(v))
        }
        _ => None,
    };
    let (terminal, horizon) = normalized_end(f.last_value(), f.terminal(), horizon)?;
    CadlagPath::event(out, values.to_vec(), terminal, horizon)
}

/// Resample `f ∘ τ` onto a uniform grid, where `τ` is the right-inverse of
/// `tc` (the functional built from `f`).
fn resample_grid<S: Scalar>(
    f: &CadlagPath<S>,
    tc: &TimeChange<S>,
    step: S,
) -> Result<CadlagPath<S>> {
    let end = tc.last_level();
    let domain_end = f.horizon().map_or(f.last_time(), |h| h.get());
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut k = 0usize;
    loop {
        let t = S::from_usize(k).expect("grid index") * step;
        if !(t < end) {
            break;
        }
        let u = tc.right_inverse(t)?;
        let v = match u {
            ExtReal::Finite(u) => f.eval(u.min_val(domain_end))?,
            ExtReal::Infinity => f.terminal().value(),
        };
        times.push(t);
        values.push(v);
        k += 1;
    }
    let end_value = match f.horizon() {
        Some(h) => f.eval(h.get())?,
        None => f.last_value(),
    };
    times.push(if times.is_empty() { S::zero() } else { end });
    values.push(end_value);
    // Absorption must hold exactly; interpolation can produce a zero or an
    // infinite value one node early.
    if let Some(pos) = values.iter().position(|v| v.is_absorbing()) {
        times.truncate(pos + 1);
        values.truncate(pos + 1);
    }
    let horizon = if f.is_truncated() { Some(end) } else { None };
    let (terminal, horizon) = normalized_end(*values.last().expect("node"), f.terminal(), horizon)?;
    let horizon = match horizon {
        Some(h) if h.get() < *times.last().expect("node") => None,
        other => other,
    };
    CadlagPath::grid_with_times(step, times, values, terminal, horizon)
}

/// The Lamperti transformation `L(f) = f ∘ κ`.
pub fn transform<S: Scalar>(f: &CadlagPath<S>) -> Result<CadlagPath<S>> {
    check_input(f)?;
    match f.kind() {
        PathKind::Event => rescale_holding(f, |v| v),
        PathKind::Grid { step } => resample_grid(f, &TimeChange::additive(f), step),
    }
}

/// The inverse transformation `L⁻¹(g) = g ∘ θ̃`, `θ̃` the right-inverse of
/// `κ̃_t = ∫_0^t ds/g(s)`.
pub fn inverse_transform<S: Scalar>(g: &CadlagPath<S>) -> Result<CadlagPath<S>> {
    check_input(g)?;
    match g.kind() {
        PathKind::Event => rescale_holding(g, |v| S::one() / v),
        PathKind::Grid { step } => resample_grid(g, &TimeChange::reciprocal(g), step),
    }
}

/// Largest breakpoint or value discrepancy between `L⁻¹(L(f))` and `f`.
/// Structural mismatches (different lengths, finite vs infinite values)
/// report `∞`.
pub fn roundtrip_check<S: Scalar>(f: &CadlagPath<S>) -> Result<ExtReal<S>> {
    if !f.is_event() {
        return Err(Error::UnsupportedKind("grid"));
    }
    f.require_member()?;
    let back = inverse_transform(&transform(f)?)?;
    Ok(max_discrepancy(f, &back))
}

/// Largest pointwise difference of breakpoints and values of two event paths
/// with the same structure.
pub fn max_discrepancy<S: Scalar>(a: &CadlagPath<S>, b: &CadlagPath<S>) -> ExtReal<S> {
    if a.len() != b.len() || a.terminal() != b.terminal() {
        return ExtReal::Infinity;
    }
    let mut worst = S::zero();
    for (x, y) in a.times().iter().zip(b.times()) {
        worst = worst.max_val((*x - *y).abs_val());
    }
    for (x, y) in a.values().iter().zip(b.values()) {
        match (x, y) {
            (ExtReal::Finite(x), ExtReal::Finite(y)) => worst = worst.max_val((*x - *y).abs_val()),
            (ExtReal::Infinity, ExtReal::Infinity) => {}
            _ => return ExtReal::Infinity,
        }
    }
    ExtReal::Finite(worst)
}

/// `∫_0^∞ ds / f(s)` for a positive function given in closed form, by
/// adaptive Simpson quadrature after the substitution `s = u / (1 - u)`.
pub fn reciprocal_integral(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let s = u / (1.0 - u);
        let jac = 1.0 / ((1.0 - u) * (1.0 - u));
        let v = f(s);
        if v.is_infinite() {
            0.0
        } else {
            jac / v
        }
    };
    adaptive_simpson(&g, 0.0, 1.0, tol, 48)
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn fin(x: f64) -> ExtReal<f64> {
        ExtReal::Finite(x)
    }

    fn steps(times: &[f64], values: &[f64]) -> CadlagPath<f64> {
        CadlagPath::steps(times, values, Terminal::Zero).unwrap()
    }

    #[test]
    fn theta_of_step_paths() {
        let f = steps(&[0.0, 10.0], &[2.0, 0.0]);
        assert_eq!(theta(&f, 3.0).unwrap(), fin(6.0));
        let g = steps(&[0.0, 1.0, 2.0], &[1.0, 3.0, 0.0]);
        assert_eq!(theta(&g, 4.0).unwrap(), fin(4.0));
        assert_eq!(theta_total(&g).unwrap(), fin(4.0));
    }

    #[test]
    fn theta_of_exponential_grid() {
        let dt = 1e-4;
        let n = 10_001;
        let mut values: Vec<_> = (0..n).map(|i| fin((i as f64 * dt).exp())).collect();
        values.push(fin(0.0));
        let mut times: Vec<_> = (0..=n).map(|i| i as f64 * dt).collect();
        times[n] = (n - 1) as f64 * dt + dt;
        let f = CadlagPath::grid_with_times(dt, times, values, Terminal::Zero, None).unwrap();
        let got = theta(&f, 1.0).unwrap().finite().unwrap();
        let exact = std::f64::consts::E - 1.0;
        assert!((got - exact).abs() < 1e-6, "{got} vs {exact}");
    }

    #[test]
    fn kappa_inverts_theta() {
        let c = 2.5;
        let f = steps(&[0.0, 1e6], &[c, 0.0]);
        assert!((kappa(&f, 10.0).unwrap().finite().unwrap() - 10.0 / c).abs() < 1e-12);
        let g = steps(&[0.0, 2.0], &[1.0, 0.0]);
        assert_eq!(kappa(&g, 3.0).unwrap(), ExtReal::Infinity);
        let h = steps(&[0.0, 1.0, 2.0], &[1.0, 3.0, 0.0]);
        assert_eq!(kappa(&h, 2.5).unwrap(), fin(1.5));
    }

    #[test]
    fn kappa_at_infinite_value_saturates() {
        let f = CadlagPath::event(
            vec![0.0, 1.0],
            vec![fin(2.0), ExtReal::Infinity],
            Terminal::Infinity,
            None,
        )
        .unwrap();
        assert_eq!(theta(&f, 1.5).unwrap(), ExtReal::Infinity);
        assert_eq!(kappa(&f, 100.0).unwrap(), fin(1.0));
    }

    #[test]
    fn transform_scales_holding_times() {
        let f = steps(&[0.0, 1.0, 1.5], &[2.0, 4.0, 0.0]);
        let g = transform(&f).unwrap();
        assert_eq!(g.times(), &[0.0, 2.0, 4.0]);
        assert_eq!(g.values(), f.values());
        assert_eq!(inverse_transform(&g).unwrap(), f);
        let zero = CadlagPath::<f64>::constant_zero();
        assert_eq!(transform(&zero).unwrap(), zero);
        let inf = CadlagPath::<f64>::constant_infinity();
        assert_eq!(transform(&inf).unwrap(), inf);
    }

    #[test]
    fn transform_of_truncated_path_recomputes_horizon() {
        let f = CadlagPath::event(
            vec![0.0, 1.0],
            vec![fin(2.0), fin(3.0)],
            Terminal::Zero,
            Some(Horizon::new(2.0).unwrap()),
        )
        .unwrap();
        let g = transform(&f).unwrap();
        assert_eq!(g.times(), &[0.0, 2.0]);
        assert_eq!(g.horizon().unwrap().get(), 5.0);
        let back = inverse_transform(&g).unwrap();
        assert_eq!(back.horizon().unwrap().get(), 2.0);
    }

    #[test]
    fn rational_roundtrip_is_exact() {
        type Q = Ratio<i128>;
        let q = |n: i128, d: i128| Q::new(n, d);
        let f = CadlagPath::steps(
            &[q(0, 1), q(1, 3), q(7, 5), q(9, 2)],
            &[q(2, 7), q(11, 3), q(1, 9), q(0, 1)],
            Terminal::Zero,
        )
        .unwrap();
        assert_eq!(roundtrip_check(&f).unwrap(), ExtReal::Finite(q(0, 1)));
        let g = transform(&f).unwrap();
        assert_eq!(inverse_transform(&g).unwrap(), f);
        assert_eq!(g.last_time(), theta_total(&f).unwrap().finite().unwrap());
    }

    #[test]
    fn inverse_of_linear_growth_is_exponential() {
        let dt = 1e-3;
        let top = 8.0;
        let n = (top / dt) as usize + 1;
        let values: Vec<_> = (0..n).map(|i| fin(1.0 + i as f64 * dt)).collect();
        let g = CadlagPath::grid(dt, values, Terminal::Infinity, Some(Horizon::new((n - 1) as f64 * dt).unwrap()))
            .unwrap();
        let z = inverse_transform(&g).unwrap();
        for k in 0..=200 {
            let t = k as f64 * 0.01;
            let got = z.eval(t).unwrap().finite().unwrap();
            assert!((got - t.exp()).abs() < 1e-3, "t={t}: {got}");
        }
    }

    #[test]
    fn inverse_of_quadratic_growth_explodes_at_one() {
        let dt = 1e-3;
        let top = 2000.0;
        let n = (top / dt) as usize + 1;
        let mut values: Vec<_> = (0..n)
            .map(|i| {
                let s = i as f64 * dt;
                fin((1.0 + s) * (1.0 + s))
            })
            .collect();
        values.push(ExtReal::Infinity);
        let g = CadlagPath::grid(dt, values, Terminal::Infinity, None).unwrap();
        let explosion = kappa_tilde_total(&g).unwrap().finite().unwrap();
        assert!((explosion - 1.0).abs() < 1e-3, "{explosion}");
        let z = inverse_transform(&g).unwrap();
        for k in 0..=99 {
            let t = k as f64 * 0.01;
            let got = z.eval(t).unwrap().finite().unwrap();
            let exact = (1.0 - t).powi(-2);
            assert!(((got - exact) / exact).abs() < 1e-3, "t={t}: {got} vs {exact}");
        }
        assert_eq!(z.terminal(), Terminal::Infinity);
        assert!((z.last_time() - explosion).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_integral_of_quadratic() {
        let k = reciprocal_integral(|s| (1.0 + s) * (1.0 + s), 1e-10);
        assert!((k - 1.0).abs() < 1e-9);
        let k2 = reciprocal_integral(|s| (1.0 + s).powi(3), 1e-12);
        assert!((k2 - 0.5).abs() < 1e-8, "{k2}");
    }

    #[test]
    fn kappa_of_theta_is_identity_where_positive() {
        let f = steps(&[0.0, 0.5, 1.25, 3.0], &[1.5, 0.25, 4.0, 0.0]);
        let tc = TimeChange::additive(&f);
        for k in 0..300 {
            let u = k as f64 * 0.01;
            let th = tc.eval(u).unwrap().finite().unwrap();
            let back = tc.right_inverse(th).unwrap().finite().unwrap();
            assert!((back - u).abs() < 1e-12, "u={u}: {back}");
        }
    }
}
