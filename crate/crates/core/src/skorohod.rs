//! Metrics on path space.
//!
//! The state space `E = [0, ∞]` is metrized by `ρ(x, y) = |h(x) - h(y)|` with
//! `h(x) = x/(1+x)`, `h(∞) = 1`. Skorohod distances are intractable to compute
//! exactly, so every distance is returned as a certified `[lower, upper]`
//! bracket: the upper bound comes from an explicit time change, the lower
//! bound from a window criterion that every time change must satisfy.

use crate::error::{Error, Result};
use crate::lamperti;
use crate::paths::{CadlagPath, ExtReal, PathKind, Terminal};
use crate::scalar::Real;

/// Grid paths are reduced to step functions, dropping nodes whose value
/// moves by at most this much in `h`-coordinates.
pub const THINNING_THRESHOLD: f64 = 1e-6;

/// A bound gap above this raises the warning flag when the jump search was
/// cut off by the search depth.
pub const GAP_TOLERANCE: f64 = 1e-3;

/// `h(x) = x/(1+x)` with `h(∞) = 1`.
pub fn homeomorphism<S: Real>(x: ExtReal<S>) -> f64 {
    match x {
        ExtReal::Finite(v) => {
            let v = v.to_f64_lossy();
            v / (1.0 + v)
        }
        ExtReal::Infinity => 1.0,
    }
}

/// `ρ(x, y) = |h(x) - h(y)|`.
pub fn rho<S: Real>(x: ExtReal<S>, y: ExtReal<S>) -> f64 {
    (homeomorphism(x) - homeomorphism(y)).abs()
}

/// Piecewise linear increasing homeomorphism through `anchors`, extended by
/// the identity slope past the last anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeWarp {
    anchors: Vec<(f64, f64)>,
}

impl TimeWarp {
    pub fn identity() -> Self {
        TimeWarp {
            anchors: vec![(0.0, 0.0)],
        }
    }

    pub fn new(anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.first() != Some(&(0.0, 0.0)) {
            return Err(Error::Domain("a time warp must fix 0".into()));
        }
        if anchors
            .windows(2)
            .any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1))
        {
            return Err(Error::Domain("time warp anchors must increase".into()));
        }
        Ok(TimeWarp { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    pub fn eval(&self, s: f64) -> f64 {
        let i = self.anchors.partition_point(|a| a.0 <= s).max(1) - 1;
        let (s0, u0) = self.anchors[i];
        match self.anchors.get(i + 1) {
            Some(&(s1, u1)) => u0 + (s - s0) * (u1 - u0) / (s1 - s0),
            None => u0 + (s - s0),
        }
    }

    /// `sup |λ(s) - s|`, attained at an anchor.
    pub fn sup_deviation(&self) -> f64 {
        self.anchors
            .iter()
            .map(|(s, u)| (u - s).abs())
            .fold(0.0, f64::max)
    }
}

/// Certified bracket for a distance.
#[derive(Clone, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    /// Set when the jump search was truncated and the gap exceeds
    /// [`GAP_TOLERANCE`].
    pub warning: bool,
    /// Time change realizing `upper`.
    pub warp: TimeWarp,
}

impl Bounds {
    pub fn gap(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    fn exact(value: f64) -> Self {
        Bounds {
            lower: value,
            upper: value,
            warning: false,
            warp: TimeWarp::identity(),
        }
    }
}

/// Step function in `h`-coordinates: value `h[i]` on `[times[i], times[i+1])`.
#[derive(Clone, Debug)]
struct Steps {
    times: Vec<f64>,
    h: Vec<f64>,
    horizon: Option<f64>,
}

impl Steps {
    fn from_path<S: Real>(p: &CadlagPath<S>) -> Self {
        let mut times = Vec::with_capacity(p.len());
        let mut h = Vec::with_capacity(p.len());
        let thin = matches!(p.kind(), PathKind::Grid { .. });
        for (t, v) in p.times().iter().zip(p.values()) {
            let x = homeomorphism(*v);
            if let Some(last) = h.last() {
                let keep = if thin {
                    (x - last).abs() > THINNING_THRESHOLD
                } else {
                    x != *last
                };
                if !keep {
                    continue;
                }
            }
            times.push(t.to_f64_lossy());
            h.push(x);
        }
        if thin && h.last().copied() != Some(homeomorphism(p.last_value())) {
            // absorption must survive thinning
            times.push(p.last_time().to_f64_lossy());
            h.push(homeomorphism(p.last_value()));
        }
        Steps {
            times,
            h,
            horizon: p.horizon().map(|x| x.get().to_f64_lossy()),
        }
    }

    fn piece(&self, s: f64) -> usize {
        self.times.partition_point(|t| *t <= s).max(1) - 1
    }

    fn at(&self, s: f64) -> f64 {
        self.h[self.piece(s)]
    }

    fn check(&self, t: f64) -> Result<()> {
        match self.horizon {
            Some(hz) if t > hz => Err(Error::OutOfDomain { t, horizon: hz }),
            _ => Ok(()),
        }
    }

    /// Jump times in `(0, t)` with their sizes in `h`, largest first, at
    /// most `depth` of them, returned in time order.
    fn top_jumps(&self, t: f64, depth: usize) -> (Vec<f64>, bool) {
        let mut jumps: Vec<(f64, f64)> = (1..self.times.len())
            .filter(|&i| self.times[i] > 0.0 && self.times[i] < t)
            .map(|i| (self.times[i], (self.h[i] - self.h[i - 1]).abs()))
            .collect();
        let truncated = jumps.len() > depth;
        jumps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
        jumps.truncate(depth);
        let mut times: Vec<f64> = jumps.into_iter().map(|j| j.0).collect();
        times.sort_by(f64::total_cmp);
        (times, truncated)
    }
}

/// `sup_{s ∈ [s0, s1)} |f(s) - g(λ(s))|` for the linear warp segment
/// `(s0, u0) → (s1, u1)`.
fn segment_cost(f: &Steps, g: &Steps, s0: f64, u0: f64, s1: f64, u1: f64) -> f64 {
    let slope = (u1 - u0) / (s1 - s0);
    let mut fi = f.piece(s0);
    let mut gi = g.piece(u0);
    let mut worst = (f.h[fi] - g.h[gi]).abs();
    loop {
        let next_f = f.times.get(fi + 1).copied().filter(|x| *x < s1);
        let next_g = g
            .times
            .get(gi + 1)
            .copied()
            .filter(|x| *x < u1)
            .map(|u| s0 + (u - u0) / slope);
        match (next_f, next_g) {
            (None, None) => break,
            (Some(a), Some(b)) if a == b => {
                fi += 1;
                gi += 1;
            }
            (Some(a), Some(b)) => {
                if a < b {
                    fi += 1;
                } else {
                    gi += 1;
                }
            }
            (Some(_), None) => fi += 1,
            (None, Some(_)) => gi += 1,
        }
        worst = worst.max((f.h[fi] - g.h[gi]).abs());
    }
    worst
}

/// Best monotone matching of the largest jumps, by dynamic programming on
/// the minimax cost. Returns the cost and the warp.
fn matching_upper(f: &Steps, g: &Steps, t: f64, depth: usize) -> (f64, TimeWarp, bool) {
    let (a, ta) = f.top_jumps(t, depth);
    let (b, tb) = g.top_jumps(t, depth);
    let end_cost = (f.at(t) - g.at(t)).abs();
    // node 0 is the origin; node (i+1, j+1) matches a[i] with b[j]
    let (na, nb) = (a.len() + 1, b.len() + 1);
    let idx = |i: usize, j: usize| i * nb + j;
    let pos = |i: usize, j: usize| -> (f64, f64) {
        if i == 0 {
            (0.0, 0.0)
        } else {
            (a[i - 1], b[j - 1])
        }
    };
    let mut cost = vec![f64::INFINITY; na * nb];
    let mut from = vec![usize::MAX; na * nb];
    cost[0] = 0.0;
    for i in 1..na {
        for j in 1..nb {
            let (s1, u1) = pos(i, j);
            let dev = (s1 - u1).abs();
            let mut best = f64::INFINITY;
            let mut arg = usize::MAX;
            let consider = |pi: usize, pj: usize, best: &mut f64, arg: &mut usize| {
                let c0 = cost[idx(pi, pj)];
                if c0.max(dev) >= *best {
                    return;
                }
                let (s0, u0) = pos(pi, pj);
                let c = c0.max(dev).max(segment_cost(f, g, s0, u0, s1, u1));
                if c < *best {
                    *best = c;
                    *arg = idx(pi, pj);
                }
            };
            consider(0, 0, &mut best, &mut arg);
            for pi in 1..i {
                for pj in 1..j {
                    consider(pi, pj, &mut best, &mut arg);
                }
            }
            cost[idx(i, j)] = best;
            from[idx(i, j)] = arg;
        }
    }
    let mut best = (f64::INFINITY, 0usize);
    for i in 0..na {
        for j in 0..nb {
            if (i == 0) != (j == 0) {
                continue;
            }
            let c0 = cost[idx(i, j)];
            if c0 >= best.0 {
                continue;
            }
            let (s0, u0) = pos(i, j);
            let c = c0.max(segment_cost(f, g, s0, u0, t, t)).max(end_cost);
            if c < best.0 {
                best = (c, idx(i, j));
            }
        }
    }
    let mut anchors = vec![(t, t)];
    let mut node = best.1;
    while node != 0 {
        anchors.push(pos(node / nb, node % nb));
        node = from[node];
    }
    anchors.push((0.0, 0.0));
    anchors.reverse();
    let warp = TimeWarp::new(anchors).expect("matched anchors increase");
    (best.0, warp, ta || tb)
}

/// `sup_s min_{|u - s| ≤ δ} |f(s) - g(u)|` over `s ∈ [0, t]`, with `u`
/// clipped to `[0, t]` when `clip` is set and to `[0, ∞)` otherwise.
fn window_discrepancy(f: &Steps, g: &Steps, t: f64, delta: f64, clip: bool) -> f64 {
    let u_max = if clip { t } else { f64::INFINITY };
    let mut worst: f64 = 0.0;
    let n_f = f.piece(t) + 1;
    let mut cand: Vec<f64> = Vec::new();
    for i in 0..n_f {
        let p = f.times[i];
        let last = i + 1 == n_f;
        let q = if last { t } else { f.times[i + 1] };
        let a = f.h[i];
        cand.clear();
        cand.push(p);
        if last {
            cand.push(q);
        }
        for x in [delta, t - delta] {
            cand.push(x);
        }
        let from = g.times.partition_point(|b| *b < p - delta);
        for &b in &g.times[from..] {
            if b > q + delta {
                break;
            }
            cand.push(b - delta);
            cand.push(b + delta);
        }
        cand.retain(|&s| s >= p && (s < q || (last && s <= q)));
        cand.sort_by(f64::total_cmp);
        cand.dedup();
        let n = cand.len();
        for k in 0..n {
            let s = cand[k];
            worst = worst.max(window_min(g, a, s - delta, (s + delta).min(u_max)));
            let next = if k + 1 < n { cand[k + 1] } else { q };
            if next > s {
                let m = 0.5 * (s + next);
                worst = worst.max(window_min(g, a, m - delta, (m + delta).min(u_max)));
            }
        }
    }
    worst
}

/// `min |a - g(u)|` over `u ∈ [lo, hi]`, scanning outward from the middle.
fn window_min(g: &Steps, a: f64, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(0.0);
    let j_lo = g.piece(lo);
    let j_hi = g.piece(hi);
    let mid = g.piece(0.5 * (lo + hi)).clamp(j_lo, j_hi);
    let mut best = (a - g.h[mid]).abs();
    let mut d = 1;
    while best > 0.0 && (mid >= j_lo + d || mid + d <= j_hi) {
        if mid >= j_lo + d {
            best = best.min((a - g.h[mid - d]).abs());
        }
        if mid + d <= j_hi {
            best = best.min((a - g.h[mid + d]).abs());
        }
        d += 1;
    }
    best
}

/// Lower bound `inf_δ max(δ, W(δ))` (both directions), at least `floor`
/// and at most `cap`.
fn window_lower(f: &Steps, g: &Steps, t: f64, floor: f64, cap: f64, clip: bool) -> f64 {
    let w = |d: f64| window_discrepancy(f, g, t, d, clip).max(window_discrepancy(g, f, t, d, clip));
    if floor >= cap {
        return cap;
    }
    let w_floor = w(floor);
    if w_floor <= floor {
        return floor;
    }
    let (mut lo, mut hi) = (floor, cap);
    let (mut w_lo, mut w_hi) = (w_floor, w(cap));
    if w_hi > hi {
        return cap;
    }
    for _ in 0..40 {
        if hi - lo < 1e-9 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let wm = w(mid);
        if wm > mid {
            lo = mid;
            w_lo = wm;
        } else {
            hi = mid;
            w_hi = wm;
        }
    }
    w_lo.min(hi).min(lo.max(w_hi)).max(floor).min(cap)
}

fn bounds_on(f: &Steps, g: &Steps, t: f64, depth: usize) -> Bounds {
    let (upper, warp, truncated) = matching_upper(f, g, t, depth);
    if upper == 0.0 {
        return Bounds::exact(0.0);
    }
    let endpoints = (f.h[0] - g.h[0]).abs().max((f.at(t) - g.at(t)).abs());
    let lower = window_lower(f, g, t, endpoints, upper, true);
    Bounds {
        lower,
        upper,
        warning: truncated && upper - lower > GAP_TOLERANCE,
        warp,
    }
}

/// Bracket for the Skorohod distance `d_t(f, g) = inf_λ ‖ρ(f, g∘λ)‖_t ∨
/// ‖λ - id‖_t` over increasing homeomorphisms of `[0, t]`.
///
/// The upper bound minimizes over warps through monotone matchings of the
/// `search_depth` largest jumps of each path. The lower bound uses
/// `ρ(f(0), g(0))`, `ρ(f(t), g(t))` and the window criterion: a warp with
/// `‖λ - id‖ ≤ δ` has `sup ρ ≥ sup_s min_{|u-s| ≤ δ} ρ(f(s), g(u))`.
pub fn dist_t<S: Real>(
    f: &CadlagPath<S>,
    g: &CadlagPath<S>,
    t: f64,
    search_depth: usize,
) -> Result<Bounds> {
    if !(t > 0.0) {
        return Err(Error::Domain("d_t needs t > 0".into()));
    }
    let (fs, gs) = (Steps::from_path(f), Steps::from_path(g));
    fs.check(t)?;
    gs.check(t)?;
    Ok(bounds_on(&fs, &gs, t, search_depth))
}

/// Bracket for the uniform-time-change metric `d_∞` on `D`.
///
/// Paths with different terminal values are at distance `1`: any time change
/// eventually compares a neighbourhood of `0` with one of `∞`. Otherwise both
/// paths are constant after their last breakpoint `T`, so
/// `d_∞ ≤ d_T` and the window criterion on `[0, T + 1]` without the
/// endpoint constraint at `T` gives the lower bound.
pub fn dist_inf<S: Real>(f: &CadlagPath<S>, g: &CadlagPath<S>, search_depth: usize) -> Result<Bounds> {
    f.require_member()?;
    g.require_member()?;
    if f.terminal() != g.terminal() {
        return Ok(Bounds::exact(1.0));
    }
    let (fs, gs) = (Steps::from_path(f), Steps::from_path(g));
    let end = fs.times.last().copied().unwrap_or(0.0).max(gs.times.last().copied().unwrap_or(0.0)) + 1.0;
    let (upper, warp, truncated) = matching_upper(&fs, &gs, end, search_depth);
    let upper = upper.min(1.0);
    if upper == 0.0 {
        return Ok(Bounds::exact(0.0));
    }
    let floor = (fs.h[0] - gs.h[0]).abs();
    let lower = window_lower(&fs, &gs, end + 1.0, floor, upper, false);
    Ok(Bounds {
        lower,
        upper,
        warning: truncated && upper - lower > GAP_TOLERANCE,
        warp,
    })
}

/// `d(f, g) = ∫_0^∞ e^{-t} d_t(f, g) dt` with its error budget.
#[derive(Clone, Debug, PartialEq)]
pub struct Integrated {
    pub value: f64,
    /// Tail mass, half the weighted bound gap and the quadrature estimate.
    pub error: f64,
    pub warning: bool,
}

/// Trapezoid quadrature of `e^{-t}·mid(d_t)` on `[0, T]` with
/// `e^{-T} ≤ quad_tol / 2`, on a uniform grid refined by the breakpoints of
/// both paths (when there are not too many).
pub fn dist_usual<S: Real>(f: &CadlagPath<S>, g: &CadlagPath<S>, quad_tol: f64) -> Result<Integrated> {
    if !(quad_tol > 0.0) {
        return Err(Error::Domain("quadrature tolerance must be positive".into()));
    }
    let (fs, gs) = (Steps::from_path(f), Steps::from_path(g));
    let t_max = (2.0 / quad_tol).ln();
    let end = [fs.horizon, gs.horizon]
        .into_iter()
        .flatten()
        .fold(t_max, f64::min);
    let tail = (-end).exp();
    const NODES: usize = 256;
    let mut nodes: Vec<f64> = (0..=NODES).map(|k| end * k as f64 / NODES as f64).collect();
    let breaks: Vec<f64> = fs
        .times
        .iter()
        .chain(&gs.times)
        .copied()
        .filter(|x| *x > 0.0 && *x < end)
        .collect();
    if breaks.len() <= 4 * NODES {
        for b in breaks {
            // both sides of a breakpoint
            nodes.push(b);
            nodes.push((b - 1e-9 * end).max(0.0));
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mut warning = false;
    let eval = |t: f64, warning: &mut bool| -> (f64, f64) {
        if t == 0.0 {
            let d = (fs.h[0] - gs.h[0]).abs();
            return (d, 0.0);
        }
        let b = bounds_on(&fs, &gs, t, 8);
        *warning |= b.warning;
        (b.mid(), 0.5 * b.gap())
    };
    let vals: Vec<(f64, f64)> = nodes.iter().map(|&t| eval(t, &mut warning)).collect();
    let trap = |stride: usize| -> (f64, f64) {
        let mut acc = 0.0;
        let mut gap = 0.0;
        let mut k = 0;
        while k + stride < nodes.len() {
            let (a, b) = (nodes[k], nodes[k + stride]);
            let (fa, fb) = ((-a).exp() * vals[k].0, (-b).exp() * vals[k + stride].0);
            acc += 0.5 * (b - a) * (fa + fb);
            gap += 0.5 * (b - a) * ((-a).exp() * vals[k].1 + (-b).exp() * vals[k + stride].1);
            k += stride;
        }
        (acc, gap)
    };
    let (fine, gap) = trap(1);
    let quad_err = if nodes.len() % 2 == 1 {
        (fine - trap(2).0).abs() / 3.0
    } else {
        0.0
    };
    Ok(Integrated {
        value: fine,
        error: tail + gap + quad_err,
        warning,
    })
}

/// `sup_{t ∈ [0, t_max]} ρ(f(t), g(t))` for event paths.
pub fn sup_rho<S: Real>(f: &CadlagPath<S>, g: &CadlagPath<S>, t_max: f64) -> Result<f64> {
    let (fs, gs) = (Steps::from_path(f), Steps::from_path(g));
    fs.check(t_max)?;
    gs.check(t_max)?;
    let mut worst = (fs.at(t_max) - gs.at(t_max)).abs();
    for &s in fs.times.iter().chain(&gs.times) {
        if s <= t_max {
            worst = worst.max((fs.at(s) - gs.at(s)).abs());
        }
    }
    Ok(worst)
}

/// One line of the discontinuity report.
#[derive(Clone, Debug, PartialEq)]
pub struct Example1Row {
    pub n: u64,
    pub d_usual: f64,
    pub d_usual_error: f64,
    pub d_inf_lower: f64,
    pub d_inf_upper: f64,
    /// `sup_{t ≤ 1} ρ(L⁻¹(f_n)(t), L⁻¹(f)(t))`.
    pub transform_gap: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Example1Report {
    /// `∫_0^∞ ds / (1+s)²` from the closed form.
    pub kappa_inf: f64,
    /// Explosion time of `L⁻¹` of the step discretization of `f`.
    pub kappa_inf_steps: f64,
    pub rows: Vec<Example1Row>,
}

impl Example1Report {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,d_usual,d_inf_lower,d_inf_upper,transform_gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.d_usual, r.d_inf_lower, r.d_inf_upper, r.transform_gap
            ));
        }
        out
    }
}

/// Step used to discretize `f(s) = (1+s)²` in the discontinuity demo.
pub const EXAMPLE1_STEP: f64 = 1e-2;
/// `f` jumps to `∞` at this time in the discretization.
pub const EXAMPLE1_SPAN: f64 = 20.0;

/// Left-endpoint step discretization of `(1+s)²` on `[0, span)`, then `∞`
/// (or `0` from `cut` on, if given).
pub fn example1_path(step: f64, span: f64, cut: Option<f64>) -> Result<CadlagPath<f64>> {
    let end = cut.map_or(span, |c| c.min(span));
    let n = (end / step).round() as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    for k in 0..n {
        let s = k as f64 * step;
        times.push(s);
        values.push(ExtReal::Finite((1.0 + s) * (1.0 + s)));
    }
    times.push(n as f64 * step);
    let terminal = if cut.is_some() {
        Terminal::Zero
    } else {
        Terminal::Infinity
    };
    values.push(terminal.value());
    CadlagPath::event(times, values, terminal, None)
}

/// The discontinuity of `L⁻¹`: `f(s) = (1+s)²` explodes under `L⁻¹` at
/// `κ_∞ = 1`, while `f_n = f·1_{[0,n)}` (absorbed at `0` from `n`) converges
/// to `f` in the usual Skorohod metric but not in `d_∞`, and `L⁻¹(f_n)`
/// stays far from `L⁻¹(f)` on `[0, 1]`.
pub fn example1_demo(n_list: &[u64], quad_tol: f64) -> Result<Example1Report> {
    let kappa_inf = lamperti::reciprocal_integral(|s| (1.0 + s) * (1.0 + s), 1e-12);
    let f = example1_path(EXAMPLE1_STEP, EXAMPLE1_SPAN, None)?;
    let inv_f = lamperti::inverse_transform(&f)?;
    let kappa_inf_steps = inv_f.last_time();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let f_n = example1_path(EXAMPLE1_STEP, EXAMPLE1_SPAN, Some(n as f64))?;
        let d = dist_usual(&f_n, &f, quad_tol)?;
        let di = dist_inf(&f_n, &f, 8)?;
        let inv_n = lamperti::inverse_transform(&f_n)?;
        let gap = sup_rho(&inv_n, &inv_f, 1.0)?;
        rows.push(Example1Row {
            n,
            d_usual: d.value,
            d_usual_error: d.error,
            d_inf_lower: di.lower,
            d_inf_upper: di.upper,
            transform_gap: gap,
        });
    }
    Ok(Example1Report {
        kappa_inf,
        kappa_inf_steps,
        rows,
    })
}
