//! Cadlag trajectories on `E = [0, ∞]` absorbed at `0` and `∞`.
//!
//! Two representations are supported. Event paths are piecewise constant and
//! carry exact breakpoints, so every operation on them is exact (up to the
//! arithmetic of the scalar type). Grid paths hold samples on a uniform grid
//! and are read by linear interpolation between finite nodes.
//!
//! A path that was stopped at a finite time before absorption carries a
//! [`Horizon`]; such a path is not an element of `D` and is rejected by the
//! operations that need the terminal value.

use std::fmt::{self, Display};
use std::ops::Add;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Element of the extended half-line `[0, ∞]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtReal<S> {
    Finite(S),
    Infinity,
}

impl<S: Scalar> ExtReal<S> {
    pub fn zero() -> Self {
        ExtReal::Finite(S::zero())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtReal::Finite(x) if x.is_zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    /// `true` for the two absorbing states `0` and `∞`.
    pub fn is_absorbing(&self) -> bool {
        self.is_zero() || self.is_infinite()
    }

    pub fn finite(&self) -> Option<S> {
        match self {
            ExtReal::Finite(x) => Some(*x),
            ExtReal::Infinity => None,
        }
    }

    /// Product with a nonnegative finite factor, using `∞ · c = ∞` for `c > 0`
    /// and `∞ · 0 = 0`.
    pub fn scale(self, c: S) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x * c),
            ExtReal::Infinity if c.is_zero() => Self::zero(),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }

    /// Division by a positive finite number.
    pub fn div(self, c: S) -> Self {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x / c),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }

    /// Value as `f64`, with `∞` mapped to `f64::INFINITY`.
    pub fn to_f64(&self) -> f64 {
        match self {
            ExtReal::Finite(x) => x.to_f64_lossy(),
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x.is_infinite() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(S::lit(x))
        }
    }
}

impl<S: Scalar> From<S> for ExtReal<S> {
    fn from(x: S) -> Self {
        ExtReal::Finite(x)
    }
}

impl<S: Scalar> Add for ExtReal<S> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl<S: Display> Display for ExtReal<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => f.write_str("inf"),
        }
    }
}

impl<S: FromStr> FromStr for ExtReal<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "+inf" || s == "Infinity" {
            return Ok(ExtReal::Infinity);
        }
        s.parse::<S>()
            .map(ExtReal::Finite)
            .map_err(|_| Error::Parse(format!("bad value `{s}`")))
    }
}

/// Absorbing limit `f(∞)` of a path in `D`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terminal {
    Zero,
    Infinity,
}

impl Terminal {
    pub fn value<S: Scalar>(self) -> ExtReal<S> {
        match self {
            Terminal::Zero => ExtReal::zero(),
            Terminal::Infinity => ExtReal::Infinity,
        }
    }
}

impl Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Terminal::Zero => "0",
            Terminal::Infinity => "inf",
        })
    }
}

/// Finite time at which a simulated path was stopped before absorption.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Horizon<S>(S);

impl<S: Scalar> Horizon<S> {
    pub fn new(t_max: S) -> Result<Self> {
        if t_max > S::zero() {
            Ok(Horizon(t_max))
        } else {
            Err(Error::Domain(format!(
                "horizon must be positive, got {}",
                t_max.to_f64_lossy()
            )))
        }
    }

    pub fn get(self) -> S {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PathKind<S> {
    /// Piecewise constant: `values[i]` holds on `[times[i], times[i+1])`.
    Event,
    /// Uniform samples `times[i] = i * step`; the final node may sit closer
    /// than `step` to its predecessor (hitting time refined inside a cell).
    Grid { step: S },
}

impl<S> PathKind<S> {
    pub fn name(&self) -> &'static str {
        match self {
            PathKind::Event => "event",
            PathKind::Grid { .. } => "grid",
        }
    }
}

/// First invariant violated by a path, as reported by [`CadlagPath::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Empty,
    LengthMismatch,
    StartNotZero,
    NotIncreasing { index: usize },
    NullJump { index: usize },
    NonUniformGrid { index: usize },
    NegativeValue { index: usize },
    AbsorptionBroken { index: usize },
    TerminalUnreachable,
    HorizonBeforeLastNode,
}

impl Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "empty path"),
            Violation::LengthMismatch => write!(f, "times and values differ in length"),
            Violation::StartNotZero => write!(f, "first breakpoint is not 0"),
            Violation::NotIncreasing { index } => {
                write!(f, "breakpoints not increasing at index {index}")
            }
            Violation::NullJump { index } => write!(f, "null jump at index {index}"),
            Violation::NonUniformGrid { index } => {
                write!(f, "grid spacing not uniform at index {index}")
            }
            Violation::NegativeValue { index } => write!(f, "negative value at index {index}"),
            Violation::AbsorptionBroken { index } => {
                write!(f, "absorption broken at index {index}")
            }
            Violation::TerminalUnreachable => write!(f, "terminal unreachable"),
            Violation::HorizonBeforeLastNode => write!(f, "horizon precedes last breakpoint"),
        }
    }
}

/// Signed jump size; a jump into `∞` has size `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum JumpSize<S> {
    Finite(S),
    PlusInfinity,
    MinusInfinity,
}

impl<S: Scalar> JumpSize<S> {
    pub fn is_negative(&self) -> bool {
        match self {
            JumpSize::Finite(x) => *x < S::zero(),
            JumpSize::PlusInfinity => false,
            JumpSize::MinusInfinity => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jump<S> {
    pub time: S,
    pub size: JumpSize<S>,
}

/// A cadlag trajectory in the absorbed Skorohod-type space.
#[derive(Clone, Debug, PartialEq)]
pub struct CadlagPath<S> {
    kind: PathKind<S>,
    times: Vec<S>,
    values: Vec<ExtReal<S>>,
    terminal: Terminal,
    horizon: Option<Horizon<S>>,
}

impl<S: Scalar> CadlagPath<S> {
    /// Assemble a path without checking invariants. Use [`validate`] to
    /// diagnose the result.
    ///
    /// [`validate`]: CadlagPath::validate
    pub fn from_parts(
        kind: PathKind<S>,
        times: Vec<S>,
        values: Vec<ExtReal<S>>,
        terminal: Terminal,
        horizon: Option<Horizon<S>>,
    ) -> Self {
        CadlagPath {
            kind,
            times,
            values,
            terminal,
            horizon,
        }
    }

    /// Checked event-path constructor.
    pub fn event(
        times: Vec<S>,
        values: Vec<ExtReal<S>>,
        terminal: Terminal,
        horizon: Option<Horizon<S>>,
    ) -> Result<Self> {
        Self::from_parts(PathKind::Event, times, values, terminal, horizon).checked()
    }

    /// Checked event path from finite values, absorbed at `terminal`.
    pub fn steps(times: &[S], values: &[S], terminal: Terminal) -> Result<Self> {
        Self::event(
            times.to_vec(),
            values.iter().copied().map(ExtReal::Finite).collect(),
            terminal,
            None,
        )
    }

    /// Checked grid path on `times[i] = i * step`.
    pub fn grid(
        step: S,
        values: Vec<ExtReal<S>>,
        terminal: Terminal,
        horizon: Option<Horizon<S>>,
    ) -> Result<Self> {
        let times = (0..values.len())
            .map(|i| S::from_usize(i).expect("grid index") * step)
            .collect();
        Self::grid_with_times(step, times, values, terminal, horizon)
    }

    /// Checked grid path with explicit node times (the last node may be
    /// closer than `step` to its predecessor).
    pub fn grid_with_times(
        step: S,
        times: Vec<S>,
        values: Vec<ExtReal<S>>,
        terminal: Terminal,
        horizon: Option<Horizon<S>>,
    ) -> Result<Self> {
        if !(step > S::zero()) {
            return Err(Error::Domain("grid step must be positive".into()));
        }
        Self::from_parts(PathKind::Grid { step }, times, values, terminal, horizon).checked()
    }

    pub fn constant_zero() -> Self {
        Self::from_parts(
            PathKind::Event,
            vec![S::zero()],
            vec![ExtReal::zero()],
            Terminal::Zero,
            None,
        )
    }

    pub fn constant_infinity() -> Self {
        Self::from_parts(
            PathKind::Event,
            vec![S::zero()],
            vec![ExtReal::Infinity],
            Terminal::Infinity,
            None,
        )
    }

    fn checked(self) -> Result<Self> {
        match self.validate() {
            Ok(()) => Ok(self),
            Err(v) => Err(Error::InvalidPath(v.to_string())),
        }
    }

    pub fn kind(&self) -> PathKind<S> {
        self.kind
    }

    pub fn is_event(&self) -> bool {
        matches!(self.kind, PathKind::Event)
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn values(&self) -> &[ExtReal<S>] {
        &self.values
    }

    pub fn terminal(&self) -> Terminal {
        self.terminal
    }

    pub fn horizon(&self) -> Option<Horizon<S>> {
        self.horizon
    }

    pub fn is_truncated(&self) -> bool {
        self.horizon.is_some()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_value(&self) -> ExtReal<S> {
        self.values[0]
    }

    pub fn last_value(&self) -> ExtReal<S> {
        *self.values.last().expect("non-empty path")
    }

    pub fn last_time(&self) -> S {
        *self.times.last().expect("non-empty path")
    }

    /// Fails with [`Error::Truncated`] unless the path is an element of `D`.
    pub fn require_member(&self) -> Result<()> {
        if self.is_truncated() {
            return Err(Error::Truncated);
        }
        self.validate()
            .map_err(|v| Error::InvalidPath(v.to_string()))
    }

    /// Check every representation invariant, reporting the first failure.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let n = self.values.len();
        if n == 0 {
            return Err(Violation::Empty);
        }
        if self.times.len() != n {
            return Err(Violation::LengthMismatch);
        }
        if !self.times[0].is_zero() {
            return Err(Violation::StartNotZero);
        }
        for i in 1..n {
            if !(self.times[i] > self.times[i - 1]) {
                return Err(Violation::NotIncreasing { index: i });
            }
        }
        if let PathKind::Grid { step } = self.kind {
            let tol = step * S::lit(1e-9);
            for i in 1..n {
                let d = self.times[i] - self.times[i - 1];
                let last = i == n - 1;
                let ok = if last {
                    d <= step + tol
                } else {
                    (d - step).abs_val() <= tol
                };
                if !ok {
                    return Err(Violation::NonUniformGrid { index: i });
                }
            }
        }
        for (i, v) in self.values.iter().enumerate() {
            if let ExtReal::Finite(x) = v {
                if *x < S::zero() {
                    return Err(Violation::NegativeValue { index: i });
                }
            }
        }
        for i in 1..n {
            let prev = self.values[i - 1];
            if prev.is_absorbing() && self.values[i] != prev {
                return Err(Violation::AbsorptionBroken { index: i });
            }
            if self.is_event() && self.values[i] == prev {
                return Err(Violation::NullJump { index: i });
            }
        }
        match self.horizon {
            Some(h) => {
                if h.get() < self.last_time() {
                    return Err(Violation::HorizonBeforeLastNode);
                }
            }
            None => {
                if self.last_value() != self.terminal.value() {
                    return Err(Violation::TerminalUnreachable);
                }
            }
        }
        Ok(())
    }

    fn check_time(&self, t: S) -> Result<()> {
        if t < S::zero() {
            return Err(Error::NegativeTime(t.to_f64_lossy()));
        }
        if let Some(h) = self.horizon {
            if t > h.get() {
                return Err(Error::OutOfDomain {
                    t: t.to_f64_lossy(),
                    horizon: h.get().to_f64_lossy(),
                });
            }
        }
        Ok(())
    }

    /// Right-continuous evaluation `f(t)`.
    pub fn eval(&self, t: S) -> Result<ExtReal<S>> {
        self.check_time(t)?;
        let i = self.times.partition_point(|s| *s <= t) - 1;
        match self.kind {
            PathKind::Event => Ok(self.values[i]),
            PathKind::Grid { .. } => {
                if i + 1 == self.len() {
                    return Ok(self.values[i]);
                }
                Ok(
                    match (self.values[i], self.values[i + 1]) {
                        (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                            let (t0, t1) = (self.times[i], self.times[i + 1]);
                            ExtReal::Finite(a + (b - a) * (t - t0) / (t1 - t0))
                        }
                        (v, _) => v,
                    },
                )
            }
        }
    }

    /// All jumps `(t_i, values[i] - values[i-1])` of an event path.
    pub fn jumps(&self) -> Result<Vec<Jump<S>>> {
        if !self.is_event() {
            return Err(Error::UnsupportedKind("grid"));
        }
        Ok(self
            .values
            .windows(2)
            .zip(&self.times[1..])
            .map(|(w, &time)| {
                let size = match (w[0], w[1]) {
                    (ExtReal::Finite(a), ExtReal::Finite(b)) => JumpSize::Finite(b - a),
                    (ExtReal::Finite(_), ExtReal::Infinity) => JumpSize::PlusInfinity,
                    (ExtReal::Infinity, ExtReal::Finite(_)) => JumpSize::MinusInfinity,
                    (ExtReal::Infinity, ExtReal::Infinity) => JumpSize::Finite(S::zero()),
                };
                Jump { time, size }
            })
            .collect())
    }

    /// Holding intervals `(value, length)` of an event path; the length of the
    /// last interval is `None` (unbounded) unless the path is truncated.
    pub fn holding_intervals(&self) -> Vec<(ExtReal<S>, Option<S>)> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let len = if i + 1 < n {
                    Some(self.times[i + 1] - self.times[i])
                } else {
                    self.horizon.map(|h| h.get() - self.times[i])
                };
                (self.values[i], len)
            })
            .collect()
    }

    /// First time the path takes the value `0`, if it does.
    pub fn hitting_time_zero(&self) -> Option<S> {
        self.values
            .iter()
            .position(|v| v.is_zero())
            .map(|i| self.times[i])
    }
}

impl<S: Scalar + Display> CadlagPath<S> {
    /// Serialize to the `t,value` CSV format with a trailing metadata row.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 * self.len() + 64);
        out.push_str("t,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v}\n"));
        }
        let horizon = match self.horizon {
            Some(h) => h.get().to_string(),
            None => "none".to_string(),
        };
        out.push_str(&format!(
            "# terminal={} kind={} horizon={}\n",
            self.terminal,
            self.kind.name(),
            horizon
        ));
        out
    }
}

impl<S: Scalar + FromStr> CadlagPath<S> {
    /// Parse the CSV format written by [`to_csv`](CadlagPath::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "t,value" => {}
            _ => return Err(Error::Parse("missing `t,value` header".into())),
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        let mut meta = None;
        for line in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                meta = Some(rest.trim().to_string());
                continue;
            }
            if meta.is_some() {
                return Err(Error::Parse("data after metadata row".into()));
            }
            let (t, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad row `{line}`")))?;
            times.push(
                t.trim()
                    .parse::<S>()
                    .map_err(|_| Error::Parse(format!("bad time `{t}`")))?,
            );
            values.push(v.parse::<ExtReal<S>>()?);
        }
        let meta = meta.ok_or_else(|| Error::Parse("missing metadata row".into()))?;
        let mut terminal = None;
        let mut kind = None;
        let mut horizon = None;
        for token in meta.split_whitespace() {
            let (k, v) = token
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata `{token}`")))?;
            match k {
                "terminal" => {
                    terminal = Some(match v {
                        "0" => Terminal::Zero,
                        "inf" => Terminal::Infinity,
                        _ => return Err(Error::Parse(format!("bad terminal `{v}`"))),
                    })
                }
                "kind" => kind = Some(v.to_string()),
                "horizon" => {
                    horizon = Some(if v == "none" {
                        None
                    } else {
                        let h = v
                            .parse::<S>()
                            .map_err(|_| Error::Parse(format!("bad horizon `{v}`")))?;
                        Some(Horizon::new(h)?)
                    })
                }
                _ => return Err(Error::Parse(format!("unknown metadata key `{k}`"))),
            }
        }
        let terminal = terminal.ok_or_else(|| Error::Parse("missing terminal".into()))?;
        let horizon = horizon.ok_or_else(|| Error::Parse("missing horizon".into()))?;
        match kind.as_deref() {
            Some("event") => Self::event(times, values, terminal, horizon),
            Some("grid") => {
                let step = if times.len() >= 2 {
                    times[1] - times[0]
                } else {
                    S::one()
                };
                Self::grid_with_times(step, times, values, terminal, horizon)
            }
            _ => Err(Error::Parse("missing or unknown kind".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(x: f64) -> ExtReal<f64> {
        ExtReal::Finite(x)
    }

    fn step_130() -> CadlagPath<f64> {
        CadlagPath::steps(&[0.0, 1.0, 2.0], &[1.0, 3.0, 0.0], Terminal::Zero).unwrap()
    }

    #[test]
    fn constant_zero_is_valid() {
        assert_eq!(CadlagPath::<f64>::constant_zero().validate(), Ok(()));
    }

    #[test]
    fn absorption_violation_reports_index() {
        let p = CadlagPath::from_parts(
            PathKind::Event,
            vec![0.0, 1.0, 2.0],
            vec![fin(2.0), fin(0.0), fin(3.0)],
            Terminal::Zero,
            None,
        );
        let v = p.validate().unwrap_err();
        assert_eq!(v, Violation::AbsorptionBroken { index: 2 });
        assert_eq!(v.to_string(), "absorption broken at index 2");
    }

    #[test]
    fn grid_without_terminal_is_flagged() {
        let p = CadlagPath::from_parts(
            PathKind::Grid { step: 1.0 },
            vec![0.0, 1.0, 2.0],
            vec![fin(1.0), fin(3.0), fin(5.0)],
            Terminal::Zero,
            None,
        );
        assert_eq!(p.validate().unwrap_err().to_string(), "terminal unreachable");
        let truncated = CadlagPath::from_parts(
            PathKind::Grid { step: 1.0 },
            vec![0.0, 1.0, 2.0],
            vec![fin(1.0), fin(3.0), fin(5.0)],
            Terminal::Zero,
            Some(Horizon::new(2.0).unwrap()),
        );
        assert_eq!(truncated.validate(), Ok(()));
    }

    #[test]
    fn null_jump_and_ordering() {
        let p = CadlagPath::from_parts(
            PathKind::Event,
            vec![0.0, 1.0, 2.0],
            vec![fin(1.0), fin(1.0), fin(0.0)],
            Terminal::Zero,
            None,
        );
        assert_eq!(p.validate(), Err(Violation::NullJump { index: 1 }));
        let q = CadlagPath::from_parts(
            PathKind::Event,
            vec![0.0, 2.0, 2.0],
            vec![fin(1.0), fin(2.0), fin(0.0)],
            Terminal::Zero,
            None,
        );
        assert_eq!(q.validate(), Err(Violation::NotIncreasing { index: 2 }));
    }

    #[test]
    fn eval_is_right_continuous() {
        let p = step_130();
        assert_eq!(p.eval(1.0).unwrap(), fin(3.0));
        assert_eq!(p.eval(0.999).unwrap(), fin(1.0));
        assert_eq!(p.eval(10.0).unwrap(), fin(0.0));
        assert!(matches!(p.eval(-1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn eval_past_horizon_fails() {
        let p = CadlagPath::event(
            vec![0.0, 1.0],
            vec![fin(1.0), fin(2.0)],
            Terminal::Zero,
            Some(Horizon::new(3.0).unwrap()),
        )
        .unwrap();
        assert_eq!(p.eval(3.0).unwrap(), fin(2.0));
        assert!(matches!(p.eval(3.5), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn grid_eval_interpolates_and_holds_before_infinity() {
        let p = CadlagPath::grid(
            1.0,
            vec![fin(1.0), fin(3.0), ExtReal::Infinity],
            Terminal::Infinity,
            None,
        )
        .unwrap();
        assert_eq!(p.eval(0.5).unwrap(), fin(2.0));
        assert_eq!(p.eval(1.5).unwrap(), fin(3.0));
        assert_eq!(p.eval(2.0).unwrap(), ExtReal::Infinity);
        assert_eq!(p.eval(100.0).unwrap(), ExtReal::Infinity);
    }

    #[test]
    fn jumps_of_step_paths() {
        let p = step_130();
        let j = p.jumps().unwrap();
        assert_eq!(
            j,
            vec![
                Jump { time: 1.0, size: JumpSize::Finite(2.0) },
                Jump { time: 2.0, size: JumpSize::Finite(-3.0) },
            ]
        );
        assert!(CadlagPath::<f64>::constant_zero().jumps().unwrap().is_empty());
        let kill = CadlagPath::event(
            vec![0.0, 1.0],
            vec![fin(1.0), ExtReal::Infinity],
            Terminal::Infinity,
            None,
        )
        .unwrap();
        assert_eq!(
            kill.jumps().unwrap(),
            vec![Jump { time: 1.0, size: JumpSize::PlusInfinity }]
        );
        let g = CadlagPath::grid(1.0, vec![fin(1.0), fin(0.0)], Terminal::Zero, None).unwrap();
        assert!(matches!(g.jumps(), Err(Error::UnsupportedKind(_))));
    }

    #[test]
    fn infinity_absorbs_addition() {
        assert_eq!(fin(2.0) + ExtReal::Infinity, ExtReal::Infinity);
        assert_eq!(fin(2.0) + fin(3.0), fin(5.0));
        assert!(fin(1e300) < ExtReal::Infinity);
    }

    #[test]
    fn csv_round_trip() {
        let p = CadlagPath::event(
            vec![0.0, 0.25, 1.5],
            vec![fin(2.0), fin(7.5), ExtReal::Infinity],
            Terminal::Infinity,
            None,
        )
        .unwrap();
        let text = p.to_csv();
        assert!(text.starts_with("t,value\n"));
        assert!(text.ends_with("# terminal=inf kind=event horizon=none\n"));
        assert_eq!(CadlagPath::<f64>::from_csv(&text).unwrap(), p);

        let g = CadlagPath::grid(
            0.5,
            vec![fin(1.0), fin(2.0), fin(4.0)],
            Terminal::Zero,
            Some(Horizon::new(1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(CadlagPath::<f64>::from_csv(&g.to_csv()).unwrap(), g);
    }

    #[test]
    fn csv_rejects_garbage() {
        assert!(CadlagPath::<f64>::from_csv("x,y\n").is_err());
        assert!(CadlagPath::<f64>::from_csv("t,value\n0,1\n").is_err());
        assert!(CadlagPath::<f64>::from_csv("t,value\n0,1\n# terminal=2 kind=event horizon=none").is_err());
    }
}
