use crate::error::{invalid, Result};
use crate::paths::{CadlagPath, ExtReal, Horizon, PathKind, Terminal};
use crate::scalar::Real;

use super::RngStream;

/// Offspring measure `(μ_k)` on `{0, 2, 3, …} ∪ {∞}`. An individual is
/// replaced by `k` children at rate `μ_k`; `μ_1 = 0` by definition.
#[derive(Clone, Debug, PartialEq)]
pub struct DsbpSpec<S> {
    finite: Vec<(u64, S)>,
    infinite: S,
    total: S,
    cum: Vec<f64>,
}

impl<S: Real> DsbpSpec<S> {
    /// Build from `(k, μ_k)` pairs and the mass `μ_∞`. Repeated `k` are
    /// merged and zero masses dropped.
    pub fn new(pairs: &[(u64, S)], infinite: S) -> Result<Self> {
        let mut finite: Vec<(u64, S)> = Vec::new();
        for &(k, m) in pairs {
            if !(m >= S::zero()) || !m.is_finite() {
                return Err(invalid(&format!("mu_{k}"), "masses must be finite and nonnegative"));
            }
            if k == 1 && m > S::zero() {
                return Err(invalid("mu_1", "must be 0 (k = 1 is not a jump)"));
            }
            if m.is_zero() {
                continue;
            }
            match finite.iter_mut().find(|(j, _)| *j == k) {
                Some(slot) => slot.1 = slot.1 + m,
                None => finite.push((k, m)),
            }
        }
        if !(infinite >= S::zero()) || !infinite.is_finite() {
            return Err(invalid("mu_inf", "must be finite and nonnegative"));
        }
        finite.sort_by_key(|(k, _)| *k);
        let total = finite.iter().fold(infinite, |acc, (_, m)| acc + *m);
        if !(total > S::zero()) {
            return Err(invalid("mu", "total mass must be positive"));
        }
        let mut cum = Vec::with_capacity(finite.len() + 1);
        let mut acc = 0.0;
        for (_, m) in &finite {
            acc += m.to_f64_lossy();
            cum.push(acc);
        }
        cum.push(acc + infinite.to_f64_lossy());
        Ok(DsbpSpec {
            finite,
            infinite,
            total,
            cum,
        })
    }

    /// Binary branching: two children at rate `birth`, none at rate `death`.
    pub fn birth_death(birth: S, death: S) -> Result<Self> {
        Self::new(&[(2, birth), (0, death)], S::zero())
    }

    pub fn finite_offspring(&self) -> &[(u64, S)] {
        &self.finite
    }

    pub fn infinite_offspring(&self) -> S {
        self.infinite
    }

    /// `λ = Σ μ_k`.
    pub fn total(&self) -> S {
        self.total
    }

    pub fn mass(&self, k: u64) -> S {
        self.finite
            .iter()
            .find(|(j, _)| *j == k)
            .map_or(S::zero(), |(_, m)| *m)
    }

    /// Draw a jump size `k - 1`; `None` is a jump to `∞`.
    pub fn draw_step(&self, rng: &mut RngStream) -> Option<i64> {
        let i = rng.categorical(&self.cum);
        self.finite.get(i).map(|(k, _)| *k as i64 - 1)
    }
}

/// Event-driven walk on `ℕ ∪ {∞}` with holding rate `rate(i)`, reporting
/// `(time, new state)` for each jump until absorption or `horizon`.
fn walk<S: Real>(
    spec: &DsbpSpec<S>,
    start: u64,
    horizon: f64,
    rate: impl Fn(u64) -> f64,
    rng: &mut RngStream,
    mut visit: impl FnMut(f64, Option<u64>),
) {
    let lambda = spec.total().to_f64_lossy();
    let mut state = start;
    let mut now = 0.0;
    while state > 0 {
        now += rng.exponential(rate(state) * lambda);
        if now > horizon {
            return;
        }
        match spec.draw_step(rng) {
            None => {
                visit(now, None);
                return;
            }
            Some(step) => {
                state = (state as i64 + step) as u64;
                visit(now, Some(state));
            }
        }
    }
}

fn collect_path<S: Real>(
    spec: &DsbpSpec<S>,
    start: u64,
    horizon: f64,
    rate: impl Fn(u64) -> f64,
    rng: &mut RngStream,
) -> CadlagPath<S> {
    if start == 0 {
        return CadlagPath::constant_zero();
    }
    let s = |x: f64| S::from_f64(x).expect("time");
    let mut times = vec![S::zero()];
    let mut values = vec![ExtReal::Finite(S::from_u64(start).expect("state"))];
    walk(spec, start, horizon, rate, rng, |t, v| {
        times.push(s(t));
        values.push(match v {
            Some(i) => ExtReal::Finite(S::from_u64(i).expect("state")),
            None => ExtReal::Infinity,
        });
    });
    let last = *values.last().expect("node");
    let (terminal, horizon) = if last.is_zero() {
        (Terminal::Zero, None)
    } else if last.is_infinite() {
        (Terminal::Infinity, None)
    } else {
        (Terminal::Zero, Some(Horizon::new(s(horizon)).expect("positive horizon")))
    };
    CadlagPath::from_parts(PathKind::Event, times, values, terminal, horizon)
}

/// Exact DSBP path from `i0`: at state `i` wait `Exp(iλ)`, then jump by
/// `k - 1` with probability `μ_k / λ`. Truncated at `horizon` unless absorbed.
pub fn sample_dsbp<S: Real>(
    spec: &DsbpSpec<S>,
    i0: u64,
    horizon: f64,
    rng: &mut RngStream,
) -> CadlagPath<S> {
    collect_path(spec, i0, horizon, |i| i as f64, rng)
}

/// Compound Poisson walk with the same jump law and `Exp(λ)` holding times,
/// stopped at `0`.
pub fn sample_compound_poisson<S: Real>(
    spec: &DsbpSpec<S>,
    x0: u64,
    horizon: f64,
    rng: &mut RngStream,
) -> CadlagPath<S> {
    collect_path(spec, x0, horizon, |_| 1.0, rng)
}

/// Values of a DSBP path at the nondecreasing `times` without storing the
/// path. Consumes the stream exactly like [`sample_dsbp`] up to the last time.
pub fn dsbp_marginals<S: Real>(
    spec: &DsbpSpec<S>,
    i0: u64,
    times: &[f64],
    rng: &mut RngStream,
) -> Vec<ExtReal<f64>> {
    let mut out = Vec::with_capacity(times.len());
    let horizon = times.last().copied().unwrap_or(0.0);
    let mut current = if i0 == 0 {
        ExtReal::zero()
    } else {
        ExtReal::Finite(i0 as f64)
    };
    let mut next = 0;
    walk(spec, i0, horizon, |i| i as f64, rng, |t, v| {
        while next < times.len() && times[next] < t {
            out.push(current);
            next += 1;
        }
        current = v.map_or(ExtReal::Infinity, |i| ExtReal::Finite(i as f64));
    });
    while out.len() < times.len() {
        out.push(current);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(DsbpSpec::<f64>::new(&[(1, 0.5)], 0.0).is_err());
        assert!(DsbpSpec::<f64>::new(&[(0, -0.5)], 0.0).is_err());
        assert!(DsbpSpec::<f64>::new(&[], 0.0).is_err());
        let s = DsbpSpec::<f64>::new(&[(2, 1.0), (0, 1.5), (2, 0.5)], 0.25).unwrap();
        assert_eq!(s.mass(2), 1.5);
        assert_eq!(s.total(), 3.25);
    }

    #[test]
    fn zero_start_is_constant() {
        let spec = DsbpSpec::<f64>::birth_death(1.0, 1.0).unwrap();
        let mut rng = RngStream::new(1, 0);
        assert_eq!(sample_dsbp(&spec, 0, 5.0, &mut rng), CadlagPath::constant_zero());
        assert_eq!(
            sample_compound_poisson(&spec, 0, 5.0, &mut rng),
            CadlagPath::constant_zero()
        );
    }

    #[test]
    fn pure_birth_increases() {
        let spec = DsbpSpec::<f64>::new(&[(2, 1.0)], 0.0).unwrap();
        let mut rng = RngStream::new(3, 1);
        let p = sample_dsbp(&spec, 1, 1.0, &mut rng);
        assert!(p.validate().is_ok());
        for j in p.jumps().unwrap() {
            assert_eq!(j.size, crate::paths::JumpSize::Finite(1.0));
        }
        assert!(p.is_truncated());
    }

    #[test]
    fn killing_only_jumps_to_infinity() {
        let spec = DsbpSpec::<f64>::new(&[], 0.5).unwrap();
        let mut rng = RngStream::new(3, 2);
        let p = sample_compound_poisson(&spec, 4, 1e9, &mut rng);
        assert_eq!(p.len(), 2);
        assert!(p.last_value().is_infinite());
        assert_eq!(p.terminal(), Terminal::Infinity);
    }

    #[test]
    fn marginals_agree_with_stored_path() {
        let spec = DsbpSpec::<f64>::birth_death(1.0, 1.2).unwrap();
        let times = [0.0, 0.3, 1.0, 2.5];
        for stream in 0..50 {
            let p = sample_dsbp(&spec, 4, 2.5, &mut RngStream::new(9, stream));
            let m = dsbp_marginals(&spec, 4, &times, &mut RngStream::new(9, stream));
            for (t, v) in times.iter().zip(m) {
                assert_eq!(p.eval(*t).unwrap(), v);
            }
        }
    }
}
