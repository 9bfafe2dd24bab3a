use crate::error::{invalid, Result};
use crate::mechanism::LevyTriplet;
use crate::paths::{CadlagPath, ExtReal, Horizon, PathKind, Terminal};
use crate::scalar::Real;

use super::RngStream;

/// Atom sizes (`None` for `∞`) and cumulative rates of a triplet.
struct JumpLaw {
    sizes: Vec<Option<f64>>,
    cum: Vec<f64>,
}

impl JumpLaw {
    fn new<S: Real>(t: &LevyTriplet<S>) -> Self {
        let mut sizes = Vec::new();
        let mut cum = Vec::new();
        let mut acc = 0.0;
        for a in t.atoms() {
            sizes.push(a.size.finite().map(|r| r.to_f64_lossy()));
            acc += a.rate.to_f64_lossy();
            cum.push(acc);
        }
        JumpLaw { sizes, cum }
    }

    fn total(&self) -> f64 {
        self.cum.last().copied().unwrap_or(0.0)
    }

    fn draw(&self, rng: &mut RngStream) -> Option<f64> {
        self.sizes[rng.categorical(&self.cum)]
    }
}

fn lit<S: Real>(x: f64) -> S {
    S::from_f64(x).expect("finite")
}

fn ext<S: Real>(x: f64) -> ExtReal<S> {
    if x.is_infinite() {
        ExtReal::Infinity
    } else {
        ExtReal::Finite(lit(x))
    }
}

fn check_args(x0: f64, horizon: f64, step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(invalid("step", "must be positive"));
    }
    if !(horizon > 0.0) {
        return Err(invalid("horizon", "must be positive"));
    }
    if !(x0 >= 0.0) {
        return Err(invalid("x0", "must be nonnegative"));
    }
    Ok(())
}

/// Finish a path: absorbed paths lose their horizon, others keep it.
fn finish<S: Real>(
    kind: PathKind<S>,
    times: Vec<f64>,
    values: Vec<f64>,
    horizon: f64,
) -> CadlagPath<S> {
    let last = *values.last().expect("node");
    let (terminal, horizon) = if last == 0.0 {
        (Terminal::Zero, None)
    } else if last.is_infinite() {
        (Terminal::Infinity, None)
    } else {
        (Terminal::Zero, Some(Horizon::new(lit(horizon)).expect("positive horizon")))
    };
    CadlagPath::from_parts(
        kind,
        times.into_iter().map(lit).collect(),
        values.into_iter().map(ext).collect(),
        terminal,
        horizon,
    )
}

/// Exact pure-jump path in which jumps occur at rate `intensity(x)·Λ` from
/// state `x`. Used by both samplers when there is no continuous part.
fn pure_jump<S: Real>(
    law: &JumpLaw,
    x0: f64,
    horizon: f64,
    intensity: impl Fn(f64) -> f64,
    rng: &mut RngStream,
) -> CadlagPath<S> {
    if x0 == 0.0 {
        return CadlagPath::constant_zero();
    }
    let mut times = vec![0.0];
    let mut values = vec![x0];
    let mut x = x0;
    let mut now = 0.0;
    loop {
        now += rng.exponential(intensity(x) * law.total());
        if now > horizon {
            break;
        }
        x = match law.draw(rng) {
            Some(r) => x + r,
            None => f64::INFINITY,
        };
        times.push(now);
        values.push(x);
        if x.is_infinite() {
            break;
        }
    }
    finish(PathKind::Event, times, values, horizon)
}

/// Spectrally positive Lévy process from `x0`, stopped at `0`.
///
/// With no Gaussian part and no net drift the path is an exact event path.
/// Otherwise it is a grid path of step `step`: drift and Gaussian
/// increments on the grid plus exactly timed compound Poisson jumps; the
/// first crossing of `0` is located by linear interpolation and a killing
/// jump places an `∞` node at its own time.
pub fn sample_levy<S: Real>(
    triplet: &LevyTriplet<S>,
    x0: f64,
    horizon: f64,
    step: f64,
    rng: &mut RngStream,
) -> Result<CadlagPath<S>> {
    check_args(x0, horizon, step)?;
    let law = JumpLaw::new(triplet);
    let drift = triplet.effective_drift().to_f64_lossy();
    let sigma = triplet.sigma.to_f64_lossy();
    if sigma == 0.0 && drift == 0.0 {
        return Ok(pure_jump(&law, x0, horizon, |_| 1.0, rng));
    }
    if x0 == 0.0 {
        return Ok(CadlagPath::constant_zero());
    }
    let n_steps = (horizon / step - 1e-9).ceil().max(1.0) as u64;
    let mut times = vec![0.0];
    let mut values = vec![x0];
    let mut x = x0;
    let mut next_jump = rng.exponential(law.total());
    let sqrt_step = step.sqrt();
    for k in 1..=n_steps {
        let t0 = times.last().copied().expect("node");
        let t1 = (k as f64 * step).min(horizon);
        let dt = t1 - t0;
        let scale = if dt == step { sqrt_step } else { dt.sqrt() };
        let mut y = x + drift * dt + sigma * scale * rng.normal();
        let mut killed_at = None;
        while next_jump <= t1 {
            match law.draw(rng) {
                Some(r) => y += r,
                None => {
                    killed_at = Some(next_jump);
                    break;
                }
            }
            next_jump += rng.exponential(law.total());
        }
        if let Some(tk) = killed_at {
            if tk > t0 {
                times.push(tk);
                values.push(f64::INFINITY);
            } else {
                *values.last_mut().expect("node") = f64::INFINITY;
            }
            break;
        }
        if y <= 0.0 {
            let hit = if y == 0.0 { t1 } else { t0 + dt * x / (x - y) };
            if hit > t0 {
                times.push(hit);
                values.push(0.0);
            } else {
                *values.last_mut().expect("node") = 0.0;
            }
            break;
        }
        x = y;
        times.push(t1);
        values.push(x);
    }
    Ok(finish(PathKind::Grid { step: lit(step) }, times, values, horizon))
}

/// Output of [`sample_csbp_sde_logged`]: the path and every accepted jump as
/// `(time, size)`, `∞` for killing.
#[derive(Clone, Debug)]
pub struct SdeSample<S> {
    pub path: CadlagPath<S>,
    pub jumps: Vec<(f64, f64)>,
}

/// CSBP from `x0` by the thinned-jump SDE
/// `dZ = aZ dt + σ√Z dB + jumps at rate Z·Λ(dr)`.
pub fn sample_csbp_sde<S: Real>(
    triplet: &LevyTriplet<S>,
    x0: f64,
    horizon: f64,
    step: f64,
    rng: &mut RngStream,
) -> Result<CadlagPath<S>> {
    Ok(sample_csbp_sde_logged(triplet, x0, horizon, step, 1, rng)?.path)
}

/// As [`sample_csbp_sde`], recording only every `record_every`-th Euler
/// node (absorption nodes are always kept).
///
/// Between jumps the scheme is Euler–Maruyama with `√max(Z, 0)`. Jumps are
/// proposed in each step at rate `B·|Λ|` with the local bound
/// `B = Z(1 + 10√Δ) + 1`, and accepted with probability `Z_{s-}/B`, where
/// `Z_{s-}` interpolates the Euler step linearly plus jumps already accepted
/// in the step. If `Z_{s-}` ever exceeds `B` the proposals of the step are
/// redrawn with `B` doubled.
pub fn sample_csbp_sde_logged<S: Real>(
    triplet: &LevyTriplet<S>,
    x0: f64,
    horizon: f64,
    step: f64,
    record_every: usize,
    rng: &mut RngStream,
) -> Result<SdeSample<S>> {
    check_args(x0, horizon, step)?;
    if record_every == 0 {
        return Err(invalid("record_every", "must be positive"));
    }
    let law = JumpLaw::new(triplet);
    let drift = triplet.effective_drift().to_f64_lossy();
    let sigma = triplet.sigma.to_f64_lossy();
    let mut jumps = Vec::new();
    if sigma == 0.0 && drift == 0.0 {
        let path: CadlagPath<S> = pure_jump(&law, x0, horizon, |x| x, rng);
        if let Ok(js) = path.jumps() {
            for j in js {
                let size = match j.size {
                    crate::paths::JumpSize::Finite(r) => r.to_f64_lossy(),
                    _ => f64::INFINITY,
                };
                jumps.push((j.time.to_f64_lossy(), size));
            }
        }
        return Ok(SdeSample { path, jumps });
    }
    if x0 == 0.0 {
        return Ok(SdeSample {
            path: CadlagPath::constant_zero(),
            jumps,
        });
    }
    let n_steps = (horizon / step - 1e-9).ceil().max(1.0) as u64;
    let mass = law.total();
    let root_step = step.sqrt();
    let mut times = vec![0.0];
    let mut values = vec![x0];
    let mut z = x0;
    let mut t0 = 0.0;
    let mut accepted: Vec<(f64, Option<f64>)> = Vec::new();
    for k in 1..=n_steps {
        let t1 = (k as f64 * step).min(horizon);
        let dt = t1 - t0;
        let scale = if dt == step { root_step } else { dt.sqrt() };
        let end_cont = z + drift * z * dt + sigma * z.max(0.0).sqrt() * scale * rng.normal();
        let mut bound = z * (1.0 + 10.0 * root_step) + 1.0;
        let mut jump_total = 0.0;
        let mut killed_at = None;
        if mass > 0.0 {
            'propose: loop {
                accepted.clear();
                jump_total = 0.0;
                killed_at = None;
                let mut s = t0;
                loop {
                    s += rng.exponential(bound * mass);
                    if s > t1 {
                        break 'propose;
                    }
                    let frac = (s - t0) / dt;
                    let current = (z + frac * (end_cont - z)).max(0.0) + jump_total;
                    if current > bound {
                        bound *= 2.0;
                        continue 'propose;
                    }
                    if rng.uniform() * bound < current {
                        let size = law.draw(rng);
                        accepted.push((s, size));
                        match size {
                            Some(r) => jump_total += r,
                            None => {
                                killed_at = Some(s);
                                break 'propose;
                            }
                        }
                    }
                }
            }
            for &(s, r) in &accepted {
                jumps.push((s, r.unwrap_or(f64::INFINITY)));
            }
        }
        if let Some(tk) = killed_at {
            if tk > t0 && times.last().copied() != Some(tk) {
                times.push(tk);
                values.push(f64::INFINITY);
            } else {
                *values.last_mut().expect("node") = f64::INFINITY;
            }
            break;
        }
        let y = end_cont + jump_total;
        if y <= 0.0 {
            times.push(t1);
            values.push(0.0);
            break;
        }
        z = y;
        t0 = t1;
        if k as usize % record_every == 0 || k == n_steps {
            times.push(t1);
            values.push(z);
        }
    }
    let record_step = step * record_every as f64;
    let path = finish(PathKind::Grid { step: lit(record_step) }, times, values, horizon);
    Ok(SdeSample { path, jumps })
}
