//! Samplers: DSBPs and their compound Poisson skeletons, spectrally positive
//! Lévy processes stopped at `0`, CSBPs via the thinned-jump SDE, the
//! scaling operator `S^a_b` and the lattice approximation of a mechanism.

mod dsbp;
mod ensemble;
mod levy;
mod rng;

pub use dsbp::{dsbp_marginals, sample_compound_poisson, sample_dsbp, DsbpSpec};
pub use ensemble::PathEnsemble;
pub use levy::{sample_csbp_sde, sample_csbp_sde_logged, sample_levy, SdeSample};
pub use rng::{stream_id, RngStream};

use crate::error::{invalid, Error, Result};
use crate::mechanism::{LatticeSkeleton, LevyTriplet, Mechanism, COMPENSATION_THRESHOLD};
use crate::paths::{CadlagPath, Horizon, PathKind};
use crate::scalar::{Real, Scalar};

/// `S^a_b f (t) = f(at) / b`.
pub fn rescale<S: Scalar>(path: &CadlagPath<S>, a: S, b: S) -> Result<CadlagPath<S>> {
    if !(a > S::zero()) || !(b > S::zero()) {
        return Err(invalid("scale", "a and b must be positive"));
    }
    let kind = match path.kind() {
        PathKind::Event => PathKind::Event,
        PathKind::Grid { step } => PathKind::Grid { step: step / a },
    };
    let times = path.times().iter().map(|t| *t / a).collect();
    let values = path.values().iter().map(|v| v.div(b)).collect();
    let horizon = path.horizon().map(|h| Horizon::new(h.get() / a)).transpose()?;
    Ok(CadlagPath::from_parts(kind, times, values, path.terminal(), horizon))
}

/// Lattice skeleton approximating a mechanism at resolution `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DsbpApproximation<S> {
    pub n: u64,
    /// Offspring measure of the skeleton; jumps of `X_n` are atoms `k - 1`.
    pub spec: DsbpSpec<S>,
    /// Time factor `a_n = n²` of `S^{a_n}_n(X_n)`.
    pub a_n: S,
    /// Start `round(n x)`.
    pub x_n: u64,
    /// Exponent of `S^{a_n}_n(X_n)`.
    pub psi_n: Mechanism<S>,
}

impl<S: Real> DsbpApproximation<S> {
    /// Time factor for the DSBP: `L(S^a_b X) = S^{ab}_b L(X)`, so the
    /// branching process is rescaled by `S^{a_n/n}_n`.
    pub fn dsbp_time_scale(&self) -> S {
        self.a_n / S::from_u64(self.n).expect("resolution")
    }

    pub fn space_scale(&self) -> S {
        S::from_u64(self.n).expect("resolution")
    }
}

fn as_triplet<S: Real>(m: &Mechanism<S>) -> Result<LevyTriplet<S>> {
    let two = S::lit(2.0);
    let nonneg = |c: S| {
        if c >= S::zero() {
            Ok((two * c).sqrt())
        } else {
            Err(Error::Domain("a negative quadratic coefficient is not a mechanism".into()))
        }
    };
    match m {
        Mechanism::Triplet(t) => Ok(t.clone()),
        Mechanism::Quadratic { c } => LevyTriplet::new(S::zero(), nonneg(*c)?, Vec::new()),
        Mechanism::Logistic { c, r } => LevyTriplet::new(*r, nonneg(*c)?, Vec::new()),
        Mechanism::Linear { c } => LevyTriplet::new(-*c, S::zero(), Vec::new()),
        Mechanism::Constant { c } => LevyTriplet::from_pairs(S::zero(), S::zero(), &[], -*c),
        Mechanism::Lattice(_) | Mechanism::BirthDeath { .. } => Err(Error::Domain(
            "lattice mechanisms are their own skeleton".into(),
        )),
    }
}

/// Compound Poisson skeleton `X_n` with jumps in `{-1} ∪ ℕ ∪ {∞}` such that
/// `Ψ_n`, the exponent of `S^{n²}_n(X_n)`, approaches `Ψ`.
///
/// Recipe: `μ_∞ = q/n²`; each atom `ν δ_r` moves to the lattice point
/// `j = max(1, round(nr))` with `μ_{j+1} += ν/n²`; the remaining linear
/// coefficient `c = -a + Σ_{r<1} νr` and the Gaussian part are carried by a
/// birth–death pair with `δ - β = c/n` and `δ + β = max(σ², |c|/n)`. The
/// pair matches `cλ + σ²λ²/2` to second order.
pub fn dsbp_approximation<S: Real>(
    m: &Mechanism<S>,
    n: u64,
    x: S,
) -> Result<DsbpApproximation<S>> {
    if n == 0 {
        return Err(invalid("n", "resolution must be positive"));
    }
    if !(x >= S::zero()) {
        return Err(invalid("x", "start must be nonnegative"));
    }
    let t = as_triplet(m)?;
    let ns = S::from_u64(n).expect("resolution");
    let a_n = ns * ns;
    let one = S::lit(COMPENSATION_THRESHOLD);
    let mut pairs: Vec<(u64, S)> = Vec::new();
    let mut linear = -t.drift;
    for atom in t.atoms() {
        if let Some(r) = atom.size.finite() {
            if r < one {
                linear = linear + atom.rate * r;
            }
            let j = (r * ns).round().to_u64().unwrap_or(u64::MAX).max(1);
            pairs.push((j + 1, atom.rate / a_n));
        }
    }
    let diff = linear / ns;
    let sum = (t.sigma * t.sigma).max(diff.abs());
    let two = S::lit(2.0);
    let death = (sum + diff) / two;
    let birth = (sum - diff) / two;
    pairs.push((0, death));
    pairs.push((2, birth));
    let spec = DsbpSpec::new(&pairs, t.killing_rate() / a_n).map_err(|_| Error::Resolution {
        n,
        reason: "the skeleton has no jumps; try a larger n".into(),
    })?;
    let x_n = (x * ns)
        .round()
        .to_u64()
        .ok_or_else(|| Error::Resolution {
            n,
            reason: "start does not fit the lattice".into(),
        })?;
    let psi_n = Mechanism::Lattice(LatticeSkeleton {
        spec: spec.clone(),
        time_scale: a_n,
        space_scale: ns,
    });
    Ok(DsbpApproximation {
        n,
        spec,
        a_n,
        x_n,
        psi_n,
    })
}

/// `sup |Ψ_a - Ψ_b|` over `points + 1` equally spaced `λ ∈ [0, lambda_max]`.
pub fn exponent_gap<S: Real>(
    a: &Mechanism<S>,
    b: &Mechanism<S>,
    lambda_max: S,
    points: usize,
) -> Result<S> {
    let mut worst = S::zero();
    for i in 0..=points {
        let l = lambda_max * S::from_usize(i).expect("index") / S::from_usize(points).expect("count");
        worst = worst.max((a.psi(l)? - b.psi(l)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::ExtReal;

    type Mechanism = crate::mechanism::Mechanism<f64>;
    type LevyTriplet = crate::mechanism::LevyTriplet<f64>;

    #[test]
    fn rescale_examples() {
        let p = CadlagPath::steps(&[0.0, 2.0, 3.0], &[1.0, 4.0, 0.0], crate::Terminal::Zero).unwrap();
        assert_eq!(rescale(&p, 1.0, 1.0).unwrap(), p);
        let q = rescale(&p, 2.0, 4.0).unwrap();
        assert_eq!(q.times(), &[0.0, 1.0, 1.5]);
        assert_eq!(q.eval(1.0).unwrap(), ExtReal::Finite(1.0));
        assert!(rescale(&p, 0.0, 1.0).is_err());
    }

    #[test]
    fn quadratic_skeleton_close() {
        let m = Mechanism::quadratic(0.5);
        let approx = dsbp_approximation(&m, 100, 1.0).unwrap();
        assert_eq!(approx.x_n, 100);
        let gap = exponent_gap(&approx.psi_n, &m, 4.0, 400).unwrap();
        assert!(gap < 0.05, "{gap}");
        // Feller skeleton is critical binary branching at unit rate
        assert!((approx.spec.mass(0) - 0.5).abs() < 1e-15);
        assert!((approx.spec.mass(2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn skeleton_keeps_killing_and_atoms() {
        let t = LevyTriplet::from_pairs(0.2, 0.0, &[(0.5, 1.0), (3.0, 0.5)], 0.3).unwrap();
        let m = Mechanism::Triplet(t);
        let approx = dsbp_approximation(&m, 10, 2.0).unwrap();
        assert!((approx.spec.infinite_offspring() - 0.003).abs() < 1e-15);
        assert!(approx.spec.mass(31) > 0.0);
        assert!((approx.psi_n.killing_rate() - 0.3).abs() < 1e-12);
    }
}
