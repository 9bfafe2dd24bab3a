//! Branching mechanisms `Ψ`, the cumulant flow `u_t(λ)` and the inverse `φ`.
//!
//! A mechanism is the Laplace exponent of a spectrally positive Lévy process,
//! `E_x[e^{-λ X_t}] = e^{-λx + tΨ(λ)}`. Assembled from a triplet it reads
//!
//! ```text
//! Ψ(λ) = -q - aλ + σ²λ²/2 + Σ rate · (e^{-λr} - 1 + λr·1{r<1})
//! ```
//!
//! where the killing mass `q` is an atom at `r = ∞`. The flow solves
//! `∂u/∂t = -Ψ(u)`, `u_0 = λ`, and the CSBP with this mechanism satisfies
//! `E_z[e^{-λ Z_t}] = e^{-z u_t(λ)}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode::{self, Tolerance};
use crate::paths::ExtReal;
use crate::scalar::Real;
use crate::simulate::DsbpSpec;

/// Jumps below this size are compensated in the Lévy–Itô decomposition.
pub const COMPENSATION_THRESHOLD: f64 = 1.0;

/// One atom `rate · δ_size` of the Lévy measure; `size = ∞` is killing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpAtom<S> {
    pub size: ExtReal<S>,
    pub rate: S,
}

/// Drift, Gaussian coefficient and finite atomic Lévy measure.
#[derive(Clone, Debug, PartialEq)]
pub struct LevyTriplet<S> {
    pub drift: S,
    pub sigma: S,
    atoms: Vec<JumpAtom<S>>,
    /// Jumps smaller than this were removed from an infinite-activity
    /// measure; `0` when the measure was atomic to begin with.
    pub small_jump_cutoff: S,
}

impl<S: Real> LevyTriplet<S> {
    pub fn new(drift: S, sigma: S, atoms: Vec<JumpAtom<S>>) -> Result<Self> {
        if !drift.is_finite() {
            return Err(invalid("drift", "must be finite"));
        }
        if !(sigma >= S::zero()) || !sigma.is_finite() {
            return Err(invalid("sigma", "must be finite and nonnegative"));
        }
        let mut infinite = 0;
        for a in &atoms {
            if !(a.rate > S::zero()) || !a.rate.is_finite() {
                return Err(invalid("atoms", "rates must be positive and finite"));
            }
            match a.size {
                ExtReal::Finite(r) if !(r > S::zero()) || !r.is_finite() => {
                    return Err(invalid("atoms", "sizes must be positive"));
                }
                ExtReal::Infinity => infinite += 1,
                _ => {}
            }
        }
        if infinite > 1 {
            return Err(invalid("atoms", "at most one atom at infinity"));
        }
        Ok(LevyTriplet {
            drift,
            sigma,
            atoms,
            small_jump_cutoff: S::zero(),
        })
    }

    /// Triplet with atoms given as `(size, rate)` pairs and an optional
    /// killing rate.
    pub fn from_pairs(drift: S, sigma: S, atoms: &[(S, S)], killing: S) -> Result<Self> {
        let mut list: Vec<_> = atoms
            .iter()
            .map(|&(r, rate)| JumpAtom {
                size: if r.is_infinite() {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(r)
                },
                rate,
            })
            .collect();
        if killing > S::zero() {
            list.push(JumpAtom {
                size: ExtReal::Infinity,
                rate: killing,
            });
        } else if killing < S::zero() {
            return Err(invalid("killing", "must be nonnegative"));
        }
        Self::new(drift, sigma, list)
    }

    pub fn atoms(&self) -> &[JumpAtom<S>] {
        &self.atoms
    }

    /// Killing mass `q`.
    pub fn killing_rate(&self) -> S {
        self.atoms
            .iter()
            .filter(|a| a.size.is_infinite())
            .fold(S::zero(), |acc, a| acc + a.rate)
    }

    /// Total mass of the Lévy measure, killing included.
    pub fn total_rate(&self) -> S {
        self.atoms.iter().fold(S::zero(), |acc, a| acc + a.rate)
    }

    /// `Σ_{r<1} r · rate`, the compensator of the small jumps.
    pub fn compensation(&self) -> S {
        let one = S::lit(COMPENSATION_THRESHOLD);
        self.atoms
            .iter()
            .filter_map(|a| a.size.finite().filter(|r| *r < one).map(|r| r * a.rate))
            .fold(S::zero(), |acc, x| acc + x)
    }

    /// Drift of the path between jumps once compensation is folded in.
    pub fn effective_drift(&self) -> S {
        self.drift - self.compensation()
    }

    /// Delete atoms smaller than `eps`. Compensated atoms carry no linear
    /// term, so only deleted atoms in `[1, eps)` are replaced by drift.
    pub fn truncate_small_jumps(&self, eps: S) -> Self {
        let one = S::lit(COMPENSATION_THRESHOLD);
        let mut drift = self.drift;
        let mut kept = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            match a.size {
                ExtReal::Finite(r) if r < eps => {
                    if r >= one {
                        drift = drift + r * a.rate;
                    }
                }
                _ => kept.push(*a),
            }
        }
        LevyTriplet {
            drift,
            sigma: self.sigma,
            atoms: kept,
            small_jump_cutoff: self.small_jump_cutoff.max(eps),
        }
    }

    /// Replace a Lévy measure on `[eps, ∞)` given by its tail
    /// `tail(r) = Λ([r, ∞))` with `n_atoms` atoms of equal mass placed at the
    /// mass-median of each quantile bin on `[eps, r_max]`. Mass beyond `r_max`
    /// is lumped into one atom at `r_max`.
    pub fn atomized(
        drift: S,
        sigma: S,
        tail: impl Fn(S) -> S,
        eps: S,
        r_max: S,
        n_atoms: usize,
    ) -> Result<Self> {
        if !(eps > S::zero()) || !(r_max > eps) || n_atoms == 0 {
            return Err(invalid("atomization", "need 0 < eps < r_max and n_atoms > 0"));
        }
        let top = tail(eps);
        let beyond = tail(r_max);
        let mass = top - beyond;
        let mut atoms = Vec::with_capacity(n_atoms + 1);
        let n = S::from_usize(n_atoms).expect("atom count");
        let quantile = |level: S| -> S {
            // smallest r with Λ([eps, r)) >= level, by bisection
            let (mut lo, mut hi) = (eps, r_max);
            for _ in 0..200 {
                let mid = (lo + hi) / S::lit(2.0);
                if top - tail(mid) < level {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo + hi) / S::lit(2.0)
        };
        if mass > S::zero() {
            for j in 0..n_atoms {
                let level = (S::from_usize(j).expect("index") + S::lit(0.5)) * mass / n;
                atoms.push(JumpAtom {
                    size: ExtReal::Finite(quantile(level)),
                    rate: mass / n,
                });
            }
        }
        if beyond > S::zero() {
            atoms.push(JumpAtom {
                size: ExtReal::Finite(r_max),
                rate: beyond,
            });
        }
        let mut t = Self::new(drift, sigma, atoms)?;
        t.small_jump_cutoff = eps;
        Ok(t)
    }

    pub fn psi(&self, lambda: S) -> S {
        let one = S::lit(COMPENSATION_THRESHOLD);
        let mut acc = -self.drift * lambda + self.sigma * self.sigma * lambda * lambda / S::lit(2.0);
        for a in &self.atoms {
            acc = acc
                + match a.size {
                    ExtReal::Infinity => -a.rate,
                    ExtReal::Finite(r) => {
                        let comp = if r < one { lambda * r } else { S::zero() };
                        a.rate * ((-lambda * r).exp_m1() + comp)
                    }
                };
        }
        acc
    }
}

/// Rescaled compound Poisson skeleton `S^a_b(X)` where `X` jumps by `k - 1`
/// at rate `μ_k` (`k ∈ {0, 2, 3, …} ∪ {∞}`):
/// `Ψ(λ) = a Σ_k μ_k (e^{-λ(k-1)/b} - 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSkeleton<S> {
    pub spec: DsbpSpec<S>,
    pub time_scale: S,
    pub space_scale: S,
}

impl<S: Real> LatticeSkeleton<S> {
    pub fn psi(&self, lambda: S) -> S {
        let x = lambda / self.space_scale;
        let mut acc = S::zero();
        for &(k, rate) in self.spec.finite_offspring() {
            let step = S::from_u64(k).expect("offspring") - S::one();
            acc = acc + rate * (-x * step).exp_m1();
        }
        acc = acc - self.spec.infinite_offspring();
        self.time_scale * acc
    }
}

/// A branching mechanism.
#[derive(Clone, Debug, PartialEq)]
pub enum Mechanism<S> {
    Triplet(LevyTriplet<S>),
    Lattice(LatticeSkeleton<S>),
    /// `Ψ(u) = c u²`.
    Quadratic { c: S },
    /// `Ψ(u) = c u² - r u`.
    Logistic { c: S, r: S },
    /// `Ψ(u) = c u`.
    Linear { c: S },
    /// `Ψ(u) = c` (a killing rate `-c` when `c < 0`).
    Constant { c: S },
    /// `Ψ(u) = b (e^{-u} - 1) + d (e^{u} - 1)`.
    BirthDeath { birth: S, death: S },
}

/// Largest zero `Φ` of a mechanism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Root<S> {
    Finite(S),
    /// `Ψ < 0` on the whole search range: the Lévy process is a (possibly
    /// killed) subordinator and never hits `0`.
    AtInfinity,
}

impl<S: Real> Root<S> {
    pub fn finite(self) -> Option<S> {
        match self {
            Root::Finite(x) => Some(x),
            Root::AtInfinity => None,
        }
    }

    /// Extinction probability `e^{-xΦ}` from `x`.
    pub fn extinction_probability(self, x: S) -> S {
        match self {
            Root::Finite(phi) => (-x * phi).exp(),
            Root::AtInfinity => {
                if x.is_zero() {
                    S::one()
                } else {
                    S::zero()
                }
            }
        }
    }
}

/// Right end of the bracketing search for roots of `Ψ`.
const SEARCH_LIMIT: f64 = 1e12;
const ROOT_TOL: f64 = 1e-12;

impl<S: Real> Mechanism<S> {
    pub fn quadratic(c: S) -> Self {
        Mechanism::Quadratic { c }
    }

    pub fn birth_death(birth: S, death: S) -> Self {
        Mechanism::BirthDeath { birth, death }
    }

    /// Feller diffusion `Ψ(u) = σ² u² / 2` as a triplet.
    pub fn feller(sigma: S) -> Self {
        Mechanism::Triplet(
            LevyTriplet::new(S::zero(), sigma, Vec::new()).expect("valid Feller triplet"),
        )
    }

    pub fn psi(&self, lambda: S) -> Result<S> {
        if !(lambda >= S::zero()) {
            return Err(Error::Domain(format!(
                "Ψ is defined on [0, ∞), got λ = {}",
                lambda.to_f64_lossy()
            )));
        }
        Ok(self.psi_unchecked(lambda))
    }

    fn psi_unchecked(&self, u: S) -> S {
        match self {
            Mechanism::Triplet(t) => t.psi(u),
            Mechanism::Lattice(l) => l.psi(u),
            Mechanism::Quadratic { c } => *c * u * u,
            Mechanism::Logistic { c, r } => *c * u * u - *r * u,
            Mechanism::Linear { c } => *c * u,
            Mechanism::Constant { c } => *c,
            Mechanism::BirthDeath { birth, death } => *birth * (-u).exp_m1() + *death * u.exp_m1(),
        }
    }

    /// `q = -Ψ(0)`.
    pub fn killing_rate(&self) -> S {
        -self.psi_unchecked(S::zero())
    }

    /// `u_t(λ)`: solution of `∂u/∂t = -Ψ(u)`, `u_0 = λ`, with local error
    /// `tol`, clamped to `[0, ∞)`. Fails with [`Error::BlowUp`] when `u`
    /// diverges before `t`.
    pub fn flow(&self, lambda: S, t: S, tol: S) -> Result<S> {
        Ok(self.flow_at(lambda, &[t], tol)?[0])
    }

    /// `u_t(λ)` at each of the nondecreasing `times`.
    pub fn flow_at(&self, lambda: S, times: &[S], tol: S) -> Result<Vec<S>> {
        if !(lambda >= S::zero()) {
            return Err(Error::Domain("λ must be nonnegative".into()));
        }
        if !(tol > S::zero()) {
            return Err(Error::Domain("tolerance must be positive".into()));
        }
        if times.iter().any(|t| !(*t >= S::zero())) {
            return Err(Error::NegativeTime(f64::NAN));
        }
        let rhs = |u: S| -self.psi_unchecked(u.max(S::zero()));
        let mut out = ode::integrate_at(rhs, lambda, times, Tolerance::uniform(tol))?;
        for u in &mut out {
            *u = u.max(S::zero());
        }
        Ok(out)
    }

    /// `|u_{t+s}(λ) - u_t(u_s(λ))|`.
    pub fn semigroup_defect(&self, lambda: S, s: S, t: S, tol: S) -> Result<S> {
        if s.is_zero() {
            return Ok(S::zero());
        }
        let direct = self.flow(lambda, t + s, tol)?;
        let composed = self.flow(self.flow(lambda, s, tol)?, t, tol)?;
        Ok((direct - composed).abs())
    }

    /// Largest root `Φ` of `Ψ`, by bracketing and bisection.
    pub fn largest_root(&self) -> Result<Root<S>> {
        let psi0 = self.psi_unchecked(S::zero());
        if psi0 > S::zero() {
            return Err(Error::Domain("Ψ(0) > 0 is not a branching mechanism".into()));
        }
        let limit = S::lit(SEARCH_LIMIT);
        let mut hi = S::one();
        while !(self.psi_unchecked(hi) > S::zero()) {
            hi = hi * S::lit(2.0);
            if hi > limit {
                return Ok(Root::AtInfinity);
            }
        }
        let lo = S::zero();
        Ok(Root::Finite(self.bisect(lo, hi, |v| v <= S::zero()).0))
    }

    /// The unique `x ≥ Φ` with `Ψ(x) = λ`.
    pub fn phi(&self, lambda: S) -> Result<S> {
        if !(lambda >= S::zero()) {
            return Err(Error::Domain("φ is defined on [0, ∞)".into()));
        }
        let root = self
            .largest_root()?
            .finite()
            .ok_or_else(|| Error::Domain("Ψ has no finite root; φ undefined".into()))?;
        if lambda.is_zero() {
            return Ok(root);
        }
        let limit = S::lit(SEARCH_LIMIT);
        let mut hi = root.max(S::one()) * S::lit(2.0);
        while self.psi_unchecked(hi) < lambda {
            hi = hi * S::lit(2.0);
            if hi > limit {
                return Err(Error::Domain(format!(
                    "λ = {} is outside the range of Ψ",
                    lambda.to_f64_lossy()
                )));
            }
        }
        let (lo, hi) = self.bisect(root, hi, |v| v < lambda);
        Ok((lo + hi) / S::lit(2.0))
    }

    /// Bisection for the boundary of `{x : below(Ψ(x))}` in `[lo, hi]`,
    /// assuming `below` holds at `lo` and fails at `hi`. Returns the final
    /// bracket.
    fn bisect(&self, mut lo: S, mut hi: S, below: impl Fn(S) -> bool) -> (S, S) {
        let tol = S::lit(ROOT_TOL);
        for _ in 0..400 {
            if hi - lo <= tol * S::one().max(hi.abs()) {
                break;
            }
            let mid = (lo + hi) / S::lit(2.0);
            if mid <= lo || mid >= hi {
                break;
            }
            if below(self.psi_unchecked(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, hi)
    }

    /// Smallest second difference of `Ψ` over the grid `0, h, 2h, …, top`.
    pub fn min_second_difference(&self, h: S, top: S) -> S {
        let n = (top / h).round().to_usize().unwrap_or(0);
        let mut worst = S::infinity();
        for i in 1..n {
            let x = S::from_usize(i).expect("index") * h;
            let d = self.psi_unchecked(x - h) - S::lit(2.0) * self.psi_unchecked(x)
                + self.psi_unchecked(x + h);
            worst = worst.min(d);
        }
        worst
    }

    /// Tabulate `u_t(λ)` on a rectangular grid.
    pub fn flow_table(&self, lambdas: &[S], times: &[S], tol: S) -> Result<FlowTable<S>> {
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&a, &b| times[a].partial_cmp(&times[b]).expect("finite times"));
        let sorted: Vec<S> = order.iter().map(|&i| times[i]).collect();
        let mut values = Vec::with_capacity(lambdas.len());
        for &lambda in lambdas {
            let row_sorted = self.flow_at(lambda, &sorted, tol)?;
            let mut row = vec![S::zero(); times.len()];
            for (pos, &i) in order.iter().enumerate() {
                row[i] = row_sorted[pos];
            }
            values.push(row);
        }
        Ok(FlowTable {
            lambdas: lambdas.to_vec(),
            times: times.to_vec(),
            values,
            tol,
        })
    }
}

/// `u_t(λ)` on a grid: `values[i][j] = u_{times[j]}(lambdas[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTable<S> {
    pub lambdas: Vec<S>,
    pub times: Vec<S>,
    pub values: Vec<Vec<S>>,
    pub tol: S,
}

impl<S: Real + std::fmt::Display> FlowTable<S> {
    /// Whether `u` is nondecreasing in `λ` at every tabulated time (the
    /// `lambdas` must be sorted).
    pub fn is_monotone_in_lambda(&self) -> bool {
        (0..self.times.len()).all(|j| {
            self.values
                .windows(2)
                .all(|w| w[0][j] <= w[1][j])
        })
    }

    /// Wide CSV: one row per `λ`, one column per `t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda");
        for t in &self.times {
            out.push_str(&format!(",t={t}"));
        }
        out.push('\n');
        for (lambda, row) in self.lambdas.iter().zip(&self.values) {
            out.push_str(&lambda.to_string());
            for u in row {
                out.push_str(&format!(",{u}"));
            }
            out.push('\n');
        }
        out
    }

    /// Long CSV: `lambda,t,u`.
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("lambda,t,u\n");
        for (lambda, row) in self.lambdas.iter().zip(&self.values) {
            for (t, u) in self.times.iter().zip(row) {
                out.push_str(&format!("{lambda},{t},{u}\n"));
            }
        }
        out
    }
}

impl FlowTable<f64> {
    /// Parse the wide CSV written by [`FlowTable::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty flow table".into()))?;
        let mut cols = header.split(',');
        if cols.next() != Some("lambda") {
            return Err(Error::Parse("flow table must start with `lambda`".into()));
        }
        let times = cols
            .map(|c| {
                c.strip_prefix("t=")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| Error::Parse(format!("bad column `{c}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut lambdas = Vec::new();
        let mut values = Vec::new();
        for line in lines {
            let nums = line
                .split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad number `{x}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if nums.len() != times.len() + 1 {
                return Err(Error::Parse("ragged flow table".into()));
            }
            lambdas.push(nums[0]);
            values.push(nums[1..].to_vec());
        }
        Ok(FlowTable {
            lambdas,
            times,
            values,
            tol: f64::NAN,
        })
    }
}

/// Text form of a mechanism: either a triplet (`drift`, `sigma`, `atoms`,
/// `killing`) or a closed-form `tag` with its parameters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub birth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub death: Option<f64>,
}

impl MechanismConfig {
    pub fn to_mechanism(&self) -> Result<Mechanism<f64>> {
        match self.tag.as_deref() {
            None => Ok(Mechanism::Triplet(self.to_triplet()?)),
            Some(tag) => {
                if self.drift.is_some() || self.sigma.is_some() || self.atoms.is_some() {
                    return Err(invalid("tag", "closed-form tags take no triplet fields"));
                }
                let c = self.c.unwrap_or(1.0);
                Ok(match tag {
                    "quadratic" => Mechanism::Quadratic { c },
                    "logistic" => Mechanism::Logistic {
                        c,
                        r: self.r.unwrap_or(1.0),
                    },
                    "linear" => Mechanism::Linear { c },
                    "constant" => Mechanism::Constant { c },
                    "bd" => Mechanism::BirthDeath {
                        birth: self.birth.ok_or_else(|| invalid("birth", "required for bd"))?,
                        death: self.death.ok_or_else(|| invalid("death", "required for bd"))?,
                    },
                    other => return Err(invalid("tag", format!("unknown tag `{other}`"))),
                })
            }
        }
    }

    pub fn to_triplet(&self) -> Result<LevyTriplet<f64>> {
        if self.tag.is_some() {
            return Err(invalid("tag", "a triplet is required here"));
        }
        let atoms: Vec<(f64, f64)> = self
            .atoms
            .as_deref()
            .unwrap_or(&[])
            .iter()
            .map(|a| (a[0], a[1]))
            .collect();
        LevyTriplet::from_pairs(
            self.drift.unwrap_or(0.0),
            self.sigma.unwrap_or(0.0),
            &atoms,
            self.killing.unwrap_or(0.0),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Mechanism = super::Mechanism<f64>;
    type LevyTriplet = super::LevyTriplet<f64>;

    fn killing(q: f64) -> Mechanism {
        Mechanism::Triplet(LevyTriplet::from_pairs(0.0, 0.0, &[], q).unwrap())
    }

    #[test]
    fn psi_examples() {
        let k = killing(0.7);
        for l in [0.0, 0.5, 3.0, 100.0] {
            assert!((k.psi(l).unwrap() + 0.7).abs() < 1e-15);
        }
        assert_eq!(Mechanism::feller(1.0).psi(2.0).unwrap(), 2.0);
        let bd = Mechanism::birth_death(2.0, 1.0);
        assert!(bd.psi(2.0f64.ln()).unwrap().abs() < 1e-15);
        assert!(matches!(bd.psi(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn psi_matches_laplace_exponent_convention() {
        // compensated small atom and uncompensated large atom
        let t = LevyTriplet::from_pairs(0.3, 0.5, &[(0.5, 2.0), (2.0, 1.5)], 0.1).unwrap();
        let l = 1.7;
        let expected = -0.1 - 0.3 * l + 0.125 * l * l
            + 2.0 * ((-l * 0.5f64).exp() - 1.0 + l * 0.5)
            + 1.5 * ((-l * 2.0f64).exp() - 1.0);
        assert!((t.psi(l) - expected).abs() < 1e-14);
        assert!((t.effective_drift() - (0.3 - 1.0)).abs() < 1e-15);
        assert_eq!(t.killing_rate(), 0.1);
    }

    #[test]
    fn triplet_validation() {
        assert!(LevyTriplet::from_pairs(0.0, -1.0, &[], 0.0).is_err());
        assert!(LevyTriplet::from_pairs(0.0, 1.0, &[(0.0, 1.0)], 0.0).is_err());
        assert!(LevyTriplet::from_pairs(0.0, 1.0, &[(1.0, -1.0)], 0.0).is_err());
        assert!(LevyTriplet::from_pairs(0.0, 1.0, &[(f64::INFINITY, 1.0)], 1.0).is_err());
    }

    #[test]
    fn flow_examples() {
        let q = Mechanism::quadratic(1.0);
        assert!((q.flow(1.0, 1.0, 1e-10).unwrap() - 0.5).abs() < 1e-9);
        let k = killing(0.7);
        for t in [0.0, 0.3, 2.0] {
            assert!((k.flow(1.5, t, 1e-12).unwrap() - (1.5 + 0.7 * t)).abs() < 1e-12);
        }
        let lin = Mechanism::Linear { c: 1.0 };
        assert!((lin.flow(2.0, 2f64.ln(), 1e-10).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn semigroup_examples() {
        let q = Mechanism::quadratic(1.0);
        assert_eq!(q.semigroup_defect(1.0, 0.0, 0.7, 1e-10).unwrap(), 0.0);
        assert!(q.semigroup_defect(1.0, 0.5, 0.5, 1e-10).unwrap() < 1e-8);
        let bd = Mechanism::birth_death(2.0, 1.0);
        assert!(bd.semigroup_defect(1.0, 0.3, 0.7, 1e-10).unwrap() < 1e-6);
    }

    #[test]
    fn roots() {
        let logistic = Mechanism::Logistic { c: 1.0, r: 1.0 };
        assert!((logistic.largest_root().unwrap().finite().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(Mechanism::quadratic(1.0).largest_root().unwrap(), Root::Finite(0.0));
        let bd = Mechanism::birth_death(2.0, 1.0);
        let phi = bd.largest_root().unwrap().finite().unwrap();
        assert!((phi - 2f64.ln()).abs() < 1e-12);
        assert!(bd.psi(phi).unwrap().abs() < 1e-10);
        let subordinator = Mechanism::Triplet(LevyTriplet::from_pairs(1.0, 0.0, &[(1.0, 1.0)], 0.5).unwrap());
        assert_eq!(subordinator.largest_root().unwrap(), Root::AtInfinity);
        assert!(Mechanism::Constant { c: 1.0 }.largest_root().is_err());
    }

    #[test]
    fn phi_examples() {
        let q = Mechanism::quadratic(1.0);
        assert!((q.phi(4.0).unwrap() - 2.0).abs() < 1e-12);
        let bd = Mechanism::birth_death(2.0, 1.0);
        assert_eq!(bd.phi(0.0).unwrap(), bd.largest_root().unwrap().finite().unwrap());
        let x = bd.phi(1.0).unwrap();
        // independent fine-grid scan of 2e^{-x} + e^{x} - 3 = 1 on [ln 2, 3]
        let mut best = (f64::INFINITY, 0.0);
        let n = 3_000_000;
        for i in 0..=n {
            let y = 2f64.ln() + (3.0 - 2f64.ln()) * i as f64 / n as f64;
            let gap = (2.0 * (-y).exp() + y.exp() - 3.0 - 1.0).abs();
            if gap < best.0 {
                best = (gap, y);
            }
        }
        assert!((x - best.1).abs() < 1e-6, "{x} vs {}", best.1);
        assert!((bd.psi(x).unwrap() - 1.0).abs() < 1e-10);
        assert!(q.phi(-1.0).is_err());
    }

    #[test]
    fn lattice_skeleton_matches_birth_death_tag() {
        let spec = DsbpSpec::birth_death(2.0, 1.0).unwrap();
        let lattice = Mechanism::Lattice(LatticeSkeleton {
            spec,
            time_scale: 1.0,
            space_scale: 1.0,
        });
        let tag = Mechanism::birth_death(2.0, 1.0);
        for i in 0..=100 {
            let l = i as f64 * 0.1;
            let (a, b) = (lattice.psi(l).unwrap(), tag.psi(l).unwrap());
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "λ={l}: {a} vs {b}");
        }
    }

    #[test]
    fn mechanisms_are_convex() {
        let mechs = [
            Mechanism::quadratic(1.0),
            Mechanism::Logistic { c: 1.0, r: 1.0 },
            Mechanism::birth_death(2.0, 1.0),
            Mechanism::feller(1.3),
            killing(0.4),
            Mechanism::Triplet(LevyTriplet::from_pairs(-0.4, 0.2, &[(0.3, 1.0), (4.0, 0.7)], 0.2).unwrap()),
        ];
        for m in &mechs {
            assert!(m.min_second_difference(0.1, 10.0) >= -1e-9, "{m:?}");
        }
    }

    #[test]
    fn truncation_preserves_linear_term() {
        let t = LevyTriplet::from_pairs(0.5, 0.0, &[(0.01, 10.0), (1.5, 2.0), (3.0, 1.0)], 0.0).unwrap();
        let cut = t.truncate_small_jumps(2.0);
        assert_eq!(cut.atoms().len(), 1);
        assert!((cut.drift - (0.5 + 3.0)).abs() < 1e-15);
        assert_eq!(cut.small_jump_cutoff, 2.0);
        // derivative at 0 is unchanged
        let h = 1e-6;
        let d0 = (t.psi(h) - t.psi(0.0)) / h;
        let d1 = (cut.psi(h) - cut.psi(0.0)) / h;
        assert!((d0 - d1).abs() < 1e-4, "{d0} vs {d1}");
    }

    #[test]
    fn atomization_conserves_mass() {
        // Λ(dr) = r^{-2} dr on [0.1, ∞): tail(r) = 1/r
        let t = LevyTriplet::atomized(0.0, 0.0, |r: f64| 1.0 / r, 0.1, 50.0, 20).unwrap();
        assert!((t.total_rate() - 10.0).abs() < 1e-9);
        assert_eq!(t.atoms().len(), 21);
        assert_eq!(t.small_jump_cutoff, 0.1);
    }

    #[test]
    fn flow_table_monotone() {
        let m = Mechanism::birth_death(2.0, 1.0);
        let table = m
            .flow_table(&[0.5, 1.0, 2.0, 4.0], &[0.0, 0.5, 1.0, 2.0], 1e-10)
            .unwrap();
        assert!(table.is_monotone_in_lambda());
        for (i, l) in table.lambdas.iter().enumerate() {
            assert_eq!(table.values[i][0], *l);
        }
        let back = FlowTable::from_csv(&table.to_csv()).unwrap();
        assert_eq!(back.values, table.values);
    }

    #[test]
    fn config_parsing() {
        let cfg = MechanismConfig {
            tag: Some("bd".into()),
            birth: Some(2.0),
            death: Some(1.0),
            ..Default::default()
        };
        assert_eq!(cfg.to_mechanism().unwrap(), Mechanism::birth_death(2.0, 1.0));
        let bad = MechanismConfig {
            tag: Some("cubic".into()),
            ..Default::default()
        };
        assert!(bad.to_mechanism().is_err());
        let triplet = MechanismConfig {
            sigma: Some(1.0),
            atoms: Some(vec![[0.5, 1.0]]),
            killing: Some(0.2),
            ..Default::default()
        };
        let m = triplet.to_mechanism().unwrap();
        assert!((m.killing_rate() - 0.2).abs() < 1e-15);
    }
}
