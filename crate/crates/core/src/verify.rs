//! Verification suites: each one runs an end-to-end experiment against an
//! analytic or independently simulated reference and reports pass/fail
//! checks.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lamperti;
use crate::mechanism::{LevyTriplet, Mechanism};
use crate::paths::{CadlagPath, ExtReal, JumpSize, Terminal};
use crate::simulate::{
    dsbp_approximation, dsbp_marginals, exponent_gap, sample_compound_poisson, sample_csbp_sde_logged,
    sample_dsbp, stream_id, DsbpSpec, PathEnsemble, RngStream,
};
use crate::skorohod;
use crate::stats::{self, Estimate, ReportRow, ALPHA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Roundtrip,
    Flow,
    DiscreteLamperti,
    CsbpLaplace,
    Branching,
    Extinction,
    HittingTime,
    Convergence,
    Example1,
    Jumps,
}

impl Suite {
    pub const ALL: [Suite; 10] = [
        Suite::Roundtrip,
        Suite::Flow,
        Suite::DiscreteLamperti,
        Suite::CsbpLaplace,
        Suite::Branching,
        Suite::Extinction,
        Suite::HittingTime,
        Suite::Convergence,
        Suite::Example1,
        Suite::Jumps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Roundtrip => "roundtrip",
            Suite::Flow => "flow",
            Suite::DiscreteLamperti => "discrete_lamperti",
            Suite::CsbpLaplace => "csbp_laplace",
            Suite::Branching => "branching",
            Suite::Extinction => "extinction",
            Suite::HittingTime => "hitting_time",
            Suite::Convergence => "convergence",
            Suite::Example1 => "example1",
            Suite::Jumps => "jumps",
        }
    }

    /// Wall-clock budget of the suite.
    pub fn budget(self) -> Duration {
        Duration::from_secs(match self {
            Suite::Roundtrip | Suite::Flow => 1,
            Suite::DiscreteLamperti | Suite::Extinction | Suite::HittingTime | Suite::Jumps => 60,
            Suite::CsbpLaplace | Suite::Convergence => 300,
            Suite::Branching => 600,
            Suite::Example1 => 10,
        })
    }

    pub fn run(self, seed: u64) -> Result<SuiteReport> {
        let start = Instant::now();
        let mut report = match self {
            Suite::Roundtrip => roundtrip(seed),
            Suite::Flow => flow(),
            Suite::DiscreteLamperti => discrete_lamperti(seed),
            Suite::CsbpLaplace => csbp_laplace(seed),
            Suite::Branching => branching(seed),
            Suite::Extinction => extinction(seed),
            Suite::HittingTime => hitting_time(seed),
            Suite::Convergence => convergence(seed),
            Suite::Example1 => example1(),
            Suite::Jumps => jumps(seed),
        }?;
        let elapsed = start.elapsed();
        report.elapsed = elapsed;
        report.check(
            "runtime",
            elapsed <= self.budget(),
            format!("{:.3} s (budget {} s)", elapsed.as_secs_f64(), self.budget().as_secs()),
        );
        Ok(report)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    /// Hypothesis-test rows.
    pub rows: Vec<ReportRow>,
    /// Extra named CSV outputs.
    pub artifacts: Vec<(String, String)>,
    pub elapsed: Duration,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            checks: Vec::new(),
            rows: Vec::new(),
            artifacts: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, id: &str, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            id: format!("{}.{id}", self.suite),
            pass,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn get(&self, id: &str) -> Option<&Check> {
        let full = format!("{}.{id}", self.suite);
        self.checks.iter().find(|c| c.id == full)
    }

    /// `check,pass,detail` lines; the runtime check reports its budget only.
    pub fn checks_csv(&self) -> String {
        let mut out = String::from("check,pass,detail\n");
        for c in &self.checks {
            let detail = if c.id.ends_with(".runtime") {
                format!("budget {} s", self.suite.budget().as_secs())
            } else {
                c.detail.replace('"', "'")
            };
            out.push_str(&format!(
                "{},{},\"{}\"\n",
                c.id,
                if c.pass { "pass" } else { "fail" },
                detail
            ));
        }
        out
    }

    pub fn tests_csv(&self) -> String {
        stats::report_csv(&self.rows)
    }
}

const SEED_BLOCKS: u64 = 3;

/// Distinct stream block per (experiment, seed block).
fn block(experiment: u64, seed_block: u64) -> u64 {
    experiment * 16 + seed_block
}

/// Random event path in `D` with 1 to 20 holding intervals.
pub fn random_event_path(rng: &mut RngStream) -> CadlagPath<f64> {
    let n = 1 + (rng.uniform() * 20.0) as usize;
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut now = 0.0;
    let mut last = f64::NAN;
    for _ in 0..n {
        let mut v = 0.05 + 10.0 * rng.uniform();
        if v == last {
            v += 1.0;
        }
        times.push(now);
        values.push(ExtReal::Finite(v));
        now += rng.exponential(1.0);
        last = v;
    }
    let terminal = if rng.uniform() < 0.5 {
        Terminal::Zero
    } else {
        Terminal::Infinity
    };
    times.push(now);
    values.push(terminal.value());
    CadlagPath::event(times, values, terminal, None).expect("valid random path")
}

fn roundtrip(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Roundtrip);
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let f = random_event_path(&mut RngStream::new(seed, stream_id(block(1, 0), i)));
            lamperti::roundtrip_check(&f).map(|d| d.to_f64())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    r.check("discrepancy", worst < 1e-12, format!("max |L⁻¹(L(f)) - f| = {worst:e} over 1000 paths"));
    Ok(r)
}

fn flow() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Flow);
    let quad = Mechanism::<f64>::quadratic(1.0);
    let mut worst: f64 = 0.0;
    for l in [0.5, 1.0, 2.0, 4.0] {
        for t in [0.1, 0.5, 1.0, 2.0] {
            let u = quad.flow(l, t, 1e-12)?;
            worst = worst.max((u - l / (1.0 + l * t)).abs());
        }
    }
    r.check("analytic", worst < 1e-8, format!("max |u - λ/(1+λt)| = {worst:e}"));
    let mechs = [
        ("quadratic", Mechanism::quadratic(1.0)),
        ("logistic", Mechanism::Logistic { c: 1.0, r: 1.0 }),
        ("birth_death", Mechanism::birth_death(2.0, 1.0)),
    ];
    let grid = |lo: f64, step: f64, n: usize| (0..n).map(move |k| lo + step * k as f64);
    let mut worst_sg: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, m) in &mechs {
        let mut w: f64 = 0.0;
        for s in grid(0.1, 0.1, 10) {
            for t in grid(0.1, 0.1, 10) {
                for l in grid(0.5, 0.5, 8) {
                    w = w.max(m.semigroup_defect(l, s, t, 1e-12)?);
                }
            }
        }
        detail.push(format!("{name} {w:e}"));
        worst_sg = worst_sg.max(w);
    }
    r.check("semigroup", worst_sg < 1e-6, format!("max defect: {}", detail.join(", ")));
    Ok(r)
}

/// Offspring law of the subcritical binary DSBP used by the discrete tests.
pub fn discrete_spec() -> DsbpSpec<f64> {
    DsbpSpec::birth_death(1.0, 1.5).expect("valid spec")
}

pub const DISCRETE_START: u64 = 5;
pub const DISCRETE_HORIZON: f64 = 3.0;
pub const DISCRETE_N: usize = 10_000;

/// DSBP ensemble of the discrete Lamperti suite for one seed block.
pub fn discrete_dsbp_ensemble(seed: u64, seed_block: u64) -> Result<PathEnsemble<f64>> {
    let spec = discrete_spec();
    PathEnsemble::generate("discrete_lamperti/dsbp", seed, block(2, seed_block), DISCRETE_N, |rng| {
        Ok(sample_dsbp(&spec, DISCRETE_START, DISCRETE_HORIZON, rng))
    })
}

/// Uncensored DSBP ensemble (the law is subcritical, so every path dies)
/// used for holding-time tests, where dropping censored intervals would bias
/// the sample toward short holdings.
pub fn discrete_dsbp_uncensored(seed: u64, seed_block: u64) -> Result<PathEnsemble<f64>> {
    let spec = discrete_spec();
    PathEnsemble::generate("discrete_lamperti/holding", seed, block(10, seed_block), DISCRETE_N, |rng| {
        Ok(sample_dsbp(&spec, DISCRETE_START, f64::INFINITY, rng))
    })
}

/// Directly sampled compound Poisson ensemble of the same suite.
pub fn discrete_cp_ensemble(seed: u64, seed_block: u64) -> Result<PathEnsemble<f64>> {
    let spec = discrete_spec();
    PathEnsemble::generate("discrete_lamperti/cp", seed, block(3, seed_block), DISCRETE_N, |rng| {
        Ok(sample_compound_poisson(&spec, DISCRETE_START, DISCRETE_HORIZON, rng))
    })
}

fn discrete_lamperti(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::DiscreteLamperti);
    let spec = discrete_spec();
    let lambda = spec.total();
    let times = [0.5, 1.0, 2.0];
    let mut passes = [0u32; 3];
    let mut holding_passes = [0u32; 2];
    for b in 0..SEED_BLOCKS {
        let dsbp = discrete_dsbp_ensemble(seed, b)?;
        let transformed = dsbp.map_paths(lamperti::transform)?;
        let cp = discrete_cp_ensemble(seed, b)?;
        for (k, t) in times.iter().enumerate() {
            let ks = stats::ks_two_sample(&stats::marginal(&transformed, *t)?, &stats::marginal(&cp, *t)?)?;
            let ok = !ks.rejects(ALPHA);
            passes[k] += ok as u32;
            r.rows.push(ReportRow {
                test_id: format!("marginal_t={t}"),
                statistic: ks.statistic,
                p_value: ks.p_value,
                pass: ok,
                seed_block: b,
            });
        }
        let full = discrete_dsbp_uncensored(seed, b)?;
        let full_transformed = full.map_paths(lamperti::transform)?;
        let holdings = [
            ("holding_dsbp", stats::holding_time_test(&full.paths, |i| (i > 0.0).then_some(i * lambda))?),
            (
                "holding_transformed",
                stats::holding_time_test(&full_transformed.paths, |i| (i > 0.0).then_some(lambda))?,
            ),
        ];
        for (k, (id, ks)) in holdings.into_iter().enumerate() {
            let ok = !ks.rejects(ALPHA);
            holding_passes[k] += ok as u32;
            r.rows.push(ReportRow {
                test_id: id.into(),
                statistic: ks.statistic,
                p_value: ks.p_value,
                pass: ok,
                seed_block: b,
            });
        }
    }
    for (k, t) in times.iter().enumerate() {
        r.check(
            &format!("marginal_t={t}"),
            passes[k] >= 2,
            format!("KS not rejected in {}/3 seed blocks", passes[k]),
        );
    }
    r.check(
        "holding_dsbp",
        holding_passes[0] >= 2,
        format!("Exp(iλ) holding law not rejected in {}/3 blocks", holding_passes[0]),
    );
    r.check(
        "holding_transformed",
        holding_passes[1] >= 2,
        format!("Exp(λ) holding law not rejected in {}/3 blocks", holding_passes[1]),
    );
    // rate law: mean holding time at state 5, harvested across paths
    let dsbp = discrete_dsbp_uncensored(seed, 0)?;
    let at_five: Vec<f64> = stats::normalized_holding_times(&dsbp.paths, |i| (i == 5.0).then_some(1.0))?;
    let est = Estimate::from_samples(&at_five)?;
    let expected = 1.0 / (5.0 * lambda);
    r.check(
        "rate_law",
        (est.value - expected).abs() < 3.0 * est.stderr,
        format!("mean holding at i=5: {:.5} ± {:.5} vs {expected:.5} (n = {})", est.value, est.stderr, est.n),
    );
    Ok(r)
}

/// Feller diffusion `Ψ(u) = u²/2`.
pub fn feller_triplet() -> LevyTriplet<f64> {
    LevyTriplet::new(0.0, 1.0, Vec::new()).expect("valid triplet")
}

pub const SDE_STEP: f64 = 1e-3;
const SDE_RECORD: usize = 100;
pub const SDE_N: usize = 100_000;
const LAPLACE_LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];

/// Values at `t = 1` of `n` SDE paths from `x0`, together with the jump
/// logs.
fn sde_marginal(
    triplet: &LevyTriplet<f64>,
    x0: f64,
    seed: u64,
    stream_block: u64,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let out = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, stream_id(stream_block, i));
            let s = sample_csbp_sde_logged(triplet, x0, 1.0, SDE_STEP, SDE_RECORD, &mut rng)?;
            let v = s.path.eval(1.0)?.to_f64();
            let min_jump = s.jumps.iter().map(|j| j.1).fold(f64::INFINITY, f64::min);
            Ok((v, min_jump))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(out.into_iter().unzip())
}

fn csbp_laplace(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::CsbpLaplace);
    let triplet = feller_triplet();
    let mech = Mechanism::Triplet(triplet.clone());
    let (values, _) = sde_marginal(&triplet, 1.0, seed, block(4, 0), SDE_N)?;
    for l in LAPLACE_LAMBDAS {
        let est = stats::laplace_of_sample(&values, l)?;
        let exact = (-mech.flow(l, 1.0, 1e-12)?).exp();
        let err = (est.value - exact).abs();
        let tol = 3.0 * est.stderr + 0.01;
        r.check(
            &format!("lambda={l}"),
            err < tol,
            format!("E e^(-λZ_1) = {:.5} ± {:.5}, e^(-u_1(λ)) = {exact:.5}, |diff| {err:.5} < {tol:.5}", est.value, est.stderr),
        );
    }
    Ok(r)
}

fn branching(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Branching);
    let triplet = feller_triplet();
    let (two, _) = sde_marginal(&triplet, 2.0, seed, block(5, 0), SDE_N)?;
    let (one_a, _) = sde_marginal(&triplet, 1.0, seed, block(5, 1), SDE_N)?;
    let (one_b, _) = sde_marginal(&triplet, 1.0, seed, block(5, 2), SDE_N)?;
    for l in LAPLACE_LAMBDAS {
        let joint = stats::laplace_of_sample(&two, l)?;
        let product = stats::laplace_of_sample(&one_a, l)?.product(stats::laplace_of_sample(&one_b, l)?);
        let err = (joint.value - product.value).abs();
        let se = (joint.stderr.powi(2) + product.stderr.powi(2)).sqrt();
        let tol = 3.0 * se + 0.01;
        r.check(
            &format!("lambda={l}"),
            err < tol,
            format!("from 2: {:.5}, product of two from 1: {:.5}, |diff| {err:.5} < {tol:.5}", joint.value, product.value),
        );
    }
    Ok(r)
}

pub const EXTINCTION_HORIZON: f64 = 200.0;

/// Compound Poisson skeleton of the birth–death(2, 1) mechanism, stopped at
/// 0 and censored at [`EXTINCTION_HORIZON`].
pub fn extinction_skeleton_ensemble(seed: u64) -> Result<PathEnsemble<f64>> {
    let spec = DsbpSpec::birth_death(2.0, 1.0)?;
    PathEnsemble::generate("extinction/cp", seed, block(6, 0), 10_000, |rng| {
        Ok(sample_compound_poisson(&spec, 1, EXTINCTION_HORIZON, rng))
    })
}

fn extinction(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Extinction);
    let mech = Mechanism::<f64>::birth_death(2.0, 1.0);
    let phi = mech
        .largest_root()?
        .finite()
        .ok_or_else(|| Error::Domain("no finite root".into()))?;
    let expected = (-phi).exp();
    let skeleton = extinction_skeleton_ensemble(seed)?;
    let csbp = skeleton.map_paths(lamperti::inverse_transform)?;
    let est = stats::extinction_estimate(&csbp)?;
    r.check(
        "probability",
        (est.value - expected).abs() <= 3.0 * est.stderr,
        format!("extinct {:.4} ± {:.4} vs e^(-Φ) = {expected:.4} (Φ = {phi:.6})", est.value, est.stderr),
    );
    // a censored skeleton at level y still dies with probability e^{-Φy}
    let tail: f64 = skeleton
        .paths
        .iter()
        .filter(|p| p.is_truncated())
        .map(|p| (-phi * p.last_value().to_f64()).exp())
        .sum::<f64>()
        / skeleton.len() as f64;
    r.check("censoring_bias", tail < 0.01, format!("tail estimate {tail:e}"));
    Ok(r)
}

fn hitting_time(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::HittingTime);
    let mut worst: f64 = 0.0;
    let mut count = 0usize;
    for b in 0..SEED_BLOCKS {
        let ens = discrete_dsbp_ensemble(seed, b)?;
        for f in ens.paths.iter().filter(|p| !p.is_truncated() && p.terminal() == Terminal::Zero) {
            let holdings: Vec<f64> = f
                .holding_intervals()
                .iter()
                .filter_map(|(v, len)| Some(v.finite()? * (*len)?))
                .collect();
            let integral = stats::pairwise_sum(&holdings);
            let t0 = lamperti::transform(f)?
                .hitting_time_zero()
                .ok_or_else(|| Error::InvalidPath("transformed path does not hit 0".into()))?;
            worst = worst.max((t0 - integral).abs() / integral);
            count += 1;
        }
    }
    r.check(
        "identity",
        count > 0 && worst < 1e-10,
        format!("max |T_0(L f) - ∫f| / ∫f = {worst:e} over {count} extinct paths"),
    );
    Ok(r)
}

const CONVERGENCE_N: [u64; 3] = [10, 50, 250];
const CONVERGENCE_PATHS: usize = 10_000;

fn convergence(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Convergence);
    let mech = Mechanism::quadratic(0.5);
    let (feller, _) = sde_marginal(&feller_triplet(), 1.0, seed, block(7, 0), CONVERGENCE_PATHS)?;
    let mut gaps = Vec::new();
    let mut distances = Vec::new();
    for (k, &n) in CONVERGENCE_N.iter().enumerate() {
        let approx = dsbp_approximation(&mech, n, 1.0)?;
        gaps.push(exponent_gap(&approx.psi_n, &mech, 4.0, 400)?);
        let t_scaled = approx.dsbp_time_scale();
        let scale = approx.space_scale();
        let marginal: Vec<f64> = (0..CONVERGENCE_PATHS as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(seed, stream_id(block(8, k as u64), i));
                dsbp_marginals(&approx.spec, approx.x_n, &[t_scaled], &mut rng)[0].to_f64() / scale
            })
            .collect();
        let ks = stats::ks_two_sample(&marginal, &feller)?;
        distances.push(ks.statistic);
        r.rows.push(ReportRow {
            test_id: format!("ks_n={n}"),
            statistic: ks.statistic,
            p_value: ks.p_value,
            pass: true,
            seed_block: 0,
        });
    }
    r.check(
        "exponent_gap",
        gaps.windows(2).all(|w| w[1] < w[0]),
        format!("sup_(λ≤4) |Ψ_n - Ψ| = {gaps:?}"),
    );
    // sd of D under the null is about 0.26/√N_eff; differences of two such
    // statistics carry √2 of that
    let n_eff = (CONVERGENCE_PATHS * CONVERGENCE_PATHS) as f64 / (2 * CONVERGENCE_PATHS) as f64;
    let noise = 2.0 * 2f64.sqrt() * 0.26 / n_eff.sqrt();
    r.check(
        "ks_trend",
        distances.windows(2).all(|w| w[1] <= w[0] + noise),
        format!("KS distances {distances:?}, allowance {noise:.4}"),
    );
    Ok(r)
}

fn example1() -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Example1);
    let report = skorohod::example1_demo(&[2, 5, 10], 1e-3)?;
    r.check(
        "kappa_inf",
        (report.kappa_inf - 1.0).abs() < 1e-6,
        format!("κ_∞ = {:.9} (step discretization explodes at {:.6})", report.kappa_inf, report.kappa_inf_steps),
    );
    for row in &report.rows {
        let n = row.n;
        let bound = (-(n as f64)).exp() + 1e-3;
        r.check(
            &format!("d_usual_n={n}"),
            row.d_usual < bound,
            format!("d = {:e} (± {:e}) < {bound:e}", row.d_usual, row.d_usual_error),
        );
        r.check(
            &format!("d_inf_n={n}"),
            row.d_inf_lower > 0.3,
            format!("d_∞ ∈ [{}, {}]", row.d_inf_lower, row.d_inf_upper),
        );
        r.check(
            &format!("transform_gap_n={n}"),
            row.transform_gap > 0.5,
            format!("sup ρ(L⁻¹ f_n, L⁻¹ f) on [0, 1] = {:.6}", row.transform_gap),
        );
    }
    // explosion profile on a fine grid: L⁻¹(f)(t) = (1-t)^{-2}
    let step = 1e-3;
    let span = 2000.0;
    let n = (span / step) as usize;
    let mut values: Vec<ExtReal<f64>> = (0..=n)
        .map(|k| {
            let s = k as f64 * step;
            ExtReal::Finite((1.0 + s) * (1.0 + s))
        })
        .collect();
    values.push(ExtReal::Infinity);
    let f = CadlagPath::grid(step, values, Terminal::Infinity, None)?;
    let g = lamperti::inverse_transform(&f)?;
    let mut worst: f64 = 0.0;
    for k in 0..=990 {
        let t = k as f64 * 1e-3;
        let exact = (1.0 - t).powi(-2);
        worst = worst.max((g.eval(t)?.to_f64() - exact).abs() / exact);
    }
    r.check("explosion_profile", worst < 1e-3, format!("max relative error on [0, 0.99]: {worst:e}"));
    r.artifacts.push(("example1.csv".into(), report.to_csv()));
    Ok(r)
}

fn jumps(seed: u64) -> Result<SuiteReport> {
    let mut r = SuiteReport::new(Suite::Jumps);
    // lattice skeletons and branching processes: the only downward step is -1
    let mut lattice_paths = 0usize;
    let mut bad_lattice = 0usize;
    let mut ensembles = Vec::new();
    for b in 0..SEED_BLOCKS {
        ensembles.push(discrete_dsbp_ensemble(seed, b)?);
        ensembles.push(discrete_cp_ensemble(seed, b)?);
    }
    ensembles.push(extinction_skeleton_ensemble(seed)?);
    for ens in &ensembles {
        for p in &ens.paths {
            lattice_paths += 1;
            for j in p.jumps()? {
                match j.size {
                    JumpSize::Finite(x) if x < 0.0 && x != -1.0 => bad_lattice += 1,
                    JumpSize::MinusInfinity => bad_lattice += 1,
                    _ => {}
                }
            }
        }
    }
    r.check(
        "lattice",
        bad_lattice == 0,
        format!("{bad_lattice} downward jumps other than -1 in {lattice_paths} lattice paths"),
    );
    // CSBP event paths: no negative jumps at all
    let pure = LevyTriplet::from_pairs(0.5, 0.0, &[(0.5, 1.0), (1.5, 0.3)], 0.1)?;
    let csbp = PathEnsemble::generate("jumps/csbp", seed, block(9, 0), 2_000, |rng| {
        Ok(sample_csbp_sde_logged(&pure, 1.0, 5.0, SDE_STEP, 1, rng)?.path)
    })?;
    let mut negative = 0usize;
    let mut total = 0usize;
    for p in &csbp.paths {
        if !p.is_event() {
            return Err(Error::UnsupportedKind("grid"));
        }
        for j in p.jumps()? {
            total += 1;
            negative += j.size.is_negative() as usize;
        }
    }
    r.check(
        "csbp_event",
        negative == 0 && total > 0,
        format!("{negative} negative of {total} jumps in {} CSBP event paths", csbp.len()),
    );
    // jump-diffusion SDE: every logged jump is positive
    let mixed = LevyTriplet::from_pairs(-0.3, 0.7, &[(0.5, 1.0), (2.0, 0.2)], 0.05)?;
    let (_, min_jumps) = sde_marginal(&mixed, 1.0, seed, block(9, 1), 2_000)?;
    let smallest = min_jumps.into_iter().fold(f64::INFINITY, f64::min);
    r.check("sde_log", smallest > 0.0, format!("smallest logged jump {smallest}"));
    // the Feller suites have no jumps, so the log is empty there
    let (_, feller_jumps) = sde_marginal(&feller_triplet(), 1.0, seed, block(9, 2), 1_000)?;
    r.check(
        "feller_log",
        feller_jumps.iter().all(|m| m.is_infinite()),
        "Feller SDE paths log no jumps",
    );
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_roundtrip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn random_paths_are_members() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            assert!(random_event_path(&mut rng).require_member().is_ok());
        }
    }
}
