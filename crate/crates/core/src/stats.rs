//! Monte Carlo estimators and hypothesis tests.
//!
//! `∞` is the top element of `E` and sorts above every finite value, so
//! samples containing killed or exploded paths go through the tests as is
//! (represented by `f64::INFINITY`).

use crate::error::{Error, Result};
use crate::paths::{CadlagPath, ExtReal, Terminal};
use crate::scalar::Real;
use crate::simulate::PathEnsemble;

/// Significance level of every acceptance test.
pub const ALPHA: f64 = 1e-3;

/// Sample mean with its standard error `sd / √n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n == 0 {
            return Err(Error::InsufficientData { got: 0, need: 1 });
        }
        let mean = pairwise_sum(xs) / n as f64;
        let stderr = if n < 2 {
            0.0
        } else {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        };
        Ok(Estimate {
            value: mean,
            stderr,
            n,
        })
    }

    /// Product of two independent estimates, with the delta-method error.
    pub fn product(self, other: Estimate) -> Estimate {
        let value = self.value * other.value;
        let stderr = ((self.stderr * other.value).powi(2) + (other.stderr * self.value).powi(2)).sqrt();
        Estimate {
            value,
            stderr,
            n: self.n.min(other.n),
        }
    }
}

fn value_at<S: Real>(p: &CadlagPath<S>, t: f64) -> Result<f64> {
    let t = S::from_f64(t).ok_or_else(|| Error::Domain("time not representable".into()))?;
    Ok(p.eval(t)?.to_f64())
}

/// Marginal sample `path(t)` over an ensemble, with `∞` as `f64::INFINITY`.
pub fn marginal<S: Real>(ens: &PathEnsemble<S>, t: f64) -> Result<Vec<f64>> {
    if ens.is_empty() {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    ens.paths.iter().map(|p| value_at(p, t)).collect()
}

/// `e^{-λx}` with `e^{-λ∞} = 0` and `e^{-0·∞} = 1`.
pub fn laplace_weight(x: f64, lambda: f64) -> f64 {
    if lambda == 0.0 {
        1.0
    } else if x.is_infinite() {
        0.0
    } else {
        (-lambda * x).exp()
    }
}

/// Estimate of `E[e^{-λ Z_t}]` from a sample of values.
pub fn laplace_of_sample(xs: &[f64], lambda: f64) -> Result<Estimate> {
    let w: Vec<f64> = xs.iter().map(|x| laplace_weight(*x, lambda)).collect();
    Estimate::from_samples(&w)
}

/// Empirical Laplace transform `E[e^{-λ path(t)}]` of an ensemble.
pub fn empirical_laplace<S: Real>(ens: &PathEnsemble<S>, t: f64, lambda: f64) -> Result<Estimate> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain("λ must be nonnegative".into()));
    }
    laplace_of_sample(&marginal(ens, t)?, lambda)
}

/// Result of a Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ks {
    pub statistic: f64,
    pub p_value: f64,
}

impl Ks {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Asymptotic Kolmogorov tail `P(K > x) = 2 Σ (-1)^{k-1} e^{-2k²x²}`.
pub fn kolmogorov_tail(x: f64) -> f64 {
    if x < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, en: f64) -> f64 {
    kolmogorov_tail((en + 0.12 + 0.11 / en) * d)
}

const KS_MIN: usize = 10;

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("NaN in sample".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Two-sample KS test: `D = sup |F_a - F_b|`, with the asymptotic p-value
/// at effective size `√(nm/(n+m))`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<Ks> {
    for s in [a, b] {
        if s.len() < KS_MIN {
            return Err(Error::InsufficientData {
                got: s.len(),
                need: KS_MIN,
            });
        }
    }
    let (a, b) = (sorted(a)?, sorted(b)?);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] == x {
            i += 1;
        }
        while j < m && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = (n as f64 * m as f64 / (n + m) as f64).sqrt();
    Ok(Ks {
        statistic: d,
        p_value: ks_p(d, en),
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<Ks> {
    if xs.len() < KS_MIN {
        return Err(Error::InsufficientData {
            got: xs.len(),
            need: KS_MIN,
        });
    }
    let v = sorted(xs)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(Ks {
        statistic: d,
        p_value: ks_p(d, n.sqrt()),
    })
}

/// One-sample KS test against `Exp(rate)`.
pub fn ks_exponential(xs: &[f64], rate: f64) -> Result<Ks> {
    ks_one_sample(xs, |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() })
}

/// Holding times of event paths at states accepted by `rate`, normalized by
/// the expected rate so that they are `Exp(1)` under the hypothesis.
/// Censored last intervals are skipped.
pub fn normalized_holding_times<S: Real>(
    paths: &[CadlagPath<S>],
    rate: impl Fn(f64) -> Option<f64>,
) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for p in paths {
        if !p.is_event() {
            return Err(Error::UnsupportedKind("grid"));
        }
        let n = p.len();
        for (i, (v, len)) in p.holding_intervals().into_iter().enumerate() {
            if i + 1 == n {
                break;
            }
            let (ExtReal::Finite(x), Some(len)) = (v, len) else {
                continue;
            };
            if let Some(r) = rate(x.to_f64_lossy()) {
                out.push(len.to_f64_lossy() * r);
            }
        }
    }
    Ok(out)
}

/// KS test of normalized holding times against `Exp(1)`.
pub fn holding_time_test<S: Real>(
    paths: &[CadlagPath<S>],
    rate: impl Fn(f64) -> Option<f64>,
) -> Result<Ks> {
    ks_exponential(&normalized_holding_times(paths, rate)?, 1.0)
}

/// Fraction of paths absorbed at `0`; truncated paths count as surviving.
pub fn extinction_estimate<S: Real>(ens: &PathEnsemble<S>) -> Result<Estimate> {
    let n = ens.len();
    if n == 0 {
        return Err(Error::InsufficientData { got: 0, need: 1 });
    }
    let extinct = ens
        .paths
        .iter()
        .filter(|p| !p.is_truncated() && p.terminal() == Terminal::Zero)
        .count();
    let p = extinct as f64 / n as f64;
    Ok(Estimate {
        value: p,
        stderr: (p * (1.0 - p) / n as f64).sqrt(),
        n,
    })
}

/// One line of a test report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub test_id: String,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub seed_block: u64,
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("test_id,statistic,p,pass,seed_block\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.test_id,
            r.statistic,
            r.p_value,
            if r.pass { "pass" } else { "fail" },
            r.seed_block
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::RngStream;

    #[test]
    fn constant_ensemble_laplace() {
        let paths = vec![CadlagPath::steps(&[0.0, 5.0], &[2.0, 0.0], Terminal::Zero).unwrap(); 4];
        let ens = PathEnsemble {
            digest: String::new(),
            seed: 0,
            stream_ids: (0..4).collect(),
            paths,
        };
        let e = empirical_laplace(&ens, 1.0, 0.5).unwrap();
        assert_eq!(e.value, (-1.0f64).exp());
        assert_eq!(e.stderr, 0.0);
        let inf = PathEnsemble {
            digest: String::new(),
            seed: 0,
            stream_ids: vec![0, 1],
            paths: vec![CadlagPath::<f64>::constant_infinity(); 2],
        };
        assert_eq!(empirical_laplace(&inf, 1.0, 1.0).unwrap().value, 0.0);
    }

    #[test]
    fn ks_examples() {
        let a: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let b: Vec<f64> = (0..20).map(|i| 100.0 + i as f64).collect();
        assert_eq!(ks_two_sample(&a, &b).unwrap().statistic, 1.0);
        assert!(ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[1.5, 2.5]).is_err());
    }

    #[test]
    fn ks_quarter_by_enumeration() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.5, 2.5, 3.5, 4.5];
        // replicate each point so the size check passes without changing the ECDFs
        let rep = |x: &[f64]| x.iter().flat_map(|v| [*v; 3]).collect::<Vec<_>>();
        let r = ks_two_sample(&rep(&a), &rep(&b)).unwrap();
        assert!((r.statistic - 0.25).abs() < 1e-15);
    }

    #[test]
    fn infinity_is_top() {
        let mut a = vec![1.0; 10];
        a.extend([f64::INFINITY; 10]);
        let mut b = vec![1.0; 10];
        b.extend([5.0; 10]);
        assert!((ks_two_sample(&a, &b).unwrap().statistic - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exponential_calibration() {
        let mut fails = 0;
        for seed in 0..1000 {
            let mut rng = RngStream::new(seed, 0);
            let xs: Vec<f64> = (0..200).map(|_| rng.exponential(1.0)).collect();
            if ks_exponential(&xs, 1.0).unwrap().rejects(ALPHA) {
                fails += 1;
            }
        }
        assert!(fails <= 10, "{fails}");
        let same = vec![1.0; 50];
        assert!(ks_exponential(&same, 1.0).unwrap().p_value < 1e-6);
    }

    #[test]
    fn extinction_counts_censored_as_alive() {
        let alive = CadlagPath::event(
            vec![0.0],
            vec![ExtReal::Finite(1.0)],
            Terminal::Zero,
            Some(crate::Horizon::new(1.0).unwrap()),
        )
        .unwrap();
        let dead = CadlagPath::steps(&[0.0, 0.5], &[1.0, 0.0], Terminal::Zero).unwrap();
        let ens = PathEnsemble {
            digest: String::new(),
            seed: 0,
            stream_ids: vec![0, 1],
            paths: vec![alive, dead],
        };
        assert_eq!(extinction_estimate(&ens).unwrap().value, 0.5);
    }

    #[test]
    fn kolmogorov_tail_values() {
        // P(K > 1.36) ≈ 0.049
        assert!((kolmogorov_tail(1.36) - 0.0494).abs() < 1e-3);
        assert_eq!(kolmogorov_tail(0.0), 1.0);
    }
}
