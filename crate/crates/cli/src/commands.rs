use std::fs;
use std::path::Path;

use csbp::lamperti::{inverse_transform, max_discrepancy, transform};
use csbp::mechanism::FlowTable;
use csbp::simulate::{
    sample_compound_poisson, sample_csbp_sde_logged, sample_dsbp, sample_levy, PathEnsemble,
};
use csbp::verify::Suite;
use csbp::{ExtReal, Path as SamplePath, Value};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ProcessKind};
use crate::ensemble::{path_file, write_file, Manifest, PathEntry, StoredEnsemble};
use crate::error::{io, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Direction {
    #[value(name = "L")]
    L,
    #[value(name = "Linv")]
    Linv,
}

fn kind_name(kind: ProcessKind) -> &'static str {
    match kind {
        ProcessKind::Dsbp => "dsbp",
        ProcessKind::CompoundPoisson => "compound_poisson",
        ProcessKind::Levy => "levy",
        ProcessKind::Csbp => "csbp",
    }
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let p = &cfg.process;
    let digest = cfg.digest();
    let seed = cfg.run.seed;
    let mut ensembles = Vec::new();
    for (block, &x0) in p.start.iter().enumerate() {
        let block = block as u64;
        let ens: PathEnsemble<f64> = match p.kind {
            ProcessKind::Dsbp | ProcessKind::CompoundPoisson => {
                let spec = cfg.dsbp_spec()?;
                let dsbp = p.kind == ProcessKind::Dsbp;
                PathEnsemble::generate(&digest, seed, block, p.n_paths, |rng| {
                    Ok(if dsbp {
                        sample_dsbp(&spec, x0 as u64, p.horizon, rng)
                    } else {
                        sample_compound_poisson(&spec, x0 as u64, p.horizon, rng)
                    })
                })?
            }
            ProcessKind::Levy => {
                let triplet = cfg.triplet()?;
                PathEnsemble::generate(&digest, seed, block, p.n_paths, |rng| {
                    sample_levy(&triplet, x0, p.horizon, p.step, rng)
                })?
            }
            ProcessKind::Csbp => {
                let triplet = cfg.triplet()?;
                PathEnsemble::generate(&digest, seed, block, p.n_paths, |rng| {
                    Ok(sample_csbp_sde_logged(&triplet, x0, p.horizon, p.step, p.record_every, rng)?
                        .path)
                })?
            }
        };
        ensembles.push((x0, ens));
    }
    let mut entries = Vec::new();
    let mut paths = Vec::new();
    for (x0, ens) in ensembles {
        for (path, stream_id) in ens.paths.into_iter().zip(ens.stream_ids) {
            entries.push(PathEntry {
                file: path_file(paths.len()),
                start: x0,
                stream_id,
            });
            paths.push(path);
        }
    }
    let stored = StoredEnsemble {
        manifest: Manifest {
            experiment_id: cfg.run.experiment_id.clone(),
            config_digest: digest,
            seed,
            process: kind_name(p.kind).into(),
            n_paths: paths.len(),
            paths: entries,
        },
        paths,
    };
    stored.save(&cfg.run.out)?;
    Ok(format!("wrote {} paths to {}", stored.paths.len(), cfg.run.out.display()))
}

/// Sup of `|a - b|` over the breakpoints of `a` inside both domains; `∞`
/// where exactly one side is infinite.
fn node_gap(a: &SamplePath, b: &SamplePath) -> f64 {
    let mut worst = 0.0f64;
    for &t in a.times() {
        if let (Ok(x), Ok(y)) = (a.eval(t), b.eval(t)) {
            worst = worst.max(match (x, y) {
                (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs(),
                (ExtReal::Infinity, ExtReal::Infinity) => 0.0,
                _ => f64::INFINITY,
            });
        }
    }
    worst
}

fn roundtrip_gap(orig: &SamplePath, back: &SamplePath) -> f64 {
    match max_discrepancy(orig, back) {
        Value::Finite(x) => x,
        Value::Infinity => node_gap(orig, back),
    }
}

pub fn transform_cmd(
    cfg: &ExperimentConfig,
    input: &Path,
    direction: Direction,
) -> Result<String, CliError> {
    let source = StoredEnsemble::load(input)?;
    let (forward, backward, label): (fn(&SamplePath) -> _, fn(&SamplePath) -> _, _) =
        match direction {
            Direction::L => (transform::<f64>, inverse_transform::<f64>, "L"),
            Direction::Linv => (inverse_transform::<f64>, transform::<f64>, "Linv"),
        };
    let results = source
        .paths
        .par_iter()
        .map(|f| {
            let g = forward(f)?;
            let gap = roundtrip_gap(f, &backward(&g)?);
            Ok((g, gap))
        })
        .collect::<csbp::Result<Vec<_>>>()?;
    let mut report = String::from("file,stream_id,discrepancy\n");
    for (entry, (_, gap)) in source.manifest.paths.iter().zip(&results) {
        report.push_str(&format!("{},{},{}\n", entry.file, entry.stream_id, gap));
    }
    let stored = StoredEnsemble {
        manifest: Manifest {
            process: format!("{label}({})", source.manifest.process),
            ..source.manifest
        },
        paths: results.into_iter().map(|(g, _)| g).collect(),
    };
    stored.save(&cfg.run.out)?;
    write_file(&cfg.run.out.join("discrepancy.csv"), &report)?;
    Ok(format!("wrote {} transformed paths to {}", stored.paths.len(), cfg.run.out.display()))
}

pub fn flow(cfg: &ExperimentConfig) -> Result<String, CliError> {
    let m = cfg.mechanism()?;
    let f = &cfg.flow;
    let table = m.flow_table(&f.lambdas, &f.times, f.tol)?;
    let file = cfg.run.out.join("flow.csv");
    write_file(&file, &table.to_csv())?;
    Ok(format!("wrote {}", file.display()))
}

/// Run suites; `Ok(false)` when any check failed.
pub fn verify(cfg: &ExperimentConfig, suite: &str) -> Result<bool, CliError> {
    let suites: Vec<Suite> = if suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|e: csbp::Error| CliError::Usage(e.to_string()))?]
    };
    let mut all_pass = true;
    for s in suites {
        let report = s.run(cfg.run.seed)?;
        let dir = cfg.run.out.join(s.name());
        write_file(&dir.join("checks.csv"), &report.checks_csv())?;
        if !report.rows.is_empty() {
            write_file(&dir.join("tests.csv"), &report.tests_csv())?;
        }
        for (name, csv) in &report.artifacts {
            write_file(&dir.join(name), csv)?;
        }
        for c in &report.checks {
            println!("{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.id, c.detail);
        }
        println!("{}: {}", s, if report.passed() { "PASS" } else { "FAIL" });
        all_pass &= report.passed();
    }
    Ok(all_pass)
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let rank = (p * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn ensemble_series(ens: &StoredEnsemble, points: usize) -> String {
    let end = ens
        .paths
        .iter()
        .map(|p| p.horizon().map_or(p.last_time(), |h| h.get()))
        .fold(0.0f64, f64::max);
    let mut out = String::from("t,mean,q05,q95\n");
    for k in 0..points {
        let t = end * k as f64 / points as f64;
        let mut xs: Vec<f64> = ens
            .paths
            .iter()
            .filter_map(|p| p.eval(t).ok())
            .map(|v| v.to_f64())
            .collect();
        if xs.is_empty() {
            continue;
        }
        xs.sort_by(f64::total_cmp);
        let mean = csbp::stats::pairwise_sum(&xs) / xs.len() as f64;
        out.push_str(&format!(
            "{t},{mean},{},{}\n",
            quantile(&xs, 0.05),
            quantile(&xs, 0.95)
        ));
    }
    out
}

fn example1_series(csv: &str) -> Result<String, CliError> {
    let mut out = String::from("n,d,d_inf,gap\n");
    for line in csv.lines().skip(1).filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(CliError::Io(format!("malformed report line `{line}`")));
        }
        out.push_str(&format!("{},{},{},{}\n", f[0], f[1], f[2], f[4]));
    }
    Ok(out)
}

pub fn plotdata(cfg: &ExperimentConfig, input: &Path) -> Result<String, CliError> {
    let series = if input.is_dir() || input.file_name().is_some_and(|n| n == crate::ensemble::MANIFEST)
    {
        ensemble_series(&StoredEnsemble::load(input)?, cfg.plot.points)
    } else {
        let text = fs::read_to_string(input).map_err(|e| io(input, e))?;
        let header = text.lines().next().unwrap_or("");
        if header == "lambda,t,u" {
            text
        } else if header.starts_with("lambda,") {
            FlowTable::<f64>::from_csv(&text)
                .map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?
                .to_long_csv()
        } else if header.starts_with("n,d_usual,") {
            example1_series(&text)?
        } else {
            return Err(CliError::Usage(format!(
                "{}: not an ensemble, flow table or example1 report",
                input.display()
            )));
        }
    };
    let file = cfg.run.out.join("plotdata.csv");
    write_file(&file, &series)?;
    Ok(format!("wrote {}", file.display()))
}
