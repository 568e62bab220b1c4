use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use perclat_core::coupling::{count_open_bonds, p_hat};
use perclat_core::gobp::{
    bisect_critical, count_paths, martingale_limit_study, normalized_total, survival_probability, BisectionConfig,
    BondModel, CountMode, MartingaleConfig, ParameterAxis, DEFAULT_EPSILON,
};
use perclat_core::measures::{
    check_lemma_first, default_battery, run_lemma_battery, run_nkey_battery, CylinderEvent, PathSumMode,
    DEFAULT_ENUMERATION_BUDGET,
};
use perclat_core::stats::wilson_interval;
use serde_json::json;

use crate::config::{load_config, Resolver, List, OUT_DIR_ENV, SEED_ENV};
use crate::error::CliError;
use crate::output::{f, write_csv, write_json, RunInfo};
use crate::{Cli, Command, CountArgs, CriticalArgs, MartingaleArgs, MeasuresArgs, PhatArgs, SurvivalArgs};

/// Bisection axis as spelled on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    P,
    L,
}

impl FromStr for Axis {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "p" => Ok(Axis::P),
            "l" => Ok(Axis::L),
            _ => Err(format!("expected p or l, got {s:?}")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::P => "p",
            Axis::L => "l",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumMode {
    Enumerate,
    Sample,
}

impl FromStr for SumMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "enumerate" => Ok(SumMode::Enumerate),
            "sample" => Ok(SumMode::Sample),
            _ => Err(format!("expected enumerate or sample, got {s:?}")),
        }
    }
}

impl fmt::Display for SumMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SumMode::Enumerate => "enumerate",
            SumMode::Sample => "sample",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arith {
    Exact,
    Scaled,
}

impl FromStr for Arith {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(Arith::Exact),
            "scaled" => Ok(Arith::Scaled),
            _ => Err(format!("expected exact or scaled, got {s:?}")),
        }
    }
}

impl fmt::Display for Arith {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arith::Exact => "exact",
            Arith::Scaled => "scaled",
        })
    }
}

type Job = Box<dyn FnOnce(&RunInfo, &Path) -> Result<(), CliError> + Send>;

struct Prepared {
    command: &'static str,
    extension: &'static str,
    job: Job,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let common = cli.common;
    let mut r = Resolver::new(load_config(common.config.as_deref())?);
    let seed = r.with_env("seed", common.seed, SEED_ENV, 1u64)?;
    let workers = r.plumbing::<usize>("workers", common.workers, None)?;
    let out_dir = r.plumbing::<String>("out-dir", common.out_dir.map(path_string), Some(OUT_DIR_ENV))?;
    let output = r.plumbing::<String>("output", common.output.map(path_string), None)?;

    let prepared = match cli.command {
        Command::PhatSweep(a) => phat_sweep(a, &mut r, seed)?,
        Command::Survival(a) => survival(a, &mut r, seed)?,
        Command::Martingale(a) => martingale(a, &mut r, seed)?,
        Command::Critical(a) => critical(a, &mut r, seed)?,
        Command::CheckMeasures(a) => check_measures(a, &mut r, seed)?,
        Command::CountPaths(a) => count_paths_cmd(a, &mut r, seed)?,
    };
    let info = RunInfo {
        command: prepared.command,
        config: r.finish()?,
    };
    if workers == Some(0) {
        return Err(CliError::Validation("workers must be at least 1".into()));
    }
    let path = match output {
        Some(o) => PathBuf::from(o),
        None => PathBuf::from(out_dir.unwrap_or_else(|| ".".into()))
            .join(format!("{}.{}", prepared.command, prepared.extension)),
    };

    let start = Instant::now();
    let job = prepared.job;
    let result = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(format!("worker pool: {e}")))?
            .install(|| job(&info, &path)),
        None => job(&info, &path),
    };
    eprintln!("perclat {}: {:.3} s", info.command, start.elapsed().as_secs_f64());
    result
}

fn path_string(p: PathBuf) -> String {
    p.to_string_lossy().into_owned()
}

fn positive<T: PartialOrd + Default + fmt::Display>(key: &str, v: T) -> Result<T, CliError> {
    if v > T::default() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{key} must be positive, got {v}")))
    }
}

fn nonempty<T>(key: &str, l: List<T>) -> Result<Vec<T>, CliError> {
    if l.0.is_empty() {
        return Err(CliError::Validation(format!("{key} must not be empty")));
    }
    Ok(l.0)
}

/// Exactly one of two mutually exclusive parameters.
fn one_of<A, B>(a: (&str, Option<A>), b: (&str, Option<B>)) -> Result<Result<A, B>, CliError> {
    match (a.1, b.1) {
        (Some(x), None) => Ok(Ok(x)),
        (None, Some(y)) => Ok(Err(y)),
        (Some(_), Some(_)) => Err(CliError::Validation(format!("give exactly one of {} and {}, not both", a.0, b.0))),
        (None, None) => Err(CliError::Validation(format!("give exactly one of {} and {}", a.0, b.0))),
    }
}

fn phat_sweep(a: PhatArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let grid = nonempty("grid-l", r.get("grid-l", a.grid_l, Some(List(vec![0.75, 1.0, 2.0, 5.0])))?)?;
    let dim = r.get("dim", a.dim, Some(2usize))?;
    let n = positive("trials", r.get("trials", a.trials, Some(100_000u64))?)?;
    for &l in &grid {
        p_hat(l)?;
    }
    count_open_bonds(grid[0], dim, 0, seed)?;
    let job: Job = Box::new(move |info, path| {
        let hash = info.hash();
        let mut rows = Vec::with_capacity(grid.len());
        for &l in &grid {
            let open = count_open_bonds(l, dim, n, seed)?;
            let emp = open as f64 / n as f64;
            let ci = wilson_interval(open, n, 0.95)?;
            rows.push(vec![
                info.command.to_string(),
                f(l),
                f(p_hat(l)?),
                f(emp),
                f((emp * (1.0 - emp) / n as f64).sqrt()),
                f(ci.low),
                f(ci.high),
                open.to_string(),
                n.to_string(),
                seed.to_string(),
                hash.clone(),
            ]);
        }
        let header = [
            "experiment", "L", "formula", "empirical", "std_error", "ci_low", "ci_high", "open", "n", "seed",
            "config_hash",
        ];
        write_csv(path, info, &header, &rows)?;
        Ok(())
    });
    Ok(Prepared {
        command: "phat-sweep",
        extension: "csv",
        job,
    })
}

fn survival(a: SurvivalArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let p = r.opt("grid-p", a.grid_p)?;
    let l = r.opt("grid-l", a.grid_l)?;
    let models: Vec<BondModel> = match one_of(("grid-p", p), ("grid-l", l))? {
        Ok(ps) => nonempty("grid-p", ps)?.into_iter().map(|p| BondModel::Bernoulli { p }).collect(),
        Err(ls) => nonempty("grid-l", ls)?
            .into_iter()
            .map(|amplitude| BondModel::Coupled { amplitude })
            .collect(),
    };
    let dstar = r.get("dstar", a.dstar, Some(1usize))?;
    let horizon = positive("horizon", r.get("horizon", a.horizon, Some(100u64))?)?;
    let n = positive("trials", r.get("trials", a.trials, Some(1000u64))?)?;
    for m in &models {
        m.validate()?;
        m.trial_field(dstar, horizon, seed, 0)?;
    }
    let job: Job = Box::new(move |info, path| {
        let hash = info.hash();
        let mut rows = Vec::with_capacity(models.len());
        for m in &models {
            let e = survival_probability(*m, dstar, horizon, n, seed)?;
            let kind = match m {
                BondModel::Bernoulli { .. } => "p",
                BondModel::Coupled { .. } => "l",
            };
            rows.push(vec![
                info.command.to_string(),
                kind.to_string(),
                f(m.parameter()),
                f(m.effective_p()?),
                dstar.to_string(),
                e.survivors.to_string(),
                f(e.point),
                f(e.ci_low),
                f(e.ci_high),
                n.to_string(),
                horizon.to_string(),
                seed.to_string(),
                hash.clone(),
            ]);
        }
        let header = [
            "experiment", "axis", "parameter", "bond_p", "dstar", "survivors", "estimate", "ci_low", "ci_high", "n",
            "T", "seed", "config_hash",
        ];
        write_csv(path, info, &header, &rows)?;
        Ok(())
    });
    Ok(Prepared {
        command: "survival",
        extension: "csv",
        job,
    })
}

/// `dir/name.csv` becomes `dir/name.<suffix>.csv`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn martingale(a: MartingaleArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let p = r.get::<f64>("p", a.p, None)?;
    let dstar = r.get("dstar", a.dstar, Some(1usize))?;
    let horizon = r.get("horizon", a.horizon, Some(100u64))?;
    let trials = r.get("trials", a.trials, Some(1000u64))?;
    let mut cfg = MartingaleConfig::new(p, dstar, horizon, trials, seed);
    cfg.epsilon = r.get("epsilon", a.epsilon, Some(DEFAULT_EPSILON))?;
    cfg.checkpoints = r.get("checkpoints", a.checkpoints, Some(List(Vec::new())))?.0;
    cfg.histogram_bins = r.get("bins", a.bins, Some(20usize))?;
    cfg.validate()?;
    let job: Job = Box::new(move |info, path| {
        let s = martingale_limit_study(&cfg)?;
        let hash = info.hash();
        let tail = |v: &mut Vec<String>| {
            v.extend([trials.to_string(), horizon.to_string(), seed.to_string(), hash.clone()]);
        };

        let mut summary = Vec::new();
        for c in &s.checkpoints {
            let mut row = vec![
                info.command.to_string(),
                c.level.to_string(),
                f(c.mean.mean),
                f(c.mean.std_error),
                f(cfg.epsilon),
                c.above.to_string(),
                f(c.fraction),
                f(c.ci.low),
                f(c.ci.high),
            ];
            tail(&mut row);
            summary.push(row);
        }
        let mut hist = Vec::new();
        let h = &s.histogram;
        let mut under = vec!["underflow".into(), String::new(), f(h.log10_edges[0]), h.underflow.to_string()];
        tail(&mut under);
        hist.push(under);
        for (k, &c) in h.counts.iter().enumerate() {
            let mut row = vec![k.to_string(), f(h.log10_edges[k]), f(h.log10_edges[k + 1]), c.to_string()];
            tail(&mut row);
            hist.push(row);
        }
        let mut per_trial = Vec::with_capacity(s.values.len());
        for (i, &v) in s.values.iter().enumerate() {
            let mut row = vec![i.to_string(), f(v)];
            tail(&mut row);
            per_trial.push(row);
        }

        let end = ["n", "T", "seed", "config_hash"];
        let cat = |head: &[&'static str]| -> Vec<&'static str> { head.iter().chain(end.iter()).copied().collect() };
        write_csv(
            path,
            info,
            &cat(&["experiment", "level", "mean", "std_error", "epsilon", "above", "fraction", "ci_low", "ci_high"]),
            &summary,
        )?;
        write_csv(&sibling(path, "hist"), info, &cat(&["bin", "log10_low", "log10_high", "count"]), &hist)?;
        write_csv(&sibling(path, "trials"), info, &cat(&["trial", "abs_nbar"]), &per_trial)?;
        Ok(())
    });
    Ok(Prepared {
        command: "martingale",
        extension: "csv",
        job,
    })
}

fn critical(a: CriticalArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let axis = r.get("axis", a.axis, Some(Axis::L))?;
    let (low, high) = match axis {
        Axis::P => (0.0, 1.0),
        Axis::L => (0.5, 2.5),
    };
    let cfg = BisectionConfig {
        axis: match axis {
            Axis::P => ParameterAxis::P,
            Axis::L => ParameterAxis::L,
        },
        dstar: r.get("dstar", a.dstar, Some(3))?,
        horizon: r.get("horizon", a.horizon, Some(50))?,
        trials: r.get("trials", a.trials, Some(400))?,
        max_trials: r.get("max-trials", a.max_trials, Some(25_600))?,
        threshold: r.get("threshold", a.threshold, Some(0.5))?,
        tolerance: r.get("tolerance", a.tolerance, Some(0.05))?,
        seed,
        low: r.get("low", a.low, Some(low))?,
        high: r.get("high", a.high, Some(high))?,
    };
    cfg.validate()?;
    let job: Job = Box::new(move |info, path| {
        let result = bisect_critical(&cfg)?;
        write_json(path, info, &result)?;
        Ok(())
    });
    Ok(Prepared {
        command: "critical",
        extension: "json",
        job,
    })
}

fn check_measures(a: MeasuresArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let event_path = r.opt::<String>("event", a.event.map(path_string))?;
    let trials = positive("trials", r.get("trials", a.trials, Some(100_000u64))?)?;
    let mode = match r.get("mode", a.mode, Some(SumMode::Enumerate))? {
        SumMode::Enumerate => PathSumMode::Enumerate {
            budget: positive("budget", r.get("budget", a.budget, Some(DEFAULT_ENUMERATION_BUDGET))?)?,
        },
        SumMode::Sample => PathSumMode::Sample {
            paths: positive("sample-paths", r.get("sample-paths", a.sample_paths, Some(1000u64))?)?,
        },
    };
    let t = r.opt::<usize>("t", a.t)?;
    let amplitude = r.opt::<f64>("amplitude", a.amplitude)?;
    let nkey_paths = r.opt::<usize>("nkey-paths", a.nkey_paths)?;

    let job: Job = match event_path {
        Some(file) => {
            if nkey_paths.is_some() {
                return Err(CliError::Validation("nkey-paths applies to the bundled battery only".into()));
            }
            let (Some(t), Some(amplitude)) = (t, amplitude) else {
                return Err(CliError::Validation("an event file needs both t and amplitude".into()));
            };
            let event = CylinderEvent::load(Path::new(&file))?;
            event.validate_for(amplitude)?;
            Box::new(move |info, path| {
                let report = check_lemma_first(t, &event, amplitude, trials, seed, mode)?;
                let pass = report.pass();
                write_json(path, info, &json!({ "pass": pass, "lemma": report }))?;
                if pass {
                    Ok(())
                } else {
                    Err(CliError::Battery(format!(
                        "difference {} exceeds 3 pooled SE ({})",
                        report.comparison.difference, report.comparison.pooled_se
                    )))
                }
            })
        }
        None => {
            if t.is_some() || amplitude.is_some() {
                return Err(CliError::Validation("t and amplitude apply only with an event file".into()));
            }
            let paths = r.get("nkey-paths", nkey_paths, Some(10usize))?;
            Box::new(move |info, path| {
                let entries = default_battery();
                let lemma = run_lemma_battery(&entries, trials, seed, mode)?;
                let nkey = run_nkey_battery(&entries, paths, trials, seed)?;
                let pass = lemma.pass() && nkey.pass();
                write_json(path, info, &json!({ "pass": pass, "lemma": lemma, "nkey": nkey }))?;
                if pass {
                    Ok(())
                } else {
                    Err(CliError::Battery(format!(
                        "{}/{} lemma entries passed (need {}), {}/{} paths passed",
                        lemma.passed,
                        lemma.reports.len(),
                        lemma.required,
                        nkey.passed,
                        nkey.reports.len()
                    )))
                }
            })
        }
    };
    Ok(Prepared {
        command: "check-measures",
        extension: "json",
        job,
    })
}

fn count_paths_cmd(a: CountArgs, r: &mut Resolver, seed: u64) -> Result<Prepared, CliError> {
    let p = r.opt("p", a.p)?;
    let l = r.opt("l", a.amplitude)?;
    let model = match one_of(("p", p), ("l", l))? {
        Ok(p) => BondModel::Bernoulli { p },
        Err(amplitude) => BondModel::Coupled { amplitude },
    };
    let dstar = r.get("dstar", a.dstar, Some(1usize))?;
    let horizon = positive("horizon", r.get("horizon", a.horizon, Some(10u64))?)?;
    let n = positive("trials", r.get("trials", a.trials, Some(1u64))?)?;
    let arith = r.get("mode", a.mode, Some(Arith::Exact))?;
    model.validate()?;
    let bond_p = model.effective_p()?;
    if arith == Arith::Scaled && bond_p == 0.0 {
        return Err(CliError::Validation("scaled counts need a positive bond probability".into()));
    }
    model.trial_field(dstar, horizon, seed, 0)?;
    let job: Job = Box::new(move |info, path| {
        let hash = info.hash();
        let mode = match arith {
            Arith::Exact => CountMode::Exact,
            Arith::Scaled => CountMode::Scaled,
        };
        let mut rows = Vec::new();
        for trial in 0..n {
            let field = model.trial_field(dstar, horizon, seed, trial)?;
            for layer in count_paths(&field, horizon, mode)? {
                let count = layer.exact_total().map(|c| c.to_string()).unwrap_or_default();
                let normalized = if bond_p > 0.0 { f(normalized_total(&layer, bond_p)?) } else { String::new() };
                rows.push(vec![
                    info.command.to_string(),
                    trial.to_string(),
                    layer.len().to_string(),
                    count,
                    normalized,
                    n.to_string(),
                    layer.level.to_string(),
                    seed.to_string(),
                    hash.clone(),
                ]);
            }
        }
        let header = ["experiment", "trial", "support", "count", "normalized", "n", "T", "seed", "config_hash"];
        write_csv(path, info, &header, &rows)?;
        Ok(())
    });
    Ok(Prepared {
        command: "count-paths",
        extension: "csv",
        job,
    })
}
