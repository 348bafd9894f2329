//! Experiment runners: a coreset-size sweep against heuristic solves, a
//! prefix study against the exact single-center oracle, and a plain solve.
//! Trials run on a worker pool with per-trial derived seeds; results merge
//! in trial order, so a fixed seed reproduces every row.

use std::path::PathBuf;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sets_clustering::{
    build_coreset, em_sets_kmeans, exact_oracle_with_budget, family_cost, uniform_coreset,
    CoresetParams, CoresetSize, Error as CoreError, Loss, SetFamily, SolveResult,
    DEFAULT_ENUMERATION_BUDGET,
};

use crate::config::{DatasetSpec, ExperimentConfig, Mode, ReportFormat};
use crate::data::{gen_two_circles, load_grouped_csv};
use crate::error::{HarnessError, Result};
use crate::report::{
    approximation_error, centers_path, emit_centers, emit_report, CentersRecord, ReportRow,
};

/// Everything a run produces: report rows, the centers behind each row
/// (index-aligned), and a human summary for stdout.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ReportRow>,
    pub centers: Vec<CentersRecord>,
    pub summary: String,
}

/// Oracle assignment budget, overridable through `SETS_CORESET_BUDGET`.
pub fn enumeration_budget() -> u128 {
    budget_from(std::env::var("SETS_CORESET_BUDGET").ok().as_deref())
}

fn budget_from(var: Option<&str>) -> u128 {
    match var {
        None => DEFAULT_ENUMERATION_BUDGET,
        Some(text) => match text.trim().parse::<u128>() {
            Ok(v) if v >= 1 => v,
            _ => {
                log::warn!(
                    "ignoring unparsable SETS_CORESET_BUDGET value {text:?}, keeping {DEFAULT_ENUMERATION_BUDGET}"
                );
                DEFAULT_ENUMERATION_BUDGET
            }
        },
    }
}

/// Materializes the configured dataset; generators draw from the config
/// seed's base stream, leaving the per-trial streams untouched.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<SetFamily> {
    match &cfg.dataset {
        DatasetSpec::File { path, dim } => load_grouped_csv(path, *dim),
        DatasetSpec::TwoCircles { n1, n2, r } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            gen_two_circles(*n1, *n2, *r, &mut rng)
        }
    }
}

/// Independent randomness per trial: one base seed, one stream per trial.
fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 + trial as u64);
    rng
}

fn timed<T>(record: bool, f: impl FnOnce() -> T) -> (T, f64) {
    if record {
        let start = Instant::now();
        let value = f();
        (value, start.elapsed().as_secs_f64())
    } else {
        (f(), 0.0)
    }
}

/// Runs the configured mode on the configured dataset.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let family = load_dataset(cfg)?;
    match cfg.mode {
        Mode::ExperimentI => run_experiment_i(cfg, &family),
        Mode::ExperimentIi => run_experiment_ii(cfg, &family),
        Mode::SingleSolve => run_single_solve(cfg, &family),
    }
}

/// Writes the rows (and, for JSON, the centers sidecar) where the config
/// points; returns the report path.
pub fn write_report_files(cfg: &ExperimentConfig, outcome: &ExperimentOutcome) -> Result<PathBuf> {
    let out = cfg.out.clone().unwrap_or_else(|| match cfg.format {
        ReportFormat::Csv => PathBuf::from("report.csv"),
        ReportFormat::Json => PathBuf::from("report.json"),
    });
    emit_report(&outcome.rows, &out, cfg.format)?;
    if cfg.format == ReportFormat::Json {
        emit_centers(&outcome.centers, &centers_path(&out))?;
    }
    Ok(out)
}

struct TrialOutput {
    rows: Vec<ReportRow>,
    centers: Vec<CentersRecord>,
    notes: Vec<String>,
    // (sigma, coreset time, uniform time, full time) for the relative-time summary
    times: Vec<(usize, f64, f64, f64)>,
}

fn coreset_params(cfg: &ExperimentConfig, k: usize, sigma: usize) -> CoresetParams {
    CoresetParams {
        k,
        tau: cfg.tau,
        b_sens: cfg.b_sens,
        b_stop: cfg.b_stop,
        size: CoresetSize::Explicit(sigma),
        d_prime: None,
    }
}

/// Coreset-size sweep: per trial, one full-data heuristic solve as the
/// baseline, then per sigma a sensitivity coreset and a uniform sample, each
/// solved heuristically and scored on the full family.
pub fn run_experiment_i(cfg: &ExperimentConfig, family: &SetFamily) -> Result<ExperimentOutcome> {
    let loss = cfg.loss.to_loss()?;
    let sigmas = cfg.resolved_sigmas(family.len())?;
    let outputs: Vec<Result<TrialOutput>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| experiment_i_trial(cfg, family, &loss, &sigmas, trial))
        .collect();
    let mut rows = Vec::new();
    let mut centers = Vec::new();
    let mut notes = Vec::new();
    let mut times = Vec::new();
    for output in outputs {
        let output = output?;
        rows.extend(output.rows);
        centers.extend(output.centers);
        notes.extend(output.notes);
        times.extend(output.times);
    }
    let mut summary = format!(
        "experiment-i: n={} sets, k={}, {} trial(s), sigma sweep {:?}\n",
        family.len(),
        cfg.k,
        cfg.trials,
        sigmas
    );
    if cfg.record_timing {
        for &sigma in &sigmas {
            let entries: Vec<&(usize, f64, f64, f64)> =
                times.iter().filter(|t| t.0 == sigma).collect();
            let full: f64 = entries.iter().map(|t| t.3).sum();
            if full > 0.0 {
                let coreset: f64 = entries.iter().map(|t| t.1).sum();
                let uniform: f64 = entries.iter().map(|t| t.2).sum();
                summary.push_str(&format!(
                    "sigma {sigma}: relative time coreset/full = {:.3}, uniform/full = {:.3}\n",
                    coreset / full,
                    uniform / full
                ));
            }
        }
    } else {
        summary.push_str("timing disabled (record_timing = false), wall times reported as 0\n");
    }
    for note in notes {
        summary.push_str(&note);
        summary.push('\n');
    }
    Ok(ExperimentOutcome {
        rows,
        centers,
        summary,
    })
}

fn experiment_i_trial(
    cfg: &ExperimentConfig,
    family: &SetFamily,
    loss: &Loss,
    sigmas: &[usize],
    trial: usize,
) -> Result<TrialOutput> {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut rows = Vec::new();
    let mut centers = Vec::new();
    let mut times = Vec::new();
    let (full, t_full) = timed(cfg.record_timing, || {
        em_sets_kmeans(family, cfg.k, cfg.max_iters, cfg.restarts, loss, &mut rng)
    });
    let full = full?;
    rows.push(ReportRow {
        method: "full".into(),
        sigma: family.len(),
        trial,
        cost: full.cost,
        approx_error: 0.0,
        wall_time_seconds: t_full,
        seed: cfg.seed,
    });
    centers.push(CentersRecord::new("full", family.len(), trial, &full.centers));
    for &sigma in sigmas {
        let params = coreset_params(cfg, cfg.k, sigma);
        let (solved, t_coreset) = timed(cfg.record_timing, || -> Result<SolveResult> {
            let cs = build_coreset(family, &params, loss, &mut rng)?;
            let view = cs.to_family(family)?;
            Ok(em_sets_kmeans(
                &view,
                cfg.k,
                cfg.max_iters,
                cfg.restarts,
                loss,
                &mut rng,
            )?)
        });
        let solved = solved?;
        push_scored_row(
            family,
            loss,
            &full,
            "coreset",
            sigma,
            trial,
            cfg.seed,
            t_coreset,
            &solved,
            &mut rows,
            &mut centers,
        )?;
        let (solved, t_uniform) = timed(cfg.record_timing, || -> Result<SolveResult> {
            let cs = uniform_coreset(family, sigma, &mut rng)?;
            let view = cs.to_family(family)?;
            Ok(em_sets_kmeans(
                &view,
                cfg.k,
                cfg.max_iters,
                cfg.restarts,
                loss,
                &mut rng,
            )?)
        });
        let solved = solved?;
        push_scored_row(
            family,
            loss,
            &full,
            "uniform",
            sigma,
            trial,
            cfg.seed,
            t_uniform,
            &solved,
            &mut rows,
            &mut centers,
        )?;
        times.push((sigma, t_coreset, t_uniform, t_full));
    }
    Ok(TrialOutput {
        rows,
        centers,
        notes: Vec::new(),
        times,
    })
}

#[allow(clippy::too_many_arguments)]
fn push_scored_row(
    family: &SetFamily,
    loss: &Loss,
    baseline: &SolveResult,
    method: &str,
    sigma: usize,
    trial: usize,
    seed: u64,
    wall: f64,
    solved: &SolveResult,
    rows: &mut Vec<ReportRow>,
    centers: &mut Vec<CentersRecord>,
) -> Result<()> {
    let cost = family_cost(family, &solved.centers, loss)?;
    let error = approximation_error(family, &baseline.centers, &solved.centers, loss)?;
    rows.push(ReportRow {
        method: method.into(),
        sigma,
        trial,
        cost,
        approx_error: error,
        wall_time_seconds: wall,
        seed,
    });
    centers.push(CentersRecord::new(method, sigma, trial, &solved.centers));
    Ok(())
}

/// Prefix study: for growing prefixes of the family, the exact single-center
/// oracle on the full prefix versus on coresets a tenth and a fifth the
/// prefix's size, every cost re-evaluated on the full prefix. The heuristic
/// k is ignored here; the oracle solves k = 1.
pub fn run_experiment_ii(cfg: &ExperimentConfig, family: &SetFamily) -> Result<ExperimentOutcome> {
    let loss = cfg.loss.to_loss()?;
    if !matches!(loss, Loss::Means) {
        return Err(HarnessError::Invalid(
            "experiment-ii scores with the exact oracle, which needs the means loss".into(),
        ));
    }
    let prefixes = cfg.resolved_sigmas(family.len())?;
    let budget = enumeration_budget();
    let outputs: Vec<Result<TrialOutput>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| experiment_ii_trial(cfg, family, &loss, &prefixes, budget, trial))
        .collect();
    let mut rows = Vec::new();
    let mut centers = Vec::new();
    let mut notes = Vec::new();
    for output in outputs {
        let output = output?;
        rows.extend(output.rows);
        centers.extend(output.centers);
        notes.extend(output.notes);
    }
    let mut summary = format!(
        "experiment-ii: n={} sets, k=1 oracle, {} trial(s), prefix sizes {:?}\n\
         scale note: prefixes sized for the {} -assignment enumeration budget, far below published full-data runs\n",
        family.len(),
        cfg.trials,
        prefixes,
        budget
    );
    for note in notes {
        summary.push_str(&note);
        summary.push('\n');
    }
    Ok(ExperimentOutcome {
        rows,
        centers,
        summary,
    })
}

fn experiment_ii_trial(
    cfg: &ExperimentConfig,
    family: &SetFamily,
    loss: &Loss,
    prefixes: &[usize],
    budget: u128,
    trial: usize,
) -> Result<TrialOutput> {
    let mut rng = trial_rng(cfg.seed, trial);
    let mut rows = Vec::new();
    let mut centers = Vec::new();
    let mut notes = Vec::new();
    for &prefix_len in prefixes {
        let indices: Vec<usize> = (0..prefix_len).collect();
        let prefix = family.subset(&indices);
        let (oracle_full, t_full) = timed(cfg.record_timing, || {
            exact_oracle_with_budget(&prefix, 1, loss, budget)
        });
        let oracle_full = match oracle_full {
            Ok(r) => r,
            Err(CoreError::BudgetExceeded { required, budget }) => {
                notes.push(format!(
                    "trial {trial}, prefix {prefix_len}: full-prefix oracle skipped ({required} assignments exceed the budget of {budget})"
                ));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        rows.push(ReportRow {
            method: "full".into(),
            sigma: prefix_len,
            trial,
            cost: oracle_full.cost,
            approx_error: 0.0,
            wall_time_seconds: t_full,
            seed: cfg.seed,
        });
        let mut full_record = CentersRecord::new("full", prefix_len, trial, &oracle_full.centers);
        full_record.prefix = Some(prefix_len);
        centers.push(full_record);
        if oracle_full.cost == 0.0 {
            // A tiny prefix can have a zero optimum (one center landing on a
            // point of every set); relative errors are undefined there.
            notes.push(format!(
                "trial {trial}, prefix {prefix_len}: full-prefix optimum is zero, coreset rows skipped"
            ));
            continue;
        }
        for divisor in [10usize, 5] {
            if prefix_len / divisor == 0 {
                log::warn!(
                    "prefix {prefix_len}: sigma/{divisor} is below 1, clamping the coreset to one set"
                );
            }
            let sigma = (prefix_len / divisor).max(1);
            let params = coreset_params(cfg, 1, sigma);
            let (solved, t_coreset) = timed(cfg.record_timing, || -> Result<SolveResult> {
                let cs = build_coreset(&prefix, &params, loss, &mut rng)?;
                let view = cs.to_family(&prefix)?;
                Ok(exact_oracle_with_budget(&view, 1, loss, budget)?)
            });
            let solved = match solved {
                Ok(r) => r,
                Err(HarnessError::Core(CoreError::BudgetExceeded { required, budget })) => {
                    notes.push(format!(
                        "trial {trial}, prefix {prefix_len}: coreset sigma={sigma} oracle skipped ({required} assignments exceed the budget of {budget})"
                    ));
                    continue;
                }
                Err(e) => return Err(e),
            };
            push_scored_row(
                &prefix,
                loss,
                &oracle_full,
                "coreset",
                sigma,
                trial,
                cfg.seed,
                t_coreset,
                &solved,
                &mut rows,
                &mut centers,
            )?;
            if let Some(record) = centers.last_mut() {
                record.prefix = Some(prefix_len);
            }
        }
    }
    Ok(TrialOutput {
        rows,
        centers,
        notes,
        times: Vec::new(),
    })
}

/// One heuristic solve of the whole dataset per trial.
pub fn run_single_solve(cfg: &ExperimentConfig, family: &SetFamily) -> Result<ExperimentOutcome> {
    let loss = cfg.loss.to_loss()?;
    let outputs: Vec<Result<TrialOutput>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<TrialOutput> {
            let mut rng = trial_rng(cfg.seed, trial);
            let (solved, wall) = timed(cfg.record_timing, || {
                em_sets_kmeans(family, cfg.k, cfg.max_iters, cfg.restarts, &loss, &mut rng)
            });
            let solved = solved?;
            Ok(TrialOutput {
                rows: vec![ReportRow {
                    method: "full".into(),
                    sigma: family.len(),
                    trial,
                    cost: solved.cost,
                    approx_error: 0.0,
                    wall_time_seconds: wall,
                    seed: cfg.seed,
                }],
                centers: vec![CentersRecord::new(
                    "full",
                    family.len(),
                    trial,
                    &solved.centers,
                )],
                notes: Vec::new(),
                times: Vec::new(),
            })
        })
        .collect();
    let mut rows = Vec::new();
    let mut centers = Vec::new();
    for output in outputs {
        let output = output?;
        rows.extend(output.rows);
        centers.extend(output.centers);
    }
    let summary = format!(
        "single-solve: n={} sets, k={}, {} trial(s)\n",
        family.len(),
        cfg.k,
        cfg.trials
    );
    Ok(ExperimentOutcome {
        rows,
        centers,
        summary,
    })
}
