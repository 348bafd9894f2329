//! Command line around the library: generate families, build coresets,
//! solve, run the exact oracle, and drive configured experiments.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sets_clustering::{
    build_coreset, em_sets_kmeans, exact_oracle_with_budget, family_cost, CoresetParams,
    CoresetSize, Loss, SetFamily, SolveResult,
};
use sets_clustering_harness::{
    enumeration_budget, gen_two_circles, load_grouped_csv, run_experiment, write_grouped_csv,
    write_report_files, ExperimentConfig, HarnessError, LossSpec, ReportFormat, Result,
};

#[derive(Parser)]
#[command(
    name = "sets-coreset",
    version,
    about = "Coresets and solvers for clustering families of point sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossArg {
    Median,
    Means,
    Huber,
    Lpsi,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a two-circles family as grouped CSV.
    Generate {
        /// Pairs around the origin.
        #[arg(long, default_value_t = 990)]
        n1: usize,
        /// Pairs around the far center.
        #[arg(long, default_value_t = 10)]
        n2: usize,
        /// Distance between the two group centers.
        #[arg(long, default_value_t = 1e6)]
        r: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a sensitivity coreset of a grouped-CSV family.
    Coreset {
        /// Family CSV of rows `set_id,x_1,…`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = LossArg::Means)]
        loss: LossArg,
        /// Quadratic-to-linear crossover of the huber loss.
        #[arg(long, default_value_t = 1.0)]
        delta_huber: f64,
        /// Exponent of the l_psi distance.
        #[arg(long, default_value_t = 1.0)]
        psi: f64,
        /// Explicit sample count; mutually exclusive with --epsilon.
        #[arg(long)]
        sigma: Option<usize>,
        /// Accuracy target that derives the sample count.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Failure probability for the --epsilon rule.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        tau: f64,
        /// Sensitivity numerator override.
        #[arg(long)]
        b_sens: Option<f64>,
        /// Peeling stop size override.
        #[arg(long)]
        b_stop: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV `set_id,weight,multiplicity`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Heuristic solve of a family, optionally restricted to a coreset.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Coreset CSV produced by the `coreset` subcommand; solves on the
        /// weighted sample but reports cost on the full family.
        #[arg(long)]
        coreset: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = LossArg::Means)]
        loss: LossArg,
        #[arg(long, default_value_t = 1.0)]
        delta_huber: f64,
        #[arg(long, default_value_t = 1.0)]
        psi: f64,
        #[arg(long, default_value_t = 12)]
        max_iters: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Centers JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact enumeration solve of a tiny family (means loss only).
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Centers JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a configured experiment and write its report.
    Experiment {
        /// JSON config file.
        #[arg(long)]
        config: PathBuf,
        /// Report path override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format override.
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

fn loss_from(kind: LossArg, delta_huber: f64, psi: f64) -> Result<Loss> {
    let choice = match kind {
        LossArg::Median => LossSpec::Median,
        LossArg::Means => LossSpec::Means,
        LossArg::Huber => LossSpec::Huber { delta: delta_huber },
        LossArg::Lpsi => LossSpec::Lpsi { psi },
    };
    choice.to_loss()
}

/// Solved centers as a JSON document.
#[derive(Serialize)]
struct SolveOutput {
    centers: Vec<Vec<f64>>,
    cost: f64,
    iterations: usize,
}

impl SolveOutput {
    fn new(result: &SolveResult, cost: f64) -> Self {
        SolveOutput {
            centers: result
                .centers
                .centers()
                .iter()
                .map(|c| c.coords().to_vec())
                .collect(),
            cost,
            iterations: result.iterations,
        }
    }

    fn write(&self, out: Option<&Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        match out {
            Some(path) => {
                std::fs::write(path, format!("{text}\n"))?;
                println!("wrote centers to {}", path.display());
            }
            None => println!("{text}"),
        }
        Ok(())
    }
}

/// One coreset row of the `set_id,weight,multiplicity` exchange format.
struct CoresetRow {
    id: String,
    weight: f64,
    multiplicity: usize,
}

fn read_coreset_csv(path: &Path) -> Result<Vec<CoresetRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or_default();
        if record.len() != 3 {
            return Err(HarnessError::Invalid(format!(
                "line {line}: expected `set_id,weight,multiplicity`"
            )));
        }
        let weight: f64 = record[1]
            .trim()
            .parse()
            .map_err(|e| HarnessError::Invalid(format!("line {line}: bad weight: {e}")))?;
        let multiplicity: usize = record[2]
            .trim()
            .parse()
            .map_err(|e| HarnessError::Invalid(format!("line {line}: bad multiplicity: {e}")))?;
        rows.push(CoresetRow {
            id: record[0].trim().to_string(),
            weight,
            multiplicity,
        });
    }
    if rows.is_empty() {
        return Err(HarnessError::Invalid(format!(
            "{}: no coreset rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// The weighted sub-family a coreset file selects out of `family`; each
/// picked set carries weight = row weight x multiplicity.
fn coreset_view(family: &SetFamily, rows: &[CoresetRow]) -> Result<SetFamily> {
    let index: HashMap<&str, usize> = family
        .sets()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.id(), i))
        .collect();
    let mut sets = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for row in rows {
        let &i = index.get(row.id.as_str()).ok_or_else(|| {
            HarnessError::Invalid(format!("coreset set '{}' is not in the family", row.id))
        })?;
        sets.push(family.set(i).clone());
        weights.push(row.weight * row.multiplicity as f64);
    }
    Ok(SetFamily::with_weights(sets, weights)?)
}

fn main() {
    env_logger::init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            n1,
            n2,
            r,
            seed,
            out,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let family = gen_two_circles(n1, n2, r, &mut rng)?;
            write_grouped_csv(&family, &out)?;
            println!("wrote {} sets to {}", family.len(), out.display());
            Ok(())
        }
        Command::Coreset {
            input,
            k,
            loss,
            delta_huber,
            psi,
            sigma,
            epsilon,
            delta,
            tau,
            b_sens,
            b_stop,
            seed,
            out,
        } => {
            let family = load_grouped_csv(&input, None)?;
            let loss = loss_from(loss, delta_huber, psi)?;
            let size = match (sigma, epsilon) {
                (Some(s), None) => CoresetSize::Explicit(s),
                (None, Some(e)) => CoresetSize::Bound { epsilon: e, delta },
                (None, None) => {
                    return Err(HarnessError::Invalid(
                        "pass --sigma or --epsilon to size the coreset".into(),
                    ))
                }
                (Some(_), Some(_)) => {
                    return Err(HarnessError::Invalid(
                        "--sigma and --epsilon are mutually exclusive".into(),
                    ))
                }
            };
            let params = CoresetParams {
                k,
                tau,
                b_sens,
                b_stop,
                size,
                d_prime: None,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coreset = build_coreset(&family, &params, &loss, &mut rng)?;
            let mut writer = csv::Writer::from_path(&out)?;
            writer.write_record(["set_id", "weight", "multiplicity"])?;
            for entry in &coreset.entries {
                writer.write_record([
                    entry.id.as_str(),
                    &format!("{}", entry.weight),
                    &entry.multiplicity.to_string(),
                ])?;
            }
            writer.flush()?;
            println!(
                "sampled {} draw(s) over {} distinct set(s) into {}",
                coreset.sigma,
                coreset.support_len(),
                out.display()
            );
            Ok(())
        }
        Command::Solve {
            input,
            coreset,
            k,
            loss,
            delta_huber,
            psi,
            max_iters,
            restarts,
            seed,
            out,
        } => {
            let family = load_grouped_csv(&input, None)?;
            let loss = loss_from(loss, delta_huber, psi)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let solve_on = match &coreset {
                Some(path) => coreset_view(&family, &read_coreset_csv(path)?)?,
                None => family.clone(),
            };
            let result = em_sets_kmeans(&solve_on, k, max_iters, restarts, &loss, &mut rng)?;
            let full_cost = family_cost(&family, &result.centers, &loss)?;
            println!("cost on the full family: {full_cost}");
            SolveOutput::new(&result, full_cost).write(out.as_deref())
        }
        Command::Oracle { input, k, out } => {
            let family = load_grouped_csv(&input, None)?;
            let result =
                exact_oracle_with_budget(&family, k, &Loss::means(), enumeration_budget())?;
            println!("optimal cost: {}", result.cost);
            SolveOutput::new(&result, result.cost).write(out.as_deref())
        }
        Command::Experiment {
            config,
            out,
            format,
        } => {
            let text = std::fs::read_to_string(&config)?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if let Some(path) = out {
                cfg.out = Some(path);
            }
            if let Some(fmt) = format {
                cfg.format = match fmt {
                    FormatArg::Csv => ReportFormat::Csv,
                    FormatArg::Json => ReportFormat::Json,
                };
            }
            let outcome = run_experiment(&cfg)?;
            print!("{}", outcome.summary);
            let path = write_report_files(&cfg, &outcome)?;
            println!("wrote {} row(s) to {}", outcome.rows.len(), path.display());
            Ok(())
        }
    }
}
