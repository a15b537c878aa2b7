use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use shadowqpt::acquire::{read_records, validate_records};
use shadowqpt::postprocess::{overlap_pipeline, OverlapMode, ProjectionMethod};
use shadowqpt::shadows::{estimate_choi, estimate_reduced, EstimatorConfig, MomLevel};
use shadowqpt::{CMatrix, ChoiMatrix};
use shadowqpt_cli::output::Outputs;
use shadowqpt_cli::plan::{resolve_plan, ExperimentPlan, PlanSource, Preset};
use shadowqpt_cli::runner::{self, metrics, run_stages};

#[derive(Parser)]
#[command(name = "shadowqpt", version, about = "Classical-shadow process tomography experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// TOML plan file.
    #[arg(long)]
    plan: Option<PathBuf>,
    /// full_process, reduced_process, overlap, hamlearn, bounds or scheme_compare.
    #[arg(long)]
    preset: Option<Preset>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// `key=value` with dotted keys, applied after the plan file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl PlanArgs {
    fn resolve(&self, forced: Option<Preset>) -> Result<ExperimentPlan> {
        if let (Some(f), Some(p)) = (forced, self.preset) {
            if f != p {
                bail!("this subcommand runs the {f} preset, not {p}");
            }
        }
        resolve_plan(&PlanSource {
            file: self.plan.as_deref(),
            preset: forced.or(self.preset),
            seed: self.seed,
            overrides: &self.overrides,
        })
    }
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum Aggregation {
    Mean,
    MomShadow,
    MomUnitary,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset end to end.
    Run(PlanArgs),
    /// Simulate measurement records only.
    Acquire(PlanArgs),
    /// Estimate a Choi matrix from a record file.
    Reconstruct {
        #[arg(long)]
        records: PathBuf,
        /// Comma-separated qubits for a reduced process.
        #[arg(long, value_delimiter = ',')]
        subsystem: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "mean")]
        aggregation: Aggregation,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply projections to a Choi dump.
    Postprocess {
        #[arg(long)]
        choi: PathBuf,
        /// Comma-separated stages among cp, tp, purify, mle.
        #[arg(long, value_delimiter = ',', default_value = "cp,tp,purify")]
        steps: Vec<String>,
        /// Needed by the mle stage.
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Overlap preset, optionally on ingested records.
    Overlap {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Hamiltonian-learning preset.
    Hamlearn(PlanArgs),
    /// Sample-complexity table.
    Bounds(PlanArgs),
    /// Check a record file and print a summary.
    Validate {
        #[arg(long)]
        records: PathBuf,
    },
    /// Distances between a Choi estimate and a reference; with two states, also the overlap.
    Report {
        #[arg(long)]
        choi: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Input state for an overlap prediction (JSON matrix).
        #[arg(long, requires = "sigma")]
        rho: Option<PathBuf>,
        /// Target state for an overlap prediction (JSON matrix).
        #[arg(long, requires = "rho")]
        sigma: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_step(s: &str) -> Result<ProjectionMethod> {
    Ok(match s.trim() {
        "cp" => ProjectionMethod::Cp,
        "tp" => ProjectionMethod::Tp,
        "purify" => ProjectionMethod::Purify,
        "mle" => ProjectionMethod::Mle,
        other => bail!("unknown postprocessing step `{other}`"),
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let plan = args.resolve(None)?;
            let mut out = Outputs::new(&args.out)?;
            let summary = runner::run_preset(&plan, &mut out, None)?;
            runner::finish(&plan, out, summary)
        }
        Command::Acquire(args) => {
            let plan = args.resolve(None)?;
            let mut out = Outputs::new(&args.out)?;
            let recs = runner::acquire(&plan)?;
            out.write_records("records.jsonl", &recs)?;
            let total = shadowqpt::acquire::total_outcomes(&recs);
            runner::finish(&plan, out, json!({ "records": recs.len(), "total_outcomes": total }))
        }
        Command::Overlap { plan: args, records } => {
            let plan = args.resolve(Some(Preset::Overlap))?;
            let recs = records.map(read_records).transpose()?;
            let mut out = Outputs::new(&args.out)?;
            let summary = runner::run_preset(&plan, &mut out, recs)?;
            runner::finish(&plan, out, summary)
        }
        Command::Hamlearn(args) => {
            let plan = args.resolve(Some(Preset::Hamlearn))?;
            let mut out = Outputs::new(&args.out)?;
            let summary = runner::run_preset(&plan, &mut out, None)?;
            runner::finish(&plan, out, summary)
        }
        Command::Bounds(args) => {
            let plan = args.resolve(Some(Preset::Bounds))?;
            let mut out = Outputs::new(&args.out)?;
            let summary = runner::run_preset(&plan, &mut out, None)?;
            runner::finish(&plan, out, summary)
        }
        Command::Reconstruct { records, subsystem, aggregation, out } => {
            let recs = read_records(&records)?;
            let cfg = match aggregation {
                Aggregation::Mean => EstimatorConfig::Mean,
                Aggregation::MomShadow => EstimatorConfig::median_of_means(MomLevel::Shadow),
                Aggregation::MomUnitary => EstimatorConfig::median_of_means(MomLevel::Unitary),
            };
            let est = match &subsystem {
                Some(sub) => estimate_reduced(&recs, sub, &cfg)?,
                None => estimate_choi(&recs, &cfg)?,
            };
            let mut out = Outputs::new(&out)?;
            out.write_json("choi_raw.json", &est)?;
            out.commit();
            Ok(())
        }
        Command::Postprocess { choi, steps, records, out } => {
            let raw: ChoiMatrix = read_json(&choi)?;
            let steps = steps.iter().map(|s| parse_step(s)).collect::<Result<Vec<_>>>()?;
            let recs = records.map(read_records).transpose()?;
            let mut out = Outputs::new(&out)?;
            let mut reports = Vec::new();
            for st in run_stages(raw, &steps, recs.as_deref(), &Default::default())?.into_iter().skip(1) {
                out.write_json(&format!("choi_{}.json", st.name), &st.choi)?;
                reports.push(json!({ "stage": st.name, "report": st.report }));
            }
            out.write_json("projections.json", &reports)?;
            out.commit();
            Ok(())
        }
        Command::Validate { records } => {
            let report = validate_records(&records)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.is_valid() {
                bail!("{} invalid line(s) in {}", report.errors.len(), records.display());
            }
            Ok(())
        }
        Command::Report { choi, reference, rho, sigma, out } => {
            let est: ChoiMatrix = read_json(&choi)?;
            let reference: ChoiMatrix = read_json(&reference)?;
            let mut value = json!({ "metrics": metrics(&est, &reference)? });
            if let (Some(r), Some(s)) = (rho, sigma) {
                let (r, s): (CMatrix, CMatrix) = (read_json(&r)?, read_json(&s)?);
                let exact = shadowqpt::shadows::estimate_overlap(&reference, &r, &s)?;
                value["overlap"] = json!({
                    "exact": exact,
                    "full": overlap_pipeline(&est, &r, &s, OverlapMode::Full)?,
                    "purified": overlap_pipeline(&est, &r, &s, OverlapMode::Purified)?,
                });
            }
            match out {
                Some(dir) => {
                    let mut o = Outputs::new(&dir)?;
                    o.write_json("report.json", &value)?;
                    o.commit();
                }
                None => println!("{}", serde_json::to_string_pretty(&value)?),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
