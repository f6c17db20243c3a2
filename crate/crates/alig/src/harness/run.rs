//! Single-run execution: build the problem, run the optimizer, persist
//! trace and summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::optimizer::{run_epochs, Optimizer, RunOptions, RunSummary, TraceSink};
use crate::problems::StochasticObjective;

use super::config::ExperimentConfig;
use super::trace::{CsvTrace, TeeTrace};

#[derive(Serialize)]
struct SummaryDoc<'a> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    summary: &'a RunSummary,
}

/// Write `dataset.csv`: one row per sample.
pub fn export_dataset(objective: &dyn StochasticObjective, path: &Path) -> Result<()> {
    let (header, rows) = objective.dataset();
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Execute a validated config: writes `trace.csv` and `summary.json` under
/// `config.out_dir` (plus `dataset.csv` when requested). The partial trace
/// is flushed even when the run aborts.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary> {
    run_with_extra_sink(config, None)
}

/// `run`, optionally teeing every trace row into `extra` (used for paired
/// rule comparisons and tests).
pub fn run_with_extra_sink(
    config: &ExperimentConfig,
    extra: Option<&mut dyn TraceSink>,
) -> Result<RunSummary> {
    config.validate()?;
    fs::create_dir_all(&config.out_dir)?;
    let objective = config.problem.build()?;
    if config.export_data {
        export_dataset(objective.as_ref(), &config.out_dir.join("dataset.csv"))?;
    }

    let w0 = objective.initial_point(config.seed);
    let mut optimizer = Optimizer::new(&w0, config.rule, config.momentum, config.region)?;
    let options = RunOptions {
        epochs: config.epochs,
        seed: config.seed,
        eval_every: config.eval_every,
        ..RunOptions::default()
    };

    let file = File::create(config.out_dir.join("trace.csv"))?;
    let mut csv = CsvTrace::new(BufWriter::new(file))?;
    let result = match extra {
        Some(second) => {
            let mut tee = TeeTrace {
                first: &mut csv,
                second,
            };
            run_epochs(&mut optimizer, objective.as_ref(), &options, &mut tee)
        }
        None => run_epochs(&mut optimizer, objective.as_ref(), &options, &mut csv),
    };
    csv.flush()?;

    let summary = result?;
    let doc = SummaryDoc {
        config,
        summary: &summary,
    };
    let mut out = BufWriter::new(File::create(config.out_dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::other)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(summary)
}
