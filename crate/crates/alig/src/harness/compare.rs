//! Paired rule comparison: every rule sees the same problem instance, the
//! same initial point and the same sample-index sequence, so trace
//! differences reflect only the step rules.

use std::fs::{self, File};
use std::io::{BufWriter, Write};

use crate::error::{Error, Result};
use crate::optimizer::{run_epochs, MemoryTrace, Optimizer, RunOptions, RunSummary, TraceRow};
use crate::step_rules::StepRuleConfig;

use super::config::ExperimentConfig;
use super::trace::{CsvTrace, TeeTrace};

#[derive(Debug)]
pub struct CompareEntry {
    pub label: String,
    pub rule: StepRuleConfig,
    pub outcome: Result<RunSummary>,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug)]
pub struct CompareTable {
    pub entries: Vec<CompareEntry>,
}

/// Run every rule on the identical problem/seed and write per-rule traces
/// plus a joint `step_sizes.csv` under `config.out_dir`.
pub fn compare_rules(config: &ExperimentConfig, rules: &[StepRuleConfig]) -> Result<CompareTable> {
    if rules.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "compare needs at least 2 rules, got {}",
            rules.len()
        )));
    }
    config.validate()?;
    for rule in rules {
        rule.validate()?;
    }
    fs::create_dir_all(&config.out_dir)?;
    let objective = config.problem.build()?;
    let w0 = objective.initial_point(config.seed);
    let options = RunOptions {
        epochs: config.epochs,
        seed: config.seed,
        eval_every: config.eval_every,
        ..RunOptions::default()
    };

    let mut entries = Vec::with_capacity(rules.len());
    for (i, rule) in rules.iter().enumerate() {
        let label = format!("{i}_{}", rule.variant_name());
        let rule_dir = config.out_dir.join(&label);
        fs::create_dir_all(&rule_dir)?;
        let file = File::create(rule_dir.join("trace.csv"))?;
        let mut csv = CsvTrace::new(BufWriter::new(file))?;
        let mut memory = MemoryTrace::default();

        let outcome = Optimizer::new(&w0, *rule, config.momentum, config.region).and_then(
            |mut optimizer| {
                let mut tee = TeeTrace {
                    first: &mut csv,
                    second: &mut memory,
                };
                run_epochs(&mut optimizer, objective.as_ref(), &options, &mut tee)
            },
        );
        csv.flush()?;
        entries.push(CompareEntry {
            label,
            rule: *rule,
            outcome,
            rows: memory.rows,
        });
    }

    let table = CompareTable { entries };
    write_step_sizes(config, &table)?;
    write_comparison_csv(config, &table)?;
    Ok(table)
}

/// Joint step-size-over-time file: `t` plus one `gamma_<label>` column per
/// rule. Rows past a failed rule's abort point leave its column blank.
fn write_step_sizes(config: &ExperimentConfig, table: &CompareTable) -> Result<()> {
    let mut out = BufWriter::new(File::create(config.out_dir.join("step_sizes.csv"))?);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain(table.entries.iter().map(|e| format!("gamma_{}", e.label)))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    let longest = table.entries.iter().map(|e| e.rows.len()).max().unwrap_or(0);
    for k in 0..longest {
        let mut fields = vec![k.to_string()];
        for entry in &table.entries {
            fields.push(
                entry
                    .rows
                    .get(k)
                    .map(|row| row.gamma.to_string())
                    .unwrap_or_default(),
            );
        }
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn write_comparison_csv(config: &ExperimentConfig, table: &CompareTable) -> Result<()> {
    let mut out = BufWriter::new(File::create(config.out_dir.join("comparison.csv"))?);
    writeln!(
        out,
        "rule,status,final_full_loss,best_full_loss,final_accuracy,steps,error"
    )?;
    for entry in &table.entries {
        match &entry.outcome {
            Ok(s) => writeln!(
                out,
                "{},ok,{},{},{},{},",
                entry.label,
                s.final_full_loss,
                s.best_full_loss,
                s.final_accuracy.map(|a| a.to_string()).unwrap_or_default(),
                s.steps_taken,
            )?,
            Err(e) => writeln!(
                out,
                "{},failed,,,,,{}",
                entry.label,
                e.to_string().replace(',', ";")
            )?,
        }
    }
    out.flush()?;
    Ok(())
}
