//! Trace persistence: one CSV row per optimizer step.

use std::io::Write;

use crate::error::Result;
use crate::optimizer::{TraceRow, TraceSink};

/// Fixed column set of `trace.csv`. `full_loss` and `accuracy` are blank
/// except at evaluation points.
pub const TRACE_HEADER: &str =
    "t,epoch,gamma,sample_loss,grad_norm_sq,param_norm_sq,full_loss,accuracy";

/// Streams rows to a writer in the fixed schema.
pub struct CsvTrace<W: Write> {
    out: W,
}

impl<W: Write> CsvTrace<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(CsvTrace { out })
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

fn opt_field(value: Option<f64>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

impl<W: Write> TraceSink for CsvTrace<W> {
    fn record(&mut self, row: &TraceRow) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{},{},{},{}",
            row.t,
            row.epoch,
            row.gamma,
            row.sample_loss,
            row.grad_norm_sq,
            row.param_norm_sq,
            opt_field(row.full_loss),
            opt_field(row.accuracy),
        )?;
        Ok(())
    }
}

/// Duplicates rows into two sinks.
pub struct TeeTrace<'a> {
    pub first: &'a mut dyn TraceSink,
    pub second: &'a mut dyn TraceSink,
}

impl TraceSink for TeeTrace<'_> {
    fn record(&mut self, row: &TraceRow) -> Result<()> {
        self.first.record(row)?;
        self.second.record(row)
    }
}
