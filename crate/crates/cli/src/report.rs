use std::fs::File;
use std::io::{self, Write};

use serde::Serialize;

use crate::config::{CliError, CliResult, Common, Output};

/// Write records as a JSON array (a bare object for a single record) or as CSV.
pub fn emit<R: Serialize>(records: &[R], common: &Common) -> CliResult<()> {
    let mut sink: Box<dyn Write> = match &common.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    match common.output {
        Output::Json => {
            let text = if records.len() == 1 {
                serde_json::to_string_pretty(&records[0])
            } else {
                serde_json::to_string_pretty(records)
            }
            .map_err(|e| CliError::usage(format!("cannot encode report: {e}")))?;
            writeln!(sink, "{text}")?;
        }
        Output::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            for r in records {
                w.serialize(r)
                    .map_err(|e| CliError::usage(format!("cannot encode report: {e}")))?;
            }
            w.flush()?;
            return Ok(());
        }
    }
    sink.flush()?;
    Ok(())
}
