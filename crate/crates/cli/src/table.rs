//! Result assembly and CSV serialization.
//!
//! Every file starts with one '#' metadata line (config hash, seed, trial
//! count, schema version), then an RFC-4180 header and rows. Floats carry 17
//! significant digits so a read-back reproduces them bit-exactly.

use std::io::Write as _;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct RunMetadata {
    pub config_hash: String,
    pub seed: i64,
    pub trials: u64,
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<String>>,
    pub meta: RunMetadata,
}

impl ResultTable {
    pub fn to_csv_bytes(&self) -> CliResult<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(
            buf,
            "# config_hash={} seed={} trials={} schema_version=1",
            self.meta.config_hash, self.meta.seed, self.meta.trials
        )?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(self.header)?;
        for row in &self.rows {
            if row.len() != self.header.len() {
                return Err(CliError::Runtime(format!(
                    "row width {} does not match header width {}",
                    row.len(),
                    self.header.len()
                )));
            }
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))
    }
}

/// 17-significant-digit scientific form; round-trips f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}
