//! Episode-log CSV: UTF-8, LF line endings, full round-trip float precision.

use crate::harness::HarnessError;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const CSV_HEADER: &str = "seed,episode,total_reward,moving_average,epsilon,contact_happened";

/// One CSV record; episodes are 1-based in the file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub seed: u64,
    pub episode: u32,
    pub total_reward: f64,
    pub moving_average: f64,
    pub epsilon: f64,
    pub contact_happened: bool,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes rows under the fixed header. Floats use the shortest
/// representation that parses back to the identical bits.
pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(io_err(path))?;
    let mut w = std::io::BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in rows {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                r.seed, r.episode, r.total_reward, r.moving_average, r.epsilon, r.contact_happened
            )?;
        }
        w.flush()
    };
    emit().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>, HarnessError> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut rows = Vec::new();
    let mut lines = reader.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| bad(path, 1, "empty file"))?;
    let header = header.map_err(io_err(path))?;
    if header != CSV_HEADER {
        return Err(bad(path, 1, &format!("unexpected header {header:?}")));
    }

    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(io_err(path))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(bad(path, line_no, "expected 6 fields"));
        }
        rows.push(CsvRow {
            seed: parse(path, line_no, fields[0])?,
            episode: parse(path, line_no, fields[1])?,
            total_reward: parse(path, line_no, fields[2])?,
            moving_average: parse(path, line_no, fields[3])?,
            epsilon: parse(path, line_no, fields[4])?,
            contact_happened: parse(path, line_no, fields[5])?,
        });
    }
    Ok(rows)
}

fn bad(path: &Path, line: usize, msg: &str) -> HarnessError {
    HarnessError::Config(format!("{}:{line}: {msg}", path.display()))
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, field: &str) -> Result<T, HarnessError> {
    field
        .parse()
        .map_err(|_| bad(path, line, &format!("bad field {field:?}")))
}
