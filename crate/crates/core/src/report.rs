//! Line-oriented `key=value` reports.
//!
//! One record per line, fields separated by single spaces, in the order
//! they were pushed. Floats use Rust's shortest round-trip formatting, so
//! they parse back to the same bits.

use std::fmt::{self, Display};
use std::io::{self, Write};
use std::path::Path;

use crate::degree::{DegreeReport, EngineConfig};
use crate::manifold::Seed;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, String)>,
}

/// Values never contain spaces or `=`; those are replaced by `_`.
fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_whitespace() || c == '=' {
                '_'
            } else {
                c
            }
        })
        .collect()
}

impl Record {
    pub fn new(command: &str) -> Record {
        let mut r = Record::default();
        r.push("command", command);
        r
    }

    pub fn push(&mut self, key: &str, value: impl Display) -> &mut Record {
        self.fields
            .push((key.to_string(), sanitize(&value.to_string())));
        self
    }

    pub fn push_opt(&mut self, key: &str, value: Option<impl Display>) -> &mut Record {
        match value {
            Some(v) => self.push(key, v),
            None => self.push(key, "none"),
        }
    }

    pub fn push_list<T: Display>(&mut self, key: &str, values: &[T]) -> &mut Record {
        let joined: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.push(key, joined.join(","))
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Seed and the full engine configuration.
    pub fn push_config(&mut self, seed: Seed, cfg: &EngineConfig) -> &mut Record {
        self.push("seed", seed.0)
            .push("num_targets", cfg.num_targets)
            .push("num_starts", cfg.num_starts)
            .push("mc_samples", cfg.mc_samples)
            .push("j_min", cfg.j_min)
            .push("workers", cfg.workers)
    }

    pub fn push_degree(&mut self, r: &DegreeReport) -> &mut Record {
        self.push("map", &r.map_id)
            .push("engine", r.engine)
            .push("degree", r.degree)
            .push("raw_estimate", r.raw_estimate)
            .push_opt("stderr", r.stderr)
            .push_list("targets", &r.signed_sums())
            .push("agreement", r.agreement)
    }

    /// Closes the record with timing and verdict.
    pub fn finish(&mut self, runtime_ms: u128, pass: bool) -> Record {
        self.push("runtime_ms", runtime_ms).push("pass", pass);
        self.clone()
    }

    pub fn passed(&self) -> bool {
        self.get("pass") == Some("true")
    }

    /// Parses one line back into a record.
    pub fn parse(line: &str) -> Option<Record> {
        let mut r = Record::default();
        for part in line.split(' ') {
            let (k, v) = part.split_once('=')?;
            r.fields.push((k.to_string(), v.to_string()));
        }
        Some(r)
    }
}

impl Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.fields.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(Record::passed)
    }

    pub fn write(&self, out: &mut impl Write) -> io::Result<()> {
        for r in &self.records {
            writeln!(out, "{r}")?;
        }
        Ok(())
    }

    pub fn write_to_path(&self, path: &Path) -> io::Result<()> {
        let mut file = io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut file)?;
        file.flush()
    }
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}
