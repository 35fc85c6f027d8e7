//! Line-delimited run logs: a header line with the config, then one record per generation.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: u64,
    pub fitnesses: Vec<f64>,
    pub best: f64,
    /// Text form of the best genome of this generation.
    pub best_genome: String,
    /// Simulation ticks spent so far in this run.
    pub elapsed_ticks: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: String,
    pub config: ExperimentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub header: RunHeader,
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    pub fn new(config: ExperimentConfig) -> Self {
        RunLog { header: RunHeader { version: env!("CARGO_PKG_VERSION").to_string(), config }, records: Vec::new() }
    }

    pub fn best_per_generation(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best).collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> io::Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "empty run log"))??;
        let header: RunHeader = serde_json::from_str(&header)?;
        let mut records = Vec::new();
        for line in lines {
            let line = line?;
            if !line.trim().is_empty() {
                records.push(serde_json::from_str(&line)?);
            }
        }
        Ok(RunLog { header, records })
    }

    /// `generation<TAB>best` rows for plotting tools.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("generation\tbest\n");
        for r in &self.records {
            s.push_str(&format!("{}\t{}\n", r.generation, r.best));
        }
        s
    }
}
