//! Structured experiment records with CSV and JSON emission.
//!
//! CSV schema (version 1), one row per measured statistic:
//! `experiment,n,p,t,param,statistic,value`. `p` is written as `inf` for the
//! sup norm; empty cells mean "not applicable". The JSON form carries the
//! same rows plus full provenance.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const LIB_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Serializes an exponent with ∞ written as the string "inf".
pub mod exponent {
    use super::*;

    pub fn to_text(p: f64) -> String {
        if p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{p}")
        }
    }

    pub fn serialize<S: Serializer>(p: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match p {
            None => s.serialize_none(),
            Some(v) if v.is_infinite() => s.serialize_str("inf"),
            Some(v) => s.serialize_f64(*v),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Option::<Raw>::deserialize(d)? {
            None => Ok(None),
            Some(Raw::Num(v)) => Ok(Some(v)),
            Some(Raw::Text(t)) if t == "inf" => Ok(Some(f64::INFINITY)),
            Some(Raw::Text(t)) => Err(serde::de::Error::custom(format!("bad exponent '{t}'"))),
        }
    }
}

/// Like [`exponent`] for a plain (always present) exponent.
pub mod exponent_plain {
    use super::*;

    pub fn serialize<S: Serializer>(p: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        exponent::serialize(&Some(*p), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        exponent::deserialize(d)?.ok_or_else(|| serde::de::Error::custom("missing exponent"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: Option<usize>,
    #[serde(with = "exponent")]
    pub p: Option<f64>,
    pub t: Option<f64>,
    pub param: String,
    pub statistic: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub version: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub budgets: BTreeMap<String, f64>,
    pub rule_hashes: BTreeMap<String, String>,
    pub notes: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            version: LIB_VERSION.to_string(),
            config,
            seeds: Vec::new(),
            budgets: BTreeMap::new(),
            rule_hashes: BTreeMap::new(),
            notes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, n: Option<usize>, p: Option<f64>, t: Option<f64>, param: &str, statistic: &str, value: f64) {
        self.rows.push(ReportRow {
            n,
            p,
            t,
            param: param.to_string(),
            statistic: statistic.to_string(),
            value,
        });
    }

    /// First row matching the given coordinates.
    pub fn find(&self, n: Option<usize>, p: Option<f64>, t: Option<f64>, statistic: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.p == p && r.t == t && r.statistic == statistic)
            .map(|r| r.value)
    }

    /// Merges rows and provenance of another report of the same experiment.
    pub fn merge(&mut self, other: ExperimentReport) {
        self.seeds.extend(other.seeds);
        self.budgets.extend(other.budgets);
        self.rule_hashes.extend(other.rule_hashes);
        self.notes.extend(other.notes);
        self.rows.extend(other.rows);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["experiment", "n", "p", "t", "param", "statistic", "value"])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.rows {
            wr.write_record([
                self.experiment.clone(),
                opt(r.n.map(|n| n.to_string())),
                opt(r.p.map(exponent::to_text)),
                opt(r.t.map(|t| format!("{t}"))),
                r.param.clone(),
                r.statistic.clone(),
                format!("{:e}", r.value),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, csv_path: impl AsRef<Path>, json_path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(csv_path)?)?;
        std::fs::write(json_path, self.to_json()?)?;
        Ok(())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: impl AsRef<Path>) -> Result<String> {
    Ok(sha256_hex(&std::fs::read(path)?))
}
