//! Sampled verifiers: the overlap inequality, (local) hyper-minimality,
//! orbit density and the invariant-hull coverage probe.
//!
//! Universal quantifiers are checked on finite samples only; reports carry
//! their sample counts and seeds and never claim a proof.

mod density;
mod overlap;
mod witness;

pub use density::{check_minimality_density, density_ratio, invariant_hull_coverage, Coverage, DensityReport, EpsGrid};
pub use overlap::{check_overlap_number, closed_form_relative_margin, OverlapParams, RadiusSummary};
pub use witness::{
    certify, check_hyper_minimal, check_local_hyper_minimal, find_witness, Certificate, SearchBudget, Strategy,
    WitnessConstructor, WitnessResult,
};

use std::io::Write;
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::Word;

/// Generator for sample `index` of a run seeded with `seed`; streams are
/// independent so samples can be evaluated in any order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One sampled instance of a condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub id: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r: f64,
    pub found: bool,
    pub certified_distance: f64,
    pub margin: f64,
    pub word: Option<Word>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub samples: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub min_margin: f64,
    pub mean_margin: f64,
}

impl Aggregate {
    pub fn of(rows: &[SampleRow]) -> Self {
        let n = rows.len();
        let successes = rows.iter().filter(|r| r.found).count();
        let margins = rows.iter().map(|r| r.margin).filter(|m| m.is_finite());
        let (min, sum, k) = margins.fold((f64::INFINITY, 0.0, 0usize), |(mn, s, k), m| (mn.min(m), s + m, k + 1));
        Aggregate {
            samples: n,
            successes,
            success_rate: if n == 0 { 0.0 } else { successes as f64 / n as f64 },
            min_margin: if k == 0 { f64::NEG_INFINITY } else { min },
            mean_margin: if k == 0 { f64::NEG_INFINITY } else { sum / k as f64 },
        }
    }
}

/// Structured outcome of a verifier run. Serialising it twice from the same
/// inputs gives identical bytes; the wall-clock runtime is kept out of the
/// serialised form for that reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierReport {
    pub condition: String,
    pub system: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub note: String,
    pub aggregate: Aggregate,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
    pub samples: Vec<SampleRow>,
    #[serde(skip)]
    pub runtime: Duration,
}

const SAMPLED_NOTE: &str = "sampled check on finitely many instances; not a proof";

impl VerifierReport {
    pub(crate) fn new(
        condition: &str,
        system: &str,
        parameters: serde_json::Value,
        seed: u64,
        samples: Vec<SampleRow>,
    ) -> Self {
        VerifierReport {
            condition: condition.to_string(),
            system: system.to_string(),
            parameters,
            seed,
            note: SAMPLED_NOTE.to_string(),
            aggregate: Aggregate::of(&samples),
            details: serde_json::Value::Null,
            samples,
            runtime: Duration::ZERO,
        }
    }

    /// Every sample succeeded.
    pub fn holds(&self) -> bool {
        self.aggregate.samples > 0 && self.aggregate.successes == self.aggregate.samples
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// Per-sample rows with columns `id, x, y, r, found, certified_distance,
    /// margin, word`; coordinates are space separated.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Input(format!("writing CSV: {e}"));
        w.write_record(["id", "x", "y", "r", "found", "certified_distance", "margin", "word"]).map_err(io)?;
        let join = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ");
        for s in &self.samples {
            w.write_record([
                s.id.to_string(),
                join(&s.x),
                join(&s.y),
                s.r.to_string(),
                s.found.to_string(),
                s.certified_distance.to_string(),
                s.margin.to_string(),
                s.word.as_ref().map(|w| w.to_string()).unwrap_or_default(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Input(format!("writing CSV: {e}")))
    }
}
