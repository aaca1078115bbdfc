//! Random real parameter matrices, batch censuses over them, and the
//! ledger of realized triples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certifier::{self, Mode};
use crate::classifier::{self, TripleCount, REALITY_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::ParameterMatrix;
use crate::rng::{Domain, Stream};
use crate::tracker::{self, StartSet, TrackerConfig};

/// Redraws allowed when a draw fails the invertibility threshold.
pub const MAX_REDRAWS: usize = 100;

/// Newton retries the certifier gets before a sample counts as uncertified.
const CERTIFY_RETRIES: usize = 2;

#[derive(Clone, Debug)]
pub enum SampleMode {
    Uniform,
    Ball { center: ParameterMatrix, radius: f64 },
}

#[derive(Clone, Debug)]
pub struct SampleConfig {
    pub count: usize,
    pub seed: u64,
    pub mode: SampleMode,
    pub certify: bool,
    pub execution: Execution,
}

impl SampleConfig {
    pub fn uniform(count: usize, seed: u64) -> Self {
        Self {
            count,
            seed,
            mode: SampleMode::Uniform,
            certify: false,
            execution: Execution::default(),
        }
    }

    pub fn ball(count: usize, seed: u64, center: ParameterMatrix, radius: f64) -> Self {
        Self {
            mode: SampleMode::Ball { center, radius },
            ..Self::uniform(count, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let SampleMode::Ball { center, radius } = &self.mode {
            if !(*radius > 0.0 && *radius < 1.0) {
                return Err(Error::parse("radius", format!("{radius} is not in (0, 1)")));
            }
            if !center.is_real() {
                return Err(Error::parse("center", "ball sampling needs a real center"));
            }
        }
        Ok(())
    }
}

/// Unit length, last coordinate nonnegative.
fn normalize(v: &mut [f64; 16]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v[15] < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
}

fn to_matrix(v: &[f64; 16]) -> Result<ParameterMatrix> {
    ParameterMatrix::from_real(std::array::from_fn(|i| std::array::from_fn(|j| v[4 * i + j])))
}

fn draw_normals(stream: &mut Stream) -> [f64; 16] {
    std::array::from_fn(|_| stream.normal())
}

/// Redraws from one stream until the matrix is invertible.
fn with_redraws(seed: u64, index: u64, mut draw: impl FnMut(&mut Stream) -> [f64; 16]) -> Result<ParameterMatrix> {
    let mut stream = Stream::new(seed, Domain::Matrix, index);
    for _ in 0..MAX_REDRAWS {
        let mut v = draw(&mut stream);
        normalize(&mut v);
        match to_matrix(&v) {
            Ok(m) => return Ok(m),
            Err(Error::SingularMatrix { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SamplingExhausted(MAX_REDRAWS))
}

/// A uniform point of real projective 15-space, as a unit-norm matrix with
/// `m44 >= 0`: normalized standard Gaussian 16-vector.
pub fn sample_uniform(seed: u64, index: u64) -> Result<ParameterMatrix> {
    with_redraws(seed, index, draw_normals)
}

/// The center normalized to unit length with the sign convention.
pub fn normalized_center(center: &ParameterMatrix) -> [f64; 16] {
    let mut c = center.real_entries();
    normalize(&mut c);
    c
}

/// A uniform point of the radius-`radius` ball around the normalized center,
/// re-projected to unit length.
pub fn sample_ball(center: &ParameterMatrix, radius: f64, seed: u64, index: u64) -> Result<ParameterMatrix> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::parse("radius", format!("{radius} is not in (0, 1)")));
    }
    let c = normalized_center(center);
    with_redraws(seed, index, |stream| {
        let mut dir = draw_normals(stream);
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = radius * stream.uniform().powf(1.0 / 16.0);
        for (d, ck) in dir.iter_mut().zip(c) {
            *d = ck + r * *d / norm;
        }
        dir
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleStatus {
    Ok,
    SamplingFailed,
    NonGeneric,
    ClassificationFailed,
}

impl std::fmt::Display for SampleStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleStatus::Ok => "ok",
            SampleStatus::SamplingFailed => "sampling-failed",
            SampleStatus::NonGeneric => "non-generic",
            SampleStatus::ClassificationFailed => "classification-failed",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    #[serde(skip)]
    pub matrix: Option<ParameterMatrix>,
    pub triple: Option<TripleCount>,
    pub status: SampleStatus,
    /// Failure details for non-ok samples.
    pub message: Option<String>,
    pub certified: bool,
}

impl SampleRecord {
    fn failed(index: u64, matrix: Option<ParameterMatrix>, status: SampleStatus, e: Error) -> Self {
        Self {
            index,
            matrix,
            triple: None,
            status,
            message: Some(e.to_string()),
            certified: false,
        }
    }
}

/// Solves, classifies and optionally certifies one real parameter matrix.
pub fn census_sample(index: u64, m: ParameterMatrix, start: &StartSet, tracker: &TrackerConfig, certify: bool) -> SampleRecord {
    let solved = match tracker::solve_at_parameter(&m, start, tracker) {
        Ok(s) => s,
        Err(e) => return SampleRecord::failed(index, Some(m), SampleStatus::NonGeneric, e),
    };
    let mut orbits = solved.orbits;
    let heuristic = classifier::classify_records(&mut orbits, REALITY_TOL)
        .and_then(|()| classifier::link_conjugates(&mut orbits))
        .and_then(|()| classifier::census(&orbits));
    let triple = match heuristic {
        Ok(t) => t,
        Err(e) => return SampleRecord::failed(index, Some(m), SampleStatus::ClassificationFailed, e),
    };
    let certified = certify
        && certifier::certify_census(&m, &orbits, Mode::Fast, Execution::Sequential, CERTIFY_RETRIES)
            .is_ok_and(|(report, _)| report.census_certified == Some(triple));
    SampleRecord {
        index,
        matrix: Some(m),
        triple: Some(triple),
        status: SampleStatus::Ok,
        message: None,
        certified,
    }
}

/// Counts of real-secant numbers and triples over the successful samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub by_nr: BTreeMap<u8, u64>,
    pub by_triple: BTreeMap<TripleCount, u64>,
    pub total: u64,
    pub failures: u64,
}

impl FrequencyTable {
    pub fn add(&mut self, record: &SampleRecord) {
        self.total += 1;
        match record.triple {
            Some(t) => {
                *self.by_nr.entry(t.n_r()).or_default() += 1;
                *self.by_triple.entry(t).or_default() += 1;
            }
            None => self.failures += 1,
        }
    }

    pub fn from_records(records: &[SampleRecord]) -> Self {
        let mut table = Self::default();
        records.iter().for_each(|r| table.add(r));
        table
    }

    pub fn merge(mut self, other: &Self) -> Self {
        for (k, v) in &other.by_nr {
            *self.by_nr.entry(*k).or_default() += v;
        }
        for (k, v) in &other.by_triple {
            *self.by_triple.entry(*k).or_default() += v;
        }
        self.total += other.total;
        self.failures += other.failures;
        self
    }

    pub fn successes(&self) -> u64 {
        self.total - self.failures
    }

    /// Share of successful samples with `n_r` real secants.
    pub fn nr_fraction(&self, n_r: u8) -> f64 {
        let n = self.successes();
        if n == 0 {
            return 0.0;
        }
        self.by_nr.get(&n_r).copied().unwrap_or(0) as f64 / n as f64
    }

    /// Triples by decreasing count, ties broken by the triple order.
    pub fn ranked_triples(&self) -> Vec<(TripleCount, u64)> {
        let mut ranked: Vec<_> = self.by_triple.iter().map(|(t, c)| (*t, *c)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked
    }

    pub fn is_consistent(&self) -> bool {
        self.by_nr.values().sum::<u64>() == self.successes()
            && self.by_triple.values().sum::<u64>() == self.successes()
    }
}

#[derive(Clone, Debug)]
pub struct Batch {
    pub records: Vec<SampleRecord>,
    pub table: FrequencyTable,
}

/// Draws and censuses `config.count` samples; sample `i` depends only on
/// `(config.seed, i)`.
pub fn run_batch(config: &SampleConfig, start: &StartSet, tracker: &TrackerConfig) -> Result<Batch> {
    config.validate()?;
    let inner = TrackerConfig {
        execution: Execution::Sequential,
        ..tracker.clone()
    };
    let records = config.execution.map(config.count, |i| {
        let index = i as u64;
        let matrix = match &config.mode {
            SampleMode::Uniform => sample_uniform(config.seed, index),
            SampleMode::Ball { center, radius } => sample_ball(center, *radius, config.seed, index),
        };
        match matrix {
            Ok(m) => census_sample(index, m, start, &inner, config.certify),
            Err(e) => SampleRecord::failed(index, None, SampleStatus::SamplingFailed, e),
        }
    });
    let table = FrequencyTable::from_records(&records);
    Ok(Batch { records, table })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Where the first witness came from, e.g. `uniform:seed=7#123`.
    pub witness: String,
    pub count: u64,
}

/// Realized triples with a reference to their first witness.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RealizabilityLedger {
    pub entries: BTreeMap<TripleCount, LedgerEntry>,
}

impl RealizabilityLedger {
    /// Adds every certified record; returns the triples that are new to the ledger.
    pub fn update(&mut self, records: &[SampleRecord], source: &str) -> Result<Vec<TripleCount>> {
        let mut added = Vec::new();
        for record in records.iter().filter(|r| r.certified) {
            let Some(triple) = record.triple else { continue };
            if !triple.is_admissible() {
                return Err(Error::InadmissibleTuple(triple));
            }
            self.entries
                .entry(triple)
                .and_modify(|e| e.count += 1)
                .or_insert_with(|| {
                    added.push(triple);
                    LedgerEntry {
                        witness: format!("{source}#{}", record.index),
                        count: 1,
                    }
                });
        }
        Ok(added)
    }

    pub fn realized(&self) -> Vec<TripleCount> {
        self.entries.keys().copied().collect()
    }

    /// Ledger contents against the admissible tuples and the compiled table.
    pub fn diff(&self) -> Result<classifier::RealizabilityDiff> {
        classifier::realizability_diff(&self.entries.keys().copied().collect())
    }

    /// JSON object keyed by `"(n_t,n_p,n_m)"`.
    pub fn to_json(&self) -> serde_json::Value {
        let map: BTreeMap<String, &LedgerEntry> = self.entries.iter().map(|(t, e)| (t.to_string(), e)).collect();
        serde_json::to_value(map).expect("ledger serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let map: BTreeMap<String, LedgerEntry> = serde_json::from_value(value.clone())?;
        let entries = map
            .into_iter()
            .map(|(k, e)| {
                let t: TripleCount = k.parse().map_err(|_| Error::parse("ledger", format!("bad triple {k:?}")))?;
                Ok((t, e))
            })
            .collect::<Result<_>>()?;
        Ok(Self { entries })
    }
}

/// Distance between the normalized real entry vectors of two matrices.
pub fn normalized_distance(a: &ParameterMatrix, b: &ParameterMatrix) -> f64 {
    let (x, y) = (normalized_center(a), normalized_center(b));
    x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data;

    #[test]
    fn uniform_samples_are_normalized_and_reproducible() {
        for i in 0..50 {
            let m = sample_uniform(3, i).unwrap();
            assert!((m.frobenius_norm() - 1.0).abs() < 1e-12);
            assert!(m.entry(4, 4).re >= 0.0);
            assert!(m.is_real());
            assert_eq!(m, sample_uniform(3, i).unwrap());
        }
        assert_ne!(sample_uniform(3, 0).unwrap(), sample_uniform(3, 1).unwrap());
        assert_ne!(sample_uniform(3, 0).unwrap(), sample_uniform(4, 0).unwrap());
    }

    #[test]
    fn uniform_mean_is_near_zero() {
        // Before the sign flip the 16-vectors are symmetric; after it only the
        // last coordinate is biased (mean E|z|/sqrt(16) ~ 0.2), so check the rest.
        let n = 100_000;
        let mut mean = [0.0; 15];
        for i in 0..n {
            let v = sample_uniform(1, i).unwrap().real_entries();
            for k in 0..15 {
                mean[k] += v[k] / n as f64;
            }
        }
        let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm < 0.02, "mean norm {norm}");
    }

    #[test]
    fn ball_samples_stay_near_center() {
        let center = data::reference().base_matrix();
        let c = normalized_center(&center);
        for i in 0..100 {
            let m = sample_ball(&center, 0.05, 9, i).unwrap();
            assert!((m.frobenius_norm() - 1.0).abs() < 1e-12);
            // Re-projection of a point within r of a unit vector moves it by at most r.
            let d: f64 = m.real_entries().iter().zip(c).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d <= 2.0 * 0.05, "{d}");
        }
        let tiny = sample_ball(&center, 1e-12, 9, 0).unwrap();
        assert!(normalized_distance(&tiny, &center) < 1e-11);
        assert!(sample_ball(&center, 1.5, 9, 0).is_err());
    }

    #[test]
    fn empty_batch() {
        let config = TrackerConfig::default();
        let start = tracker::bootstrap_start_set(&config).unwrap();
        let batch = run_batch(&SampleConfig::uniform(0, 1), &start, &config).unwrap();
        assert!(batch.records.is_empty());
        assert_eq!(batch.table, FrequencyTable::default());
    }

    #[test]
    fn frequency_table_reconciles() {
        let record = |triple: Option<TripleCount>| SampleRecord {
            index: 0,
            matrix: None,
            triple,
            status: if triple.is_some() { SampleStatus::Ok } else { SampleStatus::NonGeneric },
            message: None,
            certified: false,
        };
        let records = vec![
            record(Some(TripleCount::new(0, 1, 1))),
            record(Some(TripleCount::new(0, 1, 1))),
            record(Some(TripleCount::new(2, 0, 0))),
            record(None),
        ];
        let table = FrequencyTable::from_records(&records);
        assert!(table.is_consistent());
        assert_eq!(table.total, 4);
        assert_eq!(table.failures, 1);
        assert_eq!(table.by_nr[&2], 3);
        assert_eq!(table.ranked_triples()[0], (TripleCount::new(0, 1, 1), 2));
        let doubled = table.clone().merge(&table);
        assert_eq!(doubled.total, 8);
        assert!(doubled.is_consistent());
        assert!((table.nr_fraction(2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ledger_keeps_first_witness() {
        let record = |index, triple, certified| SampleRecord {
            index,
            matrix: None,
            triple: Some(triple),
            status: SampleStatus::Ok,
            message: None,
            certified,
        };
        let t = TripleCount::new(0, 1, 1);
        let mut ledger = RealizabilityLedger::default();
        assert!(ledger.update(&[], "x").unwrap().is_empty());
        assert_eq!(ledger, RealizabilityLedger::default());
        let added = ledger.update(&[record(4, t, true), record(9, t, true), record(1, TripleCount::new(2, 0, 0), false)], "u").unwrap();
        assert_eq!(added, vec![t]);
        assert_eq!(ledger.entries[&t], LedgerEntry { witness: "u#4".into(), count: 2 });
        let round = RealizabilityLedger::from_json(&ledger.to_json()).unwrap();
        assert_eq!(round, ledger);
        let bad = ledger.update(&[record(0, TripleCount::new(1, 0, 0), true)], "u");
        assert!(matches!(bad, Err(Error::InadmissibleTuple(_))));
    }
}
