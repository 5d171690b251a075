//! Prime census: classify every prime up to a bound as bad, cyclic or
//! non-cyclic reduction, and aggregate the counts.
//!
//! Primes are processed in chunks of [`CHUNK_PRIMES`] consecutive primes.
//! Chunk tallies are plain integer sums, so the report does not depend on
//! the number of workers. Completed chunks can be appended to a
//! line-delimited checkpoint and reused by a later run.

use std::collections::{BTreeMap, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{CurveError, CurveOverQ, GroupStructure};
use crate::modmath::{self, divisors, moebius, prime_factors};

pub const CHUNK_PRIMES: usize = 4096;

pub const DEFAULT_SPLIT_PRIMES: [u64; 4] = [2, 3, 5, 7];

#[derive(Debug, Error)]
pub enum CensusError {
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("census limit must be at least 2, got {0}")]
    LimitTooSmall(u64),
    #[error("census limit {0} exceeds 2^32")]
    LimitTooLarge(u64),
    #[error("split prime {0} is not a prime")]
    BadSplitPrime(u64),
    #[error("{0} is not a squarefree product of the configured split primes")]
    BadModulus(u64),
    #[error("corrupt checkpoint at line {line}: {reason}")]
    CheckpointCorrupt { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    BadReduction,
    Cyclic,
    NonCyclic,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::BadReduction => "bad_reduction",
            Status::Cyclic => "cyclic",
            Status::NonCyclic => "non_cyclic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeClassification {
    pub p: u64,
    pub status: Status,
    /// Primes `l` with full `l`-torsion, i.e. the prime factors of `d`.
    pub obstruction_primes: Vec<u64>,
    pub structure: Option<GroupStructure>,
}

pub fn classify_prime(curve: &CurveOverQ, p: u64) -> Result<PrimeClassification, CensusError> {
    if curve.has_bad_reduction(p) {
        return Ok(PrimeClassification {
            p,
            status: Status::BadReduction,
            obstruction_primes: Vec::new(),
            structure: None,
        });
    }
    let structure = curve.reduce(p)?.group_structure()?;
    let obstruction_primes = prime_factors(structure.d);
    let status = if obstruction_primes.is_empty() {
        Status::Cyclic
    } else {
        Status::NonCyclic
    };
    Ok(PrimeClassification {
        p,
        status,
        obstruction_primes,
        structure: Some(structure),
    })
}

/// Additive counts over a set of primes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub total: u64,
    pub good: u64,
    pub cyclic: u64,
    /// Good primes keyed by `gcd(d, product of split primes)`.
    pub by_torsion: BTreeMap<u64, u64>,
}

impl Tally {
    fn record(&mut self, c: &PrimeClassification, split_product: u64) {
        self.total += 1;
        if let Some(s) = c.structure {
            self.good += 1;
            if s.d == 1 {
                self.cyclic += 1;
            }
            *self.by_torsion.entry(modmath::gcd(s.d, split_product)).or_default() += 1;
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.total += other.total;
        self.good += other.good;
        self.cyclic += other.cyclic;
        for (&k, &v) in &other.by_torsion {
            *self.by_torsion.entry(k).or_default() += v;
        }
    }

    /// Good primes with full `m`-torsion, for `m` dividing the split product.
    pub fn full_torsion_count(&self, m: u64) -> u64 {
        self.by_torsion
            .iter()
            .filter(|(&k, _)| k % m == 0)
            .map(|(_, &v)| v)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    pub curve: CurveOverQ,
    pub limit: u64,
    pub total_primes: u64,
    pub good_primes: u64,
    pub cyclic_count: u64,
    pub fraction: f64,
    /// `l -> #{good p <= limit with full l-torsion}`.
    pub split_counts: BTreeMap<u64, u64>,
    pub tally: Tally,
    pub elapsed_seconds: f64,
}

impl CensusReport {
    /// Equality ignoring wall-clock time.
    pub fn same_counts(&self, other: &CensusReport) -> bool {
        let mut a = self.clone();
        a.elapsed_seconds = other.elapsed_seconds;
        a == *other
    }
}

#[derive(Debug, Clone)]
pub struct CensusOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub checkpoint: Option<PathBuf>,
    pub split_primes: Vec<u64>,
    /// Per-prime rows `p,status,obstructions`.
    pub prime_csv: Option<PathBuf>,
    /// Running fraction after each chunk: `x,total,cyclic,fraction`.
    pub running_csv: Option<PathBuf>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            workers: None,
            checkpoint: None,
            split_primes: DEFAULT_SPLIT_PRIMES.to_vec(),
            prime_csv: None,
            running_csv: None,
        }
    }
}

/// One completed chunk as stored in a checkpoint file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkRecord {
    pub chunk: usize,
    pub a: i64,
    pub b: i64,
    pub first: u64,
    pub last: u64,
    pub tally: Tally,
}

impl ChunkRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("chunk record serializes")
    }

    pub fn parse_line(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }
}

/// Load every record of a checkpoint. A final line without a trailing
/// newline is a torn write and is dropped (and truncated from the file);
/// any other malformed line is an error.
pub fn load_checkpoint(path: &Path, curve: &CurveOverQ) -> Result<Vec<ChunkRecord>, CensusError> {
    let raw = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let complete_len = raw.rfind('\n').map_or(0, |i| i + 1);
    let mut records = Vec::new();
    for (i, line) in raw[..complete_len].lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = ChunkRecord::parse_line(line).map_err(|e| CensusError::CheckpointCorrupt {
            line: i + 1,
            reason: e.to_string(),
        })?;
        if rec.a != curve.a() || rec.b != curve.b() {
            return Err(CensusError::CheckpointCorrupt {
                line: i + 1,
                reason: format!("record for curve ({}, {})", rec.a, rec.b),
            });
        }
        if rec.first > rec.last || rec.tally.good > rec.tally.total || rec.tally.cyclic > rec.tally.good
        {
            return Err(CensusError::CheckpointCorrupt {
                line: i + 1,
                reason: "inconsistent counts".into(),
            });
        }
        records.push(rec);
    }
    if complete_len < raw.len() {
        let f = OpenOptions::new().write(true).open(path)?;
        f.set_len(complete_len as u64)?;
    }
    Ok(records)
}

fn check_split_primes(split: &[u64]) -> Result<u64, CensusError> {
    let mut product = 1u64;
    for &l in split {
        if !modmath::is_prime(l) {
            return Err(CensusError::BadSplitPrime(l));
        }
        if !product.is_multiple_of(l) {
            product *= l;
        }
    }
    Ok(product)
}

fn check_limit(x: u64) -> Result<(), CensusError> {
    if x < 2 {
        return Err(CensusError::LimitTooSmall(x));
    }
    if x > modmath::SIEVE_MAX {
        return Err(CensusError::LimitTooLarge(x));
    }
    Ok(())
}

struct ChunkOutcome {
    tally: Tally,
    rows: Vec<PrimeClassification>,
}

fn classify_chunk(
    curve: &CurveOverQ,
    primes: &[u32],
    split_product: u64,
    keep_rows: bool,
) -> Result<ChunkOutcome, CensusError> {
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for &p in primes {
        let c = classify_prime(curve, p as u64)?;
        tally.record(&c, split_product);
        if keep_rows {
            rows.push(c);
        }
    }
    Ok(ChunkOutcome { tally, rows })
}

pub fn run_census(curve: &CurveOverQ, x: u64, opts: &CensusOptions) -> Result<CensusReport, CensusError> {
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| io::Error::other(e.to_string()))?;
            pool.install(|| run_census_inner(curve, x, opts))
        }
        None => run_census_inner(curve, x, opts),
    }
}

fn run_census_inner(curve: &CurveOverQ, x: u64, opts: &CensusOptions) -> Result<CensusReport, CensusError> {
    check_limit(x)?;
    let split_product = check_split_primes(&opts.split_primes)?;
    let start = Instant::now();
    let primes = modmath::sieve_primes(x).expect("limit checked");
    let chunks: Vec<&[u32]> = primes.chunks(CHUNK_PRIMES).collect();

    let mut reusable: HashMap<(usize, u64, u64), Tally> = HashMap::new();
    let mut checkpoint = match &opts.checkpoint {
        Some(path) => {
            for rec in load_checkpoint(path, curve)? {
                reusable.insert((rec.chunk, rec.first, rec.last), rec.tally);
            }
            Some(OpenOptions::new().create(true).append(true).open(path)?)
        }
        None => None,
    };
    let mut prime_csv = opts.prime_csv.as_deref().map(csv_writer).transpose()?;
    if let Some(w) = prime_csv.as_mut() {
        writeln!(w, "p,status,obstructions")?;
    }
    let mut running_csv = opts.running_csv.as_deref().map(csv_writer).transpose()?;
    if let Some(w) = running_csv.as_mut() {
        writeln!(w, "x,total,cyclic,fraction")?;
    }
    let keep_rows = prime_csv.is_some();

    let mut total = Tally::default();
    let wave = rayon::current_num_threads().max(1) * 4;
    for (wave_idx, wave_chunks) in chunks.chunks(wave).enumerate() {
        let base = wave_idx * wave;
        let outcomes: Vec<Result<(ChunkOutcome, bool), CensusError>> = wave_chunks
            .par_iter()
            .enumerate()
            .map(|(off, ps)| {
                let idx = base + off;
                let key = (idx, ps[0] as u64, *ps.last().unwrap() as u64);
                match reusable.get(&key) {
                    Some(t) if !keep_rows => Ok((
                        ChunkOutcome {
                            tally: t.clone(),
                            rows: Vec::new(),
                        },
                        false,
                    )),
                    _ => classify_chunk(curve, ps, split_product, keep_rows).map(|o| (o, !reusable.contains_key(&key))),
                }
            })
            .collect();
        for (off, res) in outcomes.into_iter().enumerate() {
            let (outcome, fresh) = res?;
            let ps = wave_chunks[off];
            if let (Some(f), true) = (checkpoint.as_mut(), fresh) {
                let rec = ChunkRecord {
                    chunk: base + off,
                    a: curve.a(),
                    b: curve.b(),
                    first: ps[0] as u64,
                    last: *ps.last().unwrap() as u64,
                    tally: outcome.tally.clone(),
                };
                writeln!(f, "{}", rec.to_line())?;
                f.flush()?;
            }
            if let Some(w) = prime_csv.as_mut() {
                for row in &outcome.rows {
                    let obs: Vec<String> = row.obstruction_primes.iter().map(u64::to_string).collect();
                    writeln!(w, "{},{},{}", row.p, row.status.as_str(), obs.join(" "))?;
                }
            }
            total.merge(&outcome.tally);
            if let Some(w) = running_csv.as_mut() {
                writeln!(
                    w,
                    "{},{},{},{:.6}",
                    ps.last().unwrap(),
                    total.total,
                    total.cyclic,
                    total.cyclic as f64 / total.total as f64
                )?;
            }
        }
    }
    if let Some(w) = prime_csv.as_mut() {
        w.flush()?;
    }
    if let Some(w) = running_csv.as_mut() {
        w.flush()?;
    }

    let split_counts = opts
        .split_primes
        .iter()
        .map(|&l| (l, total.full_torsion_count(l)))
        .collect();
    Ok(CensusReport {
        curve: *curve,
        limit: x,
        total_primes: total.total,
        good_primes: total.good,
        cyclic_count: total.cyclic,
        fraction: total.cyclic as f64 / total.total as f64,
        split_counts,
        tally: total,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    })
}

fn csv_writer(path: &Path) -> io::Result<io::BufWriter<File>> {
    Ok(io::BufWriter::new(File::create(path)?))
}

/// Number of good primes `p <= x` with full `l`-torsion.
pub fn split_count(curve: &CurveOverQ, l: u64, x: u64) -> Result<u64, CensusError> {
    let opts = CensusOptions {
        split_primes: vec![l],
        ..CensusOptions::default()
    };
    Ok(run_census(curve, x, &opts)?.split_counts[&l])
}

/// Both sides of the finite inclusion-exclusion identity over `m | n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionExclusion {
    pub n: u64,
    /// `sum_{m | n} mu(m) * #{good p <= x with full m-torsion}`.
    pub recount: i64,
    /// `#{good p <= x with no full l-torsion for any l | n}`.
    pub direct: u64,
}

impl InclusionExclusion {
    pub fn holds(&self) -> bool {
        self.recount == self.direct as i64
    }
}

/// Computes both sides from independent per-prime classifications.
pub fn inclusion_exclusion_check(
    curve: &CurveOverQ,
    x: u64,
    n: u64,
) -> Result<InclusionExclusion, CensusError> {
    check_limit(x)?;
    if n == 0 || !modmath::is_squarefree(n) || prime_factors(n).iter().any(|&l| l > 7) {
        return Err(CensusError::BadModulus(n));
    }
    let primes = modmath::sieve_primes(x).expect("limit checked");
    let rows: Vec<PrimeClassification> = primes
        .par_iter()
        .map(|&p| classify_prime(curve, p as u64))
        .collect::<Result<_, _>>()?;
    let good: Vec<&PrimeClassification> = rows.iter().filter(|r| r.structure.is_some()).collect();
    let full_torsion = |m: u64| {
        good.iter()
            .filter(|r| prime_factors(m).iter().all(|l| r.obstruction_primes.contains(l)))
            .count() as i64
    };
    let recount = divisors(n)
        .into_iter()
        .map(|m| moebius(m) as i64 * full_torsion(m))
        .sum();
    let direct = good
        .iter()
        .filter(|r| r.obstruction_primes.iter().all(|l| !n.is_multiple_of(*l)))
        .count() as u64;
    Ok(InclusionExclusion { n, recount, direct })
}
