//! Built-in curve registry, report files and degree-data ingestion.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::census::{CensusError, CensusReport};
use crate::curve::{CurveError, CurveOverQ};
use crate::density::{
    gl2_order, parse_decimal, to_decimal, DegreeProfile, DensityError, DensityReport, Interval, Rational,
    Rounding, Vanishing,
};
use crate::entangle::EntangleError;
use crate::galois_image::GaloisError;
use crate::modmath;

pub const SCHEMA_VERSION: u32 = 1;
pub const TABLE_LIMIT: u64 = 1_000_000;
pub const FIXTURE_ENV: &str = "CYCLORED_FIXTURES";

#[derive(Debug, Error)]
pub enum AppError {
    #[error("unknown curve label {0:?}")]
    UnknownLabel(String),
    #[error("no fixture at {0}")]
    FixtureMissing(PathBuf),
    #[error("unexpected payload: {0}")]
    SchemaMismatch(String),
    #[error("remote ingestion is not compiled in")]
    RemoteDisabled,
    #[error("remote fetch failed: {0}")]
    Remote(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Census(#[from] CensusError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error(transparent)]
    Entangle(#[from] EntangleError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

impl AppError {
    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        AppError::Io { path: path.to_path_buf(), message: e.to_string() }
    }

    /// 2 for bad input, 4 for file system trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Io { .. } | AppError::FixtureMissing(_) | AppError::Remote(_) => 4,
            AppError::Census(CensusError::Io(_) | CensusError::CheckpointCorrupt { .. }) => 4,
            _ => 2,
        }
    }
}

/// Values printed alongside a registry curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub cyclic_count: u64,
    pub total_primes: u64,
    pub fraction: String,
    pub naive: String,
    pub delta: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub label: String,
    pub a: i64,
    pub b: i64,
    pub profile: DegreeProfile,
    pub expected: Option<Expected>,
}

impl CurveSpec {
    pub fn curve(&self) -> Result<CurveOverQ, CurveError> {
        CurveOverQ::new(self.a, self.b)
    }
}

fn expected(cyclic_count: u64, fraction: &str, naive: &str, delta: &str) -> Option<Expected> {
    Some(Expected {
        cyclic_count,
        total_primes: 78_498,
        fraction: fraction.into(),
        naive: naive.into(),
        delta: delta.into(),
    })
}

/// The five curves of the census table.
pub fn registry() -> Vec<CurveSpec> {
    let ex2_profile = {
        // K_2 = Q(sqrt(-11)) lies in K_11, so any composite containing 11
        // has the degree of the same composite without 2.
        let mut p = DegreeProfile::with_degrees(&[(2, 2)]);
        p.superfluous.insert(11);
        for m in [22u64, 66, 110, 330] {
            let d: u128 = modmath::prime_factors(m / 2).iter().map(|&l| gl2_order(l)).product();
            p.overrides.insert(m, d as u64);
        }
        p
    };
    let charsum = |degrees: &[(u64, u64)], primes: &[u64]| {
        let mut p = DegreeProfile::with_degrees(degrees);
        p.charsum = primes.iter().copied().collect();
        p
    };
    vec![
        CurveSpec {
            label: "serre-ex1".into(),
            a: -3,
            b: 1,
            profile: DegreeProfile::with_degrees(&[(2, 3)]),
            expected: expected(51_105, "0.6510", "0.6510015", "0.6510015"),
        },
        CurveSpec {
            label: "serre-ex2".into(),
            a: 2,
            b: 3,
            profile: ex2_profile,
            expected: expected(38_383, "0.4889", "0.48825114", "0.4882881"),
        },
        CurveSpec {
            label: "serre-ex3".into(),
            a: -12096,
            b: -544752,
            profile: charsum(&[(3, 2)], &[2, 19]),
            expected: expected(32_652, "0.4159", "0.4155329", "0.4155335"),
        },
        CurveSpec {
            label: "serre-ex4".into(),
            a: 1,
            b: 3,
            profile: charsum(&[], &[2, 13, 19]),
            expected: expected(63_910, "0.8141", "0.8137519", "0.8137519"),
        },
        CurveSpec {
            label: "serre-ex5".into(),
            a: -13392,
            b: -1080432,
            profile: charsum(&[(5, 4)], &[2, 11]),
            expected: expected(48_026, "0.6118", "0.6115881", "0.6115973"),
        },
    ]
}

pub fn lookup(label: &str) -> Result<CurveSpec, AppError> {
    registry()
        .into_iter()
        .find(|s| s.label == label)
        .ok_or_else(|| AppError::UnknownLabel(label.into()))
}

/// Whether `x` lies within one unit in the last place of the printed
/// decimal `printed`.
pub fn matches_printed(x: &Interval, printed: &str) -> bool {
    let Some(center) = parse_decimal(printed) else {
        return false;
    };
    let digits = printed.split_once('.').map_or(0, |(_, f)| f.len());
    let ulp = Rational::new(1.into(), num_bigint::BigInt::from(10u32).pow(digits as u32));
    x.within(&center, &ulp)
}

/// `count / total` cut (not rounded) to `digits` decimals, the way the
/// census table prints its fractions.
pub fn truncated_fraction(count: u64, total: u64, digits: u32) -> String {
    let scale = 10u128.pow(digits);
    let cut = count as u128 * scale / total.max(1) as u128;
    format!("{}.{:0width$}", cut / scale, cut % scale, width = digits as usize)
}

/// Write `bytes` to a temporary file next to `path`, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), AppError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| AppError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| AppError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| AppError::io(path, e))?;
    tmp.persist(path).map_err(|e| AppError::io(path, e.error))?;
    Ok(())
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), AppError> {
    write_atomic(path, to_json_pretty(value).as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| AppError::SchemaMismatch(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusReportFile {
    pub schema_version: u32,
    pub label: Option<String>,
    pub report: CensusReport,
    pub expected: Option<Expected>,
    pub matches_expected: Option<bool>,
}

impl CensusReportFile {
    /// Expected values only apply at the table's limit of `10^6`.
    pub fn new(label: Option<String>, report: CensusReport, expected: Option<Expected>) -> Self {
        let expected = expected.filter(|_| report.limit == TABLE_LIMIT);
        let matches_expected = expected.as_ref().map(|e| {
            report.cyclic_count == e.cyclic_count
                && report.total_primes == e.total_primes
                && truncated_fraction(report.cyclic_count, report.total_primes, 4) == e.fraction
        });
        CensusReportFile { schema_version: SCHEMA_VERSION, label, report, expected, matches_expected }
    }
}

/// An interval written as outward-rounded decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecimalInterval {
    pub lo: String,
    pub hi: String,
}

pub const REPORT_DIGITS: usize = 20;

impl From<&Interval> for DecimalInterval {
    fn from(x: &Interval) -> Self {
        DecimalInterval {
            lo: to_decimal(x.lo(), REPORT_DIGITS, Rounding::Down),
            hi: to_decimal(x.hi(), REPORT_DIGITS, Rounding::Up),
        }
    }
}

impl DecimalInterval {
    pub fn to_interval(&self) -> Option<Interval> {
        Some(Interval::new(parse_decimal(&self.lo)?, parse_decimal(&self.hi)?))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityReportFile {
    pub schema_version: u32,
    pub label: Option<String>,
    pub profile: DegreeProfile,
    pub truncation: u64,
    pub a_inf: DecimalInterval,
    pub naive: DecimalInterval,
    pub delta: DecimalInterval,
    /// Exact rationals as `n/d`.
    pub charsum_alpha: String,
    pub superfluous_factor: String,
    pub alpha: String,
    pub c_factor: String,
    pub vanishing: Vanishing,
    pub expected: Option<Expected>,
    pub matches_expected: Option<bool>,
}

impl DensityReportFile {
    pub fn new(label: Option<String>, profile: &DegreeProfile, r: &DensityReport, expected: Option<Expected>) -> Self {
        let matches_expected =
            expected.as_ref().map(|e| matches_printed(&r.naive, &e.naive) && matches_printed(&r.delta, &e.delta));
        DensityReportFile {
            schema_version: SCHEMA_VERSION,
            label,
            profile: profile.clone(),
            truncation: r.truncation,
            a_inf: (&r.a_inf).into(),
            naive: (&r.naive).into(),
            delta: (&r.delta).into(),
            charsum_alpha: r.charsum_alpha.to_string(),
            superfluous_factor: r.superfluous_factor.to_string(),
            alpha: r.alpha.to_string(),
            c_factor: r.c_factor.to_string(),
            vanishing: r.vanishing,
            expected,
            matches_expected,
        }
    }
}

/// A degree profile on disk, optionally tied to a curve.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileFile {
    pub schema_version: u32,
    pub curve: Option<CurveOverQ>,
    pub profile: DegreeProfile,
}

/// Accepts a [`ProfileFile`] or a bare profile object.
pub fn load_profile(path: &Path) -> Result<DegreeProfile, AppError> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let profile = match serde_json::from_str::<ProfileFile>(&text) {
        Ok(f) => f.profile,
        Err(_) => serde_json::from_str::<DegreeProfile>(&text)
            .map_err(|e| AppError::SchemaMismatch(format!("{}: {e}", path.display())))?,
    };
    profile.validate()?;
    Ok(profile)
}

/// Mod-`l` image data in the layout of the LMFDB curve records: image
/// labels `level.index.genus.tiebreak`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImagePayload {
    pub a: i64,
    pub b: i64,
    pub nonmax_primes: Vec<u64>,
    pub modell_images: Vec<String>,
}

/// `l -> [K_l : Q] = #GL_2(F_l) / index` for every listed image.
pub fn parse_image_payload(text: &str) -> Result<(CurveOverQ, BTreeMap<u64, u64>), AppError> {
    let payload: ImagePayload =
        serde_json::from_str(text).map_err(|e| AppError::SchemaMismatch(e.to_string()))?;
    let curve = CurveOverQ::new(payload.a, payload.b)?;
    let mut degrees = BTreeMap::new();
    for label in &payload.modell_images {
        let parts: Vec<&str> = label.split('.').collect();
        let bad = || AppError::SchemaMismatch(format!("image label {label:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let level: u64 = parts[0].parse().map_err(|_| bad())?;
        let index: u64 = parts[1].parse().map_err(|_| bad())?;
        if !modmath::is_prime(level) || index == 0 || !gl2_order(level).is_multiple_of(index as u128) {
            return Err(bad());
        }
        degrees.insert(level, (gl2_order(level) / index as u128) as u64);
    }
    let listed: Vec<u64> = degrees.keys().copied().collect();
    let mut declared = payload.nonmax_primes.clone();
    declared.sort_unstable();
    if listed != declared {
        return Err(AppError::SchemaMismatch(format!(
            "nonmax_primes {declared:?} disagree with image levels {listed:?}"
        )));
    }
    Ok((curve, degrees))
}

pub fn default_fixture_dir() -> PathBuf {
    match std::env::var_os(FIXTURE_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join("lmfdb"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestSource {
    Offline { fixtures: PathBuf },
    /// `GET {endpoint}/{label}.json`, cached into `fixtures`.
    Remote { endpoint: String, fixtures: PathBuf },
}

impl IngestSource {
    pub fn offline() -> Self {
        IngestSource::Offline { fixtures: default_fixture_dir() }
    }

    fn fixtures(&self) -> &Path {
        match self {
            IngestSource::Offline { fixtures } | IngestSource::Remote { fixtures, .. } => fixtures,
        }
    }
}

#[cfg(feature = "remote")]
fn fetch_remote(endpoint: &str, label: &str) -> Result<String, AppError> {
    let url = format!("{}/{label}.json", endpoint.trim_end_matches('/'));
    let mut resp = ureq::get(&url).call().map_err(|e| AppError::Remote(e.to_string()))?;
    resp.body_mut().read_to_string().map_err(|e| AppError::Remote(e.to_string()))
}

#[cfg(not(feature = "remote"))]
fn fetch_remote(_endpoint: &str, _label: &str) -> Result<String, AppError> {
    Err(AppError::RemoteDisabled)
}

/// The nonmaximal degrees of `label` as a profile. Registry curves are
/// checked against the payload's coefficients.
pub fn ingest_degrees(source: &IngestSource, label: &str) -> Result<DegreeProfile, AppError> {
    let path = source.fixtures().join(format!("{label}.json"));
    let text = match source {
        IngestSource::Offline { .. } => {
            if !path.is_file() {
                return Err(AppError::FixtureMissing(path));
            }
            fs::read_to_string(&path).map_err(|e| AppError::io(&path, e))?
        }
        IngestSource::Remote { endpoint, .. } => {
            let text = fetch_remote(endpoint, label)?;
            parse_image_payload(&text)?;
            fs::create_dir_all(source.fixtures()).map_err(|e| AppError::io(source.fixtures(), e))?;
            write_atomic(&path, text.as_bytes())?;
            text
        }
    };
    let (curve, degrees) = parse_image_payload(&text)?;
    if let Ok(spec) = lookup(label) {
        if (spec.a, spec.b) != (curve.a(), curve.b()) {
            return Err(AppError::SchemaMismatch(format!(
                "fixture for {label} describes ({}, {})",
                curve.a(),
                curve.b()
            )));
        }
    }
    let profile = DegreeProfile { degrees, ..Default::default() };
    profile.validate()?;
    Ok(profile)
}

/// Density report for a registry label at truncation `bound`.
pub fn registry_density(label: &str, bound: u64) -> Result<(CurveSpec, DensityReport), AppError> {
    let spec = lookup(label)?;
    let report = DensityReport::build(&spec.profile, bound, None)?;
    Ok((spec, report))
}

/// Default truncation bound for density reports.
pub const DEFAULT_TRUNCATION: u64 = 100_000;
