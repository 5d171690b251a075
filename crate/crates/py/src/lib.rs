//! Python bindings for the census, density and group computations.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cyclored::app::{self, AppError};
use cyclored::census::{self, CensusOptions};
use cyclored::density::{self, DegreeProfile, DensityReport};
use cyclored::entangle::GroupDescription;
use cyclored::galois_image;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn app_err(e: AppError) -> PyErr {
    match e.exit_code() {
        4 => PyOSError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

/// `y^2 = x^3 + a x + b` over the rationals.
#[pyclass(name = "Curve", frozen)]
struct Curve {
    inner: cyclored::CurveOverQ,
}

#[pymethods]
impl Curve {
    #[new]
    fn new(a: i64, b: i64) -> PyResult<Self> {
        Ok(Curve { inner: cyclored::CurveOverQ::new(a, b).map_err(value_err)? })
    }

    /// A registry curve such as `serre-ex1`.
    #[staticmethod]
    fn from_label(label: &str) -> PyResult<Self> {
        let spec = app::lookup(label).map_err(app_err)?;
        Ok(Curve { inner: spec.curve().map_err(value_err)? })
    }

    #[getter]
    fn a(&self) -> i64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> i64 {
        self.inner.b()
    }

    #[getter]
    fn discriminant(&self) -> i128 {
        self.inner.discriminant()
    }

    fn has_bad_reduction(&self, p: u64) -> bool {
        self.inner.has_bad_reduction(p)
    }

    /// `(N, d, e)` with `E(F_p) = Z/d x Z/e`.
    fn group_structure(&self, p: u64) -> PyResult<(u64, u64, u64)> {
        let s = self.inner.reduce(p).and_then(|c| c.group_structure()).map_err(value_err)?;
        Ok((s.order, s.d, s.e))
    }

    fn is_cyclic(&self, p: u64) -> PyResult<bool> {
        self.inner.reduce(p).and_then(|c| c.is_cyclic()).map_err(value_err)
    }

    fn frobenius_trace(&self, p: u64) -> PyResult<i64> {
        galois_image::frobenius_trace(&self.inner, p).map_err(value_err)
    }

    fn two_division_degree(&self) -> u32 {
        galois_image::two_division_degree(&self.inner)
    }

    /// `True` when all three witnesses for a surjective mod-`ell` image
    /// were seen among good primes up to `bound`.
    #[pyo3(signature = (ell, bound = galois_image::DEFAULT_SAMPLE_BOUND))]
    fn certify_surjective(&self, ell: u64, bound: u64) -> PyResult<bool> {
        Ok(galois_image::certify_surjective(&self.inner, ell, bound).map_err(value_err)?.is_certified())
    }

    /// Census of primes up to `limit`; returns the report as a dict.
    #[pyo3(signature = (limit, workers = None))]
    fn census<'py>(&self, py: Python<'py>, limit: u64, workers: Option<usize>) -> PyResult<Bound<'py, PyDict>> {
        let opts = CensusOptions { workers, ..Default::default() };
        let curve = self.inner;
        let r = py
            .detach(move || census::run_census(&curve, limit, &opts))
            .map_err(value_err)?;
        let d = PyDict::new(py);
        d.set_item("limit", r.limit)?;
        d.set_item("total_primes", r.total_primes)?;
        d.set_item("good_primes", r.good_primes)?;
        d.set_item("cyclic_count", r.cyclic_count)?;
        d.set_item("fraction", r.fraction)?;
        d.set_item("split_counts", r.split_counts)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Curve({}, {})", self.inner.a(), self.inner.b())
    }
}

/// `(lo, hi)` decimal enclosure of `A_inf` truncated at `bound`.
#[pyfunction]
#[pyo3(signature = (bound = app::DEFAULT_TRUNCATION))]
fn artin_constant(bound: u64) -> PyResult<(String, String)> {
    if bound < 2 {
        return Err(value_err("truncation bound must be at least 2"));
    }
    let d = app::DecimalInterval::from(&density::artin_constant(bound));
    Ok((d.lo, d.hi))
}

fn profile_from(label: Option<&str>, profile_json: Option<&str>) -> PyResult<(Option<String>, DegreeProfile)> {
    match (label, profile_json) {
        (Some(label), None) => Ok((Some(label.to_string()), app::lookup(label).map_err(app_err)?.profile)),
        (None, Some(json)) => Ok((None, DegreeProfile::from_json(json).map_err(value_err)?)),
        (None, None) => Ok((None, DegreeProfile::maximal())),
        _ => Err(value_err("give a label or a profile, not both")),
    }
}

/// Density report for a registry label or a profile JSON string, as the
/// JSON document the CLI writes.
#[pyfunction]
#[pyo3(signature = (label = None, profile = None, truncation = app::DEFAULT_TRUNCATION))]
fn density_report(label: Option<&str>, profile: Option<&str>, truncation: u64) -> PyResult<String> {
    let (label, profile) = profile_from(label, profile)?;
    if truncation < 2 {
        return Err(value_err("truncation bound must be at least 2"));
    }
    let r = DensityReport::build(&profile, truncation, None).map_err(value_err)?;
    let expected = label.as_deref().and_then(|l| app::lookup(l).ok()).and_then(|s| s.expected);
    Ok(app::to_json_pretty(&app::DensityReportFile::new(label, &profile, &r, expected)))
}

/// Exact `delta(n)` as `"num/den"`.
#[pyfunction]
#[pyo3(signature = (n, label = None, profile = None))]
fn delta_partial(n: u64, label: Option<&str>, profile: Option<&str>) -> PyResult<String> {
    let (_, profile) = profile_from(label, profile)?;
    Ok(density::delta_partial(n, &profile).map_err(value_err)?.to_string())
}

/// Evaluate a group description (JSON) and return the summary as JSON.
#[pyfunction]
fn entangle(description: &str) -> PyResult<String> {
    let summary = GroupDescription::from_json(description)
        .and_then(|d| d.evaluate())
        .map_err(value_err)?;
    Ok(app::to_json_pretty(&summary))
}

/// Labels of the built-in curves.
#[pyfunction]
fn registry() -> Vec<String> {
    app::registry().into_iter().map(|s| s.label).collect()
}

#[pymodule]
#[pyo3(name = "cyclored")]
fn cyclored_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Curve>()?;
    m.add_function(wrap_pyfunction!(artin_constant, m)?)?;
    m.add_function(wrap_pyfunction!(density_report, m)?)?;
    m.add_function(wrap_pyfunction!(delta_partial, m)?)?;
    m.add_function(wrap_pyfunction!(entangle, m)?)?;
    m.add_function(wrap_pyfunction!(registry, m)?)?;
    Ok(())
}
