use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use exotic_bv::darboux::{bv_axioms as run_bv_axioms, nu5_match as run_nu5_match};
use exotic_bv::diagrams::{enumerate as run_enumerate, prime_bracketings as run_prime_bracketings, DiagramClass};
use exotic_bv::exotic::{
    ainfty_check as run_ainfty, compute_nu, derivation_check as run_derivation, prime_data, CheckConfig,
    IdentityReport, PeriodMode,
};
use exotic_bv::mzv::{evaluate, MZVExpr, RelationTable, DEFAULT_DIGITS};
use exotic_bv::periods::{period as run_period, Method};

type Pairs = Vec<(usize, usize)>;
type NuTerm = (Pairs, Option<String>, f64, String);

fn err(e: exotic_bv::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: std::str::FromStr<Err = exotic_bv::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn report_dict<'py>(py: Python<'py>, r: &IdentityReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("check", &r.check)?;
    d.set_item("n", r.n)?;
    d.set_item("d", r.d)?;
    d.set_item("trials", r.trials)?;
    d.set_item("max_residual", r.max_residual)?;
    d.set_item("nonzero_trials", r.nonzero_trials)?;
    d.set_item("exact_zero", r.exact_zero)?;
    d.set_item("passed", r.passed)?;
    d.set_item("witness", r.witness.clone())?;
    d.set_item("note", &r.note)?;
    Ok(d)
}

/// Chord diagrams on the n-gon with k chords, as (sign, [(i, j), ...]).
#[pyfunction]
#[pyo3(signature = (n, k, class_ = "gravity"))]
fn enumerate(n: usize, k: usize, class_: &str) -> PyResult<Vec<(i8, Pairs)>> {
    let class: DiagramClass = parse(class_)?;
    Ok(run_enumerate(n, k, class)
        .map_err(err)?
        .into_iter()
        .map(|m| (m.sign, m.chords.iter().map(|c| c.endpoints()).collect()))
        .collect())
}

/// Prime bracketings of 1..=n_indices, as strings such as "[[1,3],[2,4]]".
#[pyfunction]
fn prime_bracketings(n_indices: usize) -> Vec<String> {
    run_prime_bracketings(n_indices).iter().map(|b| b.to_string()).collect()
}

/// Pretty form of ν_n; empty for n = 4.
#[pyfunction]
#[pyo3(signature = (n, mode = "symbolic", ascii = false))]
fn nu(py: Python<'_>, n: usize, mode: &str, ascii: bool) -> PyResult<String> {
    let mode: PeriodMode = parse(mode)?;
    py.detach(|| {
        let op = compute_nu(n, mode, RelationTable::builtin())?;
        if op.is_empty() {
            Ok(String::new())
        } else {
            op.pretty(ascii)
        }
    })
    .map_err(err)
}

/// Terms of ν_n as (prime chords, exact coefficient or None, value, g).
#[pyfunction]
#[pyo3(signature = (n, ascii = false))]
fn nu_terms(py: Python<'_>, n: usize, ascii: bool) -> PyResult<Vec<NuTerm>> {
    py.detach(|| {
        let op = compute_nu(n, PeriodMode::SymbolicKnown, RelationTable::builtin())?;
        op.terms
            .iter()
            .map(|t| {
                let g = if ascii {
                    exotic_bv::graphs::pretty_print_bv_ascii(&t.g)?
                } else {
                    exotic_bv::graphs::pretty_print_bv(&t.g)?
                };
                let chords = t.prime.chords.iter().map(|c| c.endpoints()).collect();
                Ok((chords, t.coefficient.exact.as_ref().map(|e| e.to_string()), t.coefficient.value, g))
            })
            .collect::<exotic_bv::Result<Vec<_>>>()
    })
    .map_err(err)
}

/// Period of the `prime_index`-th (1-based) prime form of the n-gon as
/// (value, error, fitted MZV or None).
#[pyfunction]
#[pyo3(signature = (n, prime_index = 1, tol = 1e-8))]
fn period(py: Python<'_>, n: usize, prime_index: usize, tol: f64) -> PyResult<(f64, f64, Option<String>)> {
    py.detach(|| {
        let data = prime_data(n)?;
        let p = prime_index
            .checked_sub(1)
            .and_then(|i| data.get(i))
            .ok_or_else(|| exotic_bv::Error::Domain(format!("prime index {prime_index} out of range")))?;
        let r = run_period(&p.prime, Method::Nested, tol, RelationTable::builtin())?;
        Ok((r.value, r.error, r.fitted.map(|e| e.to_string())))
    })
    .map_err(err)
}

/// Decimal value of an MZV expression such as "zeta(2)*zeta(3) - 2*zeta(5)".
#[pyfunction]
#[pyo3(signature = (expr, digits = DEFAULT_DIGITS))]
fn mzv(expr: &str, digits: u32) -> PyResult<String> {
    let e: MZVExpr = parse(expr)?;
    Ok(evaluate(&e, digits).map_err(err)?.to_decimal(digits))
}

fn config(d: usize, trials: usize, seed: u64, tol: f64, perturb: Option<f64>) -> CheckConfig {
    CheckConfig { d, trials, seed, tol, perturbation: perturb, ..CheckConfig::default() }
}

/// A∞ relation of polygon size n on random inputs.
#[pyfunction]
#[pyo3(signature = (n, d = 2, trials = 20, seed = 7, tol = 1e-8, perturb = None))]
fn ainfty_check<'py>(
    py: Python<'py>,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
    tol: f64,
    perturb: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(d, trials, seed, tol, perturb);
    let r = py.detach(|| run_ainfty(n, &cfg, RelationTable::builtin())).map_err(err)?;
    report_dict(py, &r)
}

/// Derivation property of {f, -} on ν_n for Δ-closed f.
#[pyfunction]
#[pyo3(signature = (n, d = 2, trials = 20, seed = 7, tol = 1e-8))]
fn derivation_check<'py>(
    py: Python<'py>,
    n: usize,
    d: usize,
    trials: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(d, trials, seed, tol, None);
    let r = py.detach(|| run_derivation(n, &cfg, RelationTable::builtin())).map_err(err)?;
    report_dict(py, &r)
}

/// Explicit-formula ν_5 against the operadic ν_5 in the representation.
#[pyfunction]
#[pyo3(signature = (d = 2, trials = 50, seed = 7))]
fn nu5_match<'py>(py: Python<'py>, d: usize, trials: usize, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| run_nu5_match(d, trials, seed, RelationTable::builtin())).map_err(err)?;
    report_dict(py, &r)
}

/// Failures of the BV axiom suite (empty when all identities hold).
#[pyfunction]
#[pyo3(signature = (d = 2, trials = 100, seed = 7))]
fn bv_axioms(py: Python<'_>, d: usize, trials: usize, seed: u64) -> PyResult<Vec<String>> {
    Ok(py.detach(|| run_bv_axioms(d, trials, seed)).map_err(err)?.failures)
}

#[pymodule]
#[pyo3(name = "exotic_bv")]
fn exotic_bv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(enumerate, m)?)?;
    m.add_function(wrap_pyfunction!(prime_bracketings, m)?)?;
    m.add_function(wrap_pyfunction!(nu, m)?)?;
    m.add_function(wrap_pyfunction!(nu_terms, m)?)?;
    m.add_function(wrap_pyfunction!(period, m)?)?;
    m.add_function(wrap_pyfunction!(mzv, m)?)?;
    m.add_function(wrap_pyfunction!(ainfty_check, m)?)?;
    m.add_function(wrap_pyfunction!(derivation_check, m)?)?;
    m.add_function(wrap_pyfunction!(nu5_match, m)?)?;
    m.add_function(wrap_pyfunction!(bv_axioms, m)?)?;
    Ok(())
}
