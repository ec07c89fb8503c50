use cddr_core::cddr::{self as curve, CddrConfig, Method};
use cddr_core::cltvalidate::{self, ReplicationConfig};
use cddr_core::discovery::{self, BivariateSample, Direction};
use cddr_core::numstat::{self, RngStream};
use cddr_core::simgen::SimSetting;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: cddr_core::Error) -> PyErr {
    match e {
        cddr_core::Error::InvalidInput(_) | cddr_core::Error::InvalidConfig(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn sample(x: Vec<f64>, y: Vec<f64>) -> PyResult<BivariateSample> {
    BivariateSample::new(x, y).map_err(to_py)
}

fn direction(s: &str) -> PyResult<Direction> {
    Direction::parse(s).map_err(to_py)
}

/// Biased HSIC with median-heuristic Gaussian kernels.
#[pyfunction]
fn hsic(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    numstat::hsic_biased(&x, &y).map_err(to_py)
}

#[pyfunction]
fn median_bandwidth(v: Vec<f64>) -> PyResult<f64> {
    numstat::median_heuristic_bandwidth(&v).map_err(to_py)
}

/// Least-squares fit of `response` on `predictor`; returns `(slope, residuals)`.
#[pyfunction]
fn ols_fit(predictor: Vec<f64>, response: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let fit = numstat::ols_fit(&predictor, &response).map_err(to_py)?;
    Ok((fit.slope, fit.residuals))
}

#[pyclass(name = "LingamDecision", frozen, get_all)]
struct PyLingamDecision {
    direction: String,
    hsic_xy: f64,
    hsic_yx: f64,
    tie: bool,
}

#[pyfunction]
fn lingam_decide(x: Vec<f64>, y: Vec<f64>) -> PyResult<PyLingamDecision> {
    let d = discovery::lingam_decide(&sample(x, y)?).map_err(to_py)?;
    Ok(PyLingamDecision {
        direction: d.direction.label().to_string(),
        hsic_xy: d.hsic_xy,
        hsic_yx: d.hsic_yx,
        tie: d.tie,
    })
}

#[pyclass(name = "SenSenResult", frozen, get_all)]
struct PySenSenResult {
    direction: String,
    statistic: f64,
    p_value: f64,
    bootstrap_reps: usize,
    exceedances: usize,
}

#[pyfunction]
#[pyo3(signature = (x, y, direction="x_to_y", bootstrap_reps=199, seed=0))]
fn sensen_test(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    direction: &str,
    bootstrap_reps: usize,
    seed: u64,
) -> PyResult<PySenSenResult> {
    let data = sample(x, y)?;
    let dir = self::direction(direction)?;
    let r = py
        .detach(|| discovery::sensen_test(&data, dir, bootstrap_reps, &RngStream::new(seed)))
        .map_err(to_py)?;
    Ok(PySenSenResult {
        direction: r.direction.label().to_string(),
        statistic: r.statistic,
        p_value: r.p_value,
        bootstrap_reps: r.bootstrap_reps,
        exceedances: r.exceedances,
    })
}

#[pyclass(name = "TestBasedOutcome", frozen, get_all)]
struct PyTestBasedOutcome {
    kind: String,
    p_xy: f64,
    p_yx: f64,
}

#[pyfunction]
#[pyo3(signature = (x, y, alpha=0.05, bootstrap_reps=199, seed=0))]
fn testbased_decide(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    alpha: f64,
    bootstrap_reps: usize,
    seed: u64,
) -> PyResult<PyTestBasedOutcome> {
    let data = sample(x, y)?;
    let o = py
        .detach(|| discovery::testbased_decide(&data, alpha, bootstrap_reps, &RngStream::new(seed)))
        .map_err(to_py)?;
    Ok(PyTestBasedOutcome {
        kind: o.kind.label().to_string(),
        p_xy: o.p_xy,
        p_yx: o.p_yx,
    })
}

/// Regress the confounders out of both variables; returns the residual pair.
#[pyfunction]
fn residualize(x: Vec<f64>, y: Vec<f64>, confounders: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let conf: Vec<&[f64]> = confounders.iter().map(Vec::as_slice).collect();
    let out = discovery::residualize(&x, &y, &conf).map_err(to_py)?;
    Ok(out.into_parts())
}

/// Generate `(x, y)` from a named simulation setting.
#[pyfunction]
fn simulate(setting: &str, n: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let s = SimSetting::named(setting).map_err(to_py)?;
    let sim = s.generate(n, &RngStream::new(seed)).map_err(to_py)?;
    Ok(sim.data.into_parts())
}

#[pyclass(name = "CddrCurve", frozen)]
struct PyCddrCurve {
    inner: curve::CddrCurve,
}

#[pymethods]
impl PyCddrCurve {
    #[getter]
    fn labels(&self) -> Vec<String> {
        self.inner.labels.clone()
    }

    #[getter]
    fn subsample_sizes(&self) -> Vec<usize> {
        self.inner.points.iter().map(|p| p.subsample_size).collect()
    }

    #[getter]
    fn hypothesized_label(&self) -> String {
        self.inner.hypothesized_label.clone()
    }

    #[getter]
    fn n_total(&self) -> usize {
        self.inner.n_total
    }

    fn rates(&self, label: &str) -> PyResult<Vec<f64>> {
        self.column(label, |p| &p.rates)
    }

    fn se(&self, label: &str) -> PyResult<Vec<f64>> {
        self.column(label, |p| &p.se)
    }

    /// `(lower, upper)` pointwise interval bounds across the grid.
    fn ci(&self, label: &str) -> PyResult<(Vec<f64>, Vec<f64>)> {
        Ok((
            self.column(label, |p| &p.ci_lower)?,
            self.column(label, |p| &p.ci_upper)?,
        ))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("serializable")
    }

    fn __repr__(&self) -> String {
        format!(
            "CddrCurve(method={}, n_total={}, sizes={:?})",
            self.inner.config.method.name(),
            self.inner.n_total,
            self.subsample_sizes()
        )
    }
}

impl PyCddrCurve {
    fn column(
        &self,
        label: &str,
        f: impl Fn(&curve::OutcomeRates) -> &std::collections::BTreeMap<String, f64>,
    ) -> PyResult<Vec<f64>> {
        if !self.inner.labels.iter().any(|l| l == label) {
            return Err(PyValueError::new_err(format!(
                "unknown label {label:?}; labels are {:?}",
                self.inner.labels
            )));
        }
        Ok(self.inner.points.iter().map(|p| f(p)[label]).collect())
    }
}

#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (x, y, seed, method="lingam", grid=None, subsamples=100, alpha=0.05, bootstrap_reps=199, hypothesized="x_to_y"))]
fn estimate_cddr(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    seed: u64,
    method: &str,
    grid: Option<Vec<usize>>,
    subsamples: usize,
    alpha: f64,
    bootstrap_reps: usize,
    hypothesized: &str,
) -> PyResult<PyCddrCurve> {
    let data = sample(x, y)?;
    let mut config = CddrConfig::new(Method::parse(method).map_err(to_py)?, data.len(), seed);
    if let Some(g) = grid {
        config.subsample_sizes = g;
    }
    config.num_subsamples = subsamples;
    config.alpha = alpha;
    config.bootstrap_reps = bootstrap_reps;
    config.hypothesized = direction(hypothesized)?;
    let inner = py.detach(|| curve::estimate_cddr(&data, &config)).map_err(to_py)?;
    Ok(PyCddrCurve { inner })
}

#[pyclass(name = "CltCondition", frozen, get_all)]
struct PyCltCondition {
    pool_condition_holds: bool,
    expression_defined: bool,
    expression_value: Option<f64>,
}

#[pyfunction]
fn clt_condition(n_total: usize, num_subsamples: usize, subsample_size: usize) -> PyCltCondition {
    let r = curve::clt_condition(n_total, num_subsamples, subsample_size);
    PyCltCondition {
        pool_condition_holds: r.pool_condition_holds,
        expression_defined: r.expression_defined,
        expression_value: r.expression_value,
    }
}

/// Replicate the curve on fresh datasets and return the bias report as JSON.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (setting, n_total, grid, seed, subsamples=100, replicates=100, method="testbased", alpha=0.05, bootstrap_reps=199))]
fn validate_clt(
    py: Python<'_>,
    setting: &str,
    n_total: usize,
    grid: Vec<usize>,
    seed: u64,
    subsamples: usize,
    replicates: usize,
    method: &str,
    alpha: f64,
    bootstrap_reps: usize,
) -> PyResult<String> {
    let mut config = ReplicationConfig::new(SimSetting::named(setting).map_err(to_py)?, n_total, grid, seed);
    config.num_subsamples = subsamples;
    config.replicates = replicates;
    config.method = Method::parse(method).map_err(to_py)?;
    config.alpha = alpha;
    config.bootstrap_reps = bootstrap_reps;
    let report = py
        .detach(|| {
            let matrix = cltvalidate::replicate_cddr(&config)?;
            cltvalidate::bias_report(&matrix, alpha)
        })
        .map_err(to_py)?;
    Ok(serde_json::to_string(&report).expect("serializable"))
}

#[pymodule]
pub fn cddr(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCddrCurve>()?;
    m.add_class::<PyLingamDecision>()?;
    m.add_class::<PySenSenResult>()?;
    m.add_class::<PyTestBasedOutcome>()?;
    m.add_class::<PyCltCondition>()?;
    m.add_function(wrap_pyfunction!(hsic, m)?)?;
    m.add_function(wrap_pyfunction!(median_bandwidth, m)?)?;
    m.add_function(wrap_pyfunction!(ols_fit, m)?)?;
    m.add_function(wrap_pyfunction!(lingam_decide, m)?)?;
    m.add_function(wrap_pyfunction!(sensen_test, m)?)?;
    m.add_function(wrap_pyfunction!(testbased_decide, m)?)?;
    m.add_function(wrap_pyfunction!(residualize, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_cddr, m)?)?;
    m.add_function(wrap_pyfunction!(clt_condition, m)?)?;
    m.add_function(wrap_pyfunction!(validate_clt, m)?)?;
    Ok(())
}
