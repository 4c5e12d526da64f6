//! Python bindings for the block-model inference library: the main types
//! (labellings, graphs, families, posterior tables) and the operations the
//! smoke tests drive end to end.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use sbm_infer::bounds;
use sbm_infer::enumerate::{collect_space, ClassFilter};
use sbm_infer::inference;
use sbm_infer::mcmc::{self, McmcOptions};
use sbm_infer::metrics;
use sbm_infer::posterior;
use sbm_infer::prior::{Prior, PriorKind};
use sbm_infer::sbm;
use sbm_infer::sets::TargetSpec;
use sbm_infer::{EdgeProbs, Error, Graph, Labelling, ModelFamily};

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Labelling", frozen)]
struct PyLabelling {
    inner: Labelling,
}

#[pymethods]
impl PyLabelling {
    /// Build from any label sequence; canonicalized on construction.
    #[new]
    fn new(labels: Vec<u32>) -> PyResult<Self> {
        Ok(PyLabelling {
            inner: Labelling::from_labels(&labels).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyLabelling {
            inner: text.parse().map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn ell(&self) -> usize {
        self.inner.ell()
    }

    #[getter]
    fn sizes(&self) -> Vec<u32> {
        self.inner.sizes().to_vec()
    }

    /// Canonical 1-based labels.
    fn labels(&self) -> Vec<u32> {
        self.inner.labels().iter().map(|&l| l as u32 + 1).collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Labelling({})", self.inner)
    }

    fn __eq__(&self, other: &PyLabelling) -> bool {
        self.inner == other.inner
    }

    fn __hash__(&self) -> u64 {
        use std::hash::{Hash, Hasher};
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.inner.hash(&mut h);
        h.finish()
    }
}

#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: Graph,
}

#[pymethods]
impl PyGraph {
    /// Build from 0-based edge pairs.
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        Ok(PyGraph {
            inner: Graph::from_edges(n, &edges).map_err(err)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph {
            inner: Graph::from_text(text).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn edge_count(&self) -> u64 {
        self.inner.edge_count()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges()
    }

    fn has_edge(&self, i: usize, j: usize) -> bool {
        self.inner.has_edge(i, j)
    }

    /// The on-disk text format (n=<int> header plus 1-based "i j" lines).
    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, m={})", self.inner.n(), self.inner.edge_count())
    }
}

#[pyclass(name = "ModelFamily", frozen)]
struct PyModelFamily {
    inner: ModelFamily,
}

#[pymethods]
impl PyModelFamily {
    /// Family from explicit size vectors.
    #[new]
    fn new(n: usize, size_vectors: Vec<Vec<u32>>) -> PyResult<Self> {
        Ok(PyModelFamily {
            inner: ModelFamily::from_size_vectors(n, size_vectors).map_err(err)?,
        })
    }

    /// The windowed construction with entries inside n/l +- n/(4 L^2).
    #[staticmethod]
    fn windowed(n: usize, l_max: usize) -> PyResult<Self> {
        Ok(PyModelFamily {
            inner: ModelFamily::windowed(n, l_max).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn max_classes(&self) -> usize {
        self.inner.max_classes()
    }

    fn class_counts(&self) -> Vec<usize> {
        self.inner.class_counts()
    }

    fn allowed(&self, ell: usize) -> Vec<Vec<u32>> {
        self.inner.allowed(ell).to_vec()
    }

    fn contains(&self, lab: &PyLabelling) -> bool {
        self.inner.contains(&lab.inner)
    }

    fn nested_class_sizes(&self) -> bool {
        self.inner.nested_class_sizes()
    }

    fn count_total(&self) -> Option<u128> {
        self.inner.count_total_exact()
    }

    /// All labellings, optionally restricted to one class count.
    #[pyo3(signature = (ell = None))]
    fn enumerate(&self, ell: Option<usize>) -> PyResult<Vec<PyLabelling>> {
        let filter = match ell {
            Some(l) => ClassFilter::Exactly(l),
            None => ClassFilter::All,
        };
        Ok(collect_space(&self.inner, filter)
            .map_err(err)?
            .into_iter()
            .map(|inner| PyLabelling { inner })
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelFamily(n={}, levels={:?})",
            self.inner.n(),
            self.inner.class_counts()
        )
    }
}

fn build_prior(family: &PyModelFamily, kind: &str) -> PyResult<Prior> {
    let kind = match kind {
        "flat-uniform" | "flat" => PriorKind::FlatUniform,
        "hierarchical-uniform" | "hierarchical" => PriorKind::HierarchicalUniform,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown prior kind {other:?}"
            )))
        }
    };
    Prior::of_kind(kind, &family.inner).map_err(err)
}

#[pyclass(name = "PosteriorTable", frozen)]
struct PyPosteriorTable {
    inner: posterior::PosteriorTable,
    theta_hint: Option<Labelling>,
}

fn parse_target(spec: &str, center: Option<&Labelling>) -> PyResult<sbm_infer::sets::LabelSet> {
    let spec: TargetSpec = spec
        .parse()
        .map_err(|e: Error| PyValueError::new_err(e.to_string()))?;
    if spec.needs_center() {
        let c = center.ok_or_else(|| {
            PyValueError::new_err("this target set needs theta0 (pass it to exact_posterior)")
        })?;
        Ok(spec.resolve(c))
    } else {
        Ok(spec.resolve(&Labelling::single_class(1)))
    }
}

#[pymethods]
impl PyPosteriorTable {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// ln of the prior predictive mass of the conditioning graph.
    #[getter]
    fn log_normalizer(&self) -> f64 {
        self.inner.ln_normalizer()
    }

    fn mass(&self, lab: &PyLabelling) -> f64 {
        self.inner.mass(&lab.inner)
    }

    /// Mass of a named set ("model:2", "point", "ring:1", "ball:2", ...).
    fn set_mass(&self, target: &str) -> PyResult<f64> {
        let set = parse_target(target, self.theta_hint.as_ref())?;
        self.inner.set_mass(&set).map_err(err)
    }

    /// Posterior odds mass(B)/mass(A).
    fn odds(&self, a: &str, b: &str) -> PyResult<f64> {
        let a = parse_target(a, self.theta_hint.as_ref())?;
        let b = parse_target(b, self.theta_hint.as_ref())?;
        Ok(self.inner.odds(&a, &b).map_err(err)?.0)
    }

    fn argmax(&self) -> (PyLabelling, f64) {
        let (lab, mass) = self.inner.argmax();
        (PyLabelling { inner: lab.clone() }, mass)
    }

    /// (labelling, mass) pairs sorted by mass descending.
    fn masses(&self) -> Vec<(PyLabelling, f64)> {
        self.inner
            .sorted_entries()
            .into_iter()
            .map(|(lab, ln)| (PyLabelling { inner: lab.clone() }, ln.exp()))
            .collect()
    }

    /// HPD credible set: (members, attained_mass).
    fn credible_set(&self, alpha: f64) -> PyResult<(Vec<PyLabelling>, f64)> {
        let set = inference::hpd_credible_set(&self.inner, alpha).map_err(err)?;
        Ok((
            set.members
                .into_iter()
                .map(|inner| PyLabelling { inner })
                .collect(),
            set.attained_mass,
        ))
    }

    fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.inner.write_csv(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

/// Draw a graph from the planted model; deterministic in the seed.
#[pyfunction]
fn sample_graph(theta: &PyLabelling, p: f64, q: f64, seed: u64) -> PyResult<PyGraph> {
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    Ok(PyGraph {
        inner: sbm::sample_graph(&theta.inner, &probs, seed),
    })
}

#[pyfunction]
fn log_likelihood(graph: &PyGraph, theta: &PyLabelling, p: f64, q: f64) -> PyResult<f64> {
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    sbm::log_likelihood(&graph.inner, &theta.inner, &probs).map_err(err)
}

#[pyfunction]
fn log_likelihood_ratio(
    graph: &PyGraph,
    theta0: &PyLabelling,
    theta: &PyLabelling,
    p: f64,
    q: f64,
) -> PyResult<f64> {
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    sbm::log_likelihood_ratio(&graph.inner, &theta0.inner, &theta.inner, &probs).map_err(err)
}

/// (|D1|, |D2|, S, T) for a labelling pair and a graph.
#[pyfunction]
fn likelihood_ratio_stats(
    graph: &PyGraph,
    theta0: &PyLabelling,
    theta: &PyLabelling,
) -> PyResult<(u64, u64, u64, u64)> {
    let st = sbm::likelihood_ratio_stats(&graph.inner, &theta0.inner, &theta.inner).map_err(err)?;
    Ok((st.d1, st.d2, st.s, st.t))
}

#[pyfunction]
fn r_distance(a: &PyLabelling, b: &PyLabelling) -> PyResult<u32> {
    metrics::r_distance(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn m_distance(a: &PyLabelling, b: &PyLabelling) -> PyResult<u32> {
    metrics::m_distance(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn hellinger_affinity(p: f64, q: f64) -> PyResult<f64> {
    bounds::hellinger_affinity(p, q).map_err(err)
}

/// Exact posterior table. theta0 is optional and only anchors the
/// centre-relative target sets ("point", "ring:k", "ball:k").
#[pyfunction]
#[pyo3(signature = (graph, family, prior, p, q, theta0 = None))]
fn exact_posterior(
    graph: &PyGraph,
    family: &PyModelFamily,
    prior: &str,
    p: f64,
    q: f64,
    theta0: Option<&PyLabelling>,
) -> PyResult<PyPosteriorTable> {
    let prior = build_prior(family, prior)?;
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    Ok(PyPosteriorTable {
        inner: posterior::exact_posterior(&graph.inner, &prior, &probs).map_err(err)?,
        theta_hint: theta0.map(|t| t.inner.clone()),
    })
}

/// MCMC set-mass estimates: list of (target, mean, std_error).
#[pyfunction]
#[pyo3(signature = (graph, family, prior, p, q, theta0, targets, steps = 100_000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn mcmc_set_masses(
    graph: &PyGraph,
    family: &PyModelFamily,
    prior: &str,
    p: f64,
    q: f64,
    theta0: &PyLabelling,
    targets: Vec<String>,
    steps: usize,
    seed: u64,
) -> PyResult<Vec<(String, f64, f64)>> {
    let prior = build_prior(family, prior)?;
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    let sets: Vec<sbm_infer::sets::LabelSet> = targets
        .iter()
        .map(|t| parse_target(t, Some(&theta0.inner)))
        .collect::<PyResult<_>>()?;
    let opts = McmcOptions {
        steps,
        seed,
        ..Default::default()
    };
    let report = mcmc::mcmc_posterior(&graph.inner, &prior, &probs, &theta0.inner, &sets, &opts)
        .map_err(err)?;
    Ok(report
        .estimates
        .into_iter()
        .map(|e| (e.target, e.mean, e.std_error))
        .collect())
}

fn report_to_dict<'py>(
    py: Python<'py>,
    report: &bounds::BoundReport,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &report.name)?;
    d.set_item("value", report.value)?;
    d.set_item("log_value", report.log_value)?;
    d.set_item("vacuous", report.vacuous)?;
    let inputs = PyDict::new(py);
    for (k, v) in &report.inputs {
        inputs.set_item(k, v)?;
    }
    d.set_item("inputs", inputs)?;
    let assumptions = PyDict::new(py);
    for a in &report.assumptions_checked {
        assumptions.set_item(&a.name, a.pass)?;
    }
    d.set_item("assumptions", assumptions)?;
    Ok(d)
}

/// The level-selection contraction bound for a wrong class count.
#[pyfunction]
fn model_selection_bound<'py>(
    py: Python<'py>,
    family: &PyModelFamily,
    prior: &str,
    theta0: &PyLabelling,
    ell: usize,
    p: f64,
    q: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let prior = build_prior(family, prior)?;
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    let report = bounds::model_selection_bound(&prior, &theta0.inner, ell, &probs).map_err(err)?;
    report_to_dict(py, &report)
}

/// The within-level point contraction bound.
#[pyfunction]
fn point_bound<'py>(
    py: Python<'py>,
    family: &PyModelFamily,
    prior: &str,
    theta0: &PyLabelling,
    p: f64,
    q: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let prior = build_prior(family, prior)?;
    let probs = EdgeProbs::explicit(p, q).map_err(err)?;
    let report = bounds::point_bound(&prior, &theta0.inner, &probs).map_err(err)?;
    report_to_dict(py, &report)
}

/// Level + point/ball example bounds for a phase ("dense", "ch", "ks").
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (phase, n, l_max, p = None, q = None, a = None, b = None, c = None, d = None))]
fn phase_example_bounds<'py>(
    py: Python<'py>,
    phase: &str,
    n: usize,
    l_max: usize,
    p: Option<f64>,
    q: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    c: Option<f64>,
    d: Option<f64>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| PyValueError::new_err(format!("{phase} phase needs {name}")))
    };
    let probs = match phase {
        "dense" => EdgeProbs::dense(need(p, "p")?, need(q, "q")?),
        "ch" | "chernoff-hellinger" => {
            EdgeProbs::chernoff_hellinger(n, need(a, "a")?, need(b, "b")?)
        }
        "ks" | "kesten-stigum" => EdgeProbs::kesten_stigum(n, need(c, "c")?, need(d, "d")?),
        other => return Err(PyValueError::new_err(format!("unknown phase {other:?}"))),
    }
    .map_err(err)?;
    let reports = bounds::phase_example_bounds(&probs, n, l_max).map_err(err)?;
    reports.iter().map(|r| report_to_dict(py, r)).collect()
}

/// Randomized check of the auxiliary inequalities; returns
/// {lemma: counterexample-or-None}.
#[pyfunction]
fn aux_inequalities_check<'py>(
    py: Python<'py>,
    samples: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for r in bounds::aux_inequalities_check(samples, seed) {
        d.set_item(r.lemma.clone(), r.counterexample.clone())?;
    }
    Ok(d)
}

/// Confidence level 1 - x_n/(1 - alpha) from a credible level and a
/// contraction input.
#[pyfunction]
fn confidence_level(alpha: f64, x_n: f64, k_n: u32) -> PyResult<f64> {
    Ok(inference::confidence_from_credible(alpha, x_n, k_n)
        .map_err(err)?
        .level)
}

#[pymodule]
fn sbm_infer_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLabelling>()?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyModelFamily>()?;
    m.add_class::<PyPosteriorTable>()?;
    m.add_function(wrap_pyfunction!(sample_graph, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(log_likelihood_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(likelihood_ratio_stats, m)?)?;
    m.add_function(wrap_pyfunction!(r_distance, m)?)?;
    m.add_function(wrap_pyfunction!(m_distance, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_affinity, m)?)?;
    m.add_function(wrap_pyfunction!(exact_posterior, m)?)?;
    m.add_function(wrap_pyfunction!(mcmc_set_masses, m)?)?;
    m.add_function(wrap_pyfunction!(model_selection_bound, m)?)?;
    m.add_function(wrap_pyfunction!(point_bound, m)?)?;
    m.add_function(wrap_pyfunction!(phase_example_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(aux_inequalities_check, m)?)?;
    m.add_function(wrap_pyfunction!(confidence_level, m)?)?;
    Ok(())
}
