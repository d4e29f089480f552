//! Python bindings for the quantum Ising chain and continuum random-cluster library.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use isingrc::bounds as bnd;
use isingrc::cli;
use isingrc::continuum as ct;
use isingrc::fkising as fk;
use isingrc::rcsampler as rc;
use isingrc::spinchain as sc;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Chain geometry with couplings `λ` and fields `δ`.
#[pyclass(name = "SpinChain", module = "pyisingrc", frozen)]
struct PySpinChain {
    inner: sc::SpinChainParams,
}

#[pymethods]
impl PySpinChain {
    /// Homogeneous chain, or a disordered one when both `couplings` and `fields` are given.
    #[new]
    #[pyo3(signature = (m, l, lambda_=1.0, delta=1.0, couplings=None, fields=None))]
    fn new(
        m: usize,
        l: usize,
        lambda_: f64,
        delta: f64,
        couplings: Option<Vec<f64>>,
        fields: Option<Vec<f64>>,
    ) -> PyResult<Self> {
        let inner = match (couplings, fields) {
            (None, None) => sc::SpinChainParams::homogeneous(m, l, lambda_, delta),
            (Some(c), Some(f)) => sc::SpinChainParams::disordered(m, l, c, f),
            _ => return Err(PyValueError::new_err("give both couplings and fields, or neither")),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    /// `(energy, amplitudes)` of the ground state.
    #[pyo3(signature = (tol=1e-10))]
    fn ground_state(&self, tol: f64) -> PyResult<(f64, Vec<Complex64>)> {
        let h = sc::build_hamiltonian(&self.inner).map_err(err)?;
        let gs = sc::ground_state(&h, tol).map_err(err)?;
        Ok((gs.energy, gs.state.amplitudes().to_vec()))
    }

    /// Reduced density matrix of the block `[0, L]`.
    #[pyo3(signature = (tol=1e-10))]
    fn block_density(&self, tol: f64) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix {
            inner: sc::block_density(&self.inner, tol).map_err(err)?,
        })
    }

    /// Ground-state `⟨σ³_x σ³_y⟩` for sites `x, y ∈ [−m, m+L]`.
    #[pyo3(signature = (x, y, tol=1e-10))]
    fn zz_correlation(&self, x: i64, y: i64, tol: f64) -> PyResult<f64> {
        let bit = |s: i64| {
            self.inner
                .bit_of(s)
                .ok_or_else(|| PyValueError::new_err(format!("site {s} is outside the chain")))
        };
        let (bx, by) = (bit(x)?, bit(y)?);
        let h = sc::build_hamiltonian(&self.inner).map_err(err)?;
        let gs = sc::ground_state(&h, tol).map_err(err)?;
        Ok(sc::zz_correlation(&gs.state, bx, by))
    }
}

#[pyclass(name = "DensityMatrix", module = "pyisingrc", frozen)]
struct PyDensityMatrix {
    inner: sc::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Rows of complex entries.
    fn entries(&self) -> Vec<Vec<Complex64>> {
        let e = self.inner.entries();
        (0..e.nrows()).map(|r| (0..e.ncols()).map(|c| e[(r, c)]).collect()).collect()
    }

    /// Eigenvalues in decreasing order.
    fn spectrum(&self) -> Vec<f64> {
        sc::sorted_spectrum(&self.inner)
    }

    /// Von Neumann entropy in bits.
    fn entropy(&self) -> f64 {
        sc::entanglement_entropy(&self.inner)
    }

    /// Operator norm of the difference with `other`.
    fn norm_diff(&self, other: &PyDensityMatrix) -> PyResult<f64> {
        sc::operator_norm_diff(&self.inner, &other.inner).map_err(err)
    }
}

/// A space-time box with boundary conditions and an optional slit.
#[pyclass(name = "BoxSpec", module = "pyisingrc", frozen)]
struct PyBoxSpec {
    inner: ct::BoxSpec,
}

#[pymethods]
impl PyBoxSpec {
    #[new]
    #[pyo3(signature = (a, b, s, t, periodic=false, wired=false))]
    fn new(a: i64, b: i64, s: f64, t: f64, periodic: bool, wired: bool) -> PyResult<Self> {
        let bc = if wired { ct::SideBc::Wired } else { ct::SideBc::Free };
        let inner = ct::BoxSpec::new(a, b, s, t).map_err(err)?.periodic(periodic).side_bc(bc);
        Ok(Self { inner })
    }

    /// Periodic box over lines `−m..=m+L` with height `β`.
    #[staticmethod]
    fn chain_box(m: usize, l: usize, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ct::BoxSpec::chain_box(m, l, beta).map_err(err)?,
        })
    }

    /// Box over lines `−m..=m+L`, times `[−β/2, β/2]`, slit along `[0, L] × {0}`.
    #[staticmethod]
    fn slit_box(m: usize, l: usize, beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: ct::BoxSpec::slit_box(m, l, beta).map_err(err)?,
        })
    }

    #[getter]
    fn first_line(&self) -> i64 {
        self.inner.first_line()
    }

    #[getter]
    fn last_line(&self) -> i64 {
        self.inner.last_line()
    }

    #[getter]
    fn height(&self) -> f64 {
        self.inner.height()
    }

    #[getter]
    fn slit(&self) -> Option<usize> {
        self.inner.slit()
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Deaths and bridges in a box.
#[pyclass(name = "RcConfig", module = "pyisingrc", frozen)]
struct PyRcConfig {
    bx: ct::BoxSpec,
    inner: ct::RcConfig,
}

fn parse_event(kind: &str, line: i64, time: f64) -> PyResult<ct::Event> {
    match kind {
        "D" | "death" => Ok(ct::Event::Death { line, time }),
        "B" | "bridge" => Ok(ct::Event::Bridge { line, time }),
        _ => Err(PyValueError::new_err(format!("event kind must be 'D' or 'B', got {kind:?}"))),
    }
}

#[pymethods]
impl PyRcConfig {
    /// Events are `(kind, line, time)` with kind `'D'` or `'B'`; a bridge sits
    /// between `line` and `line + 1`.
    #[new]
    #[pyo3(signature = (boxspec, events=Vec::new()))]
    fn new(boxspec: &PyBoxSpec, events: Vec<(String, i64, f64)>) -> PyResult<Self> {
        let events = events
            .iter()
            .map(|(k, l, t)| parse_event(k, *l, *t))
            .collect::<PyResult<Vec<_>>>()?;
        let inner = ct::RcConfig::from_events(&boxspec.inner, &events).map_err(err)?;
        Ok(Self { bx: boxspec.inner.clone(), inner })
    }

    /// Parse the line-oriented text format.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        let (bx, inner) = ct::read_config(text).map_err(err)?;
        Ok(Self { bx, inner })
    }

    fn to_text(&self) -> String {
        ct::write_config(&self.bx, &self.inner)
    }

    fn events(&self) -> Vec<(&'static str, i64, f64)> {
        self.inner
            .events(&self.bx)
            .into_iter()
            .map(|e| match e {
                ct::Event::Death { line, time } => ("D", line, time),
                ct::Event::Bridge { line, time } => ("B", line, time),
            })
            .collect()
    }

    #[getter]
    fn n_deaths(&self) -> usize {
        self.inner.n_deaths()
    }

    #[getter]
    fn n_bridges(&self) -> usize {
        self.inner.n_bridges()
    }

    /// Number of clusters `k(ω)`.
    fn cluster_count(&self) -> usize {
        ct::cluster_count(&self.bx, &self.inner)
    }

    /// Whether two points `(line, time)` lie in one cluster.
    fn connected(&self, p: (i64, f64), q: (i64, f64)) -> PyResult<bool> {
        ct::connected(&self.bx, &self.inner, p, q).map_err(err)
    }

    /// Whether `{0} × [−½, ½]` reaches the vertical sides.
    fn reaches_sides(&self) -> PyResult<bool> {
        ct::reaches_boundary(&self.bx, &self.inner, &rc::unit_source(), ct::Boundary::Sides).map_err(err)
    }
}

fn estimate_dict<'py>(py: Python<'py>, e: &rc::EstimateResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("estimate", e.estimate)?;
    d.set_item("std_error", e.std_error)?;
    d.set_item("n_samples", e.n_samples)?;
    d.set_item("n_burnin", e.n_burnin)?;
    d.set_item("seed", e.seed)?;
    d.set_item("autocorrelation_time", e.autocorrelation_time)?;
    Ok(d)
}

/// Random-cluster intensities `λ`, `δ` and cluster weight `q ≥ 1`.
#[pyclass(name = "RcModel", module = "pyisingrc", frozen)]
struct PyRcModel {
    inner: rc::RcParams,
}

impl PyRcModel {
    fn ecfg(n_samples: usize, seed: u64, burnin: usize, chains: usize) -> rc::EstimatorConfig {
        rc::EstimatorConfig::new(n_samples, seed).with_burnin(burnin).with_chains(chains)
    }
}

#[pymethods]
impl PyRcModel {
    #[new]
    #[pyo3(signature = (lambda_, delta, q=1.0))]
    fn new(lambda_: f64, delta: f64, q: f64) -> PyResult<Self> {
        Ok(Self {
            inner: rc::RcParams::new(lambda_, delta, q).map_err(err)?,
        })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    /// One exact draw of the `q = 1` measure.
    fn sample_percolation(&self, boxspec: &PyBoxSpec, seed: u64) -> PyResult<PyRcConfig> {
        let cfg = rc::sample_percolation(&boxspec.inner, &self.inner, seed).map_err(err)?;
        Ok(PyRcConfig { bx: boxspec.inner.clone(), inner: cfg })
    }

    /// Probability that `{0} × [−½, ½]` reaches the sides.
    #[pyo3(signature = (boxspec, n_samples, seed=0, burnin=100, chains=1))]
    fn side_reaching<'py>(
        &self,
        py: Python<'py>,
        boxspec: &PyBoxSpec,
        n_samples: usize,
        seed: u64,
        burnin: usize,
        chains: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let bx = &boxspec.inner;
        let event = rc::side_reaching(bx).map_err(err)?;
        let ecfg = Self::ecfg(n_samples, seed, burnin, chains);
        let e = py
            .detach(|| rc::estimate_event(bx, &self.inner, event, &ecfg))
            .map_err(err)?;
        estimate_dict(py, &e)
    }

    /// `φ((x,0) ↔ (y,0))` for all pairs of `sites` at `q = 2`, as `(x, y, result)` tuples.
    #[pyo3(signature = (boxspec, sites, n_samples, seed=0, burnin=100))]
    fn correlations<'py>(
        &self,
        py: Python<'py>,
        boxspec: &PyBoxSpec,
        sites: Vec<i64>,
        n_samples: usize,
        seed: u64,
        burnin: usize,
    ) -> PyResult<Vec<(i64, i64, Bound<'py, PyDict>)>> {
        let ecfg = Self::ecfg(n_samples, seed, burnin, 1);
        let pairs = py
            .detach(|| fk::estimate_correlations(&sites, &boxspec.inner, &self.inner, &ecfg))
            .map_err(err)?;
        pairs
            .iter()
            .map(|p| Ok((p.x, p.y, estimate_dict(py, &p.estimate)?)))
            .collect()
    }

    /// Slit agreement probability `a_m` at `q = 2`.
    #[pyo3(signature = (boxspec, n_samples, seed=0, burnin=100))]
    fn slit_agreement<'py>(
        &self,
        py: Python<'py>,
        boxspec: &PyBoxSpec,
        n_samples: usize,
        seed: u64,
        burnin: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let ecfg = Self::ecfg(n_samples, seed, burnin, 1);
        let s = py
            .detach(|| fk::estimate_am(&boxspec.inner, &self.inner, &ecfg))
            .map_err(err)?;
        estimate_dict(py, &s.a_m)
    }
}

/// Metropolis–Hastings chain on configurations of one box.
#[pyclass(name = "McmcChain", module = "pyisingrc")]
struct PyMcmcChain {
    inner: rc::Chain,
}

#[pymethods]
impl PyMcmcChain {
    #[new]
    #[pyo3(signature = (boxspec, model, seed=0, chain=0))]
    fn new(boxspec: &PyBoxSpec, model: &PyRcModel, seed: u64, chain: u64) -> PyResult<Self> {
        Ok(Self {
            inner: rc::Chain::new(&boxspec.inner, &model.inner, seed, chain).map_err(err)?,
        })
    }

    /// Run `n` sweeps.
    #[pyo3(signature = (n=1))]
    fn sweep(&mut self, n: usize) {
        for _ in 0..n {
            self.inner.sweep();
        }
    }

    #[getter]
    fn acceptance_rate(&self) -> f64 {
        self.inner.acceptance_rate()
    }

    fn config(&self) -> PyRcConfig {
        PyRcConfig {
            bx: self.inner.boxspec().clone(),
            inner: self.inner.config().clone(),
        }
    }
}

/// `A = (δ / (2(2λ + δ)))²`.
#[pyfunction]
fn constant_a(lambda_: f64, delta: f64) -> PyResult<f64> {
    bnd::constant_a(lambda_, delta).map_err(err)
}

/// Smallest admissible `K ≥ 2` with `C e^{−γK} ≤ 1`.
#[pyfunction]
fn choose_k(c: f64, gamma: f64) -> PyResult<u32> {
    bnd::choose_k(c, gamma).map_err(err)
}

/// Every constant of the entropy bound, as a dict.
#[pyfunction]
fn entropy_bound<'py>(py: Python<'py>, c: f64, gamma: f64) -> PyResult<Bound<'py, PyDict>> {
    let b = bnd::entropy_bound(c, gamma).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("K", b.k)?;
    d.set_item("xi", b.xi)?;
    d.set_item("c", b.c)?;
    d.set_item("nu", b.nu)?;
    d.set_item("s1_bound", b.s1_bound)?;
    d.set_item("c1", b.c1)?;
    d.set_item("c1_remainder", b.c1_remainder)?;
    d.set_item("bound", b.bound)?;
    Ok(d)
}

/// Run an experiment from `key = value` configuration text; returns `(csv, json)`.
#[pyfunction]
#[pyo3(signature = (experiment, config, wall_clock=0))]
fn run_experiment(
    py: Python<'_>,
    experiment: &str,
    config: &str,
    wall_clock: u64,
) -> PyResult<(Option<String>, Option<String>)> {
    let exp: cli::Experiment = experiment.parse().map_err(err)?;
    let spec = cli::ExperimentSpec::from_text(exp, config).map_err(err)?;
    let r = py.detach(|| cli::run(&spec, wall_clock)).map_err(err)?;
    Ok((r.csv, r.json))
}

#[pymodule]
fn pyisingrc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpinChain>()?;
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyBoxSpec>()?;
    m.add_class::<PyRcConfig>()?;
    m.add_class::<PyRcModel>()?;
    m.add_class::<PyMcmcChain>()?;
    m.add_function(wrap_pyfunction!(constant_a, m)?)?;
    m.add_function(wrap_pyfunction!(choose_k, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
