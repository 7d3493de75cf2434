//! Python bindings: load or generate databases and run the miners.

use std::path::PathBuf;

use oshusp::ingest::{
    generate_scaled, generate_synthetic, parse_database, parse_database_str, write_database, DatasetBundle,
    GeneratorConfig, ShelfPolicy, SynthConfig,
};
use oshusp::oracle::{self, OracleConfig};
use oshusp::osums::mine_osums;
use oshusp::osums_plus::mine_osums_plus;
use oshusp::{MineOptions, MiningReport, StrategyFlags, TemporalDatabase, Threshold};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn policy(relax: bool) -> ShelfPolicy {
    if relax {
        ShelfPolicy::Relax
    } else {
        ShelfPolicy::Strict
    }
}

/// A validated temporal q-sequence database.
#[pyclass(name = "Database", module = "pyoshusp")]
pub struct PyDatabase {
    inner: TemporalDatabase,
}

#[pymethods]
impl PyDatabase {
    /// Reads the database, profit and (optional) shelf files.
    #[staticmethod]
    #[pyo3(signature = (db, utils, shelf=None, relax_shelf=false))]
    fn load(db: PathBuf, utils: PathBuf, shelf: Option<PathBuf>, relax_shelf: bool) -> PyResult<Self> {
        let bundle = DatasetBundle {
            database: db,
            utilities: utils,
            shelf,
        };
        let parsed = parse_database(&bundle, policy(relax_shelf)).map_err(value_error)?;
        Ok(PyDatabase { inner: parsed.database })
    }

    /// Parses file contents held in strings.
    #[staticmethod]
    #[pyo3(signature = (db, utils, shelf=None, relax_shelf=false))]
    fn parse(db: &str, utils: &str, shelf: Option<&str>, relax_shelf: bool) -> PyResult<Self> {
        let parsed = parse_database_str(db, utils, shelf, policy(relax_shelf)).map_err(value_error)?;
        Ok(PyDatabase { inner: parsed.database })
    }

    /// The five-sequence example database shipped with the library.
    #[staticmethod]
    fn running_example() -> Self {
        PyDatabase {
            inner: oshusp::fixtures::running_example(),
        }
    }

    #[staticmethod]
    #[pyo3(signature = (sequences=300, items=40, periods=5, seed=0, shelf_density=0.6))]
    fn synthetic(sequences: usize, items: u32, periods: u32, seed: u64, shelf_density: f64) -> PyResult<Self> {
        if items == 0 || periods == 0 {
            return Err(value_error("items and periods must be positive"));
        }
        let config = SynthConfig {
            sequences,
            items,
            periods,
            seed,
            shelf_density,
            ..SynthConfig::default()
        };
        Ok(PyDatabase {
            inner: generate_synthetic(&config),
        })
    }

    /// `scale` copies of this database spread over `periods` random periods.
    #[pyo3(signature = (scale, periods, seed=0))]
    fn scaled(&self, scale: u32, periods: u32, seed: u64) -> PyResult<Self> {
        if scale == 0 || periods == 0 {
            return Err(value_error("scale and periods must be positive"));
        }
        Ok(PyDatabase {
            inner: generate_scaled(&self.inner, GeneratorConfig { scale, periods, seed }),
        })
    }

    /// Writes `<prefix>.db`, `<prefix>.ut` and `<prefix>.sh`.
    fn write(&self, prefix: PathBuf) -> PyResult<()> {
        write_database(&self.inner, prefix).map_err(value_error)?;
        Ok(())
    }

    #[getter]
    fn num_sequences(&self) -> usize {
        self.inner.sequences().len()
    }

    #[getter]
    fn periods(&self) -> Vec<u32> {
        self.inner.periods().iter().map(|t| t.0).collect()
    }

    #[getter]
    fn items(&self) -> Vec<u32> {
        self.inner.items().iter().map(|i| i.0).collect()
    }

    #[getter]
    fn total_utility(&self) -> u64 {
        self.inner.total_utility()
    }

    fn __repr__(&self) -> String {
        format!(
            "Database(sequences={}, items={}, periods={})",
            self.inner.sequences().len(),
            self.inner.items().len(),
            self.inner.periods().len()
        )
    }
}

/// One reported pattern.
#[pyclass(name = "Pattern", module = "pyoshusp", get_all, frozen)]
pub struct PyPattern {
    /// Serialized as `{1 3}{2}`.
    pattern: String,
    ou: u64,
    our_num: u64,
    our_den: u64,
    ot: Vec<u32>,
}

#[pymethods]
impl PyPattern {
    #[getter]
    fn our(&self) -> f64 {
        if self.our_den == 0 {
            0.0
        } else {
            self.our_num as f64 / self.our_den as f64
        }
    }

    fn __repr__(&self) -> String {
        format!("Pattern('{}', ou={}, our={:.6})", self.pattern, self.ou, self.our())
    }
}

/// Patterns plus search statistics of one run.
#[pyclass(name = "Report", module = "pyoshusp", get_all, frozen)]
pub struct PyReport {
    patterns: Vec<Py<PyPattern>>,
    candidates: u64,
    projections: u64,
    verifications: u64,
    peak_bytes: usize,
    time_ms: f64,
}

#[pymethods]
impl PyReport {
    fn __len__(&self) -> usize {
        self.patterns.len()
    }
}

fn to_py(py: Python<'_>, report: MiningReport) -> PyResult<PyReport> {
    let patterns = report
        .patterns
        .into_iter()
        .map(|m| {
            Py::new(
                py,
                PyPattern {
                    pattern: m.pattern.to_string(),
                    ou: m.ou,
                    our_num: m.our.num,
                    our_den: m.our.den,
                    ot: m.ot.iter().map(|t| t.0).collect(),
                },
            )
        })
        .collect::<PyResult<_>>()?;
    Ok(PyReport {
        patterns,
        candidates: report.candidates_generated,
        projections: report.projections_built,
        verifications: report.verifications,
        peak_bytes: report.peak_bytes,
        time_ms: report.wall_time.as_secs_f64() * 1000.0,
    })
}

/// Mines `db` at `threshold` (a decimal such as `"0.3"` or a fraction `"3/10"`).
///
/// `algo` is one of `"osums"`, `"osums-plus"` or `"oracle"`; `disable` names
/// strategies to switch off (`"ldp"`, `"lwp"`, `"arc"`, `"gdp"`, `"gwp"`).
#[pyfunction]
#[pyo3(signature = (db, threshold, algo="osums-plus", max_len=None, disable=Vec::new()))]
fn mine(
    py: Python<'_>,
    db: &PyDatabase,
    threshold: &str,
    algo: &str,
    max_len: Option<usize>,
    disable: Vec<String>,
) -> PyResult<PyReport> {
    let xi: Threshold = threshold.parse().map_err(value_error)?;
    let mut flags = StrategyFlags::all();
    for name in &disable {
        match name.as_str() {
            "ldp" => flags.ldp = false,
            "lwp" => flags.lwp = false,
            "arc" => flags.arc = false,
            "gdp" => flags.gdp = false,
            "gwp" => flags.gwp = false,
            other => return Err(value_error(format!("unknown strategy {other:?}"))),
        }
    }
    let options = MineOptions {
        flags,
        max_len,
        ..Default::default()
    };
    let inner = &db.inner;
    let report = match algo {
        "osums" => py.detach(|| mine_osums(inner, xi, &options)),
        "osums-plus" => py.detach(|| mine_osums_plus(inner, xi, &options)),
        "oracle" => {
            let mut cfg = OracleConfig::unbounded(inner, xi);
            if let Some(m) = max_len {
                cfg.max_pattern_length = m.max(1);
            }
            let patterns = oracle::oracle_mine(inner, &cfg).map_err(value_error)?;
            Ok(MiningReport {
                patterns,
                ..Default::default()
            })
        }
        other => return Err(value_error(format!("unknown algorithm {other:?}"))),
    }
    .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    to_py(py, report)
}

#[pymodule]
fn pyoshusp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDatabase>()?;
    m.add_class::<PyPattern>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(mine, m)?)?;
    Ok(())
}
