//! Python bindings for `treelab`. Rationals cross the boundary as strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use treelab::conjugacy::{self, FiniteGroupTable, GroupKind, TableClass};
use treelab::f2_lab;
use treelab::pretree_core::{self, FinitePretree, IntervalKind, PointSet};
use treelab::tree_model::{self as tm, TreeSpace, Word};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn word(s: &str) -> PyResult<Word> {
    Word::parse(s).ok_or_else(|| PyValueError::new_err(format!("not a word over a, b, A, B: {s:?}")))
}

#[pyclass(name = "Pretree", module = "treelab")]
struct PyPretree(FinitePretree);

#[pymethods]
impl PyPretree {
    /// Betweenness from `(y, x, z)` triples meaning `y` lies strictly between `x` and `z`.
    #[new]
    fn new(n: usize, triples: Vec<(usize, usize, usize)>) -> PyResult<Self> {
        FinitePretree::new(n, triples).map(PyPretree).map_err(err)
    }

    #[staticmethod]
    fn from_tree(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(PyValueError::new_err(format!("edge ({a}, {b}) out of range")));
        }
        tm::MetricTree::unit(n, &edges).map_err(err)?;
        Ok(PyPretree(pretree_core::tree_pretree(n, &edges)))
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        FinitePretree::parse(text).map(PyPretree).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Pretree(n={}, triples={})", self.0.len(), self.0.triples().len())
    }

    fn between(&self, y: usize, x: usize, z: usize) -> PyResult<bool> {
        let n = self.0.len();
        if let Some(&v) = [y, x, z].iter().find(|&&v| v >= n) {
            return Err(err(pretree_core::PretreeError::UnknownPoint(v)));
        }
        Ok(self.0.between(y, x, z))
    }

    /// Returns `(passed, total, [(axiom, witness), ...])`.
    fn check_axioms(&self) -> (bool, usize, Vec<(String, Vec<usize>)>) {
        let r = self.0.check_axioms();
        let v = r.violations.iter().map(|v| (v.axiom.to_string(), v.witness.clone())).collect();
        (r.passed(), r.total, v)
    }

    fn is_median(&self) -> bool {
        self.0.is_median()
    }

    /// `kind` is `closed`, `open` or `half_open`.
    #[pyo3(signature = (x, z, kind = "closed"))]
    fn interval(&self, x: usize, z: usize, kind: &str) -> PyResult<Vec<usize>> {
        let k = match kind {
            "closed" => IntervalKind::Closed,
            "open" => IntervalKind::Open,
            "half_open" => IntervalKind::HalfOpen,
            _ => return Err(PyValueError::new_err(format!("unknown interval kind {kind:?}"))),
        };
        Ok(self.0.interval(x, z, k).map_err(err)?.into_iter().collect())
    }

    fn median(&self, x: usize, y: usize, z: usize) -> PyResult<Option<usize>> {
        self.0.median(x, y, z).map_err(err)
    }

    fn median_closure(&self, seed: Vec<usize>) -> PyResult<Vec<usize>> {
        let s: PointSet = seed.into_iter().collect();
        Ok(self.0.median_closure(&s).map_err(err)?.into_iter().collect())
    }

    fn project(&self, x: usize, onto: Vec<usize>) -> PyResult<usize> {
        self.0.project(x, &onto.into_iter().collect()).map_err(err)
    }

    /// Returns `(t, q, interior)`.
    fn bridge(&self, a: Vec<usize>, b: Vec<usize>) -> PyResult<(usize, usize, Vec<usize>)> {
        let br = self.0.bridge(&a.into_iter().collect(), &b.into_iter().collect()).map_err(err)?;
        Ok((br.t, br.q, br.interior.into_iter().collect()))
    }

    fn is_automorphism(&self, map: Vec<usize>) -> bool {
        self.0.check_automorphism(&map).is_ok()
    }
}

/// A finite metric tree; points are written `@v` or `@a-b:off`.
#[pyclass(name = "MetricTree", module = "treelab")]
struct PyMetricTree(tm::MetricTree);

#[pymethods]
impl PyMetricTree {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        tm::MetricTree::parse(text).map(PyMetricTree).map_err(err)
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn labels(&self) -> Vec<String> {
        self.0.labels().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn dist(&self, a: &str, b: &str) -> PyResult<String> {
        let (a, b) = (self.point(a)?, self.point(b)?);
        Ok(self.0.dist(&a, &b).to_string())
    }

    fn median(&self, a: &str, b: &str, c: &str) -> PyResult<String> {
        let (a, b, c) = (self.point(a)?, self.point(b)?, self.point(c)?);
        Ok(self.0.format_point(&self.0.median(&a, &b, &c)))
    }

    fn between(&self, y: &str, x: &str, z: &str) -> PyResult<bool> {
        let (y, x, z) = (self.point(y)?, self.point(x)?, self.point(z)?);
        Ok(self.0.between(&y, &x, &z))
    }

    /// Betweenness induced on the vertex set.
    fn pretree(&self) -> PyPretree {
        PyPretree(tm::as_pretree(&self.0, &self.0.vertices()))
    }
}

impl PyMetricTree {
    fn point(&self, s: &str) -> PyResult<tm::TreePoint> {
        let s = if s.starts_with('@') { s.to_string() } else { format!("@{s}") };
        self.0.parse_point(&s).map_err(err)
    }
}

/// Reduced form of a word over `a, b, A = a⁻¹, B = b⁻¹`.
#[pyfunction]
fn f2_reduce(w: &str) -> PyResult<String> {
    Ok(word(w)?.to_string())
}

#[pyfunction]
fn f2_dist(u: &str, v: &str) -> PyResult<usize> {
    Ok(tm::F2Tree::word_dist(&word(u)?, &word(v)?))
}

#[pyfunction]
fn f2_phi(w: &str) -> PyResult<String> {
    Ok(f2_lab::phi(&word(w)?).to_string())
}

#[pyfunction]
fn f2_phi_inverse(w: &str) -> PyResult<String> {
    Ok(f2_lab::phi_inverse(&word(w)?).to_string())
}

#[pyfunction]
fn f2_theta(w: &str) -> PyResult<String> {
    Ok(f2_lab::theta(&word(w)?).to_string())
}

/// Row-major entries of `I + u ξ v` over `F_p`.
#[pyfunction]
fn transvection(u: Vec<i64>, v: Vec<i64>, xi: i64, p: u32) -> PyResult<Vec<u32>> {
    Ok(conjugacy::make_transvection(&u, &v, xi, p).map_err(err)?.matrix().entries().to_vec())
}

/// Path between two transvections `(u, v, ξ)` over `F_p`; returns the
/// row-major matrices and the construction used.
#[pyfunction]
fn transvection_path(
    a: (Vec<i64>, Vec<i64>, i64),
    b: (Vec<i64>, Vec<i64>, i64),
    p: u32,
) -> PyResult<(Vec<Vec<u32>>, String)> {
    let ta = conjugacy::make_transvection(&a.0, &a.1, a.2, p).map_err(err)?;
    let tb = conjugacy::make_transvection(&b.0, &b.1, b.2, p).map_err(err)?;
    let (path, shape) = conjugacy::transvection_xpath(&ta, &tb).map_err(err)?;
    let mats = path.elements.iter().map(|m| m.entries().to_vec()).collect();
    Ok((mats, format!("{shape:?}")))
}

/// `(group order, class size, diameter)` for the transvection class of `SL(n, p)`.
#[pyfunction]
#[pyo3(signature = (n, p, cap = 20000))]
fn sl_transvection_class(n: usize, p: u32, cap: usize) -> PyResult<(usize, usize, Option<usize>)> {
    let table = FiniteGroupTable::build(&GroupKind::Sl { n, p }, cap).map_err(err)?;
    let class = table.transvection_class().ok_or_else(|| PyValueError::new_err("no transvection class"))?;
    let size = table.classes()[class].len();
    let diam = conjugacy::class_diameter(&TableClass { table: &table, class });
    Ok((table.len(), size, diam))
}

/// Runs the command-line tool in-process; returns `(exit code, stdout, stderr)`.
#[pyfunction]
fn run_cli(args: Vec<String>) -> (i32, String, String) {
    let (mut out, mut errs) = (Vec::new(), Vec::new());
    let code = treelab::cli::run(std::iter::once("treelab".to_string()).chain(args), &mut out, &mut errs);
    (code, String::from_utf8_lossy(&out).into_owned(), String::from_utf8_lossy(&errs).into_owned())
}

#[pymodule]
#[pyo3(name = "treelab")]
fn treelab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPretree>()?;
    m.add_class::<PyMetricTree>()?;
    m.add_function(wrap_pyfunction!(f2_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(f2_dist, m)?)?;
    m.add_function(wrap_pyfunction!(f2_phi, m)?)?;
    m.add_function(wrap_pyfunction!(f2_phi_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(f2_theta, m)?)?;
    m.add_function(wrap_pyfunction!(transvection, m)?)?;
    m.add_function(wrap_pyfunction!(transvection_path, m)?)?;
    m.add_function(wrap_pyfunction!(sl_transvection_class, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
