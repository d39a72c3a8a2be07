//! Python module `saddlenode`: fields, numerics presets, moduli and normal forms.
//!
//! Complex numbers cross the boundary as Python `complex`, series as lists of
//! `(m, n, c)` for `c·x^m yⁿ`, coefficient tables as one list per sector with
//! entry `i` holding the coefficient of `h^(i+1)`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use saddlenode::algebra::{BiSeries, CoeffTable, Complex64};
use saddlenode::leaf::{leaf_rhs, DulacField, Unit};
use saddlenode::normalform::{self as nf, NormalFormData};
use saddlenode::period::{self, Numerics};

create_exception!(saddlenode, NumericalError, PyRuntimeError);

fn err(e: saddlenode::Error) -> PyErr {
    if e.is_numeric() {
        NumericalError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

type Term = (u32, u32, Complex64);

fn series(terms: &[Term]) -> BiSeries {
    BiSeries::from_terms(terms.iter().copied())
}

fn term_list(s: &BiSeries) -> Vec<Term> {
    let mut t: Vec<Term> = s.terms().collect();
    t.sort_by_key(|&(m, n, _)| (n, m));
    t
}

fn table(rows: Vec<Vec<Complex64>>) -> PyResult<CoeffTable> {
    CoeffTable::from_rows(rows).map_err(err)
}

fn rows(t: &CoeffTable) -> Vec<Vec<Complex64>> {
    t.rows().to_vec()
}

#[pyclass(name = "Numerics", from_py_object)]
#[derive(Clone)]
struct PyNumerics {
    inner: Numerics,
}

#[pymethods]
impl PyNumerics {
    #[new]
    #[pyo3(signature = (radius = 1.0, step = 1e-3, circle_radius = 0.1, circle_points = 1000, eps_min = 1e-3))]
    fn new(radius: f64, step: f64, circle_radius: f64, circle_points: usize, eps_min: f64) -> Self {
        let mut inner = Numerics::modulus();
        inner.r = radius;
        inner.integrator.step = step;
        inner.integrator.eps_min = eps_min;
        inner.cauchy.circle_radius = circle_radius;
        inner.cauchy.circle_points = circle_points;
        Self { inner }
    }

    /// Base radius 1, circle 0.1 with 1000 points.
    #[staticmethod]
    fn modulus() -> Self {
        Self { inner: Numerics::modulus() }
    }

    /// Base radius 5, circle 0.1 with 1000 points.
    #[staticmethod]
    fn modulus_r5() -> Self {
        Self { inner: Numerics::modulus_r5() }
    }

    /// Base radius 5, circle 0.01 with 5000 points.
    #[staticmethod]
    fn realization() -> Self {
        Self { inner: Numerics::realization() }
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.r
    }

    #[getter]
    fn step(&self) -> f64 {
        self.inner.integrator.step
    }

    #[getter]
    fn circle_radius(&self) -> f64 {
        self.inner.cauchy.circle_radius
    }

    #[getter]
    fn circle_points(&self) -> usize {
        self.inner.cauchy.circle_points
    }

    #[getter]
    fn eps_min(&self) -> f64 {
        self.inner.integrator.eps_min
    }

    fn __repr__(&self) -> String {
        format!(
            "Numerics(radius={}, step={}, circle_radius={}, circle_points={}, eps_min={})",
            self.inner.r,
            self.inner.integrator.step,
            self.inner.cauchy.circle_radius,
            self.inner.cauchy.circle_points,
            self.inner.integrator.eps_min
        )
    }
}

fn numerics_or_default(n: Option<PyNumerics>) -> Numerics {
    n.map_or_else(Numerics::modulus, |n| n.inner)
}

/// `U·(x^{k+1}∂x + y(1 + μx^k + xR)∂y)` with `U` given as a series (default 1).
#[pyclass(name = "Field", skip_from_py_object)]
struct PyField {
    inner: DulacField,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (k, mu, r, u = None))]
    fn new(k: u32, mu: Complex64, r: Vec<Term>, u: Option<Vec<Term>>) -> PyResult<Self> {
        let unit = u.map_or_else(Unit::one, |t| Unit::Series(series(&t)));
        let inner = DulacField::new(k, mu, unit, series(&r)).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    #[getter]
    fn mu(&self) -> Complex64 {
        self.inner.mu()
    }

    #[getter]
    fn sigma(&self) -> u32 {
        self.inner.class().sigma
    }

    fn r_terms(&self) -> Vec<Term> {
        term_list(self.inner.r())
    }

    /// `dy/dx` of the leaf equation at `(x, y)`.
    fn rhs(&self, x: Complex64, y: Complex64) -> PyResult<Complex64> {
        leaf_rhs(&self.inner, x, y).map_err(err)
    }

    /// `(orbital, temporal)` coefficient tables.
    #[pyo3(signature = (degree = 4, numerics = None))]
    fn modulus(
        &self,
        py: Python<'_>,
        degree: usize,
        numerics: Option<PyNumerics>,
    ) -> PyResult<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
        let num = numerics_or_default(numerics);
        let data = py.detach(|| period::modulus(&self.inner, degree, &num)).map_err(err)?;
        Ok((rows(&data.orbital), rows(&data.temporal)))
    }

    #[pyo3(signature = (degree = 4, numerics = None))]
    fn orbital_modulus(&self, py: Python<'_>, degree: usize, numerics: Option<PyNumerics>) -> PyResult<Vec<Vec<Complex64>>> {
        let num = numerics_or_default(numerics);
        let t = py.detach(|| period::orbital_modulus(&self.inner, degree, &num)).map_err(err)?;
        Ok(rows(&t))
    }

    fn __repr__(&self) -> String {
        format!(
            "Field(k={}, mu={}, {} R terms)",
            self.inner.k(),
            self.inner.mu(),
            self.inner.r().len()
        )
    }
}

/// Normal form `P/(1 + xPG)·X_R`; `r[n-1][m]` multiplies `x^{m+σn} yⁿ`.
#[pyclass(name = "NormalForm", from_py_object)]
#[derive(Clone)]
struct PyNormalForm {
    inner: NormalFormData,
}

#[pymethods]
impl PyNormalForm {
    #[getter]
    fn k(&self) -> u32 {
        self.inner.class.k
    }

    #[getter]
    fn mu(&self) -> Complex64 {
        self.inner.class.mu
    }

    #[getter]
    fn sigma(&self) -> u32 {
        self.inner.class.sigma
    }

    #[getter]
    fn r(&self) -> Vec<Vec<Complex64>> {
        self.inner.r.clone()
    }

    #[getter]
    fn g(&self) -> Vec<Vec<Complex64>> {
        self.inner.g.clone()
    }

    fn r_terms(&self) -> Vec<Term> {
        term_list(&self.inner.r_series())
    }

    fn g_terms(&self) -> Vec<Term> {
        term_list(&self.inner.g_series())
    }

    fn field(&self) -> PyResult<PyField> {
        Ok(PyField {
            inner: self.inner.field().map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "NormalForm(k={}, mu={}, orders R={}, G={})",
            self.inner.class.k,
            self.inner.class.mu,
            self.inner.r.len(),
            self.inner.g.len()
        )
    }
}

/// Closed-form period coefficient of `x^m yⁿ` on the formal model, sector `j`.
#[pyfunction]
#[pyo3(signature = (k, mu, m, n, j = 0))]
fn model_coeff(k: u32, mu: Complex64, m: u32, n: u32, j: i64) -> PyResult<Complex64> {
    period::model_coeff(k, mu, m, n, j).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, mu, target, numerics = None))]
fn realize_orbital(
    py: Python<'_>,
    k: u32,
    mu: Complex64,
    target: Vec<Vec<Complex64>>,
    numerics: Option<PyNumerics>,
) -> PyResult<PyNormalForm> {
    let target = table(target)?;
    let num = numerics_or_default(numerics);
    let inner = py.detach(|| nf::realize_orbital(k, mu, &target, &num)).map_err(err)?;
    Ok(PyNormalForm { inner })
}

#[pyfunction]
#[pyo3(signature = (normal_form, target, numerics = None))]
fn realize_temporal(
    py: Python<'_>,
    normal_form: PyNormalForm,
    target: Vec<Vec<Complex64>>,
    numerics: Option<PyNumerics>,
) -> PyResult<PyNormalForm> {
    let target = table(target)?;
    let num = numerics_or_default(numerics);
    let inner = py
        .detach(|| nf::realize_temporal(&normal_form.inner, &target, &num))
        .map_err(err)?;
    Ok(PyNormalForm { inner })
}

#[pyfunction]
#[pyo3(signature = (target, tol = 1e-6, circle_radius = 0.1))]
fn integrability_test<'py>(
    py: Python<'py>,
    target: Vec<Vec<Complex64>>,
    tol: f64,
    circle_radius: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let v = nf::integrability_test(&table(target)?, tol, circle_radius);
    let d = PyDict::new(py);
    d.set_item("integrable_form", v.integrable_form)?;
    d.set_item("p", v.p)?;
    d.set_item("alpha", v.alpha)?;
    d.set_item("residual", v.residual)?;
    d.set_item("orientation", v.orientation)?;
    Ok(d)
}

/// `(μ, normal form)` for a germ `ψ(h) = Σ psi[i] h^(i+1)`.
#[pyfunction]
#[pyo3(signature = (psi, degree, numerics = None))]
fn realize_holonomy(
    py: Python<'_>,
    psi: Vec<Complex64>,
    degree: usize,
    numerics: Option<PyNumerics>,
) -> PyResult<(Complex64, PyNormalForm)> {
    let num = numerics_or_default(numerics);
    let (mu, inner) = py.detach(|| nf::realize_holonomy(&psi, degree, &num)).map_err(err)?;
    Ok((mu, PyNormalForm { inner }))
}

#[pyfunction]
#[pyo3(signature = (k, mu, target, numerics = None, check = None))]
fn roundtrip_check<'py>(
    py: Python<'py>,
    k: u32,
    mu: Complex64,
    target: Vec<Vec<Complex64>>,
    numerics: Option<PyNumerics>,
    check: Option<PyNumerics>,
) -> PyResult<Bound<'py, PyDict>> {
    let target = table(target)?;
    let num = numerics_or_default(numerics);
    let check = check.map_or(num, |c| c.inner);
    let rt = py
        .detach(|| nf::roundtrip_check(k, mu, &target, &num, &check))
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_residual", rt.max_residual())?;
    d.set_item(
        "residuals",
        rt.residuals
            .rows()
            .iter()
            .map(|r| r.iter().map(|c| c.re).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    )?;
    d.set_item("computed", rows(&rt.computed))?;
    d.set_item("normal_form", PyNormalForm { inner: rt.normal_form })?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "saddlenode")]
fn saddlenode_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNumerics>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyNormalForm>()?;
    m.add_function(wrap_pyfunction!(model_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(realize_orbital, m)?)?;
    m.add_function(wrap_pyfunction!(realize_temporal, m)?)?;
    m.add_function(wrap_pyfunction!(integrability_test, m)?)?;
    m.add_function(wrap_pyfunction!(realize_holonomy, m)?)?;
    m.add_function(wrap_pyfunction!(roundtrip_check, m)?)?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    Ok(())
}
