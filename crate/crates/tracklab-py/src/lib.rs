//! Python bindings. Rationals cross the boundary as `p/q` strings so they stay
//! exact; `fractions.Fraction` reads them directly.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use tracklab::cone::cone_rays;
use tracklab::curves::{ivanov_bounds, scharlemann_atom, twist_limit_at_beta, AtomDecision, IntersectionVector, ProjectivePlane, TwistComponent, TwistSpec};
use tracklab::exceptional::n12_orbits;
use tracklab::format::{parse, serialize};
use tracklab::lambda::LambdaStructure;
use tracklab::loops::enumerate_loops;
use tracklab::one_vertex::{check_conditions, two_sided_witness, SwitchboardTrack};
use tracklab::procedure::uniformize;
use tracklab::rat::{fmt_rat, int, parse_rat, Rat};
use tracklab::track::{validate, TrainTrack};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat(s: &str) -> PyResult<Rat> {
    parse_rat(s).ok_or_else(|| value_error(format!("not a rational: {s}")))
}

/// A train track, optionally with a surface.
#[pyclass(name = "Track", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyTrack {
    inner: TrainTrack,
}

#[pymethods]
impl PyTrack {
    /// Parses `.tt` text, ignoring any weights.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyTrack { inner: parse(text).map_err(value_error)?.track })
    }

    fn edge_names(&self) -> Vec<String> {
        self.inner.edges().iter().map(|e| e.name.clone()).collect()
    }

    fn num_switches(&self) -> usize {
        self.inner.num_switches()
    }

    /// `(valid, errors)`.
    #[pyo3(signature = (strict = false))]
    fn validate(&self, strict: bool) -> (bool, Vec<String>) {
        let r = validate(&self.inner, strict);
        (r.is_valid(), r.errors)
    }

    /// Extreme rays of the weight cone as primitive integer vectors.
    fn rays(&self) -> Vec<Vec<String>> {
        cone_rays(&self.inner).iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    /// `(path, sidedness)` for each carried curve with multiplicity at most `max_mult`.
    fn loops(&self, max_mult: u64) -> Vec<(String, String)> {
        enumerate_loops(&self.inner, max_mult).into_iter().map(|l| (l.lp.display(&self.inner), l.sidedness.to_string())).collect()
    }

    /// The seven conditions of a one-vertex track, whether it carries a
    /// two-sided curve, and a witness from the brute-force search.
    fn two_sided(&self) -> PyResult<PyTwoSided> {
        let sb = SwitchboardTrack::new(self.inner.clone()).map_err(value_error)?;
        let rep = check_conditions(&sb);
        let witness = two_sided_witness(&self.inner, 2).map(|w| w.display(&self.inner));
        Ok(PyTwoSided {
            conditions: rep.passes.to_vec(),
            carries_two_sided: !rep.all_pass(),
            oracle_agrees: rep.all_pass() == witness.is_none(),
            witness,
        })
    }

    fn to_text(&self) -> String {
        serialize(&self.inner, None)
    }

    fn __repr__(&self) -> String {
        format!("Track(switches={}, edges={})", self.inner.num_switches(), self.inner.num_edges())
    }
}

#[pyclass(name = "TwoSidedReport", frozen, get_all)]
struct PyTwoSided {
    conditions: Vec<bool>,
    carries_two_sided: bool,
    oracle_agrees: bool,
    witness: Option<String>,
}

/// A weighted track with its λ-lengths.
#[pyclass(name = "Structure", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyStructure {
    inner: LambdaStructure,
}

/// One run of the Main Procedure.
#[pyclass(name = "Certificate", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyCertificate {
    mw0: String,
    mw1: String,
    lw0: String,
    lw1: String,
    rounds: usize,
    chi_abs: u64,
    holds: bool,
}

#[pyclass(name = "UniformizeResult", frozen, get_all)]
struct PyUniformizeResult {
    structure: PyStructure,
    certificates: Vec<PyCertificate>,
    ratio: String,
    ratio_bound: String,
    uniform: bool,
}

#[pymethods]
impl PyStructure {
    /// Parses `.tt` text that carries weights.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let f = parse(text).map_err(value_error)?;
        let s = f.structure.ok_or_else(|| value_error("the text has no weights"))?;
        let inner = LambdaStructure::new(s.track().clone(), s.weights().to_vec()).map_err(value_error)?;
        Ok(PyStructure { inner })
    }

    fn track(&self) -> PyTrack {
        PyTrack { inner: self.inner.track().clone() }
    }

    fn weights(&self) -> Vec<String> {
        self.inner.weights().iter().map(fmt_rat).collect()
    }

    /// λ-length of each edge.
    fn lambda_lengths(&self) -> Vec<String> {
        self.inner.lambda_lengths().per_edge.iter().map(fmt_rat).collect()
    }

    /// `(total, min)` λ-length.
    fn totals(&self) -> (String, String) {
        let ll = self.inner.lambda_lengths();
        (fmt_rat(&ll.total), fmt_rat(&ll.min))
    }

    fn edge_kinds(&self) -> Vec<String> {
        (0..self.inner.track().num_edges()).map(|e| self.inner.edge_kind(e).to_string()).collect()
    }

    /// Runs the Main Procedure until `ℓ ≤ C m` and `ℓ ≥ L`. `C` defaults to
    /// `1000|χ| + 1` and `L` to ten times the current total.
    #[pyo3(signature = (c = None, l = None, generic = false))]
    fn uniformize(&self, c: Option<&str>, l: Option<&str>, generic: bool) -> PyResult<PyUniformizeResult> {
        let chi = self.inner.track().surface().ok_or_else(|| value_error("the track has no surface"))?.abs_chi();
        let c = match c {
            Some(s) => rat(s)?,
            None => int(1000 * chi as i64 + 1),
        };
        let l = match l {
            Some(s) => rat(s)?,
            None => self.inner.lambda_lengths().total * int(10),
        };
        let rep = uniformize(&self.inner, &c, &l, generic).map_err(value_error)?;
        let certificates = rep
            .certificates
            .iter()
            .map(|x| PyCertificate {
                mw0: fmt_rat(&x.m0),
                mw1: fmt_rat(&x.m1),
                lw0: fmt_rat(&x.l0),
                lw1: fmt_rat(&x.l1),
                rounds: x.rounds,
                chi_abs: x.chi_abs,
                holds: x.holds(),
            })
            .collect();
        Ok(PyUniformizeResult {
            ratio: fmt_rat(&rep.ratio()),
            ratio_bound: fmt_rat(&rep.ratio_bound()),
            uniform: rep.uniform(),
            structure: PyStructure { inner: rep.structure },
            certificates,
        })
    }

    fn to_text(&self) -> String {
        serialize(self.inner.track(), Some(&self.inner))
    }

    fn __repr__(&self) -> String {
        let ll = self.inner.lambda_lengths();
        format!("Structure(edges={}, total={}, min={})", self.inner.track().num_edges(), fmt_rat(&ll.total), fmt_rat(&ll.min))
    }
}

/// `(lo, hi, limit)` for `ι(T(α), β)` with `T` a product of twists.
#[pyfunction]
fn twist_bounds(n: Vec<i64>, iag: Vec<String>, igb: Vec<String>, iab: &str) -> PyResult<(String, String, String)> {
    if n.len() != iag.len() || n.len() != igb.len() {
        return Err(value_error("n, iag and igb must have equal length"));
    }
    let mut comps = Vec::new();
    for (i, ((n, a), b)) in n.into_iter().zip(&iag).zip(&igb).enumerate() {
        comps.push(TwistComponent { label: format!("g{i}"), exponent: n, i_alpha: rat(a)?, i_beta: rat(b)? });
    }
    let spec = TwistSpec::new(comps, rat(iab)?).map_err(value_error)?;
    let b = ivanov_bounds(&spec);
    Ok((fmt_rat(&b.lo), fmt_rat(&b.hi), fmt_rat(&twist_limit_at_beta(&spec))))
}

/// Atom weight of the core of a two-holed projective plane, or `None`.
#[pyfunction]
fn atom_check(ieta: &str, ibnd: Vec<String>) -> PyResult<Option<String>> {
    let mut family: Vec<String> = (0..ibnd.len()).map(|i| format!("d{i}")).collect();
    let boundary = family.clone();
    family.push("eta".into());
    let mut values = ibnd.iter().map(|s| rat(s)).collect::<PyResult<Vec<_>>>()?;
    values.push(rat(ieta)?);
    let lam = IntersectionVector::new(family, values).map_err(value_error)?;
    let p = ProjectivePlane { boundary, dual: "eta".into(), core: "gamma".into() };
    Ok(match scharlemann_atom(&lam, &p).map_err(value_error)? {
        AtomDecision::Atom(w) => Some(fmt_rat(&w)),
        AtomDecision::NoAtom => None,
    })
}

/// Projective classes of measured laminations on the two-holed projective plane.
#[pyfunction]
fn n12_pml() -> Vec<String> {
    n12_orbits().pml
}

#[pymodule]
fn tracklab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrack>()?;
    m.add_class::<PyStructure>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyTwoSided>()?;
    m.add_class::<PyUniformizeResult>()?;
    m.add_function(wrap_pyfunction!(twist_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(atom_check, m)?)?;
    m.add_function(wrap_pyfunction!(n12_pml, m)?)?;
    Ok(())
}
