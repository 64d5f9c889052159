//! Intersection-number algebra on opaque curve labels: the `d_A` distance,
//! Dehn-twist bounds and their limit, and the one-sided atom test.
//!
//! Intersection numbers are supplied by the caller; nothing here computes
//! them from embedded curves.

use crate::rat::{abs, int, zero, Rat};
use num::Signed;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CurveError {
    #[error("families differ")]
    FamilyMismatch,
    #[error("{labels} labels but {values} values")]
    Length { labels: usize, values: usize },
    #[error("label {0} appears twice")]
    DuplicateLabel(String),
    #[error("label {0} is missing")]
    MissingLabel(String),
    #[error("negative intersection number for {0}")]
    Negative(String),
    #[error("exponent overflow")]
    Overflow,
    #[error("a two-holed projective plane needs at least one boundary label")]
    NoBoundary,
}

/// `α ↦ ι(λ, α)` over an ordered family of curve labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntersectionVector {
    family: Vec<String>,
    values: Vec<Rat>,
}

impl IntersectionVector {
    pub fn new(family: Vec<String>, values: Vec<Rat>) -> Result<Self, CurveError> {
        if family.len() != values.len() {
            return Err(CurveError::Length { labels: family.len(), values: values.len() });
        }
        for (i, a) in family.iter().enumerate() {
            if family[..i].contains(a) {
                return Err(CurveError::DuplicateLabel(a.clone()));
            }
            if values[i].is_negative() {
                return Err(CurveError::Negative(a.clone()));
            }
        }
        Ok(IntersectionVector { family, values })
    }

    pub fn family(&self) -> &[String] {
        &self.family
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn get(&self, label: &str) -> Result<&Rat, CurveError> {
        self.family.iter().position(|a| a == label).map(|i| &self.values[i]).ok_or_else(|| CurveError::MissingLabel(label.to_string()))
    }

    /// Multiplies every value by `c ≥ 0`.
    pub fn scaled(&self, c: &Rat) -> Self {
        IntersectionVector { family: self.family.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// `max_α |u(α) − v(α)|`.
pub fn d_a(u: &IntersectionVector, v: &IntersectionVector) -> Result<Rat, CurveError> {
    if u.family != v.family {
        return Err(CurveError::FamilyMismatch);
    }
    Ok(u.values.iter().zip(&v.values).map(|(a, b)| abs(&(a - b))).max().unwrap_or_else(zero))
}

/// One factor `D_γ^n` of a twist, with `ι(α, γ)` and `ι(γ, β)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistComponent {
    pub label: String,
    pub exponent: i64,
    pub i_alpha: Rat,
    pub i_beta: Rat,
}

/// `T = D_{γ1}^{n1} ∘ … ∘ D_{γr}^{nr}` along a two-sided multicurve, applied
/// to `α` and measured against `β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistSpec {
    components: Vec<TwistComponent>,
    i_alpha_beta: Rat,
}

impl TwistSpec {
    pub fn new(components: Vec<TwistComponent>, i_alpha_beta: Rat) -> Result<Self, CurveError> {
        for c in &components {
            if c.i_alpha.is_negative() || c.i_beta.is_negative() {
                return Err(CurveError::Negative(c.label.clone()));
            }
        }
        if i_alpha_beta.is_negative() {
            return Err(CurveError::Negative("alpha,beta".into()));
        }
        Ok(TwistSpec { components, i_alpha_beta })
    }

    pub fn components(&self) -> &[TwistComponent] {
        &self.components
    }

    pub fn i_alpha_beta(&self) -> &Rat {
        &self.i_alpha_beta
    }

    /// The spec of `T^k`.
    pub fn power(&self, k: i64) -> Result<Self, CurveError> {
        let components = self
            .components
            .iter()
            .map(|c| Ok(TwistComponent { exponent: c.exponent.checked_mul(k).ok_or(CurveError::Overflow)?, ..c.clone() }))
            .collect::<Result<_, CurveError>>()?;
        Ok(TwistSpec { components, i_alpha_beta: self.i_alpha_beta.clone() })
    }

    /// `Σ ι(α,γi) ι(γi,β)`.
    pub fn pair_sum(&self) -> Rat {
        self.components.iter().map(|c| &c.i_alpha * &c.i_beta).sum()
    }
}

/// A closed rational interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn scaled(&self, c: &Rat) -> Interval {
        Interval { lo: &self.lo * c, hi: &self.hi * c }
    }
}

/// Bounds on `ι(T(α), β)`:
/// `hi = Σ|ni| ι(α,γi) ι(γi,β) + ι(α,β)` and
/// `lo = max(0, Σ(|ni|−2) ι(α,γi) ι(γi,β) − ι(α,β))`.
pub fn ivanov_bounds(spec: &TwistSpec) -> Interval {
    let mut hi = spec.i_alpha_beta.clone();
    let mut lo = -spec.i_alpha_beta.clone();
    for c in &spec.components {
        let n = c.exponent.unsigned_abs() as i64;
        let p = &c.i_alpha * &c.i_beta;
        hi += int(n) * &p;
        lo += int(n - 2) * &p;
    }
    Interval { lo: if lo.is_negative() { zero() } else { lo }, hi }
}

/// `lim (1/k) T^k(α)` evaluated on `family`: the vector
/// `α' ↦ Σ |ni| ι(α,γi) ι(γi,α')`. Row `j` of `iota_gamma` holds
/// `ι(γi, family[j])` for each component `i`.
pub fn twist_limit(spec: &TwistSpec, family: &[String], iota_gamma: &[Vec<Rat>]) -> Result<IntersectionVector, CurveError> {
    if family.len() != iota_gamma.len() {
        return Err(CurveError::Length { labels: family.len(), values: iota_gamma.len() });
    }
    let mut values = Vec::with_capacity(family.len());
    for (label, row) in family.iter().zip(iota_gamma) {
        if row.len() != spec.components.len() {
            return Err(CurveError::Length { labels: spec.components.len(), values: row.len() });
        }
        if row.iter().any(|x| x.is_negative()) {
            return Err(CurveError::Negative(label.clone()));
        }
        values.push(spec.components.iter().zip(row).map(|(c, g)| int(c.exponent.unsigned_abs() as i64) * &c.i_alpha * g).sum());
    }
    IntersectionVector::new(family.to_vec(), values)
}

/// Value of [`twist_limit`] at `β`, using the `ι(γi, β)` stored in the spec.
pub fn twist_limit_at_beta(spec: &TwistSpec) -> Rat {
    spec.components.iter().map(|c| int(c.exponent.unsigned_abs() as i64) * &c.i_alpha * &c.i_beta).sum()
}

/// A two-holed projective plane given by labels: its boundary curves, the
/// dual curve `η` and the core `γ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePlane {
    pub boundary: Vec<String>,
    pub dual: String,
    pub core: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AtomDecision {
    /// The core is an atom with this weight.
    Atom(Rat),
    NoAtom,
}

/// The core of `p` is an atom of `lam` iff `max_{α ⊂ ∂P} ι(λ,α) < ι(λ,η)`,
/// with weight `2 (ι(λ,η) − max_{α ⊂ ∂P} ι(λ,α))`.
pub fn scharlemann_atom(lam: &IntersectionVector, p: &ProjectivePlane) -> Result<AtomDecision, CurveError> {
    if p.boundary.is_empty() {
        return Err(CurveError::NoBoundary);
    }
    let eta = lam.get(&p.dual)?.clone();
    let mut max = lam.get(&p.boundary[0])?.clone();
    for a in &p.boundary[1..] {
        let v = lam.get(a)?;
        if *v > max {
            max = v.clone();
        }
    }
    Ok(if max < eta { AtomDecision::Atom(int(2) * (eta - max)) } else { AtomDecision::NoAtom })
}
