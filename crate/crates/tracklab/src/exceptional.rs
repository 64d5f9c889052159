//! Fixed models of the three non-orientable surfaces with `χ = −1`:
//! `N(1,2)`, `N(2,1)` and `N(3,0)`.

use crate::curves::{ivanov_bounds, Interval, TwistComponent, TwistSpec};
use crate::rat::{int, Rat};
use crate::surface::{max_two_sided_multicurve, SurfaceSig};

/// The two-holed projective plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N12Report {
    pub surface: SurfaceSig,
    /// Projective classes of measured laminations: `[γ]` and `[η]`.
    pub pml: Vec<String>,
    /// `ι(γ, η)`.
    pub crossing: u32,
    pub two_sided_curves: usize,
    /// No measured lamination avoids one-sided leaves.
    pub ml_plus_empty: bool,
    /// `Z/2 × Z/2`.
    pub mapping_class_group_order: usize,
    /// Orbits of the mapping class group on the projective classes.
    pub orbits: Vec<Vec<String>>,
    /// Order of the stabiliser of each point.
    pub stabiliser_order: usize,
    /// Largest two-sided multicurve from the surface formulas.
    pub max_two_sided_multicurve: i64,
}

/// Both curves are one-sided with pair-of-pants complements, so a
/// homeomorphism carries one to the other; the orbit is all of `PML` and the
/// stabiliser has index 2.
pub fn n12_orbits() -> N12Report {
    let surface = SurfaceSig::nonorientable(1, 2);
    N12Report {
        surface,
        pml: vec!["gamma".into(), "eta".into()],
        crossing: 1,
        two_sided_curves: 0,
        ml_plus_empty: true,
        mapping_class_group_order: 4,
        orbits: vec![vec!["gamma".into(), "eta".into()]],
        stabiliser_order: 2,
        max_two_sided_multicurve: max_two_sided_multicurve(&surface).expect("hyperbolic"),
    }
}

/// Intersection data for the one-holed Klein bottle: `γ0` one-sided, `α` the
/// unique two-sided curve, and a test curve `β`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N21Data {
    pub i_g0_alpha: Rat,
    pub i_g0_beta: Rat,
    pub i_alpha_beta: Rat,
}

/// Bounds on `ι(γn, β)` for `γn = D_α^n(γ0)`, raw and divided by `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N21Step {
    pub n: u32,
    pub bounds: Interval,
    pub normalized: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExceptionalError {
    #[error("ι(γ0, α) must be positive")]
    DisjointFromAlpha,
    #[error("intersection numbers must be nonnegative")]
    Negative,
}

/// Twist intervals along `α` for `n = 1..=n_max`. The normalized intervals
/// close in on `ι(γ0,α) ι(α,β)`.
pub fn n21_twist_orbit(n_max: u32, data: &N21Data) -> Result<Vec<N21Step>, ExceptionalError> {
    if data.i_g0_alpha <= int(0) {
        return Err(ExceptionalError::DisjointFromAlpha);
    }
    if data.i_g0_beta < int(0) || data.i_alpha_beta < int(0) {
        return Err(ExceptionalError::Negative);
    }
    (1..=n_max)
        .map(|n| {
            let spec = TwistSpec::new(
                vec![TwistComponent { label: "alpha".into(), exponent: n as i64, i_alpha: data.i_g0_alpha.clone(), i_beta: data.i_alpha_beta.clone() }],
                data.i_g0_beta.clone(),
            )
            .map_err(|_| ExceptionalError::Negative)?;
            let bounds = ivanov_bounds(&spec);
            let normalized = bounds.scaled(&Rat::new(1.into(), n.into()));
            Ok(N21Step { n, bounds, normalized })
        })
        .collect()
}

/// `ι(γ0,α) ι(α,β)`.
pub fn n21_limit(data: &N21Data) -> Rat {
    &data.i_g0_alpha * &data.i_alpha_beta
}

/// The closed surface with three cross-caps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct N30Report {
    pub surface: SurfaceSig,
    /// `PML` is a 2-sphere.
    pub pml_dimension: u32,
    /// `PML⁺` is the circle `PML(T)` of the one-holed torus `T = N(3,0) ∖ γ`.
    pub pml_plus: &'static str,
    /// Components of `PML ∖ PML⁺`.
    pub complement_components: usize,
    pub complement_disks: [&'static str; 2],
    /// There is one one-sided curve disjoint from every two-sided curve.
    pub special_one_sided_curve: &'static str,
    pub gamma_disjoint_from_two_sided: bool,
    pub ml_plus_supported_in_torus: bool,
    /// Every other one-sided curve meets `γ` once.
    pub other_one_sided_meet_gamma: u32,
    pub mapping_class_group: &'static str,
}

pub fn n30_structure() -> N30Report {
    N30Report {
        surface: SurfaceSig::nonorientable(3, 0),
        pml_dimension: 2,
        pml_plus: "PML(T), T = N(3,0) minus gamma, a one-holed torus",
        complement_components: 2,
        complement_disks: ["laminations with gamma as a leaf", "multicurves with a one-sided component other than gamma"],
        special_one_sided_curve: "gamma",
        gamma_disjoint_from_two_sided: true,
        ml_plus_supported_in_torus: true,
        other_one_sided_meet_gamma: 1,
        mapping_class_group: "Map(T)",
    }
}
