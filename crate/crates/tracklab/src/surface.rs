//! Surface signatures and the multicurve-count formulas.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SurfaceSig {
    pub orientable: bool,
    /// Genus `g` when orientable, number of cross-caps `k` otherwise.
    pub genus: u32,
    pub boundary: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exceptionality {
    Exceptional,
    NonExceptional,
    NotHyperbolic,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurfaceError {
    #[error("multicurve counts are only defined here for non-orientable surfaces")]
    Orientable,
    #[error("surface is not hyperbolic (euler characteristic {0})")]
    NotHyperbolic(i64),
}

impl SurfaceSig {
    pub fn orientable(genus: u32, boundary: u32) -> Self {
        SurfaceSig { orientable: true, genus, boundary }
    }

    pub fn nonorientable(k: u32, boundary: u32) -> Self {
        SurfaceSig { orientable: false, genus: k, boundary }
    }

    pub fn euler_char(&self) -> i64 {
        euler_char(self)
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.euler_char() < 0
    }

    /// `|χ|`, saturating at zero for non-hyperbolic signatures.
    pub fn abs_chi(&self) -> u64 {
        (-self.euler_char()).max(0) as u64
    }
}

impl fmt::Display for SurfaceSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.orientable { 'O' } else { 'N' };
        write!(f, "{} {} {}", tag, self.genus, self.boundary)
    }
}

pub fn euler_char(sig: &SurfaceSig) -> i64 {
    let g = sig.genus as i64;
    let r = sig.boundary as i64;
    if sig.orientable {
        2 - 2 * g - r
    } else {
        2 - g - r
    }
}

pub fn classify_exceptional(sig: &SurfaceSig) -> Exceptionality {
    let chi = euler_char(sig);
    if chi >= 0 {
        Exceptionality::NotHyperbolic
    } else if (sig.orientable && sig.genus == 0 && sig.boundary == 3) || (!sig.orientable && chi == -1) {
        Exceptionality::Exceptional
    } else {
        Exceptionality::NonExceptional
    }
}

fn check_nonorientable_hyperbolic(sig: &SurfaceSig) -> Result<(i64, i64), SurfaceError> {
    if sig.orientable {
        return Err(SurfaceError::Orientable);
    }
    let chi = euler_char(sig);
    if chi >= 0 {
        return Err(SurfaceError::NotHyperbolic(chi));
    }
    Ok((sig.genus as i64, sig.boundary as i64))
}

/// `c(S) = 2k − 3 + r`.
pub fn max_multicurve(sig: &SurfaceSig) -> Result<i64, SurfaceError> {
    let (k, r) = check_nonorientable_hyperbolic(sig)?;
    Ok(2 * k - 3 + r)
}

/// `c⁺(S)`: `(3k − 7 + 2r)/2` for odd `k`, `(3k − 8 + 2r)/2` for even `k`.
pub fn max_two_sided_multicurve(sig: &SurfaceSig) -> Result<i64, SurfaceError> {
    let (k, r) = check_nonorientable_hyperbolic(sig)?;
    let num = if k % 2 == 1 { 3 * k - 7 + 2 * r } else { 3 * k - 8 + 2 * r };
    debug_assert!(num % 2 == 0);
    Ok(num / 2)
}
