//! Exact linear programming and the sub-cone projection.
//!
//! A dense two-phase simplex over rationals with Bland's rule. Instances
//! here have at most a few dozen variables, so a tableau is adequate.

use crate::cone::switch_matrix;
use crate::rat::{int, one, zero, Rat};
use crate::track::TrainTrack;
use num::{Signed, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rat>, value: Rat },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            *x = &*x / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for j in 0..self.rows[i].len() {
                let d = &f * &self.rows[r][j];
                self.rows[i][j] -= d;
            }
            let d = &f * &self.rhs[r];
            self.rhs[i] -= d;
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost · x` over the columns allowed by `active`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rat], active: &[bool]) -> bool {
        loop {
            let reduced = |j: usize, t: &Tableau| -> Rat {
                let mut r = cost[j].clone();
                for (i, &b) in t.basis.iter().enumerate() {
                    r -= &cost[b] * &t.rows[i][j];
                }
                r
            };
            let entering = (0..cost.len()).find(|&j| active[j] && !self.basis.contains(&j) && reduced(j, self).is_negative());
            let Some(c) = entering else { return true };
            let mut best: Option<(Rat, usize)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.rows[i][c];
                    let better = match &best {
                        None => true,
                        Some((r, bi)) => ratio < *r || (ratio == *r && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r)) => self.pivot(r, c),
            }
        }
    }
}

/// Minimizes `c · x` subject to `A x = b`, `x ≥ 0`.
pub fn minimize(a: &[Vec<Rat>], b: &[Rat], c: &[Rat]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    for i in 0..m {
        let flip = b[i].is_negative();
        let mut row: Vec<Rat> = a[i].iter().map(|x| if flip { -x.clone() } else { x.clone() }).collect();
        for k in 0..m {
            row.push(if k == i { one() } else { zero() });
        }
        rows.push(row);
        rhs.push(if flip { -b[i].clone() } else { b[i].clone() });
    }
    let mut t = Tableau { rows, rhs, basis: (n..n + m).collect() };
    let mut phase1 = vec![zero(); n + m];
    for x in phase1.iter_mut().skip(n) {
        *x = one();
    }
    let all = vec![true; n + m];
    t.optimize(&phase1, &all);
    let infeas: Rat = t.basis.iter().zip(&t.rhs).filter(|(b, _)| **b >= n).map(|(_, v)| v.clone()).sum();
    if infeas.is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive remaining artificial variables out of the basis.
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }
    let mut cost = c.to_vec();
    cost.extend(std::iter::repeat(zero()).take(m));
    let mut active = vec![true; n];
    active.extend(std::iter::repeat(false).take(m));
    if !t.optimize(&cost, &active) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![zero(); n];
    for (i, &bcol) in t.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = t.rhs[i].clone();
        }
    }
    let value = x.iter().zip(c).map(|(a, b)| a * b).sum();
    LpOutcome::Optimal { x, value }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error("sub-cone of vectors vanishing on light edges is trivial")]
    SubconeTrivial,
    #[error("weight vector has wrong length or fails the switch equations")]
    BadWeight,
    #[error("weight vector does not have combinatorial length 1")]
    NotUnitLength,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Projection {
    pub nu: Vec<Rat>,
    pub delta: Rat,
    /// Edges forced to zero.
    pub light: Vec<usize>,
}

/// Closest unit-length vector of the sub-cone vanishing on edges with `ℓ(e)·w(e) < eps`,
/// in the max-norm weighted by `ℓ`.
pub fn restrict_renormalize(track: &TrainTrack, w: &[Rat], eps: &Rat) -> Result<Projection, ProjectionError> {
    let n = track.num_edges();
    if !crate::cone::satisfies_switch_equations(track, w) {
        return Err(ProjectionError::BadWeight);
    }
    let lens: Vec<Rat> = track.edges().iter().map(|e| e.length.clone()).collect();
    let total: Rat = lens.iter().zip(w).map(|(l, x)| l * x).sum();
    if total != one() {
        return Err(ProjectionError::NotUnitLength);
    }
    let light: Vec<usize> = (0..n).filter(|&i| &lens[i] * &w[i] < *eps).collect();
    let heavy: Vec<usize> = (0..n).filter(|i| !light.contains(i)).collect();
    if heavy.is_empty() {
        return Err(ProjectionError::SubconeTrivial);
    }
    // Variables: ν on heavy edges, δ, then one slack per inequality.
    let h = heavy.len();
    let d = h;
    let n_ineq = 2 * h + light.len();
    let nv = h + 1 + n_ineq;
    let mut a: Vec<Vec<Rat>> = Vec::new();
    let mut b: Vec<Rat> = Vec::new();
    for row in switch_matrix(track) {
        let r: Vec<Rat> = (0..nv).map(|j| if j < h { int(row[heavy[j]]) } else { zero() }).collect();
        if r.iter().any(|x| !x.is_zero()) {
            a.push(r);
            b.push(zero());
        }
    }
    let mut r = vec![zero(); nv];
    for j in 0..h {
        r[j] = lens[heavy[j]].clone();
    }
    a.push(r);
    b.push(one());
    let mut slack = h + 1;
    for j in 0..h {
        let e = heavy[j];
        let lw = &lens[e] * &w[e];
        // ℓν + δ − s = ℓw
        let mut r = vec![zero(); nv];
        r[j] = lens[e].clone();
        r[d] = one();
        r[slack] = int(-1);
        slack += 1;
        a.push(r);
        b.push(lw.clone());
        // ℓν − δ + s = ℓw
        let mut r = vec![zero(); nv];
        r[j] = lens[e].clone();
        r[d] = int(-1);
        r[slack] = one();
        slack += 1;
        a.push(r);
        b.push(lw);
    }
    for &e in &light {
        // δ − s = ℓw
        let mut r = vec![zero(); nv];
        r[d] = one();
        r[slack] = int(-1);
        slack += 1;
        a.push(r);
        b.push(&lens[e] * &w[e]);
    }
    let mut c = vec![zero(); nv];
    c[d] = one();
    match minimize(&a, &b, &c) {
        LpOutcome::Optimal { x, value } => {
            let mut nu = vec![zero(); n];
            for j in 0..h {
                nu[heavy[j]] = x[j].clone();
            }
            Ok(Projection { nu, delta: value, light })
        }
        _ => Err(ProjectionError::SubconeTrivial),
    }
}
