//! Switch equations and the weight cone.
//!
//! Extreme rays are computed by the double-description method, starting
//! from the nonnegative orthant and cutting by one switch equation at a
//! time. Adjacency of rays is decided combinatorially on zero sets, which
//! is exact because every intermediate cone is pointed.

use crate::rat::{primitive_integer, zero, Rat};
use crate::track::{Side, TrainTrack};
use num::bigint::BigInt;
use num::{Signed, Zero};
use std::collections::BTreeSet;

/// One row per switch: ends on `T` minus ends on `B`.
pub fn switch_matrix(track: &TrainTrack) -> Vec<Vec<i64>> {
    let mut m = vec![vec![0i64; track.num_edges()]; track.num_switches()];
    for (i, e) in track.edges().iter().enumerate() {
        for end in &e.ends {
            m[end.switch][i] += match end.side {
                Side::T => 1,
                Side::B => -1,
            };
        }
    }
    m
}

pub fn satisfies_switch_equations(track: &TrainTrack, w: &[Rat]) -> bool {
    if w.len() != track.num_edges() || w.iter().any(|x| x.is_negative()) {
        return false;
    }
    switch_matrix(track).iter().all(|row| {
        row.iter()
            .zip(w)
            .fold(zero(), |acc, (a, x)| acc + Rat::from_integer(BigInt::from(*a)) * x)
            .is_zero()
    })
}

fn dot(row: &[i64], v: &[BigInt]) -> BigInt {
    row.iter().zip(v).map(|(a, x)| BigInt::from(*a) * x).sum()
}

fn zero_set(v: &[BigInt]) -> Vec<bool> {
    v.iter().map(|x| x.is_zero()).collect()
}

fn normalize(v: Vec<BigInt>) -> Vec<BigInt> {
    crate::rat::gcd_normalize(&v)
}

/// Extreme rays of `{w ≥ 0 : A w = 0}` as primitive integer vectors, in decreasing lexicographic order.
pub fn extreme_rays_of(rows: &[Vec<i64>], n: usize) -> Vec<Vec<BigInt>> {
    let mut rays: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as i64)).collect())
        .collect();
    for row in rows {
        if row.iter().all(|a| *a == 0) {
            continue;
        }
        let vals: Vec<BigInt> = rays.iter().map(|r| dot(row, r)).collect();
        let zs: Vec<Vec<bool>> = rays.iter().map(|r| zero_set(r)).collect();
        let mut next: Vec<Vec<BigInt>> = Vec::new();
        for (i, r) in rays.iter().enumerate() {
            if vals[i].is_zero() {
                next.push(r.clone());
            }
        }
        for p in 0..rays.len() {
            if !vals[p].is_positive() {
                continue;
            }
            for q in 0..rays.len() {
                if !vals[q].is_negative() {
                    continue;
                }
                let common: Vec<bool> = zs[p].iter().zip(&zs[q]).map(|(a, b)| *a && *b).collect();
                let blocked = (0..rays.len()).any(|t| {
                    t != p && t != q && common.iter().zip(&zs[t]).all(|(c, z)| !*c || *z)
                });
                if blocked {
                    continue;
                }
                let a = vals[p].clone();
                let b = -vals[q].clone();
                let v: Vec<BigInt> = rays[p].iter().zip(&rays[q]).map(|(x, y)| &b * x + &a * y).collect();
                next.push(normalize(v));
            }
        }
        let set: BTreeSet<Vec<BigInt>> = next.into_iter().collect();
        rays = set.into_iter().collect();
    }
    rays.sort_by(|a, b| b.cmp(a));
    rays
}

pub fn cone_rays(track: &TrainTrack) -> Vec<Vec<BigInt>> {
    extreme_rays_of(&switch_matrix(track), track.num_edges())
}

pub fn rays_as_rat(rays: &[Vec<BigInt>]) -> Vec<Vec<Rat>> {
    rays.iter().map(|r| r.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect()
}

/// The cone contains a strictly positive vector iff the sum of its rays is positive.
pub fn is_recurrent(track: &TrainTrack) -> bool {
    let rays = cone_rays(track);
    if track.num_edges() == 0 {
        return false;
    }
    (0..track.num_edges()).all(|i| rays.iter().any(|r| r[i].is_positive()))
}

/// A strictly positive weight vector (the ray sum), if one exists.
pub fn positive_weight(track: &TrainTrack) -> Option<Vec<Rat>> {
    let rays = cone_rays(track);
    let n = track.num_edges();
    let mut s = vec![BigInt::zero(); n];
    for r in &rays {
        for i in 0..n {
            s[i] += &r[i];
        }
    }
    if n == 0 || s.iter().any(|x| !x.is_positive()) {
        return None;
    }
    Some(s.into_iter().map(Rat::from_integer).collect())
}

/// Primitive integer vector on the ray of a rational weight.
pub fn primitive(w: &[Rat]) -> Vec<BigInt> {
    primitive_integer(w)
}
