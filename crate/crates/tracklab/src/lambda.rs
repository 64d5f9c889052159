//! Lambda-structures: a filling weight vector read as a measured foliation
//! of the band complex.
//!
//! At a switch of total weight `W`, both sides are laid out on `[0, W)`
//! with one interval per slot, of width equal to the weight of the edge
//! attached there. Leaves cross the switch vertically, so the turn mass
//! between a `B` slot and a `T` slot is the length of the overlap of their
//! intervals. Everything below is derived from this picture.

use crate::cone::satisfies_switch_equations;
use crate::rat::{int, zero, Rat};
use crate::track::{validate, Side, TrainTrack};
use crate::loops::{for_each_component, Component};
use num::{Integer, Signed, Zero};
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaStructure {
    track: TrainTrack,
    weights: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LambdaError {
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("edge {0} has non-positive weight")]
    NotFilling(String),
    #[error("weights violate the switch equation at {0}")]
    SwitchEquation(String),
    #[error("edge {0} carries a closed leaf")]
    ClosedLeaf(String),
    #[error("track fails validation: {0}")]
    Invalid(String),
    #[error("turn data disagrees with the weights: {0}")]
    TurnMismatch(String),
    #[error("loopy data disagrees with the weights: {0}")]
    LoopyMismatch(String),
}

/// Winding data of a loopy edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Winding {
    /// Position of the `T` end minus position of the `B` end.
    pub shift: Rat,
    pub w: u64,
    pub mw: Rat,
    pub mw1: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    NonLoopy,
    FakeLoopy,
    Loopy(Winding),
    /// Both ends at one switch on opposite sides and every leaf through it is closed.
    ClosedLeaf,
}

impl EdgeKind {
    pub fn is_loopy(&self) -> bool {
        matches!(self, EdgeKind::Loopy(_))
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::NonLoopy => f.write_str("non-loopy"),
            EdgeKind::FakeLoopy => f.write_str("fake-loopy"),
            EdgeKind::Loopy(w) => write!(f, "loopy(w={})", w.w),
            EdgeKind::ClosedLeaf => f.write_str("closed-leaf"),
        }
    }
}

/// A turn between a `B` end and a `T` end of one switch.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Turn {
    pub switch: usize,
    /// `(edge, end)` on side `B`.
    pub inbound: (usize, usize),
    /// `(edge, end)` on side `T`.
    pub outbound: (usize, usize),
    pub mass: Rat,
}

pub(crate) fn overlap(a: &(Rat, Rat), b: &(Rat, Rat)) -> Rat {
    let lo = if a.0 > b.0 { &a.0 } else { &b.0 };
    let hi = if a.1 < b.1 { &a.1 } else { &b.1 };
    if hi > lo {
        hi - lo
    } else {
        zero()
    }
}

/// Winding data for an untwisted band from `T` interval `[a, a+ω)` back to `B` interval `[b, b+ω)`.
///
/// A leaf entering at `T` position `x` leaves the band at `x − d` on `B`
/// and continues at `x − d` on `T`; with `q = ω/|d|`, fresh leaves take
/// the self-turn `⌈q⌉ − 1` or `⌈q⌉ − 2` times.
pub fn winding_from_shift(omega: &Rat, d: &Rat) -> Option<Winding> {
    let ad = d.abs();
    if ad.is_zero() || ad >= *omega {
        return None;
    }
    let q = omega / &ad;
    let kmax = q.ceil().to_integer() - 1u32;
    let kmax: u64 = kmax.try_into().expect("winding fits in u64");
    let (mw, mw1) = if q.is_integer() {
        (zero(), ad.clone())
    } else {
        let f = q.floor();
        ((&f - &q + int(1)) * &ad, (&q - &f) * &ad)
    };
    Some(Winding { shift: d.clone(), w: kmax - 1, mw, mw1 })
}

/// Kind of a band whose ends sit on opposite sides of one switch, given
/// its `T` and `B` intervals.
pub fn classify_band(twist: bool, i: &(Rat, Rat), j: &(Rat, Rat), weight: &Rat) -> EdgeKind {
    if overlap(i, j).is_zero() {
        return EdgeKind::FakeLoopy;
    }
    if twist {
        return EdgeKind::ClosedLeaf;
    }
    match winding_from_shift(weight, &(&i.0 - &j.0)) {
        Some(w) => EdgeKind::Loopy(w),
        None => EdgeKind::ClosedLeaf,
    }
}

/// `ℓ^λ` of an edge of the given kind and length.
pub fn lambda_length_of(kind: &EdgeKind, twist: bool, length: &Rat) -> Rat {
    match kind {
        EdgeKind::NonLoopy | EdgeKind::FakeLoopy => length.clone(),
        EdgeKind::Loopy(w) => length * int(w.w as i64 + 2),
        EdgeKind::ClosedLeaf if twist => length * int(2),
        EdgeKind::ClosedLeaf => length.clone(),
    }
}

impl LambdaStructure {
    /// Checks the weights and rejects edges carrying closed leaves.
    pub fn new(track: TrainTrack, weights: Vec<Rat>) -> Result<Self, LambdaError> {
        let ls = Self::new_unchecked(track, weights)?;
        for e in 0..ls.track.num_edges() {
            if ls.edge_kind(e) == EdgeKind::ClosedLeaf {
                return Err(LambdaError::ClosedLeaf(ls.track.edge(e).name.clone()));
            }
        }
        Ok(ls)
    }

    /// Like `new` but allows closed-leaf edges, which moves may produce.
    pub fn new_unchecked(track: TrainTrack, weights: Vec<Rat>) -> Result<Self, LambdaError> {
        if weights.len() != track.num_edges() {
            return Err(LambdaError::WeightCount { expected: track.num_edges(), got: weights.len() });
        }
        for (e, w) in weights.iter().enumerate() {
            if !w.is_positive() {
                return Err(LambdaError::NotFilling(track.edge(e).name.clone()));
            }
        }
        if !satisfies_switch_equations(&track, &weights) {
            let s = crate::cone::switch_matrix(&track)
                .iter()
                .position(|row| row.iter().zip(&weights).map(|(a, w)| int(*a) * w).sum::<Rat>() != zero())
                .unwrap_or(0);
            return Err(LambdaError::SwitchEquation(track.switch_name(s).to_string()));
        }
        let report = validate(&track, false);
        if !report.degenerate.is_empty() {
            return Err(LambdaError::Invalid(report.errors.join("; ")));
        }
        Ok(LambdaStructure { track, weights })
    }

    pub fn track(&self) -> &TrainTrack {
        &self.track
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn weight(&self, e: usize) -> &Rat {
        &self.weights[e]
    }

    pub fn switch_width(&self, s: usize) -> Rat {
        self.track.side_slots(s, Side::T).iter().map(|&(e, _)| self.weights[e].clone()).sum()
    }

    /// Intervals of the slots on one side, left to right.
    pub fn intervals(&self, s: usize, side: Side) -> Vec<(Rat, Rat)> {
        let mut acc = zero();
        let mut out = Vec::new();
        for &(e, _) in self.track.side_slots(s, side) {
            let next = &acc + &self.weights[e];
            out.push((acc.clone(), next.clone()));
            acc = next;
        }
        out
    }

    /// Interval occupied by one end of an edge at its switch.
    pub fn end_interval(&self, e: usize, k: usize) -> (Rat, Rat) {
        let end = self.track.edge(e).ends[k];
        self.intervals(end.switch, end.side)[end.slot].clone()
    }

    pub fn edge_kind(&self, e: usize) -> EdgeKind {
        let edge = self.track.edge(e);
        let [a, b] = edge.ends;
        if a.switch != b.switch || a.side == b.side {
            return EdgeKind::NonLoopy;
        }
        let (tk, bk) = if a.side == Side::T { (0, 1) } else { (1, 0) };
        classify_band(edge.twist, &self.end_interval(e, tk), &self.end_interval(e, bk), &self.weights[e])
    }

    /// Length of the longest strand image in the edge.
    pub fn edge_lambda_length(&self, e: usize) -> Rat {
        let edge = self.track.edge(e);
        lambda_length_of(&self.edge_kind(e), edge.twist, &edge.length)
    }

    pub fn lambda_lengths(&self) -> LambdaLengths {
        LambdaLengths::new((0..self.track.num_edges()).map(|e| self.edge_lambda_length(e)).collect())
    }

    /// Positive-mass turns, grouped by switch.
    pub fn turns(&self) -> Vec<Turn> {
        let mut out = Vec::new();
        for s in 0..self.track.num_switches() {
            let ti = self.intervals(s, Side::T);
            let bi = self.intervals(s, Side::B);
            for (j, bint) in bi.iter().enumerate() {
                for (i, tint) in ti.iter().enumerate() {
                    let m = overlap(bint, tint);
                    if m.is_positive() {
                        out.push(Turn {
                            switch: s,
                            inbound: self.track.side_slots(s, Side::B)[j],
                            outbound: self.track.side_slots(s, Side::T)[i],
                            mass: m,
                        });
                    }
                }
            }
        }
        out
    }

    /// Legal turns: `(inbound, outbound)` pairs at a switch with positive mass.
    pub fn children(&self, e: usize, k: usize) -> Vec<(usize, usize)> {
        self.turns()
            .into_iter()
            .filter_map(|t| {
                if t.inbound == (e, k) {
                    Some(t.outbound)
                } else if t.outbound == (e, k) {
                    Some(t.inbound)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn total_mass(&self) -> Rat {
        self.turns().iter().map(|t| t.mass.clone()).sum()
    }
}

impl LambdaStructure {
    /// Length of the shortest closed leaf of the foliation, which is a
    /// multicurve because the weights are rational. `None` if the scaled
    /// integer weights exceed `max_strands` in total.
    ///
    /// After scaling to integers each unit band of strands runs around one
    /// cycle; a leaf in it is at least as long as that cycle, except that a
    /// band running twice around a one-sided loop bounds a Mobius band whose
    /// core leaf is half as long.
    pub fn shortest_leaf(&self, max_strands: u64) -> Option<Rat> {
        self.leaf_lengths(max_strands, None)
    }

    /// Whether every leaf is longer than `bound`. Stops at the first short
    /// leaf. `None` when the integer foliation exceeds `max_strands`.
    pub fn leaves_longer_than(&self, bound: &Rat, max_strands: u64) -> Option<bool> {
        self.leaf_lengths(max_strands, Some(bound)).map(|m| m > *bound)
    }

    fn leaf_lengths(&self, max_strands: u64, stop_at: Option<&Rat>) -> Option<Rat> {
        let scale = self.weights.iter().fold(num::BigInt::from(1), |acc, w| acc.lcm(w.denom()));
        let mut iw = Vec::with_capacity(self.weights.len());
        let mut total: u64 = 0;
        for w in &self.weights {
            let x: u64 = (w * Rat::from_integer(scale.clone())).to_integer().try_into().ok()?;
            total = total.checked_add(x)?;
            iw.push(x);
        }
        if total > max_strands {
            return None;
        }
        // Edge lengths as integers over a common denominator.
        let t = &self.track;
        let den = t.edges().iter().fold(num::BigInt::from(1), |acc, e| acc.lcm(e.length.denom()));
        let mut il = Vec::with_capacity(t.num_edges());
        for e in t.edges() {
            let x: u64 = (&e.length * Rat::from_integer(den.clone())).to_integer().try_into().ok()?;
            il.push(x);
        }
        let stop: Option<u128> = stop_at.map(|b| {
            let x = (b * Rat::from_integer(den.clone())).floor().to_integer();
            x.try_into().unwrap_or(u128::MAX)
        });
        let mut best: Option<u128> = None;
        for_each_component(t, &iw, |c| {
            let steps = match &c {
                Component::Curve(l) => &l.steps,
                Component::MobiusBoundary(root) => &root.steps,
            };
            let len: u128 = steps.iter().map(|st| il[st.edge] as u128).sum();
            best = Some(best.map_or(len, |b| b.min(len)));
            stop.is_none_or(|s| len > s)
        });
        best.map(|b| Rat::new(num::BigInt::from(b), den))
    }
}

/// Checks turn marginals and loopy bookkeeping. Returns the first discrepancy.
pub fn check_marginals(ls: &LambdaStructure) -> Result<(), String> {
    let turns = ls.turns();
    let n = ls.track().num_edges();
    let mut through = vec![[zero(), zero()]; n];
    for t in &turns {
        through[t.inbound.0][t.inbound.1] += &t.mass;
        through[t.outbound.0][t.outbound.1] += &t.mass;
    }
    for e in 0..n {
        for k in 0..2 {
            if through[e][k] != *ls.weight(e) {
                return Err(format!("end {}.{} carries {} but weight is {}", ls.track().edge(e).name, k, through[e][k], ls.weight(e)));
            }
        }
        if let EdgeKind::Loopy(wd) = ls.edge_kind(e) {
            let w = int(wd.w as i64);
            let total = &wd.mw * (&w + int(1)) + &wd.mw1 * (&w + int(2));
            if total != *ls.weight(e) {
                return Err(format!("loopy edge {} traversal mass {} != weight", ls.track().edge(e).name, total));
            }
            let (tk, bk) = if ls.track().edge(e).ends[0].side == Side::T { (0, 1) } else { (1, 0) };
            let self_turn: Rat = turns
                .iter()
                .filter(|t| t.inbound == (e, bk) && t.outbound == (e, tk))
                .map(|t| t.mass.clone())
                .sum();
            let expected = &wd.mw * &w + &wd.mw1 * (&w + int(1));
            if self_turn != expected {
                return Err(format!("loopy edge {} self-turn mass {} != {}", ls.track().edge(e).name, self_turn, expected));
            }
            if !wd.mw1.is_positive() {
                return Err(format!("loopy edge {} has m_(w+1) = 0", ls.track().edge(e).name));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaLengths {
    pub per_edge: Vec<Rat>,
    pub total: Rat,
    pub min: Rat,
}

impl LambdaLengths {
    pub fn new(per_edge: Vec<Rat>) -> Self {
        let total = per_edge.iter().cloned().sum();
        let min = per_edge.iter().min().cloned().unwrap_or_else(zero);
        LambdaLengths { per_edge, total, min }
    }

    /// `ℓ^λ / m^λ`.
    pub fn ratio(&self) -> Rat {
        if self.min.is_zero() {
            return zero();
        }
        &self.total / &self.min
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;
    use crate::track::build;
    use crate::track::Side::{B, T};

    /// Loopy edge `e` at one switch next to a straight edge `a`; `e` sits
    /// at `T` slot 1 and `B` slot 0, so its `T` interval is shifted right
    /// by `w(a)`.
    fn loopy(wa: Rat, we: Rat, len: Rat) -> LambdaStructure {
        let t = build(&["v"], &[("a", (0, T, 0), (0, B, 1), true, int(1)), ("e", (0, T, 1), (0, B, 0), false, len)], None).unwrap();
        LambdaStructure::new(t, vec![wa, we]).unwrap()
    }

    #[test]
    fn non_loopy_length() {
        let t = build(&["u", "v"], &[("a", (0, T, 0), (1, B, 0), false, int(3)), ("b", (1, T, 0), (0, B, 0), false, int(1))], None).unwrap();
        let ls = LambdaStructure::new(t, vec![int(1), int(1)]).unwrap();
        assert_eq!(ls.edge_lambda_length(0), int(3));
    }

    #[test]
    fn loopy_lengths() {
        // ω = 3/2, d = 1: q = 3/2, the turn is taken once or not at all: w = 0.
        let ls = loopy(int(1), frac(3, 2), int(1));
        let EdgeKind::Loopy(w) = ls.edge_kind(1) else { panic!() };
        assert_eq!(w.w, 0);
        assert_eq!(ls.edge_lambda_length(1), int(2));
        // ω = 5/2, d = 1: q = 5/2, turns taken once or twice: w = 1.
        let ls = loopy(int(1), frac(5, 2), int(2));
        let EdgeKind::Loopy(w) = ls.edge_kind(1) else { panic!() };
        assert_eq!(w.w, 1);
        assert_eq!(ls.edge_lambda_length(1), int(6));
        check_marginals(&ls).unwrap();
    }

    #[test]
    fn integer_ratio_winding() {
        let w = winding_from_shift(&int(3), &int(1)).unwrap();
        assert_eq!((w.w, w.mw.clone(), w.mw1.clone()), (1, zero(), int(1)));
        let w = winding_from_shift(&frac(7, 2), &int(-1)).unwrap();
        assert_eq!(w.w, 2);
        assert_eq!(&w.mw * int(3) + &w.mw1 * int(4), frac(7, 2));
    }

    #[test]
    fn fake_and_closed() {
        let ls = loopy(int(1), int(1), int(1));
        assert_eq!(ls.edge_kind(1), EdgeKind::FakeLoopy);
        let t = build(&["v"], &[("e", (0, T, 0), (0, B, 0), false, int(1))], None).unwrap();
        assert!(matches!(LambdaStructure::new(t, vec![int(1)]), Err(LambdaError::ClosedLeaf(_))));
    }

    #[test]
    fn rejects_bad_weights() {
        let t = build(&["v"], &[("a", (0, T, 0), (0, B, 1), true, int(1)), ("e", (0, T, 1), (0, B, 0), false, int(1))], None).unwrap();
        assert!(matches!(LambdaStructure::new(t.clone(), vec![int(1)]), Err(LambdaError::WeightCount { .. })));
        assert!(matches!(LambdaStructure::new(t, vec![int(0), int(1)]), Err(LambdaError::NotFilling(_))));
    }

    #[test]
    fn marginals_hold() {
        let ls = loopy(frac(1, 3), frac(7, 5), int(1));
        check_marginals(&ls).unwrap();
        assert_eq!(ls.total_mass(), ls.switch_width(0));
    }
}
