//! One-vertex train tracks: edge taxonomy, chord predicates and the
//! seven structural conditions that rule out carried two-sided curves.

use crate::cone::{cone_rays, is_recurrent};
use crate::loops::{enumerate_loops, foliation_components, path_parity, Component, LegalLoop, Sidedness, TaggedLoop};
use crate::track::{Side, TrainTrack};
use num::ToPrimitive;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeType {
    TB,
    TT,
    BB,
}

impl fmt::Display for EdgeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeType::TB => "t-b",
            EdgeType::TT => "t-t",
            EdgeType::BB => "b-b",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairRelation {
    Crossing,
    Nested,
    Separated,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OneVertexError {
    #[error("track has {0} switches, expected one")]
    NotOneVertex(usize),
    #[error("edge {0} has the wrong type for this predicate")]
    TypeMismatch(String),
    #[error("predicate needs two distinct edges")]
    SameEdge,
    #[error("track is not recurrent")]
    NotRecurrent,
    #[error("conditions failed: {0:?}")]
    ConditionsFailed(Vec<usize>),
    #[error("ray {0} does not decompose into short one-sided components")]
    Decomposition(usize),
}

/// A track with exactly one switch, viewed as a switchboard.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchboardTrack {
    track: TrainTrack,
}

impl SwitchboardTrack {
    pub fn new(track: TrainTrack) -> Result<Self, OneVertexError> {
        if track.num_switches() != 1 {
            return Err(OneVertexError::NotOneVertex(track.num_switches()));
        }
        Ok(SwitchboardTrack { track })
    }

    pub fn track(&self) -> &TrainTrack {
        &self.track
    }

    pub fn edge_type(&self, e: usize) -> EdgeType {
        let ends = &self.track.edge(e).ends;
        match (ends[0].side, ends[1].side) {
            (Side::T, Side::T) => EdgeType::TT,
            (Side::B, Side::B) => EdgeType::BB,
            _ => EdgeType::TB,
        }
    }

    pub fn edges_of(&self, ty: EdgeType) -> Vec<usize> {
        (0..self.track.num_edges()).filter(|&e| self.edge_type(e) == ty).collect()
    }

    /// Sidedness of the curve associated to a single edge.
    pub fn edge_sidedness(&self, e: usize) -> Sidedness {
        if self.track.edge(e).parity() {
            Sidedness::OneSided
        } else {
            Sidedness::TwoSided
        }
    }

    pub fn chords(&self) -> ChordDiagram {
        ChordDiagram::new(&self.track)
    }

    fn slot_of(&self, e: usize, side: Side) -> usize {
        let ends = &self.track.edge(e).ends;
        if ends[0].side == side {
            ends[0].slot
        } else {
            ends[1].slot
        }
    }

    fn span(&self, e: usize) -> (usize, usize) {
        let ends = &self.track.edge(e).ends;
        let (a, b) = (ends[0].slot, ends[1].slot);
        (a.min(b), a.max(b))
    }
}

/// Boundary points `T.0, …, T.(p−1), B.(q−1), …, B.0` in cyclic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChordDiagram {
    pub p: usize,
    pub q: usize,
    /// Per edge, its two boundary positions in increasing order.
    pub chords: Vec<(usize, usize)>,
}

impl ChordDiagram {
    pub fn new(track: &TrainTrack) -> Self {
        let p = track.side_slots(0, Side::T).len();
        let q = track.side_slots(0, Side::B).len();
        let pos = |side: Side, slot: usize| match side {
            Side::T => slot,
            Side::B => p + q - 1 - slot,
        };
        let chords = track
            .edges()
            .iter()
            .map(|e| {
                let a = pos(e.ends[0].side, e.ends[0].slot);
                let b = pos(e.ends[1].side, e.ends[1].slot);
                (a.min(b), a.max(b))
            })
            .collect();
        ChordDiagram { p, q, chords }
    }

    pub fn links(&self, e: usize, f: usize) -> bool {
        let (a, b) = self.chords[e];
        let (c, d) = self.chords[f];
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    }
}

fn expect(sb: &SwitchboardTrack, e: usize, ty: EdgeType) -> Result<(), OneVertexError> {
    if sb.edge_type(e) != ty {
        return Err(OneVertexError::TypeMismatch(sb.track.edge(e).name.clone()));
    }
    Ok(())
}

/// Two t-b edges cross iff their chords link.
pub fn crossing_tb(sb: &SwitchboardTrack, e: usize, f: usize) -> Result<bool, OneVertexError> {
    if e == f {
        return Err(OneVertexError::SameEdge);
    }
    expect(sb, e, EdgeType::TB)?;
    expect(sb, f, EdgeType::TB)?;
    Ok(sb.chords().links(e, f))
}

/// Relation between two edges of the same one-sided type, read off their slot spans.
pub fn tt_relation(sb: &SwitchboardTrack, e: usize, f: usize) -> Result<PairRelation, OneVertexError> {
    if e == f {
        return Err(OneVertexError::SameEdge);
    }
    let ty = sb.edge_type(e);
    if ty == EdgeType::TB {
        return Err(OneVertexError::TypeMismatch(sb.track.edge(e).name.clone()));
    }
    expect(sb, f, ty)?;
    let (a, b) = sb.span(e);
    let (c, d) = sb.span(f);
    Ok(if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
        PairRelation::Crossing
    } else if (a < c && d < b) || (c < a && b < d) {
        PairRelation::Nested
    } else {
        PairRelation::Separated
    })
}

/// A t-b edge is separated from a (t-t, b-b) pair iff it sits in the same
/// gap of both: its rank among the top ends of `{e, et}` equals its rank
/// among the bottom ends of `{e, eb}`.
///
/// Equivalently, some connector matching of the pair avoids the chord of `e`.
pub fn tb_separated_from_pair(sb: &SwitchboardTrack, e: usize, et: usize, eb: usize) -> Result<bool, OneVertexError> {
    expect(sb, e, EdgeType::TB)?;
    expect(sb, et, EdgeType::TT)?;
    expect(sb, eb, EdgeType::BB)?;
    let i = sb.slot_of(e, Side::T);
    let j = sb.slot_of(e, Side::B);
    let (a, b) = sb.span(et);
    let (c, d) = sb.span(eb);
    let rt = (a < i) as usize + (b < i) as usize;
    let rb = (c < j) as usize + (d < j) as usize;
    Ok(rt == rb)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    /// Pass flags for conditions one through seven.
    pub passes: [bool; 7],
    /// `Some(true)` when t-t edges are the two-sided ones.
    pub tt_two_sided: Option<bool>,
    pub details: Vec<String>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|p| *p)
    }

    pub fn failed(&self) -> Vec<usize> {
        (0..7).filter(|&i| !self.passes[i]).map(|i| i + 1).collect()
    }
}

pub fn check_conditions(sb: &SwitchboardTrack) -> ConditionReport {
    let tb = sb.edges_of(EdgeType::TB);
    let tt = sb.edges_of(EdgeType::TT);
    let bb = sb.edges_of(EdgeType::BB);
    let name = |e: usize| sb.track.edge(e).name.clone();
    let two = |e: usize| sb.edge_sidedness(e) == Sidedness::TwoSided;
    let mut passes = [true; 7];
    let mut details = Vec::new();

    for &e in &tb {
        if two(e) {
            passes[0] = false;
            details.push(format!("1: t-b edge {} is two-sided", name(e)));
        }
    }

    let tt_two = tt.first().map(|&e| two(e)).or_else(|| bb.first().map(|&e| !two(e)));
    if let Some(x) = tt_two {
        for &e in &tt {
            if two(e) != x {
                passes[1] = false;
                details.push(format!("2: t-t edge {} has the wrong sidedness", name(e)));
            }
        }
        for &e in &bb {
            if two(e) == x {
                passes[1] = false;
                details.push(format!("2: b-b edge {} has the wrong sidedness", name(e)));
            }
        }
    }

    for (k, &e) in tb.iter().enumerate() {
        for &f in &tb[k + 1..] {
            if crossing_tb(sb, e, f).unwrap_or(false) {
                passes[2] = false;
                details.push(format!("3: t-b edges {} and {} cross", name(e), name(f)));
            }
        }
    }

    for &e in &tb {
        for &a in &tt {
            for &b in &bb {
                if !tb_separated_from_pair(sb, e, a, b).unwrap_or(true) {
                    passes[3] = false;
                    details.push(format!("4: {} is not separated from ({}, {})", name(e), name(a), name(b)));
                }
            }
        }
    }

    let x = tt_two.unwrap_or(true);
    let (want_tt, want_bb) = if x {
        (PairRelation::Crossing, PairRelation::Nested)
    } else {
        (PairRelation::Nested, PairRelation::Crossing)
    };
    for (idx, group, want) in [(4usize, &tt, want_tt), (5usize, &bb, want_bb)] {
        for (k, &e) in group.iter().enumerate() {
            for &f in &group[k + 1..] {
                let rel = tt_relation(sb, e, f).expect("same-type pair");
                if rel != want {
                    passes[idx] = false;
                    details.push(format!("{}: {} and {} are {:?}, expected {:?}", idx + 1, name(e), name(f), rel, want));
                }
            }
        }
    }

    if tt.len() >= 2 && bb.len() >= 2 {
        passes[6] = false;
        details.push("7: at least two t-t and two b-b edges".to_string());
    }

    ConditionReport { passes, tt_two_sided: tt_two, details }
}

/// Searches carried curves of multiplicity at most two for a two-sided one.
pub fn decide_two_sided(sb: &SwitchboardTrack) -> Result<Option<LegalLoop>, OneVertexError> {
    if !is_recurrent(&sb.track) {
        return Err(OneVertexError::NotRecurrent);
    }
    Ok(two_sided_witness(&sb.track, 2))
}

/// First two-sided carried curve with multiplicity at most `max_mult`, in canonical order.
pub fn two_sided_witness(track: &TrainTrack, max_mult: u64) -> Option<LegalLoop> {
    enumerate_loops(track, max_mult)
        .into_iter()
        .find(|l| l.sidedness == Sidedness::TwoSided)
        .map(|l| l.lp)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    HasTwoSided(LegalLoop),
    OneSidedMulticurvesOnly {
        components: Vec<LegalLoop>,
        /// Per extreme ray, `(component index, coefficient)` pairs summing to the ray.
        decompositions: Vec<Vec<(usize, u64)>>,
    },
}

pub fn classify_carried(sb: &SwitchboardTrack) -> Result<Classification, OneVertexError> {
    if !is_recurrent(&sb.track) {
        return Err(OneVertexError::NotRecurrent);
    }
    let report = check_conditions(sb);
    if !report.all_pass() {
        return Err(OneVertexError::ConditionsFailed(report.failed()));
    }
    let short: Vec<TaggedLoop> = enumerate_loops(&sb.track, 2).into_iter().filter(|l| l.lp.len() <= 2).collect();
    if let Some(l) = short.iter().find(|l| l.sidedness == Sidedness::TwoSided) {
        return Ok(Classification::HasTwoSided(l.lp.clone()));
    }
    let components: Vec<LegalLoop> = short.into_iter().map(|l| l.lp).collect();
    let n = sb.track.num_edges();
    let mut decompositions = Vec::new();
    for (ri, ray) in cone_rays(&sb.track).iter().enumerate() {
        let w: Vec<u64> = ray.iter().map(|x| x.to_u64().expect("small ray")).collect();
        let mut parts: Vec<(usize, u64)> = Vec::new();
        let mut sum = vec![0u64; n];
        for c in foliation_components(&sb.track, &w) {
            let (l, k) = match c {
                Component::Curve(l) => (l, 1),
                Component::MobiusBoundary(r) => (r, 2),
            };
            if path_parity(&sb.track, &l.steps) {
                let c = l.canonical();
                let Some(idx) = components.iter().position(|x| *x == c) else {
                    return Err(OneVertexError::Decomposition(ri));
                };
                for (s, m) in sum.iter_mut().zip(c.multiplicity(n)) {
                    *s += k * m;
                }
                match parts.iter_mut().find(|(i, _)| *i == idx) {
                    Some(p) => p.1 += k,
                    None => parts.push((idx, k)),
                }
            } else {
                return Ok(Classification::HasTwoSided(l.canonical()));
            }
        }
        if sum != w {
            return Err(OneVertexError::Decomposition(ri));
        }
        parts.sort();
        decompositions.push(parts);
    }
    Ok(Classification::OneSidedMulticurvesOnly { components, decompositions })
}

/// All one-switch tracks with `n` edges: every perfect matching of the
/// `2n` slots, every split into `T` and `B` slots with both sides
/// nonempty, and every twist assignment. Lengths are 1.
pub fn all_one_vertex_tracks(n: usize) -> Vec<TrainTrack> {
    use crate::rat::int;
    use crate::track::{Edge, End};
    fn matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let first = items[0];
        let mut out = Vec::new();
        for k in 1..items.len() {
            let rest: Vec<usize> = items[1..].iter().enumerate().filter(|(i, _)| *i + 1 != k).map(|(_, x)| *x).collect();
            for mut m in matchings(&rest) {
                m.insert(0, (first, items[k]));
                out.push(m);
            }
        }
        out
    }
    let total = 2 * n;
    let all: Vec<usize> = (0..total).collect();
    let ms = matchings(&all);
    let mut out = Vec::new();
    for p in 1..total {
        let end_of = |x: usize| if x < p { End::new(0, Side::T, x) } else { End::new(0, Side::B, x - p) };
        for m in &ms {
            for mask in 0..(1u32 << n) {
                let edges = m
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b))| Edge {
                        name: format!("e{}", i),
                        ends: [end_of(a), end_of(b)],
                        twist: mask >> i & 1 == 1,
                        length: int(1),
                    })
                    .collect();
                out.push(TrainTrack::new(vec!["v".to_string()], edges, None).expect("well-formed"));
            }
        }
    }
    out
}

/// One representative of each class of [`all_one_vertex_tracks`] under
/// reversing the order of both sides and exchanging the sides. Both maps are
/// mirror symmetries of the switch, so they preserve twists and validity.
pub fn one_vertex_representatives(n: usize) -> Vec<TrainTrack> {
    all_one_vertex_tracks(n).into_iter().filter(|t| is_representative(t)).collect()
}

/// Position of an end on the switch: `T` slots first, then `B` slots.
fn pos(t: &TrainTrack, side: Side, slot: usize) -> usize {
    match side {
        Side::T => slot,
        Side::B => t.side_slots(0, Side::T).len() + slot,
    }
}

/// `(top count, partner and twist per position)` after mapping positions with `f`.
fn one_vertex_key(t: &TrainTrack, p: usize, f: impl Fn(usize) -> usize) -> (usize, Vec<(usize, bool)>) {
    let mut key = vec![(0, false); 2 * t.num_edges()];
    for e in t.edges() {
        let a = f(pos(t, e.ends[0].side, e.ends[0].slot));
        let b = f(pos(t, e.ends[1].side, e.ends[1].slot));
        key[a] = (b, e.twist);
        key[b] = (a, e.twist);
    }
    (p, key)
}

fn is_representative(t: &TrainTrack) -> bool {
    let total = 2 * t.num_edges();
    let p = t.side_slots(0, Side::T).len();
    let q = total - p;
    let rev = |x: usize| if x < p { p - 1 - x } else { p + (q - 1 - (x - p)) };
    let swap = |x: usize| if x < p { q + x } else { x - p };
    let own = one_vertex_key(t, p, |x| x);
    [one_vertex_key(t, p, rev), one_vertex_key(t, q, swap), one_vertex_key(t, q, |x| swap(rev(x)))].iter().all(|k| own <= *k)
}
