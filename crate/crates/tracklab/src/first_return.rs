//! One-vertex refinement from the first-return map to a transversal.
//!
//! The transversal `I` is the cross-section at the midpoint of an edge `e*`,
//! measured in the coordinates of `e*` at end 0. It becomes the single switch:
//! its `T` side faces end 1 of `e*` and its `B` side faces end 0. Every leaf
//! segment between consecutive visits to `I` follows an itinerary of edges;
//! segments with one itinerary form a band, and each band becomes an edge.

use crate::lambda::{LambdaError, LambdaStructure};
use crate::loops::Step;
use crate::one_vertex::{OneVertexError, SwitchboardTrack};
use crate::rat::{int, zero, Rat};
use crate::track::{End, Side, TrackError, TrainTrack};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FirstReturnError {
    #[error("edge {0} does not maximise length times weight")]
    NotMaximal(String),
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
    #[error("leaves on edge {0} never cross the transversal")]
    Uncovered(String),
    #[error("first return needs more than {0} bands")]
    TooManyBands(usize),
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Lambda(#[from] LambdaError),
    #[error(transparent)]
    OneVertex(#[from] OneVertexError),
}

/// Result of [`first_return`]. Edge `i` of the new track follows
/// `itineraries[i]`, which starts and ends with the halves of `e*`.
#[derive(Clone, Debug)]
pub struct FirstReturn {
    pub transversal_edge: usize,
    pub switchboard: SwitchboardTrack,
    pub structure: LambdaStructure,
    pub itineraries: Vec<Vec<Step>>,
}

impl FirstReturn {
    /// Weight each old edge receives back from the bands. The two halves of
    /// `e*` count once per band.
    pub fn pushforward(&self, old_edges: usize) -> Vec<Rat> {
        let mut out = vec![zero(); old_edges];
        for (b, steps) in self.itineraries.iter().enumerate() {
            let w = self.structure.weight(b);
            for st in &steps[1..steps.len() - 1] {
                out[st.edge] += w;
            }
            if steps.len() > 1 {
                out[steps[0].edge] += w;
            }
        }
        out
    }
}

/// The edge with the largest `ℓ(e) w(e)`, least index on ties.
pub fn transversal_edge(ls: &LambdaStructure) -> usize {
    let t = ls.track();
    let score = |e: usize| &t.edge(e).length * ls.weight(e);
    (0..t.num_edges()).fold(0, |best, e| if score(e) > score(best) { e } else { best })
}

/// Bands are found by following whole subintervals; this caps their number.
pub const MAX_BANDS: usize = 100_000;

/// A subinterval `[x0, x1)` of `I` currently on `edge`, occupying
/// `[lo, lo + x1 - x0)` in the end-0 coordinates of that edge. `increasing`
/// says whether `x0` sits at `lo`.
#[derive(Clone)]
struct Piece {
    x0: Rat,
    x1: Rat,
    lo: Rat,
    increasing: bool,
    forward: bool,
    steps: Vec<Step>,
}

struct Band {
    depart: (Side, Rat, Rat),
    arrive: (Side, Rat, Rat),
    reversed: bool,
    steps: Vec<Step>,
}

/// Refines `ls` to a one-vertex track through the first return to the
/// midpoint of `edge`, which must maximise `ℓ(e) w(e)`. A one-vertex input is
/// returned unchanged.
pub fn first_return(ls: &LambdaStructure, edge: usize) -> Result<FirstReturn, FirstReturnError> {
    let t = ls.track();
    if edge >= t.num_edges() {
        return Err(FirstReturnError::UnknownEdge(edge));
    }
    let score = |e: usize| &t.edge(e).length * ls.weight(e);
    if (0..t.num_edges()).any(|e| score(e) > score(edge)) {
        return Err(FirstReturnError::NotMaximal(t.edge(edge).name.clone()));
    }
    if t.num_switches() == 1 {
        return Ok(FirstReturn {
            transversal_edge: edge,
            switchboard: SwitchboardTrack::new(t.clone())?,
            structure: ls.clone(),
            itineraries: (0..t.num_edges()).map(|e| vec![Step { edge: e, forward: true }]).collect(),
        });
    }
    let bands = trace_bands(ls, edge)?;
    build(ls, edge, bands)
}

fn trace_bands(ls: &LambdaStructure, star: usize) -> Result<Vec<Band>, FirstReturnError> {
    let t = ls.track();
    let width = ls.weight(star).clone();
    let mut bands = Vec::new();
    // Departures towards end 1 leave from `T`, towards end 0 from `B`.
    for (side, forward) in [(Side::T, true), (Side::B, false)] {
        let mut stack = vec![Piece {
            x0: zero(),
            x1: width.clone(),
            lo: zero(),
            increasing: true,
            forward,
            steps: vec![Step { edge: star, forward }],
        }];
        while let Some(p) = stack.pop() {
            let e = p.steps.last().expect("nonempty").edge;
            let edge = t.edge(e);
            let w = ls.weight(e);
            let len = &p.x1 - &p.x0;
            let k = usize::from(p.forward);
            // Offsets at the exit end.
            let (mut olo, mut inc) = (p.lo.clone(), p.increasing);
            if k == 1 && edge.twist {
                olo = w - &p.lo - &len;
                inc = !inc;
            }
            let end = edge.ends[k];
            let start = ls.intervals(end.switch, end.side)[end.slot].0.clone();
            let plo = &start + &olo;
            let phi = &plo + &len;
            let other = end.side.flip();
            let slots = t.side_slots(end.switch, other);
            for (j, (s2, t2)) in ls.intervals(end.switch, other).into_iter().enumerate() {
                let a = if plo > s2 { plo.clone() } else { s2.clone() };
                let b = if phi < t2 { phi.clone() } else { t2.clone() };
                if a >= b {
                    continue;
                }
                let (x0, x1) = if inc { (&p.x0 + (&a - &plo), &p.x0 + (&b - &plo)) } else { (&p.x0 + (&phi - &b), &p.x0 + (&phi - &a)) };
                let (e2, k2) = slots[j];
                let w2 = ls.weight(e2);
                let (mut lo2, mut inc2) = (&a - &s2, inc);
                if k2 == 1 && t.edge(e2).twist {
                    lo2 = w2 - (&b - &s2);
                    inc2 = !inc2;
                }
                let fwd2 = k2 == 0;
                let mut steps = p.steps.clone();
                steps.push(Step { edge: e2, forward: fwd2 });
                if e2 == star {
                    let hi2 = &lo2 + (&x1 - &x0);
                    let arrive_side = if fwd2 { Side::B } else { Side::T };
                    bands.push(Band { depart: (side, x0, x1), arrive: (arrive_side, lo2, hi2), reversed: !inc2, steps });
                    if bands.len() > 4 * MAX_BANDS {
                        return Err(FirstReturnError::TooManyBands(MAX_BANDS));
                    }
                } else {
                    if steps.len() > MAX_BANDS {
                        return Err(FirstReturnError::TooManyBands(MAX_BANDS));
                    }
                    stack.push(Piece { x0, x1, lo: lo2, increasing: inc2, forward: fwd2, steps });
                }
            }
        }
    }
    // Each band was found once from each end; keep one copy. A band that
    // returns onto its own departure interval, reversed, pairs its two halves.
    let mut out = Vec::new();
    for b in bands {
        let (ds, dx0, dx1) = &b.depart;
        let (as_, ay0, ay1) = &b.arrive;
        if ds != as_ {
            if *ds == Side::T {
                out.push(b);
            }
            continue;
        }
        if dx0 < ay0 {
            out.push(b);
        } else if dx0 == ay0 {
            debug_assert!(b.reversed && dx1 == ay1);
            let mid = (dx0 + dx1) / int(2);
            out.push(Band { depart: (*ds, dx0.clone(), mid.clone()), arrive: (*as_, mid, ay1.clone()), reversed: true, steps: b.steps });
        }
    }
    if out.len() > MAX_BANDS {
        return Err(FirstReturnError::TooManyBands(MAX_BANDS));
    }
    Ok(out)
}

fn build(ls: &LambdaStructure, star: usize, bands: Vec<Band>) -> Result<FirstReturn, FirstReturnError> {
    let t = ls.track();
    // Slots on each side in order of position along I.
    let mut ends: [Vec<(Rat, usize, usize)>; 2] = [Vec::new(), Vec::new()];
    for (i, b) in bands.iter().enumerate() {
        ends[b.depart.0.idx()].push((b.depart.1.clone(), i, 0));
        ends[b.arrive.0.idx()].push((b.arrive.1.clone(), i, 1));
    }
    let mut pos = vec![[End::new(0, Side::T, 0); 2]; bands.len()];
    for (si, col) in ends.iter_mut().enumerate() {
        col.sort();
        for (slot, (_, i, k)) in col.iter().enumerate() {
            pos[*i][*k] = End::new(0, Side::from_idx(si), slot);
        }
    }
    let edges = bands
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let inner: Rat = b.steps[1..b.steps.len() - 1].iter().map(|s| t.edge(s.edge).length.clone()).sum();
            crate::track::Edge { name: format!("r{i}"), ends: pos[i], twist: b.reversed, length: &t.edge(star).length + inner }
        })
        .collect();
    let track = TrainTrack::new(vec!["v".to_string()], edges, t.surface())?;
    let weights = bands.iter().map(|b| &b.depart.2 - &b.depart.1).collect();
    let structure = LambdaStructure::new_unchecked(track.clone(), weights)?;
    let fr = FirstReturn {
        transversal_edge: star,
        switchboard: SwitchboardTrack::new(track)?,
        structure,
        itineraries: bands.into_iter().map(|b| b.steps).collect(),
    };
    let back = fr.pushforward(t.num_edges());
    if let Some(e) = (0..t.num_edges()).find(|&e| back[e] != *ls.weight(e)) {
        return Err(FirstReturnError::Uncovered(t.edge(e).name.clone()));
    }
    Ok(fr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;
    use crate::track::build as build_track;
    use crate::track::Side::{B, T};
    use std::collections::BTreeSet;

    fn two_switch() -> LambdaStructure {
        let t = build_track(
            &["u", "v"],
            &[
                ("a", (0, T, 0), (1, B, 0), false, int(2)),
                ("b", (0, T, 1), (1, B, 1), true, int(3)),
                ("c", (1, T, 0), (0, B, 0), false, int(5)),
            ],
            None,
        )
        .unwrap();
        LambdaStructure::new(t, vec![int(1), int(2), int(3)]).unwrap()
    }

    /// Independent count: scale to integer strands, follow every strand that
    /// leaves the transversal, and count itineraries up to reversal.
    fn oracle_classes(ls: &LambdaStructure, star: usize) -> usize {
        let t = ls.track();
        let scale: num::BigInt = ls.weights().iter().map(|w| w.denom().clone()).fold(num::BigInt::from(1), |a, d| num::Integer::lcm(&a, &d)) * 2;
        let iw: Vec<i64> = ls.weights().iter().map(|w| (w * Rat::from_integer(scale.clone())).to_integer().try_into().unwrap()).collect();
        // Strand `k` of edge `e` in end-0 numbering, left to right at each end.
        let at_end = |e: usize, k: i64, end: usize| if end == 1 && t.edge(e).twist { iw[e] - 1 - k } else { k };
        let offset = |s: usize, side: Side, slot: usize| -> i64 { t.side_slots(s, side)[..slot].iter().map(|&(e, _)| iw[e]).sum() };
        let mut words = BTreeSet::new();
        for (forward0, n) in [(true, iw[star]), (false, iw[star])] {
            for k0 in 0..n {
                let mut word = vec![(star, forward0)];
                let (mut e, mut k, mut fwd) = (star, k0, forward0);
                loop {
                    let exit = usize::from(fwd);
                    let end = t.edge(e).ends[exit];
                    let p = offset(end.switch, end.side, end.slot) + at_end(e, k, exit);
                    let other = end.side.flip();
                    let mut acc = 0;
                    let mut next = None;
                    for &(e2, k2) in t.side_slots(end.switch, other) {
                        if p < acc + iw[e2] {
                            next = Some((e2, k2, p - acc));
                            break;
                        }
                        acc += iw[e2];
                    }
                    let (e2, k2, local) = next.unwrap();
                    e = e2;
                    k = at_end(e2, local, k2);
                    fwd = k2 == 0;
                    word.push((e, fwd));
                    if e == star {
                        break;
                    }
                }
                let rev: Vec<_> = word.iter().rev().map(|&(e, f)| (e, !f)).collect();
                words.insert(word.clone().min(rev));
            }
        }
        words.len()
    }

    #[test]
    fn one_vertex_input_is_unchanged() {
        let t = build_track(&["v"], &[("a", (0, T, 0), (0, B, 1), false, int(1)), ("e", (0, T, 1), (0, B, 0), false, int(2))], None).unwrap();
        let ls = LambdaStructure::new(t, vec![int(1), frac(5, 2)]).unwrap();
        let e = transversal_edge(&ls);
        let fr = first_return(&ls, e).unwrap();
        assert_eq!(fr.structure.track(), ls.track());
        assert_eq!(fr.structure.weights(), ls.weights());
    }

    #[test]
    fn two_switch_matches_strand_count() {
        let ls = two_switch();
        let e = transversal_edge(&ls);
        assert_eq!(ls.track().edge(e).name, "c");
        let fr = first_return(&ls, e).unwrap();
        assert_eq!(fr.structure.track().num_switches(), 1);
        assert_eq!(fr.structure.track().num_edges(), oracle_classes(&ls, e));
        assert_eq!(fr.pushforward(3), ls.weights().to_vec());
        let total: Rat = fr.structure.weights().iter().sum();
        assert!(total >= *ls.weight(e));
    }

    #[test]
    fn rejects_non_maximal_edge() {
        let ls = two_switch();
        assert!(matches!(first_return(&ls, 0), Err(FirstReturnError::NotMaximal(_))));
    }
}
