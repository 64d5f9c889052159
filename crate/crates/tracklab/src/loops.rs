//! Carried closed curves.
//!
//! For an integer weight vector the band complex is foliated by that many
//! strands per band. At each switch, strands meet the `T` and `B` sides
//! at positions `0..N` and the strand at position `p` on one side
//! continues at position `p` on the other. The components of the
//! resulting 1-manifold are the carried simple closed curves.

use crate::cone::switch_matrix;
use crate::track::TrainTrack;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub edge: usize,
    /// Traversed from end 0 to end 1.
    pub forward: bool,
}

impl Step {
    fn reversed(self) -> Step {
        Step { edge: self.edge, forward: !self.forward }
    }

    /// `(entry end, exit end)` indices.
    pub fn ends(self) -> (usize, usize) {
        if self.forward {
            (0, 1)
        } else {
            (1, 0)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sidedness {
    OneSided,
    TwoSided,
}

impl fmt::Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sidedness::OneSided => "one-sided",
            Sidedness::TwoSided => "two-sided",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegalLoop {
    pub steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LoopError {
    #[error("empty loop")]
    Empty,
    #[error("step {0} refers to an unknown edge")]
    UnknownEdge(usize),
    #[error("path does not close up at step {0}")]
    NotClosed(usize),
    #[error("transition after step {0} does not cross the switch")]
    NotLegal(usize),
}

impl LegalLoop {
    pub fn new(steps: Vec<Step>) -> Self {
        LegalLoop { steps }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn multiplicity(&self, n_edges: usize) -> Vec<u64> {
        let mut m = vec![0u64; n_edges];
        for s in &self.steps {
            m[s.edge] += 1;
        }
        m
    }

    pub fn reversed(&self) -> LegalLoop {
        LegalLoop { steps: self.steps.iter().rev().map(|s| s.reversed()).collect() }
    }

    /// Least rotation over both traversal directions.
    pub fn canonical(&self) -> LegalLoop {
        let mut best: Option<Vec<Step>> = None;
        for seq in [self.steps.clone(), self.reversed().steps] {
            for r in 0..seq.len() {
                let mut rot = seq[r..].to_vec();
                rot.extend_from_slice(&seq[..r]);
                if best.as_ref().is_none_or(|b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        LegalLoop { steps: best.unwrap_or_default() }
    }

    /// Shortest `u` with `steps = u^k`, and `k`.
    pub fn root(&self) -> (LegalLoop, usize) {
        let n = self.steps.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|i| self.steps[i] == self.steps[i - p]) {
                return (LegalLoop { steps: self.steps[..p].to_vec() }, n / p);
            }
        }
        (self.clone(), 1)
    }

    pub fn display(&self, track: &TrainTrack) -> String {
        self.steps
            .iter()
            .map(|s| format!("{}{}", track.edge(s.edge).name, if s.forward { "+" } else { "-" }))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn check_closed(track: &TrainTrack, l: &LegalLoop, legal: bool) -> Result<(), LoopError> {
    if l.steps.is_empty() {
        return Err(LoopError::Empty);
    }
    for (i, s) in l.steps.iter().enumerate() {
        if s.edge >= track.num_edges() {
            return Err(LoopError::UnknownEdge(i));
        }
    }
    let n = l.steps.len();
    for i in 0..n {
        let a = l.steps[i];
        let b = l.steps[(i + 1) % n];
        let out = track.edge(a.edge).ends[a.ends().1];
        let inn = track.edge(b.edge).ends[b.ends().0];
        if out.switch != inn.switch {
            return Err(LoopError::NotClosed(i));
        }
        if legal && out.side == inn.side {
            return Err(LoopError::NotLegal(i));
        }
    }
    Ok(())
}

/// Whether every transition crosses its switch from one side to the other.
pub fn is_legal(track: &TrainTrack, l: &LegalLoop) -> bool {
    check_closed(track, l, true).is_ok()
}

/// Sidedness of the curve determined by a closed edge path.
///
/// The path need not be legal: a single `T`-`T` edge determines a closed
/// curve without being carried by it.
pub fn sidedness_parity(track: &TrainTrack, l: &LegalLoop) -> Result<Sidedness, LoopError> {
    check_closed(track, l, false)?;
    let odd = l.steps.iter().fold(false, |acc, s| acc ^ track.edge(s.edge).parity());
    Ok(if odd { Sidedness::OneSided } else { Sidedness::TwoSided })
}

/// Sidedness of a path, for callers that already know it closes up.
pub fn path_parity(track: &TrainTrack, steps: &[Step]) -> bool {
    steps.iter().fold(false, |acc, s| acc ^ track.edge(s.edge).parity())
}

/// A component of the foliation for integer weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Component {
    Curve(LegalLoop),
    /// Boundary of a regular neighbourhood of the one-sided root; stands for the root with weight 2.
    MobiusBoundary(LegalLoop),
}

/// Components of the integer foliation with weights `w`, each traced once.
///
/// Panics if `w` violates the switch equations.
pub fn foliation_components(track: &TrainTrack, w: &[u64]) -> Vec<Component> {
    let mut out = Vec::new();
    for_each_component(track, w, |c| {
        out.push(c);
        true
    });
    out
}

/// Traces the components of the integer foliation with weights `w` in order,
/// stopping early when `visit` returns false.
///
/// Panics if `w` violates the switch equations.
pub fn for_each_component(track: &TrainTrack, w: &[u64], mut visit: impl FnMut(Component) -> bool) {
    let ns = track.num_switches();
    let mut offsets: Vec<[Vec<u64>; 2]> = Vec::with_capacity(ns);
    for s in 0..ns {
        let mut sides: [Vec<u64>; 2] = [Vec::new(), Vec::new()];
        for (si, side) in sides.iter_mut().enumerate() {
            let mut acc = 0;
            for &(e, _) in &track.layout()[s][si] {
                side.push(acc);
                acc += w[e];
            }
            side.push(acc);
        }
        assert_eq!(sides[0].last(), sides[1].last(), "weights violate the switch equations");
        offsets.push(sides);
    }
    // A strand is `(edge, offset measured at end 0)`.
    let to_end = |e: usize, k: u64, end: usize| -> u64 {
        if end == 0 || !track.edge(e).twist {
            k
        } else {
            w[e] - 1 - k
        }
    };
    let mut seen: Vec<Vec<bool>> = w.iter().map(|&x| vec![false; x as usize]).collect();
    for e0 in 0..track.num_edges() {
        for k0 in 0..w[e0] {
            if seen[e0][k0 as usize] {
                continue;
            }
            let mut steps = Vec::new();
            let (mut e, mut k, mut forward) = (e0, k0, true);
            loop {
                seen[e][k as usize] = true;
                steps.push(Step { edge: e, forward });
                let exit = if forward { 1 } else { 0 };
                let end = track.edge(e).ends[exit];
                let pos = offsets[end.switch][end.side.idx()][end.slot] + to_end(e, k, exit);
                let other = end.side.flip();
                let col = &offsets[end.switch][other.idx()];
                let j = col.partition_point(|&x| x <= pos) - 1;
                let (e2, end2) = track.layout()[end.switch][other.idx()][j];
                let local = pos - col[j];
                let k2 = to_end(e2, local, end2);
                e = e2;
                k = k2;
                forward = end2 == 0;
                if e == e0 && k == k0 {
                    debug_assert!(forward);
                    break;
                }
            }
            let l = LegalLoop { steps };
            let (root, mult) = l.root();
            let c = if mult == 2 && path_parity(track, &root.steps) {
                Component::MobiusBoundary(root)
            } else {
                Component::Curve(l)
            };
            if !visit(c) {
                return;
            }
        }
    }
}

/// Integer points of the cone inside the box `[0, k]^n`, excluding zero.
pub fn box_points(track: &TrainTrack, k: u64) -> Vec<Vec<u64>> {
    let n = track.num_edges();
    let m = switch_matrix(track);
    let mut out = Vec::new();
    let mut w = vec![0u64; n];
    loop {
        if w.iter().any(|x| *x > 0)
            && m.iter().all(|row| row.iter().zip(&w).map(|(a, x)| a * *x as i64).sum::<i64>() == 0)
        {
            out.push(w.clone());
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if w[i] < k {
                w[i] += 1;
                break;
            }
            w[i] = 0;
            i += 1;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TaggedLoop {
    pub lp: LegalLoop,
    pub sidedness: Sidedness,
}

/// All carried essential simple closed curves with multiplicity at most `max_mult` on every edge,
/// in canonical form, ordered by length then lexicographically.
pub fn enumerate_loops(track: &TrainTrack, max_mult: u64) -> Vec<TaggedLoop> {
    let mut set: BTreeSet<(usize, LegalLoop)> = BTreeSet::new();
    for w in box_points(track, max_mult) {
        for c in foliation_components(track, &w) {
            if let Component::Curve(l) = c {
                let c = l.canonical();
                set.insert((c.len(), c));
            }
        }
    }
    set.into_iter()
        .map(|(_, lp)| {
            let sidedness = if path_parity(track, &lp.steps) { Sidedness::OneSided } else { Sidedness::TwoSided };
            TaggedLoop { lp, sidedness }
        })
        .collect()
}
