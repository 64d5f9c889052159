//! Refinement moves on the band complex of a lambda-structure.
//!
//! Moves act on [`Fbc`], a mutable copy of the band complex that also
//! admits the zero-length edges unmasking needs transiently. Every
//! primitive move is logged with a carrying map (new edge to a path of
//! segments in the previous edges) and its lambda-length accounting.

use crate::lambda::{classify_band, lambda_length_of, EdgeKind, LambdaLengths, LambdaStructure};
use crate::rat::{abs, fmt_rat, frac, int, zero, Rat};
use crate::surface::SurfaceSig;
use crate::track::{EndRef, Side, TrainTrack};
use num::{Signed, Zero};
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// A piece `[from, to]` of an edge in length coordinates measured from
/// end 0; `from > to` means the piece is traversed backwards.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seg {
    pub edge: usize,
    pub from: Rat,
    pub to: Rat,
}

impl Seg {
    pub fn len(&self) -> Rat {
        abs(&(&self.to - &self.from))
    }

    pub fn is_empty(&self) -> bool {
        self.from == self.to
    }

    fn reversed(&self) -> Seg {
        Seg { edge: self.edge, from: self.to.clone(), to: self.from.clone() }
    }
}

/// Restricts a path (covering `[0, L]` of an edge) to the part between
/// `from` and `to`, reversing if `from > to`.
pub fn slice_path(path: &[Seg], from: &Rat, to: &Rat) -> Vec<Seg> {
    if from > to {
        let mut out: Vec<Seg> = slice_path(path, to, from).iter().map(Seg::reversed).collect();
        out.reverse();
        return out;
    }
    let mut out = Vec::new();
    let mut pos = zero();
    for s in path {
        let l = s.len();
        let (lo, hi) = (pos.clone(), &pos + &l);
        let a = if *from > lo { from.clone() } else { lo.clone() };
        let b = if *to < hi { to.clone() } else { hi.clone() };
        if a < b {
            let dir = if s.to >= s.from { int(1) } else { int(-1) };
            out.push(Seg { edge: s.edge, from: &s.from + &dir * (&a - &lo), to: &s.from + &dir * (&b - &lo) });
        }
        pos = hi;
    }
    out
}

/// Merges consecutive pieces of the same edge that continue each other.
pub fn coalesce(path: Vec<Seg>) -> Vec<Seg> {
    let mut out: Vec<Seg> = Vec::new();
    for s in path.into_iter().filter(|s| !s.is_empty()) {
        if let Some(last) = out.last_mut() {
            let same_dir = (last.to > last.from) == (s.to > s.from);
            if last.edge == s.edge && last.to == s.from && same_dir {
                last.to = s.to;
                continue;
            }
        }
        out.push(s);
    }
    out
}

/// Composes `outer` (paths in the middle edges) with `inner` (paths of the
/// middle edges in the bottom edges).
pub fn compose_paths(outer: &[Vec<Seg>], inner: &[Vec<Seg>]) -> Vec<Vec<Seg>> {
    outer
        .iter()
        .map(|path| {
            let mut out = Vec::new();
            for s in path {
                out.extend(slice_path(&inner[s.edge], &s.from, &s.to));
            }
            coalesce(out)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FEdge {
    pub name: String,
    pub twist: bool,
    pub length: Rat,
    pub weight: Rat,
}

/// Mutable band complex with weights.
#[derive(Clone, Debug)]
pub struct Fbc {
    switches: Vec<String>,
    layout: Vec<[Vec<EndRef>; 2]>,
    edges: Vec<FEdge>,
    surface: Option<SurfaceSig>,
    next_edge: usize,
    next_switch: usize,
}

fn max_suffix<'a>(names: impl Iterator<Item = &'a String>, prefix: &str) -> usize {
    names
        .filter_map(|n| n.strip_prefix(prefix).and_then(|d| d.parse::<usize>().ok()))
        .map(|k| k + 1)
        .max()
        .unwrap_or(0)
}

impl Fbc {
    pub fn from_structure(ls: &LambdaStructure) -> Fbc {
        let t = ls.track();
        let edges: Vec<FEdge> = t
            .edges()
            .iter()
            .zip(ls.weights())
            .map(|(e, w)| FEdge { name: e.name.clone(), twist: e.twist, length: e.length.clone(), weight: w.clone() })
            .collect();
        let switches = t.switch_names().to_vec();
        Fbc {
            next_edge: max_suffix(edges.iter().map(|e| &e.name), "e"),
            next_switch: max_suffix(switches.iter(), "v"),
            layout: t.layout().to_vec(),
            edges,
            switches,
            surface: t.surface(),
        }
    }

    /// Converts back; fails if a zero-length edge remains or the result is
    /// not a valid structure.
    pub fn to_structure(&self) -> Result<LambdaStructure, String> {
        let meta = self.edges.iter().map(|e| (e.name.clone(), e.twist, e.length.clone())).collect();
        let t = TrainTrack::from_layout(self.switches.clone(), &self.layout, meta, self.surface)
            .map_err(|e| e.to_string())?;
        LambdaStructure::new_unchecked(t, self.edges.iter().map(|e| e.weight.clone()).collect()).map_err(|e| e.to_string())
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_switches(&self) -> usize {
        self.switches.len()
    }

    pub fn edge(&self, e: usize) -> &FEdge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[FEdge] {
        &self.edges
    }

    pub fn switch_name(&self, s: usize) -> &str {
        &self.switches[s]
    }

    pub fn surface(&self) -> Option<SurfaceSig> {
        self.surface
    }

    pub fn slots(&self, s: usize, side: Side) -> &[EndRef] {
        &self.layout[s][side.idx()]
    }

    pub fn edge_by_name(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn switch_by_name(&self, name: &str) -> Option<usize> {
        self.switches.iter().position(|s| s == name)
    }

    /// `(switch, side, slot)` of an edge end.
    pub fn locate(&self, e: usize, k: usize) -> (usize, Side, usize) {
        for (s, sides) in self.layout.iter().enumerate() {
            for (si, col) in sides.iter().enumerate() {
                if let Some(slot) = col.iter().position(|&r| r == (e, k)) {
                    return (s, Side::from_idx(si), slot);
                }
            }
        }
        panic!("edge end {e}.{k} is not attached")
    }

    pub fn intervals(&self, s: usize, side: Side) -> Vec<(Rat, Rat)> {
        let mut acc = zero();
        self.layout[s][side.idx()]
            .iter()
            .map(|&(e, _)| {
                let next = &acc + &self.edges[e].weight;
                let iv = (acc.clone(), next.clone());
                acc = next;
                iv
            })
            .collect()
    }

    pub fn width(&self, s: usize, side: Side) -> Rat {
        self.layout[s][side.idx()].iter().map(|&(e, _)| self.edges[e].weight.clone()).sum()
    }

    pub fn end_interval(&self, e: usize, k: usize) -> (Rat, Rat) {
        let (s, side, slot) = self.locate(e, k);
        self.intervals(s, side)[slot].clone()
    }

    pub fn edge_kind(&self, e: usize) -> EdgeKind {
        let a = self.locate(e, 0);
        let b = self.locate(e, 1);
        if a.0 != b.0 || a.1 == b.1 {
            return EdgeKind::NonLoopy;
        }
        let (tk, bk) = if a.1 == Side::T { (0, 1) } else { (1, 0) };
        classify_band(self.edges[e].twist, &self.end_interval(e, tk), &self.end_interval(e, bk), &self.edges[e].weight)
    }

    pub fn lambda_length(&self, e: usize) -> Rat {
        lambda_length_of(&self.edge_kind(e), self.edges[e].twist, &self.edges[e].length)
    }

    pub fn lambda_lengths(&self) -> LambdaLengths {
        LambdaLengths::new((0..self.edges.len()).map(|e| self.lambda_length(e)).collect())
    }

    pub fn valence(&self, s: usize) -> usize {
        self.layout[s][0].len() + self.layout[s][1].len()
    }

    /// One slot per side, held by two different edges.
    pub fn is_bivalent(&self, s: usize) -> bool {
        let [t, b] = &self.layout[s];
        t.len() == 1 && b.len() == 1 && t[0].0 != b[0].0
    }

    fn fresh_edge(&mut self) -> String {
        loop {
            let n = format!("e{}", self.next_edge);
            self.next_edge += 1;
            if self.edge_by_name(&n).is_none() {
                return n;
            }
        }
    }

    fn fresh_switch(&mut self) -> String {
        loop {
            let n = format!("v{}", self.next_switch);
            self.next_switch += 1;
            if self.switch_by_name(&n).is_none() {
                return n;
            }
        }
    }

    /// Structural and weight checks that every move must preserve.
    pub fn check(&self) -> Result<(), String> {
        for s in 0..self.switches.len() {
            if self.layout[s][0].is_empty() || self.layout[s][1].is_empty() {
                return Err(format!("switch {} has an empty side", self.switches[s]));
            }
            if self.width(s, Side::T) != self.width(s, Side::B) {
                return Err(format!("switch equation fails at {}", self.switches[s]));
            }
        }
        for (e, edge) in self.edges.iter().enumerate() {
            if !edge.weight.is_positive() {
                return Err(format!("edge {} has weight {}", edge.name, edge.weight));
            }
            if edge.length.is_negative() {
                return Err(format!("edge {} has negative length", edge.name));
            }
            if let EdgeKind::Loopy(w) = self.edge_kind(e) {
                let k = int(w.w as i64);
                if &w.mw * (&k + int(1)) + &w.mw1 * (&k + int(2)) != edge.weight || !w.mw1.is_positive() {
                    return Err(format!("winding data of {} is inconsistent", edge.name));
                }
            }
        }
        Ok(())
    }
}

/// Scratch state of one primitive move: the complex being edited and,
/// per edge, its path in the edges before the move.
struct Draft {
    f: Fbc,
    paths: Vec<Vec<Seg>>,
}

impl Draft {
    fn new(f: &Fbc) -> Draft {
        let paths = f
            .edges
            .iter()
            .enumerate()
            .map(|(e, x)| if x.length.is_zero() { vec![] } else { vec![Seg { edge: e, from: zero(), to: x.length.clone() }] })
            .collect();
        Draft { f: f.clone(), paths }
    }

    fn add_edge(&mut self, name: String, twist: bool, length: Rat, weight: Rat, path: Vec<Seg>) -> usize {
        self.f.edges.push(FEdge { name, twist, length, weight });
        self.paths.push(path);
        self.f.edges.len() - 1
    }

    fn replace_ref(&mut self, r: EndRef, with: &[EndRef]) {
        for sides in self.f.layout.iter_mut() {
            for col in sides.iter_mut() {
                if let Some(i) = col.iter().position(|&x| x == r) {
                    col.splice(i..=i, with.iter().copied());
                    return;
                }
            }
        }
        panic!("edge end {r:?} is not attached")
    }

    /// Cuts edge `e` lengthwise along the leaf at offset `x` from the left
    /// of end `k`. Returns the pieces left and right of the cut at end `k`.
    fn split_edge(&mut self, e: usize, k: usize, x: &Rat) -> (usize, usize) {
        let old = self.f.edges[e].clone();
        assert!(x.is_positive() && *x < old.weight, "cut must be interior");
        let path = self.paths[e].clone();
        let n1 = self.f.fresh_edge();
        let p1 = self.add_edge(n1, old.twist, old.length.clone(), x.clone(), path.clone());
        let n2 = self.f.fresh_edge();
        let p2 = self.add_edge(n2, old.twist, old.length.clone(), &old.weight - x, path);
        self.replace_ref((e, k), &[(p1, k), (p2, k)]);
        let far = 1 - k;
        if old.twist {
            self.replace_ref((e, far), &[(p2, far), (p1, far)]);
        } else {
            self.replace_ref((e, far), &[(p1, far), (p2, far)]);
        }
        (p1, p2)
    }

    /// Cuts switch `s` at `x`, which must be a slot boundary on both sides.
    /// The left part keeps the name; returns the index of the right part.
    fn cut_switch(&mut self, s: usize, x: &Rat) -> usize {
        let mut right: [Vec<EndRef>; 2] = [Vec::new(), Vec::new()];
        for side in [Side::T, Side::B] {
            let ivs = self.f.intervals(s, side);
            let col = &self.f.layout[s][side.idx()];
            let mut keep = Vec::new();
            for (r, iv) in col.iter().zip(&ivs) {
                if iv.1 <= *x {
                    keep.push(*r);
                } else {
                    assert!(iv.0 >= *x, "cut at {x} crosses a slot");
                    right[side.idx()].push(*r);
                }
            }
            self.f.layout[s][side.idx()] = keep;
        }
        let name = self.f.fresh_switch();
        self.f.switches.push(name);
        self.f.layout.push(right);
        self.f.layout.len() - 1
    }

    /// Merges the two edges at a bivalent switch into one.
    fn merge(&mut self, s: usize) -> usize {
        let (e, ke) = self.f.layout[s][0][0];
        let (g, kg) = self.f.layout[s][1][0];
        assert!(e != g);
        let (a, b) = (self.f.edges[e].clone(), self.f.edges[g].clone());
        assert_eq!(a.weight, b.weight, "bivalent switch with unequal weights");
        // Walk `e` from its far end into `s`, then `g` out of `s`.
        let mut path = if ke == 1 { self.paths[e].clone() } else { reverse_path(&self.paths[e]) };
        path.extend(if kg == 0 { self.paths[g].clone() } else { reverse_path(&self.paths[g]) });
        let name = self.f.fresh_edge();
        let n = self.add_edge(name, a.twist ^ b.twist, &a.length + &b.length, a.weight.clone(), coalesce(path));
        self.f.layout[s] = [Vec::new(), Vec::new()];
        self.replace_ref((e, 1 - ke), &[(n, 0)]);
        self.replace_ref((g, 1 - kg), &[(n, 1)]);
        n
    }

    /// Inserts bivalent switches at the given distances from end 0.
    fn subdivide(&mut self, e: usize, cuts: &[Rat]) -> Vec<usize> {
        let old = self.f.edges[e].clone();
        let path = self.paths[e].clone();
        let mut marks = vec![zero()];
        marks.extend(cuts.iter().cloned());
        marks.push(old.length.clone());
        let mut pieces = Vec::new();
        for i in 0..marks.len() - 1 {
            assert!(marks[i] < marks[i + 1], "cuts must be increasing and interior");
            let name = self.f.fresh_edge();
            let twist = i == 0 && old.twist;
            let p = self.add_edge(name, twist, &marks[i + 1] - &marks[i], old.weight.clone(), slice_path(&path, &marks[i], &marks[i + 1]));
            pieces.push(p);
        }
        self.replace_ref((e, 0), &[(pieces[0], 0)]);
        self.replace_ref((e, 1), &[(pieces[pieces.len() - 1], 1)]);
        for w in pieces.windows(2) {
            let name = self.f.fresh_switch();
            self.f.switches.push(name);
            self.f.layout.push([vec![(w[0], 1)], vec![(w[1], 0)]]);
        }
        pieces
    }

    /// Drops detached edges and empty switches, renumbering the rest.
    fn finish(self) -> (Fbc, Vec<Vec<Seg>>) {
        let Draft { f, paths } = self;
        let mut used = vec![false; f.edges.len()];
        for sides in &f.layout {
            for col in sides {
                for &(e, _) in col {
                    used[e] = true;
                }
            }
        }
        let mut renum = vec![usize::MAX; f.edges.len()];
        let mut edges = Vec::new();
        let mut new_paths = Vec::new();
        for (e, x) in f.edges.into_iter().enumerate() {
            if used[e] {
                renum[e] = edges.len();
                edges.push(x);
                new_paths.push(paths[e].clone());
            }
        }
        let mut switches = Vec::new();
        let mut layout = Vec::new();
        for (name, sides) in f.switches.into_iter().zip(f.layout) {
            if sides[0].is_empty() && sides[1].is_empty() {
                continue;
            }
            switches.push(name);
            layout.push(sides.map(|col| col.into_iter().map(|(e, k)| (renum[e], k)).collect()));
        }
        let out = Fbc { switches, layout, edges, surface: f.surface, next_edge: f.next_edge, next_switch: f.next_switch };
        (out, new_paths)
    }
}

fn reverse_path(p: &[Seg]) -> Vec<Seg> {
    p.iter().rev().map(Seg::reversed).collect()
}

/// Checks that the weights of `new` push forward along `paths` to the
/// weights of `old`.
pub fn check_pushforward(old: &[FEdge], new: &[FEdge], paths: &[Vec<Seg>]) -> Result<(), String> {
    for (e, path) in paths.iter().enumerate() {
        let total: Rat = path.iter().map(Seg::len).sum();
        if total != new[e].length {
            return Err(format!("edge {} has length {} but its path has length {}", new[e].name, new[e].length, total));
        }
    }
    for (f, old_edge) in old.iter().enumerate() {
        let mut cover: Vec<(Rat, Rat, Rat)> = Vec::new();
        let mut marks: BTreeSet<Rat> = BTreeSet::new();
        marks.insert(zero());
        marks.insert(old_edge.length.clone());
        for (e, path) in paths.iter().enumerate() {
            for s in path.iter().filter(|s| s.edge == f) {
                let (lo, hi) = if s.from < s.to { (s.from.clone(), s.to.clone()) } else { (s.to.clone(), s.from.clone()) };
                marks.insert(lo.clone());
                marks.insert(hi.clone());
                cover.push((lo, hi, new[e].weight.clone()));
            }
        }
        let marks: Vec<Rat> = marks.into_iter().collect();
        for w in marks.windows(2) {
            let mid = (&w[0] + &w[1]) * frac(1, 2);
            let sum: Rat = cover.iter().filter(|(lo, hi, _)| *lo < mid && mid < *hi).map(|c| c.2.clone()).sum();
            if sum != old_edge.weight {
                return Err(format!("edge {} near {} receives weight {} instead of {}", old_edge.name, mid, sum, old_edge.weight));
            }
        }
    }
    Ok(())
}

/// Checks that consecutive pieces of each path pass through a switch of
/// `base` from one side to the other.
pub fn check_joins(base: &Fbc, paths: &[Vec<Seg>]) -> Result<(), String> {
    let exit_end = |s: &Seg| -> Option<usize> {
        let l = &base.edges[s.edge].length;
        if s.to == *l && s.from < s.to {
            Some(1)
        } else if s.to.is_zero() && s.from > s.to {
            Some(0)
        } else {
            None
        }
    };
    let entry_end = |s: &Seg| -> Option<usize> {
        let l = &base.edges[s.edge].length;
        if s.from.is_zero() && s.from < s.to {
            Some(0)
        } else if s.from == *l && s.from > s.to {
            Some(1)
        } else {
            None
        }
    };
    for path in paths {
        for w in path.windows(2) {
            let (Some(a), Some(b)) = (exit_end(&w[0]), entry_end(&w[1])) else {
                return Err(format!("path breaks inside an edge between {:?} and {:?}", w[0], w[1]));
            };
            let (sa, xa, _) = base.locate(w[0].edge, a);
            let (sb, xb, _) = base.locate(w[1].edge, b);
            if sa != sb || xa == xb {
                return Err(format!("illegal join through {} and {}", base.switch_name(sa), base.switch_name(sb)));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Subdivide,
    Merge,
    SplitCusp,
    UnmaskSplit,
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Subdivide => "subdivide",
            MoveKind::Merge => "remove_bivalent",
            MoveKind::SplitCusp => "split_cusp",
            MoveKind::UnmaskSplit => "unmask_split",
        })
    }
}

/// What the change of total lambda-length must be.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    Exact(Rat),
    OneOf(Vec<Rat>),
    /// No identity applies; the record is kept for inspection.
    Unchecked,
}

impl Expect {
    fn holds(&self, delta: &Rat) -> bool {
        match self {
            Expect::Exact(x) => x == delta,
            Expect::OneOf(xs) => xs.contains(delta),
            Expect::Unchecked => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MoveRecord {
    pub kind: MoveKind,
    pub context: String,
    pub target: String,
    pub lambda_before: Rat,
    pub lambda_after: Rat,
    pub m_before: Rat,
    pub m_after: Rat,
    pub expect: Expect,
    pub accounting_ok: bool,
    /// `None` when weights, switch equations and paths all check out.
    pub conservation_error: Option<String>,
    /// Set when a merge produced a loopy or closed-leaf edge.
    pub note: Option<String>,
    /// Path of each new edge in the edges before the move.
    pub paths: Vec<Vec<Seg>>,
}

impl MoveRecord {
    pub fn ok(&self) -> bool {
        self.accounting_ok && self.conservation_error.is_none()
    }

    pub fn delta(&self) -> Rat {
        &self.lambda_after - &self.lambda_before
    }
}

#[derive(Clone, Debug)]
pub struct CompositeRecord {
    pub kind: String,
    pub target: String,
    /// Range of primitive moves making up this composite.
    pub moves: std::ops::Range<usize>,
    pub ok: bool,
    pub detail: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RefinementTrace {
    pub initial: Fbc,
    pub moves: Vec<MoveRecord>,
    pub composites: Vec<CompositeRecord>,
    /// The complex after each move, when requested with
    /// [`Refiner::keep_snapshots`].
    pub snapshots: Vec<Fbc>,
}

impl RefinementTrace {
    /// Paths of the final edges in the initial edges.
    pub fn compose(&self) -> Vec<Vec<Seg>> {
        self.compose_range(0..self.moves.len(), &self.initial)
    }

    /// Composition of a consecutive run of moves starting from a complex
    /// with `n_start` edges.
    pub fn compose_range(&self, range: std::ops::Range<usize>, start: &Fbc) -> Vec<Vec<Seg>> {
        let mut acc: Option<Vec<Vec<Seg>>> = None;
        for rec in &self.moves[range] {
            acc = Some(match acc {
                None => rec.paths.clone(),
                Some(prev) => compose_paths(&rec.paths, &prev),
            });
        }
        acc.unwrap_or_else(|| Draft::new(start).paths)
    }

    pub fn all_ok(&self) -> bool {
        self.moves.iter().all(MoveRecord::ok) && self.composites.iter().all(|c| c.ok)
    }

    /// Checks the composed carrying map against the initial complex.
    pub fn verify(&self, last: &Fbc) -> Result<(), String> {
        if self.moves.is_empty() {
            return Ok(());
        }
        let paths = self.compose();
        check_pushforward(&self.initial.edges, &last.edges, &paths)?;
        check_joins(&self.initial, &paths)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefineError {
    #[error("edge {0} is loopy or fake-loopy and cannot be combed")]
    LoopyTarget(String),
    #[error("edge {0} is not loopy")]
    NotLoopy(String),
    #[error("edge {0} is not fake-loopy")]
    NotFakeLoopy(String),
    #[error("edge {0} carries a closed leaf")]
    ClosedLeaf(String),
    #[error("switch {0} has no cusp at slot {1}")]
    NoCusp(String, usize),
    #[error("no such edge {0}")]
    UnknownEdge(String),
    #[error("{0}")]
    Invariant(String),
}

/// Facts about a cusp split, by name.
#[derive(Clone, Debug)]
pub struct SplitInfo {
    pub left: String,
    pub right: String,
    /// `(common child, piece left of the cut, piece right of the cut)`.
    pub child: Option<(String, String, String)>,
}

/// Applies moves to a band complex and logs them.
#[derive(Clone, Debug)]
pub struct Refiner {
    cur: Fbc,
    pub trace: RefinementTrace,
    context: String,
    guard_merges: bool,
    keep_snapshots: bool,
}

impl Refiner {
    pub fn new(ls: &LambdaStructure) -> Refiner {
        Refiner::from_fbc(Fbc::from_structure(ls))
    }

    /// Starts a fresh trace at `f`.
    pub fn from_fbc(f: Fbc) -> Refiner {
        Refiner {
            trace: RefinementTrace { initial: f.clone(), moves: Vec::new(), composites: Vec::new(), snapshots: Vec::new() },
            cur: f,
            context: String::new(),
            guard_merges: true,
            keep_snapshots: false,
        }
    }

    pub fn current(&self) -> &Fbc {
        &self.cur
    }

    /// Records a copy of the complex after every later move.
    pub fn keep_snapshots(&mut self, on: bool) {
        self.keep_snapshots = on;
    }

    pub fn set_context(&mut self, c: &str) {
        self.context = c.to_string();
    }

    fn commit(&mut self, kind: MoveKind, target: String, expect: Expect, draft: Draft, note: Option<String>) {
        let before = self.cur.lambda_lengths();
        let (next, paths) = draft.finish();
        let after = next.lambda_lengths();
        let delta = &after.total - &before.total;
        let conservation_error = next
            .check()
            .and_then(|_| check_pushforward(&self.cur.edges, &next.edges, &paths))
            .and_then(|_| check_joins(&self.cur, &paths))
            .err();
        self.trace.moves.push(MoveRecord {
            kind,
            context: self.context.clone(),
            target,
            lambda_before: before.total,
            lambda_after: after.total,
            m_before: before.min,
            m_after: after.min,
            accounting_ok: expect.holds(&delta),
            expect,
            conservation_error,
            note,
            paths,
        });
        if self.keep_snapshots {
            self.trace.snapshots.push(next.clone());
        }
        self.cur = next;
    }

    /// Splits the cusp between slots `k` and `k+1` on `side` of switch `s`.
    pub fn split_cusp(&mut self, s: usize, side: Side, k: usize) -> Result<SplitInfo, RefineError> {
        self.split_cusp_expect(s, side, k, None)
    }

    fn split_cusp_expect(&mut self, s: usize, side: Side, k: usize, expect: Option<Expect>) -> Result<SplitInfo, RefineError> {
        let f = &self.cur;
        if k + 1 >= f.slots(s, side).len() {
            return Err(RefineError::NoCusp(f.switch_name(s).to_string(), k));
        }
        let x = f.intervals(s, side)[k].1.clone();
        let other = f.intervals(s, side.flip());
        let straddle = other.iter().position(|iv| iv.0 < x && x < iv.1);
        let mut d = Draft::new(f);
        let target = format!("{}.{}.{}", f.switch_name(s), side, k);
        let (child, default) = match straddle {
            None => (None, Expect::Exact(zero())),
            Some(j) => {
                let (c, kc) = f.slots(s, side.flip())[j];
                let kind = f.edge_kind(c);
                let len = f.edges[c].length.clone();
                let default = match kind {
                    EdgeKind::NonLoopy | EdgeKind::FakeLoopy => Expect::Exact(len),
                    EdgeKind::Loopy(_) => Expect::OneOf(vec![zero(), len]),
                    EdgeKind::ClosedLeaf => Expect::Unchecked,
                };
                let (p1, p2) = d.split_edge(c, kc, &(&x - &other[j].0));
                (Some((f.edges[c].name.clone(), d.f.edges[p1].name.clone(), d.f.edges[p2].name.clone())), default)
            }
        };
        let right = d.cut_switch(s, &x);
        let info = SplitInfo { left: d.f.switches[s].clone(), right: d.f.switches[right].clone(), child };
        self.commit(MoveKind::SplitCusp, target, expect.unwrap_or(default), d, None);
        Ok(info)
    }

    /// Adds bivalent switches to edge `e` at the given distances from end 0.
    pub fn subdivide(&mut self, e: usize, cuts: &[Rat]) -> Vec<String> {
        let mut d = Draft::new(&self.cur);
        let target = self.cur.edges[e].name.clone();
        let pieces = d.subdivide(e, cuts);
        let names = pieces.iter().map(|&p| d.f.edges[p].name.clone()).collect();
        self.commit(MoveKind::Subdivide, target, Expect::Exact(zero()), d, None);
        names
    }

    /// Removes one bivalent switch. Returns the merged edge's name.
    pub fn remove_bivalent(&mut self, s: usize) -> String {
        let f = &self.cur;
        let (e, _) = f.slots(s, Side::T)[0];
        let (g, _) = f.slots(s, Side::B)[0];
        let parts = f.lambda_length(e) + f.lambda_length(g);
        let parts_plain = !f.edge_kind(e).is_loopy() && !f.edge_kind(g).is_loopy();
        let target = f.switch_name(s).to_string();
        let mut d = Draft::new(f);
        let n = d.merge(s);
        let name = d.f.edges[n].name.clone();
        let kind = d.f.edge_kind(n);
        let merged = d.f.lambda_length(n);
        let (expect, note) = match kind {
            EdgeKind::NonLoopy | EdgeKind::FakeLoopy if parts_plain => (Expect::Exact(zero()), None),
            k => (Expect::Exact(&merged - &parts), Some(format!("merge produced {k} edge {name}"))),
        };
        self.commit(MoveKind::Merge, target, expect, d, note);
        name
    }

    /// Removes bivalent switches until none is left among `only` (all if `None`).
    pub fn remove_all_bivalent(&mut self, only: Option<&[String]>) {
        let mut kept: Vec<String> = Vec::new();
        loop {
            let f = &self.cur;
            let next = (0..f.num_switches()).find(|&s| {
                let n = f.switch_name(s);
                f.is_bivalent(s) && only.is_none_or(|o| o.iter().any(|x| x == n)) && !kept.iter().any(|x| x == n)
            });
            let Some(s) = next else { return };
            if self.guard_merges && self.merge_winds(s) {
                kept.push(self.cur.switch_name(s).to_string());
                continue;
            }
            self.remove_bivalent(s);
        }
    }

    /// Whether smoothing switch `s` would produce a loopy or closed-leaf edge.
    pub fn merge_winds(&self, s: usize) -> bool {
        let mut d = Draft::new(&self.cur);
        let n = d.merge(s);
        matches!(d.f.edge_kind(n), EdgeKind::Loopy(_) | EdgeKind::ClosedLeaf)
    }

    /// When set (the default), bivalent switches whose smoothing would wind
    /// an edge around itself are kept.
    pub fn set_guard_merges(&mut self, on: bool) {
        self.guard_merges = on;
    }

    /// Combs the half-edge `(e0, k)`: isolates it at its switch and pushes
    /// it into each of its children.
    pub fn comb(&mut self, e0: usize, k: usize) -> Result<(), RefineError> {
        let f = &self.cur;
        let name0 = f.edges[e0].name.clone();
        if f.edge_kind(e0) != EdgeKind::NonLoopy {
            return Err(RefineError::LoopyTarget(name0));
        }
        let start = self.trace.moves.len();
        let pre = self.cur.clone();
        let lam0 = pre.lambda_length(e0);
        let mut created: Vec<String> = Vec::new();
        let at = |r: &Refiner| {
            let e = r.cur.edge_by_name(&name0).expect("combed edge survives isolation");
            r.cur.locate(e, k)
        };
        let (s, side, slot) = at(self);
        if slot + 1 < self.cur.slots(s, side).len() {
            self.split_cusp(s, side, slot)?;
        }
        let (s, side, slot) = at(self);
        if slot > 0 {
            self.split_cusp(s, side, slot - 1)?;
        }
        // Only the copies of the isolated switch are smoothed here; other
        // bivalent switches are left to the caller.
        let (mut s, side, _) = at(self);
        created.push(self.cur.switch_name(s).to_string());
        while self.cur.slots(s, side.flip()).len() > 1 {
            let info = self.split_cusp(s, side.flip(), 0)?;
            assert!(info.child.is_some(), "isolated half-edge straddles every child cusp");
            created.push(info.right.clone());
            s = self.cur.switch_by_name(&info.right).expect("right part exists");
        }
        let guard = std::mem::replace(&mut self.guard_merges, false);
        self.remove_all_bivalent(Some(&created));
        self.guard_merges = guard;
        let end = self.trace.moves.len();
        let detail = self.check_comb(&pre, e0, &lam0, start..end);
        self.trace.composites.push(CompositeRecord { kind: "comb".into(), target: format!("{name0}.{k}"), moves: start..end, ok: detail.is_none(), detail });
        Ok(())
    }

    /// Every new edge through `e0` alternates whole copies of `e0` with whole
    /// children, and its lambda-length is the sum over that path. A child
    /// with both ends among the children of the half-edge yields a copy of
    /// `e0` at each end.
    fn check_comb(&self, pre: &Fbc, e0: usize, _lam0: &Rat, range: std::ops::Range<usize>) -> Option<String> {
        let paths = self.trace.compose_range(range, pre);
        for (e, path) in paths.iter().enumerate() {
            if !path.iter().any(|s| s.edge == e0) {
                continue;
            }
            let name = &self.cur.edges[e].name;
            if path.iter().any(|s| s.len() != pre.edges[s.edge].length) {
                return Some(format!("edge {name} covers part of an edge"));
            }
            if path.windows(2).any(|w| (w[0].edge == e0) == (w[1].edge == e0)) {
                return Some(format!("edge {name} does not alternate between {} and its children", pre.edges[e0].name));
            }
            let plain = path.iter().all(|s| pre.edge_kind(s.edge) == EdgeKind::NonLoopy);
            if !plain || self.cur.edge_kind(e) != EdgeKind::NonLoopy {
                continue;
            }
            let want: Rat = path.iter().map(|s| pre.lambda_length(s.edge)).sum();
            if self.cur.lambda_length(e) != want {
                return Some(format!("edge {name} has lambda-length {} instead of {}", self.cur.lambda_length(e), want));
            }
        }
        None
    }

    /// Separates the two ends of a fake-loopy edge.
    pub fn unmask(&mut self, e0: usize) -> Result<(), RefineError> {
        let f = &self.cur;
        let name0 = f.edges[e0].name.clone();
        if f.edge_kind(e0) != EdgeKind::FakeLoopy {
            return Err(RefineError::NotFakeLoopy(name0));
        }
        let start = self.trace.moves.len();
        let (s, side0, _) = f.locate(e0, 0);
        let (tk, bk) = if side0 == Side::T { (0, 1) } else { (1, 0) };
        let i = f.end_interval(e0, tk);
        let j = f.end_interval(e0, bk);
        // Prefix widths on T and B that go to the left part.
        let (pt, pb) = if j.1 <= i.0 { (i.0.clone(), j.1.clone()) } else { (i.1.clone(), j.0.clone()) };
        if pt == pb {
            let (_, _, slot) = f.locate(e0, if j.1 <= i.0 { tk } else { bk });
            let cusp_side = if j.1 <= i.0 { Side::T } else { Side::B };
            self.split_cusp(s, cusp_side, slot - 1)?;
        } else {
            // Leaves crossing between the two parts run through a new zero-length edge.
            let narrow = if pt > pb { Side::B } else { Side::T };
            let gap = abs(&(&pt - &pb));
            // The prefixes differ on the two sides, so a self-attached band whose
            // ends fall in different parts stops winding.
            let mut expect = zero();
            for &(e, k) in f.slots(s, Side::T) {
                if matches!(f.edge_kind(e), EdgeKind::Loopy(_) | EdgeKind::ClosedLeaf) {
                    let t_left = f.end_interval(e, k).1 <= pt;
                    let b_left = f.end_interval(e, 1 - k).1 <= pb;
                    if t_left != b_left {
                        expect += &f.edges[e].length - f.lambda_length(e);
                    }
                }
            }
            let mut d = Draft::new(f);
            let mut right: [Vec<EndRef>; 2] = [Vec::new(), Vec::new()];
            for (side, cut) in [(Side::T, &pt), (Side::B, &pb)] {
                let ivs = d.f.intervals(s, side);
                let col = d.f.layout[s][side.idx()].clone();
                let mut keep = Vec::new();
                for (r, iv) in col.iter().zip(&ivs) {
                    if iv.1 <= *cut {
                        keep.push(*r);
                    } else {
                        right[side.idx()].push(*r);
                    }
                }
                d.f.layout[s][side.idx()] = keep;
            }
            let name = d.f.fresh_edge();
            let z = d.add_edge(name.clone(), false, zero(), gap, vec![]);
            d.f.layout[s][narrow.idx()].push((z, 0));
            right[narrow.flip().idx()].insert(0, (z, 1));
            let rname = d.f.fresh_switch();
            d.f.switches.push(rname);
            d.f.layout.push(right);
            self.commit(MoveKind::UnmaskSplit, name0.clone(), Expect::Exact(expect), d, None);
            let z = self.cur.edge_by_name(&name).expect("zero edge exists");
            self.comb(z, 1)?;
        }
        let end = self.trace.moves.len();
        let still = self.cur.edge_by_name(&name0);
        let ok = still.is_none_or(|e| self.cur.edge_kind(e) == EdgeKind::NonLoopy);
        let zero_left = self.cur.edges.iter().any(|e| e.length.is_zero());
        let detail = if !ok {
            Some(format!("{name0} is still fake-loopy"))
        } else if zero_left {
            Some("a zero-length edge survived".into())
        } else {
            None
        };
        self.trace.composites.push(CompositeRecord { kind: "unmask".into(), target: name0, moves: start..end, ok: detail.is_none(), detail });
        Ok(())
    }

    /// Peels a loopy edge one turn at a time until it is fake-loopy, then unmasks it.
    pub fn unloop(&mut self, e0: usize) -> Result<(), RefineError> {
        let f = &self.cur;
        let name0 = f.edges[e0].name.clone();
        let EdgeKind::Loopy(_) = f.edge_kind(e0) else {
            return Err(RefineError::NotLoopy(name0));
        };
        let start = self.trace.moves.len();
        let mut cur = name0.clone();
        let mut detail = None;
        loop {
            let e = self.cur.edge_by_name(&cur).expect("residual edge exists");
            match self.cur.edge_kind(e) {
                EdgeKind::Loopy(w) => {
                    let res_before = self.cur.lambda_length(e);
                    let len = self.cur.edges[e].length.clone();
                    let tk = if self.cur.locate(e, 0).1 == Side::T { 0 } else { 1 };
                    let (s, _, slot) = self.cur.locate(e, tk);
                    let k = if w.shift.is_positive() { slot - 1 } else { slot };
                    let info = self.split_cusp_expect(s, Side::T, k, Some(Expect::Exact(zero())))?;
                    let (_, p1, p2) = info.child.clone().expect("the loopy edge is its own common child");
                    cur = if w.shift.is_positive() { p2 } else { p1 };
                    let created = [info.left, info.right];
                    self.remove_all_bivalent(Some(&created));
                    let r = self.cur.edge_by_name(&cur).expect("residual survives");
                    let res_after = self.cur.lambda_length(r);
                    if res_after != &res_before - &len && detail.is_none() {
                        detail = Some(format!("residual of {name0} dropped from {res_before} to {res_after}"));
                    }
                }
                EdgeKind::FakeLoopy => {
                    let peel_delta: Rat = self.trace.moves[start..]
                        .iter()
                        .filter(|m| m.kind == MoveKind::SplitCusp)
                        .map(MoveRecord::delta)
                        .sum();
                    if !peel_delta.is_zero() && detail.is_none() {
                        detail = Some(format!("peeling changed the total lambda-length by {peel_delta}"));
                    }
                    self.unmask(e)?;
                    break;
                }
                EdgeKind::NonLoopy => break,
                EdgeKind::ClosedLeaf => return Err(RefineError::ClosedLeaf(cur)),
            }
        }
        let end = self.trace.moves.len();
        self.trace.composites.push(CompositeRecord { kind: "unloop".into(), target: name0, moves: start..end, ok: detail.is_none(), detail });
        Ok(())
    }

    pub fn into_parts(self) -> (Fbc, RefinementTrace) {
        (self.cur, self.trace)
    }
}

/// Per-edge accounting summary by name, for reports.
pub fn lambda_by_name(f: &Fbc) -> HashMap<String, Rat> {
    (0..f.num_edges()).map(|e| (f.edge(e).name.clone(), f.lambda_length(e))).collect()
}

pub fn fmt_seg(f: &Fbc, s: &Seg) -> String {
    format!("{}:{}:{}", f.edge(s.edge).name, fmt_rat(&s.from), fmt_rat(&s.to))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track::build;
    use crate::track::Side::{B, T};

    /// Two switches: `a` and `b` leave `u` upward into `v`, `c` returns.
    fn two_switch() -> LambdaStructure {
        let t = build(
            &["u", "v"],
            &[
                ("a", (0, T, 0), (1, B, 0), false, int(2)),
                ("b", (0, T, 1), (1, B, 1), false, int(3)),
                ("c", (1, T, 0), (0, B, 0), false, int(5)),
            ],
            None,
        )
        .unwrap();
        LambdaStructure::new(t, vec![int(1), int(2), int(3)]).unwrap()
    }

    /// A rotation by 1 on a circle of length 7/2: `e` is loopy, `a` is fake-loopy.
    fn loopy() -> LambdaStructure {
        let t = build(&["v"], &[("a", (0, T, 0), (0, B, 1), false, int(1)), ("e", (0, T, 1), (0, B, 0), false, int(2))], None).unwrap();
        LambdaStructure::new(t, vec![int(1), frac(5, 2)]).unwrap()
    }

    #[test]
    fn slice_and_reverse() {
        let p = vec![Seg { edge: 0, from: int(0), to: int(2) }, Seg { edge: 1, from: int(3), to: int(0) }];
        let s = slice_path(&p, &int(1), &int(4));
        assert_eq!(s, vec![Seg { edge: 0, from: int(1), to: int(2) }, Seg { edge: 1, from: int(3), to: int(1) }]);
        let r = slice_path(&p, &int(4), &int(1));
        assert_eq!(r, vec![Seg { edge: 1, from: int(1), to: int(3) }, Seg { edge: 0, from: int(2), to: int(1) }]);
    }

    #[test]
    fn split_cusp_adds_child_length() {
        let mut r = Refiner::new(&two_switch());
        let info = r.split_cusp(0, T, 0).unwrap();
        assert_eq!(info.child.as_ref().unwrap().0, "c");
        let rec = &r.trace.moves[0];
        assert!(rec.ok(), "{rec:?}");
        assert_eq!(rec.delta(), int(5));
        assert_eq!(r.current().num_switches(), 3);
        r.trace.verify(r.current()).unwrap();
    }

    #[test]
    fn clean_split_adds_nothing() {
        let t = build(
            &["u", "v"],
            &[
                ("a", (0, T, 0), (1, B, 0), false, int(2)),
                ("b", (0, T, 1), (1, B, 1), false, int(3)),
                ("c", (1, T, 0), (0, B, 0), false, int(5)),
                ("d", (1, T, 1), (0, B, 1), false, int(1)),
            ],
            None,
        )
        .unwrap();
        let ls = LambdaStructure::new(t, vec![int(1), int(2), int(1), int(2)]).unwrap();
        let mut r = Refiner::new(&ls);
        let info = r.split_cusp(0, T, 0).unwrap();
        assert!(info.child.is_none());
        assert_eq!(r.trace.moves[0].delta(), int(0));
        assert!(r.trace.all_ok());
    }

    #[test]
    fn subdivide_and_merge_round_trip() {
        let ls = two_switch();
        let mut r = Refiner::new(&ls);
        r.subdivide(2, &[int(1), int(3)]);
        assert_eq!(r.current().num_switches(), 4);
        r.remove_all_bivalent(None);
        assert_eq!(r.current().num_switches(), 2);
        assert!(r.trace.all_ok());
        let f = r.current();
        let c = (0..f.num_edges()).find(|&e| f.edge(e).length == int(5)).unwrap();
        assert!(!f.edge(c).twist);
        r.trace.verify(r.current()).unwrap();
    }

    #[test]
    fn twisted_subdivision_keeps_twist() {
        let t = build(&["v"], &[("a", (0, T, 0), (0, B, 1), true, int(4)), ("e", (0, T, 1), (0, B, 0), false, int(2))], None).unwrap();
        let ls = LambdaStructure::new(t, vec![int(1), frac(5, 2)]).unwrap();
        let mut r = Refiner::new(&ls);
        r.subdivide(0, &[int(1)]);
        r.remove_all_bivalent(None);
        let f = r.current();
        let a = (0..f.num_edges()).find(|&e| f.edge(e).length == int(4)).unwrap();
        assert!(f.edge(a).twist);
        assert_eq!(f.edge_kind(a), EdgeKind::FakeLoopy);
    }

    #[test]
    fn comb_pushes_into_children() {
        let mut r = Refiner::new(&two_switch());
        r.set_guard_merges(false);
        // Comb a's end at v; its only child there is c.
        r.comb(0, 1).unwrap();
        assert!(r.trace.all_ok(), "{:?}", r.trace.composites);
        r.trace.verify(r.current()).unwrap();
        let f = r.current();
        assert!(f.edge_by_name("a").is_none());
    }

    #[test]
    fn comb_rejects_loopy() {
        let mut r = Refiner::new(&loopy());
        assert!(matches!(r.comb(1, 0), Err(RefineError::LoopyTarget(_))));
        assert!(matches!(r.comb(0, 0), Err(RefineError::LoopyTarget(_))));
    }

    #[test]
    fn unloop_peels_and_unmasks() {
        let ls = loopy();
        let before = ls.lambda_lengths().total;
        let mut r = Refiner::new(&ls);
        r.set_guard_merges(false);
        r.unloop(1).unwrap();
        assert!(r.trace.all_ok(), "{:?}\n{:?}", r.trace.composites, r.trace.moves.iter().filter(|m| !m.ok()).collect::<Vec<_>>());
        r.trace.verify(r.current()).unwrap();
        let f = r.current();
        assert!(f.edge_by_name("e").is_none());
        assert!(f.lambda_lengths().total >= before);
        assert!(f.edges().iter().all(|e| e.length.is_positive()));
        // This complex is so small that bivalent merges wind it up again.
        assert!(r.trace.moves.iter().any(|m| m.note.is_some()));
    }

    #[test]
    fn unmask_fake_loopy() {
        let mut r = Refiner::new(&loopy());
        r.unmask(0).unwrap();
        assert!(r.trace.all_ok(), "{:?}", r.trace.moves.iter().filter(|m| !m.ok()).collect::<Vec<_>>());
        r.trace.verify(r.current()).unwrap();
        let f = r.current();
        assert!(f.edges().iter().all(|e| e.length.is_positive()));
        assert!(f.to_structure().is_ok());
    }
}
