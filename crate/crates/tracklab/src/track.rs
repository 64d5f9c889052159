//! Train tracks as band complexes.
//!
//! A switch is a rectangle with two ordered slot sides, `T` and `B`. Every
//! edge is a band glued to two slots. The twist bit records whether the
//! band reverses the left-to-right order of its cross-section between its
//! two ends.

use crate::rat::{zero, Rat};
use crate::surface::SurfaceSig;
use num::Signed;
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    T,
    B,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::T => Side::B,
            Side::B => Side::T,
        }
    }

    pub fn idx(self) -> usize {
        match self {
            Side::T => 0,
            Side::B => 1,
        }
    }

    pub fn from_idx(i: usize) -> Side {
        if i == 0 {
            Side::T
        } else {
            Side::B
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::T => "T",
            Side::B => "B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct End {
    pub switch: usize,
    pub side: Side,
    pub slot: usize,
}

impl End {
    pub fn new(switch: usize, side: Side, slot: usize) -> Self {
        End { switch, side, slot }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub ends: [End; 2],
    pub twist: bool,
    pub length: Rat,
}

impl Edge {
    /// Both ends on sides with the same label.
    pub fn same_side(&self) -> bool {
        self.ends[0].side == self.ends[1].side
    }

    /// Parity contributed by one traversal: `twist XOR same_side`.
    pub fn parity(&self) -> bool {
        self.twist ^ self.same_side()
    }

    pub fn is_closed(&self) -> bool {
        self.ends[0].switch == self.ends[1].switch
    }
}

/// Reference to one end of an edge: `(edge index, end index)`.
pub type EndRef = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TrackError {
    #[error("edge {edge} refers to unknown switch index {switch}")]
    UnknownSwitch { edge: String, switch: usize },
    #[error("slot {switch}.{side}.{slot} is occupied more than once")]
    DuplicateSlot { switch: String, side: Side, slot: usize },
    #[error("slot {switch}.{side}.{slot} is empty while a later slot is occupied")]
    DanglingSlot { switch: String, side: Side, slot: usize },
    #[error("edge {0} has non-positive length")]
    NonPositiveLength(String),
    #[error("duplicate name {0}")]
    DuplicateName(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrainTrack {
    switch_names: Vec<String>,
    edges: Vec<Edge>,
    surface: Option<SurfaceSig>,
    slots: Vec<[Vec<EndRef>; 2]>,
}

impl TrainTrack {
    /// Builds a track, rejecting malformed slot occupancy.
    pub fn new(switch_names: Vec<String>, edges: Vec<Edge>, surface: Option<SurfaceSig>) -> Result<Self, TrackError> {
        let mut seen = HashSet::new();
        for n in switch_names.iter() {
            if !seen.insert(n.clone()) {
                return Err(TrackError::DuplicateName(n.clone()));
            }
        }
        let mut seen = HashSet::new();
        for e in edges.iter() {
            if !seen.insert(e.name.clone()) {
                return Err(TrackError::DuplicateName(e.name.clone()));
            }
        }
        let n = switch_names.len();
        let mut table: Vec<[Vec<Option<EndRef>>; 2]> = vec![[Vec::new(), Vec::new()]; n];
        for (ei, e) in edges.iter().enumerate() {
            if !e.length.is_positive() {
                return Err(TrackError::NonPositiveLength(e.name.clone()));
            }
            for (k, end) in e.ends.iter().enumerate() {
                if end.switch >= n {
                    return Err(TrackError::UnknownSwitch { edge: e.name.clone(), switch: end.switch });
                }
                let col = &mut table[end.switch][end.side.idx()];
                if col.len() <= end.slot {
                    col.resize(end.slot + 1, None);
                }
                if col[end.slot].is_some() {
                    return Err(TrackError::DuplicateSlot {
                        switch: switch_names[end.switch].clone(),
                        side: end.side,
                        slot: end.slot,
                    });
                }
                col[end.slot] = Some((ei, k));
            }
        }
        let mut slots = Vec::with_capacity(n);
        for (s, sides) in table.into_iter().enumerate() {
            let mut out: [Vec<EndRef>; 2] = [Vec::new(), Vec::new()];
            for (si, col) in sides.into_iter().enumerate() {
                for (slot, x) in col.into_iter().enumerate() {
                    match x {
                        Some(r) => out[si].push(r),
                        None => {
                            return Err(TrackError::DanglingSlot {
                                switch: switch_names[s].clone(),
                                side: Side::from_idx(si),
                                slot,
                            })
                        }
                    }
                }
            }
            slots.push(out);
        }
        Ok(TrainTrack { switch_names, edges, surface, slots })
    }

    /// Builds a track from per-switch slot lists; edge ends are derived.
    pub fn from_layout(
        switch_names: Vec<String>,
        layout: &[[Vec<EndRef>; 2]],
        meta: Vec<(String, bool, Rat)>,
        surface: Option<SurfaceSig>,
    ) -> Result<Self, TrackError> {
        let placeholder = End::new(usize::MAX, Side::T, 0);
        let mut ends = vec![[placeholder; 2]; meta.len()];
        for (s, sides) in layout.iter().enumerate() {
            for (si, col) in sides.iter().enumerate() {
                for (slot, &(e, k)) in col.iter().enumerate() {
                    ends[e][k] = End::new(s, Side::from_idx(si), slot);
                }
            }
        }
        let edges = meta
            .into_iter()
            .zip(ends)
            .map(|((name, twist, length), ends)| Edge { name, ends, twist, length })
            .collect();
        TrainTrack::new(switch_names, edges, surface)
    }

    pub fn num_switches(&self) -> usize {
        self.switch_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn switch_name(&self, s: usize) -> &str {
        &self.switch_names[s]
    }

    pub fn switch_names(&self) -> &[String] {
        &self.switch_names
    }

    pub fn surface(&self) -> Option<SurfaceSig> {
        self.surface
    }

    pub fn with_surface(mut self, surface: Option<SurfaceSig>) -> Self {
        self.surface = surface;
        self
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.name == name)
    }

    pub fn switch_index(&self, name: &str) -> Option<usize> {
        self.switch_names.iter().position(|n| n == name)
    }

    /// Slot list of one side of a switch, left to right.
    pub fn side_slots(&self, s: usize, side: Side) -> &[EndRef] {
        &self.slots[s][side.idx()]
    }

    pub fn layout(&self) -> &[[Vec<EndRef>; 2]] {
        &self.slots
    }

    pub fn end(&self, r: EndRef) -> End {
        self.edges[r.0].ends[r.1]
    }

    pub fn valence(&self, s: usize) -> usize {
        self.slots[s][0].len() + self.slots[s][1].len()
    }

    pub fn total_length(&self) -> Rat {
        self.edges.iter().fold(zero(), |acc, e| acc + &e.length)
    }

    /// A switch whose only two slots hold a single edge, i.e. a circle component.
    pub fn is_circle_switch(&self, s: usize) -> bool {
        let [t, b] = &self.slots[s];
        t.len() == 1 && b.len() == 1 && t[0].0 == b[0].0
    }

    /// Connected components as lists of switch indices.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_switches();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for e in &self.edges {
            let a = find(&mut parent, e.ends[0].switch);
            let b = find(&mut parent, e.ends[1].switch);
            if a != b {
                parent[a] = b;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for s in 0..n {
            let r = find(&mut parent, s);
            groups.entry(r).or_default().push(s);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Orientability of the thickened band complex: every closed path has even parity.
    pub fn thickening_orientable(&self) -> bool {
        let n = self.num_switches();
        let mut color: Vec<Option<bool>> = vec![None; n];
        for start in 0..n {
            if color[start].is_some() {
                continue;
            }
            color[start] = Some(false);
            let mut stack = vec![start];
            while let Some(s) = stack.pop() {
                let cs = color[s].unwrap();
                for e in &self.edges {
                    for k in 0..2 {
                        if e.ends[k].switch != s {
                            continue;
                        }
                        let o = e.ends[1 - k].switch;
                        let want = cs ^ e.parity();
                        match color[o] {
                            None => {
                                color[o] = Some(want);
                                stack.push(o);
                            }
                            Some(c) if c != want => return false,
                            _ => {}
                        }
                    }
                }
            }
        }
        true
    }
}

/// One boundary cycle of the thickened track.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Region {
    pub cusps: usize,
    /// Edges whose band sides are traversed, in order.
    pub word: Vec<usize>,
    pub punctured: bool,
    pub euler_char: i64,
    pub forbidden: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub switches: usize,
    pub edges: usize,
    pub bivalent: Vec<usize>,
    pub circle_components: usize,
    /// Switches with an empty side.
    pub degenerate: Vec<usize>,
    pub reduced_switches: usize,
    pub reduced_edges: usize,
    pub bound_violations: Vec<String>,
    pub regions: Vec<Region>,
    pub census_done: bool,
    /// Whether the regions are all disks or once-punctured disks.
    pub filling: Option<bool>,
    pub thickening_orientable: bool,
    pub errors: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Corner {
    edge: usize,
    end: usize,
    right: bool,
}

/// Boundary cycles of the band complex, each with its cusp count and edge word.
pub fn boundary_cycles(track: &TrainTrack) -> Vec<(usize, Vec<usize>)> {
    let band = |c: Corner| -> Corner {
        let e = track.edge(c.edge);
        Corner { edge: c.edge, end: 1 - c.end, right: c.right ^ e.twist }
    };
    // Returns the next corner and whether the move passes a cusp.
    let across = |c: Corner| -> (Corner, bool) {
        let end = track.end((c.edge, c.end));
        let col = track.side_slots(end.switch, end.side);
        let n = col.len();
        if c.right {
            if end.slot + 1 < n {
                let (e, k) = col[end.slot + 1];
                (Corner { edge: e, end: k, right: false }, true)
            } else {
                let other = track.side_slots(end.switch, end.side.flip());
                let (e, k) = other[other.len() - 1];
                (Corner { edge: e, end: k, right: true }, false)
            }
        } else if end.slot > 0 {
            let (e, k) = col[end.slot - 1];
            (Corner { edge: e, end: k, right: true }, true)
        } else {
            let other = track.side_slots(end.switch, end.side.flip());
            let (e, k) = other[0];
            (Corner { edge: e, end: k, right: false }, false)
        }
    };
    let mut visited: HashSet<Corner> = HashSet::new();
    let mut out = Vec::new();
    for edge in 0..track.num_edges() {
        for end in 0..2 {
            for right in [false, true] {
                let start = Corner { edge, end, right };
                if visited.contains(&start) {
                    continue;
                }
                let mut c = start;
                let mut cusps = 0;
                let mut word = Vec::new();
                loop {
                    visited.insert(c);
                    let c2 = band(c);
                    visited.insert(c2);
                    word.push(c.edge);
                    let (c3, cusp) = across(c2);
                    if cusp {
                        cusps += 1;
                    }
                    c = c3;
                    if c == start {
                        break;
                    }
                }
                out.push((cusps, word));
            }
        }
    }
    out
}

pub fn validate(track: &TrainTrack, strict: bool) -> ValidationReport {
    let n = track.num_switches();
    let mut errors = Vec::new();
    let mut degenerate = Vec::new();
    let mut bivalent = Vec::new();
    let mut circles = 0;
    for s in 0..n {
        let t = track.side_slots(s, Side::T).len();
        let b = track.side_slots(s, Side::B).len();
        if t == 0 || b == 0 {
            degenerate.push(s);
            errors.push(format!("switch {} has an empty side", track.switch_name(s)));
        } else if t == 1 && b == 1 {
            if track.is_circle_switch(s) {
                circles += 1;
            } else {
                bivalent.push(s);
            }
        }
    }
    if strict {
        for &s in &bivalent {
            errors.push(format!("switch {} is bivalent", track.switch_name(s)));
        }
    }
    let reduced_switches = n - bivalent.len();
    let reduced_edges = track.num_edges() - bivalent.len();
    let mut bound_violations = Vec::new();
    if let Some(sig) = track.surface() {
        let chi = sig.abs_chi() as usize;
        if reduced_switches > 6 * chi {
            bound_violations.push(format!("{} switches exceed 6|chi| = {}", reduced_switches, 6 * chi));
        }
        if reduced_edges > 9 * chi {
            bound_violations.push(format!("{} edges exceed 9|chi| = {}", reduced_edges, 9 * chi));
        }
    }
    errors.extend(bound_violations.iter().cloned());
    let orientable = track.thickening_orientable();
    let mut regions = Vec::new();
    let mut filling = None;
    if strict && degenerate.is_empty() {
        let cycles = boundary_cycles(track);
        let b = cycles.len() as i64;
        let chi_n = n as i64 - track.num_edges() as i64;
        let punctures = match track.surface() {
            Some(sig) => {
                let p = chi_n + b - sig.euler_char();
                let ok = p == sig.boundary as i64 && p <= b && orientable == sig.orientable;
                filling = Some(ok);
                if ok {
                    Some(p as usize)
                } else {
                    None
                }
            }
            None => None,
        };
        // Punctures go first to regions with one or two cusps, then to larger ones.
        let mut order: Vec<usize> = (0..cycles.len()).collect();
        order.sort_by_key(|&i| {
            let c = cycles[i].0;
            (if c == 1 || c == 2 { 0 } else if c >= 3 { 1 } else { 2 }, i)
        });
        let mut punctured = vec![false; cycles.len()];
        match punctures {
            Some(p) => {
                for &i in order.iter().take(p) {
                    punctured[i] = true;
                }
            }
            None if track.surface().is_none() => {
                for (i, (c, _)) in cycles.iter().enumerate() {
                    punctured[i] = *c == 1 || *c == 2;
                }
            }
            None => {}
        }
        let classify = punctures.is_some() || track.surface().is_none();
        for (i, (cusps, word)) in cycles.into_iter().enumerate() {
            let forbidden = classify && (cusps == 0 || (!punctured[i] && cusps <= 2));
            if forbidden {
                let kind = if punctured[i] { "punctured disk" } else { "disk" };
                errors.push(format!("forbidden region: {} with {} cusps", kind, cusps));
            }
            regions.push(Region {
                cusps,
                word,
                punctured: punctured[i],
                euler_char: if punctured[i] { 0 } else { 1 },
                forbidden,
            });
        }
    }
    ValidationReport {
        switches: n,
        edges: track.num_edges(),
        bivalent,
        circle_components: circles,
        degenerate,
        reduced_switches,
        reduced_edges,
        bound_violations,
        regions,
        census_done: strict,
        filling,
        thickening_orientable: orientable,
        errors,
    }
}

/// Smallest surface the track fills: regions with one or two cusps are
/// punctured, larger ones are disks. `None` if a region has no cusps or
/// the result is not hyperbolic.
pub fn minimal_surface(track: &TrainTrack) -> Option<SurfaceSig> {
    let cycles = boundary_cycles(track);
    if cycles.iter().any(|(c, _)| *c == 0) {
        return None;
    }
    let r = cycles.iter().filter(|(c, _)| *c <= 2).count() as i64;
    let disks = cycles.len() as i64 - r;
    let chi = track.num_switches() as i64 - track.num_edges() as i64 + disks;
    if chi >= 0 {
        return None;
    }
    if track.thickening_orientable() {
        let g2 = 2 - chi - r;
        (g2 >= 0 && g2 % 2 == 0).then(|| SurfaceSig::orientable((g2 / 2) as u32, r as u32))
    } else {
        let k = 2 - chi - r;
        (k >= 1).then(|| SurfaceSig::nonorientable(k as u32, r as u32))
    }
}

/// Convenience constructor used in tests and demos: edges given as
/// `(name, (switch, side, slot), (switch, side, slot), twist, length)`.
pub fn build(
    switches: &[&str],
    edges: &[(&str, (usize, Side, usize), (usize, Side, usize), bool, Rat)],
    surface: Option<SurfaceSig>,
) -> Result<TrainTrack, TrackError> {
    let edges = edges
        .iter()
        .map(|(name, a, b, twist, len)| Edge {
            name: name.to_string(),
            ends: [End::new(a.0, a.1, a.2), End::new(b.0, b.1, b.2)],
            twist: *twist,
            length: len.clone(),
        })
        .collect();
    TrainTrack::new(switches.iter().map(|s| s.to_string()).collect(), edges, surface)
}
