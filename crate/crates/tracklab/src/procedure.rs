//! The Main Procedure and uniformization built on the refinement moves.

use crate::lambda::{EdgeKind, LambdaStructure};
use crate::rat::{int, pow2, Rat};
use crate::refine::{Fbc, RefineError, Refiner, RefinementTrace};
use crate::track::Side;
use num::Zero;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProcedureError {
    #[error(transparent)]
    Refine(#[from] RefineError),
    #[error("C must exceed {bound}, got {c}")]
    ConstantTooSmall { c: Rat, bound: Rat },
    #[error("L must be positive")]
    NonPositiveTarget,
    #[error("procedure stuck: {0}")]
    Stuck(String),
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),
    #[error("certificate violated: {0}")]
    CertificateViolation(String),
    #[error("result is not a valid structure: {0}")]
    Invalid(String),
}

/// `|χ|` of the surface, or `E − V` (an upper bound for filling tracks) when
/// no surface is given.
pub fn chi_abs(f: &Fbc) -> u64 {
    match f.surface() {
        Some(s) => s.abs_chi() as u64,
        None => (f.num_edges() as i64 - f.num_switches() as i64).max(1) as u64,
    }
}

/// Outcome of one run of the Main Procedure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub chi_abs: u64,
    pub m0: Rat,
    pub m1: Rat,
    pub l0: Rat,
    pub l1: Rat,
    pub rounds: usize,
    /// Edges with `ℓ^λ < 2 m0` after each round.
    pub short_edges: Vec<usize>,
    /// Reduced edge and switch counts stayed within `9|χ|` and `6|χ|`.
    pub counts_ok: bool,
}

impl Certificate {
    pub fn min_doubled(&self) -> bool {
        self.m1 >= &self.m0 * int(2)
    }

    /// `ℓ1 < ℓ0 + 1000|χ| m0`.
    pub fn length_ok(&self) -> bool {
        self.l1 < &self.l0 + int(1000 * self.chi_abs as i64) * &self.m0
    }

    /// `ℓ0 < ℓ1`. Fails when every comb lands on a single child, so it is
    /// reported but not part of [`Certificate::holds`].
    pub fn length_grew(&self) -> bool {
        self.l0 < self.l1
    }

    pub fn rounds_ok(&self) -> bool {
        self.rounds as u64 <= 9 * self.chi_abs
    }

    pub fn short_decreasing(&self) -> bool {
        self.short_edges.windows(2).all(|w| w[1] < w[0])
    }

    pub fn holds(&self) -> bool {
        self.min_doubled() && self.length_ok() && self.rounds_ok() && self.counts_ok
    }

    /// Errors naming the first failed bound.
    pub fn check(&self) -> Result<(), ProcedureError> {
        let fail = if !self.min_doubled() {
            format!("m {} -> {} did not double", self.m0, self.m1)
        } else if !self.length_ok() {
            format!("l {} -> {} exceeds l0 + {} m0", self.l0, self.l1, 1000 * self.chi_abs)
        } else if !self.rounds_ok() {
            format!("{} rounds exceed {}", self.rounds, 9 * self.chi_abs)
        } else if !self.counts_ok {
            "edge or switch count exceeded".to_string()
        } else {
            return Ok(());
        };
        Err(ProcedureError::CertificateViolation(fail))
    }
}

fn counts_within(f: &Fbc, chi: u64) -> bool {
    if f.surface().is_none() {
        return true;
    }
    let biv = (0..f.num_switches()).filter(|&s| f.is_bivalent(s)).count();
    (f.num_switches() - biv) as u64 <= 6 * chi && (f.num_edges() - biv) as u64 <= 9 * chi
}

/// Subdivides non-loopy edges longer than `4m` into pieces of length `2m`,
/// the last piece taking the remainder in `[2m, 4m)`.
fn subdivide_long(r: &mut Refiner, m: &Rat) {
    let f = r.current();
    let long: Vec<String> = (0..f.num_edges())
        .filter(|&e| f.edge_kind(e) == EdgeKind::NonLoopy && f.edge(e).length > m * int(4))
        .map(|e| f.edge(e).name.clone())
        .collect();
    let step = m * int(2);
    for name in long {
        let e = r.current().edge_by_name(&name).expect("long edge survives");
        let len = r.current().edge(e).length.clone();
        let q = (&len / &step).floor().to_integer();
        let q: i64 = q.try_into().expect("piece count fits");
        let cuts: Vec<Rat> = (1..q).map(|i| &step * int(i)).collect();
        r.subdivide(e, &cuts);
    }
}

/// Unmasks fake-loopy edges and unloops loopy ones with `ℓ^λ ≤ 4m` until none remain.
fn clear_loops(r: &mut Refiner, m: &Rat) -> Result<(), ProcedureError> {
    for _ in 0..10_000 {
        let f = r.current();
        let fake = (0..f.num_edges()).find(|&e| f.edge_kind(e) == EdgeKind::FakeLoopy);
        if let Some(e) = fake {
            r.unmask(e)?;
            continue;
        }
        let short = (0..f.num_edges()).find(|&e| f.edge_kind(e).is_loopy() && f.lambda_length(e) <= m * int(4));
        if let Some(e) = short {
            r.unloop(e)?;
            continue;
        }
        return Ok(());
    }
    Err(ProcedureError::Stuck("loop clearing does not terminate".into()))
}

/// How the Main Procedure picks the half-edge to comb.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CombChoice {
    /// The shortest edge of least index, at the end with the lesser slot.
    #[default]
    LeastIndex,
    /// Every shortest non-loopy half-edge is combed on a scratch copy and
    /// the one leaving the least total lambda-length wins, ties as in
    /// `LeastIndex`. Smoothing after a comb can close an edge into a loop
    /// whose leaves wind many times; this avoids some of those.
    Lookahead,
}

fn pick_comb(f: &Fbc, choice: CombChoice) -> Option<(usize, usize)> {
    let lens = f.lambda_lengths();
    let mut best: Option<(Rat, usize, usize)> = None;
    for e0 in (0..f.num_edges()).filter(|&e| lens.per_edge[e] == lens.min && f.edge_kind(e) == EdgeKind::NonLoopy) {
        let (_, _, s0) = f.locate(e0, 0);
        let (_, _, s1) = f.locate(e0, 1);
        let first = usize::from(s1 < s0);
        if choice == CombChoice::LeastIndex {
            return Some((e0, first));
        }
        for k in [first, 1 - first] {
            let mut scratch = Refiner::from_fbc(f.clone());
            if scratch.comb(e0, k).is_err() {
                continue;
            }
            scratch.remove_all_bivalent(None);
            let total = scratch.current().lambda_lengths().total;
            if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
                best = Some((total, e0, k));
            }
        }
    }
    best.map(|(_, e, k)| (e, k))
}

/// Runs rounds of subdivide, unmask, unloop and comb until the minimal
/// lambda-length has doubled.
pub fn main_procedure(r: &mut Refiner) -> Result<Certificate, ProcedureError> {
    main_procedure_with(r, CombChoice::LeastIndex)
}

/// [`main_procedure`] with an explicit comb choice.
pub fn main_procedure_with(r: &mut Refiner, choice: CombChoice) -> Result<Certificate, ProcedureError> {
    let start = r.current().lambda_lengths();
    let chi = chi_abs(r.current());
    let (m0, l0) = (start.min.clone(), start.total.clone());
    if m0.is_zero() {
        return Err(ProcedureError::Stuck("an edge has zero lambda-length".into()));
    }
    let cap = 20 * 9 * chi as usize + 50;
    let mut rounds = 0;
    let mut short_edges = Vec::new();
    let mut counts_ok = counts_within(r.current(), chi);
    loop {
        let now = r.current().lambda_lengths();
        if now.min >= &m0 * int(2) {
            break;
        }
        if rounds == cap {
            return Err(ProcedureError::NoConvergence(cap));
        }
        rounds += 1;
        let m = now.min.clone();
        r.set_context(&format!("round {rounds}: subdivide"));
        subdivide_long(r, &m);
        r.set_context(&format!("round {rounds}: loops"));
        clear_loops(r, &m)?;
        r.set_context(&format!("round {rounds}: subdivide"));
        subdivide_long(r, &m);
        r.set_context(&format!("round {rounds}: comb"));
        match pick_comb(r.current(), choice) {
            Some((e0, k)) => r.comb(e0, k)?,
            None => {
                let f = r.current();
                let lens = f.lambda_lengths();
                let e0 = (0..f.num_edges()).find(|&e| lens.per_edge[e] == lens.min).expect("nonempty");
                match f.edge_kind(e0) {
                    EdgeKind::Loopy(_) => r.unloop(e0)?,
                    EdgeKind::FakeLoopy => r.unmask(e0)?,
                    _ => return Err(ProcedureError::Stuck(format!("shortest edge {} carries a closed leaf", f.edge(e0).name))),
                }
            }
        }
        r.set_context(&format!("round {rounds}: cleanup"));
        r.remove_all_bivalent(None);
        counts_ok &= counts_within(r.current(), chi);
        let lens = r.current().lambda_lengths();
        short_edges.push(lens.per_edge.iter().filter(|l| **l < &m0 * int(2)).count());
    }
    let end = r.current().lambda_lengths();
    Ok(Certificate { chi_abs: chi, m0, m1: end.min, l0, l1: end.total, rounds, short_edges, counts_ok })
}

/// Outcome of the genericity pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenericReport {
    pub steps: usize,
    pub bound: u64,
    pub ratio_before: Rat,
    pub ratio_after: Rat,
    pub total_before: Rat,
    pub total_after: Rat,
    pub min_before: Rat,
    pub min_after: Rat,
    /// Every switch is trivalent, or 4-valent with a loopy edge.
    pub valences_ok: bool,
}

impl GenericReport {
    /// `ℓ < 2ℓ_pre` and `m ≥ m_pre / 2^E`.
    pub fn holds(&self) -> bool {
        self.total_after < &self.total_before * int(2)
            && self.min_after >= &self.min_before / pow2(self.bound as u32)
            && self.steps as u64 <= self.bound
            && self.valences_ok
    }
}

fn generic_ok(f: &Fbc, s: usize) -> bool {
    let v = f.valence(s);
    if v == 3 {
        return true;
    }
    if v == 4 {
        return [Side::T, Side::B].iter().any(|&side| f.slots(s, side).iter().any(|&(e, _)| f.edge_kind(e).is_loopy()));
    }
    false
}

/// Makes a uniform structure generic by splitting cusps at high-valence switches.
pub fn generic_pass(r: &mut Refiner) -> Result<GenericReport, ProcedureError> {
    let chi = chi_abs(r.current());
    let bound = 18 * chi;
    let pre = r.current().lambda_lengths();
    let mut steps = 0;
    r.set_context("generic");
    loop {
        let f = r.current();
        let bad = (0..f.num_switches()).filter(|&s| !generic_ok(f, s)).max_by_key(|&s| (f.valence(s), std::cmp::Reverse(s)));
        let Some(v) = bad else { break };
        if steps as u64 >= bound {
            break;
        }
        steps += 1;
        let vname = f.switch_name(v).to_string();
        let mut incident: Vec<String> = Vec::new();
        for side in [Side::T, Side::B] {
            for &(e, _) in f.slots(v, side) {
                let n = f.edge(e).name.clone();
                if !incident.contains(&n) {
                    incident.push(n);
                }
            }
        }
        for name in incident {
            let e = r.current().edge_by_name(&name).expect("incident edge");
            let half = &r.current().edge(e).length / int(2);
            r.subdivide(e, &[half]);
        }
        let f = r.current();
        let v = f.switch_by_name(&vname).expect("switch keeps its name");
        let side = if f.slots(v, Side::T).len() >= 2 { Side::T } else { Side::B };
        r.split_cusp(v, side, 0)?;
        r.remove_all_bivalent(None);
    }
    let post = r.current().lambda_lengths();
    let f = r.current();
    let valences_ok = (0..f.num_switches()).all(|s| generic_ok(f, s));
    Ok(GenericReport {
        steps,
        bound,
        ratio_before: pre.ratio(),
        ratio_after: post.ratio(),
        total_before: pre.total,
        total_after: post.total,
        min_before: pre.min,
        min_after: post.min,
        valences_ok,
    })
}

#[derive(Clone, Debug)]
pub struct UniformizeReport {
    pub structure: LambdaStructure,
    pub certificates: Vec<Certificate>,
    pub generic: Option<GenericReport>,
    pub trace: RefinementTrace,
    pub chi_abs: u64,
    pub c: Rat,
    pub l: Rat,
}

impl UniformizeReport {
    pub fn ratio(&self) -> Rat {
        self.structure.lambda_lengths().ratio()
    }

    /// Ratio bound the result must meet: `C`, or `2^(E+1) C` after the generic pass.
    pub fn ratio_bound(&self) -> Rat {
        match &self.generic {
            Some(g) => &self.c * pow2(g.bound as u32 + 1),
            None => self.c.clone(),
        }
    }

    pub fn uniform(&self) -> bool {
        let ll = self.structure.lambda_lengths();
        self.ratio() <= self.ratio_bound() && (self.generic.is_some() || ll.total >= self.l)
    }
}

/// Iterates the Main Procedure until `ℓ^λ ≤ C m^λ` and `ℓ^λ ≥ L`, then
/// optionally makes the result generic.
pub fn uniformize(ls: &LambdaStructure, c: &Rat, l: &Rat, generic: bool) -> Result<UniformizeReport, ProcedureError> {
    let mut r = Refiner::new(ls);
    let chi = chi_abs(r.current());
    let bound = int(1000 * chi as i64);
    if *c <= bound {
        return Err(ProcedureError::ConstantTooSmall { c: c.clone(), bound });
    }
    if *l <= Rat::zero() {
        return Err(ProcedureError::NonPositiveTarget);
    }
    let mut certificates = Vec::new();
    let cap = 64;
    loop {
        let ll = r.current().lambda_lengths();
        if ll.total <= c * &ll.min && ll.total >= *l {
            break;
        }
        if certificates.len() == cap {
            return Err(ProcedureError::NoConvergence(cap));
        }
        let cert = main_procedure(&mut r)?;
        cert.check()?;
        certificates.push(cert);
    }
    let generic = if generic { Some(generic_pass(&mut r)?) } else { None };
    let (last, trace) = r.into_parts();
    let structure = last.to_structure().map_err(ProcedureError::Invalid)?;
    Ok(UniformizeReport { structure, certificates, generic, trace, chi_abs: chi, c: c.clone(), l: l.clone() })
}
