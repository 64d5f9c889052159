//! Acceptance suite: one pass/fail line per criterion. Exits nonzero if any
//! criterion fails. Tolerances are zero throughout; all checks are exact.
//!
//! `TRACKLAB_SEED` overrides the corpus and random-spec seed (default 7).

use num::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use tracklab::cone::cone_rays;
use tracklab::corpus::certificate_corpus;
use tracklab::curves::{ivanov_bounds, twist_limit, TwistComponent, TwistSpec};
use tracklab::exceptional::n12_orbits;
use tracklab::lambda::{EdgeKind, LambdaStructure};
use tracklab::loops::{enumerate_loops, sidedness_parity, LegalLoop, Sidedness, Step};
use tracklab::one_vertex::{all_one_vertex_tracks, check_conditions, SwitchboardTrack};
use tracklab::procedure::{main_procedure, uniformize};
use tracklab::rat::{frac, int, pow2, Rat};
use tracklab::refine::{Expect, Fbc, Refiner};
use tracklab::surface::{max_multicurve, max_two_sided_multicurve, SurfaceSig};
use tracklab::track::{build, Side, TrainTrack};

type Outcome = Result<String, String>;

fn seed() -> u64 {
    std::env::var("TRACKLAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7)
}

/// `|χ|` from the classification of surfaces.
fn abs_chi(s: &SurfaceSig) -> i64 {
    let chi = if s.orientable { 2 - 2 * s.genus as i64 - s.boundary as i64 } else { 2 - s.genus as i64 - s.boundary as i64 };
    -chi
}

/// Interval of each slot on one side of a switch, laid left to right on `[0, W)`.
fn slot_intervals(f: &Fbc, s: usize, side: Side) -> Vec<((usize, usize), Rat, Rat)> {
    let mut x = int(0);
    f.slots(s, side)
        .iter()
        .map(|&(e, k)| {
            let a = x.clone();
            x += &f.edge(e).weight;
            ((e, k), a, x.clone())
        })
        .collect()
}

fn overlap(a0: &Rat, a1: &Rat, b0: &Rat, b1: &Rat) -> Rat {
    let lo = if a0 > b0 { a0 } else { b0 };
    let hi = if a1 < b1 { a1 } else { b1 };
    if hi > lo {
        hi - lo
    } else {
        int(0)
    }
}

/// The `T` and `B` intervals of a band with both ends at one switch.
struct Band {
    t: (Rat, Rat),
    b: (Rat, Rat),
}

/// `T` and `B` intervals of an edge whose ends sit on opposite sides of one switch.
fn band(f: &Fbc, e: usize) -> Option<Band> {
    let mut t = None;
    let mut b = None;
    for s in 0..f.num_switches() {
        for side in [Side::T, Side::B] {
            for (r, x0, x1) in slot_intervals(f, s, side) {
                if r.0 == e {
                    let slot = (s, x0, x1);
                    match side {
                        Side::T if t.is_none() => t = Some(slot),
                        Side::B if b.is_none() => b = Some(slot),
                        _ => return None,
                    }
                }
            }
        }
    }
    match (t, b) {
        (Some(t), Some(b)) if t.0 == b.0 => Some(Band { t: (t.1, t.2), b: (b.1, b.2) }),
        _ => None,
    }
}

/// Number of passes of the longest leaves through a loopy band: a leaf
/// entering at `T` position `x` returns at `x − d`, so with `0 < |d| < ω` it
/// passes `⌈ω/|d|⌉` times. `None` for bands that are not loopy.
fn loopy_passes(f: &Fbc, e: usize) -> Option<Rat> {
    let edge = f.edge(e);
    let bd = band(f, e)?;
    if edge.twist || overlap(&bd.t.0, &bd.t.1, &bd.b.0, &bd.b.1).is_zero() {
        return None;
    }
    let d = (&bd.t.0 - &bd.b.0).abs();
    if d.is_zero() || d >= edge.weight {
        return None;
    }
    Some((&edge.weight / &d).ceil())
}

/// `ℓ^λ(e)`. A twisted band whose leaves return closes them after two passes.
fn oracle_lambda(f: &Fbc, e: usize) -> Rat {
    let edge = f.edge(e);
    if let Some(p) = loopy_passes(f, e) {
        return &edge.length * p;
    }
    match band(f, e) {
        Some(bd) if edge.twist && !overlap(&bd.t.0, &bd.t.1, &bd.b.0, &bd.b.1).is_zero() => &edge.length * int(2),
        _ => edge.length.clone(),
    }
}

fn oracle_totals(f: &Fbc) -> (Rat, Rat) {
    let per: Vec<Rat> = (0..f.num_edges()).map(|e| oracle_lambda(f, e)).collect();
    let total = per.iter().sum();
    let min = per.iter().min().cloned().unwrap_or_else(|| int(0));
    (total, min)
}

/// Switch equations, positive weights and turn-mass marginals at every switch,
/// plus the winding bookkeeping of loopy edges.
fn oracle_conservation(f: &Fbc) -> Result<(), String> {
    for s in 0..f.num_switches() {
        let t = slot_intervals(f, s, Side::T);
        let b = slot_intervals(f, s, Side::B);
        let wt = t.last().map(|x| x.2.clone()).unwrap_or_else(|| int(0));
        let wb = b.last().map(|x| x.2.clone()).unwrap_or_else(|| int(0));
        if wt != wb {
            return Err(format!("switch {}: T width {} != B width {}", f.switch_name(s), wt, wb));
        }
        for (r, x0, x1) in t.iter().chain(&b) {
            if x1 <= x0 {
                return Err(format!("end {}.{} has non-positive weight", f.edge(r.0).name, r.1));
            }
        }
        for (r, x0, x1) in &t {
            let through: Rat = b.iter().map(|(_, y0, y1)| overlap(x0, x1, y0, y1)).sum();
            if through != x1 - x0 {
                return Err(format!("end {}.{}: turns carry {} of {}", f.edge(r.0).name, r.1, through, x1 - x0));
            }
        }
        for (r, y0, y1) in &b {
            let through: Rat = t.iter().map(|(_, x0, x1)| overlap(x0, x1, y0, y1)).sum();
            if through != y1 - y0 {
                return Err(format!("end {}.{}: turns carry {} of {}", f.edge(r.0).name, r.1, through, y1 - y0));
            }
        }
    }
    for e in 0..f.num_edges() {
        if let EdgeKind::Loopy(wd) = f.edge_kind(e) {
            let bd = band(f, e).ok_or_else(|| format!("loopy edge {} is not a band at one switch", f.edge(e).name))?;
            let w = int(wd.w as i64);
            let weight = &f.edge(e).weight;
            if &wd.mw * (&w + int(1)) + &wd.mw1 * (&w + int(2)) != *weight {
                return Err(format!("loopy edge {}: traversal masses do not sum to the weight", f.edge(e).name));
            }
            let self_turn = overlap(&bd.t.0, &bd.t.1, &bd.b.0, &bd.b.1);
            if self_turn != &wd.mw * &w + &wd.mw1 * (&w + int(1)) {
                return Err(format!("loopy edge {}: self-turn mass {}", f.edge(e).name, self_turn));
            }
            let d = (&bd.t.0 - &bd.b.0).abs();
            let want_w = (weight / &d).ceil() - int(2);
            if want_w != w {
                return Err(format!("loopy edge {}: winding {} instead of {}", f.edge(e).name, wd.w, want_w));
            }
        }
    }
    Ok(())
}

fn expect_holds(x: &Expect, delta: &Rat) -> bool {
    match x {
        Expect::Exact(v) => v == delta,
        Expect::OneOf(vs) => vs.contains(delta),
        Expect::Unchecked => true,
    }
}

struct CorpusRun {
    structures: Vec<LambdaStructure>,
    stats: String,
    build_secs: f64,
}

fn criterion_1(c: &CorpusRun) -> Outcome {
    let start = Instant::now();
    let mut worst_rounds = 0;
    for (i, ls) in c.structures.iter().enumerate() {
        let chi = abs_chi(&ls.track().surface().expect("corpus tracks have surfaces"));
        let f0 = Fbc::from_structure(ls);
        let (l0, m0) = oracle_totals(&f0);
        let mut r = Refiner::new(ls);
        let cert = main_procedure(&mut r).map_err(|e| format!("structure {i}: {e}"))?;
        let (l1, m1) = oracle_totals(r.current());
        if (&cert.l0, &cert.m0, &cert.l1, &cert.m1) != (&l0, &m0, &l1, &m1) {
            return Err(format!("structure {i}: certificate lengths disagree with recomputation"));
        }
        if m1 < &m0 * int(2) {
            return Err(format!("structure {i}: m {m0} -> {m1} did not double"));
        }
        if l1 >= &l0 + int(1000 * chi) * &m0 {
            return Err(format!("structure {i}: l {l0} -> {l1} exceeds l0 + 1000|chi| m0"));
        }
        if cert.rounds as i64 > 9 * chi {
            return Err(format!("structure {i}: {} rounds exceed 9|chi| = {}", cert.rounds, 9 * chi));
        }
        worst_rounds = worst_rounds.max(cert.rounds);
    }
    let secs = c.build_secs + start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("took {secs:.1}s, over a minute"));
    }
    Ok(format!("runs={} {} max_rounds={} seconds={:.1}", c.structures.len(), c.stats, worst_rounds, secs))
}

fn generic_valences_ok(ls: &LambdaStructure) -> bool {
    let f = Fbc::from_structure(ls);
    (0..f.num_switches()).all(|s| {
        let ends: Vec<usize> = [Side::T, Side::B].iter().flat_map(|&side| f.slots(s, side).iter().map(|r| r.0)).collect();
        match ends.len() {
            3 => true,
            4 => ends.iter().any(|&e| loopy_passes(&f, e).is_some()),
            _ => false,
        }
    })
}

fn criterion_2(c: &CorpusRun) -> Outcome {
    let inputs: Vec<&LambdaStructure> = c.structures.iter().filter(|ls| ls.track().num_edges() <= 4).collect();
    let mut runs = 0;
    for (i, ls) in inputs.iter().enumerate() {
        let chi = abs_chi(&ls.track().surface().unwrap());
        let cc = int(1000 * chi + 1);
        let (l_in, _) = oracle_totals(&Fbc::from_structure(ls));
        let l = &l_in * int(10);
        let rep = uniformize(ls, &cc, &l, false).map_err(|e| format!("input {i}: {e}"))?;
        let (lt, mt) = oracle_totals(&Fbc::from_structure(&rep.structure));
        if lt > &cc * &mt || lt < l {
            return Err(format!("input {i}: l={lt} m={mt} C={cc} L={l}"));
        }
        let rep = uniformize(ls, &cc, &l, true).map_err(|e| format!("input {i} generic: {e}"))?;
        let (lt, mt) = oracle_totals(&Fbc::from_structure(&rep.structure));
        let e_bound = 18 * chi;
        if lt > &cc * pow2(e_bound as u32 + 1) * &mt {
            return Err(format!("input {i} generic: ratio {} over 2^(E+1) C", &lt / &mt));
        }
        if !generic_valences_ok(&rep.structure) {
            return Err(format!("input {i} generic: a switch is neither trivalent nor 4-valent at a loopy edge"));
        }
        runs += 1;
    }
    Ok(format!("inputs={runs} modes=plain,generic"))
}

/// One-sided iff an odd number of traversals cross a band whose arrows
/// disagree: a twisted t-b band or an untwisted t-t or b-b band.
fn oracle_sidedness(t: &TrainTrack, l: &LegalLoop) -> Sidedness {
    let flips = l.steps.iter().filter(|s| {
        let e = t.edge(s.edge);
        e.twist != (e.ends[0].side == e.ends[1].side)
    });
    if flips.count() % 2 == 1 {
        Sidedness::OneSided
    } else {
        Sidedness::TwoSided
    }
}

fn recurrent_by_rays(t: &TrainTrack) -> bool {
    let rays = cone_rays(t);
    (0..t.num_edges()).all(|e| rays.iter().any(|r| r[e].is_positive()))
}

fn criterion_3() -> Outcome {
    let mut tracks = 0;
    let mut passing = 0;
    for n in 1..=4 {
        for t in all_one_vertex_tracks(n) {
            if !recurrent_by_rays(&t) {
                continue;
            }
            tracks += 1;
            let sb = SwitchboardTrack::new(t.clone()).map_err(|e| e.to_string())?;
            let pass = check_conditions(&sb).all_pass();
            let loops = enumerate_loops(&t, 2);
            for l in &loops {
                if oracle_sidedness(&t, &l.lp) != l.sidedness {
                    return Err(format!("sidedness of {} disagrees on\n{t:?}", l.lp.display(&t)));
                }
            }
            let two_sided = loops.iter().any(|l| oracle_sidedness(&t, &l.lp) == Sidedness::TwoSided);
            if pass == two_sided {
                return Err(format!("conditions {} but brute force two-sided={} on {:?}", pass, two_sided, t.edges()));
            }
            if pass {
                passing += 1;
                if let Some(l) = loops.iter().filter(|l| l.lp.len() <= 2).find(|l| oracle_sidedness(&t, &l.lp) == Sidedness::TwoSided) {
                    return Err(format!("short two-sided loop {} on a passing track", l.lp.display(&t)));
                }
            }
        }
    }
    Ok(format!("tracks={tracks} conditions_pass={passing} agreement=100%"))
}

fn criterion_4() -> Outcome {
    use Side::{B, T};
    // Arrow conventions of the instruction-manual pictures.
    let cases = [
        ("t-b untwisted", (0, T, 0), (0, B, 0), false, Sidedness::TwoSided),
        ("t-b twisted", (0, T, 0), (0, B, 0), true, Sidedness::OneSided),
        ("t-t untwisted", (0, T, 0), (0, T, 1), false, Sidedness::OneSided),
        ("t-t twisted", (0, T, 0), (0, T, 1), true, Sidedness::TwoSided),
    ];
    let mut ok = 0;
    for (name, a, b, tw, want) in cases {
        let mut edges = vec![("e", a, b, tw, int(1))];
        if a.1 == b.1 {
            edges.push(("f", (0, B, 0), (0, B, 1), false, int(1)));
        }
        let t = build(&["v"], &edges, None).map_err(|e| e.to_string())?;
        let got = sidedness_parity(&t, &LegalLoop::new(vec![Step { edge: 0, forward: true }])).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("{name}: {got} instead of {want}"));
        }
        ok += 1;
    }
    Ok(format!("{ok}/4"))
}

/// Rows of the switch equations: `T` ends count `+1`, `B` ends `−1`.
fn switch_rows(t: &TrainTrack) -> Vec<Vec<i64>> {
    (0..t.num_switches())
        .map(|s| {
            let mut row = vec![0; t.num_edges()];
            for &(e, _) in t.side_slots(s, Side::T) {
                row[e] += 1;
            }
            for &(e, _) in t.side_slots(s, Side::B) {
                row[e] -= 1;
            }
            row
        })
        .collect()
}

fn rank(rows: &[Vec<i64>], cols: &[usize]) -> usize {
    let mut m: Vec<Vec<Rat>> = rows.iter().map(|r| cols.iter().map(|&c| int(r[c])).collect()).collect();
    let mut rank = 0;
    for c in 0..cols.len() {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                for j in 0..cols.len() {
                    let d = &f * &m[rank][j];
                    m[i][j] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Extreme rays by brute force: primitive nonzero integer solutions with
/// entries at most `bound` whose support columns have a one-dimensional kernel.
fn brute_rays(t: &TrainTrack, bound: i64) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let rows = switch_rows(t);
    let n = t.num_edges();
    let member = |v: &[i64]| rows.iter().all(|r| r.iter().zip(v).map(|(a, b)| a * b).sum::<i64>() == 0);
    let mut members = Vec::new();
    let mut v = vec![0i64; n];
    loop {
        if v.iter().any(|&x| x > 0) && member(&v) {
            members.push(v.clone());
        }
        let mut i = 0;
        while i < n && v[i] == bound {
            v[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        v[i] += 1;
    }
    let rays = members
        .iter()
        .filter(|v| {
            let support: Vec<usize> = (0..n).filter(|&i| v[i] > 0).collect();
            v.iter().fold(0, |g, &x| gcd(g, x)) == 1 && rank(&rows, &support) + 1 == support.len()
        })
        .cloned()
        .collect();
    (rays, members)
}

fn criterion_5() -> Outcome {
    use Side::{B, T};
    let mut tracks: Vec<TrainTrack> = (1..=4).flat_map(all_one_vertex_tracks).collect();
    let extra = [
        build(&["u", "v"], &[("a", (0, T, 0), (0, B, 0), false, int(1)), ("b", (1, T, 0), (1, B, 0), true, int(1))], None),
        build(
            &["u", "v"],
            &[("a", (0, T, 0), (1, B, 0), false, int(2)), ("b", (0, T, 1), (1, B, 1), true, int(3)), ("c", (1, T, 0), (0, B, 0), false, int(5))],
            None,
        ),
        build(
            &["u", "v"],
            &[
                ("a", (0, T, 0), (1, B, 0), false, int(1)),
                ("b", (1, T, 0), (0, B, 0), false, int(1)),
                ("c", (0, T, 1), (1, B, 1), false, int(1)),
                ("d", (1, T, 1), (0, B, 1), true, int(1)),
            ],
            None,
        ),
        build(
            &["u", "v"],
            &[
                ("a", (0, T, 0), (1, T, 0), false, int(1)),
                ("b", (0, B, 0), (1, B, 0), false, int(1)),
                ("c", (0, B, 1), (1, B, 1), false, int(1)),
                ("d", (0, T, 1), (1, T, 1), false, int(1)),
            ],
            None,
        ),
    ];
    for t in extra {
        tracks.push(t.map_err(|e| e.to_string())?);
    }
    let mut total_rays = 0;
    for t in &tracks {
        let mut got: Vec<Vec<i64>> = cone_rays(t)
            .iter()
            .map(|r| r.iter().map(|x| i64::try_from(x.clone()).map_err(|_| "ray entry overflows".to_string())).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        if got.iter().any(|r| r.iter().any(|&x| x > 5)) {
            return Err(format!("a ray leaves the box on {:?}", t.edges()));
        }
        let (mut want, members) = brute_rays(t, 5);
        got.sort();
        want.sort();
        if got != want {
            return Err(format!("rays {got:?} != brute force {want:?} on {:?}", t.edges()));
        }
        for r in &got {
            let decomposes = members.iter().any(|u| u != r && u.iter().zip(r).all(|(a, b)| a <= b) && {
                let rest: Vec<i64> = r.iter().zip(u).map(|(a, b)| a - b).collect();
                members.contains(&rest)
            });
            if decomposes {
                return Err(format!("ray {r:?} decomposes"));
            }
        }
        total_rays += got.len();
    }
    Ok(format!("tracks={} rays={total_rays}", tracks.len()))
}

fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    frac(rng.gen_range(0..10), rng.gen_range(1..4))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed());
    let k: i64 = 1_000_000;
    for i in 0..100 {
        let r = rng.gen_range(1..=3);
        let comps: Vec<TwistComponent> = (0..r)
            .map(|j| {
                let mut n = rng.gen_range(-20..=20);
                if n == 0 {
                    n = 1;
                }
                TwistComponent { label: format!("g{j}"), exponent: n, i_alpha: random_rat(&mut rng), i_beta: random_rat(&mut rng) }
            })
            .collect();
        let iab = random_rat(&mut rng);
        // Limit computed directly: Σ |n_i| ι(α,γ_i) ι(γ_i,β).
        let direct: Rat = comps.iter().map(|c| int(c.exponent.abs()) * &c.i_alpha * &c.i_beta).sum();
        let pair: Rat = comps.iter().map(|c| &c.i_alpha * &c.i_beta).sum();
        let spec = TwistSpec::new(comps.clone(), iab.clone()).map_err(|e| e.to_string())?;
        let rows: Vec<Vec<Rat>> = vec![comps.iter().map(|c| c.i_beta.clone()).collect()];
        let lim = twist_limit(&spec, &["beta".to_string()], &rows).map_err(|e| e.to_string())?.values()[0].clone();
        if lim != direct {
            return Err(format!("spec {i}: limit {lim} != {direct}"));
        }
        let bounds = ivanov_bounds(&spec.power(k).map_err(|e| e.to_string())?).scaled(&frac(1, k));
        if !bounds.contains(&lim) {
            return Err(format!("spec {i}: {lim} outside [{}, {}]", bounds.lo, bounds.hi));
        }
        let width = (int(2) * &pair + int(2) * &iab) / int(k);
        if bounds.width() > width {
            return Err(format!("spec {i}: width {} over {width}", bounds.width()));
        }
    }
    Ok("specs=100 k=1000000".into())
}

fn criterion_7() -> Outcome {
    // c = 2k − 3 + r; c⁺ = (3k − 7 + 2r)/2 for odd k and (3k − 8 + 2r)/2 for even k.
    let c = |k: i64, r: i64| 2 * k - 3 + r;
    let cp = |k: i64, r: i64| if k % 2 == 1 { (3 * k - 7 + 2 * r) / 2 } else { (3 * k - 8 + 2 * r) / 2 };
    let n30 = SurfaceSig::nonorientable(3, 0);
    let n12 = SurfaceSig::nonorientable(1, 2);
    let got = [
        max_multicurve(&n30).map_err(|e| e.to_string())?,
        max_two_sided_multicurve(&n30).map_err(|e| e.to_string())?,
        max_two_sided_multicurve(&n12).map_err(|e| e.to_string())?,
        n12_orbits().pml.len() as i64,
    ];
    let want = [3, 1, 0, 2];
    let formula = [c(3, 0), cp(3, 0), cp(1, 2), 2];
    if got != want || formula != want {
        return Err(format!("got {got:?}, formula {formula:?}, expected {want:?}"));
    }
    Ok("c(N3,0)=3 c+(N3,0)=1 c+(N1,2)=0 pml(N1,2)=2".into())
}

fn criterion_8(c: &CorpusRun) -> Outcome {
    let mut moves = 0;
    let mut merges_into_loops = 0;
    for (i, ls) in c.structures.iter().enumerate() {
        let mut r = Refiner::new(ls);
        r.keep_snapshots(true);
        main_procedure(&mut r).map_err(|e| format!("structure {i}: {e}"))?;
        let (last, trace) = r.into_parts();
        let mut prev = trace.initial.clone();
        for (j, (m, f)) in trace.moves.iter().zip(&trace.snapshots).enumerate() {
            let at = || format!("structure {i} move {j} ({} {})", m.kind, m.target);
            oracle_conservation(f).map_err(|e| format!("{}: {e}", at()))?;
            let (before, _) = oracle_totals(&prev);
            let (after, _) = oracle_totals(f);
            if before != m.lambda_before || after != m.lambda_after {
                return Err(format!("{}: recorded lambda-lengths differ from recomputation", at()));
            }
            if !expect_holds(&m.expect, &(&after - &before)) {
                return Err(format!("{}: lambda-length changed by {} against {:?}", at(), &after - &before, m.expect));
            }
            if let Some(e) = &m.conservation_error {
                return Err(format!("{}: {e}", at()));
            }
            if m.note.is_some() {
                merges_into_loops += 1;
            }
            prev = f.clone();
            moves += 1;
        }
        if trace.snapshots.len() != trace.moves.len() {
            return Err(format!("structure {i}: snapshot count differs from move count"));
        }
        if !trace.all_ok() {
            return Err(format!("structure {i}: a composite move failed its accounting"));
        }
        trace.verify(&last).map_err(|e| format!("structure {i}: carrying map: {e}"))?;
    }
    Ok(format!("structures={} moves={moves} merges_into_loopy={merges_into_loops}", c.structures.len()))
}

fn main() {
    let start = Instant::now();
    let (structures, stats) = certificate_corpus(5, 10, seed());
    let corpus = CorpusRun {
        stats: format!("tracks={:?} admitted={:?}", &stats.tracks[2..], &stats.admitted[2..]).replace(", ", ","),
        structures,
        build_secs: start.elapsed().as_secs_f64(),
    };
    let criteria: [(&str, Box<dyn Fn() -> Outcome + '_>); 8] = [
        ("main-procedure-certificate", Box::new(|| criterion_1(&corpus))),
        ("uniformize-certificate", Box::new(|| criterion_2(&corpus))),
        ("one-vertex-equivalence", Box::new(criterion_3)),
        ("sidedness-convention", Box::new(criterion_4)),
        ("cone-correctness", Box::new(criterion_5)),
        ("ivanov-limit", Box::new(criterion_6)),
        ("formula-spot-checks", Box::new(criterion_7)),
        ("conservation", Box::new(|| criterion_8(&corpus))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        match run() {
            Ok(detail) => println!("criterion {} {name}: PASS {detail} ({:.1}s)", i + 1, t.elapsed().as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL {why} ({:.1}s)", i + 1, t.elapsed().as_secs_f64());
            }
        }
    }
    println!("acceptance: {}/8 passed, seed={}", 8 - failed, seed());
    if failed > 0 {
        std::process::exit(1);
    }
}
