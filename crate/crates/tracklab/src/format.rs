//! The line-oriented `.tt` track format.
//!
//! ```text
//! surface N 3 0
//! switch v
//! edge a v.T.0 v.B.1 twist=0 len=1
//! edge e v.T.1 v.B.0 twist=0 len=2
//! weight a=1
//! weight e=5/2
//! turn v e.1 a.0 mass=1
//! loopy e w=1 mw=1/2 mw1=1
//! ```
//!
//! Weights are all-or-none. `turn` and `loopy` lines are optional; when
//! present they must agree with the data derived from the weights, and the
//! `turn` lines must list every turn of positive mass.

use crate::lambda::{EdgeKind, LambdaStructure};
use crate::rat::{fmt_rat, parse_rat, Rat};
use crate::refine::{Fbc, RefinementTrace};
use crate::surface::SurfaceSig;
use crate::track::{Edge, End, Side, TrackError, TrainTrack};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Syntax,
    Semantic,
}

/// A parse failure at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub class: ErrorClass,
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let class = match self.class {
            ErrorClass::Syntax => "syntax",
            ErrorClass::Semantic => "semantic",
        };
        write!(f, "{}:{}: {} error: {}", self.line, self.col, class, self.msg)
    }
}

impl std::error::Error for ParseError {}

/// A parsed file. `structure` is present when weights were given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrackFile {
    pub track: TrainTrack,
    pub structure: Option<LambdaStructure>,
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push(Tok { text: &line[s..i], col: line[..s].chars().count() + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: line[..s].chars().count() + 1 });
    }
    out
}

fn valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

struct Ctx {
    line: usize,
}

impl Ctx {
    fn syntax(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { class: ErrorClass::Syntax, line: self.line, col, msg: msg.into() }
    }

    fn semantic(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError { class: ErrorClass::Semantic, line: self.line, col, msg: msg.into() }
    }

    fn name<'a>(&self, t: &Tok<'a>) -> Result<&'a str, ParseError> {
        if valid_name(t.text) {
            Ok(t.text)
        } else {
            Err(self.syntax(t.col, format!("bad name {:?}", t.text)))
        }
    }

    /// `key=value` with a rational value.
    fn keyed_rat(&self, t: &Tok<'_>, key: &str) -> Result<Rat, ParseError> {
        let v = self.keyed(t, key)?;
        parse_rat(v).ok_or_else(|| self.syntax(t.col + key.len() + 1, format!("bad rational {v:?}")))
    }

    fn keyed<'a>(&self, t: &Tok<'a>, key: &str) -> Result<&'a str, ParseError> {
        t.text
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| self.syntax(t.col, format!("expected {key}=...")))
    }

    fn arity(&self, toks: &[Tok<'_>], n: usize, usage: &str) -> Result<(), ParseError> {
        if toks.len() == n {
            Ok(())
        } else {
            let col = toks.get(n).map_or(toks.last().map_or(1, |t| t.col + t.text.len()), |t| t.col);
            Err(self.syntax(col, format!("expected `{usage}`")))
        }
    }
}

/// Where each edge and weight was declared, for semantic diagnostics.
struct Spans {
    edge_line: Vec<usize>,
}

/// Parses a whole file.
pub fn parse(src: &str) -> Result<TrackFile, ParseError> {
    let mut surface: Option<SurfaceSig> = None;
    let mut switches: Vec<String> = Vec::new();
    let mut switch_index: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut spans = Spans { edge_line: Vec::new() };
    let mut edge_index: HashMap<String, usize> = HashMap::new();
    let mut weights: BTreeMap<usize, (Rat, usize)> = BTreeMap::new();
    let mut turns: Vec<(usize, String, (usize, usize), (usize, usize), Rat)> = Vec::new();
    let mut loopy: Vec<(usize, usize, u64, Rat, Rat)> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let cx = Ctx { line: i + 1 };
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(head) = toks.first() else { continue };
        match head.text {
            "surface" => {
                cx.arity(&toks, 4, "surface O|N <genus> <boundary>")?;
                if surface.is_some() {
                    return Err(cx.semantic(head.col, "second surface line"));
                }
                let orientable = match toks[1].text {
                    "O" => true,
                    "N" => false,
                    _ => return Err(cx.syntax(toks[1].col, "expected O or N")),
                };
                let num = |t: &Tok<'_>| t.text.parse::<u32>().map_err(|_| cx.syntax(t.col, format!("bad count {:?}", t.text)));
                let (g, r) = (num(&toks[2])?, num(&toks[3])?);
                if !orientable && g == 0 {
                    return Err(cx.semantic(toks[2].col, "a non-orientable surface needs at least one cross-cap"));
                }
                surface = Some(SurfaceSig { orientable, genus: g, boundary: r });
            }
            "switch" => {
                cx.arity(&toks, 2, "switch <name>")?;
                let n = cx.name(&toks[1])?;
                if switch_index.insert(n.to_string(), switches.len()).is_some() {
                    return Err(cx.semantic(toks[1].col, format!("switch {n} declared twice")));
                }
                switches.push(n.to_string());
            }
            "edge" => {
                cx.arity(&toks, 6, "edge <name> <sw>.<T|B>.<slot> <sw>.<T|B>.<slot> twist=<0|1> len=<rational>")?;
                let n = cx.name(&toks[1])?;
                let mut ends = [End::new(0, Side::T, 0); 2];
                for k in 0..2 {
                    let t = &toks[2 + k];
                    let parts: Vec<&str> = t.text.split('.').collect();
                    if parts.len() != 3 {
                        return Err(cx.syntax(t.col, format!("expected <switch>.<T|B>.<slot>, got {:?}", t.text)));
                    }
                    let s = *switch_index.get(parts[0]).ok_or_else(|| cx.semantic(t.col, format!("undeclared switch {}", parts[0])))?;
                    let side = match parts[1] {
                        "T" => Side::T,
                        "B" => Side::B,
                        _ => return Err(cx.syntax(t.col + parts[0].len() + 1, "expected T or B")),
                    };
                    let slot = parts[2].parse::<usize>().map_err(|_| cx.syntax(t.col + parts[0].len() + 3, format!("bad slot {:?}", parts[2])))?;
                    ends[k] = End::new(s, side, slot);
                }
                let twist = match cx.keyed(&toks[4], "twist")? {
                    "0" => false,
                    "1" => true,
                    _ => return Err(cx.syntax(toks[4].col + 6, "twist must be 0 or 1")),
                };
                let length = cx.keyed_rat(&toks[5], "len")?;
                if edge_index.insert(n.to_string(), edges.len()).is_some() {
                    return Err(cx.semantic(toks[1].col, format!("edge {n} declared twice")));
                }
                edges.push(Edge { name: n.to_string(), ends, twist, length });
                spans.edge_line.push(cx.line);
            }
            "weight" => {
                cx.arity(&toks, 2, "weight <edge>=<rational>")?;
                let t = &toks[1];
                let (n, v) = t.text.split_once('=').ok_or_else(|| cx.syntax(t.col, "expected <edge>=<rational>"))?;
                let e = *edge_index.get(n).ok_or_else(|| cx.semantic(t.col, format!("undeclared edge {n}")))?;
                let w = parse_rat(v).ok_or_else(|| cx.syntax(t.col + n.len() + 1, format!("bad rational {v:?}")))?;
                if weights.insert(e, (w, cx.line)).is_some() {
                    return Err(cx.semantic(t.col, format!("weight of {n} given twice")));
                }
            }
            "turn" => {
                cx.arity(&toks, 5, "turn <switch> <edge>.<0|1> <edge>.<0|1> mass=<rational>")?;
                let s = cx.name(&toks[1])?;
                let mut refs = [(0, 0); 2];
                for k in 0..2 {
                    let t = &toks[2 + k];
                    let (n, end) = t.text.split_once('.').ok_or_else(|| cx.syntax(t.col, "expected <edge>.<0|1>"))?;
                    let e = *edge_index.get(n).ok_or_else(|| cx.semantic(t.col, format!("undeclared edge {n}")))?;
                    let end = match end {
                        "0" => 0,
                        "1" => 1,
                        _ => return Err(cx.syntax(t.col + n.len() + 1, "end must be 0 or 1")),
                    };
                    refs[k] = (e, end);
                }
                let mass = cx.keyed_rat(&toks[4], "mass")?;
                turns.push((cx.line, s.to_string(), refs[0], refs[1], mass));
            }
            "loopy" => {
                cx.arity(&toks, 5, "loopy <edge> w=<int> mw=<rational> mw1=<rational>")?;
                let n = cx.name(&toks[1])?;
                let e = *edge_index.get(n).ok_or_else(|| cx.semantic(toks[1].col, format!("undeclared edge {n}")))?;
                let w = cx.keyed(&toks[2], "w")?.parse::<u64>().map_err(|_| cx.syntax(toks[2].col + 2, "w must be a nonnegative integer"))?;
                let mw = cx.keyed_rat(&toks[3], "mw")?;
                let mw1 = cx.keyed_rat(&toks[4], "mw1")?;
                loopy.push((cx.line, e, w, mw, mw1));
            }
            other => return Err(cx.syntax(head.col, format!("unknown directive {other:?}"))),
        }
    }
    let end_line = src.lines().count().max(1);
    let declared: Vec<[End; 2]> = edges.iter().map(|e| e.ends).collect();
    let track = TrainTrack::new(switches, edges, surface).map_err(|e| {
        let line = match &e {
            TrackError::NonPositiveLength(n) | TrackError::DuplicateName(n) => {
                edge_index.get(n).map_or(end_line, |&i| spans.edge_line[i])
            }
            // The second edge claiming the slot.
            TrackError::DuplicateSlot { switch, side, slot } => {
                let s = switch_index.get(switch).copied();
                let hits = |ends: &[End; 2]| ends.iter().filter(|x| Some(x.switch) == s && x.side == *side && x.slot == *slot).count();
                let mut seen = 0;
                declared
                    .iter()
                    .position(|ends| {
                        seen += hits(ends);
                        seen >= 2
                    })
                    .map_or(end_line, |i| spans.edge_line[i])
            }
            _ => end_line,
        };
        ParseError { class: ErrorClass::Semantic, line, col: 1, msg: e.to_string() }
    })?;
    let semantic_at = |line: usize, msg: String| ParseError { class: ErrorClass::Semantic, line, col: 1, msg };
    if weights.is_empty() {
        if let Some(t) = turns.first() {
            return Err(semantic_at(t.0, "turn data needs weights".into()));
        }
        if let Some(l) = loopy.first() {
            return Err(semantic_at(l.0, "loopy data needs weights".into()));
        }
        return Ok(TrackFile { track, structure: None });
    }
    if let Some(e) = (0..track.num_edges()).find(|e| !weights.contains_key(e)) {
        return Err(semantic_at(spans.edge_line[e], format!("edge {} has no weight", track.edge(e).name)));
    }
    let last_weight = weights.values().map(|(_, l)| *l).max().unwrap_or(end_line);
    let w: Vec<Rat> = weights.into_values().map(|(w, _)| w).collect();
    let ls = LambdaStructure::new_unchecked(track.clone(), w).map_err(|e| semantic_at(last_weight, e.to_string()))?;
    check_turns(&ls, &turns)?;
    check_loopy(&ls, &loopy)?;
    Ok(TrackFile { track, structure: Some(ls) })
}

type TurnLine = (usize, String, (usize, usize), (usize, usize), Rat);

fn check_turns(ls: &LambdaStructure, lines: &[TurnLine]) -> Result<(), ParseError> {
    if lines.is_empty() {
        return Ok(());
    }
    let t = ls.track();
    let derived: BTreeSet<(usize, (usize, usize), (usize, usize), Rat)> = ls.turns().into_iter().map(|x| (x.switch, x.inbound, x.outbound, x.mass)).collect();
    let mut given = BTreeSet::new();
    for (line, s, a, b, m) in lines {
        let err = |msg: String| ParseError { class: ErrorClass::Semantic, line: *line, col: 1, msg };
        let s = t.switch_index(s).ok_or_else(|| err(format!("undeclared switch {s}")))?;
        let key = (s, *a, *b, m.clone());
        if !derived.contains(&key) {
            return Err(err(format!(
                "turn {}.{} -> {}.{} with mass {} is not a turn of the weights",
                t.edge(a.0).name,
                a.1,
                t.edge(b.0).name,
                b.1,
                fmt_rat(m)
            )));
        }
        given.insert(key);
    }
    if let Some(missing) = derived.iter().find(|k| !given.contains(*k)) {
        let line = lines.last().map_or(1, |l| l.0);
        return Err(ParseError {
            class: ErrorClass::Semantic,
            line,
            col: 1,
            msg: format!("turn {}.{} -> {}.{} is missing", t.edge(missing.1 .0).name, missing.1 .1, t.edge(missing.2 .0).name, missing.2 .1),
        });
    }
    Ok(())
}

fn check_loopy(ls: &LambdaStructure, lines: &[(usize, usize, u64, Rat, Rat)]) -> Result<(), ParseError> {
    for (line, e, w, mw, mw1) in lines {
        let err = |msg: String| ParseError { class: ErrorClass::Semantic, line: *line, col: 1, msg };
        match ls.edge_kind(*e) {
            EdgeKind::Loopy(wd) => {
                if wd.w != *w || wd.mw != *mw || wd.mw1 != *mw1 {
                    return Err(err(format!(
                        "edge {} has w={} mw={} mw1={}",
                        ls.track().edge(*e).name,
                        wd.w,
                        fmt_rat(&wd.mw),
                        fmt_rat(&wd.mw1)
                    )));
                }
            }
            k => return Err(err(format!("edge {} is {k}, not loopy", ls.track().edge(*e).name))),
        }
    }
    Ok(())
}

fn end_str(t: &TrainTrack, end: End) -> String {
    format!("{}.{}.{}", t.switch_name(end.switch), end.side, end.slot)
}

/// Canonical text of a track and, optionally, its weights with the derived
/// turn and loopy lines.
pub fn serialize(track: &TrainTrack, structure: Option<&LambdaStructure>) -> String {
    let mut out = String::new();
    if let Some(s) = track.surface() {
        out.push_str(&format!("surface {s}\n"));
    }
    for s in track.switch_names() {
        out.push_str(&format!("switch {s}\n"));
    }
    for e in track.edges() {
        out.push_str(&format!(
            "edge {} {} {} twist={} len={}\n",
            e.name,
            end_str(track, e.ends[0]),
            end_str(track, e.ends[1]),
            u8::from(e.twist),
            fmt_rat(&e.length)
        ));
    }
    if let Some(ls) = structure {
        for (e, w) in track.edges().iter().zip(ls.weights()) {
            out.push_str(&format!("weight {}={}\n", e.name, fmt_rat(w)));
        }
        for t in ls.turns() {
            out.push_str(&format!(
                "turn {} {}.{} {}.{} mass={}\n",
                track.switch_name(t.switch),
                track.edge(t.inbound.0).name,
                t.inbound.1,
                track.edge(t.outbound.0).name,
                t.outbound.1,
                fmt_rat(&t.mass)
            ));
        }
        for e in 0..track.num_edges() {
            if let EdgeKind::Loopy(wd) = ls.edge_kind(e) {
                out.push_str(&format!("loopy {} w={} mw={} mw1={}\n", track.edge(e).name, wd.w, fmt_rat(&wd.mw), fmt_rat(&wd.mw1)));
            }
        }
    }
    out
}

/// The trace block: one `move` line per primitive move, one `composite`
/// line per comb, unmask or unloop, and the composed carrying map as one
/// `carry` line per final edge, each segment `<initial edge>:<from>:<to>` in
/// length coordinates from end 0.
pub fn serialize_trace(trace: &RefinementTrace, last: &Fbc) -> String {
    let mut out = String::from("# trace\n");
    for (i, m) in trace.moves.iter().enumerate() {
        out.push_str(&format!(
            "move index={} kind={} target={} lw0={} lw1={} mw0={} mw1={} ok={}",
            i,
            m.kind,
            m.target,
            fmt_rat(&m.lambda_before),
            fmt_rat(&m.lambda_after),
            fmt_rat(&m.m_before),
            fmt_rat(&m.m_after),
            m.ok()
        ));
        if let Some(n) = &m.note {
            out.push_str(&format!(" note={}", n.replace(' ', "_")));
        }
        out.push('\n');
    }
    for c in &trace.composites {
        out.push_str(&format!("composite kind={} target={} moves={}..{} ok={}\n", c.kind, c.target, c.moves.start, c.moves.end, c.ok));
    }
    let paths = trace.compose();
    for (e, path) in paths.iter().enumerate() {
        let segs: Vec<String> =
            path.iter().map(|s| format!("{}:{}:{}", trace.initial.edge(s.edge).name, fmt_rat(&s.from), fmt_rat(&s.to))).collect();
        out.push_str(&format!("carry {} {}\n", last.edge(e).name, segs.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::frac;

    const LOOPY: &str = "\
# a rotation of a circle of length 7/2
surface N 3 0
switch v
edge a v.T.0 v.B.1 twist=0 len=1
edge e v.T.1 v.B.0 twist=0 len=2
weight a=1
weight e=5/2
";

    #[test]
    fn minimal_file_parses() {
        let f = parse("switch v\nedge a v.T.0 v.B.0 twist=1 len=3/2\n").unwrap();
        assert_eq!(f.track.num_edges(), 1);
        assert_eq!(f.track.edge(0).length, frac(3, 2));
        assert!(f.structure.is_none());
    }

    #[test]
    fn round_trip_with_derived_lines() {
        let f = parse(LOOPY).unwrap();
        let text = serialize(&f.track, f.structure.as_ref());
        assert!(text.contains("loopy e w=1"));
        assert!(text.contains("turn v"));
        let g = parse(&text).unwrap();
        assert_eq!(f, g);
        assert_eq!(serialize(&g.track, g.structure.as_ref()), text);
    }

    #[test]
    fn duplicate_slot_is_semantic() {
        let e = parse("switch v\nedge a v.T.0 v.B.0 twist=0 len=1\nedge b v.T.0 v.B.1 twist=0 len=1\n").unwrap_err();
        assert_eq!(e.class, ErrorClass::Semantic);
        assert!(e.msg.contains("slot"), "{e}");
        assert_eq!(e.line, 3);
    }

    #[test]
    fn diagnostics_point_at_the_token() {
        let e = parse("switch v\nedge a v.X.0 v.B.0 twist=0 len=1\n").unwrap_err();
        assert_eq!((e.class, e.line, e.col), (ErrorClass::Syntax, 2, 10));
        let e = parse("switch v\nedge a w.T.0 v.B.0 twist=0 len=1\n").unwrap_err();
        assert_eq!((e.class, e.line, e.col), (ErrorClass::Semantic, 2, 8));
        let e = parse("switch v\nedge a v.T.0 v.B.0 twist=0 len=x\n").unwrap_err();
        assert_eq!((e.class, e.line, e.col), (ErrorClass::Syntax, 2, 32));
    }

    #[test]
    fn wrong_turn_or_winding_is_rejected() {
        let bad = format!("{LOOPY}loopy e w=2 mw=1 mw1=1\n");
        assert_eq!(parse(&bad).unwrap_err().class, ErrorClass::Semantic);
        let bad = format!("{LOOPY}turn v a.1 a.0 mass=1\n");
        assert_eq!(parse(&bad).unwrap_err().class, ErrorClass::Semantic);
        let partial = format!("{LOOPY}weight a=1\n");
        assert_eq!(parse(&partial).unwrap_err().class, ErrorClass::Semantic);
        let missing = LOOPY.replace("weight e=5/2\n", "");
        assert_eq!(parse(&missing).unwrap_err().class, ErrorClass::Semantic);
        assert_eq!(parse("switch v\nweight a=1\n").unwrap_err().class, ErrorClass::Semantic);
    }
}
