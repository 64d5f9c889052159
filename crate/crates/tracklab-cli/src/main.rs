//! `tracklab`: command-line access to tracks, cones, carried curves and the
//! uniformization procedure.
//!
//! Machine output is one record per line, each a run of `key=value` pairs.
//! `--pretty` prints the same records one pair per line for reading.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tracklab::cone::{cone_rays, is_recurrent};
use tracklab::curves::{ivanov_bounds, scharlemann_atom, twist_limit_at_beta, AtomDecision, IntersectionVector, ProjectivePlane, TwistComponent, TwistSpec};
use tracklab::exceptional::{n12_orbits, n21_limit, n21_twist_orbit, n30_structure, N21Data};
use tracklab::format::{parse, serialize, serialize_trace, ErrorClass, TrackFile};
use tracklab::lambda::LambdaStructure;
use tracklab::loops::enumerate_loops;
use tracklab::one_vertex::{check_conditions, two_sided_witness, SwitchboardTrack};
use tracklab::procedure::{uniformize, ProcedureError};
use tracklab::rat::{fmt_rat, int, parse_rat, Rat};
use tracklab::refine::Fbc;
use tracklab::track::validate;

const EXIT_SEMANTIC: u8 = 3;
const EXIT_SYNTAX: u8 = 4;
const EXIT_INVALID: u8 = 5;
const EXIT_CERTIFICATE: u8 = 6;
const EXIT_PROCEDURE: u8 = 7;
const EXIT_IO: u8 = 8;

#[derive(Parser)]
#[command(name = "tracklab", version, about = "Train tracks, measured laminations and the uniformization procedure")]
struct Cli {
    /// Human-readable output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a track file and run the structural checks.
    Validate {
        file: PathBuf,
        /// Also require the surface bounds and the region census.
        #[arg(long)]
        strict: bool,
    },
    /// Extreme rays of the weight cone.
    Rays { file: PathBuf },
    /// Carried simple closed curves with bounded multiplicity.
    Loops {
        file: PathBuf,
        #[arg(long = "max-mult", default_value_t = 2)]
        max_mult: u64,
    },
    /// Whether a one-vertex track carries a two-sided curve.
    TwoSided { file: PathBuf },
    /// Run the Main Procedure until the structure is uniform.
    Uniformize {
        file: PathBuf,
        /// Ratio bound; defaults to 1000|χ| + 1.
        #[arg(long = "C", value_parser = rat_arg)]
        c: Option<Rat>,
        /// Total λ-length target; defaults to ten times the input's.
        #[arg(long = "L", value_parser = rat_arg)]
        l: Option<Rat>,
        #[arg(long)]
        generic: bool,
        /// Write the resulting structure here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the move trace and carrying map here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Bounds on ι(T(α), β) for a product of Dehn twists.
    TwistBounds {
        /// Twist exponents, comma-separated, one per curve.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        n: Vec<i64>,
        /// ι(α, γi), one per curve.
        #[arg(long, value_delimiter = ',', value_parser = rat_arg, required = true)]
        iag: Vec<Rat>,
        /// ι(γi, β), one per curve.
        #[arg(long, value_delimiter = ',', value_parser = rat_arg, required = true)]
        igb: Vec<Rat>,
        /// ι(α, β).
        #[arg(long, value_parser = rat_arg)]
        iab: Rat,
    },
    /// Whether the core of a two-holed projective plane is an atom.
    AtomCheck {
        /// ι(λ, η) for the dual curve.
        #[arg(long, value_parser = rat_arg)]
        ieta: Rat,
        /// ι(λ, α) for each boundary curve, comma-separated.
        #[arg(long, value_delimiter = ',', value_parser = rat_arg, required = true)]
        ibnd: Vec<Rat>,
    },
    /// Facts about the exceptional surfaces n12, n21 and n30.
    Exceptional {
        model: Model,
        /// Number of twist steps reported for n21.
        #[arg(long, default_value_t = 10)]
        orbit: u32,
        /// ι(γ0, α) for n21.
        #[arg(long, value_parser = rat_arg, default_value = "1")]
        iga: Rat,
        /// ι(γ0, β) for n21.
        #[arg(long, value_parser = rat_arg, default_value = "1")]
        igb: Rat,
        /// ι(α, β) for n21.
        #[arg(long, value_parser = rat_arg, default_value = "1")]
        iab: Rat,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Model {
    N12,
    N21,
    N30,
}

fn rat_arg(s: &str) -> Result<Rat, String> {
    parse_rat(s).ok_or_else(|| format!("not a rational: {s}"))
}

/// A failed command: an exit code and a message for stderr.
struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl Into<String>) -> Failure {
    Failure { code, msg: msg.into() }
}

type Record = Vec<(String, String)>;

#[derive(Default)]
struct Output {
    records: Vec<Record>,
}

impl Output {
    fn line<K: Into<String>, V: ToString>(&mut self, pairs: impl IntoIterator<Item = (K, V)>) {
        self.records.push(pairs.into_iter().map(|(k, v)| (k.into(), v.to_string())).collect());
    }

    fn kv(&mut self, k: &str, v: impl ToString) {
        self.line([(k, v)]);
    }

    fn render(&self, pretty: bool) -> String {
        let mut s = String::new();
        for r in &self.records {
            if pretty {
                let w = r.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                for (k, v) in r {
                    s.push_str(&format!("{k:<w$}  {v}\n"));
                }
                if r.len() > 1 {
                    s.push('\n');
                }
            } else {
                let parts: Vec<String> = r.iter().map(|(k, v)| format!("{k}={v}")).collect();
                s.push_str(&parts.join(" "));
                s.push('\n');
            }
        }
        s
    }
}

fn load(path: &Path) -> Result<TrackFile, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    parse(&src).map_err(|e| {
        let code = match e.class {
            ErrorClass::Syntax => EXIT_SYNTAX,
            ErrorClass::Semantic => EXIT_SEMANTIC,
        };
        fail(code, format!("{}:{e}", path.display()))
    })
}

fn weighted(f: TrackFile) -> Result<LambdaStructure, Failure> {
    let s = f.structure.ok_or_else(|| fail(EXIT_INVALID, "the file has no weights"))?;
    LambdaStructure::new(s.track().clone(), s.weights().to_vec()).map_err(|e| fail(EXIT_INVALID, e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn run(cmd: Command, out: &mut Output) -> Result<(), Failure> {
    match cmd {
        Command::Validate { file, strict } => {
            let f = load(&file)?;
            let rep = validate(&f.track, strict);
            out.kv("switches", rep.switches);
            out.kv("edges", rep.edges);
            out.kv("reduced_switches", rep.reduced_switches);
            out.kv("reduced_edges", rep.reduced_edges);
            out.kv("regions", rep.regions.len());
            out.kv("filling", rep.filling.map_or("unknown".to_string(), |b| b.to_string()));
            out.kv("orientable_thickening", rep.thickening_orientable);
            if let Some(s) = f.track.surface() {
                out.kv("surface", s.to_string().replace(' ', ","));
            }
            if let Some(ls) = &f.structure {
                out.kv("weights_ok", LambdaStructure::new(ls.track().clone(), ls.weights().to_vec()).is_ok());
            }
            for e in &rep.errors {
                out.kv("error", e.replace(' ', "_"));
            }
            out.kv("valid", rep.is_valid());
            if !rep.is_valid() {
                return Err(fail(EXIT_INVALID, format!("{} failed validation", file.display())));
            }
        }
        Command::Rays { file } => {
            let t = load(&file)?.track;
            let rays = cone_rays(&t);
            out.kv("rays", rays.len());
            for r in &rays {
                let v: Vec<String> = t.edges().iter().zip(r).map(|(e, x)| format!("{}:{x}", e.name)).collect();
                out.kv("ray", v.join(","));
            }
            out.kv("recurrent", is_recurrent(&t));
        }
        Command::Loops { file, max_mult } => {
            let t = load(&file)?.track;
            let loops = enumerate_loops(&t, max_mult);
            out.kv("loops", loops.len());
            for l in &loops {
                out.line([("loop", l.lp.display(&t).replace(' ', ",")), ("sidedness", l.sidedness.to_string())]);
            }
        }
        Command::TwoSided { file } => {
            let t = load(&file)?.track;
            let sb = SwitchboardTrack::new(t.clone()).map_err(|e| fail(EXIT_INVALID, e.to_string()))?;
            if !is_recurrent(&t) {
                return Err(fail(EXIT_INVALID, "the track is not recurrent"));
            }
            let rep = check_conditions(&sb);
            for (i, p) in rep.passes.iter().enumerate() {
                out.kv(&format!("condition{}", i + 1), if *p { "pass" } else { "fail" });
            }
            for d in &rep.details {
                out.kv("detail", d.replace(' ', "_"));
            }
            let witness = two_sided_witness(&t, 2);
            out.kv("conditions_pass", rep.all_pass());
            out.kv("carries_two_sided", !rep.all_pass());
            out.kv("witness", witness.as_ref().map_or("none".to_string(), |w| w.display(&t).replace(' ', ",")));
            out.kv("oracle_agrees", rep.all_pass() == witness.is_none());
        }
        Command::Uniformize { file, c, l, generic, out: out_path, trace } => {
            let ls = weighted(load(&file)?)?;
            let chi = match ls.track().surface() {
                Some(s) => s.abs_chi(),
                None => tracklab::procedure::chi_abs(&Fbc::from_structure(&ls)),
            };
            let c = c.unwrap_or_else(|| int(1000 * chi as i64 + 1));
            let l = l.unwrap_or_else(|| ls.lambda_lengths().total * int(10));
            let rep = uniformize(&ls, &c, &l, generic).map_err(|e| match e {
                ProcedureError::CertificateViolation(_) => fail(EXIT_CERTIFICATE, e.to_string()),
                _ => fail(EXIT_PROCEDURE, e.to_string()),
            })?;
            for (i, cert) in rep.certificates.iter().enumerate() {
                out.line([
                    ("run", i.to_string()),
                    ("mw0", fmt_rat(&cert.m0)),
                    ("mw1", fmt_rat(&cert.m1)),
                    ("lw0", fmt_rat(&cert.l0)),
                    ("lw1", fmt_rat(&cert.l1)),
                    ("rounds", cert.rounds.to_string()),
                    ("ratio", fmt_rat(&(&cert.l1 / &cert.m1))),
                    ("C", fmt_rat(&c)),
                ]);
            }
            if let Some(g) = &rep.generic {
                out.line([
                    ("generic_steps", g.steps.to_string()),
                    ("bound", g.bound.to_string()),
                    ("valences_ok", g.valences_ok.to_string()),
                    ("holds", g.holds().to_string()),
                ]);
            }
            let ll = rep.structure.lambda_lengths();
            out.kv("runs", rep.certificates.len());
            out.kv("chi_abs", rep.chi_abs);
            out.kv("lw", fmt_rat(&ll.total));
            out.kv("mw", fmt_rat(&ll.min));
            out.kv("L", fmt_rat(&l));
            out.kv("ratio", fmt_rat(&rep.ratio()));
            out.kv("ratio_bound", fmt_rat(&rep.ratio_bound()));
            out.kv("uniform", rep.uniform());
            if let Some(p) = out_path {
                write(&p, &serialize(rep.structure.track(), Some(&rep.structure)))?;
            }
            if let Some(p) = trace {
                write(&p, &serialize_trace(&rep.trace, &Fbc::from_structure(&rep.structure)))?;
            }
            if !rep.uniform() {
                return Err(fail(EXIT_CERTIFICATE, "the result is not uniform"));
            }
        }
        Command::TwistBounds { n, iag, igb, iab } => {
            if n.len() != iag.len() || n.len() != igb.len() {
                return Err(fail(2, "--n, --iag and --igb need the same number of entries"));
            }
            let comps = n
                .iter()
                .zip(iag)
                .zip(igb)
                .enumerate()
                .map(|(i, ((&n, a), b))| TwistComponent { label: format!("g{i}"), exponent: n, i_alpha: a, i_beta: b })
                .collect();
            let spec = TwistSpec::new(comps, iab).map_err(|e| fail(2, e.to_string()))?;
            let b = ivanov_bounds(&spec);
            out.kv("lo", fmt_rat(&b.lo));
            out.kv("hi", fmt_rat(&b.hi));
            out.kv("width", fmt_rat(&b.width()));
            out.kv("limit", fmt_rat(&twist_limit_at_beta(&spec)));
        }
        Command::AtomCheck { ieta, ibnd } => {
            let mut family: Vec<String> = (0..ibnd.len()).map(|i| format!("d{i}")).collect();
            let boundary = family.clone();
            family.push("eta".into());
            let mut values = ibnd;
            values.push(ieta);
            let lam = IntersectionVector::new(family, values).map_err(|e| fail(2, e.to_string()))?;
            let p = ProjectivePlane { boundary, dual: "eta".into(), core: "gamma".into() };
            match scharlemann_atom(&lam, &p).map_err(|e| fail(2, e.to_string()))? {
                AtomDecision::Atom(w) => {
                    out.kv("atom", true);
                    out.kv("weight", fmt_rat(&w));
                }
                AtomDecision::NoAtom => out.kv("atom", false),
            }
        }
        Command::Exceptional { model, orbit, iga, igb, iab } => match model {
            Model::N12 => {
                let r = n12_orbits();
                out.kv("surface", r.surface.to_string().replace(' ', ","));
                out.kv("pml_size", r.pml.len());
                out.kv("pml", r.pml.join(","));
                out.kv("crossing", r.crossing);
                out.kv("two_sided_curves", r.two_sided_curves);
                out.kv("ml_plus_empty", r.ml_plus_empty);
                out.kv("mapping_class_group_order", r.mapping_class_group_order);
                for o in &r.orbits {
                    out.kv("orbit", o.join(","));
                }
                out.kv("stabiliser_order", r.stabiliser_order);
                out.kv("max_two_sided_multicurve", r.max_two_sided_multicurve);
            }
            Model::N21 => {
                let data = N21Data { i_g0_alpha: iga, i_g0_beta: igb, i_alpha_beta: iab };
                let steps = n21_twist_orbit(orbit, &data).map_err(|e| fail(2, e.to_string()))?;
                for s in &steps {
                    out.line([
                        ("n", s.n.to_string()),
                        ("lo", fmt_rat(&s.bounds.lo)),
                        ("hi", fmt_rat(&s.bounds.hi)),
                        ("lo_n", fmt_rat(&s.normalized.lo)),
                        ("hi_n", fmt_rat(&s.normalized.hi)),
                    ]);
                }
                out.kv("limit", fmt_rat(&n21_limit(&data)));
            }
            Model::N30 => {
                let r = n30_structure();
                out.kv("surface", r.surface.to_string().replace(' ', ","));
                out.kv("pml_dimension", r.pml_dimension);
                out.kv("pml_plus", r.pml_plus.replace(' ', "_"));
                out.kv("complement_components", r.complement_components);
                for d in r.complement_disks {
                    out.kv("complement_disk", d.replace(' ', "_"));
                }
                out.kv("special_one_sided_curve", r.special_one_sided_curve);
                out.kv("other_one_sided_meet_gamma", r.other_one_sided_meet_gamma);
                out.kv("mapping_class_group", r.mapping_class_group);
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = Output::default();
    let res = run(cli.command, &mut out);
    print!("{}", out.render(cli.pretty));
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("tracklab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
