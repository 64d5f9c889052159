//! Property tests for invariants that hold on every input, plus the
//! three-edge refinement example.

use proptest::prelude::*;
use std::sync::OnceLock;
use tracklab::cone::{cone_rays, satisfies_switch_equations};
use tracklab::corpus::{admissible, certificate_corpus};
use tracklab::curves::{d_a, ivanov_bounds, scharlemann_atom, AtomDecision, IntersectionVector, ProjectivePlane, TwistComponent, TwistSpec};
use tracklab::first_return::{first_return, transversal_edge};
use tracklab::format::{parse, serialize};
use tracklab::lambda::LambdaStructure;
use tracklab::one_vertex::one_vertex_representatives;
use tracklab::procedure::main_procedure;
use tracklab::rat::{frac, int, Rat};
use tracklab::refine::Refiner;
use tracklab::track::{build, minimal_surface, validate, Side, TrainTrack};

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("a{i}")).collect()
}

fn vector(xs: &[(i64, i64)]) -> IntersectionVector {
    IntersectionVector::new(labels(xs.len()), xs.iter().map(|&(p, q)| frac(p, q)).collect()).unwrap()
}

fn rational() -> impl Strategy<Value = (i64, i64)> {
    (0i64..200, 1i64..8)
}

/// Small corpus shared by the refinement properties.
fn corpus() -> &'static [LambdaStructure] {
    static C: OnceLock<Vec<LambdaStructure>> = OnceLock::new();
    C.get_or_init(|| certificate_corpus(3, 10, 11).0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_a_is_a_pseudometric(xs in prop::collection::vec((rational(), rational(), rational()), 1..6)) {
        let u = vector(&xs.iter().map(|x| x.0).collect::<Vec<_>>());
        let v = vector(&xs.iter().map(|x| x.1).collect::<Vec<_>>());
        let w = vector(&xs.iter().map(|x| x.2).collect::<Vec<_>>());
        let uv = d_a(&u, &v).unwrap();
        prop_assert_eq!(&uv, &d_a(&v, &u).unwrap());
        prop_assert_eq!(d_a(&u, &u).unwrap(), int(0));
        prop_assert!(d_a(&u, &w).unwrap() <= uv + d_a(&v, &w).unwrap());
    }

    #[test]
    fn atom_is_monotone_in_eta_and_scales(eta in rational(), bnd in prop::collection::vec(rational(), 1..4), bump in 0i64..50, c in 1i64..9) {
        let plane = ProjectivePlane { boundary: labels(bnd.len()), dual: "eta".into(), core: "gamma".into() };
        let make = |eta: Rat| {
            let mut family = labels(bnd.len());
            family.push("eta".into());
            let mut values: Vec<Rat> = bnd.iter().map(|&(p, q)| frac(p, q)).collect();
            values.push(eta);
            IntersectionVector::new(family, values).unwrap()
        };
        let lam = make(frac(eta.0, eta.1));
        let base = scharlemann_atom(&lam, &plane).unwrap();
        let bigger = scharlemann_atom(&make(frac(eta.0, eta.1) + int(bump)), &plane).unwrap();
        match (&base, &bigger) {
            (AtomDecision::Atom(a), AtomDecision::Atom(b)) => prop_assert_eq!(b - a, int(2 * bump)),
            (AtomDecision::Atom(_), AtomDecision::NoAtom) => prop_assert!(false, "raising eta removed the atom"),
            _ => {}
        }
        let scaled = scharlemann_atom(&lam.scaled(&int(c)), &plane).unwrap();
        match (base, scaled) {
            (AtomDecision::Atom(a), AtomDecision::Atom(b)) => prop_assert_eq!(b, a * int(c)),
            (AtomDecision::NoAtom, AtomDecision::NoAtom) => {}
            (a, b) => prop_assert!(false, "scaling changed the decision: {:?} vs {:?}", a, b),
        }
    }

    #[test]
    fn twist_bounds_are_ordered(comps in prop::collection::vec((-12i64..12, rational(), rational()), 1..4), iab in rational()) {
        let components = comps
            .iter()
            .enumerate()
            .map(|(i, &(n, a, b))| TwistComponent { label: format!("g{i}"), exponent: n, i_alpha: frac(a.0, a.1), i_beta: frac(b.0, b.1) })
            .collect();
        let spec = TwistSpec::new(components, frac(iab.0, iab.1)).unwrap();
        let b = ivanov_bounds(&spec);
        prop_assert!(b.lo >= int(0));
        prop_assert!(b.lo <= b.hi);
        // Away from the clamp at 0 the interval is symmetric about Σ(|n|−1)p.
        if b.lo > int(0) {
            prop_assert_eq!(b.width(), int(2) * (spec.pair_sum() + frac(iab.0, iab.1)));
        }
    }

    #[test]
    fn first_return_pushes_weights_forward(x in 1i64..40, y in 1i64..40, q in 1i64..4) {
        let t = build(
            &["u", "v"],
            &[
                ("a", (0, Side::T, 0), (1, Side::B, 0), false, int(2)),
                ("b", (0, Side::T, 1), (1, Side::B, 1), true, int(3)),
                ("c", (1, Side::T, 0), (0, Side::B, 0), false, int(5)),
            ],
            None,
        )
        .unwrap();
        let w = vec![frac(x, q), frac(y, q), frac(x + y, q)];
        let ls = LambdaStructure::new(t, w.clone()).unwrap();
        let fr = first_return(&ls, transversal_edge(&ls)).unwrap();
        prop_assert_eq!(fr.structure.track().num_switches(), 1);
        prop_assert_eq!(fr.pushforward(3), w);
        prop_assert!(satisfies_switch_equations(fr.structure.track(), fr.structure.weights()));
    }

    #[test]
    fn main_procedure_trace_conserves_and_round_trips(i in 0usize..1000) {
        let cs = corpus();
        let ls = &cs[i % cs.len()];
        let mut r = Refiner::new(ls);
        let cert = main_procedure(&mut r).unwrap();
        prop_assert!(cert.holds());
        let (last, trace) = r.into_parts();
        prop_assert!(trace.all_ok());
        prop_assert!(trace.moves.iter().all(|m| m.conservation_error.is_none()));
        prop_assert!(trace.verify(&last).is_ok());
        let out = last.to_structure().unwrap();
        prop_assert!(validate(out.track(), false).is_valid());
        prop_assert_eq!(out.lambda_lengths().total, cert.l1.clone());

        let text = serialize(out.track(), Some(&out));
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.structure.as_ref(), Some(&out));
        prop_assert_eq!(serialize(&back.track, back.structure.as_ref()), text);
    }

    #[test]
    fn corpus_structures_round_trip(i in 0usize..1000) {
        let cs = corpus();
        let ls = &cs[i % cs.len()];
        let text = serialize(ls.track(), Some(ls));
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.structure.as_ref(), Some(ls));
        let bare = serialize(ls.track(), None);
        prop_assert_eq!(parse(&bare).unwrap().track, ls.track().clone());
    }
}

/// Every valid three-edge one-vertex track with lengths `(1, 3, 3)` and an
/// admissible weight doubles its minimum within `9|χ|` rounds and stays under
/// the length bound.
#[test]
fn three_edge_lengths_one_three_three() {
    let lens = [int(1), int(3), int(3)];
    let mut runs = 0;
    for t in one_vertex_representatives(3) {
        let Some(sig) = minimal_surface(&t) else { continue };
        let t = t.with_surface(Some(sig));
        if !validate(&t, true).is_valid() {
            continue;
        }
        let edges = t.edges().iter().zip(&lens).map(|(e, l)| tracklab::track::Edge { length: l.clone(), ..e.clone() }).collect();
        let t = TrainTrack::new(t.switch_names().to_vec(), edges, Some(sig)).unwrap();
        let rays = cone_rays(&t);
        // Coefficients 101, 211, 331, ... keep the weights generic.
        let mut w = vec![int(0); t.num_edges()];
        for (k, r) in rays.iter().enumerate() {
            let c = int(101 + 110 * k as i64 + 10 * (k * k) as i64);
            for (x, y) in w.iter_mut().zip(r) {
                *x += Rat::from_integer(y.clone()) * &c;
            }
        }
        let Ok(ls) = LambdaStructure::new(t, w) else { continue };
        if !admissible(&ls) {
            continue;
        }
        let mut r = Refiner::new(&ls);
        let cert = main_procedure(&mut r).unwrap();
        assert!(cert.m1 >= &cert.m0 * int(2), "{cert:?}");
        assert!(cert.l1 < &cert.l0 + int(1000 * cert.chi_abs as i64) * &cert.m0, "{cert:?}");
        assert!(cert.rounds as u64 <= 9 * cert.chi_abs, "{cert:?}");
        let (last, trace) = r.into_parts();
        assert!(trace.all_ok());
        trace.verify(&last).unwrap();
        runs += 1;
    }
    assert!(runs > 0, "no admissible three-edge structure");
}
