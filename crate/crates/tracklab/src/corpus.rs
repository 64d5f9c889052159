//! Seeded corpora of lambda-structured one-vertex tracks for certificate runs.

use crate::cone::cone_rays;
use crate::lambda::LambdaStructure;
use crate::one_vertex::one_vertex_representatives;
use crate::rat::{frac, int, Rat};
use crate::track::{minimal_surface, validate, TrainTrack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Edge lengths used by the corpus.
pub fn corpus_lengths() -> [Rat; 5] {
    [int(1), frac(3, 2), int(2), int(3), int(5)]
}

/// Largest integer foliation traced when measuring leaves.
pub const MAX_STRANDS: u64 = 1_000_000;

/// A structure is admissible when every leaf of its integer foliation is
/// longer than `ℓ^λ + 1000|χ| m^λ`. Shorter closed leaves would be reached by
/// a single run of the Main Procedure, which then has no edge left to comb.
pub fn admissible(ls: &LambdaStructure) -> bool {
    let Some(sig) = ls.track().surface() else { return false };
    let ll = ls.lambda_lengths();
    let need = &ll.total + int(1000 * sig.abs_chi() as i64) * &ll.min;
    ls.leaves_longer_than(&need, MAX_STRANDS) == Some(true)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CorpusStats {
    /// Valid tracks per edge count, indexed by edge count.
    pub tracks: Vec<usize>,
    /// Tracks for which an admissible weight was found.
    pub admitted: Vec<usize>,
}

/// Builds the corpus: one representative of every valid one-vertex track with
/// `2..=max_edges` edges up to mirror symmetry, realised on its minimal
/// surface, with edge `i` of an `n`-edge track getting length
/// `corpus_lengths()[(2i + n) % 5]`. Weights are random positive combinations
/// of the extreme rays with coefficients in `100..1000`; the first admissible
/// one out of `tries` is kept, and tracks with none are left out.
pub fn certificate_corpus(max_edges: usize, tries: usize, seed: u64) -> (Vec<LambdaStructure>, CorpusStats) {
    let lens = corpus_lengths();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut stats = CorpusStats { tracks: vec![0; max_edges + 1], admitted: vec![0; max_edges + 1] };
    for n in 2..=max_edges {
        for t in one_vertex_representatives(n) {
            let Some(sig) = minimal_surface(&t) else { continue };
            let t = t.with_surface(Some(sig));
            if !validate(&t, true).is_valid() {
                continue;
            }
            stats.tracks[n] += 1;
            let edges = t
                .edges()
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let mut e = e.clone();
                    e.length = lens[(2 * i + n) % 5].clone();
                    e
                })
                .collect();
            let t = TrainTrack::new(t.switch_names().to_vec(), edges, Some(sig)).expect("same combinatorics");
            let rays = cone_rays(&t);
            // On a single ray every weight is a multiple of one multicurve and
            // admissibility does not depend on the multiple.
            let attempts = if rays.len() == 1 { 1 } else { tries };
            for _ in 0..attempts {
                let mut w = vec![int(0); t.num_edges()];
                for r in &rays {
                    let c = int(rng.gen_range(100..1000));
                    for (x, y) in w.iter_mut().zip(r) {
                        *x += Rat::from_integer(y.clone()) * &c;
                    }
                }
                let Ok(ls) = LambdaStructure::new(t.clone(), w) else { continue };
                if admissible(&ls) {
                    stats.admitted[n] += 1;
                    out.push(ls);
                    break;
                }
            }
        }
    }
    (out, stats)
}
