//! Seeded generators for random group values, phase morphisms and paths.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::cocycle::{validate_sigma, SigmaMorphism};
use crate::cover::RegionId;
use crate::group::{CMatrix, GroupKind, GroupValue, UnitaryMatrix};
use crate::nerve::{GroupStructure, NerveGraph};
use crate::path::{path_compose, PosetPath, Step};

pub use rand_chacha::ChaCha8Rng as Rng64;

pub fn seeded(seed: u64) -> Rng64 {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    rng.gen_range(-PI..PI)
}

pub fn random_complex_vector<R: Rng>(rng: &mut R, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random element of SU(2).
pub fn random_su2<R: Rng>(rng: &mut R) -> UnitaryMatrix {
    let mut q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    q.iter_mut().for_each(|x| *x /= norm);
    let a = Complex64::new(q[0], q[1]);
    let b = Complex64::new(q[2], q[3]);
    let m = CMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()]);
    UnitaryMatrix::new(m).expect("quaternion matrices are unitary")
}

/// `u diag(e^{i t}, e^{-i t}) u^*`: commuting family for a fixed `u`.
pub fn su2_in_torus(u: &UnitaryMatrix, t: f64) -> UnitaryMatrix {
    let d = CMatrix::from_diagonal(&DVector::from_vec(vec![
        Complex64::from_polar(1.0, t),
        Complex64::from_polar(1.0, -t),
    ]));
    UnitaryMatrix::new(u.matrix() * d * u.matrix().adjoint()).expect("conjugate of unitary")
}

/// Random valid morphism into `kind` (U(1) or U(2)).
///
/// Values are drawn on the reduced generators. Free groups take
/// independent values; other groups get a commuting family, which satisfies
/// every relation of the builtin covers. If a draw still violates a relation
/// the trivial morphism is returned.
pub fn random_sigma<R: Rng>(rng: &mut R, nerve: &NerveGraph, kind: GroupKind) -> SigmaMorphism {
    let pres = nerve.presentation();
    let k = pres.reduced().num_generators();
    let commuting = !matches!(pres.structure(), GroupStructure::Free(_) | GroupStructure::Trivial);
    let values: Vec<GroupValue> = match kind {
        GroupKind::Un(2) => {
            let frame = random_su2(rng);
            (0..k)
                .map(|_| {
                    if commuting {
                        GroupValue::Matrix(su2_in_torus(&frame, random_angle(rng)))
                    } else {
                        GroupValue::Matrix(random_su2(rng))
                    }
                })
                .collect()
        }
        _ => (0..k).map(|_| GroupValue::phase(random_angle(rng))).collect(),
    };
    let kind = if matches!(kind, GroupKind::Un(2)) { kind } else { GroupKind::U1 };
    let sigma = SigmaMorphism::on_reduced(pres, values, kind).expect("uniform kind");
    match validate_sigma(pres, &sigma) {
        Ok(r) if r.is_ok() => sigma,
        _ => SigmaMorphism::trivial(kind),
    }
}

/// Random morphism that is nontrivial on at least one reduced generator
/// (U(1) values bounded away from 0). `None` for simply connected covers.
pub fn random_nontrivial_u1<R: Rng>(rng: &mut R, nerve: &NerveGraph) -> Option<SigmaMorphism> {
    let pres = nerve.presentation();
    let k = pres.reduced().num_generators();
    if k == 0 {
        return None;
    }
    let hot = rng.gen_range(0..k);
    let values = (0..k)
        .map(|i| {
            let t = if i == hot {
                let mag = rng.gen_range(0.1..PI);
                if rng.gen_bool(0.5) { mag } else { -mag }
            } else {
                random_angle(rng)
            };
            GroupValue::phase(t)
        })
        .collect();
    SigmaMorphism::on_reduced(pres, values, GroupKind::U1).ok()
}

fn random_step<R: Rng>(rng: &mut R, nerve: &NerveGraph, at: RegionId) -> Option<Step> {
    let nbrs = nerve.cover().neighbors(at);
    nbrs.choose(rng).map(|&(s, c, _)| Step::new(at, s, c))
}

/// Random walk of `len` steps starting at `from`.
pub fn random_path<R: Rng>(rng: &mut R, nerve: &NerveGraph, from: RegionId, len: usize) -> PosetPath {
    let mut steps = Vec::with_capacity(len);
    let mut at = from;
    for _ in 0..len {
        match random_step(rng, nerve, at) {
            Some(s) => {
                at = s.to;
                steps.push(s);
            }
            None => break,
        }
    }
    PosetPath::new(nerve.cover(), from, steps).expect("walk follows overlaps")
}

/// Random walk from `at` closed up by the tree path back to `at`.
pub fn random_loop_at<R: Rng>(rng: &mut R, nerve: &NerveGraph, at: RegionId, len: usize) -> PosetPath {
    let walk = random_path(rng, nerve, at, len);
    let back = nerve.tree_path(walk.end(), at);
    path_compose(&walk, &back).expect("tree path starts at walk end")
}

/// Random based loop.
pub fn random_loop<R: Rng>(rng: &mut R, nerve: &NerveGraph, len: usize) -> PosetPath {
    random_loop_at(rng, nerve, nerve.base(), len)
}

/// Random pair of paths from `a` to a common end region.
pub fn random_path_pair<R: Rng>(rng: &mut R, nerve: &NerveGraph, a: RegionId, len: usize) -> (PosetPath, PosetPath) {
    let p = random_path(rng, nerve, a, len);
    let detour = random_loop_at(rng, nerve, a, len);
    let q = path_compose(&detour, &random_path_to(rng, nerve, a, p.end(), len)).expect("chained");
    (p, q)
}

fn random_path_to<R: Rng>(rng: &mut R, nerve: &NerveGraph, from: RegionId, to: RegionId, len: usize) -> PosetPath {
    let walk = random_path(rng, nerve, from, len / 2);
    path_compose(&walk, &nerve.tree_path(walk.end(), to)).expect("chained")
}

/// Applies `moves` random homotopy moves: inserting or removing a
/// backtrack, inserting or removing a stay, and replacing a step by the
/// two other sides of a triangle (or the reverse).
pub fn perturb_homotopic<R: Rng>(rng: &mut R, nerve: &NerveGraph, p: &PosetPath, moves: usize) -> PosetPath {
    let cover = nerve.cover();
    let mut steps = p.steps().to_vec();
    let start = p.start();
    for _ in 0..moves {
        match rng.gen_range(0..5) {
            0 => {
                let i = rng.gen_range(0..=steps.len());
                let at = if i == 0 { start } else { steps[i - 1].to };
                if let Some(s) = random_step(rng, nerve, at) {
                    steps.splice(i..i, [s, s.reversed()]);
                }
            }
            1 => {
                let cands: Vec<usize> =
                    (0..steps.len().saturating_sub(1)).filter(|&i| steps[i + 1] == steps[i].reversed()).collect();
                if let Some(&i) = cands.choose(rng) {
                    steps.drain(i..i + 2);
                }
            }
            2 => {
                let i = rng.gen_range(0..=steps.len());
                let at = if i == 0 { start } else { steps[i - 1].to };
                steps.insert(i, Step::stay(at));
            }
            3 => {
                let cands: Vec<usize> = (0..steps.len()).filter(|&i| !steps[i].is_stay()).collect();
                let Some(&i) = cands.choose(rng) else { continue };
                let s = steps[i];
                let mut options = Vec::new();
                for t in cover.triples() {
                    let b = t.boundary();
                    for k in 0..3 {
                        let (x, y, c) = b[k];
                        let (n1, n2) = (b[(k + 1) % 3], b[(k + 2) % 3]);
                        // x -> y is homotopic to x -> z -> y, and y -> x to y -> z -> x.
                        if (x, y, c) == (s.from, s.to, s.component) {
                            options.push([Step::new(n2.1, n2.0, n2.2), Step::new(n1.1, n1.0, n1.2)]);
                        }
                        if (y, x, c) == (s.from, s.to, s.component) {
                            options.push([Step::new(n1.0, n1.1, n1.2), Step::new(n2.0, n2.1, n2.2)]);
                        }
                    }
                }
                if let Some(rep) = options.choose(rng) {
                    steps.splice(i..i + 1, *rep);
                }
            }
            _ => {
                let cands: Vec<usize> = (0..steps.len()).filter(|&i| steps[i].is_stay()).collect();
                if let Some(&i) = cands.choose(rng) {
                    steps.remove(i);
                }
            }
        }
    }
    PosetPath::new(cover, start, steps).expect("homotopy moves preserve chaining")
}
