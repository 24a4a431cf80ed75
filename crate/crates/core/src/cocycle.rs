//! Phase morphisms, transition cocycles, trivialization, flat potentials and holonomy.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use crate::cover::{Cover, RegionId};
use crate::error::{Error, Result};
use crate::group::{wrap_angle, GroupKind, GroupValue, Phase, EQ_TOL};
use crate::nerve::{NerveGraph, Pi1Presentation};
use crate::path::{path_compose, PosetPath, Step};

/// Tolerance for triangle sums of lifted angles to be integral multiples of 2 pi.
pub const FLATNESS_TOL: f64 = 1e-9;

/// A homomorphism from pi_1 to a gauge group, given on generators by name.
///
/// The assignment may name either every raw generator of the presentation or
/// only the generators that survive reduction; in the latter case the other
/// raw generators are evaluated through their reduced images.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaMorphism {
    kind: GroupKind,
    assignment: BTreeMap<String, GroupValue>,
}

impl SigmaMorphism {
    pub fn new(kind: GroupKind, assignment: BTreeMap<String, GroupValue>) -> Result<Self> {
        for v in assignment.values() {
            if v.kind() != kind {
                return Err(Error::VariantMismatch {
                    left: kind.to_string(),
                    right: v.kind().to_string(),
                });
            }
        }
        Ok(SigmaMorphism { kind, assignment })
    }

    pub fn trivial(kind: GroupKind) -> Self {
        SigmaMorphism { kind, assignment: BTreeMap::new() }
    }

    /// Assigns `values[k]` to raw generator `k` of `pres`.
    pub fn on_generators(pres: &Pi1Presentation, values: Vec<GroupValue>, kind: GroupKind) -> Result<Self> {
        let assignment = pres.generators.iter().cloned().zip(values).collect();
        SigmaMorphism::new(kind, assignment)
    }

    /// Assigns `values[k]` to reduced generator `k` of `pres`.
    pub fn on_reduced(pres: &Pi1Presentation, values: Vec<GroupValue>, kind: GroupKind) -> Result<Self> {
        let assignment = pres.reduced().names.iter().cloned().zip(values).collect();
        SigmaMorphism::new(kind, assignment)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn assignment(&self) -> &BTreeMap<String, GroupValue> {
        &self.assignment
    }

    pub fn get(&self, generator: &str) -> Option<&GroupValue> {
        self.assignment.get(generator)
    }

    /// Values on all raw generators. A trivial morphism (empty assignment)
    /// is the identity everywhere.
    pub fn raw_values(&self, pres: &Pi1Presentation) -> Result<Vec<GroupValue>> {
        let identity = self.kind.identity();
        if self.assignment.is_empty() {
            return Ok(vec![identity; pres.num_generators()]);
        }
        if pres.generators.iter().all(|g| self.assignment.contains_key(g)) {
            return Ok(pres.generators.iter().map(|g| self.assignment[g].clone()).collect());
        }
        let reduced = pres.reduced();
        let mut values = Vec::with_capacity(reduced.names.len());
        for name in &reduced.names {
            let v = self.assignment.get(name).ok_or_else(|| Error::MissingGenerator(name.clone()))?;
            values.push(v.clone());
        }
        reduced.images.iter().map(|w| w.evaluate(&values, &identity)).collect()
    }

    /// Value on reduced generator `k`.
    pub fn reduced_values(&self, pres: &Pi1Presentation) -> Result<Vec<GroupValue>> {
        let raw = self.raw_values(pres)?;
        Ok(pres.reduced().survivors.iter().map(|&g| raw[g as usize].clone()).collect())
    }

    /// Evaluates sigma on a word over raw generators.
    pub fn evaluate(&self, pres: &Pi1Presentation, word: &crate::group::FreeWord) -> Result<GroupValue> {
        word.evaluate(&self.raw_values(pres)?, &self.kind.identity())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationViolation {
    pub relation: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SigmaReport {
    pub max_residual: f64,
    pub violations: Vec<RelationViolation>,
}

impl SigmaReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluates every relation of the presentation under `sigma`.
pub fn validate_sigma(pres: &Pi1Presentation, sigma: &SigmaMorphism) -> Result<SigmaReport> {
    validate_sigma_with(pres, sigma, EQ_TOL)
}

pub fn validate_sigma_with(pres: &Pi1Presentation, sigma: &SigmaMorphism, tol: f64) -> Result<SigmaReport> {
    let values = sigma.raw_values(pres)?;
    let identity = sigma.kind.identity();
    let mut max_residual: f64 = 0.0;
    let mut violations = Vec::new();
    for (i, r) in pres.relations.iter().enumerate() {
        let residual = r.evaluate(&values, &identity)?.distance(&identity)?;
        max_residual = max_residual.max(residual);
        if residual > tol {
            violations.push(RelationViolation { relation: i, residual });
        }
    }
    Ok(SigmaReport { max_residual, violations })
}

/// Something that assigns a group value to every step of a path.
pub trait HolonomySource {
    fn cover(&self) -> &Cover;
    fn identity(&self) -> GroupValue;
    fn step_value(&self, step: &Step) -> Result<GroupValue>;
}

/// Ordered product of step values; later steps multiply on the left.
///
/// For loops the result depends only on the homotopy class. Open paths are
/// accepted, their value depends on the path.
pub fn holonomy<S: HolonomySource + ?Sized>(src: &S, p: &PosetPath) -> Result<GroupValue> {
    let mut acc = src.identity();
    for s in p.steps() {
        acc = src.step_value(s)?.compose(&acc)?;
    }
    Ok(acc)
}

fn missing_edge(cover: &Cover, step: &Step) -> Error {
    Error::MissingEdge {
        to: cover.name(step.to).to_string(),
        from: cover.name(step.from).to_string(),
        component: step.component,
    }
}

/// Transition data per overlap component.
///
/// `forward[e]` is the value of the step from the lower to the higher region
/// of edge `e`, i.e. `g_{hi,lo}`; the reverse step carries its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCocycle {
    cover: Cover,
    kind: GroupKind,
    forward: Vec<GroupValue>,
}

impl TransitionCocycle {
    pub fn from_edge_values(cover: &Cover, kind: GroupKind, forward: Vec<GroupValue>) -> Result<Self> {
        if forward.len() != cover.overlaps().len() {
            return Err(Error::DimensionMismatch { expected: cover.overlaps().len(), got: forward.len() });
        }
        for v in &forward {
            if v.kind() != kind {
                return Err(Error::VariantMismatch {
                    left: kind.to_string(),
                    right: v.kind().to_string(),
                });
            }
        }
        Ok(TransitionCocycle { cover: cover.clone(), kind, forward })
    }

    pub fn identity(cover: &Cover, kind: GroupKind) -> Self {
        TransitionCocycle { cover: cover.clone(), kind, forward: vec![kind.identity(); cover.overlaps().len()] }
    }

    /// Coboundary `g_{oa} = lambda_o lambda_a^{-1}`.
    pub fn coboundary(cover: &Cover, lambda: &[GroupValue]) -> Result<Self> {
        if lambda.len() != cover.num_regions() {
            return Err(Error::DimensionMismatch { expected: cover.num_regions(), got: lambda.len() });
        }
        let kind = lambda[0].kind();
        let forward = cover
            .overlaps()
            .iter()
            .map(|o| lambda[o.hi.0].compose(&lambda[o.lo.0].inverse()))
            .collect::<Result<_>>()?;
        TransitionCocycle::from_edge_values(cover, kind, forward)
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn edge_values(&self) -> &[GroupValue] {
        &self.forward
    }

    pub fn set_edge_value(&mut self, edge: usize, value: GroupValue) {
        self.forward[edge] = value;
    }

    /// `g_{to,from}` on the given component.
    pub fn get(&self, to: RegionId, from: RegionId, component: u32) -> Result<GroupValue> {
        self.step_value(&Step::new(from, to, component))
    }

    /// Gauge transform `g_{oa} -> mu_o g_{oa} mu_a^{-1}`; holonomies are conjugated at the base.
    pub fn gauge_transform(&self, mu: &[GroupValue]) -> Result<Self> {
        let forward = self
            .cover
            .overlaps()
            .iter()
            .zip(&self.forward)
            .map(|(o, g)| mu[o.hi.0].compose(g)?.compose(&mu[o.lo.0].inverse()))
            .collect::<Result<_>>()?;
        Ok(TransitionCocycle { cover: self.cover.clone(), kind: self.kind, forward })
    }
}

impl HolonomySource for TransitionCocycle {
    fn cover(&self) -> &Cover {
        &self.cover
    }

    fn identity(&self) -> GroupValue {
        self.kind.identity()
    }

    fn step_value(&self, step: &Step) -> Result<GroupValue> {
        if step.is_stay() {
            return Ok(self.kind.identity());
        }
        let e = self
            .cover
            .edge_index(step.from, step.to, step.component)
            .ok_or_else(|| missing_edge(&self.cover, step))?;
        Ok(if step.from < step.to { self.forward[e].clone() } else { self.forward[e].inverse() })
    }
}

/// Cocycle from a phase morphism: non-tree edges carry sigma of their
/// generator, tree edges the identity.
pub fn transition_cocycle(sigma: &SigmaMorphism, nerve: &NerveGraph) -> Result<TransitionCocycle> {
    let pres = nerve.presentation();
    let report = validate_sigma(pres, sigma)?;
    if !report.is_ok() {
        return Err(Error::InvalidSigma {
            count: report.violations.len(),
            max_residual: report.max_residual,
        });
    }
    let values = sigma.raw_values(pres)?;
    let forward = (0..nerve.cover().overlaps().len())
        .map(|e| match nerve.generator_of_edge(e) {
            Some(g) => values[g as usize].clone(),
            None => sigma.kind().identity(),
        })
        .collect();
    TransitionCocycle::from_edge_values(nerve.cover(), sigma.kind(), forward)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CocycleReport {
    /// Residual of `g_{oa} g_{ae} = g_{oe}` per triple, in triple order.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub failing: Vec<usize>,
}

impl CocycleReport {
    pub fn is_ok(&self) -> bool {
        self.failing.is_empty()
    }
}

pub fn check_cocycle(g: &TransitionCocycle, cover: &Cover) -> Result<CocycleReport> {
    check_cocycle_with(g, cover, EQ_TOL)
}

pub fn check_cocycle_with(g: &TransitionCocycle, cover: &Cover, tol: f64) -> Result<CocycleReport> {
    let mut residuals = Vec::with_capacity(cover.triples().len());
    for t in cover.triples() {
        let [o, a, e] = t.regions;
        let [oa, ae, oe] = t.components;
        let lhs = g.get(o, a, oa)?.compose(&g.get(a, e, ae)?)?;
        residuals.push(lhs.distance(&g.get(o, e, oe)?)?);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let failing = residuals.iter().enumerate().filter(|(_, &r)| r > tol).map(|(i, _)| i).collect();
    Ok(CocycleReport { residuals, max_residual, failing })
}

/// A based loop through one non-tree edge together with its holonomy.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessLoop {
    pub edge: usize,
    pub path: PosetPath,
    pub holonomy: GroupValue,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Trivialization {
    /// Per-region values with `g_{oa} = lambda_o lambda_a^{-1}`.
    Coboundary(Vec<GroupValue>),
    Witness(WitnessLoop),
}

impl Trivialization {
    pub fn lambda(&self) -> Option<&[GroupValue]> {
        match self {
            Trivialization::Coboundary(l) => Some(l),
            Trivialization::Witness(_) => None,
        }
    }
}

pub fn trivialize(g: &TransitionCocycle, nerve: &NerveGraph) -> Result<Trivialization> {
    trivialize_with(g, nerve, EQ_TOL)
}

pub fn trivialize_with(g: &TransitionCocycle, nerve: &NerveGraph, tol: f64) -> Result<Trivialization> {
    let cover = nerve.cover();
    let report = check_cocycle_with(g, cover, tol)?;
    if !report.is_ok() {
        return Err(Error::InconsistentCocycle { max_residual: report.max_residual });
    }
    let mut lambda = vec![g.kind().identity(); cover.num_regions()];
    for &r in nerve.bfs_order() {
        if let Some((p, e)) = nerve.parent(r) {
            let c = cover.overlaps()[e].component;
            lambda[r.0] = g.get(r, p, c)?.compose(&lambda[p.0])?;
        }
    }
    let mut witness: Option<(usize, usize)> = None;
    for &e in nerve.non_tree_edges() {
        let o = cover.overlaps()[e];
        let expected = lambda[o.hi.0].compose(&lambda[o.lo.0].inverse())?;
        if g.get(o.hi, o.lo, o.component)?.distance(&expected)? > tol {
            let len = nerve.depth(o.lo) + nerve.depth(o.hi) + 1;
            if witness.map_or(true, |(best, _)| len < best) {
                witness = Some((len, e));
            }
        }
    }
    match witness {
        None => Ok(Trivialization::Coboundary(lambda)),
        Some((_, e)) => {
            let path = nerve.edge_loop(e);
            let holonomy = holonomy(g, &path)?;
            Ok(Trivialization::Witness(WitnessLoop { edge: e, path, holonomy }))
        }
    }
}

/// Real lift of a U(1) cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPotentialU1 {
    cover: Cover,
    /// Angle of the lower-to-higher step of each edge.
    angles: Vec<f64>,
    /// `(sum of step angles around r0 -> r1 -> r2 -> r0) / 2 pi` per triple.
    triangle_numbers: Vec<i64>,
    primitives: Option<Vec<f64>>,
}

impl FlatPotentialU1 {
    /// Builds a potential from explicit edge angles, rejecting non-flat triangles.
    pub fn from_angles(cover: &Cover, angles: Vec<f64>, primitives: Option<Vec<f64>>) -> Result<Self> {
        if angles.len() != cover.overlaps().len() {
            return Err(Error::DimensionMismatch { expected: cover.overlaps().len(), got: angles.len() });
        }
        let mut pot = FlatPotentialU1 { cover: cover.clone(), angles, triangle_numbers: vec![], primitives };
        let mut numbers = Vec::with_capacity(cover.triples().len());
        for (i, t) in cover.triples().iter().enumerate() {
            let mut sum = 0.0;
            for (a, b, c) in t.boundary() {
                sum += pot.step_angle(&Step::new(a, b, c))?;
            }
            let n = (sum / (2.0 * PI)).round();
            let residual = (sum - 2.0 * PI * n).abs();
            if residual > FLATNESS_TOL {
                return Err(Error::NotFlat { triangle: i, residual });
            }
            numbers.push(n as i64);
        }
        pot.triangle_numbers = numbers;
        Ok(pot)
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn triangle_numbers(&self) -> &[i64] {
        &self.triangle_numbers
    }

    /// Global primitives `phi_o` with `A_{oa} = phi_o - phi_a (mod 2 pi)`, when they exist.
    pub fn primitives(&self) -> Option<&[f64]> {
        self.primitives.as_deref()
    }

    /// Lifted angle of one step; `A_{ao} = -A_{oa}`.
    pub fn step_angle(&self, step: &Step) -> Result<f64> {
        if step.is_stay() {
            return Ok(0.0);
        }
        let e = self
            .cover
            .edge_index(step.from, step.to, step.component)
            .ok_or_else(|| missing_edge(&self.cover, step))?;
        Ok(if step.from < step.to { self.angles[e] } else { -self.angles[e] })
    }

    /// Sum of lifted angles along a path (no reduction mod 2 pi).
    pub fn path_angle(&self, p: &PosetPath) -> Result<f64> {
        p.steps().iter().map(|s| self.step_angle(s)).sum()
    }

    /// Primitives on the sub-patch spanned by `regions`, normalized to 0 at
    /// the first region. Fails if the patch is disconnected or carries holonomy.
    pub fn patch_primitives(&self, regions: &[RegionId]) -> Result<Charts> {
        let Some(&root) = regions.first() else {
            return Ok(Charts::default());
        };
        let inside = |r: RegionId| regions.contains(&r);
        let mut phi: BTreeMap<RegionId, f64> = BTreeMap::from([(root, 0.0)]);
        let mut queue = VecDeque::from([root]);
        while let Some(r) = queue.pop_front() {
            for (s, c, _) in self.cover.neighbors(r) {
                if !inside(s) {
                    continue;
                }
                let value = phi[&r] + self.step_angle(&Step::new(r, s, c))?;
                match phi.get(&s) {
                    None => {
                        phi.insert(s, value);
                        queue.push_back(s);
                    }
                    Some(&existing) => {
                        if wrap_angle(existing - value).abs() > EQ_TOL {
                            return Err(Error::NotTrivializable(format!(
                                "holonomy {:.6} around a loop through '{}' and '{}'",
                                wrap_angle(existing - value),
                                self.cover.name(r),
                                self.cover.name(s)
                            )));
                        }
                    }
                }
            }
        }
        if let Some(&r) = regions.iter().find(|r| !phi.contains_key(r)) {
            return Err(Error::NotTrivializable(format!(
                "region '{}' is not connected to the patch",
                self.cover.name(r)
            )));
        }
        Ok(Charts { phases: phi })
    }

    /// Charts from the global primitives.
    pub fn charts(&self) -> Result<Charts> {
        let phi = self
            .primitives
            .as_ref()
            .ok_or_else(|| Error::NotTrivializable("potential carries holonomy".into()))?;
        Ok(Charts { phases: phi.iter().enumerate().map(|(i, &p)| (RegionId(i), p)).collect() })
    }
}

impl HolonomySource for FlatPotentialU1 {
    fn cover(&self) -> &Cover {
        &self.cover
    }

    fn identity(&self) -> GroupValue {
        GroupValue::Phase(Phase::ONE)
    }

    fn step_value(&self, step: &Step) -> Result<GroupValue> {
        self.step_angle(step).map(GroupValue::phase)
    }
}

/// Per-region chart phases `phi_o`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Charts {
    pub phases: BTreeMap<RegionId, f64>,
}

impl Charts {
    pub fn phase(&self, r: RegionId) -> Option<f64> {
        self.phases.get(&r).copied()
    }
}

/// Principal-branch lift of a U(1) cocycle, with primitives when it is a coboundary.
pub fn lift_potential(g: &TransitionCocycle, nerve: &NerveGraph) -> Result<FlatPotentialU1> {
    let angles = g
        .edge_values()
        .iter()
        .map(|v| v.as_phase().map(Phase::angle).ok_or_else(|| Error::NotU1(v.kind().to_string())))
        .collect::<Result<Vec<_>>>()?;
    let primitives = match trivialize(g, nerve)? {
        Trivialization::Coboundary(lambda) => {
            Some(lambda.iter().map(|l| l.as_phase().expect("U(1) cocycle").angle()).collect())
        }
        Trivialization::Witness(_) => None,
    };
    FlatPotentialU1::from_angles(nerve.cover(), angles, primitives)
}

/// Loop at the base that runs out along the tree, follows `p`, and returns along the tree.
pub fn close_along_tree(nerve: &NerveGraph, p: &PosetPath) -> PosetPath {
    let out = nerve.tree_path_from_base(p.start());
    let back = nerve.tree_path_to_base(p.end());
    let l = path_compose(&out, p).expect("tree path ends at path start");
    path_compose(&l, &back).expect("path ends at tree path start")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{builtin_cover, Builtin};
    use crate::group::{CMatrix, FreeWord};
    use crate::nerve::build_nerve;
    use crate::path::approximate_named;
    use num_complex::Complex64;

    fn nerve(b: Builtin) -> NerveGraph {
        build_nerve(&builtin_cover(b).unwrap()).unwrap()
    }

    fn phases(pres: &Pi1Presentation, thetas: &[f64]) -> SigmaMorphism {
        SigmaMorphism::on_reduced(pres, thetas.iter().map(|&t| GroupValue::phase(t)).collect(), GroupKind::U1)
            .unwrap()
    }

    #[test]
    fn trivial_sigma_is_valid_and_gives_identity() {
        for b in Builtin::all() {
            let n = nerve(b);
            let s = SigmaMorphism::trivial(GroupKind::U1);
            assert!(validate_sigma(n.presentation(), &s).unwrap().is_ok());
            let g = transition_cocycle(&s, &n).unwrap();
            assert!(g.edge_values().iter().all(|v| v.is_identity(0.0)));
        }
    }

    #[test]
    fn circle_non_tree_edge_carries_sigma() {
        let n = nerve(Builtin::Circle(3));
        let s = phases(n.presentation(), &[0.4]);
        let g = transition_cocycle(&s, &n).unwrap();
        let e = n.non_tree_edges()[0];
        assert_eq!(g.edge_values()[e], GroupValue::phase(0.4));
        for t in n.tree_edges() {
            assert!(g.edge_values()[t].is_identity(0.0));
        }
    }

    #[test]
    fn disk_cocycle_is_identity_for_any_sigma() {
        let n = nerve(Builtin::Disk);
        assert_eq!(n.presentation().reduced().num_generators(), 0);
        let g = transition_cocycle(&SigmaMorphism::trivial(GroupKind::U1), &n).unwrap();
        assert!(g.edge_values().iter().all(|v| v.is_identity(0.0)));
    }

    #[test]
    fn missing_generator_reported() {
        let n = nerve(Builtin::FigureEight);
        let s = SigmaMorphism::new(
            GroupKind::U1,
            BTreeMap::from([("g0".to_string(), GroupValue::phase(1.0))]),
        )
        .unwrap();
        assert_eq!(validate_sigma(n.presentation(), &s).unwrap_err(), Error::MissingGenerator("g1".into()));
    }

    #[test]
    fn corrupted_edge_fails_its_triangles() {
        let n = nerve(Builtin::Annulus);
        let c = n.cover();
        let mut g = transition_cocycle(&phases(n.presentation(), &[0.9]), &n).unwrap();
        assert!(check_cocycle(&g, c).unwrap().max_residual <= 1e-12);
        let e = 4;
        let bad = g.edge_values()[e].compose(&GroupValue::phase(0.3)).unwrap();
        g.set_edge_value(e, bad);
        let report = check_cocycle(&g, c).unwrap();
        let expected: Vec<usize> = c
            .triples()
            .iter()
            .enumerate()
            .filter(|(_, t)| t.boundary().iter().any(|&(a, b, k)| c.edge_index(a, b, k) == Some(e)))
            .map(|(i, _)| i)
            .collect();
        assert!(!expected.is_empty());
        assert_eq!(report.failing, expected);
        assert!(matches!(trivialize(&g, &n), Err(Error::InconsistentCocycle { .. })));
    }

    #[test]
    fn no_triples_vacuous() {
        let n = nerve(Builtin::Circle(4));
        let g = transition_cocycle(&phases(n.presentation(), &[2.0]), &n).unwrap();
        let r = check_cocycle(&g, n.cover()).unwrap();
        assert!(r.is_ok() && r.residuals.is_empty());
    }

    #[test]
    fn circle_pi_gives_witness() {
        let n = nerve(Builtin::Circle(3));
        let g = transition_cocycle(&phases(n.presentation(), &[PI]), &n).unwrap();
        match trivialize(&g, &n).unwrap() {
            Trivialization::Witness(w) => {
                assert_eq!(w.holonomy, GroupValue::phase(PI));
                assert!(w.path.is_loop());
            }
            other => panic!("expected witness, got {other:?}"),
        }
    }

    #[test]
    fn identity_cocycle_trivializes_to_identity() {
        let n = nerve(Builtin::Torus);
        let g = TransitionCocycle::identity(n.cover(), GroupKind::Un(2));
        let lambda = trivialize(&g, &n).unwrap();
        assert!(lambda.lambda().unwrap().iter().all(|l| l.is_identity(0.0)));
    }

    #[test]
    fn lift_principal_branch() {
        let n = nerve(Builtin::Circle(3));
        let g = transition_cocycle(&phases(n.presentation(), &[PI / 3.0]), &n).unwrap();
        let pot = lift_potential(&g, &n).unwrap();
        assert!((pot.angles()[n.non_tree_edges()[0]] - PI / 3.0).abs() < 1e-15);
        assert!(pot.primitives().is_none());
    }

    #[test]
    fn shifting_a_lift_moves_triangle_numbers() {
        let n = nerve(Builtin::Annulus);
        let c = n.cover();
        let g = transition_cocycle(&phases(n.presentation(), &[1.3]), &n).unwrap();
        let pot = lift_potential(&g, &n).unwrap();
        let e = 5;
        let mut angles = pot.angles().to_vec();
        angles[e] += 2.0 * PI;
        let shifted = FlatPotentialU1::from_angles(c, angles, None).unwrap();
        for (i, t) in c.triples().iter().enumerate() {
            let touches = t.boundary().iter().any(|&(a, b, k)| c.edge_index(a, b, k) == Some(e));
            let delta = shifted.triangle_numbers()[i] - pot.triangle_numbers()[i];
            assert_eq!(delta.abs(), i64::from(touches));
        }
    }

    #[test]
    fn lift_requires_u1() {
        let n = nerve(Builtin::Disk);
        let g = TransitionCocycle::identity(n.cover(), GroupKind::Un(2));
        assert!(matches!(lift_potential(&g, &n), Err(Error::NotU1(_))));
    }

    #[test]
    fn annulus_winding_power() {
        let n = nerve(Builtin::Annulus);
        let s = phases(n.presentation(), &[0.7]);
        let g = transition_cocycle(&s, &n).unwrap();
        let once = approximate_named(n.cover(), &["i0", "i1", "i2", "i0"]).unwrap();
        let gen = n.loop_class(&once).unwrap();
        let h = holonomy(&g, &once).unwrap();
        assert_eq!(h, s.evaluate(n.presentation(), gen.word()).unwrap());
        let thrice = path_compose(&path_compose(&once, &once).unwrap(), &once).unwrap();
        assert_eq!(holonomy(&g, &thrice).unwrap(), h.pow(3));
    }

    #[test]
    fn commutator_sigma_violates_torus_relation() {
        let n = nerve(Builtin::Torus);
        let pres = n.presentation();
        let x = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0),
        ]);
        let z = CMatrix::from_row_slice(2, 2, &[
            Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0),
        ]);
        let s = SigmaMorphism::new(
            GroupKind::Un(2),
            pres.generators
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let m = if i % 2 == 0 { x.clone() } else { z.clone() };
                    (g.clone(), GroupValue::matrix(m).unwrap())
                })
                .collect(),
        )
        .unwrap();
        assert!(!validate_sigma(pres, &s).unwrap().is_ok());
        assert!(matches!(transition_cocycle(&s, &n), Err(Error::InvalidSigma { .. })));
    }

    #[test]
    fn patch_primitives_on_holonomy_free_patch() {
        let n = nerve(Builtin::Circle(4));
        let g = transition_cocycle(&phases(n.presentation(), &[1.0]), &n).unwrap();
        let pot = lift_potential(&g, &n).unwrap();
        let all: Vec<RegionId> = n.cover().regions().collect();
        assert!(matches!(pot.patch_primitives(&all), Err(Error::NotTrivializable(_))));
        let charts = pot.patch_primitives(&all[..3]).unwrap();
        assert_eq!(charts.phases.len(), 3);
    }

    #[test]
    fn sigma_evaluates_words() {
        let n = nerve(Builtin::FigureEight);
        let s = phases(n.presentation(), &[0.5, 0.25]);
        let w = FreeWord::from_powers(&[(0, 2), (1, -1)]);
        assert_eq!(s.evaluate(n.presentation(), &w).unwrap(), GroupValue::phase(0.75));
    }
}
