//! Finite-mode fermionic Fock space, smeared fields and twisted local fields.
//!
//! Basis vectors are occupation bit strings, bit `j` for mode `j`. The
//! creator of mode `j` carries the Jordan-Wigner sign `(-1)^(number of
//! occupied modes below j)`.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Mul, Sub};

use nalgebra::DVector;
use num_complex::Complex64;
use sprs::{CsMat, TriMat};

use crate::cocycle::{Charts, FlatPotentialU1};
use crate::cover::{Cover, RegionId};
use crate::error::{Error, Result};
use crate::group::{CMatrix, GroupValue, Phase};
use crate::path::Step;

/// Largest supported number of modes (Fock dimension 4096).
pub const MAX_MODES: usize = 12;

pub type State = DVector<Complex64>;
pub type Vector = DVector<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Modes of the one-particle space, each owned by one region.
#[derive(Debug, Clone, PartialEq)]
pub struct OneParticleSpace {
    owners: Vec<RegionId>,
    names: Vec<String>,
}

impl OneParticleSpace {
    /// `m` private modes per region, region-major: region `r` owns `r*m .. (r+1)*m`.
    pub fn new(cover: &Cover, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InsufficientModes {
                region: cover.name(cover.base()).to_string(),
                needed: 1,
                available: 0,
            });
        }
        let owners: Vec<RegionId> =
            cover.regions().flat_map(|r| std::iter::repeat(r).take(m)).collect();
        if owners.len() > MAX_MODES {
            return Err(Error::Capacity { modes: owners.len(), max: MAX_MODES });
        }
        Ok(OneParticleSpace { owners, names: cover.names().to_vec() })
    }

    /// Explicit owner list; `names` labels the regions for diagnostics.
    pub fn with_owners(owners: Vec<RegionId>, names: Vec<String>) -> Result<Self> {
        if owners.len() > MAX_MODES {
            return Err(Error::Capacity { modes: owners.len(), max: MAX_MODES });
        }
        if let Some(r) = owners.iter().find(|r| r.0 >= names.len()) {
            return Err(Error::UnknownRegion(format!("#{}", r.0)));
        }
        Ok(OneParticleSpace { owners, names })
    }

    pub fn dim(&self) -> usize {
        self.owners.len()
    }

    pub fn owner(&self, mode: usize) -> RegionId {
        self.owners[mode]
    }

    pub fn region_name(&self, r: RegionId) -> &str {
        &self.names[r.0]
    }

    /// Modes owned by `r`, ascending.
    pub fn modes_of(&self, r: RegionId) -> Vec<usize> {
        (0..self.owners.len()).filter(|&j| self.owners[j] == r).collect()
    }

    pub fn unit(&self, mode: usize) -> Vector {
        let mut v = Vector::zeros(self.dim());
        v[mode] = ONE;
        v
    }

    /// Regions owning a mode where `f` is nonzero.
    pub fn support(&self, f: &Vector) -> BTreeSet<RegionId> {
        f.iter().enumerate().filter(|(_, z)| **z != ZERO).map(|(j, _)| self.owners[j]).collect()
    }

    /// `<f, g>`, conjugate-linear in `f`.
    pub fn inner(f: &Vector, g: &Vector) -> Complex64 {
        f.dotc(g)
    }
}

/// Charge grade under the gauge action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    Definite(i32),
    Mixed,
}

impl Grade {
    fn add(self, other: Grade) -> Grade {
        match (self, other) {
            (Grade::Definite(a), Grade::Definite(b)) => Grade::Definite(a + b),
            _ => Grade::Mixed,
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            Grade::Definite(k) if k % 2 == 0 => Parity::Even,
            Grade::Definite(_) => Parity::Odd,
            Grade::Mixed => Parity::Mixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    Mixed,
}

impl Parity {
    fn mul(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::Mixed, _) | (_, Parity::Mixed) => Parity::Mixed,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// Operator on Fock space with grade, parity and support tags.
#[derive(Debug, Clone)]
pub struct FieldOp {
    matrix: CsMat<Complex64>,
    grade: Grade,
    parity: Parity,
    support: BTreeSet<RegionId>,
}

impl FieldOp {
    pub fn identity(dim: usize) -> Self {
        FieldOp {
            matrix: CsMat::eye(dim),
            grade: Grade::Definite(0),
            parity: Parity::Even,
            support: BTreeSet::new(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        FieldOp {
            matrix: CsMat::zero((dim, dim)),
            grade: Grade::Definite(0),
            parity: Parity::Even,
            support: BTreeSet::new(),
        }
    }

    /// Wraps a matrix, measuring grade and parity numerically.
    pub fn from_matrix(matrix: CsMat<Complex64>, support: BTreeSet<RegionId>) -> Self {
        let mut op = FieldOp { matrix, grade: Grade::Mixed, parity: Parity::Mixed, support };
        op.grade = grading(&op);
        op.parity = parity(&op);
        op
    }

    pub fn from_dense(m: &CMatrix, support: BTreeSet<RegionId>) -> Self {
        let mut tri = TriMat::new((m.nrows(), m.ncols()));
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if m[(r, c)] != ZERO {
                    tri.add_triplet(r, c, m[(r, c)]);
                }
            }
        }
        FieldOp::from_matrix(tri.to_csr(), support)
    }

    pub fn matrix(&self) -> &CsMat<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn grade(&self) -> Grade {
        self.grade
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn support(&self) -> &BTreeSet<RegionId> {
        &self.support
    }

    pub fn with_support(mut self, support: BTreeSet<RegionId>) -> Self {
        self.support = support;
        self
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn scale(&self, c: Complex64) -> FieldOp {
        FieldOp { matrix: self.matrix.map(|z| z * c), ..self.clone() }
    }

    pub fn adjoint(&self) -> FieldOp {
        let grade = match self.grade {
            Grade::Definite(k) => Grade::Definite(-k),
            Grade::Mixed => Grade::Mixed,
        };
        FieldOp {
            matrix: self.matrix.transpose_view().to_csr().map(|z| z.conj()),
            grade,
            parity: self.parity,
            support: self.support.clone(),
        }
    }

    pub fn apply(&self, v: &State) -> State {
        let mut out = State::zeros(self.matrix.rows());
        for (r, row) in self.matrix.outer_iterator().enumerate() {
            let mut acc = ZERO;
            for (c, &z) in row.iter() {
                acc += z * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.matrix.rows(), self.matrix.cols());
        for (r, row) in self.matrix.outer_iterator().enumerate() {
            for (c, &z) in row.iter() {
                m[(r, c)] += z;
            }
        }
        m
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &FieldOp) -> f64 {
        (self - other).max_abs()
    }

    /// Matrix element `<u, T v>`.
    pub fn matrix_element(&self, u: &State, v: &State) -> Complex64 {
        u.dotc(&self.apply(v))
    }
}

impl<'a> Mul<&'a FieldOp> for &'a FieldOp {
    type Output = FieldOp;

    fn mul(self, rhs: &'a FieldOp) -> FieldOp {
        FieldOp {
            matrix: &self.matrix * &rhs.matrix,
            grade: self.grade.add(rhs.grade),
            parity: self.parity.mul(rhs.parity),
            support: self.support.union(&rhs.support).copied().collect(),
        }
    }
}

fn merge_tags(a: &FieldOp, b: &FieldOp) -> (Grade, Parity, BTreeSet<RegionId>) {
    let grade = if a.grade == b.grade { a.grade } else { Grade::Mixed };
    let parity = if a.parity == b.parity { a.parity } else { Parity::Mixed };
    (grade, parity, a.support.union(&b.support).copied().collect())
}

impl<'a> Add<&'a FieldOp> for &'a FieldOp {
    type Output = FieldOp;

    fn add(self, rhs: &'a FieldOp) -> FieldOp {
        let (grade, parity, support) = merge_tags(self, rhs);
        FieldOp { matrix: &self.matrix + &rhs.matrix, grade, parity, support }
    }
}

impl<'a> Sub<&'a FieldOp> for &'a FieldOp {
    type Output = FieldOp;

    fn sub(self, rhs: &'a FieldOp) -> FieldOp {
        let (grade, parity, support) = merge_tags(self, rhs);
        FieldOp { matrix: &self.matrix - &rhs.matrix, grade, parity, support }
    }
}

pub fn commutator(a: &FieldOp, b: &FieldOp) -> FieldOp {
    &(a * b) - &(b * a)
}

pub fn anticommutator(a: &FieldOp, b: &FieldOp) -> FieldOp {
    &(a * b) + &(b * a)
}

fn popcount(n: usize) -> i32 {
    n.count_ones() as i32
}

/// Conjugation by the second-quantized phase: `T_ij -> zeta^(n_i - n_j) T_ij`.
pub fn gauge_action(zeta: Phase, t: &FieldOp) -> FieldOp {
    let mut tri = TriMat::new((t.matrix.rows(), t.matrix.cols()));
    for (r, row) in t.matrix.outer_iterator().enumerate() {
        for (c, &z) in row.iter() {
            tri.add_triplet(r, c, z * zeta.pow((popcount(r) - popcount(c)) as i64).to_complex());
        }
    }
    FieldOp { matrix: tri.to_csr(), ..t.clone() }
}

const GRADE_TOL: f64 = 1e-12;

/// Charge grade found by probing the gauge action at two incommensurate phases.
pub fn grading(t: &FieldOp) -> Grade {
    let k_max = (t.matrix.rows().max(1).trailing_zeros()) as i32;
    let probes = [Phase::new(1.0), Phase::new(std::f64::consts::SQRT_2)];
    let images: Vec<FieldOp> = probes.iter().map(|&z| gauge_action(z, t)).collect();
    let scale = t.max_abs().max(1.0);
    let candidates =
        std::iter::once(0).chain((1..=k_max).flat_map(|k| [k, -k]));
    for k in candidates {
        let ok = probes.iter().zip(&images).all(|(&z, img)| {
            img.distance(&t.scale(z.pow(k as i64).to_complex())) <= GRADE_TOL * scale
        });
        if ok {
            return Grade::Definite(k);
        }
    }
    Grade::Mixed
}

/// Parity under the gauge action of `-1`.
pub fn parity(t: &FieldOp) -> Parity {
    let image = gauge_action(Phase::new(std::f64::consts::PI), t);
    let scale = t.max_abs().max(1.0);
    if image.distance(t) <= GRADE_TOL * scale {
        Parity::Even
    } else if image.distance(&t.scale(-ONE)) <= GRADE_TOL * scale {
        Parity::Odd
    } else {
        Parity::Mixed
    }
}

/// Fock space over a [`OneParticleSpace`] with cached creators.
#[derive(Debug, Clone)]
pub struct FockSpace {
    space: OneParticleSpace,
    creators: Vec<FieldOp>,
}

impl FockSpace {
    pub fn new(space: OneParticleSpace) -> Self {
        let k = space.dim();
        let dim = 1usize << k;
        let creators = (0..k)
            .map(|j| {
                let mut tri = TriMat::new((dim, dim));
                let bit = 1usize << j;
                for n in 0..dim {
                    if n & bit == 0 {
                        let sign = if popcount(n & (bit - 1)) % 2 == 0 { ONE } else { -ONE };
                        tri.add_triplet(n | bit, n, sign);
                    }
                }
                FieldOp {
                    matrix: tri.to_csr(),
                    grade: Grade::Definite(1),
                    parity: Parity::Odd,
                    support: BTreeSet::from([space.owner(j)]),
                }
            })
            .collect();
        FockSpace { space, creators }
    }

    pub fn for_cover(cover: &Cover, modes_per_region: usize) -> Result<Self> {
        Ok(FockSpace::new(OneParticleSpace::new(cover, modes_per_region)?))
    }

    pub fn one_particle(&self) -> &OneParticleSpace {
        &self.space
    }

    pub fn modes(&self) -> usize {
        self.space.dim()
    }

    pub fn dim(&self) -> usize {
        1 << self.space.dim()
    }

    pub fn vacuum(&self) -> State {
        let mut v = State::zeros(self.dim());
        v[0] = ONE;
        v
    }

    pub fn basis_state(&self, occupation: usize) -> State {
        let mut v = State::zeros(self.dim());
        v[occupation] = ONE;
        v
    }

    pub fn identity(&self) -> FieldOp {
        FieldOp::identity(self.dim())
    }

    pub fn creator(&self, mode: usize) -> &FieldOp {
        &self.creators[mode]
    }

    pub fn annihilator(&self, mode: usize) -> FieldOp {
        self.creators[mode].adjoint()
    }

    pub fn number_operator(&self) -> FieldOp {
        let dim = self.dim();
        let mut tri = TriMat::new((dim, dim));
        for n in 1..dim {
            tri.add_triplet(n, n, Complex64::new(popcount(n) as f64, 0.0));
        }
        FieldOp {
            matrix: tri.to_csr(),
            grade: Grade::Definite(0),
            parity: Parity::Even,
            support: (0..self.modes()).map(|j| self.space.owner(j)).collect(),
        }
    }

    /// Second-quantized phase `zeta^N`.
    pub fn gauge_unitary(&self, zeta: Phase) -> FieldOp {
        let dim = self.dim();
        let mut tri = TriMat::new((dim, dim));
        for n in 0..dim {
            tri.add_triplet(n, n, zeta.pow(popcount(n) as i64).to_complex());
        }
        FieldOp {
            matrix: tri.to_csr(),
            grade: Grade::Definite(0),
            parity: Parity::Even,
            support: (0..self.modes()).map(|j| self.space.owner(j)).collect(),
        }
    }

    /// Smeared creator `psi(f) = sum_j f_j a_j^*`: linear in `f`, charge +1.
    pub fn field(&self, f: &Vector) -> Result<FieldOp> {
        let k = self.modes();
        if f.len() != k {
            return Err(Error::DimensionMismatch { expected: k, got: f.len() });
        }
        let dim = self.dim();
        let mut tri = TriMat::new((dim, dim));
        for n in 0..dim {
            for j in 0..k {
                let bit = 1usize << j;
                if n & bit == 0 && f[j] != ZERO {
                    let sign = if popcount(n & (bit - 1)) % 2 == 0 { 1.0 } else { -1.0 };
                    tri.add_triplet(n | bit, n, f[j] * sign);
                }
            }
        }
        Ok(FieldOp {
            matrix: tri.to_csr(),
            grade: Grade::Definite(1),
            parity: Parity::Odd,
            support: self.space.support(f),
        })
    }
}

fn chart_phase(charts: &Charts, space: &OneParticleSpace, o: RegionId) -> Result<f64> {
    charts
        .phase(o)
        .ok_or_else(|| Error::NotTrivializable(format!("no chart for region '{}'", space.region_name(o))))
}

/// `psi_o(f) = e^{-i phi_o} psi(f)` for `f` supported in `o`.
pub fn twisted_local_field(fock: &FockSpace, charts: &Charts, o: RegionId, f: &Vector) -> Result<FieldOp> {
    let space = fock.one_particle();
    if space.support(f).iter().any(|&r| r != o) {
        return Err(Error::NotSupportedIn(space.region_name(o).to_string()));
    }
    chart_field(fock, charts, o, f)
}

/// `e^{-i phi_o} psi(f)` without the support restriction: the field read
/// through the chart of `o`.
pub fn chart_field(fock: &FockSpace, charts: &Charts, o: RegionId, f: &Vector) -> Result<FieldOp> {
    let phi = chart_phase(charts, fock.one_particle(), o)?;
    Ok(fock.field(f)?.scale(Phase::new(-phi).to_complex()))
}

/// Local representatives `s_o` of a one-particle section.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub vectors: BTreeMap<RegionId, Vector>,
}

impl Section {
    /// Section whose chart-`o` representative is `e^{i phi_o} v`.
    pub fn from_global(charts: &Charts, v: &Vector) -> Self {
        let vectors =
            charts.phases.iter().map(|(&r, &phi)| (r, v * Phase::new(phi).to_complex())).collect();
        Section { vectors }
    }
}

#[derive(Debug, Clone)]
pub struct GluedField {
    pub op: FieldOp,
    /// Largest difference between evaluations through different charts.
    pub chart_residual: f64,
}

/// Glues chart-wise fields into one operator.
///
/// Section entries must satisfy `s_b = e^{i A_{ba}} s_a` on every overlap
/// within the section; the result is the field through the first chart, and
/// `chart_residual` compares all other charts against it.
pub fn glue_psi_a(
    fock: &FockSpace,
    pot: &FlatPotentialU1,
    charts: &Charts,
    section: &Section,
) -> Result<GluedField> {
    let cover = crate::cocycle::HolonomySource::cover(pot);
    let mut consistency: f64 = 0.0;
    for o in cover.overlaps() {
        if let (Some(lo), Some(hi)) = (section.vectors.get(&o.lo), section.vectors.get(&o.hi)) {
            let a = pot.step_angle(&Step::new(o.lo, o.hi, o.component))?;
            let diff = hi - lo * Phase::new(a).to_complex();
            consistency = consistency.max(diff.camax());
        }
    }
    if consistency > 1e-10 {
        return Err(Error::InconsistentSection { residual: consistency });
    }
    let mut entries = section.vectors.iter();
    let Some((&first, v0)) = entries.next() else {
        return Ok(GluedField { op: FieldOp::zero(fock.dim()), chart_residual: 0.0 });
    };
    let op = chart_field(fock, charts, first, v0)?;
    let mut chart_residual: f64 = 0.0;
    for (&r, v) in entries {
        chart_residual = chart_residual.max(chart_field(fock, charts, r, v)?.distance(&op));
    }
    Ok(GluedField { op, chart_residual })
}

/// Residual of the graded commutator of operators with causally disjoint supports.
pub fn normal_commutation_check(cover: &Cover, t: &FieldOp, s: &FieldOp) -> Result<f64> {
    for &a in t.support() {
        for &b in s.support() {
            if !cover.are_disjoint(a, b) {
                return Err(Error::NotCausallyDisjoint {
                    a: cover.name(a).to_string(),
                    b: cover.name(b).to_string(),
                });
            }
        }
    }
    match (t.parity(), s.parity()) {
        (Parity::Mixed, _) | (_, Parity::Mixed) => Err(Error::MixedParity),
        (Parity::Odd, Parity::Odd) => Ok(anticommutator(t, s).max_abs()),
        _ => Ok(commutator(t, s).max_abs()),
    }
}

/// `alpha_g(T) S` with `alpha_g(T) = g^kappa T` for `T` of grade `kappa`.
pub fn twisted_product(t: &FieldOp, s: &FieldOp, g: &GroupValue) -> Result<FieldOp> {
    let phase = g.as_phase().ok_or_else(|| Error::NotU1(g.kind().to_string()))?;
    let Grade::Definite(k) = t.grade() else {
        return Err(Error::MixedGrade);
    };
    Ok(&t.scale(phase.pow(k as i64).to_complex()) * s)
}
