//! Implementers, charge transporters and superselection-sector diagnostics.
//!
//! Implementers are charge-raising partial isometries (products of private
//! creators), so every sector identity is checked after compression to the
//! window spanned by the vacuum and the charged vectors `v_o = phi_o Omega`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::cocycle::{trivialize_with, transition_cocycle, HolonomySource, SigmaMorphism, TransitionCocycle, Trivialization};
use crate::cover::{Cover, RegionId};
use crate::error::{Error, Result};
use crate::fock::{FieldOp, FockSpace, Grade, State};
use crate::group::{max_norm, path_ordered_exp, unitary_log, CMatrix, GroupKind, GroupValue, Phase, EQ_TOL};
use crate::nerve::NerveGraph;
use crate::path::{PosetPath, Step};

/// `phi_o`: ordered product of the creators of the first `charge` modes of `o`.
#[derive(Debug, Clone)]
pub struct Implementer {
    pub region: RegionId,
    pub charge: usize,
    pub op: FieldOp,
}

impl Implementer {
    /// The charged vector `v_o = phi_o Omega`.
    pub fn vector(&self, fock: &FockSpace) -> State {
        self.op.apply(&fock.vacuum())
    }
}

pub fn implementer(fock: &FockSpace, o: RegionId, charge: usize) -> Result<Implementer> {
    let space = fock.one_particle();
    let modes = space.modes_of(o);
    if charge == 0 || modes.len() < charge {
        return Err(Error::InsufficientModes {
            region: space.region_name(o).to_string(),
            needed: charge.max(1),
            available: modes.len(),
        });
    }
    let mut op = fock.identity();
    for &j in &modes[..charge] {
        op = &op * fock.creator(j);
    }
    Ok(Implementer { region: o, charge, op })
}

/// Span of the vacuum and one charged vector per region.
#[derive(Debug, Clone)]
pub struct WindowSubspace {
    labels: Vec<Option<RegionId>>,
    basis: Vec<State>,
}

impl WindowSubspace {
    pub fn new(fock: &FockSpace, implementers: &[Implementer]) -> Self {
        let mut labels = vec![None];
        let mut basis = vec![fock.vacuum()];
        for imp in implementers {
            labels.push(Some(imp.region));
            basis.push(imp.vector(fock));
        }
        WindowSubspace { labels, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[State] {
        &self.basis
    }

    /// Basis index of `v_o`; index 0 is the vacuum.
    pub fn index_of(&self, o: RegionId) -> Option<usize> {
        self.labels.iter().position(|l| *l == Some(o))
    }

    /// Matrix of `P_W T P_W` in the window basis.
    pub fn compress(&self, t: &FieldOp) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (j, b) in self.basis.iter().enumerate() {
            let image = t.apply(b);
            for (i, a) in self.basis.iter().enumerate() {
                m[(i, j)] = a.dotc(&image);
            }
        }
        m
    }

    /// `P_W` as an operator on Fock space.
    pub fn projector(&self) -> FieldOp {
        let dim = self.basis[0].len();
        let mut p = CMatrix::zeros(dim, dim);
        for b in &self.basis {
            p += b * b.adjoint();
        }
        FieldOp::from_dense(&p, Default::default())
    }

    /// Window matrix with a single 1 at `(v_o, v_o)`.
    pub fn unit_at(&self, o: RegionId) -> Option<CMatrix> {
        let i = self.index_of(o)?;
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Some(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransporterKind {
    /// `z^1`: untwisted, topologically trivial.
    Dhr,
    /// `z^sigma = g z^1` for a U(1) cocycle `g`.
    Twisted,
    /// Matrix-valued cocycle layer without a Fock realization.
    Rho,
}

/// `z_{to,from}` for one step.
#[derive(Debug, Clone)]
pub struct TransporterEntry {
    pub step: Step,
    pub coefficient: GroupValue,
    pub op: Option<FieldOp>,
}

#[derive(Debug, Clone)]
pub struct SectorTransporter {
    kind: TransporterKind,
    cover: Cover,
    charge: usize,
    implementers: Vec<Implementer>,
    window: Option<WindowSubspace>,
    entries: BTreeMap<Step, TransporterEntry>,
    identity: GroupValue,
}

fn all_steps(cover: &Cover) -> Vec<Step> {
    let mut steps: Vec<Step> = cover.regions().map(Step::stay).collect();
    for o in cover.overlaps() {
        steps.push(Step::new(o.lo, o.hi, o.component));
        steps.push(Step::new(o.hi, o.lo, o.component));
    }
    steps
}

impl SectorTransporter {
    fn with_coefficients(
        fock: &FockSpace,
        cover: &Cover,
        charge: usize,
        kind: TransporterKind,
        coefficient: impl Fn(&Step) -> Result<GroupValue>,
    ) -> Result<Self> {
        let implementers =
            cover.regions().map(|r| implementer(fock, r, charge)).collect::<Result<Vec<_>>>()?;
        let window = WindowSubspace::new(fock, &implementers);
        let mut entries = BTreeMap::new();
        for step in all_steps(cover) {
            let c = coefficient(&step)?;
            let z = c.to_complex().ok_or_else(|| Error::NotU1(c.kind().to_string()))?;
            let base = &implementers[step.to.0].op * &implementers[step.from.0].op.adjoint();
            entries.insert(step, TransporterEntry { step, coefficient: c, op: Some(base.scale(z)) });
        }
        Ok(SectorTransporter {
            kind,
            cover: cover.clone(),
            charge,
            implementers,
            window: Some(window),
            entries,
            identity: GroupValue::Phase(Phase::ONE),
        })
    }

    /// Twisted transporter for an arbitrary U(1) cocycle.
    pub fn from_cocycle(fock: &FockSpace, charge: usize, g: &TransitionCocycle) -> Result<Self> {
        if g.kind() != GroupKind::U1 {
            return Err(Error::NotU1(g.kind().to_string()));
        }
        let cover = g.cover().clone();
        Self::with_coefficients(fock, &cover, charge, TransporterKind::Twisted, |s| g.step_value(s))
    }

    pub fn kind(&self) -> TransporterKind {
        self.kind
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn charge(&self) -> usize {
        self.charge
    }

    pub fn implementers(&self) -> &[Implementer] {
        &self.implementers
    }

    pub fn implementer(&self, o: RegionId) -> Option<&Implementer> {
        self.implementers.get(o.0)
    }

    pub fn window(&self) -> Option<&WindowSubspace> {
        self.window.as_ref()
    }

    /// Topological dimension: 1 on the Fock layers, `n` on the U(n) cocycle layer.
    pub fn dimension(&self) -> usize {
        match self.identity.kind() {
            GroupKind::Un(n) => n,
            _ => 1,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &TransporterEntry> {
        self.entries.values()
    }

    pub fn entry(&self, step: &Step) -> Result<&TransporterEntry> {
        self.entries.get(step).ok_or_else(|| Error::MissingTransporter {
            to: self.cover.name(step.to).to_string(),
            from: self.cover.name(step.from).to_string(),
            component: step.component,
        })
    }

    fn fock_window(&self) -> Result<&WindowSubspace> {
        self.window.as_ref().ok_or(Error::NoFockRealization)
    }

    /// `P_W T P_W` in the window basis.
    pub fn compress(&self, t: &FieldOp) -> Result<CMatrix> {
        Ok(self.fock_window()?.compress(t))
    }
}

impl HolonomySource for SectorTransporter {
    fn cover(&self) -> &Cover {
        &self.cover
    }

    fn identity(&self) -> GroupValue {
        self.identity.clone()
    }

    fn step_value(&self, step: &Step) -> Result<GroupValue> {
        Ok(self.entry(step)?.coefficient.clone())
    }
}

/// Untwisted transporter `z^1_{o'o} = phi_{o'} phi_o^*` on every overlap step and every stay.
pub fn z1(fock: &FockSpace, cover: &Cover, charge: usize) -> Result<SectorTransporter> {
    SectorTransporter::with_coefficients(fock, cover, charge, TransporterKind::Dhr, |_| {
        Ok(GroupValue::Phase(Phase::ONE))
    })
}

/// `z^sigma_{o'o} = g_{o'o} z^1_{o'o}` with `g` the transition cocycle of `sigma`.
pub fn twisted_transporter(
    fock: &FockSpace,
    charge: usize,
    sigma: &SigmaMorphism,
    nerve: &NerveGraph,
) -> Result<SectorTransporter> {
    if sigma.kind() != GroupKind::U1 {
        return Err(Error::NotU1(sigma.kind().to_string()));
    }
    let g = transition_cocycle(sigma, nerve)?;
    SectorTransporter::from_cocycle(fock, charge, &g)
}

/// Cocycle-layer transporter for a morphism into U(n); entries carry only coefficients.
pub fn rho_layer_transporter(sigma: &SigmaMorphism, nerve: &NerveGraph) -> Result<SectorTransporter> {
    let g = transition_cocycle(sigma, nerve)?;
    let cover = nerve.cover().clone();
    let mut entries = BTreeMap::new();
    for step in all_steps(&cover) {
        let c = g.step_value(&step)?;
        entries.insert(step, TransporterEntry { step, coefficient: c, op: None });
    }
    Ok(SectorTransporter {
        kind: TransporterKind::Rho,
        cover,
        charge: 0,
        implementers: vec![],
        window: None,
        entries,
        identity: sigma.kind().identity(),
    })
}

/// Product of entries along `p`, later steps on the left. An empty path
/// gives the stay entry `z_{aa}`.
pub fn z_path(z: &SectorTransporter, p: &PosetPath) -> Result<FieldOp> {
    let op_of = |s: &Step| -> Result<FieldOp> {
        z.entry(s)?.op.clone().ok_or(Error::NoFockRealization)
    };
    if p.is_empty() {
        return op_of(&Step::stay(p.start()));
    }
    let mut acc: Option<FieldOp> = None;
    for s in p.steps() {
        let op = op_of(s)?;
        acc = Some(match acc {
            None => op,
            Some(a) => &op * &a,
        });
    }
    Ok(acc.expect("non-empty path"))
}

/// Telescoped form of `z_p`: (end, start, product of coefficients).
pub fn telescoped(z: &SectorTransporter, p: &PosetPath) -> Result<(RegionId, RegionId, GroupValue)> {
    Ok((p.end(), p.start(), crate::cocycle::holonomy(z, p)?))
}

/// `c phi_end phi_start^*` for the telescoped form of `z_p`.
pub fn telescoped_op(z: &SectorTransporter, p: &PosetPath) -> Result<FieldOp> {
    let (end, start, c) = telescoped(z, p)?;
    let scalar = c.to_complex().ok_or(Error::NoFockRealization)?;
    let (Some(e), Some(s)) = (z.implementer(end), z.implementer(start)) else {
        return Err(Error::NoFockRealization);
    };
    Ok((&e.op * &s.op.adjoint()).scale(scalar))
}

/// Window residual of `z_{o a} z_{a e} = z_{o e}` for the steps `e -> a -> o`.
pub fn window_cocycle_residual(z: &SectorTransporter, ae: Step, oa: Step, oe: Step) -> Result<f64> {
    let op = |s: &Step| z.entry(s)?.op.clone().ok_or(Error::NoFockRealization);
    let lhs = &op(&oa)? * &op(&ae)?;
    let diff = &lhs - &op(&oe)?;
    Ok(max_norm(&z.compress(&diff)?))
}

/// Scalar by which a loop transport acts on the window, i.e. `c` with
/// `P_W z_l P_W = c E_aa`. On the cocycle layer this is the coefficient product.
pub fn topological_component(z: &SectorTransporter, l: &PosetPath) -> Result<GroupValue> {
    topological_component_with(z, l, EQ_TOL)
}

pub fn topological_component_with(z: &SectorTransporter, l: &PosetPath, tol: f64) -> Result<GroupValue> {
    if !l.is_loop() {
        return Err(Error::NotALoop {
            start: z.cover.name(l.start()).to_string(),
            end: z.cover.name(l.end()).to_string(),
        });
    }
    if z.kind == TransporterKind::Rho {
        return crate::cocycle::holonomy(z, l);
    }
    let window = z.fock_window()?;
    let a = l.start();
    let m = window.compress(&z_path(z, l)?);
    let ia = window.index_of(a).ok_or(Error::NoFockRealization)?;
    let c = m[(ia, ia)];
    let target = window.unit_at(a).expect("region in window") * c;
    let residual = max_norm(&(m - target)).max((c.norm() - 1.0).abs());
    if residual > tol {
        return Err(Error::NonScalarCompression { residual });
    }
    Ok(GroupValue::Phase(Phase::from_complex(c)))
}

/// `<z_q v_a, z_p v_a>` for paths `p`, `q` with common endpoints.
pub fn transition_amplitude(z: &SectorTransporter, q: &PosetPath, p: &PosetPath) -> Result<Complex64> {
    if p.start() != q.start() || p.end() != q.end() {
        return Err(Error::EndpointMismatch {
            end: format!("{}..{}", z.cover.name(q.start()), z.cover.name(q.end())),
            start: format!("{}..{}", z.cover.name(p.start()), z.cover.name(p.end())),
        });
    }
    let window = z.fock_window()?;
    let v = &window.basis()[window.index_of(p.start()).ok_or(Error::NoFockRealization)?];
    let zp = z_path(z, p)?.apply(v);
    let zq = z_path(z, q)?.apply(v);
    Ok(zq.dotc(&zp))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub dhr: bool,
    pub dimension: usize,
    /// Topological component on each reduced generator loop, by generator name.
    pub generators: Vec<(String, GroupValue)>,
}

/// DHR iff every reduced generator loop has trivial topological component.
pub fn classify(z: &SectorTransporter, nerve: &NerveGraph) -> Result<Classification> {
    classify_with(z, nerve, EQ_TOL)
}

pub fn classify_with(z: &SectorTransporter, nerve: &NerveGraph, tol: f64) -> Result<Classification> {
    let reduced = nerve.presentation().reduced();
    let mut generators = Vec::with_capacity(reduced.names.len());
    for (name, &g) in reduced.names.iter().zip(&reduced.survivors) {
        let c = topological_component_with(z, &nerve.generator_loop(g), tol)?;
        generators.push((name.clone(), c));
    }
    let dhr = generators.iter().all(|(_, c)| c.is_identity(tol));
    Ok(Classification { dhr, dimension: z.dimension(), generators })
}

/// `pi_o(t) = phi_o t phi_o^*` for gauge-invariant `t`.
pub fn charge_morphism(z: &SectorTransporter, o: RegionId, t: &FieldOp) -> Result<FieldOp> {
    match t.grade() {
        Grade::Definite(0) => {}
        Grade::Definite(k) => return Err(Error::NotGaugeInvariant(k)),
        Grade::Mixed => return Err(Error::MixedGrade),
    }
    let phi = &z.implementer(o).ok_or(Error::NoFockRealization)?.op;
    Ok(&(phi * t) * &phi.adjoint())
}

/// Window residual of `z_{o'o} pi_o(t) = pi_{o'}(t) z_{o'o}`.
pub fn intertwining_residual(z: &SectorTransporter, step: Step, t: &FieldOp) -> Result<f64> {
    let zo = z.entry(&step)?.op.clone().ok_or(Error::NoFockRealization)?;
    let lhs = &zo * &charge_morphism(z, step.from, t)?;
    let rhs = &charge_morphism(z, step.to, t)? * &zo;
    Ok(max_norm(&z.compress(&(&lhs - &rhs))?))
}

/// Residual of `pi_o(t) = t` on the charged vector `v_o`, for `t` localized away from `o`.
pub fn localization_residual(z: &SectorTransporter, o: RegionId, t: &FieldOp) -> Result<f64> {
    let window = z.fock_window()?;
    let e = window.unit_at(o).ok_or(Error::NoFockRealization)?;
    let diff = window.compress(&(&charge_morphism(z, o, t)? - t));
    Ok(max_norm(&(&e * diff * &e)))
}

/// Per-region phases `lambda` with `z2_{oa} = lambda_o z1_{oa} lambda_a^{-1}`, if they exist.
pub fn sector_equivalence(
    z1: &SectorTransporter,
    z2: &SectorTransporter,
    nerve: &NerveGraph,
) -> Result<Option<Vec<Phase>>> {
    let cover = nerve.cover();
    let ratios = cover
        .overlaps()
        .iter()
        .map(|o| {
            let s = Step::new(o.lo, o.hi, o.component);
            let a = z1.entry(&s)?.coefficient.as_phase().ok_or(Error::NotU1("U(n)".into()))?;
            let b = z2.entry(&s)?.coefficient.as_phase().ok_or(Error::NotU1("U(n)".into()))?;
            Ok(GroupValue::Phase(b.compose(a.inverse())))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio = TransitionCocycle::from_edge_values(cover, GroupKind::U1, ratios)?;
    Ok(match trivialize_with(&ratio, nerve, EQ_TOL)? {
        Trivialization::Coboundary(l) => Some(l.iter().map(|v| v.as_phase().expect("U(1)")).collect()),
        Trivialization::Witness(_) => None,
    })
}

/// Ordered product of cocycle-layer coefficients around `l`.
pub fn rho_holonomy(z: &SectorTransporter, l: &PosetPath) -> Result<GroupValue> {
    crate::cocycle::holonomy(z, l)
}

/// The same product recomputed as a path-ordered exponential of step logarithms.
pub fn rho_holonomy_via_log(z: &SectorTransporter, l: &PosetPath) -> Result<GroupValue> {
    let mut logs = Vec::with_capacity(l.len());
    for s in l.steps() {
        let c = &z.entry(s)?.coefficient;
        logs.push(match c {
            GroupValue::Matrix(u) => unitary_log(u)?,
            GroupValue::Phase(p) => crate::group::LieValue::Scalar(p.angle()),
            other => return Err(Error::NotU1(other.kind().to_string())),
        });
    }
    if logs.is_empty() {
        return Ok(z.identity.clone());
    }
    path_ordered_exp(&logs)
}
