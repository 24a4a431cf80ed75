//! Gauge group values and Lie algebra steps.
//!
//! Four concrete groups are supported: U(1) phases (stored as canonical
//! angles so repeated composition never drifts off the unit circle), U(n)
//! matrices, free groups (reduced words) and cyclic groups. All values are
//! immutable; every operation returns a fresh value.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Global equality contract for group values.
pub const EQ_TOL: f64 = 1e-10;
/// Unitarity deviation accepted when constructing a U(n) value.
pub const UNITARY_TOL: f64 = 1e-10;
/// Anti-Hermiticity deviation accepted for a matrix Lie algebra value.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-12;

/// Maps an angle into the canonical range (-pi, pi].
pub fn wrap_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// A unit complex number stored as its canonical angle.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Phase(f64);

impl Phase {
    pub const ONE: Phase = Phase(0.0);

    pub fn new(theta: f64) -> Self {
        Phase(wrap_angle(theta))
    }

    pub fn from_complex(z: Complex64) -> Self {
        Phase::new(z.arg())
    }

    pub fn angle(self) -> f64 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }

    pub fn compose(self, other: Phase) -> Phase {
        Phase::new(self.0 + other.0)
    }

    pub fn inverse(self) -> Phase {
        Phase::new(-self.0)
    }

    pub fn pow(self, k: i64) -> Phase {
        Phase::new(self.0 * k as f64)
    }

    /// Angular distance in [0, pi].
    pub fn distance(self, other: Phase) -> f64 {
        wrap_angle(self.0 - other.0).abs()
    }
}

/// Element of U(n), validated at construction.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix(CMatrix);

impl UnitaryMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let deviation = unitarity_deviation(&m);
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    /// Like [`UnitaryMatrix::new`] with a caller-chosen tolerance.
    pub fn with_tolerance(m: CMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let deviation = unitarity_deviation(&m);
        if deviation > tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryMatrix(m))
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix(CMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn compose(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(UnitaryMatrix(&self.0 * &other.0))
    }

    pub fn inverse(&self) -> UnitaryMatrix {
        UnitaryMatrix(self.0.adjoint())
    }

    pub fn deviation(&self) -> f64 {
        unitarity_deviation(&self.0)
    }
}

pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

fn unitarity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    max_norm(&(m.adjoint() * m - CMatrix::identity(n, n)))
}

/// One letter of a free-group word: generator index and sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: u32,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: u32) -> Self {
        Letter { generator, inverse: false }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// Freely reduced word over abstract generators.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(g: u32) -> Self {
        FreeWord(vec![Letter::new(g)])
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            match out.last() {
                Some(&last) if last == l.inv() => {
                    out.pop();
                }
                _ => out.push(l),
            }
        }
        FreeWord(out)
    }

    /// Builds a word from (generator, exponent) pairs; exponents may be any integer.
    pub fn from_powers(powers: &[(u32, i64)]) -> Self {
        FreeWord::from_letters(powers.iter().flat_map(|&(g, e)| {
            let l = if e < 0 { Letter::new(g).inv() } else { Letter::new(g) };
            std::iter::repeat(l).take(e.unsigned_abs() as usize)
        }))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self` followed by `other` (concatenate, then reduce).
    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        FreeWord::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::empty();
        for _ in 0..k.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Conjugates away matching first/last letters.
    pub fn cyclically_reduced(&self) -> FreeWord {
        let mut v = self.0.as_slice();
        while v.len() >= 2 && v[0] == v[v.len() - 1].inv() {
            v = &v[1..v.len() - 1];
        }
        FreeWord(v.to_vec())
    }

    pub fn occurrences(&self, g: u32) -> usize {
        self.0.iter().filter(|l| l.generator == g).count()
    }

    pub fn exponent_sum(&self, g: u32) -> i64 {
        self.0.iter().filter(|l| l.generator == g).map(|l| l.exponent()).sum()
    }

    /// Replaces every generator `g` with `images[g]`.
    pub fn substitute(&self, images: &[FreeWord]) -> FreeWord {
        FreeWord::from_letters(self.0.iter().flat_map(|l| {
            let img = &images[l.generator as usize];
            if l.inverse {
                img.inverse().0
            } else {
                img.0.clone()
            }
        }))
    }

    /// Evaluates the word with the given generator values; `identity` is the empty product.
    pub fn evaluate(&self, values: &[GroupValue], identity: &GroupValue) -> Result<GroupValue> {
        let mut acc = identity.clone();
        for l in &self.0 {
            let v = values
                .get(l.generator as usize)
                .ok_or_else(|| Error::MissingGenerator(format!("#{}", l.generator)))?;
            let v = if l.inverse { v.inverse() } else { v.clone() };
            acc = acc.compose(&v)?;
        }
        Ok(acc)
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names: Some(names) }
    }
}

pub struct WordDisplay<'a> {
    word: &'a FreeWord,
    names: Option<&'a [String]>,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        for (i, l) in self.word.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match self.names.and_then(|n| n.get(l.generator as usize)) {
                Some(name) => write!(f, "{name}")?,
                None => write!(f, "x{}", l.generator)?,
            }
            if l.inverse {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        WordDisplay { word: self, names: None }.fmt(f)
    }
}

/// Residue class in Z/nZ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cyclic {
    residue: u64,
    modulus: u64,
}

impl Cyclic {
    pub fn new(residue: i64, modulus: u64) -> Self {
        assert!(modulus > 0, "cyclic modulus must be positive");
        Cyclic { residue: residue.rem_euclid(modulus as i64) as u64, modulus }
    }

    pub fn residue(self) -> u64 {
        self.residue
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }
}

/// Which group a value lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    U1,
    Un(usize),
    Free,
    Cyclic(u64),
}

impl GroupKind {
    pub fn identity(self) -> GroupValue {
        match self {
            GroupKind::U1 => GroupValue::Phase(Phase::ONE),
            GroupKind::Un(n) => GroupValue::Matrix(UnitaryMatrix::identity(n)),
            GroupKind::Free => GroupValue::Word(FreeWord::empty()),
            GroupKind::Cyclic(n) => GroupValue::Cyclic(Cyclic::new(0, n)),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::U1 => write!(f, "U(1)"),
            GroupKind::Un(n) => write!(f, "U({n})"),
            GroupKind::Free => write!(f, "free group"),
            GroupKind::Cyclic(n) => write!(f, "Z/{n}"),
        }
    }
}

/// An element of one of the supported gauge groups.
#[derive(Debug, Clone)]
pub enum GroupValue {
    Phase(Phase),
    Matrix(UnitaryMatrix),
    Word(FreeWord),
    Cyclic(Cyclic),
}

impl GroupValue {
    pub fn phase(theta: f64) -> Self {
        GroupValue::Phase(Phase::new(theta))
    }

    pub fn matrix(m: CMatrix) -> Result<Self> {
        UnitaryMatrix::new(m).map(GroupValue::Matrix)
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupValue::Phase(_) => GroupKind::U1,
            GroupValue::Matrix(u) => GroupKind::Un(u.dim()),
            GroupValue::Word(_) => GroupKind::Free,
            GroupValue::Cyclic(c) => GroupKind::Cyclic(c.modulus),
        }
    }

    pub fn identity_like(&self) -> GroupValue {
        self.kind().identity()
    }

    fn mismatch(&self, other: &GroupValue) -> Error {
        Error::VariantMismatch { left: self.kind().to_string(), right: other.kind().to_string() }
    }

    /// Group product `self * other`.
    pub fn compose(&self, other: &GroupValue) -> Result<GroupValue> {
        match (self, other) {
            (GroupValue::Phase(a), GroupValue::Phase(b)) => Ok(GroupValue::Phase(a.compose(*b))),
            (GroupValue::Matrix(a), GroupValue::Matrix(b)) => a.compose(b).map(GroupValue::Matrix),
            (GroupValue::Word(a), GroupValue::Word(b)) => Ok(GroupValue::Word(a.concat(b))),
            (GroupValue::Cyclic(a), GroupValue::Cyclic(b)) if a.modulus == b.modulus => Ok(
                GroupValue::Cyclic(Cyclic::new((a.residue + b.residue) as i64, a.modulus)),
            ),
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn inverse(&self) -> GroupValue {
        match self {
            GroupValue::Phase(p) => GroupValue::Phase(p.inverse()),
            GroupValue::Matrix(u) => GroupValue::Matrix(u.inverse()),
            GroupValue::Word(w) => GroupValue::Word(w.inverse()),
            GroupValue::Cyclic(c) => GroupValue::Cyclic(Cyclic::new(-(c.residue as i64), c.modulus)),
        }
    }

    pub fn pow(&self, k: i64) -> GroupValue {
        match self {
            GroupValue::Phase(p) => GroupValue::Phase(p.pow(k)),
            GroupValue::Word(w) => GroupValue::Word(w.pow(k)),
            GroupValue::Cyclic(c) => GroupValue::Cyclic(Cyclic::new(
                (c.residue as i128 * k as i128).rem_euclid(c.modulus as i128) as i64,
                c.modulus,
            )),
            GroupValue::Matrix(u) => {
                let base = if k < 0 { u.inverse() } else { u.clone() };
                let mut acc = UnitaryMatrix::identity(u.dim());
                for _ in 0..k.unsigned_abs() {
                    acc = UnitaryMatrix(&acc.0 * &base.0);
                }
                GroupValue::Matrix(acc)
            }
        }
    }

    /// Distance under the global comparison contract: angular distance for
    /// phases, max-norm for matrices, 0 or infinity for words and residues.
    pub fn distance(&self, other: &GroupValue) -> Result<f64> {
        match (self, other) {
            (GroupValue::Phase(a), GroupValue::Phase(b)) => Ok(a.distance(*b)),
            (GroupValue::Matrix(a), GroupValue::Matrix(b)) => {
                if a.dim() != b.dim() {
                    return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
                }
                Ok(max_norm(&(&a.0 - &b.0)))
            }
            (GroupValue::Word(a), GroupValue::Word(b)) => {
                Ok(if a == b { 0.0 } else { f64::INFINITY })
            }
            (GroupValue::Cyclic(a), GroupValue::Cyclic(b)) if a.modulus == b.modulus => {
                Ok(if a.residue == b.residue { 0.0 } else { f64::INFINITY })
            }
            _ => Err(self.mismatch(other)),
        }
    }

    pub fn approx_eq(&self, other: &GroupValue, tol: f64) -> bool {
        self.distance(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&self.identity_like(), tol)
    }

    pub fn as_phase(&self) -> Option<Phase> {
        match self {
            GroupValue::Phase(p) => Some(*p),
            _ => None,
        }
    }

    pub fn as_matrix(&self) -> Option<&UnitaryMatrix> {
        match self {
            GroupValue::Matrix(u) => Some(u),
            _ => None,
        }
    }

    /// Scalar image under the defining representation, for 1-dimensional values.
    pub fn to_complex(&self) -> Option<Complex64> {
        match self {
            GroupValue::Phase(p) => Some(p.to_complex()),
            GroupValue::Matrix(u) if u.dim() == 1 => Some(u.0[(0, 0)]),
            GroupValue::Cyclic(c) => {
                Some(Complex64::from_polar(1.0, 2.0 * PI * c.residue as f64 / c.modulus as f64))
            }
            _ => None,
        }
    }
}

impl PartialEq for GroupValue {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, EQ_TOL)
    }
}

impl fmt::Display for GroupValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupValue::Phase(p) => write!(f, "Phase({:.12})", p.angle()),
            GroupValue::Matrix(u) => {
                write!(f, "[")?;
                for r in 0..u.dim() {
                    if r > 0 {
                        write!(f, "; ")?;
                    }
                    for c in 0..u.dim() {
                        if c > 0 {
                            write!(f, ", ")?;
                        }
                        let z = u.0[(r, c)];
                        write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
                    }
                }
                write!(f, "]")
            }
            GroupValue::Word(w) => write!(f, "{w}"),
            GroupValue::Cyclic(c) => write!(f, "{} mod {}", c.residue, c.modulus),
        }
    }
}

/// Lie algebra element: a real angle for U(1) or an anti-Hermitian matrix.
#[derive(Debug, Clone)]
pub enum LieValue {
    Scalar(f64),
    Matrix(CMatrix),
}

impl LieValue {
    pub fn anti_hermitian(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let deviation = max_norm(&(&m + m.adjoint()));
        if deviation > ANTI_HERMITIAN_TOL {
            return Err(Error::NotAntiHermitian { deviation });
        }
        Ok(LieValue::Matrix(m))
    }

    pub fn exp(&self) -> GroupValue {
        match self {
            LieValue::Scalar(theta) => GroupValue::phase(*theta),
            LieValue::Matrix(x) => GroupValue::Matrix(UnitaryMatrix(expm(x))),
        }
    }
}

/// Ordered exponential `exp(X_n) ... exp(X_1)`: later steps act on the left.
///
/// The empty product is the U(1) identity. Scalar steps collapse to a single
/// phase with the summed angle.
pub fn path_ordered_exp(steps: &[LieValue]) -> Result<GroupValue> {
    let Some(first) = steps.first() else {
        return Ok(GroupValue::Phase(Phase::ONE));
    };
    match first {
        LieValue::Scalar(_) => {
            let mut total = 0.0;
            for s in steps {
                match s {
                    LieValue::Scalar(theta) => total += theta,
                    LieValue::Matrix(_) => return Err(Error::MixedLieVariants),
                }
            }
            Ok(GroupValue::phase(total))
        }
        LieValue::Matrix(x0) => {
            let n = x0.nrows();
            let mut acc = CMatrix::identity(n, n);
            for s in steps {
                match s {
                    LieValue::Matrix(x) if x.nrows() == n => acc = expm(x) * acc,
                    LieValue::Matrix(x) => {
                        return Err(Error::DimensionMismatch { expected: n, got: x.nrows() })
                    }
                    LieValue::Scalar(_) => return Err(Error::MixedLieVariants),
                }
            }
            Ok(GroupValue::Matrix(UnitaryMatrix(acc)))
        }
    }
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
pub fn expm(x: &CMatrix) -> CMatrix {
    let n = x.nrows();
    let norm = one_norm(x);
    // Scale so the Taylor series converges fast: ||X / 2^s|| <= 1/2.
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = x * Complex64::new(0.5f64.powi(s), 0.0);

    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &scaled * Complex64::new(1.0 / k as f64, 0.0);
        result += &term;
        if max_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Principal logarithm of a unitary matrix, as an anti-Hermitian matrix.
///
/// Uses the complex Schur form; for a normal matrix the triangular factor is
/// diagonal, so the log acts on the eigenphases.
pub fn unitary_log(u: &UnitaryMatrix) -> Result<LieValue> {
    let n = u.dim();
    let (q, t) = u.0.clone().schur().unpack();
    let mut d = CMatrix::zeros(n, n);
    for k in 0..n {
        d[(k, k)] = Complex64::new(0.0, t[(k, k)].arg());
    }
    let x = &q * d * q.adjoint();
    // Symmetrize away rounding so the anti-Hermitian check is exact.
    let x = (&x - x.adjoint()) * Complex64::new(0.5, 0.0);
    LieValue::anti_hermitian(x)
}
