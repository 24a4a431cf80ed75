//! Finite covers by simply connected regions.
//!
//! A [`Cover`] is the combinatorial stand-in for a spacetime: regions, the
//! connected components of their pairwise overlaps, triple overlaps and the
//! causal-disjointness relation. Overlap components are explicit input, since
//! transition data is constant per component rather than per pair.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionId(pub usize);

/// One connected component of `lo ∩ hi`, with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Overlap {
    pub lo: RegionId,
    pub hi: RegionId,
    pub component: u32,
}

/// Non-empty triple intersection, with the overlap components it sits in.
///
/// `components` are for the pairs (0,1), (1,2), (0,2) of `regions`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triple {
    pub regions: [RegionId; 3],
    pub components: [u32; 3],
}

impl Triple {
    pub fn simple(a: RegionId, b: RegionId, c: RegionId) -> Self {
        Triple { regions: [a, b, c], components: [0, 0, 0] }
    }

    /// The three oriented boundary steps `r0 -> r1 -> r2 -> r0` as (from, to, component).
    pub fn boundary(&self) -> [(RegionId, RegionId, u32); 3] {
        let [a, b, c] = self.regions;
        let [ab, bc, ac] = self.components;
        [(a, b, ab), (b, c, bc), (c, a, ac)]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    names: Vec<String>,
    overlaps: Vec<Overlap>,
    triples: Vec<Triple>,
    disjoint: BTreeSet<(RegionId, RegionId)>,
    base: RegionId,
    edge_index: BTreeMap<(RegionId, RegionId, u32), usize>,
}

fn ordered(a: RegionId, b: RegionId) -> (RegionId, RegionId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Cover {
    /// Builds and validates a cover. Overlaps are given as (a, b, component)
    /// in any orientation; they are stored sorted, and the sorted position is
    /// the edge index used everywhere else.
    pub fn new(
        names: Vec<String>,
        overlaps: Vec<(RegionId, RegionId, u32)>,
        triples: Vec<Triple>,
        disjoint: Vec<(RegionId, RegionId)>,
        base: RegionId,
    ) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::InvalidCover("cover has no regions".into()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != n {
            return Err(Error::InvalidCover("duplicate region names".into()));
        }
        let check = |r: RegionId| -> Result<()> {
            if r.0 < n {
                Ok(())
            } else {
                Err(Error::InvalidCover(format!("region index {} out of range", r.0)))
            }
        };
        check(base)?;

        let mut edges = BTreeSet::new();
        for &(a, b, c) in &overlaps {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::InvalidCover(format!("region '{}' overlaps itself", names[a.0])));
            }
            let (lo, hi) = ordered(a, b);
            if !edges.insert(Overlap { lo, hi, component: c }) {
                return Err(Error::InvalidCover(format!(
                    "duplicate overlap component ({}, {}, {c})",
                    names[lo.0], names[hi.0]
                )));
            }
        }
        let overlaps: Vec<Overlap> = edges.into_iter().collect();
        let edge_index: BTreeMap<_, _> =
            overlaps.iter().enumerate().map(|(i, o)| ((o.lo, o.hi, o.component), i)).collect();

        for t in &triples {
            for r in t.regions {
                check(r)?;
            }
            for (a, b, c) in t.boundary() {
                let (lo, hi) = ordered(a, b);
                if !edge_index.contains_key(&(lo, hi, c)) {
                    return Err(Error::InvalidCover(format!(
                        "triple ({}, {}, {}) needs missing overlap ({}, {}, {c})",
                        names[t.regions[0].0],
                        names[t.regions[1].0],
                        names[t.regions[2].0],
                        names[lo.0],
                        names[hi.0]
                    )));
                }
            }
        }

        let mut disjoint_set = BTreeSet::new();
        for &(a, b) in &disjoint {
            check(a)?;
            check(b)?;
            if a == b {
                return Err(Error::InvalidCover(format!(
                    "region '{}' cannot be disjoint from itself",
                    names[a.0]
                )));
            }
            let (lo, hi) = ordered(a, b);
            if overlaps.iter().any(|o| o.lo == lo && o.hi == hi) {
                return Err(Error::InvalidCover(format!(
                    "pair ({}, {}) is both overlapping and causally disjoint",
                    names[lo.0], names[hi.0]
                )));
            }
            disjoint_set.insert((lo, hi));
        }

        let cover = Cover { names, overlaps, triples, disjoint: disjoint_set, base, edge_index };
        if let Some(r) = cover.unreachable_region() {
            return Err(Error::DisconnectedCover { unreachable: cover.names[r.0].clone() });
        }
        Ok(cover)
    }

    /// Convenience constructor from region names; every overlap is a single
    /// component and every triple uses component 0.
    pub fn from_names(
        names: &[&str],
        overlaps: &[(&str, &str)],
        triples: &[(&str, &str, &str)],
        disjoint: &[(&str, &str)],
        base: &str,
    ) -> Result<Self> {
        let owned: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let id = |s: &str| {
            owned.iter().position(|n| n == s).map(RegionId).ok_or(Error::UnknownRegion(s.into()))
        };
        let ov = overlaps.iter().map(|&(a, b)| Ok((id(a)?, id(b)?, 0))).collect::<Result<_>>()?;
        let tr = triples
            .iter()
            .map(|&(a, b, c)| Ok(Triple::simple(id(a)?, id(b)?, id(c)?)))
            .collect::<Result<_>>()?;
        let dj = disjoint.iter().map(|&(a, b)| Ok((id(a)?, id(b)?))).collect::<Result<_>>()?;
        let base = id(base)?;
        Cover::new(owned, ov, tr, dj, base)
    }

    fn unreachable_region(&self) -> Option<RegionId> {
        let mut seen = vec![false; self.names.len()];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base.0] = true;
        while let Some(r) = queue.pop_front() {
            for (s, _, _) in self.neighbors(r) {
                if !seen[s.0] {
                    seen[s.0] = true;
                    queue.push_back(s);
                }
            }
        }
        seen.iter().position(|&s| !s).map(RegionId)
    }

    pub fn num_regions(&self) -> usize {
        self.names.len()
    }

    pub fn regions(&self) -> impl Iterator<Item = RegionId> {
        (0..self.names.len()).map(RegionId)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, r: RegionId) -> &str {
        &self.names[r.0]
    }

    pub fn region(&self, name: &str) -> Result<RegionId> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(RegionId)
            .ok_or_else(|| Error::UnknownRegion(name.to_string()))
    }

    pub fn base(&self) -> RegionId {
        self.base
    }

    /// Same cover with a different base region.
    pub fn with_base(&self, base: RegionId) -> Result<Cover> {
        if base.0 >= self.names.len() {
            return Err(Error::InvalidCover(format!("region index {} out of range", base.0)));
        }
        Ok(Cover { base, ..self.clone() })
    }

    pub fn overlaps(&self) -> &[Overlap] {
        &self.overlaps
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn disjoint_pairs(&self) -> impl Iterator<Item = (RegionId, RegionId)> + '_ {
        self.disjoint.iter().copied()
    }

    pub fn are_disjoint(&self, a: RegionId, b: RegionId) -> bool {
        self.disjoint.contains(&ordered(a, b))
    }

    /// Edge index of the overlap component between `a` and `b`, either orientation.
    pub fn edge_index(&self, a: RegionId, b: RegionId, component: u32) -> Option<usize> {
        let (lo, hi) = ordered(a, b);
        self.edge_index.get(&(lo, hi, component)).copied()
    }

    /// Components of `a ∩ b`, ascending.
    pub fn components(&self, a: RegionId, b: RegionId) -> Vec<u32> {
        let (lo, hi) = ordered(a, b);
        self.edge_index.range((lo, hi, 0)..=(lo, hi, u32::MAX)).map(|(&(_, _, c), _)| c).collect()
    }

    /// Neighbours of `r` as (region, component, edge index), ordered by region then component.
    pub fn neighbors(&self, r: RegionId) -> Vec<(RegionId, u32, usize)> {
        let mut out: Vec<_> = self
            .overlaps
            .iter()
            .enumerate()
            .filter_map(|(i, o)| {
                if o.lo == r {
                    Some((o.hi, o.component, i))
                } else if o.hi == r {
                    Some((o.lo, o.component, i))
                } else {
                    None
                }
            })
            .collect();
        out.sort();
        out
    }
}

/// Built-in fixture covers with documented fundamental groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    /// `n >= 3` regions in a ring, no triple overlaps. pi_1 = Z.
    Circle(usize),
    /// Two concentric rings of three regions around a hole, triangulated.
    /// pi_1 = Z (the complement of a solenoid).
    Annulus,
    /// Three mutually overlapping regions with a common point. pi_1 = 1.
    Disk,
    /// Two triangular loops sharing a central region. pi_1 = F_2.
    FigureEight,
    /// Seven-region minimal triangulation of the torus. pi_1 = Z^2.
    Torus,
}

impl Builtin {
    pub fn name(&self) -> String {
        match self {
            Builtin::Circle(n) => format!("circle({n})"),
            Builtin::Annulus => "annulus".into(),
            Builtin::Disk => "disk".into(),
            Builtin::FigureEight => "figure_eight".into(),
            Builtin::Torus => "torus".into(),
        }
    }

    /// All fixtures used by property checks, with the circle at `n = 3` and `n = 5`.
    pub fn all() -> Vec<Builtin> {
        vec![
            Builtin::Circle(3),
            Builtin::Circle(5),
            Builtin::Annulus,
            Builtin::Disk,
            Builtin::FigureEight,
            Builtin::Torus,
        ]
    }

    /// A visited-region sequence for a loop generating (one factor of) pi_1.
    pub fn winding_loops(&self) -> Vec<Vec<&'static str>> {
        match self {
            Builtin::Circle(_) => vec![],
            Builtin::Annulus => vec![vec!["i0", "i1", "i2", "i0"]],
            Builtin::Disk => vec![],
            Builtin::FigureEight => vec![vec!["c", "a1", "a2", "c"], vec!["c", "b1", "b2", "c"]],
            Builtin::Torus => vec![
                vec!["t0", "t1", "t2", "t3", "t4", "t5", "t6", "t0"],
                vec!["t0", "t2", "t4", "t6", "t1", "t3", "t5", "t0"],
            ],
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    /// Accepts `annulus`, `disk`, `figure_eight`, `torus`, `circle` (n = 3) or `circle(n)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "annulus" => Ok(Builtin::Annulus),
            "disk" => Ok(Builtin::Disk),
            "figure_eight" | "figure-eight" => Ok(Builtin::FigureEight),
            "torus" => Ok(Builtin::Torus),
            "circle" => Ok(Builtin::Circle(3)),
            _ => {
                let n = s
                    .strip_prefix("circle(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<usize>().ok())
                    .ok_or_else(|| Error::UnknownBuiltin(s.to_string()))?;
                Ok(Builtin::Circle(n))
            }
        }
    }
}

pub fn builtin_cover(which: Builtin) -> Result<Cover> {
    match which {
        Builtin::Circle(n) => circle_cover(n),
        Builtin::Annulus => annulus_cover(),
        Builtin::Disk => Cover::from_names(
            &["d0", "d1", "d2"],
            &[("d0", "d1"), ("d1", "d2"), ("d0", "d2")],
            &[("d0", "d1", "d2")],
            &[],
            "d0",
        ),
        Builtin::FigureEight => Cover::from_names(
            &["c", "a1", "a2", "b1", "b2"],
            &[("c", "a1"), ("a1", "a2"), ("a2", "c"), ("c", "b1"), ("b1", "b2"), ("b2", "c")],
            &[],
            &[("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")],
            "c",
        ),
        Builtin::Torus => torus_cover(),
    }
}

fn circle_cover(n: usize) -> Result<Cover> {
    if n < 3 {
        return Err(Error::CircleTooSmall(n));
    }
    let names: Vec<String> = (0..n).map(|i| format!("r{i}")).collect();
    let overlaps = (0..n).map(|i| (RegionId(i), RegionId((i + 1) % n), 0)).collect();
    let mut disjoint = Vec::new();
    for i in 0..n {
        for j in i + 2..n {
            if !(i == 0 && j == n - 1) {
                disjoint.push((RegionId(i), RegionId(j)));
            }
        }
    }
    Cover::new(names, overlaps, vec![], disjoint, RegionId(0))
}

fn annulus_cover() -> Result<Cover> {
    let names = ["i0", "i1", "i2", "o0", "o1", "o2"];
    let mut overlaps = Vec::new();
    let mut triples = Vec::new();
    let mut disjoint = Vec::new();
    let inner = |k: usize| format!("i{}", k % 3);
    let outer = |k: usize| format!("o{}", k % 3);
    let mut owned_pairs: Vec<(String, String)> = Vec::new();
    let mut owned_triples: Vec<(String, String, String)> = Vec::new();
    for k in 0..3 {
        owned_pairs.push((inner(k), inner(k + 1)));
        owned_pairs.push((outer(k), outer(k + 1)));
        owned_pairs.push((inner(k), outer(k)));
        owned_pairs.push((inner(k + 1), outer(k)));
        owned_triples.push((inner(k), inner(k + 1), outer(k)));
        owned_triples.push((inner(k + 1), outer(k), outer(k + 1)));
    }
    let owned_disjoint: Vec<(String, String)> = (0..3).map(|k| (inner(k), outer(k + 1))).collect();
    overlaps.extend(owned_pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    triples.extend(owned_triples.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())));
    disjoint.extend(owned_disjoint.iter().map(|(a, b)| (a.as_str(), b.as_str())));
    Cover::from_names(&names, &overlaps, &triples, &disjoint, "i0")
}

fn torus_cover() -> Result<Cover> {
    let n = 7;
    let names: Vec<String> = (0..n).map(|i| format!("t{i}")).collect();
    let mut overlaps = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            overlaps.push((RegionId(i), RegionId(j), 0));
        }
    }
    let mut triples = Vec::new();
    for i in 0..n {
        let r = |k: usize| RegionId((i + k) % n);
        triples.push(Triple::simple(r(0), r(1), r(3)));
        triples.push(Triple::simple(r(0), r(2), r(3)));
    }
    Cover::new(names, overlaps, triples, vec![], RegionId(0))
}
