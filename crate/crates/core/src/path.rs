//! Poset paths: chains of elementary steps between overlapping regions.

use std::fmt;

use crate::cover::{Cover, RegionId};
use crate::error::{Error, Result};

/// One elementary step `from -> to` through a single overlap component.
///
/// A step with `from == to` stays inside one region and carries no
/// transition data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub from: RegionId,
    pub to: RegionId,
    pub component: u32,
}

impl Step {
    pub fn new(from: RegionId, to: RegionId, component: u32) -> Self {
        Step { from, to, component }
    }

    pub fn stay(r: RegionId) -> Self {
        Step { from: r, to: r, component: 0 }
    }

    pub fn is_stay(&self) -> bool {
        self.from == self.to
    }

    pub fn reversed(self) -> Step {
        Step { from: self.to, to: self.from, component: self.component }
    }
}

/// A chain of steps starting at `start`. The first step listed is traversed first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PosetPath {
    start: RegionId,
    steps: Vec<Step>,
}

impl PosetPath {
    pub fn empty(at: RegionId) -> Self {
        PosetPath { start: at, steps: Vec::new() }
    }

    /// Validates chaining and that every step runs through an existing overlap component.
    pub fn new(cover: &Cover, start: RegionId, steps: Vec<Step>) -> Result<Self> {
        if start.0 >= cover.num_regions() {
            return Err(Error::InvalidCover(format!("region index {} out of range", start.0)));
        }
        let mut at = start;
        for s in &steps {
            if s.from != at {
                return Err(Error::EndpointMismatch {
                    end: cover.name(at).to_string(),
                    start: cover.name(s.from).to_string(),
                });
            }
            if !s.is_stay() && cover.edge_index(s.from, s.to, s.component).is_none() {
                return Err(Error::NoOverlap {
                    from: cover.name(s.from).to_string(),
                    to: cover.name(s.to).to_string(),
                    component: Some(s.component),
                });
            }
            at = s.to;
        }
        Ok(PosetPath { start, steps })
    }

    pub(crate) fn from_parts_unchecked(start: RegionId, steps: Vec<Step>) -> Self {
        PosetPath { start, steps }
    }

    pub fn start(&self) -> RegionId {
        self.start
    }

    pub fn end(&self) -> RegionId {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_loop(&self) -> bool {
        self.start == self.end()
    }

    /// Regions in visiting order, including the start.
    pub fn visited(&self) -> Vec<RegionId> {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.to)).collect()
    }

    pub fn display<'a>(&'a self, cover: &'a Cover) -> PathDisplay<'a> {
        PathDisplay { path: self, cover }
    }
}

pub struct PathDisplay<'a> {
    path: &'a PosetPath,
    cover: &'a Cover,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cover.name(self.path.start))?;
        for s in &self.path.steps {
            write!(f, " -> {}", self.cover.name(s.to))?;
            if s.component != 0 {
                write!(f, ":{}", s.component)?;
            }
        }
        Ok(())
    }
}

/// `p` followed by `q`.
pub fn path_compose(p: &PosetPath, q: &PosetPath) -> Result<PosetPath> {
    if p.end() != q.start {
        return Err(Error::EndpointMismatch {
            end: format!("#{}", p.end().0),
            start: format!("#{}", q.start.0),
        });
    }
    let mut steps = p.steps.clone();
    steps.extend_from_slice(&q.steps);
    Ok(PosetPath { start: p.start, steps })
}

pub fn path_reverse(p: &PosetPath) -> PosetPath {
    PosetPath { start: p.end(), steps: p.steps.iter().rev().map(|s| s.reversed()).collect() }
}

/// One step per consecutive pair of `visited`, through the lowest overlap component.
/// Repeated consecutive regions become stay steps.
pub fn approximate_curve(cover: &Cover, visited: &[RegionId]) -> Result<PosetPath> {
    let Some(&start) = visited.first() else {
        return Err(Error::InvalidCover("a curve must visit at least one region".into()));
    };
    let mut steps = Vec::with_capacity(visited.len().saturating_sub(1));
    for w in visited.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            steps.push(Step::stay(a));
            continue;
        }
        let component = *cover.components(a, b).first().ok_or_else(|| Error::NoOverlap {
            from: cover.name(a).to_string(),
            to: cover.name(b).to_string(),
            component: None,
        })?;
        steps.push(Step::new(a, b, component));
    }
    PosetPath::new(cover, start, steps)
}

/// Like [`approximate_curve`] but addressed by region names; an entry `name:k`
/// forces overlap component `k` for the step into that region.
pub fn approximate_named(cover: &Cover, visited: &[&str]) -> Result<PosetPath> {
    let mut regions = Vec::with_capacity(visited.len());
    let mut forced = Vec::with_capacity(visited.len());
    for v in visited {
        let (name, comp) = match v.rsplit_once(':') {
            Some((n, c)) => {
                let c = c
                    .trim()
                    .parse::<u32>()
                    .map_err(|_| Error::UnknownRegion((*v).to_string()))?;
                (n.trim(), Some(c))
            }
            None => (v.trim(), None),
        };
        regions.push(cover.region(name)?);
        forced.push(comp);
    }
    let mut path = approximate_curve(cover, &regions)?;
    for (i, comp) in forced.iter().enumerate().skip(1) {
        if let Some(c) = comp {
            path.steps[i - 1].component = *c;
        }
    }
    PosetPath::new(cover, path.start, path.steps)
}
