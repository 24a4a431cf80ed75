//! Nerve graph, spanning tree and the edge-path presentation of pi_1.

use std::collections::VecDeque;
use std::fmt;

use crate::cover::{Cover, RegionId};
use crate::error::{Error, Result};
use crate::group::{FreeWord, Letter};
use crate::path::{PosetPath, Step};

/// Graph of a cover with a breadth-first spanning tree rooted at the base region.
#[derive(Debug, Clone, PartialEq)]
pub struct NerveGraph {
    cover: Cover,
    parent: Vec<Option<(RegionId, usize)>>,
    depth: Vec<usize>,
    order: Vec<RegionId>,
    generator_of_edge: Vec<Option<u32>>,
    non_tree: Vec<usize>,
    presentation: Pi1Presentation,
}

/// Finite presentation of pi_1 of the nerve.
///
/// Generator `k` is the `k`-th non-tree edge in edge order, traversed from
/// its lower to its higher region. Relations are the triangle boundary
/// words that do not reduce to the empty word.
#[derive(Debug, Clone, PartialEq)]
pub struct Pi1Presentation {
    pub generators: Vec<String>,
    pub relations: Vec<FreeWord>,
    pub base: RegionId,
    reduced: ReducedPresentation,
}

/// Recognized isomorphism type of a reduced presentation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStructure {
    Trivial,
    Free(usize),
    FreeAbelian(usize),
    Other,
}

impl fmt::Display for GroupStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupStructure::Trivial => write!(f, "trivial"),
            GroupStructure::Free(1) => write!(f, "Z"),
            GroupStructure::Free(n) => write!(f, "F_{n}"),
            GroupStructure::FreeAbelian(n) => write!(f, "Z^{n}"),
            GroupStructure::Other => write!(f, "finitely presented"),
        }
    }
}

/// Presentation after Tietze elimination of generators that occur exactly
/// once in some relation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPresentation {
    /// Surviving raw generator indices; reduced generator `k` is `survivors[k]`.
    pub survivors: Vec<u32>,
    pub names: Vec<String>,
    pub relations: Vec<FreeWord>,
    /// Image of every raw generator as a word over the reduced generators.
    pub images: Vec<FreeWord>,
    pub structure: GroupStructure,
}

/// Normal form used to compare loop classes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CanonicalForm {
    /// Reduced word in a free group.
    Free(FreeWord),
    /// Exponent vector in a free abelian group.
    Abelian(Vec<i64>),
    /// No decidable normal form; the raw word is kept.
    Raw(FreeWord),
}

/// Homotopy class of a loop: the raw word over the presentation generators
/// plus its canonical form.
#[derive(Debug, Clone, Eq, Hash)]
pub struct LoopClass {
    word: FreeWord,
    canonical: CanonicalForm,
}

impl PartialEq for LoopClass {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl LoopClass {
    pub fn word(&self) -> &FreeWord {
        &self.word
    }

    pub fn canonical(&self) -> &CanonicalForm {
        &self.canonical
    }

    pub fn is_trivial(&self) -> bool {
        match &self.canonical {
            CanonicalForm::Free(w) | CanonicalForm::Raw(w) => w.is_empty(),
            CanonicalForm::Abelian(v) => v.iter().all(|&e| e == 0),
        }
    }

    /// Whether equality of classes is decided exactly (free or free abelian groups).
    pub fn is_decidable(&self) -> bool {
        !matches!(self.canonical, CanonicalForm::Raw(_))
    }
}

pub fn build_nerve(cover: &Cover) -> Result<NerveGraph> {
    NerveGraph::new(cover)
}

pub fn pi1_presentation(nerve: &NerveGraph) -> &Pi1Presentation {
    &nerve.presentation
}

impl NerveGraph {
    pub fn new(cover: &Cover) -> Result<Self> {
        let n = cover.num_regions();
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        let mut tree_edge = vec![false; cover.overlaps().len()];
        let base = cover.base();
        depth[base.0] = 0;
        let mut queue = VecDeque::from([base]);
        while let Some(r) = queue.pop_front() {
            order.push(r);
            for (s, _, e) in cover.neighbors(r) {
                if depth[s.0] == usize::MAX {
                    depth[s.0] = depth[r.0] + 1;
                    parent[s.0] = Some((r, e));
                    tree_edge[e] = true;
                    queue.push_back(s);
                }
            }
        }
        if let Some(r) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::DisconnectedCover { unreachable: cover.name(RegionId(r)).into() });
        }

        let mut generator_of_edge = vec![None; tree_edge.len()];
        let mut non_tree = Vec::new();
        for (e, &t) in tree_edge.iter().enumerate() {
            if !t {
                generator_of_edge[e] = Some(non_tree.len() as u32);
                non_tree.push(e);
            }
        }

        let mut nerve = NerveGraph {
            cover: cover.clone(),
            parent,
            depth,
            order,
            generator_of_edge,
            non_tree,
            presentation: Pi1Presentation {
                generators: Vec::new(),
                relations: Vec::new(),
                base,
                reduced: ReducedPresentation::trivial(),
            },
        };
        let generators: Vec<String> = (0..nerve.non_tree.len()).map(|k| format!("g{k}")).collect();
        let mut relations = Vec::new();
        for t in cover.triples() {
            let mut word = FreeWord::empty();
            for (a, b, c) in t.boundary() {
                word = nerve.step_word(&Step::new(a, b, c))?.concat(&word);
            }
            if !word.is_empty() {
                relations.push(word);
            }
        }
        let reduced = ReducedPresentation::reduce(&generators, &relations);
        nerve.presentation = Pi1Presentation { generators, relations, base, reduced };
        Ok(nerve)
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    pub fn base(&self) -> RegionId {
        self.cover.base()
    }

    pub fn presentation(&self) -> &Pi1Presentation {
        &self.presentation
    }

    /// Regions in breadth-first order from the base.
    pub fn bfs_order(&self) -> &[RegionId] {
        &self.order
    }

    pub fn depth(&self, r: RegionId) -> usize {
        self.depth[r.0]
    }

    /// Tree parent of `r` with the connecting edge index; `None` at the base.
    pub fn parent(&self, r: RegionId) -> Option<(RegionId, usize)> {
        self.parent[r.0]
    }

    pub fn is_tree_edge(&self, edge: usize) -> bool {
        self.generator_of_edge[edge].is_none()
    }

    pub fn tree_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.generator_of_edge.len()).filter(|&e| self.is_tree_edge(e))
    }

    /// Non-tree edge indices; position `k` is generator `k`.
    pub fn non_tree_edges(&self) -> &[usize] {
        &self.non_tree
    }

    pub fn generator_of_edge(&self, edge: usize) -> Option<u32> {
        self.generator_of_edge[edge]
    }

    /// Word contributed by one step: empty on tree edges and stays,
    /// `g^{+1}` from lower to higher region on a non-tree edge, `g^{-1}` back.
    pub fn step_word(&self, step: &Step) -> Result<FreeWord> {
        if step.is_stay() {
            return Ok(FreeWord::empty());
        }
        let e = self.cover.edge_index(step.from, step.to, step.component).ok_or_else(|| {
            Error::NoOverlap {
                from: self.cover.name(step.from).to_string(),
                to: self.cover.name(step.to).to_string(),
                component: Some(step.component),
            }
        })?;
        Ok(match self.generator_of_edge[e] {
            None => FreeWord::empty(),
            Some(g) if step.from < step.to => FreeWord::generator(g),
            Some(g) => FreeWord::from_letters([Letter::new(g).inv()]),
        })
    }

    /// Word of an arbitrary path; the first step ends up rightmost.
    pub fn path_word(&self, p: &PosetPath) -> Result<FreeWord> {
        let mut word = FreeWord::empty();
        for s in p.steps() {
            word = self.step_word(s)?.concat(&word);
        }
        Ok(word)
    }

    /// Tree path from the base to `r`.
    pub fn tree_path_from_base(&self, r: RegionId) -> PosetPath {
        let mut steps = Vec::new();
        let mut at = r;
        while let Some((p, e)) = self.parent[at.0] {
            steps.push(Step::new(p, at, self.cover.overlaps()[e].component));
            at = p;
        }
        steps.reverse();
        PosetPath::from_parts_unchecked(self.base(), steps)
    }

    /// Tree path from `r` to the base.
    pub fn tree_path_to_base(&self, r: RegionId) -> PosetPath {
        crate::path::path_reverse(&self.tree_path_from_base(r))
    }

    /// Tree path between any two regions (through the base).
    pub fn tree_path(&self, from: RegionId, to: RegionId) -> PosetPath {
        let down = self.tree_path_to_base(from);
        let up = self.tree_path_from_base(to);
        crate::path::path_compose(&down, &up).expect("tree segments meet at the base")
    }

    /// Loop at the base running once along non-tree edge `edge` from its lower region.
    pub fn edge_loop(&self, edge: usize) -> PosetPath {
        let o = self.cover.overlaps()[edge];
        let mut steps = self.tree_path_from_base(o.lo).steps().to_vec();
        steps.push(Step::new(o.lo, o.hi, o.component));
        steps.extend_from_slice(self.tree_path_to_base(o.hi).steps());
        PosetPath::from_parts_unchecked(self.base(), steps)
    }

    /// Based loop representing raw generator `g`.
    pub fn generator_loop(&self, g: u32) -> PosetPath {
        self.edge_loop(self.non_tree[g as usize])
    }

    /// Homotopy class of a loop. Loops away from the base are conjugated
    /// along the spanning tree, which contributes only empty words.
    pub fn loop_class(&self, p: &PosetPath) -> Result<LoopClass> {
        if !p.is_loop() {
            return Err(Error::NotALoop {
                start: self.cover.name(p.start()).to_string(),
                end: self.cover.name(p.end()).to_string(),
            });
        }
        let word = self.path_word(p)?;
        Ok(self.presentation.reduced.classify(word))
    }

    /// Class of an arbitrary word over the raw generators.
    pub fn class_of_word(&self, word: FreeWord) -> LoopClass {
        self.presentation.reduced.classify(word)
    }
}

pub fn loop_class(nerve: &NerveGraph, p: &PosetPath) -> Result<LoopClass> {
    nerve.loop_class(p)
}

impl Pi1Presentation {
    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn reduced(&self) -> &ReducedPresentation {
        &self.reduced
    }

    pub fn structure(&self) -> GroupStructure {
        self.reduced.structure
    }

    pub fn generator_index(&self, name: &str) -> Option<u32> {
        self.generators.iter().position(|g| g == name).map(|i| i as u32)
    }

    /// Rank of the abelianization, from the relation exponent matrix over Q.
    pub fn abelianization_rank(&self) -> usize {
        let n = self.generators.len();
        let rows: Vec<Vec<i128>> = self
            .relations
            .iter()
            .map(|r| (0..n as u32).map(|g| r.exponent_sum(g) as i128).collect())
            .collect();
        n - integer_rank(rows, n)
    }
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Rank over Q by fraction-free elimination with gcd normalization.
fn integer_rank(mut rows: Vec<Vec<i128>>, cols: usize) -> usize {
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for r in 0..rows.len() {
            if r == rank || rows[r][c] == 0 {
                continue;
            }
            let f = rows[r][c];
            let mut g = 0;
            for k in 0..cols {
                rows[r][k] = rows[r][k] * pivot[c] - f * pivot[k];
                g = gcd(g, rows[r][k]);
            }
            if g > 1 {
                rows[r].iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}

impl ReducedPresentation {
    fn trivial() -> Self {
        ReducedPresentation {
            survivors: vec![],
            names: vec![],
            relations: vec![],
            images: vec![],
            structure: GroupStructure::Trivial,
        }
    }

    fn reduce(generators: &[String], relations: &[FreeWord]) -> Self {
        let n = generators.len();
        let mut images: Vec<FreeWord> = (0..n as u32).map(FreeWord::generator).collect();
        let mut rels: Vec<FreeWord> = relations
            .iter()
            .map(|r| r.cyclically_reduced())
            .filter(|r| !r.is_empty())
            .collect();
        let mut alive = vec![true; n];

        loop {
            let mut pick = None;
            for (ri, r) in rels.iter().enumerate() {
                let candidate = (0..n as u32).rev().find(|&g| alive[g as usize] && r.occurrences(g) == 1);
                if let Some(g) = candidate {
                    pick = Some((ri, g));
                    break;
                }
            }
            let Some((ri, g)) = pick else { break };
            let r = rels.remove(ri);
            let letters = r.letters();
            let pos = letters.iter().position(|l| l.generator == g).unwrap();
            let rotated = FreeWord::from_letters(
                letters[pos + 1..].iter().chain(letters[..pos].iter()).copied(),
            );
            // r ~ g^e * w = 1, so g = w^{-1} for e = +1 and g = w for e = -1.
            let value = if letters[pos].inverse { rotated } else { rotated.inverse() };
            let mut subst: Vec<FreeWord> = (0..n as u32).map(FreeWord::generator).collect();
            subst[g as usize] = value;
            alive[g as usize] = false;
            for img in images.iter_mut() {
                *img = img.substitute(&subst);
            }
            rels = rels
                .iter()
                .map(|w| w.substitute(&subst).cyclically_reduced())
                .filter(|w| !w.is_empty())
                .collect();
            rels.sort();
            rels.dedup();
        }

        let survivors: Vec<u32> = (0..n as u32).filter(|&g| alive[g as usize]).collect();
        let mut renumber: Vec<FreeWord> = vec![FreeWord::empty(); n];
        for (k, &g) in survivors.iter().enumerate() {
            renumber[g as usize] = FreeWord::generator(k as u32);
        }
        let images: Vec<FreeWord> = images.iter().map(|w| w.substitute(&renumber)).collect();
        let relations: Vec<FreeWord> = rels.iter().map(|w| w.substitute(&renumber)).collect();
        let names = survivors.iter().map(|&g| generators[g as usize].clone()).collect();
        let structure = match (survivors.len(), relations.len()) {
            (0, _) => GroupStructure::Trivial,
            (k, 0) => GroupStructure::Free(k),
            (2, 1) if is_commutator(&relations[0]) => GroupStructure::FreeAbelian(2),
            _ => GroupStructure::Other,
        };
        ReducedPresentation { survivors, names, relations, images, structure }
    }

    pub fn num_generators(&self) -> usize {
        self.survivors.len()
    }

    /// Rewrites a raw word over the reduced generators.
    pub fn rewrite(&self, raw: &FreeWord) -> FreeWord {
        raw.substitute(&self.images)
    }

    fn classify(&self, word: FreeWord) -> LoopClass {
        let canonical = match self.structure {
            GroupStructure::Trivial => CanonicalForm::Free(FreeWord::empty()),
            GroupStructure::Free(_) => CanonicalForm::Free(self.rewrite(&word)),
            GroupStructure::FreeAbelian(k) => {
                let w = self.rewrite(&word);
                CanonicalForm::Abelian((0..k as u32).map(|g| w.exponent_sum(g)).collect())
            }
            GroupStructure::Other => CanonicalForm::Raw(word.clone()),
        };
        LoopClass { word, canonical }
    }
}

fn is_commutator(r: &FreeWord) -> bool {
    let l = r.letters();
    l.len() == 4
        && l[0].generator != l[1].generator
        && l[2] == l[0].inv()
        && l[3] == l[1].inv()
}
