//! Whitehead graphs, Whitehead automorphisms and length minimization.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{GraphReport, Multigraph};
use crate::words::{cyclic_normal_form, root_decomposition, Basis, CyclicWord, Letter, Word};

pub const DEFAULT_LEVEL_SET_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiword {
    basis: Basis,
    members: Vec<Word>,
}

impl Multiword {
    pub fn new(basis: Basis, members: Vec<Word>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyWord);
        }
        for m in &members {
            if m.basis() != basis {
                return Err(Error::BasisMismatch { left: basis.rank(), right: m.basis().rank() });
            }
            if m.is_empty() {
                return Err(Error::EmptyWord);
            }
        }
        Ok(Multiword { basis, members })
    }

    pub fn parse(words: &[&str], basis: Basis) -> Result<Self> {
        let members = words.iter().map(|s| Word::parse(s, basis)).collect::<Result<Vec<_>>>()?;
        Multiword::new(basis, members)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn members(&self) -> &[Word] {
        &self.members
    }
}

/// How an original member sits over its root: conjugate to `root^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberRoot {
    pub root: usize,
    pub exponent: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedMultiword {
    basis: Basis,
    roots: Vec<CyclicWord>,
    multiplicity: Vec<usize>,
    members: Vec<MemberRoot>,
}

pub fn normalize_multiword(mw: &Multiword) -> Result<NormalizedMultiword> {
    let mut roots: Vec<CyclicWord> = Vec::new();
    let mut multiplicity = Vec::new();
    let mut members = Vec::new();
    for w in mw.members() {
        let class = cyclic_normal_form(w)?.cyclic;
        let rd = root_decomposition(&class)?;
        let e = rd.exponent as i64;
        let inv = rd.root.inverse();
        let found = roots.iter().enumerate().find_map(|(j, r)| {
            if *r == rd.root {
                Some((j, e))
            } else if *r == inv {
                Some((j, -e))
            } else {
                None
            }
        });
        let (j, exponent) = match found {
            Some(hit) => hit,
            None => {
                roots.push(rd.root);
                multiplicity.push(0);
                (roots.len() - 1, e)
            }
        };
        multiplicity[j] += 1;
        members.push(MemberRoot { root: j, exponent });
    }
    Ok(NormalizedMultiword { basis: mw.basis(), roots, multiplicity, members })
}

impl NormalizedMultiword {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn roots(&self) -> &[CyclicWord] {
        &self.roots
    }

    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn members(&self) -> &[MemberRoot] {
        &self.members
    }

    pub fn total_length(&self) -> usize {
        self.roots.iter().map(CyclicWord::len).sum()
    }

    /// Same root bookkeeping with the roots replaced, e.g. by their images.
    pub fn with_roots(&self, roots: Vec<CyclicWord>) -> NormalizedMultiword {
        assert_eq!(roots.len(), self.roots.len());
        NormalizedMultiword { roots, ..self.clone() }
    }

    /// Roots alone as a multiword of indivisible cyclically reduced words.
    pub fn roots_multiword(&self) -> Multiword {
        Multiword { basis: self.basis, members: self.roots.iter().map(CyclicWord::to_word).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhiteheadEdge {
    /// Direction vertices `x^-1` and `y` for an occurrence of `xy`.
    pub ends: (Letter, Letter),
    pub root: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhiteheadGraph {
    basis: Basis,
    edges: Vec<WhiteheadEdge>,
}

pub fn build_whitehead_graph(nmw: &NormalizedMultiword) -> WhiteheadGraph {
    let mut edges = Vec::new();
    for (j, root) in nmw.roots.iter().enumerate() {
        for i in 0..root.len() {
            let (x, y) = (root.at(i), root.at(i + 1));
            edges.push(WhiteheadEdge { ends: (-x, y), root: j, position: i });
        }
    }
    WhiteheadGraph { basis: nmw.basis, edges }
}

impl WhiteheadGraph {
    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn edges(&self) -> &[WhiteheadEdge] {
        &self.edges
    }

    pub fn degree(&self, x: Letter) -> usize {
        self.edges.iter().map(|e| usize::from(e.ends.0 == x) + usize::from(e.ends.1 == x)).sum()
    }

    /// Vertices are direction indices in [`Basis::directions`] order.
    pub fn to_multigraph(&self) -> Multigraph {
        let mut g = Multigraph::new(self.basis.degree());
        for e in &self.edges {
            g.add_edge(self.basis.direction_index(e.ends.0), self.basis.direction_index(e.ends.1));
        }
        g
    }
}

impl WhiteheadGraph {
    /// DOT text: one node per direction, one edge per occurrence, with the
    /// component and cut-vertex status as attributes.
    pub fn to_dot(&self) -> String {
        let report = analyze_graph(self);
        let alphabet = crate::words::Alphabet::STANDARD;
        let mut out = String::from("graph whitehead {\n");
        for (i, x) in self.basis.directions().enumerate() {
            let label = alphabet.letter(x).map(String::from).unwrap_or_else(|| x.to_string());
            let component = report.component_of[i].map_or("none".to_string(), |c| c.to_string());
            let shape = if report.cut_vertices.contains(&i) { "box" } else { "ellipse" };
            out.push_str(&format!("  v{i} [label=\"{label}\", component=\"{component}\", shape={shape}];\n"));
        }
        for e in &self.edges {
            let (u, v) = (self.basis.direction_index(e.ends.0), self.basis.direction_index(e.ends.1));
            out.push_str(&format!("  v{u} -- v{v} [root={}, position={}];\n", e.root, e.position));
        }
        out.push_str("}\n");
        out
    }
}

pub fn analyze_graph(g: &WhiteheadGraph) -> GraphReport {
    g.to_multigraph().analyze()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WhiteheadMove {
    /// Signed permutation: generator `g` maps to `images[g - 1]`.
    Permutation { images: Vec<Letter> },
    /// Multiplier move. Letters `y` outside `{m, m^-1}` map to
    /// `(m if y^-1 in S) * y * (m^-1 if y in S)`; `m` is fixed.
    Multiplier { multiplier: Letter, set: Vec<Letter> },
}

impl WhiteheadMove {
    pub fn multiplier(multiplier: Letter, mut set: Vec<Letter>) -> Self {
        set.sort_unstable();
        set.dedup();
        WhiteheadMove::Multiplier { multiplier, set }
    }

    pub fn validate(&self, basis: Basis) -> Result<()> {
        match self {
            WhiteheadMove::Permutation { images } => {
                if images.len() != basis.rank() {
                    return Err(Error::MalformedMove(format!(
                        "permutation has {} images for rank {}",
                        images.len(),
                        basis.rank()
                    )));
                }
                let mut seen = vec![false; basis.rank()];
                for &x in images {
                    if !basis.contains(x) {
                        return Err(Error::MalformedMove(format!("image {x} out of range")));
                    }
                    let g = x.unsigned_abs() as usize - 1;
                    if seen[g] {
                        return Err(Error::MalformedMove("images are not a signed permutation".into()));
                    }
                    seen[g] = true;
                }
                Ok(())
            }
            WhiteheadMove::Multiplier { multiplier, set } => {
                if !basis.contains(*multiplier) || set.iter().any(|&x| !basis.contains(x)) {
                    return Err(Error::MalformedMove("direction out of range".into()));
                }
                if !set.contains(multiplier) || set.contains(&-multiplier) {
                    return Err(Error::MalformedMove("set must contain m and not m^-1".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            WhiteheadMove::Permutation { images } => images.iter().enumerate().all(|(i, &x)| x == i as Letter + 1),
            WhiteheadMove::Multiplier { set, .. } => set.len() == 1,
        }
    }

    pub fn inverse(&self) -> WhiteheadMove {
        match self {
            WhiteheadMove::Permutation { images } => {
                let mut inv = vec![0; images.len()];
                for (i, &x) in images.iter().enumerate() {
                    let g = i as Letter + 1;
                    inv[x.unsigned_abs() as usize - 1] = if x > 0 { g } else { -g };
                }
                WhiteheadMove::Permutation { images: inv }
            }
            WhiteheadMove::Multiplier { multiplier, set } => {
                let m = *multiplier;
                let set = set.iter().map(|&x| if x == m { -m } else { x }).collect();
                WhiteheadMove::multiplier(-m, set)
            }
        }
    }

    fn push_image(&self, y: Letter, out: &mut Vec<Letter>) {
        let mut push = |x: Letter| {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        };
        match self {
            WhiteheadMove::Permutation { images } => {
                let img = images[y.unsigned_abs() as usize - 1];
                push(if y > 0 { img } else { -img });
            }
            WhiteheadMove::Multiplier { multiplier, set } => {
                let m = *multiplier;
                if y == m || y == -m {
                    push(y);
                    return;
                }
                if set.contains(&-y) {
                    push(m);
                }
                push(y);
                if set.contains(&y) {
                    push(-m);
                }
            }
        }
    }

    pub fn apply_letters(&self, letters: &[Letter]) -> Vec<Letter> {
        let mut out = Vec::with_capacity(letters.len() + 4);
        for &y in letters {
            self.push_image(y, &mut out);
        }
        out
    }

    pub fn apply_word(&self, w: &Word) -> Word {
        Word::from_reduced(w.basis(), self.apply_letters(w.letters()))
    }

    /// Image of a conjugacy class.
    pub fn apply_cyclic(&self, v: &CyclicWord) -> CyclicWord {
        let img = self.apply_word(&v.to_word());
        cyclic_normal_form(&img).expect("automorphisms do not kill nontrivial words").cyclic
    }
}

pub fn apply_whitehead_move(mv: &WhiteheadMove, mw: &Multiword) -> Result<Multiword> {
    mv.validate(mw.basis())?;
    let members = mw.members().iter().map(|w| mv.apply_word(w)).collect();
    Ok(Multiword { basis: mw.basis(), members })
}

pub fn replay_moves(moves: &[WhiteheadMove], mw: &Multiword) -> Result<Multiword> {
    moves.iter().try_fold(mw.clone(), |acc, mv| apply_whitehead_move(mv, &acc))
}

/// All non-identity multiplier moves in (multiplier, subset) order, with
/// directions ordered `1, -1, 2, -2, ...` and subsets enumerated by bitmask.
pub fn multiplier_moves(basis: Basis) -> Vec<WhiteheadMove> {
    let mut out = Vec::new();
    for m in basis.directions() {
        let others: Vec<Letter> = basis.directions().filter(|&x| x != m && x != -m).collect();
        for mask in 1u64..(1u64 << others.len()) {
            let mut set = vec![m];
            set.extend(others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x));
            out.push(WhiteheadMove::multiplier(m, set));
        }
    }
    out
}

/// A generating set of the signed permutations: a transposition, a cycle
/// and one inversion.
pub fn permutation_generators(basis: Basis) -> Vec<WhiteheadMove> {
    let n = basis.rank();
    let id: Vec<Letter> = (1..=n as Letter).collect();
    let mut out = Vec::new();
    let mut invert = id.clone();
    invert[0] = -1;
    out.push(WhiteheadMove::Permutation { images: invert });
    if n >= 2 {
        let mut swap = id.clone();
        swap.swap(0, 1);
        out.push(WhiteheadMove::Permutation { images: swap });
    }
    if n >= 3 {
        let cycle: Vec<Letter> = (0..n).map(|i| ((i + 1) % n) as Letter + 1).collect();
        out.push(WhiteheadMove::Permutation { images: cycle.clone() });
        out.push(WhiteheadMove::Permutation { images: cycle }.inverse());
    }
    out
}

fn image_roots(mv: &WhiteheadMove, roots: &[CyclicWord]) -> Vec<CyclicWord> {
    roots.iter().map(|r| mv.apply_cyclic(r)).collect()
}

fn image_length(mv: &WhiteheadMove, roots: &[CyclicWord]) -> usize {
    roots.iter().map(|r| mv.apply_cyclic(r).len()).sum()
}

/// Greedy descent to a Whitehead-minimal position; the returned moves,
/// replayed on `mw` and normalized, give the returned multiword.
pub fn minimize_multiword(mw: &Multiword) -> Result<(NormalizedMultiword, Vec<WhiteheadMove>)> {
    let nmw = normalize_multiword(mw)?;
    let (min, moves) = minimize_normalized(&nmw);
    Ok((min, moves))
}

pub fn minimize_normalized(nmw: &NormalizedMultiword) -> (NormalizedMultiword, Vec<WhiteheadMove>) {
    let candidates = multiplier_moves(nmw.basis);
    let mut roots = nmw.roots.clone();
    let mut total: usize = roots.iter().map(CyclicWord::len).sum();
    let mut moves = Vec::new();
    'descent: loop {
        for mv in &candidates {
            if image_length(mv, &roots) < total {
                roots = image_roots(mv, &roots);
                total = roots.iter().map(CyclicWord::len).sum();
                moves.push(mv.clone());
                continue 'descent;
            }
        }
        break;
    }
    (nmw.with_roots(roots), moves)
}

pub fn is_minimal(nmw: &NormalizedMultiword) -> bool {
    let total = nmw.total_length();
    multiplier_moves(nmw.basis).iter().all(|mv| image_length(mv, &nmw.roots) >= total)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPosition {
    pub position: NormalizedMultiword,
    /// Length-preserving moves from the starting position.
    pub path: Vec<WhiteheadMove>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSet {
    pub positions: Vec<LevelPosition>,
    pub capped: bool,
}

/// Minimal positions reachable by length-preserving moves, in breadth-first
/// order, at most `budget` of them.
pub fn level_set(min: &NormalizedMultiword, budget: usize) -> Result<LevelSet> {
    if !is_minimal(min) {
        return Err(Error::NotMinimal);
    }
    let total = min.total_length();
    let mut moves = permutation_generators(min.basis);
    moves.extend(multiplier_moves(min.basis));
    let mut index: HashMap<Vec<CyclicWord>, usize> = HashMap::new();
    let mut found: Vec<(Vec<CyclicWord>, Option<(usize, usize)>)> = Vec::new();
    index.insert(min.roots.clone(), 0);
    found.push((min.roots.clone(), None));
    let mut queue = VecDeque::from([0usize]);
    let mut capped = false;
    'bfs: while let Some(cur) = queue.pop_front() {
        for (mi, mv) in moves.iter().enumerate() {
            let roots = image_roots(mv, &found[cur].0);
            if roots.iter().map(CyclicWord::len).sum::<usize>() != total || index.contains_key(&roots) {
                continue;
            }
            if found.len() >= budget {
                capped = true;
                break 'bfs;
            }
            index.insert(roots.clone(), found.len());
            queue.push_back(found.len());
            found.push((roots, Some((cur, mi))));
        }
    }
    let positions = (0..found.len())
        .map(|i| {
            let mut path = Vec::new();
            let mut cur = i;
            while let Some((parent, mi)) = found[cur].1 {
                path.push(moves[mi].clone());
                cur = parent;
            }
            path.reverse();
            LevelPosition { position: min.with_roots(found[i].0.clone()), path }
        })
        .collect();
    Ok(LevelSet { positions, capped })
}

/// The minimal Whitehead graph of the roots consists of isolated edges.
pub fn roots_basic(nmw: &NormalizedMultiword) -> bool {
    let (min, _) = minimize_normalized(nmw);
    analyze_graph(&build_whitehead_graph(&min)).all_isolated_edges()
}

/// Whether the members are simultaneously conjugate into a basis: each
/// member indivisible, in its own maximal cyclic class, and the minimal
/// Whitehead graph made of isolated edges.
pub fn is_basic(mw: &Multiword) -> bool {
    let Ok(nmw) = normalize_multiword(mw) else {
        return false;
    };
    if nmw.members.iter().any(|m| m.exponent.abs() != 1) || nmw.multiplicity.iter().any(|&k| k > 1) {
        return false;
    }
    roots_basic(&nmw)
}

/// Outcome of checking the minimal-graph structure properties on a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinimalityViolations {
    pub cut_vertex: bool,
    pub bad_valence_one: bool,
    pub bad_component: bool,
    pub root_split: bool,
}

impl MinimalityViolations {
    pub fn any(&self) -> bool {
        self.cut_vertex || self.bad_valence_one || self.bad_component || self.root_split
    }
}

pub fn minimality_violations(g: &WhiteheadGraph) -> MinimalityViolations {
    let basis = g.basis();
    let report = analyze_graph(g);
    let mut v = MinimalityViolations { cut_vertex: !report.cut_vertices.is_empty(), ..Default::default() };
    for x in basis.directions() {
        if g.degree(x) == 1 {
            let c = report.component_of[basis.direction_index(x)].expect("valence one vertex has a component");
            let comp = &report.components[c];
            let inv = basis.direction_index(-x);
            if !(comp.isolated_edge && comp.vertices.contains(&inv)) {
                v.bad_valence_one = true;
            }
        }
    }
    for comp in &report.components {
        if !comp.two_connected {
            let ok = comp.isolated_edge
                && comp.vertices.len() == 2
                && basis.direction_at(comp.vertices[0]) == -basis.direction_at(comp.vertices[1]);
            if !ok {
                v.bad_component = true;
            }
        }
    }
    let roots = g.edges().iter().map(|e| e.root).max().map_or(0, |m| m + 1);
    for j in 0..roots {
        let mut comps: Vec<usize> = g
            .edges()
            .iter()
            .filter(|e| e.root == j)
            .map(|e| report.component_of[basis.direction_index(e.ends.0)].unwrap())
            .collect();
        comps.dedup();
        comps.sort_unstable();
        comps.dedup();
        if comps.len() > 1 {
            v.root_split = true;
        }
    }
    v
}
