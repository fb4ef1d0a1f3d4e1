//! Whitehead graphs over finite subtrees of the Cayley tree.
//!
//! Vertices of the generalized graph are the elements just outside the
//! subtree; each line `g<v>` crossing the subtree contributes one edge
//! joining the frontier vertices where it enters and leaves.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::whitehead::NormalizedMultiword;
use crate::words::{Basis, Letter, Word};

/// The minimal-length element of the coset `start<root>`, ties broken
/// shortlex. `root` must be cyclically reduced.
pub fn canonical_coset_rep(start: &Word, root: &Word) -> Word {
    coset_rep_with_power(start, root).0
}

/// Canonical representative together with the `k` such that it equals
/// `start * root^k`.
pub fn coset_rep_with_power(start: &Word, root: &Word) -> (Word, i64) {
    let len = |k: i64| start.mul(&root.pow(k)).len();
    let mut k = 0i64;
    let step = if len(1) < len(0) {
        1
    } else if len(-1) < len(0) {
        -1
    } else {
        0
    };
    if step != 0 {
        while len(k + step) < len(k) {
            k += step;
        }
    }
    let best = len(k);
    [k - 1, k, k + 1]
        .into_iter()
        .filter(|&j| len(j) == best)
        .map(|j| (start.mul(&root.pow(j)), j))
        .min_by(|a, b| a.0.shortlex_cmp(&b.0))
        .expect("k itself attains the minimum")
}

/// Names the line `rep<v_root>` by its canonical coset representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TranslateId {
    pub root: usize,
    pub representative: Word,
}

impl Serialize for TranslateId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (self.root, self.representative.to_string()).serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subtree {
    basis: Basis,
    vertices: Vec<Word>,
    index: HashSet<Word>,
}

impl Subtree {
    /// A finite connected vertex set containing the identity.
    pub fn new(basis: Basis, vertices: Vec<Word>) -> Result<Self> {
        if !vertices.iter().any(Word::is_empty) {
            return Err(Error::DisconnectedSubtree("identity missing".into()));
        }
        Self::connected(basis, vertices)
    }

    /// Any finite nonempty connected vertex set.
    pub(crate) fn connected(basis: Basis, mut vertices: Vec<Word>) -> Result<Self> {
        if let Some(w) = vertices.iter().find(|w| w.basis() != basis) {
            return Err(Error::BasisMismatch { left: basis.rank(), right: w.basis().rank() });
        }
        vertices.sort_by(|a, b| a.shortlex_cmp(b));
        vertices.dedup();
        let index: HashSet<Word> = vertices.iter().cloned().collect();
        let Some(start) = vertices.first() else {
            return Err(Error::DisconnectedSubtree("empty vertex set".into()));
        };
        let mut seen = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([start.clone()]);
        while let Some(g) = queue.pop_front() {
            for x in basis.directions() {
                let h = g.mul(&Word::from_reduced(basis, vec![x]));
                if index.contains(&h) && seen.insert(h.clone()) {
                    queue.push_back(h);
                }
            }
        }
        if seen.len() != index.len() {
            return Err(Error::DisconnectedSubtree(format!("{} of {} vertices reachable", seen.len(), index.len())));
        }
        Ok(Subtree { basis, vertices, index })
    }

    /// Convex hull in the Cayley tree of a nonempty set of elements.
    pub fn hull(basis: Basis, points: &[Word]) -> Result<Self> {
        let Some(base) = points.first() else {
            return Err(Error::DisconnectedSubtree("empty vertex set".into()));
        };
        let mut vertices = HashSet::new();
        for p in points {
            let path = base.inverse().mul(p);
            let mut cur = base.clone();
            vertices.insert(cur.clone());
            for &x in path.letters() {
                cur = cur.mul(&Word::from_reduced(basis, vec![x]));
                vertices.insert(cur.clone());
            }
        }
        Self::connected(basis, vertices.into_iter().collect())
    }

    /// The ball of the given radius around the identity.
    pub fn ball(basis: Basis, radius: usize) -> Self {
        let mut vertices = vec![Word::identity(basis)];
        let mut layer = vec![Word::identity(basis)];
        for _ in 0..radius {
            let mut next = vec![];
            for g in &layer {
                for x in basis.directions() {
                    if g.letters().last() != Some(&-x) {
                        next.push(g.mul(&Word::from_reduced(basis, vec![x])));
                    }
                }
            }
            vertices.extend(next.iter().cloned());
            layer = next;
        }
        Self::connected(basis, vertices).expect("balls are connected")
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn contains(&self, g: &Word) -> bool {
        self.index.contains(g)
    }

    pub fn internal_degree(&self, g: &Word) -> usize {
        self.basis.directions().filter(|&x| self.contains(&step(g, x))).count()
    }

    /// Elements adjacent to the subtree but outside it, in (vertex, direction) order.
    pub fn frontier(&self) -> Vec<Word> {
        let mut out = vec![];
        for g in &self.vertices {
            for x in self.basis.directions() {
                let h = step(g, x);
                if !self.contains(&h) {
                    out.push(h);
                }
            }
        }
        out
    }
}

fn step(g: &Word, x: Letter) -> Word {
    g.mul(&Word::from_reduced(g.basis(), vec![x]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeneralizedEdge {
    /// Frontier indices where the line enters and leaves the subtree.
    pub ends: (usize, usize),
    pub root: usize,
    pub translate: TranslateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedWhiteheadGraph {
    pub frontier: Vec<Word>,
    /// Sorted by translate.
    pub edges: Vec<GeneralizedEdge>,
}

impl GeneralizedWhiteheadGraph {
    pub fn to_multigraph(&self) -> Multigraph {
        let mut g = Multigraph::new(self.frontier.len());
        for e in &self.edges {
            g.add_edge(e.ends.0, e.ends.1);
        }
        g
    }

    /// DOT text with frontier vertices labelled by their words.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph generalized_whitehead {\n");
        for (i, f) in self.frontier.iter().enumerate() {
            let label = if f.is_empty() { "1".to_string() } else { f.to_string() };
            out.push_str(&format!("  v{i} [label=\"{label}\"];\n"));
        }
        for e in &self.edges {
            out.push_str(&format!(
                "  v{} -- v{} [root={}, translate=\"{}\"];\n",
                e.ends.0, e.ends.1, e.root, e.translate.representative
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn frontier_index(&self, g: &Word) -> Option<usize> {
        self.frontier.iter().position(|f| f == g)
    }

    /// Edge multiset as (entry word, exit word, root, translate) tuples.
    pub fn edge_multiset(&self) -> Vec<(Word, Word, usize, Word)> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .map(|e| {
                (
                    self.frontier[e.ends.0].clone(),
                    self.frontier[e.ends.1].clone(),
                    e.root,
                    e.translate.representative.clone(),
                )
            })
            .collect();
        out.sort();
        out
    }
}

fn root_words(nmw: &NormalizedMultiword) -> Vec<Word> {
    nmw.roots().iter().map(|r| r.to_word()).collect()
}

/// Translate through `g` where `g` sits after letter `i` of `root`.
fn translate_at(g: &Word, root_index: usize, root: &Word, i: usize) -> TranslateId {
    let prefix = Word::from_reduced(root.basis(), root.letters()[..=i].to_vec());
    TranslateId { root: root_index, representative: canonical_coset_rep(&g.mul(&prefix.inverse()), root) }
}

/// Builds the graph by splicing the classical Whitehead graph at each
/// subtree vertex along the subtree's internal edges.
pub fn generalized_whitehead_graph(nmw: &NormalizedMultiword, x: &Subtree) -> Result<GeneralizedWhiteheadGraph> {
    if nmw.basis() != x.basis() {
        return Err(Error::BasisMismatch { left: nmw.basis().rank(), right: x.basis().rank() });
    }
    let frontier = x.frontier();
    let frontier_pos: HashMap<&Word, usize> = frontier.iter().enumerate().map(|(i, w)| (w, i)).collect();
    let roots = root_words(nmw);
    let mut edges = vec![];
    for g in x.vertices() {
        for (j, root) in roots.iter().enumerate() {
            let l = root.len();
            for i in 0..l {
                // local edge at g between incoming letter i and outgoing letter i+1
                let before = step(g, -root.letters()[i]);
                if x.contains(&before) {
                    continue;
                }
                let entry = frontier_pos[&before];
                let (mut cur, mut k) = (g.clone(), i);
                loop {
                    let next = step(&cur, root.letters()[(k + 1) % l]);
                    if !x.contains(&next) {
                        edges.push(GeneralizedEdge {
                            ends: (entry, frontier_pos[&next]),
                            root: j,
                            translate: translate_at(g, j, root, i),
                        });
                        break;
                    }
                    cur = next;
                    k = (k + 1) % l;
                }
            }
        }
    }
    edges.sort_by(|a, b| a.translate.cmp(&b.translate));
    Ok(GeneralizedWhiteheadGraph { frontier, edges })
}

/// Direct construction: walk every line through every subtree vertex in both
/// directions until it leaves the subtree, deduplicating lines by translate.
pub fn axis_walk_oracle(nmw: &NormalizedMultiword, x: &Subtree) -> Result<GeneralizedWhiteheadGraph> {
    if nmw.basis() != x.basis() {
        return Err(Error::BasisMismatch { left: nmw.basis().rank(), right: x.basis().rank() });
    }
    let frontier = x.frontier();
    let roots = root_words(nmw);
    let mut lines: BTreeMap<TranslateId, (Word, Word)> = BTreeMap::new();
    for g in x.vertices() {
        for (j, root) in roots.iter().enumerate() {
            let l = root.len();
            for i in 0..l {
                let id = translate_at(g, j, root, i);
                if lines.contains_key(&id) {
                    continue;
                }
                let mut fwd = g.clone();
                let mut k = i + 1;
                while x.contains(&fwd) {
                    fwd = step(&fwd, root.letters()[k % l]);
                    k += 1;
                }
                let mut back = g.clone();
                let mut k = i + l * (x.vertices().len() + 1);
                while x.contains(&back) {
                    back = step(&back, -root.letters()[k % l]);
                    k -= 1;
                }
                lines.insert(id, (back, fwd));
            }
        }
    }
    let pos = |w: &Word| frontier.iter().position(|f| f == w).expect("lines leave through the frontier");
    let edges = lines
        .into_iter()
        .map(|(translate, (a, b))| GeneralizedEdge { ends: (pos(&a), pos(&b)), root: translate.root, translate })
        .collect();
    Ok(GeneralizedWhiteheadGraph { frontier, edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitehead::{build_whitehead_graph, normalize_multiword, Multiword};

    fn basis(n: usize) -> Basis {
        Basis::new(n).unwrap()
    }

    fn nmw(words: &[&str], n: usize) -> NormalizedMultiword {
        normalize_multiword(&Multiword::parse(words, basis(n)).unwrap()).unwrap()
    }

    fn subtree(words: &[&str], n: usize) -> Subtree {
        Subtree::new(basis(n), words.iter().map(|s| Word::parse(s, basis(n)).unwrap()).collect()).unwrap()
    }

    #[test]
    fn identity_subtree_is_classical() {
        for (words, n) in [(vec!["abAB"], 2), (vec!["ab", "aab"], 2), (vec!["abc", "cAb"], 3)] {
            let m = nmw(&words, n);
            let gen = generalized_whitehead_graph(&m, &subtree(&[""], n)).unwrap();
            let mut a: Vec<_> = gen
                .edges
                .iter()
                .map(|e| (gen.frontier[e.ends.0].letters()[0], gen.frontier[e.ends.1].letters()[0]))
                .collect();
            let mut b: Vec<_> = build_whitehead_graph(&m).edges().iter().map(|e| e.ends).collect();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn axis_of_a_over_an_edge() {
        let m = nmw(&["a"], 2);
        let x = subtree(&["", "a"], 2);
        let g = generalized_whitehead_graph(&m, &x).unwrap();
        assert_eq!(g.edges.len(), 1);
        let e = &g.edges[0];
        assert_eq!(g.frontier[e.ends.0].to_string(), "A");
        assert_eq!(g.frontier[e.ends.1].to_string(), "aa");
        assert_eq!(g, axis_walk_oracle(&m, &x).unwrap());
    }

    #[test]
    fn splice_matches_oracle_small() {
        for words in [vec!["abAB"], vec!["ab"], vec!["aab", "bbA"]] {
            let m = nmw(&words, 2);
            for sub in [vec![""], vec!["", "a"], vec!["", "a", "ab", "B"]] {
                let x = subtree(&sub, 2);
                assert_eq!(
                    generalized_whitehead_graph(&m, &x).unwrap().edge_multiset(),
                    axis_walk_oracle(&m, &x).unwrap().edge_multiset()
                );
            }
        }
    }

    #[test]
    fn frontier_accounting() {
        let x = subtree(&["", "a", "ab", "B"], 2);
        let expected: usize = x.vertices().iter().map(|g| 4 - x.internal_degree(g)).sum();
        assert_eq!(x.frontier().len(), expected);
    }

    #[test]
    fn rejects_bad_subtrees() {
        let b = basis(2);
        let w = |s: &str| Word::parse(s, b).unwrap();
        assert!(Subtree::new(b, vec![w(""), w("ab")]).is_err());
        assert!(Subtree::new(b, vec![w("a")]).is_err());
    }

    #[test]
    fn hull_of_points() {
        let b = basis(2);
        let w = |s: &str| Word::parse(s, b).unwrap();
        let h = Subtree::hull(b, &[w("ab"), w("aB")]).unwrap();
        assert_eq!(h.vertices().len(), 3);
        assert_eq!(Subtree::ball(b, 2).vertices().len(), 1 + 4 + 12);
    }

    #[test]
    fn coset_rep_is_minimal() {
        let b = basis(2);
        let w = |s: &str| Word::parse(s, b).unwrap();
        assert_eq!(canonical_coset_rep(&w("aaab"), &w("b")).to_string(), "aaa");
        assert_eq!(canonical_coset_rep(&w("bab"), &w("ab")).to_string(), "A");
    }
}
