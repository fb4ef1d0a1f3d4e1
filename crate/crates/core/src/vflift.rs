//! Virtually free groups given as free products of finite cyclic groups and
//! free generators, together with a finite quotient whose kernel is free.
//!
//! Group elements are words over the generator names; an uppercase name is
//! the inverse. The quotient acts on `0..q_size` on the right, and the
//! action must be regular.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::words::{reduce_word, Basis, Letter, Word};

mod decide;
mod lift;

pub use decide::{
    coarse_model, decide_vf, decide_vf_with, verify_vf_verdict, VfEvidence, VfOptions, VfSplittingSpec, VfVerdict,
};
pub use lift::{Commensurator, FactorReport, LiftedMultiword};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub name: String,
    pub image: Vec<usize>,
}

/// The JSON form of a presentation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresentationSpec {
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub relators: Vec<String>,
    pub q_size: usize,
}

/// An element of `G` in free product normal form: syllables of distinct
/// adjacent generators, torsion exponents in `1..m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    letters: Vec<Letter>,
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { letters: vec![] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Symbol {
    Trivial,
    Basis(Letter),
    Eliminated(Vec<Letter>),
}

/// A completed presentation: coset representatives, Schreier generators
/// and rewriting tables for the kernel of `G -> Q`.
#[derive(Debug, Clone)]
pub struct VfPresentation {
    spec: PresentationSpec,
    names: Vec<char>,
    orders: Vec<Option<u32>>,
    images: Vec<Vec<usize>>,
    inverse_images: Vec<Vec<usize>>,
    reps: Vec<GroupElement>,
    tree_depth: usize,
    symbols: Vec<Vec<Symbol>>,
    kernel_basis: Basis,
    kernel_generators: Vec<GroupElement>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidPresentation(msg.into())
}

fn perm_order(p: &[usize]) -> u32 {
    let mut seen = vec![false; p.len()];
    let mut order: u64 = 1;
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0u64;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i];
            len += 1;
        }
        order = num_lcm(order, len);
    }
    order as u32
}

fn num_gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn num_lcm(a: u64, b: u64) -> u64 {
    a / num_gcd(a, b) * b
}

/// Parses a relator of the form `x^m` written as `m` copies of one name.
fn relator_power(rel: &str, names: &[char]) -> Result<(usize, u32)> {
    let chars: Vec<char> = rel.chars().collect();
    let first = *chars.first().ok_or_else(|| invalid("empty relator"))?;
    if chars.iter().any(|&c| c != first) || chars.len() < 2 {
        return Err(invalid(format!("relator {rel:?} is not a proper power of a generator")));
    }
    let lower = first.to_ascii_lowercase();
    let g = names.iter().position(|&n| n == lower).ok_or_else(|| invalid(format!("unknown generator in {rel:?}")))?;
    Ok((g, chars.len() as u32))
}

impl VfPresentation {
    pub fn new(spec: &PresentationSpec) -> Result<Self> {
        Self::with_letter_order(spec, None)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let spec: PresentationSpec = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        Self::new(&spec)
    }

    /// Builds the Schreier data with the spanning tree explored in the given
    /// letter order. The default order is `1, -1, 2, -2, ...`.
    pub fn with_letter_order(spec: &PresentationSpec, order: Option<&[Letter]>) -> Result<Self> {
        let q = spec.q_size;
        if q == 0 {
            return Err(invalid("q_size must be positive"));
        }
        if spec.generators.is_empty() {
            return Err(invalid("no generators"));
        }
        let mut names = vec![];
        for g in &spec.generators {
            let mut cs = g.name.chars();
            let (Some(c), None) = (cs.next(), cs.next()) else {
                return Err(invalid(format!("generator name {:?} must be one letter", g.name)));
            };
            if !c.is_ascii_lowercase() || names.contains(&c) {
                return Err(invalid(format!("generator name {:?} must be a distinct lowercase letter", g.name)));
            }
            names.push(c);
            let mut seen = vec![false; q];
            if g.image.len() != q || g.image.iter().any(|&i| i >= q || std::mem::replace(&mut seen[i], true)) {
                return Err(invalid(format!("image of {c} is not a permutation of 0..{q}")));
            }
        }
        let n = names.len();
        let images: Vec<Vec<usize>> = spec.generators.iter().map(|g| g.image.clone()).collect();
        let inverse_images: Vec<Vec<usize>> = images
            .iter()
            .map(|p| {
                let mut inv = vec![0; q];
                for (i, &j) in p.iter().enumerate() {
                    inv[j] = i;
                }
                inv
            })
            .collect();
        let mut orders = vec![None; n];
        for rel in &spec.relators {
            let (g, m) = relator_power(rel, &names)?;
            if orders[g].is_some() {
                return Err(invalid(format!("second relator for {}", names[g])));
            }
            let k = perm_order(&images[g]);
            if m % k != 0 {
                return Err(invalid(format!("image of {} does not satisfy {rel}", names[g])));
            }
            if k != m {
                return Err(Error::TorsionInKernel(format!("{}^{k} lies in the kernel", names[g])));
            }
            orders[g] = Some(m);
        }

        let letter_order: Vec<Letter> = match order {
            Some(o) => o.to_vec(),
            None => (1..=n as Letter).flat_map(|g| [g, -g]).collect(),
        };
        let mut pres = VfPresentation {
            spec: spec.clone(),
            names,
            orders,
            images,
            inverse_images,
            reps: vec![],
            tree_depth: 0,
            symbols: vec![],
            kernel_basis: Basis::new(1)?,
            kernel_generators: vec![],
        };
        for &x in &letter_order {
            if x == 0 || x.unsigned_abs() as usize > n {
                return Err(invalid(format!("letter {x} out of range")));
            }
        }

        // Breadth-first spanning tree of the Schreier graph.
        let mut reps: Vec<Option<GroupElement>> = vec![None; q];
        let mut depth = vec![0usize; q];
        reps[0] = Some(GroupElement::identity());
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            for &x in &letter_order {
                let next = pres.act_letter(p, x);
                if reps[next].is_none() {
                    let rep = pres.mul(reps[p].as_ref().unwrap(), &pres.letter_element(x));
                    reps[next] = Some(rep);
                    depth[next] = depth[p] + 1;
                    queue.push_back(next);
                }
            }
        }
        if reps.iter().any(Option::is_none) {
            return Err(invalid("images do not act transitively"));
        }
        pres.reps = reps.into_iter().map(Option::unwrap).collect();
        pres.tree_depth = depth.into_iter().max().unwrap_or(0);

        // Schreier generators gamma(p, x) = g_p x g_{px}^-1, which must act
        // trivially when the action is regular.
        let mut raw: Vec<Vec<GroupElement>> = vec![];
        for g in 0..n {
            let x = g as Letter + 1;
            let mut row = vec![];
            for p in 0..q {
                let next = pres.act_letter(p, x);
                let gamma =
                    pres.mul(&pres.mul(&pres.reps[p], &pres.letter_element(x)), &pres.inverse(&pres.reps[next]));
                if pres.act(0, &gamma) != 0 || (0..q).any(|i| pres.act(i, &gamma) != i) {
                    return Err(invalid("the action of the quotient is not regular"));
                }
                row.push(gamma);
            }
            raw.push(row);
        }

        // One relation per cycle of each torsion generator eliminates one
        // Schreier generator.
        let mut eliminated: Vec<Vec<Option<Vec<(usize, bool)>>>> = vec![vec![None; q]; n];
        for g in 0..n {
            if pres.orders[g].is_none() {
                continue;
            }
            let mut done = vec![false; q];
            for start in 0..q {
                if done[start] {
                    continue;
                }
                let mut cycle = vec![];
                let mut p = start;
                while !done[p] {
                    done[p] = true;
                    cycle.push(p);
                    p = pres.images[g][p];
                }
                // a cycle closed up by the tree carries no generator
                let Some(j) = cycle.iter().position(|&p| !raw[g][p].is_identity()) else {
                    continue;
                };
                // gamma_j = (gamma_{j+1} ... gamma_{m-1} gamma_0 ... gamma_{j-1})^-1
                let m = cycle.len();
                let rest: Vec<(usize, bool)> = (1..m).map(|d| cycle[(j + d) % m]).rev().map(|p| (p, true)).collect();
                eliminated[g][cycle[j]] = Some(rest);
            }
        }
        let mut index = vec![vec![0 as Letter; q]; n];
        let mut kernel_generators = vec![];
        for g in 0..n {
            for p in 0..q {
                if !raw[g][p].is_identity() && eliminated[g][p].is_none() {
                    kernel_generators.push(raw[g][p].clone());
                    index[g][p] = kernel_generators.len() as Letter;
                }
            }
        }
        if kernel_generators.is_empty() {
            return Err(invalid("the kernel is trivial, so the group is finite"));
        }
        let symbols = (0..n)
            .map(|g| {
                (0..q)
                    .map(|p| {
                        if raw[g][p].is_identity() {
                            Symbol::Trivial
                        } else if let Some(rest) = &eliminated[g][p] {
                            // each entry is inverted; trivial entries vanish
                            Symbol::Eliminated(
                                rest.iter().filter(|(r, _)| index[g][*r] != 0).map(|(r, _)| -index[g][*r]).collect(),
                            )
                        } else {
                            Symbol::Basis(index[g][p])
                        }
                    })
                    .collect()
            })
            .collect();
        pres.symbols = symbols;
        pres.kernel_basis = Basis::new(kernel_generators.len())?;
        pres.kernel_generators = kernel_generators;
        Ok(pres)
    }

    pub fn spec(&self) -> &PresentationSpec {
        &self.spec
    }

    pub fn q_size(&self) -> usize {
        self.spec.q_size
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    /// Order of each generator, `None` for a free generator.
    pub fn orders(&self) -> &[Option<u32>] {
        &self.orders
    }

    pub fn kernel_basis(&self) -> Basis {
        self.kernel_basis
    }

    pub fn kernel_rank(&self) -> usize {
        self.kernel_basis.rank()
    }

    /// The rank forced by `1 - rank = |Q| chi(G)`.
    pub fn euler_rank(&self) -> i64 {
        let q = self.q_size() as i64;
        let n = self.names.len() as i64;
        let torsion: i64 = self.orders.iter().flatten().map(|&m| q / i64::from(m)).sum();
        1 + q * (n - 1) - torsion
    }

    pub fn tree_depth(&self) -> usize {
        self.tree_depth
    }

    /// Coset representative of point `p`.
    pub fn coset_rep(&self, p: usize) -> &GroupElement {
        &self.reps[p]
    }

    pub fn coset_reps(&self) -> &[GroupElement] {
        &self.reps
    }

    /// The element of `G` named by kernel basis generator `i` (1-based).
    pub fn kernel_generator(&self, i: usize) -> &GroupElement {
        &self.kernel_generators[i - 1]
    }

    fn letter_element(&self, x: Letter) -> GroupElement {
        self.normalize(&[x])
    }

    fn act_letter(&self, p: usize, x: Letter) -> usize {
        let g = x.unsigned_abs() as usize - 1;
        if x > 0 {
            self.images[g][p]
        } else {
            self.inverse_images[g][p]
        }
    }

    /// Right action of `g` on point `p`.
    pub fn act(&self, p: usize, g: &GroupElement) -> usize {
        g.letters.iter().fold(p, |p, &x| self.act_letter(p, x))
    }

    /// Image of `g` in `Q`, as the point `0 . g`.
    pub fn coset(&self, g: &GroupElement) -> usize {
        self.act(0, g)
    }

    /// Permutation of `g` and its order in `Q`.
    pub fn image_order(&self, g: &GroupElement) -> u32 {
        let perm: Vec<usize> = (0..self.q_size()).map(|p| self.act(p, g)).collect();
        perm_order(&perm)
    }

    pub fn normalize(&self, raw: &[Letter]) -> GroupElement {
        let n = self.names.len();
        let mut stack: Vec<(usize, i64)> = vec![];
        for &x in raw {
            let g = x.unsigned_abs() as usize - 1;
            assert!(g < n, "letter {x} out of range");
            let e = i64::from(x.signum());
            match stack.last_mut() {
                Some((h, exp)) if *h == g => *exp += e,
                _ => stack.push((g, e)),
            }
            let (h, exp) = stack.last_mut().unwrap();
            if let Some(m) = self.orders[*h] {
                *exp = exp.rem_euclid(i64::from(m));
            }
            if *exp == 0 {
                stack.pop();
            }
        }
        let mut letters = vec![];
        for (g, e) in stack {
            let x = (g + 1) as Letter * e.signum() as Letter;
            letters.extend(std::iter::repeat_n(x, e.unsigned_abs() as usize));
        }
        GroupElement { letters }
    }

    pub fn mul(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        let mut raw = a.letters.clone();
        raw.extend_from_slice(&b.letters);
        self.normalize(&raw)
    }

    pub fn inverse(&self, a: &GroupElement) -> GroupElement {
        let raw: Vec<Letter> = a.letters.iter().rev().map(|x| -x).collect();
        self.normalize(&raw)
    }

    pub fn pow(&self, a: &GroupElement, k: i64) -> GroupElement {
        let base = if k < 0 { self.inverse(a) } else { a.clone() };
        let mut raw = vec![];
        for _ in 0..k.unsigned_abs() {
            raw.extend_from_slice(&base.letters);
        }
        self.normalize(&raw)
    }

    pub fn conjugate(&self, by: &GroupElement, a: &GroupElement) -> GroupElement {
        self.mul(&self.mul(by, a), &self.inverse(by))
    }

    pub fn parse(&self, s: &str) -> Result<GroupElement> {
        let mut raw = vec![];
        for c in s.chars() {
            let g = self.names.iter().position(|&n| n == c.to_ascii_lowercase()).ok_or(Error::InvalidLetter(c))?;
            let x = g as Letter + 1;
            raw.push(if c.is_ascii_uppercase() { -x } else { x });
        }
        Ok(self.normalize(&raw))
    }

    pub fn format(&self, g: &GroupElement) -> String {
        g.letters
            .iter()
            .map(|&x| {
                let c = self.names[x.unsigned_abs() as usize - 1];
                if x > 0 {
                    c
                } else {
                    c.to_ascii_uppercase()
                }
            })
            .collect()
    }

    fn push_symbol(&self, out: &mut Vec<Letter>, g: usize, p: usize, inverted: bool) {
        let letters: Vec<Letter> = match &self.symbols[g][p] {
            Symbol::Trivial => return,
            Symbol::Basis(l) => vec![*l],
            Symbol::Eliminated(w) => w.clone(),
        };
        if inverted {
            out.extend(letters.iter().rev().map(|x| -x));
        } else {
            out.extend(letters);
        }
    }

    /// Writes `g = expand(kernel word) * coset_rep(p)` and returns both parts.
    pub fn rewrite(&self, g: &GroupElement) -> (Word, usize) {
        let mut out = vec![];
        let mut p = 0;
        for &x in &g.letters {
            let gi = x.unsigned_abs() as usize - 1;
            if x > 0 {
                self.push_symbol(&mut out, gi, p, false);
                p = self.images[gi][p];
            } else {
                p = self.inverse_images[gi][p];
                self.push_symbol(&mut out, gi, p, true);
            }
        }
        (reduce_word(&out, self.kernel_basis).expect("kernel letters in range"), p)
    }

    /// The kernel word of an element of the kernel.
    pub fn kernel_word(&self, g: &GroupElement) -> Result<Word> {
        let (w, p) = self.rewrite(g);
        if p != 0 {
            return Err(Error::InvalidInput(format!("{} is not in the kernel", self.format(g))));
        }
        Ok(w)
    }

    /// The element of `G` named by a kernel word.
    pub fn expand(&self, w: &Word) -> GroupElement {
        let mut raw = vec![];
        for &x in w.letters() {
            let k = &self.kernel_generators[x.unsigned_abs() as usize - 1];
            if x > 0 {
                raw.extend_from_slice(&k.letters);
            } else {
                raw.extend(k.letters.iter().rev().map(|y| -y));
            }
        }
        self.normalize(&raw)
    }

    /// Exponent-sum matrix of `f -> g f g^-1` on the kernel's
    /// abelianization; column `j` is the image of basis generator `j`.
    pub fn conjugation_matrix(&self, g: &GroupElement) -> Vec<Vec<i64>> {
        let r = self.kernel_rank();
        let mut m = vec![vec![0i64; r]; r];
        for j in 0..r {
            let image = self.conjugate(g, &self.kernel_generators[j]);
            let (w, _) = self.rewrite(&image);
            for &x in w.letters() {
                m[x.unsigned_abs() as usize - 1][j] += i64::from(x.signum());
            }
        }
        m
    }
}

/// Whether the words generate the whole free group, by Stallings folding.
pub fn generates_free_group(words: &[Word], basis: Basis) -> bool {
    let mut parent: Vec<usize> = vec![0];
    let mut edges: Vec<(usize, Letter, usize)> = vec![];
    for w in words {
        let mut at = 0;
        for (i, &x) in w.letters().iter().enumerate() {
            let next = if i + 1 == w.len() {
                0
            } else {
                parent.push(parent.len());
                parent.len() - 1
            };
            if x > 0 {
                edges.push((at, x, next));
            } else {
                edges.push((next, -x, at));
            }
            at = next;
        }
    }
    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    loop {
        let mut out: std::collections::HashMap<(usize, Letter), usize> = std::collections::HashMap::new();
        let mut merged = false;
        for &(u, x, v) in &edges {
            let (u, v) = (find(&mut parent, u), find(&mut parent, v));
            for (key, target) in [((u, x), v), ((v, -x), u)] {
                match out.get(&key) {
                    Some(&t) if find(&mut parent, t) != target => {
                        let t = find(&mut parent, t);
                        parent[t] = target;
                        merged = true;
                    }
                    Some(_) => {}
                    None => {
                        out.insert(key, target);
                    }
                }
            }
            if merged {
                break;
            }
        }
        if !merged {
            break;
        }
    }
    let root = find(&mut parent, 0);
    let all_one = (0..parent.len()).all(|v| find(&mut parent, v) == root);
    let labels: std::collections::HashSet<Letter> = edges.iter().map(|e| e.1).collect();
    all_one && (1..=basis.rank() as Letter).all(|g| labels.contains(&g))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(gens: &[(&str, Vec<usize>)], relators: &[&str], q: usize) -> PresentationSpec {
        PresentationSpec {
            generators: gens.iter().map(|(n, i)| GeneratorSpec { name: n.to_string(), image: i.clone() }).collect(),
            relators: relators.iter().map(|s| s.to_string()).collect(),
            q_size: q,
        }
    }

    #[test]
    fn trivial_quotient_keeps_the_free_group() {
        let p = VfPresentation::new(&spec(&[("a", vec![0]), ("b", vec![0])], &[], 1)).unwrap();
        assert_eq!(p.kernel_rank(), 2);
        let g = p.parse("abA").unwrap();
        assert_eq!(p.kernel_word(&g).unwrap().to_string(), "abA");
    }

    #[test]
    fn index_two_kernel() {
        let p = VfPresentation::new(&spec(&[("a", vec![1, 0]), ("b", vec![0, 1])], &[], 2)).unwrap();
        assert_eq!(p.kernel_rank(), 3);
        let named: Vec<String> = (1..=3).map(|i| p.format(p.kernel_generator(i))).collect();
        let mut sorted = named.clone();
        sorted.sort();
        assert_eq!(sorted, vec!["aa", "abA", "b"]);
    }

    #[test]
    fn normal_form_reduces_torsion() {
        let p = VfPresentation::new(&spec(
            &[("r", vec![2, 3, 4, 5, 0, 1]), ("s", vec![3, 4, 5, 0, 1, 2])],
            &["rrr", "ss"],
            6,
        ))
        .unwrap();
        assert_eq!(p.format(&p.parse("rrrrssr").unwrap()), "rr");
        assert_eq!(p.format(&p.parse("R").unwrap()), "rr");
        assert_eq!(p.kernel_rank(), 2);
        assert_eq!(p.euler_rank(), 2);
    }

    #[test]
    fn bad_presentations_are_refused() {
        let s = spec(&[("r", vec![1, 0])], &["rrr"], 2);
        assert!(matches!(VfPresentation::new(&s), Err(Error::InvalidPresentation(_))));
        let s = spec(&[("r", vec![0, 1]), ("a", vec![1, 0])], &["rr"], 2);
        assert!(matches!(VfPresentation::new(&s), Err(Error::TorsionInKernel(_))));
        let s = spec(&[("a", vec![0, 1, 2, 3]), ("b", vec![1, 0, 2, 3])], &[], 4);
        assert!(VfPresentation::new(&s).is_err());
        let s = spec(&[("r", vec![1, 2, 0])], &["rab"], 3);
        assert!(VfPresentation::new(&s).is_err());
    }

    #[test]
    fn folding_detects_generating_sets() {
        let b = Basis::new(2).unwrap();
        let w = |s: &str| Word::parse(s, b).unwrap();
        assert!(generates_free_group(&[w("a"), w("b")], b));
        assert!(generates_free_group(&[w("ab"), w("b")], b));
        assert!(generates_free_group(&[w("aab"), w("ab")], b));
        assert!(!generates_free_group(&[w("aa"), w("b")], b));
        assert!(!generates_free_group(&[w("abAB")], b));
    }
}
