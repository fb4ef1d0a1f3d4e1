//! Free group word algebra over a ranked basis.
//!
//! A letter is a nonzero signed generator index: `k` is generator `k`,
//! `-k` its inverse. The compact string form maps generators 1..=26 to
//! `a`..`z` and their inverses to `A`..`Z`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Letter = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Basis {
    rank: usize,
}

impl Basis {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        Ok(Basis { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    /// Number of directions (generators and inverses).
    pub fn degree(self) -> usize {
        2 * self.rank
    }

    /// Directions in the fixed order `1, -1, 2, -2, ...`.
    pub fn directions(self) -> impl Iterator<Item = Letter> {
        (1..=self.rank as Letter).flat_map(|g| [g, -g])
    }

    pub fn direction_index(self, x: Letter) -> usize {
        let g = x.unsigned_abs() as usize - 1;
        2 * g + usize::from(x < 0)
    }

    pub fn direction_at(self, idx: usize) -> Letter {
        let g = (idx / 2 + 1) as Letter;
        if idx.is_multiple_of(2) {
            g
        } else {
            -g
        }
    }

    pub fn contains(self, x: Letter) -> bool {
        x != 0 && x.unsigned_abs() as usize <= self.rank
    }

    fn check(self, x: Letter) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: x, rank: self.rank })
        }
    }
}

/// Letter naming for the compact string form. Generator `i` is written as
/// the letter `offset + i - 1` (mod 26) of the Latin alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    offset: u8,
}

impl Alphabet {
    pub const STANDARD: Alphabet = Alphabet { offset: 0 };
    /// `x, y, z, a, b, ...`, used for the second vertex group of an amalgam.
    pub const SHIFTED: Alphabet = Alphabet { offset: 23 };

    pub fn letter(self, x: Letter) -> Option<char> {
        let g = x.unsigned_abs();
        if g == 0 || g > 26 {
            return None;
        }
        let c = b'a' + ((u32::from(self.offset) + g - 1) % 26) as u8;
        Some(if x > 0 { c as char } else { c.to_ascii_uppercase() as char })
    }

    pub fn parse_letter(self, c: char) -> Result<Letter> {
        if !c.is_ascii_alphabetic() {
            return Err(Error::InvalidLetter(c));
        }
        let lower = c.to_ascii_lowercase() as u8 - b'a';
        let g = (u32::from(lower) + 26 - u32::from(self.offset)) % 26 + 1;
        let g = g as Letter;
        Ok(if c.is_ascii_uppercase() { -g } else { g })
    }
}

pub(crate) fn free_reduce(letters: &mut Vec<Letter>) {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for &x in letters.iter() {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    *letters = out;
}

pub(crate) fn invert_letters(letters: &[Letter]) -> Vec<Letter> {
    letters.iter().rev().map(|x| -x).collect()
}

/// Shortlex order: shorter first, then lexicographic on signed indices.
pub fn shortlex(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// A freely reduced word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    basis: Basis,
    letters: Vec<Letter>,
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce_word(raw: &[Letter], basis: Basis) -> Result<Word> {
    for &x in raw {
        basis.check(x)?;
    }
    let mut letters = raw.to_vec();
    free_reduce(&mut letters);
    Ok(Word { basis, letters })
}

impl Word {
    pub fn identity(basis: Basis) -> Self {
        Word { basis, letters: Vec::new() }
    }

    pub fn generator(basis: Basis, x: Letter) -> Result<Self> {
        reduce_word(&[x], basis)
    }

    /// Caller guarantees the letters are in range and reduced.
    pub(crate) fn from_reduced(basis: Basis, letters: Vec<Letter>) -> Self {
        debug_assert!(letters.windows(2).all(|p| p[0] != -p[1]));
        Word { basis, letters }
    }

    pub fn parse(s: &str, basis: Basis) -> Result<Self> {
        Self::parse_with(s, basis, Alphabet::STANDARD)
    }

    pub fn parse_with(s: &str, basis: Basis, alphabet: Alphabet) -> Result<Self> {
        let raw =
            s.chars().filter(|c| !c.is_whitespace()).map(|c| alphabet.parse_letter(c)).collect::<Result<Vec<_>>>()?;
        reduce_word(&raw, basis)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { basis: self.basis, letters: invert_letters(&self.letters) }
    }

    pub fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.basis, other.basis, "multiplying words over different bases");
        let mut letters = self.letters.clone();
        for &x in &other.letters {
            if letters.last() == Some(&-x) {
                letters.pop();
            } else {
                letters.push(x);
            }
        }
        Word { basis: self.basis, letters }
    }

    pub fn try_mul(&self, other: &Word) -> Result<Word> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch { left: self.basis.rank(), right: other.basis.rank() });
        }
        Ok(self.mul(other))
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = Word::identity(self.basis);
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// `self * other * self^-1`
    pub fn conjugate(&self, other: &Word) -> Word {
        self.mul(other).mul(&self.inverse())
    }

    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        shortlex(&self.letters, &other.letters)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != -l,
            _ => true,
        }
    }

    pub fn to_string_with(&self, alphabet: Alphabet) -> String {
        format_letters(&self.letters, alphabet)
    }
}

pub(crate) fn format_letters(letters: &[Letter], alphabet: Alphabet) -> String {
    if letters.iter().all(|&x| x.unsigned_abs() <= 26) {
        letters.iter().filter_map(|&x| alphabet.letter(x)).collect()
    } else {
        let parts: Vec<String> = letters.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(","))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_with(Alphabet::STANDARD))
    }
}

fn least_rotation(letters: &[Letter]) -> Vec<Letter> {
    let n = letters.len();
    let mut best: Option<Vec<Letter>> = None;
    for k in 0..n {
        let rot: Vec<Letter> = letters[k..].iter().chain(&letters[..k]).copied().collect();
        if best.as_ref().is_none_or(|b| rot < *b) {
            best = Some(rot);
        }
    }
    best.unwrap_or_default()
}

/// A nonempty cyclically reduced word up to rotation. The stored rotation
/// is the lexicographically least one, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    basis: Basis,
    letters: Vec<Letter>,
}

impl CyclicWord {
    /// The conjugacy class of a nontrivial word.
    pub fn from_word(w: &Word) -> Result<Self> {
        Ok(cyclic_normal_form(w)?.cyclic)
    }

    pub fn parse(s: &str, basis: Basis) -> Result<Self> {
        Self::from_word(&Word::parse(s, basis)?)
    }

    /// Caller guarantees `letters` is nonempty and cyclically reduced.
    pub(crate) fn from_cyclic_letters(basis: Basis, letters: &[Letter]) -> Self {
        CyclicWord { basis, letters: least_rotation(letters) }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The canonical rotation as a (cyclically reduced) word.
    pub fn to_word(&self) -> Word {
        Word { basis: self.basis, letters: self.letters.clone() }
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::from_cyclic_letters(self.basis, &invert_letters(&self.letters))
    }

    /// Letter at cyclic position `i`.
    pub fn at(&self, i: usize) -> Letter {
        self.letters[i % self.letters.len()]
    }

    pub fn uses_generator(&self, g: Letter) -> bool {
        self.letters.iter().any(|x| x.abs() == g.abs())
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_letters(&self.letters, Alphabet::STANDARD))
    }
}

/// `w = conjugator * core * conjugator^-1`, with `core` cyclically reduced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicNormalForm {
    pub cyclic: CyclicWord,
    pub core: Word,
    pub conjugator: Word,
}

pub fn cyclic_normal_form(w: &Word) -> Result<CyclicNormalForm> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    let l = &w.letters;
    let mut k = 0;
    while 2 * k + 2 <= l.len() && l[k] == -l[l.len() - 1 - k] {
        k += 1;
    }
    let core = Word { basis: w.basis, letters: l[k..l.len() - k].to_vec() };
    let conjugator = Word { basis: w.basis, letters: l[..k].to_vec() };
    Ok(CyclicNormalForm { cyclic: CyclicWord::from_cyclic_letters(w.basis, &core.letters), core, conjugator })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootDecomposition {
    pub root: CyclicWord,
    pub exponent: usize,
}

fn smallest_period(letters: &[Letter]) -> usize {
    let n = letters.len();
    (1..=n).find(|&p| n.is_multiple_of(p) && (p..n).all(|i| letters[i] == letters[i - p])).unwrap_or(n)
}

pub fn root_decomposition(v: &CyclicWord) -> Result<RootDecomposition> {
    if v.is_empty() {
        return Err(Error::EmptyWord);
    }
    let p = smallest_period(&v.letters);
    Ok(RootDecomposition {
        root: CyclicWord::from_cyclic_letters(v.basis, &v.letters[..p]),
        exponent: v.letters.len() / p,
    })
}

/// Root of a cyclically reduced word as a word: the first period of it.
/// `core = root_word(core)^exponent` holds letterwise.
pub(crate) fn root_word(core: &Word) -> (Word, usize) {
    let p = smallest_period(&core.letters);
    (Word { basis: core.basis, letters: core.letters[..p].to_vec() }, core.letters.len() / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CyclicRelation {
    EqualClass,
    InverseClass,
    Commensurable,
    Distinct,
}

pub fn cyclic_compare(u: &CyclicWord, v: &CyclicWord) -> Result<CyclicRelation> {
    if u.basis != v.basis {
        return Err(Error::BasisMismatch { left: u.basis.rank(), right: v.basis.rank() });
    }
    if u.is_empty() || v.is_empty() {
        return Err(Error::EmptyWord);
    }
    if u == v {
        return Ok(CyclicRelation::EqualClass);
    }
    if *u == v.inverse() {
        return Ok(CyclicRelation::InverseClass);
    }
    let ru = root_decomposition(u)?.root;
    let rv = root_decomposition(v)?.root;
    if ru == rv || ru == rv.inverse() {
        Ok(CyclicRelation::Commensurable)
    } else {
        Ok(CyclicRelation::Distinct)
    }
}

/// Whether the two classes share a maximal cyclic subgroup up to inversion.
pub fn same_maximal_cyclic(u: &CyclicWord, v: &CyclicWord) -> bool {
    !matches!(cyclic_compare(u, v), Ok(CyclicRelation::Distinct) | Err(_))
}

/// Some `x` with `x * u * x^-1 = v`, if `u` and `v` are conjugate.
pub fn conjugator_between(u: &Word, v: &Word) -> Option<Word> {
    let nu = cyclic_normal_form(u).ok()?;
    let nv = cyclic_normal_form(v).ok()?;
    let (cu, cv) = (&nu.core.letters, &nv.core.letters);
    if cu.len() != cv.len() {
        return None;
    }
    let n = cu.len();
    // core_v = rot_k(core_u) = p^-1 core_u p with p = core_u[..k]
    let k = (0..n).find(|&k| (0..n).all(|i| cv[i] == cu[(i + k) % n]))?;
    let p = Word { basis: u.basis, letters: cu[..k].to_vec() };
    Some(nv.conjugator.mul(&p.inverse()).mul(&nu.conjugator.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: usize) -> Basis {
        Basis::new(n).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, b(2)).unwrap()
    }

    fn cw(s: &str) -> CyclicWord {
        CyclicWord::parse(s, b(2)).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("aA").to_string(), "");
        assert_eq!(w("abBA").to_string(), "");
        assert_eq!(w("abA").to_string(), "abA");
        assert!(matches!(reduce_word(&[3], b(2)), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(reduce_word(&[0], b(2)), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn cyclic_normal_form_examples() {
        let n = cyclic_normal_form(&w("abA")).unwrap();
        assert_eq!((n.core.to_string(), n.conjugator.to_string()), ("b".into(), "a".into()));
        let n = cyclic_normal_form(&w("ab")).unwrap();
        assert_eq!((n.core.to_string(), n.conjugator.to_string()), ("ab".into(), "".into()));
        let n = cyclic_normal_form(&w("Babab")).unwrap();
        assert_eq!((n.core.to_string(), n.conjugator.to_string()), ("aba".into(), "B".into()));
        assert_eq!(n.cyclic, cw("aba"));
        assert_eq!(cyclic_normal_form(&w("")), Err(Error::EmptyWord));
    }

    #[test]
    fn root_examples() {
        let r = root_decomposition(&cw("abab")).unwrap();
        assert_eq!((r.root, r.exponent), (cw("ab"), 2));
        let r = root_decomposition(&cw("ab")).unwrap();
        assert_eq!((r.root, r.exponent), (cw("ab"), 1));
        let r = root_decomposition(&cw("abaab")).unwrap();
        assert_eq!((r.root, r.exponent), (cw("abaab"), 1));
    }

    #[test]
    fn compare_examples() {
        use CyclicRelation::*;
        assert_eq!(cyclic_compare(&cw("ab"), &cw("ba")).unwrap(), EqualClass);
        assert_eq!(cyclic_compare(&cw("a"), &cw("A")).unwrap(), InverseClass);
        assert_eq!(cyclic_compare(&cw("aa"), &cw("aaa")).unwrap(), Commensurable);
        assert_eq!(cyclic_compare(&cw("ab"), &cw("aB")).unwrap(), Distinct);
        let other = CyclicWord::parse("a", b(3)).unwrap();
        assert!(matches!(cyclic_compare(&cw("a"), &other), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn distinct_by_rotation_enumeration() {
        // every rotation of ab, and of its inverse BA, differs from aB
        let target = w("aB").letters().to_vec();
        for s in ["ab", "BA"] {
            let l = w(s).letters().to_vec();
            for k in 0..l.len() {
                let rot: Vec<_> = l[k..].iter().chain(&l[..k]).copied().collect();
                assert_ne!(rot, target);
            }
        }
    }

    #[test]
    fn alphabets() {
        let x = Word::parse_with("xyXY", b(2), Alphabet::SHIFTED).unwrap();
        assert_eq!(x.letters(), &[1, 2, -1, -2]);
        assert_eq!(x.to_string_with(Alphabet::SHIFTED), "xyXY");
        assert_eq!(x.to_string(), "abAB");
    }

    #[test]
    fn conjugator_search() {
        let u = w("abA");
        let v = w("Bbb");
        let x = conjugator_between(&u, &v).unwrap();
        assert_eq!(x.conjugate(&u), v);
        assert!(conjugator_between(&w("ab"), &w("aB")).is_none());
    }
}
