//! Freeness of one-edge splittings of free groups over infinite cyclic
//! edge groups, with checkable evidence either way.

use serde::{Deserialize, Serialize};

use crate::bassserre::{detour_certificate, verify_certificate, DetourCertificate, SplittingSpec};
use crate::error::{Error, Result};
use crate::whitehead::{
    level_set, minimize_multiword, replay_moves, Multiword, NormalizedMultiword, WhiteheadMove,
    DEFAULT_LEVEL_SET_BUDGET,
};
use crate::words::{
    conjugator_between, cyclic_compare, cyclic_normal_form, root_decomposition, root_word, CyclicRelation, CyclicWord,
    Letter, Word,
};

/// Schema tag carried by every JSON document the crate emits.
pub const SCHEMA: &str = "csl/1";

pub const DEFAULT_RADII: [u32; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessSide {
    A,
    B,
    #[serde(rename = "w1")]
    W1,
    #[serde(rename = "w2")]
    W2,
}

/// Whitehead moves carrying the side's edge word to a single generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeWitness {
    pub side: WitnessSide,
    pub moves: Vec<WhiteheadMove>,
    /// The generator the edge word becomes, up to conjugation.
    pub generator: Letter,
    /// For HNN extensions, conjugators `a_i` with `moved w_i = a_i v_i a_i^-1`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub conjugators: Vec<String>,
    #[serde(rename = "collapsedRank")]
    pub collapsed_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NotFreeEvidence {
    Detour {
        certificates: Vec<DetourCertificate>,
    },
    /// `conjugator * w1^e * conjugator^-1 = w2^f` for `exponents = [e, f]`.
    BaumslagSolitar {
        conjugator: String,
        exponents: [i64; 2],
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(rename = "minimalLengths")]
    pub minimal_lengths: Vec<usize>,
    #[serde(rename = "levelSetSize")]
    pub level_set_size: Option<usize>,
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Verdict {
    Free { witness: FreeWitness, diagnostics: Diagnostics },
    NotFree { certificate: NotFreeEvidence, diagnostics: Diagnostics },
}

impl Verdict {
    pub fn is_free(&self) -> bool {
        matches!(self, Verdict::Free { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("verdicts serialize");
        v.as_object_mut().expect("verdicts are objects").insert("schema".into(), SCHEMA.into());
        v
    }
}

#[derive(Debug, Clone)]
pub struct DecideOptions {
    /// Radii for detour certificates; empty skips them.
    pub radii: Vec<u32>,
    pub level_set_budget: usize,
}

impl Default for DecideOptions {
    fn default() -> Self {
        DecideOptions { radii: DEFAULT_RADII.to_vec(), level_set_budget: DEFAULT_LEVEL_SET_BUDGET }
    }
}

/// A side's edge word is carried to a single generator by minimization.
fn primitive_moves(w: &Word) -> Result<Option<(Vec<WhiteheadMove>, Letter)>> {
    let (min, moves) = minimize_multiword(&Multiword::new(w.basis(), vec![w.clone()])?)?;
    let m = min.members()[0];
    let root = &min.roots()[m.root];
    if root.len() == 1 && m.exponent.abs() == 1 {
        Ok(Some((moves, root.letters()[0] * m.exponent.signum() as Letter)))
    } else {
        Ok(None)
    }
}

fn minimal_length(w: &Word) -> Result<usize> {
    let (min, _) = minimize_multiword(&Multiword::new(w.basis(), vec![w.clone()])?)?;
    let m = min.members()[0];
    Ok(min.roots()[m.root].len() * m.exponent.unsigned_abs() as usize)
}

/// Moves carrying a primitive word to a single generator, or `None` when
/// the word is not primitive.
pub fn primitive_witness(w: &Word) -> Result<Option<(Vec<WhiteheadMove>, Letter)>> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    primitive_moves(w)
}

/// True iff the word is primitive: part of some free basis.
pub fn primitive(w: &Word) -> Result<bool> {
    if w.is_empty() {
        return Err(Error::EmptyWord);
    }
    Ok(primitive_moves(w)?.is_some())
}

fn amalgam_witness(spec: &SplittingSpec) -> Result<(Option<FreeWitness>, Diagnostics)> {
    let SplittingSpec::Amalgam { w_a, w_b, rank_a, rank_b } = spec else {
        return Err(Error::ShapeMismatch("expected an amalgam".into()));
    };
    if w_a.is_empty() || w_b.is_empty() {
        return Err(Error::EmptyWord);
    }
    let ea = root_decomposition(&CyclicWord::from_word(w_a)?)?.exponent;
    let eb = root_decomposition(&CyclicWord::from_word(w_b)?)?.exponent;
    if ea > 1 && eb > 1 {
        return Ok((None, Diagnostics::default()));
    }
    let diagnostics =
        Diagnostics { minimal_lengths: vec![minimal_length(w_a)?, minimal_length(w_b)?], ..Default::default() };
    for (side, w) in [(WitnessSide::A, w_a), (WitnessSide::B, w_b)] {
        if let Some((moves, generator)) = primitive_moves(w)? {
            let witness =
                FreeWitness { side, moves, generator, conjugators: vec![], collapsed_rank: rank_a + rank_b - 1 };
            return Ok((Some(witness), diagnostics));
        }
    }
    Ok((None, diagnostics))
}

/// Checks the isolated-generator condition for member `i` of a position.
fn hnn_condition(pos: &NormalizedMultiword, i: usize) -> Option<Letter> {
    let (mi, mj) = (pos.members()[i], pos.members()[1 - i]);
    let root = &pos.roots()[mi.root];
    if mi.exponent.abs() != 1 || root.len() != 1 || mi.root == mj.root {
        return None;
    }
    let x = root.letters()[0];
    let other = &pos.roots()[mj.root];
    (!other.uses_generator(x.abs())).then_some(x * mi.exponent.signum() as Letter)
}

/// The Baumslag-Solitar relation between edge words with related roots.
pub fn baumslag_solitar_relation(w1: &Word, w2: &Word) -> Result<Option<(Word, [i64; 2])>> {
    let (c1, c2) = (CyclicWord::from_word(w1)?, CyclicWord::from_word(w2)?);
    if cyclic_compare(&c1, &c2)? == CyclicRelation::Distinct {
        return Ok(None);
    }
    let (n1, n2) = (cyclic_normal_form(w1)?, cyclic_normal_form(w2)?);
    let (r1, e1) = root_word(&n1.core);
    let (r2, e2) = root_word(&n2.core);
    let (x, sigma) = match conjugator_between(&r1, &r2) {
        Some(x) => (x, 1),
        None => (conjugator_between(&r1, &r2.inverse()).ok_or(Error::CommensurableRoots)?, -1),
    };
    let a = n2.conjugator.mul(&x).mul(&n1.conjugator.inverse());
    Ok(Some((a, [e2 as i64, sigma * e1 as i64])))
}

fn hnn_witness(spec: &SplittingSpec, budget: usize) -> Result<(Option<FreeWitness>, Diagnostics)> {
    let SplittingSpec::Hnn { w1, w2, rank_a } = spec else {
        return Err(Error::ShapeMismatch("expected an HNN extension".into()));
    };
    if w1.is_empty() || w2.is_empty() {
        return Err(Error::EmptyWord);
    }
    let mw = Multiword::new(w1.basis(), vec![w1.clone(), w2.clone()])?;
    let (min, moves) = minimize_multiword(&mw)?;
    let levels = level_set(&min, budget)?;
    let mut diagnostics = Diagnostics {
        minimal_lengths: vec![min.total_length()],
        level_set_size: Some(levels.positions.len()),
        capped: levels.capped,
    };
    for level in &levels.positions {
        for (i, side) in [(0, WitnessSide::W1), (1, WitnessSide::W2)] {
            if let Some(generator) = hnn_condition(&level.position, i) {
                let mut all = moves.clone();
                all.extend(level.path.iter().cloned());
                let moved = replay_moves(&all, &mw)?;
                let conjugators = moved
                    .members()
                    .iter()
                    .map(|w| cyclic_normal_form(w).map(|n| n.conjugator.to_string()))
                    .collect::<Result<_>>()?;
                let witness = FreeWitness { side, moves: all, generator, conjugators, collapsed_rank: *rank_a };
                return Ok((Some(witness), diagnostics));
            }
        }
    }
    if levels.capped {
        diagnostics.capped = true;
        return Err(Error::BudgetExceeded(format!("minimal level set exceeds {budget} positions")));
    }
    Ok((None, diagnostics))
}

/// Whether the splitting is free, without building certificates.
pub fn splitting_is_free(spec: &SplittingSpec) -> Result<bool> {
    match spec {
        SplittingSpec::Amalgam { .. } => Ok(amalgam_witness(spec)?.0.is_some()),
        SplittingSpec::Hnn { w1, w2, .. } => {
            if baumslag_solitar_relation(w1, w2)?.is_some() {
                return Ok(false);
            }
            Ok(hnn_witness(spec, DEFAULT_LEVEL_SET_BUDGET)?.0.is_some())
        }
    }
}

fn certificates(spec: &SplittingSpec, radii: &[u32]) -> Result<Vec<DetourCertificate>> {
    radii.iter().map(|&r| detour_certificate(spec, r)).collect()
}

pub fn decide_amalgam(spec: &SplittingSpec) -> Result<Verdict> {
    decide_amalgam_with(spec, &DecideOptions::default())
}

pub fn decide_amalgam_with(spec: &SplittingSpec, opts: &DecideOptions) -> Result<Verdict> {
    match amalgam_witness(spec)? {
        (Some(witness), diagnostics) => Ok(Verdict::Free { witness, diagnostics }),
        (None, diagnostics) => Ok(Verdict::NotFree {
            certificate: NotFreeEvidence::Detour { certificates: certificates(spec, &opts.radii)? },
            diagnostics,
        }),
    }
}

pub fn decide_hnn(spec: &SplittingSpec) -> Result<Verdict> {
    decide_hnn_with(spec, &DecideOptions::default())
}

pub fn decide_hnn_with(spec: &SplittingSpec, opts: &DecideOptions) -> Result<Verdict> {
    let SplittingSpec::Hnn { w1, w2, .. } = spec else {
        return Err(Error::ShapeMismatch("expected an HNN extension".into()));
    };
    if w1.is_empty() || w2.is_empty() {
        return Err(Error::EmptyWord);
    }
    if let Some((a, exponents)) = baumslag_solitar_relation(w1, w2)? {
        return Ok(Verdict::NotFree {
            certificate: NotFreeEvidence::BaumslagSolitar { conjugator: a.to_string(), exponents },
            diagnostics: Diagnostics::default(),
        });
    }
    match hnn_witness(spec, opts.level_set_budget)? {
        (Some(witness), diagnostics) => Ok(Verdict::Free { witness, diagnostics }),
        (None, diagnostics) => Ok(Verdict::NotFree {
            certificate: NotFreeEvidence::Detour { certificates: certificates(spec, &opts.radii)? },
            diagnostics,
        }),
    }
}

pub fn decide(spec: &SplittingSpec) -> Result<Verdict> {
    decide_with(spec, &DecideOptions::default())
}

pub fn decide_with(spec: &SplittingSpec, opts: &DecideOptions) -> Result<Verdict> {
    match spec {
        SplittingSpec::Amalgam { .. } => decide_amalgam_with(spec, opts),
        SplittingSpec::Hnn { .. } => decide_hnn_with(spec, opts),
    }
}

fn replayed_cores(moves: &[WhiteheadMove], words: &[Word]) -> Option<Vec<(Word, Word)>> {
    let basis = words[0].basis();
    for mv in moves {
        mv.validate(basis).ok()?;
    }
    let moved = replay_moves(moves, &Multiword::new(basis, words.to_vec()).ok()?).ok()?;
    moved.members().iter().map(|w| cyclic_normal_form(w).ok().map(|n| (n.core, n.conjugator))).collect()
}

/// Rechecks a witness from scratch against the splitting.
pub fn verify_witness(spec: &SplittingSpec, witness: &FreeWitness) -> bool {
    match (spec, witness.side) {
        (SplittingSpec::Amalgam { w_a, w_b, rank_a, rank_b }, side @ (WitnessSide::A | WitnessSide::B)) => {
            let w = if side == WitnessSide::A { w_a } else { w_b };
            let Some(cores) = replayed_cores(&witness.moves, std::slice::from_ref(w)) else {
                return false;
            };
            cores[0].0.letters() == [witness.generator] && witness.collapsed_rank == rank_a + rank_b - 1
        }
        (SplittingSpec::Hnn { w1, w2, rank_a }, side @ (WitnessSide::W1 | WitnessSide::W2)) => {
            let i = usize::from(side == WitnessSide::W2);
            let Some(cores) = replayed_cores(&witness.moves, &[w1.clone(), w2.clone()]) else {
                return false;
            };
            let x = witness.generator;
            let conjugators_ok = witness.conjugators.is_empty()
                || (witness.conjugators.len() == 2
                    && cores.iter().zip(&witness.conjugators).all(|((_, c), s)| c.to_string() == *s));
            cores[i].0.letters() == [x]
                && !cores[1 - i].0.letters().iter().any(|&y| y.abs() == x.abs())
                && witness.collapsed_rank == *rank_a
                && conjugators_ok
        }
        _ => false,
    }
}

/// Verifies every piece of evidence a verdict carries.
pub fn verify_verdict(spec: &SplittingSpec, verdict: &Verdict) -> bool {
    match verdict {
        Verdict::Free { witness, .. } => verify_witness(spec, witness),
        Verdict::NotFree { certificate: NotFreeEvidence::Detour { certificates }, .. } => {
            certificates.iter().all(|c| verify_certificate(spec, c))
        }
        Verdict::NotFree { certificate: NotFreeEvidence::BaumslagSolitar { conjugator, exponents }, .. } => {
            let SplittingSpec::Hnn { w1, w2, .. } = spec else {
                return false;
            };
            let Ok(a) = Word::parse(conjugator, w1.basis()) else {
                return false;
            };
            exponents[0] != 0 && a.conjugate(&w1.pow(exponents[0])) == w2.pow(exponents[1])
        }
    }
}
