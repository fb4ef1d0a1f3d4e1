//! Bass-Serre complexes of one-edge splittings of free groups.
//!
//! Vertex spaces are Cayley trees of the vertex groups with every edge
//! subdivided into unit pieces, and edge strips are recorded by their rungs
//! only: unit-length edges joining matching points of the two boundary
//! lines. Balls of the complex are explored lazily.

mod certificate;
mod complex;
mod detour;

pub use certificate::{
    check_certificate, check_certificate_in, verify_certificate, CertificatePoint, CertificatePosition,
    CertificateSegment, DetourCertificate, RoundRecord, StageRecord,
};
pub use complex::{BassSerreBall, Complex, EdgeKind, Point, Position, SpaceId, StripStep};
pub use detour::{detour_certificate, detour_certificate_with, detour_in_model, DetourOptions};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::whitehead::{minimize_multiword, normalize_multiword, replay_moves, Multiword};
use crate::words::{
    cyclic_compare, cyclic_normal_form, reduce_word, Alphabet, Basis, CyclicRelation, CyclicWord, Word,
};

/// Default cap on the number of points a single exploration may visit.
pub const DEFAULT_POINT_BUDGET: usize = 2_000_000;

/// A one-edge splitting `A *_<c> B` or `A *_<c>` of a free group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub enum SplittingSpec {
    /// `F(rank_a) *_{w_a = w_b} F(rank_b)`.
    Amalgam { rank_a: usize, rank_b: usize, w_a: Word, w_b: Word },
    /// `F(rank_a) *_{t w1 t^-1 = w2}`.
    Hnn { rank_a: usize, w1: Word, w2: Word },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RawSpec {
    Amalgam {
        #[serde(rename = "rankA")]
        rank_a: usize,
        #[serde(rename = "rankB")]
        rank_b: usize,
        #[serde(rename = "wA")]
        w_a: String,
        #[serde(rename = "wB")]
        w_b: String,
    },
    Hnn {
        #[serde(rename = "rankA")]
        rank_a: usize,
        w1: String,
        w2: String,
    },
}

/// Words of the second factor are written `x, y, z` when its rank is at
/// most three, and in the standard alphabet otherwise.
pub fn b_side_alphabet(rank: usize) -> Alphabet {
    if rank <= 3 {
        Alphabet::SHIFTED
    } else {
        Alphabet::STANDARD
    }
}

/// Parses a second-factor word, accepting the standard alphabet as well.
pub fn parse_b_side(s: &str, basis: Basis) -> Result<Word> {
    let shifted = b_side_alphabet(basis.rank());
    Word::parse_with(s, basis, shifted).or_else(|_| Word::parse(s, basis))
}

impl TryFrom<RawSpec> for SplittingSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        match raw {
            RawSpec::Amalgam { rank_a, rank_b, w_a, w_b } => {
                let w_a = Word::parse(&w_a, Basis::new(rank_a)?)?;
                let w_b = parse_b_side(&w_b, Basis::new(rank_b)?)?;
                SplittingSpec::amalgam(w_a, w_b)
            }
            RawSpec::Hnn { rank_a, w1, w2 } => {
                let basis = Basis::new(rank_a)?;
                SplittingSpec::hnn(Word::parse(&w1, basis)?, Word::parse(&w2, basis)?)
            }
        }
    }
}

impl From<SplittingSpec> for RawSpec {
    fn from(spec: SplittingSpec) -> Self {
        match spec {
            SplittingSpec::Amalgam { rank_a, rank_b, w_a, w_b } => RawSpec::Amalgam {
                rank_a,
                rank_b,
                w_a: w_a.to_string(),
                w_b: w_b.to_string_with(b_side_alphabet(rank_b)),
            },
            SplittingSpec::Hnn { rank_a, w1, w2 } => RawSpec::Hnn { rank_a, w1: w1.to_string(), w2: w2.to_string() },
        }
    }
}

impl SplittingSpec {
    pub fn amalgam(w_a: Word, w_b: Word) -> Result<Self> {
        if w_a.is_empty() || w_b.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(SplittingSpec::Amalgam { rank_a: w_a.basis().rank(), rank_b: w_b.basis().rank(), w_a, w_b })
    }

    pub fn hnn(w1: Word, w2: Word) -> Result<Self> {
        if w1.basis() != w2.basis() {
            return Err(Error::BasisMismatch { left: w1.basis().rank(), right: w2.basis().rank() });
        }
        if w1.is_empty() || w2.is_empty() {
            return Err(Error::EmptyWord);
        }
        Ok(SplittingSpec::Hnn { rank_a: w1.basis().rank(), w1, w2 })
    }

    /// Parses the JSON form.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// One family of boundary lines in a kind of vertex space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attachment {
    /// Cyclically reduced, indivisible, in its least rotation.
    pub root: Word,
    /// The strip identifies `root^power` with the opposite edge word.
    pub power: u32,
    /// Strips glued along each line of this family.
    pub multiplicity: u32,
    /// When set, strip `r` on a line starts at `rep * root^r`.
    pub shifted_slots: bool,
    /// The (kind, attachment) on the far side of each strip.
    pub target: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceKind {
    pub basis: Basis,
    /// Length of a tree edge, in unit pieces.
    pub edge_length: u32,
    pub attachments: Vec<Attachment>,
}

impl SpaceKind {
    /// Arc length of one strip period along a line of attachment `a`.
    pub fn period(&self, a: usize) -> i64 {
        let at = &self.attachments[a];
        (at.root.len() as i64) * i64::from(at.power) * i64::from(self.edge_length)
    }
}

/// The combinatorial data of a complex: kinds of vertex spaces and how
/// strips glue them. Space kind 0 holds the base point, and attachment 0
/// of kind 0 carries the base line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexModel {
    pub kinds: Vec<SpaceKind>,
    /// The rotation of the base line's root read forward from the base
    /// point; it follows the edge word as given.
    pub base_rotation: Word,
}

/// The first `len` letters of the cyclic core of the member, after the moves.
fn leading_rotation(member: &Word, moves: &[crate::whitehead::WhiteheadMove], len: usize) -> Result<Word> {
    let moved = replay_moves(moves, &Multiword::new(member.basis(), vec![member.clone()])?)?;
    let core = cyclic_normal_form(&moved.members()[0])?.core;
    reduce_word(&core.letters()[..len], core.basis())
}

fn oriented_root(nmw: &crate::whitehead::NormalizedMultiword, member: usize) -> (Word, u32) {
    let m = nmw.members()[member];
    let root: &CyclicWord = &nmw.roots()[m.root];
    let word = if m.exponent > 0 { root.to_word() } else { root.inverse().to_word() };
    (word, m.exponent.unsigned_abs() as u32)
}

impl ComplexModel {
    /// Builds the model after putting each vertex group in a Whitehead-minimal
    /// basis for its edge words.
    pub fn from_spec(spec: &SplittingSpec) -> Result<Self> {
        match spec {
            SplittingSpec::Amalgam { w_a, w_b, .. } => {
                let (na, moves_a) = minimize_multiword(&Multiword::new(w_a.basis(), vec![w_a.clone()])?)?;
                let (nb, _) = minimize_multiword(&Multiword::new(w_b.basis(), vec![w_b.clone()])?)?;
                let (ua, ma) = oriented_root(&na, 0);
                let (ub, mb) = oriented_root(&nb, 0);
                let attach = |root: Word, m: u32, target| Attachment {
                    root,
                    power: m,
                    multiplicity: m,
                    shifted_slots: true,
                    target,
                };
                let base_rotation = leading_rotation(w_a, &moves_a, ua.len())?;
                let len_a = ua.len() as u32 * ma;
                let len_b = ub.len() as u32 * mb;
                Ok(ComplexModel {
                    kinds: vec![
                        SpaceKind { basis: w_a.basis(), edge_length: len_b, attachments: vec![attach(ua, ma, (1, 0))] },
                        SpaceKind { basis: w_b.basis(), edge_length: len_a, attachments: vec![attach(ub, mb, (0, 0))] },
                    ],
                    base_rotation,
                })
            }
            SplittingSpec::Hnn { w1, w2, .. } => {
                let c1 = CyclicWord::from_word(w1)?;
                let c2 = CyclicWord::from_word(w2)?;
                if cyclic_compare(&c1, &c2)? != CyclicRelation::Distinct {
                    return Err(Error::CommensurableRoots);
                }
                let mw = Multiword::new(w1.basis(), vec![w1.clone(), w2.clone()])?;
                let (n, moves) = minimize_multiword(&mw)?;
                let (u1, m1) = oriented_root(&n, 0);
                let (u2, m2) = oriented_root(&n, 1);
                let base_rotation = leading_rotation(w1, &moves, u1.len())?;
                let attach = |root: Word, m: u32, target| Attachment {
                    root,
                    power: m,
                    multiplicity: m,
                    shifted_slots: true,
                    target,
                };
                Ok(ComplexModel {
                    kinds: vec![SpaceKind {
                        basis: w1.basis(),
                        edge_length: 1,
                        attachments: vec![attach(u1, m1, (0, 1)), attach(u2, m2, (0, 0))],
                    }],
                    base_rotation,
                })
            }
        }
    }

    pub fn max_edge_length(&self) -> u32 {
        self.kinds.iter().map(|k| k.edge_length).max().unwrap_or(1)
    }

    /// Root words of a kind's attachments as a normalized multiword.
    pub fn attachment_multiword(&self, kind: usize) -> Result<crate::whitehead::NormalizedMultiword> {
        let k = &self.kinds[kind];
        let words = k.attachments.iter().map(|a| a.root.clone()).collect();
        normalize_multiword(&Multiword::new(k.basis, words)?)
    }
}

/// Ball of the given radius around the base point.
pub fn build_ball(spec: &SplittingSpec, radius: u32) -> Result<BassSerreBall> {
    let mut cx = Complex::new(ComplexModel::from_spec(spec)?);
    cx.ball(&cx.base_point(), radius, DEFAULT_POINT_BUDGET)
}

/// The point at arc position `t` along the base line.
pub fn gamma(spec: &SplittingSpec, t: i64) -> Result<Point> {
    let cx = Complex::new(ComplexModel::from_spec(spec)?);
    Ok(cx.gamma(t))
}

/// Fitted constants with `d(gamma(s), gamma(s + dt)) >= |dt| / lambda - epsilon`
/// over the sampled window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiGeodesicFit {
    pub lambda: f64,
    pub epsilon: f64,
    /// `(dt, distance)` for every start and offset.
    pub samples: Vec<(i64, u32)>,
}

/// Measures the base line from each start over offsets `|dt| <= reach`. The
/// slope comes from the widest offsets and the additive slack covers the rest.
pub fn quasi_geodesic_fit(spec: &SplittingSpec, starts: &[i64], reach: u32) -> Result<QuasiGeodesicFit> {
    let mut cx = Complex::new(ComplexModel::from_spec(spec)?);
    let mut samples = vec![];
    for &s in starts {
        let dist = cx.distances(&cx.gamma(s), reach, DEFAULT_POINT_BUDGET)?;
        for dt in -i64::from(reach)..=i64::from(reach) {
            let d = dist.get(&cx.gamma(s + dt)).copied().expect("the base line has unit speed");
            samples.push((dt, d));
        }
    }
    let lambda = samples
        .iter()
        .filter(|(dt, _)| dt.unsigned_abs() == u64::from(reach))
        .map(|&(dt, d)| dt.abs() as f64 / f64::from(d.max(1)))
        .fold(1.0, f64::max);
    let epsilon = samples.iter().map(|&(dt, d)| dt.abs() as f64 / lambda - f64::from(d)).fold(0.0, f64::max);
    Ok(QuasiGeodesicFit { lambda, epsilon, samples })
}
