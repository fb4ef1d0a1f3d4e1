use serde::{Deserialize, Serialize};

use super::lift::{FactorReport, LiftedMultiword};
use super::{num_lcm, GroupElement, PresentationSpec, VfPresentation};
use crate::bassserre::{
    check_certificate_in, detour_in_model, Attachment, ComplexModel, DetourCertificate, DetourOptions, SpaceKind,
};
use crate::decider::{baumslag_solitar_relation, WitnessSide, DEFAULT_RADII, SCHEMA};
use crate::error::{Error, Result};
use crate::whitehead::{
    analyze_graph, build_whitehead_graph, level_set, minimize_normalized, normalize_multiword, replay_moves, Multiword,
    NormalizedMultiword, WhiteheadMove, DEFAULT_LEVEL_SET_BUDGET,
};
use crate::words::Word;

/// A one-edge splitting of virtually free groups over a virtually cyclic
/// group, each edge group named by one infinite-order element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VfSplittingSpec {
    Amalgam {
        #[serde(rename = "A")]
        a: PresentationSpec,
        #[serde(rename = "B")]
        b: PresentationSpec,
        #[serde(rename = "cA")]
        c_a: String,
        #[serde(rename = "cB")]
        c_b: String,
    },
    Hnn {
        #[serde(rename = "A")]
        a: PresentationSpec,
        c1: String,
        c2: String,
    },
}

impl VfSplittingSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VfEvidence {
    /// Detours in the coarse complex.
    Detour { certificates: Vec<DetourCertificate> },
    /// `g c1^a g^-1 = c2^b` in the vertex group.
    BaumslagSolitar { conjugator: String, exponents: [i64; 2] },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum VfVerdict {
    VirtuallyFree {
        side: WitnessSide,
        /// For an HNN extension, moves putting the side's lift roots onto
        /// isolated generators.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        moves: Vec<WhiteheadMove>,
        reports: Vec<FactorReport>,
    },
    NotVirtuallyFree {
        evidence: VfEvidence,
        reports: Vec<FactorReport>,
    },
}

impl VfVerdict {
    pub fn is_virtually_free(&self) -> bool {
        matches!(self, VfVerdict::VirtuallyFree { .. })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("verdict serializes");
        v["schema"] = SCHEMA.into();
        v
    }
}

#[derive(Debug, Clone)]
pub struct VfOptions {
    pub radii: Vec<u32>,
    pub level_set_budget: usize,
    pub detour: DetourOptions,
}

impl Default for VfOptions {
    fn default() -> Self {
        VfOptions {
            radii: DEFAULT_RADII.to_vec(),
            level_set_budget: DEFAULT_LEVEL_SET_BUDGET,
            detour: DetourOptions::default(),
        }
    }
}

struct Side {
    pres: VfPresentation,
    lift: LiftedMultiword,
    report: FactorReport,
}

fn side(spec: &PresentationSpec, c: &str) -> Result<Side> {
    let pres = VfPresentation::new(spec)?;
    let element = pres.parse(c)?;
    let lift = pres.lift_multiword(&element)?;
    let report = pres.factor_report(&element)?;
    Ok(Side { pres, lift, report })
}

/// Root classes of a normalized multiword sorted so that a class lying in
/// a non-isolated component of the Whitehead graph comes first.
fn arrival_first(min: &NormalizedMultiword, classes: &[usize]) -> Vec<usize> {
    let report = analyze_graph(&build_whitehead_graph(min));
    let basis = min.basis();
    let isolated = |class: usize| {
        build_whitehead_graph(min).edges().iter().filter(|e| e.root == class).all(|e| {
            report.component_of[basis.direction_index(e.ends.0)].is_some_and(|c| report.components[c].isolated_edge)
        })
    };
    let mut out = classes.to_vec();
    if let Some(i) = out.iter().position(|&c| !isolated(c)) {
        out.swap(0, i);
    }
    out
}

/// Attachments for the root classes hit by `members`, with the strip
/// carrying `c^n` for `n = lcm` of the image orders.
fn attachments(
    min: &NormalizedMultiword,
    member_range: std::ops::Range<usize>,
    order: u32,
    lcm: u64,
    multiplicity: usize,
    target: (usize, usize),
) -> Vec<Attachment> {
    let mut classes: Vec<usize> = vec![];
    for m in &min.members()[member_range.clone()] {
        if !classes.contains(&m.root) {
            classes.push(m.root);
        }
    }
    arrival_first(min, &classes)
        .into_iter()
        .map(|class| {
            let m = min.members()[member_range.clone()].iter().find(|m| m.root == class).expect("class has a member");
            let root = &min.roots()[class];
            let root = if m.exponent > 0 { root.to_word() } else { root.inverse().to_word() };
            Attachment {
                root,
                power: (m.exponent.unsigned_abs() * lcm / u64::from(order)) as u32,
                multiplicity: multiplicity as u32,
                shifted_slots: true,
                target,
            }
        })
        .collect()
}

fn base_rotation(kinds: &[SpaceKind]) -> Word {
    kinds[0].attachments[0].root.clone()
}

fn coarse_amalgam(a: &Side, b: &Side) -> Result<ComplexModel> {
    let lcm = num_lcm(u64::from(a.lift.order), u64::from(b.lift.order));
    let kind = |s: &Side, target| {
        let (min, _) = minimize_normalized(&s.lift.normalized);
        let n = min.members().len();
        let atts = attachments(&min, 0..n, s.lift.order, lcm, s.report.commensurator_index, target);
        SpaceKind { basis: min.basis(), edge_length: 1, attachments: atts }
    };
    let mut kinds = vec![kind(a, (1, 0)), kind(b, (0, 0))];
    // as in the torsion-free metrization, an edge of one side is as long as
    // a strip period on the other
    let len = |k: &SpaceKind| k.attachments[0].root.len() as u32 * k.attachments[0].power;
    let (la, lb) = (len(&kinds[0]), len(&kinds[1]));
    kinds[0].edge_length = lb;
    kinds[1].edge_length = la;
    Ok(ComplexModel { base_rotation: base_rotation(&kinds), kinds })
}

struct HnnLifts {
    first: Side,
    second: Side,
    combined: NormalizedMultiword,
}

fn hnn_lifts(a: &PresentationSpec, c1: &str, c2: &str) -> Result<HnnLifts> {
    let first = side(a, c1)?;
    let second = side(a, c2)?;
    let mut members = first.lift.members.clone();
    members.extend(second.lift.members.iter().cloned());
    let combined = normalize_multiword(&Multiword::new(first.pres.kernel_basis(), members)?)?;
    Ok(HnnLifts { first, second, combined })
}

impl HnnLifts {
    fn split(&self) -> usize {
        self.first.lift.members.len()
    }

    /// `g c1^a g^-1 = c2^b` from a pair of lift members with a common root.
    fn baumslag_solitar(&self) -> Result<Option<(GroupElement, [i64; 2])>> {
        let pres = &self.first.pres;
        let n = self.split();
        let members = self.combined.members();
        for p in 0..n {
            for q in 0..self.second.lift.members.len() {
                if members[p].root != members[n + q].root {
                    continue;
                }
                let (m1, m2) = (&self.first.lift.members[p], &self.second.lift.members[q]);
                let Some((x, [e1, e2])) = baumslag_solitar_relation(m1, m2)? else {
                    continue;
                };
                let g = pres.mul(&pres.mul(&pres.inverse(pres.coset_rep(q)), &pres.expand(&x)), pres.coset_rep(p));
                let exps = [e1 * i64::from(self.first.lift.order), e2 * i64::from(self.second.lift.order)];
                return Ok(Some((g, exps)));
            }
        }
        Ok(None)
    }

    fn model(&self) -> Result<ComplexModel> {
        let (min, _) = minimize_normalized(&self.combined);
        let lcm = num_lcm(u64::from(self.first.lift.order), u64::from(self.second.lift.order));
        let n = self.split();
        let total = min.members().len();
        let second =
            attachments(&min, n..total, self.second.lift.order, lcm, self.second.report.commensurator_index, (0, 0));
        let mut atts =
            attachments(&min, 0..n, self.first.lift.order, lcm, self.first.report.commensurator_index, (0, 0));
        let offset = atts.len();
        for a in &mut atts {
            a.target = (0, offset);
        }
        atts.extend(second);
        let kinds = vec![SpaceKind { basis: min.basis(), edge_length: 1, attachments: atts }];
        Ok(ComplexModel { base_rotation: base_rotation(&kinds), kinds })
    }
}

/// The side's lift roots are isolated single generators avoided by the
/// other side's roots.
fn isolated_side(pos: &NormalizedMultiword, range: std::ops::Range<usize>, other: std::ops::Range<usize>) -> bool {
    let members = pos.members();
    let mine: Vec<usize> = members[range].iter().map(|m| m.root).collect();
    let theirs: Vec<usize> = members[other].iter().map(|m| m.root).collect();
    if members.iter().any(|m| mine.contains(&m.root) && m.exponent.abs() != 1) {
        return false;
    }
    mine.iter().all(|&r| {
        let root = &pos.roots()[r];
        root.len() == 1
            && !theirs.contains(&r)
            && theirs.iter().all(|&t| !pos.roots()[t].uses_generator(root.letters()[0].abs()))
    })
}

/// The coarse complex of a splitting that is not virtually free: vertex
/// spaces are trees of the kernels, lines are the lift roots, and each
/// line carries one strip per coset of `<c>` in its commensurator.
pub fn coarse_model(spec: &VfSplittingSpec) -> Result<ComplexModel> {
    match spec {
        VfSplittingSpec::Amalgam { a, b, c_a, c_b } => coarse_amalgam(&side(a, c_a)?, &side(b, c_b)?),
        VfSplittingSpec::Hnn { a, c1, c2 } => {
            let lifts = hnn_lifts(a, c1, c2)?;
            if lifts.baumslag_solitar()?.is_some() {
                return Err(Error::CommensurableRoots);
            }
            lifts.model()
        }
    }
}

fn certificates(model: &ComplexModel, opts: &VfOptions) -> Result<Vec<DetourCertificate>> {
    opts.radii.iter().map(|&r| detour_in_model(model, r, &opts.detour)).collect()
}

pub fn decide_vf(spec: &VfSplittingSpec) -> Result<VfVerdict> {
    decide_vf_with(spec, &VfOptions::default())
}

pub fn decide_vf_with(spec: &VfSplittingSpec, opts: &VfOptions) -> Result<VfVerdict> {
    match spec {
        VfSplittingSpec::Amalgam { a, b, c_a, c_b } => {
            let (sa, sb) = (side(a, c_a)?, side(b, c_b)?);
            let reports = vec![sa.report.clone(), sb.report.clone()];
            for (s, name) in [(&sa, WitnessSide::A), (&sb, WitnessSide::B)] {
                if s.report.factor {
                    return Ok(VfVerdict::VirtuallyFree { side: name, moves: vec![], reports });
                }
            }
            let certificates = certificates(&coarse_amalgam(&sa, &sb)?, opts)?;
            Ok(VfVerdict::NotVirtuallyFree { evidence: VfEvidence::Detour { certificates }, reports })
        }
        VfSplittingSpec::Hnn { a, c1, c2 } => {
            let lifts = hnn_lifts(a, c1, c2)?;
            let reports = vec![lifts.first.report.clone(), lifts.second.report.clone()];
            if let Some((g, exponents)) = lifts.baumslag_solitar()? {
                let conjugator = lifts.first.pres.format(&g);
                return Ok(VfVerdict::NotVirtuallyFree {
                    evidence: VfEvidence::BaumslagSolitar { conjugator, exponents },
                    reports,
                });
            }
            let (min, moves) = minimize_normalized(&lifts.combined);
            let levels = level_set(&min, opts.level_set_budget)?;
            let (n, total) = (lifts.split(), lifts.combined.members().len());
            for level in &levels.positions {
                for (name, mine, other, report) in [
                    (WitnessSide::W1, 0..n, n..total, &lifts.first.report),
                    (WitnessSide::W2, n..total, 0..n, &lifts.second.report),
                ] {
                    if report.almost_malnormal && isolated_side(&level.position, mine, other) {
                        let mut all = moves.clone();
                        all.extend(level.path.iter().cloned());
                        return Ok(VfVerdict::VirtuallyFree { side: name, moves: all, reports });
                    }
                }
            }
            if levels.capped {
                return Err(Error::BudgetExceeded(format!(
                    "minimal level set exceeds {} positions",
                    opts.level_set_budget
                )));
            }
            let certificates = certificates(&lifts.model()?, opts)?;
            Ok(VfVerdict::NotVirtuallyFree { evidence: VfEvidence::Detour { certificates }, reports })
        }
    }
}

/// Rechecks a verdict from the splitting: factor reports, the moved lift, the
/// relation, or each certificate against a rebuilt coarse complex.
pub fn verify_vf_verdict(spec: &VfSplittingSpec, verdict: &VfVerdict) -> bool {
    verify(spec, verdict).unwrap_or(false)
}

fn verify(spec: &VfSplittingSpec, verdict: &VfVerdict) -> Result<bool> {
    match (spec, verdict) {
        (VfSplittingSpec::Amalgam { a, b, c_a, c_b }, VfVerdict::VirtuallyFree { side: s, .. }) => match s {
            WitnessSide::A => Ok(side(a, c_a)?.report.factor),
            WitnessSide::B => Ok(side(b, c_b)?.report.factor),
            _ => Ok(false),
        },
        (VfSplittingSpec::Hnn { a, c1, c2 }, VfVerdict::VirtuallyFree { side: s, moves, .. }) => {
            let lifts = hnn_lifts(a, c1, c2)?;
            let (n, total) = (lifts.split(), lifts.combined.members().len());
            let (mine, other, report) = match s {
                WitnessSide::W1 => (0..n, n..total, &lifts.first.report),
                WitnessSide::W2 => (n..total, 0..n, &lifts.second.report),
                _ => return Ok(false),
            };
            let moved = replay_moves(moves, &lifts.combined.roots_multiword())?;
            let roots = moved.members().iter().map(crate::words::CyclicWord::from_word).collect::<Result<Vec<_>>>()?;
            let position = lifts.combined.with_roots(roots);
            Ok(report.almost_malnormal && isolated_side(&position, mine, other))
        }
        (
            VfSplittingSpec::Hnn { a, c1, c2 },
            VfVerdict::NotVirtuallyFree { evidence: VfEvidence::BaumslagSolitar { conjugator, exponents }, .. },
        ) => {
            let pres = VfPresentation::new(a)?;
            let (g, x, y) = (pres.parse(conjugator)?, pres.parse(c1)?, pres.parse(c2)?);
            if exponents.contains(&0) {
                return Ok(false);
            }
            Ok(pres.conjugate(&g, &pres.pow(&x, exponents[0])) == pres.pow(&y, exponents[1]))
        }
        (_, VfVerdict::NotVirtuallyFree { evidence: VfEvidence::Detour { certificates }, .. }) => {
            let model = coarse_model(spec)?;
            Ok(certificates.iter().all(|c| check_certificate_in(model.clone(), c).is_ok()))
        }
        _ => Ok(false),
    }
}
