use serde::{Deserialize, Serialize};

use super::complex::{Complex, EdgeKind, Point, Position, StripStep};
use super::{ComplexModel, SplittingSpec, DEFAULT_POINT_BUDGET};
use crate::error::{Error, Result};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateStep {
    pub attachment: usize,
    pub line: String,
    pub slot: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificatePosition {
    Vertex(String),
    Edge { from: String, generator: Letter, offset: u32 },
}

/// A point named by its strip path from the base space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificatePoint {
    pub space: Vec<CertificateStep>,
    pub position: CertificatePosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateSegment {
    /// Geodesic inside one vertex space.
    Horizontal { from: CertificatePoint, to: CertificatePoint },
    /// A single rung.
    Vertical { from: CertificatePoint, to: CertificatePoint },
}

impl CertificateSegment {
    pub fn from(&self) -> &CertificatePoint {
        match self {
            CertificateSegment::Horizontal { from, .. } | CertificateSegment::Vertical { from, .. } => from,
        }
    }

    pub fn to(&self) -> &CertificatePoint {
        match self {
            CertificateSegment::Horizontal { to, .. } | CertificateSegment::Vertical { to, .. } => to,
        }
    }

    pub fn to_mut(&mut self) -> &mut CertificatePoint {
        match self {
            CertificateSegment::Horizontal { to, .. } | CertificateSegment::Vertical { to, .. } => to,
        }
    }
}

/// One handled line segment of the construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    /// `clean`, `vertical` or `horizontal`.
    pub operation: String,
    pub space: Vec<CertificateStep>,
    pub attachment: usize,
    pub line: String,
    #[serde(rename = "fromArc")]
    pub from_arc: i64,
    #[serde(rename = "toArc")]
    pub to_arc: i64,
    /// Least distance to the base point along the segment, when within the
    /// explored ball.
    #[serde(rename = "minDistance")]
    pub min_distance: Option<u32>,
}

/// Least distance to the base point over the horizontal part of the path
/// after `round` rounds of pushing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    #[serde(rename = "minDistance")]
    pub min_distance: Option<u32>,
}

/// A path between two far points of the base line that stays outside the
/// closed ball of `radius` around the base point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetourCertificate {
    pub radius: u32,
    #[serde(rename = "tMinus")]
    pub t_minus: i64,
    #[serde(rename = "tPlus")]
    pub t_plus: i64,
    pub segments: Vec<CertificateSegment>,
    #[serde(default)]
    pub stages: Vec<StageRecord>,
    #[serde(default)]
    pub rounds: Vec<RoundRecord>,
}

pub(crate) fn encode_step(step: &StripStep) -> CertificateStep {
    CertificateStep { attachment: step.attachment, line: step.line.to_string(), slot: step.slot }
}

pub(crate) fn encode_position(pos: &Position) -> CertificatePosition {
    match pos {
        Position::Vertex(w) => CertificatePosition::Vertex(w.to_string()),
        Position::Edge { from, generator, offset } => {
            CertificatePosition::Edge { from: from.to_string(), generator: *generator, offset: *offset }
        }
    }
}

pub(crate) fn encode_point(cx: &Complex, p: &Point) -> CertificatePoint {
    CertificatePoint {
        space: cx.path(p.space).iter().map(encode_step).collect(),
        position: encode_position(&p.position),
    }
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MalformedCertificate(msg.into())
}

pub(crate) fn decode_point(cx: &mut Complex, p: &CertificatePoint) -> Result<Point> {
    let mut space = 0;
    for step in &p.space {
        let basis = cx.kind(space).basis;
        let decoded = StripStep { attachment: step.attachment, line: Word::parse(&step.line, basis)?, slot: step.slot };
        cx.validate_step(space, &decoded)?;
        space = cx.child(space, &decoded);
    }
    let basis = cx.kind(space).basis;
    let position = match &p.position {
        CertificatePosition::Vertex(w) => Position::Vertex(Word::parse(w, basis)?),
        CertificatePosition::Edge { from, generator, offset } => {
            Position::Edge { from: Word::parse(from, basis)?, generator: *generator, offset: *offset }
        }
    };
    if !cx.validate_position(space, &position) {
        return Err(bad("point outside its vertex space"));
    }
    Ok(Point { space, position })
}

/// Checks a certificate against a freshly built complex, explaining the
/// first failure.
pub fn check_certificate(spec: &SplittingSpec, cert: &DetourCertificate) -> Result<()> {
    check_certificate_in(ComplexModel::from_spec(spec)?, cert)
}

/// Checks a certificate against a freshly built complex of the model.
pub fn check_certificate_in(model: ComplexModel, cert: &DetourCertificate) -> Result<()> {
    let mut cx = Complex::new(model);
    if cert.radius == 0 {
        return Err(bad("radius must be positive"));
    }
    if cert.t_plus <= 0 || cert.t_minus != -cert.t_plus {
        return Err(bad("endpoints must be symmetric about the base point"));
    }
    if cert.segments.is_empty() {
        return Err(bad("no segments"));
    }
    let mut path: Vec<Point> = vec![];
    let mut prev_end: Option<Point> = None;
    for (n, seg) in cert.segments.iter().enumerate() {
        let from = decode_point(&mut cx, seg.from())?;
        let to = decode_point(&mut cx, seg.to())?;
        match &prev_end {
            None if from != cx.gamma(cert.t_minus) => return Err(bad("path does not start at gamma(tMinus)")),
            Some(p) if *p != from => return Err(bad(format!("segment {n} does not continue the path"))),
            _ => {}
        }
        match seg {
            CertificateSegment::Horizontal { .. } => {
                if from.space != to.space {
                    return Err(bad(format!("horizontal segment {n} changes space")));
                }
                let pts = cx.horizontal_path(from.space, &from.position, &to.position);
                path.extend(pts.into_iter().map(|position| Point { space: from.space, position }));
            }
            CertificateSegment::Vertical { .. } => {
                let rung = cx.neighbors(&from).into_iter().any(|(q, k)| k == EdgeKind::Vertical && q == to);
                if !rung {
                    return Err(bad(format!("vertical segment {n} is not a rung")));
                }
                path.push(from.clone());
                path.push(to.clone());
            }
        }
        prev_end = Some(to);
    }
    if prev_end.as_ref() != Some(&cx.gamma(cert.t_plus)) {
        return Err(bad("path does not end at gamma(tPlus)"));
    }
    let ball = cx.distances(&cx.gamma(0), cert.radius, DEFAULT_POINT_BUDGET)?;
    if let Some(p) = path.iter().find(|p| ball.contains_key(p)) {
        return Err(bad(format!("path meets the ball at distance {}", ball[p])));
    }
    Ok(())
}

/// True iff the certificate describes a path of the complex from
/// `gamma(tMinus)` to `gamma(tPlus)` avoiding the closed ball.
pub fn verify_certificate(spec: &SplittingSpec, cert: &DetourCertificate) -> bool {
    check_certificate(spec, cert).is_ok()
}
