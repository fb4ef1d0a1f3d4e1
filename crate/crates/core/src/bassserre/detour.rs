use std::collections::HashMap;

use super::certificate::{
    check_certificate_in, encode_point, encode_step, CertificateSegment, DetourCertificate, RoundRecord, StageRecord,
};
use super::complex::{Complex, LineThrough, Point, Position, SpaceId, StripStep};
use super::{ComplexModel, SplittingSpec, DEFAULT_POINT_BUDGET};
use crate::error::{Error, Result};
use crate::graph::Multigraph;
use crate::splice::{generalized_whitehead_graph, GeneralizedWhiteheadGraph, Subtree, TranslateId};
use crate::words::Word;

#[derive(Debug, Clone)]
pub struct DetourOptions {
    pub point_budget: usize,
    /// Construction attempts, each with a wider margin and farther endpoints.
    pub attempts: usize,
}

impl Default for DetourOptions {
    fn default() -> Self {
        DetourOptions { point_budget: DEFAULT_POINT_BUDGET, attempts: 6 }
    }
}

/// A detour around the ball of `radius` about the base point.
pub fn detour_certificate(spec: &SplittingSpec, radius: u32) -> Result<DetourCertificate> {
    detour_certificate_with(spec, radius, &DetourOptions::default())
}

pub fn detour_certificate_with(spec: &SplittingSpec, radius: u32, opts: &DetourOptions) -> Result<DetourCertificate> {
    if radius == 0 {
        return Err(Error::InvalidInput("detour radius must be positive".into()));
    }
    if crate::decider::splitting_is_free(spec)? {
        return Err(Error::NotApplicable(
            "the splitting is free, so its complex has no bottleneck-free detours".into(),
        ));
    }
    detour_in_model(&ComplexModel::from_spec(spec)?, radius, opts)
}

/// Builds and checks a detour in the complex of an explicit model.
pub fn detour_in_model(model: &ComplexModel, radius: u32, opts: &DetourOptions) -> Result<DetourCertificate> {
    if radius == 0 {
        return Err(Error::InvalidInput("detour radius must be positive".into()));
    }
    let e = model.max_edge_length();
    let mut last_err = None;
    let mut t_floor = 1;
    for attempt in 0..opts.attempts {
        let slack = attempt as u32;
        let mut b = Builder::new(Complex::new(model.clone()), radius, e, slack, opts.point_budget)?;
        let t = b.endpoint_arc(t_floor);
        t_floor = 2 * t;
        match b.build(t) {
            Ok(cert) => match check_certificate_in(model.clone(), &cert) {
                Ok(()) => return Ok(cert),
                Err(err) => last_err = Some(err),
            },
            Err(err) if err.is_budget() => return Err(err),
            Err(err) => last_err = Some(err),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::BudgetExceeded("no detour found".into())))
}

const ENDPOINT_INSIDE: &str = "segment endpoint inside the hull";

/// Extra strip periods tried when a far-side segment ends inside the hull.
const MAX_PAD: i64 = 12;

enum Seg {
    Horizontal(Point, Point),
    Vertical(Point, Point),
}

/// A horizontal piece of some approximation of the final path.
struct Piece {
    depth: usize,
    /// For a handled line segment (as opposed to a connecting piece):
    /// whether it was already clean, and whether it is the segment that
    /// first enters its space.
    call: Option<(bool, bool)>,
    space: SpaceId,
    from: Position,
    to: Position,
}

struct Builder {
    cx: Complex,
    radius: u32,
    /// Threshold for hulls in spaces at depth `k` is `thresholds[k]`.
    thresholds: Vec<u32>,
    dist: HashMap<Point, u32>,
    reach: u32,
    vertices_by_space: HashMap<SpaceId, Vec<(Word, u32)>>,
    segs: Vec<Seg>,
    pieces: Vec<Piece>,
    stages: Vec<StageRecord>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Builder {
    fn new(mut cx: Complex, radius: u32, e: u32, slack: u32, budget: usize) -> Result<Self> {
        let floor = radius + e + 1;
        let max_depth = radius as usize + 1;
        let thresholds: Vec<u32> =
            (0..=max_depth).map(|k| floor + slack.saturating_sub(k.saturating_sub(1) as u32)).collect();
        let reach = thresholds.iter().copied().max().unwrap_or(floor).max(2 * radius);
        let dist = cx.distances(&cx.gamma(0), reach, budget)?;
        let mut vertices_by_space: HashMap<SpaceId, Vec<(Word, u32)>> = HashMap::new();
        for (p, &d) in &dist {
            if let Position::Vertex(w) = &p.position {
                vertices_by_space.entry(p.space).or_default().push((w.clone(), d));
            }
        }
        Ok(Builder {
            cx,
            radius,
            thresholds,
            dist,
            reach,
            vertices_by_space,
            segs: vec![],
            pieces: vec![],
            stages: vec![],
        })
    }

    /// Smallest arc at least `floor` whose two base line points lie beyond
    /// the explored ball.
    fn endpoint_arc(&self, floor: i64) -> i64 {
        let mut t = floor.max(1);
        while self.dist.contains_key(&self.cx.gamma(t)) || self.dist.contains_key(&self.cx.gamma(-t)) {
            t += 1;
        }
        t
    }

    fn d(&self, p: &Point) -> Option<u32> {
        self.dist.get(p).copied()
    }

    fn min_distance(&self, space: SpaceId, from: &Position, to: &Position) -> Option<u32> {
        self.cx
            .horizontal_path(space, from, to)
            .into_iter()
            .filter_map(|position| self.d(&Point { space, position }))
            .min()
    }

    fn horizontal(&mut self, depth: usize, space: SpaceId, from: Position, to: Position) {
        if from == to {
            return;
        }
        self.pieces.push(Piece { depth, call: None, space, from: from.clone(), to: to.clone() });
        self.segs.push(Seg::Horizontal(Point { space, position: from }, Point { space, position: to }));
    }

    fn build(&mut self, t: i64) -> Result<DetourCertificate> {
        let (rep, offset) = self.cx.base_line();
        self.route(0, 0, &rep, offset - t, offset + t, 0, true)?;
        let segments = self
            .segs
            .iter()
            .map(|s| match s {
                Seg::Horizontal(a, b) => {
                    CertificateSegment::Horizontal { from: encode_point(&self.cx, a), to: encode_point(&self.cx, b) }
                }
                Seg::Vertical(a, b) => {
                    CertificateSegment::Vertical { from: encode_point(&self.cx, a), to: encode_point(&self.cx, b) }
                }
            })
            .collect();
        Ok(DetourCertificate {
            radius: self.radius,
            t_minus: -t,
            t_plus: t,
            segments,
            stages: std::mem::take(&mut self.stages),
            rounds: self.rounds(),
        })
    }

    fn rounds(&self) -> Vec<RoundRecord> {
        let deepest = self.pieces.iter().map(|p| p.depth).max().unwrap_or(0);
        (0..=deepest)
            .map(|round| {
                let min_distance = self
                    .pieces
                    .iter()
                    .filter(|p| match p.call {
                        Some((clean, arrival)) => (p.depth == round && arrival) || (p.depth < round && clean),
                        None => p.depth < round,
                    })
                    .filter_map(|p| self.min_distance(p.space, &p.from, &p.to))
                    .min();
                RoundRecord { round, min_distance }
            })
            .collect()
    }

    fn record(
        &mut self,
        depth: usize,
        op: &str,
        space: SpaceId,
        attachment: usize,
        rep: &Word,
        from: i64,
        to: i64,
        min: Option<u32>,
    ) {
        self.stages.push(StageRecord {
            stage: depth,
            operation: op.into(),
            space: self.cx.path(space).iter().map(encode_step).collect(),
            attachment,
            line: rep.to_string(),
            from_arc: from,
            to_arc: to,
            min_distance: min,
        });
    }

    /// Appends a path from arc `from` to arc `to` of the line `rep<root>` of
    /// `attachment` that avoids the ball.
    #[allow(clippy::too_many_arguments)]
    fn route(
        &mut self,
        depth: usize,
        space: SpaceId,
        rep: &Word,
        from: i64,
        to: i64,
        attachment: usize,
        arrival: bool,
    ) -> Result<()> {
        if depth >= self.thresholds.len() {
            return Err(Error::BudgetExceeded("detour recursion too deep".into()));
        }
        let p_from = self.cx.line_position(space, rep, attachment, from);
        let p_to = self.cx.line_position(space, rep, attachment, to);
        let min = self.min_distance(space, &p_from, &p_to);
        let clean = min.is_none_or(|d| d > self.radius);
        self.pieces.push(Piece { depth, call: Some((clean, arrival)), space, from: p_from.clone(), to: p_to.clone() });
        if clean {
            self.record(depth, "clean", space, attachment, rep, from, to, min);
            if p_from != p_to {
                self.segs.push(Seg::Horizontal(Point { space, position: p_from }, Point { space, position: p_to }));
            }
            return Ok(());
        }
        let back = self.cx.back_step(space);
        let m = self.cx.kind(space).attachments[attachment].multiplicity;
        let free_slot = (0..m).find(|&slot| back.as_ref() != Some(&StripStep { attachment, line: rep.clone(), slot }));
        match free_slot {
            Some(slot) => {
                self.record(depth, "vertical", space, attachment, rep, from, to, min);
                self.push_vertical(depth, space, rep, attachment, slot, from, to)
            }
            None => {
                self.record(depth, "horizontal", space, attachment, rep, from, to, min);
                self.reroute(depth, space, rep, attachment, from, to)
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push_vertical(
        &mut self,
        depth: usize,
        space: SpaceId,
        rep: &Word,
        attachment: usize,
        slot: u32,
        from: i64,
        to: i64,
    ) -> Result<()> {
        let kind = self.cx.kind(space).clone();
        let at = &kind.attachments[attachment];
        let shift =
            if at.shifted_slots { i64::from(slot) * at.root.len() as i64 * i64::from(kind.edge_length) } else { 0 };
        let p_here = kind.period(attachment);
        let p_there = self.cx.model().kinds[at.target.0].period(at.target.1);
        let sigma = p_here / gcd(p_here, p_there);
        let (f, t) = (from - shift, to - shift);
        let (f2, t2) = if f <= t {
            (f.div_euclid(sigma) * sigma, (t + sigma - 1).div_euclid(sigma) * sigma)
        } else {
            ((f + sigma - 1).div_euclid(sigma) * sigma, t.div_euclid(sigma) * sigma)
        };
        let dir = if f <= t { 1 } else { -1 };
        let mut last = None;
        for pad in 0..=MAX_PAD {
            let mark = (self.segs.len(), self.pieces.len(), self.stages.len());
            let ext = pad * sigma * dir;
            match self.push_across(depth, space, rep, attachment, slot, shift, sigma, (from, to), (f2 - ext, t2 + ext))
            {
                Err(Error::InvalidInput(msg)) if msg == ENDPOINT_INSIDE => {
                    self.segs.truncate(mark.0);
                    self.pieces.truncate(mark.1);
                    self.stages.truncate(mark.2);
                    last = Some(Error::InvalidInput(msg));
                }
                other => return other,
            }
        }
        Err(last.expect("at least one pad was tried"))
    }

    /// Crosses the strip at strip arcs `rungs.0` and `rungs.1`, routes
    /// through the far side and returns.
    #[allow(clippy::too_many_arguments)]
    fn push_across(
        &mut self,
        depth: usize,
        space: SpaceId,
        rep: &Word,
        attachment: usize,
        slot: u32,
        shift: i64,
        sigma: i64,
        (from, to): (i64, i64),
        (f2, t2): (i64, i64),
    ) -> Result<()> {
        let kind = self.cx.kind(space).clone();
        let at = &kind.attachments[attachment];
        let p_here = kind.period(attachment);
        let p_there = self.cx.model().kinds[at.target.0].period(at.target.1);
        let start = self.cx.line_position(space, rep, attachment, f2 + shift);
        let end = self.cx.line_position(space, rep, attachment, t2 + shift);
        self.horizontal(depth, space, self.cx.line_position(space, rep, attachment, from), start.clone());
        let rung = |s: i64| LineThrough { attachment, rep: rep.clone(), arc: s + shift };
        let misaligned = || Error::InvalidInput("rung misaligned".into());
        let c_start = self.cx.rung_partner(space, &rung(f2), slot).ok_or_else(misaligned)?;
        let c_end = self.cx.rung_partner(space, &rung(t2), slot).ok_or_else(misaligned)?;
        let child = c_start.space;
        let scale = |s: i64| s / sigma * (p_there / gcd(p_here, p_there));
        self.segs.push(Seg::Vertical(Point { space, position: start }, c_start));
        let child_rep = Word::identity(self.cx.kind(child).basis);
        self.route(depth + 1, child, &child_rep, scale(f2), scale(t2), at.target.1, true)?;
        self.segs.push(Seg::Vertical(c_end, Point { space, position: end.clone() }));
        let target = self.cx.line_position(space, rep, attachment, to);
        self.horizontal(depth, space, end, target);
        Ok(())
    }

    fn hull(&self, space: SpaceId, depth: usize) -> Result<Subtree> {
        let threshold = self.thresholds[depth].min(self.reach);
        let basis = self.cx.kind(space).basis;
        let k: Vec<Word> = self
            .vertices_by_space
            .get(&space)
            .map(|v| v.iter().filter(|(_, d)| *d < threshold).map(|(w, _)| w.clone()).collect())
            .unwrap_or_default();
        if k.is_empty() {
            return Err(Error::InvalidInput("dirty segment in a space with no nearby vertices".into()));
        }
        Subtree::hull(basis, &k)
    }

    #[allow(clippy::too_many_arguments)]
    fn reroute(
        &mut self,
        depth: usize,
        space: SpaceId,
        rep: &Word,
        attachment: usize,
        from: i64,
        to: i64,
    ) -> Result<()> {
        let y = self.hull(space, depth)?;
        let kind_idx = self.cx.kind_index(space);
        let nmw = self.cx.model().attachment_multiword(kind_idx)?;
        let g: GeneralizedWhiteheadGraph = generalized_whitehead_graph(&nmw, &y)?;
        let id = TranslateId { root: attachment, representative: rep.clone() };
        let e = g
            .edges
            .iter()
            .position(|edge| edge.translate == id)
            .ok_or_else(|| Error::InvalidInput("segment line misses the hull".into()))?;
        let forward = from <= to;
        let (u, v) = if forward { g.edges[e].ends } else { (g.edges[e].ends.1, g.edges[e].ends.0) };
        let arc = |cx: &Complex, w: &Word| cx.vertex_arc(space, rep, attachment, w);
        let (au, av) = match (arc(&self.cx, &g.frontier[u]), arc(&self.cx, &g.frontier[v])) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::InvalidInput("frontier vertex off its line".into())),
        };
        let inside = if forward { from <= au && au < av && av <= to } else { from >= au && au > av && av >= to };
        if !inside {
            return Err(Error::InvalidInput(ENDPOINT_INSIDE.into()));
        }
        let graph: Multigraph = g.to_multigraph();
        let path = graph
            .path_avoiding(u, v, e)
            .ok_or_else(|| Error::InvalidInput("no alternate path in the generalized Whitehead graph".into()))?;
        let p_from = self.cx.line_position(space, rep, attachment, from);
        self.horizontal(depth, space, p_from, Position::Vertex(g.frontier[u].clone()));
        let mut cur = u;
        for id in path {
            let edge = &g.edges[id];
            let next = if edge.ends.0 == cur { edge.ends.1 } else { edge.ends.0 };
            let line = edge.translate.representative.clone();
            let a = self.cx.vertex_arc(space, &line, edge.root, &g.frontier[cur]);
            let b = self.cx.vertex_arc(space, &line, edge.root, &g.frontier[next]);
            let (Some(a), Some(b)) = (a, b) else {
                return Err(Error::InvalidInput("frontier vertex off its line".into()));
            };
            let root = edge.root;
            self.route(depth, space, &line, a, b, root, false)?;
            cur = next;
        }
        let p_to = self.cx.line_position(space, rep, attachment, to);
        self.horizontal(depth, space, Position::Vertex(g.frontier[v].clone()), p_to);
        Ok(())
    }
}
