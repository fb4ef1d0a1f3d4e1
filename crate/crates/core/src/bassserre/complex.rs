use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::{ComplexModel, SpaceKind};
use crate::error::{Error, Result};
use crate::splice::coset_rep_with_power;
use crate::words::{Letter, Word};

pub type SpaceId = usize;

/// Leaves a vertex space through strip `slot` on the line `line<root>` of
/// attachment `attachment`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StripStep {
    pub attachment: usize,
    /// Canonical coset representative of the line.
    pub line: Word,
    pub slot: u32,
}

/// A point of a vertex space: a tree vertex, or an interior point of the
/// edge `from -- from*generator` at `offset` units from `from`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Position {
    Vertex(Word),
    Edge { from: Word, generator: Letter, offset: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub space: SpaceId,
    pub position: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone)]
struct SpaceNode {
    kind: usize,
    parent: Option<(SpaceId, StripStep)>,
}

/// A lazily expanded Bass-Serre complex. Spaces are created on first use and
/// named by their strip path from the base space.
#[derive(Debug, Clone)]
pub struct Complex {
    model: ComplexModel,
    spaces: Vec<SpaceNode>,
    children: HashMap<(SpaceId, StripStep), SpaceId>,
    base_rep: Word,
    base_offset: i64,
}

/// One line of attachment `attachment` through a point, with the point's
/// arc position measured from `rep`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineThrough {
    pub attachment: usize,
    pub rep: Word,
    pub arc: i64,
}

/// A metric ball: points with distances, and the unit edges among them.
#[derive(Debug, Clone)]
pub struct BassSerreBall {
    pub radius: u32,
    pub points: Vec<(Point, u32)>,
    pub edges: Vec<(usize, usize, EdgeKind)>,
    pub complex: Complex,
}

impl BassSerreBall {
    /// Graphviz rendering: vertex spaces are clusters, rungs are dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph ball {\n  node [shape=point];\n");
        let mut by_space: std::collections::BTreeMap<SpaceId, Vec<usize>> = Default::default();
        for (i, (p, _)) in self.points.iter().enumerate() {
            by_space.entry(p.space).or_default().push(i);
        }
        for (space, members) in &by_space {
            let kind = self.complex.kind_index(*space);
            out.push_str(&format!("  subgraph cluster_{space} {{\n    color=\"/set19/{}\";\n", kind % 9 + 1));
            for &i in members {
                let (p, d) = &self.points[i];
                let label = match &p.position {
                    Position::Vertex(w) => format!("{w}"),
                    Position::Edge { .. } => String::new(),
                };
                out.push_str(&format!("    p{i} [xlabel=\"{label}\", tooltip=\"d={d}\"];\n"));
            }
            out.push_str("  }\n");
        }
        for (a, b, kind) in &self.edges {
            let style = match kind {
                EdgeKind::Horizontal => "solid",
                EdgeKind::Vertical => "dashed",
            };
            out.push_str(&format!("  p{a} -- p{b} [style={style}];\n"));
        }
        out.push_str("}\n");
        out
    }

    pub fn distance_to(&self, p: &Point) -> Option<u32> {
        self.points.iter().find(|(q, _)| q == p).map(|(_, d)| *d)
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn unit(basis: crate::words::Basis, x: Letter) -> Word {
    Word::from_reduced(basis, vec![x])
}

impl Complex {
    pub fn new(model: ComplexModel) -> Self {
        let u = &model.kinds[0].attachments[0].root;
        let e = i64::from(model.kinds[0].edge_length);
        let l = u.len();
        let rot = model.base_rotation.letters();
        let j = (0..l)
            .find(|&j| u.letters()[j..].iter().chain(&u.letters()[..j]).eq(rot.iter()))
            .expect("base rotation is a rotation of the base root");
        let p = Word::from_reduced(u.basis(), u.letters()[..j].to_vec());
        let (rep, k) = coset_rep_with_power(&p.inverse(), u);
        let base_offset = (j as i64 - k * l as i64) * e;
        Complex {
            model,
            spaces: vec![SpaceNode { kind: 0, parent: None }],
            children: HashMap::new(),
            base_rep: rep,
            base_offset,
        }
    }

    pub fn model(&self) -> &ComplexModel {
        &self.model
    }

    pub fn space_count(&self) -> usize {
        self.spaces.len()
    }

    pub fn kind_index(&self, space: SpaceId) -> usize {
        self.spaces[space].kind
    }

    pub fn kind(&self, space: SpaceId) -> &SpaceKind {
        &self.model.kinds[self.spaces[space].kind]
    }

    pub fn base_point(&self) -> Point {
        Point { space: 0, position: Position::Vertex(Word::identity(self.model.kinds[0].basis)) }
    }

    /// The base line through the base point, at unit speed.
    pub fn gamma(&self, t: i64) -> Point {
        Point { space: 0, position: self.line_position(0, &self.base_rep, 0, self.base_offset + t) }
    }

    /// The base line's representative and the base point's arc on it.
    pub fn base_line(&self) -> (Word, i64) {
        (self.base_rep.clone(), self.base_offset)
    }

    pub fn parent(&self, space: SpaceId) -> Option<&(SpaceId, StripStep)> {
        self.spaces[space].parent.as_ref()
    }

    /// The step in `space` that leads back to its parent.
    pub fn back_step(&self, space: SpaceId) -> Option<StripStep> {
        let (p, step) = self.spaces[space].parent.as_ref()?;
        let target = self.kind(*p).attachments[step.attachment].target;
        Some(StripStep { attachment: target.1, line: Word::identity(self.kind(space).basis), slot: 0 })
    }

    /// Number of strips between `space` and the base space.
    pub fn depth(&self, space: SpaceId) -> usize {
        let mut d = 0;
        let mut s = space;
        while let Some((p, _)) = &self.spaces[s].parent {
            s = *p;
            d += 1;
        }
        d
    }

    /// Checks that `step` names a strip of `space` other than its back step.
    pub fn validate_step(&self, space: SpaceId, step: &StripStep) -> Result<()> {
        let k = self.kind(space);
        let at = k
            .attachments
            .get(step.attachment)
            .ok_or_else(|| Error::MalformedCertificate(format!("attachment {} out of range", step.attachment)))?;
        if step.line.basis() != k.basis {
            return Err(Error::MalformedCertificate("line rep in the wrong basis".into()));
        }
        if step.slot >= at.multiplicity {
            return Err(Error::MalformedCertificate(format!("slot {} out of range", step.slot)));
        }
        if coset_rep_with_power(&step.line, &at.root).0 != step.line {
            return Err(Error::MalformedCertificate(format!("{} is not a canonical line rep", step.line)));
        }
        if self.back_step(space).as_ref() == Some(step) {
            return Err(Error::MalformedCertificate("path steps back to the parent space".into()));
        }
        Ok(())
    }

    /// The space across `step`, created on demand.
    pub fn child(&mut self, space: SpaceId, step: &StripStep) -> SpaceId {
        if let Some(&c) = self.children.get(&(space, step.clone())) {
            return c;
        }
        let kind = self.kind(space).attachments[step.attachment].target.0;
        let id = self.spaces.len();
        self.spaces.push(SpaceNode { kind, parent: Some((space, step.clone())) });
        self.children.insert((space, step.clone()), id);
        id
    }

    pub fn path(&self, space: SpaceId) -> Vec<StripStep> {
        let mut out = vec![];
        let mut s = space;
        while let Some((p, step)) = &self.spaces[s].parent {
            out.push(step.clone());
            s = *p;
        }
        out.reverse();
        out
    }

    pub fn resolve(&mut self, path: &[StripStep]) -> Result<SpaceId> {
        let mut s = 0;
        for step in path {
            self.validate_step(s, step)?;
            s = self.child(s, step);
        }
        Ok(s)
    }

    pub fn validate_position(&self, space: SpaceId, pos: &Position) -> bool {
        let k = self.kind(space);
        match pos {
            Position::Vertex(w) => w.basis() == k.basis,
            Position::Edge { from, generator, offset } => {
                from.basis() == k.basis
                    && *generator > 0
                    && k.basis.contains(*generator)
                    && *offset > 0
                    && *offset < k.edge_length
            }
        }
    }

    /// Tree vertex `q` steps along the line from `rep`.
    fn line_vertex(rep: &Word, root: &Word, q: i64) -> Word {
        let u = root.letters();
        let l = u.len() as i64;
        let letters: Vec<Letter> = if q >= 0 {
            (0..q).map(|k| u[(k % l) as usize]).collect()
        } else {
            (q..0).rev().map(|k| -u[k.rem_euclid(l) as usize]).collect()
        };
        rep.mul(&Word::from_reduced(rep.basis(), letters))
    }

    /// The point at arc `s` along the line `rep<root>` of an attachment.
    pub fn line_position(&self, space: SpaceId, rep: &Word, attachment: usize, s: i64) -> Position {
        let k = self.kind(space);
        let root = &k.attachments[attachment].root;
        let e = i64::from(k.edge_length);
        let (q, off) = (s.div_euclid(e), s.rem_euclid(e));
        let v = Self::line_vertex(rep, root, q);
        if off == 0 {
            return Position::Vertex(v);
        }
        let x = root.letters()[q.rem_euclid(root.len() as i64) as usize];
        if x > 0 {
            Position::Edge { from: v, generator: x, offset: off as u32 }
        } else {
            let next = v.mul(&unit(rep.basis(), x));
            Position::Edge { from: next, generator: -x, offset: (e - off) as u32 }
        }
    }

    /// Arc of a tree vertex on the line `rep<root>`, if it lies there.
    pub fn vertex_arc(&self, space: SpaceId, rep: &Word, attachment: usize, h: &Word) -> Option<i64> {
        let k = self.kind(space);
        let u = k.attachments[attachment].root.letters();
        let l = u.len();
        let w = rep.inverse().mul(h);
        let e = i64::from(k.edge_length);
        let fwd = w.letters().iter().enumerate().all(|(i, &x)| x == u[i % l]);
        if fwd {
            return Some(w.len() as i64 * e);
        }
        let back = w.letters().iter().enumerate().all(|(i, &x)| x == -u[(l - 1) - (i % l)]);
        back.then(|| -(w.len() as i64) * e)
    }

    fn vertex_lines(&self, space: SpaceId, h: &Word) -> Vec<LineThrough> {
        let k = self.kind(space);
        let e = i64::from(k.edge_length);
        let mut out = vec![];
        for (a, at) in k.attachments.iter().enumerate() {
            let u = &at.root;
            let l = u.len();
            for i in 0..l {
                let prefix = Word::from_reduced(u.basis(), u.letters()[..=i].to_vec());
                let (rep, kk) = coset_rep_with_power(&h.mul(&prefix.inverse()), u);
                let n = (i as i64 + 1) - kk * l as i64;
                out.push(LineThrough { attachment: a, rep, arc: n * e });
            }
        }
        out
    }

    /// Every attachment line through the point.
    pub fn lines_through(&self, space: SpaceId, pos: &Position) -> Vec<LineThrough> {
        match pos {
            Position::Vertex(h) => self.vertex_lines(space, h),
            Position::Edge { from, generator, offset } => {
                let k = self.kind(space);
                let e = i64::from(k.edge_length);
                let mut out = vec![];
                for line in self.vertex_lines(space, from) {
                    let u = k.attachments[line.attachment].root.letters();
                    let l = u.len() as i64;
                    let n = line.arc / e;
                    if u[n.rem_euclid(l) as usize] == *generator {
                        out.push(LineThrough { arc: line.arc + i64::from(*offset), ..line });
                    } else if u[(n - 1).rem_euclid(l) as usize] == -*generator {
                        out.push(LineThrough { arc: line.arc - i64::from(*offset), ..line });
                    }
                }
                out
            }
        }
    }

    fn slot_shift(&self, space: SpaceId, attachment: usize, slot: u32) -> i64 {
        let k = self.kind(space);
        let at = &k.attachments[attachment];
        if at.shifted_slots {
            i64::from(slot) * at.root.len() as i64 * i64::from(k.edge_length)
        } else {
            0
        }
    }

    /// Spacing of rungs along a strip boundary on this side, and the
    /// partner arc for a rung at strip arc `s`.
    fn rung_scale(p_here: i64, p_there: i64, s: i64) -> Option<i64> {
        let g = gcd(p_here, p_there);
        (s % (p_here / g) == 0).then(|| s / (p_here / g) * (p_there / g))
    }

    /// Far end of the rung at arc `arc` (from `rep`) on the strip `slot`
    /// of the line, if a rung is attached there.
    pub fn rung_partner(&mut self, space: SpaceId, line: &LineThrough, slot: u32) -> Option<Point> {
        let s = line.arc - self.slot_shift(space, line.attachment, slot);
        let step = StripStep { attachment: line.attachment, line: line.rep.clone(), slot };
        let p_here = self.kind(space).period(line.attachment);
        if self.back_step(space).as_ref() == Some(&step) {
            let (parent, pstep) = self.spaces[space].parent.clone().expect("back step implies a parent");
            let p_there = self.kind(parent).period(pstep.attachment);
            let s2 = Self::rung_scale(p_here, p_there, s)?;
            let arc = s2 + self.slot_shift(parent, pstep.attachment, pstep.slot);
            let position = self.line_position(parent, &pstep.line, pstep.attachment, arc);
            return Some(Point { space: parent, position });
        }
        let target = self.kind(space).attachments[line.attachment].target;
        let p_there = self.model.kinds[target.0].period(target.1);
        let s2 = Self::rung_scale(p_here, p_there, s)?;
        let child = self.child(space, &step);
        let rep = Word::identity(self.kind(child).basis);
        let position = self.line_position(child, &rep, target.1, s2);
        Some(Point { space: child, position })
    }

    /// Horizontal unit neighbors within the point's own space.
    pub fn horizontal_neighbors(&self, p: &Point) -> Vec<Point> {
        let k = self.kind(p.space);
        let e = k.edge_length;
        let at = |position| Point { space: p.space, position };
        match &p.position {
            Position::Vertex(h) => k
                .basis
                .directions()
                .map(|x| {
                    let hx = h.mul(&unit(k.basis, x));
                    if e == 1 {
                        at(Position::Vertex(hx))
                    } else if x > 0 {
                        at(Position::Edge { from: h.clone(), generator: x, offset: 1 })
                    } else {
                        at(Position::Edge { from: hx, generator: -x, offset: e - 1 })
                    }
                })
                .collect(),
            Position::Edge { from, generator, offset } => {
                let along = |o: u32| {
                    if o == 0 {
                        Position::Vertex(from.clone())
                    } else if o == e {
                        Position::Vertex(from.mul(&unit(k.basis, *generator)))
                    } else {
                        Position::Edge { from: from.clone(), generator: *generator, offset: o }
                    }
                };
                vec![at(along(offset - 1)), at(along(offset + 1))]
            }
        }
    }

    pub fn neighbors(&mut self, p: &Point) -> Vec<(Point, EdgeKind)> {
        let mut out: Vec<_> = self.horizontal_neighbors(p).into_iter().map(|q| (q, EdgeKind::Horizontal)).collect();
        for line in self.lines_through(p.space, &p.position) {
            let m = self.kind(p.space).attachments[line.attachment].multiplicity;
            for slot in 0..m {
                if let Some(q) = self.rung_partner(p.space, &line, slot) {
                    out.push((q, EdgeKind::Vertical));
                }
            }
        }
        out
    }

    /// Breadth-first distances from `center`, truncated at `radius`.
    pub fn distances(&mut self, center: &Point, radius: u32, budget: usize) -> Result<HashMap<Point, u32>> {
        let mut dist = HashMap::from([(center.clone(), 0u32)]);
        let mut queue = VecDeque::from([center.clone()]);
        while let Some(p) = queue.pop_front() {
            let d = dist[&p];
            if d == radius {
                continue;
            }
            for (q, _) in self.neighbors(&p) {
                if !dist.contains_key(&q) {
                    if dist.len() >= budget {
                        return Err(Error::BudgetExceeded(format!("ball exploration passed {budget} points")));
                    }
                    dist.insert(q.clone(), d + 1);
                    queue.push_back(q);
                }
            }
        }
        Ok(dist)
    }

    pub fn ball(&mut self, center: &Point, radius: u32, budget: usize) -> Result<BassSerreBall> {
        let dist = self.distances(center, radius, budget)?;
        let mut points: Vec<(Point, u32)> = dist.into_iter().collect();
        points.sort_by(|a, b| (a.1, &a.0).cmp(&(b.1, &b.0)));
        let index: HashMap<&Point, usize> = points.iter().enumerate().map(|(i, (p, _))| (p, i)).collect();
        let mut edges = vec![];
        for (i, (p, _)) in points.iter().enumerate() {
            for (q, kind) in self.neighbors(p) {
                if let Some(&j) = index.get(&q) {
                    if i < j {
                        edges.push((i, j, kind));
                    }
                }
            }
        }
        Ok(BassSerreBall { radius, points, edges, complex: self.clone() })
    }

    /// Unit points of the geodesic between two points of one space.
    pub fn horizontal_path(&self, space: SpaceId, from: &Position, to: &Position) -> Vec<Position> {
        let k = self.kind(space);
        let e = k.edge_length;
        let basis = k.basis;
        if from == to {
            return vec![from.clone()];
        }
        if let (
            Position::Edge { from: f1, generator: g1, offset: o1 },
            Position::Edge { from: f2, generator: g2, offset: o2 },
        ) = (from, to)
        {
            if f1 == f2 && g1 == g2 {
                let step: i64 = if o2 > o1 { 1 } else { -1 };
                let mut out = vec![];
                let mut o = i64::from(*o1);
                loop {
                    out.push(Position::Edge { from: f1.clone(), generator: *g1, offset: o as u32 });
                    if o == i64::from(*o2) {
                        return out;
                    }
                    o += step;
                }
            }
        }
        // (anchor vertex, distance to it, unit points strictly between)
        let anchors = |p: &Position| -> Vec<(Word, u32, Vec<Position>)> {
            match p {
                Position::Vertex(h) => vec![(h.clone(), 0, vec![])],
                Position::Edge { from, generator, offset } => {
                    let to_from = (1..*offset)
                        .rev()
                        .map(|o| Position::Edge { from: from.clone(), generator: *generator, offset: o })
                        .collect();
                    let to_next = (offset + 1..e)
                        .map(|o| Position::Edge { from: from.clone(), generator: *generator, offset: o })
                        .collect();
                    vec![(from.clone(), *offset, to_from), (from.mul(&unit(basis, *generator)), e - offset, to_next)]
                }
            }
        };
        let (fa, ta) = (anchors(from), anchors(to));
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, (a, da, _)) in fa.iter().enumerate() {
            for (j, (b, db, _)) in ta.iter().enumerate() {
                let len = da + db + e * a.inverse().mul(b).len() as u32;
                if best.is_none_or(|(l, _, _)| len < l) {
                    best = Some((len, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("both points have anchors");
        let (a, _, lead) = &fa[i];
        let (b, _, trail) = &ta[j];
        let mut out = vec![from.clone()];
        out.extend(lead.iter().cloned());
        out.push(Position::Vertex(a.clone()));
        let mut cur = a.clone();
        for &x in a.inverse().mul(b).letters() {
            let next = cur.mul(&unit(basis, x));
            for o in 1..e {
                out.push(if x > 0 {
                    Position::Edge { from: cur.clone(), generator: x, offset: o }
                } else {
                    Position::Edge { from: next.clone(), generator: -x, offset: e - o }
                });
            }
            out.push(Position::Vertex(next.clone()));
            cur = next;
        }
        out.extend(trail.iter().rev().cloned());
        if out.last() != Some(to) {
            out.push(to.clone());
        }
        out.dedup();
        out
    }
}
