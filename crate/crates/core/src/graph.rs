//! Finite patches of minimal bipartite graphs, their quad-graphs and train tracks,
//! angle maps and the discrete Abel map.
//!
//! A patch is stored through its quad-graph: one quadrilateral per edge `wb`, with
//! corners `(b, f, w, f')` in counterclockwise order. The track `α` of a quad crosses
//! its sides `w f'` (entering) and `b f` (leaving); the track `β` crosses `f' b`
//! (entering) and `f w` (leaving). With these orientations black vertices lie on the
//! right of every track.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexKind {
    Black,
    White,
    Face,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadVertex {
    pub kind: VertexKind,
    pub label: String,
    pub position: Option<[f64; 2]>,
}

/// Which of the two tracks of a quad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Alpha,
    Beta,
}

/// One edge `wb` of the graph together with its quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Quad {
    pub b: usize,
    pub f: usize,
    pub w: usize,
    pub f_prime: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl Quad {
    /// Side `(from, to)` through which `role` enters and the side through which it leaves.
    fn sides(&self, role: Role) -> ((usize, usize), (usize, usize)) {
        match role {
            Role::Alpha => ((self.w, self.f_prime), (self.b, self.f)),
            Role::Beta => ((self.f_prime, self.b), (self.f, self.w)),
        }
    }

    pub fn track(&self, role: Role) -> usize {
        match role {
            Role::Alpha => self.alpha,
            Role::Beta => self.beta,
        }
    }

    fn corners(&self) -> [usize; 4] {
        [self.b, self.f, self.w, self.f_prime]
    }
}

/// An oriented train track: the quads it runs through from entry to exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub label: String,
    pub quads: Vec<(usize, Role)>,
    /// Position of the entering side in the boundary cycle.
    pub entry: usize,
    /// Position of the leaving side in the boundary cycle.
    pub exit: usize,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Quad-graph edge joining a primal vertex to a face, with the track crossing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadEdge {
    pub primal: usize,
    pub face: usize,
    pub track: usize,
}

#[derive(Debug, Clone)]
pub struct MinimalGraphPatch {
    vertices: Vec<QuadVertex>,
    quads: Vec<Quad>,
    tracks: Vec<Track>,
    /// Directed boundary sides in counterclockwise order.
    boundary: Vec<(usize, usize)>,
    on_boundary: Vec<bool>,
    /// Quad-graph edges incident to each vertex.
    incident: Vec<Vec<QuadEdge>>,
    /// Quads around each primal vertex.
    primal_quads: Vec<Vec<usize>>,
}

/// Raw quadrilateral for [`MinimalGraphPatch::from_quads`]: corners `(b, f, w, f')` in
/// counterclockwise order.
pub type RawQuad = [usize; 4];

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

impl MinimalGraphPatch {
    /// Assembles a patch from its quadrilaterals, traces the train tracks and verifies
    /// that the quad-graph is a disc and that the tracks satisfy the minimality rules.
    ///
    /// `label_track` names a traced track from its quads; tracks keep the order of their
    /// first quad.
    pub fn from_quads<F>(vertices: Vec<QuadVertex>, raw: &[RawQuad], label_track: F) -> Result<Self>
    where
        F: Fn(&[(usize, Role)], &[Quad], &[QuadVertex]) -> String,
    {
        if raw.is_empty() {
            return Err(Error::InvalidInput("patch has no edges".into()));
        }
        let n = vertices.len();
        for q in raw {
            let kinds = q.map(|v| vertices.get(v).map(|x| x.kind));
            if kinds
                != [
                    Some(VertexKind::Black),
                    Some(VertexKind::Face),
                    Some(VertexKind::White),
                    Some(VertexKind::Face),
                ]
            {
                return Err(Error::NotMinimal(format!(
                    "quad {q:?} is not of the form (black, face, white, face)"
                )));
            }
            if q[1] == q[3] {
                return Err(Error::NotMinimal(format!(
                    "edge {}–{} has the same face on both sides",
                    vertices[q[2]].label, vertices[q[0]].label
                )));
            }
        }
        let mut seen_edges = HashSet::new();
        for q in raw {
            if !seen_edges.insert((q[0], q[2])) {
                return Err(Error::NotMinimal(format!(
                    "multiple edge {}–{}",
                    vertices[q[2]].label, vertices[q[0]].label
                )));
            }
        }

        // directed sides; an interior side appears once in each direction
        let mut side_use: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, q) in raw.iter().enumerate() {
            for s in 0..4 {
                let d = (q[s], q[(s + 1) % 4]);
                if side_use.insert(d, k).is_some() {
                    return Err(Error::NotMinimal(format!(
                        "side {}→{} used twice with the same orientation",
                        vertices[d.0].label, vertices[d.1].label
                    )));
                }
            }
        }
        let mut boundary_next: HashMap<usize, usize> = HashMap::new();
        let mut boundary_count = 0;
        for (&(a, b), _) in side_use.iter() {
            if !side_use.contains_key(&(b, a)) {
                boundary_count += 1;
                if boundary_next.insert(a, b).is_some() {
                    return Err(Error::NotMinimal(format!(
                        "patch is pinched at {}",
                        vertices[a].label
                    )));
                }
            }
        }
        let start = *boundary_next
            .keys()
            .min()
            .ok_or_else(|| Error::NotMinimal("closed quad surface has no boundary".into()))?;
        let mut boundary = Vec::with_capacity(boundary_count);
        let mut v = start;
        loop {
            let nv = boundary_next[&v];
            boundary.push((v, nv));
            v = nv;
            if v == start {
                break;
            }
            if boundary.len() > boundary_count {
                break;
            }
        }
        if boundary.len() != boundary_count {
            return Err(Error::NotMinimal(
                "boundary of the quad-graph is not a single cycle".into(),
            ));
        }
        // Euler characteristic of a disc
        let used: HashSet<usize> = raw.iter().flatten().copied().collect();
        let n_edges = side_use.len() - (side_use.len() - boundary_count) / 2;
        let chi = used.len() as i64 - n_edges as i64 + raw.len() as i64;
        if chi != 1 {
            return Err(Error::NotMinimal(format!(
                "quad-graph has Euler characteristic {chi}, expected 1"
            )));
        }
        if used.len() != n {
            return Err(Error::NotMinimal("isolated vertex in patch".into()));
        }

        // trace tracks
        let mut quads: Vec<Quad> = raw
            .iter()
            .map(|q| Quad {
                b: q[0],
                f: q[1],
                w: q[2],
                f_prime: q[3],
                alpha: usize::MAX,
                beta: usize::MAX,
            })
            .collect();
        let mut boundary_pos: HashMap<(usize, usize), usize> = HashMap::new();
        for (k, &(a, b)) in boundary.iter().enumerate() {
            boundary_pos.insert(edge_key(a, b), k);
        }
        // quad on the far side of a directed side
        let across = |from: usize, to: usize| side_use.get(&(to, from)).copied();
        let mut traced: Vec<(Vec<(usize, Role)>, usize, usize)> = Vec::new();
        let mut visited: HashSet<(usize, Role)> = HashSet::new();
        let mut starts: Vec<(usize, usize, Role)> = Vec::new();
        for (k, q) in quads.iter().enumerate() {
            for role in [Role::Alpha, Role::Beta] {
                let (entry, _) = q.sides(role);
                if let Some(&pos) = boundary_pos.get(&edge_key(entry.0, entry.1)) {
                    starts.push((pos, k, role));
                }
            }
        }
        starts.sort();
        for (entry_pos, k0, role0) in starts {
            let mut path = Vec::new();
            let (mut k, mut role) = (k0, role0);
            let exit_pos = loop {
                if !visited.insert((k, role)) {
                    return Err(Error::NotMinimal("train track revisits a quad".into()));
                }
                path.push((k, role));
                let (_, exit) = quads[k].sides(role);
                match across(exit.0, exit.1) {
                    None => break boundary_pos[&edge_key(exit.0, exit.1)],
                    Some(next) => {
                        let nq = &quads[next];
                        role = if edge_key(nq.sides(Role::Alpha).0 .0, nq.sides(Role::Alpha).0 .1)
                            == edge_key(exit.0, exit.1)
                        {
                            Role::Alpha
                        } else if edge_key(nq.sides(Role::Beta).0 .0, nq.sides(Role::Beta).0 .1)
                            == edge_key(exit.0, exit.1)
                        {
                            Role::Beta
                        } else {
                            return Err(Error::NotMinimal(
                                "inconsistent track orientation between neighbouring quads".into(),
                            ));
                        };
                        k = next;
                    }
                }
            };
            traced.push((path, entry_pos, exit_pos));
        }
        if visited.len() != 2 * quads.len() {
            return Err(Error::NotMinimal("patch contains a closed train track".into()));
        }
        let mut tracks = Vec::with_capacity(traced.len());
        for (t, (path, entry, exit)) in traced.into_iter().enumerate() {
            for &(k, role) in &path {
                match role {
                    Role::Alpha => quads[k].alpha = t,
                    Role::Beta => quads[k].beta = t,
                }
            }
            tracks.push(Track {
                label: String::new(),
                quads: path,
                entry,
                exit,
            });
        }
        for t in tracks.iter_mut() {
            t.label = label_track(&t.quads, &quads, &vertices);
        }
        let mut labels = HashSet::new();
        for t in &tracks {
            if !labels.insert(t.label.clone()) {
                return Err(Error::NotMinimal(format!("track label {} used twice", t.label)));
            }
        }
        // minimality: no self-crossing, no two crossings in the same direction
        let mut crossings = HashSet::new();
        for q in &quads {
            if q.alpha == q.beta {
                return Err(Error::NotMinimal(format!(
                    "track {} crosses itself",
                    tracks[q.alpha].label
                )));
            }
            if !crossings.insert((q.alpha, q.beta)) {
                return Err(Error::NotMinimal(format!(
                    "tracks {} and {} cross twice in the same direction",
                    tracks[q.alpha].label, tracks[q.beta].label
                )));
            }
        }

        let mut on_boundary = vec![false; n];
        for &(a, _) in &boundary {
            on_boundary[a] = true;
        }
        let mut incident = vec![Vec::new(); n];
        let mut seen_qe = HashSet::new();
        let mut primal_quads = vec![Vec::new(); n];
        for (k, q) in quads.iter().enumerate() {
            primal_quads[q.b].push(k);
            primal_quads[q.w].push(k);
            for (p, f, t) in [
                (q.b, q.f, q.alpha),
                (q.w, q.f, q.beta),
                (q.w, q.f_prime, q.alpha),
                (q.b, q.f_prime, q.beta),
            ] {
                if seen_qe.insert((p, f)) {
                    let e = QuadEdge {
                        primal: p,
                        face: f,
                        track: t,
                    };
                    incident[p].push(e);
                    incident[f].push(e);
                }
            }
        }
        Ok(MinimalGraphPatch {
            vertices,
            quads,
            tracks,
            boundary,
            on_boundary,
            incident,
            primal_quads,
        })
    }

    pub fn vertices(&self) -> &[QuadVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> &QuadVertex {
        &self.vertices[v]
    }

    /// Index of the vertex with this label.
    pub fn find(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// The edges `wb` of the graph, one quad each.
    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn track_index(&self, label: &str) -> Option<usize> {
        self.tracks.iter().position(|t| t.label == label)
    }

    pub fn boundary(&self) -> &[(usize, usize)] {
        &self.boundary
    }

    pub fn is_interior(&self, v: usize) -> bool {
        !self.on_boundary[v]
    }

    pub fn of_kind(&self, kind: VertexKind) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&v| self.vertices[v].kind == kind)
            .collect()
    }

    pub fn blacks(&self) -> Vec<usize> {
        self.of_kind(VertexKind::Black)
    }

    pub fn whites(&self) -> Vec<usize> {
        self.of_kind(VertexKind::White)
    }

    pub fn faces(&self) -> Vec<usize> {
        self.of_kind(VertexKind::Face)
    }

    pub fn quad_edges(&self, v: usize) -> &[QuadEdge] {
        &self.incident[v]
    }

    /// Edges (quads) at a black or white vertex.
    pub fn edges_at(&self, v: usize) -> &[usize] {
        &self.primal_quads[v]
    }

    pub fn edge_between(&self, w: usize, b: usize) -> Option<usize> {
        self.primal_quads[w].iter().copied().find(|&k| self.quads[k].b == b)
    }

    /// Pairs of tracks crossing inside the patch.
    pub fn crossing_pairs(&self) -> HashSet<(usize, usize)> {
        self.quads
            .iter()
            .map(|q| (q.alpha.min(q.beta), q.alpha.max(q.beta)))
            .collect()
    }

    /// Tracks that do not cross inside the patch and whose exits (and entries) are
    /// adjacent among the four endpoints on the boundary circle.
    pub fn parallel(&self, s: usize, t: usize) -> bool {
        if s == t || self.crossing_pairs().contains(&(s.min(t), s.max(t))) {
            return false;
        }
        let mut pts = [
            (self.tracks[s].exit, true),
            (self.tracks[s].entry, false),
            (self.tracks[t].exit, true),
            (self.tracks[t].entry, false),
        ];
        pts.sort();
        // cyclic pattern exit,exit,entry,entry
        (0..4).any(|r| {
            pts[r].1 && pts[(r + 1) % 4].1 && !pts[(r + 2) % 4].1 && !pts[(r + 3) % 4].1
        })
    }

    /// Interior faces with the cyclic list of primal vertices around them.
    pub fn face_cycle(&self, f: usize) -> Vec<usize> {
        // quads around f in counterclockwise order, via their primal corners
        let around: Vec<&Quad> = self
            .quads
            .iter()
            .filter(|q| q.f == f || q.f_prime == f)
            .collect();
        // in a quad (b, f, w, f') seen from f the next primal vertex counterclockwise is w
        // when f is the `f` corner, and b when f is the `f'` corner
        let mut next: HashMap<usize, usize> = HashMap::new();
        for q in &around {
            if q.f == f {
                next.insert(q.b, q.w);
            } else {
                next.insert(q.w, q.b);
            }
        }
        let Some(&start) = next.keys().min() else {
            return Vec::new();
        };
        let mut cyc = vec![start];
        let mut v = start;
        while let Some(&nv) = next.get(&v) {
            if nv == start || cyc.len() > next.len() {
                break;
            }
            cyc.push(nv);
            v = nv;
        }
        cyc
    }

    /// Quad-graph shortest path between two vertices (breadth first, deterministic).
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut prev = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        prev[from] = from;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for e in &self.incident[v] {
                let u = if e.primal == v { e.face } else { e.primal };
                if prev[u] == usize::MAX {
                    prev[u] = v;
                    queue.push_back(u);
                }
            }
        }
        if prev[to] == usize::MAX {
            return None;
        }
        let mut p = vec![to];
        let mut v = to;
        while v != from {
            v = prev[v];
            p.push(v);
        }
        p.reverse();
        Some(p)
    }

    /// Track crossing the quad-graph edge `{x, y}`, if it is one.
    pub fn crossing_track(&self, x: usize, y: usize) -> Option<usize> {
        self.incident[x]
            .iter()
            .find(|e| (e.primal == x && e.face == y) || (e.primal == y && e.face == x))
            .map(|e| e.track)
    }
}

fn broadcast(list: &[f64], n: usize, what: &str) -> Result<Vec<f64>> {
    if list.len() == 1 {
        Ok(vec![list[0]; n])
    } else if list.len() == n {
        Ok(list.to_vec())
    } else {
        Err(Error::InvalidInput(format!(
            "{what}: {} angles given for {n} tracks",
            list.len()
        )))
    }
}

fn check_monotone(list: &[f64], what: &str) -> Result<()> {
    if list.iter().any(|x| x.is_nan()) {
        return Err(Error::InvalidInput(format!("{what}: NaN angle")));
    }
    if list.len() > 1 && list.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput(format!(
            "{what}: angles must be strictly increasing"
        )));
    }
    Ok(())
}

fn check_crossing_distinct(patch: &MinimalGraphPatch, angles: &AngleMap) -> Result<()> {
    for (s, t) in patch.crossing_pairs() {
        if same_angle(angles.angle[s], angles.angle[t]) {
            return Err(Error::AngleMap(format!(
                "crossing tracks {} and {} share the angle {}",
                patch.tracks[s].label, patch.tracks[t].label, angles.angle[s]
            )));
        }
    }
    Ok(())
}

fn same_angle(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || a == b
}

fn position_ccw(pos: &[[f64; 2]], corners: &mut [usize; 4], black_first: usize) {
    let cx = corners.iter().map(|&v| pos[v][0]).sum::<f64>() / 4.0;
    let cy = corners.iter().map(|&v| pos[v][1]).sum::<f64>() / 4.0;
    corners.sort_by(|&a, &b| {
        let ta = (pos[a][1] - cy).atan2(pos[a][0] - cx);
        let tb = (pos[b][1] - cy).atan2(pos[b][0] - cx);
        ta.partial_cmp(&tb).unwrap()
    });
    let r = corners.iter().position(|&v| v == black_first).unwrap();
    corners.rotate_left(r);
}

/// Square-lattice patch with the quad-graph on the integer grid `[0, width] × [0, height]`.
///
/// Grid point `(i, j)` is a primal vertex when `i + j` is even (black for even `i`) and a
/// face otherwise; the quads are the unit squares. Column track `V{i}` runs through the
/// squares `[i, i+1] × ·`, row track `H{j}` through `· × [j, j+1]`. Each angle list holds
/// one angle for all tracks of the family or one per track, strictly increasing.
pub fn build_square_patch(
    width: usize,
    height: usize,
    vertical: &[f64],
    horizontal: &[f64],
) -> Result<(MinimalGraphPatch, AngleMap)> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidInput("square patch needs positive width and height".into()));
    }
    check_monotone(vertical, "vertical tracks")?;
    check_monotone(horizontal, "horizontal tracks")?;
    let v_angles = broadcast(vertical, width, "vertical tracks")?;
    let h_angles = broadcast(horizontal, height, "horizontal tracks")?;
    let idx = |i: usize, j: usize| i * (height + 1) + j;
    let mut vertices = Vec::new();
    let mut pos = Vec::new();
    for i in 0..=width {
        for j in 0..=height {
            let (kind, tag) = if (i + j) % 2 == 1 {
                (VertexKind::Face, "F")
            } else if i % 2 == 0 {
                (VertexKind::Black, "B")
            } else {
                (VertexKind::White, "W")
            };
            vertices.push(QuadVertex {
                kind,
                label: format!("{tag}({i},{j})"),
                position: Some([i as f64, j as f64]),
            });
            pos.push([i as f64, j as f64]);
        }
    }
    let mut raw = Vec::new();
    for i in 0..width {
        for j in 0..height {
            let mut c = [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)];
            let b = *c.iter().find(|&&v| vertices[v].kind == VertexKind::Black).unwrap();
            position_ccw(&pos, &mut c, b);
            raw.push(c);
        }
    }
    let patch = MinimalGraphPatch::from_quads(vertices, &raw, |path, quads, verts| {
        let (k, role) = path[0];
        let ((a, b), _) = quads[k].sides(role);
        let (pa, pb) = (verts[a].position.unwrap(), verts[b].position.unwrap());
        if pa[1] == pb[1] {
            format!("V{}", pa[0].min(pb[0]) as usize)
        } else {
            format!("H{}", pa[1].min(pb[1]) as usize)
        }
    })?;
    let mut angle = vec![0.0; patch.tracks.len()];
    for (t, track) in patch.tracks.iter().enumerate() {
        let n: usize = track.label[1..].parse().unwrap();
        angle[t] = if track.label.starts_with('V') {
            v_angles[n]
        } else {
            h_angles[n]
        };
    }
    let angles = AngleMap::principal(angle);
    check_crossing_distinct(&patch, &angles)?;
    Ok((patch, angles))
}

/// Angles for a square patch that respect the cyclic order of the four track
/// directions: rows leaving east, columns leaving north, rows leaving west, columns
/// leaving south, in four disjoint arcs of increasing values.
pub fn square_default_angles(patch: &MinimalGraphPatch) -> AngleMap {
    let arcs = [(-2.0, -1.5), (-0.5, 0.0), (0.5, 1.0), (1.5, 2.5)];
    let mut members: [Vec<usize>; 4] = Default::default();
    for (t, tr) in patch.tracks.iter().enumerate() {
        let (k, role) = *tr.quads.last().unwrap();
        let (_, (a, b)) = patch.quads[k].sides(role);
        let (pa, pb) = (
            patch.vertices[a].position.unwrap(),
            patch.vertices[b].position.unwrap(),
        );
        let (mx, my) = ((pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0);
        let (k0, k1) = patch.quads[tr.quads[0].0]
            .corners()
            .iter()
            .fold((0.0, 0.0), |acc, &v| {
                let p = patch.vertices[v].position.unwrap();
                (acc.0 + p[0] / 4.0, acc.1 + p[1] / 4.0)
            });
        let (dx, dy) = (mx - k0, my - k1);
        let class = if dx.abs() > dy.abs() {
            if dx > 0.0 {
                0
            } else {
                2
            }
        } else if dy > 0.0 {
            1
        } else {
            3
        };
        members[class].push(t);
    }
    let mut angle = vec![0.0; patch.tracks.len()];
    for (class, ts) in members.iter().enumerate() {
        let (lo, hi) = arcs[class];
        let n = ts.len().max(1) as f64;
        for (r, &t) in ts.iter().enumerate() {
            angle[t] = lo + (hi - lo) * (r as f64 + 0.5) / n;
        }
    }
    AngleMap::principal(angle)
}

/// Honeycomb patch around the black vertices `B(a, b)`, `0 ≤ a < n1`, `0 ≤ b < n2`,
/// with all their edges.
///
/// Faces sit on the triangular lattice `F(a, b) = a·e₁ + b·e₂`; `B(a, b)` and `W(a, b)` are
/// the centroids of the up and down triangles based at `F(a, b)`. Tracks fall into three
/// families by the direction from black vertex to face across the sides they cross
/// (pointing at angles −30°, 90° and 210°); each family takes one angle or a strictly
/// increasing list ordered along the family's transverse direction.
pub fn build_honeycomb_patch(
    n1: usize,
    n2: usize,
    families: [&[f64]; 3],
) -> Result<(MinimalGraphPatch, AngleMap)> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidInput("honeycomb patch needs positive size".into()));
    }
    for (k, fam) in families.iter().enumerate() {
        check_monotone(fam, &format!("track family {k}"))?;
    }
    let e1 = [1.0, 0.0];
    let e2 = [0.5, 3f64.sqrt() / 2.0];
    let face_pos = |a: i64, b: i64| [a as f64 * e1[0] + b as f64 * e2[0], b as f64 * e2[1]];
    let mut index: BTreeMap<(u8, i64, i64), usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut pos = Vec::new();
    let mut get = |kind: u8, a: i64, b: i64, vertices: &mut Vec<QuadVertex>, pos: &mut Vec<[f64; 2]>| {
        *index.entry((kind, a, b)).or_insert_with(|| {
            let f = face_pos(a, b);
            let (vk, tag, p) = match kind {
                0 => (VertexKind::Face, "F", f),
                1 => (
                    VertexKind::Black,
                    "B",
                    [f[0] + (e1[0] + e2[0]) / 3.0, f[1] + (e1[1] + e2[1]) / 3.0],
                ),
                _ => (
                    VertexKind::White,
                    "W",
                    [f[0] + 2.0 * (e1[0] + e2[0]) / 3.0, f[1] + 2.0 * (e1[1] + e2[1]) / 3.0],
                ),
            };
            vertices.push(QuadVertex {
                kind: vk,
                label: format!("{tag}({a},{b})"),
                position: Some(p),
            });
            pos.push(p);
            vertices.len() - 1
        })
    };
    let mut raw = Vec::new();
    for a in 0..n1 as i64 {
        for b in 0..n2 as i64 {
            let bv = get(1, a, b, &mut vertices, &mut pos);
            let edges = [
                ((a, b), (a + 1, b), (a, b + 1)),
                ((a - 1, b), (a, b), (a, b + 1)),
                ((a, b - 1), (a, b), (a + 1, b)),
            ];
            for ((wa, wb), f1, f2) in edges {
                let wv = get(2, wa, wb, &mut vertices, &mut pos);
                let fv1 = get(0, f1.0, f1.1, &mut vertices, &mut pos);
                let fv2 = get(0, f2.0, f2.1, &mut vertices, &mut pos);
                let mut c = [bv, fv1, wv, fv2];
                position_ccw(&pos, &mut c, bv);
                raw.push(c);
            }
        }
    }
    let direction = |quads: &[Quad], verts: &[QuadVertex], k: usize, role: Role| -> [f64; 2] {
        let q = quads[k];
        let f = if role == Role::Alpha { q.f } else { q.f_prime };
        let (pb, pf) = (verts[q.b].position.unwrap(), verts[f].position.unwrap());
        [pf[0] - pb[0], pf[1] - pb[1]]
    };
    let family_of = |d: [f64; 2]| -> usize {
        let deg = d[1].atan2(d[0]).to_degrees();
        let deg = if deg < -60.0 { deg + 360.0 } else { deg };
        // −30° → 0, 90° → 1, 210° → 2
        ((deg + 30.0) / 120.0).round() as usize % 3
    };
    let patch = MinimalGraphPatch::from_quads(vertices, &raw, |path, quads, verts| {
        let (k, role) = path[0];
        let d = direction(quads, verts, k, role);
        let fam = family_of(d);
        // transverse coordinate of the first crossed side
        let ((a, b), _) = quads[k].sides(role);
        let (pa, pb) = (verts[a].position.unwrap(), verts[b].position.unwrap());
        let m = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0];
        let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let s = (m[0] * d[0] + m[1] * d[1]) / norm;
        format!("T{fam}:{:.0}", (s * 6.0).round())
    })?;
    let mut by_family: [Vec<(i64, usize)>; 3] = Default::default();
    for (t, tr) in patch.tracks.iter().enumerate() {
        let (fam, s) = tr.label[1..].split_once(':').unwrap();
        by_family[fam.parse::<usize>().unwrap()].push((s.parse().unwrap(), t));
    }
    let mut angle = vec![0.0; patch.tracks.len()];
    for (fam, members) in by_family.iter_mut().enumerate() {
        members.sort();
        let list = broadcast(families[fam], members.len(), &format!("track family {fam}"))?;
        for (r, &(_, t)) in members.iter().enumerate() {
            angle[t] = list[r];
        }
    }
    let angles = AngleMap::principal(angle);
    check_crossing_distinct(&patch, &angles)?;
    Ok((patch, angles))
}

/// Header line of the custom patch format.
pub const CUSTOM_HEADER: &str = "genus-agnostic minimal-graph v1";

/// Reads a patch in the text format
///
/// ```text
/// genus-agnostic minimal-graph v1
/// B <id>
/// W <id>
/// E <w-id> <b-id> <track1-id> <track2-id>
/// T <track-id> <angle> <lifted-angle>
/// ```
///
/// For an edge `E w b t1 t2`, `t1` is the track separating `b` from the face on the left
/// of the edge directed from `w` to `b`, and `t2` the other one. Faces are derived from
/// the track labels. Blank lines and lines starting with `#` are ignored.
pub fn parse_custom_patch(text: &str) -> Result<(MinimalGraphPatch, AngleMap)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, h)) if h == CUSTOM_HEADER => {}
        Some((n, _)) => {
            return Err(Error::Parse {
                line: n,
                msg: format!("expected header `{CUSTOM_HEADER}`"),
            })
        }
        None => return Err(Error::Parse { line: 0, msg: "empty file".into() }),
    }
    let mut vertices: Vec<QuadVertex> = Vec::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(usize, usize, String, String, usize)> = Vec::new();
    let mut track_angles: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for (n, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let err = |msg: String| Error::Parse { line: n, msg };
        match parts.as_slice() {
            [kind @ ("B" | "W"), id] => {
                let key = format!("{kind} {id}");
                if ids.contains_key(&key) {
                    return Err(err(format!("vertex {id} declared twice")));
                }
                ids.insert(key, vertices.len());
                vertices.push(QuadVertex {
                    kind: if *kind == "B" {
                        VertexKind::Black
                    } else {
                        VertexKind::White
                    },
                    label: id.to_string(),
                    position: None,
                });
            }
            ["E", w, b, t1, t2] => {
                let wv = *ids
                    .get(&format!("W {w}"))
                    .ok_or_else(|| err(format!("unknown white vertex {w}")))?;
                let bv = *ids
                    .get(&format!("B {b}"))
                    .ok_or_else(|| err(format!("unknown black vertex {b}")))?;
                if t1 == t2 {
                    return Err(err("an edge needs two distinct tracks".into()));
                }
                edges.push((wv, bv, t1.to_string(), t2.to_string(), n));
            }
            ["T", id, angle, lifted] => {
                let a = parse_extended(angle).map_err(|m| err(m))?;
                let l: f64 = lifted
                    .parse()
                    .map_err(|_| err(format!("bad lifted angle `{lifted}`")))?;
                if !l.is_finite() {
                    return Err(err("lifted angle must be finite".into()));
                }
                if track_angles.insert(id.to_string(), (a, l, n)).is_some() {
                    return Err(err(format!("track {id} declared twice")));
                }
            }
            _ => return Err(err(format!("unrecognised line `{line}`"))),
        }
    }
    if edges.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no edges".into() });
    }
    // faces: classes of (primal vertex, track) sides
    let mut side_ids: HashMap<(usize, String), usize> = HashMap::new();
    let mut side_of = |v: usize, t: &str| -> usize {
        let n = side_ids.len();
        *side_ids.entry((v, t.to_string())).or_insert(n)
    };
    let mut pairs = Vec::new();
    for (w, b, t1, t2, _) in &edges {
        let f = (side_of(*b, t1), side_of(*w, t2));
        let fp = (side_of(*w, t1), side_of(*b, t2));
        pairs.push((f, fp));
    }
    let mut uf = UnionFind::new(side_ids.len());
    for &((a, b), (c, d)) in &pairs {
        uf.union(a, b);
        uf.union(c, d);
    }
    let mut face_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut raw = Vec::new();
    let mut edge_labels: HashMap<(usize, Role), String> = HashMap::new();
    for (k, ((w, b, t1, t2, _), ((a, _), (c, _)))) in edges.iter().zip(&pairs).enumerate() {
        let mut face = |s: usize, vertices: &mut Vec<QuadVertex>| -> usize {
            let r = uf.find(s);
            *face_of_root.entry(r).or_insert_with(|| {
                vertices.push(QuadVertex {
                    kind: VertexKind::Face,
                    label: format!("f{r}"),
                    position: None,
                });
                vertices.len() - 1
            })
        };
        let f = face(*a, &mut vertices);
        let fp = face(*c, &mut vertices);
        raw.push([*b, f, *w, fp]);
        edge_labels.insert((k, Role::Alpha), t1.clone());
        edge_labels.insert((k, Role::Beta), t2.clone());
    }
    let conflict = std::cell::RefCell::new(None);
    let patch = MinimalGraphPatch::from_quads(vertices, &raw, |path, _, _| {
        let first = &edge_labels[&path[0]];
        for p in path {
            if &edge_labels[p] != first {
                conflict.replace(Some(format!(
                    "track {first} continues as {} through the quad-graph",
                    edge_labels[p]
                )));
            }
        }
        first.clone()
    })?;
    if let Some(msg) = conflict.into_inner() {
        return Err(Error::NotMinimal(msg));
    }
    let mut angle = Vec::with_capacity(patch.tracks.len());
    let mut lifted = Vec::with_capacity(patch.tracks.len());
    for t in &patch.tracks {
        let &(a, l, _) = track_angles.get(&t.label).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("track {} has no T line", t.label),
        })?;
        angle.push(a);
        lifted.push(l);
    }
    for (id, &(_, _, n)) in &track_angles {
        if patch.track_index(id).is_none() {
            return Err(Error::Parse {
                line: n,
                msg: format!("track {id} crosses no edge"),
            });
        }
    }
    let angles = AngleMap::new(angle, lifted)?;
    check_crossing_distinct(&patch, &angles)?;
    Ok((patch, angles))
}

fn parse_extended(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "+inf" | "-inf" | "Inf" | "infinity" => Ok(f64::INFINITY),
        _ => {
            let v: f64 = s.parse().map_err(|_| format!("bad angle `{s}`"))?;
            if v.is_nan() {
                Err("angle is NaN".into())
            } else {
                Ok(v)
            }
        }
    }
}

/// Position of an extended real on the circle `R ∪ {∞}`, as a number in `[0, 1)`.
pub fn circle_position(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        0.5 + x.atan() / PI
    }
}

/// Angles of the tracks on `R ∪ {∞}` (infinite values stand for `∞`) and their lifts.
///
/// A lift differs from [`circle_position`] of its angle by an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleMap {
    pub angle: Vec<f64>,
    pub lifted: Vec<f64>,
}

impl AngleMap {
    pub fn new(angle: Vec<f64>, lifted: Vec<f64>) -> Result<Self> {
        if angle.len() != lifted.len() {
            return Err(Error::AngleMap("angle and lift lists differ in length".into()));
        }
        for (k, (&a, &l)) in angle.iter().zip(&lifted).enumerate() {
            if a.is_nan() {
                return Err(Error::AngleMap(format!("track {k} has a NaN angle")));
            }
            let d = l - circle_position(a);
            if (d - d.round()).abs() > 1e-9 {
                return Err(Error::AngleMap(format!(
                    "lift {l} of track {k} does not project to angle {a}"
                )));
            }
        }
        Ok(AngleMap { angle, lifted })
    }

    /// Angles with their principal lifts in `[0, 1)`.
    pub fn principal(angle: Vec<f64>) -> Self {
        let lifted = angle.iter().map(|&a| circle_position(a)).collect();
        AngleMap { angle, lifted }
    }

    /// Integer number of turns of each lift relative to the principal one.
    pub fn winding(&self, t: usize) -> i64 {
        (self.lifted[t] - circle_position(self.angle[t])).round() as i64
    }
}

/// Outcome of [`check_angle_map`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngleReport {
    pub pass: bool,
    /// Crossing or otherwise non-parallel tracks with equal angles.
    pub equal_pairs: Vec<(String, String)>,
    /// Pairwise non-parallel triples, in exit order, whose angles are not in
    /// counterclockwise (increasing) cyclic order.
    pub violating_triples: Vec<(String, String, String)>,
    pub triples_checked: usize,
}

impl fmt::Display for AngleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} triples checked, {} violations, {} equal pairs",
            if self.pass { "pass" } else { "fail" },
            self.triples_checked,
            self.violating_triples.len(),
            self.equal_pairs.len()
        )
    }
}

/// Whether `a, b, c` lie on the circle in strictly increasing cyclic order.
fn cyclically_increasing(a: f64, b: f64, c: f64) -> bool {
    let (a, b, c) = (circle_position(a), circle_position(b), circle_position(c));
    (a < b && b < c) || (b < c && c < a) || (c < a && a < b)
}

/// Compares the cyclic order of track angles with the order of track exits on the
/// boundary of the patch.
pub fn check_angle_map(patch: &MinimalGraphPatch, angles: &AngleMap) -> AngleReport {
    let n = patch.tracks.len();
    let mut report = AngleReport::default();
    if angles.angle.len() != n {
        report.equal_pairs.push(("angle map".into(), "track count".into()));
        return report;
    }
    let mut par = vec![vec![false; n]; n];
    for s in 0..n {
        for t in (s + 1)..n {
            let p = patch.parallel(s, t);
            par[s][t] = p;
            par[t][s] = p;
            if !p && same_angle(angles.angle[s], angles.angle[t]) {
                report
                    .equal_pairs
                    .push((patch.tracks[s].label.clone(), patch.tracks[t].label.clone()));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&t| patch.tracks[t].exit);
    for x in 0..n {
        for y in (x + 1)..n {
            if par[order[x]][order[y]] {
                continue;
            }
            for z in (y + 1)..n {
                let (a, b, c) = (order[x], order[y], order[z]);
                if par[a][c] || par[b][c] {
                    continue;
                }
                report.triples_checked += 1;
                let (ta, tb, tc) = (angles.angle[a], angles.angle[b], angles.angle[c]);
                if same_angle(ta, tb) || same_angle(tb, tc) || same_angle(ta, tc) {
                    continue;
                }
                if !cyclically_increasing(ta, tb, tc) {
                    report.violating_triples.push((
                        patch.tracks[a].label.clone(),
                        patch.tracks[b].label.clone(),
                        patch.tracks[c].label.clone(),
                    ));
                }
            }
        }
    }
    report.pass = report.equal_pairs.is_empty() && report.violating_triples.is_empty();
    report
}

/// Formal sum of lifted track angles, keyed by track index.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct AngleDivisor(pub BTreeMap<usize, i32>);

impl AngleDivisor {
    pub fn degree(&self) -> i32 {
        self.0.values().sum()
    }

    pub fn add(&mut self, t: usize, m: i32) {
        let e = self.0.entry(t).or_insert(0);
        *e += m;
        if *e == 0 {
            self.0.remove(&t);
        }
    }

    pub fn plus(&self, other: &AngleDivisor, sign: i32) -> AngleDivisor {
        let mut d = self.clone();
        for (&t, &m) in &other.0 {
            d.add(t, sign * m);
        }
        d
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// The lifted discrete Abel map of a patch, based at a face with value zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteAbelMap {
    pub base: usize,
    pub values: Vec<AngleDivisor>,
}

impl DiscreteAbelMap {
    pub fn get(&self, v: usize) -> &AngleDivisor {
        &self.values[v]
    }

    /// The same map based at another face.
    pub fn rebased(&self, face: usize) -> DiscreteAbelMap {
        let shift = self.values[face].clone();
        DiscreteAbelMap {
            base: face,
            values: self.values.iter().map(|d| d.plus(&shift, -1)).collect(),
        }
    }
}

/// Expected degree of the discrete Abel map on each vertex kind.
pub fn abel_degree(kind: VertexKind) -> i32 {
    match kind {
        VertexKind::Black => 1,
        VertexKind::Face => 0,
        VertexKind::White => -1,
    }
}

/// Builds the discrete Abel map from `base` by the local rules
/// `d(b) = d(f) + α` and `d(w) = d(f) − β` across quad-graph edges, then verifies every
/// quad-graph edge.
pub fn discrete_abel(patch: &MinimalGraphPatch, base: usize) -> Result<DiscreteAbelMap> {
    if patch.vertices.get(base).map(|v| v.kind) != Some(VertexKind::Face) {
        return Err(Error::InvalidInput("discrete Abel map must be based at a face".into()));
    }
    let n = patch.vertices.len();
    let mut values: Vec<Option<AngleDivisor>> = vec![None; n];
    values[base] = Some(AngleDivisor::default());
    let mut queue = std::collections::VecDeque::from([base]);
    let step = |e: &QuadEdge| -> i32 {
        if patch.vertices[e.primal].kind == VertexKind::Black {
            1
        } else {
            -1
        }
    };
    while let Some(v) = queue.pop_front() {
        let dv = values[v].clone().unwrap();
        for e in &patch.incident[v] {
            let (u, sign) = if e.face == v {
                (e.primal, step(e))
            } else {
                (e.face, -step(e))
            };
            if values[u].is_none() {
                let mut du = dv.clone();
                du.add(e.track, sign);
                values[u] = Some(du);
                queue.push_back(u);
            }
        }
    }
    let values: Vec<AngleDivisor> = values
        .into_iter()
        .map(|v| v.ok_or_else(|| Error::InvalidInput("patch is not connected".into())))
        .collect::<Result<_>>()?;
    for (k, q) in patch.quads.iter().enumerate() {
        for (p, f, t) in [
            (q.b, q.f, q.alpha),
            (q.w, q.f, q.beta),
            (q.w, q.f_prime, q.alpha),
            (q.b, q.f_prime, q.beta),
        ] {
            let sign = if p == q.b { 1 } else { -1 };
            let mut expected = values[f].clone();
            expected.add(t, sign);
            if expected != values[p] {
                return Err(Error::AbelInconsistent(k));
            }
        }
    }
    Ok(DiscreteAbelMap { base, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_square_patch_counts() {
        let (p, _) = build_square_patch(2, 2, &[0.0], &[1.0]).unwrap();
        assert_eq!(p.tracks().len(), 4);
        assert_eq!(p.quads().len(), 4);
        assert_eq!(p.faces().len(), 4);
        assert!(build_square_patch(0, 3, &[0.0], &[1.0]).is_err());
    }

    #[test]
    fn square_rejects_bad_angles() {
        assert!(build_square_patch(3, 3, &[0.0, 2.0, 1.0], &[5.0]).is_err());
        assert!(build_square_patch(3, 3, &[0.0], &[0.0]).is_err());
        assert!(build_square_patch(3, 3, &[0.0, 1.0], &[5.0]).is_err());
    }

    #[test]
    fn square_tracks_keep_black_on_the_right() {
        let (p, _) = build_square_patch(4, 3, &[0.0], &[1.0]).unwrap();
        for q in p.quads() {
            for role in [Role::Alpha, Role::Beta] {
                let ((a, b), (c, d)) = q.sides(role);
                let pos = |v: usize| p.vertex(v).position.unwrap();
                let mid = |x: usize, y: usize| {
                    [(pos(x)[0] + pos(y)[0]) / 2.0, (pos(x)[1] + pos(y)[1]) / 2.0]
                };
                let (m0, m1) = (mid(a, b), mid(c, d));
                let dir = [m1[0] - m0[0], m1[1] - m0[1]];
                let rb = [pos(q.b)[0] - m0[0], pos(q.b)[1] - m0[1]];
                assert!(dir[0] * rb[1] - dir[1] * rb[0] < 0.0);
            }
        }
    }

    #[test]
    fn discrete_abel_rules_and_degrees() {
        let (p, _) = build_square_patch(4, 4, &[0.0], &[1.0]).unwrap();
        let f0 = p.find("F(1,2)").unwrap();
        let d = discrete_abel(&p, f0).unwrap();
        assert!(d.get(f0).is_empty());
        for (v, x) in p.vertices().iter().enumerate() {
            assert_eq!(d.get(v).degree(), abel_degree(x.kind));
        }
        let q = p.quads().iter().find(|q| q.f == f0).unwrap();
        assert_eq!(d.get(q.b).0, BTreeMap::from([(q.alpha, 1)]));
        let mut fp = AngleDivisor::default();
        fp.add(q.alpha, 1);
        fp.add(q.beta, -1);
        assert_eq!(d.get(q.f_prime), &fp);
        let f1 = p.find("F(3,2)").unwrap();
        let r = d.rebased(f1);
        assert!(r.get(f1).is_empty());
        assert_eq!(r, discrete_abel(&p, f1).unwrap());
    }

    #[test]
    fn default_square_angles_pass_the_check() {
        let (p, _) = build_square_patch(6, 6, &[0.0], &[10.0]).unwrap();
        let a = square_default_angles(&p);
        let r = check_angle_map(&p, &a);
        assert!(r.pass, "{r} {:?}", r.violating_triples.first());
        assert!(r.triples_checked > 0);
    }

    #[test]
    fn equal_crossing_angles_are_reported() {
        let (p, mut a) = build_square_patch(2, 2, &[0.0, 1.0], &[2.0, 3.0]).unwrap();
        let v0 = p.track_index("V0").unwrap();
        let h0 = p.track_index("H0").unwrap();
        a.angle[h0] = a.angle[v0];
        let r = check_angle_map(&p, &a);
        assert!(!r.pass);
        assert!(!r.equal_pairs.is_empty());
    }

    #[test]
    fn honeycomb_single_star() {
        let (p, _) = build_honeycomb_patch(1, 1, [&[0.0], &[1.0], &[2.0]]).unwrap();
        assert_eq!(p.tracks().len(), 3);
        assert_eq!(p.quads().len(), 3);
        let d = discrete_abel(&p, p.faces()[0]).unwrap();
        for (v, x) in p.vertices().iter().enumerate() {
            assert_eq!(d.get(v).degree(), abel_degree(x.kind));
        }
        assert!(build_honeycomb_patch(1, 1, [&[0.0], &[0.0], &[2.0]]).is_err());
    }

    #[test]
    fn honeycomb_larger_patch_is_minimal() {
        let (p, a) = build_honeycomb_patch(4, 4, [&[-1.0], &[0.5], &[3.0]]).unwrap();
        assert_eq!(p.quads().len(), 48);
        discrete_abel(&p, p.faces()[0]).unwrap();
        assert_eq!(a.angle.len(), p.tracks().len());
    }

    #[test]
    fn custom_round_trip_of_a_square_patch() {
        let (p, _) = build_square_patch(3, 3, &[0.0], &[10.0]).unwrap();
        let a = {
            let d = square_default_angles(&p);
            AngleMap { angle: d.angle, lifted: d.lifted.iter().map(|l| l + 1.0).collect() }
        };
        let mut text = String::from(CUSTOM_HEADER);
        text.push('\n');
        for b in p.blacks() {
            text += &format!("B {}\n", p.vertex(b).label);
        }
        for w in p.whites() {
            text += &format!("W {}\n", p.vertex(w).label);
        }
        for q in p.quads() {
            text += &format!(
                "E {} {} {} {}\n",
                p.vertex(q.w).label,
                p.vertex(q.b).label,
                p.tracks()[q.alpha].label,
                p.tracks()[q.beta].label
            );
        }
        for (t, tr) in p.tracks().iter().enumerate() {
            text += &format!("T {} {} {}\n", tr.label, a.angle[t], a.lifted[t]);
        }
        let (p2, a2) = parse_custom_patch(&text).unwrap();
        assert_eq!(p2.quads().len(), p.quads().len());
        assert_eq!(p2.faces().len(), p.faces().len());
        assert_eq!(p2.tracks().len(), p.tracks().len());
        for (t, tr) in p2.tracks().iter().enumerate() {
            let t0 = p.track_index(&tr.label).unwrap();
            assert_eq!(a2.angle[t], a.angle[t0]);
            assert_eq!(tr.quads.len(), p.tracks()[t0].quads.len());
        }
        assert!(check_angle_map(&p2, &a2).pass);
    }

    #[test]
    fn custom_parse_errors_carry_line_numbers() {
        let text = format!("{CUSTOM_HEADER}\nB b0\nW w0\nE w0 b1 x y\n");
        match parse_custom_patch(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_custom_patch("nonsense"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn lifts_must_project_to_angles() {
        assert!(AngleMap::new(vec![0.0], vec![1.5]).is_ok());
        assert!(AngleMap::new(vec![0.0], vec![1.25]).is_err());
        assert!(AngleMap::new(vec![f64::INFINITY], vec![-2.0]).is_ok());
    }
}
