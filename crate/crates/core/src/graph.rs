//! Undirected multigraphs with connectivity analysis.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Multigraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub vertices: Vec<usize>,
    pub edge_count: usize,
    pub two_connected: bool,
    pub isolated_edge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphReport {
    /// Components over non-isolated vertices, ordered by their least vertex.
    pub components: Vec<ComponentReport>,
    pub cut_vertices: Vec<usize>,
    /// Per vertex, index of its component or `None` when it has no edges.
    pub component_of: Vec<Option<usize>>,
}

impl GraphReport {
    pub fn isolated_edges(&self) -> impl Iterator<Item = &ComponentReport> {
        self.components.iter().filter(|c| c.isolated_edge)
    }

    pub fn all_isolated_edges(&self) -> bool {
        self.components.iter().all(|c| c.isolated_edge)
    }

    /// Every component is 2-connected.
    pub fn has_two_connected_components(&self) -> bool {
        self.components.iter().all(|c| c.two_connected)
    }
}

impl Multigraph {
    pub fn new(vertex_count: usize) -> Self {
        Multigraph { vertex_count, edges: Vec::new() }
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> usize {
        self.edges.push((u, v));
        self.edges.len() - 1
    }

    /// Adjacency lists of `(neighbor, edge id)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for (id, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push((v, id));
            if u != v {
                adj[v].push((u, id));
            }
        }
        adj
    }

    pub fn degree(&self, x: usize) -> usize {
        self.edges.iter().map(|&(u, v)| usize::from(u == x) + usize::from(v == x)).sum()
    }

    pub fn analyze(&self) -> GraphReport {
        let adj = self.adjacency();
        let n = self.vertex_count;
        let mut component_of = vec![None; n];
        let mut components = Vec::new();
        for s in 0..n {
            if adj[s].is_empty() || component_of[s].is_some() {
                continue;
            }
            let idx = components.len();
            let mut stack = vec![s];
            let mut vertices = vec![];
            component_of[s] = Some(idx);
            while let Some(x) = stack.pop() {
                vertices.push(x);
                for &(y, _) in &adj[x] {
                    if component_of[y].is_none() {
                        component_of[y] = Some(idx);
                        stack.push(y);
                    }
                }
            }
            vertices.sort_unstable();
            components.push(ComponentReport { vertices, edge_count: 0, two_connected: false, isolated_edge: false });
        }
        for &(u, _) in &self.edges {
            if let Some(c) = component_of[u] {
                components[c].edge_count += 1;
            }
        }
        let cut = articulation_points(&adj);
        let mut is_cut = vec![false; n];
        for &c in &cut {
            is_cut[c] = true;
        }
        for comp in &mut components {
            comp.isolated_edge = comp.edge_count == 1;
            comp.two_connected = comp.edge_count >= 2 && !comp.vertices.iter().any(|&v| is_cut[v]);
        }
        GraphReport { components, cut_vertices: cut, component_of }
    }

    /// A path of edge ids from `from` to `to` that avoids edge `banned`.
    pub fn path_avoiding(&self, from: usize, to: usize, banned: usize) -> Option<Vec<usize>> {
        let adj = self.adjacency();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.vertex_count];
        let mut seen = vec![false; self.vertex_count];
        let mut queue = std::collections::VecDeque::from([from]);
        seen[from] = true;
        while let Some(x) = queue.pop_front() {
            if x == to {
                let mut path = vec![];
                let mut cur = to;
                while let Some((p, e)) = prev[cur] {
                    path.push(e);
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(y, e) in &adj[x] {
                if e != banned && !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, e));
                    queue.push_back(y);
                }
            }
        }
        None
    }
}

/// Iterative Tarjan articulation points; parallel edges are distinguished by id.
fn articulation_points(adj: &[Vec<(usize, usize)>]) -> Vec<usize> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut is_cut = vec![false; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX || adj[root].is_empty() {
            continue;
        }
        disc[root] = time;
        low[root] = time;
        time += 1;
        let mut root_children = 0;
        // (vertex, parent edge id, next adjacency index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut i)) = stack.last_mut() {
            if *i < adj[v].len() {
                let (u, e) = adj[v][*i];
                *i += 1;
                if e == pe || u == v {
                    continue;
                }
                if disc[u] == usize::MAX {
                    disc[u] = time;
                    low[u] = time;
                    time += 1;
                    if v == root {
                        root_children += 1;
                    }
                    stack.push((u, e, 0));
                } else {
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if p != root && low[v] >= disc[p] {
                        is_cut[p] = true;
                    }
                }
            }
        }
        if root_children > 1 {
            is_cut[root] = true;
        }
    }
    (0..n).filter(|&v| is_cut[v]).collect()
}
