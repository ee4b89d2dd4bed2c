//! Finite simplicial trees with positive rational edge lengths.

use std::collections::{BTreeMap, VecDeque};

use num_traits::{Signed, Zero};

use super::simplicial::{self, simplicial_space, Pt, SimplicialTree};
use super::TreeError;
use crate::rational::{fmt_q, parse_q, Q};

/// Points of a [`MetricTree`]; vertices are internal indices.
pub type TreePoint = Pt<usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricTree {
    labels: Vec<String>,
    index: BTreeMap<String, usize>,
    edges: Vec<(usize, usize, Q)>,
    adj: Vec<Vec<(usize, Q)>>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    root_dist: Vec<Q>,
}

impl MetricTree {
    /// Builds a tree on `labels` with edges given by label index.
    pub fn new(labels: Vec<String>, edges: Vec<(usize, usize, Q)>) -> Result<Self, TreeError> {
        let n = labels.len();
        if n == 0 {
            return Err(TreeError::NotATree("no vertices".into()));
        }
        let mut index = BTreeMap::new();
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(TreeError::DuplicateVertex(l.clone()));
            }
        }
        if edges.len() != n - 1 {
            return Err(TreeError::NotATree(format!("{} vertices but {} edges", n, edges.len())));
        }
        let mut adj = vec![Vec::new(); n];
        let mut norm = Vec::with_capacity(edges.len());
        for (a, b, len) in edges {
            if a >= n || b >= n {
                return Err(TreeError::UnknownVertex(format!("index {}", a.max(b))));
            }
            if a == b {
                return Err(TreeError::NotATree(format!("loop at {}", labels[a])));
            }
            if !len.is_positive() {
                return Err(TreeError::NonPositiveLength(fmt_q(&len)));
            }
            adj[a].push((b, len.clone()));
            adj[b].push((a, len.clone()));
            norm.push((a.min(b), a.max(b), len));
        }
        for row in &mut adj {
            row.sort_by_key(|e| e.0);
        }
        norm.sort_by_key(|e| (e.0, e.1));
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut root_dist = vec![Q::zero(); n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for (w, len) in adj[u].clone() {
                if depth[w] == usize::MAX {
                    depth[w] = depth[u] + 1;
                    parent[w] = Some(u);
                    root_dist[w] = &root_dist[u] + &len;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(TreeError::NotATree(format!("{} is unreachable", labels[v])));
        }
        Ok(MetricTree { labels, index, edges: norm, adj, parent, depth, root_dist })
    }

    /// Unit-length tree from an edge list over `0..n`, labelled by index.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self, TreeError> {
        let labels = (0..n).map(|i| i.to_string()).collect();
        MetricTree::new(labels, edges.iter().map(|&(a, b)| (a, b, Q::from_integer(1.into()))).collect())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_by_label(&self, l: &str) -> Option<usize> {
        self.index.get(l).copied()
    }

    /// Edges as `(lo, hi, length)` with `lo < hi`, sorted.
    pub fn edges(&self) -> &[(usize, usize, Q)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|e| e.0)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        self.adj[a].iter().any(|e| e.0 == b)
    }

    pub fn vertices(&self) -> Vec<TreePoint> {
        (0..self.len()).map(Pt::V).collect()
    }

    /// Vertices and edge midpoints: the vertex set of the barycentric subdivision.
    pub fn subdivision_points(&self) -> Vec<TreePoint> {
        let mut v = self.vertices();
        for (a, b, len) in &self.edges {
            v.push(Pt::E { lo: *a, hi: *b, off: len / Q::from_integer(2.into()) });
        }
        v
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root");
        }
        while a != b {
            a = self.parent[a].expect("non-root");
            b = self.parent[b].expect("non-root");
        }
        a
    }

    /// Point at distance `off` from `a` on the edge `{a, b}`.
    pub fn edge_point(&self, a: usize, b: usize, off: &Q) -> Result<TreePoint, TreeError> {
        if !self.is_adjacent(a, b) {
            return Err(TreeError::BadPoint(format!("{}-{} is not an edge", self.labels[a], self.labels[b])));
        }
        let len = self.edge_len(&a, &b);
        if !off.is_positive() || *off >= len {
            return Err(TreeError::BadPoint(format!("offset {} outside (0, {})", fmt_q(off), fmt_q(&len))));
        }
        Ok(simplicial::on_edge(self, &a, &b, off))
    }

    /// Parses `@<id>` or `@<id1>-<id2>:<num>/<den>` (offset from `id1`).
    pub fn parse_point(&self, s: &str) -> Result<TreePoint, TreeError> {
        let body = s.strip_prefix('@').ok_or_else(|| TreeError::BadPoint(s.into()))?;
        let find = |l: &str| self.vertex_by_label(l).ok_or_else(|| TreeError::UnknownVertex(l.into()));
        match body.split_once(':') {
            None => Ok(Pt::V(find(body)?)),
            Some((e, off)) => {
                let (a, b) = e.split_once('-').ok_or_else(|| TreeError::BadPoint(s.into()))?;
                let off = parse_q(off).ok_or_else(|| TreeError::BadPoint(s.into()))?;
                self.edge_point(find(a)?, find(b)?, &off)
            }
        }
    }

    pub fn format_point(&self, p: &TreePoint) -> String {
        simplicial::label(self, p)
    }

    /// Parses the `tree` / `v <id>` / `e <id1> <id2> <len>` text format.
    pub fn parse(text: &str) -> Result<Self, TreeError> {
        let mut lines = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty());
        match lines.next() {
            Some("tree") => {}
            other => return Err(TreeError::Parse(format!("expected `tree` header, got {other:?}"))),
        }
        let mut labels = Vec::new();
        let mut index = BTreeMap::new();
        let mut edges = Vec::new();
        for line in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok.as_slice() {
                ["v", id] => {
                    if id.contains(['-', ':', '@']) {
                        return Err(TreeError::Parse(format!("bad vertex id {id}")));
                    }
                    if index.insert(id.to_string(), labels.len()).is_some() {
                        return Err(TreeError::DuplicateVertex(id.to_string()));
                    }
                    labels.push(id.to_string());
                }
                ["e", a, b, len] => {
                    let ia = *index.get(*a).ok_or_else(|| TreeError::UnknownVertex(a.to_string()))?;
                    let ib = *index.get(*b).ok_or_else(|| TreeError::UnknownVertex(b.to_string()))?;
                    let len = parse_q(len).ok_or_else(|| TreeError::Parse(format!("bad length in `{line}`")))?;
                    edges.push((ia, ib, len));
                }
                _ => return Err(TreeError::Parse(format!("unrecognized line `{line}`"))),
            }
        }
        MetricTree::new(labels, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("tree\n");
        for l in &self.labels {
            s.push_str(&format!("v {l}\n"));
        }
        for (a, b, len) in &self.edges {
            let len = if len.is_integer() { format!("{}/1", len.numer()) } else { fmt_q(len) };
            s.push_str(&format!("e {} {} {}\n", self.labels[*a], self.labels[*b], len));
        }
        s
    }

    /// Hop counts from `s` to every vertex.
    pub fn hops_from(&self, s: usize) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.len()];
        d[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for w in self.neighbors(u) {
                if d[w] == usize::MAX {
                    d[w] = d[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }
}

impl SimplicialTree for MetricTree {
    type V = usize;

    fn vertex_path(&self, a: &usize, b: &usize) -> Vec<usize> {
        let c = self.lca(*a, *b);
        let mut left = vec![*a];
        let mut x = *a;
        while x != c {
            x = self.parent[x].expect("non-root");
            left.push(x);
        }
        let mut right = Vec::new();
        let mut y = *b;
        while y != c {
            right.push(y);
            y = self.parent[y].expect("non-root");
        }
        left.extend(right.into_iter().rev());
        left
    }

    fn edge_len(&self, a: &usize, b: &usize) -> Q {
        self.adj[*a]
            .iter()
            .find(|e| e.0 == *b)
            .map(|e| e.1.clone())
            .expect("adjacent vertices")
    }

    fn vdist(&self, a: &usize, b: &usize) -> Q {
        let c = self.lca(*a, *b);
        &self.root_dist[*a] + &self.root_dist[*b] - &self.root_dist[c] - &self.root_dist[c]
    }

    fn vlabel(&self, v: &usize) -> String {
        self.labels[*v].clone()
    }
}

simplicial_space!(MetricTree);
