//! Brute-force oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls into the library's geometry.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- trees

/// Uniform-ish random labelled tree: each vertex joins an earlier one, then
/// labels are shuffled.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> Vec<(usize, usize)> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    (1..n).map(|i| (perm[rng.gen_range(0..i)], perm[i])).collect()
}

pub fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

/// Vertex path from `x` to `y` by breadth-first search.
pub fn path(adj: &[Vec<usize>], x: usize, y: usize) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    parent[x] = x;
    let mut q = VecDeque::from([x]);
    while let Some(u) = q.pop_front() {
        for &w in &adj[u] {
            if parent[w] == usize::MAX {
                parent[w] = u;
                q.push_back(w);
            }
        }
    }
    let mut out = vec![y];
    while *out.last().unwrap() != x {
        out.push(parent[*out.last().unwrap()]);
    }
    out.reverse();
    out
}

/// `paths[x][y]` as vertex sets.
pub fn all_paths(adj: &[Vec<usize>]) -> Vec<Vec<BTreeSet<usize>>> {
    let n = adj.len();
    (0..n).map(|x| (0..n).map(|y| path(adj, x, y).into_iter().collect()).collect()).collect()
}

/// Canonical string of a rooted tree (AHU encoding).
fn rooted_code(adj: &[Vec<usize>], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v].iter().filter(|&&w| w != parent).map(|&w| rooted_code(adj, w, v)).collect();
    kids.sort();
    format!("({})", kids.concat())
}

pub fn centres(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] == 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                if deg[w] == 0 {
                    continue;
                }
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
            deg[v] = 0;
        }
        layer = next;
    }
    layer
}

/// Isomorphism-invariant code of an unrooted tree.
pub fn tree_code(n: usize, edges: &[(usize, usize)]) -> String {
    let adj = adjacency(n, edges);
    centres(&adj).into_iter().map(|c| rooted_code(&adj, c, usize::MAX)).min().unwrap()
}

/// One representative per isomorphism class of trees on `n ≥ 1` vertices.
pub fn all_unlabelled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut layer: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::from([(tree_code(1, &[]), Vec::new())]);
    for k in 1..n {
        let mut next = BTreeMap::new();
        for edges in layer.values() {
            for v in 0..k {
                let mut e = edges.clone();
                e.push((v, k));
                next.entry(tree_code(k + 1, &e)).or_insert(e);
            }
        }
        layer = next;
    }
    layer.into_values().collect()
}

// ---------------------------------------------------------- free group

/// Letters as `±1` (a) and `±2` (b).
pub type RawWord = Vec<i8>;

pub fn raw(s: &str) -> RawWord {
    let w: RawWord = s
        .chars()
        .filter(|&c| c != '1')
        .map(|c| match c {
            'a' => 1,
            'A' => -1,
            'b' => 2,
            'B' => -2,
            _ => panic!("bad letter {c}"),
        })
        .collect();
    reduce(&w)
}

pub fn show(w: &[i8]) -> String {
    if w.is_empty() {
        return "1".into();
    }
    w.iter().map(|l| match l { 1 => 'a', -1 => 'A', 2 => 'b', _ => 'B' }).collect()
}

pub fn reduce(w: &[i8]) -> RawWord {
    let mut out: RawWord = Vec::new();
    for &l in w {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn concat(u: &[i8], v: &[i8]) -> RawWord {
    reduce(&[u, v].concat())
}

pub fn inv(w: &[i8]) -> RawWord {
    w.iter().rev().map(|l| -l).collect()
}

/// Cayley-graph distance.
pub fn fdist(u: &[i8], v: &[i8]) -> usize {
    concat(&inv(u), v).len()
}

/// Translation length of left multiplication by `w`.
pub fn cyclic_len(w: &[i8]) -> usize {
    let mut w = reduce(w);
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w = w[1..w.len() - 1].to_vec();
    }
    w.len()
}

pub fn all_raw_words(max_len: usize) -> Vec<RawWord> {
    let mut out = vec![Vec::new()];
    let mut layer: Vec<RawWord> = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for l in [1i8, -1, 2, -2] {
                if w.last() != Some(&-l) {
                    let mut x = w.clone();
                    x.push(l);
                    next.push(x);
                }
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

pub fn random_raw_word<R: Rng>(rng: &mut R, min_len: usize, max_len: usize) -> RawWord {
    let len = rng.gen_range(min_len..=max_len);
    let mut w: RawWord = Vec::new();
    while w.len() < len {
        let l = *[1i8, -1, 2, -2].choose(rng).unwrap();
        if w.last() != Some(&-l) {
            w.push(l);
        }
    }
    w
}

// ------------------------------------------------------------ matrices

pub type M = Vec<Vec<i64>>;

pub fn m_identity(n: usize) -> M {
    (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect()
}

pub fn m_mul(a: &M, b: &M, p: i64) -> M {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum::<i64>().rem_euclid(p)).collect()).collect()
}

pub fn m_sub_identity(a: &M, p: i64) -> M {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| (a[i][j] - i64::from(i == j)).rem_euclid(p)).collect()).collect()
}

/// Leibniz expansion; fine for n ≤ 4.
pub fn m_det(a: &M, p: i64) -> i64 {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = 0i64;
    loop {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let prod: i64 = (0..n).map(|i| a[i][perm[i]]).product();
        total += if inversions % 2 == 0 { prod } else { -prod };
        // next permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
    total.rem_euclid(p)
}

fn inv_mod(x: i64, p: i64) -> i64 {
    (1..p).find(|&y| (x * y).rem_euclid(p) == 1).expect("unit")
}

pub fn m_rank(a: &M, p: i64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.len(), m[0].len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(r, piv);
        let iv = inv_mod(m[r][c], p);
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c] * iv % p;
                for k in 0..cols {
                    m[i][k] = (m[i][k] - f * m[r][k]).rem_euclid(p);
                }
            }
        }
        r += 1;
    }
    r
}

/// det 1, `M − I` of rank one and square zero.
pub fn m_is_transvection(a: &M, p: i64) -> bool {
    let n = m_sub_identity(a, p);
    m_det(a, p) == 1 && m_rank(&n, p) == 1 && m_mul(&n, &n, p).iter().flatten().all(|&x| x == 0)
}

/// `I + ξ u vᵀ`.
pub fn m_transvection(u: &[i64], v: &[i64], xi: i64, p: i64) -> M {
    let n = u.len();
    (0..n).map(|i| (0..n).map(|j| (i64::from(i == j) + xi * u[i] * v[j]).rem_euclid(p)).collect()).collect()
}

pub fn m_from_flat(flat: &[u32], n: usize) -> M {
    (0..n).map(|i| (0..n).map(|j| flat[i * n + j] as i64).collect()).collect()
}

pub fn m_inverse(a: &M, p: i64) -> M {
    // Transvections and small groups: the inverse is a power.
    let id = m_identity(a.len());
    let mut prev = id.clone();
    let mut cur = a.clone();
    while cur != id {
        prev = cur.clone();
        cur = m_mul(&cur, a, p);
    }
    prev
}

pub fn dotp(a: &[i64], b: &[i64], p: i64) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<i64>().rem_euclid(p)
}

pub fn random_nonzero<R: Rng>(rng: &mut R, n: usize, p: i64) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(0..p)).collect();
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// All 3×3 matrices over F_2 that are transvections.
pub fn sl32_transvections() -> Vec<M> {
    let mut out = Vec::new();
    for bits in 0u32..512 {
        let m: M = (0..3).map(|i| (0..3).map(|j| ((bits >> (3 * i + j)) & 1) as i64).collect()).collect();
        if m_is_transvection(&m, 2) {
            out.push(m);
        }
    }
    out
}
