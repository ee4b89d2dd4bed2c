//! Acceptance suite: one line per criterion, checked against the oracles in
//! `common`. Seeded by `TREELAB_SEED` (default 20261014).
//!
//! Criteria listed in `KNOWN_FAILURES` are reported as FAIL but do not make
//! the process exit nonzero; the ledger explains each one.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use treelab::actions::{
    axis_by_median_criterion, classify_finite, elliptic_product, median_criterion, Automorphism, EllipticProduct,
    LineMap, VertexPerm,
};
use treelab::cli;
use treelab::conjugacy::{
    bfs_xpath, chevalley_commutator, class_diameter, make_transvection, transvection_xpath, BfsResult,
    FiniteGroupTable, GroupKind, TableClass,
};
use treelab::ends::{dense_or_cyclic, word_sample, Density, End};
use treelab::f2_lab::{
    ball_vertices, check_orbit_closure, check_orbit_labels, edge_midpoint_a, g_orbit, check_even_axis_distances,
    verify_generator_identities, F2Map, F2Point, GGen, LetterPerm, WindowCheck,
};
use treelab::flows::{check_flow_axioms, e_classes, flow_cut, flow_from_arc, ArcPromise, DirectedArcSample};
use treelab::metrize::{axis_chart, axis_metric_agreement, discrete_to_simplicial, DiscreteMedianClosure, PartialPerm};
use treelab::pretree_core::{FinitePretree, IntervalKind, PointSet};
use treelab::rational::{abs, fmt_q, q, qf, Q};
use treelab::tree_model::{
    as_pretree, bridge_in, median_closure_in, F2Tree, MetricTree, Pt, RationalLine, TreeSpace, Word,
};

const KNOWN_FAILURES: [u32; 2] = [6, 9];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Criterion = fn(u64) -> Outcome;

fn main() {
    let seed: u64 = std::env::var("TREELAB_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(20261014);
    let criteria: [(u32, &str, u64, Criterion); 13] = [
        (1, "pretree-axioms", 10, c01_axioms),
        (2, "medians", 10, c02_medians),
        (3, "interval-union", 10, c03_interval_union),
        (4, "axis-criterion", 30, c04_axis_criterion),
        (5, "axis-bridges", 30, c05_axis_bridges),
        (6, "elliptic-products", 30, c06_elliptic_products),
        (7, "commutator-formula", 10, c07_commutators),
        (8, "transvection-xpaths", 60, c08_xpaths),
        (9, "free-group-example", 120, c09_free_group),
        (10, "ends", 30, c10_ends),
        (11, "flows", 10, c11_flows),
        (12, "metrization", 30, c12_metrization),
        (13, "determinism", 60, c13_determinism),
    ];
    // Debugging aid: `TREELAB_ONLY=5,9` runs a subset.
    let only: Option<Vec<u32>> =
        std::env::var("TREELAB_ONLY").ok().map(|s| s.split(',').filter_map(|k| k.trim().parse().ok()).collect());
    println!("acceptance seed={seed}");
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (k, name, budget, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&k)) {
            continue;
        }
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(|| f(seed.wrapping_add(k as u64))))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                outcome(false, format!("panic: {msg}"))
            });
        let dt = start.elapsed();
        let over = if dt > Duration::from_secs(budget) { " over_budget" } else { "" };
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {k:02} {name} time={:.2}s budget={budget}s{over} {}", dt.as_secs_f64(), out.detail);
        if out.passed {
            passed += 1;
        } else if !KNOWN_FAILURES.contains(&k) {
            unexpected.push(k);
        }
    }
    println!("acceptance passed={passed}/13 known_failures={KNOWN_FAILURES:?} unexpected_failures={unexpected:?}");
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}

// ------------------------------------------------------------- helpers

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn word(r: &[i8]) -> Word {
    Word::parse(&show(r)).expect("oracle word")
}

fn rawof(w: &Word) -> RawWord {
    raw(&w.to_string())
}

fn vtx(r: &[i8]) -> F2Point {
    Pt::V(word(r))
}

/// Oracle displacement of a vertex under a map.
fn disp(g: &F2Map, x: &Word) -> usize {
    fdist(&rawof(x), &rawof(&g.apply_word(x)))
}

/// Oracle vertex geodesic in the Cayley tree.
fn fpath(s: &[i8], t: &[i8]) -> Vec<RawWord> {
    let d = concat(&inv(s), t);
    (0..=d.len()).map(|k| concat(s, &d[..k])).collect()
}

fn ball_window(radius: usize) -> Vec<F2Point> {
    ball_vertices(radius).into_iter().map(Pt::V).collect()
}

fn line_window(k: i64, den: i64) -> Vec<Q> {
    (-k..=k).map(|i| qf(i, den)).collect()
}

fn random_q<R: Rng>(rng: &mut R, span: i64, max_den: i64) -> Q {
    qf(rng.gen_range(-span..=span), rng.gen_range(1..=max_den))
}

fn oracle_pretree(n: usize, edges: &[(usize, usize)]) -> (FinitePretree, Vec<Vec<BTreeSet<usize>>>) {
    let paths = all_paths(&adjacency(n, edges));
    let t = FinitePretree::from_fn(n, |y, x, z| y != x && y != z && paths[x][z].contains(&y)).expect("oracle");
    (t, paths)
}

/// The random corpus shared by the first two criteria.
fn corpus(seed: u64) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut r = rng(seed);
    (0..500)
        .map(|_| {
            let n = r.gen_range(3..=9);
            (n, random_tree(&mut r, n))
        })
        .collect()
}

fn density(d: &Result<Density, treelab::ends::EndError>) -> String {
    match d {
        Ok(Density::Dense { min_gap, resolution }) => format!("dense(min_gap={},resolution={})", fmt_q(min_gap), fmt_q(resolution)),
        Ok(Density::CyclicWithGenerator { step, all_multiples }) => {
            format!("cyclic(step={},all_multiples={all_multiples})", fmt_q(step))
        }
        Err(e) => format!("error({e})"),
    }
}

fn check_line(c: &WindowCheck) -> String {
    let kv: Vec<String> = c.detail.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}[{}:{}]", c.name, if c.passed { "pass" } else { "fail" }, kv.join(","))
}

// ------------------------------------------------------------ criteria

fn c01_axioms(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let (mut bad_trees, mut fail_axiom, mut alter_interval, mut neither) = (0, 0, 0, 0);
    for (n, edges) in corpus(seed) {
        let mt = MetricTree::unit(n, &edges).expect("tree");
        let t = as_pretree(&mt, &mt.vertices());
        let (o, _) = oracle_pretree(n, &edges);
        if t != o || !t.check_axioms().passed() {
            bad_trees += 1;
        }
        // Flip one unordered triple, keeping the symmetric pair in step.
        let mut pts: Vec<usize> = (0..n).collect();
        pts.shuffle(&mut r);
        let (y, x, z) = (pts[0], pts[1], pts[2]);
        let m = t.toggled(y, x, z).toggled(y, z, x);
        let fails = !m.check_axioms().passed();
        let changed = (0..n).any(|a| {
            (0..n).any(|b| m.interval(a, b, IntervalKind::Closed).ok() != t.interval(a, b, IntervalKind::Closed).ok())
        });
        match (fails, changed) {
            (true, _) => fail_axiom += 1,
            (false, true) => alter_interval += 1,
            (false, false) => neither += 1,
        }
    }
    outcome(
        bad_trees == 0 && neither == 0,
        format!(
            "trees=500 mismatched_or_failing={bad_trees} mutants=500 fail_axiom={fail_axiom} \
             alter_interval_only={alter_interval} undetected={neither}"
        ),
    )
}

fn c02_medians(seed: u64) -> Outcome {
    let (mut triples, mut bad_unique, mut bad_pretree, mut bad_metric) = (0usize, 0, 0, 0);
    for (n, edges) in corpus(seed - 1) {
        let mt = MetricTree::unit(n, &edges).expect("tree");
        let t = as_pretree(&mt, &mt.vertices());
        let (_, paths) = oracle_pretree(n, &edges);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    triples += 1;
                    let i: Vec<usize> = paths[x][y]
                        .iter()
                        .filter(|w| paths[y][z].contains(w) && paths[x][z].contains(w))
                        .copied()
                        .collect();
                    if i.len() != 1 {
                        bad_unique += 1;
                        continue;
                    }
                    if t.median(x, y, z).ok().flatten() != Some(i[0])
                        || t.median_candidates(x, y, z).map(|c| c.len()).unwrap_or(0) != 1
                    {
                        bad_pretree += 1;
                    }
                    if mt.median(&Pt::V(x), &Pt::V(y), &Pt::V(z)) != Pt::V(i[0]) {
                        bad_metric += 1;
                    }
                }
            }
        }
    }
    outcome(
        bad_unique + bad_pretree + bad_metric == 0,
        format!(
            "trees=500 triples={triples} non_unique={bad_unique} pretree_mismatch={bad_pretree} \
             metric_mismatch={bad_metric}"
        ),
    )
}

fn c03_interval_union(_seed: u64) -> Outcome {
    let expected = [1usize, 1, 1, 2, 3, 6, 11, 23, 47];
    let (mut trees, mut applicable, mut bad, mut bad_interval) = (0usize, 0usize, 0, 0);
    let mut counts = Vec::new();
    for n in 1..=9 {
        let all = all_unlabelled_trees(n);
        counts.push(all.len());
        for edges in all {
            trees += 1;
            let mt = MetricTree::unit(n, &edges).expect("tree");
            let t = as_pretree(&mt, &mt.vertices());
            let (_, paths) = oracle_pretree(n, &edges);
            let iv = |a, b| t.interval(a, b, IntervalKind::Closed).expect("points");
            for a in 0..n {
                for b in 0..n {
                    if iv(a, b) != paths[a][b] {
                        bad_interval += 1;
                    }
                }
            }
            for tt in 0..n {
                for qq in 0..n {
                    for rr in 0..n {
                        let (i1, i2) = (&paths[tt][qq], &paths[qq][rr]);
                        if i1.intersection(i2).copied().collect::<PointSet>() != PointSet::from([qq]) {
                            continue;
                        }
                        applicable += 1;
                        let union: PointSet = iv(tt, qq).union(&iv(qq, rr)).copied().collect();
                        if iv(tt, rr) != union {
                            bad += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(
        bad == 0 && bad_interval == 0 && counts == expected,
        format!("trees={trees} counts={counts:?} applicable_triples={applicable} failures={bad} interval_mismatch={bad_interval}"),
    )
}

/// Compares the median-criterion set with the oracle minimum-displacement set.
fn f2_axis_instance(g: &F2Map, expected_len: usize, window: &[F2Point]) -> Option<bool> {
    let verts: Vec<&Word> = window.iter().filter_map(|p| p.vertex()).collect();
    let oracle: BTreeSet<F2Point> =
        verts.iter().filter(|x| disp(g, x) == expected_len).map(|x| Pt::V((*x).clone())).collect();
    let min = verts.iter().map(|x| disp(g, x)).min()?;
    if oracle.is_empty() || min != expected_len {
        return None;
    }
    let lib: BTreeSet<F2Point> = axis_by_median_criterion(&F2Tree::default(), g, window).ok()?.into_iter().collect();
    Some(lib == oracle)
}

fn c04_axis_criterion(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let line = line_window(40, 4);
    let f2win = ball_window(4);
    let (mut done, mut bad, mut skipped) = (BTreeMap::<&str, usize>::new(), 0, 0);
    let line_check = |g: &LineMap| {
        let d: Vec<Q> = line.iter().map(|x| abs(&(g.apply(x) - x))).collect();
        let min = d.iter().min().expect("window").clone();
        let oracle: BTreeSet<Q> = line.iter().zip(&d).filter(|(_, d)| **d == min).map(|(x, _)| x.clone()).collect();
        let lib: BTreeSet<Q> = axis_by_median_criterion(&RationalLine, g, &line).expect("translation").into_iter().collect();
        lib == oracle
    };
    for _ in 0..20 {
        let mut c = random_q(&mut r, 5, 4);
        if c == q(0) {
            c = q(1);
        }
        if !line_check(&LineMap::translate(c)) {
            bad += 1;
        }
        *done.entry("line_translation").or_default() += 1;
    }
    for _ in 0..20 {
        let c = qf(r.gen_range(1..=9), r.gen_range(1..=3));
        let mut s = random_q(&mut r, 3, 2);
        if s == q(0) {
            s = q(-1);
        }
        let h = LineMap::new(s, random_q(&mut r, 4, 3)).expect("nonzero scale");
        if !line_check(&LineMap::translate(c).conjugate_by(&h)) {
            bad += 1;
        }
        *done.entry("line_conjugate").or_default() += 1;
    }
    let perms: Vec<LetterPerm> = LetterPerm::all();
    while done.values().sum::<usize>() < 100 {
        let kind = if done.get("f2_left_mul").copied().unwrap_or(0) < 30 { "f2_left_mul" } else { "f2_conjugate" };
        let w = random_raw_word(&mut r, 1, 4);
        let lw = F2Map::left_mul(&word(&w));
        let (g, len) = if kind == "f2_left_mul" {
            (lw, cyclic_len(&w))
        } else {
            match r.gen_range(0..5) {
                0 => (lw.conjugate_by(&F2Map::phi()), cyclic_len(&w)),
                1 => (lw.conjugate_by(&F2Map::phi().inverse()), cyclic_len(&w)),
                2 => (lw.conjugate_by(&F2Map::perm(*perms.choose(&mut r).unwrap())), cyclic_len(&w)),
                3 => (F2Map::phi().conjugate_by(&F2Map::left_mul(&word(&random_raw_word(&mut r, 0, 2)))), 1),
                _ => (lw.conjugate_by(&F2Map::left_mul(&word(&random_raw_word(&mut r, 1, 2)))), cyclic_len(&w)),
            }
        };
        match f2_axis_instance(&g, len, &f2win) {
            None => skipped += 1,
            Some(ok) => {
                if !ok {
                    bad += 1;
                }
                *done.entry(kind).or_default() += 1;
            }
        }
    }
    outcome(bad == 0, format!("instances={done:?} mismatches={bad} skipped_window_misses_axis={skipped}"))
}

fn c05_axis_bridges(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let space = F2Tree::default();
    let window = ball_window(4);
    let (mut accepted, mut attempts, mut bad, mut bridge_vertices) = (0, 0, 0, 0usize);
    let (mut disjoint_pairs, mut all_three) = (0, 0);
    // Conjugates s·k·s⁻¹ of short cyclically reduced cores, so axes sit
    // away from the identity.
    let conjugate = |r: &mut ChaCha8Rng| {
        let k = random_raw_word(r, 1, 2);
        let s = random_raw_word(r, 0, 2);
        concat(&concat(&s, &k), &inv(&s))
    };
    while accepted < 100 && attempts < 5_000 {
        attempts += 1;
        let u = conjugate(&mut r);
        let v = conjugate(&mut r);
        let vu = concat(&v, &u);
        if cyclic_len(&vu) == 0 {
            continue;
        }
        let ws = [u, v, vu];
        let maps: Vec<F2Map> = ws.iter().map(|w| F2Map::left_mul(&word(w))).collect();
        let lens: Vec<usize> = ws.iter().map(|w| cyclic_len(w)).collect();
        let axes: Vec<Vec<F2Point>> =
            maps.iter().map(|g| axis_by_median_criterion(&space, g, &window).unwrap_or_default()).collect();
        if axes.iter().any(Vec::is_empty) {
            continue;
        }
        let on = |k: usize, x: &[i8]| disp(&maps[k], &word(x)) == lens[k];
        // Window axes of a convex ball meet iff the full axes do; the oracle
        // double-checks the gates.
        let mut bridges = Vec::new();
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
            let (t, qq) = bridge_in(&space, &axes[i], &axes[j]).expect("nonempty axes");
            let (t, qq) = (rawof(t.vertex().expect("vertex")), rawof(qq.vertex().expect("vertex")));
            if t != qq && !on(j, &t) && !on(i, &qq) {
                bridges.push((t, qq, k));
            }
        }
        if bridges.is_empty() {
            continue;
        }
        accepted += 1;
        disjoint_pairs += bridges.len();
        if bridges.len() == 3 {
            all_three += 1;
        }
        for (t, qq, k) in bridges {
            for x in fpath(&t, &qq) {
                bridge_vertices += 1;
                if !on(k, &x) || !median_criterion(&space, &maps[k], &vtx(&x)) {
                    bad += 1;
                }
            }
        }
    }
    outcome(
        accepted == 100 && bad == 0,
        format!(
            "triples={accepted} attempts={attempts} disjoint_pairs={disjoint_pairs} all_three_disjoint={all_three} \
             bridge_vertices_checked={bridge_vertices} off_third_axis={bad}"
        ),
    )
}

/// All automorphisms of a small tree by brute force.
fn tree_automorphisms(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    fn extend(k: usize, n: usize, adj: &[Vec<usize>], map: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if k == n {
            out.push(map.clone());
            return;
        }
        for img in 0..n {
            if used[img] || adj[img].len() != adj[k].len() {
                continue;
            }
            let ok = (0..k).all(|j| adj[k].contains(&j) == adj[img].contains(&map[j]));
            if ok {
                used[img] = true;
                map.push(img);
                extend(k + 1, n, adj, map, used, out);
                map.pop();
                used[img] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(0, n, adj, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn c06_elliptic_products(seed: u64) -> Outcome {
    let mut r = rng(seed);
    // Finite trees: every automorphism fixes the centre, so the disjoint case
    // cannot be sampled.
    let (mut trees, mut pairs, mut disjoint, mut centre_moved, mut lib_bad) = (0, 0usize, 0, 0, 0);
    for n in 2..=8 {
        for edges in all_unlabelled_trees(n) {
            trees += 1;
            let adj = adjacency(n, &edges);
            let cs = centres(&adj);
            let autos = tree_automorphisms(n, &adj);
            for a in &autos {
                let img: BTreeSet<usize> = cs.iter().map(|&c| a[c]).collect();
                if img != cs.iter().copied().collect() {
                    centre_moved += 1;
                }
            }
            let mt = MetricTree::unit(n, &edges).expect("tree");
            for _ in 0..20 {
                let g = autos.choose(&mut r).unwrap().clone();
                let h = autos.choose(&mut r).unwrap().clone();
                pairs += 1;
                let (g, h) = (VertexPerm::new(&mt, g, "g").unwrap(), VertexPerm::new(&mt, h, "h").unwrap());
                let fixed = |m: &VertexPerm| -> BTreeSet<Pt<usize>> {
                    classify_finite(&mt, m).expect("finite").characteristic_set().iter().cloned().collect()
                };
                if fixed(&g).is_disjoint(&fixed(&h)) {
                    disjoint += 1;
                }
                match elliptic_product(&mt, &g, &h, &mt.subdivision_points()) {
                    Ok(EllipticProduct::Common { product_elliptic: true, triple }) if !triple.is_empty() => {}
                    _ => lib_bad += 1,
                }
            }
        }
    }
    // Substitute settings where the hypothesis is attainable.
    let f2 = F2Tree::default();
    let win = ball_window(5);
    let perms: Vec<LetterPerm> = LetterPerm::all().into_iter().filter(|p| F2Map::perm(*p).apply_word(&word(&raw("ab"))) != word(&raw("ab"))).collect();
    let (mut f2_pairs, mut f2_ok, mut f2_attempts) = (0, 0, 0);
    while f2_pairs < 100 && f2_attempts < 5000 {
        f2_attempts += 1;
        let conj = |r: &mut ChaCha8Rng| {
            let u = word(&random_raw_word(r, 0, 2));
            F2Map::perm(*perms.choose(r).unwrap()).conjugate_by(&F2Map::left_mul(&u))
        };
        let (g, h) = (conj(&mut r), conj(&mut r));
        if let Ok(res @ EllipticProduct::Disjoint { .. }) = elliptic_product(&f2, &g, &h, &win) {
            f2_pairs += 1;
            if res.holds() {
                f2_ok += 1;
            }
        }
    }
    let line = line_window(40, 4);
    let (mut line_pairs, mut line_ok) = (0, 0);
    while line_pairs < 100 {
        let (a, b) = (qf(r.gen_range(-12..=12), 4), qf(r.gen_range(-12..=12), 4));
        if a == b {
            continue;
        }
        line_pairs += 1;
        if elliptic_product(&RationalLine, &LineMap::reflect(a), &LineMap::reflect(b), &line).is_ok_and(|e| {
            matches!(e, EllipticProduct::Disjoint { .. }) && e.holds()
        }) {
            line_ok += 1;
        }
    }
    outcome(
        false,
        format!(
            "unattainable_on_finite_trees trees={trees} sampled_pairs={pairs} disjoint_fixed_pairs={disjoint} \
             centre_moved={centre_moved} common_case_failures={lib_bad} substitute_f2_disjoint_pairs={f2_pairs} \
             substitute_f2_holds={f2_ok} substitute_line_pairs={line_pairs} substitute_line_holds={line_ok}"
        ),
    )
}

fn c07_commutators(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let (mut draws, mut lib_bad, mut oracle_bad, mut matrix_bad) = (0, 0, 0, 0);
    let mut per_field = BTreeMap::<(i64, usize), usize>::new();
    while draws < 1000 {
        let p = *[2i64, 3, 5].choose(&mut r).unwrap();
        let n = *[3usize, 4].choose(&mut r).unwrap();
        let (u, v, w, y) = (random_nonzero(&mut r, n, p), random_nonzero(&mut r, n, p), random_nonzero(&mut r, n, p), random_nonzero(&mut r, n, p));
        if dotp(&v, &u, p) != 0 || dotp(&y, &w, p) != 0 || dotp(&y, &u, p) != 0 {
            continue;
        }
        let (xi, zeta) = (r.gen_range(1..p), r.gen_range(1..p));
        draws += 1;
        *per_field.entry((p, n)).or_default() += 1;
        let (a, b) = (m_transvection(&u, &v, xi, p), m_transvection(&w, &y, zeta, p));
        let (ai, bi) = (m_transvection(&u, &v, -xi, p), m_transvection(&w, &y, -zeta, p));
        let comm = m_mul(&m_mul(&m_mul(&a, &b, p), &ai, p), &bi, p);
        let predicted = m_transvection(&u, &y, xi * dotp(&v, &w, p) * zeta, p);
        if comm != predicted {
            oracle_bad += 1;
        }
        let t1 = make_transvection(&u, &v, xi, p as u32).expect("valid draw");
        let t2 = make_transvection(&w, &y, zeta, p as u32).expect("valid draw");
        let chk = chevalley_commutator(&t1, &t2).expect("preconditions");
        if !chk.holds {
            lib_bad += 1;
        }
        if m_from_flat(chk.commutator.entries(), n) != comm {
            matrix_bad += 1;
        }
    }
    outcome(
        lib_bad + oracle_bad + matrix_bad == 0,
        format!("draws={draws} per_field={per_field:?} library_fail={lib_bad} oracle_fail={oracle_bad} commutator_mismatch={matrix_bad}"),
    )
}

/// Oracle shortest X-path lengths (in elements) between transvections.
fn oracle_bfs(x: &[M], p: i64) -> Vec<Vec<usize>> {
    let k = x.len();
    let adj = |a: &M, b: &M| {
        let (ai, bi) = (m_inverse(a, p), m_inverse(b, p));
        [(a, b), (a, &bi), (&ai, b), (&ai, &bi)].iter().any(|(g, h)| m_is_transvection(&m_mul(g, h, p), p))
    };
    let nbr: Vec<Vec<usize>> = (0..k).map(|i| (0..k).filter(|&j| adj(&x[i], &x[j])).collect()).collect();
    (0..k)
        .map(|s| {
            let mut d = vec![usize::MAX; k];
            d[s] = 1;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(a) = queue.pop_front() {
                for &b in &nbr[a] {
                    if d[b] == usize::MAX {
                        d[b] = d[a] + 1;
                        queue.push_back(b);
                    }
                }
            }
            d
        })
        .collect()
}

fn oracle_certify(els: &[M], p: i64) -> bool {
    els.iter().all(|m| m_is_transvection(m, p))
        && els.windows(2).all(|w| {
            let (ai, bi) = (m_inverse(&w[0], p), m_inverse(&w[1], p));
            [(&w[0], &w[1]), (&w[0], &bi), (&ai, &w[1]), (&ai, &bi)]
                .iter()
                .any(|(g, h)| m_is_transvection(&m_mul(g, h, p), p))
        })
}

fn c08_xpaths(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let x = sl32_transvections();
    let table = FiniteGroupTable::build(&GroupKind::Sl { n: 3, p: 2 }, 1000).expect("SL(3,2)");
    let class = table.transvection_class().expect("matrix group");
    let ctx = TableClass { table: &table, class };
    let lib_set: BTreeSet<M> = table.classes()[class].iter().map(|&i| m_from_flat(table.key(i), 3)).collect();
    let oracle_set: BTreeSet<M> = x.iter().cloned().collect();
    let dist = oracle_bfs(&x, 2);
    let oracle_max = dist.iter().flatten().max().copied().unwrap();
    let lib_diam = class_diameter(&ctx);
    let (mut pairs, mut bad_pairs) = (0, 0);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            pairs += 1;
            let (gi, gj) = (table.lookup(&flat(&x[i])).unwrap(), table.lookup(&flat(&x[j])).unwrap());
            match bfs_xpath(&ctx, gi, gj) {
                Ok(BfsResult::Path(path)) => {
                    let els: Vec<M> = path.elements.iter().map(|&e| m_from_flat(table.key(e), 3)).collect();
                    if !oracle_certify(&els, 2) || els.len() != dist[i][j] || els.len() > 5 {
                        bad_pairs += 1;
                    }
                }
                _ => bad_pairs += 1,
            }
        }
    }
    let (mut cert, mut cert_bad) = (0, 0);
    let mut shapes = BTreeMap::<String, usize>::new();
    while cert < 200 {
        let p = *[2i64, 3, 5].choose(&mut r).unwrap();
        let n = *[3usize, 4].choose(&mut r).unwrap();
        let draw = |r: &mut ChaCha8Rng| loop {
            let (u, v) = (random_nonzero(r, n, p), random_nonzero(r, n, p));
            if dotp(&v, &u, p) == 0 {
                return (u, v, r.gen_range(1..p));
            }
        };
        let ((u, v, xi), (u2, v2, xi2)) = (draw(&mut r), draw(&mut r));
        cert += 1;
        let t1 = make_transvection(&u, &v, xi, p as u32).unwrap();
        let t2 = make_transvection(&u2, &v2, xi2, p as u32).unwrap();
        match transvection_xpath(&t1, &t2) {
            Ok((path, shape)) => {
                *shapes.entry(format!("{shape:?}").replace('"', "")).or_default() += 1;
                let els: Vec<M> = path.elements.iter().map(|m| m_from_flat(m.entries(), n)).collect();
                let ends_ok = els.first() == Some(&m_transvection(&u, &v, xi, p))
                    && els.last() == Some(&m_transvection(&u2, &v2, xi2, p));
                if !ends_ok || !oracle_certify(&els, p) || els.len() > 5 {
                    cert_bad += 1;
                }
            }
            Err(_) => cert_bad += 1,
        }
    }
    let ok = x.len() == 21 && lib_set == oracle_set && table.len() == 168 && pairs == 210 && bad_pairs == 0
        && oracle_max <= 5 && lib_diam == Some(oracle_max) && cert_bad == 0;
    outcome(
        ok,
        format!(
            "class_size={} library_class_matches={} group_order={} pairs={pairs} pair_failures={bad_pairs} \
             oracle_max_len={oracle_max} library_diameter={lib_diam:?} certificates={cert} certificate_failures={cert_bad} shapes={shapes:?}",
            x.len(),
            lib_set == oracle_set,
            table.len()
        ),
    )
}

fn flat(m: &M) -> Vec<u32> {
    m.iter().flatten().map(|&x| x as u32).collect()
}

fn c09_free_group(_seed: u64) -> Outcome {
    let ba = raw("ba");
    let words = all_raw_words(8);
    let phi2_bad = words
        .iter()
        .filter(|w| {
            let once = treelab::f2_lab::phi(&word(w));
            rawof(&treelab::f2_lab::phi(&once)) != concat(&ba, w)
        })
        .count();
    let parity_bad = words.iter().filter(|w| w.len() % 2 == 0 && treelab::f2_lab::phi(&word(w)).len() % 2 == 0).count();
    let ident = verify_generator_identities(8);
    let c1 = check_orbit_closure(4, 8);
    let c2 = check_orbit_labels(&edge_midpoint_a(), 4, 8);
    let c2_ok = c2.passed && c2.detail["orbit_labels"] == "2" && c2.detail["max_orbit_points_per_edge"].parse::<usize>().unwrap() <= 1;
    let even = check_even_axis_distances(&Word::identity(), 6, 6);
    let ok = phi2_bad == 0 && parity_bad == 0 && ident.passed && c1.passed && c2_ok && even.passed;
    outcome(
        ok,
        format!(
            "phi2[words={} mismatches={phi2_bad}] parity_mismatches={parity_bad} {} {} {} {}",
            words.len(),
            check_line(&ident),
            check_line(&c1),
            check_line(&c2),
            check_line(&even)
        ),
    )
}

/// Ordered-group axioms and the Archimedean shadow on a deduplicated sample.
fn order_axioms(e: &End<'_, RationalLine, LineMap>, sample: &[LineMap]) -> (usize, Vec<&'static str>) {
    use std::cmp::Ordering::*;
    let n = sample.len();
    let mut failures = BTreeSet::new();
    let mut cmp = vec![vec![Equal; n]; n];
    for i in 0..n {
        for j in 0..n {
            match e.compare_stabilizers(&sample[i], &sample[j]) {
                Ok(d) => cmp[i][j] = d.verdict,
                Err(_) => {
                    failures.insert("totality");
                }
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if cmp[i][j] != cmp[j][i].reverse() || (cmp[i][j] == Equal) != (i == j) {
                failures.insert("antisymmetry");
            }
            for k in 0..n {
                if cmp[i][j] == Less && cmp[j][k] == Less && cmp[i][k] != Less {
                    failures.insert("transitivity");
                }
            }
        }
    }
    let id = sample[0].compose(&sample[0].inverse());
    for i in 0..n {
        for j in 0..n {
            if cmp[i][j] != Less {
                continue;
            }
            for k in sample {
                let c = |a: &LineMap, b: &LineMap| e.compare_stabilizers(a, b).map(|d| d.verdict).ok();
                if c(&k.compose(&sample[i]), &k.compose(&sample[j])) != Some(Less) {
                    failures.insert("left_invariance");
                }
                if c(&sample[i].compose(k), &sample[j].compose(k)) != Some(Less) {
                    failures.insert("right_invariance");
                }
            }
        }
    }
    let positive: Vec<&LineMap> =
        sample.iter().filter(|h| e.compare_stabilizers(&id, h).is_ok_and(|d| d.verdict == Less)).collect();
    for a in &positive {
        for b in &positive {
            let found = (1..=64).any(|m| e.compare_stabilizers(&a.power(m), b).is_ok_and(|d| d.verdict == Greater));
            if !found {
                failures.insert("archimedean");
            }
        }
    }
    (n, failures.into_iter().collect())
}

fn dedup(sample: Vec<(String, LineMap)>) -> Vec<LineMap> {
    let mut out: Vec<LineMap> = Vec::new();
    for (_, m) in sample {
        if !out.contains(&m) {
            out.push(m);
        }
    }
    out
}

fn c10_ends(_seed: u64) -> Outcome {
    let line = RationalLine;
    let gens = [LineMap::translate(q(2)), LineMap::translate(q(3))];
    let e = End::new(&line, gens[0].clone(), q(0), 40).expect("loxodromic");
    let sample = dedup(word_sample(&gens, 4));
    // Oracle: sums of reduced words of length ≤ 4 in ±2, ±3.
    let oracle: BTreeSet<i64> = all_raw_words(4)
        .iter()
        .map(|w| w.iter().map(|&l| i64::from(l.signum()) * (i64::from(l.abs()) + 1)).sum())
        .collect();
    let nus: Vec<Option<Q>> = sample.iter().map(|h| e.nu(h).ok().map(|p| e.coord(&p))).collect();
    let nu_set: BTreeSet<Q> = nus.iter().flatten().cloned().collect();
    let oracle_q: BTreeSet<Q> = oracle.iter().map(|&k| q(k)).collect();
    let integer_window: BTreeSet<Q> = (-12..=12).map(q).collect();
    let defined = nus.iter().all(Option::is_some);
    let injective = nu_set.len() == sample.len();
    let mut order_bad = 0;
    for (i, a) in sample.iter().enumerate() {
        for (j, b) in sample.iter().enumerate() {
            let want = nus[i].cmp(&nus[j]);
            if e.compare_stabilizers(a, b).map(|d| d.verdict).ok() != Some(want) {
                order_bad += 1;
            }
        }
    }
    let coords: Vec<Q> = nu_set.iter().cloned().collect();
    let cyc = dense_or_cyclic(&coords, &qf(1, 40));
    let cyclic_ok = matches!(&cyc, Ok(Density::CyclicWithGenerator { step, all_multiples: true }) if *step == q(1));

    let dyadic: Vec<LineMap> = (0..=4).map(|k| LineMap::translate(qf(1, 1 << k))).collect();
    let ed = End::new(&line, dyadic[0].clone(), q(0), 10).expect("loxodromic");
    let dsample = dedup(word_sample(&dyadic, 2));
    let dcoords: Vec<Q> = dsample.iter().filter_map(|h| ed.nu(h).ok()).map(|p| ed.coord(&p)).collect();
    let dense = dense_or_cyclic(&dcoords, &qf(1, 10));
    let dense_ok = matches!(dense, Ok(Density::Dense { .. })) && dcoords.len() == dsample.len();

    let e10 = End::new(&line, gens[0].clone(), q(0), 10).expect("loxodromic");
    let (n1, f1) = order_axioms(&e10, &dedup(word_sample(&gens, 3)));
    let (n2, f2) = order_axioms(&ed, &dedup(word_sample(&dyadic[..2], 3)));
    let ok = defined && injective && nu_set == oracle_q && nu_set == integer_window && order_bad == 0 && cyclic_ok && dense_ok
        && f1.is_empty() && f2.is_empty();
    outcome(
        ok,
        format!(
            "line{{+2,+3}}[elements={} nu_defined={defined} injective={injective} image_matches_oracle={} \
             image_is_-12..12={} order_mismatch={order_bad} density={}] dyadic[elements={} density={}] \
             axioms{{+2,+3}}[elements={n1} failures={f1:?}] axioms{{1,1/2}}[elements={n2} failures={f2:?}]",
            sample.len(),
            nu_set == oracle_q,
            nu_set == integer_window,
            density(&cyc),
            dsample.len(),
            density(&dense)
        ),
    )
}

fn c11_flows(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let f2 = F2Tree::default();
    let (mut arcs, mut axiom_bad, mut agree_bad, mut inconclusive, mut max_classes, mut over_two) = (0, 0, 0, 0, 0, 0);
    let ball = ball_vertices(4);
    for _ in 0..50 {
        let ray = random_raw_word(&mut r, 11, 11);
        let arc1: Vec<F2Point> = (0..=8).map(|k| vtx(&ray[..k])).collect();
        let s = random_raw_word(&mut r, 0, 3);
        let arc2: Vec<F2Point> = fpath(&s, &ray).iter().map(|w| vtx(w)).collect();
        let probes: Vec<F2Point> = {
            let mut p: Vec<F2Point> = (0..12).map(|_| Pt::V(ball.choose(&mut r).unwrap().clone())).collect();
            p.sort();
            p.dedup();
            p
        };
        let a1 = DirectedArcSample::new(&f2, arc1, ArcPromise::GeodesicRay).expect("geodesic");
        let a2 = DirectedArcSample::new(&f2, arc2, ArcPromise::GeodesicRay).expect("geodesic");
        let (fl1, fl2) = (flow_from_arc(&f2, &a1, &probes), flow_from_arc(&f2, &a2, &probes));
        arcs += 2;
        inconclusive += fl1.inconclusive.len() + fl2.inconclusive.len();
        for fl in [&fl1, &fl2] {
            if !check_flow_axioms(&fl.relation).passed() {
                axiom_bad += 1;
            }
        }
        let n = probes.len();
        if (0..n).any(|i| (0..n).any(|j| i != j && fl1.relation.holds(i, j) != fl2.relation.holds(i, j))) {
            agree_bad += 1;
        }
        // A line sample: the geodesic between two ball vertices.
        let (x, y) = (rawof(ball.choose(&mut r).unwrap()), rawof(ball.choose(&mut r).unwrap()));
        let line: Vec<F2Point> = fpath(&x, &y).iter().map(|w| vtx(w)).collect();
        match flow_cut(&f2, &a1, &line) {
            Ok((_, lf)) => {
                let k = e_classes(&lf.relation).len();
                max_classes = max_classes.max(k);
                if k > 2 {
                    over_two += 1;
                }
                if !check_flow_axioms(&lf.relation).passed() {
                    axiom_bad += 1;
                }
            }
            Err(_) => inconclusive += 1,
        }
    }
    let rl = RationalLine;
    for _ in 0..50 {
        let l = q(r.gen_range(-3..=3));
        let arc1: Vec<Q> = (1..=6).map(|k| &l - qf(1, 1 << k)).collect();
        let mut arc2: Vec<Q> = vec![&l - q(3)];
        arc2.extend((3..=8).map(|k| &l - qf(1, 1 << k)));
        let mut probes: Vec<Q> = (0..14)
            .map(|_| qf(r.gen_range(-15..=15), 3))
            .filter(|x| !(*x > &l - qf(1, 2) && *x < l))
            .collect();
        probes.sort();
        probes.dedup();
        if probes.len() < 2 {
            continue;
        }
        let a1 = DirectedArcSample::new(&rl, arc1, ArcPromise::ConvergesTo(l.clone())).expect("arc");
        let a2 = DirectedArcSample::new(&rl, arc2, ArcPromise::ConvergesTo(l.clone())).expect("arc");
        let (fl1, fl2) = (flow_from_arc(&rl, &a1, &probes), flow_from_arc(&rl, &a2, &probes));
        arcs += 2;
        inconclusive += fl1.inconclusive.len() + fl2.inconclusive.len();
        for fl in [&fl1, &fl2] {
            if !check_flow_axioms(&fl.relation).passed() {
                axiom_bad += 1;
            }
        }
        let n = probes.len();
        if (0..n).any(|i| (0..n).any(|j| i != j && fl1.relation.holds(i, j) != fl2.relation.holds(i, j))) {
            agree_bad += 1;
        }
        match flow_cut(&rl, &a2, &probes) {
            Ok((_, lf)) => {
                let k = e_classes(&lf.relation).len();
                max_classes = max_classes.max(k);
                if k > 2 {
                    over_two += 1;
                }
            }
            Err(_) => inconclusive += 1,
        }
    }
    outcome(
        axiom_bad + agree_bad + inconclusive + over_two == 0,
        format!(
            "arcs={arcs} axiom_failures={axiom_bad} cofinal_disagreements={agree_bad} inconclusive={inconclusive} \
             max_e_classes={max_classes} over_two={over_two}"
        ),
    )
}

fn c12_metrization(_seed: u64) -> Outcome {
    let f2 = F2Tree::default();
    let root = Pt::V(Word::identity());
    let orbit: Vec<F2Point> =
        g_orbit(&root, 6).into_iter().filter(|p| f2.dist(p, &root) <= q(3)).collect();
    let closure: Vec<F2Point> = median_closure_in(&f2, &orbit);
    let pretree = as_pretree(&f2, &closure);
    let gens: Vec<PartialPerm> =
        GGen::ALL.iter().map(|g| PartialPerm::restrict(g.name(), &closure, |p| g.map().apply(p))).collect();
    let d = DiscreteMedianClosure { pretree, gens };
    let (mut isometric, mut pairs, mut dist_bad) = (false, 0usize, 0);
    let detail;
    match discrete_to_simplicial(&d) {
        Ok(m) => {
            isometric = m.all_isometric();
            pairs = m.certificates.iter().map(|c| c.pairs_checked).sum();
            let pos: Vec<RawWord> = closure.iter().map(|p| rawof(p.vertex().expect("vertex closure"))).collect();
            for i in 0..closure.len() {
                for j in 0..closure.len() {
                    if m.tree.dist(&Pt::V(i), &Pt::V(j)) != q(fdist(&pos[i], &pos[j]) as i64) {
                        dist_bad += 1;
                    }
                }
            }
            let doms: Vec<String> = m.certificates.iter().map(|c| format!("{}:{}", c.name, c.pairs_checked)).collect();
            detail = format!("domains_pairs=[{}]", doms.join(","));
        }
        Err(e) => detail = format!("error={e}"),
    }
    // Axis charts: translates of the axis of ba by G elements, plus axes of
    // other words sharing segments with it.
    let unit = q(1);
    let mut charts = Vec::new();
    for w in ["ba", "bab", "ab", "baba"] {
        let h = F2Map::left_mul(&Word::parse(w).unwrap());
        charts.push(axis_chart(&f2, &h, &root, 3, 1, &unit, None, w));
    }
    let h = F2Map::left_mul(&Word::parse("ba").unwrap());
    for (gw, s) in treelab::f2_lab::g_words(2).into_iter().skip(1) {
        let name: Vec<&str> = gw.iter().map(|g| g.name()).collect();
        charts.push(axis_chart(&f2, &h, &root, 3, 1, &unit, Some(&s), &format!("ba^{}", name.join("."))));
    }
    let rep = axis_metric_agreement(&charts);
    let ok = isometric && dist_bad == 0 && rep.passed() && !rep.compared.is_empty();
    outcome(
        ok,
        format!(
            "closure_points={} all_isometric={isometric} pairs_checked={pairs} distance_mismatch={dist_bad} {detail} \
             charts={} compared_pairs={} skipped_pairs={} chart_mismatches={}",
            closure.len(),
            charts.len(),
            rep.compared.len(),
            rep.skipped.len(),
            rep.mismatches.len()
        ),
    )
}

fn c13_determinism(seed: u64) -> Outcome {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let f = |name: &str| data.join(name).to_string_lossy().into_owned();
    let s = (seed % 1000).to_string();
    let commands: Vec<Vec<String>> = [
        vec!["check-axioms".into(), f("path3.pretree")],
        vec!["median".into(), "--tree".into(), f("star.tree"), "x".into(), "y".into(), "z".into()],
        vec!["bridge".into(), "--space".into(), "f2".into(), "--a".into(), "a,aa".into(), "--b".into(), "b,bA".into()],
        vec!["closure".into(), "--tree".into(), f("star.tree"), "x".into(), "y".into(), "z".into()],
        vec!["classify".into(), "--gens".into(), f("f2.aut")],
        vec!["classify".into(), "--tree".into(), f("star.tree"), "--gens".into(), f("star.aut")],
        vec!["non-nesting".into(), "--gens".into(), f("line.aut")],
        vec![
            "flow".into(), "--space".into(), "line".into(), "--arc".into(), "0,1/2,3/4".into(), "--promise".into(),
            "limit:1".into(), "--probes".into(), "-1,0,2,3".into(), "--line".into(), "-1,0,2,3".into(),
        ],
        vec!["ends".into(), "--gens".into(), f("line.aut"), "--a0".into(), "0".into(), "--word-bound".into(), "3".into()],
        vec!["xpath".into(), "--group".into(), "sl:3:2".into(), "--all-pairs".into()],
        vec!["sl-demo".into(), "--draws".into(), "300".into(), "--pairs".into(), "60".into()],
        vec!["f2-demo".into(), "--word-bound".into(), "6".into()],
        vec!["isometrize".into(), "--pretree".into(), f("star.pretree"), "--gens".into(), f("star_rot.aut")],
    ]
    .into_iter()
    .map(|mut c| {
        c.splice(0..0, ["treelab".to_string(), "--seed".into(), s.clone()]);
        c
    })
    .collect();
    let run = |argv: &[String]| {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = cli::run(argv.iter().cloned(), &mut out, &mut err);
        (code, out, err)
    };
    let mut differ = Vec::new();
    let mut bad_exit = Vec::new();
    let mut subcommands = BTreeSet::new();
    for c in &commands {
        subcommands.insert(c[3].clone());
        let (a, b) = (run(c), run(c));
        if a != b {
            differ.push(c[3].clone());
        }
        if !(a.0 == 0 || a.0 == 1) || a.1.is_empty() {
            bad_exit.push(format!("{}:{}", c[3], a.0));
        }
    }
    outcome(
        differ.is_empty() && bad_exit.is_empty() && subcommands.len() == 12,
        format!("runs={} subcommands={} differing={differ:?} errors={bad_exit:?}", commands.len() * 2, subcommands.len()),
    )
}
