//! Acceptance suite: one PASS/FAIL line per criterion. Every comparison is
//! exact integer equality (tolerance 0).
//!
//! Run with `cargo test --test acceptance`. Criteria listed in
//! `KNOWN_FAILURES` are reported as FAIL but do not fail the run; the README
//! explains why they cannot hold.

mod common;

use std::collections::{HashMap, HashSet};
use std::ops::ControlFlow;
use std::time::Instant;

use critical_groups::critical::{self, LaplacianKind};
use critical_groups::flow::{self, ChipGraph, ChipState, Configuration, GroupCoordinates, GroupElement};
use critical_groups::linalg::{self, IntegerMatrix};
use critical_groups::trees::{self, EnumerationOptions};
use critical_groups::{generators, Simplex, SimplicialComplex};
use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: &[u32] = &[5];

/// Collects sub-check results for one criterion.
struct Checks {
    failures: Vec<String>,
    count: usize,
}

impl Checks {
    fn new() -> Self {
        Checks { failures: Vec::new(), count: 0 }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.count += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, got: T, want: T, what: &str) {
        let ok = got == want;
        self.check(ok, || format!("{what}: got {got:?}, expected {want:?}"));
    }
}

fn big(v: i64) -> BigInt {
    BigInt::from(v)
}

fn simplex(v: &[u32]) -> Simplex {
    Simplex::new(v.iter().copied()).unwrap()
}

fn criterion_1(c: &mut Checks) {
    let b = generators::bipyramid();
    let star: Vec<Simplex> = [[1, 2], [1, 3], [1, 4], [1, 5]].iter().map(|e| simplex(e)).collect();
    let tree = trees::spanning_tree_from_faces(&b, 1, &star).unwrap().unwrap();
    let l = critical::reduced_laplacian(&b, 1, &tree).unwrap();
    let expected = IntegerMatrix::from_rows(&[
        vec![3, -1, -1, 1, 1],
        vec![-1, 2, 0, -1, 0],
        vec![-1, 0, 2, 0, -1],
        vec![1, -1, 0, 2, 0],
        vec![1, 0, -1, 0, 2],
    ]);
    c.eq(&l, &expected, "reduced Laplacian entries");
    c.eq(linalg::determinant(&l).unwrap(), big(15), "det");
    let k = critical::critical_group_reduced(&b, 1, &tree).unwrap();
    c.eq(k.invariant_factors.clone(), vec![big(15)], "K_1 invariant factors");
    c.eq(k.free_rank, 0, "K_1 free rank");
}

fn criterion_2(c: &mut Checks) {
    let b = generators::bipyramid();
    let facets = b.faces(2).to_vec();
    let mut seen = Vec::new();
    let census = trees::enumerate_trees_with(&b, 2, trees::DEFAULT_BUDGET, |t| {
        seen.push(t.clone());
        ControlFlow::Continue(())
    })
    .unwrap();
    c.eq(census.count, 15, "tree count");
    c.check(census.all_torsion_free(), || "some tree has torsion".into());
    let allowed: HashSet<Vec<usize>> = (0..facets.len())
        .tuple_combinations()
        .filter(|&(x, y)| {
            let shared: Vec<u32> = facets[x].vertices().iter().copied().filter(|v| facets[y].contains(*v)).collect();
            !shared.contains(&4) && !shared.contains(&5)
        })
        .map(|(x, y)| (0..facets.len()).filter(|&z| z != x && z != y).collect())
        .collect();
    c.eq(allowed.len(), 15, "facet pairs avoiding vertices 4 and 5");
    let found: HashSet<Vec<usize>> = seen.iter().map(|t| t.top_faces().to_vec()).collect();
    c.check(found == allowed, || "trees are not exactly the allowed two-facet deletions".into());
    c.eq(census.tau.clone(), big(15), "tau_2");
    let k1 = critical::critical_group_direct(&b, 1).unwrap();
    c.eq(census.tau, k1.order(), "tau_2 = |K_1|");
}

fn criterion_3(c: &mut Checks, rng: &mut ChaCha8Rng) {
    let mut fixtures = common::fixtures();
    for j in 0..20 {
        fixtures.push((format!("random graph {j}"), common::random_connected_graph(rng, 7, 0.35)));
    }
    let mut with_three = 0;
    for (name, cx) in &fixtures {
        for i in 0..cx.dim() {
            let direct = critical::critical_group_direct(cx, i).unwrap();
            let found = trees::torsion_free_trees(cx, i, 3).unwrap();
            c.check(!found.is_empty(), || format!("{name}: no torsion-free {i}-tree"));
            with_three += usize::from(found.len() >= 3);
            for t in &found {
                let reduced = critical::critical_group_reduced(cx, i, t).unwrap();
                c.check(reduced == direct, || format!("{name}, i = {i}: reduced {reduced} vs direct {direct}"));
            }
        }
    }
    c.check(with_three > 0, || "no fixture had three torsion-free trees".into());
}

fn criterion_4(c: &mut Checks) {
    for d in 1..=3u32 {
        let s = generators::sphere(d).unwrap();
        let k = critical::critical_group_direct(&s, d as isize - 1).unwrap();
        c.check(k.is_cyclic() && k.is_finite(), || format!("d = {d}: K_{} = {k} is not finite cyclic", d - 1));
        c.eq(k.order(), big(i64::from(d) + 2), &format!("d = {d}: |K_{}|", d - 1));
    }
    for n in 3..=8u32 {
        let cn = generators::cycle(n).unwrap();
        let k = critical::critical_group_direct(&cn, 0).unwrap();
        c.eq(k.invariant_factors, vec![big(n.into())], &format!("K_0(C_{n})"));
    }
}

fn criterion_5(c: &mut Checks) {
    for n in 4..=6u32 {
        let kn = generators::complete_graph(n).unwrap();
        let k = critical::critical_group_direct(&kn, 0).unwrap();
        c.eq(k.invariant_factors, vec![big(n.into()); n as usize - 2], &format!("K_0(K_{n})"));
    }
    for n in 4..=5u32 {
        let census = trees::enumerate_trees(&generators::complete_graph(n).unwrap(), 1, &EnumerationOptions::default()).unwrap();
        c.eq(census.tau, BigInt::from(n).pow(n - 2), &format!("tau_1(K_{n})"));
    }
    for (n, k) in [(4, 1), (5, 1), (5, 2)] {
        let r = critical::verify_simplex_structure(n, k).unwrap();
        c.check(r.block_diagonal, || format!("({n},{k}): A Aᵀ is not block diagonal"));
        c.check(r.cyclic_n, || format!("({n},{k}): some K is not a sum of Z/{n}"));
        c.eq(r.maxwell_copies(), Some(r.expected_copies as usize), &format!("({n},{k}): copies of Z/n in coker A"));
        c.check(r.claimed_identity, || {
            format!(
                "({n},{k}): coker(A Aᵀ) = {} but K_{} ⊕ K_{} = {} ⊕ {} (coker(A Aᵀ) = K_{} twice: {})",
                r.coker_aat,
                k - 1,
                k,
                r.k_lower,
                r.k_upper,
                k - 1,
                r.doubled_identity
            )
        });
    }
}

fn criterion_6(c: &mut Checks) {
    let fixtures = [
        ("bipyramid", generators::bipyramid()),
        ("boundary of the 3-simplex", generators::sphere(2).unwrap()),
        ("2-skeleton of the 5-simplex", generators::simplex_skeleton(5, 2).unwrap()),
    ];
    for (name, cx) in &fixtures {
        for i in 1..=2 {
            let r = trees::verify_smtt(cx, i, &EnumerationOptions::default()).unwrap();
            c.check(r.product_identity, || format!("{name}, i = {i}: π τ identity fails ({r:?})"));
            c.check(r.determinant_identity, || format!("{name}, i = {i}: determinant identity fails ({r:?})"));
            c.check(!r.partial, || format!("{name}, i = {i}: enumeration was partial"));
        }
        // K_i needs i < d = 2
        for i in 0..=1 {
            let k = critical::critical_group_direct(cx, i).unwrap();
            let q = critical::alternating_order(cx, i).unwrap();
            c.eq(q, BigRational::from_integer(k.order()), &format!("{name}, i = {i}: alternating product vs |K_i|"));
        }
    }
}

fn criterion_7(c: &mut Checks) {
    let cx = generators::simplex_skeleton(6, 2).unwrap();
    let census = trees::enumerate_trees(&cx, 2, &EnumerationOptions::default()).unwrap();
    c.check(!census.partial, || "enumeration hit the budget".into());
    c.eq(census.tau.clone(), big(46656), "tau_2");
    c.check(census.torsion_histogram.contains_key(&big(2)), || format!("histogram {:?} has no torsion 2", census.torsion_histogram));
}

fn random_configuration(cx: &SimplicialComplex, i: isize, rng: &mut ChaCha8Rng) -> Configuration {
    Configuration::from_ints(cx, i, (0..cx.num_faces(i)).map(|_| rng.gen_range(-5i64..=5))).unwrap()
}

fn criterion_8(c: &mut Checks, rng: &mut ChaCha8Rng) {
    for (name, cx) in common::fixtures() {
        for i in 0..cx.dim() {
            let mut conf = random_configuration(&cx, i, rng);
            let start = conf.clone();
            let tree = trees::find_torsion_free_tree(&cx, i).unwrap();
            let coords = GroupCoordinates::new(&cx, &tree).unwrap();
            let theta: Vec<BigInt> = (0..tree.complement(&cx).len()).map(|_| BigInt::from(rng.gen_range(-4..=4))).collect();
            let mut flow_conf = flow::extend_to_conservative(&cx, &tree, &theta).unwrap();
            let class = coords.to_group_element(&cx, &flow_conf).unwrap();
            for _ in 0..100 {
                let k = rng.gen_range(0..cx.num_faces(i));
                conf = flow::fire_index(&cx, &conf, k).unwrap();
                flow_conf = flow::fire_index(&cx, &flow_conf, k).unwrap();
            }
            c.check(flow::equivalent(&cx, &start, &conf).unwrap(), || format!("{name}, i = {i}: firing changed the class"));
            c.check(coords.to_group_element(&cx, &flow_conf).unwrap() == class, || format!("{name}, i = {i}: firing changed the coordinates"));

            let zero = flow::extend_to_conservative(&cx, &tree, &vec![BigInt::zero(); theta.len()]).unwrap();
            c.check(zero.values.iter().all(Zero::is_zero), || format!("{name}, i = {i}: zero extension is nonzero"));
            let other: Vec<BigInt> = (0..theta.len()).map(|_| BigInt::from(rng.gen_range(-4..=4))).collect();
            let sum: Vec<BigInt> = theta.iter().zip(&other).map(|(a, b)| a + b).collect();
            let x = flow::extend_to_conservative(&cx, &tree, &theta).unwrap();
            let y = flow::extend_to_conservative(&cx, &tree, &other).unwrap();
            let xy = flow::extend_to_conservative(&cx, &tree, &sum).unwrap();
            c.check(flow::is_conservative(&cx, &x).unwrap(), || format!("{name}, i = {i}: extension not conservative"));
            c.check(&x + &y == xy, || format!("{name}, i = {i}: extension is not linear"));
            c.check(x.restrict(&tree.complement(&cx)) == theta, || format!("{name}, i = {i}: extension changed θ"));
        }
    }

    for n in 3..=6u32 {
        let cx = generators::complete_graph(n).unwrap();
        let g = ChipGraph::new(&cx, 1).unwrap();
        for _ in 0..5 {
            let chips: Vec<u64> = g.degrees().iter().map(|d| rng.gen_range(0..3 * d)).collect();
            let s = g.state(chips).unwrap();
            let reference = s.stabilize();
            for _ in 0..100 {
                let scrambled = s.stabilize_by(|ready| *ready.choose(rng).unwrap());
                c.check(scrambled == reference, || format!("K_{n}: stabilization depends on firing order"));
            }
        }
    }

    let mut counted: Vec<(String, ChipGraph)> = (3..=6u32)
        .map(|n| (format!("C_{n}"), ChipGraph::new(&generators::cycle(n).unwrap(), 1).unwrap()))
        .collect();
    counted.push(("K_4".into(), ChipGraph::new(&generators::complete_graph(4).unwrap(), 1).unwrap()));
    for (name, g) in &counted {
        let k0 = critical::critical_group_direct(&g_complex(name), 0).unwrap();
        let count = g.critical_states().len();
        c.eq(BigInt::from(count), k0.order(), &format!("{name}: critical states vs |K_0|"));
    }

    let c5 = generators::cycle(5).unwrap();
    let g = ChipGraph::new(&c5, 1).unwrap();
    let bound = 2 * g.degrees().iter().max().unwrap();
    let vectors: Vec<Vec<u64>> = g.degrees().iter().map(|_| 0..=bound).multi_cartesian_product().collect();
    let mut reps: HashMap<Vec<u64>, ChipState<'_>> = HashMap::new();
    let mut rep = |chips: Vec<u64>| -> ChipState<'_> {
        reps.entry(chips.clone()).or_insert_with(|| g.state(chips).unwrap().critical_representative()).clone()
    };
    let singles: Vec<(ChipState<'_>, GroupElement)> = vectors
        .iter()
        .map(|v| {
            let r = rep(v.clone());
            let e = r.to_group_element();
            (r, e)
        })
        .collect();
    let mut law_holds = true;
    for (a, (ra, ea)) in vectors.iter().zip(&singles) {
        for (b, (rb, eb)) in vectors.iter().zip(&singles) {
            let lhs = rep(ra.combine(rb).chips().to_vec());
            let sum: Vec<u64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
            let rhs = rep(sum);
            law_holds &= lhs == rhs && lhs.to_group_element() == ea + eb;
        }
    }
    c.check(law_holds, || "C_5: [c] + [c'] != [c + c'] for some pair".into());
}

fn g_complex(name: &str) -> SimplicialComplex {
    match name.strip_prefix("C_") {
        Some(n) => generators::cycle(n.parse().unwrap()).unwrap(),
        None => generators::complete_graph(4).unwrap(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> IntegerMatrix {
    IntegerMatrix::from_fn(rows, cols, |_, _| BigInt::from(rng.gen_range(-9i64..=9)))
}

fn criterion_9(c: &mut Checks, rng: &mut ChaCha8Rng) {
    for _ in 0..500 {
        let (rows, cols) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let a = random_matrix(rng, rows, cols);
        let s = linalg::smith_normal_form(&a);
        let ok = &(s.left() * &a) * s.right() == s.diagonal()
            && linalg::determinant(s.left()).unwrap().abs().is_one()
            && linalg::determinant(s.right()).unwrap().abs().is_one()
            && s.invariant_factors().windows(2).all(|w| (&w[1] % &w[0]).is_zero())
            && s.invariant_factors().iter().all(|d| d.is_positive());
        c.check(ok, || format!("SNF fails on {a:?}"));
    }
    for _ in 0..200 {
        let (rows, cols) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = random_matrix(rng, rows, cols);
        let left = linalg::pseudo_determinant(&(&m * &m.transpose())).unwrap();
        let right = linalg::pseudo_determinant(&(&m.transpose() * &m)).unwrap();
        c.check(left == right, || format!("pseudo-determinants differ on {m:?}"));
    }
    let l = critical::laplacian(&generators::bipyramid(), 1, LaplacianKind::UpDown).unwrap();
    c.check(linalg::pseudo_determinant(&l).unwrap() == big(1125), || "π_2 of the bipyramid".into());
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(20240611);
    type Runner<'a> = Box<dyn FnMut(&mut Checks) + 'a>;
    let mut rng3 = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut rng8 = ChaCha8Rng::seed_from_u64(rng.gen());
    let mut rng9 = ChaCha8Rng::seed_from_u64(rng.gen());
    let criteria: Vec<(u32, &str, Runner<'_>)> = vec![
        (1, "bipyramid reduced Laplacian, det 15, K_1 = Z/15", Box::new(criterion_1)),
        (2, "bipyramid 2-tree census: 15 torsion-free two-facet deletions, tau_2 = |K_1| = 15", Box::new(criterion_2)),
        (3, "reduced and direct critical groups agree on every fixture and tree", Box::new(|c: &mut Checks| criterion_3(c, &mut rng3))),
        (4, "spheres: K_{d-1} cyclic of order d+2 (d = 1..3); K_0(C_n) = Z/n (n = 3..8)", Box::new(criterion_4)),
        (5, "simplex skeleta: K_0(K_n), Cayley counts, Maxwell structure for (4,1), (5,1), (5,2)", Box::new(criterion_5)),
        (6, "both matrix-tree identities at i = 1, 2 and the alternating product", Box::new(criterion_6)),
        (7, "6-vertex 2-skeleton: tau_2 = 46656 with torsion-2 trees", Box::new(criterion_7)),
        (8, "flow and chip-firing properties", Box::new(|c: &mut Checks| criterion_8(c, &mut rng8))),
        (9, "SNF reconstruction on 500 matrices, pseudo-determinants on 200", Box::new(|c: &mut Checks| criterion_9(c, &mut rng9))),
    ];
    let mut unexpected = 0;
    for (id, title, mut run) in criteria {
        let mut checks = Checks::new();
        let started = Instant::now();
        run(&mut checks);
        let passed = checks.failures.is_empty();
        let known = KNOWN_FAILURES.contains(&id);
        println!(
            "criterion {id}: {} [{} checks, tolerance 0 (exact), {:.1}s] {title}{}",
            if passed { "PASS" } else { "FAIL" },
            checks.count,
            started.elapsed().as_secs_f64(),
            if !passed && known { " (known failure, see README)" } else { "" }
        );
        for f in &checks.failures {
            println!("    {f}");
        }
        if !passed && !known {
            unexpected += 1;
        }
        if passed && known {
            println!("    criterion {id} is listed as a known failure but passed");
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected failure(s)");
        std::process::exit(1);
    }
}
