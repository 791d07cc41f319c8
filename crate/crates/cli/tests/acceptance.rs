// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use sunny_core::collapse::{
    group_verdicts, neighborhood_collapse, verify_collapse, CollapseSequence, ElementaryStep,
};
use sunny_core::complex::{maximal_simplexes, staircase_product};
use sunny_core::fixtures::{generate, kuhn_cube, EXAMPLES};
use sunny_core::homotopy::{pipeline, HomotopyMode, PipelineOutput, RunConfig};
use sunny_core::maps::PlMap;
use sunny_core::rational::{int, rat, zero};
use sunny_core::shadow::{interior, witness_is_sound, ShadowContext, ShadowMode};
use sunny_core::subdivide::{
    barycentric_subdivision, derived, derived_neighborhood, DerivationSchedule, DerivedComplex,
};
use sunny_core::{Complex, Point, Rational, Simplex, Subcomplex};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { ok, detail }
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let pass = o.ok && el <= budget;
    println!(
        "[{}] criterion {id:>2} {name}: {} ({:.1}s, budget {}s)",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        el.as_secs_f64(),
        budget.as_secs()
    );
    pass
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Standard simplex: origin and unit vectors of R^d.
fn standard_simplex(d: usize) -> Complex {
    let mut pts = vec![vec![zero(); d]];
    for i in 0..d {
        let mut p = vec![zero(); d];
        p[i] = int(1);
        pts.push(p);
    }
    Complex::build(pts, &[(0..=d).collect()]).unwrap()
}

fn second_derived(k: &Complex) -> DerivedComplex {
    let first = barycentric_subdivision(k);
    first.then(&barycentric_subdivision(&first.result))
}

fn subdivision_counts() -> Outcome {
    let mut bad = Vec::new();
    for d in 1..=4 {
        let k = standard_simplex(d);
        let b = barycentric_subdivision(&k).result.count_dim(d as isize);
        let s = staircase_product(&k)
            .unwrap()
            .total
            .count_dim(d as isize + 1);
        if b != factorial(d + 1) || s != d + 1 {
            bad.push(format!("d={d}: {b}, {s}"));
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "d = 1..4 exact".into()
        } else {
            bad.join("; ")
        },
    )
}

fn abs(r: Rational) -> Rational {
    if r < zero() {
        -r
    } else {
        r
    }
}

// shoelace, and L1 length for edges: both additive under subdivision
fn measure(k: &Complex, s: &Simplex) -> Rational {
    let p: Vec<&Point> = s.vertices().iter().map(|&v| k.coords(v)).collect();
    match p.len() {
        2 => abs(&p[1][0] - &p[0][0]) + abs(&p[1][1] - &p[0][1]),
        3 => {
            let det = (&p[1][0] - &p[0][0]) * (&p[2][1] - &p[0][1])
                - (&p[2][0] - &p[0][0]) * (&p[1][1] - &p[0][1]);
            abs(det) / int(2)
        }
        _ => unreachable!(),
    }
}

fn random_two_complex(rng: &mut ChaCha8Rng) -> Complex {
    let grid = kuhn_cube(2, 3).unwrap();
    let coords: Vec<Point> = grid
        .vertices()
        .iter()
        .map(|p| {
            p.iter()
                .map(|c| c + rat(rng.gen_range(-2..=2), 16))
                .collect()
        })
        .collect();
    let mut tris: Vec<Simplex> = grid.facets();
    tris.shuffle(rng);
    let keep = rng.gen_range(1..=tris.len().min(18));
    let mut facets: Vec<Vec<usize>> = tris[..keep].iter().map(|s| s.vertices().to_vec()).collect();
    let used: Subcomplex = Subcomplex::closure(&tris[..keep]);
    let spare: Vec<&Simplex> = grid
        .simplexes()
        .iter()
        .filter(|s| s.len() == 2 && !used.contains(s))
        .collect();
    let extra = rng.gen_range(0..=2usize);
    for e in spare.choose_multiple(rng, extra) {
        if facets.len() < 20 {
            facets.push(e.vertices().to_vec());
        }
    }
    Complex::build(coords, &facets).unwrap()
}

fn random_schedule(k: &Complex, rng: &mut ChaCha8Rng) -> DerivationSchedule {
    k.simplexes()
        .iter()
        .filter(|s| s.len() > 1)
        .map(|s| {
            let w: Vec<i64> = (0..s.len()).map(|_| rng.gen_range(1..=7)).collect();
            let tot: i64 = w.iter().sum();
            let w: Vec<Rational> = w.iter().map(|&x| rat(x, tot)).collect();
            (s.clone(), k.point_in(s, &w))
        })
        .collect()
}

fn realization_preserved() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = 0;
    let mut checked = 0;
    for _ in 0..100 {
        let k = random_two_complex(&mut rng);
        let d = derived(&k, &random_schedule(&k, &mut rng)).unwrap();
        for s in k.simplexes().iter().filter(|s| s.len() >= 2) {
            let sum: Rational = d
                .result
                .simplexes()
                .iter()
                .filter(|r| r.len() == s.len() && &d.carrier[*r] == s)
                .map(|r| measure(&d.result, r))
                .sum();
            checked += 1;
            if sum != measure(&k, s) {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{checked} simplexes, {failures} mismatches"),
    )
}

/// All barycentric points of a simplex with denominator `n`, optionally interior only.
fn grid_weights(len: usize, n: i64, open: bool) -> Vec<Vec<Rational>> {
    fn rec(len: usize, left: i64, lo: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if len == 1 {
            if left >= lo {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for c in lo..=left {
            cur.push(c);
            rec(len - 1, left - c, lo, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, n, if open { 1 } else { 0 }, &mut Vec::new(), &mut out);
    out.into_iter()
        .map(|w| w.into_iter().map(|c| rat(c, n)).collect())
        .collect()
}

fn overshadow_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut violations, mut grid_hits, mut positives) = (0, 0, 0);
    for _ in 0..200 {
        let target = rng.gen_range(2..=5);
        let la = rng.gen_range(1..=3);
        let lb = rng.gen_range(1..=3);
        let n = la + lb;
        let coords: Vec<Point> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { int(1) } else { zero() })
                    .collect()
            })
            .collect();
        let a = Simplex::new((0..la).collect());
        let b = Simplex::new((la..n).collect());
        let k = Complex::build(coords, &[a.vertices().to_vec(), b.vertices().to_vec()]).unwrap();
        let images: Vec<Point> = (0..n)
            .map(|_| (0..target).map(|_| int(rng.gen_range(0..=2))).collect())
            .collect();
        let f = PlMap::new(k, images).unwrap();
        let labels = vec![0; n];
        let ctx = ShadowContext::new(&f, &labels, ShadowMode::Plain);
        let open_b = rng.gen_bool(0.5);
        let fact = ctx.overshadows(&a, &b, open_b);
        let q = target - 1;
        let ia: Vec<Point> = grid_weights(la, 6, false)
            .iter()
            .map(|w| f.at(&a, w))
            .collect();
        let ib: Vec<Point> = grid_weights(lb, 6, open_b)
            .iter()
            .map(|w| f.at(&b, w))
            .collect();
        let grid = ia
            .iter()
            .any(|x| ib.iter().any(|y| x[..q] == y[..q] && x[q] > y[q]));
        grid_hits += grid as usize;
        positives += fact.verdict as usize;
        if grid && !fact.verdict {
            violations += 1;
        }
        if fact.verdict && !witness_is_sound(&f, &fact) {
            violations += 1;
        }
    }
    outcome(
        violations == 0,
        format!("200 pairs, {grid_hits} grid witnesses, {positives} positive verdicts, {violations} violations"),
    )
}

/// Random expansions from vertex 0 inside the 7-simplex; returns the complex
/// and the reversed expansions as a collapse onto the vertex.
fn random_collapsible(rng: &mut ChaCha8Rng) -> (Complex, CollapseSequence) {
    let n = 8;
    let mut k: BTreeSet<Simplex> = [Simplex::vertex(0)].into();
    let mut steps = Vec::new();
    let want = rng.gen_range(1..=25);
    let mut tries = 0;
    while steps.len() < want && tries < 20_000 {
        tries += 1;
        let size = rng.gen_range(2..=4);
        let mut vs: Vec<usize> = (0..n).collect();
        vs.shuffle(rng);
        let sigma = Simplex::new(vs[..size].to_vec());
        if k.contains(&sigma) {
            continue;
        }
        let missing: Vec<Simplex> = sigma
            .facets()
            .into_iter()
            .filter(|t| !k.contains(t))
            .collect();
        if missing.len() != 1 {
            continue;
        }
        k.insert(missing[0].clone());
        k.insert(sigma.clone());
        steps.push(ElementaryStep {
            coface: sigma,
            free_face: missing[0].clone(),
        });
    }
    steps.reverse();
    let coords: Vec<Point> = (0..n)
        .map(|i| {
            (0..n - 1)
                .map(|j| if i == j + 1 { int(1) } else { zero() })
                .collect()
        })
        .collect();
    let facets: Vec<Vec<usize>> = maximal_simplexes(&k)
        .iter()
        .map(|s| s.vertices().to_vec())
        .collect();
    let cx = Complex::build(coords, &facets).unwrap();
    let mut seq = CollapseSequence::empty(cx.as_subcomplex());
    seq.push_group("expansions", steps);
    (cx, seq)
}

fn neighborhood_property() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut total_steps = 0;
    for trial in 0..100 {
        let (k, seq) = random_collapsible(&mut rng);
        let kpp = second_derived(&k);
        let nv = derived_neighborhood(&kpp, &seq.from).unwrap();
        let nw = derived_neighborhood(&kpp, &seq.to).unwrap();
        match neighborhood_collapse(&kpp, &seq) {
            Ok(out) => {
                total_steps += out.steps.len();
                let c = verify_collapse(&out, &nv, &nw);
                if !c.ok || out.from != nv || out.to != nw {
                    failures.push(format!("#{trial}: {:?}", c.reason));
                }
            }
            Err(e) => failures.push(format!("#{trial}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "100 pairs, {total_steps} derived steps, failures {:?}",
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

struct Fixture {
    name: &'static str,
    mode: HomotopyMode,
    input: sunny_core::homotopy::PipelineInput,
    cfg: RunConfig,
    out: Result<PipelineOutput, String>,
    time: Duration,
}

fn run_fixture(name: &'static str, seed: u64) -> Fixture {
    let (input, mode) = generate(name, seed).unwrap();
    let cfg = RunConfig::new(mode.clone(), seed);
    let t = Instant::now();
    let out = pipeline(&input, &cfg).map_err(|e| e.to_string());
    Fixture {
        name,
        mode,
        input,
        cfg,
        out,
        time: t.elapsed(),
    }
}

/// Whether PL paths (on one common time axis) pass through a common point.
fn paths_meet(paths: &[sunny_core::homotopy::PlPath]) -> bool {
    let mut times: Vec<Rational> = paths.iter().flat_map(|p| p.times.iter().cloned()).collect();
    times.sort();
    times.dedup();
    for w in times.windows(2) {
        let (t0, t1) = (&w[0], &w[1]);
        let a: Vec<Point> = paths.iter().map(|p| p.at(t0)).collect();
        let b: Vec<Point> = paths.iter().map(|p| p.at(t1)).collect();
        // s in [0,1] with a_0 + s (b_0 - a_0) = a_k + s (b_k - a_k) for all k
        let (mut lo, mut hi) = (zero(), int(1));
        let mut empty = false;
        for k in 1..paths.len() {
            for c in 0..a[0].len() {
                let d0 = &a[0][c] - &a[k][c];
                let d1 = &b[0][c] - &b[k][c];
                let slope = &d1 - &d0;
                if slope == zero() {
                    empty |= d0 != zero();
                } else {
                    let s = -d0 / slope;
                    if s > lo {
                        lo = s.clone();
                    }
                    if s < hi {
                        hi = s;
                    }
                }
            }
        }
        if !empty && lo <= hi {
            return true;
        }
    }
    false
}

/// Exact check that no `arity` components of a dim-0 level map share a point.
fn components_disjoint(out: &PipelineOutput, arity: usize) -> bool {
    let phi = &out.phi;
    let verts: Vec<usize> = (0..phi.base.num_vertices()).collect();
    let paths: Vec<_> = verts
        .iter()
        .map(|&v| phi.vertical_path(phi.base.coords(v)).unwrap())
        .collect();
    let n = verts.len();
    let mut idx = vec![0usize; arity];
    fn next(
        idx: &mut [usize],
        n: usize,
        i: usize,
        start: usize,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if i == idx.len() {
            return f(idx);
        }
        for v in start..n {
            idx[i] = v;
            if !next(idx, n, i + 1, v + 1, f) {
                return false;
            }
        }
        true
    }
    next(&mut idx, n, 0, 0, &mut |c: &[usize]| {
        let labels: BTreeSet<usize> = c.iter().map(|&v| phi.labels[v]).collect();
        labels.len() < c.len()
            || !paths_meet(&c.iter().map(|&v| paths[v].clone()).collect::<Vec<_>>())
    })
}

/// Phi(., 0) and Phi(., 1) against the level 0 and 1 restrictions of the
/// perturbed F; also the largest move of the perturbation on those levels.
fn endpoints_match(
    input: &sunny_core::homotopy::PipelineInput,
    out: &PipelineOutput,
) -> (bool, Rational) {
    let phi = &out.phi;
    let q = phi.q_dim();
    let mut ok = phi.reversed;
    let mut moved = zero();
    for v in 0..phi.base.num_vertices() {
        let x = phi.base.coords(v).clone();
        for t in [zero(), int(1)] {
            let mut y = x.clone();
            y.push(t.clone());
            let mut want = out.f.evaluate(&y).unwrap();
            want.truncate(q);
            want.push(t.clone());
            ok &= phi.eval(&x, &t).unwrap() == want;
            let given = input.f.evaluate(&y).unwrap();
            for c in 0..q {
                let d = abs(&given[c] - &want[c]);
                if d > moved {
                    moved = d;
                }
            }
        }
        for k in 0..=8 {
            let t = rat(k, 8);
            ok &= phi.eval(&x, &t).unwrap().last() == Some(&t);
        }
    }
    (ok, moved)
}

fn seeded_runs(
    name: &'static str,
    count: u64,
    check: impl Fn(&Fixture, &PipelineOutput) -> bool,
) -> (usize, Duration, Vec<String>) {
    let mut passed = 0;
    let mut worst = Duration::ZERO;
    let mut notes = Vec::new();
    for seed in 0..count {
        let fx = run_fixture(name, seed);
        worst = worst.max(fx.time);
        match &fx.out {
            Ok(out) if check(&fx, out) => passed += 1,
            Ok(out) => notes.push(format!("seed {seed}: {:?}", out.report.failures)),
            Err(e) => notes.push(format!("seed {seed}: {e}")),
        }
    }
    (passed, worst, notes)
}

/// On the stable host `K''` of the two-circle run: whenever `W` contains the
/// link shadow of `V`, no simplex outside `Int N(W)` is link-overshadowed by `N(V)`.
fn neighbourhood_shadows(out: &PipelineOutput) -> Outcome {
    let base = &out.sunny.map;
    let ctx = ShadowContext::new(base, &out.sunny.labels, ShadowMode::Link);
    let kpp = &out.stable.lag.derived;
    let ctx2 = ShadowContext::new(&out.stable.map, &out.stable.labels, ShadowMode::Link);
    let facets = base.source.facets();
    let all2 = kpp.result.simplexes();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut failures, mut pairs, mut inside) = (0, 0, 0);
    for trial in 0..100 {
        let pick: Vec<&Simplex> = facets.iter().filter(|_| rng.gen_bool(0.3)).collect();
        let v = Subcomplex::closure(pick);
        let mut w_gen: Vec<Simplex> = v.facets();
        for b in base.source.simplexes() {
            if v.facets()
                .iter()
                .any(|a| ctx.may_overshadow(a, b) && ctx.overshadows(a, b, false).verdict)
            {
                w_gen.push(b.clone());
            }
        }
        w_gen.extend(facets.iter().filter(|_| rng.gen_bool(0.15)).cloned());
        let w = Subcomplex::closure(&w_gen);
        let nv = derived_neighborhood(kpp, &v).unwrap();
        let nw = derived_neighborhood(kpp, &w).unwrap();
        let int_w = interior(all2, &nw);
        let sources = nv.facets();
        for b in all2.iter() {
            let outside = !int_w.contains(b);
            // shadows inside are only counted on a few trials, to show the check bites
            if !outside && trial >= 10 {
                continue;
            }
            for a in &sources {
                if ctx2.may_overshadow(a, b) {
                    pairs += 1;
                    if ctx2.overshadows(a, b, true).verdict {
                        if outside {
                            failures += 1;
                        } else {
                            inside += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(failures == 0 && inside > 0, format!("100 (V, W), {pairs} decided pairs, {inside} shadowed simplexes inside Int N(W) (first 10), {failures} outside"))
}

fn sunny_certified(fixtures: &[Fixture]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for fx in fixtures {
        let good = match &fx.out {
            Ok(out) => {
                let s = &out.sunny;
                let ctx = ShadowContext::new(&s.map, &s.labels, fx.mode.shadow_mode());
                let replay = verify_collapse(&s.seq, &s.map.source.as_subcomplex(), &s.seq.to).ok;
                let certs = group_verdicts(&ctx, &s.seq, false).unwrap();
                let attached = s
                    .seq
                    .groups
                    .iter()
                    .all(|g| g.certificate.as_ref().is_some_and(|c| c.verdict));
                replay && certs.iter().all(|&c| c) && attached && fx.time <= secs(120)
            }
            Err(_) => false,
        };
        ok &= good;
        notes.push(format!(
            "{} {}",
            fx.name,
            if good { "ok" } else { "FAILED" }
        ));
    }
    outcome(ok, notes.join(", "))
}

fn stable_certified(fixtures: &[Fixture]) -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    let mut nonvacuous = Vec::new();
    for fx in fixtures {
        let Ok(out) = &fx.out else {
            ok = false;
            notes.push(format!("{} pipeline failed", fx.name));
            continue;
        };
        let mode = fx.mode.shadow_mode();
        let st = &out.stable;
        let ctx = ShadowContext::new(&st.map, &st.labels, mode.clone());
        let good = verify_collapse(&st.seq, &st.seq.from, &st.seq.to).ok
            && group_verdicts(&ctx, &st.seq, true)
                .unwrap()
                .iter()
                .all(|&c| c)
            && fx.time <= secs(300);
        ok &= good;
        let s = &out.sunny;
        let raw = ShadowContext::new(&s.map, &s.labels, mode);
        if group_verdicts(&raw, &s.seq, true)
            .unwrap()
            .iter()
            .any(|&c| !c)
        {
            nonvacuous.push(fx.name);
        }
        notes.push(format!(
            "{} {}",
            fx.name,
            if good { "ok" } else { "FAILED" }
        ));
    }
    let ok = ok && !nonvacuous.is_empty();
    outcome(
        ok,
        format!(
            "{}; unstabilized fails stable check on {:?}",
            notes.join(", "),
            nonvacuous
        ),
    )
}

fn two_points_runs() -> Outcome {
    let (passed, worst, notes) = seeded_runs("two-points-3cube", 25, |fx, out| {
        let r = &out.report;
        let (ends, _) = endpoints_match(&fx.input, out);
        r.passed()
            && r.level_ok
            && r.exact
            && r.disjoint_ok
            && r.endpoints_ok
            && ends
            && components_disjoint(out, 2)
    });
    outcome(
        passed == 25 && worst <= secs(60),
        format!(
            "{passed}/25, slowest {:.1}s {:?}",
            worst.as_secs_f64(),
            notes
        ),
    )
}

fn doodle_runs() -> Outcome {
    let (passed, worst, notes) = seeded_runs("doodle-3arcs", 10, |_, out| {
        let r = &out.report;
        r.passed() && r.exact && r.disjoint_ok && components_disjoint(out, 3)
    });
    outcome(
        passed == 10 && worst <= secs(60),
        format!(
            "{passed}/10, slowest {:.1}s {:?}",
            worst.as_secs_f64(),
            notes
        ),
    )
}

fn eps_runs() -> Outcome {
    let (passed, worst, notes) = seeded_runs("eps-embedding", 10, |fx, out| {
        let r = &out.report;
        let HomotopyMode::Eps { eps } = &fx.mode else {
            return false;
        };
        if eps != &rat(1, 4) {
            return false;
        }
        let st = &out.stable;
        let ctx = ShadowContext::new(&st.map, &st.labels, fx.mode.shadow_mode());
        let certs = group_verdicts(&ctx, &st.seq, true)
            .unwrap()
            .iter()
            .all(|&c| c);
        certs && r.passed() && r.eps_trace_ok == Some(true) && r.eps_tuple_ok == Some(true)
    });
    outcome(
        passed == 10 && worst <= secs(120),
        format!(
            "{passed}/10, slowest {:.1}s {:?}",
            worst.as_secs_f64(),
            notes
        ),
    )
}

fn bundle_text(fx: &Fixture) -> String {
    let out = fx.out.as_ref().unwrap();
    serde_json::to_string_pretty(&sunny_core::bundle::Bundle::new(&fx.input, &fx.cfg, out)).unwrap()
}

fn two_circles_full(fx: &Fixture) -> Outcome {
    let out = match &fx.out {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let sing = !out.gp.singular_set.is_empty();
    let b = sunny_core::bundle::parse_bundle(&bundle_text(fx)).unwrap();
    let verified = sunny_core::bundle::verify_bundle(&b);
    let ok = sing && !out.sunny.blisters.is_empty() && out.report.passed() && verified.is_ok();
    outcome(
        ok,
        format!(
            "singular simplexes {}, blisters {}, stable steps {}, bundle {} (pipeline {:.1}s)",
            out.gp.singular_set.len(),
            out.sunny.blisters.len(),
            out.stable.seq.steps.len(),
            if verified.is_ok() {
                "verified"
            } else {
                "rejected"
            },
            fx.time.as_secs_f64()
        ),
    )
}

fn verify_exit(text: &str, tag: &str) -> i32 {
    let path = std::env::temp_dir().join(format!(
        "sunny-acceptance-{}-{tag}.json",
        std::process::id()
    ));
    std::fs::write(&path, text).unwrap();
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = sunny_cli::run(["sunny", "verify", path.to_str().unwrap()], &mut o, &mut e);
    let _ = std::fs::remove_file(&path);
    code
}

fn flip(v: &mut Value) {
    *v = Value::Bool(!v.as_bool().unwrap());
}

type Mutation = (&'static str, Box<dyn Fn(&mut Value)>);

fn mutations() -> Vec<Mutation> {
    let m = |name: &'static str, f: fn(&mut Value)| -> Mutation { (name, Box::new(f)) };
    vec![
        m("flip sunny group verdict", |b| {
            flip(&mut b["sunny"]["groups"][0]["certificate"]["verdict"])
        }),
        m("flip stable group verdict", |b| {
            flip(&mut b["stable"]["groups"][3]["certificate"]["verdict"])
        }),
        m("flip first sunny fact", |b| {
            flip(&mut b["sunny"]["groups"][0]["certificate"]["checked_pairs"][0]["verdict"])
        }),
        m("flip blister fact", |b| {
            flip(&mut b["sunny"]["groups"][1]["certificate"]["checked_pairs"][1]["verdict"])
        }),
        m("flip recursion fact", |b| {
            flip(&mut b["sunny"]["groups"][2]["certificate"]["checked_pairs"][0]["verdict"])
        }),
        m("flip stability flag", |b| {
            flip(&mut b["stable"]["groups"][0]["certificate"]["stable"])
        }),
        m("swap first and last sunny steps", |b| {
            let s = b["sunny"]["steps"].as_array_mut().unwrap();
            let n = s.len();
            s.swap(0, n - 1)
        }),
        m("reverse sunny steps", |b| {
            b["sunny"]["steps"].as_array_mut().unwrap().reverse()
        }),
        m("move last stable step to the front", |b| {
            let s = b["stable"]["steps"].as_array_mut().unwrap();
            let last = s.pop().unwrap();
            s.insert(0, last)
        }),
        m("drop a stable step", |b| {
            b["stable"]["steps"].as_array_mut().unwrap().remove(10);
        }),
        m("move a group boundary", |b| {
            let e = b["sunny"]["groups"][0]["end"].as_u64().unwrap();
            b["sunny"]["groups"][0]["end"] = Value::from(e - 1);
        }),
        m("invent a witness", |b| {
            let f = &mut b["sunny"]["groups"][0]["certificate"]["checked_pairs"][0];
            f["verdict"] = Value::Bool(true);
            f["witness"] = serde_json::json!({"first": ["0", "0", "1"], "second": ["0", "0", "0"]});
        }),
        m("attach witness to a negative fact", |b| {
            b["sunny"]["groups"][2]["certificate"]["checked_pairs"][0]["witness"] =
                serde_json::json!({"first": ["1/2", "0", "1/2"], "second": ["0", "0", "0"]});
        }),
        m("drop a checked pair", |b| {
            b["sunny"]["groups"][0]["certificate"]["checked_pairs"]
                .as_array_mut()
                .unwrap()
                .remove(0);
        }),
        m("flip reported disjointness", |b| {
            flip(&mut b["report"]["disjoint_ok"])
        }),
        m("flip reported level check", |b| {
            flip(&mut b["report"]["level_ok"])
        }),
        m("flip time reversal", |b| flip(&mut b["time_reversed"])),
        m("alter an endpoint image", |b| {
            b["f_end"][0][0] = Value::from("7/3")
        }),
        m("alter a blister vertex", |b| {
            let v = b["blisters"][0]["vertex"].as_u64().unwrap();
            b["blisters"][0]["vertex"] = Value::from(v + 1);
        }),
        m("alter a perturbed image", |b| {
            b["perturbed"][3][1] = Value::from("1/5")
        }),
    ]
}

fn tamper(fx: &Fixture) -> Outcome {
    if fx.out.is_err() {
        return outcome(false, "no bundle".into());
    }
    let text = bundle_text(fx);
    let base: Value = serde_json::from_str(&text).unwrap();
    let clean = verify_exit(&text, "clean");
    let mut missed = Vec::new();
    let muts = mutations();
    for (i, (name, f)) in muts.iter().enumerate() {
        let mut v = base.clone();
        f(&mut v);
        if v == base || verify_exit(&serde_json::to_string_pretty(&v).unwrap(), &i.to_string()) == 0
        {
            missed.push(*name);
        }
    }
    let rejected = muts.len() - missed.len();
    outcome(
        clean == 0 && missed.is_empty(),
        format!(
            "clean bundle exit {clean}, {rejected}/{} mutations rejected, missed {missed:?}",
            muts.len()
        ),
    )
}

fn main() {
    let fixtures: Vec<Fixture> = EXAMPLES.iter().map(|&name| run_fixture(name, 0)).collect();
    let circles = fixtures
        .iter()
        .find(|f| f.name == "two-circles-4cube")
        .expect("two-circle fixture");
    let results = [
        run(1, "subdivision counts", secs(1), subdivision_counts),
        run(2, "realization preserved", secs(30), realization_preserved),
        run(3, "overshadow oracle", secs(120), overshadow_oracle),
        run(
            4,
            "neighbourhood collapses",
            secs(300),
            neighborhood_property,
        ),
        run(
            5,
            "shadows of neighbourhoods",
            secs(300),
            || match &circles.out {
                Ok(out) => neighbourhood_shadows(out),
                Err(e) => outcome(false, e.clone()),
            },
        ),
        run(
            6,
            "sunny certificates",
            secs(120 * fixtures.len() as u64),
            || sunny_certified(&fixtures),
        ),
        run(
            7,
            "stable certificates",
            secs(300 * fixtures.len() as u64),
            || stable_certified(&fixtures),
        ),
        run(8, "two points end to end", secs(25 * 60), two_points_runs),
        run(9, "doodle end to end", secs(10 * 60), doodle_runs),
        run(10, "eps end to end", secs(10 * 120), eps_runs),
        run(
            11,
            "two circles full pipeline (slow)",
            secs(30 * 60),
            || two_circles_full(circles),
        ),
        run(12, "tamper resistance", secs(600), || tamper(circles)),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
