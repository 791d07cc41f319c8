use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sunny_core::collapse::{filtration_holds, verify_collapse};
use sunny_core::complex::staircase_product;
use sunny_core::fixtures::{generate, kuhn_cube};
use sunny_core::homotopy::{dims_of, pipeline, RunConfig};
use sunny_core::maps::{check_general_position, perturb_general_position, PerturbOptions, PlMap};
use sunny_core::rational::{int, rat, zero};
use sunny_core::shadow::{witness_is_sound, ShadowContext, ShadowMode};
use sunny_core::subdivide::{derived, lagging_second_derived};
use sunny_core::{Complex, Point, Rational, Simplex, Subcomplex};

fn grid_complex(picks: &[bool]) -> Complex {
    let grid = kuhn_cube(2, 2).unwrap();
    let mut facets: Vec<Vec<usize>> = grid
        .facets()
        .iter()
        .zip(picks)
        .filter(|(_, &p)| p)
        .map(|(s, _)| s.vertices().to_vec())
        .collect();
    if facets.is_empty() {
        facets.push(grid.facets()[0].vertices().to_vec());
    }
    Complex::build(grid.vertices().to_vec(), &facets).unwrap()
}

fn det3(p: &[&Point]) -> Rational {
    let d = |i: usize, c: usize| &p[i][c] - &p[0][c];
    d(1, 0) * (d(2, 1) * d(3, 2) - d(2, 2) * d(3, 1))
        - d(1, 1) * (d(2, 0) * d(3, 2) - d(2, 2) * d(3, 0))
        + d(1, 2) * (d(2, 0) * d(3, 1) - d(2, 1) * d(3, 0))
}

fn vol3(k: &Complex, s: &Simplex) -> Rational {
    let p: Vec<&Point> = s.vertices().iter().map(|&v| k.coords(v)).collect();
    let v = det3(&p);
    if v < zero() {
        -v
    } else {
        v
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn build_is_closed_and_idempotent(picks in proptest::collection::vec(any::<bool>(), 8)) {
        let k = grid_complex(&picks);
        prop_assert!(k.as_subcomplex().is_closed());
        let facets: Vec<Vec<usize>> = k.facets().iter().map(|s| s.vertices().to_vec()).collect();
        let again = Complex::build(k.vertices().to_vec(), &facets).unwrap();
        prop_assert_eq!(again.simplexes(), k.simplexes());
    }

    #[test]
    fn staircase_counts_and_projections(picks in proptest::collection::vec(any::<bool>(), 8)) {
        let k = grid_complex(&picks);
        let xp = staircase_product(&k).unwrap();
        let expected: usize = k.facets().iter().map(|s| s.len()).sum();
        let tops = xp.total.facets().len();
        prop_assert_eq!(tops, expected);
        prop_assert!(xp.check_projections());
        prop_assert!(xp.total.as_subcomplex().is_closed());
    }

    #[test]
    fn derived_tetrahedron_keeps_volume(w in proptest::collection::vec(1i64..9, 44)) {
        let k = Complex::build(
            vec![vec![zero(); 3], vec![int(1), zero(), zero()], vec![zero(), int(1), zero()], vec![zero(), zero(), int(1)]],
            &[vec![0, 1, 2, 3]],
        ).unwrap();
        let mut it = w.iter();
        let sched = k.simplexes().iter().filter(|s| s.len() > 1).map(|s| {
            let ws: Vec<i64> = (0..s.len()).map(|_| *it.next().unwrap()).collect();
            let tot: i64 = ws.iter().sum();
            (s.clone(), k.point_in(s, &ws.iter().map(|&x| rat(x, tot)).collect::<Vec<_>>()))
        }).collect();
        let d = derived(&k, &sched).unwrap();
        let top = Simplex::new(vec![0, 1, 2, 3]);
        let sum: Rational = d.result.simplexes().iter().filter(|s| s.len() == 4).map(|s| vol3(&d.result, s)).sum();
        prop_assert_eq!(sum, vol3(&k, &top));
        prop_assert_eq!(d.result.count_dim(3), 24);
    }

    #[test]
    fn overshadowing_witnesses_and_monotonicity(
        imgs in proptest::collection::vec(proptest::collection::vec(0i64..3, 3), 4),
        split in 1usize..4,
    ) {
        let coords: Vec<Point> = (0..4).map(|i| (0..4).map(|j| if i == j { int(1) } else { zero() }).collect()).collect();
        let a = Simplex::new((0..split).collect());
        let b = Simplex::new((split..4).collect());
        let k = Complex::build(coords, &[a.vertices().to_vec(), b.vertices().to_vec()]).unwrap();
        let f = PlMap::new(k, imgs.iter().map(|p| p.iter().map(|&c| int(c)).collect()).collect()).unwrap();
        let labels: Vec<usize> = (0..4).map(|v| (v >= split) as usize).collect();
        let plain = ShadowContext::new(&f, &labels, ShadowMode::Plain).overshadows(&a, &b, false);
        let link = ShadowContext::new(&f, &labels, ShadowMode::Link).overshadows(&a, &b, false);
        let wide = ShadowContext::new(&f, &labels, ShadowMode::Eps { eps: rat(1, 2) }).overshadows(&a, &b, false);
        let narrow = ShadowContext::new(&f, &labels, ShadowMode::Eps { eps: rat(1, 4) }).overshadows(&a, &b, false);
        for fact in [&plain, &link, &wide, &narrow] {
            prop_assert!(witness_is_sound(&f, fact));
        }
        prop_assert!(!link.verdict || plain.verdict);
        prop_assert!(!wide.verdict || narrow.verdict);
    }

    #[test]
    fn perturbation_keeps_heights(seed in 0u64..1000) {
        let (inp, _) = generate("two-points-3cube", seed).unwrap();
        let g = perturb_general_position(&inp.f, &inp.qp, dims_of(&inp), &PerturbOptions::new(rat(1, 16), seed)).unwrap();
        for (p, q) in g.images.iter().zip(&inp.f.images) {
            prop_assert_eq!(p.last(), q.last());
        }
        prop_assert!(check_general_position(&g, dims_of(&inp)).ok());
        prop_assert!(g.source.as_subcomplex().is_closed());
    }
}

#[test]
fn singular_set_is_closed() {
    for name in ["two-points-3cube", "two-circles-4cube", "doodle-3arcs"] {
        let (inp, _) = generate(name, 1).unwrap();
        let rep = check_general_position(&inp.f, dims_of(&inp));
        assert!(rep.singular_set.is_closed(), "{name}");
    }
}

#[test]
fn level_exactness_and_filtration() {
    let (inp, mode) = generate("two-points-3cube", 7).unwrap();
    let out = pipeline(&inp, &RunConfig::new(mode.clone(), 7)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let v = rng.gen_range(0..out.phi.base.num_vertices());
        let x = out.phi.base.coords(v).clone();
        let t = rat(rng.gen_range(0..=997), 997);
        assert_eq!(out.phi.eval(&x, &t).unwrap().last(), Some(&t));
    }
    let s = &out.sunny;
    assert!(verify_collapse(&s.seq, &s.seq.from, &s.seq.to).ok);
    let ctx = ShadowContext::new(&s.map, &s.labels, mode.shadow_mode());
    assert!(filtration_holds(&ctx, &s.seq).iter().all(|&h| h));
    let st = &out.stable;
    let ctx = ShadowContext::new(&st.map, &st.labels, mode.shadow_mode());
    assert!(filtration_holds(&ctx, &st.seq).iter().all(|&h| h));
    // nothing overshadows anything in the final stage
    let last: Subcomplex = st.seq.to.clone();
    let facets = last.facets();
    for a in &facets {
        for b in last.iter() {
            assert!(!ctx.may_overshadow(a, b) || !ctx.overshadows(a, b, true).verdict);
        }
    }
}

#[test]
fn lagging_centres_are_shifted_mean_heights() {
    let (inp, mode) = generate("two-circles-4cube", 0).unwrap();
    let out = pipeline(&inp, &RunConfig::new(mode, 0)).unwrap();
    let f = &out.sunny.map;
    let shift = rat(1, 100);
    let lag = lagging_second_derived(f, &shift).unwrap();
    for s in f.source.simplexes() {
        let mean: Rational = s
            .vertices()
            .iter()
            .map(|&v| f.height(v).clone())
            .sum::<Rational>()
            / int(s.len() as i64);
        assert_eq!(lag.center_value[s], mean + &shift);
    }
    for b in &out.sunny.blisters {
        assert!(b.j.is_closed() && b.k.is_subset_of(&b.j) && b.l.is_subset_of(&b.j));
    }
}
