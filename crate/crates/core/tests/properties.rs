use lipfree::c0_embed::{build_net_index, check_net, verify_sandwich};
use lipfree::free_norm::{evaluate, free_norm, FreeVector};
use lipfree::generate::{
    random_function, random_line, random_plane, random_ultrametric, random_vector,
};
use lipfree::lipschitz::{
    flatness_at_scale, lip_constant, pointwise_max, pointwise_min, tail_flatness, LipFunction,
};
use lipfree::metric::{
    accumulation_derivative, accumulation_kernel, annulus, four_point_property, is_ultrametric,
    validate_metric, PointSet, PointedMetricSpace,
};
use lipfree::separator::{proper_separator, ultrametric_separator, EQUALITY_TOLERANCE};
use lipfree::ultra_ops::{
    ball_partition, contraction_certificate, project_function, project_measure,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Plane,
    Line,
    Ultra,
}

fn build(kind: Kind, seed: u64, n: usize) -> (PointedMetricSpace, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = match kind {
        Kind::Plane => random_plane(&mut rng, n, 10.0),
        Kind::Line => random_line(&mut rng, n, 10.0),
        Kind::Ultra => random_ultrametric(&mut rng, n),
    };
    (space, rng)
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Plane), Just(Kind::Line), Just(Kind::Ultra)]
}

fn all_points(space: &PointedMetricSpace) -> Vec<usize> {
    space.points().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_spaces_are_metrics(k in kind(), seed: u64, n in 1usize..14) {
        let (space, _) = build(k, seed, n);
        prop_assert!(validate_metric(&space).valid);
        if is_ultrametric(&space).holds {
            prop_assert!(four_point_property(&space).holds);
        }
    }

    #[test]
    fn accumulation_and_annuli(k in kind(), seed: u64, n in 1usize..12, delta in 0.01f64..5.0) {
        let (space, _) = build(k, seed, n);
        let all = PointSet::all(&space);
        let once = accumulation_derivative(&space, &all, delta).unwrap();
        prop_assert!(once.is_subset(&all));
        let kernel = accumulation_kernel(&space, &all, delta).unwrap();
        prop_assert_eq!(accumulation_derivative(&space, &kernel, delta).unwrap(), kernel);
        let mut prev = annulus(&space, 0);
        for level in 1..40 {
            let next = annulus(&space, level);
            prop_assert!(prev.is_subset(&next));
            prev = next;
        }
        prop_assert_eq!(prev, all);
    }

    #[test]
    fn delta_is_an_isometry(k in kind(), seed: u64, n in 2usize..10) {
        let (space, _) = build(k, seed, n);
        for x in space.points() {
            for y in space.points() {
                let mu = FreeVector::from_masses(&space, [(x, 1.0), (y, -1.0)]).unwrap();
                prop_assert!((free_norm(&mu).unwrap().value - space.d(x, y)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn norm_axioms_and_duality(k in kind(), seed: u64, n in 2usize..10, c in -4.0f64..4.0) {
        let (space, mut rng) = build(k, seed, n);
        let pool = all_points(&space);
        let mu = random_vector(&mut rng, &space, &pool, 5);
        let nu = random_vector(&mut rng, &space, &pool, 5);
        let f = random_function(&mut rng, &space);
        let norm = |v: &FreeVector| free_norm(v).unwrap();
        let (a, b) = (norm(&mu), norm(&nu));
        prop_assert!(a.gap <= 1e-8 && a.potential_lip <= 1.0 + 1e-9);
        prop_assert!((evaluate(&a.potential, &lipfree::free_norm::mass_balance(&mu)).unwrap() - a.value).abs() <= 1e-8);
        prop_assert!((norm(&mu.scaled(c)).value - c.abs() * a.value).abs() <= 1e-9 * (1.0 + a.value));
        prop_assert!(norm(&mu.add(&nu).unwrap()).value <= a.value + b.value + 1e-9);
        let pairing = evaluate(&f, &mu).unwrap().abs();
        prop_assert!(pairing <= lip_constant(&f).value * a.value + 1e-9);
        let trivial: f64 = mu.masses().map(|(i, m)| m.abs() * space.d(0, i)).sum();
        prop_assert!(a.value <= trivial + 1e-9);
    }

    #[test]
    fn lipschitz_seminorm(k in kind(), seed: u64, n in 2usize..12, c in -3.0f64..3.0) {
        let (space, mut rng) = build(k, seed, n);
        let f = random_function(&mut rng, &space);
        let g = random_function(&mut rng, &space);
        let lf = lip_constant(&f).value;
        let lg = lip_constant(&g).value;
        prop_assert!((lip_constant(&f.scaled(c)).value - c.abs() * lf).abs() <= 1e-12 * (1.0 + lf));
        prop_assert!(lip_constant(&f.add(&g).unwrap()).value <= lf + lg + 1e-12 * (1.0 + lf + lg));
        let mut prev = 0.0;
        for s in space.distinct_distances() {
            let v = flatness_at_scale(&f, s);
            prop_assert!(v >= prev);
            prev = v;
        }
        prop_assert_eq!(flatness_at_scale(&f, space.diameter() * 2.0 + 1.0), lf);
    }

    #[test]
    fn lattice_quotient_sandwich(k in kind(), seed: u64, n in 2usize..12) {
        let (space, mut rng) = build(k, seed, n);
        let f = random_function(&mut rng, &space);
        let g = random_function(&mut rng, &space);
        for h in [pointwise_min(&f, &g).unwrap(), pointwise_max(&f, &g).unwrap()] {
            for (i, j) in space.pairs() {
                let (qf, qg, qh) = (f.quotient(i, j), g.quotient(i, j), h.quotient(i, j));
                prop_assert!(qh <= qf.max(qg) + 1e-12 && qh >= qf.min(qg) - 1e-12);
            }
            prop_assert!(lip_constant(&h).value <= lip_constant(&f).value.max(lip_constant(&g).value) + 1e-12);
            for r in space.distinct_distances() {
                prop_assert!(tail_flatness(&h, r) <= tail_flatness(&f, r).max(tail_flatness(&g, r)) + 1e-12);
            }
        }
    }

    #[test]
    fn ball_projections(seed: u64, n in 1usize..16, r in 0.05f64..6.0, horizon in 0.5f64..12.0) {
        let (space, mut rng) = build(Kind::Ultra, seed, n);
        let p = ball_partition(&space, r, horizon).unwrap();
        prop_assert_eq!(p.representatives[0], 0);
        let mut covered = 0;
        for block in p.blocks() {
            covered += block.len();
            for z in block.iter() {
                prop_assert!(space.d(z, block.as_slice()[0]) <= r);
                for t in block.iter() {
                    prop_assert!(space.d(z, t) <= r);
                }
            }
        }
        let inside = space.points().filter(|&z| space.d(0, z) <= horizon).count();
        prop_assert_eq!(covered, inside);

        let f = random_function(&mut rng, &space);
        let lf = project_function(&f, &p).unwrap();
        prop_assert!(lip_constant(&lf).value <= lip_constant(&f).value * (1.0 + 1e-12));
        prop_assert_eq!(project_function(&lf, &p).unwrap(), lf.clone());
        let report = contraction_certificate(&p, std::slice::from_ref(&f)).unwrap();
        prop_assert!(report.contracts());

        let mu = random_vector(&mut rng, &space, &all_points(&space), 6);
        let lhs = evaluate(&f, &project_measure(&mu, &p).unwrap()).unwrap();
        let rhs = evaluate(&lf, &mu).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));

        // highest index as representative, base block kept at the base
        let values: Vec<f64> = space.points().map(|z| match p.representative(z) {
            None => 0.0,
            Some(0) => 0.0,
            Some(rep) => {
                let top = space.points().filter(|&t| p.representative(t) == Some(rep)).max().unwrap();
                f.get(top)
            }
        }).collect();
        let alt = LipFunction::new(&space, values).unwrap();
        prop_assert!(lip_constant(&alt).value <= lip_constant(&f).value * (1.0 + 1e-12));
    }

    #[test]
    fn ultrametric_separators(seed: u64, n in 2usize..10) {
        let (space, _) = build(Kind::Ultra, seed, n);
        for (x, y) in lipfree::separator::all_pairs(&space) {
            let res = ultrametric_separator(&space, x, y).unwrap();
            let check = res.check();
            prop_assert!(check.holds(0.0));
            prop_assert!(check.lip <= 2.0);
            prop_assert_eq!(flatness_at_scale(&res.h, space.d(x, y) / 2.0), 0.0);
        }
    }

    #[test]
    fn proper_separators(k in prop_oneof![Just(Kind::Plane), Just(Kind::Line)], seed: u64, n in 2usize..9) {
        let (space, _) = build(k, seed, n);
        for (x, y) in lipfree::separator::all_pairs(&space) {
            let res = proper_separator(&space, x, y, 0).unwrap();
            prop_assert!(res.check().holds(EQUALITY_TOLERANCE));
            let c = res.construction.as_ref().unwrap();
            prop_assert!(c.remaining.windows(2).all(|w| w[1] < w[0]));
            let a = space.d(x, y);
            for (z, t) in space.pairs() {
                if space.d(x, z) > 1.5 * a && space.d(x, t) > 1.5 * a {
                    prop_assert_eq!(res.h.get(z), res.h.get(t));
                }
            }
        }
    }

    #[test]
    fn sandwich(k in kind(), seed: u64, n in 2usize..12, eps in prop_oneof![Just(0.25), Just(0.5), Just(0.9), 0.05f64..0.99]) {
        let (space, mut rng) = build(k, seed, n);
        let net = build_net_index(&space, eps).unwrap();
        prop_assert!(check_net(&net).holds());
        for _ in 0..5 {
            let f = random_function(&mut rng, &space);
            let report = verify_sandwich(&f, &net).unwrap();
            prop_assert!(report.holds(), "{:?}", report);
        }
    }
}
