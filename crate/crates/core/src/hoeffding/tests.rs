use super::*;
use crate::combinatorics::subset_masks;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rademacher(n: usize) -> ProductSpace {
    ProductSpace::iid(&DiscreteDistribution::rademacher(), n).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
}

fn random_space(rng: &mut ChaCha8Rng, n: usize) -> ProductSpace {
    let coords = (0..n)
        .map(|_| {
            let k = rng.random_range(2..=3);
            let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = raw.iter().sum();
            let atoms = raw
                .iter()
                .map(|w| (rng.random_range(-2.0..2.0), w / total))
                .collect::<Vec<_>>();
            let mut d = DiscreteDistribution::new(atoms.clone());
            if d.is_err() {
                // rounding can push the probability sum past tolerance
                let s: f64 = atoms.iter().map(|a| a.1).sum();
                d = DiscreteDistribution::new(atoms.iter().map(|&(v, p)| (v, p / s)).collect());
            }
            d.unwrap()
        })
        .collect();
    ProductSpace::new(coords).unwrap()
}

fn random_table(rng: &mut ChaCha8Rng, space: &ProductSpace) -> StatisticTable {
    let values = (0..space.atom_count())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    StatisticTable::new(space.full_mask(), values, space).unwrap()
}

#[test]
fn expectation_examples() {
    let s = rademacher(2);
    let c = StatisticTable::from_fn(&s, |_| 2.5);
    assert!((expectation(&c, &s).unwrap() - 2.5).abs() < EXPECTATION_TOLERANCE);
    let x1 = StatisticTable::from_fn(&s, |x| x[0]);
    assert!(expectation(&x1, &s).unwrap().abs() < EXPECTATION_TOLERANCE);
    let y = StatisticTable::from_fn(&s, |x| x[0] * x[1] + x[0]);
    assert!(expectation(&y, &s).unwrap().abs() < EXPECTATION_TOLERANCE);
    let bad = StatisticTable::new(0b1, vec![1.0, 2.0], &s).unwrap();
    assert!(expectation(&bad, &s).is_ok());
    assert!(matches!(
        StatisticTable::new(0b11, vec![1.0; 3], &s),
        Err(HoeffdingError::ShapeMismatch { .. })
    ));
}

#[test]
fn conditional_expectation_examples() {
    let s = rademacher(2);
    let y = StatisticTable::from_fn(&s, |x| x[0] * x[1]);
    let e0 = conditional_expectation(&y, 0, &s).unwrap();
    assert_eq!(e0.scope(), 0);
    assert!(e0.values()[0].abs() < 1e-15);
    let e1 = conditional_expectation(&y, 0b01, &s).unwrap();
    assert!(e1.values().iter().all(|v| v.abs() < 1e-15));
    let z = StatisticTable::from_fn(&s, |x| x[0] * x[1] + x[1] * x[1]);
    let e2 = conditional_expectation(&z, 0b10, &s).unwrap();
    assert!(close(e2.values(), &[1.0, 1.0], 1e-15));
    let full = conditional_expectation(&z, 0b11, &s).unwrap();
    assert_eq!(full, z);
    assert!(matches!(
        conditional_expectation(&z, 0b100, &s),
        Err(HoeffdingError::BadIndexSet { .. })
    ));
}

#[test]
fn component_examples() {
    let s = rademacher(2);
    let x1 = StatisticTable::from_fn(&s, |x| x[0]);
    let c1 = hoeffding_component(&x1, 0b01, &s).unwrap();
    assert!(close(c1.values(), &[-1.0, 1.0], 1e-15));
    assert!(hoeffding_component(&x1, 0, &s).unwrap().values()[0].abs() < 1e-15);

    let sq = StatisticTable::from_fn(&s, |x| x[0] * x[0]);
    assert!((hoeffding_component(&sq, 0, &s).unwrap().values()[0] - 1.0).abs() < 1e-15);
    assert!(hoeffding_component(&sq, 0b01, &s)
        .unwrap()
        .values()
        .iter()
        .all(|v| v.abs() < 1e-15));

    let y = StatisticTable::from_fn(&s, |x| x[0] * x[1] + x[0]);
    let d = decompose(&y, &s).unwrap();
    assert!(d.second_moment(0, &s) < 1e-20);
    assert!(d.second_moment(0b10, &s) < 1e-20);
    assert!(close(d.component(0b01).values(), &[-1.0, 1.0], 1e-12));
    assert!(close(
        d.component(0b11).values(),
        &[1.0, -1.0, -1.0, 1.0],
        1e-12
    ));
}

#[test]
fn constant_statistic_has_only_empty_component() {
    let s = rademacher(3);
    let y = StatisticTable::from_fn(&s, |_| 4.0);
    let d = decompose(&y, &s).unwrap();
    assert!((d.component(0).values()[0] - 4.0).abs() < 1e-12);
    for (m, c) in d.components().skip(1) {
        assert!(c.second_moment(&s) < 1e-24, "mask {m:b}");
    }
}

#[test]
fn homogeneous_sum_components_match_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let s = ProductSpace::iid(
        &DiscreteDistribution::standardized(vec![(0.0, 0.3), (1.0, 0.5), (3.0, 0.2)]).unwrap(),
        5,
    )
    .unwrap();
    for p in 1..=3 {
        let coeffs: Vec<(u32, f64)> = subset_masks(5, p)
            .into_iter()
            .map(|m| (m, rng.random_range(-1.0..1.0)))
            .collect();
        let y = StatisticTable::from_fn(&s, |x| {
            coeffs
                .iter()
                .map(|&(m, a)| a * indices_of(m).iter().map(|&i| x[i - 1]).product::<f64>())
                .sum()
        });
        let d = decompose(&y, &s).unwrap();
        for (m, c) in d.components() {
            let expected = coeffs.iter().find(|(k, _)| *k == m).map_or(0.0, |c| c.1);
            let analytic = StatisticTable::from_fn(&s, |x| {
                expected * indices_of(m).iter().map(|&i| x[i - 1]).product::<f64>()
            });
            let lifted = c.lift(s.full_mask(), &s);
            assert!(
                close(lifted.values(), analytic.values(), 1e-10),
                "p={p} M={m:b}"
            );
        }
        assert!(is_degenerate(&y, &s, p).unwrap());
        assert!(!is_degenerate(&y, &s, p + 1).unwrap());
    }
}

#[test]
fn degeneracy_examples() {
    let s = rademacher(3);
    let mixed = StatisticTable::from_fn(&s, |x| x[0] + x[0] * x[1]);
    for p in 0..=3 {
        assert!(!is_degenerate(&mixed, &s, p).unwrap());
    }
    let zero = StatisticTable::from_fn(&s, |_| 0.0);
    for p in 0..=3 {
        assert!(is_degenerate(&zero, &s, p).unwrap());
    }
}

#[test]
fn direct_and_moebius_components_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=5 {
        let s = random_space(&mut rng, n);
        let y = random_table(&mut rng, &s);
        let d = decompose(&y, &s).unwrap();
        for (m, c) in d.components() {
            let direct = hoeffding_component(&y, m, &s).unwrap();
            assert_eq!(direct.scope(), c.scope());
            assert!(close(direct.values(), c.values(), 1e-10));
        }
    }
}

#[test]
fn reconstruction_orthogonality_and_degeneracy_on_random_statistics() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..500 {
        let n = 1 + trial % 6;
        let s = random_space(&mut rng, n);
        let y = random_table(&mut rng, &s);
        let d = decompose(&y, &s).unwrap();
        let back = d.reconstruct(&s);
        assert!(close(back.values(), y.values(), 1e-10), "trial {trial}");
        if n > 4 {
            continue;
        }
        let full = s.full_mask();
        for m in 0..=full {
            let cm = d.component(m);
            for j in 0..=full {
                if m & !j != 0 {
                    let cond = cm.condition(j, &s);
                    assert!(cond.values().iter().all(|v| v.abs() < 1e-10));
                }
            }
            for k in (m + 1)..=full {
                let inner = expect_product(&[cm, d.component(k)], &s);
                assert!(inner.abs() < 1e-10);
            }
        }
    }
}

#[test]
fn decomposition_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_space(&mut rng, 4);
    let y = random_table(&mut rng, &s);
    let z = random_table(&mut rng, &s);
    let (alpha, beta) = (1.7, -0.4);
    let mut comb = StatisticTable::zeros(s.full_mask(), &s);
    comb.axpy(alpha, &y);
    comb.axpy(beta, &z);
    let (dy, dz, dc) = (
        decompose(&y, &s).unwrap(),
        decompose(&z, &s).unwrap(),
        decompose(&comb, &s).unwrap(),
    );
    for m in 0..=s.full_mask() {
        let mut expected = StatisticTable::zeros(m, &s);
        expected.axpy(alpha, dy.component(m));
        expected.axpy(beta, dz.component(m));
        assert!(close(dc.component(m).values(), expected.values(), 1e-10));
    }
}

#[test]
fn product_component_variance_examples() {
    let s = rademacher(4);
    let v = decompose(&StatisticTable::from_fn(&s, |x| x[0] * x[1]), &s).unwrap();
    let vars = product_component_variances(&v, &v, &s).unwrap();
    assert!(vars.iter().all(|x| x.abs() < 1e-12));

    let w = decompose(&StatisticTable::from_fn(&s, |x| x[2] * x[3]), &s).unwrap();
    let vars = product_component_variances(&v, &w, &s).unwrap();
    for (m, var) in vars.iter().enumerate() {
        if (m as u32).count_ones() < 4 {
            assert!(var.abs() < 1e-12);
        } else {
            assert!((var - 1.0).abs() < 1e-12);
        }
    }

    let other = rademacher(3);
    let u = decompose(&StatisticTable::from_fn(&other, |x| x[0]), &other).unwrap();
    assert_eq!(
        product_component_variances(&u, &v, &s),
        Err(HoeffdingError::SpaceMismatch)
    );
}

#[test]
fn product_variances_match_direct_decomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let s = rademacher(5);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<(u32, f64)> {
        subset_masks(5, 2)
            .into_iter()
            .map(|m| (m, rng.random_range(-1.0..1.0)))
            .collect()
    };
    let (cv, cw) = (draw(&mut rng), draw(&mut rng));
    let eval = |c: &[(u32, f64)], x: &[f64]| -> f64 {
        c.iter()
            .map(|&(m, a)| a * indices_of(m).iter().map(|&i| x[i - 1]).product::<f64>())
            .sum()
    };
    let v = StatisticTable::from_fn(&s, |x| eval(&cv, x));
    let w = StatisticTable::from_fn(&s, |x| eval(&cw, x));
    let product = StatisticTable::from_fn(&s, |x| eval(&cv, x) * eval(&cw, x));
    let direct = decompose(&product, &s).unwrap();
    let vars =
        product_component_variances(&decompose(&v, &s).unwrap(), &decompose(&w, &s).unwrap(), &s)
            .unwrap();
    for (m, c) in direct.components() {
        let var = c.second_moment(&s) - c.expectation(&s).powi(2);
        assert!((vars[m as usize] - var).abs() < 1e-10);
        if m.count_ones() > 4 {
            assert!(var.abs() < 1e-12);
        }
    }
}

#[test]
fn decompose_refuses_oversized_spaces() {
    let limits = EngineLimits {
        max_coordinates: 3,
        max_atoms: 1_000_000,
    };
    let s = ProductSpace::with_limits(vec![DiscreteDistribution::rademacher(); 4], limits).unwrap();
    let y = StatisticTable::from_fn(&s, |x| x[0]);
    assert!(matches!(
        decompose(&y, &s),
        Err(HoeffdingError::TooLarge { .. })
    ));
}

#[test]
fn table_csv_layout() {
    let s = rademacher(1);
    let y = StatisticTable::from_fn(&s, |x| x[0] * 0.5);
    assert_eq!(y.to_csv(), "index,value\n0,-0.5\n1,0.5\n");
}

proptest! {
    #[test]
    fn random_statistics_reconstruct(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_space(&mut rng, n);
        let y = random_table(&mut rng, &s);
        let d = decompose(&y, &s).unwrap();
        prop_assert!(close(d.reconstruct(&s).values(), y.values(), 1e-10));
        prop_assert!((d.component(0).values()[0] - y.expectation(&s)).abs() < 1e-12);
    }
}
