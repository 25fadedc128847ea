use proptest::prelude::*;

use isogenion::elliptic_curve::{classes_with_j, classify_with_trace, curve_from_j, Curve};
use isogenion::endo_ring::{compute_endo_conductor, frobenius_matrix};
use isogenion::finite_field::{field_create, kronecker};
use isogenion::hom_index_kernel::hom_index;
use isogenion::isogeny::{rational_isogenies, Isogeny};
use isogenion::isogeny_graph::{build_graph, classes_with_trace, count_components};
use isogenion::minimal_degree::{e_b, md_between, md_from};
use isogenion::modpoly::modular_adjacent;
use isogenion::quadratic_order::{class_group, primes_above, QuadOrder};
use isogenion::walk::walks_from;

fn gf41(j: i64, t: i64) -> Curve {
    let f = field_create(41, 1).unwrap();
    curve_from_j(&f, &f.from_i64(j), t).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![5u64, 7, 11, 13, 41, 53])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(p in prime(), r in 1usize..=3, a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let f = field_create(p, r).unwrap();
        let q = f.q_u64().unwrap();
        let (a, b, c) = (f.element_from_index(a % q), f.element_from_index(b % q), f.element_from_index(c % q));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!((&a * &b).frobenius(), &a.frobenius() * &b.frobenius());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
        if let Some((s, _)) = a.sqrt() {
            prop_assert_eq!(s.square(), a);
        }
    }

    #[test]
    fn kronecker_is_multiplicative(d in prop::sample::select(vec![-3i64, -4, -7, -8, -20, -212]),
                                   m in 1u64..200, n in 1u64..200) {
        prop_assert_eq!(kronecker(d, m * n), kronecker(d, m) * kronecker(d, n));
    }

    #[test]
    fn group_law_is_associative(j in 0i64..41, i in any::<prop::sample::Index>(),
                                k in any::<prop::sample::Index>(), l in any::<prop::sample::Index>()) {
        let f = field_create(41, 1).unwrap();
        for c in classes_with_j(&f, &f.from_i64(j)).unwrap() {
            let e = &c.representative;
            let pts = e.points();
            let (p, q, r) = (i.get(&pts), k.get(&pts), l.get(&pts));
            prop_assert_eq!(e.add(&e.add(p, q), r), e.add(p, &e.add(q, r)));
        }
    }

    #[test]
    fn twists_and_hasse(p in prime(), a in 0i64..60, b in 0i64..60) {
        let f = field_create(p, 1).unwrap();
        if let Ok(e) = Curve::from_i64(&f, a, b) {
            let t = e.trace().unwrap();
            let tw = e.quadratic_twist(&f.nonresidue());
            prop_assert_eq!(e.order().unwrap() + tw.order().unwrap(), 2 * p + 2);
            prop_assert!(t * t <= 4 * p as i64);
        }
    }

    #[test]
    fn dual_composes_to_multiplication(j in prop::sample::select(vec![5i64, 29, 22, 13, 25]), l in 2u64..=3) {
        let e = gf41(j, 6);
        for phi in rational_isogenies(&e, 6, l).unwrap() {
            prop_assert_eq!(phi.target().trace().unwrap(), 6);
            prop_assert!(modular_adjacent(l, &e.j_invariant(), &phi.target().j_invariant()).unwrap());
            let back = Isogeny::compose(&phi.dual(6).unwrap(), &phi).unwrap();
            prop_assert_eq!(back.degree(), (l * l).into());
            for pt in e.points() {
                prop_assert_eq!(back.evaluate(&pt).unwrap(), e.scalar_mul(l as i64, &pt));
            }
        }
    }

    #[test]
    fn frobenius_matrix_has_char_poly(j in 0i64..41, m in prop::sample::select(vec![2u64, 3, 4, 5, 6])) {
        let f = field_create(41, 1).unwrap();
        for c in classes_with_j(&f, &f.from_i64(j)).unwrap() {
            let fm = frobenius_matrix(&c.representative, m).unwrap();
            let [[a, b], [cc, d]] = fm.matrix;
            let det = (a * d + m * m - b * cc % m) % m;
            prop_assert_eq!(det, 41 % m);
            prop_assert_eq!((a + d) % m, c.trace.rem_euclid(m as i64) as u64);
        }
    }

    #[test]
    fn primes_above_count(d in prop::sample::select(vec![-3i64, -4, -7, -8, -20, -23, -212]),
                          l in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
        let o = QuadOrder::from_discriminant(d).unwrap();
        let k = kronecker(d, l);
        let expected = if k < 0 { 0 } else { 1 + k as usize };
        if o.f % l != 0 {
            prop_assert_eq!(primes_above(&o, l).unwrap().len(), expected);
        }
    }
}

#[test]
fn conductor_is_twist_invariant() {
    let f = field_create(41, 1).unwrap();
    for j in [13i64, 22, 25, 29] {
        let a = compute_endo_conductor(&curve_from_j(&f, &f.from_i64(j), 6).unwrap()).unwrap();
        let b = compute_endo_conductor(&curve_from_j(&f, &f.from_i64(j), -6).unwrap()).unwrap();
        assert_eq!((a.f, a.f0), (b.f, b.f0));
    }
}

#[test]
fn level_sizes_are_class_numbers() {
    let f = field_create(41, 1).unwrap();
    let g = build_graph(&f, 6, 2).unwrap();
    for level in 0..=g.depth {
        let count = g.levels.iter().filter(|&&l| l == level).count();
        let h = class_group(&QuadOrder::new(-8, 1 << level).unwrap()).unwrap().h;
        assert_eq!(count, h, "level {level}");
    }
}

#[test]
fn component_counts_match_formula() {
    for (p, t, l) in [(41u64, 6i64, 2u64), (41, 6, 3), (53, 0, 2), (53, 0, 3), (53, -4, 2), (67, 12, 2), (67, 12, 3)] {
        let f = field_create(p, 1).unwrap();
        let g = build_graph(&f, t, l).unwrap();
        assert_eq!(count_components(p, t, l).unwrap() as usize, g.components().len(), "({p},{t},{l})");
    }
}

#[test]
fn degrees_are_divisible_by_conductor_gap() {
    let f = field_create(41, 1).unwrap();
    for a in classes_with_trace(&f, 6).unwrap() {
        for w in walks_from(&a.representative, 6, &[2, 3], 24).unwrap() {
            let target = classify_with_trace(w.target(), 6).representative;
            let d = hom_index(&a.representative, &target, &w.isogeny).unwrap();
            let gap: u64 = d.ratio.iter().map(|(&l, &e)| l.pow(e.unsigned_abs())).product();
            assert_eq!(d.degree % gap, 0);
        }
    }
}

#[test]
fn md_is_symmetric_and_submultiplicative() {
    let f = field_create(41, 1).unwrap();
    let classes = classes_with_trace(&f, 6).unwrap();
    let bound = e_b(41, 6);
    let md: Vec<Vec<u64>> = classes
        .iter()
        .map(|a| {
            let reach = md_from(&a.representative, bound).unwrap();
            classes.iter().map(|b| reach[b].md).collect()
        })
        .collect();
    let n = classes.len();
    for a in 0..n {
        for b in 0..n {
            assert_eq!(md[a][b], md[b][a]);
            assert!(a == b || md[a][b] <= bound);
            for c in 0..n {
                assert!(md[a][c] <= md[a][b] * md[b][c]);
            }
        }
    }
}

#[test]
fn md_below_eb_for_small_ordinary_classes() {
    for (p, t) in [(41u64, 6i64), (53, -4), (67, 12), (101, 5), (113, -10), (197, 14)] {
        let f = field_create(p, 1).unwrap();
        let classes = classes_with_trace(&f, t).unwrap();
        for (i, a) in classes.iter().enumerate() {
            let reach = md_from(&a.representative, e_b(p, t)).unwrap();
            for b in &classes[i + 1..] {
                assert!(reach.contains_key(b), "({p},{t}) {a} -> {b}");
            }
        }
    }
}

#[test]
fn directly_above_is_a_power_of_l() {
    let f = field_create(41, 1).unwrap();
    for (upper, lower, md) in [(5i64, 29i64, 2u64), (5, 22, 2), (29, 13, 2), (22, 35, 2), (5, 13, 4)] {
        let r = md_between(&gf41(upper, 6), &gf41(lower, 6), true).unwrap();
        assert_eq!(r.md, md, "{upper} -> {lower}");
    }
    let _ = f;
}

#[test]
fn cli_output_is_deterministic() {
    let bin = env!("CARGO_BIN_EXE_isogenion");
    let run = |args: &[&str]| std::process::Command::new(bin).args(args).output().unwrap();
    for args in [
        &["volcano", "--p", "41", "--trace", "6", "--ell", "2", "--format", "json"][..],
        &["md", "--p", "53", "--trace", "-4", "--j-source", "2", "--j-target", "7"][..],
        &["count-ideals", "--d0", "-8", "--f", "4", "--ell", "2", "--n", "5"][..],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), b.status.code());
    }
    for n in ["1", "2", "3", "4"] {
        assert_eq!(run(&["repro", n]).status.code(), Some(0), "repro {n}");
    }
    assert_eq!(run(&["volcano", "--p", "41", "--trace", "100", "--ell", "2"]).status.code(), Some(2));
}
