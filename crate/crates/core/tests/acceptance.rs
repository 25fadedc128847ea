//! End-to-end acceptance run: one PASS/FAIL line per criterion.

use std::time::{Duration, Instant};

use isogenion::elliptic_curve::{classes_with_j, classify_with_trace, curve_from_j, Curve};
use isogenion::extension::Embedding;
use isogenion::finite_field::field_create;
use isogenion::hom_index_kernel::{hom_index, pair_report};
use isogenion::isogeny_graph::{build_graph, classes_with_trace, verify_volcano};
use isogenion::minimal_degree::{e_b, md_between, md_classifier, r_b};
use isogenion::quadratic_order::{
    class_group, compare_counts, enumerate_ideals, ideal_count_invertible, ideal_count_noninvertible,
    least_norms_per_class, QuadOrder,
};
use isogenion::walk::walks_from;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let el = start.elapsed();
    ensure(el <= limit, || format!("took {el:.1?}, limit {limit:?}"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

fn volcano_gf41() -> Outcome {
    let start = Instant::now();
    let f = field_create(41, 1).map_err(err)?;
    let g = build_graph(&f, 6, 2).map_err(err)?;
    let at = |level| sorted(g.vertices.iter().zip(&g.levels).filter(|(_, &l)| l == level).map(|(c, _)| c.j.index_u64()).collect());
    ensure(g.vertices.len() == 7 && g.depth == 2, || format!("{} vertices, depth {}", g.vertices.len(), g.depth))?;
    ensure(at(0) == [5] && at(1) == [22, 29] && at(2) == [13, 25, 33, 35], || {
        format!("levels {:?} {:?} {:?}", at(0), at(1), at(2))
    })?;
    ensure(verify_volcano(&g).pass(), || "volcano clauses fail".into())?;
    within(start, Duration::from_secs(5))?;
    Ok(format!("7 vertices, depth 2 in {:.2?}", start.elapsed()))
}

fn md_example() -> Outcome {
    let f = field_create(41, 1).map_err(err)?;
    let c = |j| curve_from_j(&f, &f.from_i64(j), 6).map_err(err);
    let r = md_between(&c(29)?, &c(25)?, true).map_err(err)?;
    ensure(r.md == 6 && r.chain == [3, 2], || format!("Md(29,25) = {} via {:?}", r.md, r.chain))?;
    ensure(r.witness.target().j_invariant() == f.from_i64(25), || "witness lands elsewhere".into())?;
    let r = md_between(&c(29)?, &c(22)?, true).map_err(err)?;
    ensure(r.md == 3, || format!("Md(29,22) = {}", r.md))?;
    Ok("Md(29,25) = 6 via [3, 2], Md(29,22) = 3".into())
}

fn eb_rb() -> Outcome {
    let mut out = Vec::new();
    for (p, t, eb, rb) in [(41u64, 6i64, 7u64, 6u64), (53, -4, 8, 7), (67, 12, 7, 5)] {
        let start = Instant::now();
        let f = field_create(p, 1).map_err(err)?;
        let report = r_b(&f, t).map_err(err)?;
        ensure(e_b(p, t) == eb && report.r_b == rb, || format!("({p},{t}): eB {} rB {}", e_b(p, t), report.r_b))?;
        within(start, Duration::from_secs(60))?;
        out.push(format!("({p},{t}) {eb}/{rb}"));
    }
    Ok(out.join(", "))
}

fn example_3() -> Outcome {
    let o = QuadOrder::from_discriminant(-212).map_err(err)?;
    let h = class_group(&o).map_err(err)?.h;
    ensure(h == 6, || format!("h = {h}"))?;
    let norms = sorted(least_norms_per_class(&o, 9).map_err(err)?.into_values().filter(|&n| n > 1).collect());
    ensure(norms == [2, 3, 3, 6, 6], || format!("norms {norms:?}"))?;
    let f = field_create(53, 1).map_err(err)?;
    let g2 = build_graph(&f, 0, 2).map_err(err)?;
    let n = g2.vertices.len();
    ensure(n == 6, || format!("{n} classes"))?;
    ensure((0..n).all(|v| g2.degree(v) == 1 && !g2.neighbors(v).contains(&v)), || "2-graph not a matching".into())?;
    let g3 = build_graph(&f, 0, 3).map_err(err)?;
    ensure(g3.components().len() == 1 && (0..n).all(|v| g3.degree(v) == 2 && !g3.neighbors(v).contains(&v)), || {
        "3-graph not a 6-cycle".into()
    })?;
    let rb = r_b(&f, 0).map_err(err)?.r_b;
    ensure(rb == 6, || format!("rB(53,0) = {rb}"))?;
    Ok("h = 6, matching, 6-cycle, rB = 6, norms {2,3,3,6,6}".into())
}

fn ideal_table() -> Outcome {
    type Lat = (u64, u64, u64);
    let table: [(&[Lat], &[Lat]); 5] = [
        (&[], &[(2, 0, 4)]),
        (&[(4, 2, 4), (2, 0, 8)], &[(4, 0, 4)]),
        (&[], &[(4, 0, 8), (8, 4, 4), (8, 0, 4)]),
        (&[(4, 0, 16), (8, 4, 8), (16, 4, 4), (16, 12, 4)], &[(8, 0, 8), (16, 0, 4), (16, 8, 4)]),
        (&[(32, 0, 4), (32, 8, 4), (32, 16, 4), (32, 24, 4)], &[(8, 0, 16), (16, 8, 8), (16, 0, 8)]),
    ];
    let counts = [(0, 1), (2, 1), (0, 3), (4, 3), (4, 3)];
    let o = QuadOrder::new(-8, 4).map_err(err)?;
    for n in 1..=5u32 {
        let got = (ideal_count_invertible(4, 2, n, -8), ideal_count_noninvertible(4, 2, n, -8));
        ensure(got == counts[n as usize - 1], || format!("n={n}: {got:?}"))?;
        let (mut inv, mut non) = (Vec::new(), Vec::new());
        for i in enumerate_ideals(&o, 1 << n).map_err(err)? {
            let (a, b, c) = i.hermite();
            if i.is_invertible() { &mut inv } else { &mut non }.push((a, b, c * 4));
        }
        let (want_inv, want_non) = table[n as usize - 1];
        ensure(sorted(inv.clone()) == sorted(want_inv.to_vec()) && sorted(non.clone()) == sorted(want_non.to_vec()), || {
            format!("n={n}: {inv:?} / {non:?}")
        })?;
    }
    Ok("counts and basis sets match for n = 1..5".into())
}

fn index_sweep() -> Outcome {
    let start = Instant::now();
    let f = field_create(41, 1).map_err(err)?;
    let classes = classes_with_trace(&f, 6).map_err(err)?;
    let mut checked = 0;
    for a in &classes {
        for w in walks_from(&a.representative, 6, &[2, 3], 36).map_err(err)? {
            let target = classify_with_trace(w.target(), 6).representative;
            let d = hom_index(&a.representative, &target, &w.isogeny).map_err(err)?;
            ensure(d.index == d.oracle_index, || format!("{} -> {} via {:?}: {} vs {}", a.j, d.target.j, w.chain, d.index, d.oracle_index))?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(120))?;
    Ok(format!("{checked} isogenies agree in {:.1?}", start.elapsed()))
}

fn supersingular_index() -> Outcome {
    let mut checked = 0;
    for p in [11u64, 13] {
        let k = field_create(p, 1).map_err(err)?;
        let emb = Embedding::extend(&k, 2).map_err(err)?;
        for j in k.elements() {
            for c in classes_with_j(&k, &j).map_err(err)?.into_iter().filter(|c| c.trace == 0) {
                let e: Curve = c.representative.base_change(&emb);
                let t = e.trace().map_err(err)?;
                ensure(t == -2 * p as i64, || format!("trace {t}"))?;
                for w in walks_from(&e, t, &[2, 3], 4).map_err(err)? {
                    let d = hom_index(&e, &w.target().clone(), &w.isogeny).map_err(err)?;
                    ensure(d.oracle_index == d.degree * d.degree, || format!("p={p} j={j} {:?}: {}", w.chain, d.oracle_index))?;
                    checked += 1;
                }
            }
        }
    }
    ensure(checked > 0, || "nothing checked".into())?;
    Ok(format!("{checked} isogenies with index deg^2"))
}

fn round_trip() -> Outcome {
    let f = field_create(41, 1).map_err(err)?;
    let classes = classes_with_trace(&f, 6).map_err(err)?;
    let mut pairs = 0;
    for a in &classes {
        for b in &classes {
            let r = pair_report(&a.representative, &b.representative, &[2, 3], 36).map_err(err)?;
            ensure(r.consistent(), || format!("{} -> {}: {:?}", a.j, b.j, r.round_trips))?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} ordered pairs consistent"))
}

fn classifier_sweep() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for p in (5u64..=97).filter(|&p| (2..p).all(|d| p % d != 0)) {
        let f = field_create(p, 1).map_err(err)?;
        for j in f.elements() {
            let e = &classes_with_j(&f, &j).map_err(err)?[0].representative;
            let search = md_between(e, e, false).map_err(err)?.md;
            let table = md_classifier(e).map_err(err)?;
            ensure(search == table, || format!("p={p} j={j}: search {search}, table {table}"))?;
            checked += 1;
        }
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!("{checked} curves agree in {:.1?}", start.elapsed()))
}

fn count_formulas() -> Outcome {
    let start = Instant::now();
    let (checked, conflicts) = compare_counts(&[-3, -4, -7, -8, -11], 64, &[2, 3, 5], 6).map_err(err)?;
    ensure(conflicts.is_empty(), || format!("{} conflicts, first {:?}", conflicts.len(), conflicts[0]))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!("{checked} counts agree in {:.1?}", start.elapsed()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("volcano over GF(41), l = 2", volcano_gf41),
        ("minimal degrees on the volcano", md_example),
        ("eB and rB", eb_rb),
        ("class group -212 and GF(53) graphs", example_3),
        ("ideal table of Z[4 sqrt(-2)]", ideal_table),
        ("index formula vs annihilator oracle", index_sweep),
        ("supersingular index", supersingular_index),
        ("kernel ideal round trip", round_trip),
        ("Md(E, E) classifier sweep", classifier_sweep),
        ("ideal count formulas", count_formulas),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", n + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg}", n + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
