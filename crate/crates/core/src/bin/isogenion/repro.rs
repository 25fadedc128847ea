//! Worked examples with their expected values.

use serde::Serialize;
use serde_json::json;

use isogenion::elliptic_curve::curve_from_j;
use isogenion::finite_field::field_create;
use isogenion::isogeny_graph::{build_graph, verify_volcano, IsogenyGraph};
use isogenion::minimal_degree::{e_b, md_between, r_b};
use isogenion::quadratic_order::{class_group, ideal_table, least_norms_per_class, QuadOrder};

use crate::{pretty, Failure};

#[derive(Serialize)]
struct Check {
    name: String,
    expected: serde_json::Value,
    actual: serde_json::Value,
    pass: bool,
}

#[derive(Default)]
struct Report(Vec<Check>);

impl Report {
    fn check<T: Serialize + PartialEq>(&mut self, name: impl Into<String>, expected: T, actual: T) {
        let pass = expected == actual;
        self.0.push(Check { name: name.into(), expected: json!(expected), actual: json!(actual), pass });
    }
}

pub fn run(example: u8) -> Result<String, Failure> {
    let mut r = Report::default();
    match example {
        1 => example_1(&mut r)?,
        2 => example_2(&mut r)?,
        3 => example_3(&mut r)?,
        _ => example_4(&mut r)?,
    }
    let ok = r.0.iter().all(|c| c.pass);
    let v = json!({ "example": example, "pass": ok, "checks": r.0 });
    if ok {
        Ok(pretty(&v))
    } else {
        Err(Failure::Mismatch(v))
    }
}

fn js_at_level(g: &IsogenyGraph, level: u32) -> Vec<u64> {
    let mut out: Vec<u64> =
        (0..g.vertices.len()).filter(|&v| g.levels[v] == level).map(|v| g.vertices[v].j.index_u64()).collect();
    out.sort_unstable();
    out
}

fn example_1(r: &mut Report) -> Result<(), Failure> {
    let f = field_create(41, 1)?;
    let g = build_graph(&f, 6, 2)?;
    r.check("vertices", 7, g.vertices.len());
    r.check("depth", 2, g.depth);
    r.check("surface", vec![5], js_at_level(&g, 0));
    r.check("level 1", vec![22, 29], js_at_level(&g, 1));
    r.check("floor", vec![13, 25, 33, 35], js_at_level(&g, 2));
    r.check("volcano shape", true, verify_volcano(&g).pass());
    let c = |j: i64| curve_from_j(&f, &f.from_i64(j), 6);
    let m = md_between(&c(29)?, &c(25)?, true)?;
    r.check("Md(29, 25)", 6, m.md);
    r.check("Md(29, 25) chain", vec![3, 2], m.chain);
    r.check("Md(29, 22)", 3, md_between(&c(29)?, &c(22)?, true)?.md);
    Ok(())
}

fn example_2(r: &mut Report) -> Result<(), Failure> {
    for (p, t, eb, rb) in [(41u64, 6i64, 7u64, 6u64), (53, -4, 8, 7), (67, 12, 7, 5)] {
        let f = field_create(p, 1)?;
        r.check(format!("eB({p}, {t})"), eb, e_b(p, t));
        r.check(format!("rB({p}, {t})"), rb, r_b(&f, t)?.r_b);
    }
    Ok(())
}

fn example_3(r: &mut Report) -> Result<(), Failure> {
    let o = QuadOrder::from_discriminant(-212)?;
    r.check("h(-212)", 6, class_group(&o)?.h);
    let mut norms: Vec<u64> = least_norms_per_class(&o, 9)?.values().copied().filter(|&n| n > 1).collect();
    norms.sort_unstable();
    r.check("non-principal least norms", vec![2, 3, 3, 6, 6], norms);
    let f = field_create(53, 1)?;
    let g2 = build_graph(&f, 0, 2)?;
    let g3 = build_graph(&f, 0, 3)?;
    r.check("classes", 6, g2.vertices.len());
    r.check("2-graph is a perfect matching", true, (0..6).all(|v| g2.degree(v) == 1 && !g2.neighbors(v).contains(&v)));
    r.check(
        "3-graph is a 6-cycle",
        true,
        g3.components().len() == 1 && (0..6).all(|v| g3.degree(v) == 2 && !g3.neighbors(v).contains(&v)),
    );
    r.check("eB(53, 0)", 9, e_b(53, 0));
    r.check("rB(53, 0)", 6, r_b(&f, 0)?.r_b);
    Ok(())
}

type Lattice = (u64, u64, u64);

/// `a Z + (b + c sqrt(-2)) Z` for each norm `2^n` of `Z[4 sqrt(-2)]`.
const TABLE: [(&[Lattice], &[Lattice]); 5] = [
    (&[], &[(2, 0, 4)]),
    (&[(4, 2, 4), (2, 0, 8)], &[(4, 0, 4)]),
    (&[], &[(4, 0, 8), (8, 4, 4), (8, 0, 4)]),
    (&[(4, 0, 16), (8, 4, 8), (16, 4, 4), (16, 12, 4)], &[(8, 0, 8), (16, 0, 4), (16, 8, 4)]),
    (&[(32, 0, 4), (32, 8, 4), (32, 16, 4), (32, 24, 4)], &[(8, 0, 16), (16, 8, 8), (16, 0, 8)]),
];

fn sorted(v: &[Lattice]) -> Vec<Lattice> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v
}

fn example_4(r: &mut Report) -> Result<(), Failure> {
    let o = QuadOrder::new(-8, 4)?;
    let counts = [(0u64, 1u64), (2, 1), (0, 3), (4, 3), (4, 3)];
    for (n, row) in ideal_table(&o, 2, 5)?.iter().enumerate() {
        r.check(format!("(iG, niG) at norm {}", row.norm), counts[n], (row.ig, row.nig));
    }
    for (n, (inv, non)) in TABLE.iter().enumerate() {
        let norm = 1u64 << (n + 1);
        let mut got_inv = Vec::new();
        let mut got_non = Vec::new();
        for i in isogenion::quadratic_order::enumerate_ideals(&o, norm)? {
            let (a, b, c) = i.hermite();
            let lat = (a, b, c * o.f);
            if i.is_invertible() {
                got_inv.push(lat);
            } else {
                got_non.push(lat);
            }
        }
        r.check(format!("invertible of norm {norm}"), sorted(inv), sorted(&got_inv));
        r.check(format!("non-invertible of norm {norm}"), sorted(non), sorted(&got_non));
    }
    Ok(())
}
