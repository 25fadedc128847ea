//! `l`-isogeny graphs over `k` for a fixed trace, volcano checks and
//! component counts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::elliptic_curve::{
    classes_with_j, classify_with_trace, discriminant_frobenius_order, factorize, valuation, CurveClass, CurveError,
};
use crate::endo_ring::{compute_endo_conductor, EndoError};
use crate::finite_field::{kronecker, Field};
use crate::isogeny::{Isogeny, IsogenyError};
use crate::modpoly::{modular_adjacent, modular_polynomial, ModPolyError};
use crate::quadratic_order::{class_group, ideal_multiply, primes_above, QuadError, QuadOrder};
use crate::walk::cached_kernels;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("no curve over GF({q}) has trace {t}")]
    NoCurveWithTrace { q: String, t: i64 },
    #[error("no modular polynomial of level {0}")]
    UnsupportedLevel(u64),
    #[error("vertex {0} is not on the surface")]
    NotOnSurface(usize),
    #[error("edge to j = {0} is not a root of the modular polynomial")]
    Inconsistent(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
    #[error(transparent)]
    Endo(#[from] EndoError),
    #[error(transparent)]
    ModPoly(#[from] ModPolyError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Directed edge counted once per rational kernel at `from`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub multiplicity: usize,
}

#[derive(Debug, Clone)]
pub struct IsogenyGraph {
    pub field: Arc<Field>,
    pub trace: i64,
    pub l: u64,
    pub vertices: Vec<CurveClass>,
    pub edges: Vec<Edge>,
    /// `v_l` of the conductor of `End(E)`, i.e. the depth below the surface.
    pub levels: Vec<u32>,
    /// `v_l(f0)`.
    pub depth: u32,
}

/// All `k`-isomorphism classes with trace `t`, by ascending `j` and twist.
pub fn classes_with_trace(field: &Arc<Field>, t: i64) -> Result<Vec<CurveClass>, GraphError> {
    let q = field.q_u64().ok_or_else(|| CurveError::BoundExceeded("field too large".into()))?;
    if (t as i128) * (t as i128) > 4 * q as i128 {
        return Err(GraphError::NoCurveWithTrace { q: q.to_string(), t });
    }
    let mut out = Vec::new();
    for j in field.elements() {
        out.extend(classes_with_j(field, &j)?.into_iter().filter(|c| c.trace == t));
    }
    if out.is_empty() {
        return Err(GraphError::NoCurveWithTrace { q: q.to_string(), t });
    }
    out.sort_by_key(|c| c.sort_key());
    Ok(out)
}

pub fn build_graph(field: &Arc<Field>, t: i64, l: u64) -> Result<IsogenyGraph, GraphError> {
    if modular_polynomial(l).is_err() {
        return Err(GraphError::UnsupportedLevel(l));
    }
    let vertices = classes_with_trace(field, t)?;
    let q = field.q_u64().expect("checked by classes_with_trace");
    let quadratic = (t as i128) * (t as i128) < 4 * q as i128;
    let depth = if quadratic {
        let (_, f0) = discriminant_frobenius_order(q, t)?;
        valuation(f0, l)
    } else {
        0
    };
    let mut levels = Vec::with_capacity(vertices.len());
    for v in &vertices {
        levels.push(if depth == 0 {
            0
        } else {
            compute_endo_conductor(&v.representative)?.levels.get(&l).copied().unwrap_or(0)
        });
    }
    let index: BTreeMap<_, usize> = vertices.iter().enumerate().map(|(i, c)| ((c.sort_key(), c.trace), i)).collect();
    let mut edges = Vec::new();
    for (i, v) in vertices.iter().enumerate() {
        let mut mult: BTreeMap<usize, usize> = BTreeMap::new();
        for k in cached_kernels(&v.representative, t, l)?.iter() {
            let phi = Isogeny::from_kernel_poly(&v.representative, k);
            let target = classify_with_trace(phi.target(), t);
            if !modular_adjacent(l, &v.j, &target.j)? {
                return Err(GraphError::Inconsistent(target.j.to_string()));
            }
            let to = index[&(target.sort_key(), t)];
            *mult.entry(to).or_default() += 1;
        }
        edges.extend(mult.into_iter().map(|(to, multiplicity)| Edge { from: i, to, multiplicity }));
    }
    Ok(IsogenyGraph { field: field.clone(), trace: t, l, vertices, edges, levels, depth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Horizontal,
    Ascending,
    Descending,
}

impl IsogenyGraph {
    /// Vertices with the given `j`, as a prime-field value.
    pub fn vertices_with_j(&self, j: i64) -> Vec<usize> {
        let j = self.field.from_i64(j);
        (0..self.vertices.len()).filter(|&i| self.vertices[i].j == j).collect()
    }

    /// Number of rational kernels from `u` landing on `v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == u && e.to == v).map(|e| e.multiplicity).sum()
    }

    /// Rational kernels at `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.from == v).map(|e| e.multiplicity).sum()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.from == v).map(|e| e.to).collect()
    }

    /// Removes both directions of an edge; used to build broken graphs in tests.
    pub fn remove_edge(&mut self, u: usize, v: usize) {
        self.edges.retain(|e| !((e.from == u && e.to == v) || (e.from == v && e.to == u)));
    }

    /// Connected components of the underlying undirected graph.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.from), find(&mut parent, e.to));
            parent[a] = b;
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            groups.entry(r).or_default().push(v);
        }
        let mut out: Vec<Vec<usize>> = groups.into_values().collect();
        out.sort();
        out
    }

    /// Undirected edges `(u, v, count)` with `u <= v`.
    pub fn undirected_edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.from < e.to {
                out.push((e.from, e.to, e.multiplicity.min(self.multiplicity(e.to, e.from).max(1))));
            } else if e.from == e.to {
                out.push((e.from, e.to, e.multiplicity));
            } else if self.multiplicity(e.to, e.from) == 0 {
                out.push((e.to, e.from, e.multiplicity));
            }
        }
        out.sort_unstable();
        out
    }

    fn label(&self, v: usize) -> String {
        format!("j={} [L{}]", self.vertices[v].j, self.levels[v])
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in 0..self.vertices.len() {
            let _ = writeln!(s, "  v{v} [label=\"{}\"];", self.label(v));
        }
        for (u, v, m) in self.undirected_edges() {
            for _ in 0..m {
                let _ = writeln!(s, "  v{u} -- v{v};");
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, c)| {
                json!({
                    "index": i,
                    "j": c.j.to_string(),
                    "twist": c.twist_index,
                    "a": c.representative.a().to_string(),
                    "b": c.representative.b().to_string(),
                    "level": self.levels[i],
                })
            })
            .collect();
        json!({
            "field": self.field.to_string(),
            "trace": self.trace,
            "ell": self.l,
            "depth": self.depth,
            "vertices": vertices,
            "edges": self.edges,
            "levels": self.levels,
            "components": self.components(),
        })
    }
}

pub fn classify_edge(g: &IsogenyGraph, from: usize, to: usize) -> EdgeKind {
    use std::cmp::Ordering::*;
    match g.levels[to].cmp(&g.levels[from]) {
        Equal => EdgeKind::Horizontal,
        Greater => EdgeKind::Descending,
        Less => EdgeKind::Ascending,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub pass: bool,
    pub witnesses: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VolcanoReport {
    pub depth: u32,
    pub clauses: Vec<Clause>,
}

impl VolcanoReport {
    pub fn pass(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }
}

/// Checks the three volcano clauses on rational kernel counts.
pub fn verify_volcano(g: &IsogenyGraph) -> VolcanoReport {
    let n = g.vertices.len();
    let count_to = |v: usize, lvl: u32| -> usize {
        g.edges.iter().filter(|e| e.from == v && g.levels[e.to] == lvl).map(|e| e.multiplicity).sum()
    };
    let surface: Vec<usize> = (0..n).filter(|&v| g.levels[v] == 0).collect();
    let sdeg: Vec<usize> = surface.iter().map(|&v| count_to(v, 0)).collect();
    let target = sdeg.first().copied().unwrap_or(0);
    let bad_surface: Vec<usize> =
        surface.iter().zip(&sdeg).filter(|(_, &d)| d > 2 || d != target).map(|(&v, _)| v).collect();

    let bad_up: Vec<usize> = (0..n)
        .filter(|&v| {
            let lv = g.levels[v];
            let skips = g.edges.iter().any(|e| e.from == v && g.levels[e.to].abs_diff(lv) > 1);
            skips || (lv > 0 && count_to(v, lv - 1) != 1)
        })
        .collect();

    let bad_deg: Vec<usize> = if g.depth == 0 {
        vec![]
    } else {
        (0..n)
            .filter(|&v| {
                let want = if g.levels[v] == g.depth { 1 } else { g.l as usize + 1 };
                g.degree(v) != want
            })
            .collect()
    };
    let clause = |name, w: Vec<usize>| Clause { name, pass: w.is_empty(), witnesses: w };
    VolcanoReport {
        depth: g.depth,
        clauses: vec![
            clause("surface_regular_degree_at_most_2", bad_surface),
            clause("unique_upward_neighbor", bad_up),
            clause("degree_l_plus_1_above_floor_1_on_floor", bad_deg),
        ],
    }
}

/// Horizontal kernels at a surface vertex.
pub fn surface_degree(g: &IsogenyGraph, v: usize) -> Result<usize, GraphError> {
    if g.levels[v] != 0 {
        return Err(GraphError::NotOnSurface(v));
    }
    Ok(g.edges.iter().filter(|e| e.from == v && g.levels[e.to] == 0).map(|e| e.multiplicity).sum())
}

/// `1 + (D / l)` for the surface order, the expected [`surface_degree`].
pub fn expected_surface_degree(q: u64, t: i64, l: u64) -> Result<i64, GraphError> {
    let (d0, _) = discriminant_frobenius_order(q, t)?;
    Ok(1 + kronecker(d0, l) as i64)
}

/// Sum of `h(O) / ord([l])` over the orders between `Z[pi]` and `O_K`
/// that are maximal at `l`; an inert `l` contributes `h(O)`.
pub fn count_components(q: u64, t: i64, l: u64) -> Result<u64, GraphError> {
    let (d0, f0) = discriminant_frobenius_order(q, t)?;
    let mut total = 0u64;
    for f in divisors(f0).into_iter().filter(|f| f % l != 0) {
        let order = QuadOrder::new(d0, f)?;
        let h = class_group(&order)?.h as u64;
        if kronecker(d0, l) == -1 {
            total += h;
            continue;
        }
        let prime = primes_above(&order, l)?[0];
        let one = order.unit_ideal().class()?;
        let mut pw = prime;
        let mut ord = 1u64;
        while pw.class()? != one {
            pw = ideal_multiply(&pw, &prime)?;
            ord += 1;
        }
        total += h / ord;
    }
    Ok(total)
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let cur = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(cur.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}
