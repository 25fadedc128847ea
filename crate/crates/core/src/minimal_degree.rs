//! Non-trivial minimal degrees: `Md_k(E2, E1)` is the least degree other
//! than one of an isogeny `E2 -> E1` over `k`, and `Md` is the same over the
//! algebraic closure.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::elliptic_curve::{classify_with_trace, factorize, Curve, CurveClass, CurveError};
use crate::finite_field::Field;
use crate::isogeny::{frobenius_isogeny, kernel_poly_from_generator, Isogeny, IsogenyError};
use crate::isogeny_graph::{classes_with_trace, GraphError};
use crate::quadratic_order::two_over_pi_sqrt_floor;
use crate::torsion::cached_basis;
use crate::walk::walks_from;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MdError {
    #[error("curves are not isogenous over k: traces {0} and {1}")]
    NotIsogenous(i64, i64),
    #[error("no isogeny of degree at most {0} found")]
    SearchExhausted(u64),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// `floor((2/pi) sqrt(4q - t^2))`.
pub fn e_b(q: u64, t: i64) -> u64 {
    let d = 4 * q as i128 - (t as i128) * (t as i128);
    two_over_pi_sqrt_floor(d.max(0) as u64)
}

#[derive(Debug, Clone)]
pub struct MdResult {
    pub source: CurveClass,
    pub target: CurveClass,
    pub md: u64,
    /// Prime degrees of the cyclic part, in the order applied.
    pub chain: Vec<u64>,
    /// The integer `a` of the scalar factor `[a]`.
    pub scalar: u64,
    /// Whether the witness starts with a Frobenius step.
    pub frobenius: bool,
    pub witness: Isogeny,
    pub bound: u64,
}

impl MdResult {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "j1": self.source.j.to_string(),
            "j2": self.target.j.to_string(),
            "md": self.md,
            "eB": self.bound,
            "witness_degree_chain": self.chain,
            "scalar": self.scalar,
            "frobenius": self.frobenius,
        })
    }
}

fn is_supersingular(curve: &Curve) -> Result<bool, CurveError> {
    Ok(curve.trace()?.rem_euclid(curve.field().p() as i64) == 0)
}

/// The proven search bound for a pair of distinct `k`-classes with trace `t`.
pub fn search_bound(q: u64, p: u64, t: i64) -> u64 {
    if (t as i128) * (t as i128) == 4 * q as i128 {
        p
    } else {
        e_b(q, t).max(4)
    }
}

fn primes_up_to(n: u64, skip: u64) -> Vec<u64> {
    (2..=n).filter(|&l| l != skip && factorize(l).len() == 1 && factorize(l)[0].1 == 1).collect()
}

fn integer_sqrt(n: u64) -> u64 {
    (1..=n).take_while(|a| a * a <= n).last().unwrap_or(0)
}

/// `Md_k` from `source` to every class reachable within `bound`.
///
/// A degree-`n` isogeny is `[a]` composed with a cyclic one of degree
/// `b = n / a^2`, and a rational cyclic kernel is a non-backtracking walk of
/// rational prime steps. Degrees divisible by `p` enter through a leading
/// Frobenius step when `p <= bound`.
pub fn md_from(source: &Curve, bound: u64) -> Result<HashMap<CurveClass, MdResult>, MdError> {
    let t = source.trace()?;
    let p = source.field().p();
    let primes = primes_up_to(bound, p);
    let mut starts: Vec<(Isogeny, bool)> = vec![(Isogeny::identity(source), false)];
    if p <= bound && source.field().r() > 1 {
        starts.push((frobenius_isogeny(source, 1), true));
    }
    let src_class = classify_with_trace(source, t);
    let mut best: HashMap<CurveClass, MdResult> = HashMap::new();
    let mut offer = |iso: Isogeny, chain: Vec<u64>, frob: bool, b: u64| -> Result<(), MdError> {
        let target = classify_with_trace(iso.target(), t);
        // smallest a >= 1 with a^2 b >= 2
        let a = if b == 1 { 2 } else { 1 };
        let md = a * a * b;
        if md > bound.max(4) {
            return Ok(());
        }
        if best.get(&target).is_some_and(|r| r.md <= md) {
            return Ok(());
        }
        let witness = if a == 1 { iso } else { Isogeny::compose(&iso, &Isogeny::scalar(source, a as i64))? };
        best.insert(
            target.clone(),
            MdResult {
                source: src_class.clone(),
                target,
                md,
                chain,
                scalar: a,
                frobenius: frob,
                witness,
                bound,
            },
        );
        Ok(())
    };
    for (start, frob) in starts {
        let base = if frob { p } else { 1 };
        let mid = start.target().clone();
        offer(start.clone(), if frob { vec![p] } else { vec![] }, frob, base)?;
        if bound / base < 2 {
            continue;
        }
        for w in walks_from(&mid, t, &primes, bound / base)? {
            let iso = Isogeny::compose(&w.isogeny, &start)?;
            let mut chain = if frob { vec![p] } else { vec![] };
            chain.extend(&w.chain);
            offer(iso, chain, frob, base * w.degree())?;
        }
    }
    Ok(best)
}

/// `Md_k(E2, E1)`, or `Md(E2, E1)` when `over_k` is false.
pub fn md_between(e2: &Curve, e1: &Curve, over_k: bool) -> Result<MdResult, MdError> {
    if !over_k {
        return md_closure(e2, e1);
    }
    let (t2, t1) = (e2.trace()?, e1.trace()?);
    if t2 != t1 {
        return Err(MdError::NotIsogenous(t2, t1));
    }
    let field = e2.field();
    let q = field.q_u64().ok_or_else(|| MdError::BoundExceeded("field too large".into()))?;
    let bound = search_bound(q, field.p(), t2);
    let want = classify_with_trace(e1, t1);
    let forward = md_from(e2, bound)?.remove(&want);
    // a leading Verschiebung from e2 is a trailing Frobenius into e2 from e1
    let backward = if field.p() <= bound && field.r() > 1 {
        md_from(e1, bound)?.remove(&classify_with_trace(e2, t2)).filter(|r| r.frobenius)
    } else {
        None
    };
    let candidates = [forward, reversed(backward, t2)?];
    candidates
        .into_iter()
        .flatten()
        .min_by_key(|r| r.md)
        .ok_or(MdError::SearchExhausted(bound))
}

fn reversed(r: Option<MdResult>, t: i64) -> Result<Option<MdResult>, MdError> {
    let Some(r) = r else { return Ok(None) };
    let witness = r.witness.dual(t)?;
    let mut chain = r.chain.clone();
    chain.reverse();
    Ok(Some(MdResult { source: r.target, target: r.source, chain, witness, ..r }))
}

/// `Md(E2, E1)` over the closure: every cyclic subgroup of `E2[b]` over an
/// extension field, targets compared by `j` alone.
fn md_closure(e2: &Curve, e1: &Curve) -> Result<MdResult, MdError> {
    let field = e2.field();
    if e1.field() != field {
        return Err(MdError::Curve(CurveError::CurveMismatch));
    }
    let p = field.p();
    let q = field.q_u64().ok_or_else(|| MdError::BoundExceeded("field too large".into()))?;
    let t = e2.trace()?;
    let j1 = e1.j_invariant();
    let same = e2.j_invariant() == j1;
    let bound = if same { 4 } else { search_bound(q, p, t) };
    let cls = (classify_with_trace(e2, t), classify_with_trace(e1, e1.trace()?));
    for n in 2..=bound {
        if n % p == 0 {
            if n == p && e2.j_invariant().frobenius() == j1 {
                let w = frobenius_isogeny(e2, 1);
                return Ok(closure_result(cls, n, vec![p], 1, true, w, bound));
            }
            continue;
        }
        for a in (1..=integer_sqrt(n)).filter(|a| n % (a * a) == 0) {
            let b = n / (a * a);
            if b == 1 {
                if same {
                    let w = Isogeny::scalar(e2, a as i64);
                    return Ok(closure_result(cls, n, vec![], a, false, w, bound));
                }
                continue;
            }
            if let Some(w) = cyclic_to_j(e2, t, b, &j1)? {
                let w = Isogeny::compose(&w, &Isogeny::scalar(w.source(), a as i64))?;
                let chain = factorize(b).iter().flat_map(|&(l, e)| std::iter::repeat(l).take(e as usize)).collect();
                return Ok(closure_result(cls, n, chain, a, false, w, bound));
            }
        }
    }
    Err(MdError::SearchExhausted(bound))
}

fn closure_result(
    (source, target): (CurveClass, CurveClass),
    md: u64,
    chain: Vec<u64>,
    scalar: u64,
    frobenius: bool,
    witness: Isogeny,
    bound: u64,
) -> MdResult {
    MdResult { source, target, md, chain, scalar, frobenius, witness, bound }
}

/// A cyclic isogeny of degree `b` from `curve` to a curve with invariant `j`,
/// defined over the field of `E[b]`.
fn cyclic_to_j(curve: &Curve, t: i64, b: u64, j: &crate::finite_field::FieldElement) -> Result<Option<Isogeny>, MdError> {
    let basis = cached_basis(curve, t, b)?;
    let jk = basis.emb.map(j);
    let mut seen = HashSet::new();
    for x in 0..b {
        for y in 0..b {
            if gcd(gcd(x, y), b) != 1 {
                continue;
            }
            let key = (1..b)
                .filter(|&u| gcd(u, b) == 1)
                .map(|u| (u * x % b, u * y % b))
                .min()
                .unwrap_or((x, y));
            if !seen.insert(key) {
                continue;
            }
            let g = basis.combine(x, y);
            let kp = kernel_poly_from_generator(&basis.curve, &g, b)?;
            let phi = Isogeny::from_kernel_poly(&basis.curve, &kp);
            if phi.target().j_invariant() == jk {
                return Ok(Some(phi));
            }
        }
    }
    Ok(None)
}

/// A row of the CM table with the congruence conditions under which the
/// reduction mod `p` has an endomorphism of degree `md`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CmTableEntry {
    pub tau: &'static str,
    pub j: i64,
    pub md: u64,
    pub modulus: u64,
    pub supersingular_residues: &'static [u64],
    pub supersingular_excluded: &'static [u64],
    pub ordinary_residues: &'static [u64],
}

pub const CM_TABLE: [CmTableEntry; 6] = [
    CmTableEntry {
        tau: "sqrt(-1)",
        j: 1728,
        md: 2,
        modulus: 4,
        supersingular_residues: &[3],
        supersingular_excluded: &[],
        ordinary_residues: &[1],
    },
    CmTableEntry {
        tau: "sqrt(-2)",
        j: 8000,
        md: 2,
        modulus: 8,
        supersingular_residues: &[5, 7],
        supersingular_excluded: &[],
        ordinary_residues: &[1, 3],
    },
    CmTableEntry {
        tau: "(1+sqrt(-7))/2",
        j: -3375,
        md: 2,
        modulus: 7,
        supersingular_residues: &[3, 5, 6],
        supersingular_excluded: &[],
        ordinary_residues: &[1, 2, 4],
    },
    CmTableEntry {
        tau: "(1+sqrt(-3))/2",
        j: 0,
        md: 3,
        modulus: 3,
        supersingular_residues: &[2],
        supersingular_excluded: &[2, 5],
        ordinary_residues: &[1],
    },
    CmTableEntry {
        tau: "sqrt(-3)",
        j: 54000,
        md: 3,
        modulus: 3,
        supersingular_residues: &[2],
        supersingular_excluded: &[2, 5, 11, 17, 23],
        ordinary_residues: &[1],
    },
    CmTableEntry {
        tau: "(1+sqrt(-11))/2",
        j: -32768,
        md: 3,
        modulus: 11,
        supersingular_residues: &[2, 6, 7, 8, 10],
        supersingular_excluded: &[2, 7, 13, 17, 19],
        ordinary_residues: &[1, 3, 4, 5, 9],
    },
];

/// `Md(E)` from `j mod p`, `p` and whether `E` is supersingular.
pub fn md_from_table(j: u64, p: u64, supersingular: bool) -> u64 {
    if supersingular && p <= 3 && j == 0 {
        return 2;
    }
    for md in [2, 3] {
        for row in CM_TABLE.iter().filter(|r| r.md == md) {
            if row.j.rem_euclid(p as i64) as u64 != j {
                continue;
            }
            let res = p % row.modulus;
            let hit = if supersingular {
                row.supersingular_residues.contains(&res) && !row.supersingular_excluded.contains(&p)
            } else {
                row.ordinary_residues.contains(&res)
            };
            if hit {
                return md;
            }
        }
    }
    4
}

/// `Md(E)` by the CM classification; `j` outside the prime field gives 4.
pub fn md_classifier(curve: &Curve) -> Result<u64, MdError> {
    let p = curve.field().p();
    Ok(match curve.j_invariant().prime_field_value() {
        Some(j) => md_from_table(j, p, is_supersingular(curve)?),
        None => 4,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairMd {
    pub j1: String,
    pub j2: String,
    pub twist1: usize,
    pub twist2: usize,
    pub md: u64,
    #[serde(rename = "eB")]
    pub e_b: u64,
    pub witness_degree_chain: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RbReport {
    pub q: u64,
    pub trace: i64,
    #[serde(rename = "eB")]
    pub e_b: u64,
    #[serde(rename = "rB")]
    pub r_b: u64,
    pub witness: (String, String),
    pub pairs: Vec<PairMd>,
}

/// `rB(k, t)`: the largest `Md_k` over unordered pairs of classes with trace `t`,
/// counting a class paired with itself.
pub fn r_b(field: &Arc<Field>, t: i64) -> Result<RbReport, MdError> {
    let q = field.q_u64().ok_or_else(|| MdError::BoundExceeded("field too large".into()))?;
    let classes = classes_with_trace(field, t)?;
    let bound = search_bound(q, field.p(), t);
    let mut pairs = Vec::new();
    for (i, c2) in classes.iter().enumerate() {
        let reach = md_from(&c2.representative, bound)?;
        for c1 in &classes[i..] {
            let r = match reach.get(c1) {
                Some(r) if r.md < field.p() => r.clone(),
                _ => md_between(&c2.representative, &c1.representative, true)?,
            };
            pairs.push(PairMd {
                j1: c2.j.to_string(),
                j2: c1.j.to_string(),
                twist1: c2.twist_index,
                twist2: c1.twist_index,
                md: r.md,
                e_b: e_b(q, t),
                witness_degree_chain: r.chain,
            });
        }
    }
    let top = pairs.iter().max_by_key(|p| p.md).expect("at least one class");
    Ok(RbReport {
        q,
        trace: t,
        e_b: e_b(q, t),
        r_b: top.md,
        witness: (top.j1.clone(), top.j2.clone()),
        pairs: pairs.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupersingularReport {
    pub p: u64,
    /// `floor((4/pi) sqrt(p))`.
    pub fp_bound: u64,
    pub fp_max: u64,
    pub fp_violations: Vec<(String, String, u64)>,
    /// Pairs over `GF(p^2)` with trace other than `+-2p` whose `Md` is not `p`.
    pub fp2_exceptions: Vec<(String, String, i64, u64)>,
    pub fp2_pairs: usize,
}

/// Checks the supersingular bounds for one small prime and reports deviations.
pub fn md_supersingular_bounds(p: u64) -> Result<SupersingularReport, MdError> {
    let fp = crate::finite_field::field_create(p, 1).map_err(CurveError::from)?;
    let fp_bound = e_b(p, 0);
    let mut fp_max = 0;
    let mut fp_violations = Vec::new();
    let classes = classes_with_trace(&fp, 0)?;
    for (i, c2) in classes.iter().enumerate() {
        for c1 in &classes[i + 1..] {
            let r = md_between(&c2.representative, &c1.representative, true)?;
            fp_max = fp_max.max(r.md);
            if r.md > fp_bound {
                fp_violations.push((c2.j.to_string(), c1.j.to_string(), r.md));
            }
        }
    }
    let fp2 = crate::finite_field::field_create(p, 2).map_err(CurveError::from)?;
    let mut fp2_exceptions = Vec::new();
    let mut fp2_pairs = 0;
    for t in [0, p as i64, -(p as i64)] {
        let Ok(classes) = classes_with_trace(&fp2, t) else { continue };
        for (i, c2) in classes.iter().enumerate() {
            let reach = md_from(&c2.representative, p)?;
            for c1 in &classes[i + 1..] {
                fp2_pairs += 1;
                let md = match reach.get(c1) {
                    Some(r) => r.md,
                    None => md_between(&c2.representative, &c1.representative, true)?.md,
                };
                if md != p {
                    fp2_exceptions.push((c2.j.to_string(), c1.j.to_string(), t, md));
                }
            }
        }
    }
    Ok(SupersingularReport { p, fp_bound, fp_max, fp_violations, fp2_exceptions, fp2_pairs })
}


fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_curve::curve_from_j;
    use crate::finite_field::field_create;

    fn curve(p: u64, j: i64, t: i64) -> Curve {
        let f = field_create(p, 1).unwrap();
        curve_from_j(&f, &f.from_i64(j), t).unwrap()
    }

    #[test]
    fn e_b_matches_float_formula() {
        for (q, t) in [(41u64, 6i64), (53, -4), (67, 12), (53, 0), (101, 3), (1009, 17)] {
            let d = (4 * q as i64 - t * t) as f64;
            assert_eq!(e_b(q, t), (2.0 / std::f64::consts::PI * d.sqrt()).floor() as u64);
        }
        assert_eq!((e_b(41, 6), e_b(53, -4), e_b(67, 12)), (7, 8, 7));
    }

    #[test]
    fn volcano_floor_to_level_one() {
        let r = md_between(&curve(41, 29, 6), &curve(41, 25, 6), true).unwrap();
        assert_eq!(r.md, 6);
        assert_eq!(r.chain, vec![3, 2]);
        assert_eq!(r.witness.degree(), 6u32.into());
        assert_eq!(r.witness.target().j_invariant().index_u64(), 25);
        let r = md_between(&curve(41, 29, 6), &curve(41, 22, 6), true).unwrap();
        assert_eq!(r.md, 3);
    }

    #[test]
    fn symmetric_over_k() {
        let js = [5, 29, 22, 13];
        for &a in &js {
            for &b in &js {
                let x = md_between(&curve(41, a, 6), &curve(41, b, 6), true).unwrap().md;
                let y = md_between(&curve(41, b, 6), &curve(41, a, 6), true).unwrap().md;
                assert_eq!(x, y, "{a} {b}");
            }
        }
    }

    #[test]
    fn different_traces_are_not_isogenous() {
        let f = field_create(41, 1).unwrap();
        let a = curve_from_j(&f, &f.from_i64(29), 6).unwrap();
        let b = curve_from_j(&f, &f.from_i64(29), -6).unwrap();
        assert_eq!(md_between(&a, &b, true).unwrap_err(), MdError::NotIsogenous(6, -6));
    }

    #[test]
    fn r_b_values() {
        for (p, t, rb) in [(41, 6, 6), (53, -4, 7), (67, 12, 5), (53, 0, 6)] {
            let f = field_create(p, 1).unwrap();
            let r = r_b(&f, t).unwrap();
            assert_eq!(r.r_b, rb, "p={p} t={t}");
            assert!(r.pairs.iter().all(|x| x.md <= search_bound(p, p, t)));
        }
    }

    #[test]
    fn classifier_examples() {
        assert_eq!(md_from_table(1728 % 43, 43, true), 2);
        assert_eq!(md_from_table(1728 % 41, 41, false), 2);
        assert_eq!(md_from_table(0, 5, true), 2);
        assert_eq!(md_from_table(0, 11, true), 3);
        assert_eq!(md_from_table(0, 7, false), 3);
        assert_eq!(md_from_table(54000 % 11, 11, true), 2);
        assert_eq!(md_from_table(54000 % 29, 29, true), 3);
        assert_eq!(md_from_table(0, 3, true), 2);
    }

    #[test]
    fn classifier_agrees_with_search() {
        for p in [5u64, 7, 11, 13] {
            let f = field_create(p, 1).unwrap();
            for j in 0..p as i64 {
                for c in crate::elliptic_curve::classes_with_j(&f, &f.from_i64(j)).unwrap() {
                    let e = &c.representative;
                    let md = md_between(e, e, false).unwrap().md;
                    assert_eq!(md_classifier(e).unwrap(), md, "p={p} j={j} t={}", c.trace);
                }
            }
        }
    }
}
