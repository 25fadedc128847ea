//! The ideal `Hom(E1, E2) beta` of `End(E2)` cut out by an isogeny
//! `beta: E2 -> E1`, its index and Hermite basis, and whether kernels and
//! ideals correspond.
//!
//! Everything is computed twice. The closed form uses only the conductors of
//! the two endomorphism rings. The oracle computes the annihilator of
//! `ker beta` inside `End(E2)` from the action of `End(E2)` on torsion.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::elliptic_curve::{classify_with_trace, factorize, valuation, Curve, CurveClass, CurveError, Point};
use crate::endo_ring::{annihilator, common_kernel, compute_endo_conductor, local_action, EndoError};
use crate::isogeny::{Isogeny, IsogenyError};
use crate::quadratic_order::{ideal_multiply, primes_above, QuadError, QuadIdeal};
use crate::torsion::{cached_basis, mod_inverse, M_MAX};
use crate::walk::walks_from;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomError {
    #[error("curves are not isogenous over k: traces {0} and {1}")]
    TraceMismatch(i64, i64),
    #[error("the isogeny does not connect the given curves")]
    EndpointMismatch,
    #[error("kernels of degree divisible by p are not supported")]
    PPartUnsupported,
    #[error("supersingular curves have no p-part factorisation here")]
    SupersingularUnsupported,
    #[error("ideal belongs to a different order than End(E)")]
    OrderMismatch,
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Endo(#[from] EndoError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub fn rho(e: i32) -> u32 {
    e.max(0) as u32
}

/// Signed exponents `e'` with `[End(E2) : End(E1)] = prod l^e'`, zero entries omitted.
pub fn conductor_ratio(e2: &Curve, e1: &Curve) -> Result<BTreeMap<u64, i32>, HomError> {
    let (t2, t1) = (e2.trace()?, e1.trace()?);
    if t2 != t1 {
        return Err(HomError::TraceMismatch(t2, t1));
    }
    let (d2, d1) = (compute_endo_conductor(e2)?, compute_endo_conductor(e1)?);
    let mut out = BTreeMap::new();
    for (l, _) in factorize(d2.f0) {
        let e = valuation(d1.f, l) as i32 - valuation(d2.f, l) as i32;
        if e != 0 {
            out.insert(l, e);
        }
    }
    Ok(out)
}

/// Every `beta: E2 -> E1` corresponds to a kernel ideal iff all `e' <= 0`.
pub fn corresponds_to_kernel_ideal(e2: &Curve, e1: &Curve) -> Result<bool, HomError> {
    Ok(conductor_ratio(e2, e1)?.values().all(|&e| e <= 0))
}

/// `m' (Z N + Z L (b C + f gamma))` with `N = deg beta / m'^2`,
/// `L = prod l^rho(e')` and `C = prod l^(rho(e') - e')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KernelIdealBasis {
    pub m_prime: u64,
    pub n: u64,
    pub l: u64,
    pub c: u64,
    /// Least non-negative representative; only its class mod `b_modulus` is meaningful.
    pub b: u64,
    pub b_modulus: u64,
}

impl KernelIdealBasis {
    /// Hermite triple `(A, B, D)` for `Z A + Z (B + D f gamma)`.
    pub fn hermite(&self) -> (u64, u64, u64) {
        let a = self.m_prime * self.n;
        (a, self.m_prime * self.l * self.b % a * self.c % a, self.m_prime * self.l)
    }
}

impl fmt::Display for KernelIdealBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = format!("Z{} + Z{}({}*{} + fγ)", self.n, self.l, self.b, self.c);
        if self.m_prime == 1 {
            f.write_str(&inner)
        } else {
            write!(f, "{}({inner})", self.m_prime)
        }
    }
}

#[derive(Debug, Clone)]
pub struct HomIdealDescription {
    pub source: CurveClass,
    pub target: CurveClass,
    pub degree: u64,
    pub ratio: BTreeMap<u64, i32>,
    /// Index predicted from the conductors.
    pub index: u64,
    /// Index measured on torsion.
    pub oracle_index: u64,
    /// `None` for curves with every endomorphism defined over `k`.
    pub basis: Option<KernelIdealBasis>,
    /// Hermite triple of the measured ideal when `beta` is separable.
    pub oracle_hermite: Option<(u64, u64, u64)>,
    /// Whether the measured ideal has the closed-form shape.
    pub fits_shape: Option<bool>,
    /// Whether `C` divides the conductor of `End(E2)`.
    pub correction_divides_f: bool,
}

impl HomIdealDescription {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "source_j": self.source.j.to_string(),
            "target_j": self.target.j.to_string(),
            "degree": self.degree,
            "conductor_ratio": self.ratio,
            "formula_index": self.index,
            "oracle_index": self.oracle_index,
            "basis": self.basis.map(|b| b.to_string()),
            "b": self.basis.map(|b| (b.b, b.b_modulus)),
            "oracle_hermite": self.oracle_hermite,
            "fits_shape": self.fits_shape,
        })
    }
}

/// `ker beta` inside `E2[n]`, as coordinates on `(p, q)`.
fn kernel_coords(beta: &Isogeny, p: &Point, q: &Point, base: &Curve, n: u64) -> Result<Vec<(u64, u64)>, HomError> {
    let target = match p {
        Point::Affine(x, _) => {
            let emb = crate::extension::Embedding::extend(base.field(), x.field().r() / base.field().r())
                .map_err(CurveError::from)?;
            beta.target().base_change(&emb)
        }
        Point::Infinity => beta.target().clone(),
    };
    let (bp, bq) = (beta.evaluate(p)?, beta.evaluate(q)?);
    let mut negs: HashMap<Point, Vec<u64>> = HashMap::new();
    let mut cur = Point::Infinity;
    for y in 0..n {
        negs.entry(target.neg(&cur)).or_default().push(y);
        cur = target.add(&cur, &bq);
    }
    let mut out = Vec::new();
    let mut cur = Point::Infinity;
    for x in 0..n {
        if let Some(ys) = negs.get(&cur) {
            out.extend(ys.iter().map(|&y| (x, y)));
        }
        cur = target.add(&cur, &bp);
    }
    out.sort_unstable();
    Ok(out)
}

/// Largest `a` with `E[l^a]` inside the subgroup `k` of `(Z/l^e)^2`.
fn full_torsion_exponent(k: &[(u64, u64)], l: u64, e: u32) -> u32 {
    (0..=e)
        .rev()
        .find(|&a| {
            let s = l.pow(e - a) % l.pow(e);
            k.binary_search(&(s, 0)).is_ok() && k.binary_search(&(0, s)).is_ok()
        })
        .unwrap_or(0)
}

/// Local data of `I(ker beta)` at one prime.
struct LocalIdeal {
    l: u64,
    e: u32,
    n: u64,
    kernel: Vec<(u64, u64)>,
    ideal: HashSet<(u64, u64)>,
    f_gamma: [[u64; 2]; 2],
}

fn check_endpoints(e2: &Curve, e1: &Curve, beta: &Isogeny) -> Result<i64, HomError> {
    let (t2, t1) = (e2.trace()?, e1.trace()?);
    if t2 != t1 {
        return Err(HomError::TraceMismatch(t2, t1));
    }
    if classify_with_trace(beta.source(), t2) != classify_with_trace(e2, t2)
        || classify_with_trace(beta.target(), t2) != classify_with_trace(e1, t2)
    {
        return Err(HomError::EndpointMismatch);
    }
    Ok(t2)
}

fn separable_part(beta: &Isogeny) -> Result<u64, HomError> {
    let sep = beta.separable_degree();
    if sep % beta.source().field().p() == 0 && sep > 1 {
        return Err(HomError::PPartUnsupported);
    }
    if factorize(sep).iter().any(|&(l, e)| l.pow(e) > M_MAX) {
        return Err(HomError::BoundExceeded(format!("degree {sep} has a prime power above {M_MAX}")));
    }
    Ok(sep)
}

fn local_ideals(beta: &Isogeny, sep: u64) -> Result<Vec<LocalIdeal>, HomError> {
    let e2 = beta.source();
    let desc = compute_endo_conductor(e2)?;
    let mut out = Vec::new();
    for (l, e) in factorize(sep) {
        let act = local_action(e2, &desc, l, e)?;
        let (p, q) = act.generators();
        let kernel = kernel_coords(beta, &p, &q, e2, act.n)?;
        let ideal = annihilator(&kernel, &act.f_gamma, act.n).into_iter().collect();
        out.push(LocalIdeal { l, e, n: act.n, kernel, ideal, f_gamma: act.f_gamma });
    }
    Ok(out)
}

/// Hermite triple of the lattice `{(x, y) : (x, y) mod n_l in S_l for all l}`.
fn glue(parts: &[LocalIdeal], m: u64) -> (u64, u64, u64) {
    let inside = |x: u64, y: u64| parts.iter().all(|p| p.ideal.contains(&(x % p.n, y % p.n)));
    let a = (1..=m).find(|&x| inside(x, 0)).unwrap_or(m);
    let (d, b) = (1..=m)
        .find_map(|y| (0..a).find(|&x| inside(x, y)).map(|x| (y, x)))
        .unwrap_or((m, 0));
    (a, b, d)
}

/// Index of `Hom(E1, E2) beta` in `End(E2)`, by formula and by oracle.
pub fn hom_index(e2: &Curve, e1: &Curve, beta: &Isogeny) -> Result<HomIdealDescription, HomError> {
    let t = check_endpoints(e2, e1, beta)?;
    let q = e2.field().q_u64().ok_or_else(|| HomError::BoundExceeded("field too large".into()))?;
    let degree = beta.degree().to_u64().ok_or_else(|| HomError::BoundExceeded("degree overflow".into()))?;
    let sep = separable_part(beta)?;
    let source = classify_with_trace(beta.source(), t);
    let target = classify_with_trace(beta.target(), t);
    if (t as i128) * (t as i128) == 4 * q as i128 {
        return full_endomorphism_index(beta, source, target, t, degree, sep);
    }

    let ratio = conductor_ratio(beta.source(), beta.target())?;
    let f = compute_endo_conductor(beta.source())?.f;
    let l_part: u64 = ratio.iter().map(|(&l, &e)| l.pow(rho(e))).product();
    let c_part: u64 = ratio.iter().map(|(&l, &e)| l.pow((rho(e) as i32 - e) as u32)).product();
    let index = l_part * degree;

    let parts = local_ideals(beta, sep)?;
    let m_prime: u64 = parts.iter().map(|p| p.l.pow(full_torsion_exponent(&p.kernel, p.l, p.e))).product();
    let (a, b, d) = glue(&parts, sep);
    let insep = degree / sep;
    let oracle_index = a * d * insep;

    let n = degree / (m_prime * m_prime);
    let (fit, b_val, b_mod) = if insep == 1 {
        let lc = l_part * c_part;
        let g = lc.gcd(&n);
        let modulus = n / g;
        let ok = a == m_prime * n && d == m_prime * l_part && b % m_prime == 0 && (b / m_prime) % g == 0;
        let bv = if ok && modulus > 1 {
            (b / m_prime / g) % modulus * mod_inverse((lc / g) % modulus, modulus) % modulus
        } else {
            0
        };
        (Some(ok), bv, modulus)
    } else {
        (None, 0, 1)
    };
    Ok(HomIdealDescription {
        source,
        target,
        degree,
        ratio,
        index,
        oracle_index,
        basis: Some(KernelIdealBasis { m_prime, n, l: l_part, c: c_part, b: b_val, b_modulus: b_mod }),
        oracle_hermite: (insep == 1).then_some((a, b, d)),
        fits_shape: fit,
        correction_divides_f: f % c_part == 0,
    })
}

/// All of `End(E2)` is defined over `k`, so `End(E2) / n` is the full matrix
/// ring on `E2[n]` and the index is that of the matrices killing `ker beta`.
fn full_endomorphism_index(
    beta: &Isogeny,
    source: CurveClass,
    target: CurveClass,
    t: i64,
    degree: u64,
    sep: u64,
) -> Result<HomIdealDescription, HomError> {
    if sep != degree {
        return Err(HomError::PPartUnsupported);
    }
    let e2 = beta.source();
    let mut oracle_index = 1u64;
    for (l, e) in factorize(sep) {
        let n = l.pow(e);
        let basis = cached_basis(e2, t, n)?;
        let frob = basis.frobenius_matrix();
        if frob[0][1] % n != 0 || frob[1][0] % n != 0 || frob[0][0] % n != frob[1][1] % n {
            return Err(EndoError::NotInEndomorphismRing.into());
        }
        let kernel = kernel_coords(beta, &basis.p, &basis.q, e2, n)?;
        let rows = (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| kernel.iter().all(|&(u, v)| (x * u + y * v) % n == 0))
            .count() as u64;
        oracle_index *= (n * n / rows).pow(2);
    }
    Ok(HomIdealDescription {
        source,
        target,
        degree,
        ratio: BTreeMap::new(),
        index: degree * degree,
        oracle_index,
        basis: None,
        oracle_hermite: None,
        fits_shape: None,
        correction_divides_f: true,
    })
}

/// `Hom(E1, E2) = Z beta^/m' + Z (x + y f gamma) beta^ / (m' N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HomLatticeBasis {
    pub first_denominator: u64,
    pub second_numerator: (u64, u64),
    pub second_denominator: u64,
}

impl fmt::Display for HomLatticeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let over = |d: u64| if d == 1 { String::new() } else { format!("/{d}") };
        let (x, y) = self.second_numerator;
        write!(
            f,
            "Zβ^{} + Z({x} + {y}fγ)β^{}",
            over(self.first_denominator),
            over(self.second_denominator)
        )
    }
}

pub fn hom_lattice_basis(e2: &Curve, e1: &Curve, beta: &Isogeny) -> Result<HomLatticeBasis, HomError> {
    let d = hom_index(e2, e1, beta)?;
    let k = d.basis.ok_or(HomError::SupersingularUnsupported)?;
    Ok(HomLatticeBasis {
        first_denominator: k.m_prime,
        second_numerator: (k.l * k.b * k.c, k.l),
        second_denominator: k.m_prime * k.n,
    })
}

/// Whether `H(I(ker beta)) = ker beta` on the prime-to-`p` part.
pub fn kernel_round_trip(beta: &Isogeny) -> Result<bool, HomError> {
    let sep = separable_part(beta)?;
    for part in local_ideals(beta, sep)? {
        let ideal: Vec<(u64, u64)> = part.ideal.iter().copied().collect();
        if common_kernel(&ideal, &part.f_gamma, part.n) != part.kernel {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One prime-power part of a subgroup of `E`, with coordinates on the local basis.
#[derive(Debug, Clone)]
pub struct LocalSubgroup {
    pub l: u64,
    pub n: u64,
    pub coords: Vec<(u64, u64)>,
    pub points: Vec<Point>,
}

/// `H(I)`, the points killed by every element of `I`, split by prime.
pub fn kernel_of_ideal(curve: &Curve, ideal: &QuadIdeal) -> Result<Vec<LocalSubgroup>, HomError> {
    let desc = compute_endo_conductor(curve)?;
    if *ideal.order() != desc.order() {
        return Err(HomError::OrderMismatch);
    }
    let (a, _, _) = ideal.hermite();
    if a % curve.field().p() == 0 {
        return Err(HomError::PPartUnsupported);
    }
    let mut out = Vec::new();
    for (l, e) in factorize(a) {
        let n = l.pow(e);
        if n > M_MAX {
            return Err(HomError::BoundExceeded(format!("{n} exceeds {M_MAX}")));
        }
        let act = local_action(curve, &desc, l, e)?;
        let ni = n as i64;
        let gens: Vec<(u64, u64)> =
            ideal.generators().iter().map(|&(x, y)| (x.rem_euclid(ni) as u64, y.rem_euclid(ni) as u64)).collect();
        let coords = common_kernel(&crate::endo_ring::span(&gens, n), &act.f_gamma, n);
        let points = coords.iter().map(|&v| act.point(v)).collect();
        out.push(LocalSubgroup { l, n, coords, points });
    }
    Ok(out)
}

/// Kernel ideal of a separable isogeny, read off from torsion.
pub fn kernel_ideal(beta: &Isogeny) -> Result<QuadIdeal, HomError> {
    let sep = separable_part(beta)?;
    if beta.degree().to_u64() != Some(sep) {
        return Err(HomError::PPartUnsupported);
    }
    let (a, b, d) = glue(&local_ideals(beta, sep)?, sep);
    Ok(QuadIdeal::from_hermite(&compute_endo_conductor(beta.source())?.order(), a, b, d)?)
}

/// `P1^e1 P2^(e - e1)` where `P1^r = (pi)` for `q = p^r`.
#[derive(Debug, Clone)]
pub struct PPartIdeal {
    pub p1: QuadIdeal,
    pub p2: QuadIdeal,
    pub e1: u32,
    pub e2: u32,
    pub ideal: QuadIdeal,
}

pub fn p_part_ideal(curve: &Curve, e1: u32, e: u32) -> Result<PPartIdeal, HomError> {
    if e1 > e {
        return Err(HomError::BoundExceeded(format!("e1 = {e1} exceeds e = {e}")));
    }
    let t = curve.trace()?;
    let p = curve.field().p();
    if t.rem_euclid(p as i64) == 0 {
        return Err(HomError::SupersingularUnsupported);
    }
    let desc = compute_endo_conductor(curve)?;
    let order = desc.order();
    let primes = primes_above(&order, p)?;
    let pi = desc.pi_coords();
    let (p1, p2) = match primes.as_slice() {
        [x, y] if x.contains(pi) => (*x, *y),
        [x, y] => (*y, *x),
        _ => return Err(HomError::SupersingularUnsupported),
    };
    let mut ideal = order.unit_ideal();
    for _ in 0..e1 {
        ideal = ideal_multiply(&ideal, &p1)?;
    }
    for _ in e1..e {
        ideal = ideal_multiply(&ideal, &p2)?;
    }
    Ok(PPartIdeal { p1, p2, e1, e2: e - e1, ideal })
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub source_j: String,
    pub target_j: String,
    pub conductor_ratio: BTreeMap<u64, i32>,
    pub sample_degrees: Vec<u64>,
    pub formula_index: Vec<u64>,
    pub oracle_index: Vec<u64>,
    pub corresponds: bool,
    pub round_trips: Vec<bool>,
}

impl PairReport {
    pub fn consistent(&self) -> bool {
        self.formula_index == self.oracle_index && self.round_trips.iter().all(|&r| r == self.corresponds)
    }
}

/// Checks every non-backtracking walk from `e2` to `e1` of degree at most
/// `max_degree` built from `primes`.
pub fn pair_report(e2: &Curve, e1: &Curve, primes: &[u64], max_degree: u64) -> Result<PairReport, HomError> {
    let t = e2.trace()?;
    let want = classify_with_trace(e1, t);
    let mut report = PairReport {
        source_j: e2.j_invariant().to_string(),
        target_j: e1.j_invariant().to_string(),
        conductor_ratio: conductor_ratio(e2, e1)?,
        sample_degrees: vec![],
        formula_index: vec![],
        oracle_index: vec![],
        corresponds: corresponds_to_kernel_ideal(e2, e1)?,
        round_trips: vec![],
    };
    for w in walks_from(e2, t, primes, max_degree)? {
        if classify_with_trace(w.target(), t) != want {
            continue;
        }
        let d = hom_index(e2, e1, &w.isogeny)?;
        report.sample_degrees.push(d.degree);
        report.formula_index.push(d.index);
        report.oracle_index.push(d.oracle_index);
        report.round_trips.push(kernel_round_trip(&w.isogeny)?);
    }
    Ok(report)
}
