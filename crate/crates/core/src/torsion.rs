//! Torsion subgroups `E[m]` over extension fields, their bases, discrete
//! logarithms and the matrix of the `q`-power Frobenius.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::elliptic_curve::{extension_order, factorize, Curve, CurveError, Point};
use crate::extension::Embedding;
use crate::finite_field::R_MAX;

/// Largest `m` accepted by [`torsion_basis`].
pub const M_MAX: u64 = 64;

/// Basis of the `l`-Sylow subgroup `<p1> + <p2>`, orders `l^a >= l^b`.
#[derive(Clone, Debug)]
pub struct Sylow {
    pub l: u64,
    pub a: u32,
    pub b: u32,
    pub p1: Point,
    pub p2: Point,
}

struct PrimePart {
    l: u64,
    n: u64,
    p: Point,
    q: Point,
    /// `E[l]` indexed by point, value `(i, j)` with point `i P0 + j Q0`.
    table: HashMap<Point, (u64, u64)>,
}

/// A basis `(P, Q)` of `E[m]` over the smallest extension containing it.
pub struct TorsionBasis {
    pub m: u64,
    pub emb: Arc<Embedding>,
    /// The curve read over the extension.
    pub curve: Curve,
    pub p: Point,
    pub q: Point,
    parts: Vec<PrimePart>,
}

type SylowKey = (Curve, u64, usize);
static SYLOW_CACHE: OnceLock<Mutex<HashMap<SylowKey, Arc<Sylow>>>> = OnceLock::new();

fn pow_u64(l: u64, e: u32) -> u64 {
    l.checked_pow(e).expect("prime power fits in u64")
}

/// `s` with `x = s g` where `g` has order `l^a`, if `x` lies in `<g>`.
pub fn cyclic_dlog(curve: &Curve, x: &Point, g: &Point, l: u64, a: u32) -> Option<u64> {
    if a == 0 {
        return x.is_infinity().then_some(0);
    }
    let n = pow_u64(l, a);
    if !curve.scalar_mul(n as i64, x).is_infinity() {
        return None;
    }
    let g0 = curve.scalar_mul(pow_u64(l, a - 1) as i64, g);
    let mut table = Vec::with_capacity(l as usize);
    let mut acc = Point::Infinity;
    for _ in 0..l {
        table.push(acc.clone());
        acc = curve.add(&acc, &g0);
    }
    let mut s = 0u64;
    for k in 0..a {
        let diff = curve.add(x, &curve.neg(&curve.scalar_mul(s as i64, g)));
        let y = curve.scalar_mul(pow_u64(l, a - 1 - k) as i64, &diff);
        let d = table.iter().position(|t| *t == y)? as u64;
        s += d * pow_u64(l, k);
    }
    (curve.scalar_mul(s as i64, g) == *x).then_some(s)
}

/// Smallest `k` with `l^k x = O`; `None` if beyond `cap`.
fn order_exponent(curve: &Curve, x: &Point, l: u64, cap: u32) -> Option<u32> {
    let mut y = x.clone();
    for k in 0..=cap {
        if y.is_infinity() {
            return Some(k);
        }
        y = curve.scalar_mul(l as i64, &y);
    }
    None
}

/// The `l`-Sylow subgroup of `E(K)` given `|E(K)| = n`.
pub fn sylow_basis(curve: &Curve, n: &BigUint, l: u64, seed: u64) -> Sylow {
    let lb = BigUint::from(l);
    let mut v = 0u32;
    let mut h = n.clone();
    while (&h % &lb).is_zero() {
        h /= &lb;
        v += 1;
    }
    let mut s = Sylow { l, a: 0, b: 0, p1: Point::Infinity, p2: Point::Infinity };
    if v == 0 {
        return s;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let r = curve.mul_big(&h, &curve.random_point(&mut rng));
        let k = order_exponent(curve, &r, l, v).expect("point lies in the Sylow subgroup");
        if k > s.a {
            s = Sylow { l, a: k, b: 0, p1: r, p2: Point::Infinity };
        } else {
            let mut rj = r.clone();
            for j in 0..=k {
                if let Some(c) = cyclic_dlog(curve, &rj, &s.p1, l, s.a) {
                    let lj = pow_u64(l, j);
                    if j > s.b && c % lj == 0 {
                        let shift = curve.scalar_mul((c / lj) as i64, &s.p1);
                        s.p2 = curve.add(&r, &curve.neg(&shift));
                        s.b = j;
                    }
                    break;
                }
                rj = curve.scalar_mul(l as i64, &rj);
            }
        }
        if s.a + s.b == v {
            return s;
        }
    }
}

/// Cached Sylow basis of `E(GF(q^s))` for a curve over `GF(q)` with trace `t`.
pub fn sylow_over(curve: &Curve, t: i64, l: u64, s: usize) -> Result<(Arc<Embedding>, Arc<Sylow>), CurveError> {
    let f = curve.field();
    if f.r() * s > R_MAX {
        return Err(CurveError::BoundExceeded(format!(
            "extension degree {} exceeds {R_MAX}",
            f.r() * s
        )));
    }
    let emb = Embedding::extend(f, s)?;
    let key = (curve.clone(), l, s);
    let cache = SYLOW_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("sylow cache poisoned").get(&key) {
        return Ok((emb, hit.clone()));
    }
    let q = f.q_u64().ok_or_else(|| CurveError::BoundExceeded("base field too large".into()))?;
    let n = extension_order(q, t, s as u32);
    let ck = curve.base_change(&emb);
    let seed = l.wrapping_mul(0x9e37_79b9) ^ (s as u64) << 32;
    let syl = Arc::new(sylow_basis(&ck, &n, l, seed));
    let mut guard = cache.lock().expect("sylow cache poisoned");
    Ok((emb, guard.entry(key).or_insert(syl).clone()))
}

/// Two points generating `E(GF(q^s))`, summed from its Sylow bases.
pub fn group_generators(curve: &Curve, t: i64, s: usize) -> Result<(Arc<Embedding>, Point, Point), CurveError> {
    let f = curve.field();
    let q = f.q_u64().ok_or_else(|| CurveError::BoundExceeded("base field too large".into()))?;
    let n = extension_order(q, t, s as u32)
        .to_u64()
        .ok_or_else(|| CurveError::BoundExceeded(format!("group order over degree {s} too large")))?;
    let emb = Embedding::extend(f, s)?;
    let ck = curve.base_change(&emb);
    let (mut p, mut q2) = (Point::Infinity, Point::Infinity);
    for (l, _) in factorize(n) {
        let (_, syl) = sylow_over(curve, t, l, s)?;
        p = ck.add(&p, &syl.p1);
        q2 = ck.add(&q2, &syl.p2);
    }
    Ok((emb, p, q2))
}

/// Smallest `s` with `E[m]` defined over `GF(q^s)`.
pub fn torsion_degree(curve: &Curve, t: i64, m: u64) -> Result<usize, CurveError> {
    let f = curve.field();
    let q = f.q_u64().ok_or_else(|| CurveError::BoundExceeded("base field too large".into()))?;
    if m % f.p() == 0 {
        return Err(CurveError::BoundExceeded(format!("{m} is divisible by the characteristic")));
    }
    let fac = factorize(m);
    let mm = BigUint::from(m);
    let qb = BigUint::from(q);
    for s in 1..=(R_MAX / f.r()) {
        if !qb.modpow(&BigUint::from(s), &mm).is_one() && m > 1 {
            continue;
        }
        let n = extension_order(q, t, s as u32);
        if !(&n % (&mm * &mm)).is_zero() {
            continue;
        }
        let mut ok = true;
        for &(l, e) in &fac {
            let (_, syl) = sylow_over(curve, t, l, s)?;
            if syl.b < e {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(s);
        }
    }
    Err(CurveError::BoundExceeded(format!(
        "E[{m}] is not defined over any extension of degree <= {R_MAX}"
    )))
}

impl TorsionBasis {
    /// Basis of `E[m]` for any `m` coprime to `p` within the extension bound.
    pub fn new(curve: &Curve, t: i64, m: u64) -> Result<TorsionBasis, CurveError> {
        let s = torsion_degree(curve, t, m)?;
        let emb = Embedding::extend(curve.field(), s)?;
        let ck = curve.base_change(&emb);
        let mut parts = Vec::new();
        let (mut p, mut q) = (Point::Infinity, Point::Infinity);
        for (l, e) in factorize(m) {
            let (_, syl) = sylow_over(curve, t, l, s)?;
            let pl = ck.scalar_mul(pow_u64(l, syl.a - e) as i64, &syl.p1);
            let ql = ck.scalar_mul(pow_u64(l, syl.b - e) as i64, &syl.p2);
            let lm = pow_u64(l, e - 1) as i64;
            let p0 = ck.scalar_mul(lm, &pl);
            let q0 = ck.scalar_mul(lm, &ql);
            let mut table = HashMap::new();
            for i in 0..l {
                for j in 0..l {
                    let pt = ck.add(&ck.scalar_mul(i as i64, &p0), &ck.scalar_mul(j as i64, &q0));
                    table.insert(pt, (i, j));
                }
            }
            debug_assert_eq!(table.len() as u64, l * l);
            p = ck.add(&p, &pl);
            q = ck.add(&q, &ql);
            parts.push(PrimePart { l, n: pow_u64(l, e), p: pl, q: ql, table });
        }
        Ok(TorsionBasis { m, emb, curve: ck, p, q, parts })
    }

    /// `x P + y Q`.
    pub fn combine(&self, x: u64, y: u64) -> Point {
        let c = &self.curve;
        c.add(&c.scalar_mul(x as i64, &self.p), &c.scalar_mul(y as i64, &self.q))
    }

    /// `(x, y)` mod `m` with `r = x P + y Q`, or `None` if `r` is not in `E[m]`.
    pub fn dlog(&self, r: &Point) -> Option<(u64, u64)> {
        let c = &self.curve;
        let (mut x, mut y, mut modulus) = (0u64, 0u64, 1u64);
        for part in &self.parts {
            let cof = self.m / part.n;
            let u = mod_inverse(cof % part.n, part.n);
            let rl = c.scalar_mul((cof * u) as i64, r);
            let (xl, yl) = self.part_dlog(part, &rl)?;
            x = crt(x, modulus, xl, part.n);
            y = crt(y, modulus, yl, part.n);
            modulus *= part.n;
        }
        (self.combine(x, y) == *r).then_some((x, y))
    }

    fn part_dlog(&self, part: &PrimePart, r: &Point) -> Option<(u64, u64)> {
        let c = &self.curve;
        let l = part.l;
        let e = part.n.trailing_zeros_base(l);
        let (mut x, mut y) = (0u64, 0u64);
        let mut lk = 1u64;
        for k in 0..e {
            let cur = c.add(&c.scalar_mul(x as i64, &part.p), &c.scalar_mul(y as i64, &part.q));
            let diff = c.add(r, &c.neg(&cur));
            let z = c.scalar_mul(pow_u64(l, e - 1 - k) as i64, &diff);
            let &(i, j) = part.table.get(&z)?;
            x += i * lk;
            y += j * lk;
            lk *= l;
        }
        Some((x, y))
    }

    /// Matrix of `pi_q` on `(P, Q)`: columns are the coordinates of `pi P`, `pi Q`.
    pub fn frobenius_matrix(&self) -> [[u64; 2]; 2] {
        let r = self.emb.src().r();
        let fp = self.dlog(&Curve::frobenius_point(&self.p, r)).expect("Frobenius preserves E[m]");
        let fq = self.dlog(&Curve::frobenius_point(&self.q, r)).expect("Frobenius preserves E[m]");
        [[fp.0, fq.0], [fp.1, fq.1]]
    }

    /// All `m^2` points of `E[m]` indexed by `(x, y)`.
    pub fn points(&self) -> Vec<((u64, u64), Point)> {
        let c = &self.curve;
        let mut out = Vec::with_capacity((self.m * self.m) as usize);
        let mut row = Point::Infinity;
        for x in 0..self.m {
            let mut pt = row.clone();
            for y in 0..self.m {
                out.push(((x, y), pt.clone()));
                pt = c.add(&pt, &self.q);
            }
            row = c.add(&row, &self.p);
        }
        out
    }
}

trait ValBase {
    fn trailing_zeros_base(self, l: u64) -> u32;
}

impl ValBase for u64 {
    fn trailing_zeros_base(mut self, l: u64) -> u32 {
        let mut e = 0;
        while self > 1 && self % l == 0 {
            self /= l;
            e += 1;
        }
        e
    }
}

pub fn mod_inverse(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "{a} is not invertible mod {m}");
    s0.rem_euclid(m as i128) as u64
}

fn crt(a: u64, m: u64, b: u64, n: u64) -> u64 {
    let mn = (m * n) as i128;
    let k = ((b as i128 - a as i128).rem_euclid(n as i128) * mod_inverse(m % n, n) as i128) % n as i128;
    ((a as i128 + m as i128 * k).rem_euclid(mn)).to_u64().expect("fits")
}

type BasisKey = (Curve, i64, u64);
static BASIS_CACHE: OnceLock<Mutex<HashMap<BasisKey, Arc<TorsionBasis>>>> = OnceLock::new();

/// [`TorsionBasis::new`], memoised per curve model, trace and `m`.
pub fn cached_basis(curve: &Curve, t: i64, m: u64) -> Result<Arc<TorsionBasis>, CurveError> {
    let key = (curve.clone(), t, m);
    let cache = BASIS_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("basis cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let b = Arc::new(TorsionBasis::new(curve, t, m)?);
    Ok(cache.lock().expect("basis cache poisoned").entry(key).or_insert(b).clone())
}

/// A basis of `E[m]` with `m <= M_MAX` coprime to `p`; `m = 1` gives `(O, O)`.
pub fn torsion_basis(curve: &Curve, m: u64) -> Result<TorsionBasis, CurveError> {
    if m == 0 || m > M_MAX {
        return Err(CurveError::BoundExceeded(format!("m = {m} outside 1..={M_MAX}")));
    }
    let t = curve.trace()?;
    TorsionBasis::new(curve, t, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::field_create;
    use std::collections::HashSet;

    fn check_basis(b: &TorsionBasis) {
        let c = &b.curve;
        let m = b.m;
        assert!(c.scalar_mul(m as i64, &b.p).is_infinity());
        assert!(c.scalar_mul(m as i64, &b.q).is_infinity());
        for (l, _) in factorize(m) {
            assert!(!c.scalar_mul((m / l) as i64, &b.p).is_infinity());
        }
        let pts: HashSet<_> = b.points().into_iter().map(|(_, p)| p).collect();
        assert_eq!(pts.len() as u64, m * m);
    }

    #[test]
    fn bases_over_gf41_volcano_curve() {
        let f = field_create(41, 1).unwrap();
        let j5 = f.from_i64(5);
        let e = crate::elliptic_curve::curve_from_j(&f, &j5, 6).unwrap();
        let b2 = torsion_basis(&e, 2).unwrap();
        assert_eq!(b2.emb.degree(), 1);
        for m in [1, 3, 4, 6, 8, 9, 12] {
            let b = torsion_basis(&e, m).unwrap();
            check_basis(&b);
            let mut seen = HashSet::new();
            for ((x, y), pt) in b.points() {
                assert_eq!(b.dlog(&pt), Some((x, y)));
                seen.insert(pt);
            }
        }
        assert!(torsion_basis(&e, 41).is_err());
    }

    #[test]
    fn frobenius_matrix_satisfies_characteristic_polynomial() {
        let f = field_create(41, 1).unwrap();
        for j in [5, 29, 13] {
            let e = crate::elliptic_curve::curve_from_j(&f, &f.from_i64(j), 6).unwrap();
            for m in [4, 8, 9] {
                let b = torsion_basis(&e, m).unwrap();
                let mm = b.frobenius_matrix();
                let mul = |a: [[u64; 2]; 2], c: [[u64; 2]; 2]| {
                    let mut o = [[0u64; 2]; 2];
                    for i in 0..2 {
                        for k in 0..2 {
                            o[i][k] = (a[i][0] * c[0][k] + a[i][1] * c[1][k]) % m;
                        }
                    }
                    o
                };
                let sq = mul(mm, mm);
                for i in 0..2 {
                    for k in 0..2 {
                        let id = u64::from(i == k);
                        let v = (sq[i][k] as i64 - 6 * mm[i][k] as i64 + 41 * id as i64).rem_euclid(m as i64);
                        assert_eq!(v, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn cyclic_dlog_roundtrip() {
        let f = field_create(41, 1).unwrap();
        let e = crate::elliptic_curve::curve_from_j(&f, &f.from_i64(29), 6).unwrap();
        let n = BigUint::from(36u32);
        let s = sylow_basis(&e, &n, 2, 7);
        assert_eq!(s.a + s.b, 2);
        for k in 0..(1u64 << s.a) {
            let x = e.scalar_mul(k as i64, &s.p1);
            assert_eq!(cyclic_dlog(&e, &x, &s.p1, 2, s.a), Some(k));
        }
    }
}
