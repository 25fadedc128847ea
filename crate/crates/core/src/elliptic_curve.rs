//! Short-Weierstrass curves `y^2 = x^3 + Ax + B` over `GF(p^r)`, `p > 3`.
//!
//! Besides the group law this module fixes how isomorphism classes are
//! named: every `j` has a deterministic list of twist representatives and a
//! [`CurveClass`] is `(j, trace, twist_index)` into that list.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

use crate::extension::Embedding;
use crate::finite_field::{Field, FieldElement, FieldError};
use crate::poly::Poly;

/// Largest field size for exhaustive point counting.
pub const COUNT_MAX: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CurveError {
    #[error("singular curve (4A^3 + 27B^2 = 0)")]
    SingularCurve,
    #[error("characteristic {0} is not supported (need p > 3)")]
    UnsupportedCharacteristic(u64),
    #[error("points or curves belong to different curves")]
    CurveMismatch,
    #[error("no twist with j = {j} has trace {trace}")]
    NoSuchTwist { j: String, trace: i64 },
    #[error("t^2 - 4q = {0} is not negative")]
    NotImaginaryQuadratic(i64),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A point in affine coordinates or the point at infinity.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Point {
    Infinity,
    Affine(FieldElement, FieldElement),
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine(x, _) => Some(x),
        }
    }

    pub fn y(&self) -> Option<&FieldElement> {
        match self {
            Point::Infinity => None,
            Point::Affine(_, y) => Some(y),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Infinity => write!(f, "O"),
            Point::Affine(x, y) => write!(f, "({x}, {y})"),
        }
    }
}

/// `y^2 = x^3 + Ax + B` with a write-once cache of `(|E(k)|, t)`.
#[derive(Clone)]
pub struct Curve {
    a: FieldElement,
    b: FieldElement,
    count: OnceLock<(u64, i64)>,
}

impl PartialEq for Curve {
    fn eq(&self, o: &Self) -> bool {
        self.a == o.a && self.b == o.b
    }
}
impl Eq for Curve {}

impl std::hash::Hash for Curve {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
    }
}

impl fmt::Debug for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3 + ({})x + ({}) over {}", self.a, self.b, self.a.field())
    }
}

impl Curve {
    pub fn new(a: FieldElement, b: FieldElement) -> Result<Curve, CurveError> {
        if a.field() != b.field() {
            return Err(FieldError::FieldMismatch.into());
        }
        let p = a.field().p();
        if p <= 3 {
            return Err(CurveError::UnsupportedCharacteristic(p));
        }
        let c = Curve { a, b, count: OnceLock::new() };
        if c.discriminant().is_zero() {
            return Err(CurveError::SingularCurve);
        }
        Ok(c)
    }

    pub fn from_i64(field: &Arc<Field>, a: i64, b: i64) -> Result<Curve, CurveError> {
        Curve::new(field.from_i64(a), field.from_i64(b))
    }

    pub fn field(&self) -> &Arc<Field> {
        self.a.field()
    }

    pub fn a(&self) -> &FieldElement {
        &self.a
    }

    pub fn b(&self) -> &FieldElement {
        &self.b
    }

    /// `4A^3 + 27B^2`.
    pub fn discriminant(&self) -> FieldElement {
        &(&self.a * &self.a * &self.a).scale(4) + &(&self.b * &self.b).scale(27)
    }

    pub fn j_invariant(&self) -> FieldElement {
        let a3 = (&self.a * &self.a * &self.a).scale(4);
        let d = self.discriminant();
        (a3.scale(1728)).div(&d).expect("nonsingular curve")
    }

    /// `x^3 + Ax + B`.
    pub fn rhs(&self, x: &FieldElement) -> FieldElement {
        &(&(x * x) * x) + &(&(&self.a * x) + &self.b)
    }

    pub fn contains(&self, p: &Point) -> bool {
        match p {
            Point::Infinity => true,
            Point::Affine(x, y) => x.field() == self.field() && &(y * y) == &self.rhs(x),
        }
    }

    fn check(&self, p: &Point) -> Result<(), CurveError> {
        match p {
            Point::Affine(x, _) if x.field() != self.field() => Err(CurveError::CurveMismatch),
            _ => Ok(()),
        }
    }

    pub fn neg(&self, p: &Point) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.clone(), -y),
        }
    }

    /// Chord-and-tangent addition; errors only on a field mismatch.
    pub fn point_add(&self, p: &Point, q: &Point) -> Result<Point, CurveError> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.add(p, q))
    }

    pub fn add(&self, p: &Point, q: &Point) -> Point {
        let (x1, y1) = match p {
            Point::Infinity => return q.clone(),
            Point::Affine(x, y) => (x, y),
        };
        let (x2, y2) = match q {
            Point::Infinity => return p.clone(),
            Point::Affine(x, y) => (x, y),
        };
        let lambda = if x1 == x2 {
            if (y1 + y2).is_zero() {
                return Point::Infinity;
            }
            let num = &(x1 * x1).scale(3) + &self.a;
            num.div(&y1.scale(2)).expect("nonzero denominator")
        } else {
            (y2 - y1).div(&(x2 - x1)).expect("distinct abscissae")
        };
        let x3 = &(&(&lambda * &lambda) - x1) - x2;
        let y3 = &(&lambda * &(x1 - &x3)) - y1;
        Point::Affine(x3, y3)
    }

    pub fn double(&self, p: &Point) -> Point {
        self.add(p, p)
    }

    pub fn mul_big(&self, k: &BigUint, p: &Point) -> Point {
        let mut acc = Point::Infinity;
        for i in (0..k.bits()).rev() {
            acc = self.double(&acc);
            if k.bit(i) {
                acc = self.add(&acc, p);
            }
        }
        acc
    }

    pub fn mul_bigint(&self, k: &BigInt, p: &Point) -> Point {
        let r = self.mul_big(k.magnitude(), p);
        if k.sign() == Sign::Minus {
            self.neg(&r)
        } else {
            r
        }
    }

    /// `[m]P`.
    pub fn scalar_mul(&self, m: i64, p: &Point) -> Point {
        let r = self.mul_big(&BigUint::from(m.unsigned_abs()), p);
        if m < 0 {
            self.neg(&r)
        } else {
            r
        }
    }

    /// A point with uniformly random abscissa among those on the curve.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        loop {
            let x = self.field().random(rng);
            if let Some((y0, y1)) = self.rhs(&x).sqrt() {
                let y = if rng.gen::<bool>() { y0 } else { y1 };
                return Point::Affine(x, y);
            }
        }
    }

    /// Every rational point, infinity first; for small fields only.
    pub fn points(&self) -> Vec<Point> {
        let mut out = vec![Point::Infinity];
        for x in self.field().elements() {
            if let Some((y0, y1)) = self.rhs(&x).sqrt() {
                if y0 == y1 {
                    out.push(Point::Affine(x, y0));
                } else {
                    out.push(Point::Affine(x.clone(), y0));
                    out.push(Point::Affine(x, y1));
                }
            }
        }
        out
    }

    /// `(|E(k)|, t)` by an exhaustive sweep over abscissae; cached.
    pub fn count_points(&self) -> Result<(u64, i64), CurveError> {
        if let Some(c) = self.count.get() {
            return Ok(*c);
        }
        let q = self
            .field()
            .q_u64()
            .filter(|&q| q <= COUNT_MAX)
            .ok_or_else(|| CurveError::BoundExceeded("field too large for point counting".into()))?;
        let mut total: i64 = 1;
        for x in self.field().elements() {
            total += 1 + self.rhs(&x).legendre() as i64;
        }
        let order = total as u64;
        let t = q as i64 + 1 - total;
        Ok(*self.count.get_or_init(|| (order, t)))
    }

    pub fn trace(&self) -> Result<i64, CurveError> {
        Ok(self.count_points()?.1)
    }

    pub fn order(&self) -> Result<u64, CurveError> {
        Ok(self.count_points()?.0)
    }

    /// Records a trace known by other means (e.g. along an isogeny).
    pub fn with_trace(self, t: i64) -> Curve {
        if let Some(q) = self.field().q_u64() {
            let _ = self.count.set(((q as i64 + 1 - t) as u64, t));
        }
        self
    }

    /// The twist `(d^2 A, d^3 B)`.
    pub fn quadratic_twist(&self, d: &FieldElement) -> Curve {
        let d2 = d * d;
        let d3 = &d2 * d;
        Curve::new(&self.a * &d2, &self.b * &d3).expect("twist of a nonsingular curve")
    }

    /// The same equation read over a larger field.
    pub fn base_change(&self, emb: &Embedding) -> Curve {
        Curve::new(emb.map(&self.a), emb.map(&self.b)).expect("nonsingular")
    }

    /// `(x, y) -> (x^(p^k), y^(p^k))` on coordinates.
    pub fn frobenius_point(p: &Point, k: usize) -> Point {
        match p {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => Point::Affine(x.frobenius_pow(k), y.frobenius_pow(k)),
        }
    }

    /// An invariant of the `k`-isomorphism class among curves with this `j`.
    pub fn class_key(&self) -> FieldElement {
        let f = self.field();
        let qm1 = f.q().clone() - 1u32;
        if self.b.is_zero() {
            let g = qm1.gcd(&BigUint::from(4u32));
            self.a.pow(&(&qm1 / g))
        } else if self.a.is_zero() {
            let g = qm1.gcd(&BigUint::from(6u32));
            self.b.pow(&(&qm1 / g))
        } else {
            f.from_i64((&self.a * &self.b).legendre() as i64)
        }
    }
}

/// Apply `(x, y) -> (u^2 x, u^3 y)`.
pub fn apply_iso(u: &FieldElement, p: &Point) -> Point {
    match p {
        Point::Infinity => Point::Infinity,
        Point::Affine(x, y) => {
            let u2 = u * u;
            let u3 = &u2 * u;
            Point::Affine(&u2 * x, &u3 * y)
        }
    }
}

/// All `u` with `to = (u^4 A, u^6 B)` for `from = (A, B)`, ascending by index.
pub fn isomorphisms(from: &Curve, to: &Curve) -> Vec<FieldElement> {
    let f = from.field();
    if from.field() != to.field() {
        return vec![];
    }
    if from.a.is_zero() != to.a.is_zero() || from.b.is_zero() != to.b.is_zero() {
        return vec![];
    }
    let cand = if !from.a.is_zero() {
        let alpha = to.a.div(&from.a).expect("nonzero");
        let p = Poly::new(f, vec![-&alpha, f.zero(), f.zero(), f.zero(), f.one()]);
        p.roots()
    } else {
        let beta = to.b.div(&from.b).expect("nonzero");
        let mut c = vec![f.zero(); 7];
        c[0] = -&beta;
        c[6] = f.one();
        Poly::new(f, c).roots()
    };
    cand.into_iter()
        .filter(|u| {
            let u2 = u * u;
            let u4 = &u2 * &u2;
            let u6 = &u4 * &u2;
            &u4 * &from.a == to.a && &u6 * &from.b == to.b
        })
        .collect()
}

/// A `k`-isomorphism class: `j`, trace and position in the twist scan.
#[derive(Clone, Debug)]
pub struct CurveClass {
    pub j: FieldElement,
    pub trace: i64,
    pub twist_index: usize,
    pub representative: Curve,
}

impl PartialEq for CurveClass {
    fn eq(&self, o: &Self) -> bool {
        self.j == o.j && self.trace == o.trace && self.twist_index == o.twist_index
    }
}
impl Eq for CurveClass {}

impl std::hash::Hash for CurveClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.j.hash(state);
        self.trace.hash(state);
        self.twist_index.hash(state);
    }
}

impl fmt::Display for CurveClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E(j={}, t={}, #{})", self.j, self.trace, self.twist_index)
    }
}

impl CurveClass {
    /// Sort key: ascending `j` index, then twist index.
    pub fn sort_key(&self) -> (BigUint, usize) {
        (self.j.index(), self.twist_index)
    }
}

/// Pairwise non-isomorphic curves with invariant `j`, in scan order.
///
/// Generic `j`: the model `(3j(1728-j), 2j(1728-j)^2)` and its twist by the
/// least non-residue. `j = 1728` scans `y^2 = x^3 + Ax`, `j = 0` scans
/// `y^2 = x^3 + B`, over nonzero parameters in index order.
pub fn twist_representatives(field: &Arc<Field>, j: &FieldElement) -> Vec<Curve> {
    let zero = field.zero();
    let c1728 = field.from_i64(1728);
    if j != &zero && j != &c1728 {
        let k = &c1728 - j;
        let a = (j * &k).scale(3);
        let b = (&(j * &k) * &k).scale(2);
        let e = Curve::new(a, b).expect("generic j gives a nonsingular model");
        let d = field.nonresidue();
        let t = e.quadratic_twist(&d);
        return vec![e, t];
    }
    let qm1 = field.q().clone() - 1u32;
    let n = if j == &zero { 6u32 } else { 4u32 };
    let g = qm1.gcd(&BigUint::from(n)).to_usize().unwrap();
    let mut reps: Vec<Curve> = Vec::new();
    let mut keys: Vec<FieldElement> = Vec::new();
    let mut idx = 1u64;
    while reps.len() < g {
        let c = field.element_from_index(idx);
        idx += 1;
        let e = if j == &zero {
            Curve::new(zero.clone(), c)
        } else {
            Curve::new(c, zero.clone())
        }
        .expect("nonsingular");
        let key = e.class_key();
        if !keys.contains(&key) {
            keys.push(key);
            reps.push(e);
        }
    }
    reps
}

/// Names the class of `curve` given its trace.
pub fn classify_with_trace(curve: &Curve, trace: i64) -> CurveClass {
    let j = curve.j_invariant();
    let key = curve.class_key();
    let reps = twist_representatives(curve.field(), &j);
    let idx = reps
        .iter()
        .position(|r| r.class_key() == key)
        .expect("every curve is isomorphic to a scanned twist");
    let rep = reps[idx].clone().with_trace(trace);
    CurveClass { j, trace, twist_index: idx, representative: rep }
}

pub fn classify(curve: &Curve) -> Result<CurveClass, CurveError> {
    let t = curve.trace()?;
    Ok(classify_with_trace(curve, t))
}

/// All classes with invariant `j`.
pub fn classes_with_j(field: &Arc<Field>, j: &FieldElement) -> Result<Vec<CurveClass>, CurveError> {
    twist_representatives(field, j)
        .into_iter()
        .enumerate()
        .map(|(i, rep)| {
            let t = rep.trace()?;
            Ok(CurveClass { j: j.clone(), trace: t, twist_index: i, representative: rep })
        })
        .collect()
}

/// The first twist in scan order with invariant `j` and trace `t`.
pub fn curve_from_j(field: &Arc<Field>, j: &FieldElement, trace: i64) -> Result<Curve, CurveError> {
    for rep in twist_representatives(field, j) {
        if rep.trace()? == trace {
            return Ok(rep);
        }
    }
    Err(CurveError::NoSuchTwist { j: j.to_string(), trace })
}

/// `t^2 - 4q = f0^2 D0` with `D0` fundamental.
pub fn discriminant_frobenius_order(q: u64, t: i64) -> Result<(i64, u64), CurveError> {
    let n = t as i128 * t as i128 - 4 * q as i128;
    if n >= 0 {
        return Err(CurveError::NotImaginaryQuadratic(n as i64));
    }
    let (d, f) = squarefree_decomposition(n);
    if d.rem_euclid(4) == 1 {
        Ok((d as i64, f as u64))
    } else {
        debug_assert!(f % 2 == 0);
        Ok((4 * d as i64, (f / 2) as u64))
    }
}

/// `n = d f^2` with `d` squarefree (sign kept on `d`).
fn squarefree_decomposition(n: i128) -> (i128, i128) {
    let mut m = n.abs();
    let mut f = 1i128;
    let mut d = 1i128;
    let mut p = 2i128;
    while p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            d *= p;
        }
        p += 1;
    }
    d *= m;
    (n.signum() * d, f)
}

/// Largest `e` with `l^e | n`.
pub fn valuation(mut n: u64, l: u64) -> u32 {
    if n == 0 {
        return u32::MAX;
    }
    let mut e = 0;
    while n % l == 0 {
        n /= l;
        e += 1;
    }
    e
}

/// Prime factorisation, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `|E(GF(q^s))|` from the trace over `GF(q)`.
pub fn extension_order(q: u64, t: i64, s: u32) -> BigUint {
    let q = BigInt::from(q);
    let t = BigInt::from(t);
    let (mut prev, mut cur) = (BigInt::from(2), t.clone());
    for _ in 1..s {
        let next = &t * &cur - &q * &prev;
        prev = cur;
        cur = next;
    }
    let n: BigInt = q.pow(s) + 1u32 - cur;
    debug_assert!(n.is_positive() && !n.is_zero());
    n.to_biguint().expect("positive order")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::field_create;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_law_examples() {
        let f = field_create(5, 1).unwrap();
        let e = Curve::from_i64(&f, 1, 0).unwrap();
        let p = Point::Affine(f.from_i64(0), f.zero());
        let q = Point::Affine(f.from_i64(2), f.zero());
        assert_eq!(e.add(&p, &q), Point::Affine(f.from_i64(3), f.zero()));
        assert_eq!(e.add(&p, &p), Point::Infinity);
        assert_eq!(e.add(&p, &Point::Infinity), p);
        assert_eq!(e.count_points().unwrap(), (4, 2));
    }

    #[test]
    fn counts_match_group_enumeration_and_twist_sum() {
        let f = field_create(41, 1).unwrap();
        let d = f.nonresidue();
        for (a, b) in [(1, 3), (5, 7), (0, 2), (3, 0)] {
            let e = Curve::from_i64(&f, a, b).unwrap();
            let n = e.order().unwrap();
            assert_eq!(n as usize, e.points().len());
            let tw = e.quadratic_twist(&d);
            assert_eq!(n + tw.order().unwrap(), 2 * 41 + 2);
            let t = e.trace().unwrap();
            assert!(t * t <= 4 * 41);
        }
    }

    #[test]
    fn associativity_on_random_points() {
        let f = field_create(101, 2).unwrap();
        let e = Curve::from_i64(&f, 2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let (p, q, r) = (e.random_point(&mut rng), e.random_point(&mut rng), e.random_point(&mut rng));
            assert_eq!(e.add(&e.add(&p, &q), &r), e.add(&p, &e.add(&q, &r)));
        }
    }

    #[test]
    fn j_invariants() {
        let f = field_create(41, 1).unwrap();
        assert_eq!(Curve::from_i64(&f, 1, 0).unwrap().j_invariant(), f.from_i64(1728));
        assert_eq!(Curve::from_i64(&f, 0, 1).unwrap().j_invariant(), f.zero());
        assert_eq!(Curve::from_i64(&f, -15, 22).unwrap().j_invariant(), f.from_i64(54000));
    }

    #[test]
    fn curve_from_j_examples() {
        let f = field_create(41, 1).unwrap();
        let j = f.from_i64(29);
        assert_eq!(curve_from_j(&f, &j, 6).unwrap().order().unwrap(), 36);
        assert_eq!(curve_from_j(&f, &j, -6).unwrap().order().unwrap(), 48);
        assert!(matches!(curve_from_j(&f, &j, 5), Err(CurveError::NoSuchTwist { .. })));
    }

    #[test]
    fn curve_from_j_roundtrip_sweep() {
        let f = field_create(41, 1).unwrap();
        for j in f.elements() {
            for c in classes_with_j(&f, &j).unwrap() {
                let e = curve_from_j(&f, &j, c.trace).unwrap();
                assert_eq!(e.j_invariant(), j);
                assert_eq!(e.trace().unwrap(), c.trace);
            }
        }
    }

    #[test]
    fn frobenius_discriminants() {
        assert_eq!(discriminant_frobenius_order(41, 6).unwrap(), (-8, 4));
        assert_eq!(discriminant_frobenius_order(53, 0).unwrap(), (-212, 1));
        assert_eq!(discriminant_frobenius_order(53, -4).unwrap(), (-4, 7));
        assert!(discriminant_frobenius_order(41, 100).is_err());
    }

    #[test]
    fn twist_counts_at_special_j() {
        let f = field_create(53, 1).unwrap();
        assert_eq!(twist_representatives(&f, &f.zero()).len(), 2);
        assert_eq!(twist_representatives(&f, &f.from_i64(1728)).len(), 4);
        let g = field_create(61, 1).unwrap();
        assert_eq!(twist_representatives(&g, &g.zero()).len(), 6);
    }

    #[test]
    fn isomorphisms_between_twist_models() {
        let f = field_create(41, 1).unwrap();
        let e = Curve::from_i64(&f, 3, 7).unwrap();
        let u = f.from_i64(5);
        let u2 = &u * &u;
        let e2 = Curve::new(&e.a * &(&u2 * &u2), &e.b * &(&(&u2 * &u2) * &u2)).unwrap();
        let isos = isomorphisms(&e, &e2);
        assert_eq!(isos.len(), 2);
        assert!(isos.contains(&u));
        let p = e.random_point(&mut ChaCha8Rng::seed_from_u64(3));
        assert!(e2.contains(&apply_iso(&u, &p)));
    }

    #[test]
    fn extension_order_matches_count() {
        let f = field_create(7, 1).unwrap();
        let e = Curve::from_i64(&f, 2, 3).unwrap();
        let t = e.trace().unwrap();
        let k = field_create(7, 3).unwrap();
        let ek = Curve::new(k.from_i64(2), k.from_i64(3)).unwrap();
        assert_eq!(extension_order(7, t, 3), BigUint::from(ek.order().unwrap()));
    }
}
