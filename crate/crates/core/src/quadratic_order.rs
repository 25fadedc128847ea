//! Orders `Z[f gamma]` in imaginary quadratic fields and their ideals.
//!
//! An ideal is stored as `(t, a, b)`, meaning the lattice
//! `Z (t a) + Z t (b + f gamma)` with `0 <= b < a`. This is the Hermite
//! normal form of the lattice on the basis `(1, f gamma)`, so equality of
//! triples is equality of ideals.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::finite_field::kronecker;

/// Largest `|disc|` accepted by [`class_group`].
pub const DISC_MAX: u64 = 1_000_000;
/// Largest norm accepted by [`enumerate_ideals`].
pub const NORM_MAX: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuadError {
    #[error("{0} is not a negative fundamental discriminant")]
    NotFundamental(i64),
    #[error("the lattice is not an ideal of the order")]
    NotAnIdeal,
    #[error("ideals belong to different orders")]
    OrderMismatch,
    #[error("the order is not maximal at {0}")]
    NotMaximalAtPrime(u64),
    #[error("ideal is not invertible")]
    NotInvertible,
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
}

fn is_squarefree(mut n: u64) -> bool {
    let mut p = 2;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        if n % p == 0 {
            n /= p;
        }
        p += 1;
    }
    true
}

pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.unsigned_abs();
    match d.rem_euclid(4) {
        1 => is_squarefree(m),
        0 => {
            let k = d / 4;
            matches!(k.rem_euclid(4), 2 | 3) && is_squarefree(k.unsigned_abs())
        }
        _ => false,
    }
}

/// The order of conductor `f` in `Q(sqrt(d0))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadOrder {
    pub d0: i64,
    pub f: u64,
}

impl QuadOrder {
    pub fn new(d0: i64, f: u64) -> Result<QuadOrder, QuadError> {
        if !is_fundamental(d0) || f == 0 {
            return Err(QuadError::NotFundamental(d0));
        }
        Ok(QuadOrder { d0, f })
    }

    /// The order with discriminant `disc = f^2 d0`.
    pub fn from_discriminant(disc: i64) -> Result<QuadOrder, QuadError> {
        if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
            return Err(QuadError::NotFundamental(disc));
        }
        let mut f = 1u64;
        let mut g = 2u64;
        let mut rest = disc;
        while (g * g) as i64 <= rest.abs() {
            let g2 = (g * g) as i64;
            if rest % g2 == 0 && is_fundamental_or_more(rest / g2) {
                rest /= g2;
                f *= g;
            } else {
                g += 1;
            }
        }
        QuadOrder::new(rest, f)
    }

    pub fn disc(&self) -> i64 {
        (self.f * self.f) as i64 * self.d0
    }

    /// `Tr(f gamma)`.
    pub fn trace_omega(&self) -> i64 {
        if self.d0.rem_euclid(4) == 1 {
            self.f as i64
        } else {
            0
        }
    }

    /// `N(f gamma)`.
    pub fn norm_omega(&self) -> i64 {
        let f2 = (self.f * self.f) as i64;
        if self.d0.rem_euclid(4) == 1 {
            f2 * (1 - self.d0) / 4
        } else {
            -f2 * self.d0 / 4
        }
    }

    /// `N(x + y f gamma)`.
    pub fn norm_of(&self, x: i64, y: i64) -> i64 {
        x * x + x * y * self.trace_omega() + y * y * self.norm_omega()
    }

    /// `(x1 + y1 w)(x2 + y2 w)` with `w = f gamma`.
    pub fn mul_elements(&self, (x1, y1): (i64, i64), (x2, y2): (i64, i64)) -> (i64, i64) {
        let t = self.trace_omega();
        let n = self.norm_omega();
        (x1 * x2 - y1 * y2 * n, x1 * y2 + x2 * y1 + y1 * y2 * t)
    }

    pub fn unit_ideal(&self) -> QuadIdeal {
        QuadIdeal { order: *self, t: 1, a: 1, b: 0 }
    }

    /// `gamma` as text: `sqrt(m)` or `(1+sqrt(d0))/2`.
    fn gamma_text(&self) -> String {
        if self.d0.rem_euclid(4) == 1 {
            format!("(1+√{})/2", self.d0)
        } else {
            format!("√{}", self.d0 / 4)
        }
    }
}

fn is_fundamental_or_more(d: i64) -> bool {
    d < 0 && matches!(d.rem_euclid(4), 0 | 1)
}

/// `Z (t a) + Z t (b + f gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadIdeal {
    order: QuadOrder,
    pub t: u64,
    pub a: u64,
    pub b: u64,
}

impl PartialOrd for QuadOrder {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for QuadOrder {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        (self.d0, self.f).cmp(&(o.d0, o.f))
    }
}

pub fn ideal_create(order: &QuadOrder, t: u64, a: u64, b: i64) -> Result<QuadIdeal, QuadError> {
    if t == 0 || a == 0 {
        return Err(QuadError::NotAnIdeal);
    }
    let b = b.rem_euclid(a as i64);
    if order.norm_of(b, 1).rem_euclid(a as i64) != 0 {
        return Err(QuadError::NotAnIdeal);
    }
    Ok(QuadIdeal { order: *order, t, a, b: b as u64 })
}

/// Hermite basis `(A, 0), (B, C)` with `0 <= B < A` of the span of `vecs`.
fn hnf2(vecs: &[(i64, i64)]) -> Option<(i64, i64, i64)> {
    // second coordinate: gcd combination
    let mut rows: Vec<(i64, i64)> = vecs.iter().copied().filter(|v| *v != (0, 0)).collect();
    let mut pivot: Option<(i64, i64)> = None;
    let mut rest: Vec<(i64, i64)> = Vec::new();
    for v in rows.drain(..) {
        match pivot {
            None if v.1 != 0 => pivot = Some(v),
            None => rest.push(v),
            Some(p) => {
                if v.1 == 0 {
                    rest.push(v);
                    continue;
                }
                let g = p.1.extended_gcd(&v.1);
                let np = (g.x * p.0 + g.y * v.0, g.gcd);
                let (kp, kv) = (v.1 / g.gcd, p.1 / g.gcd);
                rest.push((kp * p.0 - kv * v.0, 0));
                pivot = Some(np);
            }
        }
    }
    let (mut b, mut c) = pivot?;
    let a = rest.iter().fold(0i64, |acc, v| acc.gcd(&v.0));
    if a == 0 {
        return None;
    }
    if c < 0 {
        c = -c;
        b = -b;
    }
    Some((a, b.rem_euclid(a), c))
}

impl QuadIdeal {
    pub fn order(&self) -> &QuadOrder {
        &self.order
    }

    /// `t^2 a`.
    pub fn norm(&self) -> u64 {
        self.t * self.t * self.a
    }

    /// Hermite basis `(A, B, C)`: `Z A + Z (B + C f gamma)`.
    pub fn hermite(&self) -> (u64, u64, u64) {
        (self.t * self.a, self.t * self.b, self.t)
    }

    pub fn from_hermite(order: &QuadOrder, a: u64, b: u64, c: u64) -> Result<QuadIdeal, QuadError> {
        if c == 0 || a % c != 0 || b % c != 0 {
            return Err(QuadError::NotAnIdeal);
        }
        ideal_create(order, c, a / c, (b / c) as i64)
    }

    /// Generators as coordinates on `(1, f gamma)`.
    pub fn generators(&self) -> [(i64, i64); 2] {
        let (a, b, c) = self.hermite();
        [(a as i64, 0), (b as i64, c as i64)]
    }

    pub fn contains(&self, (x, y): (i64, i64)) -> bool {
        let (a, b, c) = self.hermite();
        if y.rem_euclid(c as i64) != 0 {
            return false;
        }
        let k = y / c as i64;
        (x - k * b as i64).rem_euclid(a as i64) == 0
    }

    /// Whether the associated form `(a, 2b + T, N(b + w)/a)` is primitive.
    pub fn is_invertible(&self) -> bool {
        let o = &self.order;
        let a = self.a as i64;
        let bb = 2 * self.b as i64 + o.trace_omega();
        let c = o.norm_of(self.b as i64, 1) / a;
        a.gcd(&bb).gcd(&c) == 1
    }

    pub fn is_primitive(&self) -> bool {
        self.t == 1
    }

    pub fn conjugate(&self) -> QuadIdeal {
        let t = self.order.trace_omega();
        let b = (-(self.b as i64) - t).rem_euclid(self.a as i64) as u64;
        QuadIdeal { b, ..*self }
    }

    /// The form `(a, B, c)` with primitive part `Z a + Z (-B + sqrt(disc))/2`.
    pub fn form(&self) -> Form {
        let o = &self.order;
        let a = self.a as i64;
        Form { a, b: -(2 * self.b as i64 + o.trace_omega()), c: o.norm_of(self.b as i64, 1) / a }
    }

    /// The class of an invertible ideal as a reduced form.
    pub fn class(&self) -> Result<Form, QuadError> {
        if !self.is_invertible() {
            return Err(QuadError::NotInvertible);
        }
        Ok(self.form().reduce())
    }

    /// Basis text `A Z + (B + C f gamma) Z`.
    pub fn basis_string(&self) -> String {
        let (a, b, c) = self.hermite();
        let cf = c * self.order.f;
        let g = self.order.gamma_text();
        if b == 0 {
            format!("{a}Z + {cf}{g}Z")
        } else {
            format!("{a}Z + ({b} + {cf}{g})Z")
        }
    }
}

impl fmt::Display for QuadIdeal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.basis_string())
    }
}

pub fn ideal_norm(i: &QuadIdeal) -> u64 {
    i.norm()
}

pub fn is_invertible(i: &QuadIdeal) -> bool {
    i.is_invertible()
}

pub fn ideal_multiply(i: &QuadIdeal, j: &QuadIdeal) -> Result<QuadIdeal, QuadError> {
    if i.order != j.order {
        return Err(QuadError::OrderMismatch);
    }
    let o = &i.order;
    let mut prods = Vec::with_capacity(4);
    for g in i.generators() {
        for h in j.generators() {
            prods.push(o.mul_elements(g, h));
        }
    }
    let (a, b, c) = hnf2(&prods).expect("product of nonzero ideals has rank 2");
    QuadIdeal::from_hermite(o, a as u64, b as u64, c as u64)
}

/// Invertible primes of norm `l`, for `l` not dividing the conductor.
pub fn primes_above(order: &QuadOrder, l: u64) -> Result<Vec<QuadIdeal>, QuadError> {
    if order.f % l == 0 {
        return Err(QuadError::NotMaximalAtPrime(l));
    }
    let mut out: Vec<QuadIdeal> = (0..l as i64)
        .filter_map(|b| ideal_create(order, 1, l, b).ok())
        .collect();
    out.sort();
    Ok(out)
}

/// A primitive positive definite binary quadratic form `a x^2 + b xy + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    pub fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        b.abs() <= a && a <= c && !(b < 0 && (b.abs() == a || a == c))
    }

    pub fn reduce(mut self) -> Form {
        loop {
            // normalise b into (-a, a]
            let two_a = 2 * self.a;
            let k = Integer::div_floor(&(self.a - self.b), &two_a);
            if k != 0 {
                let b2 = self.b + k * two_a;
                self.c = (b2 * b2 - self.disc()) / (4 * self.a);
                self.b = b2;
            }
            if self.a > self.c {
                self = Form { a: self.c, b: -self.b, c: self.a };
                continue;
            }
            if self.a == self.c && self.b < 0 {
                self.b = -self.b;
            }
            return self;
        }
    }

    /// The ideal `Z a + Z (-b + sqrt(disc))/2` in `order`.
    pub fn to_ideal(&self, order: &QuadOrder) -> Result<QuadIdeal, QuadError> {
        // (-b + sqrt(disc))/2 = (-b - T)/2 + w
        let bb = Integer::div_floor(&(-self.b - order.trace_omega()), &2);
        ideal_create(order, 1, self.a as u64, bb)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdealClassGroup {
    pub order: QuadOrder,
    pub forms: Vec<Form>,
    #[serde(skip)]
    pub representatives: Vec<QuadIdeal>,
    pub h: usize,
}

impl IdealClassGroup {
    pub fn index_of(&self, i: &QuadIdeal) -> Result<usize, QuadError> {
        let f = i.class()?;
        Ok(self.forms.iter().position(|g| *g == f).expect("class is among the reduced forms"))
    }
}

/// Reduced primitive forms of discriminant `f^2 d0`.
pub fn class_group(order: &QuadOrder) -> Result<IdealClassGroup, QuadError> {
    let d = order.disc();
    if d.unsigned_abs() > DISC_MAX {
        return Err(QuadError::BoundExceeded(format!("|disc| = {} exceeds {DISC_MAX}", d.abs())));
    }
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            if (b * b - d) % (4 * a) != 0 {
                continue;
            }
            let c = (b * b - d) / (4 * a);
            let f = Form { a, b, c };
            if c >= a && f.is_reduced() && a.gcd(&b).gcd(&c) == 1 {
                forms.push(f);
            }
        }
        a += 1;
    }
    let representatives = forms.iter().map(|f| f.to_ideal(order)).collect::<Result<Vec<_>, _>>()?;
    Ok(IdealClassGroup { order: *order, h: forms.len(), forms, representatives })
}

const PI2_NUM: &str = "98696044010893586188344909998761511353136994072407";
const PI2_SCALE: u32 = 49;

/// Whether `pi^2 m^2 <= 4 n`, decided exactly from a certified bracket of `pi^2`.
fn pi2_m2_le_4n(m: u64, n: u64) -> bool {
    let lo: BigUint = PI2_NUM.parse().expect("constant");
    let hi = &lo + 1u32;
    let lhs = BigUint::from(4u32) * BigUint::from(n) * BigUint::from(10u32).pow(PI2_SCALE);
    let m2 = BigUint::from(m) * BigUint::from(m);
    if &hi * &m2 <= lhs {
        true
    } else if &lo * &m2 > lhs {
        false
    } else {
        unreachable!("pi^2 bracket too coarse for n = {n}")
    }
}

/// `floor((2/pi) sqrt(n))`, exact.
pub fn two_over_pi_sqrt_floor(n: u64) -> u64 {
    let mut m = ((2.0 / std::f64::consts::PI) * (n as f64).sqrt()) as u64;
    while m > 0 && !pi2_m2_le_4n(m, n) {
        m -= 1;
    }
    while pi2_m2_le_4n(m + 1, n) {
        m += 1;
    }
    m
}

pub fn minkowski_bound(order: &QuadOrder) -> u64 {
    two_over_pi_sqrt_floor(order.disc().unsigned_abs())
}

fn val(mut n: u64, l: u64) -> u32 {
    let mut e = 0;
    while n > 0 && n % l == 0 {
        n /= l;
        e += 1;
    }
    e
}

/// `iG(f, l^n)`: the number of invertible ideals of norm `l^n`.
///
/// When `l` does not divide `f` the count is the one for the maximal order at
/// `l`: `n + 1`, `1`, or `1`/`0` for `n` even/odd, for split, ramified and
/// inert `l`.
pub fn ideal_count_invertible(f: u64, l: u64, n: u32, d0: i64) -> u64 {
    if n == 0 {
        return 1;
    }
    let v = val(f, l);
    let chi = kronecker(d0, l);
    if v == 0 {
        return match chi {
            1 => n as u64 + 1,
            0 => 1,
            _ => u64::from(n % 2 == 0),
        };
    }
    let odd = n % 2 == 1;
    if odd && (n < 2 * v || chi == -1) {
        return 0;
    }
    if !odd && n < 2 * v {
        return l.pow(n / 2);
    }
    match chi {
        -1 => l.pow(v - 1) * (l + 1),
        0 => l.pow(v),
        _ => (n - 2 * v + 1) as u64 * l.pow(v - 1) * (l - 1),
    }
}

/// `niG(f, l^n) = sum_{1 <= k <= min(n, v)} iG(f / l^k, l^(n-k))`.
pub fn ideal_count_noninvertible(f: u64, l: u64, n: u32, d0: i64) -> u64 {
    let v = val(f, l);
    (1..=n.min(v)).map(|k| ideal_count_invertible(f / l.pow(k), l, n - k, d0)).sum()
}

/// Every ideal of the given norm, ascending by `(t, a, b)`.
pub fn enumerate_ideals(order: &QuadOrder, norm: u64) -> Result<Vec<QuadIdeal>, QuadError> {
    if norm == 0 || norm > NORM_MAX {
        return Err(QuadError::BoundExceeded(format!("norm {norm} outside 1..={NORM_MAX}")));
    }
    let mut out = Vec::new();
    let mut t = 1u64;
    while t * t <= norm {
        if norm % (t * t) == 0 {
            let a = norm / (t * t);
            for b in 0..a {
                if let Ok(i) = ideal_create(order, t, a, b as i64) {
                    out.push(i);
                }
            }
        }
        t += 1;
    }
    out.sort();
    Ok(out)
}

/// One row of an ideal table.
#[derive(Debug, Clone, Serialize)]
pub struct IdealTableRow {
    pub norm: u64,
    pub invertible: Vec<String>,
    pub noninvertible: Vec<String>,
    #[serde(rename = "iG")]
    pub ig: u64,
    #[serde(rename = "niG")]
    pub nig: u64,
}

/// Rows for norms `l^1 .. l^n_max`, with formula counts alongside.
pub fn ideal_table(order: &QuadOrder, l: u64, n_max: u32) -> Result<Vec<IdealTableRow>, QuadError> {
    (1..=n_max)
        .map(|n| {
            let norm = l.pow(n);
            let ideals = enumerate_ideals(order, norm)?;
            let (inv, non): (Vec<&QuadIdeal>, Vec<&QuadIdeal>) = ideals.iter().partition(|i| i.is_invertible());
            Ok(IdealTableRow {
                norm,
                invertible: inv.iter().map(|i| i.basis_string()).collect(),
                noninvertible: non.iter().map(|i| i.basis_string()).collect(),
                ig: ideal_count_invertible(order.f, l, n, order.d0),
                nig: ideal_count_noninvertible(order.f, l, n, order.d0),
            })
        })
        .collect()
}

/// A disagreement between the closed-form counts and the enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountConflict {
    pub d0: i64,
    pub f: u64,
    pub l: u64,
    pub n: u32,
    pub formula: (u64, u64),
    pub enumerated: (u64, u64),
}

/// Compares `(iG, niG)` with enumeration over the given ranges.
pub fn compare_counts(d0s: &[i64], f_max: u64, ls: &[u64], n_max: u32) -> Result<(usize, Vec<CountConflict>), QuadError> {
    let mut checked = 0;
    let mut conflicts = Vec::new();
    for &d0 in d0s {
        for f in 1..=f_max {
            let order = QuadOrder::new(d0, f)?;
            for &l in ls {
                for n in 0..=n_max {
                    let ideals = enumerate_ideals(&order, l.pow(n))?;
                    let inv = ideals.iter().filter(|i| i.is_invertible()).count() as u64;
                    let enumerated = (inv, ideals.len() as u64 - inv);
                    let formula =
                        (ideal_count_invertible(f, l, n, d0), ideal_count_noninvertible(f, l, n, d0));
                    checked += 1;
                    if formula != enumerated {
                        conflicts.push(CountConflict { d0, f, l, n, formula, enumerated });
                    }
                }
            }
        }
    }
    Ok((checked, conflicts))
}

/// Least norm of an invertible ideal in each class, keyed by reduced form.
pub fn least_norms_per_class(order: &QuadOrder, bound: u64) -> Result<BTreeMap<Form, u64>, QuadError> {
    let cg = class_group(order)?;
    let mut best: HashMap<Form, u64> = HashMap::new();
    for n in 1..=bound {
        for i in enumerate_ideals(order, n)? {
            if i.is_invertible() {
                best.entry(i.class()?).or_insert(n);
            }
        }
        if best.len() == cg.h {
            break;
        }
    }
    Ok(best.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z4sqrtm2() -> QuadOrder {
        QuadOrder::new(-8, 4).unwrap()
    }

    /// `(w / l) L` contained in `L`, by rational linear algebra.
    fn multiplier_contains(i: &QuadIdeal, l: u64) -> bool {
        let o = i.order();
        i.generators().iter().all(|&g| {
            let (x, y) = o.mul_elements(g, (0, 1));
            if x % l as i64 != 0 || y % l as i64 != 0 {
                return false;
            }
            i.contains((x / l as i64, y / l as i64))
        })
    }

    fn invertible_oracle(i: &QuadIdeal) -> bool {
        let f = i.order().f;
        crate::elliptic_curve::factorize(f).iter().all(|&(l, _): &(u64, u32)| !multiplier_contains(i, l))
    }

    #[test]
    fn create_and_norm() {
        let o = z4sqrtm2();
        let i = ideal_create(&o, 1, 2, 0).unwrap();
        assert_eq!(i.norm(), 2);
        assert!(!i.is_invertible());
        assert!(matches!(ideal_create(&o, 1, 2, 1), Err(QuadError::NotAnIdeal)));
        let j = ideal_create(&o, 1, 4, 2).unwrap();
        assert!(j.is_invertible());
        assert_eq!(o.unit_ideal().norm(), 1);
    }

    #[test]
    fn class_numbers() {
        assert_eq!(class_group(&QuadOrder::new(-4, 1).unwrap()).unwrap().h, 1);
        assert_eq!(class_group(&QuadOrder::from_discriminant(-212).unwrap()).unwrap().h, 6);
        assert_eq!(class_group(&QuadOrder::new(-8, 4).unwrap()).unwrap().h, 4);
        assert_eq!(class_group(&QuadOrder::new(-3, 7).unwrap()).unwrap().h, 2);
    }

    #[test]
    fn discriminant_decomposition() {
        assert_eq!(QuadOrder::from_discriminant(-128).unwrap(), QuadOrder { d0: -8, f: 4 });
        assert_eq!(QuadOrder::from_discriminant(-212).unwrap(), QuadOrder { d0: -212, f: 1 });
        assert_eq!(QuadOrder::from_discriminant(-196).unwrap(), QuadOrder { d0: -4, f: 7 });
        assert_eq!(QuadOrder::from_discriminant(-27).unwrap(), QuadOrder { d0: -3, f: 3 });
    }

    #[test]
    fn bounds() {
        assert_eq!(minkowski_bound(&QuadOrder::from_discriminant(-212).unwrap()), 9);
        assert_eq!(minkowski_bound(&QuadOrder::new(-4, 1).unwrap()), 1);
        assert_eq!(minkowski_bound(&QuadOrder::new(-8, 4).unwrap()), 7);
        for n in 1..5000u64 {
            let m = two_over_pi_sqrt_floor(n) as f64;
            let x = 2.0 / std::f64::consts::PI * (n as f64).sqrt();
            assert!(m <= x + 1e-9 && x < m + 1.0);
        }
    }

    #[test]
    fn primes_above_212() {
        let o = QuadOrder::from_discriminant(-212).unwrap();
        assert_eq!(primes_above(&o, 3).unwrap().len(), 2);
        assert_eq!(primes_above(&o, 2).unwrap().len(), 1);
        assert_eq!(primes_above(&o, 5).unwrap().len(), 0);
        let ps = primes_above(&o, 3).unwrap();
        let prod = ideal_multiply(&ps[0], &ps[1]).unwrap();
        assert_eq!(prod, ideal_create(&o, 3, 1, 0).unwrap());
        assert_eq!(ps[0].conjugate(), ps[1]);
        let pp = ideal_multiply(&ps[0], &ps[0].conjugate()).unwrap();
        assert_eq!(pp.norm(), 9);
        assert_eq!(pp.t, 3);
    }

    #[test]
    fn example_counts() {
        assert_eq!(ideal_count_invertible(4, 2, 2, -8), 2);
        assert_eq!(ideal_count_invertible(4, 2, 4, -8), 4);
        assert_eq!(ideal_count_invertible(4, 2, 3, -8), 0);
        assert_eq!(ideal_count_noninvertible(4, 2, 3, -8), 3);
        assert_eq!(ideal_count_noninvertible(4, 2, 1, -8), 1);
        assert_eq!(ideal_count_noninvertible(4, 2, 5, -8), 3);
        assert_eq!(enumerate_ideals(&QuadOrder::new(-5 * 4, 3).unwrap(), 1).unwrap().len(), 1);
    }

    #[test]
    fn least_norms_212() {
        let o = QuadOrder::from_discriminant(-212).unwrap();
        let mut norms: Vec<u64> = least_norms_per_class(&o, 9).unwrap().values().copied().collect();
        norms.sort();
        assert_eq!(norms, vec![1, 2, 3, 3, 6, 6]);
    }

    #[test]
    fn every_class_meets_the_bound() {
        for d in [-212i64, -128, -4 * 47, -3 * 49, -11 * 25, -420, -1555] {
            let Ok(o) = QuadOrder::from_discriminant(d) else { continue };
            let cg = class_group(&o).unwrap();
            let m = minkowski_bound(&o);
            assert_eq!(least_norms_per_class(&o, m).unwrap().len(), cg.h, "disc {d}");
        }
    }

    #[test]
    fn forms_roundtrip_through_ideals() {
        let o = QuadOrder::new(-8, 4).unwrap();
        let cg = class_group(&o).unwrap();
        for (f, i) in cg.forms.iter().zip(&cg.representatives) {
            assert_eq!(i.class().unwrap(), *f);
        }
    }

    proptest! {
        #[test]
        fn invertibility_matches_multiplier_ring(d in prop::sample::select(vec![-3i64, -4, -7, -8, -11, -15, -20]),
                                                 f in 1u64..30, n in 1u64..200) {
            let o = QuadOrder::new(d, f).unwrap();
            for i in enumerate_ideals(&o, n).unwrap() {
                prop_assert_eq!(i.is_invertible(), invertible_oracle(&i));
            }
        }

        #[test]
        fn norm_is_multiplicative_for_invertible(d in prop::sample::select(vec![-3i64, -4, -7, -8, -11, -20]),
                                                 f in 1u64..12, n in 1u64..40, m in 1u64..40) {
            let o = QuadOrder::new(d, f).unwrap();
            let is = enumerate_ideals(&o, n).unwrap();
            let js = enumerate_ideals(&o, m).unwrap();
            for i in is.iter().filter(|i| i.is_invertible()) {
                for j in &js {
                    prop_assert_eq!(ideal_multiply(i, j).unwrap().norm(), n * m);
                }
            }
        }

        #[test]
        fn multiplication_is_commutative_and_unital(d in prop::sample::select(vec![-4i64, -7, -8, -23]),
                                                    f in 1u64..8, n in 1u64..30, m in 1u64..30) {
            let o = QuadOrder::new(d, f).unwrap();
            for i in enumerate_ideals(&o, n).unwrap() {
                prop_assert_eq!(ideal_multiply(&i, &o.unit_ideal()).unwrap(), i);
                for j in enumerate_ideals(&o, m).unwrap() {
                    prop_assert_eq!(ideal_multiply(&i, &j).unwrap(), ideal_multiply(&j, &i).unwrap());
                }
            }
        }

        #[test]
        fn primes_above_count(d in prop::sample::select(vec![-3i64, -4, -7, -8, -11, -19, -24]),
                              l in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            let o = QuadOrder::new(d, 1).unwrap();
            let k = kronecker(d, l);
            prop_assert_eq!(primes_above(&o, l).unwrap().len() as i32, 1 + k);
        }
    }
}
