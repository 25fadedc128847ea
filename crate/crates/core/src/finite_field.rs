//! Exact arithmetic in `GF(p)` and `GF(p^r)`.
//!
//! A [`Field`] is a prime `p` together with a monic irreducible modulus of
//! degree `r`; a [`FieldElement`] is a coefficient vector of length `r`,
//! constant term first. Fields are interned, so `field_create(p, r)` always
//! hands back the same shared instance.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

/// Largest supported characteristic.
pub const P_MAX: u64 = 1 << 16;
/// Largest supported extension degree.
pub const R_MAX: usize = 96;

/// Fields up to this size get a lookup table for the quadratic character.
const CHI_TABLE_MAX: u64 = 1 << 20;
/// Fields below this size take square roots by exhaustive search.
const SQRT_EXHAUSTIVE_MAX: u64 = 1 << 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    FieldMismatch,
}

/// The four field operations exposed by [`arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// `GF(p^r)` with a fixed modulus.
pub struct Field {
    p: u64,
    r: usize,
    modulus: Vec<u64>,
    neg_modulus: Vec<u64>,
    q: BigUint,
    frob: OnceLock<Vec<Vec<u64>>>,
    chi: OnceLock<Vec<i8>>,
    nonresidue: OnceLock<FieldElement>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}
impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{})", self.p, self.r)
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r == 1 {
            write!(f, "GF({})", self.p)
        } else {
            write!(f, "GF({}^{})", self.p, self.r)
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

static FIELDS: OnceLock<Mutex<HashMap<(u64, usize), Arc<Field>>>> = OnceLock::new();

/// Returns `GF(p^r)` with the least irreducible modulus, in the order of the
/// integer `sum c_i p^i` (so the `x^{r-1}` coefficient is most significant).
pub fn field_create(p: u64, r: usize) -> Result<Arc<Field>, FieldError> {
    if p > P_MAX {
        return Err(FieldError::BoundExceeded(format!("p = {p} exceeds {P_MAX}")));
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if r == 0 || r > R_MAX {
        return Err(FieldError::BoundExceeded(format!(
            "extension degree {r} outside 1..={R_MAX}"
        )));
    }
    let cache = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().expect("field cache poisoned").get(&(p, r)) {
        return Ok(f.clone());
    }
    let modulus = if r == 1 {
        vec![0, 1]
    } else {
        least_irreducible(p, r)
    };
    let field = Arc::new(Field::with_modulus(p, modulus));
    let mut guard = cache.lock().expect("field cache poisoned");
    Ok(guard.entry((p, r)).or_insert(field).clone())
}

fn least_irreducible(p: u64, r: usize) -> Vec<u64> {
    let mut digits = vec![0u64; r];
    loop {
        // advance the base-p counter, constant term least significant
        let mut i = 0;
        loop {
            digits[i] += 1;
            if digits[i] < p {
                break;
            }
            digits[i] = 0;
            i += 1;
            assert!(i < r, "no irreducible polynomial found");
        }
        if digits[0] == 0 {
            continue;
        }
        let mut m = digits.clone();
        m.push(1);
        if raw::is_irreducible(&m, p) {
            return m;
        }
    }
}

impl Field {
    fn with_modulus(p: u64, modulus: Vec<u64>) -> Field {
        let r = modulus.len() - 1;
        let neg_modulus = modulus[..r].iter().map(|&c| (p - c) % p).collect();
        Field {
            p,
            r,
            modulus,
            neg_modulus,
            q: BigUint::from(p).pow(r as u32),
            frob: OnceLock::new(),
            chi: OnceLock::new(),
            nonresidue: OnceLock::new(),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Field size `p^r`.
    pub fn q(&self) -> &BigUint {
        &self.q
    }

    /// Field size when it fits in a machine word.
    pub fn q_u64(&self) -> Option<u64> {
        self.q.to_u64()
    }

    /// Monic modulus, constant term first.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn zero(self: &Arc<Self>) -> FieldElement {
        FieldElement { field: self.clone(), c: vec![0; self.r] }
    }

    pub fn one(self: &Arc<Self>) -> FieldElement {
        self.from_i64(1)
    }

    pub fn from_i64(self: &Arc<Self>, v: i64) -> FieldElement {
        let mut c = vec![0; self.r];
        c[0] = v.rem_euclid(self.p as i64) as u64;
        FieldElement { field: self.clone(), c }
    }

    pub fn from_bigint(self: &Arc<Self>, v: &num_bigint::BigInt) -> FieldElement {
        let p = num_bigint::BigInt::from(self.p);
        let red = v.mod_floor(&p).to_u64().expect("residue fits");
        self.from_i64(red as i64)
    }

    /// Element with the given coefficients (constant first), reduced mod `p`.
    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[u64]) -> FieldElement {
        assert!(coeffs.len() <= self.r, "too many coefficients");
        let mut c = vec![0; self.r];
        for (d, s) in c.iter_mut().zip(coeffs) {
            *d = s % self.p;
        }
        FieldElement { field: self.clone(), c }
    }

    /// The class of `x` modulo the defining polynomial.
    pub fn generator(self: &Arc<Self>) -> FieldElement {
        if self.r == 1 {
            return self.from_i64(self.modulus[0] as i64 * -1);
        }
        let mut c = vec![0; self.r];
        c[1] = 1;
        FieldElement { field: self.clone(), c }
    }

    /// Element whose base-`p` digits (constant first) spell `idx`.
    pub fn element_from_index(self: &Arc<Self>, mut idx: u64) -> FieldElement {
        let mut c = vec![0; self.r];
        for d in c.iter_mut() {
            *d = idx % self.p;
            idx /= self.p;
        }
        FieldElement { field: self.clone(), c }
    }

    /// All elements in index order; only for fields that fit a machine word.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FieldElement> + '_ {
        let q = self.q_u64().expect("field too large to enumerate");
        (0..q).map(move |i| self.element_from_index(i))
    }

    pub fn random<R: Rng + ?Sized>(self: &Arc<Self>, rng: &mut R) -> FieldElement {
        let c = (0..self.r).map(|_| rng.gen_range(0..self.p)).collect();
        FieldElement { field: self.clone(), c }
    }

    /// The non-square of least index.
    pub fn nonresidue(self: &Arc<Self>) -> FieldElement {
        self.nonresidue
            .get_or_init(|| {
                assert!(self.p != 2, "every element of a binary field is a square");
                let mut i = 1u64;
                loop {
                    let e = self.element_from_index(i);
                    if !e.is_square() {
                        return e;
                    }
                    i += 1;
                }
            })
            .clone()
    }

    fn frob_matrix(&self) -> &Vec<Vec<u64>> {
        self.frob.get_or_init(|| {
            if self.r == 1 {
                return vec![vec![1]];
            }
            let mut x = vec![0u64; self.r];
            x[1] = 1;
            let xp = raw::powmod(&x, self.p, &self.modulus, self.p);
            let mut cols = Vec::with_capacity(self.r);
            let mut cur = vec![0u64; self.r];
            cur[0] = 1;
            for _ in 0..self.r {
                cols.push(cur.clone());
                cur = raw::mulmod(&cur, &xp, &self.modulus, &self.neg_modulus, self.p);
            }
            cols
        })
    }

    fn chi_table(&self) -> Option<&Vec<i8>> {
        let q = self.q_u64()?;
        if q > CHI_TABLE_MAX {
            return None;
        }
        Some(self.chi.get_or_init(|| {
            let mut t = vec![-1i8; q as usize];
            t[0] = 0;
            let mut c = vec![0u64; self.r];
            for _ in 1..q {
                for d in c.iter_mut() {
                    *d += 1;
                    if *d < self.p {
                        break;
                    }
                    *d = 0;
                }
                let s = if self.r == 1 {
                    vec![c[0] * c[0] % self.p]
                } else {
                    raw::mulmod(&c, &c, &self.modulus, &self.neg_modulus, self.p)
                };
                let idx = s.iter().rev().fold(0u64, |acc, &v| acc * self.p + v);
                t[idx as usize] = 1;
            }
            t
        }))
    }

    fn same(&self, other: &Field) -> bool {
        std::ptr::eq(self, other) || self == other
    }
}

/// An element of `GF(p^r)`.
#[derive(Clone)]
pub struct FieldElement {
    field: Arc<Field>,
    c: Vec<u64>,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.c == other.c && self.field.same(&other.field)
    }
}
impl Eq for FieldElement {}

impl Hash for FieldElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.field.p.hash(state);
        self.c.hash(state);
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FieldElement {
    /// Prime-field elements print as integers in `[0, p)`; others as a
    /// polynomial in the generator `a`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.r == 1 || self.c[1..].iter().all(|&c| c == 0) {
            return write!(f, "{}", self.c[0]);
        }
        let mut terms = Vec::new();
        for (i, &c) in self.c.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let t = match (i, c) {
                (0, c) => format!("{c}"),
                (1, 1) => "a".to_string(),
                (1, c) => format!("{c}*a"),
                (i, 1) => format!("a^{i}"),
                (i, c) => format!("{c}*a^{i}"),
            };
            terms.push(t);
        }
        write!(f, "{}", terms.join(" + "))
    }
}

impl FieldElement {
    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    /// Coefficients, constant term first.
    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|&c| c == 0)
    }

    pub fn is_one(&self) -> bool {
        self.c[0] == 1 && self.c[1..].iter().all(|&c| c == 0)
    }

    /// The value in `[0, p)` if this element lies in the prime field.
    pub fn prime_field_value(&self) -> Option<u64> {
        if self.c[1..].iter().all(|&c| c == 0) {
            Some(self.c[0])
        } else {
            None
        }
    }

    /// Base-`p` index; inverse of [`Field::element_from_index`].
    pub fn index_u64(&self) -> u64 {
        self.c.iter().rev().fold(0u64, |acc, &c| acc * self.field.p + c)
    }

    pub fn index(&self) -> BigUint {
        let p = BigUint::from(self.field.p);
        self.c.iter().rev().fold(BigUint::zero(), |acc, &c| acc * &p + c)
    }

    fn check(&self, other: &FieldElement) -> Result<(), FieldError> {
        if self.field.same(&other.field) {
            Ok(())
        } else {
            Err(FieldError::FieldMismatch)
        }
    }

    fn with(&self, c: Vec<u64>) -> FieldElement {
        FieldElement { field: self.field.clone(), c }
    }

    fn add_raw(&self, o: &FieldElement) -> FieldElement {
        let p = self.field.p;
        self.with(self.c.iter().zip(&o.c).map(|(a, b)| (a + b) % p).collect())
    }

    fn sub_raw(&self, o: &FieldElement) -> FieldElement {
        let p = self.field.p;
        self.with(self.c.iter().zip(&o.c).map(|(a, b)| (a + p - b) % p).collect())
    }

    fn mul_raw(&self, o: &FieldElement) -> FieldElement {
        let f = &self.field;
        if f.r == 1 {
            return self.with(vec![self.c[0] * o.c[0] % f.p]);
        }
        self.with(raw::mulmod(&self.c, &o.c, &f.modulus, &f.neg_modulus, f.p))
    }

    pub fn square(&self) -> FieldElement {
        self.mul_raw(self)
    }

    /// Multiplication by an integer.
    pub fn scale(&self, k: i64) -> FieldElement {
        let p = self.field.p;
        let k = k.rem_euclid(p as i64) as u64;
        self.with(self.c.iter().map(|&c| c * k % p).collect())
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        if self.is_zero() {
            return Err(FieldError::DivisionByZero);
        }
        let f = &self.field;
        if f.r == 1 {
            return Ok(self.with(vec![raw::inv_mod(self.c[0], f.p)]));
        }
        let mut out = raw::inverse(&self.c, &f.modulus, f.p);
        out.resize(f.r, 0);
        Ok(self.with(out))
    }

    pub fn div(&self, o: &FieldElement) -> Result<FieldElement, FieldError> {
        self.check(o)?;
        Ok(self.mul_raw(&o.inv()?))
    }

    pub fn pow(&self, e: &BigUint) -> FieldElement {
        let mut acc = self.field.one();
        for i in (0..e.bits()).rev() {
            acc = acc.square();
            if e.bit(i) {
                acc = acc.mul_raw(self);
            }
        }
        acc
    }

    pub fn pow_u64(&self, e: u64) -> FieldElement {
        self.pow(&BigUint::from(e))
    }

    /// `self^p`.
    pub fn frobenius(&self) -> FieldElement {
        let f = &self.field;
        if f.r == 1 {
            return self.clone();
        }
        let cols = f.frob_matrix();
        let mut acc = vec![0u64; f.r];
        for (a, col) in self.c.iter().zip(cols) {
            if *a == 0 {
                continue;
            }
            for (dst, &v) in acc.iter_mut().zip(col) {
                *dst = (*dst + a * v) % f.p;
            }
        }
        self.with(acc)
    }

    /// `self^(p^k)`.
    pub fn frobenius_pow(&self, k: usize) -> FieldElement {
        let mut out = self.clone();
        for _ in 0..(k % self.field.r) {
            out = out.frobenius();
        }
        out
    }

    /// Quadratic character: 0, 1 or -1.
    pub fn legendre(&self) -> i8 {
        if self.is_zero() {
            return 0;
        }
        if self.field.p == 2 {
            return 1;
        }
        if let Some(t) = self.field.chi_table() {
            return t[self.index_u64() as usize];
        }
        let e = (self.field.q.clone() - 1u32) >> 1;
        if self.pow(&e).is_one() {
            1
        } else {
            -1
        }
    }

    pub fn is_square(&self) -> bool {
        self.legendre() >= 0
    }

    /// Both square roots, lexicographically least coefficient vector first.
    pub fn sqrt(&self) -> Option<(FieldElement, FieldElement)> {
        if self.is_zero() {
            return Some((self.clone(), self.clone()));
        }
        let f = self.field.clone();
        if f.p == 2 {
            let e = f.q.clone() >> 1;
            let s = self.pow(&e);
            return Some((s.clone(), s));
        }
        if !self.is_square() {
            return None;
        }
        let root = match f.q_u64() {
            Some(q) if q < SQRT_EXHAUSTIVE_MAX => f
                .elements()
                .find(|x| &x.square() == self)
                .expect("square has a root"),
            _ => self.tonelli_shanks(),
        };
        let other = -&root;
        if root.c <= other.c {
            Some((root, other))
        } else {
            Some((other, root))
        }
    }

    fn tonelli_shanks(&self) -> FieldElement {
        let f = self.field.clone();
        let qm1 = f.q.clone() - 1u32;
        let s = qm1.trailing_zeros().expect("q - 1 is nonzero");
        let odd = &qm1 >> s;
        let z = f.nonresidue();
        let mut m = s;
        let mut c = z.pow(&odd);
        let mut t = self.pow(&odd);
        let mut r = self.pow(&((&odd + 1u32) >> 1));
        while !t.is_one() {
            let mut i = 0;
            let mut t2 = t.clone();
            while !t2.is_one() {
                t2 = t2.square();
                i += 1;
            }
            let mut b = c.clone();
            for _ in 0..(m - i - 1) {
                b = b.square();
            }
            m = i;
            c = b.square();
            t = &t * &c;
            r = &r * &b;
        }
        r
    }
}

/// Checked field arithmetic.
pub fn arith(a: &FieldElement, b: &FieldElement, op: ArithOp) -> Result<FieldElement, FieldError> {
    a.check(b)?;
    match op {
        ArithOp::Add => Ok(a.add_raw(b)),
        ArithOp::Sub => Ok(a.sub_raw(b)),
        ArithOp::Mul => Ok(a.mul_raw(b)),
        ArithOp::Div => a.div(b),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $raw:ident) => {
        impl $tr<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            /// Panics if the operands live in different fields.
            fn $m(self, o: &FieldElement) -> FieldElement {
                self.check(o).expect("field mismatch");
                self.$raw(o)
            }
        }
        impl $tr<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                (&self).$m(&o)
            }
        }
        impl $tr<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $m(self, o: &FieldElement) -> FieldElement {
                (&self).$m(o)
            }
        }
        impl $tr<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $m(self, o: FieldElement) -> FieldElement {
                self.$m(&o)
            }
        }
    };
}
binop!(Add, add, add_raw);
binop!(Sub, sub, sub_raw);
binop!(Mul, mul, mul_raw);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        let p = self.field.p;
        self.with(self.c.iter().map(|&c| (p - c) % p).collect())
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        -&self
    }
}

/// Kronecker symbol `(d / m)`.
pub fn kronecker(d: i64, m: u64) -> i32 {
    if m == 0 {
        return if d == 1 || d == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut m = m;
    let twos = m.trailing_zeros();
    if twos > 0 {
        if d % 2 == 0 {
            return 0;
        }
        let r8 = d.rem_euclid(8);
        if twos % 2 == 1 && (r8 == 3 || r8 == 5) {
            result = -result;
        }
        m >>= twos;
    }
    if m == 1 {
        return result;
    }
    // Jacobi symbol for odd m
    let mut a = d.rem_euclid(m as i64) as u64;
    let mut n = m;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Dense polynomial arithmetic over `GF(p)` on raw coefficient vectors.
pub(crate) mod raw {
    pub fn inv_mod(a: u64, p: u64) -> u64 {
        let (mut r0, mut r1) = (p as i64, a as i64);
        let (mut s0, mut s1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        debug_assert_eq!(r0, 1);
        s0.rem_euclid(p as i64) as u64
    }

    pub fn trim(a: &mut Vec<u64>) {
        while a.last() == Some(&0) {
            a.pop();
        }
    }

    /// Product of `a` and `b` reduced by the monic `m` (degree `r`).
    pub fn mulmod(a: &[u64], b: &[u64], m: &[u64], neg_m: &[u64], p: u64) -> Vec<u64> {
        let r = m.len() - 1;
        if a.is_empty() || b.is_empty() {
            return vec![0; r];
        }
        let mut acc = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] += x * y;
            }
        }
        for i in (r..acc.len()).rev() {
            let c = acc[i] % p;
            acc[i] = 0;
            if c == 0 {
                continue;
            }
            let base = i - r;
            for (j, &nm) in neg_m.iter().enumerate() {
                acc[base + j] += c * nm;
            }
        }
        acc.truncate(r);
        acc.resize(r, 0);
        for v in acc.iter_mut() {
            *v %= p;
        }
        acc
    }

    pub fn powmod(base: &[u64], e: u64, m: &[u64], p: u64) -> Vec<u64> {
        let r = m.len() - 1;
        let neg_m: Vec<u64> = m[..r].iter().map(|&c| (p - c) % p).collect();
        let mut b = base.to_vec();
        b.resize(r.max(b.len()), 0);
        let b = reduce(&b, m, p);
        let mut acc = vec![0u64; r];
        acc[0] = 1;
        let mut e = e;
        let mut sq = b;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(&acc, &sq, m, &neg_m, p);
            }
            sq = mulmod(&sq, &sq, m, &neg_m, p);
            e >>= 1;
        }
        acc
    }

    /// Remainder of `a` modulo the monic `m`, padded to `deg m`.
    pub fn reduce(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let (_, rem) = divrem(a, m, p);
        let mut rem = rem;
        rem.resize(m.len() - 1, 0);
        rem
    }

    pub fn divrem(a: &[u64], b: &[u64], p: u64) -> (Vec<u64>, Vec<u64>) {
        let mut a = a.to_vec();
        trim(&mut a);
        let mut b = b.to_vec();
        trim(&mut b);
        assert!(!b.is_empty(), "polynomial division by zero");
        if a.len() < b.len() {
            return (vec![], a);
        }
        let lead_inv = inv_mod(*b.last().unwrap(), p);
        let mut q = vec![0u64; a.len() - b.len() + 1];
        for i in (0..q.len()).rev() {
            let c = a[i + b.len() - 1] * lead_inv % p;
            q[i] = c;
            if c == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                a[i + j] = (a[i + j] + p - c * bj % p) % p;
            }
        }
        trim(&mut a);
        trim(&mut q);
        (q, a)
    }

    fn sub(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let n = a.len().max(b.len());
        let mut out: Vec<u64> = (0..n)
            .map(|i| {
                let x = a.get(i).copied().unwrap_or(0);
                let y = b.get(i).copied().unwrap_or(0);
                (x + p - y) % p
            })
            .collect();
        trim(&mut out);
        out
    }

    fn mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![0u64; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = (out[i + j] + x * y) % p;
            }
        }
        trim(&mut out);
        out
    }

    pub fn gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
        let mut x = a.to_vec();
        trim(&mut x);
        let mut y = b.to_vec();
        trim(&mut y);
        while !y.is_empty() {
            let (_, r) = divrem(&x, &y, p);
            x = y;
            y = r;
        }
        x
    }

    /// Inverse of `a` modulo the irreducible `m`.
    pub fn inverse(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
        let mut r0 = m.to_vec();
        let mut r1 = a.to_vec();
        trim(&mut r1);
        let mut s0: Vec<u64> = vec![];
        let mut s1: Vec<u64> = vec![1];
        while !r1.is_empty() {
            let (q, rem) = divrem(&r0, &r1, p);
            let s2 = sub(&s0, &mul(&q, &s1, p), p);
            r0 = r1;
            r1 = rem;
            s0 = s1;
            s1 = s2;
        }
        assert_eq!(r0.len(), 1, "element not invertible");
        let c = inv_mod(r0[0], p);
        let mut out: Vec<u64> = s0.iter().map(|&s| s * c % p).collect();
        trim(&mut out);
        out
    }

    /// Irreducibility via `gcd(x^{p^i} - x, m) = 1` for `i <= deg m / 2`.
    pub fn is_irreducible(m: &[u64], p: u64) -> bool {
        let r = m.len() - 1;
        let mut x = vec![0u64; r];
        x[1] = 1;
        let mut cur = x.clone();
        for _ in 1..=r / 2 {
            cur = powmod(&cur, p, m, p);
            let diff = sub(&cur, &x, p);
            let g = gcd(m, &diff, p);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_field_basics() {
        let f = field_create(41, 1).unwrap();
        assert_eq!(f.from_i64(40) + f.from_i64(2), f.from_i64(1));
        assert_eq!(f.from_i64(7).div(&f.from_i64(7)).unwrap(), f.one());
        assert_eq!(field_create(4, 1).unwrap_err(), FieldError::NotPrime(4));
        assert!(matches!(field_create(65537, 1), Err(FieldError::BoundExceeded(_))));
    }

    #[test]
    fn quadratic_modulus_is_least_in_b_c_order() {
        let p = 53u64;
        let f = field_create(p, 2).unwrap();
        // oracle: scan x^2 + b x + c with (b, c) lexicographic
        let mut expect = None;
        'outer: for b in 0..p {
            for c in 0..p {
                let disc = (b * b + 4 * p * p - 4 * c) % p;
                if kronecker(disc as i64, p) == -1 {
                    expect = Some(vec![c, b, 1]);
                    break 'outer;
                }
            }
        }
        assert_eq!(f.modulus(), expect.unwrap().as_slice());
    }

    #[test]
    fn square_of_generator_matches_long_division() {
        let f = field_create(53, 2).unwrap();
        let x = f.generator();
        let m = f.modulus();
        // x^2 = -m1 x - m0
        let expect = f.from_coeffs(&[(53 - m[0]) % 53, (53 - m[1]) % 53]);
        assert_eq!(&x * &x, expect);
    }

    #[test]
    fn sqrt_examples() {
        let f = field_create(41, 1).unwrap();
        assert_eq!(f.zero().sqrt(), Some((f.zero(), f.zero())));
        assert_eq!(f.from_i64(2).sqrt(), Some((f.from_i64(17), f.from_i64(24))));
        let g = field_create(7, 1).unwrap();
        assert_eq!(g.from_i64(3).sqrt(), None);
    }

    #[test]
    fn tonelli_matches_exhaustive_order() {
        let f = field_create(1031, 1).unwrap();
        for v in 1..200 {
            let a = f.from_i64(v);
            let got = a.sqrt();
            let roots: Vec<_> = f.elements().filter(|x| &x.square() == &a).collect();
            match got {
                None => assert!(roots.is_empty()),
                Some((r1, r2)) => assert_eq!(vec![r1, r2], roots),
            }
        }
    }

    #[test]
    fn frobenius_examples() {
        let f = field_create(53, 2).unwrap();
        let x = f.generator();
        assert_eq!(x.frobenius(), x.pow_u64(53));
        assert_eq!(x.frobenius().frobenius(), x);
        let g = field_create(41, 1).unwrap();
        assert!(g.elements().all(|a| a.frobenius() == a));
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-8, 2), 0);
        assert_eq!(kronecker(17, 1), 1);
        assert_eq!(kronecker(-212, 3), 1);
        assert_eq!(kronecker(-212, 2), 0);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
    }

    #[test]
    fn square_count() {
        for (p, r) in [(7u64, 1usize), (5, 2), (3, 3), (41, 1)] {
            let f = field_create(p, r).unwrap();
            let n = f.elements().filter(|a| a.sqrt().is_some()).count() as u64;
            let q = f.q_u64().unwrap();
            assert_eq!(n, (q + 1) / 2);
        }
    }

    #[test]
    fn large_extension_inverse() {
        let f = field_create(41, 32).unwrap();
        let mut rng = rand::thread_rng();
        for _ in 0..20 {
            let a = f.random(&mut rng);
            if a.is_zero() {
                continue;
            }
            assert!((&a * &a.inv().unwrap()).is_one());
        }
    }
}
