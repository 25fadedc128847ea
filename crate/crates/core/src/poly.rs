//! Univariate polynomials over a [`Field`], with root finding.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::finite_field::{Field, FieldElement};

/// Dense polynomial, constant term first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    field: Arc<Field>,
    c: Vec<FieldElement>,
}

impl Poly {
    pub fn new(field: &Arc<Field>, mut c: Vec<FieldElement>) -> Poly {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { field: field.clone(), c }
    }

    pub fn zero(field: &Arc<Field>) -> Poly {
        Poly { field: field.clone(), c: vec![] }
    }

    pub fn one(field: &Arc<Field>) -> Poly {
        Poly::new(field, vec![field.one()])
    }

    /// `x - a`.
    pub fn linear(a: &FieldElement) -> Poly {
        let f = a.field();
        Poly::new(f, vec![-a, f.one()])
    }

    pub fn x(field: &Arc<Field>) -> Poly {
        Poly::new(field, vec![field.zero(), field.one()])
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.c.get(i).cloned().unwrap_or_else(|| self.field.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = self.field.zero();
        for c in self.c.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(&self.field, (0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        Poly::new(&self.field, (0..n).map(|i| &self.coeff(i) - &o.coeff(i)).collect())
    }

    pub fn scale(&self, k: &FieldElement) -> Poly {
        Poly::new(&self.field, self.c.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.field);
        }
        let mut out = vec![self.field.zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(&self.field, out)
    }

    pub fn derivative(&self) -> Poly {
        let c = self.c.iter().enumerate().skip(1).map(|(i, c)| c.scale(i as i64)).collect();
        Poly::new(&self.field, c)
    }

    pub fn monic(&self) -> Poly {
        match self.c.last() {
            None => self.clone(),
            Some(l) => self.scale(&l.inv().expect("nonzero leading coefficient")),
        }
    }

    pub fn divrem(&self, d: &Poly) -> (Poly, Poly) {
        let dd = d.degree().expect("division by zero polynomial");
        let mut r = self.c.clone();
        if r.len() <= dd {
            return (Poly::zero(&self.field), self.clone());
        }
        let linv = d.c[dd].inv().expect("nonzero leading coefficient");
        let mut q = vec![self.field.zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] * &linv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in d.c.iter().enumerate() {
                r[i + j] = &r[i + j] - &(&c * dj);
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Poly::new(&self.field, q), Poly::new(&self.field, r))
    }

    pub fn rem(&self, d: &Poly) -> Poly {
        self.divrem(d).1
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, o: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn powmod(&self, e: &BigUint, m: &Poly) -> Poly {
        let base = self.rem(m);
        let mut acc = Poly::one(&self.field).rem(m);
        for i in (0..e.bits()).rev() {
            acc = acc.mul(&acc).rem(m);
            if e.bit(i) {
                acc = acc.mul(&base).rem(m);
            }
        }
        acc
    }

    /// Applies `f` to every coefficient, landing in `target`.
    pub fn map(&self, target: &Arc<Field>, f: impl Fn(&FieldElement) -> FieldElement) -> Poly {
        Poly::new(target, self.c.iter().map(f).collect())
    }

    /// Product of `x - r` over the given roots.
    pub fn from_roots(field: &Arc<Field>, roots: &[FieldElement]) -> Poly {
        roots.iter().fold(Poly::one(field), |acc, r| acc.mul(&Poly::linear(r)))
    }

    /// Distinct roots in the coefficient field, sorted by element index.
    pub fn roots(&self) -> Vec<FieldElement> {
        let Some(deg) = self.degree() else {
            return vec![];
        };
        if deg == 0 {
            return vec![];
        }
        let f = self.monic();
        let x = Poly::x(&self.field);
        let xq = x.powmod(self.field.q(), &f);
        let g = f.gcd(&xq.sub(&x));
        let mut out = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        split_linear(&g, &mut rng, &mut out);
        out.sort_by_key(|a| a.index());
        out
    }

    /// Distinct roots with their multiplicities.
    pub fn roots_with_multiplicity(&self) -> Vec<(FieldElement, usize)> {
        self.roots()
            .into_iter()
            .map(|r| {
                let lin = Poly::linear(&r);
                let mut cur = self.clone();
                let mut m = 0;
                loop {
                    let (q, rem) = cur.divrem(&lin);
                    if !rem.is_zero() {
                        break;
                    }
                    m += 1;
                    cur = q;
                }
                (r, m)
            })
            .collect()
    }
}

/// Splits a monic product of distinct linear factors (Cantor-Zassenhaus).
fn split_linear(g: &Poly, rng: &mut ChaCha8Rng, out: &mut Vec<FieldElement>) {
    let field = g.field().clone();
    match g.degree() {
        None | Some(0) => {}
        Some(1) => out.push(-&g.c[0]),
        Some(_) if field.p() == 2 => {
            // binary fields: brute force keeps this branch simple
            for e in field.elements() {
                if g.eval(&e).is_zero() {
                    out.push(e);
                }
            }
        }
        Some(_) => {
            let e = (field.q().clone() - 1u32) >> 1;
            loop {
                let delta = field.random(rng);
                let h = Poly::new(&field, vec![delta, field.one()]);
                let t = h.powmod(&e, g).sub(&Poly::one(&field));
                let d = g.gcd(&t);
                let dd = d.degree().unwrap_or(0);
                if dd > 0 && dd < g.degree().unwrap() {
                    let (other, _) = g.divrem(&d);
                    split_linear(&d, rng, out);
                    split_linear(&other.monic(), rng, out);
                    return;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::field_create;

    #[test]
    fn roots_match_exhaustive_search() {
        let f = field_create(41, 1).unwrap();
        let c: Vec<_> = [5, 0, 3, 1, 0, 7, 1].iter().map(|&v| f.from_i64(v)).collect();
        let p = Poly::new(&f, c);
        let brute: Vec<_> = f.elements().filter(|x| p.eval(x).is_zero()).collect();
        assert_eq!(p.roots(), brute);
    }

    #[test]
    fn multiplicities() {
        let f = field_create(13, 2).unwrap();
        let a = f.from_coeffs(&[3, 4]);
        let b = f.from_i64(5);
        let p = Poly::from_roots(&f, &[a.clone(), a.clone(), b.clone()]);
        let mut got = p.roots_with_multiplicity();
        got.sort_by_key(|(r, _)| r.index());
        let mut expect = vec![(a, 2), (b, 1)];
        expect.sort_by_key(|(r, _)| r.index());
        assert_eq!(got, expect);
    }
}
