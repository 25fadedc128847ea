//! Embeddings `GF(p^r) -> GF(p^(rs))` and projection back.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::finite_field::{field_create, raw, Field, FieldElement, FieldError};
use crate::poly::Poly;

#[derive(Debug)]
pub struct Embedding {
    src: Arc<Field>,
    dst: Arc<Field>,
    /// Images of `1, a, ..., a^(r-1)` where `a` generates `src`.
    powers: Vec<FieldElement>,
    pivots: Vec<usize>,
    /// Inverse of the `r x r` submatrix on `pivots`, row-major.
    inv: Vec<Vec<u64>>,
}

static EMBEDDINGS: OnceLock<Mutex<HashMap<(u64, usize, usize), Arc<Embedding>>>> = OnceLock::new();

impl Embedding {
    /// The canonical embedding of `src` into its degree-`s` extension.
    pub fn extend(src: &Arc<Field>, s: usize) -> Result<Arc<Embedding>, FieldError> {
        let key = (src.p(), src.r(), s);
        let cache = EMBEDDINGS.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(e) = cache.lock().expect("embedding cache poisoned").get(&key) {
            return Ok(e.clone());
        }
        let dst = field_create(src.p(), src.r() * s)?;
        let emb = Arc::new(Embedding::build(src, &dst));
        Ok(cache.lock().expect("embedding cache poisoned").entry(key).or_insert(emb).clone())
    }

    pub fn identity(f: &Arc<Field>) -> Arc<Embedding> {
        Embedding::extend(f, 1).expect("degree-1 extension")
    }

    fn build(src: &Arc<Field>, dst: &Arc<Field>) -> Embedding {
        let p = src.p();
        let r = src.r();
        let alpha = if r == 1 {
            dst.one()
        } else {
            let m = src.modulus();
            let poly = Poly::new(dst, m.iter().map(|&c| dst.from_i64(c as i64)).collect());
            poly.roots().into_iter().next().expect("extension contains a root of the modulus")
        };
        let mut powers = vec![dst.one()];
        for i in 1..r {
            powers.push(&powers[i - 1] * &alpha);
        }
        // choose independent rows of the dst-coordinate matrix
        let n = dst.r();
        let col = |i: usize, row: usize| powers[i].coeffs()[row];
        let mut pivots = Vec::new();
        let mut rows: Vec<Vec<u64>> = Vec::new();
        let mut echelon: Vec<(usize, Vec<u64>)> = Vec::new();
        for row in 0..n {
            let mut v: Vec<u64> = (0..r).map(|i| col(i, row)).collect();
            for (pc, e) in &echelon {
                if v[*pc] != 0 {
                    let k = v[*pc];
                    for (x, y) in v.iter_mut().zip(e) {
                        *x = (*x + p - k * y % p) % p;
                    }
                }
            }
            if let Some(pc) = v.iter().position(|&x| x != 0) {
                let inv = raw::inv_mod(v[pc], p);
                for x in v.iter_mut() {
                    *x = *x * inv % p;
                }
                echelon.push((pc, v));
                pivots.push(row);
                rows.push((0..r).map(|i| col(i, row)).collect());
                if pivots.len() == r {
                    break;
                }
            }
        }
        let inv = invert_mod_p(&rows, p);
        Embedding { src: src.clone(), dst: dst.clone(), powers, pivots, inv }
    }

    pub fn src(&self) -> &Arc<Field> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<Field> {
        &self.dst
    }

    /// Extension degree `[dst : src]`.
    pub fn degree(&self) -> usize {
        self.dst.r() / self.src.r()
    }

    pub fn map(&self, x: &FieldElement) -> FieldElement {
        debug_assert_eq!(x.field(), &self.src);
        let mut acc = self.dst.zero();
        for (c, pw) in x.coeffs().iter().zip(&self.powers) {
            if *c != 0 {
                acc = &acc + &pw.scale(*c as i64);
            }
        }
        acc
    }

    /// The preimage of `y`, if `y` lies in the image.
    pub fn project(&self, y: &FieldElement) -> Option<FieldElement> {
        let p = self.src.p();
        let r = self.src.r();
        let rhs: Vec<u64> = self.pivots.iter().map(|&i| y.coeffs()[i]).collect();
        let c: Vec<u64> = (0..r)
            .map(|i| (0..r).fold(0u64, |acc, j| (acc + self.inv[i][j] * rhs[j]) % p))
            .collect();
        let x = self.src.from_coeffs(&c);
        (self.map(&x) == *y).then_some(x)
    }

    pub fn map_poly(&self, f: &Poly) -> Poly {
        f.map(&self.dst, |c| self.map(c))
    }

    pub fn project_poly(&self, f: &Poly) -> Option<Poly> {
        let c: Option<Vec<_>> = f.coeffs().iter().map(|c| self.project(c)).collect();
        Some(Poly::new(&self.src, c?))
    }
}

fn invert_mod_p(m: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = m.len();
    let mut a: Vec<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u64::from(i == j)));
            r
        })
        .collect();
    for c in 0..n {
        let piv = (c..n).find(|&i| a[i][c] != 0).expect("invertible pivot block");
        a.swap(c, piv);
        let inv = raw::inv_mod(a[c][c], p);
        for x in a[c].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..n {
            if i != c && a[i][c] != 0 {
                let k = a[i][c];
                let pivot_row = a[c].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x = (*x + p - k * y % p) % p;
                }
            }
        }
    }
    a.into_iter().map(|row| row[n..].to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_a_ring_map_and_projects_back() {
        let f = field_create(13, 2).unwrap();
        let e = Embedding::extend(&f, 3).unwrap();
        let elems: Vec<_> = f.elements().step_by(7).collect();
        for x in &elems {
            assert_eq!(e.project(&e.map(x)).as_ref(), Some(x));
            for y in &elems {
                assert_eq!(e.map(&(x * y)), &e.map(x) * &e.map(y));
                assert_eq!(e.map(&(x + y)), &e.map(x) + &e.map(y));
            }
        }
        let k = e.dst();
        assert_eq!(e.project(&k.generator()), None);
    }

    #[test]
    fn prime_field_embedding() {
        let f = field_create(41, 1).unwrap();
        let e = Embedding::extend(&f, 4).unwrap();
        let x = f.from_i64(17);
        assert_eq!(e.map(&x), e.dst().from_i64(17));
        assert_eq!(e.project(&e.dst().from_i64(17)), Some(x));
    }
}
