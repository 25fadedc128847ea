//! Classical modular polynomials `Phi_l(X, Y)` for `l` in {2, 3, 5, 7}.
//!
//! The coefficients ship with the crate; setting `ISOGENION_DATA` to a file
//! in the same `l i j c` format overrides them.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use num_bigint::BigInt;

use crate::finite_field::FieldElement;
use crate::poly::Poly;

const EMBEDDED: &str = include_str!("../data/modpoly.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModPolyError {
    #[error("modular polynomial of level {0} is not available")]
    UnsupportedLevel(u64),
    #[error("malformed modular polynomial data: {0}")]
    Malformed(String),
}

/// `Phi_l` as a symmetric map `(i, j) -> c` of `X^i Y^j` coefficients.
#[derive(Debug, Clone)]
pub struct ModularPolynomial {
    pub level: u64,
    pub coeffs: BTreeMap<(u32, u32), BigInt>,
}

impl ModularPolynomial {
    pub fn coeff(&self, i: u32, j: u32) -> BigInt {
        let k = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&k).cloned().unwrap_or_default()
    }

    /// `Phi_l(x, Y)` as a polynomial in `Y`.
    pub fn specialize(&self, x: &FieldElement) -> Poly {
        let f = x.field();
        let n = self.level as u32 + 1;
        let mut xpow = vec![f.one()];
        for i in 1..=n as usize {
            xpow.push(&xpow[i - 1] * x);
        }
        let mut c = vec![f.zero(); n as usize + 1];
        for i in 0..=n {
            for j in 0..=n {
                let a = self.coeff(i, j);
                if a != BigInt::default() {
                    c[j as usize] = &c[j as usize] + &(&f.from_bigint(&a) * &xpow[i as usize]);
                }
            }
        }
        Poly::new(f, c)
    }

    pub fn eval(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        self.specialize(x).eval(y)
    }
}

fn parse(text: &str) -> Result<BTreeMap<u64, ModularPolynomial>, ModPolyError> {
    let mut out: BTreeMap<u64, ModularPolynomial> = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(ModPolyError::Malformed(format!("line {}: expected 4 fields", n + 1)));
        }
        let bad = |_| ModPolyError::Malformed(format!("line {}: bad number", n + 1));
        let l: u64 = parts[0].parse().map_err(bad)?;
        let i: u32 = parts[1].parse().map_err(bad)?;
        let j: u32 = parts[2].parse().map_err(bad)?;
        let c: BigInt = parts[3]
            .parse()
            .map_err(|_| ModPolyError::Malformed(format!("line {}: bad coefficient", n + 1)))?;
        let key = if i <= j { (i, j) } else { (j, i) };
        out.entry(l)
            .or_insert_with(|| ModularPolynomial { level: l, coeffs: BTreeMap::new() })
            .coeffs
            .insert(key, c);
    }
    Ok(out)
}

fn table() -> &'static BTreeMap<u64, ModularPolynomial> {
    static TABLE: OnceLock<BTreeMap<u64, ModularPolynomial>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let text = std::env::var("ISOGENION_DATA")
            .ok()
            .and_then(|p| std::fs::read_to_string(p).ok())
            .unwrap_or_else(|| EMBEDDED.to_string());
        parse(&text).expect("modular polynomial data parses")
    })
}

pub fn modular_polynomial(l: u64) -> Result<&'static ModularPolynomial, ModPolyError> {
    table().get(&l).ok_or(ModPolyError::UnsupportedLevel(l))
}

/// Whether `Phi_l(j1, j2) = 0`.
pub fn modular_adjacent(l: u64, j1: &FieldElement, j2: &FieldElement) -> Result<bool, ModPolyError> {
    Ok(modular_polynomial(l)?.eval(j1, j2).is_zero())
}

/// Roots of `Phi_l(j, Y)` in the field of `j`, with multiplicity.
pub fn modular_roots(l: u64, j: &FieldElement) -> Result<Vec<(FieldElement, usize)>, ModPolyError> {
    Ok(modular_polynomial(l)?.specialize(j).roots_with_multiplicity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::field_create;

    #[test]
    fn known_coefficients_of_phi2() {
        let p = modular_polynomial(2).unwrap();
        assert_eq!(p.coeff(3, 0), BigInt::from(1));
        assert_eq!(p.coeff(1, 1), BigInt::from(40773375));
        assert_eq!(p.coeff(2, 1), BigInt::from(1488));
        assert_eq!(p.coeff(1, 2), BigInt::from(1488));
        assert_eq!(p.coeff(2, 2), BigInt::from(-1));
        assert_eq!(p.coeff(0, 0), "-157464000000000".parse::<BigInt>().unwrap());
    }

    #[test]
    fn symmetric_and_of_degree_l_plus_one() {
        for l in [2u64, 3, 5, 7] {
            let p = modular_polynomial(l).unwrap();
            let n = l as u32 + 1;
            assert_eq!(p.coeff(n, 0), BigInt::from(1));
            assert!(p.coeffs.keys().all(|&(i, j)| i <= n && j <= n));
        }
        assert!(matches!(modular_polynomial(11), Err(ModPolyError::UnsupportedLevel(11))));
    }

    #[test]
    fn adjacency_in_gf41() {
        let f = field_create(41, 1).unwrap();
        assert!(modular_adjacent(2, &f.from_i64(29), &f.from_i64(5)).unwrap());
        assert!(modular_adjacent(3, &f.from_i64(29), &f.from_i64(22)).unwrap());
    }
}
