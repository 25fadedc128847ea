//! Separable isogenies from kernels (Velu, in Kohel's kernel-polynomial
//! form), Frobenius factors, composition and duals.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::elliptic_curve::{
    apply_iso, classify_with_trace, isomorphisms, Curve, CurveClass, CurveError, Point,
};
use crate::extension::Embedding;
use crate::finite_field::{FieldElement, FieldError};
use crate::modpoly::ModPolyError;
use crate::poly::Poly;
use crate::finite_field::R_MAX;
use crate::torsion::{group_generators, sylow_over, TorsionBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IsogenyError {
    #[error("kernel generator does not have order {0}")]
    WrongOrder(u64),
    #[error("kernel is not stable under Frobenius")]
    NotRational,
    #[error("point is not on the source curve")]
    CurveMismatch,
    #[error("target of the first isogeny is not the source of the second")]
    ClassMismatch,
    #[error(transparent)]
    ModPoly(#[from] ModPolyError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// One Velu step `E -> E/G`, all data over the field of `E`.
#[derive(Debug, Clone)]
pub struct VeluStep {
    source: Curve,
    target: Curve,
    psi_r: Poly,
    psi_2: Poly,
    derivs_r: [Poly; 3],
    derivs_2: [Poly; 2],
    d_r: i64,
    s_r: FieldElement,
    d_2: i64,
    s_2: FieldElement,
    degree: u64,
}

/// `(p1, p2, p3)` power sums of the roots of a monic polynomial.
fn power_sums(f: &Poly) -> [FieldElement; 3] {
    let d = f.degree().unwrap_or(0);
    let c = |k: usize| if k <= d { f.coeff(d - k) } else { f.field().zero() };
    let e1 = -&c(1);
    let e2 = c(2);
    let e3 = -&c(3);
    let p1 = e1.clone();
    let p2 = &(&e1 * &p1) - &e2.scale(2);
    let p3 = &(&(&e1 * &p2) - &(&e2 * &p1)) + &e3.scale(3);
    [p1, p2, p3]
}

impl VeluStep {
    /// Builds the quotient by the subgroup whose nonzero abscissae are the
    /// roots of `kernel` (monic, squarefree).
    pub fn from_kernel_poly(curve: &Curve, kernel: &Poly) -> VeluStep {
        let f = curve.field();
        let a = curve.a().clone();
        let b = curve.b().clone();
        let cubic = Poly::new(f, vec![b.clone(), a.clone(), f.zero(), f.one()]);
        let kernel = kernel.monic();
        let psi_2 = if kernel.degree().unwrap_or(0) == 0 { Poly::one(f) } else { kernel.gcd(&cubic) };
        let psi_r = kernel.divrem(&psi_2).0.monic();
        let d_r = psi_r.degree().unwrap_or(0) as i64;
        let d_2 = psi_2.degree().unwrap_or(0) as i64;
        let [r1, r2, r3] = power_sums(&psi_r);
        let [t1, t2, t3] = power_sums(&psi_2);
        let dr = f.from_i64(d_r);
        let d2 = f.from_i64(d_2);
        // t = sum_S2 g1(x) + sum_SR 2 g1(x);  w = sum_S2 x g1(x) + sum_SR (4 g(x) + 2 x g1(x))
        let g1_r = &r2.scale(3) + &(&a * &dr);
        let g1_2 = &t2.scale(3) + &(&a * &d2);
        let xg1_r = &r3.scale(3) + &(&a * &r1);
        let xg1_2 = &t3.scale(3) + &(&a * &t1);
        let g_r = &(&r3 + &(&a * &r1)) + &(&b * &dr);
        let tt = &g1_2 + &g1_r.scale(2);
        let ww = &(&xg1_2 + &g_r.scale(4)) + &xg1_r.scale(2);
        let target = Curve::new(&a - &tt.scale(5), &b - &ww.scale(7)).expect("Velu codomain is nonsingular");
        let dr1 = psi_r.derivative();
        let dr2 = dr1.derivative();
        let dr3 = dr2.derivative();
        let d21 = psi_2.derivative();
        let d22 = d21.derivative();
        VeluStep {
            source: curve.clone(),
            target,
            psi_r,
            psi_2,
            derivs_r: [dr1, dr2, dr3],
            derivs_2: [d21, d22],
            d_r,
            s_r: r1,
            d_2,
            s_2: t1,
            degree: (1 + d_2 + 2 * d_r) as u64,
        }
    }

    pub fn source(&self) -> &Curve {
        &self.source
    }

    pub fn target(&self) -> &Curve {
        &self.target
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn kernel_poly(&self) -> Poly {
        self.psi_r.mul(&self.psi_2)
    }

    /// Image of `p`, a point over `emb.dst()`.
    pub fn eval(&self, p: &Point, emb: &Embedding) -> Point {
        let (x, y) = match p {
            Point::Infinity => return Point::Infinity,
            Point::Affine(x, y) => (x, y),
        };
        let m = |f: &Poly| emb.map_poly(f).eval(x);
        let pr = m(&self.psi_r);
        let p2 = m(&self.psi_2);
        if pr.is_zero() || p2.is_zero() {
            return Point::Infinity;
        }
        let a = emb.map(self.source.a());
        let b = emb.map(self.source.b());
        let k = x.field();
        let g = &(&(&(x * x) * x) + &(&a * x)) + &b;
        let g1 = &(x * x).scale(3) + &a;
        let g2 = x.scale(6);
        let (r1, r2, r3) = (m(&self.derivs_r[0]), m(&self.derivs_r[1]), m(&self.derivs_r[2]));
        let (q1, q2) = (m(&self.derivs_2[0]), m(&self.derivs_2[1]));
        let ir = pr.inv().expect("nonzero");
        let i2 = p2.inv().expect("nonzero");
        let l1 = &r1 * &ir;
        let l2 = &(&(&r2 * &pr) - &(&r1 * &r1)) * &(&ir * &ir);
        let l3 = &(&(&(&r3 * &(&pr * &pr)) - &(&(&pr * &r1) * &r2).scale(3)) + &(&(&r1 * &r1) * &r1).scale(2))
            * &(&(&ir * &ir) * &ir);
        let m1 = &q1 * &i2;
        let m2 = &(&(&q2 * &p2) - &(&q1 * &q1)) * &(&i2 * &i2);
        let dr = k.from_i64(self.d_r);
        let d2 = k.from_i64(self.d_2);
        let sr = emb.map(&self.s_r);
        let s2 = emb.map(&self.s_2);
        let xx = &(&(&(&(&(&(x + &(&dr * x).scale(2)) - &sr.scale(2)) - &(&g1 * &l1).scale(2)) - &(&g * &l2).scale(4))
            - &(&d2 * x).scale(3))
            - &s2.scale(3))
            + &(&g1 * &m1);
        let xp = &(&(&(&(&(&(&k.one() + &dr.scale(2)) - &(&g2 * &l1).scale(2)) - &(&g1 * &l2).scale(6))
            - &(&g * &l3).scale(4))
            - &d2.scale(3))
            + &(&g2 * &m1))
            + &(&g1 * &m2);
        Point::Affine(xx, y * &xp)
    }
}

#[derive(Debug, Clone)]
pub enum Step {
    Velu(Arc<VeluStep>),
    /// `(x, y) -> (u^2 x, u^3 y)`.
    Iso { u: FieldElement, target: Curve },
    /// `(x, y) -> (x^(p^e), y^(p^e))`.
    Frobenius { e: u32, target: Curve },
    /// Dual of a Frobenius factor: `[p^e]` after undoing the coordinate power map.
    Verschiebung { e: u32, target: Curve },
    Scalar(i64),
}

/// A composite isogeny between curves over one field.
#[derive(Debug, Clone)]
pub struct Isogeny {
    source: Curve,
    target: Curve,
    steps: Vec<Step>,
    sep_degree: u64,
    insep_exp: u32,
}

/// The embedding of `src` into the field of `x`.
fn embedding_into(src: &Arc<crate::finite_field::Field>, p: &Point) -> Result<Arc<Embedding>, IsogenyError> {
    let k = match p {
        Point::Infinity => return Ok(Embedding::identity(src)),
        Point::Affine(x, _) => x.field(),
    };
    if k.p() != src.p() || k.r() % src.r() != 0 {
        return Err(IsogenyError::CurveMismatch);
    }
    Ok(Embedding::extend(src, k.r() / src.r())?)
}

impl Isogeny {
    pub fn identity(curve: &Curve) -> Isogeny {
        Isogeny { source: curve.clone(), target: curve.clone(), steps: vec![], sep_degree: 1, insep_exp: 0 }
    }

    pub fn from_step(step: VeluStep) -> Isogeny {
        Isogeny {
            source: step.source.clone(),
            target: step.target.clone(),
            sep_degree: step.degree,
            insep_exp: 0,
            steps: vec![Step::Velu(Arc::new(step))],
        }
    }

    pub fn from_kernel_poly(curve: &Curve, kernel: &Poly) -> Isogeny {
        Isogeny::from_step(VeluStep::from_kernel_poly(curve, kernel))
    }

    pub fn scalar(curve: &Curve, m: i64) -> Isogeny {
        let m2 = (m * m) as u64;
        let p = curve.field().p();
        let mut e = 0;
        let mut sep = m2;
        while sep % p == 0 {
            sep /= p;
            e += 1;
        }
        Isogeny { source: curve.clone(), target: curve.clone(), steps: vec![Step::Scalar(m)], sep_degree: sep, insep_exp: e }
    }

    pub fn source(&self) -> &Curve {
        &self.source
    }

    pub fn target(&self) -> &Curve {
        &self.target
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn separable_degree(&self) -> u64 {
        self.sep_degree
    }

    pub fn insep_exp(&self) -> u32 {
        self.insep_exp
    }

    pub fn degree(&self) -> BigUint {
        BigUint::from(self.sep_degree) * BigUint::from(self.source.field().p()).pow(self.insep_exp)
    }

    pub fn source_class(&self, trace: i64) -> CurveClass {
        classify_with_trace(&self.source, trace)
    }

    pub fn target_class(&self, trace: i64) -> CurveClass {
        classify_with_trace(&self.target, trace)
    }

    /// The kernel polynomial when this is a single Velu step up to isomorphism.
    pub fn kernel_poly(&self) -> Option<Poly> {
        let f = self.source.field();
        let mut u2 = f.one();
        let mut found: Option<Poly> = None;
        for s in &self.steps {
            match (s, &found) {
                (Step::Iso { u, .. }, None) => u2 = &u2 * &(u * u),
                (Step::Iso { .. }, Some(_)) => {}
                (Step::Velu(v), None) => found = Some(v.kernel_poly()),
                _ => return None,
            }
        }
        let Some(k) = found else {
            return Some(Poly::one(f));
        };
        // pull the roots back through the leading isomorphisms: x -> x / u^2
        let mut pw = f.one();
        let c = k
            .coeffs()
            .iter()
            .map(|c| {
                let out = c * &pw;
                pw = &pw * &u2;
                out
            })
            .collect();
        Some(Poly::new(f, c).monic())
    }

    pub fn evaluate(&self, p: &Point) -> Result<Point, IsogenyError> {
        let emb = embedding_into(self.source.field(), p)?;
        let src = self.source.base_change(&emb);
        if !src.contains(p) {
            return Err(IsogenyError::CurveMismatch);
        }
        let mut cur = p.clone();
        let mut curve = src;
        let k = emb.dst().clone();
        for step in &self.steps {
            match step {
                Step::Velu(v) => {
                    cur = v.eval(&cur, &emb);
                    curve = v.target.base_change(&emb);
                }
                Step::Iso { u, target } => {
                    cur = apply_iso(&emb.map(u), &cur);
                    curve = target.base_change(&emb);
                }
                Step::Frobenius { e, target } => {
                    cur = Curve::frobenius_point(&cur, *e as usize % k.r());
                    curve = target.base_change(&emb);
                }
                Step::Verschiebung { e, target } => {
                    let back = (k.r() - (*e as usize % k.r())) % k.r();
                    cur = Curve::frobenius_point(&cur, back);
                    curve = target.base_change(&emb);
                    let pe = k.p().pow(*e) as i64;
                    cur = curve.scalar_mul(pe, &cur);
                }
                Step::Scalar(m) => {
                    cur = curve.scalar_mul(*m, &cur);
                }
            }
        }
        debug_assert!(curve.contains(&cur));
        Ok(cur)
    }

    /// `psi o phi`; an isomorphism is inserted when the curves agree only up to isomorphism.
    pub fn compose(psi: &Isogeny, phi: &Isogeny) -> Result<Isogeny, IsogenyError> {
        let mut steps = phi.steps.clone();
        if phi.target != psi.source {
            if phi.target.j_invariant() != psi.source.j_invariant() {
                return Err(IsogenyError::ClassMismatch);
            }
            let u = isomorphisms(&phi.target, &psi.source)
                .into_iter()
                .next()
                .ok_or(IsogenyError::ClassMismatch)?;
            steps.push(Step::Iso { u, target: psi.source.clone() });
        }
        steps.extend(psi.steps.iter().cloned());
        Ok(Isogeny {
            source: phi.source.clone(),
            target: psi.target.clone(),
            steps,
            sep_degree: phi.sep_degree * psi.sep_degree,
            insep_exp: phi.insep_exp + psi.insep_exp,
        })
    }

    /// Post-composes with `u`, landing on `target`.
    pub fn then_iso(mut self, u: FieldElement, target: Curve) -> Isogeny {
        self.steps.push(Step::Iso { u, target: target.clone() });
        self.target = target;
        self
    }

    /// Lands on the given model of the target, which must have the same `j`.
    pub fn onto(self, target: &Curve) -> Result<Isogeny, IsogenyError> {
        if &self.target == target {
            return Ok(self);
        }
        let u = isomorphisms(&self.target, target).into_iter().next().ok_or(IsogenyError::ClassMismatch)?;
        Ok(self.then_iso(u, target.clone()))
    }

    /// The dual, with `dual o self = [deg]` on the source.
    pub fn dual(&self, trace: i64) -> Result<Isogeny, IsogenyError> {
        let mut out = Isogeny::identity(&self.target);
        let mut curves = vec![self.source.clone()];
        for s in &self.steps {
            curves.push(match s {
                Step::Velu(v) => v.target.clone(),
                Step::Iso { target, .. } | Step::Frobenius { target, .. } | Step::Verschiebung { target, .. } => {
                    target.clone()
                }
                Step::Scalar(_) => curves.last().unwrap().clone(),
            });
        }
        for (i, s) in self.steps.iter().enumerate().rev() {
            let (from, to) = (&curves[i + 1], &curves[i]);
            let d = match s {
                Step::Velu(v) => velu_dual(v, trace)?,
                Step::Iso { u, .. } => Isogeny {
                    source: from.clone(),
                    target: to.clone(),
                    steps: vec![Step::Iso { u: u.inv()?, target: to.clone() }],
                    sep_degree: 1,
                    insep_exp: 0,
                },
                Step::Frobenius { e, .. } => Isogeny {
                    source: from.clone(),
                    target: to.clone(),
                    steps: vec![Step::Verschiebung { e: *e, target: to.clone() }],
                    sep_degree: 1,
                    insep_exp: *e,
                },
                Step::Verschiebung { e, .. } => frobenius_isogeny(from, *e),
                Step::Scalar(m) => Isogeny::scalar(from, *m),
            };
            out = Isogeny::compose(&d, &out)?;
        }
        Ok(out)
    }
}

/// Dual of a single cyclic Velu step.
fn velu_dual(v: &VeluStep, trace: i64) -> Result<Isogeny, IsogenyError> {
    let n = v.degree;
    let phi = Isogeny::from_step(v.clone());
    if n == 1 {
        let u = isomorphisms(&v.target, &v.source).into_iter().next().ok_or(IsogenyError::ClassMismatch)?;
        return Ok(Isogeny::identity(&v.target).then_iso(u, v.source.clone()));
    }
    let basis = TorsionBasis::new(&v.source, trace, n)?;
    let gen = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .map(|(x, y)| phi.evaluate(&basis.combine(x, y)))
        .find_map(|img| {
            let img = img.ok()?;
            let tgt = v.target.base_change(&basis.emb);
            has_order(&tgt, &img, n).then_some(img)
        })
        .expect("the image of E[n] is cyclic of order n");
    let back = velu(&v.target, &gen, n)?;
    // fix the isomorphism so that the composite is [n]
    let src_k = v.source.base_change(&basis.emb);
    let mut rng = ChaCha8Rng::seed_from_u64(n);
    let tests: Vec<Point> = (0..3).map(|_| src_k.random_point(&mut rng)).collect();
    for u in isomorphisms(back.target(), &v.source) {
        let cand = back.clone().then_iso(u, v.source.clone());
        let ok = tests.iter().all(|r| {
            let lhs = cand.evaluate(&phi.evaluate(r).expect("on curve")).expect("on curve");
            lhs == src_k.scalar_mul(n as i64, r)
        });
        if ok {
            return Ok(cand);
        }
    }
    unreachable!("some isomorphism normalises the dual")
}

fn has_order(curve: &Curve, p: &Point, n: u64) -> bool {
    if !curve.scalar_mul(n as i64, p).is_infinity() {
        return false;
    }
    crate::elliptic_curve::factorize(n)
        .iter()
        .all(|&(l, _)| !curve.scalar_mul((n / l) as i64, p).is_infinity())
}

/// Kernel polynomial of `<g>` over the field of `g`, with `g` of exact order `n`.
pub fn kernel_poly_from_generator(curve_k: &Curve, g: &Point, n: u64) -> Result<Poly, IsogenyError> {
    if !has_order(curve_k, g, n) {
        return Err(IsogenyError::WrongOrder(n));
    }
    let k = curve_k.field();
    let mut xs: Vec<FieldElement> = Vec::new();
    let mut cur = g.clone();
    for _ in 1..n {
        if let Point::Affine(x, _) = &cur {
            if !xs.contains(x) {
                xs.push(x.clone());
            }
        }
        cur = curve_k.add(&cur, g);
    }
    Ok(Poly::from_roots(k, &xs))
}

/// The `k`-rational isogeny with kernel `<gen>`; `gen` may lie over an extension.
pub fn velu(curve: &Curve, gen: &Point, order: u64) -> Result<Isogeny, IsogenyError> {
    if order == 1 {
        return if gen.is_infinity() { Ok(Isogeny::identity(curve)) } else { Err(IsogenyError::WrongOrder(1)) };
    }
    let emb = embedding_into(curve.field(), gen)?;
    let ck = curve.base_change(&emb);
    if !ck.contains(gen) {
        return Err(IsogenyError::CurveMismatch);
    }
    let kp = kernel_poly_from_generator(&ck, gen, order)?;
    let kf = emb.project_poly(&kp).ok_or(IsogenyError::NotRational)?;
    Ok(Isogeny::from_kernel_poly(curve, &kf))
}

/// Codomain of `E_K -> E_K/<gen>` over the field of `gen`, rational or not.
pub fn velu_codomain(curve_k: &Curve, gen: &Point, order: u64) -> Result<Curve, IsogenyError> {
    let kp = kernel_poly_from_generator(curve_k, gen, order)?;
    Ok(VeluStep::from_kernel_poly(curve_k, &kp).target.clone())
}

/// `(x, y) -> (x^(p^e), y^(p^e))`.
pub fn frobenius_isogeny(curve: &Curve, e: u32) -> Isogeny {
    if e == 0 {
        return Isogeny::identity(curve);
    }
    let target = Curve::new(curve.a().frobenius_pow(e as usize), curve.b().frobenius_pow(e as usize))
        .expect("conjugate of a nonsingular curve");
    Isogeny {
        source: curve.clone(),
        target: target.clone(),
        steps: vec![Step::Frobenius { e, target }],
        sep_degree: 1,
        insep_exp: e,
    }
}

/// Kernel polynomials of all rational cyclic `l`-isogenies from `curve`.
pub fn rational_kernels(curve: &Curve, trace: i64, l: u64) -> Result<Vec<Poly>, IsogenyError> {
    let f = curve.field();
    if l == 2 {
        let cubic = Poly::new(f, vec![curve.b().clone(), curve.a().clone(), f.zero(), f.one()]);
        return Ok(cubic.roots().iter().map(Poly::linear).collect());
    }
    let basis = match TorsionBasis::new(curve, trace, l) {
        Ok(b) => b,
        Err(CurveError::BoundExceeded(_)) => return eigen_kernels(curve, trace, l),
        Err(e) => return Err(e.into()),
    };
    let m = basis.frobenius_matrix();
    let ck = &basis.curve;
    let mut lines: Vec<(u64, u64)> = (0..l).map(|y| (1, y)).collect();
    lines.push((0, 1));
    let mut out = Vec::new();
    for (x, y) in lines {
        let img = ((m[0][0] * x + m[0][1] * y) % l, (m[1][0] * x + m[1][1] * y) % l);
        // eigenvector test: img parallel to (x, y)
        if (img.0 * y + l * l - img.1 * x) % l != 0 {
            continue;
        }
        let g = basis.combine(x, y);
        let kp = kernel_poly_from_generator(ck, &g, l)?;
        out.push(basis.emb.project_poly(&kp).ok_or(IsogenyError::NotRational)?);
    }
    Ok(out)
}

/// Rational `l`-kernels found from Frobenius eigenlines alone.
///
/// An eigenline with eigenvalue `lambda` is pointwise defined over the degree
/// `ord(lambda)` extension, which divides `l - 1`, so the full `E[l]` is never
/// needed.
fn eigen_kernels(curve: &Curve, trace: i64, l: u64) -> Result<Vec<Poly>, IsogenyError> {
    let r = curve.field().r();
    let mut out: Vec<Poly> = Vec::new();
    for s in (1..l).filter(|s| (l - 1) % s == 0 && r * *s as usize <= R_MAX) {
        let (emb, syl) = sylow_over(curve, trace, l, s as usize)?;
        if syl.a == 0 {
            continue;
        }
        let ck = curve.base_change(&emb);
        let t1 = ck.scalar_mul(l.pow(syl.a - 1) as i64, &syl.p1);
        let mut gens = vec![t1.clone()];
        if syl.b > 0 {
            let t2 = ck.scalar_mul(l.pow(syl.b - 1) as i64, &syl.p2);
            gens = (1..l).map(|y| ck.add(&t1, &ck.scalar_mul(y as i64, &t2))).collect();
            gens.insert(0, t1);
            gens.push(t2);
        }
        for g in gens {
            let kp = kernel_poly_from_generator(&ck, &g, l)?;
            if let Some(k) = emb.project_poly(&kp) {
                if !out.contains(&k) {
                    out.push(k);
                }
            }
        }
    }
    Ok(out)
}

/// Whether `comp: E -> E'` is `[l]` followed by an isomorphism `E -> E'`.
///
/// Two endomorphisms of degree `l^2` that agree on a group larger than
/// `4 l^2` are equal, so generators of such a group `E(GF(q^s))` decide it.
pub fn is_multiplication(comp: &Isogeny, l: u64, trace: i64) -> Result<bool, IsogenyError> {
    let e = comp.source();
    if comp.target().j_invariant() != e.j_invariant() || comp.degree() != BigUint::from(l * l) {
        return Ok(false);
    }
    let f = e.field();
    let q = f.q_u64().ok_or_else(|| CurveError::BoundExceeded("base field too large".into()))?;
    let s = (1..=R_MAX / f.r())
        .find(|&s| crate::elliptic_curve::extension_order(q, trace, s as u32) > BigUint::from(4 * l * l))
        .ok_or_else(|| CurveError::BoundExceeded("no extension with enough points".into()))?;
    let (emb, p, q2) = group_generators(e, trace, s)?;
    let ek = e.base_change(&emb);
    let want = [ek.scalar_mul(l as i64, &p), ek.scalar_mul(l as i64, &q2)];
    let got = [comp.evaluate(&p)?, comp.evaluate(&q2)?];
    Ok(isomorphisms(comp.target(), e).iter().any(|u| {
        let u = emb.map(u);
        got.iter().zip(&want).all(|(g, w)| apply_iso(&u, g) == *w)
    }))
}

/// All rational cyclic `l`-isogenies from `curve`, one per kernel.
pub fn rational_isogenies(curve: &Curve, trace: i64, l: u64) -> Result<Vec<Isogeny>, IsogenyError> {
    Ok(rational_kernels(curve, trace, l)?.iter().map(|k| Isogeny::from_kernel_poly(curve, k)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic_curve::curve_from_j;
    use crate::finite_field::field_create;
    use crate::modpoly::modular_adjacent;

    fn e41(j: i64) -> Curve {
        let f = field_create(41, 1).unwrap();
        curve_from_j(&f, &f.from_i64(j), 6).unwrap()
    }

    #[test]
    fn two_isogeny_from_29_reaches_5_and_is_a_homomorphism() {
        let e = e41(29);
        let isos = rational_isogenies(&e, 6, 2).unwrap();
        let js: Vec<u64> = isos.iter().map(|i| i.target().j_invariant().index_u64()).collect();
        assert!(js.contains(&5));
        let pts = e.points();
        for phi in &isos {
            assert_eq!(phi.target().trace().unwrap(), 6);
            for p in &pts {
                for q in pts.iter().step_by(5) {
                    let lhs = phi.evaluate(&e.add(p, q)).unwrap();
                    let rhs = phi.target().add(&phi.evaluate(p).unwrap(), &phi.evaluate(q).unwrap());
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn three_isogeny_from_29_reaches_22() {
        let e = e41(29);
        let js: Vec<u64> =
            rational_isogenies(&e, 6, 3).unwrap().iter().map(|i| i.target().j_invariant().index_u64()).collect();
        assert!(js.contains(&22));
    }

    #[test]
    fn dual_composes_to_multiplication() {
        let e = e41(29);
        for l in [2, 3] {
            for phi in rational_isogenies(&e, 6, l).unwrap() {
                let d = phi.dual(6).unwrap();
                assert_eq!(d.target(), &e);
                for p in e.points() {
                    let lhs = d.evaluate(&phi.evaluate(&p).unwrap()).unwrap();
                    assert_eq!(lhs, e.scalar_mul(l as i64, &p));
                }
                let dd = d.dual(6).unwrap();
                assert_eq!(dd.kernel_poly(), phi.kernel_poly());
            }
        }
    }

    #[test]
    fn compose_three_then_two_gives_degree_six_to_25() {
        let e = e41(29);
        let three = rational_isogenies(&e, 6, 3)
            .unwrap()
            .into_iter()
            .find(|i| i.target().j_invariant().index_u64() == 22)
            .unwrap();
        let mid = three.target().clone();
        let two = rational_isogenies(&mid, 6, 2)
            .unwrap()
            .into_iter()
            .find(|i| i.target().j_invariant().index_u64() == 25)
            .unwrap();
        let comp = Isogeny::compose(&two, &three).unwrap();
        assert_eq!(comp.degree(), BigUint::from(6u32));
        assert_eq!(comp.target().j_invariant().index_u64(), 25);
    }

    #[test]
    fn kernel_points_map_to_infinity_over_extensions() {
        let e = e41(13);
        let b = TorsionBasis::new(&e, 6, 3).unwrap();
        for (x, y) in [(1u64, 0u64), (0, 1), (1, 1), (1, 2)] {
            let g = b.combine(x, y);
            match velu(&e, &g, 3) {
                Ok(phi) => {
                    assert!(phi.evaluate(&g).unwrap().is_infinity());
                    let r = b.combine(1 - x.min(1), 1);
                    let _ = phi.evaluate(&r).unwrap();
                }
                Err(IsogenyError::NotRational) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }

    #[test]
    fn frobenius_satisfies_characteristic_polynomial() {
        let f = field_create(41, 1).unwrap();
        let e = e41(5);
        let pi = frobenius_isogeny(&e, 1);
        assert_eq!(pi.target(), &e);
        let k = Embedding::extend(&f, 3).unwrap();
        let ek = e.base_change(&k);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let p = ek.random_point(&mut rng);
            let p1 = pi.evaluate(&p).unwrap();
            let p2 = pi.evaluate(&p1).unwrap();
            let s = ek.add(&ek.add(&p2, &ek.scalar_mul(-6, &p1)), &ek.scalar_mul(41, &p));
            assert!(s.is_infinity());
        }
        let d = pi.dual(6).unwrap();
        let p = ek.random_point(&mut rng);
        assert_eq!(d.evaluate(&pi.evaluate(&p).unwrap()).unwrap(), ek.scalar_mul(41, &p));
    }

    #[test]
    fn velu_agrees_with_modular_polynomials() {
        for p in [41u64, 43, 53, 61, 67] {
            let f = field_create(p, 1).unwrap();
            for j in f.elements().step_by(7) {
                for tw in crate::elliptic_curve::classes_with_j(&f, &j).unwrap() {
                    for l in [2u64, 3] {
                        for phi in rational_isogenies(&tw.representative, tw.trace, l).unwrap() {
                            let j2 = phi.target().j_invariant();
                            assert!(modular_adjacent(l, &j, &j2).unwrap());
                            assert_eq!(phi.target().trace().unwrap(), tw.trace);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn identity_kernel() {
        let e = e41(29);
        let id = velu(&e, &Point::Infinity, 1).unwrap();
        assert_eq!(id.target(), &e);
        assert_eq!(id.degree(), BigUint::from(1u32));
    }

    #[test]
    fn eigenlines_find_every_rational_kernel() {
        for j in [5, 29, 22, 13] {
            for l in [3, 5, 7] {
                let e = e41(j);
                let mut full = rational_kernels(&e, 6, l).unwrap();
                let mut eig = eigen_kernels(&e, 6, l).unwrap();
                full.sort_by_key(|k| format!("{k:?}"));
                eig.sort_by_key(|k| format!("{k:?}"));
                assert_eq!(full, eig, "j={j} l={l}");
            }
        }
    }

    #[test]
    fn multiplication_is_recognised() {
        let e = e41(5);
        for l in [2, 3] {
            for phi in rational_isogenies(&e, 6, l).unwrap() {
                let back = phi.dual(6).unwrap();
                assert!(is_multiplication(&Isogeny::compose(&back, &phi).unwrap(), l, 6).unwrap());
                for psi in rational_isogenies(phi.target(), 6, l).unwrap() {
                    let comp = Isogeny::compose(&psi, &phi).unwrap();
                    let same_kernel = psi.kernel_poly() == back.kernel_poly();
                    assert_eq!(is_multiplication(&comp, l, 6).unwrap(), same_kernel);
                }
            }
        }
    }
}
