//! Endomorphism rings of curves whose `k`-endomorphism algebra is imaginary
//! quadratic, and their action on torsion.
//!
//! `End(E)` is `Z + Z f gamma` with `gamma` the standard generator of the
//! maximal order. Writing `pi = c + f0 gamma` gives `f gamma = (pi - c) / w`
//! with `w = f0 / f`, which is how order elements act on torsion points.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::elliptic_curve::{
    classify_with_trace, discriminant_frobenius_order, factorize, valuation, Curve, CurveClass, CurveError, Point,
};
use crate::extension::Embedding;
use crate::isogeny::IsogenyError;
use crate::quadratic_order::QuadOrder;
use crate::torsion::{cached_basis, mod_inverse, TorsionBasis, M_MAX};
use crate::walk::{cached_kernels, Walk};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EndoError {
    #[error("the endomorphism algebra over k is not imaginary quadratic")]
    OrdinaryOnly,
    #[error("the element is not an endomorphism of this curve")]
    NotInEndomorphismRing,
    #[error("bound exceeded: {0}")]
    BoundExceeded(String),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Isogeny(#[from] IsogenyError),
}

#[derive(Debug, Clone)]
pub struct EndoDescriptor {
    pub class: CurveClass,
    pub trace: i64,
    pub q: u64,
    pub d0: i64,
    pub f: u64,
    pub f0: u64,
    /// `l -> v_l(f)` for every prime `l | f0`.
    pub levels: BTreeMap<u64, u32>,
}

impl EndoDescriptor {
    pub fn order(&self) -> QuadOrder {
        QuadOrder { d0: self.d0, f: self.f }
    }

    /// `w = f0 / f`.
    pub fn w(&self) -> u64 {
        self.f0 / self.f
    }

    /// `c` with `pi = c + f0 gamma`.
    pub fn c(&self) -> i64 {
        let delta = i64::from(self.d0.rem_euclid(4) == 1);
        (self.trace - self.f0 as i64 * delta) / 2
    }

    /// `f gamma` as `(u, v, w)`, meaning `(u + v pi) / w`.
    pub fn f_gamma(&self) -> (i64, i64, u64) {
        (-self.c(), 1, self.w())
    }

    /// `pi` in coordinates on `(1, f gamma)`.
    pub fn pi_coords(&self) -> (i64, i64) {
        (self.c(), self.w() as i64)
    }
}

static DESCRIPTORS: OnceLock<Mutex<HashMap<Curve, EndoDescriptor>>> = OnceLock::new();

/// `End(E)` by measuring, for each `l | f0`, the distance to the floor of the
/// `l`-volcano along non-backtracking walks.
pub fn compute_endo_conductor(curve: &Curve) -> Result<EndoDescriptor, EndoError> {
    let cache = DESCRIPTORS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(d) = cache.lock().expect("descriptor cache poisoned").get(curve) {
        return Ok(d.clone());
    }
    let t = curve.trace()?;
    let q = curve.field().q_u64().ok_or_else(|| EndoError::BoundExceeded("field too large".into()))?;
    if (t as i128) * (t as i128) >= 4 * q as i128 {
        return Err(EndoError::OrdinaryOnly);
    }
    let (d0, f0) = discriminant_frobenius_order(q, t)?;
    let mut levels = BTreeMap::new();
    let mut f = 1u64;
    for (l, d) in factorize(f0) {
        let up = d - floor_distance(curve, t, l, d)?;
        levels.insert(l, up);
        f *= l.pow(up);
    }
    let desc = EndoDescriptor { class: classify_with_trace(curve, t), trace: t, q, d0, f, f0, levels };
    cache.lock().expect("descriptor cache poisoned").insert(curve.clone(), desc.clone());
    Ok(desc)
}

/// Steps from `curve` to the floor of its `l`-volcano of depth `d > 0`.
///
/// One walk leaves along each rational kernel; a walk that starts downward
/// keeps going down, so the first walk to reach a vertex of degree one has
/// length `d - level`.
fn floor_distance(curve: &Curve, t: i64, l: u64, d: u32) -> Result<u32, EndoError> {
    let on_floor = |c: &Curve| -> Result<bool, EndoError> { Ok(cached_kernels(c, t, l)?.len() == 1) };
    if on_floor(curve)? {
        return Ok(0);
    }
    let mut walks = Walk::start(curve, t).extend(l)?;
    for len in 1..=d {
        for w in &walks {
            if on_floor(w.target())? {
                return Ok(len);
            }
        }
        let mut next = Vec::with_capacity(walks.len());
        for w in &walks {
            if let Some(n) = w.extend(l)?.into_iter().next() {
                next.push(n);
            }
        }
        walks = next;
    }
    Err(EndoError::BoundExceeded(format!("no floor within {d} steps of the {l}-volcano")))
}

/// Matrix of the `q`-power Frobenius on a basis of `E[m]`.
#[derive(Clone)]
pub struct FrobeniusMatrix {
    pub m: u64,
    pub basis: Arc<TorsionBasis>,
    /// Columns are the coordinates of `pi P` and `pi Q`, entries mod `m`.
    pub matrix: [[u64; 2]; 2],
}

pub fn frobenius_matrix(curve: &Curve, m: u64) -> Result<FrobeniusMatrix, EndoError> {
    if m == 0 || m > M_MAX {
        return Err(EndoError::BoundExceeded(format!("m = {m} outside 1..={M_MAX}")));
    }
    let t = curve.trace()?;
    let basis = cached_basis(curve, t, m)?;
    let matrix = if m == 1 { [[0, 0], [0, 0]] } else { basis.frobenius_matrix() };
    Ok(FrobeniusMatrix { m, basis, matrix })
}

pub(crate) fn mat_vec(a: &[[u64; 2]; 2], v: (u64, u64), n: u64) -> (u64, u64) {
    ((a[0][0] * v.0 + a[0][1] * v.1) % n, (a[1][0] * v.0 + a[1][1] * v.1) % n)
}

/// `x I + y A` mod `n`.
pub(crate) fn lin(x: u64, y: u64, a: &[[u64; 2]; 2], n: u64) -> [[u64; 2]; 2] {
    [[(x + y * a[0][0]) % n, y * a[0][1] % n], [y * a[1][0] % n, (x + y * a[1][1]) % n]]
}

/// The action of `pi` and `f gamma` on `E[l^e]`.
///
/// The basis lives in `E[l^(e + a)]` with `l^a || w`; points of `E[l^e]` are
/// `l^a (x P + y Q)`, written `(x, y)`.
pub struct LocalAction {
    pub l: u64,
    pub e: u32,
    pub n: u64,
    pub lift: u64,
    pub basis: Arc<TorsionBasis>,
    pub frob: [[u64; 2]; 2],
    pub f_gamma: [[u64; 2]; 2],
}

impl LocalAction {
    /// The point with coordinates `v` on `E[n]`.
    pub fn point(&self, v: (u64, u64)) -> Point {
        self.basis.combine(self.lift * v.0 % (self.n * self.lift), self.lift * v.1 % (self.n * self.lift))
    }

    /// Basis points of `E[n]`.
    pub fn generators(&self) -> (Point, Point) {
        (self.point((1, 0)), self.point((0, 1)))
    }

    /// Coordinates of a point of `E[n]` over the basis field.
    pub fn coords(&self, r: &Point) -> Option<(u64, u64)> {
        let (x, y) = self.basis.dlog(r)?;
        (x % self.lift == 0 && y % self.lift == 0).then(|| (x / self.lift % self.n, y / self.lift % self.n))
    }

    /// Matrix of `x + y f gamma`.
    pub fn element(&self, x: i64, y: i64) -> [[u64; 2]; 2] {
        let n = self.n as i64;
        lin(x.rem_euclid(n) as u64, y.rem_euclid(n) as u64, &self.f_gamma, self.n)
    }
}

type ActionKey = (Curve, u64, u32);
static ACTIONS: OnceLock<Mutex<HashMap<ActionKey, Arc<LocalAction>>>> = OnceLock::new();

pub fn local_action(curve: &Curve, desc: &EndoDescriptor, l: u64, e: u32) -> Result<Arc<LocalAction>, EndoError> {
    let key = (curve.clone(), l, e);
    let cache = ACTIONS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("action cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let n = l.pow(e);
    let w = desc.w();
    let a = valuation(w, l);
    let lift = l.pow(a);
    let big = n * lift;
    let basis = cached_basis(curve, desc.trace, big)?;
    let m = if big == 1 { [[0, 0], [0, 0]] } else { basis.frobenius_matrix() };
    let c = desc.c().rem_euclid(big as i64) as u64;
    let shifted = [[(m[0][0] + big - c) % big, m[0][1]], [m[1][0], (m[1][1] + big - c) % big]];
    if shifted.iter().flatten().any(|x| x % lift != 0) {
        return Err(EndoError::NotInEndomorphismRing);
    }
    let unit = mod_inverse((w / lift) % n.max(1), n.max(1));
    let mut f_gamma = [[0u64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            f_gamma[i][j] = if n == 1 { 0 } else { shifted[i][j] / lift % n * unit % n };
        }
    }
    let frob = [[m[0][0] % n.max(1), m[0][1] % n.max(1)], [m[1][0] % n.max(1), m[1][1] % n.max(1)]];
    let act = Arc::new(LocalAction { l, e, n, lift, basis, frob, f_gamma });
    Ok(cache.lock().expect("action cache poisoned").entry(key).or_insert(act).clone())
}

/// A map from the field of a point into the torsion field that agrees with
/// the canonical embedding on the base field.
struct Bridge {
    emb: Arc<Embedding>,
    twist: usize,
}

impl Bridge {
    fn new(curve: &Curve, basis: &TorsionBasis, src: &Arc<crate::finite_field::Field>) -> Result<Bridge, EndoError> {
        let dst = basis.emb.dst();
        let k = curve.field();
        if dst.r() % src.r() != 0 || src.r() % k.r() != 0 {
            return Err(EndoError::BoundExceeded("point field does not embed in the torsion field".into()));
        }
        let emb = Embedding::extend(src, dst.r() / src.r()).map_err(CurveError::from)?;
        let to_src = Embedding::extend(k, src.r() / k.r()).map_err(CurveError::from)?;
        let g = k.generator();
        let want = basis.emb.map(&g);
        let got = emb.map(&to_src.map(&g));
        let twist = (0..dst.r())
            .find(|&i| got.frobenius_pow(i) == want)
            .ok_or_else(|| EndoError::BoundExceeded("no compatible embedding".into()))?;
        Ok(Bridge { emb, twist })
    }

    fn push(&self, r: &Point) -> Point {
        match r {
            Point::Infinity => Point::Infinity,
            Point::Affine(x, y) => {
                Point::Affine(self.emb.map(x).frobenius_pow(self.twist), self.emb.map(y).frobenius_pow(self.twist))
            }
        }
    }

    fn pull(&self, r: &Point) -> Option<Point> {
        match r {
            Point::Infinity => Some(Point::Infinity),
            Point::Affine(x, y) => {
                let back = (self.emb.dst().r() - self.twist) % self.emb.dst().r();
                Some(Point::Affine(self.emb.project(&x.frobenius_pow(back))?, self.emb.project(&y.frobenius_pow(back))?))
            }
        }
    }
}

fn bridge_for(curve: &Curve, basis: &TorsionBasis, r: &Point) -> Result<Option<Bridge>, EndoError> {
    match r {
        Point::Affine(x, _) if x.field() != basis.emb.dst() => Ok(Some(Bridge::new(curve, basis, x.field())?)),
        _ => Ok(None),
    }
}

/// `((u + v pi) / w)(P)` for `P` of order dividing `m`.
///
/// `P` is lifted to `E[m w]`; the result does not depend on the lift exactly
/// when `u + v pi` kills `E[w]`, which is the membership test.
pub fn evaluate_order_element(curve: &Curve, elem: (i64, i64, u64), p: &Point, m: u64) -> Result<Point, EndoError> {
    let (u, v, w) = elem;
    if w == 0 || m == 0 {
        return Err(EndoError::NotInEndomorphismRing);
    }
    let t = curve.trace()?;
    let big = m * w;
    let basis = cached_basis(curve, t, big)?;
    let mat = if big == 1 { [[0, 0], [0, 0]] } else { basis.frobenius_matrix() };
    let bi = big as i64;
    let op = lin(u.rem_euclid(bi) as u64, v.rem_euclid(bi) as u64, &mat, big);
    if op.iter().flatten().any(|x| x % w != 0) {
        return Err(EndoError::NotInEndomorphismRing);
    }
    let bridge = bridge_for(curve, &basis, p)?;
    let pk = bridge.as_ref().map_or_else(|| p.clone(), |b| b.push(p));
    let (x, y) = basis.dlog(&pk).ok_or_else(|| EndoError::BoundExceeded("point is not in E[m]".into()))?;
    if x % w != 0 || y % w != 0 {
        return Err(EndoError::BoundExceeded("point is not in E[m]".into()));
    }
    let img = mat_vec(&op, (x / w, y / w), big);
    let out = basis.combine(img.0, img.1);
    match bridge {
        // endomorphisms are defined over k, so the image stays in the field of P
        Some(b) => b.pull(&out).ok_or(EndoError::NotInEndomorphismRing),
        None => Ok(out),
    }
}

/// Subgroup of `(Z/n)^2` generated by `gens`.
pub(crate) fn span(gens: &[(u64, u64)], n: u64) -> Vec<(u64, u64)> {
    let mut set = vec![(0u64, 0u64)];
    for &g in gens {
        let mut new = Vec::new();
        for &s in &set {
            let mut cur = s;
            for _ in 0..n {
                new.push(cur);
                cur = ((cur.0 + g.0) % n, (cur.1 + g.1) % n);
            }
        }
        new.sort_unstable();
        new.dedup();
        set = new;
    }
    set
}

/// At most two generators of a subgroup given as a full element list.
pub(crate) fn generators_of(sub: &[(u64, u64)], n: u64) -> Vec<(u64, u64)> {
    let mut gens = Vec::new();
    let mut cur = span(&gens, n);
    // largest-order elements first keeps the list short
    let mut elems = sub.to_vec();
    elems.sort_by_key(|&(x, y)| std::cmp::Reverse(n / gcd3(x, y, n)));
    for v in elems {
        if cur.len() == sub.len() {
            break;
        }
        if cur.binary_search(&v).is_err() {
            gens.push(v);
            cur = span(&gens, n);
        }
    }
    gens
}

pub(crate) fn gcd3(x: u64, y: u64, n: u64) -> u64 {
    use num_integer::Integer;
    x.gcd(&y).gcd(&n)
}

/// Pairs `(x, y)` mod `n` whose element `x + y A` kills every vector of `sub`.
pub(crate) fn annihilator(sub: &[(u64, u64)], a: &[[u64; 2]; 2], n: u64) -> Vec<(u64, u64)> {
    let gens = generators_of(sub, n);
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let op = lin(x, y, a, n);
            if gens.iter().all(|&g| mat_vec(&op, g, n) == (0, 0)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// Coordinates of the points of `E[n]` killed by `pi`-module elements in `ideal`.
pub(crate) fn common_kernel(ideal: &[(u64, u64)], a: &[[u64; 2]; 2], n: u64) -> Vec<(u64, u64)> {
    let gens = generators_of(ideal, n);
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if gens.iter().all(|&(u, v)| mat_vec(&lin(u, v, a, n), (x, y), n) == (0, 0)) {
                out.push((x, y));
            }
        }
    }
    out
}

/// `[End(E) : I(<K>)]` for `K` of order dividing `m`.
pub fn annihilator_index(curve: &Curve, kernel_gen: &Point, m: u64) -> Result<u64, EndoError> {
    if m == 0 || m > M_MAX {
        return Err(EndoError::BoundExceeded(format!("m = {m} outside 1..={M_MAX}")));
    }
    let desc = compute_endo_conductor(curve)?;
    let mut index = 1u64;
    for (l, e) in factorize(m) {
        let act = local_action(curve, &desc, l, e)?;
        let n = act.n;
        let pk = match bridge_for(curve, &act.basis, kernel_gen)? {
            Some(b) => b.push(kernel_gen),
            None => kernel_gen.clone(),
        };
        let part = act.basis.curve.scalar_mul((m / n) as i64, &pk);
        let v = act.coords(&part).ok_or_else(|| EndoError::BoundExceeded("point is not in E[m]".into()))?;
        let sub = span(&[v], n);
        let count = annihilator(&sub, &act.f_gamma, n).len() as u64;
        index *= n * n / count;
    }
    Ok(index)
}
