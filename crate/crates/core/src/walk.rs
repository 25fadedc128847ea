//! Non-backtracking walks along rational prime-degree isogenies.
//!
//! A walk remembers, for every prime it has used, the image of the `l`-torsion
//! of the curve where that prime first appeared. The next `l`-step backtracks
//! exactly when its kernel is that image.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::elliptic_curve::{Curve, CurveError, Point};
use crate::extension::Embedding;
use crate::isogeny::{is_multiplication, rational_kernels, Isogeny, IsogenyError};
use crate::poly::Poly;
use crate::torsion::cached_basis;

type KernelKey = (Curve, i64, u64);
static KERNELS: OnceLock<Mutex<HashMap<KernelKey, Arc<Vec<Poly>>>>> = OnceLock::new();

/// [`rational_kernels`] memoised per curve model.
pub fn cached_kernels(curve: &Curve, t: i64, l: u64) -> Result<Arc<Vec<Poly>>, IsogenyError> {
    let key = (curve.clone(), t, l);
    let cache = KERNELS.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().expect("kernel cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let ks = Arc::new(rational_kernels(curve, t, l)?);
    Ok(cache.lock().expect("kernel cache poisoned").entry(key).or_insert(ks).clone())
}

#[derive(Debug, Clone)]
pub struct Walk {
    pub isogeny: Isogeny,
    /// Prime degrees of the steps, in order.
    pub chain: Vec<u64>,
    trace: i64,
    images: Vec<(u64, Point, Point)>,
    /// Primes whose torsion is too large to track; only an immediately
    /// repeated step can be checked for these.
    untracked: Vec<u64>,
    last: Option<Isogeny>,
}

impl Walk {
    pub fn start(curve: &Curve, trace: i64) -> Walk {
        Walk { isogeny: Isogeny::identity(curve), chain: vec![], trace, images: vec![], untracked: vec![], last: None }
    }

    pub fn target(&self) -> &Curve {
        self.isogeny.target()
    }

    pub fn degree(&self) -> u64 {
        self.chain.iter().product()
    }

    /// Whether the `l`-step with kernel `k` would undo an earlier `l`-step.
    fn backtracks(&self, l: u64, k: &Poly) -> Result<bool, IsogenyError> {
        if self.untracked.contains(&l) {
            return match (&self.last, self.chain.last()) {
                (Some(prev), Some(&m)) if m == l => {
                    let step = Isogeny::from_kernel_poly(self.target(), k);
                    is_multiplication(&Isogeny::compose(&step, prev)?, l, self.trace)
                }
                _ => Err(CurveError::BoundExceeded(format!("cannot track {l}-steps separated by other primes")).into()),
            };
        }
        let Some((_, r1, r2)) = self.images.iter().find(|(m, _, _)| *m == l) else {
            return Ok(false);
        };
        Ok([r1, r2].iter().all(|r| match r {
            Point::Infinity => true,
            Point::Affine(x, _) => {
                let emb = Embedding::extend(k.field(), x.field().r() / k.field().r()).expect("subfield embedding");
                emb.map_poly(k).eval(x).is_zero()
            }
        }))
    }

    /// All non-backtracking continuations by one rational `l`-isogeny.
    pub fn extend(&self, l: u64) -> Result<Vec<Walk>, IsogenyError> {
        let cur = self.target().clone();
        let kernels = cached_kernels(&cur, self.trace, l)?;
        let mut images = self.images.clone();
        let mut untracked = self.untracked.clone();
        if !images.iter().any(|(m, _, _)| *m == l) && !untracked.contains(&l) {
            match cached_basis(&cur, self.trace, l) {
                Ok(b) => images.push((l, b.p.clone(), b.q.clone())),
                Err(CurveError::BoundExceeded(_)) => untracked.push(l),
                Err(e) => return Err(e.into()),
            }
        }
        let mut out = Vec::new();
        for k in kernels.iter() {
            if self.backtracks(l, k)? {
                continue;
            }
            let step = Isogeny::from_kernel_poly(&cur, k);
            let mut imgs = Vec::with_capacity(images.len());
            for (m, r1, r2) in &images {
                imgs.push((*m, step.evaluate(r1)?, step.evaluate(r2)?));
            }
            let mut chain = self.chain.clone();
            chain.push(l);
            out.push(Walk {
                isogeny: Isogeny::compose(&step, &self.isogeny)?,
                chain,
                trace: self.trace,
                images: imgs,
                untracked: untracked.clone(),
                last: Some(step),
            });
        }
        Ok(out)
    }

    /// All non-backtracking walks following the given prime degrees.
    pub fn along(curve: &Curve, trace: i64, chain: &[u64]) -> Result<Vec<Walk>, IsogenyError> {
        let mut walks = vec![Walk::start(curve, trace)];
        for &l in chain {
            let mut next = Vec::new();
            for w in &walks {
                next.extend(w.extend(l)?);
            }
            walks = next;
        }
        Ok(walks)
    }
}

/// Every non-backtracking walk from `curve` of degree `2..=max_degree`
/// whose prime degrees are drawn from `primes` in non-increasing order.
///
/// Isogenies of coprime degrees commute, so fixing the order of the primes
/// lists each cyclic-per-prime kernel once.
pub fn walks_from(curve: &Curve, trace: i64, primes: &[u64], max_degree: u64) -> Result<Vec<Walk>, IsogenyError> {
    let mut ps = primes.to_vec();
    ps.sort_unstable_by(|a, b| b.cmp(a));
    ps.dedup();
    let mut out = Vec::new();
    let mut stack = vec![Walk::start(curve, trace)];
    while let Some(w) = stack.pop() {
        let last = w.chain.last().copied().unwrap_or(u64::MAX);
        for &l in ps.iter().filter(|&&l| l <= last && w.degree() * l <= max_degree) {
            for next in w.extend(l)? {
                out.push(next.clone());
                stack.push(next);
            }
        }
    }
    Ok(out)
}
