//! Alternating maximization of `‖(Φ ⊗ id_k)(xy*)‖₁` and friends.
//!
//! Every step is a coordinate ascent on `Re⟨W, (Φ ⊗ id_k)(xy*)⟩`, so the
//! objective is non-decreasing.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::LinearMapRep;
use crate::error::Result;
use crate::linalg::{
    self, hermitian_eigen, hermitian_part, matricize, polar_unitary, rng_substream, svd, trace_norm,
    ComplexMatrix, ComplexVector, C64,
};

/// `Φ ⊗ id_k` evaluated on rank-one inputs without forming its Choi matrix.
pub(crate) struct Lifted<'a> {
    map: &'a LinearMapRep,
    k: usize,
}

impl<'a> Lifted<'a> {
    pub fn new(map: &'a LinearMapRep, k: usize) -> Self {
        Self { map, k }
    }

    pub fn in_dim(&self) -> usize {
        self.map.in_dim() * self.k
    }

    /// `(Φ ⊗ id_k)(xy*)`; entry `[(i,c),(j,d)] = Σ_ab x[a,c] ȳ[b,d] J[(i,a),(j,b)]`.
    pub fn image(&self, x: &ComplexVector, y: &ComplexVector) -> ComplexMatrix {
        let (n, m, k) = (self.map.in_dim(), self.map.out_dim(), self.k);
        let ux = matricize(x, n, k);
        let vy = matricize(y, n, k).map(|z| z.conj());
        let uxt = ux.transpose();
        let j = self.map.choi();
        let mut out = ComplexMatrix::zeros(m * k, m * k);
        for i in 0..m {
            for jj in 0..m {
                let block = j.view((i * n, jj * n), (n, n));
                let t = &uxt * block * &vy;
                out.view_mut((i * k, jj * k), (k, k)).copy_from(&t);
            }
        }
        out
    }

    /// `(Φ ⊗ id_k)*(W) = Σ_ij conj(J_ij) ⊗ W_ij`.
    pub fn adjoint_image(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let (n, m, k) = (self.map.in_dim(), self.map.out_dim(), self.k);
        let j = self.map.choi();
        let mut out = ComplexMatrix::zeros(n * k, n * k);
        for i in 0..m {
            for jj in 0..m {
                let wij = w.view((i * k, jj * k), (k, k));
                for a in 0..n {
                    for b in 0..n {
                        let coef = j[(i * n + a, jj * n + b)].conj();
                        if coef == C64::new(0.0, 0.0) {
                            continue;
                        }
                        let mut dst = out.view_mut((a * k, b * k), (k, k));
                        dst += wij * coef;
                    }
                }
            }
        }
        out
    }
}

/// Outcome of one see-saw run.
#[derive(Debug, Clone)]
pub struct Run {
    pub value: f64,
    pub u: ComplexVector,
    pub v: ComplexVector,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Schedule {
    pub max_iter: usize,
    pub tol: f64,
}

/// Bilinear see-saw from `(x, y)`; records the objective after each step into `history`.
pub(crate) fn bilinear(
    l: &Lifted,
    x0: ComplexVector,
    y0: ComplexVector,
    sched: Schedule,
    mut history: Option<&mut Vec<f64>>,
) -> Result<Run> {
    let (mut x, mut y) = (x0, y0);
    let mut img = l.image(&x, &y);
    let mut val = trace_norm(&img)?;
    if let Some(h) = history.as_deref_mut() {
        h.push(val);
    }
    let mut it = 0;
    while it < sched.max_iter {
        it += 1;
        let w = polar_unitary(&img)?;
        let s = svd(&l.adjoint_image(&w))?;
        let nx = s.left.column(0).into_owned();
        let ny = s.right.column(0).into_owned();
        let nimg = l.image(&nx, &ny);
        let nval = trace_norm(&nimg)?;
        let gain = nval - val;
        if gain >= 0.0 {
            (x, y, img, val) = (nx, ny, nimg, nval);
        }
        if let Some(h) = history.as_deref_mut() {
            h.push(val);
        }
        if gain < sched.tol {
            break;
        }
    }
    Ok(Run {
        value: val,
        u: x,
        v: y,
        iterations: it,
    })
}

/// See-saw over Hermitian rank-one inputs `±xx*`.
pub(crate) fn hermitian(
    l: &Lifted,
    x0: ComplexVector,
    sched: Schedule,
    mut history: Option<&mut Vec<f64>>,
) -> Result<Run> {
    let mut x = x0;
    let mut img = l.image(&x, &x);
    let mut val = trace_norm(&img)?;
    if let Some(h) = history.as_deref_mut() {
        h.push(val);
    }
    let mut it = 0;
    while it < sched.max_iter {
        it += 1;
        let w = polar_unitary(&img)?;
        let z = hermitian_part(&l.adjoint_image(&w));
        let (vals, vecs) = hermitian_eigen(&z)?;
        let last = vals.len() - 1;
        let idx = if vals[0].abs() > vals[last].abs() { 0 } else { last };
        let nx = vecs.column(idx).into_owned();
        let nimg = l.image(&nx, &nx);
        let nval = trace_norm(&nimg)?;
        let gain = nval - val;
        if gain >= 0.0 {
            (x, img, val) = (nx, nimg, nval);
        }
        if let Some(h) = history.as_deref_mut() {
            h.push(val);
        }
        if gain < sched.tol {
            break;
        }
    }
    Ok(Run {
        value: val,
        u: x.clone(),
        v: x,
        iterations: it,
    })
}

/// Induced operator norm see-saw over unitaries: `W ↦ top singular pair of Ψ(W) ↦ polar(Ψ*(xy*))`.
pub(crate) fn operator(psi: &LinearMapRep, w0: ComplexMatrix, sched: Schedule) -> Result<Run> {
    let mut w = w0;
    let top = |w: &ComplexMatrix| -> Result<(f64, ComplexVector, ComplexVector)> {
        let s = svd(&psi.apply(w)?)?;
        Ok((
            s.singular_values[0],
            s.left.column(0).into_owned(),
            s.right.column(0).into_owned(),
        ))
    };
    let (mut val, mut x, mut y) = top(&w)?;
    let mut it = 0;
    while it < sched.max_iter {
        it += 1;
        let nw = polar_unitary(&psi.apply_adjoint(&(&x * y.adjoint()))?)?;
        let (nval, nx, ny) = top(&nw)?;
        let gain = nval - val;
        if gain >= 0.0 {
            (w, val, x, y) = (nw, nval, nx, ny);
        }
        if gain < sched.tol {
            break;
        }
    }
    let _ = w;
    Ok(Run {
        value: val,
        u: x,
        v: y,
        iterations: it,
    })
}

/// Runs `restarts` independent starts in parallel, restart `i` drawing from
/// substream `i` of `seed`. Ties go to the lowest index.
pub(crate) fn best_of<F>(restarts: usize, seed: u64, f: F) -> Result<Run>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Result<Run> + Sync,
{
    let runs: Vec<Result<Run>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_substream(seed, i as u64);
            f(&mut rng)
        })
        .collect();
    let mut best: Option<Run> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub(crate) fn random_start<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexVector {
    linalg::random_unit_vector(d, rng)
}
