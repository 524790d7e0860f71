//! Brute-force check of the analytic minimum.
//!
//! `Q` and `B` depend on Eve's operator only through its 2×2 block on the
//! span of the Schmidt vectors, and that block ranges over all real
//! contractions. Writing `X = R(u)·diag(s₁, s₂)·R(v)` with `s₁ ∈ [0, 1]`,
//! `s₂ ∈ [−1, 1]` covers every contraction, sign of the determinant included.
//!
//! The search has two stages:
//!
//! 1. a uniform grid over `(u, v, s₁, s₂)`, accepting points whose `Tr[B̂X]`
//!    lies within a slack proportional to the local grid step;
//! 2. pattern search over `(u, v)` from the best cells. At fixed `(u, v)`
//!    both traces are linear in `(s₁, s₂)`, so the inner minimum is read off
//!    the vertices of the clipped feasible polygon.
//!
//! Stage 2 only visits exactly feasible points, so the returned value never
//! undercuts the true minimum.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::eve_bound::{b_max, SymMat2};
use crate::math::{cos, fabs, sin};

/// Number of grid cells refined in stage 2.
pub const REFINED_SEEDS: usize = 10;

/// Multiplier on the grid step used as constraint slack in stage 1.
pub const SLACK_FACTOR: f64 = 10.0;

/// `X = R(u)·diag(s₁, s₂)·R(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Contraction2 {
    pub u: f64,
    pub v: f64,
    pub s1: f64,
    pub s2: f64,
}

impl Contraction2 {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let (cu, su) = (cos(self.u), sin(self.u));
        let (cv, sv) = (cos(self.v), sin(self.v));
        // R(u) diag(s1, s2) R(v), R(t) = [[cos t, −sin t], [sin t, cos t]]
        let l = [[cu * self.s1, -su * self.s2], [su * self.s1, cu * self.s2]];
        [
            [l[0][0] * cv + l[0][1] * sv, -l[0][0] * sv + l[0][1] * cv],
            [l[1][0] * cv + l[1][1] * sv, -l[1][0] * sv + l[1][1] * cv],
        ]
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        fabs(self.s1).max(fabs(self.s2))
    }
}

/// Outcome of an oracle run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OracleEstimate {
    /// Best exactly feasible `|Tr[ÂX]|`.
    pub q_min: f64,
    /// Stage-1 minimum over slack-feasible grid points.
    pub coarse_q_min: f64,
    /// Largest stage-1 slack used on `Tr[B̂X]`.
    pub slack: f64,
    pub argmin: Contraction2,
}

/// `(Tr[M R(u) E₁₁ R(v)], Tr[M R(u) E₂₂ R(v)])`, the coefficients of `s₁`, `s₂`.
fn coefficients(m: &SymMat2, u: f64, v: f64) -> (f64, f64) {
    let x1 = Contraction2 { u, v, s1: 1.0, s2: 0.0 }.matrix();
    let x2 = Contraction2 { u, v, s1: 0.0, s2: 1.0 }.matrix();
    (m.trace_with(&x1), m.trace_with(&x2))
}

/// `min |a·s|` over `s ∈ [0,1]×[−1,1]` with `lo ≤ b·s ≤ hi`.
fn inner_min(a: (f64, f64), b: (f64, f64), lo: f64, hi: f64) -> Option<(f64, [f64; 2])> {
    let mut poly: Vec<[f64; 2]> = alloc::vec![[0.0, -1.0], [1.0, -1.0], [1.0, 1.0], [0.0, 1.0]];
    let tol = 1e-10;
    poly = clip(&poly, |p| b.0 * p[0] + b.1 * p[1] - (lo - tol));
    poly = clip(&poly, |p| (hi + tol) - (b.0 * p[0] + b.1 * p[1]));
    if poly.is_empty() {
        return None;
    }
    let vals: Vec<f64> = poly.iter().map(|p| a.0 * p[0] + a.1 * p[1]).collect();
    let (mut lo_i, mut hi_i) = (0, 0);
    for (i, &x) in vals.iter().enumerate() {
        if x < vals[lo_i] {
            lo_i = i;
        }
        if x > vals[hi_i] {
            hi_i = i;
        }
    }
    if vals[lo_i] <= 0.0 && vals[hi_i] >= 0.0 {
        // the zero level crosses the polygon; interpolate on the segment between extremes
        let (p, q) = (poly[lo_i], poly[hi_i]);
        let span = vals[hi_i] - vals[lo_i];
        let w = if span > 0.0 { -vals[lo_i] / span } else { 0.0 };
        return Some((0.0, [p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]));
    }
    let i = if fabs(vals[lo_i]) < fabs(vals[hi_i]) {
        lo_i
    } else {
        hi_i
    };
    Some((fabs(vals[i]), poly[i]))
}

/// Sutherland–Hodgman against the half plane `f ≥ 0`.
fn clip(poly: &[[f64; 2]], f: impl Fn(&[f64; 2]) -> f64) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp >= 0.0) != (fq >= 0.0) {
            let w = fp / (fp - fq);
            out.push([p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]);
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Cell {
    q: f64,
    index: usize,
}

/// Stage 1 at one `(u, v)` grid point.
fn coarse_cell(a: &SymMat2, b: &SymMat2, u: f64, v: f64, lo: f64, hi: f64, res: usize) -> (f64, f64) {
    let (a1, a2) = coefficients(a, u, v);
    let (b1, b2) = coefficients(b, u, v);
    let ds1 = 1.0 / (res - 1) as f64;
    let ds2 = 2.0 / (res - 1) as f64;
    let slack = SLACK_FACTOR * (fabs(b1) * ds1 + fabs(b2) * ds2);
    let mut best = f64::INFINITY;
    for i in 0..res {
        let s1 = i as f64 * ds1;
        for k in 0..res {
            let s2 = -1.0 + k as f64 * ds2;
            let bv = b1 * s1 + b2 * s2;
            if bv >= lo - slack && bv <= hi + slack {
                best = best.min(fabs(a1 * s1 + a2 * s2));
            }
        }
    }
    (best, slack)
}

fn coarse_grid(a: &SymMat2, b: &SymMat2, lo: f64, hi: f64, res: usize) -> Vec<(Cell, f64)> {
    let step = 2.0 * PI / res as f64;
    let eval = |index: usize| {
        let (iu, iv) = (index / res, index % res);
        let (q, slack) = coarse_cell(a, b, iu as f64 * step, iv as f64 * step, lo, hi, res);
        (Cell { q, index }, slack)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..res * res).into_par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..res * res).map(eval).collect()
    }
}

/// Inner solution at `(u, v)`, or how far `[lo, hi]` lies from the range of
/// `Tr[B̂X]` reachable there.
#[derive(Clone, Copy)]
enum Probe {
    Feasible(f64, Contraction2),
    Gap(f64),
}

impl Probe {
    fn better_than(&self, o: &Probe) -> bool {
        match (self, o) {
            (Probe::Feasible(q, _), Probe::Feasible(p, _)) => q < p,
            (Probe::Feasible(..), Probe::Gap(_)) => true,
            (Probe::Gap(_), Probe::Feasible(..)) => false,
            (Probe::Gap(g), Probe::Gap(h)) => g < h,
        }
    }
}

fn probe(a: &SymMat2, b: &SymMat2, u: f64, v: f64, lo: f64, hi: f64) -> Probe {
    let bc = coefficients(b, u, v);
    if let Some((q, s)) = inner_min(coefficients(a, u, v), bc, lo, hi) {
        return Probe::Feasible(
            q,
            Contraction2 {
                u,
                v,
                s1: s[0],
                s2: s[1],
            },
        );
    }
    let top = bc.0.max(0.0) + fabs(bc.1);
    let bottom = bc.0.min(0.0) - fabs(bc.1);
    Probe::Gap((lo - top).max(bottom - hi).max(0.0))
}

/// Compass search over `(u, v)` with the inner problem solved exactly; while
/// no feasible point is known it first closes the constraint gap.
fn refine(a: &SymMat2, b: &SymMat2, u0: f64, v0: f64, step0: f64, lo: f64, hi: f64) -> Option<(f64, Contraction2)> {
    let mut best = probe(a, b, u0, v0, lo, hi);
    let (mut u, mut v) = (u0, v0);
    let mut step = step0;
    let mut evals = 0;
    while step > 1e-11 && evals < 4000 {
        if matches!(best, Probe::Feasible(q, _) if q == 0.0) {
            break;
        }
        let mut moved = false;
        for (du, dv) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (-1.0, -1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
        ] {
            let (nu, nv) = (u + du * step, v + dv * step);
            evals += 1;
            let c = probe(a, b, nu, nv, lo, hi);
            if c.better_than(&best) {
                best = c;
                u = nu;
                v = nv;
                moved = true;
                break;
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    match best {
        Probe::Feasible(q, x) => Some((q, x)),
        Probe::Gap(_) => None,
    }
}

/// Minimum `|Tr[ÂX]|` over contractions with `lo ≤ Tr[B̂X] ≤ hi`.
pub fn oracle_min_q_interval(a: &SymMat2, b: &SymMat2, lo: f64, hi: f64, resolution: usize) -> Result<OracleEstimate> {
    let res = resolution.max(4);
    let mut cells = coarse_grid(a, b, lo, hi, res);
    let slack = cells.iter().map(|c| c.1).fold(0.0, f64::max);
    cells.retain(|c| c.0.q.is_finite());
    if cells.is_empty() {
        return Err(Error::OracleInfeasible { slack });
    }
    cells.sort_by(|x, y| x.0.q.total_cmp(&y.0.q).then(x.0.index.cmp(&y.0.index)));
    let coarse_q_min = cells[0].0.q;

    let step = 2.0 * PI / res as f64;
    let mut best: Option<(f64, Contraction2)> = None;
    for (cell, _) in cells.iter().take(REFINED_SEEDS) {
        let (iu, iv) = (cell.index / res, cell.index % res);
        if let Some(c) = refine(a, b, iu as f64 * step, iv as f64 * step, step, lo, hi) {
            if best.is_none_or(|(q, _)| c.0 < q) {
                best = Some(c);
            }
        }
    }
    let (q_min, argmin) = best.ok_or(Error::OracleInfeasible { slack })?;
    Ok(OracleEstimate {
        q_min,
        coarse_q_min,
        slack,
        argmin,
    })
}

/// Minimum `|Tr[ÂX]|` over contractions with `Tr[B̂X] = target_b`.
pub fn oracle_min_q(a: &SymMat2, b: &SymMat2, target_b: f64, resolution: usize) -> Result<OracleEstimate> {
    if let Ok(bmax) = b_max(b) {
        if fabs(target_b) > bmax + 1e-9 {
            return Err(Error::Unreachable {
                target: target_b,
                b_max: bmax,
            });
        }
    }
    oracle_min_q_interval(a, b, target_b, target_b, resolution)
}

/// Same search under the loss-slackened constraint `|T·Tr[B̂X] − cos α'| ≤ 1 − T`.
pub fn oracle_min_q_lossy(
    a: &SymMat2,
    b: &SymMat2,
    alpha_prime: f64,
    transmission: f64,
    resolution: usize,
) -> Result<OracleEstimate> {
    crate::error::check_range("T", transmission, 0.0, 1.0, "0 <= T <= 1")?;
    if transmission == 0.0 {
        return Ok(OracleEstimate {
            q_min: 0.0,
            coarse_q_min: 0.0,
            slack: 0.0,
            argmin: Contraction2 {
                u: 0.0,
                v: 0.0,
                s1: 0.0,
                s2: 0.0,
            },
        });
    }
    let ca = cos(alpha_prime);
    let lo = (ca - (1.0 - transmission)) / transmission;
    let hi = (ca + (1.0 - transmission)) / transmission;
    oracle_min_q_interval(a, b, lo, hi, resolution)
}
