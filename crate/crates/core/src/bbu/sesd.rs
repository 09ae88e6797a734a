//! Schnorr-Euchner sphere decoding over a finite real alphabet.
//!
//! Depth-first search from the last coordinate of an upper-triangular `R`.
//! Children at each layer are visited in order of increasing distance from the
//! layer's unconstrained center (zig-zag over the sorted levels), so once a
//! child's partial cost reaches the incumbent the remaining siblings can be
//! skipped. The incumbent starts at the best of the Babai point and any
//! caller-provided candidates.

use nalgebra::DVector;

use super::ils::IlsProblem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SesdOptions {
    /// Stop after this many visited nodes and return the incumbent.
    /// `None` runs to completion, which certifies global optimality.
    pub max_nodes: Option<u64>,
}

impl SesdOptions {
    pub fn exact() -> Self {
        SesdOptions { max_nodes: None }
    }

    pub fn budgeted(max_nodes: u64) -> Self {
        SesdOptions { max_nodes: Some(max_nodes) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SesdSolution {
    pub point: Vec<f64>,
    /// `‖e − R x‖²` at `point`.
    pub objective: f64,
    pub nodes: u64,
    /// `false` when the node budget stopped the search early.
    pub exact: bool,
}

struct Decoder<'a> {
    n: usize,
    /// Row-major copy of `R`.
    r: Vec<f64>,
    diag_sq: Vec<f64>,
    e: &'a [f64],
    levels: &'a [f64],
}

impl Decoder<'_> {
    fn center(&self, k: usize, x: &[f64]) -> f64 {
        let row = &self.r[k * self.n..(k + 1) * self.n];
        let mut s = self.e[k];
        for j in (k + 1)..self.n {
            s -= row[j] * x[j];
        }
        s / row[k]
    }

    fn nearest(&self, c: f64) -> f64 {
        let hi = self.levels.partition_point(|&l| l < c);
        match (hi.checked_sub(1), self.levels.get(hi)) {
            (Some(lo), Some(&h)) => {
                let l = self.levels[lo];
                if c - l <= h - c { l } else { h }
            }
            (Some(lo), None) => self.levels[lo],
            (None, Some(&h)) => h,
            (None, None) => unreachable!("alphabet is non-empty"),
        }
    }

    fn residual(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.n {
            let row = &self.r[k * self.n..(k + 1) * self.n];
            let mut s = self.e[k];
            for j in k..self.n {
                s -= row[j] * x[j];
            }
            acc += s * s;
        }
        acc
    }

    /// Successive rounding from the last layer.
    fn babai(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for k in (0..self.n).rev() {
            x[k] = self.nearest(self.center(k, &x));
        }
        x
    }

    fn search(&self, mut best_x: Vec<f64>, mut best: f64, max_nodes: Option<u64>) -> SesdSolution {
        let n = self.n;
        let nl = self.levels.len() as isize;
        let mut x = vec![0.0; n];
        // dist[k]: cost of layers k..n; dist[n] = 0
        let mut dist = vec![0.0; n + 1];
        let mut center = vec![0.0; n];
        let mut lo = vec![0isize; n];
        let mut hi = vec![0isize; n];
        let mut nodes = 0u64;
        let mut exact = true;

        let init = |k: usize, x: &[f64], center: &mut [f64], lo: &mut [isize], hi: &mut [isize]| {
            let c = self.center(k, x);
            center[k] = c;
            let h = self.levels.partition_point(|&l| l < c) as isize;
            hi[k] = h;
            lo[k] = h - 1;
        };

        let mut k = n - 1;
        init(k, &x, &mut center, &mut lo, &mut hi);
        'outer: loop {
            let c = center[k];
            let pick_lo = match (lo[k] >= 0, hi[k] < nl) {
                (false, false) => None,
                (true, false) => Some(true),
                (false, true) => Some(false),
                (true, true) => {
                    Some(c - self.levels[lo[k] as usize] <= self.levels[hi[k] as usize] - c)
                }
            };
            let value = match pick_lo {
                None => {
                    k += 1;
                    if k == n {
                        break 'outer;
                    }
                    continue;
                }
                Some(true) => {
                    let v = self.levels[lo[k] as usize];
                    lo[k] -= 1;
                    v
                }
                Some(false) => {
                    let v = self.levels[hi[k] as usize];
                    hi[k] += 1;
                    v
                }
            };
            let d = dist[k + 1] + self.diag_sq[k] * (value - c) * (value - c);
            if d >= best {
                // siblings are visited in non-decreasing cost order
                k += 1;
                if k == n {
                    break 'outer;
                }
                continue;
            }
            if let Some(cap) = max_nodes {
                if nodes >= cap {
                    exact = false;
                    break 'outer;
                }
            }
            nodes += 1;
            x[k] = value;
            dist[k] = d;
            if k == 0 {
                best = d;
                best_x.copy_from_slice(&x);
            } else {
                k -= 1;
                init(k, &x, &mut center, &mut lo, &mut hi);
            }
        }
        let objective = self.residual(&best_x);
        SesdSolution { point: best_x, objective, nodes, exact }
    }
}

/// Solves `min ‖e − R x‖²` over `x ∈ levels^n` for upper-triangular `R`.
///
/// `candidates` are extra feasible points used to tighten the initial radius;
/// entries are snapped to the nearest level.
pub fn solve_column(
    r: &nalgebra::DMatrix<f64>,
    e: &DVector<f64>,
    levels: &[f64],
    options: SesdOptions,
    candidates: &[Vec<f64>],
) -> Result<SesdSolution> {
    if levels.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let n = r.nrows();
    if r.ncols() != n || e.len() != n || n == 0 {
        return Err(Error::Dimension(format!(
            "R is {}x{}, target has length {}",
            r.nrows(),
            r.ncols(),
            e.len()
        )));
    }
    if (0..n).any(|k| !(r[(k, k)] > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut row_major = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            row_major[i * n + j] = r[(i, j)];
        }
    }
    let dec = Decoder {
        n,
        diag_sq: (0..n).map(|k| r[(k, k)] * r[(k, k)]).collect(),
        r: row_major,
        e: e.as_slice(),
        levels: &sorted,
    };

    let mut best_x = dec.babai();
    let mut best = dec.residual(&best_x);
    for cand in candidates {
        if cand.len() != n {
            return Err(Error::Dimension(format!("candidate has length {}, expected {n}", cand.len())));
        }
        let snapped: Vec<f64> = cand.iter().map(|&v| dec.nearest(v)).collect();
        let cost = dec.residual(&snapped);
        if cost < best {
            best = cost;
            best_x = snapped;
        }
    }
    Ok(dec.search(best_x, best, options.max_nodes))
}

/// Solves every column problem of `prob` over `levels`.
pub fn sesd_solve(prob: &IlsProblem, levels: &[f64], options: SesdOptions) -> Result<Vec<SesdSolution>> {
    prob.targets.iter().map(|e| solve_column(&prob.r, e, levels, options, &[])).collect()
}
