//! Translation of a complex Hermitian problem into a real symmetric one.
//!
//! A `d`-dimensional Hermitian block becomes a `2d` real block through
//! `X ↦ [[Re X, −Im X], [Im X, Re X]]`; coefficients are embedded the same way
//! and halved, so `⟨Ã, X̃⟩ = Re tr(A X)` and reported values are unchanged.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{BlockKind, Functional, SdpProblem, Sense};
use crate::error::Result;

/// Where an original block lives in the compiled problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Psd(usize),
    Lp(usize),
    Free(usize),
}

/// One compiled equality row. PSD entries are upper-triangular `(i ≤ j)`
/// entries of a symmetric matrix.
#[derive(Clone, Debug, Default)]
pub struct Row {
    pub psd: Vec<(usize, Vec<(usize, usize, f64)>)>,
    pub lp: Vec<(usize, f64)>,
    pub free: Vec<(usize, f64)>,
}

impl Row {
    pub fn norm_squared(&self) -> f64 {
        let mut acc = 0.0;
        for (_, ent) in &self.psd {
            for &(i, j, v) in ent {
                acc += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        acc += self.lp.iter().map(|(_, v)| v * v).sum::<f64>();
        acc += self.free.iter().map(|(_, v)| v * v).sum::<f64>();
        acc
    }

    fn scale(&mut self, s: f64) {
        for (_, ent) in &mut self.psd {
            for e in ent.iter_mut() {
                e.2 *= s;
            }
        }
        for e in &mut self.lp {
            e.1 *= s;
        }
        for e in &mut self.free {
            e.1 *= s;
        }
    }
}

/// Real standard form `min c'x, Ax = b, x ∈ S₊ × … × R₊ × Rᶠ`.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub slots: Vec<Slot>,
    pub psd_dims: Vec<usize>,
    pub lp_dim: usize,
    pub free_dim: usize,
    pub rows: Vec<Row>,
    pub b: DVector<f64>,
    pub c_psd: Vec<DMatrix<f64>>,
    pub c_lp: DVector<f64>,
    pub c_free: DVector<f64>,
    /// Index of the original equality behind each row.
    pub row_origin: Vec<usize>,
    /// Factor each original row was multiplied by.
    pub row_scale: Vec<f64>,
    /// `1` for minimization, `−1` when a maximization was negated.
    pub sign: f64,
    /// Set when a row with no coefficients has a nonzero right-hand side.
    pub inconsistent: bool,
}

#[derive(Default)]
struct Acc {
    psd: BTreeMap<(usize, usize, usize), f64>,
    lp: BTreeMap<usize, f64>,
    free: BTreeMap<usize, f64>,
}

impl Acc {
    fn add_functional(&mut self, f: &Functional, problem: &SdpProblem, slots: &[Slot], scale: f64) {
        for c in &f.coefs {
            let dim = problem.blocks[c.block].dim;
            match slots[c.block] {
                Slot::Psd(b) => {
                    let (i, j, re, im) = (c.i, c.j, c.value.re * scale, c.value.im * scale);
                    let mut put = |r: usize, s: usize, v: f64| {
                        if v != 0.0 {
                            let (r, s) = if r <= s { (r, s) } else { (s, r) };
                            *self.psd.entry((b, r, s)).or_default() += v;
                        }
                    };
                    if i == j {
                        put(i, i, 0.5 * re);
                        put(dim + i, dim + i, 0.5 * re);
                    } else {
                        put(i, j, 0.5 * re);
                        put(dim + i, dim + j, 0.5 * re);
                        put(j, dim + i, 0.5 * im);
                        put(i, dim + j, -0.5 * im);
                    }
                }
                Slot::Lp(off) => *self.lp.entry(off + c.i).or_default() += c.value.re * scale,
                Slot::Free(off) => *self.free.entry(off + c.i).or_default() += c.value.re * scale,
            }
        }
    }

    fn into_row(self) -> Row {
        let mut psd: Vec<(usize, Vec<(usize, usize, f64)>)> = Vec::new();
        for ((b, i, j), v) in self.psd {
            if v == 0.0 {
                continue;
            }
            match psd.last_mut() {
                Some((lb, ent)) if *lb == b => ent.push((i, j, v)),
                _ => psd.push((b, vec![(i, j, v)])),
            }
        }
        Row {
            psd,
            lp: self.lp.into_iter().filter(|(_, v)| *v != 0.0).collect(),
            free: self.free.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }
}

/// Compiles a problem: embeds Hermitian blocks, drops empty rows and
/// normalizes every row to unit Frobenius norm.
pub fn compile(problem: &SdpProblem) -> Result<Compiled> {
    problem.validate()?;
    let mut slots = Vec::with_capacity(problem.blocks.len());
    let mut psd_dims = Vec::new();
    let (mut lp_dim, mut free_dim) = (0, 0);
    for blk in &problem.blocks {
        match blk.kind {
            BlockKind::Hermitian => {
                slots.push(Slot::Psd(psd_dims.len()));
                psd_dims.push(2 * blk.dim);
            }
            BlockKind::Diagonal => {
                slots.push(Slot::Lp(lp_dim));
                lp_dim += blk.dim;
            }
            BlockKind::Free => {
                slots.push(Slot::Free(free_dim));
                free_dim += blk.dim;
            }
        }
    }
    let sign = match problem.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut obj = Acc::default();
    obj.add_functional(&problem.objective, problem, &slots, sign);
    let mut c_psd: Vec<DMatrix<f64>> = psd_dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    for ((b, i, j), v) in obj.psd {
        c_psd[b][(i, j)] += v;
        if i != j {
            c_psd[b][(j, i)] += v;
        }
    }
    let mut c_lp = DVector::zeros(lp_dim);
    for (k, v) in obj.lp {
        c_lp[k] += v;
    }
    let mut c_free = DVector::zeros(free_dim);
    for (k, v) in obj.free {
        c_free[k] += v;
    }

    let mut rows = Vec::new();
    let mut b = Vec::new();
    let mut row_origin = Vec::new();
    let mut row_scale = Vec::new();
    let mut inconsistent = false;
    for (k, eq) in problem.equalities.iter().enumerate() {
        let mut acc = Acc::default();
        acc.add_functional(&eq.lhs, problem, &slots, 1.0);
        let mut row = acc.into_row();
        let nrm = row.norm_squared().sqrt();
        if nrm == 0.0 {
            if eq.rhs.abs() > 1e-12 {
                inconsistent = true;
            }
            continue;
        }
        let s = 1.0 / nrm;
        row.scale(s);
        rows.push(row);
        b.push(eq.rhs * s);
        row_origin.push(k);
        row_scale.push(s);
    }

    Ok(Compiled {
        slots,
        psd_dims,
        lp_dim,
        free_dim,
        rows,
        b: DVector::from_vec(b),
        c_psd,
        c_lp,
        c_free,
        row_origin,
        row_scale,
        sign,
        inconsistent,
    })
}

impl Compiled {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Plain-text sparse dump, one nonzero per line: `matrix block row col value`.
    /// Matrix `0` is the objective and `k ≥ 1` the `k`-th equality row; PSD
    /// blocks are numbered first, then the LP block, then the free block, and
    /// only upper-triangular entries are listed. The right-hand side follows as
    /// `rhs k value` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let lp_block = self.psd_dims.len();
        let free_block = lp_block + 1;
        let _ = writeln!(out, "# psd_dims {:?} lp_dim {} free_dim {}", self.psd_dims, self.lp_dim, self.free_dim);
        for (b, c) in self.c_psd.iter().enumerate() {
            for j in 0..c.ncols() {
                for i in 0..=j {
                    if c[(i, j)] != 0.0 {
                        let _ = writeln!(out, "0 {b} {i} {j} {:e}", c[(i, j)]);
                    }
                }
            }
        }
        for (k, v) in self.c_lp.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "0 {lp_block} {k} {k} {v:e}");
            }
        }
        for (k, v) in self.c_free.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "0 {free_block} {k} {k} {v:e}");
            }
        }
        for (r, row) in self.rows.iter().enumerate() {
            for (b, ent) in &row.psd {
                for &(i, j, v) in ent {
                    let _ = writeln!(out, "{} {b} {i} {j} {v:e}", r + 1);
                }
            }
            for &(k, v) in &row.lp {
                let _ = writeln!(out, "{} {lp_block} {k} {k} {v:e}", r + 1);
            }
            for &(k, v) in &row.free {
                let _ = writeln!(out, "{} {free_block} {k} {k} {v:e}", r + 1);
            }
        }
        for (r, v) in self.b.iter().enumerate() {
            let _ = writeln!(out, "rhs {} {v:e}", r + 1);
        }
        out
    }
}
