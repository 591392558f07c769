//! Exact linear systems over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Solution set `particular + span(kernel)` of `A v = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSolution {
    pub particular: Vec<BigRational>,
    pub kernel: Vec<Vec<BigRational>>,
    /// Free columns; `kernel[i]` is 1 at `free[i]` and 0 at the other free columns.
    pub free: Vec<usize>,
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(rows: &mut Vec<Vec<BigRational>>, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{v : A v = 0}` for an `m x ncols` matrix.
pub fn nullspace(a: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigRational>> {
    match solve_affine(a, &vec![BigRational::zero(); a.len()], ncols) {
        Some(s) => s.kernel,
        None => Vec::new(),
    }
}

/// All solutions of `A v = rhs`, or `None` when inconsistent.
pub fn solve_affine(a: &[Vec<BigRational>], rhs: &[BigRational], ncols: usize) -> Option<AffineSolution> {
    let mut rows: Vec<Vec<BigRational>> = a
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.resize(ncols, BigRational::zero());
            r.push(b.clone());
            r
        })
        .filter(|r| r.iter().any(|v| !v.is_zero()))
        .collect();
    let pivots = rref(&mut rows, ncols);
    if rows.iter().skip(pivots.len()).any(|r| !r[ncols].is_zero()) {
        return None;
    }
    let mut particular = vec![BigRational::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        particular[c] = rows[r][ncols].clone();
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![BigRational::zero(); ncols];
            v[fc] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[r][fc].clone();
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, kernel, free })
}
