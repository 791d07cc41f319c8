//! Small dense exact linear algebra: rank, solving, barycentric coordinates.

use num_traits::{One, Zero};

use crate::rational::{sub, Point, Rational};

/// Row-reduces `m` in place to reduced row echelon form and returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x -= &f * y;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

pub fn affinely_independent(points: &[&Point]) -> bool {
    if points.len() <= 1 {
        return true;
    }
    let base = points[0];
    if points.len() - 1 > base.len() {
        return false;
    }
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| sub(p, base)).collect();
    rank(&diffs) == points.len() - 1
}

/// Dimension of the affine hull of `points` (-1 when empty).
pub fn affine_dim(points: &[&Point]) -> isize {
    if points.is_empty() {
        return -1;
    }
    let base = points[0];
    let diffs: Vec<Vec<Rational>> = points[1..].iter().map(|p| sub(p, base)).collect();
    rank(&diffs) as isize
}

/// Solves `a x = b` when it has a unique solution.
pub fn solve_unique(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&n) || pivots.len() < n {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

/// Barycentric coordinates of `x` with respect to affinely independent `vertices`,
/// or `None` when `x` is off their affine hull. Coordinates may be negative.
pub fn barycentric(vertices: &[&Point], x: &[Rational]) -> Option<Vec<Rational>> {
    let k = vertices.len();
    if k == 0 {
        return None;
    }
    let dim = x.len();
    // Unknowns lambda_0..lambda_{k-1}; rows: each coordinate plus the affine constraint.
    let mut a = Vec::with_capacity(dim + 1);
    let mut b = Vec::with_capacity(dim + 1);
    for c in 0..dim {
        a.push(vertices.iter().map(|v| v[c].clone()).collect::<Vec<_>>());
        b.push(x[c].clone());
    }
    a.push(vec![Rational::one(); k]);
    b.push(Rational::one());
    let mut m: Vec<Vec<Rational>> = a
        .into_iter()
        .zip(b)
        .map(|(mut row, rhs)| {
            row.push(rhs);
            row
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.contains(&k) || pivots.len() < k {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}
