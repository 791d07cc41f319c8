//! Linear programs over fiber products of simplexes: barycentric weight blocks
//! whose linear images are forced to coincide.

use std::ops::Range;

use num_traits::{One, Signed, Zero};

use crate::lp::{LinearProgram, LpOutcome};
use crate::rational::{combine, Point, Rational};

pub(crate) struct FiberProgram {
    pub lp: LinearProgram,
    pub blocks: Vec<Range<usize>>,
    /// Index of the auxiliary variable `s`, when requested.
    pub slack: Option<usize>,
}

/// Variables: one barycentric block per entry of `images` (the images of that
/// simplex's vertices), plus an optional free-standing nonnegative `s`.
/// Constraints: each block sums to one and all blocks have the same image.
pub(crate) fn fiber_program(images: &[Vec<&Point>], with_slack: bool) -> FiberProgram {
    let mut blocks = Vec::with_capacity(images.len());
    let mut n = 0;
    for im in images {
        blocks.push(n..n + im.len());
        n += im.len();
    }
    let slack = with_slack.then_some(n);
    let total = n + usize::from(with_slack);
    let mut lp = LinearProgram::new(total);
    for b in &blocks {
        let mut row = vec![Rational::zero(); total];
        row[b.clone()].fill(Rational::one());
        lp.add_eq(row, Rational::one());
    }
    let dim = images
        .first()
        .and_then(|im| im.first())
        .map_or(0, |p| p.len());
    for k in 1..images.len() {
        for c in 0..dim {
            let mut row = vec![Rational::zero(); total];
            for (i, p) in images[0].iter().enumerate() {
                row[blocks[0].start + i] = p[c].clone();
            }
            for (j, p) in images[k].iter().enumerate() {
                row[blocks[k].start + j] -= &p[c];
            }
            lp.add_eq(row, Rational::zero());
        }
    }
    FiberProgram { lp, blocks, slack }
}

impl FiberProgram {
    /// Adds `w_i >= s` for every weight of block `b`.
    pub fn strict_block(&mut self, b: usize) {
        let s = self.slack.expect("slack variable");
        let n = self.lp.num_vars();
        for i in self.blocks[b].clone() {
            let mut row = vec![Rational::zero(); n];
            row[i] = Rational::one();
            row[s] = -Rational::one();
            self.lp.add_ge(row, Rational::zero());
        }
    }

    pub fn weights(&self, x: &[Rational], b: usize) -> Vec<Rational> {
        x[self.blocks[b].clone()].to_vec()
    }
}

/// Whether some point of each block has a common image, requiring positive
/// weights in the blocks flagged `strict`. Returns the weights on success.
pub(crate) fn common_image(images: &[Vec<&Point>], strict: &[bool]) -> Option<Vec<Vec<Rational>>> {
    let any_strict = strict.iter().any(|&s| s);
    let mut fp = fiber_program(images, any_strict);
    if let Some(s) = fp.slack {
        for (b, &st) in strict.iter().enumerate() {
            if st {
                fp.strict_block(b);
            }
        }
        let mut obj = vec![Rational::zero(); fp.lp.num_vars()];
        obj[s] = Rational::one();
        fp.lp.set_objective(obj);
    }
    match fp.lp.maximize() {
        LpOutcome::Optimal { value, x } if !any_strict || value.is_positive() => {
            Some((0..images.len()).map(|b| fp.weights(&x, b)).collect())
        }
        _ => None,
    }
}

/// Axis-aligned bounding box of a point set.
pub(crate) fn bbox(points: &[&Point]) -> (Point, Point) {
    let dim = points.first().map_or(0, |p| p.len());
    let mut lo = points[0].clone();
    let mut hi = points[0].clone();
    for p in &points[1..] {
        for c in 0..dim {
            if p[c] < lo[c] {
                lo[c] = p[c].clone();
            }
            if p[c] > hi[c] {
                hi[c] = p[c].clone();
            }
        }
    }
    (lo, hi)
}

pub(crate) fn boxes_meet(a: &(Point, Point), b: &(Point, Point)) -> bool {
    a.0.iter().zip(&b.1).all(|(lo, hi)| lo <= hi) && b.0.iter().zip(&a.1).all(|(lo, hi)| lo <= hi)
}

pub(crate) fn weighted_point(weights: &[Rational], points: &[&Point]) -> Point {
    let dim = points.first().map_or(0, |p| p.len());
    combine(weights.iter().zip(points.iter().copied()), dim)
}
