//! Exact solution of `A x = b` over ℚ by fraction-free (Bareiss)
//! elimination.
//!
//! Rows are scaled to integers first. Pivots are chosen by column order and
//! free variables are set to zero, so the returned particular solution is
//! deterministic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::rational::Rational;

/// Result of [`solve`].
#[derive(Clone, Debug, PartialEq)]
pub enum Solution {
    /// A particular solution (free variables zero) and the rank of `A`.
    Solved {
        x: Vec<Rational>,
        rank: usize,
    },
    Inconsistent,
}

impl Solution {
    pub fn vector(&self) -> Option<&[Rational]> {
        match self {
            Solution::Solved { x, .. } => Some(x),
            Solution::Inconsistent => None,
        }
    }
}

fn integer_row(row: &[Rational], rhs: &Rational) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .chain(std::iter::once(rhs))
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter()
        .chain(std::iter::once(rhs))
        .map(|q| q.numer() * (&lcm / q.denom()))
        .collect()
}

/// Solves `a · x = b` where `a` has `ncols` columns.
pub fn solve(a: &[Vec<Rational>], b: &[Rational], ncols: usize) -> Solution {
    assert_eq!(a.len(), b.len(), "row count mismatch");
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            assert_eq!(row.len(), ncols, "column count mismatch");
            integer_row(row, rhs)
        })
        .collect();
    let nrows = m.len();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, pr);
        for i in 0..nrows {
            if i == r {
                continue;
            }
            // Rows above the pivot are updated too (Gauss-Jordan form); the
            // division by the previous pivot stays exact for every row.
            for j in 0..=ncols {
                if j == c {
                    continue;
                }
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                debug_assert!((&v % &prev).is_zero(), "inexact Bareiss step");
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push((r, c));
        r += 1;
    }
    if m[r..].iter().any(|row| !row[ncols].is_zero()) {
        return Solution::Inconsistent;
    }
    let mut x = vec![Rational::zero(); ncols];
    for &(row, col) in &pivots {
        x[col] = Rational::new(m[row][ncols].clone(), m[row][col].clone());
    }
    Solution::Solved { x, rank: pivots.len() }
}
