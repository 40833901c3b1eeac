//! Dense exact-rational linear algebra for absorbing chains.
//!
//! This module is the independent cross-check for the linear-time kernel
//! recursions in [`crate::walk`]: the fundamental matrix `N = (I - Q)^{-1}`
//! of the interior block gives the Green kernel, the absorption matrix
//! `N * R` gives the limit distributions, and hitting probabilities come
//! from dense first-step linear systems. Nothing here shares code with the
//! recursive implementations it validates.

use num_traits::{One, Zero};

use crate::error::Error;
use crate::ratio::Rat;
use crate::tree::Vertex;
use crate::walk::Walk;
use crate::Result;

/// Dense row-major rational matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> RatMatrix {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> RatMatrix {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let prod = a * b;
                        out[(i, j)] += prod;
                    }
                }
            }
        }
        out
    }

    /// Gauss-Jordan inverse. Exact; fails only on a singular matrix.
    pub fn inverse(&self) -> Result<RatMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = RatMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or_else(|| Error::Internal("singular matrix in oracle inversion".into()))?;
            if pivot != col {
                a.swap_rows(pivot, col);
                inv.swap_rows(pivot, col);
            }
            let p = a[(col, col)].clone();
            for j in 0..n {
                a[(col, j)] = &a[(col, j)] / &p;
                inv[(col, j)] = &inv[(col, j)] / &p;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in 0..n {
                    let s = &a[(col, j)] * &factor;
                    a[(r, j)] -= s;
                    let s = &inv[(col, j)] * &factor;
                    inv[(r, j)] -= s;
                }
            }
        }
        Ok(inv)
    }

    /// Solve `self * x = b` by Gaussian elimination with back substitution.
    pub fn solve(&self, b: &[Rat]) -> Result<Vec<Rat>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a[(r, col)].is_zero())
                .ok_or_else(|| Error::Internal("singular matrix in oracle solve".into()))?;
            if pivot != col {
                a.swap_rows(pivot, col);
                rhs.swap(pivot, col);
            }
            let p = a[(col, col)].clone();
            for j in col..n {
                a[(col, j)] = &a[(col, j)] / &p;
            }
            rhs[col] = &rhs[col] / &p;
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for j in col..n {
                    let s = &a[(col, j)] * &factor;
                    a[(r, j)] -= s;
                }
                let s = &rhs[col] * &factor;
                rhs[r] -= s;
            }
        }
        for col in (0..n).rev() {
            for r in 0..col {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                let s = &rhs[col] * &factor;
                rhs[r] -= s;
                a[(r, col)] = Rat::zero();
            }
        }
        Ok(rhs)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

/// Oracle results for one absorbing walk: dense Green matrix on interior
/// vertices and absorption probabilities to each leaf.
#[derive(Debug, Clone)]
pub struct AbsorbingOracle {
    /// Interior vertices in id order; row/column index of the matrices.
    pub interior: Vec<Vertex>,
    /// Index of each interior vertex in `interior`.
    pub interior_pos: Vec<Option<usize>>,
    /// Fundamental matrix: expected visits to interior y from interior x.
    pub green: RatMatrix,
    /// Absorption matrix: probability of absorbing at leaf j from interior
    /// x; columns follow the tree's leaf order.
    pub absorption: RatMatrix,
}

/// Compute the fundamental matrix `(I - Q)^{-1}` and absorption matrix
/// `N * R` of the absorbing chain by dense inversion.
pub fn absorbing_oracle(walk: &Walk) -> Result<AbsorbingOracle> {
    let tree = walk.tree();
    let interior: Vec<Vertex> = tree.interior_vertices().collect();
    let mut interior_pos = vec![None; tree.vertex_count()];
    for (i, &v) in interior.iter().enumerate() {
        interior_pos[v] = Some(i);
    }
    let k = interior.len();
    let mut i_minus_q = RatMatrix::identity(k);
    let mut r = RatMatrix::zeros(k, tree.leaf_count());
    for (i, &v) in interior.iter().enumerate() {
        for (y, p) in walk.outgoing(v) {
            if let Some(j) = interior_pos[*y] {
                i_minus_q[(i, j)] -= p.clone();
            } else {
                let j = tree.leaf_position(*y).expect("non-interior neighbour is a leaf");
                r[(i, j)] += p.clone();
            }
        }
    }
    let green = i_minus_q.inverse()?;
    let absorption = green.mul(&r);
    Ok(AbsorbingOracle { interior, interior_pos, green, absorption })
}

/// Hitting probabilities of `target` from every vertex, by a dense
/// first-step linear system: unknowns are the probabilities at all vertices,
/// with `f(target) = 1`, `f(leaf) = 0` for other leaves, and the one-step
/// equation at every other interior vertex.
pub fn hitting_oracle(walk: &Walk, target: Vertex) -> Result<Vec<Rat>> {
    let tree = walk.tree();
    let n = tree.vertex_count();
    let mut a = RatMatrix::identity(n);
    let mut b = vec![Rat::zero(); n];
    for v in 0..n {
        if v == target {
            b[v] = Rat::one();
        } else if tree.is_leaf(v) {
            // row stays f(v) = 0
        } else {
            for (y, p) in walk.outgoing(v) {
                a[(v, *y)] -= p.clone();
            }
        }
    }
    a.solve(&b)
}
