//! Smith normal form and the integrality questions built on it.
//!
//! Every "is this an integer combination" and "what is the saturated
//! kernel" question in the crate goes through [`smith_normal_form`]. The
//! pivot rule is fixed (smallest nonzero absolute value, ties broken by the
//! lowest row and then the lowest column), so `U` and `V` are reproducible.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::IntMatrix;

/// `U * A * V = S` with `U`, `V` unimodular and `S` diagonal, nonnegative,
/// each diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntMatrix,
    pub s: IntMatrix,
    pub v: IntMatrix,
}

impl SmithDecomposition {
    /// The diagonal of `S` (length `min(rows, cols)`).
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.s.rows().min(self.s.cols());
        (0..k).map(|i| self.s[(i, i)].clone()).collect()
    }

    /// Number of nonzero elementary divisors.
    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }

    /// Nonzero elementary divisors, in order.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        self.diagonal().into_iter().filter(|d| !d.is_zero()).collect()
    }
}

fn smallest_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(BigInt, usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            let v = a[(i, j)].abs();
            if v.is_zero() {
                continue;
            }
            // strict comparison keeps the first hit in row-major order on ties
            if best.as_ref().map_or(true, |(b, _, _)| v < *b) {
                best = Some((v, i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

pub fn smith_normal_form(a: &IntMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut s = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = smallest_pivot(&s, t) else {
                return SmithDecomposition { u, s, v };
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if s[(i, t)].is_zero() {
                    continue;
                }
                let q = s[(i, t)].div_floor(&s[(t, t)]);
                let neg = -q;
                s.add_row_multiple(i, t, &neg);
                u.add_row_multiple(i, t, &neg);
                if !s[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if s[(t, j)].is_zero() {
                    continue;
                }
                let q = s[(t, j)].div_floor(&s[(t, t)]);
                let neg = -q;
                s.add_col_multiple(j, t, &neg);
                v.add_col_multiple(j, t, &neg);
                if !s[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }

            // pivot must divide the rest of the block
            let p = s[(t, t)].clone();
            let offender = (t + 1..m).find(|&i| {
                (t + 1..n).any(|j| !s[(i, j)].is_multiple_of(&p))
            });
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    s.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if s[(t, t)].is_negative() {
            s.negate_row(t);
            u.negate_row(t);
        }
    }
    SmithDecomposition { u, s, v }
}

/// Some integer solution of `A x = b`, or `None` when there is none.
///
/// The solution is `V y` where `S y = U b`, with the free coordinates of `y`
/// set to zero.
pub fn integer_solve(a: &IntMatrix, b: &[BigInt]) -> Option<Vec<BigInt>> {
    if b.len() != a.rows() {
        return None;
    }
    let dec = smith_normal_form(a);
    let ub = dec.u.mul_vec(b).ok()?;
    let n = a.cols();
    let mut y = vec![BigInt::zero(); n];
    for (i, c) in ub.iter().enumerate() {
        let d = if i < n { dec.s[(i, i)].clone() } else { BigInt::zero() };
        if d.is_zero() {
            if !c.is_zero() {
                return None;
            }
        } else {
            let (q, r) = c.div_rem(&d);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    dec.v.mul_vec(&y).ok()
}

/// A basis (as rows) of `{x in Z^n : A x = 0}`, saturated and in Hermite
/// normal form.
pub fn saturated_kernel(a: &IntMatrix) -> IntMatrix {
    let dec = smith_normal_form(a);
    let r = dec.rank();
    let n = a.cols();
    let rows: Vec<Vec<BigInt>> = (r..n).map(|j| dec.v.col_vec(j)).collect();
    hermite_normal_form(&IntMatrix::from_big_rows(rows, n))
}

/// Row-style Hermite normal form: echelon rows with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hermite_normal_form(a: &IntMatrix) -> IntMatrix {
    let mut h = a.clone();
    let (m, n) = (h.rows(), h.cols());
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            let p = (r..m)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by(|&i, &j| h[(i, c)].abs().cmp(&h[(j, c)].abs()));
            let Some(p) = p else { break };
            h.swap_rows(r, p);
            let mut done = true;
            for i in r + 1..m {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&h[(r, c)]);
                h.add_row_multiple(i, r, &q);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
        }
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&h[(r, c)]);
            h.add_row_multiple(i, r, &q);
        }
        r += 1;
    }
    let rows: Vec<Vec<BigInt>> = (0..r).map(|i| h.row_vec(i)).collect();
    IntMatrix::from_big_rows(rows, n)
}

/// True when the rows span a saturated sublattice of `Z^n` (all nonzero
/// elementary divisors equal to one).
pub fn rows_are_saturated(rows: &IntMatrix) -> bool {
    smith_normal_form(rows)
        .elementary_divisors()
        .iter()
        .all(One::is_one)
}
