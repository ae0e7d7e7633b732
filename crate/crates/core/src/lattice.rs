//! Even integral lattices given by Gram matrices.
//!
//! Root lattices are negative definite (Gram = -Cartan). `U` is the
//! hyperbolic plane `[[0,1],[1,0]]`, `L(k)` scales the Gram matrix by `k`,
//! `<n>` is the rank-one lattice `[[n]]`, and `T(p,q,r)` is the tree with
//! legs of `p`, `q`, `r` vertices sharing a center.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::finquad::FiniteQuadraticForm;
use crate::matrix::IntMatrix;
use crate::parse::Cursor;
use crate::snf::{saturated_kernel, smith_normal_form};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lattice {
    gram: IntMatrix,
    signature: (usize, usize),
    det: BigInt,
    // n × rank matrix sending original coordinates (as rows) to the quotient basis
    quotient_map: IntMatrix,
}

/// Counts of positive, negative and zero pivots of a symmetric matrix.
pub fn inertia(g: &IntMatrix) -> (usize, usize, usize) {
    let n = g.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(g[(i, j)].clone())).collect())
        .collect();
    let (mut pos, mut neg) = (0, 0);
    let mut live: Vec<usize> = (0..n).collect();
    while !live.is_empty() {
        let pivot = match live.iter().position(|&i| !a[i][i].is_zero()) {
            Some(p) => p,
            None => {
                // zero diagonal: replace e_i by e_i + e_j for some a_ij != 0
                let pair = live.iter().enumerate().find_map(|(s, &i)| {
                    live.iter().find(|&&j| j != i && !a[i][j].is_zero()).map(|&j| (s, i, j))
                });
                let Some((s, i, j)) = pair else { break };
                for k in 0..n {
                    let v = a[j][k].clone();
                    a[i][k] += v;
                }
                for k in 0..n {
                    let v = a[k][j].clone();
                    a[k][i] += v;
                }
                s
            }
        };
        let p = live.remove(pivot);
        let d = a[p][p].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for &i in &live {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &d;
            for &j in &live {
                let v = &f * &a[p][j];
                a[i][j] -= v;
            }
            a[i][p] = BigRational::zero();
        }
        for &i in &live {
            a[p][i] = BigRational::zero();
        }
    }
    (pos, neg, n - pos - neg)
}

impl Lattice {
    /// Lattice of a symmetric Gram matrix with even diagonal. A degenerate
    /// Gram matrix is replaced by the induced form on the quotient by its
    /// radical; [`Lattice::quotient_map`] records the projection.
    pub fn from_gram(g: &IntMatrix) -> Result<Self> {
        if !g.is_square() || !g.is_symmetric() {
            return Err(Error::InvalidGram("matrix is not symmetric".into()));
        }
        if let Some(i) = (0..g.rows()).find(|&i| g[(i, i)].is_odd()) {
            return Err(Error::InvalidGram(format!("odd diagonal entry at {i}")));
        }
        let n = g.rows();
        let kernel = saturated_kernel(g);
        let k = kernel.rows();
        let (gram, quotient_map) = if k == 0 {
            (g.clone(), IntMatrix::identity(n))
        } else {
            // rows of W = V^-1 form a basis whose first k vectors span the radical
            let v = smith_normal_form(&kernel).v;
            let w = v.unimodular_inverse()?;
            let keep: Vec<usize> = (k..n).collect();
            let all: Vec<usize> = (0..n).collect();
            let w2 = w.select(&keep, &all);
            let gram = w2.checked_mul(g)?.checked_mul(&w2.transpose())?;
            (gram, v.select(&all, &keep))
        };
        let det = gram.det()?;
        if det.is_zero() {
            return Err(Error::Degenerate("radical quotient is still degenerate".into()));
        }
        let (p, m, _) = inertia(&gram);
        Ok(Lattice {
            gram,
            signature: (p, m),
            det,
            quotient_map,
        })
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    /// `(t_+, t_-)`.
    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    /// Matrix `P` with `x ↦ x·P` sending input coordinates to lattice coordinates.
    pub fn quotient_map(&self) -> &IntMatrix {
        &self.quotient_map
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let (n, m) = (self.rank(), other.rank());
        let mut g = IntMatrix::zeros(n + m, n + m);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = self.gram[(i, j)].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                g[(n + i, n + j)] = other.gram[(i, j)].clone();
            }
        }
        Lattice::from_gram(&g).expect("direct sum of nondegenerate lattices")
    }

    /// `L(k)`.
    pub fn scaled(&self, k: i64) -> Result<Lattice> {
        if k == 0 {
            return Err(Error::Degenerate("scaling by zero".into()));
        }
        Lattice::from_gram(&self.gram.scaled(&BigInt::from(k)))
    }

    /// Discriminant form on `L^∨/L`, read off the Smith normal form
    /// `U G V = S`: the generator for an elementary divisor `s_i > 1` is
    /// `V[:,i] / s_i`.
    pub fn discriminant_form(&self) -> Result<FiniteQuadraticForm> {
        let snf = smith_normal_form(&self.gram);
        let (idx, orders) = torsion_part(&snf.diagonal())?;
        let cols: Vec<Vec<BigInt>> = idx.iter().map(|&i| snf.v.col_vec(i)).collect();
        let pair = |a: usize, b: usize| -> Result<BigRational> {
            let num = self.gram.bilinear(&cols[a], &cols[b])?;
            Ok(BigRational::new(num, BigInt::from(orders[a]) * BigInt::from(orders[b])))
        };
        build_form(orders.clone(), pair)
    }

    /// The same form computed through `G^{-1}`: the generators are the
    /// columns `u_i` of `U^{-1}`, read as functionals, with
    /// `q = u_iᵀ G^{-1} u_i`.
    pub fn discriminant_form_by_inverse(&self) -> Result<FiniteQuadraticForm> {
        let snf = smith_normal_form(&self.gram);
        let (idx, orders) = torsion_part(&snf.diagonal())?;
        let u_inv = snf.u.unimodular_inverse()?;
        let g_inv = self.gram.rational_inverse()?;
        let cols: Vec<Vec<BigRational>> = idx
            .iter()
            .map(|&i| {
                u_inv
                    .col_vec(i)
                    .into_iter()
                    .map(BigRational::from_integer)
                    .collect()
            })
            .collect();
        let pair = |a: usize, b: usize| -> Result<BigRational> {
            let gy = g_inv.mul_vec(&cols[b])?;
            Ok(cols[a].iter().zip(&gy).map(|(x, y)| x * y).sum())
        };
        build_form(orders, pair)
    }
}

fn torsion_part(diag: &[BigInt]) -> Result<(Vec<usize>, Vec<u64>)> {
    if diag.iter().any(Zero::is_zero) {
        return Err(Error::Degenerate("Gram matrix is singular".into()));
    }
    let mut idx = Vec::new();
    let mut orders = Vec::new();
    for (i, s) in diag.iter().enumerate() {
        if !s.is_one() {
            idx.push(i);
            orders.push(s.to_u64().ok_or(Error::OrderTooLarge {
                order: u64::MAX,
                limit: u64::MAX,
            })?);
        }
    }
    Ok((idx, orders))
}

fn build_form(
    orders: Vec<u64>,
    pair: impl Fn(usize, usize) -> Result<BigRational>,
) -> Result<FiniteQuadraticForm> {
    let n = orders.len();
    let mut q = Vec::with_capacity(n);
    let mut b = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        q.push(pair(i, i)?);
        for j in 0..n {
            if i != j {
                b[i][j] = pair(i, j)?;
            }
        }
    }
    FiniteQuadraticForm::new(orders, q, b)
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "rank {} signature ({},{}) det {}",
            self.rank(),
            self.signature.0,
            self.signature.1,
            self.det
        )
    }
}

fn gram_from_edges(n: usize, edges: &[(usize, usize)]) -> IntMatrix {
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = BigInt::from(-2);
    }
    for &(a, b) in edges {
        g[(a, b)] = BigInt::one();
        g[(b, a)] = BigInt::one();
    }
    g
}

fn build(g: IntMatrix) -> Lattice {
    Lattice::from_gram(&g).expect("constructor Gram matrices are nondegenerate")
}

/// The hyperbolic plane.
pub fn hyperbolic() -> Lattice {
    build(IntMatrix::from_rows(&[[0, 1], [1, 0]]))
}

/// Negative definite `A_n`, `n ≥ 1`, nodes along a path.
pub fn root_a(n: usize) -> Result<Lattice> {
    if n == 0 {
        return Err(Error::InvalidGram("A_n needs n >= 1".into()));
    }
    let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
    Ok(build(gram_from_edges(n, &edges)))
}

/// Negative definite `D_n`, `n ≥ 4`: a path `1..n-1` with node `n` attached to `n-2`.
pub fn root_d(n: usize) -> Result<Lattice> {
    if n < 4 {
        return Err(Error::InvalidGram("D_n needs n >= 4".into()));
    }
    let mut edges: Vec<_> = (1..n - 1).map(|i| (i - 1, i)).collect();
    edges.push((n - 3, n - 1));
    Ok(build(gram_from_edges(n, &edges)))
}

/// Negative definite `E_6`, `E_7`, `E_8`: path `1-3-4-5-...` with node 2 attached to 4.
pub fn root_e(n: usize) -> Result<Lattice> {
    if !(6..=8).contains(&n) {
        return Err(Error::InvalidGram("E_n needs n in 6..=8".into()));
    }
    let mut edges = vec![(0, 2), (1, 3)];
    edges.extend((3..n).map(|i| (i - 1, i)));
    Ok(build(gram_from_edges(n, &edges)))
}

/// `<n>` for even nonzero `n`.
pub fn rank_one(n: i64) -> Result<Lattice> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidGram(format!("<{n}> must be even and nonzero")));
    }
    Ok(build(IntMatrix::from_rows(&[[n]])))
}

/// `T_{p,q,r}`: center first, then the remaining vertices of each leg in
/// argument order, each leg ordered away from the center.
pub fn tree_t(p: usize, q: usize, r: usize) -> Result<Lattice> {
    if p < 2 || q < 2 || r < 2 {
        return Err(Error::InvalidGram("T(p,q,r) needs every leg >= 2".into()));
    }
    let n = p + q + r - 2;
    let mut edges = Vec::new();
    let mut next = 1;
    for leg in [p, q, r] {
        let mut prev = 0;
        for _ in 1..leg {
            edges.push((prev, next));
            prev = next;
            next += 1;
        }
    }
    debug_assert_eq!(next, n);
    let g = gram_from_edges(n, &edges);
    if g.det()?.is_zero() {
        return Err(Error::Degenerate(format!("T({p},{q},{r}) is degenerate")));
    }
    Lattice::from_gram(&g)
}

/// Parses `Expr := Term ("+" Term)*` with
/// `Term := U[(k)] | (A|D|E)n[(k)] | <n> | T(p,q,r)`.
pub fn parse_lattice_expr(input: &str) -> Result<Lattice> {
    let mut cur = Cursor::new(input);
    let mut acc: Option<Lattice> = None;
    loop {
        let term = parse_term(&mut cur)?;
        acc = Some(match acc {
            None => term,
            Some(l) => l.direct_sum(&term),
        });
        if !cur.eat('+') {
            break;
        }
    }
    cur.finish()?;
    Ok(acc.expect("at least one term"))
}

fn parse_term(cur: &mut Cursor) -> Result<Lattice> {
    let at = cur.offset();
    let here = |msg: String| Error::Parse { pos: at, msg };
    let base = match cur.bump() {
        Some('U') => hyperbolic(),
        Some(c @ ('A' | 'D' | 'E')) => {
            let n_at = cur.offset();
            let n = cur.small_natural()? as usize;
            let built = match c {
                'A' => root_a(n),
                'D' => root_d(n),
                _ => root_e(n),
            };
            built.map_err(|e| Error::Parse {
                pos: n_at,
                msg: e.to_string(),
            })?
        }
        Some('<') => {
            let n_at = cur.offset();
            let n = cur.small_integer()?;
            cur.expect('>')?;
            return rank_one(n).map_err(|e| Error::Parse {
                pos: n_at,
                msg: e.to_string(),
            });
        }
        Some('T') => {
            cur.expect('(')?;
            let p = cur.small_natural()? as usize;
            cur.expect(',')?;
            let q = cur.small_natural()? as usize;
            cur.expect(',')?;
            let r = cur.small_natural()? as usize;
            cur.expect(')')?;
            return tree_t(p, q, r).map_err(|e| here(e.to_string()));
        }
        Some(c) => return Err(here(format!("unexpected '{c}'"))),
        None => return Err(here("expected a lattice term".into())),
    };
    if cur.eat('(') {
        let k_at = cur.offset();
        let k = cur.small_integer()?;
        cur.expect(')')?;
        return base.scaled(k).map_err(|e| Error::Parse {
            pos: k_at,
            msg: e.to_string(),
        });
    }
    Ok(base)
}

/// Criterion for an even lattice with signature `(t_+, t_-)` and
/// discriminant form `q` to exist and be unique up to isometry:
/// `t_+ - t_- ≡ sign(q) mod 8`, `t_+ + t_- ≥ 2 + l(A_q)`, `t_+ ≥ 1`, `t_- ≥ 1`.
pub fn nikulin_unique(t_plus: usize, t_minus: usize, q: &FiniteQuadraticForm) -> Result<bool> {
    if t_plus < 1 || t_minus < 1 || t_plus + t_minus < 2 + q.length() {
        return Ok(false);
    }
    let diff = (t_plus as i64 - t_minus as i64).rem_euclid(8);
    Ok(diff == i64::from(q.signature_mod8()?))
}

/// Returns the unique candidate name whose rank, signature and discriminant
/// form match `l`, provided the uniqueness criterion holds so that the match
/// is an isometry.
pub fn identify<S: AsRef<str>>(l: &Lattice, candidates: &[S]) -> Result<Option<String>> {
    let form = l.discriminant_form()?;
    let mut matches = Vec::new();
    for name in candidates {
        let c = parse_lattice_expr(name.as_ref())?;
        if c.rank() != l.rank() || c.signature() != l.signature() || c.det().abs() != l.det().abs() {
            continue;
        }
        if c.discriminant_form()?.is_isomorphic(&form)? {
            matches.push(name.as_ref().to_string());
        }
    }
    match matches.len() {
        0 => Ok(None),
        1 => {
            let (tp, tm) = l.signature();
            if nikulin_unique(tp, tm, &form)? {
                Ok(matches.pop())
            } else {
                Err(Error::Unjustified(matches.remove(0)))
            }
        }
        _ => Err(Error::Ambiguous(matches.join(", "))),
    }
}

/// Whether the rows span a primitive sublattice of `Z^n`: every nonzero
/// elementary divisor of the row matrix equals 1.
pub fn is_primitive_sublattice(ambient: &Lattice, rows: &IntMatrix) -> Result<bool> {
    if rows.cols() != ambient.rank() {
        return Err(Error::Dimension(format!(
            "rows have {} coordinates, ambient rank is {}",
            rows.cols(),
            ambient.rank()
        )));
    }
    Ok(smith_normal_form(rows)
        .elementary_divisors()
        .iter()
        .all(One::is_one))
}
