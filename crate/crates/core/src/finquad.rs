//! Finite quadratic forms `q: A -> Q/2Z` on finite abelian groups.
//!
//! A form is stored on a generating set `e_1..e_n` of `A = ⊕ Z/d_i` by the
//! values `q(e_i)` in `[0, 2)` and `b(e_i, e_j)` in `[0, 1)`. The value on an
//! arbitrary element is
//!
//! ```text
//! q(Σ x_i e_i) = Σ x_i² q(e_i) + 2 Σ_{i<j} x_i x_j b(e_i, e_j)   (mod 2)
//! ```

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::parse::Cursor;

/// Largest group order accepted by [`FiniteQuadraticForm::is_isomorphic`].
pub const ISOMORPHISM_ORDER_LIMIT: u64 = 1 << 10;
/// Largest group order accepted by the Gauss-sum signature routines.
pub const SIGNATURE_ORDER_LIMIT: u64 = 1 << 20;

/// Tolerance used when snapping a floating Gauss sum onto an eighth root of unity.
pub const SNAP_TOLERANCE: f64 = 1e-6;

/// Named generators `ω_{p,k}^ε`, `u_k`, `v_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormSymbol {
    Omega { p: u64, k: u32, eps: i64 },
    U(u32),
    V(u32),
}

impl fmt::Display for FormSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormSymbol::Omega { p, k, eps } => write!(f, "w({p},{k},{eps})"),
            FormSymbol::U(k) => write!(f, "u({k})"),
            FormSymbol::V(k) => write!(f, "v({k})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteQuadraticForm {
    orders: Vec<u64>,
    q: Vec<BigRational>,
    // full symmetric matrix; the diagonal holds q(e_i) mod 1
    b: Vec<Vec<BigRational>>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn reduce_mod(x: &BigRational, m: i64) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(m));
    let r = x - (x / &m).floor() * &m;
    debug_assert!(!r.is_negative() && r < m);
    r
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc: u128 = 1 % m;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol `(a|p)` for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> i64 {
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return 0;
    }
    match pow_mod(r, (p - 1) / 2, p) {
        1 => 1,
        _ => -1,
    }
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

impl FiniteQuadraticForm {
    /// The form on the trivial group.
    pub fn trivial() -> Self {
        FiniteQuadraticForm {
            orders: Vec::new(),
            q: Vec::new(),
            b: Vec::new(),
        }
    }

    /// Builds a form from generator orders, `q(e_i)` and the full matrix of
    /// `b(e_i, e_j)`. Values are reduced into `[0,2)` and `[0,1)`; diagonal
    /// entries of `b` are ignored and replaced by `q(e_i) mod 1`.
    pub fn new(
        orders: Vec<u64>,
        q_values: Vec<BigRational>,
        b_values: Vec<Vec<BigRational>>,
    ) -> Result<Self> {
        let n = orders.len();
        if q_values.len() != n || b_values.len() != n || b_values.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidForm("inconsistent generator count".into()));
        }
        if let Some(d) = orders.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidForm(format!("generator order {d} < 2")));
        }
        let q: Vec<BigRational> = q_values.iter().map(|v| reduce_mod(v, 2)).collect();
        let mut b = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    b[i][i] = reduce_mod(&q[i], 1);
                    continue;
                }
                let v = reduce_mod(&b_values[i][j], 1);
                if v != reduce_mod(&b_values[j][i], 1) {
                    return Err(Error::InvalidForm(format!("b is not symmetric at ({i},{j})")));
                }
                b[i][j] = v;
            }
        }
        for i in 0..n {
            let d = BigRational::from_integer(BigInt::from(orders[i]));
            for j in 0..n {
                if !(&d * &b[i][j]).is_integer() {
                    return Err(Error::InvalidForm(format!(
                        "d_{i} b(e_{i}, e_{j}) is not integral"
                    )));
                }
            }
            let dq = &d * &q[i];
            if !dq.is_integer() {
                return Err(Error::InvalidForm(format!("d_{i} q(e_{i}) is not integral")));
            }
            if orders[i] % 2 == 1 && dq.to_integer().is_odd() {
                return Err(Error::InvalidForm(format!(
                    "d_{i} q(e_{i}) must be even for odd d_{i}"
                )));
            }
        }
        Ok(FiniteQuadraticForm { orders, q, b })
    }

    /// The standard forms `ω_{p,k}^ε`, `u_k`, `v_k`.
    pub fn make_standard(symbol: FormSymbol) -> Result<Self> {
        let bad = || Error::InvalidSymbol(symbol.to_string());
        match symbol {
            FormSymbol::Omega { p, k, eps } => {
                if !is_prime(p) || k == 0 {
                    return Err(bad());
                }
                let pk = p.checked_pow(k).filter(|&v| v <= i64::MAX as u64).ok_or_else(bad)?;
                let value = if p == 2 {
                    if ![1, -1, 5, -5].contains(&eps) {
                        return Err(bad());
                    }
                    rat(eps, pk as i64)
                } else {
                    if eps != 1 && eps != -1 {
                        return Err(bad());
                    }
                    let a = (1..)
                        .map(|m| 2 * m)
                        .find(|&a| legendre(a, p) == eps)
                        .expect("both residue classes occur among even integers");
                    rat(a, pk as i64)
                };
                Self::new(vec![pk], vec![value], vec![vec![BigRational::zero()]])
            }
            FormSymbol::U(k) | FormSymbol::V(k) => {
                if k == 0 || k > 62 {
                    return Err(bad());
                }
                let d = 1i64 << k;
                let qv = if matches!(symbol, FormSymbol::U(_)) {
                    BigRational::zero()
                } else {
                    rat(2, d)
                };
                let off = rat(1, d);
                Self::new(
                    vec![d as u64; 2],
                    vec![qv.clone(), qv],
                    vec![
                        vec![BigRational::zero(), off.clone()],
                        vec![off, BigRational::zero()],
                    ],
                )
            }
        }
    }

    /// Orthogonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let n = self.rank();
        let m = other.rank();
        let mut b = vec![vec![BigRational::zero(); n + m]; n + m];
        for i in 0..n {
            for j in 0..n {
                b[i][j] = self.b[i][j].clone();
            }
        }
        for i in 0..m {
            for j in 0..m {
                b[n + i][n + j] = other.b[i][j].clone();
            }
        }
        FiniteQuadraticForm {
            orders: self.orders.iter().chain(&other.orders).copied().collect(),
            q: self.q.iter().chain(&other.q).cloned().collect(),
            b,
        }
    }

    /// Number of stored generators (not necessarily minimal).
    pub fn rank(&self) -> usize {
        self.orders.len()
    }

    pub fn generator_orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn q_values(&self) -> &[BigRational] {
        &self.q
    }

    /// `b(e_i, e_j)` in `[0,1)`.
    pub fn b_value(&self, i: usize, j: usize) -> &BigRational {
        &self.b[i][j]
    }

    /// Group order `|A|`.
    pub fn order(&self) -> BigInt {
        self.orders.iter().map(|&d| BigInt::from(d)).product()
    }

    fn small_order(&self) -> Option<u64> {
        self.orders.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d))
    }

    /// Invariant factors `n_1 | n_2 | ...`, all greater than one, ascending.
    pub fn group_type(&self) -> Vec<u64> {
        let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &d in &self.orders {
            for (p, e) in prime_factors(d) {
                by_prime.entry(p).or_default().push(p.pow(e));
            }
        }
        let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
        let mut factors = vec![1u64; len];
        for mut powers in by_prime.into_values() {
            powers.sort_unstable_by(|a, b| b.cmp(a));
            // the largest powers go into the last invariant factor
            for (slot, pw) in factors.iter_mut().rev().zip(powers) {
                *slot *= pw;
            }
        }
        factors
    }

    /// Minimal number of generators `l(A)`.
    pub fn length(&self) -> usize {
        self.group_type().len()
    }

    /// All group elements in mixed-radix order (first coordinate fastest).
    pub fn elements(&self) -> impl Iterator<Item = Vec<u64>> + '_ {
        let total = self.small_order().unwrap_or(u64::MAX);
        (0..total).map(move |mut idx| {
            self.orders
                .iter()
                .map(|&d| {
                    let c = idx % d;
                    idx /= d;
                    c
                })
                .collect()
        })
    }

    /// `q(x)` in `[0,2)` for integer coordinates `x`.
    pub fn value(&self, x: &[i64]) -> Result<BigRational> {
        self.check_len(x.len())?;
        let mut acc = BigRational::zero();
        for i in 0..x.len() {
            let xi = BigInt::from(x[i]);
            acc += &self.q[i] * BigRational::from_integer(&xi * &xi);
            for j in i + 1..x.len() {
                let xij = BigInt::from(2) * &xi * BigInt::from(x[j]);
                acc += &self.b[i][j] * BigRational::from_integer(xij);
            }
        }
        Ok(reduce_mod(&acc, 2))
    }

    /// `b(x, y)` in `[0,1)`.
    pub fn bilinear(&self, x: &[i64], y: &[i64]) -> Result<BigRational> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut acc = BigRational::zero();
        for i in 0..x.len() {
            for j in 0..y.len() {
                let c = BigInt::from(x[i]) * BigInt::from(y[j]);
                acc += &self.b[i][j] * BigRational::from_integer(c);
            }
        }
        Ok(reduce_mod(&acc, 1))
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n == self.rank() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "expected {} coordinates, got {n}",
                self.rank()
            )))
        }
    }

    /// Exhaustively checks `q(x+y) - q(x) - q(y) = 2 b(x,y)` on groups of
    /// order at most 2^10.
    pub fn check_polarization(&self) -> Result<bool> {
        let order = self.bounded_order(ISOMORPHISM_ORDER_LIMIT)?;
        let t = self.table(self.common_denominator());
        let two_n = 2 * t.n;
        for x in 0..order as usize {
            for y in 0..order as usize {
                let s = t.add(x, y);
                let lhs = (t.qv[s] - t.qv[x] - t.qv[y]).rem_euclid(two_n);
                if lhs != (2 * t.b(x, y)).rem_euclid(two_n) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn bounded_order(&self, limit: u64) -> Result<u64> {
        match self.small_order() {
            Some(o) if o <= limit => Ok(o),
            o => Err(Error::OrderTooLarge {
                order: o.unwrap_or(u64::MAX),
                limit,
            }),
        }
    }

    /// Least common denominator `N` of all stored `q` and `b` values.
    fn common_denominator(&self) -> i128 {
        let mut n = BigInt::one();
        for v in self.q.iter().chain(self.b.iter().flatten()) {
            n = n.lcm(v.denom());
        }
        n.to_i128().expect("denominator divides the group exponent")
    }

    fn table(&self, n: i128) -> Table {
        let scale = |v: &BigRational| -> i128 {
            let s = v * BigRational::from_integer(BigInt::from(n));
            debug_assert!(s.is_integer());
            s.to_integer().to_i128().expect("scaled value fits")
        };
        let qn: Vec<i128> = self.q.iter().map(scale).collect();
        let bn: Vec<Vec<i128>> = self.b.iter().map(|r| r.iter().map(scale).collect()).collect();
        let order = self.small_order().expect("bounded by caller") as usize;
        let coords: Vec<Vec<u64>> = self.elements().collect();
        let two_n = 2 * n;
        let qv = coords
            .iter()
            .map(|x| {
                let mut acc: i128 = 0;
                for i in 0..x.len() {
                    let xi = x[i] as i128;
                    acc = (acc + xi * xi % two_n * qn[i]).rem_euclid(two_n);
                    for j in i + 1..x.len() {
                        let t = 2 * xi * x[j] as i128 % two_n * bn[i][j];
                        acc = (acc + t).rem_euclid(two_n);
                    }
                }
                acc
            })
            .collect();
        debug_assert_eq!(coords.len(), order);
        Table {
            n,
            orders: self.orders.clone(),
            bn,
            coords,
            qv,
        }
    }

    /// Counts of `N·q(x) mod 2N` over all `x`, where `N` is the common denominator.
    fn value_counts(&self) -> (i128, BTreeMap<i128, i128>) {
        let n = self.common_denominator();
        let t = self.table(n);
        let mut counts = BTreeMap::new();
        for v in t.qv {
            *counts.entry(v).or_insert(0) += 1;
        }
        (n, counts)
    }

    /// `t_+ - t_- mod 8` from the Gauss sum
    /// `Σ exp(πi q(x)) = √|A| · exp(2πi s / 8)`.
    ///
    /// `s mod 4` is decided exactly in `Z[ζ_M]` from `G² = |A| · i^s`, and
    /// `|G|² = |A|` is verified exactly as well. The remaining choice between
    /// `s` and `s + 4` is the sign of the real number `G·ζ_8^{-s}`, which is
    /// `±√|A|`; that sign is read off a double-precision evaluation.
    pub fn signature_mod8(&self) -> Result<u8> {
        let order = self.bounded_order(SIGNATURE_ORDER_LIMIT)?;
        let (n, counts) = self.value_counts();
        let two_n = 2 * n;
        let m = two_n.lcm(&8);
        let ring = Cyclotomic::new(m as u64);
        let lift = |e: i128| (e * (m / two_n)) as usize;
        let support: Vec<(i128, i128)> = counts.into_iter().collect();

        let mut modulus = vec![BigInt::zero(); m as usize];
        let mut square = vec![BigInt::zero(); m as usize];
        for &(e1, c1) in &support {
            for &(e2, c2) in &support {
                let c = BigInt::from(c1 * c2);
                modulus[lift((e1 - e2).rem_euclid(two_n))] += &c;
                square[lift((e1 + e2).rem_euclid(two_n))] += c;
            }
        }
        let size = BigInt::from(order);
        modulus[0] -= &size;
        if !ring.is_zero(modulus) {
            return Err(Error::InvalidForm(
                "Gauss sum has the wrong modulus (degenerate form)".into(),
            ));
        }
        let quarter = (0..4u8)
            .find(|&s| {
                let mut diff = square.clone();
                diff[(s as usize) * (m as usize) / 4] -= &size;
                ring.is_zero(diff)
            })
            .ok_or_else(|| Error::InvalidForm("Gauss sum square is not |A|·i^s".into()))?;

        let shift = std::f64::consts::FRAC_PI_4 * quarter as f64;
        let re: f64 = support
            .iter()
            .map(|&(e, c)| c as f64 * (std::f64::consts::PI * e as f64 / n as f64 - shift).cos())
            .sum();
        Ok(if re > 0.0 { quarter } else { quarter + 4 })
    }

    /// Double-precision evaluation of the Gauss sum, snapped to the nearest
    /// eighth root of unity. Fails if the normalised sum is farther than
    /// [`SNAP_TOLERANCE`] from every candidate.
    pub fn signature_mod8_float(&self) -> Result<u8> {
        let order = self.bounded_order(SIGNATURE_ORDER_LIMIT)?;
        let (n, counts) = self.value_counts();
        let (mut re, mut im) = (0.0f64, 0.0f64);
        for (e, c) in counts {
            let phase = std::f64::consts::PI * e as f64 / n as f64;
            re += c as f64 * phase.cos();
            im += c as f64 * phase.sin();
        }
        let root = (order as f64).sqrt();
        let (re, im) = (re / root, im / root);
        let s = (im.atan2(re) / std::f64::consts::FRAC_PI_4).round().rem_euclid(8.0);
        let target = s * std::f64::consts::FRAC_PI_4;
        let dist = ((re - target.cos()).powi(2) + (im - target.sin()).powi(2)).sqrt();
        if dist > SNAP_TOLERANCE {
            return Err(Error::InvalidForm(format!(
                "normalised Gauss sum is {dist:e} away from an eighth root of unity"
            )));
        }
        Ok(s as u8)
    }

    /// Exact test of `|Σ exp(πi q(x))|² = |A|`.
    pub fn gauss_modulus_is_exact(&self) -> Result<bool> {
        match self.signature_mod8() {
            Ok(_) => Ok(true),
            Err(Error::InvalidForm(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Sorted multiset of `q`-values over the whole group.
    pub fn value_multiset(&self) -> Result<Vec<BigRational>> {
        self.bounded_order(SIGNATURE_ORDER_LIMIT)?;
        let (n, counts) = self.value_counts();
        let mut out = Vec::new();
        for (e, c) in counts {
            let v = BigRational::new(BigInt::from(e), BigInt::from(n));
            out.extend(std::iter::repeat(v).take(c as usize));
        }
        Ok(out)
    }

    /// Exhaustive isomorphism test for groups of order at most 2^10.
    pub fn is_isomorphic(&self, other: &Self) -> Result<bool> {
        let o1 = self.bounded_order(ISOMORPHISM_ORDER_LIMIT)?;
        let o2 = other.bounded_order(ISOMORPHISM_ORDER_LIMIT)?;
        if o1 != o2 || self.group_type() != other.group_type() {
            return Ok(false);
        }
        let n = self.common_denominator().lcm(&other.common_denominator());
        let source = self.table(n);
        let target = other.table(n);
        let mut v1 = source.qv.clone();
        let mut v2 = target.qv.clone();
        v1.sort_unstable();
        v2.sort_unstable();
        if v1 != v2 {
            return Ok(false);
        }
        if self.rank() == 0 {
            return Ok(true);
        }

        let elem_order: Vec<u64> = target
            .coords
            .iter()
            .map(|x| element_order(x, &other.orders))
            .collect();
        let gens = self.rank();
        let unit = |i: usize| {
            let mut x = vec![0u64; gens];
            x[i] = 1;
            source.index(&x)
        };
        let gen_idx: Vec<usize> = (0..gens).map(unit).collect();
        let candidates: Vec<Vec<usize>> = (0..gens)
            .map(|i| {
                (0..target.coords.len())
                    .filter(|&y| {
                        elem_order[y] == self.orders[i] && target.qv[y] == source.qv[gen_idx[i]]
                    })
                    .collect()
            })
            .collect();
        let want_b: Vec<Vec<i128>> = (0..gens)
            .map(|i| (0..gens).map(|j| source.bn[i][j].rem_euclid(n)).collect())
            .collect();

        let mut search = Search {
            target: &target,
            candidates: &candidates,
            want_b: &want_b,
            images: Vec::with_capacity(gens),
            n,
        };
        Ok(search.run(o2 as usize))
    }
}

fn element_order(x: &[u64], orders: &[u64]) -> u64 {
    x.iter()
        .zip(orders)
        .map(|(&c, &d)| d / c.gcd(&d))
        .fold(1, |acc, o| acc.lcm(&o))
}

/// Scaled value table for an enumerated group.
struct Table {
    n: i128,
    orders: Vec<u64>,
    bn: Vec<Vec<i128>>,
    coords: Vec<Vec<u64>>,
    qv: Vec<i128>,
}

impl Table {
    fn index(&self, x: &[u64]) -> usize {
        let mut idx = 0u64;
        for (c, d) in x.iter().zip(&self.orders).rev() {
            idx = idx * d + c;
        }
        idx as usize
    }

    fn add(&self, x: usize, y: usize) -> usize {
        let (a, b) = (&self.coords[x], &self.coords[y]);
        let mut idx = 0usize;
        let mut stride = 1usize;
        for i in 0..a.len() {
            let d = self.orders[i];
            idx += ((a[i] + b[i]) % d) as usize * stride;
            stride *= d as usize;
        }
        idx
    }

    /// `N·b(x, y) mod N`.
    fn b(&self, x: usize, y: usize) -> i128 {
        let (a, c) = (&self.coords[x], &self.coords[y]);
        let mut acc = 0i128;
        for i in 0..a.len() {
            for j in 0..c.len() {
                acc = (acc + (a[i] as i128 * c[j] as i128 % self.n) * self.bn[i][j]).rem_euclid(self.n);
            }
        }
        acc
    }
}

struct Search<'a> {
    target: &'a Table,
    candidates: &'a [Vec<usize>],
    want_b: &'a [Vec<i128>],
    images: Vec<usize>,
    n: i128,
}

impl Search<'_> {
    fn run(&mut self, group_order: usize) -> bool {
        let i = self.images.len();
        if i == self.candidates.len() {
            return self.generates(group_order);
        }
        for &y in &self.candidates[i] {
            let ok = self
                .images
                .iter()
                .enumerate()
                .all(|(j, &z)| self.target.b(y, z).rem_euclid(self.n) == self.want_b[i][j]);
            if ok {
                self.images.push(y);
                if self.run(group_order) {
                    return true;
                }
                self.images.pop();
            }
        }
        false
    }

    fn generates(&self, group_order: usize) -> bool {
        let mut seen = vec![false; group_order];
        seen[0] = true;
        let mut members = vec![0usize];
        for &g in &self.images {
            let mut k = 0;
            while k < members.len() {
                let mut cur = members[k];
                loop {
                    cur = self.target.add(cur, g);
                    if seen[cur] {
                        break;
                    }
                    seen[cur] = true;
                    members.push(cur);
                }
                k += 1;
            }
        }
        members.len() == group_order
    }
}

/// `Z[x]/Φ_m(x)` with `Φ_m(x) = Φ_r(x^{m/r})`, `r` the radical of `m`.
struct Cyclotomic {
    degree: usize,
    // nonzero terms of Φ_m below the leading one
    tail: Vec<(usize, BigInt)>,
}

impl Cyclotomic {
    fn new(m: u64) -> Self {
        let rad: u64 = prime_factors(m).iter().map(|&(p, _)| p).product();
        let stretch = (m / rad) as usize;
        let phi_r = cyclotomic_poly(rad);
        let degree = (phi_r.len() - 1) * stretch;
        let tail = phi_r[..phi_r.len() - 1]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e * stretch, c.clone()))
            .collect();
        Cyclotomic { degree, tail }
    }

    fn is_zero(&self, mut p: Vec<BigInt>) -> bool {
        for i in (self.degree..p.len()).rev() {
            if p[i].is_zero() {
                continue;
            }
            let c = std::mem::take(&mut p[i]);
            let base = i - self.degree;
            for (e, a) in &self.tail {
                p[base + e] -= &c * a;
            }
        }
        p.iter().all(Zero::is_zero)
    }
}

/// Dense coefficients of `Φ_n`, lowest degree first.
fn cyclotomic_poly(n: u64) -> Vec<BigInt> {
    let mut num = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = divide_monic(&num, &cyclotomic_poly(d));
        }
    }
    num
}

fn divide_monic(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut quot = vec![BigInt::zero(); num.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, a) in den.iter().enumerate() {
            rem[i + j] -= &c * a;
        }
        quot[i] = c;
    }
    debug_assert!(rem.iter().all(Zero::is_zero));
    quot
}

impl fmt::Display for FiniteQuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orders.is_empty() {
            return write!(f, "trivial");
        }
        let groups: Vec<String> = self.orders.iter().map(|d| format!("Z/{d}")).collect();
        let qs: Vec<String> = self.q.iter().map(ToString::to_string).collect();
        write!(f, "{} q=[{}]", groups.join("+"), qs.join(","))?;
        let mut bs = Vec::new();
        for i in 0..self.rank() {
            for j in i + 1..self.rank() {
                if !self.b[i][j].is_zero() {
                    bs.push(format!("b{},{}={}", i + 1, j + 1, self.b[i][j]));
                }
            }
        }
        if !bs.is_empty() {
            write!(f, " {}", bs.join(","))?;
        }
        Ok(())
    }
}

/// Parses a sum of form symbols, e.g. `u(1)+v(1)+w(2,3,-1)`. `0` is the trivial form.
pub fn parse_form_symbols(input: &str) -> Result<Vec<FormSymbol>> {
    let mut cur = Cursor::new(input);
    if cur.eat('0') {
        cur.finish()?;
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    loop {
        let at = cur.offset();
        let name = cur.ident()?;
        cur.expect('(')?;
        let sym = match name.as_str() {
            "w" => {
                let p = cur.small_natural()?;
                cur.expect(',')?;
                let k = cur.small_natural()?;
                cur.expect(',')?;
                let eps = cur.small_integer()?;
                FormSymbol::Omega {
                    p,
                    k: u32::try_from(k).map_err(|_| cur.error("exponent too large"))?,
                    eps,
                }
            }
            "u" | "v" => {
                let k = cur.small_natural()?;
                let k = u32::try_from(k).map_err(|_| cur.error("exponent too large"))?;
                if name == "u" {
                    FormSymbol::U(k)
                } else {
                    FormSymbol::V(k)
                }
            }
            _ => {
                return Err(Error::Parse {
                    pos: at,
                    msg: format!("unknown form symbol '{name}'"),
                })
            }
        };
        cur.expect(')')?;
        out.push(sym);
        if !cur.eat('+') {
            break;
        }
    }
    cur.finish()?;
    Ok(out)
}

/// Parses and builds the direct sum of form symbols.
pub fn parse_form(input: &str) -> Result<FiniteQuadraticForm> {
    parse_form_symbols(input)?
        .into_iter()
        .try_fold(FiniteQuadraticForm::trivial(), |acc, s| {
            Ok(acc.direct_sum(&FiniteQuadraticForm::make_standard(s)?))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(s: &str) -> FiniteQuadraticForm {
        parse_form(s).unwrap()
    }

    #[test]
    fn omega_two_three_minus_one() {
        let w = form("w(2,3,-1)");
        assert_eq!(w.generator_orders(), &[8]);
        assert_eq!(w.q_values()[0], rat(15, 8));
        assert_eq!(w.group_type(), vec![8]);
        assert_eq!(w.signature_mod8().unwrap(), 7);
    }

    #[test]
    fn u1_values() {
        let u = form("u(1)");
        assert_eq!(u.generator_orders(), &[2, 2]);
        assert!(u.q_values().iter().all(Zero::is_zero));
        assert_eq!(*u.b_value(0, 1), rat(1, 2));
    }

    #[test]
    fn omega_three_plus() {
        assert_eq!(form("w(3,1,1)").q_values()[0], rat(4, 3));
        assert_eq!(form("w(3,1,-1)").q_values()[0], rat(2, 3));
    }

    #[test]
    fn omega_odd_uses_legendre_of_even_numerator() {
        // mod 7 the residues are 1,2,4, so 2 is the smallest even residue and 6 the smallest even non-residue
        assert_eq!(form("w(7,1,1)").q_values()[0], rat(2, 7));
        assert_eq!(form("w(7,1,-1)").q_values()[0], rat(6, 7));
        assert_eq!(form("w(5,2,-1)").q_values()[0], rat(2, 25));
    }

    #[test]
    fn signatures_of_small_forms() {
        assert_eq!(FiniteQuadraticForm::trivial().signature_mod8().unwrap(), 0);
        assert_eq!(form("v(1)").signature_mod8().unwrap(), 4);
        assert_eq!(form("u(1)").signature_mod8().unwrap(), 0);
        assert_eq!(form("w(2,1,1)").signature_mod8().unwrap(), 1);
        assert_eq!(form("w(2,2,5)").signature_mod8().unwrap(), 5);
    }

    #[test]
    fn isomorphism_examples() {
        let uu = form("u(1)+u(1)");
        let vv = form("v(1)+v(1)");
        assert!(uu.is_isomorphic(&vv).unwrap());
        assert!(!form("u(1)").is_isomorphic(&form("v(1)")).unwrap());
        let q = form("u(1)+v(1)+w(2,3,-1)");
        assert!(q.is_isomorphic(&q).unwrap());
    }

    #[test]
    fn order_and_length_of_mixed_sum() {
        let q = form("u(1)+v(1)+w(2,3,-1)");
        assert_eq!(q.order(), BigInt::from(128));
        assert_eq!(q.group_type(), vec![2, 2, 2, 2, 8]);
        assert_eq!(q.length(), 5);
        let v = form("v(1)");
        assert_eq!(v.order(), BigInt::from(4));
        assert_eq!(v.group_type(), vec![2, 2]);
    }

    #[test]
    fn group_type_combines_primes() {
        let q = form("w(2,1,1)+w(3,1,1)+w(2,2,1)");
        assert_eq!(q.group_type(), vec![2, 12]);
    }

    #[test]
    fn invalid_symbols() {
        assert!(matches!(parse_form("w(4,1,1)"), Err(Error::InvalidSymbol(_))));
        assert!(matches!(parse_form("w(3,1,5)"), Err(Error::InvalidSymbol(_))));
        assert!(matches!(parse_form("w(2,1,3)"), Err(Error::InvalidSymbol(_))));
        assert!(matches!(parse_form("u(0)"), Err(Error::InvalidSymbol(_))));
        assert!(matches!(parse_form("x(1)"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_form("u(1)+"), Err(Error::Parse { pos: 5, .. })));
    }

    #[test]
    fn invalid_forms_rejected() {
        let z = BigRational::zero;
        // q = 1/3 on Z/3 has odd numerator after scaling
        assert!(FiniteQuadraticForm::new(vec![3], vec![rat(1, 3)], vec![vec![z()]]).is_err());
        // q = 1/4 on Z/2
        assert!(FiniteQuadraticForm::new(vec![2], vec![rat(1, 4)], vec![vec![z()]]).is_err());
        // b = 1/4 between generators of order 2
        let b = vec![vec![z(), rat(1, 4)], vec![rat(1, 4), z()]];
        assert!(FiniteQuadraticForm::new(vec![2, 2], vec![z(), z()], b).is_err());
    }

    #[test]
    fn degenerate_form_has_no_signature() {
        let z = BigRational::zero;
        let q = FiniteQuadraticForm::new(vec![2], vec![z()], vec![vec![z()]]).unwrap();
        assert!(!q.gauss_modulus_is_exact().unwrap());
        assert!(q.signature_mod8_float().is_err());
    }

    #[test]
    fn polarization_holds_for_standard_forms() {
        for s in ["u(2)", "v(2)", "w(3,2,-1)", "u(1)+w(2,3,5)"] {
            assert!(form(s).check_polarization().unwrap(), "{s}");
        }
    }

    #[test]
    fn order_limit_enforced() {
        let big = form("u(3)+u(3)+w(2,5,1)");
        assert!(matches!(
            big.is_isomorphic(&big),
            Err(Error::OrderTooLarge { limit: 1024, .. })
        ));
    }

    #[test]
    fn cyclotomic_polynomials() {
        let as_i64 = |n| -> Vec<i64> { cyclotomic_poly(n).iter().map(|c| c.to_i64().unwrap()).collect() };
        assert_eq!(as_i64(1), vec![-1, 1]);
        assert_eq!(as_i64(6), vec![1, -1, 1]);
        assert_eq!(as_i64(12).len(), 5);
        // Φ_105 is the first with a coefficient of absolute value 2
        assert!(as_i64(105).iter().any(|&c| c == -2));
    }

    #[test]
    fn legendre_symbols() {
        assert_eq!(legendre(2, 7), 1);
        assert_eq!(legendre(3, 7), -1);
        assert_eq!(legendre(14, 7), 0);
        assert_eq!(legendre(-1, 5), 1);
    }
}
