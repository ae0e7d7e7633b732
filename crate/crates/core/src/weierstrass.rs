//! Weierstrass models `y² = x³ + A(t)x + B(t)` of elliptic K3 surfaces over Q.
//!
//! Places are found without factoring: the squarefree parts of A, B and the
//! discriminant are refined into a pairwise coprime basis, on whose roots all
//! three vanishing orders are constant.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::parse::Cursor;

/// Dense polynomial in `t` with rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatPoly {
    coeffs: Vec<BigRational>,
}

impl RatPoly {
    pub fn zero() -> Self {
        RatPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c·t^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Leading coefficient one (zero stays zero).
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(l) => self.scale(&l.recip()),
            None => Self::zero(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading().expect("nonzero").clone();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![BigRational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if c.is_zero() {
                continue;
            }
            for (j, a) in d.coeffs.iter().enumerate() {
                rem[i + j] -= &c * a;
            }
            quot[i] = c;
        }
        (Self::from_coeffs(quot), Self::from_coeffs(rem))
    }

    /// Quotient when `d` divides `self`.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's squarefree decomposition `f = c · Π a_i^i` with each `a_i`
    /// monic, squarefree and pairwise coprime. Returns the nonconstant
    /// `(a_i, i)`.
    pub fn squarefree_decomposition(&self) -> Vec<(RatPoly, u32)> {
        if self.is_constant() {
            return Vec::new();
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.div_exact(&a0).expect("gcd divides");
        let c = df.div_exact(&a0).expect("gcd divides");
        let mut d = &c - &b.derivative();
        let mut out = Vec::new();
        let mut i = 1;
        while !b.is_constant() {
            let a = b.gcd(&d);
            b = b.div_exact(&a).expect("gcd divides");
            let c = d.div_exact(&a).expect("gcd divides");
            d = &c - &b.derivative();
            if !a.is_constant() {
                out.push((a, i));
            }
            i += 1;
        }
        out
    }

    /// Number of times `p` divides `self`; `Infinite` for the zero polynomial.
    pub fn multiplicity(&self, p: &Self) -> Order {
        assert!(!p.is_constant(), "multiplicity of a constant");
        if self.is_zero() {
            return Order::Infinite;
        }
        let mut n = 0;
        let mut f = self.clone();
        while let Some(q) = f.div_exact(p) {
            f = q;
            n += 1;
        }
        Order::Finite(n)
    }

    /// Parses sums of terms `c*t^k`, with `c` an integer or `p/q` and `*`
    /// and `^1` optional, e.g. `t^7-t^3`, `4+27t^16`, `-1/2*t`.
    pub fn parse(input: &str) -> Result<Self> {
        let mut cur = Cursor::new(input);
        let mut acc = Self::zero();
        let mut first = true;
        loop {
            let sign = if cur.eat('-') {
                -1
            } else if cur.eat('+') || first {
                1
            } else {
                break;
            };
            first = false;
            let mut c = BigRational::from_integer(BigInt::from(sign));
            let mut has_coeff = false;
            if matches!(cur.peek(), Some(ch) if ch.is_ascii_digit()) {
                let num = cur.natural()?;
                let den = if cur.eat('/') {
                    let at = cur.offset();
                    let d = cur.natural()?;
                    if d.is_zero() {
                        return Err(Error::Parse {
                            pos: at,
                            msg: "zero denominator".into(),
                        });
                    }
                    d
                } else {
                    BigInt::one()
                };
                c *= BigRational::new(num, den);
                has_coeff = true;
            }
            let star = has_coeff && cur.eat('*');
            let k = if cur.eat('t') {
                if cur.eat('^') {
                    cur.small_natural()? as usize
                } else {
                    1
                }
            } else if !has_coeff || star {
                return Err(cur.error("expected a coefficient or 't'"));
            } else {
                0
            };
            acc = &acc + &Self::monomial(c, k);
        }
        cur.finish()?;
        Ok(acc)
    }
}

impl Add for &RatPoly {
    type Output = RatPoly;
    fn add(self, o: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        RatPoly::from_coeffs((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &RatPoly {
    type Output = RatPoly;
    fn sub(self, o: &RatPoly) -> RatPoly {
        self + &(-o)
    }
}

impl Neg for &RatPoly {
    type Output = RatPoly;
    fn neg(self) -> RatPoly {
        RatPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul for &RatPoly {
    type Output = RatPoly;
    fn mul(self, o: &RatPoly) -> RatPoly {
        if self.is_zero() || o.is_zero() {
            return RatPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::from_coeffs(out)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let body = match (k, a.is_one()) {
                (0, _) => a.to_string(),
                (1, true) => "t".to_string(),
                (1, false) => format!("{a}*t"),
                (_, true) => format!("t^{k}"),
                (_, false) => format!("{a}*t^{k}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

/// Vanishing order, with `Infinite` for an identically zero polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    fn at_least(self, n: u32) -> bool {
        self >= Order::Finite(n)
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(n) => write!(f, "{n}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KodairaFiber {
    /// `I_n`; `I_0` is a smooth fiber.
    I(u32),
    /// `I_n^*`.
    IStar(u32),
    II,
    III,
    IV,
    IVStar,
    IIIStar,
    IIStar,
}

impl KodairaFiber {
    /// Euler number `e_v`.
    pub fn euler(self) -> u32 {
        match self {
            KodairaFiber::I(n) => n,
            KodairaFiber::IStar(n) => n + 6,
            KodairaFiber::II => 2,
            KodairaFiber::III => 3,
            KodairaFiber::IV => 4,
            KodairaFiber::IVStar => 8,
            KodairaFiber::IIIStar => 9,
            KodairaFiber::IIStar => 10,
        }
    }

    /// Number of irreducible components `m_v`.
    pub fn components(self) -> u32 {
        match self {
            KodairaFiber::I(n) => n.max(1),
            KodairaFiber::IStar(n) => n + 5,
            KodairaFiber::II => 1,
            KodairaFiber::III => 2,
            KodairaFiber::IV => 3,
            KodairaFiber::IVStar => 7,
            KodairaFiber::IIIStar => 8,
            KodairaFiber::IIStar => 9,
        }
    }
}

impl fmt::Display for KodairaFiber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KodairaFiber::I(n) => write!(f, "I{n}"),
            KodairaFiber::IStar(n) => write!(f, "I{n}*"),
            KodairaFiber::II => write!(f, "II"),
            KodairaFiber::III => write!(f, "III"),
            KodairaFiber::IV => write!(f, "IV"),
            KodairaFiber::IVStar => write!(f, "IV*"),
            KodairaFiber::IIIStar => write!(f, "III*"),
            KodairaFiber::IIStar => write!(f, "II*"),
        }
    }
}

/// Kodaira type from the vanishing orders of `A`, `B` and `Δ` (char 0).
pub fn classify_fiber(a: Order, b: Order, delta: Order) -> Result<KodairaFiber> {
    use KodairaFiber::*;
    let triple = || format!("(a,b,δ) = ({a},{b},{delta})");
    if a.at_least(4) && b.at_least(6) {
        return Err(Error::NonMinimal(triple()));
    }
    let Order::Finite(d) = delta else {
        return Err(Error::Unclassifiable(triple()));
    };
    let f = |n: u32| Order::Finite(n);
    let fiber = match (a, b, d) {
        (_, _, 0) => Some(I(0)),
        (Order::Finite(0), Order::Finite(0), n) => Some(I(n)),
        (a, b, 2) if a.at_least(1) && b == f(1) => Some(II),
        (a, b, 3) if a == f(1) && b.at_least(2) => Some(III),
        (a, b, 4) if a.at_least(2) && b == f(2) => Some(IV),
        (a, b, 6) if a.at_least(2) && b.at_least(3) => Some(IStar(0)),
        (a, b, n) if n > 6 && a == f(2) && b == f(3) => Some(IStar(n - 6)),
        (a, b, 8) if a.at_least(3) && b == f(4) => Some(IVStar),
        (a, b, 9) if a == f(3) && b.at_least(5) => Some(IIIStar),
        (a, b, 10) if a.at_least(4) && b == f(5) => Some(IIStar),
        _ => None,
    };
    fiber.ok_or_else(|| Error::Unclassifiable(triple()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaceKey {
    /// Monic squarefree factor whose roots are the places.
    Finite(RatPoly),
    Infinity,
}

impl fmt::Display for PlaceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceKey::Finite(p) => write!(f, "{p}"),
            PlaceKey::Infinity => write!(f, "inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceData {
    pub place: PlaceKey,
    pub a: Order,
    pub b: Order,
    pub delta: Order,
}

impl PlaceData {
    /// Number of points of P¹ this entry stands for.
    pub fn count(&self) -> usize {
        match &self.place {
            PlaceKey::Finite(p) => p.degree().unwrap_or(0),
            PlaceKey::Infinity => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeierstrassModel {
    a: RatPoly,
    b: RatPoly,
}

impl WeierstrassModel {
    pub fn new(a: RatPoly, b: RatPoly) -> Result<Self> {
        if a.degree().is_some_and(|d| d > 8) {
            return Err(Error::Polynomial(format!("deg A > 8: {a}")));
        }
        if b.degree().is_some_and(|d| d > 12) {
            return Err(Error::Polynomial(format!("deg B > 12: {b}")));
        }
        let m = WeierstrassModel { a, b };
        if m.raw_discriminant().is_zero() {
            return Err(Error::ZeroDiscriminant);
        }
        Ok(m)
    }

    pub fn a(&self) -> &RatPoly {
        &self.a
    }

    pub fn b(&self) -> &RatPoly {
        &self.b
    }

    fn raw_discriminant(&self) -> RatPoly {
        let four = RatPoly::from_i64(&[4]);
        let twenty_seven = RatPoly::from_i64(&[27]);
        &(&four * &self.a.pow(3)) + &(&twenty_seven * &self.b.pow(2))
    }

    /// `Δ = 4A³ + 27B²`.
    pub fn discriminant(&self) -> RatPoly {
        self.raw_discriminant()
    }

    /// Vanishing orders at every place with `δ > 0`, finite places first
    /// (ordered by degree, then coefficients), then the place at infinity.
    pub fn places(&self) -> Vec<PlaceData> {
        let delta = self.discriminant();
        let mut seeds = Vec::new();
        for f in [&self.a, &self.b, &delta] {
            seeds.extend(f.squarefree_decomposition().into_iter().map(|(p, _)| p));
        }
        let basis = coprime_basis(seeds);
        let mut out: Vec<PlaceData> = basis
            .into_iter()
            .map(|p| PlaceData {
                a: self.a.multiplicity(&p),
                b: self.b.multiplicity(&p),
                delta: delta.multiplicity(&p),
                place: PlaceKey::Finite(p),
            })
            .filter(|pd| pd.delta > Order::Finite(0))
            .collect();
        out.sort_by(|x, y| place_cmp(&x.place, &y.place));
        let deficit = |p: &RatPoly, total: u32| match p.degree() {
            Some(d) => Order::Finite(total - d as u32),
            None => Order::Infinite,
        };
        out.push(PlaceData {
            place: PlaceKey::Infinity,
            a: deficit(&self.a, 8),
            b: deficit(&self.b, 12),
            delta: deficit(&delta, 24),
        });
        out
    }

    /// Singular fibers with multiplicities, in the order of [`Self::places`].
    pub fn fibers(&self) -> Result<Vec<(PlaceData, KodairaFiber)>> {
        self.places()
            .into_iter()
            .map(|p| Ok((p.clone(), classify_fiber(p.a, p.b, p.delta)?)))
            .collect()
    }
}

fn place_cmp(x: &PlaceKey, y: &PlaceKey) -> Ordering {
    match (x, y) {
        (PlaceKey::Finite(p), PlaceKey::Finite(q)) => p
            .degree()
            .cmp(&q.degree())
            .then_with(|| p.coeffs().iter().rev().cmp(q.coeffs().iter().rev())),
        (PlaceKey::Finite(_), PlaceKey::Infinity) => Ordering::Less,
        (PlaceKey::Infinity, PlaceKey::Finite(_)) => Ordering::Greater,
        (PlaceKey::Infinity, PlaceKey::Infinity) => Ordering::Equal,
    }
}

/// Refines monic squarefree polynomials into a pairwise coprime family with
/// the same roots.
pub fn coprime_basis(polys: Vec<RatPoly>) -> Vec<RatPoly> {
    let mut set: Vec<RatPoly> = Vec::new();
    let push = |set: &mut Vec<RatPoly>, p: RatPoly| {
        let p = p.monic();
        if !p.is_constant() && !set.contains(&p) {
            set.push(p);
        }
    };
    for p in polys {
        push(&mut set, p);
    }
    'refine: loop {
        for i in 0..set.len() {
            for j in i + 1..set.len() {
                let g = set[i].gcd(&set[j]);
                if g.is_constant() {
                    continue;
                }
                let q = set.remove(j);
                let p = set.remove(i);
                push(&mut set, p.div_exact(&g).expect("gcd divides"));
                push(&mut set, q.div_exact(&g).expect("gcd divides"));
                push(&mut set, g);
                continue 'refine;
            }
        }
        break;
    }
    set
}

/// `Σ count · e_v = 24`.
pub fn euler_check(fibers: &[(KodairaFiber, usize)]) -> bool {
    euler_sum(fibers) == 24
}

pub fn euler_sum(fibers: &[(KodairaFiber, usize)]) -> usize {
    fibers.iter().map(|&(f, n)| n * f.euler() as usize).sum()
}

/// Mordell–Weil rank `ρ - 2 - Σ (m_v - 1)`. The torsion order does not
/// enter the rank.
pub fn shioda_tate(rho: usize, fibers: &[(KodairaFiber, usize)], _torsion_order: usize) -> Result<usize> {
    let defect: usize = fibers
        .iter()
        .map(|&(f, n)| n * (f.components() as usize - 1))
        .sum();
    rho.checked_sub(2 + defect)
        .ok_or_else(|| Error::Inconsistent(format!("ρ = {rho} is smaller than 2 + {defect}")))
}

/// Fibers of a model aggregated by type, with counts.
pub fn fiber_census(fibers: &[(PlaceData, KodairaFiber)]) -> Vec<(KodairaFiber, usize)> {
    let mut out: Vec<(KodairaFiber, usize)> = Vec::new();
    for (p, f) in fibers {
        if *f == KodairaFiber::I(0) {
            continue;
        }
        match out.iter_mut().find(|(g, _)| g == f) {
            Some(e) => e.1 += p.count(),
            None => out.push((*f, p.count())),
        }
    }
    out.sort();
    out
}

/// For multiplication by `x` on `F₂[x]/((1+x)^k)`, returns
/// `(rank(M - I), least e with (M - I)^e = 0)`.
pub fn jordan_check_f2(k: usize) -> Result<(usize, usize)> {
    if !(1..=64).contains(&k) {
        return Err(Error::Inconsistent(format!("k = {k} outside 1..=64")));
    }
    // (1+x)^k mod 2: bit i is binom(k, i) mod 2, i.e. i ⊆ k bitwise
    let reduction: u64 = (0..k).filter(|&i| i & k == i).fold(0, |acc, i| acc | 1 << i);
    // columns of M: x·x^j = x^{j+1}, and x^k reduces to the low terms
    let mut cols = vec![0u64; k];
    for (j, col) in cols.iter_mut().enumerate() {
        *col = if j + 1 < k { 1 << (j + 1) } else { reduction };
    }
    // rows of N = M + I
    let mut n = vec![0u64; k];
    for (j, &col) in cols.iter().enumerate() {
        for (i, row) in n.iter_mut().enumerate() {
            if col >> i & 1 == 1 {
                *row ^= 1 << j;
            }
        }
        n[j] ^= 1 << j;
    }
    let rank = f2_rank(n.clone());
    let mut power = n.clone();
    let mut e = 1;
    while power.iter().any(|&r| r != 0) {
        power = f2_mul(&power, &n);
        e += 1;
        if e > k + 1 {
            break;
        }
    }
    Ok((rank, e))
}

fn f2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i] >> bit & 1 == 1 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

fn f2_mul(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .map(|&row| {
            (0..b.len())
                .filter(|&j| row >> j & 1 == 1)
                .fold(0, |acc, j| acc ^ b[j])
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    name: String,
    figure: String,
    #[serde(rename = "A")]
    a: String,
    #[serde(rename = "B")]
    b: String,
    picard_rank: usize,
}

/// A model together with the Picard number of the surface, as stored in the
/// dataset directory.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub name: String,
    pub figure: String,
    pub model: WeierstrassModel,
    pub picard_rank: usize,
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawModel =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON: {e}")))?;
        Ok(ModelFile {
            name: raw.name,
            figure: raw.figure,
            model: WeierstrassModel::new(RatPoly::parse(&raw.a)?, RatPoly::parse(&raw.b)?)?,
            picard_rank: raw.picard_rank,
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
