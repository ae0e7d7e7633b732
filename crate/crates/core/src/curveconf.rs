//! Configurations of smooth rational curves as weighted incidence graphs,
//! with their automorphisms and the invariant sublattices they induce.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::finquad::ISOMORPHISM_ORDER_LIMIT;
use crate::lattice::{is_primitive_sublattice, Lattice};
use crate::matrix::IntMatrix;
use crate::parse::Cursor;
use crate::snf::{integer_solve, saturated_kernel};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    figure: String,
    #[serde(default)]
    notes: Option<String>,
    curves: Vec<RawCurve>,
    edges: Vec<(String, String, i64)>,
    #[serde(default)]
    basis: Option<Vec<String>>,
    #[serde(default)]
    automorphisms: BTreeMap<String, RawAutomorphism>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    id: String,
    #[serde(rename = "self", default = "minus_two")]
    self_intersection: i64,
}

fn minus_two() -> i64 {
    -2
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAutomorphism {
    order: u32,
    #[serde(default)]
    map: BTreeMap<String, String>,
}

/// Integer combination of curves, keyed by curve id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    coeffs: BTreeMap<String, i64>,
}

impl DivisorClass {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn curve(id: &str) -> Self {
        Self::from_terms([(id, 1)])
    }

    pub fn from_terms<'a>(terms: impl IntoIterator<Item = (&'a str, i64)>) -> Self {
        let mut c = Self::zero();
        for (id, k) in terms {
            c.add_term(id, k);
        }
        c
    }

    fn add_term(&mut self, id: &str, k: i64) {
        let e = self.coeffs.entry(id.to_string()).or_insert(0);
        *e += k;
        if *e == 0 {
            self.coeffs.remove(id);
        }
    }

    pub fn coefficient(&self, id: &str) -> i64 {
        self.coeffs.get(id).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&str, i64)> {
        self.coeffs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Parses `3*E0+2*E1-S0`; a bare `0` is the zero class.
    pub fn parse(input: &str) -> Result<Self> {
        let mut cur = Cursor::new(input);
        let mut out = Self::zero();
        if cur.peek() == Some('0') {
            cur.bump();
            cur.finish()?;
            return Ok(out);
        }
        let mut first = true;
        while !cur.at_end() || first {
            let sign = if cur.eat('-') {
                -1
            } else if cur.eat('+') || first {
                1
            } else {
                return Err(cur.error("expected '+' or '-'"));
            };
            first = false;
            let k = if matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
                let k = cur.small_integer()?;
                cur.eat('*');
                k
            } else {
                1
            };
            let id = cur.ident()?;
            out.add_term(&id, sign * k);
        }
        Ok(out)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (n, (id, &k)) in self.coeffs.iter().enumerate() {
            let sign = if k < 0 { "-" } else if n > 0 { "+" } else { "" };
            match k.abs() {
                1 => write!(f, "{sign}{id}")?,
                a => write!(f, "{sign}{a}*{id}")?,
            }
        }
        Ok(())
    }
}

/// Permutation of the curves of a configuration, together with the order
/// of the underlying automorphism of the surface (which may exceed the order
/// of the permutation).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveAutomorphism {
    order: u32,
    perm: Vec<usize>,
}

impl CurveAutomorphism {
    pub fn identity(n: usize) -> Self {
        CurveAutomorphism {
            order: 1,
            perm: (0..n).collect(),
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Image of curve index `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.perm[i]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let perm: Vec<usize> = other.perm.iter().map(|&i| self.perm[i]).collect();
        let order = self.order.lcm(&other.order);
        CurveAutomorphism { order, perm }
    }

    /// `self^n`; the surface automorphism then has order `order / gcd(order, n)`.
    pub fn pow(&self, n: u32) -> Self {
        let mut acc = self.pow_perm(n);
        acc.order = if n == 0 { 1 } else { self.order / self.order.gcd(&n) };
        acc
    }

    fn pow_perm(&self, n: u32) -> Self {
        let mut acc = Self::identity(self.perm.len());
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Order of the permutation itself.
    pub fn permutation_order(&self) -> u64 {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut order = 1u64;
        for s in 0..n {
            let mut len = 0u64;
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len > 0 {
                order = order.lcm(&len);
            }
        }
        order
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j)
    }
}

#[derive(Debug, Clone)]
pub struct CurveConfig {
    name: String,
    figure: String,
    ids: Vec<String>,
    index: HashMap<String, usize>,
    gram: IntMatrix,
    basis: Option<Vec<String>>,
    automorphisms: BTreeMap<String, CurveAutomorphism>,
}

/// Result of [`CurveConfig::invariant_lattice`].
#[derive(Debug, Clone)]
pub struct InvariantLattice {
    /// The fixed sublattice computed as the saturated kernel of `M - I`.
    pub lattice: Lattice,
    /// Its basis, as rows of coordinates in the chosen basis of curves.
    pub coordinates: IntMatrix,
    /// Orbit sums surviving the redundancy scan.
    pub orbit_generators: Vec<DivisorClass>,
    /// The lattice spanned by those orbit sums.
    pub orbit_lattice: Lattice,
}

impl CurveConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON: {e}")))?;
        Self::from_raw(raw)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let _ = raw.notes;
        let n = raw.curves.len();
        let mut index = HashMap::new();
        let mut gram = IntMatrix::zeros(n, n);
        for (i, c) in raw.curves.iter().enumerate() {
            if index.insert(c.id.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate curve id {}", c.id)));
            }
            if c.self_intersection % 2 != 0 {
                return Err(Error::Config(format!(
                    "curve {} has odd self-intersection {}",
                    c.id, c.self_intersection
                )));
            }
            gram[(i, i)] = BigInt::from(c.self_intersection);
        }
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Config(format!("unknown curve id {id}")))
        };
        let mut seen = HashSet::new();
        for (a, b, m) in &raw.edges {
            let (i, j) = (lookup(a)?, lookup(b)?);
            if i == j {
                return Err(Error::Config(format!("self-edge on {a}")));
            }
            if *m <= 0 {
                return Err(Error::Config(format!("edge {a}-{b} has multiplicity {m}")));
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::Config(format!("duplicate edge {a}-{b}")));
            }
            gram[(i, j)] = BigInt::from(*m);
            gram[(j, i)] = BigInt::from(*m);
        }
        if let Some(basis) = &raw.basis {
            let mut uniq = HashSet::new();
            for id in basis {
                lookup(id)?;
                if !uniq.insert(id) {
                    return Err(Error::Config(format!("basis repeats {id}")));
                }
            }
        }
        let mut automorphisms = BTreeMap::new();
        for (name, a) in &raw.automorphisms {
            let mut perm: Vec<usize> = (0..n).collect();
            for (from, to) in &a.map {
                perm[lookup(from)?] = lookup(to)?;
            }
            let mut hit = vec![false; n];
            for &j in &perm {
                if std::mem::replace(&mut hit[j], true) {
                    return Err(Error::Config(format!("automorphism {name} is not bijective")));
                }
            }
            for i in 0..n {
                for j in 0..n {
                    if gram[(perm[i], perm[j])] != gram[(i, j)] {
                        return Err(Error::Config(format!(
                            "automorphism {name} does not preserve {}·{}",
                            raw.curves[i].id, raw.curves[j].id
                        )));
                    }
                }
            }
            if a.order == 0 {
                return Err(Error::Config(format!("automorphism {name} has order 0")));
            }
            let g = CurveAutomorphism { order: a.order, perm };
            if !g.pow_perm(a.order).is_identity() {
                return Err(Error::Config(format!(
                    "automorphism {name}: permutation order does not divide {}",
                    a.order
                )));
            }
            automorphisms.insert(name.clone(), g);
        }
        Ok(CurveConfig {
            name: raw.name,
            figure: raw.figure,
            ids: raw.curves.into_iter().map(|c| c.id).collect(),
            index,
            gram,
            basis: raw.basis,
            automorphisms,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn figure(&self) -> &str {
        &self.figure
    }

    /// Curve ids in file order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn declared_basis(&self) -> Option<&[String]> {
        self.basis.as_deref()
    }

    pub fn automorphism_names(&self) -> impl Iterator<Item = &str> {
        self.automorphisms.keys().map(String::as_str)
    }

    pub fn curve_index(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown curve id {id}")))
    }

    /// Looks up `name` or `name^k`, with `id` for the identity.
    pub fn automorphism(&self, expr: &str) -> Result<CurveAutomorphism> {
        let expr = expr.trim();
        if expr == "id" {
            return Ok(CurveAutomorphism::identity(self.ids.len()));
        }
        let (name, power) = match expr.split_once('^') {
            Some((n, p)) => (
                n.trim(),
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("bad exponent in {expr}")))?,
            ),
            None => (expr, 1),
        };
        let g = self
            .automorphisms
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown automorphism {name}")))?;
        Ok(g.pow(power))
    }

    /// Full incidence matrix of all curves.
    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn gram_of<S: AsRef<str>>(&self, subset: &[S]) -> Result<IntMatrix> {
        let idx = subset
            .iter()
            .map(|s| self.curve_index(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.gram.select(&idx, &idx))
    }

    /// Coefficient vector of a class over all curves, in file order.
    pub fn class_vector(&self, c: &DivisorClass) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); self.ids.len()];
        for (id, k) in c.terms() {
            v[self.curve_index(id)?] += k;
        }
        Ok(v)
    }

    pub fn intersection(&self, a: &DivisorClass, b: &DivisorClass) -> Result<BigInt> {
        self.gram.bilinear(&self.class_vector(a)?, &self.class_vector(b)?)
    }

    pub fn class_gram(&self, classes: &[DivisorClass]) -> Result<IntMatrix> {
        let rows = classes
            .iter()
            .map(|c| self.class_vector(c))
            .collect::<Result<Vec<_>>>()?;
        let c = IntMatrix::from_big_rows(rows, self.ids.len());
        c.checked_mul(&self.gram)?.checked_mul(&c.transpose())
    }

    pub fn lattice_of(&self, classes: &[DivisorClass]) -> Result<Lattice> {
        let g = self.class_gram(classes)?;
        debug_assert!((0..g.rows()).all(|i| g[(i, i)].is_even()));
        Lattice::from_gram(&g)
    }

    /// Coordinates of `c` in the basis, if `G_B x = (c·b_i)` has an integral
    /// solution with `c·c = xᵀ G_B x`.
    pub fn in_span<S: AsRef<str>>(&self, basis: &[S], c: &DivisorClass) -> Result<Option<Vec<BigInt>>> {
        let gb = self.gram_of(basis)?;
        if gb.det()?.is_zero() {
            return Err(Error::Degenerate("basis Gram matrix is singular".into()));
        }
        let rhs: Vec<BigRational> = basis
            .iter()
            .map(|b| Ok(BigRational::from_integer(self.intersection(c, &DivisorClass::curve(b.as_ref()))?)))
            .collect::<Result<_>>()?;
        let x = gb.rational_inverse()?.mul_vec(&rhs)?;
        if !x.iter().all(BigRational::is_integer) {
            return Ok(None);
        }
        let x: Vec<BigInt> = x.into_iter().map(|v| v.to_integer()).collect();
        if gb.bilinear(&x, &x)? != self.intersection(c, c)? {
            return Ok(None);
        }
        Ok(Some(x))
    }

    /// Coefficients `y` with `c = Σ y_i classes_i` modulo the radical of the
    /// full configuration, i.e. as classes in the lattice spanned by all curves.
    pub fn span_member(&self, classes: &[DivisorClass], c: &DivisorClass) -> Result<Option<Vec<BigInt>>> {
        let ambient = Lattice::from_gram(&self.gram)?;
        self.span_member_in(&ambient, classes, c)
    }

    fn span_member_in(
        &self,
        ambient: &Lattice,
        classes: &[DivisorClass],
        c: &DivisorClass,
    ) -> Result<Option<Vec<BigInt>>> {
        let p = ambient.quotient_map();
        let project = |d: &DivisorClass| -> Result<Vec<BigInt>> {
            let row = IntMatrix::from_big_rows(vec![self.class_vector(d)?], self.ids.len());
            Ok(row.checked_mul(p)?.row_vec(0))
        };
        let target = project(c)?;
        if classes.is_empty() {
            return Ok(target.iter().all(Zero::is_zero).then(Vec::new));
        }
        let rows = classes.iter().map(project).collect::<Result<Vec<_>>>()?;
        let m = IntMatrix::from_big_rows(rows, p.cols()).transpose();
        Ok(integer_solve(&m, &target))
    }

    /// Drops, scanning from the last class to the first, every class lying in
    /// the span of the classes still present.
    pub fn minimal_generators(&self, classes: &[DivisorClass]) -> Result<Vec<DivisorClass>> {
        let ambient = Lattice::from_gram(&self.gram)?;
        let mut kept: Vec<DivisorClass> = classes.to_vec();
        for i in (0..classes.len()).rev() {
            let mut rest = kept.clone();
            rest.remove(i);
            if self.span_member_in(&ambient, &rest, &kept[i])?.is_some() {
                kept = rest;
            }
        }
        Ok(kept)
    }

    /// One class per orbit, ordered by the position of the orbit's first
    /// curve in the file.
    pub fn orbit_sums(&self, g: &CurveAutomorphism) -> Vec<DivisorClass> {
        let n = self.ids.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut c = DivisorClass::zero();
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                c.add_term(&self.ids[i], 1);
                i = g.apply(i);
            }
            out.push(c);
        }
        out
    }

    /// Matrix whose column `j` holds the coordinates of `g(b_j)` in the basis.
    pub fn isometry_matrix<S: AsRef<str>>(&self, basis: &[S], g: &CurveAutomorphism) -> Result<IntMatrix> {
        let n = basis.len();
        let mut m = IntMatrix::zeros(n, n);
        for (j, b) in basis.iter().enumerate() {
            let image = &self.ids[g.apply(self.curve_index(b.as_ref())?)];
            let x = self.in_span(basis, &DivisorClass::curve(image))?.ok_or_else(|| {
                Error::NotInSpan(format!("image {image} of {} under the automorphism", b.as_ref()))
            })?;
            for (i, v) in x.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        let gb = self.gram_of(basis)?;
        if m.transpose().checked_mul(&gb)?.checked_mul(&m)? != gb {
            return Err(Error::Isometry("MᵀGM differs from G".into()));
        }
        Ok(m)
    }

    /// Fixed sublattice of the basis lattice, computed twice: as the saturated
    /// kernel of `M - I`, and from the orbit sums of all curves. The two must
    /// have equal rank, equal `|det|` and isomorphic discriminant forms.
    pub fn invariant_lattice<S: AsRef<str>>(&self, basis: &[S], g: &CurveAutomorphism) -> Result<InvariantLattice> {
        let m = self.isometry_matrix(basis, g)?;
        let n = basis.len();
        let shifted = m.checked_sub(&IntMatrix::identity(n))?;
        let coordinates = saturated_kernel(&shifted);
        let gb = self.gram_of(basis)?;
        let g_fixed = coordinates
            .checked_mul(&gb)?
            .checked_mul(&coordinates.transpose())?;
        let lattice = Lattice::from_gram(&g_fixed)?;
        let basis_lattice = Lattice::from_gram(&gb)?;
        if !is_primitive_sublattice(&basis_lattice, &coordinates)? {
            return Err(Error::MethodDisagreement("kernel basis is not primitive".into()));
        }

        let orbit_generators = self.minimal_generators(&self.orbit_sums(g))?;
        let orbit_lattice = self.lattice_of(&orbit_generators)?;
        let disagree = |what: String| Err(Error::MethodDisagreement(what));
        if orbit_lattice.rank() != lattice.rank() {
            return disagree(format!(
                "rank {} from the kernel, {} from orbit sums",
                lattice.rank(),
                orbit_lattice.rank()
            ));
        }
        if orbit_lattice.det().abs() != lattice.det().abs() {
            return disagree(format!(
                "|det| {} from the kernel, {} from orbit sums",
                lattice.det().abs(),
                orbit_lattice.det().abs()
            ));
        }
        if lattice.det().abs() <= BigInt::from(ISOMORPHISM_ORDER_LIMIT)
            && !lattice
                .discriminant_form()?
                .is_isomorphic(&orbit_lattice.discriminant_form()?)?
        {
            return disagree("discriminant forms differ".into());
        }
        Ok(InvariantLattice {
            lattice,
            coordinates,
            orbit_generators,
            orbit_lattice,
        })
    }

    /// Whether every coordinate of `c` in the basis is divisible by `k`.
    pub fn divisible_by<S: AsRef<str>>(&self, basis: &[S], c: &DivisorClass, k: i64) -> Result<bool> {
        if k < 2 {
            return Err(Error::Inconsistent(format!("divisor {k} < 2")));
        }
        let x = self
            .in_span(basis, c)?
            .ok_or_else(|| Error::NotInSpan(c.to_string()))?;
        let k = BigInt::from(k);
        Ok(x.iter().all(|v| (v % &k).is_zero()))
    }
}
