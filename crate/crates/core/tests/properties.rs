use k3lat::finquad::{FiniteQuadraticForm, FormSymbol};
use k3lat::lattice::{parse_lattice_expr, root_a, root_d, root_e, tree_t, Lattice};
use k3lat::snf::{integer_solve, saturated_kernel, smith_normal_form};
use k3lat::weierstrass::{classify_fiber, euler_sum, fiber_census, KodairaFiber, PlaceKey, RatPoly, WeierstrassModel};
use k3lat::{Error, IntMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn int_matrix(max_rows: usize, max_cols: usize, bound: i64) -> impl Strategy<Value = IntMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        prop::collection::vec(prop::collection::vec(-bound..=bound, c), r)
            .prop_map(|rows| IntMatrix::from_rows(&rows))
    })
}

fn row_ops() -> impl Strategy<Value = Vec<(usize, usize, i64)>> {
    prop::collection::vec((0usize..64, 0usize..64, -2i64..=2), 0..48)
}

/// Product of elementary matrices of size `n`, indices taken mod `n`.
fn unimodular(n: usize, ops: &[(usize, usize, i64)]) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    for &(i, j, k) in ops {
        let (i, j) = (i % n, j % n);
        if i != j {
            m.add_row_multiple(i, j, &BigInt::from(k));
        }
    }
    m
}

fn congruent(l: &Lattice, p: &IntMatrix) -> Lattice {
    let g = p.checked_mul(l.gram()).unwrap().checked_mul(&p.transpose()).unwrap();
    Lattice::from_gram(&g).unwrap()
}

fn milgram_holds(l: &Lattice) -> bool {
    let (tp, tm) = l.signature();
    let expected = (tp as i64 - tm as i64).rem_euclid(8) as u8;
    l.discriminant_form().unwrap().signature_mod8().unwrap() == expected
}

/// Root lattices, hyperbolic planes and rank-one lattices used across the
/// lattice properties.
fn constructors() -> Vec<Lattice> {
    let mut out = Vec::new();
    for n in 1..=8 {
        out.push(root_a(n).unwrap());
    }
    for n in 4..=8 {
        out.push(root_d(n).unwrap());
    }
    for n in 6..=8 {
        out.push(root_e(n).unwrap());
    }
    for expr in ["U", "U(2)", "U(3)", "U(4)", "<2>", "<-2>", "<-4>", "<6>", "<-8>", "<12>", "U(-2)"] {
        out.push(parse_lattice_expr(expr).unwrap());
    }
    for (p, q, r) in [(2, 3, 7), (2, 4, 5), (2, 5, 6), (3, 3, 4), (3, 4, 4), (4, 4, 4)] {
        out.push(tree_t(p, q, r).unwrap());
    }
    out
}

#[test]
fn milgram_on_every_constructor() {
    for l in constructors() {
        assert!(milgram_holds(&l), "{l}");
        let q = l.discriminant_form().unwrap();
        assert!(q.is_isomorphic(&l.discriminant_form_by_inverse().unwrap()).unwrap(), "{l}");
    }
}

/// Determinant by rational Gaussian elimination, independent of the
/// fraction-free routine in the library.
fn rational_det(rows: &[Vec<i64>]) -> BigRational {
    let n = rows.len();
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for i in c + 1..n {
            let f = &a[i][c] / &a[c][c];
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

/// Gram matrix of a star with legs of the given vertex counts (center
/// included in each count), diagonal -2.
fn tree_gram(legs: &[usize]) -> Vec<Vec<i64>> {
    let n = legs.iter().sum::<usize>() + 1 - legs.len();
    let mut g = vec![vec![0; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        row[i] = -2;
    }
    let mut v = 1;
    for &len in legs {
        let mut prev = 0;
        for _ in 1..len {
            g[prev][v] = 1;
            g[v][prev] = 1;
            prev = v;
            v += 1;
        }
    }
    g
}

#[test]
fn tree_determinants_match_the_closed_form() {
    for p in 2..=6i64 {
        for q in 2..=6i64 {
            for r in 2..=6i64 {
                let brute = rational_det(&tree_gram(&[p as usize, q as usize, r as usize]));
                let closed = (p * q + q * r + r * p - p * q * r).abs();
                assert_eq!(brute.abs(), BigRational::from_integer(closed.into()), "T({p},{q},{r})");
                match tree_t(p as usize, q as usize, r as usize) {
                    Ok(t) => {
                        assert_eq!(t.det().abs(), BigInt::from(closed));
                        assert_eq!(t.rank() as i64, p + q + r - 2);
                    }
                    Err(Error::Degenerate(_)) => assert_eq!(closed, 0),
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }
}

fn standard_symbol() -> impl Strategy<Value = FormSymbol> {
    prop_oneof![
        (1u32..=3, prop::sample::select(vec![1i64, 3, 5, 7]))
            .prop_map(|(k, eps)| FormSymbol::Omega { p: 2, k, eps: if k == 1 { eps % 4 } else { eps } }),
        (prop::sample::select(vec![3u64, 5, 7]), 1u32..=2, prop::sample::select(vec![1i64, -1]))
            .prop_map(|(p, k, eps)| FormSymbol::Omega { p, k, eps }),
        (1u32..=2).prop_map(FormSymbol::U),
        (1u32..=2).prop_map(FormSymbol::V),
    ]
}

fn small_form() -> impl Strategy<Value = FiniteQuadraticForm> {
    prop::collection::vec(standard_symbol(), 1..=2).prop_filter_map("valid standard form", |symbols| {
        symbols.into_iter().try_fold(FiniteQuadraticForm::trivial(), |acc, s| {
            FiniteQuadraticForm::make_standard(s).ok().map(|f| acc.direct_sum(&f))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(500) })]

    #[test]
    fn smith_normal_form_is_correct(a in int_matrix(5, 5, 12)) {
        let d = smith_normal_form(&a);
        prop_assert_eq!(d.u.det().unwrap().abs(), BigInt::one());
        prop_assert_eq!(d.v.det().unwrap().abs(), BigInt::one());
        prop_assert_eq!(d.u.checked_mul(&a).unwrap().checked_mul(&d.v).unwrap(), d.s.clone());
        prop_assert!(d.s.is_diagonal());
        let diag = d.diagonal();
        prop_assert!(diag.iter().all(|x| !x.is_negative()));
        for w in diag.windows(2) {
            if !w[1].is_zero() {
                prop_assert!((&w[1] % &w[0]).is_zero(), "{} does not divide {}", w[0], w[1]);
            } else {
                // zeros only at the end
                prop_assert!(diag.iter().skip_while(|x| !x.is_zero()).all(Zero::is_zero));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(100) })]

    #[test]
    fn milgram_on_unimodular_conjugates(idx in 0usize..36, ops in row_ops()) {
        let pool = constructors();
        let l = &pool[idx % pool.len()];
        let p = unimodular(l.rank(), &ops);
        let m = congruent(l, &p);
        prop_assert!(milgram_holds(&m));
        prop_assert_eq!(m.det(), l.det());
        let (q, r) = (l.discriminant_form().unwrap(), m.discriminant_form().unwrap());
        prop_assert!(q.is_isomorphic(&r).unwrap());
        prop_assert!(r.is_isomorphic(&m.discriminant_form_by_inverse().unwrap()).unwrap());
    }

    #[test]
    fn discriminant_of_direct_sum(i in 0usize..36, j in 0usize..36) {
        let pool = constructors();
        let (l, m) = (&pool[i % pool.len()], &pool[j % pool.len()]);
        let sum = l.direct_sum(m);
        let q = sum.discriminant_form().unwrap();
        let expected = l.discriminant_form().unwrap().direct_sum(&m.discriminant_form().unwrap());
        prop_assert_eq!(q.order(), expected.order());
        if q.order() <= BigInt::from(1024) {
            prop_assert!(q.is_isomorphic(&expected).unwrap());
        }
        prop_assert_eq!(q.signature_mod8().unwrap(), expected.signature_mod8().unwrap());
    }

    #[test]
    fn saturated_kernel_is_a_saturated_kernel(a in int_matrix(4, 6, 5)) {
        let k = saturated_kernel(&a);
        for i in 0..k.rows() {
            prop_assert!(a.mul_vec(&k.row_vec(i)).unwrap().iter().all(Zero::is_zero));
        }
        prop_assert_eq!(k.rows(), a.cols() - smith_normal_form(&a).rank());
        if k.rows() > 0 {
            prop_assert!(smith_normal_form(&k).elementary_divisors().iter().all(One::is_one));
        }
        // any integral solution of a system is recovered by integer_solve
        let x: Vec<BigInt> = (0..a.cols()).map(|i| BigInt::from(i as i64 - 2)).collect();
        let b = a.mul_vec(&x).unwrap();
        let y = integer_solve(&a, &b).unwrap();
        prop_assert_eq!(a.mul_vec(&y).unwrap(), b);
    }

    #[test]
    fn form_signature_is_additive(q in small_form(), r in small_form()) {
        let s = q.direct_sum(&r);
        let expected = (q.signature_mod8().unwrap() + r.signature_mod8().unwrap()) % 8;
        prop_assert_eq!(s.signature_mod8().unwrap(), expected);
        prop_assert_eq!(s.signature_mod8_float().unwrap(), expected);
        prop_assert!(s.gauss_modulus_is_exact().unwrap());
    }

    #[test]
    fn form_isomorphism_ignores_summand_order(q in small_form(), r in small_form()) {
        let (a, b) = (q.direct_sum(&r), r.direct_sum(&q));
        prop_assume!(a.order() <= BigInt::from(1024));
        prop_assert!(a.is_isomorphic(&b).unwrap());
        prop_assert!(a.check_polarization().unwrap());
        prop_assert_eq!(a.value_multiset().unwrap(), b.value_multiset().unwrap());
    }
}

fn rat_poly(max_deg: usize, bound: i64) -> impl Strategy<Value = RatPoly> {
    prop::collection::vec((-bound..=bound, 1i64..=3), 0..=max_deg + 1).prop_map(|cs| {
        RatPoly::from_coeffs(cs.into_iter().map(|(n, d)| BigRational::new(n.into(), d.into())).collect())
    })
}

fn t_pow(k: usize) -> RatPoly {
    RatPoly::monomial(BigRational::one(), k)
}

fn i_n_model(n: usize, a: i64, c: i64, star: bool) -> WeierstrassModel {
    // A = -3u², B = 2u³ + c tⁿ with u(0) ≠ 0 gives Δ = 27c tⁿ (4u³ + c tⁿ)
    let u = RatPoly::from_i64(&[1, a]);
    let mut big_a = &RatPoly::from_i64(&[-3]) * &u.pow(2);
    let mut big_b = &(&RatPoly::from_i64(&[2]) * &u.pow(3)) + &RatPoly::monomial(BigRational::from_integer(c.into()), n);
    if star {
        big_a = &big_a * &t_pow(2);
        big_b = &big_b * &t_pow(3);
    }
    WeierstrassModel::new(big_a, big_b).unwrap()
}

fn fiber_at_zero(m: &WeierstrassModel) -> KodairaFiber {
    // the factor vanishing at t = 0; it may carry other roots of Δ as well
    let p = m
        .places()
        .into_iter()
        .find(|p| matches!(&p.place, PlaceKey::Finite(f) if f.coeff(0).is_zero()))
        .unwrap();
    classify_fiber(p.a, p.b, p.delta).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(50) })]

    #[test]
    fn multiplicative_models(n in 1usize..=9, a in -3i64..=3, c in prop::sample::select(vec![-2i64, -1, 1, 3])) {
        prop_assert_eq!(fiber_at_zero(&i_n_model(n, a, c, false)), KodairaFiber::I(n as u32));
        prop_assert_eq!(fiber_at_zero(&i_n_model(n, a, c, true)), KodairaFiber::IStar(n as u32));
    }

    #[test]
    fn random_models_spend_the_euler_budget(a in rat_poly(8, 4), b in rat_poly(12, 4)) {
        let m = match WeierstrassModel::new(a, b) {
            Ok(m) => m,
            Err(Error::ZeroDiscriminant) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        match m.fibers() {
            Ok(fibers) => {
                for (p, f) in &fibers {
                    // in characteristic zero e_v equals the vanishing order of Δ
                    prop_assert_eq!(k3lat::weierstrass::Order::Finite(f.euler()), p.delta);
                }
                prop_assert_eq!(euler_sum(&fiber_census(&fibers)), 24);
            }
            Err(Error::NonMinimal(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn polynomial_text_round_trips(p in rat_poly(12, 50)) {
        prop_assert_eq!(RatPoly::parse(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn squarefree_decomposition_reassembles(p in rat_poly(5, 3), q in rat_poly(3, 3)) {
        prop_assume!(!p.is_constant() && !q.is_zero());
        let f = &(&p * &q.pow(2)) * &p;
        let parts = f.squarefree_decomposition();
        let product = parts.iter().fold(RatPoly::one(), |acc, (a, i)| &acc * &a.pow(*i));
        prop_assert_eq!(product, f.monic());
        for (i, (a, _)) in parts.iter().enumerate() {
            prop_assert!(a.gcd(&a.derivative()).is_constant());
            for (b, _) in &parts[i + 1..] {
                prop_assert!(a.gcd(b).is_constant());
            }
        }
    }
}
