use std::path::PathBuf;

use k3lat::curveconf::{CurveConfig, DivisorClass};
use k3lat::finquad::parse_form;
use k3lat::lattice::{identify, is_primitive_sublattice, Lattice};
use k3lat::IntMatrix;
use num_bigint::BigInt;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MENU: [&str; 6] = ["U+E8+A3", "T(2,5,6)", "U(2)+D4+<-8>", "T(4,4,4)", "T(3,4,4)", "U+D4+<-8>"];
const PICARD_MENU: [&str; 3] = ["U+E8+D4", "U(2)+D4+E8", "U+D4+D4+D4"];

fn load(name: &str) -> CurveConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    CurveConfig::from_path(path).unwrap()
}

fn basis(c: &CurveConfig) -> Vec<String> {
    c.declared_basis().unwrap().to_vec()
}

fn invariant(file: &str, auto: &str) -> Lattice {
    let c = load(file);
    let g = c.automorphism(auto).unwrap();
    c.invariant_lattice(&basis(&c), &g).unwrap().lattice
}

#[test]
fn invariant_lattices_of_every_case() {
    let cases = [
        ("x2.json", "sigma", 13, "U+E8+A3"),
        ("x4_sigma.json", "sigma", 11, "T(2,5,6)"),
        ("x4_sigma_prime.json", "sigma_prime", 7, "U(2)+D4+<-8>"),
        ("x6_sigma8.json", "sigma8", 10, "T(4,4,4)"),
        ("x6_sigma.json", "sigma", 9, "T(3,4,4)"),
        ("x6_sigma_prime.json", "sigma_prime", 7, "U+D4+<-8>"),
    ];
    for (file, auto, r, name) in cases {
        let l = invariant(file, auto);
        assert_eq!(l.rank(), r, "{file}");
        assert_eq!(identify(&l, &MENU).unwrap().as_deref(), Some(name), "{file}");
    }
}

#[test]
fn invariant_discriminant_forms() {
    let cases = [
        ("x2.json", "sigma", "w(2,2,5)"),
        ("x4_sigma.json", "sigma", "w(2,3,-5)"),
        ("x4_sigma_prime.json", "sigma_prime", "u(1)+v(1)+w(2,3,-1)"),
        ("x6_sigma.json", "sigma", "w(2,3,5)"),
        ("x6_sigma_prime.json", "sigma_prime", "v(1)+w(2,3,-1)"),
    ];
    for (file, auto, form) in cases {
        let q = invariant(file, auto).discriminant_form().unwrap();
        assert!(q.is_isomorphic(&parse_form(form).unwrap()).unwrap(), "{file}: {q}");
    }
}

#[test]
fn picard_lattices() {
    let all = |c: &CurveConfig| -> Vec<DivisorClass> { c.ids().iter().map(|i| DivisorClass::curve(i)).collect() };
    let cases = [
        ("x2.json", "U+E8+D4", 4),
        ("x4_sigma.json", "U(2)+D4+E8", 16),
        ("x6_picard.json", "U+D4+D4+D4", 64),
    ];
    for (file, name, det) in cases {
        let c = load(file);
        let l = c.lattice_of(&all(&c)).unwrap();
        assert_eq!(l.rank(), 14, "{file}");
        assert_eq!(l.det().abs(), BigInt::from(det), "{file}");
        assert_eq!(identify(&l, &PICARD_MENU).unwrap().as_deref(), Some(name), "{file}");
        // the declared basis spans the same lattice
        let b = c.lattice_of(&basis(&c).iter().map(|i| DivisorClass::curve(i)).collect::<Vec<_>>()).unwrap();
        assert_eq!(b.det(), l.det(), "{file}");
    }
    let c = load("x2.json");
    let q = c.lattice_of(&all(&c)).unwrap().discriminant_form().unwrap();
    assert!(q.is_isomorphic(&parse_form("v(1)").unwrap()).unwrap());
}

#[test]
fn powers_of_every_automorphism() {
    let files = ["x2.json", "x4_sigma.json", "x4_sigma_prime.json", "x6_sigma.json", "x6_sigma8.json", "x6_sigma_prime.json"];
    for file in files {
        let c = load(file);
        let b = basis(&c);
        let ambient = c.lattice_of(&b.iter().map(|i| DivisorClass::curve(i)).collect::<Vec<_>>()).unwrap();
        let names: Vec<String> = c.automorphism_names().map(String::from).collect();
        for name in names {
            let mut prev_rank = 0;
            for k in [1, 2, 4, 8] {
                let g = c.automorphism(&format!("{name}^{k}")).unwrap();
                // kernel and orbit sums must agree, or this errors
                let inv = c.invariant_lattice(&b, &g).unwrap();
                assert!(is_primitive_sublattice(&ambient, &inv.coordinates).unwrap());
                assert!(inv.lattice.rank() >= prev_rank, "{file} {name}^{k}");
                prev_rank = inv.lattice.rank();
            }
        }
    }
}

#[test]
fn alternate_x2_basis() {
    let c = load("x2.json");
    let g = c.automorphism("sigma").unwrap();
    // drop D3 and use the one curve the declared basis leaves out instead
    let declared = basis(&c);
    let extra = c.ids().iter().find(|i| !declared.contains(i)).unwrap().clone();
    let alt: Vec<String> = declared.iter().filter(|i| *i != "D3").cloned().chain([extra]).collect();
    assert_eq!(alt.len(), 14);
    let a = c.invariant_lattice(&alt, &g).unwrap().lattice;
    let b = invariant("x2.json", "sigma");
    assert_eq!(a.rank(), b.rank());
    assert_eq!(a.det(), b.det());
    assert!(a.discriminant_form().unwrap().is_isomorphic(&b.discriminant_form().unwrap()).unwrap());
    assert_eq!(identify(&a, &MENU).unwrap().as_deref(), Some("U+E8+A3"));
}

fn random_unimodular(n: usize, rng: &mut ChaCha8Rng) -> IntMatrix {
    let mut m = IntMatrix::identity(n);
    for _ in 0..3 * n {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            m.add_row_multiple(i, j, &BigInt::from(rng.gen_range(-2..=2)));
        }
    }
    m
}

#[test]
fn identification_ignores_the_choice_of_basis() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (file, auto, name) in [("x2.json", "sigma", "U+E8+A3"), ("x6_sigma.json", "sigma", "T(3,4,4)")] {
        let l = invariant(file, auto);
        for _ in 0..5 {
            let p = random_unimodular(l.rank(), &mut rng);
            let g = p.checked_mul(l.gram()).unwrap().checked_mul(&p.transpose()).unwrap();
            let m = Lattice::from_gram(&g).unwrap();
            assert_eq!(identify(&m, &MENU).unwrap().as_deref(), Some(name));
        }
    }
}

#[test]
fn fiber_class_divisibility() {
    let c = load("x6_picard.json");
    let b = basis(&c);
    let f = DivisorClass::parse("4*E0+2*E1+2*E2+2*E3+2*E4+2*E5+2*E6").unwrap();
    assert!(c.divisible_by(&b, &f, 2).unwrap());
    // sum of the curves fixed by sigma^8, with C the smooth fiber outside the basis
    let fixed = DivisorClass::parse("C+E0+E4+E5+E6").unwrap();
    assert_eq!(c.in_span(&b, &fixed).unwrap(), c.in_span(&b, &f).unwrap());
    assert!(c.divisible_by(&b, &fixed, 2).unwrap());
    let fiber = DivisorClass::parse("3*E0+2*E1+2*E2+2*E3+E4+E5+E6").unwrap();
    assert_eq!(c.in_span(&b, &DivisorClass::curve("C")).unwrap(), c.in_span(&b, &fiber).unwrap());
    for id in &b {
        assert!(!c.divisible_by(&b, &DivisorClass::curve(id), 2).unwrap(), "{id}");
    }
}

#[test]
fn in_span_rejects_classes_outside_the_basis_lattice() {
    let c = load("x6_picard.json");
    let b = basis(&c);
    let f = DivisorClass::parse("3*E0+2*E1+2*E2+2*E3+E4+E5+E6").unwrap();
    let x = c.in_span(&b, &f).unwrap().unwrap();
    assert_eq!(x[0], BigInt::from(3));
    // without P5c the remaining curves have rank 13, and P5c is independent of them
    let smaller: Vec<&String> = b.iter().filter(|i| *i != "P5c").collect();
    assert_eq!(c.in_span(&smaller, &DivisorClass::curve("P5c")).unwrap(), None);
    // the fiber class E0-type combination halves only when all coefficients are even
    let odd = DivisorClass::parse("2*E0+E1+E2+E3+E4+E5+E6").unwrap();
    assert!(!c.divisible_by(&b, &odd, 2).unwrap());
}
