use m4calc::arith::{rat, Rat};
use m4calc::lattice::{IntersectionLattice, LatticeVector};
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn k3_form() -> IntersectionLattice {
    let mut l = IntersectionLattice::empty();
    for i in 1..=3 {
        l = l.direct_sum(&IntersectionLattice::hyperbolic(&format!("H{i}"))).unwrap();
    }
    for j in 1..=2 {
        l = l.direct_sum(&IntersectionLattice::neg_e8(&format!("Q{j}"))).unwrap();
    }
    l
}

/// Sign counts by symmetric Gaussian elimination with a 2×2 fallback,
/// written independently of the library.
fn ldl_inertia(gram: &[Vec<i64>]) -> (usize, usize) {
    let mut a: Vec<Vec<Rat>> = gram.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect();
    let (mut pos, mut neg) = (0, 0);
    while !a.is_empty() {
        let n = a.len();
        if let Some(i) = (0..n).find(|&i| !a[i][i].is_zero()) {
            a.swap(0, i);
            for r in a.iter_mut() {
                r.swap(0, i);
            }
            let p = a[0][0].clone();
            if p.is_positive() { pos += 1 } else { neg += 1 }
            let next: Vec<Vec<Rat>> = (1..n)
                .map(|r| (1..n).map(|c| &a[r][c] - &a[r][0] * &a[0][c] / &p).collect())
                .collect();
            a = next;
        } else if let Some(j) = (1..n).find(|&j| !a[0][j].is_zero()) {
            // zero diagonal: add row/column j to 0, which makes a[0][0] = 2 a[0][j].
            for c in 0..n {
                let v = a[j][c].clone();
                a[0][c] += v;
            }
            for r in 0..n {
                let v = a[r][j].clone();
                a[r][0] += v;
            }
        } else {
            for r in a.iter_mut() {
                r.remove(0);
            }
            a.remove(0);
        }
    }
    (pos, neg)
}

#[test]
fn signature_examples() {
    let d = IntersectionLattice::diagonal("e", 1, &[1, -1]);
    let s = d.signature().unwrap();
    assert_eq!((s.b_plus, s.b_minus), (1, 1));
    let e8 = IntersectionLattice::neg_e8("Q");
    let s = e8.signature().unwrap();
    assert_eq!((s.b_plus, s.b_minus), (0, 8));
    assert_eq!(ldl_inertia(&e8.gram_i64().unwrap()), (0, 8));
    assert_eq!(e8.determinant(), 1.into());
    let k3 = k3_form();
    let s = k3.signature().unwrap();
    assert_eq!((s.b_plus, s.b_minus), (3, 19));
    assert_eq!(ldl_inertia(&k3.gram_i64().unwrap()), (3, 19));
}

#[test]
fn parity_examples() {
    assert_eq!(IntersectionLattice::diagonal("e", 1, &[-1]).parity(), 1);
    assert_eq!(IntersectionLattice::hyperbolic("H").parity(), 0);
    assert_eq!(k3_form().parity(), 0);
}

#[test]
fn characteristic_examples() {
    let h = IntersectionLattice::hyperbolic("H");
    assert!(h.is_characteristic(&LatticeVector::zero(2)).unwrap());
    let d1 = IntersectionLattice::diagonal("e", 1, &[-1]);
    assert!(d1.is_characteristic(&LatticeVector::from_ints(&[1])).unwrap());
    let d2 = IntersectionLattice::diagonal("e", 1, &[1, 1]);
    assert!(d2.is_characteristic(&LatticeVector::from_ints(&[1, 1])).unwrap());
    assert!(!d2.is_characteristic(&LatticeVector::from_ints(&[1, 0])).unwrap());
}

#[test]
fn van_der_blij_on_diagonal_forms() {
    for m in 0..=10 {
        let mut entries = vec![1];
        entries.extend(std::iter::repeat_n(-1, m));
        let l = IntersectionLattice::diagonal("e", 0, &entries);
        let k = l.characteristic_vector().unwrap();
        let sigma = 1 - m as i64;
        let sq = l.square(&k).to_integer();
        assert_eq!((sq - sigma) % 8, 0.into());
    }
}

#[test]
fn complement_examples() {
    let l = IntersectionLattice::diagonal("e", 1, &[1, -1, -1]);
    let c = l.orthogonal_complement(&[LatticeVector::from_ints(&[0, 0, 1])]).unwrap();
    assert_eq!(c.lattice.gram_i64().unwrap(), vec![vec![1, 0], vec![0, -1]]);
    let l = IntersectionLattice::diagonal("a", 1, &[-4]).direct_sum(&IntersectionLattice::diagonal("b", 1, &[1, 1])).unwrap();
    let c = l.orthogonal_complement(&[LatticeVector::from_ints(&[1, 0, 0])]).unwrap();
    assert_eq!(c.lattice.gram_i64().unwrap(), vec![vec![1, 0], vec![0, 1]]);
}

/// Random unimodular matrix as a product of elementary row operations.
fn random_unimodular(rng: &mut StdRng, n: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..(3 * n) {
        let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if i == j {
            continue;
        }
        let k = rng.gen_range(-2..=2);
        for c in 0..n {
            m[i][c] += k * m[j][c];
        }
    }
    m
}

fn congruent(g: &[Vec<i64>], p: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = g.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| p[i][a] * g[a][b] * p[j][b]).sum())
                .collect()
        })
        .collect()
}

#[test]
fn complement_brute_force() {
    let mut rng = StdRng::seed_from_u64(5);
    let labels: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    for _ in 0..20 {
        let diag: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| if i != j { 0 } else if rng.gen_bool(0.5) { 1 } else { -1 }).collect()).collect();
        let gram = congruent(&diag, &random_unimodular(&mut rng, 5));
        let l = IntersectionLattice::from_rows(&labels, &gram).unwrap();
        let count = rng.gen_range(1..=2);
        let vs: Vec<LatticeVector> = (0..count)
            .map(|_| LatticeVector::from_ints(&(0..5).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>()))
            .collect();
        let Ok(c) = l.orthogonal_complement(&vs) else { continue };
        for b in &c.embedding {
            for v in &vs {
                assert!(l.pair(b, v).is_zero());
            }
        }
        let box_r = 2;
        let mut x = vec![-box_r; 5];
        loop {
            let w = LatticeVector::from_ints(&x);
            if vs.iter().all(|v| l.pair(&w, v).is_zero()) {
                let coords = c.coordinates_of(&w).expect("orthogonal vector outside the complement span");
                assert!(coords.is_integral(), "{w} has fractional complement coordinates");
            }
            let mut i = 0;
            while i < 5 && x[i] == box_r {
                x[i] = -box_r;
                i += 1;
            }
            if i == 5 {
                break;
            }
            x[i] += 1;
        }
    }
}

proptest! {
    #[test]
    fn signature_and_parity_are_basis_invariant(seed in any::<u64>(), pos in 0usize..3, neg in 0usize..4, even in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let base = if even {
            let mut l = IntersectionLattice::empty();
            for i in 0..pos.max(1) {
                l = l.direct_sum(&IntersectionLattice::hyperbolic(&format!("H{i}"))).unwrap();
            }
            l
        } else {
            let mut e = vec![1; pos];
            e.extend(std::iter::repeat_n(-1, neg.max(1)));
            IntersectionLattice::diagonal("e", 1, &e)
        };
        let g = base.gram_i64().unwrap();
        let n = g.len();
        let moved = congruent(&g, &random_unimodular(&mut rng, n));
        let labels: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let l = IntersectionLattice::from_rows(&labels, &moved).unwrap();
        prop_assert_eq!(l.signature().unwrap(), base.signature().unwrap());
        prop_assert_eq!(l.parity(), base.parity());
        prop_assert_eq!(ldl_inertia(&moved), (base.signature().unwrap().b_plus, base.signature().unwrap().b_minus));
        prop_assert_eq!(l.determinant().abs(), base.determinant().abs());
    }
}
