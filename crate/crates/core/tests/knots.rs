use m4calc::arith::int;
use m4calc::knots::{alexander, fibered_genus, skein_check, AlexanderPolynomial, KnotDescriptor, KnotError, LaurentPoly};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn t_poly(pairs: &[(i64, i64)]) -> AlexanderPolynomial {
    AlexanderPolynomial::from_t_pairs(pairs).unwrap()
}

fn torus(p: i64, q: i64) -> KnotDescriptor {
    KnotDescriptor::Torus { p, q }
}

/// `det(V − tVᵀ)` for a 2×2 matrix, expanded by hand, as (t⁰, t¹, t²)
/// coefficients.
fn det2(v: [[i64; 2]; 2]) -> [i64; 3] {
    let [[a, b], [c, d]] = v;
    // (a − ta)(d − td) − (b − tc)(c − tb)
    let t0 = a * d - b * c;
    let t1 = -2 * a * d + b * b + c * c;
    let t2 = a * d - c * b;
    [t0, t1, t2]
}

#[test]
fn seifert_trefoil_matches_hand_expansion() {
    let v = [[-1, 1], [0, -1]];
    let [c0, c1, c2] = det2(v);
    assert_eq!(c0, c2);
    // Centre the quadratic and normalize Δ(1) = 1.
    let sign = if c0 + c1 + c2 > 0 { 1 } else { -1 };
    let want = t_poly(&[(-1, sign * c0), (0, sign * c1), (1, sign * c2)]);
    let got = alexander(&KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: true }).unwrap();
    assert_eq!(got, want);
    assert_eq!(got.to_string(), "t - 1 + t^-1");
}

#[test]
fn random_two_by_two_seifert_matrices() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..40 {
        let (a, d, s) = (rng.gen_range(-4..=4), rng.gen_range(-4..=4), rng.gen_range(-4..=4));
        // b − c = 1 makes V − Vᵀ unimodular.
        let v = [[a, s + 1], [s, d]];
        let [c0, c1, c2] = det2(v);
        let sign = if c0 + c1 + c2 > 0 { 1 } else { -1 };
        let want = t_poly(&[(-1, sign * c0), (0, sign * c1), (1, sign * c2)]);
        let got = alexander(&KnotDescriptor::Seifert { matrix: v.iter().map(|r| r.to_vec()).collect(), fibered: false }).unwrap();
        assert_eq!(got, want, "{v:?}");
    }
}

/// `(t^{pq} − 1)(t − 1) / ((t^p − 1)(t^q − 1))` by long division over
/// plain coefficient vectors, re-centred to be symmetric.
fn torus_oracle(p: usize, q: usize) -> Vec<(i64, i64)> {
    let mul = |a: &[i64], b: &[i64]| {
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let binom = |n: usize| {
        let mut v = vec![0i64; n + 1];
        v[0] = -1;
        v[n] = 1;
        v
    };
    let mut num = mul(&binom(p * q), &binom(1));
    let den = mul(&binom(p), &binom(q));
    let mut quot = vec![0i64; num.len() - den.len() + 1];
    for i in (0..quot.len()).rev() {
        let c = num[i + den.len() - 1] / den[den.len() - 1];
        quot[i] = c;
        for (j, d) in den.iter().enumerate() {
            num[i + j] -= c * d;
        }
    }
    assert!(num.iter().all(|&x| x == 0), "division is exact");
    let shift = (quot.len() as i64 - 1) / 2;
    quot.iter().enumerate().filter(|(_, c)| **c != 0).map(|(i, c)| (i as i64 - shift, *c)).collect()
}

#[test]
fn torus_closed_form_matches_division_oracle() {
    for (p, q) in [(2, 3), (2, 5), (2, 7), (2, 9), (3, 4), (3, 5), (4, 5)] {
        let got = alexander(&torus(p as i64, q as i64)).unwrap();
        assert_eq!(got, t_poly(&torus_oracle(p, q)), "T({p},{q})");
        assert_eq!(got.degree(), ((p - 1) * (q - 1) / 2) as i64);
        assert_eq!(fibered_genus(&torus(p as i64, q as i64)).unwrap(), got.degree());
    }
    assert_eq!(alexander(&torus(2, 5)).unwrap().to_string(), "t^2 - t + 1 - t^-1 + t^-2");
}

#[test]
fn genus_examples() {
    assert_eq!(fibered_genus(&KnotDescriptor::Unknot).unwrap(), 0);
    assert_eq!(fibered_genus(&torus(2, 3)).unwrap(), 1);
    assert_eq!(fibered_genus(&torus(3, 4)).unwrap(), 3);
    assert_eq!(alexander(&KnotDescriptor::Unknot).unwrap(), AlexanderPolynomial::one());
}

#[test]
fn skein_relation() {
    let u = |pairs: &[(i64, i64)]| LaurentPoly::from_pairs(pairs);
    let tref = KnotDescriptor::trefoil();
    // Δ_{K+} − Δ_{K−} = (t^{1/2} − t^{−1/2}) Δ_{K0}; for trefoil/unknot the
    // resolution is the Hopf link with Δ = ±(t^{1/2} − t^{−1/2}).
    assert!(skein_check(&tref, &KnotDescriptor::Unknot, &u(&[(1, 1), (-1, -1)])).unwrap());
    assert!(!skein_check(&tref, &KnotDescriptor::Unknot, &u(&[(1, 1), (-1, 1)])).unwrap());
    assert!(skein_check(&tref, &tref, &LaurentPoly::zero()).unwrap());
    assert!(!skein_check(&torus(2, 5), &tref, &u(&[(3, 1), (-3, 1)])).unwrap());
    assert!(skein_check(&torus(2, 5), &tref, &u(&[(3, 1), (1, -1), (-1, 1), (-3, -1)])).unwrap());
}

#[test]
fn invalid_knots() {
    assert!(alexander(&torus(2, 4)).is_err());
    assert!(alexander(&KnotDescriptor::Seifert { matrix: vec![vec![1, 0], vec![0, 1]], fibered: false }).is_err());
    assert!(matches!(
        alexander(&KnotDescriptor::Seifert { matrix: vec![vec![2, 1], vec![1, 2]], fibered: false }),
        Err(KnotError::NotAKnot(_))
    ));
    let v = KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: false };
    assert_eq!(fibered_genus(&v), Err(KnotError::NotFibered));
    assert_eq!(alexander(&v).unwrap().eval_one(), int(1));
}

#[test]
fn descriptor_json() {
    for k in [KnotDescriptor::Unknot, torus(2, 3), KnotDescriptor::Seifert { matrix: vec![vec![-1, 1], vec![0, -1]], fibered: true }] {
        let back: KnotDescriptor = serde_json::from_value(k.to_json()).unwrap();
        assert_eq!(back, k);
    }
}
