#![allow(dead_code)]

use std::sync::Arc;

use m4calc::arith::Int;
use m4calc::knots::KnotDescriptor;
use m4calc::lattice::{IntersectionLattice, LatticeVector};
use m4calc::manifold::{HomeoType, ManifoldModel, Provenance, SwStatus};
use m4calc::surgery::{self, FiberSumOptions, PlumbingConfig};
use m4calc::swring::SwPolynomial;

pub fn torus(p: i64, q: i64) -> KnotDescriptor {
    KnotDescriptor::Torus { p, q }
}

/// Models built by the engine from seeds and operations.
pub fn corpus() -> Vec<ManifoldModel> {
    let mut out = Vec::new();
    for n in 1..=4 {
        out.push(surgery::elliptic(n).unwrap());
    }
    let e2 = surgery::elliptic(2).unwrap();
    let e3 = surgery::elliptic(3).unwrap();
    for k in 1..=4 {
        out.push(surgery::knot_surgery(&e2, "fiber", &torus(2, 2 * k + 1)).unwrap());
    }
    out.push(surgery::knot_surgery(&e2, "fiber", &torus(3, 4)).unwrap());
    out.push(surgery::knot_surgery(&e3, "fiber", &KnotDescriptor::trefoil()).unwrap());
    out.push(surgery::knot_surgery(&surgery::elliptic(4).unwrap(), "fiber", &torus(2, 5)).unwrap());
    let b1 = surgery::blowup(&e2).unwrap();
    out.push(surgery::blowup(&b1).unwrap());
    out.push(b1);
    let k = surgery::knot_surgery(&e2, "fiber", &KnotDescriptor::trefoil()).unwrap();
    out.push(surgery::blowup(&k).unwrap());
    out.push(surgery::blowup(&e3).unwrap());
    for p in 2..=5 {
        out.push(surgery::log_transform(&e2, "fiber", p).unwrap());
    }
    for m in 0..=10 {
        out.push(surgery::blown_up_cp2(m).unwrap());
    }
    out.push(surgery::s2xs2().unwrap());
    let e1 = surgery::elliptic(1).unwrap();
    out.push(surgery::fiber_sum(&e1, "fiber", &e1, "fiber", 1, &FiberSumOptions::default()).unwrap());
    out.push(surgery::fiber_sum(&e2, "fiber", &e2, "fiber", 2, &FiberSumOptions::default()).unwrap());
    for p in 2..=6 {
        let (x, cfg) = blowdown_fixture(p);
        out.push(surgery::rational_blowdown(&x, &cfg).unwrap());
    }
    out
}

/// Models whose SW invariant the engine knows, for bound checks: elliptic
/// surfaces, their knot surgeries and blowups.
pub fn elliptic_family() -> Vec<ManifoldModel> {
    corpus()
        .into_iter()
        .filter(|m| m.sw.known().is_some() && m.name.starts_with("E("))
        .collect()
}

/// `3H ⊕ ⟨−1⟩^{p+3}` with the chain `C_p` in the first `p − 1` diagonal
/// classes: `u_1 = 2e_1 + e_2 + … + e_{p−1}`, `u_i = e_i − e_{i−1}`.
///
/// SW has four classes of dimension 0: `±K` with every `e`-coefficient
/// `1`, and `±K'` with `e_1`-coefficient `3` (balanced by a larger
/// hyperbolic part). Both project integrally and characteristically, but
/// only `±K` keep their formal dimension.
pub fn blowdown_fixture(p: u32) -> (ManifoldModel, PlumbingConfig) {
    let n = p as usize + 3;
    let lat = IntersectionLattice::hyperbolic("H1")
        .direct_sum(&IntersectionLattice::hyperbolic("H2"))
        .unwrap()
        .direct_sum(&IntersectionLattice::hyperbolic("H3"))
        .unwrap()
        .direct_sum(&IntersectionLattice::diagonal("e", 1, &vec![-1; n]))
        .unwrap();
    let rank = lat.rank();
    let e = |i: usize| LatticeVector::unit(rank, 5 + i);
    let mut classes = Vec::new();
    let mut u1 = e(1).scale(&m4calc::arith::rat(2));
    for i in 2..p as usize {
        u1 = &u1 + &e(i);
    }
    classes.push(u1);
    for i in 2..p as usize {
        classes.push(&e(i) - &e(i - 1));
    }
    let mut k = vec![2, 4, 0, 0, 0, 0];
    k.extend(std::iter::repeat_n(1, n));
    let mut k2 = k.clone();
    k2[1] = 6;
    k2[6] = 3;
    let neg = |v: &[i64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let lat = Arc::new(lat);
    let terms = [k.clone(), neg(&k), k2.clone(), neg(&k2)]
        .into_iter()
        .map(|v| (LatticeVector::from_ints(&v), Int::from(1)));
    let sw = SwPolynomial::from_terms(lat.clone(), Int::from(1), terms).unwrap();
    let x = ManifoldModel::from_lattice(
        format!("B{p}"),
        lat,
        SwStatus::Known(sw),
        Provenance::new("fixture", serde_json::json!({ "p": p }), vec![]),
    )
    .unwrap();
    (x, PlumbingConfig::new(p, classes))
}

fn fixture(name: &str, lat: IntersectionLattice, sw: impl FnOnce(Arc<IntersectionLattice>) -> SwStatus) -> ManifoldModel {
    let lat = Arc::new(lat);
    let sw = sw(lat.clone());
    ManifoldModel::from_lattice(name, lat, sw, Provenance::new("fixture", serde_json::Value::Null, vec![])).unwrap()
}

fn poly(lat: Arc<IntersectionLattice>, terms: &[(&[(&str, i64)], i64)]) -> SwStatus {
    let terms: Vec<_> = terms
        .iter()
        .map(|(v, c)| (lat.combination(v).unwrap(), Int::from(*c)))
        .collect();
    SwStatus::Known(SwPolynomial::from_terms(lat, Int::from(1), terms).unwrap())
}

/// `−E8 ⊕ H` declared spin: σ = −8 breaks Rokhlin.
pub fn rokhlin_fixture() -> ManifoldModel {
    let lat = IntersectionLattice::neg_e8("Q").direct_sum(&IntersectionLattice::hyperbolic("H")).unwrap();
    let m = fixture("rokhlin", lat, |_| SwStatus::Unknown);
    assert_eq!(m.homeo, HomeoType::new(12, -8, 0));
    m
}

fn e2_with(sw: &[(&[(&str, i64)], i64)]) -> ManifoldModel {
    let e2 = surgery::elliptic(2).unwrap();
    let lat = (*e2.lattice).clone();
    fixture("E(2)*", lat, |l| poly(l, sw))
}

/// `SW = t_F` on E(2): not symmetric.
pub fn asymmetric_fixture() -> ManifoldModel {
    e2_with(&[(&[("F", 1)], 1)])
}

/// `SW = t_{F+S} + t_{−F−S}` on the even lattice of E(2).
pub fn non_characteristic_fixture() -> ManifoldModel {
    e2_with(&[(&[("F", 1), ("S", 1)], 1), (&[("F", -1), ("S", -1)], 1)])
}

/// `SW = t_{2S} + t_{−2S}` on E(2): `(2S)² = −8 < c`, so `d = −2`.
pub fn negative_dimension_fixture() -> ManifoldModel {
    e2_with(&[(&[("S", 2)], 1), (&[("S", -2)], 1)])
}
