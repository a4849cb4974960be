//! Exact rational checks of the capacitance pipeline, plus invariants on
//! random networks.

use airbridge_core::capnet::{
    build_matrix, build_matrix_default, floating_pair_transform, reduce_and_invert,
    transform_matrix, CapacitanceNetwork,
};
use airbridge_core::quantize::{
    airbridge_pair_network, calibrate_shunts, qubit_inverse_block, AIRBRIDGE_PAIR_PADS,
};
use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

type Q = BigRational;

fn q(x: f64) -> Q {
    Q::from_float(x).expect("finite")
}

/// Gauss–Jordan inverse over the rationals.
// rows col and r are both borrowed, so index rather than iterate
#[allow(clippy::needless_range_loop)]
fn exact_inverse(m: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .expect("nonsingular");
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..2 * n {
                    let delta = &f * &a[col][c];
                    a[r][c] = &a[r][c] - delta;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Maxwell matrix of `net` in node order, as exact rationals.
fn exact_maxwell(net: &CapacitanceNetwork) -> Vec<Vec<Q>> {
    let nodes = net.nodes();
    let n = nodes.len();
    let mut m = vec![vec![Q::zero(); n]; n];
    for (i, a) in nodes.iter().enumerate() {
        m[i][i] = q(net.ground(a));
        for (j, b) in nodes.iter().enumerate() {
            if i != j {
                let c = q(net.pair(a, b));
                m[i][i] = &m[i][i] + &c;
                m[i][j] = -c;
            }
        }
    }
    m
}

/// `sᵀ M s'` for the flux directions `s`, `s'` given as signed node indices.
fn quad(m: &[Vec<Q>], s: &[(usize, i64)], t: &[(usize, i64)]) -> Q {
    let mut acc = Q::zero();
    for &(i, si) in s {
        for &(j, tj) in t {
            acc += &m[i][j] * Q::from_integer(BigInt::from(si * tj));
        }
    }
    acc
}

fn rel_err(x: f64, exact: &Q) -> f64 {
    let e = exact.to_f64().unwrap();
    ((x - e) / e).abs()
}

#[test]
fn reference_pair_inverse_block_matches_rational_oracle() {
    let base = airbridge_pair_network(60.0, 29.5, 6.67, 6.75, 0.0, 0.0).unwrap();
    let net = calibrate_shunts(&base, &AIRBRIDGE_PAIR_PADS, &[83.8, 83.9]).unwrap();
    let block = qubit_inverse_block(&net, &AIRBRIDGE_PAIR_PADS).unwrap();

    // The qubit rows of S C⁻¹ Sᵀ: (S⁻¹)ᵀ C S⁻¹ inverts to S C⁻¹ Sᵀ.
    let cinv = exact_inverse(&exact_maxwell(&net));
    let s1 = [(1usize, 1i64), (0, -1)]; // Φ2 − Φ1
    let s2 = [(3usize, 1i64), (4, -1)]; // Φ4 − Φ5
    let a11 = quad(&cinv, &s1, &s1);
    let a22 = quad(&cinv, &s2, &s2);
    let a12 = quad(&cinv, &s1, &s2);

    assert!(rel_err(block.entries[(0, 0)], &a11) < 1e-12);
    assert!(rel_err(block.entries[(1, 1)], &a22) < 1e-12);
    assert!(rel_err(block.entries[(0, 1)], &a12) < 1e-10);
    assert!(a12.is_positive());
    assert!((1.0 / block.entries[(0, 0)] - 83.8).abs() < 1e-6);
    assert!((1.0 / block.entries[(1, 1)] - 83.9).abs() < 1e-6);
}

#[test]
fn reference_pair_shunts() {
    let base = airbridge_pair_network(60.0, 29.5, 6.67, 6.75, 0.0, 0.0).unwrap();
    let net = calibrate_shunts(&base, &AIRBRIDGE_PAIR_PADS, &[83.8, 83.9]).unwrap();
    assert!((net.pair("1", "2") - 52.4575).abs() < 1e-3);
    assert!((net.pair("4", "5") - 52.5449).abs() < 1e-3);
}

fn network_strategy() -> impl Strategy<Value = CapacitanceNetwork> {
    (2usize..7)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(1.0f64..100.0, n),
                prop::collection::vec(prop_oneof![Just(0.0), 0.1f64..50.0], n * (n - 1) / 2),
            )
        })
        .prop_map(|(n, ground, pairs)| {
            let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
            let mut net = CapacitanceNetwork::new(labels.clone()).unwrap();
            for (l, g) in labels.iter().zip(&ground) {
                net.set_ground(l, *g).unwrap();
            }
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    net.set_pair(&labels[i], &labels[j], pairs[k]).unwrap();
                    k += 1;
                }
            }
            net
        })
}

proptest! {
    #[test]
    fn maxwell_matrix_structure(net in network_strategy()) {
        let c = build_matrix_default(&net).unwrap();
        let n = c.dim();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| c.entries[(i, j)]).sum();
            prop_assert!((row - net.ground(&c.labels[i])).abs() < 1e-9);
            for j in 0..n {
                prop_assert_eq!(c.entries[(i, j)], c.entries[(j, i)]);
                if i != j {
                    prop_assert!(c.entries[(i, j)] <= 0.0);
                }
            }
        }
        prop_assert!(c.entries.clone().cholesky().is_some());
    }

    #[test]
    fn order_equivariance(net in network_strategy(), seed in any::<u64>()) {
        let mut order: Vec<&str> = net.nodes().iter().map(String::as_str).collect();
        let len = order.len();
        // deterministic shuffle from the seed
        let mut s = seed;
        for i in (1..len).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = build_matrix(&net, &order).unwrap();
        let b = build_matrix_default(&net).unwrap().permuted(&order).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn inverse_block_is_projection_of_inverse(net in network_strategy()) {
        let labels: Vec<&str> = net.nodes().iter().map(String::as_str).collect();
        let c = build_matrix_default(&net).unwrap();
        let (a, b) = (labels[0], labels[1]);
        let rest: Vec<&str> = labels[2..].to_vec();
        let s = floating_pair_transform(&labels, &[(a, b)], &rest).unwrap();
        let ct = transform_matrix(&c, &s).unwrap();
        let key = format!("{b}-{a}");
        let block = reduce_and_invert(&ct, &[key.as_str()]).unwrap();

        let cinv = c.entries.clone().try_inverse().unwrap();
        let mut d = DMatrix::zeros(labels.len(), 1);
        d[(0, 0)] = -1.0;
        d[(1, 0)] = 1.0;
        let expected = (d.transpose() * &cinv * &d)[(0, 0)];
        prop_assert!((block.entries[(0, 0)] / expected - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reversing_a_pair_flips_only_cross_terms(net in network_strategy().prop_filter("4+ nodes", |n| n.nodes().len() >= 4)) {
        let l: Vec<&str> = net.nodes().iter().map(String::as_str).collect();
        let forward = [(l[0], l[1]), (l[2], l[3])];
        let flipped = [(l[0], l[1]), (l[3], l[2])];
        let a = qubit_inverse_block(&net, &forward).unwrap();
        let b = qubit_inverse_block(&net, &flipped).unwrap();
        prop_assert!((a.entries[(0, 0)] - b.entries[(0, 0)]).abs() <= 1e-12 * a.entries[(0, 0)]);
        prop_assert!((a.entries[(1, 1)] - b.entries[(1, 1)]).abs() <= 1e-12 * a.entries[(1, 1)]);
        prop_assert!((a.entries[(0, 1)] + b.entries[(0, 1)]).abs() <= 1e-12 * a.entries[(0, 0)]);
    }
}
