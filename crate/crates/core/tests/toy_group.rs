//! Exhaustive checks over the whole order-997 toy group.
//!
//! The reference table is built by textbook affine addition in plain
//! integers, independent of the crate's Jacobian arithmetic. Every point
//! and every pair is then checked against it.

use crypto_bigint::U256;
use roamauth::crypto::cdl::CdlOracle;
use roamauth::crypto::{kdf_point, Curve, CurveParams, GroupPoint, Scalar};

const P: i64 = 991;
const A: i64 = 3;
const B: i64 = 2;
const N: u64 = 997;

fn inv(x: i64) -> i64 {
    // Fermat; P is prime.
    let mut r = 1i64;
    let mut b = x.rem_euclid(P);
    let mut e = P - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % P;
        }
        b = b * b % P;
        e >>= 1;
    }
    r
}

fn textbook_add(p: Option<(i64, i64)>, q: Option<(i64, i64)>) -> Option<(i64, i64)> {
    let (Some((x1, y1)), Some((x2, y2))) = (p, q) else {
        return p.or(q);
    };
    if x1 == x2 && (y1 + y2) % P == 0 {
        return None;
    }
    let lam = if (x1, y1) == (x2, y2) {
        (3 * x1 * x1 + A) % P * inv(2 * y1) % P
    } else {
        (y2 - y1).rem_euclid(P) * inv(x2 - x1) % P
    };
    let x3 = (lam * lam - x1 - x2).rem_euclid(P);
    Some((x3, (lam * (x1 - x3) - y1).rem_euclid(P)))
}

fn to_point(p: Option<(i64, i64)>) -> GroupPoint {
    match p {
        None => GroupPoint::Infinity,
        Some((x, y)) => GroupPoint::Affine {
            x: U256::from_u64(x as u64),
            y: U256::from_u64(y as u64),
        },
    }
}

/// `table[k] = k·G` for k in 0..N.
fn reference_table() -> Vec<GroupPoint> {
    let mut out = vec![GroupPoint::Infinity];
    let mut acc = None;
    for _ in 1..N {
        acc = textbook_add(acc, Some((0, 420)));
        out.push(to_point(acc));
    }
    out
}

fn toy() -> Curve {
    Curve::new(CurveParams::toy()).unwrap()
}

#[test]
fn table_is_the_whole_curve() {
    let table = reference_table();
    // Count affine solutions of y² = x³ + 3x + 2 directly.
    let mut affine = 0;
    for x in 0..P {
        let rhs = (x * x % P * x + A * x + B) % P;
        affine += (0..P).filter(|y| y * y % P == rhs).count();
    }
    assert_eq!(affine as u64 + 1, N, "curve has prime order 997");
    let mut seen: Vec<_> = table.iter().map(|p| p.to_bytes()).collect();
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len() as u64, N, "G generates every point");
    assert_eq!(textbook_add(Some((0, 420)), Some((0, 991 - 420))), None);
}

#[test]
fn scalar_multiplication_of_g_matches_every_entry() {
    let curve = toy();
    let table = reference_table();
    for k in 1..N {
        let s = Scalar::from_u64(&curve, k).unwrap();
        assert_eq!(
            curve.mul(&s, &curve.generator()),
            table[k as usize],
            "k = {k}"
        );
        assert!(curve.validate(&table[k as usize]).is_ok());
    }
    assert_eq!(
        curve.mul_integer(&U256::from_u64(N), &curve.generator()),
        GroupPoint::Infinity
    );
}

/// aG + bG = (a+b)G for every pair. With k ↦ kG a bijection onto the group,
/// this makes `add` an isomorphic copy of addition mod 997, so closure,
/// identity, inverses, commutativity and associativity all hold.
#[test]
fn addition_is_a_homomorphism_on_every_pair() {
    let curve = toy();
    let table = reference_table();
    for a in 0..N as usize {
        assert_eq!(
            curve.negate(&table[a]),
            table[(N as usize - a) % N as usize]
        );
        for b in a..N as usize {
            let sum = curve.add(&table[a], &table[b]);
            assert_eq!(sum, table[(a + b) % N as usize], "{a}G + {b}G");
        }
    }
}

/// a·(bG) = (ab)G = b·(aG) for every pair of non-zero scalars, and both
/// parties derive the same key from it.
#[test]
fn ecdh_agrees_on_every_pair() {
    let curve = toy();
    let table = reference_table();
    let keys: Vec<Option<[u8; 32]>> = table
        .iter()
        .map(|p| kdf_point(p).ok().map(|k| *k.as_bytes()))
        .collect();
    for a in 1..N {
        let sa = Scalar::from_u64(&curve, a).unwrap();
        for b in 1..N {
            let shared = curve.mul(&sa, &table[b as usize]);
            let ab = (a * b % N) as usize;
            assert_eq!(shared, table[ab], "a = {a}, b = {b}");
        }
    }
    // kdf: defined on every non-identity point, injective over the group.
    assert!(keys[0].is_none());
    let mut distinct: Vec<_> = keys[1..].iter().map(|k| k.unwrap()).collect();
    distinct.sort();
    distinct.dedup();
    assert_eq!(distinct.len() as u64, N - 1);
}

#[test]
fn oracle_inverts_every_multiple() {
    let curve = toy();
    let oracle = CdlOracle::new(&curve).unwrap();
    let table = reference_table();
    // Every 11th scalar plus the extremes; each search walks up to 996 steps.
    for k in (1..N).step_by(11).chain([N - 1]) {
        let found = oracle.log(&table[k as usize]).unwrap();
        assert_eq!(found.value(), &U256::from_u64(k));
    }
    assert!(oracle.log(&GroupPoint::Infinity).is_none());
}
