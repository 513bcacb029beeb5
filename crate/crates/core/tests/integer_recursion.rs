//! Exact integer form of the cone preimages: `a_{n,m} = (-1)^m (a_{n-1,⌈m/2⌉} + (-1)^m b_{n-1})²`,
//! `b_n = 4 b_{n-1}²`, compared with the normalized recurrence in binary64.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use fathorse::cones::preimage_level;

fn integer_level(a0: BigInt, b0: BigInt, n: usize) -> (Vec<BigInt>, BigInt) {
    let mut level = vec![a0];
    let mut b = b0;
    for _ in 0..n {
        let mut next = Vec::with_capacity(level.len() * 2);
        for m in 1..=2 * level.len() {
            let parent = &level[m.div_ceil(2) - 1];
            let v = if m % 2 == 0 { parent + &b } else { parent - &b };
            let sq = &v * &v;
            next.push(if m % 2 == 0 { sq } else { -sq });
        }
        level = next;
        b = BigInt::from(4) * &b * &b;
    }
    (level, b)
}

#[test]
fn denominators_follow_the_closed_form() {
    let expected = [1u64, 4, 64, 16384, 1 << 30];
    for (n, &want) in expected.iter().enumerate() {
        let (_, b) = integer_level(BigInt::zero(), BigInt::one(), n);
        assert_eq!(b, BigInt::from(want), "b_{n}");
        assert_eq!(b, BigInt::from(2).pow((1u32 << (n + 1)) - 2));
    }
}

#[test]
fn normalized_recurrence_reproduces_integers() {
    // a = a_{0,1} / b_0 for a few dyadic slices; every r_{n,m} b_n is then an
    // integer held exactly in binary64 for n <= 4.
    for (num, den) in [(0i64, 1i64), (1, 2), (-1, 2)] {
        let a = num as f64 / den as f64;
        for n in 0..=4 {
            let (ints, b) = integer_level(BigInt::from(num), BigInt::from(den), n);
            let b_n = b.to_f64().unwrap();
            let r = preimage_level(a, n).unwrap();
            assert_eq!(r.len(), ints.len());
            for (m, (ri, ai)) in r.iter().zip(&ints).enumerate() {
                let scaled = ri * b_n;
                assert_eq!(scaled.fract(), 0.0, "a={a} n={n} m={}", m + 1);
                assert_eq!(BigInt::from(scaled as i64), *ai, "a={a} n={n} m={}", m + 1);
            }
        }
    }
}

#[test]
fn slice_zero_level_two_values() {
    let (ints, b) = integer_level(BigInt::zero(), BigInt::one(), 2);
    let got: Vec<i64> = ints.iter().map(|v| v.to_i64().unwrap()).collect();
    assert_eq!(got, vec![-25, 9, -9, 25]);
    assert_eq!(b, BigInt::from(64));
}
