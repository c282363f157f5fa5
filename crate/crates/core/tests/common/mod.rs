//! Oracles shared by the integration tests.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Vertices visited (start included, 0 excluded) walking to 0 on the
/// directed cycle when vertex `v` holds a shortcut of length `lens[v]`.
fn visits_to_zero(lens: &[usize], start: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut v = start;
    while v != 0 {
        out.push(v);
        // the shortcut lands on v - d when d <= v and wraps past 0 otherwise
        v = if lens[v] <= v { v - lens[v] } else { v - 1 };
    }
    out
}

/// `h(x)` by summing over every configuration and every start.
pub fn enumerate_profile(ell: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut h = vec![BigRational::zero(); n - 1];
    let start_weight = rat(1, n as i64 - 1);
    let mut lens = vec![1usize; n];
    loop {
        let mut w = BigRational::one();
        for &d in &lens {
            w *= &ell[d - 1];
        }
        if !w.is_zero() {
            for s in 1..n {
                for v in visits_to_zero(&lens, s) {
                    h[v - 1] += &w * &start_weight;
                }
            }
        }
        // odometer over lens in 1..n
        let mut i = 0;
        while i < n {
            lens[i] += 1;
            if lens[i] < n {
                break;
            }
            lens[i] = 1;
            i += 1;
        }
        if i == n {
            return h;
        }
    }
}

