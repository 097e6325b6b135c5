//! Strong Lucas probable-prime test with Selfridge parameters (P = 1).

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Jacobi symbol `(a / n)` for odd `n`.
pub(crate) fn jacobi(a: &BigUint, n: &BigUint) -> i32 {
    debug_assert!(n.is_odd());
    let mut a = a % n;
    let mut n = n.clone();
    let mut t = 1;
    while !a.is_zero() {
        let tz = a.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            a >>= tz;
            let r = (&n % 8u32).to_u32().unwrap();
            if tz % 2 == 1 && (r == 3 || r == 5) {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if (&a % 4u32).to_u32() == Some(3) && (&n % 4u32).to_u32() == Some(3) {
            t = -t;
        }
        a %= &n;
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

fn residue(v: i64, n: &BigUint) -> BigUint {
    let m = BigUint::from(v.unsigned_abs()) % n;
    if v < 0 && !m.is_zero() {
        n - m
    } else {
        m
    }
}

fn half_mod(x: BigUint, n: &BigUint) -> BigUint {
    let x = x % n;
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

/// Strong Lucas test. `n` must be odd and greater than 2.
pub fn strong_lucas(n: &BigUint) -> bool {
    debug_assert!(n.is_odd() && *n > BigUint::from(2u8));
    let root = n.sqrt();
    if &root * &root == *n {
        return false;
    }
    // Selfridge: first D in 5, -7, 9, -11, ... with (D/n) = -1.
    let mut d: i64 = 5;
    loop {
        let j = jacobi(&residue(d, n), n);
        if j == -1 {
            break;
        }
        if j == 0 && BigUint::from(d.unsigned_abs()) != *n {
            return false;
        }
        d = if d > 0 { -(d + 2) } else { -d + 2 };
    }
    let q = (1 - d) / 4;
    let d_mod = residue(d, n);
    let q_mod = residue(q, n);

    // n + 1 = k * 2^s with k odd
    let n_plus_1 = n + 1u32;
    let s = n_plus_1.trailing_zeros().unwrap();
    let k = &n_plus_1 >> s;

    let two_q = |qk: &BigUint| (n - qk) * 2u32;
    let mut u = BigUint::one();
    let mut v = BigUint::one();
    let mut qk = q_mod.clone();
    for i in (0..k.bits() - 1).rev() {
        u = (&u * &v) % n;
        v = (&v * &v + two_q(&qk)) % n;
        qk = (&qk * &qk) % n;
        if k.bit(i) {
            let next_u = half_mod(&u + &v, n);
            let next_v = half_mod((&d_mod * &u) % n + &v, n);
            u = next_u;
            v = next_v;
            qk = (&qk * &q_mod) % n;
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v + two_q(&qk)) % n;
        if v.is_zero() {
            return true;
        }
        qk = (&qk * &qk) % n;
    }
    false
}
