//! Exact scalar arithmetic: arbitrary-precision rationals, factorial tables,
//! safe float conversion, and word-sized prime fields for modular elimination.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational scalar. Always reduced, denominator positive.
pub type Rat = num_rational::BigRational;

pub fn rat_i(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat(n: i64, d: i64) -> Rat {
    assert!(d != 0, "zero denominator");
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// n! as a big integer. The exact layer never needs more than 23!.
pub fn factorial(n: usize) -> BigInt {
    assert!(n <= 23, "factorial({n}) exceeds the supported table");
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= i;
    }
    acc
}

/// Binomial coefficient as u128 (small arguments only).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Convert an exact rational to f64 without overflowing on huge numerator or
/// denominator: both are shifted into a ~100-bit window first, so the result
/// is correct to f64 precision whenever the true value is representable.
pub fn rat_to_f64(x: &Rat) -> f64 {
    let num = x.numer();
    let den = x.denom();
    if num.is_zero() {
        return 0.0;
    }
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let shift = nb.max(db) - 100;
    if shift <= 0 {
        // Small enough for the direct route.
        return num.to_f64().unwrap() / den.to_f64().unwrap();
    }
    let n2: BigInt = num >> shift as usize;
    let d2: BigInt = den >> shift as usize;
    if d2.is_zero() {
        // Denominator vastly larger than numerator.
        return 0.0;
    }
    n2.to_f64().unwrap() / d2.to_f64().unwrap()
}

/// Parse "p/q" or "p" into an exact rational. Used by the mesh file format.
pub fn rat_parse(s: &str) -> Option<Rat> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().ok()?;
        let den: BigInt = q.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        Some(Rat::new(num, den))
    } else {
        let num: BigInt = s.parse().ok()?;
        Some(Rat::from_integer(num))
    }
}

/// Render a rational as "p" or "p/q".
pub fn rat_display(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

// ---------------------------------------------------------------------------
// Word-sized prime fields.

/// Deterministic Miller-Rabin, valid for all u64 with this witness set.
fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// The sequence of primes used by modular elimination, largest first so that
/// products fit u128 comfortably. Proven prime at construction time.
pub fn elimination_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = (1u64 << 62) - 1;
    while primes.len() < count {
        if is_prime_u64(candidate) {
            primes.push(candidate);
        }
        candidate -= 2;
    }
    primes
}

/// Arithmetic in Z/p for a fixed word prime.
#[derive(Clone, Copy, Debug)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn new(p: u64) -> Self {
        debug_assert!(is_prime_u64(p));
        Fp { p }
    }
    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero in F_p");
        pow_mod(a, self.p - 2, self.p)
    }
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    /// Image of a big integer.
    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let m = BigUint::from(self.p);
        let r = (x.magnitude() % &m).to_u64().unwrap();
        if x.sign() == Sign::Minus && r != 0 {
            self.p - r
        } else {
            r
        }
    }

    /// Image of a rational (denominator must not vanish mod p; callers pick a
    /// different prime when it does).
    pub fn from_rat(&self, x: &Rat) -> Option<u64> {
        let d = self.from_bigint(x.denom());
        if d == 0 {
            return None;
        }
        let n = self.from_bigint(x.numer());
        Some(self.mul(n, self.inv(d)))
    }
}
