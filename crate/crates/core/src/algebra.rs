//! Scalar arithmetic modulo a prime group order, secret polynomials and
//! Lagrange interpolation at zero.
//!
//! Scalars are plain `u64` values kept canonical in `[0, q)`. Every function
//! here is pure; a [`PrimeField`] is a `Copy` descriptor of the modulus.

use rand::Rng;
use thiserror::Error;

/// Errors raised by scalar-field arithmetic and interpolation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("value {value} is not a canonical element of F_{modulus}")]
    NonCanonical { value: u64, modulus: u64 },
    #[error("threshold must be at least 1")]
    ZeroThreshold,
    #[error("degenerate evaluation point {0}: points must be nonzero and pairwise distinct")]
    DegenerateEvaluationPoint(u64),
    #[error("index {index} out of range for {len} evaluation points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("interpolation needs at least one point")]
    EmptyPointSet,
    #[error("{0} has no inverse")]
    NotInvertible(u64),
}

/// Deterministic Miller-Rabin, exact for every `n < 2^64`.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    'witness: for &a in &WITNESSES {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The prime field `F_q` of protocol scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    q: u64,
}

impl PrimeField {
    /// 2^61 - 1, the reference modulus for randomized suites.
    pub const MERSENNE_61: u64 = (1 << 61) - 1;

    pub fn new(q: u64) -> Result<Self, AlgebraError> {
        if !is_prime_u64(q) {
            return Err(AlgebraError::NotPrime(q));
        }
        Ok(Self { q })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Number of bits needed to write the largest scalar.
    pub fn bit_len(&self) -> u32 {
        64 - (self.q - 1).leading_zeros()
    }

    pub fn contains(&self, v: u64) -> bool {
        v < self.q
    }

    pub fn check(&self, v: u64) -> Result<u64, AlgebraError> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(AlgebraError::NonCanonical { value: v, modulus: self.q })
        }
    }

    pub fn reduce(&self, v: u64) -> u64 {
        v % self.q
    }

    /// Reduces a signed integer into `[0, q)`.
    pub fn from_i64(&self, v: i64) -> u64 {
        (v as i128).rem_euclid(self.q as i128) as u64
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.q as u128) as u64
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.q - (b - a)
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.q - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.q as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.q;
        base %= self.q;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: u64) -> Result<u64, AlgebraError> {
        let a = a % self.q;
        if a == 0 {
            return Err(AlgebraError::NotInvertible(a));
        }
        let (mut old_r, mut r) = (a as i128, self.q as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(old_s.rem_euclid(self.q as i128) as u64)
    }

    /// Uniform sample from `[0, q)`.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.q)
    }

    /// Uniform sample from `[1, q)`.
    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(1..self.q)
    }
}

/// A secret polynomial `f(x) = a_0 + a_1 x + ... + a_{t-1} x^{t-1}`.
///
/// `a_0` is the group secret.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Polynomial {
    field: PrimeField,
    coefficients: Vec<u64>,
}

impl std::fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Polynomial")
            .field("modulus", &self.field.q)
            .field("threshold", &self.coefficients.len())
            .finish_non_exhaustive()
    }
}

impl Polynomial {
    /// Builds a polynomial from explicit coefficients, lowest degree first.
    pub fn new(field: PrimeField, coefficients: Vec<u64>) -> Result<Self, AlgebraError> {
        if coefficients.is_empty() {
            return Err(AlgebraError::ZeroThreshold);
        }
        for &c in &coefficients {
            field.check(c)?;
        }
        Ok(Self { field, coefficients })
    }

    /// Draws `t` uniform coefficients.
    pub fn sample<R: Rng + ?Sized>(field: PrimeField, t: usize, rng: &mut R) -> Result<Self, AlgebraError> {
        if t == 0 {
            return Err(AlgebraError::ZeroThreshold);
        }
        let coefficients = (0..t).map(|_| field.random(rng)).collect();
        Ok(Self { field, coefficients })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn secret(&self) -> u64 {
        self.coefficients[0]
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// Horner evaluation.
    pub fn eval(&self, x: u64) -> u64 {
        let x = self.field.reduce(x);
        self.coefficients.iter().rev().fold(0, |acc, &c| self.field.add(self.field.mul(acc, x), c))
    }
}

fn check_points(field: &PrimeField, xs: &[u64]) -> Result<(), AlgebraError> {
    for (i, &x) in xs.iter().enumerate() {
        if x == 0 || !field.contains(x) || xs[..i].contains(&x) {
            return Err(AlgebraError::DegenerateEvaluationPoint(x));
        }
    }
    Ok(())
}

/// `λ_i = ∏_{r≠i} (-x_r) / (x_i - x_r)`, the weight of point `i` in the
/// interpolation of `f(0)` over `xs`.
pub fn lagrange_coefficient_at_zero(field: &PrimeField, xs: &[u64], i: usize) -> Result<u64, AlgebraError> {
    check_points(field, xs)?;
    if i >= xs.len() {
        return Err(AlgebraError::IndexOutOfRange { index: i, len: xs.len() });
    }
    Ok(lambda_unchecked(field, xs, i))
}

/// All of `λ_0 .. λ_{k-1}` over `xs`.
pub fn lagrange_coefficients_at_zero(field: &PrimeField, xs: &[u64]) -> Result<Vec<u64>, AlgebraError> {
    check_points(field, xs)?;
    Ok((0..xs.len()).map(|i| lambda_unchecked(field, xs, i)).collect())
}

fn lambda_unchecked(field: &PrimeField, xs: &[u64], i: usize) -> u64 {
    let xi = xs[i];
    let (num, den) = xs
        .iter()
        .enumerate()
        .filter(|&(r, _)| r != i)
        .fold((1, 1), |(num, den), (_, &xr)| (field.mul(num, field.neg(xr)), field.mul(den, field.sub(xi, xr))));
    // den is a product of nonzero differences in a field
    field.mul(num, field.inv(den).expect("distinct points"))
}

/// Recovers `f(0)` from `(x, f(x))` pairs.
pub fn interpolate_secret(field: &PrimeField, points: &[(u64, u64)]) -> Result<u64, AlgebraError> {
    if points.is_empty() {
        return Err(AlgebraError::EmptyPointSet);
    }
    let xs: Vec<u64> = points.iter().map(|p| p.0).collect();
    let lambdas = lagrange_coefficients_at_zero(field, &xs)?;
    points.iter().zip(lambdas).try_fold(0, |acc, (&(_, y), l)| {
        let y = field.check(y)?;
        Ok(field.add(acc, field.mul(y, l)))
    })
}

/// Recovers every coefficient of the unique polynomial of degree `< k`
/// through `k` points.
pub fn interpolate_polynomial(field: &PrimeField, points: &[(u64, u64)]) -> Result<Polynomial, AlgebraError> {
    if points.is_empty() {
        return Err(AlgebraError::EmptyPointSet);
    }
    let xs: Vec<u64> = points.iter().map(|p| p.0).collect();
    check_points(field, &xs)?;
    let k = points.len();
    let mut result = vec![0u64; k];
    for (i, &(xi, yi)) in points.iter().enumerate() {
        let yi = field.check(yi)?;
        // basis numerator ∏_{r≠i} (x - x_r), built one linear factor at a time
        let mut basis = vec![1u64];
        let mut den = 1u64;
        for (r, &xr) in xs.iter().enumerate() {
            if r == i {
                continue;
            }
            let mut next = vec![0u64; basis.len() + 1];
            for (d, &c) in basis.iter().enumerate() {
                next[d + 1] = field.add(next[d + 1], c);
                next[d] = field.sub(next[d], field.mul(c, xr));
            }
            basis = next;
            den = field.mul(den, field.sub(xi, xr));
        }
        let scale = field.mul(yi, field.inv(den)?);
        for (d, c) in basis.into_iter().enumerate() {
            result[d] = field.add(result[d], field.mul(c, scale));
        }
    }
    Polynomial::new(*field, result)
}
