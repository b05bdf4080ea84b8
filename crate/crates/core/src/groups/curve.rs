//! The supersingular curve `y^2 = x^3 + x` over `F_p`, `p ≡ 3 (mod 4)`,
//! and its symmetric pairing through the distortion map
//! `φ(x, y) = (-x, i·y)` into `E(F_{p^2})`.
//!
//! `#E(F_p) = p + 1`, so the embedding degree of any prime-order subgroup
//! is 2 and `F_{p^2} = F_p[i]/(i^2 + 1)` hosts the target group.

use super::OpCounter;

/// Base-field helpers over a `u64` prime with 128-bit intermediates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Fp {
    pub p: u64,
}

impl Fp {
    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.p as u128) as u64
    }

    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.p - (b - a)
        }
    }

    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(self, a: u64, b: u64, ops: &mut OpCounter) -> u64 {
        ops.field_mul += 1;
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut scratch = OpCounter::default();
        let mut acc = 1;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base, &mut scratch);
            }
            base = self.mul(base, base, &mut scratch);
            exp >>= 1;
        }
        acc
    }

    pub fn inv(self, a: u64, ops: &mut OpCounter) -> u64 {
        ops.field_inv += 1;
        let (mut old_r, mut r) = (a as i128, self.p as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let quot = old_r / r;
            (old_r, r) = (r, old_r - quot * r);
            (old_s, s) = (s, old_s - quot * s);
        }
        old_s.rem_euclid(self.p as i128) as u64
    }

    /// Square root for `p ≡ 3 (mod 4)`, if `a` is a square.
    pub fn sqrt(self, a: u64) -> Option<u64> {
        let r = self.pow(a, (self.p + 1) / 4);
        let mut scratch = OpCounter::default();
        (self.mul(r, r, &mut scratch) == a % self.p).then_some(r)
    }

    /// Right-hand side `x^3 + x`.
    pub fn rhs(self, x: u64) -> u64 {
        let mut scratch = OpCounter::default();
        let x2 = self.mul(x, x, &mut scratch);
        self.add(self.mul(x2, x, &mut scratch), x)
    }
}

/// `a + b·i` in `F_{p^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fp2 {
    pub re: u64,
    pub im: u64,
}

impl Fp2 {
    pub const ONE: Fp2 = Fp2 { re: 1, im: 0 };
}

pub(crate) fn fp2_mul(fp: Fp, a: Fp2, b: Fp2, ops: &mut OpCounter) -> Fp2 {
    let rr = fp.mul(a.re, b.re, ops);
    let ii = fp.mul(a.im, b.im, ops);
    let ri = fp.mul(a.re, b.im, ops);
    let ir = fp.mul(a.im, b.re, ops);
    Fp2 { re: fp.sub(rr, ii), im: fp.add(ri, ir) }
}

pub(crate) fn fp2_inv(fp: Fp, a: Fp2, ops: &mut OpCounter) -> Fp2 {
    let norm = fp.add(fp.mul(a.re, a.re, ops), fp.mul(a.im, a.im, ops));
    let n_inv = fp.inv(norm, ops);
    Fp2 { re: fp.mul(a.re, n_inv, ops), im: fp.mul(fp.neg(a.im), n_inv, ops) }
}

pub(crate) fn fp2_pow(fp: Fp, mut base: Fp2, mut exp: u64, ops: &mut OpCounter) -> Fp2 {
    let mut acc = Fp2::ONE;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = fp2_mul(fp, acc, base, ops);
        }
        base = fp2_mul(fp, base, base, ops);
        exp >>= 1;
    }
    acc
}

/// A point of `E(F_p)` in affine form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvePoint {
    Infinity,
    Affine { x: u64, y: u64 },
}

/// Parameters of one curve instance together with its prime subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveParams {
    pub p: u64,
    /// Prime order of the protocol subgroup; divides `p + 1`.
    pub q: u64,
}

impl CurveParams {
    pub(crate) fn fp(&self) -> Fp {
        Fp { p: self.p }
    }

    pub fn cofactor(&self) -> u64 {
        (self.p + 1) / self.q
    }

    /// Byte width of one base-field coordinate.
    pub fn coord_len(&self) -> usize {
        (64 - self.p.leading_zeros() as usize).div_ceil(8)
    }

    pub fn is_on_curve(&self, pt: &CurvePoint) -> bool {
        match *pt {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => {
                let fp = self.fp();
                x < self.p && y < self.p && fp.mul(y, y, &mut OpCounter::default()) == fp.rhs(x)
            }
        }
    }

    pub fn neg(&self, pt: &CurvePoint) -> CurvePoint {
        match *pt {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine { x, y: self.fp().neg(y) },
        }
    }

    /// Tangent doubling: 4 multiplications and one inversion.
    pub fn double(&self, pt: &CurvePoint, ops: &mut OpCounter) -> CurvePoint {
        let (x, y) = match *pt {
            CurvePoint::Infinity => return CurvePoint::Infinity,
            CurvePoint::Affine { y: 0, .. } => return CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => (x, y),
        };
        ops.point_double += 1;
        let fp = self.fp();
        let x2 = fp.mul(x, x, ops);
        let num = fp.add(fp.add(fp.add(x2, x2), x2), 1);
        let lambda = fp.mul(num, fp.inv(fp.add(y, y), ops), ops);
        let x3 = fp.sub(fp.mul(lambda, lambda, ops), fp.add(x, x));
        let y3 = fp.sub(fp.mul(lambda, fp.sub(x, x3), ops), y);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    /// Chord addition: 3 multiplications and one inversion.
    pub fn add(&self, a: &CurvePoint, b: &CurvePoint, ops: &mut OpCounter) -> CurvePoint {
        let ((x1, y1), (x2, y2)) = match (*a, *b) {
            (CurvePoint::Infinity, other) | (other, CurvePoint::Infinity) => return other,
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => ((x1, y1), (x2, y2)),
        };
        let fp = self.fp();
        if x1 == x2 {
            return if y1 == y2 { self.double(a, ops) } else { CurvePoint::Infinity };
        }
        ops.point_add += 1;
        let lambda = fp.mul(fp.sub(y2, y1), fp.inv(fp.sub(x2, x1), ops), ops);
        let x3 = fp.sub(fp.sub(fp.mul(lambda, lambda, ops), x1), x2);
        let y3 = fp.sub(fp.mul(lambda, fp.sub(x1, x3), ops), y1);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    /// Montgomery ladder over the significant bits of `k`.
    pub fn mul(&self, k: u64, pt: &CurvePoint, ops: &mut OpCounter) -> CurvePoint {
        let mut r0 = CurvePoint::Infinity;
        let mut r1 = *pt;
        let bits = 64 - k.leading_zeros();
        for i in (0..bits).rev() {
            if (k >> i) & 1 == 1 {
                r0 = self.add(&r0, &r1, ops);
                r1 = self.double(&r1, ops);
            } else {
                r1 = self.add(&r0, &r1, ops);
                r0 = self.double(&r0, ops);
            }
        }
        r0
    }

    pub fn in_subgroup(&self, pt: &CurvePoint) -> bool {
        self.is_on_curve(pt) && self.mul(self.q, pt, &mut OpCounter::default()) == CurvePoint::Infinity
    }

    /// Deterministic generator: the first point by increasing `x` (with the
    /// smaller square root) whose cofactor multiple is not the identity.
    pub fn find_generator(&self) -> Option<CurvePoint> {
        let fp = self.fp();
        (1..self.p).find_map(|x| {
            let y = fp.sqrt(fp.rhs(x))?;
            let y = y.min(fp.neg(y));
            let g = self.mul(self.cofactor(), &CurvePoint::Affine { x, y }, &mut OpCounter::default());
            (g != CurvePoint::Infinity).then_some(g)
        })
    }

    /// Reduced Tate pairing `f_{q,a}(φ(b))^{(p^2-1)/q}`.
    ///
    /// Vertical lines evaluate into `F_p` at distorted points and vanish under
    /// the final exponentiation, so the loop keeps only the slope lines.
    pub fn pairing(&self, a: &CurvePoint, b: &CurvePoint, ops: &mut OpCounter) -> Fp2 {
        let ((xa, ya), (xb, yb)) = match (*a, *b) {
            (CurvePoint::Affine { x: xa, y: ya }, CurvePoint::Affine { x: xb, y: yb }) => ((xa, ya), (xb, yb)),
            _ => return Fp2::ONE,
        };
        let fp = self.fp();
        // φ(b) = (-xb, i·yb)
        let eval_x = fp.neg(xb);
        let line = |xt: u64, yt: u64, lambda: u64, ops: &mut OpCounter| Fp2 {
            re: fp.sub(fp.neg(yt), fp.mul(lambda, fp.sub(eval_x, xt), ops)),
            im: yb,
        };

        // third intersection of the line of slope `lambda` through (xt, yt), negated
        let chord = |xt: u64, yt: u64, lambda: u64, x_other: u64, ops: &mut OpCounter| {
            let x3 = fp.sub(fp.sub(fp.mul(lambda, lambda, ops), xt), x_other);
            (x3, fp.sub(fp.mul(lambda, fp.sub(xt, x3), ops), yt))
        };

        let mut f = Fp2::ONE;
        let mut t = (xa, ya);
        let bits = 64 - self.q.leading_zeros();
        for i in (0..bits - 1).rev() {
            let (xt, yt) = t;
            let x2 = fp.mul(xt, xt, ops);
            let num = fp.add(fp.add(fp.add(x2, x2), x2), 1);
            let lambda = fp.mul(num, fp.inv(fp.add(yt, yt), ops), ops);
            f = fp2_mul(fp, f, f, ops);
            f = fp2_mul(fp, f, line(xt, yt, lambda, ops), ops);
            t = chord(xt, yt, lambda, xt, ops);
            if (self.q >> i) & 1 == 1 {
                let (xt, yt) = t;
                if xt == xa {
                    // t = -a: vertical line, the loop is complete
                    debug_assert_eq!(i, 0);
                    continue;
                }
                let lambda = fp.mul(fp.sub(ya, yt), fp.inv(fp.sub(xa, xt), ops), ops);
                f = fp2_mul(fp, f, line(xt, yt, lambda, ops), ops);
                t = chord(xt, yt, lambda, xa, ops);
            }
        }
        // f^(p-1) = conj(f) / f, then ^((p+1)/q)
        let conj = Fp2 { re: f.re, im: fp.neg(f.im) };
        let g = fp2_mul(fp, conj, fp2_inv(fp, f, ops), ops);
        fp2_pow(fp, g, (self.p + 1) / self.q, ops)
    }
}
