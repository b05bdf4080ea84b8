//! Toy-curve oracle over p = 43, q = 11 using plain integer arithmetic:
//! point enumeration by repeated addition and a one-step-at-a-time Miller
//! loop that keeps the vertical lines.
#![allow(dead_code)]

use grpauth::groups::{CurvePoint, Fp2, GroupElement, TargetElement};

pub const P: i64 = 43;
pub const Q: i64 = 11;

pub fn m(a: i64) -> i64 {
    a.rem_euclid(P)
}

pub fn inv(a: i64) -> i64 {
    (1..P).find(|b| m(a * b) == 1).expect("invertible")
}

pub type Pt = Option<(i64, i64)>;

pub fn on_curve(x: i64, y: i64) -> bool {
    m(y * y) == m(x * x * x + x)
}

pub fn add(a: Pt, b: Pt) -> Pt {
    let ((x1, y1), (x2, y2)) = match (a, b) {
        (None, r) | (r, None) => return r,
        (Some(a), Some(b)) => (a, b),
    };
    if x1 == x2 && m(y1 + y2) == 0 {
        return None;
    }
    let l = if (x1, y1) == (x2, y2) { m((3 * x1 * x1 + 1) * inv(2 * y1)) } else { m((y2 - y1) * inv(x2 - x1)) };
    let x3 = m(l * l - x1 - x2);
    Some((x3, m(l * (x1 - x3) - y1)))
}

pub fn times(k: i64, a: Pt) -> Pt {
    (0..k).fold(None, |acc, _| add(acc, a))
}

// F_{p^2} = F_p[i]/(i^2 + 1)
pub type E = (i64, i64);

pub fn emul(a: E, b: E) -> E {
    (m(a.0 * b.0 - a.1 * b.1), m(a.0 * b.1 + a.1 * b.0))
}

pub fn einv(a: E) -> E {
    let n = inv(m(a.0 * a.0 + a.1 * a.1));
    (m(a.0 * n), m(-a.1 * n))
}

pub fn epow(a: E, k: i64) -> E {
    (0..k).fold((1, 0), |acc, _| emul(acc, a))
}

/// `f_{q,a}` evaluated at the distorted `b`, one addition per step, verticals
/// included, then raised to `(p^2 - 1)/q`.
pub fn naive_pairing(a: Pt, b: Pt) -> E {
    let (Some(pa), Some((bx, by))) = (a, b) else { return (1, 0) };
    let (qx, qy): (E, E) = ((m(-bx), 0), (0, by));
    let mut f: E = (1, 0);
    let mut t = a;
    for _ in 1..Q {
        let (tx, ty) = t.expect("stays affine until the last step");
        let next = add(t, a);
        let line = if tx == pa.0 && m(ty + pa.1) == 0 {
            (m(qx.0 - tx), qx.1)
        } else {
            let l = if (tx, ty) == pa { m((3 * tx * tx + 1) * inv(2 * ty)) } else { m((pa.1 - ty) * inv(pa.0 - tx)) };
            // y - ty - l (x - tx)
            (m(qy.0 - ty - l * (qx.0 - tx)), m(qy.1 - l * qx.1))
        };
        let vertical = match next {
            Some((nx, _)) => (m(qx.0 - nx), qx.1),
            None => (1, 0),
        };
        f = emul(f, emul(line, einv(vertical)));
        t = next;
    }
    epow(f, (P * P - 1) / Q)
}

pub fn to_pt(g: &GroupElement) -> Pt {
    match g {
        GroupElement::Curve(CurvePoint::Infinity) => None,
        GroupElement::Curve(CurvePoint::Affine { x, y }) => Some((*x as i64, *y as i64)),
        _ => panic!("curve suite expected"),
    }
}

pub fn to_e(t: &TargetElement) -> E {
    match t {
        TargetElement::Curve(Fp2 { re, im }) => (*re as i64, *im as i64),
        _ => panic!("curve suite expected"),
    }
}
