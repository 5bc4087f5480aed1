//! Double-double arithmetic (about 32 significant digits), enough to serve
//! as an independent reference for KL divergences computed in `f64`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Dd {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Multiply by a power of two, exactly.
    fn ldexp(self, k: i32) -> Dd {
        let s = 2f64.powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Dd {
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::new(k)).ldexp(-10);
        // expm1 by Taylor series; |r| < 4e-4 so 14 terms are plenty
        let mut term = r;
        let mut sum = r;
        for n in 2..=14 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        // (1 + e)² − 1 = e (e + 2), applied 10 times, keeps the small part exact
        for _ in 0..10 {
            sum = sum * (sum + Dd::new(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    /// Natural log by Newton iteration on `exp`.
    pub fn ln(self) -> Dd {
        assert!(self.hi > 0.0, "ln of non-positive {self:?}");
        let mut y = Dd::new(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        Dd::norm(s, e + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        Dd::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        Dd::norm(q1, q2) + Dd::new(q3)
    }
}

/// `1 − p` without rounding.
fn one_minus(p: f64) -> Dd {
    let (hi, lo) = two_sum(1.0, -p);
    Dd { hi, lo }
}

/// Bernoulli KL divergence `d(p, q)` for `p, q ∈ (0, 1)`.
pub fn bernoulli_kl(p: f64, q: f64) -> Dd {
    let p_dd = Dd::new(p);
    let head = p_dd * (p_dd / Dd::new(q)).ln();
    let (pc, qc) = (one_minus(p), one_minus(q));
    head + pc * (pc / qc).ln()
}

/// `(p − q)² / 2`.
pub fn gaussian_kl(p: f64, q: f64) -> Dd {
    let diff = Dd::new(p) - Dd::new(q);
    diff * diff * Dd::new(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: Dd, tol: f64) -> bool {
        ((a - b).to_f64() / b.to_f64()).abs() < tol
    }

    #[test]
    fn constants() {
        assert!(close(Dd::new(2.0).ln(), LN2, 1e-30));
        let e = Dd {
            hi: std::f64::consts::E,
            lo: 1.445_646_891_729_250_2e-16,
        };
        assert!(close(Dd::ONE.exp(), e, 1e-30));
        assert!(close(Dd::new(-3.5).exp().ln(), Dd::new(-3.5), 1e-30));
    }
}
