//! Minimal double-double arithmetic (~31 significant digits).
//!
//! The alternating series behind the CDF and the coefficient matrix cancel
//! heavily when mu v is large and the arc count is high; the extended
//! precision here keeps absolute errors below the 1e-10 contract where
//! plain f64 cannot. Only the operations those series need are provided.

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
const LN_2: Dd = Dd { hi: 0.693147180559945286e0, lo: 2.319046813846299558e-17 };

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two f64 values.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    /// Exact sum of two f64 values.
    #[inline]
    pub fn sum(a: f64, b: f64) -> Self {
        let (hi, lo) = two_sum(a, b);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn neg(self) -> Self {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    pub fn add(self, other: Dd) -> Self {
        let (s1, s2) = two_sum(self.hi, other.hi);
        let (t1, t2) = two_sum(self.lo, other.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Self {
        self.add(other.neg())
    }

    pub fn mul(self, other: Dd) -> Self {
        let (p1, p2) = two_prod(self.hi, other.hi);
        let p2 = p2 + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }

    #[inline]
    pub fn mul_f64(self, other: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, other);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * other);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Self {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (s, e) = quick_two_sum(q1, q2);
        let (hi, lo) = quick_two_sum(s, e + q3);
        Dd { hi, lo }
    }

    #[inline]
    pub fn div_f64(self, other: f64) -> Self {
        self.div(Dd::from_f64(other))
    }

    /// e^self by range reduction against ln 2 and a double-double Taylor
    /// series on the reduced argument.
    pub fn exp(self) -> Self {
        if self.hi < -709.0 {
            return ZERO;
        }
        let n = libm::round(self.hi / LN_2.hi);
        let r = self.sub(LN_2.mul_f64(n));
        // |r| <= ln2/2; the series reaches 1e-35 well before k = 30
        let mut term = ONE;
        let mut sum = ONE;
        for k in 1..=30 {
            term = term.mul(r).div_f64(k as f64);
            sum = sum.add(term);
            if term.hi.abs() < 1e-35 * sum.hi.abs() {
                break;
            }
        }
        let scale = libm::scalbn(1.0, n as i32);
        Dd { hi: sum.hi * scale, lo: sum.lo * scale }
    }

    /// self^k / k! with the 0^0 = 1 convention, by incremental products so
    /// intermediate magnitudes stay balanced.
    pub fn pow_over_factorial(self, k: u32) -> Self {
        if k == 0 {
            return ONE;
        }
        if self.hi == 0.0 {
            return ZERO;
        }
        let mut acc = ONE;
        for i in 1..=k {
            acc = acc.mul(self).div_f64(i as f64);
        }
        acc
    }

    /// self^k for small nonnegative integer k.
    pub fn powi(self, k: u32) -> Self {
        let mut acc = ONE;
        let mut base = self;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            k >>= 1;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_tracks_lost_bits() {
        let a = Dd::from_f64(1.0);
        let b = Dd::from_f64(1e-20);
        let s = a.add(b);
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1e-20);
    }

    #[test]
    fn prod_is_exact() {
        let p = Dd::prod(1.0 + 2f64.powi(-30), 1.0 + 2f64.powi(-30));
        // (1 + u)^2 = 1 + 2u + u^2; u^2 falls into lo
        assert_eq!(p.hi, 1.0 + 2f64.powi(-29));
        assert_eq!(p.lo, 2f64.powi(-60));
    }

    #[test]
    fn div_roundtrips() {
        let a = Dd::from_f64(1.0).div_f64(3.0);
        let b = a.mul_f64(3.0);
        assert!((b.to_f64() - 1.0).abs() < 1e-31);
        assert!((a.hi - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn exp_matches_libm_to_f64() {
        for &x in &[-5.0, -0.3, 0.0, 0.7, 3.0, 12.5] {
            let got = Dd::from_f64(x).exp().to_f64();
            let want = libm::exp(x);
            assert!((got - want).abs() <= 2.0 * f64::EPSILON * want.abs().max(1e-300));
        }
    }

    #[test]
    fn exp_identity_in_extended_precision() {
        // e^x e^{-x} = 1 to ~1e-30: requires genuinely extended precision
        let x = Dd::from_f64(7.3);
        let p = x.exp().mul(x.neg().exp());
        assert!((p.hi - 1.0).abs() < 1e-29);
        assert!(p.lo.abs() < 1e-15);
    }

    #[test]
    fn pow_over_factorial_matches_f64_kernel() {
        assert_eq!(Dd::from_f64(0.0).pow_over_factorial(0).to_f64(), 1.0);
        assert_eq!(Dd::from_f64(0.0).pow_over_factorial(4).to_f64(), 0.0);
        let got = Dd::from_f64(1.7).pow_over_factorial(12).to_f64();
        let want = crate::numeric::pow_over_factorial(1.7, 12);
        assert!((got - want).abs() < 1e-15 * want);
    }

    #[test]
    fn powi_small_cases() {
        assert_eq!(Dd::from_f64(2.0).powi(10).to_f64(), 1024.0);
        assert_eq!(Dd::from_f64(5.0).powi(0).to_f64(), 1.0);
    }
}
