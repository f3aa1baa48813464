use serde::{Deserialize, Serialize};

/// The radial bump `φ(x) = exp(1 − 1/(1 − |x|²))` on the open unit ball,
/// zero outside. `φ(0) = 1`, `0 ≤ φ ≤ 1` and `∇φ` vanishes only at the origin
/// inside the ball.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec;

impl BumpSpec {
    pub const FORMULA: &'static str = "exp(1 - 1/(1 - |x|^2)) for |x| < 1, 0 otherwise";

    /// `φ` as a function of the radius.
    #[inline]
    pub fn value(&self, r: f64) -> f64 {
        let q = 1.0 - r * r;
        if q <= 0.0 {
            0.0
        } else {
            (1.0 - 1.0 / q).exp()
        }
    }

    /// `dφ/dr`.
    #[inline]
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let q = 1.0 - r * r;
        if q <= 0.0 {
            0.0
        } else {
            -2.0 * r / (q * q) * (1.0 - 1.0 / q).exp()
        }
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        self.value(x.iter().map(|c| c * c).sum::<f64>().sqrt())
    }

    /// Largest `|∇φ|` over the ball, located by golden-section search.
    pub fn max_gradient(&self) -> f64 {
        let g = |r: f64| -self.radial_derivative(r);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (0.0, 1.0);
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if g(c) > g(d) {
                b = d;
            } else {
                a = c;
            }
        }
        g(0.5 * (a + b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn peak_and_support() {
        let b = BumpSpec;
        assert_eq!(b.value(0.0), 1.0);
        assert_eq!(b.value(1.0), 0.0);
        assert_eq!(b.value(1.5), 0.0);
        assert_eq!(b.at(&[0.6, 0.8, 0.0]), 0.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let b = BumpSpec;
        for r in [0.1, 0.35, 0.6, 0.9] {
            let h = 1e-5;
            let fd = (b.value(r + h) - b.value(r - h)) / (2.0 * h);
            assert!((fd - b.radial_derivative(r)).abs() < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn max_gradient_is_a_maximum() {
        let b = BumpSpec;
        let m = b.max_gradient();
        for i in 1..1000 {
            assert!(-b.radial_derivative(i as f64 / 1000.0) <= m + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn radial_and_bounded(x in -1.2f64..1.2, y in -1.2f64..1.2, z in -1.2f64..1.2, turn in 0.0f64..6.3) {
            let b = BumpSpec;
            let v = b.at(&[x, y, z]);
            prop_assert!((0.0..=1.0).contains(&v));
            // rotate about the z axis
            let (c, s) = (turn.cos(), turn.sin());
            let w = b.at(&[c * x - s * y, s * x + c * y, z]);
            prop_assert!((v - w).abs() < 1e-12);
            let r2 = x * x + y * y + z * z;
            if r2 >= 1.0 {
                prop_assert_eq!(v, 0.0);
            } else if r2 > 1e-6 {
                prop_assert!(b.radial_derivative(r2.sqrt()) < 0.0 || v < 1e-300);
            }
        }
    }
}
