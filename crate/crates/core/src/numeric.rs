//! Small numeric helpers: a scalar trait over real and complex values,
//! compensated summation and Richardson-extrapolated finite differences.

use num_complex::Complex64;
use num_traits::NumAssign;
use std::fmt::Debug;
use std::ops::Neg;

/// Field scalar used by the series evaluators (f64 on the real axis,
/// Complex64 for the bound checks in the complex plane).
pub trait Scalar:
    Copy + Send + Sync + Debug + PartialEq + NumAssign + Neg<Output = Self> + From<f64> + 'static
{
    fn modulus(self) -> f64;
    fn real_part(self) -> f64;
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn real_part(self) -> f64 {
        self
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn real_part(self) -> f64 {
        self.re
    }
}

/// Neumaier compensated sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexCompensatedSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexCompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Principal power with the sign of a vanishing imaginary part normalised
/// to +0, so that negative reals always map to arg = +pi.
pub fn principal_pow(z: Complex64, p: f64) -> Complex64 {
    let z = Complex64::new(z.re, z.im + 0.0);
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    z.powf(p)
}

/// Fourth-order central second difference.
fn second_difference<F: FnMut(f64) -> Complex64>(f: &mut F, h: f64, f0: Complex64) -> Complex64 {
    let fp1 = f(h);
    let fm1 = f(-h);
    let fp2 = f(2.0 * h);
    let fm2 = f(-2.0 * h);
    (-fp2 + fp1 * 16.0 - f0 * 30.0 + fm1 * 16.0 - fm2) / (12.0 * h * h)
}

/// Second derivative at offset 0 of `f(t)` by fourth-order central
/// stencils on steps h, h/2, ... combined by Richardson extrapolation.
/// `f0` is the value at t = 0.
pub fn richardson_second_derivative<F: FnMut(f64) -> Complex64>(
    mut f: F,
    h: f64,
    levels: usize,
    f0: Complex64,
) -> Complex64 {
    let levels = levels.max(1);
    let mut table: Vec<Complex64> = (0..levels)
        .map(|l| second_difference(&mut f, h / f64::powi(2.0, l as i32), f0))
        .collect();
    // error expansion of the stencil goes in h^4, h^6, ...
    for col in 1..levels {
        let factor = f64::powi(2.0, 2 * col as i32 + 2);
        for row in (col..levels).rev() {
            table[row] = table[row] + (table[row] - table[row - 1]) / (factor - 1.0);
        }
    }
    table[levels - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1.0);
        for _ in 0..10 {
            s.add(1e-17);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-16).abs() < 1e-30);
    }

    #[test]
    fn richardson_on_exponential() {
        let d = richardson_second_derivative(
            |t| Complex64::new((0.7 + t).exp(), 0.0),
            1e-2,
            3,
            Complex64::new(0.7f64.exp(), 0.0),
        );
        assert!((d.re - 0.7f64.exp()).abs() < 1e-9, "{}", d.re - 0.7f64.exp());
    }

    #[test]
    fn principal_pow_negative_real_branch() {
        let a = principal_pow(Complex64::new(-2.0, 0.0), 0.5);
        let b = principal_pow(Complex64::new(-2.0, -0.0), 0.5);
        assert_eq!(a, b);
        assert!(a.im > 0.0);
    }
}
