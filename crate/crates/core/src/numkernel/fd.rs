//! Central differences with one Richardson step.

use super::{c64, max_abs, CMat, C64};
use crate::error::Result;

/// Values that can be differenced: closed under real linear combinations
/// and equipped with a size for convergence checks.
pub trait FdValue: Sized {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self;
    fn size(&self) -> f64;
}

impl FdValue for C64 {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn size(&self) -> f64 {
        self.norm()
    }
}

impl FdValue for CMat {
    fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * c64(a, 0.0) + y * c64(b, 0.0)
    }
    fn size(&self) -> f64 {
        max_abs(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative<T> {
    pub value: T,
    /// Size of the change made by the Richardson step.
    pub disagreement: f64,
}

/// `f'(0)` from central differences at steps `h` and `h/2`, combined as
/// `(4 D(h/2) - D(h)) / 3`. Truncation error is `O(h⁴)`.
pub fn central_richardson<T, F>(f: F, h: f64) -> Result<Derivative<T>>
where
    T: FdValue,
    F: Fn(f64) -> Result<T>,
{
    let central = |step: f64| -> Result<T> {
        let (p, m) = (f(step)?, f(-step)?);
        Ok(T::combine(0.5 / step, &p, -0.5 / step, &m))
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    let value = T::combine(4.0 / 3.0, &fine, -1.0 / 3.0, &coarse);
    let disagreement = T::combine(1.0, &value, -1.0, &fine).size();
    Ok(Derivative { value, disagreement })
}
