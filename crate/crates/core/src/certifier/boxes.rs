use std::cmp::Ordering;
use std::f64::consts::FRAC_PI_2;

use crate::interval::{Interval, IntervalError};

/// Upper end of the root box: the smallest double above pi/2.
pub fn theta_max() -> f64 {
    FRAC_PI_2.next_up()
}

/// Axis-aligned box in angle coordinates `(theta1, theta2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBox {
    pub t1: Interval,
    pub t2: Interval,
}

impl AngleBox {
    pub fn new(t1: Interval, t2: Interval) -> Self {
        Self { t1, t2 }
    }

    /// `[-h, h]^2` with `h` just above pi/2, so the true square is covered.
    pub fn root() -> Self {
        let h = theta_max();
        let side = Interval::new(-h, h).expect("valid root side");
        Self { t1: side, t2: side }
    }

    /// Strictly below the diagonal `theta2 = theta1`; such boxes carry no
    /// point of the upper triangle.
    pub fn below_diagonal(&self) -> bool {
        self.t2.hi() < self.t1.lo()
    }

    pub fn width(&self) -> f64 {
        self.t1.width().max(self.t2.width())
    }

    /// Halve the wider side; ties split `theta1`.
    pub fn bisect(&self) -> Result<(AngleBox, AngleBox), IntervalError> {
        if self.t1.width() >= self.t2.width() {
            let (a, b) = self.t1.bisect()?;
            Ok((AngleBox::new(a, self.t2), AngleBox::new(b, self.t2)))
        } else {
            let (a, b) = self.t2.bisect()?;
            Ok((AngleBox::new(self.t1, a), AngleBox::new(self.t1, b)))
        }
    }

    pub fn is_subset_of(&self, other: &AngleBox) -> bool {
        self.t1.is_subset_of(&other.t1) && self.t2.is_subset_of(&other.t2)
    }

    pub fn center(&self) -> (f64, f64) {
        (self.t1.midpoint(), self.t2.midpoint())
    }

    /// Canonical order: lower-left corner, then upper-right corner.
    pub fn canonical_cmp(&self, other: &AngleBox) -> Ordering {
        let key = |b: &AngleBox| [b.t1.lo(), b.t2.lo(), b.t1.hi(), b.t2.hi()];
        key(self)
            .iter()
            .zip(key(other).iter())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}
