//! Flat serializable records shared by the reports.

use serde::{Deserialize, Serialize};

use crate::scalar::{Real, C};
use crate::spin::CoherentPoint;

/// Complex number as `{re, im}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReIm {
    pub re: f64,
    pub im: f64,
}

impl ReIm {
    pub fn to_complex<T: Real>(self) -> C<T> {
        C::new(T::lit(self.re), T::lit(self.im))
    }

    pub fn to_point<T: Real>(self) -> CoherentPoint<T> {
        CoherentPoint::new(T::lit(self.re), T::lit(self.im))
    }
}

impl<T: Real> From<C<T>> for ReIm {
    fn from(c: C<T>) -> Self {
        Self { re: c.re.as_f64(), im: c.im.as_f64() }
    }
}

impl<T: Real> From<CoherentPoint<T>> for ReIm {
    fn from(p: CoherentPoint<T>) -> Self {
        Self { re: p.z1.as_f64(), im: p.z2.as_f64() }
    }
}
