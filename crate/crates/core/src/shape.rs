use alloc::format;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Shape exponent of the Subbotin (generalized normal) family: an even integer >= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeParam(u32);

impl ShapeParam {
    pub const GAUSSIAN: ShapeParam = ShapeParam(2);

    pub fn new(nu: u32) -> Result<Self> {
        if nu < 2 || nu % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "shape nu must be an even integer >= 2, got {nu}"
            )));
        }
        Ok(ShapeParam(nu))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// Variance of the standard density `exp(-|x|^nu)` normalized: Γ(3/ν)/Γ(1/ν).
    pub fn standard_variance(self) -> f64 {
        let nu = self.as_f64();
        gamma(3.0 / nu) / gamma(1.0 / nu)
    }
}

impl core::fmt::Display for ShapeParam {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}", self.0)
    }
}
