//! Scalar abstraction: everything in the kit is generic over the floating
//! point type, with `f64` as the working default.

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

/// Floating-point scalar for meshes, assembly and solvers.
///
/// Implemented for `f32` and `f64`. Text formatting uses 17 significant
/// digits so that decimal round-trips are bit-exact for both types.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + fmt::Debug
    + fmt::Display
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Convert a compile-time `f64` constant into `Self`.
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable in scalar type")
    }

    /// Parse a decimal literal previously produced by [`Real::fmt_full`].
    fn parse_text(text: &str) -> Option<Self>;

    /// Decimal form with 17 significant digits.
    fn fmt_full(&self) -> String {
        format!("{:.16e}", self)
    }

    /// Lossy view as `f64` for diagnostics and reports.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {
    fn parse_text(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

impl Real for f64 {
    fn parse_text(text: &str) -> Option<Self> {
        text.parse().ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_format_round_trips_f64() {
        for &v in &[0.1f64, 1.0 / 3.0, -2.75e-13, 6.02214076e23, 0.5] {
            let s = Real::fmt_full(&v);
            let back = f64::parse_text(&s).unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn full_format_round_trips_f32() {
        for &v in &[0.1f32, 1.0 / 3.0, -2.75e-13, 3.4e38] {
            let s = Real::fmt_full(&v);
            let back = f32::parse_text(&s).unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }
}
