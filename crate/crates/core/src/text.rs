use std::fmt;

/// Shortest round-trip decimal form of an `f64`, switching to exponent
/// notation for very small or very large magnitudes.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Float(pub f64);

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.0.abs();
        if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
            write!(f, "{}", self.0)
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}
