//! Number formatting shared by every CSV writer.

/// Scientific notation with 15 significant digits. Negative zero prints as
/// zero so reruns never differ by a sign.
pub fn sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.14e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifteen_digits() {
        assert_eq!(sci(1.0), "1.00000000000000e0");
        assert_eq!(sci(-0.0), "0.00000000000000e0");
        assert_eq!(sci(std::f64::consts::PI), "3.14159265358979e0");
    }
}
