//! Fixed-precision number formatting for emitted data files.

/// Formats `x` with 10 significant digits and `.` as decimal separator.
///
/// Values with decimal exponent in `[-5, 15)` are written positionally
/// (`2.000000000`, `78.53851905`); anything else in scientific notation.
pub fn sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.000000000".to_owned();
    }
    // round first, then read the exponent of the rounded value
    let sci = format!("{x:.9e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// `x` rounded to 10 significant digits.
pub fn round_sig10(x: f64) -> f64 {
    sig10(x).parse().unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig10(2.0), "2.000000000");
        assert_eq!(sig10(2.0000000001), "2.000000000");
        assert_eq!(sig10(78.538519052586), "78.53851905");
        assert_eq!(sig10(-1.5), "-1.500000000");
        assert_eq!(sig10(0.0), "0.000000000");
        assert_eq!(sig10(9.9999999999), "10.00000000");
        assert_eq!(sig10(0.00012345678912), "0.0001234567891");
        assert_eq!(sig10(123456.0), "123456.0000");
        assert_eq!(sig10(1.0e20), "1.000000000e20");
        assert_eq!(sig10(3.0e-7), "3.000000000e-7");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [std::f64::consts::PI, 1.0 / 3.0, 12345.678901234, 2.0f64.sqrt() * 1e-3] {
            let once = round_sig10(x);
            assert_eq!(round_sig10(once), once);
            assert_eq!(sig10(once), sig10(x));
        }
    }
}
