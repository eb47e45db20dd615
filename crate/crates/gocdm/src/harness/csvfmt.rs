//! CSV float formatting: every floating-point value is printed with 9
//! significant digits so runs are byte-comparable.

/// 9-significant-digit rendering (`0` for exact zero).
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.8e}")
    }
}

#[cfg(test)]
mod tests {
    use super::fmt_sig9;

    #[test]
    fn formats_nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1.00000000e0");
        assert_eq!(fmt_sig9(-0.012345678949), "-1.23456789e-2");
        assert_eq!(fmt_sig9(355.5555555), "3.55555556e2");
    }
}
