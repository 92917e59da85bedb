//! Number formatting shared by the CSV writers.

/// Plain decimal with `digits` significant digits (no exponent).
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - mag).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.starts_with("-0") && s.trim_start_matches(['-', '0', '.']).is_empty() {
        return "0".into();
    }
    s
}

/// The 12-significant-digit format used in every CSV table.
pub fn fmt12(x: f64) -> String {
    fmt_sig(x, 12)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(fmt12(1.0), "1.00000000000");
        assert_eq!(fmt12(8.317766166719343), "8.31776616672");
        assert_eq!(fmt12(-0.00123456789012345), "-0.00123456789012");
        assert_eq!(fmt12(123456.0), "123456.000000");
        assert_eq!(fmt12(0.0), "0");
    }
}
