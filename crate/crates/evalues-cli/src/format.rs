//! Locale-independent significant-digit formatting.
//!
//! Behaves like C's `%.*g`: round to the requested number of significant
//! digits, print positionally when the exponent is moderate, otherwise in
//! scientific notation, and trim trailing zeros either way.

pub fn fmt_sig(value: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if value == 0.0 {
        return "0".to_string();
    }
    if !value.is_finite() {
        return format!("{value}");
    }
    let scientific = format!("{:.*e}", digits - 1, value);
    let (_, exponent) = scientific
        .split_once('e')
        .expect("scientific format always contains an exponent");
    let exponent: i32 = exponent.parse().expect("valid exponent");
    if exponent >= -4 && exponent < digits as i32 {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        trim_zeros(&format!("{value:.decimals$}"))
    } else {
        let (mantissa, _) = scientific.split_once('e').unwrap();
        format!("{}e{}", trim_zeros(mantissa), exponent)
    }
}

/// 17 significant digits: enough to reconstruct the f64 bit pattern.
pub fn fmt_g17(value: f64) -> String {
    fmt_sig(value, 17)
}

/// 16 significant digits: the display precision for merged values.
pub fn fmt_g16(value: f64) -> String {
    fmt_sig(value, 16)
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integral_values_print_bare() {
        assert_eq!(fmt_g16(6.0), "6");
        assert_eq!(fmt_g16(-3.0), "-3");
        assert_eq!(fmt_g16(0.0), "0");
        assert_eq!(fmt_g16(-0.0), "0");
    }

    #[test]
    fn sixteen_digit_examples() {
        assert_eq!(fmt_g16(11.0 / 3.0), "3.666666666666667");
        assert_eq!(fmt_g16(10.0 / 3.0), "3.333333333333333");
        assert_eq!(fmt_g16(1.495), "1.495");
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[
            1.2425990099009901,
            std::f64::consts::PI,
            22.5,
            1.0 / 3.0,
            1e-7,
            6.02e23,
            -0.045,
        ] {
            let printed = fmt_g17(x);
            let parsed: f64 = printed.parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "{x} printed as {printed}");
        }
    }

    #[test]
    fn scientific_for_extreme_magnitudes() {
        assert_eq!(fmt_sig(1e-7, 4), "1e-7");
        assert_eq!(fmt_sig(12345678.0, 4), "1.235e7");
        assert_eq!(fmt_sig(0.00012, 2), "0.00012");
    }

    #[test]
    fn rounding_carries_across_the_exponent() {
        assert_eq!(fmt_sig(0.99995, 4), "1");
        assert_eq!(fmt_sig(9.9999e9, 3), "1e10");
    }

    #[test]
    fn non_finite_values() {
        assert_eq!(fmt_g17(f64::INFINITY), "inf");
        assert_eq!(fmt_g17(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_g17(f64::NAN), "NaN");
    }
}
