//! Exact rational numbers for resource shares, bounds and ratios.

use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Reduced fraction with a positive denominator. Comparisons are exact.
pub type Ratio = num_rational::Ratio<i128>;

/// Builds `num / den` from unsigned quantities.
///
/// Panics if `den` is zero.
pub fn ratio(num: u128, den: u128) -> Ratio {
    Ratio::new(to_i128(num), to_i128(den))
}

pub(crate) fn to_i128(v: u128) -> i128 {
    i128::try_from(v).expect("quantity exceeds i128 range")
}

/// Renders `value` with exactly `places` decimals, rounding half to even.
pub fn format_decimal(value: &Ratio, places: u32) -> String {
    let negative = value.is_negative();
    let value = value.abs();
    let scale = 10i128.pow(places);
    let scaled = value * Ratio::from_integer(scale);
    let (mut q, r) = scaled.numer().div_rem(scaled.denom());
    let twice = 2 * r;
    let den = *scaled.denom();
    if twice > den || (twice == den && q.is_odd()) {
        q += 1;
    }
    let int_part = q / scale;
    let frac_part = q % scale;
    let sign = if negative && !(int_part.is_zero() && frac_part.is_zero()) {
        "-"
    } else {
        ""
    };
    if places == 0 {
        format!("{sign}{int_part}")
    } else {
        format!(
            "{sign}{int_part}.{frac_part:0width$}",
            width = places as usize
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_form() {
        let r = ratio(6, 8);
        assert_eq!((*r.numer(), *r.denom()), (3, 4));
        assert!(ratio(2, 3) > ratio(666_666, 1_000_000));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(format_decimal(&ratio(2, 1), 6), "2.000000");
        assert_eq!(format_decimal(&ratio(4, 3), 6), "1.333333");
        assert_eq!(format_decimal(&ratio(5, 3), 6), "1.666667");
        assert_eq!(format_decimal(&ratio(0, 1), 2), "0.00");
        assert_eq!(format_decimal(&Ratio::new(-1, 3), 3), "-0.333");
        assert_eq!(format_decimal(&ratio(7, 2), 0), "4");
    }

    #[test]
    fn half_even() {
        // 0.0000005 -> 0.000000, 0.0000015 -> 0.000002
        assert_eq!(format_decimal(&ratio(5, 10_000_000), 6), "0.000000");
        assert_eq!(format_decimal(&ratio(15, 10_000_000), 6), "0.000002");
        assert_eq!(format_decimal(&ratio(25, 10), 0), "2");
        assert_eq!(format_decimal(&ratio(35, 10), 0), "4");
    }
}
