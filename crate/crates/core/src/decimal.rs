//! Fixed-point rendering of exact rationals.

use num_rational::Ratio;

/// Exact score type. All table values are quarters and every combination
/// step is a division by a small integer, so `i64` never overflows here.
pub type Score = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Ties away from zero.
    HalfUp,
    /// Ties to the even neighbour.
    HalfEven,
}

/// Rounds `value` to `decimals` places and returns the scaled integer,
/// e.g. 43/8 at 2 places, half-up, gives 538.
pub fn round_scaled(value: Ratio<i64>, decimals: u32, rounding: Rounding) -> i64 {
    let scale = 10i64.pow(decimals);
    let scaled = value * scale;
    let negative = scaled < Ratio::from_integer(0);
    let magnitude = if negative { -scaled } else { scaled };
    let floor = magnitude.to_integer();
    let frac = magnitude - Ratio::from_integer(floor);
    let half = Ratio::new(1, 2);
    let up = match frac.cmp(&half) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => match rounding {
            Rounding::HalfUp => true,
            Rounding::HalfEven => floor % 2 == 1,
        },
    };
    let rounded = if up { floor + 1 } else { floor };
    if negative {
        -rounded
    } else {
        rounded
    }
}

/// Renders with exactly `decimals` places.
pub fn format_fixed(value: Ratio<i64>, decimals: u32, rounding: Rounding) -> String {
    let scaled = round_scaled(value, decimals, rounding);
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.unsigned_abs();
    if decimals == 0 {
        return format!("{sign}{scaled}");
    }
    let scale = 10u64.pow(decimals);
    format!(
        "{sign}{}.{:0width$}",
        scaled / scale,
        scaled % scale,
        width = decimals as usize
    )
}

/// Renders with at most `decimals` places, trimming trailing zeros
/// (`0.6250` becomes `0.625`, `1.0000` becomes `1`).
pub fn format_trimmed(value: Ratio<i64>, decimals: u32, rounding: Rounding) -> String {
    let s = format_fixed(value, decimals, rounding);
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

/// `part / whole` as a percentage with two decimals, half-up. `None` when
/// `whole` is zero.
pub fn percent(part: u64, whole: u64) -> Option<String> {
    if whole == 0 {
        return None;
    }
    let r = Ratio::new(part as i64 * 100, whole as i64);
    Some(format_fixed(r, 2, Rounding::HalfUp))
}

pub fn to_f64(value: Ratio<i64>) -> f64 {
    *value.numer() as f64 / *value.denom() as f64
}
