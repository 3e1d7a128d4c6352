//! Number formatting for tabular output.

/// Significant digits used when writing numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// Six significant digits.
    Short,
    /// Seventeen significant digits, enough to round-trip any `f64`.
    Full,
    /// Shortest representation that parses back to the same `f64`.
    RoundTrip,
}

impl Precision {
    pub fn format(self, x: f64) -> String {
        match self {
            Precision::Short => format_sig(x, 6),
            Precision::Full => format_sig(x, 17),
            Precision::RoundTrip => format!("{x}"),
        }
    }
}

/// `%g`-style formatting with `sig` significant digits and trailing zeros
/// removed.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
