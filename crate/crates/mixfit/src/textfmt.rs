//! Deterministic numeric formatting shared by file formats and the CLI.

/// Format with 12 significant digits; values with magnitude below 1e-4 use
/// scientific notation.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    if v.abs() < 1e-4 {
        return format!("{:.11e}", v);
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{:.*}", decimals, v)
}
