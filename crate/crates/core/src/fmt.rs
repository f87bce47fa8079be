//! Fixed-width float formatting shared by CSV reports and golden files.

/// Format with 12 significant digits in scientific notation.
///
/// All report files use this single formatter so that identical inputs
/// produce byte-identical output.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0.00000000000e0" leaking sign noise into reports.
        return "0.00000000000e0".to_string();
    }
    format!("{:.11e}", x)
}
