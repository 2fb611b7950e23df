//! Numeric formatting for CSV artifacts: 12 significant digits, `.` decimal
//! separator, no locale. Fixed format keeps outputs byte-identical across
//! runs and platforms.

/// Formats with 12 significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize -0.0
    format!("{x:.11e}")
}

/// Joins already-formatted fields into one CSV line.
pub fn line<I: IntoIterator<Item = String>>(fields: I) -> String {
    fields.into_iter().collect::<Vec<_>>().join(",")
}
