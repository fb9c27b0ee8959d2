//! Fixed-point number rendering shared by CSV writers: six decimals, `.`
//! separator, trailing zeros kept, so regression diffs are byte-stable.

/// `-14.5` becomes `"-14.500000"`.
pub fn fixed6(x: f64) -> String {
    format!("{x:.6}")
}

/// Renders a vector as comma-separated fixed-point fields.
pub fn fixed6_fields<'a>(values: impl IntoIterator<Item = &'a f64>) -> String {
    values.into_iter().map(|&x| fixed6(x)).collect::<Vec<_>>().join(",")
}
