//! CSV/report writing helpers: fixed-point formatting and atomic file
//! replacement (write to a temporary sibling, then rename).

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

pub use morlab::render::fixed6;
use morlab::ObjVec;

/// Comma-separated fixed-point components: `0.900000,-14.500000`.
pub fn csv_fields(v: &ObjVec) -> String {
    v.iter().map(|&x| fixed6(x)).collect::<Vec<_>>().join(",")
}

/// Display form with parentheses: `(0.900000, -14.500000)`.
pub fn display_vec(v: &ObjVec) -> String {
    let fields: Vec<String> = v.iter().map(|&x| fixed6(x)).collect();
    format!("({})", fields.join(", "))
}

/// Writes a file atomically relative to observers of the final path.
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("cannot move into {}", path.display()))?;
    Ok(())
}
