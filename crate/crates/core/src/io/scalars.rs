use std::fmt::Write as _;
use std::path::Path;

use super::{data_lines, parse_reals, read_text, write_file};
use crate::error::Result;
use crate::geometry::Point3;

/// `(position, value)` pairs, one `x y z value` per line.
pub fn read_scalars(path: &Path) -> Result<Vec<(Point3, f64)>> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(n, line)| parse_reals(path, n, line, 4).map(|v| (Point3::new(v[0], v[1], v[2]), v[3])))
        .collect()
}

pub fn write_scalars(path: &Path, values: &[(Point3, f64)]) -> Result<()> {
    let mut out = String::new();
    for (p, f) in values {
        writeln!(out, "{} {} {} {}", p.x, p.y, p.z, f).expect("write to string");
    }
    write_file(path, out.as_bytes())
}
