use std::fmt::Write as _;
use std::path::Path;

use super::{data_lines, parse_reals, read_text, write_file};
use crate::error::{Error, Result};
use crate::geometry::Pose;

pub fn read_poses(path: &Path) -> Result<Vec<Pose>> {
    let text = read_text(path)?;
    data_lines(&text)
        .map(|(n, line)| {
            let v = parse_reals(path, n, line, 12)?;
            let m: [f64; 12] = v.try_into().expect("length checked");
            Pose::from_row_major_3x4(&m).map_err(|e| Error::parse(path, n, e.to_string()))
        })
        .collect()
}

pub fn write_poses(path: &Path, poses: &[Pose]) -> Result<()> {
    let mut out = String::new();
    for p in poses {
        let row: Vec<String> = p.to_row_major_3x4().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", row.join(" ")).expect("write to string");
    }
    write_file(path, out.as_bytes())
}
