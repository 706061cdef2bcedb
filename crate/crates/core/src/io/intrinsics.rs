use std::path::Path;

use super::{data_lines, parse_reals, read_text, write_file};
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;

pub fn read_intrinsics(path: &Path) -> Result<CameraIntrinsics> {
    let text = read_text(path)?;
    let mut lines = data_lines(&text);
    let (n, line) = lines.next().ok_or_else(|| Error::parse(path, 1, "empty intrinsics file"))?;
    let v = parse_reals(path, n, line, 6)?;
    let dim = |x: f64| -> Result<usize> {
        if x.fract() == 0.0 && x > 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::parse(path, n, format!("image size must be a positive integer, got {x}")))
        }
    };
    CameraIntrinsics::new(v[0], v[1], v[2], v[3], dim(v[4])?, dim(v[5])?).map_err(|e| Error::parse(path, n, e.to_string()))
}

pub fn write_intrinsics(path: &Path, intr: &CameraIntrinsics) -> Result<()> {
    let line = format!(
        "{} {} {} {} {} {}\n",
        intr.fx, intr.fy, intr.cx, intr.cy, intr.width, intr.height
    );
    write_file(path, line.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("intrinsics.txt");
        let intr = CameraIntrinsics::new(525.5, 520.25, 319.5, 239.5, 640, 480).unwrap();
        write_intrinsics(&p, &intr).unwrap();
        assert_eq!(read_intrinsics(&p).unwrap(), intr);
        std::fs::write(&p, "1 1 1 1 2.5 2\n").unwrap();
        assert!(read_intrinsics(&p).is_err());
        std::fs::write(&p, "").unwrap();
        assert!(read_intrinsics(&p).is_err());
    }
}
