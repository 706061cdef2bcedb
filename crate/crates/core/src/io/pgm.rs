use std::path::Path;

use super::{read_bytes, write_file};
use crate::error::{Error, Result};
use crate::raster::{Raster, RasterKind};

/// Byte value marking an invalid pixel.
pub const INVALID: u8 = 255;

/// Reads a binary (P5) 8-bit PGM as a class-index or binary raster.
pub fn read_pgm(path: &Path, kind: RasterKind) -> Result<Raster> {
    let bytes = read_bytes(path)?;
    let bad = |msg: String| Error::Format {
        file: path.to_path_buf(),
        msg,
    };
    if !matches!(kind, RasterKind::ClassIndex | RasterKind::Binary) {
        return Err(bad(format!("PGM cannot hold a {kind:?} raster")));
    }

    // header: magic, width, height, maxval separated by whitespace or comments,
    // then exactly one whitespace byte before the pixel data
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if fields[0] != "P5" {
        return Err(bad(format!("expected P5 magic, found {:?}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad(format!("bad PGM header field {s:?}")));
    let (w, h, maxval) = (num(&fields[1])?, num(&fields[2])?, num(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(bad(format!("only 8-bit PGM is supported, maxval {maxval}")));
    }
    pos += 1;
    let body = bytes.get(pos..).unwrap_or(&[]);
    if body.len() != w * h {
        return Err(bad(format!("expected {} pixels, found {}", w * h, body.len())));
    }

    let mut data = Vec::with_capacity(body.len());
    let mut valid = Vec::with_capacity(body.len());
    for &b in body {
        let ok = b != INVALID;
        if ok && kind == RasterKind::Binary && b > 1 {
            return Err(bad(format!("binary label {b} not in {{0, 1, {INVALID}}}")));
        }
        data.push(if ok { b as f64 } else { 0.0 });
        valid.push(ok);
    }
    Raster::new(kind, w, h, data, valid).map_err(|e| bad(e.to_string()))
}

pub fn write_pgm(path: &Path, raster: &Raster) -> Result<()> {
    let bad = |msg: String| Error::Format {
        file: path.to_path_buf(),
        msg,
    };
    if !matches!(raster.kind(), RasterKind::ClassIndex | RasterKind::Binary) {
        return Err(bad(format!("PGM cannot hold a {:?} raster", raster.kind())));
    }
    let mut out = format!("P5\n{} {}\n255\n", raster.width(), raster.height()).into_bytes();
    for i in 0..raster.len() {
        match raster.get_index(i) {
            Some(v) if v < INVALID as f64 => out.push(v as u8),
            Some(v) => return Err(bad(format!("class {v} does not fit below {INVALID}"))),
            None => out.push(INVALID),
        }
    }
    write_file(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_mask() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.pgm");
        let r = Raster::new(
            RasterKind::ClassIndex,
            3,
            2,
            vec![0.0, 4.0, 0.0, 18.0, 1.0, 2.0],
            vec![true, true, false, true, true, true],
        )
        .unwrap();
        write_pgm(&p, &r).unwrap();
        assert_eq!(read_pgm(&p, RasterKind::ClassIndex).unwrap(), r);
    }

    #[test]
    fn header_comments() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("b.pgm");
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[1, 255]);
        std::fs::write(&p, bytes).unwrap();
        let r = read_pgm(&p, RasterKind::Binary).unwrap();
        assert_eq!(r.get(0, 0), Some(1.0));
        assert_eq!(r.get(1, 0), None);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.pgm");
        std::fs::write(&p, b"P2\n1 1\n255\n0").unwrap();
        assert!(read_pgm(&p, RasterKind::Binary).is_err());
        std::fs::write(&p, b"P5\n2 2\n255\n\x00\x01").unwrap();
        assert!(read_pgm(&p, RasterKind::Binary).is_err());
        std::fs::write(&p, b"P5\n1 1\n255\n\x07").unwrap();
        assert!(read_pgm(&p, RasterKind::Binary).is_err());
        assert!(read_pgm(&p, RasterKind::ClassIndex).is_ok());
    }
}
