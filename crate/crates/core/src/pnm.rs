//! Binary netpbm rasters: `P6` (RGB) and `P5` (single channel), 8-bit only.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

pub fn decode(bytes: &[u8]) -> Result<Raster> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos)?;
    let channels = match magic {
        b"P6" => 3,
        b"P5" => 1,
        other => {
            return Err(Error::format(format!(
                "unsupported raster magic {:?}; expected P5 or P6",
                String::from_utf8_lossy(other)
            )))
        }
    };
    let width = parse_dim(next_token(bytes, &mut pos)?, "width")?;
    let height = parse_dim(next_token(bytes, &mut pos)?, "height")?;
    let maxval = parse_dim(next_token(bytes, &mut pos)?, "maxval")?;
    if maxval > 255 {
        return Err(Error::format(format!("maxval {maxval} exceeds 8-bit range")));
    }
    // exactly one whitespace byte separates the header from the samples
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format("missing separator after raster header"));
    }
    pos += 1;
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| Error::format("raster dimensions overflow"))?;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| {
            Error::format(format!(
                "truncated raster: expected {len} sample bytes, found {}",
                bytes.len().saturating_sub(pos)
            ))
        })?
        .to_vec();
    Ok(Raster {
        width,
        height,
        channels,
        data,
    })
}

pub fn encode(raster: &Raster) -> Vec<u8> {
    let magic = if raster.channels == 3 { "P6" } else { "P5" };
    let mut out = format!("{magic}\n{} {}\n255\n", raster.width, raster.height).into_bytes();
    out.extend_from_slice(&raster.data);
    out
}

pub fn read(path: &Path) -> Result<Raster> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).in_file(path))?;
    decode(&bytes).map_err(|e| e.in_file(path))
}

pub fn write(path: &Path, raster: &Raster) -> Result<()> {
    fs::write(path, encode(raster)).map_err(|e| Error::from(e).in_file(path))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::format("truncated raster header"));
    }
    Ok(&bytes[start..*pos])
}

fn parse_dim(token: &[u8], what: &str) -> Result<usize> {
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&v| v > 0)
        .ok_or_else(|| {
            Error::format(format!(
                "bad raster {what} {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comments() {
        let mut bytes = b"P5\n# made by hand\n2 1\n# max\n255\n".to_vec();
        bytes.extend_from_slice(&[7, 9]);
        let r = decode(&bytes).unwrap();
        assert_eq!((r.width, r.height, r.channels), (2, 1, 1));
        assert_eq!(r.data, vec![7, 9]);
    }

    #[test]
    fn encode_then_decode() {
        let r = Raster {
            width: 2,
            height: 2,
            channels: 3,
            data: (0..12).collect(),
        };
        assert_eq!(decode(&encode(&r)).unwrap(), r);
    }

    #[test]
    fn rejects_truncated_and_foreign() {
        assert!(matches!(decode(b"P6\n2 2\n255\n\x00\x01"), Err(Error::Format(_))));
        assert!(matches!(decode(b"\x89PNG\r\n"), Err(Error::Format(_))));
        assert!(matches!(decode(b"P5\n0 2\n255\n"), Err(Error::Format(_))));
        assert!(matches!(decode(b"P5\n1 1\n65535\n\x00\x00"), Err(Error::Format(_))));
    }
}
