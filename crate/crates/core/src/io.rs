//! Plain-file output: binary PGM images and CSV tables.
//!
//! Images use cell value 1 = black (0) and 0 = white (255), one pixel per cell.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::rule::Config1D;

/// Binary (P5) PGM of a rectangular 0/1 array given as rows.
pub fn pgm_bytes(rows: &[Vec<u8>]) -> Result<Vec<u8>> {
    let h = rows.len();
    let w = rows.first().map_or(0, Vec::len);
    if h == 0 || w == 0 {
        return Err(Error::invalid("image", "no pixels"));
    }
    if rows.iter().any(|r| r.len() != w) {
        return Err(Error::invalid("image", "rows have different lengths"));
    }
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h);
    for row in rows {
        out.extend(row.iter().map(|&v| if v == 1 { 0u8 } else { 255u8 }));
    }
    Ok(out)
}

/// Spacetime diagram of a 1D history, one row per step.
pub fn history_pgm(history: &[Config1D]) -> Result<Vec<u8>> {
    let rows: Vec<Vec<u8>> = history.iter().map(|c| c.cells().to_vec()).collect();
    pgm_bytes(&rows)
}

/// Decode a P5 PGM written by [`pgm_bytes`] back into 0/1 rows.
pub fn parse_pgm(bytes: &[u8]) -> Result<Vec<Vec<u8>>> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    pos += 1;
    if fields[0] != "P5" {
        return Err(Error::Parse(format!("not a binary PGM: {}", fields[0])));
    }
    let num = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("PGM header {s:?}: {e}")));
    let (w, h) = (num(&fields[1])?, num(&fields[2])?);
    let data = &bytes[pos.min(bytes.len())..];
    if data.len() != w * h {
        return Err(Error::Parse(format!("PGM has {} pixels, header says {w}x{h}", data.len())));
    }
    Ok(data.chunks(w).map(|r| r.iter().map(|&p| u8::from(p < 128)).collect()).collect())
}

/// `cell,value` rows.
pub fn config_csv(config: &Config1D) -> String {
    let mut out = String::from("cell,value\n");
    for (i, v) in config.cells().iter().enumerate() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

/// Header `c0,...,c{w-1}` then one line per grid row.
pub fn grid_csv(rows: &[Vec<u8>]) -> String {
    let w = rows.first().map_or(0, Vec::len);
    let mut out = (0..w).map(|i| format!("c{i}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.iter().map(u8::to_string).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_pixel_pgm() {
        let b = pgm_bytes(&[vec![1]]).unwrap();
        assert_eq!(b, b"P5\n1 1\n255\n\x00");
        assert_eq!(parse_pgm(&b).unwrap(), vec![vec![1]]);
    }

    #[test]
    fn pgm_round_trip_and_errors() {
        let rows = vec![vec![0, 1, 1], vec![1, 0, 0]];
        assert_eq!(parse_pgm(&pgm_bytes(&rows).unwrap()).unwrap(), rows);
        assert!(pgm_bytes(&[]).is_err());
        assert!(pgm_bytes(&[vec![0], vec![0, 1]]).is_err());
        assert!(parse_pgm(b"P2\n1 1\n255\n0").is_err());
        assert!(parse_pgm(b"P5\n2 2\n255\n\x00").is_err());
    }

    #[test]
    fn csv_layouts() {
        assert_eq!(config_csv(&Config1D::parse("10").unwrap()), "cell,value\n0,1\n1,0\n");
        assert_eq!(grid_csv(&[vec![0, 1], vec![1, 1]]), "c0,c1\n0,1\n1,1\n");
    }
}
