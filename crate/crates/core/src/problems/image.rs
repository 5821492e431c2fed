//! Grayscale image I/O: portable graymaps (P2/P5, 8- or 16-bit) and plain
//! CSV matrices. Pixels are held row-major as `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || pixels.len() != rows * cols {
            return Err(Error::usage(format!("{} pixels do not fill a {rows}x{cols} image", pixels.len())));
        }
        Ok(GrayImage { rows, cols, pixels })
    }

    pub fn from_vector(rows: usize, cols: usize, v: &Vector) -> Result<Self> {
        GrayImage::new(rows, cols, v.as_slice().to_vec())
    }

    pub fn to_vector(&self) -> Result<Vector> {
        Vector::new(self.pixels.clone())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// Reads the next whitespace-separated header token, skipping `#` comments.
/// Returns the token and the byte offset just past it.
fn header_token(bytes: &[u8], mut pos: usize, line: &mut usize) -> Result<(String, usize)> {
    loop {
        match bytes.get(pos) {
            None => return Err(parse_err(*line, "truncated PGM header")),
            Some(b'#') => {
                while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                    pos += 1;
                }
            }
            Some(b) if b.is_ascii_whitespace() => {
                if *b == b'\n' {
                    *line += 1;
                }
                pos += 1;
            }
            Some(_) => break,
        }
    }
    let start = pos;
    while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        pos += 1;
    }
    Ok((String::from_utf8_lossy(&bytes[start..pos]).into_owned(), pos))
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_pgm(&fs::read(path)?)
}

pub fn parse_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut line = 1;
    let (magic, pos) = header_token(bytes, 0, &mut line)?;
    let binary = match magic.as_str() {
        "P5" => true,
        "P2" => false,
        other => return Err(parse_err(line, format!("unsupported magic {other:?}"))),
    };
    let mut fields = [0usize; 3];
    let mut pos = pos;
    for (k, name) in ["width", "height", "maxval"].iter().enumerate() {
        let (tok, next) = header_token(bytes, pos, &mut line)?;
        fields[k] = tok.parse().map_err(|_| parse_err(line, format!("bad {name} {tok:?}")))?;
        pos = next;
    }
    let [cols, rows, maxval] = fields;
    if cols == 0 || rows == 0 || maxval == 0 || maxval > 65535 {
        return Err(parse_err(line, format!("bad dimensions {cols}x{rows} or maxval {maxval}")));
    }
    let n = rows * cols;
    let pixels = if binary {
        // a single whitespace byte separates the header from the raster
        let data = bytes.get(pos + 1..).unwrap_or(&[]);
        let width = if maxval < 256 { 1 } else { 2 };
        if data.len() < n * width {
            return Err(parse_err(line, format!("raster holds {} bytes, need {}", data.len(), n * width)));
        }
        if width == 1 {
            data[..n].iter().map(|&b| b as f64).collect()
        } else {
            data[..2 * n].chunks(2).map(|p| u16::from_be_bytes([p[0], p[1]]) as f64).collect()
        }
    } else {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let (tok, next) = header_token(bytes, pos, &mut line)?;
            let v: usize = tok.parse().map_err(|_| parse_err(line, format!("bad pixel {tok:?}")))?;
            if v > maxval {
                return Err(parse_err(line, format!("pixel {v} exceeds maxval {maxval}")));
            }
            out.push(v as f64);
            pos = next;
        }
        out
    };
    GrayImage::new(rows, cols, pixels)
}

/// Writes binary PGM, rounding and clamping pixels to `0..=maxval`.
/// `maxval` above 255 selects 16-bit samples.
pub fn write_pgm(path: impl AsRef<Path>, image: &GrayImage, maxval: u16) -> Result<()> {
    if maxval == 0 {
        return Err(Error::usage("maxval must be positive"));
    }
    let mut out = format!("P5\n{} {}\n{}\n", image.cols, image.rows, maxval).into_bytes();
    for &p in &image.pixels {
        let v = p.round().clamp(0.0, maxval as f64) as u16;
        if maxval < 256 {
            out.push(v as u8);
        } else {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_csv_matrix(path: impl AsRef<Path>) -> Result<GrayImage> {
    parse_csv_matrix(&fs::read_to_string(path)?)
}

pub fn parse_csv_matrix(text: &str) -> Result<GrayImage> {
    let mut cols = 0;
    let mut pixels = Vec::new();
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>().map_err(|_| parse_err(i + 1, format!("bad number {:?}", f.trim()))))
            .collect::<Result<Vec<_>>>()?;
        if rows == 0 {
            cols = row.len();
        } else if row.len() != cols {
            return Err(parse_err(i + 1, format!("expected {cols} columns, got {}", row.len())));
        }
        pixels.extend(row);
        rows += 1;
    }
    GrayImage::new(rows, cols, pixels)
}

pub fn write_csv_matrix(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for row in image.pixels.chunks(image.cols) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(f, "{}", line.join(","))?;
    }
    Ok(())
}
