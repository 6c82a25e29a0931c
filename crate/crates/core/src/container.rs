//! `GRSP` raster container.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset  size        field
//! 0       4           magic "GRSP"
//! 4       2           format version (u16) = 1
//! 6       8           origin_lon (f64)
//! 14      8           origin_lat (f64)
//! 22      8           pixel_size (f64)
//! 30      4           width (u32)
//! 34      4           height (u32)
//! 38      2           band count (u16)
//! 40      ...         per band: name length (u16), UTF-8 name, width*height f32 row-major
//! ...     w*h         validity plane, one byte per pixel (0 or 1)
//! ```

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::raster::{Band, GridSpec, Raster};

pub const MAGIC: &[u8; 4] = b"GRSP";
pub const FORMAT_VERSION: u16 = 1;
/// Bytes before the first band record.
pub const HEADER_LEN: u64 = 40;

#[derive(Debug, Error)]
pub enum ContainerError {
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("format violation at byte {offset}: {reason}")]
    FormatViolation { offset: u64, reason: String },
    #[error("cannot encode raster: {0}")]
    Unencodable(String),
}

impl ContainerError {
    pub fn code(&self) -> &'static str {
        match self {
            ContainerError::Io(_) => "IoFailure",
            ContainerError::FormatViolation { .. } => "FormatViolation",
            ContainerError::Unencodable(_) => "Unencodable",
        }
    }
}

/// Exact encoded size of a raster.
pub fn encoded_len(raster: &Raster) -> u64 {
    let n = raster.grid().len() as u64;
    let names: u64 = raster.bands().iter().map(|b| 2 + b.name.len() as u64).sum();
    HEADER_LEN + names + 4 * n * raster.bands().len() as u64 + n
}

pub fn encode<W: Write>(raster: &Raster, mut w: W) -> Result<(), ContainerError> {
    let grid = raster.grid();
    let band_count =
        u16::try_from(raster.bands().len()).map_err(|_| ContainerError::Unencodable("more than 65535 bands".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&grid.origin_lon.to_le_bytes())?;
    w.write_all(&grid.origin_lat.to_le_bytes())?;
    w.write_all(&grid.pixel_size.to_le_bytes())?;
    w.write_all(&grid.width.to_le_bytes())?;
    w.write_all(&grid.height.to_le_bytes())?;
    w.write_all(&band_count.to_le_bytes())?;
    let mut buf = Vec::with_capacity(grid.len() * 4);
    for band in raster.bands() {
        let name_len = u16::try_from(band.name.len())
            .map_err(|_| ContainerError::Unencodable(format!("band name of {} bytes", band.name.len())))?;
        w.write_all(&name_len.to_le_bytes())?;
        w.write_all(band.name.as_bytes())?;
        buf.clear();
        for v in &band.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    let mask: Vec<u8> = raster.valid().iter().map(|&v| v as u8).collect();
    w.write_all(&mask)?;
    Ok(())
}

pub fn to_bytes(raster: &Raster) -> Vec<u8> {
    let mut out = Vec::with_capacity(encoded_len(raster) as usize);
    encode(raster, &mut out).expect("writing to a Vec cannot fail");
    out
}

/// Bounds-checked cursor that reports the offset of the first bad byte.
struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn violation(&self, offset: usize, reason: impl Into<String>) -> ContainerError {
        ContainerError::FormatViolation { offset: offset as u64, reason: reason.into() }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ContainerError> {
        let end = self.pos.checked_add(n).filter(|end| *end <= self.data.len());
        match end {
            Some(end) => {
                let out = &self.data[self.pos..end];
                self.pos = end;
                Ok(out)
            }
            None => {
                Err(self
                    .violation(self.data.len(), format!("truncated while reading {what} ({n} bytes at {})", self.pos)))
            }
        }
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], ContainerError> {
        Ok(self.take(N, what)?.try_into().expect("length checked"))
    }

    fn u16(&mut self, what: &str) -> Result<u16, ContainerError> {
        Ok(u16::from_le_bytes(self.array(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32, ContainerError> {
        Ok(u32::from_le_bytes(self.array(what)?))
    }

    fn f64(&mut self, what: &str) -> Result<f64, ContainerError> {
        Ok(f64::from_le_bytes(self.array(what)?))
    }
}

pub fn decode(data: &[u8]) -> Result<Raster, ContainerError> {
    let mut cur = Cursor { data, pos: 0 };
    let magic = cur.take(4, "magic")?;
    if magic != MAGIC {
        return Err(cur.violation(0, format!("bad magic {magic:?}")));
    }
    let version = cur.u16("version")?;
    if version != FORMAT_VERSION {
        return Err(cur.violation(4, format!("unsupported version {version}")));
    }
    let grid = GridSpec {
        origin_lon: cur.f64("origin_lon")?,
        origin_lat: cur.f64("origin_lat")?,
        pixel_size: cur.f64("pixel_size")?,
        width: cur.u32("width")?,
        height: cur.u32("height")?,
    };
    grid.validate().map_err(|e| cur.violation(6, e.to_string()))?;
    let n = grid.len();
    let band_count = cur.u16("band count")?;
    let mut bands = Vec::with_capacity(band_count as usize);
    for i in 0..band_count {
        let name_at = cur.pos;
        let name_len = cur.u16("band name length")? as usize;
        let raw = cur.take(name_len, "band name")?;
        let name = std::str::from_utf8(raw)
            .map_err(|_| cur.violation(name_at + 2, format!("band {i} name is not UTF-8")))?
            .to_owned();
        if bands.iter().any(|b: &Band| b.name == name) {
            return Err(cur.violation(name_at, format!("duplicate band name '{name}'")));
        }
        let bytes = n.checked_mul(4).ok_or_else(|| cur.violation(30, "grid too large"))?;
        let raw = cur.take(bytes, "band values")?;
        let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("chunk of 4"))).collect();
        bands.push(Band { name, values });
    }
    let mask_at = cur.pos;
    let raw = cur.take(n, "validity plane")?;
    if let Some(bad) = raw.iter().position(|b| *b > 1) {
        return Err(cur.violation(mask_at + bad, format!("validity byte {} is not 0/1", raw[bad])));
    }
    let valid = raw.iter().map(|b| *b == 1).collect();
    if cur.pos != data.len() {
        return Err(cur.violation(cur.pos, "trailing bytes after validity plane"));
    }
    Raster::new(grid, bands, valid).map_err(|e| cur.violation(0, e.to_string()))
}

pub fn write_container(raster: &Raster, path: impl AsRef<Path>) -> Result<(), ContainerError> {
    let mut w = BufWriter::new(File::create(path)?);
    encode(raster, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_container(path: impl AsRef<Path>) -> Result<Raster, ContainerError> {
    let mut data = Vec::new();
    File::open(path)?.read_to_end(&mut data)?;
    decode(&data)
}
