//! "vox3" text and raw grid formats.
//!
//! Text: `vox3 <nx> <ny> <nz>\n`, then `nz` blocks of `ny` lines of `nx`
//! characters (`1`/`0`), LF-terminated. Blank lines between blocks are
//! accepted on read and never written.
//!
//! Raw: magic `V X 3 NUL`, then nx, ny, nz as little-endian u32, then
//! `ceil(n / 8)` payload bytes, LSB-first, x-fastest; pad bits are zero.

use std::io::{Read, Write};
use std::str::FromStr;

use super::{check_dims, GridError, VoxelGrid};

pub const RAW_MAGIC: [u8; 4] = *b"VX3\0";
const TEXT_MAGIC: &[u8] = b"vox3 ";
const RAW_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Text,
    Raw,
}

impl FromStr for GridFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(Self::Text),
            "raw" => Ok(Self::Raw),
            other => Err(format!(
                "unknown grid format '{other}' (expected text or raw)"
            )),
        }
    }
}

/// Sniffs the format from the leading bytes.
pub fn detect_format(bytes: &[u8]) -> Option<GridFormat> {
    if bytes.starts_with(&RAW_MAGIC) {
        Some(GridFormat::Raw)
    } else if bytes.starts_with(TEXT_MAGIC) {
        Some(GridFormat::Text)
    } else {
        None
    }
}

pub fn load_grid(mut source: impl Read, format: GridFormat) -> Result<VoxelGrid, GridError> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    match format {
        GridFormat::Text => parse_text(&bytes),
        GridFormat::Raw => parse_raw(&bytes),
    }
}

pub fn save_grid(
    grid: &VoxelGrid,
    format: GridFormat,
    mut sink: impl Write,
) -> Result<(), GridError> {
    let bytes = match format {
        GridFormat::Text => encode_text(grid),
        GridFormat::Raw => encode_raw(grid),
    };
    sink.write_all(&bytes)?;
    Ok(())
}

fn encode_text(grid: &VoxelGrid) -> Vec<u8> {
    let [nx, ny, nz] = grid.dims();
    let mut out = format!("vox3 {nx} {ny} {nz}\n").into_bytes();
    out.reserve(grid.len() + ny * nz);
    for row in grid.cells().chunks(nx) {
        out.extend(row.iter().map(|&c| if c { b'1' } else { b'0' }));
        out.push(b'\n');
    }
    out
}

fn encode_raw(grid: &VoxelGrid) -> Vec<u8> {
    let mut out = Vec::with_capacity(RAW_HEADER_LEN + grid.len().div_ceil(8));
    out.extend_from_slice(&RAW_MAGIC);
    for d in grid.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for chunk in grid.cells().chunks(8) {
        let byte = chunk
            .iter()
            .enumerate()
            .fold(0u8, |acc, (bit, &c)| acc | ((c as u8) << bit));
        out.push(byte);
    }
    out
}

fn header_err(offset: usize, message: impl Into<String>) -> GridError {
    GridError::Header {
        offset,
        message: message.into(),
    }
}

fn parse_text(bytes: &[u8]) -> Result<VoxelGrid, GridError> {
    if !bytes.starts_with(TEXT_MAGIC) {
        return Err(header_err(0, "expected 'vox3 ' prefix"));
    }
    let header_end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| header_err(bytes.len(), "header line has no LF terminator"))?;
    let mut dims = [0usize; 3];
    let mut offset = TEXT_MAGIC.len();
    let fields: Vec<&[u8]> = bytes[offset..header_end].split(|&b| b == b' ').collect();
    if fields.len() != 3 {
        return Err(header_err(
            offset,
            format!("expected 3 dimensions, found {}", fields.len()),
        ));
    }
    for (d, field) in dims.iter_mut().zip(&fields) {
        if field.is_empty() || !field.iter().all(u8::is_ascii_digit) {
            return Err(header_err(offset, "dimension is not a decimal integer"));
        }
        // all-digit ASCII is valid UTF-8
        let text = std::str::from_utf8(field).unwrap();
        *d = text
            .parse()
            .map_err(|_| header_err(offset, "dimension out of range"))?;
        offset += field.len() + 1;
    }
    let [nx, ny, nz] = dims;
    check_dims(nx, ny, nz).map_err(|e| header_err(TEXT_MAGIC.len(), e.to_string()))?;

    let mut grid = VoxelGrid::new(nx, ny, nz)?;
    let mut pos = header_end + 1;
    let total_rows = ny * nz;
    let mut row = 0usize;
    while row < total_rows {
        if pos >= bytes.len() {
            return Err(GridError::Payload {
                offset: pos,
                message: format!("expected {total_rows} rows, found {row}"),
            });
        }
        if bytes[pos] == b'\n' {
            if !row.is_multiple_of(ny) {
                return Err(GridError::Payload {
                    offset: pos,
                    message: "blank line inside a slice block".into(),
                });
            }
            pos += 1;
            continue;
        }
        let (y, z) = (row % ny, row / ny);
        for x in 0..nx {
            match bytes.get(pos + x) {
                Some(b'1') => grid.set(x, y, z, true),
                Some(b'0') => {}
                Some(b'\n') => {
                    return Err(GridError::Payload {
                        offset: pos + x,
                        message: format!("row has {x} cells, expected {nx}"),
                    })
                }
                Some(&b) => {
                    return Err(GridError::IllegalChar {
                        offset: pos + x,
                        found: b as char,
                    })
                }
                None => {
                    return Err(GridError::Payload {
                        offset: bytes.len(),
                        message: "stream ends inside a row".into(),
                    })
                }
            }
        }
        pos += nx;
        match bytes.get(pos) {
            Some(b'\n') => pos += 1,
            Some(b'0' | b'1') => {
                return Err(GridError::Payload {
                    offset: pos,
                    message: format!("row longer than {nx} cells"),
                })
            }
            Some(&b) => {
                return Err(GridError::IllegalChar {
                    offset: pos,
                    found: b as char,
                })
            }
            None => {
                return Err(GridError::Payload {
                    offset: pos,
                    message: "missing LF after last row".into(),
                })
            }
        }
        row += 1;
    }
    while pos < bytes.len() {
        if bytes[pos] != b'\n' {
            return Err(GridError::Payload {
                offset: pos,
                message: "trailing data after last slice".into(),
            });
        }
        pos += 1;
    }
    Ok(grid)
}

fn parse_raw(bytes: &[u8]) -> Result<VoxelGrid, GridError> {
    if bytes.len() < RAW_HEADER_LEN {
        return Err(header_err(bytes.len(), "raw header shorter than 16 bytes"));
    }
    if bytes[..4] != RAW_MAGIC {
        return Err(header_err(0, "bad magic, expected 'VX3\\0'"));
    }
    let read_u32 = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (nx, ny, nz) = (read_u32(4), read_u32(8), read_u32(12));
    let len = check_dims(nx, ny, nz).map_err(|e| header_err(4, e.to_string()))?;
    let payload = &bytes[RAW_HEADER_LEN..];
    let expected = len.div_ceil(8);
    if payload.len() != expected {
        return Err(GridError::Payload {
            offset: RAW_HEADER_LEN + payload.len().min(expected),
            message: format!("expected {expected} payload bytes, found {}", payload.len()),
        });
    }
    let rem = len % 8;
    if rem != 0 {
        let last = payload[expected - 1];
        if last >> rem != 0 {
            return Err(GridError::Payload {
                offset: RAW_HEADER_LEN + expected - 1,
                message: "non-zero pad bits".into(),
            });
        }
    }
    let cells = (0..len)
        .map(|i| (payload[i / 8] >> (i % 8)) & 1 == 1)
        .collect();
    VoxelGrid::from_cells([nx, ny, nz], cells)
}
