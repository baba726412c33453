//! CSV and 16-bit PGM output for scale maps.

use std::io::Write;
use std::str::FromStr;

use super::{MultiscaleError, ScaleMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Csv,
    Pgm,
}

impl MapFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MapFormat::Csv => "csv",
            MapFormat::Pgm => "pgm",
        }
    }
}

impl FromStr for MapFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(MapFormat::Csv),
            "pgm" => Ok(MapFormat::Pgm),
            _ => Err(format!("unknown map format '{s}' (expected csv or pgm)")),
        }
    }
}

fn header(map: &ScaleMap) -> String {
    let d = map.dims();
    let mut h = format!(
        "# vox3-map kind={} level={} plane={} nx={} ny={}",
        map.kind().name(),
        map.level(),
        map.plane(),
        d[0],
        d[1]
    );
    if let Some(nz) = d.get(2) {
        h.push_str(&format!(" nz={nz}"));
    }
    h
}

/// Header line, then one row per map row (first axis across), values with
/// 9 decimals. Gaussian values are in radians. Volume maps list z slices
/// one after another.
pub fn write_csv(map: &ScaleMap, mut out: impl Write) -> Result<(), MultiscaleError> {
    let mut text = header(map);
    text.push('\n');
    let nx = map.dims()[0];
    for row in 0..map.len() / nx {
        let line: Vec<String> = (0..nx)
            .map(|x| format!("{:.9}", map.value(row * nx + x)))
            .collect();
        text.push_str(&line.join(","));
        text.push('\n');
    }
    out.write_all(text.as_bytes())?;
    Ok(())
}

/// Binary 16-bit PGM. Pixels are `round((value − offset) · scale)`, with
/// `offset` the map minimum and `scale = 65535 / (max − min)` (0 for a
/// constant map), both recorded in a comment line.
pub fn write_pgm(map: &ScaleMap, mut out: impl Write) -> Result<(), MultiscaleError> {
    if map.dims().len() != 2 {
        return Err(MultiscaleError::PgmNeeds2d);
    }
    let (w, h) = (map.dims()[0], map.dims()[1]);
    let values: Vec<f64> = (0..map.len()).map(|i| map.value(i)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if hi > lo { 65535.0 / (hi - lo) } else { 0.0 };
    let mut bytes = format!(
        "P5\n{}\n# scale={} offset={}\n{} {}\n65535\n",
        header(map),
        scale,
        lo,
        w,
        h
    )
    .into_bytes();
    for v in values {
        let px = ((v - lo) * scale).round().clamp(0.0, 65535.0) as u16;
        bytes.extend_from_slice(&px.to_be_bytes());
    }
    out.write_all(&bytes)?;
    Ok(())
}
