//! Portable float maps (`Pf` gray, `PF` RGB), rows stored bottom to top.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;

pub fn decode_pfm(bytes: &[u8]) -> Result<FeatureMap> {
    // Header: magic, dimensions and scale, each terminated by whitespace.
    let mut fields = Vec::with_capacity(4);
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
            return Err(Error::format("truncated PFM header"));
        }
        fields.push(
            std::str::from_utf8(&bytes[start..pos]).map_err(|_| Error::format("PFM header is not ASCII"))?,
        );
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let channels = match fields[0] {
        "Pf" => 1,
        "PF" => 3,
        m => return Err(Error::format(format!("bad PFM magic `{m}`"))),
    };
    let parse_dim = |s: &str| s.parse::<usize>().map_err(|_| Error::format(format!("bad PFM size `{s}`")));
    let (w, h) = (parse_dim(fields[1])?, parse_dim(fields[2])?);
    let scale: f64 = fields[3]
        .parse()
        .map_err(|_| Error::format(format!("bad PFM scale `{}`", fields[3])))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::format("PFM scale must be non-zero"));
    }
    let little = scale < 0.0;
    let payload = bytes.get(pos..).unwrap_or_default();
    let need = w * h * channels * 4;
    if payload.len() != need {
        return Err(Error::format(format!("PFM payload is {} bytes, expected {need}", payload.len())));
    }
    let mut data = vec![0.0; w * h * channels];
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let b: [u8; 4] = chunk.try_into().unwrap();
        let v = if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
        let file_row = i / (w * channels);
        let rest = i % (w * channels);
        data[(h - 1 - file_row) * w * channels + rest] = v as f64;
    }
    FeatureMap::new(w, h, channels, data)
}

pub fn encode_pfm(map: &FeatureMap) -> Result<Vec<u8>> {
    let magic = match map.channels() {
        1 => "Pf",
        3 => "PF",
        c => return Err(Error::shape(format!("PFM needs 1 or 3 channels, got {c}"))),
    };
    let (w, h, c) = (map.width(), map.height(), map.channels());
    let mut out = format!("{magic}\n{w} {h}\n-1.0\n").into_bytes();
    out.reserve(w * h * c * 4);
    for y in (0..h).rev() {
        for v in &map.data()[y * w * c..(y + 1) * w * c] {
            out.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    Ok(out)
}

pub fn read_pfm(path: impl AsRef<Path>) -> Result<FeatureMap> {
    decode_pfm(&fs::read(path)?)
}

pub fn write_pfm(path: impl AsRef<Path>, map: &FeatureMap) -> Result<()> {
    fs::write(path, encode_pfm(map)?)?;
    Ok(())
}
