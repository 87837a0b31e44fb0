//! Raw tensor dumps: `"FTD1"`, `u32` rank, `u32` dims, then a row-major
//! little-endian `f32` payload. All integers are little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;

pub const MAGIC: &[u8; 4] = b"FTD1";

#[derive(Clone, Debug, PartialEq)]
pub struct TensorDump {
    pub dims: Vec<usize>,
    pub data: Vec<f32>,
}

impl TensorDump {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(Error::shape(format!("dims {dims:?} need {n} values, got {}", data.len())));
        }
        Ok(Self { dims, data })
    }

    /// `[H, W, C]` dump of a feature map.
    pub fn from_feature_map(map: &FeatureMap) -> Self {
        Self {
            dims: vec![map.height(), map.width(), map.channels()],
            data: map.data().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Accepts `[H, W]` (one channel) or `[H, W, C]`.
    pub fn to_feature_map(&self) -> Result<FeatureMap> {
        let (h, w, c) = match self.dims.as_slice() {
            [h, w] => (*h, *w, 1),
            [h, w, c] => (*h, *w, *c),
            d => return Err(Error::shape(format!("expected a rank 2 or 3 tensor, got dims {d:?}"))),
        };
        FeatureMap::new(w, h, c, self.data.iter().map(|&v| v as f64).collect())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.dims.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 8 || &bytes[..4] != MAGIC {
            return Err(Error::format("missing FTD1 magic"));
        }
        let word = |i: usize| -> Result<u32> {
            bytes
                .get(i..i + 4)
                .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
                .ok_or_else(|| Error::format("truncated tensor header"))
        };
        let rank = word(4)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for r in 0..rank {
            dims.push(word(8 + 4 * r)? as usize);
        }
        let start = 8 + 4 * rank;
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::format("tensor dims overflow"))?;
        let payload = &bytes[start..];
        if payload.len() != n * 4 {
            return Err(Error::format(format!(
                "tensor payload is {} bytes, dims {dims:?} need {}",
                payload.len(),
                n * 4
            )));
        }
        let data = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Ok(Self { dims, data })
    }
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<TensorDump> {
    TensorDump::decode(&fs::read(path)?)
}

pub fn write_tensor(path: impl AsRef<Path>, tensor: &TensorDump) -> Result<()> {
    fs::write(path, tensor.encode())?;
    Ok(())
}
