//! 8-bit PNG images. Values map to `[0, 1]` by `/255` on read and are
//! rounded to the nearest level on write.

use std::path::Path;

use image::{DynamicImage, GrayImage, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMap;

fn to_map(img: DynamicImage) -> Result<FeatureMap> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, raw) = match img {
        DynamicImage::ImageLuma8(b) => (1, b.into_raw()),
        DynamicImage::ImageRgb8(b) => (3, b.into_raw()),
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
            return Err(Error::format("PNG with an alpha channel is not supported"))
        }
        other => {
            return Err(Error::format(format!(
                "unsupported PNG bit depth or color type {:?} (expected 8-bit gray or RGB)",
                other.color()
            )))
        }
    };
    FeatureMap::new(w, h, channels, raw.into_iter().map(|v| v as f64 / 255.0).collect())
}

pub fn decode_png(bytes: &[u8]) -> Result<FeatureMap> {
    let img = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)?;
    to_map(img)
}

pub fn read_image(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let img = ImageReader::open(path)?.with_guessed_format()?.decode()?;
    to_map(img)
}

#[inline]
pub(crate) fn quantize(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes a 1- or 3-channel map as an 8-bit PNG.
pub fn write_image(path: impl AsRef<Path>, map: &FeatureMap) -> Result<()> {
    let (w, h) = (map.width() as u32, map.height() as u32);
    let bytes: Vec<u8> = map.data().iter().map(|&v| quantize(v)).collect();
    match map.channels() {
        1 => GrayImage::from_raw(w, h, bytes).expect("sized buffer").save_with_format(path, image::ImageFormat::Png)?,
        3 => RgbImage::from_raw(w, h, bytes).expect("sized buffer").save_with_format(path, image::ImageFormat::Png)?,
        c => return Err(Error::shape(format!("PNG output needs 1 or 3 channels, got {c}"))),
    }
    Ok(())
}
