//! Image files in and out. Everything is read as 8-bit luma and written as
//! PNG.

use std::path::Path;

use image::{GrayImage, RgbImage};
use marginalia_core::{Raster, RgbRaster};

use crate::error::{Error, Result};

pub fn load_gray(path: &Path) -> Result<Raster> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .into_luma8();
    let (w, h) = img.dimensions();
    Ok(Raster::from_pixels(w, h, img.into_raw())?)
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) => std::fs::create_dir_all(dir).map_err(Error::io(dir)),
        None => Ok(()),
    }
}

pub fn save_gray(path: &Path, raster: &Raster) -> Result<()> {
    ensure_parent(path)?;
    let img = GrayImage::from_raw(raster.width(), raster.height(), raster.pixels().to_vec())
        .expect("buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn save_rgb(path: &Path, raster: &RgbRaster) -> Result<()> {
    ensure_parent(path)?;
    let img = RgbImage::from_raw(raster.width(), raster.height(), raster.to_bytes())
        .expect("buffer matches dimensions");
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}
