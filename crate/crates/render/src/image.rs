//! 8-bit RGBA captures, PPM and PNG output, image comparison.

use std::io::Write;
use std::path::Path;

use crate::error::{RenderError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    /// Row-major from the top row, four bytes per pixel.
    pub rgba: Vec<u8>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    /// From a path extension, `.png` or `.ppm`.
    pub fn from_path(path: &Path) -> Option<ImageFormat> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "png" => Some(ImageFormat::Png),
            "ppm" => Some(ImageFormat::Ppm),
            _ => None,
        }
    }
}

/// How two same-sized images differ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageDiff {
    pub pixels: usize,
    pub differing_pixels: usize,
    pub max_channel_difference: u8,
}

impl ImageDiff {
    pub fn matching_fraction(&self) -> f64 {
        1.0 - self.differing_pixels as f64 / self.pixels as f64
    }
}

impl Image {
    pub fn filled(width: u32, height: u32, rgba: [u8; 4]) -> Image {
        Image {
            width,
            height,
            rgba: rgba.repeat(width as usize * height as usize),
        }
    }

    pub fn pixel(&self, x: u32, y: u32) -> [u8; 4] {
        let i = 4 * (y as usize * self.width as usize + x as usize);
        self.rgba[i..i + 4].try_into().unwrap()
    }

    /// Binary PPM (P6); alpha is dropped.
    pub fn write_ppm<W: Write>(&self, mut sink: W) -> Result<()> {
        write!(sink, "P6\n{} {}\n255\n", self.width, self.height)?;
        let rgb: Vec<u8> = self
            .rgba
            .chunks_exact(4)
            .flat_map(|p| [p[0], p[1], p[2]])
            .collect();
        sink.write_all(&rgb)?;
        sink.flush()?;
        Ok(())
    }

    pub fn write_png<W: Write>(&self, sink: W) -> Result<()> {
        let mut enc = png::Encoder::new(sink, self.width, self.height);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let to_io = |e: png::EncodingError| match e {
            png::EncodingError::IoError(e) => RenderError::Io(e),
            other => RenderError::Io(std::io::Error::other(other)),
        };
        let mut w = enc.write_header().map_err(to_io)?;
        w.write_image_data(&self.rgba).map_err(to_io)?;
        w.finish().map_err(to_io)?;
        Ok(())
    }

    /// Writes PNG or PPM, chosen by the file extension.
    pub fn save(&self, path: &Path) -> Result<()> {
        let format = ImageFormat::from_path(path).ok_or_else(|| {
            RenderError::Validation(format!(
                "{}: captures are written as .png or .ppm",
                path.display()
            ))
        })?;
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        match format {
            ImageFormat::Ppm => self.write_ppm(file),
            ImageFormat::Png => self.write_png(file),
        }
    }

    pub fn diff(&self, other: &Image) -> Result<ImageDiff> {
        if (self.width, self.height) != (other.width, other.height) {
            return Err(RenderError::Validation(format!(
                "cannot compare {}x{} with {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        let mut d = ImageDiff {
            pixels: self.rgba.len() / 4,
            differing_pixels: 0,
            max_channel_difference: 0,
        };
        for (a, b) in self.rgba.chunks_exact(4).zip(other.rgba.chunks_exact(4)) {
            let m = a
                .iter()
                .zip(b)
                .map(|(x, y)| x.abs_diff(*y))
                .max()
                .unwrap_or(0);
            if m > 0 {
                d.differing_pixels += 1;
                d.max_channel_difference = d.max_channel_difference.max(m);
            }
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_header_and_payload() {
        let mut img = Image::filled(2, 1, [0, 0, 0, 255]);
        img.rgba[4..8].copy_from_slice(&[255, 128, 1, 255]);
        let mut out = Vec::new();
        img.write_ppm(&mut out).unwrap();
        assert_eq!(&out[..11], b"P6\n2 1\n255\n");
        assert_eq!(&out[11..], &[0, 0, 0, 255, 128, 1]);
    }

    #[test]
    fn png_signature() {
        let mut out = Vec::new();
        Image::filled(3, 2, [9, 8, 7, 255])
            .write_png(&mut out)
            .unwrap();
        assert_eq!(&out[..8], b"\x89PNG\r\n\x1a\n");
    }

    #[test]
    fn diff_counts_pixels_not_channels() {
        let a = Image::filled(2, 2, [10, 10, 10, 255]);
        let mut b = a.clone();
        b.rgba[0] = 11;
        b.rgba[1] = 13;
        let d = a.diff(&b).unwrap();
        assert_eq!((d.differing_pixels, d.max_channel_difference), (1, 3));
        assert_eq!(d.matching_fraction(), 0.75);
        assert!(a.diff(&Image::filled(1, 1, [0; 4])).is_err());
    }
}
