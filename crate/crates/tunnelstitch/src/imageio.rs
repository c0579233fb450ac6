//! Binary PPM (P6) and PGM (P5) at 8 bits, plus PNG through the `image` crate.

use std::fs;
use std::path::Path;

use tunnelstitch_core::{Image, Rgb};

use crate::error::{Error, Result};

pub fn quantize(x: f32) -> u8 {
    (x.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn dequantize(b: u8) -> f32 {
    b as f32 / 255.0
}

pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.len() * 3);
    for px in img.pixels() {
        out.extend(px.iter().map(|c| quantize(*c)));
    }
    out
}

pub fn encode_pgm(width: u32, height: u32, values: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend(values);
    out
}

/// Header of a binary PNM: magic, width, height, then the raster offset.
fn parse_header(bytes: &[u8], magic: &[u8; 2]) -> std::result::Result<(u32, u32, usize), String> {
    if bytes.len() < 2 || &bytes[..2] != magic {
        return Err(format!("expected {} header", String::from_utf8_lossy(magic)));
    }
    let mut pos = 2;
    let mut fields = [0u32; 3];
    for field in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|b| *b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or("malformed header")?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("malformed header".into());
    }
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(format!("only 8-bit rasters are supported (maxval {maxval})"));
    }
    Ok((w, h, pos + 1))
}

pub fn decode_ppm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let (w, h, off) = parse_header(bytes, b"P6")?;
    let n = w as usize * h as usize;
    let data = bytes.get(off..off + 3 * n).ok_or("truncated raster")?;
    let pixels: Vec<Rgb> = data
        .chunks_exact(3)
        .map(|c| [dequantize(c[0]), dequantize(c[1]), dequantize(c[2])])
        .collect();
    Ok(Image::from_pixels(w, h, pixels).expect("sized from header"))
}

pub fn decode_pgm(bytes: &[u8]) -> std::result::Result<(u32, u32, Vec<u8>), String> {
    let (w, h, off) = parse_header(bytes, b"P5")?;
    let n = w as usize * h as usize;
    let data = bytes.get(off..off + n).ok_or("truncated raster")?;
    Ok((w, h, data.to_vec()))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(Error::MissingDirectory(dir.to_path_buf()));
        }
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn is_png(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

/// Write PPM, or PNG when the extension says so.
pub fn write_image(path: &Path, img: &Image) -> Result<()> {
    if !is_png(path) {
        return write_bytes(path, &encode_ppm(img));
    }
    let raw: Vec<u8> = img.pixels().iter().flat_map(|p| p.map(quantize)).collect();
    let buf = image::RgbImage::from_raw(img.width(), img.height(), raw).expect("sized from image");
    let mut bytes = Vec::new();
    buf.write_to(&mut std::io::Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?;
    write_bytes(path, &bytes)
}

/// Read PPM, or PNG when the extension says so.
pub fn read_image(path: &Path) -> Result<Image> {
    let bytes = read_bytes(path)?;
    if !is_png(path) {
        return decode_ppm(&bytes).map_err(|m| Error::format(path, m));
    }
    let decoded = image::load_from_memory_with_format(&bytes, image::ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    let pixels = decoded
        .pixels()
        .map(|p| [dequantize(p[0]), dequantize(p[1]), dequantize(p[2])])
        .collect();
    Ok(Image::from_pixels(w, h, pixels).expect("sized from png"))
}

pub fn write_mask(path: &Path, width: u32, height: u32, mask: &[bool]) -> Result<()> {
    write_bytes(
        path,
        &encode_pgm(width, height, mask.iter().map(|m| if *m { 255 } else { 0 })),
    )
}

/// Nonzero samples are `true`.
pub fn read_mask(path: &Path) -> Result<(u32, u32, Vec<bool>)> {
    let (w, h, data) = decode_pgm(&read_bytes(path)?).map_err(|m| Error::format(path, m))?;
    Ok((w, h, data.into_iter().map(|b| b != 0).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip_is_exact_on_8_bit_values() {
        let mut img = Image::new(3, 2);
        for (i, px) in img.pixels_mut().iter_mut().enumerate() {
            *px = [dequantize(i as u8 * 40), dequantize(255 - i as u8), dequantize(7)];
        }
        let bytes = encode_ppm(&img);
        assert!(bytes.starts_with(b"P6\n3 2\n255\n"));
        assert_eq!(decode_ppm(&bytes).unwrap(), img);
    }

    #[test]
    fn header_comments_are_skipped() {
        let mut bytes = b"P6 # made by hand\n2 1\n# depth\n255\n".to_vec();
        bytes.extend([255, 0, 0, 0, 0, 255]);
        let img = decode_ppm(&bytes).unwrap();
        assert_eq!(img.get(0, 0), [1.0, 0.0, 0.0]);
        assert_eq!(img.get(1, 0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn malformed_rasters_are_rejected() {
        assert!(decode_ppm(b"P5\n1 1\n255\n\0").is_err());
        assert!(decode_ppm(b"P6\n2 2\n255\n\0\0\0").is_err());
        assert!(decode_ppm(b"P6\n1 1\n65535\n\0\0\0\0\0\0").is_err());
        assert!(decode_pgm(b"P5\nx 1\n255\n\0").is_err());
    }

    #[test]
    fn quantization_clamps() {
        assert_eq!(quantize(-0.5), 0);
        assert_eq!(quantize(2.0), 255);
        assert_eq!(quantize(0.5), 128);
    }

    #[test]
    fn png_and_mask_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::filled(4, 3, [dequantize(10), dequantize(20), dequantize(30)]);
        let png = dir.path().join("a.png");
        write_image(&png, &img).unwrap();
        assert_eq!(read_image(&png).unwrap(), img);
        let mask = [true, false, true, true, false, false];
        let pgm = dir.path().join("m.pgm");
        write_mask(&pgm, 3, 2, &mask).unwrap();
        assert_eq!(read_mask(&pgm).unwrap(), (3, 2, mask.to_vec()));
    }

    #[test]
    fn missing_directory_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nope").join("a.ppm");
        let err = write_image(&path, &Image::new(1, 1)).unwrap_err();
        assert!(err.to_string().contains("nope"), "{err}");
    }
}
