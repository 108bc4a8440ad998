//! Reading and writing PGM (P2/P5) and PNG files.
//!
//! Everything is reduced to 8-bit grayscale on load. Writes go through a
//! temporary file in the destination directory and are renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use thiserror::Error;

use crate::image::{Image, Mask, RasterError};

const PNG_SIGNATURE: &[u8] = b"\x89PNG\r\n\x1a\n";

#[derive(Debug, Error)]
pub enum ImageIoError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image {}: {reason}", path.display())]
    CorruptImage { path: PathBuf, reason: String },
    #[error("i/o failure on {}: {source}", path.display())]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl ImageIoError {
    fn corrupt(path: &Path, reason: impl Into<String>) -> Self {
        ImageIoError::CorruptImage {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        ImageIoError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Rescales a sample on `[0, maxval]` to `[0, 255]`, rounding half up.
pub fn rescale_to_u8(value: u32, maxval: u32) -> u8 {
    debug_assert!(maxval > 0 && value <= maxval);
    if maxval == 255 {
        return value as u8;
    }
    let num = 2 * u64::from(value) * 255 + u64::from(maxval);
    (num / (2 * u64::from(maxval))) as u8
}

/// Integer luma `round(0.299 R + 0.587 G + 0.114 B)`.
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * u32::from(r) + 587 * u32::from(g) + 114 * u32::from(b);
    ((weighted + 500) / 1000) as u8
}

/// Loads a PGM or PNG file as 8-bit grayscale. The format is sniffed from
/// the file contents, not the extension.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image, ImageIoError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => ImageIoError::FileNotFound(path.to_path_buf()),
        _ => ImageIoError::io(path, e),
    })?;
    decode(&bytes, path)
}

fn decode(bytes: &[u8], path: &Path) -> Result<Image, ImageIoError> {
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes, path)
    } else if bytes.starts_with(PNG_SIGNATURE) {
        decode_png(bytes, path)
    } else {
        Err(ImageIoError::UnsupportedFormat(format!(
            "{} is neither PGM (P2/P5) nor PNG",
            path.display()
        )))
    }
}

struct PgmHeader {
    binary: bool,
    width: usize,
    height: usize,
    maxval: u32,
    data_offset: usize,
}

fn parse_pgm_header(bytes: &[u8], path: &Path) -> Result<PgmHeader, ImageIoError> {
    let binary = &bytes[..2] == b"P5";
    let mut pos = 2;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        // whitespace and comments may separate header tokens
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n' && b != b'\r') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(ImageIoError::corrupt(path, "truncated or malformed PGM header"));
        }
        *field = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageIoError::corrupt(path, "header field out of range"))?;
    }
    // exactly one whitespace byte separates the header from the raster
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(ImageIoError::corrupt(path, "missing whitespace after header"));
    }
    let [width, height, maxval] = fields;
    if width == 0 || height == 0 {
        return Err(ImageIoError::corrupt(path, "zero image dimension"));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(ImageIoError::corrupt(path, format!("maxval {maxval} outside 1..=65535")));
    }
    Ok(PgmHeader {
        binary,
        width: width as usize,
        height: height as usize,
        maxval: maxval as u32,
        data_offset: pos + 1,
    })
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<Image, ImageIoError> {
    let header = parse_pgm_header(bytes, path)?;
    let count = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| ImageIoError::corrupt(path, "image dimensions overflow"))?;
    let body = &bytes[header.data_offset.min(bytes.len())..];
    let mut samples = Vec::with_capacity(count.min(body.len() * 2 + 1));

    if header.binary {
        let sample_bytes = if header.maxval < 256 { 1 } else { 2 };
        let needed = count * sample_bytes;
        if body.len() < needed {
            return Err(ImageIoError::corrupt(
                path,
                format!("expected {needed} payload bytes, found {}", body.len()),
            ));
        }
        if sample_bytes == 1 {
            samples.extend(body[..needed].iter().map(|&b| u32::from(b)));
        } else {
            samples.extend(
                body[..needed]
                    .chunks_exact(2)
                    .map(|pair| u32::from(u16::from_be_bytes([pair[0], pair[1]]))),
            );
        }
    } else {
        let text = std::str::from_utf8(body)
            .map_err(|_| ImageIoError::corrupt(path, "non-ASCII data in P2 payload"))?;
        for token in text.split_ascii_whitespace() {
            if samples.len() == count {
                return Err(ImageIoError::corrupt(path, "more samples than width x height"));
            }
            let v: u32 = token
                .parse()
                .map_err(|_| ImageIoError::corrupt(path, format!("bad sample {token:?}")))?;
            samples.push(v);
        }
        if samples.len() != count {
            return Err(ImageIoError::corrupt(
                path,
                format!("expected {count} samples, found {}", samples.len()),
            ));
        }
    }

    if let Some(&v) = samples.iter().find(|&&v| v > header.maxval) {
        return Err(ImageIoError::corrupt(
            path,
            format!("sample {v} exceeds maxval {}", header.maxval),
        ));
    }
    let pixels = samples
        .into_iter()
        .map(|v| rescale_to_u8(v, header.maxval))
        .collect();
    Image::new(header.width, header.height, pixels).map_err(|e| raster_corrupt(path, e))
}

fn raster_corrupt(path: &Path, err: RasterError) -> ImageIoError {
    ImageIoError::corrupt(path, err.to_string())
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<Image, ImageIoError> {
    let decoded = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| ImageIoError::corrupt(path, e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<u8> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLuma16(buf) => {
            buf.pixels().map(|p| rescale_to_u8(p.0[0].into(), 65535)).collect()
        }
        DynamicImage::ImageLumaA16(buf) => {
            buf.pixels().map(|p| rescale_to_u8(p.0[0].into(), 65535)).collect()
        }
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => {
            buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect()
        }
        other => {
            let rgb16 = other.to_rgb16();
            rgb16
                .pixels()
                .map(|p| {
                    let [r, g, b] = p.0.map(|c| rescale_to_u8(c.into(), 65535));
                    luma(r, g, b)
                })
                .collect()
        }
    };
    Image::new(width, height, pixels).map_err(|e| raster_corrupt(path, e))
}

enum OutputFormat {
    Pgm,
    Png,
}

fn output_format(path: &Path) -> Result<OutputFormat, ImageIoError> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("pgm") => Ok(OutputFormat::Pgm),
        Some("png") => Ok(OutputFormat::Png),
        _ => Err(ImageIoError::UnsupportedFormat(format!(
            "cannot write {}: extension must be .pgm or .png",
            path.display()
        ))),
    }
}

/// Encodes as binary P5 with maxval 255.
pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

/// Encodes as an 8-bit grayscale PNG.
pub fn encode_png(image: &Image) -> Vec<u8> {
    let mut out = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut out);
    image::ImageEncoder::write_image(
        encoder,
        image.pixels(),
        image.width() as u32,
        image.height() as u32,
        image::ExtendedColorType::L8,
    )
    .expect("in-memory PNG encoding of a valid L8 raster");
    out
}

/// Writes `bytes` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ImageIoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| ImageIoError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| ImageIoError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| ImageIoError::io(path, e.error))?;
    Ok(())
}

/// Saves as P5 PGM (`.pgm`) or 8-bit grayscale PNG (`.png`).
pub fn save_image(image: &Image, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    let path = path.as_ref();
    let bytes = match output_format(path)? {
        OutputFormat::Pgm => encode_pgm(image),
        OutputFormat::Png => encode_png(image),
    };
    write_atomic(path, &bytes)
}

/// Saves a mask with foreground as 255 and background as 0.
pub fn save_mask(mask: &Mask, path: impl AsRef<Path>) -> Result<(), ImageIoError> {
    save_image(&mask.to_image(), path)
}

/// Loads a mask image; any non-zero pixel is foreground.
pub fn load_mask(path: impl AsRef<Path>) -> Result<Mask, ImageIoError> {
    let image = load_image(path)?;
    Ok(Mask::from_image(&image, |p| p != 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn write(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> PathBuf {
        let path = dir.path().join(name);
        fs::write(&path, bytes).unwrap();
        path
    }

    #[test]
    fn loads_binary_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 64, 128, 255]);
        let img = load_image(write(&dir, "a.pgm", &bytes)).unwrap();
        assert_eq!(img, Image::new(2, 2, vec![0, 64, 128, 255]).unwrap());
    }

    #[test]
    fn loads_ascii_pgm_with_comments_and_16_bit_maxval() {
        let dir = tempfile::tempdir().unwrap();
        let text = b"P2\n# scanner export\n3 1\n65535\n65535 0 32768\n";
        let img = load_image(write(&dir, "a.pgm", text)).unwrap();
        // 32768 * 255 / 65535 = 127.5019..., rounds to 128
        assert_eq!(img.pixels(), &[255, 0, 128]);
    }

    #[test]
    fn loads_16_bit_binary_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = b"P5 2 1 65535\n".to_vec();
        bytes.extend([0xFF, 0xFF, 0x01, 0x01]);
        let img = load_image(write(&dir, "a.pgm", &bytes)).unwrap();
        assert_eq!(img.pixels(), &[255, 1]);
    }

    #[test]
    fn rgb_png_white_is_255() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("white.png");
        image::RgbImage::from_pixel(2, 1, image::Rgb([255, 255, 255]))
            .save(&path)
            .unwrap();
        assert_eq!(load_image(&path).unwrap().pixels(), &[255, 255]);
    }

    #[test]
    fn rgb_png_uses_luma_weights() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let mut buf = image::RgbImage::new(3, 1);
        buf.put_pixel(0, 0, image::Rgb([255, 0, 0]));
        buf.put_pixel(1, 0, image::Rgb([0, 255, 0]));
        buf.put_pixel(2, 0, image::Rgb([0, 0, 255]));
        buf.save(&path).unwrap();
        // 76.245, 149.685, 29.07
        assert_eq!(load_image(&path).unwrap().pixels(), &[76, 150, 29]);
    }

    #[test]
    fn gray_triples_keep_their_value() {
        for v in 0..=255u8 {
            assert_eq!(luma(v, v, v), v);
        }
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_image("/nonexistent/dir/x.pgm").unwrap_err();
        assert!(matches!(err, ImageIoError::FileNotFound(_)));
    }

    #[test]
    fn unknown_magic_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_image(write(&dir, "a.bmp", b"BM....")).unwrap_err();
        assert!(matches!(err, ImageIoError::UnsupportedFormat(_)));
    }

    #[test]
    fn short_payload_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_image(write(&dir, "a.pgm", b"P5\n2 2\n255\n\x00\x01")).unwrap_err();
        assert!(matches!(err, ImageIoError::CorruptImage { .. }));
        let err = load_image(write(&dir, "b.pgm", b"P2\n2 1\n255\n1 2 3\n")).unwrap_err();
        assert!(matches!(err, ImageIoError::CorruptImage { .. }));
        let err = load_image(write(&dir, "c.pgm", b"P2\n2 1\n15\n1 16\n")).unwrap_err();
        assert!(matches!(err, ImageIoError::CorruptImage { .. }));
        let err = load_image(write(&dir, "d.pgm", b"P5\n2")).unwrap_err();
        assert!(matches!(err, ImageIoError::CorruptImage { .. }));
    }

    #[test]
    fn pgm_body_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pgm");
        save_image(&Image::new(2, 1, vec![0, 255]).unwrap(), &path).unwrap();
        let bytes = fs::read(&path).unwrap();
        assert_eq!(bytes, b"P5\n2 1\n255\n\x00\xff");
    }

    #[test]
    fn single_pixel_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::new(1, 1, vec![7]).unwrap();
        for name in ["one.pgm", "one.png"] {
            let path = dir.path().join(name);
            save_image(&img, &path).unwrap();
            assert_eq!(load_image(&path).unwrap(), img);
        }
    }

    #[test]
    fn rejects_other_extensions() {
        let dir = tempfile::tempdir().unwrap();
        let err = save_image(&Image::filled(1, 1, 0), dir.path().join("x.jpg")).unwrap_err();
        assert!(matches!(err, ImageIoError::UnsupportedFormat(_)));
    }

    #[test]
    fn unwritable_destination_is_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        // a regular file where a directory is expected cannot be written into,
        // even by a privileged user
        let blocker = write(&dir, "blocker", b"");
        let err = save_image(&Image::filled(1, 1, 0), blocker.join("x.pgm")).unwrap_err();
        assert!(matches!(err, ImageIoError::IoFailure { .. }));
    }

    #[test]
    fn masks_save_as_black_and_white() {
        let dir = tempfile::tempdir().unwrap();
        let cases = [
            (Mask::new(2, 1, vec![1, 0]).unwrap(), vec![255, 0]),
            (Mask::empty(2, 2), vec![0; 4]),
            (Mask::new(2, 2, vec![1; 4]).unwrap(), vec![255; 4]),
        ];
        for (i, (mask, expected)) in cases.into_iter().enumerate() {
            let path = dir.path().join(format!("m{i}.png"));
            save_mask(&mask, &path).unwrap();
            assert_eq!(load_image(&path).unwrap().pixels(), expected.as_slice());
            assert_eq!(load_mask(&path).unwrap(), mask);
        }
    }

    fn raster() -> impl Strategy<Value = Image> {
        (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |px| Image::new(w, h, px).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pgm_and_png_round_trip_exactly(img in raster()) {
            let dir = tempfile::tempdir().unwrap();
            for name in ["r.pgm", "r.png"] {
                let path = dir.path().join(name);
                save_image(&img, &path).unwrap();
                prop_assert_eq!(load_image(&path).unwrap(), img.clone());
            }
        }
    }
}
