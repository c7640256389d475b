//! Binary portable-pixmap I/O (P5 grayscale, P6 RGB) for image fixtures.

use std::io::{Read, Write};

use super::ImageRaster;
use crate::error::{Error, Result};

/// Reads a binary P5/P6 raster with maxval up to 255.
pub fn read<R: Read>(mut reader: R) -> Result<ImageRaster> {
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    let mut pos = 0usize;

    let magic = take_token(&data, &mut pos)?;
    let channels = match magic.as_str() {
        "P5" => 1u8,
        "P6" => 3u8,
        other => return Err(Error::Image(format!("unsupported magic `{other}`"))),
    };
    let width: u32 = parse_token(&data, &mut pos, "width")?;
    let height: u32 = parse_token(&data, &mut pos, "height")?;
    let maxval: u32 = parse_token(&data, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Image(format!("maxval {maxval} outside [1, 255]")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let expected = width as usize * height as usize * channels as usize;
    if data.len() < pos + expected {
        return Err(Error::Image(format!(
            "truncated raster: need {expected} bytes, have {}",
            data.len().saturating_sub(pos)
        )));
    }
    ImageRaster::new(width, height, channels, data[pos..pos + expected].to_vec())
}

/// Writes the binary format with maxval 255.
pub fn write<W: Write>(mut writer: W, image: &ImageRaster) -> Result<()> {
    let magic = if image.channels() == 1 { "P5" } else { "P6" };
    write!(writer, "{magic}\n{} {}\n255\n", image.width(), image.height())?;
    writer.write_all(image.pixels())?;
    Ok(())
}

fn take_token(data: &[u8], pos: &mut usize) -> Result<String> {
    // Skip whitespace and `#` comment lines.
    loop {
        while *pos < data.len() && data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < data.len() && data[*pos] == b'#' {
            while *pos < data.len() && data[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            break;
        }
    }
    let start = *pos;
    while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Image("unexpected end of header".into()));
    }
    String::from_utf8(data[start..*pos].to_vec())
        .map_err(|_| Error::Image("non-ASCII header token".into()))
}

fn parse_token<T: std::str::FromStr>(data: &[u8], pos: &mut usize, what: &str) -> Result<T> {
    let token = take_token(data, pos)?;
    token
        .parse()
        .map_err(|_| Error::Image(format!("bad {what} `{token}`")))
}
