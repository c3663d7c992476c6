//! Reader and writer for the subset of MetaImage (`.mhd` + raw payload) the
//! engine exchanges: 3D, single channel, `MET_UCHAR` or `MET_FLOAT`,
//! uncompressed, little-endian, x fastest.

use std::fs;
use std::path::{Path, PathBuf};

use super::{BinaryMask, ImageVolume};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementType {
    UChar,
    Float,
}

impl ElementType {
    fn tag(self) -> &'static str {
        match self {
            ElementType::UChar => "MET_UCHAR",
            ElementType::Float => "MET_FLOAT",
        }
    }

    fn size(self) -> usize {
        match self {
            ElementType::UChar => 1,
            ElementType::Float => 4,
        }
    }

    fn parse(tag: &str) -> Result<Self> {
        match tag {
            "MET_UCHAR" => Ok(ElementType::UChar),
            "MET_FLOAT" => Ok(ElementType::Float),
            other => Err(Error::UnsupportedElementType(other.to_string())),
        }
    }
}

struct Header {
    dims: [usize; 3],
    spacing: [f64; 3],
    element: ElementType,
    msb: bool,
    data_file: String,
    /// Byte offset of the payload when `ElementDataFile = LOCAL`.
    local_offset: usize,
}

fn parse_bool(v: &str) -> bool {
    matches!(v.to_ascii_lowercase().as_str(), "true" | "1")
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut dims = None;
    let mut spacing = [1.0; 3];
    let mut element = None;
    let mut msb = false;
    let mut ndims = None;
    let mut pos = 0usize;

    while pos < bytes.len() {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i + 1)
            .unwrap_or(bytes.len());
        let line = std::str::from_utf8(&bytes[pos..end])
            .map_err(|_| Error::Header("header is not valid text".into()))?
            .trim();
        pos = end;
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Header(format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "ObjectType" => {
                if value != "Image" {
                    return Err(Error::Header(format!("ObjectType {value} is not Image")));
                }
            }
            "NDims" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| Error::Header(format!("bad NDims `{value}`")))?;
                ndims = Some(n);
                if n != 3 {
                    return Err(Error::NotThreeD(n));
                }
            }
            "DimSize" => dims = Some(parse_triple::<usize>(key, value)?),
            "ElementSpacing" | "ElementSize" => spacing = parse_triple::<f64>(key, value)?,
            "ElementType" => element = Some(ElementType::parse(value)?),
            "BinaryDataByteOrderMSB" | "ElementByteOrderMSB" => msb = parse_bool(value),
            "CompressedData" => {
                if parse_bool(value) {
                    return Err(Error::Header(
                        "compressed payloads are not supported".into(),
                    ));
                }
            }
            "BinaryData" => {
                if !parse_bool(value) {
                    return Err(Error::Header("ASCII payloads are not supported".into()));
                }
            }
            "ElementNumberOfChannels" => {
                if value != "1" {
                    return Err(Error::Header(format!(
                        "expected a single channel, got {value}"
                    )));
                }
            }
            "ElementDataFile" => {
                if ndims.is_none() {
                    return Err(Error::Header("missing NDims".into()));
                }
                return Ok(Header {
                    dims: dims.ok_or_else(|| Error::Header("missing DimSize".into()))?,
                    spacing,
                    element: element.ok_or_else(|| Error::Header("missing ElementType".into()))?,
                    msb,
                    data_file: value.to_string(),
                    local_offset: pos,
                });
            }
            // Geometry and bookkeeping keys the engine does not use.
            _ => {}
        }
    }
    Err(Error::Header("missing ElementDataFile".into()))
}

fn parse_triple<T: std::str::FromStr>(key: &str, value: &str) -> Result<[T; 3]> {
    let parts: Vec<T> = value
        .split_whitespace()
        .map(|s| s.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Header(format!("bad {key} `{value}`")))?;
    <[T; 3]>::try_from(parts).map_err(|_| Error::Header(format!("{key} needs 3 values")))
}

/// Loads a volume and maps its intensities to `[0, 1]`: `MET_UCHAR` is
/// divided by 255, `MET_FLOAT` is kept as stored when already inside
/// `[0, 1]` and min-max rescaled otherwise.
pub fn load_volume(path: &Path) -> Result<ImageVolume> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let header = parse_header(&bytes)?;
    let count = header.dims[0] * header.dims[1] * header.dims[2];
    let expected = count * header.element.size();

    let owned;
    let payload: &[u8] = if header.data_file == "LOCAL" {
        &bytes[header.local_offset..]
    } else {
        let data_path = path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&header.data_file);
        owned = fs::read(&data_path).map_err(|e| Error::io(data_path, e))?;
        &owned
    };
    if payload.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: payload.len(),
        });
    }

    let data: Vec<f32> = match header.element {
        ElementType::UChar => payload.iter().map(|&b| b as f32 / 255.0).collect(),
        ElementType::Float => {
            let raw: Vec<f32> = payload
                .chunks_exact(4)
                .map(|c| {
                    let b = [c[0], c[1], c[2], c[3]];
                    if header.msb {
                        f32::from_be_bytes(b)
                    } else {
                        f32::from_le_bytes(b)
                    }
                })
                .collect();
            if raw.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidVolume("non-finite intensity".into()));
            }
            let lo = raw.iter().copied().fold(f32::INFINITY, f32::min);
            let hi = raw.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            if lo >= 0.0 && hi <= 1.0 {
                raw
            } else if hi > lo {
                raw.iter()
                    .map(|v| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
                    .collect()
            } else {
                vec![0.0; raw.len()]
            }
        }
    };
    ImageVolume::new(header.dims, header.spacing, data)
}

fn raw_path(path: &Path) -> PathBuf {
    path.with_extension("raw")
}

fn write_pair(
    path: &Path,
    dims: [usize; 3],
    spacing: [f64; 3],
    channels: usize,
    element: ElementType,
    payload: &[u8],
) -> Result<()> {
    let raw = raw_path(path);
    let raw_name = raw
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| Error::Header("output path has no file name".into()))?;
    let mut header = String::new();
    header.push_str("ObjectType = Image\n");
    header.push_str("NDims = 3\n");
    header.push_str("BinaryData = True\n");
    header.push_str("BinaryDataByteOrderMSB = False\n");
    header.push_str("CompressedData = False\n");
    header.push_str(&format!("DimSize = {} {} {}\n", dims[0], dims[1], dims[2]));
    header.push_str(&format!(
        "ElementSpacing = {:?} {:?} {:?}\n",
        spacing[0], spacing[1], spacing[2]
    ));
    if channels != 1 {
        header.push_str(&format!("ElementNumberOfChannels = {channels}\n"));
    }
    header.push_str(&format!("ElementType = {}\n", element.tag()));
    header.push_str(&format!("ElementDataFile = {raw_name}\n"));
    fs::write(path, header).map_err(|e| Error::io(path, e))?;
    fs::write(&raw, payload).map_err(|e| Error::io(raw, e))
}

/// Writes `path` (header) and a sibling `.raw` payload.
pub fn save_volume(volume: &ImageVolume, path: &Path, element: ElementType) -> Result<()> {
    let payload: Vec<u8> = match element {
        ElementType::UChar => volume
            .data()
            .iter()
            .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect(),
        ElementType::Float => volume.data().iter().flat_map(|v| v.to_le_bytes()).collect(),
    };
    write_pair(path, volume.dims(), volume.spacing(), 1, element, &payload)
}

/// Masks are stored as `MET_UCHAR` 0/255.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    save_volume(&mask.to_volume(), path, ElementType::UChar)
}

/// Multi-channel float field (e.g. a displacement field with 3 channels,
/// interleaved per voxel). Not readable by [`load_volume`].
pub fn save_volume_channels(
    dims: [usize; 3],
    spacing: [f64; 3],
    channels: usize,
    data: &[f32],
    path: &Path,
) -> Result<()> {
    let expected = dims[0] * dims[1] * dims[2] * channels;
    if data.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            found: data.len(),
        });
    }
    let payload: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    write_pair(path, dims, spacing, channels, ElementType::Float, &payload)
}
