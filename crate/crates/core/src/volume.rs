//! Dense 3D grids, the on-disk volume format, and section export.
//!
//! Volumes are indexed `(m, n, k)` = (time-depth, crossline, inline) and
//! stored in C order: `m` slowest, `k` fastest. On disk a volume is a JSON
//! header next to a raw little-endian `f32` payload:
//!
//! ```text
//! name.json  {"dims":[M,N,K],"dtype":"f32le","axes":["time","crossline","inline"],"provenance":"..."}
//! name.raw   M*N*K little-endian f32 samples
//! ```
//!
//! Samples are held as `f64` in memory. Loading widens exactly; saving
//! narrows to `f32`, so values that already are `f32` round-trip bit-exact.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DTYPE_F32LE: &str = "f32le";

/// Grid extent: `m` time-depth samples, `n` crosslines, `k` inlines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl Dims {
    pub const fn new(m: usize, n: usize, k: usize) -> Self {
        Dims { m, n, k }
    }

    pub fn len(&self) -> usize {
        self.m * self.n * self.k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, m: usize, n: usize, k: usize) -> usize {
        debug_assert!(m < self.m && n < self.n && k < self.k);
        (m * self.n + n) * self.k + k
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let k = idx % self.k;
        let rest = idx / self.k;
        (rest / self.n, rest % self.n, k)
    }

    pub fn extent(&self, axis: Axis) -> usize {
        match axis {
            Axis::Time => self.m,
            Axis::Crossline => self.n,
            Axis::Inline => self.k,
        }
    }

    pub fn as_array(&self) -> [usize; 3] {
        [self.m, self.n, self.k]
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.k == 0 {
            return Err(Error::InvalidDims(format!("{self} has a zero extent")));
        }
        self.m
            .checked_mul(self.n)
            .and_then(|x| x.checked_mul(self.k))
            .ok_or_else(|| Error::InvalidDims(format!("{self} overflows")))?;
        Ok(())
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.m, self.n, self.k)
    }
}

/// One of the three survey axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Time,
    Crossline,
    Inline,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::Time, Axis::Crossline, Axis::Inline];

    /// Position of the axis in `(m, n, k)` order.
    pub fn position(self) -> usize {
        match self {
            Axis::Time => 0,
            Axis::Crossline => 1,
            Axis::Inline => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::Time => "time",
            Axis::Crossline => "crossline",
            Axis::Inline => "inline",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Axis::Time),
            "crossline" => Ok(Axis::Crossline),
            "inline" => Ok(Axis::Inline),
            other => Err(Error::InvalidParameter(format!(
                "unknown axis {other:?} (expected time, crossline or inline)"
            ))),
        }
    }
}

fn default_axis_labels() -> [String; 3] {
    Axis::ALL.map(|a| a.name().to_string())
}

/// Dense scalar grid: raw amplitudes, energies or saliency values.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume3D {
    dims: Dims,
    data: Vec<f64>,
    axis_labels: [String; 3],
    sample_interval_ms: Option<f64>,
    provenance: Option<String>,
}

impl Volume3D {
    /// Wraps `data` (C order over `(m, n, k)`). Rejects zero extents, a
    /// length mismatch and non-finite samples.
    pub fn new(dims: Dims, data: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "{dims} needs {} samples, got {}",
                dims.len(),
                data.len()
            )));
        }
        if let Some((index, &value)) = data.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Volume3D {
            dims,
            data,
            axis_labels: default_axis_labels(),
            sample_interval_ms: None,
            provenance: None,
        })
    }

    pub fn zeros(dims: Dims) -> Result<Self> {
        dims.validate()?;
        Self::new(dims, vec![0.0; dims.len()])
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        dims.validate()?;
        let mut data = Vec::with_capacity(dims.len());
        for m in 0..dims.m {
            for n in 0..dims.n {
                for k in 0..dims.k {
                    data.push(f(m, n, k));
                }
            }
        }
        Self::new(dims, data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, k: usize) -> f64 {
        self.data[self.dims.index(m, n, k)]
    }

    pub fn axis_labels(&self) -> &[String; 3] {
        &self.axis_labels
    }

    pub fn with_axis_labels(mut self, labels: [String; 3]) -> Self {
        self.axis_labels = labels;
        self
    }

    pub fn sample_interval_ms(&self) -> Option<f64> {
        self.sample_interval_ms
    }

    pub fn with_sample_interval_ms(mut self, dt: Option<f64>) -> Self {
        self.sample_interval_ms = dt;
        self
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = Some(provenance.into());
        self
    }

    /// Multiplies every sample by `alpha`.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        let data = self.data.iter().map(|v| v * alpha).collect();
        let mut out = Self::new(self.dims, data)?;
        out.axis_labels = self.axis_labels.clone();
        out.sample_interval_ms = self.sample_interval_ms;
        Ok(out)
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.data)
    }

    /// Extracts the 2D section at `index` along `axis`.
    ///
    /// Inline and crossline sections have time running down the rows; time
    /// slices have crosslines down the rows and inlines across.
    pub fn section(&self, axis: Axis, index: usize) -> Result<Section> {
        let extent = self.dims.extent(axis);
        if index >= extent {
            return Err(Error::IndexOutOfRange {
                axis: axis.name(),
                index,
                extent,
            });
        }
        let d = self.dims;
        let (height, width) = match axis {
            Axis::Inline => (d.m, d.n),
            Axis::Crossline => (d.m, d.k),
            Axis::Time => (d.n, d.k),
        };
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                let (m, n, k) = match axis {
                    Axis::Inline => (row, col, index),
                    Axis::Crossline => (row, index, col),
                    Axis::Time => (index, row, col),
                };
                values.push(self.get(m, n, k));
            }
        }
        Ok(Section {
            width,
            height,
            values,
        })
    }
}

/// A 2D slice, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Section {
    /// Min-max scales the section to 8-bit gray; a constant section maps to 128.
    pub fn to_gray(&self) -> Vec<u8> {
        let (lo, hi) = min_max(&self.values);
        if hi <= lo {
            return vec![128; self.values.len()];
        }
        let span = hi - lo;
        self.values
            .iter()
            .map(|v| (((v - lo) / span) * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Boolean grid with the same shape contract as [`Volume3D`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryVolume {
    dims: Dims,
    bits: Vec<bool>,
}

impl BinaryVolume {
    pub fn new(dims: Dims, bits: Vec<bool>) -> Result<Self> {
        dims.validate()?;
        if bits.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "{dims} needs {} cells, got {}",
                dims.len(),
                bits.len()
            )));
        }
        Ok(BinaryVolume { dims, bits })
    }

    pub fn empty(dims: Dims) -> Result<Self> {
        dims.validate()?;
        Ok(BinaryVolume {
            dims,
            bits: vec![false; dims.len()],
        })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        dims.validate()?;
        let bits = (0..dims.len())
            .map(|i| {
                let (m, n, k) = dims.coords(i);
                f(m, n, k)
            })
            .collect();
        Ok(BinaryVolume { dims, bits })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, k: usize) -> bool {
        self.bits[self.dims.index(m, n, k)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        BinaryVolume {
            dims: self.dims,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// True when every set cell of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BinaryVolume) -> bool {
        self.dims == other.dims && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// 0.0 / 1.0 volume for serialization.
    pub fn to_volume(&self) -> Volume3D {
        let data = self.bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        Volume3D::new(self.dims, data).expect("dims already validated")
    }

    /// Cells with value > 0.5 are set.
    pub fn from_volume(v: &Volume3D) -> Self {
        BinaryVolume {
            dims: v.dims(),
            bits: v.data().iter().map(|&x| x > 0.5).collect(),
        }
    }
}

/// JSON sidecar header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeHeader {
    pub dims: [usize; 3],
    pub dtype: String,
    pub axes: [String; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval_ms: Option<f64>,
}

impl VolumeHeader {
    pub fn for_volume(v: &Volume3D) -> Self {
        VolumeHeader {
            dims: v.dims.as_array(),
            dtype: DTYPE_F32LE.to_string(),
            axes: v.axis_labels.clone(),
            provenance: v.provenance.clone(),
            sample_interval_ms: v.sample_interval_ms,
        }
    }

    pub fn dims(&self) -> Dims {
        Dims::new(self.dims[0], self.dims[1], self.dims[2])
    }

    pub fn payload_bytes(&self) -> u64 {
        self.dims.iter().map(|&d| d as u64).product::<u64>() * 4
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let header: VolumeHeader =
            serde_json::from_str(&text).map_err(|e| Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: e.to_string(),
            })?;
        if header.dtype != DTYPE_F32LE {
            return Err(Error::MalformedHeader {
                path: path.to_path_buf(),
                reason: format!("unsupported dtype {:?}, expected {DTYPE_F32LE:?}", header.dtype),
            });
        }
        header.dims().validate().map_err(|e| Error::MalformedHeader {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        Ok(header)
    }
}

/// Header and payload paths for a volume stem: `stem.json` / `stem.raw`.
///
/// A trailing `.json` or `.raw` on the argument is stripped first.
pub fn volume_paths(stem: impl AsRef<Path>) -> (PathBuf, PathBuf) {
    let stem = stem.as_ref();
    let base = match stem.extension().and_then(|e| e.to_str()) {
        Some("json") | Some("raw") => stem.with_extension(""),
        _ => stem.to_path_buf(),
    };
    let mut header = base.clone().into_os_string();
    header.push(".json");
    let mut payload = base.into_os_string();
    payload.push(".raw");
    (header.into(), payload.into())
}

pub fn load_volume(header_path: impl AsRef<Path>, payload_path: impl AsRef<Path>) -> Result<Volume3D> {
    let header_path = header_path.as_ref();
    let payload_path = payload_path.as_ref();
    let header = VolumeHeader::read(header_path)?;

    let mut file = File::open(payload_path).map_err(|e| Error::io(payload_path, e))?;
    let actual = file
        .metadata()
        .map_err(|e| Error::io(payload_path, e))?
        .len();
    let expected = header.payload_bytes();
    if actual != expected {
        return Err(Error::SizeMismatch {
            path: payload_path.to_path_buf(),
            expected,
            actual,
        });
    }
    let mut bytes = Vec::with_capacity(expected as usize);
    file.read_to_end(&mut bytes)
        .map_err(|e| Error::io(payload_path, e))?;

    let data = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let v = Volume3D::new(header.dims(), data)?;
    Ok(Volume3D {
        axis_labels: header.axes,
        sample_interval_ms: header.sample_interval_ms,
        provenance: header.provenance,
        ..v
    })
}

/// Loads `stem.json` + `stem.raw`.
pub fn load_volume_stem(stem: impl AsRef<Path>) -> Result<Volume3D> {
    let (h, p) = volume_paths(stem);
    load_volume(h, p)
}

pub fn encode_payload(v: &Volume3D) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(v.data.len() * 4);
    for (index, &x) in v.data.iter().enumerate() {
        let narrowed = x as f32;
        if !narrowed.is_finite() {
            return Err(Error::NonFinite { index, value: x });
        }
        out.extend_from_slice(&narrowed.to_le_bytes());
    }
    Ok(out)
}

pub fn save_volume(v: &Volume3D, header_path: impl AsRef<Path>, payload_path: impl AsRef<Path>) -> Result<()> {
    let header_path = header_path.as_ref();
    let payload_path = payload_path.as_ref();
    let payload = encode_payload(v)?;
    let header = serde_json::to_string_pretty(&VolumeHeader::for_volume(v))
        .expect("header serializes");

    fs::write(payload_path, &payload).map_err(|e| Error::io(payload_path, e))?;
    fs::write(header_path, header + "\n").map_err(|e| Error::io(header_path, e))?;
    Ok(())
}

/// Writes `stem.json` + `stem.raw`.
pub fn save_volume_stem(v: &Volume3D, stem: impl AsRef<Path>) -> Result<()> {
    let (h, p) = volume_paths(stem);
    save_volume(v, h, p)
}

/// Binary PGM (P5, maxval 255) of one section, min-max normalized over
/// that section.
pub fn export_slice(v: &Volume3D, axis: Axis, index: usize, out: impl AsRef<Path>) -> Result<()> {
    let out = out.as_ref();
    let section = v.section(axis, index)?;
    let file = File::create(out).map_err(|e| Error::io(out, e))?;
    let mut w = BufWriter::new(file);
    write_pgm(&mut w, section.width, section.height, &section.to_gray())
        .map_err(|e| Error::io(out, e))
}

pub fn write_pgm<W: Write>(w: &mut W, width: usize, height: usize, pixels: &[u8]) -> std::io::Result<()> {
    debug_assert_eq!(pixels.len(), width * height);
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(pixels)?;
    w.flush()
}
