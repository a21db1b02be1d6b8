//! Otsu binarization of a saliency map followed by morphological closing.

use serde::Serialize;

use crate::config::{MorphologyMode, PipelineConfig};
use crate::error::{Error, Result};
use crate::par;
use crate::saliency::SaliencyVolume;
use crate::volume::{BinaryVolume, Dims};

/// Gray-level histogram of a quantized map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "histogram needs at least 2 levels, got {}",
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(Histogram { counts, total })
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Voxels at level `threshold` or above.
    pub fn mass_at_or_above(&self, threshold: usize) -> u64 {
        self.counts.iter().skip(threshold).sum()
    }
}

/// Saliency mapped to integer gray levels `0..levels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedVolume {
    dims: Dims,
    levels: usize,
    values: Vec<u16>,
}

impl QuantizedVolume {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }
}

/// Level of a saliency value `x` in `[0, 1]`: `min(floor(x * levels), levels - 1)`.
#[inline]
pub fn quantize_value(x: f64, levels: usize) -> u16 {
    ((x * levels as f64).floor().max(0.0) as usize).min(levels - 1) as u16
}

pub fn quantize(s: &SaliencyVolume, levels: usize) -> Result<(QuantizedVolume, Histogram)> {
    if !(2..=u16::MAX as usize + 1).contains(&levels) {
        return Err(Error::InvalidParameter(format!(
            "levels must be in [2, 65536], got {levels}"
        )));
    }
    let values: Vec<u16> = s.values().iter().map(|&x| quantize_value(x, levels)).collect();
    let mut counts = vec![0u64; levels];
    for &q in &values {
        counts[q as usize] += 1;
    }
    Ok((
        QuantizedVolume {
            dims: s.dims(),
            levels,
            values,
        },
        Histogram::from_counts(counts)?,
    ))
}

/// Threshold `T` minimizing the weighted within-class variance of classes
/// `[0, T)` and `[T, levels)`, searched exhaustively over `1..levels` with
/// both classes nonempty. Ties go to the smallest `T`.
///
/// The within-class scatter is `sum(i^2 c_i) - s1^2/n1 - s2^2/n2` with
/// `n` and `s` the class counts and first moments, so the search maximizes
/// `s1^2/n1 + s2^2/n2`. Moments are accumulated exactly in integers.
pub fn otsu_threshold(h: &Histogram) -> Result<usize> {
    let nonempty = h.counts.iter().filter(|&&c| c > 0).count();
    if nonempty < 2 {
        return Err(Error::Degenerate(format!(
            "histogram has {nonempty} nonempty level(s); cannot split into two classes"
        )));
    }
    let total_n: u128 = h.total as u128;
    let total_s: u128 = h
        .counts
        .iter()
        .enumerate()
        .map(|(i, &c)| i as u128 * c as u128)
        .sum();

    let mut n1: u128 = 0;
    let mut s1: u128 = 0;
    let mut best: Option<(usize, f64)> = None;
    for t in 1..h.levels() {
        let c = h.counts[t - 1] as u128;
        n1 += c;
        s1 += (t as u128 - 1) * c;
        let n2 = total_n - n1;
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let s2 = total_s - s1;
        let (s1f, s2f) = (s1 as f64, s2 as f64);
        let score = s1f * s1f / n1 as f64 + s2f * s2f / n2 as f64;
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((t, score));
        }
    }
    Ok(best.expect("two nonempty levels admit a split").0)
}

/// `true` where the quantized level is `>= threshold`.
pub fn binarize(q: &QuantizedVolume, threshold: usize) -> Result<BinaryVolume> {
    if threshold == 0 || threshold >= q.levels {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside [1, {}]",
            q.levels - 1
        )));
    }
    let bits = q.values.iter().map(|&v| v as usize >= threshold).collect();
    BinaryVolume::new(q.dims, bits)
}

/// Flat structuring element centred on the origin, stored as runs along
/// the crossline axis: each `(dm, dk, half)` covers `dn` in `[-half, half]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
    mode: MorphologyMode,
    runs: Vec<(i64, i64, usize)>,
}

impl StructuringElement {
    /// `{(dm, dn) : dm^2 + dn^2 <= r^2}` in the `(m, n)` plane.
    pub fn disk(radius: usize) -> Self {
        let r = radius as i64;
        let runs = (-r..=r)
            .map(|dm| (dm, 0, isqrt(r * r - dm * dm)))
            .collect();
        StructuringElement {
            radius,
            mode: MorphologyMode::PerSection2d,
            runs,
        }
    }

    /// `{(dm, dn, dk) : dm^2 + dn^2 + dk^2 <= r^2}`.
    pub fn ball(radius: usize) -> Self {
        let r = radius as i64;
        let mut runs = Vec::new();
        for dm in -r..=r {
            for dk in -r..=r {
                let rem = r * r - dm * dm - dk * dk;
                if rem >= 0 {
                    runs.push((dm, dk, isqrt(rem)));
                }
            }
        }
        StructuringElement {
            radius,
            mode: MorphologyMode::Ball3d,
            runs,
        }
    }

    pub fn for_mode(mode: MorphologyMode, radius: usize) -> Self {
        match mode {
            MorphologyMode::PerSection2d => Self::disk(radius),
            MorphologyMode::Ball3d => Self::ball(radius),
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn mode(&self) -> MorphologyMode {
        self.mode
    }

    /// Every `(dm, dn, dk)` offset of the element.
    pub fn offsets(&self) -> Vec<(i64, i64, i64)> {
        self.runs
            .iter()
            .flat_map(|&(dm, dk, half)| {
                let h = half as i64;
                (-h..=h).map(move |dn| (dm, dn, dk))
            })
            .collect()
    }
}

fn isqrt(x: i64) -> usize {
    debug_assert!(x >= 0);
    let mut r = (x as f64).sqrt() as i64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r as usize
}

/// Running count of set cells: `prefix[j]` counts `row[..j]`.
fn prefix_counts(row: impl Iterator<Item = bool>, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len + 1);
    let mut acc = 0u32;
    out.push(0);
    for b in row {
        acc += b as u32;
        out.push(acc);
    }
    out
}

#[inline]
fn count_in(prefix: &[u32], lo: i64, hi: i64) -> u32 {
    // inclusive [lo, hi], clipped to the row
    let len = prefix.len() as i64 - 1;
    let lo = lo.max(0);
    let hi = hi.min(len - 1);
    if lo > hi {
        0
    } else {
        prefix[(hi + 1) as usize] - prefix[lo as usize]
    }
}

/// Dilation then erosion by `se`.
///
/// The set is closed on the unbounded grid with background outside the
/// volume and then cropped, so the result is extensive and idempotent up to
/// the volume border. In per-section mode every inline section is
/// processed independently.
pub fn morph_close(b: &BinaryVolume, se: &StructuringElement) -> BinaryVolume {
    let d = b.dims();
    let r = se.radius as i64;
    let (pad_m, pad_n) = (r, r);
    let pad_k = match se.mode {
        MorphologyMode::PerSection2d => 0,
        MorphologyMode::Ball3d => r,
    };
    let cm = d.m as i64 + 2 * pad_m;
    let cn = d.n as i64 + 2 * pad_n;
    let ck = d.k as i64 + 2 * pad_k;

    // crossline rows of the input, indexed m * K + k
    let src: Vec<Vec<u32>> = par::map_indexed(
        d.m * d.k,
        || (),
        |_, row| {
            let (m, k) = (row / d.k, row % d.k);
            prefix_counts((0..d.n).map(|n| b.get(m, n, k)), d.n)
        },
    );

    // dilated canvas rows (prefix form), indexed cm_i * ck + ck_i
    let canvas: Vec<Vec<u32>> = par::map_indexed(
        (cm * ck) as usize,
        || (),
        |_, row| {
            let (ci, ki) = (row as i64 / ck, row as i64 % ck);
            let sources: Vec<(&[u32], usize)> = se
                .runs
                .iter()
                .filter_map(|&(dm, dk, half)| {
                    let m = ci - pad_m - dm;
                    let k = ki - pad_k - dk;
                    if (0..d.m as i64).contains(&m) && (0..d.k as i64).contains(&k) {
                        Some((src[m as usize * d.k + k as usize].as_slice(), half))
                    } else {
                        None
                    }
                })
                .collect();
            let cells = (0..cn).map(|j| {
                let n = j - pad_n;
                sources
                    .iter()
                    .any(|&(p, half)| count_in(p, n - half as i64, n + half as i64) > 0)
            });
            prefix_counts(cells, cn as usize)
        },
    );

    let rows: Vec<Vec<bool>> = par::map_indexed(
        d.m * d.k,
        || (),
        |_, row| {
            let (m, k) = ((row / d.k) as i64, (row % d.k) as i64);
            (0..d.n as i64)
                .map(|n| {
                    let j = n + pad_n;
                    se.runs.iter().all(|&(dm, dk, half)| {
                        let ci = m + pad_m + dm;
                        let ki = k + pad_k + dk;
                        let h = half as i64;
                        let p = &canvas[(ci * ck + ki) as usize];
                        count_in(p, j - h, j + h) == 2 * half as u32 + 1
                    })
                })
                .collect()
        },
    );

    BinaryVolume::from_fn(d, |m, n, k| rows[m * d.k + k][n]).expect("dims from a valid volume")
}

/// Threshold, binary mask and closed mask.
#[derive(Debug, Clone)]
pub struct Segmentation {
    pub threshold: usize,
    pub histogram: Histogram,
    pub binary: BinaryVolume,
    pub closed: BinaryVolume,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SegmentationSummary {
    pub threshold: usize,
    pub levels: usize,
    pub binary_count: usize,
    pub closed_count: usize,
}

impl Segmentation {
    pub fn summary(&self) -> SegmentationSummary {
        SegmentationSummary {
            threshold: self.threshold,
            levels: self.histogram.levels(),
            binary_count: self.binary.count(),
            closed_count: self.closed.count(),
        }
    }
}

/// Quantize, Otsu threshold, binarize and close.
pub fn segment(s: &SaliencyVolume, cfg: &PipelineConfig) -> Result<Segmentation> {
    cfg.validate()?;
    let (q, histogram) = quantize(s, cfg.levels)?;
    let threshold = otsu_threshold(&histogram)?;
    let binary = binarize(&q, threshold)?;
    let se = StructuringElement::for_mode(cfg.morphology_mode, cfg.se_radius);
    let closed = morph_close(&binary, &se);
    Ok(Segmentation {
        threshold,
        histogram,
        binary,
        closed,
    })
}
