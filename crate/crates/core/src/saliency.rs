//! Windowed 3D-FFT center-surround saliency.
//!
//! The volume is cut into non-overlapping `L x L x L` cubes. Each cube's
//! normalized 3D DFT is split into a component along the frame (temporal)
//! axis and a component in the orthogonal plane; the spectral energy of
//! each becomes one cell of a coarse grid. Contrast of every cell against
//! its 3x3x3 neighbourhood gives two maps, which are averaged, upsampled
//! back to voxel resolution and min-max normalized.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::par;
use crate::volume::{Axis, Dims, Volume3D};

/// Normalized 3D DFT of one cube, `coeffs[(u*L + v)*L + w]` with raw
/// (unshifted) DFT indices; `u` pairs with `m`, `v` with `n`, `w` with `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSpectrum {
    size: usize,
    coeffs: Vec<Complex64>,
}

impl LocalSpectrum {
    pub fn new(size: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != size * size * size {
            return Err(Error::InvalidParameter(format!(
                "spectrum of size {size} needs {} coefficients, got {}",
                size * size * size,
                coeffs.len()
            )));
        }
        Ok(LocalSpectrum { size, coeffs })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize, w: usize) -> Complex64 {
        self.coeffs[(u * self.size + v) * self.size + w]
    }
}

/// Signed frequency of DFT index `i`, in `[-L/2, L/2)`.
#[inline]
pub fn centered_frequency(i: usize, size: usize) -> i64 {
    if 2 * i < size {
        i as i64
    } else {
        i as i64 - size as i64
    }
}

/// Reusable 3D transform for one cube size.
pub struct SpectrumPlanner {
    size: usize,
    fft: Arc<dyn Fft<f64>>,
    line: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectrumPlanner {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::InvalidParameter(format!(
                "window size must be >= 2, got {size}"
            )));
        }
        let fft = FftPlanner::new().plan_fft_forward(size);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Ok(SpectrumPlanner {
            size,
            fft,
            line: vec![Complex64::default(); size],
            scratch,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Transforms a C-ordered `L^3` window.
    pub fn transform(&mut self, window: &[f64]) -> LocalSpectrum {
        let mut coeffs = Vec::new();
        self.transform_into(window, &mut coeffs);
        LocalSpectrum {
            size: self.size,
            coeffs,
        }
    }

    fn transform_into(&mut self, window: &[f64], out: &mut Vec<Complex64>) {
        let l = self.size;
        let plane = l * l;
        assert_eq!(window.len(), plane * l, "window must hold L^3 samples");

        out.clear();
        out.extend(window.iter().map(|&x| Complex64::new(x, 0.0)));

        // k axis: contiguous rows
        self.fft.process_with_scratch(out, &mut self.scratch);

        // n axis: stride L
        for m in 0..l {
            for k in 0..l {
                let base = m * plane + k;
                for (j, c) in self.line.iter_mut().enumerate() {
                    *c = out[base + j * l];
                }
                self.fft.process_with_scratch(&mut self.line, &mut self.scratch);
                for (j, c) in self.line.iter().enumerate() {
                    out[base + j * l] = *c;
                }
            }
        }

        // m axis: stride L^2
        for offset in 0..plane {
            for (j, c) in self.line.iter_mut().enumerate() {
                *c = out[offset + j * plane];
            }
            self.fft.process_with_scratch(&mut self.line, &mut self.scratch);
            for (j, c) in self.line.iter().enumerate() {
                out[offset + j * plane] = *c;
            }
        }

        let norm = 1.0 / (plane * l) as f64;
        for c in out.iter_mut() {
            *c *= norm;
        }
    }
}

/// `F[u,v,w] = (1/L^3) sum f[m,n,k] exp(-2 pi i (mu + nv + kw) / L)` for a
/// C-ordered window of `size^3` samples.
pub fn compute_local_spectrum(window: &[f64], size: usize) -> Result<LocalSpectrum> {
    if window.len() != size * size * size {
        return Err(Error::InvalidParameter(format!(
            "window of size {size} needs {} samples, got {}",
            size * size * size,
            window.len()
        )));
    }
    Ok(SpectrumPlanner::new(size)?.transform(window))
}

/// Per-coefficient weights splitting a spectrum into its frame-axis and
/// in-plane parts.
///
/// With centered frequencies `(fu, fv, fw)` and `ft` the one along the
/// temporal axis, the weights are `ft / |f|` and `sqrt(|f|^2 - ft^2) / |f|`.
/// Both are zero at DC.
#[derive(Debug, Clone)]
pub struct SpectralSplit {
    size: usize,
    temporal: Vec<f64>,
    spatial: Vec<f64>,
}

impl SpectralSplit {
    pub fn new(size: usize, temporal_axis: Axis) -> Self {
        let n = size * size * size;
        let mut temporal = Vec::with_capacity(n);
        let mut spatial = Vec::with_capacity(n);
        let t = temporal_axis.position();
        for u in 0..size {
            for v in 0..size {
                for w in 0..size {
                    let f = [u, v, w].map(|i| centered_frequency(i, size) as f64);
                    let radius = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
                    if radius == 0.0 {
                        temporal.push(0.0);
                        spatial.push(0.0);
                        continue;
                    }
                    let plane: f64 = (0..3).filter(|&a| a != t).map(|a| f[a] * f[a]).sum();
                    temporal.push(f[t] / radius);
                    spatial.push(plane.sqrt() / radius);
                }
            }
        }
        SpectralSplit {
            size,
            temporal,
            spatial,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `(temporal, spatial)` weight at raw DFT index `(u, v, w)`.
    pub fn weights(&self, u: usize, v: usize, w: usize) -> (f64, f64) {
        let i = (u * self.size + v) * self.size + w;
        (self.temporal[i], self.spatial[i])
    }

    pub fn decompose(&self, spectrum: &LocalSpectrum) -> (LocalSpectrum, LocalSpectrum) {
        assert_eq!(spectrum.size, self.size, "spectrum size differs from split size");
        let ft = spectrum
            .coeffs
            .iter()
            .zip(&self.temporal)
            .map(|(c, w)| c * w)
            .collect();
        let fs = spectrum
            .coeffs
            .iter()
            .zip(&self.spatial)
            .map(|(c, w)| c * w)
            .collect();
        (
            LocalSpectrum {
                size: self.size,
                coeffs: ft,
            },
            LocalSpectrum {
                size: self.size,
                coeffs: fs,
            },
        )
    }

    /// Spectral energies of the two components without materializing them.
    pub fn energies(&self, coeffs: &[Complex64]) -> (f64, f64) {
        let mut et = 0.0;
        let mut es = 0.0;
        for ((c, wt), ws) in coeffs.iter().zip(&self.temporal).zip(&self.spatial) {
            et += (c * wt).norm_sqr();
            es += (c * ws).norm_sqr();
        }
        (et, es)
    }
}

/// Splits `spectrum` into its temporal and spatial components.
pub fn decompose_spectrum(spectrum: &LocalSpectrum, temporal_axis: Axis) -> (LocalSpectrum, LocalSpectrum) {
    SpectralSplit::new(spectrum.size, temporal_axis).decompose(spectrum)
}

/// Sum of squared coefficient magnitudes.
pub fn spectral_energy(spectrum: &LocalSpectrum) -> f64 {
    spectrum.coeffs.iter().map(|c| c.norm_sqr()).sum()
}

/// Coarse grid with one value per `L^3` window.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    dims: Dims,
    window: usize,
    values: Vec<f64>,
}

impl CellGrid {
    pub fn new(dims: Dims, window: usize, values: Vec<f64>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims(format!("cell grid {dims} is empty")));
        }
        if values.len() != dims.len() {
            return Err(Error::InvalidDims(format!(
                "cell grid {dims} needs {} values, got {}",
                dims.len(),
                values.len()
            )));
        }
        Ok(CellGrid {
            dims,
            window,
            values,
        })
    }

    /// Cell dims covering `volume` with windows of edge `window`.
    pub fn dims_for(volume: Dims, window: usize) -> Dims {
        Dims::new(
            volume.m.div_ceil(window),
            volume.n.div_ceil(window),
            volume.k.div_ceil(window),
        )
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, m: usize, n: usize, k: usize) -> f64 {
        self.values[self.dims.index(m, n, k)]
    }

    /// Cell containing voxel `(m, n, k)`.
    #[inline]
    pub fn cell_of(&self, m: usize, n: usize, k: usize) -> (usize, usize, usize) {
        (m / self.window, n / self.window, k / self.window)
    }
}

/// Half-sample symmetric reflection into `[0, extent)`: `... c b a | a b c ...`.
#[inline]
pub(crate) fn reflect(i: usize, extent: usize) -> usize {
    let period = 2 * extent;
    let j = i % period;
    if j < extent {
        j
    } else {
        period - 1 - j
    }
}

/// Temporal and spatial energy grids of `volume`.
///
/// Windows that run past the end of an axis read reflected samples.
pub fn build_energy_grids(volume: &Volume3D, window: usize, temporal_axis: Axis) -> Result<(CellGrid, CellGrid)> {
    if window < 2 {
        return Err(Error::InvalidParameter(format!(
            "window size must be >= 2, got {window}"
        )));
    }
    let d = volume.dims();
    if window > d.m && window > d.n && window > d.k {
        return Err(Error::InvalidParameter(format!(
            "window {window} exceeds every dimension of {d}"
        )));
    }
    let cells = CellGrid::dims_for(d, window);
    let split = SpectralSplit::new(window, temporal_axis);
    let data = volume.data();

    let energies = par::map_indexed(
        cells.len(),
        || {
            (
                SpectrumPlanner::new(window).expect("window validated"),
                vec![0.0; window * window * window],
                Vec::with_capacity(window * window * window),
            )
        },
        |(planner, buf, coeffs), cell| {
            let (cm, cn, ck) = cells.coords(cell);
            let (m0, n0, k0) = (cm * window, cn * window, ck * window);
            let mut i = 0;
            for dm in 0..window {
                let m = reflect(m0 + dm, d.m);
                for dn in 0..window {
                    let n = reflect(n0 + dn, d.n);
                    let row = d.index(m, n, 0);
                    for dk in 0..window {
                        buf[i] = data[row + reflect(k0 + dk, d.k)];
                        i += 1;
                    }
                }
            }
            planner.transform_into(buf, coeffs);
            split.energies(coeffs)
        },
    );

    let (et, es): (Vec<f64>, Vec<f64>) = energies.into_iter().unzip();
    Ok((
        CellGrid::new(cells, window, et)?,
        CellGrid::new(cells, window, es)?,
    ))
}

/// Mean absolute difference of each cell against its in-grid 3x3x3
/// neighbours (center excluded). A lone cell has no neighbours and maps to 0.
pub fn center_surround(grid: &CellGrid) -> CellGrid {
    let d = grid.dims;
    let values = par::map_indexed(
        d.len(),
        || (),
        |_, idx| {
            let (m, n, k) = d.coords(idx);
            let center = grid.values[idx];
            let mut sum = 0.0;
            let mut count = 0usize;
            for nm in m.saturating_sub(1)..(m + 2).min(d.m) {
                for nn in n.saturating_sub(1)..(n + 2).min(d.n) {
                    for nk in k.saturating_sub(1)..(k + 2).min(d.k) {
                        if (nm, nn, nk) == (m, n, k) {
                            continue;
                        }
                        sum += (center - grid.get(nm, nn, nk)).abs();
                        count += 1;
                    }
                }
            }
            if count == 0 {
                0.0
            } else {
                sum / count as f64
            }
        },
    );
    CellGrid {
        dims: d,
        window: grid.window,
        values,
    }
}

/// Fused saliency at voxel resolution, normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyVolume(Volume3D);

impl SaliencyVolume {
    /// Accepts a volume whose values already lie in `[0, 1]`.
    pub fn from_volume(volume: Volume3D) -> Result<Self> {
        if let Some((index, &value)) = volume
            .data()
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::InvalidParameter(format!(
                "saliency value {value} at flat index {index} outside [0, 1]"
            )));
        }
        Ok(SaliencyVolume(volume))
    }

    /// Min-max normalizes `volume`; a constant volume becomes all zeros.
    pub fn normalize(volume: Volume3D) -> Self {
        let (lo, hi) = volume.min_max();
        let dims = volume.dims();
        let data = volume.into_data();
        let data = if hi > lo {
            let span = hi - lo;
            data.into_iter().map(|v| (v - lo) / span).collect()
        } else {
            vec![0.0; data.len()]
        };
        SaliencyVolume(Volume3D::new(dims, data).expect("normalized values are finite"))
    }

    pub fn volume(&self) -> &Volume3D {
        &self.0
    }

    pub fn into_volume(self) -> Volume3D {
        self.0
    }

    pub fn dims(&self) -> Dims {
        self.0.dims()
    }

    pub fn values(&self) -> &[f64] {
        self.0.data()
    }
}

/// Averages the two maps cellwise, replicates each cell over its window,
/// crops to `target` and normalizes.
pub fn fuse_and_upsample(temporal: &CellGrid, spatial: &CellGrid, target: Dims) -> Result<SaliencyVolume> {
    if temporal.dims != spatial.dims {
        return Err(Error::ShapeMismatch {
            left: temporal.dims,
            right: spatial.dims,
        });
    }
    if temporal.window != spatial.window {
        return Err(Error::InvalidParameter(format!(
            "window sizes differ: {} vs {}",
            temporal.window, spatial.window
        )));
    }
    let expected = CellGrid::dims_for(target, temporal.window);
    if expected != temporal.dims {
        return Err(Error::ShapeMismatch {
            left: expected,
            right: temporal.dims,
        });
    }
    let fused: Vec<f64> = temporal
        .values
        .iter()
        .zip(&spatial.values)
        .map(|(t, s)| 0.5 * t + 0.5 * s)
        .collect();
    let cells = temporal.dims;
    let l = temporal.window;

    let mut data = vec![0.0; target.len()];
    let plane = target.n * target.k;
    par::for_each_chunk(&mut data, plane, |m, out| {
        let cm = m / l;
        for n in 0..target.n {
            let cn = n / l;
            for k in 0..target.k {
                out[n * target.k + k] = fused[cells.index(cm, cn, k / l)];
            }
        }
    });
    let volume = Volume3D::new(target, data)?;
    Ok(SaliencyVolume::normalize(volume))
}

/// Scales `volume` by its largest magnitude so that the pipeline sees the
/// same samples for any positive amplitude gain.
fn unit_peak(volume: &Volume3D) -> Result<Volume3D> {
    let peak = volume.data().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if peak == 0.0 {
        return Ok(volume.clone());
    }
    let data = volume.data().iter().map(|v| v / peak).collect();
    Volume3D::new(volume.dims(), data)
}

/// Energy grids, center-surround maps and the fused volume.
#[derive(Debug, Clone)]
pub struct SaliencyStages {
    pub temporal_energy: CellGrid,
    pub spatial_energy: CellGrid,
    pub temporal_saliency: CellGrid,
    pub spatial_saliency: CellGrid,
    pub saliency: SaliencyVolume,
}

pub fn compute_saliency_stages(volume: &Volume3D, cfg: &PipelineConfig) -> Result<SaliencyStages> {
    cfg.validate()?;
    let input = unit_peak(volume)?;
    let (et, es) = build_energy_grids(&input, cfg.window, cfg.temporal_axis)?;
    let st = center_surround(&et);
    let ss = center_surround(&es);
    let saliency = fuse_and_upsample(&st, &ss, volume.dims())?;
    Ok(SaliencyStages {
        temporal_energy: et,
        spatial_energy: es,
        temporal_saliency: st,
        spatial_saliency: ss,
        saliency,
    })
}

/// Full saliency map of `volume`.
pub fn compute_saliency(volume: &Volume3D, cfg: &PipelineConfig) -> Result<SaliencyVolume> {
    compute_saliency_stages(volume, cfg).map(|s| s.saliency)
}
