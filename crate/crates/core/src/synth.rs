//! Synthetic salt-dome volumes with exact ground truth.
//!
//! An ellipsoidal dome sits in horizontally layered strata. Outside the
//! dome each sample follows a sinusoidal reflector in time-depth; inside it
//! carries weak incoherent texture. Gaussian noise is added everywhere. The
//! noise for voxel `i` is drawn from stream `i` of a ChaCha generator keyed
//! by the seed, so the volume does not depend on evaluation order.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::volume::{BinaryVolume, Dims, Volume3D};

/// Slack on the band test so voxels lying exactly `r_gt` from the surface
/// are kept despite rounding in the distance solver.
pub const BAND_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomeSpec {
    pub dims: [usize; 3],
    /// Dome centre in voxel coordinates `(m, n, k)`.
    pub center: [f64; 3],
    /// Semi-axes along `(m, n, k)`.
    pub radii: [f64; 3],
    /// Half-width of the ground-truth band around the surface, in voxels.
    pub band_half_width: f64,
    pub reflector_amplitude: f64,
    /// Reflector period along time-depth, in samples.
    pub reflector_period: f64,
    pub interior_amplitude: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for DomeSpec {
    fn default() -> Self {
        DomeSpec {
            dims: [64, 64, 64],
            center: [32.0, 32.0, 32.0],
            radii: [20.0, 16.0, 16.0],
            band_half_width: 3.0,
            reflector_amplitude: 1.0,
            reflector_period: 8.0,
            interior_amplitude: 0.2,
            noise_sigma: 0.1,
            seed: 0,
        }
    }
}

impl DomeSpec {
    pub fn volume_dims(&self) -> Dims {
        Dims::new(self.dims[0], self.dims[1], self.dims[2])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dims.contains(&0) {
            return bad(format!("dims {:?} must be positive", self.dims));
        }
        if self.radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return bad(format!("radii {:?} must be positive", self.radii));
        }
        if !(self.band_half_width > 0.0 && self.reflector_period > 0.0) {
            return bad("band_half_width and reflector_period must be positive".into());
        }
        for (name, v) in [
            ("reflector_amplitude", self.reflector_amplitude),
            ("interior_amplitude", self.interior_amplitude),
            ("noise_sigma", self.noise_sigma),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        for axis in 0..3 {
            let reach = self.radii[axis] + self.band_half_width;
            let lo = self.center[axis] - reach;
            let hi = self.center[axis] + reach;
            if lo < 0.0 || hi > (self.dims[axis] - 1) as f64 {
                return bad(format!(
                    "dome plus band spans [{lo}, {hi}] on axis {axis}, outside [0, {}]",
                    self.dims[axis] - 1
                ));
            }
        }
        Ok(())
    }

    fn relative(&self, m: usize, n: usize, k: usize) -> [f64; 3] {
        [
            m as f64 - self.center[0],
            n as f64 - self.center[1],
            k as f64 - self.center[2],
        ]
    }

    pub fn is_inside(&self, m: usize, n: usize, k: usize) -> bool {
        let p = self.relative(m, n, k);
        (0..3).map(|i| (p[i] / self.radii[i]).powi(2)).sum::<f64>() <= 1.0
    }

    /// Euclidean distance from voxel `(m, n, k)` to the dome surface.
    pub fn surface_distance(&self, m: usize, n: usize, k: usize) -> f64 {
        distance_to_ellipsoid(self.radii, self.relative(m, n, k))
    }

    pub fn in_band(&self, m: usize, n: usize, k: usize) -> bool {
        self.surface_distance(m, n, k) <= self.band_half_width + BAND_EPS
    }

    /// Mean of `|reflector|` over one sampled period minus the mean absolute
    /// interior texture: the amplitude step an interpreter sees at the
    /// surface before noise.
    pub fn design_contrast(&self) -> f64 {
        let samples = (self.reflector_period.round() as usize).max(1);
        let reflector = (0..samples)
            .map(|m| (2.0 * PI * m as f64 / self.reflector_period).sin().abs())
            .sum::<f64>()
            / samples as f64;
        self.reflector_amplitude * reflector - self.interior_amplitude * (2.0 / PI).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct SynthCase {
    pub volume: Volume3D,
    pub gt_boundary: BinaryVolume,
    pub gt_interior: BinaryVolume,
}

pub fn generate(spec: &DomeSpec) -> Result<SynthCase> {
    spec.validate()?;
    let dims = spec.volume_dims();
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let plane = dims.n * dims.k;

    let planes: Vec<(Vec<f64>, Vec<bool>, Vec<bool>)> = par::map_indexed(
        dims.m,
        || (),
        |_, m| {
            let mut amp = Vec::with_capacity(plane);
            let mut band = Vec::with_capacity(plane);
            let mut inside = Vec::with_capacity(plane);
            let reflector =
                spec.reflector_amplitude * (2.0 * PI * m as f64 / spec.reflector_period).sin();
            for n in 0..dims.n {
                for k in 0..dims.k {
                    let mut rng = base.clone();
                    rng.set_stream(dims.index(m, n, k) as u64);
                    let texture: f64 = StandardNormal.sample(&mut rng);
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let is_inside = spec.is_inside(m, n, k);
                    let signal = if is_inside {
                        spec.interior_amplitude * texture
                    } else {
                        reflector
                    };
                    // stored as f32 on disk; keep memory and file identical
                    amp.push((signal + spec.noise_sigma * noise) as f32 as f64);
                    band.push(spec.in_band(m, n, k));
                    inside.push(is_inside);
                }
            }
            (amp, band, inside)
        },
    );

    let mut data = Vec::with_capacity(dims.len());
    let mut band = Vec::with_capacity(dims.len());
    let mut inside = Vec::with_capacity(dims.len());
    for (a, b, i) in planes {
        data.extend(a);
        band.extend(b);
        inside.extend(i);
    }
    let provenance = format!(
        "synthetic dome: center {:?} radii {:?} band {} noise {} seed {}",
        spec.center, spec.radii, spec.band_half_width, spec.noise_sigma, spec.seed
    );
    Ok(SynthCase {
        volume: Volume3D::new(dims, data)?.with_provenance(provenance),
        gt_boundary: BinaryVolume::new(dims, band)?,
        gt_interior: BinaryVolume::new(dims, inside)?,
    })
}

/// Distance from `p` (relative to the centre) to the surface of the
/// axis-aligned ellipsoid with semi-axes `radii`.
///
/// Works in the first octant with the axes sorted by decreasing length and
/// finds the Lagrange parameter of the closest point by bisection; zero
/// coordinates are handled by reducing to the 2D or 1D problem.
pub fn distance_to_ellipsoid(radii: [f64; 3], p: [f64; 3]) -> f64 {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]));
    let e = order.map(|i| radii[i]);
    let y = order.map(|i| p[i].abs());
    distance_sorted_3d(e, y)
}

fn robust_length(v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if max == 0.0 {
        return 0.0;
    }
    max * v.iter().map(|x| (x / max).powi(2)).sum::<f64>().sqrt()
}

/// Root in `s` of `sum (r_i z_i / (s + r_i))^2 - 1` with `r` ratios of
/// squared semi-axes to the smallest one (last entry is 1).
fn bisect_root(r: &[f64], z: &[f64], g: f64) -> f64 {
    let n: Vec<f64> = r.iter().zip(z).map(|(ri, zi)| ri * zi).collect();
    let last = *z.last().expect("nonempty");
    let mut s0 = last - 1.0;
    let mut s1 = if g < 0.0 { 0.0 } else { robust_length(&n) - 1.0 };
    let mut s = 0.0;
    for _ in 0..2200 {
        s = 0.5 * (s0 + s1);
        if s == s0 || s == s1 {
            break;
        }
        let val: f64 = n
            .iter()
            .zip(r)
            .map(|(ni, ri)| (ni / (s + ri)).powi(2))
            .sum::<f64>()
            - 1.0;
        if val > 0.0 {
            s0 = s;
        } else if val < 0.0 {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

fn distance_sorted_2d(e: [f64; 2], y: [f64; 2]) -> f64 {
    if y[1] > 0.0 {
        if y[0] > 0.0 {
            let z = [y[0] / e[0], y[1] / e[1]];
            let g = z[0] * z[0] + z[1] * z[1] - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r = [(e[0] / e[1]).powi(2), 1.0];
            let s = bisect_root(&r, &z, g);
            let x = [r[0] * y[0] / (s + r[0]), y[1] / (s + 1.0)];
            ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
        } else {
            (y[1] - e[1]).abs()
        }
    } else {
        let numer = e[0] * y[0];
        let denom = e[0] * e[0] - e[1] * e[1];
        if numer < denom {
            let xde = numer / denom;
            let x0 = e[0] * xde;
            let x1 = e[1] * (1.0 - xde * xde).max(0.0).sqrt();
            ((x0 - y[0]).powi(2) + x1 * x1).sqrt()
        } else {
            (y[0] - e[0]).abs()
        }
    }
}

fn distance_sorted_3d(e: [f64; 3], y: [f64; 3]) -> f64 {
    if y[2] > 0.0 {
        if y[1] > 0.0 {
            if y[0] > 0.0 {
                let z = [y[0] / e[0], y[1] / e[1], y[2] / e[2]];
                let g = z.iter().map(|v| v * v).sum::<f64>() - 1.0;
                if g == 0.0 {
                    return 0.0;
                }
                let r = [(e[0] / e[2]).powi(2), (e[1] / e[2]).powi(2), 1.0];
                let s = bisect_root(&r, &z, g);
                let x = [
                    r[0] * y[0] / (s + r[0]),
                    r[1] * y[1] / (s + r[1]),
                    y[2] / (s + 1.0),
                ];
                (0..3).map(|i| (x[i] - y[i]).powi(2)).sum::<f64>().sqrt()
            } else {
                distance_sorted_2d([e[1], e[2]], [y[1], y[2]])
            }
        } else if y[0] > 0.0 {
            distance_sorted_2d([e[0], e[2]], [y[0], y[2]])
        } else {
            (y[2] - e[2]).abs()
        }
    } else {
        let denom = [e[0] * e[0] - e[2] * e[2], e[1] * e[1] - e[2] * e[2]];
        let numer = [e[0] * y[0], e[1] * y[1]];
        if numer[0] < denom[0] && numer[1] < denom[1] {
            let xde = [numer[0] / denom[0], numer[1] / denom[1]];
            let discr = 1.0 - xde[0] * xde[0] - xde[1] * xde[1];
            if discr > 0.0 {
                let x = [e[0] * xde[0], e[1] * xde[1], e[2] * discr.sqrt()];
                return ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + x[2] * x[2]).sqrt();
            }
        }
        distance_sorted_2d([e[0], e[1]], [y[0], y[1]])
    }
}
