//! Slow, literal reference implementations. Nothing here shares code with
//! `salsi-core`; tests compare the two.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

/// `(1/L^3) sum f[m,n,k] exp(-2 pi i (mu + nv + kw)/L)` by direct summation.
/// Output index `(u*L + v)*L + w`.
pub fn naive_dft3(window: &[f64], l: usize) -> Vec<Complex64> {
    assert_eq!(window.len(), l * l * l);
    let twiddle: Vec<Complex64> = (0..l)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / l as f64))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); l * l * l];
    for u in 0..l {
        for v in 0..l {
            for w in 0..l {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..l {
                    for n in 0..l {
                        for k in 0..l {
                            let phase = (m * u + n * v + k * w) % l;
                            acc += window[(m * l + n) * l + k] * twiddle[phase];
                        }
                    }
                }
                out[(u * l + v) * l + w] = acc / (l * l * l) as f64;
            }
        }
    }
    out
}

/// Signed frequency of index `i` for an `l`-point DFT, written out as the
/// FFT-shift lookup.
pub fn shifted_frequency(i: usize, l: usize) -> f64 {
    let shifted: Vec<i64> = (0..l as i64).map(|j| j - (l as i64) / 2).collect();
    // fftshift places index 0 at position l/2
    let pos = (i + l / 2) % l;
    shifted[pos] as f64
}

/// Mean absolute difference against in-grid neighbours of a 3x3x3 stencil,
/// center excluded; `dims = (a, b, c)`, C order.
pub fn naive_center_surround(values: &[f64], dims: (usize, usize, usize)) -> Vec<f64> {
    let (a, b, c) = dims;
    let at = |i: i64, j: i64, k: i64| values[((i as usize) * b + j as usize) * c + k as usize];
    let mut out = Vec::with_capacity(values.len());
    for i in 0..a as i64 {
        for j in 0..b as i64 {
            for k in 0..c as i64 {
                let mut diffs = Vec::new();
                for di in -1..=1 {
                    for dj in -1..=1 {
                        for dk in -1..=1 {
                            if di == 0 && dj == 0 && dk == 0 {
                                continue;
                            }
                            let (x, y, z) = (i + di, j + dj, k + dk);
                            if x < 0 || y < 0 || z < 0 || x >= a as i64 || y >= b as i64 || z >= c as i64 {
                                continue;
                            }
                            diffs.push((at(i, j, k) - at(x, y, z)).abs());
                        }
                    }
                }
                let q = diffs.len();
                out.push(if q == 0 { 0.0 } else { diffs.iter().sum::<f64>() / q as f64 });
            }
        }
    }
    out
}

/// Exhaustive minimizer of `sigma1^2(T) P1 + sigma2^2(T) P2` with the class
/// variances written out term by term. Smallest `T` wins ties; both classes
/// must carry mass.
pub fn otsu_within_class(p: &[f64]) -> Option<usize> {
    let h = p.len();
    let mut best: Option<(usize, f64)> = None;
    for t in 1..h {
        let p1: f64 = (0..t).map(|i| p[i]).sum();
        let p2: f64 = (t..h).map(|i| p[i]).sum();
        let n1 = (0..t).filter(|&i| p[i] > 0.0).count();
        let n2 = (t..h).filter(|&i| p[i] > 0.0).count();
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let mu1: f64 = (0..t).map(|i| i as f64 * p[i] / p1).sum();
        let mu2: f64 = (t..h).map(|i| i as f64 * p[i] / p2).sum();
        let var1: f64 = (0..t).map(|i| (i as f64 - mu1).powi(2) * p[i] / p1).sum();
        let var2: f64 = (t..h).map(|i| (i as f64 - mu2).powi(2) * p[i] / p2).sum();
        let obj = var1 * p1 + var2 * p2;
        if best.is_none_or(|(_, b)| obj < b) {
            best = Some((t, obj));
        }
    }
    best.map(|(t, _)| t)
}

/// Exhaustive maximizer of the between-class variance `P1 P2 (mu1 - mu2)^2`.
pub fn otsu_between_class(p: &[f64]) -> Option<usize> {
    let h = p.len();
    let mut best: Option<(usize, f64)> = None;
    for t in 1..h {
        let p1: f64 = (0..t).map(|i| p[i]).sum();
        let p2: f64 = (t..h).map(|i| p[i]).sum();
        if !(0..t).any(|i| p[i] > 0.0) || !(t..h).any(|i| p[i] > 0.0) {
            continue;
        }
        let mu1: f64 = (0..t).map(|i| i as f64 * p[i]).sum::<f64>() / p1;
        let mu2: f64 = (t..h).map(|i| i as f64 * p[i]).sum::<f64>() / p2;
        let obj = p1 * p2 * (mu1 - mu2).powi(2);
        if best.is_none_or(|(_, b)| obj > b) {
            best = Some((t, obj));
        }
    }
    best.map(|(t, _)| t)
}

/// Disk offsets `dx^2 + dy^2 <= r^2`.
pub fn disk(r: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for dx in -r..=r {
        for dy in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Closing of a `rows x cols` image on the unbounded plane, cropped back:
/// `x` survives iff every disk translate covering `x` meets the foreground.
pub fn naive_close_2d(img: &[bool], rows: usize, cols: usize, r: i64) -> Vec<bool> {
    let se = disk(r);
    let fg: HashSet<(i64, i64)> = (0..rows * cols)
        .filter(|&i| img[i])
        .map(|i| ((i / cols) as i64, (i % cols) as i64))
        .collect();
    let dilated = |p: (i64, i64)| se.iter().any(|&(dx, dy)| fg.contains(&(p.0 - dx, p.1 - dy)));
    (0..rows * cols)
        .map(|i| {
            let x = ((i / cols) as i64, (i % cols) as i64);
            se.iter().all(|&(dx, dy)| dilated((x.0 + dx, x.1 + dy)))
        })
        .collect()
}

/// Area under a staircase of `(fpr, tpr)` points in which each step moves
/// along one axis only: sum of `width * height` rectangles.
pub fn staircase_area(points: &[(f64, f64)]) -> f64 {
    let mut area = 0.0;
    for w in points.windows(2) {
        let ((x0, y0), (x1, _)) = (w[0], w[1]);
        if x1 > x0 {
            area += (x1 - x0) * y0;
        }
    }
    area
}

/// Distance from `(x, rho)` to the ellipse with semi-axes `(a, b)` by a
/// dense angular scan refined with golden-section search.
pub fn ellipse_distance(a: f64, b: f64, x: f64, rho: f64) -> f64 {
    let (x, rho) = (x.abs(), rho.abs());
    let dist = |t: f64| ((a * t.cos() - x).powi(2) + (b * t.sin() - rho).powi(2)).sqrt();
    let samples = 4096;
    let step = (PI / 2.0) / samples as f64;
    let mut best = 0;
    for i in 0..=samples {
        if dist(i as f64 * step) < dist(best as f64 * step) {
            best = i;
        }
    }
    let mut lo = (best as f64 - 1.0).max(0.0) * step;
    let mut hi = (best as f64 + 1.0).min(samples as f64) * step;
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = hi - g * (hi - lo);
        let d = lo + g * (hi - lo);
        if dist(c) < dist(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    dist(0.5 * (lo + hi)).min(dist(0.0)).min(dist(PI / 2.0))
}

/// Minimal binary PGM (P5) parser: `(width, height, maxval, pixels)`.
pub fn read_pgm(bytes: &[u8]) -> Option<(usize, usize, usize, Vec<u8>)> {
    let mut pos = 0;
    let mut token = || -> Option<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        (pos > start).then(|| String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return None;
    }
    let w: usize = token()?.parse().ok()?;
    let h: usize = token()?.parse().ok()?;
    let maxval: usize = token()?.parse().ok()?;
    // exactly one whitespace byte separates the header from the raster
    let raster = &bytes[pos + 1..];
    (raster.len() == w * h).then(|| (w, h, maxval, raster.to_vec()))
}
