//! Browser demo: generate a synthetic dome, compute its saliency map and
//! inspect sections of the amplitude, saliency and segmentation volumes.
//!
//! All state lives in [`Demo`]; the JS side only passes numbers and receives
//! RGBA buffers for `ImageData`.

use salsi_core::{
    compute_saliency, generate, roc_sweep, segment, Axis, BinaryVolume, DomeSpec, PipelineConfig, SaliencyVolume,
    SynthCase, Volume3D,
};
use wasm_bindgen::prelude::*;

/// Layer drawn by [`Demo::render`].
#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layer {
    Amplitude = 0,
    Saliency = 1,
    Mask = 2,
}

#[wasm_bindgen]
pub struct Demo {
    case: SynthCase,
    cfg: PipelineConfig,
    saliency: Option<SaliencyVolume>,
    mask: Option<BinaryVolume>,
    threshold: Option<usize>,
    auc: Option<f64>,
}

#[wasm_bindgen]
impl Demo {
    /// Cubic dome of edge `size` (at least 16) with noise level `noise_sigma`.
    #[wasm_bindgen(constructor)]
    pub fn new(size: usize, noise_sigma: f64, seed: u32) -> Result<Demo, JsError> {
        let spec = dome(size, noise_sigma, seed.into())?;
        Ok(Demo {
            case: generate(&spec)?,
            cfg: PipelineConfig::default(),
            saliency: None,
            mask: None,
            threshold: None,
            auc: None,
        })
    }

    pub fn size(&self) -> usize {
        self.case.volume.dims().m
    }

    /// Recomputes saliency, segmentation and AUC with the given window and
    /// closing radius. Returns the AUC.
    pub fn compute(&mut self, window: usize, se_radius: usize) -> Result<f64, JsError> {
        self.cfg.window = window;
        self.cfg.se_radius = se_radius;
        let s = compute_saliency(&self.case.volume, &self.cfg)?;
        let auc = roc_sweep(&s, &self.case.gt_boundary, self.cfg.n_thresholds, self.cfg.levels)?.auc;
        // a flat map has no threshold; leave the mask empty rather than fail
        let (threshold, mask) = match segment(&s, &self.cfg) {
            Ok(seg) => (Some(seg.threshold), Some(seg.closed)),
            Err(_) => (None, None),
        };
        self.saliency = Some(s);
        self.mask = mask;
        self.threshold = threshold;
        self.auc = Some(auc);
        Ok(auc)
    }

    /// Otsu level of the last computation, or -1.
    pub fn threshold(&self) -> i32 {
        self.threshold.map_or(-1, |t| t as i32)
    }

    /// RGBA pixels of one section; ground-truth voxels are tinted red when
    /// `overlay` is set. Layers not yet computed render black.
    pub fn render(&self, layer: Layer, axis: &str, index: usize, overlay: bool) -> Result<Vec<u8>, JsError> {
        let axis: Axis = axis.parse()?;
        let gray = match layer {
            Layer::Amplitude => section_gray(&self.case.volume, axis, index)?,
            Layer::Saliency => match &self.saliency {
                Some(s) => section_gray(s.volume(), axis, index)?,
                None => blank(&self.case.volume, axis, index)?,
            },
            Layer::Mask => match &self.mask {
                Some(m) => section_gray(&m.to_volume(), axis, index)?,
                None => blank(&self.case.volume, axis, index)?,
            },
        };
        let truth = overlay.then(|| self.case.gt_boundary.to_volume());
        let truth = match &truth {
            Some(t) => Some(t.section(axis, index)?.values),
            None => None,
        };
        Ok(rgba(&gray, truth.as_deref()))
    }

    /// `[width, height]` of sections across `axis`.
    pub fn section_shape(&self, axis: &str) -> Result<Vec<usize>, JsError> {
        let axis: Axis = axis.parse()?;
        let s = self.case.volume.section(axis, 0)?;
        Ok(vec![s.width, s.height])
    }
}

fn dome(size: usize, noise_sigma: f64, seed: u64) -> salsi_core::Result<DomeSpec> {
    if size < 16 {
        return Err(salsi_core::Error::InvalidParameter(format!("size must be >= 16, got {size}")));
    }
    // same proportions as the default 64^3 case
    let scale = size as f64 / 64.0;
    let c = size as f64 / 2.0;
    let spec = DomeSpec {
        dims: [size; 3],
        center: [c; 3],
        radii: [20.0 * scale, 16.0 * scale, 16.0 * scale],
        noise_sigma,
        seed,
        ..DomeSpec::default()
    };
    spec.validate()?;
    Ok(spec)
}

fn section_gray(v: &Volume3D, axis: Axis, index: usize) -> salsi_core::Result<Vec<u8>> {
    Ok(v.section(axis, index)?.to_gray())
}

fn blank(v: &Volume3D, axis: Axis, index: usize) -> salsi_core::Result<Vec<u8>> {
    let s = v.section(axis, index)?;
    Ok(vec![0; s.width * s.height])
}

fn rgba(gray: &[u8], truth: Option<&[f64]>) -> Vec<u8> {
    let mut out = Vec::with_capacity(gray.len() * 4);
    for (i, &g) in gray.iter().enumerate() {
        if truth.is_some_and(|t| t[i] > 0.5) {
            out.extend_from_slice(&[g / 2 + 128, g / 2, g / 2, 255]);
        } else {
            out.extend_from_slice(&[g, g, g, 255]);
        }
    }
    out
}
