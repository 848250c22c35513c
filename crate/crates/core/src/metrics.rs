//! Image-quality metrics: L1, MSE, PSNR, SSIM, and D-SSIM.
//!
//! SSIM follows the standard reference formulation: 11x11 Gaussian window
//! with sigma 1.5, C1 = 0.01^2 and C2 = 0.03^2 for unit dynamic range,
//! evaluated per channel over valid window positions and averaged. The
//! module also exposes the SSIM gradient with respect to the first image,
//! which the splatting loss needs for its backward pass.

use crate::error::{CoreError, Result};
use crate::img::ImageRgb;

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// PSNR value reported for bit-identical images (MSE of zero).
pub const PSNR_CAP_DB: f64 = 99.0;

fn check_shapes(a: &ImageRgb, b: &ImageRgb) -> Result<()> {
    if !a.same_shape(b) {
        return Err(CoreError::Domain(format!(
            "image shape mismatch: {}x{} vs {}x{}",
            a.width, a.height, b.width, b.height
        )));
    }
    Ok(())
}

/// Mean absolute error over all pixels and channels.
pub fn l1(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    check_shapes(a, b)?;
    let n = (a.data.len() * 3) as f64;
    let mut acc = 0.0;
    for (pa, pb) in a.data.iter().zip(&b.data) {
        for c in 0..3 {
            acc += (pa[c] - pb[c]).abs();
        }
    }
    Ok(acc / n)
}

/// Mean squared error over all pixels and channels.
pub fn mse(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    check_shapes(a, b)?;
    let n = (a.data.len() * 3) as f64;
    let mut acc = 0.0;
    for (pa, pb) in a.data.iter().zip(&b.data) {
        for c in 0..3 {
            let d = pa[c] - pb[c];
            acc += d * d;
        }
    }
    Ok(acc / n)
}

/// Peak signal-to-noise ratio in dB for images in [0, 1]; capped at
/// [`PSNR_CAP_DB`] when the MSE is exactly zero.
pub fn psnr(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(psnr_from_mse(m))
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        PSNR_CAP_DB
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let half = (SSIM_WINDOW / 2) as f64;
    let mut sum = 0.0;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
        sum += *v;
    }
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Single-channel plane extracted for windowed filtering.
struct Plane {
    w: usize,
    h: usize,
    v: Vec<f64>,
}

impl Plane {
    fn from_channel(img: &ImageRgb, c: usize) -> Self {
        Plane {
            w: img.width,
            h: img.height,
            v: img.data.iter().map(|p| p[c]).collect(),
        }
    }

    fn map2(&self, other: &Plane, f: impl Fn(f64, f64) -> f64) -> Plane {
        Plane {
            w: self.w,
            h: self.h,
            v: self.v.iter().zip(&other.v).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

/// Valid-mode separable correlation with the SSIM kernel. The output plane
/// shrinks by window-1 in each dimension.
fn filter_valid(p: &Plane, k: &[f64; SSIM_WINDOW]) -> Plane {
    let ow = p.w - SSIM_WINDOW + 1;
    let oh = p.h - SSIM_WINDOW + 1;
    // Rows.
    let mut tmp = vec![0.0; ow * p.h];
    for y in 0..p.h {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                acc += kv * p.v[y * p.w + x + i];
            }
            tmp[y * ow + x] = acc;
        }
    }
    // Columns.
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (i, kv) in k.iter().enumerate() {
                acc += kv * tmp[(y + i) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    Plane {
        w: ow,
        h: oh,
        v: out,
    }
}

/// Transpose of [`filter_valid`]: scatters per-window coefficients back to
/// pixel space. Takes a (w-10)x(h-10) map and returns a w x h plane.
fn filter_valid_transpose(map: &Plane, k: &[f64; SSIM_WINDOW], w: usize, h: usize) -> Plane {
    let ow = map.w;
    // Columns first (inverse order of the forward pass).
    let mut tmp = vec![0.0; ow * h];
    for y in 0..map.h {
        for x in 0..ow {
            let g = map.v[y * ow + x];
            if g != 0.0 {
                for (i, kv) in k.iter().enumerate() {
                    tmp[(y + i) * ow + x] += kv * g;
                }
            }
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..ow {
            let g = tmp[y * ow + x];
            if g != 0.0 {
                for (i, kv) in k.iter().enumerate() {
                    out[y * w + x + i] += kv * g;
                }
            }
        }
    }
    Plane { w, h, v: out }
}

fn ssim_impl(a: &ImageRgb, b: &ImageRgb, with_grad: bool) -> Result<(f64, Option<ImageRgb>)> {
    check_shapes(a, b)?;
    if a.width < SSIM_WINDOW || a.height < SSIM_WINDOW {
        return Err(CoreError::Domain(format!(
            "image {}x{} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window",
            a.width, a.height
        )));
    }
    let k = gaussian_kernel();
    let mut total = 0.0;
    let mut grad = with_grad.then(|| ImageRgb::new(a.width, a.height));
    let n_windows = ((a.width - SSIM_WINDOW + 1) * (a.height - SSIM_WINDOW + 1) * 3) as f64;

    for c in 0..3 {
        let x = Plane::from_channel(a, c);
        let y = Plane::from_channel(b, c);
        let mu_x = filter_valid(&x, &k);
        let mu_y = filter_valid(&y, &k);
        let e_xx = filter_valid(&x.map2(&x, |u, v| u * v), &k);
        let e_yy = filter_valid(&y.map2(&y, |u, v| u * v), &k);
        let e_xy = filter_valid(&x.map2(&y, |u, v| u * v), &k);

        let m = mu_x.v.len();
        // Per-window coefficients for the gradient: dS/dE[x], dS/dE[x^2],
        // dS/dE[xy], where E[.] are the Gaussian-window moments.
        let mut g_ex = with_grad.then(|| vec![0.0; m]);
        let mut g_exx = with_grad.then(|| vec![0.0; m]);
        let mut g_exy = with_grad.then(|| vec![0.0; m]);

        for i in 0..m {
            let (mx, my) = (mu_x.v[i], mu_y.v[i]);
            let sx2 = e_xx.v[i] - mx * mx;
            let sy2 = e_yy.v[i] - my * my;
            let sxy = e_xy.v[i] - mx * my;
            let a1 = 2.0 * mx * my + SSIM_C1;
            let a2 = 2.0 * sxy + SSIM_C2;
            let b1 = mx * mx + my * my + SSIM_C1;
            let b2 = sx2 + sy2 + SSIM_C2;
            let s = (a1 * a2) / (b1 * b2);
            total += s;

            if with_grad {
                let ds_dmx = 2.0 * my * a2 / (b1 * b2) - 2.0 * mx * s / b1;
                let ds_dsx2 = -s / b2;
                let ds_dsxy = 2.0 * a1 / (b1 * b2);
                // sx2 = E[x^2] - mx^2 and sxy = E[xy] - mx*my pull mx back in.
                g_ex.as_mut().unwrap()[i] = ds_dmx - 2.0 * mx * ds_dsx2 - my * ds_dsxy;
                g_exx.as_mut().unwrap()[i] = ds_dsx2;
                g_exy.as_mut().unwrap()[i] = ds_dsxy;
            }
        }

        if let Some(grad) = grad.as_mut() {
            let mk = |v: Vec<f64>| Plane {
                w: mu_x.w,
                h: mu_x.h,
                v,
            };
            let t1 = filter_valid_transpose(&mk(g_ex.take().unwrap()), &k, a.width, a.height);
            let t2 = filter_valid_transpose(&mk(g_exx.take().unwrap()), &k, a.width, a.height);
            let t3 = filter_valid_transpose(&mk(g_exy.take().unwrap()), &k, a.width, a.height);
            for (i, px) in grad.data.iter_mut().enumerate() {
                px[c] = (t1.v[i] + 2.0 * x.v[i] * t2.v[i] + y.v[i] * t3.v[i]) / n_windows;
            }
        }
    }
    Ok((total / n_windows, grad))
}

/// Mean local SSIM between two images.
pub fn ssim(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    ssim_impl(a, b, false).map(|(s, _)| s)
}

/// SSIM plus its gradient with respect to `a`.
pub fn ssim_with_grad(a: &ImageRgb, b: &ImageRgb) -> Result<(f64, ImageRgb)> {
    ssim_impl(a, b, true).map(|(s, g)| (s, g.unwrap()))
}

/// Structural dissimilarity, (1 - SSIM) / 2.
pub fn d_ssim(a: &ImageRgb, b: &ImageRgb) -> Result<f64> {
    Ok((1.0 - ssim(a, b)?) / 2.0)
}

/// Quality summary for one method on a view set.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct QualityReport {
    pub psnr: f64,
    pub ssim: f64,
    pub l1: f64,
    pub mse: f64,
}

impl QualityReport {
    pub fn for_pair(render: &ImageRgb, target: &ImageRgb) -> Result<QualityReport> {
        let m = mse(render, target)?;
        Ok(QualityReport {
            psnr: psnr_from_mse(m),
            ssim: ssim(render, target)?,
            l1: l1(render, target)?,
            mse: m,
        })
    }

    /// Averages reports over a view set; PSNR is recomputed from mean MSE.
    pub fn mean(reports: &[QualityReport]) -> QualityReport {
        let n = reports.len() as f64;
        let mse = reports.iter().map(|r| r.mse).sum::<f64>() / n;
        QualityReport {
            psnr: psnr_from_mse(mse),
            ssim: reports.iter().map(|r| r.ssim).sum::<f64>() / n,
            l1: reports.iter().map(|r| r.l1).sum::<f64>() / n,
            mse,
        }
    }
}
