use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpDistance {
    pub p: u32,
    /// `(sum |a - b|^p)^(1/p)`
    pub total: f64,
    /// `sum |a - b|^p / n`
    pub mean_per_pixel: f64,
}

pub fn lp_distance(a: &Spectrogram, b: &Spectrogram, p: u32) -> Result<LpDistance> {
    a.check_same_shape(b)?;
    if p != 1 && p != 2 {
        return Err(Error::invalid(format!("L{p} is not supported; use 1 or 2")));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| {
            let d = (x as f64 - y as f64).abs();
            if p == 1 {
                d
            } else {
                d * d
            }
        })
        .sum();
    Ok(LpDistance {
        p,
        total: if p == 1 { sum } else { sum.sqrt() },
        mean_per_pixel: sum / a.values().len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsnrMode {
    /// `10 log10(MAX^2 / MSE)`
    #[default]
    StandardMse,
    /// `10 log10(MAX^2 / mean |a - b|)`
    PaperLiteralL1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Psnr {
    /// `+inf` when the inputs are identical.
    pub db: f64,
    pub infinite: bool,
}

pub fn psnr(a: &Spectrogram, b: &Spectrogram, max_value: f64, mode: PsnrMode) -> Result<Psnr> {
    if !(max_value > 0.0 && max_value.is_finite()) {
        return Err(Error::invalid("PSNR peak value must be positive"));
    }
    let err = match mode {
        PsnrMode::StandardMse => lp_distance(a, b, 2)?.mean_per_pixel,
        PsnrMode::PaperLiteralL1 => lp_distance(a, b, 1)?.mean_per_pixel,
    };
    if err == 0.0 {
        return Ok(Psnr {
            db: f64::INFINITY,
            infinite: true,
        });
    }
    Ok(Psnr {
        db: 10.0 * (max_value * max_value / err).log10(),
        infinite: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SsimWindow {
    Gaussian { sigma: f64 },
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub window_size: usize,
    pub window: SsimWindow,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub dynamic_range: f64,
}

impl SsimParams {
    /// 11x11 Gaussian (sigma 1.5), `C1 = (0.01 L)^2`, `C2 = (0.03 L)^2`, `C3 = C2 / 2`.
    pub fn standard(dynamic_range: f64) -> Self {
        let l = if dynamic_range > 0.0 { dynamic_range } else { 1.0 };
        let c2 = (0.03 * l).powi(2);
        Self {
            window_size: 11,
            window: SsimWindow::Gaussian { sigma: 1.5 },
            c1: (0.01 * l).powi(2),
            c2,
            c3: c2 / 2.0,
            dynamic_range: l,
        }
    }

    /// Standard constants with `L` taken from the reference maximum.
    pub fn for_reference(reference: &Spectrogram) -> Self {
        Self::standard(reference.max_value() as f64)
    }

    fn validate(&self) -> Result<()> {
        if self.window_size == 0 {
            return Err(Error::invalid("SSIM window must be non-empty"));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0) {
            return Err(Error::invalid("SSIM stabilisers must be positive"));
        }
        if let SsimWindow::Gaussian { sigma } = self.window {
            if !(sigma > 0.0) {
                return Err(Error::invalid("SSIM sigma must be positive"));
            }
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        let n = self.window_size;
        let w: Vec<f64> = match self.window {
            SsimWindow::Uniform => vec![1.0; n],
            SsimWindow::Gaussian { sigma } => {
                let c = (n as f64 - 1.0) / 2.0;
                (0..n)
                    .map(|i| (-((i as f64 - c).powi(2)) / (2.0 * sigma * sigma)).exp())
                    .collect()
            }
        };
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect()
    }
}

/// Valid-mode separable filtering of a `rows x cols` map.
fn filter_valid(x: &[f64], rows: usize, cols: usize, w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let (or, oc) = (rows - n + 1, cols - n + 1);
    let mut tmp = vec![0.0; rows * oc];
    for r in 0..rows {
        for c in 0..oc {
            tmp[r * oc + c] = (0..n).map(|k| w[k] * x[r * cols + c + k]).sum();
        }
    }
    let mut out = vec![0.0; or * oc];
    for r in 0..or {
        for c in 0..oc {
            out[r * oc + c] = (0..n).map(|k| w[k] * tmp[(r + k) * oc + c]).sum();
        }
    }
    out
}

/// Mean over all fully-contained windows of luminance x contrast x structure.
pub fn ssim(a: &Spectrogram, b: &Spectrogram, params: &SsimParams) -> Result<f64> {
    a.check_same_shape(b)?;
    params.validate()?;
    let (rows, cols) = a.shape();
    if params.window_size > rows || params.window_size > cols {
        return Err(Error::invalid(format!(
            "SSIM window {} does not fit {rows}x{cols}",
            params.window_size
        )));
    }
    let w = params.weights();
    let x: Vec<f64> = a.values().iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = b.values().iter().map(|&v| v as f64).collect();
    let prod = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| u * v).collect::<Vec<_>>();
    let mx = filter_valid(&x, rows, cols, &w);
    let my = filter_valid(&y, rows, cols, &w);
    let mxx = filter_valid(&prod(&x, &x), rows, cols, &w);
    let myy = filter_valid(&prod(&y, &y), rows, cols, &w);
    let mxy = filter_valid(&prod(&x, &y), rows, cols, &w);
    let (c1, c2, c3) = (params.c1, params.c2, params.c3);
    let mut total = 0.0;
    for i in 0..mx.len() {
        let (ux, uy) = (mx[i], my[i]);
        let vx = (mxx[i] - ux * ux).max(0.0);
        let vy = (myy[i] - uy * uy).max(0.0);
        let cov = mxy[i] - ux * uy;
        let (sx, sy) = (vx.sqrt(), vy.sqrt());
        let l = (2.0 * ux * uy + c1) / (ux * ux + uy * uy + c1);
        let c = (2.0 * sx * sy + c2) / (vx + vy + c2);
        let s = (cov + c3) / (sx * sy + c3);
        total += l * c * s;
    }
    Ok(total / mx.len() as f64)
}

/// `(1 - ssim) / 2`
pub fn dssim(a: &Spectrogram, b: &Spectrogram, params: &SsimParams) -> Result<f64> {
    Ok((1.0 - ssim(a, b, params)?) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectro::Geometry;

    fn constant(v: f32, n: usize) -> Spectrogram {
        Spectrogram::new(vec![v; n * n], n, n, Geometry::Raw { sample_rate_hz: 1.0, hop_samples: 1 }).unwrap()
    }

    #[test]
    fn lp_examples() {
        let a = Spectrogram::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let b = Spectrogram::from_rows(&[vec![0.0, 0.0]]).unwrap();
        assert_eq!(lp_distance(&a, &a, 1).unwrap().total, 0.0);
        assert_eq!(lp_distance(&a, &b, 1).unwrap().total, 1.0);
        assert_eq!(lp_distance(&a, &b, 2).unwrap().total, 1.0);
        assert_eq!(lp_distance(&a, &b, 1).unwrap().mean_per_pixel, 0.5);
        assert!(lp_distance(&a, &b, 3).is_err());
        assert!(lp_distance(&a, &constant(0.0, 2), 1).is_err());
    }

    #[test]
    fn psnr_examples() {
        // MSE 0.01 from a uniform 0.1 offset
        let a = constant(0.1, 4);
        let b = constant(0.0, 4);
        let p = psnr(&a, &b, 1.0, PsnrMode::StandardMse).unwrap();
        assert!((p.db - 20.0).abs() < 1e-6);

        let a = constant(255.0, 3);
        let p = psnr(&a, &b_of(3), 255.0, PsnrMode::StandardMse).unwrap();
        assert!(p.db.abs() < 1e-12);

        let same = psnr(&a, &a, 255.0, PsnrMode::StandardMse).unwrap();
        assert!(same.infinite && same.db.is_infinite());

        let lit = psnr(&constant(0.1, 4), &constant(0.0, 4), 1.0, PsnrMode::PaperLiteralL1).unwrap();
        assert!((lit.db - 10.0).abs() < 1e-5);
    }

    fn b_of(n: usize) -> Spectrogram {
        constant(0.0, n)
    }

    #[test]
    fn ssim_on_constants_matches_closed_form() {
        let l = 1.0;
        let p = SsimParams::standard(l);
        let (ux, uy) = (0.1f32, 0.1f32 + 0.5);
        let got = ssim(&constant(ux, 16), &constant(uy, 16), &p).unwrap();
        let (ux, uy) = (ux as f64, uy as f64);
        let closed = (2.0 * ux * uy + p.c1) / (ux * ux + uy * uy + p.c1);
        assert!((got - closed).abs() < 1e-9, "{got} {closed}");
        assert!(got < 0.5);
        assert!((ssim(&constant(0.3, 16), &constant(0.3, 16), &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ssim_errors() {
        let p = SsimParams::standard(1.0);
        assert!(ssim(&constant(0.0, 5), &constant(0.0, 5), &p).is_err());
        let bad = SsimParams { c1: 0.0, ..p };
        assert!(ssim(&constant(0.0, 12), &constant(0.0, 12), &bad).is_err());
        let uni = SsimParams { window: SsimWindow::Uniform, window_size: 3, ..p };
        assert!((ssim(&constant(0.2, 5), &constant(0.2, 5), &uni).unwrap() - 1.0).abs() < 1e-12);
    }
}
