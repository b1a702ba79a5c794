use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectro::Spectrogram;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TverskyParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl TverskyParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = Self { alpha, beta, gamma };
        p.validate()?;
        Ok(p)
    }

    /// alpha = 0.7, beta = 0.3, gamma = 3/4.
    pub fn reference() -> Self {
        Self { alpha: 0.7, beta: 0.3, gamma: 0.75 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0) || (self.alpha + self.beta - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "Tversky weights must be non-negative and sum to 1, got {} + {}",
                self.alpha, self.beta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("Tversky gamma must be positive"));
        }
        Ok(())
    }
}

/// Continuous confusion sums over non-null pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TverskyComponents {
    /// sum of `gt * pred` where both are > 0
    pub true_pos: f64,
    /// sum of `pred` where pred > 0 and gt == 0
    pub false_pos: f64,
    /// sum of `gt` where gt > 0 and pred == 0
    pub false_neg: f64,
}

pub fn tversky_components_slices(pred: &[f32], gt: &[f32]) -> Result<TverskyComponents> {
    if pred.len() != gt.len() {
        return Err(Error::invalid("Tversky inputs differ in length"));
    }
    if pred.iter().chain(gt).any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("Tversky inputs must be non-negative"));
    }
    let mut c = TverskyComponents { true_pos: 0.0, false_pos: 0.0, false_neg: 0.0 };
    for (&p, &g) in pred.iter().zip(gt) {
        match (p > 0.0, g > 0.0) {
            (true, true) => c.true_pos += p as f64 * g as f64,
            (true, false) => c.false_pos += p as f64,
            (false, true) => c.false_neg += g as f64,
            (false, false) => {}
        }
    }
    Ok(c)
}

pub fn tversky_components(pred: &Spectrogram, gt: &Spectrogram) -> Result<TverskyComponents> {
    pred.check_same_shape(gt)?;
    tversky_components_slices(pred.values(), gt.values())
}

/// `TP / (TP + alpha FP + beta FN)`; 1 when all components are zero, 0 when
/// only the denominator vanishes.
pub fn tversky_index(c: &TverskyComponents, p: &TverskyParams) -> Result<f64> {
    p.validate()?;
    if c.true_pos == 0.0 && c.false_pos == 0.0 && c.false_neg == 0.0 {
        return Ok(1.0);
    }
    let den = c.true_pos + p.alpha * c.false_pos + p.beta * c.false_neg;
    if den <= 0.0 {
        return Ok(0.0);
    }
    Ok((c.true_pos / den).clamp(0.0, 1.0))
}

pub fn tversky_loss(c: &TverskyComponents, p: &TverskyParams) -> Result<f64> {
    Ok(1.0 - tversky_index(c, p)?)
}

/// `(1 - TI)^gamma`
pub fn focal_tversky_loss(c: &TverskyComponents, p: &TverskyParams) -> Result<f64> {
    let ti = tversky_index(c, p)?;
    if p.gamma == 1.0 {
        return Ok(1.0 - ti);
    }
    Ok((1.0 - ti).powf(p.gamma))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comps(tp: f64, fp: f64, fn_: f64) -> TverskyComponents {
        TverskyComponents { true_pos: tp, false_pos: fp, false_neg: fn_ }
    }

    #[test]
    fn component_examples() {
        let one = Spectrogram::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let c = tversky_components(&one, &one).unwrap();
        assert_eq!((c.true_pos, c.false_pos, c.false_neg), (1.0, 0.0, 0.0));

        let zero = Spectrogram::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let gt = Spectrogram::from_rows(&[vec![1.5, 0.0], vec![0.0, 2.0]]).unwrap();
        let c = tversky_components(&zero, &gt).unwrap();
        assert_eq!((c.true_pos, c.false_pos, c.false_neg), (0.0, 0.0, 3.5));

        assert!(tversky_components_slices(&[-1.0], &[0.0]).is_err());
        assert!(tversky_components_slices(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn index_examples() {
        let half = TverskyParams::new(0.5, 0.5, 1.0).unwrap();
        // pred {(0,0),(1,1)}, gt {(0,0)}
        let c = comps(1.0, 1.0, 0.0);
        assert!((tversky_index(&c, &half).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let ftl = TverskyParams::new(0.5, 0.5, 0.75).unwrap();
        let c = comps(3.0, 1.0, 1.0); // TI = 3 / 4
        assert!((tversky_index(&c, &ftl).unwrap() - 0.75).abs() < 1e-15);
        assert!((focal_tversky_loss(&c, &ftl).unwrap() - 0.25f64.powf(0.75)).abs() < 1e-12);
        assert!((focal_tversky_loss(&c, &ftl).unwrap() - 0.35355).abs() < 1e-5);
        assert_eq!(tversky_index(&comps(0.0, 0.0, 0.0), &half).unwrap(), 1.0);
        let a0 = TverskyParams::new(0.0, 1.0, 1.0).unwrap();
        assert_eq!(tversky_index(&comps(0.0, 2.0, 0.0), &a0).unwrap(), 0.0);
    }

    #[test]
    fn params_validation() {
        TverskyParams::reference().validate().unwrap();
        assert!(TverskyParams::new(0.6, 0.6, 1.0).is_err());
        assert!(TverskyParams::new(0.7, 0.3, 0.0).is_err());
        assert!(TverskyParams::new(-0.1, 1.1, 1.0).is_err());
    }
}
