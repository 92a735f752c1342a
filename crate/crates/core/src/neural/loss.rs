use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub loss: f64,
    /// d loss / d prediction.
    pub gradient: Vec<f64>,
}

/// Mean Huber loss with unit threshold: `0.5 e^2` for `|e| < 1`, else `|e| - 0.5`.
pub fn smooth_l1(pred: &[f64], target: &[f64]) -> Result<LossReport> {
    if pred.len() != target.len() {
        return Err(Error::DimensionMismatch {
            expected: pred.len(),
            actual: target.len(),
        });
    }
    let n = pred.len().max(1) as f64;
    let mut loss = 0.0;
    let gradient = pred
        .iter()
        .zip(target)
        .map(|(p, t)| {
            let e = p - t;
            if e.abs() < 1.0 {
                loss += 0.5 * e * e;
                e / n
            } else {
                loss += e.abs() - 0.5;
                e.signum() / n
            }
        })
        .collect();
    Ok(LossReport {
        loss: loss / n,
        gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_inputs() {
        let r = smooth_l1(&[1.0, -2.0], &[1.0, -2.0]).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!(r.gradient, vec![0.0, 0.0]);
    }

    #[test]
    fn quadratic_region() {
        let r = smooth_l1(&[0.5], &[0.0]).unwrap();
        assert_eq!(r.loss, 0.125);
        assert_eq!(r.gradient, vec![0.5]);
    }

    #[test]
    fn linear_region() {
        let r = smooth_l1(&[2.0], &[0.0]).unwrap();
        assert_eq!(r.loss, 1.5);
        assert_eq!(r.gradient, vec![1.0]);
    }

    #[test]
    fn continuous_at_threshold() {
        for sign in [1.0, -1.0] {
            let below = smooth_l1(&[sign * (1.0 - 1e-12)], &[0.0]).unwrap();
            let at = smooth_l1(&[sign], &[0.0]).unwrap();
            assert!((below.loss - at.loss).abs() < 1e-11);
            assert!((below.gradient[0] - sign).abs() < 1e-11);
            assert_eq!(at.gradient[0], sign);
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(smooth_l1(&[1.0], &[1.0, 2.0]).is_err());
    }
}
