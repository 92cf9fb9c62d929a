use crate::error::{Error, Result};

/// Sample Pearson correlation coefficient.
pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::SampleTooSmall { needed: 3, got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_linear_relations() {
        let xs = [1.0, 2.0, 4.0, 7.0, 11.0];
        let up: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let down: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &up).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pearson_r(&xs, &down).unwrap(), -1.0);
    }

    #[test]
    fn hand_computed_five_points() {
        // x̄ = 3, ȳ = 4; Σdxdy = 7, Σdx² = 10, Σdy² = 10 → r = 0.7.
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [2.0, 5.0, 3.0, 4.0, 6.0];
        assert!((pearson_r(&xs, &ys).unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(pearson_r(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::ZeroVariance)));
        assert!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }
}
