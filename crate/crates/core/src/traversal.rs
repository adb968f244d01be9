//! Spherical interpolation between unit embeddings and group directions.

use rayon::prelude::*;

use crate::dataset::EmbeddingDataset;
use crate::error::{Error, Result};
use crate::geometry::{dot, norm, normalize_in_place};
use crate::group::LatentDirection;

/// Below this angle the two endpoints are treated as parallel.
pub const PARALLEL_ANGLE: f64 = 1e-6;
/// Inputs must be unit length to within this tolerance.
pub const UNIT_TOLERANCE: f64 = 1e-6;

/// `sin((1-t)θ)/sin θ · p0 + sin(tθ)/sin θ · p1` with `θ = acos(p0·p1)`,
/// re-normalized. `t` may lie outside `[0, 1]` to extrapolate along the
/// great circle. Near-parallel inputs fall back to normalized linear
/// interpolation.
pub fn slerp(p0: &[f64], p1: &[f64], t: f64) -> Result<Vec<f64>> {
    if p0.len() != p1.len() {
        return Err(Error::DimensionMismatch {
            expected: p0.len(),
            actual: p1.len(),
        });
    }
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!("strength {t} is not finite")));
    }
    for p in [p0, p1] {
        let n = norm(p);
        if (n - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "slerp endpoints must be unit vectors, got norm {n}"
            )));
        }
    }
    if t == 0.0 {
        return Ok(p0.to_vec());
    }
    if t == 1.0 {
        return Ok(p1.to_vec());
    }
    let theta = dot(p0, p1).clamp(-1.0, 1.0).acos();
    if std::f64::consts::PI - theta < PARALLEL_ANGLE {
        return Err(Error::AntipodalInputs);
    }
    let (w0, w1) = if theta < PARALLEL_ANGLE {
        (1.0 - t, t)
    } else {
        let s = theta.sin();
        (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
    };
    let mut out: Vec<f64> = p0.iter().zip(p1).map(|(a, b)| w0 * a + w1 * b).collect();
    normalize_in_place(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraversedCell {
    pub target: usize,
    pub strength: f64,
    pub embedding: Result<Vec<f64>>,
}

/// Moves every target embedding toward (or, for negative strengths, away
/// from) the unit direction. Cells are ordered target-major, then by
/// strength. A failing cell carries its error without stopping the batch.
pub fn traverse_group(
    ds: &EmbeddingDataset,
    targets: &[usize],
    direction: &LatentDirection,
    strengths: &[f64],
) -> Result<Vec<TraversedCell>> {
    if direction.dim() != ds.dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.dim(),
            actual: direction.dim(),
        });
    }
    for &i in targets {
        ds.check_index(i)?;
    }
    if let Some(t) = strengths.iter().find(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument(format!("strength {t} is not finite")));
    }
    let unit = direction.unit();
    let cells: Vec<(usize, f64)> = targets
        .iter()
        .flat_map(|&i| strengths.iter().map(move |&t| (i, t)))
        .collect();
    Ok(cells
        .par_iter()
        .map(|&(target, strength)| TraversedCell {
            target,
            strength,
            embedding: slerp(ds.row(target), &unit, strength),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project_onto;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn quarter_circle() {
        let p = slerp(&[1.0, 0.0], &[0.0, 1.0], 0.5).unwrap();
        assert!((p[0] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((p[1] - FRAC_1_SQRT_2).abs() < 1e-12);
        let q = slerp(&[1.0, 0.0], &[0.0, 1.0], -0.5).unwrap();
        assert!((q[0] - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((q[1] + FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn endpoints_exact() {
        let (a, b) = ([0.6, 0.8, 0.0], [0.0, 0.6, 0.8]);
        assert_eq!(slerp(&a, &b, 0.0).unwrap(), a.to_vec());
        assert_eq!(slerp(&a, &b, 1.0).unwrap(), b.to_vec());
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(slerp(&[1.0, 0.0], &[-1.0, 0.0], 0.3), Err(Error::AntipodalInputs));
        let same = slerp(&[1.0, 0.0], &[1.0, 0.0], 0.3).unwrap();
        assert_eq!(same, vec![1.0, 0.0]);
        assert!(slerp(&[2.0, 0.0], &[1.0, 0.0], 0.3).is_err());
        assert!(slerp(&[1.0, 0.0], &[1.0, 0.0, 0.0], 0.3).is_err());
    }

    #[test]
    fn traverse_grid() {
        let ds = EmbeddingDataset::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]], &[0, 1]).unwrap();
        let dir = LatentDirection::new(vec![0.0, 2.0, 0.0], 1, 1).unwrap();
        let cells = traverse_group(&ds, &[0, 1], &dir, &[0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(cells.len(), 8);
        assert_eq!(cells[0].embedding.as_ref().unwrap(), ds.row(0));
        assert_eq!(cells[3].embedding.as_ref().unwrap(), &vec![0.0, 1.0, 0.0]);
        let proj: Vec<f64> = cells[..3]
            .iter()
            .map(|c| project_onto(c.embedding.as_ref().unwrap(), &dir).unwrap())
            .collect();
        assert!(proj[0] < proj[1] && proj[1] < proj[2]);
        assert_eq!((cells[5].target, cells[5].strength), (1, 0.25));
    }

    #[test]
    fn per_cell_errors_do_not_abort() {
        let ds = EmbeddingDataset::from_rows(&[vec![0.0, -1.0], vec![1.0, 0.0]], &[0, 1]).unwrap();
        let dir = LatentDirection::new(vec![0.0, 1.0], 1, 1).unwrap();
        let cells = traverse_group(&ds, &[0, 1], &dir, &[0.5]).unwrap();
        assert_eq!(cells[0].embedding, Err(Error::AntipodalInputs));
        assert!(cells[1].embedding.is_ok());
        assert!(traverse_group(&ds, &[0], &dir, &[f64::NAN]).is_err());
    }
}
