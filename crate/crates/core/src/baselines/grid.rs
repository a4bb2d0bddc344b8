use rayon::prelude::*;

use super::eval;
use crate::error::{Error, Result};
use crate::model::Bounds;
use crate::numerics::Vector;

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub index: usize,
    pub point: Vector,
    pub value: f64,
    /// Points where `f` failed or was non-finite.
    pub failures: usize,
    pub evaluated: usize,
}

/// Exhaustive minimum over `grid`; ties go to the lowest index.
pub fn grid_search<F>(f: F, grid: &[Vector]) -> Result<GridResult>
where
    F: Fn(&Vector) -> Result<f64> + Sync,
{
    if grid.is_empty() {
        return Err(Error::invalid("grid is empty"));
    }
    let values: Vec<Option<f64>> = grid.par_iter().map(|t| eval(&f, t).ok()).collect();
    let failures = values.iter().filter(|v| v.is_none()).count();
    let (index, value) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((i, v)),
        })
        .ok_or(Error::AllFailed { attempted: grid.len() })?;
    Ok(GridResult {
        index,
        point: grid[index].clone(),
        value,
        failures,
        evaluated: grid.len(),
    })
}

/// Cartesian grid with `per_axis` equally spaced nodes per coordinate,
/// endpoints included, first coordinate varying slowest.
pub fn uniform_grid(bounds: &Bounds, per_axis: usize) -> Result<Vec<Vector>> {
    if per_axis < 2 {
        return Err(Error::invalid("need at least 2 nodes per axis"));
    }
    if !bounds.is_finite() {
        return Err(Error::invalid("grid needs finite bounds"));
    }
    let d = bounds.dim();
    let total = per_axis
        .checked_pow(d as u32)
        .ok_or_else(|| Error::invalid("grid too large"))?;
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let (lo, hi) = (bounds.lower()[j], bounds.upper()[j]);
            (0..per_axis)
                .map(|i| lo + (hi - lo) * i as f64 / (per_axis - 1) as f64)
                .collect()
        })
        .collect();
    Ok((0..total)
        .map(|mut flat| {
            let mut t = Vector::zeros(d);
            for j in (0..d).rev() {
                t[j] = axes[j][flat % per_axis];
                flat /= per_axis;
            }
            t
        })
        .collect())
}

/// Grid search on `bounds`, then `rounds` further searches on the box of one
/// grid spacing around the current best, clipped to `bounds`.
pub fn refined_grid_search<F>(f: F, bounds: &Bounds, per_axis: usize, rounds: usize) -> Result<GridResult>
where
    F: Fn(&Vector) -> Result<f64> + Sync,
{
    let mut current = bounds.clone();
    let mut best = grid_search(&f, &uniform_grid(&current, per_axis)?)?;
    for _ in 0..rounds {
        let spacing = (current.upper() - current.lower()) / (per_axis - 1) as f64;
        let lo = (&best.point - &spacing).zip_map(bounds.lower(), f64::max);
        let hi = (&best.point + &spacing).zip_map(bounds.upper(), f64::min);
        current = Bounds::new(lo, hi)?;
        let next = grid_search(&f, &uniform_grid(&current, per_axis)?)?;
        if next.value <= best.value {
            best = GridResult {
                failures: best.failures + next.failures,
                evaluated: best.evaluated + next.evaluated,
                ..next
            };
        }
    }
    Ok(best)
}

/// Lower bound `(eps / lipschitz)^(-p)` on the number of grid points needed to
/// guarantee an objective error of `eps` over the unit ball in `R^p`.
pub fn required_grid_points(p: usize, eps: f64, lipschitz: f64) -> Result<f64> {
    if p == 0 || !(eps > 0.0) || !(lipschitz > 0.0) {
        return Err(Error::invalid("need p >= 1, eps > 0 and lipschitz > 0"));
    }
    Ok((eps / lipschitz).powi(-(p as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(xs: &[f64]) -> Vec<Vector> {
        xs.iter().map(|&x| Vector::from_element(1, x)).collect()
    }

    #[test]
    fn square_on_three_points() {
        let r = grid_search(|t| Ok(t[0] * t[0]), &pts(&[-1.0, 0.0, 1.0])).unwrap();
        assert_eq!(r.index, 1);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let r = grid_search(|t| Ok(t[0].abs()), &pts(&[2.0, -1.0, 1.0, -1.0])).unwrap();
        assert_eq!(r.index, 1);
    }

    #[test]
    fn failures_counted() {
        let f = |t: &Vector| {
            if t[0] > 0.5 {
                Err(Error::Domain("outside".into()))
            } else {
                Ok(-t[0])
            }
        };
        let r = grid_search(f, &pts(&[0.0, 0.4, 0.6, 0.9])).unwrap();
        assert_eq!((r.index, r.failures), (1, 2));
        assert!(matches!(
            grid_search(|_| Ok(f64::NAN), &pts(&[0.0])),
            Err(Error::AllFailed { attempted: 1 })
        ));
        assert!(grid_search(|_| Ok(0.0), &[]).is_err());
    }

    #[test]
    fn required_points_example() {
        assert_eq!(required_grid_points(3, 1e-2, 1.0).unwrap().round(), 1e6);
    }

    #[test]
    fn uniform_grid_layout() {
        let b = Bounds::from_slices(&[0.0, -1.0], &[1.0, 1.0]).unwrap();
        let g = uniform_grid(&b, 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[1].as_slice(), &[0.0, 0.0]);
        assert_eq!(g[3].as_slice(), &[0.5, -1.0]);
        assert_eq!(g[8].as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn refinement_sharpens() {
        let b = Bounds::from_slices(&[-1.0], &[1.0]).unwrap();
        let f = |t: &Vector| Ok((t[0] - 0.123456).powi(2));
        let r = refined_grid_search(f, &b, 101, 3).unwrap();
        assert!((r.point[0] - 0.123456).abs() < 1e-6);
    }
}
