//! Sobol points with a single random shift, mapped to a parameter box.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Bounds;
use crate::numerics::Vector;

/// Highest supported dimension.
pub const MAX_SOBOL_DIM: usize = 16;

const BITS: usize = 32;

/// Joe-Kuo primitive polynomials `(degree, a)` and initial direction numbers
/// for dimensions 2..=16.
const JOE_KUO: [(u32, u32, &[u32]); MAX_SOBOL_DIM - 1] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
    (5, 4, &[1, 1, 5, 5, 5]),
    (5, 7, &[1, 1, 7, 11, 19]),
    (5, 11, &[1, 1, 5, 1, 1]),
    (5, 13, &[1, 1, 1, 3, 11]),
    (5, 14, &[1, 3, 5, 5, 31]),
    (6, 1, &[1, 3, 3, 9, 7, 49]),
    (6, 13, &[1, 1, 1, 15, 21, 21]),
    (6, 16, &[1, 3, 1, 13, 27, 49]),
];

/// Points in `[0,1)^dim`, optionally shifted.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<f64>>,
    shift: Option<Vec<f64>>,
    seed: Option<u64>,
}

impl PointSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn shift(&self) -> Option<&[f64]> {
        self.shift.as_deref()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }
}

fn direction_numbers(dim_index: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim_index == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (s, a, m) = JOE_KUO[dim_index - 1];
    let s = s as usize;
    for k in 0..s {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

/// The first `n` Sobol points, starting from index 1 (all coordinates 0.5).
pub fn sobol(dim: usize, n: usize) -> Result<PointSet> {
    if dim == 0 || dim > MAX_SOBOL_DIM {
        return Err(Error::invalid(format!(
            "Sobol dimension must be in 1..={MAX_SOBOL_DIM}, got {dim}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("number of points must be at least 1"));
    }
    if n as u64 >= 1u64 << BITS {
        return Err(Error::invalid("too many Sobol points for 32-bit direction numbers"));
    }
    let dirs: Vec<[u32; BITS]> = (0..dim).map(direction_numbers).collect();
    let scale = 1.0 / (1u64 << BITS) as f64;
    let mut state = vec![0u32; dim];
    let mut points = Vec::with_capacity(n);
    for i in 0..n as u32 {
        let c = i.trailing_ones() as usize;
        for (x, v) in state.iter_mut().zip(dirs.iter()) {
            *x ^= v[c];
        }
        points.push(state.iter().map(|&x| x as f64 * scale).collect());
    }
    Ok(PointSet {
        dim,
        points,
        shift: None,
        seed: None,
    })
}

fn wrap(x: f64) -> f64 {
    let y = x - x.floor();
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Applies `(s + u) mod 1` with a given shift vector.
pub fn shift_by(ps: &PointSet, u: &[f64]) -> Result<PointSet> {
    if u.len() != ps.dim {
        return Err(Error::invalid("shift has the wrong dimension"));
    }
    if u.iter().any(|x| !(0.0..1.0).contains(x)) {
        return Err(Error::invalid("shift coordinates must lie in [0, 1)"));
    }
    let points = ps
        .points
        .iter()
        .map(|p| p.iter().zip(u).map(|(s, u)| wrap(s + u)).collect())
        .collect();
    Ok(PointSet {
        dim: ps.dim,
        points,
        shift: Some(u.to_vec()),
        seed: ps.seed,
    })
}

/// Draws one `u ~ U[0,1)^dim` from a seeded ChaCha8 stream and shifts by it.
///
/// `u` is a multiple of `2^-52`, so shifted 32-bit Sobol coordinates and their
/// mod-1 differences are computed without rounding.
pub fn random_shift(ps: &PointSet, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: Vec<f64> = (0..ps.dim)
        .map(|_| (rng.next_u64() >> 12) as f64 * f64::EPSILON)
        .collect();
    let mut out = shift_by(ps, &u).expect("generated shift lies in [0, 1)");
    out.seed = Some(seed);
    out
}

/// Affine image `lower + s (upper - lower)` of each point.
pub fn map_to_box(ps: &PointSet, lower: &Vector, upper: &Vector) -> Result<Vec<Vector>> {
    if lower.len() != ps.dim || upper.len() != ps.dim {
        return Err(Error::invalid("box dimension does not match the point set"));
    }
    if lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::invalid("box bounds must be finite with lower < upper"));
    }
    Ok(ps
        .points
        .iter()
        .map(|p| {
            Vector::from_iterator(
                ps.dim,
                p.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(s, (l, u))| (l + s * (u - l)).clamp(*l, *u)),
            )
        })
        .collect())
}

/// Shifted Sobol candidates covering `bounds`.
pub fn box_candidates(bounds: &Bounds, n: usize, seed: u64) -> Result<Vec<Vector>> {
    let ps = random_shift(&sobol(bounds.dim(), n)?, seed);
    map_to_box(&ps, bounds.lower(), bounds.upper())
}
