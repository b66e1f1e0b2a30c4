//! Flat tori inside the unit sphere `S^{2N-1}`.
//!
//! A unit vector `c` with positive entries defines the map
//!
//! ```text
//! phi_c(u) = (c_1 cos(u_1/c_1), c_1 sin(u_1/c_1), ..., c_N cos(u_N/c_N), c_N sin(u_N/c_N))
//! ```
//!
//! which is a local isometry from `R^N` onto the torus `T_c`. Its fundamental
//! domain is the box `P_c = [0, 2 pi c_1) x ... x [0, 2 pi c_N)`. Every point of
//! the sphere with no vanishing coordinate pair lies on exactly one such torus.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Tolerance on `||c|| = 1` accepted by [`TorusSpec::new`].
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// Pair radius below which a received point is treated as degenerate.
pub const DEGENERATE_RADIUS: f64 = 1e-12;

/// A flat torus `T_c`, given by a unit vector with strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpec {
    c: Vec<f64>,
    c_min: f64,
}

impl TorusSpec {
    /// Validates `c` as is: at least two entries, all positive, unit norm.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::InvalidTorus(format!(
                "need at least 2 coordinates, got {}",
                c.len()
            )));
        }
        if let Some(bad) = c.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidTorus(format!(
                "coordinates must be finite and strictly positive, found {bad}"
            )));
        }
        let norm = norm(&c);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidTorus(format!("norm is {norm}, expected 1")));
        }
        let c_min = c.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { c, c_min })
    }

    /// Scales an arbitrary positive direction onto the unit sphere.
    pub fn from_direction(direction: &[f64]) -> Result<Self> {
        let n = norm(direction);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidTorus("zero or non-finite direction".into()));
        }
        Self::new(direction.iter().map(|x| x / n).collect())
    }

    /// The maximum-volume torus `c = (1, ..., 1) / sqrt(N)`.
    pub fn centered(n: usize) -> Result<Self> {
        Self::from_direction(&vec![1.0; n])
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.c
    }

    /// `c_xi = min_i c_i`.
    pub fn c_min(&self) -> f64 {
        self.c_min
    }

    /// Side lengths `2 pi c_i` of the fundamental box `P_c`.
    pub fn box_periods(&self) -> Vec<f64> {
        self.c.iter().map(|ci| TAU * ci).collect()
    }

    /// Reduces flat coordinates into the fundamental box.
    pub fn reduce(&self, u: &[f64]) -> TorusCoordinates {
        TorusCoordinates(
            u.iter()
                .zip(&self.c)
                .map(|(&ui, &ci)| wrap(ui, TAU * ci))
                .collect(),
        )
    }
}

/// A point of the channel space `R^{2N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientPoint(pub Vec<f64>);

impl AmbientPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn distance(&self, other: &AmbientPoint) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.0.iter_mut().for_each(|x| *x *= factor);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

/// Flat coordinates reduced into `P_c`: `0 <= u_i < 2 pi c_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusCoordinates(Vec<f64>);

impl TorusCoordinates {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Evaluates `phi_c(u)`.
pub fn phi(c: &TorusSpec, u: &[f64]) -> AmbientPoint {
    debug_assert_eq!(c.dim(), u.len());
    let mut y = Vec::with_capacity(2 * u.len());
    for (&ci, &ui) in c.coords().iter().zip(u) {
        let (s, co) = (ui / ci).sin_cos();
        y.push(ci * co);
        y.push(ci * s);
    }
    AmbientPoint(y)
}

/// Splits a received point into pair radii `gamma` and arc-length coordinates
/// `theta`, with `theta_i = gamma_i * angle_i` and `angle_i` in `[0, 2 pi)`.
///
/// The angle uses `atan2`, so the lower half of each circle is recovered too.
pub fn invert_phi(y: &AmbientPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let (gamma, angles) = polar_pairs(y)?;
    let theta = gamma.iter().zip(&angles).map(|(g, a)| g * a).collect();
    Ok((gamma, theta))
}

/// Pair radii and angles in `[0, 2 pi)` of a point of `R^{2N}`.
pub(crate) fn polar_pairs(y: &AmbientPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    if !y.dim().is_multiple_of(2) || y.dim() == 0 {
        return Err(Error::InvalidArgument(format!(
            "ambient dimension {} is not a positive even number",
            y.dim()
        )));
    }
    let n = y.dim() / 2;
    let mut gamma = Vec::with_capacity(n);
    let mut angles = Vec::with_capacity(n);
    for (pair, xy) in y.0.chunks_exact(2).enumerate() {
        let radius = xy[0].hypot(xy[1]);
        if !(radius >= DEGENERATE_RADIUS) {
            return Err(Error::DegeneratePoint { pair, radius });
        }
        gamma.push(radius);
        angles.push(wrap(xy[1].atan2(xy[0]), TAU));
    }
    Ok((gamma, angles))
}

/// Minimum distance between the tori `T_c` and `T_b`: `||c - b||`.
pub fn torus_distance(c: &TorusSpec, b: &TorusSpec) -> f64 {
    distance(c.coords(), b.coords())
}

/// Chordal distance between `phi_c(u)` and `phi_c(v)`, evaluated without
/// forming the two points.
pub fn same_torus_distance(c: &TorusSpec, u: &[f64], v: &[f64]) -> f64 {
    let s: f64 = c
        .coords()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&ci, (&ui, &vi))| {
            let h = ci * ((ui - vi) / (2.0 * ci)).sin();
            h * h
        })
        .sum();
    2.0 * s.sqrt()
}

/// Flat distance between `u` and `v` on the torus: the minimum of `||u - v + k||`
/// over all period shifts `k` of the box.
pub fn flat_distance(c: &TorusSpec, u: &[f64], v: &[f64]) -> f64 {
    c.coords()
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&ci, (&ui, &vi))| {
            let period = TAU * ci;
            let d = wrap(ui - vi, period);
            let d = d.min(period - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Bounds on the chordal distance between two points of `T_c` at flat distance
/// `delta_flat`: `(2 c_xi sin(delta/(2 c_xi)), 2 sin(delta/2))`.
///
/// The lower bound holds whenever `delta_flat` is the wrap-aware flat distance.
pub fn chordal_bounds(delta_flat: f64, c: &TorusSpec) -> (f64, f64) {
    let cx = c.c_min();
    let lower = delta_flat * sinc(delta_flat / (2.0 * cx));
    let upper = delta_flat * sinc(delta_flat / 2.0);
    (lower, upper)
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to `period` itself for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn torus(c: &[f64]) -> TorusSpec {
        TorusSpec::new(c.to_vec()).unwrap()
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(TorusSpec::new(vec![1.0, 0.0]).is_err());
        assert!(TorusSpec::new(vec![0.6, 0.7]).is_err());
        assert!(TorusSpec::new(vec![1.0]).is_err());
        assert!(TorusSpec::new(vec![-0.6, 0.8]).is_err());
        assert!(TorusSpec::new(vec![0.6, 0.8]).is_ok());
    }

    #[test]
    fn c_min_is_smallest_entry() {
        let c = TorusSpec::from_direction(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.c_min(), c.coords()[1]);
    }

    #[test]
    fn phi_examples() {
        let c = torus(&[0.6, 0.8]);
        let y = phi(&c, &[0.0, 0.0]);
        assert_eq!(y.0, vec![0.6, 0.0, 0.8, 0.0]);

        let y = phi(&c, &[TAU * 0.6, 0.0]);
        for (a, b) in y.0.iter().zip([0.6, 0.0, 0.8, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = torus(&[h, h]);
        let y = phi(&c, &[PI * h / 2.0, 0.0]);
        for (a, b) in y.0.iter().zip([0.0, h, h, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn invert_phi_examples() {
        let (g, t) = invert_phi(&AmbientPoint(vec![0.6, 0.0, 0.8, 0.0])).unwrap();
        assert_eq!(g, vec![0.6, 0.8]);
        assert_eq!(t, vec![0.0, 0.0]);

        let (g, t) = invert_phi(&AmbientPoint(vec![0.0, 0.6, 0.8, 0.0])).unwrap();
        assert_abs_diff_eq!(g[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(t[0], 0.6 * PI / 2.0, epsilon = 1e-15);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn invert_phi_recovers_lower_half_circle() {
        let c = torus(&[0.6, 0.8]);
        let u = [0.6 * 1.5 * PI, 0.8 * 1.25 * PI];
        let (g, t) = invert_phi(&phi(&c, &u)).unwrap();
        assert_abs_diff_eq!(g[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(t[0], u[0], epsilon = 1e-12);
        assert_abs_diff_eq!(t[1], u[1], epsilon = 1e-12);
    }

    #[test]
    fn invert_phi_degenerate() {
        let err = invert_phi(&AmbientPoint(vec![0.0, 0.0, 1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::DegeneratePoint { pair: 0, .. }));
    }

    #[test]
    fn torus_distance_examples() {
        let c = torus(&[0.6, 0.8]);
        let b = torus(&[0.8, 0.6]);
        assert_abs_diff_eq!(torus_distance(&c, &b), 0.08f64.sqrt(), epsilon = 1e-15);
        assert_eq!(torus_distance(&c, &c), 0.0);
    }

    #[test]
    fn same_torus_distance_examples() {
        let c = torus(&[0.6, 0.8]);
        assert_eq!(same_torus_distance(&c, &[0.3, 1.0], &[0.3, 1.0]), 0.0);
        assert_abs_diff_eq!(
            same_torus_distance(&c, &[PI * 0.6, 0.0], &[0.0, 0.0]),
            1.2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn chordal_bounds_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = torus(&[h, h]);
        assert_eq!(chordal_bounds(0.0, &c), (0.0, 0.0));
        let (lo, hi) = chordal_bounds(PI / 2.0, &c);
        // 2 c_xi sin(delta / (2 c_xi)) with c_xi = 1/sqrt(2)
        assert_abs_diff_eq!(lo, 1.267_162_131_330_799, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, std::f64::consts::SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn flat_distance_wraps() {
        let c = torus(&[0.6, 0.8]);
        let p = TAU * 0.6;
        assert_abs_diff_eq!(flat_distance(&c, &[0.01, 0.0], &[p - 0.01, 0.0]), 0.02, epsilon = 1e-12);
    }

    #[test]
    fn reduce_into_box() {
        let c = torus(&[0.6, 0.8]);
        let r = c.reduce(&[-0.1, TAU * 0.8 + 0.2]);
        assert_abs_diff_eq!(r.as_slice()[0], TAU * 0.6 - 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(r.as_slice()[1], 0.2, epsilon = 1e-12);
    }
}
