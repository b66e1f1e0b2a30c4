//! Projections of the rectangular lattice `c_1 Z + ... + c_N Z` along a winding
//! direction `u_hat = (u_1 c_1, ..., u_N c_N)`.
//!
//! The lines `{u_hat x + n C : x in R}` traced by a curve on `T_c` are spaced by
//! the shortest nonzero vector `r_c(u)` of the projected lattice
//! `P(Lambda_c)` onto the hyperplane orthogonal to `u_hat`. This module computes
//! that minimum two ways (a direct box search over integer vectors and a
//! sphere enumeration over a basis of the projection), the packing density it
//! implies, and the scaled lifting construction that produces windings whose
//! projections approach a chosen target lattice.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{norm, TorusSpec};

/// Positive generator diagonal of `Lambda_c = c_1 Z + ... + c_N Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectLattice {
    c: Vec<f64>,
}

impl RectLattice {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::InvalidArgument("lattice needs at least 2 dimensions".into()));
        }
        if c.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "lattice scales must be positive, got {c:?}"
            )));
        }
        Ok(Self { c })
    }

    /// The all-ones lattice `Z^N`.
    pub fn integer(n: usize) -> Self {
        Self { c: vec![1.0; n] }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn scales(&self) -> &[f64] {
        &self.c
    }

    fn det(&self) -> f64 {
        self.c.iter().product()
    }
}

impl From<&TorusSpec> for RectLattice {
    fn from(t: &TorusSpec) -> Self {
        Self {
            c: t.coords().to_vec(),
        }
    }
}

/// Primitive integer winding vector: nonzero with `gcd(u_1, ..., u_N) = 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WindingVector {
    u: Vec<i64>,
}

impl WindingVector {
    /// Accepts `u` only if it is already primitive.
    pub fn new(u: Vec<i64>) -> Result<Self> {
        let g = gcd_all(&u);
        if g == 0 {
            return Err(Error::InvalidArgument("winding vector is zero".into()));
        }
        if g != 1 {
            return Err(Error::InvalidArgument(format!(
                "winding vector {u:?} has gcd {g}"
            )));
        }
        if u.len() < 2 {
            return Err(Error::InvalidArgument("winding needs at least 2 entries".into()));
        }
        Ok(Self { u })
    }

    /// Divides out the gcd and makes the first nonzero entry positive.
    pub fn canonical(mut u: Vec<i64>) -> Result<Self> {
        let g = gcd_all(&u);
        if g == 0 {
            return Err(Error::InvalidArgument("winding vector is zero".into()));
        }
        let sign = u.iter().find(|&&x| x != 0).map_or(1, |x| x.signum());
        u.iter_mut().for_each(|x| *x = *x / g * sign);
        Self::new(u)
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn l1_norm(&self) -> i64 {
        self.u.iter().map(|x| x.abs()).sum()
    }

    /// `u_hat = u C`.
    pub fn u_hat(&self, scales: &[f64]) -> Vec<f64> {
        self.u.iter().zip(scales).map(|(&u, &c)| u as f64 * c).collect()
    }

    /// Reorders entries: position `i` of the result holds `u[order[i]]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            u: order.iter().map(|&i| self.u[i]).collect(),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_all(u: &[i64]) -> i64 {
    u.iter().fold(0, |g, &x| gcd(g, x))
}

/// Orthogonal projection of `n_hat` onto the hyperplane orthogonal to `u_hat`.
pub fn project_off(u_hat: &[f64], n_hat: &[f64]) -> Vec<f64> {
    let uu: f64 = u_hat.iter().map(|x| x * x).sum();
    let nu: f64 = u_hat.iter().zip(n_hat).map(|(a, b)| a * b).sum();
    let k = nu / uu;
    n_hat.iter().zip(u_hat).map(|(n, u)| n - k * u).collect()
}

/// Shortest projected lattice vector with an integer preimage `witness`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestProjection {
    pub r: f64,
    pub witness: Vec<i64>,
    /// False when the search box was smaller than the certified bound, in which
    /// case `r` is only an upper bound.
    pub certified: bool,
}

fn parallel(n: &[i64], u: &[i64]) -> bool {
    for i in 0..n.len() {
        for j in i + 1..n.len() {
            if n[i] as i128 * u[j] as i128 != n[j] as i128 * u[i] as i128 {
                return false;
            }
        }
    }
    true
}

fn projected_norm(scales: &[f64], u_hat: &[f64], n: &[i64]) -> f64 {
    let n_hat: Vec<f64> = n.iter().zip(scales).map(|(&k, &c)| k as f64 * c).collect();
    norm(&project_off(u_hat, &n_hat))
}

/// Per-coordinate bound on a preimage of any projected vector of length at
/// most `r_upper`: `|n_i| <= r_upper / c_i + |u_i| / 2`.
///
/// Every projected vector has a preimage `n C = p + x u_hat` with `|x| <= 1/2`,
/// which gives the bound coordinate by coordinate.
pub fn certified_box(lat: &RectLattice, u: &WindingVector, r_upper: f64) -> Vec<i64> {
    lat.scales()
        .iter()
        .zip(u.as_slice())
        .map(|(&c, &ui)| (r_upper / c + ui.abs() as f64 / 2.0).floor() as i64)
        .collect()
}

/// Exhaustive search over `|n_i| <= search_radius`, skipping multiples of `u`.
pub fn shortest_projection(
    lat: &RectLattice,
    u: &WindingVector,
    search_radius: i64,
) -> Result<ShortestProjection> {
    if search_radius < 1 {
        return Err(Error::RadiusTooSmall(search_radius));
    }
    let radii = vec![search_radius; lat.dim()];
    let found = box_search(lat, u, &radii).ok_or(Error::RadiusTooSmall(search_radius))?;
    let needed = certified_box(lat, u, found.0);
    Ok(ShortestProjection {
        r: found.0,
        certified: needed.iter().all(|&b| b <= search_radius),
        witness: found.1,
    })
}

/// Exhaustive search over the box `|n_i| <= radii[i]`.
pub fn shortest_projection_in_box(
    lat: &RectLattice,
    u: &WindingVector,
    radii: &[i64],
) -> Result<ShortestProjection> {
    check_dims(lat, u)?;
    let found = box_search(lat, u, radii).ok_or(Error::RadiusTooSmall(0))?;
    let needed = certified_box(lat, u, found.0);
    Ok(ShortestProjection {
        r: found.0,
        certified: needed.iter().zip(radii).all(|(n, r)| n <= r),
        witness: found.1,
    })
}

fn box_search(lat: &RectLattice, u: &WindingVector, radii: &[i64]) -> Option<(f64, Vec<i64>)> {
    let u_hat = u.u_hat(lat.scales());
    let mut n: Vec<i64> = radii.iter().map(|r| -r).collect();
    let mut best: Option<(f64, Vec<i64>)> = None;
    loop {
        if !parallel(&n, u.as_slice()) {
            let len = projected_norm(lat.scales(), &u_hat, &n);
            if best.as_ref().is_none_or(|(b, _)| len < *b) {
                best = Some((len, n.clone()));
            }
        }
        // odometer increment, last coordinate fastest
        let mut i = n.len();
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if n[i] < radii[i] {
                n[i] += 1;
                break;
            }
            n[i] = -radii[i];
        }
    }
}

fn check_dims(lat: &RectLattice, u: &WindingVector) -> Result<()> {
    if lat.dim() != u.dim() {
        return Err(Error::InvalidArgument(format!(
            "lattice has dimension {}, winding has {}",
            lat.dim(),
            u.dim()
        )));
    }
    Ok(())
}

/// Bases of the projection `P(Lambda_c)` onto `u_hat^perp` and of its dual.
///
/// The dual of the projection is `Lambda_c^* ∩ u_hat^perp`, i.e. the vectors
/// `(m_1 / c_1, ..., m_N / c_N)` with integer `m` orthogonal to `u`. When some
/// `|u_p| = 1` the kernel basis is `e_j - u_j u_p e_p`, which is the familiar
/// `(-u_j, ..., 1/c_j, ...)` form after moving `p` to the front and scaling
/// `c_p = 1`. Otherwise a unimodular completion of `u` is used.
#[derive(Debug, Clone)]
pub struct ProjectedBasis {
    /// `(N-1) x N` generator of the dual lattice, rows orthogonal to `u_hat`.
    pub dual: DMatrix<f64>,
    /// `(N-1) x N` generator of the projection, with `primal * dual^T = I`.
    pub primal: DMatrix<f64>,
    /// Integer preimage `w_j` of each primal row: `primal_j = P(w_j C)`.
    pub preimages: Vec<Vec<i64>>,
    /// Integer kernel vectors `m_j` with `m_j . u = 0`, one per dual row.
    pub kernel: Vec<Vec<i64>>,
    /// Gram matrix `primal * primal^T`.
    pub gram: DMatrix<f64>,
    u: WindingVector,
    scales: Vec<f64>,
}

/// Builds the projected dual basis and the matching primal basis.
pub fn projected_dual_basis(lat: &RectLattice, u: &WindingVector) -> Result<ProjectedBasis> {
    check_dims(lat, u)?;
    let n = lat.dim();
    let (kernel, preimages) = unimodular_completion(u.as_slice())?;
    let scales = lat.scales();
    let u_hat = u.u_hat(scales);

    let dual = DMatrix::from_fn(n - 1, n, |j, i| kernel[j][i] as f64 / scales[i]);
    let mut primal = DMatrix::zeros(n - 1, n);
    for (j, w) in preimages.iter().enumerate() {
        let w_hat: Vec<f64> = w.iter().zip(scales).map(|(&k, &c)| k as f64 * c).collect();
        for (i, v) in project_off(&u_hat, &w_hat).into_iter().enumerate() {
            primal[(j, i)] = v;
        }
    }
    let gram = &primal * primal.transpose();
    Ok(ProjectedBasis {
        dual,
        primal,
        preimages,
        kernel,
        gram,
        u: u.clone(),
        scales: scales.to_vec(),
    })
}

/// Kernel vectors `m_j` of `u` and preimages `w_j`, `N-1` of each, with
/// `w_j . m_k = delta_jk`; the `w_j` together with `u` form a basis of `Z^N`.
type Completion = (Vec<Vec<i64>>, Vec<Vec<i64>>);

/// Completes the primitive vector `u` to a unimodular basis, see [`Completion`].
fn unimodular_completion(u: &[i64]) -> Result<Completion> {
    let n = u.len();
    // `cols` holds U column-wise, `rows` holds W = U^{-1} row-wise; a = u U.
    let mut cols: Vec<Vec<i64>> = (0..n).map(|j| unit(n, j)).collect();
    let mut rows: Vec<Vec<i64>> = (0..n).map(|j| unit(n, j)).collect();
    let mut a = u.to_vec();
    let overflow = || Error::InvalidArgument(format!("winding {u:?} overflows i64 arithmetic"));
    let pivot = loop {
        let p = (0..n)
            .filter(|&i| a[i] != 0)
            .min_by_key(|&i| a[i].abs())
            .ok_or_else(|| Error::InvalidArgument("winding vector is zero".into()))?;
        if (0..n).all(|j| j == p || a[j] == 0) {
            break p;
        }
        for j in 0..n {
            if j == p || a[j] == 0 {
                continue;
            }
            let q = a[j] / a[p];
            a[j] -= q * a[p];
            for i in 0..n {
                cols[j][i] = cols[j][i]
                    .checked_sub(q.checked_mul(cols[p][i]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
                rows[p][i] = rows[p][i]
                    .checked_add(q.checked_mul(rows[j][i]).ok_or_else(overflow)?)
                    .ok_or_else(overflow)?;
            }
        }
    };
    if a[pivot].abs() != 1 {
        return Err(Error::InvalidArgument(format!("winding {u:?} is not primitive")));
    }
    if a[pivot] < 0 {
        cols[pivot].iter_mut().for_each(|x| *x = -*x);
        rows[pivot].iter_mut().for_each(|x| *x = -*x);
    }
    let kernel = (0..n).filter(|&j| j != pivot).map(|j| cols[j].clone()).collect();
    let preimages = (0..n).filter(|&j| j != pivot).map(|j| rows[j].clone()).collect();
    Ok((kernel, preimages))
}

fn unit(n: usize, j: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    e[j] = 1;
    e
}

impl ProjectedBasis {
    pub fn rank(&self) -> usize {
        self.primal.nrows()
    }

    /// Integer preimage `sum_j k_j w_j` of the primal combination `k`.
    pub fn preimage(&self, coeffs: &[i64]) -> Vec<i64> {
        let n = self.scales.len();
        let mut out = vec![0i64; n];
        for (k, w) in coeffs.iter().zip(&self.preimages) {
            for i in 0..n {
                out[i] += k * w[i];
            }
        }
        out
    }

    /// Shortest nonzero vector of the projection by sphere enumeration on the
    /// Cholesky factor of the Gram matrix. The search radius starts at the
    /// shortest basis vector, so the result is exact.
    pub fn shortest_vector(&self) -> (f64, Vec<i64>) {
        let d = self.rank();
        let (mut best_sq, start) = (0..d)
            .map(|j| (self.gram[(j, j)], j))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("rank is at least 1");
        let mut best = vec![0i64; d];
        best[start] = 1;

        let chol = self
            .gram
            .clone()
            .cholesky()
            .expect("Gram matrix of a basis is positive definite");
        // upper factor R with gram = R^T R
        let r = chol.l().transpose();
        let diag: Vec<f64> = (0..d).map(|i| r[(i, i)] * r[(i, i)]).collect();
        let mu = DMatrix::from_fn(d, d, |i, j| if j > i { r[(i, j)] / r[(i, i)] } else { 0.0 });

        let mut k = vec![0i64; d];
        enumerate_level(d - 1, 0.0, &diag, &mu, &mut k, &mut best_sq, &mut best);
        (best_sq.sqrt(), best)
    }

    /// Projection minimum with an integer witness reduced along `u`.
    pub fn shortest_projection(&self) -> ShortestProjection {
        let (r, coeffs) = self.shortest_vector();
        let mut witness = self.preimage(&coeffs);
        let u_hat = self.u.u_hat(&self.scales);
        let uu: f64 = u_hat.iter().map(|x| x * x).sum();
        let x: f64 = witness
            .iter()
            .zip(&self.scales)
            .zip(&u_hat)
            .map(|((&k, &c), &uh)| k as f64 * c * uh)
            .sum::<f64>()
            / uu;
        let shift = x.round() as i64;
        for (w, &ui) in witness.iter_mut().zip(self.u.as_slice()) {
            *w -= shift * ui;
        }
        ShortestProjection {
            r,
            witness,
            certified: true,
        }
    }
}

// Slack so that a vector of the same length as the incumbent is not pruned by
// rounding before the strict comparison decides.
const ENUM_SLACK: f64 = 1e-12;

fn enumerate_level(
    level: usize,
    partial: f64,
    diag: &[f64],
    mu: &DMatrix<f64>,
    k: &mut [i64],
    best_sq: &mut f64,
    best: &mut Vec<i64>,
) {
    let d = k.len();
    let center: f64 = -(level + 1..d).map(|j| mu[(level, j)] * k[j] as f64).sum::<f64>();
    let room = *best_sq * (1.0 + ENUM_SLACK) - partial;
    if room < 0.0 {
        return;
    }
    let half = (room / diag[level]).sqrt();
    let lo = (center - half).ceil() as i64;
    let hi = (center + half).floor() as i64;
    for v in lo..=hi {
        k[level] = v;
        let t = v as f64 - center;
        let next = partial + diag[level] * t * t;
        if next > *best_sq * (1.0 + ENUM_SLACK) {
            continue;
        }
        if level == 0 {
            if k.iter().any(|&x| x != 0) && next < *best_sq {
                *best_sq = next;
                best.copy_from_slice(k);
            }
        } else {
            enumerate_level(level - 1, next, diag, mu, k, best_sq, best);
        }
    }
    k[level] = 0;
}

/// Exact `r_c(u)` through the projected basis.
pub fn projection_minimum(lat: &RectLattice, u: &WindingVector) -> Result<ShortestProjection> {
    Ok(projected_dual_basis(lat, u)?.shortest_projection())
}

/// Volume of the unit ball in `R^k`.
pub fn unit_ball_volume(k: usize) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * PI / k as f64,
    }
}

/// Packing density of `P(Lambda_c)` with minimum `r`:
/// `V_{N-1} (r/2)^{N-1} ||u_hat|| / prod c_i`.
pub fn packing_density(lat: &RectLattice, u: &WindingVector, r: f64) -> f64 {
    let k = lat.dim() - 1;
    let u_norm = norm(&u.u_hat(lat.scales()));
    unit_ball_volume(k) * (r / 2.0).powi(k as i32) * u_norm / lat.det()
}

/// Density of the densest lattice packing in dimensions 1 through 4.
pub fn best_lattice_density(dim: usize) -> Result<f64> {
    use std::f64::consts::PI;
    match dim {
        1 => Ok(1.0),
        2 => Ok(PI / 12f64.sqrt()),
        3 => Ok(PI / 18f64.sqrt()),
        4 => Ok(PI * PI / 16.0),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Checks the projection density against the best lattice in dimension `N-1`.
pub fn within_density_bound(lat: &RectLattice, u: &WindingVector, r: f64) -> Result<bool> {
    let bound = best_lattice_density(lat.dim() - 1)?;
    Ok(packing_density(lat, u, r) <= bound + 1e-9)
}

/// A generator of the hexagonal lattice's dual (itself hexagonal) at the scale
/// that reproduces the closed-form hexagonal sequence:
/// `[[2, 0], [1, sqrt(3)]]`.
pub fn hexagonal_target() -> Vec<Vec<f64>> {
    vec![vec![2.0, 0.0], vec![1.0, 3f64.sqrt()]]
}

/// The scaled lifting matrix `L_w^*` for a lower-triangular dual target.
#[derive(Debug, Clone)]
pub struct Lifting {
    /// Integer numerators `m_ij`; the real matrix entry is `m_ij / c_j` with
    /// `c` rescaled so that `c_1 = 1`.
    pub numerators: Vec<Vec<i64>>,
    pub winding: WindingVector,
    scales: Vec<f64>,
    w: i64,
}

impl Lifting {
    /// Builds `L_w^*` for `target` (an `(N-1) x (N-1)` lower-triangular dual
    /// generator) over `lat`, and solves for the winding it is dual to.
    pub fn new(target: &[Vec<f64>], lat: &RectLattice, w: i64) -> Result<Self> {
        let n = lat.dim();
        if target.len() != n - 1 || target.iter().any(|row| row.len() != n - 1) {
            return Err(Error::InvalidArgument(format!(
                "target must be {0} x {0} for a lattice of dimension {n}",
                n - 1
            )));
        }
        if w < 1 {
            return Err(Error::InvalidArgument(format!("w must be at least 1, got {w}")));
        }
        let c1 = lat.scales()[0];
        let scales: Vec<f64> = lat.scales().iter().map(|c| c / c1).collect();
        let mut numerators = vec![vec![0i64; n]; n - 1];
        for (i, row) in target.iter().enumerate() {
            for j in 0..=i {
                numerators[i][j] = (w as f64 * row[j] * scales[j]).floor() as i64;
            }
            if numerators[i][i] == 0 {
                return Err(Error::SingularTarget { w, index: i });
            }
            numerators[i][i + 1] = 1;
        }
        // each row m_i must satisfy m_i . u = 0; the unit entry at i+1 fixes
        // u_{i+1} from the earlier entries
        let mut u = vec![0i64; n];
        u[0] = 1;
        for i in 0..n - 1 {
            let mut s: i64 = 0;
            for j in 0..=i {
                s = numerators[i][j]
                    .checked_mul(u[j])
                    .and_then(|p| s.checked_add(p))
                    .ok_or_else(|| Error::InvalidArgument(format!("lifting overflows at w = {w}")))?;
            }
            u[i + 1] = -s;
        }
        Ok(Self {
            numerators,
            winding: WindingVector::canonical(u)?,
            scales,
            w,
        })
    }

    /// Real `L_w^*` in the rescaled lattice.
    pub fn dual_matrix(&self) -> DMatrix<f64> {
        let n = self.scales.len();
        DMatrix::from_fn(n - 1, n, |i, j| self.numerators[i][j] as f64 / self.scales[j])
    }

    /// `|| (1/w^2) L_w^* L_w^{*T} - L^* L^{*T} ||_F`.
    pub fn gram_distance(&self, target: &[Vec<f64>]) -> f64 {
        let d = target.len();
        let t = DMatrix::from_fn(d, d, |i, j| target[i][j]);
        let lw = self.dual_matrix();
        let w2 = (self.w * self.w) as f64;
        let diff = (&lw * lw.transpose()) / w2 - &t * t.transpose();
        diff.norm()
    }
}

/// Winding produced by the scaled lifting construction.
pub fn scaled_lifting(target: &[Vec<f64>], lat: &RectLattice, w: i64) -> Result<WindingVector> {
    Ok(Lifting::new(target, lat, w)?.winding)
}

/// Closed form for the hexagonal target in three dimensions:
/// `u_w = (1, -2w, 2w floor(w sqrt(3) c_2 / c_1) - w)`.
pub fn hexagonal_sequence(lat: &RectLattice, w: i64) -> Result<WindingVector> {
    if lat.dim() != 3 {
        return Err(Error::InvalidArgument(format!(
            "hexagonal sequence needs N = 3, got {}",
            lat.dim()
        )));
    }
    if w < 1 {
        return Err(Error::InvalidArgument(format!("w must be at least 1, got {w}")));
    }
    let c = lat.scales();
    let f = (w as f64 * 3f64.sqrt() * (c[1] / c[0])).floor() as i64;
    WindingVector::canonical(vec![1, -2 * w, 2 * w * f - w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn wv(u: &[i64]) -> WindingVector {
        WindingVector::new(u.to_vec()).unwrap()
    }

    #[test]
    fn winding_validation() {
        assert!(WindingVector::new(vec![2, 4]).is_err());
        assert!(WindingVector::new(vec![0, 0]).is_err());
        assert_eq!(WindingVector::canonical(vec![-2, 4, 0]).unwrap().as_slice(), &[1, -2, 0]);
        assert_eq!(wv(&[1, -2, 3]).l1_norm(), 6);
    }

    #[test]
    fn project_off_examples() {
        assert_eq!(project_off(&[1.0, 1.0], &[1.0, 0.0]), vec![0.5, -0.5]);
        let p = project_off(&[1.0, 2.0], &[2.0, 4.0]);
        assert!(norm(&p) < 1e-15);
        assert_eq!(project_off(&[1.0, 0.0], &[0.0, 3.0]), vec![0.0, 3.0]);
    }

    #[test]
    fn n2_closed_form() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let lat = RectLattice::new(vec![h, h]).unwrap();
        let u = wv(&[4, 5]);
        let s = shortest_projection(&lat, &u, 6).unwrap();
        assert_abs_diff_eq!(s.r, 0.5 / 20.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.r, 0.110_431_526_074_847, epsilon = 1e-12);
        assert!(s.certified);

        let lat = RectLattice::integer(2);
        let s = shortest_projection(&lat, &wv(&[1, 0]), 1).unwrap();
        assert_abs_diff_eq!(s.r, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn small_radius_is_not_certified() {
        let lat = RectLattice::integer(3);
        let u = wv(&[1, 2, 198]);
        let s = shortest_projection(&lat, &u, 1).unwrap();
        assert!(!s.certified);
        assert!(shortest_projection(&lat, &u, 0).is_err());
    }

    #[test]
    fn dual_basis_examples() {
        let b = projected_dual_basis(&RectLattice::integer(2), &wv(&[1, 7])).unwrap();
        assert_eq!(b.dual.row(0).iter().copied().collect::<Vec<_>>(), vec![-7.0, 1.0]);

        let b = projected_dual_basis(&RectLattice::integer(3), &wv(&[1, 0, 0])).unwrap();
        assert_eq!(b.kernel, vec![vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn dual_and_primal_are_dual() {
        let lat = RectLattice::new(vec![0.3, 0.5, 0.8, 1.1]).unwrap();
        for u in [[1, 2, 3, 4], [0, 3, 5, 7], [6, 10, 15, 0], [2, -3, 0, 5]] {
            let u = wv(&u);
            let b = projected_dual_basis(&lat, &u).unwrap();
            let prod = &b.primal * b.dual.transpose();
            assert!((prod - DMatrix::identity(3, 3)).norm() < 1e-9);
            let u_hat = u.u_hat(lat.scales());
            for row in b.dual.row_iter().chain(b.primal.row_iter()) {
                let dot: f64 = row.iter().zip(&u_hat).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < 1e-9);
            }
            for m in &b.kernel {
                let dot: i64 = m.iter().zip(u.as_slice()).map(|(a, b)| a * b).sum();
                assert_eq!(dot, 0);
            }
        }
    }

    #[test]
    fn basis_enumeration_matches_known_minimum() {
        // frozen from a brute-force search over |n_i| <= (2, 2, 100)
        let s = projection_minimum(&RectLattice::integer(3), &wv(&[1, 2, 198])).unwrap();
        assert_abs_diff_eq!(s.r, 0.011_292_552_521_776_862, epsilon = 1e-12);
        let lat = RectLattice::integer(3);
        let u = wv(&[1, 2, 198]);
        assert_abs_diff_eq!(
            projected_norm(lat.scales(), &u.u_hat(lat.scales()), &s.witness),
            s.r,
            epsilon = 1e-12
        );
    }

    #[test]
    fn density_examples() {
        let lat = RectLattice::integer(3);
        let u = wv(&[1, 0, 0]);
        let r = projection_minimum(&lat, &u).unwrap().r;
        assert_abs_diff_eq!(packing_density(&lat, &u, r), std::f64::consts::PI / 4.0, epsilon = 1e-12);

        let lat = RectLattice::new(vec![0.6, 0.8]).unwrap();
        let u = wv(&[3, -7]);
        let r = projection_minimum(&lat, &u).unwrap().r;
        assert_abs_diff_eq!(packing_density(&lat, &u, r), 1.0, epsilon = 1e-12);
        assert!(best_lattice_density(5).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_abs_diff_eq!(unit_ball_volume(2), std::f64::consts::PI, epsilon = 1e-15);
        assert_abs_diff_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_ball_volume(4), std::f64::consts::PI.powi(2) / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn hexagonal_sequence_examples() {
        let lat = RectLattice::integer(3);
        assert_eq!(hexagonal_sequence(&lat, 1).unwrap().as_slice(), &[1, -2, 1]);
        assert_eq!(hexagonal_sequence(&lat, 2).unwrap().as_slice(), &[1, -4, 10]);
        assert!(hexagonal_sequence(&RectLattice::integer(4), 1).is_err());
    }

    #[test]
    fn lifting_reproduces_hexagonal_sequence() {
        let target = hexagonal_target();
        for c in [vec![1.0, 1.0, 1.0], vec![0.3, 0.55, 0.75], vec![0.8, 0.5, 0.33]] {
            let lat = RectLattice::new(c).unwrap();
            for w in 1..=40 {
                assert_eq!(
                    scaled_lifting(&target, &lat, w).unwrap(),
                    hexagonal_sequence(&lat, w).unwrap()
                );
            }
        }
    }

    #[test]
    fn lifting_with_unit_hexagonal_generator() {
        let unit = vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        let lat = RectLattice::integer(3);
        assert!(matches!(
            scaled_lifting(&unit, &lat, 1),
            Err(Error::SingularTarget { w: 1, index: 1 })
        ));
        assert_eq!(scaled_lifting(&unit, &lat, 2).unwrap().as_slice(), &[1, -2, 1]);
    }

    #[test]
    fn lifting_rows_are_orthogonal_to_winding() {
        let target = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.5, 0.9, 0.0],
            vec![0.3, 0.2, 1.1],
        ];
        let lat = RectLattice::new(vec![0.4, 0.5, 0.6, 0.7]).unwrap();
        let l = Lifting::new(&target, &lat, 7).unwrap();
        for row in &l.numerators {
            let dot: i64 = row.iter().zip(l.winding.as_slice()).map(|(a, b)| a * b).sum();
            assert_eq!(dot, 0);
        }
    }

    #[test]
    fn singular_target_is_reported() {
        let target = vec![vec![0.1, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            scaled_lifting(&target, &RectLattice::integer(3), 1),
            Err(Error::SingularTarget { w: 1, index: 0 })
        ));
    }
}
