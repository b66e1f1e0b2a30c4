//! Choosing layers and windings for a target small-ball radius.

use std::f64::consts::PI;

use crate::codec::{aligned_windings, build_code, CurveSpec, SeparationPolicy, TorusLayerCode};
use crate::error::{Error, Result};
use crate::geometry::TorusSpec;
use crate::lattice::{hexagonal_target, projection_minimum, scaled_lifting, RectLattice, WindingVector};
use crate::spherical::{permutation_base, permutation_code, solve_t, SphericalCodePlus};

/// Upper limit on `w` in a lifting sweep.
pub const MAX_LIFTING_W: i64 = 100_000;

/// Lower-triangular generator of the dual of the densest lattice in dimension
/// `dim` (1 to 3), used as the lifting target.
pub fn default_target(dim: usize) -> Result<Vec<Vec<f64>>> {
    match dim {
        1 => Ok(vec![vec![1.0]]),
        2 => Ok(hexagonal_target()),
        // body-centred cubic, dual of the face-centred cubic packing
        3 => Ok(vec![
            vec![2.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ]),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Fold spacing `r` whose small-ball lower bound equals `delta` on a torus with
/// smallest radius `c_xi`.
pub fn fold_spacing_for_radius(delta: f64, c_xi: f64) -> Result<f64> {
    let s = delta / (2.0 * c_xi);
    if !(delta > 0.0) || s >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "small-ball radius {delta} is not reachable on a torus with c_min = {c_xi}"
        )));
    }
    Ok(2.0 * c_xi / PI * s.asin())
}

/// A winding found by the lifting sweep, expressed in the coordinate order of
/// the torus it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftingChoice {
    pub winding: WindingVector,
    pub w: i64,
    pub r: f64,
    pub length: f64,
}

/// Longest lifted winding on `c` with fold spacing at least `r_target`.
///
/// For each ordering of the coordinates the lifting sequence is followed up to
/// the largest `w` whose projection minimum still reaches `r_target`; the
/// longest curve over all orderings wins. Returns `None` when even `w = 1`
/// packs the folds too tightly.
pub fn lifting_sweep(c: &[f64], target: &[Vec<f64>], r_target: f64) -> Result<Option<LiftingChoice>> {
    let n = c.len();
    let mut best: Option<LiftingChoice> = None;
    for order in orderings(n) {
        let permuted: Vec<f64> = order.iter().map(|&i| c[i]).collect();
        let lat = RectLattice::new(permuted.clone())?;
        let mut misses = 0;
        for w in 1..=MAX_LIFTING_W {
            let u = match scaled_lifting(target, &lat, w) {
                Ok(u) => u,
                Err(Error::SingularTarget { .. }) => continue,
                Err(e) => return Err(e),
            };
            let r = projection_minimum(&lat, &u)?.r;
            if r < r_target {
                // r shrinks like 1/w; a few misses in a row end the sweep
                misses += 1;
                if misses >= 3 || r < r_target / 2.0 {
                    break;
                }
                continue;
            }
            misses = 0;
            let mut original = vec![0; n];
            for (pos, &i) in order.iter().enumerate() {
                original[i] = u.as_slice()[pos];
            }
            let winding = WindingVector::canonical(original)?;
            let length = 2.0 * PI * crate::geometry::norm(&winding.u_hat(c));
            if best.as_ref().is_none_or(|b| length > b.length) {
                best = Some(LiftingChoice {
                    winding,
                    w,
                    r,
                    length,
                });
            }
        }
    }
    Ok(best)
}

fn orderings(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    while crate::spherical::next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

/// Which family a [`SchemeDesign`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// All permutations of one torus vector, one curve per layer.
    TorusLayer,
    /// One curve on the centred torus.
    SingleTorus,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::TorusLayer => "torus_layer",
            Scheme::SingleTorus => "single_torus",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SchemeDesign {
    pub scheme: Scheme,
    pub delta: f64,
    /// Permutation parameter of the layers (torus-layer scheme only).
    pub t: Option<f64>,
    pub lifting: LiftingChoice,
    pub code: TorusLayerCode,
}

/// Torus-layer code with small-ball radius `delta`: layers `2 delta` apart and
/// curves whose fold spacing gives small-ball lower bound `delta`.
pub fn torus_layer_for_radius(n: usize, delta: f64, power: f64, alpha: f64) -> Result<SchemeDesign> {
    let t = solve_t(n, 2.0 * delta)?;
    let base = permutation_base(n, t);
    let c_xi = base[0];
    let r_target = fold_spacing_for_radius(delta, c_xi)?;
    let lifting = lifting_sweep(&base, &default_target(n - 1)?, r_target)?.ok_or_else(|| {
        Error::InvalidArgument(format!("no lifted winding reaches fold spacing {r_target} at delta = {delta}"))
    })?;
    let layers = permutation_code(n, t)?;
    let windings = aligned_windings(&layers, &lifting.winding);
    // tubes of radius delta on layers 2 delta apart: the overlap check fires by design
    let code = TorusLayerCode::build(layers, windings, power, alpha, SeparationPolicy::Ignore)?;
    Ok(SchemeDesign {
        scheme: Scheme::TorusLayer,
        delta,
        t: Some(t),
        lifting,
        code,
    })
}

/// Single curve on the centred torus with small-ball lower bound `delta`.
pub fn single_torus_for_radius(n: usize, delta: f64, power: f64, alpha: f64) -> Result<SchemeDesign> {
    let torus = TorusSpec::centered(n)?;
    let r_target = fold_spacing_for_radius(delta, torus.c_min())?;
    let lifting = lifting_sweep(torus.coords(), &default_target(n - 1)?, r_target)?.ok_or_else(|| {
        Error::InvalidArgument(format!("no lifted winding reaches fold spacing {r_target} at delta = {delta}"))
    })?;
    let code = build_code(
        SphericalCodePlus::single(torus),
        vec![lifting.winding.clone()],
        power,
        alpha,
    )?;
    Ok(SchemeDesign {
        scheme: Scheme::SingleTorus,
        delta,
        t: None,
        lifting,
        code,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub delta: f64,
    pub scheme: Scheme,
    pub m: usize,
    pub total_length: f64,
    pub w: i64,
    pub winding: Vec<i64>,
}

/// Total curve length of both schemes at each small-ball radius.
pub fn compare(n: usize, deltas: &[f64]) -> Result<Vec<CompareRow>> {
    let mut rows = Vec::with_capacity(2 * deltas.len());
    for &delta in deltas {
        for design in [
            single_torus_for_radius(n, delta, 1.0, 1.0)?,
            torus_layer_for_radius(n, delta, 1.0, 1.0)?,
        ] {
            rows.push(CompareRow {
                delta,
                scheme: design.scheme,
                m: design.code.len(),
                total_length: design.code.total_length(),
                w: design.lifting.w,
                winding: design.lifting.winding.as_slice().to_vec(),
            });
        }
    }
    Ok(rows)
}

/// Curve lengths of the torus-layer and single-torus codes that share one base
/// winding; the layer code uses the permutation code at parameter `t`.
pub fn length_ratio(n: usize, t: f64, base: &WindingVector) -> Result<f64> {
    let layers = permutation_code(n, t)?;
    let windings = aligned_windings(&layers, base);
    let layered: f64 = layers
        .codewords()
        .iter()
        .zip(windings)
        .map(|(c, u)| CurveSpec::new(c.clone(), u).map(|s| s.length))
        .sum::<Result<f64>>()?;
    let single = CurveSpec::new(TorusSpec::centered(n)?, base.clone())?.length;
    Ok(layered / single)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fold_spacing_inverts_small_ball() {
        let c_xi = 0.3;
        let r = fold_spacing_for_radius(0.05, c_xi).unwrap();
        let lower = crate::codec::small_ball_bounds(r, c_xi).0;
        assert_abs_diff_eq!(lower, 0.05, epsilon = 1e-14);
        assert!(fold_spacing_for_radius(0.7, c_xi).is_err());
    }

    #[test]
    fn sweep_respects_target() {
        let c = TorusSpec::centered(3).unwrap();
        let choice = lifting_sweep(c.coords(), &hexagonal_target(), 0.02).unwrap().unwrap();
        assert!(choice.r >= 0.02);
        let again = projection_minimum(&RectLattice::from(&c), &choice.winding).unwrap().r;
        assert_abs_diff_eq!(again, choice.r, epsilon = 1e-12);
        assert!(lifting_sweep(c.coords(), &hexagonal_target(), 10.0).unwrap().is_none());
    }

    #[test]
    fn designs_meet_radius() {
        let tl = torus_layer_for_radius(3, 0.1, 1.0, 0.75).unwrap();
        assert_eq!(tl.code.len(), 6);
        for c in tl.code.curves() {
            assert!(c.small_ball.0 >= 0.1 - 1e-12);
        }
        assert_abs_diff_eq!(tl.code.layers().min_distance(), 0.2, epsilon = 1e-9);
        let st = single_torus_for_radius(3, 0.1, 1.0, 0.75).unwrap();
        assert!(st.code.curves()[0].small_ball.0 >= 0.1 - 1e-12);
    }

    #[test]
    fn ratio_tends_to_factorial() {
        let u = WindingVector::new(vec![1, 2, 198]).unwrap();
        let ratio = length_ratio(3, 1e-6, &u).unwrap();
        assert_abs_diff_eq!(ratio, 6.0, epsilon = 1e-3);
    }

    #[test]
    fn targets() {
        assert!(default_target(4).is_err());
        for d in 1..=3 {
            let t = default_target(d).unwrap();
            for (i, row) in t.iter().enumerate() {
                assert!(row[i] != 0.0);
                assert!(row[i + 1..].iter().all(|&x| x == 0.0));
            }
        }
    }
}
