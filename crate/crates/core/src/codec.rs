//! The torus-layer code: one closed curve per torus layer, the unit interval
//! split among the curves in proportion to their lengths, and a two-stage
//! decoder (nearest layer, then nearest fold on that torus).

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::geometry::{norm, phi, polar_pairs, AmbientPoint, TorusSpec};
use crate::lattice::{projection_minimum, RectLattice, WindingVector};
use crate::spherical::SphericalCodePlus;
use crate::textfmt::{join, parse_err, parse_list, Document};

/// Default fraction of each closed curve used for signalling.
pub const DEFAULT_ALPHA: f64 = 0.75;

/// Tolerance when a loaded code file's derived values are rechecked.
pub const LOAD_TOL: f64 = 1e-9;

/// A closed `(u_1, ..., u_N)`-knot on the torus `T_c`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    pub torus: TorusSpec,
    pub winding: WindingVector,
    /// Arc length `2 pi ||u_hat||` before power scaling.
    pub length: f64,
    /// Fold spacing `r_c(u)` in flat coordinates of the unit-period lattice.
    pub r: f64,
    /// `(2 c_xi sin(pi r / (2 c_xi)), 2 sin(pi r / 2))`.
    pub small_ball: (f64, f64),
}

impl CurveSpec {
    pub fn new(torus: TorusSpec, winding: WindingVector) -> Result<Self> {
        if torus.dim() != winding.dim() {
            return Err(Error::InvalidArgument(format!(
                "torus has dimension {}, winding has {}",
                torus.dim(),
                winding.dim()
            )));
        }
        let length = TAU * norm(&winding.u_hat(torus.coords()));
        let r = projection_minimum(&RectLattice::from(&torus), &winding)?.r;
        let small_ball = small_ball_bounds(r, torus.c_min());
        Ok(Self {
            torus,
            winding,
            length,
            r,
            small_ball,
        })
    }

    /// `phi_c(x 2 pi u_hat)`.
    pub fn point(&self, x: f64) -> AmbientPoint {
        let arg: Vec<f64> = self
            .winding
            .u_hat(self.torus.coords())
            .iter()
            .map(|v| x * TAU * v)
            .collect();
        phi(&self.torus, &arg)
    }
}

/// Small-ball radius bounds for fold spacing `r` on a torus with smallest
/// radius `c_xi`.
pub fn small_ball_bounds(r: f64, c_xi: f64) -> (f64, f64) {
    use std::f64::consts::PI;
    (
        2.0 * c_xi * (PI * r / (2.0 * c_xi)).sin(),
        2.0 * (PI * r / 2.0).sin(),
    )
}

/// `phi_c(x 2 pi u_hat)` for a curve.
pub fn curve_point(curve: &CurveSpec, x: f64) -> AmbientPoint {
    curve.point(x)
}

/// What [`TorusLayerCode::build`] does when the curve tubes of two layers may
/// overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparationPolicy {
    #[default]
    Warn,
    Error,
    /// Accept silently; the code's certified radius is capped by the layers
    /// either way. Meant for designs that match the two radii on purpose.
    Ignore,
}

/// Low-noise and wrong-fold terms of the mean squared error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticMse {
    pub low_noise: f64,
    pub jump_bound: f64,
}

/// Standard normal tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusLayerCode {
    curves: Vec<CurveSpec>,
    layers: SphericalCodePlus,
    starts: Vec<f64>,
    widths: Vec<f64>,
    total_length: f64,
    power: f64,
    alpha: f64,
    radius: f64,
}

/// Builds a code, warning (not failing) on a layer separation shortfall.
pub fn build_code(
    layers: SphericalCodePlus,
    windings: Vec<WindingVector>,
    power: f64,
    alpha: f64,
) -> Result<TorusLayerCode> {
    TorusLayerCode::build(layers, windings, power, alpha, SeparationPolicy::Warn)
}

/// Permutes `base` onto every layer by rank: where a codeword holds its `j`-th
/// smallest coordinate, the winding holds `base[j]`.
///
/// For a permutation code whose base vector is increasing this keeps every
/// `u_hat` a permutation of the first layer's, so all curves share one length
/// and one fold spacing.
pub fn aligned_windings(layers: &SphericalCodePlus, base: &WindingVector) -> Vec<WindingVector> {
    layers
        .codewords()
        .iter()
        .map(|c| {
            let mut order: Vec<usize> = (0..c.dim()).collect();
            order.sort_by(|&a, &b| c.coords()[a].total_cmp(&c.coords()[b]));
            let mut ranks = vec![0; c.dim()];
            for (rank, &i) in order.iter().enumerate() {
                ranks[i] = rank;
            }
            base.permuted(&ranks)
        })
        .collect()
}

impl TorusLayerCode {
    pub fn build(
        layers: SphericalCodePlus,
        windings: Vec<WindingVector>,
        power: f64,
        alpha: f64,
        policy: SeparationPolicy,
    ) -> Result<Self> {
        if windings.len() != layers.len() {
            return Err(Error::MismatchedLengths {
                expected: layers.len(),
                got: windings.len(),
            });
        }
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidArgument(format!("power must be positive, got {power}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let curves = layers
            .codewords()
            .iter()
            .zip(windings)
            .map(|(c, u)| CurveSpec::new(c.clone(), u))
            .collect::<Result<Vec<_>>>()?;

        let total_length: f64 = curves.iter().map(|c| c.length).sum();
        let mut starts = Vec::with_capacity(curves.len());
        let mut acc = 0.0;
        for c in &curves {
            starts.push(acc / total_length);
            acc += c.length;
        }
        let widths = (0..curves.len())
            .map(|k| starts.get(k + 1).copied().unwrap_or(1.0) - starts[k])
            .collect();

        let min_lower = curves
            .iter()
            .map(|c| c.small_ball.0)
            .fold(f64::INFINITY, f64::min);
        let layer_distance = layers.min_distance();
        if 2.0 * min_lower > layer_distance {
            let err = Error::SeparationViolation {
                curve_radius: min_lower,
                needed: 2.0 * min_lower,
                layer_distance,
            };
            match policy {
                SeparationPolicy::Warn => log::warn!("{err}"),
                SeparationPolicy::Error => return Err(err),
                SeparationPolicy::Ignore => log::debug!("{err}"),
            }
        }
        let radius = min_lower.min(layer_distance) / 2.0;

        Ok(Self {
            curves,
            layers,
            starts,
            widths,
            total_length,
            power,
            alpha,
            radius,
        })
    }

    pub fn curves(&self) -> &[CurveSpec] {
        &self.curves
    }

    pub fn layers(&self) -> &SphericalCodePlus {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.layers.dim()
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Half-open interval `[start, end)` of `[0, 1)` carried by curve `k`.
    pub fn interval(&self, k: usize) -> (f64, f64) {
        (self.starts[k], self.starts[k] + self.widths[k])
    }

    pub fn interval_width(&self, k: usize) -> f64 {
        self.widths[k]
    }

    /// Certified tube radius on the unit sphere: half the smaller of the
    /// curve small-ball lower bound and the layer separation.
    pub fn certified_radius(&self) -> f64 {
        self.radius
    }

    /// Source separation beyond which two encoded points on the same curve are
    /// at least `2 sqrt(P) rho` apart.
    pub fn fold_pitch(&self) -> f64 {
        std::f64::consts::PI * self.radius / (self.alpha * self.total_length)
    }

    /// Same code with a different power.
    pub fn with_power(&self, power: f64) -> Result<Self> {
        if !(power > 0.0) || !power.is_finite() {
            return Err(Error::InvalidArgument(format!("power must be positive, got {power}")));
        }
        Ok(Self {
            power,
            ..self.clone()
        })
    }

    /// Index of the interval containing `x`.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(0.0..1.0).contains(&x) {
            return Err(Error::OutOfRange(x));
        }
        Ok(self.starts.partition_point(|&s| s <= x) - 1)
    }

    /// Encodes `x` in `[0, 1)`.
    pub fn encode(&self, x: f64) -> Result<AmbientPoint> {
        let k = self.locate(x)?;
        let f = ((x - self.starts[k]) / self.widths[k]).min(1.0);
        Ok(self.encode_on_curve(k, f))
    }

    /// Traces curve `k` at relative position `f` in `[0, 1]` of its signalling
    /// arc, scaled to power `P`.
    pub fn encode_on_curve(&self, k: usize, f: f64) -> AmbientPoint {
        let tau = (1.0 - self.alpha) / 2.0 + self.alpha * f;
        self.curves[k].point(tau).scaled(self.power.sqrt())
    }

    /// Decodes to `[0, 1)`.
    pub fn decode(&self, y: &AmbientPoint) -> Result<f64> {
        let (k, f) = self.decode_curve(y)?;
        let x = self.starts[k] + self.widths[k] * f;
        let end = self.starts[k] + self.widths[k];
        Ok(if x >= end { end.next_down() } else { x })
    }

    /// Decodes to a curve index and a relative position in `[0, 1]`.
    ///
    /// The layer is the codeword nearest the normalized pair radii. On that
    /// torus the received angles are matched against the curve in the flat
    /// metric. The squared flat distance is piecewise quadratic in the curve
    /// parameter, with breakpoints where some coordinate's nearest lattice
    /// shift changes, so each piece is minimized in closed form.
    pub fn decode_curve(&self, y: &AmbientPoint) -> Result<(usize, f64)> {
        if y.dim() != 2 * self.dim() {
            return Err(Error::InvalidArgument(format!(
                "received point has dimension {}, code needs {}",
                y.dim(),
                2 * self.dim()
            )));
        }
        if !y.is_finite() {
            return Err(Error::InvalidArgument("received point is not finite".into()));
        }
        let (gamma, angles) = polar_pairs(y)?;
        let g = norm(&gamma);
        let dir: Vec<f64> = gamma.iter().map(|x| x / g).collect();
        let (k, _) = self.layers.nearest_layer(&dir);
        let curve = &self.curves[k];
        let a: Vec<f64> = angles.iter().map(|t| t / TAU).collect();
        let lo = (1.0 - self.alpha) / 2.0;
        let hi = lo + self.alpha;
        let tau = fold_search(&a, curve.winding.as_slice(), curve.torus.coords(), lo, hi);
        Ok((k, ((tau - lo) / self.alpha).clamp(0.0, 1.0)))
    }

    /// Reference decoder: exhaustive search over the grid `x = i * step` for
    /// the encoded point nearest `y` in the ambient space.
    pub fn grid_ml_decode(&self, y: &AmbientPoint, step: f64) -> f64 {
        let count = (1.0 / step).ceil() as usize;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..self.len() {
            let curve = &self.curves[k];
            let u_hat = curve.winding.u_hat(curve.torus.coords());
            let c = curve.torus.coords();
            let scale = self.power.sqrt();
            let (a, w) = (self.starts[k], self.widths[k]);
            let first = (a / step).ceil() as usize;
            for i in first..count {
                let x = i as f64 * step;
                if x >= a + w {
                    break;
                }
                let tau = (1.0 - self.alpha) / 2.0 + self.alpha * (x - a) / w;
                let mut d2 = 0.0;
                for (j, (&ci, &uh)) in c.iter().zip(&u_hat).enumerate() {
                    let (s, co) = (tau * TAU * uh / ci).sin_cos();
                    let dx = y.0[2 * j] - scale * ci * co;
                    let dy = y.0[2 * j + 1] - scale * ci * s;
                    d2 += dx * dx + dy * dy;
                }
                if d2 < best.0 {
                    best = (d2, x);
                }
            }
        }
        best.1
    }

    /// Low-noise mean squared error for a uniform source and the wrong-fold
    /// probability bound, at per-dimension noise variance `sigma2`.
    pub fn analytic_mse(&self, sigma2: f64) -> AnalyticMse {
        let stretch = self.power.sqrt() * self.alpha * self.total_length;
        AnalyticMse {
            low_noise: sigma2 / (stretch * stretch),
            jump_bound: q_function(self.power.sqrt() * self.radius / sigma2.sqrt()),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# torus-layer code\n");
        s.push_str("# rows: torus coordinates | winding | length r small_ball_lower small_ball_upper\n");
        let _ = writeln!(s, "n = {}", self.dim());
        let _ = writeln!(s, "m = {}", self.len());
        let _ = writeln!(s, "power = {}", self.power);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "min_distance = {}", self.layers.min_distance());
        let _ = writeln!(s, "total_length = {}", self.total_length);
        let _ = writeln!(s, "certified_radius = {}", self.radius);
        for c in &self.curves {
            let _ = writeln!(
                s,
                "{} | {} | {} {} {} {}",
                join(c.torus.coords()),
                join(c.winding.as_slice()),
                c.length,
                c.r,
                c.small_ball.0,
                c.small_ball.1
            );
        }
        s
    }

    /// Parses a code file and recomputes every derived quantity.
    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let n: usize = doc.require("n")?;
        let m: usize = doc.require("m")?;
        let power: f64 = doc.require("power")?;
        let alpha: f64 = doc.require("alpha")?;
        let stated_distance: f64 = doc.require("min_distance")?;
        if doc.rows.len() != m || m == 0 {
            return Err(Error::InvariantViolation(format!(
                "header says {m} layers, file has {}",
                doc.rows.len()
            )));
        }
        let mut tori = Vec::with_capacity(m);
        let mut windings = Vec::with_capacity(m);
        let mut stated = Vec::with_capacity(m);
        for (line, row) in &doc.rows {
            let parts: Vec<&str> = row.split('|').collect();
            if parts.len() != 3 {
                return Err(parse_err(*line, "expected `coords | winding | summary`"));
            }
            let c: Vec<f64> = parse_list(*line, parts[0])?;
            let u: Vec<i64> = parse_list(*line, parts[1])?;
            let summary: Vec<f64> = parse_list(*line, parts[2])?;
            if c.len() != n || u.len() != n || summary.len() != 4 {
                return Err(parse_err(*line, format!("expected {n} coordinates, {n} winding entries and 4 summary values")));
            }
            let bad = |e: Error| Error::InvariantViolation(format!("line {line}: {e}"));
            tori.push(TorusSpec::new(c).map_err(bad)?);
            windings.push(WindingVector::new(u).map_err(bad)?);
            stated.push((*line, summary));
        }
        // the spherical-code parser verifies the stated distance and keeps it
        let mut layer_text = format!("n = {n}\nm = {m}\nmin_distance = {stated_distance}\n");
        for t in &tori {
            layer_text.push_str(&join(t.coords()));
            layer_text.push('\n');
        }
        let layers = SphericalCodePlus::from_text(&layer_text)?;
        let code = Self::build(layers, windings, power, alpha, SeparationPolicy::Warn)?;
        for (curve, (line, s)) in code.curves.iter().zip(&stated) {
            let actual = [curve.length, curve.r, curve.small_ball.0, curve.small_ball.1];
            if actual.iter().zip(s).any(|(a, b)| (a - b).abs() > LOAD_TOL * a.abs().max(1.0)) {
                return Err(Error::InvariantViolation(format!(
                    "line {line}: stated summary {s:?} does not match recomputed {actual:?}"
                )));
            }
        }
        if let Some(total) = doc.get("total_length") {
            let total: f64 = total
                .parse()
                .map_err(|_| parse_err(0, format!("bad total_length `{total}`")))?;
            if (total - code.total_length).abs() > LOAD_TOL * code.total_length {
                return Err(Error::InvariantViolation(format!(
                    "stated total_length {total}, curves give {}",
                    code.total_length
                )));
            }
        }
        Ok(code)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text())
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_text(&text)
    }

    /// Human-readable design summary.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "N = {}, M = {} layers", self.dim(), self.len());
        let _ = writeln!(s, "power = {}, alpha = {}", self.power, self.alpha);
        let _ = writeln!(s, "total length L = {:.6}", self.total_length);
        let _ = writeln!(s, "layer separation = {:.6}", self.layers.min_distance());
        let _ = writeln!(s, "certified radius = {:.6e}", self.radius);
        for (k, c) in self.curves.iter().enumerate() {
            let (a, b) = self.interval(k);
            let _ = writeln!(
                s,
                "  curve {k}: u = {:?}, length = {:.6}, r = {:.6e}, small ball = [{:.6e}, {:.6e}], interval = [{a:.6}, {b:.6})",
                c.winding.as_slice(),
                c.length,
                c.r,
                c.small_ball.0,
                c.small_ball.1
            );
        }
        s
    }
}

/// Minimizes `sum_i c_i^2 dist(a_i - tau u_i, Z)^2` over `tau` in `[lo, hi]`.
fn fold_search(a: &[f64], u: &[i64], c: &[f64], lo: f64, hi: f64) -> f64 {
    let mut breaks = vec![lo, hi];
    for (&ai, &ui) in a.iter().zip(u) {
        if ui == 0 {
            continue;
        }
        let uf = ui as f64;
        let (g0, g1) = (ai - lo * uf, ai - hi * uf);
        let (gmin, gmax) = (g0.min(g1), g0.max(g1));
        let first = (gmin - 0.5).ceil() as i64;
        let last = (gmax - 0.5).floor() as i64;
        for m in first..=last {
            let t = (ai - m as f64 - 0.5) / uf;
            if t > lo && t < hi {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);

    let weights: Vec<f64> = c.iter().map(|x| x * x).collect();
    let denom: f64 = u
        .iter()
        .zip(&weights)
        .map(|(&ui, w)| w * (ui * ui) as f64)
        .sum();
    let mut best = (f64::INFINITY, lo);
    let mut shifts = vec![0.0; a.len()];
    for piece in breaks.windows(2) {
        let (t0, t1) = (piece[0], piece[1]);
        if t1 <= t0 {
            continue;
        }
        let mid = 0.5 * (t0 + t1);
        let mut num = 0.0;
        for i in 0..a.len() {
            let ui = u[i] as f64;
            shifts[i] = (a[i] - mid * ui).round();
            num += weights[i] * ui * (a[i] - shifts[i]);
        }
        let t = (num / denom).clamp(t0, t1);
        let cost: f64 = (0..a.len())
            .map(|i| {
                let e = a[i] - t * u[i] as f64 - shifts[i];
                weights[i] * e * e
            })
            .sum();
        if cost < best.0 {
            best = (cost, t);
        }
    }
    best.1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherical::permutation_code;
    use approx::assert_abs_diff_eq;

    fn reference_code(alpha: f64) -> TorusLayerCode {
        let layers = permutation_code(3, 0.6).unwrap();
        let u = WindingVector::new(vec![1, 2, 198]).unwrap();
        let windings = aligned_windings(&layers, &u);
        build_code(layers, windings, 1.0, alpha).unwrap()
    }

    fn single(u: &[i64]) -> TorusLayerCode {
        let layers = SphericalCodePlus::single(TorusSpec::centered(u.len()).unwrap());
        build_code(layers, vec![WindingVector::new(u.to_vec()).unwrap()], 1.0, 1.0).unwrap()
    }

    #[test]
    fn curve_endpoints_and_length() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let curve = CurveSpec::new(
            TorusSpec::new(vec![h, h]).unwrap(),
            WindingVector::new(vec![4, 5]).unwrap(),
        )
        .unwrap();
        let p0 = curve_point(&curve, 0.0);
        assert_eq!(p0.as_slice(), &[h, 0.0, h, 0.0]);
        let p1 = curve_point(&curve, 1.0);
        assert!(p0.distance(&p1) < 1e-12);
        assert_abs_diff_eq!(curve.length, TAU * 20.5f64.sqrt(), epsilon = 1e-12);
        assert!(curve.small_ball.0 <= curve.small_ball.1);
    }

    #[test]
    fn partition_follows_lengths() {
        let code = reference_code(0.75);
        assert_eq!(code.len(), 6);
        let l0 = code.curves()[0].length;
        for k in 0..6 {
            assert_abs_diff_eq!(code.curves()[k].length, l0, epsilon = 1e-9);
            assert_abs_diff_eq!(code.interval_width(k), 1.0 / 6.0, epsilon = 1e-12);
        }
        assert_eq!(code.interval(0).0, 0.0);
        assert_eq!(code.interval(5).1, 1.0);
    }

    #[test]
    fn single_layer_is_one_interval() {
        let code = single(&[1, 2, 5]);
        assert_eq!(code.interval(0), (0.0, 1.0));
        assert!(code.layers().min_distance().is_infinite());
        let x: f64 = 0.3;
        let direct = code.curves()[0].point(x);
        assert!(code.encode(x).unwrap().distance(&direct) < 1e-15);
    }

    #[test]
    fn alpha_shrink_starts_inside_curve() {
        let code = reference_code(0.75);
        let (a, _) = code.interval(2);
        let expect = code.curves()[2].point(0.125);
        assert!(code.encode(a).unwrap().distance(&expect) < 1e-15);
        assert!(code.encode(1.0).is_err());
        assert!(code.encode(-0.1).is_err());
    }

    #[test]
    fn encode_has_power_norm() {
        let code = reference_code(0.75).with_power(7.0).unwrap();
        for i in 0..100 {
            let y = code.encode(i as f64 / 100.0).unwrap();
            assert_abs_diff_eq!(y.norm(), 7f64.sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let code = reference_code(0.75);
        for i in 0..2000 {
            let x = i as f64 / 2000.0;
            let y = code.encode(x).unwrap();
            assert!((code.decode(&y).unwrap() - x).abs() <= 1e-9, "x = {x}");
        }
        let single = single(&[1, 3, 7]);
        for i in 0..500 {
            let x = i as f64 / 500.0 + 1e-4;
            let y = single.encode(x).unwrap();
            assert!((single.decode(&y).unwrap() - x).abs() <= 1e-9, "x = {x}");
        }
    }

    #[test]
    fn decode_stays_in_interval() {
        let code = reference_code(0.5);
        for k in 0..code.len() {
            // the padding region of each curve decodes to an interval endpoint
            let y = code.curves()[k].point(0.999).scaled(1.0);
            let x = code.decode(&y).unwrap();
            let (a, b) = code.interval(k);
            assert!(x >= a && x < b);
        }
    }

    #[test]
    fn degenerate_point_is_rejected() {
        let code = reference_code(0.75);
        let y = AmbientPoint(vec![0.0, 0.0, 0.6, 0.0, 0.8, 0.0]);
        assert!(matches!(code.decode(&y), Err(Error::DegeneratePoint { pair: 0, .. })));
    }

    #[test]
    fn analytic_examples() {
        assert_abs_diff_eq!(q_function(0.0), 0.5, epsilon = 1e-15);
        let code = single(&[1, 2, 5]);
        let l = code.total_length();
        let scaled = code.with_power((100.0 / l).powi(2)).unwrap();
        let a = scaled.analytic_mse(0.01);
        assert_abs_diff_eq!(a.low_noise, 1e-6, epsilon = 1e-18);
    }

    #[test]
    fn text_round_trip() {
        let code = reference_code(0.75);
        let back = TorusLayerCode::from_text(&code.to_text()).unwrap();
        assert_eq!(back, code);
        let tampered = code.to_text().replace("| 1 2 198 |", "| 1 2 197 |");
        assert!(TorusLayerCode::from_text(&tampered).is_err());
    }

    #[test]
    fn mismatched_windings() {
        let layers = permutation_code(3, 0.6).unwrap();
        let u = WindingVector::new(vec![1, 2, 3]).unwrap();
        assert!(matches!(
            build_code(layers, vec![u], 1.0, 0.75),
            Err(Error::MismatchedLengths { expected: 6, got: 1 })
        ));
    }

    #[test]
    fn separation_policy() {
        // layers this close cannot hold tubes of a short curve
        let layers = permutation_code(3, 0.01).unwrap();
        let u = WindingVector::new(vec![1, 0, 0]).unwrap();
        let windings = aligned_windings(&layers, &u);
        let strict = TorusLayerCode::build(
            layers.clone(),
            windings.clone(),
            1.0,
            0.75,
            SeparationPolicy::Error,
        );
        assert!(matches!(strict, Err(Error::SeparationViolation { .. })));
        assert!(build_code(layers, windings, 1.0, 0.75).is_ok());
    }

    #[test]
    fn fold_search_matches_grid() {
        let code = reference_code(0.75);
        let y = code.encode(0.4321).unwrap();
        let grid = code.grid_ml_decode(&y, 1e-5);
        assert!((grid - 0.4321).abs() < 1e-5);
    }
}
