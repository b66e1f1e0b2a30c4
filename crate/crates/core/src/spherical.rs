//! Spherical codes with positive coordinates; each codeword selects one torus
//! layer of the foliation.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{distance, TorusSpec};
use crate::textfmt::{join, parse_err, parse_list, Document};

/// Largest permutation code built by default: `10!` codewords.
pub const DEFAULT_PERMUTATION_CAP: usize = 3_628_800;

/// Tolerance between a stated and a recomputed minimum distance on load.
pub const LOAD_DISTANCE_TOL: f64 = 1e-9;

/// A finite set of torus vectors with certified minimum pairwise distance.
///
/// For a single codeword the minimum distance is `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalCodePlus {
    codewords: Vec<TorusSpec>,
    min_distance: f64,
}

impl SphericalCodePlus {
    /// Builds a code and computes its minimum distance by exhaustive comparison.
    pub fn new(codewords: Vec<TorusSpec>) -> Result<Self> {
        check_shape(&codewords)?;
        let min_distance = brute_min_distance(&codewords);
        if min_distance == 0.0 {
            return Err(Error::InvariantViolation("repeated codeword".into()));
        }
        Ok(Self {
            codewords,
            min_distance,
        })
    }

    /// A one-layer code on the torus `c`.
    pub fn single(c: TorusSpec) -> Self {
        Self {
            codewords: vec![c],
            min_distance: f64::INFINITY,
        }
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.codewords[0].dim()
    }

    pub fn codewords(&self) -> &[TorusSpec] {
        &self.codewords
    }

    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    /// Closest codeword to `gamma` by exhaustive scan, `O(MN)`. Ties go to the
    /// lowest index.
    pub fn nearest_layer(&self, gamma: &[f64]) -> (usize, &TorusSpec) {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (i, c) in self.codewords.iter().enumerate() {
            let d2: f64 = c
                .coords()
                .iter()
                .zip(gamma)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d2 < best_d2 {
                best = i;
                best_d2 = d2;
            }
        }
        (best, &self.codewords[best])
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("# torus-layer spherical code\n");
        let _ = writeln!(s, "n = {}", self.dim());
        let _ = writeln!(s, "m = {}", self.len());
        let _ = writeln!(s, "min_distance = {}", self.min_distance);
        for c in &self.codewords {
            s.push_str(&join(c.coords()));
            s.push('\n');
        }
        s
    }

    /// Parses and revalidates a code written by [`SphericalCodePlus::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let doc = Document::parse(text)?;
        let n: usize = doc.require("n")?;
        let m: usize = doc.require("m")?;
        let stated: f64 = doc.require("min_distance")?;
        if m == 0 || doc.rows.is_empty() {
            return Err(Error::InvariantViolation("code has no codewords".into()));
        }
        if doc.rows.len() != m {
            return Err(Error::InvariantViolation(format!(
                "header says {m} codewords, file has {}",
                doc.rows.len()
            )));
        }
        let mut codewords = Vec::with_capacity(m);
        for (line, row) in &doc.rows {
            let c: Vec<f64> = parse_list(*line, row)?;
            if c.len() != n {
                return Err(parse_err(*line, format!("expected {n} coordinates")));
            }
            let torus = TorusSpec::new(c)
                .map_err(|e| Error::InvariantViolation(format!("line {line}: {e}")))?;
            codewords.push(torus);
        }
        let code = if m == 1 {
            Self::single(codewords.pop().unwrap())
        } else {
            Self::new(codewords)?
        };
        let agrees = if code.min_distance.is_infinite() {
            stated.is_infinite()
        } else {
            (stated - code.min_distance).abs() <= LOAD_DISTANCE_TOL
        };
        if !agrees {
            return Err(Error::InvariantViolation(format!(
                "stated min_distance {stated} but codewords give {}",
                code.min_distance
            )));
        }
        // keep the stated (verified) value so save/load is bit-exact
        Ok(Self {
            min_distance: stated,
            ..code
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_text())
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.as_ref().display())))
    }
}

/// Reads a spherical code file and validates every invariant.
pub fn load_code(path: impl AsRef<Path>) -> Result<SphericalCodePlus> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.as_ref().display())))?;
    SphericalCodePlus::from_text(&text)
}

fn check_shape(codewords: &[TorusSpec]) -> Result<()> {
    let first = codewords
        .first()
        .ok_or_else(|| Error::InvariantViolation("code has no codewords".into()))?;
    let n = first.dim();
    if codewords.iter().any(|c| c.dim() != n) {
        return Err(Error::InvariantViolation("codewords differ in dimension".into()));
    }
    Ok(())
}

fn brute_min_distance(codewords: &[TorusSpec]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in codewords.iter().enumerate() {
        for b in &codewords[i + 1..] {
            best = best.min(distance(a.coords(), b.coords()));
        }
    }
    best
}

fn sum_squares(n: usize, t: f64) -> f64 {
    (0..n).map(|i| (1.0 + i as f64 * t).powi(2)).sum()
}

/// `c(t) = (1, 1 + t, ..., 1 + (N-1) t) / norm`.
pub fn permutation_base(n: usize, t: f64) -> Vec<f64> {
    let s = sum_squares(n, t).sqrt();
    (0..n).map(|i| (1.0 + i as f64 * t) / s).collect()
}

/// Minimum distance `d(t) = t sqrt(2) / norm` of the permutation code of `c(t)`.
pub fn permutation_distance(n: usize, t: f64) -> f64 {
    t * std::f64::consts::SQRT_2 / sum_squares(n, t).sqrt()
}

/// Supremum of `d(t)` over `t > 0`: `2 sqrt(3) / sqrt((N-1) N (2N-1))`.
pub fn max_permutation_distance(n: usize) -> f64 {
    let n = n as f64;
    2.0 * 3f64.sqrt() / ((n - 1.0) * n * (2.0 * n - 1.0)).sqrt()
}

/// All `N!` permutations of `c(t)`, in lexicographic order of the index
/// permutation; the first codeword is `c(t)` itself.
pub fn permutation_code(n: usize, t: f64) -> Result<SphericalCodePlus> {
    permutation_code_capped(n, t, DEFAULT_PERMUTATION_CAP)
}

pub fn permutation_code_capped(n: usize, t: f64, cap: usize) -> Result<SphericalCodePlus> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    let count = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k));
    match count {
        Some(m) if m <= cap => {}
        _ => return Err(Error::DimensionTooLarge { n, cap }),
    }
    let base = permutation_base(n, t);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut codewords = Vec::new();
    loop {
        let c: Vec<f64> = perm.iter().map(|&i| base[i]).collect();
        codewords.push(TorusSpec::new(c)?);
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(SphericalCodePlus {
        codewords,
        min_distance: permutation_distance(n, t),
    })
}

/// Advances `p` to the next lexicographic permutation; false after the last.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len()).rev().find(|&j| p[j] > p[i]).unwrap();
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// Finds `t > 0` with `d(t) = d0` by bisection; `d` is increasing in `t`.
pub fn solve_t(n: usize, d0: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    let sup = max_permutation_distance(n);
    if !(d0 > 0.0 && d0 < sup) {
        return Err(Error::DistanceInfeasible { n, d0, sup });
    }
    let mut hi = 1.0;
    while permutation_distance(n, hi) < d0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::DistanceInfeasible { n, d0, sup });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if permutation_distance(n, mid) < d0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
