//! Analog joint source-channel codes built from curves on layers of flat tori.
//!
//! A source value `x` in `[0, 1)` is mapped onto one of several closed curves,
//! each wound around a different flat torus inside the unit sphere of
//! `R^{2N}`. The tori are indexed by a spherical code, so curves on different
//! layers stay apart, and each curve's winding is chosen so that its folds stay
//! apart as well.
//!
//! ```
//! use torus_layer::{aligned_windings, build_code, permutation_code, WindingVector};
//!
//! let layers = permutation_code(3, 0.6).unwrap();
//! let base = WindingVector::new(vec![1, 2, 198]).unwrap();
//! let windings = aligned_windings(&layers, &base);
//! let code = build_code(layers, windings, 1.0, 0.75).unwrap();
//!
//! let y = code.encode(0.3).unwrap();
//! assert!((code.decode(&y).unwrap() - 0.3).abs() < 1e-9);
//! ```

pub mod codec;
pub mod design;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod sim;
pub mod spherical;
pub mod textfmt;

pub use codec::{
    aligned_windings, build_code, curve_point, AnalyticMse, CurveSpec, SeparationPolicy,
    TorusLayerCode,
};
pub use error::{Error, Result};
pub use geometry::{
    chordal_bounds, flat_distance, invert_phi, phi, same_torus_distance, torus_distance,
    AmbientPoint, TorusSpec,
};
pub use lattice::{
    hexagonal_sequence, packing_density, projected_dual_basis, projection_minimum,
    scaled_lifting, shortest_projection, RectLattice, WindingVector,
};
pub use sim::{awgn, companding, gaussian_intervals, linear_baseline, run_sweep, SourceModel};
pub use spherical::{load_code, permutation_code, solve_t, SphericalCodePlus};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tori.md")]
    mod tori {}
    #[doc = include_str!("../../../book/src/layers.md")]
    mod layers {}
    #[doc = include_str!("../../../book/src/windings.md")]
    mod windings {}
    #[doc = include_str!("../../../book/src/codec.md")]
    mod codec {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
