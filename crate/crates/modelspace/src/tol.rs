//! Centralized numerical tolerances.
//!
//! Every threshold used by the library and the scenario runner is named
//! here. Quadrature on the boundary grid converges geometrically for the
//! rational functions we integrate, so most identities hold to near
//! machine precision; the looser thresholds account for accumulation in
//! matrix products and SVD-based rank decisions.

/// Unimodularity of Blaschke constants: |c| must equal 1 within this.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Pole proximity guard for evaluating a Blaschke factor: |1 - conj(a) z|
/// below this is treated as an evaluation at the pole.
pub const POLE_TOL: f64 = 1e-13;

/// Default radial guard on Blaschke zeros. Quadrature accuracy degrades as
/// zeros approach the circle; 0.95 keeps the grid size moderate.
pub const ZERO_GUARD: f64 = 0.95;

/// Boundary modulus of an inner function: |theta(w)| = 1 within this for
/// |w| = 1.
pub const BOUNDARY_MODULUS_TOL: f64 = 1e-10;

/// Pairing tolerance when matching zero multisets of two Blaschke products.
pub const ZERO_PAIRING_TOL: f64 = 1e-9;

/// Gram-matrix residual accepted for an orthonormal basis or frame.
pub const GRAM_TOL: f64 = 1e-10;

/// Relative singular-value threshold for rank decisions: sigma counts
/// toward the rank iff sigma > RANK_REL * max(sigma_max, 1).
pub const RANK_REL: f64 = 1e-9;

/// Frobenius residual accepted for the rank-one defect identities.
pub const DEFECT_TOL: f64 = 1e-9;

/// Residual accepted when checking membership of a sampled function in a
/// model space.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Residual accepted for shift-invariance of a subspace:
/// ||(I - P) S P|| below this passes.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Residual accepted for the double-commutation test on compressed tuples.
pub const DOUBLY_COMMUTING_TOL: f64 = 1e-8;

/// Commutator norm accepted when materializing Kronecker operator tuples.
pub const KRONECKER_COMMUTATOR_TOL: f64 = 1e-10;

/// Principal-angle distance ||P1 - P2||_2 under which two subspaces are
/// considered equal.
pub const SUBSPACE_EQ_TOL: f64 = 1e-7;

/// Tighter principal-angle distance for round-trip reconstructions.
pub const ROUNDTRIP_TOL: f64 = 1e-8;

/// Smallest admissible largest-principal-angle cosine between two nonzero
/// submodules of the same Jordan block.
pub const MIN_OVERLAP_COSINE: f64 = 1e-6;

/// Frobenius residual accepted for the truncated resolution of the
/// identity by backward-shift frame vectors.
pub const PARSEVAL_TOL: f64 = 1e-8;

/// Tolerance for assertions evaluated on the interior-degree window of a
/// truncated Hardy space, including recovered generator zeros.
pub const WINDOW_TOL: f64 = 1e-6;

/// Detection gate for forward-shift invariance of truncated Hardy
/// subspaces. Truncating the family phi z^k corrupts invariance at the
/// top degrees by O(rho^(N-2d)) even for genuine submodules, so this gate
/// only screens blatant non-invariance; correctness is certified by the
/// exact membership and reconstruction residuals.
pub const TRUNCATED_INVARIANCE_GATE: f64 = 0.05;

/// Norm below which a projected vector is treated as zero.
pub const PROJECTION_NONZERO_TOL: f64 = 1e-8;

/// Agreement tolerance for identities checked two ways, e.g. the two
/// routes to the projection of the constant function.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Lower bound imposed on user tolerance overrides.
pub const OVERRIDE_FLOOR: f64 = 1e-12;
