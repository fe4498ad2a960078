//! Submodules of a one-variable model space: the invariant subspaces of
//! the compressed shift S_theta.
//!
//! Every submodule of Q_theta is eta Q_phi for an inner factorization
//! theta = eta phi. This module builds the subspace for a given
//! factorization, recovers the factorization from a given invariant
//! subspace, and checks the structural properties that make the
//! correspondence work: the projected backward-shift vector never dies,
//! distinct nonzero submodules are never orthogonal, and the star-Krylov
//! closure of any nonzero submodule is the whole space.

use num_complex::Complex64;

use crate::blaschke::{BlaschkeProduct, Factorization};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::ModelSpace;
use crate::subspace::Subspace;
use crate::tol;

type C64 = Complex64;

/// Relative threshold for deciding that a Taylor row of the frame
/// vanishes at a zero of theta.
const VANISH_REL: f64 = 1e-6;

/// Orthonormal frame of eta Q_phi inside Q_theta, built by applying the
/// projection identity P = T_eta P_{Q_phi} T_eta^* to the basis of
/// Q_theta and orthonormalizing the range.
pub fn build_submodule(ms: &ModelSpace, f: &Factorization) -> Result<Subspace> {
    if !f.factors(ms.theta()) {
        return Err(Error::NotAFactor {
            eta: f.eta.to_string(),
            phi: f.phi.to_string(),
            theta: ms.theta().to_string(),
        });
    }
    if f.phi.degree() == 0 {
        return Ok(Subspace::zero(ms.dim()));
    }
    let proj = submodule_projection(ms, f)?;
    let w = Subspace::from_span(&proj);
    debug_assert_eq!(w.dim(), f.phi.degree());
    Ok(w)
}

/// Matrix of T_eta P_{Q_phi} T_eta^* in the basis of Q_theta.
fn submodule_projection(ms: &ModelSpace, f: &Factorization) -> Result<CMat> {
    let grid_len = ms.grid_len();
    let eta_samples = ms.sample(&f.eta)?;
    let phi_basis = sample_basis_of(ms, &f.phi)?;
    let inv_k = C64::new(1.0 / grid_len as f64, 0.0);

    let mut out = CMat::zeros(ms.dim(), ms.dim());
    for j in 0..ms.dim() {
        // T_eta^* on samples: multiply by conj(eta) (inner on the circle)
        let mut g = CVec::zeros(grid_len);
        for l in 0..grid_len {
            g[l] = ms.basis_samples()[(l, j)] * eta_samples[l].conj();
        }
        // project onto Q_phi, synthesize, multiply back by eta
        let coeffs = phi_basis.adjoint() * &g * inv_k;
        let in_phi = &phi_basis * coeffs;
        let mut h = CVec::zeros(grid_len);
        for l in 0..grid_len {
            h[l] = in_phi[l] * eta_samples[l];
        }
        let projected = ms.project_ambient(&h);
        out.set_column(j, projected.vector.coeffs());
    }
    Ok(out)
}

/// Samples of the Takenaka-Malmquist basis of another inner function on
/// the grid of `ms`; used to project onto Q_phi for phi dividing theta.
fn sample_basis_of(ms: &ModelSpace, phi: &BlaschkeProduct) -> Result<CMat> {
    let zeros = phi.zeros();
    let grid = ms.grid();
    let mut out = CMat::zeros(grid.len(), zeros.len());
    for (l, &w) in grid.iter().enumerate() {
        let mut prefix = C64::new(1.0, 0.0);
        for (k, &a) in zeros.iter().enumerate() {
            let denom = C64::new(1.0, 0.0) - a.conj() * w;
            let normalizer = (1.0 - a.norm_sqr()).sqrt();
            out[(l, k)] = prefix * C64::new(normalizer, 0.0) / denom;
            prefix *= (w - a) / denom;
        }
    }
    Ok(out)
}

/// ||(I - P_W) S_theta P_W||_2, the invariance residual of a subspace.
pub fn invariance_residual(ms: &ModelSpace, w: &Subspace) -> f64 {
    if w.is_zero() {
        return 0.0;
    }
    let s = ms.compressed_shift();
    let image = s.matrix() * w.frame();
    linalg::containment_residual(w.frame(), &image)
}

/// Recover the factorization (eta, phi) with W = eta Q_phi.
///
/// The primary path reads off the zeros of eta by testing, at each zero
/// of theta, how many leading Taylor rows of the frame vanish; the
/// brute-force fallback scans every factorization of theta.
pub fn classify_submodule(ms: &ModelSpace, w: &Subspace) -> Result<Factorization> {
    if w.ambient_dim() != ms.dim() {
        return Err(Error::AmbientDimMismatch {
            got: w.ambient_dim(),
            expected: ms.dim(),
        });
    }
    if w.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let residual = invariance_residual(ms, w);
    if residual > tol::INVARIANCE_TOL {
        return Err(Error::NotInvariant {
            residual,
            tol: tol::INVARIANCE_TOL,
        });
    }

    let mut eta_zeros: Vec<C64> = Vec::new();
    for (zero, mult) in ms.theta().distinct_zeros() {
        let rows = ms.basis_taylor_at(zero, mult - 1)?;
        let table = rows * w.frame();
        let norms: Vec<f64> = (0..mult).map(|s| table.row(s).norm()).collect();
        let scale = norms.iter().cloned().fold(1.0, f64::max);
        let order = norms
            .iter()
            .position(|&n| n > VANISH_REL * scale)
            .unwrap_or(mult);
        for _ in 0..order {
            eta_zeros.push(zero);
        }
    }
    let eta = BlaschkeProduct::from_parts(C64::new(1.0, 0.0), eta_zeros);
    let phi_zeros = multiset_difference(ms.theta().zeros(), eta.zeros());
    let candidate = Factorization::new(
        eta,
        BlaschkeProduct::from_parts(ms.theta().constant(), phi_zeros),
    );
    if candidate.phi.degree() > 0 {
        let rebuilt = build_submodule(ms, &candidate)?;
        if rebuilt.principal_angle_distance(w) < tol::SUBSPACE_EQ_TOL {
            return Ok(candidate);
        }
    }

    // certain but exponential: match against every factorization
    let mut best = f64::INFINITY;
    for f in ms.theta().factorizations()? {
        if f.phi.degree() != w.dim() {
            continue;
        }
        let rebuilt = build_submodule(ms, &f)?;
        let distance = rebuilt.principal_angle_distance(w);
        if distance < tol::SUBSPACE_EQ_TOL {
            return Ok(f);
        }
        best = best.min(distance);
    }
    Err(Error::NoMatch { best })
}

fn multiset_difference(all: &[C64], remove: &[C64]) -> Vec<C64> {
    let mut rest = all.to_vec();
    for r in remove {
        if let Some(pos) = rest
            .iter()
            .position(|a| (a - r).norm() <= tol::ZERO_PAIRING_TOL)
        {
            rest.remove(pos);
        }
    }
    rest
}

/// Outcome of the projected-cyclicity checks on a nonzero submodule.
#[derive(Debug, Clone)]
pub struct CyclicReport {
    /// ||P_W T_z^* theta||; must stay away from zero.
    pub projected_norm: f64,
    /// ||P_W T_z^* theta - T_eta T_z^* phi||.
    pub transport_residual: f64,
    /// Eigenvalue of P_W P_{C T_z^* theta} P_W on the projected vector.
    pub alpha: f64,
    /// Defect of the eigen-relation at the predicted alpha.
    pub eigen_residual: f64,
    /// Whether the projected Krylov family spans W.
    pub cyclic_spans: bool,
    pub pass: bool,
}

/// Check the distinguished properties of P_W T_z^* theta on a nonzero
/// submodule W.
pub fn projected_cyclic_checks(ms: &ModelSpace, w: &Subspace) -> Result<CyclicReport> {
    if w.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let f = classify_submodule(ms, w)?;
    let proj = w.projection();
    let t_theta = ms.backward_shift_theta(1).vector;
    let u = &proj * t_theta.coeffs();
    let projected_norm = u.norm();

    // proof identity: P_W T_z^* theta = T_eta T_z^* phi
    let phi_samples = ms.sample(&f.phi)?;
    let t_phi_samples = ms.backward_shift_samples(&phi_samples);
    let eta_samples = ms.sample(&f.eta)?;
    let mut transported = CVec::zeros(ms.grid_len());
    for l in 0..ms.grid_len() {
        transported[l] = eta_samples[l] * t_phi_samples[l];
    }
    let transported = ms.project_ambient(&transported);
    let transport_residual = (&u - transported.vector.coeffs()).norm();

    // eigen-relation with alpha = (||T_z^* phi|| / ||T_z^* theta||)^2
    let norm_t_phi_sq = 1.0 - f.phi.at_origin().norm_sqr();
    let norm_t_theta_sq = 1.0 - ms.theta().at_origin().norm_sqr();
    let alpha = norm_t_phi_sq / norm_t_theta_sq;
    let f_vec = t_theta.coeffs();
    let p_line = linalg::rank_one(f_vec, f_vec) / C64::new(f_vec.norm_squared(), 0.0);
    let lhs = &proj * (&p_line * (&proj * &u));
    let eigen_residual = (lhs - u.scale(alpha)).norm();

    // projected Krylov family P_W S^{*m} (P_W T_z^* theta), m < dim Q_theta
    let s_adj = ms.compressed_shift().matrix().adjoint();
    let mut krylov = CMat::zeros(ms.dim(), ms.dim());
    let mut v = u.clone();
    for m in 0..ms.dim() {
        krylov.set_column(m, &(&proj * &v));
        v = &s_adj * v;
    }
    let cyclic_spans = linalg::numeric_rank(&krylov) == w.dim();

    let pass = projected_norm > tol::PROJECTION_NONZERO_TOL
        && transport_residual < tol::DEFECT_TOL
        && eigen_residual < tol::DEFECT_TOL
        && cyclic_spans;
    Ok(CyclicReport {
        projected_norm,
        transport_residual,
        alpha,
        eigen_residual,
        cyclic_spans,
        pass,
    })
}

/// Largest cosine between two nonzero submodules. Nonzero submodules of
/// the same Jordan block can never be orthogonal, so this must stay
/// above `tol::MIN_OVERLAP_COSINE`.
pub fn orthogonality_impossibility(ms: &ModelSpace, w1: &Subspace, w2: &Subspace) -> Result<f64> {
    if w1.is_zero() || w2.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let _ = ms;
    Ok(w1.max_overlap_cosine(w2))
}

/// Krylov closure of W under S_theta^*, powers 0..dim-1. For a nonzero
/// submodule this is the whole of Q_theta.
pub fn star_closure_full(ms: &ModelSpace, w: &Subspace) -> Result<Subspace> {
    if w.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let s_adj = ms.compressed_shift().matrix().adjoint();
    let mut blocks = CMat::zeros(ms.dim(), ms.dim() * w.dim());
    let mut current = w.frame().clone();
    for p in 0..ms.dim() {
        blocks
            .view_mut((0, p * w.dim()), (ms.dim(), w.dim()))
            .copy_from(&current);
        current = &s_adj * current;
    }
    Ok(Subspace::from_span(&blocks))
}
