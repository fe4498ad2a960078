//! Tensor products of model spaces and their doubly commuting
//! submodules.
//!
//! A Jordan block of the polydisc Hardy space is Q_theta1 x ... x
//! Q_thetan with the tuple of coordinate compressed shifts. Submodules
//! that doubly commute are exactly the tensor products of one-variable
//! submodules; this module materializes the operator tuple as Kronecker
//! products, decides the doubly commuting property, and carries out the
//! constructive decomposition: star-Krylov closure in the trailing
//! coordinates, a reducing split against the rank-one defect directions,
//! and recursion on the remaining factors.

use num_complex::Complex64;

use crate::blaschke::Factorization;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::{build_model_space, DenseOperator, ModelSpace, QuadratureOptions};
use crate::submodule::{build_submodule, classify_submodule};
use crate::subspace::Subspace;
use crate::tol;

type C64 = Complex64;

const MAX_FACTORS: usize = 4;
const SIZE_BUDGET: usize = 4096;

/// Q_Theta = Q_theta1 x ... x Q_thetan, optionally tensored with a
/// leading auxiliary space C^aux_dim, with the coordinate shifts
/// materialized as dense Kronecker operators.
#[derive(Debug, Clone)]
pub struct JordanBlockProduct {
    factors: Vec<ModelSpace>,
    aux_dim: usize,
    total_dim: usize,
    ops: Vec<DenseOperator>,
}

/// The compression of the tuple to an invariant subspace.
#[derive(Debug, Clone)]
pub struct CompressionTuple {
    pub subspace: Subspace,
    pub r_ops: Vec<CMat>,
}

/// Residuals of the invariance test, one per coordinate.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Residuals of the double-commutation test on the compressed tuple,
/// one per unordered coordinate pair i < j.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub pairs: Vec<(usize, usize)>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Materialize the product with an optional auxiliary factor in front.
pub fn build_product(factors: Vec<ModelSpace>, aux_dim: usize) -> Result<JordanBlockProduct> {
    let n = factors.len();
    if n == 0 || n > MAX_FACTORS {
        return Err(Error::FactorCountUnsupported {
            n,
            max: MAX_FACTORS,
        });
    }
    let total_dim: usize = factors.iter().map(|f| f.dim()).product();
    let ambient = total_dim * aux_dim.max(1);
    if ambient > SIZE_BUDGET {
        return Err(Error::SizeBudgetExceeded {
            total: ambient,
            budget: SIZE_BUDGET,
        });
    }
    let mut ops = Vec::with_capacity(n);
    for j in 0..n {
        let mut parts: Vec<CMat> = Vec::with_capacity(n + 1);
        parts.push(CMat::identity(aux_dim.max(1), aux_dim.max(1)));
        for (i, factor) in factors.iter().enumerate() {
            if i == j {
                parts.push(factor.compressed_shift().matrix().clone());
            } else {
                parts.push(CMat::identity(factor.dim(), factor.dim()));
            }
        }
        let op = linalg::kron_all(&parts);
        debug_assert!(linalg::op_norm(&op) <= 1.0 + tol::BOUNDARY_MODULUS_TOL);
        ops.push(DenseOperator::new(op));
    }
    // Kronecker structure makes the tuple doubly commute; verify anyway
    for i in 0..n {
        for j in (i + 1)..n {
            let a = ops[i].matrix();
            let b = ops[j].matrix();
            let comm = linalg::fro_norm(&(a * b - b * a));
            let star = linalg::fro_norm(&(a.adjoint() * b - b * a.adjoint()));
            debug_assert!(
                comm < tol::KRONECKER_COMMUTATOR_TOL && star < tol::KRONECKER_COMMUTATOR_TOL,
                "tuple fails to doubly commute: {comm:e}, {star:e}"
            );
        }
    }
    Ok(JordanBlockProduct {
        factors,
        aux_dim,
        total_dim,
        ops,
    })
}

impl JordanBlockProduct {
    pub fn factors(&self) -> &[ModelSpace] {
        &self.factors
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    /// Product of the model-space dimensions, auxiliary factor excluded.
    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    /// Dimension of the space the operators act on.
    pub fn ambient_dim(&self) -> usize {
        self.total_dim * self.aux_dim.max(1)
    }

    pub fn ops(&self) -> &[DenseOperator] {
        &self.ops
    }
}

/// The tensor-product submodule W_1 x ... x W_n for per-coordinate
/// factorizations (requires aux_dim = 0).
pub fn tensor_submodule(
    jb: &JordanBlockProduct,
    factorizations: &[Factorization],
) -> Result<Subspace> {
    assert_eq!(jb.aux_dim(), 0, "tensor submodules have no auxiliary part");
    if factorizations.len() != jb.factors().len() {
        return Err(Error::AmbientMismatch {
            detail: format!(
                "{} factorizations for {} factors",
                factorizations.len(),
                jb.factors().len()
            ),
        });
    }
    let mut frames = Vec::with_capacity(factorizations.len());
    for (factor, f) in jb.factors().iter().zip(factorizations) {
        frames.push(build_submodule(factor, f)?.frame().clone());
    }
    Subspace::new(linalg::kron_all(&frames))
}

/// Invariance of a subspace under every coordinate operator:
/// residual_j = ||(I - P_M) S_j P_M||.
pub fn is_submodule(jb: &JordanBlockProduct, m: &Subspace) -> Result<InvarianceReport> {
    if m.ambient_dim() != jb.ambient_dim() {
        return Err(Error::AmbientDimMismatch {
            got: m.ambient_dim(),
            expected: jb.ambient_dim(),
        });
    }
    let residuals: Vec<f64> = jb
        .ops
        .iter()
        .map(|op| linalg::containment_residual(m.frame(), &(op.matrix() * m.frame())))
        .collect();
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(InvarianceReport {
        pass: max_residual < tol::INVARIANCE_TOL,
        residuals,
        max_residual,
    })
}

/// Compress the tuple to an invariant subspace.
pub fn compression(jb: &JordanBlockProduct, m: &Subspace) -> Result<CompressionTuple> {
    let report = is_submodule(jb, m)?;
    if !report.pass {
        return Err(Error::NotASubmodule {
            residual: report.max_residual,
        });
    }
    let r_ops = jb
        .ops
        .iter()
        .map(|op| m.frame().adjoint() * op.matrix() * m.frame())
        .collect();
    Ok(CompressionTuple {
        subspace: m.clone(),
        r_ops,
    })
}

/// The doubly commuting test: cross commutators R_i R_j^* - R_j^* R_i of
/// the compressed tuple, for i != j.
pub fn is_doubly_commuting(jb: &JordanBlockProduct, m: &Subspace) -> Result<CommutationReport> {
    let comp = compression(jb, m)?;
    let mut pairs = Vec::new();
    let mut residuals = Vec::new();
    for i in 0..comp.r_ops.len() {
        for j in 0..comp.r_ops.len() {
            if i == j {
                continue;
            }
            let ri = &comp.r_ops[i];
            let rj = &comp.r_ops[j];
            pairs.push((i, j));
            residuals.push(linalg::op_norm(&(ri * rj.adjoint() - rj.adjoint() * ri)));
        }
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(CommutationReport {
        pass: max_residual < tol::DOUBLY_COMMUTING_TOL,
        pairs,
        residuals,
        max_residual,
    })
}

/// Smallest subspace containing `m` that is invariant under the adjoints
/// of the listed coordinate operators (0-based indices).
pub fn star_krylov_closure(jb: &JordanBlockProduct, m: &Subspace, coords: &[usize]) -> Subspace {
    let adjoints: Vec<CMat> = coords.iter().map(|&j| jb.ops[j].matrix().adjoint()).collect();
    let mut current = m.frame().clone();
    loop {
        let dim = current.ncols();
        let mut blocks = vec![current.clone()];
        for adj in &adjoints {
            blocks.push(adj * &current);
        }
        let stacked = hstack(&blocks);
        let next = linalg::orthonormal_range(&stacked);
        if next.ncols() == dim {
            return Subspace::new(next).expect("orthonormal by construction");
        }
        current = next;
    }
}

fn hstack(blocks: &[CMat]) -> CMat {
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        out.view_mut((0, offset), (rows, b.ncols())).copy_from(b);
        offset += b.ncols();
    }
    out
}

/// max_j of ||(I-P)S_j P|| and ||(I-P)S_j^* P||: zero iff m reduces the tuple.
pub fn reducing_residual(jb: &JordanBlockProduct, m: &Subspace) -> f64 {
    let mut worst = 0.0f64;
    for op in &jb.ops {
        let fwd = linalg::containment_residual(m.frame(), &(op.matrix() * m.frame()));
        let bwd = linalg::containment_residual(m.frame(), &(op.matrix().adjoint() * m.frame()));
        worst = worst.max(fwd).max(bwd);
    }
    worst
}

/// Unit vector spanning the tensor product of the backward-shift
/// directions T_z^* theta_j, in product coordinates.
fn defect_direction(jb: &JordanBlockProduct) -> CVec {
    let mut u = CVec::from_element(1, C64::new(1.0, 0.0));
    for factor in &jb.factors {
        let w = factor.backward_shift_theta(1).vector;
        let normalized = w.coeffs() * C64::new(1.0 / w.norm(), 0.0);
        u = u.kronecker(&normalized);
    }
    u
}

/// Recover L from a reducing submodule M = L x Q_Theta of the product
/// with a leading auxiliary space (aux_dim >= 1).
///
/// The proof route: the projections P_M and I x P_{C T_z^* theta_1} x ...
/// commute, their product projects onto M-tilde = L x (C T_z^* theta_1)
/// x ..., and contracting M-tilde against the defect direction exposes L.
pub fn reducing_split(jb: &JordanBlockProduct, m: &Subspace) -> Result<Subspace> {
    assert!(jb.aux_dim >= 1, "reducing_split needs an auxiliary space");
    let residual = reducing_residual(jb, m);
    if residual > tol::INVARIANCE_TOL {
        return Err(Error::NotReducing { residual });
    }
    let aux = jb.aux_dim;
    let d = jb.total_dim;
    let u = defect_direction(jb);
    let kernel_proj = linalg::kron(
        &CMat::identity(aux, aux),
        &linalg::rank_one(&u, &u),
    );
    let m_tilde = linalg::orthonormal_range(&(m.projection() * kernel_proj));

    // each column is ell (x) u; contract against u to read off ell
    let mut stacked = CMat::zeros(aux, m_tilde.ncols());
    for col in 0..m_tilde.ncols() {
        for h in 0..aux {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..d {
                acc += m_tilde[(h * d + p, col)] * u[p].conj();
            }
            stacked[(h, col)] = acc;
        }
    }
    let l = Subspace::from_span(&stacked);

    let reconstruction = linalg::kron(l.frame(), &CMat::identity(d, d));
    let distance = linalg::principal_angle_distance(&reconstruction, m.frame());
    if distance > tol::SUBSPACE_EQ_TOL {
        return Err(Error::ReconstructionMismatch {
            distance,
            tol: tol::SUBSPACE_EQ_TOL,
        });
    }
    Ok(l)
}

/// Decompose a doubly commuting submodule of Q_Theta as W_1 x ... x W_n
/// and classify each factor. Follows the constructive recursion: the
/// star-Krylov closure over coordinates 2..n reduces those coordinates,
/// the reducing split with Q_theta1 as the auxiliary space produces W_1,
/// and a second split inside W_1 x (rest) peels off the remaining factor.
pub fn decompose_doubly_commuting(
    jb: &JordanBlockProduct,
    m: &Subspace,
) -> Result<Vec<(Subspace, Factorization)>> {
    assert_eq!(jb.aux_dim, 0, "decompose expects a pure Jordan block");
    if m.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let commutation = is_doubly_commuting(jb, m)?;
    if !commutation.pass {
        return Err(Error::NotDoublyCommuting {
            residual: commutation.max_residual,
        });
    }
    let parts = decompose_recursive(jb.factors(), m)?;

    let frames: Vec<CMat> = parts.iter().map(|(w, _)| w.frame().clone()).collect();
    let reconstruction = linalg::kron_all(&frames);
    let distance = linalg::principal_angle_distance(&reconstruction, m.frame());
    if distance > tol::SUBSPACE_EQ_TOL {
        return Err(Error::ReconstructionMismatch {
            distance,
            tol: tol::SUBSPACE_EQ_TOL,
        });
    }
    let product_dim: usize = parts.iter().map(|(w, _)| w.dim()).product();
    debug_assert_eq!(product_dim, m.dim());
    Ok(parts)
}

fn decompose_recursive(
    factors: &[ModelSpace],
    m: &Subspace,
) -> Result<Vec<(Subspace, Factorization)>> {
    if factors.len() == 1 {
        let f = classify_submodule(&factors[0], m)?;
        return Ok(vec![(m.clone(), f)]);
    }
    let head = &factors[0];
    let rest = &factors[1..];
    let rest_dim: usize = rest.iter().map(|f| f.dim()).product();

    // closure over the trailing coordinates reduces them
    let sub_jb = build_product(rest.to_vec(), head.dim())?;
    let all_coords: Vec<usize> = (0..rest.len()).collect();
    let m1 = star_krylov_closure(&sub_jb, m, &all_coords);
    let w1 = reducing_split(&sub_jb, &m1)?;
    let f1 = classify_submodule(head, &w1)?;

    // isometric frame eta_1 e_k^{(phi_1)} of W_1: in this basis the
    // compression of S_theta1 is exactly the matrix of S_phi1
    let v = eta_phi_frame(head, &f1)?;
    debug_assert!(
        linalg::principal_angle_distance(&v, w1.frame()) < tol::SUBSPACE_EQ_TOL,
        "eta-phi frame spans W_1"
    );

    // move M into Q_phi1 x (rest) coordinates, transpose so the unknown
    // factor leads, and split again
    let m_conj = linalg::kron(&v.adjoint(), &CMat::identity(rest_dim, rest_dim)) * m.frame();
    let m_transposed = permute_kron_blocks(&m_conj, f1.phi.degree(), rest_dim);
    let phi_space = build_model_space(&f1.phi, &QuadratureOptions::default())?;
    let split_jb = build_product(vec![phi_space], rest_dim)?;
    let e1 = reducing_split(&split_jb, &Subspace::from_span(&m_transposed))?;

    let mut parts = vec![(Subspace::new(v)?, f1)];
    parts.extend(decompose_recursive(rest, &e1)?);
    Ok(parts)
}

/// Coordinates in Q_theta of the orthonormal family eta * e_k^{(phi)},
/// where e^{(phi)} is the Takenaka-Malmquist basis of Q_phi. In this
/// frame the compression of S_theta is exactly the matrix of S_phi.
fn eta_phi_frame(ms: &ModelSpace, f: &Factorization) -> Result<CMat> {
    let eta_samples = ms.sample(&f.eta)?;
    let zeros = f.phi.zeros();
    let mut out = CMat::zeros(ms.dim(), f.phi.degree());
    for k in 0..f.phi.degree() {
        let mut samples = CVec::zeros(ms.grid_len());
        for (l, &w) in ms.grid().iter().enumerate() {
            let mut e_k = C64::new(1.0, 0.0);
            for &a in zeros.iter().take(k) {
                e_k *= (w - a) / (C64::new(1.0, 0.0) - a.conj() * w);
            }
            let a = zeros[k];
            e_k *= C64::new((1.0 - a.norm_sqr()).sqrt(), 0.0)
                / (C64::new(1.0, 0.0) - a.conj() * w);
            samples[l] = eta_samples[l] * e_k;
        }
        let projected = ms.project_ambient(&samples);
        debug_assert!(projected.residual < tol::MEMBERSHIP_TOL);
        out.set_column(k, projected.vector.coeffs());
    }
    Ok(out)
}

/// Reindex frame rows from (a, p) = a * right + p to (p, a) = p * left + a.
pub fn permute_kron_blocks(frame: &CMat, left: usize, right: usize) -> CMat {
    assert_eq!(frame.nrows(), left * right);
    let mut out = CMat::zeros(frame.nrows(), frame.ncols());
    for a in 0..left {
        for p in 0..right {
            for col in 0..frame.ncols() {
                out[(p * left + a, col)] = frame[(a * right + p, col)];
            }
        }
    }
    out
}
