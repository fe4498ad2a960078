//! Mixed spaces: a degree-truncated polynomial Hardy space tensored with
//! a Jordan block, and their doubly commuting submodules.
//!
//! Truncation keeps everything finite-dimensional but corrupts the top
//! degrees: the truncated shifts are partial isometries that act exactly
//! like the true shifts only below the degree cap. All certifications are
//! therefore evaluated on interior windows. Shift-invariant subspaces
//! generated by an inner function phi are represented by the span of the
//! degree-N Taylor truncations of phi * z^k; the generator is detected
//! through the windowed product of shift defects and then refined by a
//! Gauss-Newton iteration on the exact truncation-membership residual,
//! which vanishes identically at the true zeros.

use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::model::ModelSpace;
use crate::subspace::Subspace;
use crate::tensor::{
    build_product, decompose_doubly_commuting, reducing_split, star_krylov_closure,
    JordanBlockProduct,
};
use crate::tol;

type C64 = Complex64;

/// Guard on recovered generator zeros; slightly above the construction
/// guard so refined zeros near the edge survive.
const ROOT_KEEP_RADIUS: f64 = 0.98;
/// Gap ratio sigma_2/sigma_1 above which the windowed defect product is
/// not credibly rank one.
const RANK_ONE_GAP: f64 = 0.3;

/// Polynomials in num_vars variables with per-variable degree at most
/// degree_cap, under the H^2 (coefficient) inner product.
#[derive(Debug, Clone)]
pub struct TruncatedHardy {
    num_vars: usize,
    degree_cap: usize,
}

impl TruncatedHardy {
    pub fn new(num_vars: usize, degree_cap: usize) -> Self {
        assert!(num_vars >= 1 && degree_cap >= 1);
        Self {
            num_vars,
            degree_cap,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn dim(&self) -> usize {
        (self.degree_cap + 1).pow(self.num_vars as u32)
    }

    fn var_dim(&self) -> usize {
        self.degree_cap + 1
    }

    /// The truncated shift in one variable: z^k -> z^{k+1}, top killed.
    fn shift_block(&self) -> CMat {
        let n = self.var_dim();
        let mut m = CMat::zeros(n, n);
        for k in 0..n - 1 {
            m[(k + 1, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// The truncated shift of variable `var` on the full space
    /// (first variable slowest).
    pub fn shift_op(&self, var: usize) -> CMat {
        assert!(var < self.num_vars);
        let mut parts = Vec::with_capacity(self.num_vars);
        for i in 0..self.num_vars {
            if i == var {
                parts.push(self.shift_block());
            } else {
                parts.push(CMat::identity(self.var_dim(), self.var_dim()));
            }
        }
        linalg::kron_all(&parts)
    }

    /// Diagonal projector onto multi-indices with every k_i <= cap.
    pub fn window_projector(&self, cap: usize) -> CMat {
        let dims = vec![self.var_dim(); self.num_vars];
        let mut m = CMat::zeros(self.dim(), self.dim());
        for idx in 0..self.dim() {
            let multi = unflatten(idx, &dims);
            if multi.iter().all(|&k| k <= cap) {
                m[(idx, idx)] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Diagonal projector onto multi-indices with k_var <= cap.
    fn var_degree_projector(&self, var: usize, cap: usize) -> CMat {
        let dims = vec![self.var_dim(); self.num_vars];
        let mut m = CMat::zeros(self.dim(), self.dim());
        for idx in 0..self.dim() {
            let multi = unflatten(idx, &dims);
            if multi[var] <= cap {
                m[(idx, idx)] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Coefficient vector of the truncation of prod_i phi_i(z_i), one
    /// generator per variable.
    pub fn truncate_separable(&self, gens: &[BlaschkeProduct]) -> CVec {
        assert_eq!(gens.len(), self.num_vars);
        let mut v = CVec::from_element(1, C64::new(1.0, 0.0));
        for g in gens {
            let coeffs = g.taylor_coeffs(self.degree_cap);
            let col = CVec::from_vec(coeffs);
            v = v.kronecker(&col);
        }
        v
    }
}

fn unflatten(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        out[i] = idx % dims[i];
        idx /= dims[i];
    }
    out
}

/// The mixed space H^2(D^{n-r}) x Q_Theta at truncation level N, with the
/// Hardy shifts T_i and the model operators S_j materialized on the
/// product ambient (Hardy part slowest).
#[derive(Debug)]
pub struct MixedSpace {
    hardy: TruncatedHardy,
    /// Jordan block with the Hardy space as the auxiliary factor; its ops
    /// are the S_j of the mixed space.
    jordan_aux: JordanBlockProduct,
    /// The same model factors without the auxiliary part, for the final
    /// tensor decomposition.
    jordan_pure: JordanBlockProduct,
    t_ops: Vec<CMat>,
}

impl MixedSpace {
    pub fn new(hardy: TruncatedHardy, factors: Vec<ModelSpace>) -> Result<Self> {
        let jordan_pure = build_product(factors.clone(), 0)?;
        let jordan_aux = build_product(factors, hardy.dim())?;
        let model_dim = jordan_pure.total_dim();
        let t_ops: Vec<CMat> = (0..hardy.num_vars())
            .map(|i| {
                linalg::kron(
                    &hardy.shift_op(i),
                    &CMat::identity(model_dim, model_dim),
                )
            })
            .collect();
        Ok(Self {
            hardy,
            jordan_aux,
            jordan_pure,
            t_ops,
        })
    }

    pub fn hardy(&self) -> &TruncatedHardy {
        &self.hardy
    }

    pub fn model_factors(&self) -> &[ModelSpace] {
        self.jordan_pure.factors()
    }

    pub fn ambient_dim(&self) -> usize {
        self.jordan_aux.ambient_dim()
    }

    pub fn model_dim(&self) -> usize {
        self.jordan_pure.total_dim()
    }

    pub fn hardy_ops(&self) -> &[CMat] {
        &self.t_ops
    }

    pub fn model_ops(&self) -> Vec<CMat> {
        self.jordan_aux
            .ops()
            .iter()
            .map(|op| op.matrix().clone())
            .collect()
    }

    /// The tensor submodule (inner-generator part) x (model part).
    pub fn assemble(&self, hardy_part: &Subspace, model_part: &Subspace) -> Result<Subspace> {
        Subspace::new(linalg::kron(hardy_part.frame(), model_part.frame()))
    }
}

/// Frame of the truncation of phi H^2 inside a truncated Hardy space:
/// the span of trunc(phi * z^k) over per-variable shifts k_i <= N - deg_i.
pub fn build_inner_submodule(
    th: &TruncatedHardy,
    gens: &[BlaschkeProduct],
) -> Result<Subspace> {
    if gens.len() != th.num_vars() {
        return Err(Error::AmbientMismatch {
            detail: format!(
                "{} generators for {} variables",
                gens.len(),
                th.num_vars()
            ),
        });
    }
    let n = th.degree_cap();
    for g in gens {
        if 2 * g.degree() > n {
            return Err(Error::DegreeBudget {
                degree: g.degree(),
                max: n / 2,
                cap: n,
            });
        }
    }
    let mut frames = Vec::with_capacity(gens.len());
    for g in gens {
        let coeffs = g.taylor_coeffs(n);
        let cols = n - g.degree() + 1;
        let mut fam = CMat::zeros(n + 1, cols);
        for k in 0..cols {
            for m in 0..=(n - k) {
                fam[(m + k, k)] = coeffs[m];
            }
        }
        frames.push(linalg::orthonormal_range(&fam));
    }
    Subspace::new(linalg::kron_all(&frames))
}

/// Orthonormal basis of the part of `s` supported strictly below the
/// degree cap in variable `var` (tensored with anything in the other
/// legs); the truncated shift acts exactly like the true shift there.
fn interior_part(th: &TruncatedHardy, model_dim: usize, s: &Subspace, var: usize) -> CMat {
    let proj = th.var_degree_projector(var, th.degree_cap() - 1);
    let big_proj = if model_dim > 1 || s.ambient_dim() != th.dim() {
        linalg::kron(&proj, &CMat::identity(model_dim, model_dim))
    } else {
        proj
    };
    let outside = (CMat::identity(s.ambient_dim(), s.ambient_dim()) - big_proj) * s.frame();
    let null = linalg::nullspace(&outside);
    s.frame() * null
}

/// Windowed invariance residual of `s` under the truncated shift of each
/// variable: inputs restricted to the interior of the window, where
/// truncation is exact.
pub fn windowed_invariance_residuals(
    th: &TruncatedHardy,
    model_dim: usize,
    ops: &[CMat],
    s: &Subspace,
) -> Vec<f64> {
    ops.iter()
        .enumerate()
        .map(|(var, op)| {
            let interior = interior_part(th, model_dim, s, var);
            if interior.ncols() == 0 {
                return 0.0;
            }
            linalg::containment_residual(s.frame(), &(op * interior))
        })
        .collect()
}

/// Result of extracting the Beurling generator of a shift-invariant
/// subspace of a truncated Hardy space.
#[derive(Debug, Clone)]
pub struct BeurlingExtract {
    /// One recovered inner factor per variable, canonical constant 1.
    pub per_var: Vec<BlaschkeProduct>,
    /// Membership residual of the truncated candidate in the subspace.
    pub residual: f64,
    /// sigma_2 / sigma_1 of the windowed defect product.
    pub rank_gap: f64,
}

/// Recover the inner generator of s = trunc(phi H^2): the product of the
/// shift defects restricted to s is, on the interior window, a rank-one
/// projection in the direction of trunc(phi).
pub fn beurling_extract(th: &TruncatedHardy, s: &Subspace) -> Result<BeurlingExtract> {
    if s.ambient_dim() != th.dim() {
        return Err(Error::AmbientDimMismatch {
            got: s.ambient_dim(),
            expected: th.dim(),
        });
    }
    if s.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    let ops: Vec<CMat> = (0..th.num_vars()).map(|i| th.shift_op(i)).collect();
    let inv = windowed_invariance_residuals(th, 1, &ops, s);
    let worst = inv.iter().cloned().fold(0.0, f64::max);
    if worst > tol::TRUNCATED_INVARIANCE_GATE {
        return Err(Error::NotInvariant {
            residual: worst,
            tol: tol::TRUNCATED_INVARIANCE_GATE,
        });
    }

    // windowed product of defects (I - T_i P T_i^*) P
    let p = s.projection();
    let eye = CMat::identity(th.dim(), th.dim());
    let mut defect = p.clone();
    for op in &ops {
        let factor = &eye - op * &p * op.adjoint();
        defect = factor * defect;
    }
    let window = th.window_projector(th.degree_cap() / 2);
    let windowed = &window * defect * &window;
    let svd = linalg::jacobi_svd(&windowed);
    let sigma1 = svd.sigma.first().copied().unwrap_or(0.0);
    let sigma2 = svd.sigma.get(1).copied().unwrap_or(0.0);
    if sigma1 < 1e-6 {
        return Err(Error::NotRankOne { gap: 1.0 });
    }
    let rank_gap = sigma2 / sigma1;
    if rank_gap > RANK_ONE_GAP {
        return Err(Error::NotRankOne { gap: rank_gap });
    }
    let g = svd.u.column(0).into_owned();

    // per-variable window polynomials and their inner roots
    let dims = vec![th.var_dim(); th.num_vars()];
    let mut roots_per_var: Vec<Vec<C64>> = Vec::with_capacity(th.num_vars());
    for var in 0..th.num_vars() {
        let mat = matricize(&g, &dims, var);
        let leg = linalg::jacobi_svd(&mat).u.column(0).into_owned();
        let coeffs: Vec<C64> = leg.iter().cloned().take(th.degree_cap() / 2 + 1).collect();
        let mut roots = polynomial_roots(&coeffs);
        roots.retain(|r| r.norm() <= ROOT_KEEP_RADIUS);
        roots_per_var.push(roots);
    }

    // refine against the exact membership residual
    let refined = refine_generator_zeros(th, s, roots_per_var)?;
    let gens: Vec<BlaschkeProduct> = refined
        .iter()
        .map(|roots| BlaschkeProduct::from_parts(C64::new(1.0, 0.0), roots.clone()))
        .collect();
    let candidate = th.truncate_separable(&gens);
    let normalized = &candidate * C64::new(1.0 / candidate.norm(), 0.0);
    let residual = (&normalized - &p * &normalized).norm();
    if residual > tol::WINDOW_TOL {
        return Err(Error::NotRankOne { gap: residual });
    }
    Ok(BeurlingExtract {
        per_var: gens,
        residual,
        rank_gap,
    })
}

/// Reshape a vector over `dims` (first index slowest) into the
/// dims[leg] x rest matrix with the chosen leg as rows.
fn matricize(v: &CVec, dims: &[usize], leg: usize) -> CMat {
    let rows = dims[leg];
    let total: usize = dims.iter().product();
    let cols = total / rows;
    let mut out = CMat::zeros(rows, cols);
    for idx in 0..total {
        let multi = unflatten(idx, dims);
        let r = multi[leg];
        let mut c = 0;
        for (i, &k) in multi.iter().enumerate() {
            if i == leg {
                continue;
            }
            c = c * dims[i] + k;
        }
        out[(r, c)] = v[idx];
    }
    out
}

/// Roots of a complex polynomial by Durand-Kerner iteration.
fn polynomial_roots(coeffs: &[C64]) -> Vec<C64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut trimmed: Vec<C64> = coeffs.to_vec();
    while let Some(last) = trimmed.last() {
        if last.norm() <= 1e-12 * scale && trimmed.len() > 1 {
            trimmed.pop();
        } else {
            break;
        }
    }
    let deg = trimmed.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = trimmed[deg];
    let monic: Vec<C64> = trimmed.iter().map(|c| c / lead).collect();
    let eval = |x: C64| -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * x + c;
        }
        acc
    };
    let mut roots: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(0.7, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..deg {
                if j != k {
                    denom *= roots[k] - roots[j];
                }
            }
            if denom.norm() < 1e-30 {
                continue;
            }
            let step = eval(roots[k]) / denom;
            roots[k] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-13 {
            break;
        }
    }
    roots
}

/// Gauss-Newton refinement of per-variable generator zeros against the
/// residual (I - P_s) trunc(prod_i phi_i), which vanishes exactly at the
/// true zeros.
fn refine_generator_zeros(
    th: &TruncatedHardy,
    s: &Subspace,
    initial: Vec<Vec<C64>>,
) -> Result<Vec<Vec<C64>>> {
    let n_params: usize = initial.iter().map(|r| r.len()).sum();
    if n_params == 0 {
        return Ok(initial);
    }
    let p = s.projection();
    let eye = CMat::identity(th.dim(), th.dim());
    let complement = &eye - &p;
    let pack = |roots: &[Vec<C64>]| -> Vec<f64> {
        roots
            .iter()
            .flat_map(|v| v.iter().flat_map(|c| [c.re, c.im]))
            .collect()
    };
    let unpack = |params: &[f64]| -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(initial.len());
        let mut i = 0;
        for var_roots in &initial {
            let mut v = Vec::with_capacity(var_roots.len());
            for _ in 0..var_roots.len() {
                v.push(C64::new(params[i], params[i + 1]));
                i += 2;
            }
            out.push(v);
        }
        out
    };
    let residual_vec = |params: &[f64]| -> CVec {
        let roots = unpack(params);
        let gens: Vec<BlaschkeProduct> = roots
            .iter()
            .map(|r| BlaschkeProduct::from_parts(C64::new(1.0, 0.0), r.clone()))
            .collect();
        let t = th.truncate_separable(&gens);
        let norm = t.norm().max(1e-12);
        (&complement * t) * C64::new(1.0 / norm, 0.0)
    };

    let mut params = pack(&initial);
    let h = 1e-7;
    for _ in 0..40 {
        let r0 = residual_vec(&params);
        if r0.norm() < 1e-13 {
            break;
        }
        // real-parameter Jacobian by central differences
        let mut jac = CMat::zeros(th.dim(), params.len());
        for j in 0..params.len() {
            let mut plus = params.clone();
            plus[j] += h;
            let mut minus = params.clone();
            minus[j] -= h;
            let diff = (residual_vec(&plus) - residual_vec(&minus)) / C64::new(2.0 * h, 0.0);
            jac.set_column(j, &diff);
        }
        // solve the real least-squares system [Re J; Im J] d = -[Re r; Im r]
        let mut real_jac = CMat::zeros(2 * th.dim(), params.len());
        let mut rhs = CVec::zeros(2 * th.dim());
        for i in 0..th.dim() {
            for j in 0..params.len() {
                real_jac[(i, j)] = C64::new(jac[(i, j)].re, 0.0);
                real_jac[(th.dim() + i, j)] = C64::new(jac[(i, j)].im, 0.0);
            }
            rhs[i] = C64::new(-r0[i].re, 0.0);
            rhs[th.dim() + i] = C64::new(-r0[i].im, 0.0);
        }
        let step = linalg::pinv_solve(&real_jac, &rhs);
        let mut max_move = 0.0f64;
        for j in 0..params.len() {
            params[j] += step[j].re;
            max_move = max_move.max(step[j].re.abs());
        }
        if max_move < 1e-13 {
            break;
        }
    }
    Ok(unpack(&params))
}

/// A decomposed doubly commuting submodule of a mixed space.
#[derive(Debug)]
pub struct MixedDecomposition {
    /// Per-variable inner generators of the Hardy part.
    pub generators: Vec<BlaschkeProduct>,
    /// Model-space factors with their classifications.
    pub model_factors: Vec<(Subspace, crate::blaschke::Factorization)>,
    /// Principal-angle distance of the reassembled tensor product to the
    /// input submodule.
    pub reconstruction_distance: f64,
    /// Residual from the Beurling extraction.
    pub generator_residual: f64,
}

/// Decompose a doubly commuting submodule of the mixed space as
/// (generator Hardy part) x W_1 x ... x W_r.
pub fn decompose_mixed(msp: &MixedSpace, m: &Subspace) -> Result<MixedDecomposition> {
    if m.ambient_dim() != msp.ambient_dim() {
        return Err(Error::AmbientDimMismatch {
            got: m.ambient_dim(),
            expected: msp.ambient_dim(),
        });
    }
    if m.is_zero() {
        return Err(Error::BadSubspaceDim { dim: 0 });
    }
    // windowed invariance in the Hardy directions, exact in the model ones
    let t_residuals =
        windowed_invariance_residuals(msp.hardy(), msp.model_dim(), msp.hardy_ops(), m);
    let worst_t = t_residuals.iter().cloned().fold(0.0, f64::max);
    if worst_t > tol::TRUNCATED_INVARIANCE_GATE {
        return Err(Error::NotASubmodule { residual: worst_t });
    }
    let s_ops = msp.model_ops();
    let worst_s = s_ops
        .iter()
        .map(|op| linalg::containment_residual(m.frame(), &(op * m.frame())))
        .fold(0.0, f64::max);
    if worst_s > tol::INVARIANCE_TOL {
        return Err(Error::NotASubmodule { residual: worst_s });
    }
    let dc = windowed_double_commutation(msp, m);
    if dc > tol::DOUBLY_COMMUTING_TOL {
        return Err(Error::NotDoublyCommuting { residual: dc });
    }

    // close over the model coordinates and split off the Hardy part
    let coords: Vec<usize> = (0..msp.model_factors().len()).collect();
    let m1 = star_krylov_closure(&msp.jordan_aux, m, &coords);
    let hardy_part = reducing_split(&msp.jordan_aux, &m1)?;
    let extract = beurling_extract(msp.hardy(), &hardy_part)?;
    let max_degree = extract.per_var.iter().map(|g| g.degree()).max().unwrap_or(0);
    if msp.hardy().degree_cap() < 2 * max_degree + 2 {
        return Err(Error::TruncationInconclusive {
            cap: msp.hardy().degree_cap(),
            degree: max_degree,
            required: 2 * max_degree + 2,
        });
    }

    // contract m against the Hardy frame to expose the model factor
    let model_part = contract_leading_factor(m, &hardy_part, msp.model_dim());
    let reconstruction = linalg::kron(hardy_part.frame(), model_part.frame());
    let distance = linalg::principal_angle_distance(&reconstruction, m.frame());
    if distance > tol::WINDOW_TOL {
        return Err(Error::ReconstructionMismatch {
            distance,
            tol: tol::WINDOW_TOL,
        });
    }
    let model_factors = decompose_doubly_commuting(&msp.jordan_pure, &model_part)?;
    Ok(MixedDecomposition {
        generators: extract.per_var,
        model_factors,
        reconstruction_distance: distance,
        generator_residual: extract.residual,
    })
}

/// Worst windowed cross-commutator of the compressed mixed tuple.
pub fn windowed_double_commutation(msp: &MixedSpace, m: &Subspace) -> f64 {
    let mut ops: Vec<CMat> = msp.hardy_ops().to_vec();
    ops.extend(msp.model_ops());
    let f = m.frame();
    let compressed: Vec<CMat> = ops.iter().map(|op| f.adjoint() * op * f).collect();
    let window = linalg::kron(
        &msp.hardy()
            .window_projector(msp.hardy().degree_cap() / 2),
        &CMat::identity(msp.model_dim(), msp.model_dim()),
    );
    let sandwich = &window * f;
    let mut worst = 0.0f64;
    for i in 0..compressed.len() {
        for j in 0..compressed.len() {
            if i == j {
                continue;
            }
            let a = &compressed[i];
            let b = &compressed[j];
            let defect = a * b.adjoint() - b.adjoint() * a;
            let value = linalg::op_norm(&(&sandwich * defect * sandwich.adjoint()));
            worst = worst.max(value);
        }
    }
    worst
}

/// Given m contained in span(W) x C^d with W the leading factor, collect
/// the trailing-leg contractions of the frame columns: their span is the
/// trailing factor E whenever m = W x E.
fn contract_leading_factor(m: &Subspace, leading: &Subspace, trailing_dim: usize) -> Subspace {
    let lead_dim = leading.ambient_dim();
    let mut collected = CMat::zeros(trailing_dim, m.dim() * lead_dim);
    for col in 0..m.dim() {
        for h in 0..lead_dim {
            for p in 0..trailing_dim {
                collected[(p, col * lead_dim + h)] = m.frame()[(h * trailing_dim + p, col)];
            }
        }
    }
    Subspace::from_span(&collected)
}
