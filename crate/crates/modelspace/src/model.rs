//! One-variable model spaces Q_theta = H^2 (-) theta H^2 for a finite
//! Blaschke product theta.
//!
//! The space is realized concretely: vectors are coefficient vectors in
//! the Takenaka-Malmquist orthonormal basis, and ambient H^2 operations
//! (multiplication by z, the backward shift, projections) act on samples
//! over a uniform boundary grid. The trapezoid rule is geometrically
//! convergent for the rational integrands that arise, so the grid size is
//! chosen from the decay rate of the outermost zero and refined until the
//! basis Gram matrix is the identity to within `tol::GRAM_TOL`.

use num_complex::Complex64;

use crate::blaschke::BlaschkeProduct;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tol;

pub type C64 = Complex64;

/// Radius of the Cauchy circles used for derivative evaluation at a zero.
const CAUCHY_RADIUS: f64 = 0.05;
/// Nodes on each Cauchy circle.
const CAUCHY_NODES: usize = 128;

/// Grid selection and conditioning options for [`build_model_space`].
#[derive(Debug, Clone)]
pub struct QuadratureOptions {
    /// Smallest grid size considered.
    pub min_points: usize,
    /// Refinement cap; exceeding it raises `IllConditioned`.
    pub max_points: usize,
    /// Target for the geometric decay (max |a_j|)^K of the grid error.
    pub decay_target: f64,
    /// Accepted Frobenius residual of the basis Gram matrix.
    pub gram_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            min_points: 256,
            max_points: 1 << 15,
            decay_target: 1e-16,
            gram_tol: tol::GRAM_TOL,
        }
    }
}

/// A dense operator between coefficient spaces.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: CMat,
}

impl DenseOperator {
    pub fn new(matrix: CMat) -> Self {
        assert!(
            matrix.iter().all(|c| c.re.is_finite() && c.im.is_finite()),
            "operator entries must be finite"
        );
        Self { matrix }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator::new(self.matrix.adjoint())
    }

    pub fn apply(&self, v: &CVec) -> CVec {
        &self.matrix * v
    }

    pub fn op_norm(&self) -> f64 {
        linalg::op_norm(&self.matrix)
    }
}

/// A vector of Q_theta in Takenaka-Malmquist coordinates.
#[derive(Debug, Clone)]
pub struct ModelVector {
    coeffs: CVec,
}

impl ModelVector {
    pub fn new(coeffs: CVec) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &CVec {
        &self.coeffs
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }
}

/// A projection result: coordinates plus the ambient residual left over.
#[derive(Debug, Clone)]
pub struct Projected {
    pub vector: ModelVector,
    /// Norm of the sampled function minus its projection onto Q_theta.
    pub residual: f64,
}

/// The model space Q_theta with its orthonormal basis realized on a
/// boundary quadrature grid.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    theta: BlaschkeProduct,
    dim: usize,
    grid: Vec<C64>,
    /// K x dim samples of the basis on the grid.
    basis_samples: CMat,
    /// Samples of theta itself, used by the backward-shift vectors.
    theta_samples: CVec,
}

/// Build Q_theta for a nonconstant finite Blaschke product.
pub fn build_model_space(theta: &BlaschkeProduct, opts: &QuadratureOptions) -> Result<ModelSpace> {
    if theta.degree() == 0 {
        return Err(Error::ConstantInner);
    }
    let rho = theta.max_zero_modulus();
    let mut points = opts.min_points.next_power_of_two().max(2);
    while rho > 0.0 && rho.powi(points as i32) >= opts.decay_target && points < opts.max_points {
        points *= 2;
    }
    loop {
        let grid: Vec<C64> = (0..points)
            .map(|l| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / points as f64))
            .collect();
        let basis_samples = sample_tm_basis(theta, &grid)?;
        let dim = theta.degree();
        let gram = basis_samples.adjoint() * &basis_samples / C64::new(points as f64, 0.0);
        let residual = linalg::fro_norm(&(gram - CMat::identity(dim, dim)));
        if residual < opts.gram_tol {
            let theta_samples = sample_function(theta, &grid)?;
            return Ok(ModelSpace {
                theta: theta.clone(),
                dim,
                grid,
                basis_samples,
                theta_samples,
            });
        }
        if points >= opts.max_points {
            return Err(Error::IllConditioned {
                residual,
                tol: opts.gram_tol,
                points,
            });
        }
        points *= 2;
    }
}

/// Sample the Takenaka-Malmquist basis of theta at the given points.
/// Column k is e_k = sqrt(1 - |a_k|^2) / (1 - conj(a_k) z) * prod_{j<k} b_{a_j}(z).
fn sample_tm_basis(theta: &BlaschkeProduct, points: &[C64]) -> Result<CMat> {
    let zeros = theta.zeros();
    let dim = zeros.len();
    let mut out = CMat::zeros(points.len(), dim);
    for (l, &w) in points.iter().enumerate() {
        let mut prefix = C64::new(1.0, 0.0);
        for (k, &a) in zeros.iter().enumerate() {
            let denom = C64::new(1.0, 0.0) - a.conj() * w;
            if denom.norm() < tol::POLE_TOL {
                return Err(Error::PoleProximity {
                    zero: format!("{a}"),
                    distance: denom.norm(),
                });
            }
            let normalizer = (1.0 - a.norm_sqr()).sqrt();
            out[(l, k)] = prefix * C64::new(normalizer, 0.0) / denom;
            prefix *= (w - a) / denom;
        }
    }
    Ok(out)
}

fn sample_function(b: &BlaschkeProduct, points: &[C64]) -> Result<CVec> {
    let mut out = CVec::zeros(points.len());
    for (l, &w) in points.iter().enumerate() {
        out[l] = b.eval(w)?;
    }
    Ok(out)
}

impl ModelSpace {
    pub fn theta(&self) -> &BlaschkeProduct {
        &self.theta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[C64] {
        &self.grid
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }

    pub fn basis_samples(&self) -> &CMat {
        &self.basis_samples
    }

    /// Quadrature inner product of two sampled ambient functions.
    pub fn ambient_inner(&self, f: &CVec, g: &CVec) -> C64 {
        let k = self.grid.len() as f64;
        let mut acc = C64::new(0.0, 0.0);
        for l in 0..self.grid.len() {
            acc += f[l] * g[l].conj();
        }
        acc / k
    }

    /// Quadrature norm of a sampled ambient function.
    pub fn ambient_norm(&self, f: &CVec) -> f64 {
        self.ambient_inner(f, f).re.max(0.0).sqrt()
    }

    /// Samples of a Blaschke product on this grid.
    pub fn sample(&self, b: &BlaschkeProduct) -> Result<CVec> {
        sample_function(b, &self.grid)
    }

    /// Samples of an arbitrary function on this grid.
    pub fn sample_with<F: FnMut(C64) -> Result<C64>>(&self, mut f: F) -> Result<CVec> {
        let mut out = CVec::zeros(self.grid.len());
        for (l, &w) in self.grid.iter().enumerate() {
            out[l] = f(w)?;
        }
        Ok(out)
    }

    /// Project sampled ambient data onto Q_theta.
    pub fn project_ambient(&self, f: &CVec) -> Projected {
        let k = self.grid.len() as f64;
        let coeffs = self.basis_samples.adjoint() * f / C64::new(k, 0.0);
        let recon = &self.basis_samples * &coeffs;
        let residual = self.ambient_norm(&(f - recon));
        Projected {
            vector: ModelVector::new(coeffs),
            residual,
        }
    }

    /// Samples of a coefficient vector on the grid.
    pub fn synthesize(&self, v: &ModelVector) -> CVec {
        &self.basis_samples * v.coeffs()
    }

    /// Evaluate a coefficient vector at an arbitrary point of the disc.
    pub fn eval_vector(&self, v: &ModelVector, z: C64) -> Result<C64> {
        let row = sample_tm_basis(&self.theta, &[z])?;
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.dim {
            acc += row[(0, k)] * v.coeffs()[k];
        }
        Ok(acc)
    }

    /// Ambient backward shift on samples: (f - f(0)) / w with f(0) taken
    /// as the quadrature mean.
    pub fn backward_shift_samples(&self, f: &CVec) -> CVec {
        let k = self.grid.len() as f64;
        let mean = f.iter().sum::<C64>() / C64::new(k, 0.0);
        let mut out = CVec::zeros(self.grid.len());
        for (l, &w) in self.grid.iter().enumerate() {
            out[l] = (f[l] - mean) / w;
        }
        out
    }

    /// Matrix of the compressed shift S_theta in the basis.
    pub fn compressed_shift(&self) -> DenseOperator {
        let k = self.grid.len() as f64;
        let mut shifted = self.basis_samples.clone();
        for l in 0..self.grid.len() {
            for j in 0..self.dim {
                shifted[(l, j)] *= self.grid[l];
            }
        }
        // entry (row, col) = <z e_col, e_row>
        let m = self.basis_samples.adjoint() * shifted / C64::new(k, 0.0);
        DenseOperator::new(m)
    }

    /// Coordinates of T_z^{*m} theta together with the ambient membership
    /// residual (which vanishes because T_z^{*m} theta lies in Q_theta).
    pub fn backward_shift_theta(&self, m: usize) -> Projected {
        assert!(m >= 1, "backward shift order must be at least 1");
        let mut samples = self.theta_samples.clone();
        for _ in 0..m {
            samples = self.backward_shift_samples(&samples);
        }
        self.project_ambient(&samples)
    }

    /// Coordinates of the projection of the constant function 1, computed
    /// from the closed form 1 - conj(theta(0)) theta. The returned residual
    /// is the distance to the directly projected constant.
    pub fn project_one(&self) -> Projected {
        let theta0 = self.theta.at_origin();
        let k = self.grid.len();
        let mut closed_form = CVec::zeros(k);
        for l in 0..k {
            closed_form[l] = C64::new(1.0, 0.0) - theta0.conj() * self.theta_samples[l];
        }
        let closed = self.project_ambient(&closed_form);
        let ones = CVec::from_element(k, C64::new(1.0, 0.0));
        let direct = self.project_ambient(&ones);
        let diff = (closed.vector.coeffs() - direct.vector.coeffs()).norm();
        Projected {
            vector: closed.vector,
            residual: diff,
        }
    }

    /// Frobenius residuals of the two rank-one defect identities:
    /// I - S S^* against (P 1)(P 1)^* and I - S^* S against
    /// (T_z^* theta)(T_z^* theta)^*.
    pub fn defect_identities(&self) -> (f64, f64) {
        let s = self.compressed_shift();
        let s_mat = s.matrix();
        let eye = CMat::identity(self.dim, self.dim);
        let v = self.project_one().vector;
        let w = self.backward_shift_theta(1).vector;
        let lhs_ss = &eye - s_mat * s_mat.adjoint();
        let lhs_s_s = &eye - s_mat.adjoint() * s_mat;
        let residual_ss = linalg::fro_norm(&(lhs_ss - linalg::rank_one(v.coeffs(), v.coeffs())));
        let residual_s_s = linalg::fro_norm(&(lhs_s_s - linalg::rank_one(w.coeffs(), w.coeffs())));
        (residual_ss, residual_s_s)
    }

    /// Frobenius residual of the truncated resolution of the identity by
    /// the backward-shift vectors T_z^{*p} theta, p = 1..=tail.
    pub fn parseval_frame_residual(&self, tail: usize) -> Result<f64> {
        let rho = self.theta.max_zero_modulus();
        let decay_ok = rho == 0.0 || rho.powi(2 * tail as i32) < 1e-12;
        if tail < self.dim || !decay_ok {
            let mut required = self.dim;
            if rho > 0.0 {
                let from_decay = (1e-12f64.ln() / (2.0 * rho.ln())).ceil() as usize;
                required = required.max(from_decay);
            }
            return Err(Error::TailTooShort { tail, required });
        }
        let mut acc = CMat::zeros(self.dim, self.dim);
        let mut samples = self.theta_samples.clone();
        for _ in 0..tail {
            samples = self.backward_shift_samples(&samples);
            let w = self.project_ambient(&samples).vector;
            acc += linalg::rank_one(w.coeffs(), w.coeffs());
        }
        Ok(linalg::fro_norm(&(acc - CMat::identity(self.dim, self.dim))))
    }

    /// True iff the Krylov span of T_z^* theta under S_theta^* fills Q_theta.
    pub fn star_cyclicity_check(&self) -> bool {
        let s_adj = self.compressed_shift().matrix().adjoint();
        let w = self.backward_shift_theta(1).vector;
        let mut krylov = CMat::zeros(self.dim, self.dim);
        let mut v = w.coeffs().clone();
        for p in 0..self.dim {
            krylov.set_column(p, &v);
            v = &s_adj * v;
        }
        linalg::numeric_rank(&krylov) == self.dim
    }

    /// Taylor coefficients of each basis function at an interior point,
    /// through `max_order`, via quadrature on a small Cauchy circle.
    /// Row s holds the order-s coefficients across basis functions.
    pub fn basis_taylor_at(&self, a: C64, max_order: usize) -> Result<CMat> {
        let nodes: Vec<C64> = (0..CAUCHY_NODES)
            .map(|m| {
                a + C64::from_polar(
                    CAUCHY_RADIUS,
                    2.0 * std::f64::consts::PI * m as f64 / CAUCHY_NODES as f64,
                )
            })
            .collect();
        let samples = sample_tm_basis(&self.theta, &nodes)?;
        let mut out = CMat::zeros(max_order + 1, self.dim);
        for s in 0..=max_order {
            let scale = C64::new(CAUCHY_NODES as f64 * CAUCHY_RADIUS.powi(s as i32), 0.0);
            for k in 0..self.dim {
                let mut acc = C64::new(0.0, 0.0);
                for m in 0..CAUCHY_NODES {
                    let omega = C64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * (m * s) as f64 / CAUCHY_NODES as f64,
                    );
                    acc += samples[(m, k)] * omega;
                }
                out[(s, k)] = acc / scale;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn build(theta: &BlaschkeProduct) -> ModelSpace {
        build_model_space(theta, &QuadratureOptions::default()).unwrap()
    }

    fn random_theta(rng: &mut ChaCha8Rng, degree: usize, max_radius: f64) -> BlaschkeProduct {
        let zeros: Vec<C64> = (0..degree)
            .map(|_| {
                let r = max_radius * rng.gen_range(0.0f64..1.0).sqrt();
                let phi = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
                C64::from_polar(r, phi)
            })
            .collect();
        let phase = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        BlaschkeProduct::new(C64::from_polar(1.0, phase), zeros).unwrap()
    }

    #[test]
    fn monomial_basis_is_monomials() {
        let ms = build(&BlaschkeProduct::monomial(3));
        assert_eq!(ms.dim(), 3);
        for (l, &w) in ms.grid().iter().enumerate().step_by(17) {
            for k in 0..3 {
                let expected = w.powi(k as i32);
                assert!((ms.basis_samples()[(l, k)] - expected).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn degree_one_basis_is_normalized_cauchy_kernel() {
        let a = c(0.5, 0.0);
        let ms = build(&BlaschkeProduct::factor(a).unwrap());
        assert_eq!(ms.dim(), 1);
        // exact-kernel oracle: <k_a, k_a> = 1/(1 - |a|^2) = 4/3, so the
        // normalized kernel is sqrt(3)/2 * k_a
        let scale = (1.0 - a.norm_sqr()).sqrt();
        for (l, &w) in ms.grid().iter().enumerate().step_by(31) {
            let kernel = C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - a.conj() * w);
            assert!((ms.basis_samples()[(l, 0)] - kernel * scale).norm() < 1e-12);
        }
    }

    #[test]
    fn repeated_zero_gram_matches_derivative_kernel_oracle() {
        // theta = b_{1/2}^2; oracle: quadrature inner products of the
        // kernels k_{a,0} = 1/(1-conj(a)z) and k_{a,1} = z/(1-conj(a)z)^2
        // equal the frozen exact values
        //   <k0,k0> = 4/3, <k1,k0> = 8/9, <k1,k1> = 80/27,
        // and the TM basis Gram is the identity.
        let a = c(0.5, 0.0);
        let b = BlaschkeProduct::factor(a).unwrap();
        let theta = b.multiply(&b);
        let ms = build(&theta);
        assert_eq!(ms.dim(), 2);

        let k0 = ms
            .sample_with(|w| Ok(C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - a.conj() * w)))
            .unwrap();
        let k1 = ms
            .sample_with(|w| Ok(w / (C64::new(1.0, 0.0) - a.conj() * w).powi(2)))
            .unwrap();
        assert!((ms.ambient_inner(&k0, &k0) - c(4.0 / 3.0, 0.0)).norm() < 1e-10);
        assert!((ms.ambient_inner(&k1, &k0) - c(8.0 / 9.0, 0.0)).norm() < 1e-10);
        assert!((ms.ambient_inner(&k1, &k1) - c(80.0 / 27.0, 0.0)).norm() < 1e-10);

        let gram = ms.basis_samples().adjoint() * ms.basis_samples()
            / C64::new(ms.grid_len() as f64, 0.0);
        assert!(linalg::fro_norm(&(gram - CMat::identity(2, 2))) < tol::GRAM_TOL);
    }

    #[test]
    fn compressed_shift_of_monomial_space_is_lower_shift() {
        let ms = build(&BlaschkeProduct::monomial(4));
        let s = ms.compressed_shift();
        for row in 0..4 {
            for col in 0..4 {
                let expected = if row == col + 1 { 1.0 } else { 0.0 };
                assert!(
                    (s.matrix()[(row, col)] - c(expected, 0.0)).norm() < 1e-12,
                    "entry ({row},{col})"
                );
            }
        }
        assert!(s.op_norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn compressed_shift_degree_one_is_the_zero_point() {
        // kernel-eigenvector oracle: T_z^* k_a = conj(a) k_a forces S = [a]
        let a = c(0.3, -0.4);
        let ms = build(&BlaschkeProduct::factor(a).unwrap());
        let s = ms.compressed_shift();
        assert!((s.matrix()[(0, 0)] - a).norm() < 1e-11);
    }

    #[test]
    fn defect_rank_is_one_for_random_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ms = build(&random_theta(&mut rng, 4, 0.8));
        let s = ms.compressed_shift();
        let eye = CMat::identity(4, 4);
        let defect = &eye - s.matrix().adjoint() * s.matrix();
        assert_eq!(linalg::numeric_rank(&defect), 1);
        assert!(s.op_norm() <= 1.0 + 1e-10);
    }

    #[test]
    fn backward_shift_of_z_squared_is_z() {
        let ms = build(&BlaschkeProduct::monomial(2));
        let p = ms.backward_shift_theta(1);
        assert!(p.residual < tol::MEMBERSHIP_TOL);
        assert!((p.vector.coeffs()[0]).norm() < 1e-12);
        assert!((p.vector.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((p.vector.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn backward_shift_norm_identity() {
        // quadrature norm cross-checked against 1 - |theta(0)|^2 = 3/4
        let ms = build(&BlaschkeProduct::factor(c(0.5, 0.0)).unwrap());
        let p = ms.backward_shift_theta(1);
        assert!(p.residual < tol::MEMBERSHIP_TOL);
        assert!((p.vector.norm().powi(2) - 0.75).abs() < tol::IDENTITY_TOL);
    }

    #[test]
    fn backward_shift_iterates_through_the_compressed_adjoint() {
        let ms = build(&BlaschkeProduct::monomial(3));
        let m2 = ms.backward_shift_theta(2).vector;
        // z^3, m = 2 gives z
        assert!((m2.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-12);
        let s_adj = ms.compressed_shift().matrix().adjoint();
        let via_op = &s_adj * ms.backward_shift_theta(1).vector.coeffs();
        assert!((via_op - m2.coeffs()).norm() < tol::IDENTITY_TOL);
    }

    #[test]
    fn project_one_of_monomial_space_is_constant() {
        let ms = build(&BlaschkeProduct::monomial(3));
        let p = ms.project_one();
        assert!(p.residual < tol::IDENTITY_TOL);
        assert!((p.vector.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(p.vector.coeffs()[1].norm() < 1e-12);
    }

    #[test]
    fn project_one_norm_for_half_factor() {
        // P 1 = 1 + theta/2 has norm^2 = 3/4
        let ms = build(&BlaschkeProduct::factor(c(0.5, 0.0)).unwrap());
        let p = ms.project_one();
        assert!(p.residual < tol::IDENTITY_TOL);
        assert!((p.vector.norm().powi(2) - 0.75).abs() < tol::IDENTITY_TOL);
    }

    #[test]
    fn projection_residual_is_orthogonal_to_the_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ms = build(&random_theta(&mut rng, 3, 0.7));
        let ones = CVec::from_element(ms.grid_len(), c(1.0, 0.0));
        let projected = ms.project_ambient(&ones);
        let recon = ms.synthesize(&projected.vector);
        let residual_fn = ones - recon;
        let coeffs_of_residual =
            ms.basis_samples().adjoint() * &residual_fn / C64::new(ms.grid_len() as f64, 0.0);
        assert!(coeffs_of_residual.norm() < tol::IDENTITY_TOL);
    }

    #[test]
    fn defect_identities_in_dimension_one() {
        let ms = build(&BlaschkeProduct::monomial(1));
        let (ss, s_s) = ms.defect_identities();
        assert!(ss < 1e-12, "got {ss}");
        assert!(s_s < 1e-12, "got {s_s}");
    }

    #[test]
    fn defect_identity_of_z_squared_is_rank_one_onto_z() {
        let ms = build(&BlaschkeProduct::monomial(2));
        let s = ms.compressed_shift();
        let defect = CMat::identity(2, 2) - s.matrix().adjoint() * s.matrix();
        // equals the rank-one projection onto span{z}
        assert!((defect[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(defect[(0, 0)].norm() < 1e-12);
        let (ss, s_s) = ms.defect_identities();
        assert!(ss < tol::DEFECT_TOL && s_s < tol::DEFECT_TOL);
    }

    #[test]
    fn defect_identities_for_random_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ms = build(&random_theta(&mut rng, 5, 0.85));
        let (ss, s_s) = ms.defect_identities();
        assert!(ss < tol::DEFECT_TOL, "got {ss}");
        assert!(s_s < tol::DEFECT_TOL, "got {s_s}");
    }

    #[test]
    fn parseval_frame_for_monomials_is_exact_at_the_dimension() {
        let ms = build(&BlaschkeProduct::monomial(4));
        let r = ms.parseval_frame_residual(4).unwrap();
        assert!(r < 1e-12, "got {r}");
    }

    #[test]
    fn parseval_frame_for_half_factor() {
        let ms = build(&BlaschkeProduct::factor(c(0.5, 0.0)).unwrap());
        let r = ms.parseval_frame_residual(40).unwrap();
        assert!(r < tol::PARSEVAL_TOL, "got {r}");
    }

    #[test]
    fn parseval_frame_for_random_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let ms = build(&random_theta(&mut rng, 3, 0.8));
        let r = ms.parseval_frame_residual(120).unwrap();
        assert!(r < tol::PARSEVAL_TOL, "got {r}");
    }

    #[test]
    fn parseval_tail_guard() {
        let ms = build(&BlaschkeProduct::factor(c(0.5, 0.0)).unwrap());
        assert!(matches!(
            ms.parseval_frame_residual(5),
            Err(Error::TailTooShort { .. })
        ));
    }

    #[test]
    fn star_cyclicity_examples() {
        assert!(build(&BlaschkeProduct::monomial(3)).star_cyclicity_check());
        assert!(build(&BlaschkeProduct::factor(c(0.5, 0.0)).unwrap()).star_cyclicity_check());
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        assert!(build(&random_theta(&mut rng, 6, 0.8)).star_cyclicity_check());
    }

    #[test]
    fn shift_times_adjoint_is_identity_minus_constants() {
        // T_z T_z^* = I - P_C on sampled polynomial test functions
        let ms = build(&BlaschkeProduct::monomial(2));
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..4 {
            let coeffs: Vec<C64> = (0..5).map(|_| linalg::random_complex(&mut rng)).collect();
            let poly = ms
                .sample_with(|w| {
                    Ok(coeffs
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c * w.powi(k as i32))
                        .sum())
                })
                .unwrap();
            let back = ms.backward_shift_samples(&poly);
            let mut forward = CVec::zeros(ms.grid_len());
            for (l, &w) in ms.grid().iter().enumerate() {
                forward[l] = back[l] * w;
            }
            let mean = poly.iter().sum::<C64>() / C64::new(ms.grid_len() as f64, 0.0);
            let expected = poly.map(|v| v - mean);
            assert!(ms.ambient_norm(&(forward - expected)) < tol::IDENTITY_TOL);
        }
    }

    #[test]
    fn quadrature_and_kernel_route_agree_on_singular_values() {
        // independent construction: Cholesky-orthonormalized Cauchy kernels
        // at distinct zeros give S^* = L^H diag(conj a) L^{-H}
        let zeros = [c(0.4, 0.1), c(-0.3, 0.25), c(0.1, -0.5), c(-0.6, -0.1)];
        let theta = BlaschkeProduct::new(c(1.0, 0.0), zeros.to_vec()).unwrap();
        let ms = build(&theta);
        let s_quad = ms.compressed_shift();

        let n = zeros.len();
        let gram = CMat::from_fn(n, n, |i, j| {
            C64::new(1.0, 0.0) / (C64::new(1.0, 0.0) - zeros[j].conj() * zeros[i])
        });
        let chol = gram.cholesky().expect("kernel Gram is positive definite");
        let l = chol.l();
        let l_h = l.adjoint();
        let diag = CMat::from_fn(n, n, |i, j| {
            if i == j {
                zeros[i].conj()
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let l_h_inv = l_h
            .clone()
            .try_inverse()
            .expect("triangular factor invertible");
        let s_star_kernel = &l_h * diag * l_h_inv;

        let sv_a = linalg::singular_values(s_quad.matrix());
        let sv_b = linalg::singular_values(&s_star_kernel);
        for (a, b) in sv_a.iter().zip(sv_b.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn gram_is_identity_across_random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let degree = rng.gen_range(1..=8usize);
            let theta = random_theta(&mut rng, degree, 0.95);
            let ms = build(&theta);
            let gram = ms.basis_samples().adjoint() * ms.basis_samples()
                / C64::new(ms.grid_len() as f64, 0.0);
            let residual = linalg::fro_norm(&(gram - CMat::identity(degree, degree)));
            assert!(residual < tol::GRAM_TOL, "degree {degree}: {residual}");
        }
    }

    #[test]
    fn taylor_rows_match_known_derivatives() {
        // e_1 of Q_{z^2} is z: Taylor rows at a are (a, 1, 0)
        let ms = build(&BlaschkeProduct::monomial(2));
        let a = c(0.2, 0.1);
        let rows = ms.basis_taylor_at(a, 2).unwrap();
        assert!((rows[(0, 1)] - a).norm() < 1e-12);
        assert!((rows[(1, 1)] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(rows[(2, 1)].norm() < 1e-10);
    }
}
