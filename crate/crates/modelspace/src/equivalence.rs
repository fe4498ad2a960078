//! Unitary equivalence of doubly commuting submodules.
//!
//! Two doubly commuting submodules of the same mixed space are unitarily
//! equivalent exactly when their model-space factors agree; the Hardy
//! inner generators never matter. The fingerprint captures this invariant
//! as the per-coordinate zero multisets of (eta_i, phi_i). An independent
//! finite-dimensional oracle decides equivalence directly by solving for
//! intertwiners of the compressed tuples and testing the polar unitary of
//! a generic element.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::blaschke::{BlaschkeProduct, Factorization};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::subspace::Subspace;
use crate::tensor::{compression, JordanBlockProduct};
use crate::tol;

type C64 = Complex64;

/// Seeds tried for the generic intertwiner element before giving up.
const ORACLE_SEEDS: [u64; 3] = [0x5eed_0001, 0x5eed_0002, 0x5eed_0003];

/// A decomposition whose unitary-equivalence class is to be compared.
#[derive(Debug, Clone)]
pub enum Decomposition {
    /// Output of the pure tensor decomposition.
    Tensor { factors: Vec<Factorization> },
    /// Output of the mixed decomposition: Hardy generators plus model
    /// factors.
    Mixed {
        generators: Vec<BlaschkeProduct>,
        factors: Vec<Factorization>,
    },
}

impl Decomposition {
    pub fn factors(&self) -> &[Factorization] {
        match self {
            Decomposition::Tensor { factors } => factors,
            Decomposition::Mixed { factors, .. } => factors,
        }
    }

    pub fn hardy_arity(&self) -> usize {
        match self {
            Decomposition::Tensor { .. } => 0,
            Decomposition::Mixed { generators, .. } => generators.len(),
        }
    }

    /// The ambient inner functions theta_i = eta_i phi_i.
    pub fn ambient_thetas(&self) -> Vec<BlaschkeProduct> {
        self.factors().iter().map(|f| f.recombine()).collect()
    }
}

/// Canonical unitary-equivalence invariant: per-coordinate zero multisets
/// of (eta_i, phi_i), plus whether a Hardy part is present. Any zero
/// model factor collapses the whole submodule to zero, so those all share
/// one canonical fingerprint.
#[derive(Debug, Clone)]
pub struct Fingerprint {
    /// None encodes the zero submodule.
    coordinates: Option<Vec<(Vec<C64>, Vec<C64>)>>,
    hardy_present: bool,
}

impl Fingerprint {
    pub fn is_zero(&self) -> bool {
        self.coordinates.is_none()
    }

    pub fn hardy_present(&self) -> bool {
        self.hardy_present
    }

    pub fn coordinates(&self) -> Option<&[(Vec<C64>, Vec<C64>)]> {
        self.coordinates.as_deref()
    }

    /// Equality at the zero-pairing tolerance.
    pub fn matches(&self, other: &Fingerprint) -> bool {
        if self.hardy_present != other.hardy_present {
            return false;
        }
        match (&self.coordinates, &other.coordinates) {
            (None, None) => true,
            (Some(a), Some(b)) => {
                a.len() == b.len()
                    && a.iter().zip(b.iter()).all(|((ea, pa), (eb, pb))| {
                        multisets_equal(ea, eb) && multisets_equal(pa, pb)
                    })
            }
            _ => false,
        }
    }
}

fn multisets_equal(a: &[C64], b: &[C64]) -> bool {
    let pa = BlaschkeProduct::from_parts(C64::new(1.0, 0.0), a.to_vec());
    let pb = BlaschkeProduct::from_parts(C64::new(1.0, 0.0), b.to_vec());
    pa.equal_up_to_unimodular(&pb)
}

/// Compute the canonical fingerprint of a decomposition.
pub fn fingerprint(d: &Decomposition) -> Fingerprint {
    let hardy_present = matches!(d, Decomposition::Mixed { .. });
    if d.factors().iter().any(|f| f.phi.degree() == 0) {
        return Fingerprint {
            coordinates: None,
            hardy_present,
        };
    }
    let coordinates = d
        .factors()
        .iter()
        .map(|f| (f.eta.zeros().to_vec(), f.phi.zeros().to_vec()))
        .collect();
    Fingerprint {
        coordinates: Some(coordinates),
        hardy_present,
    }
}

/// Unitary equivalence via fingerprints: true iff the model factors
/// agree; the Hardy generators are free.
pub fn are_unitarily_equivalent(d1: &Decomposition, d2: &Decomposition) -> Result<bool> {
    if d1.hardy_arity() != d2.hardy_arity() {
        return Err(Error::AmbientMismatch {
            detail: format!(
                "hardy arity {} vs {}",
                d1.hardy_arity(),
                d2.hardy_arity()
            ),
        });
    }
    let thetas1 = d1.ambient_thetas();
    let thetas2 = d2.ambient_thetas();
    if thetas1.len() != thetas2.len() {
        return Err(Error::AmbientMismatch {
            detail: format!("{} vs {} model coordinates", thetas1.len(), thetas2.len()),
        });
    }
    for (i, (t1, t2)) in thetas1.iter().zip(thetas2.iter()).enumerate() {
        if !t1.equal_up_to_unimodular(t2) {
            return Err(Error::AmbientMismatch {
                detail: format!("coordinate {i}: {t1} vs {t2}"),
            });
        }
    }
    Ok(fingerprint(d1).matches(&fingerprint(d2)))
}

/// Independent oracle: do the compressed tuples on m1 and m2 admit a
/// unitary intertwiner? Solves the homogeneous system
/// X R_i^{(1)} = R_i^{(2)} X, X R_i^{(1)*} = R_i^{(2)*} X and tests the
/// polar unitary of a seeded generic element of the solution space.
pub fn intertwiner_oracle(
    jb: &JordanBlockProduct,
    m1: &Subspace,
    m2: &Subspace,
) -> Result<bool> {
    if m1.dim() != m2.dim() {
        return Ok(false);
    }
    let k = m1.dim();
    if k == 0 {
        return Ok(true);
    }
    let c1 = compression(jb, m1)?;
    let c2 = compression(jb, m2)?;

    let eye = CMat::identity(k, k);
    let mut rows = Vec::new();
    for (a, b) in c1.r_ops.iter().zip(c2.r_ops.iter()) {
        rows.push(linalg::kron(&a.transpose(), &eye) - linalg::kron(&eye, b));
        rows.push(
            linalg::kron(&a.map(|c| c.conj()), &eye) - linalg::kron(&eye, &b.adjoint()),
        );
    }
    let total_rows: usize = rows.iter().map(|r| r.nrows()).sum();
    let mut constraints = CMat::zeros(total_rows, k * k);
    let mut offset = 0;
    for r in &rows {
        constraints
            .view_mut((offset, 0), (r.nrows(), r.ncols()))
            .copy_from(r);
        offset += r.nrows();
    }
    let null = linalg::nullspace(&constraints);
    if null.ncols() == 0 {
        return Ok(false);
    }

    for seed in ORACLE_SEEDS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs: CVec = CVec::from_fn(null.ncols(), |_, _| linalg::random_complex(&mut rng));
        let x_vec = &null * coeffs;
        let x = CMat::from_column_slice(k, k, x_vec.as_slice());
        let u = linalg::polar_unitary(&x);
        if linalg::frame_gram_residual(&u) > tol::DOUBLY_COMMUTING_TOL {
            continue;
        }
        let intertwines = c1.r_ops.iter().zip(c2.r_ops.iter()).all(|(a, b)| {
            linalg::op_norm(&(&u * a - b * &u)) < tol::DOUBLY_COMMUTING_TOL
                && linalg::op_norm(&(&u * a.adjoint() - b.adjoint() * &u))
                    < tol::DOUBLY_COMMUTING_TOL
        });
        if intertwines {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_model_space, ModelSpace, QuadratureOptions};
    use crate::tensor::{build_product, tensor_submodule};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn z2_space() -> ModelSpace {
        build_model_space(&BlaschkeProduct::monomial(2), &QuadratureOptions::default()).unwrap()
    }

    fn factorization_of(theta: &BlaschkeProduct, eta: usize, phi: usize) -> Factorization {
        theta
            .factorizations()
            .unwrap()
            .into_iter()
            .find(|f| f.eta.degree() == eta && f.phi.degree() == phi)
            .unwrap()
    }

    fn nakazi_tensor() -> Decomposition {
        let theta = BlaschkeProduct::monomial(2);
        Decomposition::Tensor {
            factors: vec![
                factorization_of(&theta, 1, 1),
                factorization_of(&theta, 0, 2),
            ],
        }
    }

    #[test]
    fn fingerprint_encodes_zero_multisets() {
        let fp = fingerprint(&nakazi_tensor());
        let coords = fp.coordinates().unwrap();
        assert_eq!(coords.len(), 2);
        assert_eq!(coords[0].0.len(), 1); // eta_1 = z
        assert_eq!(coords[0].1.len(), 1); // phi_1 = z
        assert_eq!(coords[1].0.len(), 0); // eta_2 = 1
        assert_eq!(coords[1].1.len(), 2); // phi_2 = z^2
        assert!(!fp.hardy_present());
    }

    #[test]
    fn fingerprint_of_full_space_has_empty_etas() {
        let theta = BlaschkeProduct::monomial(2);
        let d = Decomposition::Tensor {
            factors: vec![
                factorization_of(&theta, 0, 2),
                factorization_of(&theta, 0, 2),
            ],
        };
        let fp = fingerprint(&d);
        for (eta, _) in fp.coordinates().unwrap() {
            assert!(eta.is_empty());
        }
    }

    #[test]
    fn fingerprint_ignores_zero_ordering() {
        let a = c(0.5, 0.0);
        let b = c(-0.3, 0.2);
        let theta_ab = BlaschkeProduct::new(c(1.0, 0.0), vec![a, b]).unwrap();
        let eta_ab = BlaschkeProduct::new(c(1.0, 0.0), vec![a, b]).unwrap();
        let eta_ba = BlaschkeProduct::new(c(1.0, 0.0), vec![b, a]).unwrap();
        let d1 = Decomposition::Tensor {
            factors: vec![Factorization::new(eta_ab, theta_ab.clone())],
        };
        let d2 = Decomposition::Tensor {
            factors: vec![Factorization::new(eta_ba, theta_ab)],
        };
        assert!(fingerprint(&d1).matches(&fingerprint(&d2)));
    }

    #[test]
    fn zero_factor_collapses_the_fingerprint() {
        let theta = BlaschkeProduct::monomial(2);
        let d1 = Decomposition::Tensor {
            factors: vec![
                factorization_of(&theta, 2, 0),
                factorization_of(&theta, 0, 2),
            ],
        };
        let d2 = Decomposition::Tensor {
            factors: vec![
                factorization_of(&theta, 1, 1),
                factorization_of(&theta, 2, 0),
            ],
        };
        assert!(fingerprint(&d1).is_zero());
        assert!(fingerprint(&d1).matches(&fingerprint(&d2)));
    }

    #[test]
    fn hardy_generators_never_matter() {
        let theta = BlaschkeProduct::monomial(2);
        let zq_z = factorization_of(&theta, 1, 1);
        let d1 = Decomposition::Mixed {
            generators: vec![BlaschkeProduct::monomial(1)],
            factors: vec![zq_z.clone()],
        };
        let d2 = Decomposition::Mixed {
            generators: vec![BlaschkeProduct::factor(c(0.5, 0.0)).unwrap()],
            factors: vec![zq_z],
        };
        assert!(are_unitarily_equivalent(&d1, &d2).unwrap());
    }

    #[test]
    fn distinct_model_factors_are_inequivalent() {
        let theta = BlaschkeProduct::monomial(2);
        let d1 = Decomposition::Mixed {
            generators: vec![BlaschkeProduct::monomial(1)],
            factors: vec![factorization_of(&theta, 0, 2)],
        };
        let d2 = Decomposition::Mixed {
            generators: vec![BlaschkeProduct::monomial(1)],
            factors: vec![factorization_of(&theta, 1, 1)],
        };
        assert!(!are_unitarily_equivalent(&d1, &d2).unwrap());
    }

    #[test]
    fn reflexivity() {
        let d = nakazi_tensor();
        assert!(are_unitarily_equivalent(&d, &d).unwrap());
    }

    #[test]
    fn ambient_mismatch_is_an_error() {
        let theta2 = BlaschkeProduct::monomial(2);
        let theta3 = BlaschkeProduct::monomial(3);
        let d1 = Decomposition::Tensor {
            factors: vec![factorization_of(&theta2, 0, 2)],
        };
        let d2 = Decomposition::Tensor {
            factors: vec![factorization_of(&theta3, 0, 3)],
        };
        assert!(matches!(
            are_unitarily_equivalent(&d1, &d2),
            Err(Error::AmbientMismatch { .. })
        ));
    }

    #[test]
    fn oracle_accepts_identical_submodules() {
        let jb = build_product(vec![z2_space(), z2_space()], 0).unwrap();
        let theta = BlaschkeProduct::monomial(2);
        let m = tensor_submodule(
            &jb,
            &[
                factorization_of(&theta, 1, 1),
                factorization_of(&theta, 0, 2),
            ],
        )
        .unwrap();
        assert!(intertwiner_oracle(&jb, &m, &m).unwrap());
    }

    #[test]
    fn oracle_distinguishes_swapped_coordinate_roles() {
        // z Q_z x Q_{z^2} vs Q_{z^2} x z Q_z: both 2-dimensional, but the
        // coordinate compressions have different ranks
        let jb = build_product(vec![z2_space(), z2_space()], 0).unwrap();
        let theta = BlaschkeProduct::monomial(2);
        let m1 = tensor_submodule(
            &jb,
            &[
                factorization_of(&theta, 1, 1),
                factorization_of(&theta, 0, 2),
            ],
        )
        .unwrap();
        let m2 = tensor_submodule(
            &jb,
            &[
                factorization_of(&theta, 0, 2),
                factorization_of(&theta, 1, 1),
            ],
        )
        .unwrap();
        assert!(!intertwiner_oracle(&jb, &m1, &m2).unwrap());
    }

    #[test]
    fn oracle_agrees_with_fingerprints_exhaustively_on_z2_z2() {
        // all 9 formal tensor submodules of Q_{z^2} x Q_{z^2}, 45 pairs
        let jb = build_product(vec![z2_space(), z2_space()], 0).unwrap();
        let theta = BlaschkeProduct::monomial(2);
        let fs = theta.factorizations().unwrap();
        let mut subs = Vec::new();
        for f1 in &fs {
            for f2 in &fs {
                let m = tensor_submodule(&jb, &[f1.clone(), f2.clone()]).unwrap();
                let d = Decomposition::Tensor {
                    factors: vec![f1.clone(), f2.clone()],
                };
                subs.push((m, d));
            }
        }
        assert_eq!(subs.len(), 9);
        let mut pairs = 0;
        for i in 0..subs.len() {
            for j in i..subs.len() {
                pairs += 1;
                let by_fingerprint =
                    are_unitarily_equivalent(&subs[i].1, &subs[j].1).unwrap();
                let by_oracle = intertwiner_oracle(&jb, &subs[i].0, &subs[j].0).unwrap();
                assert_eq!(
                    by_fingerprint, by_oracle,
                    "disagreement on pair ({i},{j})"
                );
            }
        }
        assert_eq!(pairs, 45);
    }

    #[test]
    fn equivalence_relation_properties_on_a_finite_set() {
        let theta = BlaschkeProduct::monomial(2);
        let fs = theta.factorizations().unwrap();
        let mut ds = Vec::new();
        for f1 in &fs {
            for f2 in &fs {
                ds.push(Decomposition::Tensor {
                    factors: vec![f1.clone(), f2.clone()],
                });
            }
        }
        for a in &ds {
            assert!(are_unitarily_equivalent(a, a).unwrap());
            for b in &ds {
                let ab = are_unitarily_equivalent(a, b).unwrap();
                let ba = are_unitarily_equivalent(b, a).unwrap();
                assert_eq!(ab, ba);
                for c in &ds {
                    let bc = are_unitarily_equivalent(b, c).unwrap();
                    let ac = are_unitarily_equivalent(a, c).unwrap();
                    if ab && bc {
                        assert!(ac);
                    }
                }
            }
        }
    }

    #[test]
    fn fingerprint_stable_under_frame_rotation() {
        // re-decomposing the same subspace given by a rotated frame yields
        // the same fingerprint
        use crate::tensor::decompose_doubly_commuting;
        let jb = build_product(vec![z2_space(), z2_space()], 0).unwrap();
        let theta = BlaschkeProduct::monomial(2);
        let m = tensor_submodule(
            &jb,
            &[
                factorization_of(&theta, 0, 2),
                factorization_of(&theta, 1, 1),
            ],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(97);
        let u = linalg::random_unitary(&mut rng, m.dim());
        let rotated = Subspace::new(m.frame() * u).unwrap();
        let d1 = Decomposition::Tensor {
            factors: decompose_doubly_commuting(&jb, &m)
                .unwrap()
                .into_iter()
                .map(|(_, f)| f)
                .collect(),
        };
        let d2 = Decomposition::Tensor {
            factors: decompose_doubly_commuting(&jb, &rotated)
                .unwrap()
                .into_iter()
                .map(|(_, f)| f)
                .collect(),
        };
        assert!(fingerprint(&d1).matches(&fingerprint(&d2)));
    }

    #[test]
    fn oracle_confirms_equal_fingerprints_on_random_tensor_submodules() {
        let a = BlaschkeProduct::new(c(1.0, 0.0), vec![c(0.4, 0.1), c(-0.2, -0.3)]).unwrap();
        let b = BlaschkeProduct::new(c(1.0, 0.0), vec![c(0.1, 0.5), c(0.3, 0.0)]).unwrap();
        let jb = build_product(
            vec![
                build_model_space(&a, &QuadratureOptions::default()).unwrap(),
                build_model_space(&b, &QuadratureOptions::default()).unwrap(),
            ],
            0,
        )
        .unwrap();
        for f1 in a.factorizations().unwrap() {
            for f2 in b.factorizations().unwrap() {
                let m = tensor_submodule(&jb, &[f1.clone(), f2.clone()]).unwrap();
                assert!(intertwiner_oracle(&jb, &m, &m).unwrap());
            }
        }
    }
}
