//! Finite Blaschke products: evaluation, multiplication, divisibility and
//! enumeration of inner factorizations.
//!
//! A finite Blaschke product is a unimodular constant times a product of
//! factors b_a(z) = (z - a) / (1 - conj(a) z) with |a| < 1. The zero
//! multiset is the whole story: two products are the same inner function
//! up to a unimodular constant iff their zero multisets agree.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

const MAX_FACTORIZATION_DEGREE: usize = 12;

/// A finite Blaschke product: unimodular constant and zero multiset.
///
/// Zeros are kept canonically sorted (lexicographic on (re, im)) so that
/// equality checks and enumeration orders are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    constant: C64,
    zeros: Vec<C64>,
}

impl BlaschkeProduct {
    /// Build a product with the default radial guard on zeros.
    pub fn new(constant: C64, zeros: Vec<C64>) -> Result<Self> {
        Self::with_guard(constant, zeros, tol::ZERO_GUARD)
    }

    /// Build a product with an explicit radial guard (must stay below 1).
    pub fn with_guard(constant: C64, zeros: Vec<C64>, guard: f64) -> Result<Self> {
        let modulus = constant.norm();
        if (modulus - 1.0).abs() > tol::UNIMODULAR_TOL {
            return Err(Error::NonUnimodularConstant { modulus });
        }
        let guard = guard.min(1.0 - 1e-9);
        for (index, a) in zeros.iter().enumerate() {
            if a.norm() > guard {
                return Err(Error::ZeroOutsideGuard {
                    index,
                    modulus: a.norm(),
                    guard,
                });
            }
        }
        Ok(Self::from_parts(constant, zeros))
    }

    /// Internal constructor for zeros that are already validated.
    pub(crate) fn from_parts(constant: C64, mut zeros: Vec<C64>) -> Self {
        sort_canonical(&mut zeros);
        Self { constant, zeros }
    }

    /// The constant inner function 1.
    pub fn one() -> Self {
        Self::from_parts(C64::new(1.0, 0.0), Vec::new())
    }

    /// The monomial z^d.
    pub fn monomial(d: usize) -> Self {
        Self::from_parts(C64::new(1.0, 0.0), vec![C64::new(0.0, 0.0); d])
    }

    /// A single Blaschke factor b_a.
    pub fn factor(a: C64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), vec![a])
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn zeros(&self) -> &[C64] {
        &self.zeros
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    /// Largest zero modulus, 0 for constant products.
    pub fn max_zero_modulus(&self) -> f64 {
        self.zeros.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Value at the origin, constant * prod(-a_j).
    pub fn at_origin(&self) -> C64 {
        self.zeros
            .iter()
            .fold(self.constant, |acc, a| acc * (-a))
    }

    /// Evaluate at a point of the closed disc.
    pub fn eval(&self, z: C64) -> Result<C64> {
        let modulus = z.norm();
        if modulus > 1.0 + 1e-9 {
            return Err(Error::OutsideDisc { modulus });
        }
        let mut value = self.constant;
        for a in &self.zeros {
            let denom = C64::new(1.0, 0.0) - a.conj() * z;
            if denom.norm() < tol::POLE_TOL {
                return Err(Error::PoleProximity {
                    zero: format!("{a}"),
                    distance: denom.norm(),
                });
            }
            value *= (z - a) / denom;
        }
        Ok(value)
    }

    /// Pointwise product: constants multiply, zero multisets merge.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        Self::from_parts(self.constant * other.constant, zeros)
    }

    /// Zero multisets agree within the pairing tolerance; constants are
    /// ignored.
    pub fn equal_up_to_unimodular(&self, other: &Self) -> bool {
        multiset_match(&self.zeros, &other.zeros, tol::ZERO_PAIRING_TOL)
    }

    /// Distinct zeros with multiplicities, clustered at the pairing
    /// tolerance. Representatives are cluster means.
    pub fn distinct_zeros(&self) -> Vec<(C64, usize)> {
        let mut clusters: Vec<(C64, usize)> = Vec::new();
        let mut sum = C64::new(0.0, 0.0);
        let mut count = 0usize;
        let mut last: Option<C64> = None;
        for &a in &self.zeros {
            match last {
                Some(prev) if (a - prev).norm() <= tol::ZERO_PAIRING_TOL => {
                    sum += a;
                    count += 1;
                }
                Some(_) => {
                    clusters.push((sum / count as f64, count));
                    sum = a;
                    count = 1;
                }
                None => {
                    sum = a;
                    count = 1;
                }
            }
            last = Some(a);
        }
        if count > 0 {
            clusters.push((sum / count as f64, count));
        }
        clusters
    }

    /// All ordered inner factorizations theta = eta * phi, canonically
    /// normalized (eta carries constant 1, phi carries the constant of
    /// theta) and ordered lexicographically on the sorted zeros of eta.
    pub fn factorizations(&self) -> Result<Vec<Factorization>> {
        if self.degree() > MAX_FACTORIZATION_DEGREE {
            return Err(Error::DegreeTooLarge {
                degree: self.degree(),
                max: MAX_FACTORIZATION_DEGREE,
            });
        }
        let clusters = self.distinct_zeros();
        let mut picks = vec![0usize; clusters.len()];
        let mut out = Vec::new();
        loop {
            let mut eta_zeros = Vec::new();
            let mut phi_zeros = Vec::new();
            for (i, &(rep, mult)) in clusters.iter().enumerate() {
                for _ in 0..picks[i] {
                    eta_zeros.push(rep);
                }
                for _ in picks[i]..mult {
                    phi_zeros.push(rep);
                }
            }
            out.push(Factorization {
                eta: Self::from_parts(C64::new(1.0, 0.0), eta_zeros),
                phi: Self::from_parts(self.constant, phi_zeros),
            });
            // mixed-radix increment over multiplicities
            let mut i = 0;
            loop {
                if i == clusters.len() {
                    sort_factorizations(&mut out);
                    return Ok(out);
                }
                picks[i] += 1;
                if picks[i] <= clusters[i].1 {
                    break;
                }
                picks[i] = 0;
                i += 1;
            }
        }
    }

    /// Taylor coefficients at the origin through degree `n`.
    pub fn taylor_coeffs(&self, n: usize) -> Vec<C64> {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[0] = self.constant;
        for a in &self.zeros {
            // factor series: -a + sum_{m>=1} conj(a)^{m-1} (1 - |a|^2) z^m
            let mut factor = vec![C64::new(0.0, 0.0); n + 1];
            factor[0] = -a;
            let defect = C64::new(1.0 - a.norm_sqr(), 0.0);
            let mut pow = C64::new(1.0, 0.0);
            for m in 1..=n {
                factor[m] = pow * defect;
                pow *= a.conj();
            }
            let mut next = vec![C64::new(0.0, 0.0); n + 1];
            for i in 0..=n {
                if coeffs[i].norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..=(n - i) {
                    next[i + j] += coeffs[i] * factor[j];
                }
            }
            coeffs = next;
        }
        coeffs
    }
}

impl fmt::Display for BlaschkeProduct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B[c={:.4}{:+.4}i;", self.constant.re, self.constant.im)?;
        for (i, a) in self.zeros.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, " {:.4}{:+.4}i", a.re, a.im)?;
        }
        write!(f, "]")
    }
}

/// An ordered inner factorization theta = eta * phi.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub eta: BlaschkeProduct,
    pub phi: BlaschkeProduct,
}

impl Factorization {
    pub fn new(eta: BlaschkeProduct, phi: BlaschkeProduct) -> Self {
        Self { eta, phi }
    }

    /// The product eta * phi.
    pub fn recombine(&self) -> BlaschkeProduct {
        self.eta.multiply(&self.phi)
    }

    /// Check that the pair factors `theta` exactly, constants included.
    pub fn factors(&self, theta: &BlaschkeProduct) -> bool {
        let prod = self.recombine();
        prod.equal_up_to_unimodular(theta)
            && (prod.constant() - theta.constant()).norm() <= 1e-9
    }
}

fn sort_canonical(zeros: &mut [C64]) {
    zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

fn sort_factorizations(fs: &mut [Factorization]) {
    fs.sort_by(|x, y| {
        let xa = x.eta.zeros();
        let ya = y.eta.zeros();
        for (a, b) in xa.iter().zip(ya.iter()) {
            let ord = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if ord != std::cmp::Ordering::Equal {
                return ord;
            }
        }
        xa.len().cmp(&ya.len())
    });
}

/// Perfect matching of two multisets under |x - y| <= tol, by Kuhn's
/// augmenting-path algorithm.
fn multiset_match(xs: &[C64], ys: &[C64], tol: f64) -> bool {
    if xs.len() != ys.len() {
        return false;
    }
    let n = xs.len();
    if n == 0 {
        return true;
    }
    let adjacency: Vec<Vec<usize>> = xs
        .iter()
        .map(|x| {
            ys.iter()
                .enumerate()
                .filter(|(_, y)| (x - *y).norm() <= tol)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut matched_to: Vec<Option<usize>> = vec![None; n];
    fn augment(
        i: usize,
        adjacency: &[Vec<usize>],
        matched_to: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &j in &adjacency[i] {
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if matched_to[j].is_none()
                || augment(matched_to[j].unwrap(), adjacency, matched_to, visited)
            {
                matched_to[j] = Some(i);
                return true;
            }
        }
        false
    }
    for i in 0..n {
        let mut visited = vec![false; n];
        if !augment(i, &adjacency, &mut matched_to, &mut visited) {
            return false;
        }
    }
    true
}
