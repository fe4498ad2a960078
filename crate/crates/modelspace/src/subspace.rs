//! Closed subspaces of a finite-dimensional ambient space, stored as
//! orthonormal column frames.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::tol;

/// A subspace given by an orthonormal frame. `dim() == 0` encodes the
/// zero subspace.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    frame: CMat,
    rank_tol: f64,
}

impl Subspace {
    /// Wrap an orthonormal frame; fails if the columns are not orthonormal.
    pub fn new(frame: CMat) -> Result<Self> {
        let residual = linalg::frame_gram_residual(&frame);
        if residual > tol::GRAM_TOL {
            return Err(Error::FrameNotOrthonormal { residual });
        }
        Ok(Self {
            ambient_dim: frame.nrows(),
            frame,
            rank_tol: tol::RANK_REL,
        })
    }

    /// The zero subspace of the given ambient dimension.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: CMat::zeros(ambient_dim, 0),
            rank_tol: tol::RANK_REL,
        }
    }

    /// The full ambient space.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: CMat::identity(ambient_dim, ambient_dim),
            rank_tol: tol::RANK_REL,
        }
    }

    /// Orthonormalize the columns of `span` and keep the numeric range.
    pub fn from_span(span: &CMat) -> Self {
        Self {
            ambient_dim: span.nrows(),
            frame: linalg::orthonormal_range(span),
            rank_tol: tol::RANK_REL,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// The orthogonal projection matrix F F^H.
    pub fn projection(&self) -> CMat {
        &self.frame * self.frame.adjoint()
    }

    /// Orthonormal frame of the orthogonal complement inside the ambient.
    pub fn complement(&self) -> Subspace {
        let p = CMat::identity(self.ambient_dim, self.ambient_dim) - self.projection();
        Subspace::from_span(&p)
    }

    /// ||P_self - P_other||_2.
    pub fn principal_angle_distance(&self, other: &Subspace) -> f64 {
        linalg::principal_angle_distance(&self.frame, &other.frame)
    }

    /// sigma_max(F_self^H F_other), the largest cosine between the spans.
    pub fn max_overlap_cosine(&self, other: &Subspace) -> f64 {
        linalg::max_overlap_cosine(&self.frame, &other.frame)
    }

    /// ||(I - P_self) F_other||_2: zero iff other is contained in self.
    pub fn containment_residual(&self, other: &Subspace) -> f64 {
        linalg::containment_residual(&self.frame, other.frame())
    }
}
