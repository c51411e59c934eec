//! Dense finite-dimensional subspace algebra.
//!
//! A [`Subspace`] is stored as an orthonormal basis (an `ambient_dim x rank`
//! matrix with orthonormal columns), not as a projector matrix: O(d*r)
//! memory and numerically stable application. Projectors are materialized
//! only for invariant checks. The zero subspace (empty basis) is valid;
//! it arises as the complement of the full space.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Unit-norm and pairwise-orthogonality tolerance for stored bases.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;
/// Rank and projector-identity tolerance for family-level checks.
pub const FAMILY_TOL: f64 = 1e-10;
/// Default relative singular-value cutoff in [`Subspace::from_spanning`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

pub(crate) fn ensure_finite(x: &Vector) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Numerical rank of `m` from a column-pivoted QR: entries of diag(R) above
/// `tol` times the largest one.
pub(crate) fn qr_rank(m: &Matrix, tol: f64) -> usize {
    if m.ncols() == 0 || m.nrows() == 0 {
        return 0;
    }
    let qr = m.clone().col_piv_qr();
    let r = qr.r();
    let k = r.nrows().min(r.ncols());
    let diag: Vec<f64> = (0..k).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0_f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    diag.iter().filter(|&&v| v > tol * largest).count()
}

/// A linear subspace of R^d held by an orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceJson", into = "SubspaceJson")]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix, // ambient_dim x rank, orthonormal columns
    tol: f64,
}

impl Subspace {
    /// Orthonormal basis of the span of `vectors`, with numerical rank
    /// decided by singular values above `tol` times the largest one.
    pub fn from_spanning(vectors: &[Vector], ambient_dim: usize, tol: f64) -> Result<Self> {
        if tol <= 0.0 || !tol.is_finite() {
            return Err(Error::InvalidArgument(format!("rank tol must be positive, got {tol}")));
        }
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient_dim must be positive".into()));
        }
        for v in vectors {
            ensure_dim(ambient_dim, v.len())?;
            ensure_finite(v)?;
        }
        if vectors.is_empty() {
            return Ok(Self::zero(ambient_dim));
        }
        let a = Matrix::from_columns(vectors);
        let svd = a.svd(true, false);
        let u = svd.u.expect("svd requested u");
        let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        if smax == 0.0 {
            return Ok(Self::zero(ambient_dim));
        }
        let rank = svd.singular_values.iter().filter(|&&s| s > tol * smax).count();
        Ok(Self {
            ambient_dim,
            basis: u.columns(0, rank).into_owned(),
            tol,
        })
    }

    /// Wraps columns that are already orthonormal; validated at
    /// [`ORTHONORMALITY_TOL`].
    pub fn from_orthonormal(basis: Matrix) -> Result<Self> {
        let ambient_dim = basis.nrows();
        if ambient_dim == 0 {
            return Err(Error::InvalidArgument("ambient_dim must be positive".into()));
        }
        if basis.ncols() > ambient_dim {
            return Err(Error::NotOrthonormal(format!(
                "{} columns exceed ambient dimension {}",
                basis.ncols(),
                ambient_dim
            )));
        }
        if !basis.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let gram = basis.tr_mul(&basis);
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > ORTHONORMALITY_TOL {
                    return Err(Error::NotOrthonormal(format!(
                        "gram[{i},{j}] = {} deviates from {want}",
                        gram[(i, j)]
                    )));
                }
            }
        }
        Ok(Self {
            ambient_dim,
            basis,
            tol: DEFAULT_RANK_TOL,
        })
    }

    /// The zero subspace {0} of R^d.
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Matrix::zeros(ambient_dim, 0),
            tol: DEFAULT_RANK_TOL,
        }
    }

    /// The full space R^d.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            basis: Matrix::identity(ambient_dim, ambient_dim),
            tol: DEFAULT_RANK_TOL,
        }
    }

    /// The line spanned by `v` (or the zero subspace if `v = 0`),
    /// normalized directly so coordinate directions stay exact.
    pub fn line(v: &Vector) -> Result<Self> {
        ensure_finite(v)?;
        if v.is_empty() {
            return Err(Error::InvalidArgument("ambient_dim must be positive".into()));
        }
        let n = v.norm();
        if n == 0.0 {
            return Ok(Self::zero(v.len()));
        }
        Ok(Self {
            ambient_dim: v.len(),
            basis: Matrix::from_columns(&[v / n]),
            tol: DEFAULT_RANK_TOL,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    /// Orthogonal projection of `x` onto the subspace: `B (B^T x)`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.ambient_dim, x.len())?;
        if self.rank() == 0 {
            return Ok(Vector::zeros(self.ambient_dim));
        }
        Ok(&self.basis * self.basis.tr_mul(x))
    }

    /// Distance from `x` to the subspace, `|x - Px|`.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        let p = self.project(x)?;
        Ok((x - p).norm())
    }

    /// Orthogonal complement, via the eigenvectors of `I - B B^T` with
    /// eigenvalue 1.
    pub fn complement(&self) -> Self {
        let d = self.ambient_dim;
        if self.rank() == 0 {
            return Self::full(d);
        }
        if self.rank() == d {
            return Self::zero(d);
        }
        let p = Matrix::identity(d, d) - &self.basis * self.basis.transpose();
        let eig = nalgebra::SymmetricEigen::new(p);
        let cols: Vec<Vector> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|&(_, &l)| l > 0.5)
            .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
            .collect();
        debug_assert_eq!(cols.len(), d - self.rank());
        Self {
            ambient_dim: d,
            basis: Matrix::from_columns(&cols),
            tol: self.tol,
        }
    }

    /// Materialized projector matrix `B B^T`. Intended for invariant checks.
    pub fn projector(&self) -> Matrix {
        if self.rank() == 0 {
            return Matrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        &self.basis * self.basis.transpose()
    }

    /// Whether `x` lies in the subspace within `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl From<Subspace> for SubspaceJson {
    fn from(s: Subspace) -> Self {
        let basis = (0..s.basis.ncols())
            .map(|j| s.basis.column(j).iter().cloned().collect())
            .collect();
        SubspaceJson {
            ambient_dim: s.ambient_dim,
            basis,
        }
    }
}

impl TryFrom<SubspaceJson> for Subspace {
    type Error = Error;

    fn try_from(j: SubspaceJson) -> Result<Self> {
        let cols: Vec<Vector> = j.basis.iter().map(|row| Vector::from_vec(row.clone())).collect();
        for c in &cols {
            ensure_dim(j.ambient_dim, c.len())?;
        }
        if cols.is_empty() {
            return Ok(Subspace::zero(j.ambient_dim));
        }
        Subspace::from_orthonormal(Matrix::from_columns(&cols))
    }
}

/// A family of K >= 2 subspaces of R^d with trivial intersection, together
/// with their cached orthogonal complements.
///
/// Trivial intersection is checked through the complements: the stacked
/// complement bases must span R^d (rank check at [`FAMILY_TOL`]), which in
/// finite dimension is equivalent to the members intersecting only in {0}.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "FamilyJson", into = "FamilyJson")]
pub struct SubspaceFamily {
    ambient_dim: usize,
    members: Vec<Subspace>,
    complements: Vec<Subspace>,
}

impl SubspaceFamily {
    /// Builds a family, computing the complements.
    pub fn new(members: Vec<Subspace>) -> Result<Self> {
        let complements = members.iter().map(Subspace::complement).collect();
        Self::with_complements(members, complements)
    }

    /// Builds a family from members and precomputed complements.
    ///
    /// Validates: shared ambient dimension, complement ranks, the projector
    /// identity `P_k + P_k^perp = I` within [`FAMILY_TOL`], and the trivial
    /// intersection of the members.
    pub fn with_complements(members: Vec<Subspace>, complements: Vec<Subspace>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::FamilyInvariant(format!(
                "need at least 2 members, got {}",
                members.len()
            )));
        }
        if members.len() != complements.len() {
            return Err(Error::FamilyInvariant(
                "members and complements must have equal length".into(),
            ));
        }
        let d = members[0].ambient_dim();
        for s in members.iter().chain(complements.iter()) {
            ensure_dim(d, s.ambient_dim())?;
        }
        for (m, c) in members.iter().zip(complements.iter()) {
            if m.rank() + c.rank() != d {
                return Err(Error::FamilyInvariant(format!(
                    "ranks {} + {} do not sum to ambient dimension {d}",
                    m.rank(),
                    c.rank()
                )));
            }
            // P + P^perp = I, checked as B^T C ~ 0 on orthonormal bases,
            // which is equivalent and cheaper than materializing projectors.
            if m.rank() > 0 && c.rank() > 0 {
                let cross = m.basis().tr_mul(c.basis());
                let worst = cross.iter().cloned().fold(0.0_f64, |a, v| a.max(v.abs()));
                if worst > FAMILY_TOL {
                    return Err(Error::FamilyInvariant(format!(
                        "complement not orthogonal to member (max overlap {worst:.3e})"
                    )));
                }
            }
        }
        let fam = Self {
            ambient_dim: d,
            members,
            complements,
        };
        if !fam.sum_of_complements_is_full(FAMILY_TOL) {
            return Err(Error::FamilyInvariant(
                "members intersect nontrivially (stacked complements do not span)".into(),
            ));
        }
        Ok(fam)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Number of members K.
    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Subspace] {
        &self.members
    }

    pub fn complements(&self) -> &[Subspace] {
        &self.complements
    }

    pub fn member(&self, i: usize) -> &Subspace {
        &self.members[i]
    }

    pub fn complement(&self, i: usize) -> &Subspace {
        &self.complements[i]
    }

    /// True iff the stacked complement bases have numerical rank equal to
    /// the ambient dimension at tolerance `tol`.
    ///
    /// In finite dimension the sum of the complements is closed, so this
    /// decides whether every starting point enjoys the exponential-decay
    /// regime of the projection engines.
    pub fn sum_of_complements_is_full(&self, tol: f64) -> bool {
        let stacked = self.stacked_complements();
        qr_rank(&stacked, tol) == self.ambient_dim
    }

    /// All complement bases side by side (d x sum of complement ranks).
    pub fn stacked_complements(&self) -> Matrix {
        let total: usize = self.complements.iter().map(Subspace::rank).sum();
        let mut m = Matrix::zeros(self.ambient_dim, total);
        let mut at = 0;
        for c in &self.complements {
            m.columns_mut(at, c.rank()).copy_from(c.basis());
            at += c.rank();
        }
        m
    }

    /// Least-squares residual of `x` against the span of the stacked
    /// complement bases; 0 (to rounding) exactly when `x` lies in the sum
    /// of the complements.
    pub fn complement_sum_residual(&self, x: &Vector) -> Result<f64> {
        ensure_dim(self.ambient_dim, x.len())?;
        let a = self.stacked_complements();
        if a.ncols() == 0 {
            return Ok(x.norm());
        }
        // Full column rank: one QR solve. Otherwise go through the SVD.
        if a.ncols() == a.nrows() {
            let qr = a.clone().col_piv_qr();
            if let Some(z) = qr.solve(x) {
                let r = (&a * z - x).norm();
                if r.is_finite() {
                    return Ok(r);
                }
            }
        }
        let svd = a.clone().svd(true, false);
        let u = svd.u.expect("svd requested u");
        let smax = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
        let mut proj = Vector::zeros(self.ambient_dim);
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s > 1e-12 * smax {
                let ui = u.column(i);
                proj += ui.into_owned() * ui.dot(x);
            }
        }
        Ok((x - proj).norm())
    }

    /// FNV-1a fingerprint of dimensions and basis bits; identifies a family
    /// in serialized artifacts.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x1000_0000_01b3);
            }
        };
        eat(&(self.ambient_dim as u64).to_le_bytes());
        for s in &self.members {
            eat(&(s.rank() as u64).to_le_bytes());
            for v in s.basis().iter() {
                eat(&v.to_bits().to_le_bytes());
            }
        }
        h
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    ambient_dim: usize,
    members: Vec<SubspaceJson>,
}

impl From<SubspaceFamily> for FamilyJson {
    fn from(f: SubspaceFamily) -> Self {
        FamilyJson {
            ambient_dim: f.ambient_dim,
            members: f.members.into_iter().map(SubspaceJson::from).collect(),
        }
    }
}

impl TryFrom<FamilyJson> for SubspaceFamily {
    type Error = Error;

    fn try_from(j: FamilyJson) -> Result<Self> {
        let members: Result<Vec<Subspace>> = j.members.into_iter().map(Subspace::try_from).collect();
        let members = members?;
        for m in &members {
            ensure_dim(j.ambient_dim, m.ambient_dim())?;
        }
        SubspaceFamily::new(members)
    }
}

/// Convenience: the family of coordinate axes of R^d (K = d lines).
pub fn coordinate_axes(d: usize) -> Result<SubspaceFamily> {
    let members = (0..d)
        .map(|i| {
            let mut v = Vector::zeros(d);
            v[i] = 1.0;
            Subspace::line(&v)
        })
        .collect::<Result<Vec<_>>>()?;
    SubspaceFamily::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> Vector {
        Vector::from_vec(vec![a, b])
    }

    fn vec3(a: f64, b: f64, c: f64) -> Vector {
        Vector::from_vec(vec![a, b, c])
    }

    #[test]
    fn spanning_collinear_input_gives_rank_one() {
        let s = Subspace::from_spanning(&[vec2(1.0, 0.0), vec2(2.0, 0.0)], 2, 1e-10).unwrap();
        assert_eq!(s.rank(), 1);
        // span equals the x-axis
        let p = s.project(&vec2(1.0, 0.0)).unwrap();
        assert!((p - vec2(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn spanning_empty_gives_zero_subspace() {
        let s = Subspace::from_spanning(&[], 3, 1e-10).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.project(&vec3(1.0, 2.0, 3.0)).unwrap(), vec3(0.0, 0.0, 0.0));
    }

    #[test]
    fn spanning_full_rank_projector_matches_gram_formula() {
        // Oracle: P = A (A^T A)^{-1} A^T computed by a direct solve on the
        // raw (non-orthonormalized) spanning set.
        let a = Matrix::from_columns(&[vec2(1.0, 1.0), vec2(1.0, -1.0)]);
        let gram = a.tr_mul(&a);
        let inv = gram.try_inverse().unwrap();
        let oracle = &a * inv * a.transpose();

        let s = Subspace::from_spanning(&[vec2(1.0, 1.0), vec2(1.0, -1.0)], 2, 1e-10).unwrap();
        let p = s.projector();
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - oracle[(i, j)]).abs() < 1e-10);
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - id).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn spanning_rejects_bad_input() {
        assert!(Subspace::from_spanning(&[vec3(1.0, 0.0, 0.0)], 2, 1e-10).is_err());
        assert!(Subspace::from_spanning(&[vec2(f64::NAN, 0.0)], 2, 1e-10).is_err());
        assert!(Subspace::from_spanning(&[vec2(1.0, 0.0)], 2, 0.0).is_err());
    }

    #[test]
    fn project_on_axis() {
        let s = Subspace::line(&vec2(1.0, 0.0)).unwrap();
        assert_eq!(s.project(&vec2(3.0, 4.0)).unwrap(), vec2(3.0, 0.0));
    }

    #[test]
    fn project_on_diagonal_matches_least_squares() {
        let s = Subspace::line(&vec2(1.0, 1.0)).unwrap();
        let p = s.project(&vec2(1.0, 0.0)).unwrap();
        assert!((p.clone() - vec2(0.5, 0.5)).norm() < 1e-12);

        // Oracle: least-squares solve against the raw spanning vector.
        let a = Matrix::from_columns(&[vec2(1.0, 1.0)]);
        let coef = (a.tr_mul(&a)).try_inverse().unwrap() * a.tr_mul(&vec2(1.0, 0.0));
        let oracle = &a * coef;
        assert!((p - oracle).norm() < 1e-12);
    }

    #[test]
    fn complement_of_axis_is_other_axis() {
        let s = Subspace::line(&vec2(1.0, 0.0)).unwrap();
        let c = s.complement();
        assert_eq!(c.rank(), 1);
        assert!(c.distance(&vec2(0.0, 5.0)).unwrap() < 1e-12);
    }

    #[test]
    fn complement_of_full_space_is_zero() {
        let c = Subspace::full(3).complement();
        assert_eq!(c.rank(), 0);
    }

    #[test]
    fn complement_orthogonal_to_spanning_vector() {
        let v = vec3(1.0, 1.0, 0.0);
        let s = Subspace::line(&v).unwrap();
        let c = s.complement();
        assert_eq!(c.rank(), 2);
        for j in 0..c.rank() {
            let col = c.basis().column(j);
            assert!(col.dot(&v).abs() < 1e-12);
        }
        // projector identity
        let sum = s.projector() + c.projector();
        let id = Matrix::identity(3, 3);
        assert!((sum - id).amax() < 1e-10);
    }

    #[test]
    fn distance_examples() {
        let s = Subspace::line(&vec2(1.0, 0.0)).unwrap();
        assert!((s.distance(&vec2(3.0, 4.0)).unwrap() - 4.0).abs() < 1e-12);
        assert!(s.distance(&vec2(7.0, 0.0)).unwrap() < 1e-12);
        let diag = Subspace::line(&vec2(1.0, 1.0)).unwrap();
        let d = diag.distance(&vec2(1.0, 0.0)).unwrap();
        assert!((d - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn family_of_two_lines_is_valid_and_complements_full() {
        let f = coordinate_axes(2).unwrap();
        assert!(f.sum_of_complements_is_full(1e-10));
    }

    #[test]
    fn family_with_common_vector_rejected() {
        // Two planes in R^3 sharing the z-axis.
        let p1 = Subspace::from_spanning(&[vec3(1.0, 0.0, 0.0), vec3(0.0, 0.0, 1.0)], 3, 1e-10).unwrap();
        let p2 = Subspace::from_spanning(&[vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)], 3, 1e-10).unwrap();
        let err = SubspaceFamily::new(vec![p1, p2]).unwrap_err();
        assert!(matches!(err, Error::FamilyInvariant(_)));
    }

    #[test]
    fn subspace_json_round_trip_revalidates() {
        let s = Subspace::line(&vec2(3.0, 4.0)).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: Subspace = serde_json::from_str(&j).unwrap();
        assert_eq!(back.rank(), 1);
        assert!(back.distance(&vec2(3.0, 4.0)).unwrap() < 1e-10);

        // a JSON basis that is not orthonormal must be rejected
        let bad = r#"{"ambient_dim":2,"basis":[[1.0,1.0]]}"#;
        assert!(serde_json::from_str::<Subspace>(bad).is_err());
    }

    #[test]
    fn family_json_round_trip() {
        let f = coordinate_axes(3).unwrap();
        let j = serde_json::to_string(&f).unwrap();
        let back: SubspaceFamily = serde_json::from_str(&j).unwrap();
        assert_eq!(back.k(), 3);
        assert_eq!(back.fingerprint(), f.fingerprint());
    }
}
