//! Dense rank-2 and rank-3 tensors in dimension `d`, their orthogonal
//! projections, boundary-frame components and orthonormal stf bases.
//!
//! All contractions are Frobenius contractions. Rank-3 storage is row-major in
//! `(i, j, k)`, so `(T ⊗ ξ)_{ijk} = T_{ij} ξ_k` matches the gradient
//! convention `(Dσ)_{ijk} = ∂_k σ_{ij}`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Projection kinds for rank-2 tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proj2 {
    /// `½(M + Mᵀ)`
    Sym,
    /// `½(M − Mᵀ)`
    Skew,
    /// `M − (tr M / d) I`
    Dev,
    /// `dev sym M`
    Stf,
}

/// Projection kinds for rank-3 tensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proj3 {
    /// Average over all index permutations.
    Sym,
    /// Subtract the single-index traces with coefficient `1/(d+2)`.
    Dev,
    /// `Dev` applied to `Sym`.
    Stf,
}

/// The rank-3 trace coefficient `1/(d+2)`.
pub fn rank3_trace_coefficient<T: Scalar>(d: usize) -> T {
    T::from_ratio(1, d as i64 + 2)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tensor2<T> {
    dim: usize,
    data: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tensor3<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> Tensor2<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a tensor from row-major entries; `entries.len()` must be `d²`.
    pub fn from_row_major(dim: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "rank-2 tensor in d={dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    /// Dyadic product `a ⊗ b`.
    pub fn dyad(a: &[T], b: &[T]) -> Self {
        assert_eq!(a.len(), b.len());
        Self::from_fn(a.len(), |i, j| a[i] * b[j])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Tensor2<U> {
        Tensor2 {
            dim: self.dim,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// Frobenius contraction `A : B = Σ A_ij B_ij` (bilinear, no conjugation).
    pub fn contract(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Hermitian Frobenius inner product `Σ conj(A_ij) B_ij`.
    pub fn inner(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.abs_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `M v`
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `M ⊗ v`, i.e. `(M ⊗ v)_{ijk} = M_ij v_k`.
    pub fn outer_vec(&self, v: &[T]) -> Tensor3<T> {
        assert_eq!(v.len(), self.dim);
        Tensor3::from_fn(self.dim, |i, j, k| self[(i, j)] * v[k])
    }

    pub fn project(&self, kind: Proj2) -> Self {
        let d = self.dim;
        match kind {
            Proj2::Sym => {
                let half = T::from_ratio(1, 2);
                Self::from_fn(d, |i, j| half * (self[(i, j)] + self[(j, i)]))
            }
            Proj2::Skew => {
                let half = T::from_ratio(1, 2);
                Self::from_fn(d, |i, j| half * (self[(i, j)] - self[(j, i)]))
            }
            Proj2::Dev => {
                let t = self.trace() * T::from_ratio(1, d as i64);
                Self::from_fn(d, |i, j| {
                    if i == j {
                        self[(i, j)] - t
                    } else {
                        self[(i, j)]
                    }
                })
            }
            Proj2::Stf => self.project(Proj2::Sym).project(Proj2::Dev),
        }
    }
}

impl<T: Scalar> Tensor3<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(dim * dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dim, data }
    }

    pub fn from_row_major(dim: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "rank-3 tensor in d={dim} needs {} entries, got {}",
                dim * dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    /// The canonical basis tensor `e_i ⊗ e_j ⊗ e_k`.
    pub fn unit(dim: usize, i: usize, j: usize, k: usize) -> Self {
        let mut t = Self::zeros(dim);
        t[(i, j, k)] = T::one();
        t
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Tensor3<U> {
        Tensor3 {
            dim: self.dim,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// Frobenius contraction `Σ A_ijk B_ijk`.
    pub fn contract(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.abs_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// The three single-index traces `(Σ_l T_ill, Σ_l T_ljl, Σ_l T_llk)`.
    pub fn traces(&self) -> [Vec<T>; 3] {
        let d = self.dim;
        let mut a = vec![T::zero(); d];
        let mut b = vec![T::zero(); d];
        let mut c = vec![T::zero(); d];
        for m in 0..d {
            for l in 0..d {
                a[m] += self[(m, l, l)];
                b[m] += self[(l, m, l)];
                c[m] += self[(l, l, m)];
            }
        }
        [a, b, c]
    }

    /// Contraction `Σ_{ijk} T_ijk a_i b_j c_k`.
    pub fn contract_vectors(&self, a: &[T], b: &[T], c: &[T]) -> T {
        let d = self.dim;
        let mut acc = T::zero();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    acc += self[(i, j, k)] * a[i] * b[j] * c[k];
                }
            }
        }
        acc
    }

    pub fn project(&self, kind: Proj3) -> Self {
        match kind {
            Proj3::Sym => {
                let sixth = T::from_ratio(1, 6);
                Self::from_fn(self.dim, |i, j, k| {
                    sixth
                        * (self[(i, j, k)]
                            + self[(j, k, i)]
                            + self[(k, i, j)]
                            + self[(j, i, k)]
                            + self[(i, k, j)]
                            + self[(k, j, i)])
                })
            }
            Proj3::Dev => self.subtract_traces(),
            Proj3::Stf => self.project(Proj3::Sym).subtract_traces(),
        }
    }

    fn subtract_traces(&self) -> Self {
        let c: T = rank3_trace_coefficient(self.dim);
        let [a, b, t] = self.traces();
        let delta = |p: usize, q: usize| if p == q { T::one() } else { T::zero() };
        Self::from_fn(self.dim, |i, j, k| {
            self[(i, j, k)] - c * (a[i] * delta(j, k) + b[j] * delta(i, k) + t[k] * delta(i, j))
        })
    }
}

impl<T> Index<(usize, usize)> for Tensor2<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Tensor2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[(i * self.dim + j) * self.dim + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    #[inline]
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.data[(i * self.dim + j) * self.dim + k]
    }
}

macro_rules! impl_elementwise {
    ($ty:ident) => {
        impl<T: Scalar> Add for &$ty<T> {
            type Output = $ty<T>;
            fn add(self, rhs: Self) -> $ty<T> {
                assert_eq!(self.dim, rhs.dim);
                $ty {
                    dim: self.dim,
                    data: self
                        .data
                        .iter()
                        .zip(&rhs.data)
                        .map(|(&a, &b)| a + b)
                        .collect(),
                }
            }
        }
        impl<T: Scalar> Sub for &$ty<T> {
            type Output = $ty<T>;
            fn sub(self, rhs: Self) -> $ty<T> {
                assert_eq!(self.dim, rhs.dim);
                $ty {
                    dim: self.dim,
                    data: self
                        .data
                        .iter()
                        .zip(&rhs.data)
                        .map(|(&a, &b)| a - b)
                        .collect(),
                }
            }
        }
        impl<T: Scalar> Neg for &$ty<T> {
            type Output = $ty<T>;
            fn neg(self) -> $ty<T> {
                self.map(|x| -x)
            }
        }
        impl<T: Scalar> Mul<T> for &$ty<T> {
            type Output = $ty<T>;
            fn mul(self, s: T) -> $ty<T> {
                self.scale(s)
            }
        }
    };
}

impl_elementwise!(Tensor2);
impl_elementwise!(Tensor3);

/// Orthonormal boundary frame `(t1, t2, n)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Frame {
    pub n: [f64; 3],
    pub t1: [f64; 3],
    pub t2: [f64; 3],
}

const FRAME_TOL: f64 = 1e-12;

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

impl Frame {
    /// Validates orthonormality and right-handedness (`t1 × t2 = n`).
    pub fn new(n: [f64; 3], t1: [f64; 3], t2: [f64; 3]) -> Result<Self> {
        let frame = Self { n, t1, t2 };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        let vs = [&self.n, &self.t1, &self.t2];
        for (a, va) in vs.iter().enumerate() {
            for (b, vb) in vs.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                if (dot3(va, vb) - expected).abs() > FRAME_TOL {
                    return Err(Error::InvalidFrame(format!(
                        "vectors {a} and {b} are not orthonormal"
                    )));
                }
            }
        }
        let c = cross3(&self.t1, &self.t2);
        if (0..3).any(|i| (c[i] - self.n[i]).abs() > FRAME_TOL) {
            return Err(Error::InvalidFrame("t1 × t2 ≠ n".into()));
        }
        Ok(())
    }

    /// Frame of the unit-cube face with outward normal `sign · e_axis`.
    pub fn cube_face(axis: usize, positive: bool) -> Self {
        let e = |i: usize| {
            let mut v = [0.0; 3];
            v[i] = 1.0;
            v
        };
        let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
        let mut n = e(axis);
        if positive {
            Self {
                n,
                t1: e(a),
                t2: e(b),
            }
        } else {
            n[axis] = -1.0;
            Self {
                n,
                t1: e(b),
                t2: e(a),
            }
        }
    }
}

/// Frame components of a rank-2 tensor.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MatrixComponents {
    pub nn: f64,
    pub nt1: f64,
    pub nt2: f64,
    pub t1t1: f64,
    pub t1t2: f64,
    pub t2t2: f64,
}

/// Frame components of a vector.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct VectorComponents {
    pub n: f64,
    pub t1: f64,
    pub t2: f64,
}

/// The rank-3 components entering the wall relations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Rank3Components {
    pub nnn: f64,
    pub nnt1: f64,
    pub nnt2: f64,
    pub nt1t1: f64,
    pub nt1t2: f64,
}

fn require_dim3(dim: usize) -> Result<()> {
    if dim != 3 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "frame components are defined for d = 3",
        });
    }
    Ok(())
}

/// Contracts a rank-2 tensor with the frame vectors.
pub fn matrix_components(sigma: &Tensor2<f64>, frame: &Frame) -> Result<MatrixComponents> {
    require_dim3(sigma.dim())?;
    frame.validate()?;
    let q = |a: &[f64; 3], b: &[f64; 3]| {
        let mut acc = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                acc += sigma[(i, j)] * a[i] * b[j];
            }
        }
        acc
    };
    Ok(MatrixComponents {
        nn: q(&frame.n, &frame.n),
        nt1: q(&frame.n, &frame.t1),
        nt2: q(&frame.n, &frame.t2),
        t1t1: q(&frame.t1, &frame.t1),
        t1t2: q(&frame.t1, &frame.t2),
        t2t2: q(&frame.t2, &frame.t2),
    })
}

pub fn vector_components(v: &[f64], frame: &Frame) -> Result<VectorComponents> {
    require_dim3(v.len())?;
    frame.validate()?;
    let v3 = [v[0], v[1], v[2]];
    Ok(VectorComponents {
        n: dot3(&v3, &frame.n),
        t1: dot3(&v3, &frame.t1),
        t2: dot3(&v3, &frame.t2),
    })
}

pub fn rank3_components(m: &Tensor3<f64>, frame: &Frame) -> Result<Rank3Components> {
    require_dim3(m.dim())?;
    frame.validate()?;
    let (n, t1, t2) = (&frame.n[..], &frame.t1[..], &frame.t2[..]);
    Ok(Rank3Components {
        nnn: m.contract_vectors(n, n, n),
        nnt1: m.contract_vectors(n, n, t1),
        nnt2: m.contract_vectors(n, n, t2),
        nt1t1: m.contract_vectors(n, t1, t1),
        nt1t2: m.contract_vectors(n, t1, t2),
    })
}

/// Orthonormal basis of the symmetric trace-free `d × d` matrices.
///
/// Ordering: the `d − 1` diagonal tensors
/// `(Σ_{k<m} e_k⊗e_k − m e_m⊗e_m)/√(m(m+1))` for `m = 1..d−1`, followed by
/// `(e_i⊗e_j + e_j⊗e_i)/√2` for `i < j` in lexicographic order.
pub fn stf_basis2(d: usize) -> Vec<Tensor2<f64>> {
    let mut basis = Vec::with_capacity(d * (d + 1) / 2 - 1);
    for m in 1..d {
        let scale = 1.0 / ((m * (m + 1)) as f64).sqrt();
        basis.push(Tensor2::from_fn(d, |i, j| {
            if i != j {
                0.0
            } else if i < m {
                scale
            } else if i == m {
                -(m as f64) * scale
            } else {
                0.0
            }
        }));
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            basis.push(Tensor2::from_fn(d, |a, b| {
                if (a, b) == (i, j) || (a, b) == (j, i) {
                    r
                } else {
                    0.0
                }
            }));
        }
    }
    basis
}

/// Dimension of the fully symmetric trace-free rank-3 tensors:
/// `C(d+2, 3) − d`.
pub fn stf3_dimension(d: usize) -> usize {
    d * (d + 1) * (d + 2) / 6 - d
}

/// Orthonormal basis of the Stf rank-3 subspace, obtained by Gram–Schmidt on
/// `Stf(e_i⊗e_j⊗e_k)` for `i ≤ j ≤ k` in lexicographic order.
pub fn stf_basis3(d: usize) -> Vec<Tensor3<f64>> {
    let mut basis: Vec<Tensor3<f64>> = Vec::with_capacity(stf3_dimension(d));
    for i in 0..d {
        for j in i..d {
            for k in j..d {
                let mut t = Tensor3::<f64>::unit(d, i, j, k).project(Proj3::Stf);
                // two passes of modified Gram-Schmidt
                for _ in 0..2 {
                    for b in &basis {
                        let c = b.contract(&t);
                        t = &t - &b.scale(c);
                    }
                }
                let n = t.norm();
                if n > 1e-10 {
                    basis.push(t.scale(1.0 / n));
                }
            }
        }
    }
    basis
}

/// Coordinates of a symmetric trace-free matrix in [`stf_basis2`].
pub fn stf2_coordinates(m: &Tensor2<f64>) -> Vec<f64> {
    stf_basis2(m.dim()).iter().map(|b| b.contract(m)).collect()
}

/// Rebuilds a matrix from [`stf_basis2`] coordinates.
pub fn stf2_from_coordinates(d: usize, coords: &[f64]) -> Tensor2<f64> {
    let basis = stf_basis2(d);
    assert_eq!(coords.len(), basis.len());
    basis
        .iter()
        .zip(coords)
        .fold(Tensor2::zeros(d), |acc, (b, &c)| &acc + &b.scale(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn t2(d: usize, v: &[f64]) -> Tensor2<f64> {
        Tensor2::from_row_major(d, v.to_vec()).unwrap()
    }

    #[test]
    fn identity_has_no_stf_part() {
        let s = Tensor2::<f64>::identity(3).project(Proj2::Stf);
        assert!(s.norm() == 0.0);
    }

    #[test]
    fn off_diagonal_dyad_is_symmetrized() {
        let e1 = [1.0, 0.0, 0.0];
        let e2 = [0.0, 1.0, 0.0];
        let s = Tensor2::dyad(&e1, &e2).project(Proj2::Stf);
        let expected = &Tensor2::dyad(&e1, &e2) + &Tensor2::dyad(&e2, &e1);
        assert_eq!(s, expected.scale(0.5));
    }

    #[test]
    fn stf_of_isotropic_vector_product_vanishes_exactly() {
        // a·(1 ⊗ ξ) for rational a, ξ: Stf removes it without rounding
        let a = Rational64::new(3, 7);
        let xi = [
            Rational64::new(1, 2),
            Rational64::new(-2, 3),
            Rational64::new(5, 1),
        ];
        let t = Tensor2::<Rational64>::identity(3).scale(a).outer_vec(&xi);
        let s = t.project(Proj3::Stf);
        assert!(s
            .as_slice()
            .iter()
            .all(|x| *x == Rational64::from_integer(0)));
    }

    #[test]
    fn stf_range_rank_matches_dimension() {
        for d in 2..=5 {
            let n = d * d * d;
            let mut cols = Vec::new();
            for idx in 0..n {
                let (i, j, k) = (idx / (d * d), (idx / d) % d, idx % d);
                cols.extend(
                    Tensor3::<f64>::unit(d, i, j, k)
                        .project(Proj3::Stf)
                        .as_slice()
                        .to_vec(),
                );
            }
            let m = nalgebra::DMatrix::from_column_slice(n, n, &cols);
            let sv = m.singular_values();
            let rank = sv.iter().filter(|&&s| s > 1e-10).count();
            assert_eq!(rank, stf3_dimension(d), "d = {d}");
        }
        assert_eq!(stf3_dimension(3), 7);
    }

    #[test]
    fn stf_basis_sizes_and_orthonormality() {
        assert_eq!(stf_basis2(3).len(), 5);
        assert_eq!(stf_basis2(2).len(), 2);
        for d in 2..=5 {
            let b = stf_basis2(d);
            assert_eq!(b.len(), d * (d + 1) / 2 - 1);
            for (i, x) in b.iter().enumerate() {
                assert!(x.trace().abs() < 1e-15);
                assert_eq!(x, &x.transpose());
                for (j, y) in b.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((x.contract(y) - expected).abs() < 1e-13);
                }
            }
            let b3 = stf_basis3(d);
            assert_eq!(b3.len(), stf3_dimension(d));
            for (i, x) in b3.iter().enumerate() {
                assert!((&x.project(Proj3::Stf) - x).norm() < 1e-13);
                for (j, y) in b3.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((x.contract(y) - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn frame_components_of_diagonal_tensor() {
        let sigma = t2(3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -3.0]);
        let frame = Frame::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]).unwrap();
        let c = matrix_components(&sigma, &frame).unwrap();
        assert_eq!(c.nn, -3.0);
        assert_eq!(c.t1t1, 1.0);
        assert_eq!(c.t2t2, 2.0);
        let v = vector_components(&frame.n, &frame).unwrap();
        assert_eq!((v.n, v.t1, v.t2), (1.0, 0.0, 0.0));
    }

    #[test]
    fn invalid_frames_are_rejected() {
        let err = Frame::new([0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("invalid frame"));
        // left-handed
        assert!(Frame::new([0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]).is_err());
        let bad = Frame {
            n: [0.0, 0.0, 2.0],
            t1: [1.0, 0.0, 0.0],
            t2: [0.0, 1.0, 0.0],
        };
        assert!(matrix_components(&Tensor2::zeros(3), &bad).is_err());
    }

    #[test]
    fn cube_face_frames_are_valid() {
        for axis in 0..3 {
            for positive in [false, true] {
                let f = Frame::cube_face(axis, positive);
                f.validate().unwrap();
                assert_eq!(f.n[axis], if positive { 1.0 } else { -1.0 });
            }
        }
    }

    #[test]
    fn complex_projection_commutes_with_conjugation() {
        let m = Tensor2::from_fn(3, |i, j| Complex64::new(i as f64 + 1.0, j as f64 - 2.0));
        let a = m.project(Proj2::Stf).map(|z| z.conj());
        let b = m.map(|z| z.conj()).project(Proj2::Stf);
        assert!((&a - &b).norm() < 1e-15);
    }

    #[test]
    fn dev3_is_idempotent_on_symmetric_input() {
        let t =
            Tensor3::from_fn(3, |i, j, k| ((i * 7 + j * 3 + k) as f64).sin()).project(Proj3::Sym);
        let once = t.project(Proj3::Dev);
        let twice = once.project(Proj3::Dev);
        assert!((&once - &twice).norm() < 1e-13);
    }

    fn tensor2_strategy(d: usize) -> impl Strategy<Value = Tensor2<f64>> {
        prop::collection::vec(-10.0f64..10.0, d * d)
            .prop_map(move |v| Tensor2::from_row_major(d, v).unwrap())
    }

    fn tensor3_strategy(d: usize) -> impl Strategy<Value = Tensor3<f64>> {
        prop::collection::vec(-10.0f64..10.0, d * d * d)
            .prop_map(move |v| Tensor3::from_row_major(d, v).unwrap())
    }

    proptest! {
        #[test]
        fn rank2_projections_idempotent_and_orthogonal(m in (2usize..6).prop_flat_map(tensor2_strategy)) {
            let scale = 1.0 + m.norm_sqr();
            for kind in [Proj2::Sym, Proj2::Skew, Proj2::Dev, Proj2::Stf] {
                let p = m.project(kind);
                prop_assert!((&p.project(kind) - &p).norm() <= 1e-13 * scale);
                let rest = &m - &p;
                prop_assert!(p.contract(&rest).abs() <= 1e-13 * scale);
            }
            prop_assert!(m.project(Proj2::Dev).trace().abs() <= 1e-13 * scale);
            prop_assert!(m.project(Proj2::Stf).trace().abs() <= 1e-13 * scale);
        }

        #[test]
        fn pythagorean_split(m in (2usize..6).prop_flat_map(tensor2_strategy)) {
            let d = m.dim();
            let iso = Tensor2::identity(d).scale(m.trace() / d as f64);
            let total = m.project(Proj2::Stf).norm_sqr()
                + m.project(Proj2::Skew).norm_sqr()
                + iso.norm_sqr();
            prop_assert!((m.norm_sqr() - total).abs() <= 1e-12 * (1.0 + m.norm_sqr()));
        }

        #[test]
        fn rank3_projections_idempotent(t in (2usize..6).prop_flat_map(tensor3_strategy)) {
            let scale = 1.0 + t.norm_sqr();
            for kind in [Proj3::Sym, Proj3::Stf] {
                let p = t.project(kind);
                prop_assert!((&p.project(kind) - &p).norm() <= 1e-13 * scale);
                prop_assert!(p.contract(&(&t - &p)).abs() <= 1e-12 * scale);
            }
            let s = t.project(Proj3::Stf);
            for tr in s.traces() {
                prop_assert!(tr.iter().all(|x| x.abs() <= 1e-13 * scale));
            }
        }

        #[test]
        fn stf_trace_invariant_in_frame(v in prop::collection::vec(-5.0f64..5.0, 9), ang in 0.0f64..std::f64::consts::TAU) {
            let sigma = Tensor2::from_row_major(3, v).unwrap().project(Proj2::Stf);
            let (c, s) = (ang.cos(), ang.sin());
            let frame = Frame::new([0.0, 0.0, 1.0], [c, s, 0.0], [-s, c, 0.0]).unwrap();
            let k = matrix_components(&sigma, &frame).unwrap();
            prop_assert!((k.nn + k.t1t1 + k.t2t2).abs() < 1e-13 * (1.0 + sigma.norm()));
        }
    }
}
