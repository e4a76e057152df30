//! Pointwise linear operators on coefficient fields and their assembly
//! into bilinear forms, functionals and point values.
//!
//! A [`LinOp`] is a finite sum `Σ coeff · ∂^{deriv} field_comp`. Tensor-valued
//! quantities (`σ`, `Stf Dσ`, `sym Ds`, frame components, ...) are lists of
//! `LinOp`s, one per ambient entry in row-major order.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::basis::{PointGrid, ScalarSpace};
use super::space::{quadrature_points, Field, Layout};
use crate::tensor::{stf_basis2, Proj2, Proj3, Tensor2, Tensor3};

/// Trial field, component, derivative, then the same for the test side.
type PairKey = (Field, usize, Option<usize>, Field, usize, Option<usize>);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub field: Field,
    pub comp: usize,
    pub deriv: Option<usize>,
    pub coeff: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinOp(pub Vec<Term>);

impl LinOp {
    pub fn term(field: Field, comp: usize, deriv: Option<usize>, coeff: f64) -> Self {
        Self(vec![Term {
            field,
            comp,
            deriv,
            coeff,
        }])
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(
            self.0
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..*t
                })
                .collect(),
        )
    }

    pub fn plus(mut self, other: &LinOp) -> Self {
        self.0.extend_from_slice(&other.0);
        self.simplified()
    }

    /// Merges repeated `(field, comp, deriv)` and drops zero coefficients.
    pub fn simplified(self) -> Self {
        let mut out: Vec<Term> = Vec::with_capacity(self.0.len());
        for t in self.0 {
            match out
                .iter_mut()
                .find(|o| o.field == t.field && o.comp == t.comp && o.deriv == t.deriv)
            {
                Some(o) => o.coeff += t.coeff,
                None => out.push(t),
            }
        }
        out.retain(|t| t.coeff.abs() > 1e-15);
        Self(out)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ_k c_k · ops_k`.
pub fn combine(ops: &[LinOp], coeffs: impl IntoIterator<Item = f64>) -> LinOp {
    let mut terms = Vec::new();
    for (op, c) in ops.iter().zip(coeffs) {
        if c != 0.0 {
            terms.extend(op.scaled(c).0);
        }
    }
    LinOp(terms).simplified()
}

/// Entries `σ_ij` of an stf tensor field stored in stf basis coordinates.
pub fn stf_values(field: Field, dim: usize) -> Vec<LinOp> {
    let basis = stf_basis2(dim);
    (0..dim * dim)
        .map(|e| {
            let terms = basis
                .iter()
                .enumerate()
                .map(|(c, b)| Term {
                    field,
                    comp: c,
                    deriv: None,
                    coeff: b.as_slice()[e],
                })
                .collect();
            LinOp(terms).simplified()
        })
        .collect()
}

/// Entries `∂_k σ_ij` (index `(i·d + j)·d + k`).
pub fn stf_gradient(field: Field, dim: usize) -> Vec<LinOp> {
    let values = stf_values(field, dim);
    let mut out = Vec::with_capacity(dim * dim * dim);
    for v in &values {
        for k in 0..dim {
            out.push(LinOp(
                v.0.iter()
                    .map(|t| Term {
                        deriv: Some(k),
                        ..*t
                    })
                    .collect(),
            ));
        }
    }
    out
}

/// Entries `v_i`.
pub fn vector_values(field: Field, dim: usize) -> Vec<LinOp> {
    (0..dim).map(|i| LinOp::term(field, i, None, 1.0)).collect()
}

/// Entries `(Dv)_ij = ∂_j v_i`.
pub fn vector_gradient(field: Field, dim: usize) -> Vec<LinOp> {
    let mut out = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            out.push(LinOp::term(field, i, Some(j), 1.0));
        }
    }
    out
}

pub fn scalar_value(field: Field) -> LinOp {
    LinOp::term(field, 0, None, 1.0)
}

pub fn scalar_gradient(field: Field, dim: usize) -> Vec<LinOp> {
    (0..dim)
        .map(|k| LinOp::term(field, 0, Some(k), 1.0))
        .collect()
}

pub fn vector_divergence(field: Field, dim: usize) -> LinOp {
    LinOp(
        (0..dim)
            .map(|i| Term {
                field,
                comp: i,
                deriv: Some(i),
                coeff: 1.0,
            })
            .collect(),
    )
}

/// `(Div σ)_i = Σ_j ∂_j σ_ij`.
pub fn matrix_divergence(entries3: &[LinOp], dim: usize) -> Vec<LinOp> {
    (0..dim)
        .map(|i| {
            let ops: Vec<LinOp> = (0..dim)
                .map(|j| entries3[(i * dim + j) * dim + j].clone())
                .collect();
            combine(&ops, std::iter::repeat(1.0))
        })
        .collect()
}

/// Applies a rank-2 projection entrywise to a list of `d²` entries.
pub fn project2(entries: &[LinOp], dim: usize, proj: Proj2) -> Vec<LinOp> {
    let images: Vec<Tensor2<f64>> = (0..dim * dim)
        .map(|ab| {
            Tensor2::from_fn(dim, |i, j| if i * dim + j == ab { 1.0 } else { 0.0 }).project(proj)
        })
        .collect();
    (0..dim * dim)
        .map(|e| combine(entries, images.iter().map(|t| t.as_slice()[e])))
        .collect()
}

/// Applies a rank-3 projection entrywise to a list of `d³` entries.
pub fn project3(entries: &[LinOp], dim: usize, proj: Proj3) -> Vec<LinOp> {
    let n = dim * dim * dim;
    let images: Vec<Tensor3<f64>> = (0..n)
        .map(|abc| {
            let mut t = Tensor3::zeros(dim);
            let (a, b, c) = (abc / (dim * dim), (abc / dim) % dim, abc % dim);
            t[(a, b, c)] = 1.0;
            t.project(proj)
        })
        .collect();
    (0..n)
        .map(|e| combine(entries, images.iter().map(|t| t.as_slice()[e])))
        .collect()
}

/// `Σ_ij a_i b_j T_ij`.
pub fn contract2(entries: &[LinOp], dim: usize, a: &[f64], b: &[f64]) -> LinOp {
    let coeffs = (0..dim * dim).map(|e| a[e / dim] * b[e % dim]);
    combine(entries, coeffs)
}

/// `Σ_ijk a_i b_j c_k T_ijk`.
pub fn contract3(entries: &[LinOp], dim: usize, a: &[f64], b: &[f64], c: &[f64]) -> LinOp {
    let coeffs = (0..dim * dim * dim).map(|e| a[e / (dim * dim)] * b[(e / dim) % dim] * c[e % dim]);
    combine(entries, coeffs)
}

/// `Σ_i a_i v_i`.
pub fn contract1(entries: &[LinOp], a: &[f64]) -> LinOp {
    combine(entries, a.iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Volume,
    Face { axis: usize, positive: bool },
}

impl Region {
    pub fn faces() -> impl Iterator<Item = Region> {
        (0..6).map(|f| Region::Face {
            axis: f / 2,
            positive: f % 2 == 1,
        })
    }
}

type Key = (Field, Field, Option<usize>, Option<usize>, Region);

/// Assembles `Σ weight ∫_region L_trial(U) L_test(V)` into dense matrices
/// with rows indexed by `test` and columns by `trial`.
pub struct Assembler<'a> {
    test: &'a Layout,
    trial: &'a Layout,
    cache: HashMap<Key, DMatrix<f64>>,
}

impl<'a> Assembler<'a> {
    pub fn new(test: &'a Layout, trial: &'a Layout) -> Self {
        Self {
            test,
            trial,
            cache: HashMap::new(),
        }
    }

    pub fn zeros(&self) -> DMatrix<f64> {
        DMatrix::zeros(self.test.len(), self.trial.len())
    }

    fn scalar_matrix(&mut self, key: Key) -> &DMatrix<f64> {
        let (ft, fr, dt, dr, region) = key;
        let test = self.test.block(ft).expect("test field in layout").space;
        let trial = self.trial.block(fr).expect("trial field in layout").space;
        self.cache.entry(key).or_insert_with(|| match region {
            Region::Volume => ScalarSpace::volume_matrix(&test, &trial, dt, dr),
            Region::Face { axis, positive } => {
                assert!(
                    dt.is_none() && dr.is_none(),
                    "face integrals take traces only"
                );
                ScalarSpace::face_matrix(&test, &trial, axis, positive)
            }
        })
    }

    /// Adds `weight · Σ_pairs ∫ trial_op · test_op` to `out`.
    pub fn add(
        &mut self,
        out: &mut DMatrix<f64>,
        region: Region,
        weight: f64,
        pairs: &[(LinOp, LinOp)],
    ) {
        let mut coeffs: HashMap<PairKey, f64> = HashMap::new();
        for (trial, test) in pairs {
            for r in &trial.0 {
                for t in &test.0 {
                    *coeffs
                        .entry((r.field, r.comp, r.deriv, t.field, t.comp, t.deriv))
                        .or_default() += weight * r.coeff * t.coeff;
                }
            }
        }
        let mut keys: Vec<_> = coeffs
            .into_iter()
            .filter(|(_, c)| c.abs() > 1e-15)
            .collect();
        keys.sort_by(|a, b| {
            let ka = (a.0 .0, a.0 .1, a.0 .2, a.0 .3, a.0 .4, a.0 .5);
            let kb = (b.0 .0, b.0 .1, b.0 .2, b.0 .3, b.0 .4, b.0 .5);
            ka.partial_cmp(&kb).expect("total order on keys")
        });
        for ((fr, cr, dr, ft, ct, dt), c) in keys {
            let row0 = self
                .test
                .block(ft)
                .expect("test field in layout")
                .index(ct, 0);
            let col0 = self
                .trial
                .block(fr)
                .expect("trial field in layout")
                .index(cr, 0);
            let s = self.scalar_matrix((ft, fr, dt, dr, region));
            let mut view = out.view_mut((row0, col0), (s.nrows(), s.ncols()));
            view.zip_apply(s, |a, b| *a += c * b);
        }
    }

    pub fn matrix(
        &mut self,
        region: Region,
        weight: f64,
        pairs: &[(LinOp, LinOp)],
    ) -> DMatrix<f64> {
        let mut out = self.zeros();
        self.add(&mut out, region, weight, pairs);
        out
    }
}

/// Pairs `(a_k, b_k)` for the contraction `Σ_k a_k b_k` of two entry lists.
pub fn dot_pairs(trial: &[LinOp], test: &[LinOp]) -> Vec<(LinOp, LinOp)> {
    trial
        .iter()
        .zip(test)
        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
        .map(|(a, b)| (a.clone(), b.clone()))
        .collect()
}

fn region_grid(space: &ScalarSpace, region: Region, extra: usize) -> PointGrid {
    let q = quadrature_points(space.basis.degree) + extra;
    match region {
        Region::Volume => space.volume_grid(q),
        Region::Face { axis, positive } => space.face_grid(q, axis, positive),
    }
}

/// `∫_region g · L(V)` for every basis function of `layout`.
pub fn functional(
    layout: &Layout,
    region: Region,
    op: &LinOp,
    g: &dyn Fn([f64; 3]) -> f64,
) -> DVector<f64> {
    let mut out = DVector::zeros(layout.len());
    for t in &op.0 {
        let block = layout.block(t.field).expect("field in layout");
        assert!(
            t.deriv.is_none() || region == Region::Volume,
            "face functionals take traces only"
        );
        let grid = region_grid(&block.space, region, 2);
        let v = block.space.functional(&grid, t.deriv, g);
        for (i, x) in v.into_iter().enumerate() {
            out[block.index(t.comp, i)] += t.coeff * x;
        }
    }
    out
}

/// Values of `∂_{extra} L(U)` on `grid` for full coefficients `coeffs`.
pub fn evaluate(
    layout: &Layout,
    coeffs: &DVector<f64>,
    op: &LinOp,
    grid: &PointGrid,
    extra: Option<usize>,
) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for t in &op.0 {
        let block = layout.block(t.field).expect("field in layout");
        let n = block.space.len();
        let start = block.index(t.comp, 0);
        let slice = coeffs.rows(start, n);
        let mut alpha = [0usize; 3];
        if let Some(k) = t.deriv {
            alpha[k] += 1;
        }
        if let Some(k) = extra {
            alpha[k] += 1;
        }
        let vals = block.space.evaluate(slice.as_slice(), grid, alpha);
        for (o, v) in out.iter_mut().zip(vals) {
            *o += t.coeff * v;
        }
    }
    out
}

/// `∫_grid Σ_e |L_e(U)|²` for an entry list.
pub fn squared_norm(
    layout: &Layout,
    coeffs: &DVector<f64>,
    entries: &[LinOp],
    grid: &PointGrid,
) -> f64 {
    let weights: Vec<f64> = grid.iter().map(|(_, w)| w).collect();
    entries
        .iter()
        .filter(|e| !e.is_zero())
        .map(|e| {
            evaluate(layout, coeffs, e, grid, None)
                .iter()
                .zip(&weights)
                .map(|(v, w)| w * v * v)
                .sum::<f64>()
        })
        .sum()
}
