//! One-dimensional bases on a uniform partition of `[0, 1]` and their
//! tensor products on the unit square/cube.
//!
//! The continuous basis is the hierarchical integrated-Legendre family:
//! vertex hats plus interior bubbles `φ_n(ξ) = ∫_{-1}^ξ P_{n-1}`, giving
//! `kN + 1` functions for `k` cells of degree `N`. The discontinuous basis
//! uses cellwise Legendre polynomials, `k(N + 1)` functions.

use nalgebra::DMatrix;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp, _) = legendre(n, x);
            let dx = p[n] / dp[n];
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp, _) = legendre(n, x);
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp[n] * dp[n]));
    }
    let mut pairs: Vec<(f64, f64)> = nodes.into_iter().zip(weights).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// `P_0..P_n` with first and second derivatives at `x`.
pub fn legendre(n: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; n + 1];
    let mut dp = vec![0.0; n + 1];
    let mut ddp = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
        dp[1] = 1.0;
    }
    for m in 1..n {
        let mf = m as f64;
        p[m + 1] = ((2.0 * mf + 1.0) * x * p[m] - mf * p[m - 1]) / (mf + 1.0);
        dp[m + 1] = dp[m - 1] + (2.0 * mf + 1.0) * p[m];
        ddp[m + 1] = ddp[m - 1] + (2.0 * mf + 1.0) * dp[m];
    }
    (p, dp, ddp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Continuity {
    /// `C⁰` across cell interfaces.
    Continuous,
    /// Cellwise independent.
    Discontinuous,
}

/// A 1D basis on `k` uniform cells of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Basis1d {
    pub degree: usize,
    pub cells: usize,
    pub continuity: Continuity,
}

/// Value and physical derivatives of one basis function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Local {
    pub index: usize,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Basis1d {
    pub fn new(degree: usize, cells: usize, continuity: Continuity) -> Self {
        Self {
            degree,
            cells,
            continuity,
        }
    }

    pub fn len(&self) -> usize {
        match self.continuity {
            Continuity::Continuous => self.cells * self.degree + 1,
            Continuity::Discontinuous => self.cells * (self.degree + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.cells as f64
    }

    /// Functions supported on `cell`, evaluated at reference coordinate `xi ∈ [-1, 1]`.
    pub fn local(&self, cell: usize, xi: f64) -> Vec<Local> {
        let n = self.degree;
        let scale = 2.0 / self.cell_width();
        let (p, dp, ddp) = legendre(n.max(1), xi);
        match self.continuity {
            Continuity::Continuous => (0..=n)
                .map(|j| {
                    let (v, d1, d2) = if j == 0 {
                        (0.5 * (1.0 - xi), -0.5, 0.0)
                    } else if j == n {
                        (0.5 * (1.0 + xi), 0.5, 0.0)
                    } else {
                        let m = j + 1;
                        (
                            (p[m] - p[m - 2]) / (2.0 * m as f64 - 1.0),
                            p[m - 1],
                            dp[m - 1],
                        )
                    };
                    Local {
                        index: cell * n + j,
                        d0: v,
                        d1: d1 * scale,
                        d2: d2 * scale * scale,
                    }
                })
                .collect(),
            Continuity::Discontinuous => (0..=n)
                .map(|j| Local {
                    index: cell * (n + 1) + j,
                    d0: p[j],
                    d1: dp[j] * scale,
                    d2: ddp[j] * scale * scale,
                })
                .collect(),
        }
    }

    /// Cell containing `x` and the reference coordinate within it.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let h = self.cell_width();
        let cell = ((x / h).floor().max(0.0) as usize).min(self.cells - 1);
        (cell, 2.0 * (x - cell as f64 * h) / h - 1.0)
    }

    /// Dense `len × npts` table of the derivative of order `deriv` at `points`.
    pub fn table(&self, points: &[f64], deriv: usize) -> DMatrix<f64> {
        let mut t = DMatrix::zeros(self.len(), points.len());
        for (q, &x) in points.iter().enumerate() {
            let (cell, xi) = self.locate(x);
            for l in self.local(cell, xi) {
                t[(l.index, q)] += match deriv {
                    0 => l.d0,
                    1 => l.d1,
                    2 => l.d2,
                    _ => panic!("derivatives above second order are not tabulated"),
                };
            }
        }
        t
    }

    /// `∫ ∂^{a} test_i ∂^{b} trial_j dx` for `a, b ∈ {0, 1}`.
    pub fn gram(test: &Basis1d, trial: &Basis1d, a: usize, b: usize) -> DMatrix<f64> {
        assert_eq!(test.cells, trial.cells, "bases must share the partition");
        let (xs, ws) = gauss_legendre(test.degree.max(trial.degree) + 2);
        let h = test.cell_width();
        let mut m = DMatrix::zeros(test.len(), trial.len());
        for cell in 0..test.cells {
            for (&xi, &w) in xs.iter().zip(&ws) {
                let lt = test.local(cell, xi);
                let lr = trial.local(cell, xi);
                for t in &lt {
                    let vt = if a == 0 { t.d0 } else { t.d1 };
                    for r in &lr {
                        let vr = if b == 0 { r.d0 } else { r.d1 };
                        m[(t.index, r.index)] += 0.5 * h * w * vt * vr;
                    }
                }
            }
        }
        m
    }

    /// Values at the endpoint `x = 0` or `x = 1`.
    pub fn trace(&self, positive: bool) -> Vec<f64> {
        let mut v = vec![0.0; self.len()];
        let (cell, xi) = if positive {
            (self.cells - 1, 1.0)
        } else {
            (0, -1.0)
        };
        for l in self.local(cell, xi) {
            v[l.index] += l.d0;
        }
        v
    }

    /// Quadrature points and weights on `[0, 1]`, `per_cell` Gauss points per cell.
    pub fn quadrature(&self, per_cell: usize) -> (Vec<f64>, Vec<f64>) {
        let (xs, ws) = gauss_legendre(per_cell);
        let h = self.cell_width();
        let mut pts = Vec::with_capacity(self.cells * per_cell);
        let mut wts = Vec::with_capacity(self.cells * per_cell);
        for cell in 0..self.cells {
            for (&x, &w) in xs.iter().zip(&ws) {
                pts.push(h * (cell as f64 + 0.5 * (x + 1.0)));
                wts.push(0.5 * h * w);
            }
        }
        (pts, wts)
    }

    /// Indices of functions vanishing at both endpoints.
    pub fn interior(&self) -> Vec<usize> {
        let t0 = self.trace(false);
        let t1 = self.trace(true);
        (0..self.len())
            .filter(|&i| t0[i] == 0.0 && t1[i] == 0.0)
            .collect()
    }

    /// Coefficients of the constant function 1.
    pub fn constant(&self) -> Vec<f64> {
        match self.continuity {
            Continuity::Continuous => (0..self.len())
                .map(|i| if i % self.degree == 0 { 1.0 } else { 0.0 })
                .collect(),
            Continuity::Discontinuous => (0..self.len())
                .map(|i| if i % (self.degree + 1) == 0 { 1.0 } else { 0.0 })
                .collect(),
        }
    }
}

/// Tensor-product scalar space on `[0, 1]^dim`, `dim ∈ {2, 3}`.
///
/// Scalar index of the multi-index `(i_0, i_1, i_2)` is `i_0 + n(i_1 + n i_2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScalarSpace {
    pub basis: Basis1d,
    pub dim: usize,
}

/// Tensor grid of points with weights, one list per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PointGrid {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<Vec<f64>>,
}

impl PointGrid {
    pub fn len(&self) -> usize {
        self.points.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates and weight of the flat point `q` (first direction fastest).
    pub fn point(&self, q: usize) -> ([f64; 3], f64) {
        let mut x = [0.0; 3];
        let mut w = 1.0;
        let mut rem = q;
        for (dir, (p, ws)) in self.points.iter().zip(&self.weights).enumerate() {
            let i = rem % p.len();
            rem /= p.len();
            x[dir] = p[i];
            w *= ws[i];
        }
        (x, w)
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        (0..self.len()).map(move |q| self.point(q))
    }
}

impl ScalarSpace {
    pub fn new(basis: Basis1d, dim: usize) -> Self {
        assert!(
            dim == 2 || dim == 3,
            "scalar spaces live on the unit square or cube"
        );
        Self { basis, dim }
    }

    pub fn len(&self) -> usize {
        self.basis.len().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let n = self.basis.len();
        let mut out = [0; 3];
        let mut rem = flat;
        for o in out.iter_mut().take(self.dim) {
            *o = rem % n;
            rem /= n;
        }
        out
    }

    pub fn flat_index(&self, multi: [usize; 3]) -> usize {
        let n = self.basis.len();
        (0..self.dim).rev().fold(0, |acc, k| acc * n + multi[k])
    }

    /// Kronecker product `M_{dim-1} ⊗ … ⊗ M_0` matching the scalar index order.
    pub fn kron(factors: &[DMatrix<f64>]) -> DMatrix<f64> {
        let mut out = factors[0].clone();
        for f in &factors[1..] {
            out = f.kronecker(&out);
        }
        out
    }

    /// `∫_Ω ∂_{dt} test_I ∂_{dr} trial_J` (no derivative for `None`).
    pub fn volume_matrix(
        test: &ScalarSpace,
        trial: &ScalarSpace,
        dt: Option<usize>,
        dr: Option<usize>,
    ) -> DMatrix<f64> {
        let factors: Vec<DMatrix<f64>> = (0..test.dim)
            .map(|k| {
                Basis1d::gram(
                    &test.basis,
                    &trial.basis,
                    usize::from(dt == Some(k)),
                    usize::from(dr == Some(k)),
                )
            })
            .collect();
        Self::kron(&factors)
    }

    /// `∫_F test_I trial_J` over the face `x_axis = 0` or `1`.
    pub fn face_matrix(
        test: &ScalarSpace,
        trial: &ScalarSpace,
        axis: usize,
        positive: bool,
    ) -> DMatrix<f64> {
        let factors: Vec<DMatrix<f64>> = (0..test.dim)
            .map(|k| {
                if k == axis {
                    let a = test.basis.trace(positive);
                    let b = trial.basis.trace(positive);
                    DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j])
                } else {
                    Basis1d::gram(&test.basis, &trial.basis, 0, 0)
                }
            })
            .collect();
        Self::kron(&factors)
    }

    /// Volume quadrature with `per_cell` Gauss points per cell and direction.
    pub fn volume_grid(&self, per_cell: usize) -> PointGrid {
        let (p, w) = self.basis.quadrature(per_cell);
        PointGrid {
            points: vec![p; self.dim],
            weights: vec![w; self.dim],
        }
    }

    /// Quadrature on the face `x_axis = 0` or `1`.
    pub fn face_grid(&self, per_cell: usize, axis: usize, positive: bool) -> PointGrid {
        let mut g = self.volume_grid(per_cell);
        g.points[axis] = vec![if positive { 1.0 } else { 0.0 }];
        g.weights[axis] = vec![1.0];
        g
    }

    /// Values of `∂^α u` on a point grid for coefficients `coeffs`,
    /// `alpha[k]` the derivative order in direction `k`.
    pub fn evaluate(&self, coeffs: &[f64], grid: &PointGrid, alpha: [usize; 3]) -> Vec<f64> {
        let n = self.basis.len();
        let tables: Vec<DMatrix<f64>> = (0..self.dim)
            .map(|k| self.basis.table(&grid.points[k], alpha[k]))
            .collect();
        // sum factorization, contracting the fastest direction first
        let mut data = coeffs.to_vec();
        let mut shape: Vec<usize> = vec![n; self.dim];
        for k in 0..self.dim {
            let np = grid.points[k].len();
            let before: usize = shape[..k].iter().product();
            let after: usize = shape[k + 1..].iter().product();
            let mut next = vec![0.0; before * np * after];
            let t = &tables[k];
            for a in 0..after {
                for i in 0..n {
                    for b in 0..before {
                        let c = data[b + before * (i + n * a)];
                        if c == 0.0 {
                            continue;
                        }
                        for q in 0..np {
                            next[b + before * (q + np * a)] += c * t[(i, q)];
                        }
                    }
                }
            }
            data = next;
            shape[k] = np;
        }
        data
    }

    /// `∫ g ∂^{deriv} φ_I` for all basis functions, by quadrature on `grid`.
    pub fn functional(
        &self,
        grid: &PointGrid,
        deriv: Option<usize>,
        g: &dyn Fn([f64; 3]) -> f64,
    ) -> Vec<f64> {
        let tables: Vec<DMatrix<f64>> = (0..self.dim)
            .map(|k| {
                self.basis
                    .table(&grid.points[k], usize::from(deriv == Some(k)))
            })
            .collect();
        let gw: Vec<f64> = grid.iter().map(|(x, w)| w * g(x)).collect();
        let mut out = vec![0.0; self.len()];
        for (idx, o) in out.iter_mut().enumerate() {
            let mi = self.multi_index(idx);
            let mut acc = 0.0;
            for (q, &v) in gw.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let mut rem = q;
                let mut prod = v;
                for k in 0..self.dim {
                    let np = grid.points[k].len();
                    prod *= tables[k][(mi[k], rem % np)];
                    rem /= np;
                }
                acc += prod;
            }
            *o = acc;
        }
        out
    }

    /// Coefficients of the constant function 1.
    pub fn constant(&self) -> Vec<f64> {
        let c = self.basis.constant();
        (0..self.len())
            .map(|i| {
                let mi = self.multi_index(i);
                (0..self.dim).map(|k| c[mi[k]]).product()
            })
            .collect()
    }

    /// Indices of functions with zero trace on the whole boundary.
    pub fn interior(&self) -> Vec<usize> {
        let inner = self.basis.interior();
        (0..self.len())
            .filter(|&i| {
                let mi = self.multi_index(i);
                (0..self.dim).all(|k| inner.contains(&mi[k]))
            })
            .collect()
    }
}
