//! Pointwise evaluation of discrete solutions: closures, Onsager wall
//! residuals and the first-order limit residuals.

use nalgebra::DVector;
use serde::Serialize;

use super::basis::PointGrid;
use super::linop::{
    evaluate, project2, project3, scalar_gradient, scalar_value, stf_gradient, stf_values,
    vector_divergence, vector_gradient, vector_values, LinOp, Region,
};
use super::load::{BoundaryData, FaceData};
use super::space::{quadrature_points, DiscreteSpaces, Field, Layout};
use super::ModelParams;
use crate::tensor::{
    matrix_components, rank3_components, vector_components, Frame, Proj2, Proj3, Tensor2, Tensor3,
};

fn eval_entries(
    layout: &Layout,
    coeffs: &DVector<f64>,
    ops: &[LinOp],
    grid: &PointGrid,
) -> Vec<Vec<f64>> {
    ops.iter()
        .map(|op| evaluate(layout, coeffs, op, grid, None))
        .collect()
}

fn gather(entries: &[Vec<f64>], q: usize) -> Vec<f64> {
    entries.iter().map(|e| e[q]).collect()
}

/// Highest-order moments at the points of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Closures {
    pub points: Vec<[f64; 3]>,
    /// `m = −2 Kn Stf Dσ`
    pub m3: Vec<Tensor3<f64>>,
    /// `R = −(24/5) Kn stf Ds`
    pub r2: Vec<Tensor2<f64>>,
    /// `Δ = −12 Kn div s`
    pub delta: Vec<f64>,
}

/// Volume quadrature grid of the `V_h` stress space.
pub fn volume_grid(spaces: &DiscreteSpaces) -> PointGrid {
    let s = spaces.v_layout.blocks[0].space;
    s.volume_grid(quadrature_points(s.basis.degree))
}

/// Closures from reduced `V_h` coefficients, evaluated on `grid`.
pub fn compute_closures(
    spaces: &DiscreteSpaces,
    v: &DVector<f64>,
    params: &ModelParams,
    grid: &PointGrid,
) -> Closures {
    let layout = &spaces.v_layout;
    let full = spaces.expand_v(v);
    let kn = params.kn;
    let m_ops = project3(&stf_gradient(Field::Sigma, 3), 3, Proj3::Stf);
    let r_ops = project2(&vector_gradient(Field::S, 3), 3, Proj2::Stf);
    let m_vals = eval_entries(layout, &full, &m_ops, grid);
    let r_vals = eval_entries(layout, &full, &r_ops, grid);
    let div = evaluate(layout, &full, &vector_divergence(Field::S, 3), grid, None);
    let mut out = Closures {
        points: Vec::new(),
        m3: Vec::new(),
        r2: Vec::new(),
        delta: Vec::new(),
    };
    for (q, (x, _)) in grid.iter().enumerate() {
        out.points.push(x);
        let m = Tensor3::from_row_major(3, gather(&m_vals, q)).expect("27 entries");
        out.m3.push(m.scale(-2.0 * kn));
        let r = Tensor2::from_row_major(3, gather(&r_vals, q)).expect("9 entries");
        out.r2.push(r.scale(-24.0 / 5.0 * kn));
        out.delta.push(-12.0 * kn * div[q]);
    }
    out
}

/// Every field and moment at one wall point.
#[derive(Debug, Clone, PartialEq)]
pub struct WallState {
    pub sigma: Tensor2<f64>,
    pub s: [f64; 3],
    pub p: f64,
    pub u: [f64; 3],
    pub theta: f64,
    pub m: Tensor3<f64>,
    pub r: Tensor2<f64>,
    pub delta: f64,
}

/// Residuals of the seven Onsager relations (left minus right side).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OnsagerResiduals {
    pub normal_velocity: f64,
    pub shear: [f64; 2],
    pub tangential_r: [f64; 2],
    pub normal_heat_flux: f64,
    pub m_nnn: f64,
    pub m_nt1t1: f64,
    pub m_nt1t2: f64,
}

impl OnsagerResiduals {
    /// Squared magnitudes per relation.
    pub fn squares(&self) -> [f64; 7] {
        [
            self.normal_velocity.powi(2),
            self.shear[0].powi(2) + self.shear[1].powi(2),
            self.tangential_r[0].powi(2) + self.tangential_r[1].powi(2),
            self.normal_heat_flux.powi(2),
            self.m_nnn.powi(2),
            self.m_nt1t1.powi(2),
            self.m_nt1t2.powi(2),
        ]
    }
}

pub fn onsager_residuals(
    state: &WallState,
    frame: &Frame,
    params: &ModelParams,
    wall: &FaceData,
) -> OnsagerResiduals {
    let chi = params.chi_tilde;
    let sig = matrix_components(&state.sigma, frame).expect("cube frames are valid");
    let r = matrix_components(&state.r, frame).expect("cube frames are valid");
    let m = rank3_components(&state.m, frame).expect("cube frames are valid");
    let s = vector_components(&state.s, frame).expect("cube frames are valid");
    let u = vector_components(&state.u, frame).expect("cube frames are valid");
    let du_t = [u.t1 - wall.u_t1, u.t2 - wall.u_t2];
    let s_t = [s.t1, s.t2];
    let sig_nt = [sig.nt1, sig.nt2];
    let r_nt = [r.nt1, r.nt2];
    let m_nnt = [m.nnt1, m.nnt2];
    let dtheta = state.theta - wall.theta;
    OnsagerResiduals {
        normal_velocity: (u.n - wall.u_n) - params.epsilon_w * chi * ((state.p - wall.p) + sig.nn),
        shear: std::array::from_fn(|i| sig_nt[i] - chi * (du_t[i] + s_t[i] / 5.0 + m_nnt[i])),
        tangential_r: std::array::from_fn(|i| {
            r_nt[i] - chi * (-du_t[i] + 11.0 / 5.0 * s_t[i] - m_nnt[i])
        }),
        normal_heat_flux: s.n
            - chi * (2.0 * dtheta + 0.5 * sig.nn + 2.0 / 5.0 * r.nn + 2.0 / 15.0 * state.delta),
        m_nnn: m.nnn
            - chi
                * (-2.0 / 5.0 * dtheta + 7.0 / 5.0 * sig.nn
                    - 2.0 / 25.0 * r.nn
                    - 2.0 / 75.0 * state.delta),
        m_nt1t1: (0.5 * m.nnn + m.nt1t1) - chi * (0.5 * sig.nn + sig.t1t1),
        m_nt1t2: m.nt1t2 - chi * sig.t1t2,
    }
}

/// `L²(Γ)` norms of the seven wall relations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BcResiduals {
    pub norms: [f64; 7],
}

pub const BC_RELATIONS: [&str; 7] = [
    "normal_velocity",
    "shear_stress",
    "tangential_r",
    "normal_heat_flux",
    "m_nnn",
    "m_nt1t1",
    "m_nt1t2",
];

/// Wall states of a discrete solution on the quadrature points of one face.
pub fn wall_states(
    spaces: &DiscreteSpaces,
    v: &DVector<f64>,
    q: &DVector<f64>,
    params: &ModelParams,
    grid: &PointGrid,
) -> Vec<WallState> {
    let vl = &spaces.v_layout;
    let ql = &spaces.q_layout;
    let full = spaces.expand_v(v);
    let kn = params.kn;
    let sig = eval_entries(vl, &full, &stf_values(Field::Sigma, 3), grid);
    let s = eval_entries(vl, &full, &vector_values(Field::S, 3), grid);
    let p = evaluate(vl, &full, &scalar_value(Field::Pressure), grid, None);
    let m = eval_entries(
        vl,
        &full,
        &project3(&stf_gradient(Field::Sigma, 3), 3, Proj3::Stf),
        grid,
    );
    let r = eval_entries(
        vl,
        &full,
        &project2(&vector_gradient(Field::S, 3), 3, Proj2::Stf),
        grid,
    );
    let div = evaluate(vl, &full, &vector_divergence(Field::S, 3), grid, None);
    let u = eval_entries(ql, q, &vector_values(Field::Velocity, 3), grid);
    let th = evaluate(ql, q, &scalar_value(Field::Temperature), grid, None);
    (0..grid.len())
        .map(|k| WallState {
            sigma: Tensor2::from_row_major(3, gather(&sig, k)).expect("9 entries"),
            s: [s[0][k], s[1][k], s[2][k]],
            p: p[k],
            u: [u[0][k], u[1][k], u[2][k]],
            theta: th[k],
            m: Tensor3::from_row_major(3, gather(&m, k))
                .expect("27 entries")
                .scale(-2.0 * kn),
            r: Tensor2::from_row_major(3, gather(&r, k))
                .expect("9 entries")
                .scale(-24.0 / 5.0 * kn),
            delta: -12.0 * kn * div[k],
        })
        .collect()
}

/// Onsager residual norms of a discrete solution; the velocity trace is
/// that of its polynomial representative.
pub fn bc_residuals(
    spaces: &DiscreteSpaces,
    v: &DVector<f64>,
    q: &DVector<f64>,
    params: &ModelParams,
    bdata: &BoundaryData,
) -> BcResiduals {
    let space = spaces.v_layout.blocks[0].space;
    let per_cell = quadrature_points(space.basis.degree);
    let mut sums = [0.0; 7];
    for face in Region::faces() {
        let Region::Face { axis, positive } = face else {
            unreachable!()
        };
        let grid = space.face_grid(per_cell, axis, positive);
        let frame = Frame::cube_face(axis, positive);
        let wall = bdata.face(axis, positive);
        let weights: Vec<f64> = grid.iter().map(|(_, w)| w).collect();
        for (state, w) in wall_states(spaces, v, q, params, &grid)
            .iter()
            .zip(&weights)
        {
            let sq = onsager_residuals(state, &frame, params, wall).squares();
            for (acc, x) in sums.iter_mut().zip(sq) {
                *acc += w * x;
            }
        }
    }
    BcResiduals {
        norms: sums.map(f64::sqrt),
    }
}

/// `(‖σ + 2 Kn stf D u‖, ‖σ‖, ‖s + (15/4) Kn ∇θ‖, ‖s‖)` in `L²(Ω)`, with
/// cellwise derivatives of the velocity and temperature representatives.
pub fn limit_norms(
    spaces: &DiscreteSpaces,
    v: &DVector<f64>,
    q: &DVector<f64>,
    params: &ModelParams,
) -> [f64; 4] {
    let vl = &spaces.v_layout;
    let ql = &spaces.q_layout;
    let full = spaces.expand_v(v);
    let grid = volume_grid(spaces);
    let w: Vec<f64> = grid.iter().map(|(_, w)| w).collect();
    let kn = params.kn;
    let sig = eval_entries(vl, &full, &stf_values(Field::Sigma, 3), &grid);
    let du = eval_entries(
        ql,
        q,
        &project2(&vector_gradient(Field::Velocity, 3), 3, Proj2::Stf),
        &grid,
    );
    let s = eval_entries(vl, &full, &vector_values(Field::S, 3), &grid);
    let dth = eval_entries(ql, q, &scalar_gradient(Field::Temperature, 3), &grid);
    let norm = |f: &dyn Fn(usize, usize) -> f64, n: usize| -> f64 {
        (0..w.len())
            .map(|k| w[k] * (0..n).map(|e| f(e, k).powi(2)).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    };
    [
        norm(&|e, k| sig[e][k] + 2.0 * kn * du[e][k], 9),
        norm(&|e, k| sig[e][k], 9),
        norm(&|e, k| s[e][k] + 15.0 / 4.0 * kn * dth[e][k], 3),
        norm(&|e, k| s[e][k], 3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galerkin::forms::l2_gram;
    use crate::galerkin::linop::functional;
    use crate::galerkin::space::{Pairing, PressureMode};

    fn spaces() -> DiscreteSpaces {
        DiscreteSpaces::new(1, 1, PressureMode::Full, Pairing::Enriched).unwrap()
    }

    fn project(layout: &Layout, f: &dyn Fn(Field, usize, [f64; 3]) -> f64) -> DVector<f64> {
        let mut rhs = DVector::zeros(layout.len());
        for b in &layout.blocks {
            for c in 0..b.ncomp {
                let field = b.field;
                rhs += functional(
                    layout,
                    Region::Volume,
                    &LinOp::term(field, c, None, 1.0),
                    &|x| f(field, c, x),
                );
            }
        }
        l2_gram(layout).cholesky().unwrap().solve(&rhs)
    }

    #[test]
    fn closures_of_simple_fields() {
        let sp = spaces();
        let p = ModelParams::new(0.4, 1.0, 0.0).unwrap();
        // σ constant, s = (x, 0, 0)
        let v = project(&sp.v_layout, &|f, c, x| match (f, c) {
            (Field::Sigma, 2) => 0.7,
            (Field::S, 0) => x[0],
            _ => 0.0,
        });
        let grid = volume_grid(&sp);
        let cl = compute_closures(&sp, &v, &p, &grid);
        let e1 = Tensor2::from_fn(3, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 })
            .project(Proj2::Stf);
        for k in 0..grid.len() {
            assert!(cl.m3[k].norm() < 1e-10);
            assert!((cl.delta[k] + 12.0 * 0.4).abs() < 1e-10);
            assert!((&cl.r2[k] - &e1.scale(-24.0 / 5.0 * 0.4)).norm() < 1e-10);
        }
        // divergence-free linear s gives Δ = 0
        let v = project(&sp.v_layout, &|f, c, x| match (f, c) {
            (Field::S, 0) => x[1],
            (Field::S, 1) => x[2] - x[0],
            _ => 0.0,
        });
        let cl = compute_closures(&sp, &v, &p, &grid);
        assert!(cl.delta.iter().all(|d| d.abs() < 1e-10));
    }

    #[test]
    fn zero_fields_and_zero_walls_have_zero_residuals() {
        let sp = spaces();
        let res = bc_residuals(
            &sp,
            &DVector::zeros(sp.dim_v()),
            &DVector::zeros(sp.dim_q()),
            &ModelParams::default(),
            &BoundaryData::default(),
        );
        assert_eq!(res.norms, [0.0; 7]);
    }

    #[test]
    fn heat_flux_relation_holds_by_construction() {
        let p = ModelParams::new(0.3, 0.8, 0.1).unwrap();
        let wall = FaceData {
            u_n: 0.1,
            u_t1: -0.2,
            u_t2: 0.3,
            p: 0.5,
            theta: 1.5,
        };
        let frame = Frame::cube_face(1, false);
        let sigma = Tensor2::from_fn(3, |i, j| (i + 2 * j) as f64 * 0.1).project(Proj2::Stf);
        let r = Tensor2::from_fn(3, |i, j| (3 * i + j) as f64 * 0.05).project(Proj2::Stf);
        let mut state = WallState {
            sigma: sigma.clone(),
            s: [0.2, 0.0, -0.1],
            p: 0.4,
            u: [0.1, 0.2, 0.3],
            theta: 1.1,
            m: Tensor3::from_fn(3, |i, j, k| (i + j * k) as f64 * 0.01).project(Proj3::Stf),
            r: r.clone(),
            delta: 0.25,
        };
        let sc = matrix_components(&sigma, &frame).unwrap();
        let rc = matrix_components(&r, &frame).unwrap();
        let s_n = p.chi_tilde
            * (2.0 * (state.theta - wall.theta)
                + 0.5 * sc.nn
                + 0.4 * rc.nn
                + 2.0 / 15.0 * state.delta);
        // s_n along n = −e_y
        state.s[1] = -s_n;
        let res = onsager_residuals(&state, &frame, &p, &wall);
        assert!(res.normal_heat_flux.abs() <= 1e-12);
        assert!(res.shear[0].abs() > 0.0);
    }

    #[test]
    fn exact_navier_stokes_stress_has_no_limit_residual() {
        let sp = spaces();
        let p = ModelParams::new(0.5, 1.0, 0.1).unwrap();
        // u = (y, 0, 0): stf D u = ½(e1⊗e2 + e2⊗e1), σ = −2 Kn stf D u is constant
        let q = project(&sp.q_layout, &|f, c, x| {
            if f == Field::Velocity && c == 0 {
                x[1]
            } else {
                0.0
            }
        });
        let stf_coords = crate::tensor::stf2_coordinates(&Tensor2::from_fn(3, |i, j| {
            if (i, j) == (0, 1) || (i, j) == (1, 0) {
                -p.kn
            } else {
                0.0
            }
        }));
        let v = project(&sp.v_layout, &|f, c, _| {
            if f == Field::Sigma {
                stf_coords[c]
            } else {
                0.0
            }
        });
        let [rns, sig, _, _] = limit_norms(&sp, &v, &q, &p);
        assert!(rns <= 1e-12 * sig.max(1.0), "{rns}");
    }
}
