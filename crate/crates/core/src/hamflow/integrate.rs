//! Implicit-midpoint integration of `X_H` and of its variational equation.
//!
//! Convention: `iota_{X_H} nu = dH` for `nu = sum dx_i ^ dy_i`, which in
//! coordinates `(x, y)` reads `X_H = (dH/dy, -dH/dx) = -J0 grad H`.
//! For `H = h(|x|^2)` the flow turns each complex plane counterclockwise
//! at rate `-2 h'`, so a positive bump decreasing in `|x|` turns
//! counterclockwise.

use super::field::MAX_DIM;
use super::scenario::{Scenario, Stage};
use crate::error::{Error, Result};
use crate::numeric::solve_in_place;
use crate::symplinalg::{SpMatrix, SpPath};
use nalgebra::DMatrix;

pub const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 50;
/// Tolerance on `|M^T J0 M - J0| / max(1, |M|^2)` along tangent products.
pub const TOL_FLOW: f64 = 1e-6;

pub type Vecd = [f64; MAX_DIM];
pub type Matd = [f64; MAX_DIM * MAX_DIM];

/// One accepted midpoint step.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub stage: usize,
    /// Global step index across all stages and periods.
    pub index: usize,
    /// Stage time at the midpoint.
    pub t_mid: f64,
    pub dt: f64,
    pub x0: Vecd,
    pub x1: Vecd,
    pub mid: Vecd,
    /// `H_t` and its gradient at the midpoint.
    pub h_mid: f64,
    pub grad_mid: Vecd,
    /// Hessian at the midpoint, row-major.
    pub hess_mid: Matd,
}

/// What a trajectory visitor sees.
#[derive(Debug, Clone, Copy)]
pub enum Event<'a> {
    Step(&'a StepInfo),
    /// The point stays outside this stage's support; the whole stage is
    /// the identity on it and no steps are reported.
    SkippedStage { stage: usize, first_index: usize },
}

/// `X = Omega grad H` with `Omega = [[0, I], [-I, 0]]`.
#[inline]
pub fn hamiltonian_vector(dim: usize, grad: &[f64], out: &mut [f64]) {
    let n = dim / 2;
    for i in 0..n {
        out[i] = grad[i + n];
        out[i + n] = -grad[i];
    }
}

/// `A = Omega Hess`, the linearization of `X_H`.
#[inline]
fn linearization(dim: usize, hess: &[f64], a: &mut [f64]) {
    let n = dim / 2;
    for i in 0..n {
        for j in 0..dim {
            a[i * dim + j] = hess[(i + n) * dim + j];
            a[(i + n) * dim + j] = -hess[i * dim + j];
        }
    }
}

/// One implicit-midpoint step of `stage` from stage time `t0`.
pub fn midpoint_step(
    stage: &Stage,
    dim: usize,
    t0: f64,
    dt: f64,
    x0: &Vecd,
    index: usize,
) -> Result<StepInfo> {
    let t_mid = t0 + 0.5 * dt;
    let mut grad = [0.0; MAX_DIM];
    let mut hess = [0.0; MAX_DIM * MAX_DIM];
    let mut xv = [0.0; MAX_DIM];
    stage.eval(t_mid, &x0[..dim], &mut grad, None);
    hamiltonian_vector(dim, &grad, &mut xv);
    let mut y = *x0;
    for i in 0..dim {
        y[i] += dt * xv[i];
    }
    let mut mid = [0.0; MAX_DIM];
    let mut converged = false;
    for _ in 0..NEWTON_MAX_ITER {
        for i in 0..dim {
            mid[i] = 0.5 * (x0[i] + y[i]);
        }
        stage.eval(t_mid, &mid[..dim], &mut grad, Some(&mut hess));
        hamiltonian_vector(dim, &grad, &mut xv);
        let mut g = [0.0; MAX_DIM];
        for i in 0..dim {
            g[i] = -(y[i] - x0[i] - dt * xv[i]);
        }
        let mut jac = [0.0; MAX_DIM * MAX_DIM];
        linearization(dim, &hess, &mut jac);
        for (k, v) in jac[..dim * dim].iter_mut().enumerate() {
            *v = if k % (dim + 1) == 0 { 1.0 } else { 0.0 } - 0.5 * dt * *v;
        }
        if !solve_in_place(dim, &mut jac[..dim * dim], &mut g[..dim]) {
            return Err(Error::Newton { step: index });
        }
        let mut size = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..dim {
            y[i] += g[i];
            size = size.max(g[i].abs());
            scale = scale.max(y[i].abs());
        }
        if size <= NEWTON_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged || y[..dim].iter().any(|v| !v.is_finite()) {
        return Err(Error::Newton { step: index });
    }
    for i in 0..dim {
        mid[i] = 0.5 * (x0[i] + y[i]);
    }
    let h = stage.eval(t_mid, &mid[..dim], &mut grad, Some(&mut hess));
    Ok(StepInfo {
        stage: 0,
        index,
        t_mid,
        dt,
        x0: *x0,
        x1: y,
        mid,
        h_mid: h,
        grad_mid: grad,
        hess_mid: hess,
    })
}

/// Applies the exact derivative of the midpoint map,
/// `(I - dt/2 A)^{-1} (I + dt/2 A)`, to the `dim x cols` row-major block `m`.
pub fn tangent_update(dim: usize, cols: usize, info: &StepInfo, m: &mut [f64]) -> Result<()> {
    let mut a = [0.0; MAX_DIM * MAX_DIM];
    linearization(dim, &info.hess_mid, &mut a);
    let h = 0.5 * info.dt;
    let mut rhs = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..dim {
        for c in 0..cols {
            let mut s = m[i * cols + c];
            for k in 0..dim {
                s += h * a[i * dim + k] * m[k * cols + c];
            }
            rhs[i * cols + c] = s;
        }
    }
    let mut lhs = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..dim {
        for k in 0..dim {
            lhs[i * dim + k] = if i == k { 1.0 } else { 0.0 } - h * a[i * dim + k];
        }
    }
    if dim == 2 {
        let det = lhs[0] * lhs[3] - lhs[1] * lhs[2];
        for c in 0..cols {
            let (r0, r1) = (rhs[c], rhs[cols + c]);
            m[c] = (lhs[3] * r0 - lhs[1] * r1) / det;
            m[cols + c] = (lhs[0] * r1 - lhs[2] * r0) / det;
        }
        return Ok(());
    }
    if !crate::numeric::solve_matrix_in_place(dim, cols, &mut lhs[..dim * dim], &mut rhs[..dim * cols]) {
        return Err(Error::Newton { step: info.index });
    }
    m[..dim * cols].copy_from_slice(&rhs[..dim * cols]);
    Ok(())
}

/// Walks the trajectory of `x0` over `periods` repetitions of the
/// isotopy, reporting every step (or every skipped stage) to `visit`.
/// Returns the endpoint.
pub fn walk<F>(sc: &Scenario, x0: &[f64], periods: usize, mut visit: F) -> Result<Vecd>
where
    F: FnMut(Event<'_>) -> Result<()>,
{
    let dim = sc.dim();
    if x0.len() != dim || x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::validation(format!("point must have {dim} finite coordinates")));
    }
    let r2: f64 = x0.iter().map(|v| v * v).sum();
    if r2 >= sc.ball_radius() * sc.ball_radius() {
        return Err(Error::validation("point lies outside the ball"));
    }
    let mut x = [0.0; MAX_DIM];
    x[..dim].copy_from_slice(x0);
    let steps = sc.steps_per_stage();
    let dt = sc.dt();
    let mut index = 0;
    for _ in 0..periods {
        for (s, stage) in sc.stages().iter().enumerate() {
            if stage.outside_support(&x[..dim]) {
                visit(Event::SkippedStage { stage: s, first_index: index })?;
                index += steps;
                continue;
            }
            for k in 0..steps {
                let mut info = midpoint_step(stage, dim, k as f64 * dt, dt, &x, index)?;
                info.stage = s;
                visit(Event::Step(&info))?;
                x = info.x1;
                index += 1;
            }
        }
    }
    Ok(x)
}

/// `f_t(x0)` where `t` is measured in periods: stage `s` of `S` occupies
/// `[s/S, (s+1)/S]` and times beyond 1 repeat the isotopy. `t` is rounded
/// to the step grid.
pub fn integrate_flow(sc: &Scenario, x0: &[f64], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::validation("time must be finite and non-negative"));
    }
    let dim = sc.dim();
    let n_stages = sc.stages().len();
    if n_stages == 0 {
        walk(sc, x0, 0, |_| Ok(()))?;
        return Ok(x0.to_vec());
    }
    let per_period = n_stages * sc.steps_per_stage();
    let total = (t * per_period as f64).round() as usize;
    let periods = total.div_ceil(per_period).max(1);
    let mut out: Option<Vecd> = None;
    let mut last = [0.0; MAX_DIM];
    last[..dim].copy_from_slice(x0);
    let end = walk(sc, x0, periods, |ev| {
        if out.is_some() {
            return Ok(());
        }
        match ev {
            Event::Step(info) => {
                if info.index + 1 == total {
                    out = Some(info.x1);
                }
                last = info.x1;
            }
            Event::SkippedStage { first_index, .. } => {
                if total > first_index && total <= first_index + sc.steps_per_stage() {
                    out = Some(last);
                }
            }
        }
        Ok(())
    })?;
    let x = if total == 0 {
        let mut v = [0.0; MAX_DIM];
        v[..dim].copy_from_slice(x0);
        v
    } else {
        out.unwrap_or(end)
    };
    Ok(x[..dim].to_vec())
}

/// `|M^T J0 M - J0| / max(1, |M|^2)` (Frobenius norms) for a row-major
/// `dim x dim` matrix.
pub fn relative_drift(dim: usize, m: &[f64]) -> f64 {
    let n = dim / 2;
    let j0 = |i: usize, j: usize| -> f64 {
        if i < n && j == i + n {
            -1.0
        } else if i >= n && j + n == i {
            1.0
        } else {
            0.0
        }
    };
    // J0 M
    let mut jm = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..dim {
        for j in 0..dim {
            jm[i * dim + j] = (0..dim).map(|k| j0(i, k) * m[k * dim + j]).sum();
        }
    }
    let mut err = 0.0;
    let mut norm2 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let v: f64 = (0..dim).map(|k| m[k * dim + i] * jm[k * dim + j]).sum();
            err += (v - j0(i, j)).powi(2);
            norm2 += m[i * dim + j] * m[i * dim + j];
        }
    }
    err.sqrt() / norm2.max(1.0)
}

fn identity(dim: usize) -> Matd {
    let mut m = [0.0; MAX_DIM * MAX_DIM];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

fn to_sp(dim: usize, m: &Matd) -> SpMatrix {
    SpMatrix::from_trusted(DMatrix::from_row_slice(dim, dim, &m[..dim * dim]))
}

/// The path `t -> Df_t(x0)` over `p` concatenated periods, one sample per
/// step, with times rescaled to `[0, 1]`. Stages the point skips are
/// represented by their two endpoint samples.
pub fn jacobian_path(sc: &Scenario, x0: &[f64], p: usize) -> Result<SpPath> {
    if p == 0 {
        return Err(Error::validation("p must be positive"));
    }
    let dim = sc.dim();
    let mut m = identity(dim);
    let mut samples = vec![to_sp(dim, &m)];
    let mut idx = vec![0usize];
    let steps = sc.steps_per_stage();
    walk(sc, x0, p, |ev| {
        match ev {
            Event::Step(info) => {
                tangent_update(dim, dim, info, &mut m)?;
                let drift = relative_drift(dim, &m);
                if drift > TOL_FLOW {
                    return Err(Error::SymplecticDrift {
                        drift,
                        tol: TOL_FLOW,
                        step: info.index,
                    });
                }
                samples.push(to_sp(dim, &m));
                idx.push(info.index + 1);
            }
            Event::SkippedStage { first_index, .. } => {
                samples.push(to_sp(dim, &m));
                idx.push(first_index + steps);
            }
        }
        Ok(())
    })?;
    let total = (p * sc.stages().len() * steps).max(1) as f64;
    let mut times: Vec<f64> = idx.iter().map(|&i| i as f64 / total).collect();
    if times.len() == 1 {
        times.push(1.0);
        samples.push(samples[0].clone());
    }
    let last = times.len() - 1;
    times[last] = 1.0;
    SpPath::new(times, samples)
}
