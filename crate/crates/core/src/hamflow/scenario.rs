//! Hamiltonian isotopies supported in a ball, described as a sequence of
//! stages. Stage `k` runs its own Hamiltonian for one unit of time; the
//! isotopy is their concatenation.

use super::field::{Field, FieldSpec, MAX_DIM};
use crate::error::{Error, Result};
use crate::symplinalg::SpMatrix;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageJson {
    #[serde(rename = "H")]
    pub h: FieldSpec,
    /// Coefficients of the time factor `a(t) = sum c_k t^k`; default `[1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Vec<f64>>,
    /// Run `-a(1 - t) H` instead, which is the inverse isotopy.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
    /// Row-major symplectic matrix `G`; the stage Hamiltonian becomes
    /// `H o G^{-1}` and its flow `G f G^{-1}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugate: Option<Vec<f64>>,
}

/// Scenario file. Give either `H` (with optional `time`) or `stages`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioJson {
    pub dim: usize,
    #[serde(default = "standard_form")]
    pub form: String,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<FieldSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageJson>>,
    pub support_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

fn standard_form() -> String {
    "standard".to_string()
}

#[derive(Debug, Clone)]
pub struct Stage {
    field: Field,
    spec: StageJson,
    time: Vec<f64>,
    reversed: bool,
    /// `(G, G^{-1})` as row-major arrays.
    conj: Option<(Vec<f64>, Vec<f64>)>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    dim: usize,
    stages: Vec<Stage>,
    support_radius: f64,
    ball_radius: f64,
    dt: f64,
    steps: usize,
}

fn poly(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |v, &a| v * t + a)
}

impl Stage {
    pub fn from_json(spec: &StageJson, dim: usize) -> Result<Stage> {
        let field = Field::from_spec(&spec.h, dim)?;
        let time = spec.time.clone().unwrap_or_else(|| vec![1.0]);
        if time.is_empty() || time.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation("time coefficients must be finite and non-empty"));
        }
        let conj = match &spec.conjugate {
            None => None,
            Some(entries) => {
                if entries.len() != dim * dim {
                    return Err(Error::validation(format!(
                        "conjugating matrix needs {} entries",
                        dim * dim
                    )));
                }
                let g = SpMatrix::new(DMatrix::from_row_slice(dim, dim, entries))?;
                let gi = g.inverse();
                let rows = |m: &DMatrix<f64>| {
                    (0..dim)
                        .flat_map(|i| (0..dim).map(move |j| (i, j)))
                        .map(|(i, j)| m[(i, j)])
                        .collect::<Vec<f64>>()
                };
                Some((rows(g.matrix()), rows(gi.matrix())))
            }
        };
        Ok(Stage {
            field,
            spec: spec.clone(),
            time,
            reversed: spec.reversed,
            conj,
        })
    }

    pub fn to_json(&self) -> StageJson {
        self.spec.clone()
    }

    /// Time factor at stage time `t` in `[0, 1]`.
    pub fn time_factor(&self, t: f64) -> f64 {
        if self.reversed {
            -poly(&self.time, 1.0 - t)
        } else {
            poly(&self.time, t)
        }
    }

    /// `int_0^1 a(t) dt`.
    pub fn time_integral(&self) -> f64 {
        let s: f64 = self
            .time
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + 1.0))
            .sum();
        if self.reversed {
            -s
        } else {
            s
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    fn to_local(&self, x: &[f64], out: &mut [f64; MAX_DIM]) {
        let d = self.field.dim();
        match &self.conj {
            None => out[..d].copy_from_slice(&x[..d]),
            Some((_, gi)) => {
                for i in 0..d {
                    out[i] = (0..d).map(|j| gi[i * d + j] * x[j]).sum();
                }
            }
        }
    }

    /// True when `x` lies outside the support of this stage.
    pub fn outside_support(&self, x: &[f64]) -> bool {
        let mut y = [0.0; MAX_DIM];
        self.to_local(x, &mut y);
        !self.field.in_support(&y)
    }

    /// A ball containing the stage support: the field's support ball, or
    /// for conjugated stages its image's enclosing ball.
    pub fn support_ball(&self) -> (Vec<f64>, f64) {
        let c = self.field.center();
        let r = self.field.radius();
        match &self.conj {
            None => (c.to_vec(), r),
            Some((g, _)) => {
                let d = c.len();
                let m = DMatrix::from_row_slice(d, d, g);
                let gc = &m * nalgebra::DVector::from_column_slice(c);
                let smax = m.svd(false, false).singular_values.max();
                (gc.iter().copied().collect(), smax * r)
            }
        }
    }

    pub fn is_conjugated(&self) -> bool {
        self.conj.is_some()
    }

    /// Radius of a centered ball containing the stage support.
    pub fn support_bound(&self) -> f64 {
        let (c, r) = self.support_ball();
        c.iter().map(|v| v * v).sum::<f64>().sqrt() + r
    }

    /// `H(t, x)`; fills the gradient and, when requested, the row-major
    /// Hessian.
    pub fn eval(&self, t: f64, x: &[f64], grad: &mut [f64], hess: Option<&mut [f64]>) -> f64 {
        let d = self.field.dim();
        let a = self.time_factor(t);
        let mut y = [0.0; MAX_DIM];
        self.to_local(x, &mut y);
        match &self.conj {
            None => {
                let v = match hess {
                    Some(h) => {
                        let v = self.field.eval(&y, grad, Some(&mut *h));
                        h[..d * d].iter_mut().for_each(|e| *e *= a);
                        v
                    }
                    None => self.field.eval(&y, grad, None),
                };
                grad[..d].iter_mut().for_each(|g| *g *= a);
                a * v
            }
            Some((_, gi)) => {
                // grad = a G^{-T} grad_F, hess = a G^{-T} hess_F G^{-1}
                let mut lg = [0.0; MAX_DIM];
                let mut lh = [0.0; MAX_DIM * MAX_DIM];
                let want = hess.is_some();
                let v = self.field.eval(&y, &mut lg, want.then_some(&mut lh[..]));
                for i in 0..d {
                    grad[i] = a * (0..d).map(|k| gi[k * d + i] * lg[k]).sum::<f64>();
                }
                if let Some(h) = hess {
                    let mut tmp = [0.0; MAX_DIM * MAX_DIM];
                    for k in 0..d {
                        for j in 0..d {
                            tmp[k * d + j] = (0..d).map(|l| lh[k * d + l] * gi[l * d + j]).sum();
                        }
                    }
                    for i in 0..d {
                        for j in 0..d {
                            h[i * d + j] =
                                a * (0..d).map(|k| gi[k * d + i] * tmp[k * d + j]).sum::<f64>();
                        }
                    }
                }
                a * v
            }
        }
    }
}

impl Scenario {
    pub fn from_json(j: &ScenarioJson) -> Result<Scenario> {
        if j.form != "standard" {
            return Err(Error::validation(format!(
                "unsupported symplectic form '{}': only \"standard\" is implemented",
                j.form
            )));
        }
        let stage_specs: Vec<StageJson> = match (&j.h, &j.stages) {
            (Some(h), None) => vec![StageJson {
                h: h.clone(),
                time: j.time.clone(),
                reversed: false,
                conjugate: None,
            }],
            (None, Some(s)) if j.time.is_none() => s.clone(),
            (None, Some(_)) => {
                return Err(Error::validation("\"time\" belongs inside each stage"))
            }
            _ => return Err(Error::validation("give exactly one of \"H\" and \"stages\"")),
        };
        let stages = stage_specs
            .iter()
            .map(|s| Stage::from_json(s, j.dim))
            .collect::<Result<Vec<_>>>()?;
        Scenario::new(
            j.dim,
            stages,
            j.support_radius,
            j.ball_radius.unwrap_or(2.0 * j.support_radius),
            j.dt.unwrap_or(DEFAULT_DT),
        )
    }

    pub fn new(
        dim: usize,
        stages: Vec<Stage>,
        support_radius: f64,
        ball_radius: f64,
        dt: f64,
    ) -> Result<Scenario> {
        if dim == 0 || !dim.is_multiple_of(2) || dim > MAX_DIM {
            return Err(Error::validation(format!(
                "dimension must be even and at most {MAX_DIM}"
            )));
        }
        if !(support_radius > 0.0) || !(ball_radius > support_radius) {
            return Err(Error::validation(
                "need 0 < support_radius < ball_radius",
            ));
        }
        if !(dt > 0.0 && dt <= 0.5) {
            return Err(Error::validation("dt must lie in (0, 0.5]"));
        }
        let steps = (1.0 / dt).round() as usize;
        if ((steps as f64) * dt - 1.0).abs() > 1e-9 {
            return Err(Error::validation("1/dt must be an integer"));
        }
        for (k, s) in stages.iter().enumerate() {
            if s.field.dim() != dim {
                return Err(Error::validation(format!("stage {k} has the wrong dimension")));
            }
            let b = s.support_bound();
            if b > support_radius * (1.0 + 1e-12) {
                return Err(Error::validation(format!(
                    "stage {k} support reaches radius {b}, beyond support_radius {support_radius}"
                )));
            }
        }
        Ok(Scenario {
            dim,
            stages,
            support_radius,
            ball_radius,
            dt: 1.0 / steps as f64,
            steps,
        })
    }

    pub fn to_json(&self) -> ScenarioJson {
        ScenarioJson {
            dim: self.dim,
            form: standard_form(),
            h: None,
            time: None,
            stages: Some(self.stages.iter().map(Stage::to_json).collect()),
            support_radius: self.support_radius,
            ball_radius: Some(self.ball_radius),
            dt: Some(self.dt),
        }
    }

    /// The zero Hamiltonian.
    pub fn zero(dim: usize, support_radius: f64) -> Result<Scenario> {
        Scenario::new(dim, Vec::new(), support_radius, 2.0 * support_radius, DEFAULT_DT)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps_per_stage(&self) -> usize {
        self.steps
    }

    pub fn with_dt(&self, dt: f64) -> Result<Scenario> {
        Scenario::new(self.dim, self.stages.clone(), self.support_radius, self.ball_radius, dt)
    }

    /// True when `x` is outside the support of every stage, so every
    /// `f_t` fixes it.
    pub fn outside_support(&self, x: &[f64]) -> bool {
        self.stages.iter().all(|s| s.outside_support(x))
    }

    /// `f o g`: run `g` (self's argument) first, then `self`.
    pub fn after(&self, g: &Scenario) -> Result<Scenario> {
        if self.dim != g.dim {
            return Err(Error::validation("cannot compose scenarios of different dimension"));
        }
        let mut stages = g.stages.clone();
        stages.extend(self.stages.iter().cloned());
        Scenario::new(
            self.dim,
            stages,
            self.support_radius.max(g.support_radius),
            self.ball_radius.max(g.ball_radius),
            self.dt.min(g.dt),
        )
    }

    /// The inverse isotopy.
    pub fn inverse(&self) -> Scenario {
        let stages = self
            .stages
            .iter()
            .rev()
            .map(|s| {
                let mut s = s.clone();
                s.reversed = !s.reversed;
                s.spec.reversed = s.reversed;
                s
            })
            .collect();
        Scenario { stages, ..self.clone() }
    }

    /// `f^k` as `k` repetitions of the stage list.
    pub fn power(&self, k: usize) -> Scenario {
        let stages = (0..k).flat_map(|_| self.stages.iter().cloned()).collect();
        Scenario { stages, ..self.clone() }
    }

    /// `G f G^{-1}` for a symplectic `G`.
    pub fn conjugated(&self, g: &SpMatrix) -> Result<Scenario> {
        if g.n() * 2 != self.dim {
            return Err(Error::validation("conjugating matrix has the wrong size"));
        }
        let d = self.dim;
        let stages = self
            .stages
            .iter()
            .map(|s| {
                let prior = match &s.spec.conjugate {
                    Some(e) => DMatrix::from_row_slice(d, d, e),
                    None => DMatrix::identity(d, d),
                };
                let m = g.matrix() * prior;
                let mut spec = s.spec.clone();
                spec.conjugate = Some(
                    (0..d)
                        .flat_map(|i| (0..d).map(move |j| (i, j)))
                        .map(|(i, j)| m[(i, j)])
                        .collect(),
                );
                Stage::from_json(&spec, d)
            })
            .collect::<Result<Vec<_>>>()?;
        let bound = stages
            .iter()
            .map(Stage::support_bound)
            .fold(self.support_radius, f64::max);
        Scenario::new(d, stages, bound, self.ball_radius.max(bound * 1.5), self.dt)
    }
}
