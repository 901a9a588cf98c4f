//! Compactly supported scalar fields on `R^{2n}` with exact gradients and
//! Hessians.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Largest supported phase-space dimension.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `(1 - u)^k` for `u < 1`.
    Power(u32),
    /// `exp(1 - 1/(1 - u))` for `u < 1`.
    Smooth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// JSON description of a field. All kinds vanish outside the ball of the
/// given `radius` around `center`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FieldSpec {
    /// `amplitude * profile(|x - center|^2 / radius^2)`.
    Radial {
        center: Vec<f64>,
        amplitude: f64,
        radius: f64,
        profile: Profile,
    },
    /// `P(x - center) * (1 - |x - center|^2 / radius^2)^power`.
    Poly {
        center: Vec<f64>,
        radius: f64,
        #[serde(default = "default_power")]
        power: u32,
        terms: Vec<Monomial>,
    },
    /// Bicubic spline through `values[i][j]` at
    /// `(lo[0] + i hx, lo[1] + j hy)` times the cubic bump of `radius`
    /// around `center`. Two-dimensional only.
    Grid {
        center: Vec<f64>,
        radius: f64,
        lo: [f64; 2],
        hi: [f64; 2],
        values: Vec<Vec<f64>>,
    },
}

fn default_power() -> u32 {
    3
}

/// A field ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    dim: usize,
    center: Vec<f64>,
    radius: f64,
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Radial { amplitude: f64, profile: Profile },
    Poly { power: u32, terms: Vec<Monomial> },
    Grid { power: u32, spline: BicubicSpline },
}

impl Profile {
    /// `(b, b', b'')` at `u`, zero for `u >= 1`.
    fn eval(self, u: f64) -> (f64, f64, f64) {
        if u >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let w = 1.0 - u;
        match self {
            Profile::Power(k) => {
                let kf = k as f64;
                let b = w.powi(k as i32);
                let b1 = if k >= 1 { -kf * w.powi(k as i32 - 1) } else { 0.0 };
                let b2 = if k >= 2 {
                    kf * (kf - 1.0) * w.powi(k as i32 - 2)
                } else {
                    0.0
                };
                (b, b1, b2)
            }
            Profile::Smooth => {
                let b = (1.0 - 1.0 / w).exp();
                let w2 = w * w;
                (b, -b / w2, b * (1.0 / (w2 * w2) - 2.0 / (w2 * w)))
            }
        }
    }
}

impl Field {
    pub fn from_spec(spec: &FieldSpec, dim: usize) -> Result<Field> {
        if dim == 0 || !dim.is_multiple_of(2) || dim > MAX_DIM {
            return Err(Error::validation(format!(
                "dimension must be even and at most {MAX_DIM}, got {dim}"
            )));
        }
        let (center, radius) = match spec {
            FieldSpec::Radial { center, radius, .. }
            | FieldSpec::Poly { center, radius, .. }
            | FieldSpec::Grid { center, radius, .. } => (center.clone(), *radius),
        };
        if center.len() != dim || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::validation(format!(
                "field center must have {dim} finite coordinates"
            )));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::validation("field radius must be positive"));
        }
        let kind = match spec {
            FieldSpec::Radial {
                amplitude, profile, ..
            } => {
                if !amplitude.is_finite() {
                    return Err(Error::validation("amplitude must be finite"));
                }
                if let Profile::Power(k) = profile {
                    if *k < 2 {
                        return Err(Error::validation(
                            "radial power must be at least 2 for a C^1 vector field",
                        ));
                    }
                }
                Kind::Radial {
                    amplitude: *amplitude,
                    profile: *profile,
                }
            }
            FieldSpec::Poly { power, terms, .. } => {
                if *power < 2 {
                    return Err(Error::validation("bump power must be at least 2"));
                }
                for t in terms {
                    if t.powers.len() != dim || !t.coef.is_finite() {
                        return Err(Error::validation(format!(
                            "each monomial needs {dim} exponents and a finite coefficient"
                        )));
                    }
                }
                Kind::Poly {
                    power: *power,
                    terms: terms.clone(),
                }
            }
            FieldSpec::Grid { lo, hi, values, .. } => {
                if dim != 2 {
                    return Err(Error::validation("grid fields are two-dimensional only"));
                }
                for k in 0..2 {
                    if center[k] - radius < lo[k] || center[k] + radius > hi[k] {
                        return Err(Error::validation(
                            "grid box must contain the support disk",
                        ));
                    }
                }
                Kind::Grid {
                    power: 3,
                    spline: BicubicSpline::new(*lo, *hi, values)?,
                }
            }
        };
        Ok(Field {
            dim,
            center,
            radius,
            kind,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn in_support(&self, x: &[f64]) -> bool {
        let r2: f64 = (0..self.dim).map(|i| (x[i] - self.center[i]).powi(2)).sum();
        r2 < self.radius * self.radius
    }

    /// Value; fills `grad` and, when given, the row-major Hessian.
    pub fn eval(&self, x: &[f64], grad: &mut [f64], hess: Option<&mut [f64]>) -> f64 {
        let d = self.dim;
        let mut y = [0.0; MAX_DIM];
        let mut r2 = 0.0;
        for i in 0..d {
            y[i] = x[i] - self.center[i];
            r2 += y[i] * y[i];
        }
        grad[..d].iter_mut().for_each(|g| *g = 0.0);
        let rho2 = self.radius * self.radius;
        if r2 >= rho2 {
            if let Some(h) = hess {
                h[..d * d].iter_mut().for_each(|v| *v = 0.0);
            }
            return 0.0;
        }
        match &self.kind {
            Kind::Radial { amplitude, profile } => {
                let (b, b1, b2) = profile.eval(r2 / rho2);
                let s1 = amplitude * b1 * 2.0 / rho2;
                for i in 0..d {
                    grad[i] = s1 * y[i];
                }
                if let Some(h) = hess {
                    let s2 = amplitude * b2 * 4.0 / (rho2 * rho2);
                    for i in 0..d {
                        for j in 0..d {
                            h[i * d + j] = s2 * y[i] * y[j] + if i == j { s1 } else { 0.0 };
                        }
                    }
                }
                amplitude * b
            }
            Kind::Poly { power, terms } => {
                let mut pg = [0.0; MAX_DIM];
                let mut ph = [0.0; MAX_DIM * MAX_DIM];
                let want_h = hess.is_some();
                let p = poly_eval(terms, &y[..d], &mut pg, want_h.then_some(&mut ph[..]));
                product_with_bump(d, &y, rho2, *power, p, &pg, &ph, grad, hess)
            }
            Kind::Grid { power, spline } => {
                let mut pg = [0.0; MAX_DIM];
                let mut ph = [0.0; MAX_DIM * MAX_DIM];
                let p = spline.eval(x[0], x[1], &mut pg, &mut ph);
                product_with_bump(d, &y, rho2, *power, p, &pg, &ph, grad, hess)
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut g = [0.0; MAX_DIM];
        self.eval(x, &mut g, None)
    }
}

/// `P * B` with `B = (1 - |y|^2/rho^2)^k`, given `P` and its derivatives.
#[allow(clippy::too_many_arguments)]
fn product_with_bump(
    d: usize,
    y: &[f64; MAX_DIM],
    rho2: f64,
    k: u32,
    p: f64,
    pg: &[f64],
    ph: &[f64],
    grad: &mut [f64],
    hess: Option<&mut [f64]>,
) -> f64 {
    let r2: f64 = y[..d].iter().map(|v| v * v).sum();
    let (b, b1, b2) = Profile::Power(k).eval(r2 / rho2);
    let s1 = b1 * 2.0 / rho2;
    let mut bg = [0.0; MAX_DIM];
    for i in 0..d {
        bg[i] = s1 * y[i];
        grad[i] = pg[i] * b + p * bg[i];
    }
    if let Some(h) = hess {
        let s2 = b2 * 4.0 / (rho2 * rho2);
        for i in 0..d {
            for j in 0..d {
                let bh = s2 * y[i] * y[j] + if i == j { s1 } else { 0.0 };
                h[i * d + j] = ph[i * d + j] * b + pg[i] * bg[j] + bg[i] * pg[j] + p * bh;
            }
        }
    }
    p * b
}

pub(crate) fn poly_eval(terms: &[Monomial], y: &[f64], grad: &mut [f64], hess: Option<&mut [f64]>) -> f64 {
    let d = y.len();
    let pw = |v: f64, e: i64| if e < 0 { 0.0 } else { v.powi(e as i32) };
    let mut value = 0.0;
    grad[..d].iter_mut().for_each(|g| *g = 0.0);
    let mut hbuf = [0.0; MAX_DIM * MAX_DIM];
    for t in terms {
        let e: Vec<i64> = t.powers.iter().map(|&p| p as i64).collect();
        let full: f64 = (0..d).map(|i| pw(y[i], e[i])).product();
        value += t.coef * full;
        for i in 0..d {
            if e[i] == 0 {
                continue;
            }
            let mut g = t.coef * e[i] as f64 * pw(y[i], e[i] - 1);
            for k in (0..d).filter(|&k| k != i) {
                g *= pw(y[k], e[k]);
            }
            grad[i] += g;
        }
        if hess.is_some() {
            for i in 0..d {
                for j in 0..d {
                    let mut c = t.coef;
                    for k in 0..d {
                        let mut ek = e[k];
                        let mut f = 1.0;
                        if k == i {
                            f *= ek as f64;
                            ek -= 1;
                        }
                        if k == j {
                            f *= ek as f64;
                            ek -= 1;
                        }
                        c *= f * pw(y[k], ek);
                    }
                    hbuf[i * d + j] += c;
                }
            }
        }
    }
    if let Some(h) = hess {
        h[..d * d].copy_from_slice(&hbuf[..d * d]);
    }
    value
}

/// Tensor-product natural cubic spline on a uniform grid, stored as values
/// and the spline's first and mixed derivatives at the nodes; each cell is
/// the bicubic Hermite patch of that data, which is the spline itself.
#[derive(Debug, Clone, PartialEq)]
struct BicubicSpline {
    lo: [f64; 2],
    h: [f64; 2],
    nx: usize,
    ny: usize,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

/// Node derivatives of the natural cubic spline through `y` (spacing `h`).
fn spline_node_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let m = y.len();
    // second derivatives: tridiagonal system with natural end conditions
    let mut sec = vec![0.0; m];
    if m > 2 {
        let k = m - 2;
        let mut diag = vec![2.0 * h / 3.0; k];
        let mut rhs: Vec<f64> = (1..m - 1)
            .map(|i| (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h)
            .collect();
        let off = h / 6.0;
        for i in 1..k {
            let w = off / diag[i - 1];
            diag[i] -= w * off;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut sol = vec![0.0; k];
        for i in (0..k).rev() {
            let next = if i + 1 < k { sol[i + 1] } else { 0.0 };
            sol[i] = (rhs[i] - off * next) / diag[i];
        }
        sec[1..m - 1].copy_from_slice(&sol);
    }
    let mut d = vec![0.0; m];
    for i in 0..m - 1 {
        d[i] = (y[i + 1] - y[i]) / h - h * (2.0 * sec[i] + sec[i + 1]) / 6.0;
    }
    d[m - 1] = (y[m - 1] - y[m - 2]) / h + h * (sec[m - 2] + 2.0 * sec[m - 1]) / 6.0;
    d
}

impl BicubicSpline {
    fn new(lo: [f64; 2], hi: [f64; 2], values: &[Vec<f64>]) -> Result<Self> {
        let nx = values.len();
        let ny = values.first().map_or(0, Vec::len);
        if nx < 2 || ny < 2 || values.iter().any(|r| r.len() != ny) {
            return Err(Error::validation(
                "grid values must be a rectangular array of at least 2 x 2",
            ));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::validation("grid values must be finite"));
        }
        if !(hi[0] > lo[0] && hi[1] > lo[1]) {
            return Err(Error::validation("grid box must have hi > lo"));
        }
        let h = [
            (hi[0] - lo[0]) / (nx - 1) as f64,
            (hi[1] - lo[1]) / (ny - 1) as f64,
        ];
        let idx = |i: usize, j: usize| i * ny + j;
        let mut f = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                f[idx(i, j)] = values[i][j];
            }
        }
        let along_x = |src: &[f64]| {
            let mut out = vec![0.0; nx * ny];
            for j in 0..ny {
                let col: Vec<f64> = (0..nx).map(|i| src[idx(i, j)]).collect();
                for (i, v) in spline_node_slopes(&col, h[0]).into_iter().enumerate() {
                    out[idx(i, j)] = v;
                }
            }
            out
        };
        let along_y = |src: &[f64]| {
            let mut out = vec![0.0; nx * ny];
            for i in 0..nx {
                let row = &src[idx(i, 0)..idx(i, 0) + ny];
                out[idx(i, 0)..idx(i, 0) + ny].copy_from_slice(&spline_node_slopes(row, h[1]));
            }
            out
        };
        let fx = along_x(&f);
        let fy = along_y(&f);
        let fxy = along_y(&fx);
        Ok(BicubicSpline {
            lo,
            h,
            nx,
            ny,
            f,
            fx,
            fy,
            fxy,
        })
    }

    /// Value, gradient and row-major Hessian at `(x, y)`; zero outside the
    /// grid box.
    fn eval(&self, x: f64, y: f64, grad: &mut [f64], hess: &mut [f64]) -> f64 {
        let sx = (x - self.lo[0]) / self.h[0];
        let sy = (y - self.lo[1]) / self.h[1];
        grad[..2].iter_mut().for_each(|g| *g = 0.0);
        hess[..4].iter_mut().for_each(|g| *g = 0.0);
        if sx < 0.0 || sy < 0.0 || sx > (self.nx - 1) as f64 || sy > (self.ny - 1) as f64 {
            return 0.0;
        }
        let i = (sx.floor() as usize).min(self.nx - 2);
        let j = (sy.floor() as usize).min(self.ny - 2);
        let (u, v) = (sx - i as f64, sy - j as f64);
        // Hermite basis in each direction: [value basis at 0, at 1,
        // slope basis at 0, at 1] and first/second derivatives in the unit
        // variable.
        let basis = |s: f64| {
            let s2 = s * s;
            let s3 = s2 * s;
            (
                [2.0 * s3 - 3.0 * s2 + 1.0, -2.0 * s3 + 3.0 * s2, s3 - 2.0 * s2 + s, s3 - s2],
                [6.0 * s2 - 6.0 * s, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, 3.0 * s2 - 2.0 * s],
                [12.0 * s - 6.0, -12.0 * s + 6.0, 6.0 * s - 4.0, 6.0 * s - 2.0],
            )
        };
        let (bu, du, ddu) = basis(u);
        let (bv, dv, ddv) = basis(v);
        let (hx, hy) = (self.h[0], self.h[1]);
        let mut out = [0.0; 6]; // value, d/du, d/dv, d2/du2, d2/dudv, d2/dv2
        for a in 0..2 {
            for b in 0..2 {
                let k = (i + a) * self.ny + (j + b);
                // coefficients of the four basis products, slopes in unit variables
                let c = [
                    (self.f[k], a, b),
                    (self.fx[k] * hx, 2 + a, b),
                    (self.fy[k] * hy, a, 2 + b),
                    (self.fxy[k] * hx * hy, 2 + a, 2 + b),
                ];
                for (coef, p, q) in c {
                    out[0] += coef * bu[p] * bv[q];
                    out[1] += coef * du[p] * bv[q];
                    out[2] += coef * bu[p] * dv[q];
                    out[3] += coef * ddu[p] * bv[q];
                    out[4] += coef * du[p] * dv[q];
                    out[5] += coef * bu[p] * ddv[q];
                }
            }
        }
        grad[0] = out[1] / hx;
        grad[1] = out[2] / hy;
        hess[0] = out[3] / (hx * hx);
        hess[1] = out[4] / (hx * hy);
        hess[2] = hess[1];
        hess[3] = out[5] / (hy * hy);
        out[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(field: &Field, x: &[f64]) {
        let d = field.dim();
        let mut g = [0.0; MAX_DIM];
        let mut h = [0.0; MAX_DIM * MAX_DIM];
        field.eval(x, &mut g, Some(&mut h));
        let eps = 1e-6;
        for i in 0..d {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (field.value(&xp) - field.value(&xm)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7, "grad {i}: {fd} vs {}", g[i]);
            let mut gp = [0.0; MAX_DIM];
            let mut gm = [0.0; MAX_DIM];
            field.eval(&xp, &mut gp, None);
            field.eval(&xm, &mut gm, None);
            for j in 0..d {
                let fd = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((fd - h[j * d + i]).abs() < 1e-6, "hess {i}{j}: {fd} vs {}", h[j * d + i]);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let radial = FieldSpec::Radial {
            center: vec![0.1, -0.2],
            amplitude: 1.3,
            radius: 0.9,
            profile: Profile::Power(3),
        };
        fd_check(&Field::from_spec(&radial, 2).unwrap(), &[0.3, 0.1]);
        let smooth = FieldSpec::Radial {
            center: vec![0.0; 4],
            amplitude: -0.7,
            radius: 1.0,
            profile: Profile::Smooth,
        };
        fd_check(&Field::from_spec(&smooth, 4).unwrap(), &[0.2, -0.3, 0.1, 0.4]);
        let poly = FieldSpec::Poly {
            center: vec![0.0, 0.1],
            radius: 1.0,
            power: 3,
            terms: vec![
                Monomial { coef: 1.0, powers: vec![1, 0] },
                Monomial { coef: -0.5, powers: vec![2, 1] },
                Monomial { coef: 0.25, powers: vec![0, 3] },
            ],
        };
        fd_check(&Field::from_spec(&poly, 2).unwrap(), &[0.4, -0.2]);
        let values: Vec<Vec<f64>> = (0..9)
            .map(|i| (0..7).map(|j| ((i * 7 + j) as f64 * 0.37).sin()).collect())
            .collect();
        let grid = FieldSpec::Grid {
            center: vec![0.0, 0.0],
            radius: 0.8,
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            values,
        };
        fd_check(&Field::from_spec(&grid, 2).unwrap(), &[0.13, -0.41]);
    }

    #[test]
    fn grid_spline_reproduces_cubic_data() {
        // natural splines reproduce linear data exactly
        let values: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..5).map(|j| 1.0 + 0.5 * i as f64 - 0.25 * j as f64).collect())
            .collect();
        let s = BicubicSpline::new([0.0, 0.0], [4.0, 4.0], &values).unwrap();
        let mut g = [0.0; 2];
        let mut h = [0.0; 4];
        let v = s.eval(1.3, 2.7, &mut g, &mut h);
        assert!((v - (1.0 + 0.5 * 1.3 - 0.25 * 2.7)).abs() < 1e-12);
        assert!((g[0] - 0.5).abs() < 1e-12 && (g[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn compact_support_and_validation() {
        let f = Field::from_spec(
            &FieldSpec::Radial {
                center: vec![0.0, 0.0],
                amplitude: 1.0,
                radius: 0.5,
                profile: Profile::Power(2),
            },
            2,
        )
        .unwrap();
        assert_eq!(f.value(&[0.5, 0.0]), 0.0);
        assert_eq!(f.value(&[0.0, 0.0]), 1.0);
        let bad = FieldSpec::Radial {
            center: vec![0.0],
            amplitude: 1.0,
            radius: 0.5,
            profile: Profile::Power(2),
        };
        assert!(Field::from_spec(&bad, 2).is_err());
        let json = r#"{"kind":"radial","center":[0,0],"amplitude":1,"radius":1,"profile":"smooth"}"#;
        let spec: FieldSpec = serde_json::from_str(json).unwrap();
        assert!(Field::from_spec(&spec, 2).is_ok());
        let json = r#"{"kind":"radial","center":[0,0],"amplitude":1,"radius":1,"profile":{"power":3}}"#;
        assert!(serde_json::from_str::<FieldSpec>(json).is_ok());
    }
}
