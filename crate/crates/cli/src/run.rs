use crate::spec::*;
use anyhow::{anyhow, Context, Result};
use qmlab_core::hamflow::{calabi, read_scenario, tau_ball, PrimitiveOneForm, Scenario};
use qmlab_core::harness::{CircleLift, LiftStep, TranslationEvaluator};
use qmlab_core::hypgeo::{cal_s_estimate, gg_estimate, read_disk_isotopy, DiskPoint};
use qmlab_core::reeb::shapes::{genus2_plate, genus3_plate, tilted_height};
use qmlab_core::reeb::{
    build_reeb, graph_integral, prune_traced, read_field_csv, read_off, theorem2_value,
    trivalent_vertices, GraphHamiltonian, GraphHamiltonianJson, MorseField, SurfaceMesh,
    VertexKind,
};
use qmlab_core::symplinalg::{
    frame_from_json, phi_homog, random_hamiltonian, sp_path_from_json, LagrangianFrame,
    PhiEvaluator, SpPath,
};
use qmlab_core::{estimate_defect, Error};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

pub struct Outcome {
    pub result: Value,
    /// Header and rows of the optional series.
    pub csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

fn validation(msg: impl Into<String>) -> anyhow::Error {
    Error::Validation(msg.into()).into()
}

pub struct Context0 {
    pub base: PathBuf,
}

impl Context0 {
    fn resolve(&self, p: &str) -> PathBuf {
        let path = Path::new(p);
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    fn read(&self, p: &str) -> Result<String> {
        let path = self.resolve(p);
        std::fs::read_to_string(&path)
            .map_err(Error::from)
            .with_context(|| format!("reading {}", path.display()))
    }

    fn scenario(&self, p: &str, dt: Option<f64>) -> Result<Scenario> {
        let sc = read_scenario(&self.resolve(p))?;
        Ok(match dt {
            Some(dt) => sc.with_dt(dt)?,
            None => sc,
        })
    }
}

pub fn run(spec: &ExperimentSpec, ctx: &Context0) -> Result<Outcome> {
    match spec {
        ExperimentSpec::Phi(s) => phi(s, ctx),
        ExperimentSpec::Tau(s) => tau(s, ctx),
        ExperimentSpec::Calabi(s) => calabi_kind(s, ctx),
        ExperimentSpec::Reeb(s) => reeb(s, ctx),
        ExperimentSpec::CalS(s) => cal_s(s, ctx),
        ExperimentSpec::Defect(s) => defect(s),
        ExperimentSpec::Gg(s) => gg(s, ctx),
    }
}

fn phi(s: &PhiSpec, ctx: &Context0) -> Result<Outcome> {
    let path = sp_path_from_json(&ctx.read(&s.path)?)?;
    let frame = match &s.frame {
        Some(f) => frame_from_json(&ctx.read(f)?)?,
        None => LagrangianFrame::real(path.n()),
    };
    if s.p.is_empty() || s.p.contains(&0) {
        return Err(validation("p must list positive powers"));
    }
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for &p in &s.p {
        let (v, b) = phi_homog(&path, p, &frame)?;
        rows.push(vec![p.to_string(), v.to_string(), b.to_string()]);
        series.push(json!({"p": p, "value": v, "error_bound": b}));
    }
    let last = series.last().cloned().expect("non-empty schedule");
    Ok(Outcome {
        result: json!({
            "value": last["value"],
            "error_bound": last["error_bound"],
            "p": last["p"],
            "n": path.n(),
            "series": series,
        }),
        csv: Some((vec!["p", "value", "error_bound"], rows)),
    })
}

fn seed_of(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| validation("a seed is required (spec field or --seed)"))
}

fn tau(s: &TauSpec, ctx: &Context0) -> Result<Outcome> {
    let sc = ctx.scenario(&s.scenario, s.dt)?;
    let t = tau_ball(&sc, s.p, s.n_samples, seed_of(s.seed)?)?;
    Ok(Outcome {
        result: to_value(&t)?,
        csv: None,
    })
}

fn calabi_kind(s: &CalabiSpec, ctx: &Context0) -> Result<Outcome> {
    let sc = ctx.scenario(&s.scenario, s.dt)?;
    let (center, radius) = s.quadrature.domain(&sc)?;
    let value = calabi(&sc, &s.primitive, &s.quadrature)?;
    Ok(Outcome {
        result: json!({
            "value": value,
            "domain_center": center,
            "domain_radius": radius,
            "dt": sc.dt(),
        }),
        csv: None,
    })
}

fn load_mesh(spec: &str, ctx: &Context0) -> Result<SurfaceMesh> {
    match spec.strip_prefix("builtin:") {
        Some("genus2_plate") => Ok(genus2_plate()),
        Some("genus3_plate") => Ok(genus3_plate()),
        Some(other) => Err(validation(format!("unknown builtin mesh '{other}'"))),
        None => Ok(read_off(&ctx.resolve(spec))?),
    }
}

fn load_field(spec: &str, mesh: &SurfaceMesh, ctx: &Context0) -> Result<MorseField> {
    match spec.strip_prefix("builtin:") {
        Some("tilted_height") => Ok(tilted_height(mesh)),
        Some(other) => Err(validation(format!("unknown builtin field '{other}'"))),
        None => Ok(read_field_csv(&ctx.resolve(spec), mesh.vertices().len())?),
    }
}

fn reeb(s: &ReebSpec, ctx: &Context0) -> Result<Outcome> {
    let mut mesh = load_mesh(&s.mesh, ctx)?;
    if s.normalize && mesh.genus() >= 2 {
        mesh = mesh.normalized()?;
    }
    let field = load_field(&s.field, &mesh, ctx)?;
    let g = build_reeb(&mesh, &field)?;
    let (pruned, trace) = prune_traced(&g)?;
    let trivalent = trivalent_vertices(&pruned)?;
    let mut result = json!({
        "genus": g.genus,
        "nodes": {
            "min": g.count_kind(VertexKind::Min),
            "saddle": g.count_kind(VertexKind::Saddle),
            "max": g.count_kind(VertexKind::Max),
        },
        "edges": g.edges.len(),
        "euler_sums": trace.euler_sums,
        "trivalent": trivalent,
        "total_measure": g.total_measure(),
    });
    if let Some(hs) = &s.hamiltonian {
        let h = match hs {
            HamiltonianSpec::Constant(c) => GraphHamiltonian::constant(&g, *c),
            HamiltonianSpec::Affine([a, b]) => GraphHamiltonian::affine(&g, *a, *b),
            HamiltonianSpec::Profile(bp) => {
                let bp: Vec<(f64, f64)> = bp.iter().map(|q| (q[0], q[1])).collect();
                GraphHamiltonian::from_level_profile(&g, &bp)?
            }
            HamiltonianSpec::File(f) => {
                let j: GraphHamiltonianJson = serde_json::from_str(&ctx.read(f)?)
                    .map_err(|e| Error::Parse {
                        path: f.clone(),
                        message: e.to_string(),
                    })?;
                GraphHamiltonian::from_json(j)?
            }
        };
        result["integral"] = json!(graph_integral(&g, &h)?);
        result["trivalent_formula"] = json!(theorem2_value(&g, &h)?);
    }
    let rows = g
        .nodes
        .iter()
        .map(|n| {
            vec![
                n.id.to_string(),
                n.vertex.to_string(),
                n.value.to_string(),
                format!("{:?}", n.kind).to_lowercase(),
                n.degree.to_string(),
                trivalent.contains(&n.id).to_string(),
            ]
        })
        .collect();
    Ok(Outcome {
        result,
        csv: Some((vec!["node", "vertex", "value", "kind", "degree", "trivalent"], rows)),
    })
}

fn cal_s(s: &CalSSpec, ctx: &Context0) -> Result<Outcome> {
    let iso = read_disk_isotopy(&ctx.resolve(&s.isotopy))?;
    let est = cal_s_estimate(&iso, s.p, s.n_points, s.fibers, seed_of(s.seed)?)?;
    let mut result = to_value(&est)?;
    if s.compare_calabi {
        let quad = Default::default();
        result["calabi"] = json!(calabi(iso.scenario(), &PrimitiveOneForm::standard(), &quad)?);
    }
    Ok(Outcome { result, csv: None })
}

fn defect(s: &DefectSpec) -> Result<Outcome> {
    let seed = seed_of(s.seed)?;
    if !(s.scale > 0.0 && s.scale.is_finite()) {
        return Err(validation("scale must be positive"));
    }
    let est = match s.evaluator {
        DefectTarget::Phi => {
            if s.n == 0 {
                return Err(validation("n must be positive"));
            }
            let ev = PhiEvaluator::new(LagrangianFrame::real(s.n));
            let (n, scale) = (s.n, s.scale);
            estimate_defect(
                &ev,
                |rng| {
                    SpPath::from_generator(&random_hamiltonian(n, scale, rng), 24)
                        .expect("generator paths are valid")
                },
                s.n_pairs,
                seed,
            )?
        }
        DefectTarget::Translation => {
            let scale = s.scale;
            estimate_defect(
                &TranslationEvaluator,
                |rng| {
                    let step = LiftStep::new(rng.random_range(-scale..scale), rng.random_range(-0.9..0.9))
                        .expect("valid lift step");
                    CircleLift::from_step(step)
                },
                s.n_pairs,
                seed,
            )?
        }
    };
    Ok(Outcome {
        result: to_value(&est)?,
        csv: None,
    })
}

fn gg(s: &GgSpec, ctx: &Context0) -> Result<Outcome> {
    let iso = read_disk_isotopy(&ctx.resolve(&s.isotopy))?;
    if s.p.is_empty() || s.p.contains(&0) {
        return Err(validation("p must list positive powers"));
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (i, pt) in s.points.iter().enumerate() {
        let x = DiskPoint::from_xy(pt[0], pt[1]).map_err(|e| anyhow!(e).context(format!("point {i}")))?;
        for &p in &s.p {
            let r = gg_estimate(&s.eta, &iso, &x, p as usize)?;
            rows.push(vec![
                pt[0].to_string(),
                pt[1].to_string(),
                p.to_string(),
                r.value.to_string(),
                r.phi_estimate.to_string(),
                r.bound.to_string(),
            ]);
            entries.push(json!({"point": pt, "result": r}));
        }
    }
    Ok(Outcome {
        result: json!({ "values": entries }),
        csv: Some((vec!["x", "y", "p", "u", "phi_estimate", "bound"], rows)),
    })
}
