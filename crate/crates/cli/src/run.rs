use std::fs;
use std::path::Path;

use saddlenode::algebra::{CoeffTable, Complex64};
use saddlenode::normalform::{
    integrability_test, realize_holonomy, realize_orbital, realize_temporal, roundtrip_from, NormalFormData,
};
use saddlenode::period::{model_coeff, modulus, CauchyConfig, Numerics, PathShape};
use saddlenode::leaf::IntegratorConfig;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::doc::{self, FieldDoc, HolonomyDoc, ModulusDoc};
use crate::{Command, Failure, Job, ModelArgs, NumericArgs};

fn numerics(args: &NumericArgs) -> Numerics {
    Numerics {
        r: args.radius,
        beta: None,
        samples_per_unit: 1000.0,
        path: PathShape::ArcRay,
        integrator: IntegratorConfig {
            step: args.step,
            eps_min: args.eps_min,
            ..IntegratorConfig::default()
        },
        cauchy: CauchyConfig {
            circle_radius: args.circle_radius,
            circle_points: args.circle_points,
        },
    }
}

fn echo_numerics(num: &Numerics, k: u32) -> Value {
    json!({
        "radius": num.r,
        "beta": doc::round15(num.beta_for(k)),
        "path": "arc-ray",
        "samples_per_unit": num.samples_per_unit,
        "step": num.integrator.step,
        "eps_min": num.integrator.eps_min,
        "y_floor": num.integrator.y_floor,
        "escape_guard": num.integrator.escape_guard,
        "circle_radius": num.cauchy.circle_radius,
        "circle_points": num.cauchy.circle_points,
    })
}

fn echo(job: &Job, command: &str, num: &Numerics, k: u32, degree: usize) -> Value {
    json!({
        "command": command,
        "input": job.input.display().to_string(),
        "degree": degree,
        "tol": job.tol,
        "numerics": echo_numerics(num, k),
    })
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("input {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Validation(format!("input {}: {e}", path.display())))
}

fn parse<T: DeserializeOwned>(value: Value, path: &Path) -> Result<T, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::Validation(format!("input {}: {e}", path.display())))
}

/// A field document, bare or under a "field" key as written by the realization commands.
fn read_field(path: &Path) -> Result<FieldDoc, Failure> {
    let mut value = read_json(path)?;
    if let Some(inner) = value.get_mut("field") {
        value = inner.take();
    }
    parse(value, path)
}

fn read_modulus(path: &Path) -> Result<ModulusDoc, Failure> {
    let value = read_json(path)?;
    let pick = json!({
        "k": value.get("k"),
        "mu": value.get("mu"),
        "orbital": value.get("orbital"),
        "temporal": value.get("temporal"),
    });
    let mut cleaned = pick;
    if cleaned["temporal"].is_null() {
        cleaned.as_object_mut().map(|o| o.remove("temporal"));
    }
    parse(cleaned, path)
}

fn truncate(table: CoeffTable, degree: Option<usize>, what: &str) -> Result<CoeffTable, Failure> {
    let Some(d) = degree else { return Ok(table) };
    if d == 0 {
        return Err(Failure::Validation("--degree must be at least 1".into()));
    }
    if d > table.degree() {
        return Err(Failure::Validation(format!(
            "{what}: --degree {d} exceeds the {} coefficients given",
            table.degree()
        )));
    }
    Ok(CoeffTable::from_fn(table.k(), d, |j, n| table.get(j, n)))
}

fn positive(args: &NumericArgs, tol: f64) -> Result<(), Failure> {
    for (name, v) in [
        ("--radius", args.radius),
        ("--step", args.step),
        ("--circle-radius", args.circle_radius),
        ("--eps-min", args.eps_min),
        ("--tol", tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Failure::Validation(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

fn normal_form_value(nf: &NormalFormData) -> Value {
    json!({
        "sigma": nf.class.sigma,
        "field": FieldDoc::from_normal_form(nf),
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Some(a), Value::Object(b)) = (base.as_object_mut(), extra) {
        a.extend(b);
    }
    base
}

fn emit(value: &Value, output: Option<&Path>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    text.push('\n');
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Validation(format!("output {}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn run(command: &Command) -> Result<(), Failure> {
    match command {
        Command::ModelCoeffs(args) => model_coeffs(args),
        Command::Modulus(job) => run_modulus(job),
        Command::NormalForm(job) => run_normal_form(job, false),
        Command::TemporalForm(job) => run_normal_form(job, true),
        Command::Integrability(job) => run_integrability(job),
        Command::Holonomy(job) => run_holonomy(job),
        Command::Roundtrip(job) => run_roundtrip(job),
    }
}

fn model_coeffs(args: &ModelArgs) -> Result<(), Failure> {
    let mu = match args.mu.as_slice() {
        [] => Complex64::new(0.0, 0.0),
        [re, im] => Complex64::new(*re, *im),
        _ => return Err(Failure::Validation("--mu takes two numbers".into())),
    };
    let sectors: Vec<i64> = match args.j {
        Some(j) => vec![j],
        None => (0..args.k as i64).collect(),
    };
    let mut coeffs = serde_json::Map::new();
    for j in sectors {
        let c = model_coeff(args.k, mu, args.m, args.n, j)?;
        coeffs.insert(j.to_string(), json!(doc::pair(c)));
    }
    let out = json!({
        "parameters": {
            "command": "model-coeffs",
            "k": args.k,
            "mu": doc::pair(mu),
            "m": args.m,
            "n": args.n,
            "j": args.j,
        },
        "coefficients": coeffs,
    });
    emit(&out, args.output.as_deref())
}

fn run_modulus(job: &Job) -> Result<(), Failure> {
    positive(&job.numerics, job.tol)?;
    let field = read_field(&job.input)?.to_field()?;
    let degree = job.degree.unwrap_or(4);
    let num = numerics(&job.numerics);
    let data = modulus(&field, degree, &num)?;
    let out = json!({
        "parameters": echo(job, "modulus", &num, field.k(), degree),
        "k": field.k(),
        "mu": doc::pair(field.mu()),
        "orbital": doc::table(&data.orbital),
        "temporal": doc::table(&data.temporal),
        "c0_max": doc::round15(data.c0_max),
    });
    emit(&out, job.output.as_deref())
}

fn orbital_target(job: &Job) -> Result<(ModulusDoc, CoeffTable), Failure> {
    let m = read_modulus(&job.input)?;
    let table = truncate(doc::read_table(&m.orbital, m.k, "orbital")?, job.degree, "orbital")?;
    Ok((m, table))
}

fn run_normal_form(job: &Job, with_temporal: bool) -> Result<(), Failure> {
    positive(&job.numerics, job.tol)?;
    let (m, target) = orbital_target(job)?;
    let num = numerics(&job.numerics);
    let mut nf = realize_orbital(m.k, doc::mu_of(m.mu), &target, &num)?;
    let mut degree = target.degree();
    if with_temporal {
        let t = m
            .temporal
            .as_ref()
            .ok_or_else(|| Failure::Validation("temporal: table required for temporal-form".into()))?;
        let temporal = truncate(doc::read_table(t, m.k, "temporal")?, job.degree, "temporal")?;
        degree = degree.max(temporal.degree());
        nf = realize_temporal(&nf, &temporal, &num)?;
    }
    let name = if with_temporal { "temporal-form" } else { "normal-form" };
    let out = merge(
        json!({ "parameters": echo(job, name, &num, m.k, degree) }),
        normal_form_value(&nf),
    );
    emit(&out, job.output.as_deref())
}

fn run_integrability(job: &Job) -> Result<(), Failure> {
    positive(&job.numerics, job.tol)?;
    let (m, target) = orbital_target(job)?;
    let num = numerics(&job.numerics);
    let v = integrability_test(&target, job.tol, num.cauchy.circle_radius);
    let out = json!({
        "parameters": echo(job, "integrability", &num, m.k, target.degree()),
        "tolerance": job.tol,
        "integrable_form": v.integrable_form,
        "p": v.p,
        "alpha": v.alpha.iter().map(|&a| doc::pair(a)).collect::<Vec<_>>(),
        "orientation": v.orientation,
        "residual": doc::round15(v.residual),
    });
    emit(&out, job.output.as_deref())
}

fn run_holonomy(job: &Job) -> Result<(), Failure> {
    positive(&job.numerics, job.tol)?;
    let h: HolonomyDoc = parse(read_json(&job.input)?, &job.input)?;
    let psi = h.coeffs();
    let degree = job.degree.unwrap_or(psi.len().saturating_sub(1).max(1));
    let num = numerics(&job.numerics);
    let (mu, nf) = realize_holonomy(&psi, degree, &num)?;
    let out = merge(
        json!({
            "parameters": echo(job, "holonomy", &num, 1, degree),
            "mu": doc::pair(mu),
        }),
        normal_form_value(&nf),
    );
    emit(&out, job.output.as_deref())
}

fn run_roundtrip(job: &Job) -> Result<(), Failure> {
    positive(&job.numerics, job.tol)?;
    let (m, target) = orbital_target(job)?;
    let num = numerics(&job.numerics);
    let nf = realize_orbital(m.k, doc::mu_of(m.mu), &target, &num)?;
    let rt = roundtrip_from(nf, &target, &num)?;
    let worst = rt.max_residual();
    let out = merge(
        json!({
            "parameters": echo(job, "roundtrip", &num, m.k, target.degree()),
            "tolerance": job.tol,
            "computed": doc::table(&rt.computed),
            "residuals": doc::real_table(&rt.residuals),
            "max_residual": doc::round15(worst),
            "passed": worst <= job.tol,
        }),
        normal_form_value(&rt.normal_form),
    );
    emit(&out, job.output.as_deref())
}
