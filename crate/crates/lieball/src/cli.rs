//! Batch command surface: catalog access, isometry/properness verification,
//! classification, witnesses, signatures, automorphism actions, jet residuals
//! and the acceptance suite. Every command emits a JSON report (stdout or
//! `--out`) echoing the run configuration; exit codes are 0 for pass, 1 for
//! a failed check, 2 for input errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::acceptance::run_all;
use crate::classify::{classify_map, equivalence_witness, normalize_unitary, witness_residual, CanonicalForm, CaseTag};
use crate::domains::DomainSpec;
use crate::error::{Error, Result};
use crate::groups::{check_group_membership, Automorphism, AutomorphismJson};
use crate::hforms::{power_signature, signature, FormJson, HermitianForm};
use crate::jets::{mapping_residual, model_map};
use crate::linalg::{MatrixJson, CMat};
use crate::maps::{catalog_build, catalog_list, cst, mul, parse_angle, var, CatalogKey, HoloExpr, HoloMap, MapJson};
use crate::metrics::{expected_lambda, isometry_check};
use crate::C64;

#[derive(Parser)]
#[command(name = "lieball", version, about = "Lie ball domains, holomorphic isometries and their classification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Seed for every sampling step
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Sample count for batch checks
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Residual tolerance
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Sampling radius in (0, 1)
    #[arg(long, global = true, default_value_t = 0.9)]
    radius: f64,
    /// Weighted truncation order for jet checks
    #[arg(long, global = true, default_value_t = 8)]
    order: u32,
    /// Write the JSON report here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Named map catalog
    Catalog {
        #[command(subcommand)]
        action: CatalogCmd,
    },
    /// Verification checks over seeded samples
    Verify {
        #[command(subcommand)]
        action: VerifyCmd,
    },
    /// Classify a map (catalog key or map JSON) or a unitary (matrix JSON)
    Classify { input: String },
    /// Equivalence witness for the irrational family member at theta
    Witness {
        #[arg(long)]
        n: usize,
        /// Angle in radians, decimal or "pi/6" style
        #[arg(long)]
        theta: String,
    },
    /// Hermitian form signatures
    Signature {
        /// Signature of (1 - |z|^2)^p: two values, n and p
        #[arg(long, num_args = 2, value_names = ["N", "P"])]
        power: Option<Vec<u32>>,
        /// Signature of a form loaded from JSON
        #[arg(long)]
        form: Option<PathBuf>,
    },
    /// Automorphism utilities
    Aut {
        #[command(subcommand)]
        action: AutCmd,
    },
    /// Weighted jet checks on Heisenberg models
    Jet {
        #[command(subcommand)]
        action: JetCmd,
    },
    /// Run every acceptance criterion
    Suite,
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List the catalog families and their parameter grammar
    List,
    /// Evaluate a catalog map at a point (seeded interior sample by default)
    Eval {
        key: String,
        /// Point as JSON [[re, im], ...]
        #[arg(long)]
        point: Option<String>,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Pullback-metric isometry check at a constant lambda
    Isometry {
        map: String,
        /// Numeric value or "auto" to resolve from the dimensions
        #[arg(long, default_value = "auto")]
        lambda: String,
    },
    /// Boundary-to-boundary residual check
    Proper { map: String },
}

#[derive(Subcommand)]
enum AutCmd {
    /// Validate an automorphism JSON against its group
    Check { file: PathBuf },
    /// Apply an automorphism JSON to a point
    Apply {
        file: PathBuf,
        /// Point as JSON [[re, im], ...]
        #[arg(long)]
        point: String,
    },
}

#[derive(Subcommand)]
enum JetCmd {
    /// Weighted residual of the mapping equation for a Heisenberg model map
    /// ("model:n=3,psi=z1^2" shorthand or a map JSON file)
    Residual { map: String },
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version with a zero-status "error"
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok((pass, result)) => {
            let report = json!({
                "version": env!("CARGO_PKG_VERSION"),
                "config": {
                    "seed": cli.config.seed,
                    "samples": cli.config.samples,
                    "tol": cli.config.tol,
                    "radius": cli.config.radius,
                    "order": cli.config.order,
                },
                "pass": pass,
                "result": result,
            });
            let text = serde_json::to_string_pretty(&report).unwrap();
            if let Some(path) = &cli.config.out {
                if let Err(e) = std::fs::write(path, text + "\n") {
                    eprintln!("error: cannot write report: {e}");
                    return 2;
                }
            } else {
                // ignore broken pipes so `lieball ... | head` stays clean
                use std::io::Write;
                let _ = writeln!(std::io::stdout(), "{text}");
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(bool, Value)> {
    let cfg = &cli.config;
    if cfg.samples == 0 || !(0.0..1.0).contains(&cfg.radius) || cfg.radius <= 0.0 || cfg.tol <= 0.0 {
        return Err(Error::Invalid("need samples >= 1, 0 < radius < 1, tol > 0".into()));
    }
    match &cli.cmd {
        Cmd::Catalog { action } => catalog_cmd(action, cfg),
        Cmd::Verify { action } => verify_cmd(action, cfg),
        Cmd::Classify { input } => classify_cmd(input, cfg),
        Cmd::Witness { n, theta } => witness_cmd(*n, theta, cfg),
        Cmd::Signature { power, form } => signature_cmd(power.as_deref(), form.as_deref(), cfg),
        Cmd::Aut { action } => aut_cmd(action, cfg),
        Cmd::Jet { action } => jet_cmd(action, cfg),
        Cmd::Suite => {
            let reports = run_all(cfg.seed);
            let pass = reports.iter().all(|r| r.pass);
            Ok((pass, serde_json::to_value(&reports)?))
        }
    }
}

// --- input resolution -------------------------------------------------------

fn parse_point(s: &str) -> Result<Vec<C64>> {
    let raw: Vec<[f64; 2]> = serde_json::from_str(s)
        .map_err(|e| Error::Invalid(format!("point must be JSON [[re, im], ...]: {e}")))?;
    Ok(raw.iter().map(|p| C64::new(p[0], p[1])).collect())
}

enum ClassifyInput {
    Map(HoloMap),
    Unitary(CMat),
}

fn resolve_map(s: &str) -> Result<HoloMap> {
    if Path::new(s).is_file() {
        let text = std::fs::read_to_string(s)?;
        let j: MapJson = serde_json::from_str(&text)?;
        return j.to_map();
    }
    catalog_build(&CatalogKey::parse(s)?)
}

fn resolve_classify_input(s: &str) -> Result<ClassifyInput> {
    if Path::new(s).is_file() {
        let text = std::fs::read_to_string(s)?;
        if let Ok(j) = serde_json::from_str::<MapJson>(&text) {
            return Ok(ClassifyInput::Map(j.to_map()?));
        }
        let j: MatrixJson = serde_json::from_str(&text).map_err(|e| {
            Error::Invalid(format!("{s} is neither a map JSON nor a matrix JSON: {e}"))
        })?;
        return Ok(ClassifyInput::Unitary(j.to_cmat()?));
    }
    Ok(ClassifyInput::Map(catalog_build(&CatalogKey::parse(s)?)?))
}

/// "model:n=3,psi=z1^2" -> a Heisenberg model map. psi is one of 0, z1^2,
/// z1z2, w; nonzero psi occupies a paired slot pair unless unpaired=true.
fn resolve_model(s: &str) -> Result<HoloMap> {
    if Path::new(s).is_file() {
        return resolve_map(s);
    }
    let rest = s
        .strip_prefix("model:")
        .ok_or_else(|| Error::Invalid(format!("expected a map JSON file or model:... key, got '{s}'")))?;
    let mut n = None;
    let mut psi = "0".to_string();
    let mut unpaired = false;
    for kv in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("bad model parameter '{kv}'")))?;
        match k.trim() {
            "n" => n = Some(v.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad n '{v}'")))?),
            "psi" => psi = v.trim().to_string(),
            "unpaired" => unpaired = v.trim() == "true",
            _ => return Err(Error::Invalid(format!("unknown model parameter '{k}'"))),
        }
    }
    let n = n.ok_or_else(|| Error::Invalid("model key needs n=<n>".into()))?;
    if n < 2 {
        return Err(Error::Invalid("model key needs n >= 2".into()));
    }
    let expr: Option<HoloExpr> = match psi.as_str() {
        "0" => None,
        "z1^2" => Some(mul(vec![var(0), var(0)])),
        "z1z2" if n >= 3 => Some(mul(vec![var(0), var(1)])),
        "w" => Some(var(n - 1)),
        other => return Err(Error::Invalid(format!("unsupported psi '{other}'"))),
    };
    let phis = match (expr, unpaired) {
        (None, _) => vec![cst(crate::exact::ExactC::zero())],
        (Some(e), false) => vec![e.clone(), e],
        (Some(e), true) => vec![e],
    };
    model_map(n, phis, s)
}

// --- subcommands -------------------------------------------------------------

fn catalog_cmd(action: &CatalogCmd, cfg: &RunConfig) -> Result<(bool, Value)> {
    match action {
        CatalogCmd::List => {
            let entries: Vec<Value> = catalog_list()
                .into_iter()
                .map(|(key, what)| json!({"key": key, "describes": what}))
                .collect();
            Ok((true, json!({"catalog": entries})))
        }
        CatalogCmd::Eval { key, point } => {
            let f = catalog_build(&CatalogKey::parse(key)?)?;
            let z = match point {
                Some(p) => parse_point(p)?,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    f.source.sample_interior(&mut rng, cfg.radius.min(0.5))?
                }
            };
            let fz = f.eval(&z)?;
            let vals = f.target.defining_values(&fz)?;
            Ok((
                true,
                json!({
                    "map": f.name,
                    "source": f.source,
                    "target": f.target,
                    "point": complex_json(&z),
                    "value": complex_json(&fz),
                    "target_defining_values": vals,
                }),
            ))
        }
    }
}

fn resolve_lambdas(f: &HoloMap, lambda: &str) -> Result<Vec<f64>> {
    if lambda != "auto" {
        return lambda
            .parse::<f64>()
            .map(|x| vec![x])
            .map_err(|_| Error::Invalid(format!("bad lambda '{lambda}'")));
    }
    match (f.source, f.target) {
        (DomainSpec::UnitBall { n }, DomainSpec::TypeIv { m }) => Ok(expected_lambda(n, m)),
        (DomainSpec::TypeIv { m }, DomainSpec::GeneralizedBall { .. }) => Ok(vec![1.0 / m as f64]),
        (a, b) if a == b => Ok(vec![1.0]),
        _ => Err(Error::Invalid(
            "cannot infer lambda for this source/target pair, pass --lambda <value>".into(),
        )),
    }
}

fn verify_cmd(action: &VerifyCmd, cfg: &RunConfig) -> Result<(bool, Value)> {
    match action {
        VerifyCmd::Isometry { map, lambda } => {
            let f = resolve_map(map)?;
            let candidates = resolve_lambdas(&f, lambda)?;
            let mut verdicts = Vec::new();
            let mut pass = false;
            for &l in &candidates {
                let v = isometry_check(&f, l, cfg.samples, cfg.seed, cfg.tol, cfg.radius)?;
                pass |= v.pass;
                verdicts.push(v);
            }
            Ok((pass, json!({"map": f.name, "lambda_candidates": candidates, "verdicts": verdicts})))
        }
        VerifyCmd::Proper { map } => {
            let f = resolve_map(map)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let mut worst = 0.0f64;
            let mut kept = 0usize;
            let mut skipped = 0usize;
            while kept < cfg.samples {
                if skipped > 10 * cfg.samples {
                    return Err(Error::NoSolution);
                }
                let z = f.source.sample_boundary(&mut rng)?;
                match f.eval(&z) {
                    Ok(fz) => {
                        // proper: boundary points land on the boundary, so
                        // some defining value of the target vanishes
                        let vals = f.target.defining_values(&fz)?;
                        let r = vals.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
                        worst = worst.max(r);
                        kept += 1;
                    }
                    Err(Error::Pole) | Err(Error::BranchPoint) => skipped += 1,
                    Err(e) => return Err(e),
                }
            }
            let pass = worst <= cfg.tol;
            Ok((pass, json!({"map": f.name, "samples": kept, "skipped": skipped, "max_boundary_residual": worst})))
        }
    }
}

fn canonical_json(form: &CanonicalForm) -> Value {
    let (case, beta) = match form.case {
        CaseTag::Rational => ("rational", None),
        CaseTag::Irrational(b) => ("irrational", Some(b)),
    };
    json!({
        "case": case,
        "beta": beta,
        "theta_raw": form.theta_raw,
        "n": form.n,
        "residual": form.residual,
        "transforms": form.transforms,
    })
}

fn classify_cmd(input: &str, cfg: &RunConfig) -> Result<(bool, Value)> {
    let resolved = resolve_classify_input(input)?;
    let outcome = match resolved {
        ClassifyInput::Map(f) => classify_map(&f, cfg.seed, cfg.tol),
        ClassifyInput::Unitary(u) => normalize_unitary(&u, cfg.tol).map(|form| {
            let w = match form.case {
                CaseTag::Irrational(beta) => equivalence_witness(form.n, beta).ok(),
                CaseTag::Rational => None,
            };
            (form, w)
        }),
    };
    match outcome {
        Ok((form, witness)) => Ok((
            true,
            json!({
                "canonical_form": canonical_json(&form),
                "witness": witness.map(|w| w.to_json()),
            }),
        )),
        // classification verdicts on well-formed input are check failures
        Err(
            e @ (Error::NotIsometry { .. }
            | Error::NotNormalized
            | Error::StructureViolation(_)
            | Error::RecoveryFailed(_)
            | Error::NotUnitary { .. }),
        ) => Ok((false, json!({"error": e.to_string()}))),
        Err(e) => Err(e),
    }
}

fn witness_cmd(n: usize, theta: &str, cfg: &RunConfig) -> Result<(bool, Value)> {
    let beta = parse_angle(theta)?;
    let pair = equivalence_witness(n, beta)?;
    let res = witness_residual(&pair, n, beta, cfg.samples, cfg.seed)?;
    let pass = res <= cfg.tol.max(1e-9);
    Ok((
        pass,
        json!({
            "n": n,
            "beta": beta,
            "witness": pair.to_json(),
            "intertwining_residual": res,
            "membership_tol": 1e-12,
        }),
    ))
}

fn signature_cmd(power: Option<&[u32]>, form: Option<&Path>, cfg: &RunConfig) -> Result<(bool, Value)> {
    match (power, form) {
        (Some(np), None) => {
            let (n, p) = (np[0] as usize, np[1]);
            let s = power_signature(n, p)?;
            Ok((true, json!({"power": {"n": n, "p": p}, "pos": s.positives, "neg": s.negatives, "zero": s.zeros})))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let j: FormJson = serde_json::from_str(&text)?;
            let h = HermitianForm::from_json(&j)?;
            let s = signature(&h, cfg.tol.max(1e-10));
            Ok((true, json!({"form": path.display().to_string(), "pos": s.positives, "neg": s.negatives, "zero": s.zeros})))
        }
        _ => Err(Error::Invalid("pass exactly one of --power N P or --form FILE".into())),
    }
}

fn aut_cmd(action: &AutCmd, _cfg: &RunConfig) -> Result<(bool, Value)> {
    match action {
        AutCmd::Check { file } => {
            let text = std::fs::read_to_string(file)?;
            let j: AutomorphismJson = serde_json::from_str(&text)?;
            let m = j.matrix.to_cmat()?;
            match check_group_membership(&m, j.group, 1e-9) {
                Ok(defect) => Ok((true, json!({"group": j.group, "defect": defect}))),
                Err(Error::InvalidElement { defect }) => {
                    Ok((false, json!({"group": j.group, "defect": defect})))
                }
                Err(e) => Err(e),
            }
        }
        AutCmd::Apply { file, point } => {
            let text = std::fs::read_to_string(file)?;
            let j: AutomorphismJson = serde_json::from_str(&text)?;
            let a = Automorphism::from_json(&j, 1e-9)?;
            let z = parse_point(point)?;
            let img = a.apply(&z)?;
            let d = a.group.domain();
            Ok((
                true,
                json!({
                    "group": j.group,
                    "point": complex_json(&z),
                    "image": complex_json(&img),
                    "image_defining_values": d.defining_values(&img)?,
                }),
            ))
        }
    }
}

fn jet_cmd(action: &JetCmd, cfg: &RunConfig) -> Result<(bool, Value)> {
    match action {
        JetCmd::Residual { map } => {
            let f = resolve_model(map)?;
            let r = mapping_residual(&f, cfg.order)?;
            let pass = r.is_zero();
            Ok((
                pass,
                json!({
                    "map": f.name,
                    "order": cfg.order,
                    "vanishes": pass,
                    "first_nonzero_order": r.first_nonzero_order(),
                    "residual": r.to_json(),
                }),
            ))
        }
    }
}

fn complex_json(z: &[C64]) -> Value {
    Value::Array(z.iter().map(|c| json!([c.re, c.im])).collect())
}
