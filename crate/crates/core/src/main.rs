use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use witt_tower::coeffring::{WittElem, WittRing};
use witt_tower::cohomology::{self, build_module, CohomError, GModule, Twist};
use witt_tower::density::{self, DensityError, Mode, TubeQuery};
use witt_tower::galois_model::{is_unramified_at, DeformationFile, ModelError, ModelGroup};
use witt_tower::lifting::{
    build_tower, field_of_definition, is_nice, is_rho_m_nice, oracle_find_places, verify_tower,
    LiftError, OracleConstraints, TowerFile, TowerPlan,
};
use witt_tower::matlin::{check_tame_relation, integral_model, KMat, Mat, MatError, TameBranch};

const INPUT_SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "witt-tower", version, about = "Deformation towers over truncated Witt rings")]
struct Cli {
    /// Master seed for sampled computations.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build or verify a deformation tower.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Dimension of H^1 of a group with coefficients in a module.
    H1 { group: PathBuf, module: PathBuf },
    /// Nice and rho-nice places of a residual or lifted representation.
    NiceScan { group: PathBuf, rho: PathBuf },
    /// Conjugate a bounded set of matrices over K to integral form.
    IntegralModel { mats: PathBuf },
    /// Classify a pair with x y x^-1 = y^q over a finite field.
    TameCheck {
        x: String,
        y: String,
        q: u64,
        /// Residue characteristic for comma-separated integer entries.
        #[arg(long, default_value_t = 5)]
        ell: u64,
    },
    /// Smallest d <= dmax with all traces Frobenius-fixed over F_{ell^d}.
    FieldOfDef {
        traces: PathBuf,
        #[arg(long)]
        dmax: usize,
    },
    /// Tube measure of a polynomial on a finite matrix group.
    Density(DensityArgs),
}

#[derive(Subcommand)]
enum TowerCmd {
    /// Run a lifting plan and write the resulting tower file.
    Build { plan: PathBuf },
    /// Recheck every logged level of a tower file.
    Verify { tower: PathBuf },
    /// Print the shipped four-generator plan.
    SamplePlan {
        #[arg(long, default_value_t = 4)]
        max_level: u32,
        /// Negative control: no place escapes the Frobenius-fixed traces.
        #[arg(long)]
        fixed: bool,
    },
}

#[derive(Args)]
struct DensityArgs {
    query: PathBuf,
    #[arg(long, conflicts_with = "sample")]
    exact: bool,
    /// Number of samples.
    #[arg(long)]
    sample: Option<u64>,
    /// Run partitions on the calling thread.
    #[arg(long)]
    sequential: bool,
}

enum Failure {
    /// Verification or computation failed.
    Check(String),
    /// The place oracle found nothing.
    NotFound(String),
    /// Unreadable or invalid input.
    Input(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 2,
            Failure::NotFound(_) => 3,
            Failure::Input(_) => 4,
        }
    }
    fn message(&self) -> &str {
        match self {
            Failure::Check(s) | Failure::NotFound(s) | Failure::Input(s) => s,
        }
    }
}

impl From<LiftError> for Failure {
    fn from(e: LiftError) -> Self {
        match e {
            LiftError::NotFound => Failure::NotFound(e.to_string()),
            LiftError::PlanInvalid(_) | LiftError::Model(_) => Failure::Input(e.to_string()),
            e => Failure::Check(e.to_string()),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<CohomError> for Failure {
    fn from(e: CohomError) -> Self {
        Failure::Check(e.to_string())
    }
}

impl From<MatError> for Failure {
    fn from(e: MatError) -> Self {
        match e {
            MatError::Parse(_) | MatError::DimensionMismatch(..) | MatError::NotAField(_) => {
                Failure::Input(e.to_string())
            }
            e => Failure::Check(e.to_string()),
        }
    }
}

impl From<DensityError> for Failure {
    fn from(e: DensityError) -> Self {
        match e {
            DensityError::AlphaExceedsPrecision { .. }
            | DensityError::UnsupportedSchema(_)
            | DensityError::InvalidQuery(_) => Failure::Input(e.to_string()),
            e => Failure::Check(e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

struct Ctx {
    seed: u64,
    inputs: Vec<Value>,
}

impl Ctx {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let bytes =
            fs::read(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "sha256": hex::encode(Sha256::digest(&bytes)),
        }));
        String::from_utf8(bytes).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn json<T: for<'de> Deserialize<'de>>(&mut self, path: &Path) -> Result<T, Failure> {
        let s = self.read(path)?;
        serde_json::from_str(&s).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }

    fn group(&mut self, path: &Path) -> Result<ModelGroup, Failure> {
        Ok(ModelGroup::from_json(&self.read(path)?)?)
    }
}

fn check_version(v: u32) -> Result<(), Failure> {
    if v == INPUT_SCHEMA_VERSION {
        Ok(())
    } else {
        Err(Failure::Input(format!("unsupported schema version {v}")))
    }
}

/// Residue-field elements print as integers.
fn short(x: &WittElem) -> String {
    let r = x.ring();
    if r.degree() == 1 && r.precision() == 1 {
        x.coeffs()[0].to_string()
    } else {
        x.to_string()
    }
}

fn parse_mat(s: &str, ell: u64) -> Result<Mat, Failure> {
    if s.contains('^') {
        return Ok(Mat::parse(s)?);
    }
    let entries: Vec<i64> = s
        .split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Input(format!("bad matrix {s:?}: {e}")))?;
    let ring = WittRing::field(ell, 1).map_err(|e| Failure::Input(e.to_string()))?;
    Ok(Mat::from_ints(&ring, &entries)?)
}

fn tame_check(x: &str, y: &str, q: u64, ell: u64) -> Outcome {
    let (x, y) = (parse_mat(x, ell)?, parse_mat(y, ell)?);
    let branch = match check_tame_relation(&x, &y, q)? {
        TameBranch::NotConjugateRelation => "NotConjugateRelation".to_string(),
        TameBranch::SemisimpleFiniteOrder => "SemisimpleFiniteOrder".to_string(),
        TameBranch::EigenvalueRatio(a, b) => format!("EigenvalueRatio({},{})", short(&a), short(&b)),
    };
    Ok(json!({ "x": x, "y": y, "q": q, "branch": branch }))
}

fn tower_build(ctx: &mut Ctx, plan: &Path) -> Outcome {
    let plan = TowerPlan::from_json(&ctx.read(plan)?)?;
    let (tower, cert) = build_tower(&plan)?;
    Ok(serde_json::to_value(tower.to_file(&cert)).expect("tower file serialises"))
}

fn tower_verify(ctx: &mut Ctx, path: &Path) -> Outcome {
    let file = TowerFile::from_json(&ctx.read(path)?)?;
    let report = verify_tower(&file)?;
    let v = json!({ "passed": report.passed, "failures": report.failures });
    if report.passed {
        Ok(v)
    } else {
        Err(Failure::Check(format!(
            "tower verification failed:\n  {}",
            report.failures.join("\n  ")
        )))
    }
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModuleKind {
    Adjoint,
    Dual,
    Plain,
}

#[derive(Deserialize)]
struct ModuleFile {
    schema_version: u32,
    kind: ModuleKind,
    /// Residual representation for `adjoint` and `dual`.
    rho: Option<DeformationFile>,
    /// Generator actions for `plain`.
    actions: Option<Vec<Mat>>,
}

fn h1(ctx: &mut Ctx, group: &Path, module: &Path) -> Outcome {
    let g = ctx.group(group)?;
    let spec: ModuleFile = ctx.json(module)?;
    check_version(spec.schema_version)?;
    let m: GModule = match spec.kind {
        ModuleKind::Plain => {
            let actions = spec
                .actions
                .ok_or_else(|| Failure::Input("plain module needs actions".into()))?;
            let ring = actions
                .first()
                .ok_or_else(|| Failure::Input("no actions".into()))?
                .ring()
                .clone();
            GModule::from_actions(&ring, actions, Twist::Plain)?
        }
        kind => {
            let rho = spec
                .rho
                .ok_or_else(|| Failure::Input("module needs rho".into()))?
                .into_deformation()?;
            let twist = match kind {
                ModuleKind::Adjoint => Twist::Adjoint,
                _ => Twist::CartierDual,
            };
            build_module(&rho, &g, rho.degree(), twist)?
        }
    };
    let space = cohomology::cocycle_space(&g, &m)?;
    Ok(json!({
        "group": g.name,
        "module_dim": m.dim(),
        "twist": m.twist(),
        "invariants_dim": m.invariants_dim(),
        "z1": space.z1.len(),
        "b1": space.b1.len(),
        "h1": space.h1,
    }))
}

fn nice_scan(ctx: &mut Ctx, group: &Path, rho: &Path) -> Outcome {
    let g = ctx.group(group)?;
    let file: DeformationFile = ctx.json(rho)?;
    let rho = file.into_deformation()?;
    let places = g.places_by_label();
    let mut rows = Vec::new();
    for v in &places {
        let ram = is_unramified_at(&rho, v)?;
        rows.push(json!({
            "place": v.label,
            "q": v.q,
            "unramified": ram.unramified,
            "nice": is_nice(v, &rho)?,
            "rho_m_nice": is_rho_m_nice(v, &rho)?,
        }));
    }
    let c = OracleConstraints {
        rho_m_nice: true,
        module: None,
        classes: Vec::new(),
    };
    match oracle_find_places(&g, &places, &rho, &c) {
        Ok(v) => Ok(json!({ "level": rho.level(), "places": rows, "first_rho_m_nice": v.label })),
        Err(LiftError::NotFound) => Err(Failure::NotFound(format!(
            "no rho_m-nice place among {} places",
            places.len()
        ))),
        Err(e) => Err(e.into()),
    }
}

#[derive(Deserialize)]
struct KMatFile {
    entries: Vec<i64>,
    #[serde(default)]
    den: u32,
}

fn default_degree() -> usize {
    1
}

fn default_precision() -> u32 {
    witt_tower::matlin::DEFAULT_WORKING_PRECISION
}

#[derive(Deserialize)]
struct MatsFile {
    schema_version: u32,
    ell: u64,
    #[serde(default = "default_degree")]
    degree: usize,
    #[serde(default = "default_precision")]
    precision: u32,
    generators: Vec<KMatFile>,
}

#[derive(Serialize)]
struct KMatOut {
    num: Mat,
    den: u32,
}

impl From<&KMat> for KMatOut {
    fn from(k: &KMat) -> Self {
        KMatOut {
            num: k.num.clone(),
            den: k.den,
        }
    }
}

fn integral(ctx: &mut Ctx, path: &Path) -> Outcome {
    let f: MatsFile = ctx.json(path)?;
    check_version(f.schema_version)?;
    let ring = WittRing::new(f.ell, f.degree, f.precision).map_err(|e| Failure::Input(e.to_string()))?;
    let gens = f
        .generators
        .iter()
        .map(|k| KMat::from_ints(&ring, &k.entries, k.den))
        .collect::<Result<Vec<_>, _>>()?;
    let p = integral_model(&gens)?;
    let conj = gens
        .iter()
        .map(|g| g.conjugate_by(&p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({
        "conjugator": KMatOut::from(&p),
        "conjugated": conj.iter().map(KMatOut::from).collect::<Vec<_>>(),
        "integral": conj.iter().all(|c| c.is_integral()),
    }))
}

#[derive(Deserialize)]
struct TracesFile {
    schema_version: u32,
    traces: Vec<WittElem>,
}

/// Traces from a traces file, or every logged trace of a tower file.
fn field_of_def(ctx: &mut Ctx, path: &Path, dmax: usize) -> Outcome {
    let s = ctx.read(path)?;
    let v: Value = serde_json::from_str(&s).map_err(|e| Failure::Input(e.to_string()))?;
    let traces: Vec<WittElem> = if v.get("levels").is_some() {
        let file = TowerFile::from_json(&s)?;
        file.levels
            .iter()
            .flat_map(|l| l.traces.iter().map(|t| t.trace.clone()))
            .collect()
    } else {
        let f: TracesFile = serde_json::from_value(v).map_err(|e| Failure::Input(e.to_string()))?;
        check_version(f.schema_version)?;
        f.traces
    };
    if dmax == 0 {
        return Err(Failure::Input("dmax must be positive".into()));
    }
    Ok(json!({
        "dmax": dmax,
        "traces": traces.len(),
        "field_of_definition": field_of_definition(&traces, dmax),
    }))
}

fn density_cmd(ctx: &mut Ctx, a: &DensityArgs) -> Outcome {
    let q = TubeQuery::from_json(&ctx.read(&a.query)?)?;
    let mode = match (a.exact, a.sample) {
        (true, _) => Mode::Exact,
        (_, Some(n)) => Mode::Sample(n),
        _ => Mode::Auto,
    };
    let exec = if a.sequential {
        witt_tower::exec::ExecMode::Sequential
    } else {
        witt_tower::exec::ExecMode::Parallel
    };
    let r = density::tube_measure_with(&q, mode, ctx.seed, exec)?;
    Ok(serde_json::to_value(r).expect("report serialises"))
}

fn emit(out: &Option<PathBuf>, v: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("json value serialises");
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut ctx = Ctx {
        seed: cli.seed,
        inputs: Vec::new(),
    };
    let (name, result) = match &cli.command {
        // The tower file itself is the artifact, so it is written unwrapped.
        Command::Tower(TowerCmd::Build { plan }) => {
            let file = tower_build(&mut ctx, plan)?;
            return emit(&cli.out, &file);
        }
        Command::Tower(TowerCmd::SamplePlan { max_level, fixed }) => {
            let plan = TowerPlan::free4(*max_level, !*fixed);
            return emit(&cli.out, &serde_json::to_value(plan).expect("plan serialises"));
        }
        Command::Tower(TowerCmd::Verify { tower }) => ("tower verify", tower_verify(&mut ctx, tower)),
        Command::H1 { group, module } => ("h1", h1(&mut ctx, group, module)),
        Command::NiceScan { group, rho } => ("nice-scan", nice_scan(&mut ctx, group, rho)),
        Command::IntegralModel { mats } => ("integral-model", integral(&mut ctx, mats)),
        Command::TameCheck { x, y, q, ell } => ("tame-check", tame_check(x, y, *q, *ell)),
        Command::FieldOfDef { traces, dmax } => ("field-of-def", field_of_def(&mut ctx, traces, *dmax)),
        Command::Density(a) => ("density", density_cmd(&mut ctx, a)),
    };
    let result = result?;
    emit(
        &cli.out,
        &json!({
            "tool": "witt-tower",
            "version": env!("CARGO_PKG_VERSION"),
            "command": name,
            "seed": ctx.seed,
            "inputs": ctx.inputs,
            "result": result,
        }),
    )
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 4 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
