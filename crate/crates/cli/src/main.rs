use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quatobs::algebra::classify;
use quatobs::cosmology::{
    self, Branch, Chirality, CosmologyConfig, LinearProfile, TableProfile, TimeProfile, VistaSpec,
};
use quatobs::dynamics::{integrate, propensity, same_world, SystemConfig};
use quatobs::export::{float_value, to_canonical_json};
use quatobs::hyperkahler::hyperfield;
use quatobs::semantics::{orbits, validate_model, FiniteAction};
use quatobs::{Error, Quaternion, QuaternionMatrix, QuaternionTuple, Result, StructureTensor};

#[derive(Parser)]
#[command(name = "quatobs", version, about = "Quaternionic observer toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the real algebra given by a structure tensor file.
    AlgebraClassify {
        /// JSON `{"dim": d, "components": [[[...]]]}` with components[γ][α][β].
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a (u, a)-vista as CSV.
    Vista {
        #[arg(long, value_parser = parse_quaternion, allow_hyphen_values = true)]
        u: Quaternion,
        #[arg(long, value_parser = parse_quaternion, allow_hyphen_values = true)]
        a: Quaternion,
        #[arg(long, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = ChiralityArg::Left)]
        chirality: ChiralityArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Metric, structure and ether components of the cosmology at a point.
    CosmoFrame {
        /// `linear` or `table FILE`.
        #[arg(long, num_args = 1..=2, value_names = ["KIND", "FILE"], default_values_t = ["linear".to_string()])]
        profile: Vec<String>,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        eta0: f64,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, allow_hyphen_values = true)]
        chi: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate the hyperfield flow of an operator with RK4, as CSV.
    Evolve {
        /// JSON n×n array of quaternions `[w, x, y, z]`.
        #[arg(long, conflicts_with = "scalar")]
        operator: Option<PathBuf>,
        /// Use `q·Id` as the operator.
        #[arg(long, value_parser = parse_quaternion, allow_hyphen_values = true)]
        scalar: Option<Quaternion>,
        /// Quaternion entries separated by `;`.
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        state: QuaternionTuple,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Propensity between two states of the standard structure.
    Propensity {
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        phi: QuaternionTuple,
        #[arg(long, value_parser = parse_tuple, allow_hyphen_values = true)]
        psi: QuaternionTuple,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an M-set model and report its modes.
    MsetCheck {
        /// JSON `{"monoid": {"size", "table", "identity"}, "carrier", "action"}`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ChiralityArg {
    Left,
    Right,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Plus,
    Minus,
}

fn parse_quaternion(s: &str) -> std::result::Result<Quaternion, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if parts.len() != 4 {
        return Err(format!("expected w,x,y,z, got {} components", parts.len()));
    }
    if parts.iter().any(|c| !c.is_finite()) {
        return Err("components must be finite".into());
    }
    Ok(Quaternion::from_slice(&parts))
}

fn parse_tuple(s: &str) -> std::result::Result<QuaternionTuple, String> {
    let entries = s.split(';').map(parse_quaternion).collect::<std::result::Result<Vec<_>, _>>()?;
    QuaternionTuple::new(entries).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::validation(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &[u8]) -> Result<()> {
    let res = match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text),
    };
    res.map_err(|e| Error::validation(format!("cannot write output: {e}")))
}

fn emit_json(out: Option<&Path>, v: &Value) -> Result<()> {
    emit(out, to_canonical_json(v).as_bytes())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::AlgebraClassify { tensor, trials, seed, out } => {
            let t: StructureTensor = serde_json::from_str(&read(&tensor)?)
                .map_err(|e| Error::validation(format!("{}: {e}", tensor.display())))?;
            emit_json(out.as_deref(), &to_value(&classify(&t, trials, seed)))
        }
        Command::Vista { u, a, t1, steps, chirality, out } => {
            let chirality = match chirality {
                ChiralityArg::Left => Chirality::Left,
                ChiralityArg::Right => Chirality::Right,
            };
            let spec = VistaSpec::new(u, a, chirality)?;
            let samples = cosmology::vista_samples(&spec, t1, steps)?;
            let mut buf = Vec::new();
            cosmology::write_vista_csv(&samples, &mut buf).expect("write to memory");
            emit(out.as_deref(), &buf)
        }
        Command::CosmoFrame { profile, branch, eta0, r0, eta, chi, theta, out } => {
            let profile: Arc<dyn TimeProfile> = match profile.as_slice() {
                [kind] if kind == "linear" => Arc::new(LinearProfile::new(1.0)),
                [kind, file] if kind == "table" => Arc::new(TableProfile::parse(&read(Path::new(file))?)?),
                _ => return Err(Error::validation("--profile expects `linear` or `table FILE`")),
            };
            let branch = match branch {
                BranchArg::Plus => Branch::Plus,
                BranchArg::Minus => Branch::Minus,
            };
            let cfg = CosmologyConfig::new(profile, branch, eta0, r0)?;
            let fc = cosmology::frame_components(&cfg, eta, chi, theta)?;
            let mut v = fc.to_json();
            v["scale_factor"] = float_value(cosmology::scale_factor(&cfg, eta)?);
            emit_json(out.as_deref(), &v)
        }
        Command::Evolve { operator, scalar, state, t_end, dt, out } => {
            let n = state.len();
            let op = match (operator, scalar) {
                (Some(path), _) => {
                    let rows: Vec<Vec<Quaternion>> = serde_json::from_str(&read(&path)?)
                        .map_err(|e| Error::validation(format!("{}: {e}", path.display())))?;
                    QuaternionMatrix::from_rows(rows)?
                }
                (None, Some(q)) => QuaternionMatrix::scalar(n, q),
                (None, None) => return Err(Error::validation("evolve needs --operator or --scalar")),
            };
            if op.dim() != n {
                return Err(Error::validation(format!("operator is {0}x{0} but the state has {n} entries", op.dim())));
            }
            let start = quatobs::hyperkahler::realify(&state, &quatobs::CanonicalFrame::identity());
            let traj = integrate(|p| Ok(hyperfield(&op, p)?.vector), &start, t_end, dt)?;
            let mut buf = Vec::new();
            traj.write_csv(&mut buf).expect("write to memory");
            emit(out.as_deref(), &buf)
        }
        Command::Propensity { phi, psi, out } => {
            if phi.len() != psi.len() {
                return Err(Error::validation("states have different lengths"));
            }
            let cfg = SystemConfig::standard(phi.len(), |_| 0.0)?;
            let (p, q) = (cfg.structure().realify(&phi)?, cfg.structure().realify(&psi)?);
            let prop = propensity(&cfg, &p, &q)?;
            let witness = same_world(&p, &q)?;
            emit_json(
                out.as_deref(),
                &json!({
                    "propensity": float_value(prop.value()),
                    "same_world": witness.is_some(),
                    "world_witness": witness.map(|w| to_value(&w)),
                }),
            )
        }
        Command::MsetCheck { model, out } => {
            let action = FiniteAction::from_json(&read(&model)?)?;
            let report = validate_model(&action)?;
            let mut v = json!({ "validation": to_value(&report) });
            if report.valid {
                v["modes"] = to_value(&orbits(&action));
                v["units"] = to_value(&action.monoid.units());
                v["booleanity_proxy"] = json!({
                    "all_elements_are_units": action.monoid.booleanity_proxy(),
                    "is_proxy": true,
                });
            }
            emit_json(out.as_deref(), &v)?;
            if report.valid {
                Ok(())
            } else {
                Err(Error::validation(format!("model violates {} law instances", report.violations.len())))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 2 } else { 1 })
        }
    }
}
