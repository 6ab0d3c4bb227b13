use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use orbitcut::corepoint::{core_by_membership, is_lattice_free, membership, projected_essential_set, Membership};
use orbitcut::engine::{self, Algorithm, AlgorithmChoice, AnchorMode, EngineOptions};
use orbitcut::exact::format_rational;
use orbitcut::group::{fixed_space_basis, parse_generators, DEFAULT_MAX_WORD_LEN};
use orbitcut::solve::{Status, DEFAULT_BOX, DEFAULT_NODE_LIMIT};
use orbitcut::spectral::{t_hat_exact, t_values_int};
use orbitcut::synth::{RotationMode, DEFAULT_EPS};
use orbitcut_cli::file;
use orbitcut_cli::generate::{generate, GenOptions};
use serde_json::{json, Value};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNKNOWN: u8 = 3;
const EXIT_BAD_INPUT: u8 = 64;

#[derive(Parser)]
#[command(name = "orbitcut", version, about = "Symmetric integer programs solved through core-point subproblems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Auto,
    Plain,
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
}

#[derive(Clone, Copy, ValueEnum)]
enum RotationArg {
    All,
    Canonical,
}

#[derive(Subcommand)]
enum Command {
    /// Group class, selected cycles, fixed space and LP layer of an instance.
    Analyze { file: PathBuf },
    /// Writes the vertex-cut orbit-simplex instance of a core point.
    Gen {
        /// Generator in cycle notation, e.g. "(1,2,3,4,5)"; repeatable.
        #[arg(long = "generator", short = 'g', required = true)]
        generators: Vec<String>,
        /// Comma-separated core point.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Output path; stdout when omitted.
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
        /// Leave out the vertex cuts.
        #[arg(long)]
        no_cuts: bool,
        /// Skip the enumeration certificate and record a warning instead.
        #[arg(long)]
        skip_certify: bool,
    },
    /// Solves an instance and prints the report.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        algorithm: AlgorithmArg,
        /// Points per essential set.
        #[arg(long, default_value_t = 4)]
        budget: usize,
        #[arg(long, default_value_t = DEFAULT_EPS)]
        eps: f64,
        /// Half-width of the enumeration box.
        #[arg(long = "box", default_value_t = DEFAULT_BOX)]
        box_half: i64,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Writes every subproblem as MINLP-JSON into this directory.
        #[arg(long)]
        export_dir: Option<PathBuf>,
        /// Search nodes per subproblem.
        #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
        node_limit: u64,
        #[arg(long, value_enum, default_value = "all")]
        s1_rotations: RotationArg,
        /// Literal singularity disjunction without the sign guard.
        #[arg(long)]
        s2_literal: bool,
        /// Adds anchor probes for every combination of points across cycles.
        #[arg(long)]
        product_mode: bool,
        /// Omits wall-clock times so reports are byte-identical across runs.
        #[arg(long)]
        no_timing: bool,
    },
    /// Decides whether a point is a core point.
    CheckCore {
        #[arg(long = "generator", short = 'g', required = true)]
        generators: Vec<String>,
        #[arg(allow_hyphen_values = true)]
        point: String,
    },
    /// Projected essential set of a residue class.
    Essential { k: usize, residue: usize, budget: usize },
    /// Circulant inverse data of a vector.
    Tvalues {
        #[arg(allow_hyphen_values = true)]
        c: String,
    },
}

type CmdResult = Result<(Value, u8), String>;

fn parse_point(text: &str) -> Result<Vec<i64>, String> {
    text.trim()
        .trim_start_matches('(')
        .trim_end_matches(')')
        .split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| format!("bad integer {t:?} in {text:?}")))
        .collect()
}

fn analyze(path: &Path) -> CmdResult {
    let f = file::read(path).map_err(|e| e.to_string())?;
    let inst = &f.instance;
    let gs = &inst.group;
    let relax = orbitcut::solve::lp_relax(inst);
    let layer = relax
        .point
        .as_ref()
        .map(|x| format_rational(&x.iter().sum()));
    let mut notes = Vec::new();
    if gs.nontrivial_generators().next().is_none() {
        notes.push("NoSymmetry: the group is trivial".to_string());
    } else if gs.selected_cycles.is_empty() {
        notes.push("NoSymmetry: no cycle could be selected".to_string());
    }
    let mut warnings = inst.check_symmetry();
    warnings.extend(f.warnings.iter().cloned());
    Ok((
        json!({
            "n": inst.n,
            "generators": gs.generators.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
            "class": gs.class,
            "selected_cycles": gs.selected_cycles,
            "non_active": gs.non_active().iter().map(|i| i + 1).collect::<Vec<_>>(),
            "fixed_space_basis": fixed_space_basis(gs).vectors,
            "relaxation": relax,
            "lp_layer": layer,
            "notes": notes,
            "warnings": warnings,
        }),
        0,
    ))
}

fn solve(path: &Path, opts: EngineOptions, export_dir: Option<&Path>, no_timing: bool) -> CmdResult {
    let f = file::read(path).map_err(|e| e.to_string())?;
    let plan = engine::plan(&f.instance, &opts).map_err(|e| e.to_string())?;
    if let Some(dir) = export_dir {
        engine::export_plan(&plan, dir).map_err(|e| e.to_string())?;
    }
    let mut report = engine::run(&plan, &opts).map_err(|e| e.to_string())?;
    report.warnings.extend(f.warnings.iter().cloned());
    if no_timing {
        report.timing = None;
    }
    let code = match report.verdict {
        Status::Feasible | Status::Unbounded => 0,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Unknown => EXIT_UNKNOWN,
    };
    Ok((serde_json::to_value(&report).map_err(|e| e.to_string())?, code))
}

fn check_core(generators: &[String], point: &str) -> CmdResult {
    let z = parse_point(point)?;
    let gs = parse_generators(generators, z.len())
        .map_err(|e| e.to_string())?
        .analyzed(DEFAULT_MAX_WORD_LEN);
    let cert = is_lattice_free(&gs, &z, 0).map_err(|e| e.to_string())?;
    let mut out = json!({"point": cert.point, "verdict": cert.verdict, "witness": cert.witness});
    if let [cycle] = gs.selected_cycles.as_slice() {
        if let Ok(by_membership) = core_by_membership(&z, cycle) {
            out["membership_verdict"] = json!(by_membership.verdict);
        }
        if let Some(w) = &cert.witness {
            if let Ok(Membership::Inside(b)) = membership(w, &z, cycle) {
                out["witness_lambda"] = json!(b.lambda.iter().map(format_rational).collect::<Vec<_>>());
            }
        }
    }
    Ok((out, 0))
}

fn tvalues(c: &str) -> CmdResult {
    let c = parse_point(c)?;
    let exact = t_hat_exact(&c).map_err(|e| e.to_string())?;
    let tv = t_values_int(&c).map_err(|e| e.to_string())?;
    let n = c.len() as i64;
    let layer: i64 = c.iter().sum();
    let t_exact: Vec<String> = exact
        .iter()
        .map(|q| format_rational(&(q * num_rational::BigRational::from_integer(n.into()) - num_rational::BigRational::new(1.into(), layer.into()))))
        .collect();
    Ok((
        json!({
            "c": c,
            "t": t_exact,
            "t_hat": exact.iter().map(format_rational).collect::<Vec<_>>(),
            "t_float": tv.t,
            "t_hat_float": tv.t_hat,
            "t_bar_float": tv.t_bar,
            "layer_sum": layer,
        }),
        0,
    ))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Analyze { file } => analyze(&file),
        Command::Gen {
            generators,
            point,
            out,
            no_cuts,
            skip_certify,
        } => {
            let z = parse_point(&point)?;
            let f = generate(
                &generators,
                &z,
                GenOptions {
                    cuts: !no_cuts,
                    certify: !skip_certify,
                },
            )
            .map_err(|e| e.to_string())?;
            match out {
                Some(path) => {
                    f.write(&path).map_err(|e| e.to_string())?;
                    Ok((json!({"written": path, "rows": f.instance.rows.len(), "warnings": f.warnings}), 0))
                }
                None => Ok((f.to_value(), 0)),
            }
        }
        Command::Solve {
            file,
            algorithm,
            budget,
            eps,
            box_half,
            jobs,
            export_dir,
            node_limit,
            s1_rotations,
            s2_literal,
            product_mode,
            no_timing,
        } => {
            let algorithm = match algorithm {
                AlgorithmArg::Auto => AlgorithmChoice::Auto,
                AlgorithmArg::Plain => AlgorithmChoice::Fixed(Algorithm::NoSymmetry),
                AlgorithmArg::One => AlgorithmChoice::Fixed(Algorithm::Layers),
                AlgorithmArg::Two => AlgorithmChoice::Fixed(Algorithm::Residues),
                AlgorithmArg::Three => AlgorithmChoice::Fixed(Algorithm::ResidueTuples),
            };
            if !(eps.is_finite() && eps > 0.0) {
                return Err("--eps must be positive".to_string());
            }
            if box_half < 0 {
                return Err("--box must be non-negative".to_string());
            }
            let opts = EngineOptions {
                algorithm,
                budget,
                eps,
                box_half,
                node_limit,
                jobs,
                rotations: match s1_rotations {
                    RotationArg::All => RotationMode::All,
                    RotationArg::Canonical => RotationMode::Canonical,
                },
                s2_literal,
                anchors: if product_mode { AnchorMode::Product } else { AnchorMode::Sum },
            };
            solve(&file, opts, export_dir.as_deref(), no_timing)
        }
        Command::CheckCore { generators, point } => check_core(&generators, &point),
        Command::Essential { k, residue, budget } => {
            if k < 2 || residue == 0 || residue > k {
                return Err(format!("residue must lie in 1..={k} and k must be at least 2"));
            }
            Ok((json!(projected_essential_set(k, residue, budget)), 0))
        }
        Command::Tvalues { c } => tvalues(&c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_BAD_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok((value, code)) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            ExitCode::from(code)
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}
