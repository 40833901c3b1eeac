//! Command-line front end. Machine-readable JSON on stdout (or `--out`),
//! diagnostics on stderr, stable exit codes for CI:
//!
//! 0 success / all checks pass, 1 check failure, 2 parse or I/O error,
//! 3 ultrametric violation, 4 invalid input, 5 internal verification
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use treejump::boundary::{
    exp_neg_generator, generator_matrix, jump_kernel_table, JumpProcessSpec, SigmaMeasure,
};
use treejump::duality::{
    check_base_point_invariance, check_doob_naim, check_jump_naim_equality, check_roundtrip,
    indicator_basis, process_to_walk, walk_to_process,
};
use treejump::json as wire;
use treejump::ratio::{fmt_rat, parse_rat, rat_to_f64};
use treejump::report::CheckReport;
use treejump::simulate::{simulate_jump_chain, simulate_walk, Rng64, SimConfig};
use treejump::tree::{tree_from_ultrametric, Tree, Vertex};
use treejump::walk::{check_kernel_identities, Walk, WalkKernels};
use treejump::{Error, Result};

#[derive(Parser)]
#[command(name = "treejump", version, about = "Random walks on finite trees and jump processes on their ultrametric boundary: exact kernels, duality, verification.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    DoobNaim,
    Theorem1,
    Invariance,
    Identities,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    WalkToProcess,
    ProcessToWalk,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Walk,
    Jump,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Pretty-print the JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Build the ball tree and radius labelling of an ultrametric space.
    BuildFromMetric {
        /// Ultrametric space file.
        space: PathBuf,
        /// Write the tree file here (also included in the stdout document).
        #[arg(long)]
        out_tree: Option<PathBuf>,
        /// Write the radius labelling here.
        #[arg(long)]
        out_phi: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Exact kernel tables and the identity-check report for a walk.
    Analyze {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        walk: PathBuf,
        /// Permit interior vertices with a single child.
        #[arg(long)]
        allow_unary: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Convert between a walk and its boundary process data.
    Dualize {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(long)]
        tree: PathBuf,
        /// Walk file (walk-to-process).
        #[arg(long)]
        walk: Option<PathBuf>,
        /// Radius labelling file (process-to-walk).
        #[arg(long)]
        phi: Option<PathBuf>,
        /// Boundary measure file (process-to-walk).
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        allow_unary: bool,
        #[arg(long)]
        out_phi: Option<PathBuf>,
        #[arg(long)]
        out_mu: Option<PathBuf>,
        #[arg(long)]
        out_walk: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run exact verification suites; exit 0 only if everything passes.
    Check {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        walk: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Random boundary functions added to the indicator basis.
        #[arg(long, default_value_t = 20)]
        random_functions: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        allow_unary: bool,
        /// Debug: corrupt one Green entry first; the suites must then fail.
        #[arg(long, hide = true)]
        corrupt_green: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Semigroup operator matrices for a jump process.
    Semigroup {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        sigma: PathBuf,
        /// Semigroup times; repeatable. Positive reals in float mode,
        /// positive integers in exact mode.
        #[arg(long = "t", required = true)]
        times: Vec<String>,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        /// Report the residual of the operator against exp(-t * generator);
        /// diagnostic only, no pass/fail meaning.
        #[arg(long)]
        diag_generator: bool,
        #[arg(long)]
        allow_unary: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Seeded Monte Carlo runs against the exact distributions.
    Simulate {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        walk: Option<PathBuf>,
        #[arg(long)]
        phi: Option<PathBuf>,
        #[arg(long)]
        mu: Option<PathBuf>,
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long)]
        start: Vertex,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: u64,
        /// Steps per trial for the jump chain.
        #[arg(long, default_value_t = 1)]
        steps: u32,
        #[arg(long)]
        allow_unary: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse(_) => 2,
        Error::UltrametricViolation { .. } | Error::DuplicatePoints { .. } => 3,
        Error::InvalidTree(_)
        | Error::InvalidWalk(_)
        | Error::InvalidElement(_)
        | Error::InvalidMeasure(_)
        | Error::InvalidSigma(_)
        | Error::InvalidInput(_) => 4,
        Error::Internal(_) => 5,
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn write_doc(value: &Value, output: &OutputArgs) -> Result<()> {
    let text = wire::to_string(value, output.pretty);
    match &output.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn write_component(value: &Value, path: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = path {
        std::fs::write(path, wire::to_string(value, true).as_bytes())
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn load_walk(tree_path: &Path, walk_path: &Path, allow_unary: bool) -> Result<(Walk, WalkKernels)> {
    let tree = wire::parse_tree(&read(tree_path)?, allow_unary)?;
    let walk = wire::parse_walk(&read(walk_path)?, tree)?;
    let kernels = WalkKernels::compute(&walk);
    Ok((walk, kernels))
}

fn rat_table<'a>(pairs: impl Iterator<Item = (Vertex, &'a treejump::Rat)>) -> Value {
    let map: std::collections::BTreeMap<String, String> =
        pairs.map(|(v, r)| (v.to_string(), fmt_rat(r))).collect();
    serde_json::json!(map)
}

fn run_build_from_metric(
    space: &Path,
    out_tree: &Option<PathBuf>,
    out_phi: &Option<PathBuf>,
    output: &OutputArgs,
) -> Result<u8> {
    let space = wire::parse_space(&read(space)?)?;
    let mt = tree_from_ultrametric(&space)?;
    let tree_doc = wire::emit_tree(&mt.tree);
    let phi_doc = wire::emit_phi(&mt.phi);
    write_component(&tree_doc, out_tree)?;
    write_component(&phi_doc, out_phi)?;
    let leaves: std::collections::BTreeMap<String, Vertex> = space
        .points
        .iter()
        .cloned()
        .zip(mt.point_leaf.iter().copied())
        .collect();
    write_doc(
        &serde_json::json!({ "tree": tree_doc, "phi": phi_doc, "leaves": leaves }),
        output,
    )?;
    Ok(0)
}

fn run_analyze(tree: &Path, walk: &Path, allow_unary: bool, output: &OutputArgs) -> Result<u8> {
    let (walk, kernels) = load_walk(tree, walk, allow_unary)?;
    let t = walk.tree();
    let entries = check_kernel_identities(&walk, &kernels);
    let nu_root = kernels.harmonic_measure(t.root())?;
    let green_root = kernels.green_column(t.root())?;
    let non_root: Vec<Vertex> = (0..t.vertex_count()).filter(|v| t.parent(*v).is_some()).collect();
    let pass = entries.iter().all(|e| e.pass);
    let doc = serde_json::json!({
        "hit_up": rat_table(non_root.iter().map(|&v| (v, kernels.hit_up(v)))),
        "hit_down": rat_table(non_root.iter().map(|&v| (v, kernels.hit_down(v)))),
        "green_diag": rat_table(t.interior_vertices().map(|v| (v, kernels.green_diag(v)))),
        "green_root_column": rat_table(green_root.iter().enumerate()),
        "return_prob": rat_table(t.interior_vertices().map(|v| (v, kernels.return_prob(v)))),
        "weight": rat_table(t.interior_vertices().map(|v| (v, kernels.weight(v)))),
        "conductance": rat_table(non_root.iter().map(|&v| (v, kernels.conductance(v)))),
        "nu_root": wire::emit_mu(t, &nu_root),
        "report": entries,
    });
    write_doc(&doc, output)?;
    Ok(if pass { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn run_dualize(
    direction: Direction,
    tree: &Path,
    walk: &Option<PathBuf>,
    phi: &Option<PathBuf>,
    mu: &Option<PathBuf>,
    allow_unary: bool,
    out_phi: &Option<PathBuf>,
    out_mu: &Option<PathBuf>,
    out_walk: &Option<PathBuf>,
    output: &OutputArgs,
) -> Result<u8> {
    match direction {
        Direction::WalkToProcess => {
            let walk =
                walk.as_ref().ok_or_else(|| Error::InvalidInput("--walk is required".into()))?;
            let (walk, kernels) = load_walk(tree, walk, allow_unary)?;
            let dual = walk_to_process(&walk, &kernels)?;
            let phi_doc = wire::emit_phi(&dual.phi);
            let mu_doc = wire::emit_mu(walk.tree(), &dual.mu);
            write_component(&phi_doc, out_phi)?;
            write_component(&mu_doc, out_mu)?;
            write_doc(&serde_json::json!({ "phi": phi_doc, "mu": mu_doc }), output)?;
        }
        Direction::ProcessToWalk => {
            let tree = wire::parse_tree(&read(tree)?, allow_unary)?;
            let phi_path =
                phi.as_ref().ok_or_else(|| Error::InvalidInput("--phi is required".into()))?;
            let mu_path =
                mu.as_ref().ok_or_else(|| Error::InvalidInput("--mu is required".into()))?;
            let phi = wire::parse_phi(&read(phi_path)?, &tree)?;
            let mu = wire::parse_mu(&read(mu_path)?, &tree)?;
            let trace = process_to_walk(&tree, &phi, &mu)?;
            let walk_doc = wire::emit_walk(&trace.walk);
            write_component(&walk_doc, out_walk)?;
            write_doc(
                &serde_json::json!({ "c": fmt_rat(&trace.c), "walk": walk_doc }),
                output,
            )?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_check(
    tree: &Path,
    walk: &Path,
    suite: Suite,
    random_functions: usize,
    seed: u64,
    allow_unary: bool,
    corrupt_green: bool,
    output: &OutputArgs,
) -> Result<u8> {
    let (walk, mut kernels) = load_walk(tree, walk, allow_unary)?;
    if corrupt_green {
        kernels.corrupt_green_for_testing(walk.tree().root());
    }
    let mut reports: Vec<CheckReport> = Vec::new();
    if matches!(suite, Suite::All | Suite::DoobNaim) {
        let mut funcs = indicator_basis(walk.tree());
        let mut rng = Rng64::new(seed);
        for k in 0..random_functions {
            funcs.push((
                format!("rand_{k}"),
                treejump::fixtures::random_leaf_function(&mut rng, walk.tree().leaf_count()),
            ));
        }
        reports.push(check_doob_naim(&walk, &kernels, &funcs)?);
    }
    if matches!(suite, Suite::All | Suite::Theorem1) {
        reports.push(check_jump_naim_equality(&walk, &kernels)?);
    }
    if matches!(suite, Suite::All | Suite::Invariance) {
        reports.push(check_base_point_invariance(&walk, &kernels)?);
    }
    if matches!(suite, Suite::All | Suite::Identities) {
        let mut identities = CheckReport::new("kernel-identities");
        for entry in check_kernel_identities(&walk, &kernels) {
            identities.record(entry);
        }
        reports.push(identities);
    }
    if matches!(suite, Suite::All) && !corrupt_green {
        reports.push(check_roundtrip(&walk, &kernels, seed)?);
    }
    let pass = reports.iter().all(|r| r.passed());
    write_doc(&serde_json::json!(reports), output)?;
    Ok(if pass { 0 } else { 1 })
}

#[allow(clippy::too_many_arguments)]
fn run_semigroup(
    tree: &Path,
    phi: &Path,
    mu: &Path,
    sigma: &Path,
    times: &[String],
    mode: Mode,
    diag_generator: bool,
    allow_unary: bool,
    output: &OutputArgs,
) -> Result<u8> {
    let tree = wire::parse_tree(&read(tree)?, allow_unary)?;
    let phi = wire::parse_phi(&read(phi)?, &tree)?;
    let mu = wire::parse_mu(&read(mu)?, &tree)?;
    let sigma = wire::parse_sigma(&read(sigma)?)?;
    let spec = JumpProcessSpec::new(tree, phi, mu, sigma)?;

    let mut matrices = Vec::new();
    let mut float_ops: Vec<treejump::boundary::LeafMatrix<f64>> = Vec::new();
    let mut t_values: Vec<f64> = Vec::new();
    match mode {
        Mode::Exact => {
            if !matches!(spec.sigma(), SigmaMeasure::Tabulated(_)) {
                return Err(Error::InvalidInput(
                    "exact mode needs a tabulated CDF; the standard CDF is transcendental (use --mode float)".into(),
                ));
            }
            for t in times {
                let steps: u32 = t.parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "exact mode needs positive integer times, got {t:?} (use --mode float)"
                    ))
                })?;
                if steps == 0 {
                    return Err(Error::InvalidInput("semigroup time must be positive".into()));
                }
                let m = spec.transition_operator_exact(steps)?;
                matrices.push(serde_json::json!({
                    "t": steps,
                    "operator": wire::emit_operator_exact(&m),
                }));
                float_ops.push(m.to_f64());
                t_values.push(steps as f64);
            }
        }
        Mode::Float => {
            for t in times {
                let t: f64 = parse_rat(t).map(|r| rat_to_f64(&r)).or_else(|_| {
                    t.parse::<f64>()
                        .map_err(|_| Error::InvalidInput(format!("bad time value {t:?}")))
                })?;
                if t <= 0.0 {
                    return Err(Error::InvalidInput("semigroup time must be positive".into()));
                }
                let m = spec.transition_operator(t)?;
                matrices.push(serde_json::json!({
                    "t": t,
                    "operator": wire::emit_operator_float(&m),
                }));
                float_ops.push(m);
                t_values.push(t);
            }
        }
    }

    // Semigroup-law residual for consecutive time pairs.
    let mut residuals = Vec::new();
    for i in 0..t_values.len().saturating_sub(1) {
        let (s, t) = (t_values[i], t_values[i + 1]);
        let product = float_ops[i].mul(&float_ops[i + 1]);
        let direct = spec.transition_operator(s + t)?;
        residuals.push(serde_json::json!({
            "s": s,
            "t": t,
            "residual": product.max_abs_diff(&direct),
        }));
    }

    let mut doc = serde_json::json!({ "matrices": matrices, "semigroup_residuals": residuals });
    if diag_generator {
        let jk = jump_kernel_table(spec.tree(), spec.radius_labelling(), spec.measure())?;
        let gen = generator_matrix(spec.tree(), &jk, spec.measure());
        let diag: Vec<Value> = t_values
            .iter()
            .zip(float_ops.iter())
            .map(|(&t, op)| {
                let expm = exp_neg_generator(&gen, t);
                serde_json::json!({ "t": t, "residual": op.max_abs_diff(&expm) })
            })
            .collect();
        doc["generator_diagnostic"] = serde_json::json!(diag);
    }
    write_doc(&doc, output)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    kind: Kind,
    tree: &Path,
    walk: &Option<PathBuf>,
    phi: &Option<PathBuf>,
    mu: &Option<PathBuf>,
    sigma: &Option<PathBuf>,
    start: Vertex,
    seed: u64,
    trials: u64,
    max_steps: u64,
    steps: u32,
    allow_unary: bool,
    output: &OutputArgs,
) -> Result<u8> {
    let config = SimConfig { seed, trials, start, max_steps };
    let leaf_map = |tree: &Tree, values: &[f64]| -> Value {
        let map: std::collections::BTreeMap<String, f64> = tree
            .leaves()
            .iter()
            .map(|v| v.to_string())
            .zip(values.iter().copied())
            .collect();
        serde_json::json!(map)
    };
    match kind {
        Kind::Walk => {
            let walk_path =
                walk.as_ref().ok_or_else(|| Error::InvalidInput("--walk is required".into()))?;
            let (walk, kernels) = load_walk(tree, walk_path, allow_unary)?;
            let stats = simulate_walk(&walk, &kernels, &config)?;
            let k = walk.tree().leaf_count() as f64;
            let bound = 4.5 * (k / (4.0 * trials as f64)).sqrt();
            let doc = serde_json::json!({
                "empirical": leaf_map(walk.tree(), &stats.empirical),
                "exact": leaf_map(walk.tree(), &stats.exact),
                "std_error": leaf_map(walk.tree(), &stats.std_error),
                "tv": stats.tv,
                "bound": bound,
                "overflows": stats.overflows,
                "trials": stats.trials,
                "seed": stats.seed,
            });
            write_doc(&doc, output)?;
            Ok(if stats.tv <= bound { 0 } else { 1 })
        }
        Kind::Jump => {
            let tree = wire::parse_tree(&read(tree)?, allow_unary)?;
            let phi_path =
                phi.as_ref().ok_or_else(|| Error::InvalidInput("--phi is required".into()))?;
            let mu_path =
                mu.as_ref().ok_or_else(|| Error::InvalidInput("--mu is required".into()))?;
            let sigma_path =
                sigma.as_ref().ok_or_else(|| Error::InvalidInput("--sigma is required".into()))?;
            let phi = wire::parse_phi(&read(phi_path)?, &tree)?;
            let mu = wire::parse_mu(&read(mu_path)?, &tree)?;
            let sigma = wire::parse_sigma(&read(sigma_path)?)?;
            let spec = JumpProcessSpec::new_relaxed(tree, phi, mu, sigma)?;
            let stats = simulate_jump_chain(&spec, &config, steps)?;
            let k = spec.tree().leaf_count() as f64;
            let bound = 4.5 * (k / (4.0 * trials as f64)).sqrt();
            let doc = serde_json::json!({
                "empirical": leaf_map(spec.tree(), &stats.empirical),
                "exact": leaf_map(spec.tree(), &stats.exact),
                "tv": stats.tv,
                "bound": bound,
                "steps": stats.steps,
                "trials": stats.trials,
                "seed": stats.seed,
            });
            write_doc(&doc, output)?;
            Ok(if stats.tv <= bound { 0 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match &cli.command {
        Command::BuildFromMetric { space, out_tree, out_phi, output } => {
            run_build_from_metric(space, out_tree, out_phi, output)
        }
        Command::Analyze { tree, walk, allow_unary, output } => {
            run_analyze(tree, walk, *allow_unary, output)
        }
        Command::Dualize {
            direction,
            tree,
            walk,
            phi,
            mu,
            allow_unary,
            out_phi,
            out_mu,
            out_walk,
            output,
        } => run_dualize(
            *direction,
            tree,
            walk,
            phi,
            mu,
            *allow_unary,
            out_phi,
            out_mu,
            out_walk,
            output,
        ),
        Command::Check {
            tree,
            walk,
            suite,
            random_functions,
            seed,
            allow_unary,
            corrupt_green,
            output,
        } => run_check(
            tree,
            walk,
            *suite,
            *random_functions,
            *seed,
            *allow_unary,
            *corrupt_green,
            output,
        ),
        Command::Semigroup {
            tree,
            phi,
            mu,
            sigma,
            times,
            mode,
            diag_generator,
            allow_unary,
            output,
        } => run_semigroup(
            tree,
            phi,
            mu,
            sigma,
            times,
            *mode,
            *diag_generator,
            *allow_unary,
            output,
        ),
        Command::Simulate {
            kind,
            tree,
            walk,
            phi,
            mu,
            sigma,
            start,
            seed,
            trials,
            max_steps,
            steps,
            allow_unary,
            output,
        } => run_simulate(
            *kind,
            tree,
            walk,
            phi,
            mu,
            sigma,
            *start,
            *seed,
            *trials,
            *max_steps,
            *steps,
            *allow_unary,
            output,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
