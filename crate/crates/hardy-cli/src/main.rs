//! `hardy` — symbolic certification and numerical verification of geometric
//! Hardy inequalities for horizontal gradients.
//!
//! Subcommands: `symcheck` (exact identity suite), `verify` (deficit
//! reports), `starshaped` (boundary verdict sampler), `rayleigh` (constant
//! probing). Exit codes: 0 success, 1 failed checks/deficits, 2 inadmissible
//! test function, 3 starshapedness violated, 4 degenerate boundary,
//! 5 surviving p-sub-Laplacian term, 64 bad usage or config.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hardy_core::groups::{builtin, parse_frame_file, starshaped_check, Starshaped};
use hardy_core::hardy::{
    deficit_sweep, gamma_coefficients, optimal_gamma, seeded_bumps, GammaChoice, HardyReport,
    HardySpec, Mode, NormalSpec,
};
use hardy_core::identity::{identity_suite, FrameSet};
use hardy_core::numerics::{
    minimize_quotient, BumpFamily, BumpKind, LogWindowFamily, NelderMeadOptions, QuadratureRule,
    SingleBumpFamily, TestFunction,
};
use hardy_core::symbolic::{parse_poly, rat_from_f64, VarSet};
use hardy_core::Error as CoreError;

use config::{parse_bump, parse_f64, parse_u32, parse_u64, parse_usize, parse_vector, ConfigFile};

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "hardy",
    about = "Machine-checks geometric Hardy inequalities for horizontal gradients",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the exact symbolic identity suite; exit 0 iff every identity holds
    Symcheck,
    /// Evaluate both sides of an inequality for one bump or a seeded sweep
    Verify(VerifyArgs),
    /// Sample a polynomial level-set boundary and judge ⟨Z(x), n(x)⟩ ≥ 0
    Starshaped(StarshapedArgs),
    /// Minimize the Rayleigh quotient against the gradient weight
    Rayleigh(RayleighArgs),
}

#[derive(Args, Default)]
struct SpecFlags {
    /// Flat key=value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in group (heisenberg1 | engel | grushin) or a frame-file path
    #[arg(long)]
    group: Option<String>,
    /// Domain mode: halfspace | starshaped
    #[arg(long)]
    mode: Option<String>,
    /// Constant normal vector, comma separated
    #[arg(long)]
    n: Option<String>,
    /// Half-space offset d
    #[arg(long, allow_hyphen_values = true)]
    d: Option<f64>,
    /// Integrability exponent p (> 1)
    #[arg(long)]
    p: Option<f64>,
    /// Gamma: a number, or "optimal" (valid when the L_p term vanishes)
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    /// Gauss–Legendre points per axis
    #[arg(long)]
    quad_order: Option<usize>,
    /// Subdivisions per axis
    #[arg(long)]
    quad_subdiv: Option<usize>,
    /// Seed for anything randomized
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (JSON report for verify, CSV trace for rayleigh)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Default)]
struct VerifyArgs {
    #[command(flatten)]
    spec: SpecFlags,
    /// One bump: "c1,..,cn:r" or "c1,..,cn:r1,..,rn"
    #[arg(long, allow_hyphen_values = true)]
    bump: Option<String>,
    /// Bump kind: smooth | poly
    #[arg(long)]
    bump_kind: Option<String>,
    /// Polynomial bump exponent m (>= 2)
    #[arg(long)]
    bump_m: Option<u32>,
    /// Evaluate this many seeded random admissible bumps instead of --bump
    #[arg(long)]
    sweep: Option<usize>,
}

#[derive(Args, Default)]
struct StarshapedArgs {
    /// Flat key=value config file; flags override file entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in group with dilation weights (heisenberg1 | engel)
    #[arg(long)]
    group: Option<String>,
    /// Level-set polynomial in x1..xn; the domain is {levelset < 0}
    #[arg(long, allow_hyphen_values = true)]
    levelset: Option<String>,
    /// Number of sampling rays
    #[arg(long)]
    rays: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Default)]
struct RayleighArgs {
    #[command(flatten)]
    spec: SpecFlags,
    /// Family: single | logwindow (default: logwindow when the normal is a
    /// coordinate direction in halfspace mode, else single)
    #[arg(long)]
    family: Option<String>,
    /// Initial bump for the single family
    #[arg(long, allow_hyphen_values = true)]
    bump: Option<String>,
    /// Optimizer iteration cap
    #[arg(long)]
    max_iter: Option<usize>,
    /// Optimizer convergence tolerance
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    hardy_core::init_thread_pool_from_env();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return ExitCode::SUCCESS;
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match cli.command {
        Command::Symcheck => cmd_symcheck(),
        Command::Verify(args) => cmd_verify(args),
        Command::Starshaped(args) => cmd_starshaped(args),
        Command::Rayleigh(args) => cmd_rayleigh(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CmdResult = Result<u8, Failure>;

fn cmd_symcheck() -> CmdResult {
    let checks = identity_suite(&FrameSet::standard()).map_err(|e| Failure {
        code: 1,
        message: e.to_string(),
    })?;
    let mut all_ok = true;
    for check in &checks {
        match &check.residual {
            None => println!("{} PASS", check.name),
            Some(residual) => {
                all_ok = false;
                println!("{} FAIL residual: {residual}", check.name);
            }
        }
    }
    Ok(if all_ok { 0 } else { 1 })
}

/// A spec instantiated from flags + config, plus the run parameters that
/// travel with it.
struct ResolvedSpec {
    spec: HardySpec,
    rule: QuadratureRule,
    seed: u64,
    out: Option<PathBuf>,
}

fn resolve_spec(flags: SpecFlags, default_rule: QuadratureRule) -> Result<ResolvedSpec, Failure> {
    let cfg = match &flags.config {
        Some(path) => ConfigFile::load(path).map_err(usage)?,
        None => ConfigFile::empty(),
    };
    let group = cfg
        .merge(flags.group, "group", |s| Ok(s.to_string()))
        .map_err(usage)?
        .ok_or_else(|| usage("--group is required"))?;
    let mode = cfg
        .merge(flags.mode, "mode", |s| Ok(s.to_string()))
        .map_err(usage)?
        .ok_or_else(|| usage("--mode is required (halfspace | starshaped)"))?;
    let n = cfg
        .merge(flags.n, "n", |s| Ok(s.to_string()))
        .map_err(usage)?
        .ok_or_else(|| usage("--n is required"))?;
    let n = parse_vector(&n).map_err(usage)?;
    let d = cfg
        .merge(flags.d, "d", parse_f64)
        .map_err(usage)?
        .unwrap_or(0.0);
    let p = cfg
        .merge(flags.p, "p", parse_f64)
        .map_err(usage)?
        .ok_or_else(|| usage("--p is required"))?;
    if !(p > 1.0) {
        return Err(usage("p must exceed 1"));
    }
    let gamma_raw = cfg
        .merge(flags.gamma, "gamma", |s| Ok(s.to_string()))
        .map_err(usage)?
        .unwrap_or_else(|| "optimal".to_string());
    let gamma = if gamma_raw.eq_ignore_ascii_case("optimal") {
        GammaChoice::Optimal
    } else {
        GammaChoice::Fixed(parse_f64(&gamma_raw).map_err(usage)?)
    };
    let order = cfg
        .merge(flags.quad_order, "quad-order", parse_usize)
        .map_err(usage)?
        .unwrap_or(default_rule.order);
    let subdiv = cfg
        .merge(flags.quad_subdiv, "quad-subdiv", parse_usize)
        .map_err(usage)?
        .unwrap_or(default_rule.subdivisions);
    let rule = QuadratureRule::new(order, subdiv).map_err(|e| usage(e.to_string()))?;
    let seed = cfg
        .merge(flags.seed, "seed", parse_u64)
        .map_err(usage)?
        .unwrap_or(0);
    let out = match flags.out {
        Some(path) => Some(path),
        None => cfg.get("out").map(PathBuf::from),
    };

    let (frame, descriptor) = match builtin(&group) {
        Some(pair) => pair,
        None => {
            let path = PathBuf::from(&group);
            if !path.exists() {
                return Err(usage(format!(
                    "unknown group `{group}` (not a built-in name or a readable frame file)"
                )));
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|e| usage(format!("cannot read frame file: {e}")))?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().to_string())
                .unwrap_or_else(|| "custom".to_string());
            (
                parse_frame_file(&name, &text).map_err(|e| usage(e.to_string()))?,
                None,
            )
        }
    };

    let n_rat: Vec<_> = n.iter().map(|&v| rat_from_f64(v)).collect();
    let normal = match mode.as_str() {
        "halfspace" => NormalSpec::half_space(n_rat, rat_from_f64(d)),
        "starshaped" => NormalSpec::starshaped(n_rat),
        other => return Err(usage(format!("unknown mode `{other}`"))),
    }
    .map_err(|e| usage(e.to_string()))?;

    let spec =
        HardySpec::new(frame, descriptor, normal, p, gamma).map_err(|e| usage(e.to_string()))?;
    Ok(ResolvedSpec {
        spec,
        rule,
        seed,
        out,
    })
}

fn bump_kind_from(
    kind: Option<String>,
    m: Option<u32>,
    cfg: &ConfigFile,
) -> Result<BumpKind, Failure> {
    let kind_name = match kind {
        Some(k) => k,
        None => cfg.get("bump-kind").unwrap_or("smooth").to_string(),
    };
    match kind_name.as_str() {
        "smooth" => Ok(BumpKind::Smooth),
        "poly" => {
            let m = match m {
                Some(m) => m,
                None => match cfg.get("bump-m") {
                    Some(raw) => parse_u32(raw).map_err(usage)?,
                    None => 3,
                },
            };
            Ok(BumpKind::Poly { m })
        }
        other => Err(usage(format!("unknown bump kind `{other}`"))),
    }
}

fn core_failure_verify(e: CoreError) -> Failure {
    let code = match e {
        CoreError::Inadmissible => 2,
        // "optimal" gamma with a surviving L_p term is a config-semantics
        // problem: sweep gamma explicitly instead
        CoreError::SurvivingLpTerm => EXIT_USAGE,
        _ => 1,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let cfg = match &args.spec.config {
        Some(path) => ConfigFile::load(path).map_err(usage)?,
        None => ConfigFile::empty(),
    };
    let bump_flag = cfg
        .merge(args.bump.clone(), "bump", |s| Ok(s.to_string()))
        .map_err(usage)?;
    let sweep = cfg.merge(args.sweep, "sweep", parse_usize).map_err(usage)?;
    let kind = bump_kind_from(args.bump_kind.clone(), args.bump_m, &cfg)?;
    let resolved = resolve_spec(args.spec, QuadratureRule::default())?;

    let gamma = resolved.spec.resolve_gamma().map_err(core_failure_verify)?;

    let (bumps, single) = match (bump_flag, sweep) {
        (Some(bump_str), None) => {
            let (center, radii) = parse_bump(&bump_str).map_err(usage)?;
            if center.len() != resolved.spec.dim() {
                return Err(usage(format!(
                    "bump has dimension {}, the group needs {}",
                    center.len(),
                    resolved.spec.dim()
                )));
            }
            let f = TestFunction::new(kind, center, radii).map_err(|e| usage(e.to_string()))?;
            (vec![f], true)
        }
        (None, Some(count)) => {
            let bumps = seeded_bumps(&resolved.spec, kind, count, resolved.seed)
                .map_err(core_failure_verify)?;
            (bumps, false)
        }
        (Some(_), Some(_)) => return Err(usage("--bump and --sweep are mutually exclusive")),
        (None, None) => return Err(usage("one of --bump or --sweep is required")),
    };

    let mut reports: Vec<HardyReport> = Vec::with_capacity(bumps.len());
    for f in &bumps {
        let batch = deficit_sweep(&resolved.spec, f, &resolved.rule, &[gamma])
            .map_err(core_failure_verify)?;
        reports.extend(batch);
    }

    let mut all_ok = true;
    for r in &reports {
        let tolerance = 10.0 * r.quad_error;
        let ok = r.deficit >= -tolerance;
        all_ok &= ok;
        println!(
            "deficit {:+.6e} (lhs {:.6e}, rhs {:.6e}, tolerance {:.1e}) {}",
            r.deficit,
            r.lhs,
            r.rhs_gradient_term + r.rhs_lp_term,
            tolerance,
            if ok { "OK" } else { "NEGATIVE" }
        );
    }

    let json = if single {
        serde_json::to_string_pretty(&reports[0]).expect("serializable")
    } else {
        serde_json::to_string_pretty(&reports).expect("serializable")
    } + "\n";
    match &resolved.out {
        Some(path) => std::fs::write(path, json).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write report: {e}"),
        })?,
        None => print!("{json}"),
    }
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_starshaped(args: StarshapedArgs) -> CmdResult {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path).map_err(usage)?,
        None => ConfigFile::empty(),
    };
    let group = cfg
        .merge(args.group, "group", |s| Ok(s.to_string()))
        .map_err(usage)?
        .ok_or_else(|| usage("--group is required"))?;
    let levelset_src = cfg
        .merge(args.levelset, "levelset", |s| Ok(s.to_string()))
        .map_err(usage)?
        .ok_or_else(|| usage("--levelset is required"))?;
    let rays = cfg
        .merge(args.rays, "rays", parse_usize)
        .map_err(usage)?
        .unwrap_or(512);
    let seed = cfg
        .merge(args.seed, "seed", parse_u64)
        .map_err(usage)?
        .unwrap_or(0);

    let Some((frame, Some(descriptor))) = builtin(&group) else {
        return Err(usage(format!(
            "group `{group}` has no dilation weights; use heisenberg1 or engel"
        )));
    };
    let coords = VarSet::coords(frame.dim());
    let levelset = parse_poly(&coords, &levelset_src).map_err(|e| usage(e.to_string()))?;

    match starshaped_check(&descriptor, &levelset, rays, seed) {
        Ok(Starshaped::StrictlyStarshaped) => {
            println!("strictly_starshaped");
            Ok(0)
        }
        Ok(Starshaped::Starshaped) => {
            println!("starshaped");
            Ok(0)
        }
        Ok(Starshaped::Violated { point, value }) => {
            let coords: Vec<String> = point.iter().map(|v| format!("{v:.9}")).collect();
            println!("violated at ({}) with <Z,n> = {value:.9e}", coords.join(", "));
            Ok(3)
        }
        Err(CoreError::DegenerateBoundary { point }) => Err(Failure {
            code: 4,
            message: format!("degenerate boundary (vanishing gradient) near {point:?}"),
        }),
        Err(e) => Err(Failure {
            code: 1,
            message: e.to_string(),
        }),
    }
}

fn cmd_rayleigh(args: RayleighArgs) -> CmdResult {
    let cfg = match &args.spec.config {
        Some(path) => ConfigFile::load(path).map_err(usage)?,
        None => ConfigFile::empty(),
    };
    let family_name = cfg
        .merge(args.family.clone(), "family", |s| Ok(s.to_string()))
        .map_err(usage)?;
    let bump_init = cfg
        .merge(args.bump.clone(), "bump", |s| Ok(s.to_string()))
        .map_err(usage)?;
    let max_iter = cfg
        .merge(args.max_iter, "max-iter", parse_usize)
        .map_err(usage)?
        .unwrap_or(500);
    let tol = cfg
        .merge(args.tol, "tol", parse_f64)
        .map_err(usage)?
        .unwrap_or(1e-6);
    // the probe partitions its own support; one log-scaled box per segment
    let resolved = resolve_spec(
        args.spec,
        QuadratureRule {
            order: 16,
            subdivisions: 1,
        },
    )?;
    let spec = &resolved.spec;

    // the quotient is measured against the gradient weight alone
    match spec.lp_term_vanishes() {
        Ok(true) => {}
        Ok(false) => {
            return Err(Failure {
                code: 5,
                message: CoreError::SurvivingLpTerm.to_string(),
            })
        }
        Err(e) => {
            return Err(Failure {
                code: 1,
                message: e.to_string(),
            })
        }
    }

    // normal pointing along one coordinate?
    let zero = rat_from_f64(0.0);
    let nonzero: Vec<usize> = spec
        .normal
        .n
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != zero)
        .map(|(i, _)| i)
        .collect();
    let axis = (nonzero.len() == 1).then(|| nonzero[0]);

    let family_name = family_name.unwrap_or_else(|| {
        if axis.is_some() && matches!(spec.normal.mode, Mode::HalfSpace { .. }) {
            "logwindow".to_string()
        } else {
            "single".to_string()
        }
    });

    let family: Box<dyn BumpFamily> = match family_name.as_str() {
        "logwindow" => {
            let Some(axis) = axis else {
                return Err(usage(
                    "logwindow family needs a normal pointing along one coordinate",
                ));
            };
            Box::new(LogWindowFamily::for_axis(spec.dim(), axis, spec.p))
        }
        "single" => {
            let (center, radii) = match bump_init {
                Some(src) => parse_bump(&src).map_err(usage)?,
                None => return Err(usage("single family needs --bump as a starting point")),
            };
            Box::new(SingleBumpFamily {
                kind: BumpKind::Smooth,
                center,
                radii,
            })
        }
        other => return Err(usage(format!("unknown family `{other}`"))),
    };

    let opts = NelderMeadOptions {
        max_iter,
        tol,
        ..NelderMeadOptions::default()
    };
    let result =
        minimize_quotient(spec, family.as_ref(), &resolved.rule, &opts).map_err(|e| Failure {
            code: if matches!(e, CoreError::SurvivingLpTerm) {
                5
            } else {
                1
            },
            message: e.to_string(),
        })?;

    let gamma_star = optimal_gamma(spec.p).expect("p > 1 checked");
    let (constant, _) = gamma_coefficients(gamma_star, spec.p).expect("p > 1 checked");
    println!(
        "constant {:.12}, best quotient {:.12}, gap {:+.6e} ({} iterations, converged: {})",
        constant,
        result.quotient,
        result.quotient - constant,
        result.iterations,
        result.converged
    );

    if let Some(path) = &resolved.out {
        let mut csv = String::from("iteration,quotient\n");
        for (i, q) in result.trace.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", i + 1, q));
        }
        std::fs::write(path, csv).map_err(|e| Failure {
            code: 1,
            message: format!("cannot write trace: {e}"),
        })?;
    }
    Ok(0)
}
