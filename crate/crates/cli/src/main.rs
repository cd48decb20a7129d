//! Command-line front end: solve scenario VI instances, certify their
//! solution sets, validate certificates against fresh draws, tabulate
//! violation levels, and generate/report on the built-in instance families.
//!
//! Exit codes: 0 success, 1 contract or parse error, 2 numerical failure.

mod args;

use std::path::{Path, PathBuf};

use args::Args;
use serde::Serialize;
use vicert_core::cert::instance_hash;
use vicert_core::pev::{
    aggregate_report, build_game, desk_instance, load_demand_profiles, sample_delta,
    DemandProfile, PevConfig,
};
use vicert_core::scenario::cloud_survival;
use vicert_core::{
    certify, estimate_violation_repeated, solution_cloud, triangle, AffineMapping,
    CertificateMode, CloudConfig, EpsilonSchedule, Error, ExperimentSpec, ExtragradientConfig,
    Multisample, Result, ScenarioProgram, SolutionCloud, ViProblem,
};

const USAGE: &str = "\
vicert: scenario-based variational inequalities with probabilistic
feasibility certificates for the entire solution set.

USAGE: vicert <command> [flags]

COMMANDS
  solve          multi-start solve of a VI problem file into a solution cloud
                   --problem FILE --seed S [--restarts N] [--step X] [--tol X]
                   [--max-iter N] [--dedupe R] [--format json|csv] [--out PATH]
  certify        a-posteriori feasibility certificate for an instance
                   --family triangle|pev [instance flags] (--samples FILE | --draw K)
                   --beta B [--mode split|wj] --seed S [--out PATH]
  violation      certify, build the cloud, and validate against fresh draws
                   certify flags plus --fresh M [--repetitions R] [--restarts N]
  epsilon-table  tabulate the violation level over h = 0..K
                   --K N --beta B [--mode split|wj] [--format csv|json] [--out PATH]
  pev-gen        generate a charging-coordination instance and write its files
                   (--config FILE | --desk --n N --t T --load F) --seed S
                   [--profile FILE] [--draw K] [--out DIR]
  report         aggregate-demand report of a cloud over a PEV instance
                   --cloud FILE (--config FILE | --desk ...) [--profile FILE]
                   [--out PATH] [--svg PATH]
                 or the multi-K certification experiment:
                   --sweep --k-list 10,20,40 --beta B [--mode split|wj]
                   [--repetitions R] [--fresh M] [--restarts N] --seed S
                   [instance flags] [--out DIR]

INSTANCE FLAGS (pev family)
  --config FILE      PEV config JSON (all simulation parameters), or
  --desk             calibrated desk instance: --n N --t T [--load F]
  --profile FILE     demand profiles CSV (one profile per row, T columns);
                     defaults to a synthetic daily curve

The default output directory is $VICERT_OUT_DIR, falling back to the
current directory. All randomness sits behind the --seed flag; identical
seeds reproduce byte-identical outputs.
";

fn main() {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(dispatch(&argv));
}

fn dispatch(argv: &[String]) -> i32 {
    let Some(cmd) = argv.first() else {
        eprint!("{USAGE}");
        return 1;
    };
    let rest = &argv[1..];
    let run = match cmd.as_str() {
        "solve" => cmd_solve(rest),
        "certify" => cmd_certify(rest),
        "violation" => cmd_violation(rest),
        "epsilon-table" => cmd_epsilon_table(rest),
        "pev-gen" => cmd_pev_gen(rest),
        "report" => cmd_report(rest),
        "--help" | "-h" | "help" => {
            print!("{USAGE}");
            return 0;
        }
        other => {
            eprintln!("unknown command {other:?}\n");
            eprint!("{USAGE}");
            return 1;
        }
    };
    match run {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// shared pieces

fn out_dir() -> PathBuf {
    std::env::var_os("VICERT_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Resolve an output path against the default output directory.
fn resolve_out(path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        out_dir().join(p)
    }
}

fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {path}: {e}")))
}

fn write_or_print(out: Option<&str>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            let path = resolve_out(path);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn solver_config(a: &Args) -> Result<ExtragradientConfig> {
    Ok(ExtragradientConfig {
        step: a.parse_f64("step")?,
        tol: a.parse_f64("tol")?.unwrap_or(1e-6),
        max_iter: a.parse_usize("max-iter")?,
    })
}

fn cloud_config(a: &Args, default_restarts: usize) -> Result<CloudConfig> {
    Ok(CloudConfig {
        restarts: a.parse_usize("restarts")?.unwrap_or(default_restarts),
        dedupe_radius: a.parse_f64("dedupe")?.unwrap_or(1e-4),
        solver: solver_config(a)?,
    })
}

fn mode_flag(a: &Args) -> Result<CertificateMode> {
    match a.get("mode").unwrap_or("split") {
        "split" => Ok(CertificateMode::Split),
        "wj" | "wait-and-judge" => Ok(CertificateMode::WaitAndJudge),
        other => Err(Error::InvalidArgument(format!(
            "--mode must be split or wj, got {other:?}"
        ))),
    }
}

struct Instance {
    program: ScenarioProgram,
    mapping: AffineMapping,
    pev: Option<(PevConfig, DemandProfile)>,
}

fn load_pev_parts(a: &Args) -> Result<(PevConfig, DemandProfile)> {
    if a.has_switch("desk") {
        let n = a.parse_usize("n")?.unwrap_or(5);
        let t = a.parse_usize("t")?.unwrap_or(8);
        let load = a.parse_f64("load")?.unwrap_or(0.85);
        let seed = a.parse_u64("seed")?.unwrap_or(0);
        return desk_instance(n, t, seed, load);
    }
    let cfg_path = a.require("config")?;
    let cfg = PevConfig::from_json(&read_file(cfg_path)?)?;
    let profile = match a.get("profile") {
        Some(p) => load_demand_profiles(Path::new(p), cfg.horizon)?,
        None => DemandProfile::synthetic_daily(cfg.horizon, 0.25 * cfg.n_vehicles as f64),
    };
    Ok((cfg, profile))
}

fn load_instance(a: &Args) -> Result<Instance> {
    match a.get("family").unwrap_or("pev") {
        "triangle" => Ok(Instance {
            program: triangle::program()?,
            mapping: triangle::mapping(),
            pev: None,
        }),
        "pev" => {
            let (cfg, profile) = load_pev_parts(a)?;
            let (program, mapping) = build_game(&cfg, &profile)?;
            Ok(Instance {
                program,
                mapping,
                pev: Some((cfg, profile)),
            })
        }
        other => Err(Error::InvalidArgument(format!(
            "--family must be triangle or pev, got {other:?}"
        ))),
    }
}

/// Multisample from --samples FILE or --draw K.
fn load_multisample(a: &Args, inst: &Instance, seed: u64) -> Result<Multisample> {
    if let Some(path) = a.get("samples") {
        return Multisample::from_csv(&read_file(path)?, seed);
    }
    let k = a.require_usize("draw")?;
    match &inst.pev {
        Some((cfg, profile)) => sample_delta(cfg, profile, k, seed),
        None => {
            // the triangle family has no distribution; its K <= 3 demo
            // halfspaces are built in
            if k > 3 {
                return Err(Error::InvalidArgument(
                    "the triangle family has exactly 3 built-in samples".into(),
                ));
            }
            triangle::multisample(k)
        }
    }
}

#[derive(Serialize)]
struct CloudHeader<'a> {
    problem_hash: &'a str,
    dedupe_radius: f64,
    points: usize,
    restarts: usize,
    seed: u64,
    tol: f64,
    tool_version: &'a str,
}

// ---------------------------------------------------------------------------
// commands

fn cmd_solve(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &[])?;
    let problem_path = a.require("problem")?;
    let seed = a.require_u64("seed")?;
    let problem: ViProblem = serde_json::from_str(&read_file(problem_path)?)?;
    let cfg = cloud_config(&a, 100)?;
    let cloud = solution_cloud(&problem, cfg.restarts, seed, &cfg)?;
    let header = CloudHeader {
        problem_hash: cloud.problem_hash(),
        dedupe_radius: cloud.dedupe_radius(),
        points: cloud.len(),
        restarts: cfg.restarts,
        seed,
        tol: cfg.solver.tol,
        tool_version: env!("CARGO_PKG_VERSION"),
    };
    match a.get("format").unwrap_or("json") {
        "json" => {
            let combined = serde_json::json!({
                "header": header,
                "points": cloud.points(),
            });
            write_or_print(a.get("out"), &format!("{combined:#}\n"))?;
        }
        "csv" => {
            // CSV points next to a JSON header file
            match a.get("out") {
                Some(base) => {
                    write_or_print(Some(&format!("{base}.csv")), &cloud.to_csv())?;
                    write_or_print(
                        Some(&format!("{base}.json")),
                        &format!("{}\n", serde_json::to_string_pretty(&header)?),
                    )?;
                }
                None => {
                    println!("{}", serde_json::to_string(&header)?);
                    print!("{}", cloud.to_csv());
                }
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "--format must be json or csv, got {other:?}"
            )))
        }
    }
    Ok(())
}

fn cmd_certify(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &["desk"])?;
    let inst = load_instance(&a)?;
    let seed = if a.get("samples").is_some() {
        a.parse_u64("seed")?.unwrap_or(0)
    } else {
        a.require_u64("seed")?
    };
    let ms = load_multisample(&a, &inst, seed)?;
    let beta = a.require_f64("beta")?;
    let mode = mode_flag(&a)?;
    let cfg = solver_config(&a)?;
    let cert = certify(&inst.program, &ms, &inst.mapping, beta, mode, &cfg)?;
    write_or_print(a.get("out"), &format!("{}\n", cert.to_json()?))?;
    Ok(())
}

#[derive(Serialize)]
struct ViolationOutput {
    certificate: vicert_core::Certificate,
    cloud_points: usize,
    report: vicert_core::ViolationReport,
    shrink_of_base_cloud: f64,
}

fn cmd_violation(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &["desk"])?;
    let inst = load_instance(&a)?;
    let seed = a.require_u64("seed")?;
    let ms = load_multisample(&a, &inst, seed)?;
    let beta = a.require_f64("beta")?;
    let mode = mode_flag(&a)?;
    let fresh = a.require_usize("fresh")?;
    let repetitions = a.parse_usize("repetitions")?.unwrap_or(1);
    let cloud_cfg = cloud_config(&a, 50)?;

    let count = vicert_core::support_cardinality(
        &inst.program,
        &ms,
        &inst.mapping,
        &cloud_cfg.solver,
    )?;
    let cert = vicert_core::cert::certificate_from_count(
        &inst.program,
        &ms,
        &inst.mapping,
        beta,
        mode,
        count.s,
    )?;
    let problem = ViProblem::new(inst.mapping.clone(), count.active.reduced().clone())?;
    let cloud = solution_cloud(
        &problem,
        cloud_cfg.restarts,
        vicert_core::rng::derive(seed, "cloud", ms.len() as u64),
        &cloud_cfg,
    )?
    .merged_with(count.facet_solutions.iter().map(|(_, p)| p.clone()));
    let report = estimate_violation_repeated(
        &cloud,
        &inst.program,
        fresh,
        repetitions,
        vicert_core::rng::derive(seed, "fresh", ms.len() as u64),
        Some(cert.epsilon),
    )?;
    let base_reduced = vicert_core::minimal_representation(inst.program.base())?.0;
    let base_problem = ViProblem::new(inst.mapping.clone(), base_reduced)?;
    let base_cloud = solution_cloud(
        &base_problem,
        cloud_cfg.restarts,
        vicert_core::rng::derive(seed, "cloud", 0),
        &cloud_cfg,
    )?;
    let shrink = cloud_survival(&base_cloud, &inst.program, &ms)?;
    let out = ViolationOutput {
        certificate: cert,
        cloud_points: cloud.len(),
        report,
        shrink_of_base_cloud: shrink,
    };
    write_or_print(
        a.get("out"),
        &format!("{}\n", serde_json::to_string_pretty(&out)?),
    )?;
    Ok(())
}

fn cmd_epsilon_table(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &[])?;
    let k = a.require_usize("K")?;
    let beta = a.require_f64("beta")?;
    let mode = mode_flag(&a)?;
    let schedule = match mode {
        CertificateMode::Split => EpsilonSchedule::split(k, beta)?,
        CertificateMode::WaitAndJudge => EpsilonSchedule::wait_and_judge(k, beta)?,
    };
    let content = match a.get("format").unwrap_or("csv") {
        "csv" => {
            let mut s = String::from("h,epsilon\n");
            for h in 0..=k {
                s.push_str(&format!("{h},{}\n", schedule.epsilon(h)));
            }
            s
        }
        "json" => format!("{}\n", serde_json::to_string_pretty(schedule.values())?),
        other => {
            return Err(Error::InvalidArgument(format!(
                "--format must be csv or json, got {other:?}"
            )))
        }
    };
    write_or_print(a.get("out"), &content)?;
    Ok(())
}

fn cmd_pev_gen(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &["desk"])?;
    let (cfg, profile) = load_pev_parts(&a)?;
    let seed = a.require_u64("seed")?;
    let (program, mapping) = build_game(&cfg, &profile)?;
    let k = a.parse_usize("draw")?.unwrap_or(0);
    let ms = sample_delta(&cfg, &profile, k, seed)?;
    let assembled = program.assemble(&ms)?;
    let problem = ViProblem::new(mapping.clone(), assembled)?;

    let dir = resolve_out(a.get("out").unwrap_or("pev-instance"));
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("config.json"), format!("{}\n", cfg.to_json()?))?;
    let profile_csv = profile
        .d_nom
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",");
    std::fs::write(dir.join("profile.csv"), format!("{profile_csv}\n"))?;
    std::fs::write(dir.join("samples.csv"), ms.to_csv())?;
    std::fs::write(
        dir.join("problem.json"),
        format!("{}\n", serde_json::to_string_pretty(&problem)?),
    )?;
    let meta = serde_json::json!({
        "instance_hash": instance_hash(&program, &ms, &mapping),
        "K": k,
        "seed": seed,
        "rows": problem.feasible().n_rows(),
        "dim": problem.dim(),
        "tool_version": env!("CARGO_PKG_VERSION"),
    });
    std::fs::write(dir.join("meta.json"), format!("{meta:#}\n"))?;
    eprintln!("wrote instance files under {}", dir.display());
    Ok(())
}

fn cmd_report(raw: &[String]) -> Result<()> {
    let a = Args::parse(raw, &["desk", "sweep"])?;
    if a.has_switch("sweep") {
        return cmd_report_sweep(&a);
    }
    let (cfg, profile) = load_pev_parts(&a)?;
    let cloud_path = a.require("cloud")?;
    let cloud = SolutionCloud::from_csv(
        &read_file(cloud_path)?,
        a.parse_f64("dedupe")?.unwrap_or(1e-4),
        String::new(),
    )?;
    let rep = aggregate_report(&cloud, &cfg, &profile)?;
    write_or_print(a.get("out"), &rep.to_csv())?;
    if let Some(svg) = a.get("svg") {
        write_or_print(Some(svg), &rep.to_svg())?;
    }
    Ok(())
}

fn cmd_report_sweep(a: &Args) -> Result<()> {
    let inst = load_instance(a)?;
    let seed = a.require_u64("seed")?;
    let k_list = a
        .usize_list("k-list")?
        .ok_or_else(|| Error::InvalidArgument("missing required flag --k-list".into()))?;
    let beta = a.require_f64("beta")?;
    let spec = ExperimentSpec {
        program: &inst.program,
        mapping: &inst.mapping,
        k_list: &k_list,
        beta,
        mode: mode_flag(a)?,
        repetitions: a.parse_usize("repetitions")?.unwrap_or(5),
        fresh: a.parse_usize("fresh")?.unwrap_or(2000),
        seed,
        cloud: cloud_config(a, 50)?,
    };
    let dir = resolve_out(a.get("out").unwrap_or("sweep"));
    let outcome = vicert_core::run_certification_sweep(&spec, &dir)?;
    for (k, msg) in &outcome.diagnostics {
        eprintln!("K={k}: row aborted: {msg}");
    }
    eprintln!(
        "wrote {} files under {}",
        outcome.files.len(),
        dir.display()
    );
    Ok(())
}
