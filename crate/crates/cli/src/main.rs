//! Experiment driver for the two counterexample constructions: builds the
//! objects, runs the dynamics, verifies the claimed bounds, and writes
//! CSV/JSON data plus SVG figures.
//!
//! Everything is deterministic: identical invocations produce byte-identical
//! outputs (low-discrepancy sampling everywhere, no RNG). The exit code is 0
//! exactly when every enabled claim passes; two claims reproduce known
//! defects of the claimed constants and are reported honestly (see the
//! notes fields in claims.json).

mod svg;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sgcx::circle::{kl_margin, lemma_estimates, CircleObjective, CircleSequence, KlSampleSpec};
use sgcx::fractal::{
    box_dimension, build_gamma, export_csv, holder_check, Digit9, FractalConfig,
};
use sgcx::loops::{
    build_loop, essacc_vs_acc, j_transits, run_loop, verify_claims, LoopObjective,
    LoopRunConfig,
};
use sgcx::measures::{arc_mass_limit, arc_mass_ratio, LimitMeasure};
use sgcx::series::LogIndex;
use sgcx::Vec2;

#[derive(Parser)]
#[command(name = "sgcx", about = "subgradient counterexample experiments")]
struct Cli {
    /// JSON config file; command-line flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    depth: Option<u32>,
    #[arg(long, global = true)]
    i0: Option<u64>,
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    #[arg(long, global = true)]
    levels: Option<u32>,
    /// output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// write SVG figures
    #[arg(long, global = true, overrides_with = "no_svg")]
    svg: bool,
    #[arg(long, global = true)]
    no_svg: bool,
    /// scales every tolerance (values above 1 loosen the checks)
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// run the circle construction and verify its bounds
    CircleRun,
    /// limiting-density comparison for the circle dynamics
    Density,
    /// build the fractal curve, fit its box dimension, check the staircase
    Fractal,
    /// run the constrained loop dynamics and verify the claims
    LoopRun,
    /// run every experiment with its defaults
    VerifyAll,
}

/// Configuration shared by the subcommands (JSON-mirrorable; flags override).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
struct ExperimentConfig {
    example: String,
    alpha: f64,
    depth: u32,
    i0: u64,
    max_steps: u64,
    levels: u32,
    out: PathBuf,
    svg: bool,
    tolerance_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            example: "circle".into(),
            alpha: 0.26,
            depth: 8,
            i0: 0, // 0 = per-command default
            max_steps: 0,
            levels: 2,
            out: PathBuf::from("out"),
            svg: true,
            tolerance_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Claim {
    claim_id: String,
    status: String,
    measured: f64,
    bound: f64,
    tolerance: f64,
    notes: String,
}

impl Claim {
    fn le(id: &str, measured: f64, bound: f64, tol_scale: f64, notes: &str) -> Claim {
        let bound = bound * tol_scale;
        Claim {
            claim_id: id.into(),
            status: if measured <= bound { "pass" } else { "fail" }.into(),
            measured,
            bound,
            tolerance: tol_scale,
            notes: notes.into(),
        }
    }

    fn ge(id: &str, measured: f64, bound: f64, tol_scale: f64, notes: &str) -> Claim {
        let bound = bound / tol_scale;
        Claim {
            claim_id: id.into(),
            status: if measured >= bound { "pass" } else { "fail" }.into(),
            measured,
            bound,
            tolerance: tol_scale,
            notes: notes.into(),
        }
    }

    fn passed(&self) -> bool {
        self.status == "pass"
    }
}

fn write_claims(dir: &Path, claims: &[Claim]) -> std::io::Result<()> {
    let json = serde_json::to_string_pretty(claims).expect("claims serialize");
    std::fs::write(dir.join("claims.json"), json + "\n")
}

fn print_claims(claims: &[Claim]) {
    for c in claims {
        println!(
            "[{}] {}: measured {:.6e} vs bound {:.6e} ({})",
            if c.passed() { "PASS" } else { "FAIL" },
            c.claim_id,
            c.measured,
            c.bound,
            c.notes
        );
    }
}

fn main() {
    let cli = Cli::parse();
    let mut cfg = cli
        .config
        .as_ref()
        .map(|p| {
            let text = std::fs::read_to_string(p).expect("read config file");
            serde_json::from_str::<ExperimentConfig>(&text).expect("parse config file")
        })
        .unwrap_or_default();
    if let Some(v) = cli.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = cli.depth {
        cfg.depth = v;
    }
    if let Some(v) = cli.i0 {
        cfg.i0 = v;
    }
    if let Some(v) = cli.max_steps {
        cfg.max_steps = v;
    }
    if let Some(v) = cli.levels {
        cfg.levels = v;
    }
    if let Some(v) = cli.out {
        cfg.out = v;
    }
    if cli.no_svg {
        cfg.svg = false;
    } else if cli.svg {
        cfg.svg = true;
    }
    if let Some(v) = cli.tolerance_scale {
        cfg.tolerance_scale = v;
    }

    let result = match cli.command {
        Command::CircleRun => cmd_circle_run(&cfg),
        Command::Density => cmd_density(&cfg),
        Command::Fractal => cmd_fractal(&cfg),
        Command::LoopRun => cmd_loop_run(&cfg),
        Command::VerifyAll => cmd_verify_all(&cfg),
    };
    match result {
        Ok(all_pass) => std::process::exit(if all_pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}

fn ensure_dirs(cfg: &ExperimentConfig) -> std::io::Result<PathBuf> {
    let dir = cfg.out.clone();
    std::fs::create_dir_all(dir.join("figures"))?;
    Ok(dir)
}

fn cmd_circle_run(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let dir = ensure_dirs(cfg)?;
    let tol = cfg.tolerance_scale;
    let i0 = if cfg.i0 == 0 { 1000 } else { cfg.i0 };
    let steps = if cfg.max_steps == 0 { 100_000 } else { cfg.max_steps };
    let obj = CircleObjective::new(i0, i0 + steps + 1)?;
    let mut seq = CircleSequence::new(i0)?;

    let mut trace = String::from("i,x,y,eps,vx,vy,theta,residual\n");
    let mut max_residual = 0.0f64;
    let mut eps_lower_ok = true;
    let mut eps_upper_violations = 0u64;
    let mut first_upper_violation = 0u64;
    for i in i0..i0 + steps {
        let s = seq.step(i)?;
        let residual = obj.verify_step(&mut seq, i)?;
        max_residual = max_residual.max(residual);
        let fi = i as f64;
        if s.eps <= 2.0 / (fi + 1.0) {
            eps_lower_ok = false;
        }
        if s.eps >= 2.0 / fi {
            if eps_upper_violations == 0 {
                first_upper_violation = i;
            }
            eps_upper_violations += 1;
        }
        // keep the file at a manageable size: every step for the first 1e4,
        // then a thinning stride
        if i - i0 < 10_000 || (i - i0) % 97 == 0 {
            let _ = writeln!(
                trace,
                "{},{:.15},{:.15},{:.15e},{:.15},{:.15},{:.15},{:.3e}",
                i, s.x.x, s.x.y, s.eps, s.v.x, s.v.y, s.theta, residual
            );
        }
    }
    std::fs::write(dir.join("trace.csv"), trace)?;

    // Lemma estimate series over a subsample
    let mut lemma_csv = String::from("i,e3,e3_bound,e4_ratio\n");
    let mut e3_ok = true;
    let mut e4_ok = true;
    let mut i = 1000u64;
    while i <= 1_000_000 {
        let e = lemma_estimates(&mut seq, i, 16)?;
        e3_ok &= e.e3 <= e.e3_bound * tol;
        e4_ok &= e.e4_ratio <= 3.0 * tol;
        let _ = writeln!(lemma_csv, "{},{:.9},{:.9},{:.9}", i, e.e3, e.e3_bound, e.e4_ratio);
        i = (i as f64 * 1.2).ceil() as u64;
    }
    std::fs::write(dir.join("lemma_estimates.csv"), lemma_csv)?;

    let margin = kl_margin(
        &obj,
        KlSampleSpec {
            samples: 100_000,
            ..KlSampleSpec::default()
        },
    )?;

    let claims = vec![
        Claim::le(
            "circle-step-residual",
            max_residual,
            1e-10,
            tol,
            &format!("max over {steps} steps from i0 = {i0}"),
        ),
        Claim::ge(
            "circle-kl-margin",
            margin,
            0.5,
            tol,
            "min |grad f| over 1e5 noncritical low-discrepancy samples",
        ),
        Claim::ge(
            "circle-eps-lower-bracket",
            if eps_lower_ok { 1.0 } else { 0.0 },
            1.0,
            1.0,
            "eps_i > 2/(i+1) for every recorded step",
        ),
        Claim::le(
            "circle-eps-upper-bracket",
            eps_upper_violations as f64,
            0.0,
            1.0,
            &format!(
                "violations of eps_i < 2/i (first at i = {first_upper_violation}); \
                 the claimed bound is analytically false for i >= 283: \
                 eps_i^2 = (1/i + 1/(i+1))^2 + 2(1 - cos dtheta) exceeds (2/i)^2 \
                 once the tangential term outgrows the 4/i^3 slack"
            ),
        ),
        Claim::le(
            "circle-lemma-e3",
            if e3_ok { 0.0 } else { 1.0 },
            0.0,
            1.0,
            "|v_i - (-1)^i x_i/|x_i|| <= 6/ln i over the sampled range",
        ),
        Claim::le(
            "circle-lemma-e4",
            if e4_ok { 0.0 } else { 1.0 },
            0.0,
            1.0,
            "normalization ratio <= 3 at 16 offsets per sampled index",
        ),
    ];
    if cfg.svg {
        let mut fig = svg::Svg::new();
        let circle_pts: Vec<Vec2> = (0..=256)
            .map(|k| Vec2::from_angle(TAU * k as f64 / 256.0))
            .collect();
        fig.polyline(&circle_pts, "#cccccc", 0.004);
        let mut seq2 = CircleSequence::new(i0)?;
        let pts: Vec<Vec2> = (i0..i0 + steps.min(20_000))
            .map(|i| seq2.x(i).unwrap())
            .collect();
        fig.polyline(&pts, "#1f77b4", 0.002);
        std::fs::write(dir.join("figures/circle_trace.svg"), fig.finish())?;
    }
    print_claims(&claims);
    write_claims(&dir, &claims)?;
    Ok(claims.iter().all(Claim::passed))
}

fn cmd_density(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let dir = ensure_dirs(cfg)?;
    let tol = cfg.tolerance_scale;
    let mut csv = String::from("alpha,ratio,limit,rel_err\n");
    let mut max_rel = 0.0f64;
    let grid = [0.1, 0.5, 1.0, PI, TAU];
    for &alpha in &grid {
        // one full visit window ending right at the budget log N = 1e4:
        // the harmonic constant then pollutes the ratio by only ~4e-5
        let m0 = LogIndex::from_log(1.0e4 * (-alpha).exp())?;
        let n = m0.pow_exp(alpha);
        let ratio = arc_mass_ratio(alpha, n, m0)?;
        let limit = arc_mass_limit(alpha);
        let rel = (ratio - limit).abs() / limit;
        max_rel = max_rel.max(rel);
        let _ = writeln!(csv, "{:.6},{:.9},{:.9},{:.3e}", alpha, ratio, limit, rel);
    }
    std::fs::write(dir.join("density.csv"), csv)?;

    // full-circle ratio with several visit windows
    let full = arc_mass_ratio(TAU, LogIndex::from_index(3).pow_exp(3.0 * TAU), LogIndex::from_index(3))?;

    let mut rho_csv = String::from("theta,rho\n");
    let lm = LimitMeasure::new(0.0);
    let mut curve = Vec::new();
    for k in 0..=720 {
        let th = -TAU + TAU * k as f64 / 720.0;
        let rho = lm.density(th);
        let _ = writeln!(rho_csv, "{:.9},{:.9}", th, rho);
        curve.push((th, rho));
    }
    std::fs::write(dir.join("limit_density.csv"), rho_csv)?;
    if cfg.svg {
        let fig = svg::plot_curves(&[("rho".into(), curve)]);
        std::fs::write(dir.join("figures/limit_density.svg"), fig)?;
    }

    let claims = vec![
        Claim::le(
            "density-grid-relative-error",
            max_rel,
            0.02,
            tol,
            "arc visit ratio vs (1-e^-a)/(1-e^-2pi) on the alpha grid",
        ),
        Claim::le(
            "density-full-circle",
            (full - 1.0).abs(),
            1e-6,
            tol,
            "full-circle ratio over three visit windows",
        ),
    ];
    print_claims(&claims);
    write_claims(&dir, &claims)?;
    Ok(claims.iter().all(Claim::passed))
}

fn cmd_fractal(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let dir = ensure_dirs(cfg)?;
    let tol = cfg.tolerance_scale;
    let depth = if cfg.depth == 0 { 8 } else { cfg.depth };
    let fcfg = FractalConfig::new(cfg.alpha, depth)?;
    let curve = build_gamma(&fcfg)?;
    std::fs::write(dir.join("gamma.csv"), export_csv(&curve))?;

    let hi = depth.min(8);
    let fit = box_dimension(&fcfg, 3..=hi)?;
    let expect = (0.25f64).ln() / cfg.alpha.ln();
    let slope_tol = if (cfg.alpha - 1.0 / 3.0).abs() < 1e-9 { 0.05 } else { 0.06 };

    let rep = holder_check(&fcfg, 10_000)?;

    // staircase checks
    let probe_depth = depth + 2;
    let mut monotone = true;
    let mut ts: Vec<f64> = (0..100_000u64).map(sgcx::halton::halton1).collect();
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut prev = -1.0;
    for t in &ts {
        let v = sgcx::fractal::f_on_gamma(&Digit9::from_f64(*t, probe_depth)?);
        if v < prev - 1e-12 {
            monotone = false;
        }
        prev = v;
    }
    let f0 = sgcx::fractal::f_on_gamma(&Digit9::from_f64(0.0, probe_depth)?);
    let f1 = sgcx::fractal::f_on_gamma(&Digit9::from_f64(1.0, probe_depth)?);
    // constancy on connectors: the staircase evaluated anywhere inside a
    // segment's parameter interval must equal the segment's stored value
    let mut max_connector_var = 0.0f64;
    for g in curve.segments.iter().step_by(5) {
        for frac in [0.2, 0.8] {
            let t = g.param_lo + (g.param_hi - g.param_lo) * frac;
            let v = sgcx::fractal::f_on_gamma(&Digit9::from_f64(t, 2 * depth + 4)?);
            max_connector_var = max_connector_var.max((v - g.f_value).abs());
        }
    }

    let mut counts_note = String::new();
    for (k, n) in fit.depths.iter().zip(&fit.counts) {
        let _ = write!(counts_note, "N({k})={n} ");
    }
    let claims = vec![
        Claim::le(
            "fractal-dimension-slope",
            (fit.slope - expect).abs(),
            slope_tol,
            tol,
            &format!(
                "fitted {:.4} vs asymptotic {:.4}; finite-scale length transient \
                 biases the window upward ({counts_note})",
                fit.slope, expect
            ),
        ),
        Claim::ge("fractal-dimension-r2", fit.r_squared, 0.99, tol, "log-log fit"),
        Claim::ge(
            "fractal-staircase-monotone",
            if monotone { 1.0 } else { 0.0 },
            1.0,
            1.0,
            "f along the parameterization over 1e5 ordered samples",
        ),
        Claim::le(
            "fractal-staircase-endpoints",
            (f0 - 0.0).abs().max((f1 - 1.0).abs()),
            1e-12,
            1.0,
            "f(0) = 0 and f(1) = 1",
        ),
        Claim::le(
            "fractal-connector-constancy",
            max_connector_var,
            0.0,
            1.0,
            "per-connector value variance (exact by construction)",
        ),
        Claim::ge(
            "fractal-holder-ratio-finite",
            if rep.max_holder_ratio.is_finite() { 1.0 } else { 0.0 },
            1.0,
            1.0,
            &format!(
                "max Holder ratio {:.4} at exponent {:.4}; max Lipschitz ratio {:.4}",
                rep.max_holder_ratio, rep.exponent, rep.max_lipschitz_ratio
            ),
        ),
    ];
    if cfg.svg {
        // render the first few levels only; deeper detail is below figure
        // resolution and would put nine hundred thousand paths in the file
        let mut fig = svg::Svg::new();
        for g in curve.segments.iter().filter(|g| g.level <= depth.min(5)) {
            let shade = 40 + (160.0 * g.f_value) as u8;
            fig.segments(
                &[g.seg],
                &format!("rgb({},{},{})", shade, 60, 200 - shade.min(160)),
                0.0015,
            );
        }
        std::fs::write(dir.join("figures/gamma.svg"), fig.finish())?;
    }
    print_claims(&claims);
    write_claims(&dir, &claims)?;
    Ok(claims.iter().all(Claim::passed))
}

fn cmd_loop_run(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let dir = ensure_dirs(cfg)?;
    let tol = cfg.tolerance_scale;
    if cfg.levels > 3 {
        return Err("levels above 3 are not materializable".into());
    }
    let run_cfg = LoopRunConfig {
        alpha: cfg.alpha,
        depth: cfg.depth.clamp(3, 4).max(cfg.levels + 1),
        levels: cfg.levels,
        i0: if cfg.i0 == 0 { 150 } else { cfg.i0 },
        max_steps: if cfg.max_steps == 0 { 1_000_000 } else { cfg.max_steps },
        ..LoopRunConfig::default()
    };
    let run = run_loop(run_cfg.clone())?;

    // run header (the Hessian bound per tube is existential in the theory;
    // here it is measured by finite differences and reported)
    let hessian_bounds: Vec<f64> = run
        .loops
        .iter()
        .map(|lp| sgcx::loops::AuxObjective::new(lp, run.lip).measure_hessian_bound(400))
        .collect();
    let header = serde_json::json!({
        "alpha": run.config.alpha,
        "depth": run.config.depth,
        "levels": run.config.levels,
        "i0": run.config.i0,
        "max_steps": run.config.max_steps,
        "lipschitz_constant": run.lip,
        "dwell_policy": {
            "t0_full_traversals": run.config.t0_laps,
            "level1_step_budget_fraction": run.config.level1_budget,
            "note": "levels >= 1 advance on a step budget; a full traversal there needs e^(e^k)-class step counts"
        },
        "determinism": "no RNG anywhere; identical configs give byte-identical outputs",
        "completed_traversals": run.laps,
        "tube_hessian_bounds": hessian_bounds,
    });
    std::fs::write(
        dir.join("run_header.json"),
        serde_json::to_string_pretty(&header)? + "\n",
    )?;

    // trace
    let mut trace =
        String::from("i,x,y,eps,vx,vy,level_j,side,dist_to_Tj,constraint_flags\n");
    for (k, r) in run.steps.iter().enumerate() {
        if k < 20_000 || k % 101 == 0 {
            let _ = writeln!(
                trace,
                "{},{:.15},{:.15},{:.6e},{:.9},{:.9},{},{},{:.6e},{:#04x}",
                r.i, r.x.x, r.x.y, r.eps, r.v.x, r.v.y, r.level, r.side, r.dist, r.flags
            );
        }
    }
    std::fs::write(dir.join("trace.csv"), trace)?;

    // step identity through the modified objective on a subsample per level
    let mut max_identity = 0.0f64;
    for level in 0..=run.config.levels {
        if !run.steps.iter().any(|r| r.level == level) {
            continue;
        }
        let obj = LoopObjective::from_run(&run, level)?;
        let level_steps: Vec<usize> = run
            .steps
            .iter()
            .enumerate()
            .filter(|(_, r)| r.level == level)
            .map(|(k, _)| k)
            .collect();
        for &k in level_steps.iter().step_by(37.max(level_steps.len() / 2000)) {
            if k + 1 >= run.steps.len() {
                continue;
            }
            let (a, b) = (&run.steps[k], &run.steps[k + 1]);
            if b.i != a.i + 1 {
                continue;
            }
            let g = obj.grad(a.x)?;
            max_identity = max_identity.max((b.x - (a.x - g * a.eps)).norm());
        }
    }

    let all_flags = run.steps.iter().all(|r| r.flags == 0x7f);
    let outcomes = verify_claims(&run)?;
    let ess = essacc_vs_acc(&run)?;
    let transits = j_transits(&run);

    let mut claims = vec![
        Claim::ge(
            "loop-s-constraints",
            if all_flags { 1.0 } else { 0.0 },
            1.0,
            1.0,
            &format!("S1-S7 verified literally on every of the {} steps", run.steps.len()),
        ),
        Claim::le(
            "loop-step-identity",
            max_identity,
            1e-10,
            tol,
            "max |x_{i+1} - (x_i - eps grad f(x_i))| over sampled steps",
        ),
    ];
    for o in &outcomes {
        claims.push(Claim {
            claim_id: format!("loop-{}", o.id),
            status: if o.pass { "pass" } else { "fail" }.into(),
            measured: o.measured,
            bound: o.bound,
            tolerance: tol,
            notes: format!("{} ({} J-transits)", o.notes, transits.len()),
        });
    }
    claims.push(Claim::ge(
        "loop-essacc-j-decay",
        if ess.j_decreasing { 1.0 } else { 0.0 },
        1.0,
        1.0,
        &format!("J-cell ratios across level checkpoints: {:?}", ess.j_ratios),
    ));
    claims.push(Claim::ge(
        "loop-essacc-gamma-floor",
        ess.gamma_floor,
        1e-4,
        tol,
        &format!("curve-cell ratios: {:?}", ess.gamma_ratios),
    ));

    if cfg.svg {
        let mut fig = svg::Svg::new();
        let fcfg = FractalConfig::new(run.config.alpha, run.config.depth)?;
        for j in 0..=run.config.levels.min(2) {
            let lp = build_loop(&fcfg, j)?;
            let color = ["#bbbbbb", "#7799cc", "#334488"][j as usize % 3];
            fig.segments(&lp.chain.segments, color, 0.002);
        }
        let pts: Vec<Vec2> = run.steps.iter().step_by(199).map(|r| r.x).collect();
        for p in pts {
            fig.circle(p, 0.0012, "#d62728");
        }
        std::fs::write(dir.join("figures/loop_run.svg"), fig.finish())?;
    }
    print_claims(&claims);
    write_claims(&dir, &claims)?;
    Ok(claims.iter().all(Claim::passed))
}

fn cmd_verify_all(cfg: &ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>> {
    let base = cfg.out.clone();
    let mut all = true;
    let mut merged: Vec<serde_json::Value> = Vec::new();
    let runs: [(&str, fn(&ExperimentConfig) -> Result<bool, Box<dyn std::error::Error>>); 4] = [
        ("circle-run", cmd_circle_run),
        ("density", cmd_density),
        ("fractal", cmd_fractal),
        ("loop-run", cmd_loop_run),
    ];
    for (name, f) in runs {
        let mut sub = cfg.clone();
        sub.out = base.join(name);
        if name == "fractal" {
            sub.alpha = 1.0 / 3.0;
        }
        println!("== {name} ==");
        let ok = f(&sub)?;
        all &= ok;
        let claims: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(sub.out.join("claims.json"))?,
        )?;
        merged.push(serde_json::json!({ "command": name, "claims": claims }));
    }
    std::fs::create_dir_all(&base)?;
    std::fs::write(
        base.join("claims.json"),
        serde_json::to_string_pretty(&merged)? + "\n",
    )?;
    Ok(all)
}
