use std::f64::consts::FRAC_PI_2;
use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use lafbf::config::{
    build_orientation, parse_config, resolve_params, BandsArgs, Cli, Command, ValidateArgs,
    VariogramArgs,
};
use lafbf::error::{Error, Result};
use lafbf::grid_io::write_grid;
use lafbf::orientation::OrientationField;
use lafbf::synthesis::{precompute, synthesize_elementary, synthesize_lafbf, FieldGrid};
use lafbf::validation::{
    discrete_variogram, empirical_variogram, estimate_hurst, theoretical_variogram,
};
use lafbf::bands;

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("LAFBF_THREADS") {
        match raw.parse::<usize>() {
            Ok(0) => {} // auto
            Ok(n) => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            Err(_) => {
                eprintln!("error: LAFBF_THREADS must be a non-negative integer, got '{raw}'");
                return ExitCode::from(2);
            }
        }
    }

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help/version are not errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(2);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };

    let result = match cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Bands(args) => run_bands(args),
        Command::Variogram(args) => run_variogram(args),
        Command::Validate(args) => run_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_synth(args: lafbf::config::SynthArgs) -> Result<ExitCode> {
    let cfg = parse_config(&args)?;
    let field = build_orientation(&cfg.orientation_spec)?;
    let out = cfg.out.clone().ok_or_else(|| {
        Error::Config("synth requires --out <path> (or 'out' in the config file)".into())
    })?;

    let t0 = Instant::now();
    let state = precompute(&cfg.params)?;
    let t1 = Instant::now();
    let grid = match &field {
        OrientationField::Constant(a) => synthesize_elementary(&cfg.params, *a, &state),
        other => synthesize_lafbf(&cfg.params, other, &state),
    };
    let t2 = Instant::now();

    write_grid(&grid, &out, cfg.format, cfg.force)?;
    eprintln!(
        "synth: {}x{} seed={} bands={} precompute {:.2}s synthesis {:.2}s -> {}",
        grid.size,
        grid.size,
        cfg.params.seed,
        state.plan.bands.len(),
        (t1 - t0).as_secs_f64(),
        (t2 - t1).as_secs_f64(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_bands(args: BandsArgs) -> Result<ExitCode> {
    let params = resolve_params(&args.params)?;
    let plan = bands::default_plan(params.epsilon, params.grid_order)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "p,q,theta,lambda,cost")?;
    for b in &plan.bands {
        writeln!(w, "{},{},{:.12},{:.12},{}", b.p, b.q, b.theta, b.lambda, b.cost)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_variogram(args: VariogramArgs) -> Result<ExitCode> {
    let params = resolve_params(&args.params)?;
    if args.seeds < 2 {
        return Err(Error::Config("variogram needs --seeds >= 2".into()));
    }
    let r = params.grid_order as f64;
    let alpha0 = args.alpha0;
    let weight = params.weight_params();

    let plan = bands::default_plan(params.epsilon, params.grid_order)?;
    let grids: Result<Vec<FieldGrid>> = (0..args.seeds)
        .map(|s| {
            let mut p = params;
            p.seed = params.seed.wrapping_add(s);
            let state = lafbf::synthesis::precompute_with_plan(&p, plan.clone())?;
            Ok(synthesize_elementary(&p, alpha0, &state))
        })
        .collect();
    let grids = grids?;

    let mut lags = Vec::new();
    for dir in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
        for m in 1..=args.max_lag {
            let lag = (m * dir.0, m * dir.1);
            let len = ((lag.0 * lag.0 + lag.1 * lag.1) as f64).sqrt();
            if len <= args.max_lag as f64 && lag.0.unsigned_abs() < grids[0].size as u64 {
                lags.push(lag);
            }
        }
    }

    let estimates = empirical_variogram(&grids, &lags)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "lag_x,lag_y,empirical,theoretical,std_error,n_pairs")?;
    for e in &estimates {
        let x = (e.lag.0 as f64 / r, e.lag.1 as f64 / r);
        let theory = theoretical_variogram(params.hurst, alpha0, &weight, x);
        writeln!(
            w,
            "{},{},{:.9e},{:.9e},{:.9e},{}",
            e.lag.0, e.lag.1, e.value, theory, e.std_error, e.n_pairs
        )?;
    }
    Ok(ExitCode::SUCCESS)
}

fn run_validate(args: ValidateArgs) -> Result<ExitCode> {
    let params = resolve_params(&args.params)?;
    let mut all_ok = true;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    // Band plan covers the circle.
    let plan = bands::default_plan(params.epsilon, params.grid_order)?;
    let total: f64 = plan.bands.iter().map(|b| b.lambda).sum();
    report(
        "band-plan",
        plan.max_gap() <= params.epsilon + 1e-12
            && (total - std::f64::consts::PI).abs() < 1e-9,
        format!(
            "{} bands, max gap {:.5}, sum lambda {:.9}",
            plan.bands.len(),
            plan.max_gap(),
            total
        ),
    );

    // Discrete variogram vs quadrature at a few lags.
    let weight = params.weight_params();
    let mut worst = 0.0f64;
    for lag in [(0.05, 0.0), (0.0, 0.08), (0.03, -0.04), (0.1, 0.1)] {
        let d = discrete_variogram(params.hurst, 0.3, &weight, &plan, lag);
        let t = theoretical_variogram(params.hurst, 0.3, &weight, lag);
        worst = worst.max(((d - t) / t).abs());
    }
    report(
        "riemann-convergence",
        worst <= 0.01,
        format!("max relative error {worst:.5} (tolerance 0.01)"),
    );

    // Monte-Carlo variogram on a small grid.
    let mut p = params;
    p.grid_order = 31;
    let small_plan = bands::default_plan(p.epsilon, p.grid_order)?;
    let grids: Result<Vec<FieldGrid>> = (0..args.seeds)
        .map(|s| {
            let mut ps = p;
            ps.seed = p.seed.wrapping_add(s);
            let state = lafbf::synthesis::precompute_with_plan(&ps, small_plan.clone())?;
            Ok(synthesize_elementary(&ps, 0.0, &state))
        })
        .collect();
    let grids = grids?;
    let lags = [(2i64, 0i64), (0, 4), (3, 3)];
    let est = empirical_variogram(&grids, &lags)?;
    let mut worst = 0.0f64;
    for e in &est {
        let x = (e.lag.0 as f64 / 31.0, e.lag.1 as f64 / 31.0);
        let t = theoretical_variogram(p.hurst, 0.0, &weight, x);
        worst = worst.max(((e.value - t) / t).abs());
    }
    report(
        "variogram-montecarlo",
        worst <= 0.25,
        format!(
            "max relative error {worst:.4} over {} seeds (tolerance 0.25)",
            args.seeds
        ),
    );

    // Hurst regression on an isotropic field.
    let mut iso = params;
    iso.grid_order = 127;
    iso.alpha = FRAC_PI_2;
    iso.regularized = false;
    let state = precompute(&iso)?;
    let grid = synthesize_elementary(&iso, 0.0, &state);
    let est = estimate_hurst(&grid)?;
    report(
        "hurst-estimate",
        (est - iso.hurst.value()).abs() <= 0.15,
        format!("estimated {est:.3} for H = {}", iso.hurst.value()),
    );

    if all_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("error: validation checks failed");
        Ok(ExitCode::from(4))
    }
}
