use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pcgraph::bench::{
    beta_alpha_grid, error_rate_experiment, fwer_power_experiment, linear_alpha_grid, log_log_slope,
    parallel_scaling_experiment, timing_experiment, ErrorRateExperiment, PowerExperiment, ScalingExperiment,
    TimingExperiment,
};
use pcgraph::cohort::{cohort_csv, connection_percentages};
use pcgraph::fit::FitConfig;
use pcgraph::graph::{all_edges, Edge};
use pcgraph::io::{read_json, read_sample_csv, spectrum_dump_csv, write_json, write_sample_csv, write_text};
use pcgraph::parallel::{available_workers, with_workers};
use pcgraph::pipeline::{default_m, estimate, run_selection};
use pcgraph::var::{model_a, model_b, model_c, random_var_model};
use pcgraph::{Error, ErrorKind, Graph, PipelineConfig, SampleMatrix, VarModel, WindowRegistry, WindowSpec};

use crate::ranges::{f64_list, usize_list};
use crate::{
    BenchCommand, Cli, CohortArgs, Command, ErrorArgs, EstimationArgs, NamedModel, OutputFormat, PowerArgs,
    ScalingArgs, SelectArgs, SimulateArgs, TimingArgs,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Config => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Io => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn at_path<T>(path: &Path, r: pcgraph::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        if !f.message.contains(&*path.to_string_lossy()) {
            f.message = format!("{}: {}", path.display(), f.message);
        }
        f
    })
}

pub fn run(cli: Cli) -> CmdResult {
    std::fs::create_dir_all(&cli.out_dir).map_err(|e| Failure {
        code: 4,
        message: format!("cannot create {}: {e}", cli.out_dir.display()),
    })?;
    let out = cli.out_dir.clone();
    let workers = cli.workers;
    match cli.command {
        Command::Simulate(args) => simulate(&args, &out),
        Command::Select(args) => with_workers(workers, || select(&args, &out))?,
        Command::Cohort(args) => with_workers(workers, || cohort(&args, &out))?,
        Command::Bench(args) => match args.experiment {
            BenchCommand::Timing(a) => with_workers(workers, || bench_timing(&a, &out))?,
            BenchCommand::Power(a) => with_workers(workers, || bench_power(&a, &out))?,
            BenchCommand::Errors(a) => with_workers(workers, || bench_errors(&a, &out))?,
            BenchCommand::Scaling(a) => bench_scaling(&a, &out),
        },
    }
}

fn named_model(model: NamedModel, x: f64) -> VarModel {
    match model {
        NamedModel::A => model_a(),
        NamedModel::B => model_b(x),
        NamedModel::C => model_c(),
    }
}

fn edge_list(edges: &[Edge]) -> String {
    let parts: Vec<String> = edges.iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn simulate(args: &SimulateArgs, out: &Path) -> CmdResult {
    let model = if let Some(path) = &args.model_json {
        at_path(path, read_json::<VarModel>(path))?
    } else if args.random {
        random_var_model(args.p, args.k, args.seed)?
    } else if let Some(m) = args.model {
        named_model(m, args.x)
    } else {
        return Err(Error::config("choose one of --model, --random or --model-json").into());
    };
    if !model.is_stationary() {
        return Err(Error::NonStationary {
            max_modulus: model.spectral_radius(),
        }
        .into());
    }
    let x = model.simulate(args.n, args.seed, args.burn_in)?;
    let truth = model.true_graph(args.n.max(2) + args.n % 2)?;
    let sample_path = out.join(format!("{}.csv", args.name));
    write_sample_csv(&sample_path, &x)?;
    write_json(&out.join(format!("{}_model.json", args.name)), &model)?;
    write_json(&out.join(format!("{}_truth.json", args.name)), &truth)?;
    let missing: Vec<Edge> = truth.missing().iter().copied().collect();
    println!(
        "wrote {} ({} x {}); true missing edges {}",
        sample_path.display(),
        x.n(),
        x.p(),
        edge_list(&missing)
    );
    Ok(())
}

fn pipeline_config(est: &EstimationArgs) -> PipelineConfig {
    let mut window = WindowSpec::named(&est.window);
    if let (Some(cu), Some(du)) = (est.cu, est.du) {
        window = window.with_constants(cu, du);
    }
    PipelineConfig {
        m: est.m,
        window,
        alpha: est.alpha,
        method: est.method.clone(),
        fit: FitConfig {
            tol: est.fit_tol,
            max_iter: est.max_iter,
        },
        demean: true,
    }
}

fn load_sample(path: &Path, n: Option<usize>) -> Result<SampleMatrix, Failure> {
    let (x, _) = at_path(path, read_sample_csv(path))?;
    let Some(n) = n else {
        return Ok(x);
    };
    if n > x.n() {
        return Err(Error::config(format!("--n {n} exceeds the {} rows available", x.n())).into());
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|t| x.row(t)).collect();
    let (x, truncated) = SampleMatrix::from_rows_truncating(&rows)?;
    if truncated {
        log::warn!("--n {n} is odd; using {} rows", x.n());
    }
    Ok(x)
}

fn select(args: &SelectArgs, out: &Path) -> CmdResult {
    let x = load_sample(&args.input, args.n)?;
    let cfg = pipeline_config(&args.est);
    let result = run_selection(&x, &cfg)?;
    let stem = |suffix: &str| out.join(format!("{}{suffix}", args.name));
    write_json(&stem(".json"), &result)?;
    write_json(&stem("_graph.json"), &result.graph)?;
    write_text(&stem(".dot"), &result.graph.to_dot())?;
    write_text(&stem("_statistics.csv"), &result.statistics_csv())?;
    write_text(&stem(".txt"), &result.render_table())?;
    if args.dump_spectrum {
        let m = cfg.resolve_m(x.n());
        let est = estimate(&x, m, &cfg.window, true, &WindowRegistry::default())?;
        let pairs: Vec<(usize, usize)> = all_edges(x.p()).iter().map(|e| (e.j(), e.k())).collect();
        write_text(&stem("_spectrum.csv"), &spectrum_dump_csv(&est.field, &pairs)?)?;
    }
    match args.format {
        OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&result).expect("serialisable")),
        OutputFormat::Csv => print!("{}", result.statistics_csv()),
        OutputFormat::Dot => print!("{}", result.graph.to_dot()),
        OutputFormat::Table => print!("{}", result.render_table()),
    }
    Ok(())
}

fn parse_group(spec: &str) -> Result<(String, Vec<PathBuf>), Failure> {
    let (name, files) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(format!("group '{spec}' must look like name=file1,file2")))?;
    let files: Vec<PathBuf> = files.split(',').filter(|f| !f.is_empty()).map(PathBuf::from).collect();
    if name.is_empty() || files.is_empty() {
        return Err(Error::config(format!("group '{spec}' needs a name and at least one file")).into());
    }
    Ok((name.to_string(), files))
}

fn cohort(args: &CohortArgs, out: &Path) -> CmdResult {
    let cfg = pipeline_config(&args.est);
    let mut summaries = Vec::new();
    for spec in &args.groups {
        let (name, files) = parse_group(spec)?;
        let mut graphs = Vec::new();
        for file in &files {
            let graph = if file.extension().is_some_and(|e| e == "json") {
                at_path(file, read_json::<Graph>(file))?
            } else {
                let (x, _) = at_path(file, read_sample_csv(file))?;
                run_selection(&x, &cfg)
                    .map_err(|e| Error::domain(format!("{}: {e}", file.display())))?
                    .graph
            };
            graphs.push(graph);
        }
        summaries.push(connection_percentages(&name, &graphs)?);
    }
    let csv = cohort_csv(&summaries)?;
    write_text(&out.join(format!("{}.csv", args.name)), &csv)?;
    write_json(&out.join(format!("{}.json", args.name)), &summaries)?;
    print!("{csv}");
    Ok(())
}

fn bench_timing(args: &TimingArgs, out: &Path) -> CmdResult {
    let cfg = TimingExperiment {
        p_list: usize_list(&args.p)?,
        n: args.n,
        m: args.m.unwrap_or_else(|| default_m(args.n)),
        method: args.method.clone(),
        k: args.k,
        alpha: args.alpha,
        seed: args.seed,
        window: WindowSpec::default(),
        fit: FitConfig::default(),
    };
    let rows = timing_experiment(&cfg)?;
    let mut csv = String::from("p,seconds,statistics_computed,missing\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.p, r.seconds, r.statistics_computed, r.missing);
    }
    write_text(&out.join(format!("timing_{}.csv", args.method)), &csv)?;
    print!("{csv}");
    if rows.len() >= 2 {
        println!("log-log slope: {:.3}", log_log_slope(&rows));
    }
    Ok(())
}

fn bench_power(args: &PowerArgs, out: &Path) -> CmdResult {
    let e = |j, k| Edge::new(j, k).expect("valid pair");
    let model = named_model(args.model, args.x);
    let truth = model.true_missing_edges(args.n)?;
    let borderline = match args.model {
        NamedModel::A => vec![e(2, 3), e(2, 5), e(3, 4), e(3, 5)],
        NamedModel::B | NamedModel::C => vec![e(2, 3), e(2, 5), e(3, 4)],
    };
    let false_nulls: Vec<Edge> = borderline.iter().copied().filter(|b| !truth.contains(b)).collect();
    let mut cfg = PowerExperiment::with_default_grids(model, truth, false_nulls, args.n, args.m, args.reps, args.seed)?;
    cfg.mht_alphas = linear_alpha_grid(0.5, args.step)?;
    cfg.stepwise_alphas = beta_alpha_grid(0.5, args.step, 5)?;
    if args.borderline {
        cfg.restrict = Some(borderline);
    }
    let cmp = fwer_power_experiment(&cfg)?;
    let mut csv = cmp.mht.to_csv();
    csv.push_str(cmp.stepwise.to_csv().split_once('\n').map_or("", |(_, rest)| rest));
    write_text(&out.join("power.csv"), &csv)?;
    let points = cmp.matched_points(5);
    let mut parity = String::from("fwer,mht_power,stepwise_power\n");
    for p in &points {
        let _ = writeln!(parity, "{},{},{}", p.fwer, p.mht_power, p.stepwise_power);
    }
    write_text(&out.join("power_parity.csv"), &parity)?;
    write_json(&out.join("power.json"), &cmp)?;
    print!("{parity}");
    Ok(())
}

fn bench_errors(args: &ErrorArgs, out: &Path) -> CmdResult {
    let p_list = usize_list(&args.p)?;
    if !args.long && p_list.iter().any(|&p| p > 50) {
        return Err(Error::config("dimensions above 50 are long-running; pass --long").into());
    }
    let cfg = ErrorRateExperiment {
        p_list,
        alphas: f64_list(&args.alpha_grid)?,
        n: args.n,
        m: args.m.unwrap_or((args.n / 16).max(1)),
        reps: args.reps,
        k: args.k,
        method: args.method.clone(),
        seed: args.seed,
        window: WindowSpec::default(),
        fit: FitConfig::default(),
    };
    let rows = error_rate_experiment(&cfg)?;
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut csv = String::from("p,alpha,type1_pct,type2_pct,reps\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.p,
            r.alpha,
            fmt(r.type1_pct),
            fmt(r.type2_pct),
            r.reps
        );
    }
    write_text(&out.join(format!("errors_{}.csv", args.method)), &csv)?;
    print!("{csv}");
    Ok(())
}

fn bench_scaling(args: &ScalingArgs, out: &Path) -> CmdResult {
    let workers = match &args.worker_counts {
        Some(spec) => usize_list(spec)?,
        None => {
            let max = available_workers();
            let mut w: Vec<usize> = std::iter::successors(Some(1usize), |w| Some(w * 2))
                .take_while(|&w| w < max)
                .collect();
            w.push(max);
            w
        }
    };
    let r = parallel_scaling_experiment(&ScalingExperiment {
        p: args.p,
        n: args.n,
        m: args.m,
        workers,
        k: args.k,
        method: args.method.clone(),
        alpha: 0.05,
        seed: args.seed,
        window: WindowSpec::default(),
        fit: FitConfig::default(),
    })?;
    let mut csv = String::from("workers,seconds\n");
    for row in &r.rows {
        let _ = writeln!(csv, "{},{}", row.workers, row.seconds);
    }
    write_text(&out.join("scaling.csv"), &csv)?;
    write_json(&out.join("scaling.json"), &r)?;
    print!("{csv}");
    println!("identical results across worker counts: {}", r.identical);
    Ok(())
}
