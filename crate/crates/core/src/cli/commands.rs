use super::config::{load_scenario, GridFile};
use super::io::{csv_write_error, read_sample_csv, write_sample, ColumnSpec};
use super::report::{csv_table, effects_csv, fmt_fixed, MediateReport};
use super::{
    BenchArgs, CliError, CliResult, Command, MediateArgs, OpcharArgs, OracleArgs, PseudoArgs, SimulateArgs,
};
use crate::inference::infer;
use crate::mediation::{mediate, unadjusted_total_effect, AnalysisSpec};
use crate::pseudo::{pseudo_agreement, pseudo_values, Scale};
use crate::simlab::stats::uniform_qq;
use crate::simlab::{
    bench_pseudo, monte_carlo_effects, run_operating_characteristics, simulate_competing, simulate_trial,
    true_effects_with_nodes, EffectSummary, ScenarioConfig,
};
use std::io::Write;
use std::path::Path;

pub(super) fn dispatch(command: &Command) -> CliResult<()> {
    match command {
        Command::Mediate(a) => cmd_mediate(a),
        Command::Pseudo(a) => cmd_pseudo(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Opchar(a) => cmd_opchar(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p.display().to_string(), e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)
                .and_then(|()| out.flush())
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}

fn union(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for x in b {
        if !out.contains(x) {
            out.push(x.clone());
        }
    }
    out
}

fn cmd_mediate(args: &MediateArgs) -> CliResult<()> {
    let mediator_cov = union(&args.covariates, &args.mediator_covariates);
    let outcome_cov = union(&args.covariates, &args.outcome_covariates);
    let columns = ColumnSpec::from_args(&args.data, union(&mediator_cov, &outcome_cov));
    let estimand = args.estimand.estimand()?;
    let sample = read_sample_csv(&args.data.input, &columns)?;
    let mut spec = AnalysisSpec::new(estimand)
        .with_pseudo_method(args.pseudo)
        .with_covariance(args.covariance())
        .with_mediator_confounders(mediator_cov)
        .with_outcome_confounders(outcome_cov);
    spec.interaction = args.interaction;

    let fit = mediate(&sample, &spec)?;
    let result = infer(&sample, &spec, args.inference_method(), args.alpha)?;
    let unadjusted_te = unadjusted_total_effect(&sample, &estimand).unwrap_or_else(|e| {
        log::warn!("total-effect cross-check unavailable: {e}");
        f64::NAN
    });
    let input = args.data.input.display().to_string();
    let report = MediateReport {
        input: &input,
        sample: &sample,
        fit: &fit,
        result: &result,
        unadjusted_te,
        covariance: args.covariance(),
        precision: args.precision,
    }
    .render();
    emit(args.output.as_deref(), report.as_bytes())?;
    if let Some(path) = &args.table {
        emit(Some(path), effects_csv(&result, args.precision).as_bytes())?;
    }
    Ok(())
}

fn cmd_pseudo(args: &PseudoArgs) -> CliResult<()> {
    if args.pseudo.is_empty() {
        return Err(CliError::Usage("--pseudo needs at least one method".into()));
    }
    let estimand = args.estimand.estimand()?;
    let sample = read_sample_csv(&args.data.input, &ColumnSpec::from_args(&args.data, Vec::new()))?;
    let sets = args
        .pseudo
        .iter()
        .map(|&m| pseudo_values(&sample, &estimand, m))
        .collect::<crate::Result<Vec<_>>>()?;
    if let [a, b, ..] = sets.as_slice() {
        let agreement = pseudo_agreement(a, b)?;
        eprintln!(
            "{} vs {}: R^2 = {:.6}, max |difference| = {:.3e}",
            a.method, b.method, agreement.r_squared, agreement.max_abs_diff
        );
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "time".into(), "status".into(), "arm".into()];
    header.extend(sets.iter().map(|s| format!("pseudo_{}", s.method)));
    w.write_record(&header).map_err(csv_write_error)?;
    for i in 0..sample.len() {
        let mut rec = vec![
            sample.ids()[i].to_string(),
            sample.times()[i].to_string(),
            sample.status()[i].to_string(),
            sample.arm()[i].to_string(),
        ];
        rec.extend(sets.iter().map(|s| s.values[i].to_string()));
        w.write_record(&rec).map_err(csv_write_error)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("output", std::io::Error::other(e.to_string())))?;
    emit(args.output.as_deref(), &bytes)
}

/// Competing-risks scenarios produce three-state status codes.
pub fn simulate_scenario(config: &ScenarioConfig) -> crate::Result<crate::survival::SurvivalSample> {
    if config.competing.is_some() {
        simulate_competing(config)
    } else {
        simulate_trial(config)
    }
}

fn cmd_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut config = load_scenario(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let sample = simulate_scenario(&config)?;
    let mut buf = Vec::new();
    write_sample(&mut buf, &sample)?;
    emit(args.output.as_deref(), &buf)
}

fn cmd_oracle(args: &OracleArgs) -> CliResult<()> {
    let config = load_scenario(&args.config)?;
    if args.nodes == 0 {
        return Err(CliError::Usage("--nodes must be positive".into()));
    }
    let mut scales = vec![Scale::SurvivalProb, Scale::Rmst];
    if config.competing.is_some() {
        scales.extend([Scale::CumulativeIncidence(1), Scale::CumulativeIncidence(2)]);
    }
    let p = args.precision;
    let mut header = vec!["estimand", "tau", "method", "te", "nde", "nie"];
    if args.mc_draws.is_some() {
        header.extend(["mc_te", "mc_nde", "mc_nie", "max_abs_diff"]);
    }
    let mut rows = Vec::new();
    for scale in scales {
        let t = true_effects_with_nodes(&config, scale, args.nodes)?;
        let method = match t.method {
            crate::simlab::TruthMethod::GaussHermite(n) => format!("gauss_hermite_{n}"),
            crate::simlab::TruthMethod::ClosedForm => "closed_form".to_string(),
            crate::simlab::TruthMethod::MonteCarlo(n) => format!("monte_carlo_{n}"),
        };
        let mut row = vec![scale.label(), fmt_fixed(config.tau, p), method, fmt_fixed(t.te, p), fmt_fixed(t.nde, p), fmt_fixed(t.nie, p)];
        if let Some(draws) = args.mc_draws {
            let mc = monte_carlo_effects(&config, scale, draws, args.seed)?;
            let diff = [(t.te - mc.te).abs(), (t.nde - mc.nde).abs(), (t.nie - mc.nie).abs()]
                .into_iter()
                .fold(0.0, f64::max);
            row.extend([fmt_fixed(mc.te, p), fmt_fixed(mc.nde, p), fmt_fixed(mc.nie, p), fmt_fixed(diff, p)]);
        }
        rows.push(row);
    }
    emit(args.output.as_deref(), csv_table(&header, &rows).as_bytes())
}

fn summary_cells(s: &EffectSummary, p: usize) -> Vec<String> {
    vec![
        fmt_fixed(s.truth, p),
        fmt_fixed(s.mean_estimate, p),
        fmt_fixed(s.bias, p),
        fmt_fixed(s.mc_se, p),
        fmt_fixed(s.sd_estimate, p),
        fmt_fixed(s.mean_se, p),
        fmt_fixed(s.rejection_rate, p),
        fmt_fixed(s.coverage, p),
    ]
}

fn cmd_opchar(args: &OpcharArgs) -> CliResult<()> {
    let grid = GridFile::load(&args.config)?;
    let cells = grid.cells()?;
    let mut options = grid.options()?;
    if let Some(r) = args.replicates {
        options.replicates = r;
    }
    let results = run_operating_characteristics(&cells, &options)?;
    let p = args.precision;
    let header = [
        "cell", "case", "estimand", "tau", "n_per_arm", "effect", "truth", "mean_estimate", "bias", "mc_se",
        "sd_estimate", "mean_se", "rejection_rate", "coverage", "completed", "failures",
    ];
    let mut rows = Vec::new();
    let mut qq_rows = Vec::new();
    for r in &results {
        for (name, s) in [("NDE", &r.nde), ("NIE", &r.nie), ("TE", &r.te)] {
            let mut row = vec![
                r.cell_id.to_string(),
                r.cell.config.case().label().to_string(),
                r.cell.scale.label(),
                fmt_fixed(r.cell.config.tau, p),
                r.cell.config.n_per_arm.to_string(),
                name.to_string(),
            ];
            row.extend(summary_cells(s, p));
            row.extend([r.completed.to_string(), r.failures.to_string()]);
            rows.push(row);
            if args.qq.is_some() {
                for (expected, observed) in uniform_qq(&s.p_values) {
                    qq_rows.push(vec![
                        r.cell_id.to_string(),
                        name.to_string(),
                        fmt_fixed(expected, p),
                        fmt_fixed(observed, p),
                    ]);
                }
            }
        }
    }
    emit(args.output.as_deref(), csv_table(&header, &rows).as_bytes())?;
    if let Some(path) = &args.qq {
        emit(Some(path), csv_table(&["cell", "effect", "expected", "observed"], &qq_rows).as_bytes())?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> CliResult<()> {
    let rows = bench_pseudo(&args.sizes, args.reps, args.estimand, args.tau, args.seed)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_fixed(r.jackknife.as_secs_f64() * 1e3, 3),
                fmt_fixed(r.influence.as_secs_f64() * 1e3, 3),
                fmt_fixed(r.ratio(), 1),
            ]
        })
        .collect();
    emit(
        args.output.as_deref(),
        csv_table(&["n", "jackknife_ms", "if_ms", "ratio"], &table).as_bytes(),
    )
}
