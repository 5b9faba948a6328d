use pseudomed::cli::{self, read_sample_csv, ColumnSpec};
use pseudomed::inference::infer;
use pseudomed::prelude::*;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pseudomed"));
    c.env("RUST_LOG", "error");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        Self { dir: tempfile::tempdir().unwrap() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.path(name);
        std::fs::write(&path, text).unwrap();
        path
    }
}

fn scenario_toml(n: usize, direct: bool, indirect: bool, tau: f64, seed: u64) -> String {
    format!("n_per_arm = {n}\ndirect_effect = {direct}\nindirect_effect = {indirect}\ntau = {tau}\nseed = {seed}\n")
}

#[test]
fn simulate_then_mediate_matches_library_bit_for_bit() {
    let s = Scratch::new();
    let cfg = s.write("s.toml", &scenario_toml(80, true, true, 2.0, 17));
    let data = s.path("d.csv");
    assert_eq!(code(&["simulate", p(&cfg), "-o", p(&data)]), 0);

    let config = ScenarioConfig::new(80, EffectCase::Both, 2.0).with_seed(17);
    let direct = simulate_trial(&config).unwrap();
    let parsed = read_sample_csv(&data, &ColumnSpec::default()).unwrap();
    assert_eq!(parsed, direct);

    let table = s.path("e.csv");
    let out = run(&["mediate", p(&data), "--tau", "2", "--precision", "15", "--table", p(&table), "-o", p(&s.path("r.txt"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spec = AnalysisSpec::new(EstimandKind::survival(2.0).unwrap());
    let lib = infer(&direct, &spec, InferenceMethod::Delta, 0.05).unwrap();
    let mut rows = csv::Reader::from_path(&table).unwrap();
    let parsed_rows: Vec<csv::StringRecord> = rows.records().map(std::result::Result::unwrap).collect();
    for (row, e) in parsed_rows.iter().zip([lib.nde, lib.nie, lib.te]) {
        assert_eq!(&row[1], cli::fmt_fixed(e.estimate, 15));
        assert_eq!(&row[2], cli::fmt_fixed(e.se, 15));
        assert_eq!(&row[5], cli::fmt_fixed(e.p_value, 15));
    }
}

#[test]
fn primary_outputs_are_byte_identical_on_rerun() {
    let s = Scratch::new();
    let cfg = s.write("s.toml", &scenario_toml(60, true, true, 3.0, 5));
    let (d1, d2) = (s.path("a.csv"), s.path("b.csv"));
    assert_eq!(code(&["simulate", p(&cfg), "-o", p(&d1)]), 0);
    assert_eq!(code(&["simulate", p(&cfg), "-o", p(&d2)]), 0);
    assert_eq!(std::fs::read(&d1).unwrap(), std::fs::read(&d2).unwrap());

    let report = |name: &str, threads: &str| {
        let out = s.path(name);
        let status = bin()
            .env(cli::THREADS_ENV, threads)
            .args(["mediate", p(&d1), "--tau", "3", "--estimand", "rmst", "--inference", "boot", "--boot-reps", "150", "--seed", "9", "-o", p(&out)])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read_to_string(out).unwrap().replace(p(&d1), "")
    };
    assert_eq!(report("r1.txt", "1"), report("r2.txt", "3"));

    let seeded = |seed: &str, name: &str| {
        let out = s.path(name);
        assert_eq!(code(&["simulate", p(&cfg), "--seed", seed, "-o", p(&out)]), 0);
        std::fs::read(out).unwrap()
    };
    assert_ne!(seeded("6", "c.csv"), seeded("7", "d.csv"));
}

#[test]
fn report_contains_all_sections() {
    let s = Scratch::new();
    let cfg = s.write("s.toml", &format!("{}[competing]\nlambda_d = 0.2\n", scenario_toml(70, true, true, 2.0, 3)));
    let data = s.path("d.csv");
    assert_eq!(code(&["simulate", p(&cfg), "-o", p(&data)]), 0);
    let out = run(&["mediate", p(&data), "--tau", "2", "--estimand", "cif:1", "--robust-se", "--inference", "sobel"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for needle in [
        "precision: 6 decimal places",
        "estimand: cif:1 at tau = 2.000000",
        "covariance: HC1 robust",
        "theta_hat",
        "Mediator model: M ~ A",
        "Outcome model: pseudo-value ~ A + M",
        "NDE",
        "NIE",
        "TE ",
        "proportion mediated",
        "Total-effect cross-check",
    ] {
        assert!(text.contains(needle), "missing '{needle}' in\n{text}");
    }
}

#[test]
fn covariates_enter_both_models() {
    let s = Scratch::new();
    let mut csv = String::from("time,status,arm,mediator,age\n");
    let sample = simulate_trial(&ScenarioConfig::new(40, EffectCase::Both, 2.0).with_seed(2)).unwrap();
    for i in 0..sample.len() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            sample.times()[i],
            sample.status()[i],
            sample.arm()[i],
            sample.mediator()[i],
            40 + (i * 7) % 30
        ));
    }
    let data = s.write("d.csv", &csv);
    let out = run(&["mediate", p(&data), "--tau", "2", "--covariates", "age"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Mediator model: M ~ A + age"));
    assert!(text.contains("Outcome model: pseudo-value ~ A + M + age"));
    assert_eq!(code(&["mediate", p(&data), "--tau", "2", "--covariates", "weight"]), cli::EXIT_SCHEMA);
}

#[test]
fn exit_codes_are_distinct_and_documented() {
    let s = Scratch::new();
    let good = s.write("good.csv", "time,status,arm,mediator\n1,1,0,0.1\n2,0,1,0.5\n3,1,0,-0.2\n4,1,1,0.3\n5,0,0,1.0\n6,1,1,0.0\n");
    assert_eq!(code(&["mediate", p(&good), "--tau", "3"]), cli::EXIT_OK);

    let no_mediator = s.write("a.csv", "time,status,arm\n1,1,0\n2,1,1\n");
    assert_eq!(code(&["mediate", p(&no_mediator), "--tau", "1"]), cli::EXIT_SCHEMA);

    let malformed = s.write("b.csv", "time,status,arm,mediator\n1,1,0,0.1\n2,x,1,0.5\n");
    assert_eq!(code(&["mediate", p(&malformed), "--tau", "1"]), cli::EXIT_MALFORMED_CSV);
    let missing = s.write("c.csv", "time,status,arm,mediator\n1,1,0,0.1\n2,1,1,\n");
    assert_eq!(code(&["mediate", p(&missing), "--tau", "1"]), cli::EXIT_MALFORMED_CSV);

    assert_eq!(code(&["mediate", p(&good), "--tau", "60"]), cli::EXIT_TAU);

    let collinear = s.write("d.csv", "time,status,arm,mediator\n1,1,0,0\n2,0,1,1\n3,1,0,0\n4,1,1,1\n5,0,0,0\n6,1,1,1\n");
    assert_eq!(code(&["mediate", p(&collinear), "--tau", "3"]), cli::EXIT_RANK);

    let bad_cfg = s.write("e.toml", "n_per_arm = 5\ndirect_effect = true\nindirect_effect = true\ntau = 2\nbogus = 1\n");
    assert_eq!(code(&["simulate", p(&bad_cfg)]), cli::EXIT_CONFIG);

    assert_eq!(code(&["mediate", p(&good), "--tau", "3", "--estimand", "median"]), cli::EXIT_USAGE);
    assert_eq!(code(&["mediate", p(&good)]), cli::EXIT_USAGE);
    assert_eq!(code(&["mediate", p(&s.path("nope.csv")), "--tau", "1"]), cli::EXIT_IO);
    assert_eq!(code(&["mediate", p(&good), "--tau", "3", "--interaction"]), cli::EXIT_ESTIMATION);

    let bad_threads = bin().env(cli::THREADS_ENV, "many").args(["mediate", p(&good), "--tau", "3"]).status().unwrap();
    assert_eq!(bad_threads.code(), Some(cli::EXIT_USAGE));

    let err = String::from_utf8(run(&["mediate", p(&no_mediator), "--tau", "1"]).stderr).unwrap();
    assert!(err.contains("mediator"), "{err}");

    let codes = [
        cli::EXIT_OK, cli::EXIT_INTERNAL, cli::EXIT_USAGE, cli::EXIT_IO, cli::EXIT_MALFORMED_CSV, cli::EXIT_SCHEMA,
        cli::EXIT_TAU, cli::EXIT_RANK, cli::EXIT_CONFIG, cli::EXIT_ESTIMATION,
    ];
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap();
    for (i, c) in codes.iter().enumerate() {
        assert!(codes[..i].iter().all(|d| d != c));
        assert!(readme.contains(&format!("| {c} |")), "README lacks exit code {c}");
    }
}

#[test]
fn pseudo_export_uncensored_reduces_to_indicators() {
    let s = Scratch::new();
    let data = s.write("u.csv", "id,time,status,arm,mediator\n10,0.5,1,0,0\n11,1.5,1,1,0\n12,2.5,1,0,0\n13,3.5,1,1,0\n");
    let out = run(&["pseudo", p(&data), "--tau", "2", "--pseudo", "jackknife,if"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["id", "time", "status", "arm", "pseudo_jackknife", "pseudo_if"]);
    for rec in rdr.records().map(std::result::Result::unwrap) {
        let t: f64 = rec[1].parse().unwrap();
        let expected = if t > 2.0 { 1.0 } else { 0.0 };
        for col in [4, 5] {
            assert!((rec[col].parse::<f64>().unwrap() - expected).abs() < 1e-12);
        }
    }
    let rmst = run(&["pseudo", p(&data), "--tau", "2", "--estimand", "rmst"]);
    let mut rdr = csv::Reader::from_reader(rmst.stdout.as_slice());
    for rec in rdr.records().map(std::result::Result::unwrap) {
        let t: f64 = rec[1].parse().unwrap();
        assert!((rec[4].parse::<f64>().unwrap() - t.min(2.0)).abs() < 1e-12);
    }
    let empty = s.write("empty.csv", "");
    assert_eq!(code(&["pseudo", p(&empty), "--tau", "1"]), cli::EXIT_SCHEMA);
}

#[test]
fn pseudo_export_methods_agree_at_fifty_per_arm() {
    let s = Scratch::new();
    let cfg = s.write("s.toml", &scenario_toml(50, true, true, 2.0, 4));
    let data = s.path("d.csv");
    assert_eq!(code(&["simulate", p(&cfg), "-o", p(&data)]), 0);
    let out = run(&["pseudo", p(&data), "--tau", "2", "--pseudo", "jackknife,if"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let (jk, inf): (Vec<f64>, Vec<f64>) = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[4].parse::<f64>().unwrap(), r[5].parse::<f64>().unwrap())
        })
        .unzip();
    let set = |v: Vec<f64>, m| PseudoValueSet { values: v, estimand: EstimandKind::survival(2.0).unwrap(), method: m, theta_hat: 0.0 };
    let agreement = pseudo_agreement(&set(jk, PseudoMethod::Jackknife), &set(inf, PseudoMethod::InfluenceFunction)).unwrap();
    assert!(agreement.r_squared >= 0.99, "{agreement:?}");
    assert!(String::from_utf8(out.stderr).unwrap().contains("R^2"));
}

#[test]
fn oracle_table_matches_monte_carlo() {
    let s = Scratch::new();
    let cfg = s.write("s.toml", &format!("{}[competing]\nlambda_d = 0.2\n", scenario_toml(10, true, true, 3.0, 1)));
    let out = run(&["oracle", p(&cfg), "--mc-draws", "2000000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = rdr.records().map(std::result::Result::unwrap).collect();
    assert_eq!(rows.iter().map(|r| r[0].to_string()).collect::<Vec<_>>(), ["surv", "rmst", "cif:1", "cif:2"]);
    for r in &rows {
        assert_eq!(&r[2], "gauss_hermite_64");
        assert!(r[9].parse::<f64>().unwrap() <= 1e-4);
    }
}

#[test]
fn opchar_writes_table_and_qq_pairs() {
    let s = Scratch::new();
    let grid = s.write(
        "g.toml",
        "replicates = 30\nseed = 3\ncases = [\"no_effect\", \"both\"]\nscales = [\"surv\", \"cif:1\"]\ntaus = [2.0]\nn_per_arm = [40]\n",
    );
    let (t1, q1, t2) = (s.path("t1.csv"), s.path("q1.csv"), s.path("t2.csv"));
    assert_eq!(code(&["opchar", p(&grid), "-o", p(&t1), "--qq", p(&q1)]), 0);
    assert_eq!(code(&["opchar", p(&grid), "-o", p(&t2)]), 0);
    assert_eq!(std::fs::read(&t1).unwrap(), std::fs::read(&t2).unwrap());
    let table = std::fs::read_to_string(&t1).unwrap();
    assert_eq!(table.lines().count(), 1 + 4 * 3);
    assert!(table.lines().next().unwrap().contains("rejection_rate,coverage,completed,failures"));
    let qq = std::fs::read_to_string(&q1).unwrap();
    assert!(qq.starts_with("cell,effect,expected,observed"));
    assert!(qq.lines().count() > 1 + 4 * 3 * 25);

    let zero = run(&["opchar", p(&grid), "--replicates", "0"]);
    assert!(zero.status.success());
    assert_eq!(String::from_utf8(zero.stdout).unwrap().lines().count(), 1);
}

#[test]
fn bench_reports_each_size() {
    let out = run(&["bench", "--sizes", "50,100", "--reps", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,jackknife_ms,if_ms,ratio");
    assert!(lines[1].starts_with("50,") && lines[2].starts_with("100,"));
}

#[test]
fn null_scenario_effects_are_mostly_nonsignificant() {
    let s = Scratch::new();
    let seeds = 200;
    let mut nonsignificant = [0usize; 3];
    for seed in 0..seeds {
        let cfg = s.write("s.toml", &scenario_toml(50, false, false, 2.0, 1000 + seed));
        let data = s.path("d.csv");
        let table = s.path("t.csv");
        assert_eq!(code(&["simulate", p(&cfg), "-o", p(&data)]), 0);
        assert_eq!(code(&["mediate", p(&data), "--tau", "2", "--table", p(&table), "-o", p(&s.path("r.txt"))]), 0);
        let mut rdr = csv::Reader::from_path(&table).unwrap();
        for (i, rec) in rdr.records().enumerate() {
            nonsignificant[i] += usize::from(&rec.unwrap()[6] == "no");
        }
    }
    for (name, count) in ["NDE", "NIE", "TE"].iter().zip(nonsignificant) {
        let frac = count as f64 / seeds as f64;
        assert!((0.90..=1.0).contains(&frac), "{name}: {frac}");
    }
}

#[test]
fn help_and_version_exit_cleanly() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["frobnicate"]), cli::EXIT_USAGE);
}
