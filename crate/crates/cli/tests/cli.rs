use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use entroswarm::maxent::{sample_energy, sample_mixture_energy, MixtureParams};
use entroswarm::{EnergyTemp, RngStream};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_entroswarm"));
    c.env_remove("SWARM_SEED");
    c
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ok(o: &Output) {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// A shipped config with `duration` shortened, written into `dir`.
fn short_config(dir: &Path, name: &str, duration: f64, extra: &[(&str, &str)]) -> PathBuf {
    let mut text = fs::read_to_string(configs().join(name)).unwrap();
    let line = text.lines().find(|l| l.starts_with("duration =")).unwrap().to_string();
    text = text.replace(&line, &format!("duration = {duration:?}"));
    for (from, to) in extra {
        assert!(text.contains(from), "{from}");
        text = text.replace(from, to);
    }
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run")
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .output()
        .unwrap()
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn run_writes_three_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "crossing.toml", 300.0, &[]);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&run(&cfg, &a, &[]));
    ok(&run(&cfg, &b, &[]));
    for f in ["snapshots.csv", "metrics.jsonl", "manifest.json"] {
        assert!(a.join(f).is_file(), "{f}");
    }
    assert_eq!(fs::read(a.join("metrics.jsonl")).unwrap(), fs::read(b.join("metrics.jsonl")).unwrap());
    assert_eq!(fs::read(a.join("snapshots.csv")).unwrap(), fs::read(b.join("snapshots.csv")).unwrap());
    let m = manifest(&a);
    assert_eq!(m["seed"], 1);
    assert_eq!(m["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));

    // nothing written next to the output directory
    let mut names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["a", "b", "crossing.toml"]);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "transport_free.toml", 30.0, &[]);
    let a = dir.path().join("a");
    ok(&run(&cfg, &a, &["--seed", "9"]));
    // rebuild the scenario from the manifest alone
    let spec: entroswarm::experiments::ScenarioSpec =
        serde_json::from_value(manifest(&a)["scenario"].clone()).unwrap();
    assert_eq!(spec.seed, 9);
    let replay = dir.path().join("replay.toml");
    fs::write(&replay, spec.to_toml().unwrap()).unwrap();
    let b = dir.path().join("b");
    ok(&run(&replay, &b, &[]));
    assert_eq!(fs::read(a.join("metrics.jsonl")).unwrap(), fs::read(b.join("metrics.jsonl")).unwrap());
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "compression.toml", 5.0, &[]);
    let out = dir.path().join("env");
    let o = bin()
        .env("SWARM_SEED", "77")
        .args(["run", "--quiet", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    assert_eq!(manifest(&out)["seed"], 77);
    let out = dir.path().join("flag");
    let o = bin()
        .env("SWARM_SEED", "77")
        .args(["run", "--quiet", "--seed", "5", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    assert_eq!(manifest(&out)["seed"], 5);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.toml");
    let o = run(&missing, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nope.toml"), "{}", stderr(&o));

    let cfg = short_config(dir.path(), "crossing.toml", 10.0, &[("kt = 500.0", "kt = 500.0\nwobble = 3")]);
    let o = run(&cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("wobble"), "{}", stderr(&o));

    let cfg = short_config(dir.path(), "crossing.toml", 10.0, &[("kt = 500.0", "kt = -1.0")]);
    let o = run(&cfg, &dir.path().join("o"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("o").exists());

    let o = bin().args(["run", "--out", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn sweep(config: &Path, out: &Path) -> Output {
    bin().args(["sweep", "--quiet", "--jobs", "2", "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn count_sweep_rows_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    short_config(dir.path(), "transport_free.toml", 20.0, &[]);
    let sw = dir.path().join("sweep.toml");
    fs::write(
        &sw,
        "base = \"transport_free.toml\"\nparam = \"count\"\nvalues = [50, 100]\nseeds = [1, 2]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&sweep(&sw, &out));
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 4 + 2);
    assert_eq!(lines.iter().filter(|l| l.starts_with("run,")).count(), 4);
    assert_eq!(lines.iter().filter(|l| l.starts_with("median,")).count(), 2);
    assert!(lines[1].starts_with("run,count,50,1,1,0,"));

    let svg_out = dir.path().join("plot");
    let o = bin()
        .args(["plot", "--quiet", "--kind", "scaling"])
        .arg(out.join("summary.csv"))
        .arg("--out")
        .arg(&svg_out)
        .output()
        .unwrap();
    ok(&o);
    let svg = fs::read_to_string(svg_out.join("scaling.svg")).unwrap();
    assert_eq!(svg.matches("class=\"marker\"").count(), 4);

    fs::write(&sw, "base = \"transport_free.toml\"\nparam = \"count\"\nvalues = []\nseeds = [1]\n").unwrap();
    let o = sweep(&sw, &dir.path().join("empty"));
    assert!(!o.status.success());
}

#[test]
fn sweep_with_every_row_failing_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    short_config(dir.path(), "transport_free.toml", 20.0, &[]);
    let sw = dir.path().join("sweep.toml");
    fs::write(
        &sw,
        "base = \"transport_free.toml\"\nparam = \"count\"\nvalues = [2.5, 5000]\nseeds = [1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = sweep(&sw, &out);
    assert_eq!(o.status.code(), Some(1));
    // failures are still recorded per row
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("run,")).count(), 2);
}

#[test]
fn pv_sweep_feeds_the_plot() {
    let dir = tempfile::tempdir().unwrap();
    short_config(
        dir.path(),
        "compression.toml",
        10.0,
        &[
            ("width = 4000.0", "width = 600.0"),
            ("height = 2000.0", "height = 600.0"),
            ("count = 200", "count = 30"),
        ],
    );
    let sw = dir.path().join("pv.toml");
    fs::write(
        &sw,
        "base = \"compression.toml\"\nparam = \"force\"\nvalues = [400.0, 800.0]\nseeds = [1]\n\n[settle]\nwindow = 50.0\nvelocity_threshold = 0.2\nmax_time = 3000.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    ok(&sweep(&sw, &out));
    let plot_out = dir.path().join("plot");
    let plot = || {
        bin().args(["plot", "--quiet", "--kind", "pv"])
            .arg(out.join("summary.csv"))
            .arg("--out")
            .arg(&plot_out)
            .output()
            .unwrap()
    };
    ok(&plot());
    let first = fs::read(plot_out.join("pv.svg")).unwrap();
    let svg = String::from_utf8(first.clone()).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("class=\"marker\"").count(), 2);
    assert!(svg.contains("volume V (mm²)") && svg.contains("pressure P"));
    ok(&plot());
    assert_eq!(fs::read(plot_out.join("pv.svg")).unwrap(), first);
}

fn fit(data: &Path, model: &str, out: &Path) -> Output {
    bin().args(["fit", "--quiet", "--model", model])
        .arg(data)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write_samples(path: &Path, xs: &[f64]) {
    let mut s = String::from("energy\n");
    for x in xs {
        s.push_str(&format!("{x}\n"));
    }
    fs::write(path, s).unwrap();
}

#[test]
fn fit_recovers_a_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let p = MixtureParams::new(0.7, 10.0, 100.0).unwrap();
    let mut rng = RngStream::root(31);
    let xs: Vec<f64> = (0..100_000).map(|_| sample_mixture_energy(&p, &mut rng).unwrap()).collect();
    let data = dir.path().join("mix.csv");
    write_samples(&data, &xs);
    let out = dir.path().join("out");
    ok(&fit(&data, "exp2mix", &out));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let m = &v["exp2mix"]["fit"]["params"];
    let rel = |got: &Value, want: f64| (got.as_f64().unwrap() / want - 1.0).abs();
    assert!(rel(&m["phi"], 0.7) < 0.05, "{m}");
    assert!(rel(&m["t1"], 10.0) < 0.05, "{m}");
    assert!(rel(&m["t2"], 100.0) < 0.05, "{m}");
    assert_eq!(v["prefers_two_phase"], true);
}

#[test]
fn fit_flags_single_exponential() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = RngStream::root(32);
    let t = EnergyTemp::new(20.0).unwrap();
    let xs: Vec<f64> = (0..20_000).map(|_| sample_energy(t, &mut rng).unwrap()).collect();
    let data = dir.path().join("exp.csv");
    write_samples(&data, &xs);
    let out = dir.path().join("out");
    ok(&fit(&data, "exp2mix", &out));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    assert_eq!(v["prefers_two_phase"], false);
    assert!(v["ks_improvement"].as_f64().unwrap() < 0.01);

    ok(&fit(&data, "exp1", &out));
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("fit.json")).unwrap()).unwrap();
    let kt = v["exp1"]["fit"]["params"]["kt"].as_f64().unwrap();
    assert!((kt / 20.0 - 1.0).abs() < 0.03);
}

#[test]
fn fit_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    for (name, body) in [("empty.csv", ""), ("words.csv", "1\nfoo\n"), ("neg.csv", "1\n-2\n")] {
        let data = dir.path().join(name);
        fs::write(&data, body).unwrap();
        let o = fit(&data, "exp1", &dir.path().join("out"));
        assert!(!o.status.success(), "{name}");
        assert_eq!(o.status.code(), Some(2), "{name}");
    }
    let o = fit(&dir.path().join("absent.csv"), "exp1", &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_and_plot_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "transport_free.toml", 60.0, &[]);
    let run_out = dir.path().join("run");
    ok(&run(&cfg, &run_out, &[]));

    let out = dir.path().join("analysis");
    let o = bin()
        .args(["analyze", "--quiet"])
        .arg(run_out.join("snapshots.csv"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    ok(&o);
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(v["robots"], 200);
    assert_eq!(v["snapshot_dt"], 10.0);

    for (kind, file, svg) in [
        ("phases", "metrics.jsonl", "phases.svg"),
        ("trajectories", "snapshots.csv", "trajectories.svg"),
    ] {
        let plot_out = dir.path().join(kind);
        let o = bin()
            .args(["plot", "--quiet", "--kind", kind])
            .arg(run_out.join(file))
            .arg("--out")
            .arg(&plot_out)
            .output()
            .unwrap();
        ok(&o);
        assert!(fs::read_to_string(plot_out.join(svg)).unwrap().contains("</svg>"));
    }

    // kind and input do not match
    let o = bin()
        .args(["plot", "--quiet", "--kind", "pv"])
        .arg(run_out.join("metrics.jsonl"))
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert!(!o.status.success());
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = bin()
        .args(["plot", "--quiet", "--kind", "trajectories"])
        .arg(&empty)
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert!(!o.status.success());
}
