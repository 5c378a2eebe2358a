use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const RESULT_HEADER: &str = "g,beta,lx,ly,nn,seed,e_mean,e_err,abs_mH_mean,abs_mH_err,\
abs_mH_sliceavg_mean,abs_psiH_mean,abs_psiH_err,n_mean,L_final,max_nh,saturated,valid";

fn hexsse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hexsse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn quick_config(dir: &Path) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(
        &path,
        "# quick run\nlx = 5\nly = 2\nbeta = 1.0\ng = 0.5\nisteps = 2000\nnbins = 4\nmstep = 50\nseed = 7\n",
    )
    .unwrap();
    path
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_results_and_samples() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("out");
    let args = [
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "11",
    ];
    let first = hexsse(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    let samples = out.join("samples_0.5_11.csv");
    let bytes = fs::read(&samples).unwrap();
    let text = String::from_utf8(bytes.clone()).unwrap();
    assert!(text.starts_with("sweep,re_mH,im_mH,re_psiH,im_psiH\n"));
    assert_eq!(text.lines().count(), 1 + 4 * 50);

    let second = hexsse(&args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(
        fs::read(&samples).unwrap(),
        bytes,
        "rerun must reproduce samples"
    );

    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let lines: Vec<&str> = results.lines().collect();
    assert_eq!(lines[0], RESULT_HEADER);
    assert_eq!(lines.len(), 3, "run appends one row per call");
    assert_eq!(lines[1], lines[2]);
    assert!(lines[1].starts_with("0.5,1.0,5,2,36,11,"));
}

#[test]
fn per_key_flags_and_set_override_the_file() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("o");
    let run = hexsse(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--g",
        "0.25",
        "--set",
        "nbins=3",
        "--bins",
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.lines().nth(1).unwrap().starts_with("0.25,"));
    let bins = fs::read_to_string(out.join("bins.csv")).unwrap();
    assert_eq!(bins.lines().count(), 1 + 3);
}

#[test]
fn configuration_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let bad_key = hexsse(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "colour=red",
    ]);
    assert_eq!(bad_key.status.code(), Some(1));
    assert!(stderr(&bad_key).contains("colour"));

    let bad_size = hexsse(&["run", "--config", cfg.to_str().unwrap(), "--lx", "4"]);
    assert_eq!(bad_size.status.code(), Some(1));

    let missing = hexsse(&[
        "run",
        "--config",
        dir.path().join("nope.cfg").to_str().unwrap(),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn unwritable_output_directory_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "not a directory").unwrap();
    let out = blocker.join("sub");
    let run = hexsse(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(1));
    assert!(!stderr(&run).is_empty());
}

#[test]
fn saturated_run_exits_two() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("o");
    let run = hexsse(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--beta",
        "3.3",
        "--isteps",
        "1",
        "--mstep",
        "200",
    ]);
    assert_eq!(run.status.code(), Some(2), "{}", stderr(&run));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(results.lines().nth(1).unwrap().ends_with(",false"));
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out = dir.path().join(format!("p{workers}"));
        let run = hexsse(&[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--g-list",
            "0,0.2,0.4,0.6,0.8,1.0",
            "--parallel",
            workers,
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
        let results = fs::read(out.join("results.csv")).unwrap();
        for g in ["0", "0.2", "0.4", "0.6", "0.8", "1"] {
            assert!(out.join(format!("samples_{g}_7.csv")).exists(), "g = {g}");
        }
        outputs.push(results);
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert_eq!(text.lines().next().unwrap(), RESULT_HEADER);
}

#[test]
fn empty_field_list_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = quick_config(dir.path());
    let run = hexsse(&["sweep", "--config", cfg.to_str().unwrap(), "--g-list", ""]);
    assert_eq!(run.status.code(), Some(1));
    let run = hexsse(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    assert!(stderr(&run).contains("--g-list"));
}

#[test]
fn exact_diagonalisation_matches_golden_value() {
    let out = hexsse(&[
        "oracle",
        "ed",
        "--graph",
        fixture("ring6.json").to_str().unwrap(),
        "--beta",
        "3.3",
        "--g",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e = report["energy_density"].as_f64().unwrap();
    assert!((e - -0.864330520134).abs() < 1e-10, "{e}");
}

#[test]
fn exact_diagonalisation_refuses_large_graphs() {
    let dir = TempDir::new().unwrap();
    let bonds: Vec<String> = (0..20)
        .map(|i| format!("[{i},{},1.0]", (i + 1) % 20))
        .collect();
    let graph = dir.path().join("ring20.json");
    fs::write(
        &graph,
        format!("{{\"n\":20,\"g\":0.5,\"bonds\":[{}]}}", bonds.join(",")),
    )
    .unwrap();
    let out = hexsse(&[
        "oracle",
        "ed",
        "--graph",
        graph.to_str().unwrap(),
        "--beta",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("20") && msg.contains("12"), "{msg}");
}

#[test]
fn ground_oracle_lists_uniform_states() {
    let dir = TempDir::new().unwrap();
    let spins = dir.path().join("spins");
    let report = dir.path().join("ground.json");
    let out = hexsse(&[
        "oracle",
        "ground",
        "--lx",
        "5",
        "--ly",
        "2",
        "--max-listed",
        "5000",
        "--out",
        report.to_str().unwrap(),
        "--spins-dir",
        spins.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let value: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(value["energy_per_site"].as_f64(), Some(-1.0));
    let files = fs::read_dir(&spins).unwrap().count();
    assert!(files >= 6, "{files}");
    let first = fs::read_to_string(spins.join("uniform_0.txt")).unwrap();
    assert_eq!(first.trim().len(), 36);
}

#[test]
fn classical_oracle_on_a_lattice() {
    let out = hexsse(&[
        "oracle",
        "classical",
        "--lx",
        "5",
        "--ly",
        "0",
        "--beta",
        "1",
        "--max-listed",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let value: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["ground"]["degeneracy"].as_u64(), Some(14));
}

#[test]
fn lattice_command_writes_json_and_svg() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("l.json");
    let svg = dir.path().join("l.svg");
    let out = hexsse(&[
        "lattice",
        "--lx",
        "5",
        "--ly",
        "2",
        "--json",
        json.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc["sites"].as_array().unwrap().len(), 36);
    assert!(fs::read_to_string(svg).unwrap().starts_with("<svg"));
}
