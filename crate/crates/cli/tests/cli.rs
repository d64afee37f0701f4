use std::path::Path;
use std::process::{Command, Output};

use chiral_bag_cli::envelope::{Point, ResultEnvelope};
use chiral_bag_cli::{emit_plot_data, CliError};

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chiral-bag"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CHIRAL_BAG_CONFIG")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn wz_solve_shipped_ansatz_writes_constraints() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["wz-solve", "a45"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("constraints.json")).unwrap()).unwrap();
    assert_eq!(c["display"], serde_json::json!(["f1 - 2 f3' = 0", "f2 - 2 f4' = 0"]));
    let terms = &c["constraints"][0]["terms"];
    assert_eq!(terms[1]["function"], "f3");
    assert_eq!(terms[1]["derivative_order"], 1);
    assert_eq!(terms[1]["coefficient"], "-2");
    let env: ResultEnvelope = serde_json::from_str(&std::fs::read_to_string(dir.path().join("wz-solve.json")).unwrap()).unwrap();
    assert!(env.pass);
    assert_eq!(env.config_digest.len(), 64);
}

#[test]
fn wz_solve_reads_ansatz_files() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("h.wz");
    std::fs::write(
        &file,
        "ansatz a3\nvariation gauge\nunknowns H\nboundary dA[i] eps[i,j,k] A[k:j]\nboundary dA[i] eps[i,j,k] D[j](A[k] H)\n",
    )
    .unwrap();
    let o = bin(&["wz-solve", file.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("H' = 0"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kernel\": 1}").unwrap();
    assert_eq!(code(&bin(&["coeff-table", "--config", bad.to_str().unwrap()], dir.path())), 2);
    assert_eq!(code(&bin(&["wz-solve", "/nonexistent/ansatz.wz"], dir.path())), 2);
    assert_eq!(code(&bin(&["coeff-table", "--tolerance-scale", "-1"], dir.path())), 2);
    assert_eq!(code(&bin(&["coeff-table", "--jobs", "0"], dir.path())), 2);
    assert_eq!(code(&bin(&["no-such-command"], dir.path())), 2);
    assert_eq!(code(&bin(&["coeff-table", "--plot", ""], dir.path())), 2);
    assert_eq!(code(&bin(&["coeff-table", "--plot", "f6,nope"], dir.path())), 2);
}

#[test]
fn config_path_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "not json").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_chiral-bag"))
        .args(["coeff-table", "--out"])
        .arg(dir.path())
        .env("CHIRAL_BAG_CONFIG", &bad)
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn assertion_failure_exits_1_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    // Accuracy targets far below double precision cannot be met.
    let o = bin(&["coeff-table", "--tolerance-scale", "1e-12"], dir.path());
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("assertion failed: "));
    let env: ResultEnvelope = serde_json::from_str(&std::fs::read_to_string(dir.path().join("coeff-table.json")).unwrap()).unwrap();
    assert!(!env.pass);
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn coeff_table_csv_plot_data_and_determinism() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = bin(&["coeff-table", "--jobs", "2", "--plot", "f6,C_profile"], a.path());
    let ob = bin(&["coeff-table", "--jobs", "2", "--plot", "f6,C_profile"], b.path());
    assert_eq!(code(&oa), 0, "{}", String::from_utf8_lossy(&oa.stdout));
    assert_eq!(code(&ob), 0);
    let table = read(&a.path().join("coeff_table.csv"));
    assert_eq!(table, read(&b.path().join("coeff_table.csv")));
    assert_eq!(read(&a.path().join("coeff-table_plot.csv")), read(&b.path().join("coeff-table_plot.csv")));
    let ea: ResultEnvelope = serde_json::from_str(&read(&a.path().join("coeff-table.json"))).unwrap();
    let eb: ResultEnvelope = serde_json::from_str(&read(&b.path().join("coeff-table.json"))).unwrap();
    assert_eq!(ea.config_digest, eb.config_digest);

    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "theta,c2,c3,c4,f6,G4_over_eps,err_c2,err_c3,err_c4");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!((r[3] - r[4]).abs() < 1e-6 * r[4], "c4 vs f6 column: {r:?}");
    }
    assert!(table.lines().nth(1).unwrap().contains('e'), "scientific notation");

    let plot = read(&a.path().join("coeff-table_plot.csv"));
    assert!(plot.starts_with("series,x,y,yerr\n"));
    let f6: Vec<f64> = plot.lines().filter(|l| l.starts_with("f6,")).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(f6.len(), 5);
    assert!(f6.windows(2).all(|w| w[1] > w[0]) && f6[0] > 0.0);
    let profile: Vec<f64> =
        plot.lines().filter(|l| l.starts_with("C_profile,")).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    let last = profile.last().unwrap().abs();
    assert!(last < 1e-6 * profile.iter().fold(0.0f64, |m, v| m.max(v.abs())), "profile decays");

    // Re-emit from the saved envelope.
    let c = tempfile::tempdir().unwrap();
    let env_path = a.path().join("coeff-table.json");
    let o = bin(&["plot", env_path.to_str().unwrap(), "--series", "c4"], c.path());
    assert_eq!(code(&o), 0);
    assert!(read(&c.path().join("coeff-table_plot.csv")).lines().skip(1).all(|l| l.starts_with("c4,")));
    assert_eq!(code(&bin(&["plot", env_path.to_str().unwrap()], c.path())), 2);
}

#[test]
fn plot_requests_are_validated() {
    let mut env = ResultEnvelope {
        command: "x".into(),
        config_digest: String::new(),
        values: vec![],
        assertions: vec![],
        pass: true,
        series: Default::default(),
        data: Default::default(),
        wall_time_s: 0.0,
    };
    env.series.insert("s".into(), vec![Point { x: 1.0, y: 2.0, yerr: 0.1 }]);
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_plot_data(&env, &[], dir.path()), Err(CliError::Usage(_))));
    assert!(matches!(emit_plot_data(&env, &["t".into()], dir.path()), Err(CliError::Usage(_))));
    let p = emit_plot_data(&env, &["s".into()], dir.path()).unwrap();
    assert_eq!(read(&p), "series,x,y,yerr\ns,1e0,2e0,1e-1\n");
}

#[test]
fn fiber_spectrum_command_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["fiber-spectrum", "--plot", "eigenvalues"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let plot = read(&dir.path().join("fiber-spectrum_plot.csv"));
    assert_eq!(plot.lines().count(), 1 + 52);
}
