use std::path::Path;
use std::process::{Command, Output};

fn floc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floc"))
        .args(args)
        .env_remove("FLOC_PARALLEL")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sweep_is_deterministic_and_has_header() {
    let args = ["sweep", "--model", "er,ba", "--nodes", "10", "--links", "17", "--mu-list", "2,3", "--instances", "3", "--seed", "5"];
    let a = floc(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(text.starts_with("experiment,model,instance,seed,mu,k,mechanism,metric,value\n"));
    assert!(!text.contains('\r'));
    let mut more = args.to_vec();
    more.extend(["--parallel", "3"]);
    assert_eq!(a.stdout, floc(&more).stdout);
}

#[test]
fn out_file_gets_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = floc(&["tightness", "--model", "rg", "--links", "51", "--instances", "2", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(&out).unwrap().contains("node_coincidence_rate"));
    assert!(dir.path().join("t.csv.meta.json").exists());
}

#[test]
fn gen_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("g.edges");
    let o = floc(&["gen", "--model", "ba", "--nodes", "9", "--param", "2", "--monitors", "3", "--seed", "1", "--out", path(&edges)]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("g.monitors").exists());

    let report = dir.path().join("report");
    let o = floc(&["analyze", path(&edges), "--out", path(&report)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csp = std::fs::read_to_string(report.join("csp.csv")).unwrap();
    assert!(csp.starts_with("node_label,gamma_star,gamma_gm_min,pi,omega_lower,omega_upper,applicability,mechanism\n"));
    assert_eq!(csp.lines().count(), 1 + 2 * 6);
    assert!(report.join("oracle.csv").exists());
    let sets = std::fs::read_to_string(report.join("sets.json")).unwrap();
    assert!(sets.trim_start().starts_with('['), "{sets}");
}

#[test]
fn exit_codes() {
    assert_eq!(code(&floc(&["sweep", "--mu-list", "1"])), 1);
    assert_eq!(code(&floc(&["sweep", "--mechanisms", "CAP,XYZ"])), 1);
    assert_eq!(code(&floc(&["frobnicate"])), 1);
    assert_eq!(code(&floc(&["oracle-check", "--nodes", "30", "--oracle-budget", "14"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{not json").unwrap();
    assert_eq!(code(&floc(&["sweep", "--config", path(&cfg)])), 1);

    let edges = dir.path().join("a.edges");
    std::fs::write(&edges, "a b\nb c\n").unwrap();
    let missing = dir.path().join("none.monitors");
    assert_eq!(code(&floc(&["analyze", path(&edges), "--monitors", path(&missing)])), 2);
}

#[test]
fn oracle_check_status() {
    let ok = floc(&["oracle-check", "--instances", "10", "--seed", "2"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let bad = floc(&["oracle-check", "--instances", "10", "--fault", "pi-off-by-one"]);
    assert_eq!(code(&bad), 3);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("\"violations\""));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"experiment": "sweep", "instances": 2, "mu_list": [2], "seed": 3}"#).unwrap();
    let base = floc(&["sweep", "--config", path(&cfg), "--model", "er", "--nodes", "8", "--links", "12"]);
    assert_eq!(code(&base), 0, "{}", String::from_utf8_lossy(&base.stderr));
    let over = floc(&["sweep", "--config", path(&cfg), "--model", "er", "--nodes", "8", "--links", "12", "--seed", "4"]);
    assert_ne!(base.stdout, over.stdout);
    let csv = String::from_utf8(base.stdout).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(4) == Some("2")));
}
