use std::path::Path;
use std::process::{Command, Output};

fn mprlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mprlab"))
        .args(args)
        .env("MPRLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn body(csv: &str) -> String {
    assert!(csv.starts_with("# kind="), "{csv}");
    csv.split_once('\n').unwrap().1.to_string()
}

#[test]
fn analyze_reports_classical_optimum() {
    let out = mprlab(&["analyze"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(lines.next(), Some("M,lambda_star,S_star_bps,S_per_M_norm"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert!(row[3].starts_with("0.3678"), "{row:?}");
}

#[test]
fn fixed_point_row_agrees_with_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "fp.toml", "[fixed-point]\nn = 50\nm = 1\nr = 2\nw0 = 32\n");
    let out_path = dir.path().join("fp.csv");
    let out = mprlab(&["fixed-point", "--config", &cfg, "--out", out_path.to_str().unwrap(), "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(
        lines.next(),
        Some("N,M,r,W0,pt_analytic,pc_analytic,pt_sim,pc_sim,thr_analytic_bps,thr_sim_bps")
    );
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row[6] - row[4]).abs() / row[4] < 0.05, "{row:?}");
}

#[test]
fn malformed_config_names_the_violated_condition() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[fixed-point]\nr = 0.5\n");
    let out = mprlab(&["fixed-point", "--config", &cfg]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("r > 1"), "{err}");

    let cfg = write(dir.path(), "typo.toml", "[scaling]\nm_maxx = 4\n");
    let out = mprlab(&["analyze", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));

    let out = mprlab(&["analyze", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(1));

    let out = mprlab(&["reproduce", "fig4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "[simulate]\nn = 20\nm = 2\nruns = 3\nmeasure_slots = 20000\nwarmup_slots = 1000\n\
         [phy-demo]\ntrials = 5\nsnr_db = [10, 20]\n",
    );
    for verb in ["simulate", "phy"] {
        let a = mprlab(&[verb, "--config", &cfg, "--seed", "42"]);
        let b = mprlab(&[verb, "--config", &cfg, "--seed", "42"]);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{verb}");
        if verb == "simulate" {
            let c = mprlab(&[verb, "--config", &cfg, "--seed", "43"]);
            let (a, c) = (String::from_utf8(a.stdout).unwrap(), String::from_utf8(c.stdout).unwrap());
            assert_ne!(body(&a), body(&c));
        }
    }
}

#[test]
fn reproduce_writes_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = mprlab(&["reproduce", "fig2", "--out", d]);
    assert!(out.status.success());
    for stem in ["fig2_basic", "fig2_rts-cts"] {
        let text = std::fs::read_to_string(dir.path().join(format!("{stem}.csv"))).unwrap();
        assert_eq!(text.lines().nth(1), Some("M,lambda_star,S_star_bps,S_per_M_norm"));
        assert_eq!(text.lines().count(), 32);
    }
    let out = mprlab(&["reproduce", "table1", "--out", d]);
    assert!(out.status.success());
    let t = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert!(t.contains("difs,28,us"));
}

#[test]
fn optimize_r_and_simo_headers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "o.toml", "[optimal-r]\nm = [2, 10]\nmodes = \"aloha\"\n[beb-efficiency]\nm = 10\nmodes = [\"aloha\"]\n");
    let out = String::from_utf8(mprlab(&["optimize-r", "--config", &cfg]).stdout).unwrap();
    assert_eq!(out.lines().nth(1), Some("M,mode,r_star,S_star_bps,S_beb_bps,beb_ratio"));
    assert_eq!(out.lines().count(), 4);
    let out = String::from_utf8(mprlab(&["optimize-r", "--efficiency", "--config", &cfg]).stdout).unwrap();
    let ratio: f64 = out.lines().nth(2).unwrap().rsplit(',').next().unwrap().parse().unwrap();
    assert!((0.75..=0.85).contains(&ratio), "{ratio}");
    let out = String::from_utf8(mprlab(&["simo"]).stdout).unwrap();
    assert!(out.lines().nth(1).unwrap().starts_with("M,S_mpr_bps,S_simo_bps"));
}
