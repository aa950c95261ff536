use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use gaussian_pnr::decompositions::{NormalParameters, NormalTriple};
use gaussian_pnr::gaussian::make_squeezed_thermal;
use gaussian_pnr::random::random_orthosymplectic;
use gaussian_pnr::PhotonDistribution;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussian-pnr"))
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        let mut pipe = child.stdin.take().unwrap();
        if let Some(text) = stdin {
            pipe.write_all(text.as_bytes()).unwrap();
        }
    }
    child.wait_with_output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, v: &impl serde::Serialize) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn params(modes: usize, t: &[(f64, usize, f64)]) -> NormalParameters {
    NormalParameters::new(modes, t.iter().map(|&(l, k, d)| NormalTriple::new(l, k, d)).collect())
}

#[test]
fn forward_on_vacuum() {
    let out = run(&["forward"], Some(r#"{"modes":2,"cov":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],"disp":[0,0,0,0]}"#));
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert_eq!(v["probs"], serde_json::json!([1.0]));
}

#[test]
fn equivalent_under_passive_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = make_squeezed_thermal(&[1.5, 2.0], &[0.3, -0.2], DVector::from_vec(vec![0.4, 0.0, -0.7, 0.2])).unwrap();
    let b = a.apply_symplectic(&random_orthosymplectic(2, &mut rng)).unwrap();
    let (pa, pb) = (write(dir.path(), "a.json", &a), write(dir.path(), "b.json", &b));
    let out = run(&["equivalent", "-i", &pa, "-i", &pb], None);
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["equivalent"], Value::Bool(true));

    let c = a.with_displacement(DVector::from_vec(vec![0.4, 0.0, -0.7, 0.5])).unwrap();
    let pc = write(dir.path(), "c.json", &c);
    let out = run(&["equivalent", "-i", &pa, "-i", &pc], None);
    assert_eq!(stdout_json(&out)["equivalent"], Value::Bool(false));
}

#[test]
fn invert_thermal() {
    // geometric distribution of a single thermal mode with ν = 3
    let probs: Vec<f64> = (0..80).map(|n| 0.5f64.powi(n + 1)).collect();
    let input = serde_json::json!({ "probs": probs, "tail_bound": 0.5f64.powi(80) }).to_string();
    let out = run(&["invert", "--modes", "1"], Some(&input));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let triples = v["params"]["triples"].as_array().unwrap();
    assert_eq!(triples.len(), 1);
    assert!((triples[0]["lambda"].as_f64().unwrap() - 3.0).abs() < 1e-8);
    assert_eq!(triples[0]["k"], 2);
    assert!(triples[0]["d"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(v["converged"], Value::Bool(true));
}

#[test]
fn forward_invert_forward_reproduces_the_distribution() {
    let corpus = [
        params(1, &[(3.0, 2, 0.0)]),
        params(1, &[(2.0, 1, 0.8), (0.5, 1, 0.3)]),
        params(2, &[(4.0, 1, 0.5), (1.0, 2, 1.2), (0.25, 1, 0.0)]),
        params(2, &[(2.5, 2, 0.6), (1.2, 1, 0.0), (0.6, 1, 0.9)]),
        params(3, &[(3.0, 1, 0.0), (1.5, 2, 0.4), (1.0, 2, 0.7), (0.4, 1, 0.2)]),
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, f) in corpus.iter().enumerate() {
        let pf = write(dir.path(), &format!("f{i}.json"), f);
        let first = run(&["forward", "-i", &pf], None);
        assert!(first.status.success());
        let inverted = run(&["invert"], Some(std::str::from_utf8(&first.stdout).unwrap()));
        assert!(inverted.status.success(), "corpus {i}: {}", String::from_utf8_lossy(&inverted.stderr));
        let second = run(&["forward"], Some(std::str::from_utf8(&inverted.stdout).unwrap()));
        assert!(second.status.success());
        let p1: PhotonDistribution = serde_json::from_slice(&first.stdout).unwrap();
        let p2: PhotonDistribution = serde_json::from_slice(&second.stdout).unwrap();
        assert!(p1.max_abs_diff(&p2) <= 1e-6, "corpus {i}: {}", p1.max_abs_diff(&p2));
    }
}

#[test]
fn output_bytes_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pf = write(dir.path(), "f.json", &params(2, &[(4.0, 1, 0.5), (1.0, 2, 1.2), (0.25, 1, 0.0)]));
    for args in [vec!["forward", "-i", &pf], vec!["forward", "--csv", "-i", &pf]] {
        let a = run(&args, None);
        let b = run(&args, None);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout);
    }
    let pd = dir.path().join("p.json");
    let forward = run(&["forward", "-i", &pf, "-o", pd.to_str().unwrap()], None);
    assert!(forward.status.success() && forward.stdout.is_empty());
    let sample = |seed: &str| run(&["sample", "-i", pd.to_str().unwrap(), "--samples", "200", "--seed", seed], None).stdout;
    assert_eq!(sample("7"), sample("7"));
    assert_ne!(sample("7"), sample("8"));

    let inverted = || run(&["invert", "-i", pd.to_str().unwrap()], None).stdout;
    assert_eq!(inverted(), inverted());
}

#[test]
fn exit_codes() {
    let out = run(&["forward"], Some("{\"modes\": 1,\n \"cov\": [[1, 0], [0, 1]\n"));
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "{msg}");

    let out = run(&["validate"], Some(r#"{"modes":1,"cov":[[0.5,0],[0,0.5]],"disp":[0,0]}"#));
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["physical"], Value::Bool(false));

    let out = run(&["representative"], Some(r#"{"modes":1,"triples":[{"lambda":2,"k":1,"d":0},{"lambda":0.3,"k":1,"d":0}]}"#));
    assert_eq!(out.status.code(), Some(2));

    // a fit that cannot succeed with a single eigenvalue
    let probs: Vec<f64> = (0..60).map(|n| if n == 2 { 1.0 } else { 0.0 }).collect();
    let input = serde_json::json!({ "probs": probs, "modes": 1 }).to_string();
    let out = run(&["invert", "--max-components", "1"], Some(&input));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn oracle_matches_forward_on_a_diagonal_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = make_squeezed_thermal(&[1.4, 1.0], &[0.2, 0.35], DVector::from_vec(vec![0.3, -0.4, 0.0, 0.6])).unwrap();
    let ps = write(dir.path(), "s.json", &state);
    let a: PhotonDistribution = serde_json::from_slice(&run(&["oracle", "-i", &ps], None).stdout).unwrap();
    let b: PhotonDistribution = serde_json::from_slice(&run(&["forward", "-i", &ps], None).stdout).unwrap();
    assert!(a.truncated(20).max_abs_diff(&b.truncated(20)) < 1e-9);

    let out = run(&["oracle", "--csv"], Some(r#"{"modes":[{"nu":3,"r":0,"alpha":[0,0]}]}"#));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("n,p_n\n0,5e-1\n1,2.5e-1\n"), "{text}");
}
