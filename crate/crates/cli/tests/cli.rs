use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::{Command, Output};

use nodal_core::report::EstimateReport;

fn nodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .env_remove("NODAL_THREADS")
        .output()
        .expect("the nodal binary runs")
}

fn nodal_with_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nodal"))
        .args(args)
        .env("NODAL_THREADS", threads)
        .output()
        .expect("the nodal binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Column `name` of every data row of a CSV document.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

fn values(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn estimate_on_the_circle() {
    let o = nodal(&[
        "estimate", "--manifold", "torus1", "--field", "trig:[k=1,a=0,b=1]",
        "--estimator", "algebraic", "--resolution", "2048",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with(EstimateReport::CSV_HEADER));
    assert!(!out.contains('\r'));
    let v = values(&out, "value");
    assert_eq!(v.len(), 1);
    assert!((v[0] - 2.0).abs() < 1e-6);
}

#[test]
fn estimate_on_the_sphere() {
    let o = nodal(&[
        "estimate", "--manifold", "sphere2", "--field", "sph:[l=1,m=0,c=1]",
        "--estimator", "lipschitz", "--resolution", "256x512",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = values(&stdout(&o), "value");
    assert!((v[0] - TAU).abs() < 1e-3, "{v:?}");
}

#[test]
fn degenerate_fields_exit_with_2() {
    let o = nodal(&[
        "estimate", "--manifold", "torus2",
        "--field", "trig:[k=(1,1),a=0.5;k=(1,-1),a=-0.5]",
        "--estimator", "algebraic", "--resolution", "64",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("degenerate") && err.contains("min_eta"), "{err}");
}

#[test]
fn tangent_box_fields_exit_with_2() {
    let o = nodal(&[
        "estimate", "--manifold", "box2",
        "--field", "poly:[e=(0,1),c=1;e=(2,0),c=-1;e=(1,0),c=1;e=(0,0),c=-0.25]",
        "--estimator", "corner", "--resolution", "64",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn malformed_configs_exit_with_1_naming_the_field() {
    let cases: [(&[&str], &str); 7] = [
        (&["estimate", "--manifold", "torus4", "--field", "trig:[k=1,b=1]", "--estimator", "algebraic", "--resolution", "64"], "manifold"),
        (&["estimate", "--manifold", "torus1", "--field", "trig:[k=1,b=]", "--estimator", "algebraic", "--resolution", "64"], "field"),
        (&["estimate", "--manifold", "torus1", "--field", "trig:[k=1,b=1]", "--estimator", "simpson", "--resolution", "64"], "estimator"),
        (&["estimate", "--manifold", "torus1", "--field", "trig:[k=1,b=1]", "--estimator", "algebraic", "--resolution", "64x"], "resolution"),
        (&["estimate", "--manifold", "torus1", "--field", "trig:[k=1,b=1]", "--estimator", "algebraic", "--resolution", "128,64"], "resolution"),
        (&["estimate", "--manifold", "box1", "--field", "poly:[e=(1),c=1]", "--estimator", "algebraic", "--resolution", "64"], "estimator"),
        (&["converge", "--manifold", "torus1", "--field", "trig:[k=1,b=1]", "--estimator", "algebraic", "--resolution", "64,128"], "resolution"),
    ];
    for (args, word) in cases {
        let o = nodal(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains(word), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(nodal(&[]).status.code(), Some(1));
    assert_eq!(nodal(&["estimate", "--bogus"]).status.code(), Some(1));
    assert_eq!(nodal(&["--help"]).status.code(), Some(0));
    assert_eq!(nodal(&["--version"]).status.code(), Some(0));
    let o = nodal_with_threads("zero", &[
        "estimate", "--manifold", "torus1", "--field", "trig:[k=1,b=1]",
        "--estimator", "algebraic", "--resolution", "64",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn converge_with_an_empty_formula_list_exits_with_1() {
    let o = nodal(&[
        "converge", "--manifold", "torus2", "--field", "trig:[k=(1,0),b=1]",
        "--estimator", "", "--resolution", "64,128,256",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = nodal(&[
        "converge", "--manifold", "torus2", "--field", "trig:[k=(1,0),b=1]",
        "--resolution", "64,128,256",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn converge_rows_and_columns() {
    let o = nodal(&[
        "converge", "--manifold", "torus2",
        "--field", "trig:[k=(1,0),b=1;k=(0,1),b=0.3]",
        "--estimator", "algebraic", "--estimator", "lipschitz",
        "--resolution", "64", "--resolution", "128", "--resolution", "256",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "formula,resolution,estimate,abs_err_vs_oracle,integrand_max,min_eta,runtime_ms"
    );
    assert_eq!(lines.count(), 6);
    assert_eq!(column(&out, "formula"), ["algebraic", "algebraic", "algebraic", "lipschitz", "lipschitz", "lipschitz"]);
    assert_eq!(column(&out, "resolution"), ["64", "128", "256", "64", "128", "256"]);
    let errs = values(&out, "abs_err_vs_oracle");
    assert!(errs[..3].iter().all(|e| *e < 1e-2), "{errs:?}");
}

#[test]
fn compare_against_the_oracle() {
    let o = nodal(&[
        "compare", "--manifold", "torus2", "--field", "random:[dim=2,max_freq=3,seed=1]",
        "--estimator", "algebraic,arctan,tanh,g2:tanh", "--resolution", "256", "--tol", "1e-2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let sources = column(&out, "source");
    assert_eq!(sources.len(), 5);
    assert_eq!(sources[4], "oracle:marching_squares2d");
    assert_eq!(column(&out, "resolution")[4], "1024");
}

#[test]
fn compare_out_of_tolerance_exits_with_3() {
    let o = nodal(&[
        "compare", "--manifold", "torus2", "--field", "random:[dim=2,max_freq=3,seed=1]",
        "--estimator", "algebraic", "--resolution", "64", "--tol", "1e-9",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).lines().count() == 3, "the table is still written");
}

#[test]
fn compare_without_oracle_uses_the_median() {
    let o = nodal(&[
        "compare", "--manifold", "torus1", "--field", "trig:[k=2,b=1;k=1,a=0.3]",
        "--estimator", "algebraic,arctan,tanh", "--resolution", "512", "--no-oracle",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let v = values(&out, "value");
    let refs = values(&out, "reference");
    let mut sorted = v.clone();
    sorted.sort_by(f64::total_cmp);
    assert!(refs.iter().all(|r| *r == sorted[1]));

    let single = nodal(&[
        "compare", "--manifold", "torus1", "--field", "trig:[k=1,b=1]",
        "--estimator", "tanh", "--resolution", "512", "--no-oracle",
    ]);
    assert_eq!(single.status.code(), Some(0));
    assert_eq!(values(&stdout(&single), "rel_deviation"), [0.0]);
}

#[test]
fn field_files_and_seed_overrides() {
    let json = scratch("seed5.json");
    let spec = nodal_core::fields::syntax::parse_field("random:[dim=2,max_freq=2,seed=5]").unwrap();
    std::fs::write(&json, spec.to_json()).unwrap();
    let inline = scratch("seed5.txt");
    std::fs::write(&inline, "random:[dim=2,max_freq=2,seed=99]\n").unwrap();

    let run = |extra: &[&str]| {
        let mut args = vec!["estimate", "--manifold", "torus2", "--estimator", "arctan", "--resolution", "128", "--no-timing"];
        args.extend_from_slice(extra);
        let o = nodal(&args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdout(&o)
    };
    let from_json = run(&["--field-file", json.to_str().unwrap()]);
    let from_flag = run(&["--field", "random:[dim=2,max_freq=2,seed=5]"]);
    let overridden = run(&["--field-file", inline.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(from_json, from_flag);
    assert_eq!(overridden, from_flag);
    assert_ne!(run(&["--field-file", inline.to_str().unwrap()]), from_flag);
}

#[test]
fn output_files_and_oracle_dumps() {
    let csv = scratch("box.csv");
    let dump = scratch("box.pieces");
    let o = nodal(&[
        "compare", "--manifold", "box2",
        "--field", "trig:[k=(1,0),b=1;k=(0,1),b=0.3;k=(0,0),a=0.1]",
        "--estimator", "all", "--resolution", "256", "--oracle-resolution", "512",
        "--out", csv.to_str().unwrap(), "--dump-oracle", dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(column(&text, "source"), ["corner", "oracle:marching_squares2d"]);
    let pieces = std::fs::read_to_string(&dump).unwrap();
    assert!(pieces.lines().count() > 512);
    assert!(pieces.lines().all(|l| l.split("; ").count() == 2));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let args = [
        "converge", "--manifold", "torus2", "--field", "random:[dim=2,max_freq=3,seed=2]",
        "--estimator", "all", "--resolution", "64,96,128", "--no-timing",
    ];
    let one = nodal_with_threads("1", &args);
    let four = nodal_with_threads("4", &args);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, four.stdout);
    assert!(values(&stdout(&one), "runtime_ms").iter().all(|t| *t == 0.0));
}
