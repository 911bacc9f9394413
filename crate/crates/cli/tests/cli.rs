use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn atbench(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atbench"))
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .env_remove("ATBENCH_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON record")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn census_reports() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["latin-census", "--n", "2"]));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["op"], "latin-census");
    assert_eq!((r["even"].as_str(), r["odd"].as_str()), (Some("2"), Some("0")));
    let r = json(&atbench(dir.path(), &["latin-census", "--n", "3"]));
    assert_eq!(r["at_difference"], "0");
    assert_eq!(r["total"], "12");
}

#[test]
fn census_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = atbench(dir.path(), &["--format", "csv", "latin-census", "--n", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,total,even,odd,col_even,col_odd,row_even,row_odd,at_difference,col_difference");
    assert!(lines[1].starts_with("4,576,"));
}

#[test]
fn limits_have_their_own_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = atbench(dir.path(), &["latin-census", "--n", "7"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("resource limit"));
    assert_eq!(code(&atbench(dir.path(), &["latin-census", "--n", "6"])), 3);
    assert_eq!(code(&atbench(dir.path(), &["latin-census", "--n", "0"])), 2);
    assert_eq!(code(&atbench(dir.path(), &["integrate", "--n", "2", "--integrand", "trace"])), 2);
    assert_eq!(code(&atbench(dir.path(), &["--format", "csv", "howe-rank", "--d", "2", "--n", "2"])), 2);
    assert_eq!(code(&atbench(dir.path(), &["latin-census"])), 2);
    assert_eq!(code(&atbench(dir.path(), &["howe-rank", "--d", "3", "--n", "3", "--weight-zero"])), 3);
    assert_eq!(code(&atbench(dir.path(), &["project", "--n", "4"])), 3);
}

#[test]
fn howe_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["howe-rank", "--dim-v", "2", "--d", "4", "--n", "3"]));
    assert_eq!((r["rows"].as_u64(), r["cols"].as_u64(), r["rank"].as_u64()), (Some(35), Some(35), Some(35)));
    assert_eq!((r["injective"].as_bool(), r["surjective"].as_bool()), (Some(true), Some(true)));
    let r = json(&atbench(dir.path(), &["howe-rank", "--d", "2", "--n", "2", "--weight-zero"]));
    assert_eq!((r["rows"].as_u64(), r["cols"].as_u64(), r["rank"].as_u64()), (Some(3), Some(3), Some(3)));
    let r = json(&atbench(dir.path(), &["howe-rank", "--d", "3", "--n", "3", "--weight-zero", "--allow-large"]));
    assert_eq!(r["cols"].as_u64(), Some(280));
    assert!(r["rank"].as_u64().is_some());
}

#[test]
fn triplets_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h32.txt");
    let out = atbench(
        dir.path(),
        &["howe-rank", "--d", "3", "--n", "2", "--triplets", path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# linear map rows 10 cols 10 nnz "));
    assert!(text.contains("1/4 (x1^3)(x2^3) <- (x1 x2)(x1 x2)(x1 x2)"));
}

#[test]
fn pairings() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["pair", "--n", "2", "--left", "perm^2", "--right", "det^2"]));
    assert_eq!(r["value"], "4");
    let r = json(&atbench(dir.path(), &["pair", "--n", "2", "--left", "entry", "--right", "det^2"]));
    assert_eq!(r["value"], "-2");
    let poly = dir.path().join("q.txt");
    std::fs::write(&poly, "space matrix 2\n3 * g[1][1]^1 g[2][2]^1\n").unwrap();
    let arg = format!("file:{}", poly.display());
    let r = json(&atbench(dir.path(), &["pair", "--n", "2", "--left", &arg, "--right", "det"]));
    assert_eq!(r["value"], "3");
    assert_eq!(code(&atbench(dir.path(), &["pair", "--n", "2", "--left", "det", "--right", "det^2"])), 4);
}

#[test]
fn equivalence_at_two() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["equiv", "--n", "2"]));
    assert_eq!(r["verdict"], "consistent");
    let legs = r["legs"].as_array().unwrap();
    assert_eq!(legs.len(), 6);
    for leg in legs {
        assert_eq!(leg["nonzero"], true, "{leg}");
        assert!(leg["value"].is_string(), "{leg}");
    }
    assert_eq!(legs[0]["value"], "2");
    assert_eq!(legs[1]["value"].as_str().unwrap().trim_start_matches('-'), "2");
    assert_eq!(legs[3]["value"], "4");
    assert_eq!(legs[5]["value"], "-2");
    assert_eq!(r["det_power_coefficient"], "-2");
    assert_eq!(legs[2]["method"], "monte-carlo");
    let c = legs[2]["monte_carlo"]["mean_re"].as_f64().unwrap();
    let s = legs[2]["monte_carlo"]["stderr_re"].as_f64().unwrap();
    assert!((c - 1.0 / 3.0).abs() <= 3.0 * s);
    let e = legs[4]["monte_carlo"]["mean_re"].as_f64().unwrap();
    let s = legs[4]["monte_carlo"]["stderr_re"].as_f64().unwrap();
    assert!((e + 1.0 / 6.0).abs() <= 3.0 * s);
}

#[test]
fn equivalence_at_four_and_three() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["equiv", "--n", "4", "--samples", "2000"]));
    assert_eq!(r["verdict"], "consistent");
    for leg in r["legs"].as_array().unwrap() {
        if leg["method"] == "exact" {
            assert_eq!(leg["nonzero"], true, "{leg}");
        } else {
            assert_eq!(leg["gated"], false, "{leg}");
        }
    }
    assert!(r["cross_checks"].as_array().unwrap().iter().all(|c| c["holds"] == true));

    let r = json(&atbench(dir.path(), &["equiv", "--n", "3"]));
    assert_eq!(r["verdict"], "vacuous");
    assert!(r["note"].as_str().unwrap().contains("odd n"));
    for leg in r["legs"].as_array().unwrap() {
        if leg["method"] == "exact" {
            assert_eq!(leg["value"], "0");
        } else {
            assert_eq!(leg["method"], "skipped");
        }
    }
    assert_eq!(code(&atbench(dir.path(), &["equiv", "--n", "6"])), 3);
}

#[test]
fn cached_records_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = atbench(dir.path(), &["latin-census", "--n", "4"]);
    let second = atbench(dir.path(), &["latin-census", "--n", "4"]);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert!(String::from_utf8_lossy(&second.stderr).contains("cache hit"));
    let list = atbench(dir.path(), &["cache", "list"]);
    assert_eq!(String::from_utf8(list.stdout).unwrap().trim(), "v1|latin-census|n=4");
}

#[test]
fn corrupted_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let fresh = json(&atbench(dir.path(), &["latin-census", "--n", "4"]));
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("\"576\"", "\"575\"")).unwrap();
    }
    let out = atbench(dir.path(), &["latin-census", "--n", "4"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("evicted"));
    let again = json(&out);
    assert_eq!(again["total"], fresh["total"]);
    assert_eq!(again["at_difference"], fresh["at_difference"]);
    // Garbage in place of a record.
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        std::fs::write(entry.unwrap().path(), "not a cache entry").unwrap();
    }
    assert_eq!(json(&atbench(dir.path(), &["latin-census", "--n", "4"]))["total"], "576");
}

#[test]
fn unwritable_cache_dir_warns_and_proceeds() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = atbench(&blocker, &["latin-census", "--n", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    assert_eq!(json(&out)["total"], "12");
}

#[test]
fn environment_names_the_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_atbench"))
        .args(["cache", "path"])
        .env("ATBENCH_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), dir.path().display().to_string());
}

#[test]
fn integrals_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        let out = atbench(
            dir.path(),
            &["--no-cache", "--threads", threads, "integrate", "--n", "3", "--integrand", "perm-power", "--samples", "20000"],
        );
        let mut r = json(&out);
        r.as_object_mut().unwrap().remove("elapsed_ms");
        r
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
    assert_eq!(one["seed"].as_u64(), Some(0x00A7_5EED));
}

#[test]
fn projection_record() {
    let dir = tempfile::tempdir().unwrap();
    let r = json(&atbench(dir.path(), &["project", "--n", "2", "--samples", "50000"]));
    let coeffs = r["coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 2);
    assert!(r["cosine"].as_f64().unwrap().abs() > 0.99);
}
