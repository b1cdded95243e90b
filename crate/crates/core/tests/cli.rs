use serde_json::Value;
use sumprod::cli::run;

fn invoke(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("sumprod").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = invoke(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn verify_e4_reports_115_and_729() {
    let v = json(&["verify", "--thm", "e4", "--p", "rational", "--A", "1,2,4", "--C", "1,2,4", "--D", "1,2,4"]);
    assert_eq!(v[0]["lhs"], 115);
    assert_eq!(v[0]["rhs"], 729);
}

#[test]
fn corollary_ratio_near_2_35() {
    let v = json(&["corollary", "--p", "rational", "--A", "1,2,4"]);
    let ratio = v[0]["ratio"].as_f64().unwrap();
    assert!((ratio - 2.35).abs() < 0.01, "{ratio}");
}

#[test]
fn singleton_energy_is_one() {
    let v = json(&["energy", "--n", "2", "--op", "ratio", "--A", "1", "--D", "1"]);
    assert_eq!(v[0]["energy"], 1);
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let (code, _, err) = invoke(&["verify", "--thm", "e9", "--A", "1"]);
    assert_eq!(code, 2);
    assert!(err.contains("--thm"), "{err}");
    let (code, _, err) = invoke(&["energy", "--n", "2", "--A", "1,2", "--p", "91"]);
    assert_eq!(code, 2);
    assert!(err.contains("91"), "{err}");
    let (code, _, _) = invoke(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn every_subcommand_runs() {
    for args in [
        &["energy", "--n", "4", "--op", "ratio", "--p", "13", "--A", "1,2,4", "--D", "1,3"][..],
        &["decompose", "--p", "rational", "--A", "1,2,4"],
        &["refine", "--p", "rational", "--A", "1,2,4", "--force"],
        &["incidence", "--p", "13", "--A", "1,2,4"],
        &["verify", "--thm", "e2", "--p", "13", "--A", "1,2", "--C", "1,3", "--D", "1,5"],
        &["trace", "--p", "rational", "--A", "1,2,4", "--force"],
        &["search", "--p", "13", "--n", "3", "--objective", "two_products"],
        &["corollary", "--p", "4294967311", "--A", "coset(2,30)"],
    ] {
        for format in ["json", "csv", "text"] {
            let mut full = args.to_vec();
            full.extend(["--format", format]);
            let (code, out, err) = invoke(&full);
            assert_eq!(code, 0, "{full:?}: {err}");
            assert!(!out.is_empty(), "{full:?}");
        }
    }
}

#[test]
fn csv_rows_match_instances_times_steps() {
    let args = ["trace", "--p", "rational", "--A", "1,2,4", "--A", "1,2,3", "--force"];
    let reports = json(&args);
    let steps: usize = reports.as_array().unwrap().iter().map(|r| 1 + r["trace"].as_array().map_or(0, Vec::len)).sum();
    let mut csv_args = args.to_vec();
    csv_args.extend(["--format", "csv"]);
    let (code, out, _) = invoke(&csv_args);
    assert_eq!(code, 0);
    let mut rdr = csv::Reader::from_reader(out.as_bytes());
    assert_eq!(rdr.records().count(), steps);
}

#[test]
fn config_file_matches_flags() {
    let args = ["verify", "--thm", "e4", "--p", "13", "--A", "1,2,4", "--C", "1,3", "--D", "2,5"];
    let mut dump = args.to_vec();
    dump.push("--dump-config");
    let (code, toml, _) = invoke(&dump);
    assert_eq!(code, 0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, toml).unwrap();
    let from_file = json(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(from_file, json(&args));
}

#[test]
fn search_ledger_is_appended() {
    let dir = tempfile::tempdir().unwrap();
    let ledger = dir.path().join("ledger.csv");
    for _ in 0..2 {
        let (code, _, err) =
            invoke(&["search", "--p", "7", "--n", "2", "--objective", "shift_product", "--ledger", ledger.to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
    }
    let text = std::fs::read_to_string(&ledger).unwrap();
    assert_eq!(text.lines().next(), Some("objective,p,n,set,value,seed"));
    assert_eq!(text.lines().count(), 3);
}
