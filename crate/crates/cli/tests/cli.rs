use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn ipw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ipw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn temp_problem(text: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::Builder::new().suffix(".ipw").tempfile().unwrap();
    file.write_all(text.as_bytes()).unwrap();
    file
}

#[test]
fn bundled_problems_validate() {
    for name in ["so3", "sl2", "abelian", "product", "rank_one", "affine_bundle"] {
        let path = problem(&format!("{name}.ipw"));
        let out = ipw(&["validate", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
    }
}

#[test]
fn exit_codes_follow_failure_kind() {
    let parse = temp_problem("[manifold]\ncoordinates = a, b\n[poisson]\na,b = a +\n");
    let out = ipw(&["validate", parse.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = &json(&out)["error"];
    assert_eq!(err["line"], 4);
    assert_eq!(err["position"], 3);

    let not_poisson = temp_problem("[manifold]\ncoordinates = a, b, c\n[poisson]\na,b = c\nb,c = c\na,c = b\n");
    let out = ipw(&["validate", not_poisson.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let not_sub = temp_problem("[manifold]\ncoordinates = a, b, c\n[submanifold]\nnormal = c\n[poisson]\na,c = 1\n");
    let out = ipw(&["validate", not_sub.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"]["offending"][0], "a,c");

    let out = ipw(&["validate", "/nonexistent/problem.ipw"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn text_errors_go_to_stderr() {
    let parse = temp_problem("[manifold]\ncoordinates = a\nnonsense\n");
    let out = ipw(&["--format", "text", "validate", parse.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn extract_reports_curvature() {
    let path = problem("product.ipw");
    let out = ipw(&["extract", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["data"]["psi"]["x1,x2"], "1");
    assert_eq!(v["data"]["kappa"]["x1,x2"]["y1"], "1");
    assert_eq!(v["input_echo"]["command"], "extract");
}

#[test]
fn bracket_of_base_coordinates() {
    let path = problem("product.ipw");
    let out = ipw(&["bracket", path.to_str().unwrap(), "x1", "x2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["bracket"]["result"], "1 + y1");

    let out = ipw(&["bracket", path.to_str().unwrap(), "y1^2", "x2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_pt_holds_on_bundled_problems() {
    for name in ["so3", "rank_one", "affine_bundle"] {
        let path = problem(&format!("{name}.ipw"));
        let out = ipw(&["verify-pt", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let v = json(&out);
        for key in ["pt1", "pt2", "pt3"] {
            assert_eq!(v["pt"][key]["holds"], true, "{name} {key}");
        }
    }
}

#[test]
fn theorem1_on_so3_is_trivial() {
    let path = problem("so3.ipw");
    let out = ipw(&["theorem1", path.to_str().unwrap(), "--max-weight", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["verdict"].as_str().unwrap().starts_with("trivial"));
    assert_eq!(v["input_echo"]["max_weight"], 3);
}

#[test]
fn max_weight_is_required_somewhere() {
    let file = temp_problem("[manifold]\ncoordinates = a, b\n[poisson]\na,b = 1\n");
    let out = ipw(&["cohomology", file.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = ipw(&["cohomology", file.path().to_str().unwrap(), "--max-weight", "2"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn format_flag_overrides_file_option() {
    let file = temp_problem("[manifold]\ncoordinates = a, b\n[poisson]\na,b = 1\n[options]\nformat = text\n");
    let out = ipw(&["validate", file.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("valid"));
    let out = ipw(&["--format", "json", "validate", file.path().to_str().unwrap()]);
    assert!(json(&out)["verdict"].is_string());
}
