use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn kglab(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kglab"));
    cmd.args(args).arg("--config").arg(config).env_remove("KGLAB_OUT");
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const GAUSS_D3: &str = r#"
schema_version = 1

[kernel]
dimension = 3
mass = 0.5
nodes_per_axis = 48
cutoff = 8.0

[[test_functions]]
name = "f"
kind = "gaussian"
center = [0.0, 0.0, 0.0]
width = 1.0

[[test_functions]]
name = "g"
kind = "gaussian"
center = [1.0, 0.5, 0.0]
widths = [1.0, 0.8, 1.2]

[[polynomials]]
name = "one"
terms = [[[0, 0, 0], 1.0, 0.0]]
"#;

#[test]
fn pair_of_a_function_with_itself_is_zero_and_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = kglab(&["pair"], &configs().join("pair.toml"), Some(out.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.path().join("pair.json"));
    let row = &r["results"][1];
    assert_eq!(row["f"], "f");
    assert_eq!(row["g"], "f");
    assert_eq!(row["value"][0].as_f64(), Some(0.0));
    assert_eq!(row["value"][1].as_f64(), Some(0.0));
    assert_eq!(row["status"], "PASS");
    let a0 = r["conventions"]["a0"].as_f64().unwrap();
    assert!((a0 - (2.0 * std::f64::consts::PI).powi(-3)).abs() < 1e-18);
    assert_eq!(r["config"]["kernel"]["nodes_per_axis"], 128);
    let csv = std::fs::read_to_string(out.path().join("pair.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("f,g,kernel,re,im,error_estimate,scale,converged,status"));
}

#[test]
fn missing_mass_is_a_config_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_D3.replace("mass = 0.5\n", "");
    let cfg = write(&dir, "c.toml", &(text + "[[pairs]]\nf = \"f\"\ng = \"g\"\nkernel = \"one\"\n"));
    let out = dir.path().join("out");
    let o = kglab(&["pair"], &cfg, Some(&out));
    assert_eq!(o.status.code(), Some(3));
    let e = stderr(&o);
    assert!(e.contains("missing field `mass`"), "{e}");
    assert!(e.contains("c.toml:4:"), "{e}");
    assert!(!out.exists(), "nothing may be written for an invalid config");
}

#[test]
fn unknown_keys_and_bad_references_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_D3.replace("width = 1.0", "width = 1.0\nwidht = 1.0");
    let cfg = write(&dir, "a.toml", &text);
    let o = kglab(&["pair"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown field `widht`"));

    let cfg = write(&dir, "b.toml", &format!("{GAUSS_D3}[[pairs]]\nf = \"f\"\ng = \"h\"\nkernel = \"one\"\n"));
    let o = kglab(&["pair"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("unknown test function `h`"));

    let cfg = write(&dir, "c.toml", &GAUSS_D3.replace("schema_version = 1", "schema_version = 9"));
    let o = kglab(&["pair"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("schema_version"));

    let odd = format!(
        "{GAUSS_D3}[[polynomials]]\nname = \"p0\"\nterms = [[[1, 0, 0], 1.0, 0.0]]\n\
         [[pairs]]\nf = \"f\"\ng = \"g\"\nkernel = \"p0\"\n"
    );
    let cfg = write(&dir, "d.toml", &odd);
    let o = kglab(&["pair"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("p0"));
}

#[test]
fn default_verify_suite_passes() {
    let out = tempfile::tempdir().unwrap();
    let o = kglab(&["verify"], &configs().join("verify.toml"), Some(out.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.path().join("verify.json"));
    let suites = r["results"].as_array().unwrap();
    assert_eq!(suites.len(), 6);
    for s in suites {
        assert_eq!(s["status"], "PASS", "{s}");
    }
    let locality = &suites[0]["cases"];
    assert_eq!(locality[1]["status"], "NOT-APPLICABLE");
    assert!(locality[1]["reason"].as_str().unwrap().contains("skipped"));
    let odd = &suites[5]["cases"][0];
    assert_eq!(odd["status"], "PASS");
    let d = &odd["details"];
    assert!(d["symmetric_part"].as_f64().unwrap() > 1e-3 * d["scale"].as_f64().unwrap());
}

#[test]
fn unconverged_quadrature_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_D3.replace("nodes_per_axis = 48", "nodes_per_axis = 8").replace("cutoff = 8.0", "cutoff = 12.0")
        + "[[pairs]]\nf = \"f\"\ng = \"g\"\nkernel = \"one\"\n\
           [verify]\nsuites = [\"antisymmetry\"]\n[[verify.antisymmetry]]\nf = \"f\"\ng = \"g\"\nkernel = \"one\"\n";
    let cfg = write(&dir, "c.toml", &text);
    let o = kglab(&["pair"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = kglab(&["verify"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(2));
    let r = json(&dir.path().join("verify.json"));
    assert_eq!(r["results"][0]["status"], "INCONCLUSIVE");
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = GAUSS_D3.replace("mass = 0.5", "mass = 0.5\ntolerances = { kg = 1e-300 }")
        + "[verify]\nsuites = [\"kg\"]\n[[verify.kg]]\nf = \"f\"\ng = \"g\"\nkernel = \"one\"\nside = \"g\"\n";
    let cfg = write(&dir, "c.toml", &text);
    let o = kglab(&["verify"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.contains(",FAIL,"));
    // The other tolerances keep their defaults.
    let r = json(&dir.path().join("verify.json"));
    assert_eq!(r["config"]["kernel"]["tolerances"]["local"].as_f64(), Some(1e-6));
}

#[test]
fn sqrt_analyze_reproduces_the_three_cases() {
    let out = tempfile::tempdir().unwrap();
    let o = kglab(&["sqrt-analyze"], &configs().join("sqrt.toml"), Some(out.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.path().join("sqrt.json"));
    let cases: Vec<&str> = r["results"].as_array().unwrap().iter().map(|x| x["case"].as_str().unwrap()).collect();
    assert_eq!(cases, ["i", "ii", "iii"]);
    let rotated = &r["results"][2]["classification"];
    assert_eq!(rotated["band_table"].as_array().unwrap().len(), 5);
    let slope = rotated["band_slope"].as_f64().unwrap();
    assert!((0.7..1.3).contains(&slope), "{slope}");
    let disc = std::fs::read_to_string(out.path().join("sqrt_discontinuities_rotated.csv")).unwrap();
    assert!(disc.starts_with("p0,p1,pp0,pp1,b_re,b_im,bp_re,bp_im"));
    assert!(disc.lines().count() > 1);
    let bands = std::fs::read_to_string(out.path().join("sqrt_bands.csv")).unwrap();
    assert_eq!(bands.lines().count(), 1 + 15);
}

#[test]
fn sqrt_undetermined_and_mismatch_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let base = "schema_version = 1\n[[polynomials]]\nname = \"shifted\"\nterms = [[[0, 0], 2.0, 0.0], [[1, 0], 1.0, 0.0]]\n\
                [sqrt]\nsamples = 20000\n[[sqrt.fields]]\npolynomial = \"shifted\"\n";
    let cfg = write(&dir, "u.toml", base);
    let o = kglab(&["sqrt-analyze"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let cfg = write(&dir, "m.toml", &format!("{base}expect = \"ii\"\n"));
    let o = kglab(&["sqrt-analyze"], &cfg, Some(dir.path()));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fock_report_asserts_standard_constant_and_flags_nonlocal_adjoint() {
    let out = tempfile::tempdir().unwrap();
    let o = kglab(&["fock"], &configs().join("fock.toml"), Some(out.path()));
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&out.path().join("fock.json"));
    let res = &r["results"];
    let a0 = res["a0"].as_f64().unwrap();
    assert_eq!(r["conventions"]["a0"].as_f64(), Some(a0));
    assert_eq!(res["lattice"]["modes"], 27);
    let one = &res["commutators"][0];
    assert!((one["implied_a0"][0].as_f64().unwrap() - a0).abs() <= 1e-10 * a0);
    assert!(one["commutator"]["deviation"].as_f64().unwrap() <= 1e-12);
    let minus = &res["commutators"][1];
    let (l1, l2) = (one["lambda"][1].as_f64().unwrap(), minus["lambda"][1].as_f64().unwrap());
    assert!((l1 + l2).abs() <= 1e-12 * l1.abs(), "{l1} {l2}");
    let probe = &res["probes"][0];
    assert_eq!(probe["probe"]["verdict"], "NONLOCAL-ADJOINT");
    assert_eq!(probe["status"], "PASS");
    assert!(probe["probe"]["ratio_adj"].as_f64().unwrap() >= 10.0);
}

#[test]
fn fock_dimension_cap_is_checked_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("fock.toml")).unwrap().replace("n_tot = 3", "n_tot = 6");
    let cfg = write(&dir, "c.toml", &text);
    let out = dir.path().join("out");
    let o = kglab(&["fock"], &cfg, Some(&out));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("exceeds the cap"));
    assert!(!out.exists());
}

fn figure1(dir: &TempDir, x: &str) -> (Output, PathBuf) {
    let text = std::fs::read_to_string(configs().join("figure1.toml"))
        .unwrap()
        .replace("x = [2.0, 1.0, 0.0, 0.0]", &format!("x = {x}"));
    let cfg = write(dir, &format!("{}.toml", x.len()), &text);
    let out = dir.path().join(format!("out{}", x.len()));
    (kglab(&["figure1"], &cfg, Some(&out)), out)
}

#[test]
fn figure1_slice_and_segments() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = figure1(&dir, "[2.0, 1.0, 0.0, 0.0]");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut rdr = csv::Reader::from_path(out.join("figure1_grid.csv")).unwrap();
    let mut checked = (0, 0);
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (t, x1): (f64, f64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
        if t < -x1.abs() - 1e-9 {
            assert_eq!(&rec[2], "gray", "past cone cell ({t}, {x1})");
            checked.0 += 1;
        }
        if x1 < -5.0 && t.abs() < 2.0 {
            assert_eq!(&rec[2], "complement", "far-left cell ({t}, {x1})");
            checked.1 += 1;
        }
    }
    assert!(checked.0 > 100 && checked.1 > 100);
    let timelike = json(&out.join("figure1.json"))["results"].clone();
    assert_eq!(timelike["segments_found"], 8);
    for s in timelike["segments"].as_array().unwrap() {
        let (a, b) = (&s["start"], &s["end"]);
        let dt = b[0].as_f64().unwrap() - a[0].as_f64().unwrap();
        let dx = b[1].as_f64().unwrap() - a[1].as_f64().unwrap();
        assert!(dt > dx.abs(), "segment must be timelike");
    }

    let (o, out) = figure1(&dir, "[1.0, 1.0, 0.0]");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let lightlike = json(&out.join("figure1.json"))["results"].clone();
    assert_eq!(lightlike["lightlike"], true);
    let between = |r: &Value| r["cells"]["between_cones"].as_u64().unwrap();
    assert!(between(&timelike) > 100);
    // The degenerate double cone has no area: only cells whose centers lie on
    // the segment from 0 to x (one per diagonal step of 0.05) are gray outside the cones.
    assert!(between(&lightlike) <= 21, "{}", between(&lightlike));
    let mut rdr = csv::Reader::from_path(out.join("figure1_grid.csv")).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let (t, x1): (f64, f64) = (rec[0].parse().unwrap(), rec[1].parse().unwrap());
        if &rec[2] == "gray" && t > x1.abs() && t < 1.0 + (x1 - 1.0).abs() {
            assert!((t - x1).abs() < 1e-9 && (0.0..=1.0).contains(&t), "({t}, {x1})");
        }
    }

    let (o, _) = figure1(&dir, "[1.0, 3.0]");
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("timelike or lightlike"));
}

#[test]
fn reports_are_byte_identical_for_the_same_config_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("sqrt.toml");
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_eq!(kglab(&["sqrt-analyze", "--jobs", "1"], &cfg, Some(&a)).status.code(), Some(0));
    assert_eq!(kglab(&["sqrt-analyze", "--jobs", "3"], &cfg, Some(&b)).status.code(), Some(0));
    assert_eq!(kglab(&["sqrt-analyze", "--seed", "8"], &cfg, Some(&c)).status.code(), Some(0));
    let read = |d: &Path, f: &str| std::fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "sqrt.json"), read(&b, "sqrt.json"));
    assert_eq!(read(&a, "sqrt_discontinuities_rotated.csv"), read(&b, "sqrt_discontinuities_rotated.csv"));
    assert_ne!(read(&a, "sqrt.json"), read(&c, "sqrt.json"));
    assert_eq!(json(&c.join("sqrt.json"))["config"]["seed"], 8);
}

#[test]
fn output_directory_defaults_to_environment_variable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(&dir, "c.toml", &format!("{GAUSS_D3}[[pairs]]\nf = \"f\"\ng = \"f\"\nkernel = \"one\"\n"));
    let target = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_kglab"))
        .args(["pair", "--config"])
        .arg(&cfg)
        .env("KGLAB_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(target.join("pair.json").exists());
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "PASS");
}
