//! Golden-file checks. Each directory under `tests/golden/` holds a
//! `config.toml` and the stored reference it is compared against. Set
//! `KGLAB_REGENERATE_GOLDEN=1` to recompute the references.

use std::path::{Path, PathBuf};
use std::process::Command;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const MC_SAMPLES: usize = 10_000_000;
const MC_SEED: u64 = 20_240_611;

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn regenerate() -> bool {
    std::env::var("KGLAB_REGENERATE_GOLDEN").is_ok_and(|v| v == "1")
}

/// Importance-sampled Monte Carlo of the massless shell integral for two unit
/// Gaussians at the origin and at `b`, with closed-form transforms written out
/// independently of the library.
fn monte_carlo(b: [f64; 4], samples: usize, seed: u64) -> (Complex64, f64) {
    let two_pi = 2.0 * std::f64::consts::PI;
    let ft = |c: &[f64; 4], p: &[f64; 4]| {
        let e2: f64 = p.iter().map(|v| v * v).sum();
        let phase = p[0] * c[0] - p[1] * c[1] - p[2] * c[2] - p[3] * c[3];
        Complex64::from_polar(two_pi * two_pi * (-e2 / 2.0).exp(), phase)
    };
    let a = [0.0; 4];
    // |f̃ g̃| ∝ exp(−2|p|²) on the shell; sample N(0, 1/3) per axis.
    let var: f64 = 1.0 / 3.0;
    let norm = (two_pi * var).powf(1.5);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut sum, mut sum2) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..samples {
        let mut p = [0.0; 3];
        for v in p.iter_mut() {
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
            *v = (-2.0 * u1.ln()).sqrt() * (two_pi * u2).cos() * var.sqrt();
        }
        let r2: f64 = p.iter().map(|v| v * v).sum();
        let w = r2.sqrt();
        let density = (-r2 / (2.0 * var)).exp() / norm;
        let up = [w, p[0], p[1], p[2]];
        let up_neg = [-w, -p[0], -p[1], -p[2]];
        let down = [-w, p[0], p[1], p[2]];
        let down_neg = [w, -p[0], -p[1], -p[2]];
        let v = (ft(&a, &up) * ft(&b, &up_neg) - ft(&a, &down) * ft(&b, &down_neg)) / (2.0 * w * density);
        sum += v;
        sum2 += v.norm_sqr();
    }
    let n = samples as f64;
    let mean = sum / n;
    (mean, ((sum2 / n - mean.norm_sqr()).max(0.0) / n).sqrt())
}

#[test]
fn gaussian_pair_matches_monte_carlo_golden() {
    let dir = golden("pair_gaussian_d4");
    let oracle_path = dir.join("oracle.json");
    if regenerate() {
        let (v, err) = monte_carlo([3.0, 0.0, 0.0, 0.0], MC_SAMPLES, MC_SEED);
        let doc = json!({
            "description": "massless d=4 pairing of unit Gaussians at 0 and (3,0,0,0), A = 1",
            "samples": MC_SAMPLES,
            "seed": MC_SEED,
            "value": [v.re, v.im],
            "std_error": err,
        });
        std::fs::write(&oracle_path, serde_json::to_string_pretty(&doc).unwrap() + "\n").unwrap();
    }
    let oracle: Value = serde_json::from_str(&std::fs::read_to_string(&oracle_path).unwrap()).unwrap();
    let mc = Complex64::new(oracle["value"][0].as_f64().unwrap(), oracle["value"][1].as_f64().unwrap());
    let err = oracle["std_error"].as_f64().unwrap();

    let out = tempfile::tempdir().unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_kglab"))
        .args(["pair", "--config"])
        .arg(dir.join("config.toml"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("pair.json")).unwrap()).unwrap();
    let row = &report["results"][0];
    let got = Complex64::new(row["value"][0].as_f64().unwrap(), row["value"][1].as_f64().unwrap());
    assert!((got - mc).norm() <= 5.0 * err, "{got} vs golden {mc} ± {err}");
    assert!(got.re.abs() <= 1e-10 * got.norm());
    assert!(err <= 1e-3 * mc.norm(), "oracle error bar too loose: {err}");
}
