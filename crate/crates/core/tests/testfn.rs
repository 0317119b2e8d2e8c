use kglab_core::minkowski::minkowski_dot;
use kglab_core::testfn::{BumpFunction, GaussianPacket};
use kglab_core::*;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn pt(v: &[f64]) -> SpacetimePoint {
    SpacetimePoint::new(v.to_vec()).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Gauss–Legendre nodes on [−1, 1] by bisection-free Newton iteration,
/// kept separate from the library's rule.
fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Direct position-space transform ∫ f(x) e^{ip·x} dx in d = 2.
fn numeric_transform_2d(f: &TestFunction, center: &[f64], half: f64, p: &[f64]) -> Complex64 {
    let nodes = legendre_nodes(120);
    let mut acc = c(0.0, 0.0);
    for &(u, wu) in &nodes {
        for &(v, wv) in &nodes {
            let x = [center[0] + half * u, center[1] + half * v];
            let val = f.evaluate(&pt(&x)).unwrap();
            acc += Complex64::from_polar(val * wu * wv * half * half, minkowski_dot(p, &x));
        }
    }
    acc
}

fn general_packet() -> GaussianPacket {
    let q = DMatrix::from_row_slice(2, 2, &[1.3, 0.4, 0.4, 0.9]);
    let prefactor = Polynomial::from_terms(
        2,
        [
            (vec![0, 0], c(1.0, 0.0)),
            (vec![1, 0], c(0.3, -0.2)),
            (vec![1, 1], c(0.5, 0.0)),
            (vec![0, 2], c(-0.25, 0.1)),
        ],
    )
    .unwrap();
    GaussianPacket::general(pt(&[0.4, -0.7]), q, vec![0.8, -0.5], prefactor).unwrap()
}

#[test]
fn gaussian_transform_matches_direct_integration() {
    let f = TestFunction::Gaussian(general_packet());
    for p in [[0.0, 0.0], [0.7, -1.1], [-1.9, 0.35], [2.5, 2.0]] {
        let exact = f.fourier(&p).unwrap();
        let numeric = numeric_transform_2d(&f, &[0.4, -0.7], 11.0, &p);
        assert!((exact - numeric).norm() <= 1e-10 * (1.0 + exact.norm()), "p={p:?} {exact} {numeric}");
    }
}

#[test]
fn unit_gaussian_identity() {
    let f = TestFunction::gaussian(SpacetimePoint::origin(4), 1.0).unwrap();
    let p = [0.3, -1.2, 0.5, 2.0];
    let e2: f64 = p.iter().map(|v| v * v).sum();
    let expected = (2.0 * std::f64::consts::PI).powi(2) * (-e2 / 2.0).exp();
    assert!((f.fourier(&p).unwrap() - c(expected, 0.0)).norm() < 1e-14 * expected);
    assert_eq!(f.evaluate(&SpacetimePoint::origin(4)).unwrap(), 1.0);
    assert!(f.evaluate(&pt(&[10.0, 0.0, 0.0, 0.0])).unwrap() <= (-50.0f64).exp());
}

#[test]
fn klein_gordon_on_tilted_gaussian_vanishes_at_shell_tilt() {
    // q on the massless shell; the transform of Kf vanishes there.
    let q = vec![2.0, 2.0, 0.0, 0.0];
    let g = GaussianPacket::isotropic(SpacetimePoint::origin(4), 1.0).unwrap().with_tilt(q.clone()).unwrap();
    let f = TestFunction::Gaussian(g);
    let kf = f.apply_klein_gordon(0.0).unwrap().function;
    assert!(kf.fourier(&q).unwrap().norm() <= 1e-12 * f.fourier(&q).unwrap().norm());
}

#[test]
fn klein_gordon_matches_finite_differences_for_gaussian() {
    let f = TestFunction::Gaussian(general_packet());
    let m = 0.7;
    let kf = f.apply_klein_gordon(m).unwrap().function;
    let h = 1e-3;
    for x in [[0.1, 0.2], [1.0, -1.5], [-0.6, 0.4]] {
        let at = |dx: f64, dy: f64| f.evaluate(&pt(&[x[0] + dx, x[1] + dy])).unwrap();
        let d00 = (at(h, 0.0) - 2.0 * at(0.0, 0.0) + at(-h, 0.0)) / (h * h);
        let d11 = (at(0.0, h) - 2.0 * at(0.0, 0.0) + at(0.0, -h)) / (h * h);
        let expected = d00 - d11 + m * m * at(0.0, 0.0);
        let got = kf.evaluate(&pt(&x)).unwrap();
        assert!((got - expected).abs() < 1e-5, "x={x:?} {got} {expected}");
    }
}

#[test]
fn bump_transform_at_zero_is_the_integral() {
    // Direct Riemann sum over a fine grid of the ball in d = 3.
    let b = TestFunction::bump(pt(&[0.2, 0.0, -0.1]), 1.0).unwrap();
    let n = 200;
    let h = 2.0 / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let x = [
                    0.2 - 1.0 + (i as f64 + 0.5) * h,
                    -1.0 + (j as f64 + 0.5) * h,
                    -0.1 - 1.0 + (k as f64 + 0.5) * h,
                ];
                sum += b.evaluate(&pt(&x)).unwrap();
            }
        }
    }
    sum *= h * h * h;
    let ft = b.fourier(&[0.0, 0.0, 0.0]).unwrap();
    assert!((ft.re - sum).abs() < 1e-10 * sum, "{} {}", ft.re, sum);
    assert!(ft.im.abs() < 1e-15);
}

#[test]
fn bump_parseval() {
    // ∫|f|² dx = (2π)^{-d} ∫|f̃|² dp, both radial integrals, d = 4.
    let b = BumpFunction::new(BallRegion::new(SpacetimePoint::origin(4), 1.0).unwrap()).unwrap();
    let area = 2.0 * std::f64::consts::PI.powi(2);
    let nodes = legendre_nodes(200);
    let pos: f64 = nodes
        .iter()
        .map(|&(u, w)| {
            let r = 0.5 * (u + 1.0);
            0.5 * w * area * r.powi(3) * kglab_core::testfn::profile(r).powi(2)
        })
        .sum();
    let kmax = b.nyquist();
    let mom: f64 = legendre_nodes(2000)
        .iter()
        .map(|&(u, w)| {
            let k = 0.5 * kmax * (u + 1.0);
            0.5 * kmax * w * area * k.powi(3) * b.radial_transform(k).unwrap().powi(2)
        })
        .sum::<f64>()
        / (2.0 * std::f64::consts::PI).powi(4);
    assert!((pos - mom).abs() < 1e-8 * pos, "{pos} {mom}");
}

#[test]
fn bump_klein_gordon_matches_finite_differences() {
    let b = TestFunction::bump(pt(&[0.0, 0.0, 0.0]), 1.0).unwrap();
    let m = 1.5;
    let kb = b.apply_klein_gordon(m).unwrap();
    assert!(kb.resolution_adequate);
    let h = 1e-4;
    for x in [[0.1, 0.2, -0.3], [0.5, -0.4, 0.2], [0.0, 0.0, 0.7]] {
        let at = |i: usize, s: f64| {
            let mut y = x;
            y[i] += s;
            b.evaluate(&pt(&y)).unwrap()
        };
        let f0 = at(0, 0.0);
        let second = |i: usize| (at(i, h) - 2.0 * f0 + at(i, -h)) / (h * h);
        let expected = second(0) - second(1) - second(2) + m * m * f0;
        let got = kb.function.evaluate(&pt(&x)).unwrap();
        assert!((got - expected).abs() < 1e-5 * (1.0 + expected.abs()), "{got} {expected}");
    }
    assert!(matches!(kb.function.apply_klein_gordon(m), Err(Error::Unsupported(_))));
}

#[test]
fn bump_is_zero_outside_support_and_rejects_out_of_band() {
    let b = TestFunction::bump(pt(&[1.0, 2.0]), 0.5).unwrap();
    assert_eq!(b.evaluate(&pt(&[1.0, 2.6])).unwrap(), 0.0);
    assert_eq!(b.evaluate(&pt(&[1.0, 2.0])).unwrap(), 1.0);
    let nyq = b.band_limit();
    assert!(matches!(b.fourier(&[nyq * 1.01, 0.0]), Err(Error::OutOfBand { .. })));
}

#[test]
fn lorentz_transform_composes_with_evaluation() {
    let f = TestFunction::Gaussian(general_packet());
    let l = LorentzMatrix::boost(2, 1, 0.5).unwrap();
    let moved = f.lorentz_transform(&l).unwrap();
    let inv = l.inverse();
    for x in [[0.3, 0.1], [-1.0, 2.0], [0.7, -0.4]] {
        let xp = pt(&x);
        let expected = f.evaluate(&inv.apply(&xp)).unwrap();
        assert!((moved.evaluate(&xp).unwrap() - expected).abs() < 1e-12);
    }
    let b = TestFunction::bump(pt(&[0.0, 0.0]), 1.0).unwrap();
    assert!(matches!(b.lorentz_transform(&l), Err(Error::Unsupported(_))));
}

fn arb_packet() -> impl Strategy<Value = TestFunction> {
    (
        prop::collection::vec(-2.0f64..2.0, 3),
        prop::collection::vec(0.5f64..1.5, 3),
        prop::collection::vec(-1.0f64..1.0, 3),
        -0.5f64..0.5,
    )
        .prop_map(|(center, widths, tilt, coef)| {
            let prefactor = Polynomial::from_real_terms(3, [(vec![0, 0, 0], 1.0), (vec![1, 0, 1], coef)]).unwrap();
            TestFunction::Gaussian(
                GaussianPacket::new(pt(&center), &widths)
                    .unwrap()
                    .with_tilt(tilt)
                    .unwrap()
                    .with_prefactor(prefactor)
                    .unwrap(),
            )
        })
}

proptest! {
    #[test]
    fn reality_of_transform(f in arb_packet(), p in prop::collection::vec(-3.0f64..3.0, 3)) {
        let neg: Vec<f64> = p.iter().map(|v| -v).collect();
        let a = f.fourier(&p).unwrap();
        let b = f.fourier(&neg).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm().max(1e-300));
    }

    #[test]
    fn shift_theorem(f in arb_packet(), p in prop::collection::vec(-3.0f64..3.0, 3), a in prop::collection::vec(-4.0f64..4.0, 3)) {
        let shifted = f.translate(&pt(&a)).unwrap();
        let expected = f.fourier(&p).unwrap() * Complex64::from_polar(1.0, minkowski_dot(&p, &a));
        let got = shifted.fourier(&p).unwrap();
        prop_assert!((got - expected).norm() <= 1e-10 * expected.norm().max(1e-300));
    }

    #[test]
    fn klein_gordon_symbol(f in arb_packet(), p in prop::collection::vec(-3.0f64..3.0, 3), m in 0.0f64..2.0) {
        let kf = f.apply_klein_gordon(m).unwrap().function;
        let ratio = kf.fourier(&p).unwrap() / f.fourier(&p).unwrap();
        let symbol = m * m - minkowski_dot(&p, &p);
        prop_assert!((ratio - c(symbol, 0.0)).norm() <= 1e-10 * (1.0 + symbol.abs()));
    }

    #[test]
    fn klein_gordon_commutes_with_translation(f in arb_packet(), a in prop::collection::vec(-2.0f64..2.0, 3), x in prop::collection::vec(-2.0f64..2.0, 3)) {
        let one = f.translate(&pt(&a)).unwrap().apply_klein_gordon(1.0).unwrap().function;
        let two = f.apply_klein_gordon(1.0).unwrap().function.translate(&pt(&a)).unwrap();
        let (u, v) = (one.evaluate(&pt(&x)).unwrap(), two.evaluate(&pt(&x)).unwrap());
        prop_assert!((u - v).abs() <= 1e-10 * (1.0 + u.abs()));
    }

    #[test]
    fn bump_shift_theorem(p in prop::collection::vec(-20.0f64..20.0, 3), a in prop::collection::vec(-4.0f64..4.0, 3)) {
        let b = TestFunction::bump(SpacetimePoint::origin(3), 1.0).unwrap();
        let shifted = b.translate(&pt(&a)).unwrap();
        let expected = b.fourier(&p).unwrap() * Complex64::from_polar(1.0, minkowski_dot(&p, &a));
        prop_assert!((shifted.fourier(&p).unwrap() - expected).norm() <= 1e-10 * expected.norm().max(1e-300));
    }
}

#[test]
fn translate_round_trip_is_exact_for_gaussians() {
    // Dyadic coordinates keep the round trip free of rounding.
    let f = TestFunction::gaussian(pt(&[0.5, -0.75]), 1.0).unwrap();
    let a = pt(&[0.25, -1.5]);
    let back = f.translate(&a).unwrap().translate(&a.neg()).unwrap();
    assert_eq!(back, f);
    let b = TestFunction::bump(pt(&[0.0, 0.0]), 1.0).unwrap();
    let moved = b.translate(&a).unwrap();
    assert_eq!(moved.support().unwrap().center(), &a);
}
