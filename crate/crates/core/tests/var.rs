use nalgebra::DMatrix;
use num_complex::Complex64;
use pcgraph::error::Error;
use pcgraph::graph::Edge;
use pcgraph::linalg::{self, CMatrix};
use pcgraph::var::*;
use std::f64::consts::PI;

fn edges(list: &[(usize, usize)]) -> Vec<Edge> {
    list.iter().map(|&(j, k)| Edge::new(j, k).unwrap()).collect()
}

#[test]
fn stationarity() {
    assert!(model_a().is_stationary());
    assert!(model_b(0.0).is_stationary());
    assert!(model_c().is_stationary());
    let unit = VarModel::new(vec![DMatrix::identity(3, 3)], DMatrix::identity(3, 3)).unwrap();
    assert!(!unit.is_stationary());
    assert!(matches!(unit.simulate(64, 1, None), Err(Error::NonStationary { .. })));
    let white = VarModel::new(vec![DMatrix::zeros(3, 3)], DMatrix::identity(3, 3)).unwrap();
    assert!(white.is_stationary());
}

#[test]
fn companion_for_higher_order() {
    let phi1 = DMatrix::from_element(1, 1, 0.5);
    let phi2 = DMatrix::from_element(1, 1, 0.6);
    // z^2 - 0.5 z - 0.6 has a root at ~1.057.
    let m = VarModel::new(vec![phi1, phi2], DMatrix::identity(1, 1)).unwrap();
    assert!(!m.is_stationary());
    let ok = VarModel::new(
        vec![DMatrix::from_element(1, 1, 0.5), DMatrix::from_element(1, 1, 0.3)],
        DMatrix::identity(1, 1),
    )
    .unwrap();
    assert!(ok.is_stationary());
}

#[test]
fn reference_truths() {
    assert_eq!(
        model_a().true_missing_edges(256).unwrap(),
        edges(&[(2, 3), (2, 5), (3, 4)])
    );
    assert_eq!(model_b(0.0).true_missing_edges(256).unwrap(), edges(&[(2, 3), (2, 5)]));
    assert_eq!(model_b(0.1).true_missing_edges(256).unwrap(), edges(&[(2, 5)]));
}

#[test]
fn model_c_has_no_missing_pair() {
    // The precision entry at (1,2) couples series 2 and 3 through
    // series 1 (and 2 and 5 likewise), so no inverse-spectral entry
    // vanishes identically.
    assert_eq!(model_c().true_missing_edges(256).unwrap(), edges(&[]));
}

#[test]
fn model_c_precision() {
    let c = model_c();
    let prec = c.sigma_eps().clone().try_inverse().unwrap();
    assert!((prec[(0, 1)] - 0.5).abs() < 1e-12);
    assert!((prec[(2, 2)] - 1.0).abs() < 1e-12);
    let inv = c.inverse_spectral_field(64).unwrap();
    assert!(inv.half().iter().any(|m| m[(1, 4)].norm() > 1e-3));
}

#[test]
fn white_noise_spectrum_is_identity() {
    let m = VarModel::new(vec![DMatrix::zeros(4, 4)], DMatrix::identity(4, 4)).unwrap();
    for f in [0.0, 0.13, -0.4, 0.5] {
        let s = m.spectral_matrix(f).unwrap();
        assert!((s - CMatrix::identity(4, 4)).norm() < 1e-14);
    }
}

#[test]
fn scalar_ar1_closed_form() {
    let phi = 0.7;
    let m = VarModel::new(vec![DMatrix::from_element(1, 1, phi)], DMatrix::identity(1, 1)).unwrap();
    for f in [0.0, 0.1, 0.25, 0.5] {
        let expected = 1.0 / (Complex64::new(1.0, 0.0) - Complex64::from_polar(phi, -2.0 * PI * f)).norm_sqr();
        assert!((m.spectral_matrix(f).unwrap()[(0, 0)].re - expected).abs() < 1e-12);
    }
}

/// `S(f) = sum_h Gamma(h) exp(-i 2 pi f h)` with `Gamma(h) = E[X_{t+h} X_t^T]`,
/// computed from the MA(infinity) weights `Psi_j = Phi_1^j`.
fn autocovariance_oracle(model: &VarModel, f: f64, max_lag: usize) -> CMatrix {
    let p = model.p();
    let phi = &model.phi()[0];
    let sigma = model.sigma_eps();
    let mut psi = vec![DMatrix::<f64>::identity(p, p)];
    for j in 1..=(2 * max_lag) {
        let next = phi * &psi[j - 1];
        psi.push(next);
    }
    let gamma = |h: usize| -> DMatrix<f64> {
        let mut g = DMatrix::zeros(p, p);
        for j in 0..(2 * max_lag - h) {
            g += &psi[j + h] * sigma * psi[j].transpose();
        }
        g
    };
    let mut s = linalg::complexify(&gamma(0));
    for h in 1..=max_lag {
        let g = gamma(h);
        let z = Complex64::from_polar(1.0, -2.0 * PI * f * h as f64);
        s += linalg::complexify(&g) * z + linalg::complexify(&g.transpose()) * z.conj();
    }
    s
}

#[test]
fn model_a_spectrum_matches_autocovariance_sum() {
    let m = model_a();
    let oracle = autocovariance_oracle(&m, 0.1, 500);
    let s = m.spectral_matrix(0.1).unwrap();
    assert!((s - oracle).camax() < 1e-6);
}

#[test]
fn spectrum_times_inverse_is_identity() {
    for m in [model_a(), model_b(0.1), model_c()] {
        for i in 0..32 {
            let f = -0.5 + i as f64 / 32.0 + 0.0123;
            let prod = m.spectral_matrix(f).unwrap() * m.inverse_spectral_matrix(f);
            assert!((prod - CMatrix::identity(5, 5)).camax() < 1e-10);
        }
    }
}

#[test]
fn spectrum_symmetries() {
    let m = model_c();
    for f in [0.05, 0.21, 0.37] {
        let s = m.spectral_matrix(f).unwrap();
        assert!((m.spectral_matrix(f + 1.0).unwrap() - &s).camax() < 1e-12);
        assert!((m.spectral_matrix(-f).unwrap() - s.map(|z| z.conj())).camax() < 1e-12);
        assert!(linalg::min_eigenvalue(&s) > 0.0);
    }
}

#[test]
fn simulate_is_deterministic() {
    let a = model_a().simulate(256, 7, None).unwrap();
    let b = model_a().simulate(256, 7, None).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, model_a().simulate(256, 8, None).unwrap());
    assert!(model_a().simulate(255, 7, None).is_err());
}

#[test]
fn white_noise_sample_covariance() {
    let n = 4096;
    let m = VarModel::new(vec![DMatrix::zeros(5, 5)], DMatrix::identity(5, 5)).unwrap();
    let x = m.simulate(n, 3, None).unwrap();
    for a in 0..5 {
        for b in 0..5 {
            let c: f64 = (0..n).map(|t| x.channel(a)[t] * x.channel(b)[t]).sum::<f64>() / n as f64;
            let target = if a == b { 1.0 } else { 0.0 };
            assert!((c - target).abs() < 5.0 / (n as f64).sqrt(), "({a},{b}) {c}");
        }
    }
}

#[test]
fn model_b_sample_mean_near_zero() {
    let n = 4096;
    let m = model_b(0.0);
    let x = m.simulate(n, 21, None).unwrap();
    let s = m.spectral_matrix(0.0).unwrap();
    for (c, mean) in x.means().iter().enumerate() {
        // Long-run variance of the mean is S(0)/N.
        let sd = s[(c, c)].re.sqrt();
        assert!(mean.abs() < 4.0 * sd / (n as f64).sqrt(), "channel {c}: {mean}");
    }
}

#[test]
fn random_model_pattern_and_stationarity() {
    let p = 20;
    let mut zero_fraction = 0.0;
    let blocks = random_pattern_blocks(p, 5);
    let mut block_of = vec![0; p];
    for (b, members) in blocks.iter().enumerate() {
        for &v in members {
            block_of[v] = b;
        }
    }
    for seed in 0..10 {
        let m = random_var_model(p, 5, seed).unwrap();
        assert!(m.is_stationary());
        let phi = &m.phi()[0];
        let eig_max = phi.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(eig_max <= 1.0);
        for i in 0..p {
            for j in 0..p {
                if block_of[i] != block_of[j] {
                    assert_eq!(phi[(i, j)], 0.0);
                }
            }
        }
        zero_fraction += phi.iter().filter(|&&x| x == 0.0).count() as f64 / (p * p) as f64;
    }
    zero_fraction /= 10.0;
    assert!((zero_fraction - 0.64).abs() <= 0.05, "zero fraction {zero_fraction}");
}

#[test]
fn random_model_is_deterministic() {
    assert_eq!(random_var_model(12, 5, 4).unwrap(), random_var_model(12, 5, 4).unwrap());
    assert!(random_var_model(1, 5, 4).is_err());
    assert!(random_var_model(5, 0, 4).is_err());
}

#[test]
fn reflection_maps_outside_roots_inside() {
    let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 0.5]);
    let r = reflect_unstable_eigenvalues(&m).unwrap();
    let mut ev: Vec<f64> = r.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    assert!((ev[0] - 0.5).abs() < 1e-10 && (ev[1] - 0.5).abs() < 1e-10);
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
    let r = reflect_unstable_eigenvalues(&rot).unwrap();
    for z in r.complex_eigenvalues().iter() {
        assert!((z.norm() - 0.5).abs() < 1e-10);
    }
}

#[test]
fn json_round_trip() {
    let m = model_c();
    let s = serde_json::to_string(&m).unwrap();
    assert!(s.contains("\"ell\":1"));
    let back: VarModel = serde_json::from_str(&s).unwrap();
    assert!((back.sigma_eps() - m.sigma_eps()).amax() < 1e-15);
    assert!(
        serde_json::from_str::<VarModel>(r#"{"p":2,"ell":2,"phi":[[[0,0],[0,0]]],"sigma_eps":[[1,0],[0,1]]}"#).is_err()
    );
}
