use num_complex::Complex64;
use pcgraph::error::Error;
use pcgraph::linalg::CMatrix;
use pcgraph::sample::SampleMatrix;
use pcgraph::spectral::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn noise(p: usize, n: usize, seed: u64) -> SampleMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SampleMatrix::new(
        (0..p)
            .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect(),
    )
    .unwrap()
}

/// O(N^2) DFT over all N frequencies, no symmetry shortcuts.
fn naive_periodogram(x: &SampleMatrix, j: usize) -> CMatrix {
    let d = x.demeaned();
    let n = d.n();
    let w: Vec<Complex64> = (0..d.p())
        .map(|c| {
            d.channel(c)
                .iter()
                .enumerate()
                .map(|(t, &v)| Complex64::from_polar(v, -2.0 * PI * (j * t) as f64 / n as f64))
                .sum::<Complex64>()
                / (n as f64).sqrt()
        })
        .collect();
    CMatrix::from_fn(d.p(), d.p(), |a, b| w[a] * w[b].conj())
}

#[test]
fn periodogram_matches_direct_dft() {
    for n in [64, 90] {
        let x = noise(3, n, 11);
        let pg = periodogram(&x);
        for j in 0..n {
            let diff = (pg.at(j as isize) - naive_periodogram(&x, j)).norm();
            assert!(diff < 1e-10, "n={n} j={j} diff={diff}");
        }
    }
}

#[test]
fn pure_tone_concentrates() {
    let n = 64;
    let x = SampleMatrix::new(vec![(0..n)
        .map(|t| (2.0 * PI * t as f64 * (n / 4) as f64 / n as f64).cos())
        .collect()])
    .unwrap();
    let pg = periodogram(&x);
    for j in 0..n {
        let v = pg.at(j as isize)[(0, 0)].re;
        if j == n / 4 || j == 3 * n / 4 {
            assert!((v - n as f64 / 4.0).abs() < 1e-9);
        } else {
            assert!(v < 1e-20, "leak at {j}: {v}");
        }
    }
}

#[test]
fn parseval_trace_identity() {
    let x = noise(4, 128, 3);
    let pg = periodogram(&x);
    let lhs: f64 = (0..128).map(|j| pg.at(j).trace().re).sum::<f64>() / 128.0;
    let d = x.demeaned();
    let rhs: f64 = d.channels().iter().flatten().map(|v| v * v).sum::<f64>() / 128.0;
    assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
}

#[test]
fn cosine_weights_properties() {
    for m in [1, 2, 7, 64] {
        let w = cosine_weights(m).unwrap();
        let full = w.full();
        assert_eq!(full.len(), 2 * m + 1);
        assert!((full.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for k in 0..=m as isize {
            assert_eq!(w.weight(k), w.weight(-k));
        }
        assert!(full.iter().all(|&x| x > 0.0));
    }
    assert!(cosine_weights(0).is_err());
}

#[test]
fn endpoint_weight_is_floored() {
    let w = cosine_weights(8).unwrap();
    let raw_total: f64 = (-8..=8)
        .map(|k: i32| (PI * k as f64 / 16.0).cos().max(WEIGHT_FLOOR))
        .sum();
    assert!((w.weight(8) - WEIGHT_FLOOR / raw_total).abs() < 1e-25);
}

/// Brute-force circular convolution over the full grid.
fn naive_smooth(pg: &SpectralField, w: &WeightSequence, j: isize) -> CMatrix {
    let m = w.m() as isize;
    let mut acc = CMatrix::zeros(pg.p(), pg.p());
    for k in -m..=m {
        acc += pg.at(j - k) * Complex64::new(w.weight(k), 0.0);
    }
    acc
}

#[test]
fn smoothing_matches_direct_convolution() {
    let x = noise(3, 64, 5);
    let pg = periodogram(&x);
    let w = cosine_weights(5).unwrap();
    let s = smooth(&pg, &w).unwrap();
    assert!(!s.singular_risk);
    for j in 0..64 {
        let d = (s.field.at(j) - naive_smooth(&pg, &w, j)).norm();
        assert!(d < 1e-12, "j={j} diff={d}");
    }
}

#[test]
fn smoothing_constant_field_is_identity_map() {
    let m = CMatrix::from_fn(2, 2, |a, b| {
        if a == b {
            Complex64::new(2.0, 0.0)
        } else if a < b {
            Complex64::new(0.5, 0.0)
        } else {
            Complex64::new(0.5, 0.0)
        }
    });
    let field = SpectralField::new(2, 16, vec![m.clone(); 9]).unwrap();
    let s = smooth(&field, &cosine_weights(3).unwrap()).unwrap();
    for v in s.field.half() {
        assert!((v - &m).norm() < 1e-14);
    }
}

#[test]
fn smoothing_preserves_trace_sum() {
    let x = noise(3, 128, 9);
    let pg = periodogram(&x);
    let s = smooth(&pg, &cosine_weights(6).unwrap()).unwrap().field;
    let a: f64 = (0..128).map(|j| pg.at(j).trace().re).sum();
    let b: f64 = (0..128).map(|j| s.at(j).trace().re).sum();
    assert!((a - b).abs() < 1e-10 * a);
}

#[test]
fn smoothing_flags_singular_risk() {
    let x = noise(5, 64, 1);
    let s = smooth(&periodogram(&x), &cosine_weights(1).unwrap()).unwrap();
    assert!(s.singular_risk);
    assert!(smooth(&periodogram(&x), &cosine_weights(32).unwrap()).is_err());
}

#[test]
fn window_constants_lookup() {
    let c = window_constants("cosine").unwrap();
    assert_eq!((c.c_u, c.d_u), (0.617, 0.446));
    let user = WindowSpec::named("mine").with_constants(1.0, 1.0);
    let c = user.resolve_constants(&WindowRegistry::default()).unwrap();
    assert_eq!((c.c_u, c.d_u), (1.0, 1.0));
    assert!(matches!(window_constants("parzen"), Err(Error::Config(_))));
    assert!(WindowSpec::named("cosine")
        .with_constants(0.5, 0.0)
        .resolve_constants(&WindowRegistry::default())
        .is_err());
}

#[test]
fn partial_coherence_of_diagonal_is_zero() {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(3.0, 0.0),
    ]));
    let f = SpectralField::new(3, 8, vec![d; 5]).unwrap();
    assert!(partial_coherence(&f, 1, 3).unwrap().iter().all(|&g| g == 0.0));
    assert!(partial_coherence(&f, 2, 2).is_err());
}

#[test]
fn partial_coherence_approaches_one() {
    let eps = 1e-6;
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0 - eps, 0.0),
            Complex64::new(1.0 - eps, 0.0),
            Complex64::new(1.0, 0.0),
        ],
    );
    let f = SpectralField::new(2, 4, vec![m; 3]).unwrap();
    for g in partial_coherence(&f, 1, 2).unwrap() {
        assert!(g > 1.0 - 1e-4 && g <= 1.0);
    }
}

#[test]
fn cosine_support_excludes_vanishing_endpoints() {
    for m in [1usize, 2, 3, 8] {
        assert_eq!(cosine_weights(m).unwrap().effective_support(), 2 * m - 1);
    }
}
