use aqpt::apparatus::{
    effective_op, jitter, simulate_block_lossy, Calibration, MeasurementConfig, Mode, NoiseModel,
};
use aqpt::bayes::{effective_sample_size, init_ensemble, ParticleEnsemble, ResampleConfig};
use aqpt::diagnostics::{chi_squared_counts, plateau_detect, Field, TracePoint};
use aqpt::quantum::linalg::{c64, haar_random_ket, identity, max_abs_diff, trace};
use aqpt::quantum::{
    apply_channel, apply_channel_chi, average_transmittance, bures_distance_sq, chi_to_kraus, choi_state,
    dilation_to_kraus, haar_random_unitary, kraus_to_chi, kraus_to_dilation, process_distance, purity, CMatrix,
    ChiMatrix, DensityMatrix, DilationColumn, KrausSet,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Kraus set from the first `d` columns of a Haar unitary; `keep < k` blocks
/// drops the rest and gives a lossy channel.
fn random_kraus(k: usize, keep: usize, r: &mut impl Rng) -> KrausSet {
    let col = haar_random_unitary(2 * k, 2, r);
    let col = col.rows(0, 2 * keep).into_owned();
    dilation_to_kraus(&DilationColumn::new(2, col).unwrap()).unwrap()
}

fn random_state(r: &mut impl Rng) -> DensityMatrix {
    let g = haar_random_unitary(4, 2, r).rows(0, 2).into_owned() * c64(r.random_range(0.2..1.0), 0.0);
    let m = &g * g.adjoint();
    let tr = trace(&m).re;
    DensityMatrix::new(m.unscale(tr)).unwrap()
}

fn random_psd(n: usize, r: &mut impl Rng) -> CMatrix {
    let g = haar_random_unitary(2 * n, n, r).rows(0, n).into_owned();
    let scale = r.random_range(0.1..2.0);
    (&g * g.adjoint()) * c64(scale, 0.0)
}

fn random_projector(r: &mut impl Rng) -> CMatrix {
    let k = haar_random_ket(2, r);
    &k * k.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kraus_chi_dilation_round_trips(seed in any::<u64>(), k in 1usize..=5, lossy in any::<bool>()) {
        let mut r = rng(seed);
        let keep = if lossy && k > 1 { k - 1 } else { k };
        let ks = random_kraus(k, keep, &mut r);
        let chi = kraus_to_chi(&ks);
        let back = kraus_to_chi(&chi_to_kraus(&chi));
        prop_assert!(max_abs_diff(back.mat(), chi.mat()) < 1e-8);
        let dc = kraus_to_dilation(&ks);
        let ks2 = dilation_to_kraus(&dc).unwrap();
        prop_assert_eq!(ks2.elements(), ks.elements());
        if !lossy || k == 1 {
            prop_assert!(max_abs_diff(&dc.gram(), &identity(2)) < 1e-10);
            prop_assert!((chi.trace() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn chi_and_kraus_forms_act_alike(seed in any::<u64>(), k in 1usize..=5) {
        let mut r = rng(seed);
        let ks = random_kraus(k, k.max(2) - 1, &mut r);
        let rho = random_state(&mut r);
        let a = apply_channel(&ks, &rho).unwrap();
        let b = apply_channel_chi(&kraus_to_chi(&ks), &rho).unwrap();
        prop_assert!(max_abs_diff(a.mat(), b.mat()) < 1e-8);
        prop_assert!(a.trace() <= rho.trace() + 1e-10);
    }

    #[test]
    fn bures_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let [a, b, c] = std::array::from_fn(|_| random_psd(4, &mut r));
        let ab = bures_distance_sq(&a, &b).unwrap();
        let ba = bures_distance_sq(&b, &a).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!(bures_distance_sq(&a, &a).unwrap() < 1e-9);
        let bc = bures_distance_sq(&b, &c).unwrap();
        let ac = bures_distance_sq(&a, &c).unwrap();
        prop_assert!(ac.sqrt() <= ab.sqrt() + bc.sqrt() + 1e-9);
    }

    #[test]
    fn process_distance_is_d_times_choi_distance(seed in any::<u64>(), k1 in 1usize..=4, k2 in 1usize..=4) {
        let mut r = rng(seed);
        let a = kraus_to_chi(&random_kraus(k1, k1, &mut r));
        let b = kraus_to_chi(&random_kraus(k2, k2, &mut r));
        let direct = process_distance(&a, &b).unwrap();
        let via_choi = bures_distance_sq(choi_state(&a).unwrap().mat(), choi_state(&b).unwrap().mat()).unwrap();
        // Bures distance is homogeneous of degree one, and χ = d·ρ_E.
        prop_assert!((direct - 2.0 * via_choi).abs() < 1e-9);
    }

    #[test]
    fn purity_is_bounded(seed in any::<u64>(), k in 1usize..=4) {
        let mut r = rng(seed);
        let chi = kraus_to_chi(&random_kraus(k, k, &mut r));
        let p = purity(&chi);
        prop_assert!((0.25 - 1e-12..=1.0 + 1e-9).contains(&p));
        if k == 1 {
            prop_assert!((p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn chi_squared_swap_symmetry(n0 in 0u64..500, n1 in 0u64..500, p in 0.01f64..0.99) {
        let a = chi_squared_counts([n0, n1], [p, 1.0 - p]);
        let b = chi_squared_counts([n1, n0], [1.0 - p, p]);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn raising_the_plateau_threshold_never_fires_earlier(
        seed in any::<u64>(), floor in 1e-4f64..1e-1, a in 0.1f64..10.0, lo in -0.6f64..0.0, gap in 0.0f64..0.4,
    ) {
        let mut r = rng(seed);
        let trace: Vec<TracePoint> = (1..=60)
            .map(|k| {
                let n = 10f64.powf(k as f64 / 10.0);
                let y = (floor + a / n) * (1.0 + 0.1 * r.random_range(-1.0..1.0));
                TracePoint { n: n.round() as u64 + k, d2_truth: Some(y), dist_size: y, chi2_norm: y, r_dd: None, ess: 1.0 }
            })
            .collect();
        for field in [Field::D2Truth, Field::Chi2Norm] {
            let early = plateau_detect(&trace, field, 5, lo);
            let late = plateau_detect(&trace, field, 5, lo + gap);
            if let Some(l) = late {
                prop_assert!(early.is_some_and(|e| e <= l));
            }
        }
    }

    #[test]
    fn ess_is_between_one_and_s(seed in any::<u64>(), s in 2usize..60) {
        let mut r = rng(seed);
        let chis: Vec<ChiMatrix> = (0..s).map(|_| kraus_to_chi(&random_kraus(4, 4, &mut r))).collect();
        let w: Vec<f64> = (0..s).map(|_| r.random_range(0.0..1.0f64).powi(4) + 1e-12).collect();
        let ens = ParticleEnsemble::from_chis(Mode::Tp, &chis, &w).unwrap();
        let ess = effective_sample_size(&ens);
        prop_assert!(ess >= 1.0 - 1e-9 && ess <= s as f64 + 1e-9);
        let total: f64 = ens.weights().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn factorized_probabilities_on_a_thousand_triples() {
    let mut r = rng(11);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let k = 1 + i % 5;
        let keep = if i % 3 == 0 { k.max(2) - 1 } else { k };
        let ks = random_kraus(k, keep, &mut r);
        let chi = kraus_to_chi(&ks);
        let rho = random_state(&mut r);
        let m = random_projector(&mut r);
        let lhs = trace(&(effective_op(&m, &rho) * chi.mat())).re;
        let rhs = trace(&(&m * apply_channel(&ks, &rho).unwrap().mat())).re;
        worst = worst.max((lhs - rhs).abs());
    }
    assert!(worst < 1e-10, "worst deviation {worst:e}");
}

#[test]
fn transmittance_is_the_haar_average_of_output_trace() {
    let mut r = rng(12);
    for keep in [1, 2, 3] {
        let ks = random_kraus(4, keep, &mut r);
        let chi = kraus_to_chi(&ks);
        let n = 100_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            let rho = DensityMatrix::pure(&haar_random_ket(2, &mut r)).unwrap();
            let t = apply_channel(&ks, &rho).unwrap().trace();
            sum += t;
            sum2 += t * t;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        let want = average_transmittance(&chi);
        assert!((mean - want).abs() < 3.0 * se + 1e-12, "keep {keep}: {mean} vs {want} (se {se:e})");
    }
}

/// Σ_γ [b p_γ(1−p_γ) + b²(p_γ − p̂_γ)²] / (b p̂_γ).
fn chi2_mean_formula(b: u64, p: f64, q: f64) -> f64 {
    let b = b as f64;
    [(p, q), (1.0 - p, 1.0 - q)]
        .iter()
        .map(|&(p, q)| (b * p * (1.0 - p) + b * b * (p - q).powi(2)) / (b * q))
        .sum()
}

#[test]
fn chi_squared_mean_matches_binomial_monte_carlo() {
    use rand_distr::{Binomial, Distribution};
    let mut r = rng(13);
    for (b, p, q) in [(100, 0.6, 0.5), (100, 0.5, 0.5), (40, 0.3, 0.35), (1000, 0.9, 0.88)] {
        let draws = 200_000;
        let bin = Binomial::new(b, p).unwrap();
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..draws {
            let n0 = bin.sample(&mut r);
            let x = chi_squared_counts([n0, b - n0], [q, 1.0 - q]);
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / draws as f64;
        let se = ((sum2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        let want = chi2_mean_formula(b, p, q);
        assert!((mean - want).abs() < 3.0 * se, "b={b} p={p} q={q}: {mean} vs {want} (se {se:e})");
    }
    assert!((chi2_mean_formula(100, 0.6, 0.5) - 4.96).abs() < 1e-12);
}

#[test]
fn haar_moments() {
    let mut r = rng(14);
    let n = 100_000;
    let (mut m2, mut m4) = (0.0, 0.0);
    for _ in 0..n {
        let u = haar_random_unitary(2, 2, &mut r);
        let a = u[(0, 0)].norm_sqr();
        m2 += a;
        m4 += a * a;
    }
    // |U₁₁|² is uniform on [0, 1] for d = 2.
    assert!((m2 / n as f64 - 0.5).abs() < 0.01);
    assert!((m4 / n as f64 - 1.0 / 3.0).abs() < 0.01);
}

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn haar_trace_is_left_invariant() {
    let mut r = rng(15);
    let v = haar_random_unitary(2, 2, &mut r);
    let n = 20_000;
    let plain: Vec<f64> = (0..n).map(|_| trace(&haar_random_unitary(2, 2, &mut r)).re).collect();
    let shifted: Vec<f64> = (0..n).map(|_| trace(&(&v * haar_random_unitary(2, 2, &mut r))).re).collect();
    // Two-sample KS critical value at α = 0.001.
    let crit = 1.95 * (2.0 / n as f64).sqrt();
    assert!(ks_statistic(plain, shifted) < crit);
}

#[test]
fn jitter_offsets_are_uniform() {
    let mut r = rng(16);
    let phi0 = 3.0;
    let noise = NoiseModel::new(phi0).unwrap();
    let cfg = MeasurementConfig::new(40.0, 50.0, 60.0, 70.0).unwrap();
    let n = 20_000;
    let mut offsets: Vec<Vec<f64>> = (0..4).map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let j = jitter(&cfg, &noise, &mut r).as_array();
        for k in 0..4 {
            offsets[k].push(j[k] - cfg.as_array()[k]);
        }
    }
    let crit = 1.95 / (n as f64).sqrt();
    for o in offsets {
        assert!(o.iter().all(|x| x.abs() <= phi0 + 1e-9));
        let mut s = o;
        s.sort_by(f64::total_cmp);
        let d = s
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let cdf = (x + phi0) / (2.0 * phi0);
                (cdf - i as f64 / n as f64).abs().max((cdf - (i + 1) as f64 / n as f64).abs())
            })
            .fold(0.0, f64::max);
        assert!(d < crit, "KS statistic {d}");
    }
}

#[test]
fn lossy_counts_have_poisson_means() {
    let mut r = rng(17);
    let chi = kraus_to_chi(&random_kraus(3, 2, &mut r));
    let cfg = MeasurementConfig::new(10.0, 20.0, 30.0, 40.0).unwrap();
    let cal = Calibration::new(900.0, 1100.0).unwrap();
    let t = 0.05;
    let p = aqpt::apparatus::Probe::new(&cfg).probs(&chi);
    let n = 50_000;
    let mut sums = [0.0; 2];
    for _ in 0..n {
        let rec = simulate_block_lossy(&chi, &cfg, t, &cal, &NoiseModel::noiseless(), &mut r);
        sums[0] += rec.counts[0] as f64;
        sums[1] += rec.counts[1] as f64;
    }
    for g in 0..2 {
        let lambda = cal.intensities[g] * p[g] * t;
        let se = (lambda / n as f64).sqrt();
        assert!((sums[g] / n as f64 - lambda).abs() < 3.0 * se + 1e-12);
    }
}

#[test]
fn resampling_preserves_size_validity_and_flattens_weights() {
    let mut r = rng(18);
    for mode in [Mode::Tp, Mode::Lossy] {
        let mut ens = init_ensemble(200, 2, mode, &mut r).unwrap();
        let chi = kraus_to_chi(&random_kraus(2, 2, &mut r));
        for i in 0..6 {
            let cfg = MeasurementConfig::random(&mut r);
            let rec = match mode {
                Mode::Tp => aqpt::apparatus::simulate_block_tp(&chi, &cfg, 200, &NoiseModel::noiseless(), &mut r),
                Mode::Lossy => simulate_block_lossy(&chi, &cfg, 0.02 * (i + 1) as f64, &Calibration::default(), &NoiseModel::noiseless(), &mut r),
            };
            ens.update_weights(&rec).unwrap();
        }
        assert!(effective_sample_size(&ens) < 200.0);
        ens.resample(&ResampleConfig::default(), &mut r);
        assert_eq!(ens.len(), 200);
        assert!((effective_sample_size(&ens) - 200.0).abs() < 1e-6);
        for p in ens.particles() {
            let t = p.chi().trace();
            match mode {
                Mode::Tp => assert!((t - 2.0).abs() < 1e-9),
                Mode::Lossy => assert!(t <= 2.0 + 1e-9),
            }
            // Lossy columns carry the auxiliary block, so they stay isometries too.
            assert!(max_abs_diff(&p.dilation().gram(), &identity(2)) < 1e-9);
        }
    }
}
