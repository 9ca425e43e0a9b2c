use num_complex::Complex64;
use pasem::channel::{simulate, ChannelParams};
use pasem::constellation::{Constellation, SymbolDistribution};
use pasem::estimation::{e_step, em_fit, m_step, DistributionMode, EmConfig, EmInit};
use pasem::io::{decode_binary, decode_csv, encode_binary, encode_csv};
use pasem::metrics::{bit_uncertainty, compute_llrs_with_clip, minimize_over_s, BitMatrix};
use pasem::SampleBatch;
use proptest::prelude::*;

fn qam(m: u32) -> Constellation {
    Constellation::square_qam(m).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

fn shaped_batch(m: u32, nu: f64, snr_db: f64, n: usize, seed: u64) -> (Constellation, ChannelParams, SampleBatch) {
    let c = qam(m);
    let d = SymbolDistribution::maxwell_boltzmann(&c, nu).unwrap();
    let truth = ChannelParams::from_snr_db(&c, 1.0, snr_db, d).unwrap();
    let batch = simulate(&c, &truth, n, seed).unwrap();
    (c, truth, batch)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn posterior_rows_are_stochastic(nu in 0.0f64..0.2, snr in 0.0f64..25.0, seed in 0u64..1000) {
        let (c, truth, batch) = shaped_batch(6, nu, snr, 300, seed);
        let (q, ll) = e_step(&batch, &c, &truth).unwrap();
        prop_assert!(ll.is_finite());
        for i in 0..q.rows() {
            let row = q.row(i);
            prop_assert!(row.iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn e_step_is_scale_equivariant(scale in 0.05f64..20.0, snr in 3.0f64..20.0, seed in 0u64..1000) {
        let (c, truth, batch) = shaped_batch(4, 0.05, snr, 200, seed);
        let scaled_batch = SampleBatch::new(batch.observations.iter().map(|y| y * scale).collect()).unwrap();
        let scaled = ChannelParams::new(truth.delta() * scale, truth.sigma2() * scale * scale, truth.dist().clone()).unwrap();
        let (q, ll) = e_step(&batch, &c, &truth).unwrap();
        let (q_s, ll_s) = e_step(&scaled_batch, &c, &scaled).unwrap();
        for i in 0..q.rows() {
            for j in 0..q.width() {
                prop_assert!((q.get(i, j) - q_s.get(i, j)).abs() < 1e-9);
            }
        }
        let shift = -(batch.len() as f64) * (scale * scale).ln();
        prop_assert!(close(ll_s, ll + shift, 1e-9), "{} vs {}", ll_s, ll + shift);

        let fit = m_step(&batch, &c, &q, DistributionMode::GeneralPmf).unwrap();
        let fit_s = m_step(&scaled_batch, &c, &q, DistributionMode::GeneralPmf).unwrap();
        prop_assert!(close(fit_s.delta(), fit.delta() * scale, 1e-12));
        prop_assert!(close(fit_s.sigma2(), fit.sigma2() * scale * scale, 1e-12));
        prop_assert_eq!(fit_s.dist().pmf(), fit.dist().pmf());
    }

    #[test]
    fn mb_entropy_and_energy_fall_with_nu(nu in 0.0f64..0.5, step in 0.001f64..0.2) {
        let c = qam(6);
        let a = SymbolDistribution::maxwell_boltzmann(&c, nu).unwrap();
        let b = SymbolDistribution::maxwell_boltzmann(&c, nu + step).unwrap();
        prop_assert!(b.entropy() < a.entropy());
        prop_assert!(b.mean_energy(&c) < a.mean_energy(&c));
        prop_assert!((a.pmf().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn em_never_decreases_the_likelihood(nu in 0.0f64..0.1, snr in 5.0f64..20.0, seed in 0u64..1000, k in prop::sample::select(vec![4usize, 16, 36, 64])) {
        let (c, _, batch) = shaped_batch(6, nu, snr, 1500, seed);
        let config = EmConfig { init: EmInit::KMeans(k), max_iters: 40, ..EmConfig::default() };
        let result = em_fit(&batch, &c, &config).unwrap();
        prop_assert!(result.worst_decrease() <= 1e-7 * batch.len() as f64, "{}", result.worst_decrease());
        prop_assert_eq!(result.log_likelihood_trace.len(), result.iterations_used + 1);
    }

    #[test]
    fn llr_scaling_trades_against_s(alpha in 0.2f64..5.0, s in 0.1f64..3.0, seed in 0u64..1000) {
        let (c, truth, batch) = shaped_batch(4, 0.08, 10.0, 400, seed);
        let llrs = compute_llrs_with_clip(&batch, &c, &truth, 1e6).unwrap();
        let bits = BitMatrix::from_indices(&c, &batch.symbol_indices(&c).unwrap());
        let scaled = llrs.scaled(alpha).unwrap();
        let u = bit_uncertainty(&llrs, &bits, s * alpha).unwrap();
        let u_scaled = bit_uncertainty(&scaled, &bits, s).unwrap();
        prop_assert!(close(u, u_scaled, 1e-10), "{} vs {}", u, u_scaled);
        let (s_opt, best) = minimize_over_s(&llrs, &bits).unwrap();
        let (s_opt_scaled, best_scaled) = minimize_over_s(&scaled, &bits).unwrap();
        prop_assert!((best - best_scaled).abs() < 1e-6, "{} vs {}", best, best_scaled);
        prop_assert!((s_opt - s_opt_scaled * alpha).abs() < 1e-3 * s_opt.max(1.0));
        prop_assert!(bit_uncertainty(&llrs, &bits, 0.0).unwrap() == 4.0);
    }

    #[test]
    fn binary_samples_round_trip(values in prop::collection::vec((-1e6f32..1e6, -1e6f32..1e6), 1..200)) {
        let samples: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a as f64, b as f64)).collect();
        prop_assert_eq!(decode_binary(&encode_binary(&samples)).unwrap(), samples);
    }

    #[test]
    fn csv_samples_round_trip(values in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..200)) {
        let samples: Vec<Complex64> = values.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let back = decode_csv(&encode_csv(&samples)).unwrap();
        for (x, y) in samples.iter().zip(&back) {
            prop_assert!((x.re - y.re).abs() <= 5e-9 * x.re.abs().max(1e-300));
            prop_assert!((x.im - y.im).abs() <= 5e-9 * x.im.abs().max(1e-300));
        }
    }
}

#[test]
fn fused_em_matches_explicit_e_and_m_steps() {
    let (c, truth, batch) = shaped_batch(6, 0.04, 12.0, 4000, 31);
    let start = ChannelParams::new(0.8, truth.sigma2() * 2.0, SymbolDistribution::uniform(64)).unwrap();
    let config = EmConfig {
        init: EmInit::Explicit(start.clone()),
        max_iters: 15,
        ll_rel_tol: 1e-15,
        ..EmConfig::default()
    };
    let fused = em_fit(&batch, &c, &config).unwrap();

    let mut params = start;
    let mut trace = Vec::new();
    for _ in 0..fused.iterations_used {
        let (q, ll) = e_step(&batch, &c, &params).unwrap();
        trace.push(ll);
        params = m_step(&batch, &c, &q, DistributionMode::GeneralPmf).unwrap();
    }
    trace.push(e_step(&batch, &c, &params).unwrap().1);

    assert_eq!(trace.len(), fused.log_likelihood_trace.len());
    for (a, b) in trace.iter().zip(&fused.log_likelihood_trace) {
        assert!(close(*a, *b, 1e-11), "{a} vs {b}");
    }
    assert!(close(params.delta(), fused.params.delta(), 1e-10));
    assert!(close(params.sigma2(), fused.params.sigma2(), 1e-10));
    for (a, b) in params.dist().pmf().iter().zip(fused.params.dist().pmf()) {
        assert!((a - b).abs() < 1e-12);
    }
}
