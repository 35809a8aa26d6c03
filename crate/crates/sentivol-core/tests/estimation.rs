//! End-to-end estimation behavior on simulated data: the fit finds the
//! process that generated the sample, and its reported diagnostics are
//! internally consistent.

use approx::assert_relative_eq;
use sentivol_core::egarch::{self, EgarchParams, ExogenousRegressor, FitOptions, Sigma0Policy};
use sentivol_core::series::ObservationSeries;
use sentivol_core::simulate::{simulate, DsentPolicy, SimulationSpec};

fn truth() -> EgarchParams {
    EgarchParams::new(0.05, -0.10, 0.15, -0.06, 0.95, vec![0.30])
}

fn fast_options() -> FitOptions {
    FitOptions {
        multistart: 2,
        ..FitOptions::default()
    }
}

#[test]
fn fit_recovers_the_generating_process() {
    let spec = SimulationSpec::new(truth(), 8000).with_dsent(DsentPolicy::IidNormal { scale: 0.2 });
    let sim = simulate(&spec, 424).unwrap();
    let exog = [ExogenousRegressor::new("dSENT", sim.dsent.clone())];
    let fit = egarch::fit(&sim.returns, &exog, &fast_options()).unwrap();

    assert!(fit.convergence.converged, "fit did not converge");
    assert!((fit.params.gamma - 0.95).abs() < 0.05, "gamma {}", fit.params.gamma);
    assert!(fit.params.beta < 0.0, "leverage sign lost: {}", fit.params.beta);
    assert!((fit.params.alpha - 0.15).abs() < 0.10, "alpha {}", fit.params.alpha);
    assert!((fit.params.delta[0] - 0.30).abs() < 0.15, "delta {:?}", fit.params.delta);
    assert!((fit.params.mu - 0.05).abs() < 0.05, "mu {}", fit.params.mu);

    let ses = fit.standard_errors.as_ref().expect("standard errors");
    assert_eq!(ses.len(), 6);
    assert!(ses.iter().all(|s| *s > 0.0));
    assert_eq!(fit.param_names[5], "dSENT");
    assert_eq!(fit.k, 6);
    assert_eq!(fit.n, 8000);
}

#[test]
fn information_criteria_identities_hold_on_a_real_fit() {
    let spec = SimulationSpec::new(truth(), 2000).with_dsent(DsentPolicy::IidNormal { scale: 0.2 });
    let sim = simulate(&spec, 77).unwrap();
    let exog = [ExogenousRegressor::new("dSENT", sim.dsent)];
    let fit = egarch::fit(&sim.returns, &exog, &fast_options()).unwrap();

    let n = fit.n as f64;
    let k = fit.k as f64;
    assert_relative_eq!(
        fit.aic * n,
        -2.0 * fit.log_likelihood + 2.0 * k,
        max_relative = 1e-9
    );
    assert_relative_eq!(
        fit.sc * n,
        -2.0 * fit.log_likelihood + k * n.ln(),
        max_relative = 1e-9
    );
    assert!(fit.sc > fit.aic);
}

#[test]
fn shifting_returns_shifts_only_the_mean() {
    let spec = SimulationSpec::new(truth(), 4000).with_dsent(DsentPolicy::IidNormal { scale: 0.2 });
    let sim = simulate(&spec, 55).unwrap();
    let exog = [ExogenousRegressor::new("dSENT", sim.dsent.clone())];
    let base = egarch::fit(&sim.returns, &exog, &fast_options()).unwrap();

    let shift = 0.3;
    let shifted = ObservationSeries::new(
        sim.returns.dates().to_vec(),
        sim.returns.values().iter().map(|r| r + shift).collect(),
        sim.returns.unit(),
    )
    .unwrap();
    let moved = egarch::fit(&shifted, &exog, &fast_options()).unwrap();

    // A location shift relabels mu and leaves the variance dynamics alone.
    assert_relative_eq!(moved.params.mu, base.params.mu + shift, epsilon = 1e-4);
    assert_relative_eq!(moved.params.omega, base.params.omega, epsilon = 1e-4);
    assert_relative_eq!(moved.params.alpha, base.params.alpha, epsilon = 1e-4);
    assert_relative_eq!(moved.params.beta, base.params.beta, epsilon = 1e-4);
    assert_relative_eq!(moved.params.gamma, base.params.gamma, epsilon = 1e-4);
    assert_relative_eq!(moved.params.delta[0], base.params.delta[0], epsilon = 1e-4);
}

#[test]
fn truth_beats_perturbed_parameters_in_likelihood() {
    let spec = SimulationSpec::new(truth(), 20_000)
        .with_dsent(DsentPolicy::IidNormal { scale: 0.2 });
    let sim = simulate(&spec, 9).unwrap();
    let sigma0 = sim.variance.values()[0];
    let dsent = std::slice::from_ref(&sim.dsent);
    let (ll_truth, _) = egarch::log_likelihood(&truth(), &sim.returns, dsent, sigma0).unwrap();
    for (bump, index) in [(0.08, 1usize), (0.10, 2), (0.08, 3), (-0.04, 4), (0.25, 5)] {
        let mut v = truth().to_vec();
        v[index] += bump;
        let wrong = EgarchParams::from_vec(&v);
        let (ll_wrong, _) =
            egarch::log_likelihood(&wrong, &sim.returns, dsent, sigma0).unwrap();
        assert!(
            ll_truth > ll_wrong,
            "perturbing coordinate {index} raised the likelihood: {ll_truth} vs {ll_wrong}"
        );
    }
}

#[test]
fn unconditional_seed_policy_matches_fixed_seed_at_the_same_level() {
    let spec = SimulationSpec::new(truth(), 1500).with_dsent(DsentPolicy::Zeros);
    let sim = simulate(&spec, 31).unwrap();
    let params = truth();
    let level = (params.omega / (1.0 - params.gamma)).exp();
    let exog = [ExogenousRegressor::new("dSENT", sim.dsent.clone())];

    let a = egarch::gradient_check(
        &sim.returns,
        &exog,
        &params,
        &FitOptions {
            sigma0: Sigma0Policy::Unconditional,
            ..FitOptions::default()
        },
    )
    .unwrap();
    let b = egarch::gradient_check(
        &sim.returns,
        &exog,
        &params,
        &FitOptions {
            sigma0: Sigma0Policy::Fixed(level),
            ..FitOptions::default()
        },
    )
    .unwrap();
    assert!(a < 1e-5, "unconditional-seed gradient deviation {a}");
    assert!(b < 1e-5, "fixed-seed gradient deviation {b}");
}

#[test]
fn leverage_sign_survives_estimation() {
    let mut params = truth();
    params.beta = -0.08;
    params.delta = vec![];
    let spec = SimulationSpec::new(params, 10_000);
    let sim = simulate(&spec, 1212).unwrap();
    let fit = egarch::fit(&sim.returns, &[], &fast_options()).unwrap();
    assert!(fit.params.beta < 0.0, "beta {}", fit.params.beta);
}
