use sagarch::io::{parse_csv, Report};
use sagarch::mle::{fit, FitConfig, FitMode};
use sagarch::model::{simulate, ParamVector, ScaleHint};

fn sig12(a: f64, b: f64) -> bool {
    a == b || ((a - b) / a).abs() < 1e-12
}

#[test]
fn report_json_round_trip() {
    let theta = ParamVector::new(0.2, 0.1, 0.2, 0.5, 1.5).unwrap();
    let y = simulate(&theta, 500, 17, 500).unwrap().series;
    let f = fit(&y, &FitConfig::default()).unwrap();
    let r = Report::from_fit(&f, &y);
    let back: Report = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    for (a, b) in r.parameters.iter().zip(&back.parameters) {
        assert!(sig12(a.estimate, b.estimate));
        assert!(sig12(a.asd.unwrap(), b.asd.unwrap()));
    }
    assert!(sig12(r.loglik, back.loglik) && sig12(r.aic, back.aic));
    assert_eq!(r, back);
}

#[test]
fn explosive_fit_flags_omega() {
    let theta = ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0).unwrap();
    let y = simulate(&theta, 1500, 23, 0).unwrap().series;
    let cfg = FitConfig {
        mode: FitMode::Free,
        ..FitConfig::default()
    };
    let f = fit(&y, &cfg).unwrap();
    assert!(f.regime_estimate.gamma_hat > 0.0);
    let r = Report::from_fit(&f, &y);
    assert_eq!(r.parameters[0].flag.as_deref(), Some("non-inferential"));
    assert!(r.parameters[0].asd.is_none());
    assert!(r.parameters[1..].iter().all(|p| p.asd.is_some()));
    assert!(r.to_table().contains('*'));
}

#[test]
fn percent_unit_is_carried_through() {
    let y = parse_csv("# unit: percent\nreturn\n1.0\n-0.4\n0.3\n", "mem").unwrap();
    assert_eq!(y.scale_hint, ScaleHint::Percent);
    assert_eq!(y.n(), 2);
}

#[test]
fn universal_estimator_survives_long_explosive_paths() {
    // sigma_t^2 reaches ~e^900 here, so the omega row of Sigma_hat vanishes.
    let theta = ParamVector::new(0.1, 0.1, 0.2, 0.5, 1.0).unwrap();
    let y = simulate(&theta, 5000, 3, 500).unwrap().series;
    assert!(sagarch::inference::sigma_at(sagarch::lyapunov::EstimatorKind::Res, &theta, &y).is_err());
    let u = sagarch::inference::universal_at(sagarch::lyapunov::EstimatorKind::Res, &theta, &y).unwrap();
    let a = sagarch::inference::asd(&u, y.n()).unwrap();
    assert!(a.values.iter().all(|v| v.is_finite() && *v > 0.0 && *v < 0.05), "{:?}", a.values);
}
