use super::*;
use crate::families::{Family, FamilyEvaluator};
use crate::oplib::Operator;
use proptest::prelude::*;

const SQRT2: f64 = std::f64::consts::SQRT_2;

fn kronecker(t: f64) -> f64 {
    t.sin() + (SQRT2 * t).sin()
}

#[test]
fn stepanov_examples() {
    let one = Signal::scalar(0.0, 5.0, 1e-3, |_| 1.0);
    let grid: Vec<f64> = (0..40).map(|i| i as f64 * 0.1).collect();
    for p in [1.0, 2.0, 3.5] {
        assert!((stepanov_norm(&one, p, &grid).unwrap() - 1.0).abs() < 1e-12);
    }
    let s = Signal::scalar(0.0, 5.0, 1e-3, |t| (2.0 * PI * t).sin());
    assert!((stepanov_norm(&s, 2.0, &grid).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
    let e = Signal::scalar(0.0, 5.0, 1e-3, |t| (-t).exp());
    assert!((stepanov_norm(&e, 1.0, &grid).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    assert!(matches!(stepanov_norm(&e, 1.0, &[4.5]), Err(Error::WindowExceedsDomain { .. })));
    assert!(matches!(stepanov_norm(&e, 1.0, &[]), Err(Error::EmptyWindow)));
    assert!(stepanov_norm(&e, 0.5, &grid).is_err());
}

#[test]
fn epsilon_period_examples() {
    let s = Signal::scalar(0.0, 20.0, 1.0 / 64.0, |t| (2.0 * PI * t).sin());
    let taus = epsilon_periods(&s, 1e-6, [0.5, 10.0], 0.0).unwrap();
    assert_eq!(taus, (1..=10).map(|k| k as f64).collect::<Vec<_>>());

    let k = Signal::scalar(0.0, 300.0, 1.0 / 64.0, kronecker);
    let taus = epsilon_periods(&k, 0.3, [1.0, 150.0], 0.0).unwrap();
    assert!(!taus.is_empty());
    assert!(density_gap(&taus, 150.0).unwrap() < 150.0);

    let ramp = Signal::scalar(0.0, 20.0, 1.0 / 64.0, |t| t);
    assert!(epsilon_periods(&ramp, 0.1, [0.5, 10.0], 0.0).unwrap().is_empty());
    assert!(matches!(epsilon_periods(&ramp, 0.1, [5.0, 5.0], 0.0), Err(Error::EmptyWindow)));
    assert!(epsilon_periods(&ramp, 0.0, [1.0, 5.0], 0.0).is_err());
}

#[test]
fn tail_cut_admits_decaying_part() {
    let f = Signal::scalar(0.0, 60.0, 1.0 / 64.0, |t| (2.0 * PI * t).sin() + 2.0 * (-t).exp());
    let early = epsilon_periods(&f, 0.05, [0.5, 20.0], 0.0).unwrap();
    let late = epsilon_periods(&f, 0.05, [0.5, 20.0], 5.0).unwrap();
    assert!(early.is_empty());
    assert_eq!(late.len(), 20);
}

#[test]
fn classify_pure_periodic() {
    let f = Signal::scalar(0.0, 100.0, 1.0 / 64.0, |t| (2.0 * PI * t).sin());
    let rep = classify(&f, &ApConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Ap, "{:?}", rep.notes);
    let dc = rep.decomposition.as_ref().unwrap();
    assert!((dc.terms[0].frequency - 2.0 * PI).abs() < 1e-6);
    assert!(rep.density_gap.unwrap() >= 0.0);
    assert!(rep.stepanov_norms.iter().all(|s| s.value >= 0.0));
    for p in [1.0, 2.0, 4.0] {
        let cfg = ApConfig { p, ..Default::default() };
        let r = classify(&f, &cfg).unwrap();
        assert!(r.flags.ap && r.flags.sp_ap, "p = {p}");
    }
    let c = classify(&Signal::scalar(0.0, 50.0, 1.0 / 64.0, |_| 3.0), &ApConfig::default()).unwrap();
    assert_eq!(c.verdict, Verdict::Ap);
}

#[test]
fn classify_asymptotic() {
    let f = Signal::scalar(0.0, 300.0, 1.0 / 64.0, |t| kronecker(t) + 2.0 * (-t).exp());
    let rep = classify(&f, &ApConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Aap, "{:?}", rep.flags);
    let dc = rep.decomposition.unwrap();
    let mut w: Vec<f64> = dc.terms.iter().map(|t| t.frequency).collect();
    w.sort_by(f64::total_cmp);
    assert_eq!(w.len(), 2, "{w:?}");
    assert!((w[0] - 1.0).abs() < 1e-3 && (w[1] - SQRT2).abs() < 1e-3, "{w:?}");
    let prof = &dc.remainder_profile;
    assert!(prof.windows(2).all(|p| p[1][1] <= p[0][1]));
    assert!(prof[0][1] > 1.0 && prof.last().unwrap()[1] < 1e-6);
}

#[test]
fn classify_square_wave() {
    let f = Signal::scalar(0.0, 300.0, 1.0 / 64.0, |t| t.sin().signum());
    let rep = classify(&f, &ApConfig::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::SpAp, "{:?}", rep.flags);
    assert!(!rep.flags.ap);
}

#[test]
fn classify_unbounded_and_short() {
    let ramp = Signal::scalar(0.0, 100.0, 1.0 / 64.0, |t| t);
    let rep = classify(&ramp, &ApConfig::default()).unwrap();
    assert!(matches!(rep.verdict, Verdict::NotAp | Verdict::Inconclusive), "{:?}", rep.verdict);
    let short = Signal::scalar(0.0, 5.0, 1.0 / 64.0, |t| t.sin());
    assert_eq!(classify(&short, &ApConfig::default()).unwrap().verdict, Verdict::Inconclusive);
}

#[test]
fn decomposition_independent_of_seeds() {
    let truth = [(0.7, 1.3), (1.9, 0.8)];
    let f = Signal::scalar(0.0, 200.0, 1.0 / 64.0, |t| {
        1.3 * (0.7 * t + 0.2).sin() + 0.8 * (1.9 * t).cos() + (-0.5 * t).exp()
    });
    let a = fit_ap_part(&f, [100.0, 200.0], None, 8).unwrap();
    let b = fit_ap_part(&f, [100.0, 200.0], Some(&[0.705, 1.895]), 8).unwrap();
    for dc in [&a, &b] {
        assert_eq!(dc.terms.len(), 2);
        for (w, amp) in truth {
            let t = dc.terms.iter().find(|t| (t.frequency - w).abs() < 1e-3).expect("frequency recovered");
            assert!((t.amplitude - amp).abs() < 1e-3);
        }
    }
}

#[test]
fn convolution_exponential_kernel() {
    let f = Signal::scalar(-40.0, 200.0, 1e-3, f64::sin);
    let chk =
        convolution_ap_check(&|t: f64| (-t).exp(), &f, &ConvolutionConfig::default(), &ApConfig::default()).unwrap();
    assert!(chk.history < 40.0);
    let mut worst = 0.0f64;
    for i in 0..chk.g.len() {
        let t = chk.g.t(i);
        worst = worst.max((chk.g.value(i)[0] - 0.5 * (t.sin() - t.cos())).abs());
    }
    assert!(worst < 1e-6, "{worst}");
    assert_eq!(chk.report.verdict, Verdict::Ap);

    let zero = Signal::scalar(-40.0, 200.0, 1.0 / 64.0, |_| 0.0);
    let z =
        convolution_ap_check(&|t: f64| (-t).exp(), &zero, &ConvolutionConfig::default(), &ApConfig::default()).unwrap();
    assert!(z.g.data.iter().all(|x| *x == 0.0));
    assert_eq!(z.report.verdict, Verdict::Ap);
}

#[test]
fn convolution_resolvent_kernel() {
    let ev = FamilyEvaluator::new(Operator::diagonal(&[-1.0]).unwrap(), 0.5).unwrap();
    let r = |t: f64| ev.modal_values(Family::R, t).unwrap()[0];
    let f = Signal::scalar(-100.0, 300.0, 1.0 / 64.0, kronecker);
    let chk = convolution_ap_check(&r, &f, &ConvolutionConfig::default(), &ApConfig::default()).unwrap();
    assert_eq!(chk.report.verdict, Verdict::Ap, "{:?}", chk.report.flags);
    assert!(chk.partial_sums.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn convolution_summability_failures() {
    let f = Signal::scalar(-100.0, 200.0, 1.0 / 64.0, f64::sin);
    let slow = convolution_ap_check(&|t: f64| (1.0 + t).powf(-0.5), &f, &Default::default(), &Default::default());
    assert!(matches!(slow, Err(Error::Summability { .. })));
    let singular = convolution_ap_check(&|t: f64| 1.0 / t, &f, &Default::default(), &Default::default());
    assert!(matches!(singular, Err(Error::Summability { .. })));
}

fn field(f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

#[test]
fn composition_examples() {
    let x = Signal::scalar(0.0, 600.0, 1.0 / 64.0, |t| t.sin() + (-t).exp());
    let id = TwoParamForcing::new(field(|_, y| y.to_vec()), LipschitzData::Constant(1.0));
    let direct = classify(&x, &ApConfig::default()).unwrap();
    let chk = composition_check(&id, &x, 2.0, 4.0, &ApConfig::default()).unwrap();
    assert_eq!(chk.report.verdict, direct.verdict);
    assert!((chk.q - 4.0 / 3.0).abs() < 1e-15);

    let big_f = TwoParamForcing::new(field(|t, y| vec![y[0].sin() * kronecker(t)]), LipschitzData::Constant(2.0))
        .with_decay(field(|t, _| vec![(-t).exp()]));
    let chk = composition_check(&big_f, &x, 2.0, 4.0, &ApConfig::default()).unwrap();
    assert!(chk.meets_expectation, "{:?}", chk.report.verdict);
    assert!(chk.report.stepanov_norms.iter().any(|s| (s.p - 4.0 / 3.0).abs() < 1e-15));

    let zero = TwoParamForcing::new(field(|_, _| vec![0.0]), LipschitzData::Constant(0.0));
    assert_eq!(composition_check(&zero, &x, 2.0, 4.0, &ApConfig::default()).unwrap().report.verdict, Verdict::Ap);

    assert!(matches!(composition_check(&id, &x, 2.0, 1.5, &ApConfig::default()), Err(Error::Parameter(_))));
    let liar = TwoParamForcing::new(field(|_, y| vec![3.0 * y[0]]), LipschitzData::Constant(1.0));
    assert!(matches!(composition_check(&liar, &x, 2.0, 4.0, &ApConfig::default()), Err(Error::Parameter(_))));
}

#[test]
fn report_serializes() {
    let f = Signal::scalar(0.0, 40.0, 1.0 / 64.0, |t| (2.0 * PI * t).sin());
    let rep = classify(&f, &ApConfig::default()).unwrap();
    let js = serde_json::to_value(&rep).unwrap();
    assert_eq!(js["verdict"], "AP");
    assert!(js["period_sets"][0]["taus"].is_array());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn epsilon_monotone(e1 in 0.01f64..1.5, e2 in 0.01f64..1.5, w in 0.5f64..2.0) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let f = Signal::scalar(0.0, 40.0, 1.0 / 32.0, |t| (w * t).sin() + 0.5 * (SQRT2 * w * t).cos());
        let a = epsilon_periods(&f, lo, [0.5, 20.0], 0.0).unwrap();
        let b = epsilon_periods(&f, hi, [0.5, 20.0], 0.0).unwrap();
        prop_assert!(a.iter().all(|t| b.contains(t)));
    }

    #[test]
    fn shift_structure(k in 1usize..5) {
        let period = k as f64 * 0.5;
        let f = Signal::scalar(0.0, 30.0, 1.0 / 64.0, |t| (2.0 * PI * t / period).sin());
        let taus = epsilon_periods(&f, 1e-9, [0.25, 12.0], 0.0).unwrap();
        let want: Vec<f64> = (1..).map(|j| j as f64 * period).take_while(|t| *t <= 12.0).collect();
        prop_assert_eq!(taus, want);
    }
}
