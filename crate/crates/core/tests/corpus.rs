use proptest::prelude::*;
use rainfit_core::corpus::{discretize, filter_corpus, preset, simulate_corpus, Family, GeneratorSpec, SiteSeries, Source, PRESETS};
use rainfit_core::egpd::EgpdParams;
use rainfit_core::empirical::SortedSample;
use rainfit_core::gamma_mixture::GammaMixtureParams;

fn egpd_spec(discretize_mm: Option<f64>) -> GeneratorSpec {
    GeneratorSpec {
        family: Family::Egpd(EgpdParams::new(2.0, 5.0, 0.2).unwrap()),
        n: 5_000,
        discretize_mm,
        seed: 11,
    }
}

/// Two-sided one-sample KS 1% critical value at n = 5000 (exact
/// distribution, scipy `kstwo.ppf(0.99, 5000)`).
const KS_CRIT_5000: f64 = 0.022983922603082615;

#[test]
fn simulated_egpd_site_passes_ks() {
    let spec = egpd_spec(None);
    let site = spec.simulate("s").unwrap();
    assert_eq!(site.n_wet(), 5_000);
    assert_eq!(site.source, Source::Synthetic);
    assert_eq!(site.truth.as_ref(), Some(&spec));
    let Family::Egpd(params) = spec.family else { unreachable!() };
    let sorted = SortedSample::from_slice(site.values()).unwrap();
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &y) in sorted.values().iter().enumerate() {
        let f = params.cdf(y).unwrap();
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    assert!(d < KS_CRIT_5000, "KS {d}");
}

#[test]
fn discretized_site_holds_positive_multiples() {
    let site = egpd_spec(Some(0.2)).simulate("s").unwrap();
    assert!(site.n_wet() <= 5_000);
    for &v in site.values() {
        assert!(v > 0.0);
        let k = (v / 0.2).round();
        assert!((v - k * 0.2).abs() < 1e-9, "{v}");
    }
}

#[test]
fn degenerate_mixture_has_single_gamma_mean() {
    let spec = GeneratorSpec {
        family: Family::GammaMixture(GammaMixtureParams::new(vec![1.0, 0.0], vec![2.0, 5.0], vec![3.0, 1.0]).unwrap()),
        n: 100_000,
        discretize_mm: None,
        seed: 4,
    };
    let site = spec.simulate("g").unwrap();
    let n = site.n_wet() as f64;
    let mean = site.values().iter().sum::<f64>() / n;
    // Ga(2, 3): mean 6, sd 3 √2
    let se = 3.0 * 2f64.sqrt() / n.sqrt();
    assert!((mean - 6.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn simulation_is_bit_reproducible() {
    let specs = preset("paper-like-50", 9).unwrap();
    let a = simulate_corpus(&specs).unwrap();
    let b = simulate_corpus(&specs).unwrap();
    assert_eq!(a, b);
    let other = simulate_corpus(&preset("paper-like-50", 10).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn paper_like_sites_all_clear_the_wet_day_floor() {
    let sites = simulate_corpus(&preset("paper-like-50", 0).unwrap()).unwrap();
    assert_eq!(sites.len(), 50);
    let (kept, excluded) = filter_corpus(sites, 100);
    assert_eq!((kept.len(), excluded), (50, 0));
    let medians: Vec<f64> =
        kept.iter().map(|s| SortedSample::from_slice(s.values()).unwrap().quantile(0.5).unwrap()).collect();
    let lo = medians.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = medians.iter().copied().fold(0.0, f64::max);
    assert!(lo > 0.3 && hi < 30.0, "medians in [{lo}, {hi}]");
}

#[test]
fn every_preset_simulates() {
    for name in PRESETS {
        let sites = simulate_corpus(&preset(name, 1).unwrap()).unwrap();
        assert!(sites.iter().all(|s| s.n_wet() >= 100), "{name}");
    }
}

#[test]
fn small_generator_is_rejected() {
    let mut spec = egpd_spec(None);
    spec.n = 99;
    assert!(spec.simulate("s").is_err());
}

proptest! {
    #[test]
    fn discretization_never_leaves_zeros(seed in 0u64..1_000, step in prop::sample::select(vec![0.1, 0.2, 0.5])) {
        let spec = GeneratorSpec {
            family: Family::Egpd(EgpdParams::new(0.7, 1.0, 0.1).unwrap()),
            n: 200,
            discretize_mm: Some(step),
            seed,
        };
        match spec.simulate("s") {
            Ok(site) => prop_assert!(site.values().iter().all(|v| *v > 0.0)),
            Err(e) => prop_assert!(matches!(e, rainfit_core::Error::EmptyData)),
        }
    }

    #[test]
    fn discretize_lands_on_the_grid(y in 0.0f64..500.0, step in prop::sample::select(vec![0.1, 0.2, 1.0])) {
        let d = discretize(y, step);
        prop_assert!((d - y).abs() <= 0.5 * step + 1e-9);
        prop_assert!((d / step - (d / step).round()).abs() < 1e-9);
    }

    #[test]
    fn site_series_keeps_positive_values_in_order(raw in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..100.0], 1..50)) {
        let positive: Vec<f64> = raw.iter().copied().filter(|v| *v > 0.0).collect();
        match SiteSeries::new("x", raw, Source::Ingested) {
            Ok(s) => prop_assert_eq!(s.values(), positive.as_slice()),
            Err(_) => prop_assert!(positive.is_empty()),
        }
    }
}
