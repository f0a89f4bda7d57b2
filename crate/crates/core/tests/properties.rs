use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use spt_sim::derived::wkb_transmission;
use spt_sim::materials::MaterialTable;
use spt_sim::stack::{paper_stack, parse_stack};
use spt_sim::trap_dynamics::{
    balanced_switching, channel_current, ensemble_median, master_equation_steady_state,
    openings_with_change, run_ensemble, simulate_trace, spectral_sweep, staircase, ChannelModel,
    EventKind, Illumination, MarkovChain, RateModel, Scenario, ShutterSchedule, TrapState,
    WavelengthProgram,
};

fn channel() -> impl Strategy<Value = ChannelModel> {
    (
        1e-9..1e-3f64,
        -1.0..1.0f64,
        1e-4..1e-2f64,
        -1e-3..0.0f64,
        1e-4..1e-2f64,
        1e-4..1e-2f64,
    )
        .prop_map(
            |(g0, v_th0, dvth_trap, dvth_ion, v_sd, softness)| ChannelModel {
                g0,
                v_th0,
                dvth_trap,
                dvth_ion,
                v_sd,
                softness,
            },
        )
}

fn small_scenario() -> impl Strategy<Value = (Scenario, u64)> {
    (
        0u32..6,
        0u32..20,
        0.9..1.8f64,
        0.0..20.0f64,
        0.0..2.0f64,
        1.0..20.0f64,
        any::<u64>(),
    )
        .prop_map(
            |(capacity, donors, wavelength, absorbed, dark, open, seed)| {
                let mut s = staircase();
                s.rates.dark_spike_rate = dark;
                s.rates.ionize_efficiency = 0.01;
                s.light = Illumination {
                    wavelength,
                    absorbed_rate: absorbed,
                };
                s.initial = TrapState::new(capacity, donors);
                s.shutter = ShutterSchedule::periodic(open, 20.0);
                s.duration = 60.0;
                s.sample_dt = 0.5;
                (s, seed)
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn current_monotone_in_charge(model in channel(), vg in -1.0..1.0f64, n in 0u32..50, ion in 0u32..50) {
        let s = TrapState::new(100, 100).with_trapped(n).with_ionized(ion);
        let i = channel_current(&model, vg, &s);
        prop_assert!(channel_current(&model, vg, &s.with_trapped(n + 1)) <= i);
        prop_assert!(channel_current(&model, vg, &s.with_ionized(ion + 1)) >= i);
        prop_assert!(i >= 0.0);
    }

    #[test]
    fn deep_pinch_off_is_negligible(model in channel(), n in 0u32..20) {
        let s = TrapState::new(100, 100).with_trapped(n);
        let vg = model.threshold(&s) - 20.0 * model.softness;
        let scale = model.v_sd * model.g0 * model.softness;
        prop_assert!(channel_current(&model, vg, &s) < 1e-8 * scale);
    }

    #[test]
    fn traces_respect_bounds_and_shutter((s, seed) in small_scenario()) {
        let t = simulate_trace(&s, seed).unwrap();
        let mut prev = s.initial;
        for e in &t.events {
            prop_assert!(e.n_trapped <= s.initial.capacity);
            prop_assert!(e.n_ionized <= s.initial.donor_total);
            let moved = (i64::from(e.n_trapped) - i64::from(prev.n_trapped)).abs()
                + (i64::from(e.n_ionized) - i64::from(prev.n_ionized)).abs();
            prop_assert_eq!(moved, 1);
            if !e.shutter_open {
                prop_assert_eq!(e.kind, EventKind::DarkSpike);
            }
            prev.n_trapped = e.n_trapped;
            prev.n_ionized = e.n_ionized;
        }
        for smp in &t.samples {
            let st = TrapState { n_trapped: smp.n_trapped, n_ionized: smp.n_ionized, ..s.initial };
            prop_assert_eq!(smp.current, s.current(&st));
        }
        prop_assert!(t.samples.windows(2).all(|w| w[1].t > w[0].t));
        prop_assert!(t.events.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn traces_are_deterministic((s, seed) in small_scenario()) {
        let a = simulate_trace(&s, seed).unwrap();
        let b = simulate_trace(&s, seed).unwrap();
        prop_assert_eq!(a.samples_csv(), b.samples_csv());
        prop_assert_eq!(a.events_csv(), b.events_csv());
    }

    #[test]
    fn two_state_chain_balance(a in 1e-3..1e3f64, b in 1e-3..1e3f64) {
        let mut c = MarkovChain::new(2);
        c.add(0, 1, a);
        c.add(1, 0, b);
        let pi = c.steady_state().unwrap();
        let p = pi.unique().unwrap();
        prop_assert!((p[1] - a / (a + b)).abs() < 1e-10);
        let mut sym = MarkovChain::new(2);
        sym.add(0, 1, a);
        sym.add(1, 0, a);
        let q = sym.steady_state().unwrap();
        prop_assert!((q.unique().unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wkb_decreases_with_barrier(h in 0.05..0.6f64, w in 1.0..10.0f64, m in 0.04..0.1f64) {
        let dz = 0.05;
        let n = (w / dz) as usize + 1;
        let t = wkb_transmission(&vec![h; n], &vec![m; n], dz, 0.0);
        let higher = wkb_transmission(&vec![h * 1.1; n], &vec![m; n], dz, 0.0);
        let wider = wkb_transmission(&vec![h; n + 10], &vec![m; n + 10], dz, 0.0);
        prop_assert!(higher < t && wider < t && t <= 1.0);
    }

    #[test]
    fn stack_round_trip(thicknesses in proptest::collection::vec(1.0..200.0f64, 10), bias in -1.0..1.0f64) {
        let mut s = paper_stack().with_gate_bias(bias);
        for (l, t) in s.layers.iter_mut().zip(thicknesses) {
            l.thickness = t;
        }
        let back = parse_stack(&s.to_toml(), &MaterialTable::builtin()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn trap_counts_are_poisson() {
    let mut s = staircase();
    s.initial = TrapState::new(10_000, 0);
    s.light = Illumination {
        wavelength: 1.0,
        absorbed_rate: 10.0,
    };
    s.duration = 5.0;
    let rate = s.rates.trap_rate(1.0, 10.0);
    let mean = rate * s.duration;
    let seeds: Vec<u64> = (0..400).collect();
    let counts: Vec<usize> = run_ensemble(&s, &seeds)
        .unwrap()
        .iter()
        .map(|t| t.count(EventKind::Trap))
        .collect();
    // Bins 0..=10 with the tail folded into the last bin.
    let poisson = Poisson::new(mean).unwrap();
    let bins = 11;
    let mut observed = vec![0.0; bins];
    for c in counts {
        observed[c.min(bins - 1)] += 1.0;
    }
    let n = seeds.len() as f64;
    let mut chi2 = 0.0;
    let mut used = 0;
    let mut tail = 1.0;
    for (k, obs) in observed.iter().enumerate() {
        let p = if k == bins - 1 {
            tail
        } else {
            poisson.pmf(k as u64)
        };
        tail -= p;
        let expected = n * p;
        chi2 += (obs - expected).powi(2) / expected;
        used += 1;
    }
    let p_value = 1.0 - ChiSquared::new((used - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 0.01, "chi2 = {chi2}, p = {p_value}");
}

#[test]
fn sweeps_on_one_side_of_the_edge_are_monotone() {
    let seeds: Vec<u64> = (0..32).collect();
    let mut below = spectral_sweep();
    below.program = WavelengthProgram::Sweep {
        start_um: 1.0,
        end_um: 1.25,
    };
    let m = ensemble_median(&run_ensemble(&below, &seeds).unwrap());
    assert!(m.windows(2).all(|w| w[1] <= w[0]));

    let mut above = spectral_sweep();
    above.program = WavelengthProgram::Sweep {
        start_um: 1.4,
        end_um: 1.8,
    };
    above.initial = above.initial.with_trapped(20);
    let m = ensemble_median(&run_ensemble(&above, &seeds).unwrap());
    assert!(m.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn balanced_openings_usually_switch() {
    let s = balanced_switching();
    let r = &s.rates;
    let (l, a) = (s.light.wavelength, s.light.absorbed_rate);
    let (trap, detrap) = (r.trap_rate(l, a), r.detrap_rate(l, a));
    assert!(trap <= 2.0 * detrap && detrap <= 2.0 * trap);
    // Either state leaves at the same rate, so P(no change in an opening) = e^(−r·10 s).
    let expected = 1.0 - (-trap * s.shutter.open_duration).exp();
    assert!(expected >= 0.6);
    let seeds: Vec<u64> = (0..32).collect();
    let (mut total, mut changed) = (0, 0);
    for t in run_ensemble(&s, &seeds).unwrap() {
        let (n, c) = openings_with_change(&t);
        assert!(n >= 20);
        total += n;
        changed += c;
    }
    let frac = changed as f64 / total as f64;
    assert!(frac >= 0.6, "{frac}");
    assert!((frac - expected).abs() < 0.05, "{frac} vs {expected}");
}

#[test]
fn closed_shutter_holds_one_level() {
    let mut s = balanced_switching();
    s.shutter = ShutterSchedule::never_open();
    s.duration = 3600.0;
    s.sample_dt = 1.0;
    let t = simulate_trace(&s, 3).unwrap();
    assert!(t.events.is_empty());
    assert!(t.samples.iter().all(|x| x.current == t.samples[0].current));
}

#[test]
fn kmc_matches_master_equation_with_donors() {
    // Trap, neutralization and irreversible ionization together: the
    // ionization row fills and the trap equilibrates within it.
    let rates = RateModel {
        dark_spike_rate: 0.5,
        ionize_efficiency: 0.05,
        ..RateModel::default()
    };
    let light = Illumination {
        wavelength: rates.lambda_gap,
        absorbed_rate: 10.0,
    };
    let template = TrapState::new(2, 3);
    let exact = master_equation_steady_state(&rates, &light, template).unwrap();
    let p = exact.unique().unwrap();
    let kmc =
        spt_sim::trap_dynamics::long_run_occupancy(&rates, &light, template, 20_000, 9).unwrap();
    for (a, b) in p.iter().zip(&kmc) {
        assert!(
            (a - b).abs() < 3.0 * (a * (1.0 - a) / 20_000.0).sqrt() + 2e-3,
            "{a} vs {b}"
        );
    }
}
