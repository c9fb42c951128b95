use atomcav::single_atom::*;
use atomcav::stats::{mean, spearman};
use atomcav::Execution;
use std::f64::consts::{FRAC_PI_2, TAU};

fn rb() -> SingleAtomParams {
    SingleAtomParams {
        g0: TAU * 16e6,
        k: TAU / 780e-9,
        waist: 15e-6,
        kappa: TAU * 0.5e6,
        gamma: TAU * 3e6,
        delta_ca: -TAU * 100e6,
        mass: 1.443e-25,
    }
}

fn antinode(p: &SingleAtomParams) -> [f64; 3] {
    [0.0, 0.0, FRAC_PI_2 / p.k]
}

/// Probe red of the atom-shifted resonance at the antinode by `offset` κ.
fn trapped(p: &SingleAtomParams, offset: f64, field: FieldModel) -> TransitConfig {
    TransitConfig {
        velocity: [0.0, 0.0, 0.05],
        start: Some(antinode(p)),
        duration: Some(1e-3),
        detuning: p.g0 * p.g0 / p.delta_ca + offset * p.kappa,
        eta: p.kappa * 2f64.sqrt(),
        field,
        ..Default::default()
    }
}

fn kinetic(p: &SingleAtomParams, rec: &atomcav::trajectory::TrajectoryRecord) -> Vec<f64> {
    let (vx, vy, vz) = (
        rec.column("vx").unwrap(),
        rec.column("vy").unwrap(),
        rec.column("vz").unwrap(),
    );
    (0..rec.len())
        .map(|i| 0.5 * p.mass * (vx[i] * vx[i] + vy[i] * vy[i] + vz[i] * vz[i]))
        .collect()
}

#[test]
fn dark_cavity_conserves_kinetic_energy() {
    let p = rb();
    let cfg = TransitConfig {
        velocity: [0.3, 0.0, 0.02],
        eta: 0.0,
        ..Default::default()
    };
    let r = simulate_transit(&p, &cfg, 1).unwrap();
    let ke = kinetic(&p, &r.record);
    assert!(ke.iter().all(|&e| (e / ke[0] - 1.0).abs() < 1e-12));
    assert!(r.detections.is_empty());
}

#[test]
fn adiabatic_field_conserves_total_energy() {
    let p = rb();
    let cfg = trapped(&p, -1.0, FieldModel::Adiabatic);
    let r = simulate_transit(&p, &cfg, 1).unwrap();
    let ke = kinetic(&p, &r.record);
    let (x, y, z) = (
        r.record.column("x").unwrap(),
        r.record.column("y").unwrap(),
        r.record.column("z").unwrap(),
    );
    let e: Vec<f64> = (0..r.record.len())
        .map(|i| ke[i] + adiabatic_potential(&p, cfg.detuning, cfg.eta, &[x[i], y[i], z[i]]))
        .collect();
    let depth = adiabatic_potential(&p, cfg.detuning, cfg.eta, &[0.0, 0.0, 0.0])
        - adiabatic_potential(&p, cfg.detuning, cfg.eta, &antinode(&p));
    // The atom is bound and oscillates.
    assert!(ke[0] < depth);
    assert!(z.iter().all(|&z| (z - antinode(&p)[2]).abs() < FRAC_PI_2 / p.k));
    let drift = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-4 * depth, "drift {drift:e} vs depth {depth:e}");
}

#[test]
fn dynamic_field_tracks_steady_state_when_cavity_is_fast() {
    let p = SingleAtomParams {
        kappa: TAU * 5e6,
        ..rb()
    };
    let cfg = TransitConfig {
        velocity: [0.3, 0.0, 0.0],
        detuning: -2.0 * p.kappa,
        eta: p.kappa,
        bin_width: 0.2e-6,
        ..Default::default()
    };
    let r = simulate_transit(&p, &cfg, 4).unwrap();
    let rec = &r.record;
    let col = |c: &str| rec.column(c).unwrap();
    let (x, y, z, re, im) = (col("x"), col("y"), col("z"), col("alpha_re"), col("alpha_im"));
    let mut worst: f64 = 0.0;
    for i in 0..rec.len() {
        let ss = steady_field(&p, cfg.detuning, cfg.eta, &[x[i], y[i], z[i]]);
        let dyn_ = num_complex::Complex64::new(re[i], im[i]);
        worst = worst.max((dyn_ - ss).norm() / ss.norm());
    }
    assert!(worst < 0.01, "worst relative deviation {worst}");
}

#[test]
fn field_lag_cools_a_trapped_atom() {
    let p = rb();
    let dyn_ = simulate_transit(&p, &trapped(&p, -1.0, FieldModel::Dynamic), 1).unwrap();
    let ad = simulate_transit(&p, &trapped(&p, -1.0, FieldModel::Adiabatic), 1).unwrap();
    let late = |v: Vec<f64>| mean(&v[v.len() / 2..]);
    let (kd, ka) = (late(kinetic(&p, &dyn_.record)), late(kinetic(&p, &ad.record)));
    assert!(kd < 0.5 * ka, "dynamic {kd:e} adiabatic {ka:e}");
    // Blue of the shifted resonance the lag heats instead.
    let hot = simulate_transit(&p, &trapped(&p, 1.0, FieldModel::Dynamic), 1).unwrap();
    let hot_ad = simulate_transit(&p, &trapped(&p, 1.0, FieldModel::Adiabatic), 1).unwrap();
    assert!(late(kinetic(&p, &hot.record)) > late(kinetic(&p, &hot_ad.record)));
}

fn far_config(p: &SingleAtomParams) -> TransitConfig {
    TransitConfig {
        velocity: [0.5, 0.0, 0.0],
        impact_parameter: 6.0 * p.waist,
        detuning: -5.0 * p.kappa,
        eta: p.kappa,
        bin_width: 2e-6,
        ..Default::default()
    }
}

#[test]
fn distant_atom_looks_like_empty_cavity() {
    let p = rb();
    let cfg = far_config(&p);
    let r = simulate_transit(&p, &cfg, 11).unwrap();
    let total: u64 = r.counts.iter().sum();
    let expected = empty_cavity_rate(&p, &cfg) * r.counts.len() as f64 * cfg.bin_width;
    assert!(
        (total as f64 - expected).abs() < 3.0 * expected.sqrt(),
        "{total} vs {expected}"
    );
}

#[test]
fn photon_counts_are_poissonian_at_constant_field() {
    let p = rb();
    let cfg = TransitConfig {
        duration: Some(1e4 * 2e-6),
        ..far_config(&p)
    };
    let r = simulate_transit(&p, &cfg, 12).unwrap();
    assert_eq!(r.counts.len(), 10_000);
    let c: Vec<f64> = r.counts.iter().map(|&c| c as f64).collect();
    let m = mean(&c);
    let var = c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (c.len() - 1) as f64;
    let dispersion = var / m;
    assert!((0.9..=1.1).contains(&dispersion), "dispersion {dispersion}");
    // Timestamps are sorted and mirrored as events.
    assert!(r.detections.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(r.record.events_of("photon").count(), r.detections.len());
}

#[test]
fn red_probe_transmission_rises_during_transit() {
    let p = rb();
    let cfg = TransitConfig {
        velocity: [0.3, 0.0, 0.0],
        detuning: -5.0 * p.kappa,
        eta: p.kappa,
        ..Default::default()
    };
    let r = simulate_transit(&p, &cfg, 2).unwrap();
    let n = r.counts.len();
    let centre: u64 = r.counts[n / 2 - n / 20..n / 2 + n / 20].iter().sum();
    let edge: u64 = r.counts[..n / 10].iter().sum();
    assert!(centre as f64 > 5.0 * edge as f64, "centre {centre} edge {edge}");
    assert!(r.record.is_consistent());
}

#[test]
fn transit_duration_scales_inversely_with_speed() {
    let p = rb();
    let speeds: Vec<f64> = (0..10).map(|i| 0.1 * 10f64.powf(i as f64 / 9.0)).collect();
    let medians: Vec<f64> = Execution::Parallel.map(&speeds, |&v| {
        let cfg = TransitConfig {
            velocity: [v, 0.0, 0.0],
            detuning: -5.0 * p.kappa,
            eta: p.kappa,
            dipole_force: false,
            ..Default::default()
        };
        let empty = empty_cavity_rate(&p, &cfg);
        let mut d: Vec<f64> = (0..7)
            .map(|s| {
                let r = simulate_transit(&p, &cfg, s).unwrap();
                transit_duration(&r.counts, cfg.bin_width, empty, 5).unwrap_or(0.0)
            })
            .collect();
        d.sort_by(f64::total_cmp);
        d[3]
    });
    let rho = spearman(&speeds, &medians);
    assert!(rho < -0.9, "spearman {rho}, durations {medians:?}");
}

#[test]
fn transit_is_reproducible_per_seed() {
    let p = rb();
    let cfg = TransitConfig {
        velocity: [0.3, 0.0, 0.0],
        detuning: -5.0 * p.kappa,
        eta: p.kappa,
        recoil: true,
        ..Default::default()
    };
    let a = simulate_transit(&p, &cfg, 5).unwrap();
    let b = simulate_transit(&p, &cfg, 5).unwrap();
    let c = simulate_transit(&p, &cfg, 6).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.detections, c.detections);
}

#[test]
fn recoil_heats_a_trapped_atom() {
    let p = rb();
    let quiet = TransitConfig {
        velocity: [0.0; 3],
        ..trapped(&p, 3.0, FieldModel::Adiabatic)
    };
    let noisy = TransitConfig { recoil: true, ..quiet };
    let k0 = kinetic(&p, &simulate_transit(&p, &quiet, 3).unwrap().record);
    let k1 = kinetic(&p, &simulate_transit(&p, &noisy, 3).unwrap().record);
    let recoil_energy = (1.054_571_817e-34 * p.k).powi(2) / (2.0 * p.mass);
    assert!(k0.iter().all(|&k| k < 1e-6 * recoil_energy));
    assert!(mean(&k1) > recoil_energy);
}

#[test]
fn non_dispersive_parameters_are_flagged() {
    let p = SingleAtomParams {
        delta_ca: -2.0 * rb().g0,
        ..rb()
    };
    let cfg = TransitConfig {
        duration: Some(1e-6),
        ..Default::default()
    };
    assert!(simulate_transit(&p, &cfg, 0).unwrap().dispersive_warning);
    assert!(!simulate_transit(&rb(), &cfg, 0).unwrap().dispersive_warning);
    let zero = SingleAtomParams { delta_ca: 0.0, ..rb() };
    assert!(simulate_transit(&zero, &cfg, 0).is_err());
}

fn trap() -> RadialTrap {
    let p = rb();
    RadialTrap {
        mass: p.mass,
        k: p.k,
        waist: p.waist,
        rate_empty: 1e5,
        rate_max: 2e6,
        scatter_rate: 1e4,
        temperature: 50e-6,
        polarization: [1.0, 0.0, 0.0],
    }
}

#[test]
fn feedback_cools_compared_with_no_feedback() {
    let t = trap();
    let energies = |enabled: bool| -> Vec<f64> {
        let cfg = FeedbackConfig {
            enabled,
            ..Default::default()
        };
        Execution::Parallel.map_indices(100, |s| {
            simulate_bang_bang(&t, &cfg, 20e-3, s as u64).unwrap().final_energy
        })
    };
    let (on, off) = (energies(true), energies(false));
    let stats = |e: &[f64]| {
        let m = mean(e);
        let var = e.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (e.len() - 1) as f64;
        (m, (var / e.len() as f64).sqrt())
    };
    let ((m_on, se_on), (m_off, se_off)) = (stats(&on), stats(&off));
    let z = (m_off - m_on) / (se_on * se_on + se_off * se_off).sqrt();
    assert!(z > 3.0, "on {m_on:e} off {m_off:e} z {z}");
}

#[test]
fn silent_detector_reproduces_feedback_off() {
    let t = trap();
    let dark = FeedbackConfig {
        photon_counting: false,
        ..Default::default()
    };
    let off = FeedbackConfig {
        enabled: false,
        photon_counting: false,
        ..Default::default()
    };
    let a = simulate_bang_bang(&t, &dark, 5e-3, 8).unwrap();
    let b = simulate_bang_bang(&t, &off, 5e-3, 8).unwrap();
    assert_eq!(a.record.data, b.record.data);
    assert!(a.decisions.iter().all(|d| *d == Curvature::Mean));
}

#[test]
fn feedback_decisions_follow_count_differences() {
    let r = simulate_bang_bang(&trap(), &FeedbackConfig::default(), 2e-3, 3).unwrap();
    for i in 1..r.counts.len() {
        assert_eq!(r.decisions[i], decide(r.counts[i - 1], r.counts[i], 0));
    }
    let omega = r.record.column("omega").unwrap();
    let cfg = FeedbackConfig::default();
    for (d, w) in r.decisions.iter().zip(&omega[1..]) {
        let expected = match d {
            Curvature::Low => cfg.omega_low,
            Curvature::Mean => cfg.omega_mean(),
            Curvature::High => cfg.omega_high,
        };
        assert_eq!(*w, expected);
    }
}

#[test]
fn invalid_feedback_settings_are_rejected() {
    let cfg = FeedbackConfig {
        omega_low: 2.0,
        omega_high: 1.0,
        ..Default::default()
    };
    assert!(simulate_bang_bang(&trap(), &cfg, 1e-3, 0).is_err());
}
