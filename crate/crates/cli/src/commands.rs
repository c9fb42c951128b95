//! Subcommand bodies. Each returns its artifacts in memory; nothing here
//! touches the filesystem.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use atomcav::linear::{check_stability, optimal_quadrature, ponderomotive_gain, spring_damping, OptomechParams};
use atomcav::noise::{photon_number_spectrum, sideband_spectrum};
use atomcav::nonlinear::{
    burst_rate, simulate_dynamics, static_bistability_for, DynamicsConfig, DynamicsParams, State,
};
use atomcav::params::{derive as derive_quantities, Geometry};
use atomcav::selforg::{simulate_symmetry_breaking, SidePumpGeometry, SidePumpParams, SymmetryBreakingConfig};
use atomcav::single_atom::{
    empty_cavity_rate, simulate_bang_bang, simulate_transit, transit_duration, Curvature, FeedbackConfig, RadialTrap,
    SingleAtomParams, TransitConfig,
};
use atomcav::stats;
use atomcav::Execution;

use crate::error::{config, CliError};
use crate::output::{Output, Table};
use crate::scenario::{resolve, Ctx};

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// JSON number, or the strings "inf"/"-inf"/"nan".
fn number(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(atomcav::spectrum::fmt_f64(x))
    }
}

pub fn derive(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let d = to_value(&derive_quantities(&ctx.sys)?);
    let mut out = Output::new(d.clone());
    out.json("derived.json", &d)?;
    Ok(out)
}

pub fn spectrum(ctx: &Ctx) -> Result<Output, CliError> {
    let p = OptomechParams::from_system(&ctx.sys)?;
    let span = p.detuning.abs() + 5.0 * p.kappa;
    let grid = ctx.grid("omega", (-span, span, 1001))?;
    let s = photon_number_spectrum(&p, &grid.points(), Execution::Parallel);
    let peak = s.values.iter().zip(&s.omega).fold(
        (f64::NEG_INFINITY, f64::NAN),
        |acc, (&v, &w)| if v > acc.0 { (v, w) } else { acc },
    );
    let mut out = Output::new(json!({
        "quantity": s.quantity,
        "points": s.len(),
        "peak_value": peak.0,
        "peak_omega": peak.1,
        "params_hash": s.params_hash,
    }));
    out.resolved = Some(json!({ "grid": grid }));
    match ctx.format {
        crate::args::Format::Csv => {
            let mut buf = Vec::new();
            s.write_csv(&mut buf)?;
            out.files.push(("spectrum.csv".into(), buf));
        }
        crate::args::Format::Json => out.json("spectrum.json", &s)?,
    }
    Ok(out)
}

pub fn gain(ctx: &Ctx) -> Result<Output, CliError> {
    let p = OptomechParams::from_system(&ctx.sys)?;
    check_stability(&p)?;
    let grid = ctx.grid("omega", (0.01 * p.omega_m, 3.0 * p.omega_m, 2000))?;
    let omegas = grid.points();
    let gain = ponderomotive_gain(&p, &omegas, Execution::Parallel)?;
    let squeeze = Execution::Parallel.map(&omegas, |&w| optimal_quadrature(&p, w));
    let mut table = Table::new([
        "omega_rad_s",
        "am_power_gain",
        "pm_power_gain",
        "squeezing_theta",
        "squeezing_psd",
    ]);
    for (g, (theta, s)) in gain.iter().zip(&squeeze) {
        table.push(&[g.omega, g.am_power_gain(), g.pm_power_gain(), *theta, *s]);
    }
    let best = squeeze
        .iter()
        .zip(&omegas)
        .min_by(|a, b| a.0 .1.total_cmp(&b.0 .1))
        .map(|((theta, s), w)| json!({ "omega": w, "theta": theta, "psd": s, "db": 10.0 * s.log10() }));
    let mut out = Output::new(json!({
        "spring_damping": to_value(&spring_damping(&p)),
        "max_am_power_gain": gain.iter().map(|g| g.am_power_gain()).fold(0.0, f64::max),
        "best_squeezing": best,
        "linearization_warning": p.linearization_warning(),
    }));
    if p.linearization_warning() {
        out.warnings
            .push("linearization: mechanical displacement not small against the cavity linewidth".into());
    }
    out.resolved = Some(json!({ "grid": grid }));
    out.table("gain", &table, ctx.format)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BistabilityScenario {
    /// Resonant photon number η²/κ².
    n_max: f64,
}

pub fn sweep_bistability(ctx: &Ctx) -> Result<Output, CliError> {
    let kappa = ctx.sys.cavity.kappa;
    let default = BistabilityScenario {
        n_max: (ctx.sys.eta() / kappa).powi(2),
    };
    let sc: BistabilityScenario = resolve(&default, ctx.section("sweep_bistability"), "scenario.sweep_bistability")?;
    if !(sc.n_max >= 0.0) {
        return Err(config("scenario.sweep_bistability.n_max must be >= 0"));
    }
    let grid = ctx.grid("detuning", (-10.0 * kappa, 10.0 * kappa, 401))?;
    let diagram = static_bistability_for(&ctx.sys, &grid.points(), sc.n_max, Execution::Parallel)?;
    let mut table = Table::new([
        "detuning_rad_s",
        "roots",
        "n_1",
        "n_2",
        "n_3",
        "stable_1",
        "stable_2",
        "stable_3",
    ]);
    for pt in &diagram.points {
        let mut row = vec![pt.detuning, pt.roots.len() as f64];
        row.extend((0..3).map(|i| pt.roots.get(i).copied().unwrap_or(f64::NAN)));
        row.extend((0..3).map(|i| pt.stable.get(i).map_or(f64::NAN, |&s| if s { 1.0 } else { 0.0 })));
        table.push(&row);
    }
    let mut out = Output::new(json!({
        "g_om": diagram.g_om,
        "n_max": diagram.n_max,
        "bistable_regions": diagram.bistable_regions,
    }));
    out.resolved = Some(json!({ "n_max": sc.n_max, "grid": grid }));
    out.table("bistability", &table, ctx.format)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SelforgScenario {
    lambda: Option<f64>,
    omega_m: Option<f64>,
    detuning: Option<f64>,
    kappa: Option<f64>,
    gamma_m: f64,
    geometry: Option<SidePumpGeometry>,
    n_seeds: usize,
    duration: Option<f64>,
    dt: Option<f64>,
    saturation: Option<f64>,
    noise: bool,
    n_th: f64,
    record_every: usize,
    /// Trajectories written to disk (the first ones of the ensemble).
    trajectories: usize,
    seed: Option<u64>,
}

pub fn selforg(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let d = SymmetryBreakingConfig::default();
    let default = SelforgScenario {
        lambda: None,
        omega_m: None,
        detuning: None,
        kappa: None,
        gamma_m: 0.0,
        geometry: None,
        n_seeds: d.n_seeds,
        duration: None,
        dt: None,
        saturation: d.saturation,
        noise: d.noise,
        n_th: d.n_th,
        record_every: d.record_every,
        trajectories: 1,
        seed: None,
    };
    let mut sc: SelforgScenario = resolve(&default, ctx.section("selforg"), "scenario.selforg")?;
    let sys = &ctx.sys;
    let geometry = sc.geometry.unwrap_or(match sys.cavity.geometry {
        Geometry::StandingWave => SidePumpGeometry::FabryPerot,
        Geometry::Ring => SidePumpGeometry::Ring,
    });
    let physical = match sys.drive.side_pump {
        Some(g_p) => Some(SidePumpParams::from_physical(
            sys.ensemble.n_atoms as f64,
            g_p,
            sys.atom.g0,
            sys.delta_ca(),
            sys.atom.k,
            sys.atom.mass,
            sys.detuning(),
            sys.cavity.kappa,
            geometry,
        )?),
        None => None,
    };
    let pick = |v: Option<f64>, from: fn(&SidePumpParams) -> f64, key: &str| -> Result<f64, CliError> {
        v.or(physical.as_ref().map(from))
            .ok_or_else(|| config(format!("scenario.selforg.{key} is required without drive.g_p")))
    };
    let p = SidePumpParams {
        lambda: pick(sc.lambda, |p| p.lambda, "lambda")?,
        omega_m: pick(sc.omega_m, |p| p.omega_m, "omega_m")?,
        detuning: sc.detuning.unwrap_or(sys.detuning()),
        kappa: sc.kappa.unwrap_or(sys.cavity.kappa),
        gamma_m: sc.gamma_m,
        geometry,
    };
    let fastest = p.omega_m.max(p.detuning.abs()).max(p.kappa).max(p.lambda.abs());
    let cfg = SymmetryBreakingConfig {
        n_seeds: sc.n_seeds,
        duration: sc.duration.unwrap_or(200.0 / p.omega_m),
        dt: sc.dt.unwrap_or(0.01 / fastest),
        saturation: sc.saturation,
        master_seed: ctx.seed(sc.seed),
        noise: sc.noise,
        n_th: sc.n_th,
        record_every: sc.record_every,
    };
    let res = simulate_symmetry_breaking(&p, &cfg, Execution::Parallel)?;
    sc = SelforgScenario {
        lambda: Some(p.lambda),
        omega_m: Some(p.omega_m),
        detuning: Some(p.detuning),
        kappa: Some(p.kappa),
        geometry: Some(geometry),
        duration: Some(cfg.duration),
        dt: Some(cfg.dt),
        saturation: Some(res.summary.saturation),
        seed: Some(cfg.master_seed),
        ..sc
    };

    let mut order = Table::new(["seed_index", "seed", "order_parameter", "magnitude", "growth_rate"]);
    for (i, rec) in res.records.iter().enumerate() {
        order.push(&[
            i as f64,
            rec.seed.map_or(f64::NAN, |s| s as f64),
            res.order_parameters[i],
            res.magnitudes[i],
            res.growth_rates[i].unwrap_or(f64::NAN),
        ]);
    }
    let h = &res.summary.order_parameter_histogram;
    let width = (h.hi - h.lo) / h.counts.len().max(1) as f64;
    let mut hist = Table::new(["bin_lo", "bin_hi", "count"]);
    for (i, &c) in h.counts.iter().enumerate() {
        let lo = h.lo + width * i as f64;
        hist.push(&[lo, lo + width, c as f64]);
    }
    let summary = json!({ "side_pump": p, "summary": res.summary });
    let mut out = Output::new(summary.clone());
    out.resolved = Some(to_value(&sc));
    out.json("summary.json", &summary)?;
    out.table("order_parameters", &order, ctx.format)?;
    out.table("histogram", &hist, ctx.format)?;
    for (i, rec) in res.records.iter().take(sc.trajectories).enumerate() {
        out.trajectory(&format!("trajectory_{i:04}"), rec, ctx.format)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TransitScenario {
    #[serde(flatten)]
    config: TransitConfig,
    seed: Option<u64>,
    /// Moving-average width (bins) for the transit-duration estimate.
    smoothing: usize,
}

pub fn transit(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let sys = &ctx.sys;
    let p = SingleAtomParams::from_system(sys);
    let default = TransitScenario {
        config: TransitConfig {
            // Probe relative to the empty cavity.
            detuning: sys.detuning() + sys.omega_c_shifted() - sys.cavity.omega_c,
            eta: sys.eta(),
            ..TransitConfig::default()
        },
        seed: None,
        smoothing: 5,
    };
    let mut sc: TransitScenario = resolve(&default, ctx.section("transit"), "scenario.transit")?;
    let seed = ctx.seed(sc.seed);
    sc.seed = Some(seed);
    let res = simulate_transit(&p, &sc.config, seed)?;
    let empty = empty_cavity_rate(&p, &sc.config);
    let duration = transit_duration(&res.counts, res.bin_width, empty, sc.smoothing.max(1));
    let mut out = Output::new(json!({
        "detections": res.detections.len(),
        "bins": res.counts.len(),
        "empty_cavity_rate": empty,
        "transit_duration": duration,
        "dispersive_warning": res.dispersive_warning,
    }));
    if res.dispersive_warning {
        out.warnings.push(format!(
            "dispersive: |delta_ca| = {:e} rad/s is within {} g0",
            p.delta_ca.abs(),
            atomcav::single_atom::DISPERSIVE_MARGIN
        ));
    }
    let mut counts = Table::new(["bin_start", "counts"]);
    for (i, &c) in res.counts.iter().enumerate() {
        counts.push(&[i as f64 * res.bin_width, c as f64]);
    }
    out.resolved = Some(to_value(&sc));
    out.trajectory("transit", &res.record, ctx.format)?;
    out.table("counts", &counts, ctx.format)?;
    out.json("detections.json", &json!({ "seed": seed, "times": res.detections }))?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FeedbackScenario {
    trap: RadialTrap,
    config: FeedbackConfig,
    duration: f64,
    n_seeds: usize,
    seed: Option<u64>,
}

fn curvature_code(c: Curvature) -> f64 {
    match c {
        Curvature::Low => -1.0,
        Curvature::Mean => 0.0,
        Curvature::High => 1.0,
    }
}

pub fn feedback(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let sys = &ctx.sys;
    let default = FeedbackScenario {
        trap: RadialTrap {
            mass: sys.atom.mass,
            k: sys.atom.k,
            waist: sys.cavity.waist,
            rate_empty: 1e5,
            rate_max: 2e6,
            scatter_rate: 1e4,
            temperature: 50e-6,
            polarization: [1.0, 0.0, 0.0],
        },
        config: FeedbackConfig::default(),
        duration: 20e-3,
        n_seeds: 100,
        seed: None,
    };
    let mut sc: FeedbackScenario = resolve(&default, ctx.section("feedback"), "scenario.feedback")?;
    if sc.n_seeds == 0 || !(sc.duration > 0.0) {
        return Err(config("scenario.feedback needs n_seeds >= 1 and duration > 0"));
    }
    let master = ctx.seed(sc.seed);
    sc.seed = Some(master);
    let on = sc.config;
    let off = FeedbackConfig { enabled: false, ..on };
    let runs = Execution::Parallel.map_indices(sc.n_seeds, |i| {
        let seed = master.wrapping_add(i as u64);
        let a = simulate_bang_bang(&sc.trap, &on, sc.duration, seed)?;
        let b = simulate_bang_bang(&sc.trap, &off, sc.duration, seed)?;
        Ok::<_, atomcav::PhysicsError>((a, b))
    });
    let runs: Vec<_> = runs.into_iter().collect::<Result<_, _>>()?;

    let mut energies = Table::new(["seed_index", "final_energy_on", "final_energy_off"]);
    for (i, (a, b)) in runs.iter().enumerate() {
        energies.push(&[i as f64, a.final_energy, b.final_energy]);
    }
    let e_on: Vec<f64> = runs.iter().map(|r| r.0.final_energy).collect();
    let e_off: Vec<f64> = runs.iter().map(|r| r.1.final_energy).collect();
    let (m_on, m_off) = (stats::mean(&e_on), stats::mean(&e_off));
    let sem = |v: &[f64]| {
        if v.len() > 1 {
            stats::variance(v).sqrt() / (v.len() as f64).sqrt()
        } else {
            f64::NAN
        }
    };
    let combined = sem(&e_on).hypot(sem(&e_off));
    let first = &runs[0].0;
    let mut decisions = Table::new(["bin", "t", "counts", "decision"]);
    for (i, (&c, &d)) in first.counts.iter().zip(&first.decisions).enumerate() {
        decisions.push(&[i as f64, i as f64 * on.bin_width, c as f64, curvature_code(d)]);
    }
    let summary = json!({
        "n_seeds": sc.n_seeds,
        "mean_energy_on": m_on,
        "mean_energy_off": m_off,
        "sem_on": sem(&e_on),
        "sem_off": sem(&e_off),
        "separation_sigma": number((m_off - m_on) / combined),
        "omega_mean": on.omega_mean(),
    });
    let mut out = Output::new(summary.clone());
    out.resolved = Some(to_value(&sc));
    out.json("summary.json", &summary)?;
    out.table("energies", &energies, ctx.format)?;
    out.table("decisions", &decisions, ctx.format)?;
    out.trajectory("trajectory_on", &first.record, ctx.format)?;
    out.trajectory("trajectory_off", &runs[0].1.record, ctx.format)?;
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SidebandScenario {
    nu_bar: f64,
}

pub fn sideband(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let p = OptomechParams::from_system(&ctx.sys)?;
    let default = SidebandScenario {
        nu_bar: ctx.sys.bath_occupancy(),
    };
    let mut sc: SidebandScenario = resolve(&default, ctx.section("sideband"), "scenario.sideband")?;
    if let Some(nu) = ctx.nu_bar {
        sc.nu_bar = nu;
    }
    let r = sideband_spectrum(&p, sc.nu_bar)?;
    let result = json!({
        "r_plus": r.r_plus,
        "r_minus": r.r_minus,
        "ratio": number(r.ratio),
        "occupation": r.occupation,
        "heat_flux": r.heat_flux,
    });
    let mut out = Output::new(result.clone());
    out.resolved = Some(to_value(&sc));
    out.json("sideband.json", &result)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct InitialState {
    x: f64,
    p: f64,
    alpha_re: f64,
    alpha_im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DynamicsScenario {
    #[serde(flatten)]
    config: DynamicsConfig,
    initial: InitialState,
}

pub fn dynamics(ctx: &Ctx) -> Result<Output, CliError> {
    ctx.only_grids(&[])?;
    let p = DynamicsParams::from_system(&ctx.sys)?;
    let period = TAU / p.omega_m;
    let default = DynamicsScenario {
        config: DynamicsConfig {
            duration: 200.0 * period,
            sample_interval: Some(period / 50.0),
            ..DynamicsConfig::default()
        },
        initial: InitialState {
            x: 0.0,
            p: 0.0,
            alpha_re: 0.0,
            alpha_im: 0.0,
        },
    };
    let user = ctx.section("dynamics");
    let mut sc: DynamicsScenario = resolve(&default, user, "scenario.dynamics")?;
    let scenario_seed = user.and_then(|u| u.get("seed")).and_then(Value::as_u64);
    sc.config.seed = ctx.seed(scenario_seed);
    let init = State {
        alpha: Complex64::new(sc.initial.alpha_re, sc.initial.alpha_im),
        x: sc.initial.x,
        p: sc.initial.p,
    };
    let rec = simulate_dynamics(&p, init, &sc.config)?;
    let equilibria: Vec<Value> = p
        .equilibria()
        .iter()
        .map(|(s, stable)| json!({ "x": s.x, "n_photons": s.alpha.norm_sqr(), "stable": stable }))
        .collect();
    let mut out = Output::new(json!({
        "params": p,
        "samples": rec.len(),
        "bursts": rec.events_of("burst").count(),
        "burst_rate": burst_rate(&rec),
        "equilibria": equilibria,
    }));
    out.resolved = Some(to_value(&sc));
    out.trajectory("dynamics", &rec, ctx.format)?;
    Ok(out)
}
