//! Subcommand implementations. Each returns a pass flag, a JSON result and
//! optionally a non-JSON primary output (CSV, diagrams).

use std::fmt::Write as _;

use log::{info, warn};
use qising_core::commoncause::{
    candidate_regions, commuting_cc_search, weak_past_pipeline, u0_dynamics_grid, u0_screening, u0_universal_check,
    WeakPastSetup, U0Entry, LOCALIZATION_TOL,
};
use qising_core::dynamics::{cone_algebra, local_primitive_causality_check, Automorphism};
use qising_core::isingnet::{haag_duality_check, relation_residual, symbolic_relation_violations};
use qising_core::matrixcore::{c, identity, CMat, SpanBasis};
use qising_core::oscillator::{psi2_formula, sample_grid, FockTruncation};
use qising_core::probspace::{build_corr_state, correlation, State};
use qising_core::spacetime::{
    cpast, first_guess_common_past, render_svg, render_text, spast, wedges_and_bounds, wpast, Layer, MinimalCone,
    Region,
};
use qising_core::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ConfigError, DiagramFormat, EventSpec, RunConfig, SearchTarget};

/// Largest window (in qubits) on which the dense Haag duality check runs.
const HAAG_MAX_QUBITS: usize = 6;

#[derive(Debug)]
pub enum CmdError {
    Config(ConfigError),
    Core(Error),
}

impl From<ConfigError> for CmdError {
    fn from(e: ConfigError) -> Self {
        CmdError::Config(e)
    }
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        CmdError::Core(e)
    }
}

impl CmdError {
    /// Usage and configuration problems exit with 2, scientific failures with 1.
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Config(_) => 2,
            CmdError::Core(e) => match e {
                Error::InvalidConfig(_)
                | Error::OutOfWindow(_)
                | Error::MarginTooSmall(_)
                | Error::InvalidParams(_)
                | Error::InvalidState(_)
                | Error::BadLambdas(_)
                | Error::ShapeMismatch(_)
                | Error::TruncationTooSmall(_) => 2,
                _ => 1,
            },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CmdError::Config(e) => json!({ "kind": "ConfigError", "message": e.to_string() }),
            CmdError::Core(e) => {
                let debug = format!("{e:?}");
                let kind: String = debug.chars().take_while(|ch| ch.is_alphanumeric()).collect();
                json!({ "kind": kind, "message": e.to_string() })
            }
        }
    }
}

impl std::fmt::Display for CmdError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CmdError::Config(e) => write!(f, "configuration error: {e}"),
            CmdError::Core(e) => write!(f, "{e}"),
        }
    }
}

pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub primary: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// Builds the dynamics and checks that `β^{±padding}` is available for at
/// least one generator of the window.
fn build_dynamics(cfg: &RunConfig) -> Result<Automorphism, CmdError> {
    let chain_cfg = cfg.chain_config()?;
    let params = cfg.dynamics_params()?;
    info!("building dynamics {params:?} on sites [{}, {}]", chain_cfg.x_min, chain_cfg.x_max);
    let dynamics = Automorphism::new(params, &chain_cfg)?;
    let p = chain_cfg.padding as i64;
    if p > 0
        && !chain_cfg.generator_indices().iter().any(|&i| {
            let powers = dynamics.cached_powers(i);
            powers.contains(&p) && powers.contains(&-p)
        })
    {
        return Err(Error::OutOfWindow(format!(
            "window [{}, {}] is too small for padding {p}",
            chain_cfg.x_min, chain_cfg.x_max
        ))
        .into());
    }
    Ok(dynamics)
}

fn event(dynamics: &Automorphism, spec: &EventSpec) -> Result<(Region, CMat), CmdError> {
    let cone = spec.cone()?;
    let u = dynamics.cone_image(&cone)?;
    let p = (identity(dynamics.dim()) + u * c(spec.sign as f64, 0.0)) * c(0.5, 0.0);
    Ok((Region::minimal(cone), p))
}

struct Scenario {
    dynamics: Automorphism,
    o_a: Region,
    o_b: Region,
    a: CMat,
    b: CMat,
    phi: State,
}

fn load_density(path: &std::path::Path) -> Result<CMat, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("state.density_file: cannot read {}: {e}", path.display())))?;
    let rows: Vec<Vec<[f64; 2]>> =
        serde_json::from_str(&text).map_err(|e| ConfigError(format!("state.density_file: {e}")))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(ConfigError("state.density_file: matrix must be square and non-empty".into()).into());
    }
    Ok(CMat::from_fn(n, n, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

fn scenario(cfg: &RunConfig) -> Result<Scenario, CmdError> {
    let dynamics = build_dynamics(cfg)?;
    let (o_a, a) = event(&dynamics, &cfg.events.a)?;
    let (o_b, b) = event(&dynamics, &cfg.events.b)?;
    let phi = match &cfg.state.density_file {
        Some(path) => {
            let rho = load_density(path)?;
            if rho.nrows() != dynamics.dim() {
                return Err(Error::ShapeMismatch(format!(
                    "density has dimension {}, window needs {}",
                    rho.nrows(),
                    dynamics.dim()
                ))
                .into());
            }
            State::new(rho)?
        }
        None => build_corr_state(&a, &b, cfg.state.lambdas)?,
    };
    Ok(Scenario {
        dynamics,
        o_a,
        o_b,
        a,
        b,
        phi,
    })
}

fn algebra_type(n: usize) -> String {
    if n % 2 == 0 {
        format!("M_{}", 1u64 << (n / 2))
    } else {
        let k = 1u64 << ((n - 1) / 2);
        format!("M_{k} + M_{k}")
    }
}

/// A double cone with `n(O) = n` whose generators all have images on the
/// window, preferring balanced shapes near the origin.
fn region_with_n(n: usize, dynamics: &Automorphism) -> Option<Region> {
    let cfg = dynamics.chain().config();
    let reach = 2 * (cfg.x_max - cfg.x_min + 1) + 2 * cfg.padding as i64 + 2;
    let mut best: Option<(i64, Region)> = None;
    for p in 1..=n as i64 {
        let q = n as i64 + 1 - p;
        for u in -reach..=reach {
            for v in -reach..=reach {
                let r = Region::from_bounds((u, u + p - 1), (v, v + q - 1));
                if !r.minimals().iter().all(|cone| dynamics.cone_image(cone).is_ok()) {
                    continue;
                }
                let score = (p - q).abs() * 1000 + (2 * u + p - 1).abs() + (2 * v + q - 1).abs();
                if best.as_ref().is_none_or(|(s, _)| score < *s) {
                    best = Some((score, r));
                }
            }
        }
    }
    best.map(|(_, r)| r)
}

pub fn verify_net(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let dynamics = build_dynamics(cfg)?;
    let chain_cfg = dynamics.chain().config().clone();
    let mut passed = true;

    let symbolic = symbolic_relation_violations(&chain_cfg);
    let dense = relation_residual(dynamics.chain());
    let beta_relations: Vec<(i64, f64)> = (1..=chain_cfg.padding as i64)
        .flat_map(|p| [p, -p])
        .map(|p| (p, dynamics.relation_residual(p)))
        .collect();
    passed &= symbolic.is_empty() && dense == 0.0 && beta_relations.iter().all(|(_, r)| *r < 1e-10);

    let mut table = Vec::new();
    for n in 1..=cfg.verify_net.max_n {
        let Some(region) = region_with_n(n, &dynamics) else {
            warn!("no double cone with n(O) = {n} fits the window");
            table.push(json!({ "n": n, "skipped": "does not fit the window" }));
            continue;
        };
        match cone_algebra(&region, &dynamics) {
            Ok(alg) => {
                let expected_center = if n % 2 == 0 { 1 } else { 2 };
                let ok = alg.lin_dim == 1 << n && alg.center_dim() == expected_center;
                passed &= ok;
                table.push(json!({
                    "n": n,
                    "region": region.to_string(),
                    "lin_dim": alg.lin_dim,
                    "center_dim": alg.center_dim(),
                    "type": algebra_type(n),
                    "ok": ok,
                }));
            }
            Err(e) => {
                passed = false;
                table.push(json!({ "n": n, "region": region.to_string(), "error": e.to_string(), "ok": false }));
            }
        }
    }

    let mut duality = Vec::new();
    if chain_cfg.n_qubits() <= HAAG_MAX_QUBITS {
        let idx = chain_cfg.generator_indices();
        for (k, &i) in idx.iter().enumerate() {
            for &j in &idx[k..] {
                match haag_duality_check(dynamics.chain(), i, j) {
                    Ok(r) if r.informative => {
                        passed &= r.matches;
                        duality.push(to_value(&r));
                    }
                    Ok(_) | Err(Error::MarginTooSmall(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    } else {
        warn!("Haag duality check skipped: more than {HAAG_MAX_QUBITS} qubits");
    }

    let causality = if chain_cfg.padding >= 1 {
        let report = local_primitive_causality_check(&dynamics)?;
        passed &= report.max_residual < 1e-9;
        to_value(&report)
    } else {
        Value::Null
    };

    Ok(Outcome {
        passed,
        result: json!({
            "dynamics": dynamics.params(),
            "relations": {
                "symbolic_violations": symbolic.len(),
                "dense_residual": dense,
                "beta_power_residuals": beta_relations,
            },
            "dimension_table": table,
            "haag_duality": duality,
            "primitive_causality": causality,
        }),
        primary: None,
    })
}

pub fn find_cc(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let s = scenario(cfg)?;
    let cov = correlation(&s.phi, &s.a, &s.b)?;
    info!("correlation {cov:.3e}; running the weak-past construction");
    let (setup, cert) = weak_past_pipeline(&s.o_a, &s.o_b, &s.a, &s.b, &s.dynamics, &s.phi, cfg.tol)?;
    let passed = cert.passes
        && cert.nontrivial
        && cert.localization_residual < LOCALIZATION_TOL
        && setup.past_parts_in_wpast;
    Ok(Outcome {
        passed,
        result: json!({
            "dynamics": s.dynamics.params(),
            "correlation": cov,
            "regions": to_value(&setup.regions),
            "support_center_dim": setup.support_center_dim,
            "primitive_causality_residual": setup.primitive_causality_residual,
            "past_parts_in_wpast": setup.past_parts_in_wpast,
            "certificate": to_value(&cert),
        }),
        primary: None,
    })
}

pub fn u0_sweep(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let grid = cfg.u0.grid.clone().unwrap_or_else(u0_dynamics_grid);
    let lambdas = cfg.state.lambdas;
    // validates the weights before any work is spread out
    let head = u0_universal_check(&[], lambdas)?;
    let chunk = grid.len().div_ceil(cfg.parallel.max(1)).max(1);
    info!("sweeping {} dynamics on {} thread(s)", grid.len(), grid.len().div_ceil(chunk));
    let parts: Vec<Result<Vec<U0Entry>, Error>> = std::thread::scope(|scope| {
        let handles: Vec<_> = grid
            .chunks(chunk)
            .map(|part| scope.spawn(move || u0_universal_check(part, lambdas).map(|r| r.entries)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut entries = Vec::with_capacity(grid.len());
    for part in parts {
        entries.extend(part?);
    }
    let max_residual = entries.iter().map(|e| e.max_residual).fold(0.0, f64::max);
    let probe = match cfg.u0.probe_lambdas {
        Some(l) => {
            let e = u0_screening(cfg.dynamics_params()?, l)?;
            json!({
                "lambdas": l,
                "dynamics": e.params,
                "max_residual": e.max_residual,
                "exceeds_1e-4": e.max_residual > 1e-4,
            })
        }
        None => Value::Null,
    };
    Ok(Outcome {
        passed: max_residual < cfg.tol,
        result: json!({
            "lambdas": lambdas,
            "max_residual": max_residual,
            "caveat": head.caveat,
            "entries": entries,
            "probe": probe,
        }),
        primary: None,
    })
}

pub fn search_commuting(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let s = scenario(cfg)?;
    let target = match cfg.search.target {
        SearchTarget::WeakPast => WeakPastSetup::new(&s.o_a, &s.o_b, &s.dynamics)?.past_algebra,
        SearchTarget::Full => SpanBasis::full_algebra(s.dynamics.dim()),
    };
    info!("searching a target algebra of dimension {}", target.len());
    let report = commuting_cc_search(
        &s.phi,
        &s.a,
        &s.b,
        &target,
        cfg.search.restarts,
        cfg.search.iters,
        cfg.seed,
    )?;
    Ok(Outcome {
        passed: true,
        result: json!({
            "dynamics": s.dynamics.params(),
            "target": cfg.search.target,
            "target_dim": target.len(),
            "report": to_value(&report),
        }),
        primary: None,
    })
}

pub fn oscillator(cfg: &RunConfig) -> Result<Outcome, CmdError> {
    let o = &cfg.oscillator;
    let trunc = FockTruncation::with_units(o.n_levels, o.hbar, o.m, o.omega)?;
    let ts: Vec<f64> = (0..o.points)
        .map(|k| o.t_min + (o.t_max - o.t_min) * k as f64 / (o.points - 1) as f64)
        .collect();
    let samples = sample_grid(&trunc, &ts)?;
    let mut csv = String::from("t,psi0_re,psi0_im,expected_im,psi2_re,psi2_im,psi2_formula_re,psi2_formula_im\n");
    for s in &samples {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            s.t, s.psi0.re, s.psi0.im, s.psi0_expected.im, s.psi2.re, s.psi2.im, s.psi2_formula.re, s.psi2_formula.im
        )
        .expect("writing to a String");
    }
    let deviation = samples.iter().map(|s| (s.psi0 - s.psi0_expected).norm()).fold(0.0, f64::max);
    let psi2_max = samples.iter().map(|s| s.psi2.norm()).fold(0.0, f64::max);
    let formula_max = ts
        .iter()
        .map(|&t| psi2_formula(&trunc, t).map(|z| z.norm()))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: deviation < cfg.tol,
        result: json!({
            "truncation": trunc,
            "max_deviation_from_minus_i_sin": deviation,
            "max_psi2_coefficient": psi2_max,
            "max_psi2_formula": formula_max,
            "psi2_note": "with equal level spacing both exponents in the psi_2 formula coincide, so it vanishes for all t",
            "samples": samples,
        }),
        primary: Some(csv),
    })
}

pub fn regions(cfg: &RunConfig, format: DiagramFormat) -> Result<Outcome, CmdError> {
    let cone_a = cfg.events.a.cone()?;
    let cone_b = cfg.events.b.cone()?;
    let (o_a, o_b) = (Region::minimal(cone_a), Region::minimal(cone_b));
    let (shift, first_guess) = first_guess_common_past(&o_a, &o_b);
    let (w, cp, sp) = (wpast(&o_a, &o_b), cpast(&o_a, &o_b), spast(&o_a, &o_b));
    let weak_regions = match candidate_regions(&o_a, &o_b).or_else(|_| candidate_regions(&o_b, &o_a)) {
        Ok(c) => to_value(&c),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let r = &cfg.regions;
    let in_view = |set: &dyn Fn(&MinimalCone) -> bool| {
        let mut n = 0;
        for t in r.t_range.0..=r.t_range.1 + 1 {
            for x2 in 2 * r.x_range.0..=2 * r.x_range.1 {
                let cone = MinimalCone::new(qising_core::spacetime::HalfIndex::from_twice(x2), t);
                n += set(&cone) as usize;
            }
        }
        n
    };
    let is_a = |c: &MinimalCone| o_a.contains(c);
    let is_b = |c: &MinimalCone| o_b.contains(c);
    let is_guess = |c: &MinimalCone| first_guess.contains(c);
    let is_sp = |c: &MinimalCone| sp.contains(c);
    let is_cp = |c: &MinimalCone| cp.contains(c);
    let is_wp = |c: &MinimalCone| w.contains(c);
    let layers = [
        Layer { label: 'a', set: &is_a },
        Layer { label: 'b', set: &is_b },
        Layer { label: 'g', set: &is_guess },
        Layer { label: 's', set: &is_sp },
        Layer { label: 'c', set: &is_cp },
        Layer { label: 'w', set: &is_wp },
    ];
    let diagram = match format {
        DiagramFormat::Text => {
            let mut out = render_text(&layers, r.x_range, r.t_range);
            out.push_str(
                "a: O_a  b: O_b  g: first guess O_a v O_b - (t,0)  s: strong past  c: common past  w: weak past\n",
            );
            out
        }
        DiagramFormat::Svg => render_svg(&layers, r.x_range, r.t_range),
    };
    let cpast_cones = in_view(&is_cp);
    Ok(Outcome {
        passed: true,
        result: json!({
            "o_a": { "cone": cone_a.to_string(), "region": to_value(&o_a) },
            "o_b": { "cone": cone_b.to_string(), "region": to_value(&o_b) },
            "spacelike": qising_core::spacetime::spacelike_separated(&o_a, &o_b),
            "wpast": to_value(&w),
            "cpast": to_value(&cp),
            "spast": to_value(&sp),
            "cpast_nonempty": cpast_cones > 0,
            "cpast_cones_in_view": cpast_cones,
            "first_guess_common_past": { "shift": shift, "region": first_guess.to_string() },
            "bounds_a": to_value(&wedges_and_bounds(&o_a)),
            "bounds_b": to_value(&wedges_and_bounds(&o_b)),
            "weak_past_regions": weak_regions,
        }),
        primary: Some(diagram),
    })
}
