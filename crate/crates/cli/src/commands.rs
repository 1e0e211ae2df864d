//! Subcommand implementations. Each returns the rendered document; writing
//! it out is left to the caller.

use casimir_core::em3d;
use casimir_core::limits::{self, Clustering, CommutationReport, Model, ProfileSource};
use casimir_core::regsum;
use casimir_core::scalar1d::{self, Couplings, Route};
use casimir_core::{Geometry, Position, RegScheme};
use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::config::{Format, ModelKind, RunConfig};
use crate::error::CliError;
use crate::output::{render_json, to_json, Cell, Table};

fn scheme_fields(map: &mut Map<String, Value>, cfg: &RunConfig) -> Result<(), CliError> {
    map.insert("model".into(), json!(model_name(cfg)));
    map.insert("length".into(), to_json(&cfg.length())?);
    map.insert("scheme".into(), json!(cfg.scheme.name()));
    map.insert("epsilon".into(), to_json(&cfg.scheme.epsilon())?);
    let (a, m) = cfg.couplings.map_or((None, None), |(a, m)| (Some(a), Some(m)));
    map.insert("alpha".into(), to_json(&a)?);
    map.insert("mass".into(), to_json(&m)?);
    Ok(())
}

fn model_name(cfg: &RunConfig) -> &'static str {
    match cfg.model {
        ModelKind::Scalar => "scalar",
        ModelKind::Em => "em",
    }
}

fn profile_source(cfg: &RunConfig) -> Result<ProfileSource, CliError> {
    Ok(match cfg.model {
        ModelKind::Scalar => match cfg.scalar_couplings()? {
            Some(c) => ProfileSource::ScalarInteracting(c),
            None => ProfileSource::ScalarFree,
        },
        ModelKind::Em => match cfg.em_couplings()? {
            Some(c) => ProfileSource::EmEulerHeisenberg(c),
            None => ProfileSource::EmFree,
        },
    })
}

/// Density profile table: `theta, z, electric, magnetic, total` plus
/// `correction, corrected_total` when couplings are set.
pub fn density_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let profile = limits::sample_profile(profile_source(cfg)?, &cfg.geometry, cfg.scheme, &cfg.grid)?;
    let mut columns = vec!["theta", "z", "electric", "magnetic", "total"];
    if profile.corrections.is_some() {
        columns.extend(["correction", "corrected_total"]);
    }
    let mut table = Table::new(&columns);
    for (i, pos) in profile.positions().enumerate() {
        let v = profile.values[i];
        let mut row = vec![
            Cell::Num(pos.theta()),
            Cell::Num(pos.z()),
            Cell::Num(v.electric),
            Cell::Num(v.magnetic),
            Cell::Num(v.total),
        ];
        if let Some(c) = &profile.corrections {
            row.extend([Cell::Num(c[i]), Cell::Num(v.total + c[i])]);
        }
        table.push(row);
    }
    Ok(table)
}

pub fn cmd_density(cfg: &RunConfig) -> Result<String, CliError> {
    let table = density_table(cfg)?;
    Ok(match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut map = Map::new();
            map.insert("command".into(), json!("density"));
            scheme_fields(&mut map, cfg)?;
            let clustering = match cfg.grid.clustering {
                Clustering::Uniform => "uniform",
                Clustering::Endpoints => "endpoints",
            };
            map.insert("grid".into(), json!({"count": cfg.grid.count, "clustering": clustering}));
            map.insert("columns".into(), json!(table.columns));
            map.insert("rows".into(), table.to_json_rows());
            render_json(&Value::Object(map))
        }
    })
}

/// Total energy record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalRecord {
    pub total_energy: f64,
    /// Interaction part of the total, when couplings are set.
    pub correction: Option<f64>,
    /// Magnitude of the attractive force per plate area (em only).
    pub force_per_area: Option<f64>,
}

pub fn total_record(cfg: &RunConfig) -> Result<TotalRecord, CliError> {
    let g = &cfg.geometry;
    Ok(match cfg.model {
        ModelKind::Scalar => {
            let free = scalar1d::total_energy_by_route(g, Route::SumThenRegularize, cfg.scheme)?
                .finite()
                .expect("sum-then-regularize is finite");
            match cfg.scalar_couplings()? {
                Some(c) => {
                    let total = scalar1d::interacting_total_energy(g, &c)?;
                    TotalRecord {
                        total_energy: total,
                        correction: Some(total - free),
                        force_per_area: None,
                    }
                }
                None => TotalRecord {
                    total_energy: free,
                    correction: None,
                    force_per_area: None,
                },
            }
        }
        ModelKind::Em => {
            let c = cfg.em_couplings()?;
            let free = em3d::free_casimir_density(g) * g.length();
            let correction = c.map(|c| em3d::eh_total_correction(g, &c));
            TotalRecord {
                total_energy: c.map_or(free, |c| em3d::corrected_total_energy(g, &c)),
                correction,
                force_per_area: Some(em3d::casimir_force_per_area(g)),
            }
        }
    })
}

pub fn cmd_total(cfg: &RunConfig) -> Result<String, CliError> {
    let r = total_record(cfg)?;
    Ok(match cfg.format {
        Format::Csv => {
            let (a, m) = cfg.couplings.map_or((None, None), |(a, m)| (Some(a), Some(m)));
            let mut t = Table::new(&[
                "model",
                "length",
                "scheme",
                "epsilon",
                "alpha",
                "mass",
                "total_energy",
                "correction",
                "force_per_area",
            ]);
            t.push(vec![
                Cell::Text(model_name(cfg).into()),
                Cell::Num(cfg.length()),
                Cell::Text(cfg.scheme.name().into()),
                cfg.scheme.epsilon().into(),
                a.into(),
                m.into(),
                Cell::Num(r.total_energy),
                r.correction.into(),
                r.force_per_area.into(),
            ]);
            t.to_csv()
        }
        Format::Json => {
            let mut map = Map::new();
            map.insert("command".into(), json!("total"));
            scheme_fields(&mut map, cfg)?;
            map.insert("total_energy".into(), to_json(&r.total_energy)?);
            map.insert("correction".into(), to_json(&r.correction)?);
            map.insert("force_per_area".into(), to_json(&r.force_per_area)?);
            let units = match cfg.model {
                ModelKind::Scalar => json!({"total_energy": "1/length"}),
                ModelKind::Em => json!({"total_energy": "1/length^3 (per plate area)", "force_per_area": "1/length^4"}),
            };
            map.insert("units".into(), units);
            render_json(&Value::Object(map))
        }
    })
}

pub const DEFAULT_DELTAS: [f64; 4] = [0.02, 0.01, 0.005, 0.0025];
pub const DEFAULT_EPSILONS: [f64; 3] = [0.04, 0.02, 0.01];

fn check_list(field: &str, values: &[f64], upper: f64, min_len: usize) -> Result<(), CliError> {
    if values.len() < min_len {
        return Err(CliError::config(field, format!("need at least {min_len} values")));
    }
    if values.iter().any(|&v| !(v.is_finite() && v > 0.0 && v < upper)) {
        return Err(CliError::config(field, format!("values must lie in (0, {upper})")));
    }
    if values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CliError::config(field, "values must be strictly decreasing"));
    }
    Ok(())
}

pub fn commutation(cfg: &RunConfig, deltas: &[f64], epsilons: &[f64]) -> Result<CommutationReport, CliError> {
    if cfg.model != ModelKind::Scalar {
        return Err(CliError::config("model", "commute is defined for the scalar model"));
    }
    check_list("deltas", deltas, 0.5 * cfg.length(), 2)?;
    check_list("epsilons", epsilons, f64::INFINITY, 1)?;
    let model = match cfg.scalar_couplings()? {
        Some(c) => Model::InteractingScalar(c),
        None => Model::FreeScalar,
    };
    Ok(limits::commutation_report(&cfg.geometry, model, deltas, epsilons)?)
}

pub fn cmd_commute(cfg: &RunConfig, deltas: &[f64], epsilons: &[f64]) -> Result<String, CliError> {
    let report = commutation(cfg, deltas, epsilons)?;
    Ok(match cfg.format {
        Format::Json => render_json(&to_json(&report)?),
        Format::Csv => {
            let mut partial = Table::new(&["delta", "electric", "magnetic", "total", "expected", "excess"]);
            for r in &report.partial_totals {
                partial.push(vec![
                    Cell::Num(r.delta),
                    r.electric.into(),
                    r.magnetic.into(),
                    Cell::Num(r.total),
                    Cell::Num(r.expected),
                    Cell::Num(r.excess),
                ]);
            }
            let mut cutoff = Table::new(&[
                "epsilon",
                "bulk_divergence",
                "electric_position_integral",
                "correction_position_integral",
                "electric",
                "total",
            ]);
            for r in &report.cutoff_totals {
                cutoff.push(vec![
                    Cell::Num(r.epsilon),
                    Cell::Num(r.bulk_divergence),
                    Cell::Num(r.electric_position_integral),
                    r.correction_position_integral.into(),
                    Cell::Num(r.electric),
                    Cell::Num(r.total),
                ]);
            }
            format!("{}\n{}", partial.to_csv(), cutoff.to_csv())
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    /// Cutoff sweep of the scalar sine series and electric density at one angle
    Epsilon,
    /// Boundary-margin sweep of the integrated scalar density
    Delta,
    /// Separation sweep of the total energy
    Length,
}

impl Sweep {
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Sweep::Epsilon => vec![0.08, 0.04, 0.02, 0.01, 0.005],
            Sweep::Delta => DEFAULT_DELTAS.to_vec(),
            Sweep::Length => vec![0.5, 1.0, 2.0, 4.0],
        }
    }
}

fn scalar_only(cfg: &RunConfig, what: &str) -> Result<(), CliError> {
    if cfg.model == ModelKind::Scalar {
        Ok(())
    } else {
        Err(CliError::config("model", format!("{what} sweep is defined for the scalar model")))
    }
}

pub fn scan_table(cfg: &RunConfig, sweep: Sweep, values: &[f64], theta: f64) -> Result<Table, CliError> {
    if values.is_empty() {
        return Err(CliError::config("values", "empty sweep"));
    }
    if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(CliError::config("values", "sweep values must be positive"));
    }
    let g = &cfg.geometry;
    match sweep {
        Sweep::Epsilon => {
            scalar_only(cfg, "epsilon")?;
            if !(theta > 0.0 && theta < std::f64::consts::PI) {
                return Err(CliError::config("theta", "must lie strictly inside (0, π)"));
            }
            let pos = Position::from_theta(theta, g)?;
            let limit = regsum::abel_sum_sin_limit(theta)?;
            let zeta = scalar1d::electric_density(g, &pos, RegScheme::ZetaContinuation)?;
            let mut t = Table::new(&["epsilon", "theta", "sine_sum", "sine_limit", "electric_cutoff", "electric_zeta"]);
            for &eps in values {
                let cutoff = scalar1d::electric_density(g, &pos, RegScheme::cutoff(eps)?)?;
                t.push(vec![
                    Cell::Num(eps),
                    Cell::Num(theta),
                    Cell::Num(regsum::abel_sum_sin(eps, theta)?),
                    Cell::Num(limit),
                    Cell::Num(cutoff),
                    Cell::Num(zeta),
                ]);
            }
            Ok(t)
        }
        Sweep::Delta => {
            scalar_only(cfg, "delta")?;
            if values.iter().any(|&d| d >= 0.5 * g.length()) {
                return Err(CliError::config("values", "margins must be below L/2"));
            }
            let couplings: Option<Couplings> = cfg.scalar_couplings()?;
            let mut cols = vec!["delta", "electric", "magnetic", "total", "expected_electric"];
            if couplings.is_some() {
                cols.extend(["interacting_total", "interacting_expected"]);
            }
            let mut t = Table::new(&cols);
            for &delta in values {
                let out = scalar1d::total_energy_by_route(
                    g,
                    Route::IntegrateRegularizedDensity { margin: delta },
                    RegScheme::ZetaContinuation,
                )?;
                let p = *out.partial().expect("integration route returns partial totals");
                let mut row = vec![
                    Cell::Num(delta),
                    Cell::Num(p.electric),
                    Cell::Num(p.magnetic),
                    Cell::Num(p.total),
                    Cell::Num(p.expected_electric),
                ];
                if let Some(c) = &couplings {
                    let ip = scalar1d::interacting_partial_total(g, c, delta)?;
                    row.extend([Cell::Num(ip.total), Cell::Num(ip.expected)]);
                }
                t.push(row);
            }
            Ok(t)
        }
        Sweep::Length => {
            let mut cols = vec!["length", "total_energy"];
            if cfg.model == ModelKind::Em {
                cols.push("force_per_area");
            }
            let mut t = Table::new(&cols);
            for &l in values {
                let mut sub = cfg.clone();
                sub.geometry = Geometry::new(l)?;
                let r = total_record(&sub)?;
                let mut row = vec![Cell::Num(l), Cell::Num(r.total_energy)];
                if let Some(f) = r.force_per_area {
                    row.push(Cell::Num(f));
                }
                t.push(row);
            }
            Ok(t)
        }
    }
}

pub fn cmd_scan(cfg: &RunConfig, sweep: Sweep, values: &[f64], theta: f64) -> Result<String, CliError> {
    let table = scan_table(cfg, sweep, values, theta)?;
    Ok(match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut map = Map::new();
            map.insert("command".into(), json!("scan"));
            map.insert(
                "sweep".into(),
                json!(sweep.to_possible_value().expect("no skipped variants").get_name()),
            );
            scheme_fields(&mut map, cfg)?;
            map.insert("columns".into(), json!(table.columns));
            map.insert("rows".into(), table.to_json_rows());
            render_json(&Value::Object(map))
        }
    })
}
