use std::fs;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{scale_coordinates, scale_length_field, DesignConfig};
use super::gridfile::GridFile;
use crate::error::{Error, Result};
use crate::fields::PhaseField;
use crate::grid::ScalarField;
use crate::scenario::{
    phase_from_potential, potential_from_phase, reduce_to_ma, Scenario, SourceKind, Transport, MASS_BALANCE_TOLERANCE,
};
use crate::solver::{convexity_check, ma_residual, ma_residual_lenient, solve, ResidualStats, SolverResult};
use crate::verify::{density_distance, energy_balance_traced, sphere_histogram, trace, DensityDistance, EnergyBalance};

/// Largest admissible share of evanescent rays in a verified design.
pub const MAX_EVANESCENT_FRACTION: f64 = 1e-3;

pub const PHASE_FILE: &str = "phase.grid";
pub const POTENTIAL_FILE: &str = "potential.grid";
pub const RESIDUAL_FILE: &str = "residual.grid";
pub const SOLVE_REPORT_FILE: &str = "report.json";
pub const VERIFY_REPORT_FILE: &str = "verify.json";
pub const HISTOGRAM_FILE: &str = "histogram.tsv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBalance {
    pub source_mass: f64,
    pub target_mass: f64,
    pub relative_error: f64,
    /// Factor applied to `g` when `normalize_masses` is set.
    pub normalization_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub converged: bool,
    pub iterations: usize,
    pub marginal_error: f64,
    pub epsilon_schedule: Vec<f64>,
    pub zero_mass_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientRange {
    /// Largest `|grad phi|` over nodes of D1.
    pub max_norm: f64,
    /// Radius of the projected target, `sin theta_max`.
    pub target_radius: f64,
    /// Share of D1 nodes whose gradient lies outside D2.
    pub outside_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub transport: Transport,
    pub source: SourceKind,
    pub n1: f64,
    pub n2: f64,
    pub resolution: usize,
    pub mass_balance: MassBalance,
    pub solver: SolverSummary,
    pub residual: Option<ResidualStats>,
    pub min_hessian_eigenvalue: f64,
    pub fraction_nonconvex: f64,
    pub gradient_range: GradientRange,
    pub warnings: Vec<String>,
}

fn balanced(cfg: &DesignConfig, base: &Path) -> Result<(Scenario, MassBalance, Vec<String>)> {
    let raw = cfg.build_scenario(base)?;
    let (source_mass, target_mass, relative_error) = raw.mass_imbalance();
    let mut warnings = Vec::new();
    if !raw.source.domain.is_uniformly_convex() || !raw.target.projected_region().is_uniformly_convex() {
        warnings.push("source or projected target domain is not uniformly convex".to_string());
    }
    let (scenario, factor) = if cfg.normalize_masses {
        let (s, f) = raw.normalized();
        (s, Some(f))
    } else {
        if !(relative_error <= MASS_BALANCE_TOLERANCE) {
            return Err(Error::MassImbalance {
                source_mass,
                target_mass,
                relative: relative_error,
            });
        }
        (raw, None)
    };
    Ok((
        scenario,
        MassBalance {
            source_mass,
            target_mass,
            relative_error,
            normalization_factor: factor,
        },
        warnings,
    ))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Solves the design problem and writes the phase, potential and residual
/// grids together with `report.json` into `out`. A run that exhausts its
/// iteration budget still writes its artifacts before reporting
/// [`Error::NoConvergence`].
pub fn run_solve(cfg: &DesignConfig, base: &Path, out: &Path) -> Result<SolveReport> {
    cfg.validate()?;
    let (scenario, mass_balance, mut warnings) = balanced(cfg, base)?;
    let problem = reduce_to_ma(&scenario, cfg.grid.resolution)?;
    let params = cfg.solver_params(&problem);
    info!(
        "solving on a {}x{} grid, {} epsilon stages",
        problem.grid.nx,
        problem.grid.ny,
        params.epsilon_schedule.len()
    );
    let (result, failure): (SolverResult, Option<(usize, f64)>) = match solve(&problem, &params) {
        Ok(r) => (r, None),
        Err(Error::NoConvergence {
            iterations,
            marginal_error,
            partial,
        }) => (*partial, Some((iterations, marginal_error))),
        Err(e) => return Err(e),
    };

    let psi = phase_from_potential(&result.phi, &scenario);
    let residual = ma_residual_lenient(&result.phi, &problem);
    let convexity = convexity_check(&result.phi);
    let target_radius = scenario.target.theta_max.sin();
    let mut max_norm: f64 = 0.0;
    for (k, g) in result.gradient_map.iter().enumerate() {
        if problem.inside[k] {
            max_norm = max_norm.max(g[0].hypot(g[1]));
        }
    }
    if result.gradient_outside_fraction > 0.0 {
        warnings.push(format!(
            "{:.3}% of the source nodes map outside the projected target",
            100.0 * result.gradient_outside_fraction
        ));
    }
    if residual.stats.out_of_range > 0 {
        warnings.push(format!(
            "{} interior nodes were left out of the residual: gradient outside the target domain",
            residual.stats.out_of_range
        ));
    }
    for w in &warnings {
        warn!("{w}");
    }

    let k = cfg.length_scale();
    fs::create_dir_all(out)?;
    GridFile::new("phase", scale_length_field(&psi, k)).write(&out.join(PHASE_FILE))?;
    GridFile::new("potential", scale_length_field(&result.phi, k)).write(&out.join(POTENTIAL_FILE))?;
    GridFile::new("residual", scale_coordinates(&residual.field, 1.0 / k)).write(&out.join(RESIDUAL_FILE))?;

    let report = SolveReport {
        transport: scenario.transport,
        source: scenario.source.kind,
        n1: scenario.media.n1(),
        n2: scenario.media.n2(),
        resolution: cfg.grid.resolution,
        mass_balance,
        solver: SolverSummary {
            converged: result.converged,
            iterations: result.iterations_used,
            marginal_error: result.marginal_error,
            epsilon_schedule: params.epsilon_schedule.clone(),
            zero_mass_nodes: result.zero_mass_nodes.len(),
        },
        residual: (residual.stats.nodes > 0).then_some(residual.stats),
        min_hessian_eigenvalue: convexity.min_eigenvalue,
        fraction_nonconvex: convexity.fraction_nonconvex,
        gradient_range: GradientRange {
            max_norm,
            target_radius,
            outside_fraction: result.gradient_outside_fraction,
        },
        warnings,
    };
    write_json(&out.join(SOLVE_REPORT_FILE), &report)?;
    if let Some((iterations, marginal_error)) = failure {
        return Err(Error::NoConvergence {
            iterations,
            marginal_error,
            partial: Box::new(result),
        });
    }
    Ok(report)
}

/// Reads a phase grid written by [`run_solve`] and maps it to the plane `z = 1`.
pub fn read_phase(cfg: &DesignConfig, path: &Path) -> Result<PhaseField> {
    let file = GridFile::read(path)?;
    if file.name != "phase" {
        return Err(Error::Format(format!(
            "{}: expected a phase grid, found `{}`",
            path.display(),
            file.name
        )));
    }
    Ok(PhaseField(scale_length_field(&file.field, 1.0 / cfg.length_scale())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionBalance {
    pub region: String,
    #[serde(flatten)]
    pub balance: EnergyBalanceRecord,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBalanceRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

impl From<EnergyBalance> for EnergyBalanceRecord {
    fn from(e: EnergyBalance) -> Self {
        EnergyBalanceRecord {
            lhs: e.lhs,
            rhs: e.rhs,
            rel_err: e.rel_err,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub l1: f64,
    pub linf: f64,
    pub linf_bins: usize,
}

impl From<DensityDistance> for DistanceRecord {
    fn from(d: DensityDistance) -> Self {
        DistanceRecord {
            l1: d.l1,
            linf: d.linf,
            linf_bins: d.linf_bins,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub rays: usize,
    pub seed: u64,
    pub bins_u: usize,
    pub bins_v: usize,
    pub traced_power: f64,
    pub binned_power: f64,
    pub evanescent_power: f64,
    pub evanescent_fraction: f64,
    /// Rays leaving the cap, counted in its boundary bins.
    pub outside_fraction: f64,
    pub density_distance: DistanceRecord,
    pub energy_balance: Vec<RegionBalance>,
    pub passed: bool,
}

/// One row of the exported histogram: spherical angles of the bin center
/// (`v` measured from `+e3`), its solid angle, and both densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramRow {
    pub u_center: f64,
    pub v_center: f64,
    pub solid_angle: f64,
    pub measured_density: f64,
    pub target_density: f64,
}

pub const HISTOGRAM_HEADER: &str = "u_center\tv_center\tsolid_angle\tmeasured_density\ttarget_density";

pub fn format_histogram(rows: &[HistogramRow]) -> String {
    let mut s = String::from(HISTOGRAM_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.u_center, r.v_center, r.solid_angle, r.measured_density, r.target_density
        ));
    }
    s
}

pub fn parse_histogram(text: &str) -> Result<Vec<HistogramRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(HISTOGRAM_HEADER) {
        return Err(Error::Format("histogram header does not match".into()));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            let v: Vec<f64> = l
                .split('\t')
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Format(format!("histogram line {}: not numeric", k + 2)))?;
            if v.len() != 5 {
                return Err(Error::Format(format!("histogram line {}: expected 5 columns", k + 2)));
            }
            Ok(HistogramRow {
                u_center: v[0],
                v_center: v[1],
                solid_angle: v[2],
                measured_density: v[3],
                target_density: v[4],
            })
        })
        .collect()
}

/// Traces the configured number of rays through a phase grid and writes
/// `histogram.tsv` and `verify.json` into `out`.
pub fn run_verify(cfg: &DesignConfig, base: &Path, phase_path: &Path, out: &Path) -> Result<VerifyReport> {
    cfg.validate()?;
    let (scenario, _, _) = balanced(cfg, base)?;
    let psi = read_phase(cfg, phase_path)?;
    let v = &cfg.verify;
    let traced = trace(&scenario, &psi, v.rays, v.seed)?;
    let hist = sphere_histogram(traced.outcomes(), &scenario.target, v.bins_u, v.bins_v);
    let dd = density_distance(&hist, &scenario.target);

    let c = scenario.source.domain.center();
    let regions: [(&str, Box<dyn Fn([f64; 2]) -> bool + Sync>); 5] = [
        ("full", Box::new(|_| true)),
        ("x+y+", Box::new(move |p| p[0] >= c[0] && p[1] >= c[1])),
        ("x-y+", Box::new(move |p| p[0] < c[0] && p[1] >= c[1])),
        ("x-y-", Box::new(move |p| p[0] < c[0] && p[1] < c[1])),
        ("x+y-", Box::new(move |p| p[0] >= c[0] && p[1] < c[1])),
    ];
    let energy_balance = regions
        .iter()
        .map(|(name, f)| RegionBalance {
            region: name.to_string(),
            balance: energy_balance_traced(&scenario, &traced, v.bins_u, v.bins_v, f).into(),
        })
        .collect();

    let rows: Vec<HistogramRow> = (0..hist.len())
        .map(|k| {
            let d = hist.bin_direction(k);
            let mut u = d[1].atan2(d[0]);
            if u < 0.0 {
                u += 2.0 * std::f64::consts::PI;
            }
            HistogramRow {
                u_center: u,
                v_center: d[2].clamp(-1.0, 1.0).acos(),
                solid_angle: hist.solid_angle(k),
                measured_density: hist.density(k),
                target_density: scenario.target.g(d),
            }
        })
        .collect();

    let evanescent_fraction = traced.evanescent_fraction();
    let report = VerifyReport {
        rays: v.rays,
        seed: v.seed,
        bins_u: v.bins_u,
        bins_v: v.bins_v,
        traced_power: traced.rays.total_power(),
        binned_power: hist.total_power(),
        evanescent_power: traced.evanescent_power(),
        evanescent_fraction,
        outside_fraction: hist.outside_fraction(),
        density_distance: dd.into(),
        energy_balance,
        passed: evanescent_fraction <= MAX_EVANESCENT_FRACTION,
    };
    fs::create_dir_all(out)?;
    fs::write(out.join(HISTOGRAM_FILE), format_histogram(&rows))?;
    write_json(&out.join(VERIFY_REPORT_FILE), &report)?;
    if !report.passed {
        return Err(Error::VerificationFailed(format!(
            "{:.3}% of the rays are evanescent (limit {:.1}%)",
            100.0 * evanescent_fraction,
            100.0 * MAX_EVANESCENT_FRACTION
        )));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub residual: ResidualStats,
    pub min_hessian_eigenvalue: f64,
    pub fraction_nonconvex: f64,
}

/// Certifies a phase grid against the equation for the configured scenario.
pub fn run_residual(cfg: &DesignConfig, base: &Path, phase_path: &Path) -> Result<(ResidualSummary, ScalarField)> {
    cfg.validate()?;
    let (scenario, _, _) = balanced(cfg, base)?;
    let psi = read_phase(cfg, phase_path)?;
    let problem = reduce_to_ma(&scenario, cfg.grid.resolution)?;
    if !problem.grid.same_layout(&psi.grid) {
        return Err(Error::GridMismatch(format!(
            "phase grid {}x{} does not match the configured {}x{} problem grid",
            psi.grid.nx, psi.grid.ny, problem.grid.nx, problem.grid.ny
        )));
    }
    let phi = potential_from_phase(&psi, &scenario);
    let report = ma_residual(&phi, &problem)?;
    let convexity = convexity_check(&phi);
    Ok((
        ResidualSummary {
            residual: report.stats,
            min_hessian_eigenvalue: convexity.min_eigenvalue,
            fraction_nonconvex: convexity.fraction_nonconvex,
        },
        report.field,
    ))
}
