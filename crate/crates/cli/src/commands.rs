use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use tricoupler::detection::{self, min_count_cutoff, BinSpec, SimConfig};
use tricoupler::fock::{make_state, StateSpec};
use tricoupler::phasespace::{
    q_function, try_eval_grid, AxisLabel, GridSpec, QuadratureSpec, WignerEvaluator, DEFAULT_GRID_BUDGET,
};
use tricoupler::tritter::{tritter_check as run_check, tritter_matrix, CheckResidual};

use crate::output::{self, Format};
use crate::{CliError, ConvergeArgs, Density, GridArgs, IoArgs, SimArgs, SimulateArgs, TritterCheckArgs};

fn read_config<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    // a simulation report carries its configuration under "config"
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn required_out(io: &IoArgs) -> Result<PathBuf, CliError> {
    let out = io.out.clone().ok_or_else(|| CliError::Usage("--out is required".into()))?;
    output::check_writable(&out)?;
    Ok(out)
}

pub fn tritter_check(args: TritterCheckArgs) -> Result<(), CliError> {
    if let Some(out) = &args.out {
        output::check_writable(out)?;
    }
    let mut coupler = tritter_matrix::<f64>();
    if let Some(eps) = args.perturb {
        if !eps.is_finite() {
            return Err(CliError::Usage("--perturb must be finite".into()));
        }
        coupler.t[0][0] += Complex64::new(eps, 0.0);
    }
    let report = run_check(&coupler, args.ft_cutoff)?;
    let rows: [(&str, CheckResidual); 4] = [
        ("unitarity", report.unitarity),
        ("moduli", report.moduli),
        ("ft_identity", report.ft_identity),
        ("decomposition", report.decomposition),
    ];
    for (name, r) in &rows {
        println!(
            "{name:<14} residual {:.3e} (tolerance {:.0e}) {}",
            r.residual,
            r.tolerance,
            if r.pass { "ok" } else { "FAILED" }
        );
    }
    let json = output::to_json(&report);
    match &args.out {
        Some(out) => output::write_atomic(out, &json)?,
        None => print!("{}", String::from_utf8_lossy(&json)),
    }
    let failed: Vec<String> = rows
        .iter()
        .filter(|(_, r)| !r.pass)
        .map(|(n, r)| format!("{n} residual {:.3e}", r.residual))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(failed.join(", ")))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    density: Option<Density>,
    s: Option<f64>,
    signal: Option<StateSpec>,
    probe: Option<StateSpec>,
    cutoff: Option<usize>,
    window: Option<GridSpec>,
    quadrature: Option<QuadratureSpec>,
}

pub fn grid(args: GridArgs) -> Result<(), CliError> {
    let file: GridFile = read_config(args.io.config.as_deref())?;
    let out = required_out(&args.io)?;
    let format = args.io.format.unwrap_or(Format::Csv);
    let density = args.density.or(file.density).unwrap_or(Density::KSp);
    let s = args.s.or(file.s).unwrap_or(0.0);
    let signal = args.signal.or(file.signal).unwrap_or(StateSpec::coherent(1.0, 0.0));
    let probe = args.probe.or(file.probe).unwrap_or(StateSpec::vacuum());
    let cutoff = args.cutoff.or(file.cutoff).unwrap_or(40);
    let mut window = file.window.unwrap_or(GridSpec {
        x_min: -2.0,
        x_max: 4.0,
        y_min: -3.0,
        y_max: 3.0,
        nx: 61,
        ny: 61,
    });
    if let Some([a, b, c, d]) = args.window {
        (window.x_min, window.x_max, window.y_min, window.y_max) = (a, b, c, d);
    }
    if let Some((nx, ny)) = args.resolution {
        (window.nx, window.ny) = (nx, ny);
    }
    window.validate()?;
    if window.len() > DEFAULT_GRID_BUDGET {
        return Err(CliError::Usage(format!("grid of {} points exceeds {DEFAULT_GRID_BUDGET}", window.len())));
    }
    let mut quad = file.quadrature.unwrap_or_default();
    if let Some(r) = args.quad_radius {
        quad.radius = r;
    }
    if let Some(n) = args.quad_points {
        quad.points_per_axis = n;
    }
    quad.validate()?;
    let psi_s = make_state::<f64>(&signal, cutoff)?;
    let psi_p = make_state::<f64>(&probe, cutoff)?;

    let label = AxisLabel::AlphaPlane;
    let grid = match density {
        Density::KSp => try_eval_grid(
            |a| tricoupler::phasespace::k_sp_trace_pure(&psi_s, &psi_p, a).map(|v| v.value),
            &window,
            label,
            DEFAULT_GRID_BUDGET,
        )?,
        Density::Wigner => {
            let w = WignerEvaluator::new(&psi_s.density_matrix(), s, &quad)?;
            try_eval_grid(|a| w.at(a).map(|v| v.value), &window, label, DEFAULT_GRID_BUDGET)?
        }
        Density::Q => {
            let rho = psi_s.density_matrix();
            try_eval_grid(|a| q_function(&rho, a).map(|v| v.value), &window, label, DEFAULT_GRID_BUDGET)?
        }
    };
    output::write_atomic(&out, &output::encode_grid(&grid, format))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    z_mag: Option<f64>,
    signal_spec: Option<StateSpec>,
    probe_spec: Option<StateSpec>,
    cutoff_sp: Option<usize>,
    count_cutoff: Option<usize>,
    n_samples: Option<usize>,
    seed: Option<u64>,
    bin_spec: Option<BinSpec>,
    z_values: Option<Vec<f64>>,
}

fn resolve_sim(file: &SimFile, args: &SimArgs, z_default: f64) -> Result<SimConfig, CliError> {
    let z = args.z.or(file.z_mag).unwrap_or(z_default);
    if !(z.is_finite() && z > 0.0) {
        return Err(CliError::Usage(format!("|z| must be positive, got {z}")));
    }
    let signal = args.signal.or(file.signal_spec).unwrap_or(StateSpec::coherent(1.0, 0.0));
    let probe = args.probe.or(file.probe_spec).unwrap_or(StateSpec::vacuum());
    let cutoff_sp = args.cutoff_sp.or(file.cutoff_sp).unwrap_or(16);
    let mut cfg = SimConfig::new(z, signal, probe, cutoff_sp);
    cfg.count_cutoff = args.count_cutoff.or(file.count_cutoff).unwrap_or(min_count_cutoff(z));
    cfg.bin_spec = file.bin_spec.unwrap_or_default();
    if let Some([x_min, x_max, y_min, y_max]) = args.window {
        cfg.bin_spec = BinSpec::Lattice { x_min, x_max, y_min, y_max };
    }
    if let Some((nx, ny)) = args.bins {
        let w = match cfg.bin_spec {
            BinSpec::Lattice { x_min, x_max, y_min, y_max } => [x_min, x_max, y_min, y_max],
            BinSpec::Grid(g) => [g.x_min, g.x_max, g.y_min, g.y_max],
        };
        cfg.bin_spec = BinSpec::Grid(GridSpec::new(w[0], w[1], w[2], w[3], nx, ny)?);
    }
    Ok(cfg)
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let file: SimFile = read_config(args.io.config.as_deref())?;
    let out = required_out(&args.io)?;
    let format = args.io.format.unwrap_or(Format::Csv);
    let mut cfg = resolve_sim(&file, &args.sim, 12.0)?;
    cfg.n_samples = args.samples.or(file.n_samples).unwrap_or(100_000);
    cfg.seed = args.seed.or(file.seed).unwrap_or(0);
    if cfg.n_samples == 0 {
        return Err(CliError::Usage("--samples must be at least 1".into()));
    }
    cfg.validate()?;

    let run = detection::simulate::<f64>(&cfg)?;
    let ext = format.extension();
    output::write_atomic(&output::sibling(&out, "empirical", ext), &output::encode_grid(&run.empirical.grid, format))?;
    output::write_atomic(&output::sibling(&out, "reference", ext), &output::encode_grid(&run.reference, format))?;
    output::write_atomic(&output::sibling(&out, "report", "json"), &output::to_json(&run.report))?;
    let r = &run.report;
    println!(
        "l1 {:.6}  max_abs {:.6}  mass_deficit {:.3e}  clipped {:.3e}",
        r.l1, r.max_abs, r.mass_deficit, r.clipped_fraction
    );
    Ok(())
}

pub fn converge(args: ConvergeArgs) -> Result<(), CliError> {
    let file: SimFile = read_config(args.io.config.as_deref())?;
    let out = required_out(&args.io)?;
    let format = args.io.format.unwrap_or(Format::Csv);
    if format == Format::Ppm {
        return Err(CliError::Usage("converge writes csv or json".into()));
    }
    let zs = args
        .z_values
        .clone()
        .or(file.z_values.clone())
        .unwrap_or_else(|| vec![3.0, 6.0, 12.0]);
    if zs.len() < 3 {
        return Err(CliError::Usage(format!("need at least 3 |z| values, got {}", zs.len())));
    }
    if let Some(bad) = zs.iter().find(|z| !(z.is_finite() && **z > 0.0)) {
        return Err(CliError::Usage(format!("|z| values must be positive, got {bad}")));
    }
    let cfg = resolve_sim(&file, &args.sim, zs[0])?;
    cfg.validate()?;
    let report = detection::convergence_study::<f64>(&cfg, &zs)?;
    let bytes = match format {
        Format::Csv => {
            let mut s = String::from("z_mag,l1\n");
            for p in &report.points {
                let _ = writeln!(s, "{:.16e},{:.16e}", p.z_mag, p.l1);
            }
            let _ = writeln!(s, "# slope,{:.16e}", report.slope);
            s.into_bytes()
        }
        _ => output::to_json(&report),
    };
    output::write_atomic(&out, &bytes)?;
    for p in &report.points {
        println!("|z| {:>8.3}  l1 {:.6}", p.z_mag, p.l1);
    }
    println!("slope {:.4}", report.slope);
    Ok(())
}
