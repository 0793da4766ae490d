use serde::Serialize;
use serde_json::{json, Value};

use spinbridge::bridge::{
    estimate_propagator_with, nu_scan, BridgeConfig, EstimatorOptions, Execution, ScanEntry, ScanSpec, StepPolicy,
};
use spinbridge::contraction::{contraction_ladder, ContractionCase};
use spinbridge::lattice::{convergence_check, ConvergenceOptions};
use spinbridge::record::ReIm;
use spinbridge::{exact_propagator_element, reconstruct_from_symbol, PlaneQuadrature64, SpinSystem64};

use crate::config::{CaseName, RunConfig, Subcommand};
use crate::error::CliError;

/// Largest entry deviation accepted by `symbol-check`.
pub const SYMBOL_CHECK_TOLERANCE: f64 = 1e-6;

/// What a subcommand produced, before it is written out.
pub struct Output {
    pub result: Value,
    pub table: Vec<u8>,
}

fn csv_table<R: Serialize>(rows: &[R]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn system(cfg: &RunConfig) -> Result<SpinSystem64, CliError> {
    Ok(SpinSystem64::new(cfg.two_j.unwrap_or(0))?)
}

/// Runs a validated config.
pub fn execute(sub: Subcommand, cfg: &RunConfig, serial: bool) -> Result<Output, CliError> {
    cfg.validate(sub)?;
    match sub {
        Subcommand::Exact => exact(cfg),
        Subcommand::SymbolCheck => symbol_check(cfg),
        Subcommand::Mc => mc(cfg, serial),
        Subcommand::NuScan => scan(cfg, serial),
        Subcommand::Pde => pde(cfg),
        Subcommand::Contract => contract(cfg),
    }
}

#[derive(Serialize)]
struct ValueRow {
    two_j: i64,
    t: f64,
    z_re: f64,
    z_im: f64,
    zp_re: f64,
    zp_im: f64,
    value_re: f64,
    value_im: f64,
}

fn exact(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = system(cfg)?;
    let ham = cfg.hamiltonian.as_ref().unwrap().build(&sys);
    let (z, zp, t) = (cfg.z.unwrap(), cfg.zp.unwrap(), cfg.t.unwrap());
    let mode = cfg.mode.unwrap_or_default();
    let value = exact_propagator_element(&sys, &ham, t, z.to_point(), zp.to_point(), mode)?;
    let row = ValueRow {
        two_j: i64::from(sys.two_j()),
        t,
        z_re: z.re,
        z_im: z.im,
        zp_re: zp.re,
        zp_im: zp.im,
        value_re: value.re,
        value_im: value.im,
    };
    Ok(Output {
        result: json!({"subcommand": "exact", "two_j": sys.two_j(), "t": t, "z": z, "zp": zp, "mode": mode, "value": ReIm::from(value)}),
        table: csv_table(&[row])?,
    })
}

#[derive(Serialize)]
struct EntryRow {
    row: usize,
    col: usize,
    matrix_re: f64,
    matrix_im: f64,
    reconstructed_re: f64,
    reconstructed_im: f64,
}

fn symbol_check(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = system(cfg)?;
    let ham = cfg.hamiltonian.as_ref().unwrap().build(&sys);
    let quad = PlaneQuadrature64::for_spin(sys.two_j());
    let rec = reconstruct_from_symbol(&sys, ham.symbol()?, &quad, 1e-8)?;
    let deviation = rec.max_abs_diff(&ham.matrix);
    if !(deviation <= SYMBOL_CHECK_TOLERANCE) {
        return Err(CliError::Numerical(format!(
            "symbol reconstruction differs from the matrix by {deviation:e} (tolerance {SYMBOL_CHECK_TOLERANCE:e})"
        )));
    }
    let n = sys.dim();
    let rows: Vec<EntryRow> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| EntryRow {
            row: i,
            col: j,
            matrix_re: ham.matrix[(i, j)].re,
            matrix_im: ham.matrix[(i, j)].im,
            reconstructed_re: rec[(i, j)].re,
            reconstructed_im: rec[(i, j)].im,
        })
        .collect();
    Ok(Output {
        result: json!({
            "subcommand": "symbol-check",
            "two_j": sys.two_j(),
            "max_abs_deviation": deviation,
            "tolerance": SYMBOL_CHECK_TOLERANCE,
            "quadrature": {"radial": quad.radial_order(), "angular": quad.angular_order()},
        }),
        table: csv_table(&rows)?,
    })
}

fn options(serial: bool) -> EstimatorOptions {
    EstimatorOptions { execution: if serial { Execution::Serial } else { Execution::Parallel }, ..Default::default() }
}

fn base_config(cfg: &RunConfig, nu: f64, sys: &SpinSystem64) -> BridgeConfig<f64> {
    let t = cfg.t.unwrap();
    let steps = cfg.steps.unwrap_or_else(|| StepPolicy::default().steps(nu, t, sys.j_plus_one()));
    BridgeConfig::new(cfg.z.unwrap().to_point(), cfg.zp.unwrap().to_point(), t, nu, steps)
        .with_mode(cfg.mode.unwrap_or_default())
}

fn mc(cfg: &RunConfig, serial: bool) -> Result<Output, CliError> {
    let sys = system(cfg)?;
    let ham = cfg.hamiltonian.as_ref().unwrap().build(&sys);
    let bc = base_config(cfg, cfg.nu.unwrap(), &sys);
    let seed = cfg.seed.unwrap();
    let estimate = estimate_propagator_with(&sys, &ham, &bc, cfg.n_paths.unwrap(), seed, &options(serial))?;
    let exact = exact_propagator_element(&sys, &ham, bc.t, bc.z, bc.zp, bc.mode)?;
    let gap = (estimate.value - exact).norm();
    let entry = ScanEntry { inconclusive: estimate.stderr >= gap, estimate, exact, gap };
    let record = entry.record();
    Ok(Output {
        result: json!({
            "subcommand": "mc",
            "two_j": sys.two_j(),
            "t": bc.t,
            "z": ReIm::from(bc.z),
            "zp": ReIm::from(bc.zp),
            "mode": bc.mode,
            "estimate": record,
            "max_exponent": entry.estimate.max_exponent,
        }),
        table: csv_table(&[record])?,
    })
}

fn scan(cfg: &RunConfig, serial: bool) -> Result<Output, CliError> {
    let sys = system(cfg)?;
    let ham = cfg.hamiltonian.as_ref().unwrap().build(&sys);
    let nu_list = cfg.nu_list.clone().unwrap();
    let base = base_config(cfg, nu_list[0], &sys);
    let mut spec = ScanSpec::new(nu_list, cfg.n_paths.unwrap());
    spec.steps = cfg.steps;
    let entries = nu_scan(&sys, &ham, &base, &spec, cfg.seed.unwrap(), &options(serial))?;
    let records: Vec<_> = entries.iter().map(|e| e.record()).collect();
    Ok(Output {
        result: json!({
            "subcommand": "nu-scan",
            "two_j": sys.two_j(),
            "t": base.t,
            "z": ReIm::from(base.z),
            "zp": ReIm::from(base.zp),
            "mode": base.mode,
            "records": records,
        }),
        table: csv_table(&records)?,
    })
}

#[derive(Serialize)]
struct KernelRow {
    nu: f64,
    t: f64,
    z_re: f64,
    z_im: f64,
    zp_re: f64,
    zp_im: f64,
    pde_re: f64,
    pde_im: f64,
    exact_re: f64,
    exact_im: f64,
    err: f64,
    #[serde(rename = "L")]
    half_width: f64,
    n: usize,
    steps: usize,
}

fn pde(cfg: &RunConfig) -> Result<Output, CliError> {
    let sys = system(cfg)?;
    let ham = cfg.hamiltonian.as_ref().unwrap().build(&sys);
    let grid = cfg.grid_spec()?;
    let nu_list = cfg.nu_values(Subcommand::Pde)?;
    let pair = (cfg.z.unwrap().to_point(), cfg.zp.unwrap().to_point());
    let report = convergence_check(&sys, &ham, grid, &nu_list, cfg.t.unwrap(), &[pair], &ConvergenceOptions::for_grid(&grid))?;
    let rows: Vec<KernelRow> = report
        .records
        .iter()
        .map(|r| KernelRow {
            nu: r.nu,
            t: r.t,
            z_re: r.z.re,
            z_im: r.z.im,
            zp_re: r.zp.re,
            zp_im: r.zp.im,
            pde_re: r.pde_value.re,
            pde_im: r.pde_value.im,
            exact_re: r.exact_value.re,
            exact_im: r.exact_value.im,
            err: r.err,
            half_width: r.grid.half_width,
            n: r.grid.n,
            steps: r.steps,
        })
        .collect();
    Ok(Output {
        result: json!({"subcommand": "pde", "two_j": sys.two_j(), "report": report, "all_pass": report.all_pass()}),
        table: csv_table(&rows)?,
    })
}

#[derive(Serialize)]
struct LadderRow {
    two_j: u32,
    t: f64,
    z_re: f64,
    z_im: f64,
    zp_re: f64,
    zp_im: f64,
    prelimit_re: f64,
    prelimit_im: f64,
    reference_re: f64,
    reference_im: f64,
    gap: f64,
}

fn contract(cfg: &RunConfig) -> Result<Output, CliError> {
    let settings = cfg.contraction.clone().unwrap_or_default();
    let mut case = match settings.case {
        CaseName::Number => ContractionCase::number_operator(),
        CaseName::Displacement => ContractionCase::displacement(),
    };
    if let Some(l) = settings.ladder {
        case.ladder = l;
    }
    let records = contraction_ladder(&case, cfg.z.unwrap().to_complex(), cfg.zp.unwrap().to_complex(), cfg.t.unwrap())?;
    let rows: Vec<LadderRow> = records
        .iter()
        .map(|r| LadderRow {
            two_j: r.two_j,
            t: r.t,
            z_re: r.z.re,
            z_im: r.z.im,
            zp_re: r.zp.re,
            zp_im: r.zp.im,
            prelimit_re: r.prelimit_re,
            prelimit_im: r.prelimit_im,
            reference_re: r.reference_re,
            reference_im: r.reference_im,
            gap: r.gap,
        })
        .collect();
    Ok(Output {
        result: json!({"subcommand": "contract", "case": case.name, "reference": case.reference, "records": records}),
        table: csv_table(&rows)?,
    })
}
