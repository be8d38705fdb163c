//! Operations behind the `magcav` binary. Each command writes its text output
//! to `out` and maps failures onto stable exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::cavity::{
    evaluate_geometry, field_map, geometric_factor, geometry_scan, CavityMode, ScanParameter,
    DEFAULT_RESOLUTION,
};
use crate::config::{MeasuredMode, RunConfig};
use crate::error::Error;
use crate::estimators::{
    cooperativity, coupling_per_spin, coupling_ratio, fit_three_mode, fit_two_mode, photon_number,
    predict_optimized, ridge_from_map, spin_count, FitReport, MeasuredSet, Optimization,
    RidgeOptions,
};
use crate::magnonics::{fit_gyro, fit_gyro_and_ms, walker_frequency, Crossing};
use crate::spectra::{add_noise, bogoliubov_map, density_map, linspace, DensityMap};
use crate::units::{dbm_to_watts, DEFAULT_GYRO};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Unidentifiable(String),
    #[error("{0}")]
    Io(String),
    #[error("fit did not converge")]
    NotConverged,
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 0 success, 1 other failure, 2 configuration, 3 identifiability, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unidentifiable(_) => 3,
            CliError::Io(_) => 4,
            CliError::NotConverged | CliError::Failed(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e.root() {
            Error::Config(_) | Error::Domain(_) | Error::InvalidModel(_) | Error::Geometry(_) => {
                CliError::Config(message)
            }
            Error::Unidentifiable(_) | Error::Underdetermined(_) | Error::InsufficientData(_) => {
                CliError::Unidentifiable(message)
            }
            Error::Io { .. } | Error::Parse { .. } => CliError::Io(message),
            _ => CliError::Failed(message),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

type CliResult<T = ()> = std::result::Result<T, CliError>;

fn write_to(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Scan of one cavity dimension, in the unit of its config key (um for the
/// gap, mm for spacing and height).
#[derive(Debug, Clone, Copy)]
pub struct ScanRequest {
    pub parameter: ScanParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ScanRequest {
    fn unit(&self) -> (&'static str, f64) {
        match self.parameter {
            ScanParameter::Gap => ("um", 1e-6),
            ScanParameter::Spacing | ScanParameter::Height => ("mm", 1e-3),
        }
    }

    fn column(&self) -> String {
        let name = match self.parameter {
            ScanParameter::Gap => "gap",
            ScanParameter::Spacing => "post_spacing",
            ScanParameter::Height => "height",
        };
        format!("{name}_{}", self.unit().0)
    }
}

#[derive(Debug, Clone)]
pub struct CavityOptions {
    pub scan: Option<ScanRequest>,
    /// Writes the summary or scan table here as CSV instead of to `out`.
    pub csv: Option<PathBuf>,
    pub field_map: Option<(CavityMode, PathBuf)>,
    pub resolution: usize,
}

impl Default for CavityOptions {
    fn default() -> Self {
        Self {
            scan: None,
            csv: None,
            field_map: None,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

/// Mode frequencies, filling factors and geometric factors of the configured
/// cavity, or a table over one scanned dimension.
pub fn cmd_cavity(cfg: &RunConfig, options: &CavityOptions, out: &mut dyn Write) -> CliResult {
    let geometry = cfg.geometry()?;
    let sphere = cfg.sphere_or_default()?;
    if let Some((mode, path)) = &options.field_map {
        field_map(&geometry, *mode, options.resolution)?.save_csv(path)?;
    }

    let mut table: Box<dyn Write + '_> = match &options.csv {
        Some(path) => Box::new(write_to(path)?),
        None => Box::new(&mut *out),
    };
    if let Some(scan) = &options.scan {
        let (_, unit) = scan.unit();
        let values: Vec<f64> = linspace(scan.from, scan.to, scan.steps)
            .iter()
            .map(|v| v * unit)
            .collect();
        let rows = geometry_scan(
            &geometry,
            &sphere,
            scan.parameter,
            &values,
            options.resolution,
        );
        writeln!(
            table,
            "{},f_dark_Hz,f_bright_Hz,xi_dark,xi_bright",
            scan.column()
        )?;
        for (value, row) in values.iter().zip(rows) {
            match row {
                Ok(r) => writeln!(
                    table,
                    "{},{},{},{},{}",
                    value / unit,
                    r.f_dark,
                    r.f_bright,
                    r.xi_dark,
                    r.xi_bright
                )?,
                Err(e) => writeln!(table, "# {}: {e}", value / unit)?,
            }
        }
        table.flush()?;
        return Ok(());
    }

    let (f_dark, f_bright, xi_dark, xi_bright) =
        evaluate_geometry(&geometry, &sphere, options.resolution)?;
    let g_dark = geometric_factor(
        &field_map(&geometry, CavityMode::Dark, options.resolution)?,
        &geometry,
    )?;
    let g_bright = geometric_factor(
        &field_map(&geometry, CavityMode::Bright, options.resolution)?,
        &geometry,
    )?;
    let rows = [
        ("f_dark_Hz", f_dark),
        ("f_bright_Hz", f_bright),
        ("xi_dark", xi_dark),
        ("xi_bright", xi_bright),
        ("G_dark_ohm", g_dark),
        ("G_bright_ohm", g_bright),
        ("l_correction", geometry.l_correction),
        ("coupling_k", geometry.coupling_k),
    ];
    if options.csv.is_some() {
        writeln!(table, "quantity,value")?;
        for (k, v) in rows {
            writeln!(table, "{k},{v}")?;
        }
    } else {
        for (k, v) in rows {
            writeln!(table, "{k} = {v}")?;
        }
    }
    table.flush()?;
    Ok(())
}

/// Gyromagnetic ratio and magnetization from observed crossings, and the
/// resulting `(m, m)` lines over a field range as CSV.
pub fn cmd_walker(cfg: &RunConfig, csv: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let w = cfg.walker()?;
    let crossings: Vec<Crossing> = w
        .crossings
        .iter()
        .map(|c| Crossing::new(c.m, c.B_T, c.f_GHz * 1e9))
        .collect();
    let (gyro, mu0_ms) = if crossings.iter().all(|c| c.m == 1) {
        (fit_gyro(&crossings)?, cfg.sphere_or_default()?.mu0_ms())
    } else {
        let fit = fit_gyro_and_ms(&crossings)?;
        (fit.gyro, fit.mu0_ms)
    };
    if w.max_m < 1 || w.B_steps < 2 {
        return Err(CliError::Config(
            "[walker] needs max_m >= 1 and B_steps >= 2".into(),
        ));
    }
    writeln!(out, "gyro_Hz_per_T = {gyro}")?;
    writeln!(out, "mu0_Ms_T = {mu0_ms}")?;
    for c in &crossings {
        let f = walker_frequency(c.m, c.field, mu0_ms, gyro)?;
        writeln!(
            out,
            "crossing.m{}.deviation = {}",
            c.m,
            (f - c.frequency) / c.frequency
        )?;
    }
    let mut table: Box<dyn Write + '_> = match csv {
        Some(path) => Box::new(write_to(path)?),
        None => Box::new(&mut *out),
    };
    let header: Vec<String> = (1..=w.max_m).map(|m| format!("f_m{m}_Hz")).collect();
    writeln!(table, "B_T,{}", header.join(","))?;
    for b in linspace(w.B_start_T, w.B_stop_T, w.B_steps) {
        let row = (1..=w.max_m)
            .map(|m| walker_frequency(m, b, mu0_ms, gyro).map(|f| f.to_string()))
            .collect::<Result<Vec<_>, _>>()?;
        writeln!(table, "{b},{}", row.join(","))?;
    }
    table.flush()?;
    Ok(())
}

/// Synthesizes the configured model's transmission map, adds the configured
/// noise with the config seed, and writes CSV (and optionally PGM).
pub fn cmd_spectrum(
    cfg: &RunConfig,
    csv: &Path,
    pgm: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<DensityMap> {
    let model = cfg.model()?;
    let grid = cfg.grid()?;
    let ports = cfg.ports()?;
    let mut map = density_map(&model, &grid.fields(), &grid.frequencies(), &ports)?;
    if grid.noise_sigma > 0.0 {
        map = add_noise(&map, cfg.seed, grid.noise_sigma)?;
    }
    map.save_csv(csv)?;
    if let Some(path) = pgm {
        map.save_pgm(path, grid.pgm_clamp())?;
    }
    let (lo, hi) = map.db_range();
    writeln!(out, "fields = {}", map.fields.len())?;
    writeln!(out, "frequencies = {}", map.frequencies.len())?;
    writeln!(out, "s21_dB_min = {lo}")?;
    writeln!(out, "s21_dB_max = {hi}")?;
    writeln!(out, "csv = {}", csv.display())?;
    if let Some(path) = pgm {
        writeln!(out, "pgm = {}", path.display())?;
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    TwoMode,
    ThreeMode,
}

impl std::str::FromStr for FitKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "two-mode" => Ok(Self::TwoMode),
            "three-mode" => Ok(Self::ThreeMode),
            other => Err(CliError::Config(format!(
                "unknown model kind '{other}' (expected two-mode or three-mode)"
            ))),
        }
    }
}

impl FitKind {
    /// Ridge prominence threshold relative to the map maximum. The spectator
    /// branches of a doublet are much weaker than the cavity-like branches.
    pub fn default_ridge(self) -> RidgeOptions {
        let relative_prominence = match self {
            FitKind::TwoMode => 0.25,
            FitKind::ThreeMode => 0.02,
        };
        RidgeOptions {
            relative_prominence,
            ..RidgeOptions::default()
        }
    }
}

/// Minimum number of ridge points a crossing fit accepts.
pub const MIN_RIDGE_POINTS: usize = 10;

/// Extracts the peak ridge of a map file and fits the requested crossing
/// model. The report is printed even when the fit did not converge; that case
/// is then returned as [`CliError::NotConverged`].
pub fn cmd_fit(
    map_path: &Path,
    kind: FitKind,
    ridge: &RidgeOptions,
    out: &mut dyn Write,
) -> CliResult<FitReport> {
    let map = DensityMap::load_csv(map_path)?;
    fit_map(&map, kind, ridge, out)
}

pub fn fit_map(
    map: &DensityMap,
    kind: FitKind,
    ridge: &RidgeOptions,
    out: &mut dyn Write,
) -> CliResult<FitReport> {
    let points = ridge_from_map(map, ridge)?;
    if points.len() < MIN_RIDGE_POINTS {
        return Err(CliError::Unidentifiable(format!(
            "ridge has {} points; need at least {MIN_RIDGE_POINTS}",
            points.len()
        )));
    }
    let report = match kind {
        FitKind::TwoMode => fit_two_mode(&points, None)?,
        FitKind::ThreeMode => fit_three_mode(&points, None)?,
    };
    write!(out, "{report}")?;
    if report.converged {
        Ok(report)
    } else {
        Err(CliError::NotConverged)
    }
}

fn mode_lines(
    name: &str,
    m: &MeasuredMode,
    g_over_pi: f64,
    spins: f64,
    power: Option<f64>,
    ports: (f64, f64),
    out: &mut dyn Write,
) -> CliResult {
    let magnon = m.magnon_linewidth_MHz * 1e6;
    writeln!(out, "{name}.g_over_pi_Hz = {g_over_pi}")?;
    writeln!(
        out,
        "{name}.cooperativity = {}",
        cooperativity(g_over_pi, m.linewidth_MHz * 1e6, magnon)
    )?;
    writeln!(
        out,
        "{name}.coupling_per_spin_Hz = {}",
        coupling_per_spin(g_over_pi, spins)
    )?;
    if let (Some(q), Some(p)) = (m.Q_loaded, power) {
        writeln!(
            out,
            "{name}.photon_number = {}",
            photon_number(p, m.f_GHz * 1e9, q, ports.0, ports.1)
        )?;
    }
    if let (Some(q), Some(g)) = (m.Q_loaded, m.geometric_factor_ohm) {
        writeln!(
            out,
            "{name}.surface_resistance_ohm = {}",
            crate::cavity::surface_resistance(g, q)?
        )?;
    }
    Ok(())
}

/// Figures of merit from the `[measured]` block. A fit report replaces the
/// bright (two-mode) or dark (three-mode) coupling.
pub fn cmd_report(cfg: &RunConfig, fit: Option<&FitReport>, out: &mut dyn Write) -> CliResult {
    let measured = cfg.measured()?;
    let sphere = cfg.sphere_or_default()?;
    let ports = cfg.ports()?;
    let spins = spin_count(sphere.spin_density(), sphere.diameter());
    let power = measured.incident_power_dBm.map(dbm_to_watts);

    let mut g_bright = measured.bright.g_over_pi_MHz * 1e6;
    let mut g_dark = measured.dark.as_ref().map(|d| d.g_over_pi_MHz * 1e6);
    if let Some(report) = fit {
        match report.kind.as_str() {
            "two-mode" => g_bright = report.value("g_over_pi")?,
            "three-mode" => {
                if measured.dark.is_none() {
                    return Err(CliError::Config(
                        "a three-mode fit needs [measured.dark]".into(),
                    ));
                }
                g_dark = Some(report.value("g_c_over_pi")?);
            }
            other => {
                return Err(CliError::Config(format!(
                    "cannot use a '{other}' fit in a report"
                )))
            }
        }
        writeln!(out, "fit.kind = {}", report.kind)?;
        writeln!(out, "fit.converged = {}", report.converged)?;
    }

    writeln!(out, "spin_count = {spins}")?;
    mode_lines(
        "bright",
        &measured.bright,
        g_bright,
        spins,
        power,
        (ports.beta1, ports.beta2),
        out,
    )?;
    if let (Some(dark), Some(g_dark)) = (&measured.dark, g_dark) {
        mode_lines(
            "dark",
            dark,
            g_dark,
            spins,
            power,
            (ports.beta1, ports.beta2),
            out,
        )?;
        let modeled_f = |m: &MeasuredMode| m.modeled_f_GHz.unwrap_or(m.f_GHz) * 1e9;
        let modeled = coupling_ratio(
            modeled_f(&measured.bright),
            modeled_f(dark),
            measured.bright.filling_factor,
            dark.filling_factor,
        );
        writeln!(out, "ratio.modeled = {modeled}")?;
        if g_dark > 0.0 {
            let observed = g_bright / g_dark;
            writeln!(out, "ratio.measured = {observed}")?;
            writeln!(
                out,
                "ratio.relative_difference = {}",
                (observed - modeled) / modeled
            )?;
        } else {
            writeln!(out, "ratio.measured = undefined")?;
        }
    }
    Ok(())
}

/// Prediction for the optimized cavity and, with `map_prefix`, the
/// counter-rotating transmission map written to `<prefix>.csv` and
/// `<prefix>.pgm`.
pub fn cmd_predict(cfg: &RunConfig, map_prefix: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let measured = cfg.measured()?;
    let opt = cfg.optimized()?;
    let sphere = cfg.sphere_or_default()?;
    let b = &measured.bright;
    let current = MeasuredSet {
        f_mode: b.f_GHz * 1e9,
        g_over_pi: b.g_over_pi_MHz * 1e6,
        cavity_fwhm: b.linewidth_MHz * 1e6,
        magnon_fwhm: b.magnon_linewidth_MHz * 1e6,
        filling_factor: b.filling_factor,
        spins: spin_count(sphere.spin_density(), sphere.diameter()),
    };
    if !(opt.filling_factor >= 0.0 && opt.linewidth_factor > 0.0) {
        return Err(CliError::Config(
            "[optimized] needs filling_factor >= 0 and linewidth_factor > 0".into(),
        ));
    }
    let p = predict_optimized(
        &current,
        &Optimization {
            filling_factor: opt.filling_factor,
            linewidth_factor: opt.linewidth_factor,
        },
    );
    writeln!(out, "chi = {}", p.chi)?;
    writeln!(out, "g_over_pi_current_Hz = {}", current.g_over_pi)?;
    writeln!(out, "g_over_pi_optimized_Hz = {}", p.g_over_pi)?;
    writeln!(out, "cavity_linewidth_optimized_Hz = {}", p.cavity_fwhm)?;
    writeln!(out, "cooperativity_current = {}", p.cooperativity_current)?;
    writeln!(
        out,
        "cooperativity_filling_only = {}",
        p.cooperativity * opt.linewidth_factor.recip()
    )?;
    writeln!(out, "cooperativity_optimized = {}", p.cooperativity)?;
    writeln!(out, "coupling_per_spin_current_Hz = {}", p.per_spin_current)?;
    writeln!(out, "coupling_per_spin_optimized_Hz = {}", p.per_spin)?;
    writeln!(
        out,
        "coupling_to_frequency = {}",
        p.g_over_pi / current.f_mode
    )?;

    if let Some(prefix) = map_prefix {
        let gyro = opt.gyro_GHz_per_T.map_or(DEFAULT_GYRO, |g| g * 1e9);
        let (fields, freqs) = match &cfg.grid {
            Some(_) => {
                let g = cfg.grid()?;
                (g.fields(), g.frequencies())
            }
            None => {
                let crossing = current.f_mode / gyro;
                let span = 3.0 * p.g_over_pi / gyro;
                (
                    linspace((crossing - span).max(1e-3), crossing + span, 200),
                    linspace(
                        current.f_mode - 2.0 * p.g_over_pi,
                        current.f_mode + 2.0 * p.g_over_pi,
                        400,
                    ),
                )
            }
        };
        let map = bogoliubov_map(
            current.f_mode,
            p.cavity_fwhm,
            current.magnon_fwhm,
            gyro,
            p.g_over_pi,
            &fields,
            &freqs,
            &cfg.ports()?,
        )?;
        let csv = prefix.with_extension("csv");
        let pgm = prefix.with_extension("pgm");
        map.save_csv(&csv)?;
        map.save_pgm(&pgm, cfg.grid.as_ref().and_then(|g| g.pgm_clamp()))?;
        writeln!(out, "map.csv = {}", csv.display())?;
        writeln!(out, "map.pgm = {}", pgm.display())?;
    }
    Ok(())
}
