//! The experiments behind each subcommand.

use kink_core::lattice::{build_rectangle, Chain};
use kink_core::operators::{
    full_dimension, oriented_hamiltonian_2d, xxz_chain_hamiltonian, BoundaryField, KinkSign,
    SparseOperator,
};
use kink_core::qsos::{coupled_qsos, shift_commutator_check, HeightWindow, QsosConfig};
use kink_core::spectral::{
    gap_scan, kernel_from_eigenvalues, min_gap_per_size, GapFamily, LanczosConfig, SectorSelector,
    Solver, KERNEL_TOL,
};
use kink_core::spin::{Anisotropy, SpinQuantum};
use kink_core::states::{
    interface_state, kink_center, kink_state, kink_width, tanh_profile, ProductState,
};
use kink_core::{C64, DEFAULT_DIM_CAP};
use serde_json::{json, Value};

use crate::config::{Experiment, Settings, SCHEMA_VERSION};
use crate::output::{complex_json, fmt_float, matrix_json};
use crate::parse::{format_sector, format_spin, ZSpec};
use crate::CliError;

/// Finished run: the serialized output plus the verdict that decides the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub passed: bool,
    pub warnings: Vec<String>,
}

const Z_ONE: ZSpec = ZSpec::Value(C64 { re: 1.0, im: 0.0 });

pub fn run(settings: &Settings) -> Result<Report, CliError> {
    settings.validate_keys()?;
    match settings.experiment {
        Experiment::VerifyKink => verify_kink(settings),
        Experiment::Interface2d => interface_2d(settings),
        Experiment::Profile => profile(settings),
        Experiment::GapScan => gap_scan_cmd(settings),
        Experiment::Qsos => qsos(settings),
    }
}

fn envelope(experiment: Experiment, config_echo: Value, results: Value) -> String {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "experiment": experiment.name(),
        "config_echo": config_echo,
        "results": results,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    s.push('\n');
    s
}

fn sign_of(settings: &Settings) -> Result<KinkSign, CliError> {
    Ok(if settings.flag("antikink")? {
        KinkSign::Antikink
    } else {
        KinkSign::Kink
    })
}

fn sign_name(sign: KinkSign) -> &'static str {
    match sign {
        KinkSign::Kink => "kink",
        KinkSign::Antikink => "antikink",
    }
}

fn check_dimension(n_sites: usize, spin: SpinQuantum) -> Result<(), CliError> {
    let dim = full_dimension(n_sites, spin);
    if dim > DEFAULT_DIM_CAP as u128 {
        return Err(CliError::Invalid(format!(
            "{n_sites} sites of spin {} span dimension {dim}, above the cap {DEFAULT_DIM_CAP}",
            format_spin(spin)
        )));
    }
    Ok(())
}

fn relative_residual(h: &SparseOperator, state: &ProductState) -> Result<f64, CliError> {
    let v = state.to_vector(DEFAULT_DIM_CAP)?;
    let hv = h.apply(&v)?;
    let norm = |x: &[C64]| x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    Ok(norm(&hv) / norm(&v))
}

fn verify_kink(settings: &Settings) -> Result<Report, CliError> {
    let spins = settings.spins(SpinQuantum::HALF)?;
    let anisos = settings.anisotropies(2.0, false)?;
    let lengths = if settings.has("length") {
        settings.sizes("length")?
    } else {
        vec![8]
    };
    if lengths.is_empty() {
        return Err(CliError::Invalid("length is empty".into()));
    }
    let zs = settings.zs(Z_ONE)?;
    let tol = settings.real("tol", 1e-11)?;
    let field = settings.optional_real("field")?;
    let sign = sign_of(settings)?;
    for &n in &lengths {
        if n < 2 {
            return Err(CliError::Invalid(format!(
                "length {n}: chains need at least two sites"
            )));
        }
        for &spin in &spins {
            check_dimension(n, spin)?;
        }
    }
    let mut cases = Vec::new();
    let mut all_pass = true;
    for &spin in &spins {
        for &aniso in &anisos {
            let boundary = field.map_or_else(
                || BoundaryField::kink(spin, aniso, sign),
                |b| BoundaryField::custom(b, sign),
            );
            for &n in &lengths {
                let chain = Chain::centered(n)?;
                let h = xxz_chain_hamiltonian(&chain, spin, aniso, boundary, DEFAULT_DIM_CAP)?;
                for &zspec in &zs {
                    let z = zspec.resolve(aniso);
                    let mut state = kink_state(z, &chain, spin, aniso);
                    if sign == KinkSign::Antikink {
                        state = state.spin_flip();
                    }
                    let residual = relative_residual(&h, &state)?;
                    let pass = residual < tol;
                    all_pass &= pass;
                    cases.push(json!({
                        "spin": format_spin(spin),
                        "delta": aniso.delta(),
                        "q": aniso.q(),
                        "length": n,
                        "field": boundary.strength,
                        "z": complex_json(z),
                        "residual": residual,
                        "pass": pass,
                    }));
                }
            }
        }
    }
    let echo = json!({
        "spin": spins.iter().map(|&s| format_spin(s)).collect::<Vec<_>>(),
        "delta": anisos.iter().map(|a| a.delta()).collect::<Vec<_>>(),
        "length": lengths,
        "z": settings.list("z"),
        "tol": tol,
        "field": field,
        "sign": sign_name(sign),
    });
    let results = json!({ "tolerance": tol, "cases": cases, "all_pass": all_pass });
    Ok(Report {
        body: envelope(Experiment::VerifyKink, echo, results),
        passed: all_pass,
        warnings: Vec::new(),
    })
}

fn interface_2d(settings: &Settings) -> Result<Report, CliError> {
    let spins = settings.spins(SpinQuantum::HALF)?;
    let anisos = settings.anisotropies(2.0, true)?;
    let width = settings.size("width", 3)?;
    let height = settings.size("height", 3)?;
    if width == 0 || height == 0 || width * height < 2 {
        return Err(CliError::Invalid(format!(
            "{width}x{height}: lattice needs at least two sites"
        )));
    }
    for &spin in &spins {
        check_dimension(width * height, spin)?;
    }
    let zs = settings.zs(Z_ONE)?;
    let tol = settings.real("tol", 1e-10)?;
    let lattice = build_rectangle(width, height)?;
    let mut cases = Vec::new();
    let mut all_pass = true;
    for &spin in &spins {
        for &aniso in &anisos {
            let h = oriented_hamiltonian_2d(&lattice, spin, aniso, DEFAULT_DIM_CAP)?;
            for &zspec in &zs {
                let z = zspec.resolve(aniso);
                let residual = relative_residual(&h, &interface_state(z, &lattice, spin, aniso)?)?;
                let pass = residual < tol;
                all_pass &= pass;
                cases.push(json!({
                    "spin": format_spin(spin),
                    "delta": aniso.delta(),
                    "q": aniso.q(),
                    "z": complex_json(z),
                    "residual": residual,
                    "pass": pass,
                }));
            }
        }
    }
    let echo = json!({
        "spin": spins.iter().map(|&s| format_spin(s)).collect::<Vec<_>>(),
        "delta": anisos.iter().map(|a| a.delta()).collect::<Vec<_>>(),
        "width": width,
        "height": height,
        "z": settings.list("z"),
        "tol": tol,
    });
    let results = json!({ "tolerance": tol, "cases": cases, "all_pass": all_pass });
    Ok(Report {
        body: envelope(Experiment::Interface2d, echo, results),
        passed: all_pass,
        warnings: Vec::new(),
    })
}

fn fmt_z(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", fmt_float(z.re), fmt_float(z.im))
}

fn profile(settings: &Settings) -> Result<Report, CliError> {
    let spin = settings.spin(SpinQuantum::HALF)?;
    let aniso = settings.anisotropy(2.0, true)?;
    let length = settings.size("length", 16)?;
    let chain =
        Chain::centered(length).map_err(|_| CliError::Invalid("length must be positive".into()))?;
    let zs = settings.zs(Z_ONE)?;
    let [zspec] = zs.as_slice() else {
        return Err(CliError::Invalid("profile takes a single z".into()));
    };
    let z = zspec.resolve(aniso);
    let sign = sign_of(settings)?;
    let mut state = kink_state(z, &chain, spin, aniso);
    if sign == KinkSign::Antikink {
        state = state.spin_flip();
    }
    let values = state.magnetization_profile().values;
    let fit = spin == SpinQuantum::HALF;
    let mut out = String::from(if fit {
        "x,s3_expectation,tanh_fit,abs_error\n"
    } else {
        "x,s3_expectation\n"
    });
    let mut max_err: f64 = 0.0;
    for (x, v) in chain.labels().zip(&values) {
        if fit {
            let t = sign.value() * tanh_profile(x as f64, z, aniso);
            let e = (v - t).abs();
            max_err = max_err.max(e);
            out.push_str(&format!(
                "{x},{},{},{}\n",
                fmt_float(*v),
                fmt_float(t),
                fmt_float(e)
            ));
        } else {
            out.push_str(&format!("{x},{}\n", fmt_float(*v)));
        }
    }
    out.push_str(&format!(
        "# spin={} delta={} q={} z={} sign={}\n",
        format_spin(spin),
        fmt_float(aniso.delta()),
        fmt_float(aniso.q()),
        fmt_z(z),
        sign_name(sign)
    ));
    out.push_str(&format!(
        "# center={} width={}\n",
        fmt_float(kink_center(z, aniso)),
        fmt_float(kink_width(aniso))
    ));
    if fit {
        out.push_str(&format!("# max_abs_error={}\n", fmt_float(max_err)));
    }
    Ok(Report {
        body: out,
        passed: true,
        warnings: Vec::new(),
    })
}

fn gap_scan_cmd(settings: &Settings) -> Result<Report, CliError> {
    let spin = settings.spin(SpinQuantum::HALF)?;
    let aniso = settings.anisotropy(2.0, false)?;
    let strip = settings.has("width") || settings.has("height");
    if strip && settings.has("length") {
        return Err(CliError::Invalid(
            "give either chain lengths or strip widths, not both".into(),
        ));
    }
    let (family, sizes, default_sector) = if strip {
        if settings.has("field") || settings.flag("antikink")? {
            return Err(CliError::Invalid(
                "field and antikink apply to chains only".into(),
            ));
        }
        let height = settings.size("height", 2)?;
        let widths = if settings.has("width") {
            settings.sizes("width")?
        } else {
            vec![2, 3, 4]
        };
        for &w in &widths {
            if w == 0 || height == 0 || w * height < 2 {
                return Err(CliError::Invalid(format!(
                    "{w}x{height}: lattice needs at least two sites"
                )));
            }
        }
        (
            GapFamily::Strip {
                height,
                spin,
                aniso,
            },
            widths,
            SectorSelector::AllInterior,
        )
    } else {
        let sign = sign_of(settings)?;
        let field = match settings.optional_real("field")? {
            Some(b) => BoundaryField::custom(b, sign),
            None => BoundaryField::kink(spin, aniso, sign),
        };
        let lengths = if settings.has("length") {
            settings.sizes("length")?
        } else {
            vec![6, 8, 10]
        };
        if let Some(n) = lengths.iter().find(|&&n| n < 2) {
            return Err(CliError::Invalid(format!(
                "length {n}: chains need at least two sites"
            )));
        }
        (
            GapFamily::Chain { spin, aniso, field },
            lengths,
            SectorSelector::Central,
        )
    };
    if sizes.is_empty() {
        return Err(CliError::Invalid("size list is empty".into()));
    }
    for &s in &sizes {
        check_dimension(family.n_sites(s), spin)?;
    }
    let selector = settings.sector(default_sector)?;
    let tol = settings.real("tol", KERNEL_TOL)?;
    let seed = settings.seed()?;
    let solver_name = settings.text("solver")?.unwrap_or("lanczos");
    let solver = match solver_name {
        "lanczos" => Solver::Lanczos(LanczosConfig {
            seed,
            ..LanczosConfig::default()
        }),
        "dense" => Solver::Dense,
        other => {
            return Err(CliError::Invalid(format!(
                "solver = {other:?}: expected lanczos or dense"
            )))
        }
    };
    let rows = gap_scan(&family, &sizes, selector, solver, tol)?;

    let mut out = String::from("size,twice_m,dim,ground_energy,kernel_dim,gap,ambiguous,converged,iterations,max_residual\n");
    for row in &rows {
        let r = &row.report;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            row.size,
            r.twice_m,
            r.dim,
            fmt_float(r.ground_energy),
            r.kernel_dim,
            r.gap.map(fmt_float).unwrap_or_default(),
            r.ambiguous,
            r.converged,
            r.iterations,
            fmt_float(r.max_residual),
        ));
    }
    let (family_name, geometry) = match family {
        GapFamily::Chain { field, .. } => {
            ("chain", format!("field={}", fmt_float(field.coefficient())))
        }
        GapFamily::Strip { height, .. } => ("strip", format!("height={height}")),
    };
    out.push_str(&format!(
        "# family={family_name} {geometry} spin={} delta={} sector={} solver={solver_name} seed={seed} kernel_tol={}\n",
        format_spin(spin),
        fmt_float(aniso.delta()),
        format_sector(selector),
        fmt_float(tol),
    ));
    for (size, gap) in min_gap_per_size(&rows) {
        out.push_str(&format!(
            "# min_gap size={size} value={}\n",
            gap.map(fmt_float).unwrap_or_else(|| "none".into())
        ));
    }
    let unconverged = rows.iter().filter(|r| !r.report.converged).count();
    let ambiguous = rows.iter().filter(|r| r.report.ambiguous).count();
    out.push_str(&format!(
        "# unconverged_rows={unconverged} ambiguous_rows={ambiguous}\n"
    ));
    let mut warnings = Vec::new();
    if unconverged > 0 {
        warnings.push(format!(
            "{unconverged} rows did not reach the residual target"
        ));
    }
    if ambiguous > 0 {
        warnings.push(format!(
            "{ambiguous} rows have a gap within 10x of the kernel threshold"
        ));
    }
    Ok(Report {
        body: out,
        passed: !(settings.flag("strict")? && unconverged > 0),
        warnings,
    })
}

/// Largest QSOS basis accepted from the command line.
const QSOS_STATE_CAP: usize = 1000;

fn qsos(settings: &Settings) -> Result<Report, CliError> {
    let spin = settings.spin(SpinQuantum::HALF)?;
    let aniso: Anisotropy = settings.anisotropy(2.0, true)?;
    let width = settings.size("width", 2)?;
    let length = settings.size("length", 4)?;
    let (n_min, n_max) = settings.window((-1, 1))?;
    let window = HeightWindow::new(n_min, n_max).map_err(|e| CliError::Invalid(e.to_string()))?;
    let phase = settings.real("phase", 0.0)?;
    let tol = settings.real("tol", 1e-9)?;
    if !(1..=3).contains(&width) {
        return Err(CliError::Invalid(format!(
            "width {width}: expected 1, 2 or 3 chains"
        )));
    }
    if length < 2 {
        return Err(CliError::Invalid(format!(
            "length {length}: chains need at least two sites"
        )));
    }
    let states = window
        .size()
        .checked_pow(width as u32)
        .unwrap_or(usize::MAX);
    if states > QSOS_STATE_CAP {
        return Err(CliError::Invalid(format!(
            "{states} height configurations exceed the cap {QSOS_STATE_CAP}"
        )));
    }
    let mut config = QsosConfig::new(width, length, spin, aniso, window);
    config.phase = phase;
    let sys = coupled_qsos(config)?;
    let values = sys.eigenvalues();
    let psd = values[0] >= -tol;
    let (kernel_dim, kernel_ambiguous) = match kernel_from_eigenvalues(&values, KERNEL_TOL) {
        Ok(info) => (info.dim, false),
        Err(_) => (values.iter().filter(|&&v| v < KERNEL_TOL).count(), true),
    };
    let shift = if window.size() >= 3 {
        let d = shift_commutator_check(&sys)?;
        json!({
            "shift_reversal": d.shift,
            "double_shift": d.double_shift,
            "bare_shift": d.bare_shift,
            "lowdin": d.lowdin,
        })
    } else {
        Value::Null
    };
    let max_abs =
        |m: &kink_core::nalgebra::DMatrix<C64>| m.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let echo = json!({
        "spin": format_spin(spin),
        "delta": aniso.delta(),
        "width": width,
        "length": length,
        "window": [n_min, n_max],
        "phase": phase,
        "tol": tol,
    });
    let results = json!({
        "geometry": {
            "width": width,
            "chain_length": length,
            "sites": sys.lattice.sites().iter().map(|s| [s.x, s.y]).collect::<Vec<_>>(),
        },
        "window": { "n_min": n_min, "n_max": n_max },
        "spin": format_spin(spin),
        "delta": aniso.delta(),
        "q": aniso.q(),
        "labels": sys.labels,
        "gram": matrix_json(&sys.gram.matrix),
        "m_raw": matrix_json(&sys.m_raw),
        "h_eff": matrix_json(&sys.h_eff),
        "eigenvalues": values,
        "summary": {
            "dim": sys.dim(),
            "kernel_dim": kernel_dim,
            "kernel_ambiguous": kernel_ambiguous,
            "min_eigenvalue": values[0],
            "psd": psd,
            "max_abs_h_eff": max_abs(&sys.h_eff),
            "gram_condition": sys.gram.condition(),
            "gram_ill_conditioned": sys.gram.ill_conditioned(),
            "m_raw_hermitian_defect": sys.m_raw_hermitian_defect,
            "aligned_kernel_weight": sys.aligned_kernel_weight(KERNEL_TOL),
            "shift_defect": shift,
        },
    });
    let mut warnings = Vec::new();
    if sys.gram.ill_conditioned() {
        warnings.push(format!(
            "Gram matrix condition number {:.3e}",
            sys.gram.condition()
        ));
    }
    if !psd {
        warnings.push(format!(
            "H_eff has eigenvalue {:.3e} below -{tol:e}",
            values[0]
        ));
    }
    Ok(Report {
        body: envelope(Experiment::Qsos, echo, results),
        passed: psd,
        warnings,
    })
}
