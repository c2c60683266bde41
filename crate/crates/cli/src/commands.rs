use super::{
    BasisArg, CoeffArgs, Command, E3fArgs, RateArgs, SampleArgs, SimulateArgs, SweepArgs,
    ValidateArgs, WitnessArgs,
};
use serde_json::{json, Value};
use std::io::Write as _;
use std::path::Path;
use std::process::ExitCode;
use triphoton_core::io::{read_samples_csv, samples_to_csv, sweep_to_csv};
use triphoton_core::report::{to_json_string, EntanglementReport, TOOL_VERSION};
use triphoton_core::sampling_sim::{
    default_threshold, end_to_end_witness_with, simulate_adaptive_scan,
};
use triphoton_core::spdc::{
    gaussian_fit_widths, index_modulation_penalty, qpm_penalty, rate_per_length_power,
    triplet_rate, witness_sweep, SpdcConfig,
};
use triphoton_core::triple_gaussian::{
    birth_zone, e3f_lambda0, exact_e3f, mancini_bound, sample_triplets, Basis,
    TripleGaussianState,
};
use triphoton_core::witness::{
    analytic_witness, gaussian_combination_entropies, optimize_coefficients,
    verify_correlation_relation, witness_from_samples_with, BootstrapOptions,
    WitnessCoefficients,
};
use triphoton_core::{Error, Result};

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::E3f(a) => e3f(a),
        Command::Sweep(a) => sweep(a),
        Command::Rate(a) => rate(a),
        Command::Simulate(a) => simulate(a),
        Command::Validate(a) => validate(a),
        Command::Sample(a) => sample(a),
        Command::Witness(a) => witness(a),
    }
}

/// Writes `content` to `path` through a temporary file in the same
/// directory, or to stdout.
fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(content.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            });
    };
    let io_err = |source| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(content.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn coefficients(c: &CoeffArgs) -> Result<WitnessCoefficients> {
    WitnessCoefficients::new(c.eta, c.beta)
}

fn state_json(s: &TripleGaussianState) -> Value {
    json!({ "sigma_u": s.sigma_u, "sigma_v": s.sigma_v, "sigma_w": s.sigma_w, "basis": s.basis })
}

fn config_json(c: &SpdcConfig) -> Value {
    serde_json::to_value(c).expect("config is plain data")
}

fn e3f(a: E3fArgs) -> Result<ExitCode> {
    let state = TripleGaussianState::symmetric(a.sigma_u, a.sigma_v)?;
    let value = exact_e3f(&state)?;
    if !a.json {
        emit(None, &format!("{value}\n"))?;
        return Ok(ExitCode::SUCCESS);
    }
    let coeffs = WitnessCoefficients::spdc_default();
    let (h_x, h_k) = gaussian_combination_entropies(&state, &coeffs)?;
    let (lambda0, one_minus) = e3f_lambda0(&state)?;
    let mut report = EntanglementReport::new(analytic_witness(&state, &coeffs)?, h_x, h_k)
        .input("state", state_json(&state))
        .input("coefficients", json!({ "eta": coeffs.eta(), "beta": coeffs.beta() }))
        .meta("lambda0", lambda0)
        .meta("one_minus_lambda0", one_minus)
        .meta("mancini_bound_bits", mancini_bound(&state)?)
        .meta("birth_zone_m", birth_zone(&state)?)
        .meta("witness_entropies", "exact Gaussian");
    report.exact_e3f_gebits = Some(value);
    emit(None, &report.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(a: SweepArgs) -> Result<ExitCode> {
    let config = SpdcConfig::from_file(&a.config)?;
    let rows = witness_sweep(&config, a.sigma_p_min, a.sigma_p_max, a.points)?;
    emit(a.out.as_deref(), &sweep_to_csv(&rows))?;
    Ok(ExitCode::SUCCESS)
}

fn rate(a: RateArgs) -> Result<ExitCode> {
    let mut config = SpdcConfig::from_file(&a.config)?;
    if let Some(order) = a.qpm_order {
        config.qpm_order = Some(order);
    }
    if let Some(p) = a.pump_power {
        config.pump_power = p;
    }
    if let Some(l) = a.l_z {
        config.l_z = l;
    }
    config.validate()?;
    let constant = rate_per_length_power(&config)?;
    let mut per_second = triplet_rate(&config)?;
    let qpm = config.qpm_order.map(qpm_penalty).transpose()?;
    let modulation = match (a.index_modulation, a.chi3_sensitivity) {
        (Some(dn), Some(s)) => Some(index_modulation_penalty(dn, s)?),
        _ => None,
    };
    if let Some(m) = modulation {
        per_second *= m;
    }
    if !a.json {
        let mut text = format!(
            "rate_per_second {per_second:.6e}\nrate_per_minute {:.6e}\nconstant_per_m_w {constant:.6e}\n",
            per_second * 60.0
        );
        if let Some(q) = qpm {
            text.push_str(&format!("qpm_penalty {q:.6e}\n"));
        }
        if let Some(m) = modulation {
            text.push_str(&format!("index_modulation_penalty {m:.6e}\n"));
        }
        emit(None, &text)?;
        return Ok(ExitCode::SUCCESS);
    }
    let report = json!({
        "inputs": {
            "config_file": a.config.display().to_string(),
            "config": config_json(&config),
            "index_modulation": a.index_modulation,
            "chi3_sensitivity": a.chi3_sensitivity,
        },
        "rate_per_second": per_second,
        "rate_per_minute": per_second * 60.0,
        "constant_per_m_w": constant,
        "qpm_penalty": qpm,
        "index_modulation_penalty": modulation,
        "tool_version": TOOL_VERSION,
    });
    emit(None, &to_json_string(&report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate(a: SimulateArgs) -> Result<ExitCode> {
    let (state, config) = match (&a.config, a.sigma_u, a.sigma_v) {
        (Some(path), _, _) => {
            let c = SpdcConfig::from_file(path)?;
            (gaussian_fit_widths(&c)?.in_basis(Basis::Position), Some((path, c)))
        }
        (None, Some(u), Some(v)) => (
            TripleGaussianState::new(u, v, a.sigma_w.unwrap_or(v))?,
            None,
        ),
        _ => return Err(Error::Usage("give --sigma-u and --sigma-v, or --config".into())),
    };
    let coeffs = coefficients(&a.coeffs)?;
    let threshold = a.threshold.unwrap_or_else(|| default_threshold(a.n));
    let bootstrap = BootstrapOptions {
        replicates: a.bootstrap,
        seed: a.seed,
    };
    let mut report =
        end_to_end_witness_with(&state, &coeffs, a.n, threshold, a.depth, a.seed, &bootstrap)?;
    report = report.input("threshold_defaulted", a.threshold.is_none());
    if let Some((path, c)) = config {
        report = report
            .input("config_file", path.display().to_string())
            .input("config", config_json(&c));
    }
    if let Some(prefix) = &a.tree_prefix {
        for basis in [Basis::Position, Basis::Momentum] {
            let tree = simulate_adaptive_scan(&state, basis, a.n, threshold, a.depth, a.seed)?;
            let suffix = if basis == Basis::Position { "_x.csv" } else { "_k.csv" };
            let mut name = prefix.as_os_str().to_owned();
            name.push(suffix);
            emit(Some(Path::new(&name)), &tree.to_path_count_lines())?;
        }
    }
    emit(a.out.as_deref(), &report.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn validate(a: ValidateArgs) -> Result<ExitCode> {
    let report = verify_correlation_relation(a.dim, a.trials, a.seed)?;
    let mut value = serde_json::to_value(&report).expect("report is plain data");
    value["tool_version"] = json!(TOOL_VERSION);
    emit(a.out.as_deref(), &to_json_string(&value)?)?;
    if report.violations_above_tolerance > 0 {
        eprintln!(
            "triphoton: {} of {} trials violate the relation (max {:.3e})",
            report.violations_above_tolerance, report.trials, report.max_violation
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn sample(a: SampleArgs) -> Result<ExitCode> {
    let state = TripleGaussianState::new(a.sigma_u, a.sigma_v, a.sigma_w.unwrap_or(a.sigma_v))?;
    let basis = match a.basis {
        BasisArg::Position => Basis::Position,
        BasisArg::Momentum => Basis::Momentum,
    };
    let samples = sample_triplets(&state.in_basis(basis), a.n, a.seed)?;
    emit(a.out.as_deref(), &samples_to_csv(&samples))?;
    Ok(ExitCode::SUCCESS)
}

fn witness(a: WitnessArgs) -> Result<ExitCode> {
    let xs = read_samples_csv(&a.positions)?;
    let ks = read_samples_csv(&a.momenta)?;
    if xs.basis != Basis::Position || ks.basis != Basis::Momentum {
        return Err(Error::Validation(
            "--positions needs an x1,x2,x3 file and --momenta a k1,k2,k3 file".into(),
        ));
    }
    let init = coefficients(&a.coeffs)?;
    let (coeffs, optimized) = if a.optimize {
        let r = optimize_coefficients(&xs, &ks, &init)?;
        for w in &r.warnings {
            eprintln!("triphoton: warning: {w}");
        }
        (r.coefficients, Some(r))
    } else {
        (init, None)
    };
    let bootstrap = BootstrapOptions {
        replicates: a.bootstrap,
        seed: a.bootstrap_seed,
    };
    let mut report =
        witness_from_samples_with(&xs, &ks, &coeffs, a.bin_width_x, a.bin_width_k, &bootstrap)?
            .input("positions_file", a.positions.display().to_string())
            .input("momenta_file", a.momenta.display().to_string())
            .input("optimize", a.optimize)
            .input("init_coefficients", json!({ "eta": init.eta(), "beta": init.beta() }));
    if let Some(r) = optimized {
        report = report
            .meta("optimizer_witness_gebits", r.witness_gebits)
            .meta("optimizer_init_witness_gebits", r.init_witness_gebits)
            .meta("optimizer_relative_bin_width", r.relative_bin_width)
            .meta("optimizer_warnings", r.warnings);
    }
    emit(a.out.as_deref(), &report.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}
