use std::path::{Path, PathBuf};

use hom_sensor::apps::{self, InputConfig, MaterialSpec};
use hom_sensor::metrics::{self, NoiseBudget, ResponsivityMap, SignalAxis};
use hom_sensor::oracle::g2_oracle_point;
use hom_sensor::tmm::{self, CoupledCavityDesign, CouplingFit, ScanPlan, StackSpec};
use hom_sensor::{g2_closed_form, par, OperatingPoint};
use serde::Deserialize;
use serde_json::json;

use crate::config::{self, check_cells, resolve, GridSpec};
use crate::output::{num, to_value, Document, Table};
use crate::{
    Axis, CliError, Common, DipArgs, FisherArgs, FitCouplingArgs, ForceMapArgs, LdrArgs, RespoMapArgs, RiMapArgs,
    TmmSpectrumArgs,
};

fn document<T: serde::Serialize>(
    command: &'static str,
    common: &Common,
    args: &T,
    csv: Table,
    json: serde_json::Value,
) -> Document {
    Document {
        command,
        config: to_value(args),
        format: common.format.unwrap_or_default(),
        out: common.out.clone(),
        csv,
        json,
    }
}

pub fn dip(mut a: DipArgs) -> Result<Document, CliError> {
    let mut file: DipArgs = config::load(&mut a.common)?;
    let d = DipArgs {
        gamma_hz: Some(1e9),
        kappa_hz: Some(2e9),
        g_hz: Some(1.8e9),
        tau: Some(GridSpec::linear(-5.0, 5.0, 201)),
        ..DipArgs::default()
    };
    resolve!(a, file, d; gamma_hz, kappa_hz, g_hz, tau);
    a.oracle |= file.oracle;
    let gamma = a.gamma_hz.unwrap();
    let point = OperatingPoint::new(a.g_hz.unwrap(), a.kappa_hz.unwrap(), gamma, 0.0)?;
    let taus = a.tau.unwrap().values();
    check_cells(taus.len())?;

    let closed = taus
        .iter()
        .map(|&t| Ok(g2_closed_form(&point.with_tau(t / gamma)?)?.value))
        .collect::<hom_sensor::Result<Vec<f64>>>()?;
    let oracle = if a.oracle {
        let values = par::try_map_indexed(taus.len(), |i| -> hom_sensor::Result<f64> {
            Ok(g2_oracle_point(&point.with_tau(taus[i] / gamma)?)?.value)
        })?;
        Some(values)
    } else {
        None
    };

    let mut csv = Table::new(if a.oracle {
        &["tau_gamma", "g2_closed", "g2_oracle"]
    } else {
        &["tau_gamma", "g2_closed"]
    });
    for (i, &t) in taus.iter().enumerate() {
        let mut row = vec![num(t), num(closed[i])];
        if let Some(o) = &oracle {
            row.push(num(o[i]));
        }
        csv.push(row);
    }
    let mut json = json!({ "tau_gamma": taus, "g2_closed": closed });
    if let Some(o) = &oracle {
        let worst = closed.iter().zip(o).map(|(c, o)| (c - o).abs()).fold(0.0, f64::max);
        csv.footer.push(format!("max |g2_closed - g2_oracle| = {}", num(worst)));
        json["g2_oracle"] = json!(o);
        json["max_discrepancy"] = json!(worst);
    }
    Ok(document("dip", &a.common, &a, csv, json))
}

#[derive(Deserialize)]
struct ModelFile {
    fit: CouplingFit,
}

fn load_fit(path: Option<&Path>) -> Result<CouplingFit, CliError> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read model {}: {e}", p.display())))?;
            let file: ModelFile =
                serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("model {}: {e}", p.display())))?;
            let m = file.fit.model;
            tmm::CouplingModel::new(m.a, m.b, m.d, m.lambda_nm)?;
            Ok(file.fit)
        }
        None => Ok(tmm::reference_sweeps()?.fit()?),
    }
}

fn model_note(fit: &CouplingFit) -> String {
    let m = fit.model;
    format!(
        "model: a = {} Hz, b = {} 1/nm, d = {}, r2_x = {}, r2_n = {}, x range = [{}, {}] nm",
        num(m.a),
        num(m.b),
        num(m.d),
        num(fit.r2_x),
        num(fit.r2_n),
        num(fit.x_range.0),
        num(fit.x_range.1)
    )
}

pub fn respo_map(mut a: RespoMapArgs) -> Result<Document, CliError> {
    let mut file: RespoMapArgs = config::load(&mut a.common)?;
    if a.axis.is_none() {
        a.axis = file.axis.take().or(Some(Axis::G));
    }
    let axis_kind = a.axis.unwrap();
    let d = match axis_kind {
        Axis::G => RespoMapArgs {
            signal_grid: Some(GridSpec::linear(0.05, 5.0, 100)),
            kappa_grid: Some(GridSpec::linear(0.1, 5.0, 50)),
            ..RespoMapArgs::default()
        },
        Axis::X => RespoMapArgs {
            signal_grid: Some(GridSpec::linear(800.0, 1400.0, 61)),
            kappa_grid: Some(GridSpec::geometric(1e12, 1e14, 41)),
            ..RespoMapArgs::default()
        },
        Axis::N => RespoMapArgs {
            signal_grid: Some(GridSpec::linear(1.0, 1.5, 51)),
            kappa_grid: Some(GridSpec::geometric(1e12, 1e14, 41)),
            x_bias: Some(449.0),
            ..RespoMapArgs::default()
        },
    };
    let d = RespoMapArgs {
        gamma_hz: Some(1e9),
        ..d
    };
    resolve!(a, file, d; gamma_hz, signal_grid, kappa_grid, x_bias, model);
    let gamma = a.gamma_hz.unwrap();
    let signals = a.signal_grid.unwrap().values();
    let kappas = a.kappa_grid.unwrap().values();
    check_cells(signals.len() * kappas.len())?;

    let mut notes = Vec::new();
    let (axis, columns): (SignalAxis, [&'static str; 3]) = match axis_kind {
        Axis::G => (
            SignalAxis::CouplingRatio,
            ["kappa_over_gamma", "g_over_gamma", "r_g_gamma"],
        ),
        Axis::X | Axis::N => {
            let fit = load_fit(a.model.as_deref())?;
            notes.push(model_note(&fit));
            if axis_kind == Axis::X {
                (
                    SignalAxis::Separation {
                        model: fit.model,
                        gamma,
                    },
                    ["kappa_hz", "x_nm", "r_x_per_nm"],
                )
            } else {
                let x_bias = a.x_bias.unwrap();
                (
                    SignalAxis::Index {
                        model: fit.model,
                        x_bias,
                        gamma,
                    },
                    ["kappa_hz", "n", "r_n_per_riu"],
                )
            }
        }
    };
    if axis_kind == Axis::G {
        a.x_bias = None;
    }
    let map = ResponsivityMap::evaluate(&kappas, &signals, |k, s| axis.responsivity(k, s))?;
    let ridge = map.locate_ridge();

    let mut csv = Table::new(&columns);
    csv.notes = notes;
    let cols = signals.len();
    for (i, v) in map.values.iter().enumerate() {
        csv.push([num(kappas[i / cols]), num(signals[i % cols]), num(*v)]);
    }
    let ridge_json = match &ridge {
        Ok(r) => {
            csv.footer
                .push(format!("ridge: {}", serde_json::to_string(r).expect("plain data")));
            to_value(r)
        }
        Err(e) => {
            csv.footer.push(format!("ridge: none ({e})"));
            serde_json::Value::Null
        }
    };
    let json = json!({
        "kappa_axis": kappas,
        "signal_axis": signals,
        "values": map.values,
        "ridge": ridge_json,
    });
    Ok(document("respo-map", &a.common, &a, csv, json))
}

pub fn ldr(mut a: LdrArgs) -> Result<Document, CliError> {
    let mut file: LdrArgs = config::load(&mut a.common)?;
    let d = LdrArgs {
        gamma_hz: Some(1e9),
        kappa_grid: Some(GridSpec::linear(0.5, 5.0, 10)),
        f_hz: Some(1.0),
        epsilon: Some(0.0),
        linearity_tol: Some(0.01),
        ..LdrArgs::default()
    };
    if a.g_hz.is_none() && a.kappa_hz.is_none() && a.kappa_grid.is_none() {
        a.g_hz = file.g_hz.take();
        a.kappa_hz = file.kappa_hz.take();
    }
    let explicit = a.g_hz.is_some();
    if explicit && a.kappa_hz.is_none() {
        return Err(CliError::Validation("g_hz needs kappa_hz".into()));
    }
    if explicit {
        a.kappa_grid = None;
        resolve!(a, file, d; gamma_hz, f_hz, epsilon, linearity_tol);
    } else {
        a.kappa_hz = None;
        resolve!(a, file, d; gamma_hz, kappa_grid, f_hz, epsilon, linearity_tol);
    }
    let gamma = a.gamma_hz.unwrap();
    let (f, eps, tol) = (a.f_hz.unwrap(), a.epsilon.unwrap(), a.linearity_tol.unwrap());

    let biases: Vec<(f64, f64)> = if explicit {
        vec![(a.kappa_hz.unwrap(), a.g_hz.unwrap())]
    } else {
        let kappas = a.kappa_grid.unwrap().values();
        check_cells(kappas.len() * 2000)?;
        kappas
            .iter()
            .map(|&k| Ok((k * gamma, metrics::ridge_bias(k * gamma, gamma)?)))
            .collect::<hom_sensor::Result<_>>()?
    };
    let mut csv = Table::new(&[
        "kappa_over_gamma",
        "g_over_gamma",
        "r_max_per_hz",
        "dg_min_hz",
        "dg_max_hz",
        "ldr_db",
    ]);
    let mut records = Vec::new();
    for (kappa, g) in biases {
        let point = OperatingPoint::new(g, kappa, gamma, 0.0)?;
        let budget = NoiseBudget::for_bandwidth(&point, f, eps)?;
        let r = metrics::linear_dynamic_range(&point, &budget, tol)?;
        csv.push([
            num(kappa / gamma),
            num(g / gamma),
            num(r.responsivity_max),
            num(r.dg_min),
            num(r.dg_max),
            num(r.ldr_db),
        ]);
        records.push(json!({ "kappa_hz": kappa, "g_hz": g, "range": r }));
    }
    Ok(document("ldr", &a.common, &a, csv, json!({ "records": records })))
}

fn design(mirror: Option<usize>, spacer: Option<usize>, hole: Option<f64>) -> CoupledCavityDesign {
    let mut d = CoupledCavityDesign::default();
    if let Some(m) = mirror {
        d.mirror_pairs = m;
    }
    if let Some(s) = spacer {
        d.spacer_pairs = s;
    }
    if let Some(h) = hole {
        d.hole_index = h;
    }
    d
}

fn read_stack(path: &PathBuf) -> Result<StackSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read stack {}: {e}", path.display())))?;
    let stack: StackSpec = toml::from_str(&text)
        .map_err(|e| CliError::Validation(format!("stack {}: {}", path.display(), e.message())))?;
    stack.validate()?;
    Ok(stack)
}

pub fn tmm_spectrum(mut a: TmmSpectrumArgs) -> Result<Document, CliError> {
    let mut file: TmmSpectrumArgs = config::load(&mut a.common)?;
    let base = CoupledCavityDesign::default();
    let d = TmmSpectrumArgs {
        lambda_grid: Some(GridSpec::linear(940.0, 1030.0, 1801)),
        ..TmmSpectrumArgs::default()
    };
    resolve!(a, file, d; stack, lambda_grid);
    let stack = match &a.stack {
        Some(p) => {
            if a.mirror_pairs.or(a.spacer_pairs).is_some() || a.hole_index.is_some() {
                return Err(CliError::Validation("a stack file excludes design parameters".into()));
            }
            read_stack(p)?
        }
        None => {
            let d = TmmSpectrumArgs {
                mirror_pairs: Some(base.mirror_pairs),
                spacer_pairs: Some(base.spacer_pairs),
                hole_index: Some(base.hole_index),
                ..TmmSpectrumArgs::default()
            };
            resolve!(a, file, d; mirror_pairs, spacer_pairs, hole_index);
            design(a.mirror_pairs, a.spacer_pairs, a.hole_index).build()?
        }
    };
    let grid = a.lambda_grid.unwrap().values();
    check_cells(grid.len())?;
    let responses = par::try_map_indexed(grid.len(), |i| stack.response(grid[i]))?;
    let spectrum: Vec<(f64, f64)> = grid
        .iter()
        .zip(&responses)
        .map(|(l, r)| (*l, r.transmittance))
        .collect();

    let mut csv = Table::new(&["lambda_nm", "transmittance", "reflectance"]);
    for (l, r) in grid.iter().zip(&responses) {
        csv.push([num(*l), num(r.transmittance), num(r.reflectance)]);
    }
    let splitting = tmm::extract_splitting(&spectrum).ok();
    if let Some(s) = &splitting {
        csv.footer.push(format!(
            "splitting: lambda_minus = {} nm, lambda_plus = {} nm, g = {} Hz",
            num(s.lambda_minus),
            num(s.lambda_plus),
            num(s.g)
        ));
    }
    let json = json!({
        "lambda_nm": grid,
        "transmittance": responses.iter().map(|r| r.transmittance).collect::<Vec<_>>(),
        "reflectance": responses.iter().map(|r| r.reflectance).collect::<Vec<_>>(),
        "splitting": splitting,
    });
    Ok(document("tmm-spectrum", &a.common, &a, csv, json))
}

pub fn fit_coupling(mut a: FitCouplingArgs) -> Result<Document, CliError> {
    let mut file: FitCouplingArgs = config::load(&mut a.common)?;
    let base = CoupledCavityDesign::default();
    let d = FitCouplingArgs {
        mirror_pairs: Some(base.mirror_pairs),
        spacer_sweep: Some(tmm::REFERENCE_SPACER_PAIRS.to_vec()),
        spacer_pairs: Some(base.spacer_pairs),
        hole_grid: Some(GridSpec::linear(1.0, 1.5, 6)),
        ..FitCouplingArgs::default()
    };
    resolve!(a, file, d; mirror_pairs, spacer_sweep, spacer_pairs, hole_grid);
    let holes = a.hole_grid.unwrap().values();
    let sweep = a.spacer_sweep.clone().unwrap();
    check_cells(holes.len() + sweep.len())?;
    let design = design(a.mirror_pairs, a.spacer_pairs, None);
    let sweeps = tmm::coupling_sweeps(&design, &sweep, &holes, &ScanPlan::default())?;
    let fit = sweeps.fit()?;

    let mut csv = Table::new(&[
        "axis",
        "value",
        "lambda_minus_nm",
        "lambda_plus_nm",
        "delta_lambda_nm",
        "g_hz",
    ]);
    csv.notes.push(model_note(&fit));
    for (axis, rows) in [("x_nm", &sweeps.x_sweep), ("n", &sweeps.n_sweep)] {
        for (v, s) in rows {
            csv.push([
                axis.to_string(),
                num(*v),
                num(s.lambda_minus),
                num(s.lambda_plus),
                num(s.delta_lambda),
                num(s.g),
            ]);
        }
    }
    let json = json!({ "fit": fit, "sweeps": sweeps });
    Ok(document("fit-coupling", &a.common, &a, csv, json))
}

fn strict_budget(gamma: f64, kappas: &[f64], f: f64, eps: f64) -> Result<NoiseBudget, CliError> {
    let kmin = kappas.iter().copied().fold(f64::INFINITY, f64::min);
    let point = OperatingPoint::new(1.0, kmin, gamma, 0.0)?;
    Ok(NoiseBudget::for_bandwidth(&point, f, eps)?)
}

pub fn force_map(mut a: ForceMapArgs) -> Result<Document, CliError> {
    let mut file: ForceMapArgs = config::load(&mut a.common)?;
    let gaas = MaterialSpec::gaas();
    let d = ForceMapArgs {
        gamma_hz: Some(1e9),
        kappa_grid: Some(GridSpec::geometric(1e12, 1e14, 21)),
        x_grid: Some(GridSpec::linear(
            apps::FORCE_BIAS_RANGE_NM.0,
            apps::FORCE_BIAS_RANGE_NM.1,
            61,
        )),
        f_hz: Some(1.0),
        epsilon: Some(0.0),
        youngs_modulus_gpa: Some(gaas.youngs_modulus_gpa),
        thickness_um: Some(gaas.thickness_um),
        ..ForceMapArgs::default()
    };
    resolve!(a, file, d; gamma_hz, kappa_grid, x_grid, f_hz, epsilon, youngs_modulus_gpa, thickness_um, model);
    let gamma = a.gamma_hz.unwrap();
    let kappas = a.kappa_grid.unwrap().values();
    let xs = a.x_grid.unwrap().values();
    check_cells(kappas.len() * xs.len())?;
    let material = MaterialSpec::new(a.youngs_modulus_gpa.unwrap(), a.thickness_um.unwrap())?;
    let budget = strict_budget(gamma, &kappas, a.f_hz.unwrap(), a.epsilon.unwrap())?;
    let fit = load_fit(a.model.as_deref())?;
    let map = apps::force_map(&fit, &material, &xs, &kappas, gamma, &budget)?;

    let mut csv = Table::new(&[
        "kappa_hz",
        "x_nm",
        "g_hz",
        "g2",
        "r_g_per_hz",
        "r_x_per_nm",
        "dx_min_nm",
        "f_min_n",
        "in_calibration",
    ]);
    csv.notes.push(model_note(&fit));
    csv.notes.push(format!("stiffness = {} N/m", num(material.stiffness())));
    let outside = map.cells.iter().filter(|c| !c.in_calibration).count();
    if outside > 0 {
        let msg = format!("warning: {outside} cells lie outside the calibrated separation range");
        eprintln!("homsensor: {msg}");
        csv.notes.push(msg);
    }
    for c in &map.cells {
        csv.push([
            num(c.kappa),
            num(c.x_bias),
            num(c.g),
            num(c.g2),
            num(c.responsivity_g),
            num(c.responsivity),
            num(c.signal_min),
            num(c.force_min.unwrap_or(f64::NAN)),
            c.in_calibration.to_string(),
        ]);
    }
    let json = json!({ "fit": fit, "stiffness_n_per_m": material.stiffness(), "map": map });
    Ok(document("force-map", &a.common, &a, csv, json))
}

pub fn ri_map(mut a: RiMapArgs) -> Result<Document, CliError> {
    let mut file: RiMapArgs = config::load(&mut a.common)?;
    let d = RiMapArgs {
        gamma_hz: Some(1e9),
        kappa_grid: Some(GridSpec::geometric(1e12, 1e14, 21)),
        f_hz: Some(1.0),
        epsilon: Some(0.0),
        ..RiMapArgs::default()
    };
    resolve!(a, file, d; gamma_hz, kappa_grid, f_hz, epsilon, model, x_bias);
    let fit = load_fit(a.model.as_deref())?;
    if a.x_bias.is_none() {
        a.x_bias = Some(fit.x_at_n.unwrap_or(fit.x_range.0));
    }
    let gamma = a.gamma_hz.unwrap();
    let kappas = a.kappa_grid.unwrap().values();
    check_cells(kappas.len())?;
    let budget = strict_budget(gamma, &kappas, a.f_hz.unwrap(), a.epsilon.unwrap())?;
    let map = apps::ri_map(&fit, a.x_bias.unwrap(), &kappas, gamma, &budget)?;

    let mut csv = Table::new(&[
        "kappa_hz",
        "x_nm",
        "g_hz",
        "g2",
        "r_g_per_hz",
        "r_n_per_riu",
        "dn_min_riu",
        "in_calibration",
    ]);
    csv.notes.push(model_note(&fit));
    if !map.all_in_calibration() {
        let msg = "warning: the separation bias lies outside the calibrated range".to_string();
        eprintln!("homsensor: {msg}");
        csv.notes.push(msg);
    }
    for c in &map.cells {
        csv.push([
            num(c.kappa),
            num(c.x_bias),
            num(c.g),
            num(c.g2),
            num(c.responsivity_g),
            num(c.responsivity),
            num(c.signal_min),
            c.in_calibration.to_string(),
        ]);
    }
    let json = json!({ "fit": fit, "map": map });
    Ok(document("ri-map", &a.common, &a, csv, json))
}

fn parse_input(s: &str) -> Result<InputConfig, CliError> {
    serde_json::from_value(json!(s)).map_err(|_| {
        CliError::Validation(format!(
            "unknown input `{s}`; expected coherent_n1, coherent_n2, fock_serial_n1 or fock_hom_n2"
        ))
    })
}

pub fn fisher(mut a: FisherArgs) -> Result<Document, CliError> {
    let mut file: FisherArgs = config::load(&mut a.common)?;
    let d = FisherArgs {
        mse: Some(1e-4),
        t1: Some(1.0),
        t2: Some(1.0),
        ..FisherArgs::default()
    };
    resolve!(a, file, d; mse, input, t1, t2);
    let inputs = match &a.input {
        Some(s) => vec![parse_input(s)?],
        None => InputConfig::ALL.to_vec(),
    };
    let records = inputs
        .into_iter()
        .map(|c| apps::fisher_comparison(a.mse.unwrap(), c, (a.t1.unwrap(), a.t2.unwrap())))
        .collect::<hom_sensor::Result<Vec<_>>>()?;
    let mut csv = Table::new(&[
        "input",
        "mse",
        "t1",
        "t2",
        "base_information",
        "effective_information",
        "trials",
        "trials_ceil",
    ]);
    for r in &records {
        let name = to_value(&r.config).as_str().expect("unit variant").to_string();
        csv.push([
            name,
            num(r.mse_target),
            num(r.t1),
            num(r.t2),
            num(r.base_information),
            num(r.effective_information),
            num(r.trials),
            r.trials_ceil.to_string(),
        ]);
    }
    Ok(document("fisher", &a.common, &a, csv, json!({ "records": records })))
}
