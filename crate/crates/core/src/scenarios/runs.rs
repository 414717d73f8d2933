use std::io::Write;

use super::config::ScenarioConfig;
use super::report::{Metric, MetricValue, Provenance, Report};
use crate::error::{Error, Result};
use crate::memory::{
    simulate_detection, simulate_input, snr, spectral_capacity, storage_timeline_with,
    temporal_capacity, AfcComb, MemoryCalibration, TimeWindow, ToothShape,
};
use crate::mux::{
    channel_fidelity_report, crosstalk_min, execute_conversion, mode_grid, parse_schedule,
    path_payloads, plan_conversion, run_multiplexed, simulate_channel_tomography, ChannelPayload,
    ConversionOp, CrosstalkMatrix, FidelityRow, GridDims, ModeId, Ratio, Schedule, ScheduledOp,
};
use crate::qutrit::{
    average_gate_fidelity, process_fidelity, state_fidelity, DensityMatrix, Mat3, ProcessMatrix,
    QutritKet,
};
use crate::rng::{derive_seed, derive_seed_str};
use crate::tomography::{
    bootstrap_error, bootstrap_std, classical_bound_check, reconstruct_process, reconstruct_state,
    resample_counts, simulate_counts, BoundVerdict, CountRecord, DetectionModel,
    TomographySettings, CLASSICAL_BOUND,
};

fn csv_err(e: csv::Error) -> Error {
    Error::Reporting(e.to_string())
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Reporting(e.to_string()))
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

pub(super) fn fig2a(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new("fig2a", cfg.seed);
    let cal = cfg.calibration;
    let t = &cfg.timing;
    let timeline = storage_timeline_with(t.delta_hz, t.base_spin_us, 0.0, t.control_lead_us)?;
    let trials = cfg.tomography.histogram_trials;
    let seed = |stage: &str| derive_seed_str(cfg.seed, &format!("fig2a/{stage}"));

    let input = simulate_input(&cal, &timeline, trials, seed("input"))?;
    let retrieved = simulate_detection(&cal, &timeline, trials, seed("retrieved"))?;
    let vacuum = simulate_detection(&MemoryCalibration { mu: 0.0, ..cal }, &timeline, trials, seed("vacuum"))?;

    let w = cal.detection_window_us;
    let signal_window = TimeWindow::centered(timeline.t_out_us, w);
    let noise_window = TimeWindow::new(signal_window.end_us, signal_window.end_us + w);
    let s = retrieved.window_counts(signal_window)? as f64;
    let n = retrieved.window_counts(noise_window)? as f64;
    let ratio = snr(&retrieved, signal_window, noise_window)?;
    let mut m = Metric::measured("snr", ratio.value(), 39.7, Some(6.7));
    if n > 0.0 && s > 0.0 {
        m = m.with_uncertainty(ratio.value() * (1.0 / s + 1.0 / n).sqrt());
    }
    report.push(m);

    let scale = trials as f64 * cal.mu * cal.eta_detect;
    if scale > 0.0 {
        report.push(
            Metric::measured("spin_wave_efficiency", (s - n) / scale, 0.0551, None)
                .with_uncertainty((s + n).sqrt() / scale),
        );
    }
    report.push(Metric::derived("storage_time_us", MetricValue::Number(timeline.storage_time_us()), 12.68).with_unit("us"));
    report.push(Metric::derived("afc_delay_us", MetricValue::Number(timeline.t_echo_us - timeline.t_in_us), 5.0).with_unit("us"));
    report.push(Metric::derived("spin_storage_us", MetricValue::Number(timeline.t_out_us - timeline.t_echo_us), 7.68).with_unit("us"));
    report.push(Metric::model("vacuum_window_counts", MetricValue::Count(vacuum.window_counts(signal_window)?)));
    report.push(Metric::model("trials", MetricValue::Count(trials)));

    report.attach("fig2a_input.csv", |b| input.write_csv(b))?;
    report.attach("fig2a_retrieved.csv", |b| retrieved.write_csv(b))?;
    report.attach("fig2a_vacuum.csv", |b| vacuum.write_csv(b))?;
    Ok(report)
}

fn qpt_fidelity(inputs: &[DensityMatrix], data: &[Vec<CountRecord>], settings: &TomographySettings) -> Result<(f64, ProcessMatrix)> {
    let outputs = data
        .iter()
        .map(|r| reconstruct_state(r, settings).map(|t| t.rho_hat))
        .collect::<Result<Vec<_>>>()?;
    let chi = reconstruct_process(inputs, &outputs)?;
    Ok((process_fidelity(&chi, &Mat3::identity())?, chi))
}

pub(super) fn qpt(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new("qpt", cfg.seed);
    let settings = TomographySettings::standard();
    let channel = ProcessMatrix::depolarizing(cfg.channel.depolarizing)?;
    let cal = cfg.calibration;
    let model = DetectionModel { eta_detect: cal.signal_per_trial(), noise_rate: cal.noise_rate };
    let tseed = cfg.tomography_seed();
    let data_seed = derive_seed_str(tseed, "qpt/counts");

    let inputs: Vec<DensityMatrix> = settings.states().iter().map(QutritKet::to_density).collect();
    let data = inputs
        .iter()
        .enumerate()
        .map(|(j, rho)| {
            simulate_counts(&channel.apply(rho)?, &settings, cfg.tomography.process_exposure, model, derive_seed(data_seed, j as u64))
        })
        .collect::<Result<Vec<_>>>()?;

    let (fidelity, chi) = qpt_fidelity(&inputs, &data, &settings)?;
    let std = bootstrap_std(cfg.tomography.resamples, derive_seed_str(tseed, "qpt/bootstrap"), |s| {
        let resampled: Vec<Vec<CountRecord>> =
            data.iter().enumerate().map(|(j, r)| resample_counts(r, derive_seed(s, j as u64))).collect();
        qpt_fidelity(&inputs, &resampled, &settings).map(|(f, _)| f)
    })?;

    report.push(Metric::measured("process_fidelity", fidelity, 0.909, Some(0.010)).with_uncertainty(std));
    report.push(Metric::number("average_gate_fidelity", average_gate_fidelity(&chi, &Mat3::identity())?));
    let verdict = match classical_bound_check(fidelity)? {
        BoundVerdict::Pass => "pass",
        BoundVerdict::Fail => "fail",
    };
    report.push(Metric {
        target: Some(CLASSICAL_BOUND),
        ..Metric::model("classical_bound", MetricValue::Text(verdict.into()))
    });
    report.push(Metric::number("chi_min_eigenvalue", chi.min_eigenvalue()));
    report.push(Metric::number("chi_tp_residual", chi.tp_residual()));

    let header: Vec<String> = std::iter::once("row".to_string()).chain((1..=9).map(|k| format!("lambda{k}"))).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    for (name, part) in [("qpt_chi_real.csv", 0), ("qpt_chi_imag.csv", 1)] {
        let rows: Vec<Vec<String>> = (0..9)
            .map(|m| {
                std::iter::once(format!("lambda{}", m + 1))
                    .chain((0..9).map(|n| {
                        let z = chi.chi()[(m, n)];
                        fmt(if part == 0 { z.re } else { z.im })
                    }))
                    .collect()
            })
            .collect();
        report.attach(name, |b| write_rows(b, &header, &rows))?;
    }
    let rows: Vec<Vec<String>> = data
        .iter()
        .enumerate()
        .flat_map(|(j, recs)| {
            recs.iter().map(move |r| vec![j.to_string(), r.setting_index.to_string(), r.counts.to_string(), r.exposure.to_string()])
        })
        .collect();
    report.attach("qpt_counts.csv", |b| write_rows(b, &["input_index", "setting_index", "counts", "exposure"], &rows))?;
    Ok(report)
}

fn crosstalk_metric(name: &str, m: &CrosstalkMatrix, target: f64, target_uncertainty: Option<f64>) -> Result<Metric> {
    Ok(match crosstalk_min(m)? {
        Ratio::Finite(v) => Metric::measured(name, v, target, target_uncertainty),
        Ratio::Infinite => Metric {
            target: Some(target),
            target_uncertainty,
            provenance: Provenance::ReportedMeasurement,
            ..Metric::model(name, MetricValue::Text("infinite".into()))
        },
    })
}

pub(super) fn fig3c(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new("fig3c", cfg.seed);
    let g = cfg.grid;
    let modes = mode_grid(g.nf, g.nt, g.ns)?;
    let payloads = path_payloads(&modes, cfg.mux.mu);
    let m = run_multiplexed(&payloads, &cfg.mux_calibration(), cfg.mux.trials, derive_seed_str(cfg.seed, "fig3c/crosstalk"))?;
    report.push(crosstalk_metric("crosstalk_min", &m, 19.7, Some(3.41))?);
    report.push(Metric::derived("mode_count", MetricValue::Count(modes.len() as u64), f64::from(g.nf * g.nt * g.ns)));
    report.push(Metric::model("trials_per_mode", MetricValue::Count(cfg.mux.trials)));
    report.attach("fig3c_crosstalk.csv", |b| m.write_csv(b))?;
    Ok(report)
}

fn fidelity_csv(rows: &[FidelityRow]) -> Vec<Vec<String>> {
    rows.iter().map(|r| vec![r.label.clone(), fmt(r.fidelity), fmt(r.std)]).collect()
}

/// ψ₁ payloads on `modes`, executed through `schedule`, with per-output
/// tomography.
fn convert_and_measure(
    cfg: &ScenarioConfig,
    schedule: &Schedule,
    psi: &QutritKet,
    trials_factor: u64,
    stage: &str,
) -> Result<(crate::mux::Execution, Vec<FidelityRow>, crate::mux::PulseTimeline, Vec<ChannelPayload>)> {
    let plan = plan_conversion(schedule, &cfg.timing)?;
    let payloads: Vec<ChannelPayload> = schedule
        .input_modes()
        .into_iter()
        .map(|m| ChannelPayload::qutrit(m, psi.to_density(), cfg.mux.mu))
        .collect();
    let cal = cfg.mux_calibration();
    let channel = ProcessMatrix::depolarizing(cfg.channel.depolarizing)?;
    let exposure = cfg.tomography.exposure * trials_factor;
    let ex = execute_conversion(&payloads, &plan, &cal, Some(&channel), exposure, derive_seed_str(cfg.seed, &format!("{stage}/histogram")))?;
    let settings = TomographySettings::standard();
    let tseed = cfg.tomography_seed();
    let tomo = simulate_channel_tomography(&ex.outputs, &payloads, &cal, &settings, exposure, derive_seed_str(tseed, &format!("{stage}/counts")))?;
    let rows = channel_fidelity_report(&tomo, &settings, cfg.tomography.resamples, derive_seed_str(tseed, &format!("{stage}/bootstrap")))?;
    Ok((ex, rows, plan, payloads))
}

const DEFAULT_QMC: &str = "input f1t1 f2t2\nf1t1 shift f2\nf1t1 retime t2\nf2t2 shift f1\nf2t2 retime t1\n";

pub(super) fn fig4(cfg: &ScenarioConfig, schedule: Option<&Schedule>) -> Result<Report> {
    let mut report = Report::new("fig4", cfg.seed);
    let g = cfg.grid;
    let dims = GridDims { nf: g.nf, nt: g.nt, ns: 1 };
    let modes: Vec<ModeId> = (1..=g.nf).flat_map(|f| (1..=g.nt).map(move |t| ModeId::qutrit(f, t))).collect();
    let psi = QutritKet::psi1();
    let payloads: Vec<ChannelPayload> = modes.iter().map(|m| ChannelPayload::qutrit(*m, psi.to_density(), cfg.mux.mu)).collect();
    let m = run_multiplexed(&payloads, &cfg.mux_calibration(), cfg.mux.trials, derive_seed_str(cfg.seed, "fig4/crosstalk"))?;
    report.push(crosstalk_metric("crosstalk_min", &m, 15.2, None)?);
    report.attach("fig4_crosstalk.csv", |b| m.write_csv(b))?;

    // storage without conversion; channels sharing a readout time are merged
    let storage = Schedule::new(
        dims,
        modes.clone(),
        modes.iter().enumerate().map(|(k, m)| ScheduledOp { line: k + 1, mode: *m, op: ConversionOp::Keep, merge: true }).collect(),
    );
    let (_, rows, _, _) = convert_and_measure(cfg, &storage, &psi, 1, "fig4/storage")?;
    for r in &rows {
        report.push(Metric::in_range(format!("storage_fidelity_{}", r.label), r.fidelity, [0.85, 0.92]).with_uncertainty(r.std));
    }
    report.attach("fig4_storage_fidelities.csv", |b| write_rows(b, &["channel", "fidelity", "std"], &fidelity_csv(&rows)))?;

    let default_qmc;
    let qmc = match schedule {
        Some(s) => s,
        None => {
            default_qmc = parse_schedule(DEFAULT_QMC)?;
            &default_qmc
        }
    };
    let (ex, rows, plan, _) = convert_and_measure(cfg, qmc, &psi, 1, "fig4/qmc")?;
    report.push(Metric::model("qmc_channels", MetricValue::Count(plan.channels.len() as u64)));
    report.push(Metric::model("qmc_outputs", MetricValue::Count(plan.output_count() as u64)));
    for r in &rows {
        report.push(Metric::in_range(format!("qmc_fidelity_{}", r.label), r.fidelity, [0.85, 0.92]).with_uncertainty(r.std));
    }
    report.attach("fig4_qmc_fidelities.csv", |b| write_rows(b, &["channel", "fidelity", "std"], &fidelity_csv(&rows)))?;
    report.attach("fig4_qmc_histogram.csv", |b| ex.histogram.write_csv(b))?;
    report.attach("fig4_qmc_timeline.txt", |b| b.write_all(plan.summary().as_bytes()).map_err(|e| Error::Reporting(e.to_string())))?;
    Ok(report)
}

/// One conversion of the fidelity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub state: &'static str,
    pub operation: &'static str,
    pub schedule: &'static str,
    /// Output modes, space separated, sorted.
    pub outputs: &'static str,
    pub target: f64,
    pub target_std: f64,
    /// Integration time relative to the other rows.
    pub integration: u64,
}

pub fn table1_rows() -> [Table1Row; 8] {
    let row = |state, operation, schedule, outputs, target, target_std, integration| Table1Row {
        state,
        operation,
        schedule,
        outputs,
        target,
        target_std,
        integration,
    };
    [
        row("psi1", "exchange", "input f1t1 f2t2\nf1t1 retime t2\nf2t2 retime t1\n", "f1t2 f2t1", 0.881, 0.022, 1),
        row("psi1", "multiplex", "input f1t1 f2t2\nf1t1 keep merge\nf2t2 retime t1 merge\n", "f1t1 f2t1", 0.876, 0.022, 1),
        row("psi1", "shift", "input f1t1 f2t2\nf1t1 shift f2\n", "f2t1 f2t2", 0.897, 0.020, 1),
        row("psi1", "split", "input f1t1 f2t2\nf1t1 split t1 t2 0.5 0.0\nf2t2 drop\n", "f1t1 f1t2", 0.828, 0.019, 2),
        row("psi2", "demultiplex", "input f1t2 f2t2\nf1t2 keep merge\nf2t2 retime t1 merge\n", "f1t2 f2t1", 0.896, 0.017, 1),
        row("psi2", "sequence", "input f1t2 f2t2\nf1t2 retime t1 merge\nf2t2 retime t1 merge\n", "f1t1 f2t1", 0.898, 0.013, 1),
        row("psi2", "shift", "input f1t2 f2t2\nf1t2 shift f2\nf1t2 retime t1\n", "f2t1 f2t2", 0.898, 0.016, 1),
        row("psi2", "split", "input f1t2 f2t2\nf1t2 split t1 t2 0.5 0.0\nf2t2 drop\n", "f1t1 f1t2", 0.829, 0.025, 2),
    ]
}

pub(super) fn table1(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new("table1", cfg.seed);
    let settings = TomographySettings::standard();
    let cal = cfg.mux_calibration();
    let channel = ProcessMatrix::depolarizing(cfg.channel.depolarizing)?;
    let tseed = cfg.tomography_seed();
    let mut csv_rows = Vec::new();
    let mut fidelities = Vec::new();

    for (k, row) in table1_rows().iter().enumerate() {
        let psi = if row.state == "psi1" { QutritKet::psi1() } else { QutritKet::psi2() };
        let schedule = parse_schedule(row.schedule)?;
        let plan = plan_conversion(&schedule, &cfg.timing)?;
        let payloads: Vec<ChannelPayload> = schedule
            .input_modes()
            .into_iter()
            .map(|m| ChannelPayload::qutrit(m, psi.to_density(), cfg.mux.mu))
            .collect();
        let exposure = cfg.tomography.exposure * row.integration;
        let ex = execute_conversion(&payloads, &plan, &cal, Some(&channel), exposure, derive_seed_str(cfg.seed, &format!("table1/{k}/histogram")))?;
        let mut outs: Vec<String> = ex.outputs.iter().map(|o| o.mode.to_string()).collect();
        outs.sort();
        if outs.join(" ") != row.outputs {
            return Err(Error::Execution(format!("row {}: outputs {} differ from {}", k + 1, outs.join(" "), row.outputs)));
        }
        let tomo = simulate_channel_tomography(&ex.outputs, &payloads, &cal, &settings, exposure, derive_seed_str(tseed, &format!("table1/{k}/counts")))?;
        // both outputs of a row are measured together
        let pooled: Vec<CountRecord> = tomo.iter().flat_map(|c| c.records.iter().copied()).collect();
        let reference = psi.to_density();
        let est = reconstruct_state(&pooled, &settings)?;
        let fidelity = state_fidelity(&reference, &est.rho_hat);
        let std = bootstrap_error(&pooled, &settings, &reference, cfg.tomography.resamples, derive_seed_str(tseed, &format!("table1/{k}/bootstrap")))?;
        report.push(
            Metric::measured(format!("fidelity_{}_{}", row.state, row.operation), fidelity, row.target, Some(row.target_std))
                .with_uncertainty(std),
        );
        csv_rows.push(vec![
            row.state.to_string(),
            row.operation.to_string(),
            row.outputs.to_string(),
            fmt(fidelity),
            fmt(std),
            format!("{:.3}", row.target),
            format!("{:.3}", row.target_std),
        ]);
        fidelities.push((row.state, row.operation, fidelity));
    }
    for state in ["psi1", "psi2"] {
        let group: Vec<_> = fidelities.iter().filter(|(s, _, _)| *s == state).collect();
        let split = group.iter().find(|(_, op, _)| *op == "split").map(|(_, _, f)| *f).unwrap_or(f64::NAN);
        let lowest = group.iter().filter(|(_, op, _)| *op != "split").all(|(_, _, f)| split < *f);
        report.push(Metric::model(format!("split_lowest_{state}"), MetricValue::Flag(lowest)));
    }
    report.attach("table1.csv", |b| {
        write_rows(b, &["state", "operation", "outputs", "fidelity", "std", "target", "target_std"], &csv_rows)
    })?;
    Ok(report)
}

pub(super) fn capacity(cfg: &ScenarioConfig) -> Result<Report> {
    let mut report = Report::new("capacity", cfg.seed);
    let comb = AfcComb {
        delta_hz: cfg.timing.delta_hz,
        bandwidth_hz: 2e6,
        center_offset_hz: 0.0,
        finesse: 4.0,
        peak_od: 10.0,
        background_od: 0.2,
        shape: ToothShape::Square,
    };
    comb.validate()?;
    let count = |v: u64| MetricValue::Count(v);
    report.push(Metric::derived("temporal_capacity", count(temporal_capacity(&comb)), 10.0));
    let spectral = spectral_capacity(5e9, cfg.timing.spectral_spacing_hz);
    report.push(Metric::derived("spectral_channels_5ghz", count(spectral), 62.0));
    report.push(Metric::derived("mode_grid_2x2x3", count(mode_grid(2, 2, 3)?.len() as u64), 12.0));
    report.push(Metric::derived("mode_grid_60x50x51", count(mode_grid(60, 50, 51)?.len() as u64), 153_000.0));
    let g = cfg.grid;
    let configured = mode_grid(g.nf, g.nt, g.ns)?.len() as u64;
    report.push(Metric::derived("mode_grid_configured", count(configured), f64::from(g.nf * g.nt * g.ns)));
    Ok(report)
}
