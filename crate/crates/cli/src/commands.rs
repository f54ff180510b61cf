//! Command implementations. Every command computes its results fully
//! before writing any output file.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use ris_core::codebook::{steer, SteeringTarget};
use ris_core::engine::{scattered_pattern, LoadModel};
use ris_core::error::{Result, RisError};
use ris_core::field::{
    pattern_db, pattern_metrics, write_pattern_csv, AngleGrid, ComplexPattern, DB_FLOOR,
};
use ris_core::measurement::{background_subtract, read_trace_csv, write_trace_csv};
use ris_core::oracle::{
    read_network_json, synthesize_network, write_network_json, PortNetwork,
};
use ris_core::psi::{
    cascade_isolation, read_circuit_json, two_port_isolation, write_sweep_csv, FrequencySweep,
};
use ris_core::topology::{
    optimize, reflection_phases, write_geometry_json, EntropyObjective, GaParams,
};

use crate::config::ExperimentConfig;

fn out_file(out: &Path, name: &str) -> PathBuf {
    out.join(name)
}

fn create(out: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(out_file(out, name))?))
}

fn ensure_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Build (or load) the scattering network a config describes.
fn network_from(config: &ExperimentConfig) -> Result<PortNetwork> {
    if let Some(path) = &config.network_file {
        let file = fs::File::open(path)?;
        return read_network_json(std::io::BufReader::new(file));
    }
    let array = config
        .array
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs an array section".into()))?;
    let grid = config
        .grid
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs a grid section".into()))?
        .to_grid()?;
    let net = synthesize_network(&array.to_spec(), &grid)?;
    if config.structural_oc {
        let incident = config
            .incident
            .as_ref()
            .ok_or_else(|| {
                RisError::InvalidInput("structural_oc needs an incident section".into())
            })?
            .to_wave(array.frequency_hz);
        let oc = net.structural_oc_pattern(&incident, config.structural_z0_ohm)?;
        net.with_oc_pattern(oc)
    } else {
        Ok(net)
    }
}

fn maybe_resample(p: &ComplexPattern, step: Option<f64>) -> Result<ComplexPattern> {
    match step {
        Some(s) => p.resample_theta(s),
        None => Ok(p.clone()),
    }
}

// ── synth-array ─────────────────────────────────────────────────────────

pub fn synth_array(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let net = network_from(config)?;
    ensure_out(out)?;
    write_network_json(create(out, "network.json")?, &net)?;
    for (m, pattern) in net.port_patterns().iter().enumerate() {
        let name = format!("port_{m:03}.csv");
        write_pattern_csv(create(out, &name)?, pattern)?;
    }
    write_pattern_csv(create(out, "oc_pattern.csv")?, net.oc_pattern())?;
    println!("wrote {}-port network to {}", net.num_ports(), out.display());
    Ok(())
}

// ── steer ───────────────────────────────────────────────────────────────

struct SteerRow {
    target: f64,
    outcome: std::result::Result<ris_core::codebook::SteeringCodebook, String>,
}

pub fn steer_command(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let net = network_from(config)?;
    let array = config.array.as_ref();
    let (rows, cols) = array.map(|a| (a.rows, a.cols)).unwrap_or((1, net.num_ports()));
    let states = config
        .element_states
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs element_states".into()))?;
    let table = states.to_table()?;
    let options = states.to_options(rows, cols, config.refine_budget);
    let incident = config
        .incident
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs an incident section".into()))?
        .to_wave(net.frequency_hz());
    let targets = config
        .targets_theta_deg
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs targets_theta_deg".into()))?;

    // Compute everything first.
    let mut rows_out: Vec<SteerRow> = Vec::with_capacity(targets.len());
    let mut patterns: Vec<Option<ComplexPattern>> = Vec::with_capacity(targets.len());
    for &t in targets {
        if !net.grid().contains_direction(t, 0.0) {
            rows_out.push(SteerRow {
                target: t,
                outcome: Err("target outside grid".into()),
            });
            patterns.push(None);
            continue;
        }
        let target = SteeringTarget {
            beam_theta_deg: t,
            beam_phi_deg: 0.0,
            incident,
        };
        let book = steer(&net, &table, &target, &options)?;
        let loads = ris_core::codebook::realized_loads(&table, &book.states, &options)?;
        let full = scattered_pattern(&net, &loads, &incident)?;
        patterns.push(Some(maybe_resample(&full.pattern, config.export_step_deg)?));
        rows_out.push(SteerRow {
            target: t,
            outcome: Ok(book),
        });
    }
    let best_peak = rows_out
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok())
        .map(|b| b.achieved_target_magnitude)
        .fold(0.0, f64::max);

    ensure_out(out)?;
    let mut report = create(out, "report.csv")?;
    use std::io::Write;
    writeln!(
        report,
        "target_theta,achieved_theta,pointing_error,sll_db,peak_rel_db"
    )?;
    for row in &rows_out {
        match &row.outcome {
            Ok(book) => {
                let rel = if book.achieved_target_magnitude > 0.0 && best_peak > 0.0 {
                    20.0 * (book.achieved_target_magnitude / best_peak).log10()
                } else {
                    DB_FLOOR
                };
                writeln!(
                    report,
                    "{},{},{},{},{}",
                    row.target,
                    book.metrics.peak_theta_deg,
                    (book.metrics.peak_theta_deg - row.target).abs(),
                    book.metrics.sidelobe_level_db,
                    rel
                )?;
            }
            Err(reason) => {
                writeln!(report, "{},error,error,error,error # {}", row.target, reason)?;
            }
        }
    }
    drop(report);

    for (row, pattern) in rows_out.iter().zip(&patterns) {
        let (Ok(book), Some(pattern)) = (&row.outcome, pattern) else {
            continue;
        };
        let tag = theta_tag(row.target);
        write_pattern_csv(create(out, &format!("pattern_{tag}.csv"))?, pattern)?;
        ris_core::codebook::write_codebook_json(
            create(out, &format!("codebook_{tag}.json"))?,
            book,
        )?;
    }
    println!("wrote steering report for {} targets to {}", targets.len(), out.display());
    Ok(())
}

fn theta_tag(theta: f64) -> String {
    if theta < 0.0 {
        format!("m{:02}", (-theta).round() as i64)
    } else {
        format!("p{:02}", theta.round() as i64)
    }
}

// ── optimize-topology ───────────────────────────────────────────────────

pub fn optimize_topology(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let topo = config
        .topology
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs a topology section".into()))?;
    let ga = config
        .ga
        .as_ref()
        .map(|g| g.to_params(config.seed))
        .unwrap_or(GaParams {
            seed: config.seed,
            ..GaParams::default()
        });
    let incidence = topo.incidence();
    let feeding = topo.feeding_spec()?;
    let grid = AngleGrid::theta_sweep(-40.0, 40.0, 5.0, &[0.0])?;
    let objective = EntropyObjective::new(topo.objective_spec(), (0.0, 0.0), |f| {
        topo.network(f, &grid)
    })?;

    let result = optimize(&objective, &incidence, &feeding, topo.q, &ga)?;

    // Reflection phases of the winner at the observation direction.
    let net_center = topo.network(ris_core::reference::SUB6_FREQUENCY_HZ, &grid)?;
    let wave = ris_core::oracle::IncidentWave::new(0.0, 0.0, ris_core::reference::SUB6_FREQUENCY_HZ);
    let phases = reflection_phases(&net_center, &result.best, &wave, topo.observation_deg)?;

    // Entropy versus angle at the configured frequency list.
    let report_angles: Vec<(f64, f64)> = (0..17).map(|i| (-40.0 + 5.0 * i as f64, 0.0)).collect();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for &f in &topo.objective.frequencies_hz {
        let net = topo.network(f, &grid)?;
        let mut column = Vec::with_capacity(report_angles.len());
        for &angle in &report_angles {
            let h = match reflection_phases(&net, &result.best, &wave_at(f), angle) {
                Ok(set) => ris_core::entropy::entropy_bits(&set),
                Err(RisError::NullField { .. }) => 0.0,
                Err(e) => return Err(e),
            };
            column.push(h);
        }
        columns.push(column);
    }

    ensure_out(out)?;
    write_geometry_json(create(out, "best_geometry.json")?, &result.best)?;

    use std::io::Write;
    let mut history = create(out, "history.csv")?;
    writeln!(history, "generation,best,mean,feasible_fraction")?;
    for row in &result.history {
        writeln!(
            history,
            "{},{},{},{}",
            row.generation, row.best, row.mean, row.feasible_fraction
        )?;
    }
    drop(history);

    let mut entropy_csv = create(out, "entropy_vs_angle.csv")?;
    let header: Vec<String> = topo
        .objective
        .frequencies_hz
        .iter()
        .map(|f| format!("h_{:.0}mhz", f / 1e6))
        .collect();
    writeln!(entropy_csv, "theta_deg,{}", header.join(","))?;
    for (k, angle) in report_angles.iter().enumerate() {
        let values: Vec<String> = columns.iter().map(|c| c[k].to_string()).collect();
        writeln!(entropy_csv, "{},{}", angle.0, values.join(","))?;
    }
    drop(entropy_csv);

    let mut summary = create(out, "summary.json")?;
    let dense_mean: f64 =
        columns.iter().flatten().sum::<f64>() / (columns.len() * report_angles.len()) as f64;
    serde_json::to_writer_pretty(
        &mut summary,
        &serde_json::json!({
            "best_fitness_bits": result.best_fitness,
            "evaluations": result.evaluations,
            "phases_deg": phases.phases_deg(),
            "entropy_vs_angle_mean_bits": dense_mean,
        }),
    )
    .map_err(|e| RisError::Parse(format!("summary: {e}")))?;
    drop(summary);

    println!(
        "best fitness {:.4} bits after {} evaluations; outputs in {}",
        result.best_fitness,
        result.evaluations,
        out.display()
    );
    Ok(())
}

fn wave_at(f: f64) -> ris_core::oracle::IncidentWave {
    ris_core::oracle::IncidentWave::new(0.0, 0.0, f)
}

// ── psi ─────────────────────────────────────────────────────────────────

pub fn psi_command(
    circuit: &Path,
    cascade: Option<&Path>,
    start_hz: f64,
    stop_hz: f64,
    points: usize,
    out: &Path,
) -> Result<()> {
    let c1 = read_circuit_json(std::io::BufReader::new(fs::File::open(circuit)?))?;
    let sweep = FrequencySweep::new(start_hz, stop_hz, points)?;
    let rows = match cascade {
        Some(path) => {
            let c2 = read_circuit_json(std::io::BufReader::new(fs::File::open(path)?))?;
            cascade_isolation(&c1, &c2, &sweep)?
        }
        None => two_port_isolation(&c1, &sweep)?,
    };
    ensure_out(out)?;
    write_sweep_csv(create(out, "sweep.csv")?, &rows)?;
    println!("wrote {}-point sweep to {}", rows.len(), out.display());
    Ok(())
}

// ── subtract ────────────────────────────────────────────────────────────

pub fn subtract_command(total: &Path, env: &Path, out: &Path) -> Result<()> {
    let total = read_trace_csv(std::io::BufReader::new(fs::File::open(total)?))?;
    let env = read_trace_csv(std::io::BufReader::new(fs::File::open(env)?))?;
    let scat = background_subtract(&total, &env)?;
    ensure_out(out)?;
    write_trace_csv(create(out, "scat.csv")?, &scat)?;
    println!("wrote background-subtracted trace to {}", out.display());
    Ok(())
}

// ── independence ────────────────────────────────────────────────────────

pub fn independence_command(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let spec = config
        .independence
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs an independence section".into()))?;
    let array = config
        .array
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs an array section".into()))?;
    let base = network_from(config)?;
    let incident = config
        .incident
        .as_ref()
        .ok_or_else(|| RisError::InvalidInput("config needs an incident section".into()))?
        .to_wave(array.frequency_hz);
    let loads = vec![LoadModel::OneBitShifter { state: 0 }; base.num_ports()];

    let n_states = 1usize << spec.sub6_state_bits;
    let reference_db =
        state_pattern_db(&base, config, array, &loads, &incident, 0, n_states, spec.epsilon)?;
    let mut deviations = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let db =
            state_pattern_db(&base, config, array, &loads, &incident, s, n_states, spec.epsilon)?;
        let deviation = db
            .iter()
            .zip(&reference_db)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        deviations.push(deviation);
    }

    ensure_out(out)?;
    use std::io::Write;
    let mut csv = create(out, "independence.csv")?;
    writeln!(csv, "sub6_state,max_deviation_db")?;
    for (s, d) in deviations.iter().enumerate() {
        writeln!(csv, "{s},{d}")?;
    }
    drop(csv);
    let max = deviations.iter().copied().fold(0.0, f64::max);
    println!(
        "max high-band pattern deviation across {} low-band states: {} dB",
        n_states, max
    );
    Ok(())
}

/// High-band pattern (floored dB, common normalization) under one
/// low-band state. A nonzero epsilon detunes the port self impedances in
/// proportion to the state index, standing in for parasitic cross-band
/// coupling.
fn state_pattern_db(
    base: &PortNetwork,
    config: &ExperimentConfig,
    array: &crate::config::ArrayConfig,
    loads: &[LoadModel],
    incident: &ris_core::oracle::IncidentWave,
    state: usize,
    n_states: usize,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let net = if epsilon == 0.0 || state == 0 {
        base.clone()
    } else {
        let mut z = base.z().clone();
        let detune = Complex64::new(array.self_impedance.0, array.self_impedance.1)
            * epsilon
            * (state as f64 / (n_states as f64 - 1.0));
        for i in 0..z.n() {
            z[(i, i)] += detune;
        }
        let rebuilt = PortNetwork::from_parts(
            z,
            base.port_positions().to_vec(),
            base.frequency_hz(),
            base.element_exponent_q(),
            base.grid(),
        )?;
        if config.structural_oc {
            let oc = rebuilt.structural_oc_pattern(incident, config.structural_z0_ohm)?;
            rebuilt.with_oc_pattern(oc)?
        } else {
            rebuilt
        }
    };
    let result = scattered_pattern(&net, loads, incident)?;
    pattern_db(&result.pattern)
}

// ── metrics ─────────────────────────────────────────────────────────────

pub fn metrics_command(pattern: &Path, cut_phi: f64, out: &Path) -> Result<()> {
    let p = ris_core::field::read_pattern_csv(std::io::BufReader::new(fs::File::open(pattern)?))?;
    let metrics = pattern_metrics(&p, cut_phi)?;
    ensure_out(out)?;
    let mut w = create(out, "metrics.json")?;
    serde_json::to_writer_pretty(&mut w, &metrics)
        .map_err(|e| RisError::Parse(format!("metrics: {e}")))?;
    println!(
        "peak {} deg, sll {:.2} dB, hpbw {:.2} deg",
        metrics.peak_theta_deg, metrics.sidelobe_level_db, metrics.half_power_beamwidth_deg
    );
    Ok(())
}
