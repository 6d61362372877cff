//! Subcommand implementations. Every report is deterministic JSON (no
//! timestamps) written atomically; tables additionally go out as CSV.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::Serialize;
use serde_json::json;

use esrsim::chain::{addressability_report, ChainLayout, LineId};
use esrsim::ensemble::Ensemble;
use esrsim::lang::{emit_steps, MatchPattern, PiAngle, Program};
use esrsim::oracle;
use esrsim::protocols::{
    self, build_periodic_state, build_shifted_periodic_state, DescentStrategy, RegisterPurity,
};
use esrsim::report::{self, SignalReportData};
use esrsim::state::{pulse_count, ExecStep};
use esrsim::verify;

use crate::config::RunConfig;
use crate::CliError;

type C64 = Complex<f64>;

/// Write text atomically: temp file in the target directory, then rename.
fn write_atomic(path: &Path, text: &str) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    std::fs::write(&tmp, text)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

fn emit_report<T: Serialize>(out: Option<&Path>, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| CliError::Runtime(format!("serialize report: {e}")))?;
    text.push('\n');
    match out {
        Some(path) => write_atomic(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn build_layout(config: &RunConfig) -> Result<ChainLayout, CliError> {
    config.layout.build().map_err(CliError::Config)
}

fn thermal_ensemble(config: &RunConfig, layout: &ChainLayout) -> Result<Ensemble<f64>, CliError> {
    let thermal = config.thermal.build(layout).map_err(CliError::Config)?;
    Ensemble::thermal(layout, &thermal, config.mode.build(), 0.0)
        .map_err(|e| CliError::Config(e.to_string()))
}

fn meta(config: &RunConfig, seed: Option<u64>) -> serde_json::Value {
    json!({
        "tool": "esrsim",
        "version": esrsim::VERSION,
        "seed": seed,
        "config": config,
    })
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct Snapshot {
    after_step: usize,
    gradients_applied: usize,
    lines: report::LineTable,
}

pub fn cmd_run(
    config: &RunConfig,
    program_path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let source = std::fs::read_to_string(program_path)
        .map_err(|e| CliError::Usage(format!("cannot read program {}: {e}", program_path.display())))?;
    let program = Program::parse(&source).map_err(|e| {
        let mut msg = format!("program {}:\n", program_path.display());
        if let Some(diags) = e.parse_errors() {
            for d in diags {
                msg.push_str(&format!("  {d}\n"));
            }
        }
        CliError::Usage(msg)
    })?;

    let layout = build_layout(config)?;
    let steps = program
        .expand(&layout)
        .map_err(|e| CliError::Usage(format!("program {}: {e}", program_path.display())))?;
    let mut ensemble = thermal_ensemble(config, &layout)?;

    // per-line signals after each gradient-closed block
    let mut snapshots = Vec::new();
    let mut gradients = 0usize;
    for (i, step) in steps.iter().enumerate() {
        ensemble
            .run_steps(std::slice::from_ref(step))
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        if let ExecStep::Gradient(_) = step {
            gradients += 1;
            if gradients.is_multiple_of(2) {
                snapshots.push(Snapshot {
                    after_step: i + 1,
                    gradients_applied: gradients,
                    lines: report::line_table(&ensemble.line_report()),
                });
            }
        }
    }
    let signal = ensemble.signal_report(pulse_count(&steps));

    let report = json!({
        "meta": meta(config, seed),
        "program": {
            "path": program_path.display().to_string(),
            "expanded": emit_steps(&steps).lines().collect::<Vec<_>>(),
        },
        "snapshots": snapshots,
        "final": SignalReportData::from_report(&signal),
    });
    emit_report(out, &report)
}

// ---------------------------------------------------------------------------
// spectrum
// ---------------------------------------------------------------------------

pub fn cmd_spectrum(config: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let layout = build_layout(config)?;
    let addr = addressability_report(&layout);
    let csv = report::spectrum_csv(&layout, &addr);
    let report = json!({
        "meta": meta(config, None),
        "addressability": addr,
    });
    emit_report(out, &report)?;
    if let Some(path) = out {
        let csv_path: PathBuf = path.with_extension("csv");
        write_atomic(&csv_path, &csv)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// shor
// ---------------------------------------------------------------------------

pub enum ShorInput {
    Periodic { w_bits: usize, period: u32 },
    Shifted { x: u64, modulus: u64, shift: u64, w_bits: usize },
}

fn strategy_list(flag: Option<&str>) -> Result<Vec<DescentStrategy>, CliError> {
    match flag {
        None | Some("all") => Ok(vec![
            DescentStrategy::ExhaustiveScan,
            DescentStrategy::UnwindEach,
            DescentStrategy::Cumulative,
        ]),
        Some("exhaustive_scan") => Ok(vec![DescentStrategy::ExhaustiveScan]),
        Some("unwind_each") => Ok(vec![DescentStrategy::UnwindEach]),
        Some("cumulative") => Ok(vec![DescentStrategy::Cumulative]),
        Some(other) => Err(CliError::Usage(format!("unknown strategy `{other}`"))),
    }
}

pub fn cmd_shor(
    config: &RunConfig,
    input: ShorInput,
    strategy: Option<&str>,
    purity: RegisterPurity,
    out: Option<&Path>,
) -> Result<(), CliError> {
    match input {
        ShorInput::Periodic { w_bits, period } => {
            let layout_cfg = config.layout.resized(w_bits + 1);
            let layout = layout_cfg.build().map_err(CliError::Config)?;
            let amps: BTreeMap<u32, C64> = build_periodic_state(w_bits, period)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            let r = protocols::periodic_term_count(w_bits, period);
            let threshold = config
                .thresholds
                .element_weight
                .unwrap_or(0.5 / r as f64);
            let strategies = strategy_list(strategy)?;

            let mut outcomes = Vec::new();
            for strat in strategies {
                let mut ensemble = protocols::load_register(&layout, &amps, true, purity)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                let (outcome, trace) =
                    protocols::find_smallest_element(&mut ensemble, strat, threshold)
                        .map_err(|e| CliError::Runtime(e.to_string()))?;
                outcomes.push(json!({
                    "strategy": strat,
                    "outcome": outcome,
                    "pulse_count": trace.pulse_count,
                    "interrogations": trace.steps,
                    "executed_program": trace.executed_program.lines().collect::<Vec<_>>(),
                }));
            }
            let report = json!({
                "meta": meta(config, None),
                "state": {
                    "kind": "periodic",
                    "w_bits": w_bits,
                    "period": period,
                    "terms": r,
                    "per_element_weight": 1.0 / r as f64,
                    "purity": purity,
                },
                "threshold": threshold,
                "strategies": outcomes,
            });
            emit_report(out, &report)
        }
        ShorInput::Shifted { x, modulus, shift, w_bits } => {
            let (amps, total_bits): (BTreeMap<u32, C64>, usize) =
                build_shifted_periodic_state(w_bits, x, modulus, shift)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
            let norm: f64 = amps.values().map(|a| a.norm_sqr()).sum();
            let report = json!({
                "meta": meta(config, None),
                "state": {
                    "kind": "shifted_periodic",
                    "w_bits": w_bits,
                    "x": x,
                    "modulus": modulus,
                    "shift": shift,
                    "total_register_bits": total_bits,
                    "components": amps.len(),
                    "norm": norm,
                },
            });
            emit_report(out, &report)
        }
    }
}

// ---------------------------------------------------------------------------
// grover
// ---------------------------------------------------------------------------

pub fn cmd_grover(
    config: &RunConfig,
    answer: &str,
    weight: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if !(weight > 0.5 && weight <= 1.0) {
        return Err(CliError::Usage(format!(
            "dominant weight must be in (0.5, 1], got {weight}"
        )));
    }
    let pattern: MatchPattern = answer
        .parse()
        .map_err(|e: String| CliError::Usage(e))?;
    let n = pattern.len();
    let layout_cfg = config.layout.resized(n + 1);
    let layout = layout_cfg.build().map_err(CliError::Config)?;

    // dominant answer plus a uniform remainder
    let mut amps: BTreeMap<u32, C64> = BTreeMap::new();
    let answer_reg = pattern.register_index();
    let others = (1u64 << n) - 1;
    let rest = if weight < 1.0 {
        ((1.0 - weight) / others as f64).sqrt()
    } else {
        0.0
    };
    for reg in 0..(1u32 << n) {
        let a = if reg == answer_reg { weight.sqrt() } else { rest };
        if a != 0.0 {
            amps.insert(reg, C64::new(a, 0.0));
        }
    }

    let mut ensemble = protocols::load_register(&layout, &amps, true, RegisterPurity::Pure)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let readout = protocols::grover_readout(&mut ensemble, config.thresholds.dominance);
    let probe_input = protocols::load_register(&layout, &amps, true, RegisterPurity::Pure)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let probe = protocols::small_angle_probe(&probe_input, PiAngle::new(1, 20));

    let readout_json = match &readout {
        Ok((bits, trace)) => json!({
            "recovered": bits.to_string(),
            "matches_answer": bits.to_string() == answer,
            "pulse_count": trace.pulse_count,
            "pulse_constant": trace.pulse_count as f64 / (n * n) as f64,
            "interrogations": trace.steps,
            "executed_program": trace.executed_program.lines().collect::<Vec<_>>(),
        }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let probe_json = match &probe {
        Ok(p) => {
            let decoded: String = p.decoded.iter().map(|&b| if b { '1' } else { '0' }).collect();
            json!({
                "decoded": decoded,
                "strongest_lines": p
                    .strongest
                    .iter()
                    .map(|(spin, lines)| {
                        (spin.to_string(), lines.iter().map(LineId::to_string).collect::<Vec<_>>())
                    })
                    .collect::<BTreeMap<String, Vec<String>>>(),
                "lines": report::line_table(&p.lines),
            })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };

    let report = json!({
        "meta": meta(config, None),
        "state": { "answer": answer, "weight": weight, "register_bits": n },
        "readout": readout_json,
        "probe": probe_json,
    });
    emit_report(out, &report)?;

    match readout {
        Ok(_) => Ok(()),
        // ambiguity is an in-band result, not a process failure
        Err(esrsim::Error::Ambiguity { .. }) => Ok(()),
        Err(e) => Err(CliError::Runtime(e.to_string())),
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn cmd_verify(
    config: &RunConfig,
    seed: u64,
    self_check: bool,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if self_check {
        // prove the comparison harness flags an injected deviation
        let layout = build_layout(config)?;
        let thermal = config.thermal.build(&layout).map_err(CliError::Config)?;
        let steps = Program::parse("turnon\ngrad +\npi 1 0\ngrad +")
            .unwrap()
            .expand(&layout)
            .unwrap();
        let reference: BTreeMap<LineId, C64> =
            oracle::density_reference(&layout, &thermal, &steps, 16)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
        let mut perturbed = reference.clone();
        let key = *perturbed.keys().next().unwrap();
        perturbed.insert(key, perturbed[&key] + C64::new(1e-6, 0.0));
        let result = oracle::assert_equiv(&reference, &perturbed, 1e-10);
        let report = json!({
            "meta": meta(config, Some(seed)),
            "self_check": {
                "injected_deviation": 1e-6,
                "detected": !result.pass,
                "max_deviation": result.max_deviation,
                "worst_line": result.worst_line.map(|l| l.to_string()),
            },
        });
        emit_report(out, &report)?;
        return if result.pass {
            Err(CliError::Verification(
                "self-check failed: injected deviation not detected".into(),
            ))
        } else {
            eprintln!("self-check ok: injected deviation detected");
            Ok(())
        };
    }

    let verify_report = verify::run_all(seed);
    for suite in &verify_report.suites {
        eprintln!(
            "suite {:>32}: {} cases, {} failures",
            suite.name,
            suite.cases,
            suite.failures.len()
        );
    }
    let pass = verify_report.pass;
    let report = json!({
        "meta": meta(config, Some(seed)),
        "verify": verify_report,
    });
    emit_report(out, &report)?;
    if let Some(path) = out {
        // basis mapping table of the preparation sequence, exported alongside
        let layout = ChainLayout::default_layout(6).map_err(|e| CliError::Runtime(e.to_string()))?;
        let pulses: Vec<esrsim::state::Pulse> = esrsim::lang::prepare_steps(&layout)
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .iter()
            .filter_map(|s| match s {
                ExecStep::Pulse(p) => Some(*p),
                _ => None,
            })
            .collect();
        let table: oracle::TruthTable<f64> = oracle::truth_table(&pulses, &layout)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        write_atomic(&path.with_extension("prepare_truth.csv"), &table.to_csv())?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Verification("verification suites failed".into()))
    }
}
