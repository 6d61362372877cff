//! End-to-end measurement procedures: the preparation pipeline, reversible
//! pattern interrogation, smallest-element readout, dominant-answer readout,
//! the small-angle probe, and the register-state builders they run on.
//!
//! All signal ratios are taken against the fixed single-molecule reference
//! (magnitude 1/2 of one fully coherent molecule). Pattern interrogation uses
//! the flip-conjugated zeros interrogation for prefixes; full-register
//! patterns use the preparation sequence instead, which conjugates the signal
//! for exactly one register state and therefore has no false-match class.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_integer::Integer;
use serde::Serialize;

use crate::chain::{BasisIndex, ChainLayout, CondChar, CondPattern, LineId};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::lang::{emit_steps, match_steps, prepare_steps, zmatch_steps, MatchPattern, PiAngle};
use crate::scalar::Real;
use crate::state::{pulse_count, reverse_steps, ExecStep, GradedState, GradientStep, Pulse};

/// How the smallest-element search walks the register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentStrategy {
    /// Reverse every interrogation before the next one.
    UnwindEach,
    /// Leave the state evolved; reverse only the failing interrogation.
    Cumulative,
    /// Full-pattern match of every candidate value in ascending order.
    ExhaustiveScan,
}

/// One recorded interrogation.
#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub label: String,
    pub line: String,
    pub magnitude: f64,
    pub ratio: f64,
    pub decision: String,
    pub pulses: usize,
}

/// Append-only record of a readout run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ReadoutTrace {
    pub steps: Vec<TraceStep>,
    pub pulse_count: usize,
    /// Canonical text of every pulse actually executed, block by block.
    pub executed_program: String,
}

impl ReadoutTrace {
    fn record(&mut self, label: impl Into<String>, line: &LineId, magnitude: f64, decision: impl Into<String>, pulses: usize) {
        self.steps.push(TraceStep {
            label: label.into(),
            line: line.to_string(),
            magnitude,
            ratio: magnitude / 0.5,
            decision: decision.into(),
            pulses,
        });
        self.pulse_count += pulses;
    }

    fn log_steps(&mut self, steps: &[ExecStep]) {
        self.executed_program.push_str(&emit_steps(steps));
    }
}

/// Outcome of the smallest-element search.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SmallestOutcome {
    Found { value: u32, signal_ratio: f64 },
    NotFound,
    /// The descent produced a candidate the final exact interrogation
    /// rejected: a characterized false match.
    FalseMatch { candidate: u32, measured_ratio: f64 },
}

fn unit_ref<F: Real>() -> F {
    Ensemble::<F>::unit_reference()
}

fn signal_line(first_bit: bool) -> LineId {
    LineId::new(
        1,
        CondPattern::Edge(if first_bit { CondChar::One } else { CondChar::Zero }),
    )
}

fn grad_sandwich(inner: Vec<ExecStep>) -> Vec<ExecStep> {
    let mut steps = Vec::with_capacity(inner.len() + 2);
    steps.push(ExecStep::Gradient(GradientStep::plus()));
    steps.extend(inner);
    steps.push(ExecStep::Gradient(GradientStep::plus()));
    steps
}

/// Exact full-register interrogation: conjugate the zeros of `pattern` away,
/// run the preparation sequence, restore. Conjugates the signal spin iff the
/// register equals `pattern` exactly.
pub fn exact_match_steps(pattern: &MatchPattern, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    let n = layout.register_size();
    if pattern.len() != n {
        return Err(Error::MacroArg(format!(
            "exact match needs a full-register pattern of {n} bits, got {}",
            pattern.len()
        )));
    }
    let flips: Vec<usize> = pattern
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| i + 2)
        .collect();
    let mut steps = Vec::new();
    for &spin in &flips {
        steps.push(ExecStep::Pulse(Pulse::flip(spin, layout.total_spins())));
    }
    steps.extend(prepare_steps(layout)?);
    for &spin in flips.iter().rev() {
        steps.push(ExecStep::Pulse(Pulse::flip(spin, layout.total_spins())));
    }
    Ok(steps)
}

/// Whether `measure_pattern` runs the preparation-based exact block: full
/// register patterns on chains long enough to carry the preparation ladder.
/// A one-spin register needs no ladder; its depth-1 interrogation is already
/// exact.
fn uses_exact_block(pattern: &MatchPattern, layout: &ChainLayout) -> bool {
    pattern.len() == layout.register_size() && layout.register_size() >= 2
}

/// Line on which a true match of `pattern` refocuses.
pub fn match_read_line(pattern: &MatchPattern, layout: &ChainLayout) -> LineId {
    if uses_exact_block(pattern, layout) {
        // the preparation image register starts with 1, so after restoring the
        // pattern flips the echo sits on the opposite of the leading bit
        signal_line(!pattern.leading_bit())
    } else {
        signal_line(pattern.leading_bit())
    }
}

/// Echo report of the preparation pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineReport {
    /// Line carrying the computational echo at read time.
    pub echo_line: String,
    /// Complex ensemble sum on the echo line (polarization-signed).
    pub echo_re: f64,
    pub echo_im: f64,
    /// Weighted sum of per-molecule echo magnitudes on the echo line.
    pub coherent_weight: f64,
    /// `(initial basis, weight, echo magnitude)` per molecule.
    pub per_molecule: Vec<(BasisIndex, f64, f64)>,
    pub reference: f64,
    pub pulse_count: usize,
}

/// Run the preparation stage on a freshly built ensemble: turn the signal on,
/// sandwich the preparation sequence between gradients, read the echo table,
/// then reverse the preparation pulses so the computational coherence sits on
/// the all-zeros register again.
pub fn prepare_pipeline<F: Real>(ensemble: &mut Ensemble<F>) -> Result<PipelineReport> {
    let layout = ensemble.layout().clone();
    let prep = prepare_steps(&layout)?;
    let mut forward = vec![ExecStep::Pulse(Pulse::pi_half(
        1,
        CondPattern::Edge(CondChar::Zero),
    ))];
    forward.extend(grad_sandwich(prep.clone()));
    ensemble.run_steps(&forward)?;

    // after preparation the computational pair sits on register 1..10, whose
    // leading bit is 1
    let echo_line = signal_line(true);
    let echo = ensemble.line_amplitude(&echo_line);
    let coherent_weight = ensemble.coherent_line_weight(&echo_line).to_f64();
    let per_molecule: Vec<(BasisIndex, f64, f64)> = ensemble
        .molecules()
        .iter()
        .zip(ensemble.per_molecule_line(&echo_line))
        .map(|(m, amp)| (m.initial, m.weight.to_f64(), amp.norm().to_f64()))
        .collect();

    let unwind = reverse_steps(&prep);
    ensemble.run_steps(&unwind)?;

    Ok(PipelineReport {
        echo_line: echo_line.to_string(),
        echo_re: echo.re.to_f64(),
        echo_im: echo.im.to_f64(),
        coherent_weight,
        per_molecule,
        reference: unit_ref::<F>().to_f64(),
        pulse_count: pulse_count(&forward) + pulse_count(&unwind),
    })
}

/// Result of one pattern interrogation.
#[derive(Debug, Clone)]
pub struct MeasureOutcome<F: Real> {
    pub signal: Complex<F>,
    pub read_line: LineId,
    pub ratio: f64,
    pub pulses: usize,
    /// True when the full-register (preparation-based) interrogation ran.
    pub exact: bool,
}

/// Gradient-sandwiched pattern interrogation read at the true-match line;
/// with `unwind` the whole block is reversed afterwards, restoring the state.
pub fn measure_pattern<F: Real>(
    ensemble: &mut Ensemble<F>,
    pattern: &MatchPattern,
    unwind: bool,
) -> Result<MeasureOutcome<F>> {
    let layout = ensemble.layout().clone();
    let n = layout.register_size();
    if pattern.len() > n {
        return Err(Error::PatternTooLong {
            pattern: pattern.to_string(),
            register: n,
        });
    }
    let exact = uses_exact_block(pattern, &layout);
    let inner = if exact {
        exact_match_steps(pattern, &layout)?
    } else {
        match_steps(pattern, &layout)?
    };
    let block = grad_sandwich(inner);
    ensemble.run_steps(&block)?;
    let read_line = match_read_line(pattern, &layout);
    let signal = ensemble.line_amplitude(&read_line);
    let mut pulses = pulse_count(&block);
    if unwind {
        let back = reverse_steps(&block);
        ensemble.run_steps(&back)?;
        pulses *= 2;
    }
    Ok(MeasureOutcome {
        signal,
        read_line,
        ratio: signal.norm().to_f64() / unit_ref::<F>().to_f64(),
        pulses,
        exact,
    })
}

/// Shared prefix-descent machinery. Runs the depth-`k` zeros interrogation in
/// a frame where every confirmed 1 bit has been flipped to 0, so every
/// decision reads line (1, "0").
struct Descent<'a, F: Real> {
    ensemble: &'a mut Ensemble<F>,
    layout: ChainLayout,
    trace: ReadoutTrace,
    /// Spins currently flipped to zero the confirmed prefix.
    frame: Vec<usize>,
}

impl<'a, F: Real> Descent<'a, F> {
    fn new(ensemble: &'a mut Ensemble<F>) -> Descent<'a, F> {
        let layout = ensemble.layout().clone();
        Descent {
            ensemble,
            layout,
            trace: ReadoutTrace::default(),
            frame: Vec::new(),
        }
    }

    fn run_logged(&mut self, steps: &[ExecStep]) -> Result<usize> {
        self.ensemble.run_steps(steps)?;
        self.trace.log_steps(steps);
        Ok(pulse_count(steps))
    }

    /// Zeros interrogation at depth `k` in the current frame; returns the
    /// line-(1,"0") ratio. `unwind_on_success` reverses the block even when
    /// the caller will keep descending.
    fn probe_zeros(&mut self, k: usize, unwind: bool) -> Result<(f64, Vec<ExecStep>)> {
        let block = grad_sandwich(zmatch_steps(k, &self.layout)?);
        let mut pulses = self.run_logged(&block)?;
        let line = signal_line(false);
        let magnitude = self.ensemble.line_amplitude(&line).norm().to_f64();
        if unwind {
            let back = reverse_steps(&block);
            pulses += self.run_logged(&back)?;
        }
        let ratio = magnitude / 0.5;
        self.trace.record(
            format!("zmatch {k}{}", if unwind { " (unwound)" } else { "" }),
            &line,
            magnitude,
            String::new(),
            pulses,
        );
        Ok((ratio, block))
    }

    fn flip_frame(&mut self, spin: usize) -> Result<()> {
        let step = [ExecStep::Pulse(Pulse::flip(spin, self.layout.total_spins()))];
        let pulses = self.run_logged(&step)?;
        self.trace.record(
            format!("frame flip spin {spin}"),
            &signal_line(false),
            0.0,
            "zero the confirmed bit",
            pulses,
        );
        self.frame.push(spin);
        Ok(())
    }

    fn unframe(&mut self) -> Result<()> {
        let spins: Vec<usize> = self.frame.drain(..).rev().collect();
        for spin in spins {
            let step = [ExecStep::Pulse(Pulse::flip(spin, self.layout.total_spins()))];
            let pulses = self.run_logged(&step)?;
            self.trace.record(
                format!("frame restore spin {spin}"),
                &signal_line(false),
                0.0,
                "",
                pulses,
            );
        }
        Ok(())
    }

    fn decide(&mut self, note: impl Into<String>) {
        if let Some(last) = self.trace.steps.last_mut() {
            last.decision = note.into();
        }
    }
}

/// Measure the trivial all-zeros contribution with the exact interrogation.
fn zero_reference_ratio<F: Real>(
    ensemble: &mut Ensemble<F>,
    trace: &mut ReadoutTrace,
) -> Result<f64> {
    let n = ensemble.layout().register_size();
    let zeros = MatchPattern::from_value(0, n)?;
    let outcome = measure_pattern(ensemble, &zeros, true)?;
    trace.record(
        "exact all-zeros reference (unwound)",
        &outcome.read_line,
        outcome.signal.norm().to_f64(),
        format!("trivial-element ratio {:.6}", outcome.ratio),
        outcome.pulses,
    );
    Ok(outcome.ratio)
}

/// Final full-register check of a descent candidate.
fn verify_candidate<F: Real>(
    ensemble: &mut Ensemble<F>,
    value: u32,
    threshold: f64,
    trace: &mut ReadoutTrace,
) -> Result<SmallestOutcome> {
    let n = ensemble.layout().register_size();
    let pattern = MatchPattern::from_value(value, n)?;
    let outcome = measure_pattern(ensemble, &pattern, true)?;
    let verdict = if outcome.ratio >= threshold {
        SmallestOutcome::Found {
            value,
            signal_ratio: outcome.ratio,
        }
    } else {
        SmallestOutcome::FalseMatch {
            candidate: value,
            measured_ratio: outcome.ratio,
        }
    };
    trace.record(
        format!("exact verify {pattern} (unwound)"),
        &outcome.read_line,
        outcome.signal.norm().to_f64(),
        format!("{verdict:?}"),
        outcome.pulses,
    );
    Ok(verdict)
}

/// Search for the smallest register value with squared weight above
/// `threshold`, excluding the trivial all-zeros value.
///
/// `UnwindEach` and `Cumulative` walk the register bit by bit with the zeros
/// interrogation; `ExhaustiveScan` tests every value ascending with the exact
/// interrogation and cannot be fooled by false matches.
pub fn find_smallest_element<F: Real>(
    ensemble: &mut Ensemble<F>,
    strategy: DescentStrategy,
    threshold: f64,
) -> Result<(SmallestOutcome, ReadoutTrace)> {
    assert!(threshold > 0.0 && threshold < 1.0, "threshold in (0,1)");
    match strategy {
        DescentStrategy::ExhaustiveScan => exhaustive_scan(ensemble, threshold),
        DescentStrategy::UnwindEach => prefix_descent(ensemble, threshold, true),
        DescentStrategy::Cumulative => prefix_descent(ensemble, threshold, false),
    }
}

fn exhaustive_scan<F: Real>(
    ensemble: &mut Ensemble<F>,
    threshold: f64,
) -> Result<(SmallestOutcome, ReadoutTrace)> {
    let mut trace = ReadoutTrace::default();
    let n = ensemble.layout().register_size();
    for value in 1..(1u32 << n) {
        let pattern = MatchPattern::from_value(value, n)?;
        let outcome = measure_pattern(ensemble, &pattern, true)?;
        let hit = outcome.ratio >= threshold;
        trace.record(
            format!("exact scan {pattern} (unwound)"),
            &outcome.read_line,
            outcome.signal.norm().to_f64(),
            if hit { "hit" } else { "miss" },
            outcome.pulses,
        );
        if hit {
            return Ok((
                SmallestOutcome::Found {
                    value,
                    signal_ratio: outcome.ratio,
                },
                trace,
            ));
        }
    }
    Ok((SmallestOutcome::NotFound, trace))
}

fn prefix_descent<F: Real>(
    ensemble: &mut Ensemble<F>,
    threshold: f64,
    unwind_each: bool,
) -> Result<(SmallestOutcome, ReadoutTrace)> {
    let mut trace = ReadoutTrace::default();
    let zero_ratio = zero_reference_ratio(ensemble, &mut trace)?;

    // nothing beyond the trivial element: stop before walking garbage
    let total_coherent = (ensemble.coherent_line_weight(&signal_line(false))
        + ensemble.coherent_line_weight(&signal_line(true)))
    .to_f64()
        / 0.5;
    if total_coherent - zero_ratio < threshold {
        trace.record(
            "non-trivial weight check",
            &signal_line(false),
            total_coherent * 0.5,
            "below threshold, nothing to find",
            0,
        );
        return Ok((SmallestOutcome::NotFound, trace));
    }

    let n = ensemble.layout().register_size();
    let mut descent = Descent::new(ensemble);
    descent.trace = std::mem::take(&mut trace);
    let mut bits: Vec<bool> = Vec::with_capacity(n);

    for k in 1..=n {
        let (ratio, block) = descent.probe_zeros(k, unwind_each)?;
        // while the confirmed prefix is all zeros, the trivial element itself
        // conjugates at every depth and its contribution must be discounted
        let all_zero_prefix = bits.iter().all(|&b| !b);
        let decision_value = if all_zero_prefix { ratio - zero_ratio } else { ratio };
        if decision_value >= threshold {
            bits.push(false);
            descent.decide(format!("bit {k} = 0 (value {decision_value:.6})"));
        } else {
            bits.push(true);
            descent.decide(format!("bit {k} = 1 (value {decision_value:.6})"));
            if !unwind_each {
                // recover the state from before the failing interrogation
                let back = reverse_steps(&block);
                let pulses = descent.run_logged(&back)?;
                descent.trace.record(
                    format!("reverse failed zmatch {k}"),
                    &signal_line(false),
                    0.0,
                    "recover the pre-interrogation state",
                    pulses,
                );
            }
            descent.flip_frame(k + 1)?;
        }
        if k == 1 && !unwind_each {
            // cumulative walk: once the leading bit is framed to zero, quieten
            // whatever remains on the (1,"1") branch before descending further
            let kill = [ExecStep::Pulse(Pulse::pi_half(
                1,
                CondPattern::Edge(CondChar::One),
            ))];
            let pulses = descent.run_logged(&kill)?;
            descent.trace.record(
                "kill (1,\"1\") branch",
                &signal_line(true),
                descent
                    .ensemble
                    .line_amplitude(&signal_line(true))
                    .norm()
                    .to_f64(),
                "cumulative mode",
                pulses,
            );
        }
    }
    descent.unframe()?;
    trace = std::mem::take(&mut descent.trace);

    let value = bits
        .iter()
        .enumerate()
        .fold(0u32, |acc, (i, &b)| acc | ((b as u32) << (n - 1 - i)));
    if value == 0 {
        // non-trivial weight exists (checked upfront) yet every level kept
        // the zeros branch alive: the walk was carried by false matches and
        // ends at the excluded trivial pattern
        trace.steps.push(TraceStep {
            label: "descent terminated at the excluded trivial pattern".into(),
            line: signal_line(false).to_string(),
            magnitude: 0.0,
            ratio: 0.0,
            decision: "false matches kept every zeros test alive".into(),
            pulses: 0,
        });
        return Ok((
            SmallestOutcome::FalseMatch {
                candidate: 0,
                measured_ratio: 0.0,
            },
            trace,
        ));
    }
    let verdict = verify_candidate(ensemble, value, threshold, &mut trace)?;
    Ok((verdict, trace))
}

/// Bit-descent readout of a dominant register state. Every interrogation is
/// unwound; the recovered pattern is confirmed with the exact full-register
/// interrogation at the end.
pub fn grover_readout<F: Real>(
    ensemble: &mut Ensemble<F>,
    dominance: f64,
) -> Result<(MatchPattern, ReadoutTrace)> {
    assert!(dominance > 0.5 && dominance <= 1.0, "dominance in (0.5, 1]");
    let n = ensemble.layout().register_size();
    let mut descent = Descent::new(ensemble);

    // leading digit from the bare line pair: the dominant component puts its
    // whole weight on one of the two signal lines
    let m0 = descent.ensemble.line_amplitude(&signal_line(false)).norm().to_f64();
    let m1 = descent.ensemble.line_amplitude(&signal_line(true)).norm().to_f64();
    let (lead, strong, weak) = if m1 > m0 { (true, m1, m0) } else { (false, m0, m1) };
    descent.trace.record(
        "leading digit from line pair",
        &signal_line(lead),
        strong,
        format!("bit 1 = {}", lead as u8),
        0,
    );
    if strong / 0.5 < dominance {
        return Err(Error::Ambiguity {
            low: weak / 0.5,
            high: strong / 0.5,
            threshold: dominance,
        });
    }
    let mut bits = vec![lead];
    if lead {
        descent.flip_frame(2)?;
    }

    for k in 2..=n {
        let (ratio, _) = descent.probe_zeros(k, true)?;
        if ratio >= dominance {
            bits.push(false);
            descent.decide(format!("bit {k} = 0 (ratio {ratio:.6})"));
        } else {
            bits.push(true);
            descent.decide(format!("bit {k} = 1 (ratio {ratio:.6})"));
            descent.flip_frame(k + 1)?;
        }
    }
    descent.unframe()?;
    let mut trace = std::mem::take(&mut descent.trace);

    let answer = MatchPattern::from_bits(bits)?;
    let outcome = measure_pattern(ensemble, &answer, true)?;
    trace.record(
        format!("exact verify {answer} (unwound)"),
        &outcome.read_line,
        outcome.signal.norm().to_f64(),
        format!("ratio {:.6}", outcome.ratio),
        outcome.pulses,
    );
    if outcome.ratio < dominance {
        return Err(Error::Ambiguity {
            low: outcome.ratio,
            high: outcome.ratio,
            threshold: dominance,
        });
    }
    Ok((answer, trace))
}

/// Decoded line table of the small-angle probe.
#[derive(Debug, Clone)]
pub struct ProbeReport<F: Real> {
    pub lines: BTreeMap<LineId, Complex<F>>,
    /// Strongest line per spin, with the signal-side character of spin 2
    /// reported as observed (both left values light up when the signal spin
    /// is coherent).
    pub strongest: Vec<(usize, Vec<LineId>)>,
    /// Register bits reconstructed from the neighbour characters.
    pub decoded: Vec<bool>,
}

/// Apply one small-angle pulse to every spin of a copy of the ensemble, read
/// the full line table and reconstruct the dominant register pattern from the
/// strongest line of each spin.
pub fn small_angle_probe<F: Real>(
    ensemble: &Ensemble<F>,
    angle: PiAngle,
) -> Result<ProbeReport<F>> {
    let layout = ensemble.layout().clone();
    let total = layout.total_spins();
    let mut probed = ensemble.clone();
    let steps: Vec<ExecStep> = (1..=total)
        .map(|spin| {
            ExecStep::Pulse(Pulse {
                spin,
                cond: CondPattern::any_for(spin, total),
                angle,
                phase: PiAngle::zero(),
            })
        })
        .collect();
    probed.run_steps(&steps)?;
    let lines = probed.line_report();

    // per spin: order lines by magnitude; accept a clear winner, or the
    // signal-side pair of spin 2 (two lines equal up to the left character)
    let margin = 1.5f64;
    let mut strongest: Vec<(usize, Vec<LineId>)> = Vec::new();
    for spin in 1..=total {
        let mut spin_lines: Vec<(LineId, f64)> = lines
            .iter()
            .filter(|(l, _)| l.spin == spin)
            .map(|(l, a)| (*l, a.norm().to_f64()))
            .collect();
        spin_lines.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (top, top_mag) = spin_lines[0];
        let runner = spin_lines.get(1).copied();
        let winner = match runner {
            None => vec![top],
            Some((second, second_mag)) => {
                if top_mag >= margin * second_mag {
                    vec![top]
                } else {
                    // a coherent left neighbour (the signal spin) splits the
                    // line across both left characters; the shared right
                    // character is then corroborated by both lines
                    let pair_shares_right = matches!(
                        (top.cond, second.cond),
                        (
                            CondPattern::Interior(_, r1),
                            CondPattern::Interior(_, r2)
                        ) if r1 == r2
                    );
                    if pair_shares_right {
                        vec![top, second]
                    } else {
                        return Err(Error::AmbiguousLineTable {
                            spin,
                            strongest: top_mag,
                            runner_up: second_mag,
                        });
                    }
                }
            }
        };
        strongest.push((spin, winner));
    }

    // votes: a spin's line characters report its neighbours' bits
    let n = layout.register_size();
    let mut votes: Vec<Vec<bool>> = vec![Vec::new(); n];
    let push_vote = |spin_voted: usize, c: CondChar, votes: &mut Vec<Vec<bool>>| {
        if (2..=total).contains(&spin_voted) {
            if let Some(b) = match c {
                CondChar::Zero => Some(false),
                CondChar::One => Some(true),
                CondChar::Any => None,
            } {
                votes[spin_voted - 2].push(b);
            }
        }
    };
    for (spin, winners) in &strongest {
        // a two-line winner means the left neighbour is coherent: only the
        // shared right character carries information
        let effective: Vec<(CondChar, CondChar)> = winners
            .iter()
            .map(|l| match l.cond {
                CondPattern::Edge(c) => (CondChar::Any, c),
                CondPattern::Interior(a, b) => (a, b),
            })
            .collect();
        match spin {
            1 => push_vote(2, effective[0].1, &mut votes),
            s if *s == total => push_vote(total - 1, effective[0].1, &mut votes),
            s => {
                if effective.len() == 1 {
                    push_vote(s - 1, effective[0].0, &mut votes);
                }
                push_vote(s + 1, effective[0].1, &mut votes);
            }
        }
    }

    let mut decoded = Vec::with_capacity(n);
    for (i, v) in votes.iter().enumerate() {
        let spin = i + 2;
        if v.is_empty() || v.iter().any(|&b| b != v[0]) {
            return Err(Error::AmbiguousLineTable {
                spin,
                strongest: f64::NAN,
                runner_up: f64::NAN,
            });
        }
        decoded.push(v[0]);
    }

    Ok(ProbeReport {
        lines,
        strongest,
        decoded,
    })
}

// ---------------------------------------------------------------------------
// register-state builders
// ---------------------------------------------------------------------------

/// Register index (bit `i` holds spin `i + 2`) of a big-endian `width`-bit
/// value.
pub fn value_to_register(value: u32, width: usize) -> u32 {
    MatchPattern::from_value(value, width)
        .expect("value fits width")
        .register_index()
}

/// Uniform superposition over the multiples of `period` representable in
/// `w_bits` bits, encoded big-endian from spin 2.
pub fn build_periodic_state<F: Real>(
    w_bits: usize,
    period: u32,
) -> Result<BTreeMap<u32, Complex<F>>> {
    if w_bits == 0 || w_bits > 30 {
        return Err(Error::BuilderOverflow(format!(
            "first register of {w_bits} bits unsupported"
        )));
    }
    let span = 1u64 << w_bits;
    if period == 0 || period as u64 >= span {
        return Err(Error::MacroArg(format!(
            "period {period} outside 1..2^{w_bits}"
        )));
    }
    let count = ((span - 1) / period as u64 + 1) as usize;
    let amp = Complex::new(
        (F::one() / F::from_usize(count).unwrap()).sqrt(),
        F::zero(),
    );
    let mut amps = BTreeMap::new();
    for p in 0..count as u64 {
        let v = (p * period as u64) as u32;
        amps.insert(value_to_register(v, w_bits), amp);
    }
    Ok(amps)
}

/// Number of terms of the periodic state (including the trivial zero).
pub fn periodic_term_count(w_bits: usize, period: u32) -> usize {
    (((1u64 << w_bits) - 1) / period as u64 + 1) as usize
}

/// Joint two-register state `sum_a sum_{j=0..=shift} |a>|x^{a+j} mod m>`,
/// normalized, with the first register in `w_bits` bits from spin 2 and the
/// second register right after it. Returns the amplitudes and the total
/// register width used.
pub fn build_shifted_periodic_state<F: Real>(
    w_bits: usize,
    x: u64,
    modulus: u64,
    shift: u64,
) -> Result<(BTreeMap<u32, Complex<F>>, usize)> {
    if modulus < 2 {
        return Err(Error::MacroArg(format!("modulus {modulus} must be >= 2")));
    }
    if x.gcd(&modulus) != 1 {
        return Err(Error::NonCoprime { x, modulus });
    }
    let m_bits = (64 - (modulus - 1).leading_zeros()) as usize;
    let total_bits = w_bits + m_bits;
    if w_bits == 0 || total_bits > 30 {
        return Err(Error::BuilderOverflow(format!(
            "registers of {w_bits}+{m_bits} bits unsupported"
        )));
    }
    let x = x % modulus;
    let mut raw: BTreeMap<u32, F> = BTreeMap::new();
    for a in 0..(1u64 << w_bits) {
        // x^a mod modulus by square-and-multiply
        let mut base = x;
        let mut exp = a;
        let mut val: u64 = 1 % modulus;
        while exp > 0 {
            if exp & 1 == 1 {
                val = val * base % modulus;
            }
            base = base * base % modulus;
            exp >>= 1;
        }
        for _ in 0..=shift {
            let first = value_to_register(a as u32, w_bits);
            let second = value_to_register(val as u32, m_bits);
            let key = first | (second << w_bits);
            *raw.entry(key).or_insert_with(F::zero) += F::one();
            val = val * x % modulus;
        }
    }
    let norm: F = raw.values().fold(F::zero(), |acc, &v| acc + v * v).sqrt();
    let amps = raw
        .into_iter()
        .map(|(k, v)| (k, Complex::new(v / norm, F::zero())))
        .collect();
    Ok((amps, total_bits))
}

/// Whether a register load keeps inter-component coherence.
///
/// `Pure` loads the amplitudes as one superposition; coherences between
/// register components are kept and can survive an interrogation echo when
/// their gradient orders accidentally realign. `Dephased` loads one molecule
/// per occupied register with weight `|c|^2`: the faithful model of a result
/// register still entangled with registers that are never read (tracing them
/// out leaves exactly this mixture), and equally of a sign-cycled
/// interrogation. On a dephased load the full-register interrogation signal
/// is exactly the squared weight of the matched component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterPurity {
    Pure,
    Dephased,
}

/// Load register amplitudes into a fresh ensemble.
pub fn load_register<F: Real>(
    layout: &ChainLayout,
    amplitudes: &BTreeMap<u32, Complex<F>>,
    signal_coherent: bool,
    purity: RegisterPurity,
) -> Result<Ensemble<F>> {
    match purity {
        RegisterPurity::Pure => {
            let state = GradedState::from_register(layout, amplitudes, signal_coherent)?;
            Ok(Ensemble::from_state(layout, state))
        }
        RegisterPurity::Dephased => {
            let mut members = Vec::new();
            for (&reg, amp) in amplitudes {
                let w = amp.norm_sqr();
                if w == F::zero() {
                    continue;
                }
                let mut single = BTreeMap::new();
                single.insert(reg, Complex::new(F::one(), F::zero()));
                let state = GradedState::from_register(layout, &single, signal_coherent)?;
                members.push((reg << 1, w, state));
            }
            Ensemble::from_members(layout, members)
        }
    }
}
