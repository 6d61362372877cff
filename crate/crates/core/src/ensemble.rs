//! Boltzmann-weighted molecule ensembles and program execution over them.
//!
//! In exact mode each molecule carries one graded state and the gradient
//! average is the symbolic equal-order selection. In sampled mode each
//! molecule is evolved once per point of a roots-of-unity gradient-phase grid
//! `theta_j = 2 pi j / M` and line amplitudes are grid means; with
//! `M > 2 * max |order|` the two modes agree exactly, which is the
//! cross-check `verify` runs.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::chain::{BasisIndex, ChainLayout, LineId};
use crate::error::{Error, Result};
use crate::lang::Program;
use crate::scalar::Real;
use crate::state::{pulse_count, ExecStep, GradedState};
use crate::thermal::{boltzmann_weights, ThermalSpec};

/// Gradient-averaging mode of an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Symbolic integer gradient orders; the ensemble average is exact.
    Exact,
    /// Literal gradient phases on an `grid`-point roots-of-unity grid.
    Sampled { grid: usize, seed: u64 },
}

/// One member class of the ensemble: an initial basis state with its thermal
/// weight and the evolved state(s) — one per gradient-phase grid point in
/// sampled mode, a single symbolic state in exact mode.
#[derive(Debug, Clone)]
pub struct Molecule<F: Real> {
    pub initial: BasisIndex,
    pub weight: F,
    pub variants: Vec<GradedState<F>>,
}

impl<F: Real> Molecule<F> {
    /// Grid-averaged line amplitude of this molecule (unweighted).
    pub fn line_amplitude(&self, line: &LineId, layout: &ChainLayout) -> Complex<F> {
        let mut total = Complex::new(F::zero(), F::zero());
        for v in &self.variants {
            total += v.line_amplitude(line, layout);
        }
        total / F::from_usize(self.variants.len()).unwrap()
    }
}

/// Weighted collection of molecules sharing one chain layout.
#[derive(Debug, Clone)]
pub struct Ensemble<F: Real> {
    layout: ChainLayout,
    mode: Mode,
    molecules: Vec<Molecule<F>>,
    /// Line (1, "0") amplitude recorded right after the first turn-on pulse
    /// seen by `run_steps`, kept for report normalization.
    recorded_reference: Option<Complex<F>>,
}

impl<F: Real> Ensemble<F> {
    /// Thermal ensemble: one molecule per basis state with weight at or above
    /// `weight_floor`, molecules in basis order.
    pub fn thermal(
        layout: &ChainLayout,
        thermal: &ThermalSpec,
        mode: Mode,
        weight_floor: f64,
    ) -> Result<Ensemble<F>> {
        assert!(
            (0.0..1.0).contains(&weight_floor),
            "weight floor must be in [0, 1)"
        );
        let weights = boltzmann_weights(layout, thermal);
        let variants = match mode {
            Mode::Exact => 1,
            Mode::Sampled { grid, .. } => grid.max(1),
        };
        let mut molecules = Vec::new();
        for (basis, &w) in weights.iter().enumerate() {
            if w < weight_floor {
                continue;
            }
            let state = GradedState::basis(layout, basis as BasisIndex)?;
            molecules.push(Molecule {
                initial: basis as BasisIndex,
                weight: F::from_f64(w).unwrap(),
                variants: vec![state; variants],
            });
        }
        if molecules.is_empty() {
            return Err(Error::EmptyEnsemble { floor: weight_floor });
        }
        Ok(Ensemble {
            layout: layout.clone(),
            mode,
            molecules,
            recorded_reference: None,
        })
    }

    /// Single fully weighted molecule in a directly constructed state.
    pub fn from_state(layout: &ChainLayout, state: GradedState<F>) -> Ensemble<F> {
        Ensemble {
            layout: layout.clone(),
            mode: Mode::Exact,
            molecules: vec![Molecule {
                initial: 0,
                weight: F::one(),
                variants: vec![state],
            }],
            recorded_reference: None,
        }
    }

    /// Weighted mixture of directly constructed states, exact mode.
    pub fn from_members(
        layout: &ChainLayout,
        members: Vec<(BasisIndex, F, GradedState<F>)>,
    ) -> Result<Ensemble<F>> {
        if members.is_empty() {
            return Err(Error::EmptyEnsemble { floor: 0.0 });
        }
        Ok(Ensemble {
            layout: layout.clone(),
            mode: Mode::Exact,
            molecules: members
                .into_iter()
                .map(|(initial, weight, state)| Molecule {
                    initial,
                    weight,
                    variants: vec![state],
                })
                .collect(),
            recorded_reference: None,
        })
    }

    pub fn layout(&self) -> &ChainLayout {
        &self.layout
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn molecules(&self) -> &[Molecule<F>] {
        &self.molecules
    }

    pub fn recorded_reference(&self) -> Option<Complex<F>> {
        self.recorded_reference
    }

    /// Magnitude of the line signal of one fully coherent molecule; every
    /// report ratio is taken against this constant.
    pub fn unit_reference() -> F {
        F::from_f64(0.5).unwrap()
    }

    /// Weighted norm across the ensemble (1 after any unitary program).
    pub fn aggregate_norm(&self) -> F {
        self.molecules.iter().fold(F::zero(), |acc, m| {
            let mean = m
                .variants
                .iter()
                .fold(F::zero(), |a, v| a + v.norm_sqr())
                / F::from_usize(m.variants.len()).unwrap();
            acc + m.weight * mean
        })
    }

    /// Evolve every molecule through a flat step list, in fixed molecule
    /// order.
    pub fn run_steps(&mut self, steps: &[ExecStep]) -> Result<()> {
        let thetas: Vec<F> = match self.mode {
            Mode::Exact => vec![],
            Mode::Sampled { grid, .. } => (0..grid)
                .map(|j| {
                    F::from_usize(j).unwrap() / F::from_usize(grid).unwrap()
                        * (F::PI() + F::PI())
                })
                .collect(),
        };
        for step in steps {
            for m in &mut self.molecules {
                match self.mode {
                    Mode::Exact => m.variants[0].apply_step(step, &self.layout)?,
                    Mode::Sampled { .. } => {
                        for (v, &theta) in m.variants.iter_mut().zip(&thetas) {
                            match step {
                                ExecStep::Pulse(p) => v.apply_pulse(p, &self.layout)?,
                                ExecStep::Gradient(g) => v.apply_gradient_phase(*g, theta),
                            }
                        }
                    }
                }
            }
            if is_turn_on(step) && self.recorded_reference.is_none() {
                let line = LineId::new(1, crate::chain::CondPattern::Edge(crate::chain::CondChar::Zero));
                self.recorded_reference = Some(self.line_amplitude(&line));
            }
        }
        Ok(())
    }

    /// Expand and run a parsed program, returning the end-of-program signal
    /// report.
    pub fn run_program(&mut self, program: &Program) -> Result<SignalReport<F>> {
        let steps = program.expand(&self.layout)?;
        self.run_steps(&steps)?;
        Ok(self.signal_report(pulse_count(&steps)))
    }

    /// Ensemble line amplitude: weight-by-weight complex sum of per-molecule
    /// (grid-averaged) line amplitudes, reduced in molecule order.
    pub fn line_amplitude(&self, line: &LineId) -> Complex<F> {
        let mut total = Complex::new(F::zero(), F::zero());
        for m in &self.molecules {
            total += m.line_amplitude(line, &self.layout) * m.weight;
        }
        total
    }

    /// Per-molecule line amplitudes (unweighted), in molecule order.
    pub fn per_molecule_line(&self, line: &LineId) -> Vec<Complex<F>> {
        self.molecules
            .iter()
            .map(|m| m.line_amplitude(line, &self.layout))
            .collect()
    }

    /// Weighted sum of per-molecule line magnitudes. Unlike the complex sum
    /// this cannot cancel between molecules of opposite polarization, so it
    /// measures which part of the ensemble remains echo-capable on the line.
    pub fn coherent_line_weight(&self, line: &LineId) -> F {
        self.molecules.iter().fold(F::zero(), |acc, m| {
            acc + m.weight * m.line_amplitude(line, &self.layout).norm()
        })
    }

    /// Complex amplitudes of every line of the chain.
    pub fn line_report(&self) -> BTreeMap<LineId, Complex<F>> {
        self.layout
            .line_table()
            .into_iter()
            .map(|l| (l, self.line_amplitude(&l)))
            .collect()
    }

    pub fn signal_report(&self, pulses: usize) -> SignalReport<F> {
        SignalReport {
            lines: self.line_report(),
            reference: self
                .recorded_reference
                .unwrap_or_else(|| Complex::new(Ensemble::<F>::unit_reference(), F::zero())),
            pulse_count: pulses,
        }
    }
}

fn is_turn_on(step: &ExecStep) -> bool {
    use crate::chain::{CondChar, CondPattern};
    use crate::lang::PiAngle;
    matches!(
        step,
        ExecStep::Pulse(p)
            if p.spin == 1
                && p.cond == CondPattern::Edge(CondChar::Zero)
                && p.angle == PiAngle::new(1, 2)
    )
}

/// End-of-program observable: every line amplitude, the recorded reference,
/// and the pulse budget spent.
#[derive(Debug, Clone)]
pub struct SignalReport<F: Real> {
    pub lines: BTreeMap<LineId, Complex<F>>,
    pub reference: Complex<F>,
    pub pulse_count: usize,
}

impl<F: Real> SignalReport<F> {
    pub fn magnitude(&self, line: &LineId) -> F {
        self.lines
            .get(line)
            .map(|a| a.norm())
            .unwrap_or_else(F::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::CondPattern;
    use crate::lang::parse;

    fn layout(spins: usize) -> ChainLayout {
        ChainLayout::default_layout(spins).unwrap()
    }

    fn line(spin: usize, cond: &str) -> LineId {
        LineId::new(spin, CondPattern::parse(cond).unwrap())
    }

    #[test]
    fn zero_temperature_turn_on() {
        let l = layout(3);
        let thermal = ThermalSpec::uniform(f64::INFINITY, 3);
        let mut e: Ensemble<f64> = Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        let report = e.run_program(&parse("turnon").unwrap()).unwrap();
        assert!((report.magnitude(&line(1, "0")) - 0.5).abs() < 1e-12);
        for (id, amp) in &report.lines {
            if *id != line(1, "0") {
                assert!(amp.norm() < 1e-14, "unexpected signal on {id}");
            }
        }
        assert_eq!(report.pulse_count, 1);
    }

    #[test]
    fn equilibrium_ensemble_is_silent() {
        let l = layout(4);
        let thermal = ThermalSpec::scaled(0.7, &l);
        let mut e: Ensemble<f64> = Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        let report = e.run_program(&parse("").unwrap()).unwrap();
        for amp in report.lines.values() {
            assert_eq!(amp.norm(), 0.0);
        }
    }

    #[test]
    fn echo_recovers_turn_on_signal() {
        let l = layout(3);
        let thermal = ThermalSpec::uniform(f64::INFINITY, 3);
        let mut e: Ensemble<f64> = Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        e.run_program(&parse("turnon").unwrap()).unwrap();
        let before = e.line_amplitude(&line(1, "0"));
        let report = e.run_program(&parse("grad +\npi 1 0\ngrad +").unwrap()).unwrap();
        assert!((report.magnitude(&line(1, "0")) - before.norm()).abs() < 1e-12);
    }

    #[test]
    fn floor_errors_when_everything_drops() {
        let l = layout(3);
        let thermal = ThermalSpec::uniform(0.0, 3);
        let r = Ensemble::<f64>::thermal(&l, &thermal, Mode::Exact, 0.9);
        assert!(matches!(r, Err(Error::EmptyEnsemble { .. })));
    }

    #[test]
    fn uniform_enumeration() {
        let l = layout(3);
        let thermal = ThermalSpec::uniform(0.0, 3);
        let e: Ensemble<f64> = Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        assert_eq!(e.molecules().len(), 8);
        for m in e.molecules() {
            assert!((m.weight - 0.125).abs() < 1e-15);
        }
        assert!((e.aggregate_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn aggregate_norm_preserved_by_programs() {
        let l = layout(4);
        let thermal = ThermalSpec::scaled(1.0, &l);
        let mut e: Ensemble<f64> = Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        e.run_program(&parse("turnon\ngrad +\nprepare\ngrad +\npi2 3 X1").unwrap())
            .unwrap();
        assert!((e.aggregate_norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn silenced_pair_stays_silent() {
        // A molecule whose only coherent pair carries nonzero net gradient
        // order contributes nothing to any later balanced echo block.
        let l = layout(3);
        let mut s: GradedState<f64> = GradedState::basis(&l, 0).unwrap();
        s.apply_steps(&parse("turnon").unwrap().expand(&l).unwrap(), &l).unwrap();
        // single unbalanced gradient: pair orders now differ by 1
        s.apply_gradient(crate::state::GradientStep::plus());
        let mut e = Ensemble::from_state(&l, s);
        for block in ["grad +\npi 1 0\ngrad +", "grad +\nzmatch 2\ngrad +"] {
            e.run_program(&parse(block).unwrap()).unwrap();
            for (_, amp) in e.line_report() {
                assert!(amp.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sampled_grid_matches_exact_mode() {
        let l = layout(4);
        let thermal = ThermalSpec::scaled(0.5, &l);
        let program = parse("turnon\ngrad +\nprepare\ngrad +").unwrap();

        let mut exact: Ensemble<f64> =
            Ensemble::thermal(&l, &thermal, Mode::Exact, 0.0).unwrap();
        exact.run_program(&program).unwrap();

        // 2 gradient steps, 4 spins: orders within [-8, 8]; grid 17 resolves
        let mut sampled: Ensemble<f64> = Ensemble::thermal(
            &l,
            &thermal,
            Mode::Sampled { grid: 17, seed: 0 },
            0.0,
        )
        .unwrap();
        sampled.run_program(&program).unwrap();

        for (id, a) in exact.line_report() {
            let b = sampled.line_amplitude(&id);
            assert!((a - b).norm() < 1e-10, "line {id}: {a} vs {b}");
        }
    }
}
