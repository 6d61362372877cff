//! Single-molecule pure states under conditional pulses and gradient steps.
//!
//! A [`GradedState`] maps `(basis index, gradient order)` to a complex
//! amplitude. The gradient order is the integer exponent of the
//! molecule-dependent gradient phase `exp(i * theta_m * order)`: a gradient
//! step moves the entry `(B, g)` to `(B, g + sign * weight(B))` without
//! touching the amplitude, and the uniform average over `theta_m` later keeps
//! exactly the equal-order pairs. A sampled variant substitutes a literal
//! phase for the symbolic order, for grid cross-checks.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::chain::{self, BasisIndex, ChainLayout, CondPattern, LineId};
use crate::error::{Error, Result};
use crate::lang::PiAngle;
use crate::scalar::Real;

/// Conditional single-spin rotation: angle and axis phase are exact rational
/// multiples of pi, converted to numbers only when applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pulse {
    pub spin: usize,
    pub cond: CondPattern,
    pub angle: PiAngle,
    pub phase: PiAngle,
}

impl Pulse {
    pub fn new(spin: usize, cond: CondPattern, angle: PiAngle, phase: PiAngle) -> Result<Pulse> {
        if !angle.in_pulse_range() {
            return Err(Error::InvalidAngle {
                angle: angle.to_string(),
            });
        }
        Ok(Pulse {
            spin,
            cond,
            angle,
            phase,
        })
    }

    /// π pulse (conditional flip).
    pub fn pi(spin: usize, cond: CondPattern) -> Pulse {
        Pulse {
            spin,
            cond,
            angle: PiAngle::pi(),
            phase: PiAngle::zero(),
        }
    }

    /// π/2 pulse.
    pub fn pi_half(spin: usize, cond: CondPattern) -> Pulse {
        Pulse {
            spin,
            cond,
            angle: PiAngle::new(1, 2),
            phase: PiAngle::zero(),
        }
    }

    /// Unconditional π pulse on `spin`.
    pub fn flip(spin: usize, total_spins: usize) -> Pulse {
        Pulse::pi(spin, CondPattern::any_for(spin, total_spins))
    }

    /// Exact inverse: same axis, negated angle.
    pub fn inverse(&self) -> Pulse {
        Pulse {
            angle: self.angle.negated(),
            ..*self
        }
    }
}

/// Field-gradient step of either sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GradientStep {
    pub sign: i8,
}

impl GradientStep {
    pub fn plus() -> GradientStep {
        GradientStep { sign: 1 }
    }

    pub fn minus() -> GradientStep {
        GradientStep { sign: -1 }
    }

    pub fn inverse(&self) -> GradientStep {
        GradientStep { sign: -self.sign }
    }
}

/// One executable instruction of a fully expanded program.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExecStep {
    Pulse(Pulse),
    Gradient(GradientStep),
}

impl ExecStep {
    pub fn inverse(&self) -> ExecStep {
        match self {
            ExecStep::Pulse(p) => ExecStep::Pulse(p.inverse()),
            ExecStep::Gradient(g) => ExecStep::Gradient(g.inverse()),
        }
    }
}

/// Reverse an expanded step list: reversed order, each step inverted.
pub fn reverse_steps(steps: &[ExecStep]) -> Vec<ExecStep> {
    steps.iter().rev().map(ExecStep::inverse).collect()
}

/// Number of pulse instructions in a step list (gradients are free).
pub fn pulse_count(steps: &[ExecStep]) -> usize {
    steps
        .iter()
        .filter(|s| matches!(s, ExecStep::Pulse(_)))
        .count()
}

/// Pure state of one molecule with symbolic gradient bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedState<F: Real> {
    total_spins: usize,
    amps: BTreeMap<(BasisIndex, i64), Complex<F>>,
}

impl<F: Real> GradedState<F> {
    /// Basis state `basis` at gradient order 0.
    pub fn basis(layout: &ChainLayout, basis: BasisIndex) -> Result<GradedState<F>> {
        layout.check_basis(basis)?;
        let mut amps = BTreeMap::new();
        amps.insert((basis, 0), Complex::new(F::one(), F::zero()));
        Ok(GradedState {
            total_spins: layout.total_spins(),
            amps,
        })
    }

    /// Product state `signal ⊗ register` from register amplitudes keyed by
    /// register index (bit `i` of the key holds spin `i + 2`).
    ///
    /// With `signal_coherent` the signal spin is loaded in the turned-on
    /// superposition `(|0> + i|1>)/sqrt(2)`, so readout protocols can run on a
    /// directly constructed result state.
    pub fn from_register(
        layout: &ChainLayout,
        amplitudes: &BTreeMap<u32, Complex<F>>,
        signal_coherent: bool,
    ) -> Result<GradedState<F>> {
        let n = layout.register_size();
        let mut norm = F::zero();
        for (&reg, amp) in amplitudes {
            if (reg as u64) >= (1u64 << n) {
                return Err(Error::InvalidBasis {
                    basis: reg,
                    total_spins: layout.total_spins(),
                });
            }
            norm += amp.norm_sqr();
        }
        let tol = F::from_f64(1e-9).unwrap();
        if (norm - F::one()).abs() > tol {
            return Err(Error::NormViolation {
                norm: norm.to_f64(),
                tol: 1e-9,
            });
        }
        let signal: Vec<(u32, Complex<F>)> = if signal_coherent {
            let r = F::from_f64(0.5).unwrap().sqrt();
            vec![
                (0, Complex::new(r, F::zero())),
                (1, Complex::new(F::zero(), r)),
            ]
        } else {
            vec![(0, Complex::new(F::one(), F::zero()))]
        };
        let mut amps = BTreeMap::new();
        for (&reg, &amp) in amplitudes {
            if amp == Complex::new(F::zero(), F::zero()) {
                continue;
            }
            for &(sigma, s_amp) in &signal {
                amps.insert(((reg << 1) | sigma, 0), amp * s_amp);
            }
        }
        Ok(GradedState {
            total_spins: layout.total_spins(),
            amps,
        })
    }

    pub fn total_spins(&self) -> usize {
        self.total_spins
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(BasisIndex, i64), &Complex<F>)> {
        self.amps.iter()
    }

    pub fn amplitude(&self, basis: BasisIndex, order: i64) -> Complex<F> {
        self.amps
            .get(&(basis, order))
            .copied()
            .unwrap_or_else(|| Complex::new(F::zero(), F::zero()))
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> F {
        self.amps
            .values()
            .fold(F::zero(), |acc, a| acc + a.norm_sqr())
    }

    /// Conditional rotation on every basis pair differing only in the target
    /// bit whose shared neighbours match the pulse condition. Gradient orders
    /// are untouched; the norm is preserved.
    pub fn apply_pulse(&mut self, pulse: &Pulse, layout: &ChainLayout) -> Result<()> {
        layout.validate_cond(pulse.spin, &pulse.cond)?;
        if !pulse.angle.in_pulse_range() {
            return Err(Error::InvalidAngle {
                angle: pulse.angle.to_string(),
            });
        }
        let tbit: BasisIndex = 1 << (pulse.spin - 1);
        let c: F = pulse.angle.cos_half();
        let s: F = pulse.angle.sin_half();
        let minus_i = Complex::new(F::zero(), -F::one());
        let e_pos = pulse.phase.phase_factor::<F>();
        let e_neg = e_pos.conj();
        // a0' = c a0 + m01 a1 ; a1' = m10 a0 + c a1
        let m01 = minus_i * e_neg * s;
        let m10 = minus_i * e_pos * s;
        let c = Complex::new(c, F::zero());

        let zero = Complex::new(F::zero(), F::zero());
        let mut next: BTreeMap<(BasisIndex, i64), Complex<F>> = BTreeMap::new();
        for (&(b, g), &amp) in &self.amps {
            let b0 = b & !tbit;
            if !chain::cond_matches(b0, pulse.spin, &pulse.cond, layout) {
                if amp != zero {
                    next.insert((b, g), amp);
                }
                continue;
            }
            if b == b0 {
                let a1 = self.amplitude(b0 | tbit, g);
                let n0 = c * amp + m01 * a1;
                let n1 = m10 * amp + c * a1;
                if n0 != zero {
                    next.insert((b0, g), n0);
                }
                if n1 != zero {
                    next.insert((b0 | tbit, g), n1);
                }
            } else if !self.amps.contains_key(&(b0, g)) {
                // upper member only; lower handled above when present
                let n0 = m01 * amp;
                let n1 = c * amp;
                if n0 != zero {
                    next.insert((b0, g), n0);
                }
                if n1 != zero {
                    next.insert((b, g), n1);
                }
            }
        }
        self.amps = next;
        Ok(())
    }

    /// Move every entry `(B, g)` to `(B, g + sign * weight(B))`.
    pub fn apply_gradient(&mut self, step: GradientStep) {
        let sign = step.sign as i64;
        let mut next = BTreeMap::new();
        for (&(b, g), &amp) in &self.amps {
            next.insert((b, g + sign * chain::weight(b) as i64), amp);
        }
        self.amps = next;
    }

    /// Sampled-gradient variant: multiply each amplitude by the literal phase
    /// `exp(i * sign * theta * weight(B))` instead of shifting the order.
    pub fn apply_gradient_phase(&mut self, step: GradientStep, theta: F) {
        for ((b, _), amp) in self.amps.iter_mut() {
            let arg = theta * F::from_i64(step.sign as i64 * chain::weight(*b) as i64).unwrap();
            *amp *= Complex::from_polar(F::one(), arg);
        }
    }

    pub fn apply_step(&mut self, step: &ExecStep, layout: &ChainLayout) -> Result<()> {
        match step {
            ExecStep::Pulse(p) => self.apply_pulse(p, layout),
            ExecStep::Gradient(g) => {
                self.apply_gradient(*g);
                Ok(())
            }
        }
    }

    pub fn apply_steps(&mut self, steps: &[ExecStep], layout: &ChainLayout) -> Result<()> {
        for step in steps {
            self.apply_step(step, layout)?;
        }
        Ok(())
    }

    /// Sampled-mode execution with a fixed gradient phase `theta`.
    pub fn apply_steps_phase(
        &mut self,
        steps: &[ExecStep],
        layout: &ChainLayout,
        theta: F,
    ) -> Result<()> {
        for step in steps {
            match step {
                ExecStep::Pulse(p) => self.apply_pulse(p, layout)?,
                ExecStep::Gradient(g) => self.apply_gradient_phase(*g, theta),
            }
        }
        Ok(())
    }

    /// Line amplitude of this molecule:
    /// `sum over equal-order pairs of conj(a(B0, g)) * a(B1, g)` with `B0`,
    /// `B1` equal except the line's spin (0 in `B0`) and the shared neighbours
    /// of `B0` satisfying the line condition.
    pub fn line_amplitude(&self, line: &LineId, layout: &ChainLayout) -> Complex<F> {
        let tbit: BasisIndex = 1 << (line.spin - 1);
        let mut total = Complex::new(F::zero(), F::zero());
        for (&(b, g), &a0) in &self.amps {
            if b & tbit != 0 {
                continue;
            }
            if !chain::cond_matches(b, line.spin, &line.cond, layout) {
                continue;
            }
            let a1 = self.amplitude(b | tbit, g);
            total += a0.conj() * a1;
        }
        total
    }

    /// `|<self|other>|` over matched `(basis, order)` entries.
    pub fn fidelity(&self, other: &GradedState<F>) -> F {
        let mut overlap = Complex::new(F::zero(), F::zero());
        for (key, a) in &self.amps {
            if let Some(b) = other.amps.get(key) {
                overlap += a.conj() * *b;
            }
        }
        overlap.norm()
    }
}
