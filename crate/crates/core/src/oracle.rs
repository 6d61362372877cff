//! Independent brute-force reference: dense unitaries, basis truth tables and
//! a gradient-grid density-matrix simulation.
//!
//! This module deliberately shares no evolution kernel with
//! [`crate::state`]: states and density matrices are dense arrays indexed by
//! basis, gradients are literal phases, and the ensemble average is an
//! explicit mean over grid points. Agreement with the graded engine is a real
//! cross-check, not a tautology.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex;

use crate::chain::{self, BasisIndex, ChainLayout, LineId};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{ExecStep, GradientStep, Pulse};
use crate::thermal::{boltzmann_weights, ThermalSpec};

/// Dense-path size limit (total spins).
pub const DENSE_SPIN_LIMIT: usize = 11;

fn check_size(layout: &ChainLayout) -> Result<()> {
    if layout.total_spins() > DENSE_SPIN_LIMIT {
        return Err(Error::SizeLimit {
            total_spins: layout.total_spins(),
            limit: DENSE_SPIN_LIMIT,
        });
    }
    Ok(())
}

/// Apply one conditional rotation to a dense state vector, in place.
fn pulse_on_vector<F: Real>(v: &mut [Complex<F>], pulse: &Pulse, layout: &ChainLayout) {
    let dim = v.len();
    let tbit = 1usize << (pulse.spin - 1);
    let c: F = pulse.angle.cos_half();
    let s: F = pulse.angle.sin_half();
    let minus_i = Complex::new(F::zero(), -F::one());
    let e_pos = pulse.phase.phase_factor::<F>();
    let m01 = minus_i * e_pos.conj() * s;
    let m10 = minus_i * e_pos * s;
    let c = Complex::new(c, F::zero());
    for b0 in 0..dim {
        if b0 & tbit != 0 {
            continue;
        }
        if !chain::cond_matches(b0 as BasisIndex, pulse.spin, &pulse.cond, layout) {
            continue;
        }
        let b1 = b0 | tbit;
        let x0 = v[b0];
        let x1 = v[b1];
        v[b0] = c * x0 + m01 * x1;
        v[b1] = m10 * x0 + c * x1;
    }
}

/// Dense unitary of a gradient-free pulse list, built column by column.
#[derive(Debug, Clone)]
pub struct DenseUnitary<F: Real> {
    pub dim: usize,
    /// Row-major: `data[row * dim + col]`.
    pub data: Vec<Complex<F>>,
}

impl<F: Real> DenseUnitary<F> {
    pub fn at(&self, row: usize, col: usize) -> Complex<F> {
        self.data[row * self.dim + col]
    }

    /// Max `|U U^dagger - 1|` entry.
    pub fn unitarity_residual(&self) -> F {
        let dim = self.dim;
        let mut worst = F::zero();
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex::new(F::zero(), F::zero());
                for k in 0..dim {
                    acc += self.at(i, k) * self.at(j, k).conj();
                }
                let expected = if i == j { F::one() } else { F::zero() };
                let dev = (acc - Complex::new(expected, F::zero())).norm();
                if dev > worst {
                    worst = dev;
                }
            }
        }
        worst
    }
}

/// Build the full matrix of a gradient-free pulse list.
pub fn dense_unitary<F: Real>(pulses: &[Pulse], layout: &ChainLayout) -> Result<DenseUnitary<F>> {
    check_size(layout)?;
    let dim = layout.dim();
    let zero = Complex::new(F::zero(), F::zero());
    let mut cols: Vec<Vec<Complex<F>>> = Vec::with_capacity(dim);
    for b in 0..dim {
        let mut v = vec![zero; dim];
        v[b] = Complex::new(F::one(), F::zero());
        for p in pulses {
            pulse_on_vector(&mut v, p, layout);
        }
        cols.push(v);
    }
    let mut data = vec![zero; dim * dim];
    for (col, v) in cols.iter().enumerate() {
        for (row, amp) in v.iter().enumerate() {
            data[row * dim + col] = *amp;
        }
    }
    Ok(DenseUnitary { dim, data })
}

/// Exact basis mapping of an all-π program: image index and phase per input
/// basis state, or a flag when the program is not a basis permutation.
#[derive(Debug, Clone)]
pub struct TruthTable<F: Real> {
    pub entries: Vec<(BasisIndex, Complex<F>)>,
    pub is_permutation: bool,
}

impl<F: Real> TruthTable<F> {
    pub fn image(&self, basis: BasisIndex) -> BasisIndex {
        self.entries[basis as usize].0
    }

    pub fn phase(&self, basis: BasisIndex) -> Complex<F> {
        self.entries[basis as usize].1
    }

    /// CSV rows `basis_in,basis_out,phase_re,phase_im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("basis_in,basis_out,phase_re,phase_im\n");
        for (b, (img, p)) in self.entries.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", b, img, p.re.to_f64(), p.im.to_f64());
        }
        out
    }
}

/// Run every basis state through a pulse list and record where it lands.
///
/// Programs containing non-π pulses spread amplitudes over several basis
/// states; those tables come back with `is_permutation = false` and the
/// dominant image per row.
pub fn truth_table<F: Real>(pulses: &[Pulse], layout: &ChainLayout) -> Result<TruthTable<F>> {
    check_size(layout)?;
    let dim = layout.dim();
    let zero = Complex::new(F::zero(), F::zero());
    let tol = F::from_f64(1e-12).unwrap();
    let mut entries = Vec::with_capacity(dim);
    let mut is_permutation = true;
    let mut seen = vec![false; dim];
    for b in 0..dim {
        let mut v = vec![zero; dim];
        v[b] = Complex::new(F::one(), F::zero());
        for p in pulses {
            pulse_on_vector(&mut v, p, layout);
        }
        let (img, amp) = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm_sqr().partial_cmp(&b.1.norm_sqr()).unwrap())
            .map(|(i, a)| (i, *a))
            .unwrap();
        if (amp.norm_sqr() - F::one()).abs() > tol {
            is_permutation = false;
        }
        if seen[img] {
            is_permutation = false;
        }
        seen[img] = true;
        entries.push((img as BasisIndex, amp));
    }
    Ok(TruthTable {
        entries,
        is_permutation,
    })
}

/// How a basis-permutation interrogation treats the signal-coherent pair
/// `(|0>|A>, |1>|A>)` of one register state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairClass {
    /// Signal conjugated, shared final register, register matches the tested
    /// prefix: the intended echo.
    TrueMatch,
    /// Signal conjugated with a shared final register although the register
    /// does not match: refocuses like a true match.
    FalseMatch,
    /// Signal preserved on a shared register: the pair survives but its
    /// gradient orders can no longer realign in a balanced block.
    RejectedDephased,
    /// Branches land on different registers: no signal-spin coherence at all.
    RejectedNoCoherence,
}

/// Classify every register state of the chain under an all-π interrogation.
/// `matches` decides which registers count as the intended match.
pub fn classify_pairs<F: Real>(
    pulses: &[Pulse],
    layout: &ChainLayout,
    matches: impl Fn(u32) -> bool,
) -> Result<Vec<(u32, PairClass)>> {
    let table: TruthTable<F> = truth_table(pulses, layout)?;
    if !table.is_permutation {
        return Err(Error::MacroArg(
            "pair classification needs an all-pi (basis permutation) program".into(),
        ));
    }
    let n = layout.register_size();
    let mut out = Vec::with_capacity(1 << n);
    for reg in 0..(1u32 << n) {
        let b0 = reg << 1;
        let b1 = b0 | 1;
        let i0 = table.image(b0);
        let i1 = table.image(b1);
        let (s0, r0) = (i0 & 1, i0 >> 1);
        let (s1, r1) = (i1 & 1, i1 >> 1);
        let class = if r0 == r1 && s0 == 1 && s1 == 0 {
            if matches(reg) {
                PairClass::TrueMatch
            } else {
                PairClass::FalseMatch
            }
        } else if r0 == r1 {
            PairClass::RejectedDephased
        } else {
            PairClass::RejectedNoCoherence
        };
        out.push((reg, class));
    }
    Ok(out)
}

/// Classification table for the depth-`k` leading-zeros interrogation.
pub fn classify_zmatch<F: Real>(k: usize, layout: &ChainLayout) -> Result<Vec<(u32, PairClass)>> {
    let steps = crate::lang::zmatch_steps(k, layout)?;
    let pulses: Vec<Pulse> = steps
        .iter()
        .map(|s| match s {
            ExecStep::Pulse(p) => *p,
            ExecStep::Gradient(_) => unreachable!("zmatch contains no gradients"),
        })
        .collect();
    classify_pairs::<F>(&pulses, layout, move |reg| reg & ((1u32 << k) - 1) == 0)
}

// ---------------------------------------------------------------------------
// density-matrix reference
// ---------------------------------------------------------------------------

struct DensityMatrix<F: Real> {
    dim: usize,
    data: Vec<Complex<F>>,
}

impl<F: Real> DensityMatrix<F> {
    fn diagonal(weights: &[f64]) -> DensityMatrix<F> {
        let dim = weights.len();
        let zero = Complex::new(F::zero(), F::zero());
        let mut data = vec![zero; dim * dim];
        for (b, &w) in weights.iter().enumerate() {
            data[b * dim + b] = Complex::new(F::from_f64(w).unwrap(), F::zero());
        }
        DensityMatrix { dim, data }
    }

    fn from_pure(amps: &[Complex<F>]) -> DensityMatrix<F> {
        let dim = amps.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(amps[r] * amps[c].conj());
            }
        }
        DensityMatrix { dim, data }
    }

    fn apply_pulse(&mut self, pulse: &Pulse, layout: &ChainLayout) {
        let dim = self.dim;
        let tbit = 1usize << (pulse.spin - 1);
        let c: F = pulse.angle.cos_half();
        let s: F = pulse.angle.sin_half();
        let minus_i = Complex::new(F::zero(), -F::one());
        let e_pos = pulse.phase.phase_factor::<F>();
        let m01 = minus_i * e_pos.conj() * s;
        let m10 = minus_i * e_pos * s;
        let c = Complex::new(c, F::zero());
        // rho -> U rho (columns)
        for col in 0..dim {
            for b0 in 0..dim {
                if b0 & tbit != 0
                    || !chain::cond_matches(b0 as BasisIndex, pulse.spin, &pulse.cond, layout)
                {
                    continue;
                }
                let b1 = b0 | tbit;
                let x0 = self.data[b0 * dim + col];
                let x1 = self.data[b1 * dim + col];
                self.data[b0 * dim + col] = c * x0 + m01 * x1;
                self.data[b1 * dim + col] = m10 * x0 + c * x1;
            }
        }
        // rho -> rho U^dagger (rows)
        for row in 0..dim {
            for b0 in 0..dim {
                if b0 & tbit != 0
                    || !chain::cond_matches(b0 as BasisIndex, pulse.spin, &pulse.cond, layout)
                {
                    continue;
                }
                let b1 = b0 | tbit;
                let x0 = self.data[row * dim + b0];
                let x1 = self.data[row * dim + b1];
                self.data[row * dim + b0] = c * x0 + m01.conj() * x1;
                self.data[row * dim + b1] = m10.conj() * x0 + c * x1;
            }
        }
    }

    fn apply_gradient(&mut self, step: GradientStep, theta: F) {
        let dim = self.dim;
        for r in 0..dim {
            let wr = chain::weight(r as BasisIndex) as i64;
            for c in 0..dim {
                let wc = chain::weight(c as BasisIndex) as i64;
                let arg = theta * F::from_i64(step.sign as i64 * (wr - wc)).unwrap();
                self.data[r * dim + c] *= Complex::from_polar(F::one(), arg);
            }
        }
    }

    fn line_amplitude(&self, line: &LineId, layout: &ChainLayout) -> Complex<F> {
        let dim = self.dim;
        let tbit = 1usize << (line.spin - 1);
        let mut total = Complex::new(F::zero(), F::zero());
        for b0 in 0..dim {
            if b0 & tbit != 0 {
                continue;
            }
            if !chain::cond_matches(b0 as BasisIndex, line.spin, &line.cond, layout) {
                continue;
            }
            // <B1| rho |B0>
            total += self.data[(b0 | tbit) * dim + b0];
        }
        total
    }
}

fn density_line_report<F: Real>(
    layout: &ChainLayout,
    initial: &DensityMatrix<F>,
    steps: &[ExecStep],
    grid_m: usize,
) -> Result<BTreeMap<LineId, Complex<F>>>
where
    DensityMatrix<F>: Clone,
{
    check_size(layout)?;
    assert!(grid_m >= 1, "grid must have at least one point");
    let two_pi = F::PI() + F::PI();
    let mut totals: BTreeMap<LineId, Complex<F>> = layout
        .line_table()
        .into_iter()
        .map(|l| (l, Complex::new(F::zero(), F::zero())))
        .collect();
    for j in 0..grid_m {
        let theta = two_pi * F::from_usize(j).unwrap() / F::from_usize(grid_m).unwrap();
        let mut rho = initial.clone();
        for step in steps {
            match step {
                ExecStep::Pulse(p) => rho.apply_pulse(p, layout),
                ExecStep::Gradient(g) => rho.apply_gradient(*g, theta),
            }
        }
        for (line, acc) in totals.iter_mut() {
            *acc += rho.line_amplitude(line, layout);
        }
    }
    let m = F::from_usize(grid_m).unwrap();
    Ok(totals.into_iter().map(|(l, a)| (l, a / m)).collect())
}

impl<F: Real> Clone for DensityMatrix<F> {
    fn clone(&self) -> Self {
        DensityMatrix {
            dim: self.dim,
            data: self.data.clone(),
        }
    }
}

/// Evolve the thermal density matrix once per gradient-phase grid point and
/// return the grid-averaged line table.
pub fn density_reference<F: Real>(
    layout: &ChainLayout,
    thermal: &ThermalSpec,
    steps: &[ExecStep],
    grid_m: usize,
) -> Result<BTreeMap<LineId, Complex<F>>> {
    let weights = boltzmann_weights(layout, thermal);
    let rho = DensityMatrix::diagonal(&weights);
    density_line_report(layout, &rho, steps, grid_m)
}

/// Same reference for a directly constructed pure state given as dense
/// amplitudes over the full basis.
pub fn density_reference_pure<F: Real>(
    layout: &ChainLayout,
    amplitudes: &[Complex<F>],
    steps: &[ExecStep],
    grid_m: usize,
) -> Result<BTreeMap<LineId, Complex<F>>> {
    assert_eq!(amplitudes.len(), layout.dim(), "amplitude vector size");
    let rho = DensityMatrix::from_pure(amplitudes);
    density_line_report(layout, &rho, steps, grid_m)
}

/// Outcome of a line-table comparison.
#[derive(Debug, Clone)]
pub struct EquivResult {
    pub pass: bool,
    pub max_deviation: f64,
    pub worst_line: Option<LineId>,
}

/// Compare two line tables, failing on the worst line above `tol`.
pub fn assert_equiv<F: Real>(
    engine: &BTreeMap<LineId, Complex<F>>,
    reference: &BTreeMap<LineId, Complex<F>>,
    tol: f64,
) -> EquivResult {
    let mut max_deviation = 0.0f64;
    let mut worst_line = None;
    for (line, a) in engine {
        let b = reference
            .get(line)
            .copied()
            .unwrap_or_else(|| Complex::new(F::zero(), F::zero()));
        let dev = (*a - b).norm().to_f64();
        if dev > max_deviation {
            max_deviation = dev;
            worst_line = Some(*line);
        }
    }
    for (line, b) in reference {
        if !engine.contains_key(line) {
            let dev = b.norm().to_f64();
            if dev > max_deviation {
                max_deviation = dev;
                worst_line = Some(*line);
            }
        }
    }
    EquivResult {
        pass: max_deviation <= tol,
        max_deviation,
        worst_line,
    }
}
