//! Spin-chain layout, basis conventions, neighbour-condition patterns, and the
//! addressable resonance-line table.
//!
//! Spins are numbered from 1. Spin 1 is the signal spin; spins `2..=N+1` form
//! the computing register. Basis indices store spin `k` in bit `k - 1`, with
//! bit value 1 for the excited state `|1>` and the ground state at index 0.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Basis state of the whole chain. Bit `k - 1` holds spin `k`.
pub type BasisIndex = u32;

/// Hamming weight of a basis state (number of excited spins).
#[inline]
pub fn weight(basis: BasisIndex) -> u32 {
    basis.count_ones()
}

/// Value of spin `spin` (1-based) in `basis`.
#[inline]
pub fn spin_bit(basis: BasisIndex, spin: usize) -> u8 {
    ((basis >> (spin - 1)) & 1) as u8
}

/// One character of a condition pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CondChar {
    Zero,
    One,
    /// Unconditioned ("don't care").
    Any,
}

impl CondChar {
    pub fn matches(self, bit: u8) -> bool {
        match self {
            CondChar::Zero => bit == 0,
            CondChar::One => bit == 1,
            CondChar::Any => true,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            CondChar::Zero => '0',
            CondChar::One => '1',
            CondChar::Any => 'X',
        }
    }

    pub fn from_char(c: char) -> Option<CondChar> {
        match c {
            '0' => Some(CondChar::Zero),
            '1' => Some(CondChar::One),
            'X' | 'x' => Some(CondChar::Any),
            _ => None,
        }
    }
}

/// Neighbour-value requirement selecting which basis components a pulse
/// rotates. Interior spins carry a (left, right) pair; the two chain ends have
/// a single neighbour and carry one character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CondPattern {
    Edge(CondChar),
    Interior(CondChar, CondChar),
}

impl CondPattern {
    /// Fully unconditioned pattern of the right arity for `spin`.
    pub fn any_for(spin: usize, total_spins: usize) -> CondPattern {
        if spin == 1 || spin == total_spins {
            CondPattern::Edge(CondChar::Any)
        } else {
            CondPattern::Interior(CondChar::Any, CondChar::Any)
        }
    }

    pub fn is_fully_specified(&self) -> bool {
        match self {
            CondPattern::Edge(c) => *c != CondChar::Any,
            CondPattern::Interior(l, r) => *l != CondChar::Any && *r != CondChar::Any,
        }
    }

    /// Parse from text over `{0,1,X}`; arity is validated against the spin
    /// separately (see [`ChainLayout::validate_cond`]).
    pub fn parse(text: &str) -> Option<CondPattern> {
        let chars: Vec<CondChar> = text.chars().map(CondChar::from_char).collect::<Option<_>>()?;
        match chars.as_slice() {
            [c] => Some(CondPattern::Edge(*c)),
            [l, r] => Some(CondPattern::Interior(*l, *r)),
            _ => None,
        }
    }
}

impl fmt::Display for CondPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondPattern::Edge(c) => write!(f, "{}", c.as_char()),
            CondPattern::Interior(l, r) => write!(f, "{}{}", l.as_char(), r.as_char()),
        }
    }
}

/// A resolvable resonance line: one spin under one fully specified neighbour
/// configuration. Interior spins have four lines, edge spins two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LineId {
    pub spin: usize,
    pub cond: CondPattern,
}

impl LineId {
    pub fn new(spin: usize, cond: CondPattern) -> LineId {
        LineId { spin, cond }
    }
}

impl fmt::Display for LineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.spin, self.cond)
    }
}

/// Static description of the chain: per-spin base frequencies, per-bond
/// coupling shifts and the linewidth used for addressability checks.
///
/// Frequencies are dimensionless; they only matter for the line table and the
/// addressability report, since pulses are addressed by `(spin, cond)`.
/// Degenerate layouts (equal frequencies, non-alternating couplings) are
/// constructible on purpose so that [`addressability_report`] can exhibit the
/// resulting line collisions; construction only rejects structurally
/// malformed input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainLayout {
    total_spins: usize,
    base_freq: Vec<f64>,
    /// `coupling[n - 1]` is the shift for bond `(n, n + 1)`, `n = 1..total_spins-1`.
    coupling: Vec<f64>,
    linewidth: f64,
}

impl ChainLayout {
    pub fn new(base_freq: Vec<f64>, coupling: Vec<f64>, linewidth: f64) -> Result<ChainLayout> {
        let total_spins = base_freq.len();
        if total_spins < 2 {
            return Err(Error::InvalidLayout(format!(
                "need at least 2 spins, got {total_spins}"
            )));
        }
        if coupling.len() != total_spins - 1 {
            return Err(Error::InvalidLayout(format!(
                "{} spins need {} bond couplings, got {}",
                total_spins,
                total_spins - 1,
                coupling.len()
            )));
        }
        if linewidth.is_nan() || linewidth <= 0.0 {
            return Err(Error::InvalidLayout(format!(
                "linewidth must be positive, got {linewidth}"
            )));
        }
        Ok(ChainLayout {
            total_spins,
            base_freq,
            coupling,
            linewidth,
        })
    }

    /// Chain with frequencies `offset + step * n` and two alternating bond
    /// couplings, starting with `couplings.0` on bond (1, 2).
    pub fn with_rule(
        total_spins: usize,
        offset: f64,
        step: f64,
        couplings: (f64, f64),
        linewidth: f64,
    ) -> Result<ChainLayout> {
        let base = (1..=total_spins).map(|n| offset + step * n as f64).collect();
        let bonds = (1..total_spins)
            .map(|n| if n % 2 == 1 { couplings.0 } else { couplings.1 })
            .collect();
        ChainLayout::new(base, bonds, linewidth)
    }

    /// Well-separated default: frequencies `100 + 10 n`, couplings alternating
    /// 1 and 3, linewidth 0.1.
    pub fn default_layout(total_spins: usize) -> Result<ChainLayout> {
        ChainLayout::with_rule(total_spins, 100.0, 10.0, (1.0, 3.0), 0.1)
    }

    pub fn total_spins(&self) -> usize {
        self.total_spins
    }

    /// Size of the computing register (spins `2..=total_spins`).
    pub fn register_size(&self) -> usize {
        self.total_spins - 1
    }

    pub fn linewidth(&self) -> f64 {
        self.linewidth
    }

    pub fn base_freq(&self, spin: usize) -> f64 {
        self.base_freq[spin - 1]
    }

    /// Coupling of the bond between `spin` and `spin + 1`.
    pub fn bond(&self, spin: usize) -> f64 {
        self.coupling[spin - 1]
    }

    pub fn dim(&self) -> usize {
        1usize << self.total_spins
    }

    pub fn check_spin(&self, spin: usize) -> Result<()> {
        if spin == 0 || spin > self.total_spins {
            return Err(Error::InvalidSpin {
                spin,
                total_spins: self.total_spins,
            });
        }
        Ok(())
    }

    pub fn check_basis(&self, basis: BasisIndex) -> Result<()> {
        if (basis as u64) >= (1u64 << self.total_spins) {
            return Err(Error::InvalidBasis {
                basis,
                total_spins: self.total_spins,
            });
        }
        Ok(())
    }

    /// Arity check: edge spins take a one-character condition, interior spins
    /// a two-character one.
    pub fn validate_cond(&self, spin: usize, cond: &CondPattern) -> Result<()> {
        self.check_spin(spin)?;
        let edge = spin == 1 || spin == self.total_spins;
        let ok = matches!(
            (edge, cond),
            (true, CondPattern::Edge(_)) | (false, CondPattern::Interior(_, _))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidCond {
                spin,
                cond: cond.to_string(),
                reason: if edge {
                    "edge spin takes a single-character condition".into()
                } else {
                    "interior spin takes a two-character condition".into()
                },
            })
        }
    }

    /// All fully specified lines of the chain, spin-major, condition-ordered.
    pub fn line_table(&self) -> Vec<LineId> {
        let bits = [CondChar::Zero, CondChar::One];
        let mut out = Vec::new();
        for spin in 1..=self.total_spins {
            if spin == 1 || spin == self.total_spins {
                for c in bits {
                    out.push(LineId::new(spin, CondPattern::Edge(c)));
                }
            } else {
                for l in bits {
                    for r in bits {
                        out.push(LineId::new(spin, CondPattern::Interior(l, r)));
                    }
                }
            }
        }
        out
    }

}

/// Resonance frequency of `line`: the spin's base frequency plus one bond
/// shift per excited neighbour (edge spins have a single bond term).
pub fn line_frequency(layout: &ChainLayout, line: &LineId) -> Result<f64> {
    layout.validate_cond(line.spin, &line.cond)?;
    if !line.cond.is_fully_specified() {
        return Err(Error::InvalidCond {
            spin: line.spin,
            cond: line.cond.to_string(),
            reason: "line conditions must be fully specified".into(),
        });
    }
    let s = line.spin;
    let mut f = layout.base_freq(s);
    match line.cond {
        CondPattern::Edge(c) => {
            let bond = if s == 1 { layout.bond(1) } else { layout.bond(s - 1) };
            if c == CondChar::One {
                f += bond;
            }
        }
        CondPattern::Interior(l, r) => {
            if l == CondChar::One {
                f += layout.bond(s - 1);
            }
            if r == CondChar::One {
                f += layout.bond(s);
            }
        }
    }
    Ok(f)
}

/// True iff every non-X character of `cond` equals the corresponding
/// neighbour bit of `basis`.
pub fn cond_matches(
    basis: BasisIndex,
    spin: usize,
    cond: &CondPattern,
    layout: &ChainLayout,
) -> bool {
    match cond {
        CondPattern::Edge(c) => {
            let neighbour = if spin == 1 { 2 } else { layout.total_spins() - 1 };
            c.matches(spin_bit(basis, neighbour))
        }
        CondPattern::Interior(l, r) => {
            l.matches(spin_bit(basis, spin - 1)) && r.matches(spin_bit(basis, spin + 1))
        }
    }
}

/// A pair of lines closer than the linewidth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineCollision {
    pub a: LineId,
    pub b: LineId,
    pub gap: f64,
}

/// Full enumeration of the line table with spacing statistics.
#[derive(Debug, Clone, Serialize)]
pub struct AddressabilityReport {
    pub lines: Vec<(LineId, f64)>,
    pub min_gap: f64,
    pub collisions: Vec<LineCollision>,
    pub addressable: bool,
}

/// Enumerate every line frequency and report the minimum pairwise gap and all
/// pairs closer than the linewidth.
pub fn addressability_report(layout: &ChainLayout) -> AddressabilityReport {
    let mut lines: Vec<(LineId, f64)> = layout
        .line_table()
        .into_iter()
        .map(|l| {
            let f = line_frequency(layout, &l).expect("line table entries are valid");
            (l, f)
        })
        .collect();
    let mut sorted = lines.clone();
    sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut min_gap = f64::INFINITY;
    let mut collisions = Vec::new();
    for w in sorted.windows(2) {
        let gap = w[1].1 - w[0].1;
        min_gap = min_gap.min(gap);
        if gap < layout.linewidth() {
            collisions.push(LineCollision {
                a: w[0].0,
                b: w[1].0,
                gap,
            });
        }
    }
    lines.sort_by_key(|a| a.0);
    AddressabilityReport {
        lines,
        min_gap,
        addressable: collisions.is_empty(),
        collisions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn custom_layout() -> ChainLayout {
        // omega_3 = 100 with J_23 = 1, J_34 = 3 on a 5-spin chain.
        ChainLayout::new(
            vec![80.0, 90.0, 100.0, 110.0, 120.0],
            vec![2.0, 1.0, 3.0, 1.0],
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn line_frequency_interior_shifts() {
        let layout = custom_layout();
        let f = |cond: &str| {
            line_frequency(&layout, &LineId::new(3, CondPattern::parse(cond).unwrap())).unwrap()
        };
        assert_eq!(f("00"), 100.0);
        assert_eq!(f("10"), 101.0);
        assert_eq!(f("01"), 103.0);
        assert_ne!(f("10"), f("01"));
        assert_eq!(f("11"), 104.0);
    }

    #[test]
    fn line_frequency_edge() {
        let layout = ChainLayout::new(vec![50.0, 60.0, 70.0], vec![2.0, 5.0], 0.1).unwrap();
        let f1 = line_frequency(&layout, &LineId::new(1, CondPattern::Edge(CondChar::One))).unwrap();
        assert_eq!(f1, 52.0);
        let f0 = line_frequency(&layout, &LineId::new(1, CondPattern::Edge(CondChar::Zero))).unwrap();
        assert_eq!(f0, 50.0);
        // symmetric rule on the far end
        let fl = line_frequency(&layout, &LineId::new(3, CondPattern::Edge(CondChar::One))).unwrap();
        assert_eq!(fl, 75.0);
    }

    #[test]
    fn line_frequency_rejects_bad_input() {
        let layout = custom_layout();
        assert!(line_frequency(&layout, &LineId::new(9, CondPattern::Edge(CondChar::One))).is_err());
        // wrong arity: interior spin with edge condition
        assert!(line_frequency(&layout, &LineId::new(3, CondPattern::Edge(CondChar::One))).is_err());
        // underspecified condition
        assert!(line_frequency(
            &layout,
            &LineId::new(3, CondPattern::Interior(CondChar::Any, CondChar::One))
        )
        .is_err());
    }

    #[test]
    fn line_table_counts() {
        for spins in 2..=6 {
            let layout = ChainLayout::default_layout(spins).unwrap();
            let table = layout.line_table();
            assert_eq!(table.len(), 4 * spins.saturating_sub(2) + 4);
            for spin in 1..=spins {
                let n = table.iter().filter(|l| l.spin == spin).count();
                if spin == 1 || spin == spins {
                    assert_eq!(n, 2);
                } else {
                    assert_eq!(n, 4);
                }
            }
        }
    }

    #[test]
    fn default_layout_is_addressable() {
        // Enumerating the default table by the line formula: interior shifts
        // {0, 1, 3, 4} give a within-spin gap of 1, and the 10-unit base
        // spacing keeps cross-spin gaps at 6 or more.
        let layout = ChainLayout::default_layout(8).unwrap();
        let report = addressability_report(&layout);
        assert!(report.addressable);
        assert!(report.collisions.is_empty());
        assert_eq!(report.min_gap, 1.0);
    }

    #[test]
    fn equal_couplings_collide() {
        let layout = ChainLayout::with_rule(5, 100.0, 10.0, (2.0, 2.0), 0.1).unwrap();
        let report = addressability_report(&layout);
        assert!(!report.addressable);
        // omega^{01}_n == omega^{10}_n for every interior spin
        assert!(report.collisions.iter().any(|c| {
            c.gap == 0.0 && c.a.spin == c.b.spin
        }));
    }

    #[test]
    fn equal_frequencies_not_addressable() {
        let layout = ChainLayout::new(vec![100.0; 4], vec![1.0, 3.0, 1.0], 0.1).unwrap();
        let report = addressability_report(&layout);
        assert!(!report.addressable);
    }

    #[test]
    fn cond_matching() {
        let layout = ChainLayout::default_layout(4).unwrap();
        // |1>|100>: spin1 = 1, spin2 = 1, spin3 = 0, spin4 = 0
        let basis: BasisIndex = 0b0011;
        assert!(cond_matches(basis, 2, &CondPattern::parse("10").unwrap(), &layout));
        assert!(!cond_matches(basis, 2, &CondPattern::parse("11").unwrap(), &layout));
        for spin in 1..=4 {
            let any = CondPattern::any_for(spin, 4);
            for b in 0..16u32 {
                assert!(cond_matches(b, spin, &any, &layout));
            }
        }
    }

    #[test]
    fn layout_construction_errors() {
        assert!(ChainLayout::new(vec![1.0], vec![], 0.1).is_err());
        assert!(ChainLayout::new(vec![1.0, 2.0], vec![1.0], 0.0).is_err());
        assert!(ChainLayout::new(vec![1.0, 2.0, 3.0], vec![1.0], 0.1).is_err());
    }
}
