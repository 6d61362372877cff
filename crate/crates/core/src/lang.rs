//! Pulse-program text format, macro expansion and exact program reversal.
//!
//! The grammar is token oriented (newlines are ordinary whitespace, `#`
//! comments run to end of line):
//!
//! ```text
//! grad [+|-]                      gradient step (default +)
//! pulse <spin> <cond> <angle> <phase>
//! pi <spin> <cond>                sugar: pulse ... pi 0
//! pi2 <spin> <cond>               sugar: pulse ... 1/2pi 0
//! flip <spin>                     unconditional pi pulse
//! turnon | kill | prepare         named sequences
//! zmatch <k>                      leading-zeros interrogation
//! match <pattern>                 pattern interrogation ({0,1}+)
//! reverse { ... }                 exact reversal of the enclosed block
//! ```
//!
//! Angles are exact rationals times pi (`pi`, `-pi`, `1/2pi`, `0`); numeric
//! conversion happens only when a pulse is applied, so reversal is exact.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_rational::Ratio;

use crate::chain::{ChainLayout, CondChar, CondPattern};
use crate::error::{Error, ParseDiagnostic, Result};
use crate::scalar::Real;
use crate::state::{reverse_steps, ExecStep, GradientStep, Pulse};

/// Exact rational multiple of pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PiAngle(Ratio<i64>);

impl PiAngle {
    pub fn new(num: i64, den: i64) -> PiAngle {
        assert!(den != 0, "zero denominator");
        PiAngle(Ratio::new(num, den))
    }

    pub fn zero() -> PiAngle {
        PiAngle(Ratio::new(0, 1))
    }

    pub fn pi() -> PiAngle {
        PiAngle(Ratio::new(1, 1))
    }

    /// Negation wrapped back into (-2pi, 2pi]; rotations have period 4pi, so
    /// the wrap is exact (R(-2pi) = R(2pi)).
    pub fn negated(self) -> PiAngle {
        let r = -self.0;
        let two = Ratio::new(2i64, 1);
        let four = Ratio::new(4i64, 1);
        let wrapped = r - four * ((r + two) / four).floor();
        PiAngle(if wrapped <= -two { wrapped + four } else { wrapped })
    }

    pub fn is_zero(self) -> bool {
        self.0 == Ratio::new(0, 1)
    }

    /// Pulse angles live in (-2pi, 2pi].
    pub fn in_pulse_range(self) -> bool {
        let two = Ratio::new(2, 1);
        self.0 > -two && self.0 <= two
    }

    pub fn radians<F: Real>(self) -> F {
        let num = F::from_i64(*self.0.numer()).unwrap();
        let den = F::from_i64(*self.0.denom()).unwrap();
        num / den * F::PI()
    }

    /// cos(theta / 2), exact at multiples of pi/2.
    pub fn cos_half<F: Real>(self) -> F {
        let half = self.0 / 2;
        match exact_quarter(half) {
            Some(q) => match q {
                0 => F::one(),
                1 | 3 => F::zero(),
                _ => -F::one(),
            },
            None => {
                let h = F::from_i64(*half.numer()).unwrap() / F::from_i64(*half.denom()).unwrap();
                (h * F::PI()).cos()
            }
        }
    }

    /// sin(theta / 2), exact at multiples of pi/2.
    pub fn sin_half<F: Real>(self) -> F {
        let half = self.0 / 2;
        match exact_quarter(half) {
            Some(q) => match q {
                1 => F::one(),
                0 | 2 => F::zero(),
                _ => -F::one(),
            },
            None => {
                let h = F::from_i64(*half.numer()).unwrap() / F::from_i64(*half.denom()).unwrap();
                (h * F::PI()).sin()
            }
        }
    }

    /// exp(i * theta), exact at multiples of pi/2.
    pub fn phase_factor<F: Real>(self) -> Complex<F> {
        match exact_quarter(self.0) {
            Some(0) => Complex::new(F::one(), F::zero()),
            Some(1) => Complex::new(F::zero(), F::one()),
            Some(2) => Complex::new(-F::one(), F::zero()),
            Some(3) => Complex::new(F::zero(), -F::one()),
            _ => Complex::from_polar(F::one(), self.radians()),
        }
    }
}

/// If `r * pi` is a multiple of `pi/2`, return which quarter of the circle it
/// lands on (0..4).
fn exact_quarter(r: Ratio<i64>) -> Option<u8> {
    let q = r * 2; // now in units of pi/2
    if *q.denom() == 1 {
        Some(q.numer().rem_euclid(4) as u8)
    } else {
        None
    }
}

impl fmt::Display for PiAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (*self.0.numer(), *self.0.denom());
        if n == 0 {
            write!(f, "0")
        } else if d == 1 {
            match n {
                1 => write!(f, "pi"),
                -1 => write!(f, "-pi"),
                _ => write!(f, "{n}pi"),
            }
        } else {
            write!(f, "{n}/{d}pi")
        }
    }
}

impl FromStr for PiAngle {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<PiAngle, String> {
        let s = s.trim();
        if s == "0" {
            return Ok(PiAngle::zero());
        }
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body
            .strip_suffix("pi")
            .ok_or_else(|| format!("`{s}` is not a rational multiple of pi"))?;
        let (num, den) = if body.is_empty() {
            (1i64, 1i64)
        } else if let Some((n, d)) = body.split_once('/') {
            (
                n.parse::<i64>().map_err(|_| format!("bad numerator in `{s}`"))?,
                d.parse::<i64>().map_err(|_| format!("bad denominator in `{s}`"))?,
            )
        } else {
            (
                body.parse::<i64>().map_err(|_| format!("bad factor in `{s}`"))?,
                1,
            )
        };
        if den == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        let r = Ratio::new(if neg { -num } else { num }, den);
        Ok(PiAngle(r))
    }
}

/// Register prefix to interrogate: text over `{0,1}`, matched big-endian
/// against computing spins `2..=k+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchPattern(Vec<bool>);

impl MatchPattern {
    pub fn from_bits(bits: Vec<bool>) -> Result<MatchPattern> {
        if bits.is_empty() {
            return Err(Error::MacroArg("match pattern must be nonempty".into()));
        }
        Ok(MatchPattern(bits))
    }

    /// Big-endian pattern of `width` bits for the register value `value`.
    pub fn from_value(value: u32, width: usize) -> Result<MatchPattern> {
        if width == 0 || width > 32 || (value as u64) >= (1u64 << width) {
            return Err(Error::MacroArg(format!(
                "value {value} does not fit a {width}-bit pattern"
            )));
        }
        MatchPattern::from_bits((0..width).map(|i| (value >> (width - 1 - i)) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// First pattern bit (the character matched against spin 2).
    pub fn leading_bit(&self) -> bool {
        self.0[0]
    }

    /// Register index with bit `i` holding pattern position `i` (spin `i+2`).
    pub fn register_index(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, &b)| acc | ((b as u32) << i))
    }
}

impl fmt::Display for MatchPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for MatchPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<MatchPattern, String> {
        if s.is_empty() {
            return Err("empty pattern".into());
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(format!("pattern `{s}` must be over {{0,1}}")),
            })
            .collect::<std::result::Result<Vec<bool>, String>>()?;
        Ok(MatchPattern(bits))
    }
}

/// Named pulse sequences of the instruction set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MacroRef {
    /// π/2 at the signal spin's 0-line: turns the signal on for `|σ>|0A>`.
    TurnOn,
    /// π/2 at the signal spin's 1-line: kills the `|σ>|1A>` branch signal.
    Kill,
    /// The preparation sequence (ladder up on `10` lines, looks-left ladder
    /// down, final signal flip).
    Prepare,
    /// Leading-zeros interrogation of depth `k`.
    ZMatch(usize),
    /// Pattern interrogation: flip-conjugated `zmatch`.
    Match(MatchPattern),
}

/// One parsed instruction.
#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Pulse(Pulse),
    Gradient(GradientStep),
    Macro(MacroRef),
    Reverse(Program),
}

/// Ordered instruction list.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub instructions: Vec<Instruction>,
}

impl Program {
    pub fn new(instructions: Vec<Instruction>) -> Program {
        Program { instructions }
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Parse program text, collecting every diagnostic before failing.
    pub fn parse(text: &str) -> Result<Program> {
        parse(text)
    }

    /// Expand macros and reversal blocks into a flat executable step list.
    pub fn expand(&self, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
        expand(self, layout)
    }

    /// Structural reversal: reversed order, angles and gradient signs negated,
    /// macros wrapped, nested reversal blocks unwrapped.
    pub fn reverse(&self) -> Program {
        reverse(self)
    }

    /// Canonical text form; `parse(emit(p))` is structurally `p`.
    pub fn emit(&self) -> String {
        emit(self)
    }
}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

struct Token {
    line: usize,
    text: String,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let spaced = body.replace('{', " { ").replace('}', " } ");
        for word in spaced.split_whitespace() {
            tokens.push(Token {
                line,
                text: word.to_string(),
            });
        }
    }
    tokens
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseDiagnostic>,
}

const KEYWORDS: &[&str] = &[
    "grad", "pulse", "pi", "pi2", "flip", "turnon", "kill", "prepare", "zmatch", "match",
    "reverse", "}",
];

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&mut self, line: usize, message: String) {
        self.errors.push(ParseDiagnostic { line, message });
        // line-oriented recovery: resume at the next source line
        while let Some(t) = self.peek() {
            if t.line > line {
                break;
            }
            self.pos += 1;
        }
    }

    fn arg(&mut self, line: usize, what: &str) -> Option<(usize, String)> {
        // arguments must sit on the instruction's own line; "pi" doubles as an
        // angle token, any other keyword ends the form
        match self.peek() {
            Some(t)
                if t.line == line && (!KEYWORDS.contains(&t.text.as_str()) || t.text == "pi") =>
            {
                let t = self.next().unwrap();
                Some((t.line, t.text.clone()))
            }
            _ => {
                self.error_at(line, format!("missing {what}"));
                None
            }
        }
    }

    fn spin_arg(&mut self, line: usize) -> Option<usize> {
        let (l, text) = self.arg(line, "spin index")?;
        match text.parse::<usize>() {
            Ok(s) if s >= 1 => Some(s),
            _ => {
                self.error_at(l, format!("invalid spin index `{text}`"));
                None
            }
        }
    }

    fn cond_arg(&mut self, line: usize) -> Option<CondPattern> {
        let (l, text) = self.arg(line, "condition pattern")?;
        match CondPattern::parse(&text) {
            Some(c) => Some(c),
            None => {
                self.error_at(l, format!("cond `{text}` invalid: expected 1-2 chars over 0/1/X"));
                None
            }
        }
    }

    fn angle_arg(&mut self, line: usize, what: &str) -> Option<PiAngle> {
        let (l, text) = self.arg(line, what)?;
        match text.parse::<PiAngle>() {
            Ok(a) => Some(a),
            Err(e) => {
                self.error_at(l, e);
                None
            }
        }
    }

    fn push_pulse(
        &mut self,
        out: &mut Vec<Instruction>,
        line: usize,
        spin: usize,
        cond: CondPattern,
        angle: PiAngle,
        phase: PiAngle,
    ) {
        match Pulse::new(spin, cond, angle, phase) {
            Ok(p) => out.push(Instruction::Pulse(p)),
            Err(e) => self.error_at(line, e.to_string()),
        }
    }

    fn block(&mut self, nested: bool) -> Vec<Instruction> {
        let mut out = Vec::new();
        while let Some(tok) = self.next() {
            let line = tok.line;
            let word = tok.text.clone();
            match word.as_str() {
                "}" => {
                    if nested {
                        return out;
                    }
                    self.errors.push(ParseDiagnostic {
                        line,
                        message: "unmatched `}`".into(),
                    });
                }
                "grad" => {
                    let sign = match self.peek().filter(|t| t.line == line).map(|t| t.text.as_str())
                    {
                        Some("+") => {
                            self.pos += 1;
                            1
                        }
                        Some("-") => {
                            self.pos += 1;
                            -1
                        }
                        _ => 1,
                    };
                    out.push(Instruction::Gradient(GradientStep { sign }));
                }
                "pulse" => {
                    let Some(spin) = self.spin_arg(line) else { continue };
                    let Some(cond) = self.cond_arg(line) else { continue };
                    let Some(angle) = self.angle_arg(line, "angle") else { continue };
                    let Some(phase) = self.angle_arg(line, "phase") else { continue };
                    self.push_pulse(&mut out, line, spin, cond, angle, phase);
                }
                "pi" => {
                    let Some(spin) = self.spin_arg(line) else { continue };
                    let Some(cond) = self.cond_arg(line) else { continue };
                    self.push_pulse(&mut out, line, spin, cond, PiAngle::pi(), PiAngle::zero());
                }
                "pi2" => {
                    let Some(spin) = self.spin_arg(line) else { continue };
                    let Some(cond) = self.cond_arg(line) else { continue };
                    self.push_pulse(&mut out, line, spin, cond, PiAngle::new(1, 2), PiAngle::zero());
                }
                "flip" => {
                    let Some(spin) = self.spin_arg(line) else { continue };
                    // parsing is layout-free; edge-spin arity of the all-X
                    // condition is normalized at expansion time
                    out.push(Instruction::Pulse(Pulse {
                        spin,
                        cond: CondPattern::Interior(CondChar::Any, CondChar::Any),
                        angle: PiAngle::pi(),
                        phase: PiAngle::zero(),
                    }));
                }
                "turnon" => out.push(Instruction::Macro(MacroRef::TurnOn)),
                "kill" => out.push(Instruction::Macro(MacroRef::Kill)),
                "prepare" => out.push(Instruction::Macro(MacroRef::Prepare)),
                "zmatch" => {
                    let Some((l, text)) = self.arg(line, "zero count") else { continue };
                    match text.parse::<usize>() {
                        Ok(k) if k >= 1 => out.push(Instruction::Macro(MacroRef::ZMatch(k))),
                        _ => self.error_at(l, format!("invalid zmatch depth `{text}`")),
                    }
                }
                "match" => {
                    let Some((l, text)) = self.arg(line, "pattern") else { continue };
                    match text.parse::<MatchPattern>() {
                        Ok(p) => out.push(Instruction::Macro(MacroRef::Match(p))),
                        Err(e) => self.error_at(l, e),
                    }
                }
                "reverse" => match self.peek() {
                    Some(t) if t.text == "{" => {
                        self.pos += 1;
                        let inner = self.block(true);
                        out.push(Instruction::Reverse(Program::new(inner)));
                    }
                    _ => self.error_at(line, "expected `{` after reverse".into()),
                },
                other => {
                    let msg = format!("unknown keyword `{other}`");
                    self.error_at(line, msg);
                }
            }
        }
        if nested {
            self.errors.push(ParseDiagnostic {
                line: self.tokens.last().map(|t| t.line).unwrap_or(0),
                message: "unterminated reverse block".into(),
            });
        }
        out
    }
}

pub fn parse(text: &str) -> Result<Program> {
    let mut parser = Parser {
        tokens: tokenize(text),
        pos: 0,
        errors: Vec::new(),
    };
    let instructions = parser.block(false);
    if parser.errors.is_empty() {
        Ok(Program::new(instructions))
    } else {
        Err(Error::Parse(parser.errors))
    }
}

// ---------------------------------------------------------------------------
// expansion
// ---------------------------------------------------------------------------

fn interior(l: CondChar, r: CondChar) -> CondPattern {
    CondPattern::Interior(l, r)
}

/// Flat pulses of the preparation sequence for a register of `n` computing
/// spins: `10`-ladder up spins `2..=n`, looks-left ladder down, signal flip.
pub fn prepare_steps(layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    let n = layout.register_size();
    if n < 2 {
        return Err(Error::MacroArg(format!(
            "prepare needs a register of at least 2 computing spins, got {n}"
        )));
    }
    let mut steps = Vec::with_capacity(2 * n - 1);
    for spin in 2..=n {
        steps.push(ExecStep::Pulse(Pulse::pi(spin, interior(CondChar::One, CondChar::Zero))));
    }
    for spin in (2..=n).rev() {
        steps.push(ExecStep::Pulse(Pulse::pi(spin, interior(CondChar::Zero, CondChar::Any))));
    }
    steps.push(ExecStep::Pulse(Pulse::pi(1, CondPattern::Edge(CondChar::One))));
    Ok(steps)
}

/// Flat pulses of the depth-`k` leading-zeros interrogation: `10`-ladder up to
/// spin `k-1`, `11` mark at spin `k`, ladder back down, signal pulse at the
/// 0-line.
pub fn zmatch_steps(k: usize, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    let n = layout.register_size();
    if k == 0 || k > n {
        return Err(Error::MacroArg(format!(
            "zmatch depth {k} outside 1..={n}"
        )));
    }
    let mut steps = Vec::new();
    if k >= 2 {
        for spin in 2..k {
            steps.push(ExecStep::Pulse(Pulse::pi(spin, interior(CondChar::One, CondChar::Zero))));
        }
        steps.push(ExecStep::Pulse(Pulse::pi(k, interior(CondChar::One, CondChar::One))));
        for spin in (2..k).rev() {
            steps.push(ExecStep::Pulse(Pulse::pi(spin, interior(CondChar::One, CondChar::Zero))));
        }
    }
    steps.push(ExecStep::Pulse(Pulse::pi(1, CondPattern::Edge(CondChar::Zero))));
    Ok(steps)
}

/// Flat pulses of the pattern interrogation: conjugate the zeros interrogation
/// by unconditional flips at the pattern's 1 positions.
pub fn match_steps(pattern: &MatchPattern, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    let n = layout.register_size();
    if pattern.len() > n {
        return Err(Error::PatternTooLong {
            pattern: pattern.to_string(),
            register: n,
        });
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
    steps.extend(zmatch_steps(pattern.len(), layout)?);
    for &spin in flips.iter().rev() {
        steps.push(ExecStep::Pulse(Pulse::flip(spin, layout.total_spins())));
    }
    Ok(steps)
}

fn expand_macro(m: &MacroRef, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    match m {
        MacroRef::TurnOn => Ok(vec![ExecStep::Pulse(Pulse::pi_half(
            1,
            CondPattern::Edge(CondChar::Zero),
        ))]),
        MacroRef::Kill => Ok(vec![ExecStep::Pulse(Pulse::pi_half(
            1,
            CondPattern::Edge(CondChar::One),
        ))]),
        MacroRef::Prepare => prepare_steps(layout),
        MacroRef::ZMatch(k) => zmatch_steps(*k, layout),
        MacroRef::Match(p) => match_steps(p, layout),
    }
}

/// Normalize an all-X condition written with the wrong arity for its spin;
/// `flip` parses layout-free, so edge spins need the single-character form.
fn fix_flip_arity(p: &Pulse, layout: &ChainLayout) -> Pulse {
    if layout.validate_cond(p.spin, &p.cond).is_err()
        && p.cond == CondPattern::Interior(CondChar::Any, CondChar::Any)
    {
        Pulse {
            cond: CondPattern::any_for(p.spin, layout.total_spins()),
            ..*p
        }
    } else {
        *p
    }
}

pub fn expand(program: &Program, layout: &ChainLayout) -> Result<Vec<ExecStep>> {
    let mut steps = Vec::new();
    for instr in &program.instructions {
        match instr {
            Instruction::Pulse(p) => {
                let p = fix_flip_arity(p, layout);
                layout.validate_cond(p.spin, &p.cond)?;
                steps.push(ExecStep::Pulse(p));
            }
            Instruction::Gradient(g) => steps.push(ExecStep::Gradient(*g)),
            Instruction::Macro(m) => steps.extend(expand_macro(m, layout)?),
            Instruction::Reverse(inner) => {
                let inner_steps = expand(inner, layout)?;
                steps.extend(reverse_steps(&inner_steps));
            }
        }
    }
    Ok(steps)
}

// ---------------------------------------------------------------------------
// reversal and emission
// ---------------------------------------------------------------------------

pub fn reverse(program: &Program) -> Program {
    let mut out = Vec::new();
    for instr in program.instructions.iter().rev() {
        match instr {
            Instruction::Pulse(p) => out.push(Instruction::Pulse(p.inverse())),
            Instruction::Gradient(g) => out.push(Instruction::Gradient(g.inverse())),
            Instruction::Macro(m) => out.push(Instruction::Reverse(Program::new(vec![
                Instruction::Macro(m.clone()),
            ]))),
            // the reverse of a reversal block is the block itself, spliced
            Instruction::Reverse(inner) => out.extend(inner.instructions.iter().cloned()),
        }
    }
    Program::new(out)
}

fn emit_into(program: &Program, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    for instr in &program.instructions {
        match instr {
            Instruction::Pulse(p) => {
                out.push_str(&format!(
                    "{pad}pulse {} {} {} {}\n",
                    p.spin, p.cond, p.angle, p.phase
                ));
            }
            Instruction::Gradient(g) => {
                out.push_str(&format!("{pad}grad {}\n", if g.sign >= 0 { "+" } else { "-" }));
            }
            Instruction::Macro(m) => {
                let text = match m {
                    MacroRef::TurnOn => "turnon".to_string(),
                    MacroRef::Kill => "kill".to_string(),
                    MacroRef::Prepare => "prepare".to_string(),
                    MacroRef::ZMatch(k) => format!("zmatch {k}"),
                    MacroRef::Match(p) => format!("match {p}"),
                };
                out.push_str(&format!("{pad}{text}\n"));
            }
            Instruction::Reverse(inner) => {
                out.push_str(&format!("{pad}reverse {{\n"));
                emit_into(inner, indent + 1, out);
                out.push_str(&format!("{pad}}}\n"));
            }
        }
    }
}

pub fn emit(program: &Program) -> String {
    let mut out = String::new();
    emit_into(program, 0, &mut out);
    out
}

/// Render an expanded step list as canonical program text (for report audit).
pub fn emit_steps(steps: &[ExecStep]) -> String {
    let instructions = steps
        .iter()
        .map(|s| match s {
            ExecStep::Pulse(p) => Instruction::Pulse(*p),
            ExecStep::Gradient(g) => Instruction::Gradient(*g),
        })
        .collect();
    emit(&Program::new(instructions))
}

/// Spins touched by a step list (diagnostics).
pub fn touched_spins(steps: &[ExecStep]) -> BTreeSet<usize> {
    steps
        .iter()
        .filter_map(|s| match s {
            ExecStep::Pulse(p) => Some(p.spin),
            _ => None,
        })
        .collect()
}
