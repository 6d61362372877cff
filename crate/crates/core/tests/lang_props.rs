//! Property tests for the pulse language: text round-trips, structural
//! reversal, and reversal soundness under execution.

use proptest::prelude::*;

use esrsim::chain::{ChainLayout, CondChar, CondPattern};
use esrsim::lang::{parse, Instruction, MacroRef, MatchPattern, PiAngle, Program};
use esrsim::state::{GradedState, GradientStep, Pulse};

const SPINS: usize = 5;

fn cond_char() -> impl Strategy<Value = CondChar> {
    prop_oneof![
        Just(CondChar::Zero),
        Just(CondChar::One),
        Just(CondChar::Any)
    ]
}

fn cond_for(spin: usize) -> BoxedStrategy<CondPattern> {
    if spin == 1 || spin == SPINS {
        cond_char().prop_map(CondPattern::Edge).boxed()
    } else {
        (cond_char(), cond_char())
            .prop_map(|(l, r)| CondPattern::Interior(l, r))
            .boxed()
    }
}

fn angle() -> impl Strategy<Value = PiAngle> {
    // exact rationals within the pulse range
    (proptest::sample::select(vec![
        (1i64, 1i64),
        (-1, 1),
        (1, 2),
        (-1, 2),
        (1, 4),
        (3, 4),
        (-3, 4),
        (2, 1),
        (1, 8),
    ]))
    .prop_map(|(n, d)| PiAngle::new(n, d))
}

fn pulse() -> impl Strategy<Value = Pulse> {
    (1..=SPINS)
        .prop_flat_map(|spin| (Just(spin), cond_for(spin), angle(), angle()))
        .prop_map(|(spin, cond, a, p)| Pulse {
            spin,
            cond,
            angle: a,
            phase: p,
        })
}

fn instruction(depth: u32) -> BoxedStrategy<Instruction> {
    let leaf = prop_oneof![
        pulse().prop_map(Instruction::Pulse),
        prop_oneof![Just(1i8), Just(-1i8)]
            .prop_map(|sign| Instruction::Gradient(GradientStep { sign })),
        Just(Instruction::Macro(MacroRef::TurnOn)),
        Just(Instruction::Macro(MacroRef::Kill)),
        Just(Instruction::Macro(MacroRef::Prepare)),
        (1..=SPINS - 1).prop_map(|k| Instruction::Macro(MacroRef::ZMatch(k))),
        proptest::collection::vec(any::<bool>(), 1..SPINS)
            .prop_map(|bits| Instruction::Macro(MacroRef::Match(
                MatchPattern::from_bits(bits).unwrap()
            ))),
    ];
    if depth == 0 {
        leaf.boxed()
    } else {
        prop_oneof![
            8 => leaf,
            1 => proptest::collection::vec(instruction(depth - 1), 1..4)
                .prop_map(|v| Instruction::Reverse(Program::new(v))),
        ]
        .boxed()
    }
}

fn program() -> impl Strategy<Value = Program> {
    proptest::collection::vec(instruction(2), 0..12).prop_map(Program::new)
}

/// Programs without reversal blocks: reversal is a structural involution on
/// these (a reversal block itself reverses to its spliced contents, which is
/// only a semantic identity).
fn block_free_program() -> impl Strategy<Value = Program> {
    proptest::collection::vec(instruction(0), 0..12).prop_map(Program::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn emit_parse_round_trip(p in program()) {
        let text = p.emit();
        let q = parse(&text).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn reverse_is_involutive_without_blocks(p in block_free_program()) {
        prop_assert_eq!(p.reverse().reverse(), p);
    }

    #[test]
    fn double_reverse_is_semantic_identity(p in program()) {
        let layout = ChainLayout::default_layout(SPINS).unwrap();
        let a = p.expand(&layout).unwrap();
        let b = p.reverse().reverse().expand(&layout).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn reversal_inverts_evolution(p in program(), basis in 0u32..32) {
        let layout = ChainLayout::default_layout(SPINS).unwrap();
        let forward = p.expand(&layout).unwrap();
        let backward = p.reverse().expand(&layout).unwrap();
        let mut state: GradedState<f64> = GradedState::basis(&layout, basis).unwrap();
        let initial = state.clone();
        state.apply_steps(&forward, &layout).unwrap();
        state.apply_steps(&backward, &layout).unwrap();
        prop_assert!(initial.fidelity(&state) >= 1.0 - 1e-12);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pattern_text_round_trip(bits in proptest::collection::vec(any::<bool>(), 1..12)) {
        let p = MatchPattern::from_bits(bits).unwrap();
        let q: MatchPattern = p.to_string().parse().unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn unitarity_on_random_states(pulses in proptest::collection::vec(pulse(), 1..20)) {
        let layout = ChainLayout::default_layout(SPINS).unwrap();
        let mut state: GradedState<f64> = GradedState::basis(&layout, 7).unwrap();
        for p in &pulses {
            state.apply_pulse(p, &layout).unwrap();
        }
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
