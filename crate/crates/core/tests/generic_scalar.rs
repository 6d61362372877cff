//! The engine is generic over the real scalar; a single-precision run must
//! agree with double precision at single-precision tolerance.

use esrsim::chain::ChainLayout;
use esrsim::ensemble::{Ensemble, Mode};
use esrsim::lang::parse;
use esrsim::thermal::ThermalSpec;

#[test]
fn f32_engine_tracks_f64() {
    let layout = ChainLayout::default_layout(4).unwrap();
    let thermal = ThermalSpec::scaled(0.9, &layout);
    let program = parse("turnon\ngrad +\nprepare\ngrad +\npi2 3 X1").unwrap();

    let mut double: Ensemble<f64> = Ensemble::thermal(&layout, &thermal, Mode::Exact, 0.0).unwrap();
    double.run_program(&program).unwrap();
    let mut single: Ensemble<f32> = Ensemble::thermal(&layout, &thermal, Mode::Exact, 0.0).unwrap();
    single.run_program(&program).unwrap();

    assert!((single.aggregate_norm() - 1.0).abs() < 1e-5);
    for id in layout.line_table() {
        let a = double.line_amplitude(&id);
        let b = single.line_amplitude(&id);
        assert!(
            (a.re - b.re as f64).abs() < 1e-5 && (a.im - b.im as f64).abs() < 1e-5,
            "line {id}: {a} vs {b}"
        );
    }
}
