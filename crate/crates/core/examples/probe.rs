use iondress::atomstruct::IonSpecies;
use iondress::protocols::*;
use iondress::spin::StateLabel;
use iondress::units;

fn main() {
    let species = IonSpecies::ba137();
    let opts = RunOptions { samples: 60, ..Default::default() };
    let base = GateConfig::demo();

    // scan epsilon around the spectrum-calibrated value
    for off_khz in [-10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0, 18.3] {
        let (_, _,) = (0, 0);
        let cfg = GateConfig {
            epsilon: Some(units::khz(198.54 + off_khz)),
            ..base
        };
        let out = run_gate(&species, &cfg, StateLabel::new(1, 0), &opts).unwrap();
        println!(
            "eps offset {:+6.1} kHz: P(2,0) = {:.6}  P(1,0) = {:.3e}",
            off_khz,
            out.trajectory.final_population(StateLabel::new(2, 0)).unwrap(),
            out.trajectory.final_population(StateLabel::new(1, 0)).unwrap()
        );
    }

    // time trace at the calibrated frequency
    let out = run_gate(&species, &base, StateLabel::new(1, 0), &RunOptions { samples: 30, ..Default::default() }).unwrap();
    println!("timeline at calibrated eps (P(1,0), P(2,0)):");
    for (k, t) in out.trajectory.times.iter().enumerate() {
        if k % 3 == 0 {
            let p10 = out.trajectory.populations[k][0.max(
                // level indices: find them
                0)];
            let _ = p10;
            println!(
                "  t={:6.2} us  P(1,0)={:.5} P(2,0)={:.5}",
                t * 1e6,
                pop(&out, k, StateLabel::new(1, 0)),
                pop(&out, k, StateLabel::new(2, 0)),
            );
        }
    }
}

fn pop(out: &GateOutcome, k: usize, label: StateLabel) -> f64 {
    let idx = out
        .trajectory
        .labels
        .iter()
        .position(|&l| l == label)
        .unwrap();
    out.trajectory.populations[k][idx]
}
