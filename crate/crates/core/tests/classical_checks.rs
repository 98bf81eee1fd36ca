use cavity_exciton::classical::{
    build_classical_generator, classical_propagate, classical_sweep, ClassicalParams,
};
use cavity_exciton::ensemble::SweepConfig;
use cavity_exciton::{sample_disorder, ModelParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probability_is_conserved(n in 1usize..12, panel in 0usize..3, w in 0.0..0.3f64, g in 0.0..0.6f64, seed in any::<u64>()) {
        let model = ModelParams::reference(n).with_disorder(w * 2.11).with_coupling(g);
        let cp = ClassicalParams::panel(panel, model);
        let q = build_classical_generator(&cp, &sample_disorder(&cp.model, seed)).unwrap();
        let mut p0 = vec![0.0; n + 2];
        p0[0] = 1.0;
        for t in [0.1, 1.0, 10.0] {
            let steps = 100;
            let traj = classical_propagate(&q, &p0, t / steps as f64, steps).unwrap();
            let last = traj.last().unwrap();
            prop_assert!((last.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert!(last.iter().all(|&x| x >= -1e-12));
        }
    }
}

#[test]
fn classical_sweep_runs_every_panel() {
    let cfg = SweepConfig::steady(vec![0.0, 0.1], vec![0.4], 4, 1);
    for k in 0..3 {
        let cp = ClassicalParams::panel(k, ModelParams::reference(10));
        let pts = classical_sweep(&cp, &cfg, None).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.stats.failures == 0 && p.stats.samples_used == 4));
    }
}
