use proptest::prelude::*;
use qmem::mux::{
    execute_conversion, mode_grid, parse_schedule, plan_conversion, ChannelPayload, ModeId,
    MuxCalibration, PulseTimeline, TimingParams,
};
use qmem::qutrit::QutritKet;

fn plan(text: &str) -> PulseTimeline {
    plan_conversion(&parse_schedule(text).unwrap(), &TimingParams::default()).unwrap()
}

fn outputs(p: &PulseTimeline) -> Vec<(ModeId, ModeId, u64)> {
    let mut v: Vec<_> = p.outputs().map(|(c, o)| (c.source, o.mode, (o.fraction * 1e9) as u64)).collect();
    v.sort();
    v
}

proptest! {
    #[test]
    fn grid_size_is_product(nf in 1u32..=8, nt in 1u32..=8, ns in 1u32..=8) {
        let g = mode_grid(nf, nt, ns).unwrap();
        prop_assert_eq!(g.len(), (nf * nt * ns) as usize);
        let mut dedup = g.clone();
        dedup.sort();
        dedup.dedup();
        prop_assert_eq!(dedup.len(), g.len());
    }

    #[test]
    fn retime_and_shift_commute(nf in 1u32..=4, nt in 1u32..=4, f in 1u32..=4, t in 1u32..=4, f2 in 1u32..=4, t2 in 1u32..=4) {
        prop_assume!(f <= nf && f2 <= nf && t <= nt && t2 <= nt);
        let a = format!("grid {nf} {nt}\nf{f}t{t} shift f{f2}\nf{f}t{t} retime t{t2}\n");
        let b = format!("grid {nf} {nt}\nf{f}t{t} retime t{t2}\nf{f}t{t} shift f{f2}\n");
        let (pa, pb) = (plan(&a), plan(&b));
        prop_assert_eq!(outputs(&pa), outputs(&pb));
        prop_assert_eq!(outputs(&pa)[0].1, ModeId::qutrit(f2, t2));
    }

    #[test]
    fn split_conserves_photons(r in 0.01f64..0.99, extra in 0.0f64..1.0, mu in 0.01f64..5.0) {
        let r2 = (1.0 - r) * extra.max(0.01);
        let p = plan(&format!("f1t1 split t1 t2 {r} 0.0 {r2}\n"));
        let payload = [ChannelPayload::qutrit(ModeId::qutrit(1, 1), QutritKet::psi1().to_density(), mu)];
        let ex = execute_conversion(&payload, &p, &MuxCalibration::default(), None, 1, 0).unwrap();
        let total: f64 = ex.outputs.iter().map(|o| o.mean_photons).sum();
        prop_assert!(total <= mu * (1.0 + 1e-12));
        prop_assert!((total - mu * (r + r2)).abs() < 1e-12 * mu.max(1.0));
    }
}
