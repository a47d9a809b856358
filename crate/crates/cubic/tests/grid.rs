use cubic::dynamics::{
    AnalyticPacket, DissipationProfile, DynamicsConfig, GaussianPacket, Pipeline,
};
use cubic::grid::{cn_autocorrelation, cn_step, grid_overlap, CnTrace, CrankNicolson, GridConfig};
use cubic::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

type C = Complex64;

fn standard() -> AnalyticPacket {
    AnalyticPacket::gaussian(GaussianPacket::standard())
}

fn sample(packet: &AnalyticPacket, q: &[f64]) -> Vec<C> {
    q.iter()
        .map(|&x| packet.eval(C::new(x, 0.0)).unwrap())
        .collect()
}

fn norm(v: &[C], h: f64) -> f64 {
    grid_overlap(v, v, h).re.sqrt()
}

fn oracle_times() -> Vec<f64> {
    let mut t: Vec<f64> = (0..=500).map(|i| 0.05 * i as f64).collect();
    t.extend((0..=100).map(|i| 19.2 + 0.002 * i as f64));
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

fn weak_oracle() -> &'static CnTrace {
    static TRACE: OnceLock<CnTrace> = OnceLock::new();
    TRACE.get_or_init(|| {
        cn_autocorrelation(
            &standard(),
            &oracle_times(),
            &GridConfig::default(),
            C::new(0.04, 0.0),
        )
        .unwrap()
    })
}

#[test]
fn ground_state_is_stationary() {
    let cfg = GridConfig {
        half_width: 10.0,
        ..Default::default()
    };
    let q = cfg.points();
    let psi: Vec<C> = q
        .iter()
        .map(|x| C::new((-x * x / 2.0).exp() * PI.powf(-0.25), 0.0))
        .collect();
    let next = cn_step(&psi, &cfg, C::new(0.0, 0.0)).unwrap();
    let h = cfg.spacing;
    let ov = grid_overlap(&next, &psi, h).norm() / (norm(&next, h) * norm(&psi, h));
    assert!((ov - 1.0).abs() < 1e-10, "{ov}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn unitary_for_real_potential(seed in proptest::collection::vec(-1.0f64..1.0, 2 * 499)) {
        let cfg = GridConfig { half_width: 5.0, spacing: 0.02, time_step: 0.01 };
        let psi: Vec<C> = seed.chunks(2).map(|p| C::new(p[0], p[1])).collect();
        let next = cn_step(&psi, &cfg, C::new(0.0, 0.0)).unwrap();
        let (a, b) = (norm(&psi, cfg.spacing), norm(&next, cfg.spacing));
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

#[test]
fn zero_and_mismatched_input() {
    let cfg = GridConfig {
        half_width: 5.0,
        ..Default::default()
    };
    let n = cfg.points().len();
    let zero = cn_step(&vec![C::new(0.0, 0.0); n], &cfg, C::new(0.04, 0.0)).unwrap();
    assert!(zero.iter().all(|z| *z == C::new(0.0, 0.0)));
    assert!(cn_step(&vec![C::new(0.0, 0.0); n + 1], &cfg, C::new(0.04, 0.0)).is_err());
    assert!(GridConfig {
        half_width: 1.0,
        spacing: 0.3,
        time_step: 0.1
    }
    .validate()
    .is_err());
    assert!(GridConfig {
        half_width: 1.0,
        spacing: 0.1,
        time_step: 0.0
    }
    .validate()
    .is_err());
}

#[test]
fn harmonic_revival() {
    let cfg = GridConfig {
        half_width: 20.0,
        spacing: 0.01,
        time_step: 0.001,
    };
    let trace = cn_autocorrelation(&standard(), &[0.0, PI], &cfg, C::new(0.0, 0.0)).unwrap();
    assert!((trace.points[0].1 - 1.0).abs() < 1e-12);
    assert!(
        (trace.points[1].1 - 1.0).abs() < 1e-6,
        "{}",
        trace.points[1].1
    );
    assert!(trace.warnings.is_empty());
}

fn p_at_ten(cfg: GridConfig) -> f64 {
    cn_autocorrelation(&standard(), &[10.0], &cfg, C::new(0.04, 0.0))
        .unwrap()
        .points[0]
        .1
}

#[test]
fn second_order_in_time() {
    let base = GridConfig {
        half_width: 100.0,
        spacing: 0.02,
        time_step: 0.02,
    };
    let p: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|f| {
            p_at_ten(GridConfig {
                time_step: base.time_step * f,
                ..base
            })
        })
        .collect();
    let ratio = (p[0] - p[1]) / (p[1] - p[2]);
    assert!((3.5..4.5).contains(&ratio), "{ratio} from {p:?}");
}

#[test]
fn second_order_in_space() {
    let base = GridConfig {
        half_width: 100.0,
        spacing: 0.08,
        time_step: 0.002,
    };
    let p: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|f| {
            p_at_ten(GridConfig {
                spacing: base.spacing * f,
                ..base
            })
        })
        .collect();
    let ratio = (p[0] - p[1]) / (p[1] - p[2]);
    assert!((3.5..4.5).contains(&ratio), "{ratio} from {p:?}");
}

#[test]
fn oracle_stays_clear_of_the_walls() {
    let trace = weak_oracle();
    assert!(trace.warnings.is_empty(), "{:?}", trace.warnings);
    assert!(trace.edge_amplitude < 1e-6);
    let n0 = trace.points[0].3;
    assert!((n0 - 1.0).abs() < 1e-12);
    assert!(trace.points.iter().all(|p| (p.3 - n0).abs() < 1e-6));
}

#[test]
fn oracle_revival_peak() {
    let trace = weak_oracle();
    let best = trace
        .points
        .iter()
        .filter(|p| p.0 > 18.5 && p.0 < 20.0)
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((best.0 - 19.29).abs() <= 0.05, "t = {}", best.0);
    assert!((best.1 - 0.9939).abs() <= 5e-4, "P = {}", best.1);
}

#[test]
fn spectral_pipeline_matches_oracle() {
    let pipe = Pipeline::new(
        C::new(0.04, 0.0),
        standard(),
        DynamicsConfig::default(),
        DissipationProfile::default(),
    )
    .unwrap();
    let trace = weak_oracle();
    let times: Vec<f64> = trace.points.iter().map(|p| p.0).collect();
    let spectral = pipe.autocorrelation(&times).unwrap();
    let worst = spectral
        .iter()
        .zip(&trace.points)
        .map(|(s, o)| (s.p - o.1).abs())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-3, "{worst}");
}

#[test]
fn precomputed_solver_matches_single_steps() {
    let cfg = GridConfig {
        half_width: 8.0,
        spacing: 0.04,
        time_step: 0.01,
    };
    let cn = CrankNicolson::new(cfg, C::new(0.1, 0.0)).unwrap();
    let mut psi = sample(&standard(), cn.points());
    let mut by_step = psi.clone();
    for _ in 0..10 {
        cn.step(&mut psi);
        by_step = cn_step(&by_step, &cfg, C::new(0.1, 0.0)).unwrap();
    }
    assert_eq!(psi, by_step);
}
