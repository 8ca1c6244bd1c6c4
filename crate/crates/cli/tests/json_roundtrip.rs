use lo_dynamics::barrier::BarrierCase2Report;
use lo_dynamics::geometry::{GeometryReport, JordanAngle};
use lo_dynamics::integrator::{CrossingReport, PhiHit, PsiZero};
use lo_dynamics_cli::commands::{BarrierReport, DensityCurve, MapsCheckReport};
use lo_dynamics_cli::output::to_json;
use proptest::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        -1e3..1e3f64,
        Just(0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

fn round_trips<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(v: &T) {
    let text = to_json(v).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, v, "{text}");
}

proptest! {
    #[test]
    fn crossing_reports(zs in prop::collection::vec((finite(), finite(), finite(), prop::bool::ANY), 0..6),
                        hs in prop::collection::vec((finite(), finite()), 0..6),
                        target in finite()) {
        let rep = CrossingReport {
            psi_zeros: zs.iter().map(|&(t, phi, dphi, up)| PsiZero { t, phi, dphi, direction: if up { 1 } else { -1 } }).collect(),
            phi_hits: hs.iter().map(|&(t, d)| PhiHit { t, d }).collect(),
            target,
        };
        round_trips(&rep);
    }

    #[test]
    fn geometry_reports(v in prop::collection::vec(finite(), 6), m in 0u32..20) {
        let rep = GeometryReport {
            n: m + 2, p: m + 1, k: 2,
            cos_alpha: v[0], volume_ratio: v[1],
            jordan_angles: [
                JordanAngle { angle: v[2], multiplicity: m },
                JordanAngle { angle: v[3], multiplicity: 1 },
                JordanAngle { angle: v[4], multiplicity: 1 },
            ],
            slope_w: v[5],
        };
        round_trips(&rep);
    }

    #[test]
    fn barrier_reports(v in prop::collection::vec(finite(), 4), cm in prop::option::of(finite()), pass in prop::bool::ANY) {
        let rep = BarrierReport::TypeII(BarrierCase2Report {
            n: 3, p: 2, k: 4,
            g_grid_margin: v[0], g_grid_margin_direct: v[1],
            fs_min: v[2], fs_argmin: v[3],
            cycle_margin: cm, cycle_bound_slack: cm.map(|x| -x),
            pass,
        });
        round_trips(&rep);
    }

    #[test]
    fn density_and_maps_reports(r in prop::collection::vec(finite(), 0..8), x in finite(), seed in any::<u64>()) {
        round_trips(&DensityCurve { n: 3, p: 2, k: 2, theta_infinity: x, thetas: r.iter().map(|v| -v).collect(), radii: r });
        round_trips(&MapsCheckReport {
            map: "hopf".into(), theta: x, samples: 10, seed, fd_step: 1e-5,
            max_deviation: x.abs(), max_singular_value_error: 0.0,
        });
    }
}
