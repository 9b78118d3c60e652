use proptest::prelude::*;

use semcom::allocation::{proportional_triplet_power, rcga_optimize, PowerBudget, RcgaConfig};
use semcom::fading::{f_cdf, FadingParams};
use semcom::harness::ScenarioConfig;
use semcom::linkperf::{delivery_prob, tdp, TdpConvention, TripletCoding};
use semcom::semantics::{
    expected_score, fuse_attention, normalize_heatmap, synth_dataset, triplet_priority, BBox, FusionConvention,
    Heatmap, SynthSpec, Triplet, TripletPattern,
};
use semcom::specfun::{beta_inc_reg, gauss_2f1, ln_gamma};

fn heatmap(w: usize, h: usize) -> impl Strategy<Value = Heatmap> {
    prop::collection::vec(0.0f64..10.0, w * h).prop_map(move |v| Heatmap::new(w, h, v).unwrap())
}

fn bbox(w: usize, h: usize) -> impl Strategy<Value = BBox> {
    (0..w - 1, 0..h - 1)
        .prop_flat_map(move |(x0, y0)| (Just(x0), Just(y0), x0 + 1..=w, y0 + 1..=h))
        .prop_map(|(x0, y0, x1, y1)| BBox::new(x0, y0, x1, y1))
}

fn triplet() -> impl Strategy<Value = Triplet> {
    (heatmap(6, 5), heatmap(6, 5), bbox(6, 5), bbox(6, 5)).prop_map(|(h_sub, h_obj, box_sub, box_obj)| Triplet {
        pattern: TripletPattern::new("man", "on", "street"),
        box_sub,
        box_obj,
        h_sub,
        h_obj,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn gamma_recurrence(a in 0.05f64..80.0) {
        let lhs = ln_gamma(a + 1.0).unwrap();
        let rhs = ln_gamma(a).unwrap() + a.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn incomplete_beta_reflection(a in 0.2f64..40.0, b in 0.2f64..40.0, x in 0.001f64..0.999) {
        let s = beta_inc_reg(a, b, x).unwrap() + beta_inc_reg(b, a, 1.0 - x).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypergeometric_symmetric(a in 0.1f64..6.0, b in 0.1f64..6.0, c in 0.5f64..8.0, z in -5.0f64..0.9) {
        let x = gauss_2f1(a, b, c, z).unwrap();
        let y = gauss_2f1(b, a, c, z).unwrap();
        prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(1e-300), "{} vs {}", x, y);
    }

    #[test]
    fn f_cdf_is_a_distribution(m_f in 0.3f64..12.0, m_s in 1.05f64..12.0, z_bar in 0.05f64..5.0, z in 1e-4f64..50.0) {
        let fp = FadingParams::new(m_f, m_s, z_bar).unwrap();
        let a = f_cdf(z, &fp).unwrap();
        let b = f_cdf(z * 1.1, &fp).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn normalization_idempotent(h in heatmap(5, 4)) {
        let n = normalize_heatmap(&h);
        prop_assert_eq!(normalize_heatmap(&n), n.clone());
        prop_assert!(n.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn fusion_stays_in_unit_range(h in heatmap(5, 4), s in heatmap(5, 4), alpha in 0.0f64..=1.0) {
        for conv in [FusionConvention::Text, FusionConvention::Swapped] {
            let f = fuse_attention(&h, &s, alpha, conv).unwrap();
            prop_assert!(f.values().iter().all(|v| (0.0..=1.0 + 1e-15).contains(v)));
        }
    }

    #[test]
    fn fusion_endpoints(h in heatmap(5, 4), s in heatmap(5, 4)) {
        let nh = normalize_heatmap(&h);
        let ns = normalize_heatmap(&s);
        prop_assert_eq!(fuse_attention(&h, &s, 1.0, FusionConvention::Text).unwrap(), nh.clone());
        prop_assert_eq!(fuse_attention(&h, &s, 0.0, FusionConvention::Text).unwrap(), ns.clone());
        prop_assert_eq!(fuse_attention(&h, &s, 0.0, FusionConvention::Swapped).unwrap(), nh);
        prop_assert_eq!(fuse_attention(&h, &s, 1.0, FusionConvention::Swapped).unwrap(), ns);
    }

    #[test]
    fn priority_scale_invariant(t in triplet(), s in heatmap(6, 5), alpha in 0.0f64..=1.0, c in 0.01f64..100.0) {
        let a = triplet_priority(&t, &s, alpha, FusionConvention::Text).unwrap();
        let scaled = Triplet { h_sub: t.h_sub.scaled(c).unwrap(), h_obj: t.h_obj.scaled(c).unwrap(), ..t.clone() };
        let b = triplet_priority(&scaled, &s.scaled(c).unwrap(), alpha, FusionConvention::Text).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        prop_assert!((0.0..=1.0 + 1e-15).contains(&a));
    }

    #[test]
    fn tdp_monotone_and_complementary(d_t in 1u32..300, frac in 0.0f64..1.0, e in 0.0f64..0.5, de in 0.0f64..0.2) {
        let d_e = ((frac * d_t as f64) as u32).min(d_t - 1);
        let coding = TripletCoding::new(d_t, d_e).unwrap();
        let a = tdp(e, &coding, TdpConvention::Binomial).unwrap();
        let b = tdp((e + de).min(1.0), &coding, TdpConvention::Binomial).unwrap();
        prop_assert!(b >= a - 1e-15);
        let d = delivery_prob(e, &coding).unwrap();
        prop_assert!((a + d - 1.0).abs() < 1e-13);
    }

    #[test]
    fn proportional_split_sums(p in 0.0f64..1e4, prio in prop::collection::vec(0.0f64..5.0, 1..40), c in 0.1f64..10.0) {
        let x = proportional_triplet_power(p, &prio).unwrap();
        let sum: f64 = x.iter().sum();
        prop_assert!((sum - p).abs() <= 1e-12 * p.max(1.0));
        let scaled: Vec<f64> = prio.iter().map(|v| v * c).collect();
        let y = proportional_triplet_power(p, &scaled).unwrap();
        for (a, b) in x.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-12 * p.max(1.0));
        }
    }

    #[test]
    fn score_bounded_by_drop_free(seed in 0u64..1000, d in prop::collection::vec(0.0f64..=1.0, 40)) {
        let spec = SynthSpec { n_images: 8, triplets_per_image: 5, ..SynthSpec::default() };
        let q = vec![TripletPattern::new("woman", "has", "hair")];
        let ds = synth_dataset(&spec, &q, seed).unwrap();
        let delivery: Vec<Vec<f64>> = (0..8).map(|i| d[i * 5..i * 5 + 5].to_vec()).collect();
        let r = expected_score(&ds.users[0], &ds.images, &delivery).unwrap();
        prop_assert!(r.s <= r.s_tilde + 1e-15);
        let full: Vec<Vec<f64>> = vec![vec![1.0; 5]; 8];
        let r1 = expected_score(&ds.users[0], &ds.images, &full).unwrap();
        prop_assert!((r1.s - r1.s_tilde).abs() < 1e-15);
    }
}

fn small_scenario() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.rcga = RcgaConfig { population: 24, max_iter: 12, ..RcgaConfig::default() };
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rcga_feasible_deterministic_and_elitist(seed in 0u64..1_000_000, p in 500.0f64..5000.0) {
        let cfg = small_scenario();
        let sc = cfg.scenario().unwrap();
        let budget = PowerBudget::from_total_power(p);
        let rc = RcgaConfig { seed, ..cfg.rcga.clone() };
        let a = rcga_optimize(&sc, &budget, &rc).unwrap();
        let b = rcga_optimize(&sc, &budget, &rc).unwrap();
        prop_assert_eq!(&a, &b);
        let total: f64 = a.user_powers.iter().sum();
        prop_assert!(a.user_powers.iter().all(|x| *x >= 0.0));
        prop_assert!((total - p).abs() <= 1e-9 * p);
        prop_assert!(a.fitness_history.windows(2).all(|w| w[1] >= w[0]));
        for (u, per_image) in a.triplet_powers.iter().enumerate() {
            let n: usize = per_image.iter().map(Vec::len).sum();
            let sum: f64 = per_image.iter().flatten().sum();
            prop_assert!((sum - n as f64 * a.user_powers[u]).abs() <= 1e-9 * sum.max(1.0));
        }
    }
}
