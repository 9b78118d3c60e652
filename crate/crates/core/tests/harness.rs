use semcom::allocation::{evaluate_allocation, PowerBudget};
use semcom::harness::{
    mc_end_to_end, run_alpha_sweep, run_allocation_surface, run_op_curve, BitFading, ScenarioConfig,
};
use semcom::semantics::{load_dataset, save_dataset};

fn quick() -> ScenarioConfig {
    let mut cfg = ScenarioConfig::from_toml(
        "[op_curve]\nm_f = [1.5, 4.0]\np_dbw = [10.0, 30.0]\n[sweeps]\nalpha = [0.0, 0.5, 1.0]\npower = [1000.0, 2000.0]\nsurface_step = 0.1\n",
    )
    .unwrap();
    cfg.mc.channel_samples = 20_000;
    cfg.rcga.max_iter = 8;
    cfg
}

#[test]
fn runners_are_deterministic_and_self_describing() {
    let cfg = quick();
    let a = run_op_curve(&cfg).unwrap().to_csv(&cfg);
    let b = run_op_curve(&cfg).unwrap().to_csv(&cfg);
    assert_eq!(a, b);
    let head: Vec<&str> = a.lines().take(4).collect();
    assert!(head[0].starts_with("# semcom "));
    assert_eq!(head[1], "# runner: op_curve");
    assert_eq!(head[2], format!("# scenario: {}", cfg.hash()));
    assert_eq!(head[3], "# seed: 2024");

    let mut other = cfg.clone();
    other.seed = 1;
    assert_ne!(cfg.hash(), other.hash());
    assert_ne!(run_op_curve(&other).unwrap().to_csv(&other), a);
}

#[test]
fn alpha_sweep_layout() {
    let cfg = quick();
    let t = run_alpha_sweep(&cfg).unwrap();
    let scheme = t.column_index("scheme").unwrap();
    let count = |s: &str| t.rows.iter().filter(|r| r[scheme].as_str() == Some(s)).count();
    assert_eq!(count("nbs"), 6);
    assert_eq!(count("oa"), 2);
    assert_eq!(count("naive"), 2);
    for r in &t.rows {
        let shares: f64 = (1..=3).map(|k| r[t.column_index(&format!("share_{k}")).unwrap()].as_f64().unwrap()).sum();
        assert!((shares - 1.0).abs() < 1e-9);
    }
}

#[test]
fn surface_contains_grid_and_reference_points() {
    let cfg = quick();
    let t = run_allocation_surface(&cfg).unwrap();
    let kind = t.column_index("kind").unwrap();
    let grid = t.rows.iter().filter(|r| r[kind].as_str() == Some("grid")).count();
    assert_eq!(grid, 66);
    let u = t.column_index("utility").unwrap();
    let best = t
        .rows
        .iter()
        .filter(|r| r[kind].as_str() == Some("grid"))
        .map(|r| r[u].as_f64().unwrap())
        .fold(0.0, f64::max);
    let ga = t.rows.iter().find(|r| r[kind].as_str() == Some("rcga")).unwrap()[u].as_f64().unwrap();
    assert!(ga >= best * 0.98);
}

#[test]
fn drop_free_channel_realizes_the_bound() {
    let mut cfg = ScenarioConfig::default();
    for u in &mut cfg.users {
        u.noise_power = 1e-12;
        u.p_i = 0.0;
    }
    let sc = cfg.scenario().unwrap();
    let alloc = evaluate_allocation(&[1e9; 3], &sc).unwrap();
    let rep = mc_end_to_end(&sc, &alloc, 50, 3, BitFading::PerBit).unwrap();
    for (u, c) in rep.scores.iter().enumerate() {
        assert!((c.mc.mean - sc.upper_bound(u)).abs() < 1e-12);
        assert!(c.mc.std_err < 1e-12);
    }
    assert!(rep.bounded);
}

#[test]
fn end_to_end_is_seeded() {
    let cfg = ScenarioConfig::default();
    let sc = cfg.scenario().unwrap();
    let p = PowerBudget::from_total_power(3000.0).p_total();
    let alloc = evaluate_allocation(&[p / 3.0; 3], &sc).unwrap();
    let a = mc_end_to_end(&sc, &alloc, 200, 9, BitFading::PerBit).unwrap();
    let b = mc_end_to_end(&sc, &alloc, 200, 9, BitFading::PerBit).unwrap();
    assert_eq!(a, b);
    let c = mc_end_to_end(&sc, &alloc, 200, 10, BitFading::PerBit).unwrap();
    assert_ne!(a.utility.mc.mean, c.utility.mc.mean);
    assert!(mc_end_to_end(&sc, &alloc, 1, 9, BitFading::PerBit).is_err());
}

#[test]
fn dataset_round_trip() {
    let cfg = ScenarioConfig::default();
    let ds = cfg.dataset().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_dataset(&ds, dir.path()).unwrap();
    assert_eq!(load_dataset(&manifest).unwrap(), ds);

    let toml = format!("[dataset]\nsource = \"manifest\"\npath = {:?}\n", manifest.to_str().unwrap());
    let path = dir.path().join("s.toml");
    std::fs::write(&path, toml).unwrap();
    let loaded = ScenarioConfig::load(&path).unwrap();
    assert_eq!(loaded.dataset().unwrap(), ds);
}
