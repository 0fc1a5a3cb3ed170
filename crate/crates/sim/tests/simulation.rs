use std::sync::{Arc, OnceLock};

use chairsearch_core::engine::Engine;
use chairsearch_core::session::{replay_log, ManualClock, Mode, Session, SessionConfig, SessionState};
use chairsearch_sim::experiment::{run_trial, trial_target};
use chairsearch_sim::user::{choose_result, describe_differences, shape_matched};
use chairsearch_sim::{
    run_experiment, ExperimentConfig, Noise, SilhouetteLibrary, SimError, Strategy,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine() -> Arc<Engine> {
    static ENGINE: OnceLock<Arc<Engine>> = OnceLock::new();
    ENGINE.get_or_init(|| Arc::new(Engine::reference().unwrap())).clone()
}

fn library() -> &'static SilhouetteLibrary {
    static LIB: OnceLock<SilhouetteLibrary> = OnceLock::new();
    LIB.get_or_init(|| SilhouetteLibrary::build(engine().manifest()))
}

fn config(trials: usize, strategies: Vec<Strategy>, n: usize, noise: Noise) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(2024, trials, strategies, vec![n]);
    c.noise = noise;
    c
}

fn precision(strategy: Strategy, trials: usize, noise: Noise) -> f64 {
    let ex = run_experiment(&engine(), library(), &config(trials, vec![strategy], 6, noise)).unwrap();
    ex.table.rows[0].precision
}

/// Two-sided two-proportion z-test p-value.
fn two_proportion_p(x1: usize, x2: usize, n: usize) -> f64 {
    let (p1, p2) = (x1 as f64 / n as f64, x2 as f64 / n as f64);
    let pooled = (x1 + x2) as f64 / (2 * n) as f64;
    let se = (pooled * (1.0 - pooled) * 2.0 / n as f64).sqrt();
    if se == 0.0 {
        return 1.0;
    }
    let z = (p1 - p2).abs() / se;
    // Abramowitz-Stegun 7.1.26 erfc approximation.
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    poly * (-x * x).exp()
}

#[test]
fn zero_trials_give_an_empty_table() {
    let ex = run_experiment(&engine(), library(), &config(0, vec![Strategy::VoicePure], 6, Noise::default())).unwrap();
    assert!(ex.table.rows.is_empty());
    assert!(ex.runs.is_empty());
}

#[test]
fn same_seed_same_table_and_logs() {
    let cfg = config(12, vec![Strategy::VoicePure, Strategy::SketchPure, Strategy::Hybrid], 4, Noise::default());
    let a = run_experiment(&engine(), library(), &cfg).unwrap();
    let b = run_experiment(&engine(), library(), &cfg).unwrap();
    assert_eq!(a.table, b.table);
    assert_eq!(a.table.to_csv().unwrap(), b.table.to_csv().unwrap());
    for (x, y) in a.runs.iter().zip(&b.runs) {
        assert_eq!(x.log, y.log);
    }
}

#[test]
fn unknown_targets_and_bad_settings_are_refused() {
    let mut cfg = config(1, vec![Strategy::VoicePure], 6, Noise::default());
    cfg.targets = vec![999_999];
    assert!(matches!(run_experiment(&engine(), library(), &cfg), Err(SimError::UnknownTarget(999_999))));
    let mut cfg = config(1, vec![Strategy::VoicePure], 5, Noise::default());
    assert!(run_experiment(&engine(), library(), &cfg).is_err());
    cfg.n_grams = vec![6];
    cfg.noise.p_m = -0.1;
    assert!(run_experiment(&engine(), library(), &cfg).is_err());
}

#[test]
fn config_reads_from_toml() {
    let cfg = ExperimentConfig::from_toml(
        r#"
        seed = 5
        trials = 3
        strategies = ["voice_pure", "hybrid"]
        n_grams = [2, 6]
        targets = [0, 361]
        [noise]
        p_c = 0.2
        p_m = 0.4
        [time]
        voice_ms = 8000
        "#,
    )
    .unwrap();
    assert_eq!(cfg.conditions().len(), 4);
    assert_eq!(cfg.noise, Noise { p_c: 0.2, p_m: 0.4 });
    assert_eq!(cfg.time.voice_ms, 8000);
    assert_eq!(cfg.time.selection_ms, 3000);
    assert_eq!(trial_target(&engine(), &cfg, 3), 361);
    assert!(ExperimentConfig::from_toml("seed = 1\ntrials = 1\nstrategies = [\"telepathy\"]").is_err());
}

#[test]
fn missing_silhouette_skips_sketch_trials() {
    let empty = SilhouetteLibrary::default();
    let cfg = config(2, vec![Strategy::SketchPure], 6, Noise::default());
    let run = run_trial(&engine(), &empty, &cfg, Strategy::SketchPure, 6, 0).unwrap();
    assert!(run.record.skipped.as_deref().unwrap().contains("no silhouette"));
    let ex = run_experiment(&engine(), &empty, &cfg).unwrap();
    assert_eq!(ex.table.rows[0].trials, 0);
    assert_eq!(ex.table.rows[0].skipped, 2);
}

#[test]
fn noiseless_voice_user_eventually_succeeds() {
    let mut cfg = config(20, vec![Strategy::VoicePure], 6, Noise::NONE);
    cfg.budget_ms = u64::MAX / 4;
    let ex = run_experiment(&engine(), library(), &cfg).unwrap();
    for run in &ex.runs {
        assert_eq!(run.record.state, Some(SessionState::Succeeded), "{:?}", run.record);
    }
}

#[test]
fn fully_corrupted_speech_matches_a_target_free_baseline() {
    let trials = 400;
    let noisy = precision(Strategy::VoicePure, trials, Noise { p_c: 1.0, p_m: 0.0 });

    // Baseline: each utterance describes a random decoy chair, so the words
    // carry nothing about the target; clicking stays target-aware.
    let e = engine();
    let ids = e.index().chair_ids();
    let cfg = config(trials, vec![Strategy::VoicePure], 6, Noise::NONE);
    let mut wins = 0;
    for t in 0..trials {
        let target = trial_target(&e, &cfg, t);
        let clock = Arc::new(ManualClock::new(0));
        let mut s = Session::begin(e.clone(), clock.clone(), "b", target, Mode::VoiceOnly, SessionConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(t as u64);
        loop {
            let decoy = ids[rng.random_range(0..ids.len())];
            let matched = shape_matched(&e, s.current(), decoy);
            let text = describe_differences(e.dictionary(), s.descriptor(), &e.attributes(decoy).unwrap(), matched, 6, 0.0, false, &mut rng);
            clock.advance(10_000);
            let Ok(r) = s.submit_voice(&text) else { break };
            clock.advance(4_000);
            if s.select(choose_result(&e, &r, target).unwrap()).is_err() || s.state() != SessionState::Active {
                break;
            }
        }
        wins += s.score().exact_success as usize;
    }
    let noisy_wins = (noisy * trials as f64).round() as usize;
    let p = two_proportion_p(noisy_wins, wins, trials);
    assert!(p > 0.05, "noisy {noisy_wins}/{trials} vs baseline {wins}/{trials}, p = {p}");
}

#[test]
fn fully_misassociated_sketch_colors_never_hit_the_exact_chair() {
    let cfg = config(100, vec![Strategy::SketchPure], 6, Noise { p_c: 0.0, p_m: 1.0 });
    let ex = run_experiment(&engine(), library(), &cfg).unwrap();
    let row = &ex.table.rows[0];
    assert!(row.precision <= 0.02, "{row:?}");
    assert!(row.precision_shape >= 0.5, "{row:?}");
}

#[test]
fn precision_does_not_rise_with_noise() {
    let voice: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&p_c| precision(Strategy::VoicePure, 150, Noise { p_c, p_m: 0.0 }))
        .collect();
    assert!(voice.windows(2).all(|w| w[0] >= w[1]), "voice {voice:?}");
    let sketch: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&p_m| precision(Strategy::SketchPure, 150, Noise { p_c: 0.0, p_m }))
        .collect();
    assert!(sketch.windows(2).all(|w| w[0] >= w[1]), "sketch {sketch:?}");
}

#[test]
fn simulated_logs_replay_faithfully() {
    let cfg = config(6, vec![Strategy::Hybrid, Strategy::SketchPure], 6, Noise::default());
    let ex = run_experiment(&engine(), library(), &cfg).unwrap();
    for run in &ex.runs {
        let rep = replay_log(engine(), &run.log).unwrap();
        assert!(rep.is_faithful(), "{}: {:?}", run.log_name(), rep.mismatches);
    }
    let dir = tempfile::tempdir().unwrap();
    ex.write_logs(dir.path()).unwrap();
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), ex.runs.len());
}

#[test]
fn session_time_stays_within_budget() {
    let cfg = config(30, vec![Strategy::VoicePure, Strategy::SketchPure, Strategy::Hybrid], 6, Noise::default());
    let ex = run_experiment(&engine(), library(), &cfg).unwrap();
    for run in &ex.runs {
        assert!(run.record.elapsed_s <= 90.0);
        assert_eq!(run.record.voice_queries + run.record.sketch_queries, run.record.query_count);
        match run.record.strategy {
            Strategy::VoicePure => assert_eq!(run.record.sketch_queries, 0),
            Strategy::SketchPure => assert_eq!(run.record.voice_queries, 0),
            _ => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn shape_precision_bounds_exact_precision(
        seed in any::<u64>(),
        p_c in 0.0f64..=1.0,
        p_m in 0.0f64..=1.0,
        n in prop_oneof![Just(2usize), Just(4), Just(6)],
    ) {
        let mut cfg = ExperimentConfig::new(seed, 6, vec![Strategy::VoicePure, Strategy::SketchPure, Strategy::Hybrid], vec![n]);
        cfg.noise = Noise { p_c, p_m };
        let ex = run_experiment(&engine(), library(), &cfg).unwrap();
        for row in &ex.table.rows {
            prop_assert!(row.precision_shape >= row.precision);
            prop_assert!((0.0..=1.0).contains(&row.precision));
        }
    }
}
