//! Experiment configuration, the per-trial session driver and the metrics
//! table.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use chairsearch_core::dataset::ChairId;
use chairsearch_core::engine::Engine;
use chairsearch_core::query::validate_ngram;
use chairsearch_core::session::{
    render_log, ManualClock, Session, SessionConfig, SessionError, SessionState, SESSION_BUDGET_MS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::silhouette::SilhouetteLibrary;
use crate::user::{
    choose_result, shape_matched, sketch_user_step, voice_user_step, Noise, Strategy, TimeModel,
};

/// Safety stop for sessions with very large budgets.
pub const DEFAULT_MAX_QUERIES: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_ngrams")]
    pub n_grams: Vec<usize>,
    /// Explicit targets cycled by trial index; empty samples uniformly.
    #[serde(default)]
    pub targets: Vec<ChairId>,
    #[serde(default = "default_budget")]
    pub budget_ms: u64,
    #[serde(default = "default_max_queries")]
    pub max_queries: usize,
    #[serde(default)]
    pub noise: Noise,
    #[serde(default)]
    pub time: TimeModel,
}

fn default_ngrams() -> Vec<usize> {
    vec![6]
}

fn default_budget() -> u64 {
    SESSION_BUDGET_MS
}

fn default_max_queries() -> usize {
    DEFAULT_MAX_QUERIES
}

impl ExperimentConfig {
    pub fn new(seed: u64, trials: usize, strategies: Vec<Strategy>, n_grams: Vec<usize>) -> Self {
        ExperimentConfig {
            seed,
            trials,
            strategies,
            n_grams,
            targets: Vec::new(),
            budget_ms: SESSION_BUDGET_MS,
            max_queries: DEFAULT_MAX_QUERIES,
            noise: Noise::default(),
            time: TimeModel::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self, engine: &Engine) -> Result<()> {
        self.noise.validate()?;
        if self.strategies.is_empty() {
            return Err(SimError::Config("no strategies".into()));
        }
        if self.n_grams.is_empty() {
            return Err(SimError::Config("no n-gram sizes".into()));
        }
        for &n in &self.n_grams {
            validate_ngram(n).map_err(|e| SimError::Config(e.to_string()))?;
        }
        if self.budget_ms == 0 {
            return Err(SimError::Config("budget must be positive".into()));
        }
        if let Some(&t) = self.targets.iter().find(|&&t| !engine.contains(t)) {
            return Err(SimError::UnknownTarget(t));
        }
        Ok(())
    }

    /// Conditions in table order: strategies outer, n-gram sizes inner.
    pub fn conditions(&self) -> Vec<(Strategy, usize)> {
        self.strategies
            .iter()
            .flat_map(|&s| self.n_grams.iter().map(move |&n| (s, n)))
            .collect()
    }
}

fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x243f_6a88_85a3_08d3, |acc, &p| mix(acc ^ p))
}

/// Target of trial `trial`; shared by every condition so trials pair up.
pub fn trial_target(engine: &Engine, config: &ExperimentConfig, trial: usize) -> ChairId {
    if !config.targets.is_empty() {
        return config.targets[trial % config.targets.len()];
    }
    let ids = engine.index().chair_ids();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(&[config.seed, 0x7a26, trial as u64]));
    ids[rng.random_range(0..ids.len())]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub condition: Strategy,
    pub strategy: Strategy,
    pub n_gram: usize,
    pub trial: usize,
    pub target: ChairId,
    pub state: Option<SessionState>,
    pub exact_success: bool,
    pub shape_success: bool,
    pub elapsed_s: f64,
    pub query_count: usize,
    pub voice_queries: usize,
    pub sketch_queries: usize,
    /// Why the trial could not run.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone)]
pub struct TrialRun {
    pub record: TrialRecord,
    /// Session log in the line-delimited export format; empty when skipped.
    pub log: String,
}

impl TrialRun {
    pub fn log_name(&self) -> String {
        let r = &self.record;
        format!("{}-n{}-t{:04}.jsonl", r.condition, r.n_gram, r.trial)
    }
}

/// Plays one simulated session to its end.
pub fn run_trial(
    engine: &Arc<Engine>,
    library: &SilhouetteLibrary,
    config: &ExperimentConfig,
    condition: Strategy,
    n_gram: usize,
    trial: usize,
) -> Result<TrialRun> {
    let target = trial_target(engine, config, trial);
    let strategy = condition.resolve(trial);
    let mut record = TrialRecord {
        condition,
        strategy,
        n_gram,
        trial,
        target,
        state: None,
        exact_success: false,
        shape_success: false,
        elapsed_s: 0.0,
        query_count: 0,
        voice_queries: 0,
        sketch_queries: 0,
        skipped: None,
    };
    let seed = derive_seed(&[config.seed, condition.code(), n_gram as u64, trial as u64]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clock = Arc::new(ManualClock::new(0));
    let session_config = SessionConfig {
        n_gram,
        budget_ms: config.budget_ms,
    };
    let id = format!("{condition}-n{n_gram}-t{trial:04}");
    let mut session = Session::begin(
        Arc::clone(engine),
        clock.clone(),
        id,
        target,
        strategy.mode(),
        session_config,
    )?;
    if let Err(e) = library.get(engine.shape_of(target).unwrap_or(u32::MAX)) {
        if strategy != Strategy::VoicePure {
            record.skipped = Some(e.to_string());
            return Ok(TrialRun { record, log: String::new() });
        }
    }

    let t = &config.time;
    let mut sketches = 0usize;
    let mut previous = session.current();
    let mut stall = false;
    for round in 0..config.max_queries {
        let matched = shape_matched(engine, session.current(), target);
        let use_voice = match strategy {
            Strategy::VoicePure => true,
            Strategy::SketchPure => false,
            Strategy::HybridA => matched || sketches >= 2,
            Strategy::HybridB => round > 0,
            Strategy::HybridC => round != 1,
            Strategy::Hybrid => unreachable!("resolved above"),
        };
        let submitted = if use_voice {
            let text = voice_user_step(target, &session, n_gram, config.noise.p_c, stall, &mut rng)?;
            clock.advance(t.voice_ms);
            session.submit_voice(&text)
        } else {
            let (sketch, with_model) =
                sketch_user_step(target, &session, library, config.noise.p_m, &mut rng)?;
            sketches += 1;
            clock.advance(t.sketch_ms(sketch.strokes.len()));
            session.submit_sketch(&sketch, with_model)
        };
        let results = match submitted {
            Ok(r) => r,
            Err(SessionError::TimedOut | SessionError::NotActive(_)) => break,
            Err(e) => return Err(e.into()),
        };
        clock.advance(t.processing_ms);
        let rank = choose_result(engine, &results, target)?;
        clock.advance(t.selection_ms);
        match session.select(rank) {
            Ok(_) => {}
            Err(SessionError::TimedOut | SessionError::NotActive(_)) => break,
            Err(e) => return Err(e.into()),
        }
        if session.state() != SessionState::Active {
            break;
        }
        stall = session.current() == previous;
        previous = session.current();
    }
    if session.poll() == SessionState::Active {
        let _ = session.abandon();
    }
    let o = session.score();
    record.state = Some(o.state);
    record.exact_success = o.exact_success;
    record.shape_success = o.shape_success;
    record.elapsed_s = o.elapsed_s;
    record.query_count = o.query_count;
    record.voice_queries = o.voice_queries;
    record.sketch_queries = o.sketch_queries;
    Ok(TrialRun {
        record,
        log: render_log(&session.header(), session.events()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub strategy: Strategy,
    pub n_gram: usize,
    pub trials: usize,
    pub skipped: usize,
    pub precision: f64,
    pub precision_shape: f64,
    pub avg_time_s: f64,
    pub avg_query_count: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn from_records(conditions: &[(Strategy, usize)], records: &[TrialRecord]) -> MetricsTable {
        let rows = conditions
            .iter()
            .map(|&(strategy, n_gram)| {
                let all: Vec<&TrialRecord> = records
                    .iter()
                    .filter(|r| r.condition == strategy && r.n_gram == n_gram)
                    .collect();
                let ran: Vec<&&TrialRecord> = all.iter().filter(|r| r.skipped.is_none()).collect();
                let n = ran.len();
                let mean = |f: &dyn Fn(&TrialRecord) -> f64| {
                    if n == 0 {
                        0.0
                    } else {
                        ran.iter().map(|r| f(r)).sum::<f64>() / n as f64
                    }
                };
                MetricsRow {
                    strategy,
                    n_gram,
                    trials: n,
                    skipped: all.len() - n,
                    precision: mean(&|r| r.exact_success as u8 as f64),
                    precision_shape: mean(&|r| r.shape_success as u8 as f64),
                    avg_time_s: mean(&|r| r.elapsed_s),
                    avg_query_count: mean(&|r| r.query_count as f64),
                }
            })
            .filter(|r| r.trials + r.skipped > 0)
            .collect();
        MetricsTable { rows }
    }

    pub fn row(&self, strategy: Strategy, n_gram: usize) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.n_gram == n_gram)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub table: MetricsTable,
    pub runs: Vec<TrialRun>,
}

impl Experiment {
    /// Per-trial outcomes as a trials x conditions matrix for the Friedman
    /// test; `shape` picks shape success instead of exact success.
    pub fn success_matrix(&self, conditions: &[(Strategy, usize)], shape: bool) -> Vec<Vec<f64>> {
        let trials = self.runs.iter().map(|r| r.record.trial + 1).max().unwrap_or(0);
        let mut m = vec![vec![0.0; conditions.len()]; trials];
        for run in &self.runs {
            let r = &run.record;
            if let Some(j) = conditions.iter().position(|&c| c == (r.condition, r.n_gram)) {
                m[r.trial][j] = if shape { r.shape_success } else { r.exact_success } as u8 as f64;
            }
        }
        m
    }

    pub fn write_logs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for run in self.runs.iter().filter(|r| !r.log.is_empty()) {
            std::fs::write(dir.join(run.log_name()), &run.log)?;
        }
        Ok(())
    }
}

/// Runs every condition for every trial. Trials run in parallel; results are
/// gathered in condition then trial order, so output depends only on the
/// config.
pub fn run_experiment(
    engine: &Arc<Engine>,
    library: &SilhouetteLibrary,
    config: &ExperimentConfig,
) -> Result<Experiment> {
    config.validate(engine)?;
    let conditions = config.conditions();
    let jobs: Vec<(Strategy, usize, usize)> = conditions
        .iter()
        .flat_map(|&(s, n)| (0..config.trials).map(move |t| (s, n, t)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(s, n, t)| run_trial(engine, library, config, s, n, t))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<TrialRecord> = runs.iter().map(|r| r.record.clone()).collect();
    Ok(Experiment {
        table: MetricsTable::from_records(&conditions, &records),
        runs,
    })
}
