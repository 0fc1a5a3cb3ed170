use std::sync::{Arc, OnceLock};

use chairsearch_core::concept::Concept;
use chairsearch_core::dataset::ChairId;
use chairsearch_core::dictionary::Polarity;
use chairsearch_core::engine::{Engine, PLACEHOLDER_CHAIR_ID};
use chairsearch_core::index::TOP_K;
use chairsearch_core::palette::{ColorId, PartKind};
use chairsearch_core::query::{AttributeVector, MAX_UTTERANCE_CHARS};
use chairsearch_core::session::{
    parse_log, render_log, replay_log, DescriptorEdit, LevelDelta, ManualClock, Mode, Phase,
    Session, SessionConfig, SessionError, SessionEvent, SessionState, LOG_FORMAT,
};
use chairsearch_core::sketch::{Sketch, Stroke};
use proptest::prelude::*;

fn engine() -> Arc<Engine> {
    static ENGINE: OnceLock<Arc<Engine>> = OnceLock::new();
    ENGINE
        .get_or_init(|| Arc::new(Engine::reference().unwrap()))
        .clone()
}

fn start(target: ChairId, mode: Mode) -> (Session, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(1_000));
    let s = Session::begin(engine(), clock.clone(), "t", target, mode, SessionConfig::default()).unwrap();
    (s, clock)
}

fn some_chair(i: usize) -> ChairId {
    let e = engine();
    let ids = e.index().chair_ids();
    ids[(i * 7919) % ids.len()]
}

/// Words that move `from` toward `to`: colors first, then concept steps by
/// decreasing gap, kept under the utterance cap.
fn oracle_utterance(from: &AttributeVector, to: &AttributeVector) -> String {
    let e = engine();
    let d = e.dictionary();
    let mut phrases = Vec::new();
    for p in PartKind::ALL {
        if let Some(c) = to.color(p) {
            if from.color(p) != Some(c) {
                phrases.push(format!("{} {}", d.color_lemma(c), d.part_lemma(p)));
            }
        }
    }
    let mut gaps: Vec<(Concept, i32)> = Concept::ALL
        .into_iter()
        .map(|k| (k, to.level(k) as i32 - from.level(k) as i32))
        .filter(|&(_, g)| g != 0)
        .collect();
    gaps.sort_by_key(|&(k, g)| (std::cmp::Reverse(g.abs()), k));
    for (k, g) in gaps {
        let pol = if g > 0 { Polarity::Increase } else { Polarity::Decrease };
        let w = d.concept_word(k, pol).unwrap();
        let phrase = match k.scope() {
            Some(p) => format!("{w} {}", d.part_lemma(p)),
            None => w.to_string(),
        };
        for _ in 0..g.abs() {
            phrases.push(phrase.clone());
        }
    }
    let mut text = String::new();
    for p in phrases {
        if text.len() + p.len() + 1 > MAX_UTTERANCE_CHARS {
            break;
        }
        if !text.is_empty() {
            text.push(' ');
        }
        text.push_str(&p);
    }
    text
}

fn red_line() -> Sketch {
    Sketch::new(vec![Stroke::new(vec![[-0.3, 0.0, 0.0], [0.3, 0.2, 0.0]], ColorId::Red, 0.05).unwrap()]).unwrap()
}

#[test]
fn fresh_session_scores_as_unsolved_at_zero() {
    let (s, _) = start(some_chair(1), Mode::Hybrid);
    let o = s.score();
    assert_eq!(o.state, SessionState::Active);
    assert!(!o.exact_success);
    assert!(!o.shape_success);
    assert_eq!(o.elapsed_ms, 0);
    assert_eq!(o.query_count, 0);
    assert_eq!(s.current(), PLACEHOLDER_CHAIR_ID);
    assert_eq!(*s.descriptor(), engine().attributes(PLACEHOLDER_CHAIR_ID).unwrap());
}

#[test]
fn unknown_target_and_bad_ngram_are_refused() {
    let clock = Arc::new(ManualClock::new(0));
    let bad = Session::begin(engine(), clock.clone(), "x", 4_000_000, Mode::Hybrid, SessionConfig::default());
    assert!(matches!(bad, Err(SessionError::UnknownChair(4_000_000))));
    let cfg = SessionConfig { n_gram: 5, ..SessionConfig::default() };
    let bad = Session::begin(engine(), clock, "x", some_chair(0), Mode::Hybrid, cfg);
    assert_eq!(bad.unwrap_err().code(), "INVALID_INPUT");
}

#[test]
fn mode_violations_are_rejected_and_logged() {
    let (mut s, _) = start(some_chair(2), Mode::SketchOnly);
    let err = s.submit_voice("red seat").unwrap_err();
    assert_eq!(err.code(), "MODE_VIOLATION");
    assert_eq!(s.log().len(), 1);
    assert_eq!(s.log()[0].phase, Phase::Rejected);
    assert_eq!(s.log()[0].rejection.as_deref(), Some("MODE_VIOLATION"));
    assert_eq!(s.edit_descriptor(DescriptorEdit::Reset).unwrap_err().code(), "MODE_VIOLATION");

    let (mut s, _) = start(some_chair(2), Mode::VoiceOnly);
    let err = s.submit_sketch(&red_line(), false).unwrap_err();
    assert_eq!(err.code(), "MODE_VIOLATION");
    assert!(!s.log()[0].accepted());
    assert_eq!(s.score().rejected_queries, 1);
    assert_eq!(s.score().query_count, 0);
}

#[test]
fn empty_voice_query_ranks_the_unchanged_descriptor() {
    let (mut s, _) = start(some_chair(3), Mode::VoiceOnly);
    let before = *s.descriptor();
    let r = s.submit_voice("").unwrap();
    assert_eq!(*s.descriptor(), before);
    assert_eq!(r, engine().index().knn_semantic(&before, TOP_K).unwrap());
}

#[test]
fn second_query_before_selection_is_rejected() {
    let (mut s, _) = start(some_chair(4), Mode::Hybrid);
    s.submit_voice("red seat").unwrap();
    assert_eq!(s.submit_sketch(&red_line(), false).unwrap_err().code(), "QUERY_IN_FLIGHT");
    assert_eq!(s.log().len(), 2);
    assert_eq!(s.log()[0].phase, Phase::Selection);
    assert_eq!(s.log()[1].phase, Phase::Rejected);
}

#[test]
fn selection_moves_current_chair_and_syncs_descriptor() {
    let (mut s, clock) = start(some_chair(5), Mode::Hybrid);
    let r = s.submit_voice("blue legs tall back").unwrap();
    assert_eq!(r.len(), TOP_K);
    clock.advance(3_000);
    let picked = s.select(3).unwrap();
    assert_eq!(picked, r.neighbors[3].chair_id);
    assert_eq!(s.current(), picked);
    assert_eq!(*s.descriptor(), engine().attributes(picked).unwrap());
    assert_eq!(s.log()[0].phase, Phase::Completed);
    assert_eq!(s.log()[0].selected_ms, Some(4_000));
    assert!(matches!(s.select(0), Err(SessionError::NoPendingSelection)));

    s.submit_voice("").unwrap();
    assert_eq!(s.select(9).unwrap_err().code(), "RANK_OUT_OF_RANGE");
}

#[test]
fn empty_sketch_over_current_model_finds_that_chair() {
    let (mut s, _) = start(some_chair(6), Mode::Hybrid);
    s.submit_voice("green seat").unwrap();
    let picked = s.select(1).unwrap();
    let r = s.submit_sketch(&Sketch::empty(), true).unwrap();
    assert_eq!(r.neighbors[0].chair_id, picked);
    assert_eq!(r.neighbors[0].distance, 0.0);
    assert_eq!(s.log()[1].model, Some(picked));
}

#[test]
fn invalid_sketch_is_rejected() {
    let (mut s, _) = start(some_chair(6), Mode::SketchOnly);
    let bad = Sketch {
        strokes: vec![Stroke { points: vec![[0.0; 3]], color: ColorId::Red, width: 0.1 }],
    };
    assert_eq!(s.submit_sketch(&bad, false).unwrap_err().code(), "INVALID_INPUT");
    assert_eq!(s.log()[0].phase, Phase::Rejected);
}

#[test]
fn oracle_description_brings_target_into_top_five() {
    let e = engine();
    let start_vec = e.attributes(PLACEHOLDER_CHAIR_ID).unwrap();
    for i in 0..40 {
        let target = some_chair(i * 13 + 1);
        let text = oracle_utterance(&start_vec, &e.attributes(target).unwrap());
        assert!(text.len() <= MAX_UTTERANCE_CHARS);
        let (mut s, _) = start(target, Mode::VoiceOnly);
        let r = s.submit_voice(&text).unwrap();
        assert!(r.contains(target), "target {target} missing for `{text}`");
        let rank = r.chair_ids().iter().position(|&c| c == target).unwrap();
        s.select(rank).unwrap();
        assert_eq!(s.state(), SessionState::Succeeded);
        assert!(s.score().exact_success);
    }
}

#[test]
fn same_shape_in_other_colors_is_a_shape_success_only() {
    let e = engine();
    let target = some_chair(11);
    let shape = e.shape_of(target).unwrap();
    let sibling = e
        .index()
        .chair_ids()
        .iter()
        .copied()
        .find(|&c| c != target && e.shape_of(c) == Some(shape))
        .unwrap();
    let (mut s, _) = start(target, Mode::VoiceOnly);
    let text = oracle_utterance(s.descriptor(), &e.attributes(sibling).unwrap());
    let r = s.submit_voice(&text).unwrap();
    let rank = r.chair_ids().iter().position(|&c| c == sibling).expect("sibling ranked");
    s.select(rank).unwrap();
    let o = s.score();
    assert_eq!(o.state, SessionState::Active);
    assert!(!o.exact_success);
    assert!(o.shape_success);
}

#[test]
fn budget_expiry_times_out_and_freezes_the_session() {
    let (mut s, clock) = start(some_chair(12), Mode::Hybrid);
    s.submit_voice("red legs").unwrap();
    clock.advance(90_000);
    assert_eq!(s.state(), SessionState::Active);
    clock.advance(1);
    assert_eq!(s.state(), SessionState::TimedOut);
    assert_eq!(s.elapsed_ms(), 90_000);
    let events = s.events().len();
    assert!(matches!(s.select(0), Err(SessionError::TimedOut)));
    assert_eq!(s.log()[0].phase, Phase::Rejected);
    assert_eq!(s.log()[0].rejection.as_deref(), Some("SESSION_TIMED_OUT"));
    let after_timeout = s.events().len();
    assert_eq!(after_timeout, events + 2);
    assert!(matches!(s.events().last(), Some(SessionEvent::SessionEnded { state: SessionState::TimedOut, .. })));

    assert_eq!(s.submit_voice("blue seat").unwrap_err().code(), "SESSION_NOT_ACTIVE");
    assert_eq!(s.abandon().unwrap_err().code(), "SESSION_NOT_ACTIVE");
    clock.advance(50_000);
    assert_eq!(s.poll(), SessionState::TimedOut);
    assert_eq!(s.events().len(), after_timeout);
    let o = s.score();
    assert_eq!(o.elapsed_ms, 90_000);
    assert_eq!(o.elapsed_s, 90.0);
    assert!(!o.exact_success);
}

#[test]
fn abandon_ends_the_session_at_the_current_time() {
    let (mut s, clock) = start(some_chair(12), Mode::Hybrid);
    clock.advance(12_345);
    s.abandon().unwrap();
    clock.advance(100_000);
    assert_eq!(s.state(), SessionState::Abandoned);
    assert_eq!(s.elapsed_ms(), 12_345);
}

#[test]
fn experimenter_edits_move_the_descriptor() {
    let (mut s, _) = start(some_chair(13), Mode::Hybrid);
    let v = s
        .edit_descriptor(DescriptorEdit::Deltas {
            levels: vec![LevelDelta { concept: Concept::Size, delta: 7 }],
            colors: vec![],
        })
        .unwrap();
    assert_eq!(v.level(Concept::Size), 4);
    assert_eq!(s.edit_descriptor(DescriptorEdit::Reset).unwrap(), AttributeVector::neutral());
    let synced = s.edit_descriptor(DescriptorEdit::Sync).unwrap();
    assert_eq!(synced, engine().attributes(PLACEHOLDER_CHAIR_ID).unwrap());
}

#[test]
fn selections_chain_into_the_next_query() {
    let (mut s, clock) = start(some_chair(14), Mode::Hybrid);
    let mut last = PLACEHOLDER_CHAIR_ID;
    for step in 0..4 {
        let r = if step % 2 == 0 {
            s.submit_sketch(&red_line(), true).unwrap()
        } else {
            s.submit_voice("thinner legs").unwrap()
        };
        if step % 2 == 0 {
            assert_eq!(s.log().last().unwrap().model, Some(last));
        } else {
            let mut expected = engine().attributes(last).unwrap();
            expected.step(Concept::LegThickness, -1);
            assert_eq!(*s.descriptor(), expected);
        }
        assert_eq!(r.len(), TOP_K);
        clock.advance(4_000);
        last = s.select(0).unwrap();
    }
    assert_eq!(s.score().query_count, 4);
    assert_eq!(s.score().voice_queries, 2);
    assert_eq!(s.score().sketch_queries, 2);
}

#[test]
fn empty_session_log_is_header_only() {
    let (s, _) = start(some_chair(15), Mode::SketchOnly);
    let text = render_log(&s.header(), s.events());
    assert_eq!(text.lines().count(), 1);
    let (h, ev) = parse_log(&text).unwrap();
    assert_eq!(h.format, LOG_FORMAT);
    assert!(ev.is_empty());
    let rep = replay_log(engine(), &text).unwrap();
    assert!(rep.is_faithful());
}

#[test]
fn recorded_sessions_replay_faithfully() {
    let target = some_chair(16);
    let (mut s, clock) = start(target, Mode::Hybrid);
    s.submit_voice("red seat wide seat").unwrap();
    clock.advance(2_500);
    s.select(2).unwrap();
    s.submit_sketch(&red_line(), true).unwrap();
    s.submit_voice("again").unwrap_err();
    clock.advance(1_000);
    s.select(0).unwrap();
    s.edit_descriptor(DescriptorEdit::Reset).unwrap();
    s.submit_voice("not modern stop blue").unwrap();
    clock.advance(700);
    s.abandon().unwrap();

    let text = render_log(&s.header(), s.events());
    let rep = replay_log(engine(), &text).unwrap();
    assert!(rep.is_faithful(), "{:?}", rep.mismatches);
    assert_eq!(rep.outcome, s.score());

    let tampered = text.replacen("\"rank\":2", "\"rank\":1", 1);
    let rep = replay_log(engine(), &tampered).unwrap();
    assert!(!rep.is_faithful());
}

#[derive(Debug, Clone)]
enum Op {
    Voice(usize),
    Sketch(bool, bool),
    Select(usize),
    Edit,
    Wait(u64),
    Abandon,
}

const WORDS: [&str; 8] = ["red seat", "taller", "not thick legs", "", "blue", "curvy back stop", "wide", "heavy"];

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..WORDS.len()).prop_map(Op::Voice),
        2 => (any::<bool>(), any::<bool>()).prop_map(|(a, b)| Op::Sketch(a, b)),
        4 => (0usize..7).prop_map(Op::Select),
        1 => Just(Op::Edit),
        3 => (0u64..20_000).prop_map(Op::Wait),
        1 => Just(Op::Abandon),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_operation_sequences_keep_protocol_invariants(
        mode in prop_oneof![Just(Mode::VoiceOnly), Just(Mode::SketchOnly), Just(Mode::Hybrid)],
        target in 0usize..1000,
        ops in proptest::collection::vec(op(), 0..24),
    ) {
        let (mut s, clock) = start(some_chair(target), mode);
        let mut ended_at = None;
        for o in ops {
            match o {
                Op::Voice(i) => { let _ = s.submit_voice(WORDS[i]); }
                Op::Sketch(empty, with_model) => {
                    let sk = if empty { Sketch::empty() } else { red_line() };
                    let _ = s.submit_sketch(&sk, with_model);
                }
                Op::Select(r) => { let _ = s.select(r); }
                Op::Edit => { let _ = s.edit_descriptor(DescriptorEdit::Sync); }
                Op::Wait(ms) => { clock.advance(ms); }
                Op::Abandon => { let _ = s.abandon(); }
            }
            s.poll();
            let open = s.log().iter().filter(|r| !r.phase.is_terminal()).count();
            prop_assert!(open <= 1);
            for r in s.log() {
                if r.accepted() {
                    prop_assert_eq!(r.results.as_ref().unwrap().len(), TOP_K);
                    prop_assert!(mode.allows(r.modality));
                }
            }
            prop_assert!(s.elapsed_ms() <= 90_000);
            if s.state() != SessionState::Active {
                prop_assert!(open == 0);
                match ended_at {
                    None => ended_at = Some(s.events().len()),
                    Some(n) => prop_assert_eq!(n, s.events().len()),
                }
            }
        }
        let text = render_log(&s.header(), s.events());
        let rep = replay_log(engine(), &text).unwrap();
        prop_assert!(rep.is_faithful(), "{:?}", rep.mismatches);
    }
}
