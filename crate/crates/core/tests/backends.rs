mod common;

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use common::{fixture, t};
use kbreason::backends::{
    cosine, hash_embed, normalize_candidate, project, BackendError, ExactTranslator, FixtureStore,
    HashTranslator, PlanRequest, Planner, PromptState, RecordingPlanner, RecordingTranslator,
    RemoteConfig, RemotePlanner, RemoteTranslator, ReplayPlanner, ReplayTranslator, RetryPolicy,
    Translator,
};
use kbreason::data;
use kbreason::{EntityId, Triple};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_TEXTS: [&str; 20] = [
    "Joseph's brother is Dale",
    "Dale's sister is Katherine",
    "palau locatedIn micronesia",
    "micronesia locatedIn oceania",
    "Ashley's daughter is Lillian",
    "Lillian's brother is Nicholas",
    "Carrie's sister is Natasha",
    "Task: Joseph's sister is Katherine",
    "Step 1: A's brother is B",
    "a",
    "ab",
    "abc",
    "   Padded Text   ",
    "UPPER lower MiXeD",
    "sudan neighborOf central african republic",
    "Milton's mother is Antonia",
    "?ENT",
    "Joseph's brother is ?ENT",
    "unicode café naïve",
    "1234567890",
];

fn golden_line(text: &str) -> String {
    let v = hash_embed(text, 256).unwrap();
    let parts: Vec<String> = v
        .entries()
        .iter()
        .take(8)
        .map(|(i, x)| format!("{i}:{x:.9}"))
        .collect();
    format!("{}\t{}", text.trim(), parts.join(","))
}

#[test]
fn hash_embed_matches_golden_file() {
    let path = fixture("hash_embed_256.tsv");
    let got: Vec<String> = GOLDEN_TEXTS.iter().map(|t| golden_line(t)).collect();
    if std::env::var_os("KBREASON_BLESS").is_some() {
        std::fs::write(&path, got.join("\n") + "\n").unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    let expected: Vec<&str> = expected.lines().collect();
    assert_eq!(got.len(), expected.len());
    for (g, e) in got.iter().zip(expected) {
        assert_eq!(g, e);
    }
}

/// Independent re-derivation of the hashing scheme for the three-character case.
fn reference_single_gram(text: &str, dim: u64) -> (u64, f64) {
    let fnv = |state: u64, bytes: &[u8]| {
        bytes.iter().fold(state, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x100000001b3))
    };
    let seed = fnv(0xcbf29ce484222325, b"kbreason/hash-embed/v1");
    let h = fnv(seed, text.to_lowercase().as_bytes());
    (h % dim, if h >> 63 == 1 { -1.0 } else { 1.0 })
}

#[test]
fn single_gram_texts_match_reference_hash() {
    for text in ["abc", "ABC", "xyz", "ab", "q"] {
        let (bucket, sign) = reference_single_gram(text, 256);
        let v = hash_embed(text, 256).unwrap();
        assert_eq!(v.entries(), &[(bucket, sign)][..], "{text}");
    }
}

#[test]
fn same_relation_beats_different_relation() {
    let names = [
        "Joseph", "Dale", "Nancy", "George", "Katherine", "Ashley", "Lillian", "Nicholas", "Carrie",
        "Natasha", "Milton", "Antonia", "Glen", "Sam", "Ruth", "Elena", "Marco", "Jo", "Bea", "Al",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut wins = 0;
    for _ in 0..100 {
        let picked: Vec<&str> = names.choose_multiple(&mut rng, 3).copied().collect();
        let (x, y, z) = (picked[0], picked[1], picked[2]);
        let base = hash_embed(&format!("{x}'s sister is {y}"), 1024).unwrap();
        let same = hash_embed(&format!("{x}'s sister is {z}"), 1024).unwrap();
        let other = hash_embed(&format!("{x}'s uncle is {z}"), 1024).unwrap();
        if cosine(&base, &same).unwrap() > cosine(&base, &other).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 95, "{wins}/100");
}

#[test]
fn brother_candidate_projects_to_brother_fact() {
    let slice = vec![t("Joseph", "brother", "Dale"), t("Joseph", "uncle", "Sam")];
    let tr = HashTranslator::default();
    let r = project(&["Joseph's brother is ?ENT".to_string()], &slice, &tr, &data::kinship_schema()).unwrap();
    assert_eq!(r.fact, slice[0]);
}

#[test]
fn exact_string_projection_scores_one() {
    let slice = vec![t("palau", "locatedIn", "micronesia")];
    let r = project(
        &["palau locatedIn micronesia".to_string()],
        &slice,
        &ExactTranslator::new(),
        &data::countries_schema(),
    )
    .unwrap();
    assert_eq!(r.fact, slice[0]);
    assert!((r.score - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_projection_agrees_with_string_search(
        facts in prop::collection::vec((0u8..4, 0u8..6), 1..8),
        picks in prop::collection::vec((0u8..4, 0u8..6, any::<bool>()), 1..6),
    ) {
        let rels = ["brother", "sister", "son", "uncle"];
        let schema = data::kinship_schema();
        let mut seen = HashSet::new();
        let slice: Vec<Triple> = facts
            .iter()
            .map(|&(r, o)| t("Joseph", rels[r as usize], &format!("P{o}")))
            .filter(|f| seen.insert(*f))
            .collect();
        let renderings: Vec<String> = slice.iter().map(|f| schema.verbalize(f).unwrap()).collect();
        let candidates: Vec<String> = picks
            .iter()
            .map(|&(r, o, step)| {
                let text = schema.verbalize(&t("Joseph", rels[r as usize], &format!("P{o}"))).unwrap();
                if step { format!("Step 3: {text}\nnoise") } else { text }
            })
            .collect();
        let result = project(&candidates, &slice, &ExactTranslator::new(), &schema).unwrap();
        let hit = candidates
            .iter()
            .map(|c| normalize_candidate(c))
            .find(|c| renderings.contains(c));
        match hit {
            Some(first) => {
                prop_assert!((result.score - 1.0).abs() < 1e-12);
                let rendered = schema.verbalize(&result.fact).unwrap();
                prop_assert!(candidates.iter().any(|c| normalize_candidate(c) == rendered));
                let first_idx = candidates.iter().position(|c| normalize_candidate(c) == first).unwrap();
                prop_assert_eq!(result.candidate_index, first_idx);
            }
            None => prop_assert!(result.score.abs() < 1e-12),
        }
        prop_assert!(slice.contains(&result.fact));
    }
}

/// Serves one scripted `(status, body)` response per connection and records
/// the request bodies.
fn mock_server(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in responses {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream);
            let mut length = 0usize;
            loop {
                let mut line = String::new();
                if reader.read_line(&mut line).unwrap_or(0) == 0 {
                    break;
                }
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    length = v.trim().parse().unwrap();
                }
                if line == "\r\n" {
                    break;
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(String::from_utf8(buf).unwrap());
            let mut stream = reader.into_inner();
            let reply = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn fast_config(url: String) -> RemoteConfig {
    let mut cfg = RemoteConfig::new(url);
    cfg.retry = RetryPolicy {
        attempts: 3,
        base_delay: Duration::from_millis(5),
        max_delay: Duration::from_millis(20),
    };
    cfg.timeout = Duration::from_secs(5);
    cfg
}

fn plan_request() -> PlanRequest {
    PlanRequest {
        prompt: "Task: Joseph's sister is Katherine\n".into(),
        state: PromptState {
            query: t("Joseph", "sister", "Katherine"),
            current: EntityId::new("Joseph").unwrap(),
            step: 1,
            rule: None,
        },
    }
}

#[test]
fn remote_planner_retries_server_errors() {
    let ok = r#"{"choices":[{"text":" Joseph's brother is Dale\n"},{"text":"Joseph's uncle is Sam"}]}"#;
    let (url, seen) = mock_server(vec![
        (503, "{}".into()),
        (429, "{}".into()),
        (200, ok.into()),
    ]);
    let planner = RemotePlanner::new(fast_config(url)).unwrap();
    let out = planner.propose(&plan_request(), 2, 0.8, 9).unwrap();
    assert_eq!(out.len(), 2);
    assert_eq!(normalize_candidate(&out[0]), "Joseph's brother is Dale");
    let bodies = seen.lock().unwrap();
    assert_eq!(bodies.len(), 3);
    let body: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(body["n"], 2);
    assert_eq!(body["prompt"], "Task: Joseph's sister is Katherine\n");
}

#[test]
fn remote_planner_gives_up_after_attempts() {
    let (url, _) = mock_server(vec![(500, "{}".into()), (500, "{}".into()), (500, "{}".into())]);
    let planner = RemotePlanner::new(fast_config(url)).unwrap();
    let err = planner.propose(&plan_request(), 2, 0.8, 9).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_) | BackendError::Protocol(_)), "{err:?}");
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = mock_server(vec![(400, r#"{"error":"bad"}"#.into()), (200, "{}".into())]);
    let planner = RemotePlanner::new(fast_config(url)).unwrap();
    let err = planner.propose(&plan_request(), 1, 0.8, 1).unwrap_err();
    assert!(matches!(err, BackendError::Protocol(_)), "{err:?}");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn remote_translator_orders_by_index() {
    let body = r#"{"data":[{"index":1,"embedding":[0.0,1.0]},{"index":0,"embedding":[1.0,0.0]}]}"#;
    let (url, _) = mock_server(vec![(200, body.into())]);
    let tr = RemoteTranslator::new(fast_config(url)).unwrap();
    let out = tr.embed_batch(&["a".to_string(), "b".to_string()]).unwrap();
    assert_eq!(out[0].get(0), 1.0);
    assert_eq!(out[1].get(1), 1.0);
}

#[test]
fn recorded_remote_calls_replay_offline() {
    let plan = r#"{"choices":[{"text":"Joseph's brother is Dale"}]}"#;
    let embed = r#"{"data":[{"index":0,"embedding":[0.6,0.8]}]}"#;
    let (url, _) = mock_server(vec![(200, plan.into()), (200, embed.into())]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fixtures.json");
    let store = FixtureStore::open(&path).unwrap();
    let planner = RecordingPlanner::new(RemotePlanner::new(fast_config(url.clone())).unwrap(), store.clone());
    let translator = RecordingTranslator::new(RemoteTranslator::new(fast_config(url)).unwrap(), store.clone());
    let live = planner.propose(&plan_request(), 1, 0.8, 4).unwrap();
    let live_vec = translator.embed("Joseph's brother is Dale").unwrap();
    store.save().unwrap();

    let store = FixtureStore::open(&path).unwrap();
    assert_eq!(store.len(), 2);
    let replay = ReplayPlanner::new(store.clone());
    assert_eq!(replay.propose(&plan_request(), 1, 0.8, 4).unwrap(), live);
    let miss = replay.propose(&plan_request(), 1, 0.8, 5).unwrap_err();
    assert!(matches!(miss, BackendError::ReplayMiss(_)));
    let tr = ReplayTranslator::new(store);
    assert_eq!(tr.embed("Joseph's brother is Dale").unwrap(), live_vec);
}
