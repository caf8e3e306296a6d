#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use agent_miner::inductive::ProcessTree;
use agent_miner::log_io::{parse_csv, ColumnMapping};
use agent_miner::petri::accepted_words;
use agent_miner::{EventSelection, Label, LabeledNet, WorkflowNet};
use proptest::prelude::*;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

/// The running-example selection with agents taken from `column`
/// (`instance` or `type`). Event ids 0..20 correspond to e^a..e^t.
pub fn table1(column: &str) -> EventSelection {
    let mapping = ColumnMapping {
        agent_column: column.into(),
        ..ColumnMapping::default()
    };
    parse_csv(fixture("table1.csv"), &mapping).unwrap()
}

pub fn letter(id: u64) -> char {
    (b'a' + id as u8) as char
}

pub fn letters(ids: impl IntoIterator<Item = u64>) -> String {
    ids.into_iter().map(letter).collect()
}

/// Builds a workflow net from named nodes. Transitions labeled `None` are
/// silent; arcs are `(from, to)` by name.
pub fn net(places: &[&str], transitions: &[(&str, Option<&str>)], arcs: &[(&str, &str)], i: &str, f: &str) -> WorkflowNet {
    let mut n = LabeledNet::new();
    let p: BTreeMap<&str, _> = places.iter().map(|&x| (x, n.add_place(x))).collect();
    let t: BTreeMap<&str, _> = transitions
        .iter()
        .map(|&(x, l)| (x, n.add_transition(x, l.map_or(Label::Silent, Label::visible))))
        .collect();
    for &(a, b) in arcs {
        match (p.get(a), t.get(b), t.get(a), p.get(b)) {
            (Some(&pa), Some(&tb), _, _) => n.add_input(pa, tb).unwrap(),
            (_, _, Some(&ta), Some(&pb)) => n.add_output(ta, pb).unwrap(),
            _ => panic!("bad arc {a} -> {b}"),
        }
    }
    WorkflowNet::new(n, p[i], p[f]).unwrap()
}

/// i-net with concurrent a2 and a3 rounds between a1 occurrences.
pub fn fig3a() -> WorkflowNet {
    net(
        &["p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8"],
        &[("t1", None), ("t2", None), ("t3", Some("a3")), ("t4", Some("a2")), ("t5", Some("a1")), ("t6", None), ("t7", None)],
        &[
            ("p1", "t1"),
            ("t1", "p2"),
            ("p2", "t5"),
            ("t5", "p7"),
            ("p7", "t6"),
            ("t6", "p5"),
            ("t6", "p6"),
            ("p5", "t3"),
            ("t3", "p3"),
            ("p6", "t4"),
            ("t4", "p4"),
            ("p3", "t2"),
            ("p4", "t2"),
            ("t2", "p2"),
            ("p7", "t7"),
            ("t7", "p8"),
        ],
        "p1",
        "p8",
    )
}

/// i-net with language a1 (a2 a3 a1)*.
pub fn fig4() -> WorkflowNet {
    net(
        &["p1", "p2", "p3", "p4", "p5"],
        &[("t1", None), ("t2", Some("a3")), ("t3", Some("a2")), ("t4", None), ("t5", Some("a1"))],
        &[
            ("p1", "t1"),
            ("t1", "p2"),
            ("p2", "t5"),
            ("t5", "p4"),
            ("p4", "t3"),
            ("t3", "p3"),
            ("p3", "t2"),
            ("t2", "p2"),
            ("p4", "t4"),
            ("t4", "p5"),
        ],
        "p1",
        "p5",
    )
}

pub fn fig6_a1() -> WorkflowNet {
    net(
        &["p1", "p2", "p3", "p4"],
        &[("t1", Some("a1|check")), ("t2", Some("a1|analyze")), ("t3", Some("a1|prescribe"))],
        &[("p1", "t1"), ("t1", "p2"), ("p2", "t2"), ("t2", "p3"), ("p3", "t3"), ("t3", "p4")],
        "p1",
        "p4",
    )
}

pub fn fig6_a2() -> WorkflowNet {
    net(
        &["p1", "p2", "p3"],
        &[("t1", Some("a2|B-test")), ("t2", Some("a2|X-ray"))],
        &[("p1", "t1"), ("t1", "p2"), ("p2", "t2"), ("t2", "p3")],
        "p1",
        "p3",
    )
}

pub fn fig6_a3() -> WorkflowNet {
    net(
        &["p1", "p2", "p3", "p4", "p5", "p6"],
        &[
            ("t1", None),
            ("t2", Some("a3|physio")),
            ("t3", Some("a3|swim")),
            ("t4", Some("a3|yoga")),
            ("t5", None),
            ("t6", None),
        ],
        &[
            ("p1", "t1"),
            ("t1", "p2"),
            ("p2", "t2"),
            ("t2", "p3"),
            ("p3", "t3"),
            ("t3", "p4"),
            ("p4", "t4"),
            ("t4", "p5"),
            ("p5", "t5"),
            ("t5", "p6"),
            ("p5", "t6"),
            ("t6", "p2"),
        ],
        "p1",
        "p6",
    )
}

pub fn fig6() -> BTreeMap<String, WorkflowNet> {
    BTreeMap::from([("a1".into(), fig6_a1()), ("a2".into(), fig6_a2()), ("a3".into(), fig6_a3())])
}

pub fn fig7() -> WorkflowNet {
    net(
        &["p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9", "p10", "p11", "p12"],
        &[
            ("t1", None),
            ("t2", Some("a1|check")),
            ("t3", Some("a1|analyze")),
            ("t4", Some("a1|prescribe")),
            ("t5", Some("a2|B-test")),
            ("t6", Some("a2|X-ray")),
            ("t7", None),
            ("t8", Some("a3|physio")),
            ("t9", Some("a3|swim")),
            ("t10", Some("a3|yoga")),
            ("t11", None),
            ("t12", None),
            ("t13", None),
        ],
        &[
            ("p1", "t1"),
            ("t1", "p2"),
            ("p2", "t2"),
            ("t2", "p3"),
            ("p3", "t3"),
            ("t3", "p4"),
            ("p4", "t4"),
            ("t4", "p5"),
            ("p5", "t5"),
            ("t5", "p6"),
            ("p6", "t6"),
            ("t6", "p7"),
            ("p7", "t7"),
            ("t7", "p8"),
            ("p8", "t8"),
            ("t8", "p9"),
            ("p9", "t9"),
            ("t9", "p10"),
            ("p10", "t10"),
            ("t10", "p11"),
            ("p11", "t11"),
            ("t11", "p8"),
            ("p11", "t12"),
            ("t12", "p2"),
            ("p5", "t13"),
            ("t13", "p12"),
        ],
        "p1",
        "p12",
    )
}

pub fn words(wf: &WorkflowNet, max_len: usize) -> BTreeSet<Vec<String>> {
    accepted_words(wf, max_len, 100_000).unwrap()
}

pub fn word(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

/// Random process trees over `a..e` of depth at most 5.
pub fn tree() -> impl Strategy<Value = ProcessTree> {
    let leaf = prop_oneof![
        4 => (0..5u8).prop_map(|c| ProcessTree::activity(((b'a' + c) as char).to_string())),
        1 => Just(ProcessTree::Silent),
    ];
    leaf.prop_recursive(5, 20, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(ProcessTree::Sequence),
            prop::collection::vec(inner.clone(), 2..4).prop_map(ProcessTree::Xor),
            prop::collection::vec(inner.clone(), 2..3).prop_map(ProcessTree::Parallel),
            (inner.clone(), inner).prop_map(|(b, r)| ProcessTree::looped(b, r)),
        ]
    })
}

/// Label sequences over `a..e`.
pub fn sequences(max_traces: usize, max_len: usize) -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(
        prop::collection::vec((0..5u8).prop_map(|c| ((b'a' + c) as char).to_string()), 0..=max_len),
        1..=max_traces,
    )
}

/// One case per nonempty sequence, one agent, activities as given.
pub fn log_from_sequences(seqs: &[Vec<String>]) -> agent_miner::EventLog {
    let mut events = Vec::new();
    for (c, s) in seqs.iter().enumerate() {
        for (k, a) in s.iter().enumerate() {
            let id = events.len() as u64;
            events.push(agent_miner::Event::new(id, k as i64, format!("c{c}"), a.as_str(), "ag"));
        }
    }
    agent_miner::EventLog::from_cases(EventSelection::new(events).unwrap(), agent_miner::Naming::Aol)
}
