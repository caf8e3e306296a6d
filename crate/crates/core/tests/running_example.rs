mod common;

use std::collections::{BTreeMap, BTreeSet};

use agent_miner::composer::{compose_mas, discover, remove_observable_iterations, verify_bundle, ComposerOptions, DfgMiner, InductiveMiner};
use agent_miner::conformance::{equivalent, log_automaton, measure, model_automaton, Dfa};
use agent_miner::dfg::build_dfg;
use agent_miner::event::case_trace_set;
use agent_miner::partition::{agent_log, agent_trace_set, interaction_log, partition};
use agent_miner::petri::{is_safe, is_sound};
use agent_miner::typing::{instance_dfgs, relabel_to_types, AgentTypeAssignment};
use agent_miner::{EventLog, Naming, WorkflowNet};
use common::*;

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn dfa(wf: &WorkflowNet) -> Dfa {
    model_automaton(wf, 100_000).unwrap()
}

#[test]
fn fixture_shape() {
    let s = table1("instance");
    assert_eq!(s.len(), 20);
    assert_eq!(s.cases().len(), 2);
    assert_eq!(s.agents(), BTreeSet::from(["d1", "d3", "d4"]));
    assert_eq!(s.events()[9].extras["event"], "j");
}

#[test]
fn case_traces() {
    let s = table1("type");
    let got: BTreeSet<String> = case_trace_set(&s).iter().map(|t| letters(t.ids())).collect();
    assert_eq!(got, set(&["abefghijklmnopqrs", "cdt"]));
}

#[test]
fn agent_traces_interaction_and_agent_log() {
    let s = table1("type");
    let traces: BTreeSet<String> = agent_trace_set(&s).iter().map(|t| letters(t.ids())).collect();
    assert_eq!(traces, set(&["abe", "cdt", "fg", "hijklmnop", "qrs"]));

    let il = interaction_log(&s);
    let firsts: String = letters(il.selection().iter().map(|e| e.id));
    assert_eq!(firsts, "acfhq");
    let il_traces: BTreeSet<String> = il.traces().iter().map(|t| letters(t.ids())).collect();
    assert_eq!(il_traces, set(&["afhq", "c"]));
    let f = il.selection().iter().find(|e| letter(e.id) == 'f').unwrap();
    assert_eq!(f.agent, "a2");
    let seqs: BTreeSet<Vec<String>> = il.label_sequences().unwrap().into_iter().collect();
    assert_eq!(seqs, BTreeSet::from([word("a1 a2 a3 a1"), word("a1")]));

    let a1 = agent_log(&s, "a1").unwrap();
    assert_eq!(letters(a1.selection().iter().map(|e| e.id)), "abcdeqrst");
    let a1_traces: BTreeSet<String> = a1.traces().iter().map(|t| letters(t.ids())).collect();
    assert_eq!(a1_traces, set(&["abe", "cdt", "qrs"]));

    let dfg = build_dfg(&a1.with_naming(Naming::Aol)).unwrap();
    let edges: BTreeMap<(String, String), u64> = dfg.edges.clone();
    let expected = BTreeMap::from([
        (("analyze".to_string(), "prescribe".to_string()), 3),
        (("check".to_string(), "analyze".to_string()), 3),
    ]);
    assert_eq!(edges, expected);
}

#[test]
fn typing_the_instances() {
    let s = table1("instance");
    assert_eq!(instance_dfgs(&s).unwrap().len(), 3);
    let map = BTreeMap::from([
        ("d1".to_string(), "a1".to_string()),
        ("d3".to_string(), "a3".to_string()),
        ("d4".to_string(), "a2".to_string()),
    ]);
    let typed = relabel_to_types(&s, &AgentTypeAssignment::from_map(map)).unwrap();
    let expected = table1("type");
    let strip = |sel: &agent_miner::EventSelection| -> Vec<(u64, String)> { sel.iter().map(|e| (e.id, e.agent.clone())).collect() };
    assert_eq!(strip(&typed), strip(&expected));
}

#[test]
fn log_automaton_of_case_traces() {
    let log = EventLog::from_cases(table1("type"), Naming::Aol);
    let d = log_automaton(&log).unwrap();
    let lengths: Vec<usize> = d.words_up_to(40).iter().map(Vec::len).collect();
    assert_eq!(lengths.iter().copied().collect::<BTreeSet<_>>(), BTreeSet::from([3, 17]));
    // The short trace is a prefix of the long one.
    assert_eq!(d.state_count(), 18);
}

#[test]
fn example_inets() {
    let f3 = fig3a();
    assert_eq!(f3.size(), 31);
    assert!(is_safe(&f3, 1000).unwrap() && is_sound(&f3, 1000).unwrap());
    let got = words(&f3, 7);
    let mut expected = BTreeSet::new();
    // a1 ((a2 a3 | a3 a2) a1)*, enumerated by rounds.
    for rounds in 0..=2 {
        for choice in 0..(1 << rounds) {
            let mut w = word("a1");
            for r in 0..rounds {
                if choice >> r & 1 == 0 {
                    w.extend(word("a2 a3 a1"));
                } else {
                    w.extend(word("a3 a2 a1"));
                }
            }
            expected.insert(w);
        }
    }
    assert_eq!(got, expected);

    let f4 = fig4();
    assert_eq!(f4.size(), 20);
    let got = words(&f4, 7);
    let expected = BTreeSet::from([word("a1"), word("a1 a2 a3 a1"), word("a1 a2 a3 a1 a2 a3 a1")]);
    assert_eq!(got, expected);
    assert_eq!(remove_observable_iterations(&f4, 1000, None).unwrap(), f4);
}

#[test]
fn agent_net_a3_language() {
    let got = dfa(&fig6_a3()).words_up_to(9);
    let round = "a3|physio a3|swim a3|yoga";
    let expected = BTreeSet::from([word(round), word(&[round; 2].join(" ")), word(&[round; 3].join(" "))]);
    assert_eq!(got, expected);
}

/// a1 a2 a3+ rounds between prescriptions, up to `max_len` labels.
fn mas_language(max_len: usize) -> BTreeSet<Vec<String>> {
    let head = word("a1|check a1|analyze a1|prescribe");
    let therapy = word("a3|physio a3|swim a3|yoga");
    let mut out = BTreeSet::new();
    let mut frontier = vec![head.clone()];
    while let Some(w) = frontier.pop() {
        if w.len() > max_len {
            continue;
        }
        out.insert(w.clone());
        // One more round: tests, k ≥ 1 therapy blocks, then the doctor.
        for k in 1.. {
            let mut next = w.clone();
            next.extend(word("a2|B-test a2|X-ray"));
            for _ in 0..k {
                next.extend(therapy.clone());
            }
            next.extend(head.clone());
            if next.len() > max_len {
                break;
            }
            frontier.push(next);
        }
    }
    out
}

#[test]
fn discovery_reproduces_the_example_nets() {
    let s = table1("type");
    let b = discover(&s, &DfgMiner, &InductiveMiner, 1.0, 0.0, ComposerOptions::default()).unwrap();
    assert!(b.warnings.is_empty());
    for (agent, net) in fig6() {
        assert!(equivalent(&dfa(&b.agent_nets[&agent]), &dfa(&net)), "agent net {agent}");
        assert_eq!(b.agent_nets[&agent].size(), net.size(), "agent net {agent}");
    }
    assert!(equivalent(&dfa(&b.interaction_net), &dfa(&fig4())));
    assert_eq!(b.interaction_net.size(), fig4().size());
    assert!(equivalent(&dfa(&b.mas_net), &dfa(&fig7())));
    assert_eq!(words(&b.mas_net, 17), mas_language(17));
    assert_eq!(words(&fig7(), 17), mas_language(17));

    let report = verify_bundle(&b, 100_000).unwrap();
    assert!(report.all_hold(), "{report:?}");

    let aol = EventLog::from_cases(s, Naming::Aol);
    let q = measure(&b.mas_net.rewrite_labels_to_activity(), &aol, 100_000).unwrap();
    assert!((q.recall - 1.0).abs() < 1e-9);
}

#[test]
fn composing_the_example_nets() {
    let mas = compose_mas(&fig4(), &fig6()).unwrap();
    assert!(is_safe(&mas, 1000).unwrap() && is_sound(&mas, 1000).unwrap());
    assert!(equivalent(&dfa(&mas), &dfa(&fig7())));
}

#[test]
fn unsound_agent_net_is_pinpointed() {
    let mut agents = fig6();
    // X-ray needs tokens from both branches of a choice, so it is dead.
    agents.insert(
        "a2".into(),
        net(
            &["p1", "p2", "p3", "p4"],
            &[("t1", Some("a2|B-test")), ("t2", Some("a2|X-ray")), ("t3", None)],
            &[("p1", "t1"), ("t1", "p2"), ("p2", "t2"), ("t2", "p3"), ("p1", "t3"), ("t3", "p4"), ("p4", "t2")],
            "p1",
            "p3",
        ),
    );
    let b = agent_miner::composer::DiscoveryBundle {
        interaction_net: fig4(),
        mas_net: compose_mas(&fig4(), &agents).unwrap(),
        agent_nets: agents,
        parameters: agent_miner::composer::Parameters { ff: 1.0, th: 0.0 },
        warnings: vec![],
    };
    let report = verify_bundle(&b, 10_000).unwrap();
    assert_eq!(report.failing(), vec!["agent:a2", "mas"]);
}

#[test]
fn partition_matches_separate_calls() {
    let s = table1("type");
    let p = partition(&s);
    assert_eq!(p.agent_traces, agent_trace_set(&s));
    assert_eq!(p.interaction.traces(), interaction_log(&s).traces());
    for (a, log) in &p.agent_logs {
        assert_eq!(log.traces(), agent_log(&s, a).unwrap().traces());
    }
}
