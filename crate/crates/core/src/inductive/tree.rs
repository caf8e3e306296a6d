use std::fmt;

use crate::petri::{Label, LabeledNet, PlaceId, WorkflowNet};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProcessTree {
    Activity(String),
    Silent,
    Sequence(Vec<ProcessTree>),
    Xor(Vec<ProcessTree>),
    Parallel(Vec<ProcessTree>),
    /// Body, then any number of (redo, body) repetitions.
    Loop(Box<ProcessTree>, Box<ProcessTree>),
}

impl ProcessTree {
    pub fn activity(a: impl Into<String>) -> Self {
        ProcessTree::Activity(a.into())
    }

    pub fn looped(body: ProcessTree, redo: ProcessTree) -> Self {
        ProcessTree::Loop(Box::new(body), Box::new(redo))
    }

    /// Smallest activity label in the subtree; `None` for silent-only
    /// subtrees, which sort first.
    pub fn min_label(&self) -> Option<&str> {
        match self {
            ProcessTree::Activity(a) => Some(a),
            ProcessTree::Silent => None,
            ProcessTree::Sequence(c) | ProcessTree::Xor(c) | ProcessTree::Parallel(c) => {
                c.iter().filter_map(ProcessTree::min_label).min()
            }
            ProcessTree::Loop(b, r) => [b.min_label(), r.min_label()].into_iter().flatten().min(),
        }
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        match self {
            ProcessTree::Activity(_) | ProcessTree::Silent => 1,
            ProcessTree::Sequence(c) | ProcessTree::Xor(c) | ProcessTree::Parallel(c) => {
                1 + c.iter().map(ProcessTree::node_count).sum::<usize>()
            }
            ProcessTree::Loop(b, r) => 1 + b.node_count() + r.node_count(),
        }
    }

    /// Flattens nested operators of the same kind, collapses one-child
    /// operators and orders xor/parallel children by smallest label.
    pub fn normalized(self) -> ProcessTree {
        fn collect(children: Vec<ProcessTree>, same: fn(&ProcessTree) -> Option<&Vec<ProcessTree>>) -> Vec<ProcessTree> {
            let mut out = Vec::new();
            for c in children {
                let c = c.normalized();
                match same(&c) {
                    Some(_) => match c {
                        ProcessTree::Sequence(v) | ProcessTree::Xor(v) | ProcessTree::Parallel(v) => out.extend(v),
                        _ => unreachable!(),
                    },
                    None => out.push(c),
                }
            }
            out
        }
        fn sort(mut v: Vec<ProcessTree>) -> Vec<ProcessTree> {
            v.sort_by(|a, b| a.min_label().cmp(&b.min_label()));
            v
        }
        let wrap = |v: Vec<ProcessTree>, make: fn(Vec<ProcessTree>) -> ProcessTree| {
            if v.len() == 1 {
                v.into_iter().next().unwrap()
            } else {
                make(v)
            }
        };
        match self {
            ProcessTree::Sequence(c) => {
                let v = collect(c, |t| match t {
                    ProcessTree::Sequence(v) => Some(v),
                    _ => None,
                });
                wrap(v, ProcessTree::Sequence)
            }
            ProcessTree::Xor(c) => {
                let v = sort(collect(c, |t| match t {
                    ProcessTree::Xor(v) => Some(v),
                    _ => None,
                }));
                wrap(v, ProcessTree::Xor)
            }
            ProcessTree::Parallel(c) => {
                let v = sort(collect(c, |t| match t {
                    ProcessTree::Parallel(v) => Some(v),
                    _ => None,
                }));
                wrap(v, ProcessTree::Parallel)
            }
            ProcessTree::Loop(b, r) => ProcessTree::looped(b.normalized(), r.normalized()),
            leaf => leaf,
        }
    }
}

impl fmt::Display for ProcessTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, op: &str, c: &[ProcessTree]| {
            write!(f, "{op}(")?;
            for (i, t) in c.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")
        };
        match self {
            ProcessTree::Activity(a) => write!(f, "'{a}'"),
            ProcessTree::Silent => f.write_str("tau"),
            ProcessTree::Sequence(c) => list(f, "->", c),
            ProcessTree::Xor(c) => list(f, "X", c),
            ProcessTree::Parallel(c) => list(f, "+", c),
            ProcessTree::Loop(b, r) => write!(f, "*({b}, {r})"),
        }
    }
}

/// Builds `tree` between `entry` and `exit`. Fragments only consume from
/// `entry` and only produce into `exit`, which lets siblings share them.
fn build(tree: &ProcessTree, net: &mut LabeledNet, entry: PlaceId, exit: PlaceId, counter: &mut usize) {
    let place = |net: &mut LabeledNet, counter: &mut usize| {
        *counter += 1;
        net.add_place(format!("p{counter}"))
    };
    let step = |net: &mut LabeledNet, name: String, label: Label, from: PlaceId, to: PlaceId| {
        let t = net.add_transition(name, label);
        net.add_input(from, t).expect("fresh nodes");
        net.add_output(t, to).expect("fresh nodes");
        t
    };
    match tree {
        ProcessTree::Activity(a) => {
            step(net, a.clone(), Label::Visible(a.clone()), entry, exit);
        }
        ProcessTree::Silent => {
            step(net, "tau".into(), Label::Silent, entry, exit);
        }
        ProcessTree::Sequence(children) => {
            let mut from = entry;
            for (k, c) in children.iter().enumerate() {
                let to = if k + 1 == children.len() { exit } else { place(net, counter) };
                build(c, net, from, to, counter);
                from = to;
            }
        }
        ProcessTree::Xor(children) => {
            for c in children {
                build(c, net, entry, exit, counter);
            }
        }
        ProcessTree::Parallel(children) => {
            let split = net.add_transition("split", Label::Silent);
            let join = net.add_transition("join", Label::Silent);
            net.add_input(entry, split).expect("fresh nodes");
            net.add_output(join, exit).expect("fresh nodes");
            for c in children {
                let s = place(net, counter);
                let e = place(net, counter);
                net.add_output(split, s).expect("fresh nodes");
                net.add_input(e, join).expect("fresh nodes");
                build(c, net, s, e, counter);
            }
        }
        ProcessTree::Loop(body, redo) => {
            let a = place(net, counter);
            let b = place(net, counter);
            step(net, "loop enter".into(), Label::Silent, entry, a);
            build(body, net, a, b, counter);
            build(redo, net, b, a, counter);
            step(net, "loop exit".into(), Label::Silent, b, exit);
        }
    }
}

/// Compositional translation into a safe and sound workflow net.
pub fn tree_to_wfnet(tree: &ProcessTree) -> WorkflowNet {
    let mut net = LabeledNet::new();
    let i = net.add_place("i");
    let f = net.add_place("f");
    let mut counter = 0;
    build(tree, &mut net, i, f, &mut counter);
    WorkflowNet::new(net, i, f).expect("tree translation yields a workflow net")
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;
    use crate::petri::{accepted_words, is_safe, is_sound};

    fn a(s: &str) -> ProcessTree {
        ProcessTree::activity(s)
    }

    fn words(t: &ProcessTree, n: usize) -> BTreeSet<String> {
        let w = tree_to_wfnet(t);
        assert!(is_safe(&w, 10_000).unwrap(), "{t} unsafe");
        assert!(is_sound(&w, 10_000).unwrap(), "{t} unsound");
        accepted_words(&w, n, 10_000).unwrap().into_iter().map(|w| w.concat()).collect()
    }

    #[test]
    fn leaf_is_five_elements() {
        assert_eq!(tree_to_wfnet(&a("a")).size(), 5);
    }

    #[test]
    fn loop_language() {
        let got = words(&ProcessTree::looped(a("a"), a("b")), 6);
        let expected: BTreeSet<String> = ["a", "aba", "ababa"].iter().map(|s| s.to_string()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn operators() {
        let seq = ProcessTree::Sequence(vec![a("a"), a("b")]);
        assert_eq!(words(&seq, 4), BTreeSet::from(["ab".to_string()]));
        let par = ProcessTree::Parallel(vec![a("a"), a("b")]);
        assert_eq!(words(&par, 4), BTreeSet::from(["ab".to_string(), "ba".to_string()]));
        let xor = ProcessTree::Xor(vec![ProcessTree::Silent, a("b")]);
        assert_eq!(words(&xor, 4), BTreeSet::from(["".to_string(), "b".to_string()]));
        let nested = ProcessTree::looped(ProcessTree::looped(a("a"), ProcessTree::Silent), a("b"));
        assert!(words(&nested, 3).contains("aba"));
    }

    #[test]
    fn normalization_orders_and_flattens() {
        let t = ProcessTree::Xor(vec![a("c"), ProcessTree::Xor(vec![a("b"), ProcessTree::Silent])]).normalized();
        assert_eq!(t.to_string(), "X(tau, 'b', 'c')");
        let t = ProcessTree::Sequence(vec![a("x")]).normalized();
        assert_eq!(t, a("x"));
    }
}
