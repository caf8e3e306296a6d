use std::fmt::Write as _;

use super::{Label, WorkflowNet};

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: places as circles (source marked with a token),
/// observable transitions as labeled boxes, silent ones as filled black
/// boxes.
pub fn to_dot(wf: &WorkflowNet, name: &str) -> String {
    let net = wf.net();
    let mut s = String::new();
    let _ = writeln!(s, "digraph {} {{", quote(name));
    s.push_str("  rankdir=LR;\n");
    for p in net.places() {
        let label = if p == wf.initial() {
            "●"
        } else if p == wf.final_place() {
            "◎"
        } else {
            ""
        };
        let _ = writeln!(s, "  {p} [shape=circle, width=0.4, fixedsize=true, label={}];", quote(label));
    }
    for t in net.transitions() {
        match net.label(t) {
            Label::Visible(l) => {
                let _ = writeln!(s, "  {t} [shape=box, label={}];", quote(l));
            }
            Label::Silent => {
                let _ = writeln!(s, "  {t} [shape=box, style=filled, fillcolor=black, width=0.15, label=\"\"];");
            }
        }
    }
    for arc in net.arcs() {
        match arc {
            super::Arc::Input(p, t) => {
                let _ = writeln!(s, "  {p} -> {t};");
            }
            super::Arc::Output(t, p) => {
                let _ = writeln!(s, "  {t} -> {p};");
            }
        }
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn silent_transitions_are_filled() {
        let dot = to_dot(&WorkflowNet::single(Label::Silent), "n");
        assert!(dot.contains("fillcolor=black"));
        let dot = to_dot(&WorkflowNet::single(Label::visible("say \"hi\"")), "n");
        assert!(dot.contains("label=\"say \\\"hi\\\"\""));
        assert_eq!(dot.matches("->").count(), 2);
    }
}
