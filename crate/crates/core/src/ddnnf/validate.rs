use super::{Ddnnf, DdnnfNode, NodeId};
use crate::lit::Lit;

/// Outcome of the structural checks on a circuit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Report {
    pub decomposable: bool,
    /// Every or-node is a well-formed decision node.
    pub deterministic: bool,
    pub smooth: bool,
    /// First violation found, children before parents.
    pub violation: Option<String>,
}

/// Checks decomposability, the decision-node discipline and smoothness.
/// With `alpha_vars`, smoothness also requires the root to mention every
/// variable `1..=alpha_vars`.
pub fn validate(d: &Ddnnf, alpha_vars: Option<usize>) -> Report {
    let mut r = Report {
        decomposable: true,
        deterministic: true,
        smooth: true,
        violation: None,
    };
    let flag = |r: &mut Report, msg: String| {
        if r.violation.is_none() {
            r.violation = Some(msg);
        }
    };
    for id in d.reachable() {
        match d.node(id) {
            DdnnfNode::And(cs) => {
                let mut seen = Vec::new();
                for &c in cs.iter() {
                    for &v in d.support(c) {
                        if seen.contains(&v) {
                            r.decomposable = false;
                            flag(&mut r, format!("and-node {} shares variable {v} between children", id.index()));
                        }
                    }
                    seen.extend_from_slice(d.support(c));
                }
            }
            DdnnfNode::Or { decision, children } => {
                let live: Vec<NodeId> = children.iter().copied().filter(|&c| c != NodeId::FALSE).collect();
                let ok = match decision {
                    Some(v) => {
                        live.len() <= 2
                            && live.iter().any(|&c| asserts(d, c, Lit::new(*v, true)))
                            && live.iter().any(|&c| asserts(d, c, Lit::new(*v, false)))
                    }
                    None => live.len() <= 1,
                };
                if !ok {
                    r.deterministic = false;
                    flag(&mut r, format!("or-node {} is not a decision node", id.index()));
                }
                if let Some((first, rest)) = live.split_first() {
                    if rest.iter().any(|&c| d.support(c) != d.support(*first)) {
                        r.smooth = false;
                        flag(&mut r, format!("or-node {} has children over different variables", id.index()));
                    }
                }
            }
            _ => {}
        }
    }
    if let Some(n) = alpha_vars {
        if d.root() != NodeId::FALSE && d.support(d.root()).len() != n {
            r.smooth = false;
            flag(&mut r, "root does not mention every variable of the atom set".into());
        }
    }
    r
}

/// Whether `id` is `lit` or a conjunction with `lit` as a direct child.
fn asserts(d: &Ddnnf, id: NodeId, lit: Lit) -> bool {
    match d.node(id) {
        DdnnfNode::Lit(l) => *l == lit,
        DdnnfNode::And(cs) => cs.iter().any(|&c| *d.node(c) == DdnnfNode::Lit(lit)),
        _ => false,
    }
}
