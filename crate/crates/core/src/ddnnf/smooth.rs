use std::collections::HashMap;

use super::{Ddnnf, DdnnfNode, NodeId};
use crate::lit::{Lit, Var};

/// Smooths `d`: every disjunct of an or-node mentions the same variables,
/// and the root mentions all `num_vars` variables. Missing variables `a`
/// are added as conjuncts `(a | !a)`, so the set of models over the atom
/// set is unchanged.
pub fn smooth(d: &Ddnnf) -> Ddnnf {
    let mut out = Ddnnf::new(d.num_vars());
    let mut map: HashMap<NodeId, NodeId> = HashMap::new();
    let mut pads: HashMap<Var, NodeId> = HashMap::new();
    for id in d.reachable() {
        let r = match d.node(id) {
            DdnnfNode::True => NodeId::TRUE,
            DdnnfNode::False => NodeId::FALSE,
            DdnnfNode::Lit(l) => out.lit(*l),
            DdnnfNode::And(cs) => {
                let kids: Vec<NodeId> = cs.iter().map(|c| map[c]).collect();
                out.and(kids)
            }
            DdnnfNode::Or { decision, children } => {
                let all = d.support(id);
                let mut kids = Vec::with_capacity(children.len());
                for c in children.iter() {
                    let mapped = map[c];
                    if mapped == NodeId::FALSE {
                        continue;
                    }
                    kids.push(pad(&mut out, &mut pads, mapped, all));
                }
                out.or(*decision, kids)
            }
        };
        map.insert(id, r);
    }
    let root = map[&d.root()];
    let all: Vec<Var> = (1..=d.num_vars() as u32).map(Var::new).collect();
    let root = if root == NodeId::FALSE {
        root
    } else {
        pad(&mut out, &mut pads, root, &all)
    };
    out.set_root(root);
    out
}

fn pad(out: &mut Ddnnf, pads: &mut HashMap<Var, NodeId>, node: NodeId, want: &[Var]) -> NodeId {
    let have = out.support(node).to_vec();
    let missing: Vec<Var> = want.iter().copied().filter(|v| have.binary_search(v).is_err()).collect();
    if missing.is_empty() {
        return node;
    }
    // extend a conjunction in place so decision literals stay direct children
    let mut kids = match out.node(node) {
        DdnnfNode::And(cs) => cs.to_vec(),
        _ => vec![node],
    };
    for v in missing {
        let p = match pads.get(&v) {
            Some(&p) => p,
            None => {
                let (a, na) = (out.lit(Lit::new(v, true)), out.lit(Lit::new(v, false)));
                let p = out.or(Some(v), [a, na]);
                pads.insert(v, p);
                p
            }
        };
        kids.push(p);
    }
    out.and(kids)
}
