//! Decision-DNNF circuits.
//!
//! A [`Ddnnf`] is a hash-consed arena of NNF nodes stored in topological
//! order (children before parents). Disjunctions produced by the compiler
//! are *decision* nodes `(v & hi) | (!v & lo)`, stored as an or-node tagged
//! with `v` whose two children conjoin `v` and `!v` respectively; this
//! makes determinism a structural property that [`validate`] can check.
//! Untagged or-nodes only arise from files and are never deterministic by
//! construction.

mod compile;
mod smooth;
mod validate;

use std::collections::HashMap;
use std::sync::Arc;

pub use compile::{compile, partition, select_literal, CompileOptions, Heuristic};
pub use smooth::smooth;
pub use validate::{validate, Report};

use crate::lit::{Lit, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub const TRUE: NodeId = NodeId(0);
    pub const FALSE: NodeId = NodeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DdnnfNode {
    True,
    False,
    Lit(Lit),
    And(Box<[NodeId]>),
    Or {
        decision: Option<Var>,
        children: Box<[NodeId]>,
    },
}

impl DdnnfNode {
    pub fn children(&self) -> &[NodeId] {
        match self {
            DdnnfNode::And(cs) | DdnnfNode::Or { children: cs, .. } => cs,
            _ => &[],
        }
    }
}

/// Arena plus root; `num_vars` is the size of the atom set the circuit is
/// interpreted over.
#[derive(Clone, Debug)]
pub struct Ddnnf {
    nodes: Vec<DdnnfNode>,
    support: Vec<Arc<[Var]>>,
    unique: HashMap<DdnnfNode, NodeId>,
    root: NodeId,
    num_vars: usize,
}

impl Ddnnf {
    pub fn new(num_vars: usize) -> Ddnnf {
        let empty: Arc<[Var]> = Arc::from(Vec::new());
        let mut unique = HashMap::new();
        unique.insert(DdnnfNode::True, NodeId::TRUE);
        unique.insert(DdnnfNode::False, NodeId::FALSE);
        Ddnnf {
            nodes: vec![DdnnfNode::True, DdnnfNode::False],
            support: vec![empty.clone(), empty],
            unique,
            root: NodeId::TRUE,
            num_vars,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn set_root(&mut self, root: NodeId) {
        self.root = root;
    }

    /// Arena size, including unreachable nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, id: NodeId) -> &DdnnfNode {
        &self.nodes[id.index()]
    }

    /// Sorted variables below `id`.
    pub fn support(&self, id: NodeId) -> &[Var] {
        &self.support[id.index()]
    }

    /// Nodes reachable from the root, children first.
    pub fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        seen[self.root.index()] = true;
        while let Some(id) = stack.pop() {
            for &c in self.node(id).children() {
                if !seen[c.index()] {
                    seen[c.index()] = true;
                    stack.push(c);
                }
            }
        }
        // arena order is topological
        (0..self.nodes.len() as u32)
            .map(NodeId)
            .filter(|id| seen[id.index()])
            .collect()
    }

    /// `(nodes, edges)` of the reachable circuit.
    pub fn size(&self) -> (usize, usize) {
        let r = self.reachable();
        let edges = r.iter().map(|&id| self.node(id).children().len()).sum();
        (r.len(), edges)
    }

    fn intern(&mut self, node: DdnnfNode) -> NodeId {
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let support: Arc<[Var]> = match &node {
            DdnnfNode::True | DdnnfNode::False => Arc::from(Vec::new()),
            DdnnfNode::Lit(l) => Arc::from(vec![l.var()]),
            DdnnfNode::And(cs) | DdnnfNode::Or { children: cs, .. } => {
                let mut vs: Vec<Var> = cs
                    .iter()
                    .flat_map(|c| self.support[c.index()].iter().copied())
                    .collect();
                vs.sort_unstable();
                vs.dedup();
                Arc::from(vs)
            }
        };
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(node.clone());
        self.support.push(support);
        self.unique.insert(node, id);
        id
    }

    pub fn constant(&self, value: bool) -> NodeId {
        if value {
            NodeId::TRUE
        } else {
            NodeId::FALSE
        }
    }

    pub fn lit(&mut self, lit: Lit) -> NodeId {
        self.intern(DdnnfNode::Lit(lit))
    }

    /// Conjunction with constant folding; children are sorted.
    pub fn and(&mut self, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut cs = Vec::new();
        for c in children {
            if c == NodeId::FALSE {
                return NodeId::FALSE;
            }
            if c != NodeId::TRUE {
                cs.push(c);
            }
        }
        cs.sort_unstable();
        cs.dedup();
        match cs.len() {
            0 => NodeId::TRUE,
            1 => cs[0],
            _ => self.intern(DdnnfNode::And(cs.into_boxed_slice())),
        }
    }

    /// Disjunction with constant folding. Child order is kept.
    pub fn or(&mut self, decision: Option<Var>, children: impl IntoIterator<Item = NodeId>) -> NodeId {
        let mut cs = Vec::new();
        for c in children {
            if c == NodeId::TRUE {
                return NodeId::TRUE;
            }
            if c != NodeId::FALSE && !cs.contains(&c) {
                cs.push(c);
            }
        }
        match cs.len() {
            0 => NodeId::FALSE,
            1 => cs[0],
            _ => self.intern(DdnnfNode::Or {
                decision,
                children: cs.into_boxed_slice(),
            }),
        }
    }

    /// `(v & hi) | (!v & lo)`.
    pub fn decision(&mut self, v: Var, hi: NodeId, lo: NodeId) -> NodeId {
        if hi == lo {
            return hi;
        }
        let (pos, neg) = (self.lit(Lit::new(v, true)), self.lit(Lit::new(v, false)));
        let h = self.and([pos, hi]);
        let l = self.and([neg, lo]);
        self.or(Some(v), [h, l])
    }

    /// Evaluates the circuit under a total assignment.
    pub fn eval(&self, value: &dyn Fn(Var) -> bool) -> bool {
        let mut val = vec![false; self.nodes.len()];
        for id in self.reachable() {
            val[id.index()] = match self.node(id) {
                DdnnfNode::True => true,
                DdnnfNode::False => false,
                DdnnfNode::Lit(l) => value(l.var()) == l.is_positive(),
                DdnnfNode::And(cs) => cs.iter().all(|c| val[c.index()]),
                DdnnfNode::Or { children, .. } => children.iter().any(|c| val[c.index()]),
            };
        }
        val[self.root.index()]
    }

    /// Evaluation under the bits of `bits` (bit `i` is variable `i + 1`).
    pub fn eval_bits(&self, bits: u64) -> bool {
        self.eval(&|v| bits >> v.index() & 1 == 1)
    }

    /// Copies the reachable circuit of `other` into a fresh arena.
    pub fn compact(&self) -> Ddnnf {
        let mut out = Ddnnf::new(self.num_vars);
        let mut map: HashMap<NodeId, NodeId> = HashMap::new();
        for id in self.reachable() {
            let m = |c: &NodeId| map[c];
            let r = match self.node(id) {
                DdnnfNode::True => NodeId::TRUE,
                DdnnfNode::False => NodeId::FALSE,
                DdnnfNode::Lit(l) => out.lit(*l),
                DdnnfNode::And(cs) => {
                    let kids: Vec<NodeId> = cs.iter().map(m).collect();
                    out.intern(DdnnfNode::And(kids.into_boxed_slice()))
                }
                DdnnfNode::Or { decision, children } => {
                    let kids: Vec<NodeId> = children.iter().map(m).collect();
                    out.intern(DdnnfNode::Or {
                        decision: *decision,
                        children: kids.into_boxed_slice(),
                    })
                }
            };
            map.insert(id, r);
        }
        out.root = map[&self.root];
        out
    }

    /// Inserts a node without folding; used when loading circuits from
    /// files so that their structure is kept verbatim.
    pub fn raw(&mut self, node: DdnnfNode) -> NodeId {
        match node {
            DdnnfNode::True => NodeId::TRUE,
            DdnnfNode::False => NodeId::FALSE,
            n => self.intern(n),
        }
    }
}
