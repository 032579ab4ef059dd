//! Labeled trees: enumeration, values, and the structural audit.
//!
//! Children are ordered (plane trees). Mirror labelings are therefore distinct
//! trees, and summing values with no symmetry factors reproduces the
//! ordered-pair recursion exactly.

use crate::error::{Error, Result};
use crate::formal_expansion::{support_bound, ExpansionKind};
use crate::fourier_core::{modes_within, small_divisor, Mode, ProblemSpec};
use num_complex::Complex64;
use serde::Serialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeKind {
    /// Endpoint carrying f_ν.
    Black,
    /// Endpoint carrying c₀ (order label 0).
    White,
    /// Vertex with zero outgoing momentum (factor −1/2c₀).
    ZeroVertex,
    /// Vertex with nonzero outgoing momentum; `children.len()` is s_v.
    Vertex,
}

/// A node together with the line leaving it towards the root.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: NodeKind,
    /// Momentum of the outgoing line.
    pub momentum: Mode,
    pub order: usize,
    pub children: Vec<Arc<Node>>,
}

#[derive(Debug, Clone)]
pub struct Tree {
    pub root: Arc<Node>,
    pub k: usize,
    pub nu: Mode,
    pub expansion: ExpansionKind,
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationLimits {
    pub k_max: usize,
    pub max_trees: usize,
}

impl Default for EnumerationLimits {
    fn default() -> Self {
        EnumerationLimits { k_max: 6, max_trees: 5_000_000 }
    }
}

type Class = Arc<Vec<Arc<Node>>>;

/// Memoized generator of the tree classes T_{k,ν}.
pub struct TreeGenerator {
    expansion: ExpansionKind,
    dim: usize,
    degree: u32,
    support: BTreeSet<Mode>,
    limits: EnumerationLimits,
    memo: HashMap<(usize, Mode), Class>,
    produced: usize,
}

impl TreeGenerator {
    /// Black-bullet labels range over the nonzero forcing modes with |ν| ≤ `mode_budget`.
    pub fn new(spec: &ProblemSpec, expansion: ExpansionKind, mode_budget: u32, limits: EnumerationLimits) -> Self {
        let support: BTreeSet<Mode> = spec
            .forcing()
            .iter()
            .filter(|(m, _)| !m.is_zero() && m.l1() <= mode_budget)
            .map(|(m, _)| m.clone())
            .collect();
        let degree = support.iter().map(|m| m.l1()).max().unwrap_or(0);
        TreeGenerator { expansion, dim: spec.dim(), degree, support, limits, memo: HashMap::new(), produced: 0 }
    }

    fn candidates(&self, k: usize) -> Vec<Mode> {
        let mut v = modes_within(self.dim, support_bound(k, self.degree));
        v.push(Mode::zero(self.dim));
        v
    }

    /// All trees of order k with root momentum ν.
    pub fn class(&mut self, k: usize, nu: &Mode) -> Result<Class> {
        if k > self.limits.k_max {
            return Err(Error::precondition(format!("tree order {k} above the configured maximum {}", self.limits.k_max)));
        }
        if let Some(c) = self.memo.get(&(k, nu.clone())) {
            return Ok(c.clone());
        }
        let mut out: Vec<Arc<Node>> = Vec::new();
        if nu.l1() <= support_bound(k, self.degree) {
            if nu.is_zero() {
                self.zero_class(k, &mut out)?;
            } else {
                self.nonzero_class(k, nu, &mut out)?;
            }
        }
        self.produced += out.len();
        if self.produced > self.limits.max_trees {
            return Err(Error::TreeBudget { count: self.produced });
        }
        let class = Arc::new(out);
        self.memo.insert((k, nu.clone()), class.clone());
        Ok(class)
    }

    fn zero_class(&mut self, k: usize, out: &mut Vec<Arc<Node>>) -> Result<()> {
        if k == 0 {
            out.push(Arc::new(Node { kind: NodeKind::White, momentum: Mode::zero(self.dim), order: 0, children: vec![] }));
            return Ok(());
        }
        for k1 in 1..k {
            let k2 = k - k1;
            for nu1 in self.candidates(k1) {
                let left = self.class(k1, &nu1)?;
                if left.is_empty() {
                    continue;
                }
                let right = self.class(k2, &nu1.neg())?;
                self.pair(NodeKind::ZeroVertex, Mode::zero(self.dim), k, &left, &right, out);
            }
        }
        Ok(())
    }

    fn nonzero_class(&mut self, k: usize, nu: &Mode, out: &mut Vec<Arc<Node>>) -> Result<()> {
        if k == 1 && self.support.contains(nu) {
            out.push(Arc::new(Node { kind: NodeKind::Black, momentum: nu.clone(), order: 1, children: vec![] }));
        }
        if k < 2 {
            return Ok(());
        }
        if self.expansion == ExpansionKind::Formal {
            let inner = self.class(k - 1, nu)?;
            for c in inner.iter() {
                out.push(Arc::new(Node { kind: NodeKind::Vertex, momentum: nu.clone(), order: k, children: vec![c.clone()] }));
            }
        }
        for k1 in 0..k {
            let k2 = k - 1 - k1;
            for nu1 in self.candidates(k1) {
                let left = self.class(k1, &nu1)?;
                if left.is_empty() {
                    continue;
                }
                let right = self.class(k2, &nu.sub(&nu1))?;
                self.pair(NodeKind::Vertex, nu.clone(), k, &left, &right, out);
            }
        }
        Ok(())
    }

    fn pair(&self, kind: NodeKind, momentum: Mode, order: usize, left: &Class, right: &Class, out: &mut Vec<Arc<Node>>) {
        for a in left.iter() {
            for b in right.iter() {
                out.push(Arc::new(Node { kind: kind.clone(), momentum: momentum.clone(), order, children: vec![a.clone(), b.clone()] }));
            }
        }
    }
}

/// Every tree of T_{k,ν}, produced lazily from the memoized class.
pub fn enumerate(
    spec: &ProblemSpec,
    k: usize,
    nu: &Mode,
    expansion: ExpansionKind,
    mode_budget: u32,
    limits: EnumerationLimits,
) -> Result<impl Iterator<Item = Tree>> {
    let mut gen = TreeGenerator::new(spec, expansion, mode_budget, limits);
    let class = gen.class(k, nu)?;
    let nu = nu.clone();
    Ok((0..class.len()).map(move |i| Tree { root: class[i].clone(), k, nu: nu.clone(), expansion }))
}

/// Value of the subtree hanging from `node`, including its outgoing line.
pub fn node_value(node: &Node, spec: &ProblemSpec, expansion: ExpansionKind) -> Complex64 {
    let eps = spec.epsilon();
    let propagator = |m: &Mode| -> Complex64 {
        let x = small_divisor(spec.freq(), m);
        match expansion {
            ExpansionKind::Formal => (I * x).inv(),
            ExpansionKind::Resummed => (I * x * (Complex64::new(1.0, 0.0) + I * eps * x)).inv(),
        }
    };
    match node.kind {
        NodeKind::White => Complex64::new(spec.c0(), 0.0),
        NodeKind::Black => {
            let f = spec.forcing().get(&node.momentum);
            let f = if expansion == ExpansionKind::Resummed { eps * f } else { f };
            f * propagator(&node.momentum)
        }
        NodeKind::ZeroVertex => {
            let prod: Complex64 = node.children.iter().map(|c| node_value(c, spec, expansion)).product();
            -prod / (2.0 * spec.c0())
        }
        NodeKind::Vertex => {
            let prod: Complex64 = node.children.iter().map(|c| node_value(c, spec, expansion)).product();
            let factor = match (expansion, node.children.len()) {
                (ExpansionKind::Resummed, _) => -eps,
                (ExpansionKind::Formal, 1) => {
                    let iw = I * small_divisor(spec.freq(), &node.momentum);
                    -(iw * iw)
                }
                (ExpansionKind::Formal, _) => Complex64::new(-1.0, 0.0),
            };
            factor * prod * propagator(&node.momentum)
        }
    }
}

/// Product of propagators and node factors.
pub fn value(tree: &Tree, spec: &ProblemSpec) -> Complex64 {
    node_value(&tree.root, spec, tree.expansion)
}

/// Σ over T_{k,ν} of the tree values.
pub fn sum_class(k: usize, nu: &Mode, spec: &ProblemSpec, expansion: ExpansionKind, limits: EnumerationLimits) -> Result<Complex64> {
    let mut gen = TreeGenerator::new(spec, expansion, u32::MAX, limits);
    sum_with(&mut gen, k, nu, spec, expansion)
}

/// Σ over a class using an existing generator (shares memoized subtrees).
pub fn sum_with(gen: &mut TreeGenerator, k: usize, nu: &Mode, spec: &ProblemSpec, expansion: ExpansionKind) -> Result<Complex64> {
    let class = gen.class(k, nu)?;
    Ok(class.iter().map(|n| node_value(n, spec, expansion)).sum())
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Lemma3Record {
    pub k: usize,
    pub endpoints: usize,
    pub vertices: usize,
    pub zero_vertices: usize,
    pub unary_vertices: usize,
    pub zero_lines: usize,
    pub unary_lines: usize,
    pub other_lines: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Lemma3Violation {
    pub record: Lemma3Record,
    pub failed: Vec<String>,
}

fn count(node: &Node, r: &mut Lemma3Record, black: &mut usize) {
    match node.kind {
        NodeKind::White => r.endpoints += 1,
        NodeKind::Black => {
            r.endpoints += 1;
            *black += 1;
        }
        NodeKind::ZeroVertex => {
            r.vertices += 1;
            r.zero_vertices += 1;
        }
        NodeKind::Vertex => {
            r.vertices += 1;
            if node.children.len() == 1 {
                r.unary_vertices += 1;
            }
        }
    }
    if node.momentum.is_zero() {
        r.zero_lines += 1;
    } else if node.kind == NodeKind::Vertex && node.children.len() == 1 {
        r.unary_lines += 1;
    } else {
        r.other_lines += 1;
    }
    for c in &node.children {
        count(c, r, black);
    }
}

/// Counts endpoints, vertices and lines and checks the structural relations:
/// |E| ≤ |V| + 1, |L₁| + |L₂| = k, |V₁| ≤ k, |V₀| ≤ k − 1, |E| ≤ k, |E| + |V| ≤ 2k − 1.
pub fn lemma3_audit(tree: &Tree) -> std::result::Result<Lemma3Record, Lemma3Violation> {
    let mut r = Lemma3Record {
        k: 0,
        endpoints: 0,
        vertices: 0,
        zero_vertices: 0,
        unary_vertices: 0,
        zero_lines: 0,
        unary_lines: 0,
        other_lines: 0,
    };
    let mut black = 0;
    count(&tree.root, &mut r, &mut black);
    r.k = r.vertices + black - r.zero_vertices;
    let k = r.k as i64;
    let mut failed = Vec::new();
    if r.k != tree.k {
        failed.push(format!("order {} differs from class order {}", r.k, tree.k));
    }
    if r.endpoints > r.vertices + 1 {
        failed.push("|E| <= (s-1)|V| + 1".into());
    }
    if (r.unary_lines + r.other_lines) as i64 != k {
        failed.push("|L1| + |L2| = k".into());
    }
    if r.unary_vertices as i64 > k {
        failed.push("|V1| <= k".into());
    }
    if r.zero_vertices as i64 > (k - 1).max(0) {
        failed.push("|V0| <= k - 1".into());
    }
    if r.endpoints as i64 > k.max(1) {
        failed.push("|E| <= k".into());
    }
    if (r.endpoints + r.vertices) as i64 > (2 * k - 1).max(1) {
        failed.push("|E| + |V| <= 2k - 1".into());
    }
    if failed.is_empty() {
        Ok(r)
    } else {
        Err(Lemma3Violation { record: r, failed })
    }
}

/// Unordered shape of a tree with all labels dropped.
pub fn shape(node: &Node) -> String {
    let mut parts: Vec<String> = node.children.iter().map(|c| shape(c)).collect();
    parts.sort();
    format!("({})", parts.join(""))
}

/// Momenta of all lines, root line first.
pub fn line_momenta(tree: &Tree) -> Vec<Mode> {
    fn walk(n: &Node, out: &mut Vec<Mode>) {
        out.push(n.momentum.clone());
        for c in &n.children {
            walk(c, out);
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut out);
    out
}

/// Modes of the black bullets.
pub fn bullet_modes(tree: &Tree) -> Vec<Mode> {
    fn walk(n: &Node, out: &mut Vec<Mode>) {
        if n.kind == NodeKind::Black {
            out.push(n.momentum.clone());
        }
        for c in &n.children {
            walk(c, out);
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut out);
    out
}

/// Momentum conservation on every line.
pub fn momentum_conserved(node: &Node) -> bool {
    if node.children.is_empty() {
        return node.kind != NodeKind::White || node.momentum.is_zero();
    }
    let dim = node.momentum.dim();
    let sum = node.children.iter().fold(Mode::zero(dim), |acc, c| acc.add(&c.momentum));
    sum == node.momentum && node.children.iter().all(|c| momentum_conserved(c))
}

/// Graphviz rendering; node shape encodes kind, edge label the momentum.
pub fn to_dot(tree: &Tree) -> String {
    fn walk(n: &Node, id: &mut usize, out: &mut String) -> usize {
        let me = *id;
        *id += 1;
        let (shape, label) = match n.kind {
            NodeKind::Black => ("circle", format!("f{}", n.momentum)),
            NodeKind::White => ("circle", "c0".to_string()),
            NodeKind::ZeroVertex => ("box", "V0".to_string()),
            NodeKind::Vertex => ("point", String::new()),
        };
        let fill = if n.kind == NodeKind::Black { ",style=filled,fillcolor=black,fontcolor=white" } else { "" };
        let _ = writeln!(out, "  n{me} [shape={shape},label=\"{label}\"{fill}];");
        for c in &n.children {
            let child = walk(c, id, out);
            let _ = writeln!(out, "  n{child} -> n{me} [label=\"{}\"];", c.momentum);
        }
        me
    }
    let mut out = String::from("digraph tree {\n  rankdir=RL;\n  root [shape=none,label=\"\"];\n");
    let mut id = 0;
    let r = walk(&tree.root, &mut id, &mut out);
    let _ = writeln!(out, "  n{r} -> root [label=\"{}\"];", tree.root.momentum);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> ProblemSpec {
        ProblemSpec::alpha_beta_sin(1.5, 0.8, 1.0, 0.1).unwrap()
    }

    #[test]
    fn order_one_is_single_bullet() {
        let s = spec();
        let trees: Vec<Tree> = enumerate(&s, 1, &Mode::scalar(1), ExpansionKind::Formal, 1, Default::default()).unwrap().collect();
        assert_eq!(trees.len(), 1);
        let f1 = s.forcing().get(&Mode::scalar(1));
        assert!((value(&trees[0], &s) - f1 / I).norm() < 1e-16);
        let rec = lemma3_audit(&trees[0]).unwrap();
        assert_eq!((rec.endpoints, rec.vertices), (1, 0));
    }

    #[test]
    fn order_two_shapes() {
        let s = spec();
        let trees: Vec<Tree> = enumerate(&s, 2, &Mode::scalar(1), ExpansionKind::Formal, 1, Default::default()).unwrap().collect();
        // one chain plus the white/black pair in both orders
        assert_eq!(trees.len(), 3);
        assert_eq!(trees.iter().filter(|t| t.root.children.len() == 1).count(), 1);
    }

    #[test]
    fn chain_value() {
        let s = spec();
        let nu = Mode::scalar(1);
        let mut node = Arc::new(Node { kind: NodeKind::Black, momentum: nu.clone(), order: 1, children: vec![] });
        for k in 2..=5 {
            node = Arc::new(Node { kind: NodeKind::Vertex, momentum: nu.clone(), order: k, children: vec![node] });
            let t = Tree { root: node.clone(), k, nu: nu.clone(), expansion: ExpansionKind::Formal };
            let f = s.forcing().get(&nu);
            let expect = -(-I).powi(k as i32 - 2) * f;
            assert!((value(&t, &s) - expect).norm() < 1e-15);
            assert!((value(&t, &s).norm() - f.norm()).abs() < 1e-15);
            assert_eq!(lemma3_audit(&t).unwrap().unary_vertices, k - 1);
        }
    }

    #[test]
    fn unary_vertex_over_white_bullet_vanishes() {
        let s = spec();
        let white = Arc::new(Node { kind: NodeKind::White, momentum: Mode::scalar(0), order: 0, children: vec![] });
        let n = Node { kind: NodeKind::Vertex, momentum: Mode::scalar(0), order: 1, children: vec![white] };
        // zero momentum makes the factor −(iω·0)² vanish
        let iw = I * 0.0;
        assert_eq!(-(iw * iw) * node_value(&n.children[0], &s, ExpansionKind::Formal), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn dot_output_mentions_every_node() {
        let s = spec();
        let t = enumerate(&s, 3, &Mode::scalar(1), ExpansionKind::Formal, 1, Default::default()).unwrap().last().unwrap();
        let dot = to_dot(&t);
        assert!(dot.starts_with("digraph"));
        assert!(dot.contains("->"));
    }
}
