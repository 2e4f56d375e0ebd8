use std::collections::{BTreeSet, HashMap, VecDeque};

use super::{Action, ActionId, ModelError};
use crate::linalg::{check_validity, QuantumOperation, QubitId};

/// Nested description of a process tree.
#[derive(Clone, Debug)]
pub struct ActionTree {
    pub action: Action,
    pub children: Vec<ActionTree>,
}

impl ActionTree {
    pub fn leaf(action: Action) -> Self {
        Self {
            action,
            children: Vec::new(),
        }
    }

    pub fn node(action: Action, children: Vec<ActionTree>) -> Self {
        Self { action, children }
    }

    /// Linear chain `actions[0] → actions[1] → ...`.
    pub fn chain(actions: Vec<Action>) -> Option<Self> {
        let mut iter = actions.into_iter().rev();
        let mut tree = Self::leaf(iter.next()?);
        for a in iter {
            tree = Self::node(a, vec![tree]);
        }
        Some(tree)
    }
}

/// A quantum process: actions connected by the successor relation →.
///
/// Any graph with valid references can be represented so that validation can
/// report non-trees; the algorithms elsewhere require a rooted tree.
#[derive(Clone, Debug)]
pub struct Process {
    name: String,
    actions: Vec<Action>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<ActionId, usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProcessReport {
    pub rooted_tree: bool,
    pub sequentiality: bool,
    pub branching: bool,
    pub trace_preserving: bool,
    pub aligned: bool,
    pub violations: Vec<String>,
}

impl ProcessReport {
    /// The structural conditions every process must meet.
    pub fn ok(&self) -> bool {
        self.rooted_tree && self.sequentiality && self.branching
    }
}

impl Process {
    pub fn new(
        name: impl Into<String>,
        actions: Vec<Action>,
        edges: &[(ActionId, ActionId)],
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            if index.insert(a.id().clone(), i).is_some() {
                return Err(ModelError::DuplicateAction(a.id().clone()));
            }
        }
        let n = actions.len();
        if n == 0 {
            return Err(ModelError::Structure("process without actions".into()));
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for (from, to) in edges {
            let f = *index
                .get(from)
                .ok_or_else(|| ModelError::UnknownAction(from.clone()))?;
            let t = *index
                .get(to)
                .ok_or_else(|| ModelError::UnknownAction(to.clone()))?;
            children[f].push(t);
            parents[t].push(f);
        }
        Ok(Self {
            name: name.into(),
            actions,
            parents,
            children,
            index,
        })
    }

    pub fn from_tree(name: impl Into<String>, tree: ActionTree) -> Result<Self, ModelError> {
        let mut actions = Vec::new();
        let mut edges = Vec::new();
        let mut stack = vec![(None, tree)];
        // Depth-first, keeping children in listed order.
        while let Some((parent, node)) = stack.pop() {
            let id = node.action.id().clone();
            if let Some(p) = parent {
                edges.push((p, id.clone()));
            }
            actions.push(node.action);
            for child in node.children.into_iter().rev() {
                stack.push((Some(id.clone()), child));
            }
        }
        Self::new(name, actions, &edges)
    }

    pub fn chain(name: impl Into<String>, actions: Vec<Action>) -> Result<Self, ModelError> {
        let tree = ActionTree::chain(actions)
            .ok_or_else(|| ModelError::Structure("process without actions".into()))?;
        Self::from_tree(name, tree)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action(&self, node: usize) -> &Action {
        &self.actions[node]
    }

    pub fn find(&self, id: &ActionId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// The unique parentless node (first one if the graph is not a tree).
    pub fn root(&self) -> usize {
        self.parents.iter().position(Vec::is_empty).unwrap_or(0)
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parents[node].first().copied()
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn depth(&self, node: usize) -> usize {
        let mut d = 0;
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            d += 1;
            cur = p;
        }
        d
    }

    /// Nodes on the root path, root first, ending at `node`.
    pub fn path_to(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// `a →* b`.
    pub fn precedes_or_eq(&self, a: usize, b: usize) -> bool {
        let mut cur = Some(b);
        while let Some(c) = cur {
            if c == a {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    /// Breadth-first order of the subtree rooted at `node`.
    pub fn subtree(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([node]);
        while let Some(n) = queue.pop_front() {
            out.push(n);
            queue.extend(self.children[n].iter().copied());
        }
        out
    }

    pub fn bfs(&self) -> Vec<usize> {
        self.subtree(self.root())
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.bfs().into_iter().filter(|&n| self.is_leaf(n)).collect()
    }

    pub fn height(&self) -> usize {
        self.leaves().iter().map(|&l| self.depth(l)).max().unwrap_or(0)
    }

    /// Root-to-leaf paths in depth-first, listed-children order.
    pub fn maximal_paths(&self, from: usize) -> Vec<Vec<usize>> {
        if self.is_leaf(from) {
            return vec![vec![from]];
        }
        let mut out = Vec::new();
        for &c in &self.children[from] {
            for mut p in self.maximal_paths(c) {
                p.insert(0, from);
                out.push(p);
            }
        }
        out
    }

    pub fn environment(&self) -> BTreeSet<String> {
        self.actions
            .iter()
            .flat_map(|a| a.environment().iter().cloned())
            .collect()
    }

    pub fn qubits(&self) -> BTreeSet<QubitId> {
        self.actions
            .iter()
            .flat_map(|a| a.register().iter().cloned())
            .collect()
    }

    /// Process with the same graph and each action rewritten by `f`.
    pub fn map_actions(&self, mut f: impl FnMut(usize, &Action) -> Action) -> Self {
        let actions: Vec<Action> = self
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| f(i, a))
            .collect();
        let index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id().clone(), i))
            .collect();
        Self {
            name: self.name.clone(),
            actions,
            parents: self.parents.clone(),
            children: self.children.clone(),
            index,
        }
    }

    fn is_rooted_tree(&self, violations: &mut Vec<String>) -> bool {
        let roots: Vec<usize> = (0..self.len()).filter(|&i| self.parents[i].is_empty()).collect();
        if roots.len() != 1 {
            violations.push(format!("{}: {} parentless actions", self.name, roots.len()));
            return false;
        }
        if let Some(i) = (0..self.len()).find(|&i| self.parents[i].len() > 1) {
            violations.push(format!("{}: {} has several parents", self.name, self.actions[i].id()));
            return false;
        }
        if self.subtree(roots[0]).len() != self.len() {
            violations.push(format!("{}: actions unreachable from the root", self.name));
            return false;
        }
        true
    }

    pub fn validate(&self) -> ProcessReport {
        let mut v = Vec::new();
        if !self.is_rooted_tree(&mut v) {
            return ProcessReport {
                violations: v,
                ..ProcessReport::default()
            };
        }
        let mut sequentiality = true;
        let mut branching = true;
        let mut trace_preserving = true;
        let mut aligned = true;
        let root = self.root();
        if !check_validity(self.actions[root].operation()).trace_preserving {
            trace_preserving = false;
            v.push(format!("{}: root {} is not trace-preserving", self.name, self.actions[root].id()));
        }
        for a in 0..self.len() {
            let kids = &self.children[a];
            for &b in kids {
                if !self.actions[a].interval().before(self.actions[b].interval()) {
                    sequentiality = false;
                    v.push(format!(
                        "{}: {} {} does not end before {} {}",
                        self.name,
                        self.actions[a].id(),
                        self.actions[a].interval(),
                        self.actions[b].id(),
                        self.actions[b].interval()
                    ));
                }
            }
            if kids.is_empty() {
                continue;
            }
            let first = &self.actions[kids[0]];
            let same_register = kids.iter().all(|&b| {
                let r = self.actions[b].register();
                r.len() == first.register().len() && r.iter().all(|q| first.register().contains(q))
            });
            if !same_register {
                branching = false;
                trace_preserving = false;
                v.push(format!("{}: children of {} act on different registers", self.name, self.actions[a].id()));
                continue;
            }
            let sum = QuantumOperation::kraus_sum(kids.iter().map(|&b| self.actions[b].operation()))
                .map(|s| check_validity(&s));
            match sum {
                Ok(r) if r.valid() => {
                    if !r.trace_preserving {
                        trace_preserving = false;
                        v.push(format!(
                            "{}: branches after {} do not sum to a trace-preserving operation",
                            self.name,
                            self.actions[a].id()
                        ));
                    }
                }
                _ => {
                    branching = false;
                    trace_preserving = false;
                    v.push(format!(
                        "{}: branches after {} do not sum to a quantum operation",
                        self.name,
                        self.actions[a].id()
                    ));
                }
            }
            let lo = first.interval().lo();
            if kids.iter().any(|&b| {
                self.actions[b].interval().lo() != lo
                    || self.actions[b].environment() != first.environment()
            }) {
                aligned = false;
                v.push(format!(
                    "{}: children of {} differ in start time or environment",
                    self.name,
                    self.actions[a].id()
                ));
            }
        }
        ProcessReport {
            rooted_tree: true,
            sequentiality,
            branching,
            trace_preserving,
            aligned: aligned && branching,
            violations: v,
        }
    }
}

pub fn validate_process(p: &Process) -> ProcessReport {
    p.validate()
}
