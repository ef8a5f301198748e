//! Abstract argumentation frameworks: arguments, attacks, and the
//! conflict-free / stable checks used to validate schedules.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{InstrumentIx, JobIx, OperatorIx, ProblemInstance};

/// An argument of one of the scheduling frameworks.
///
/// The derived order (variant, then indices) is the total order used for
/// deterministic witnesses and rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Argument {
    /// Operator does job.
    Assign(OperatorIx, JobIx),
    /// Operator holds instrument.
    Hold(OperatorIx, InstrumentIx),
    /// Job uses instrument.
    Require(JobIx, InstrumentIx),
}

impl Argument {
    /// `a(O1,J3)`-style label using the instance's ids.
    pub fn label(&self, inst: &ProblemInstance) -> String {
        let (a, b) = match *self {
            Argument::Assign(i, j) => (&inst.operators[i.0].id, &inst.jobs[j.0].id),
            Argument::Hold(i, t) => (&inst.operators[i.0].id, &inst.instruments[t.0].id),
            Argument::Require(j, t) => (&inst.jobs[j.0].id, &inst.instruments[t.0].id),
        };
        format!("a({a},{b})")
    }
}

/// Why an extension fails a semantics check.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Witness<A> {
    /// Both endpoints are in the extension.
    Conflict(A, A),
    /// Outside the extension and attacked by none of its members.
    Unattacked(A),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<A> {
    Holds,
    Fails(Witness<A>),
}

impl<A> Verdict<A> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness<A>> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// A finite set of arguments with a directed attack relation.
///
/// Arguments are kept sorted; attacks are stored as index pairs so that
/// iteration order follows the argument order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgGraph<A: Ord> {
    args: Vec<A>,
    index: BTreeMap<A, usize>,
    attacks: BTreeSet<(usize, usize)>,
}

impl<A: Ord + Clone> Default for ArgGraph<A> {
    fn default() -> Self {
        Self::new(std::iter::empty())
    }
}

impl<A: Ord + Clone> ArgGraph<A> {
    pub fn new(args: impl IntoIterator<Item = A>) -> Self {
        let mut args: Vec<A> = args.into_iter().collect();
        args.sort();
        args.dedup();
        let index = args.iter().cloned().enumerate().map(|(k, a)| (a, k)).collect();
        Self {
            args,
            index,
            attacks: BTreeSet::new(),
        }
    }

    pub fn args(&self) -> &[A] {
        &self.args
    }

    pub fn len(&self) -> usize {
        self.args.len()
    }

    pub fn is_empty(&self) -> bool {
        self.args.is_empty()
    }

    pub fn num_attacks(&self) -> usize {
        self.attacks.len()
    }

    pub fn contains(&self, a: &A) -> bool {
        self.index.contains_key(a)
    }

    fn ix(&self, a: &A) -> Result<usize> {
        self.index
            .get(a)
            .copied()
            .ok_or_else(|| Error::Input("argument is not part of the framework".into()))
    }

    /// Adds `attacker ⤳ target`; both must be arguments of the graph.
    pub fn add_attack(&mut self, attacker: &A, target: &A) -> Result<bool> {
        let pair = (self.ix(attacker)?, self.ix(target)?);
        Ok(self.attacks.insert(pair))
    }

    pub fn remove_attack(&mut self, attacker: &A, target: &A) -> bool {
        match (self.index.get(attacker), self.index.get(target)) {
            (Some(&a), Some(&b)) => self.attacks.remove(&(a, b)),
            _ => false,
        }
    }

    /// Drops every attack onto `target`.
    pub fn remove_attacks_on(&mut self, target: &A) -> usize {
        let Some(&t) = self.index.get(target) else {
            return 0;
        };
        let before = self.attacks.len();
        self.attacks.retain(|&(_, b)| b != t);
        before - self.attacks.len()
    }

    pub fn attacks(&self, attacker: &A, target: &A) -> bool {
        match (self.index.get(attacker), self.index.get(target)) {
            (Some(&a), Some(&b)) => self.attacks.contains(&(a, b)),
            _ => false,
        }
    }

    /// All attacks in argument order.
    pub fn attack_pairs(&self) -> impl Iterator<Item = (&A, &A)> + '_ {
        self.attacks.iter().map(|&(a, b)| (&self.args[a], &self.args[b]))
    }

    pub fn self_attacking(&self) -> impl Iterator<Item = &A> + '_ {
        self.attacks
            .iter()
            .filter(|(a, b)| a == b)
            .map(|&(a, _)| &self.args[a])
    }

    fn members(&self, ext: &BTreeSet<A>) -> Result<Vec<bool>> {
        let mut inside = vec![false; self.args.len()];
        for a in ext {
            inside[self.ix(a)?] = true;
        }
        Ok(inside)
    }

    /// Attacks with both endpoints in `ext`, in argument order.
    pub fn conflicts_within(&self, ext: &BTreeSet<A>) -> Result<Vec<(A, A)>> {
        let inside = self.members(ext)?;
        Ok(self
            .attacks
            .iter()
            .filter(|&&(a, b)| inside[a] && inside[b])
            .map(|&(a, b)| (self.args[a].clone(), self.args[b].clone()))
            .collect())
    }

    /// Arguments outside `ext` that no member of `ext` attacks.
    pub fn unattacked_outside(&self, ext: &BTreeSet<A>) -> Result<Vec<A>> {
        let inside = self.members(ext)?;
        let mut hit = inside.clone();
        for &(a, b) in &self.attacks {
            if inside[a] {
                hit[b] = true;
            }
        }
        Ok(hit
            .iter()
            .enumerate()
            .filter(|(_, &h)| !h)
            .map(|(k, _)| self.args[k].clone())
            .collect())
    }

    /// Whether any member of `ext` attacks `target`.
    pub fn ext_attacks(&self, ext: &BTreeSet<A>, target: &A) -> bool {
        let Some(&t) = self.index.get(target) else {
            return false;
        };
        self.attacks
            .iter()
            .any(|&(a, b)| b == t && ext.contains(&self.args[a]))
    }

    /// `target` attacks some member of `ext`.
    pub fn attacks_ext(&self, target: &A, ext: &BTreeSet<A>) -> bool {
        let Some(&s) = self.index.get(target) else {
            return false;
        };
        self.attacks
            .range((s, 0)..=(s, usize::MAX))
            .any(|&(_, b)| ext.contains(&self.args[b]))
    }

    pub fn is_conflict_free(&self, ext: &BTreeSet<A>) -> Result<Verdict<A>> {
        Ok(match self.conflicts_within(ext)?.into_iter().next() {
            Some((a, b)) => Verdict::Fails(Witness::Conflict(a, b)),
            None => Verdict::Holds,
        })
    }

    /// Conflict-free and attacks every argument outside `ext`.
    pub fn is_stable(&self, ext: &BTreeSet<A>) -> Result<Verdict<A>> {
        if let Verdict::Fails(w) = self.is_conflict_free(ext)? {
            return Ok(Verdict::Fails(w));
        }
        Ok(match self.unattacked_outside(ext)?.into_iter().next() {
            Some(a) => Verdict::Fails(Witness::Unattacked(a)),
            None => Verdict::Holds,
        })
    }

    /// GraphViz rendering. Nodes appear in argument order, extension
    /// members filled.
    pub fn to_dot_with(&self, ext: Option<&BTreeSet<A>>, label: impl Fn(&A) -> String) -> String {
        let mut out = String::from("digraph af {\n");
        for a in &self.args {
            let marked = ext.is_some_and(|e| e.contains(a));
            if marked {
                let _ = writeln!(out, "  \"{}\" [style=filled, fillcolor=lightblue];", label(a));
            } else {
                let _ = writeln!(out, "  \"{}\";", label(a));
            }
        }
        for (a, b) in self.attack_pairs() {
            let _ = writeln!(out, "  \"{}\" -> \"{}\";", label(a), label(b));
        }
        out.push_str("}\n");
        out
    }
}

impl ArgGraph<Argument> {
    pub fn to_dot(&self, inst: &ProblemInstance, ext: Option<&BTreeSet<Argument>>) -> String {
        self.to_dot_with(ext, |a| a.label(inst))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> ArgGraph<usize> {
        let mut g = ArgGraph::new(0..n);
        for (a, b) in edges {
            g.add_attack(a, b).unwrap();
        }
        g
    }

    #[test]
    fn empty_extension_is_conflict_free() {
        let g = graph(3, &[(0, 1), (1, 1)]);
        assert!(g.is_conflict_free(&BTreeSet::new()).unwrap().holds());
    }

    #[test]
    fn self_attack_conflicts() {
        let g = graph(2, &[(0, 0)]);
        let v = g.is_conflict_free(&[0].into()).unwrap();
        assert_eq!(v, Verdict::Fails(Witness::Conflict(0, 0)));
    }

    #[test]
    fn attack_free_graph_whole_set_is_stable() {
        let g = graph(4, &[]);
        assert!(g.is_stable(&(0..4).collect()).unwrap().holds());
    }

    #[test]
    fn empty_extension_leaves_argument_unattacked() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        let v = g.is_stable(&BTreeSet::new()).unwrap();
        assert_eq!(v, Verdict::Fails(Witness::Unattacked(0)));
        assert!(g.is_stable(&[1].into()).unwrap().holds());
    }

    #[test]
    fn unknown_argument_is_rejected() {
        let g = graph(2, &[]);
        assert!(g.is_stable(&[5].into()).is_err());
        let mut g = g;
        assert!(g.add_attack(&0, &9).is_err());
    }

    #[test]
    fn witnesses_are_smallest() {
        let g = graph(4, &[(2, 3), (3, 2), (1, 2), (2, 1)]);
        let v = g.is_conflict_free(&[1, 2, 3].into()).unwrap();
        assert_eq!(v, Verdict::Fails(Witness::Conflict(1, 2)));
    }

    #[test]
    fn empty_dot() {
        let g: ArgGraph<usize> = ArgGraph::default();
        assert_eq!(g.to_dot_with(None, |a| a.to_string()), "digraph af {\n}\n");
    }

    #[test]
    fn dot_marks_extension() {
        let g = graph(2, &[(0, 1)]);
        let dot = g.to_dot_with(Some(&[0].into()), |a| format!("n{a}"));
        assert_eq!(
            dot,
            "digraph af {\n  \"n0\" [style=filled, fillcolor=lightblue];\n  \"n1\";\n  \"n0\" -> \"n1\";\n}\n"
        );
    }

    #[test]
    fn remove_attacks_on_target() {
        let mut g = graph(3, &[(0, 2), (1, 2), (2, 0)]);
        assert_eq!(g.remove_attacks_on(&2), 2);
        assert_eq!(g.num_attacks(), 1);
        assert!(g.attacks_ext(&2, &[0].into()));
        assert!(!g.ext_attacks(&[0, 1].into(), &2));
    }
}
