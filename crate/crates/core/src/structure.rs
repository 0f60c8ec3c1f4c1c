//! Atomic decomposition of the transmission graph: atoms (strongly connected
//! components), their futures, the order `A ≼ B ⇔ A ⊂ F(B)`, and antichains
//! of supercritical atoms.

use std::fmt;

use serde::Serialize;

use crate::error::{check_len, Error, Result};
use crate::graph::DiGraph;
use crate::model::{SisModel, SubsetMask};
use crate::spectral;
use crate::tolerances::Tolerances;

/// Transmission graph: edge `y → x` iff `kernel[x][y]·μ(y) > 0`.
pub fn transmission_graph(model: &SisModel) -> DiGraph {
    DiGraph::from_matrix(model.operator_matrix())
}

/// Vertices reachable from `mask`, `mask` included.
pub fn future(graph: &DiGraph, mask: &SubsetMask) -> Result<SubsetMask> {
    check_len(graph.len(), mask.len())?;
    Ok(graph.reachable(mask))
}

/// No edge leaves `mask`.
pub fn is_invariant(graph: &DiGraph, mask: &SubsetMask) -> Result<bool> {
    check_len(graph.len(), mask.len())?;
    Ok(graph.edges().all(|(y, x)| !mask.contains(y) || mask.contains(x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomClass {
    /// Singleton without self-loop.
    Zero,
    Subcritical,
    Critical,
    Supercritical,
}

impl AtomClass {
    pub fn is_zero(self) -> bool {
        self == AtomClass::Zero
    }

    pub fn is_supercritical(self) -> bool {
        self == AtomClass::Supercritical
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomClass::Zero => "zero",
            AtomClass::Subcritical => "subcritical",
            AtomClass::Critical => "critical",
            AtomClass::Supercritical => "supercritical",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Atom {
    pub members: Vec<usize>,
    pub mask: SubsetMask,
    pub class: AtomClass,
    pub r0: f64,
    pub future: SubsetMask,
}

/// Sorted list of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Antichain(Vec<usize>);

impl Antichain {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Antichain(members)
    }

    pub fn empty() -> Self {
        Antichain(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for Antichain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(";"))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AtomDecomposition {
    n: usize,
    #[serde(skip)]
    graph: DiGraph,
    atoms: Vec<Atom>,
    atom_of: Vec<usize>,
    /// `below[a][b]` iff atom `a ≼` atom `b`.
    below: Vec<Vec<bool>>,
    classification_tol: f64,
}

/// SCC decomposition, classification by `R0` of each atom and the order `≼`.
pub fn decompose(model: &SisModel, tol: &Tolerances) -> Result<AtomDecomposition> {
    model.require_valid_signs()?;
    let n = model.n();
    let graph = transmission_graph(model);
    let t = model.operator_matrix();
    let mut atoms = Vec::new();
    let mut atom_of = vec![0; n];
    for (ai, members) in graph.strongly_connected_components().into_iter().enumerate() {
        let mask = SubsetMask::from_indices(n, &members);
        for &x in &members {
            atom_of[x] = ai;
        }
        let zero = members.len() == 1 && t[(members[0], members[0])] <= 0.0;
        let (class, r0) = if zero {
            (AtomClass::Zero, 0.0)
        } else {
            let r0 = spectral::r0(model, &mask, tol.spectral)?;
            let class = if r0 > 1.0 + tol.classification {
                AtomClass::Supercritical
            } else if (r0 - 1.0).abs() <= tol.classification {
                AtomClass::Critical
            } else {
                AtomClass::Subcritical
            };
            (class, r0)
        };
        let future = graph.reachable(&mask);
        atoms.push(Atom { members, mask, class, r0, future });
    }
    let below = atoms
        .iter()
        .map(|a| atoms.iter().map(|b| b.future.contains(a.members[0])).collect())
        .collect();
    Ok(AtomDecomposition { n, graph, atoms, atom_of, below, classification_tol: tol.classification })
}

impl AtomDecomposition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &DiGraph {
        &self.graph
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atom_of(&self, feature: usize) -> usize {
        self.atom_of[feature]
    }

    pub fn classification_tol(&self) -> f64 {
        self.classification_tol
    }

    /// `a ≼ b`.
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.below[a][b]
    }

    pub fn comparable(&self, a: usize, b: usize) -> bool {
        self.below[a][b] || self.below[b][a]
    }

    pub fn future(&self, mask: &SubsetMask) -> Result<SubsetMask> {
        future(&self.graph, mask)
    }

    pub fn is_invariant(&self, mask: &SubsetMask) -> Result<bool> {
        is_invariant(&self.graph, mask)
    }

    pub fn supercritical(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| self.atoms[i].class.is_supercritical()).collect()
    }

    pub fn non_zero(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| !self.atoms[i].class.is_zero()).collect()
    }

    pub fn critical(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| self.atoms[i].class == AtomClass::Critical).collect()
    }

    /// Exactly one non-zero atom.
    pub fn is_monatomic(&self) -> bool {
        self.non_zero().len() == 1
    }

    /// Union of the atoms of `chain`.
    pub fn union(&self, chain: &Antichain) -> SubsetMask {
        chain
            .members()
            .iter()
            .fold(SubsetMask::empty(self.n), |acc, &a| acc.union(&self.atoms[a].mask))
    }

    pub fn future_of(&self, chain: &Antichain) -> SubsetMask {
        chain
            .members()
            .iter()
            .fold(SubsetMask::empty(self.n), |acc, &a| acc.union(&self.atoms[a].future))
    }

    pub fn is_antichain(&self, members: &[usize]) -> bool {
        members.iter().enumerate().all(|(i, &a)| {
            members[i + 1..].iter().all(|&b| a != b && !self.comparable(a, b))
        })
    }

    /// All antichains of supercritical atoms (the empty one included), by
    /// depth-first subset search; ordered by size, then lexicographically.
    pub fn supercritical_antichains(&self, cap: usize) -> Result<Vec<Antichain>> {
        let sup = self.supercritical();
        if sup.len() > cap {
            return Err(Error::ResourceCap(format!(
                "{} supercritical atoms exceed the enumeration cap of {cap}; \
                 raise antichain_cap or coarsen the model",
                sup.len()
            )));
        }
        let mut out = Vec::new();
        let mut current = Vec::new();
        self.extend_antichains(&sup, 0, &mut current, &mut out);
        out.sort_by(|a: &Antichain, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(out)
    }

    fn extend_antichains(
        &self,
        pool: &[usize],
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Antichain>,
    ) {
        out.push(Antichain::new(current.clone()));
        for i in start..pool.len() {
            let a = pool[i];
            if current.iter().all(|&b| !self.comparable(a, b)) {
                current.push(a);
                self.extend_antichains(pool, i + 1, current, out);
                current.pop();
            }
        }
    }

    /// Maximal elements under `≼` of the supercritical atoms contained in `mask`.
    pub fn maximal_supercritical_antichain(&self, mask: &SubsetMask) -> Result<Antichain> {
        check_len(self.n, mask.len())?;
        let inside: Vec<usize> = self
            .supercritical()
            .into_iter()
            .filter(|&a| self.atoms[a].mask.is_subset_of(mask))
            .collect();
        let maximal = inside
            .iter()
            .copied()
            .filter(|&a| !inside.iter().any(|&b| b != a && self.precedes(a, b)))
            .collect();
        Ok(Antichain::new(maximal))
    }

    /// Atom labels such as `{B,M}`.
    pub fn atom_label(&self, i: usize, labels: &[String]) -> String {
        let names: Vec<&str> = self.atoms[i].members.iter().map(|&x| labels[x].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Hasse diagram of `≼`: pairs `(a, b)` with `a ≺ b` and nothing between.
    pub fn hasse(&self) -> Vec<(usize, usize)> {
        let k = self.atoms.len();
        let strict = |a: usize, b: usize| a != b && self.below[a][b];
        let mut out = Vec::new();
        for a in 0..k {
            for b in 0..k {
                if strict(a, b) && !(0..k).any(|c| strict(a, c) && strict(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}
