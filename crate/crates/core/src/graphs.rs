//! Stable graphs with leg colors and automorphism orders.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{QplError, Result};
use crate::scalar::{factorial, Rational};

/// A connected stable graph. Legs are counted per color; a labeled graph is
/// the case where every color has multiplicity one.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StableGraph {
    pub genus: Vec<u32>,
    /// Symmetric edge counts; `adj[v][v]` counts self-edges at v.
    pub adj: Vec<Vec<u32>>,
    /// `legs[v][c]` legs of color c at v.
    pub legs: Vec<Vec<u32>>,
    /// Order of the color-preserving automorphism group.
    pub aut: u64,
}

impl StableGraph {
    pub fn num_vertices(&self) -> usize {
        self.genus.len()
    }

    /// Edges (v, w) with v ≤ w, repeated by multiplicity, in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for v in 0..self.num_vertices() {
            for w in v..self.num_vertices() {
                for _ in 0..self.adj[v][w] {
                    out.push((v, w));
                }
            }
        }
        out
    }

    pub fn h1(&self) -> u32 {
        (self.edges().len() + 1 - self.num_vertices()) as u32
    }

    pub fn total_genus(&self) -> u32 {
        self.genus.iter().sum::<u32>() + self.h1()
    }

    /// Number of flags (half-edges) at v.
    pub fn flag_count(&self, v: usize) -> u32 {
        (0..self.num_vertices()).map(|w| if w == v { 2 * self.adj[v][v] } else { self.adj[v][w] }).sum()
    }

    pub fn leg_count(&self, v: usize) -> u32 {
        self.legs[v].iter().sum()
    }

    pub fn valence(&self, v: usize) -> u32 {
        self.flag_count(v) + self.leg_count(v)
    }

    pub fn is_stable(&self) -> bool {
        (0..self.num_vertices()).all(|v| 2 * self.genus[v] + self.valence(v) > 2)
    }

    pub fn is_connected(&self) -> bool {
        connected(&self.adj)
    }

    /// Compact text form: vertex genera, edges, legs per vertex, |Aut|.
    pub fn describe(&self) -> String {
        let edges: Vec<String> = self.edges().iter().map(|(v, w)| format!("{v}-{w}")).collect();
        format!("g{:?} e[{}] legs{:?} aut {}", self.genus, edges.join(","), self.legs, self.aut)
    }

    /// ∏_c mult_c! / |Aut|: the weight that makes the colored sum equal the labeled one.
    pub fn weight(&self) -> Rational {
        let ncol = self.legs.first().map_or(0, Vec::len);
        let num = (0..ncol).fold(BigInt::one(), |acc, c| {
            acc * factorial(self.legs.iter().map(|l| l[c]).sum::<u32>())
        });
        Rational::new(num, BigInt::from(self.aut))
    }

    /// For labeled graphs: vertex carrying each marking.
    pub fn markings(&self) -> Option<Vec<usize>> {
        let ncol = self.legs.first().map_or(0, Vec::len);
        let mut out = Vec::with_capacity(ncol);
        for c in 0..ncol {
            let holders: Vec<usize> = (0..self.num_vertices()).filter(|&v| self.legs[v][c] > 0).collect();
            if holders.len() != 1 || self.legs[holders[0]][c] != 1 {
                return None;
            }
            out.push(holders[0]);
        }
        Some(out)
    }
}

fn connected(adj: &[Vec<u32>]) -> bool {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for w in 0..n {
            if adj[v][w] > 0 && !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

type Encoding = (Vec<u32>, Vec<u32>, Vec<u32>);

fn encode(genus: &[u32], adj: &[Vec<u32>], legs: &[Vec<u32>], perm: &[usize]) -> Encoding {
    let n = genus.len();
    let g = perm.iter().map(|&v| genus[v]).collect();
    let mut a = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            a.push(adj[perm[i]][perm[j]]);
        }
    }
    let l = perm.iter().flat_map(|&v| legs[v].iter().copied()).collect();
    (g, a, l)
}

fn permuted(genus: &[u32], adj: &[Vec<u32>], legs: &[Vec<u32>], perm: &[usize]) -> (Vec<u32>, Vec<Vec<u32>>, Vec<Vec<u32>>) {
    let n = genus.len();
    let g = perm.iter().map(|&v| genus[v]).collect();
    let a = (0..n).map(|i| (0..n).map(|j| adj[perm[i]][perm[j]]).collect()).collect();
    let l = perm.iter().map(|&v| legs[v].clone()).collect();
    (g, a, l)
}

fn edge_and_leg_symmetry(adj: &[Vec<u32>], legs: &[Vec<u32>]) -> u64 {
    let n = adj.len();
    let mut r = 1u64;
    for v in 0..n {
        for w in v..n {
            let k = adj[v][w] as u64;
            r *= (1..=k).product::<u64>();
            if v == w {
                r <<= k;
            }
        }
        for &c in &legs[v] {
            r *= (1..=c as u64).product::<u64>();
        }
    }
    r
}

type Underlying = (Vec<u32>, Vec<Vec<u32>>, Vec<Vec<usize>>);

/// Connected (genus, adjacency) pairs with nv vertices and total genus g, one
/// canonical representative per isomorphism class, with its vertex automorphisms.
fn underlying_classes(g: u32, nv: usize) -> Vec<Underlying> {
    let perms = permutations(nv);
    let no_legs = vec![vec![]; nv];
    let mut seen: BTreeSet<Encoding> = BTreeSet::new();
    let mut out = Vec::new();
    for h1 in 0..=g {
        let ne = nv as u32 - 1 + h1;
        for genus in nonincreasing(g - h1, nv, g - h1) {
            for adj in edge_multisets(nv, ne) {
                if !connected(&adj) {
                    continue;
                }
                let best = perms.iter().min_by_key(|p| encode(&genus, &adj, &no_legs, p)).unwrap();
                let code = encode(&genus, &adj, &no_legs, best);
                if !seen.insert(code) {
                    continue;
                }
                let (cg, ca, _) = permuted(&genus, &adj, &no_legs, best);
                let id: Vec<usize> = (0..nv).collect();
                let base = encode(&cg, &ca, &no_legs, &id);
                let auts = perms.iter().filter(|p| encode(&cg, &ca, &no_legs, p) == base).cloned().collect();
                out.push((cg, ca, auts));
            }
        }
    }
    out
}

fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn nonincreasing(total: u32, parts: usize, max: u32) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=max.min(total)).rev() {
        for mut rest in nonincreasing(total - first, parts - 1, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn edge_multisets(n: usize, e: u32) -> Vec<Vec<Vec<u32>>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|v| (v..n).map(move |w| (v, w))).collect();
    let mut out = Vec::new();
    let mut adj = vec![vec![0u32; n]; n];
    fn rec(pairs: &[(usize, usize)], idx: usize, left: u32, adj: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
        if idx == pairs.len() {
            if left == 0 {
                out.push(adj.clone());
            }
            return;
        }
        let (v, w) = pairs[idx];
        for k in 0..=left {
            adj[v][w] = k;
            adj[w][v] = k;
            rec(pairs, idx + 1, left - k, adj, out);
        }
        adj[v][w] = 0;
        adj[w][v] = 0;
    }
    rec(&pairs, 0, e, &mut adj, &mut out);
    out
}

/// Leg distributions: for each color, how many of its legs go to each vertex.
fn leg_distributions(mult: &[u32], n: usize, need: &[u32]) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    let per_color: Vec<Vec<Vec<u32>>> = mult.iter().map(|&m| compositions(m, n)).collect();
    let mut idx = vec![0usize; mult.len()];
    if per_color.is_empty() {
        if need.iter().all(|&x| x == 0) {
            out.push(vec![vec![]; n]);
        }
        return out;
    }
    loop {
        let mut ok = true;
        for v in 0..n {
            let s: u32 = (0..mult.len()).map(|c| per_color[c][idx[c]][v]).sum();
            if s < need[v] {
                ok = false;
                break;
            }
        }
        if ok {
            out.push((0..n).map(|v| (0..mult.len()).map(|c| per_color[c][idx[c]][v]).collect()).collect());
        }
        let mut c = 0;
        loop {
            if c == mult.len() {
                return out;
            }
            idx[c] += 1;
            if idx[c] < per_color[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

type GraphKey = (u32, Vec<u32>);
static GRAPH_MEMO: OnceLock<Mutex<HashMap<GraphKey, Vec<StableGraph>>>> = OnceLock::new();

/// Isomorphism classes of connected stable graphs of genus g whose legs carry
/// colors with the given multiplicities; canonical vertex order, sorted list.
pub fn enumerate_colored(g: u32, mult: &[u32]) -> Result<Vec<StableGraph>> {
    let m: u32 = mult.iter().sum();
    if 2 * g as i64 - 2 + m as i64 <= 0 {
        return Err(QplError::Unstable { g, n: m as usize });
    }
    if g > 2 || m > 10 {
        return Err(QplError::OutOfRange(format!("graph enumeration for g={g}, m={m}")));
    }
    let key = (g, mult.to_vec());
    let memo = GRAPH_MEMO.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = memo.lock().unwrap().get(&key) {
        return Ok(v.clone());
    }
    let max_v = (2 * g + m - 2) as usize;
    let mut found: BTreeSet<StableGraph> = BTreeSet::new();
    for nv in 1..=max_v {
        for (genus, adj, auts) in underlying_classes(g, nv) {
            let need: Vec<u32> = (0..nv)
                .map(|v| {
                    let flags: u32 = (0..nv).map(|w| if w == v { 2 * adj[v][v] } else { adj[v][w] }).sum();
                    3u32.saturating_sub(2 * genus[v] + flags)
                })
                .collect();
            if need.iter().sum::<u32>() > m {
                continue;
            }
            for legs in leg_distributions(mult, nv, &need) {
                let best = auts.iter().map(|p| p.iter().map(|&v| legs[v].clone()).collect::<Vec<_>>()).min().unwrap();
                if best != legs {
                    continue;
                }
                let fixing = auts.iter().filter(|p| p.iter().map(|&v| &legs[v]).eq(legs.iter())).count() as u64;
                let aut = fixing * edge_and_leg_symmetry(&adj, &legs);
                found.insert(StableGraph { genus: genus.clone(), adj: adj.clone(), legs, aut });
            }
        }
    }
    let out: Vec<StableGraph> = found.into_iter().collect();
    debug_assert!(out.iter().all(|gr| gr.is_stable() && gr.is_connected() && gr.total_genus() == g));
    memo.lock().unwrap().insert(key, out.clone());
    Ok(out)
}

/// Labeled stable graphs: markings 1..m each their own color.
pub fn enumerate_graphs(g: u32, m: usize) -> Result<Vec<StableGraph>> {
    enumerate_colored(g, &vec![1; m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    #[test]
    fn hand_counts() {
        assert_eq!(enumerate_graphs(0, 3).unwrap().len(), 1);
        assert_eq!(enumerate_graphs(0, 4).unwrap().len(), 4);
        let g11 = enumerate_graphs(1, 1).unwrap();
        assert_eq!(g11.len(), 2);
        let mut auts: Vec<u64> = g11.iter().map(|g| g.aut).collect();
        auts.sort();
        assert_eq!(auts, vec![1, 2]);
        assert_eq!(enumerate_graphs(1, 2).unwrap().len(), 5);
        assert_eq!(enumerate_graphs(2, 0).unwrap().len(), 7);
        assert!(enumerate_graphs(0, 2).is_err());
    }

    #[test]
    fn genus_two_automorphisms() {
        // the theta graph (two trivalent vertices, three edges) has |Aut| = 12
        let g20 = enumerate_graphs(2, 0).unwrap();
        let theta = g20.iter().find(|g| g.num_vertices() == 2 && g.adj[0][1] == 3).unwrap();
        assert_eq!(theta.aut, 12);
        // a single vertex with two loops: 2!·2² = 8
        let rose = g20.iter().find(|g| g.num_vertices() == 1 && g.adj[0][0] == 2).unwrap();
        assert_eq!(rose.aut, 8);
    }

    fn mass(gs: &[StableGraph]) -> Rational {
        gs.iter().fold(Rational::zero(), |acc, g| acc + g.weight() / Rational::from_integer(factorial(0)))
    }

    #[test]
    fn colored_mass_equals_labeled_mass() {
        for (g, mult) in [(0u32, vec![4u32]), (0, vec![2, 3]), (1, vec![2]), (1, vec![1, 2]), (2, vec![1]), (0, vec![1, 4]), (2, vec![2])] {
            let m: u32 = mult.iter().sum();
            let labeled = enumerate_graphs(g, m as usize).unwrap();
            let lab_mass = labeled.iter().fold(Rational::zero(), |a, gr| a + Rational::new(1.into(), gr.aut.into()));
            assert_eq!(mass(&enumerate_colored(g, &mult).unwrap()), lab_mass, "g={g} mult={mult:?}");
        }
    }

    #[test]
    fn labeled_markings_are_recovered() {
        for gr in enumerate_graphs(1, 2).unwrap() {
            let mk = gr.markings().unwrap();
            assert_eq!(mk.len(), 2);
        }
        let colored = enumerate_colored(0, &[3]).unwrap();
        assert!(colored[0].markings().is_none());
    }
}
