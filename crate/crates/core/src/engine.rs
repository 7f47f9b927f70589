//! The localization graph sum: vertex, edge and leg contributions.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::{Arc, Mutex, RwLock};

use num_traits::Zero;
use rayon::prelude::*;

use crate::asymptotics::{assemble, FactorTable, LocalData};
use crate::error::{QplError, Result};
use crate::graphs::{enumerate_colored, StableGraph};
use crate::moduli::vertex_hodge_expand;
use crate::qseries::{Multidegree, QSeries, Truncation};
use crate::scalar::Coeff;
use crate::target::{EquivClass, Mode, Site};
use crate::universal::{p_evaluate, p_polynomial};

/// Sign convention for edges and legs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeSign {
    /// Coefficient extraction exactly as in the contribution formulas.
    Definition,
    /// (−1)^{k+l+i+1} on edges and (−1)^{b−1} on legs, i.e. x = −ψ throughout.
    Proof,
}

impl EdgeSign {
    pub const ALL: [EdgeSign; 2] = [EdgeSign::Definition, EdgeSign::Proof];

    pub fn name(self) -> &'static str {
        match self {
            EdgeSign::Definition => "definition",
            EdgeSign::Proof => "proof",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "definition" | "def" => Some(EdgeSign::Definition),
            "proof" => Some(EdgeSign::Proof),
            _ => None,
        }
    }
}

/// τ_k(H^S): a descendent (pulled back from M̄_{g,m}) of a square-free class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Insertion {
    pub k: u32,
    pub mask: u32,
}

impl Insertion {
    pub fn new(k: u32, mask: u32) -> Self {
        Insertion { k, mask }
    }

    pub fn point(n: usize) -> Self {
        Insertion { k: 0, mask: (1 << n) - 1 }
    }

    /// Complex degree of the integrand.
    pub fn degree(&self) -> u32 {
        self.k + self.mask.count_ones()
    }

    /// c_i for factor i.
    pub fn c(&self, i: usize) -> u32 {
        self.mask >> i & 1
    }

    /// "k:c1c2…cn".
    pub fn spec(&self, n: usize) -> String {
        let c: String = (0..n).map(|i| if self.c(i) == 1 { '1' } else { '0' }).collect();
        format!("{}:{}", self.k, c)
    }

    /// Parses "k:c1c2…;k:c1c2…".
    pub fn parse_list(s: &str, n: usize) -> Result<Vec<Insertion>> {
        let mut out = Vec::new();
        for item in s.split(';').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, c) = item
                .split_once(':')
                .ok_or_else(|| QplError::Precondition(format!("insertion {item:?} is not of the form k:c1..cn")))?;
            let k: u32 = k.trim().parse().map_err(|_| QplError::Precondition(format!("bad descendent exponent in {item:?}")))?;
            let c = c.trim();
            if c.len() != n || !c.chars().all(|ch| ch == '0' || ch == '1') {
                return Err(QplError::Precondition(format!("class vector {c:?} must be {n} binary digits")));
            }
            let mask = c.chars().enumerate().filter(|(_, ch)| *ch == '1').fold(0u32, |m, (i, _)| m | 1 << i);
            out.push(Insertion { k, mask });
        }
        Ok(out)
    }
}

/// (1−g)(n−3) + m + 2Σd_i.
pub fn vdim(g: u32, n: usize, m: usize, d: &Multidegree) -> i64 {
    (1 - g as i64) * (n as i64 - 3) + m as i64 + 2 * d.total() as i64
}

pub fn insertion_degree(ins: &[Insertion]) -> i64 {
    ins.iter().map(|i| i.degree() as i64).sum()
}

/// A leg type: descendent exponent and an arbitrary equivariant class.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg<C: Coeff> {
    pub k: u32,
    pub class: EquivClass<C>,
}

impl<C: Coeff> Leg<C> {
    pub fn from_insertion(n: usize, ins: &Insertion) -> Self {
        Leg { k: ins.k, class: EquivClass::monomial(n, ins.mask, C::one()) }
    }
}

/// Groups insertions into colors (sorted) with multiplicities.
pub fn color_insertions<C: Coeff>(n: usize, ins: &[Insertion]) -> Vec<(Leg<C>, u32)> {
    let mut counts: BTreeMap<Insertion, u32> = BTreeMap::new();
    for i in ins {
        *counts.entry(*i).or_default() += 1;
    }
    counts.into_iter().map(|(i, c)| (Leg::from_insertion(n, &i), c)).collect()
}

/// Local unit brackets s_0..s_depth per table key (fixed-point index; a single
/// slot-0 entry in the symbolic mode).
#[derive(Clone, Debug, PartialEq)]
pub struct BracketTable<C: Coeff> {
    pub n: usize,
    pub depth: usize,
    pub entries: BTreeMap<usize, Vec<QSeries<C>>>,
}

impl<C: Coeff> BracketTable<C> {
    /// s_i = 0 everywhere: the starting point of the bootstrap.
    pub fn zeros(n: usize, keys: impl IntoIterator<Item = usize>, depth: usize, trunc: &Truncation) -> Self {
        let entries = keys.into_iter().map(|k| (k, vec![QSeries::zero(trunc.clone()); depth + 1])).collect();
        BracketTable { n, depth, entries }
    }
}

type SiteKey = (usize, usize);

struct Cache<K, V>(Mutex<HashMap<K, Arc<V>>>);

impl<K: Eq + Hash + Clone, V> Cache<K, V> {
    fn new() -> Self {
        Cache(Mutex::new(HashMap::new()))
    }

    fn get_or(&self, k: &K, f: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        if let Some(v) = self.0.lock().unwrap().get(k) {
            return Ok(v.clone());
        }
        let v = Arc::new(f()?);
        self.0.lock().unwrap().entry(k.clone()).or_insert(v.clone());
        Ok(v)
    }

    fn clear(&self) {
        self.0.lock().unwrap().clear();
    }
}

/// One vertex's share of an (𝖠, 𝖡) choice: ψ-exponents a−1 per flag and b−1 per leg.
#[derive(Clone, Debug)]
pub struct VertexChoice {
    pub flag_exps: Vec<u32>,
    pub leg_exps: Vec<u32>,
}

/// Flag and leg bookkeeping for a graph.
#[derive(Clone, Debug)]
pub struct GraphLayout {
    pub edges: Vec<(usize, usize)>,
    /// per vertex: (edge index, end) for each flag
    pub flags: Vec<Vec<(usize, usize)>>,
    /// per vertex: color of each leg
    pub legs: Vec<Vec<usize>>,
}

impl GraphLayout {
    pub fn new(g: &StableGraph) -> Self {
        let nv = g.num_vertices();
        let edges = g.edges();
        let mut flags = vec![Vec::new(); nv];
        for (e, &(v, w)) in edges.iter().enumerate() {
            flags[v].push((e, 0));
            flags[w].push((e, 1));
        }
        let legs = (0..nv)
            .map(|v| g.legs[v].iter().enumerate().flat_map(|(c, &cnt)| std::iter::repeat(c).take(cnt as usize)).collect())
            .collect();
        GraphLayout { edges, flags, legs }
    }

    /// dim M̄_{g(v), n(v)} − Σ k over the legs at v.
    pub fn budget<C: Coeff>(&self, g: &StableGraph, v: usize, legs: &[(Leg<C>, u32)]) -> i64 {
        let n_v = (self.flags[v].len() + self.legs[v].len()) as i64;
        3 * g.genus[v] as i64 - 3 + n_v - self.legs[v].iter().map(|&c| legs[c].0.k as i64).sum::<i64>()
    }

    /// All exponent choices at v with Σ ≤ budget.
    pub fn vertex_choices<C: Coeff>(&self, g: &StableGraph, v: usize, legs: &[(Leg<C>, u32)]) -> Vec<VertexChoice> {
        let budget = self.budget(g, v, legs);
        if budget < 0 {
            return Vec::new();
        }
        let nf = self.flags[v].len();
        let items = nf + self.legs[v].len();
        bounded_vectors(items, budget as u32)
            .into_iter()
            .map(|e| VertexChoice { flag_exps: e[..nf].to_vec(), leg_exps: e[nf..].to_vec() })
            .collect()
    }
}

fn bounded_vectors(len: usize, budget: u32) -> Vec<Vec<u32>> {
    if len == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 0..=budget {
        for mut rest in bounded_vectors(len - 1, budget - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Sum of one graph's contributions after the vertex-sign sum.
#[derive(Clone, Debug)]
pub struct GraphTerm<O: Coeff> {
    pub graph: StableGraph,
    pub series: QSeries<O>,
}

/// Contribution pieces of a single (Γ, sites, 𝖠, 𝖡), for audits.
pub struct TermPieces<'a, C: Coeff> {
    pub graph: &'a StableGraph,
    pub layout: &'a GraphLayout,
    pub choice: &'a [VertexChoice],
    pub vertices: Vec<Arc<QSeries<C>>>,
    pub edges: Vec<Arc<QSeries<C>>>,
    pub legs: Vec<(usize, Arc<QSeries<C>>)>,
}

pub struct Engine<'a, M: Mode> {
    pub mode: &'a M,
    pub trunc: Truncation,
    pub sign: EdgeSign,
    k_max: usize,
    factors: FactorTable,
    brackets: RwLock<BracketTable<M::C>>,
    local: Cache<SiteKey, LocalData<M::C>>,
    svals: Cache<SiteKey, Vec<QSeries<M::C>>>,
    vertex: Cache<(SiteKey, u32, Vec<u32>), QSeries<M::C>>,
    edge_m: Cache<(SiteKey, SiteKey), Vec<Vec<QSeries<M::C>>>>,
    edge: Cache<(SiteKey, SiteKey, u32, u32), QSeries<M::C>>,
}

/// R̃-depth that suffices for every graph of genus g with m legs.
pub fn required_depth(g: u32, m: usize) -> usize {
    (3 * g as i64 - 3 + m as i64).max(1) as usize
}

impl<'a, M: Mode> Engine<'a, M> {
    pub fn new(mode: &'a M, trunc: Truncation, sign: EdgeSign, k_max: usize, brackets: BracketTable<M::C>) -> Self {
        let cap = (0..trunc.n).map(|i| trunc.var_cap(i)).max().unwrap_or(0);
        Engine {
            mode,
            trunc,
            sign,
            k_max,
            factors: FactorTable::new(cap, k_max),
            brackets: RwLock::new(brackets),
            local: Cache::new(),
            svals: Cache::new(),
            vertex: Cache::new(),
            edge_m: Cache::new(),
            edge: Cache::new(),
        }
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn brackets(&self) -> BracketTable<M::C> {
        self.brackets.read().unwrap().clone()
    }

    /// Replaces the bracket table; drops everything derived from it.
    pub fn set_brackets(&self, table: BracketTable<M::C>) {
        *self.brackets.write().unwrap() = table;
        self.svals.clear();
        self.vertex.clear();
    }

    fn key(&self, site: &Site) -> SiteKey {
        self.mode.site_key(site)
    }

    pub fn local_data(&self, site: &Site) -> Result<Arc<LocalData<M::C>>> {
        self.local.get_or(&self.key(site), || Ok(assemble(self.mode, &self.factors, site, &self.trunc, self.k_max)))
    }

    pub fn s_values(&self, site: &Site) -> Result<Arc<Vec<QSeries<M::C>>>> {
        self.svals.get_or(&self.key(site), || {
            let table = self.brackets.read().unwrap();
            let entry = table
                .entries
                .get(&self.key(site).0)
                .ok_or_else(|| QplError::Depth(format!("no bracket entry for {:?}", site.point)))?;
            Ok(entry.iter().map(|s| s.map(|c| self.mode.relabel(c, site))).collect())
        })
    }

    /// e_p^{g−1}·Σ_j Ĥ_j·P[ψ^{exps} | λ₁^j](s^p).
    pub fn vertex_value(&self, site: &Site, g: u32, exps: &[u32]) -> Result<Arc<QSeries<M::C>>> {
        let mut sorted = exps.to_vec();
        sorted.sort_unstable();
        self.vertex.get_or(&(self.key(site), g, sorted.clone()), || {
            let s = self.s_values(site)?;
            let hodge = vertex_hodge_expand(self.mode, g, site);
            let mut acc = QSeries::zero(self.trunc.clone());
            for (j, h) in hodge.iter().enumerate() {
                if h.is_zero() {
                    continue;
                }
                let p = p_polynomial(g, &sorted, j as u32)?;
                if p.is_zero() {
                    continue;
                }
                acc = acc.add(&p_evaluate(&p, &s)?.mul_coeff(h));
            }
            let e = self.mode.euler(site);
            let pre = match g {
                0 => e.try_inv().ok_or_else(|| QplError::NonUnit("Euler class".into()))?,
                _ => e.pow(g - 1),
            };
            Ok(acc.mul_coeff(&pre))
        })
    }

    /// M(x,y) = Σ_S R̃(H^S)|_v(x)·R̃(H^{S^c})|_w(y) as [a][b], a + b ≤ K.
    pub fn edge_matrix(&self, sv: &Site, sw: &Site) -> Result<Arc<Vec<Vec<QSeries<M::C>>>>> {
        self.edge_m.get_or(&(self.key(sv), self.key(sw)), || {
            let lv = self.local_data(sv)?;
            let lw = self.local_data(sw)?;
            let full = (1u32 << self.mode.n()) - 1;
            let k = self.k_max;
            let mut m = vec![vec![QSeries::zero(self.trunc.clone()); k + 1]; k + 1];
            for (mask, rv) in &lv.rt {
                let rw = &lw.rt[&(full ^ mask)];
                for a in 0..=k {
                    for b in 0..=(k - a) {
                        m[a][b] = m[a][b].add(&rv[a].mul(&rw[b]));
                    }
                }
            }
            Ok(m)
        })
    }

    /// Edge weight for flag values (k, l) at (v, w).
    pub fn edge_value(&self, sv: &Site, sw: &Site, k: u32, l: u32) -> Result<Arc<QSeries<M::C>>> {
        self.edge.get_or(&(self.key(sv), self.key(sw), k, l), || {
            if (k + l - 1) as usize > self.k_max {
                return Err(QplError::Depth(format!("edge ({k},{l}) needs R-depth {}", k + l - 1)));
            }
            let m = self.edge_matrix(sv, sw)?;
            let mut acc = QSeries::zero(self.trunc.clone());
            for i in 1..=l {
                let t = &m[(k - 1 + i) as usize][(l - i) as usize];
                acc = if i % 2 == 1 { acc.add(t) } else { acc.sub(t) };
            }
            if self.sign == EdgeSign::Proof && (k + l) % 2 == 1 {
                acc = acc.neg();
            }
            Ok(acc)
        })
    }

    /// Leg weight [R̃(γ)]_{x^{b−1}} with the convention's sign.
    pub fn leg_value(&self, site: &Site, leg: &Leg<M::C>, b: u32) -> Result<QSeries<M::C>> {
        if b as usize > self.k_max + 1 {
            return Err(QplError::Depth(format!("leg b={b} needs R-depth {}", b - 1)));
        }
        let ld = self.local_data(site)?;
        let r = ld.r_class(&leg.class, (b - 1) as usize);
        Ok(if self.sign == EdgeSign::Proof && b % 2 == 0 { r.neg() } else { r })
    }

    /// Σ_{𝖠,𝖡} of the contributions of Γ at one site assignment.
    pub fn graph_value(&self, graph: &StableGraph, layout: &GraphLayout, legs: &[(Leg<M::C>, u32)], sites: &[Site]) -> Result<QSeries<M::C>> {
        let nv = graph.num_vertices();
        // nonzero vertex values per choice
        let mut per_vertex: Vec<Vec<(VertexChoice, Arc<QSeries<M::C>>)>> = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut list = Vec::new();
            for ch in layout.vertex_choices(graph, v, legs) {
                let exps = vertex_exponents(layout, v, &ch, legs);
                let val = self.vertex_value(&sites[v], graph.genus[v], &exps)?;
                if !val.is_zero() {
                    list.push((ch, val));
                }
            }
            if list.is_empty() {
                return Ok(QSeries::zero(self.trunc.clone()));
            }
            per_vertex.push(list);
        }
        // leg values per (vertex, color, b)
        let mut leg_vals: HashMap<(usize, usize, u32), QSeries<M::C>> = HashMap::new();
        let mut acc = QSeries::zero(self.trunc.clone());
        let mut idx = vec![0usize; nv];
        loop {
            let mut term = QSeries::one(self.trunc.clone());
            for v in 0..nv {
                term = term.mul(&per_vertex[v][idx[v]].1);
                if term.is_zero() {
                    break;
                }
            }
            if !term.is_zero() {
                let flag_exp = |v: usize, e: usize, end: usize| -> u32 {
                    let pos = layout.flags[v].iter().position(|&f| f == (e, end)).expect("flag present");
                    per_vertex[v][idx[v]].0.flag_exps[pos]
                };
                for (e, &(v, w)) in layout.edges.iter().enumerate() {
                    let k = flag_exp(v, e, 0) + 1;
                    let l = flag_exp(w, e, 1) + 1;
                    term = term.mul(&*self.edge_value(&sites[v], &sites[w], k, l)?);
                    if term.is_zero() {
                        break;
                    }
                }
            }
            if !term.is_zero() {
                'legs: for v in 0..nv {
                    for (j, &c) in layout.legs[v].iter().enumerate() {
                        let b = per_vertex[v][idx[v]].0.leg_exps[j] + 1;
                        if !leg_vals.contains_key(&(v, c, b)) {
                            leg_vals.insert((v, c, b), self.leg_value(&sites[v], &legs[c].0, b)?);
                        }
                        term = term.mul(&leg_vals[&(v, c, b)]);
                        if term.is_zero() {
                            break 'legs;
                        }
                    }
                }
            }
            acc = acc.add(&term);
            // odometer
            let mut v = 0;
            loop {
                if v == nv {
                    return Ok(acc);
                }
                idx[v] += 1;
                if idx[v] < per_vertex[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
        }
    }

    /// Visits every nonvanishing (𝖠, 𝖡) term of Γ at the given sites.
    pub fn for_each_term(
        &self,
        graph: &StableGraph,
        legs: &[(Leg<M::C>, u32)],
        sites: &[Site],
        mut visit: impl FnMut(TermPieces<'_, M::C>),
    ) -> Result<()> {
        let layout = GraphLayout::new(graph);
        let nv = graph.num_vertices();
        let choices: Vec<Vec<VertexChoice>> = (0..nv).map(|v| layout.vertex_choices(graph, v, legs)).collect();
        if choices.iter().any(Vec::is_empty) {
            return Ok(());
        }
        let mut idx = vec![0usize; nv];
        loop {
            let choice: Vec<VertexChoice> = (0..nv).map(|v| choices[v][idx[v]].clone()).collect();
            let mut vertices = Vec::with_capacity(nv);
            for v in 0..nv {
                let exps = vertex_exponents(&layout, v, &choice[v], legs);
                vertices.push(self.vertex_value(&sites[v], graph.genus[v], &exps)?);
            }
            let mut edges = Vec::new();
            for (e, &(v, w)) in layout.edges.iter().enumerate() {
                let pv = layout.flags[v].iter().position(|&f| f == (e, 0)).unwrap();
                let pw = layout.flags[w].iter().position(|&f| f == (e, 1)).unwrap();
                edges.push(self.edge_value(&sites[v], &sites[w], choice[v].flag_exps[pv] + 1, choice[w].flag_exps[pw] + 1)?);
            }
            let mut leg_list = Vec::new();
            for v in 0..nv {
                for (j, &c) in layout.legs[v].iter().enumerate() {
                    leg_list.push((c, Arc::new(self.leg_value(&sites[v], &legs[c].0, choice[v].leg_exps[j] + 1)?)));
                }
            }
            visit(TermPieces { graph, layout: &layout, choice: &choice, vertices, edges, legs: leg_list });
            let mut v = 0;
            loop {
                if v == nv {
                    return Ok(());
                }
                idx[v] += 1;
                if idx[v] < choices[v].len() {
                    break;
                }
                idx[v] = 0;
                v += 1;
            }
        }
    }

    /// Per-graph sums Σ_sites Σ_{𝖠,𝖡} ∏Cont, weighted by ∏mult!/|Aut| and
    /// reduced over vertex signs. Graphs in canonical order.
    pub fn graph_terms(&self, g: u32, legs: &[(Leg<M::C>, u32)]) -> Result<Vec<GraphTerm<M::Out>>> {
        let mult: Vec<u32> = legs.iter().map(|l| l.1).collect();
        let graphs = enumerate_colored(g, &mult)?;
        let layouts: Vec<GraphLayout> = graphs.iter().map(GraphLayout::new).collect();
        let mut tasks: Vec<(usize, Vec<Site>)> = Vec::new();
        for (gi, gr) in graphs.iter().enumerate() {
            for sites in self.mode.assignments(gr.num_vertices()) {
                tasks.push((gi, sites));
            }
        }
        let values: Vec<Result<QSeries<M::C>>> =
            tasks.par_iter().map(|(gi, sites)| self.graph_value(&graphs[*gi], &layouts[*gi], legs, sites)).collect();
        let mut sums: Vec<QSeries<M::C>> = vec![QSeries::zero(self.trunc.clone()); graphs.len()];
        for ((gi, _), v) in tasks.iter().zip(values) {
            sums[*gi] = sums[*gi].add(&v?);
        }
        let mut out = Vec::with_capacity(graphs.len());
        for (gr, s) in graphs.into_iter().zip(sums) {
            let weighted = s.scale(&gr.weight());
            let mut series = QSeries::zero(self.trunc.clone());
            for (d, c) in weighted.terms() {
                series.set(*d, self.mode.finalize(c, gr.num_vertices())?);
            }
            out.push(GraphTerm { graph: gr, series });
        }
        Ok(out)
    }

    /// The full localization sum for genus g with the given colored legs.
    pub fn total_series(&self, g: u32, legs: &[(Leg<M::C>, u32)]) -> Result<QSeries<M::Out>> {
        let mut acc = QSeries::zero(self.trunc.clone());
        for t in self.graph_terms(g, legs)? {
            acc = acc.add(&t.series);
        }
        Ok(acc)
    }
}

/// ψ-exponents at v: a−1 on flags, b−1+k on legs.
pub fn vertex_exponents<C: Coeff>(layout: &GraphLayout, v: usize, ch: &VertexChoice, legs: &[(Leg<C>, u32)]) -> Vec<u32> {
    let mut exps = ch.flag_exps.clone();
    for (j, &c) in layout.legs[v].iter().enumerate() {
        exps.push(ch.leg_exps[j] + legs[c].0.k);
    }
    exps
}

/// Convenience: the unit class as a leg.
pub fn unit_leg<C: Coeff>(n: usize) -> Leg<C> {
    Leg { k: 0, class: EquivClass::unit(n) }
}
