//! Quasicharacters on sampled group elements: defect, homogenization,
//! straightening quasi-isometries to the line, pseudocharacters from actions
//! fixing an end, and the index-2 constructions.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt::Debug;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::coarse::{classify_element, ElementKind, GraphSpace, MetricSpace, QuasiActionTable, RealLine};
use crate::error::{Error, Result};
use crate::group::{Group, Word};
use crate::metric::MetricGraph;
use crate::rational::{parse_rational, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefectReport<K> {
    pub defect: Q,
    pub witness: Option<(K, K)>,
    pub pairs_checked: usize,
}

/// `sup |f(gh) - f(g) - f(h)|` over the given pairs.
pub fn defect<K: Ord + Clone + Debug>(
    values: &BTreeMap<K, Q>,
    pairs: &[(K, K)],
    mul: impl Fn(&K, &K) -> K,
) -> Result<DefectReport<K>> {
    let get = |k: &K| {
        values
            .get(k)
            .copied()
            .ok_or_else(|| Error::input(format!("no value for {k:?}")))
    };
    let mut best = Q::zero();
    let mut witness = None;
    for (g, h) in pairs {
        let d = (get(&mul(g, h))? - get(g)? - get(h)?).abs();
        if witness.is_none() || d > best {
            best = d;
            witness = Some((g.clone(), h.clone()));
        }
    }
    Ok(DefectReport {
        defect: best,
        witness,
        pairs_checked: pairs.len(),
    })
}

/// All pairs of table keys whose product is also a key.
pub fn closed_pairs<K: Ord + Clone>(values: &BTreeMap<K, Q>, mul: impl Fn(&K, &K) -> K) -> Vec<(K, K)> {
    let mut out = Vec::new();
    for g in values.keys() {
        for h in values.keys() {
            if values.contains_key(&mul(g, h)) {
                out.push((g.clone(), h.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quasicharacter<K: Ord> {
    pub values: BTreeMap<K, Q>,
    pub measured_defect: Q,
    pub defect_witness: Option<(K, K)>,
    pub homogeneous: bool,
}

impl<K: Ord + Clone + Debug> Quasicharacter<K> {
    /// Defect over every pair closed in the table; homogeneity over every
    /// positive power present in the table.
    pub fn from_table(values: BTreeMap<K, Q>, mul: impl Fn(&K, &K) -> K + Copy) -> Self {
        let pairs = closed_pairs(&values, mul);
        let report = defect(&values, &pairs, mul).expect("pairs are closed");
        let homogeneous = is_homogeneous(&values, mul);
        Quasicharacter {
            values,
            measured_defect: report.defect,
            defect_witness: report.witness,
            homogeneous,
        }
    }

    pub fn get(&self, k: &K) -> Option<Q> {
        self.values.get(k).copied()
    }
}

impl Quasicharacter<i64> {
    pub fn on_integers(values: BTreeMap<i64, Q>) -> Self {
        Quasicharacter::from_table(values, |a, b| a + b)
    }
}

/// `f(g^n) = n f(g)` for every key `g` and every `n >= 2` with `g^n` in the table.
fn is_homogeneous<K: Ord + Clone>(values: &BTreeMap<K, Q>, mul: impl Fn(&K, &K) -> K) -> bool {
    for (g, &fg) in values {
        let mut gn = mul(g, g);
        let mut n = 2i64;
        while let Some(&v) = values.get(&gn) {
            if v != fg * Q::from_integer(n) {
                return false;
            }
            if &gn == g || n > values.len() as i64 {
                break;
            }
            gn = mul(&gn, g);
            n += 1;
        }
    }
    true
}

/// Reads lines `element value` with integer elements.
pub fn parse_integer_table(text: &str) -> Result<BTreeMap<i64, Q>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(k), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::parse(i + 1, "expected `element value`"));
        };
        let k: i64 = k
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("bad element {k:?}")))?;
        let v = parse_rational(v).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if out.insert(k, v).is_some() {
            return Err(Error::parse(i + 1, format!("duplicate element {k}")));
        }
    }
    if out.is_empty() {
        return Err(Error::input("empty table"));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homogenized {
    pub n: u64,
    /// `f(g^N) / N`.
    pub value: Q,
    /// `defect / N`.
    pub error_bar: Q,
    pub base_value: Q,
    pub deviation: Q,
    /// `|value - f(g)| <= defect + defect / N`.
    pub within_defect: bool,
}

/// `f_pow(n)` must return `f(g^n)`.
pub fn homogenize(f_pow: impl Fn(u64) -> Option<Q>, n: u64, defect: Q) -> Result<Homogenized> {
    if n == 0 {
        return Err(Error::input("homogenization needs N >= 1"));
    }
    let at = |k: u64| f_pow(k).ok_or_else(|| Error::input(format!("no value for g^{k}")));
    let nq = Q::from_integer(n as i64);
    let value = at(n)? / nq;
    let base_value = at(1)?;
    let error_bar = defect / nq;
    let deviation = (value - base_value).abs();
    Ok(Homogenized {
        n,
        value,
        error_bar,
        base_value,
        deviation,
        within_defect: deviation <= defect + error_bar,
    })
}

/// The point at fraction `t` of the way from `u` to `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Crossing {
    pub u: usize,
    pub v: usize,
    pub t: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ZeroSet {
    pub vertices: Vec<usize>,
    pub crossings: Vec<Crossing>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StraightenedMap {
    pub original: Vec<Q>,
    pub straightened: Vec<Q>,
    pub r: Q,
    pub epsilon_in: Q,
    /// The constant for `ρ` made affine on edges, over vertices and crossings.
    pub epsilon_affine: Q,
    pub zero_set: ZeroSet,
    pub p_side: Vec<usize>,
    pub m_side: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StraighteningCheck {
    pub pairs_checked: usize,
    pub sandwich_bound: Q,
    /// Largest `| |ρ'(x) - ρ'(y)| - d(x, y) |`.
    pub sandwich_worst: Q,
    pub sandwich_violations: usize,
    pub first_violation: Option<(usize, usize)>,
    pub level_bound: Q,
    pub zero_level_bound: Q,
    /// Widest nonzero level set as `(c, diameter)`.
    pub widest_level: Option<(Q, Q)>,
    pub zero_level_diameter: Q,
    pub level_violations: usize,
    pub ok: bool,
}

/// Sign-change points of `rho` extended affinely over edges.
fn zero_locus(graph: &MetricGraph, rho: &[Q]) -> ZeroSet {
    let vertices = (0..rho.len()).filter(|&v| rho[v].is_zero()).collect();
    let crossings = graph
        .edges()
        .iter()
        .filter(|(u, v, _)| rho[*u] * rho[*v] < Q::zero())
        .map(|&(u, v, _)| Crossing {
            u,
            v,
            t: rho[u] / (rho[u] - rho[v]),
        })
        .collect();
    ZeroSet { vertices, crossings }
}

fn to_crossing(graph: &MetricGraph, y: usize, c: &Crossing) -> Q {
    let len = graph.edge_length(c.u, c.v).expect("crossing lies on an edge");
    let d = |a: usize| graph.to_q(graph.units(y, a));
    (d(c.u) + c.t * len).min(d(c.v) + (Q::one() - c.t) * len)
}

fn between_crossings(graph: &MetricGraph, a: &Crossing, b: &Crossing) -> Q {
    let la = graph.edge_length(a.u, a.v).expect("crossing lies on an edge");
    let through =
        (to_crossing(graph, a.u, b) + a.t * la).min(to_crossing(graph, a.v, b) + (Q::one() - a.t) * la);
    if (a.u, a.v) == (b.u, b.v) {
        through.min((a.t - b.t).abs() * la)
    } else {
        through
    }
}

/// `measured_epsilon` for the affine extension of `rho`, taken over the
/// vertices and the crossing points of its zero locus.
pub fn affine_epsilon(graph: &MetricGraph, rho: &[Q], r: Q) -> Result<Q> {
    let (mut worst, _) = measured_epsilon(graph, rho, r)?;
    let cross = zero_locus(graph, rho).crossings;
    let excess = |d: Q, di: Q| (di - r * d).max(d / r - di);
    for (i, a) in cross.iter().enumerate() {
        for y in 0..rho.len() {
            worst = worst.max(excess(to_crossing(graph, y, a), rho[y].abs()));
        }
        for b in &cross[i + 1..] {
            worst = worst.max(excess(between_crossings(graph, a, b), Q::zero()));
        }
    }
    Ok(worst)
}

/// Component of `start` in the subgraph spanned by vertices accepted by `keep`.
fn component(graph: &MetricGraph, start: usize, keep: impl Fn(usize) -> bool) -> Vec<usize> {
    let mut seen = vec![false; graph.vertex_count()];
    let mut stack = vec![start];
    seen[start] = true;
    let mut out = Vec::new();
    while let Some(v) = stack.pop() {
        out.push(v);
        for w in graph.neighbors(v) {
            if !seen[w] && keep(w) {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Distances from every vertex to the zero locus.
fn distance_to_zero_set(graph: &MetricGraph, z: &ZeroSet) -> Vec<Option<Q>> {
    let mut dist: Vec<Option<Q>> = vec![None; graph.vertex_count()];
    let mut heap = BinaryHeap::new();
    let mut seed = |v: usize, d: Q, heap: &mut BinaryHeap<Reverse<(Q, usize)>>| {
        if dist[v].is_none_or(|old| d < old) {
            dist[v] = Some(d);
            heap.push(Reverse((d, v)));
        }
    };
    for &v in &z.vertices {
        seed(v, Q::zero(), &mut heap);
    }
    for c in &z.crossings {
        let len = graph.edge_length(c.u, c.v).expect("crossing lies on an edge");
        seed(c.u, c.t * len, &mut heap);
        seed(c.v, (Q::one() - c.t) * len, &mut heap);
    }
    let mut done = vec![false; graph.vertex_count()];
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for w in graph.neighbors(v) {
            let nd = d + graph.edge_length(v, w).expect("adjacent");
            if dist[w].is_none_or(|old| nd < old) {
                dist[w] = Some(nd);
                heap.push(Reverse((nd, w)));
            }
        }
    }
    dist
}

/// Smallest `ε` for which `rho` is an `(R, ε)`-quasi-isometry on vertices.
pub fn measured_epsilon(graph: &MetricGraph, rho: &[Q], r: Q) -> Result<(Q, Option<(usize, usize)>)> {
    if r < Q::one() {
        return Err(Error::input("need R >= 1"));
    }
    if rho.len() != graph.vertex_count() {
        return Err(Error::input("one value per vertex required"));
    }
    let mut worst = Q::zero();
    let mut pair = None;
    for x in 0..rho.len() {
        for y in x + 1..rho.len() {
            let d = graph.to_q(graph.units(x, y));
            let di = (rho[x] - rho[y]).abs();
            let e = (di - r * d).max(d / r - di);
            if e > worst {
                worst = e;
                pair = Some((x, y));
            }
        }
    }
    Ok((worst, pair))
}

/// Replaces an `(R, ε)`-quasi-isometry to the line by signed distance to its
/// zero locus, positive on the component holding the maximum and negative on
/// the one holding the minimum.
pub fn straighten_to_line(graph: &MetricGraph, rho: &[Q], r: Q, epsilon: Q) -> Result<StraightenedMap> {
    let (needed, pair) = measured_epsilon(graph, rho, r)?;
    if needed > epsilon {
        let (x, y) = pair.expect("positive excess has a witness");
        return Err(Error::contract(format!(
            "map is not an ({r}, {epsilon})-quasi-isometry: vertices {x} and {y} need {needed}"
        )));
    }
    straighten_unchecked(graph, rho, r, epsilon)
}

fn straighten_unchecked(graph: &MetricGraph, rho: &[Q], r: Q, epsilon: Q) -> Result<StraightenedMap> {
    let argmax = (0..rho.len()).max_by_key(|&v| (rho[v], Reverse(v))).unwrap();
    let argmin = (0..rho.len()).min_by_key(|&v| (rho[v], v)).unwrap();
    if !rho[argmax].is_positive() || !rho[argmin].is_negative() {
        return Err(Error::Degenerate(
            "map does not take both signs, so there are not two sides".into(),
        ));
    }
    let zero_set = zero_locus(graph, rho);
    let p_side = component(graph, argmax, |v| rho[v].is_positive());
    let m_side = component(graph, argmin, |v| rho[v].is_negative());
    let dist = distance_to_zero_set(graph, &zero_set);
    let mut straightened = vec![Q::zero(); rho.len()];
    for &v in &p_side {
        straightened[v] = dist[v].expect("zero set is nonempty");
    }
    for &v in &m_side {
        straightened[v] = -dist[v].expect("zero set is nonempty");
    }
    Ok(StraightenedMap {
        original: rho.to_vec(),
        straightened,
        r,
        epsilon_in: epsilon,
        epsilon_affine: affine_epsilon(graph, rho, r)?,
        zero_set,
        p_side,
        m_side,
    })
}

impl StraightenedMap {
    /// Exact check of the `(1, 5ε)` sandwich on all vertex pairs and of the
    /// level-set diameters `4ε` (nonzero levels) and `2ε` (zero level,
    /// including the crossing points).
    pub fn verify(&self, graph: &MetricGraph) -> StraighteningCheck {
        self.verify_against(graph, self.epsilon_in)
    }

    /// The checks at `R ε`, with `ε` grown to cover the affine extension.
    pub fn verify_scaled(&self, graph: &MetricGraph) -> StraighteningCheck {
        self.verify_against(graph, self.r * self.epsilon_in.max(self.epsilon_affine))
    }

    /// The same checks with `eps` in place of the input constant. For
    /// `R > 1` the bounds hold with the fibre bound `R ε` rather than `ε`.
    pub fn verify_against(&self, graph: &MetricGraph, eps: Q) -> StraighteningCheck {
        let n = self.straightened.len();
        let sandwich_bound = Q::from_integer(5) * eps;
        let level_bound = Q::from_integer(4) * eps;
        let zero_level_bound = Q::from_integer(2) * eps;
        let d = |x: usize, y: usize| graph.to_q(graph.units(x, y));
        let mut worst = Q::zero();
        let mut violations = 0;
        let mut first_violation = None;
        let mut levels: BTreeMap<Q, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            levels.entry(self.straightened[x]).or_default().push(x);
            for y in x + 1..n {
                let gap = ((self.straightened[x] - self.straightened[y]).abs() - d(x, y)).abs();
                worst = worst.max(gap);
                if gap > sandwich_bound {
                    violations += 1;
                    first_violation.get_or_insert((x, y));
                }
            }
        }
        let mut level_violations = 0;
        let mut widest_level: Option<(Q, Q)> = None;
        let mut zero_level_diameter = Q::zero();
        for (c, members) in &levels {
            if c.is_zero() {
                continue;
            }
            let mut diam = Q::zero();
            for (i, &x) in members.iter().enumerate() {
                for &y in &members[i + 1..] {
                    diam = diam.max(d(x, y));
                }
            }
            if diam > level_bound {
                level_violations += 1;
            }
            if widest_level.as_ref().is_none_or(|(_, w)| diam > *w) {
                widest_level = Some((*c, diam));
            }
        }
        // Zero level: vertices with ρ' = 0 together with the crossing points.
        let zero_vertices = levels.get(&Q::zero()).cloned().unwrap_or_default();
        let cross = &self.zero_set.crossings;
        for (i, &x) in zero_vertices.iter().enumerate() {
            for &y in &zero_vertices[i + 1..] {
                zero_level_diameter = zero_level_diameter.max(d(x, y));
            }
            for c in cross {
                zero_level_diameter = zero_level_diameter.max(to_crossing(graph, x, c));
            }
        }
        for (i, a) in cross.iter().enumerate() {
            for b in &cross[i + 1..] {
                zero_level_diameter = zero_level_diameter.max(between_crossings(graph, a, b));
            }
        }
        if zero_level_diameter > zero_level_bound {
            level_violations += 1;
        }
        StraighteningCheck {
            pairs_checked: n * n.saturating_sub(1) / 2,
            sandwich_bound,
            sandwich_worst: worst,
            sandwich_violations: violations,
            first_violation,
            level_bound,
            zero_level_bound,
            widest_level,
            zero_level_diameter,
            level_violations,
            ok: violations == 0 && level_violations == 0,
        }
    }
}

/// Spaces on which an orbit can be turned into a finite metric graph.
pub trait OrbitGraph: MetricSpace {
    /// A connected graph containing every given point as a vertex, isometric
    /// on those points, with the vertex of each point.
    fn orbit_graph(&self, points: &[Self::Point]) -> Result<(Arc<MetricGraph>, Vec<usize>)>;
}

impl OrbitGraph for RealLine {
    fn orbit_graph(&self, points: &[Q]) -> Result<(Arc<MetricGraph>, Vec<usize>)> {
        let sorted: Vec<Q> = points.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let edges = sorted
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, i + 1, w[1] - w[0]))
            .collect();
        let graph = MetricGraph::new(sorted.len(), edges)?;
        let index = points
            .iter()
            .map(|p| sorted.binary_search(p).expect("point was inserted"))
            .collect();
        Ok((Arc::new(graph), index))
    }
}

impl OrbitGraph for GraphSpace {
    fn orbit_graph(&self, points: &[usize]) -> Result<(Arc<MetricGraph>, Vec<usize>)> {
        Ok((self.graph.clone(), points.to_vec()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionConfig {
    /// Homogenization exponent `N`.
    pub n: u64,
    pub window_start: u64,
    pub window_len: u64,
    /// Orbit length used to classify sampled elements.
    pub classify_n: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            n: 64,
            window_start: 0,
            window_len: 4,
            classify_n: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedValue {
    pub element: String,
    pub kind: ElementKind,
    /// `χ₀(g)`.
    pub chi_zero: Q,
    /// Window maximum of `χ₀(π^-i g π^i)`.
    pub chi: Q,
    /// Same with the window shifted by one.
    pub chi_shifted: Q,
    /// `χ(g^N) / N`, or exactly 0 after a plateau.
    pub chi_bar: Q,
    pub plateau: bool,
    pub error_bar: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction<E: Ord> {
    pub pi: String,
    pub config: ExtractionConfig,
    /// Power `M` of `π` whose orbit point anchors the Busemann coordinate.
    pub horizon: u64,
    pub orbit_points: usize,
    /// Additive constant of the Busemann coordinate as a `(1, ε)`-quasi-isometry.
    pub epsilon: Q,
    pub values: Vec<ExtractedValue>,
    /// Homogenized `χ` on the sample and on products of sampled pairs.
    pub chi: Quasicharacter<E>,
    /// Defect of the window maximum `χ` before homogenization.
    pub chi_defect: Q,
    pub elliptic_zero_check: bool,
    pub hyperbolic_nonzero_check: bool,
    pub window_stable: bool,
    /// Sampled elements with no defined conjugate in the window.
    pub exhausted: Vec<String>,
}

/// Pseudocharacter of a quasi-action fixing the forward end of the
/// hyperbolic element `pi`.
///
/// `χ₀` is the straightened Busemann coordinate `d(x, π^M x) - d(y, π^M x)`
/// on the orbit graph evaluated at `g x`; `χ` maximizes `χ₀` over the
/// conjugates `π^-i g π^i` in the window; `χ̄(g) = χ(g^N)/N`, set to 0 when
/// `n ↦ χ(g^n)` plateaus within the defect of `χ`.
pub fn extract_end_fixing<G, X>(
    t: &QuasiActionTable<G, X>,
    base: &X::Point,
    pi: &Word,
    sample: &[Word],
    config: &ExtractionConfig,
) -> Result<Extraction<G::Elem>>
where
    G: Group,
    X: OrbitGraph,
{
    if config.n == 0 {
        return Err(Error::input("homogenization needs N >= 1"));
    }
    if sample.is_empty() {
        return Err(Error::input("empty element sample"));
    }
    let group = &t.group;
    let pi_class = classify_element(t, pi, base, config.classify_n)?;
    if pi_class.kind != ElementKind::Hyperbolic {
        return Err(Error::contract(format!(
            "{} is {}, not hyperbolic",
            t.word_name(pi),
            pi_class.kind.as_str()
        )));
    }
    let pi_e = group.eval(pi);
    let sample_e: Vec<G::Elem> = sample.iter().map(|w| group.eval(w)).collect();
    let mut targets: BTreeSet<G::Elem> = sample_e.iter().cloned().collect();
    for g in &sample_e {
        for h in &sample_e {
            targets.insert(group.mul(g, h));
        }
    }
    let n = config.n as i64;
    let last = config.window_start + config.window_len + 1;
    let conj = |g: &G::Elem, i: u64| {
        let p = group.pow(&pi_e, i as i64);
        group.mul(&group.inv(&p), &group.mul(g, &p))
    };

    // Every element whose orbit point is needed.
    let mut needed: BTreeSet<G::Elem> = BTreeSet::new();
    let powers_of = |g: &G::Elem| -> Vec<G::Elem> { (0..=n).map(|k| group.pow(g, k)).collect() };
    for g in &targets {
        for gk in powers_of(g) {
            for i in config.window_start..=last {
                needed.insert(conj(&gk, i));
            }
        }
    }
    let mut orbit: BTreeMap<G::Elem, X::Point> = BTreeMap::new();
    for g in &needed {
        if let Some(p) = t.try_apply(g, base) {
            orbit.insert(g.clone(), p);
        }
    }
    orbit.insert(group.identity(), base.clone());

    // Horizon: a power of π farther from the base than every orbit point.
    let reach = orbit
        .values()
        .map(|p| t.space.dist(base, p))
        .max()
        .unwrap_or_else(Q::zero);
    let mut horizon = 1u64;
    let anchor = loop {
        let h = t.apply(&group.pow(&pi_e, horizon as i64), base)?;
        if t.space.dist(base, &h) > reach {
            break h;
        }
        if horizon >= 1 << 30 {
            return Err(Error::Degenerate("orbit of pi does not leave the sample".into()));
        }
        horizon *= 2;
    };

    // The opposite point keeps both signs present when every sampled orbit
    // point lies ahead of the base.
    let behind = t.apply(&group.pow(&pi_e, -(horizon as i64)), base)?;

    let keys: Vec<G::Elem> = orbit.keys().cloned().collect();
    let mut pts: Vec<X::Point> = keys.iter().map(|k| orbit[k].clone()).collect();
    pts.push(behind);
    pts.push(anchor);
    let (graph, index) = t.space.orbit_graph(&pts)?;
    let anchor_v = index[pts.len() - 1];
    let base_v = index[keys.binary_search(&group.identity()).unwrap()];
    let du = graph.distances_from(anchor_v);
    let far = graph.to_q(du[base_v]);
    let rho: Vec<Q> = (0..graph.vertex_count()).map(|v| far - graph.to_q(du[v])).collect();
    let (epsilon, _) = measured_epsilon(&graph, &rho, Q::one())?;
    let straight = straighten_unchecked(&graph, &rho, Q::one(), epsilon)?;
    let chi_zero = |g: &G::Elem| {
        keys.binary_search(g)
            .ok()
            .map(|i| straight.straightened[index[i]])
    };
    let chi_window = |g: &G::Elem, start: u64| {
        (start..=start + config.window_len)
            .filter_map(|i| chi_zero(&conj(g, i)))
            .max()
    };
    let chi = |g: &G::Elem| chi_window(g, config.window_start);

    // Defect of χ over sampled pairs.
    let mut chi_defect = Q::zero();
    for g in &sample_e {
        for h in &sample_e {
            if let (Some(a), Some(b), Some(c)) = (chi(g), chi(h), chi(&group.mul(g, h))) {
                chi_defect = chi_defect.max((c - a - b).abs());
            }
        }
    }

    let nq = Q::from_integer(n);
    let half = (n / 2) as usize;
    let homogenized = |g: &G::Elem| -> Option<(Q, bool)> {
        let seq: Vec<Q> = powers_of(g).iter().map(|gk| chi(&gk)).collect::<Option<_>>()?;
        let first = seq[..=half].iter().map(|v| v.abs()).max().unwrap();
        let all = seq.iter().map(|v| v.abs()).max().unwrap();
        if all <= first + chi_defect {
            Some((Q::zero(), true))
        } else {
            Some((seq[n as usize] / nq, false))
        }
    };

    let mut table = BTreeMap::new();
    let mut exhausted = Vec::new();
    for g in &targets {
        if let Some((v, _)) = homogenized(g) {
            table.insert(g.clone(), v);
        }
    }
    let mut values = Vec::new();
    let mut elliptic_zero_check = true;
    let mut hyperbolic_nonzero_check = true;
    let mut window_stable = true;
    for (w, g) in sample.iter().zip(&sample_e) {
        let name = t.word_name(w);
        let (Some(c), Some((bar, plateau))) = (chi(g), homogenized(g)) else {
            exhausted.push(name);
            continue;
        };
        let shifted = chi_window(g, config.window_start + 1).unwrap_or(c);
        if shifted.signum() != c.signum() {
            window_stable = false;
        }
        let kind = classify_element(t, w, base, config.classify_n)?.kind;
        match kind {
            ElementKind::Elliptic => elliptic_zero_check &= bar.is_zero(),
            ElementKind::Hyperbolic => hyperbolic_nonzero_check &= !bar.is_zero(),
            ElementKind::Undecided => {}
        }
        values.push(ExtractedValue {
            element: name,
            kind,
            chi_zero: chi_zero(g).unwrap_or_else(Q::zero),
            chi: c,
            chi_shifted: shifted,
            chi_bar: bar,
            plateau,
            error_bar: chi_defect / nq,
        });
    }
    let chi_q = Quasicharacter::from_table(table, |a, b| group.mul(a, b));
    Ok(Extraction {
        pi: t.word_name(pi),
        config: config.clone(),
        horizon,
        orbit_points: graph.vertex_count(),
        epsilon,
        values,
        chi: chi_q,
        chi_defect,
        elliptic_zero_check,
        hyperbolic_nonzero_check,
        window_stable,
        exhausted,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Index2Extension<K: Ord> {
    /// `f_t ≡ 0`: `f̄(h) = f(h)`, `f̄(th) = f(h)`.
    Extended {
        fbar: Quasicharacter<K>,
        pairs_checked: usize,
        f_defect: Q,
        f_t_squared: Q,
        bound: Q,
        bound_holds: bool,
    },
    /// `f_t(h) = f(h) - f(t^-1 h t)` is not identically zero.
    Twisted {
        f_t: Quasicharacter<K>,
        antisymmetry_checked: usize,
        antisymmetry_gap: Q,
        antisymmetric: bool,
    },
}

/// The index-2 case split for a quasicharacter `f` given on `H`.
///
/// `f` must contain the sample, the conjugates `t^-1 h t` and `t^2`.
pub fn extend_index2<G: Group>(
    group: &G,
    in_h: impl Fn(&G::Elem) -> bool,
    f: &BTreeMap<G::Elem, Q>,
    t: &G::Elem,
    sample: &[G::Elem],
) -> Result<Index2Extension<G::Elem>> {
    if in_h(t) {
        return Err(Error::input("coset representative lies in H"));
    }
    let get = |k: &G::Elem| {
        f.get(k)
            .copied()
            .ok_or_else(|| Error::input(format!("no value for {}", group.describe(k))))
    };
    for (k, _) in f.iter() {
        if !in_h(k) {
            return Err(Error::input(format!("{} is not in H", group.describe(k))));
        }
    }
    let tinv = group.inv(t);
    let conj = |h: &G::Elem| group.mul(&tinv, &group.mul(h, t));
    let mut f_t = BTreeMap::new();
    for h in sample {
        if !in_h(h) {
            return Err(Error::input(format!("{} is not in H", group.describe(h))));
        }
        f_t.insert(h.clone(), get(h)? - get(&conj(h))?);
    }
    // Extend f_t to every table key whose conjugate is also known.
    for (h, v) in f {
        if let Some(c) = f.get(&conj(h)) {
            f_t.entry(h.clone()).or_insert(v - c);
        }
    }
    if f_t.values().all(|v| v.is_zero()) {
        let f_pairs = closed_pairs(f, |a, b| group.mul(a, b));
        let f_defect = defect(f, &f_pairs, |a, b| group.mul(a, b))?.defect;
        let f_t_squared = get(&group.mul(t, t))?.abs();
        let fbar_at = |g: &G::Elem| {
            if in_h(g) {
                f.get(g).copied()
            } else {
                f.get(&group.mul(&tinv, g)).copied()
            }
        };
        let mut values = BTreeMap::new();
        for h in sample {
            values.insert(h.clone(), get(h)?);
            values.insert(group.mul(t, h), get(h)?);
        }
        let keys: Vec<G::Elem> = values.keys().cloned().collect();
        let mut worst = Q::zero();
        let mut pairs = 0;
        for a in &keys {
            for b in &keys {
                let ab = group.mul(a, b);
                if let Some(v) = fbar_at(&ab) {
                    pairs += 1;
                    worst = worst.max((v - values[a] - values[b]).abs());
                    values.entry(ab).or_insert(v);
                }
            }
        }
        let bound = Q::from_integer(2) * f_defect + f_t_squared;
        let mut fbar = Quasicharacter::from_table(values, |a, b| group.mul(a, b));
        fbar.measured_defect = fbar.measured_defect.max(worst);
        Ok(Index2Extension::Extended {
            bound_holds: fbar.measured_defect <= bound,
            fbar,
            pairs_checked: pairs,
            f_defect,
            f_t_squared,
            bound,
        })
    } else {
        let mut gap = Q::zero();
        let mut checked = 0;
        for (h, v) in &f_t {
            if let Some(w) = f_t.get(&conj(h)) {
                checked += 1;
                gap = gap.max((w + v).abs());
            }
        }
        if checked == 0 {
            return Err(Error::input("no conjugate pairs in the table to check antisymmetry"));
        }
        Ok(Index2Extension::Twisted {
            f_t: Quasicharacter::from_table(f_t, |a, b| group.mul(a, b)),
            antisymmetry_checked: checked,
            antisymmetric: gap.is_zero(),
            antisymmetry_gap: gap,
        })
    }
}

pub struct ReflectionAction<G: Group> {
    pub table: QuasiActionTable<G, RealLine>,
    pub f_t_defect: Q,
}

/// `A(h, x) = f_t(h) + x` and `A(th, x) = -f_t(h) - x`, each an isometry of
/// the line; the claimed constants are `K = 1`, `C = 2 ‖δf_t‖`.
pub fn reflection_action<G>(
    group: G,
    in_h: impl Fn(&G::Elem) -> bool + Clone + 'static,
    f_t: BTreeMap<G::Elem, Q>,
    t: G::Elem,
) -> Result<ReflectionAction<G>>
where
    G: Group + Clone + 'static,
{
    let tinv = group.inv(&t);
    let conj = |h: &G::Elem| group.mul(&tinv, &group.mul(h, &t));
    let mut checked = 0;
    for (h, v) in &f_t {
        if !in_h(h) {
            return Err(Error::input(format!("{} is not in H", group.describe(h))));
        }
        if let Some(w) = f_t.get(&conj(h)) {
            checked += 1;
            if w + v != Q::zero() {
                return Err(Error::contract(format!(
                    "antisymmetry fails at {}: f_t = {v}, conjugate has {w}",
                    group.describe(h)
                )));
            }
        }
    }
    if checked == 0 {
        return Err(Error::input("no conjugate pairs in the table to check antisymmetry"));
    }
    let pairs = closed_pairs(&f_t, |a, b| group.mul(a, b));
    let f_t_defect = defect(&f_t, &pairs, |a, b| group.mul(a, b))?.defect;
    let g2 = group.clone();
    let action = move |g: &G::Elem, x: &Q| {
        if in_h(g) {
            f_t.get(g).map(|v| v + x)
        } else {
            let h = g2.mul(&g2.inv(&t), g);
            f_t.get(&h).map(|v| -v - x)
        }
    };
    let c = Q::from_integer(2) * f_t_defect;
    let table = QuasiActionTable::new(group, RealLine, action, Q::one(), c)?;
    Ok(ReflectionAction { table, f_t_defect })
}
