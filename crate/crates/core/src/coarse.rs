//! Quasi-isometries and quasi-actions sampled on finite data: axiom checks,
//! orbit-growth classification of elements, ball generating sets and the
//! Cayley graphs they define, and word metrics on the integers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Group, Word};
use crate::metric::MetricGraph;
use crate::rational::{least_squares_slope, Q};

pub trait MetricSpace {
    type Point: Clone + Eq + Hash + Ord + Debug;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> Q;
    fn describe(&self, p: &Self::Point) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RealLine;

impl MetricSpace for RealLine {
    type Point = Q;

    fn dist(&self, a: &Q, b: &Q) -> Q {
        (a - b).abs()
    }

    fn describe(&self, p: &Q) -> String {
        p.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct GraphSpace {
    pub graph: Arc<MetricGraph>,
}

impl GraphSpace {
    pub fn new(graph: Arc<MetricGraph>) -> Self {
        GraphSpace { graph }
    }
}

impl MetricSpace for GraphSpace {
    type Point = usize;

    fn dist(&self, a: &usize, b: &usize) -> Q {
        self.graph.to_q(self.graph.units(*a, *b))
    }

    fn describe(&self, p: &usize) -> String {
        p.to_string()
    }
}

type ActionFn<G, X> =
    Box<dyn Fn(&<G as Group>::Elem, &<X as MetricSpace>::Point) -> Option<<X as MetricSpace>::Point>>;

/// A map `A: G × X → X` known on sampled data, with claimed constants.
pub struct QuasiActionTable<G: Group, X: MetricSpace> {
    pub group: G,
    pub space: X,
    pub elements: Vec<Word>,
    pub points: Vec<X::Point>,
    pub claimed_k: Q,
    pub claimed_c: Q,
    action: ActionFn<G, X>,
}

impl<G: Group, X: MetricSpace> QuasiActionTable<G, X> {
    pub fn new(
        group: G,
        space: X,
        action: impl Fn(&G::Elem, &X::Point) -> Option<X::Point> + 'static,
        claimed_k: Q,
        claimed_c: Q,
    ) -> Result<Self> {
        if claimed_k < Q::one() || claimed_c.is_negative() {
            return Err(Error::input("claimed constants need K >= 1 and C >= 0"));
        }
        Ok(QuasiActionTable {
            group,
            space,
            elements: Vec::new(),
            points: Vec::new(),
            claimed_k,
            claimed_c,
            action: Box::new(action),
        })
    }

    pub fn with_sample(mut self, elements: Vec<Word>, points: Vec<X::Point>) -> Self {
        self.elements = elements;
        self.points = points;
        self
    }

    pub fn try_apply(&self, g: &G::Elem, x: &X::Point) -> Option<X::Point> {
        (self.action)(g, x)
    }

    pub fn apply(&self, g: &G::Elem, x: &X::Point) -> Result<X::Point> {
        (self.action)(g, x).ok_or_else(|| {
            Error::input(format!(
                "action undefined at ({}, {})",
                self.group.describe(g),
                self.space.describe(x)
            ))
        })
    }

    pub fn apply_word(&self, w: &Word, x: &X::Point) -> Result<X::Point> {
        self.apply(&self.group.eval(w), x)
    }

    pub fn displacement(&self, g: &G::Elem, x: &X::Point) -> Result<Q> {
        Ok(self.space.dist(x, &self.apply(g, x)?))
    }

    pub fn word_name(&self, w: &Word) -> String {
        w.format(self.group.names())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QiReport {
    pub ok: bool,
    pub pairs_checked: usize,
    /// Pair needing the largest additive constant at the claimed `K`.
    pub worst_pair: Option<(usize, usize)>,
    pub first_violation: Option<(usize, usize)>,
    pub c_at_claimed_k: Q,
    /// `None` when no finite `K` works with the claimed `C`.
    pub k_at_claimed_c: Option<Q>,
    /// Largest distance from a target point to the image; `None` without targets.
    pub onto_gap: Option<Q>,
    pub onto_ok: Option<bool>,
}

/// Additive constant needed for one pair: `max(d' - K d, d/K - d')`.
fn sandwich_excess(d: Q, d_img: Q, k: Q) -> Q {
    (d_img - k * d).max(d / k - d_img)
}

/// Checks `d/K - C <= d(f x, f y) <= K d + C` on every sampled pair, and
/// `C`-coarse surjectivity onto `target` when given.
pub fn verify_quasi_isometry<X: MetricSpace, Y: MetricSpace>(
    domain_space: &X,
    target_space: &Y,
    map: impl Fn(&X::Point) -> Option<Y::Point>,
    domain: &[X::Point],
    target: Option<&[Y::Point]>,
    k: Q,
    c: Q,
) -> Result<QiReport> {
    if domain.is_empty() {
        return Err(Error::input("empty sample"));
    }
    if k < Q::one() || c.is_negative() {
        return Err(Error::input("need K >= 1 and C >= 0"));
    }
    let images: Vec<Y::Point> = domain
        .iter()
        .map(|x| map(x).ok_or_else(|| Error::input(format!("map undefined at {}", domain_space.describe(x)))))
        .collect::<Result<_>>()?;
    let mut worst = Q::zero();
    let mut worst_pair = None;
    let mut first_violation = None;
    let mut k_fit = Some(Q::one());
    let mut pairs = 0;
    for i in 0..domain.len() {
        for j in i + 1..domain.len() {
            pairs += 1;
            let d = domain_space.dist(&domain[i], &domain[j]);
            let di = target_space.dist(&images[i], &images[j]);
            let e = sandwich_excess(d, di, k);
            if worst_pair.is_none() || e > worst {
                worst = e;
                worst_pair = Some((i, j));
            }
            if e > c && first_violation.is_none() {
                first_violation = Some((i, j));
            }
            if d.is_zero() {
                continue;
            }
            if let Some(kf) = k_fit.as_mut() {
                let up = (di - c) / d;
                if up > *kf {
                    *kf = up;
                }
                if (di + c).is_zero() {
                    k_fit = None;
                } else {
                    let lo = d / (di + c);
                    if lo > *kf {
                        *kf = lo;
                    }
                }
            }
        }
    }
    let (onto_gap, onto_ok) = match target {
        Some(ts) => {
            let gap = ts
                .iter()
                .map(|y| {
                    images
                        .iter()
                        .map(|fx| target_space.dist(fx, y))
                        .min()
                        .unwrap()
                })
                .max()
                .unwrap_or_else(Q::zero);
            (Some(gap), Some(gap <= c))
        }
        None => (None, None),
    };
    Ok(QiReport {
        ok: first_violation.is_none() && onto_ok.unwrap_or(true),
        pairs_checked: pairs,
        worst_pair,
        first_violation,
        c_at_claimed_k: worst.max(Q::zero()),
        k_at_claimed_c: k_fit,
        onto_gap,
        onto_ok,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QaReport {
    pub ok: bool,
    /// Additive constant each sampled `A(g, -)` needs at the claimed `K`.
    pub qi_constant: Q,
    pub qi_witness: Option<(usize, usize, usize)>,
    /// `max d(g(hx), (gh)x)` over sampled triples.
    pub defect: Q,
    pub defect_witness: Option<(usize, usize, usize)>,
    pub triples_checked: usize,
}

/// Checks both quasi-action axioms on all sampled elements and points.
pub fn verify_quasi_action<G: Group, X: MetricSpace>(t: &QuasiActionTable<G, X>) -> Result<QaReport> {
    if t.elements.is_empty() || t.points.is_empty() {
        return Err(Error::input("quasi-action table has an empty sample"));
    }
    let elems: Vec<G::Elem> = t.elements.iter().map(|w| t.group.eval(w)).collect();
    let mut qi_constant = Q::zero();
    let mut qi_witness = None;
    let mut images = Vec::with_capacity(elems.len());
    for (gi, g) in elems.iter().enumerate() {
        let img: Vec<X::Point> = t
            .points
            .iter()
            .map(|x| t.apply(g, x))
            .collect::<Result<_>>()?;
        for i in 0..t.points.len() {
            for j in i + 1..t.points.len() {
                let d = t.space.dist(&t.points[i], &t.points[j]);
                let di = t.space.dist(&img[i], &img[j]);
                let e = sandwich_excess(d, di, t.claimed_k);
                if e > qi_constant {
                    qi_constant = e;
                    qi_witness = Some((gi, i, j));
                }
            }
        }
        images.push(img);
    }
    let mut defect = Q::zero();
    let mut defect_witness = None;
    let mut triples = 0;
    for (gi, g) in elems.iter().enumerate() {
        for (hi, h) in elems.iter().enumerate() {
            let gh = t.group.mul(g, h);
            for (xi, x) in t.points.iter().enumerate() {
                triples += 1;
                let hx = &images[hi][xi];
                let lhs = t.apply(g, hx)?;
                let rhs = t.apply(&gh, x)?;
                let d = t.space.dist(&lhs, &rhs);
                if d > defect {
                    defect = d;
                    defect_witness = Some((gi, hi, xi));
                }
            }
        }
    }
    Ok(QaReport {
        ok: qi_constant <= t.claimed_c && defect <= t.claimed_c,
        qi_constant,
        qi_witness,
        defect,
        defect_witness,
        triples_checked: triples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Elliptic,
    Hyperbolic,
    Undecided,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Elliptic => "elliptic",
            ElementKind::Hyperbolic => "hyperbolic",
            ElementKind::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub kind: ElementKind,
    /// `d(x, g^N x) / N` for hyperbolic elements.
    pub rate: Option<Q>,
    /// `d(x, g^n x)` for `n = 0..=N`.
    pub displacements: Vec<Q>,
    pub max_first_half: Q,
    pub max_overall: Q,
    pub slope: Option<Q>,
    pub slope_threshold: Q,
}

/// Orbit-growth classification of `g` from `d(x, g^n x)`, `n <= N`.
///
/// Elliptic when the maximum over `n <= N` exceeds the maximum over
/// `n <= N/2` by at most the claimed `C` (a plateau); hyperbolic when the
/// least-squares slope over `[N/2, N]` exceeds `1/(2K)`; undecided otherwise.
pub fn classify_element<G: Group, X: MetricSpace>(
    t: &QuasiActionTable<G, X>,
    g: &Word,
    x: &X::Point,
    n_max: usize,
) -> Result<Classification> {
    if n_max < 2 {
        return Err(Error::input("need N >= 2 to classify"));
    }
    let ge = t.group.eval(g);
    let mut displacements = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let gn = t.group.pow(&ge, n as i64);
        displacements.push(t.space.dist(x, &t.apply(&gn, x)?));
    }
    let half = n_max / 2;
    let max_first_half = displacements[..=half].iter().copied().max().unwrap();
    let max_overall = displacements.iter().copied().max().unwrap();
    let xs: Vec<Q> = (half..=n_max).map(|n| Q::from_integer(n as i64)).collect();
    let slope = least_squares_slope(&xs, &displacements[half..]);
    let slope_threshold = Q::one() / (Q::from_integer(2) * t.claimed_k);
    let (kind, rate) = if max_overall <= max_first_half + t.claimed_c {
        (ElementKind::Elliptic, None)
    } else if slope.is_some_and(|s| s > slope_threshold) {
        (
            ElementKind::Hyperbolic,
            Some(displacements[n_max] / Q::from_integer(n_max as i64)),
        )
    } else {
        (ElementKind::Undecided, None)
    };
    Ok(Classification {
        kind,
        rate,
        displacements,
        max_first_half,
        max_overall,
        slope,
        slope_threshold,
    })
}

/// Elements of word length at most `depth` moving `x` by at most `r`,
/// deduplicated by realization, in enumeration order.
pub fn ball_generating_set<G: Group, X: MetricSpace>(
    t: &QuasiActionTable<G, X>,
    x: &X::Point,
    r: Q,
    depth: usize,
) -> Result<Vec<(G::Elem, Word)>> {
    if r.is_negative() {
        return Err(Error::input("radius must be nonnegative"));
    }
    let mut out = Vec::new();
    for (g, w) in enumerate_ball(&t.group, depth) {
        if t.displacement(&g, x)? <= r {
            out.push((g, w));
        }
    }
    Ok(out)
}

/// Embedding constants: `D = K sup_{s in S0^±} d(x, sx) + 2C` and the
/// threshold `2KD + KC` above which `R` gives an embedding.
pub fn embedding_constants<G: Group, X: MetricSpace>(t: &QuasiActionTable<G, X>, x: &X::Point) -> Result<(Q, Q)> {
    let mut sup = Q::zero();
    for s in t.group.generators() {
        sup = sup.max(t.displacement(s, x)?);
        sup = sup.max(t.displacement(&t.group.inv(s), x)?);
    }
    let d = t.claimed_k * sup + Q::from_integer(2) * t.claimed_c;
    let threshold = Q::from_integer(2) * t.claimed_k * d + t.claimed_k * t.claimed_c;
    Ok((d, threshold))
}

#[derive(Debug, Clone)]
pub struct CayleyBall<G: Group> {
    pub elements: Vec<G::Elem>,
    /// Word length of each vertex over the (symmetrized) set `S`.
    pub s_length: Vec<usize>,
    pub generating_set: Vec<G::Elem>,
    pub depth: usize,
    pub graph: MetricGraph,
}

fn symmetrize<G: Group>(group: &G, s: &[G::Elem]) -> Vec<G::Elem> {
    let id = group.identity();
    let mut out: Vec<G::Elem> = s
        .iter()
        .flat_map(|x| [x.clone(), group.inv(x)])
        .filter(|x| *x != id)
        .collect();
    out.sort();
    out.dedup();
    out
}

fn edges_within<G: Group>(group: &G, elements: &[G::Elem], s: &[G::Elem]) -> Vec<(usize, usize)> {
    let index: HashMap<&G::Elem, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut edges = HashSet::new();
    for (i, g) in elements.iter().enumerate() {
        for x in s {
            if let Some(&j) = index.get(&group.mul(g, x)) {
                if i != j {
                    edges.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    let mut edges: Vec<_> = edges.into_iter().collect();
    edges.sort_unstable();
    edges
}

/// Ball of radius `depth` about the identity in `Γ(G, S ∪ S⁻¹)`, with the
/// induced graph structure.
pub fn build_cayley_ball<G: Group>(group: &G, s: &[G::Elem], depth: usize) -> Result<CayleyBall<G>> {
    let sym = symmetrize(group, s);
    let mut elements = vec![group.identity()];
    let mut s_length = vec![0];
    let mut seen: HashSet<G::Elem> = HashSet::from([group.identity()]);
    let mut frontier = VecDeque::from([0usize]);
    while let Some(i) = frontier.pop_front() {
        if s_length[i] == depth {
            continue;
        }
        for x in &sym {
            let next = group.mul(&elements[i], x);
            if seen.insert(next.clone()) {
                elements.push(next);
                s_length.push(s_length[i] + 1);
                frontier.push_back(elements.len() - 1);
            }
        }
    }
    let edges = edges_within(group, &elements, &sym);
    let graph = MetricGraph::unit(elements.len(), &edges)?;
    Ok(CayleyBall {
        elements,
        s_length,
        generating_set: sym,
        depth,
        graph,
    })
}

/// `Γ(G, S)` restricted to the ball of radius `base_depth` in the base
/// generators. Diameters of these windows are what stabilize when
/// `Γ(G, S)` has finite diameter.
pub fn cayley_window<G: Group>(group: &G, s: &[G::Elem], base_depth: usize) -> Result<CayleyBall<G>> {
    let sym = symmetrize(group, s);
    let ball = enumerate_ball(group, base_depth);
    let elements: Vec<G::Elem> = ball.iter().map(|(e, _)| e.clone()).collect();
    let s_length = ball.iter().map(|(_, w)| w.len() as usize).collect();
    let edges = edges_within(group, &elements, &sym);
    let graph = MetricGraph::unit(elements.len(), &edges).map_err(|_| {
        Error::Degenerate(format!(
            "S does not connect the word ball of radius {base_depth}"
        ))
    })?;
    Ok(CayleyBall {
        elements,
        s_length,
        generating_set: sym,
        depth: base_depth,
        graph,
    })
}

pub fn graph_diameter(g: &MetricGraph) -> Q {
    g.to_q(*g.matrix().iter().max().unwrap_or(&0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbeddingReport {
    pub pairs_checked: usize,
    pub upper_factor: Q,
    pub d: Q,
    pub upper_violations: usize,
    pub lower_violations: usize,
    /// `D = 0` makes the lower bound vacuous.
    pub lower_degenerate: bool,
    /// Minimum over pairs of `(KR + 2C) d(p,q) - d(πp, πq)`.
    pub upper_slack: Option<Q>,
    /// Minimum over pairs of `d(πp, πq) - (D d(p,q) - D)`.
    pub lower_slack: Option<Q>,
    pub first_violation: Option<(usize, usize)>,
}

/// Checks `D d(p,q) - D <= d(px, qx) <= (KR + 2C) d(p,q)` for all pairs of
/// the inner half of the ball, where ball distances equal `Γ(G,S)` distances.
pub fn verify_embedding_bounds<G: Group, X: MetricSpace>(
    ball: &CayleyBall<G>,
    t: &QuasiActionTable<G, X>,
    x: &X::Point,
    r: Q,
    d: Q,
) -> Result<EmbeddingReport> {
    let inner: Vec<usize> = (0..ball.elements.len())
        .filter(|&i| 2 * ball.s_length[i] <= ball.depth)
        .collect();
    let images: Vec<X::Point> = inner
        .iter()
        .map(|&i| t.apply(&ball.elements[i], x))
        .collect::<Result<_>>()?;
    let upper_factor = t.claimed_k * r + Q::from_integer(2) * t.claimed_c;
    let mut report = EmbeddingReport {
        pairs_checked: 0,
        upper_factor,
        d,
        upper_violations: 0,
        lower_violations: 0,
        lower_degenerate: d.is_zero(),
        upper_slack: None,
        lower_slack: None,
        first_violation: None,
    };
    for a in 0..inner.len() {
        for b in a + 1..inner.len() {
            report.pairs_checked += 1;
            let dg = ball.graph.distance(inner[a], inner[b])?;
            let dt = t.space.dist(&images[a], &images[b]);
            let up = upper_factor * dg - dt;
            let lo = dt - (d * dg - d);
            if up.is_negative() {
                report.upper_violations += 1;
                report.first_violation.get_or_insert((inner[a], inner[b]));
            }
            if lo.is_negative() {
                report.lower_violations += 1;
                report.first_violation.get_or_insert((inner[a], inner[b]));
            }
            report.upper_slack = Some(report.upper_slack.map_or(up, |s: Q| s.min(up)));
            report.lower_slack = Some(report.lower_slack.map_or(lo, |s: Q| s.min(lo)));
        }
    }
    Ok(report)
}

/// Word metric `|n|_S` on an interval of the integers.
#[derive(Debug, Clone)]
pub struct ZWordMetric {
    s: Vec<i64>,
    window: i64,
    offset: i64,
    dist: Vec<u32>,
}

impl ZWordMetric {
    /// Breadth-first search from 0 on `[-B, B]`, `B = max(window·max|s|, window + max|s|)`,
    /// wide enough that every `|n| <= window` has a geodesic inside it.
    pub fn new(s: &[i64], window: i64) -> Result<Self> {
        let mut s: Vec<i64> = s.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() || s.contains(&0) {
            return Err(Error::input("S must be nonempty and exclude 0"));
        }
        if s.iter().any(|x| !s.contains(&-x)) {
            return Err(Error::input("S must be symmetric"));
        }
        if s.iter().fold(0i64, |g, x| g.gcd(x)) != 1 {
            return Err(Error::input("S does not generate Z (gcd != 1)"));
        }
        if window < 0 {
            return Err(Error::input("window must be nonnegative"));
        }
        let m = *s.iter().max().unwrap();
        let bound = (window * m).max(window + m);
        let size = (2 * bound + 1) as usize;
        let mut dist = vec![u32::MAX; size];
        dist[bound as usize] = 0;
        let mut queue = VecDeque::from([bound]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize];
            for &x in &s {
                let v = u + x;
                if (0..size as i64).contains(&v) && dist[v as usize] == u32::MAX {
                    dist[v as usize] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        Ok(ZWordMetric {
            s,
            window,
            offset: bound,
            dist,
        })
    }

    pub fn generators(&self) -> &[i64] {
        &self.s
    }

    pub fn norm(&self, n: i64) -> Result<u32> {
        if n.abs() > self.window {
            return Err(Error::input(format!("|{n}| exceeds the window {}", self.window)));
        }
        Ok(self.dist[(n + self.offset) as usize])
    }

    /// Four-point constant of the Cayley graph on `[-w, w]`, with the base
    /// point fixed at 0 by translation invariance.
    pub fn four_point_delta(&self, w: i64) -> Result<Q> {
        if 2 * w > self.window {
            return Err(Error::input("Δ window exceeds the metric window"));
        }
        let d = |a: i64, b: i64| self.dist[(a - b + self.offset) as usize] as i64;
        let mut best = 0i64;
        for x in -w..=w {
            for y in x + 1..=w {
                let dxy = d(x, y);
                for z in y + 1..=w {
                    let s1 = dxy + d(z, 0);
                    let s2 = d(x, z) + d(y, 0);
                    let s3 = d(y, z) + d(x, 0);
                    let hi = s1.max(s2).max(s3);
                    let lo = s1.min(s2).min(s3);
                    best = best.max(2 * hi + lo - s1 - s2 - s3);
                }
            }
        }
        Ok(Q::new(best, 2))
    }
}

/// Every symmetric `S ⊆ [-m, m] \ {0}` generating `Z`, in subset order.
pub fn propz_sets(m: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << m) {
        let pos: Vec<i64> = (1..=m).filter(|i| mask & (1 << (i - 1)) != 0).collect();
        if pos.iter().fold(0i64, |g, x| g.gcd(x)) == 1 {
            let mut s: Vec<i64> = pos.iter().map(|x| -x).chain(pos.iter().copied()).collect();
            s.sort_unstable();
            out.push(s);
        }
    }
    out
}

pub fn z_word_metric(s: &[i64], n: i64, window: i64) -> Result<u32> {
    ZWordMetric::new(s, window.max(n.abs()))?.norm(n)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropZReport {
    pub generators: Vec<i64>,
    pub window: i64,
    pub delta_window: i64,
    pub delta_hat: Q,
    pub n: Option<i64>,
    pub n_norm: Option<u32>,
    pub precondition_met: bool,
    /// `D_k = |kN|_S` for `k = 1..=k_max`.
    pub d_k: Vec<u32>,
    pub claim_holds: bool,
    pub first_failure: Option<usize>,
    pub generator_bound: Option<Q>,
    pub max_generator: i64,
    pub bound_holds: bool,
}

/// Checks `D_k >= k(|N|_S - 4Δ̂)` for `k <= k_max` and the resulting bound
/// `max|s| <= N / (|N|_S - 4Δ̂)`, with `Δ̂` measured on `[-delta_window, delta_window]`.
/// Without an explicit `N`, takes the least `N > 0` with `|N|_S >= max(10Δ̂, 1)`.
pub fn verify_propz_claim(s: &[i64], n: Option<i64>, k_max: usize, window: i64, delta_window: i64) -> Result<PropZReport> {
    let metric = ZWordMetric::new(s, window)?;
    let delta_hat = metric.four_point_delta(delta_window)?;
    let need = (Q::from_integer(10) * delta_hat).max(Q::one());
    let n = match n {
        Some(n) if n <= 0 => return Err(Error::input("N must be positive")),
        Some(n) => Some(n),
        None => (1..=window).find(|&m| Q::from_integer(metric.norm(m).unwrap() as i64) >= need),
    };
    let mut report = PropZReport {
        generators: metric.generators().to_vec(),
        window,
        delta_window,
        delta_hat,
        n,
        n_norm: None,
        precondition_met: false,
        d_k: Vec::new(),
        claim_holds: false,
        first_failure: None,
        generator_bound: None,
        max_generator: *metric.generators().iter().max().unwrap(),
        bound_holds: false,
    };
    let Some(n) = n else { return Ok(report) };
    if n > window {
        return Err(Error::input("N exceeds the window"));
    }
    let nn = metric.norm(n)?;
    report.n_norm = Some(nn);
    report.precondition_met = Q::from_integer(nn as i64) >= need;
    if !report.precondition_met {
        return Ok(report);
    }
    let slope = Q::from_integer(nn as i64) - Q::from_integer(4) * delta_hat;
    report.claim_holds = true;
    for k in 1..=k_max as i64 {
        if (k * n).abs() > window {
            return Err(Error::input(format!("k N = {} exceeds the window {window}", k * n)));
        }
        let dk = metric.norm(k * n)?;
        report.d_k.push(dk);
        if Q::from_integer(dk as i64) < Q::from_integer(k) * slope {
            report.claim_holds = false;
            report.first_failure.get_or_insert(k as usize);
        }
    }
    if slope.is_positive() {
        let bound = Q::from_integer(n) / slope;
        report.generator_bound = Some(bound);
        report.bound_holds = Q::from_integer(report.max_generator) <= bound;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::FreeAbelian;
    use crate::rational::q;

    fn shift_line() -> QuasiActionTable<FreeAbelian, RealLine> {
        QuasiActionTable::new(
            FreeAbelian::new(1),
            RealLine,
            |g: &Vec<i64>, x: &Q| Some(x + Q::from_integer(g[0])),
            q(1),
            q(0),
        )
        .unwrap()
    }

    #[test]
    fn qi_examples() {
        let pts: Vec<Q> = (0..=20).map(q).collect();
        let id = verify_quasi_isometry(&RealLine, &RealLine, |x: &Q| Some(*x), &pts, Some(&pts), q(1), q(0)).unwrap();
        assert!(id.ok);
        assert_eq!(id.c_at_claimed_k, q(0));
        assert_eq!(id.k_at_claimed_c, Some(q(1)));
        let dbl = verify_quasi_isometry(&RealLine, &RealLine, |x: &Q| Some(x * q(2)), &pts, None, q(2), q(0)).unwrap();
        assert!(dbl.ok);
        let sq = verify_quasi_isometry(&RealLine, &RealLine, |x: &Q| Some(x * x), &pts, None, q(5), q(10)).unwrap();
        assert!(!sq.ok);
        assert!(sq.first_violation.is_some());
        assert!(verify_quasi_isometry(&RealLine, &RealLine, |x: &Q| Some(*x), &[], None, q(1), q(0)).is_err());
    }

    #[test]
    fn isometric_action_has_zero_defect() {
        let t = shift_line().with_sample(
            (-3..=3).map(|e| Word::power(0, e)).collect(),
            (-5..=5).map(q).collect(),
        );
        let r = verify_quasi_action(&t).unwrap();
        assert!(r.ok);
        assert_eq!(r.defect, q(0));
        assert_eq!(r.qi_constant, q(0));
    }

    #[test]
    fn shift_is_hyperbolic_and_identity_elliptic() {
        let t = shift_line();
        let c = classify_element(&t, &Word::power(0, 2), &q(0), 64).unwrap();
        assert_eq!(c.kind, ElementKind::Hyperbolic);
        assert_eq!(c.rate, Some(q(2)));
        let c = classify_element(&t, &Word::identity(), &q(0), 64).unwrap();
        assert_eq!(c.kind, ElementKind::Elliptic);
    }

    #[test]
    fn ball_generating_set_of_a_shift() {
        let t = shift_line();
        let s = ball_generating_set(&t, &q(0), q(3), 5).unwrap();
        let mut vals: Vec<i64> = s.iter().map(|(g, _)| g[0]).collect();
        vals.sort_unstable();
        assert_eq!(vals, (-3..=3).collect::<Vec<_>>());
        let s0 = ball_generating_set(&t, &q(0), q(0), 5).unwrap();
        assert_eq!(s0.len(), 1);
    }

    #[test]
    fn cayley_balls_of_z_and_z2() {
        let z = FreeAbelian::new(1);
        let b = build_cayley_ball(&z, &[vec![1]], 4).unwrap();
        assert_eq!(b.elements.len(), 9);
        assert_eq!(b.graph.edges().len(), 8);
        let b = build_cayley_ball(&z, &[vec![1], vec![4]], 3).unwrap();
        let four = b.elements.iter().position(|e| e[0] == 4).unwrap();
        let minus = b.elements.iter().position(|e| e[0] == -4).unwrap();
        assert_eq!(b.graph.distance(0, four).unwrap(), q(1));
        assert_eq!(b.graph.distance(0, minus).unwrap(), q(1));
        let z2 = FreeAbelian::new(2);
        let b = build_cayley_ball(&z2, &[vec![1, 0], vec![0, 1]], 2).unwrap();
        assert_eq!(b.elements.len(), 13);
    }

    #[test]
    fn embedding_bounds_for_translation() {
        let t = shift_line();
        let (d, thr) = embedding_constants(&t, &q(0)).unwrap();
        assert_eq!((d, thr), (q(1), q(2)));
        let s: Vec<Vec<i64>> = ball_generating_set(&t, &q(0), thr, 4).unwrap().into_iter().map(|p| p.0).collect();
        let ball = build_cayley_ball(&t.group, &s, 6).unwrap();
        let r = verify_embedding_bounds(&ball, &t, &q(0), thr, d).unwrap();
        assert_eq!(r.upper_violations + r.lower_violations, 0);
        assert!(r.pairs_checked > 0);
    }

    #[test]
    fn z_word_metric_examples() {
        assert_eq!(z_word_metric(&[-1, 1], 7, 10).unwrap(), 7);
        assert_eq!(z_word_metric(&[-4, -1, 1, 4], 7, 10).unwrap(), 3);
        assert_eq!(z_word_metric(&[-1, 1], 0, 10).unwrap(), 0);
        assert!(z_word_metric(&[-2, 2], 1, 10).is_err());
        assert!(z_word_metric(&[1, 2, -1], 1, 10).is_err());
    }

    #[test]
    fn propz_on_the_standard_line() {
        let r = verify_propz_claim(&[-1, 1], Some(10), 20, 1000, 16).unwrap();
        assert_eq!(r.delta_hat, q(0));
        assert!(r.precondition_met && r.claim_holds && r.bound_holds);
        assert_eq!(r.d_k[..3], [10, 20, 30]);
        assert_eq!(r.generator_bound, Some(q(1)));
    }
}
