//! Isometries of finite simplicial trees: classification, axes and ends,
//! ping-pong witnesses, and bushiness at a finite horizon.
//!
//! A finite tree has no hyperbolic automorphisms, so an isometry here is a
//! partial injective vertex map preserving distances on its domain. A shift
//! of a long path, or left multiplication on a ball in a Cayley tree, is then
//! hyperbolic in the usual sense wherever it is defined.

use std::collections::VecDeque;
use std::sync::Arc;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::metric::MetricGraph;
use crate::rational::Q;

#[derive(Debug, Clone)]
pub struct TreeIsometry {
    tree: Arc<MetricGraph>,
    map: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Elliptic,
    Hyperbolic,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Elliptic => "elliptic",
            Kind::Hyperbolic => "hyperbolic",
        }
    }
}

/// A finite-depth stand-in for a point of the boundary: the ray leaving
/// `base` through `direction`, followed out to the edge of the known tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndLabel {
    pub base: usize,
    pub direction: usize,
    pub horizon: usize,
    pub ray: Vec<usize>,
}

impl EndLabel {
    /// Two labels name the same end when their rays end in the same
    /// `merge_depth` vertices.
    pub fn same_end(&self, other: &EndLabel, merge_depth: usize) -> bool {
        let k = merge_depth.max(1).min(self.ray.len()).min(other.ray.len());
        self.ray[self.ray.len() - k..] == other.ray[other.ray.len() - k..]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxisData {
    pub kind: Kind,
    pub translation_length: Q,
    /// Ordered so that the isometry moves towards the end of the list.
    pub axis_vertices: Vec<usize>,
    pub fixed_set: Vec<usize>,
    /// Edges whose midpoint is fixed (inverted edges, or fixed edges).
    pub fixed_midpoints: Vec<(usize, usize)>,
    /// `[forward, backward]` for hyperbolic isometries.
    pub end_pair: Option<[EndLabel; 2]>,
}

impl TreeIsometry {
    pub fn new(tree: Arc<MetricGraph>, map: Vec<Option<usize>>) -> Result<Self> {
        if !tree.is_tree() {
            return Err(Error::input("target graph is not a tree"));
        }
        let n = tree.vertex_count();
        if map.len() != n {
            return Err(Error::input(format!("map has {} entries for {n} vertices", map.len())));
        }
        let mut hit = vec![false; n];
        for (v, img) in map.iter().enumerate() {
            if let Some(w) = *img {
                if w >= n {
                    return Err(Error::input(format!("{v} -> {w}: vertex out of range")));
                }
                if std::mem::replace(&mut hit[w], true) {
                    return Err(Error::contract(format!("not injective: {w} is hit twice")));
                }
            }
        }
        let iso = TreeIsometry { tree, map };
        iso.validate()?;
        Ok(iso)
    }

    pub fn total(tree: Arc<MetricGraph>, perm: &[usize]) -> Result<Self> {
        Self::new(tree, perm.iter().map(|&w| Some(w)).collect())
    }

    pub fn identity(tree: Arc<MetricGraph>) -> Self {
        let n = tree.vertex_count();
        TreeIsometry {
            tree,
            map: (0..n).map(Some).collect(),
        }
    }

    /// `perm <n>` then lines `v -> w`; unlisted vertices are outside the domain.
    pub fn parse(tree: Arc<MetricGraph>, text: &str) -> Result<Self> {
        let map = parse_perm(text)?;
        if map.len() != tree.vertex_count() {
            return Err(Error::input(format!(
                "map is on {} vertices but the tree has {}",
                map.len(),
                tree.vertex_count()
            )));
        }
        Self::new(tree, map)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("perm {}\n", self.map.len());
        for (v, w) in self.map.iter().enumerate() {
            if let Some(w) = w {
                s.push_str(&format!("{v} -> {w}\n"));
            }
        }
        s
    }

    fn validate(&self) -> Result<()> {
        let dom = self.domain();
        for (a, &u) in dom.iter().enumerate() {
            let fu = self.map[u].unwrap();
            for &v in &dom[a + 1..] {
                let fv = self.map[v].unwrap();
                if self.tree.units(u, v) != self.tree.units(fu, fv) {
                    return Err(Error::contract(format!(
                        "not an isometry: d({u},{v}) != d({fu},{fv})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn tree(&self) -> &Arc<MetricGraph> {
        &self.tree
    }

    pub fn apply(&self, v: usize) -> Option<usize> {
        self.map.get(v).copied().flatten()
    }

    pub fn map(&self) -> &[Option<usize>] {
        &self.map
    }

    pub fn domain(&self) -> Vec<usize> {
        (0..self.map.len()).filter(|&v| self.map[v].is_some()).collect()
    }

    pub fn is_total(&self) -> bool {
        self.map.iter().all(Option::is_some)
    }

    /// `self ∘ other`, defined where both steps are.
    pub fn compose(&self, other: &TreeIsometry) -> TreeIsometry {
        TreeIsometry {
            tree: self.tree.clone(),
            map: other.map.iter().map(|w| w.and_then(|w| self.map[w])).collect(),
        }
    }

    pub fn inverse(&self) -> TreeIsometry {
        let mut map = vec![None; self.map.len()];
        for (v, w) in self.map.iter().enumerate() {
            if let Some(w) = w {
                map[*w] = Some(v);
            }
        }
        TreeIsometry {
            tree: self.tree.clone(),
            map,
        }
    }

    pub fn pow(&self, n: i64) -> TreeIsometry {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = TreeIsometry::identity(self.tree.clone());
        for _ in 0..n.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Applies `self` `n` times (its inverse for negative `n`) to `v`.
    pub fn iterate(&self, v: usize, n: i64) -> Option<usize> {
        let inv;
        let f = if n < 0 {
            inv = self.inverse();
            &inv
        } else {
            self
        };
        let mut cur = v;
        for _ in 0..n.unsigned_abs() {
            cur = f.apply(cur)?;
        }
        Some(cur)
    }
}

pub fn parse_perm(text: &str) -> Result<Vec<Option<usize>>> {
    let mut map: Option<Vec<Option<usize>>> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match map.as_mut() {
            None => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 2 || toks[0] != "perm" {
                    return Err(Error::parse(line_no, "expected header `perm <n>`"));
                }
                let n = toks[1]
                    .parse::<usize>()
                    .map_err(|_| Error::parse(line_no, "bad vertex count"))?;
                map = Some(vec![None; n]);
            }
            Some(m) => {
                let (v, w) = line
                    .split_once("->")
                    .ok_or_else(|| Error::parse(line_no, "expected `v -> w`"))?;
                let id = |s: &str| -> Result<usize> {
                    s.trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|&x| x < m.len())
                        .ok_or_else(|| Error::parse(line_no, format!("bad vertex {:?}", s.trim())))
                };
                let (v, w) = (id(v)?, id(w)?);
                if m[v].replace(w).is_some() {
                    return Err(Error::parse(line_no, format!("vertex {v} mapped twice")));
                }
            }
        }
    }
    map.ok_or_else(|| Error::parse(1, "missing `perm <n>` header"))
}

/// Exact classification by minimal displacement over vertices and edge
/// midpoints (equivalently, over the barycentric subdivision).
///
/// On a partial map the minimum is cross-checked against
/// `max(0, d(x, f²x) - d(x, fx))`, which equals the translation length at
/// every point of a tree; a disagreement means the domain is too small to
/// decide and is reported as a contract error.
pub fn classify_isometry(f: &TreeIsometry) -> Result<AxisData> {
    let t = &f.tree;
    let dom = f.domain();
    if dom.is_empty() {
        return Err(Error::contract("isometry has an empty domain"));
    }
    // Quarter units: the distance between two edge midpoints is the mean of
    // the four endpoint distances.
    let mut best = u64::MAX;
    let mut disp = vec![u64::MAX; t.vertex_count()];
    for &v in &dom {
        let d = 4 * t.units(v, f.map[v].unwrap());
        disp[v] = d;
        best = best.min(d);
    }
    let mut fixed_midpoints = Vec::new();
    for &(u, v, _) in t.edges() {
        if let (Some(fu), Some(fv)) = (f.apply(u), f.apply(v)) {
            let same = (fu, fv) == (u, v) || (fu, fv) == (v, u);
            let d = if same {
                0
            } else {
                t.units(u, fu) + t.units(v, fu) + t.units(u, fv) + t.units(v, fv)
            };
            if d == 0 {
                fixed_midpoints.push((u.min(v), u.max(v)));
            }
            best = best.min(d);
        }
    }
    let mut two_step = 0u64;
    for &v in &dom {
        let fv = f.map[v].unwrap();
        if let Some(ffv) = f.apply(fv) {
            let a = t.units(v, ffv);
            let b = t.units(v, fv);
            two_step = two_step.max(a.saturating_sub(b));
        }
    }
    let two_step = 4 * two_step;
    let four = Q::from_integer(4);
    if best == 0 {
        if two_step != 0 {
            return Err(Error::contract("fixed point found but some orbit escapes"));
        }
        fixed_midpoints.sort_unstable();
        fixed_midpoints.dedup();
        return Ok(AxisData {
            kind: Kind::Elliptic,
            translation_length: Q::zero(),
            axis_vertices: Vec::new(),
            fixed_set: dom.iter().copied().filter(|&v| f.map[v] == Some(v)).collect(),
            fixed_midpoints,
            end_pair: None,
        });
    }
    if two_step != best {
        return Err(Error::contract(format!(
            "domain too small to classify: minimal displacement {} but two-step displacement {}",
            t.to_q(best) / four,
            t.to_q(two_step) / four
        )));
    }
    let mut axis: Vec<usize> = dom.iter().copied().filter(|&v| disp[v] == best).collect();
    // The axis is a segment: sort by distance from one of its extremities.
    let far = *axis.iter().max_by_key(|&&v| (t.units(axis[0], v), v)).unwrap();
    axis.sort_by_key(|&v| (t.units(far, v), v));
    let last = *axis.last().unwrap();
    let fa = f.map[axis[0]].unwrap();
    if t.units(last, fa) >= t.units(last, axis[0]) {
        axis.reverse();
    }
    let ends = end_pair(f, &axis);
    Ok(AxisData {
        kind: Kind::Hyperbolic,
        translation_length: t.to_q(best) / four,
        axis_vertices: axis,
        fixed_set: Vec::new(),
        fixed_midpoints: Vec::new(),
        end_pair: Some(ends),
    })
}

/// Extends the axis segment through the known tree: forward by following
/// images of the last axis vertex, backward by preimages of the first.
fn end_pair(f: &TreeIsometry, axis: &[usize]) -> [EndLabel; 2] {
    let t = &f.tree;
    let finv = f.inverse();
    let ray_from = |start: &[usize], g: &TreeIsometry| -> Vec<usize> {
        let mut ray = start.to_vec();
        let mut cur = *ray.last().unwrap();
        while let Some(next) = g.apply(cur) {
            let seg = t.geodesic(cur, next).expect("valid vertices");
            if seg.len() < 2 || ray.contains(&next) {
                break;
            }
            ray.extend_from_slice(&seg[1..]);
            cur = next;
        }
        ray
    };
    let forward = ray_from(axis, f);
    let mut rev = axis.to_vec();
    rev.reverse();
    let backward = ray_from(&rev, &finv);
    let label = |ray: Vec<usize>| EndLabel {
        base: ray[0],
        direction: *ray.get(1).unwrap_or(&ray[0]),
        horizon: ray.len() - 1,
        ray,
    };
    [label(forward), label(backward)]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PingPongSet {
    pub name: String,
    /// Vertices whose projection to the generator's axis lies strictly beyond
    /// `threshold` in the given direction.
    pub axis_of: String,
    pub threshold: usize,
    pub forward: bool,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PingPong {
    Witness {
        power: u64,
        sets: Vec<PingPongSet>,
        base_point: usize,
        checked_word_length: usize,
        words_checked: u64,
    },
    Refusal {
        reason: String,
        shared_end: EndLabel,
    },
}

fn project_to_axis(t: &MetricGraph, axis: &[usize], v: usize) -> usize {
    (0..axis.len())
        .min_by_key(|&i| (t.units(v, axis[i]), i))
        .unwrap()
}

/// Looks for a ping-pong configuration for `a^N, b^N` and checks that no
/// nontrivial reduced word of length at most `word_length_bound` fixes the
/// base point. The result is a bounded verification, not a proof of freeness.
pub fn free_subgroup_witness(
    a: &TreeIsometry,
    b: &TreeIsometry,
    word_length_bound: usize,
    merge_depth: usize,
) -> Result<PingPong> {
    let ca = classify_isometry(a)?;
    let cb = classify_isometry(b)?;
    if ca.kind != Kind::Hyperbolic || cb.kind != Kind::Hyperbolic {
        return Err(Error::contract("both isometries must be hyperbolic"));
    }
    let ea = ca.end_pair.as_ref().unwrap();
    let eb = cb.end_pair.as_ref().unwrap();
    for x in ea {
        for y in eb {
            if x.same_end(y, merge_depth) {
                return Ok(PingPong::Refusal {
                    reason: "the axes share an end".into(),
                    shared_end: x.clone(),
                });
            }
        }
    }
    let t = a.tree();
    // The overlap of each axis with the other's projection.
    let span = |axis: &[usize], other: &[usize]| -> (usize, usize) {
        let idx: Vec<usize> = other.iter().map(|&v| project_to_axis(t, axis, v)).collect();
        (*idx.iter().min().unwrap(), *idx.iter().max().unwrap())
    };
    let ax = &ca.axis_vertices;
    let bx = &cb.axis_vertices;
    let (sa, ta) = span(ax, bx);
    let (sb, tb) = span(bx, ax);
    let overlap_a = t.units(ax[sa], ax[ta]);
    let overlap_b = t.units(bx[sb], bx[tb]);
    let la = t.units(ax[0], a.apply(ax[0]).unwrap());
    let lb = t.units(bx[0], b.apply(bx[0]).unwrap());
    let mut power = 1u64;
    while power * la <= overlap_a || power * lb <= overlap_b {
        power += 1;
    }
    let count = |axis: &[usize], thr: usize, fwd: bool| {
        (0..t.vertex_count())
            .filter(|&v| {
                let p = project_to_axis(t, axis, v);
                if fwd {
                    p > thr
                } else {
                    p < thr
                }
            })
            .count()
    };
    let sets = vec![
        PingPongSet { name: "a+".into(), axis_of: "a".into(), threshold: ta, forward: true, size: count(ax, ta, true) },
        PingPongSet { name: "a-".into(), axis_of: "a".into(), threshold: sa, forward: false, size: count(ax, sa, false) },
        PingPongSet { name: "b+".into(), axis_of: "b".into(), threshold: tb, forward: true, size: count(bx, tb, true) },
        PingPongSet { name: "b-".into(), axis_of: "b".into(), threshold: sb, forward: false, size: count(bx, sb, false) },
    ];
    let base = ax[sa];
    let gens = [a.pow(power as i64), a.pow(-(power as i64)), b.pow(power as i64), b.pow(-(power as i64))];
    let mut words_checked = 0u64;
    // Depth-first over reduced words; letter k and k^1 are inverse pairs.
    let mut stack: Vec<(usize, usize, usize)> = vec![(base, usize::MAX, 0)];
    while let Some((point, last, len)) = stack.pop() {
        if len == word_length_bound {
            continue;
        }
        for (k, g) in gens.iter().enumerate().rev() {
            if last != usize::MAX && k == (last ^ 1) {
                continue;
            }
            let next = g.apply(point).ok_or_else(|| {
                Error::input(format!(
                    "tree too small: a word of length {} leaves the known ball",
                    len + 1
                ))
            })?;
            words_checked += 1;
            if next == base {
                return Err(Error::contract(format!(
                    "a reduced word of length {} fixes the base point; not a ping-pong pair",
                    len + 1
                )));
            }
            stack.push((next, k, len + 1));
        }
    }
    Ok(PingPong::Witness {
        power,
        sets,
        base_point: base,
        checked_word_length: word_length_bound,
        words_checked,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bushiness {
    NotBushy { components: usize },
    Bushy { components: usize },
    FinitelyBushy { min_components: usize, max_components: usize, points_checked: usize },
    CountablyBushyHint { components: usize },
}

impl Bushiness {
    pub fn label(&self) -> &'static str {
        match self {
            Bushiness::NotBushy { .. } => "not_bushy",
            Bushiness::Bushy { .. } => "bushy",
            Bushiness::FinitelyBushy { .. } => "finitely_bushy",
            Bushiness::CountablyBushyHint { .. } => "countably_bushy_hint",
        }
    }
}

/// Components of `{x : d(p, x) >= b}` that reach the horizon, the sphere of
/// radius `rho` around `center`.
pub fn horizon_components(tree: &MetricGraph, p: usize, b: u64, center_dist: &[u64], rho: u64) -> usize {
    let n = tree.vertex_count();
    let dp = tree.distances_from(p);
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([p]);
    parent[p] = p;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for w in tree.neighbors(u) {
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut reaches = vec![false; n];
    for &u in order.iter().rev() {
        if center_dist[u] == rho {
            reaches[u] = true;
        }
        if reaches[u] && u != p {
            reaches[parent[u]] = true;
        }
    }
    order
        .iter()
        .filter(|&&u| dp[u] >= b && (u == p || dp[parent[u]] < b) && reaches[u])
        .count()
}

/// Counting threshold above which a component count is read as unbounded
/// branching: at least the horizon depth, and more than the three required
/// for bushiness.
fn countable_hint(k: usize, rho_steps: u64) -> bool {
    k as u64 >= rho_steps.max(4)
}

/// Bushiness seen from `center` at the horizon `max_x d(center, x)`.
pub fn check_bushy(tree: &MetricGraph, b: Q, center: usize) -> Result<Bushiness> {
    if !tree.is_tree() {
        return Err(Error::input("graph is not a tree"));
    }
    if center >= tree.vertex_count() {
        return Err(Error::input(format!("unknown center vertex {center}")));
    }
    let (bu, dist, rho) = bushy_setup(tree, b, center)?;
    let k = horizon_components(tree, center, bu, &dist, rho);
    Ok(if k < 3 {
        Bushiness::NotBushy { components: k }
    } else if countable_hint(k, rho_steps(tree, rho)) {
        Bushiness::CountablyBushyHint { components: k }
    } else {
        Bushiness::Bushy { components: k }
    })
}

/// The same count at every vertex whose `b`-ball stays inside the horizon.
pub fn check_bushy_uniform(tree: &MetricGraph, b: Q, center: usize) -> Result<Bushiness> {
    if !tree.is_tree() {
        return Err(Error::input("graph is not a tree"));
    }
    if center >= tree.vertex_count() {
        return Err(Error::input(format!("unknown center vertex {center}")));
    }
    let (bu, dist, rho) = bushy_setup(tree, b, center)?;
    let interior: Vec<usize> = (0..tree.vertex_count())
        .filter(|&p| dist[p] + bu < rho)
        .collect();
    let counts: Vec<usize> = interior
        .iter()
        .map(|&p| horizon_components(tree, p, bu, &dist, rho))
        .collect();
    let lo = counts.iter().copied().min().unwrap_or(0);
    let hi = counts.iter().copied().max().unwrap_or(0);
    Ok(if lo < 3 {
        Bushiness::NotBushy { components: lo }
    } else if countable_hint(lo, rho_steps(tree, rho)) {
        Bushiness::CountablyBushyHint { components: lo }
    } else {
        Bushiness::FinitelyBushy {
            min_components: lo,
            max_components: hi,
            points_checked: counts.len(),
        }
    })
}

fn rho_steps(tree: &MetricGraph, rho: u64) -> u64 {
    // Horizon depth measured in edges of the shortest length.
    let shortest = tree
        .edges()
        .iter()
        .map(|e| e.2)
        .min()
        .map(|l| (l * Q::from_integer(tree.scale())).to_integer() as u64)
        .unwrap_or(1);
    rho / shortest.max(1)
}

fn bushy_setup(tree: &MetricGraph, b: Q, center: usize) -> Result<(u64, Vec<u64>, u64)> {
    if b < Q::zero() {
        return Err(Error::input("bushiness constant must be nonnegative"));
    }
    let dist = tree.distances_from(center);
    let rho = *dist.iter().max().unwrap();
    let scaled = b * Q::from_integer(tree.scale());
    let bu = scaled.ceil().to_integer() as u64;
    if bu > rho {
        return Err(Error::input(format!(
            "B = {b} exceeds the radius {} of the tree around {center}",
            tree.to_q(rho)
        )));
    }
    Ok((bu, dist, rho))
}
