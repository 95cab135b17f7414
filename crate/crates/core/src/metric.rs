//! Finite metric graphs with exact rational edge lengths.
//!
//! Lengths are rescaled by the lcm of their denominators so that every
//! distance is an integer number of `unit`s; rationals only appear at the API
//! boundary.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};
use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{parse_rational, Q};

#[derive(Debug)]
pub struct MetricGraph {
    n: usize,
    edges: Vec<(usize, usize, Q)>,
    // Sorted by neighbour id so greedy geodesics are lexicographically least.
    adj: Vec<Vec<(usize, u64)>>,
    scale: i64,
    uniform: Option<u64>,
    matrix: OnceLock<Vec<u64>>,
}

impl Clone for MetricGraph {
    fn clone(&self) -> Self {
        MetricGraph::new(self.n, self.edges.clone()).expect("already validated")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tripod {
    pub leg_a: Q,
    pub leg_b: Q,
    pub leg_c: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourPointReport {
    pub delta: Q,
    /// Ordered `(x, y, z, w)` with `min{(x,z)_w, (y,z)_w} - (x,y)_w = delta`.
    pub witness: Option<[usize; 4]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripodWitness {
    pub triangle: [usize; 3],
    /// Two vertices on the chosen sides lying over the same tripod point.
    pub pair: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripodReport {
    pub delta: Q,
    pub witness: Option<TripodWitness>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottleneckReport {
    pub delta: Q,
    /// `(x, y, p)` with `p` on the chosen geodesic from `x` to `y`.
    pub witness: Option<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperbolicityReport {
    pub four_point: FourPointReport,
    pub tripod: TripodReport,
    pub bottleneck: BottleneckReport,
}

impl MetricGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, Q)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("graph has no vertices"));
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v, ref len) in &edges {
            if u >= n || v >= n {
                return Err(Error::input(format!("edge ({u},{v}) names a vertex >= {n}")));
            }
            if u == v {
                return Err(Error::input(format!("self-loop at vertex {u}")));
            }
            if !len.is_positive() {
                return Err(Error::input(format!("edge ({u},{v}) has non-positive length {len}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::input(format!("duplicate edge ({u},{v})")));
            }
        }
        let scale = edges.iter().fold(1i64, |acc, e| acc.lcm(e.2.denom()));
        let mut adj = vec![Vec::new(); n];
        let mut first_len = None;
        let mut uniform = true;
        for &(u, v, ref len) in &edges {
            let units = len.numer()
                .checked_mul(scale / len.denom())
                .filter(|x| *x > 0)
                .ok_or_else(|| Error::input("edge length overflows the common unit"))?
                as u64;
            match first_len {
                None => first_len = Some(units),
                Some(l) if l != units => uniform = false,
                _ => {}
            }
            adj[u].push((v, units));
            adj[v].push((u, units));
        }
        for row in &mut adj {
            row.sort_unstable();
        }
        let g = MetricGraph {
            n,
            edges,
            adj,
            scale,
            uniform: if uniform { first_len.or(Some(1)) } else { None },
            matrix: OnceLock::new(),
        };
        let reach = g.distances_from(0);
        if let Some(v) = reach.iter().position(|&d| d == u64::MAX) {
            return Err(Error::input(format!("graph is disconnected (vertex {v} unreachable from 0)")));
        }
        Ok(g)
    }

    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::new(n, edges.iter().map(|&(u, v)| (u, v, Q::one())).collect())
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::unit(n, &edges).expect("path is valid")
    }

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::input("a cycle needs at least 3 vertices"));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::unit(n, &edges)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if toks.len() != 2 || toks[0] != "graph" {
                        return Err(Error::parse(line_no, "expected header `graph <vertex_count>`"));
                    }
                    let count = toks[1]
                        .parse::<usize>()
                        .map_err(|_| Error::parse(line_no, format!("bad vertex count {:?}", toks[1])))?;
                    n = Some(count);
                }
                Some(count) => {
                    if toks.len() != 2 && toks.len() != 3 {
                        return Err(Error::parse(line_no, "expected `u v [length]`"));
                    }
                    let id = |s: &str| -> Result<usize> {
                        let v = s
                            .parse::<usize>()
                            .map_err(|_| Error::parse(line_no, format!("bad vertex id {s:?}")))?;
                        if v >= count {
                            return Err(Error::parse(line_no, format!("vertex {v} out of range 0..{count}")));
                        }
                        Ok(v)
                    };
                    let (u, v) = (id(toks[0])?, id(toks[1])?);
                    let len = match toks.get(2) {
                        Some(s) => parse_rational(s).map_err(|e| Error::parse(line_no, e.to_string()))?,
                        None => Q::one(),
                    };
                    edges.push((u, v, len));
                }
            }
        }
        let n = n.ok_or_else(|| Error::parse(1, "missing `graph <vertex_count>` header"))?;
        Self::new(n, edges)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("graph {}\n", self.n);
        for (u, v, len) in &self.edges {
            if len.is_one() {
                s.push_str(&format!("{u} {v}\n"));
            } else {
                s.push_str(&format!("{u} {v} {len}\n"));
            }
        }
        s
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, Q)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn edge_length(&self, u: usize, v: usize) -> Option<Q> {
        self.adj
            .get(u)?
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.to_q(self.adj[u][i].1))
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n
    }

    /// Splits every edge into `k` equal pieces. Original vertices keep their
    /// ids; the new ones follow in edge order.
    pub fn subdivide(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::input("subdivision factor must be at least 1"));
        }
        if k == 1 {
            return Ok(self.clone());
        }
        let mut edges = Vec::with_capacity(self.edges.len() * k);
        let mut next = self.n;
        for (u, v, len) in &self.edges {
            let piece = *len / Q::from_integer(k as i64);
            let mut prev = *u;
            for _ in 1..k {
                edges.push((prev, next, piece));
                prev = next;
                next += 1;
            }
            edges.push((prev, *v, piece));
        }
        Self::new(next, edges)
    }

    /// Denominator of the internal integer unit.
    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn to_q(&self, units: u64) -> Q {
        Q::new(units as i64, self.scale)
    }

    fn check(&self, v: usize) -> Result<()> {
        if v >= self.n {
            Err(Error::input(format!("unknown vertex {v} (graph has {})", self.n)))
        } else {
            Ok(())
        }
    }

    /// Single-source distances in units; `u64::MAX` marks unreachable vertices.
    pub fn distances_from(&self, src: usize) -> Vec<u64> {
        let mut dist = vec![u64::MAX; self.n];
        dist[src] = 0;
        if let Some(step) = self.uniform {
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                let du = dist[u] + step;
                for &(w, _) in &self.adj[u] {
                    if dist[w] == u64::MAX {
                        dist[w] = du;
                        queue.push_back(w);
                    }
                }
            }
            return dist;
        }
        let mut heap = BinaryHeap::from([Reverse((0u64, src))]);
        while let Some(Reverse((d, u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(w, len) in &self.adj[u] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Reverse((nd, w)));
                }
            }
        }
        dist
    }

    /// Flat row-major all-pairs distance matrix in units.
    pub fn matrix(&self) -> &[u64] {
        self.matrix.get_or_init(|| {
            let mut m = Vec::with_capacity(self.n * self.n);
            for s in 0..self.n {
                m.extend(self.distances_from(s));
            }
            m
        })
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.matrix()[u * self.n..(u + 1) * self.n]
    }

    pub fn units(&self, u: usize, v: usize) -> u64 {
        self.matrix()[u * self.n + v]
    }

    pub fn distance(&self, u: usize, v: usize) -> Result<Q> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.to_q(self.units(u, v)))
    }

    /// The chosen geodesic between `u` and `v`: the lexicographically least
    /// shortest path starting from the smaller id, oriented from `u` to `v`.
    pub fn geodesic(&self, u: usize, v: usize) -> Result<Vec<usize>> {
        self.check(u)?;
        self.check(v)?;
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        let mut path = self.greedy_path(a, b);
        if a != u {
            path.reverse();
        }
        Ok(path)
    }

    fn greedy_path(&self, from: usize, to: usize) -> Vec<usize> {
        let target = self.row(to);
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let (next, _) = *self.adj[cur]
                .iter()
                .find(|&&(w, len)| len + target[w] == target[cur])
                .expect("some neighbour lies on a shortest path");
            path.push(next);
            cur = next;
        }
        path
    }

    /// `(x, y)_z`, the Gromov product based at `z`.
    pub fn gromov_product(&self, x: usize, y: usize, z: usize) -> Result<Q> {
        let s = self.distance(x, z)? + self.distance(y, z)? - self.distance(x, y)?;
        Ok(s / Q::from_integer(2))
    }

    /// `min{(x,z)_w, (y,z)_w} - (x,y)_w`; its maximum over quadruples is the
    /// four-point constant.
    pub fn four_point_defect(&self, x: usize, y: usize, z: usize, w: usize) -> Result<Q> {
        let a = self.gromov_product(x, z, w)?;
        let b = self.gromov_product(y, z, w)?;
        Ok(a.min(b) - self.gromov_product(x, y, w)?)
    }

    /// Smallest `δ'` with `(x,y)_w >= min{(x,z)_w,(y,z)_w} - δ'` over all
    /// quadruples drawn from `sample` (all vertices by default).
    ///
    /// Uses the equivalent form: half the gap between the largest and second
    /// largest of the three pair sums.
    pub fn four_point_delta(&self, sample: Option<&[usize]>) -> Result<FourPointReport> {
        let pts: Vec<usize> = match sample {
            Some(s) => {
                for &v in s {
                    self.check(v)?;
                }
                let mut s = s.to_vec();
                s.sort_unstable();
                s.dedup();
                s
            }
            None => (0..self.n).collect(),
        };
        let m = pts.len();
        let n = self.n;
        let full = self.matrix();
        // Distances restricted to the sample, so the hot loop reads contiguous rows.
        let mut d = vec![0u64; m * m];
        for (i, &a) in pts.iter().enumerate() {
            for (j, &b) in pts.iter().enumerate() {
                d[i * m + j] = full[a * n + b];
            }
        }
        // Narrow entries vectorize better; pair sums must still fit.
        let (best, arg) = if d.iter().all(|&x| x <= u64::from(u32::MAX / 4)) {
            let narrow: Vec<u32> = d.iter().map(|&x| x as u32).collect();
            four_point_scan(&narrow, m)
        } else {
            four_point_scan(&d, m)
        };
        let witness = if m < 4 {
            None
        } else {
            let (i, j, k, l) = arg.unwrap_or((0, 1, 2, 3));
            let s1 = d[i * m + j] + d[k * m + l];
            let s2 = d[i * m + k] + d[j * m + l];
            let s3 = d[i * m + l] + d[j * m + k];
            // Put the pairing with the largest sum first.
            let q = if s1 >= s2 && s1 >= s3 {
                [i, j, k, l]
            } else if s2 >= s3 {
                [i, k, j, l]
            } else {
                [i, l, j, k]
            };
            Some(q.map(|t| pts[t]))
        };
        Ok(FourPointReport {
            delta: Q::new(best as i64, 2 * self.scale),
            witness,
        })
    }

    /// All chosen geodesics `[x, y]` for `x < y`, indexed by `x * n + y`.
    fn all_geodesics(&self) -> Vec<Vec<usize>> {
        let n = self.n;
        let mut out = vec![Vec::new(); n * n];
        for x in 0..n {
            for y in x + 1..n {
                out[x * n + y] = self.greedy_path(x, y);
            }
        }
        out
    }

    /// Largest diameter of a tripod fibre over vertices of the chosen sides,
    /// maximised over all triangles.
    pub fn tripod_delta(&self) -> TripodReport {
        let n = self.n;
        let geo = self.all_geodesics();
        let side = |a: usize, b: usize| -> (Vec<usize>, bool) {
            if a < b {
                (geo[a * n + b].clone(), false)
            } else {
                (geo[b * n + a].clone(), true)
            }
        };
        let mut best = 0u64;
        let mut witness = None;
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    let corners = [x, y, z];
                    for c in 0..3 {
                        let o = corners[c];
                        let p = corners[(c + 1) % 3];
                        let r = corners[(c + 2) % 3];
                        // Twice the leg at o, to stay integral.
                        let leg2 = self.units(o, p) + self.units(o, r) - self.units(p, r);
                        let (mut s1, rev1) = side(o, p);
                        let (mut s2, rev2) = side(o, r);
                        if rev1 {
                            s1.reverse();
                        }
                        if rev2 {
                            s2.reverse();
                        }
                        let row = self.row(o);
                        let (mut a, mut b) = (0, 0);
                        while a < s1.len() && b < s2.len() {
                            let (ta, tb) = (row[s1[a]], row[s2[b]]);
                            if 2 * ta > leg2 || 2 * tb > leg2 {
                                break;
                            }
                            if ta < tb {
                                a += 1;
                            } else if tb < ta {
                                b += 1;
                            } else {
                                let dab = self.units(s1[a], s2[b]);
                                if dab > best {
                                    best = dab;
                                    witness = Some(TripodWitness {
                                        triangle: corners,
                                        pair: [s1[a], s2[b]],
                                    });
                                }
                                a += 1;
                                b += 1;
                            }
                        }
                    }
                }
            }
        }
        TripodReport {
            delta: self.to_q(best),
            witness,
        }
    }

    /// Max over paths from `x` to `y` of the least distance to `p` along the
    /// path, endpoints included. Every `x`-`y` path meets the closed ball of
    /// this radius around `p`, and some path avoids every smaller one.
    pub fn bottleneck_at(&self, x: usize, y: usize, p: usize) -> Result<Q> {
        self.check(x)?;
        self.check(y)?;
        self.check(p)?;
        let w = self.row(p);
        let mut best = vec![None::<u64>; self.n];
        best[x] = Some(w[x]);
        let mut heap = BinaryHeap::from([(w[x], x)]);
        while let Some((b, u)) = heap.pop() {
            if best[u] != Some(b) {
                continue;
            }
            if u == y {
                break;
            }
            for &(v, _) in &self.adj[u] {
                let nb = b.min(w[v]);
                if best[v].is_none_or(|old| nb > old) {
                    best[v] = Some(nb);
                    heap.push((nb, v));
                }
            }
        }
        Ok(self.to_q(best[y].expect("graph is connected")))
    }

    /// Smallest δ such that for every pair and every vertex `p` on the chosen
    /// geodesic between them, every path between the pair meets the closed
    /// δ-ball about `p`.
    pub fn bottleneck_delta(&self) -> BottleneckReport {
        let n = self.n;
        // For each p, the pairs whose chosen geodesic passes through it.
        let mut through: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n];
        for x in 0..n {
            for y in x + 1..n {
                for v in self.greedy_path(x, y) {
                    through[v].push((x as u32, y as u32));
                }
            }
        }
        let mut table = vec![0u64; n * n];
        let mut order: Vec<usize> = (0..n).collect();
        let mut best = 0u64;
        let mut witness = None;
        for p in 0..n {
            if through[p].is_empty() {
                continue;
            }
            let w = self.row(p);
            // Activate vertices by decreasing distance from p; two vertices
            // become connected exactly at their maximin value.
            order.sort_by_key(|&v| (Reverse(w[v]), v));
            let mut comp: Vec<usize> = (0..n).collect();
            let mut members: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
            let mut active = vec![false; n];
            for &v in &order {
                active[v] = true;
                let level = w[v];
                for &(u, _) in &self.adj[v] {
                    if !active[u] {
                        continue;
                    }
                    let (cu, cv) = (comp[u], comp[v]);
                    if cu == cv {
                        continue;
                    }
                    let (big, small) = if members[cu].len() >= members[cv].len() {
                        (cu, cv)
                    } else {
                        (cv, cu)
                    };
                    let moved = std::mem::take(&mut members[small]);
                    for &a in &moved {
                        for &b in &members[big] {
                            table[a * n + b] = level;
                            table[b * n + a] = level;
                        }
                    }
                    for &a in &moved {
                        comp[a] = big;
                    }
                    members[big].extend(moved);
                }
            }
            for &(x, y) in &through[p] {
                let val = table[x as usize * n + y as usize];
                if val > best {
                    best = val;
                    witness = Some([x as usize, y as usize, p]);
                }
            }
        }
        if witness.is_none() && n >= 2 {
            witness = Some([0, 1.min(n - 1), 0]);
        }
        BottleneckReport {
            delta: self.to_q(best),
            witness,
        }
    }

    pub fn hyperbolicity(&self) -> HyperbolicityReport {
        HyperbolicityReport {
            four_point: self.four_point_delta(None).expect("full sample is valid"),
            tripod: self.tripod_delta(),
            bottleneck: self.bottleneck_delta(),
        }
    }

    /// Checks `|i-j|/K - C <= d(γ_i, γ_j) <= K|i-j| + C` for all index pairs.
    pub fn validate_quasi_geodesic(&self, gamma: &[usize], k: Q, c: Q) -> Result<()> {
        if k < Q::one() || c.is_negative() {
            return Err(Error::input("quasi-geodesic constants need K >= 1 and C >= 0"));
        }
        for &v in gamma {
            self.check(v)?;
        }
        for i in 0..gamma.len() {
            for j in i + 1..gamma.len() {
                let t = Q::from_integer((j - i) as i64);
                let d = self.to_q(self.units(gamma[i], gamma[j]));
                if d < t / k - c || d > t * k + c {
                    return Err(Error::contract(format!(
                        "not a ({k},{c})-quasi-geodesic: indices ({i},{j}) at distance {d}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// One-sided Hausdorff gap from `gamma1` to `gamma2`, after validating both
    /// as `(K, C)`-quasi-geodesics with common endpoints.
    pub fn stability_gap(&self, gamma1: &[usize], gamma2: &[usize], k: Q, c: Q) -> Result<Q> {
        if gamma1.is_empty() || gamma2.is_empty() {
            return Err(Error::input("empty path"));
        }
        if gamma1[0] != gamma2[0] || gamma1.last() != gamma2.last() {
            return Err(Error::input("paths must share their first and last vertices"));
        }
        self.validate_quasi_geodesic(gamma1, k, c)
            .map_err(|e| Error::contract(format!("first path: {e}")))?;
        self.validate_quasi_geodesic(gamma2, k, c)
            .map_err(|e| Error::contract(format!("second path: {e}")))?;
        let gap = gamma1
            .iter()
            .map(|&v| gamma2.iter().map(|&u| self.units(v, u)).min().unwrap())
            .max()
            .unwrap();
        Ok(self.to_q(gap))
    }
}

/// The tripod whose legs are the Gromov products of a triangle with sides
/// `d(x,y)`, `d(y,z)`, `d(x,z)`; `leg_a` sits at `x`.
/// Largest `hi - mid` of the three pair sums over quadruples `i < j < k < l`
/// of the `m × m` matrix `d`, with the first quadruple attaining it.
fn four_point_scan<T>(d: &[T], m: usize) -> (u64, Option<(usize, usize, usize, usize)>)
where
    T: Copy + Ord + Default + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + Into<u64>,
{
    let gap = |s1: T, s2: T, s3: T| {
        let hi = s1.max(s2).max(s3);
        let mid = s1.min(s2).max(s1.max(s2).min(s3));
        hi - mid
    };
    let mut best = T::default();
    let mut arg = None;
    for i in 0..m {
        let ri = &d[i * m..(i + 1) * m];
        for j in i + 1..m {
            let rj = &d[j * m..(j + 1) * m];
            let dij = ri[j];
            for k in j + 1..m {
                let rk = &d[k * m..(k + 1) * m];
                let (dik, djk) = (ri[k], rj[k]);
                let tail = k + 1;
                let mut local = T::default();
                for l in tail..m {
                    local = local.max(gap(dij + rk[l], dik + rj[l], djk + ri[l]));
                }
                if local > best {
                    let l = (tail..m)
                        .find(|&l| gap(dij + rk[l], dik + rj[l], djk + ri[l]) == local)
                        .unwrap();
                    best = local;
                    arg = Some((i, j, k, l));
                }
            }
        }
    }
    (best.into(), arg)
}

pub fn comparison_tripod(d_xy: Q, d_yz: Q, d_xz: Q) -> Result<Tripod> {
    if d_xy.is_negative() || d_yz.is_negative() || d_xz.is_negative() {
        return Err(Error::input("side lengths must be nonnegative"));
    }
    if d_xy > d_yz + d_xz || d_yz > d_xy + d_xz || d_xz > d_xy + d_yz {
        return Err(Error::input(format!(
            "({d_xy}, {d_yz}, {d_xz}) violates the triangle inequality"
        )));
    }
    let two = Q::from_integer(2);
    Ok(Tripod {
        leg_a: (d_xy + d_xz - d_yz) / two,
        leg_b: (d_xy + d_yz - d_xz) / two,
        leg_c: (d_yz + d_xz - d_xy) / two,
    })
}

impl Tripod {
    pub fn is_degenerate(&self) -> bool {
        self.leg_a.is_zero() || self.leg_b.is_zero() || self.leg_c.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qr};

    #[test]
    fn distances_on_small_graphs() {
        let p = MetricGraph::path(4);
        assert_eq!(p.distance(0, 3).unwrap(), q(3));
        assert_eq!(p.distance(2, 2).unwrap(), q(0));
        let c6 = MetricGraph::cycle(6).unwrap();
        assert_eq!(c6.distance(0, 4).unwrap(), q(2));
        assert!(c6.distance(0, 6).is_err());
    }

    #[test]
    fn rational_lengths_stay_exact() {
        let g = MetricGraph::parse("graph 3\n0 1 1/2\n1 2 2/3 # comment\n").unwrap();
        assert_eq!(g.distance(0, 2).unwrap(), qr(7, 6));
        assert_eq!(g.scale(), 6);
    }

    #[test]
    fn rejects_bad_graphs() {
        assert!(matches!(MetricGraph::parse("graph 2\n0 0\n"), Err(Error::Input(_))));
        assert!(MetricGraph::parse("graph 3\n0 1\n").is_err());
        assert!(MetricGraph::parse("graph 2\n0 1\n1 0\n").is_err());
        match MetricGraph::parse("graph 2\n0 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(MetricGraph::parse("# nothing\n").is_err());
    }

    #[test]
    fn gromov_products() {
        let c4 = MetricGraph::cycle(4).unwrap();
        assert_eq!(c4.gromov_product(1, 3, 0).unwrap(), q(0));
        assert_eq!(c4.gromov_product(1, 2, 1).unwrap(), q(0));
        // Tripod with legs 2, 3, 4 at leaves a=1, b=2, c=3 around centre 0.
        let t = MetricGraph::new(
            4,
            vec![(0, 1, q(2)), (0, 2, q(3)), (0, 3, q(4))],
        )
        .unwrap();
        assert_eq!(t.gromov_product(1, 2, 3).unwrap(), q(4));
    }

    #[test]
    fn tripods() {
        let t = comparison_tripod(q(2), q(2), q(2)).unwrap();
        assert_eq!((t.leg_a, t.leg_b, t.leg_c), (q(1), q(1), q(1)));
        let t = comparison_tripod(q(5), q(7), q(6)).unwrap();
        assert_eq!((t.leg_a, t.leg_b, t.leg_c), (q(2), q(3), q(4)));
        let t = comparison_tripod(q(3), q(3), q(0)).unwrap();
        assert_eq!((t.leg_a, t.leg_b, t.leg_c), (q(0), q(3), q(0)));
        assert!(t.is_degenerate());
        assert!(comparison_tripod(q(1), q(1), q(3)).is_err());
    }

    #[test]
    fn geodesics_are_lexicographically_least() {
        let c4 = MetricGraph::cycle(4).unwrap();
        assert_eq!(c4.geodesic(0, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(c4.geodesic(2, 0).unwrap(), vec![2, 1, 0]);
    }

    #[test]
    fn small_cases_of_each_constant() {
        let edge = MetricGraph::path(2);
        let r = edge.hyperbolicity();
        assert_eq!(r.four_point.delta, q(0));
        assert_eq!(r.four_point.witness, None);
        assert_eq!(r.tripod.delta, q(0));
        assert_eq!(r.bottleneck.delta, q(0));

        let star = MetricGraph::unit(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.tripod_delta().delta, q(0));
        assert_eq!(MetricGraph::path(7).tripod_delta().delta, q(0));
    }

    #[test]
    fn subdivision_halves_lengths() {
        let c = MetricGraph::cycle(4).unwrap().subdivide(2).unwrap();
        assert_eq!(c.vertex_count(), 8);
        assert_eq!(c.distance(0, 2).unwrap(), q(2));
        assert_eq!(c.edge_length(0, 4), Some(qr(1, 2)));
    }

    #[test]
    fn stability_gap_rejects_non_quasi_geodesics() {
        let p = MetricGraph::path(5);
        let geo = vec![0, 1, 2, 3, 4];
        assert_eq!(p.stability_gap(&geo, &geo, q(1), q(0)).unwrap(), q(0));
        let stall = vec![0, 1, 1, 1, 1, 1, 2, 3, 4];
        let err = p.stability_gap(&stall, &geo, q(2), q(1)).unwrap_err();
        assert!(err.is_contract());
    }
}
