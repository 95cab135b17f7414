//! Seeded instance generators. Every instance is a pure function of the seed.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::ElementaryWord;
use crate::coarse::{GraphSpace, QuasiActionTable, RealLine};
use crate::group::FreeAbelian;
use crate::metric::MetricGraph;
use crate::pseudochar::measured_epsilon;
use crate::rational::{q, qr, Q};
use crate::tree::{Kind, TreeIsometry};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random recursive tree on `n` vertices with shuffled labels.
pub fn random_tree(rng: &mut impl Rng, n: usize) -> MetricGraph {
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    let edges: Vec<(usize, usize)> = (1..n)
        .map(|v| (labels[rng.gen_range(0..v)], labels[v]))
        .collect();
    MetricGraph::unit(n, &edges).expect("a tree is connected")
}

/// `count` trees with vertex counts uniform in `[2, max_n]`.
pub fn random_trees(seed: u64, count: usize, max_n: usize) -> Vec<MetricGraph> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let n = r.gen_range(2..=max_n);
            random_tree(&mut r, n)
        })
        .collect()
}

/// Ball of radius `radius` in the `degree`-regular tree, centered at 0.
pub fn regular_tree_ball(degree: usize, radius: usize) -> MetricGraph {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut n = 1;
    for level in 0..radius {
        let mut next = Vec::new();
        for &v in &frontier {
            let children = if level == 0 { degree } else { degree - 1 };
            for _ in 0..children {
                edges.push((v, n));
                next.push(n);
                n += 1;
            }
        }
        frontier = next;
    }
    MetricGraph::unit(n, &edges).expect("a tree is connected")
}

pub fn random_elementary_word(rng: &mut impl Rng, n: usize, max_len: usize) -> ElementaryWord {
    let len = rng.gen_range(0..=max_len);
    let factors = (0..len)
        .map(|_| {
            let i = rng.gen_range(1..=n);
            let mut j = rng.gen_range(1..n);
            if j >= i {
                j += 1;
            }
            let mut lambda = rng.gen_range(-3i64..=2);
            if lambda >= 0 {
                lambda += 1;
            }
            (i, j, BigInt::from(lambda))
        })
        .collect();
    ElementaryWord { n, factors }
}

/// A comb: a spine `0..=len` with two pendant paths of length `h` hanging
/// from every spine vertex divisible by `period`.
#[derive(Debug, Clone)]
pub struct Comb {
    pub graph: Arc<MetricGraph>,
    pub len: usize,
    pub period: usize,
    pub h: usize,
    pendant: BTreeMap<(usize, usize, usize), usize>,
}

impl Comb {
    pub fn new(len: usize, period: usize, h: usize) -> Comb {
        let mut edges: Vec<(usize, usize)> = (0..len).map(|i| (i, i + 1)).collect();
        let mut pendant = BTreeMap::new();
        let mut n = len + 1;
        for i in (0..=len).step_by(period) {
            for side in 0..2 {
                let mut prev = i;
                for k in 1..=h {
                    pendant.insert((i, side, k), n);
                    edges.push((prev, n));
                    prev = n;
                    n += 1;
                }
            }
        }
        Comb {
            graph: Arc::new(MetricGraph::unit(n, &edges).expect("a comb is connected")),
            len,
            period,
            h,
            pendant,
        }
    }

    /// Vertex images of the spine map `spine`, carrying pendant `side` to
    /// `side_map(i, side)`; undefined where the spine map leaves the comb.
    fn lift(&self, spine: impl Fn(usize) -> Option<usize>, side_map: impl Fn(usize, usize) -> usize) -> TreeIsometry {
        let mut map = vec![None; self.graph.vertex_count()];
        for (i, slot) in map.iter_mut().enumerate().take(self.len + 1) {
            *slot = spine(i).filter(|&j| j <= self.len);
        }
        for (&(i, side, k), &v) in &self.pendant {
            if let Some(j) = map[i] {
                map[v] = self.pendant.get(&(j, side_map(i, side), k)).copied();
            }
        }
        TreeIsometry::new(self.graph.clone(), map).expect("comb symmetries are isometries")
    }

    pub fn shift(&self, s: usize) -> TreeIsometry {
        self.lift(|i| Some(i + s), |_, side| side)
    }

    /// `i ↦ c2 - i` on the spine.
    pub fn reflection(&self, c2: usize) -> TreeIsometry {
        self.lift(|i| c2.checked_sub(i), |_, side| side)
    }

    /// Swaps the two pendants at the spine positions accepted by `at`.
    pub fn swap(&self, at: impl Fn(usize) -> bool) -> TreeIsometry {
        self.lift(Some, |i, side| if at(i) { 1 - side } else { side })
    }

    pub fn pendant_vertex(&self, i: usize, side: usize, k: usize) -> Option<usize> {
        self.pendant.get(&(i, side, k)).copied()
    }
}

#[derive(Debug, Clone)]
pub struct IsometryCase {
    pub label: String,
    pub iso: TreeIsometry,
    pub base: usize,
    pub expected: Kind,
}

/// Comb symmetries of known type with a base point whose first `steps`
/// iterates stay in the domain.
pub fn tree_isometry_cases(seed: u64, count: usize, steps: usize) -> Vec<IsometryCase> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let period = r.gen_range(1..=3);
        let h = r.gen_range(1..=2);
        let shift = period * r.gen_range(1..=2);
        let x0 = r.gen_range(0..period.max(2));
        let len = x0 + steps * shift + period * r.gen_range(1..=3);
        let comb = Comb::new(len, period, h);
        let choice = r.gen_range(0..10);
        let (label, iso, base, expected) = match choice {
            0..=3 => (format!("shift {shift}"), comb.shift(shift), x0, Kind::Hyperbolic),
            4..=5 => {
                let iso = comb.shift(shift).compose(&comb.swap(|_| true));
                (format!("shift {shift} with swap"), iso, x0, Kind::Hyperbolic)
            }
            6..=7 => {
                let c2 = period * r.gen_range(1..=len / period);
                let lo = c2.saturating_sub(len);
                let base = r.gen_range(lo..=c2.min(len));
                (format!("reflection about {c2}/2"), comb.reflection(c2), base, Kind::Elliptic)
            }
            8 => {
                let i = period * r.gen_range(0..=len / period);
                let base = comb.pendant_vertex(i, r.gen_range(0..2), h).unwrap();
                (format!("swap at {i}"), comb.swap(|j| j == i), base, Kind::Elliptic)
            }
            _ => {
                let base = r.gen_range(0..comb.graph.vertex_count());
                ("identity".to_string(), TreeIsometry::identity(comb.graph.clone()), base, Kind::Elliptic)
            }
        };
        out.push(IsometryCase {
            label,
            iso,
            base,
            expected,
        });
    }
    out
}

/// The action of `Z` on a tree by powers of `f`, defined where the iterates are.
pub fn cyclic_action(f: &TreeIsometry) -> QuasiActionTable<FreeAbelian, GraphSpace> {
    let g = f.clone();
    QuasiActionTable::new(
        FreeAbelian::new(1),
        GraphSpace::new(f.tree().clone()),
        move |n: &Vec<i64>, x: &usize| g.iterate(*x, n[0]),
        q(1),
        q(0),
    )
    .expect("isometries have K = 1, C = 0")
}

#[derive(Debug, Clone)]
pub struct LineMap {
    pub graph: MetricGraph,
    pub rho: Vec<Q>,
    pub r: Q,
    /// Least `ε` making `rho` an `(R, ε)`-quasi-isometry.
    pub epsilon: Q,
    pub slope: Q,
}

/// Noisy affine maps to the line from paths and caterpillars, with
/// `R <= 3` and `ε <= 4`; legs follow their attaching spine value. The
/// zero sits in the middle half of the spine so that both sides are long.
pub fn line_maps(seed: u64, count: usize) -> Vec<LineMap> {
    let slopes = [qr(1, 3), qr(1, 2), q(1), q(2), q(3)];
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let slope = slopes[r.gen_range(0..slopes.len())];
        let rr = slope.max(slope.recip());
        let spine = r.gen_range(8..=40);
        let caterpillar = r.gen_bool(0.5);
        let mut edges: Vec<(usize, usize)> = (0..spine - 1).map(|i| (i, i + 1)).collect();
        let zero = r.gen_range(spine / 4..=3 * spine / 4) as i64;
        let noise = |r: &mut ChaCha8Rng| qr(r.gen_range(-2..=2), 2);
        let mut rho: Vec<Q> = (0..spine as i64)
            .map(|i| slope * Q::from_integer(i - zero) + noise(&mut r))
            .collect();
        if caterpillar {
            for i in 0..spine {
                if r.gen_bool(0.3) {
                    let depth = r.gen_range(1..=3);
                    let mut prev = i;
                    for _ in 0..depth {
                        let v = rho.len();
                        edges.push((prev, v));
                        rho.push(rho[i] + noise(&mut r));
                        prev = v;
                    }
                }
            }
        }
        let graph = MetricGraph::unit(rho.len(), &edges).expect("connected");
        let (epsilon, _) = measured_epsilon(&graph, &rho, rr).expect("valid map");
        let signs = rho.iter().any(|x| *x > q(0)) && rho.iter().any(|x| *x < q(0));
        if epsilon <= q(4) && signs {
            out.push(LineMap {
                graph,
                rho,
                r: rr,
                epsilon,
                slope,
            });
        }
    }
    out
}

/// Noise in `{-2, ..., 2}` as a fixed function of `(seed, a, b)`.
pub fn lattice_noise(seed: u64, a: i64, b: i64) -> i64 {
    let mut r = rng(seed);
    r.set_stream(zigzag(a));
    r.set_word_pos(u128::from(zigzag(b)) * 16);
    i64::from(r.next_u32() % 5) - 2
}

fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

/// `Z²` on the line by `A((a, b), x) = x + 3a + noise(a, b)`; the defect of
/// `f` is at most 6.
pub fn noisy_lattice_action(seed: u64) -> QuasiActionTable<FreeAbelian, RealLine> {
    QuasiActionTable::new(
        FreeAbelian::new(2),
        RealLine,
        move |g: &Vec<i64>, x: &Q| Some(x + q(3 * g[0] + lattice_noise(seed, g[0], g[1]))),
        q(1),
        q(6),
    )
    .expect("valid constants")
}

/// Two hubs joined through a center, with `arms.0` and `arms.1` paths of
/// length `h` on the hubs; `a` and `b` rotate the two families of arms.
#[derive(Debug, Clone)]
pub struct TwoStars {
    pub graph: Arc<MetricGraph>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

pub fn two_stars(arms: (usize, usize), h: usize) -> TwoStars {
    let mut edges = vec![(0, 1), (0, 2)];
    let mut n = 3;
    let mut arm_vertices: [Vec<Vec<usize>>; 2] = [Vec::new(), Vec::new()];
    for (hub, count) in [(1usize, arms.0), (2, arms.1)] {
        for _ in 0..count {
            let mut prev = hub;
            let mut path = Vec::new();
            for _ in 0..h {
                edges.push((prev, n));
                path.push(n);
                prev = n;
                n += 1;
            }
            arm_vertices[hub - 1].push(path);
        }
    }
    let rotate = |family: &Vec<Vec<usize>>| {
        let mut perm: Vec<usize> = (0..n).collect();
        for (j, path) in family.iter().enumerate() {
            let next = &family[(j + 1) % family.len()];
            for (k, &v) in path.iter().enumerate() {
                perm[v] = next[k];
            }
        }
        perm
    };
    TwoStars {
        graph: Arc::new(MetricGraph::unit(n, &edges).expect("connected")),
        a: rotate(&arm_vertices[0]),
        b: rotate(&arm_vertices[1]),
    }
}

/// `Z²` acting on a [`TwoStars`] tree through the commuting rotations.
pub fn two_star_action(stars: &TwoStars) -> QuasiActionTable<FreeAbelian, GraphSpace> {
    let (a, b) = (stars.a.clone(), stars.b.clone());
    let power = |p: &[usize], e: i64, mut x: usize| {
        let order = cycle_len(p, x) as i64;
        for _ in 0..e.rem_euclid(order) {
            x = p[x];
        }
        x
    };
    QuasiActionTable::new(
        FreeAbelian::new(2),
        GraphSpace::new(stars.graph.clone()),
        move |g: &Vec<i64>, x: &usize| Some(power(&a, g[0], power(&b, g[1], *x))),
        q(1),
        q(0),
    )
    .expect("isometric action")
}

fn cycle_len(p: &[usize], x: usize) -> usize {
    let mut k = 1;
    let mut y = p[x];
    while y != x {
        y = p[y];
        k += 1;
    }
    k
}

/// `Z²` on the line with `a` fixing everything and `b` translating by `step`.
pub fn translation_action(step: i64) -> QuasiActionTable<FreeAbelian, RealLine> {
    QuasiActionTable::new(
        FreeAbelian::new(2),
        RealLine,
        move |g: &Vec<i64>, x: &Q| Some(x + q(step * g[1])),
        q(1),
        q(0),
    )
    .expect("isometric action")
}
