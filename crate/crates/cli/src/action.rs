//! Quasi-action descriptions read from JSON.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use qfa_core::coarse::{GraphSpace, QuasiActionTable, RealLine};
use qfa_core::corpus::noisy_lattice_action;
use qfa_core::group::{FreeAbelian, Group, PermutationGroup};
use qfa_core::rational::{parse_rational, q};
use qfa_core::{Error, MetricGraph, Result, Q};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ActionFile {
    /// `Z^n` acting on the line, generator `i` shifting by `shift_i`.
    Translations {
        generators: Vec<Shift>,
        #[serde(rename = "K")]
        k: Option<String>,
        #[serde(rename = "C")]
        c: Option<String>,
        base_point: Option<String>,
    },
    /// Generators acting on a finite tree by vertex permutations.
    TreePermutations {
        tree: String,
        generators: Vec<Perm>,
        /// `"abelian"` treats the generators as a free abelian basis (they
        /// must commute); `"permutation"` uses the permutation group.
        group: Option<String>,
        #[serde(rename = "K")]
        k: Option<String>,
        #[serde(rename = "C")]
        c: Option<String>,
        base_point: Option<usize>,
    },
    /// `Z^2` on the line: `a` shifts by 3 with seeded noise, `b` is bounded.
    NoisyLattice { seed: u64, base_point: Option<String> },
    /// `Z` on the line by `x -> x + f(n)` for a tabulated quasicharacter `f`.
    Quasicharacter {
        table: BTreeMap<String, String>,
        #[serde(rename = "C")]
        c: Option<String>,
        base_point: Option<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Shift {
    name: String,
    shift: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Perm {
    name: String,
    perm: Vec<usize>,
}

pub enum Loaded {
    Line(QuasiActionTable<FreeAbelian, RealLine>, Q),
    TreeAbelian(QuasiActionTable<FreeAbelian, GraphSpace>, usize),
    TreePerm(QuasiActionTable<PermutationGroup, GraphSpace>, usize),
}

/// Runs `$body` with `$t` bound to the table and `$p` to the base point,
/// whichever group and space the file described.
macro_rules! with_action {
    ($loaded:expr, $t:ident, $p:ident => $body:expr) => {
        match $loaded {
            $crate::action::Loaded::Line($t, $p) => $body,
            $crate::action::Loaded::TreeAbelian($t, $p) => $body,
            $crate::action::Loaded::TreePerm($t, $p) => $body,
        }
    };
}
pub(crate) use with_action;

fn rational_or(s: &Option<String>, default: Q, what: &str) -> Result<Q> {
    match s {
        None => Ok(default),
        Some(s) => parse_rational(s).map_err(|_| Error::input(format!("bad {what} {s:?}"))),
    }
}

pub fn load(path: &Path, point: Option<&str>) -> Result<Loaded> {
    let text = crate::read(path)?;
    let file: ActionFile = serde_json::from_str(&text).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    let line_point = |base: &Option<String>| -> Result<Q> {
        match point.map(str::to_string).or_else(|| base.clone()) {
            None => Ok(q(0)),
            Some(s) => parse_rational(&s).map_err(|_| Error::input(format!("bad point {s:?}"))),
        }
    };
    let tree_point = |base: Option<usize>, n: usize| -> Result<usize> {
        let v = match point {
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| Error::input(format!("bad vertex {s:?}")))?,
            None => base.unwrap_or(0),
        };
        if v >= n {
            return Err(Error::input(format!("vertex {v} is outside the tree")));
        }
        Ok(v)
    };
    match file {
        ActionFile::Translations {
            generators,
            k,
            c,
            base_point,
        } => {
            if generators.is_empty() {
                return Err(Error::input("no generators"));
            }
            let names = generators.iter().map(|g| g.name.clone()).collect();
            let shifts: Vec<Q> = generators
                .iter()
                .map(|g| rational_or(&Some(g.shift.clone()), q(0), "shift"))
                .collect::<Result<_>>()?;
            let t = QuasiActionTable::new(
                FreeAbelian::with_names(names),
                RealLine,
                move |g: &Vec<i64>, x: &Q| Some(g.iter().zip(&shifts).fold(*x, |acc, (e, s)| acc + Q::from_integer(*e) * s)),
                rational_or(&k, q(1), "K")?,
                rational_or(&c, q(0), "C")?,
            )?;
            Ok(Loaded::Line(t, line_point(&base_point)?))
        }
        ActionFile::NoisyLattice { seed, base_point } => Ok(Loaded::Line(noisy_lattice_action(seed), line_point(&base_point)?)),
        ActionFile::Quasicharacter { table, c, base_point } => {
            let mut f = BTreeMap::new();
            for (n, v) in &table {
                let n: i64 = n.parse().map_err(|_| Error::input(format!("bad table key {n:?}")))?;
                f.insert(n, rational_or(&Some(v.clone()), q(0), "table value")?);
            }
            let t = QuasiActionTable::new(
                FreeAbelian::new(1),
                RealLine,
                move |g: &Vec<i64>, x: &Q| f.get(&g[0]).map(|v| x + v),
                q(1),
                rational_or(&c, q(0), "C")?,
            )?;
            Ok(Loaded::Line(t, line_point(&base_point)?))
        }
        ActionFile::TreePermutations {
            tree,
            generators,
            group,
            k,
            c,
            base_point,
        } => {
            let tree_path = path.parent().unwrap_or(Path::new(".")).join(&tree);
            let graph = Arc::new(crate::in_file(&tree_path, MetricGraph::parse(&crate::read(&tree_path)?))?);
            if !graph.is_tree() {
                return Err(Error::input(format!("{tree} is not a tree")));
            }
            let n = graph.vertex_count();
            if generators.is_empty() {
                return Err(Error::input("no generators"));
            }
            let mut perms = Vec::new();
            for g in &generators {
                check_isometry(&graph, &g.perm).map_err(|e| Error::input(format!("generator {}: {e}", g.name)))?;
                perms.push(g.perm.clone());
            }
            let names: Vec<String> = generators.iter().map(|g| g.name.clone()).collect();
            let k = rational_or(&k, q(1), "K")?;
            let c = rational_or(&c, q(0), "C")?;
            let p = tree_point(base_point, n)?;
            let space = GraphSpace::new(graph);
            match group.as_deref().unwrap_or("permutation") {
                "abelian" => {
                    for (i, a) in perms.iter().enumerate() {
                        for (j, b) in perms.iter().enumerate().skip(i + 1) {
                            if (0..n).any(|v| a[b[v]] != b[a[v]]) {
                                return Err(Error::input(format!(
                                    "generators {} and {} do not commute",
                                    names[i], names[j]
                                )));
                            }
                        }
                    }
                    let inverses: Vec<Vec<usize>> = perms.iter().map(|p| invert(p)).collect();
                    let t = QuasiActionTable::new(
                        FreeAbelian::with_names(names),
                        space,
                        move |g: &Vec<i64>, x: &usize| {
                            let mut x = *x;
                            for (i, &e) in g.iter().enumerate() {
                                let step = if e < 0 { &inverses[i] } else { &perms[i] };
                                let order = cycle_len(step, x);
                                for _ in 0..(e.unsigned_abs() % order as u64) {
                                    x = step[x];
                                }
                            }
                            Some(x)
                        },
                        k,
                        c,
                    )?;
                    Ok(Loaded::TreeAbelian(t, p))
                }
                "permutation" => {
                    let gens = perms.iter().map(|p| p.iter().map(|&v| v as u32).collect()).collect();
                    let t = QuasiActionTable::new(
                        PermutationGroup::new(n, names, gens)?,
                        space,
                        |g: &Vec<u32>, x: &usize| g.get(*x).map(|&y| y as usize),
                        k,
                        c,
                    )?;
                    Ok(Loaded::TreePerm(t, p))
                }
                other => Err(Error::input(format!("unknown group {other:?}; use abelian or permutation"))),
            }
        }
    }
}

fn check_isometry(graph: &MetricGraph, perm: &[usize]) -> Result<()> {
    let n = graph.vertex_count();
    if perm.len() != n {
        return Err(Error::input(format!("permutation has {} entries, tree has {n} vertices", perm.len())));
    }
    let mut seen = vec![false; n];
    for &w in perm {
        if w >= n || std::mem::replace(&mut seen[w], true) {
            return Err(Error::input("not a permutation of the vertices"));
        }
    }
    for &(u, v, ref len) in graph.edges() {
        if graph.edge_length(perm[u], perm[v]) != Some(*len) {
            return Err(Error::input(format!("edge {u}-{v} is not mapped to an edge of equal length")));
        }
    }
    Ok(())
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (v, &w) in p.iter().enumerate() {
        inv[w] = v;
    }
    inv
}

fn cycle_len(p: &[usize], x: usize) -> usize {
    let mut len = 1;
    let mut y = p[x];
    while y != x {
        y = p[y];
        len += 1;
    }
    len
}

/// Parses a `;`-separated list of words in the action's generators.
pub fn words<G: Group>(group: &G, list: &str) -> Result<Vec<qfa_core::group::Word>> {
    list.split(';')
        .map(|w| qfa_core::group::Word::parse(w, group.names()))
        .collect()
}
