//! Finitely generated groups given by exact realizations, and words over
//! their generators.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use crate::arith::IntMatrix;
use crate::error::{Error, Result};

/// A word `g_{i1}^{e1} g_{i2}^{e2} ...` over generator indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<(usize, i64)>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Word(vec![(i, 1)])
    }

    pub fn power(i: usize, e: i64) -> Self {
        if e == 0 {
            Word::identity()
        } else {
            Word(vec![(i, e)])
        }
    }

    /// Sum of absolute exponents.
    pub fn len(&self) -> u64 {
        self.0.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends a letter, merging with the last one when possible.
    pub fn push(&mut self, gen: usize, e: i64) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.0.last_mut() {
            if last.0 == gen {
                last.1 += e;
                if last.1 == 0 {
                    self.0.pop();
                }
                return;
            }
        }
        self.0.push((gen, e));
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        for &(g, e) in &other.0 {
            w.push(g, e);
        }
        w
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&(g, e)| (g, -e)).collect())
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut w = Word::identity();
        for _ in 0..n.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Space-separated letters such as `a b^-1 a^3`; `e` for the identity.
    pub fn format(&self, names: &[String]) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|&(g, e)| {
                if e == 1 {
                    names[g].clone()
                } else {
                    format!("{}^{}", names[g], e)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse(s: &str, names: &[String]) -> Result<Word> {
        let mut w = Word::identity();
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(w);
        }
        for tok in s.split_whitespace() {
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>()
                        .map_err(|_| Error::input(format!("bad exponent in {tok:?}")))?,
                ),
                None => (tok, 1),
            };
            let g = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::input(format!("unknown generator {name:?}")))?;
            w.push(g, exp);
        }
        Ok(w)
    }
}

/// A group whose elements are compared by their exact realization.
pub trait Group {
    type Elem: Clone + Eq + Hash + Ord + Debug;

    fn identity(&self) -> Self::Elem;
    fn generators(&self) -> &[Self::Elem];
    fn names(&self) -> &[String];
    /// `mul(a, b)` acts as "first `b`, then `a`".
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn describe(&self, a: &Self::Elem) -> String;

    fn pow(&self, a: &Self::Elem, n: i64) -> Self::Elem {
        let mut base = if n < 0 { self.inv(a) } else { a.clone() };
        let mut k = n.unsigned_abs();
        let mut acc = self.identity();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            k >>= 1;
        }
        acc
    }

    fn eval(&self, w: &Word) -> Self::Elem {
        let gens = self.generators();
        w.0.iter().fold(self.identity(), |acc, &(g, e)| {
            let p = self.pow(&gens[g], e);
            self.mul(&acc, &p)
        })
    }
}

/// All elements of word length at most `depth` in the generators and their
/// inverses, in breadth-first order, each with a shortest word.
pub fn enumerate_ball<G: Group>(group: &G, depth: usize) -> Vec<(G::Elem, Word)> {
    let gens = group.generators();
    let letters: Vec<(usize, i64, G::Elem)> = (0..gens.len())
        .flat_map(|i| [(i, 1), (i, -1)])
        .map(|(i, e)| (i, e, group.pow(&gens[i], e)))
        .collect();
    let mut seen: HashMap<G::Elem, usize> = HashMap::new();
    let mut out = vec![(group.identity(), Word::identity())];
    seen.insert(group.identity(), 0);
    let mut frontier = 0..1;
    for _ in 0..depth {
        let start = out.len();
        for idx in frontier.clone() {
            for (i, e, s) in &letters {
                let elem = group.mul(&out[idx].0, s);
                if !seen.contains_key(&elem) {
                    let mut w = out[idx].1.clone();
                    w.push(*i, *e);
                    seen.insert(elem.clone(), out.len());
                    out.push((elem, w));
                }
            }
        }
        frontier = start..out.len();
        if frontier.is_empty() {
            break;
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct FreeAbelian {
    names: Vec<String>,
    gens: Vec<Vec<i64>>,
}

impl FreeAbelian {
    pub fn new(rank: usize) -> Self {
        let names = if rank <= 3 {
            ["a", "b", "c"][..rank].iter().map(|s| s.to_string()).collect()
        } else {
            (1..=rank).map(|i| format!("e{i}")).collect()
        };
        Self::with_names(names)
    }

    pub fn with_names(names: Vec<String>) -> Self {
        let rank = names.len();
        let gens = (0..rank)
            .map(|i| (0..rank).map(|j| i64::from(i == j)).collect())
            .collect();
        FreeAbelian { names, gens }
    }

    pub fn rank(&self) -> usize {
        self.gens.len()
    }
}

impl Group for FreeAbelian {
    type Elem = Vec<i64>;

    fn identity(&self) -> Vec<i64> {
        vec![0; self.rank()]
    }

    fn generators(&self) -> &[Vec<i64>] {
        &self.gens
    }

    fn names(&self) -> &[String] {
        &self.names
    }

    fn mul(&self, a: &Vec<i64>, b: &Vec<i64>) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    fn inv(&self, a: &Vec<i64>) -> Vec<i64> {
        a.iter().map(|x| -x).collect()
    }

    fn pow(&self, a: &Vec<i64>, n: i64) -> Vec<i64> {
        a.iter().map(|x| x * n).collect()
    }

    fn describe(&self, a: &Vec<i64>) -> String {
        let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
        format!("({})", parts.join(","))
    }
}

/// Permutations of `0..degree`; `p[v]` is the image of `v`.
#[derive(Debug, Clone)]
pub struct PermutationGroup {
    degree: usize,
    names: Vec<String>,
    gens: Vec<Vec<u32>>,
}

impl PermutationGroup {
    pub fn new(degree: usize, names: Vec<String>, gens: Vec<Vec<u32>>) -> Result<Self> {
        if names.len() != gens.len() {
            return Err(Error::input("one name per generator"));
        }
        for (name, p) in names.iter().zip(&gens) {
            let mut hit = vec![false; degree];
            if p.len() != degree {
                return Err(Error::input(format!("{name}: expected {degree} images")));
            }
            for &x in p {
                let x = x as usize;
                if x >= degree || hit[x] {
                    return Err(Error::input(format!("{name} is not a permutation")));
                }
                hit[x] = true;
            }
        }
        Ok(PermutationGroup { degree, names, gens })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

impl Group for PermutationGroup {
    type Elem = Vec<u32>;

    fn identity(&self) -> Vec<u32> {
        (0..self.degree as u32).collect()
    }

    fn generators(&self) -> &[Vec<u32>] {
        &self.gens
    }

    fn names(&self) -> &[String] {
        &self.names
    }

    fn mul(&self, a: &Vec<u32>, b: &Vec<u32>) -> Vec<u32> {
        b.iter().map(|&x| a[x as usize]).collect()
    }

    fn inv(&self, a: &Vec<u32>) -> Vec<u32> {
        let mut out = vec![0; a.len()];
        for (i, &x) in a.iter().enumerate() {
            out[x as usize] = i as u32;
        }
        out
    }

    fn describe(&self, a: &Vec<u32>) -> String {
        let parts: Vec<String> = a.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(" "))
    }
}

#[derive(Debug, Clone)]
pub struct MatrixGroup {
    n: usize,
    names: Vec<String>,
    gens: Vec<IntMatrix>,
}

impl MatrixGroup {
    /// Generators must be invertible over the integers (determinant ±1).
    pub fn new(names: Vec<String>, gens: Vec<IntMatrix>) -> Result<Self> {
        let n = gens
            .first()
            .map(|m| m.dim())
            .ok_or_else(|| Error::input("no generators"))?;
        if names.len() != gens.len() {
            return Err(Error::input("one name per generator"));
        }
        for (name, m) in names.iter().zip(&gens) {
            if m.dim() != n {
                return Err(Error::input(format!("{name}: dimension mismatch")));
            }
            if !m.is_unimodular() {
                return Err(Error::input(format!("{name}: determinant is not ±1")));
            }
        }
        Ok(MatrixGroup { n, names, gens })
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

impl Group for MatrixGroup {
    type Elem = IntMatrix;

    fn identity(&self) -> IntMatrix {
        IntMatrix::identity(self.n)
    }

    fn generators(&self) -> &[IntMatrix] {
        &self.gens
    }

    fn names(&self) -> &[String] {
        &self.names
    }

    fn mul(&self, a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
        a.mul(b)
    }

    fn inv(&self, a: &IntMatrix) -> IntMatrix {
        a.inverse().expect("generators are unimodular")
    }

    fn describe(&self, a: &IntMatrix) -> String {
        a.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_roundtrip_and_reduction() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        let w = Word::parse("a b^-1 b a^2", &names).unwrap();
        assert_eq!(w, Word(vec![(0, 3)]));
        let w = Word::parse("a b^-2", &names).unwrap();
        assert_eq!(w.format(&names), "a b^-2");
        assert_eq!(w.concat(&w.inverse()), Word::identity());
        assert!(Word::parse("c", &names).is_err());
    }

    #[test]
    fn z2_ball_is_a_diamond() {
        let g = FreeAbelian::new(2);
        assert_eq!(enumerate_ball(&g, 2).len(), 13);
        assert_eq!(enumerate_ball(&g, 0).len(), 1);
    }

    #[test]
    fn permutation_composition_order() {
        let g = PermutationGroup::new(
            3,
            vec!["r".into(), "s".into()],
            vec![vec![1, 2, 0], vec![1, 0, 2]],
        )
        .unwrap();
        let (r, s) = (&g.generators()[0], &g.generators()[1]);
        // (r s)(0) = r(s(0)) = r(1) = 2
        assert_eq!(g.mul(r, s)[0], 2);
        assert_eq!(g.pow(r, 3), g.identity());
        assert_eq!(enumerate_ball(&g, 3).len(), 6);
    }
}
