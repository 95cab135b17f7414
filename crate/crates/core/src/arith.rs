//! Exact integer matrices, elementary matrices `e_ij^λ`, the commutator
//! identities behind stubbornness, and Euclidean decomposition of SL(n, Z)
//! into elementary words.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    a: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = BigInt::one();
        }
        IntMatrix { n, a }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("matrix must be square and nonempty"));
        }
        Ok(IntMatrix {
            n,
            a: rows.iter().flatten().map(|&x| BigInt::from(x)).collect(),
        })
    }

    /// `matrix <n>` followed by `n` rows of `n` integers; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut entries: Vec<BigInt> = Vec::new();
        let mut last_line = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if toks.len() != 2 || toks[0] != "matrix" {
                        return Err(Error::parse(line_no, "expected header `matrix <n>`"));
                    }
                    let d = toks[1]
                        .parse::<usize>()
                        .ok()
                        .filter(|&d| d >= 1)
                        .ok_or_else(|| Error::parse(line_no, "bad dimension"))?;
                    n = Some(d);
                }
                Some(d) => {
                    if toks.len() != d {
                        return Err(Error::parse(line_no, format!("expected {d} entries")));
                    }
                    if entries.len() >= d * d {
                        return Err(Error::parse(line_no, "too many rows"));
                    }
                    for t in toks {
                        entries.push(
                            t.parse::<BigInt>()
                                .map_err(|_| Error::parse(line_no, format!("bad integer {t:?}")))?,
                        );
                    }
                }
            }
        }
        let n = n.ok_or_else(|| Error::parse(1, "missing `matrix <n>` header"))?;
        if entries.len() != n * n {
            return Err(Error::parse(last_line, format!("expected {n} rows")));
        }
        Ok(IntMatrix { n, a: entries })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("matrix {}\n", self.n);
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.a[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.a.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut a = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let x = &self.a[i * n + k];
                if x.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let y = &other.a[k * n + j];
                    if !y.is_zero() {
                        a[i * n + j] += x * y;
                    }
                }
            }
        }
        IntMatrix { n, a }
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        let mut m = self.a.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if m[k * n + k].is_zero() {
                match (k + 1..n).find(|&r| !m[r * n + k].is_zero()) {
                    Some(r) => {
                        for j in 0..n {
                            m.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j]) / &prev;
                    m[i * n + j] = v;
                }
            }
            prev = m[k * n + k].clone();
        }
        sign * &m[n * n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Exact inverse of a matrix with determinant ±1.
    pub fn inverse(&self) -> Result<IntMatrix> {
        let n = self.n;
        let det = self.det();
        if !det.abs().is_one() {
            return Err(Error::input(format!("determinant {det} is not ±1")));
        }
        // Adjugate via cofactors; fine for the small dimensions used here.
        let mut a = vec![BigInt::zero(); n * n];
        if n == 1 {
            a[0] = det.clone();
            return Ok(IntMatrix { n, a });
        }
        for i in 0..n {
            for j in 0..n {
                let minor = IntMatrix {
                    n: n - 1,
                    a: (0..n)
                        .filter(|&r| r != j)
                        .flat_map(|r| (0..n).filter(|&c| c != i).map(move |c| (r, c)))
                        .map(|(r, c)| self.a[r * n + c].clone())
                        .collect(),
                };
                let cof = minor.det();
                let signed = if (i + j) % 2 == 0 { cof } else { -cof };
                a[i * n + j] = signed * &det;
            }
        }
        Ok(IntMatrix { n, a })
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.n)
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.a
            .chunks(self.n)
            .map(|r| r.iter().map(|x| x.to_i64()).collect())
            .collect()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .a
            .chunks(self.n)
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// `e_ij^λ`: the identity with `λ` at position `(i, j)`, indices 1-based.
pub fn elementary(n: usize, i: usize, j: usize, lambda: impl Into<BigInt>) -> Result<IntMatrix> {
    if i == j {
        return Err(Error::input(format!("elementary matrix needs i != j (got {i},{j})")));
    }
    if i == 0 || j == 0 || i > n || j > n {
        return Err(Error::input(format!("indices ({i},{j}) out of range 1..={n}")));
    }
    let mut m = IntMatrix::identity(n);
    m.a[(i - 1) * n + (j - 1)] = lambda.into();
    Ok(m)
}

fn commutator(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let ai = a.inverse().expect("elementary");
    let bi = b.inverse().expect("elementary");
    a.mul(b).mul(&ai).mul(&bi)
}

fn distinct_triple(n: usize, i: usize, j: usize, k: usize) -> Result<()> {
    if i == j || j == k || i == k {
        return Err(Error::input(format!("indices ({i},{j},{k}) must be pairwise distinct")));
    }
    if n < 3 {
        return Err(Error::input("needs n >= 3"));
    }
    for x in [i, j, k] {
        if x == 0 || x > n {
            return Err(Error::input(format!("index {x} out of range 1..={n}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub equal: bool,
    pub lhs: IntMatrix,
    pub rhs: IntMatrix,
}

/// `e_ik^λ e_kj^1 e_ik^-λ e_kj^-1 = e_ij^λ`.
pub fn verify_commutator_identity(n: usize, i: usize, j: usize, k: usize, lambda: i64) -> Result<IdentityCheck> {
    distinct_triple(n, i, j, k)?;
    let lhs = elementary(n, i, k, lambda)?
        .mul(&elementary(n, k, j, 1)?)
        .mul(&elementary(n, i, k, -lambda)?)
        .mul(&elementary(n, k, j, -1)?);
    let rhs = elementary(n, i, j, lambda)?;
    Ok(IdentityCheck { equal: lhs == rhs, lhs, rhs })
}

/// `[e_ik^2λ, e_kj^2] = e_ij^4λ = (e_ij^λ)^4`: the fourth power of `e_ij^λ`
/// is a commutator of squares, so it lies in `[H, H]` for every index-2
/// subgroup `H`.
pub fn verify_stubbornness(n: usize, i: usize, j: usize, k: usize, lambda: i64) -> Result<IdentityCheck> {
    distinct_triple(n, i, j, k)?;
    let lhs = commutator(&elementary(n, i, k, 2 * lambda)?, &elementary(n, k, j, 2)?);
    let e = elementary(n, i, j, lambda)?;
    let fourth = e.mul(&e).mul(&e).mul(&e);
    let rhs = elementary(n, i, j, 4 * lambda)?;
    Ok(IdentityCheck {
        equal: lhs == rhs && rhs == fourth,
        lhs,
        rhs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NilpotencyReport {
    pub sample_size: usize,
    pub checked: usize,
    pub failures: usize,
    pub first_failure: Option<[usize; 3]>,
}

/// Checks `[[a, b], c] = 1` for all `a, b, c` in the ball of radius `depth`
/// in `⟨e_ik^λ, e_kj^1⟩` for each `λ` in `lambdas`.
pub fn verify_nilpotent_b(n: usize, i: usize, j: usize, k: usize, lambdas: &[i64], depth: usize) -> Result<NilpotencyReport> {
    use crate::group::{enumerate_ball, MatrixGroup};
    distinct_triple(n, i, j, k)?;
    let mut sample: Vec<IntMatrix> = Vec::new();
    for &l in lambdas {
        let g = MatrixGroup::new(
            vec!["x".into(), "y".into()],
            vec![elementary(n, i, k, l)?, elementary(n, k, j, 1)?],
        )?;
        for (m, _) in enumerate_ball(&g, depth) {
            if !sample.contains(&m) {
                sample.push(m);
            }
        }
    }
    let mut checked = 0;
    let mut failures = 0;
    let mut first_failure = None;
    for (ia, a) in sample.iter().enumerate() {
        for (ib, b) in sample.iter().enumerate() {
            let ab = commutator(a, b);
            for (ic, c) in sample.iter().enumerate() {
                checked += 1;
                if !commutator(&ab, c).is_identity() {
                    failures += 1;
                    first_failure.get_or_insert([ia, ib, ic]);
                }
            }
        }
    }
    Ok(NilpotencyReport {
        sample_size: sample.len(),
        checked,
        failures,
        first_failure,
    })
}

/// A product `e_{i1 j1}^{λ1} e_{i2 j2}^{λ2} ...` with 1-based indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementaryWord {
    pub n: usize,
    pub factors: Vec<(usize, usize, BigInt)>,
}

impl ElementaryWord {
    pub fn eval(&self) -> Result<IntMatrix> {
        let mut m = IntMatrix::identity(self.n);
        for (i, j, l) in &self.factors {
            m = m.mul(&elementary(self.n, *i, *j, l.clone())?);
        }
        Ok(m)
    }

    /// Number of maximal runs of consecutive factors sharing `(i, j)`.
    pub fn block_count(&self) -> usize {
        let mut count = 0;
        let mut last = None;
        for (i, j, _) in &self.factors {
            if last != Some((*i, *j)) {
                count += 1;
                last = Some((*i, *j));
            }
        }
        count
    }

    /// True when every prefix product has determinant 1.
    pub fn partial_products_unimodular(&self) -> Result<bool> {
        let mut m = IntMatrix::identity(self.n);
        for (i, j, l) in &self.factors {
            m = m.mul(&elementary(self.n, *i, *j, l.clone())?);
            if !m.det().is_one() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Header `word <n>` then one `i j lambda` per line.
    pub fn to_text(&self) -> String {
        let mut s = format!("word {}\n", self.n);
        for (i, j, l) in &self.factors {
            s.push_str(&format!("{i} {j} {l}\n"));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut factors = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if toks.len() != 2 || toks[0] != "word" {
                        return Err(Error::parse(line_no, "expected header `word <n>`"));
                    }
                    n = Some(
                        toks[1]
                            .parse::<usize>()
                            .map_err(|_| Error::parse(line_no, "bad dimension"))?,
                    );
                }
                Some(d) => {
                    if toks.len() != 3 {
                        return Err(Error::parse(line_no, "expected `i j lambda`"));
                    }
                    let idx = |s: &str| -> Result<usize> {
                        s.parse::<usize>()
                            .ok()
                            .filter(|&x| x >= 1 && x <= d)
                            .ok_or_else(|| Error::parse(line_no, format!("bad index {s:?}")))
                    };
                    let (i, j) = (idx(toks[0])?, idx(toks[1])?);
                    if i == j {
                        return Err(Error::parse(line_no, "i and j must differ"));
                    }
                    let l = toks[2]
                        .parse::<BigInt>()
                        .map_err(|_| Error::parse(line_no, format!("bad integer {:?}", toks[2])))?;
                    factors.push((i, j, l));
                }
            }
        }
        let n = n.ok_or_else(|| Error::parse(1, "missing `word <n>` header"))?;
        Ok(ElementaryWord { n, factors })
    }
}

struct RowReducer {
    n: usize,
    m: Vec<Vec<BigInt>>,
    // Row operations applied so far, as (target, source, multiple).
    ops: Vec<(usize, usize, BigInt)>,
}

impl RowReducer {
    /// `row[target] += q * row[source]`, i.e. left multiplication by `e_{target,source}^q`.
    fn add(&mut self, target: usize, source: usize, q: BigInt) {
        if q.is_zero() {
            return;
        }
        let src = self.m[source].clone();
        for (x, s) in self.m[target].iter_mut().zip(&src) {
            *x += &q * s;
        }
        self.ops.push((target, source, q));
    }

    /// Replaces rows `(r, r+1)` by `(-r, -(r+1))` using six elementary steps.
    fn negate_pair(&mut self, r: usize) {
        for _ in 0..2 {
            self.add(r, r + 1, BigInt::one());
            self.add(r + 1, r, -BigInt::one());
            self.add(r, r + 1, BigInt::one());
        }
    }

    fn reduce_column(&mut self, c: usize) {
        let n = self.n;
        // Euclid on rows c.. until a single nonzero entry remains.
        loop {
            let live: Vec<usize> = (c..n).filter(|&r| !self.m[r][c].is_zero()).collect();
            if live.len() <= 1 {
                break;
            }
            let p = *live
                .iter()
                .min_by(|&&a, &&b| self.m[a][c].abs().cmp(&self.m[b][c].abs()).then(a.cmp(&b)))
                .unwrap();
            for r in live {
                if r != p {
                    let q = &self.m[r][c] / &self.m[p][c];
                    self.add(r, p, -q);
                }
            }
        }
        let p = (c..n)
            .find(|&r| !self.m[r][c].is_zero())
            .expect("unimodular matrices have a nonzero pivot");
        if p != c {
            self.add(c, p, BigInt::one());
            let q = &self.m[p][c] / &self.m[c][c];
            self.add(p, c, -q);
        }
        if self.m[c][c].is_negative() && c + 1 < n {
            self.negate_pair(c);
        }
        for r in 0..n {
            if r != c && !self.m[r][c].is_zero() {
                let q = &self.m[r][c] * &self.m[c][c];
                self.add(r, c, -q);
            }
        }
    }
}

/// Writes a determinant-1 matrix of size at least 3 as a product of
/// elementary matrices by Euclidean row reduction.
pub fn decompose_elementary(m: &IntMatrix) -> Result<ElementaryWord> {
    let n = m.dim();
    if n == 2 {
        return Err(Error::Unsupported(
            "decomposition is implemented for n >= 3 only".into(),
        ));
    }
    if n < 2 {
        return Err(Error::input("matrix must be at least 3x3"));
    }
    let det = m.det();
    if !det.is_one() {
        return Err(Error::input(format!("determinant is {det}, not 1")));
    }
    let mut red = RowReducer {
        n,
        m: m.rows(),
        ops: Vec::new(),
    };
    for c in 0..n {
        red.reduce_column(c);
    }
    debug_assert!(red.m.iter().enumerate().all(|(i, r)| r
        .iter()
        .enumerate()
        .all(|(j, x)| *x == BigInt::from(i64::from(i == j)))));
    // E_k ... E_1 m = I, so m = E_1^-1 ... E_k^-1.
    let factors = red
        .ops
        .into_iter()
        .map(|(t, s, q)| (t + 1, s + 1, -q))
        .collect();
    Ok(ElementaryWord { n, factors })
}

/// Greatest common divisor of a row, a convenience for tests and reports.
pub fn row_gcd(row: &[BigInt]) -> BigInt {
    row.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_basics() {
        assert!(elementary(3, 1, 2, 0).unwrap().is_identity());
        let a = elementary(3, 1, 2, 5).unwrap();
        let b = elementary(3, 1, 2, -5).unwrap();
        assert!(a.mul(&b).is_identity());
        assert_eq!(
            elementary(2, 1, 2, 1).unwrap(),
            IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap()
        );
        assert!(elementary(3, 2, 2, 1).is_err());
        assert!(elementary(3, 1, 4, 1).is_err());
    }

    #[test]
    fn determinant_and_inverse() {
        let m = IntMatrix::from_rows(&[vec![2, 3, 1], vec![1, 2, 0], vec![0, 0, 1]]).unwrap();
        assert_eq!(m.det(), BigInt::one());
        assert!(m.mul(&m.inverse().unwrap()).is_identity());
        let s = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(s.det(), BigInt::from(-1));
        assert!(IntMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).unwrap().inverse().is_err());
    }

    #[test]
    fn identities_on_named_cases() {
        assert!(verify_commutator_identity(3, 1, 2, 3, 1).unwrap().equal);
        let z = verify_commutator_identity(3, 1, 2, 3, 0).unwrap();
        assert!(z.equal && z.lhs.is_identity());
        assert!(verify_commutator_identity(4, 1, 3, 2, -7).unwrap().equal);
        assert!(verify_stubbornness(3, 1, 2, 3, 1).unwrap().equal);
        assert!(verify_stubbornness(5, 2, 5, 4, 12).unwrap().equal);
        assert!(verify_commutator_identity(3, 1, 1, 2, 1).is_err());
    }

    #[test]
    fn heisenberg_pattern_is_class_two() {
        let r = verify_nilpotent_b(3, 1, 2, 3, &[1, 2], 2).unwrap();
        assert_eq!(r.failures, 0);
        assert!(r.sample_size > 10);
        let r = verify_nilpotent_b(4, 2, 4, 1, &[3], 2).unwrap();
        assert_eq!(r.failures, 0);
    }

    #[test]
    fn decomposition_edge_cases() {
        let w = decompose_elementary(&IntMatrix::identity(3)).unwrap();
        assert!(w.factors.is_empty());
        assert_eq!(w.block_count(), 0);
        let e = elementary(3, 1, 2, 5).unwrap();
        let w = decompose_elementary(&e).unwrap();
        assert_eq!(w.factors, vec![(1, 2, BigInt::from(5))]);
        assert!(matches!(
            decompose_elementary(&IntMatrix::identity(2)),
            Err(Error::Unsupported(_))
        ));
        let bad = IntMatrix::from_rows(&[vec![2, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        assert!(matches!(decompose_elementary(&bad), Err(Error::Input(_))));
    }

    #[test]
    fn decomposition_handles_sign_fixes() {
        let m = IntMatrix::from_rows(&[vec![-1, 0, 0], vec![0, -1, 0], vec![0, 0, 1]]).unwrap();
        let w = decompose_elementary(&m).unwrap();
        assert_eq!(w.eval().unwrap(), m);
        let m = IntMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]).unwrap();
        let w = decompose_elementary(&m).unwrap();
        assert_eq!(w.eval().unwrap(), m);
        assert!(w.partial_products_unimodular().unwrap());
    }

    #[test]
    fn block_count_merges_runs() {
        let w = ElementaryWord {
            n: 3,
            factors: vec![
                (1, 2, BigInt::from(1)),
                (1, 2, BigInt::from(3)),
                (2, 1, BigInt::from(1)),
                (1, 2, BigInt::from(1)),
            ],
        };
        assert_eq!(w.block_count(), 3);
        let back = ElementaryWord::parse(&w.to_text()).unwrap();
        assert_eq!(back, w);
    }
}
