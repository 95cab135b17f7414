//! Orbit-bound certificates for quasi-actions of boundedly generated groups
//! whose generating tuple quasi-acts elliptically.

use num_traits::{One, Zero};

use crate::coarse::{
    ball_generating_set, cayley_window, classify_element, embedding_constants, graph_diameter, ElementKind,
    MetricSpace, QuasiActionTable,
};
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Group, Word};
use crate::rational::Q;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorRadius {
    pub name: String,
    pub kind: ElementKind,
    /// `max d(p, g^m p)` over `|m| <= m_window`.
    pub radius: Q,
}

#[derive(Debug, Clone)]
pub struct QfaCertificate<G: Group> {
    pub generators: Vec<GeneratorRadius>,
    pub m_window: i64,
    pub classify_n: usize,
    pub d: Q,
    pub threshold: Q,
    pub r: Q,
    /// `{g : d(gp, p) <= R}` within the word ball of radius `s_depth`.
    pub s: Vec<(G::Elem, Word)>,
    /// `2 (depth + 1)`, so `S` reaches every difference of two window elements.
    pub s_depth: usize,
    pub depth: usize,
    /// Diameters of the `S`-window at `depth` and `depth + 1`.
    pub diameters: [Q; 2],
    pub window_sizes: [usize; 2],
    /// `KR + 2C`.
    pub edge_bound: Q,
    pub orbit_diameter_bound: Q,
    /// `max d(gp, hp)` over the word ball of radius `depth`.
    pub measured_orbit_diameter: Q,
}

/// Refuses unless every tuple element is classified elliptic; then picks
/// `R` above every orbit radius and above the embedding threshold, forms `S`,
/// and bounds the orbit by the stabilized `S`-diameter times `KR + 2C`.
pub fn qfa_certificate<G: Group, X: MetricSpace>(
    t: &QuasiActionTable<G, X>,
    p: &X::Point,
    tuple: &[Word],
    m_window: i64,
    depth: usize,
    classify_n: usize,
) -> Result<QfaCertificate<G>> {
    if tuple.is_empty() {
        return Err(Error::input("empty generating tuple"));
    }
    if m_window < 1 || depth < 1 {
        return Err(Error::input("need m_window >= 1 and depth >= 1"));
    }
    let mut generators = Vec::new();
    for w in tuple {
        let name = t.word_name(w);
        let class = classify_element(t, w, p, classify_n)?;
        if class.kind != ElementKind::Elliptic {
            return Err(Error::contract(format!(
                "generator {name} is {}; the orbit-bound pipeline needs elliptic generators",
                class.kind.as_str()
            )));
        }
        let g = t.group.eval(w);
        let mut radius = Q::zero();
        for m in -m_window..=m_window {
            radius = radius.max(t.displacement(&t.group.pow(&g, m), p)?);
        }
        generators.push(GeneratorRadius {
            name,
            kind: class.kind,
            radius,
        });
    }
    let (d, threshold) = embedding_constants(t, p)?;
    let top = generators.iter().map(|g| g.radius).max().unwrap();
    let r = (top + Q::one()).max(threshold);
    let s_depth = 2 * (depth + 1);
    let s = ball_generating_set(t, p, r, s_depth)?;
    let edge_bound = t.claimed_k * r + Q::from_integer(2) * t.claimed_c;
    let (diameters, window_sizes) = window_diameters(&t.group, &s, depth)?;
    if diameters[0] != diameters[1] {
        return Err(Error::contract(format!(
            "S-diameter still grows between depths {depth} and {}: {} < {}",
            depth + 1,
            diameters[0],
            diameters[1]
        )));
    }
    let orbit: Vec<X::Point> = enumerate_ball(&t.group, depth)
        .iter()
        .map(|(g, _)| t.apply(g, p))
        .collect::<Result<_>>()?;
    let mut measured = Q::zero();
    for (i, a) in orbit.iter().enumerate() {
        for b in &orbit[i + 1..] {
            measured = measured.max(t.space.dist(a, b));
        }
    }
    Ok(QfaCertificate {
        generators,
        m_window,
        classify_n,
        d,
        threshold,
        r,
        s,
        s_depth,
        depth,
        orbit_diameter_bound: diameters[0] * edge_bound,
        diameters,
        window_sizes,
        edge_bound,
        measured_orbit_diameter: measured,
    })
}

fn window_diameters<G: Group>(group: &G, s: &[(G::Elem, Word)], depth: usize) -> Result<([Q; 2], [usize; 2])> {
    let elems: Vec<G::Elem> = s.iter().map(|(g, _)| g.clone()).collect();
    let a = cayley_window(group, &elems, depth)?;
    let b = cayley_window(group, &elems, depth + 1)?;
    Ok((
        [graph_diameter(&a.graph), graph_diameter(&b.graph)],
        [a.elements.len(), b.elements.len()],
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateCheck {
    pub recomputed_bound: Q,
    pub matches: bool,
    /// Every stored radius lies strictly below `R`.
    pub r_dominates: bool,
    pub s_moves_within_r: bool,
}

/// Recomputes the bound from the stored `S` and depth alone.
pub fn validate_certificate<G: Group, X: MetricSpace>(
    cert: &QfaCertificate<G>,
    t: &QuasiActionTable<G, X>,
    p: &X::Point,
) -> Result<CertificateCheck> {
    let (diameters, _) = window_diameters(&t.group, &cert.s, cert.depth)?;
    let edge_bound = t.claimed_k * cert.r + Q::from_integer(2) * t.claimed_c;
    let recomputed_bound = diameters[0] * edge_bound;
    let mut s_moves_within_r = true;
    for (g, w) in &cert.s {
        s_moves_within_r &= t.group.eval(w) == *g && t.displacement(g, p)? <= cert.r;
    }
    Ok(CertificateCheck {
        recomputed_bound,
        matches: recomputed_bound == cert.orbit_diameter_bound && diameters == cert.diameters,
        r_dominates: cert.generators.iter().all(|g| g.radius < cert.r),
        s_moves_within_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coarse::RealLine;
    use crate::group::FreeAbelian;
    use crate::rational::q;

    #[test]
    fn trivial_action_gives_r_one() {
        let t = QuasiActionTable::new(FreeAbelian::new(2), RealLine, |_: &Vec<i64>, x: &Q| Some(*x), q(1), q(0))
            .unwrap();
        let tuple = [Word::generator(0), Word::generator(1)];
        let cert = qfa_certificate(&t, &q(0), &tuple, 8, 3, 16).unwrap();
        assert_eq!(cert.r, q(1));
        assert_eq!(cert.diameters[0], q(1));
        assert_eq!(cert.orbit_diameter_bound, q(1));
        let check = validate_certificate(&cert, &t, &q(0)).unwrap();
        assert!(check.matches && check.r_dominates && check.s_moves_within_r);
    }

    #[test]
    fn translation_generator_is_refused() {
        let t = QuasiActionTable::new(
            FreeAbelian::new(2),
            RealLine,
            |g: &Vec<i64>, x: &Q| Some(x + q(g[1])),
            q(1),
            q(0),
        )
        .unwrap();
        let tuple = [Word::generator(0), Word::generator(1)];
        let err = qfa_certificate(&t, &q(0), &tuple, 8, 3, 16).unwrap_err();
        assert!(err.is_contract());
        assert!(err.to_string().contains("generator b"));
    }
}
