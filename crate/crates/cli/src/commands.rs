use std::collections::BTreeMap;

use num_bigint::BigInt;
use qfa_core::arith::{
    decompose_elementary, verify_commutator_identity, verify_nilpotent_b, verify_stubbornness, ElementaryWord, IntMatrix,
};
use qfa_core::coarse::{
    ball_generating_set, build_cayley_ball, classify_element, embedding_constants, graph_diameter,
    verify_embedding_bounds, verify_propz_claim, verify_quasi_action, MetricSpace, QuasiActionTable,
};
use qfa_core::corpus::{random_elementary_word, random_tree, rng};
use qfa_core::group::{enumerate_ball, FreeAbelian, Group, MatrixGroup, Word};
use qfa_core::pseudochar::{
    extend_index2, extract_end_fixing, homogenize, measured_epsilon, parse_integer_table, reflection_action,
    straighten_to_line, ExtractionConfig, Index2Extension, OrbitGraph, Quasicharacter, StraighteningCheck,
};
use qfa_core::qfa::{qfa_certificate, validate_certificate};
use qfa_core::rational::{parse_rational, q};
use qfa_core::tree::{check_bushy, check_bushy_uniform, free_subgroup_witness, Bushiness, EndLabel, PingPong, TreeIsometry};
use qfa_core::{Error, MetricGraph, Result, Q};
use serde_json::{json, Value};

use crate::action::{self, with_action};
use crate::report::{qlist, qopt, qv, Report};
use crate::{
    in_file, read, BushyArgs, CayleyArgs, ClassifyArgs, DecomposeArgs, DeltaArgs, Extend2Args, IdentitiesArgs, PingpongArgs,
    PropzArgs, PseudocharArgs, QfaCertArgs, ReflectArgs, StraightenArgs,
};

fn graph_file(path: &std::path::Path) -> Result<MetricGraph> {
    in_file(path, MetricGraph::parse(&read(path)?))
}

fn rational(s: &str, what: &str) -> Result<Q> {
    parse_rational(s).map_err(|_| Error::input(format!("bad {what} {s:?}")))
}

fn table_file(path: &std::path::Path) -> Result<BTreeMap<i64, Q>> {
    in_file(path, parse_integer_table(&read(path)?))
}

pub fn delta(a: &DeltaArgs, seed: u64) -> Result<Report> {
    let graph = match (&a.input, a.random_tree) {
        (Some(path), None) => graph_file(path)?,
        (None, Some(n)) if n >= 1 => random_tree(&mut rng(seed), n),
        (None, Some(_)) => return Err(Error::input("a random tree needs at least one vertex")),
        _ => return Err(Error::input("give --input or --random-tree")),
    };
    let g = graph.subdivide(a.subdivide)?;
    let method = a.method.as_str();
    if !["all", "four-point", "tripod", "bottleneck"].contains(&method) {
        return Err(Error::input(format!("unknown method {method:?}")));
    }
    let mut out = json!({
        "vertices": g.vertex_count(),
        "edges": g.edges().len(),
        "is_tree": g.is_tree(),
        "subdivide": a.subdivide,
    });
    let o = out.as_object_mut().unwrap();
    if matches!(method, "all" | "four-point") {
        let r = g.four_point_delta(None)?;
        o.insert("four_point_delta".into(), qv(&r.delta));
        o.insert("four_point_witness".into(), json!(r.witness));
    }
    if matches!(method, "all" | "tripod") {
        let r = g.tripod_delta();
        o.insert("tripod_delta".into(), qv(&r.delta));
        o.insert(
            "tripod_witness".into(),
            r.witness.map_or(Value::Null, |w| json!({ "triangle": w.triangle, "pair": w.pair })),
        );
    }
    if matches!(method, "all" | "bottleneck") {
        let r = g.bottleneck_delta();
        o.insert("bottleneck_delta".into(), qv(&r.delta));
        o.insert("bottleneck_witness".into(), json!(r.witness));
    }
    Ok(Report::Done(out))
}

fn constants<G: Group, X: MetricSpace>(t: &QuasiActionTable<G, X>, p: &X::Point) -> Value {
    json!({ "K": qv(&t.claimed_k), "C": qv(&t.claimed_c), "base_point": t.space.describe(p) })
}

fn classify_with<G: Group, X: MetricSpace>(t: &QuasiActionTable<G, X>, p: &X::Point, a: &ClassifyArgs) -> Result<Report> {
    let elements = match &a.element {
        Some(list) => action::words(&t.group, list)?,
        None => (0..t.group.generators().len()).map(Word::generator).collect(),
    };
    let mut out = Vec::new();
    for w in &elements {
        let c = classify_element(t, w, p, a.window)?;
        out.push(json!({
            "element": t.word_name(w),
            "kind": c.kind.as_str(),
            "rate": qopt(&c.rate),
            "slope": qopt(&c.slope),
            "slope_threshold": qv(&c.slope_threshold),
            "max_first_half": qv(&c.max_first_half),
            "max_overall": qv(&c.max_overall),
            "displacements": qlist(&c.displacements),
        }));
    }
    Ok(Report::Done(json!({
        "action": constants(t, p),
        "window": a.window,
        "elements": out,
    })))
}

pub fn classify(a: &ClassifyArgs) -> Result<Report> {
    let loaded = action::load(&a.input, a.point.as_deref())?;
    with_action!(loaded, t, p => classify_with(&t, &p, a))
}

fn cayley_with<G: Group, X: MetricSpace>(
    t: &QuasiActionTable<G, X>,
    p: &X::Point,
    a: &CayleyArgs,
    embed: bool,
) -> Result<Report> {
    let (d, threshold) = embedding_constants(t, p)?;
    let r = match &a.radius {
        Some(s) => rational(s, "radius")?,
        None => threshold + Q::from_integer(1),
    };
    let s = ball_generating_set(t, p, r, a.s_depth)?;
    let elems: Vec<G::Elem> = s.iter().map(|(g, _)| g.clone()).collect();
    let s_words: Vec<String> = s.iter().map(|(_, w)| t.word_name(w)).collect();
    let ball = build_cayley_ball(&t.group, &elems, a.depth)?;
    let mut out = json!({
        "action": constants(t, p),
        "R": qv(&r),
        "D": qv(&d),
        "threshold": qv(&threshold),
        "S": s_words,
        "s_depth": a.s_depth,
        "depth": a.depth,
        "ball_vertices": ball.elements.len(),
        "ball_edges": ball.graph.edges().len(),
    });
    let o = out.as_object_mut().unwrap();
    if embed {
        let e = verify_embedding_bounds(&ball, t, p, r, d)?;
        o.insert(
            "embedding".into(),
            json!({
                "pairs_checked": e.pairs_checked,
                "upper_factor": qv(&e.upper_factor),
                "lower_factor": qv(&e.d),
                "upper_violations": e.upper_violations,
                "lower_violations": e.lower_violations,
                "lower_degenerate": e.lower_degenerate,
                "upper_slack": qopt(&e.upper_slack),
                "lower_slack": qopt(&e.lower_slack),
                "first_violation": e.first_violation,
                "r_above_threshold": r > threshold,
            }),
        );
    } else {
        let next = build_cayley_ball(&t.group, &elems, a.depth + 1)?;
        let diameters = [graph_diameter(&ball.graph), graph_diameter(&next.graph)];
        o.insert("diameters".into(), qlist(&diameters));
        o.insert("diameter_stable".into(), json!(diameters[0] == diameters[1]));
    }
    Ok(Report::Done(out))
}

pub fn cayley(a: &CayleyArgs, embed: bool) -> Result<Report> {
    let loaded = action::load(&a.input, a.point.as_deref())?;
    with_action!(loaded, t, p => cayley_with(&t, &p, a, embed))
}

pub fn propz(a: &PropzArgs) -> Result<Report> {
    let mut s = Vec::new();
    for tok in a.generators.split(',') {
        let x: i64 = tok
            .trim()
            .parse()
            .map_err(|_| Error::input(format!("bad generator {tok:?}")))?;
        s.extend([x, -x]);
    }
    s.sort_unstable();
    s.dedup();
    let r = verify_propz_claim(&s, a.n, a.k_max, a.window, a.delta_window)?;
    Ok(Report::Done(json!({
        "generators": r.generators,
        "window": r.window,
        "delta_window": r.delta_window,
        "delta_hat": qv(&r.delta_hat),
        "n": r.n,
        "n_norm": r.n_norm,
        "precondition_met": r.precondition_met,
        "d_k": r.d_k,
        "claim_holds": r.claim_holds,
        "first_failure": r.first_failure,
        "generator_bound": qopt(&r.generator_bound),
        "max_generator": r.max_generator,
        "bound_holds": r.bound_holds,
    })))
}

fn check_json(c: &StraighteningCheck) -> Value {
    json!({
        "pairs_checked": c.pairs_checked,
        "sandwich_bound": qv(&c.sandwich_bound),
        "sandwich_worst": qv(&c.sandwich_worst),
        "sandwich_violations": c.sandwich_violations,
        "first_violation": c.first_violation,
        "level_bound": qv(&c.level_bound),
        "zero_level_bound": qv(&c.zero_level_bound),
        "widest_level": c.widest_level.map(|(v, d)| json!({ "value": qv(&v), "diameter": qv(&d) })),
        "zero_level_diameter": qv(&c.zero_level_diameter),
        "level_violations": c.level_violations,
        "ok": c.ok,
    })
}

pub fn straighten(a: &StraightenArgs) -> Result<Report> {
    let graph = graph_file(&a.input)?;
    let table = table_file(&a.map)?;
    let n = graph.vertex_count();
    let mut rho = Vec::with_capacity(n);
    for v in 0..n {
        rho.push(
            *table
                .get(&(v as i64))
                .ok_or_else(|| Error::input(format!("map has no value for vertex {v}")))?,
        );
    }
    if let Some((&k, _)) = table.iter().find(|(&k, _)| k < 0 || k >= n as i64) {
        return Err(Error::input(format!("map names vertex {k}, graph has {n}")));
    }
    let r = rational(&a.r, "R")?;
    let (epsilon, source) = match &a.epsilon {
        Some(s) => (rational(s, "epsilon")?, "given"),
        None => (measured_epsilon(&graph, &rho, r)?.0, "measured"),
    };
    let s = straighten_to_line(&graph, &rho, r, epsilon)?;
    let check = s.verify(&graph);
    let scaled = s.verify_scaled(&graph);
    Ok(Report::Done(json!({
        "R": qv(&r),
        "epsilon": qv(&epsilon),
        "epsilon_source": source,
        "epsilon_affine": qv(&s.epsilon_affine),
        "straightened": qlist(&s.straightened),
        "zero_set": {
            "vertices": s.zero_set.vertices,
            "crossings": s.zero_set.crossings.iter()
                .map(|c| json!({ "u": c.u, "v": c.v, "t": qv(&c.t) }))
                .collect::<Vec<_>>(),
        },
        "positive_side": s.p_side,
        "negative_side": s.m_side,
        "check": check_json(&check),
        "check_at_r_epsilon": check_json(&scaled),
    })))
}

fn quasicharacter_json<K: Ord>(qc: &Quasicharacter<K>, describe: impl Fn(&K) -> String, with_values: bool) -> Value {
    let mut out = json!({
        "entries": qc.values.len(),
        "defect": qv(&qc.measured_defect),
        "defect_witness": qc.defect_witness.as_ref().map(|(x, y)| json!([describe(x), describe(y)])),
        "homogeneous": qc.homogeneous,
    });
    if with_values {
        let values: Vec<Value> = qc.values.iter().map(|(k, v)| json!([describe(k), qv(v)])).collect();
        out.as_object_mut().unwrap().insert("values".into(), json!(values));
    }
    out
}

fn extract_with<G: Group, X: OrbitGraph>(t: &QuasiActionTable<G, X>, p: &X::Point, a: &PseudocharArgs) -> Result<Report> {
    let pi = Word::parse(a.pi.as_deref().unwrap_or_default(), t.group.names())?;
    let sample = match &a.sample {
        Some(list) => action::words(&t.group, list)?,
        None => (0..t.group.generators().len()).map(Word::generator).collect(),
    };
    let config = ExtractionConfig {
        n: a.window,
        window_start: a.conj_start,
        window_len: a.conj_len,
        ..ExtractionConfig::default()
    };
    let ex = extract_end_fixing(t, p, &pi, &sample, &config)?;
    let values: Vec<Value> = ex
        .values
        .iter()
        .map(|v| {
            json!({
                "element": v.element,
                "kind": v.kind.as_str(),
                "chi_zero": qv(&v.chi_zero),
                "chi": qv(&v.chi),
                "chi_shifted": qv(&v.chi_shifted),
                "chi_bar": qv(&v.chi_bar),
                "plateau": v.plateau,
                "error_bar": qv(&v.error_bar),
            })
        })
        .collect();
    Ok(Report::Done(json!({
        "mode": "extraction",
        "action": constants(t, p),
        "pi": ex.pi,
        "n": ex.config.n,
        "conj_window": [ex.config.window_start, ex.config.window_start + ex.config.window_len],
        "horizon": ex.horizon,
        "orbit_points": ex.orbit_points,
        "epsilon": qv(&ex.epsilon),
        "values": values,
        "chi": quasicharacter_json(&ex.chi, |g| t.group.describe(g), true),
        "chi_defect": qv(&ex.chi_defect),
        "elliptic_zero_check": ex.elliptic_zero_check,
        "hyperbolic_nonzero_check": ex.hyperbolic_nonzero_check,
        "window_stable": ex.window_stable,
        "exhausted": ex.exhausted,
    })))
}

pub fn pseudochar(a: &PseudocharArgs) -> Result<Report> {
    if let Some(path) = &a.input {
        let loaded = action::load(path, a.point.as_deref())?;
        return with_action!(loaded, t, p => extract_with(&t, &p, a));
    }
    let Some(path) = &a.table else {
        return Err(Error::input("give --table or --input with --pi"));
    };
    let values = table_file(path)?;
    let qc = Quasicharacter::on_integers(values.clone());
    let mut out = json!({ "mode": "table", "quasicharacter": quasicharacter_json(&qc, |n| n.to_string(), false) });
    if let Some(n) = a.element {
        let h = homogenize(|k| values.get(&(n * k as i64)).copied(), a.window, qc.measured_defect)?;
        out.as_object_mut().unwrap().insert(
            "homogenized".into(),
            json!({
                "element": n,
                "n": h.n,
                "value": qv(&h.value),
                "error_bar": qv(&h.error_bar),
                "base_value": qv(&h.base_value),
                "deviation": qv(&h.deviation),
                "within_defect": h.within_defect,
            }),
        );
    }
    Ok(Report::Done(out))
}

fn dihedral() -> Result<MatrixGroup> {
    let r = IntMatrix::from_rows(&[vec![1, 1], vec![0, 1]])?;
    let t = IntMatrix::from_rows(&[vec![-1, 0], vec![0, 1]])?;
    MatrixGroup::new(vec!["r".into(), "t".into()], vec![r, t])
}

/// `x -> eps x + k` as `[[eps, k], [0, 1]]`.
fn affine(eps: i64, k: i64) -> Result<IntMatrix> {
    IntMatrix::from_rows(&[vec![eps, k], vec![0, 1]])
}

fn is_rotation(m: &IntMatrix) -> bool {
    m.to_i64_rows().is_some_and(|r| r[0][0] == 1)
}

fn extension_json<G: Group>(group: &G, ext: &Index2Extension<G::Elem>) -> Value {
    match ext {
        Index2Extension::Extended {
            fbar,
            pairs_checked,
            f_defect,
            f_t_squared,
            bound,
            bound_holds,
        } => json!({
            "case": "extended",
            "fbar": quasicharacter_json(fbar, |g| group.describe(g), false),
            "pairs_checked": pairs_checked,
            "f_defect": qv(f_defect),
            "f_t_squared": qv(f_t_squared),
            "bound": qv(bound),
            "bound_holds": bound_holds,
        }),
        Index2Extension::Twisted {
            f_t,
            antisymmetry_checked,
            antisymmetry_gap,
            antisymmetric,
        } => json!({
            "case": "twisted",
            "f_t": quasicharacter_json(f_t, |g| group.describe(g), true),
            "antisymmetry_checked": antisymmetry_checked,
            "antisymmetry_gap": qv(antisymmetry_gap),
            "antisymmetric": antisymmetric,
        }),
    }
}

pub fn extend2(a: &Extend2Args) -> Result<Report> {
    let table = table_file(&a.table)?;
    let near = |k: i64| k.abs() <= a.sample_radius;
    match a.group.as_str() {
        "z" => {
            let z = FreeAbelian::new(1);
            let f: BTreeMap<Vec<i64>, Q> = table.iter().map(|(&k, &v)| (vec![k], v)).collect();
            let sample: Vec<Vec<i64>> = table.keys().filter(|&&k| near(k)).map(|&k| vec![k]).collect();
            let ext = extend_index2(&z, |x: &Vec<i64>| x[0] % 2 == 0, &f, &vec![a.t], &sample)?;
            Ok(Report::Done(json!({ "group": "z", "t": a.t, "extension": extension_json(&z, &ext) })))
        }
        "dihedral" => {
            let g = dihedral()?;
            let mut f = BTreeMap::new();
            for (&k, &v) in &table {
                f.insert(affine(1, k)?, v);
            }
            let sample: Vec<IntMatrix> = table
                .keys()
                .filter(|&&k| near(k))
                .map(|&k| affine(1, k))
                .collect::<Result<_>>()?;
            let ext = extend_index2(&g, is_rotation, &f, &affine(-1, a.t)?, &sample)?;
            Ok(Report::Done(json!({ "group": "dihedral", "t": a.t, "extension": extension_json(&g, &ext) })))
        }
        other => Err(Error::input(format!("unknown group {other:?}; use z or dihedral"))),
    }
}

pub fn reflect(a: &ReflectArgs) -> Result<Report> {
    let table = table_file(&a.table)?;
    let g = dihedral()?;
    let mut f_t = BTreeMap::new();
    for (&k, &v) in &table {
        f_t.insert(affine(1, k)?, v);
    }
    let refl = reflection_action(g.clone(), is_rotation, f_t, affine(-1, a.t)?)?;
    let f_t_defect = refl.f_t_defect;
    let words = enumerate_ball(&g, a.depth).into_iter().map(|(_, w)| w).collect();
    let table = refl.table.with_sample(words, (-a.points..=a.points).map(q).collect());
    let qa = verify_quasi_action(&table)?;
    Ok(Report::Done(json!({
        "t": a.t,
        "K": qv(&table.claimed_k),
        "C": qv(&table.claimed_c),
        "f_t_defect": qv(&f_t_defect),
        "depth": a.depth,
        "points": 2 * a.points + 1,
        "quasi_action": {
            "ok": qa.ok,
            "qi_constant": qv(&qa.qi_constant),
            "qi_witness": qa.qi_witness,
            "defect": qv(&qa.defect),
            "defect_witness": qa.defect_witness,
            "triples_checked": qa.triples_checked,
        },
    })))
}

fn matrix_rows(m: &IntMatrix) -> Value {
    json!(m
        .rows()
        .iter()
        .map(|r| r.iter().map(BigInt::to_string).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn word_json(w: &ElementaryWord) -> Value {
    json!(w.factors.iter().map(|(i, j, l)| json!([i, j, l.to_string()])).collect::<Vec<_>>())
}

pub fn identities(a: &IdentitiesArgs) -> Result<Report> {
    if let Some(path) = &a.eval {
        let w = in_file(path, ElementaryWord::parse(&read(path)?))?;
        let m = w.eval()?;
        return Ok(Report::Done(json!({
            "mode": "eval",
            "n": w.n,
            "factors": w.factors.len(),
            "blocks": w.block_count(),
            "matrix": matrix_rows(&m),
            "det": m.det().to_string(),
            "partial_products_unimodular": w.partial_products_unimodular()?,
        })));
    }
    let n = a.n;
    if n < 3 {
        return Err(Error::Unsupported(format!("the identities need n >= 3, got {n}")));
    }
    if a.lambda_max < 0 {
        return Err(Error::input("lambda-max must be nonnegative"));
    }
    let mut triples = 0;
    let mut checked = 0;
    let mut failures = [0usize; 2];
    let mut first: [Option<Value>; 2] = [None, None];
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=n {
                if i == j || j == k || i == k {
                    continue;
                }
                triples += 1;
                for lambda in -a.lambda_max..=a.lambda_max {
                    checked += 1;
                    let results = [
                        verify_commutator_identity(n, i, j, k, lambda)?.equal,
                        verify_stubbornness(n, i, j, k, lambda)?.equal,
                    ];
                    for (slot, ok) in results.iter().enumerate() {
                        if !ok {
                            failures[slot] += 1;
                            first[slot].get_or_insert(json!([i, j, k, lambda]));
                        }
                    }
                }
            }
        }
    }
    let lambdas: Vec<i64> = if a.lambda_max > 1 { vec![1, a.lambda_max] } else { vec![1] };
    let nil = verify_nilpotent_b(n, 1, 2, 3, &lambdas, a.nilpotent_depth)?;
    Ok(Report::Done(json!({
        "mode": "identities",
        "n": n,
        "lambda_max": a.lambda_max,
        "triples": triples,
        "checked": checked,
        "failures": failures[0] + failures[1],
        "commutator": { "failures": failures[0], "first_failure": first[0] },
        "stubbornness": { "failures": failures[1], "first_failure": first[1] },
        "nilpotent_b": {
            "indices": [1, 2, 3],
            "lambdas": lambdas,
            "depth": a.nilpotent_depth,
            "sample_size": nil.sample_size,
            "checked": nil.checked,
            "failures": nil.failures,
            "first_failure": nil.first_failure,
        },
    })))
}

pub fn decompose(a: &DecomposeArgs, seed: u64) -> Result<Report> {
    let m = match (&a.input, a.random_length) {
        (Some(path), None) => in_file(path, IntMatrix::parse(&read(path)?))?,
        (None, Some(len)) => random_elementary_word(&mut rng(seed), a.n, len).eval()?,
        _ => return Err(Error::input("give --input or --random-length")),
    };
    let w = decompose_elementary(&m)?;
    let back = w.eval()?;
    if let Some(path) = &a.word_out {
        std::fs::write(path, w.to_text()).map_err(|e| Error::input(format!("{}: {e}", path.display())))?;
    }
    Ok(Report::Done(json!({
        "n": w.n,
        "input": matrix_rows(&m),
        "factors": w.factors.len(),
        "blocks": w.block_count(),
        "word": word_json(&w),
        "round_trip": back == m,
        "partial_products_unimodular": w.partial_products_unimodular()?,
    })))
}

fn qfa_with<G: Group, X: MetricSpace>(t: &QuasiActionTable<G, X>, p: &X::Point, a: &QfaCertArgs) -> Result<Report> {
    let tuple = action::words(&t.group, &a.tuple)?;
    let cert = match qfa_certificate(t, p, &tuple, a.window, a.depth, a.classify_n) {
        Ok(c) => c,
        Err(Error::Contract(msg)) => {
            // Name the offending generator separately so callers need not parse prose.
            let mut offending = Value::Null;
            for w in &tuple {
                let c = classify_element(t, w, p, a.classify_n)?;
                if c.kind != qfa_core::coarse::ElementKind::Elliptic {
                    offending = json!({ "generator": t.word_name(w), "kind": c.kind.as_str() });
                    break;
                }
            }
            let code = if offending.is_null() { "diameter_not_stable" } else { "non_elliptic_generator" };
            return Ok(Report::Refused(json!({ "code": code, "reason": msg, "offending": offending })));
        }
        Err(e) => return Err(e),
    };
    let check = validate_certificate(&cert, t, p)?;
    Ok(Report::Done(json!({
        "action": constants(t, p),
        "generators": cert.generators.iter()
            .map(|g| json!({ "name": g.name, "kind": g.kind.as_str(), "radius": qv(&g.radius) }))
            .collect::<Vec<_>>(),
        "m_window": cert.m_window,
        "classify_n": cert.classify_n,
        "D": qv(&cert.d),
        "threshold": qv(&cert.threshold),
        "R": qv(&cert.r),
        "S": cert.s.iter().map(|(_, w)| t.word_name(w)).collect::<Vec<_>>(),
        "s_depth": cert.s_depth,
        "depth": cert.depth,
        "diameters": qlist(&cert.diameters),
        "window_sizes": cert.window_sizes,
        "edge_bound": qv(&cert.edge_bound),
        "orbit_diameter_bound": qv(&cert.orbit_diameter_bound),
        "measured_orbit_diameter": qv(&cert.measured_orbit_diameter),
        "validation": {
            "recomputed_bound": qv(&check.recomputed_bound),
            "matches": check.matches,
            "r_dominates": check.r_dominates,
            "s_moves_within_r": check.s_moves_within_r,
        },
    })))
}

pub fn qfa_cert(a: &QfaCertArgs) -> Result<Report> {
    let loaded = action::load(&a.input, a.point.as_deref())?;
    with_action!(loaded, t, p => qfa_with(&t, &p, a))
}

pub fn bushy(a: &BushyArgs) -> Result<Report> {
    let tree = graph_file(&a.input)?;
    let b = rational(&a.b, "b")?;
    let result = if a.uniform {
        check_bushy_uniform(&tree, b, a.center)?
    } else {
        check_bushy(&tree, b, a.center)?
    };
    let detail = match &result {
        Bushiness::NotBushy { components } | Bushiness::Bushy { components } | Bushiness::CountablyBushyHint { components } => {
            json!({ "components": components })
        }
        Bushiness::FinitelyBushy {
            min_components,
            max_components,
            points_checked,
        } => json!({
            "min_components": min_components,
            "max_components": max_components,
            "points_checked": points_checked,
        }),
    };
    Ok(Report::Done(json!({
        "b": qv(&b),
        "center": a.center,
        "uniform": a.uniform,
        "verdict": result.label(),
        "detail": detail,
    })))
}

fn end_json(e: &EndLabel) -> Value {
    json!({ "base": e.base, "direction": e.direction, "horizon": e.horizon, "ray": e.ray })
}

pub fn pingpong(a: &PingpongArgs) -> Result<Report> {
    let tree = std::sync::Arc::new(graph_file(&a.input)?);
    let iso = |path: &std::path::Path| in_file(path, TreeIsometry::parse(tree.clone(), &read(path)?));
    let (fa, fb) = (iso(&a.a)?, iso(&a.b)?);
    match free_subgroup_witness(&fa, &fb, a.words, a.merge_depth)? {
        PingPong::Witness {
            power,
            sets,
            base_point,
            checked_word_length,
            words_checked,
        } => Ok(Report::Done(json!({
            "power": power,
            "sets": sets.iter().map(|s| json!({
                "name": s.name,
                "axis_of": s.axis_of,
                "threshold": s.threshold,
                "forward": s.forward,
                "size": s.size,
            })).collect::<Vec<_>>(),
            "base_point": base_point,
            "checked_word_length": checked_word_length,
            "words_checked": words_checked,
        }))),
        PingPong::Refusal { reason, shared_end } => Ok(Report::Refused(json!({
            "code": "shared_end",
            "reason": reason,
            "shared_end": end_json(&shared_end),
        }))),
    }
}
