use qfa_core::rational::fmt_q;
use qfa_core::Q;
use serde_json::Value;

pub enum Report {
    Done(Value),
    /// A well-formed input the analysis declines, with a machine-readable reason.
    Refused(Value),
}

/// Rationals travel as strings so they stay exact.
pub fn qv(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

pub fn qopt(x: &Option<Q>) -> Value {
    x.as_ref().map_or(Value::Null, qv)
}

pub fn qlist<'a>(xs: impl IntoIterator<Item = &'a Q>) -> Value {
    Value::Array(xs.into_iter().map(qv).collect())
}

pub fn reason(envelope: &Value) -> String {
    match &envelope["refusal"]["reason"] {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One `path: value` line per scalar; arrays of scalars stay on one line.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    walk(v, "", &mut out);
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn walk(v: &Value, path: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(x, &sub, out);
            }
        }
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            let items: Vec<String> = xs.iter().map(scalar).collect();
            out.push_str(&format!("{path}: [{}]\n", items.join(", ")));
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                walk(x, &format!("{path}[{i}]"), out);
            }
        }
        other => out.push_str(&format!("{path}: {}\n", scalar(other))),
    }
}
