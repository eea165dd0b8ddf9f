//! Deterministic report output.
//!
//! Field order is the insertion order, floats are written with 17 significant
//! digits (`{:.16e}`), and non-finite floats become the strings `"inf"`,
//! `"-inf"` and `"nan"`. Identical reports therefore serialize to identical
//! bytes.

use phimax::intersection::IPDecision;
use phimax::minimax::IPWitness;
use phimax::primitives::{QuadMinorant, Vector};

#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    /// Appends a field; panics if `self` is not an object.
    pub fn with(mut self, key: &str, value: impl Into<Json>) -> Json {
        match &mut self {
            Json::Obj(fields) => fields.push((key.to_string(), value.into())),
            _ => panic!("with() on a non-object"),
        }
        self
    }

    pub fn get(&self, key: &str) -> Option<&Json> {
        match self {
            Json::Obj(fields) => fields.iter().find(|(k, _)| k == key).map(|(_, v)| v),
            _ => None,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        let pad = |out: &mut String, d: usize| out.extend(std::iter::repeat_n("  ", d));
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Num(v) => out.push_str(&number(*v, true)),
            Json::Str(s) => quote(out, s),
            Json::Arr(items) if items.is_empty() => out.push_str("[]"),
            Json::Arr(items) if items.iter().all(Json::is_scalar) => {
                out.push('[');
                for (k, item) in items.iter().enumerate() {
                    if k > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, depth);
                }
                out.push(']');
            }
            Json::Arr(items) => {
                out.push_str("[\n");
                for (k, item) in items.iter().enumerate() {
                    pad(out, depth + 1);
                    item.write(out, depth + 1);
                    out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
                }
                pad(out, depth);
                out.push(']');
            }
            Json::Obj(fields) if fields.is_empty() => out.push_str("{}"),
            Json::Obj(fields) => {
                out.push_str("{\n");
                for (k, (key, value)) in fields.iter().enumerate() {
                    pad(out, depth + 1);
                    quote(out, key);
                    out.push_str(": ");
                    value.write(out, depth + 1);
                    out.push_str(if k + 1 < fields.len() { ",\n" } else { "\n" });
                }
                pad(out, depth);
                out.push('}');
            }
        }
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }
}

/// Float text shared by JSON and CSV; `quoted` wraps non-finite values for JSON.
pub fn number(v: f64, quoted: bool) -> String {
    let s = if v.is_nan() {
        "nan".to_string()
    } else if v == f64::INFINITY {
        "inf".to_string()
    } else if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        // -0.0 prints as "-0.0000000000000000e0"; normalize so that reports do
        // not depend on the sign of zero.
        return format!("{:.16e}", if v == 0.0 { 0.0 } else { v });
    };
    if quoted {
        format!("\"{s}\"")
    } else {
        s
    }
}

fn quote(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

impl From<bool> for Json {
    fn from(v: bool) -> Json {
        Json::Bool(v)
    }
}

impl From<f64> for Json {
    fn from(v: f64) -> Json {
        Json::Num(v)
    }
}

impl From<usize> for Json {
    fn from(v: usize) -> Json {
        Json::Int(v as i64)
    }
}

impl From<i32> for Json {
    fn from(v: i32) -> Json {
        Json::Int(v as i64)
    }
}

impl From<&str> for Json {
    fn from(v: &str) -> Json {
        Json::Str(v.to_string())
    }
}

impl From<String> for Json {
    fn from(v: String) -> Json {
        Json::Str(v)
    }
}

impl From<&[f64]> for Json {
    fn from(v: &[f64]) -> Json {
        Json::Arr(v.iter().map(|&x| Json::Num(x)).collect())
    }
}

impl From<&Vector> for Json {
    fn from(v: &Vector) -> Json {
        v.as_slice().into()
    }
}

impl From<Vec<Json>> for Json {
    fn from(v: Vec<Json>) -> Json {
        Json::Arr(v)
    }
}

impl<T: Into<Json>> From<Option<T>> for Json {
    fn from(v: Option<T>) -> Json {
        v.map_or(Json::Null, Into::into)
    }
}

impl From<&QuadMinorant> for Json {
    fn from(phi: &QuadMinorant) -> Json {
        Json::obj()
            .with("a", phi.curvature())
            .with("l", phi.slope())
            .with("c", phi.offset())
    }
}

impl From<&IPDecision> for Json {
    fn from(d: &IPDecision) -> Json {
        Json::obj()
            .with("verdict", d.verdict.as_str())
            .with("witness", d.witness.as_ref())
            .with("certificate", d.certificate.as_str())
            .with("margin", d.margin)
    }
}

impl From<&IPWitness> for Json {
    fn from(w: &IPWitness) -> Json {
        let mode = Json::obj().with("kind", w.mode.name());
        let mode = match w.mode {
            phimax::minimax::WitnessMode::EpsSubgradient(e) => mode.with("epsilon", e),
            _ => mode,
        };
        Json::obj()
            .with("y1", w.y1.as_slice())
            .with("y2", w.y2.as_slice())
            .with("x1", w.x1.as_ref())
            .with("x2", w.x2.as_ref())
            .with("phi1", &w.phi1)
            .with("phi2", &w.phi2)
            .with("mode", mode)
            .with("region", w.region.name())
            .with("level", w.level)
            .with("decision", &w.decision)
    }
}

/// `a,l1,…,ln,c`, the flag syntax accepted by `--phi`.
pub fn minorant_flag(phi: &QuadMinorant) -> String {
    let mut parts = vec![number(phi.curvature(), false)];
    parts.extend(phi.slope().as_slice().iter().map(|&v| number(v, false)));
    parts.push(number(phi.offset(), false));
    parts.join(",")
}

/// A CSV field; fields containing separators or quotes are quoted.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
