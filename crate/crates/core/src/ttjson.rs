//! JSON interchange for TT tensors, meant for desk-scale exchange and golden
//! files. Layout:
//!
//! ```json
//! {"modes":[...],"ranks":[...],"field":"real"|"complex",
//!  "cores":[ /* core ν as nested r_{ν-1} × M_ν × r_ν arrays */ ]}
//! ```
//!
//! Complex entries are `[re, im]` pairs.

use ndarray::Array3;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};
use crate::tt::TTTensor;

fn core_to_value<T: Scalar>(core: &Array3<T>, entry: impl Fn(T) -> Value) -> Value {
    let (r0, m, r1) = (core.shape()[0], core.shape()[1], core.shape()[2]);
    Value::Array(
        (0..r0)
            .map(|a| {
                Value::Array(
                    (0..m)
                        .map(|i| {
                            Value::Array((0..r1).map(|b| entry(core[(a, i, b)])).collect())
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn tensor_to_value<T: Scalar>(w: &TTTensor<T>, entry: impl Fn(T) -> Value + Copy) -> Value {
    json!({
        "modes": w.modes(),
        "ranks": w.ranks(),
        "field": T::FIELD.name(),
        "cores": w.cores().iter().map(|c| core_to_value(c, entry)).collect::<Vec<_>>(),
    })
}

pub fn to_json<T: Scalar>(w: &TTTensor<T>) -> Value {
    match T::FIELD {
        Field::Real => tensor_to_value(w, |x| json!(x.re())),
        Field::Complex => tensor_to_value(w, |x| json!([x.re(), x.im()])),
    }
}

pub fn to_json_string<T: Scalar>(w: &TTTensor<T>) -> String {
    to_json(w).to_string()
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Serde(msg.into())
}

fn parse_entry<T: Scalar>(v: &Value) -> Result<T> {
    match T::FIELD {
        Field::Real => v
            .as_f64()
            .map(T::from_f64)
            .ok_or_else(|| bad(format!("expected number, got {v}"))),
        Field::Complex => {
            let pair = v
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| bad(format!("expected [re, im] pair, got {v}")))?;
            let re = pair[0].as_f64().ok_or_else(|| bad("non-numeric real part"))?;
            let im = pair[1].as_f64().ok_or_else(|| bad("non-numeric imaginary part"))?;
            Ok(T::from_re_im(re, im))
        }
    }
}

fn parse_usize_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array")))?
        .iter()
        .map(|x| {
            x.as_u64()
                .map(|u| u as usize)
                .ok_or_else(|| bad(format!("{what} entries must be non-negative integers")))
        })
        .collect()
}

pub fn from_json<T: Scalar>(v: &Value) -> Result<TTTensor<T>> {
    let obj = v.as_object().ok_or_else(|| bad("expected a JSON object"))?;
    let field = obj
        .get("field")
        .and_then(|f| f.as_str())
        .ok_or_else(|| bad("missing \"field\""))?;
    if field != T::FIELD.name() {
        return Err(bad(format!(
            "field mismatch: file is \"{field}\", requested \"{}\"",
            T::FIELD.name()
        )));
    }
    let modes = parse_usize_list(obj.get("modes").ok_or_else(|| bad("missing \"modes\""))?, "modes")?;
    let ranks = parse_usize_list(obj.get("ranks").ok_or_else(|| bad("missing \"ranks\""))?, "ranks")?;
    if ranks.len() != modes.len() + 1 {
        return Err(bad("ranks must have length d + 1"));
    }
    let cores_v = obj
        .get("cores")
        .and_then(|c| c.as_array())
        .ok_or_else(|| bad("missing \"cores\""))?;
    if cores_v.len() != modes.len() {
        return Err(bad("number of cores must match number of modes"));
    }
    let mut cores = Vec::with_capacity(modes.len());
    for (k, cv) in cores_v.iter().enumerate() {
        let (r0, m, r1) = (ranks[k], modes[k], ranks[k + 1]);
        let rows = cv.as_array().filter(|a| a.len() == r0).ok_or_else(|| {
            bad(format!("core {k}: expected {r0} rank slices"))
        })?;
        let mut core = Array3::from_elem((r0, m, r1), T::zero());
        for (a, row) in rows.iter().enumerate() {
            let fibers = row
                .as_array()
                .filter(|x| x.len() == m)
                .ok_or_else(|| bad(format!("core {k}: expected {m} mode entries")))?;
            for (i, fiber) in fibers.iter().enumerate() {
                let entries = fiber
                    .as_array()
                    .filter(|x| x.len() == r1)
                    .ok_or_else(|| bad(format!("core {k}: expected {r1} rank entries")))?;
                for (b, e) in entries.iter().enumerate() {
                    core[(a, i, b)] = parse_entry(e)?;
                }
            }
        }
        cores.push(core);
    }
    TTTensor::from_cores(cores)
}

pub fn from_json_str<T: Scalar>(s: &str) -> Result<TTTensor<T>> {
    let v: Value = serde_json::from_str(s).map_err(|e| bad(e.to_string()))?;
    from_json(&v)
}
