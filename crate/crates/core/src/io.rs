//! JSON instance files.
//!
//! Probabilities and values are written as decimal strings using the
//! shortest representation that parses back to the same double, so a
//! write/read cycle is lossless. A kernel with a single row stands for the
//! same row at every profile. Embedded instances are written densified.

use std::path::Path;

use serde_json::{json, Map, Value};

use crate::constructions::densify;
use crate::error::{Error, Result};
use crate::instance::{Family, FiniteModel, Instance, Kernel, Kind, ObsSymbol};

fn num_str(x: f64) -> Value {
    Value::String(format!("{x}"))
}

fn row_json(row: &[f64]) -> Value {
    Value::Array(row.iter().map(|&x| num_str(x)).collect())
}

pub fn instance_to_json(inst: &Instance) -> Result<Value> {
    let owned;
    let inst = if matches!(inst.family, Family::Embedded(_)) {
        owned = densify(inst)?;
        &owned
    } else {
        inst
    };
    let obs: Vec<Value> = inst
        .obs
        .iter()
        .map(|s| {
            let mut o = Map::new();
            o.insert("id".into(), json!(s.id));
            o.insert("rewards".into(), row_json(&s.rewards));
            if let Some(t) = s.pure_tag {
                o.insert("pure_tag".into(), json!(t));
            }
            Value::Object(o)
        })
        .collect();
    let mut models = Vec::with_capacity(inst.n_models());
    for m in &inst.models {
        let kernel = match &m.kernel {
            Kernel::Dense(rows) => Value::Array(rows.iter().map(|r| row_json(r)).collect()),
            Kernel::Constant(row) => Value::Array(vec![row_json(row)]),
            Kernel::Embedded { .. } => return Err(Error::Unsupported("embedded kernel after densify".into())),
        };
        let mut o = Map::new();
        o.insert("label".into(), json!(m.label));
        o.insert("kernel".into(), kernel);
        if let Some(v) = &m.values {
            o.insert("values".into(), row_json(v));
        }
        models.push(Value::Object(o));
    }
    let family = match &inst.family {
        Family::Plain | Family::Embedded(_) => json!({"type": "plain"}),
        Family::Twin { n } => json!({"type": "twin", "n": n}),
        Family::Layered { l, c_prob } => json!({"type": "layered", "L": l, "c_prob": num_str(*c_prob)}),
    };
    Ok(json!({
        "K": inst.k,
        "kind": inst.kind,
        "pure_sets": inst.pure_sets,
        "obs": obs,
        "models": models,
        "reveals_sigma": inst.reveals_sigma,
        "reward_range": [num_str(inst.reward_range.0), num_str(inst.reward_range.1)],
        "family": family,
    }))
}

fn perr(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{field}: {msg}"))
}

fn get<'a>(o: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    o.get(key).ok_or_else(|| perr(&format!("{path}{key}"), "missing"))
}

/// Numbers are accepted either as JSON numbers or decimal strings.
fn real(v: &Value, field: &str) -> Result<f64> {
    let x = match v {
        Value::String(s) => s.trim().parse::<f64>().map_err(|_| perr(field, format!("'{s}' is not a decimal")))?,
        Value::Number(n) => n.as_f64().ok_or_else(|| perr(field, "not representable"))?,
        _ => return Err(perr(field, "expected a decimal string")),
    };
    if !x.is_finite() {
        return Err(perr(field, "not finite"));
    }
    Ok(x)
}

fn reals(v: &Value, field: &str) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| perr(field, "expected a list"))?
        .iter()
        .enumerate()
        .map(|(i, x)| real(x, &format!("{field}[{i}]")))
        .collect()
}

fn uint(v: &Value, field: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| perr(field, "expected a non-negative integer"))
}

pub fn instance_from_json(v: &Value) -> Result<Instance> {
    let o = v.as_object().ok_or_else(|| perr("<root>", "expected an object"))?;
    let k = uint(get(o, "K", "")?, "K")?;
    let kind = Kind::parse(get(o, "kind", "")?.as_str().ok_or_else(|| perr("kind", "expected a string"))?)
        .map_err(|e| perr("kind", e))?;
    let pure_sets: Vec<Vec<String>> = get(o, "pure_sets", "")?
        .as_array()
        .ok_or_else(|| perr("pure_sets", "expected a list"))?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.as_array()
                .ok_or_else(|| perr(&format!("pure_sets[{i}]"), "expected a list"))?
                .iter()
                .enumerate()
                .map(|(j, a)| match a {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(perr(&format!("pure_sets[{i}][{j}]"), "expected a label")),
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let obs: Vec<ObsSymbol> = get(o, "obs", "")?
        .as_array()
        .ok_or_else(|| perr("obs", "expected a list"))?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let f = format!("obs[{i}]");
            let so = s.as_object().ok_or_else(|| perr(&f, "expected an object"))?;
            let id = match get(so, "id", &format!("{f}."))? {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(perr(&format!("{f}.id"), "expected a string")),
            };
            let rewards = reals(get(so, "rewards", &format!("{f}."))?, &format!("{f}.rewards"))?;
            let pure_tag = match so.get("pure_tag") {
                None | Some(Value::Null) => None,
                Some(t) => Some(uint(t, &format!("{f}.pure_tag"))?),
            };
            Ok(ObsSymbol { id, rewards, pure_tag })
        })
        .collect::<Result<_>>()?;
    let n_rows: usize = pure_sets.iter().map(|s| s.len()).product();
    let models: Vec<FiniteModel> = get(o, "models", "")?
        .as_array()
        .ok_or_else(|| perr("models", "expected a list"))?
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let f = format!("models[{i}]");
            let mo = m.as_object().ok_or_else(|| perr(&f, "expected an object"))?;
            let label = get(mo, "label", &format!("{f}."))?
                .as_str()
                .ok_or_else(|| perr(&format!("{f}.label"), "expected a string"))?
                .to_string();
            let rows: Vec<Vec<f64>> = get(mo, "kernel", &format!("{f}."))?
                .as_array()
                .ok_or_else(|| perr(&format!("{f}.kernel"), "expected a list of rows"))?
                .iter()
                .enumerate()
                .map(|(r, row)| reals(row, &format!("{f}.kernel[{r}]")))
                .collect::<Result<_>>()?;
            for (r, row) in rows.iter().enumerate() {
                if row.len() != obs.len() {
                    return Err(perr(
                        &format!("{f}.kernel[{r}]"),
                        format!("{} entries for {} symbols", row.len(), obs.len()),
                    ));
                }
                let s: f64 = row.iter().sum();
                if row.iter().any(|&p| p < 0.0) || (s - 1.0).abs() > crate::dist::SUM_TOL {
                    return Err(Error::InvalidDist(format!("{f}.kernel[{r}]: not a distribution (sum {s})")));
                }
            }
            let kernel = if rows.len() == 1 && n_rows != 1 {
                Kernel::Constant(rows.into_iter().next().unwrap())
            } else {
                Kernel::Dense(rows)
            };
            let values = match mo.get("values") {
                None | Some(Value::Null) => None,
                Some(v) => Some(reals(v, &format!("{f}.values"))?),
            };
            Ok(FiniteModel { label, kernel, values })
        })
        .collect::<Result<_>>()?;
    let reveals_sigma = get(o, "reveals_sigma", "")?.as_bool().ok_or_else(|| perr("reveals_sigma", "expected a bool"))?;
    let reward_range = match o.get("reward_range") {
        None | Some(Value::Null) => (0.0, 1.0),
        Some(v) => {
            let r = reals(v, "reward_range")?;
            if r.len() != 2 || r[0] > r[1] {
                return Err(perr("reward_range", "expected [lo, hi]"));
            }
            (r[0], r[1])
        }
    };
    let family = match o.get("family") {
        None | Some(Value::Null) => Family::Plain,
        Some(f) => {
            let fo = f.as_object().ok_or_else(|| perr("family", "expected an object"))?;
            match fo.get("type").and_then(|t| t.as_str()).unwrap_or("plain") {
                "plain" => Family::Plain,
                "twin" => Family::Twin { n: uint(get(fo, "n", "family.")?, "family.n")? },
                "layered" => Family::Layered {
                    l: uint(get(fo, "L", "family.")?, "family.L")?,
                    c_prob: real(get(fo, "c_prob", "family.")?, "family.c_prob")?,
                },
                other => return Err(perr("family.type", format!("unknown family '{other}'"))),
            }
        }
    };
    Instance::new(k, kind, pure_sets, obs, models, reveals_sigma, reward_range, family)
}

pub fn instance_to_string(inst: &Instance) -> Result<String> {
    serde_json::to_string_pretty(&instance_to_json(inst)?).map_err(|e| Error::Parse(e.to_string()))
}

pub fn instance_from_str(s: &str) -> Result<Instance> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Parse(format!("<json>: {e}")))?;
    instance_from_json(&v)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    let s = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    instance_from_str(&s)
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    std::fs::write(&tmp, contents).map_err(|e| Error::Config(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    write_atomic(path, instance_to_string(inst)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{bandit_gap_family, layered_needle_instance, twin_instance};

    fn same(a: &Instance, b: &Instance) {
        assert_eq!(a.k, b.k);
        assert_eq!(a.kind, b.kind);
        assert_eq!(a.obs, b.obs);
        assert_eq!(a.family, b.family);
        for m in 0..a.n_models() {
            assert_eq!(a.models[m].label, b.models[m].label);
            assert_eq!(a.models[m].values, b.models[m].values);
            for r in 0..a.n_rows() {
                assert_eq!(a.row(m, r), b.row(m, r));
            }
        }
    }

    #[test]
    fn round_trips_are_exact() {
        for inst in [
            bandit_gap_family(2, 2).unwrap(),
            layered_needle_instance(2, 1.0).unwrap(),
            twin_instance(5, 0.0123456789, 1.0 / 3.0).unwrap(),
        ] {
            let back = instance_from_str(&instance_to_string(&inst).unwrap()).unwrap();
            same(&inst, &back);
        }
    }

    #[test]
    fn errors_name_the_field() {
        let inst = twin_instance(3, 0.1, 0.05).unwrap();
        let mut v = instance_to_json(&inst).unwrap();
        v["models"][1]["kernel"][0][2] = json!("zero");
        let e = instance_from_json(&v).unwrap_err().to_string();
        assert!(e.contains("models[1].kernel[0][2]"), "{e}");
        let mut v = instance_to_json(&inst).unwrap();
        v.as_object_mut().unwrap().remove("reveals_sigma");
        assert!(instance_from_json(&v).unwrap_err().to_string().contains("reveals_sigma"));
    }

    #[test]
    fn rejects_unnormalized_rows() {
        let inst = twin_instance(3, 0.1, 0.05).unwrap();
        let mut v = instance_to_json(&inst).unwrap();
        v["models"][0]["kernel"][0][0] = json!("0.2");
        assert!(matches!(instance_from_json(&v), Err(Error::InvalidDist(_))));
    }
}
