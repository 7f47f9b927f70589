//! The invariant document: the q-series of one job with its parameters.

use qpl_core::cache::{cached_numeric_brackets, truncation_json, DiskCache, CODE_VERSION};
use qpl_core::engine::EdgeSign;
use qpl_core::pipeline::{lambda_series, numeric_terms, sum_terms, symbolic_terms, Job};
use qpl_core::scalar::rat_str;
use qpl_core::target::ModeKind;
use qpl_core::{Coeff, QplError, Result};
use serde_json::{json, Value};

fn cache_params(job: &Job, mode: ModeKind) -> Value {
    let ins: Vec<String> = job.insertions.iter().map(|x| x.spec(job.n)).collect();
    json!({
        "n": job.n,
        "genus": job.genus,
        "insertions": ins,
        "trunc": truncation_json(&job.trunc),
        "mode": mode.name(),
        "edge_sign": job.sign.name(),
    })
}

pub fn params_json(job: &Job, mode: ModeKind) -> Value {
    let ins: Vec<Value> = job
        .insertions
        .iter()
        .map(|x| json!({"k": x.k, "c": (0..job.n).map(|i| x.c(i)).collect::<Vec<_>>()}))
        .collect();
    json!({
        "n": job.n,
        "genus": job.genus,
        "insertions": ins,
        "cap": job.trunc.total,
        "caps": job.trunc.per_var,
        "mode": mode.name(),
        "edge_sign": job.sign.name(),
    })
}

fn rational_coefficients(job: &Job, series: &qpl_core::QSeries<qpl_core::Rational>) -> Vec<Value> {
    job.trunc
        .degrees()
        .iter()
        .map(|d| json!({"d": d.to_vec(), "value": rat_str(&series.coeff(d)), "vdim_zero": job.vdim_zero(d)}))
        .collect()
}

fn compute(job: &Job, mode: ModeKind, cache: Option<&DiskCache>) -> Result<Vec<Value>> {
    match mode {
        ModeKind::Numeric | ModeKind::SignSymbolic => {
            let table = cached_numeric_brackets(cache, job.n, &job.trunc, job.sign, job.bracket_depth())?;
            let terms = if mode == ModeKind::Numeric { numeric_terms(job, table)? } else { symbolic_terms(job, &table)? };
            Ok(rational_coefficients(job, &sum_terms(&job.trunc, &terms)))
        }
        ModeKind::LambdaLaurent => {
            let s = lambda_series(job)?;
            Ok(job
                .trunc
                .degrees()
                .iter()
                .map(|d| {
                    let c = s.coeff(d);
                    let mut entry = json!({"d": d.to_vec(), "vdim_zero": job.vdim_zero(d)});
                    match c.as_rational() {
                        Some(r) => entry["value"] = json!(rat_str(&r)),
                        None => {
                            entry["value"] = Value::Null;
                            entry["lambda"] = c.to_json();
                        }
                    }
                    entry
                })
                .collect())
        }
    }
}

/// {"schema":1, "params", "coefficients", "meta"} for a validated job.
pub fn invariant_document(job: &Job, mode: ModeKind, cache: Option<&DiskCache>) -> Result<Value> {
    job.validate()?;
    let key = cache_params(job, mode);
    let cached = cache.and_then(|c| c.get("invariant", &key)).and_then(|v| v.as_array().cloned());
    let coefficients = match cached {
        Some(c) => c,
        None => {
            let c = compute(job, mode, cache)?;
            if let Some(cache) = cache {
                cache.put("invariant", &key, &Value::Array(c.clone()))?;
            }
            c
        }
    };
    Ok(json!({
        "schema": 1,
        "params": params_json(job, mode),
        "coefficients": coefficients,
        "meta": {
            "convention": job.sign.name(),
            "cache_hits": cache.map_or(0, |c| c.hits()),
            "version": CODE_VERSION,
        },
    }))
}

/// Plain-text rendering of an invariant document.
pub fn render_text(doc: &Value) -> String {
    let p = &doc["params"];
    let ins: Vec<String> = p["insertions"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|x| {
                    let c: String = x["c"].as_array().map(|v| v.iter().map(|b| b.to_string()).collect()).unwrap_or_default();
                    format!("{}:{c}", x["k"])
                })
                .collect()
        })
        .unwrap_or_default();
    let mut out = format!(
        "genus {} n={} insertions {} cap {} mode {} edge-sign {}\n",
        p["genus"], p["n"], ins.join(";"), p["cap"], p["mode"].as_str().unwrap_or("?"), p["edge_sign"].as_str().unwrap_or("?")
    );
    for c in doc["coefficients"].as_array().into_iter().flatten() {
        let value = match c["value"].as_str() {
            Some(v) => v.to_string(),
            None => c["lambda"].to_string(),
        };
        let tag = if c["vdim_zero"].as_bool() == Some(true) { "  (vdim 0)" } else { "" };
        out.push_str(&format!("q^{}  {value}{tag}\n", c["d"]));
    }
    out.push_str(&format!("cache hits: {}\n", doc["meta"]["cache_hits"]));
    out
}

pub fn parse_mode(s: &str) -> Result<ModeKind> {
    ModeKind::parse(s).ok_or_else(|| QplError::Precondition(format!("unknown mode {s:?} (numeric, lambda, symbolic)")))
}

pub fn parse_sign(s: &str) -> Result<EdgeSign> {
    EdgeSign::parse(s).ok_or_else(|| QplError::Precondition(format!("unknown edge sign {s:?} (proof, definition)")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qpl_core::engine::Insertion;
    use qpl_core::Truncation;

    #[test]
    fn p1_genus0_three_points_at_degree_one() {
        let ins = Insertion::parse_list("0:1;0:1;0:1", 1).unwrap();
        let job = Job::new(1, 0, ins, Truncation::total(1, 1), EdgeSign::Proof);
        let doc = invariant_document(&job, ModeKind::Numeric, None).unwrap();
        assert_eq!(doc["schema"], 1);
        let c = doc["coefficients"].as_array().unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[1]["d"], json!([1]));
        assert_eq!(c[1]["value"], "1/1");
        assert_eq!(c[1]["vdim_zero"], true);
        assert_eq!(doc["meta"]["convention"], "proof");
    }
}
