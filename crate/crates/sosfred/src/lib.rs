//! File formats and checks around the core library: instance parsing with
//! threshold overrides, verdict serialization, the claim re-derivation pass
//! and symbol curves as CSV.

use anyhow::{anyhow, bail, Context, Result};
use serde_json::Value;
use sosfred_core::advisor::{derive_claim, run_advisor, FredholmVerdict, InstanceSpec, ProblemInstance};
use sosfred_core::symbols::SymbolContext;

pub use sosfred_core as core;

/// Overlays `overrides` onto the instance's `thresholds` object. The override
/// document is either a bare thresholds object or `{"thresholds": {...}}`.
pub fn merge_thresholds(instance: &mut Value, overrides: &Value) -> Result<()> {
    let src = match overrides.get("thresholds") {
        Some(t) => t,
        None => overrides,
    };
    let src = src.as_object().ok_or_else(|| anyhow!("thresholds override must be a JSON object"))?;
    let obj = instance.as_object_mut().ok_or_else(|| anyhow!("instance must be a JSON object"))?;
    let t = obj.entry("thresholds").or_insert_with(|| Value::Object(Default::default()));
    let t = t.as_object_mut().ok_or_else(|| anyhow!("`thresholds` must be a JSON object"))?;
    for (k, v) in src {
        t.insert(k.clone(), v.clone());
    }
    Ok(())
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    parse_instance_with(text, None)
}

/// As [`parse_instance`], with an optional thresholds override document.
pub fn parse_instance_with(text: &str, thresholds: Option<&str>) -> Result<ProblemInstance> {
    let mut v: Value = serde_json::from_str(text).context("instance is not valid JSON")?;
    if let Some(t) = thresholds {
        let t: Value = serde_json::from_str(t).context("thresholds file is not valid JSON")?;
        merge_thresholds(&mut v, &t)?;
    }
    let spec: InstanceSpec = serde_json::from_value(v).context("malformed instance")?;
    Ok(ProblemInstance::from_spec(spec)?)
}

/// Runs the advisor; `timestamp` goes into `generated_at`.
pub fn check(inst: &ProblemInstance, timestamp: Option<String>) -> FredholmVerdict {
    let mut v = run_advisor(inst);
    v.generated_at = timestamp;
    v
}

pub fn verdict_json(v: &FredholmVerdict) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

/// Removes the timestamp so that verdicts can be compared byte for byte.
pub fn strip_timestamp(json: &str) -> Result<String> {
    let mut v: Value = serde_json::from_str(json)?;
    if let Some(o) = v.as_object_mut() {
        o.remove("generated_at");
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

fn get_bool(v: &Value, path: &str) -> Result<bool> {
    v.pointer(path).and_then(Value::as_bool).ok_or_else(|| anyhow!("missing boolean at {path}"))
}

fn get_f64(v: &Value, path: &str) -> Result<f64> {
    v.pointer(path).and_then(Value::as_f64).ok_or_else(|| anyhow!("missing number at {path}"))
}

/// Re-derives the claim of a serialized verdict from its evidence alone and
/// checks every intermediate flag on the way. Returns the derived claim.
pub fn rederive_claim(verdict: &Value) -> Result<String> {
    let ops = verdict.pointer("/condition_i/operators").and_then(Value::as_array).ok_or_else(|| anyhow!("missing condition_i.operators"))?;
    if ops.len() != 2 {
        bail!("expected two operators in condition_i, found {}", ops.len());
    }
    let mut sides = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        let base = format!("/condition_i/operators/{i}");
        let (left, right) = (get_bool(verdict, &format!("{base}/left"))?, get_bool(verdict, &format!("{base}/right"))?);
        let (l, r) = if !op["error"].is_null() {
            (false, false)
        } else {
            match op["method"].as_str() {
                Some("binomial classifier") => match op.pointer("/classification/verdict").and_then(Value::as_str) {
                    Some("invertible_I1") | Some("invertible_I2") => (true, true),
                    Some("strictly_left_LI") => (true, false),
                    Some("strictly_right_RI") => (false, true),
                    Some("unclassified") => (false, false),
                    other => bail!("{base}: unknown classifier verdict {other:?}"),
                },
                Some("numerical certificate") => {
                    let cert = |side: &str| -> Result<bool> {
                        let p = format!("{base}/{side}_certificate");
                        let res = get_f64(verdict, &format!("{p}/residual"))?;
                        let tol = get_f64(verdict, &format!("{p}/tol"))?;
                        let flag = get_bool(verdict, &format!("{p}/certified"))?;
                        if flag && res >= tol {
                            bail!("{p}: certified with residual {res:e} >= tol {tol:e}");
                        }
                        Ok(flag)
                    };
                    (cert("left")?, cert("right")?)
                }
                other => bail!("{base}: unknown method {other:?}"),
            }
        };
        if (l, r) != (left, right) {
            bail!("{base}: flags ({left}, {right}) do not follow from the evidence ({l}, {r})");
        }
        sides.push((l, r));
    }

    let margin = get_f64(verdict, "/condition_ii/margin")?;
    let fibers = verdict.pointer("/condition_ii/fibers").and_then(Value::as_array).ok_or_else(|| anyhow!("missing condition_ii.fibers"))?;
    let failures = verdict.pointer("/condition_ii/failures").and_then(Value::as_array).map_or(0, Vec::len);
    let mut all = !fibers.is_empty() && failures == 0;
    for (i, f) in fibers.iter().enumerate() {
        let inf = get_f64(verdict, &format!("/condition_ii/fibers/{i}/inf_estimate"))?;
        let pass = get_bool(verdict, &format!("/condition_ii/fibers/{i}/pass"))?;
        if pass != (inf > margin) {
            bail!("fiber {}: pass={pass} but inf_estimate {inf:e} vs margin {margin:e}", f["label"]);
        }
        all &= pass;
    }
    if get_bool(verdict, "/condition_ii/pass")? != all {
        bail!("condition_ii.pass does not follow from the fibers");
    }
    let claim = derive_claim(sides[0].0, sides[0].1, sides[1].0, sides[1].1, all).as_str().to_string();
    let stated = verdict["claim"].as_str().ok_or_else(|| anyhow!("missing claim"))?;
    if stated != claim {
        bail!("stated claim {stated} differs from derived claim {claim}");
    }
    Ok(claim)
}

/// `n(xi, x)` on `[lo, hi]` as CSV with columns `x, re_n, im_n, abs_n`.
/// Without a range, the window is `x0` (where the projections' symbols
/// become negligible) plus one period of the slowest coefficient frequency
/// on each side, so it contains the infimum of `|n|`.
pub fn symbol_csv(inst: &ProblemInstance, fiber: &str, range: Option<(f64, f64)>, samples: usize) -> Result<String> {
    let data = inst
        .fiber_symbol_data()
        .into_iter()
        .find(|(l, _)| l == fiber)
        .ok_or_else(|| {
            let labels: Vec<String> = inst.fibers.iter().map(|f| f.label.clone()).collect();
            anyhow!("unknown fiber `{fiber}`; available: {}", labels.join(", "))
        })?
        .1?;
    // beyond x0, n is periodic with period at most 2 pi / (slowest active frequency)
    let period = data
        .a
        .iter()
        .map(|(k, c)| (*k, *c, data.omega))
        .chain(data.b.iter().map(|(k, c)| (*k, *c, data.eta)))
        .filter(|(k, c, w)| *k != 0 && c.norm() > 0.0 && (*k as f64 * w).abs() > 1e-12)
        .map(|(k, _, w)| 2.0 * std::f64::consts::PI / (k as f64 * w).abs())
        .fold(0.0, f64::max);
    let ctx: SymbolContext = inst.symbol_context()?.with_fibers(vec![data]);
    let (lo, hi) = range.unwrap_or_else(|| {
        let x = ctx.tail_start(inst.thresholds.eps_tail) + period.min(1e3);
        (-x, x)
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "re_n", "im_n", "abs_n"])?;
    for (x, n) in ctx.symbol_curve(fiber, lo, hi, samples)? {
        w.write_record(&[format!("{x:.12e}"), format!("{:.12e}", n.re), format!("{:.12e}", n.im), format!("{:.12e}", n.norm())])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
