//! Re-checks a codebook file: structure, round trip and stored scores.

use std::fs;

use wiretap_auth_core::rng::SeedTree;

use super::{Ctx, Output, PointInfo};
use crate::formats::{codebook_from_json, codebook_to_json};
use crate::Failure;

/// Stored and recomputed exact scores must agree to this tolerance.
const TOLERANCE: f64 = 1e-12;

/// Structural and round-trip checks on raw file bytes. Each entry names the
/// violated invariant.
pub fn check_codebook_bytes(bytes: &[u8]) -> Vec<String> {
    let cb = match codebook_from_json(bytes) {
        Ok(cb) => cb,
        Err(e) => return vec![format!("serialization invariant: {e}")],
    };
    let mut failures = Vec::new();
    if let Err(e) = cb.check_invariants() {
        failures.push(format!("serialization invariant: {e}"));
    }
    let again = codebook_to_json(&cb);
    match codebook_from_json(&again) {
        Ok(cb2) if cb2.cells() == cb.cells() && codebook_to_json(&cb2) == again => {}
        Ok(_) => failures.push("serialization invariant: round trip changed the codebook".into()),
        Err(e) => failures.push(format!("serialization invariant: round trip failed: {e}")),
    }
    failures
}

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let path = ctx.codebook.as_ref().ok_or_else(|| {
        Failure::Config("verify-codebook: no codebook file (set `codebook_file` or --codebook)".into())
    })?;
    let bytes = fs::read(path).map_err(|e| Failure::Config(format!("codebook file {}: {e}", path.display())))?;
    let mut out = Output {
        failures: check_codebook_bytes(&bytes),
        ..Output::default()
    };
    let Ok(cb) = codebook_from_json(&bytes) else {
        out.rows.push(ctx.flag(PointInfo::default(), "codebook_valid", false));
        return Ok(out);
    };
    let info = PointInfo::of(&cb);
    let d = &cb.diagnostics;
    let budget = cb.params().budgets.exhaustive_output;
    let mut rng = SeedTree::new(ctx.cfg.seed).stream("verify", 0);
    if d.error_exact {
        let table = cb.typicality()?;
        for (j, stored) in d.column_error.iter().enumerate().take(cb.cols()) {
            let e = cb.column(j, &table).error_probability(true, 0, budget, &mut rng)?;
            out.rows.push(ctx.point(info, format!("column_error[{j}]"), e.value));
            if (e.value - stored).abs() > TOLERANCE {
                out.failures.push(format!(
                    "stored score: column {j} error {stored} but recomputed {}",
                    e.value
                ));
            }
        }
    }
    if d.sd_exact {
        let uniform = vec![1.0 / cb.rows() as f64; cb.rows()];
        for (j, stored) in d.column_sd.iter().enumerate().take(cb.cols()) {
            let sd = cb.column_secrecy_sd(j, &uniform)?;
            out.rows.push(ctx.point(info, format!("column_sd[{j}]"), sd));
            if (sd - stored).abs() > TOLERANCE {
                out.failures
                    .push(format!("stored score: column {j} SD {stored} but recomputed {sd}"));
            }
        }
    }
    out.rows.push(ctx.point(info, "r", cb.r() as f64));
    out.rows.push(ctx.flag(info, "codebook_valid", out.failures.is_empty()));
    Ok(out)
}
