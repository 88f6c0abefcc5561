//! Codebook construction over the ladder.

use wiretap_auth_core::codebook::lemmas::property3_proxy;
use wiretap_auth_core::rng::SeedTree;

use super::{at_point, Ctx, Output, PointInfo};
use crate::formats::codebook_to_json;
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let points = cfg.points()?;
    let seeds = SeedTree::new(cfg.seed).child("build", 0);
    let mut out = Output::default();
    for point in &points {
        let cb = ctx.build(point)?;
        let info = PointInfo::of(&cb);
        let d = &cb.diagnostics;
        out.rows.push(ctx.point(info, "r", cb.r() as f64));
        out.rows.push(ctx.point(info, "s2", d.s2 as f64));
        out.rows.push(ctx.point(info, "nominal_r", d.nominal_r as f64));
        for (j, e) in d.column_error.iter().enumerate() {
            out.rows.push(ctx.point(info, format!("column_error[{j}]"), *e));
        }
        for (j, s) in d.column_sd.iter().enumerate() {
            out.rows.push(ctx.point(info, format!("column_sd[{j}]"), *s));
        }
        out.rows.push(ctx.flag(info, "error_exact", d.error_exact));
        out.rows.push(ctx.flag(info, "sd_exact", d.sd_exact));
        if cb.cols() >= 2 {
            let mut rng = seeds.stream("property3", point.index as u64);
            let p3 = property3_proxy(&cb, cfg.budgets.mc_trials, &mut rng).map_err(|e| at_point(point, e))?;
            let se = 3.0 * p3.std_error;
            let c = p3.cross_typical;
            out.rows
                .push(ctx.row(info, "cross_typical", c, (c - se).max(0.0), (c + se).min(1.0)));
            out.rows.push(ctx.point(info, "honest_success", p3.honest_success));
        }
        let name = if points.len() == 1 {
            "codebook.json".to_string()
        } else {
            format!("codebook-n{}.json", point.n())
        };
        out.files.push((name, codebook_to_json(&cb)));
    }
    Ok(out)
}
