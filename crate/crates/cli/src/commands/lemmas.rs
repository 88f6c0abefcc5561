//! Finite-n checks of the counting, packing and partition lemmas, plus the
//! hash family certificate.

use wiretap_auth_core::asu::certify_asu;
use wiretap_auth_core::codebook::lemmas::{check_lemma11_partition, check_lemma7, check_lemma8_packing};
use wiretap_auth_core::rng::SeedTree;
use wiretap_auth_core::types::check_counting_bounds;

use super::{at_point, Ctx, Output, PointInfo};
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let (w1, w2) = cfg.channels()?;
    let l = &cfg.lemmas;
    let budgets = cfg.budgets.core();
    let mut out = Output::default();

    let fam = cfg.family()?;
    let base = PointInfo::default();
    let c = certify_asu(&fam, cfg.budgets.oracle as u128)?;
    out.rows.push(ctx.point(base, "asu_epsilon", c.epsilon_measured));
    out.rows.push(ctx.point(base, "asu_epsilon_bound", fam.epsilon_bound()));
    out.rows.push(ctx.flag(base, "asu_uniform", c.uniformity_exact));
    if !c.uniformity_exact {
        out.failures
            .push(format!("ASU uniformity: q={} s={}", fam.q(), fam.s()));
    }
    if !c.within_bound {
        out.failures.push(format!(
            "ASU epsilon bound: q={} s={} measured {}",
            fam.q(),
            fam.s(),
            c.epsilon_measured
        ));
    }

    for point in cfg.points()? {
        let tp = &point.type_p;
        let info = PointInfo {
            eps: Some(l.eps),
            ..ctx.info(&point)
        };
        let n = point.n();
        let seeds = SeedTree::new(cfg.seed).child("lemmas", point.index as u64);

        let cr = check_counting_bounds(tp, Some((&w1, l.eps)), budgets.exhaustive_output)
            .map_err(|e| at_point(&point, e))?;
        out.rows.push(ctx.point(
            info,
            "type_class_log2_size",
            wiretap_auth_core::types::log2_biguint(&cr.class_size),
        ));
        out.rows.push(ctx.point(info, "type_probability", cr.type_probability));
        out.rows.push(ctx.flag(info, "lemma5_holds", cr.lemma5_holds));
        out.rows.push(ctx.flag(info, "lemma6_holds", cr.lemma6_holds));
        if let Some(m) = cr.cond_typical_mass {
            out.rows.push(ctx.point(info, "cond_typical_mass", m));
        }
        if !cr.lemma5_holds {
            out.failures.push(format!("type probability bound: n={n}"));
        }
        if !cr.lemma6_holds {
            out.failures.push(format!("type class size bounds: n={n}"));
        }

        let r7 = check_lemma7(tp, &w1, l.eps, l.trials, &budgets, &mut seeds.stream("lemma7", 0))
            .map_err(|e| at_point(&point, e))?;
        let se = 3.0 * r7.empirical_se;
        out.rows.push(ctx.point(info, "intersection_exact_mean", r7.exact_mean));
        out.rows.push(ctx.row(
            info,
            "intersection_empirical_mean",
            r7.empirical_mean,
            r7.empirical_mean - se,
            r7.empirical_mean + se,
        ));
        out.rows.push(ctx.flag(info, "intersection_within_3se", r7.within_3se));
        if !r7.within_3se {
            out.failures.push(format!(
                "intersection mean: n={n}: empirical {} not within 3 SE of exact {}",
                r7.empirical_mean, r7.exact_mean
            ));
        }

        let r8 = check_lemma8_packing(
            tp,
            &w1,
            l.ell,
            l.eps,
            l.trials,
            &budgets,
            &mut seeds.stream("lemma8", 0),
        )
        .map_err(|e| at_point(&point, e))?;
        out.rows.push(ctx.point(info, "packing_error_median", r8.median));
        out.rows.push(ctx.point(info, "packing_error_mean", r8.mean));

        let r11 = check_lemma11_partition(tp, &w2, l.classes, &budgets, &mut seeds.stream("lemma11", 0))
            .map_err(|e| at_point(&point, e))?;
        out.rows.push(ctx.point(info, "partition_sd", r11.sd_value));
        out.rows
            .push(ctx.point(info, "partition_max_imbalance", r11.max_cell_imbalance));
    }
    Ok(out)
}
