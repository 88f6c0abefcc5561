//! Key leakage through the wiretap as sessions accumulate.

use wiretap_auth_core::adversary::{check_lemma1_on_leakage, key_leakage};
use wiretap_auth_core::protocol::ProtocolInstance;
use wiretap_auth_core::rng::SeedTree;

use super::{at_point, Ctx, Output, PointInfo};
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let fam = cfg.family()?;
    let messages = match &cfg.leakage.messages {
        Some(list) => list.clone(),
        None => (0..cfg.leakage.sessions as u64)
            .map(|i| fam.message_from_index(i % fam.message_space() as u64))
            .collect(),
    };
    if messages.is_empty() {
        return Err(Failure::Config("leakage: need at least one session".into()));
    }
    for m in &messages {
        fam.check_message(m)
            .map_err(|e| Failure::Config(format!("leakage.messages: {e}")))?;
    }
    let mut out = Output::default();
    for point in cfg.points()? {
        let cb = ctx.build(&point)?;
        let info = PointInfo::of(&cb);
        let inst = ProtocolInstance::new(cb, fam, None).map_err(|e| at_point(&point, e))?;
        let seeds = SeedTree::new(cfg.seed).child("leakage", point.index as u64);
        for k in 1..=messages.len() {
            let mut rng = seeds.stream("views", k as u64);
            let r =
                key_leakage(&inst, &messages[..k], cfg.budgets.mc_trials, &mut rng).map_err(|e| at_point(&point, e))?;
            let se = 3.0 * r.sd_std_error;
            out.rows.push(ctx.row(
                info,
                format!("leakage_sd[sessions={k}]"),
                r.sd,
                (r.sd - se).max(0.0),
                r.sd + se,
            ));
            out.rows
                .push(ctx.point(info, format!("leakage_mi[sessions={k}]"), r.mi));
            out.rows
                .push(ctx.flag(info, format!("leakage_exact[sessions={k}]"), r.exact));
            if r.exact {
                let c = check_lemma1_on_leakage(&r);
                out.rows
                    .push(ctx.flag(info, format!("lemma1_holds[sessions={k}]"), c.holds));
                if !c.holds {
                    out.failures.push(format!(
                        "SD/MI bound: n={} sessions={k}: SD {} and I {} violate it",
                        point.n(),
                        r.sd,
                        r.mi
                    ));
                }
            }
        }
    }
    Ok(out)
}
