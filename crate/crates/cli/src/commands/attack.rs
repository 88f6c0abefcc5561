//! Adversary games over the ladder.

use rayon::prelude::*;

use wiretap_auth_core::adversary::{
    optimal_type2, run_trial, summarize, Action, AdversaryView, AttackContext, OracleTables,
};
use wiretap_auth_core::asu::certify_asu;
use wiretap_auth_core::protocol::ProtocolInstance;
use wiretap_auth_core::rng::SeedTree;
use wiretap_auth_core::Error as CoreError;

use super::{at_point, Ctx, Output, PointInfo};
use crate::formats::{jsonl, TrialLine};
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let fam = cfg.family()?;
    let game = cfg.game_config()?;
    let budget = cfg.budgets.oracle as u128;
    let mut out = Output::default();
    let mut lines = Vec::new();

    let certified = match certify_asu(&fam, budget) {
        Ok(c) => Some(c),
        Err(CoreError::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let has_type2 = game.plan.schedule.iter().any(|a| matches!(a, Action::Type2 { .. }));

    for point in cfg.points()? {
        let cb = ctx.build(&point)?;
        let info = PointInfo::of(&cb);
        let inst = ProtocolInstance::new(cb, fam, None).map_err(|e| at_point(&point, e))?;
        let actx = AttackContext::new(&inst, &game, budget).map_err(|e| at_point(&point, e))?;
        let seeds = SeedTree::new(cfg.seed).child("attack", point.index as u64);
        let records = ctx
            .pool
            .install(|| {
                (0..cfg.trials)
                    .into_par_iter()
                    .map(|t| run_trial(&actx, &game, &seeds, t))
                    .collect::<Result<Vec<_>, _>>()
            })
            .map_err(|e| at_point(&point, e))?;
        let s = summarize(&records);
        out.rows.push(ctx.estimate(info, "success", &s.success));
        out.rows
            .push(ctx.estimate(info, "success_modified", &s.success_modified));
        out.rows.push(ctx.estimate(info, "mis", &s.mis));
        if s.type1_success.trials > 0 {
            out.rows.push(ctx.estimate(info, "type1_success", &s.type1_success));
            out.rows.push(ctx.estimate(info, "tag_collision", &s.tag_collision));
            out.rows.push(ctx.estimate(info, "type1_mis", &s.type1_mis));
            out.rows
                .push(ctx.point(info, "tag_collision_std_error", s.tag_collision.std_error()));
        }
        if s.type2_success.trials > 0 {
            out.rows.push(ctx.estimate(info, "type2_success", &s.type2_success));
            out.rows
                .push(ctx.point(info, "type2_success_std_error", s.type2_success.std_error()));
        }
        out.rows
            .push(ctx.point(info, "identity_violations", s.identity_violations as f64));
        out.rows
            .push(ctx.point(info, "bound_one_over_rows", 1.0 / inst.rows() as f64));
        if let Some(c) = &certified {
            out.rows.push(ctx.point(info, "certified_eps", c.epsilon_measured));
        }
        if has_type2 {
            match OracleTables::new(&inst, budget) {
                Ok(t) => {
                    let o = optimal_type2(&t, &inst, &AdversaryView::default()).map_err(|e| at_point(&point, e))?;
                    out.rows.push(ctx.point(info, "oracle_type2_blind", o.value));
                }
                Err(CoreError::BudgetExceeded { .. }) => {}
                Err(e) => return Err(at_point(&point, e)),
            }
        }
        if !s.identity_holds {
            out.failures.push(format!(
                "accounting identity: n={} violated on {} of {} trials",
                point.n(),
                s.identity_violations,
                s.trials
            ));
        }
        lines.extend(
            records
                .iter()
                .take(cfg.transcripts)
                .map(|r| TrialLine::new(&ctx.experiment, point.n(), &fam, r)),
        );
    }
    out.files.push(("attacks.jsonl".into(), jsonl(&lines)));
    Ok(out)
}
