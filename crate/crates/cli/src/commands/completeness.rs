//! Honest-session rejection rate over the ladder.

use rayon::prelude::*;

use wiretap_auth_core::protocol::ProtocolInstance;
use wiretap_auth_core::rng::SeedTree;
use wiretap_auth_core::stats::Estimate;

use super::{at_point, Ctx, Output, PointInfo};
use crate::formats::{jsonl, TranscriptLine};
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let fam = cfg.family()?;
    let game = cfg.game_config()?;
    let (source, policy) = (&game.messages, &game.keys);
    let mut out = Output::default();
    let mut transcripts = Vec::new();
    for point in cfg.points()? {
        let cb = ctx.build(&point)?;
        let info = PointInfo::of(&cb);
        let inst = ProtocolInstance::new(cb, fam, None).map_err(|e| at_point(&point, e))?;
        let seeds = SeedTree::new(cfg.seed).child("completeness", point.index as u64);
        let sessions = ctx.pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| inst.completeness_trial(policy, source, &seeds, t))
                .collect::<Result<Vec<_>, _>>()
        });
        let sessions = sessions.map_err(|e| at_point(&point, e))?;
        let rejected = sessions.iter().filter(|s| !s.accepted).count() as u64;
        let est = Estimate::from_counts(rejected, cfg.trials);
        out.rows.push(ctx.estimate(info, "completeness_error", &est));
        out.rows
            .push(ctx.point(info, "completeness_std_error", est.std_error()));
        out.rows.push(ctx.point(info, "r", inst.codebook().r() as f64));
        transcripts.extend(
            sessions
                .iter()
                .take(cfg.transcripts)
                .enumerate()
                .map(|(t, s)| TranscriptLine::new(&ctx.experiment, point.n(), t as u64, s)),
        );
    }
    out.files.push(("transcripts.jsonl".into(), jsonl(&transcripts)));
    Ok(out)
}
