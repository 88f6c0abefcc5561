//! Rate comparison against the secrecy capacity.

use wiretap_auth_core::infotheory::{equivocation, secrecy_capacity_less_noisy};

use super::{Ctx, Output, PointInfo};
use crate::Failure;

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let cfg = ctx.cfg;
    let (w1, w2) = cfg.channels()?;
    let px = cfg.input_distribution()?;
    let cs = secrecy_capacity_less_noisy(&px, &w1, &w2)?;
    let hxz = equivocation(&px, &w2)?;
    let hxy = equivocation(&px, &w1)?;
    let mut out = Output::default();
    let base = PointInfo {
        rows: cfg.codebook.rows,
        cols: cfg.codebook.cols,
        ..PointInfo::default()
    };
    // log|M| / log|T| with |M| = q^(2^s) and |T| = q
    let rho_auth = (1u64 << cfg.hash.s) as f64;
    out.rows.push(ctx.point(base, "rho_auth", rho_auth));
    out.rows.push(ctx.point(base, "secrecy_capacity", cs));
    out.rows.push(ctx.point(base, "equivocation_xz", hxz));
    out.rows.push(ctx.point(base, "equivocation_xy", hxy));
    for &d in &cfg.rates.delta {
        if d.is_nan() || d < 0.0 {
            return Err(Failure::Config(format!(
                "rates.delta: {d} is not a non-negative number"
            )));
        }
        let rate = hxz - d;
        out.rows.push(ctx.point(base, format!("rate_backoff[delta={d}]"), rate));
        out.rows
            .push(ctx.flag(base, format!("rate_backoff_exceeds_cs[delta={d}]"), rate > cs));
    }
    for p in cfg.points()? {
        let info = PointInfo { n: p.n(), ..base };
        let rho_chan = (cfg.hash.q as f64).log2() / p.n() as f64;
        out.rows.push(ctx.point(info, "rho_chan", rho_chan));
        out.rows.push(ctx.flag(info, "rho_chan_exceeds_cs", rho_chan > cs));
    }
    Ok(out)
}
