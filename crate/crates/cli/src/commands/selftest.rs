//! Fixed invariant suite at tiny parameters. Every failure string names the
//! violated invariant.

use std::fs;

use wiretap_auth_core::asu::{certify_from_table, tag_table, StinsonFamily};
use wiretap_auth_core::codebook::{build_codebook, Budgets, BuildParams};
use wiretap_auth_core::infotheory::{check_csiszar_bound, Channel, JointDistribution};
use wiretap_auth_core::protocol::{ProtocolInstance, SharedKey, TrialRng};
use wiretap_auth_core::rng::{splitmix64, SeedTree};
use wiretap_auth_core::types::{all_types, check_counting_bounds, TypeP};

use super::verify::check_codebook_bytes;
use super::{Ctx, Output, PointInfo};
use crate::formats::{codebook_to_json, read_csv, write_csv};
use crate::Failure;

/// Certifies a (possibly tampered) key-major tag table.
pub fn check_asu_table(fam: &StinsonFamily, table: &[u32]) -> Vec<String> {
    let (q, s) = (fam.q(), fam.s());
    match certify_from_table(fam, table) {
        Err(e) => vec![format!("ASU uniformity: q={q} s={s}: {e}")],
        Ok(c) => {
            let mut f = Vec::new();
            if !c.uniformity_exact {
                f.push(format!(
                    "ASU uniformity: q={q} s={s}: some message's tag is not uniform over keys"
                ));
            }
            if !c.within_bound {
                f.push(format!(
                    "ASU epsilon bound: q={q} s={s}: measured {} exceeds {}",
                    c.epsilon_measured,
                    fam.epsilon_bound()
                ));
            }
            f
        }
    }
}

fn asu_grid() -> Vec<String> {
    let mut f = Vec::new();
    for q in 2..=5u64 {
        for s in 1..=2u32 {
            let fam = StinsonFamily::new(q, s).expect("grid parameters are valid");
            match tag_table(&fam, 1 << 26) {
                Ok(t) => f.extend(check_asu_table(&fam, &t)),
                Err(e) => f.push(format!("ASU uniformity: q={q} s={s}: {e}")),
            }
        }
    }
    f
}

fn type_counts() -> Vec<String> {
    let mut f = Vec::new();
    let t = TypeP::new(vec![2, 0, 4]).expect("valid type");
    if t.class_size_u128() != Some(15) {
        f.push(format!(
            "type class size: (2,0,4) gives {:?}, expected 15",
            t.class_size_u128()
        ));
    }
    for k in 1..=3usize {
        for n in 1..=8u32 {
            let total: u128 = all_types(k, n).iter().map(|t| t.class_size_u128().unwrap_or(0)).sum();
            if total != (k as u128).pow(n) {
                f.push(format!("type classes partition: k={k} n={n} sums to {total}"));
            }
        }
    }
    f
}

fn counting_bounds() -> Vec<String> {
    let mut f = Vec::new();
    for k in 1..=3usize {
        for n in 1..=10u32 {
            for t in all_types(k, n) {
                match check_counting_bounds(&t, None, 0) {
                    Ok(r) if r.lemma5_holds && r.lemma6_holds => {}
                    Ok(_) => f.push(format!("type counting bounds: {:?}", t.counts())),
                    Err(e) => f.push(format!("type counting bounds: {:?}: {e}", t.counts())),
                }
            }
        }
    }
    f
}

fn csiszar() -> Vec<String> {
    let mut f = Vec::new();
    let mut state = 0x5e1f_7e57u64;
    for i in 0..200 {
        let ny = 2 + i % 3;
        let raw: Vec<f64> = (0..4 * ny)
            .map(|_| (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64)
            .map(|u| u * u * u)
            .collect();
        let sum: f64 = raw.iter().sum();
        let j = match JointDistribution::new(4, ny, raw.iter().map(|x| x / sum).collect()) {
            Ok(j) => j,
            Err(e) => {
                f.push(format!("SD/MI bound: joint {i}: {e}"));
                continue;
            }
        };
        let r = check_csiszar_bound(&j);
        if !r.holds {
            f.push(format!("SD/MI bound: joint {i}: SD {} MI {}", r.delta, r.mi));
        }
    }
    f
}

fn tiny_params() -> BuildParams {
    BuildParams {
        type_p: TypeP::new(vec![3, 3]).expect("valid type"),
        w1: Channel::identity(2),
        w2: Channel::fully_noisy(2, 2),
        rows: 2,
        cols: 2,
        tau: 0.3,
        theta: 0.2,
        omega: 0.5,
        eps: Some(0.0),
        seed: 1,
        budgets: Budgets::default(),
        max_error: None,
        max_sd: None,
    }
}

/// Every key and message on a noiseless main channel must verify.
fn honest_consistency() -> (Vec<String>, Option<Vec<u8>>) {
    let mut f = Vec::new();
    let cb = match build_codebook(&tiny_params()) {
        Ok(cb) => cb,
        Err(e) => return (vec![format!("honest-session consistency: build failed: {e}")], None),
    };
    let json = codebook_to_json(&cb);
    let fam = StinsonFamily::new(2, 1).expect("valid family");
    let inst = match ProtocolInstance::new(cb, fam, None) {
        Ok(i) => i,
        Err(e) => return (vec![format!("honest-session consistency: {e}")], Some(json)),
    };
    let seeds = SeedTree::new(0).child("selftest", 0);
    let mut t = 0;
    for k0 in 0..fam.key_space() as u64 {
        for k1 in 0..inst.rows() {
            let key = SharedKey {
                k0: fam.key_from_index(k0),
                k1,
            };
            for mi in 0..fam.message_space() as u64 {
                let m = fam.message_from_index(mi);
                let mut rngs = TrialRng::new(&seeds, t);
                t += 1;
                match inst.run_honest_session(&key, &m, &mut rngs) {
                    Ok(s) if s.accepted && s.tag == fam.hash_unchecked(&key.k0, &m) => {}
                    Ok(_) => f.push(format!(
                        "honest-session consistency: key ({k0},{k1}) message {mi} rejected"
                    )),
                    Err(e) => f.push(format!("honest-session consistency: {e}")),
                }
            }
        }
    }
    (f, Some(json))
}

fn csv_round_trip(ctx: &Ctx<'_>) -> Vec<String> {
    let rows = vec![
        ctx.point(PointInfo::default(), "a", 0.1 + 0.2),
        ctx.row(
            PointInfo {
                eps: Some(0.3),
                ..PointInfo::default()
            },
            "b",
            1.0 / 3.0,
            0.0,
            1.0,
        ),
    ];
    match write_csv(&rows).and_then(|b| read_csv(&b)) {
        Ok(back) if back == rows => Vec::new(),
        Ok(_) => vec!["serialization invariant: results.csv round trip changed a row".into()],
        Err(e) => vec![format!("serialization invariant: results.csv: {e}")],
    }
}

pub(crate) fn run(ctx: &Ctx<'_>) -> Result<Output, Failure> {
    let mut checks: Vec<(&str, Vec<String>)> = vec![
        ("asu_certification", asu_grid()),
        ("type_class_counts", type_counts()),
        ("counting_bounds", counting_bounds()),
        ("sd_mi_bound", csiszar()),
    ];
    let (honest, json) = honest_consistency();
    checks.push(("honest_consistency", honest));
    let mut ser = csv_round_trip(ctx);
    if let Some(j) = json {
        ser.extend(check_codebook_bytes(&j));
    }
    checks.push(("serialization", ser));
    if let Some(path) = &ctx.codebook {
        let found = match fs::read(path) {
            Ok(bytes) => check_codebook_bytes(&bytes),
            Err(e) => vec![format!("serialization invariant: {}: {e}", path.display())],
        };
        checks.push(("codebook_file", found));
    }
    let mut out = Output::default();
    for (name, failures) in checks {
        out.rows
            .push(ctx.flag(PointInfo::default(), format!("selftest:{name}"), failures.is_empty()));
        out.failures.extend(failures);
    }
    Ok(out)
}
