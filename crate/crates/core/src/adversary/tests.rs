use super::*;
use crate::asu::{certify_asu, StinsonFamily};
use crate::codebook::{build_codebook, Budgets, BuildParams, Codebook, Diagnostics};
use crate::infotheory::Channel;
use crate::types::TypeP;

const BUDGET: u128 = 1 << 24;

fn bsc(p: f64) -> Channel {
    Channel::bsc(p).unwrap()
}

fn build_params(counts: Vec<u32>, w1: Channel, w2: Channel, rows: usize, eps: f64, seed: u64) -> BuildParams {
    BuildParams {
        type_p: TypeP::new(counts).unwrap(),
        w1,
        w2,
        rows,
        cols: 2,
        tau: 0.3,
        theta: 0.2,
        omega: 0.5,
        eps: Some(eps),
        seed,
        budgets: Budgets::default(),
        max_error: None,
        max_sd: None,
    }
}

fn instance(bp: BuildParams) -> ProtocolInstance {
    let cb = build_codebook(&bp).unwrap();
    ProtocolInstance::new(cb, StinsonFamily::new(2, 1).unwrap(), None).unwrap()
}

/// n=6, noisy main channel and a wide typicality radius: some outputs decode in
/// both columns, so the best blind injection reaches exactly 1/I.
fn oracle_instance(rows: usize) -> ProtocolInstance {
    instance(build_params(
        vec![3, 3],
        bsc(0.1),
        Channel::fully_noisy(2, 2),
        rows,
        1.0,
        1,
    ))
}

fn identity_instance(w2: Channel) -> ProtocolInstance {
    instance(build_params(vec![3, 3], Channel::identity(2), w2, 2, 0.0, 1))
}

/// Hand-placed n=4 codebook with identity main and wiretap channels; no
/// secrecy-feasible build exists for a noiseless wiretap.
fn transparent_instance() -> ProtocolInstance {
    let bp = build_params(vec![2, 2], Channel::identity(2), Channel::identity(2), 2, 0.0, 0);
    let w = |s: &str| s.bytes().map(|b| b - b'0').collect::<Vec<u8>>();
    let cells = vec![
        vec![vec![w("0011")], vec![w("0101")]],
        vec![vec![w("0110")], vec![w("1001")]],
    ];
    let cb = Codebook::from_cells(bp, 0.0, cells, Diagnostics::default()).unwrap();
    ProtocolInstance::new(cb, StinsonFamily::new(2, 1).unwrap(), None).unwrap()
}

fn config(sessions: usize, schedule: Vec<Action>, trials: u64) -> GameConfig {
    GameConfig {
        sessions,
        messages: MessageSource::Random,
        plan: AttackPlan {
            max_attacks: schedule.len().max(1),
            schedule,
        },
        keys: KeyPolicy::Fresh,
        trials,
        seed: 9,
    }
}

fn run(inst: &ProtocolInstance, cfg: &GameConfig) -> (SuccessSummary, Vec<TrialRecord>) {
    let ctx = AttackContext::new(inst, cfg, BUDGET).unwrap();
    estimate_success(&ctx, cfg).unwrap()
}

#[test]
fn strategy_names_round_trip() {
    for k in StrategyKind::ALL {
        assert_eq!(StrategyKind::from_name(k.name()), Some(k));
    }
    assert_eq!(StrategyKind::from_name("guess"), None);
}

#[test]
fn empty_plan_never_succeeds() {
    let inst = oracle_instance(2);
    let (s, records) = run(&inst, &config(3, vec![], 200));
    assert_eq!(s.success.successes, 0);
    assert_eq!(s.mis.successes, 0);
    assert!(records
        .iter()
        .all(|r| r.real.attacks.is_empty() && r.view.events.len() == 3));
    assert_eq!(describe_plan(&config(0, vec![], 1).plan), "none");
}

#[test]
fn invalid_plans_are_rejected() {
    let t2 = |after| Action::Type2 {
        after,
        strategy: StrategyKind::RandomInjection,
    };
    let t1 = |session, strategy| Action::Type1 { session, strategy };
    let bad = [
        config(2, vec![t1(0, StrategyKind::ReplayZ)], 1),
        config(2, vec![t1(2, StrategyKind::RandomSubstitution)], 1),
        config(
            2,
            vec![
                t1(0, StrategyKind::RandomSubstitution),
                t1(0, StrategyKind::AdversarialPair),
            ],
            1,
        ),
        config(2, vec![t2(3)], 1),
        config(
            2,
            vec![Action::Type2 {
                after: 0,
                strategy: StrategyKind::AdversarialPair,
            }],
            1,
        ),
    ];
    for cfg in &bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
    let mut over = config(2, vec![t2(0), t2(1)], 1);
    over.plan.max_attacks = 1;
    assert!(over.validate().is_err());
    over.plan.max_attacks = 0;
    over.plan.schedule.clear();
    assert!(over.validate().is_err());
}

#[test]
fn games_are_reproducible() {
    let inst = oracle_instance(2);
    let cfg = config(
        2,
        vec![
            Action::Type1 {
                session: 0,
                strategy: StrategyKind::RandomSubstitution,
            },
            Action::Type2 {
                after: 2,
                strategy: StrategyKind::ReplayZ,
            },
        ],
        300,
    );
    let (a, ra) = run(&inst, &cfg);
    let (b, rb) = run(&inst, &cfg);
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}

#[test]
fn blind_oracle_reaches_one_over_rows() {
    let inst = oracle_instance(2);
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    let best = optimal_type2(&t, &inst, &AdversaryView::default()).unwrap();
    assert_eq!(best.value, 0.5);
}

#[test]
fn blind_oracle_with_identity_main_channel_is_one_over_rows_times_q() {
    // y decodes in exactly one column, so the unknown tag costs another factor q
    let inst = identity_instance(Channel::fully_noisy(2, 2));
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    let best = optimal_type2(&t, &inst, &AdversaryView::default()).unwrap();
    assert_eq!(best.value, 0.25);
}

#[test]
fn single_row_oracle_always_succeeds() {
    let inst = oracle_instance(1);
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    let best = optimal_type2(&t, &inst, &AdversaryView::default()).unwrap();
    assert_eq!(best.value, 1.0);
}

#[test]
fn noiseless_wiretap_session_reveals_the_cell() {
    let inst = transparent_instance();
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    let seeds = SeedTree::new(3);
    for trial in 0..8 {
        let mut rngs = TrialRng::new(&seeds, trial);
        let key = inst.keygen(&mut rngs.key);
        let m = inst.family().random_message(&mut rngs.messages);
        let s = inst.run_honest_session(&key, &m, &mut rngs).unwrap();
        let view = AdversaryView {
            events: vec![ViewEvent::Session {
                m: s.m.clone(),
                m_received: s.m_received.clone(),
                z: s.z.clone(),
                accepted: s.accepted,
            }],
        };
        let best = optimal_type2(&t, &inst, &view).unwrap();
        assert_eq!(best.value, 1.0);
        assert!(inst.bob_verify(&key, &best.m_hat, &best.y_hat));
    }
}

#[test]
fn oracle_rejects_impossible_views() {
    let inst = transparent_instance();
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    // a z that is not a codeword has zero likelihood under an identity wiretap
    let view = AdversaryView {
        events: vec![ViewEvent::Session {
            m: inst.family().message_from_index(0),
            m_received: inst.family().message_from_index(0),
            z: vec![1; 4],
            accepted: true,
        }],
    };
    assert!(optimal_type2(&t, &inst, &view).is_err());
}

#[test]
fn every_injection_strategy_respects_one_over_rows() {
    let inst = oracle_instance(2);
    for strategy in StrategyKind::ALL.into_iter().filter(|k| !k.is_substitution()) {
        let cfg = config(0, vec![Action::Type2 { after: 0, strategy }], 2000);
        let (s, _) = run(&inst, &cfg);
        let bound = 0.5 + 3.0 * s.type2_success.std_error();
        assert!(
            s.type2_success.value <= bound,
            "{}: {:?}",
            strategy.name(),
            s.type2_success
        );
    }
}

#[test]
fn oracle_dominates_other_injections() {
    let inst = oracle_instance(2);
    let t = OracleTables::new(&inst, BUDGET).unwrap();
    let best = optimal_type2(&t, &inst, &AdversaryView::default()).unwrap().value;
    for strategy in [
        StrategyKind::RandomInjection,
        StrategyKind::NearestCodeword,
        StrategyKind::ReplayZ,
    ] {
        let (s, _) = run(&inst, &config(0, vec![Action::Type2 { after: 0, strategy }], 2000));
        assert!(
            s.success.value <= best + 3.0 * s.success.std_error(),
            "{}",
            strategy.name()
        );
    }
    let (s, _) = run(
        &inst,
        &config(
            0,
            vec![Action::Type2 {
                after: 0,
                strategy: StrategyKind::Oracle,
            }],
            2000,
        ),
    );
    assert!((s.success.value - best).abs() <= 3.0 * s.success.std_error());
}

#[test]
fn substitution_collisions_respect_certified_epsilon() {
    let inst = oracle_instance(2);
    let eps = certify_asu(inst.family(), BUDGET).unwrap().epsilon_measured;
    for strategy in [StrategyKind::RandomSubstitution, StrategyKind::AdversarialPair] {
        let (s, _) = run(&inst, &config(1, vec![Action::Type1 { session: 0, strategy }], 2000));
        assert_eq!(s.tag_collision.trials, 2000);
        assert!(
            s.tag_collision.value <= eps + 3.0 * s.tag_collision.std_error(),
            "{:?}",
            s.tag_collision
        );
    }
}

#[test]
fn planted_pair_collides_at_its_enumerated_rate() {
    // on an identity main channel a substitution succeeds exactly on a tag collision
    let inst = identity_instance(Channel::fully_noisy(2, 2));
    let fam = inst.family();
    let partners = collision_partners(&inst, BUDGET).unwrap();
    let table = tag_table(fam, BUDGET).unwrap();
    let (nk, nm) = (fam.key_space() as usize, fam.message_space() as usize);
    let m = 1usize;
    let c = partners[m] as usize;
    let expected = (0..nk).filter(|&k| table[k * nm + m] == table[k * nm + c]).count() as f64 / nk as f64;
    let mut cfg = config(
        1,
        vec![Action::Type1 {
            session: 0,
            strategy: StrategyKind::AdversarialPair,
        }],
        4000,
    );
    cfg.messages = MessageSource::Fixed(vec![fam.message_from_index(m as u64)]);
    let (s, records) = run(&inst, &cfg);
    assert!((s.success.value - expected).abs() <= 3.0 * s.success.std_error() + 1e-9);
    for r in &records {
        let a = &r.real.attacks[0];
        assert_eq!(a.success, a.tag_collision);
        assert!(!a.mis_event);
    }
}

#[test]
fn accounting_identity_holds_on_mixed_plans() {
    let inst = oracle_instance(2);
    let cfg = config(
        3,
        vec![
            Action::Type1 {
                session: 0,
                strategy: StrategyKind::RandomSubstitution,
            },
            Action::Type2 {
                after: 1,
                strategy: StrategyKind::ReplayZ,
            },
            Action::Type1 {
                session: 2,
                strategy: StrategyKind::AdversarialPair,
            },
            Action::Type2 {
                after: 3,
                strategy: StrategyKind::Oracle,
            },
        ],
        2000,
    );
    let (s, records) = run(&inst, &cfg);
    assert!(s.identity_holds);
    assert_eq!(s.identity_violations, 0);
    // wide decoding regions make wrong-column acceptances common here
    assert!(s.mis.successes > 0);
    for r in &records {
        assert!(r.identity_holds());
        for a in r.modified.attacks.iter().filter(|a| a.kind == AttackKind::Type1) {
            assert_eq!(a.success, a.tag_collision);
            assert!(!(a.mis_event && a.tag_collision));
        }
    }
}

#[test]
fn leakage_is_exactly_zero_for_useless_wiretap() {
    let inst = oracle_instance(2);
    let msgs = [inst.family().message_from_index(1)];
    let r = key_leakage_exact(&inst, &msgs).unwrap();
    assert_eq!(r.sd, 0.0);
    assert_eq!(r.mi, 0.0);
    assert!(check_lemma1_on_leakage(&r).holds);
}

#[test]
fn noiseless_wiretap_reveals_row_and_tag() {
    // z = x identifies (k1, t): I(K;V) = H(K1) + H(T) = 2 bits, and each of the
    // four equally likely point rows sits at L1 distance 3/2 from their mixture
    let inst = transparent_instance();
    let msgs = [inst.family().message_from_index(2)];
    let r = key_leakage_exact(&inst, &msgs).unwrap();
    assert!((r.mi - 2.0).abs() < 1e-12, "{r:?}");
    assert!((r.sd - 1.5).abs() < 1e-12, "{r:?}");
    assert_eq!(r.groups, 4);
    assert_eq!(r.key_count, 16);
    assert!(check_lemma1_on_leakage(&r).holds);
}

fn leakage_params(n: u32, seed: u64) -> BuildParams {
    build_params(vec![n / 2, n / 2], bsc(0.05), bsc(0.3), 2, 0.5, seed)
}

#[test]
fn leakage_decreases_from_six_to_eight() {
    let mut sd = Vec::new();
    let mut mi = Vec::new();
    for n in [6, 8] {
        let inst = instance(leakage_params(n, 0));
        let r = key_leakage_exact(&inst, &[inst.family().message_from_index(0)]).unwrap();
        sd.push(r.sd);
        mi.push(r.mi);
    }
    assert!(sd[0] > sd[1] && mi[0] > mi[1], "{sd:?} {mi:?}");
}

#[test]
fn leakage_grows_with_more_sessions() {
    let inst = instance(leakage_params(6, 0));
    let fam = inst.family();
    let m0 = fam.message_from_index(0);
    let m1 = fam.message_from_index(3);
    let one = key_leakage_exact(&inst, core::slice::from_ref(&m0)).unwrap();
    let two = key_leakage_exact(&inst, &[m0, m1]).unwrap();
    assert!(two.mi >= one.mi - 1e-12);
    assert!(two.sd >= one.sd - 1e-12);
}

#[test]
fn leakage_monte_carlo_matches_exact() {
    let inst = instance(leakage_params(6, 0));
    let m = [inst.family().message_from_index(0)];
    let exact = key_leakage_exact(&inst, &m).unwrap();
    let mut bp = inst.codebook().params().clone();
    bp.budgets.exhaustive_output = 32;
    let cb = Codebook::from_cells(
        bp,
        inst.codebook().eps(),
        inst.codebook().cells(),
        Diagnostics::default(),
    )
    .unwrap();
    let small = ProtocolInstance::new(cb, *inst.family(), None).unwrap();
    let mc = key_leakage(&small, &m, 20_000, &mut SeedTree::new(2).stream("leak", 0)).unwrap();
    assert!(!mc.exact);
    assert!(
        (mc.sd - exact.sd).abs() <= 4.0 * mc.sd_std_error + 1e-3,
        "{mc:?} vs {exact:?}"
    );
    assert!((mc.mi - exact.mi).abs() < 0.05, "{mc:?} vs {exact:?}");
}

#[test]
fn csiszar_relation_holds_on_twenty_leakage_pairs() {
    let mut checked = 0;
    let mut seed = 0;
    while checked < 20 {
        assert!(seed < 200, "too few feasible builds");
        let n = if seed % 2 == 0 { 6 } else { 8 };
        let p2 = [0.1, 0.2, 0.3][(seed % 3) as usize];
        let bp = build_params(vec![n / 2, n / 2], bsc(0.02), bsc(p2), 2, 0.5, seed);
        seed += 1;
        let Ok(cb) = build_codebook(&bp) else { continue };
        let inst = ProtocolInstance::new(cb, StinsonFamily::new(2, 1).unwrap(), None).unwrap();
        let msgs = [inst.family().message_from_index(seed % 4)];
        let r = key_leakage_exact(&inst, &msgs).unwrap();
        assert!(check_lemma1_on_leakage(&r).holds, "seed {seed}: {r:?}");
        checked += 1;
    }
}
