//! One test per acceptance criterion. Configurations live in `configs/` at
//! the workspace root; their seeds are the calibrated ones.

use std::path::PathBuf;

use wiretap_auth::config::ExperimentConfig;
use wiretap_auth::formats::ResultRow;
use wiretap_auth::{run, Command, RunOptions, RunSummary};

use wiretap_auth_core::adversary::{check_lemma1_on_leakage, key_leakage_exact};
use wiretap_auth_core::asu::{certify_asu, StinsonFamily};
use wiretap_auth_core::codebook::{build_codebook, Codebook, Diagnostics};
use wiretap_auth_core::infotheory::{check_csiszar_bound, Channel, JointDistribution};
use wiretap_auth_core::protocol::ProtocolInstance;
use wiretap_auth_core::rng::splitmix64;
use wiretap_auth_core::types::{all_types, check_counting_bounds, TypeP};

fn config(name: &str) -> ExperimentConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    ExperimentConfig::from_json(&text).unwrap()
}

fn out_dir(tag: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance").join(tag)
}

fn exec(cmd: Command, cfg: ExperimentConfig, tag: &str, threads: usize) -> RunSummary {
    let opts = RunOptions {
        threads,
        out: Some(out_dir(tag)),
        ..RunOptions::default()
    };
    run(cmd, Some(cfg), &opts).unwrap_or_else(|e| panic!("{tag}: {e}"))
}

fn metric<'a>(rows: &'a [ResultRow], n: u32, name: &str) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.n == n && r.metric == name)
        .unwrap_or_else(|| panic!("no `{name}` row at n={n}"))
}

fn se(rows: &[ResultRow], n: u32, name: &str) -> f64 {
    metric(rows, n, &format!("{name}_std_error")).value
}

#[test]
fn acceptance_01_asu_certification() {
    for q in 2..=5u64 {
        for s in 1..=2u32 {
            let fam = StinsonFamily::new(q, s).unwrap();
            let c = certify_asu(&fam, 1 << 26).unwrap();
            assert!(c.uniformity_exact, "q={q} s={s}: {c:?}");
            assert!(
                c.within_bound && c.epsilon_measured <= s as f64 / q as f64,
                "q={q} s={s}: {c:?}"
            );
        }
    }
}

#[test]
fn acceptance_02_type_class_arithmetic() {
    assert_eq!(TypeP::new(vec![2, 0, 4]).unwrap().class_size_u128(), Some(15));
    for k in 1..=3usize {
        for n in 1..=8u32 {
            let total: u128 = all_types(k, n).iter().map(|t| t.class_size_u128().unwrap()).sum();
            assert_eq!(total, (k as u128).pow(n), "k={k} n={n}");
        }
        for n in 1..=10u32 {
            for t in all_types(k, n) {
                let r = check_counting_bounds(&t, None, 0).unwrap();
                assert!(r.lemma5_holds && r.lemma6_holds, "{:?}: {r:?}", t.counts());
            }
        }
    }
}

#[test]
fn acceptance_03_sd_mi_bound() {
    let mut state = 1000u64;
    for i in 0..1000 {
        let ny = 2 + i % 4;
        let raw: Vec<f64> = (0..4 * ny)
            .map(|_| ((splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64).powi(3))
            .collect();
        let sum: f64 = raw.iter().sum();
        let j = JointDistribution::new(4, ny, raw.iter().map(|x| x / sum).collect()).unwrap();
        let r = check_csiszar_bound(&j);
        assert!(r.holds, "joint {i}: {r:?}");
    }
    // every exactly computed (SD, I) pair of the leakage configurations
    let mut pairs = 0;
    for name in ["leakage.json", "attack-type2.json"] {
        let cfg = config(name);
        let fam = cfg.family().unwrap();
        for p in cfg.points().unwrap() {
            let cb = build_codebook(&cfg.build_params(&p).unwrap()).unwrap();
            let inst = ProtocolInstance::new(cb, fam, None).unwrap();
            for k in 1..=2u64 {
                let msgs: Vec<_> = (0..k).map(|i| fam.message_from_index(i)).collect();
                let r = key_leakage_exact(&inst, &msgs).unwrap();
                let c = check_lemma1_on_leakage(&r);
                assert!(c.holds, "{name} n={} sessions={k}: {r:?} {c:?}", p.n());
                pairs += 1;
            }
        }
    }
    assert_eq!(pairs, 6);
}

#[test]
fn acceptance_04_intersection_oracle() {
    let s = exec(Command::Lemmas, config("lemma7.json"), "lemma7", 0);
    let exact = metric(&s.rows, 8, "intersection_exact_mean").value;
    assert!((exact - 304.0 / 69.0).abs() < 1e-12, "exact mean {exact}");
    let emp = metric(&s.rows, 8, "intersection_empirical_mean");
    assert!(emp.low <= exact && exact <= emp.high, "{emp:?} vs {exact}");
    assert_eq!(metric(&s.rows, 8, "intersection_within_3se").value, 1.0);
}

#[test]
fn acceptance_05_completeness_trend() {
    let s = exec(Command::Completeness, config("completeness.json"), "completeness", 0);
    let e: Vec<f64> = [8, 10, 12]
        .iter()
        .map(|&n| metric(&s.rows, n, "completeness_error").value)
        .collect();
    assert!(e[0] >= e[1] && e[1] >= e[2], "not non-increasing: {e:?}");
    assert!(e[2] <= 0.2, "n=12 error {}", e[2]);
}

fn with_schedule(mut cfg: ExperimentConfig, json: &str) -> ExperimentConfig {
    cfg.game.schedule = vec![serde_json::from_str(json).unwrap()];
    cfg.validate().unwrap();
    cfg
}

#[test]
fn acceptance_06_type2_bound() {
    for strategy in ["random-injection", "replay-z", "nearest-codeword", "oracle"] {
        let cfg = with_schedule(
            config("attack-type2.json"),
            &format!(r#"{{"kind":"type2","after":0,"strategy":"{strategy}"}}"#),
        );
        assert_eq!(cfg.trials, 10_000);
        let s = exec(Command::Attack, cfg, &format!("type2-{strategy}"), 0);
        let succ = metric(&s.rows, 6, "type2_success");
        let bound = metric(&s.rows, 6, "bound_one_over_rows").value;
        assert_eq!(bound, 0.5);
        assert!(
            succ.value <= bound + 3.0 * se(&s.rows, 6, "type2_success"),
            "{strategy}: {} > 1/I + 3 SE",
            succ.value
        );
        assert_eq!(metric(&s.rows, 6, "oracle_type2_blind").value, 0.5);
    }
}

#[test]
fn acceptance_07_type1_collision_bound() {
    for strategy in ["random-substitution", "adversarial-pair"] {
        let cfg = with_schedule(
            config("attack-type1.json"),
            &format!(r#"{{"kind":"type1","session":0,"strategy":"{strategy}"}}"#),
        );
        assert_eq!(cfg.trials, 10_000);
        let s = exec(Command::Attack, cfg, &format!("type1-{strategy}"), 0);
        let eps = metric(&s.rows, 6, "certified_eps").value;
        let col = metric(&s.rows, 6, "tag_collision").value;
        assert!(
            col <= eps + 3.0 * se(&s.rows, 6, "tag_collision"),
            "{strategy}: collision rate {col} above certified {eps} + 3 SE"
        );
    }
}

#[test]
fn acceptance_08_accounting_identity() {
    let mut cfg = config("attack-type1.json");
    cfg.game.sessions = 3;
    cfg.game.schedule = vec![
        serde_json::from_str(r#"{"kind":"type1","session":0,"strategy":"random-substitution"}"#).unwrap(),
        serde_json::from_str(r#"{"kind":"type1","session":1,"strategy":"adversarial-pair"}"#).unwrap(),
        serde_json::from_str(r#"{"kind":"type2","after":2,"strategy":"replay-z"}"#).unwrap(),
        serde_json::from_str(r#"{"kind":"type2","after":3,"strategy":"oracle"}"#).unwrap(),
    ];
    cfg.transcripts = usize::MAX;
    let s = exec(Command::Attack, cfg.clone(), "identity", 0);
    assert!(s.passed(), "{:?}", s.failures);
    assert_eq!(metric(&s.rows, 6, "identity_violations").value, 0.0);
    assert!(metric(&s.rows, 6, "mis").value > 0.0, "no mis events exercised");
    let lines = std::fs::read_to_string(out_dir("identity").join("attacks.jsonl")).unwrap();
    let mut recorded = 0;
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let real = v["real"]["success"].as_bool().unwrap() as u64;
        let modified = v["modified"]["success"].as_bool().unwrap() as u64;
        let mis = v["mis_count"].as_u64().unwrap();
        assert!(real <= modified + mis, "trial {}: {line}", v["trial"]);
        recorded += 1;
    }
    assert_eq!(recorded, cfg.trials);
}

fn transparent_instance() -> ProtocolInstance {
    let cfg = config("attack-type2.json");
    let mut bp = cfg.build_params(&cfg.points().unwrap()[0]).unwrap();
    bp.type_p = TypeP::new(vec![2, 2]).unwrap();
    bp.w1 = Channel::identity(2);
    bp.w2 = Channel::identity(2);
    let w = |s: &str| s.bytes().map(|b| b - b'0').collect::<Vec<u8>>();
    let cells = vec![
        vec![vec![w("0011")], vec![w("0101")]],
        vec![vec![w("0110")], vec![w("1001")]],
    ];
    let cb = Codebook::from_cells(bp, 0.0, cells, Diagnostics::default()).unwrap();
    ProtocolInstance::new(cb, StinsonFamily::new(2, 1).unwrap(), None).unwrap()
}

#[test]
fn acceptance_09_leakage_direction() {
    let mut noisy = config("attack-type2.json");
    noisy.leakage.sessions = 2;
    let s = exec(Command::Leakage, noisy, "leakage-noisy", 0);
    for k in 1..=2 {
        assert_eq!(metric(&s.rows, 6, &format!("leakage_exact[sessions={k}]")).value, 1.0);
        assert_eq!(metric(&s.rows, 6, &format!("leakage_sd[sessions={k}]")).value, 0.0);
        assert_eq!(metric(&s.rows, 6, &format!("leakage_mi[sessions={k}]")).value, 0.0);
    }

    let inst = transparent_instance();
    let r = key_leakage_exact(&inst, &[inst.family().message_from_index(0)]).unwrap();
    assert!(r.sd > 0.0 && r.mi > 0.0, "{r:?}");

    let s = exec(Command::Leakage, config("leakage.json"), "leakage-bsc", 0);
    let sd6 = metric(&s.rows, 6, "leakage_sd[sessions=1]");
    let sd8 = metric(&s.rows, 8, "leakage_sd[sessions=1]");
    assert_eq!(metric(&s.rows, 6, "leakage_exact[sessions=1]").value, 1.0);
    assert!(sd8.value < sd6.value, "n=6 {} vs n=8 {}", sd6.value, sd8.value);
}

#[test]
fn acceptance_10_rate_claim() {
    let s = exec(Command::Rates, config("rates.json"), "rates", 0);
    assert_eq!(metric(&s.rows, 0, "rho_auth").value, 2.0);
    let hxz = metric(&s.rows, 0, "equivocation_xz").value;
    assert!((hxz - 0.721928).abs() <= 1e-6, "H(X|Z) = {hxz}");
    let threshold = 0.286397;
    let cfg = config("rates.json");
    for d in &cfg.rates.delta {
        let flag = metric(&s.rows, 0, &format!("rate_backoff_exceeds_cs[delta={d}]")).value;
        assert_eq!(flag == 1.0, *d < threshold, "delta={d}");
    }
    let cs = metric(&s.rows, 0, "secrecy_capacity").value;
    assert!((cs - 0.435471).abs() <= 1e-6, "C_s = {cs}, expected 0.435471 +- 1e-6");
}

#[test]
fn acceptance_11_determinism() {
    let runs: Vec<(Command, &str, Option<u64>)> = vec![
        (Command::Rates, "rates.json", None),
        (Command::Build, "build.json", None),
        (Command::Completeness, "completeness.json", Some(2000)),
        (Command::Attack, "attack-type2.json", Some(2000)),
        (Command::Attack, "attack-type1.json", Some(2000)),
        (Command::Leakage, "leakage.json", None),
        (Command::Lemmas, "lemma7.json", None),
    ];
    for (cmd, name, trials) in runs {
        let mut cfg = config(name);
        if let Some(t) = trials {
            cfg.trials = t;
        }
        if cmd == Command::Lemmas {
            cfg.lemmas.trials = 1000;
        }
        let mut bytes = Vec::new();
        for threads in [1, 8] {
            let tag = format!("det-{}-{name}-{threads}", cmd.name());
            exec(cmd, cfg.clone(), &tag, threads);
            bytes.push(std::fs::read(out_dir(&tag).join("results.csv")).unwrap());
        }
        assert!(
            bytes[0] == bytes[1],
            "{} on {name}: results.csv differs between 1 and 8 threads",
            cmd.name()
        );
    }
}
