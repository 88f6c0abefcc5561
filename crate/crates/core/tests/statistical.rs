use rand::Rng;

use wiretap_auth_core::asu::{certify_asu, StinsonFamily};
use wiretap_auth_core::codebook::{build_codebook, Budgets, BuildParams};
use wiretap_auth_core::infotheory::*;
use wiretap_auth_core::rng::SeedTree;
use wiretap_auth_core::types::*;

#[test]
fn csiszar_relation_on_thousand_seeded_joints() {
    let seeds = SeedTree::new(2024);
    for i in 0..1000u64 {
        let mut rng = seeds.stream("joint", i);
        let ny = 2 + (i % 4) as usize;
        let raw: Vec<f64> = (0..4 * ny).map(|_| rng.gen::<f64>().powi(3)).collect();
        let s: f64 = raw.iter().sum();
        let j = JointDistribution::new(4, ny, raw.iter().map(|x| x / s).collect()).unwrap();
        let r = check_csiszar_bound(&j);
        assert!(r.holds, "joint {i}: {r:?}");
    }
}

#[test]
fn sampled_transitions_converge_to_channel_rows() {
    let ch = Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.05, 0.15, 0.8]]).unwrap();
    let mut rng = SeedTree::new(5).stream("channel", 0);
    let n = 100_000;
    let x: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    let y = sample_channel(&Sequence::new(2, x.clone()).unwrap(), &ch, &mut rng).unwrap();
    let mut counts = [[0usize; 3]; 2];
    for (a, b) in x.iter().zip(&y.symbols) {
        counts[*a as usize][*b as usize] += 1;
    }
    for (a, row) in counts.iter().enumerate() {
        let total: usize = row.iter().sum();
        for (b, &c) in row.iter().enumerate() {
            assert!((c as f64 / total as f64 - ch.w(b, a)).abs() < 0.01);
        }
    }
}

#[test]
fn counting_inequalities_hold_exhaustively() {
    for k in 1..=3usize {
        for n in 1..=10u32 {
            for t in all_types(k, n) {
                let r = check_counting_bounds(&t, None, 0).unwrap();
                assert!(r.lemma5_holds && r.lemma6_holds, "{:?}", t.counts());
            }
        }
    }
}

#[test]
fn asu_certificates_over_the_grid() {
    for q in 2..=5u64 {
        for s in 1..=2u32 {
            let fam = StinsonFamily::new(q, s).unwrap();
            let c = certify_asu(&fam, 1 << 26).unwrap();
            assert!(c.uniformity_exact && c.within_bound, "q={q} s={s}: {c:?}");
            assert!(c.epsilon_measured <= s as f64 / q as f64);
        }
    }
}

#[test]
fn monte_carlo_column_error_agrees_with_exact() {
    let mut checked = 0;
    for (n, p1, seed) in [(8u32, 0.05, 0u64), (8, 0.1, 1), (6, 0.05, 0), (10, 0.05, 2)] {
        let bp = BuildParams {
            type_p: TypeP::new(vec![n / 2, n / 2]).unwrap(),
            w1: Channel::bsc(p1).unwrap(),
            w2: Channel::bsc(0.3).unwrap(),
            rows: 2,
            cols: 2,
            tau: 0.3,
            theta: 0.2,
            omega: 0.5,
            eps: Some(0.5),
            seed,
            budgets: Budgets::default(),
            max_error: None,
            max_sd: None,
        };
        let Ok(cb) = build_codebook(&bp) else { continue };
        let table = cb.typicality().unwrap();
        for j in 0..cb.cols() {
            let col = cb.column(j, &table);
            let exact = col
                .error_probability(true, 0, 1 << 20, &mut SeedTree::new(0).stream("x", 0))
                .unwrap();
            assert!(exact.exact);
            let seeds = SeedTree::new(0).child("mc-error", checked);
            let mut inside = 0;
            for rep in 0..100 {
                let est = col
                    .error_probability(false, 2000, 1 << 20, &mut seeds.stream("rep", rep))
                    .unwrap();
                if est.low <= exact.value && exact.value <= est.high {
                    inside += 1;
                }
            }
            assert!(
                inside >= 93,
                "n={n} column {j}: {inside}/100 intervals cover {}",
                exact.value
            );
            checked += 1;
        }
    }
    assert!(checked >= 6);
}
