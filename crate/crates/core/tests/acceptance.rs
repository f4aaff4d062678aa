//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//!
//! Every check runs with simulator noise off. Oracles are plain integer
//! arithmetic (`%`, `/`, brute-force search) or the Clenshaw recurrence.

use std::time::Instant;

use chebmod::cheb::ChebSeries;
use chebmod::fitting::{fit_modp_with, DeltaChoice};
use chebmod::packing::bitstack::{bitstack_pack, bitstack_unpack, BitStackLayout};
use chebmod::packing::concat::{vec_pack, vec_unpack, ConcatLayout};
use chebmod::packing::crt::{crt_pack, crt_unpack, CrtBasis};
use chebmod::packing::img::{img_pack, img_unpack};
use chebmod::packing::pipeline::{pipeline_pack, pipeline_unpack, Stage};
use chebmod::psev::{eval_fitted, eval_ps, schedule_for, PsSchedule};
use chebmod::roundshare::{
    fit_share_plan, floor_he, share_plan_degree, shares_to_ct, shares_to_ct_tree, ReconstructPlan, ShareSet,
};
use chebmod::tables::{build_table, combination_layout, Check, Combination, TableConfig, TableName};
use chebmod::{Complex64, SimParams, Simulator};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FULL: usize = 1 << 15;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn mean_abs(got: &[f64], want: &[i64]) -> f64 {
    got.iter().zip(want).map(|(g, &w)| (g - w as f64).abs()).sum::<f64>() / want.len() as f64
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")
}

/// Homomorphic ModP over `[0, 29]` against `x % p`, one run per degree.
fn modp_means(p: u64) -> Vec<f64> {
    let sim = Simulator::new(SimParams::with_slots(32)).unwrap();
    let xs: Vec<f64> = (0..30).map(f64::from).collect();
    let want: Vec<i64> = (0..30).map(|x| x % p as i64).collect();
    let ct = sim.encrypt_real(&xs).unwrap();
    [35, 40, 45, 50]
        .into_iter()
        .map(|d| {
            let plan = fit_modp_with(p, 29, d, DeltaChoice::Default).unwrap();
            let out = eval_fitted(plan.fit(), &ct, 1.0, &schedule_for(plan.fit())).unwrap();
            mean_abs(&out.decrypt_real()[..30], &want)
        })
        .collect()
}

fn criterion_modp(p: u64) -> Outcome {
    let bounds = [1e-3, 1e-5, 1e-6, 1e-6];
    let means = modp_means(p);
    let pass = means.iter().zip(bounds).all(|(m, b)| *m <= b);
    outcome(
        pass,
        format!("ModP(x,{p}) degrees 35/40/45/50 mean errors [{}]", fmt_list(&means)),
    )
}

fn criterion_floor() -> Outcome {
    let sim = Simulator::new(SimParams::with_slots(32)).unwrap();
    let xs: Vec<f64> = (0..30).map(f64::from).collect();
    let ct = sim.encrypt_real(&xs).unwrap();
    let mut worst: f64 = 0.0;
    for p in 4..=9i64 {
        let want: Vec<i64> = (0..30).map(|x| x / p).collect();
        for d in [40, 45, 50] {
            let plan = fit_modp_with(p as u64, 29, d, DeltaChoice::Default).unwrap();
            let out = floor_he(&ct, &plan).unwrap();
            worst = worst.max(mean_abs(&out.decrypt_real()[..30], &want));
        }
    }
    outcome(
        worst <= 1e-7,
        format!("Floor p=4..9, degrees 40..50: worst mean error {worst:.2e} (bound 1e-7)"),
    )
}

fn bitstack_levels_and_errors(degree: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<usize>) {
    let layout = BitStackLayout::from_bit_widths(&[2, 2, 2])
        .unwrap()
        .fit_plans(degree, DeltaChoice::Default)
        .unwrap();
    let layers: Vec<Vec<i64>> = (0..3)
        .map(|_| (0..FULL).map(|_| rng.random_range(0..4)).collect())
        .collect();
    let packed: Vec<f64> = bitstack_pack(&layers, &layout)
        .unwrap()
        .into_iter()
        .map(|x| x as f64)
        .collect();
    // Oracle for the packing itself: plain shifts.
    for (j, &x) in packed.iter().enumerate().take(64) {
        assert_eq!(x as i64, layers[0][j] | layers[1][j] << 2 | layers[2][j] << 4);
    }
    let sim = Simulator::new(SimParams::with_slots(FULL)).unwrap();
    let out = bitstack_unpack(&sim.encrypt_real(&packed).unwrap(), &layout).unwrap();
    let errors = out
        .iter()
        .zip(&layers)
        .map(|(c, w)| mean_abs(&c.decrypt_real(), w))
        .collect();
    (errors, out.iter().map(|c| c.level()).collect())
}

fn criterion_bitstack() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut pass = true;
    let mut detail = Vec::new();
    let configs = [
        (90, [1e-4, 1e-2, 1e-3], [16, 7, 7]),
        (210, [1e-4, 1e-3, 1e-4], [15, 5, 5]),
    ];
    for (degree, bounds, levels) in configs {
        let (errs, got_levels) = bitstack_levels_and_errors(degree, &mut rng);
        pass &= errs.iter().zip(bounds).all(|(e, b)| *e <= b);
        pass &= got_levels.iter().zip(levels).all(|(&g, w)| g.abs_diff(w) <= 1);
        detail.push(format!(
            "degree {degree}: errors [{}], levels {got_levels:?}",
            fmt_list(&errs)
        ));
    }
    outcome(pass, format!("BitStack 3x2-bit: {}", detail.join("; ")))
}

fn criterion_crt() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let moduli = [4u64, 5, 7];
    let basis = CrtBasis::new(moduli.to_vec())
        .unwrap()
        .fit_plans(210, DeltaChoice::Default)
        .unwrap();
    let layers: Vec<Vec<i64>> = moduli
        .iter()
        .map(|&m| (0..FULL).map(|_| rng.random_range(0..m as i64)).collect())
        .collect();
    let packed = crt_pack(&layers, &basis).unwrap();
    for (j, &x) in packed.iter().enumerate().take(256) {
        for (i, &m) in moduli.iter().enumerate() {
            assert_eq!((x % m) as i64, layers[i][j]);
        }
    }
    let sim = Simulator::new(SimParams::with_slots(FULL)).unwrap();
    let xs: Vec<f64> = packed.iter().map(|&x| x as f64).collect();
    let out = crt_unpack(&sim.encrypt_real(&xs).unwrap(), &basis, true).unwrap();
    let errs: Vec<f64> = out
        .iter()
        .zip(&layers)
        .map(|(c, w)| mean_abs(&c.decrypt_real(), w))
        .collect();
    let levels: Vec<usize> = out.iter().map(|c| c.level()).collect();
    let pass = errs.iter().all(|&e| e <= 1e-5) && levels.iter().all(|&l| l >= 14);
    outcome(
        pass,
        format!(
            "CRTStack (4,5,7) degree 210: errors [{}], levels {levels:?}",
            fmt_list(&errs)
        ),
    )
}

fn criterion_combine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (count, len) = (96, 2000);
    let data: Vec<Vec<f64>> = (0..count)
        .map(|_| (0..len).map(|_| rng.random_range(0..4) as f64).collect())
        .collect();
    let layout = combination_layout(Combination::Combine2, len, FULL, 210).unwrap();
    let (packed, manifest) = pipeline_pack(&data, &layout, FULL).unwrap();
    let sim = Simulator::new(SimParams::with_slots(FULL)).unwrap();
    let cts: Vec<_> = packed.iter().map(|p| sim.encrypt(p).unwrap()).collect();
    let out = pipeline_unpack(&cts, &layout, &manifest, true).unwrap();
    let mut worst: f64 = 0.0;
    for (ct, want) in out.iter().zip(&data) {
        let got = ct.decrypt_real();
        for (g, w) in got.iter().zip(want) {
            worst = worst.max((g - w).abs());
        }
    }
    let depth = out.iter().map(|c| c.level()).min().unwrap();
    // Slot vectors handed to ImgConcat, i.e. after the CRT stage.
    let stacked = manifest.stage_inputs[2].len();
    let per_ct = FULL / len;
    let concat_only = combination_layout(Combination::Concat, len, FULL, 210).unwrap();
    let (concat_packed, _) = pipeline_pack(&data, &concat_only, FULL).unwrap();
    assert!(matches!(layout.stages[1], Stage::Crt(_)));
    let pass = out.len() == count && worst <= 1e-4 && stacked == 2 && per_ct == 16;
    outcome(
        pass,
        format!(
            "Combine 2, 96x2000 Z4: max error {worst:.2e}, depth {depth}; stacked vectors {stacked}, \
             vectors per concat ciphertext {per_ct}; uploaded ciphertexts {} vs {} concat-only",
            packed.len(),
            concat_packed.len()
        ),
    )
}

fn criterion_shares() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sim = Simulator::new(SimParams::with_slots(FULL)).unwrap();
    let mut errs = Vec::new();
    let mut eight = None;
    for parties in 3..=8 {
        let set = ShareSet::random(16, parties, FULL, &mut rng).unwrap();
        let secret: Vec<i64> = (0..FULL)
            .map(|j| set.shares().iter().map(|s| s[j]).sum::<i64>() % 16)
            .collect();
        let cts = set.encrypt(&sim).unwrap();
        let plan = fit_share_plan(parties, 16, share_plan_degree(parties, 16)).unwrap();
        let out = shares_to_ct(&cts, &plan).unwrap();
        errs.push(mean_abs(&out.decrypt_real(), &secret));
        if parties == 8 {
            eight = Some((cts, secret));
        }
    }
    let (cts, secret) = eight.unwrap();
    let tree = ReconstructPlan::split(&[4, 4], 16, 128).unwrap();
    let tree_err = mean_abs(&shares_to_ct_tree(&cts, &tree).unwrap().decrypt_real(), &secret);
    let direct8 = errs[5];
    let pass = errs.iter().all(|&e| e <= 1e-6) && tree_err <= 1e-6 && tree_err > direct8;
    outcome(
        pass,
        format!(
            "Z16 parties 3..8 errors [{}]; tree 4+4 error {tree_err:.2e} vs direct {direct8:.2e}",
            fmt_list(&errs)
        ),
    )
}

fn prop(cases: u32, name: &str, failures: &mut Vec<String>, f: impl FnOnce(&mut TestRunner) -> Result<(), String>) {
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    if let Err(e) = f(&mut runner) {
        failures.push(format!("{name}: {e}"));
    }
}

fn criterion_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // Clenshaw against Paterson–Stockmeyer on 1000 random (series, point) pairs.
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let degree = rng.random_range(1..=256);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let s = ChebSeries::new(coeffs, 1.0).unwrap();
        let u: f64 = rng.random_range(-1.0..=1.0);
        let ps = eval_ps(&s, &u, &PsSchedule::plan(degree)).unwrap();
        worst = worst.max((ps - s.eval_unit(u).unwrap()).abs());
    }
    if worst > 1e-8 {
        failures.push(format!("Clenshaw/PS worst deviation {worst:e}"));
    }

    // CRT over every input for moduli (3, 4, 5), against brute force.
    let basis = CrtBasis::new(vec![3, 4, 5])
        .unwrap()
        .fit_plans(90, DeltaChoice::Default)
        .unwrap();
    let mut layers = vec![Vec::new(), Vec::new(), Vec::new()];
    for a in 0..3 {
        for b in 0..4 {
            for c in 0..5 {
                layers[0].push(a);
                layers[1].push(b);
                layers[2].push(c);
            }
        }
    }
    let packed = crt_pack(&layers, &basis).unwrap();
    for (j, &x) in packed.iter().enumerate() {
        let brute = (0..60i64).find(|y| y % 3 == layers[0][j] && y % 4 == layers[1][j] && y % 5 == layers[2][j]);
        if brute != Some(x as i64) {
            failures.push(format!("CRT pack of tuple {j} gave {x}, brute force {brute:?}"));
        }
    }
    let sim = Simulator::new(SimParams::with_slots(64)).unwrap();
    let ct = sim
        .encrypt_real(&packed.iter().map(|&x| x as f64).collect::<Vec<_>>())
        .unwrap();
    for (layer, want) in crt_unpack(&ct, &basis, false).unwrap().iter().zip(&layers) {
        let got = layer.decrypt_real();
        if got
            .iter()
            .zip(want)
            .any(|(g, &w)| g.round() as i64 != w || (g - w as f64).abs() > 1e-6)
        {
            failures.push("CRT unpack disagrees with brute force".into());
        }
    }

    // Rotation and conjugation group laws.
    prop(64, "group laws", &mut failures, |runner| {
        let strat = (
            proptest::collection::vec((-8.0..8.0f64, -8.0..8.0f64), 16),
            -40i64..40,
            -40i64..40,
        );
        runner
            .run(&strat, |(v, i, j)| {
                let sim = Simulator::new(SimParams::with_slots(16)).unwrap();
                let z: Vec<Complex64> = v.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
                let ct = sim.encrypt(&z).unwrap();
                prop_assert_eq!(
                    ct.rotate(i).rotate(j).decrypt(),
                    ct.rotate((i + j).rem_euclid(16)).decrypt()
                );
                prop_assert_eq!(ct.rotate(0).decrypt(), ct.decrypt());
                prop_assert_eq!(ct.conjugate().conjugate().decrypt(), ct.decrypt());
                prop_assert_eq!(ct.rotate(i).conjugate().decrypt(), ct.conjugate().rotate(i).decrypt());
                Ok(())
            })
            .map_err(|e| e.to_string())
    });

    // Round trips per scheme.
    prop(100, "concat round trip", &mut failures, |runner| {
        let strat = proptest::collection::vec(proptest::collection::vec(-100i64..100, 1..6), 1..5);
        runner
            .run(&strat, |vs| {
                let sim = Simulator::new(SimParams::with_slots(32)).unwrap();
                let layout = ConcatLayout::new(vs.iter().map(Vec::len).collect()).unwrap();
                let reals: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
                let ct = sim.encrypt_real(&vec_pack(&reals, &layout, 32).unwrap()).unwrap();
                for (out, want) in vec_unpack(&ct, &layout).unwrap().iter().zip(&vs) {
                    let got = out.decrypt_real();
                    prop_assert!(mean_abs(&got[..want.len()], want) <= 1e-12);
                    prop_assert!(got[want.len()..].iter().all(|&g| g.abs() <= 1e-12));
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
    });
    prop(100, "img round trip", &mut failures, |runner| {
        let strat = (
            proptest::collection::vec(-50.0..50.0f64, 8),
            proptest::collection::vec(-50.0..50.0f64, 8),
        );
        runner
            .run(&strat, |(a, b)| {
                let sim = Simulator::new(SimParams::with_slots(8)).unwrap();
                let (ra, rb) = img_unpack(&sim.encrypt(&img_pack(&a, &b)).unwrap(), 8, 8).unwrap();
                for (g, w) in ra.decrypt().iter().zip(&a).chain(rb.decrypt().iter().zip(&b)) {
                    prop_assert!((g.re - w).abs() <= 1e-12 && g.im.abs() <= 1e-12);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
    });
    let bit_layout = BitStackLayout::from_bit_widths(&[2, 2, 2])
        .unwrap()
        .fit_plans(90, DeltaChoice::Default)
        .unwrap();
    prop(100, "bitstack round trip", &mut failures, |runner| {
        let strat = proptest::collection::vec((0i64..4, 0i64..4, 0i64..4), 16);
        runner
            .run(&strat, |t| {
                let layers = vec![
                    t.iter().map(|x| x.0).collect::<Vec<_>>(),
                    t.iter().map(|x| x.1).collect(),
                    t.iter().map(|x| x.2).collect(),
                ];
                let packed = bitstack_pack(&layers, &bit_layout).unwrap();
                let sim = Simulator::new(SimParams::with_slots(16)).unwrap();
                let ct = sim
                    .encrypt_real(&packed.iter().map(|&x| x as f64).collect::<Vec<_>>())
                    .unwrap();
                for (out, want) in bitstack_unpack(&ct, &bit_layout).unwrap().iter().zip(&layers) {
                    prop_assert!(mean_abs(&out.decrypt_real(), want) <= 1e-2);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
    });
    let crt_basis = CrtBasis::new(vec![4, 5, 7])
        .unwrap()
        .fit_plans(210, DeltaChoice::Default)
        .unwrap();
    prop(100, "crt round trip", &mut failures, |runner| {
        let strat = proptest::collection::vec((0i64..4, 0i64..5, 0i64..7), 16);
        runner
            .run(&strat, |t| {
                let layers = vec![
                    t.iter().map(|x| x.0).collect::<Vec<_>>(),
                    t.iter().map(|x| x.1).collect(),
                    t.iter().map(|x| x.2).collect(),
                ];
                let packed = crt_pack(&layers, &crt_basis).unwrap();
                let sim = Simulator::new(SimParams::with_slots(16)).unwrap();
                let ct = sim
                    .encrypt_real(&packed.iter().map(|&x| x as f64).collect::<Vec<_>>())
                    .unwrap();
                for (out, want) in crt_unpack(&ct, &crt_basis, false).unwrap().iter().zip(&layers) {
                    prop_assert!(mean_abs(&out.decrypt_real(), want) <= 1e-5);
                }
                Ok(())
            })
            .map_err(|e| e.to_string())
    });

    // Level ledger: consumption depends only on the circuit, never on the data.
    let plan = fit_modp_with(5, 139, 210, DeltaChoice::Default).unwrap();
    let mut levels = Vec::new();
    for seed in 0..5 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = (0..16).map(|_| r.random_range(0..140) as f64).collect();
        let sim = Simulator::new(SimParams::with_slots(16)).unwrap();
        let ct = sim.encrypt_real(&xs).unwrap();
        let out = eval_fitted(plan.fit(), &ct, 1.0, &schedule_for(plan.fit())).unwrap();
        levels.push((out.level(), sim.counts()));
    }
    if levels.windows(2).any(|w| w[0] != w[1]) {
        failures.push(format!("level ledger varies with data: {levels:?}"));
    }

    let pass = failures.is_empty();
    outcome(
        pass,
        if pass {
            format!("Clenshaw/PS worst {worst:.2e}; CRT brute force; group laws; round trips; level ledger")
        } else {
            failures.join("; ")
        },
    )
}

fn criterion_informational() -> Outcome {
    let cfg = TableConfig {
        sim: SimParams::with_slots(FULL),
        ..TableConfig::default()
    };
    let mut checked = 0;
    let mut bad = Vec::new();
    for name in TableName::ALL {
        let table = build_table(name, &cfg).unwrap();
        for c in &table.cells {
            checked += 1;
            let timing_or_traffic = ["traffic", "time", "seconds", "mults"]
                .iter()
                .any(|k| c.column.contains(k) || c.row.contains(k));
            if timing_or_traffic && c.check != Check::Info {
                bad.push(format!("{name}/{}/{}", c.row, c.column));
            }
        }
        // Wall-clock lives outside the cells and therefore outside the CSV.
        if table
            .wall_clock
            .iter()
            .any(|(job, _)| table.to_csv().contains(&format!("{job}_seconds")))
        {
            bad.push(format!("{name}: wall-clock in CSV"));
        }
    }
    outcome(
        bad.is_empty(),
        format!(
            "{checked} table cells inspected; timing and traffic cells unchecked: {}",
            if bad.is_empty() { "yes".into() } else { bad.join(", ") }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 ModP(x,4) over [0,29]", || criterion_modp(4)),
        ("2 ModP(x,5) over [0,29]", || criterion_modp(5)),
        ("3 Floor over [0,29]", criterion_floor),
        ("4 BitStack 3-layer Z4", criterion_bitstack),
        ("5 CRTStack (4,5,7)", criterion_crt),
        ("6 Combine 2 end-to-end", criterion_combine),
        ("7 Secret shares over Z16", criterion_shares),
        ("8 Property suites", criterion_properties),
        ("9 Timing/traffic informational only", criterion_informational),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!(
            "{status} criterion {name}: {} ({:.1}s)",
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
