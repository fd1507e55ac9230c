//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tnvqc_bench::config::{ExperimentConfig, ModelKind};
use tnvqc_bench::dataset::bundled_records;
use tnvqc_bench::grid::{self, audit_param_counts, formula_params, ResultRecord};
use tnvqc_bench::output::results_csv;
use tnvqc_bench::report::{best_run, trend_checks};
use tnvqc_core::data::{one_hot, split, Label, LabeledDataset};
use tnvqc_core::exp_machine::{
    encode_features, euclidean_gradient, initial_weights, predict_raw, LossKind, Regularizer, TnModel,
};
use tnvqc_core::qsim::Statevector;
use tnvqc_core::riemannian::{project_to_tangent, retract, ManifoldSpec, TangentFrame};
use tnvqc_core::tt::{DenseTensor, TtCore, TtTensor};
use tnvqc_core::vqc::{gradient, mse_loss, TargetMapping, VqcParams};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_dense(shape: &[usize], r: &mut ChaCha8Rng) -> DenseTensor {
    let len: usize = shape.iter().product();
    DenseTensor::new(shape.to_vec(), (0..len).map(|_| StandardNormal.sample(r)).collect()).unwrap()
}

fn random_tt(shape: &[usize], rank: usize, r: &mut ChaCha8Rng) -> TtTensor {
    TtTensor::random(shape, &vec![rank; shape.len() - 1], r).unwrap()
}

fn random_batch(d: usize, n: usize, r: &mut ChaCha8Rng) -> LabeledDataset {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.random_range(0.0..1.0)).collect()).collect();
    let labels = (0..n)
        .map(|_| if r.random_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect();
    LabeledDataset::from_rows(&rows, labels).unwrap()
}

fn rel(a: &DenseTensor, b: &DenseTensor) -> f64 {
    a.distance(b) / b.frobenius_norm().max(1e-300)
}

fn tt_roundtrip() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d = r.random_range(1..=6);
        let shape: Vec<usize> = (0..d).map(|_| r.random_range(1..=3)).collect();
        let t = random_dense(&shape, &mut r);
        let tt = TtTensor::from_dense(&t, usize::MAX, 0.0).unwrap();
        worst = worst.max(rel(&tt.to_dense(), &t));
    }
    let secs = start.elapsed().as_secs_f64();
    check(worst <= 1e-10 && secs < 10.0, format!("200 tensors, worst relative error {worst:.2e}, {secs:.2}s"))
}

fn dense_oracles() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = r.random_range(1..=10);
        let shape: Vec<usize> = (0..d).map(|_| if d > 7 { 2 } else { r.random_range(2..=3) }).collect();
        let a = random_tt(&shape, r.random_range(1..=3), &mut r);
        let b = random_tt(&shape, r.random_range(1..=3), &mut r);
        let (da, db) = (a.to_dense(), b.to_dense());
        let scale = da.frobenius_norm() * db.frobenius_norm();
        worst = worst.max((a.dot(&b).unwrap() - da.dot(&db).unwrap()).abs() / scale);

        let sum = a.add(&b).unwrap().to_dense();
        let dense_sum: Vec<f64> = da.data().iter().zip(db.data()).map(|(x, y)| x + y).collect();
        worst = worst.max(rel(&sum, &DenseTensor::new(shape.clone(), dense_sum.clone()).unwrap()));

        let c = r.random_range(-3.0..3.0);
        let scaled: Vec<f64> = da.data().iter().map(|x| c * x).collect();
        worst = worst.max(rel(&a.scale(c).to_dense(), &DenseTensor::new(shape.clone(), scaled).unwrap()));

        // a + a has doubled ranks; rounding back to a's rank is exact.
        let doubled: Vec<f64> = da.data().iter().map(|x| 2.0 * x).collect();
        let rounded = a.add(&a).unwrap().round(a.max_rank()).to_dense();
        worst = worst.max(rel(&rounded, &DenseTensor::new(shape.clone(), doubled).unwrap()));

        if shape.iter().all(|&n| n == 2) {
            let m = TnModel::new(a.clone(), a.max_rank(), LossKind::Logistic, 0.0, Regularizer::Norm).unwrap();
            let x: Vec<f64> = (0..d).map(|_| r.random_range(-1.0..1.0)).collect();
            let feat = encode_features(&x).unwrap().to_dense();
            let brute = feat.dot(&da).unwrap();
            let s = predict_raw(&m, &x).unwrap();
            worst = worst.max((s - brute).abs() / (1.0 + brute.abs()));
        }
    }
    check(worst <= 1e-9, format!("100 instances, worst relative deviation {worst:.2e}"))
}

fn two_feature_polynomial() -> Outcome {
    let w = initial_weights(2, 2, 3).unwrap().scale(1.3);
    let m = TnModel::new(w.clone(), 2, LossKind::Logistic, 0.0, Regularizer::Norm).unwrap();
    let (w00, w10, w01, w11) = (w.entry(&[0, 0]), w.entry(&[1, 0]), w.entry(&[0, 1]), w.entry(&[1, 1]));
    let grid = [-1.0, 0.0, 0.5, 2.0];
    let mut worst: f64 = 0.0;
    for &x1 in &grid {
        for &x2 in &grid {
            let expected = w00 + w10 * x1 + w01 * x2 + w11 * x1 * x2;
            worst = worst.max((predict_raw(&m, &[x1, x2]).unwrap() - expected).abs());
        }
    }
    check(worst <= 1e-12, format!("16 cases, worst deviation {worst:.2e}"))
}

fn dense_tn_loss(w: &[f64], ds: &LabeledDataset, loss: LossKind) -> f64 {
    let mut total = 0.0;
    for i in 0..ds.len() {
        let feat = encode_features(ds.sample(i)).unwrap().to_dense();
        let s: f64 = feat.data().iter().zip(w).map(|(a, b)| a * b).sum();
        let y = ds.labels()[i].sign();
        total += match loss {
            LossKind::Logistic => (1.0 + (-y * s).exp()).ln(),
            LossKind::Mse => (s - y) * (s - y),
        };
    }
    total / ds.len() as f64
}

fn gradient_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(4);
    let mut tn_worst: f64 = 0.0;
    for case in 0..12 {
        let d = r.random_range(1..=8);
        let rank = r.random_range(1..=3);
        let loss = if case % 2 == 0 { LossKind::Logistic } else { LossKind::Mse };
        let w = initial_weights(d, rank, r.random()).unwrap().scale(1.5);
        let m = TnModel::new(w, rank, loss, 0.0, Regularizer::Norm).unwrap();
        let ds = random_batch(d, 6, &mut r);
        let g = euclidean_gradient(&m, &ds).unwrap().to_dense();
        let wd = m.weights().to_dense().data().to_vec();
        let scale = g.data().iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-3);
        let h = 1e-6;
        for j in 0..wd.len() {
            let (mut p, mut q) = (wd.clone(), wd.clone());
            p[j] += h;
            q[j] -= h;
            let fd = (dense_tn_loss(&p, &ds, loss) - dense_tn_loss(&q, &ds, loss)) / (2.0 * h);
            tn_worst = tn_worst.max((fd - g.data()[j]).abs() / scale);
        }
    }
    let mut vqc_worst: f64 = 0.0;
    for _ in 0..12 {
        let n = r.random_range(1..=4);
        let l = r.random_range(0..=2);
        let p = VqcParams::random(n, l, &mut r).unwrap();
        let ds = random_batch(n, 5, &mut r);
        let g = gradient(&ds, &p, TargetMapping::Probability).unwrap();
        let scale = g.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1e-3);
        let h = 1e-5;
        for j in 0..p.num_params() {
            let (mut a, mut b) = (p.clone(), p.clone());
            a.angles_mut()[j] += h;
            b.angles_mut()[j] -= h;
            let fd = (mse_loss(&ds, &a, TargetMapping::Probability).unwrap()
                - mse_loss(&ds, &b, TargetMapping::Probability).unwrap())
                / (2.0 * h);
            vqc_worst = vqc_worst.max((fd - g[j]).abs() / scale);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        tn_worst <= 1e-4 && vqc_worst <= 1e-4 && secs < 60.0,
        format!("tn {tn_worst:.2e}, vqc parameter-shift {vqc_worst:.2e}, {secs:.2}s"),
    )
}

fn manifold_properties() -> Outcome {
    let mut r = rng(5);
    let mut idem: f64 = 0.0;
    let mut rank_ok = true;
    for _ in 0..20 {
        let d = r.random_range(2..=7);
        let rank = r.random_range(1..=3);
        let spec = ManifoldSpec::new(vec![2; d], rank).unwrap();
        let w = spec.random_point(&mut r);
        let z = random_tt(&vec![2; d], 3, &mut r);
        let p = project_to_tangent(&w, &z).unwrap().to_tt();
        let pp = project_to_tangent(&w, &p).unwrap().to_tt();
        idem = idem.max(p.to_dense().distance(&pp.to_dense()) / z.norm());
        let step = retract(&w, &project_to_tangent(&w, &z).unwrap(), r.random_range(0.01..2.0)).unwrap();
        rank_ok &= step.ranks()[1..d].iter().zip(spec.bond_ranks()).all(|(a, b)| *a <= b);
    }
    let w = ManifoldSpec::new(vec![2; 6], 2).unwrap().random_point(&mut r);
    let frame = Arc::new(TangentFrame::at(&w));
    let deltas: Vec<TtCore> = frame
        .left_cores()
        .iter()
        .map(|u| {
            let data = (0..u.num_params()).map(|_| r.random_range(-1.0..1.0)).collect();
            TtCore::new(u.left_rank(), u.mode(), u.right_rank(), data).unwrap()
        })
        .collect();
    let t = frame.tangent_from_deltas(deltas).unwrap();
    let err = |a: f64| {
        let linear = w.sub(&t.to_tt().scale(a)).unwrap().to_dense();
        retract(&w, &t, a).unwrap().to_dense().distance(&linear)
    };
    let ratios: Vec<f64> = [0.02, 0.01, 0.005].windows(2).map(|p| err(p[0]) / err(p[1])).collect();
    let ratio_ok = ratios.iter().all(|&q| q > 4.0 / 1.5 && q < 4.0 * 1.5);
    check(
        idem <= 1e-9 && rank_ok && ratio_ok,
        format!("idempotence {idem:.2e}, rank bound {rank_ok}, halving ratios {ratios:.3?}"),
    )
}

fn simulator_norm() -> Outcome {
    let mut r = rng(6);
    let n = 10;
    let mut s = Statevector::new_zero_state(n).unwrap();
    for _ in 0..1000 {
        s = if r.random_bool(0.5) {
            s.apply_ry(r.random_range(0..n), r.random_range(-7.0..7.0)).unwrap()
        } else {
            let c = r.random_range(0..n);
            let t = (c + r.random_range(1..n)) % n;
            s.apply_cnot(c, t).unwrap()
        };
    }
    let dev = (s.norm_sqr() - 1.0).abs();
    check(dev <= 1e-12, format!("|norm^2 - 1| = {dev:.2e} after 1000 gates on 10 qubits"))
}

fn parameter_counts() -> Outcome {
    let mut cfg = ExperimentConfig::default();
    cfg.components.push(21);
    let audits = audit_param_counts(&cfg).map_err(|e| e.to_string())?;
    let bad: Vec<_> = audits.iter().filter(|a| !a.matches()).collect();
    let examples = formula_params(ModelKind::Vqc, 5, 2) == 25 && formula_params(ModelKind::Tn, 10, 4) == 320;
    check(
        bad.is_empty() && examples,
        format!("{} configurations audited, {} mismatches, examples 25/320 {examples}", audits.len(), bad.len()),
    )
}

fn dataset_protocol() -> Outcome {
    let records = bundled_records().map_err(|e| e.to_string())?;
    let ds = one_hot(&records);
    let frac = ds.positive_fraction();
    let (train, val) = split(&ds, 0.8, 0).unwrap();
    check(
        records.len() == 1728 && ds.num_features() == 21 && (frac - 0.29).abs() <= 0.02 && train.len() == 1382 && val.len() == 346,
        format!(
            "{} records, {} features, positive fraction {frac:.4}, split {}/{}",
            records.len(),
            ds.num_features(),
            train.len(),
            val.len()
        ),
    )
}

fn vqc_small(rows: &[ResultRecord], secs: f64) -> Outcome {
    let best = best_run(rows, ModelKind::Vqc, 5, |l| (2..=6).contains(&l)).ok_or("no vqc rows at 5 components")?;
    let acc = best.val_acc.unwrap_or(0.0);
    check(
        acc >= 0.88,
        format!("best val_acc {acc:.4} (L={}, seed {}); default grid took {secs:.0}s", best.sweep, best.seed),
    )
}

fn tn_large(rows: &[ResultRecord]) -> Outcome {
    let max_rank = rows.iter().filter(|r| r.model == ModelKind::Tn && r.components == 16).map(|r| r.sweep).max();
    let best = best_run(rows, ModelKind::Tn, 16, |_| true).ok_or("no tn rows at 16 components")?;
    let acc = best.val_acc.unwrap_or(0.0);
    check(
        acc >= 0.97 && max_rank >= Some(6),
        format!("best val_acc {acc:.4} (rank {}, seed {}), ranks swept to {max_rank:?}", best.sweep, best.seed),
    )
}

fn trend(rows: &[ResultRecord]) -> Outcome {
    let checks = trend_checks(rows);
    if checks.len() != 3 {
        return Err(format!("expected 3 trend checks, got {}", checks.len()));
    }
    let parts: Vec<String> = checks
        .iter()
        .map(|c| {
            format!(
                "k={} vqc {:.4} tn {:.4} {}",
                c.components,
                c.vqc_best,
                c.tn_best,
                if c.holds { "holds" } else { "FLAGGED" }
            )
        })
        .collect();
    Ok(parts.join("; "))
}

fn determinism() -> Outcome {
    let cfg = ExperimentConfig {
        components: vec![2, 5],
        layers: vec![1, 2],
        ranks: vec![1, 3],
        seeds: vec![0, 1],
        vqc: tnvqc_bench::config::VqcSettings {
            epochs: 3,
            ..ExperimentConfig::default().vqc
        },
        tn: tnvqc_bench::config::TnSettings {
            epochs: 30,
            ..ExperimentConfig::default().tn
        },
        ..ExperimentConfig::default()
    };
    let a = results_csv(&grid::run_grid(&ExperimentConfig { workers: 1, ..cfg.clone() }).map_err(|e| e.to_string())?);
    let b = results_csv(&grid::run_grid(&ExperimentConfig { workers: 2, ..cfg }).map_err(|e| e.to_string())?);
    check(a == b, format!("{} bytes, {} rows, identical across runs with 1 and 2 workers: {}", a.len(), a.lines().count() - 1, a == b))
}

fn main() {
    // `cargo test` passes harness flags; a filter that excludes us skips the run.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    if std::env::args().any(|a| a == "--list") {
        return;
    }

    let mut results: Vec<(u32, &str, Outcome, Duration)> = Vec::new();
    let run = |results: &mut Vec<_>, id: u32, name: &'static str, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let out = f();
        results.push((id, name, out, start.elapsed()));
    };
    run(&mut results, 1, "TT roundtrip", &tt_roundtrip);
    run(&mut results, 2, "dense-oracle equivalence", &dense_oracles);
    run(&mut results, 3, "two-feature polynomial", &two_feature_polynomial);
    run(&mut results, 4, "gradient oracles", &gradient_oracles);
    run(&mut results, 5, "manifold properties", &manifold_properties);
    run(&mut results, 6, "simulator conservation", &simulator_norm);
    run(&mut results, 7, "parameter counts", &parameter_counts);
    run(&mut results, 8, "dataset protocol", &dataset_protocol);

    let start = Instant::now();
    let grid_rows = grid::run_grid(&ExperimentConfig::default());
    let grid_secs = start.elapsed().as_secs_f64();
    match &grid_rows {
        Ok(rows) => {
            run(&mut results, 9, "vqc at 5 components", &|| vqc_small(rows, grid_secs));
            run(&mut results, 10, "tn at 16 components", &|| tn_large(rows));
            run(&mut results, 11, "trend", &|| trend(rows));
        }
        Err(e) => {
            for (id, name) in [(9, "vqc at 5 components"), (10, "tn at 16 components"), (11, "trend")] {
                results.push((id, name, Err(format!("default grid failed: {e}")), Duration::ZERO));
            }
        }
    }
    run(&mut results, 12, "determinism", &determinism);

    let mut failed = 0;
    for (id, name, out, took) in &results {
        let (tag, detail) = match out {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {id:>2} {name}: {detail} [{:.1}s]", took.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}

