//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary so the verdict lines always reach the terminal:
//! `cargo test -p lymphkit-cli --test acceptance`.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use lymphkit_core::evalkit::{
    assd, dice, overlap_curves, wilcoxon_signed_rank, OverlapBinCurve, OverlapDirection,
};
use lymphkit_core::measure::{
    classify_enlarged, postprocess_filter, shortest_diameter, EnlargementRule,
};
use lymphkit_core::morph3d::{connected_components, dilate};
use lymphkit_core::phantom::{
    node_voxels, simulate_prediction, NodeSpec, PhantomSpec, SimulatedModel,
};
use lymphkit_core::report::parse_tsv;
use lymphkit_core::weaklab::{
    from_weak_labels, strategy_instance_coating, strategy_loss_masking, strategy_noisy_label,
    strategy_pseudo_labeling, AnatomySubset, Supervision,
};
use lymphkit_core::{Connectivity, Mask};
use rand::Rng;
use support::*;

const CONNS: [Connectivity; 3] = [
    Connectivity::Six,
    Connectivity::Eighteen,
    Connectivity::TwentySix,
];

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn morphology_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let n = 240;
    for i in 0..n {
        let m = random_mask(&mut r, 20, SPACING);
        let conn = CONNS[i % 3];
        let got: Vec<_> = connected_components(&m, conn)
            .components
            .into_iter()
            .map(|c| c.voxels)
            .collect();
        check(got == bfs_components(&m, conn), || {
            format!("components differ on mask {i}")
        })?;
        let iters = 1 + i % 2;
        check(
            dilate(&m, conn, iters).unwrap() == sweep_dilate(&m, conn, iters),
            || format!("dilation differs on mask {i}"),
        )?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{n} masks up to 20^3, {:.2} s",
        elapsed.as_secs_f64()
    ))
}

fn metric_oracles() -> Outcome {
    let mut r = rng(102);
    let n = 120;
    let (mut worst_dice, mut worst_assd) = (0.0f64, 0.0f64);
    for i in 0..n {
        let dims = [
            r.random_range(1..=16),
            r.random_range(1..=16),
            r.random_range(1..=16),
        ];
        let p = random_mask_with_dims(&mut r, dims, SPACING);
        let g = random_mask_with_dims(&mut r, dims, SPACING);
        worst_dice = worst_dice.max((dice(&p, &g).unwrap() - count_dice(&p, &g)).abs());
        let got = assd(&p, &g).unwrap();
        match brute_assd(&p, &g) {
            Some(want) => {
                check(!got.fallback_used, || {
                    format!("pair {i}: unexpected fallback")
                })?;
                worst_assd = worst_assd.max((got.assd_mm - want).abs());
            }
            None => check(got.fallback_used, || {
                format!("pair {i}: fallback not flagged")
            })?,
        }
    }
    check(worst_dice <= 1e-12, || format!("dice error {worst_dice:e}"))?;
    check(worst_assd <= 1e-9, || {
        format!("assd error {worst_assd:e} mm")
    })?;
    Ok(format!(
        "{n} pairs, max |dice err| {worst_dice:.1e}, max |assd err| {worst_assd:.1e} mm"
    ))
}

fn recist_measurement() -> Outcome {
    let mut found = Vec::new();
    for radius in [3.0, 5.0, 8.0, 12.0] {
        let s = digitized_sphere(radius, SPACING);
        let cs = connected_components(&s, Connectivity::TwentySix);
        check(cs.len() == 1, || {
            format!("r={radius}: {} components", cs.len())
        })?;
        let c = &cs.components[0];
        let d = shortest_diameter(c, SPACING).unwrap().shortest_diameter_mm;
        let oracle = brute_short_axis(&c.voxels, SPACING);
        check((d - oracle).abs() < 1e-9, || {
            format!("r={radius}: {d} vs oracle {oracle}")
        })?;
        check((d - 2.0 * radius).abs() <= 1.5, || {
            format!("r={radius}: {d} mm vs {}", 2.0 * radius)
        })?;
        found.push(format!("{d:.2}"));
    }
    let at = |mm: f64| lymphkit_core::measure::DiameterMeasurement {
        component_id: 1,
        shortest_diameter_mm: mm,
        slice_index: 0,
        long_axis_mm: mm,
    };
    let rule = EnlargementRule::RECIST;
    check(classify_enlarged(&at(10.0), rule), || {
        "10.0 mm not enlarged".into()
    })?;
    check(!classify_enlarged(&at(10.0f64.next_down()), rule), || {
        "just below 10 mm enlarged".into()
    })?;
    Ok(format!(
        "short axes {} mm for r = 3, 5, 8, 12; flips at 10.0",
        found.join(", ")
    ))
}

fn strategy_semantics(bin: &Path) -> Outcome {
    let mut hidden_total = 0;
    for seed in 0..6u64 {
        let spec = PhantomSpec::random(seed, [24, 64, 64], SPACING, 6).unwrap();
        let case = spec.generate().unwrap();
        let state = from_weak_labels(&case.weak);
        let hidden: Vec<_> = case.gt.voxels().filter(|&v| !case.weak.get(v)).collect();
        hidden_total += hidden.len();

        let noisy = strategy_noisy_label(&state);
        check(noisy.count(Supervision::Unknown) == 0, || {
            format!("seed {seed}: noisy keeps UNKNOWN")
        })?;

        let masked = strategy_loss_masking(&state);
        let g = *masked.geometry();
        check(
            hidden
                .iter()
                .all(|&v| masked.states()[g.index(v)] == Supervision::Unknown),
            || format!("seed {seed}: hidden node voxel supervised under loss masking"),
        )?;

        let coated = strategy_instance_coating(&state, 1, Connectivity::TwentySix).unwrap();
        let fg = state.mask_of(Supervision::Foreground);
        let hull = dilate(&fg, Connectivity::TwentySix, 1)
            .unwrap()
            .zip_with(&fg, |d, f| d && !f)
            .unwrap();
        check(coated.mask_of(Supervision::Background) == hull, || {
            format!("seed {seed}: coating hull differs from dilate(FG,1) minus FG")
        })?;

        let all = AnatomySubset::all();
        let pseudo = strategy_pseudo_labeling(&state, &case.anatomy, &all).unwrap();
        check(pseudo.mask_of(Supervision::Foreground) == fg, || {
            format!("seed {seed}: pseudo labeling changed FOREGROUND")
        })?;
        let again = strategy_pseudo_labeling(&pseudo, &case.anatomy, &all).unwrap();
        check(again == pseudo, || {
            format!("seed {seed}: pseudo labeling not idempotent")
        })?;
    }
    check(hidden_total > 0, || {
        "phantoms contain no hidden node".into()
    })?;

    // Stage ratios through the real preprocessing command.
    let tmp = tempfile::tempdir().unwrap();
    let ds = tmp.path().join("ds");
    run_ok(
        bin,
        &[
            "phantom",
            "--out",
            path(&ds),
            "--cohort",
            "4",
            "--seed",
            "5",
        ],
    );
    let stats = run_ok(bin, &["preprocess", path(&ds)]);
    let (header, rows) = parse_tsv(&stats).unwrap();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (case_col, stage_col, ratio_col) = (col("case_id"), col("stage"), col("ratio_percent"));
    let mut seen = 0;
    let mut example = String::new();
    for case_rows in rows.chunk_by(|a, b| a[case_col] == b[case_col]) {
        let stages: Vec<&str> = case_rows.iter().map(|r| r[stage_col]).collect();
        check(stages == ["raw", "roi-crop", "pseudo-label"], || {
            format!("stages {stages:?}")
        })?;
        let ratios: Vec<f64> = case_rows
            .iter()
            .map(|r| r[ratio_col].parse().unwrap())
            .collect();
        check(ratios.windows(2).all(|w| w[0] <= w[1]), || {
            format!("ratios {ratios:?} decrease")
        })?;
        if example.is_empty() {
            example = ratios
                .iter()
                .map(|r| format!("{r:.3}%"))
                .collect::<Vec<_>>()
                .join(" -> ");
        }
        seen += 1;
    }
    check(seen == 4, || format!("{seen} cases in stats"))?;
    Ok(format!(
        "{hidden_total} hidden voxels over 6 phantoms; e.g. {example}"
    ))
}

fn postprocess_filter_criterion() -> Outcome {
    let spec = PhantomSpec {
        dims: [16, 48, 64],
        spacing: SPACING,
        origin: [0.0; 3],
        seed: 0,
        nodes: vec![
            NodeSpec::sphere([24.0, 22.0, 14.0], 3.0, true),
            NodeSpec::sphere([24.0, 22.0, 38.0], 8.0, true),
        ],
        organs: vec![],
        noise_std: 0.0,
    };
    let case = spec.generate().unwrap();
    let g = *case.gt.geometry();
    let large = Mask::from_indices(g, node_voxels(&g, &spec.nodes[1]));
    let filtered = postprocess_filter(&case.gt, 9.5, Connectivity::TwentySix);
    check(filtered == large, || {
        "filter did not keep exactly the 8 mm sphere".into()
    })?;

    let mut r = rng(105);
    for i in 0..100 {
        let m = random_mask(&mut r, 12, SPACING);
        let once = postprocess_filter(&m, 9.5, Connectivity::TwentySix);
        check(once.is_subset_of(&m), || {
            format!("mask {i}: output not a subset")
        })?;
        let twice = postprocess_filter(&once, 9.5, Connectivity::TwentySix);
        check(twice == once, || format!("mask {i}: filter not idempotent"))?;
    }
    Ok("3 mm sphere removed, 8 mm kept; 100 random masks idempotent and shrinking".into())
}

fn wilcoxon_criterion() -> Outcome {
    let mut r = rng(106);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let n = 1 + i % 10;
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64 * 0.5).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0..6) as f64 * 0.5).collect();
        let got = wilcoxon_signed_rank(&a, &b).unwrap().p_two_sided;
        worst = worst.max((got - enumerate_wilcoxon_p(&a, &b)).abs());
    }
    check(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    let p = wilcoxon_signed_rank(&[1.0, 2.0, 3.0, 4.0, 5.0], &[0.0; 5])
        .unwrap()
        .p_two_sided;
    check(p == 0.0625, || format!("d = 1..5 gives p = {p}"))?;
    let x = [0.3, 0.7, 0.1, 0.9];
    let same = wilcoxon_signed_rank(&x, &x).unwrap().p_two_sided;
    check(same == 1.0, || format!("identical samples give p = {same}"))?;
    Ok(format!(
        "50 samples, max |p err| {worst:.1e}; p(1..5) = {p}; p(identical) = {same}"
    ))
}

fn large_only_curve() -> Outcome {
    let model = SimulatedModel::LargeOnly { min_short_mm: 10.0 };
    let mut curves = Vec::new();
    for seed in 0..10u64 {
        let case = PhantomSpec::random(seed, [24, 80, 80], SPACING, 6)
            .unwrap()
            .generate()
            .unwrap();
        let pred = simulate_prediction(&case.gt, model, Connectivity::TwentySix, seed).unwrap();
        curves.push(
            overlap_curves(&pred, &case.gt, 2.5, Connectivity::TwentySix)
                .unwrap()
                .0,
        );
    }
    let curve = OverlapBinCurve::merge(&curves).unwrap().unwrap();
    check(curve.direction == OverlapDirection::GtOnPred, || {
        "wrong direction".into()
    })?;
    let below: Vec<_> = curve
        .bins
        .iter()
        .filter(|b| b.lo_mm + 2.5 <= 10.0)
        .collect();
    let above: Vec<_> = curve.bins.iter().filter(|b| b.lo_mm >= 10.0).collect();
    check(!below.is_empty() && !above.is_empty(), || {
        "cohort lacks small or large nodes".into()
    })?;
    for b in &below {
        check(b.mean_overlap <= 0.05, || {
            format!("bin {} mean {}", b.lo_mm, b.mean_overlap)
        })?;
    }
    for b in &above {
        check(b.mean_overlap >= 0.95, || {
            format!("bin {} mean {}", b.lo_mm, b.mean_overlap)
        })?;
    }
    let fmt = |bs: &[&lymphkit_core::evalkit::OverlapBin]| {
        bs.iter()
            .map(|b| format!("{}:{:.2}", b.lo_mm, b.mean_overlap))
            .collect::<Vec<_>>()
            .join(" ")
    };
    Ok(format!(
        "below 10 mm [{}], from 10 mm [{}]",
        fmt(&below),
        fmt(&above)
    ))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn run_ok(bin: &Path, args: &[&str]) -> String {
    let out = Command::new(bin).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "lymphkit {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Every file below `root` with its bytes, keyed by relative path.
fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn pipeline(bin: &Path, root: &Path) -> Vec<(String, Vec<u8>)> {
    let ds = root.join("ds");
    let ev = root.join("eval");
    run_ok(
        bin,
        &[
            "phantom",
            "--out",
            path(&ds),
            "--cohort",
            "10",
            "--seed",
            "2024",
            "--predictions",
        ],
    );
    run_ok(bin, &["preprocess", path(&ds)]);
    run_ok(bin, &["strategy", path(&ds), "--strategy", "pseudo"]);
    for model in ["large-only", "all-sizes"] {
        let pred = ds.join("predictions").join(model);
        run_ok(
            bin,
            &[
                "eval",
                "--pred",
                path(&pred),
                "--gt",
                path(&ds),
                "--out",
                path(&ev.join(model)),
            ],
        );
    }
    let stdout = run_ok(
        bin,
        &[
            "compare",
            path(&ev.join("large-only")),
            path(&ev.join("all-sizes")),
            "--out",
            path(&root.join("compare")),
        ],
    );
    let mut files = snapshot(root);
    files.push(("<compare stdout>".into(), stdout.into_bytes()));
    files
}

fn end_to_end(bin: &Path) -> Outcome {
    let start = Instant::now();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = pipeline(bin, a.path());
    let elapsed = start.elapsed();
    let second = pipeline(bin, b.path());
    let names = |s: &[(String, Vec<u8>)]| s.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>();
    check(names(&first) == names(&second), || {
        "runs produced different file sets".into()
    })?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        check(x == y, || format!("{name} differs between runs"))?;
    }
    let reports = first.iter().filter(|(n, _)| n.ends_with(".tsv")).count();
    check(reports >= 10, || format!("only {reports} reports written"))?;
    check(elapsed < Duration::from_secs(120), || {
        format!("pipeline took {elapsed:?}")
    })?;
    Ok(format!(
        "{} files ({reports} reports) byte-identical; one 10-case run {:.2} s",
        first.len(),
        elapsed.as_secs_f64()
    ))
}

fn main() {
    let bin = Path::new(env!("CARGO_BIN_EXE_lymphkit"));
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        (
            "oracle equivalence, morphology",
            Box::new(morphology_oracles),
        ),
        ("oracle equivalence, metrics", Box::new(metric_oracles)),
        ("RECIST measurement", Box::new(recist_measurement)),
        ("strategy semantics", Box::new(|| strategy_semantics(bin))),
        (
            "postprocessing filter",
            Box::new(postprocess_filter_criterion),
        ),
        ("Wilcoxon signed-rank", Box::new(wilcoxon_criterion)),
        ("large-node-only overlap curve", Box::new(large_only_curve)),
        ("end-to-end determinism", Box::new(|| end_to_end(bin))),
    ];
    // Keep panics from earlier criteria from interleaving with the verdicts.
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(msg)
        });
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
