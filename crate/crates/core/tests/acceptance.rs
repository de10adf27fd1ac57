//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero if any fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use roadtrack::association::hungarian::hungarian;
use roadtrack::association::SequenceTracker;
use roadtrack::evaluation::{boxes_from_tracks, score, LabeledBox, MOTReport};
use roadtrack::geometry::camera::{backproject_ground, backprojection_jacobian, project};
use roadtrack::geometry::polygon::polygon_overlap;
use roadtrack::kitti_io::{
    format_poses, format_records, format_results, motions_from_poses, parse_labels, parse_poses, relative_motion,
};
use roadtrack::sim::{generate, render, NoiseConfig, SimConfig};
use roadtrack::{
    build_cost_matrix, run_sequence, BBox, CameraRig, ConvexPolygon2D, CostConfig, CostMatrix, CostWeights, Detection,
    Mat3, RigidMotion, Track, TrackerConfig, Vec2, Vec3,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn median(v: &mut [usize]) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

fn track_scene(cfg: &SimConfig, seed: u64, tracker: &TrackerConfig<f64>) -> MOTReport {
    let rendered = render(&generate(cfg, seed));
    let b = &rendered.bundle;
    let tracks = run_sequence(&b.frames, &b.motions, &b.rig, tracker).expect("aligned bundle");
    score(b.gt.as_ref().expect("simulated ground truth"), &boxes_from_tracks(&tracks), 0.5)
        .expect("non-empty ground truth")
}

fn weights(w: [f64; 4]) -> TrackerConfig<f64> {
    let mut cfg = TrackerConfig::default();
    cfg.cost.weights = CostWeights::with_weights(w[0], w[1], w[2], w[3]).expect("valid weights");
    cfg
}

// ------------------------------------------------------------------ criteria

fn hungarian_optimality() -> Outcome {
    fn brute(m: &[Vec<f64>]) -> f64 {
        fn go(m: &[Vec<f64>], row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == m.len() {
                *best = best.min(acc);
                return;
            }
            for c in 0..m.len() {
                if !used[c] {
                    used[c] = true;
                    go(m, row + 1, used, acc + m[row][c], best);
                    used[c] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        go(m, 0, &mut vec![false; m.len()], 0.0, &mut best);
        best
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut mismatches = 0;
    for k in 0..1000 {
        let n = k % 7 + 1;
        // multiples of 1/64 keep every partial sum exact
        let m: Vec<Vec<f64>> =
            (0..n).map(|_| (0..n).map(|_| rng.random_range(0..=64) as f64 / 64.0).collect()).collect();
        let a = hungarian(&CostMatrix::from_rows(&m));
        if a.total_cost != brute(&m) || a.pairs.len() != n {
            mismatches += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(mismatches == 0 && secs < 5.0, format!("{mismatches} mismatches over 1000 matrices, {secs:.3} s"))
}

fn geometry_exactness() -> Outcome {
    let rig = CameraRig::<f64>::kitti_like();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_px: f64 = 0.0;
    let mut worst_jac: f64 = 0.0;
    for _ in 0..10_000 {
        let p = Vec2::new(rng.random_range(0.0..rig.image_width), rng.random_range(rig.cy + 1.0..rig.image_height));
        let x = backproject_ground(p, &rig).expect("below horizon");
        let q = project(x, &rig).expect("in front");
        worst_px = worst_px.max((q - p).norm());

        let j = backprojection_jacobian(p, &rig).expect("below horizon");
        let h = 1e-3;
        for (axis, col) in j.iter().enumerate() {
            let d = if axis == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
            let plus = backproject_ground(p + d, &rig).unwrap();
            let minus = backproject_ground(p - d, &rig).unwrap();
            let fd = (plus - minus) * (0.5 / h);
            worst_jac = worst_jac.max((fd - *col).norm() / col.norm());
        }
    }
    outcome(
        worst_px < 1e-9 && worst_jac < 1e-5,
        format!("round trip max {worst_px:.2e} px, Jacobian max rel err {worst_jac:.2e}"),
    )
}

fn random_convex(rng: &mut ChaCha8Rng, cx: f64, cy: f64) -> ConvexPolygon2D<f64> {
    let n = rng.random_range(3..=8);
    let pts: Vec<Vec2<f64>> = (0..n)
        .map(|_| {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rng.random_range(0.5..2.0);
            Vec2::new(cx + r * a.cos(), cy + r * a.sin())
        })
        .collect();
    ConvexPolygon2D::hull(&pts)
}

/// Half-plane test against a counter-clockwise vertex list.
fn inside(v: &[Vec2<f64>], p: Vec2<f64>) -> bool {
    (0..v.len()).all(|i| {
        let (a, b) = (v[i], v[(i + 1) % v.len()]);
        (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x) >= 0.0
    })
}

fn overlap_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 100 {
        let a = random_convex(&mut rng, 0.0, 0.0);
        let (dx, dy) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let b = random_convex(&mut rng, dx, dy);
        if a.len() < 3 || b.len() < 3 {
            continue;
        }
        let (inter, _, _) = polygon_overlap(&a, &b);
        let va = a.vertices();
        let (x0, x1) = va.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.x), h.max(p.x)));
        let (y0, y1) = va.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.y), h.max(p.y)));
        let box_area = (x1 - x0) * (y1 - y0);
        // keep pairs whose overlap is a sizeable part of the sampling box
        if inter < 0.2 * box_area {
            continue;
        }
        let samples = 1_000_000;
        let mut hits = 0u32;
        for _ in 0..samples {
            let p = Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
            if inside(va, p) && inside(b.vertices(), p) {
                hits += 1;
            }
        }
        let mc = box_area * hits as f64 / samples as f64;
        worst = worst.max((mc - inter).abs() / inter);
        pairs += 1;
    }
    let rects = [
        ((0.0, 0.0, 2.0, 2.0), (1.0, 0.0, 3.0, 2.0), 2.0),
        ((0.0, 0.0, 4.0, 4.0), (1.0, 1.0, 2.0, 3.0), 2.0),
        ((0.0, 0.0, 1.0, 1.0), (2.0, 2.0, 3.0, 3.0), 0.0),
        ((0.0, 0.0, 100.0, 100.0), (50.0, 0.0, 150.0, 100.0), 5000.0),
        ((-1.5, -0.5, 0.5, 0.25), (-0.5, -1.0, 1.0, 0.0), 0.5),
    ];
    let exact = rects.iter().all(|&((a0, a1, a2, a3), (b0, b1, b2, b3), expect)| {
        let a = ConvexPolygon2D::rectangle(a0, a1, a2, a3);
        let b = ConvexPolygon2D::rectangle(b0, b1, b2, b3);
        polygon_overlap(&a, &b).0 == expect && polygon_overlap(&b, &a).0 == expect
    });
    outcome(
        worst < 1e-2 && exact,
        format!("Monte-Carlo max rel err {worst:.2e} over {pairs} pairs, rectangles exact: {exact}"),
    )
}

fn noise_free_oracle() -> Outcome {
    let cfg = SimConfig { frames: 50, objects: 10, noise: NoiseConfig::none(), ..SimConfig::default() };
    let mut failures = Vec::new();
    let mut boxes = 0;
    for seed in 0..100 {
        let scene = generate(&cfg, seed);
        let r = track_scene(&cfg, seed, &TrackerConfig::default());
        boxes += r.gt_count;
        if scene.objects.len() != 10 || r.mota != 1.0 || r.ids != 0 || r.frag != 0 {
            failures.push(seed);
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} of 100 seeds imperfect {failures:?}, {boxes} ground-truth boxes", failures.len()),
    )
}

fn cue_value_trend() -> Outcome {
    let cfg = SimConfig { noise: NoiseConfig::noisy(2.0, 0.1, 1.0), ..SimConfig::default() };
    let full = TrackerConfig::default();
    let app = weights([0.0, 0.0, 1.0, 0.0]);
    let (mut at_least, mut ids_full, mut ids_app) = (0, Vec::new(), Vec::new());
    for seed in 0..100 {
        let f = track_scene(&cfg, seed, &full);
        let a = track_scene(&cfg, seed, &app);
        if f.mota >= a.mota {
            at_least += 1;
        }
        ids_full.push(f.ids);
        ids_app.push(a.ids);
    }
    let (mf, ma) = (median(&mut ids_full), median(&mut ids_app));
    outcome(
        at_least >= 90 && mf < ma,
        format!("full >= appearance-only MOTA on {at_least}/100 seeds, median IDS {mf} vs {ma}"),
    )
}

fn gating_effectiveness() -> Outcome {
    let cfg = SimConfig { lanes: 3, objects: 12, noise: NoiseConfig::none(), ..SimConfig::default() };
    let cost = CostConfig::default();
    let (mut frac_sum, mut frames, mut true_pairs, mut gated_true) = (0.0, 0usize, 0usize, 0usize);
    let mut worst_scene: f64 = 0.0;
    for seed in 0..50 {
        let r = render(&generate(&cfg, seed));
        let b = &r.bundle;
        let (mut scene_sum, mut scene_frames) = (0.0, 0usize);
        for f in 0..b.frames.len() - 1 {
            let m = build_cost_matrix(&b.frames[f], &b.frames[f + 1], &b.motions[f], &b.rig, &cost);
            if m.rows() * m.cols() == 0 {
                continue;
            }
            scene_sum += m.evaluated_count() as f64 / (m.rows() * m.cols()) as f64;
            scene_frames += 1;
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if r.truth[f][i].is_some() && r.truth[f][i] == r.truth[f + 1][j] {
                        true_pairs += 1;
                        gated_true += m.is_gated(i, j) as usize;
                    }
                }
            }
        }
        worst_scene = worst_scene.max(scene_sum / scene_frames as f64);
        frac_sum += scene_sum;
        frames += scene_frames;
    }
    let mean = frac_sum / frames as f64;
    outcome(
        mean <= 0.5 && gated_true == 0,
        format!(
            "evaluated {:.1}% of entries (worst scene {:.1}%), {gated_true}/{true_pairs} true pairs gated",
            100.0 * mean,
            100.0 * worst_scene
        ),
    )
}

fn shape_pose_at_intersections() -> Outcome {
    let cfg = SimConfig { noise: NoiseConfig::noisy(2.0, 0.1, 1.0), ..SimConfig::intersection() };
    let without = weights([0.0, 0.0, 1.0, 0.0]);
    let with = weights([0.0, 0.0, 2.0 / 3.0, 1.0 / 3.0]);
    let (mut better, mut sum_without, mut sum_with) = (0, 0, 0);
    for seed in 0..50 {
        let a = track_scene(&cfg, seed, &without);
        let b = track_scene(&cfg, seed, &with);
        better += (b.ids < a.ids) as usize;
        sum_without += a.ids;
        sum_with += b.ids;
    }
    outcome(better >= 40, format!("shape/pose lowers IDS on {better}/50 seeds (total {sum_without} -> {sum_with})"))
}

fn lb(frame: usize, id: u64, x: f64) -> LabeledBox<f64> {
    LabeledBox { frame, id, bbox: BBox::new(x, 100.0, 50.0, 40.0) }
}

fn evaluator_golden() -> Outcome {
    let track = |id: u64, x: f64, frames: std::ops::Range<usize>| frames.map(move |f| lb(f, id, x)).collect::<Vec<_>>();
    let gt: Vec<_> = track(1, 0.0, 0..10);
    // name, ground truth, hypotheses, MOTA, IDS, FRAG
    type Case = (&'static str, Vec<LabeledBox<f64>>, Vec<LabeledBox<f64>>, f64, usize, usize);
    let mut cases: Vec<Case> = Vec::new();

    let two: Vec<_> = track(1, 0.0, 0..5).into_iter().chain(track(2, 300.0, 0..5)).collect();
    cases.push(("perfect", two.clone(), two, 1.0, 0, 0));

    let mut fp = gt.clone();
    fp.push(lb(3, 9, 600.0));
    cases.push(("1-FP", gt.clone(), fp, 0.9, 0, 0));

    cases.push(("1-FN", gt.clone(), track(1, 0.0, 0..9), 0.9, 0, 0));

    let ids: Vec<_> = track(1, 0.0, 0..5).into_iter().chain(track(2, 0.0, 5..10)).collect();
    cases.push(("1-IDS", gt.clone(), ids, 0.9, 1, 0));

    let frag: Vec<_> = track(1, 0.0, 0..3).into_iter().chain(track(1, 0.0, 5..10)).collect();
    cases.push(("fragmentation", gt.clone(), frag, 0.8, 0, 1));

    // 20 boxes with one miss, one false alarm and one switch
    let gt20: Vec<_> = track(1, 0.0, 0..10).into_iter().chain(track(2, 300.0, 0..10)).collect();
    let mut hyp20: Vec<_> = track(7, 0.0, 0..10).into_iter().filter(|b| b.frame != 4).collect();
    hyp20.extend(track(8, 300.0, 0..6));
    hyp20.extend(track(9, 300.0, 6..10));
    hyp20.push(lb(2, 5, 900.0));
    cases.push(("20-box mixed", gt20, hyp20, 0.85, 1, 1));

    let mut failed = Vec::new();
    for (name, g, h, mota, ids, frag) in &cases {
        let r = score(g, h, 0.5).expect("non-empty");
        if (r.mota - mota).abs() > 1e-12 || r.ids != *ids || r.frag != *frag {
            failed.push(format!("{name}: mota {} ids {} frag {}", r.mota, r.ids, r.frag));
        }
    }
    outcome(failed.is_empty(), format!("{} scenarios, mismatches: {failed:?}", cases.len()))
}

fn real_time_bound() -> Outcome {
    let cfg = SimConfig {
        objects: 12,
        well_separated: false,
        noise: NoiseConfig { clutter_rate: 60.0, ..NoiseConfig::noisy(1.0, 0.0, 0.0) },
        ..SimConfig::default()
    };
    let (mut total, mut frames, mut short) = (0.0, 0usize, 0usize);
    for seed in 0..5 {
        let r = render(&generate(&cfg, seed));
        let b = &r.bundle;
        let mut seq = SequenceTracker::new(b.rig, TrackerConfig::default());
        for (f, dets) in b.frames.iter().enumerate() {
            let dets: Vec<Detection<f64>> = dets.iter().take(30).cloned().collect();
            short += (dets.len() < 30) as usize;
            let motion = f.checked_sub(1).map(|k| b.motions[k]);
            let t = Instant::now();
            seq.push_frame(&dets, motion);
            total += t.elapsed().as_secs_f64();
            frames += 1;
        }
    }
    let ms = 1e3 * total / frames as f64;
    outcome(
        ms < 10.0 && short == 0,
        format!("{ms:.3} ms/frame over {frames} frames of 30 detections ({short} frames short)"),
    )
}

fn format_round_trips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let two = |rng: &mut ChaCha8Rng, lo: i64, hi: i64| rng.random_range(lo * 100..hi * 100) as f64 / 100.0;
    let tracks: Vec<Track<f64>> = (1..=1000u64)
        .map(|id| {
            let start = rng.random_range(0..50);
            let mut t = None::<Track<f64>>;
            for f in start..start + rng.random_range(1..5) {
                let (x, y) = (two(&mut rng, 0, 1200), two(&mut rng, 0, 360));
                let (w, h) = (two(&mut rng, 1, 200), two(&mut rng, 1, 150));
                let d = Detection::new(f, BBox::new(x, y, w, h), two(&mut rng, 0, 1));
                match &mut t {
                    None => t = Some(Track::new(id, d)),
                    Some(t) => t.entries.push(d),
                }
            }
            t.unwrap()
        })
        .collect();
    let first = format_results(&tracks);
    let records = parse_labels::<f64>(&first).expect("own output parses");
    let second = format_records(&records);
    let third = format_records(&parse_labels::<f64>(&second).unwrap());
    let fields_ok = records.len() == tracks.iter().map(|t| t.entries.len()).sum::<usize>()
        && records.iter().all(|r| {
            let t = &tracks[(r.id - 1) as usize];
            let d = t.entries.iter().find(|d| d.frame == r.frame).unwrap();
            let close = |a: f64, b: f64| (a - b).abs() < 5e-9;
            close(r.bbox.x, d.bbox.x)
                && close(r.bbox.y, d.bbox.y)
                && close(r.bbox.right(), d.bbox.right())
                && close(r.bbox.bottom(), d.bbox.bottom())
                && close(r.score.unwrap(), d.score)
        });

    let poses: Vec<RigidMotion<f64>> = (0..40)
        .map(|_| RigidMotion {
            rotation: Mat3::from_axis_angle(Vec3::new(
                rng.random_range(-0.1..0.1),
                rng.random_range(-3.0..3.0),
                rng.random_range(-0.1..0.1),
            )),
            translation: Vec3::new(
                rng.random_range(-50.0..50.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-50.0..50.0),
            ),
            ..RigidMotion::identity()
        })
        .collect();
    let parsed = parse_poses::<f64>(&format_poses(&poses)).expect("own output parses");
    let motions = motions_from_poses(&parsed, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for f in 0..parsed.len() - 2 {
        let direct = relative_motion(&parsed[f], &parsed[f + 2]);
        let composed = motions[f + 1].compose(&motions[f]);
        worst = worst.max((direct.rotation - composed.rotation).max_abs());
        worst = worst.max((direct.translation - composed.translation).norm());
    }
    outcome(
        first == second && second == third && fields_ok && worst < 1e-9,
        format!(
            "results byte-identical: {}, fields exact: {fields_ok}, pose composition max err {worst:.2e}",
            first == second && second == third
        ),
    )
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("hungarian optimality", hungarian_optimality),
        ("geometry exactness", geometry_exactness),
        ("overlap correctness", overlap_correctness),
        ("noise-free end-to-end oracle", noise_free_oracle),
        ("cue-value trend", cue_value_trend),
        ("gating effectiveness", gating_effectiveness),
        ("shape/pose cue at intersections", shape_pose_at_intersections),
        ("evaluator golden tests", evaluator_golden),
        ("real-time bound", real_time_bound),
        ("format round trips", format_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
