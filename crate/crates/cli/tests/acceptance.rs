//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use contrastive_vc::bounds::{
    hemisphere_bound, hemisphere_experiment, jl_check, jl_lemma_dimension, vc_upper_crossover,
    VectorLayout,
};
use contrastive_vc::realize::{realize, realize_arbitrary, realize_class_partition, RealizeConfig};
use contrastive_vc::seed::{derive_seed, rng};
use contrastive_vc::shatter::construct::{Construction, Family};
use contrastive_vc::shatter::{is_shattered, ShatterConfig};
use contrastive_vc::sim::{gradient_check, sweep, LabeledTuple, LossKind, SweepConfig};
use contrastive_vc::{DistanceModel, Error, HypothesisClass, Label, Query, QueryKind, QuerySet, Rational};
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::Value;

use oracle::{brute_force_arbitrary, brute_force_partition, random_labels, random_triplets};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contrastive-vc"));
    cmd.env_remove("CONTRASTIVE_VC_THREADS");
    cmd
}

/// Run the CLI and return its stdout, failing on a non-zero exit.
fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = bin().args(args).output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8(out.stdout).expect("UTF-8 output"))
}

fn result_of(stdout: &str) -> Result<Value, String> {
    let doc: Value = serde_json::from_str(stdout).map_err(|e| e.to_string())?;
    Ok(doc["result"].clone())
}

fn construction_verification() -> Outcome {
    let mut lp_labelings = 0u64;
    let mut runs = 0;
    for n in 3..=6usize {
        for d in 2..n {
            for p in 1..=3u32 {
                let r = result_of(&run_cli(&[
                    "construct", "--family", "lp", "--n", &n.to_string(), "--d", &d.to_string(),
                    "--p", &p.to_string(), "--verify",
                ])?)?;
                let want = 1u64 << ((d - 1) * (n - d));
                check(
                    r["labelings"] == want && r["labelings_verified"] == want,
                    || format!("lp n={n} d={d} p={p}: {r}"),
                )?;
                lp_labelings += want;
                runs += 1;
            }
        }
    }
    let mut metric_labelings = 0u64;
    for n in 3..=6usize {
        let r = result_of(&run_cli(&["construct", "--family", "arbitrary", "--n", &n.to_string(), "--verify"])?)?;
        let want = 1u64 << ((n - 1) * (n - 2) / 2);
        check(
            r["labelings_verified"] == want && r["metric_verified"] == true,
            || format!("arbitrary n={n}: {r}"),
        )?;
        // exhaustive triangle inequality on every witness, independent of the tool's check
        let c = Construction::new(Family::Arbitrary { n }).map_err(|e| e.to_string())?;
        let m = c.queries().len();
        for bits in 0..want {
            let labels: Vec<Label> = (0..m)
                .map(|i| Label::Positive((bits >> (m - 1 - i) & 1) as usize))
                .collect();
            let model = c.witness(&labels).map_err(|e| e.to_string())?;
            check(model.satisfies(c.queries(), &labels), || format!("n={n} labeling {bits}"))?;
            let DistanceModel::Matrix(mat) = model else {
                return Err("arbitrary witness is not a matrix".into());
            };
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let (ij, jk, ik): (&Rational, &Rational, &Rational) =
                            (mat.get(i, j), mat.get(j, k), mat.get(i, k));
                        check(ik <= &(ij + jk), || format!("n={n} labeling {bits}: triangle ({i},{j},{k})"))?;
                    }
                }
            }
        }
        metric_labelings += want;
    }
    Ok(format!(
        "{runs} lp constructions ({lp_labelings} labelings) and {metric_labelings} metric labelings verified"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(derive_seed(2, 0));
    let mut sat = 0;
    for i in 0..1000 {
        let n = r.random_range(3..=5);
        let m = r.random_range(1..=5);
        let qs = random_triplets(&mut r, n, m);
        let labels = random_labels(&mut r, m, 2, 0.0);
        let v = realize_arbitrary(&qs, &labels, false).map_err(|e| e.to_string())?;
        check(v.is_sat() == brute_force_arbitrary(&qs, &labels), || format!("arbitrary instance {i}"))?;
        sat += v.is_sat() as usize;
    }
    let mut part_sat = 0;
    for i in 0..1000 {
        let n = r.random_range(3..=6);
        let m = r.random_range(1..=6);
        let qs = random_triplets(&mut r, n, m);
        let labels = random_labels(&mut r, m, 2, 0.25);
        let v = realize_class_partition(&qs, &labels, 1 << 16).map_err(|e| e.to_string())?;
        check(v.is_sat() == brute_force_partition(&qs, &labels), || format!("partition instance {i}"))?;
        part_sat += v.is_sat() as usize;
    }
    Ok(format!(
        "0 disagreements (arbitrary {sat}/1000 SAT, partition {part_sat}/1000 SAT)"
    ))
}

fn shattering_goldens() -> Outcome {
    let (c, r, p, t) = (0, 1, 2, 3);
    let line = HypothesisClass::Lp { p: 2, d: 1 };
    let cfg = ShatterConfig::default();
    let s_prime = QuerySet::triplets(4, &[(c, p, t), (r, p, t)]).map_err(|e| e.to_string())?;
    let a = is_shattered(&s_prime, line, &cfg).map_err(|e| e.to_string())?;
    check(a.shattered && a.labelings_checked == 4, || format!("S' not shattered: {a:?}"))?;
    let s = QuerySet::triplets(4, &[(c, r, p), (c, p, t), (c, r, t)]).map_err(|e| e.to_string())?;
    let b = is_shattered(&s, line, &cfg).map_err(|e| e.to_string())?;
    // r closer than p, p closer than t, t closer than r
    let cyclic = vec![Label::Positive(0), Label::Positive(0), Label::Positive(1)];
    check(!b.shattered, || "S reported shattered".into())?;
    check(b.refuter.as_ref() == Some(&cyclic), || format!("refuter {:?}", b.refuter))?;
    let v = realize(&s, &cyclic, line, &RealizeConfig::default()).map_err(|e| e.to_string())?;
    check(v.is_unsat(), || "cyclic labeling realized".into())?;
    Ok("S' shattered (4/4), S refuted by the cyclic labeling".into())
}

fn wendel_hemisphere() -> Outcome {
    let trials = 100_000;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for l in 2..=4usize {
        for m in l + 1..=8usize {
            let bound = hemisphere_bound(l, m).map_err(|e| e.to_string())?.to_f64().unwrap();
            let seed = derive_seed(4, (l * 16 + m) as u64);
            let g = hemisphere_experiment(VectorLayout::Generic, l, m, trials, seed, false)
                .map_err(|e| e.to_string())?;
            let dev = (g.miss_probability - bound).abs();
            check(dev <= g.half_width, || {
                format!("generic l={l} m={m}: {} vs {bound} (3 sigma {})", g.miss_probability, g.half_width)
            })?;
            worst = worst.max(dev / g.half_width);
            for layout in [VectorLayout::Repeated, VectorLayout::Collinear] {
                let a = hemisphere_experiment(layout, l, m, trials, seed, false).map_err(|e| e.to_string())?;
                check(a.miss_probability <= bound + a.half_width, || {
                    format!("{layout:?} l={l} m={m}: {} above {bound}", a.miss_probability)
                })?;
            }
            cases += 1;
        }
    }
    Ok(format!("{cases} (l, m) cases, worst generic deviation {worst:.2} of 3 sigma"))
}

fn grid() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for n in 2..=64usize {
        for d in 1..=32usize {
            if (4..=64).contains(&(n * d)) {
                out.push((n, d));
            }
        }
    }
    out
}

fn crossover_bands() -> Outcome {
    let cross = |n, class| vc_upper_crossover(n, class).map_err(|e: Error| e.to_string());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let points = grid();
    for &(n, d) in &points {
        for p in [2, 4] {
            let ratio = cross(n, HypothesisClass::Lp { p, d })? as f64 / (n * d) as f64;
            check((1.0..=64.0).contains(&ratio), || format!("n={n} d={d} p={p}: ratio {ratio}"))?;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let even = cross(n, HypothesisClass::Lp { p: 2, d })? as f64;
        for p in [1, 3] {
            let odd = cross(n, HypothesisClass::Lp { p, d })? as f64;
            check(odd <= even * 8.0 * (n as f64).log2(), || format!("n={n} d={d} p={p}: {odd} vs {even}"))?;
        }
    }
    for n in 2..=64usize {
        let m = cross(n, HypothesisClass::Arbitrary)?;
        check(m == (n * n) as u64, || format!("arbitrary n={n}: {m}"))?;
    }
    Ok(format!("{} (n, d) points, even ratio in [{lo:.2}, {hi:.2}], arbitrary = n^2", points.len()))
}

fn random_knegative<R: Rng>(r: &mut R, n: usize, k: usize) -> Query {
    let mut tuple: Vec<usize> = Vec::new();
    while tuple.len() < k + 2 {
        let v = r.random_range(0..n);
        if !tuple.contains(&v) {
            tuple.push(v);
        }
    }
    Query::from_tuple(QueryKind::KNegative(k), &tuple).expect("distinct entries")
}

fn reductions() -> Outcome {
    let mut r = rng(derive_seed(6, 0));
    let cfg = RealizeConfig::default();
    let classes = [
        HypothesisClass::Arbitrary,
        HypothesisClass::Metric,
        HypothesisClass::Lp { p: 2, d: 1 },
        HypothesisClass::Lp { p: 1, d: 1 },
        HypothesisClass::ClassPartition,
    ];
    let err = |e: Error| e.to_string();
    for i in 0..500 {
        let class = classes[i % classes.len()];
        let n = r.random_range(4..=5);
        let m = r.random_range(1..=4);
        let qs = random_triplets(&mut r, n, m);
        let labels = random_labels(&mut r, m, 2, 0.0);
        let quads: Vec<Query> = qs
            .queries()
            .iter()
            .map(|q| {
                let t = q.to_tuple();
                Query::from_tuple(QueryKind::Quadruplet, &[t[0], t[1], t[0], t[2]]).unwrap()
            })
            .collect();
        let quad_set = QuerySet::with_duplicates(n, QueryKind::Quadruplet, quads, true).map_err(err)?;
        let a = realize(&qs, &labels, class, &cfg).map_err(err)?;
        let b = realize(&quad_set, &labels, class, &cfg).map_err(err)?;
        check(a.status() == b.status(), || format!("quadruplet instance {i} under {class}"))?;

        let k = r.random_range(2..=3);
        let n = r.random_range(k + 2..=6);
        let m = r.random_range(1..=3);
        let kneg: Vec<Query> = (0..m).map(|_| random_knegative(&mut r, n, k)).collect();
        let kset = QuerySet::with_duplicates(n, QueryKind::KNegative(k), kneg.clone(), true).map_err(err)?;
        let klabels: Vec<Label> = (0..m).map(|_| Label::Positive(r.random_range(0..=k))).collect();
        // positive beats each negative, built here from the raw tuples
        let mut triplets = Vec::new();
        let mut tlabels = Vec::new();
        for (q, l) in kneg.iter().zip(&klabels) {
            let t = q.to_tuple();
            let Label::Positive(pos) = *l else { unreachable!() };
            for j in 0..=k {
                if j != pos {
                    triplets.push(Query::triplet(t[0], t[1 + pos], t[1 + j]));
                    tlabels.push(Label::Positive(0));
                }
            }
        }
        let lowered = QuerySet::with_duplicates(n, QueryKind::Triplet, triplets, true).map_err(err)?;
        let a = realize(&kset, &klabels, class, &cfg).map_err(err)?;
        let b = realize(&lowered, &tlabels, class, &cfg).map_err(err)?;
        check(a.status() == b.status(), || format!("k-negative instance {i} under {class}"))?;
        if matches!(class, HypothesisClass::Arbitrary) {
            check(a.is_sat() == brute_force_arbitrary(&lowered, &tlabels), || {
                format!("k-negative instance {i}: ranking oracle disagrees")
            })?;
        }
    }
    Ok("500 quadruplet and 500 k-negative instances, 0 disagreements".into())
}

fn simulator_scaling() -> Outcome {
    let cfg: SweepConfig = serde_json::from_str(
        r#"{"n": 50, "ground_truth_dim": 3, "model_dim": 3, "p": 2, "noise": 0.0,
            "m_train": [500, 5000], "seeds": [0, 1, 2, 3, 4, 5, 6, 7, 8, 9]}"#,
    )
    .expect("sweep config");
    let result = sweep(&cfg).map_err(|e| e.to_string())?;
    let (small, large) = (&result.summary[0], &result.summary[1]);
    let factor = small.median_gap / large.median_gap;
    let band = (10f64.sqrt() / 2.0, 2.0 * 10f64.sqrt());
    let detail = format!(
        "median gap {:.4} -> {:.4} (factor {factor:.2}, band [{:.2}, {:.2}]); median ratio {:.2} and {:.2}",
        small.median_gap, large.median_gap, band.0, band.1, small.median_ratio, large.median_ratio
    );
    let ratios_ok = [small.median_ratio, large.median_ratio]
        .iter()
        .all(|r| (0.1..=10.0).contains(r));
    if factor >= band.0 && factor <= band.1 && ratios_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn jl_empirical() -> Outcome {
    let mut r = rng(derive_seed(8, 0));
    let points: Vec<Vec<f64>> = (0..50)
        .map(|_| (0..100).map(|_| r.random::<f64>()).collect())
        .collect();
    let beta = 0.5;
    let d1 = jl_lemma_dimension(50, beta).map_err(|e| e.to_string())?;
    check(d1 == 235, || format!("d1 = {d1}"))?;
    let mut within = 0;
    let mut worst: f64 = 1.0;
    for seed in 0..10 {
        let rep = jl_check(&points, beta, Some(d1), seed).map_err(|e| e.to_string())?;
        within += rep.within() as usize;
        worst = worst.max(rep.distortion.worst());
    }
    let detail = format!("{within}/10 seeds within 1 +- {beta} at d1 = {d1}, worst distortion {worst:.3}");
    if within >= 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_checks() -> Outcome {
    let mut r = rng(derive_seed(9, 0));
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut kinks = 0;
    for kind in [LossKind::MarginTriplet, LossKind::SoftmaxContrastive] {
        let mut done = 0;
        while done < 100 {
            let (n, dim) = (5, 3);
            let p = r.random_range(1..=3u32);
            let theta: Vec<f64> = (0..n * dim).map(|_| r.random_range(-1.0..1.0)).collect();
            let k = r.random_range(1..=3);
            let mut members: Vec<usize> = Vec::new();
            while members.len() < k + 2 {
                let v = r.random_range(0..n);
                if !members.contains(&v) {
                    members.push(v);
                }
            }
            let tuple = LabeledTuple {
                anchor: members[0],
                candidates: members[1..].to_vec(),
                positive: r.random_range(0..=k),
            };
            match gradient_check(kind, p, dim, &tuple, &theta, h) {
                Ok(err) => {
                    check(err <= 1e-5, || format!("{kind:?} p={p}: relative error {err:e}"))?;
                    worst = worst.max(err);
                    done += 1;
                }
                Err(Error::KinkDetected) => kinks += 1,
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(format!("200 configurations, worst relative error {worst:.2e} ({kinks} kink draws skipped)"))
}

/// Primary payload: the `result` object of a JSON report, or the body of a
/// CSV report after its manifest line.
fn payload(stdout: &str) -> Result<String, String> {
    if let Some(rest) = stdout.strip_prefix("# manifest: ") {
        let (_, body) = rest.split_once('\n').ok_or("CSV without body")?;
        return Ok(body.to_string());
    }
    let doc: Value = serde_json::from_str(stdout).map_err(|e| e.to_string())?;
    check(doc["manifest"]["seed"].is_u64(), || "manifest missing".into())?;
    Ok(serde_json::to_string(&doc["result"]).expect("re-serialize"))
}

fn determinism(dir: &Path) -> Outcome {
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).expect("write input");
        path.to_string_lossy().into_owned()
    };
    let numeric = write(
        "numeric.json",
        r#"{"n": 5, "kind": "triplet", "class": {"variant": "lp", "p": 2, "d": 2},
            "queries": [[0,1,2],[1,2,3],[2,3,4],[3,4,0],[4,0,1]], "labels": [0,1,0,1,1]}"#,
    );
    let shatter = write(
        "shatter.json",
        r#"{"n": 5, "kind": "triplet", "class": {"variant": "metric"},
            "queries": [[0,1,2],[0,2,3],[1,2,3],[1,3,4],[2,3,4]]}"#,
    );
    let mut pr = rng(derive_seed(10, 0));
    let pts: Vec<Vec<f64>> = (0..20).map(|_| (0..30).map(|_| pr.random::<f64>()).collect()).collect();
    let points = write("points.json", &serde_json::json!({ "points": pts }).to_string());
    let sim = write(
        "sim.json",
        r#"{"n": 12, "ground_truth_dim": 2, "model_dim": 2, "m_train": [50, 200], "m_test": 2000,
            "seeds": [0, 1, 2], "steps": 200, "restarts": 2}"#,
    );
    let commands: Vec<Vec<&str>> = vec![
        vec!["realize", "--input", &numeric, "--restarts", "4", "--iterations", "400"],
        vec!["shatter", "--input", &shatter],
        vec!["vcdim", "--n", "4", "--class", "lp", "--p", "2", "--d", "1", "--budget", "3", "--max-queries", "6"],
        vec!["construct", "--family", "cosine", "--n", "5", "--d", "3", "--verify"],
        vec!["bounds", "--setting", "lp", "--n", "12", "--d", "3", "--p", "3", "--agnostic", "--k", "4"],
        vec!["wendel", "--dim", "3", "--m", "7", "--trials", "20000", "--check-duality"],
        vec!["jl-check", "--points", &points, "--beta", "0.5"],
        vec!["simulate", "--config", &sim],
    ];
    for args in &commands {
        let mut outputs = Vec::new();
        for threads in ["1", "8", "8"] {
            let mut full = vec!["--seed", "17", "--threads", threads];
            full.extend(args.iter().copied());
            outputs.push(payload(&run_cli(&full)?)?);
        }
        check(outputs.iter().all(|o| o == &outputs[0]), || format!("{} differs across runs", args[0]))?;
    }
    Ok(format!("{} subcommands byte-identical at 1 and 8 workers", commands.len()))
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("construction verification", Box::new(construction_verification)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("shattering goldens", Box::new(shattering_goldens)),
        ("hemisphere probability", Box::new(wendel_hemisphere)),
        ("crossover bands", Box::new(crossover_bands)),
        ("quadruplet and k-negative reductions", Box::new(reductions)),
        ("simulator scaling", Box::new(simulator_scaling)),
        ("JL distortion", Box::new(jl_empirical)),
        ("gradient checks", Box::new(gradient_checks)),
        ("determinism", Box::new(|| determinism(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
