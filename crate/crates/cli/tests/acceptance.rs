//! The twelve acceptance criteria, run in order with their tolerances and
//! wall-clock budgets. Each prints one `[PASS]`/`[FAIL]` line; the test
//! fails if any criterion does.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use oracle::{all_paths, image, interior, is_monotone, kron_all, max_abs, proj0, subword_products, M};
use qcrystal::coalgebra::{coproduct_paths_ordered, CoproductMode, SplitOrder};
use qcrystal::coxeter::{
    bruhat_leq, compose, longest_permutation, longest_word, maximal_subwords_of_longest, normal_form,
    Permutation, ReducedWord,
};
use qcrystal::crystal::{
    braid_equivalence_check, convergence_deficit, diagonal_images, evaluate_kernel_element,
    factorization_check, recover_torus_label, BraidOptions, CrystalError, DeficitReport,
};
use qcrystal::reps::{unitarity_residuals, GeneratorIndex, RepSpec, TorusPoint};
use qcrystal::soibelman::{limit_algebra_sample, torus_grid};
use qcrystal_cli::{cmd_verify, coassociativity_suite, RunConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn word(n: usize, letters: &[usize]) -> ReducedWord {
    ReducedWord::new(n, letters.to_vec()).unwrap()
}

fn longest(n: usize) -> ReducedWord {
    longest_word(n).word(n).unwrap()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn anchors() -> Outcome {
    let t0 = TorusPoint::identity(2);
    let mut worst: f64 = 0.0;
    for q in [0.5, 0.1, 0.01] {
        let r = convergence_deficit(&t0, &word(2, &[1]), q, 8).map_err(err)?;
        let z21 = r.get(GeneratorIndex::new(2, 1)).unwrap().lower;
        let z11 = r.get(GeneratorIndex::new(1, 1)).unwrap().lower;
        let want11 = 1.0 - (1.0 - q * q).sqrt();
        worst = worst.max((z21 - q).abs()).max((z11 - want11).abs());
        ensure((z21 - q).abs() <= 1e-12, || format!("q={q}: z21 deficit {z21}"))?;
        ensure((z11 - want11).abs() <= 1e-12, || format!("q={q}: z11 deficit {z11} vs {want11}"))?;
    }
    Ok(format!("max error {worst:.1e}"))
}

fn convergence() -> Outcome {
    let t0 = TorusPoint::identity(2);
    let qs = [0.3, 0.2, 0.1, 0.05, 0.01];
    let reports: Vec<DeficitReport> =
        qs.iter().map(|&q| convergence_deficit(&t0, &longest(2), q, 8)).collect::<Result<_, _>>().map_err(err)?;
    for r in &reports {
        ensure(r.generators.len() == 9, || format!("{} generators", r.generators.len()))?;
        ensure(r.generators.iter().all(|g| g.lower <= g.upper), || format!("q={}: lower above upper", r.q))?;
    }
    let uppers: Vec<f64> = reports.iter().map(|r| r.max_upper).collect();
    ensure(uppers.windows(2).all(|p| p[1] < p[0]), || format!("not strictly decreasing: {uppers:?}"))?;
    ensure(uppers[4] <= uppers[0] / 10.0, || format!("{} > {}/10", uppers[4], uppers[0]))?;
    Ok(format!("max upper {:.4} -> {:.4}", uppers[0], uppers[4]))
}

fn t_uniformity() -> Outcome {
    let grid = torus_grid(2, 4).map_err(err)?;
    ensure(grid.points.len() == 16, || format!("{} grid points", grid.points.len()))?;
    let t0 = TorusPoint::identity(2);
    let mut checked = 0;
    for (w, q) in [(longest(2), 0.3), (word(2, &[1]), 0.1), (word(2, &[2, 1]), 0.05)] {
        let reference = convergence_deficit(&t0, &w, q, 8).map_err(err)?;
        for t in &grid.points {
            let r = convergence_deficit(t, &w, q, 8).map_err(err)?;
            ensure(r.generators == reference.generators, || format!("{:?} q={q}: t={t:?} differs", w.letters()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} reports identical to t0"))
}

fn braid() -> Outcome {
    let (d, tol) = (8, 1e-12);
    let r = braid_equivalence_check(0.0, d, 2, BraidOptions::default()).map_err(err)?;
    ensure(r.reflection.len() == 9, || format!("{} reflection cases", r.reflection.len()))?;
    ensure(r.pass && r.max_reflection_residual <= tol, || format!("reflection residual {}", r.max_reflection_residual))?;
    // dense cross-check of the same identity
    let t0 = [Complex64::new(1.0, 0.0); 2];
    let mut dense: f64 = 0.0;
    for i in 1..=3 {
        for j in 1..=3 {
            let a = image(2, &[1, 2, 1], &t0, 0.0, i, j, d);
            let b = image(2, &[2, 1, 2], &t0, 0.0, 4 - i, 4 - j, d);
            dense = dense.max(max_abs(&(a - b.adjoint())));
        }
    }
    ensure(dense <= tol, || format!("dense reflection residual {dense}"))?;
    let mut flips = 0;
    for q in [0.0, 0.3] {
        let r = braid_equivalence_check(q, d, 3, BraidOptions::default()).map_err(err)?;
        let pair = r.flip.iter().filter(|f| f.left == [1, 3] && f.right == [3, 1]).count();
        ensure(pair == 16, || format!("q={q}: {pair} flip cases for [1,3]/[3,1]"))?;
        ensure(r.pass && r.max_flip_residual <= tol, || format!("q={q}: flip residual {}", r.max_flip_residual))?;
        flips += r.flip.len();
    }
    let mutated = braid_equivalence_check(0.0, d, 2, BraidOptions { inject_sign_flip: true }).map_err(err)?;
    ensure(!mutated.pass, || "sign-flip mutation went undetected".into())?;
    Ok(format!("9 reflection cases, {flips} flip cases, max {:.1e}", r.max_reflection_residual.max(dense)))
}

fn kernel() -> Outcome {
    let (d, tol) = (8, 1e-12);
    let top = longest_permutation(2);
    let mut seen = 0;
    for t in [TorusPoint::identity(2), TorusPoint::from_angles(&[0.7, 2.9])] {
        for w in Permutation::all(2) {
            let letters = normal_form(&w).expand();
            let spec = RepSpec::new(t.clone(), word(2, &letters), 0.0).map_err(err)?;
            let e = evaluate_kernel_element(&spec, d).map_err(err)?;
            let got = e.image.section(d).map_err(err)?.to_dense();
            if w == top {
                let p0 = kron_all(&vec![proj0(d); 3]);
                let phase = got[(0, 0)];
                ensure((phase.norm() - 1.0).abs() <= tol, || format!("phase {phase}"))?;
                let dist = max_abs(&(&got - p0 * phase));
                ensure(dist <= tol, || format!("w_L image is {dist} from P0 x P0 x P0"))?;
            } else {
                ensure(e.bounds.upper <= tol, || format!("w={w}: norm up to {}", e.bounds.upper))?;
                ensure(max_abs(&got) == 0.0, || format!("w={w}: nonzero section"))?;
                seen += 1;
            }
        }
    }
    ensure(seen == 10, || format!("{seen} non-longest cases"))?;
    Ok("a vanishes below w_L and equals P0 x P0 x P0 on it".into())
}

fn factorization() -> Outcome {
    let t = TorusPoint::from_angles(&[0.3, 1.7]);
    let perms = Permutation::all(2);
    let (mut pairs, mut worst) = (0, 0.0f64);
    for w in &perms {
        let below = subword_products(2, &normal_form(w).expand());
        for u in &perms {
            for q in [0.0, 0.3] {
                match factorization_check(u, w, &t, q, 6) {
                    Ok(r) => {
                        ensure(below.contains(u), || format!("{u} accepted below {w}"))?;
                        ensure(r.pass && r.max_residual <= 1e-12, || format!("u={u} w={w} q={q}: {}", r.max_residual))?;
                        ensure(r.generators.len() == 9, || format!("u={u} w={w}: {} generators", r.generators.len()))?;
                        worst = worst.max(r.max_residual);
                        pairs += 1;
                    }
                    Err(CrystalError::NotBelow { .. }) => {
                        ensure(!below.contains(u), || format!("{u} rejected below {w}"))?
                    }
                    Err(e) => return Err(e.to_string()),
                }
            }
        }
    }
    ensure(pairs == 2 * 19, || format!("{pairs} checks"))?;
    Ok(format!("19 comparable pairs x 2 q values, max residual {worst:.1e}"))
}

fn combinatorics() -> Outcome {
    let s4 = Permutation::all(3);
    for w in &s4 {
        let below: BTreeSet<Permutation> = subword_products(3, &normal_form(w).expand()).into_iter().collect();
        for u in &s4 {
            let got = bruhat_leq(u, w).map_err(err)?;
            ensure(got == below.contains(u), || format!("bruhat_leq({u}, {w}) = {got}"))?;
        }
    }
    let mut round_trips = 0;
    for n in [3, 4] {
        for w in Permutation::all(n) {
            let nf = normal_form(&w);
            let letters = nf.expand();
            ensure(nf.is_well_formed(n), || format!("{w}: malformed normal form"))?;
            ensure(letters.len() == w.length(), || format!("{w}: word of length {}", letters.len()))?;
            let back = Permutation::from_word(n, &letters).map_err(err)?;
            ensure(back == w, || format!("{w} -> {letters:?} -> {back}"))?;
            round_trips += 1;
        }
    }
    let s = |r| Permutation::simple(2, r).unwrap();
    let want: BTreeSet<Permutation> = [compose(&s(2), &s(1)).unwrap(), compose(&s(1), &s(2)).unwrap()].into();
    let got: BTreeSet<Permutation> = maximal_subwords_of_longest(2).map_err(err)?.into_iter().collect();
    ensure(got == want, || format!("maximal subwords {got:?}"))?;
    let top = longest_permutation(2);
    for u in &got {
        ensure(bruhat_leq(u, &top).map_err(err)? && u.length() + 1 == top.length(), || format!("{u} not covered"))?;
    }
    Ok(format!("576 Bruhat pairs, {round_trips} round trips"))
}

fn unitarity() -> Outcome {
    let t = TorusPoint::new(vec![Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0)]).map_err(err)?;
    let (q, d, tol) = (0.4, 8, 1e-10);
    let mut worst: f64 = 0.0;
    for letters in [vec![], vec![1], vec![2], vec![1, 2], vec![2, 1], vec![1, 2, 1]] {
        let legs = letters.len();
        let spec = RepSpec::new(t.clone(), word(2, &letters), q).map_err(err)?;
        let e = d - legs;
        for i in 1..=3 {
            for j in 1..=3 {
                let (cols, rows) = unitarity_residuals(&spec, i, j).map_err(err)?;
                let cols = interior(&cols.section(d).map_err(err)?.to_dense(), d, legs, e);
                let rows = interior(&rows.section(d).map_err(err)?.to_dense(), d, legs, e);
                let r = max_abs(&cols).max(max_abs(&rows));
                ensure(r <= tol, || format!("{letters:?} ({i},{j}): residual {r}"))?;
                worst = worst.max(r);
            }
        }
        // the column relation once more from dense images
        let mut dense = M::zeros(d.pow(legs as u32), d.pow(legs as u32));
        for k in 1..=3 {
            let a = image(2, &letters, t.coords(), q, k, 1, d);
            dense += a.adjoint() * &a;
        }
        dense -= M::identity(dense.nrows(), dense.ncols());
        let r = max_abs(&interior(&dense, d, legs, e));
        ensure(r <= tol, || format!("{letters:?}: dense residual {r}"))?;
    }
    Ok(format!("max interior residual {worst:.1e}"))
}

fn coassociativity() -> Outcome {
    let suite = coassociativity_suite(4, 5).map_err(err)?;
    ensure(suite.pass, || format!("failures: {:?}", suite.failures))?;
    // brute-force enumeration of monotone paths as the reference multiset
    for n in 1..=4 {
        for i in 1..=n + 1 {
            for j in 1..=n + 1 {
                for l in 1..=4 {
                    let mut want: Vec<Vec<usize>> =
                        all_paths(i, j, l, n).into_iter().filter(|p| is_monotone(p)).collect();
                    want.sort();
                    for order in [SplitOrder::LeftToRight, SplitOrder::RightToLeft] {
                        let mut got: Vec<Vec<usize>> = coproduct_paths_ordered(i, j, l, CoproductMode::Crystal, n, order)
                            .map_err(err)?
                            .into_iter()
                            .map(|p| p.0)
                            .collect();
                        got.sort();
                        ensure(got == want, || format!("n={n} z{i}{j} l={l} {order:?}"))?;
                    }
                }
            }
        }
    }
    Ok(format!("{} generator/leg cases", suite.cases))
}

fn torus_recovery() -> Outcome {
    let w = longest(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let t = TorusPoint::random(2, &mut rng);
        let spec = RepSpec::new(t.clone(), w.clone(), 0.2).map_err(err)?;
        let got = recover_torus_label(&diagonal_images(&spec, 8).map_err(err)?, &w, 0.2, 8).map_err(err)?;
        let dist = got.distance(&t);
        ensure(dist <= 1e-10, || format!("t={t:?} recovered as {got:?}"))?;
        worst = worst.max(dist);
    }
    Ok(format!("100 points, max error {worst:.1e}"))
}

fn limit_sampling() -> Outcome {
    let grid = torus_grid(2, 4).map_err(err)?;
    let q_list = [0.3, 0.1, 0.03, 0.01];
    let r = limit_algebra_sample(&grid, &[word(2, &[1]), longest(2)], &q_list, 8).map_err(err)?;
    ensure(r.grid_points == 16, || format!("{} grid points", r.grid_points))?;
    for s in &r.sequences {
        ensure(s.is_decreasing(), || format!("{:?} z{}{}: {:?}", s.word, s.i, s.j, s.entry_gap))?;
    }
    ensure(r.all_decreasing, || "report flags a non-decreasing sequence".into())?;
    let anchor = r
        .sequences
        .iter()
        .find(|s| s.word == [1] && (s.i, s.j) == (2, 1))
        .ok_or("missing (2,1) sequence for word [1]")?;
    ensure(anchor.entry_gap == q_list, || format!("(2,1) gaps {:?}", anchor.entry_gap))?;
    let off = anchor.norm_lower.iter().zip(&q_list).map(|(a, q)| (a - q).abs()).fold(0.0, f64::max);
    ensure(off <= 1e-12, || format!("(2,1) norm gaps {:?}", anchor.norm_lower))?;
    Ok(format!("{} sequences decreasing", r.sequences.len()))
}

fn determinism() -> Outcome {
    let config = RunConfig { q: vec![0.3], torus_grid: 2, ..RunConfig::new(2) };
    let (code_a, a) = cmd_verify(&config, BraidOptions::default()).map_err(err)?;
    let (code_b, b) = cmd_verify(&config, BraidOptions::default()).map_err(err)?;
    ensure(code_a == 0 && code_b == 0, || format!("exit codes {code_a}, {code_b}"))?;
    ensure(a.as_bytes() == b.as_bytes(), || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 12] = [
        ("anchor exactness", Duration::from_secs(1), anchors),
        ("crystal-limit convergence", Duration::from_secs(10), convergence),
        ("t-uniformity", Duration::from_secs(10), t_uniformity),
        ("braid equivalence", Duration::from_secs(5), braid),
        ("kernel element", Duration::from_secs(5), kernel),
        ("Bruhat factorization", Duration::from_secs(30), factorization),
        ("combinatorial oracles", Duration::from_secs(10), combinatorics),
        ("unitarity residuals", Duration::from_secs(10), unitarity),
        ("coassociativity", Duration::from_secs(1), coassociativity),
        ("torus recovery", Duration::from_secs(10), torus_recovery),
        ("limit sampling", Duration::from_secs(20), limit_sampling),
        ("determinism", Duration::from_secs(60), determinism),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Ok(detail) if elapsed <= *budget => Ok(detail),
            Ok(detail) => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            Err(e) => Err(e),
        };
        match verdict {
            Ok(detail) => println!("[PASS] criterion {}: {name} ({detail}; {elapsed:.2?})", k + 1),
            Err(e) => {
                println!("[FAIL] criterion {}: {name}: {e}", k + 1);
                failed.push(k + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
