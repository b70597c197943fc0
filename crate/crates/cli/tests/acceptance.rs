//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use bell_lab::hbt::{default_hbt_settings, hbt_locality_audit, HbtConfig};
use bell_lab::locality::{audit_model, check_condition_c, CheckGrid};
use bell_lab::metrics::{
    chsh_for_model, correlator_table, empirical_correlation, maximize_chsh_for_model, simulate_events, Search,
};
use bell_lab::model::{singlet_joint_model, singlet_reference_behavior, unnikrishnan_joint_probability};
use bell_lab::model::{unnikrishnan_model, UnnikrishnanParams};
use bell_lab::polytope::{
    enumerate_deterministic_vertices, local_bound_chsh, lp_weights, membership, random_no_signaling_behavior,
    reconstruct, vertex_chsh, MembershipStatus,
};
use bell_lab::random::random_local_model;
use bell_lab::{Behavior, ConditionalModel, Integration, JointTable, Outcome, Setting};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn settings(v: &[f64]) -> Vec<Setting> {
    v.iter().copied().map(Setting::new).collect()
}

/// Eight CHSH forms computed straight from the cells.
fn chsh_forms_oracle(b: &Behavior) -> [f64; 8] {
    let e = |i: usize, j: usize| {
        let p = b.cell(i, j).0;
        p[0] - p[1] - p[2] + p[3]
    };
    let terms = [e(0, 0), e(0, 1), e(1, 0), e(1, 1)];
    let sum: f64 = terms.iter().sum();
    let mut out = [0.0; 8];
    for m in 0..4 {
        out[2 * m] = sum - 2.0 * terms[m];
        out[2 * m + 1] = -(sum - 2.0 * terms[m]);
    }
    out
}

fn max_form(b: &Behavior) -> f64 {
    chsh_forms_oracle(b).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_1() -> Verdict {
    // warm the allocator, then time a fresh enumeration
    let _ = enumerate_deterministic_vertices();
    let t = Instant::now();
    let vertices = enumerate_deterministic_vertices();
    let bound = local_bound_chsh();
    let elapsed = t.elapsed();

    let mut assignments: Vec<_> = vertices.iter().map(|v| v.assignment).collect();
    assignments.sort_by_key(|a| a.map(|o| o.value()));
    assignments.dedup();
    let int_max = vertices.iter().map(|v| vertex_chsh(&v.assignment).abs()).max().unwrap_or(0);
    let all_deterministic = vertices
        .iter()
        .all(|v| v.behavior.cells().iter().flatten().all(|c| c.0.iter().filter(|&&p| p == 1.0).count() == 1));
    check(
        vertices.len() == 16
            && assignments.len() == 16
            && all_deterministic
            && int_max == 2
            && bound == 2.0
            && elapsed < Duration::from_millis(1),
        format!("{} vertices, integer max |S| = {int_max}, bound = {bound}, {elapsed:?}", vertices.len()),
    )
}

fn criterion_2() -> Verdict {
    let target = 2.0 * SQRT_2;
    let sa = settings(&[0.0, FRAC_PI_2]);
    let sb = settings(&[FRAC_PI_4, 3.0 * FRAC_PI_4]);
    let quad = bell_lab::polytope::chsh_inequalities(
        &bell_lab::model::behavior_from_model(&singlet_joint_model(), &sa, &sb, &Integration::quadrature())
            .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let quad_max = quad.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let analytic = singlet_reference_behavior(&sa, &sb).map_err(|e| e.to_string())?;
    let analytic_max = max_form(&analytic);
    let verdict = membership(&analytic, 1e-9).map_err(|e| e.to_string())?;
    let violated = verdict.violated_inequality.map(|v| v.value).unwrap_or(f64::NAN);

    // the canonical combination reaches the bound once b' is mirrored
    let canonical = chsh_for_model(
        &singlet_joint_model(),
        [Setting::new(0.0), Setting::new(FRAC_PI_2), Setting::new(FRAC_PI_4), Setting::new(7.0 * FRAC_PI_4)],
        &Integration::quadrature(),
    )
    .map_err(|e| e.to_string())?;

    check(
        (quad_max - target).abs() < 1e-9
            && (analytic_max - target).abs() < 1e-9
            && verdict.status == MembershipStatus::Nonlocal
            && (violated - target).abs() < 1e-9
            && (canonical.abs_s - target).abs() < 1e-9,
        format!(
            "|S| quadrature {quad_max:.12}, analytic {analytic_max:.12}, membership {:?} at {violated:.12}; \
             S(0,π/2,π/4,7π/4) = {:.12}",
            verdict.status, canonical.s_value
        ),
    )
}

fn criterion_3() -> Verdict {
    let params = UnnikrishnanParams::new(0.5, PI).map_err(|e| e.to_string())?;
    let model = unnikrishnan_model(params).map_err(|e| e.to_string())?;
    let angles: Vec<f64> = (0..12).map(|k| k as f64 * PI / 6.0).collect();
    let grid = settings(&angles);

    let mut analytic_err: f64 = 0.0;
    for &q1 in &angles {
        for &q2 in &angles {
            let mut e = 0.0;
            for a in Outcome::ALL {
                for b in Outcome::ALL {
                    let p = unnikrishnan_joint_probability(Setting::new(q1), Setting::new(q2), 0.3, 0.3 - PI, 0.5, a, b)
                        .map_err(|e| e.to_string())?;
                    e += f64::from(a.value() * b.value()) * p;
                }
            }
            analytic_err = analytic_err.max((e + (q1 - q2).cos()).abs());
        }
    }
    let table = correlator_table(&model, &grid, &grid, &Integration::quadrature()).map_err(|e| e.to_string())?;
    let mut quad_err: f64 = 0.0;
    for (i, &q1) in angles.iter().enumerate() {
        for (j, &q2) in angles.iter().enumerate() {
            quad_err = quad_err.max((table[i][j].value + (q1 - q2).cos()).abs());
        }
    }

    let sa = settings(&[0.0, FRAC_PI_2]);
    let sb = settings(&[FRAC_PI_4, 3.0 * FRAC_PI_4, PI]);
    let n = 1_000_000;
    let events = simulate_events(&model, &sa, &sb, n, 20240).map_err(|e| e.to_string())?;
    let emp = empirical_correlation(events, sa.len(), sb.len()).map_err(|e| e.to_string())?;
    let mut worst_z: f64 = 0.0;
    for (i, a) in sa.iter().enumerate() {
        for (j, b) in sb.iter().enumerate() {
            let est = emp[i][j];
            let se = est.stderr.unwrap_or(0.0);
            let dev = (est.value + (a.angle() - b.angle()).cos()).abs();
            worst_z = worst_z.max(if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY });
        }
    }

    let best = maximize_chsh_for_model(&model, &Search::default(), &Integration::quadrature()).map_err(|e| e.to_string())?;
    check(
        analytic_err < 1e-9 && quad_err < 1e-9 && worst_z <= 5.0 && (best.abs_s - 2.0 * SQRT_2).abs() < 1e-4,
        format!(
            "analytic err {analytic_err:.2e}, quadrature err {quad_err:.2e}, MC worst |z| {worst_z:.2} at n=1e6, \
             max |S| {:.9}",
            best.abs_s
        ),
    )
}

fn criterion_4() -> Verdict {
    let params = UnnikrishnanParams::new(0.5, PI).map_err(|e| e.to_string())?;
    let model = unnikrishnan_model(params).map_err(|e| e.to_string())?;
    let grid = CheckGrid::default_for(model.source());
    // the default grid holds q1 = 0, q2 = π, where s·Δq + s·Δφ = 0
    let has_zero_point = grid.settings_a.iter().any(|a| {
        grid.settings_b
            .iter()
            .any(|b| (0.5 * (a.angle() - b.angle()) + 0.5 * PI).rem_euclid(2.0 * PI).abs() < 1e-12)
    });
    let [cc, pi, oi] = audit_model(&model, &grid, 1e-9).map_err(|e| e.to_string())?;
    check(
        has_zero_point
            && pi.max_residual < 1e-12
            && (cc.max_residual - 0.25).abs() <= 1e-9
            && (oi.max_residual - 1.0).abs() <= 1e-9,
        format!(
            "PI {:.2e}, CC {:.12}, OI {:.12} on {}",
            pi.max_residual, cc.max_residual, oi.max_residual, grid.spec
        ),
    )
}

fn criterion_5() -> Verdict {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let angles = Setting::evenly_spaced(16);
    let integ = Integration::quadrature();
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..100 {
        let model = random_local_model(&mut rng);
        let table = correlator_table(&model, &angles, &angles, &integ).map_err(|e| e.to_string())?;
        let e = |i: usize, j: usize| table[i][j].value;
        let mut model_max: f64 = 0.0;
        for a in 0..16 {
            for a2 in 0..16 {
                for b in 0..16 {
                    for b2 in 0..16 {
                        let s = e(a, b) + e(a, b2) + e(a2, b) - e(a2, b2);
                        model_max = model_max.max(s.abs());
                    }
                }
            }
        }
        // quadrature is exact up to rounding, so the stderr allowance is float noise
        if model_max > 2.0 + 1e-9 {
            violations += 1;
        }
        worst = worst.max(model_max);
    }
    let elapsed = t.elapsed();
    check(
        violations == 0 && elapsed < Duration::from_secs(60),
        format!("100 models, 16^4 grid, max |S| = {worst:.12}, {violations} violations, {elapsed:.2?}"),
    )
}

fn pr_box() -> Behavior {
    let (sa, sb) = bell_lab::polytope::canonical_settings();
    Behavior::from_fn(sa.to_vec(), sb.to_vec(), |i, j| {
        if i == 1 && j == 1 {
            JointTable([0.0, 0.5, 0.5, 0.0])
        } else {
            JointTable([0.5, 0.0, 0.0, 0.5])
        }
    })
    .expect("valid PR box")
}

/// `λ·PR + (1-λ)·(random mixture of vertices)`.
fn boundary_behavior(rng: &mut ChaCha8Rng, pr: &Behavior) -> Behavior {
    let raw: Vec<f64> = (0..16).map(|_| -rng.random::<f64>().ln()).collect();
    let total: f64 = raw.iter().sum();
    let local = reconstruct(&raw.iter().map(|w| w / total).collect::<Vec<_>>()).expect("16 weights");
    let lambda = rng.random::<f64>() * 0.5;
    Behavior::from_fn(local.settings_a().to_vec(), local.settings_b().to_vec(), |i, j| {
        let (p, q) = (pr.cell(i, j).0, local.cell(i, j).0);
        JointTable(std::array::from_fn(|k| lambda * p[k] + (1.0 - lambda) * q[k]))
    })
    .expect("convex mixture")
}

fn criterion_6() -> Verdict {
    let tol = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pr = pr_box();
    let (mut disagreements, mut nonlocal, mut errors) = (0, 0, 0);
    for k in 0..1000 {
        let b = if k % 2 == 0 { random_no_signaling_behavior(&mut rng) } else { boundary_behavior(&mut rng, &pr) };
        let lp_local = lp_weights(&b, tol).map_err(|e| e.to_string())?.is_some();
        let chsh_local = max_form(&b) <= 2.0 + tol;
        if lp_local != chsh_local {
            disagreements += 1;
        }
        if !chsh_local {
            nonlocal += 1;
        }
        if membership(&b, tol).is_err() {
            errors += 1;
        }
    }
    check(
        disagreements == 0 && errors == 0,
        format!("1000 behaviors ({nonlocal} nonlocal), {disagreements} disagreements, {errors} membership errors"),
    )
}

fn criterion_7() -> Verdict {
    let (sa, sb) = default_hbt_settings();
    let mut lines = Vec::new();
    let mut ok = true;
    for (k, d) in [0.0, FRAC_PI_4, FRAC_PI_2, PI].into_iter().enumerate() {
        let config = HbtConfig::new(0.3, 0.3 - d, 100_000, 700 + k as u64);
        let audit = hbt_locality_audit(&config, &sa, &sb, 1e-9).map_err(|e| e.to_string())?;
        let r = &audit.report;
        let z = (r.ensemble_covariance - 0.5 * d.cos()).abs() / r.ensemble_stderr;
        let local = audit.membership.as_ref().is_some_and(|m| m.status == MembershipStatus::Local);
        ok &= z <= 5.0 && r.fixed_h_covariance == 0.0 && local && audit.condition_c.passed();
        lines.push(format!("Δα={d:.4}: z={z:.2}, fixed-θ cov={}, local={local}", r.fixed_h_covariance));
    }
    // binary behaviors at further setting pairs stay local as well
    let model = bell_lab::hbt::hbt_model(1.0).map_err(|e| e.to_string())?;
    let angles = Setting::evenly_spaced(8);
    let cc = check_condition_c(&model, &CheckGrid::with_counts(model.source(), 8, 32).map_err(|e| e.to_string())?, 1e-9)
        .map_err(|e| e.to_string())?;
    let beh = bell_lab::model::behavior_from_model(&model, &angles, &angles, &Integration::quadrature())
        .map_err(|e| e.to_string())?;
    let mut extra_local = true;
    for a in 0..8 {
        for a2 in 0..8 {
            for b in 0..8 {
                for b2 in 0..8 {
                    if a == a2 || b == b2 {
                        continue;
                    }
                    let sub = Behavior::from_fn(
                        vec![angles[a], angles[a2]],
                        vec![angles[b], angles[b2]],
                        |i, j| *beh.cell([a, a2][i], [b, b2][j]),
                    )
                    .map_err(|e| e.to_string())?;
                    extra_local &= membership(&sub, 1e-9).map_err(|e| e.to_string())?.status == MembershipStatus::Local;
                }
            }
        }
    }
    ok &= extra_local && cc.passed();
    lines.push(format!("8x8 quadrature sub-behaviors local={extra_local}"));
    check(ok, lines.join("; "))
}

fn criterion_8() -> Verdict {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let configs = [
        r#"{"experiment": "correlate", "model": {"type": "stochastic-cos", "visibility": 0.8},
            "settings": {"a": [0, 0.7, 2.1], "b": [0.3, 1.9]},
            "integration": {"method": "monte-carlo", "n": 200000, "seed": 17}}"#,
        r#"{"experiment": "hbt", "hbt": {"alpha1": 0, "alpha2": 1.2, "n_events": 100000, "seed": 5}}"#,
        r#"{"experiment": "chsh", "model": {"type": "unnikrishnan", "s": 0.5, "delta_phi": 3.141592653589793},
            "settings": {"a": [0, 1.5707963267948966], "b": [0.7853981633974483, 5.497787143782138]},
            "integration": {"method": "monte-carlo", "n": 100000, "seed": 2}}"#,
    ];
    let mut runs = 0;
    for (k, text) in configs.iter().enumerate() {
        let cfg = dir.path().join(format!("c{k}.json"));
        std::fs::write(&cfg, text).map_err(|e| e.to_string())?;
        for format in ["json", "csv"] {
            let mut reference: Option<Vec<u8>> = None;
            for workers in ["1", "2", "4", "1", "3"] {
                let out = Command::new(env!("CARGO_BIN_EXE_bell-lab"))
                    .args(["run", cfg.to_str().unwrap(), "--format", format, "--workers", workers])
                    .env_remove("BELL_LAB_SEED")
                    .output()
                    .map_err(|e| e.to_string())?;
                if !out.status.success() {
                    return Err(format!("config {k} failed: {}", String::from_utf8_lossy(&out.stderr)));
                }
                runs += 1;
                match &reference {
                    None => reference = Some(out.stdout),
                    Some(r) if *r != out.stdout => {
                        return Err(format!("config {k} ({format}) differs with --workers {workers}"))
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(format!("{runs} runs over {} configs and workers 1/2/3/4, byte-identical", configs.len()))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("vertex enumeration and local bound", criterion_1),
        ("singlet CHSH and membership", criterion_2),
        ("Unnikrishnan correlators and maximum", criterion_3),
        ("Unnikrishnan locality audit", criterion_4),
        ("Bell bound for random local models", criterion_5),
        ("LP and CHSH membership agree", criterion_6),
        ("HBT covariance and locality", criterion_7),
        ("CLI determinism", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let (tag, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] criterion {}: {name} ({:.2?}): {detail}", k + 1, t.elapsed());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
