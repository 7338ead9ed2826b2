//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use isocov::parallel::simulate_field_parallel;
use isocov_core::coefficients::{compute_h, identity_checks, reconstruct_kernel, CoefficientSequence};
use isocov_core::euclid::{divided_difference_coefficient, euclid_spectral_check, euclid_to_sphere_validate, xi_bracket_verify};
use isocov_core::kernels::{make_kernel, KernelSpec, MatrixKernel};
use isocov_core::simulate::{addition_formula_check, empirical_cov_check, simulate_field, RandomStream};
use isocov_core::spaces::{sample_uniform, Family, Space};
use isocov_core::special::{
    contiguous_coeffs, gauss_jacobi_rule, jacobi_at_one, jacobi_eval, jacobi_norm_sq, jacobi_sequence, Ladder,
};
use isocov_core::validity::{
    minf_series_coeffs, projective_constructions, test_spaces, validate_minf, validate_on_space, Verdict,
};
use isocov_core::Matrix;

const TOL: f64 = 1e-9;

/// `Ok(detail)` on pass, `Err(detail)` on failure.
type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn kernel(json: &str) -> MatrixKernel {
    make_kernel(&serde_json::from_str::<KernelSpec>(json).unwrap()).unwrap()
}

fn space(s: &str) -> Space {
    s.parse().unwrap()
}

/// Distinct Jacobi parameters of all spaces with `d ≤ max_d`.
fn space_params_up_to(max_d: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for d in 1..=max_d {
        for fam in [Family::Sphere, Family::RealProjective, Family::ComplexProjective, Family::QuaternionProjective, Family::Cayley] {
            if let Ok(s) = Space::new(fam, d) {
                if !out.contains(&s.params()) {
                    out.push(s.params());
                }
            }
        }
    }
    out
}

fn sample_x() -> Vec<f64> {
    (0..20).map(|i| -0.97 + 1.94 * i as f64 / 19.0).collect()
}

fn exp_pair_matrix(b2_shift: f64) -> MatrixKernel {
    let e = PI.exp();
    kernel(&format!(
        r#"{{"family":"exp_pair","b1":[[2,1],[1,2]],"b2":[[{},{}],[{},{}]]}}"#,
        2.0 * e + b2_shift,
        e,
        e,
        2.0 * e
    ))
}

fn powered_sine(nu: f64) -> MatrixKernel {
    kernel(&format!(r#"{{"family":"powered_sine","nu":[{nu}]}}"#))
}

/// Taylor coefficients of `cosh(arcsin x)` from `(1−x²)f'' − xf' − f = 0`.
fn cosh_arcsin(n: usize) -> Vec<f64> {
    let mut a = vec![0.0; n + 1];
    a[0] = 1.0;
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let kf = k as f64;
        a[k + 2] = (kf * kf + 1.0) * a[k] / ((kf + 2.0) * (kf + 1.0));
    }
    a
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn c1_orthogonality() -> Outcome {
    let start = Instant::now();
    let (mut off, mut diag) = (0.0_f64, 0.0_f64);
    let params = space_params_up_to(16);
    for &(a, b) in &params {
        let rule = gauss_jacobi_rule(40, a, b).map_err(|e| e.to_string())?;
        let mut gram = vec![[0.0; 31]; 31];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let p = jacobi_sequence(30, a, b, x);
            for i in 0..=30 {
                for j in 0..=30 {
                    gram[i][j] += w * p[i] * p[j];
                }
            }
        }
        for (i, row) in gram.iter().enumerate() {
            let h = jacobi_norm_sq(i, a, b);
            diag = diag.max(((row[i] - h) / h).abs());
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    off = off.max(v.abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(off <= 1e-10, format!("off-diagonal {off:e}"))?;
    ensure(diag <= 1e-10, format!("diagonal rel {diag:e}"))?;
    ensure(secs < 5.0, format!("runtime {secs:.2} s"))?;
    Ok(format!("{} parameter pairs, off-diag {off:.1e}, diag rel {diag:.1e}, {secs:.2} s", params.len()))
}

fn ladder_residual(kind: Ladder, a: f64, b: f64, n: usize, x: f64) -> f64 {
    let (base, top, power) = match kind {
        Ladder::Integer => (0.0, a as usize, a),
        Ladder::Half => (-0.5, (a + 0.5) as usize, a + 0.5),
    };
    let lhs = ((1.0 - x) / 2.0).powf(power) * jacobi_eval(n, a, b, x).unwrap();
    let p = jacobi_sequence(n + top, base, b, x);
    let rhs: f64 = (0..=top)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sign * contiguous_coeffs(kind, a, b, n, j).unwrap() * p[n + j]
        })
        .sum();
    (lhs - rhs).abs() / lhs.abs().max(1.0)
}

fn c2_identities() -> Outcome {
    let mut pointwise = 0.0_f64;
    for &(a, b) in &space_params_up_to(16) {
        let ladder = if a >= 1.0 && a.fract() == 0.0 {
            Some(Ladder::Integer)
        } else if a >= 0.5 && (a - 0.5).fract() == 0.0 {
            Some(Ladder::Half)
        } else {
            None
        };
        for &x in &sample_x() {
            for n in 0..=20 {
                let nf = n as f64;
                let s = (2.0 * nf + a + b + 1.0) / 2.0;
                let p = jacobi_eval(n, a, b, x).unwrap();
                if a > 0.0 {
                    let lhs = s * (1.0 - x) * p;
                    let low = jacobi_sequence(n + 1, a - 1.0, b, x);
                    let rhs = (nf + a) * low[n] - (nf + 1.0) * low[n + 1];
                    pointwise = pointwise.max((lhs - rhs).abs() / lhs.abs().max(1.0));
                }
                if b > 0.0 {
                    let lhs = s * (1.0 + x) * p;
                    let low = jacobi_sequence(n + 1, a, b - 1.0, x);
                    let rhs = (nf + b) * low[n] + (nf + 1.0) * low[n + 1];
                    pointwise = pointwise.max((lhs - rhs).abs() / lhs.abs().max(1.0));
                }
                if let Some(kind) = ladder {
                    pointwise = pointwise.max(ladder_residual(kind, a, b, n, x));
                }
            }
        }
    }
    ensure(pointwise <= 1e-10, format!("pointwise residual {pointwise:e}"))?;

    let kernels = [("exp_pair", exp_pair_matrix(0.0)), ("powered_sine nu=0.5", powered_sine(0.5)), ("powered_sine nu=1", powered_sine(1.0)), ("powered_sine nu=2", powered_sine(2.0))];
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (name, k) in &kernels {
        for &(a, b) in &space_params_up_to(16) {
            let Ok(rs) = identity_checks(k, a, b) else { continue };
            for r in rs {
                count += 1;
                let rel = r.residual / r.scale.max(f64::MIN_POSITIVE);
                worst = worst.max(rel);
                ensure(r.passes(1e-9), format!("{name} {:?} at ({a},{b}): residual {:e} scale {:e}", r.identity, r.residual, r.scale))?;
            }
        }
    }
    Ok(format!("pointwise {pointwise:.1e}; {count} coefficient identity checks, worst residual/scale {worst:.1e}"))
}

fn random_psd(st: &mut RandomStream, m: usize) -> Matrix {
    let a = Matrix::from_fn(m, |_, _| st.normal());
    a.transpose().mul(&a).scaled(1.0 / m as f64)
}

fn c3_round_trip() -> Outcome {
    let mut st = RandomStream::new(2024);
    let mut worst = 0.0_f64;
    let spaces = ["S:1", "S:2", "PR:3", "PC:4", "PH:8", "CAY:16"];
    for s in spaces {
        let sp = space(s);
        let (a, b) = sp.params();
        let bs: Vec<Matrix> = (0..=15).map(|_| random_psd(&mut st, 3)).collect();
        let seq = CoefficientSequence::from_b(a, b, bs.clone()).map_err(|e| e.to_string())?;
        let k = reconstruct_kernel(&seq).map_err(|e| e.to_string())?;
        let back = compute_h(&k, a, b, 15, None).map_err(|e| e.to_string())?;
        for (n, (orig, rec)) in bs.iter().zip(&back.b).enumerate() {
            let rel = rec.sub(orig).max_abs() / orig.max_abs();
            worst = worst.max(rel);
            ensure(rel <= 1e-8, format!("{s} n={n}: rel {rel:e}"))?;
        }
        let r = validate_on_space(&k, sp, 15, TOL).map_err(|e| e.to_string())?;
        ensure(r.is_valid(), format!("{s}: {}", r.label))?;
    }
    Ok(format!("{} spaces, worst rel error {worst:.1e}", spaces.len()))
}

fn c4_quadratic_boundary() -> Outcome {
    let quad = |b0: f64, b1: f64| kernel(&format!(r#"{{"family":"quadratic","b0":{b0},"b1":{b1},"b2":1}}"#));
    let good = quad(PI * PI + 0.5, -2.0 * PI);
    for s in ["S:2", "PR:3", "PC:4", "PH:8", "CAY:16"] {
        let r = validate_on_space(&good, space(s), 40, TOL).map_err(|e| e.to_string())?;
        ensure(r.is_valid(), format!("{s}: {}", r.label))?;
    }
    ensure(validate_minf(&good, 30, TOL).map_err(|e| e.to_string())?.is_valid(), "good kernel not valid on M^inf")?;
    let bad = validate_minf(&quad(PI * PI - 0.5, -2.0 * PI), 30, TOL).map_err(|e| e.to_string())?;
    ensure(bad.verdict == Verdict::Invalid, "b0 = pi^2 - 0.5 not flagged")?;
    let skew = minf_series_coeffs(&quad(PI * PI + 0.5, -6.0), 5).map_err(|e| e.to_string())?;
    let odd = skew.coefficients[1].get(0, 0);
    ensure(odd.abs() > 1e-3, format!("odd coefficient {odd:e} for b1 = -6"))?;
    Ok(format!("valid on 5 spaces and M^inf; pi^2-0.5 invalid; b1=-6 gives odd coefficient {odd:.4}"))
}

fn c5_exp_pair() -> Outcome {
    let k = exp_pair_matrix(0.0);
    let r = validate_minf(&k, 30, TOL).map_err(|e| e.to_string())?;
    ensure(r.is_valid(), format!("exp_pair: {}", r.label))?;
    let s = minf_series_coeffs(&k, 30).map_err(|e| e.to_string())?;
    let a = cosh_arcsin(30);
    let b1 = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
    let scale = 2.0 * (PI / 2.0).exp();
    let mut worst = 0.0_f64;
    let mut literal_first_miss = None;
    for (deg, c) in s.coefficients.iter().enumerate() {
        if deg % 2 == 1 {
            ensure(c.max_abs() <= 1e-9 * scale, format!("odd degree {deg}: {:e}", c.max_abs()))?;
            continue;
        }
        let expect = b1.scaled(scale * a[deg]);
        let rel = c.sub(&expect).max_abs() / expect.max_abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("degree {deg}: rel {rel:e}"))?;
        let literal = b1.scaled(scale / factorial(deg));
        if literal_first_miss.is_none() && c.sub(&literal).max_abs() > 1e-6 * literal.max_abs() {
            literal_first_miss = Some(deg);
        }
    }
    let perturbed = validate_minf(&exp_pair_matrix(0.1), 30, TOL).map_err(|e| e.to_string())?;
    ensure(perturbed.verdict == Verdict::Invalid, "perturbed B2 not flagged")?;
    let note = match literal_first_miss {
        Some(d) => format!("; the 1/(2n)! pattern agrees below degree {d} only, coefficients follow cosh(arcsin x)"),
        None => String::new(),
    };
    Ok(format!("valid, even coefficients rel {worst:.1e} vs 2e^(pi/2)*B1*[x^2n]cosh(arcsin x){note}; perturbed invalid"))
}

fn c6_separations() -> Outcome {
    let decay = kernel(r#"{"family":"exp_pair","b1":0,"b2":1}"#);
    ensure(validate_on_space(&decay, space("S:1"), 40, TOL).map_err(|e| e.to_string())?.is_valid(), "e^(-t/2) not valid on S^1")?;
    ensure(validate_minf(&decay, 30, TOL).map_err(|e| e.to_string())?.verdict == Verdict::Invalid, "e^(-t/2) valid on M^inf")?;
    let cosh = kernel(&format!(r#"{{"family":"exp_pair","b1":{},"b2":{}}}"#, (-PI / 2.0).exp() / 2.0, (PI / 2.0).exp() / 2.0));
    ensure(validate_minf(&cosh, 30, TOL).map_err(|e| e.to_string())?.is_valid(), "cosh((pi-t)/2) not valid on M^inf")?;
    let spaces = test_spaces();
    for nu in [0.5, 1.0, 2.0] {
        let k = powered_sine(nu);
        ensure(validate_minf(&k, 30, TOL).map_err(|e| e.to_string())?.is_valid(), format!("nu={nu} not valid on M^inf"))?;
        for &s in &spaces {
            let r = validate_on_space(&k, s, 40, TOL).map_err(|e| e.to_string())?;
            ensure(r.is_valid(), format!("nu={nu} on {s}: {}", r.label))?;
        }
    }
    Ok(format!("separations hold; powered_sine valid on M^inf and {} test spaces", spaces.len()))
}

fn c7_projective() -> Outcome {
    let (plus, minus) = projective_constructions(&MatrixKernel::cosine_series(&[0.0, 1.0]).unwrap());
    let r = validate_on_space(&minus, space("PR:3"), 40, TOL).map_err(|e| e.to_string())?;
    ensure(r.is_valid(), format!("K- on PR:3: {}", r.label))?;
    // 1 + x = P_0/2 + P_1 for (α, β) = (1/2, −1/2)
    let expect = [0.5, 1.0];
    for (n, e) in expect.iter().enumerate() {
        let v = r.trace[n].min_eigenvalue;
        ensure((v - e).abs() <= 1e-8 * e, format!("PR:3 B_{n} = {v}"))?;
    }
    let tail = r.trace[2..].iter().map(|t| t.max_abs_entry).fold(0.0, f64::max);
    ensure(tail <= 1e-8, format!("PR:3 tail {tail:e}"))?;
    let s2 = validate_on_space(&minus, space("S:2"), 40, TOL).map_err(|e| e.to_string())?;
    for n in 0..2 {
        let v = s2.trace[n].min_eigenvalue;
        ensure((v - 1.0).abs() <= 1e-8, format!("S:2 B_{n} = {v}"))?;
    }
    let rp = validate_on_space(&plus, space("PR:3"), 40, TOL).map_err(|e| e.to_string())?;
    ensure(rp.is_valid(), format!("K+ = 0: {}", rp.label))?;
    Ok("K- = 1+cos valid on PR:3 with B = (1/2, 1, 0, ...), B0 = B1 = 1 on S:2; K+ = 0 passes".into())
}

fn c8_euclid() -> Outcome {
    let sph = kernel(r#"{"family":"spherical","support":3.141592653589793}"#);
    let t = euclid_to_sphere_validate(&sph, 3, 40, TOL).map_err(|e| e.to_string())?;
    ensure(t.spectral.pass && t.spectral.min_value >= -1e-9, format!("spectral min {:e}", t.spectral.min_value))?;
    ensure(t.sphere.as_ref().is_some_and(|r| r.is_valid()), "not valid on S^3")?;
    ensure(t.projective.as_ref().is_some_and(|r| r.is_valid()), "not valid on P^3(R)")?;
    let flat = kernel(r#"{"family":"boxcar","support":3.141592653589793}"#);
    let f = euclid_spectral_check(&flat, 1, 40.0, 2048, TOL).map_err(|e| e.to_string())?;
    ensure(!f.pass && f.sign_change, "g = 1 passes the spectral check")?;
    Ok(format!("spherical min transform {:.1e}; g = 1 min {:.3} with sign change", t.spectral.min_value, f.min_value))
}

fn triangle(x: f64) -> f64 {
    1.0 - x / PI
}

fn c9_brackets() -> Outcome {
    let mut worst = 0.0_f64;
    for n in 0..=20 {
        let r = xi_bracket_verify(&triangle, -0.5, -0.5, n).map_err(|e| e.to_string())?;
        let xi = r.xi.ok_or(format!("no root at n={n}"))?;
        ensure((xi - n as f64).abs() <= 1e-8 && r.residual <= 1e-8, format!("n={n}: xi {xi}, residual {:e}", r.residual))?;
    }
    for &(a, b) in &[(0.5, -0.5), (0.5, 0.5), (1.5, -0.5)] {
        for n in 0..=20 {
            let r = xi_bracket_verify(&triangle, a, b, n).map_err(|e| e.to_string())?;
            let xi = r.xi.ok_or(format!("({a},{b}) n={n}: no root"))?;
            ensure(xi >= r.interval[0] && xi <= r.interval[1], format!("({a},{b}) n={n}: xi {xi} outside"))?;
        }
    }
    for n in 0..=10 {
        let dd = divided_difference_coefficient(&triangle, 0.5, n).map_err(|e| e.to_string())?;
        let r = xi_bracket_verify(&triangle, 0.5, -0.5, n).map_err(|e| e.to_string())?;
        let rel = (r.scale_factor * dd - r.lhs).abs() / r.lhs.abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("divided difference n={n}: rel {rel:e}"))?;
    }
    Ok(format!("xi_n = n for n <= 20; roots bracketed for 3 parameter pairs; divided difference rel {worst:.1e}"))
}

fn c10_simulation() -> Outcome {
    let start = Instant::now();
    for n in 1..=3 {
        for rho in [PI / 4.0, PI / 2.0] {
            let c = addition_formula_check(n, rho).map_err(|e| e.to_string())?;
            ensure(c.rel_error <= 1e-6, format!("addition n={n} rho={rho}: {:e}", c.rel_error))?;
        }
    }
    let s2 = space("S:2");
    let mut pst = RandomStream::new(10);
    let pts: Vec<_> = (0..20).map(|_| sample_uniform(s2, &mut pst).unwrap()).collect();
    let b = vec![Matrix::scalar(1.0), Matrix::scalar(1.0)];
    let stream = RandomStream::new(11);
    let reps = 20_000;
    let serial = simulate_field(s2, &b, 1, pts.clone(), reps, &stream).map_err(|e| e.to_string())?;
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    let reference = bits(&serial.values);
    for threads in [1, 4, 8] {
        let e = simulate_field_parallel(s2, &b, 1, pts.clone(), reps, &stream, threads).map_err(|e| e.to_string())?;
        ensure(bits(&e.values) == reference, format!("ensemble differs at {threads} threads"))?;
    }
    let k = MatrixKernel::cosine_series(&[1.0, 1.0]).unwrap();
    let r = empirical_cov_check(&serial, &k, 4.0).map_err(|e| e.to_string())?;
    ensure(r.flagged_fraction <= 0.01, format!("{} of {} entries beyond 4 SE", r.n_flagged, r.entries.len()))?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, format!("runtime {secs:.1} s"))?;
    Ok(format!(
        "addition formula ok; {} of {} entries beyond 4 SE (max z {:.2}); bit-identical at 1/4/8 threads; {secs:.1} s",
        r.n_flagged,
        r.entries.len(),
        r.max_z
    ))
}

fn c11_large_alpha() -> Outcome {
    let mut worst = 0.0_f64;
    for &b in &[-0.5, 0.0, 1.0] {
        for n in 0..=5 {
            for &t in &[PI / 4.0, PI / 2.0, 3.0 * PI / 4.0_f64] {
                let ratio = jacobi_eval(n, 200.0, b, t.cos()).unwrap() / jacobi_at_one(n, 200.0, b).unwrap();
                let lim = ((1.0 + t.cos()) / 2.0).powi(n as i32);
                worst = worst.max((ratio - lim).abs());
            }
        }
    }
    ensure(worst <= 0.05, format!("max deviation {worst}"))?;
    Ok(format!("max deviation {worst:.4}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("orthogonality", c1_orthogonality),
        ("contiguous identities", c2_identities),
        ("coefficient round trip", c3_round_trip),
        ("quadratic kernel boundary", c4_quadratic_boundary),
        ("exponential pair on M^inf", c5_exp_pair),
        ("M^inf separations", c6_separations),
        ("projective constructions", c7_projective),
        ("Euclidean transfer", c8_euclid),
        ("xi brackets", c9_brackets),
        ("simulation", c10_simulation),
        ("large-alpha limit", c11_large_alpha),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
