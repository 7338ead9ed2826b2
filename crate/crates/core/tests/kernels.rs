use std::f64::consts::PI;

use approx::assert_relative_eq;
use isocov_core::kernels::*;
use isocov_core::special::{jacobi_at_one, jacobi_eval};
use isocov_core::{Error, Matrix};
use proptest::prelude::*;

fn spec(json: &str) -> KernelSpec {
    serde_json::from_str(json).unwrap()
}

fn kernel(json: &str) -> MatrixKernel {
    make_kernel(&spec(json)).unwrap()
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| PI * i as f64 / n as f64)
}

const BUILTINS: &[&str] = &[
    r#"{"family":"constant","c":[[2,1],[1,3]]}"#,
    r#"{"family":"quadratic","b0":10.3,"b1":-6.283185307179586,"b2":1}"#,
    r#"{"family":"exp_pair","b1":[[2,1],[1,2]],"b2":[[46.28,23.14],[23.14,46.28]]}"#,
    r#"{"family":"exp_cos","b":[[1,0.5,0.2],[0.5,2,0.1],[0.2,0.1,1.5]]}"#,
    r#"{"family":"powered_sine","nu":[0.5,1,2]}"#,
    r#"{"family":"power","n":3,"b":[[1,0.3],[0.3,1]]}"#,
    r#"{"family":"jacobi_series","alpha":0.5,"beta":-0.5,"coefficients":[1,0.5,0.25]}"#,
    r#"{"family":"cosine_series","coefficients":[[[1,0],[0,1]],[[0.5,0.1],[0.1,0.5]]]}"#,
    r#"{"family":"triangle","support":2.0}"#,
    r#"{"family":"spherical","support":3.141592653589793}"#,
    r#"{"family":"boxcar","support":1.0,"b":[[1,0.5],[0.5,1]]}"#,
    r#"{"family":"tabulated","theta":[0,1.5,3.141592653589793],"values":[[1,0.5,2],[0.5,0.1,1],[0,0,0.5]]}"#,
    r#"{"family":"hadamard_power","kernel":{"family":"powered_sine","nu":[1,2]},"ell":2}"#,
    r#"{"family":"projective","kernel":{"family":"powered_sine","nu":[1]},"sign":"minus"}"#,
    r#"{"family":"rescaled","kernel":{"family":"triangle","support":1.0},"factor":0.5}"#,
];

#[test]
fn make_kernel_examples() {
    let ex1 = kernel(r#"{"family":"quadratic","b0":[[10,1],[1,10]],"b1":[[-6,-1],[-1,-6]],"b2":[[1,0.2],[0.2,1]]}"#);
    assert_eq!(ex1.eval(0.0).unwrap(), Matrix::from_rows(&[vec![10.0, 1.0], vec![1.0, 10.0]]).unwrap());
    let ex4 = kernel(r#"{"family":"powered_sine","nu":[2]}"#);
    assert_relative_eq!(ex4.eval(PI).unwrap().get(0, 0), 0.0, epsilon = 1e-15);
    for n in [0, 1, 5] {
        let p = kernel(&format!(r#"{{"family":"power","n":{n}}}"#));
        assert_eq!(p.eval(0.0).unwrap().get(0, 0), 1.0);
    }
}

#[test]
fn eval_examples() {
    let ex2 = kernel(&format!(r#"{{"family":"exp_pair","b1":1,"b2":{}}}"#, PI.exp()));
    assert_relative_eq!(ex2.eval(PI).unwrap().get(0, 0), 2.0 * (PI / 2.0).exp(), max_relative = 1e-14);
    let c = kernel(r#"{"family":"constant","c":[[3,0],[0,3]]}"#);
    for t in grid(7) {
        assert_eq!(c.eval(t).unwrap(), Matrix::identity(2).scaled(3.0));
    }
    assert!(matches!(c.eval(-0.1), Err(Error::OutOfRange { .. })));
    assert!(c.eval(PI + 0.1).is_err());
    assert!(c.eval(f64::NAN).is_err());
}

#[test]
fn exp_cos_entries() {
    let k = kernel(r#"{"family":"exp_cos","b":[[1,0.5],[0.5,2]]}"#);
    let t: f64 = 1.1;
    let c = (t / 2.0).cos();
    let v = k.eval(t).unwrap();
    assert_relative_eq!(v.get(0, 1), (0.5 * c).exp() + (-0.5 * c).exp(), max_relative = 1e-15);
    assert_relative_eq!(v.get(1, 1), 2.0 * (2.0 * c).cosh(), max_relative = 1e-15);
}

#[test]
fn powered_sine_uses_max_exponent() {
    let k = kernel(r#"{"family":"powered_sine","nu":[0.5,2]}"#);
    let t: f64 = 2.0;
    let s = (t / 2.0).sin();
    let v = k.eval(t).unwrap();
    assert_relative_eq!(v.get(0, 0), 1.0 - s.sqrt(), max_relative = 1e-15);
    assert_relative_eq!(v.get(0, 1), 1.0 - s * s, max_relative = 1e-15);
    for bad in ["[0]", "[2.5]", "[-1]", "[]"] {
        assert!(make_kernel(&spec(&format!(r#"{{"family":"powered_sine","nu":{bad}}}"#))).is_err(), "{bad}");
    }
}

#[test]
fn tabulated_reproduces_nodes() {
    let k = kernel(BUILTINS[11]);
    let rows = [[1.0, 0.5, 2.0], [0.5, 0.1, 1.0], [0.0, 0.0, 0.5]];
    for (t, r) in [0.0, 1.5, PI].iter().zip(rows) {
        let v = k.eval(*t).unwrap();
        assert_eq!([v.get(0, 0), v.get(0, 1), v.get(1, 1)], r);
        assert_eq!(v.get(1, 0), r[1]);
    }
    let mid = k.eval(0.75).unwrap();
    assert_relative_eq!(mid.get(0, 0), 0.75, epsilon = 1e-15);
}

#[test]
fn tabulated_rejects_bad_grids() {
    for bad in [
        r#"{"family":"tabulated","theta":[0,1],"values":[[1],[1]]}"#,
        r#"{"family":"tabulated","theta":[0,2,1,3.141592653589793],"values":[[1],[1],[1],[1]]}"#,
        r#"{"family":"tabulated","theta":[0,3.141592653589793],"values":[[1,2],[1,2]]}"#,
        r#"{"family":"tabulated","theta":[0,3.141592653589793],"values":[[1]]}"#,
        r#"{"family":"tabulated","csv":"k.csv"}"#,
    ] {
        assert!(make_kernel(&spec(bad)).is_err(), "{bad}");
    }
}

#[test]
fn malformed_specs_rejected() {
    assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"nope"}"#).is_err());
    assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"constant","c":1,"extra":2}"#).is_err());
    for bad in [
        r#"{"family":"constant","c":[[1,2],[3,1]]}"#,
        r#"{"family":"constant","c":[[1,2]]}"#,
        r#"{"family":"quadratic","b0":1,"b1":[[1,0],[0,1]],"b2":1}"#,
        r#"{"family":"triangle","support":4}"#,
        r#"{"family":"triangle","support":0}"#,
        r#"{"family":"jacobi_series","alpha":-1,"beta":0,"coefficients":[1]}"#,
        r#"{"family":"rescaled","kernel":{"family":"constant","c":1},"factor":1.5}"#,
        r#"{"family":"hadamard_power","kernel":{"family":"constant","c":1},"ell":0}"#,
    ] {
        assert!(make_kernel(&spec(bad)).is_err(), "{bad}");
    }
}

#[test]
fn specs_round_trip() {
    for json in BUILTINS {
        let s = spec(json);
        let back: KernelSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        let k = make_kernel(&s).unwrap();
        assert_eq!(k.spec(), Some(&s));
    }
}

#[test]
fn builtins_symmetric_and_continuous() {
    for json in BUILTINS {
        let k = kernel(json);
        let jumps = k.family_name() == "boxcar" || json.contains(r#""boxcar""#);
        let mut prev = k.eval(0.0).unwrap();
        for i in 1..=2000 {
            let t = PI * i as f64 / 2000.0;
            let v = k.eval(t).unwrap();
            assert!(v.asymmetry() <= 1e-12, "{json}");
            assert_eq!(v.dim(), k.dim());
            if !jumps {
                assert!(v.sub(&prev).max_abs() <= 0.05 * prev.max_abs().max(1.0), "{json} at {t}");
            }
            prev = v;
        }
    }
}

#[test]
fn hadamard_examples() {
    let base = kernel(r#"{"family":"exp_cos","b":[[1,0.5],[0.5,2]]}"#);
    let one = hadamard_power(&base, 1).unwrap();
    let ones = kernel(r#"{"family":"constant","c":[[1,1],[1,1]]}"#);
    let sq = kernel(r#"{"family":"powered_sine","nu":[1]}"#);
    let sq2 = hadamard_power(&sq, 2).unwrap();
    for t in grid(13) {
        assert_eq!(one.eval(t).unwrap(), base.eval(t).unwrap());
        assert_eq!(hadamard_power(&ones, 5).unwrap().eval(t).unwrap(), ones.eval(t).unwrap());
        let c = sq.eval(t).unwrap().get(0, 0);
        assert_relative_eq!(sq2.eval(t).unwrap().get(0, 0), c * c, max_relative = 1e-15);
    }
    assert!(hadamard_power(&base, 0).is_err());
}

#[test]
fn projective_examples() {
    let c = kernel(r#"{"family":"constant","c":1.5}"#);
    let (plus, minus) = projective_pair(&c);
    let cos = MatrixKernel::cosine_series(&[0.0, 1.0]).unwrap();
    let (cp, cm) = projective_pair(&cos);
    for t in grid(17) {
        assert_eq!(plus.eval(t).unwrap().get(0, 0), 3.0);
        assert_eq!(minus.eval(t).unwrap().get(0, 0), 0.0);
        assert!(cp.eval(t).unwrap().get(0, 0).abs() <= 1e-15);
        assert_relative_eq!(cm.eval(t).unwrap().get(0, 0), 1.0 + t.cos(), epsilon = 1e-15);
    }
}

#[test]
fn rescale_moves_support() {
    let tri = kernel(r#"{"family":"triangle","support":1.5707963267948966}"#);
    let r = rescale(&tri, 0.5).unwrap();
    assert_eq!(r.support(), Support::Bounded(PI));
    for t in grid(11) {
        assert_relative_eq!(r.eval(t).unwrap().get(0, 0), (1.0 - t / PI).max(0.0), epsilon = 1e-15);
    }
}

#[test]
fn power_coeff_examples() {
    assert_eq!(power_kernel_coeffs(0, 1.0, 0.5).unwrap(), vec![1.0]);
    let c = power_kernel_coeffs(1, 0.0, 0.0).unwrap();
    assert_relative_eq!(c[0], 0.5, epsilon = 1e-15);
    assert_relative_eq!(c[1], 0.5, epsilon = 1e-15);
    for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (0.5, -0.5), (3.0, 1.0), (7.0, 3.0)] {
        for n in 0..=12 {
            assert_relative_eq!(power_kernel_check(n, a, b).unwrap(), 1.0, max_relative = 1e-12);
        }
    }
}

#[test]
fn power_coeffs_match_projection() {
    for &(a, b) in &[(0.0, 0.0), (-0.5, -0.5), (0.5, -0.5), (2.0, 0.0), (7.0, 3.0)] {
        for n in [1, 4, 10] {
            let closed = power_kernel_coeffs(n, a, b).unwrap();
            let proj = power_kernel_coeffs_projection(n, a, b).unwrap();
            for k in 0..=n {
                assert!(closed[k] >= 0.0);
                assert!((closed[k] - proj[k]).abs() <= 1e-12 * closed[0].max(1.0), "n={n} k={k}: {} vs {}", closed[k], proj[k]);
            }
        }
    }
}

#[test]
fn power_coeffs_reproduce_polynomial() {
    for &(a, b) in &[(0.0, 0.0), (0.5, -0.5), (1.0, 0.0), (3.0, 1.0)] {
        for n in [2, 7] {
            let phi = power_kernel_coeffs(n, a, b).unwrap();
            for i in 0..20 {
                let x = -0.95 + 1.9 * i as f64 / 19.0;
                let s: f64 = phi.iter().enumerate().map(|(k, f)| f * jacobi_eval(k, a, b, x).unwrap()).sum();
                assert!((s - (0.5 * (1.0 + x)).powi(n as i32)).abs() <= 1e-10);
            }
        }
    }
}

#[test]
fn jacobi_series_at_zero() {
    let coeffs = [Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap(), Matrix::identity(2), Matrix::diag(&[0.25, 0.5])];
    for &(a, b) in &[(0.0, 0.0), (0.5, -0.5), (7.0, 3.0)] {
        let k = MatrixKernel::jacobi_series(a, b, &coeffs).unwrap();
        let mut expect = Matrix::zeros(2);
        for (n, c) in coeffs.iter().enumerate() {
            expect.add_scaled(c, jacobi_at_one(n, a, b).unwrap());
        }
        let v = k.eval(0.0).unwrap();
        assert!(v.sub(&expect).max_abs() <= 1e-10 * expect.max_abs());
    }
}

proptest! {
    #[test]
    fn exp_cos_symmetric(b00 in -2.0..2.0f64, b01 in -2.0..2.0f64, b11 in -2.0..2.0f64, t in 0.0..PI) {
        let s = KernelSpec::ExpCos { b: MatrixSpec::Rows(vec![vec![b00, b01], vec![b01, b11]]) };
        let v = make_kernel(&s).unwrap().eval(t).unwrap();
        prop_assert_eq!(v.get(0, 1), v.get(1, 0));
    }

    #[test]
    fn power_coeffs_nonnegative(n in 0usize..25, ai in 0usize..16, bi in 0usize..8) {
        let a = -0.5 + 0.5 * ai as f64;
        let b = -0.5 + 0.5 * bi as f64;
        let phi = power_kernel_coeffs(n, a, b).unwrap();
        prop_assert!(phi.iter().all(|&f| f >= 0.0));
        prop_assert!((power_kernel_check(n, a, b).unwrap() - 1.0).abs() <= 1e-11);
    }
}
