// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

const MAX_DEPTH: u32 = 40;

/// Fixed 5-point Gauss-Legendre rule for a 2-vector integrand.
pub(crate) fn gauss5<F: Fn(f64) -> [f64; 2]>(f: &F, a: f64, b: f64) -> [f64; 2] {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = [0.0; 2];
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        let v = f(mid + half * x);
        acc[0] += w * v[0];
        acc[1] += w * v[1];
    }
    [acc[0] * half, acc[1] * half]
}

/// Adaptive Gauss-Legendre integration with an absolute tolerance.
pub(crate) fn adaptive<F: Fn(f64) -> [f64; 2]>(f: &F, a: f64, b: f64, tol: f64) -> [f64; 2] {
    let whole = gauss5(f, a, b);
    refine(f, a, b, whole, tol, 0)
}

fn refine<F: Fn(f64) -> [f64; 2]>(
    f: &F,
    a: f64,
    b: f64,
    whole: [f64; 2],
    tol: f64,
    depth: u32,
) -> [f64; 2] {
    let m = 0.5 * (a + b);
    let left = gauss5(f, a, m);
    let right = gauss5(f, m, b);
    let split = [left[0] + right[0], left[1] + right[1]];
    let err = (split[0] - whole[0]).abs().max((split[1] - whole[1]).abs());
    if err <= tol || depth >= MAX_DEPTH {
        return split;
    }
    let l = refine(f, a, m, left, 0.5 * tol, depth + 1);
    let r = refine(f, m, b, right, 0.5 * tol, depth + 1);
    [l[0] + r[0], l[1] + r[1]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        // Degree 9 is the exactness limit of the 5-point rule.
        let f = |x: f64| [x.powi(9) + 1.0, 3.0 * x * x];
        let v = gauss5(&f, 0.0, 2.0);
        assert!((v[0] - (2f64.powi(10) / 10.0 + 2.0)).abs() < 1e-10);
        assert!((v[1] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let f = |x: f64| [(x * x).cos(), (x * x).sin()];
        let v = adaptive(&f, 0.0, 10.0, 1e-11);
        // Fresnel-type integrals to 10: reference from a very fine composite rule.
        let mut reference = [0.0; 2];
        let n = 20_000;
        for i in 0..n {
            let a = 10.0 * i as f64 / n as f64;
            let b = 10.0 * (i + 1) as f64 / n as f64;
            let g = gauss5(&f, a, b);
            reference[0] += g[0];
            reference[1] += g[1];
        }
        assert!((v[0] - reference[0]).abs() < 1e-9);
        assert!((v[1] - reference[1]).abs() < 1e-9);
    }
}
