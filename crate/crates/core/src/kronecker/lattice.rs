//! Candidate generation from a reduced three-dimensional lattice.
//!
//! Rows `(w, α/2π, β/2π)`, `(0, 1, 0)`, `(0, 0, 1)` span the vectors
//! `(n·w, nα/2π + p, nβ/2π + q)`. A lattice point close to
//! `(0, x/2π, y/2π)` has small `|n|·w` and fractional parts close to the
//! targets. The weight `w` balances the two so that the expected error in
//! turns and the expected `|n|` land in a useful range; it is a heuristic
//! and every candidate is verified by the caller.

use std::f64::consts::TAU;

use super::KroneckerProblem;

type Vec3 = [f64; 3];

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn gram_schmidt(b: &[Vec3; 3]) -> ([Vec3; 3], [[f64; 3]; 3]) {
    let mut star = *b;
    let mut mu = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..i {
            mu[i][j] = dot(&b[i], &star[j]) / dot(&star[j], &star[j]);
            let sj = star[j];
            for (x, y) in star[i].iter_mut().zip(sj) {
                *x -= mu[i][j] * y;
            }
        }
    }
    (star, mu)
}

/// LLL with δ = 3/4. Returns the reduced basis and the integer transform
/// `U` with `reduced = U · basis`.
fn lll(mut b: [Vec3; 3]) -> ([Vec3; 3], [[i64; 3]; 3]) {
    let mut u = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut k = 1;
    let mut guard = 0;
    while k < 3 && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&b);
            let q = mu[k][j].round();
            if q != 0.0 {
                for c in 0..3 {
                    b[k][c] -= q * b[j][c];
                    u[k][c] -= q as i64 * u[j][c];
                }
            }
        }
        let (star, mu) = gram_schmidt(&b);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (0.75 - mu[k][k - 1] * mu[k][k - 1]) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    (b, u)
}

/// Babai nearest-plane coefficients of `t` in the reduced basis.
fn nearest_plane(b: &[Vec3; 3], t: &Vec3) -> [i64; 3] {
    let (star, _) = gram_schmidt(b);
    let mut r = *t;
    let mut c = [0i64; 3];
    for i in (0..3).rev() {
        let q = (dot(&r, &star[i]) / dot(&star[i], &star[i])).round();
        c[i] = q as i64;
        for k in 0..3 {
            r[k] -= q * b[i][k];
        }
    }
    c
}

/// Candidate values of `n`: the nearest-plane point, its 26 neighbours in
/// the reduced basis, and each of those shifted by up to ±8.
pub(super) fn candidates(p: &KroneckerProblem) -> Vec<i64> {
    let delta = p.epsilon / (2.0 * TAU);
    let n_scale = (1.0 / (delta * delta)).min(p.n_max as f64).max(1.0);
    let w = delta / n_scale;
    let basis = [
        [w, p.alpha / TAU, p.beta / TAU],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ];
    let target = [
        0.0,
        p.target_x.rem_euclid(TAU) / TAU,
        p.target_y.rem_euclid(TAU) / TAU,
    ];
    let (reduced, u) = lll(basis);
    let c = nearest_plane(&reduced, &target);

    let mut out = Vec::new();
    for d0 in -1..=1i64 {
        for d1 in -1..=1i64 {
            for d2 in -1..=1i64 {
                let cc = [c[0] + d0, c[1] + d1, c[2] + d2];
                let n: i64 = (0..3).map(|i| cc[i] * u[i][0]).sum();
                for s in -8..=8 {
                    out.push(n + s);
                }
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lll_transform_is_consistent() {
        let b = [
            [1e-4, 0.2250790790392765, 0.2756644477108961],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
        ];
        let (r, u) = lll(b);
        for i in 0..3 {
            for k in 0..3 {
                let v: f64 = (0..3).map(|j| u[i][j] as f64 * b[j][k]).sum();
                assert!((v - r[i][k]).abs() < 1e-9);
            }
        }
        // reduced vectors are no longer than the unit vectors
        for row in &r {
            assert!(dot(row, row) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn lattice_candidates_often_verify() {
        let a = std::f64::consts::SQRT_2;
        let b = 3f64.sqrt();
        let mut hits = 0;
        for i in 0..20 {
            let x = 0.3 * i as f64;
            let y = 1.1 * i as f64;
            let p = KroneckerProblem::new(a, b, x, y, 0.05, 1_000_000);
            if candidates(&p).into_iter().any(|n| p.accepts(n)) {
                hits += 1;
            }
        }
        assert!(hits >= 5, "only {hits} of 20 lattice searches verified");
    }
}
