//! Test-side oracles. Nothing here calls into the library's search code;
//! everything is dense enumeration so it can be trusted independently.
#![allow(dead_code)]

use coposolve::SymMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn matrix(rows: &[&[f64]]) -> SymMatrix {
    SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

/// Entries uniform in `[lo, hi]`; diagonal replaced by its absolute value when `abs_diag`.
pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, abs_diag: bool) -> SymMatrix {
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(lo..=hi);
            let v = if i == j && abs_diag { v.abs() } else { v };
            rows[i][j] = v;
            rows[j][i] = v;
        }
    }
    SymMatrix::from_rows(&rows).unwrap()
}

/// Every point `k / res` of the simplex grid, `sum k = res`.
pub fn simplex_points(n: usize, res: usize) -> Vec<Vec<f64>> {
    fn rec(n: usize, left: usize, res: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / res as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, res, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, res, &mut Vec::new(), &mut out);
    out
}

pub fn quad(b: &SymMatrix, c: &[f64]) -> f64 {
    let n = b.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += b.get(i, j) * c[i] * c[j];
        }
    }
    s
}

pub fn grid_min_quadratic(b: &SymMatrix, res: usize) -> f64 {
    simplex_points(b.n(), res).iter().map(|c| quad(b, c)).fold(f64::INFINITY, f64::min)
}

fn pw(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        if e == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        x.powf(e)
    }
}

/// `sum_ij beta_ij c_j^{p/2} c_i^{p/2-1} mu_i`, written out directly.
pub fn weighted_form(b: &SymMatrix, c: &[f64], mu: &[f64], p: f64) -> f64 {
    let q = 0.5 * p;
    let n = b.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += b.get(i, j) * pw(c[j], q) * pw(c[i], q - 1.0) * mu[i];
        }
    }
    s
}

/// Minimum over the resolution-`res` simplex grid of
/// `weighted_form(b, c, 1, p) - kappa0 * sum c_i^{p-1}`.
///
/// The last two coordinates are swept in an inner loop over contiguous
/// power tables, the third-to-last in a middle loop with O(1) updates, and
/// only the remaining prefix is rebuilt from scratch.
pub fn unit_weight_slack_min(b: &SymMatrix, p: f64, kappa0: f64, res: usize) -> f64 {
    let n = b.n();
    assert!(n >= 2);
    let q = 0.5 * p;
    let x = |k: usize| k as f64 / res as f64;
    let tp: Vec<f64> = (0..=res).map(|k| pw(x(k), q)).collect();
    let tq: Vec<f64> = (0..=res).map(|k| pw(x(k), q - 1.0)).collect();
    let ts: Vec<f64> = (0..=res).map(|k| pw(x(k), p - 1.0)).collect();
    // reversed tables: rev[res - rem + a] = t[rem - a]
    let rp: Vec<f64> = tp.iter().rev().copied().collect();
    let rq: Vec<f64> = tq.iter().rev().copied().collect();
    let rs: Vec<f64> = ts.iter().rev().copied().collect();
    let bt: Vec<f64> = (0..n * n).map(|k| b.get(k / n, k % n)).collect();
    let beta = |i: usize, j: usize| bt[i * n + j];
    let (u, v) = (n - 2, n - 1);
    let w = n.checked_sub(3);
    let outer = n.saturating_sub(3);
    let (buu, buv, bvv) = (beta(u, u), beta(u, v), beta(v, v));

    let sweep = |rem: usize, ru0: f64, rv0: f64, a0: f64, a_u: f64, a_v: f64, s0: f64| {
        let off = res - rem;
        let it = tp[..=rem]
            .iter()
            .zip(&tq[..=rem])
            .zip(&ts[..=rem])
            .zip(rp[off..].iter().zip(&rq[off..]).zip(&rs[off..]));
        let mut m = f64::INFINITY;
        for (((&pa, &qa), &sa), ((&pb, &qb), &sb)) in it {
            let ru = ru0 + buu * pa + buv * pb;
            let rv = rv0 + buv * pa + bvv * pb;
            let f = a0 + a_u * pa + a_v * pb + qa * ru + qb * rv;
            m = m.min(f - kappa0 * (s0 + sa + sb));
        }
        m
    };

    let mut best = f64::INFINITY;
    let mut prefix = vec![0usize; outer];
    let mut ob = vec![0.0; n];
    loop {
        let used: usize = prefix.iter().sum();
        let rem_out = res - used;
        for (i, obi) in ob.iter_mut().enumerate() {
            *obi = (0..outer).map(|j| beta(i, j) * tp[prefix[j]]).sum();
        }
        let (mut c0, mut a_u_out, mut a_v_out, mut s_out) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..outer {
            let qi = tq[prefix[i]];
            c0 += qi * ob[i];
            a_u_out += qi * beta(i, u);
            a_v_out += qi * beta(i, v);
            s_out += ts[prefix[i]];
        }
        match w {
            None => best = best.min(sweep(rem_out, ob[u], ob[v], c0, a_u_out, a_v_out, s_out)),
            Some(w) => {
                let cw: f64 = (0..outer).map(|i| tq[prefix[i]] * beta(i, w)).sum();
                for kw in 0..=rem_out {
                    let (pw_, qw) = (tp[kw], tq[kw]);
                    let base_w = ob[w] + beta(w, w) * pw_;
                    let a0 = c0 + pw_ * cw + qw * base_w;
                    let m = sweep(
                        rem_out - kw,
                        ob[u] + beta(u, w) * pw_,
                        ob[v] + beta(v, w) * pw_,
                        a0,
                        a_u_out + qw * beta(w, u),
                        a_v_out + qw * beta(w, v),
                        s_out + ts[kw],
                    );
                    best = best.min(m);
                }
            }
        }
        // odometer over the prefix, keeping its sum within res
        let mut d = 0;
        loop {
            if d == outer {
                return best;
            }
            prefix[d] += 1;
            if prefix.iter().sum::<usize>() <= res {
                break;
            }
            prefix[d] = 0;
            d += 1;
        }
    }
}

/// Best margin `max_mu min_{c in grid} f_mu(c)` over weights with largest
/// component one, by zooming on each face `mu_k = 1`. The inner minimum is
/// concave in `mu`, so the zoom tracks its maximum. Points outside the grid
/// are not seen, so a negative result is a genuine obstruction for every
/// weight on the zoomed boxes.
pub fn weight_margin_oracle(b: &SymMatrix, p: f64, res: usize) -> (f64, Vec<f64>) {
    weight_margin_on(b, p, &simplex_points(b.n(), res))
}

/// As `weight_margin_oracle`, over an explicit finite point set.
pub fn weight_margin_on(b: &SymMatrix, p: f64, pts: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = b.n();
    assert_eq!(n, 3, "oracle is written for three components");
    let q = 0.5 * p;
    // f_mu(c) = sum_i mu_i g_i(c)
    let g: Vec<[f64; 3]> = pts
        .iter()
        .map(|c| {
            let mut gi = [0.0; 3];
            for (i, gv) in gi.iter_mut().enumerate() {
                *gv = (0..n).map(|j| b.get(i, j) * pw(c[j], q)).sum::<f64>() * pw(c[i], q - 1.0);
            }
            gi
        })
        .collect();
    let margin = |mu: &[f64; 3]| g.iter().map(|gi| mu[0] * gi[0] + mu[1] * gi[1] + mu[2] * gi[2]).fold(f64::INFINITY, f64::min);
    let lo = 1e-6;
    let mut best = (f64::NEG_INFINITY, vec![1.0; 3]);
    for k in 0..3 {
        let free: Vec<usize> = (0..3).filter(|&i| i != k).collect();
        let (mut box_lo, mut box_hi) = ([lo, lo], [1.0, 1.0]);
        let mut face_best = (f64::NEG_INFINITY, [1.0; 3]);
        for _ in 0..40 {
            let steps = 10;
            for s in 0..=steps {
                for t in 0..=steps {
                    let x = box_lo[0] + (box_hi[0] - box_lo[0]) * s as f64 / steps as f64;
                    let y = box_lo[1] + (box_hi[1] - box_lo[1]) * t as f64 / steps as f64;
                    let mut mu = [1.0; 3];
                    mu[free[0]] = x;
                    mu[free[1]] = y;
                    let m = margin(&mu);
                    if m > face_best.0 {
                        face_best = (m, mu);
                    }
                }
            }
            for (a, &i) in free.iter().enumerate() {
                let half = 0.3 * (box_hi[a] - box_lo[a]);
                box_lo[a] = (face_best.1[i] - half).max(lo);
                box_hi[a] = (face_best.1[i] + half).min(1.0);
            }
        }
        if face_best.0 > best.0 {
            best = (face_best.0, face_best.1.to_vec());
        }
    }
    best
}
