//! Reference Cox computations used as test oracles. Everything here is written
//! directly from the textbook formulas on raw covariates, with no sharing of
//! code or tricks (centring, sweep order) with the library fitter.

#![allow(dead_code)]

use std::path::Path;

#[derive(Debug, Clone)]
pub struct Row {
    pub x: Vec<f64>,
    pub time: u32,
    pub event: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OracleTies {
    Efron,
    Breslow,
}

pub fn load_csv(path: &Path) -> Vec<Row> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let p = header.len() - 2;
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                x: f[..p].iter().map(|v| v.trim().parse().unwrap()).collect(),
                time: f[p].trim().parse().unwrap(),
                event: f[p + 1].trim() == "1",
            }
        })
        .collect()
}

fn eta(beta: &[f64], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(b, v)| b * v).sum()
}

/// logPL(beta) - penalty/2 |beta|^2, one event time at a time.
pub fn penalized_log_pl(rows: &[Row], beta: &[f64], penalty: f64, ties: OracleTies) -> f64 {
    let mut times: Vec<u32> = rows.iter().filter(|r| r.event).map(|r| r.time).collect();
    times.sort();
    times.dedup();
    let mut ll = 0.0;
    for t in times {
        let dead: Vec<&Row> = rows.iter().filter(|r| r.event && r.time == t).collect();
        let risk: f64 = rows.iter().filter(|r| r.time >= t).map(|r| eta(beta, &r.x).exp()).sum();
        let dead_sum: f64 = dead.iter().map(|r| eta(beta, &r.x).exp()).sum();
        let d = dead.len() as f64;
        for r in &dead {
            ll += eta(beta, &r.x);
        }
        for l in 0..dead.len() {
            let frac = match ties {
                OracleTies::Efron => l as f64 / d,
                OracleTies::Breslow => 0.0,
            };
            ll -= (risk - frac * dead_sum).ln();
        }
    }
    ll - 0.5 * penalty * beta.iter().map(|b| b * b).sum::<f64>()
}

/// Exhaustive grid over [-6, 6]^p, then repeated local grids of shrinking
/// spacing around the incumbent. Intended for p <= 2.
pub fn brute_force_maximizer(rows: &[Row], penalty: f64, ties: OracleTies) -> Vec<f64> {
    let p = rows[0].x.len();
    assert!(p <= 2, "brute force is for tiny problems");
    let f = |b: &[f64]| penalized_log_pl(rows, b, penalty, ties);
    let mut best = vec![0.0; p];
    let mut best_val = f(&best);
    let mut half_width = 6.0;
    let steps = 60i32;
    while half_width > 1e-9 {
        let center = best.clone();
        let h = half_width / steps as f64;
        let mut probe = vec![0.0; p];
        let visit = |probe: &[f64], best: &mut Vec<f64>, best_val: &mut f64| {
            let v = f(probe);
            if v > *best_val {
                *best_val = v;
                *best = probe.to_vec();
            }
        };
        if p == 1 {
            for i in -steps..=steps {
                probe[0] = center[0] + i as f64 * h;
                visit(&probe, &mut best, &mut best_val);
            }
        } else {
            for i in -steps..=steps {
                for j in -steps..=steps {
                    probe[0] = center[0] + i as f64 * h;
                    probe[1] = center[1] + j as f64 * h;
                    visit(&probe, &mut best, &mut best_val);
                }
            }
        }
        half_width = 4.0 * h;
    }
    best
}

/// Newton iterations on the oracle likelihood for larger problems. Gradient
/// and Hessian are central finite differences of `penalized_log_pl`; the
/// linear system is solved by Gaussian elimination with partial pivoting.
pub fn finite_difference_newton(rows: &[Row], penalty: f64, ties: OracleTies) -> Vec<f64> {
    let p = rows[0].x.len();
    let f = |b: &[f64]| penalized_log_pl(rows, b, penalty, ties);
    let shifted = |b: &[f64], moves: &[(usize, f64)]| {
        let mut c = b.to_vec();
        for (j, d) in moves {
            c[*j] += d;
        }
        f(&c)
    };
    let mut beta = vec![0.0; p];
    let mut val = f(&beta);
    for _ in 0..100 {
        let hg = 1e-5;
        let hh = 1e-4;
        let g: Vec<f64> = (0..p)
            .map(|j| (shifted(&beta, &[(j, hg)]) - shifted(&beta, &[(j, -hg)])) / (2.0 * hg))
            .collect();
        let mut h = vec![vec![0.0; p]; p];
        for j in 0..p {
            for k in j..p {
                let v = if j == k {
                    (shifted(&beta, &[(j, hh)]) - 2.0 * val + shifted(&beta, &[(j, -hh)])) / (hh * hh)
                } else {
                    (shifted(&beta, &[(j, hh), (k, hh)]) - shifted(&beta, &[(j, hh), (k, -hh)])
                        - shifted(&beta, &[(j, -hh), (k, hh)])
                        + shifted(&beta, &[(j, -hh), (k, -hh)]))
                        / (4.0 * hh * hh)
                };
                h[j][k] = v;
                h[k][j] = v;
            }
        }
        // Solve (-H) delta = g.
        let mut a: Vec<Vec<f64>> = h
            .iter()
            .zip(&g)
            .map(|(row, gi)| row.iter().map(|v| -v).chain(std::iter::once(*gi)).collect())
            .collect();
        for col in 0..p {
            let pivot = (col..p)
                .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap())
                .unwrap();
            a.swap(col, pivot);
            for r in col + 1..p {
                let factor = a[r][col] / a[col][col];
                for c in col..=p {
                    a[r][c] -= factor * a[col][c];
                }
            }
        }
        let mut delta = vec![0.0; p];
        for r in (0..p).rev() {
            let tail: f64 = (r + 1..p).map(|c| a[r][c] * delta[c]).sum();
            delta[r] = (a[r][p] - tail) / a[r][r];
        }
        let mut step = 1.0;
        let mut moved = 0.0f64;
        while step > 1e-6 {
            let cand: Vec<f64> = beta.iter().zip(&delta).map(|(b, d)| b + step * d).collect();
            let v = f(&cand);
            if v >= val {
                moved = delta.iter().fold(0.0f64, |m, d| m.max((step * d).abs()));
                beta = cand;
                val = v;
                break;
            }
            step *= 0.5;
        }
        if moved < 1e-9 {
            break;
        }
    }
    beta
}

/// Breslow cumulative baseline hazard at `t`, in raw covariate units.
pub fn breslow_cumulative(rows: &[Row], beta: &[f64], t: u32) -> f64 {
    let mut times: Vec<u32> = rows.iter().filter(|r| r.event && r.time <= t).map(|r| r.time).collect();
    times.sort();
    times.dedup();
    times
        .into_iter()
        .map(|s| {
            let d = rows.iter().filter(|r| r.event && r.time == s).count() as f64;
            let risk: f64 = rows.iter().filter(|r| r.time >= s).map(|r| eta(beta, &r.x).exp()).sum();
            d / risk
        })
        .sum()
}

pub fn survival(rows: &[Row], beta: &[f64], x: &[f64], t: u32) -> f64 {
    (-breslow_cumulative(rows, beta, t) * eta(beta, x).exp()).exp()
}
