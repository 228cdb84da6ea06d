//! Brute-force oracles written without the library's own data structures.
#![allow(dead_code, clippy::needless_range_loop)]

/// Expected sped-up steps from all-defect to all-cooperate, by solving the
/// linear system over all `2^n` configurations (bit set = defector).
pub fn spedup_absorption_steps(n: usize, edges: &[(usize, usize)]) -> f64 {
    let states = 1usize << n;
    // unknowns: every state except all-cooperate (0)
    let m = states - 1;
    let mut a = vec![vec![0.0f64; m + 1]; m];
    for s in 1..states {
        let row = s - 1;
        a[row][row] += 1.0;
        a[row][m] = 1.0;
        let active: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(u, v)| s >> u & 1 == 1 || s >> v & 1 == 1)
            .collect();
        let w = 1.0 / active.len() as f64;
        for (u, v) in active {
            let du = s >> u & 1 == 1;
            let dv = s >> v & 1 == 1;
            let next = if du && dv {
                s & !(1 << u) & !(1 << v)
            } else {
                s | 1 << u | 1 << v
            };
            if next != 0 {
                a[row][next - 1] -= w;
            }
        }
    }
    let x = gauss(a);
    x[states - 2]
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
pub fn gauss(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let p = a[col][col];
        for k in col..=m {
            a[col][k] /= p;
        }
        for r in 0..m {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for k in col..=m {
                    a[r][k] -= f * a[col][k];
                }
            }
        }
    }
    a.iter().map(|row| row[m]).collect()
}

/// `Σ_{m ≤ max_steps} P[T = m] ρ^m` for the first passage of a ±1 walk
/// (up with probability `p`) from 0 to `+target`, by forward recursion over
/// the position distribution.
pub fn truncated_mgf(p: f64, rho: f64, target: i64, max_steps: usize) -> f64 {
    let floor = -(max_steps as i64);
    let width = (target - floor) as usize;
    let idx = |x: i64| (x - floor) as usize;
    let mut dist = vec![0.0f64; width];
    dist[idx(0)] = 1.0;
    let mut total = 0.0;
    let mut weight = 1.0;
    for _ in 0..max_steps {
        weight *= rho;
        let mut next = vec![0.0f64; width];
        let mut hit = 0.0;
        for (i, &mass) in dist.iter().enumerate() {
            if mass < 1e-300 {
                continue;
            }
            let x = floor + i as i64;
            if x + 1 == target {
                hit += mass * p;
            } else {
                next[idx(x + 1)] += mass * p;
            }
            if x > floor {
                next[idx(x - 1)] += mass * (1.0 - p);
            }
        }
        total += hit * weight;
        dist = next;
    }
    total
}

/// Minimum of `|E(U, Uᶜ)| / vol(U)` over `α ≤ |U| ≤ β`, as a reduced
/// `(numerator, denominator)` pair, by plain subset enumeration.
pub fn naive_expansion(n: usize, edges: &[(usize, usize)], alpha: usize, beta: usize) -> (u64, u64) {
    let mut deg = vec![0u64; n];
    for &(u, v) in edges {
        deg[u] += 1;
        deg[v] += 1;
    }
    let mut best: Option<(u64, u64)> = None;
    for mask in 0u64..1 << n {
        let size = mask.count_ones() as usize;
        if size < alpha || size > beta {
            continue;
        }
        let vol: u64 = (0..n).filter(|&v| mask >> v & 1 == 1).map(|v| deg[v]).sum();
        if vol == 0 {
            continue;
        }
        let cut = edges
            .iter()
            .filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1))
            .count() as u64;
        best = match best {
            Some((bn, bd)) if bn * vol <= cut * bd => Some((bn, bd)),
            _ => Some((cut, vol)),
        };
    }
    let (a, b) = best.expect("some admissible set");
    let g = gcd(a, b);
    (a / g, b / g)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

/// Exact probability that some top site of the `width × height` oriented
/// lattice is reached from every even level-0 site, summing over all edge
/// configurations. Edges are listed independently of the library's order.
pub fn lattice_survival(width: usize, height: usize, p: f64) -> f64 {
    let mut edges = Vec::new();
    for j in 0..height {
        for i in 1..=width {
            if (i + j) % 2 != 0 {
                continue;
            }
            if i < width {
                edges.push(((i, j), (i + 1, j + 1)));
            }
            if i >= 2 {
                edges.push(((i, j), (i - 1, j + 1)));
            }
        }
    }
    let m = edges.len();
    assert!(m <= 24, "oracle limited to 24 edges");
    let mut total = 0.0;
    for mask in 0u64..1 << m {
        let mut alive: std::collections::HashSet<(usize, usize)> =
            (1..=width).filter(|i| i % 2 == 0).map(|i| (i, 0)).collect();
        for j in 0..height {
            for (k, &(from, to)) in edges.iter().enumerate() {
                if from.1 == j && mask >> k & 1 == 1 && alive.contains(&from) {
                    alive.insert(to);
                }
            }
        }
        if alive.iter().any(|&(_, j)| j == height) {
            let open = mask.count_ones() as i32;
            total += p.powi(open) * (1.0 - p).powi(m as i32 - open);
        }
    }
    total
}

/// Law of the top of a tower of `height` blocks by iterating the four-state
/// chain. `p = [p0, p1, p01, p10]`; the result is indexed `[left][right]`.
pub fn tower_law(p: [f64; 4], height: usize, bottom: (bool, bool)) -> [[f64; 2]; 2] {
    let mut dist = [[0.0f64; 2]; 2];
    dist[bottom.0 as usize][bottom.1 as usize] = 1.0;
    for _ in 0..height {
        let mut next = [[0.0f64; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                // left top fed by e0 from the left and e10 from the right
                let left = 1.0 - (1.0 - p[0] * a as f64) * (1.0 - p[3] * b as f64);
                let right = 1.0 - (1.0 - p[1] * b as f64) * (1.0 - p[2] * a as f64);
                next[1][1] += dist[a][b] * left * right;
                next[1][0] += dist[a][b] * left * (1.0 - right);
                next[0][1] += dist[a][b] * (1.0 - left) * right;
                next[0][0] += dist[a][b] * (1.0 - left) * (1.0 - right);
            }
        }
        dist = next;
    }
    dist
}
