//! Shared fixtures for the acceptance suite: a deterministic RNG and
//! independent oracles (brute-force second quantization, an LP transport
//! solver) that the library code under test never touches.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Xorshift64 with a 53-bit uniform output; deterministic across platforms.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> TestRng {
        TestRng(seed ^ 0x9e3779b97f4a7c15)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `0..bound`.
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hermitian(rng: &mut TestRng, dim: usize) -> DMatrix<Complex64> {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.uniform() - 0.5, rng.uniform() - 0.5)
    });
    (&a + a.adjoint()).scale(0.5)
}

/// `<x'| a†_p a_q |x>` in the occupation basis (bit `r` of `x` = occupation
/// of mode `r`), with the Jordan-Wigner sign `(-1)^(sum of occupations below
/// the acted mode)` picked up by each ladder operator in turn.
fn hop_element(x: usize, p: usize, q: usize) -> Option<(usize, f64)> {
    if (x >> q) & 1 == 0 {
        return None;
    }
    let mid = x & !(1 << q);
    if (mid >> p) & 1 == 1 {
        return None;
    }
    let mut parity = (x & ((1 << q) - 1)).count_ones();
    parity += (mid & ((1 << p) - 1)).count_ones();
    let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
    Some((mid | (1 << p), sign))
}

/// Fermi-Hubbard chain built directly in the occupation basis, bypassing the
/// Pauli algebra entirely. Mode order matches the library convention:
/// qubit `2 * site + spin`, spin up = 0.
pub fn occupation_hubbard(sites: usize, t: f64, u: f64, periodic: bool) -> DMatrix<Complex64> {
    let modes = 2 * sites;
    let dim = 1usize << modes;
    let mode = |site: usize, spin: usize| 2 * site + spin;
    let mut bonds: Vec<(usize, usize)> = (0..sites - 1).map(|i| (i, i + 1)).collect();
    if periodic && sites > 2 {
        bonds.push((sites - 1, 0));
    }
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        for site in 0..sites {
            if (x >> mode(site, 0)) & 1 == 1 && (x >> mode(site, 1)) & 1 == 1 {
                h[(x, x)] += Complex64::new(u, 0.0);
            }
        }
        for &(i, j) in &bonds {
            for spin in 0..2 {
                for (p, q) in [(mode(i, spin), mode(j, spin)), (mode(j, spin), mode(i, spin))] {
                    if let Some((y, sign)) = hop_element(x, p, q) {
                        h[(y, x)] += Complex64::new(-t * sign, 0.0);
                    }
                }
            }
        }
    }
    h
}

/// Exact 1-Wasserstein distance on the line by minimum-cost flow with
/// successive shortest augmenting paths (Bellman-Ford on the residual
/// network). Masses are normalized; positions are taken as given.
pub fn transport_lp(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let wa: f64 = a.iter().map(|e| e.1).sum();
    let wb: f64 = b.iter().map(|e| e.1).sum();
    let na = a.len();
    let nb = b.len();
    let mut supply: Vec<f64> = a.iter().map(|e| e.1 / wa).collect();
    let mut demand: Vec<f64> = b.iter().map(|e| e.1 / wb).collect();
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|&(x, _)| b.iter().map(|&(y, _)| (x - y).abs()).collect())
        .collect();
    let mut flow = vec![vec![0.0f64; nb]; na];

    loop {
        let remaining: f64 = supply.iter().sum();
        if remaining < 1e-15 {
            break;
        }
        // Shortest path from any positive supply to any positive demand,
        // through forward edges i->j and residual back edges j->i.
        let nodes = na + nb;
        let mut dist = vec![f64::INFINITY; nodes];
        let mut prev = vec![usize::MAX; nodes];
        for i in 0..na {
            if supply[i] > 1e-15 {
                dist[i] = 0.0;
            }
        }
        for _ in 0..nodes {
            let mut changed = false;
            for i in 0..na {
                if !dist[i].is_finite() {
                    continue;
                }
                for j in 0..nb {
                    if dist[i] + cost[i][j] < dist[na + j] - 1e-15 {
                        dist[na + j] = dist[i] + cost[i][j];
                        prev[na + j] = i;
                        changed = true;
                    }
                }
            }
            for j in 0..nb {
                if !dist[na + j].is_finite() {
                    continue;
                }
                for i in 0..na {
                    if flow[i][j] > 1e-15 && dist[na + j] - cost[i][j] < dist[i] - 1e-15 {
                        dist[i] = dist[na + j] - cost[i][j];
                        prev[i] = na + j;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sink = (0..nb)
            .filter(|&j| demand[j] > 1e-15 && dist[na + j].is_finite())
            .min_by(|&x, &y| dist[na + x].total_cmp(&dist[na + y]))
            .expect("feasible transport problem");

        // Bottleneck along the path, then augment.
        let mut bottleneck = demand[sink];
        let mut node = na + sink;
        while prev[node] != usize::MAX {
            let up = prev[node];
            if node >= na {
                // forward edge up -> node: unlimited capacity
            } else {
                bottleneck = bottleneck.min(flow[node][up - na]);
            }
            node = up;
        }
        bottleneck = bottleneck.min(supply[node]);

        let source = node;
        let mut node = na + sink;
        while prev[node] != usize::MAX {
            let up = prev[node];
            if node >= na {
                flow[up][node - na] += bottleneck;
            } else {
                flow[node][up - na] -= bottleneck;
            }
            node = up;
        }
        supply[source] -= bottleneck;
        demand[sink] -= bottleneck;
    }

    flow.iter()
        .zip(&cost)
        .map(|(f, c)| f.iter().zip(c).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}
