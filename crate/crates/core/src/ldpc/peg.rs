//! Progressive edge-growth construction.
//!
//! Variables are processed in ascending degree order. A variable's first
//! edge goes to a check of lowest current degree; every further edge goes
//! to a check as far away as possible in the current graph, found by
//! breadth-first expansion from the variable. Ties are broken by lowest
//! current check degree, then lowest check index. The seed only shuffles
//! the processing order inside each equal-degree class.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::degree::{node_degrees, DegreeDistribution};
use super::matrix::ParityCheckMatrix;
use crate::error::{Error, Result};

pub fn peg_construct(
    n_var: usize,
    rate: f64,
    lambda: &DegreeDistribution,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::Domain {
            what: "rate",
            value: rate,
        });
    }
    let n_chk = (n_var as f64 * (1.0 - rate)).round() as usize;
    if n_chk == 0 || n_chk >= n_var {
        return Err(Error::Infeasible(format!(
            "rate {rate} at n = {n_var} gives {n_chk} checks"
        )));
    }
    let plan = node_degrees(lambda, n_var, n_chk)?;

    let mut order: Vec<usize> = (0..n_var).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = 0;
    while start < n_var {
        let d = plan.var_degrees[start];
        let end = start + plan.var_degrees[start..].iter().take_while(|&&x| x == d).count();
        order[start..end].shuffle(&mut rng);
        start = end;
    }

    let mut g = Growth::new(n_var, n_chk);
    for &v in &order {
        for k in 0..plan.var_degrees[v] {
            let c = if k == 0 { g.least_loaded_check() } else { g.farthest_check(v) };
            g.connect(v, c);
        }
    }
    let checks = g
        .chk_adj
        .into_iter()
        .map(|row| row.into_iter().map(|v| v as usize).collect())
        .collect();
    Ok(ParityCheckMatrix::from_checks(n_var, checks)?.with_seed(seed))
}

struct Growth {
    var_adj: Vec<Vec<u32>>,
    chk_adj: Vec<Vec<u32>>,
    var_mark: Vec<u32>,
    chk_mark: Vec<u32>,
    stamp: u32,
    frontier: Vec<u32>,
    next: Vec<u32>,
}

impl Growth {
    fn new(n_var: usize, n_chk: usize) -> Self {
        Self {
            var_adj: vec![Vec::new(); n_var],
            chk_adj: vec![Vec::new(); n_chk],
            var_mark: vec![0; n_var],
            chk_mark: vec![0; n_chk],
            stamp: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c as u32);
        self.chk_adj[c].push(v as u32);
    }

    fn least_loaded_check(&self) -> usize {
        best_of(&self.chk_adj, 0..self.chk_adj.len())
    }

    fn farthest_check(&mut self, v: usize) -> usize {
        self.stamp += 1;
        let stamp = self.stamp;
        let m = self.chk_adj.len();
        self.var_mark[v] = stamp;
        self.frontier.clear();
        for &c in &self.var_adj[v] {
            self.chk_mark[c as usize] = stamp;
            self.frontier.push(c);
        }
        let mut reached = self.frontier.len();
        loop {
            self.next.clear();
            for &c in &self.frontier {
                for &u in &self.chk_adj[c as usize] {
                    if self.var_mark[u as usize] == stamp {
                        continue;
                    }
                    self.var_mark[u as usize] = stamp;
                    for &c2 in &self.var_adj[u as usize] {
                        if self.chk_mark[c2 as usize] != stamp {
                            self.chk_mark[c2 as usize] = stamp;
                            self.next.push(c2);
                        }
                    }
                }
            }
            if self.next.is_empty() {
                // the tree stopped growing before covering every check
                let marks = &self.chk_mark;
                return best_of(&self.chk_adj, (0..m).filter(|&c| marks[c] != stamp));
            }
            if reached + self.next.len() == m {
                // the next level would cover everything: pick from it
                return best_of(&self.chk_adj, self.next.iter().map(|&c| c as usize));
            }
            reached += self.next.len();
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
    }
}

fn best_of(chk_adj: &[Vec<u32>], candidates: impl Iterator<Item = usize>) -> usize {
    candidates
        .min_by_key(|&c| (chk_adj[c].len(), c))
        .expect("at least one candidate check")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_regular_code() {
        let l = DegreeDistribution::new(vec![(2, 1.0)]).unwrap();
        let h = peg_construct(8, 0.5, &l, 0).unwrap();
        assert_eq!((h.n_chk(), h.n_var()), (4, 8));
        assert!(h.variable_degrees().iter().all(|&d| d == 2));
        assert_eq!(h, peg_construct(8, 0.5, &l, 0).unwrap());
        assert_eq!(h.check_degrees(), vec![4; 4]);
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let l = DegreeDistribution::lambda2();
        let a = peg_construct(300, 0.7, &l, 5).unwrap();
        let b = peg_construct(300, 0.7, &l, 5).unwrap();
        let c = peg_construct(300, 0.7, &l, 6).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.seed(), Some(5));
        let mut da = a.variable_degrees();
        let mut dc = c.variable_degrees();
        da.sort_unstable();
        dc.sort_unstable();
        assert_eq!(da, dc);
    }

    #[test]
    fn bad_rates() {
        let l = DegreeDistribution::lambda2();
        assert!(peg_construct(100, 0.0, &l, 0).is_err());
        assert!(peg_construct(100, 1.0, &l, 0).is_err());
        assert!(peg_construct(100, 0.99, &l, 0).is_err());
    }
}
