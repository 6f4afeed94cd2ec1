use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Sparse parity-check matrix stored as the variable lists of its checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    n_var: usize,
    check_adj: Vec<Vec<usize>>,
    seed: Option<u64>,
}

impl ParityCheckMatrix {
    /// Builds from per-check variable lists; each list is sorted and must
    /// not repeat a variable.
    pub fn from_checks(n_var: usize, mut check_adj: Vec<Vec<usize>>) -> Result<Self> {
        for (j, row) in check_adj.iter_mut().enumerate() {
            row.sort_unstable();
            if row.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidDistribution(format!("duplicate edge in check {j}")));
            }
            if let Some(&v) = row.last() {
                if v >= n_var {
                    return Err(Error::LengthMismatch {
                        expected: n_var,
                        got: v + 1,
                    });
                }
            }
        }
        Ok(Self {
            n_var,
            check_adj,
            seed: None,
        })
    }

    pub(crate) fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn n_var(&self) -> usize {
        self.n_var
    }

    pub fn n_chk(&self) -> usize {
        self.check_adj.len()
    }

    /// Seed of the construction, when the matrix was built here.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// 1 − m/n.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.n_chk() as f64 / self.n_var as f64
    }

    pub fn check_adjacency(&self) -> &[Vec<usize>] {
        &self.check_adj
    }

    /// Per-variable sorted check lists.
    pub fn var_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_var];
        for (j, row) in self.check_adj.iter().enumerate() {
            for &v in row {
                adj[v].push(j);
            }
        }
        adj
    }

    pub fn variable_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_var];
        for row in &self.check_adj {
            for &v in row {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn check_degrees(&self) -> Vec<usize> {
        self.check_adj.iter().map(Vec::len).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.check_adj.iter().map(Vec::len).sum()
    }

    /// s_j = ⊕_{v ∈ N(j)} x_v.
    pub fn syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n_var {
            return Err(Error::LengthMismatch {
                expected: self.n_var,
                got: x.len(),
            });
        }
        Ok(self
            .check_adj
            .iter()
            .map(|row| row.iter().fold(0u8, |acc, &v| acc ^ (x[v] & 1)))
            .collect())
    }

    /// Serialises to the alist format (1-indexed, rows padded with 0).
    pub fn to_alist(&self) -> String {
        let vadj = self.var_adjacency();
        let max_col = vadj.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = self.check_adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_var, self.n_chk());
        let _ = writeln!(out, "{max_col} {max_row}");
        push_line(&mut out, vadj.iter().map(Vec::len));
        push_line(&mut out, self.check_adj.iter().map(Vec::len));
        for list in &vadj {
            push_padded(&mut out, list, max_col);
        }
        for list in &self.check_adj {
            push_padded(&mut out, list, max_row);
        }
        out
    }

    /// Parses alist text. Both the column and row sections are read and must
    /// describe the same graph.
    pub fn from_alist(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let mut next_nums = |want: Option<usize>| -> Result<(usize, Vec<usize>)> {
            let (line, l) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: "unexpected end of file".into(),
            })?;
            let nums = l
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse {
                    line,
                    msg: e.to_string(),
                })?;
            if let Some(w) = want {
                if nums.len() != w {
                    return Err(Error::Parse {
                        line,
                        msg: format!("expected {w} numbers, found {}", nums.len()),
                    });
                }
            }
            Ok((line, nums))
        };

        let (_, dims) = next_nums(Some(2))?;
        let (n_var, n_chk) = (dims[0], dims[1]);
        let (_, maxes) = next_nums(Some(2))?;
        let (_, col_deg) = next_nums(Some(n_var))?;
        let (_, row_deg) = next_nums(Some(n_chk))?;
        let mut cols = Vec::with_capacity(n_var);
        for &d in &col_deg {
            let (line, nums) = next_nums(None)?;
            cols.push(unpad(line, nums, d, maxes[0], n_chk)?);
        }
        let mut rows = Vec::with_capacity(n_chk);
        for &d in &row_deg {
            let (line, nums) = next_nums(None)?;
            rows.push(unpad(line, nums, d, maxes[1], n_var)?);
        }
        let h = Self::from_checks(n_var, rows)?;
        let mut vadj = h.var_adjacency();
        for (v, c) in cols.iter_mut().enumerate() {
            c.sort_unstable();
            vadj[v].sort_unstable();
            if *c != vadj[v] {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!("column {} disagrees with the row lists", v + 1),
                });
            }
        }
        Ok(h)
    }
}

fn push_line(out: &mut String, items: impl Iterator<Item = usize>) {
    let parts: Vec<String> = items.map(|v| v.to_string()).collect();
    out.push_str(&parts.join(" "));
    out.push('\n');
}

fn push_padded(out: &mut String, list: &[usize], width: usize) {
    push_line(
        out,
        list.iter()
            .map(|v| v + 1)
            .chain(std::iter::repeat_n(0, width - list.len())),
    );
}

fn unpad(line: usize, nums: Vec<usize>, degree: usize, width: usize, bound: usize) -> Result<Vec<usize>> {
    let err = |msg: String| Error::Parse { line, msg };
    if degree > width {
        return Err(err(format!("degree {degree} exceeds declared maximum {width}")));
    }
    if nums.len() != degree && nums.len() != width {
        return Err(err(format!("expected {degree} entries, found {}", nums.len())));
    }
    if nums[degree..].iter().any(|&v| v != 0) {
        return Err(err("non-zero padding".into()));
    }
    nums[..degree]
        .iter()
        .map(|&v| {
            if v == 0 || v > bound {
                Err(err(format!("index {v} out of range 1..={bound}")))
            } else {
                Ok(v - 1)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ParityCheckMatrix {
        ParityCheckMatrix::from_checks(5, vec![vec![0, 1, 3], vec![1, 2], vec![0, 4, 2]]).unwrap()
    }

    #[test]
    fn syndrome_reads_columns() {
        let h = small();
        assert_eq!(h.syndrome(&[0; 5]).unwrap(), vec![0, 0, 0]);
        for i in 0..5 {
            let mut e = vec![0u8; 5];
            e[i] = 1;
            let s = h.syndrome(&e).unwrap();
            let col: Vec<u8> = h.check_adjacency().iter().map(|r| u8::from(r.contains(&i))).collect();
            assert_eq!(s, col);
        }
        assert!(h.syndrome(&[0; 4]).is_err());
    }

    #[test]
    fn rejects_duplicates_and_range() {
        assert!(ParityCheckMatrix::from_checks(3, vec![vec![0, 0]]).is_err());
        assert!(ParityCheckMatrix::from_checks(3, vec![vec![0, 3]]).is_err());
    }

    #[test]
    fn alist_layout() {
        let text = small().to_alist();
        let expected = "5 3\n2 3\n2 2 2 1 1\n3 2 3\n1 3\n1 2\n2 3\n1 0\n3 0\n1 2 4\n2 3 0\n1 3 5\n";
        assert_eq!(text, expected);
        let back = ParityCheckMatrix::from_alist(&text).unwrap();
        assert_eq!(back, small());
        assert_eq!(back.to_alist(), text);
    }

    #[test]
    fn alist_errors() {
        assert!(ParityCheckMatrix::from_alist("").is_err());
        assert!(ParityCheckMatrix::from_alist("5 3\n2 3\n2 2 2 1\n").is_err());
        let mut bad = small().to_alist();
        bad = bad.replacen("1 2 4\n", "1 2 5\n", 1);
        assert!(ParityCheckMatrix::from_alist(&bad).is_err());
    }
}
