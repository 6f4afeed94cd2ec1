//! Edge-perspective variable degree distributions and their conversion to
//! per-node degree assignments.

use crate::error::{Error, Result};

/// λ(x) = Σ λ_d x^{d−1}: `edge_fraction` of the edges attach to variable
/// nodes of degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    terms: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn new(mut terms: Vec<(usize, f64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Infeasible("empty degree distribution".into()));
        }
        terms.sort_by_key(|t| t.0);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Infeasible("repeated degree".into()));
        }
        if let Some(t) = terms.iter().find(|t| t.0 < 2) {
            return Err(Error::Infeasible(format!("degree {} below 2", t.0)));
        }
        if let Some(t) = terms.iter().find(|t| !(t.1 > 0.0 && t.1 <= 1.0)) {
            return Err(Error::Infeasible(format!("edge fraction {}", t.1)));
        }
        let total: f64 = terms.iter().map(|t| t.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Infeasible(format!("edge fractions sum to {total}")));
        }
        Ok(Self { terms })
    }

    /// From polynomial coefficients `(power, coefficient)`: the coefficient
    /// of x^k is the edge fraction of degree k + 1.
    pub fn from_polynomial(coeffs: &[(usize, f64)]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&(k, c)| (k + 1, c)).collect())
    }

    /// Parses polynomial text such as `0.1560x + 0.3482x^2 + 0.1594x^13`.
    pub fn parse_polynomial(text: &str) -> Result<Self> {
        let body: String = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .collect::<Vec<_>>()
            .join(" ");
        let mut coeffs = Vec::new();
        for raw in body.split('+') {
            let term: String = raw.chars().filter(|c| !c.is_whitespace() && *c != '*').collect();
            if term.is_empty() {
                continue;
            }
            let bad = || Error::Parse {
                line: 0,
                msg: format!("bad polynomial term '{term}'"),
            };
            let (coef, power) = match term.split_once('x') {
                None => (term.as_str(), 0),
                Some((c, rest)) => {
                    let power = match rest.strip_prefix('^') {
                        None if rest.is_empty() => 1,
                        Some(p) => p.parse().map_err(|_| bad())?,
                        None => return Err(bad()),
                    };
                    (c, power)
                }
            };
            let coef: f64 = if coef.is_empty() { 1.0 } else { coef.parse().map_err(|_| bad())? };
            coeffs.push((power, coef));
        }
        Self::from_polynomial(&coeffs)
    }

    /// Design for rate 0.6.
    pub fn lambda1() -> Self {
        Self::from_polynomial(&[(1, 0.1560), (2, 0.3482), (13, 0.1594), (14, 0.3364)])
            .expect("built-in polynomial")
    }

    /// Design for rate 0.7.
    pub fn lambda2() -> Self {
        Self::from_polynomial(&[(1, 0.1305), (2, 0.2892), (10, 0.1196), (12, 0.1837), (14, 0.2770)])
            .expect("built-in polynomial")
    }

    /// Design for rate 0.8.
    pub fn lambda3() -> Self {
        Self::from_polynomial(&[(1, 0.1209), (2, 0.2738), (5, 0.1151), (10, 0.2611), (14, 0.2291)])
            .expect("built-in polynomial")
    }

    /// `lambda1`, `lambda2` or `lambda3`.
    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "lambda1" => Some(Self::lambda1()),
            "lambda2" => Some(Self::lambda2()),
            "lambda3" => Some(Self::lambda3()),
            _ => None,
        }
    }

    pub fn terms(&self) -> &[(usize, f64)] {
        &self.terms
    }

    pub fn max_degree(&self) -> usize {
        self.terms.last().map(|t| t.0).unwrap_or(0)
    }

    /// Node-perspective fractions (λ_d/d) / Σ_i (λ_i/i), per degree.
    pub fn node_fractions(&self) -> Vec<(usize, f64)> {
        let norm: f64 = self.terms.iter().map(|&(d, l)| l / d as f64).sum();
        self.terms.iter().map(|&(d, l)| (d, l / d as f64 / norm)).collect()
    }
}

/// Per-node degree plan for a Tanner graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeAssignment {
    /// Degree of every variable node, ascending.
    pub var_degrees: Vec<usize>,
    /// Target degree of every check node: ⌈E/m⌉ for the first E mod m
    /// checks, ⌊E/m⌋ for the rest.
    pub check_degrees: Vec<usize>,
}

impl DegreeAssignment {
    pub fn edges(&self) -> usize {
        self.var_degrees.iter().sum()
    }
}

/// Rounds the node-perspective distribution to integer counts with the
/// largest-remainder method, so that each class is within one node of its
/// real-valued target and the counts add up to `n_var`.
pub fn node_degrees(lambda: &DegreeDistribution, n_var: usize, n_chk: usize) -> Result<DegreeAssignment> {
    let fractions = lambda.node_fractions();
    if n_var < fractions.len() {
        return Err(Error::Infeasible(format!(
            "{n_var} variables cannot realise {} degree classes",
            fractions.len()
        )));
    }
    if n_chk < lambda.max_degree() {
        return Err(Error::Infeasible(format!(
            "{n_chk} checks cannot host a variable of degree {}",
            lambda.max_degree()
        )));
    }
    let targets: Vec<f64> = fractions.iter().map(|&(_, f)| f * n_var as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let mut short = n_var - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..targets.len()).collect();
    // larger remainder first, then lower degree
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if short == 0 {
            break;
        }
        counts[i] += 1;
        short -= 1;
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Infeasible(format!(
            "degree class {} rounds to zero nodes at n = {n_var}",
            fractions[i].0
        )));
    }

    let var_degrees: Vec<usize> = fractions
        .iter()
        .zip(&counts)
        .flat_map(|(&(d, _), &c)| std::iter::repeat_n(d, c))
        .collect();
    let edges: usize = var_degrees.iter().sum();
    let (base, extra) = (edges / n_chk, edges % n_chk);
    let check_degrees = (0..n_chk).map(|j| base + usize::from(j < extra)).collect();
    Ok(DegreeAssignment {
        var_degrees,
        check_degrees,
    })
}
