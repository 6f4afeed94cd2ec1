//! Sum-product syndrome decoding in the log-likelihood-ratio domain.
//!
//! Flooding schedule with the exact tanh check rule. A check whose syndrome
//! bit is 1 flips the sign of its outgoing messages. All messages are
//! clipped to ±[`LLR_CLIP`].

use super::rate::{RateAdaptedCode, Role};
use crate::error::{check_probability, Error, Result};

pub const LLR_CLIP: f64 = 30.0;

pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Estimate of every variable of the base code.
    pub x_hat: Vec<u8>,
    /// Whether `x_hat` reproduces the syndrome.
    pub converged: bool,
    /// Message-passing rounds performed; 0 when the channel hard decision
    /// already satisfies the syndrome.
    pub iterations: usize,
}

/// Reusable decoder with its message buffers. One decode at a time per
/// instance; separate instances may run concurrently.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    chk_ptr: Vec<usize>,
    edge_var: Vec<u32>,
    var_ptr: Vec<usize>,
    var_edges: Vec<u32>,
    roles: Vec<Role>,
    payload: Vec<usize>,
    channel: Vec<f64>,
    /// tanh(m/2) of each variable-to-check message, indexed by edge
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    scratch: Vec<f64>,
    x_hat: Vec<u8>,
}

impl BpDecoder {
    pub fn new(code: &RateAdaptedCode) -> Self {
        let h = code.base();
        let mut chk_ptr = Vec::with_capacity(h.n_chk() + 1);
        let mut edge_var = Vec::with_capacity(h.edge_count());
        chk_ptr.push(0);
        for row in h.check_adjacency() {
            edge_var.extend(row.iter().map(|&v| v as u32));
            chk_ptr.push(edge_var.len());
        }
        let mut deg = vec![0usize; h.n_var()];
        for &v in &edge_var {
            deg[v as usize] += 1;
        }
        let mut var_ptr = vec![0usize; h.n_var() + 1];
        for v in 0..h.n_var() {
            var_ptr[v + 1] = var_ptr[v] + deg[v];
        }
        let mut fill = var_ptr.clone();
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        let max_chk = h.check_degrees().into_iter().max().unwrap_or(0);
        Self {
            chk_ptr,
            edge_var,
            var_ptr,
            var_edges,
            roles: code.roles().to_vec(),
            payload: code.payload_positions().to_vec(),
            channel: vec![0.0; h.n_var()],
            v2c: vec![0.0; h.edge_count()],
            c2v: vec![0.0; h.edge_count()],
            scratch: vec![0.0; max_chk + 1],
            x_hat: vec![0; h.n_var()],
        }
    }

    fn n_chk(&self) -> usize {
        self.chk_ptr.len() - 1
    }

    /// Decodes and returns a fresh outcome.
    pub fn decode(&mut self, y: &[u8], s: &[u8], q: f64, max_iter: usize) -> Result<DecodeOutcome> {
        let (converged, iterations) = self.run(y, s, q, max_iter)?;
        Ok(DecodeOutcome {
            x_hat: self.x_hat.clone(),
            converged,
            iterations,
        })
    }

    /// The estimate of the last decode.
    pub fn estimate(&self) -> &[u8] {
        &self.x_hat
    }

    /// Decodes into the internal estimate buffer; returns (converged, iterations).
    ///
    /// `y` holds Bob's bits at the payload positions, in ascending order.
    /// Shortened variables are taken to be zero.
    pub fn run(&mut self, y: &[u8], s: &[u8], q: f64, max_iter: usize) -> Result<(bool, usize)> {
        check_probability("q", q)?;
        if y.len() != self.payload.len() {
            return Err(Error::LengthMismatch {
                expected: self.payload.len(),
                got: y.len(),
            });
        }
        if s.len() != self.n_chk() {
            return Err(Error::LengthMismatch {
                expected: self.n_chk(),
                got: s.len(),
            });
        }

        let prior = ((1.0 - q) / q).ln().clamp(-LLR_CLIP, LLR_CLIP);
        for (v, role) in self.roles.iter().enumerate() {
            self.channel[v] = match role {
                Role::Shortened => LLR_CLIP,
                Role::Punctured | Role::Payload => 0.0,
            };
        }
        for (&v, &bit) in self.payload.iter().zip(y) {
            self.channel[v] = if bit & 1 == 0 { prior } else { -prior };
        }
        for (v, x) in self.x_hat.iter_mut().enumerate() {
            *x = u8::from(self.channel[v] < 0.0);
        }
        if self.syndrome_matches(s) {
            return Ok((true, 0));
        }
        for (e, &v) in self.edge_var.iter().enumerate() {
            self.v2c[e] = half_tanh(self.channel[v as usize]);
        }

        for iter in 1..=max_iter {
            self.check_update(s);
            self.variable_update();
            if self.syndrome_matches(s) {
                return Ok((true, iter));
            }
        }
        Ok((false, max_iter))
    }

    fn check_update(&mut self, s: &[u8]) {
        for j in 0..self.n_chk() {
            let (lo, hi) = (self.chk_ptr[j], self.chk_ptr[j + 1]);
            let t = &self.v2c[lo..hi];
            // scratch[i] = product of t[..i]
            let pre = &mut self.scratch;
            pre[0] = 1.0;
            for (i, &ti) in t.iter().enumerate() {
                pre[i + 1] = pre[i] * ti;
            }
            let sign = if s[j] & 1 == 1 { -1.0 } else { 1.0 };
            let mut suffix = 1.0;
            for i in (0..t.len()).rev() {
                let p = (pre[i] * suffix).clamp(-1.0, 1.0);
                let m = ((1.0 + p) / (1.0 - p)).ln();
                self.c2v[lo + i] = (sign * m).clamp(-LLR_CLIP, LLR_CLIP);
                suffix *= t[i];
            }
        }
    }

    fn variable_update(&mut self) {
        let pinned = half_tanh(LLR_CLIP);
        for v in 0..self.channel.len() {
            let edges = &self.var_edges[self.var_ptr[v]..self.var_ptr[v + 1]];
            if self.roles[v] == Role::Shortened {
                self.x_hat[v] = 0;
                for &e in edges {
                    self.v2c[e as usize] = pinned;
                }
                continue;
            }
            let total = self.channel[v] + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
            self.x_hat[v] = u8::from(total < 0.0);
            for &e in edges {
                let m = (total - self.c2v[e as usize]).clamp(-LLR_CLIP, LLR_CLIP);
                self.v2c[e as usize] = half_tanh(m);
            }
        }
    }

    fn syndrome_matches(&self, s: &[u8]) -> bool {
        (0..self.n_chk()).all(|j| {
            let parity = self.edge_var[self.chk_ptr[j]..self.chk_ptr[j + 1]]
                .iter()
                .fold(0u8, |acc, &v| acc ^ self.x_hat[v as usize]);
            parity == s[j] & 1
        })
    }
}


/// tanh(m/2) through one exp, evaluated on |m| so both signs are equally
/// accurate; noticeably cheaper than `tanh` in the inner loop.
#[inline]
fn half_tanh(m: f64) -> f64 {
    let t = 1.0 - 2.0 / (m.abs().exp() + 1.0);
    t.copysign(m)
}

/// One-shot convenience wrapper around [`BpDecoder`].
pub fn bp_syndrome_decode(
    code: &RateAdaptedCode,
    y: &[u8],
    s: &[u8],
    q: f64,
    max_iter: usize,
) -> Result<DecodeOutcome> {
    BpDecoder::new(code).decode(y, s, q, max_iter)
}
