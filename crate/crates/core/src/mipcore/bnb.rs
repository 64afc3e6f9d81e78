//! Exact depth-first branch-and-bound for pure integer programs.
//!
//! Nodes are processed with activity-based bound propagation over every
//! linear row, including an objective cutoff row that tightens with each
//! improving solution. Rows of the form `sum a_j x_j - alpha t <= b` whose
//! slack variable `t` is penalized in the objective, combined with disjoint
//! `sum x = 1` choice rows, give an additional convex overflow bound that is
//! much stronger than the plain activity bound on packing-type models.
//!
//! After root propagation the free variables are split into independent
//! components which are solved separately (optionally on several threads)
//! and stitched back together. With one thread the node order is fully
//! deterministic.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use log::debug;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Assignment, Model, Sense, SolveResult, SolveStats, SolveStatus, VarKind};

const TOL: f64 = 1e-6;
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Node budget for each independent component.
    pub max_nodes: u64,
    pub max_seconds: f64,
    pub threads: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits { max_nodes: 20_000_000, max_seconds: 600.0, threads: 1 }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("variable {0:?} is continuous; the exact solver handles integer models only")]
    Continuous(String),
    #[error("variable {0:?} has an infinite bound")]
    Unbounded(String),
}

/// Lower and upper bound of a variable in a child node.
type Bounds = (i64, i64);

struct Row {
    terms: Vec<(u32, f64)>,
    lo: f64,
    hi: f64,
}

/// A compiled pure-integer problem. The objective is stored both as a
/// coefficient vector and as the last row, whose upper bound is the cutoff.
struct Problem {
    n: usize,
    lb0: Vec<i64>,
    ub0: Vec<i64>,
    obj: Vec<f64>,
    row_start: Vec<usize>,
    row_var: Vec<u32>,
    row_coef: Vec<f64>,
    row_lo: Vec<f64>,
    row_hi: Vec<f64>,
    row_span: Vec<f64>,
    col_start: Vec<usize>,
    col_row: Vec<u32>,
    col_coef: Vec<f64>,
    obj_row: usize,
    order: Vec<u32>,
    pos: Vec<u32>,
    priority: Vec<i32>,
    step: f64,
    soft: Vec<SoftRow>,
    soft_of: Vec<Vec<(u32, f64)>>,
    choices: Vec<Vec<u32>>,
    choice_of: Vec<Option<u32>>,
}

/// `sum a_j x_j - alpha * t <= b` with `t` penalized by `cost`.
struct SoftRow {
    row: u32,
    t: u32,
    alpha: f64,
    cost: f64,
    b: f64,
    t_lb0: f64,
}

impl Problem {
    fn build(
        lb0: Vec<i64>,
        ub0: Vec<i64>,
        obj: Vec<f64>,
        priority: &[i32],
        binary: &[bool],
        mut rows: Vec<Row>,
    ) -> Problem {
        let n = lb0.len();
        rows.push(Row {
            terms: obj.iter().enumerate().filter(|(_, &c)| c != 0.0).map(|(j, &c)| (j as u32, c)).collect(),
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        });
        let obj_row = rows.len() - 1;

        let mut row_start = Vec::with_capacity(rows.len() + 1);
        let mut row_var = Vec::new();
        let mut row_coef = Vec::new();
        let mut row_lo = Vec::with_capacity(rows.len());
        let mut row_hi = Vec::with_capacity(rows.len());
        let mut row_span = Vec::with_capacity(rows.len());
        let mut col_count = vec![0usize; n];
        row_start.push(0);
        for r in &rows {
            let mut span: f64 = 0.0;
            for &(j, a) in &r.terms {
                row_var.push(j);
                row_coef.push(a);
                col_count[j as usize] += 1;
                span = span.max(a.abs() * (ub0[j as usize] - lb0[j as usize]) as f64);
            }
            row_start.push(row_var.len());
            row_lo.push(r.lo);
            row_hi.push(r.hi);
            row_span.push(span);
        }
        let mut col_start = vec![0usize; n + 1];
        for j in 0..n {
            col_start[j + 1] = col_start[j] + col_count[j];
        }
        let mut fill = col_start.clone();
        let mut col_row = vec![0u32; row_var.len()];
        let mut col_coef = vec![0f64; row_var.len()];
        for r in 0..rows.len() {
            for k in row_start[r]..row_start[r + 1] {
                let j = row_var[k] as usize;
                col_row[fill[j]] = r as u32;
                col_coef[fill[j]] = row_coef[k];
                fill[j] += 1;
            }
        }

        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_by_key(|&j| (std::cmp::Reverse(priority[j as usize]), j));
        let mut pos = vec![0u32; n];
        for (p, &j) in order.iter().enumerate() {
            pos[j as usize] = p as u32;
        }
        let step = if obj.iter().all(|c| (c - c.round()).abs() <= EPS) { 1.0 } else { 0.0 };

        let mut p = Problem {
            n,
            lb0,
            ub0,
            obj,
            row_start,
            row_var,
            row_coef,
            row_lo,
            row_hi,
            row_span,
            col_start,
            col_row,
            col_coef,
            obj_row,
            order,
            pos,
            priority: priority.to_vec(),
            step,
            soft: Vec::new(),
            soft_of: vec![Vec::new(); n],
            choices: Vec::new(),
            choice_of: vec![None; n],
        };
        p.detect_structure(binary);
        p
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_start[r]..self.row_start[r + 1]).map(move |k| (self.row_var[k] as usize, self.row_coef[k]))
    }

    fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.col_start[j]..self.col_start[j + 1]).map(move |k| (self.col_row[k] as usize, self.col_coef[k]))
    }

    /// Finds overflow rows and disjoint choice rows for the overflow bound.
    fn detect_structure(&mut self, binary: &[bool]) {
        let mut t_used = vec![false; self.n];
        for r in 0..self.obj_row {
            let (lo, hi) = (self.row_lo[r], self.row_hi[r]);
            // Normalize to `<=`; equality rows are never overflow rows.
            let sign = match (lo.is_finite(), hi.is_finite()) {
                (false, true) => 1.0,
                (true, false) => -1.0,
                _ => continue,
            };
            let b = if sign > 0.0 { hi } else { -lo };
            let mut t = None;
            let mut ok = true;
            for (j, a) in self.row(r) {
                let a = a * sign;
                if a < 0.0 && !binary[j] && self.obj[j] > 0.0 && t.is_none() && !t_used[j] {
                    t = Some((j, -a));
                } else if a < 0.0 || !binary[j] {
                    ok = false;
                    break;
                }
            }
            let (Some((tj, alpha)), true) = (t, ok) else { continue };
            t_used[tj] = true;
            let k = self.soft.len() as u32;
            for (j, a) in self.row(r).collect::<Vec<_>>() {
                if j != tj {
                    self.soft_of[j].push((k, a * sign));
                }
            }
            self.soft.push(SoftRow {
                row: r as u32,
                t: tj as u32,
                alpha,
                cost: self.obj[tj],
                b,
                t_lb0: self.lb0[tj] as f64,
            });
        }
        if self.soft.is_empty() {
            self.soft_of = Vec::new();
            return;
        }
        for r in 0..self.obj_row {
            if self.row_lo[r] != 1.0 || self.row_hi[r] != 1.0 {
                continue;
            }
            let vars: Vec<u32> = self.row(r).map(|(j, _)| j as u32).collect();
            let unit = self.row(r).all(|(j, a)| a == 1.0 && binary[j]);
            if !unit || vars.iter().any(|&j| self.choice_of[j as usize].is_some()) {
                continue;
            }
            let c = self.choices.len() as u32;
            for &j in &vars {
                self.choice_of[j as usize] = Some(c);
            }
            self.choices.push(vars);
        }
    }
}

struct Pending {
    mark: usize,
    var: u32,
    lb: i64,
    ub: i64,
    scan: usize,
    bound: f64,
}

struct Outcome {
    status: SolveStatus,
    solution: Option<(f64, Vec<i64>)>,
    bound: f64,
    nodes: u64,
    incumbents: Vec<f64>,
}

struct Search<'a> {
    p: &'a Problem,
    lb: Vec<i64>,
    ub: Vec<i64>,
    minact: Vec<f64>,
    maxact: Vec<f64>,
    trail: Vec<(u32, i64, i64)>,
    queue: Vec<u32>,
    queued: Vec<bool>,
    cutoff: f64,
    incumbent: Option<(f64, Vec<i64>)>,
    incumbents: Vec<f64>,
    nodes: u64,
    delta: Vec<f64>,
    order: Vec<u32>,
    pos: Vec<u32>,
}

impl<'a> Search<'a> {
    fn new(p: &'a Problem) -> Search<'a> {
        let nrows = p.row_lo.len();
        let mut s = Search {
            p,
            lb: p.lb0.clone(),
            ub: p.ub0.clone(),
            minact: vec![0.0; nrows],
            maxact: vec![0.0; nrows],
            trail: Vec::new(),
            queue: Vec::new(),
            queued: vec![false; nrows],
            cutoff: f64::INFINITY,
            incumbent: None,
            incumbents: Vec::new(),
            nodes: 0,
            delta: vec![0.0; if p.soft.is_empty() { 0 } else { p.n }],
            order: p.order.clone(),
            pos: p.pos.clone(),
        };
        for r in 0..nrows {
            let (mut lo, mut hi) = (0.0, 0.0);
            for (j, a) in p.row(r) {
                if a > 0.0 {
                    lo += a * s.lb[j] as f64;
                    hi += a * s.ub[j] as f64;
                } else {
                    lo += a * s.ub[j] as f64;
                    hi += a * s.lb[j] as f64;
                }
            }
            s.minact[r] = lo;
            s.maxact[r] = hi;
        }
        s
    }

    fn hi(&self, r: usize) -> f64 {
        if r == self.p.obj_row {
            self.cutoff
        } else {
            self.p.row_hi[r]
        }
    }

    fn enqueue(&mut self, r: usize) {
        if !self.queued[r] {
            self.queued[r] = true;
            self.queue.push(r as u32);
        }
    }

    fn set_bounds(&mut self, j: usize, nlb: i64, nub: i64) {
        let (olb, oub) = (self.lb[j], self.ub[j]);
        if olb == nlb && oub == nub {
            return;
        }
        self.trail.push((j as u32, olb, oub));
        self.lb[j] = nlb;
        self.ub[j] = nub;
        let (dl, du) = ((nlb - olb) as f64, (nub - oub) as f64);
        for k in self.p.col_start[j]..self.p.col_start[j + 1] {
            let r = self.p.col_row[k] as usize;
            let a = self.p.col_coef[k];
            if a > 0.0 {
                self.minact[r] += a * dl;
                self.maxact[r] += a * du;
            } else {
                self.minact[r] += a * du;
                self.maxact[r] += a * dl;
            }
            self.enqueue(r);
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (j, olb, oub) = self.trail.pop().unwrap();
            let j = j as usize;
            let (dl, du) = ((olb - self.lb[j]) as f64, (oub - self.ub[j]) as f64);
            self.lb[j] = olb;
            self.ub[j] = oub;
            for (r, a) in self.p.col(j) {
                if a > 0.0 {
                    self.minact[r] += a * dl;
                    self.maxact[r] += a * du;
                } else {
                    self.minact[r] += a * du;
                    self.maxact[r] += a * dl;
                }
            }
        }
    }

    fn clear_queue(&mut self) {
        for r in self.queue.drain(..) {
            self.queued[r as usize] = false;
        }
    }

    /// Propagates queued rows to a fixpoint. Returns false on infeasibility.
    fn propagate(&mut self) -> bool {
        while let Some(r) = self.queue.pop() {
            let r = r as usize;
            self.queued[r] = false;
            let hi = self.hi(r);
            let lo = self.p.row_lo[r];
            if self.minact[r] > hi + TOL || self.maxact[r] < lo - TOL {
                self.clear_queue();
                return false;
            }
            if hi.is_finite() {
                let slack = hi - self.minact[r];
                if slack + EPS < self.p.row_span[r] {
                    for k in self.p.row_start[r]..self.p.row_start[r + 1] {
                        let j = self.p.row_var[k] as usize;
                        let a = self.p.row_coef[k];
                        let (l, u) = (self.lb[j], self.ub[j]);
                        if l == u {
                            continue;
                        }
                        if a > 0.0 {
                            let nub = l + ((slack + TOL) / a).floor() as i64;
                            if nub < u {
                                self.set_bounds(j, l, nub);
                            }
                        } else {
                            let nlb = u - ((slack + TOL) / -a).floor() as i64;
                            if nlb > l {
                                self.set_bounds(j, nlb, u);
                            }
                        }
                    }
                }
            }
            if lo.is_finite() {
                let slack = self.maxact[r] - lo;
                if slack + EPS < self.p.row_span[r] {
                    for k in self.p.row_start[r]..self.p.row_start[r + 1] {
                        let j = self.p.row_var[k] as usize;
                        let a = self.p.row_coef[k];
                        let (l, u) = (self.lb[j], self.ub[j]);
                        if l == u {
                            continue;
                        }
                        if a > 0.0 {
                            let nlb = u - ((slack + TOL) / a).floor() as i64;
                            if nlb > l {
                                self.set_bounds(j, nlb, u);
                            }
                        } else {
                            let nub = l + ((slack + TOL) / -a).floor() as i64;
                            if nub < u {
                                self.set_bounds(j, l, nub);
                            }
                        }
                    }
                }
            }
            // Bounds may have crossed through the row we just processed.
            if self.minact[r] > self.hi(r) + TOL || self.maxact[r] < lo - TOL {
                self.clear_queue();
                return false;
            }
        }
        true
    }

    /// Overflow of soft row `k` at load `l`, before weighting.
    fn overflow(sr: &SoftRow, l: f64) -> f64 {
        sr.t_lb0.max((l - sr.b) / sr.alpha)
    }

    /// Lower bound on the objective in the current node. Fills `delta` with
    /// per-variable increments when the overflow bound is active.
    fn bound(&mut self) -> f64 {
        let base = self.minact[self.p.obj_row];
        if self.p.soft.is_empty() {
            return base;
        }
        let p = self.p;
        let mut t_part = 0.0;
        let mut f_part = 0.0;
        let mut loads = Vec::with_capacity(p.soft.len());
        for sr in &p.soft {
            let t = sr.t as usize;
            t_part += sr.cost * self.lb[t] as f64;
            let load = self.minact[sr.row as usize] + sr.alpha * self.ub[t] as f64;
            f_part += sr.cost * Self::overflow(sr, load);
            loads.push(load);
        }
        let mut incr = 0.0;
        for vars in &p.choices {
            if vars.iter().any(|&j| self.lb[j as usize] == 1) {
                continue;
            }
            let mut best = f64::INFINITY;
            for &j in vars {
                let j = j as usize;
                if self.ub[j] == 0 {
                    continue;
                }
                let mut d = 0.0;
                for &(k, a) in &p.soft_of[j] {
                    let sr = &p.soft[k as usize];
                    let l = loads[k as usize];
                    d += sr.cost * (Self::overflow(sr, l + a) - Self::overflow(sr, l));
                }
                self.delta[j] = d;
                best = best.min(d);
            }
            if best.is_finite() {
                incr += best;
            }
        }
        base - t_part + t_part.max(f_part + incr)
    }

    /// Fixes choice variables whose increment alone would exceed the cutoff.
    /// Requires `bound()` to have just filled `delta`.
    fn fix_by_increment(&mut self, bound: f64) -> bool {
        let p = self.p;
        let mut changed = false;
        for vars in &p.choices {
            if vars.iter().any(|&j| self.lb[j as usize] == 1) {
                continue;
            }
            let free = || vars.iter().map(|&j| j as usize).filter(|&j| self.ub[j] == 1);
            let best = free().map(|j| self.delta[j]).fold(f64::INFINITY, f64::min);
            if !best.is_finite() {
                continue;
            }
            let kill: Vec<usize> = free().filter(|&j| bound - best + self.delta[j] > self.cutoff + TOL).collect();
            for j in kill {
                self.set_bounds(j, 0, 0);
                changed = true;
            }
        }
        changed
    }

    /// Picks the branching position, variable and the order of its children.
    /// Inside a choice row the alternative with the smallest overflow
    /// increment is taken first.
    fn branch(&self, scan: usize) -> Option<(usize, u32, [Bounds; 2])> {
        let p = self.p;
        let pos = (scan..p.n).find(|&k| {
            let j = self.order[k] as usize;
            self.lb[j] < self.ub[j]
        })?;
        let mut j = self.order[pos] as usize;
        if let (Some(c), true) = (p.choice_of[j], p.obj[j] == 0.0) {
            let mut best = (f64::INFINITY, u32::MAX);
            for &v in &p.choices[c as usize] {
                let v = v as usize;
                if self.lb[v] < self.ub[v] {
                    let key = (self.delta.get(v).copied().unwrap_or(0.0), self.pos[v]);
                    if key.0 < best.0 - EPS || ((key.0 - best.0).abs() <= EPS && key.1 < best.1) {
                        best = key;
                    }
                }
            }
            j = self.order[best.1 as usize] as usize;
        }
        let (l, u) = (self.lb[j], self.ub[j]);
        let low_first = p.obj[j] > 0.0 || (p.obj[j] == 0.0 && u - l > 1);
        let children = if low_first { [(l, l), (l + 1, u)] } else { [(u, u), (l, u - 1)] };
        Some((pos, j as u32, children))
    }

    fn prune_level(&self) -> f64 {
        self.cutoff + TOL
    }

    fn record_incumbent(&mut self) {
        let value: f64 = (0..self.p.n).map(|j| self.p.obj[j] * self.lb[j] as f64).sum();
        debug!("incumbent {value} after {} nodes", self.nodes);
        self.incumbents.push(value);
        let sol = self.lb.clone();
        self.adopt(Some((value, sol)));
    }

    /// Node lower bound, tightened by increment fixing until stable.
    fn node_bound(&mut self) -> f64 {
        let mut b = self.bound();
        if self.p.soft.is_empty() {
            return b;
        }
        for _ in 0..8 {
            if b > self.prune_level() || !self.fix_by_increment(b) {
                break;
            }
            self.enqueue(self.p.obj_row);
            if !self.propagate() {
                return f64::INFINITY;
            }
            b = self.bound();
        }
        b
    }

    /// Shuffles the branching order within each priority class.
    fn shuffle_order(&mut self, seed: u64) {
        let priority = &self.p.priority;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut start = 0;
        while start < self.order.len() {
            let class = priority[self.order[start] as usize];
            let end = (start..self.order.len())
                .find(|&k| priority[self.order[k] as usize] != class)
                .unwrap_or(self.order.len());
            self.order[start..end].shuffle(&mut rng);
            start = end;
        }
        for (k, &j) in self.order.iter().enumerate() {
            self.pos[j as usize] = k as u32;
        }
    }

    /// Starts from a known solution so only strictly better ones are sought.
    fn adopt(&mut self, known: Option<(f64, Vec<i64>)>) {
        if let Some((value, sol)) = known {
            self.incumbent = Some((value, sol));
            self.cutoff = if self.p.step > 0.0 {
                value - self.p.step + TOL
            } else {
                // Pruning adds TOL back, so demand a real improvement on top.
                value - TOL - TOL * value.abs().max(1.0)
            };
        }
    }

    fn run(mut self, max_nodes: u64, deadline: Instant) -> Outcome {
        for r in 0..self.p.row_lo.len() {
            self.enqueue(r);
        }
        let mut stack: Vec<Pending> = Vec::new();
        let mut live = self.propagate();
        let mut scan = 0usize;
        let mut hit_limit = false;
        loop {
            if live {
                let b = self.node_bound();
                if b <= self.prune_level() {
                    match self.branch(scan) {
                        None => self.record_incumbent(),
                        Some((pos, var, children)) => {
                            let mark = self.trail.len();
                            for &(lb, ub) in children.iter().rev() {
                                stack.push(Pending { mark, var, lb, ub, scan: pos, bound: b });
                            }
                        }
                    }
                }
            }
            live = false;
            while let Some(node) = stack.pop() {
                if node.bound > self.prune_level() {
                    continue;
                }
                if self.nodes >= max_nodes || (self.nodes.is_multiple_of(256) && Instant::now() >= deadline) {
                    stack.push(node);
                    hit_limit = true;
                    break;
                }
                self.nodes += 1;
                self.undo_to(node.mark);
                let j = node.var as usize;
                let (nl, nu) = (self.lb[j].max(node.lb), self.ub[j].min(node.ub));
                if nl > nu {
                    continue;
                }
                self.set_bounds(j, nl, nu);
                self.enqueue(self.p.obj_row);
                if self.propagate() {
                    scan = node.scan;
                    live = true;
                    break;
                }
            }
            if !live {
                break;
            }
        }

        let incumbent_value = self.incumbent.as_ref().map(|s| s.0);
        let (status, bound) = if hit_limit {
            let open =
                stack.iter().filter(|n| n.bound <= self.prune_level()).map(|n| n.bound).fold(f64::INFINITY, f64::min);
            (SolveStatus::Limit, open.min(incumbent_value.unwrap_or(f64::INFINITY)))
        } else if let Some(v) = incumbent_value {
            (SolveStatus::Optimal, v)
        } else {
            (SolveStatus::Infeasible, f64::INFINITY)
        };
        Outcome { status, solution: self.incumbent, bound, nodes: self.nodes, incumbents: self.incumbents }
    }
}

struct Compiled {
    lb: Vec<i64>,
    ub: Vec<i64>,
    obj: Vec<f64>,
    priority: Vec<i32>,
    binary: Vec<bool>,
    rows: Vec<Row>,
}

fn compile(model: &Model) -> Result<Option<Compiled>, SolveError> {
    let n = model.num_vars();
    let mut c = Compiled {
        lb: Vec::with_capacity(n),
        ub: Vec::with_capacity(n),
        obj: model.objective_dense(),
        priority: Vec::with_capacity(n),
        binary: Vec::with_capacity(n),
        rows: Vec::with_capacity(model.num_constraints()),
    };
    let mut empty_domain = false;
    for v in model.vars() {
        if v.kind == VarKind::Continuous {
            return Err(SolveError::Continuous(v.name.clone()));
        }
        if !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(SolveError::Unbounded(v.name.clone()));
        }
        let l = (v.lower - EPS).ceil() as i64;
        let u = (v.upper + EPS).floor() as i64;
        empty_domain |= l > u;
        c.lb.push(l);
        c.ub.push(u);
        c.priority.push(v.priority);
        c.binary.push(l >= 0 && u <= 1);
    }
    if empty_domain {
        return Ok(None);
    }
    for con in model.constraints() {
        let (lo, hi) = match con.sense {
            Sense::Le => (f64::NEG_INFINITY, con.rhs),
            Sense::Ge => (con.rhs, f64::INFINITY),
            Sense::Eq => (con.rhs, con.rhs),
        };
        let terms = con.terms.iter().filter(|t| t.0 != 0.0).map(|&(a, v)| (v.0 as u32, a)).collect();
        c.rows.push(Row { terms, lo, hi });
    }
    Ok(Some(c))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// First budget of the restart phase, doubled on each restart.
const RESTART_NODES: u64 = 1_000;
const RESTARTS: u64 = 10;

/// Solves one component: a few short searches with shuffled branching
/// orders hunt for good solutions, then a complete search in the natural
/// order proves optimality below the best one found. A short search that
/// finishes is already a proof, since shuffling only reorders the tree.
fn solve_component(p: &Problem, max_nodes: u64, deadline: Instant) -> Outcome {
    let mut best: Option<(f64, Vec<i64>)> = None;
    let mut incumbents = Vec::new();
    let mut used = 0;
    let mut budget = RESTART_NODES;
    for k in 0..RESTARTS {
        if used + budget > max_nodes / 2 {
            break;
        }
        let mut s = Search::new(p);
        if k > 0 {
            s.shuffle_order(k);
        }
        s.adopt(best.clone());
        let mut out = s.run(budget, deadline);
        used += out.nodes;
        incumbents.append(&mut out.incumbents);
        if out.status != SolveStatus::Limit || Instant::now() >= deadline {
            out.nodes = used;
            out.incumbents = incumbents;
            return out;
        }
        best = out.solution;
        budget *= 2;
    }
    let mut s = Search::new(p);
    s.adopt(best);
    let mut out = s.run(max_nodes - used, deadline);
    out.nodes += used;
    incumbents.append(&mut out.incumbents);
    out.incumbents = incumbents;
    out
}

/// One independent block of the root-propagated problem.
struct Component {
    vars: Vec<usize>,
    problem: Problem,
}

fn split_components(c: &Compiled, lb: &[i64], ub: &[i64]) -> Vec<Component> {
    let n = lb.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for row in &c.rows {
        let mut first = None;
        for &(j, _) in &row.terms {
            let j = j as usize;
            if lb[j] == ub[j] {
                continue;
            }
            match first {
                None => first = Some(j),
                Some(f) => {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut comp_of_root = vec![usize::MAX; n];
    let mut local = vec![usize::MAX; n];
    let mut members: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        if lb[j] == ub[j] {
            continue;
        }
        let r = find(&mut parent, j);
        if comp_of_root[r] == usize::MAX {
            comp_of_root[r] = members.len();
            members.push(Vec::new());
        }
        let k = comp_of_root[r];
        local[j] = members[k].len();
        members[k].push(j);
    }
    let mut comp_rows: Vec<Vec<Row>> = (0..members.len()).map(|_| Vec::new()).collect();
    for row in &c.rows {
        let mut shift = 0.0;
        let mut terms = Vec::new();
        let mut comp = None;
        for &(j, a) in &row.terms {
            let ju = j as usize;
            if lb[ju] == ub[ju] {
                shift += a * lb[ju] as f64;
            } else {
                comp.get_or_insert(comp_of_root[find(&mut parent, ju)]);
                terms.push((local[ju] as u32, a));
            }
        }
        if let Some(k) = comp {
            comp_rows[k].push(Row { terms, lo: row.lo - shift, hi: row.hi - shift });
        }
    }
    members
        .into_iter()
        .zip(comp_rows)
        .map(|(vars, rows)| {
            let problem = Problem::build(
                vars.iter().map(|&j| lb[j]).collect(),
                vars.iter().map(|&j| ub[j]).collect(),
                vars.iter().map(|&j| c.obj[j]).collect(),
                &vars.iter().map(|&j| c.priority[j]).collect::<Vec<_>>(),
                &vars.iter().map(|&j| c.binary[j]).collect::<Vec<_>>(),
                rows,
            );
            Component { vars, problem }
        })
        .collect()
}

fn infeasible(stats: SolveStats) -> SolveResult {
    SolveResult { status: SolveStatus::Infeasible, objective: None, assignment: None, proof_gap: f64::INFINITY, stats }
}

/// Solves a pure-integer model with finite bounds to proven optimality,
/// unless a limit stops the search first.
pub fn solve_exact(model: &Model, limits: &Limits) -> Result<SolveResult, SolveError> {
    let deadline = Instant::now() + Duration::from_secs_f64(limits.max_seconds.clamp(0.0, 1e9));
    let Some(compiled) = compile(model)? else {
        return Ok(infeasible(SolveStats::default()));
    };
    let c = compiled;

    // Root propagation on the whole model.
    let whole = Problem::build(
        c.lb.clone(),
        c.ub.clone(),
        c.obj.clone(),
        &c.priority,
        &c.binary,
        c.rows.iter().map(|r| Row { terms: r.terms.clone(), lo: r.lo, hi: r.hi }).collect(),
    );
    let mut root = Search::new(&whole);
    for r in 0..whole.row_lo.len() {
        root.enqueue(r);
    }
    if !root.propagate() {
        return Ok(infeasible(SolveStats::default()));
    }
    let (lb, ub) = (root.lb, root.ub);

    let comps = split_components(&c, &lb, &ub);
    debug!("{} components after root propagation", comps.len());
    let outcomes: Vec<Outcome> = if limits.threads <= 1 || comps.len() <= 1 {
        comps.iter().map(|k| solve_component(&k.problem, limits.max_nodes, deadline)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..comps.len()).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..limits.threads.min(comps.len()) {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(k) = comps.get(i) else { break };
                    let out = solve_component(&k.problem, limits.max_nodes, deadline);
                    results.lock().unwrap()[i] = Some(out);
                });
            }
        });
        results.into_inner().unwrap().into_iter().map(|o| o.expect("component solved")).collect()
    };

    let mut stats =
        SolveStats { nodes: outcomes.iter().map(|o| o.nodes).sum(), incumbents: Vec::new(), components: comps.len() };
    let fixed_value: f64 = (0..lb.len()).filter(|&j| lb[j] == ub[j]).map(|j| c.obj[j] * lb[j] as f64).sum();
    if outcomes.iter().any(|o| o.status == SolveStatus::Infeasible) {
        return Ok(infeasible(stats));
    }
    let limited = outcomes.iter().any(|o| o.status == SolveStatus::Limit);
    let bound = fixed_value + outcomes.iter().map(|o| o.bound).sum::<f64>();
    if outcomes.iter().any(|o| o.solution.is_none()) {
        return Ok(SolveResult {
            status: SolveStatus::Limit,
            objective: None,
            assignment: None,
            proof_gap: f64::INFINITY,
            stats,
        });
    }

    let mut values: Vec<f64> = lb.iter().map(|&v| v as f64).collect();
    let mut objective = fixed_value;
    for (k, o) in comps.iter().zip(&outcomes) {
        let (v, sol) = o.solution.as_ref().unwrap();
        objective += v;
        for (&j, &x) in k.vars.iter().zip(sol) {
            values[j] = x as f64;
        }
    }
    if comps.len() == 1 {
        stats.incumbents = outcomes[0].incumbents.iter().map(|v| v + fixed_value).collect();
    } else {
        stats.incumbents.push(objective);
    }
    // Report the objective recomputed from the model in its own term order.
    let objective = model.objective_value(&values);
    Ok(SolveResult {
        status: if limited { SolveStatus::Limit } else { SolveStatus::Optimal },
        objective: Some(objective),
        assignment: Some(Assignment { values }),
        proof_gap: if limited { (objective - bound).max(0.0) } else { 0.0 },
        stats,
    })
}
