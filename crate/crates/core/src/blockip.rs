//! 4-block integer programs with a single coupling inequality and an
//! objective supported on the first-stage brick and one second-stage brick.
//!
//! ```text
//! τ = min{ wᵀx | aᵀx >= b0,  B_i x⁽⁰⁾ + A_i x⁽ⁱ⁾ = b⁽ⁱ⁾,  0 <= x <= u }
//! ```
//!
//! where `a = (D, C_1, …, C_n)`. The decision `τ <= k` is answered by
//! maximizing `aᵀx` subject to `wᵀx + y = k`, `y >= 0`, which stacks onto
//! the addressed brick and leaves a 2-stage program.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::arith::{self, ceil_div};
use crate::error::{Error, Result};
use crate::model::{self, TaskSystem};
use crate::rta::ResponseQuery;

/// A simple 4-block program; every block is stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleFourBlock {
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub q: usize,
    pub n: usize,
    /// `q × s`
    #[serde(rename = "D")]
    pub d: Vec<i64>,
    /// `n` blocks of `q × t`
    #[serde(rename = "C")]
    pub c: Vec<Vec<i64>>,
    /// `n` blocks of `r × t`
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    /// `n` blocks of `r × s`
    #[serde(rename = "B")]
    pub b_blocks: Vec<Vec<i64>>,
    /// Objective over `s + n·t` variables.
    pub w: Vec<i64>,
    pub b0: i64,
    /// Equality right-hand side, `r` entries per brick.
    pub b: Vec<i64>,
    /// Upper bounds over `s + n·t` variables; lower bounds are 0.
    pub u: Vec<i64>,
}

impl SimpleFourBlock {
    pub fn num_vars(&self) -> usize {
        self.s + self.n * self.t
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::MalformedBlocks(m));
        if self.q != 1 {
            return bad(format!("q = {} but exactly one coupling row is supported", self.q));
        }
        if self.n == 0 {
            return bad("at least one brick is required".into());
        }
        if self.d.len() != self.s {
            return bad(format!("D has {} entries, expected {}", self.d.len(), self.s));
        }
        let counts = [("C", &self.c, self.t), ("A", &self.a, self.r * self.t), ("B", &self.b_blocks, self.r * self.s)];
        for (name, blocks, len) in counts {
            if blocks.len() != self.n {
                return bad(format!("{name} has {} blocks, expected {}", blocks.len(), self.n));
            }
            if let Some(i) = blocks.iter().position(|b| b.len() != len) {
                return bad(format!("{name}_{} has {} entries, expected {len}", i + 1, blocks[i].len()));
            }
        }
        let nv = self.num_vars();
        if self.w.len() != nv || self.u.len() != nv {
            return bad(format!("w and u need {nv} entries"));
        }
        if self.b.len() != self.n * self.r {
            return bad(format!("b has {} entries, expected {}", self.b.len(), self.n * self.r));
        }
        if self.u.iter().any(|&u| u < 0) {
            return bad("upper bounds must be nonnegative".into());
        }
        if self.w.iter().any(|&w| w < 0) {
            return bad("objective entries must be nonnegative".into());
        }
        let addressed = (0..self.n).filter(|&i| self.w_brick(i).iter().any(|&w| w != 0)).count();
        if addressed > 1 {
            return bad(format!("objective addresses {addressed} second-stage bricks"));
        }
        Ok(())
    }

    fn w_brick(&self, i: usize) -> &[i64] {
        &self.w[self.s + i * self.t..self.s + (i + 1) * self.t]
    }

    /// Index of the second-stage brick the objective addresses (the first
    /// brick if it addresses none).
    pub fn addressed_brick(&self) -> usize {
        (0..self.n).find(|&i| self.w_brick(i).iter().any(|&w| w != 0)).unwrap_or(0)
    }

    /// The coupling row `a = (D, C_1, …, C_n)`.
    pub fn coupling_row(&self) -> Vec<i64> {
        let mut a = self.d.clone();
        for c in &self.c {
            a.extend_from_slice(c);
        }
        a
    }

    /// True iff `x` satisfies every constraint of the program.
    pub fn is_feasible(&self, x: &[i64]) -> bool {
        if x.len() != self.num_vars() || x.iter().zip(&self.u).any(|(&v, &u)| v < 0 || v > u) {
            return false;
        }
        let a = self.coupling_row();
        let lhs: i128 = a.iter().zip(x).map(|(&a, &v)| a as i128 * v as i128).sum();
        if lhs < self.b0 as i128 {
            return false;
        }
        let x0 = &x[..self.s];
        (0..self.n).all(|i| {
            let xi = &x[self.s + i * self.t..self.s + (i + 1) * self.t];
            (0..self.r).all(|row| {
                let first: i128 = (0..self.s).map(|k| self.b_blocks[i][row * self.s + k] as i128 * x0[k] as i128).sum();
                let second: i128 = (0..self.t).map(|k| self.a[i][row * self.t + k] as i128 * xi[k] as i128).sum();
                first + second == self.b[i * self.r + row] as i128
            })
        })
    }

    /// `∑ |w_i| u_i`, a bound on the absolute objective value over the box.
    pub fn default_h(&self) -> i64 {
        self.w.iter().zip(&self.u).map(|(&w, &u)| w.abs() * u).sum()
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(|r| r.to_vec()).collect()
    }
}

/// One brick of the 2-stage program: `first · x⁽⁰⁾ + second · x⁽ⁱ⁾ = rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Brick {
    pub first: Matrix,
    pub second: Matrix,
    pub rhs: Vec<i64>,
    pub upper: Vec<i64>,
    /// Objective coefficients of the brick's own variables.
    pub objective: Vec<i64>,
}

/// `max{ aᵀx | B″(x, y) = b′, 0 <= x <= u, 0 <= y <= max(k, 0) }`. The slack
/// `y` is the last variable of brick `slack_brick`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwoStageProgram {
    pub s: usize,
    pub first_upper: Vec<i64>,
    pub first_objective: Vec<i64>,
    pub bricks: Vec<Brick>,
    pub slack_brick: usize,
    pub k: i64,
}

impl TwoStageProgram {
    /// The stitched matrix `B″` over `s + ∑ t_i` columns, slack included.
    pub fn stitched(&self) -> Matrix {
        let cols = self.s + self.bricks.iter().map(|b| b.second.cols).sum::<usize>();
        let rows = self.bricks.iter().map(|b| b.first.rows).sum();
        let mut m = Matrix::zeros(rows, cols);
        let (mut row0, mut col0) = (0, self.s);
        for b in &self.bricks {
            for i in 0..b.first.rows {
                for j in 0..self.s {
                    m.set(row0 + i, j, b.first.get(i, j));
                }
                for j in 0..b.second.cols {
                    m.set(row0 + i, col0 + j, b.second.get(i, j));
                }
            }
            row0 += b.first.rows;
            col0 += b.second.cols;
        }
        m
    }

    /// The stacked right-hand side `b′`.
    pub fn rhs(&self) -> Vec<i64> {
        self.bricks.iter().flat_map(|b| b.rhs.iter().copied()).collect()
    }
}

/// Put `wᵀx + y = k` on top of the addressed brick.
pub fn transform_to_2stage(p: &SimpleFourBlock, k: i64) -> Result<TwoStageProgram> {
    p.validate()?;
    let j = p.addressed_brick();
    let (s, t, r) = (p.s, p.t, p.r);
    let mut bricks = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let slack = i == j;
        let rows = r + usize::from(slack);
        let cols = t + usize::from(slack);
        let offset = usize::from(slack);
        let mut first = Matrix::zeros(rows, s);
        let mut second = Matrix::zeros(rows, cols);
        let mut rhs = Vec::with_capacity(rows);
        if slack {
            for col in 0..s {
                first.set(0, col, p.w[col]);
            }
            for col in 0..t {
                second.set(0, col, p.w[s + i * t + col]);
            }
            second.set(0, t, 1);
            rhs.push(k);
        }
        for row in 0..r {
            for col in 0..s {
                first.set(row + offset, col, p.b_blocks[i][row * s + col]);
            }
            for col in 0..t {
                second.set(row + offset, col, p.a[i][row * t + col]);
            }
            rhs.push(p.b[i * r + row]);
        }
        let mut upper = p.u[s + i * t..s + (i + 1) * t].to_vec();
        let mut objective = p.c[i].clone();
        if slack {
            upper.push(k.max(0));
            objective.push(0);
        }
        bricks.push(Brick { first, second, rhs, upper, objective });
    }
    Ok(TwoStageProgram { s, first_upper: p.u[..s].to_vec(), first_objective: p.d.clone(), bricks, slack_brick: j, k })
}

struct Desk<'a> {
    tp: &'a TwoStageProgram,
    nodes: u64,
    budget: u64,
    memo: HashMap<(usize, Vec<i64>), Option<i64>>,
}

impl Desk<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        arith::count(1);
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { nodes: self.nodes });
        }
        Ok(())
    }

    /// `max{ objᵀx | second · x = residual, 0 <= x <= upper }` for one brick.
    fn brick(&mut self, i: usize, residual: Vec<i64>) -> Result<Option<i64>> {
        if let Some(&v) = self.memo.get(&(i, residual.clone())) {
            return Ok(v);
        }
        let b = &self.tp.bricks[i];
        let cols = b.second.cols;
        // per row, the range of contributions of variables col.. onwards
        let mut lo = vec![vec![0i64; cols + 1]; b.second.rows];
        let mut hi = vec![vec![0i64; cols + 1]; b.second.rows];
        for row in 0..b.second.rows {
            for col in (0..cols).rev() {
                let v = b.second.get(row, col) * b.upper[col];
                lo[row][col] = lo[row][col + 1] + v.min(0);
                hi[row][col] = hi[row][col + 1] + v.max(0);
            }
        }
        let mut obj_hi = vec![0i64; cols + 1];
        for col in (0..cols).rev() {
            obj_hi[col] = obj_hi[col + 1] + (b.objective[col] * b.upper[col]).max(0);
        }
        let mut x = vec![0i64; cols];
        let mut best = None;
        let mut residual_now = residual.clone();
        self.dfs(i, 0, &mut x, &mut residual_now, 0, &lo, &hi, &obj_hi, &mut best)?;
        self.memo.insert((i, residual), best);
        Ok(best)
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        i: usize,
        col: usize,
        x: &mut Vec<i64>,
        residual: &mut Vec<i64>,
        value: i64,
        lo: &[Vec<i64>],
        hi: &[Vec<i64>],
        obj_hi: &[i64],
        best: &mut Option<i64>,
    ) -> Result<()> {
        self.tick()?;
        let b = &self.tp.bricks[i];
        let cols = b.second.cols;
        if (0..residual.len()).any(|row| residual[row] < lo[row][col] || residual[row] > hi[row][col]) {
            return Ok(());
        }
        if best.is_some_and(|bv| value + obj_hi[col] <= bv) {
            return Ok(());
        }
        if col == cols {
            // every residual is zero here because lo = hi = 0 at the end
            *best = Some(best.map_or(value, |bv| bv.max(value)));
            return Ok(());
        }
        let candidates: Vec<i64> = if col + 1 == cols {
            // the last variable is pinned by any row where it appears
            match (0..residual.len()).find(|&row| b.second.get(row, col) != 0) {
                Some(row) => {
                    let coef = b.second.get(row, col);
                    if residual[row] % coef != 0 {
                        return Ok(());
                    }
                    let v = residual[row] / coef;
                    if v < 0 || v > b.upper[col] {
                        return Ok(());
                    }
                    vec![v]
                }
                None => {
                    // free of constraints: take the best end of its range
                    vec![if b.objective[col] > 0 { b.upper[col] } else { 0 }]
                }
            }
        } else {
            (0..=b.upper[col]).collect()
        };
        let coefs: Vec<i64> = (0..residual.len()).map(|row| b.second.get(row, col)).collect();
        let obj = b.objective[col];
        for v in candidates {
            for (row, &c) in coefs.iter().enumerate() {
                residual[row] -= c * v;
            }
            x[col] = v;
            let r = self.dfs(i, col + 1, x, residual, value + obj * v, lo, hi, obj_hi, best);
            for (row, &c) in coefs.iter().enumerate() {
                residual[row] += c * v;
            }
            r?;
        }
        Ok(())
    }

    fn first_stage(&mut self) -> Result<Option<i64>> {
        let s = self.tp.s;
        let sizes: Vec<i64> = self.tp.first_upper.iter().map(|&u| u + 1).collect();
        let mut x0 = vec![0i64; s];
        let mut best: Option<i64> = None;
        loop {
            self.tick()?;
            let mut total: Option<i64> = Some(x0.iter().zip(&self.tp.first_objective).map(|(&x, &a)| x * a).sum());
            for i in 0..self.tp.bricks.len() {
                let brick = &self.tp.bricks[i];
                let residual: Vec<i64> = (0..brick.first.rows)
                    .map(|row| brick.rhs[row] - (0..s).map(|k| brick.first.get(row, k) * x0[k]).sum::<i64>())
                    .collect();
                match self.brick(i, residual)? {
                    Some(v) => total = total.map(|t| t + v),
                    None => {
                        total = None;
                        break;
                    }
                }
            }
            if let Some(v) = total {
                best = Some(best.map_or(v, |b| b.max(v)));
            }
            // odometer over the first-stage box
            let mut pos = 0;
            while pos < s {
                x0[pos] += 1;
                if x0[pos] < sizes[pos] {
                    break;
                }
                x0[pos] = 0;
                pos += 1;
            }
            if pos == s {
                return Ok(best);
            }
        }
    }
}

/// Default node budget of [`solve_2stage_desk`].
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// Exact maximum of `aᵀx` by enumerating the first stage and solving each
/// brick by depth-first search with interval pruning and memoization on the
/// brick's residual right-hand side. `None` means infeasible.
pub fn solve_2stage_desk(tp: &TwoStageProgram, budget: u64) -> Result<Option<i64>> {
    let mut desk = Desk { tp, nodes: 0, budget, memo: HashMap::new() };
    desk.first_stage()
}

/// Least `k ∈ [-h, h]` with `max{ aᵀx | wᵀx <= k, … } >= b0`, by binary search.
pub fn solve_simple_4block(p: &SimpleFourBlock, h: i64, budget: u64) -> Result<i64> {
    p.validate()?;
    let feasible = |k: i64| -> Result<bool> {
        Ok(solve_2stage_desk(&transform_to_2stage(p, k)?, budget)?.is_some_and(|v| v >= p.b0))
    };
    let (mut lo, mut hi) = (-h, h);
    if !feasible(hi)? {
        return Err(Error::Infeasible);
    }
    while lo < hi {
        let mid = lo + (hi - lo).div_euclid(2);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(hi)
}

/// The inequality system `𝒜 (t, x) >= b` whose minimum `t` is the
/// response time of the last task of a jitter-free system.
pub fn rtc_inequality_system(ts: &TaskSystem) -> Result<(Matrix, Vec<i64>)> {
    model::validate(ts)?;
    let n = ts.len();
    let mut m = Matrix::zeros(n, n);
    let mut b = vec![0i64; n];
    m.set(0, 0, 1);
    b[0] = ts.last().c;
    for (i, task) in ts.tasks[..n - 1].iter().enumerate() {
        m.set(0, i + 1, -task.c);
        m.set(i + 1, 0, -1);
        m.set(i + 1, i + 1, task.p);
    }
    Ok((m, b))
}

/// Encode the response time of the last task as a simple 4-block program.
///
/// The first stage is `t`; brick `i` holds `(x_i, z_i)` with
/// `p_i x_i - z_i - t = 0`, and the coupling row is `t - ∑ c_i x_i >= c_n`.
/// A single task becomes one empty brick.
pub fn encode_rtc_as_4block(ts: &TaskSystem) -> Result<SimpleFourBlock> {
    model::validate(ts)?;
    if !ts.is_jitter_free() {
        return Err(Error::Precondition("the 4-block encoding needs zero jitter".into()));
    }
    model::check_general_utilization_bound(ts)?;
    let n = ts.len();
    let higher = &ts.tasks[..n - 1];
    let u = ResponseQuery::new(higher.to_vec(), ts.last().c).bounds()?.u;

    if higher.is_empty() {
        return Ok(SimpleFourBlock {
            r: 0,
            s: 1,
            t: 0,
            q: 1,
            n: 1,
            d: vec![1],
            c: vec![vec![]],
            a: vec![vec![]],
            b_blocks: vec![vec![]],
            w: vec![1],
            b0: ts.last().c,
            b: vec![],
            u: vec![u],
        });
    }

    let mut w = vec![1];
    let mut ub = vec![u];
    let mut c = Vec::new();
    let mut a = Vec::new();
    let mut b_blocks = Vec::new();
    for task in higher {
        let x_max = arith::to_capped_i64(ceil_div(u as i128 + task.p as i128, task.p as i128), "x bound")?;
        c.push(vec![-task.c, 0]);
        a.push(vec![task.p, -1]);
        b_blocks.push(vec![-1]);
        w.extend([0, 0]);
        ub.extend([x_max, task.p * x_max]);
    }
    Ok(SimpleFourBlock {
        r: 1,
        s: 1,
        t: 2,
        q: 1,
        n: higher.len(),
        d: vec![1],
        c,
        a,
        b_blocks,
        w,
        b0: ts.last().c,
        b: vec![0; higher.len()],
        u: ub,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::sample;
    use crate::model::Task;
    use crate::rta;
    use proptest::prelude::*;

    fn two_tasks() -> TaskSystem {
        TaskSystem::new(vec![Task::rtc(1, 2, 0), Task::rtc(1, 2, 0)])
    }

    /// Every integer point of a box, for brute-force cross-checks.
    fn box_points(upper: &[i64]) -> Vec<Vec<i64>> {
        let mut out = vec![vec![]];
        for &u in upper {
            out = out
                .into_iter()
                .flat_map(|p: Vec<i64>| {
                    (0..=u).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn inequality_system_matches_display() {
        let (m, b) = rtc_inequality_system(&two_tasks()).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1, -1], vec![-1, 2]]);
        assert_eq!(b, vec![1, 0]);
        let (m, b) = rtc_inequality_system(&TaskSystem::new(vec![Task::rtc(4, 9, 0)])).unwrap();
        assert_eq!(m.to_rows(), vec![vec![1]]);
        assert_eq!(b, vec![4]);
    }

    #[test]
    fn stitching_of_one_brick() {
        let p = encode_rtc_as_4block(&two_tasks()).unwrap();
        let tp = transform_to_2stage(&p, 2).unwrap();
        // columns (t | x_1, z_1, y)
        assert_eq!(tp.stitched().to_rows(), vec![vec![1, 0, 0, 1], vec![-1, 2, -1, 0]]);
        assert_eq!(tp.rhs(), vec![2, 0]);
        assert_eq!(tp.bricks[0].upper.last(), Some(&2));
        let zero = transform_to_2stage(&p, 0).unwrap();
        assert_eq!(zero.bricks[0].upper.last(), Some(&0));
    }

    #[test]
    fn desk_examples() {
        let p = encode_rtc_as_4block(&two_tasks()).unwrap();
        assert_eq!(solve_2stage_desk(&transform_to_2stage(&p, 2).unwrap(), DEFAULT_BUDGET).unwrap(), Some(1));
        assert_eq!(solve_2stage_desk(&transform_to_2stage(&p, 1).unwrap(), DEFAULT_BUDGET).unwrap(), Some(0));
        assert_eq!(solve_2stage_desk(&transform_to_2stage(&p, -1).unwrap(), DEFAULT_BUDGET).unwrap(), None);

        // one first-stage variable forced by D = (1) through a trivial brick
        let forced = SimpleFourBlock {
            r: 1,
            s: 1,
            t: 0,
            q: 1,
            n: 1,
            d: vec![1],
            c: vec![vec![]],
            a: vec![vec![]],
            b_blocks: vec![vec![1]],
            w: vec![0],
            b0: 0,
            b: vec![3],
            u: vec![5],
        };
        let tp = transform_to_2stage(&forced, 0).unwrap();
        assert_eq!(solve_2stage_desk(&tp, DEFAULT_BUDGET).unwrap(), Some(3));
        assert_eq!(solve_simple_4block(&forced, 5, DEFAULT_BUDGET).unwrap(), 0);
        assert!(matches!(solve_2stage_desk(&tp, 1), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn rtc_round_trip_examples() {
        let p = encode_rtc_as_4block(&two_tasks()).unwrap();
        assert_eq!(solve_simple_4block(&p, p.default_h(), DEFAULT_BUDGET).unwrap(), 2);

        let sys = sample().without_jitter();
        let p = encode_rtc_as_4block(&sys).unwrap();
        assert_eq!(p.n, 2);
        let r = solve_simple_4block(&p, p.default_h(), DEFAULT_BUDGET).unwrap();
        let q = rta::ResponseQuery::for_task(&sys, 2).unwrap();
        assert_eq!(r, rta::response_jitter_free(&q).unwrap());
        assert_eq!(r, 42);

        let single = TaskSystem::new(vec![Task::rtc(3, 7, 0)]);
        let p = encode_rtc_as_4block(&single).unwrap();
        assert_eq!(solve_simple_4block(&p, p.default_h(), DEFAULT_BUDGET).unwrap(), 3);
    }

    #[test]
    fn malformed_blocks_are_rejected() {
        let mut p = encode_rtc_as_4block(&two_tasks()).unwrap();
        p.q = 2;
        assert!(matches!(transform_to_2stage(&p, 1), Err(Error::MalformedBlocks(_))));
        let mut p = encode_rtc_as_4block(&two_tasks()).unwrap();
        p.a[0].pop();
        assert!(matches!(p.validate(), Err(Error::MalformedBlocks(_))));
        let mut p = encode_rtc_as_4block(&sample().without_jitter()).unwrap();
        p.w[1] = 1;
        p.w[3] = 1;
        assert!(matches!(p.validate(), Err(Error::MalformedBlocks(_))));
        assert!(encode_rtc_as_4block(&sample()).is_err());
    }

    #[test]
    fn json_round_trip() {
        let p = encode_rtc_as_4block(&sample().without_jitter()).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"D\":[1]"));
        let back: SimpleFourBlock = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
    }

    fn small_system() -> impl Strategy<Value = TaskSystem> {
        prop::collection::vec((1i64..=3, 2i64..=12), 1..=3).prop_map(|raw| {
            let mut tasks: Vec<Task> = raw.iter().map(|&(c, p)| Task::rtc(c.min(p), p, 0)).collect();
            while tasks.len() > 1 && model::utilization_of(&tasks[..tasks.len() - 1]) >= num_traits::One::one() {
                tasks.remove(0);
            }
            TaskSystem::new(tasks)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn rtc_round_trip(ts in small_system()) {
            let p = encode_rtc_as_4block(&ts).unwrap();
            let r = solve_simple_4block(&p, p.default_h(), DEFAULT_BUDGET).unwrap();
            let q = rta::ResponseQuery::for_task(&ts, ts.len() - 1).unwrap();
            prop_assert_eq!(r, rta::response_jitter_free(&q).unwrap());
        }

        #[test]
        fn decisions_are_monotone(ts in small_system()) {
            let p = encode_rtc_as_4block(&ts).unwrap();
            let h = p.default_h();
            let verdicts: Vec<bool> = (-2..=h.min(40))
                .map(|k| {
                    let tp = transform_to_2stage(&p, k).unwrap();
                    solve_2stage_desk(&tp, DEFAULT_BUDGET).unwrap().is_some_and(|v| v >= p.b0)
                })
                .collect();
            prop_assert!(verdicts.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn slack_transform_preserves_feasible_sets(
            c in prop::collection::vec(1i64..=2, 2), p in prop::collection::vec(3i64..=4, 2), k in -1i64..=6,
        ) {
            let tasks = vec![Task::rtc(c[0], p[0], 0), Task::rtc(c[1], p[1], 0)];
            let prog = encode_rtc_as_4block(&TaskSystem::new(tasks)).unwrap();
            let mut prog = prog;
            prog.u = prog.u.iter().map(|&u| u.min(6)).collect();
            let tp = transform_to_2stage(&prog, k).unwrap();
            let m = tp.stitched();
            let rhs = tp.rhs();
            let mut upper = tp.first_upper.clone();
            for b in &tp.bricks {
                upper.extend(&b.upper);
            }
            let mut projected: Vec<Vec<i64>> = box_points(&upper)
                .into_iter()
                .filter(|x| (0..m.rows).all(|i| (0..m.cols).map(|j| m.get(i, j) * x[j]).sum::<i64>() == rhs[i]))
                .map(|mut x| { x.pop(); x })
                .collect();
            projected.sort();
            let mut direct: Vec<Vec<i64>> = box_points(&prog.u)
                .into_iter()
                .filter(|x| {
                    let wx: i64 = x.iter().zip(&prog.w).map(|(a, b)| a * b).sum();
                    let equalities = (0..prog.n).all(|i| {
                        x[0] * prog.b_blocks[i][0] + prog.a[i][0] * x[1 + 2 * i] + prog.a[i][1] * x[2 + 2 * i] == prog.b[i]
                    });
                    wx <= k && equalities
                })
                .collect();
            direct.sort();
            prop_assert_eq!(projected, direct);
        }
    }
}
