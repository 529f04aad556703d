//! Sub-problem solvers for one alternating-minimisation sweep.
//!
//! For a hyperedge `e` with shifted routing `s_e`, the routing step solves
//!
//! ```text
//! min_{phi >= 0, r in phi * B_e}  phi^p / p + ||s_e - r||_p^p / (p * sigma^(p-1))
//! ```
//!
//! Solvers: an exact threshold algorithm for the unit cut-cost (`p = 2`) and
//! its l_p generalisation with a bracketed root search on the final balance
//! equation; an exact isotonic-regression solver for the cardinality cost; an
//! exhaustive candidate search for the 4-node motif cost; and a projected
//! subgradient method on the dual that handles any submodular cost.
//! The excess step (`s_step`) has a closed form.

use serde::{Deserialize, Serialize};

use crate::cutcost::CutCost;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeProjectionResult {
    pub phi: f64,
    /// Routing on the hyperedge positions; sums to zero.
    pub r: Vec<f64>,
}

impl EdgeProjectionResult {
    pub fn zero(n: usize) -> Self {
        Self { phi: 0.0, r: vec![0.0; n] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProjectionOptions {
    /// Iterations of the projected subgradient solver.
    pub subgradient_iters: usize,
    /// Target residual of the l_p balance equation.
    pub bisect_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            subgradient_iters: 500,
            bisect_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectionMethod {
    UnitExact,
    UnitLp,
    CardinalityExact,
    Motif4Exhaustive,
    Subgradient,
}

/// Picks the fastest solver applicable to `(cost, p)`.
pub fn select_method(cost: &CutCost, p: f64) -> Result<ProjectionMethod> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::param(format!("p must be a finite number >= 2, got {p}")));
    }
    let p2 = p == 2.0;
    match cost {
        CutCost::Unit if p2 => Ok(ProjectionMethod::UnitExact),
        CutCost::Unit => Ok(ProjectionMethod::UnitLp),
        CutCost::Cardinality if p2 => Ok(ProjectionMethod::CardinalityExact),
        c if *c == CutCost::MOTIF_DEFAULT && p2 => Ok(ProjectionMethod::Motif4Exhaustive),
        _ if p2 => Ok(ProjectionMethod::Subgradient),
        c => Err(Error::UnsupportedCombination { cost: c.name(), p }),
    }
}

/// Routes one hyperedge to its solver. `warm` is the previous routing, used as
/// the starting point of iterative solvers.
pub fn project_edge(
    cost: &CutCost,
    e: &[usize],
    s: &[f64],
    sigma: f64,
    p: f64,
    opts: &ProjectionOptions,
    warm: Option<&[f64]>,
) -> Result<EdgeProjectionResult> {
    match select_method(cost, p)? {
        ProjectionMethod::UnitExact => Ok(project_unit_exact(s, sigma)),
        ProjectionMethod::UnitLp => project_unit_lp(s, sigma, p, opts.bisect_tol),
        ProjectionMethod::CardinalityExact => Ok(project_cardinality_exact(s, sigma)),
        ProjectionMethod::Motif4Exhaustive => Ok(project_motif4(s, sigma)),
        ProjectionMethod::Subgradient => {
            project_subgradient_from(cost, e, s, sigma, opts.subgradient_iters, warm).map(|o| o.result)
        }
    }
}

/// Routing-step objective `phi^p / p + ||s - r||_p^p / (p sigma^(p-1))`.
pub fn edge_objective(s: &[f64], phi: f64, r: &[f64], sigma: f64, p: f64) -> f64 {
    let dist: f64 = s.iter().zip(r).map(|(a, b)| pow_abs(a - b, p)).sum();
    if p == 2.0 {
        0.5 * phi * phi + dist / (2.0 * sigma)
    } else {
        pow_abs(phi, p) / p + dist / (p * pow_abs(sigma, p - 1.0))
    }
}

/// Signed power `|c|^k sign(c)` with `sign(0) = 0`.
pub(crate) fn signed_pow(c: f64, k: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        pow_abs(c, k).copysign(c)
    }
}

/// `|c|^k` with fast paths for small integer exponents and their reciprocals,
/// which cover the common `p = 2, 3, 4`.
pub(crate) fn pow_abs(c: f64, k: f64) -> f64 {
    let c = c.abs();
    if k == 2.0 {
        return c * c;
    }
    if k.fract() == 0.0 && k.abs() <= 8.0 {
        return c.powi(k as i32);
    }
    let inv = 1.0 / k;
    if (inv - inv.round()).abs() < 1e-12 {
        match inv.round() as i32 {
            2 => return c.sqrt(),
            3 => return c.cbrt(),
            _ => {}
        }
    }
    c.powf(k)
}

/// Excess `[Delta - sum_e theta_e r_e - d]_+` at every node. `r` is laid out along
/// the hypergraph's flat incidence array.
pub fn excess(h: &Hypergraph, r: &[f64], delta: &[f64]) -> Vec<f64> {
    let mut mass = delta.to_vec();
    for e in 0..h.num_edges() {
        let w = h.theta()[e];
        for (i, &v) in h.edge_range(e).zip(h.edge(e)) {
            mass[v] -= w * r[i];
        }
    }
    mass.iter()
        .zip(h.degrees())
        .map(|(m, d)| (m - d).max(0.0))
        .collect()
}

/// Closed-form excess step: `s_e = r_e + A_e D^{-1} [Delta - sum theta r - d]_+`.
pub fn s_step(h: &Hypergraph, r: &[f64], delta: &[f64]) -> Vec<f64> {
    let ex = excess(h, r, delta);
    let mut s = r.to_vec();
    for e in 0..h.num_edges() {
        for (i, &v) in h.edge_range(e).zip(h.edge(e)) {
            if ex[v] > 0.0 {
                s[i] += ex[v] / h.degree(v);
            }
        }
    }
    s
}

/// Values `u = s / sigma` sorted in decreasing order.
fn sorted_desc(s: &[f64], sigma: f64) -> Vec<f64> {
    let mut u: Vec<f64> = s.iter().map(|v| v / sigma).collect();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    u
}

/// Walks the piecewise-linear threshold path shared by both unit solvers.
///
/// Thresholds `(a, b)` live in the `s / sigma` scale. The top set `{u >= a}` and
/// bottom set `{u <= b}` carry equal clipped mass; `gap(a, b, t, top_sum)` is
/// the balance residual that must vanish at the optimum.
struct ThresholdWalk {
    a: f64,
    b: f64,
    top: usize,
    bottom: usize,
    top_sum: f64,
    /// The point past the root on the current linear piece (where the walk stopped).
    overshoot_a: Option<f64>,
}

fn walk_thresholds(u: &[f64], sigma: f64, gap: impl Fn(f64, f64, usize, f64) -> f64) -> Option<ThresholdWalk> {
    let n = u.len();
    let mut a = u[0];
    let mut b = u[n - 1];
    if !(a > b) {
        return None;
    }
    let count_top = |a: f64| u.iter().take_while(|&&v| v >= a).count();
    let count_bottom = |b: f64| u.iter().rev().take_while(|&&v| v <= b).count();
    let mut top = count_top(a);
    let mut bottom = count_bottom(b);
    let mut top_sum: f64 = u[..top].iter().sum();
    let mut overshoot_a = None;
    loop {
        // No residual nodes on one side: the path cannot advance further.
        if top >= n || bottom >= n {
            break;
        }
        let wa = sigma * top as f64;
        let wb = sigma * bottom as f64;
        let a1 = u[top];
        let b1 = b + (a - a1) * wa / wb;
        let b2 = u[n - 1 - bottom];
        let a2 = a - (b2 - b) * wb / wa;
        let (ai, bi) = if b1 <= b2 { (a1, b1) } else { (a2, b2) };
        let ti = count_top(ai);
        let ti_sum: f64 = u[..ti].iter().sum();
        if ai <= bi || gap(ai, bi, ti, ti_sum) <= 0.0 {
            overshoot_a = Some(ai);
            break;
        }
        a = ai;
        b = bi;
        top = ti;
        top_sum = ti_sum;
        bottom = count_bottom(b);
    }
    Some(ThresholdWalk { a, b, top, bottom, top_sum, overshoot_a })
}

fn recover_unit(s: &[f64], sigma: f64, a: f64, b: f64) -> EdgeProjectionResult {
    let r: Vec<f64> = s
        .iter()
        .map(|&sv| {
            let u = sv / sigma;
            if u >= a {
                sv - sigma * a
            } else if u <= b {
                sv - sigma * b
            } else {
                0.0
            }
        })
        .collect();
    let phi = CutCost::Unit.gauge(&r);
    EdgeProjectionResult { phi, r }
}

/// Exact routing step for the unit cut-cost with `p = 2`, in `O(|e| log |e|)`.
pub fn project_unit_exact(s: &[f64], sigma: f64) -> EdgeProjectionResult {
    let n = s.len();
    let u = sorted_desc(s, sigma);
    let gap = |a: f64, b: f64, top: usize, top_sum: f64| (a - b) - sigma * (top_sum - top as f64 * a);
    let Some(walk) = walk_thresholds(&u, sigma, gap) else {
        return EdgeProjectionResult::zero(n);
    };
    let wa = sigma * walk.top as f64;
    let wb = sigma * walk.bottom as f64;
    let g = gap(walk.a, walk.b, walk.top, walk.top_sum);
    let denom = wa * wb + wa + wb;
    let a = walk.a - g * wb / denom;
    let b = walk.b + g * wa / denom;
    recover_unit(s, sigma, a, b)
}

/// Routing step for the unit cut-cost with `p > 2`.
///
/// Follows the same threshold path as [`project_unit_exact`] with the balance
/// residual `(a^(p-1) - b^(p-1))^(q-1) - clipped top mass` (signed powers), and
/// locates its root on the final linear piece to `bisect_tol` by bracketed
/// false position.
pub fn project_unit_lp(s: &[f64], sigma: f64, p: f64, bisect_tol: f64) -> Result<EdgeProjectionResult> {
    if !(p >= 2.0) {
        return Err(Error::param(format!("p must be >= 2, got {p}")));
    }
    let n = s.len();
    let q = p / (p - 1.0);
    let u = sorted_desc(s, sigma);
    let gap = |a: f64, b: f64, top: usize, top_sum: f64| {
        signed_pow(signed_pow(a, p - 1.0) - signed_pow(b, p - 1.0), q - 1.0) - sigma * (top_sum - top as f64 * a)
    };
    let Some(walk) = walk_thresholds(&u, sigma, gap) else {
        return Ok(EdgeProjectionResult::zero(n));
    };
    let wa = sigma * walk.top as f64;
    let wb = sigma * walk.bottom as f64;
    let bottom_of = |a_hat: f64| walk.b + (walk.a - a_hat) * wa / wb;
    let residual = |a_hat: f64| gap(a_hat, bottom_of(a_hat), walk.top, walk.top_sum);
    // Where the two thresholds meet on this piece.
    let meet = (walk.b * wb + walk.a * wa) / (wa + wb);
    let mut lo = walk.overshoot_a.map_or(meet, |o| o.max(meet));
    let mut hi = walk.a;
    let (r_lo, r_hi) = (residual(lo), residual(hi));
    // The fractional power of a cancelled difference amplifies rounding error.
    let noise = |a_hat: f64| {
        let scale = a_hat.abs().max(bottom_of(a_hat).abs());
        pow_abs(4.0 * f64::EPSILON * pow_abs(scale, p - 1.0), q - 1.0) + bisect_tol
    };
    if r_hi < -noise(hi) || r_lo > noise(lo) {
        return Err(Error::Bracketing(format!(
            "residual {r_lo:e} at {lo:e} and {r_hi:e} at {hi:e}"
        )));
    }
    // Illinois false position: keeps the bisection bracket with superlinear steps.
    let (mut g_lo, mut g_hi) = (r_lo.min(0.0), r_hi.max(0.0));
    let mut a_hat = hi;
    let mut side = 0i8;
    for _ in 0..200 {
        a_hat = if g_hi > g_lo { (lo * g_hi - hi * g_lo) / (g_hi - g_lo) } else { 0.5 * (lo + hi) };
        if !(a_hat > lo && a_hat < hi) {
            a_hat = 0.5 * (lo + hi);
        }
        let g = residual(a_hat);
        if g.abs() <= bisect_tol || hi - lo <= f64::EPSILON * hi.abs().max(1e-300) {
            break;
        }
        if g > 0.0 {
            hi = a_hat;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            lo = a_hat;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
    }
    Ok(recover_unit(s, sigma, a_hat, bottom_of(a_hat)))
}

/// Exact routing step for the cardinality cut-cost with `p = 2`.
///
/// The scaled base polytope is the permutahedron of `phi * a`, with `a` the
/// increments of `w` along a sorted order. For fixed `phi` the projection keeps
/// the order of `s` and is a decreasing isotonic regression of `s - phi a`. On
/// each pooling pattern the optimal `phi` has a closed form; a bracketed search
/// over `phi` finds the pattern consistent with its own optimum.
pub fn project_cardinality_exact(s: &[f64], sigma: f64) -> EdgeProjectionResult {
    let k = s.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let ss: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let a: Vec<f64> = (1..=k)
        .map(|j| CutCost::Cardinality.value_count(k, j) - CutCost::Cardinality.value_count(k, j - 1))
        .collect();
    let lovasz: f64 = ss.iter().zip(&a).map(|(v, w)| v * w).sum();
    if !(lovasz > 0.0) {
        return EdgeProjectionResult::zero(k);
    }
    let mut blocks = Vec::with_capacity(k);
    let mut trial = Vec::with_capacity(k);
    isotonic_blocks(&ss, &a, 0.0, &mut blocks);
    let mut phi = pooled_phi(&ss, &a, &blocks, sigma);
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for _ in 0..200 {
        isotonic_blocks(&ss, &a, phi, &mut blocks);
        let candidate = pooled_phi(&ss, &a, &blocks, sigma);
        isotonic_blocks(&ss, &a, candidate, &mut trial);
        if trial == blocks || candidate == phi {
            phi = candidate;
            break;
        }
        // Sign of the derivative of the partial minimum in phi.
        if candidate > phi {
            lo = phi;
        } else {
            hi = phi;
        }
        phi = if candidate > lo && candidate < hi {
            candidate
        } else if hi.is_finite() {
            0.5 * (lo + hi)
        } else {
            2.0 * lo.max(phi)
        };
    }
    isotonic_blocks(&ss, &a, phi, &mut blocks);
    let mut r = vec![0.0; k];
    let mut start = 0;
    for &end in &blocks {
        let n_b = (end - start) as f64;
        let shift = ss[start..end].iter().zip(&a[start..end]).map(|(v, w)| v - phi * w).sum::<f64>() / n_b;
        for i in start..end {
            r[order[i]] = ss[i] - shift;
        }
        start = end;
    }
    let phi = phi.max(CutCost::Cardinality.gauge(&r));
    EdgeProjectionResult { phi, r }
}

/// Block ends of the decreasing isotonic regression of `ss - phi a` (pool
/// adjacent violators).
fn isotonic_blocks(ss: &[f64], a: &[f64], phi: f64, ends: &mut Vec<usize>) {
    let mut sums: Vec<(f64, usize)> = Vec::with_capacity(ss.len());
    ends.clear();
    for i in 0..ss.len() {
        let mut cur = (ss[i] - phi * a[i], 1usize);
        while let Some(&(sum, n)) = sums.last() {
            // Merge while the previous block mean is below the current one.
            if sum * cur.1 as f64 >= cur.0 * n as f64 {
                break;
            }
            cur = (cur.0 + sum, cur.1 + n);
            sums.pop();
            ends.pop();
        }
        sums.push(cur);
        ends.push(i + 1);
    }
}

/// Optimal `phi` when the pooling pattern is held fixed.
fn pooled_phi(ss: &[f64], a: &[f64], ends: &[usize], sigma: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    let mut start = 0;
    for &end in ends {
        let n_b = (end - start) as f64;
        let s_b: f64 = ss[start..end].iter().sum();
        let a_b: f64 = a[start..end].iter().sum();
        num += s_b * a_b / n_b;
        den += a_b * a_b / n_b;
        start = end;
    }
    (num / (sigma + den)).max(0.0)
}

/// Exhaustive routing step for the 4-node motif cost with `gamma1 = 1/2`,
/// `gamma2 = 0` and `p = 2`. Positions are `(v1, v2, v3, v4)`.
///
/// The optimal shape vector has `rho1 = -rho2`, `rho3 = -rho4`; depending on
/// which role pairs have equal `s`, each pair is `0`, `±1/2`, or the coupled
/// value `a` (resp. `b`). The best feasible candidate (including `phi = 0`) wins.
pub fn project_motif4(s: &[f64], sigma: f64) -> EdgeProjectionResult {
    assert_eq!(s.len(), 4, "motif projection needs exactly four positions");
    let d12 = s[0] - s[1];
    let d34 = s[2] - s[3];
    let (first, second): (Vec<f64>, Vec<f64>) = match (d12 != 0.0, d34 != 0.0) {
        (false, false) => (vec![], vec![]),
        (true, false) => (vec![0.5, -0.5], vec![0.0]),
        (false, true) => (vec![0.0], vec![0.5, -0.5]),
        (true, true) => {
            let a = (0.5 + sigma) * d12 / d34;
            let b = (0.5 + sigma) * d34 / d12;
            (vec![0.5, -0.5, a, -a], vec![0.5, -0.5, b, -b])
        }
    };
    let cost = CutCost::MOTIF_DEFAULT;
    let mut best = EdgeProjectionResult::zero(4);
    let mut best_obj = edge_objective(s, 0.0, &best.r, sigma, 2.0);
    for &x in &first {
        for &y in &second {
            let rho = [x, -x, y, -y];
            if !in_base_polytope(&cost, &rho) {
                continue;
            }
            let norm2: f64 = rho.iter().map(|v| v * v).sum();
            let dot: f64 = rho.iter().zip(s).map(|(a, b)| a * b).sum();
            let phi = (dot / (sigma + norm2)).max(0.0);
            let r: Vec<f64> = rho.iter().map(|v| phi * v).collect();
            let obj = edge_objective(s, phi, &r, sigma, 2.0);
            if obj < best_obj {
                best_obj = obj;
                best = EdgeProjectionResult { phi, r };
            }
        }
    }
    best
}

fn in_base_polytope(cost: &CutCost, rho: &[f64]) -> bool {
    let n = rho.len();
    (1..(1u64 << n) - 1).all(|m| {
        let sum: f64 = (0..n).filter(|i| m & (1 << i) != 0).map(|i| rho[i]).sum();
        sum <= cost.value_mask(n, m) + 1e-12
    })
}

/// Result of the projected subgradient solver with its certificates.
#[derive(Clone, Debug)]
pub struct SubgradientOutcome {
    pub result: EdgeProjectionResult,
    /// Routing-step objective of `result`.
    pub objective: f64,
    /// Smallest dual objective `f(y)^2/2 + sigma ||y||^2/2 - s^T y` seen; its
    /// negation is a lower bound on the optimal routing-step objective.
    pub best_dual: f64,
}

/// Projected subgradient routing step (`p = 2`, any submodular cost), cold start.
pub fn project_subgradient(
    cost: &CutCost,
    e: &[usize],
    s: &[f64],
    sigma: f64,
    iters: usize,
) -> Result<EdgeProjectionResult> {
    project_subgradient_from(cost, e, s, sigma, iters, None).map(|o| o.result)
}

/// Projected subgradient on the dual `min_y f(y)^2/2 + sigma ||y||^2/2 - s^T y`
/// restricted to the hyperplane `sigma 1^T y = 1^T s`, with normalised steps
/// `c / k`. The scale `c = 2 ||g_0|| / sigma` bounds the distance from the start
/// to the optimum by strong convexity. Every iterate is turned into a feasible
/// primal pair and the best one is kept.
pub fn project_subgradient_from(
    cost: &CutCost,
    e: &[usize],
    s: &[f64],
    sigma: f64,
    iters: usize,
    warm: Option<&[f64]>,
) -> Result<SubgradientOutcome> {
    if iters < 1 {
        return Err(Error::param("subgradient iterations must be at least 1"));
    }
    if !(sigma > 0.0) {
        return Err(Error::param("sigma must be positive"));
    }
    let n = e.len();
    cost.check_size(n)?;
    if s.len() != n {
        return Err(Error::LengthMismatch { what: "shifted routing vs hyperedge", expected: n, got: s.len() });
    }
    let blocks = cost.zero_blocks(n);
    let s_total: f64 = s.iter().sum();
    let mut ws = Workspace::new(n);

    let mut y: Vec<f64> = match warm {
        Some(r) => s.iter().zip(r).map(|(a, b)| (a - b) / sigma).collect(),
        None => s.iter().map(|v| v / sigma).collect(),
    };
    project_hyperplane(&mut y, sigma, s_total);

    let mut best = EdgeProjectionResult::zero(n);
    let mut best_obj = edge_objective(s, 0.0, &best.r, sigma, 2.0);
    if let Some(r) = warm {
        let phi = cost.gauge(r);
        if phi.is_finite() {
            let obj = edge_objective(s, phi, r, sigma, 2.0);
            if obj < best_obj {
                best_obj = obj;
                best = EdgeProjectionResult { phi, r: r.to_vec() };
            }
        }
    }
    let mut best_dual = f64::INFINITY;
    let mut best_y = y.clone();
    let mut done = 0;
    while done < iters {
        // Each epoch restarts the 1/k schedule with a step scale bounded by the
        // distance to the optimum, which strong convexity ties to the current gap.
        let mut h = dual_value(cost, e, s, sigma, &y, &mut ws);
        if h < best_dual {
            best_dual = h;
            best_y.copy_from_slice(&y);
        }
        consider_candidates(cost, s, sigma, &y, &ws.rho, blocks.as_deref(), &mut ws.r, &mut best, &mut best_obj);
        let gap = h + best_obj;
        if gap <= 1e-15 * best_obj.abs() {
            break;
        }
        let mut scale = (2.0 * gap.max(0.0) / sigma).sqrt();
        for j in 1..=EPOCH_LEN.min(iters - done) {
            let f = dot(&ws.rho, &y);
            for i in 0..n {
                ws.g[i] = f * ws.rho[i] + sigma * y[i] - s[i];
            }
            let mean = ws.g.iter().sum::<f64>() / n as f64;
            ws.g.iter_mut().for_each(|g| *g -= mean);
            let norm = dot(&ws.g, &ws.g).sqrt();
            done += 1;
            if norm == 0.0 {
                break;
            }
            if j == 1 {
                scale = scale.min(2.0 * norm / sigma);
            }
            let step = scale / j as f64 / norm;
            for i in 0..n {
                y[i] -= step * ws.g[i];
            }
            project_hyperplane(&mut y, sigma, s_total);
            h = dual_value(cost, e, s, sigma, &y, &mut ws);
            if h < best_dual {
                best_dual = h;
                best_y.copy_from_slice(&y);
            }
            consider_candidates(cost, s, sigma, &y, &ws.rho, blocks.as_deref(), &mut ws.r, &mut best, &mut best_obj);
        }
        polish_level_sets(cost, s, sigma, &best_y, blocks.as_deref(), &mut best, &mut best_obj);
        polish_level_sets(cost, s, sigma, &y, blocks.as_deref(), &mut best, &mut best_obj);
        // Restart from the better of the best dual iterate and the dual point
        // implied by the best routing.
        let implied: Vec<f64> = s.iter().zip(&best.r).map(|(a, b)| (a - b) / sigma).collect();
        let h_implied = dual_value(cost, e, s, sigma, &implied, &mut ws);
        if h_implied < best_dual {
            best_dual = h_implied;
            best_y.copy_from_slice(&implied);
        }
        y.copy_from_slice(&best_y);
    }
    Ok(SubgradientOutcome { result: best, objective: best_obj, best_dual })
}

/// Iterations between restarts of the step schedule.
const EPOCH_LEN: usize = 64;

/// Dual objective `f(y)^2/2 + sigma ||y||^2/2 - s^T y`; leaves the greedy
/// maximiser at `y` in `ws.rho`.
fn dual_value(cost: &CutCost, e: &[usize], s: &[f64], sigma: f64, y: &[f64], ws: &mut Workspace) -> f64 {
    cost.greedy_into(e, y, &mut ws.order, &mut ws.rho);
    let f = dot(&ws.rho, y);
    0.5 * f * f + 0.5 * sigma * dot(y, y) - dot(s, y)
}

/// Solves the routing step exactly under the guess that the optimal dual point
/// is constant on the level sets of `y` (after merging values closer than a
/// tolerance). On a fixed ordered partition `A_1, ..., A_m` the optimum is
/// `y = c_j` on `A_j` with `c_j = (s(A_j) - phi w_j) / (sigma |A_j|)`, where
/// `w_j` is the marginal cost of adding `A_j`, and `phi` solves a scalar linear
/// equation. Several merge tolerances are tried; each candidate is made
/// feasible through its gauge and kept if it improves the objective.
fn polish_level_sets(
    cost: &CutCost,
    s: &[f64],
    sigma: f64,
    y: &[f64],
    blocks: Option<&[usize]>,
    best: &mut EdgeProjectionResult,
    best_obj: &mut f64,
) {
    let n = s.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    let spread = y[order[0]] - y[order[n - 1]];
    if !(spread > 0.0) {
        return;
    }
    let mut inside = vec![false; n];
    let mut r = vec![0.0; n];
    let mut last_groups: Option<Vec<usize>> = None;
    for k in 0..=15 {
        let tol = if k == 15 { 0.0 } else { spread * 10f64.powi(-(k as i32) - 1) };
        // Group boundaries along `order`.
        let mut ends = Vec::new();
        for i in 1..n {
            if y[order[i - 1]] - y[order[i]] > tol {
                ends.push(i);
            }
        }
        ends.push(n);
        if last_groups.as_ref() == Some(&ends) {
            continue;
        }
        last_groups = Some(ends.clone());
        if ends.len() < 2 {
            continue;
        }
        inside.iter_mut().for_each(|b| *b = false);
        let mut prev_w = 0.0;
        let mut start = 0;
        let mut groups = Vec::with_capacity(ends.len());
        let (mut num, mut den) = (0.0, 1.0);
        for &end in &ends {
            for &v in &order[start..end] {
                inside[v] = true;
            }
            let Ok(w) = cost.evaluate_members(&inside) else { return };
            let marginal = w - prev_w;
            prev_w = w;
            let size = (end - start) as f64;
            let mass: f64 = order[start..end].iter().map(|&v| s[v]).sum();
            num += marginal * mass / (sigma * size);
            den += marginal * marginal / (sigma * size);
            groups.push((start, end, marginal, mass, size));
            start = end;
        }
        let phi = (num / den).max(0.0);
        for &(start, end, marginal, mass, size) in &groups {
            let c = (mass - phi * marginal) / (sigma * size);
            for &v in &order[start..end] {
                r[v] = s[v] - sigma * c;
            }
        }
        let mean = r.iter().sum::<f64>() / n as f64;
        r.iter_mut().for_each(|v| *v -= mean);
        if let Some(blocks) = blocks {
            center_blocks(&mut r, blocks);
        }
        let phi = cost.gauge(&r);
        if phi.is_finite() {
            let obj = edge_objective(s, phi, &r, sigma, 2.0);
            if obj < *best_obj {
                *best_obj = obj;
                best.phi = phi;
                best.r.copy_from_slice(&r);
            }
        }
    }
}

struct Workspace {
    order: Vec<usize>,
    rho: Vec<f64>,
    g: Vec<f64>,
    r: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            order: Vec::with_capacity(n),
            rho: vec![0.0; n],
            g: vec![0.0; n],
            r: vec![0.0; n],
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_hyperplane(y: &mut [f64], sigma: f64, s_total: f64) {
    let shift = (sigma * y.iter().sum::<f64>() - s_total) / (sigma * y.len() as f64);
    y.iter_mut().for_each(|v| *v -= shift);
}

/// Turns a dual point into primal candidates and keeps the best:
/// `r = s - sigma y` (centred on zero-cost atoms) with its smallest feasible
/// scale, and the greedy vertex `rho` with its optimal scale.
#[allow(clippy::too_many_arguments)]
fn consider_candidates(
    cost: &CutCost,
    s: &[f64],
    sigma: f64,
    y: &[f64],
    rho: &[f64],
    blocks: Option<&[usize]>,
    r: &mut [f64],
    best: &mut EdgeProjectionResult,
    best_obj: &mut f64,
) {
    for i in 0..s.len() {
        r[i] = s[i] - sigma * y[i];
    }
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    r.iter_mut().for_each(|v| *v -= mean);
    if let Some(blocks) = blocks {
        center_blocks(r, blocks);
    }
    let phi = cost.gauge(r);
    if phi.is_finite() {
        let obj = edge_objective(s, phi, r, sigma, 2.0);
        if obj < *best_obj {
            *best_obj = obj;
            best.phi = phi;
            best.r.copy_from_slice(r);
        }
    }
    let norm2 = dot(rho, rho);
    let phi = (dot(s, rho) / (sigma + norm2)).max(0.0);
    for i in 0..s.len() {
        r[i] = phi * rho[i];
    }
    let obj = edge_objective(s, phi, r, sigma, 2.0);
    if obj < *best_obj {
        *best_obj = obj;
        best.phi = phi;
        best.r.copy_from_slice(r);
    }
}

fn center_blocks(r: &mut [f64], blocks: &[usize]) {
    let nblocks = blocks.iter().max().map_or(0, |m| m + 1);
    let mut sums = vec![0.0; nblocks];
    let mut counts = vec![0usize; nblocks];
    for (v, &b) in r.iter().zip(blocks) {
        sums[b] += v;
        counts[b] += 1;
    }
    for (v, &b) in r.iter_mut().zip(blocks) {
        *v -= sums[b] / counts[b] as f64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_proper(res: &EdgeProjectionResult) {
        let sum: f64 = res.r.iter().sum();
        assert!(sum.abs() < 1e-12, "routing sums to {sum}");
        assert!(res.phi >= 0.0);
    }

    #[test]
    fn dispatch_table() {
        assert_eq!(select_method(&CutCost::Unit, 2.0).unwrap(), ProjectionMethod::UnitExact);
        assert_eq!(select_method(&CutCost::Unit, 4.0).unwrap(), ProjectionMethod::UnitLp);
        assert_eq!(select_method(&CutCost::MOTIF_DEFAULT, 2.0).unwrap(), ProjectionMethod::Motif4Exhaustive);
        assert_eq!(select_method(&CutCost::Cardinality, 2.0).unwrap(), ProjectionMethod::CardinalityExact);
        let custom = CutCost::custom(crate::cutcost::SubsetTable::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap());
        assert_eq!(select_method(&custom, 2.0).unwrap(), ProjectionMethod::Subgradient);
        assert!(matches!(
            select_method(&CutCost::Cardinality, 4.0),
            Err(Error::UnsupportedCombination { .. })
        ));
        assert!(select_method(&CutCost::Unit, 1.5).is_err());
    }

    #[test]
    fn zero_input_gives_zero_routing() {
        let s = [0.0; 5];
        assert_eq!(project_unit_exact(&s, 0.1), EdgeProjectionResult::zero(5));
        assert_eq!(project_unit_lp(&s, 0.1, 4.0, 1e-12).unwrap(), EdgeProjectionResult::zero(5));
        let out = project_subgradient(&CutCost::Cardinality, &[0, 1, 2, 3, 4], &s, 0.1, 50).unwrap();
        assert_eq!(out, EdgeProjectionResult::zero(5));
        assert_eq!(project_motif4(&[0.0; 4], 0.1), EdgeProjectionResult::zero(4));
    }

    #[test]
    fn constant_input_gives_zero_routing() {
        let s = [0.7; 4];
        let res = project_unit_exact(&s, 0.3);
        assert_eq!(res.phi, 0.0);
        assert!(res.r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_node_closed_form() {
        // e = {a, b}, s = (1, 0): r = (t, -t), minimise t^2/2 + ((1-t)^2 + t^2)/(2 sigma).
        let sigma = 0.5;
        let t = 1.0 / (sigma + 2.0);
        let res = project_unit_exact(&[1.0, 0.0], sigma);
        assert!((res.r[0] - t).abs() < 1e-14);
        assert!((res.r[1] + t).abs() < 1e-14);
        assert!((res.phi - t).abs() < 1e-14);
    }

    #[test]
    fn lp_at_p2_matches_exact() {
        let s = [0.9, -0.3, 0.4, 0.4, 1.7, -1.1];
        for sigma in [1e-3, 0.1, 2.0] {
            let exact = project_unit_exact(&s, sigma);
            let lp = project_unit_lp(&s, sigma, 2.0, 1e-13).unwrap();
            for (a, b) in exact.r.iter().zip(&lp.r) {
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn subgradient_rejects_zero_iterations() {
        assert!(project_subgradient(&CutCost::Unit, &[0, 1], &[1.0, 0.0], 1.0, 0).is_err());
    }

    #[test]
    fn motif_equal_pairs_route_nothing() {
        let res = project_motif4(&[0.3, 0.3, -0.2, -0.2], 0.05);
        assert_eq!(res, EdgeProjectionResult::zero(4));
    }

    #[test]
    fn motif_half_equal_case() {
        let res = project_motif4(&[0.9, 0.1, 0.4, 0.4], 0.05);
        assert_proper(&res);
        assert_eq!(res.r[2], 0.0);
        assert_eq!(res.r[3], 0.0);
        assert!(res.phi > 0.0);
        let rho0 = res.r[0] / res.phi;
        assert!((rho0.abs() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn s_step_on_two_unit_edges() {
        // Node 1 has degree 2 and holds 4 units of source mass.
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![1, 2]], None).unwrap();
        let delta = [0.0, 4.0, 0.0];
        let r = vec![0.0; h.incidence_len()];
        let s = s_step(&h, &r, &delta);
        assert_eq!(s, vec![0.0, 1.0, 1.0, 0.0]);
        let mut mass = delta.to_vec();
        for e in 0..h.num_edges() {
            for (i, &v) in h.edge_range(e).zip(h.edge(e)) {
                mass[v] -= s[i];
            }
        }
        assert_eq!(mass[1], 2.0);
    }

    #[test]
    fn s_step_without_excess_is_identity() {
        let h = Hypergraph::from_edges(vec![vec![0, 1], vec![1, 2]], None).unwrap();
        let r = vec![0.2, -0.2, 0.1, -0.1];
        assert_eq!(s_step(&h, &r, &[0.5, 1.0, 0.0]), r);
    }
}
