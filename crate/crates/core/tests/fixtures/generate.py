"""Reference solutions computed with a generic conic solver.

Regenerate with `python3 generate.py` from this directory. Writes oracle.json.

Every problem is stated directly from its definition, independently of the
Rust implementation:
- diffusion duals: maximise (Delta - d)^T x - 1/2 sum theta f_e(x)^2 - sigma/2 sum d x^2
  over x >= 0, with f_e the Lovasz extension written as max - min (unit) or as a
  scaled difference of sum_largest terms (cardinality);
- excess-step QPs: min sum theta ||s_e - r_e||^2 s.t. Delta - sum theta s <= d;
- per-edge routing problems: min phi^2/2 + ||s - r||^2/(2 sigma) with r(S) <= phi w(S)
  for every subset S and sum r = 0.
"""

import json

import cvxpy as cp
import numpy as np

SOLVER = dict(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10, max_iter=1000)


def lovasz_expr(cost, xe):
    k = xe.shape[0]
    if cost == "unit":
        return cp.max(xe) - cp.min(xe)
    h = k // 2
    return (cp.sum_largest(xe, h) + cp.sum_largest(-xe, h)) / h


def random_hypergraph(rng, cost):
    n = int(rng.integers(5, 13))
    m = int(rng.integers(4, 16))
    edges = []
    for _ in range(m):
        k = int(rng.integers(2, 5))
        edges.append(sorted(rng.choice(n, size=k, replace=False).tolist()))
    used = sorted({v for e in edges for v in e})
    relabel = {v: i for i, v in enumerate(used)}
    edges = [[relabel[v] for v in e] for e in edges]
    n = len(used)
    theta = [float(t) for t in rng.choice([1.0, 1.0, 0.5, 2.0], size=len(edges))]
    deg = np.zeros(n)
    for e, t in zip(edges, theta):
        deg[e] += t
    nseeds = int(rng.integers(1, 3))
    seeds = sorted(rng.choice(n, size=nseeds, replace=False).tolist())
    factor = float(rng.uniform(2.0, 6.0))
    total = factor * deg[seeds].sum()
    delta = np.zeros(n)
    delta[seeds] = deg[seeds] * total / deg[seeds].sum()
    sigma = float(rng.choice([0.01, 0.1, 1.0]))
    return dict(n=n, edges=edges, theta=theta, cost=cost, delta=delta.tolist(), sigma=sigma), deg


def solve_dual(inst, deg):
    n, sigma = inst["n"], inst["sigma"]
    delta = np.array(inst["delta"])
    x = cp.Variable(n, nonneg=True)
    # Epigraph variables keep the squared Lovasz terms in disciplined form.
    f = cp.Variable(len(inst["edges"]), nonneg=True)
    cons = [f[i] >= lovasz_expr(inst["cost"], x[e]) for i, e in enumerate(inst["edges"])]
    obj = (delta - deg) @ x - 0.5 * (np.array(inst["theta"]) @ cp.square(f)) - 0.5 * sigma * (deg @ cp.square(x))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(**SOLVER)
    assert prob.status == cp.OPTIMAL, prob.status
    return float(prob.value), np.maximum(x.value, 0.0).tolist()


def cut_value(cost, k, mask):
    c = bin(mask).count("1")
    if c == 0 or c == k:
        return 0.0
    if cost == "unit":
        return 1.0
    if cost == "cardinality":
        return min(c, k - c) / (k // 2)
    # four-node motif: singletons and triples 1/2, {v1,v2} and {v3,v4} 0, other pairs 1
    if c in (1, 3):
        return 0.5
    return 0.0 if mask in (0b0011, 0b1100) else 1.0


def solve_routing(cost, s, sigma):
    # The problem is positively homogeneous of degree two in s; solve at unit norm.
    scale = float(np.linalg.norm(s))
    s = [v / scale for v in s]
    k = len(s)
    phi = cp.Variable(nonneg=True)
    r = cp.Variable(k)
    cons = [cp.sum(r) == 0]
    for mask in range(1, 2**k - 1):
        idx = [i for i in range(k) if mask >> i & 1]
        cons.append(cp.sum(r[idx]) <= phi * cut_value(cost, k, mask))
    # Scaled by sigma for conditioning.
    prob = cp.Problem(cp.Minimize(0.5 * sigma * cp.square(phi) + 0.5 * cp.sum_squares(np.array(s) - r)), cons)
    prob.solve(**SOLVER)
    assert prob.status == cp.OPTIMAL, prob.status
    return float(prob.value) / sigma * scale**2, float(phi.value) * scale, (r.value * scale).tolist()


def excess_step_case(rng):
    n = 8
    m = int(rng.integers(5, 11))
    edges = [sorted(rng.choice(n, size=int(rng.integers(2, 5)), replace=False).tolist()) for _ in range(m)]
    for v in range(n):
        if not any(v in e for e in edges):
            edges.append(sorted([v, int((v + 1) % n)]))
    theta = rng.uniform(0.5, 2.0, size=len(edges)).tolist()
    r = []
    for e in edges:
        v = rng.normal(size=len(e))
        r.append((v - v.mean()).tolist())
    deg = np.zeros(n)
    for e, t in zip(edges, theta):
        deg[e] += t
    delta = np.where(rng.random(n) < 0.4, rng.uniform(0, 6, size=n), 0.0)
    svars = [cp.Variable(len(e)) for e in edges]
    outflow = [0] * n
    for e, t, sv in zip(edges, theta, svars):
        for i, v in enumerate(e):
            outflow[v] = outflow[v] + t * sv[i]
    cons = [delta[v] - outflow[v] <= deg[v] for v in range(n)]
    obj = sum(t * cp.sum_squares(sv - np.array(re)) for t, sv, re in zip(theta, svars, r))
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(**SOLVER)
    assert prob.status == cp.OPTIMAL, prob.status
    s = [sv.value.tolist() for sv in svars]
    return dict(n=n, edges=edges, theta=theta, r=r, delta=delta.tolist(), s=s)


def main():
    rng = np.random.default_rng(20240611)
    duals = []
    for i in range(50):
        cost = "unit" if i % 2 == 0 else "cardinality"
        inst, deg = random_hypergraph(rng, cost)
        inst["dual"], inst["x"] = solve_dual(inst, deg)
        duals.append(inst)

    path = dict(n=3, edges=[[0, 1], [1, 2]], theta=[1.0, 1.0], cost="unit", delta=[3.0, 0.0, 0.0], sigma=0.01)
    path["dual"], path["x"] = solve_dual(path, np.array([1.0, 2.0, 1.0]))

    routing = []
    for cost, sizes in (("unit", range(2, 7)), ("cardinality", range(2, 7)), ("motif", [4])):
        for j in range(40):
            k = list(sizes)[j % len(sizes)]
            sigma = float([1e-4, 0.01, 1.0][j % 3])
            s = (rng.normal(size=k) * rng.choice([0.01, 1.0, 10.0])).tolist()
            if cost == "motif" and j % 5 == 0:
                s[1] = s[0]
            obj, phi, r = solve_routing(cost, s, sigma)
            routing.append(dict(cost=cost, s=s, sigma=sigma, objective=obj, phi=phi, r=r))

    excess = [excess_step_case(rng) for _ in range(10)]

    with open("oracle.json", "w") as f:
        json.dump(dict(duals=duals, path=path, routing=routing, excess=excess), f, indent=1)


if __name__ == "__main__":
    main()
