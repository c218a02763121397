"""Monte-Carlo replication studies: estimator accuracy and order selection.

Replication ``r`` at sample size ``T`` always draws from
``SeedSequence([seed, T, r])``, so results do not depend on how the work is
split across processes.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .icls import icls_fit
from .order import select_order
from .process import simulate
from .proj import proj_fit


def param_names(p, m, n):
    """Labels in column-major order, e.g. ``a_{2,1}`` or ``a2_{1,2}`` when p > 1."""
    names = []
    for l in range(1, p + 1):
        tag = str(l) if p > 1 else ""
        names += [f"a{tag}_{{{i},{j}}}" for j in range(1, m + 1) for i in range(1, m + 1)]
        names += [f"b{tag}_{{{i},{j}}}" for j in range(1, n + 1) for i in range(1, n + 1)]
    names += [f"lambda_{{{i},{j}}}" for j in range(1, n + 1) for i in range(1, m + 1)]
    return names


def flatten(A, B, Lambda):
    parts = []
    for a, b in zip(A, B):
        parts += [np.ravel(a, order="F"), np.ravel(b, order="F")]
    parts.append(np.ravel(Lambda, order="F"))
    return np.concatenate(parts)


def _stream(seed, T, r):
    return np.random.SeedSequence([seed, T, r])


def _map(fn, items, jobs):
    if jobs is None or jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _estimation_rep(r, params, T, seed, methods, burn_in):
    Y = simulate(params, T, burn_in=burn_in, seed=_stream(seed, T, r))
    out = {}
    proj = None
    for method in methods:
        if method == "proj":
            proj = proj_fit(Y, params.p)
            fit = proj
        elif method == "icls":
            init = proj if proj is not None else proj_fit(Y, params.p, se="none")
            fit = icls_fit(Y, params.p, init=init)
        else:
            raise ValueError(f"unknown method {method!r}")
        out[method] = {
            "est": flatten(fit.params.A, fit.params.B, fit.params.Lambda),
            "se": flatten(fit.se_A, fit.se_B, fit.se_Lambda),
            "converged": fit.info.get("converged", True),
        }
    return out


@dataclass
class EstimationSummary:
    method: str
    T: int
    names: list
    truth: np.ndarray
    estimates: np.ndarray  # (R, k)
    ses: np.ndarray  # (R, k)
    converged: np.ndarray

    @property
    def bias(self):
        return self.estimates.mean(axis=0) - self.truth

    @property
    def sd(self):
        return self.estimates.std(axis=0, ddof=1)

    @property
    def se(self):
        return self.ses.mean(axis=0)


@dataclass
class ReplicationReport:
    seed: int
    reps: int
    estimation: list = field(default_factory=list)
    order: list = field(default_factory=list)

    def summary(self, method, T):
        for s in self.estimation:
            if s.method == method and s.T == T:
                return s
        raise KeyError((method, T))

    def to_dict(self):
        out = {"seed": self.seed, "reps": self.reps, "estimation": [], "order": self.order}
        for s in self.estimation:
            out["estimation"].append({
                "method": s.method,
                "T": s.T,
                "params": s.names,
                "bias": s.bias.tolist(),
                "sd": s.sd.tolist(),
                "se": s.se.tolist(),
                "converged_fraction": float(np.mean(s.converged)),
            })
        return out

    def format_tables(self, digits=3):
        lines = []
        if self.estimation:
            names = self.estimation[0].names
            head = ["Method", "T", "Result"] + names
            rows = []
            for s in self.estimation:
                for label, vals in (("Bias", s.bias), ("SD", s.sd), ("SE", s.se)):
                    rows.append([s.method.upper(), str(s.T), label]
                                + [f"{v:.{digits}f}" for v in vals])
            lines += _align([head] + rows)
        if self.order:
            if lines:
                lines.append("")
            head = ["T", "p", "{p_hat=p}", "{p_hat>p}", "{p_hat<p}"]
            rows = [[str(o["T"]), str(o["p"])] + [f"{o[k]:.{digits}f}" for k in ("eq", "gt", "lt")]
                    for o in self.order]
            lines += _align([head] + rows)
        return "\n".join(lines)


def _align(rows):
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]


def replicate_estimation(params, T_grid, reps, seed=0, methods=("proj", "icls"),
                         burn_in=500, jobs=1, report=None):
    """Bias, SD and mean SE of each estimator over ``reps`` simulated series."""
    if reps < 2:
        raise ValueError("need at least two replications")
    report = report or ReplicationReport(seed=seed, reps=reps)
    names = param_names(params.p, params.m, params.n)
    truth = flatten(params.A, params.B, params.Lambda)
    for T in T_grid:
        fn = partial(_estimation_rep, params=params, T=T, seed=seed, methods=methods,
                     burn_in=burn_in)
        results = _map(fn, list(range(reps)), jobs)
        for method in methods:
            est = np.array([r[method]["est"] for r in results])
            se = np.array([r[method]["se"] for r in results])
            conv = np.array([r[method]["converged"] for r in results])
            report.estimation.append(EstimationSummary(method, T, names, truth, est, se, conv))
    return report


def _order_rep(r, params, T, seed, p_bar, method, burn_in):
    Y = simulate(params, T, burn_in=burn_in, seed=_stream(seed, T, r))
    return select_order(Y, p_bar, method=method).p_hat


def replicate_order(params, T_grid, reps, p_bar=6, seed=0, method="icls", burn_in=500,
                    jobs=1, report=None):
    """Frequencies of ``p̂ = p``, ``p̂ > p`` and ``p̂ < p`` for each T."""
    if reps < 2:
        raise ValueError("need at least two replications")
    report = report or ReplicationReport(seed=seed, reps=reps)
    p = params.p
    for T in T_grid:
        fn = partial(_order_rep, params=params, T=T, seed=seed, p_bar=p_bar, method=method,
                     burn_in=burn_in)
        hats = np.array(_map(fn, list(range(reps)), jobs))
        report.order.append({
            "T": T,
            "p": p,
            "eq": float(np.mean(hats == p)),
            "gt": float(np.mean(hats > p)),
            "lt": float(np.mean(hats < p)),
            "p_hat": hats.tolist(),
        })
    return report
