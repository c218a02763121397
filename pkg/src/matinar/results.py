"""Container for fitted MAT-INAR models."""

from dataclasses import dataclass, field

import numpy as np

from .process import ModelParams


@dataclass
class FitResult:
    """Estimates, standard errors and residuals of one fit.

    ``residuals`` has shape ``(T - p, m, n)`` and holds
    ``Y_t - sum_l Â_l Y_{t-l} B̂_lᵀ - Λ̂`` for t = p+1..T.
    """

    method: str
    params: ModelParams
    se_A: list
    se_B: list
    se_Lambda: np.ndarray
    residuals: np.ndarray
    se_Phi: list = None
    info: dict = field(default_factory=dict)

    @property
    def p(self):
        return self.params.p

    def rss(self):
        return float(np.sum(self.residuals ** 2))

    def to_dict(self):
        r = self.residuals
        out = {
            "method": self.method,
            "p": self.p,
            "m": self.params.m,
            "n": self.params.n,
            "A": [a.tolist() for a in self.params.A],
            "B": [b.tolist() for b in self.params.B],
            "Lambda": self.params.Lambda.tolist(),
            "se_A": [s.tolist() for s in self.se_A] if self.se_A is not None else None,
            "se_B": [s.tolist() for s in self.se_B] if self.se_B is not None else None,
            "se_Lambda": self.se_Lambda.tolist(),
            "residual_summary": {
                "count": int(r.shape[0]),
                "rss": self.rss(),
                "mean": r.mean(axis=0).tolist(),
                "sd": r.std(axis=0, ddof=1).tolist() if r.shape[0] > 1 else None,
            },
        }
        if self.se_Phi is not None:
            out["se_Phi"] = [s.tolist() for s in self.se_Phi]
        out.update(_jsonable(self.info))
        return out


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
