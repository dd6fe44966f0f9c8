"""
Experiment harness: orthogonality and round-trip accuracy versus the number
of vectors, on uniform random bases.

Random bases come from ``numpy.random.default_rng(seed)`` (PCG64).  Trial
``t`` of every cell uses ``seed + t``, so ``random_basis(m, n, seed)`` is
exactly the basis of trial 0 for that ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import core
from .metrics import max_abs_po, metrics, po


@dataclass(frozen=True)
class ExperimentConfig:
    m: int = 20
    n_list: Sequence[int] = (5, 10, 15, 20)
    seed: int = 0
    method: str = "egsp"
    trials: int = 1
    tol: float = core.DEFAULT_REL_DEP

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        if min(self.n_list) < 2:
            raise ValueError(f"every N must be >= 2, got {self.n_list}")
        if self.m < max(self.n_list):
            raise ValueError(f"m = {self.m} is smaller than max(n_list) = {max(self.n_list)}")
        if self.method not in core.METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass
class ExperimentRow:
    """One table line.  With several trials the worst value of each
    quantity is kept (largest error, smallest PSNR)."""

    n: int
    max_po: float
    method: str
    seed: int
    m: int
    mae: Optional[float] = None
    mse: Optional[float] = None
    psnr: Optional[float] = None
    keep: Optional[int] = None
    po: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


def random_basis(m, n, seed):
    """``m x n`` array of i.i.d. draws on the open interval (0, 1)."""
    if m < 1 or n < 1:
        raise ValueError(f"need m, n >= 1, got {m}, {n}")
    rng = np.random.default_rng(seed)
    v = rng.random((m, n))
    # Generator.random is [0, 1); redraw exact zeros
    while True:
        zeros = v == 0.0
        if not zeros.any():
            return v
        v[zeros] = rng.random(int(zeros.sum()))


def _cell(cfg, n, with_metrics):
    row = ExperimentRow(n=n, max_po=-1.0, method=cfg.method, seed=cfg.seed, m=cfg.m)
    for t in range(cfg.trials):
        v = random_basis(cfg.m, n, cfg.seed + t)
        u, r = core.orthogonalize(v, cfg.method, cfg.tol)
        w = po(u)
        worst = float(np.abs(w).max())
        if worst > row.max_po:
            row.max_po, row.po = worst, w
        if with_metrics:
            rep = metrics(v, core.reconstruct(u, r, cfg.method))
            row.mae = rep.mae if row.mae is None else max(row.mae, rep.mae)
            row.mse = rep.mse if row.mse is None else max(row.mse, rep.mse)
            row.psnr = rep.psnr if row.psnr is None else min(row.psnr, rep.psnr)
    return row


def run_table1(cfg):
    """Largest pairwise inner product of the orthogonalized set, per N.

    Each row also carries the full pair vector in ``row.po``.
    """
    return [_cell(cfg, n, with_metrics=False) for n in cfg.n_list]


def run_table2(cfg):
    """Forward transform, matching inverse, and MAE/MSE/PSNR of the
    reconstruction, per N.  ``max_po`` is filled in as well."""
    return [_cell(cfg, n, with_metrics=True) for n in cfg.n_list]


def near_dependent_basis(m, n, condition_knob, seed):
    """Columns ``w + condition_knob * z_n`` with ``w``, ``z_n`` uniform on (0, 1).

    Small ``condition_knob`` pushes every column towards the shared ``w``.
    """
    if not 0.0 < condition_knob <= 1.0:
        raise ValueError(f"condition_knob must lie in (0, 1], got {condition_knob}")
    draws = random_basis(m, n + 1, seed)
    w, z = draws[:, :1], draws[:, 1:]
    return w + condition_knob * z


def stability_sweep(m, n, condition_knob, seed, tol=None):
    """``max |po|`` of every method on :func:`near_dependent_basis`."""
    v = near_dependent_basis(m, n, condition_knob, seed)
    return {
        method: max_abs_po(core.orthogonalize(v, method, tol)[0])
        for method in core.METHODS
    }
