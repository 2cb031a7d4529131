"""Experimental Jacobian from (twist, input torque) logs taken under a hanging load."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from . import tum_model as tm
from .errors import DataError, DomainError


def read_log(path):
    """Read a ``theta_rad,tau_in_Nmm`` CSV; a header row and ``#`` comment lines are allowed.

    Returns an (n, 2) float array.  Raises DataError naming the offending line.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read log {path}: {exc.strerror}") from exc
    thetas, taus = [], []
    header_allowed = True
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 2:
            raise DataError(f"expected 2 columns, got {len(row)}", row=lineno)
        try:
            theta, tau = float(row[0]), float(row[1])
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise DataError(f"non-numeric value in {row!r}", row=lineno) from None
        header_allowed = False
        if not (np.isfinite(theta) and np.isfinite(tau)):
            raise DataError("non-finite value", row=lineno)
        thetas.append(theta)
        taus.append(tau)
    if not thetas:
        raise DataError(f"log {path} contains no samples")
    return np.column_stack([thetas, taus])


def _check_log(spec: tm.TumSpec, theta):
    if np.any(np.abs(theta) > spec.theta_limit):
        raise DomainError(f"log angles exceed the stroke |theta| <= {spec.theta_limit:.6g} rad")


def empirical_jacobian(log, tspec: tm.TumSpec, load_force: float, offset: float = 0.0):
    """Per-sample J_exp = (tau_in - offset - tau_s(theta)) / load_force.

    ``log`` is a sequence of (theta, tau_in) pairs or an (n, 2) array.
    """
    theta, tau = _split(log)
    if load_force == 0:
        raise DomainError("load_force must be nonzero to estimate the Jacobian")
    if load_force < 0:
        raise DomainError("load_force must be positive")
    _check_log(tspec, theta)
    j_exp = (tau - offset - tm.elastic_torque(tspec, theta)) / load_force
    return list(zip(theta.tolist(), np.asarray(j_exp).tolist()))


def fit_torque_offset(log, tspec: tm.TumSpec, load_force: float) -> float:
    """Least-squares constant torque offset on top of the analytic model.

    Model: tau_in = J(theta) * load_force + tau_s(theta) + offset.
    """
    theta, tau = _split(log)
    if load_force < 0:
        raise DomainError("load_force must be >= 0")
    _check_log(tspec, theta)
    model = tm.jacobian(tspec, theta) * load_force + tm.elastic_torque(tspec, theta)
    return float(np.mean(tau - model))


def synthetic_log(tspec: tm.TumSpec, thetas, load_force: float, offset: float = 0.0):
    """Forward-model log: the input torque needed to lift ``load_force`` at each twist."""
    t = np.asarray(thetas, dtype=float)
    tau = tm.jacobian(tspec, t) * load_force + tm.elastic_torque(tspec, t) + offset
    return np.column_stack([t, tau])


def _split(log):
    arr = np.asarray(log, dtype=float)
    if arr.size == 0:
        raise DataError("log contains no samples")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError("log must be a sequence of (theta, tau_in) pairs")
    return arr[:, 0], arr[:, 1]


ANALYSIS_COLUMNS = (
    "theta_rad",
    "J_exp_mm_per_rad",
    "J_analytic_mm_per_rad",
    "rel_error",
    "J_exp_offset_corrected_mm_per_rad",
    "rel_error_offset_corrected",
)


def analyze_log(log, tspec: tm.TumSpec, load_force: float):
    """Raw and offset-corrected experimental Jacobians next to the analytic one."""
    theta, _ = _split(log)
    offset = fit_torque_offset(log, tspec, load_force)
    raw = np.array([j for _, j in empirical_jacobian(log, tspec, load_force)])
    corrected = np.array([j for _, j in empirical_jacobian(log, tspec, load_force, offset)])
    j = np.asarray(tm.jacobian(tspec, theta))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(j != 0, np.abs(raw - j) / np.abs(j), np.nan)
        rel_c = np.where(j != 0, np.abs(corrected - j) / np.abs(j), np.nan)
    columns = {
        "theta_rad": theta,
        "J_exp_mm_per_rad": raw,
        "J_analytic_mm_per_rad": j,
        "rel_error": rel,
        "J_exp_offset_corrected_mm_per_rad": corrected,
        "rel_error_offset_corrected": rel_c,
    }
    finite = np.isfinite(rel)
    summary = {
        "fitted_offset_Nmm": offset,
        "load_N": float(load_force),
        "n_samples": int(theta.size),
        "max_rel_error": float(np.max(rel[finite])) if finite.any() else None,
        "max_rel_error_offset_corrected": float(np.max(rel_c[finite])) if finite.any() else None,
    }
    return columns, summary
