"""Small argument checkers shared by the estimators and the CLI."""

import numbers

import numpy as np

from .exceptions import InputError


def check_scalar(value, name, *, lower=None, upper=None, lower_inclusive=True,
                 upper_inclusive=True, integer=False):
    """Validate a real scalar against optional bounds and return it.

    Raises :class:`InputError` naming ``name`` on failure.
    """
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InputError(f"{name} must be a real number, got {value!r}", name)
    if integer and int(value) != value:
        raise InputError(f"{name} must be an integer, got {value!r}", name)
    if not np.isfinite(value):
        raise InputError(f"{name} must be finite, got {value!r}", name)
    if lower is not None:
        bad = value < lower if lower_inclusive else value <= lower
        if bad:
            op = ">=" if lower_inclusive else ">"
            raise InputError(f"{name} must be {op} {lower}, got {value!r}", name)
    if upper is not None:
        bad = value > upper if upper_inclusive else value >= upper
        if bad:
            op = "<=" if upper_inclusive else "<"
            raise InputError(f"{name} must be {op} {upper}, got {value!r}", name)
    return int(value) if integer else float(value)


def check_states(X, n_levels, horizon):
    """Coerce ``X`` to an ``(n, 2)`` integer array of ``(level, age)`` rows."""
    X = np.asarray(X)
    if X.ndim == 1 and X.shape[0] == 2:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 2:
        raise InputError(f"states must have shape (n, 2), got {X.shape}", "X")
    if not np.all(np.equal(np.mod(X, 1), 0)):
        raise InputError("states must hold integer (level, age) pairs", "X")
    X = X.astype(np.int64)
    level, age = X[:, 0], X[:, 1]
    if np.any((level < 0) | (level >= n_levels)):
        raise InputError(f"level index out of range [0, {n_levels})", "level")
    if np.any((age < 1) | (age > horizon)):
        raise InputError(f"age out of range [1, {horizon}]", "age")
    return X


def check_policy_table(table, n_levels, horizon):
    """Validate a ``(K, T)`` action table with forced inquiry in the last column."""
    table = np.asarray(table)
    if table.shape != (n_levels, horizon):
        raise InputError(
            f"policy table must have shape {(n_levels, horizon)}, got {table.shape}",
            "policy")
    if not np.all(np.isin(table, (0, 1))):
        raise InputError("policy actions must be 0 (hold) or 1 (inquire)", "policy")
    table = table.astype(np.int8)
    if not np.all(table[:, -1] == 1):
        raise InputError("policy must inquire at the maximum age", "policy")
    return table
