"""Finite classical probability: conditioning and conditional expectation.

Random variables are 1-d float arrays indexed like the outcomes of their
sample space; events are boolean arrays of the same length.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimMismatch, MissingLevel, ZeroProbabilityEvent

PROB_TOL = 1e-12


@dataclass(frozen=True)
class FiniteSampleSpace:
    """Outcome labels with their probabilities.

    Weights are validated, never renormalized: they must be non-negative and
    sum to one within ``1e-12``.
    """

    outcomes: tuple
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        outcomes = tuple(self.outcomes)
        weights = np.array(self.weights, dtype=float)
        if weights.ndim != 1 or weights.size != len(outcomes) or not outcomes:
            raise DimMismatch("need one weight per outcome")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and non-negative")
        total = float(weights.sum())
        if abs(total - 1.0) > PROB_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1")
        weights.setflags(write=False)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, outcomes):
        outcomes = tuple(outcomes)
        return cls(outcomes, np.full(len(outcomes), 1.0 / len(outcomes)))

    def __len__(self):
        return len(self.outcomes)

    def variable(self, func):
        """Random variable ``func(outcome)`` evaluated on every outcome."""
        return np.array([float(func(o)) for o in self.outcomes])

    def event(self, predicate):
        return np.array([bool(predicate(o)) for o in self.outcomes])

    def prob(self, event):
        return float(self.weights[_as_event(self, event)].sum())

    def __eq__(self, other):
        if not isinstance(other, FiniteSampleSpace):
            return NotImplemented
        return self.outcomes == other.outcomes and np.array_equal(self.weights, other.weights)

    def __hash__(self):
        return hash((self.outcomes, self.weights.tobytes()))


def _as_variable(sp, values):
    x = np.asarray(values, dtype=float)
    if x.shape != (len(sp),):
        raise DimMismatch(f"random variable has shape {x.shape}, space has {len(sp)} outcomes")
    return x


def _as_event(sp, membership):
    e = np.asarray(membership, dtype=bool)
    if e.shape != (len(sp),):
        raise DimMismatch(f"event has shape {e.shape}, space has {len(sp)} outcomes")
    return e


def expect(sp, x):
    return float(np.dot(sp.weights, _as_variable(sp, x)))


def condition(sp, event):
    """Conditional law ``P(. | C)``, carried by ``C``."""
    c = _as_event(sp, event)
    p_c = float(sp.weights[c].sum())
    if p_c <= 0.0:
        raise ZeroProbabilityEvent("cannot condition on an event of probability zero")
    weights = np.where(c, sp.weights / p_c, 0.0)
    return FiniteSampleSpace(sp.outcomes, weights)


def conditional_probability(sp, event, given):
    return condition(sp, given).prob(event)


@dataclass(frozen=True)
class LevelMeans:
    """Per-level values of ``E[X | Y]``.

    ``mask[j]`` is False for levels of probability zero; their value is 0 by
    convention (any value is a version of the conditional expectation there).
    """

    levels: np.ndarray
    values: np.ndarray
    probabilities: np.ndarray
    mask: np.ndarray

    def lookup(self):
        return {float(lv): float(v) for lv, v in zip(self.levels, self.values)}


def level_means(sp, x, y):
    x = _as_variable(sp, x)
    y = _as_variable(sp, y)
    levels = np.unique(y)
    values = np.zeros(levels.size)
    probs = np.zeros(levels.size)
    for j, level in enumerate(levels):
        on_level = y == level
        p = float(sp.weights[on_level].sum())
        probs[j] = p
        if p > 0.0:
            values[j] = float(np.dot(sp.weights[on_level], x[on_level])) / p
    return LevelMeans(levels=levels, values=values, probabilities=probs, mask=probs > 0.0)


def cond_expect(sp, x, y):
    """``E[X | Y] = sum_j E[X | Y = y_j] 1{Y = y_j}`` as a random variable."""
    means = level_means(sp, x, y)
    y = _as_variable(sp, y)
    idx = np.searchsorted(means.levels, y)
    return means.values[idx]


def _apply_level_map(sp, y, mapping, *, require_positive_only):
    y = _as_variable(sp, y)
    out = np.zeros(len(sp))
    for i, level in enumerate(y):
        key = float(level)
        if key in mapping:
            out[i] = float(mapping[key])
        elif require_positive_only and sp.weights[i] == 0.0:
            out[i] = 0.0
        else:
            raise MissingLevel(f"no value supplied for level Y = {key!r}")
    return out


def best_predictor_gap(sp, x, y, phi):
    """``E[(X - phi(Y))^2] - E[(X - E[X|Y])^2]``, non-negative up to rounding.

    ``phi`` maps Y-levels to reals; it only has to cover levels of positive
    probability.
    """
    x = _as_variable(sp, x)
    phi_y = _apply_level_map(sp, y, phi, require_positive_only=True)
    best = cond_expect(sp, x, y)
    return expect(sp, (x - phi_y) ** 2) - expect(sp, (x - best) ** 2)


def defining_property_check(sp, x, y, g):
    """``|E[X g(Y)] - E[E[X|Y] g(Y)]|`` for a bounded map ``g`` of Y-levels."""
    x = _as_variable(sp, x)
    g_y = _apply_level_map(sp, y, g, require_positive_only=True)
    return abs(expect(sp, x * g_y) - expect(sp, cond_expect(sp, x, y) * g_y))


def tower_check(sp, x, y, level):
    """``|E_{P_j}[E[X|Y]] - E[X | Y = y_j]|`` with ``P_j = P(. | Y = y_j)``."""
    y_arr = _as_variable(sp, y)
    p_j = condition(sp, y_arr == level)
    direct = level_means(sp, x, y).lookup()[float(level)]
    return abs(expect(p_j, cond_expect(sp, x, y)) - direct)


def spin_space(pmf):
    """Two ±1 spins; ``pmf`` maps ``(x, y)`` pairs to probabilities."""
    outcomes = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    return FiniteSampleSpace(outcomes, [pmf.get(o, 0.0) for o in outcomes])


def spin_example(sp):
    """``P(X = -1 | X + Y = 0, Y = 1)`` on a two-spin space."""
    x = sp.variable(lambda o: o[0])
    y = sp.variable(lambda o: o[1])
    p_c = condition(sp, x + y == 0)
    return conditional_probability(p_c, x == -1, y == 1)


def sample_space_to_dict(sp, variables=None):
    out = {"outcomes": [str(o) for o in sp.outcomes], "weights": [float(w) for w in sp.weights]}
    if variables:
        out["variables"] = {name: [float(v) for v in vals] for name, vals in variables.items()}
    return out


def sample_space_from_dict(data):
    """Parse the exchange format; returns ``(space, {name: values})``."""
    sp = FiniteSampleSpace(tuple(data["outcomes"]), data["weights"])
    variables = {name: _as_variable(sp, vals) for name, vals in data.get("variables", {}).items()}
    return sp, variables
