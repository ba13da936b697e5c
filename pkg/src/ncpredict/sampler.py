"""Seeded simulation of projective measurements with Lüders collapse.

Shots are split into fixed-size streams; stream ``k`` draws from a Philox
generator keyed by ``(seed, k)``. Stream boundaries do not depend on the
number of workers, so serial and parallel runs agree shot for shot.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .conditional import branch_weights, reduce_state
from .errors import IncompleteFamily
from .operators import TOL, DensityOperator, as_density

STREAM_SHOTS = 16384
# a conditional probability this close to 1 is treated as a certain event
CERTAINTY_TOL = 1e-12


def make_rng(seed, stream=0):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def _require_complete(family):
    if not family.complete:
        raise IncompleteFamily(
            f"sampling needs a complete family (||I - sum B_j|| = {family.completeness_defect:.3g})"
        )


def _cumulative(probs, tol=TOL):
    """Born weights and their cumulative sums; outcome ``j`` owns ``[cum[j-1], cum[j])``.

    Weights at or below ``tol`` are zeroed so null branches are never drawn.
    """
    p = np.asarray(probs, dtype=float)
    p = np.where(p > tol, p, 0.0)
    p = p / p.sum()
    cum = np.cumsum(p)
    last = int(np.flatnonzero(p)[-1])
    cum[last:] = 1.0
    return p, cum


def _draw(cum, u):
    return np.searchsorted(cum, u, side="right")


@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome_index: int
    pre_state: DensityOperator
    post_state: DensityOperator


def born_sample(state, family, rng):
    """Measure ``family`` once: Born draw, then Lüders reduction."""
    W = as_density(state)
    _require_complete(family)
    _, cum = _cumulative(branch_weights(W, family))
    j = int(_draw(cum, rng.random()))
    return MeasurementRecord(j, W, reduce_state(W, family[j]))


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    """Observe ``observe`` first; if ``then`` is given, measure it on the collapsed state."""

    observe: object
    then: object = None


def scenario_plan(scenario):
    """Default plan: observe the scenario's measurement algebra, then its partner subsystem."""
    return MeasurementPlan(scenario.family, getattr(scenario, "partner", None))


@dataclass(frozen=True)
class SampleReport:
    scenario: str
    shots: int
    seed: int
    labels: list
    counts: list
    frequencies: list
    predicted: list
    partner_labels: list
    joint_counts: list
    joint_predicted: list
    conditional_frequencies: list
    conditional_predicted: list
    certain_events: list
    max_abs_deviation: float
    within_bound: bool

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _tally(seed, stream, n, cum_first, cum_second, n_first, n_second):
    rng = make_rng(seed, stream)
    u = rng.random((n, 2))
    first = _draw(cum_first, u[:, 0])
    joint = np.zeros((n_first, max(n_second, 1)), dtype=np.int64)
    if cum_second is None:
        joint[:, 0] = np.bincount(first, minlength=n_first)
        return joint
    for j in range(n_first):
        hit = first == j
        if cum_second[j] is None or not hit.any():
            continue
        joint[j] = np.bincount(_draw(cum_second[j], u[hit, 1]), minlength=n_second)
    return joint


def binomial_bound(p, shots):
    """Four-sigma binomial band plus one count of slack."""
    return 4.0 * np.sqrt(p * (1.0 - p) / shots) + 1.0 / shots


def run_experiment(state, plan, shots, seed, name="custom", workers=1):
    """Sample ``shots`` runs of ``plan`` and compare with Born predictions."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    W = as_density(state)
    _require_complete(plan.observe)
    p_first, cum_first = _cumulative(branch_weights(W, plan.observe))
    n_first = len(plan.observe)

    if plan.then is not None:
        _require_complete(plan.then)
        n_second = len(plan.then)
        cond = []
        cum_second = []
        for j in range(n_first):
            if p_first[j] == 0.0:
                cond.append(None)
                cum_second.append(None)
                continue
            q, cum = _cumulative(branch_weights(reduce_state(W, plan.observe[j]), plan.then))
            cum_second.append(cum)
            cond.append(q)
    else:
        n_second = 0
        cond = None
        cum_second = None

    sizes = [STREAM_SHOTS] * (shots // STREAM_SHOTS)
    if shots % STREAM_SHOTS:
        sizes.append(shots % STREAM_SHOTS)
    jobs = [(seed, k, n, cum_first, cum_second, n_first, n_second) for k, n in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _tally(*job), jobs))
    else:
        parts = [_tally(*job) for job in jobs]
    joint = np.sum(parts, axis=0)

    counts = joint.sum(axis=1)
    freqs = counts / shots
    deviations = list(np.abs(freqs - p_first))
    bounds_ok = [abs(f - p) <= binomial_bound(p, shots) for f, p in zip(freqs, p_first)]

    joint_pred = []
    cond_freq = []
    certain = []
    if cond is not None:
        for j in range(n_first):
            row_pred = np.zeros(n_second) if cond[j] is None else p_first[j] * cond[j]
            joint_pred.append([float(x) for x in row_pred])
            row_freq = joint[j] / shots
            deviations.extend(np.abs(row_freq - row_pred))
            bounds_ok.extend(abs(f - p) <= binomial_bound(p, shots) for f, p in zip(row_freq, row_pred))
            cond_freq.append(None if counts[j] == 0 else [float(x) for x in joint[j] / counts[j]])
            if cond[j] is None:
                continue
            for k in range(n_second):
                if abs(cond[j][k] - 1.0) <= CERTAINTY_TOL:
                    certain.append({
                        "given": plan.observe.labels[j],
                        "outcome": plan.then.labels[k],
                        "conditioned_shots": int(counts[j]),
                        "counterexamples": int(counts[j] - joint[j][k]),
                    })

    return SampleReport(
        scenario=name,
        shots=int(shots),
        seed=int(seed),
        labels=list(plan.observe.labels),
        counts=[int(c) for c in counts],
        frequencies=[float(f) for f in freqs],
        predicted=[float(p) for p in p_first],
        partner_labels=[] if plan.then is None else list(plan.then.labels),
        joint_counts=[[int(c) for c in row] for row in joint] if plan.then is not None else [],
        joint_predicted=joint_pred,
        conditional_frequencies=cond_freq,
        conditional_predicted=[] if cond is None else [None if c is None else [float(x) for x in c] for c in cond],
        certain_events=certain,
        max_abs_deviation=float(max(deviations)),
        within_bound=bool(all(bounds_ok) and all(ev["counterexamples"] == 0 for ev in certain)),
    )


@dataclass(frozen=True)
class DeviationReport:
    max_abs_dev: float
    within_bound: bool
    counterexamples: int


def deviation_report(report):
    """Recheck a :class:`SampleReport` against the binomial band.

    Covers first-stage marginals and, for two-stage plans, every joint cell.
    """
    n = report.shots
    pairs = list(zip(report.frequencies, report.predicted))
    for row_counts, row_pred in zip(report.joint_counts, report.joint_predicted):
        pairs.extend((c / n, p) for c, p in zip(row_counts, row_pred))
    devs = [abs(f - p) for f, p in pairs]
    ok = all(abs(f - p) <= binomial_bound(p, n) for f, p in pairs)
    misses = sum(ev["counterexamples"] for ev in report.certain_events)
    return DeviationReport(max_abs_dev=float(max(devs)), within_bound=bool(ok and misses == 0), counterexamples=misses)
