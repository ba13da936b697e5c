"""Two-source interference, Schrödinger-cat decay and EPR spin pairs.

Each scenario is reduced to an exact computation in at most four
dimensions.

Basis conventions
-----------------
* two-source: index 0 is the upper source ``|+>``, index 1 the lower ``|->``.
* cat: atom-major, ``index = 2 * atom + photon`` (so ``|1,0>`` is index 2).
* EPR: particle-1-major, spin ``+1`` maps to 0 and ``-1`` to 1, so
  ``index = 2 * (1 - s1) / 2 + (1 - s2) / 2``.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import ProjectorFamily, basis_family, build_family
from .conditional import conditional_expectation, reduce_state
from .errors import CoincidentPoints, InvalidConfig, NonPositiveTime, NotNormalized, ZeroProbabilityBranch
from .operators import EXACT_TOL, TOL, DensityOperator, expectation, tensor

I2 = np.eye(2, dtype=complex)
KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
P0 = np.outer(KET0, KET0)
P1 = np.outer(KET1, KET1)


def free_propagator(x, x_prime, t):
    """Free-particle kernel ``(2 pi i t)^(-3/2) exp(i |x - x'|^2 / (2t))``.

    Unit mass, hbar = 1, three dimensions; principal branch for the 3/2 power.
    """
    if not t > 0:
        raise NonPositiveTime(f"propagation time must be positive, got {t!r}")
    r2 = float(np.sum((np.asarray(x, float) - np.asarray(x_prime, float)) ** 2))
    return complex((2j * np.pi * t) ** -1.5 * np.exp(1j * r2 / (2 * t)))


def helmholtz_green(x, x_prime, energy):
    """Outgoing spherical wave ``exp(i w r) / r`` with ``w = sqrt(2E)``."""
    if not energy > 0:
        raise InvalidConfig(f"energy must be positive, got {energy!r}")
    r = float(np.linalg.norm(np.asarray(x, float) - np.asarray(x_prime, float)))
    if r == 0.0:
        raise CoincidentPoints("Green's function is singular at coincident points")
    omega = np.sqrt(2.0 * energy)
    return complex(np.exp(1j * omega * r) / r)


def _vec3(v, name):
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidConfig(f"{name} must be a finite 3-vector")
    return tuple(float(c) for c in arr)


def _check_amplitudes(a, b, tol=EXACT_TOL):
    a, b = complex(a), complex(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise NotNormalized("amplitudes must be finite")
    total = abs(a) ** 2 + abs(b) ** 2
    if abs(total - 1.0) > tol:
        raise NotNormalized(f"|a|^2 + |b|^2 = {total!r}, expected 1")
    return a, b


@dataclass(frozen=True)
class TwoSourceConfig:
    a: complex
    b: complex
    x_detect: tuple = (0.0, 0.0, 0.0)
    x_plus: tuple = (0.0, 0.0, 1.0)
    x_minus: tuple = (0.0, 0.0, -1.0)
    mode: str = "particle"
    t: float = 1.0
    energy: float = 1.0

    def __post_init__(self):
        a, b = _check_amplitudes(self.a, self.b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        for name in ("x_detect", "x_plus", "x_minus"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))
        if self.mode not in ("particle", "wave"):
            raise InvalidConfig(f"mode must be 'particle' or 'wave', got {self.mode!r}")
        if self.mode == "particle" and not self.t > 0:
            raise NonPositiveTime(f"propagation time must be positive, got {self.t!r}")
        if self.mode == "wave":
            if not self.energy > 0:
                raise InvalidConfig(f"energy must be positive, got {self.energy!r}")
            if self.x_detect in (self.x_plus, self.x_minus):
                raise CoincidentPoints("detector coincides with a source")

    def amplitude(self, source):
        if self.mode == "particle":
            return free_propagator(self.x_detect, source, self.t)
        return helmholtz_green(self.x_detect, source, self.energy)

    def amplitudes(self):
        """``(v_plus, v_minus)``: detector amplitudes from each source."""
        return np.array([self.amplitude(self.x_plus), self.amplitude(self.x_minus)])


@dataclass(frozen=True, eq=False)
class TwoSource:
    state: DensityOperator
    family: ProjectorFamily
    detector: np.ndarray
    amplitudes: np.ndarray


def build_two_source(cfg):
    """Reduce the detector observable to the span of the two source states.

    With ``<+|-> = 0`` its matrix elements are ``conj(v_mu) v_nu``, so that
    ``tr(W A) = |a v_plus + b v_minus|^2`` for ``W = |psi><psi|``.
    """
    v = cfg.amplitudes()
    psi = np.array([cfg.a, cfg.b])
    detector = np.outer(v.conj(), v)
    detector.setflags(write=False)
    return TwoSource(
        state=DensityOperator.from_ket(psi),
        family=basis_family(2, labels=("plus", "minus")),
        detector=detector,
        amplitudes=v,
    )


def unconditional_intensity(cfg):
    v_plus, v_minus = cfg.amplitudes()
    return abs(cfg.a * v_plus + cfg.b * v_minus) ** 2


def interference_term(cfg):
    v_plus, v_minus = cfg.amplitudes()
    return 2.0 * (np.conj(cfg.a) * cfg.b * np.conj(v_plus) * v_minus).real


def conditioned_predictor(cfg, tol=TOL):
    """Conditional expectation of the detector given which source fired.

    Coefficients are ``(|v_plus|^2, |v_minus|^2)`` whatever the amplitudes.
    """
    if abs(cfg.a) ** 2 <= tol or abs(cfg.b) ** 2 <= tol:
        raise ZeroProbabilityBranch("both sources need positive weight")
    setup = build_two_source(cfg)
    return conditional_expectation(setup.state, setup.detector, setup.family)


def averaged_predictor_expectation(cfg):
    """``|a|^2 |v_plus|^2 + |b|^2 |v_minus|^2``: the interference-free mixture."""
    v_plus, v_minus = cfg.amplitudes()
    return abs(cfg.a) ** 2 * abs(v_plus) ** 2 + abs(cfg.b) ** 2 * abs(v_minus) ** 2


@dataclass(frozen=True, eq=False)
class CompositeScenario:
    """Two-qubit scenario with a conserved charge.

    ``family`` is the observation algebra (photon number for the cat, spin
    of the second particle for EPR); ``partner`` is the family for the
    unobserved subsystem, used by the two-stage sampler.
    """

    kind: str
    a: complex
    b: complex
    psi: np.ndarray
    state: DensityOperator
    family: ProjectorFamily
    partner: ProjectorFamily
    charge: np.ndarray
    eigenvalue: float

    def charge_residual(self):
        return float(np.linalg.norm(self.charge @ self.psi - self.eigenvalue * self.psi))


def build_cat(a, b):
    a, b = _check_amplitudes(a, b)
    # |1,0> = index 2, |0,1> = index 1
    psi = a * np.kron(KET1, KET0) + b * np.kron(KET0, KET1)
    number = P1
    charge = tensor(number, I2) + tensor(I2, number)
    photon = build_family([tensor(I2, P0), tensor(I2, P1)], labels=("no-photon", "photon"))
    atom = build_family([tensor(P0, I2), tensor(P1, I2)], labels=("ground", "excited"))
    return CompositeScenario(
        kind="cat",
        a=a,
        b=b,
        psi=psi,
        state=DensityOperator.from_ket(psi),
        family=photon,
        partner=atom,
        charge=charge,
        eigenvalue=1.0,
    )


def build_epr(a, b):
    a, b = _check_amplitudes(a, b)
    # spin +1 -> KET0, spin -1 -> KET1
    psi = a * np.kron(KET0, KET1) + b * np.kron(KET1, KET0)
    spin = P0 - P1
    charge = tensor(spin, I2) + tensor(I2, spin)
    second = build_family([tensor(I2, P0), tensor(I2, P1)], labels=("second+1", "second-1"))
    first = build_family([tensor(P0, I2), tensor(P1, I2)], labels=("first+1", "first-1"))
    return CompositeScenario(
        kind="epr",
        a=a,
        b=b,
        psi=psi,
        state=DensityOperator.from_ket(psi),
        family=second,
        partner=first,
        charge=charge,
        eigenvalue=0.0,
    )


def conditional_probability(state, event, given):
    """Probability of projector ``event`` after Lüders reduction by ``given``."""
    return expectation(reduce_state(state, given), event).real


def cat_photon_probability(scn):
    return expectation(scn.state, scn.family[1]).real


def cat_ground_probability(scn):
    return expectation(scn.state, scn.partner[0]).real


def cat_conditional_ground(a, b):
    """Probability the atom is in its ground state once a photon is seen."""
    scn = build_cat(a, b)
    return conditional_probability(scn.state, scn.partner[0], scn.family[1])


def epr_second_down_probability(scn):
    return expectation(scn.state, scn.family[1]).real


def epr_conditional_first_up(a, b):
    """Probability the first spin is ``+1`` once the second is seen at ``-1``."""
    scn = build_epr(a, b)
    return conditional_probability(scn.state, scn.partner[0], scn.family[1])


def branch_table(scn, tol=TOL):
    """``table[j][k]`` = P(partner outcome k | observed outcome j); None for null branches."""
    table = []
    for b in scn.family.projectors:
        if expectation(scn.state, b).real <= tol:
            table.append(None)
            continue
        reduced = reduce_state(scn.state, b)
        table.append([expectation(reduced, p).real for p in scn.partner.projectors])
    return table


def predictor_of(scn, observable):
    return conditional_expectation(scn.state, observable, scn.family)
