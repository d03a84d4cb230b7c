"""Phase-shift optimizers for single- and double-surface links.

Conventions
-----------
Phase vectors are complex numpy arrays with unit-modulus entries.  A cascade
through a surface with phases ``phi`` is written ``phi @ x`` (plain transpose,
no conjugation), matching ``phi^T x``.  The phase of an exactly-zero complex
number is taken to be 0.

Three families of solvers live here:

* closed-form coherent alignment (:func:`align_to_reference`),
* block-coordinate alternating optimization with closed-form block updates
  (:func:`ao_double_ris`, :func:`ao_second_hop_two_ris`),
* a Dinkelbach-parametrized majorization-minimization loop for the
  signal-to-interference ratio at the destination (:func:`mm_fractional_phase`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Union

import numpy as np

__all__ = [
    "AoSettings",
    "AoResult",
    "SecondHopResult",
    "CascadeOperators",
    "MmState",
    "MmResult",
    "safe_angle",
    "top_left_singular",
    "unit_phases",
    "is_unit_modulus",
    "cascade_f",
    "align_to_reference",
    "coherent_snr",
    "ao_double_ris",
    "ao_second_hop_two_ris",
    "lambda_max_span2",
    "mm_objective",
    "majorizer_state",
    "majorizer_value",
    "majorizer_gap",
    "mm_fractional_phase",
]

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class AoSettings:
    """Iteration controls shared by all iterative phase optimizers.

    Attributes
    ----------
    max_iters : int
        Hard cap on outer iterations.
    rel_tol : float
        Stop when the relative change of the tracked quantity drops below this.
    init : {"spectral", "ones"} or int
        Starting point of the AO loops.  ``"spectral"`` takes the phases of the
        dominant singular vectors of the (homogenized) bilinear form,
        ``"ones"`` starts from all-ones vectors and an integer seeds uniformly
        random phases.  The MM loop starts from all-ones unless seeded.
    stop_on : {"rate", "snr"}
        Quantity whose relative increment is tested in the AO loops.  The MM
        loop always tracks its own objective ``u``.
    """

    max_iters: int = 50
    rel_tol: float = 1e-3
    init: Union[str, int] = "spectral"
    stop_on: str = "rate"

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.stop_on not in ("rate", "snr"):
            raise ValueError(f"stop_on must be 'rate' or 'snr', got {self.stop_on!r}")
        if isinstance(self.init, str):
            if self.init not in ("ones", "spectral"):
                raise ValueError(f"init must be 'ones', 'spectral' or an int seed, got {self.init!r}")
        elif isinstance(self.init, bool) or not isinstance(self.init, (int, np.integer)) or self.init < 0:
            raise ValueError(f"init seed must be a non-negative int, got {self.init!r}")

    def initial(self, m: int, count: int = 1) -> List[np.ndarray]:
        """Starting phase vectors; ``"spectral"`` falls back to all-ones here."""
        if isinstance(self.init, str):
            return [np.ones(m, dtype=np.complex128) for _ in range(count)]
        rng = np.random.default_rng(self.init)
        return [np.exp(1j * rng.uniform(0.0, 2 * np.pi, m)) for _ in range(count)]


def safe_angle(z):
    """``np.angle`` with the phase of exact zeros pinned to 0."""
    z = np.asarray(z, dtype=np.complex128)
    return np.where(z == 0, 0.0, np.angle(z))


def unit_phases(angles) -> np.ndarray:
    return np.exp(1j * np.asarray(angles, dtype=float))


def is_unit_modulus(v, tol: float = UNIT_TOL) -> bool:
    return bool(np.all(np.abs(np.abs(v) - 1.0) <= tol))


def _rel_change(prev: float, cur: float) -> float:
    if prev == cur:
        return 0.0
    if prev == 0.0:
        return math.inf
    return abs(cur - prev) / abs(prev)


def _tracked(snr: float, settings: AoSettings) -> float:
    return math.log1p(snr) / math.log(2.0) if settings.stop_on == "rate" else snr


# ---------------------------------------------------------------------------
# cascade construction
# ---------------------------------------------------------------------------

def cascade_f(h_i2d: np.ndarray, g: np.ndarray, h_i1s: np.ndarray) -> np.ndarray:
    """``diag(h_i2d) @ g @ diag(h_i1s)`` without forming the diagonals."""
    h_i2d = np.asarray(h_i2d)
    h_i1s = np.asarray(h_i1s)
    g = np.asarray(g)
    if g.ndim != 2 or g.shape != (h_i2d.shape[0], h_i1s.shape[0]):
        raise ValueError(
            f"dimension mismatch: g {g.shape}, h_i2d {h_i2d.shape}, h_i1s {h_i1s.shape}"
        )
    return h_i2d[:, None] * g * h_i1s[None, :]


@dataclass(frozen=True, eq=False)
class CascadeOperators:
    """Products of channel coefficients consumed by the optimizers.

    ``f`` feeds the surface-only link; ``q_mat``, ``u1``, ``u2`` the
    relay-to-relay hop; ``a_vec``, ``b_vec`` the destination SINR of the
    concurrent scheme, where ``q_vec = g @ (theta * h_i1s)`` is built with
    the first-surface phases ``theta`` that maximize the source-to-R1 hop.
    Fields not supported by the drop's topology are ``None``.
    """

    f: np.ndarray
    q_mat: Optional[np.ndarray] = None
    u1: Optional[np.ndarray] = None
    u2: Optional[np.ndarray] = None
    a_vec: Optional[np.ndarray] = None
    b_vec: Optional[np.ndarray] = None
    q_vec: Optional[np.ndarray] = None
    theta: Optional[np.ndarray] = None
    h_sr1: Optional[complex] = None
    h_r1r2: Optional[complex] = None
    h_r2d: Optional[complex] = None

    @classmethod
    def from_drop(cls, drop) -> "CascadeOperators":
        f = cascade_f(drop.h_i2d, drop.g, drop.h_i1s)
        if not drop.has_relay_pair:
            return cls(f=f)
        q_mat = cascade_f(drop.h_i2r2, drop.g, drop.h_i1r1)
        u1 = drop.h_i1r2 * drop.h_i1r1
        u2 = drop.h_i2r2 * drop.h_i2r1
        theta = align_to_reference(drop.h_sr1, drop.h_i1r1 * drop.h_i1s)
        q_vec = drop.g @ (theta * drop.h_i1s)
        return cls(
            f=f,
            q_mat=q_mat,
            u1=u1,
            u2=u2,
            a_vec=drop.h_i2d * drop.h_i2r2,
            b_vec=drop.h_i2d * q_vec,
            q_vec=q_vec,
            theta=theta,
            h_sr1=drop.h_sr1,
            h_r1r2=drop.h_r1r2,
            h_r2d=drop.h_r2d,
        )


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def align_to_reference(ref: complex, cascade: np.ndarray) -> np.ndarray:
    """Phases that rotate every ``cascade[m]`` onto the phase of ``ref``.

    With the returned ``v``, ``|ref + v @ cascade| == |ref| + sum(|cascade|)``.
    """
    cascade = np.asarray(cascade, dtype=np.complex128)
    return unit_phases(safe_angle(ref) - safe_angle(cascade))


def coherent_snr(rho: float, ref: complex, cascade: np.ndarray) -> float:
    """SNR ``rho * (|ref| + sum |cascade|)**2`` reached by coherent alignment."""
    if rho < 0:
        raise ValueError("rho must be non-negative")
    amp = abs(ref) + math.fsum(np.abs(np.asarray(cascade)).tolist())
    return rho * amp * amp


# ---------------------------------------------------------------------------
# alternating optimization
# ---------------------------------------------------------------------------

_DENSE_SVD_MAX = 64
_POWER_ITERS = 30


def top_left_singular(a: np.ndarray) -> np.ndarray:
    """Dominant left singular vector of ``a`` (dense SVD for small ``a``).

    Larger matrices use a fixed-budget power iteration on ``a a^H`` started
    from the all-ones vector, which is deterministic and needs only
    matrix-vector products.
    """
    if min(a.shape) <= _DENSE_SVD_MAX:
        u, _, _ = np.linalg.svd(a)
        return u[:, 0]
    x = np.ones(a.shape[0], dtype=np.complex128)
    ah = a.conj().T
    prev = 0.0
    for _ in range(_POWER_ITERS):
        x = a @ (ah @ x)
        nrm = np.linalg.norm(x)
        if nrm == 0:
            return np.ones(a.shape[0], dtype=np.complex128)
        x /= nrm
        if abs(nrm - prev) <= 1e-6 * nrm:
            break
        prev = nrm
    return x

class AoResult(NamedTuple):
    theta: np.ndarray
    phi: np.ndarray
    snr: float
    iters: int
    trace: List[float]


def ao_double_ris(f: np.ndarray, rho: float, settings: AoSettings = AoSettings()) -> AoResult:
    """Maximize ``rho * |phi @ f @ theta|**2`` over two unit-modulus vectors.

    Alternates the closed-form updates ``theta = exp(-j angle(phi @ f))`` and
    ``phi = exp(-j angle(f @ theta))``; each is the exact block optimum, so the
    objective sequence (``trace``, in SNR units) is non-decreasing.  One
    iteration is one ``theta`` update followed by one ``phi`` update.
    """
    f = np.asarray(f, dtype=np.complex128)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise ValueError(f"f must be square, got {f.shape}")
    m = f.shape[0]
    theta, phi = settings.initial(m, 2)
    if settings.init == "spectral":
        # max |x^T f y| over unit vectors is attained at x = conj(u_1)
        phi = unit_phases(-safe_angle(top_left_singular(f)))
    snr = rho * abs(phi @ f @ theta) ** 2
    trace = [snr]
    iters = 0
    for iters in range(1, settings.max_iters + 1):
        theta = unit_phases(-safe_angle(phi @ f))
        v = f @ theta
        phi = unit_phases(-safe_angle(v))
        new = rho * abs(phi @ v) ** 2
        trace.append(new)
        done = _rel_change(_tracked(snr, settings), _tracked(new, settings)) < settings.rel_tol
        snr = new
        if done:
            break
    return AoResult(theta, phi, snr, iters, trace)


def second_hop_snr(rho, h_r1r2, u1, u2, q_mat, psi1, psi2) -> float:
    return rho * abs(h_r1r2 + psi1 @ u1 + psi2 @ u2 + psi2 @ q_mat @ psi1) ** 2


class SecondHopResult(NamedTuple):
    psi1: np.ndarray
    psi2: np.ndarray
    snr: float
    iters: int
    trace: List[float]


def ao_second_hop_two_ris(
    q_mat: np.ndarray,
    u1: np.ndarray,
    u2: np.ndarray,
    h_r1r2: complex,
    rho: float,
    settings: AoSettings = AoSettings(),
) -> SecondHopResult:
    """Maximize ``rho*|h + psi1@u1 + psi2@u2 + psi2@Q@psi1|**2``.

    For fixed ``psi2`` the objective is ``|z @ psi1 + c|`` with
    ``z = u1 + Q.T @ psi2`` and ``c = psi2 @ u2 + h``; symmetrically for
    ``psi2`` with ``v = u2 + Q @ psi1`` and ``r = h + psi1 @ u1``.  Each block
    is solved by coherent alignment.
    """
    q_mat = np.asarray(q_mat, dtype=np.complex128)
    u1 = np.asarray(u1, dtype=np.complex128)
    u2 = np.asarray(u2, dtype=np.complex128)
    m = u1.shape[0]
    if q_mat.shape != (m, m) or u2.shape != (m,):
        raise ValueError("dimension mismatch between Q, u1 and u2")
    psi1, psi2 = settings.initial(m, 2)
    if settings.init == "spectral":
        # |x^T A y| with x = [1, psi2], y = [1, psi1], A = [[h, u1^T], [u2, Q]]
        big = np.empty((m + 1, m + 1), dtype=np.complex128)
        big[0, 0] = h_r1r2
        big[0, 1:] = u1
        big[1:, 0] = u2
        big[1:, 1:] = q_mat
        x = np.conj(top_left_singular(big))
        psi2 = unit_phases(safe_angle(x[1:]) - safe_angle(x[0]))
    snr = second_hop_snr(rho, h_r1r2, u1, u2, q_mat, psi1, psi2)
    trace = [snr]
    iters = 0
    qt = q_mat.T
    for iters in range(1, settings.max_iters + 1):
        z = u1 + qt @ psi2
        c = psi2 @ u2 + h_r1r2
        psi1 = align_to_reference(c, z)
        v = u2 + q_mat @ psi1
        r = h_r1r2 + psi1 @ u1
        psi2 = align_to_reference(r, v)
        new = rho * abs(r + psi2 @ v) ** 2
        trace.append(new)
        done = _rel_change(_tracked(snr, settings), _tracked(new, settings)) < settings.rel_tol
        snr = new
        if done:
            break
    return SecondHopResult(psi1, psi2, snr, iters, trace)


# ---------------------------------------------------------------------------
# rank-2 eigenvalue
# ---------------------------------------------------------------------------

def lambda_max_span2(b_vec: np.ndarray, a_vec: np.ndarray, w_b: float, w_a: float) -> float:
    """Largest eigenvalue of ``w_b*b b^H + w_a*a a^H``.

    With unit vectors ``u = b/|b|``, ``v = a/|a|`` the matrix is
    ``x u u^H + y v v^H`` (``x = w_b|b|^2``, ``y = w_a|a|^2``).  Its nonzero
    spectrum is that of a 2x2 matrix with trace ``x + y`` and determinant
    ``x y (1 - |v^H u|^2)``, so only the overlap of the two directions is
    needed.  The discriminant is always evaluated as a sum of non-negative
    terms, and ``1 - |v^H u|^2`` as the squared norm of the component of
    ``v`` orthogonal to ``u``, so nearly parallel and indefinite cases stay
    accurate.  For ``M >= 3`` (or a rank-deficient span) the spectrum also
    contains a zero eigenvalue.
    """
    b = np.asarray(b_vec, dtype=np.complex128)
    a = np.asarray(a_vec, dtype=np.complex128)
    m = b.shape[0]
    nb = float(np.linalg.norm(b))
    na = float(np.linalg.norm(a))
    if m == 1:
        return w_b * nb * nb + w_a * na * na
    if nb == 0.0 or na == 0.0:
        lam = w_b * nb * nb + w_a * na * na
        return max(lam, 0.0)
    u = b / nb
    v = a / na
    ov = np.vdot(u, v)
    perp = v - ov * u
    perp -= np.vdot(u, perp) * u
    gram = min(float(np.vdot(perp, perp).real), 1.0)
    kappa = min(abs(ov) ** 2, 1.0)
    # scale the weights to unit size so nothing under- or overflows
    scale = abs(w_b) * nb * nb + abs(w_a) * na * na
    if scale == 0.0:
        return 0.0
    x = (w_b / scale) * nb * nb
    y = (w_a / scale) * na * na
    half = 0.5 * (x + y)
    if x * y >= 0:
        disc = (0.5 * (x - y)) ** 2 + x * y * kappa
    else:
        disc = half * half - x * y * gram
    root = math.sqrt(disc)
    if half >= 0:
        lam = half + root
    else:
        lam = (x * y * gram) / (half - root)
    lam *= scale
    if m >= 3:
        lam = max(lam, 0.0)
    return lam


# ---------------------------------------------------------------------------
# majorization-minimization for the destination SINR
# ---------------------------------------------------------------------------

def mm_objective(phi, a_vec, b_vec, h_r2d, p1, p2, sigma2) -> float:
    """``u(phi) = (p1|phi@b|^2 + sigma2) / (p2|h + phi@a|^2)`` (inf if the denominator vanishes)."""
    num = p1 * abs(phi @ b_vec) ** 2 + sigma2
    den = p2 * abs(h_r2d + phi @ a_vec) ** 2
    return num / den if den > 0 else math.inf


@dataclass
class MmState:
    """Majorizer built around ``phi_prev`` for a fixed Dinkelbach ``mu``.

    ``objective_trace`` holds ``u`` at the initial point and after each
    iteration; it is only filled in by :func:`mm_fractional_phase`.
    """

    mu: float
    phi_prev: np.ndarray
    lambda_max: float
    alpha: np.ndarray
    beta: float
    a_vec: np.ndarray
    b_vec: np.ndarray
    objective_trace: List[float] = field(default_factory=list)

    @property
    def iters(self) -> int:
        return max(len(self.objective_trace) - 1, 0)


def majorizer_state(a_vec, b_vec, h_r2d, p1, p2, sigma2, phi_prev, mu=None) -> MmState:
    """Build the quadratic upper bound of ``f(., mu)`` touching at ``phi_prev``.

    ``mu`` defaults to ``u(phi_prev)``.
    """
    a = np.asarray(a_vec, dtype=np.complex128)
    b = np.asarray(b_vec, dtype=np.complex128)
    phi_prev = np.asarray(phi_prev, dtype=np.complex128)
    if mu is None:
        mu = mm_objective(phi_prev, a, b, h_r2d, p1, p2, sigma2)
    wa = -mu * p2
    lam = lambda_max_span2(b, a, p1, wa)
    pc = phi_prev.conj()
    # X @ pc without forming X
    x_pc = p1 * b * np.vdot(b, pc) + wa * a * np.vdot(a, pc)
    alpha = lam * pc - x_pc + mu * p2 * np.conj(h_r2d) * a
    quad = lam * float(np.vdot(phi_prev, phi_prev).real) - float((phi_prev @ x_pc).real)
    beta = quad - mu * p2 * abs(h_r2d) ** 2 + sigma2
    return MmState(mu=mu, phi_prev=phi_prev, lambda_max=lam, alpha=alpha, beta=beta,
                   a_vec=a, b_vec=b)


def _f_param(phi, state, p1, p2, h_r2d, sigma2):
    return (p1 * abs(phi @ state.b_vec) ** 2 + sigma2
            - state.mu * p2 * abs(h_r2d + phi @ state.a_vec) ** 2)


def majorizer_value(phi, state: MmState) -> float:
    phi = np.asarray(phi, dtype=np.complex128)
    return (state.lambda_max * float(np.vdot(phi, phi).real)
            - 2.0 * float((phi @ state.alpha).real) + state.beta)


def majorizer_gap(phi, state: MmState, p1, p2, h_r2d, sigma2) -> float:
    """``g(phi | phi_prev, mu) - f(phi, mu)``; non-negative, zero at ``phi_prev``."""
    phi = np.asarray(phi, dtype=np.complex128)
    return majorizer_value(phi, state) - _f_param(phi, state, p1, p2, h_r2d, sigma2)


class MmResult(NamedTuple):
    phi: np.ndarray
    sinr: float
    state: MmState


def mm_fractional_phase(
    a_vec: np.ndarray,
    b_vec: np.ndarray,
    h_r2d: complex,
    p1: float,
    p2: float,
    sigma2: float,
    settings: AoSettings = AoSettings(),
) -> MmResult:
    """Minimize ``u(phi)`` (the inverse destination SINR) by Dinkelbach + MM.

    Starting from the initial phases, ``mu = u(phi)``; each iteration builds
    the majorizer at the current ``phi``, takes its element-wise minimizer
    ``phi = exp(-j angle(alpha))`` and refreshes ``mu = u(phi)``.  ``u`` never
    increases.  Stops when ``u`` changes by less than ``rel_tol`` (relative)
    or after ``max_iters`` iterations.

    A vanishing signal term (``p2 == 0`` or ``a == 0`` with ``h_r2d == 0``)
    is returned as a degenerate result with ``sinr == 0`` and ``u = inf``.
    """
    if p1 < 0 or p2 < 0:
        raise ValueError("powers must be non-negative")
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    a = np.asarray(a_vec, dtype=np.complex128)
    b = np.asarray(b_vec, dtype=np.complex128)
    (phi,) = settings.initial(a.shape[0], 1)
    u = mm_objective(phi, a, b, h_r2d, p1, p2, sigma2)
    trace = [u]
    if not math.isfinite(u):
        state = MmState(mu=math.inf, phi_prev=phi, lambda_max=math.nan,
                        alpha=np.zeros_like(a), beta=math.nan, a_vec=a, b_vec=b,
                        objective_trace=trace)
        return MmResult(phi, 0.0, state)
    state = None
    for _ in range(settings.max_iters):
        state = majorizer_state(a, b, h_r2d, p1, p2, sigma2, phi, mu=u)
        phi = unit_phases(-safe_angle(state.alpha))
        new = mm_objective(phi, a, b, h_r2d, p1, p2, sigma2)
        trace.append(new)
        done = _rel_change(u, new) < settings.rel_tol
        u = new
        if done:
            break
    state.objective_trace = trace
    return MmResult(phi, 1.0 / u, state)
