"""Quadratic fixed-point solver, smallness conditions, threshold
calibration, and the assembled mild-solution pipeline.

The mild formulation is u = e^{t Lap} u0 - B(u, u) with B the Duhamel
bilinear term. On any normed space where ||B(x, y)|| <= eta ||x|| ||y||,
the Picard iteration x_{n+1} = y - B(x_n, x_n) contracts to the unique
small solution as soon as ||y|| <= 1/(4 eta), and the fixed point stays
inside the ball of radius 1/(2 eta). Everything here is organized around
measuring eta (calibration), checking ||y|| against the measured
threshold (smallness reports), and running the iteration on discrete
trajectories (solve_mild), plus the follow-up integrability ladder and
heat-fluctuation tables for converged solutions.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .duhamel import (
    TARGET_KATO,
    QuadratureSpec,
    bilinear_estimate_report,
    bilinear_trajectory,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    DivergenceError,
    NonConvergenceError,
    SmallnessError,
    WindowError,
)
from .lattice import DatumSpec, VectorField, make_lattice, realize_datum, save_field
from .multipliers import divergence_defect, heat_flow
from .norms import (
    ExponentBook,
    Trajectory,
    besov_norm_heat,
    dyadic_grid,
    heat_trajectory,
    kato_norm,
    lebesgue_norm,
    n_norm,
    quadratic_mesh,
    sobolev_norm,
)
from .runtime import canonical_json, sha256_hex

# ---------------------------------------------------------------------------
# Exponent bookkeeping


def build_exponent_book(d: int, p: float, s: float, q_tilde: float) -> ExponentBook:
    """Validate the standing hypotheses and derive every exponent used
    downstream.

    Requirements: d in {2, 3}; p > d/2; d/p - 1 <= s < d/(2p);
    q_tilde > q where 1/q = 1/p - s/d. Violations raise ConfigError
    naming the violated inequality.
    """
    if d not in (2, 3):
        raise ConfigError(f"dimension must be 2 or 3, got {d}")
    p = float(p)
    s = float(s)
    q_tilde = float(q_tilde)
    if not np.isfinite([p, s, q_tilde]).all():
        raise ConfigError("exponents must be finite")
    if not (p > d / 2):
        raise ConfigError(
            f"hypothesis p > d/2 violated: p = {p:g}, d/2 = {d / 2:g}"
        )
    lower = d / p - 1.0
    upper = d / (2.0 * p)
    if not (lower <= s < upper):
        raise ConfigError(
            f"hypothesis d/p - 1 <= s < d/(2p) violated: s = {s:g}, "
            f"admissible window [{lower:g}, {upper:g})"
        )
    q = d * p / (d - s * p)
    if not (q_tilde > q):
        raise ConfigError(
            f"auxiliary exponent must satisfy q_tilde > q: q_tilde = {q_tilde:g}, "
            f"q = {q:g}"
        )
    alpha = d * (1.0 / q - 1.0 / q_tilde)
    young_h = 1.0 / (1.0 + 1.0 / q_tilde - 1.0 / q)
    inv_r = 1.0 + 1.0 / p - 2.0 / q_tilde
    young_r = 1.0 / inv_r if q_tilde <= 2.0 * p else None
    gamma_kato = d / (2.0 * q_tilde) + 0.5
    gamma_sobolev = 0.5 * (s + 1.0) + d / q_tilde - d / (2.0 * p)
    horizon_exponent = 0.5 * (1.0 + s - d / p)
    return ExponentBook(
        d=d,
        p=p,
        s=s,
        q_tilde=q_tilde,
        q=q,
        alpha=alpha,
        young_h=young_h,
        young_r=young_r,
        gamma_kato=gamma_kato,
        gamma_sobolev=gamma_sobolev,
        horizon_exponent=horizon_exponent,
    )


def book_to_dict(book: ExponentBook) -> dict:
    return asdict(book)


# ---------------------------------------------------------------------------
# Abstract fixed point


@dataclass
class PicardTrace:
    """Per-iteration record of the fixed-point run.

    norms[n] is the governing norm of iterate x_n (x_0 included), diffs[n]
    the norm of x_{n+1} - x_n, ratios the consecutive-difference quotients.
    residual is the certified fixed-point defect of the returned iterate;
    for the plain Picard map the defect of x_n equals diffs[n] exactly,
    which is what makes the single-map-per-iteration loop honest.
    """

    norms: list
    aux_norms: Optional[list]
    diffs: list
    ratios: list
    residual: Optional[float]
    iterations: int
    converged: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "norms": [float(v) for v in self.norms],
            "aux_norms": None
            if self.aux_norms is None
            else [float(v) for v in self.aux_norms],
            "diffs": [float(v) for v in self.diffs],
            "ratios": [float(v) for v in self.ratios],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "threshold": self.threshold,
        }


def abstract_fixed_point(
    y,
    bilinear_map: Callable,
    eta: float,
    tol: float = 1e-9,
    max_iter: int = 100,
    *,
    norm: Callable = abs,
    aux_norm: Optional[Callable] = None,
    x0=None,
):
    """Solve x = y - B(x, x) by Picard iteration on any space supporting
    +, -, and the supplied norm.

    The returned iterate is the one whose fixed-point defect was measured
    directly: the loop stops when ||x_n - (y - B(x_n, x_n))|| falls below
    tol * max(1, ||y||), and that quantity is recorded as the residual.
    Iterates whose norm exceeds 10/eta abort with DivergenceError; running
    out of iterations raises NonConvergenceError. Both errors carry the
    partial trace. x0 defaults to y itself (the heat flow in the mild
    setting); passing a different start probes uniqueness of the small
    fixed point.
    """
    if not (eta > 0) or not np.isfinite(eta):
        raise ConfigError(f"bilinear constant eta must be positive and finite, got {eta}")
    if not (tol > 0):
        raise ConfigError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be >= 1, got {max_iter}")

    norm_y = float(norm(y))
    threshold = tol * max(1.0, norm_y)
    guard = 10.0 / eta

    x = y if x0 is None else x0
    norms = [float(norm(x))]
    aux_norms = [float(aux_norm(x))] if aux_norm is not None else None
    diffs: list = []
    ratios: list = []

    def trace(converged: bool, residual: Optional[float], iterations: int) -> PicardTrace:
        return PicardTrace(
            norms=norms,
            aux_norms=aux_norms,
            diffs=diffs,
            ratios=ratios,
            residual=residual,
            iterations=iterations,
            converged=converged,
            threshold=threshold,
        )

    for iteration in range(1, max_iter + 1):
        if norms[-1] > guard:
            raise DivergenceError(
                f"iterate norm {norms[-1]:.6g} exceeded the divergence guard "
                f"10/eta = {guard:.6g} at iteration {iteration - 1}",
                trace=trace(False, None, iteration - 1),
            )
        x_next = y - bilinear_map(x, x)
        diff = float(norm(x_next - x))
        diffs.append(diff)
        if len(diffs) >= 2 and diffs[-2] > 0:
            ratios.append(diffs[-1] / diffs[-2])
        if diff <= threshold:
            # diff is exactly the fixed-point defect of x, so x (not
            # x_next) is the iterate whose residual is certified
            return x, trace(True, diff, iteration)
        x = x_next
        norms.append(float(norm(x)))
        if aux_norms is not None:
            aux_norms.append(float(aux_norm(x)))

    raise NonConvergenceError(
        f"no convergence after {max_iter} iterations "
        f"(last successive difference {diffs[-1]:.6g}, threshold {threshold:.6g})",
        trace=trace(False, None, max_iter),
    )


# ---------------------------------------------------------------------------
# Smallness conditions

SMALLNESS_KATO = "kato-window"
SMALLNESS_CRITICAL = "critical"
SMALLNESS_BESOV = "besov"
SMALLNESS_VARIANTS = (SMALLNESS_KATO, SMALLNESS_CRITICAL, SMALLNESS_BESOV)


@dataclass
class SmallnessReport:
    """One smallness-condition evaluation: the measured left-hand side
    against the calibrated threshold (None when the book is uncalibrated,
    in which case satisfied is None too)."""

    variant: str
    lhs: float
    threshold: Optional[float]
    satisfied: Optional[bool]
    horizon: float
    detail: dict

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "lhs": self.lhs,
            "threshold": self.threshold,
            "satisfied": self.satisfied,
            "horizon": self.horizon,
            "detail": dict(self.detail),
        }


def _heat_window_grid(u0: VectorField, horizon: float) -> np.ndarray:
    lat = u0.lattice
    t_min = lat.spacing**2
    t_max = horizon * 2.0 ** (-0.25)
    if horizon > lat.box_len**2 / 100.0:
        raise WindowError(
            f"horizon {horizon:g} exceeds the lattice validity window "
            f"L^2/100 = {lat.box_len**2 / 100.0:g}"
        )
    if t_max < t_min:
        raise WindowError(
            f"horizon {horizon:g} leaves no dyadic sample above the resolution "
            f"floor spacing^2 = {t_min:g}"
        )
    return dyadic_grid(t_max, t_min, per_octave=4)


def smallness_lhs(
    u0: VectorField, horizon: float, book: ExponentBook, variant: str = SMALLNESS_KATO
) -> SmallnessReport:
    """Evaluate one of the three smallness left-hand sides for datum u0
    over [0, horizon].

    * 'kato-window': horizon^horizon_exponent times the sup over the dyadic
      grid below the horizon of t^(alpha/2) ||e^{t Lap} u0||_{q_tilde}.
    * 'critical': the same sup with no horizon prefactor; requires a
      critical book (s = d/p - 1), where the quantity is scale-invariant.
    * 'besov': horizon^horizon_exponent times the heat-characterized Besov
      norm of smoothness -alpha and integrability q_tilde.

    The threshold comes from the book's calibration: delta for the first
    two variants, sigma for the Besov one.
    """
    if variant not in SMALLNESS_VARIANTS:
        raise ConfigError(
            f"unknown smallness variant {variant!r}; expected one of {SMALLNESS_VARIANTS}"
        )
    if not isinstance(u0, VectorField):
        raise DataError("smallness evaluation needs a VectorField datum")
    if not (horizon > 0):
        raise ConfigError(f"horizon must be positive, got {horizon}")

    prefactor = horizon**book.horizon_exponent
    if variant == SMALLNESS_BESOV:
        report = besov_norm_heat(u0, -book.alpha, book.q_tilde)
        lhs = prefactor * report.value
        threshold = book.sigma
        detail = {
            "prefactor": prefactor,
            "besov_value": report.value,
            "argmax_t": report.argmax_t,
            "smoothness": -book.alpha,
        }
    else:
        if variant == SMALLNESS_CRITICAL and not book.is_critical:
            raise ConfigError(
                "critical smallness variant requires s = d/p - 1; book has "
                f"s = {book.s:g}, d/p - 1 = {book.d / book.p - 1.0:g}"
            )
        grid = _heat_window_grid(u0, horizon)
        values = np.empty(grid.shape)
        for j, t in enumerate(grid):
            values[j] = t ** (book.alpha / 2.0) * lebesgue_norm(
                heat_flow(u0, float(t)), book.q_tilde
            )
        sup = float(values.max())
        arg = float(grid[int(values.argmax())])
        if variant == SMALLNESS_KATO:
            lhs = prefactor * sup
        else:
            lhs = sup
        threshold = book.delta
        detail = {
            "prefactor": prefactor if variant == SMALLNESS_KATO else 1.0,
            "sup_value": sup,
            "argmax_t": arg,
            "grid_points": int(grid.size),
        }

    satisfied = None if threshold is None else bool(lhs <= threshold)
    return SmallnessReport(
        variant=variant,
        lhs=float(lhs),
        threshold=threshold,
        satisfied=satisfied,
        horizon=float(horizon),
        detail=detail,
    )


# ---------------------------------------------------------------------------
# Calibration


@dataclass(frozen=True)
class CorpusSpec:
    """Random trajectory corpus for threshold calibration: `pairs` heat
    flows of independent band-limited divergence-free data on a shared
    lattice and mesh. The box must satisfy the lattice validity window
    horizon <= box_len^2 / 100 because the smallness forms are evaluated
    on the corpus data while measuring the equivalence constant."""

    seed: int = 11
    pairs: int = 20
    d: int = 2
    n: int = 32
    box_len: float = 4.0 * np.pi
    horizon: float = 1.0
    mesh_nodes: int = 16
    quad_nodes: int = 16
    k_min: int = 1
    k_max: int = 4

    def to_dict(self) -> dict:
        return asdict(self)


def _corpus_datum(corpus: CorpusSpec, index: int, lattice) -> VectorField:
    spec = DatumSpec(
        kind="random_band",
        amplitude=1.0,
        seed=corpus.seed + index,
        k_min=corpus.k_min,
        k_max=corpus.k_max,
        divergence_free=True,
    )
    return realize_datum(spec, lattice)


def calibrate_thresholds(
    book: ExponentBook,
    corpus: Optional[CorpusSpec] = None,
    path: Optional[str] = None,
) -> ExponentBook:
    """Measure the bilinear constant on a random corpus and derive the
    smallness thresholds.

    c_hat is twice the largest Kato-target ratio
    ||B(u, v)||_K / (T^horizon_exponent ||u||_K ||v||_K) over the corpus
    pairs; delta = 1/(4 c_hat). sigma transfers delta to the Besov form
    through the smallest measured quotient of the Besov lhs over the
    Kato-window lhs on the corpus data (the discrete equivalence
    constant). The result is deterministic in the corpus seed, and the
    persisted JSON has no volatile fields, so recalibration reproduces
    the file byte for byte.
    """
    if corpus is None:
        corpus = CorpusSpec(d=book.d)
    if corpus.pairs < 20:
        raise CalibrationError(
            f"calibration corpus needs at least 20 pairs, got {corpus.pairs}"
        )
    if corpus.d != book.d:
        raise CalibrationError(
            f"corpus dimension {corpus.d} does not match book dimension {book.d}"
        )

    lattice = make_lattice(corpus.d, corpus.n, corpus.box_len)
    mesh = quadratic_mesh(corpus.horizon, corpus.mesh_nodes)
    quad = QuadratureSpec(
        node_count=corpus.quad_nodes, gamma=book.gamma_kato, theta=book.alpha
    )

    max_ratio = 0.0
    equiv = np.inf
    for i in range(corpus.pairs):
        u0 = _corpus_datum(corpus, 2 * i, lattice)
        v0 = _corpus_datum(corpus, 2 * i + 1, lattice)
        u_traj = heat_trajectory(u0, mesh)
        v_traj = heat_trajectory(v0, mesh)
        report = bilinear_estimate_report(
            u_traj, v_traj, book, target=TARGET_KATO, quad=quad, refine=False
        )
        max_ratio = max(max_ratio, report.ratio)
        for datum in (u0, v0):
            kato_lhs = smallness_lhs(datum, corpus.horizon, book, SMALLNESS_KATO).lhs
            besov_lhs = smallness_lhs(datum, corpus.horizon, book, SMALLNESS_BESOV).lhs
            if kato_lhs > 0:
                equiv = min(equiv, besov_lhs / kato_lhs)

    if max_ratio <= 0 or not np.isfinite(max_ratio):
        raise CalibrationError(f"degenerate bilinear ratio {max_ratio} on corpus")
    if not np.isfinite(equiv):
        raise CalibrationError("could not measure the Besov/Kato equivalence constant")

    c_hat = 2.0 * max_ratio
    delta = 1.0 / (4.0 * c_hat)
    sigma = delta * equiv

    payload = {
        "book": book.key,
        "c_hat": c_hat,
        "delta": delta,
        "sigma": sigma,
        "equiv_constant": equiv,
        "corpus": corpus.to_dict(),
    }
    digest = sha256_hex(canonical_json(payload))
    payload["digest"] = digest
    if path is not None:
        Path(path).write_text(canonical_json(payload) + "\n")
    return book.with_calibration(c_hat, delta, sigma, equiv, digest)


def load_calibration(book: ExponentBook, path: str) -> ExponentBook:
    """Attach a previously persisted calibration to a freshly built book."""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CalibrationError(f"unreadable calibration file {path}: {exc}") from exc
    if payload.get("book") != book.key:
        raise CalibrationError(
            f"calibration file is for book {payload.get('book')!r}, "
            f"not {book.key!r}"
        )
    check = {k: v for k, v in payload.items() if k != "digest"}
    if sha256_hex(canonical_json(check)) != payload.get("digest"):
        raise CalibrationError(f"calibration file {path} fails its digest check")
    return book.with_calibration(
        payload["c_hat"],
        payload["delta"],
        payload["sigma"],
        payload["equiv_constant"],
        payload["digest"],
    )


# ---------------------------------------------------------------------------
# The assembled solver


@dataclass
class MildSolution:
    """Converged mild solution with its construction record."""

    trajectory: Trajectory
    book: ExponentBook
    trace: PicardTrace
    smallness: SmallnessReport
    eta: float
    quad: QuadratureSpec
    divergence_defects: np.ndarray
    early_values: np.ndarray
    early_ok: bool
    ball_ok: bool

    def manifest(self) -> dict:
        return {
            "book": book_to_dict(self.book),
            "times": [float(t) for t in self.trajectory.times],
            "trace": self.trace.to_dict(),
            "smallness": self.smallness.to_dict(),
            "eta": self.eta,
            "quad": asdict(self.quad),
            "divergence_defects": [float(v) for v in self.divergence_defects],
            "early_values": [float(v) for v in self.early_values],
            "early_ok": self.early_ok,
            "ball_ok": self.ball_ok,
        }


def _check_datum(u0: VectorField):
    if not isinstance(u0, VectorField):
        raise DataError("solver needs a VectorField datum")
    scale = float(np.abs(u0.data).max())
    if scale == 0.0:
        return
    defect = divergence_defect(u0)
    if defect > 1e-8:
        raise DataError(
            f"datum is not divergence-free: relative defect {defect:.3g} > 1e-08"
        )
    d = u0.lattice.d
    mean = np.abs(u0.data.mean(axis=tuple(range(1, 1 + d)))).max()
    if mean > 1e-10 * scale:
        raise DataError(
            f"datum must be mean-free: relative mean {mean / scale:.3g} > 1e-10"
        )


def solve_mild(
    u0: VectorField,
    horizon: float,
    book: ExponentBook,
    mesh_nodes: int = 32,
    quad: Optional[QuadratureSpec] = None,
    tol: float = 1e-9,
    max_iter: int = 100,
    override_smallness: bool = False,
    smallness_variant: str = SMALLNESS_KATO,
    start: str = "heat-flow",
) -> MildSolution:
    """Run the Picard construction for datum u0 on [0, horizon].

    The governing norm is the Kato norm of the book; the homogeneous
    Sobolev sup-norm rides along as the auxiliary trace column. The
    smallness condition is checked first and refusal raises
    SmallnessError unless override_smallness is set (deliberately
    unguarded runs are how the divergence regime is exhibited).
    start selects the initial iterate: 'heat-flow' (the default x_0 = y)
    or 'zero'; in the contraction regime both reach the same fixed point,
    which is the uniqueness probe.
    """
    if not book.is_calibrated:
        raise CalibrationError(
            "book has no calibrated thresholds; run calibrate_thresholds first"
        )
    if mesh_nodes < 4:
        raise ConfigError(f"mesh needs at least 4 nodes, got {mesh_nodes}")
    _check_datum(u0)

    smallness = smallness_lhs(u0, horizon, book, smallness_variant)
    if smallness.satisfied is False and not override_smallness:
        raise SmallnessError(
            f"smallness condition failed: lhs {smallness.lhs:.6g} > "
            f"threshold {smallness.threshold:.6g} "
            f"(variant {smallness.variant}); pass override_smallness=True "
            "to run anyway"
        )

    if start not in ("heat-flow", "zero"):
        raise ConfigError(f"start must be 'heat-flow' or 'zero', got {start!r}")
    mesh = quadratic_mesh(horizon, mesh_nodes)
    y = heat_trajectory(u0, mesh)
    x0 = None
    if start == "zero":
        x0 = Trajectory(
            u0.lattice, mesh, [f * 0.0 for f in y.fields]
        )
    if quad is None:
        quad = QuadratureSpec(node_count=32, gamma=book.gamma_kato, theta=book.alpha)
    eta = book.c_hat * horizon**book.horizon_exponent

    def governing(traj: Trajectory) -> float:
        return kato_norm(traj, book.q, book.q_tilde).value

    def auxiliary(traj: Trajectory) -> float:
        return n_norm(traj, book.s, book.p).value

    solution_traj, trace = abstract_fixed_point(
        y,
        lambda a, b: bilinear_trajectory(a, b, quad),
        eta,
        tol=tol,
        max_iter=max_iter,
        norm=governing,
        aux_norm=auxiliary,
        x0=x0,
    )

    defects = np.array([divergence_defect(f) for f in solution_traj.fields])
    head = min(5, len(solution_traj))
    early = np.array(
        [
            sobolev_norm(solution_traj.fields[j] - y.fields[j], book.s, book.p)
            for j in range(head)
        ]
    )
    early_ok = bool(np.all(np.diff(early) >= -1e-12 * max(1.0, early.max())))
    ball_ok = bool(trace.norms[-1] <= 0.5 / eta + trace.threshold)

    return MildSolution(
        trajectory=solution_traj,
        book=book,
        trace=trace,
        smallness=smallness,
        eta=eta,
        quad=quad,
        divergence_defects=defects,
        early_values=early,
        early_ok=early_ok,
        ball_ok=ball_ok,
    )


def save_solution(solution: MildSolution, out_dir) -> None:
    """Persist a solution as manifest.json plus one binary field per node."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_text(canonical_json(solution.manifest()) + "\n")
    for j, field in enumerate(solution.trajectory.fields):
        save_field(field, out / f"node_{j:04d}.field")


# ---------------------------------------------------------------------------
# Post-solve analyses


@dataclass
class LadderReport:
    """Weighted-integrability table: per r, the sup over nodes of
    t^{(d/2)(1/q - 1/r)} ||u(t)||_{L^r}."""

    r_values: list
    weights: list
    sups: list
    argmax_times: list
    early_ok: list

    def to_dict(self) -> dict:
        return {
            "r_values": self.r_values,
            "weights": self.weights,
            "sups": self.sups,
            "argmax_times": self.argmax_times,
            "early_ok": self.early_ok,
        }


def regularity_ladder(solution: MildSolution, r_list: Sequence[float]) -> LadderReport:
    """Evaluate the higher-integrability ladder on a converged solution.

    Every r must exceed max(p, q). The early_ok flag per r records that
    the weighted values do not peak at the very first node, i.e. the
    weighted quantity stays bounded toward t -> 0.
    """
    if not solution.trace.converged:
        raise ConfigError("ladder requires a converged solution")
    book = solution.book
    floor = max(book.p, book.q)
    traj = solution.trajectory
    r_values, weights, sups, argmaxes, early = [], [], [], [], []
    for r in r_list:
        r = float(r)
        if not (r > floor):
            raise ConfigError(
                f"ladder exponent must exceed max(p, q) = {floor:g}, got {r:g}"
            )
        weight = (book.d / 2.0) * (1.0 / book.q - 1.0 / r)
        values = np.array(
            [
                t**weight * lebesgue_norm(f, r)
                for t, f in zip(traj.times, traj.fields)
            ]
        )
        if not np.isfinite(values).all():
            raise DataError(f"non-finite ladder values at r = {r:g}")
        idx = int(values.argmax())
        r_values.append(r)
        weights.append(weight)
        sups.append(float(values.max()))
        argmaxes.append(float(traj.times[idx]))
        early.append(bool(idx > 0 or values.max() == 0.0))
    return LadderReport(r_values, weights, sups, argmaxes, early)


@dataclass
class FluctuationReport:
    """Sup over nodes of the critical-regularity Sobolev norm of the
    fluctuation w = u - e^{t Lap} u0, one row per integrability p_tilde."""

    p_tilde_values: list
    smoothness: list
    sups: list

    def to_dict(self) -> dict:
        return {
            "p_tilde_values": self.p_tilde_values,
            "smoothness": self.smoothness,
            "sups": self.sups,
        }


def fluctuation_analysis(
    solution: MildSolution, u0: VectorField, p_tilde_list: Sequence[float]
) -> FluctuationReport:
    """Measure the heat-flow fluctuation of a critical solution in the
    scaling-matched Sobolev norms.

    Requires a critical book (s = d/p - 1) and every p_tilde above
    max(p, d)/2. For each p_tilde the smoothness is d/p_tilde - 1.
    """
    book = solution.book
    if not book.is_critical:
        raise ConfigError(
            "fluctuation analysis requires the critical book s = d/p - 1; "
            f"got s = {book.s:g}"
        )
    floor = max(book.p, float(book.d)) / 2.0
    traj = solution.trajectory
    fluctuations = [
        traj.fields[j] - heat_flow(u0, float(t)) for j, t in enumerate(traj.times)
    ]
    p_values, smooth, sups = [], [], []
    for p_tilde in p_tilde_list:
        p_tilde = float(p_tilde)
        if not (p_tilde > floor):
            raise ConfigError(
                f"fluctuation exponent must exceed max(p, d)/2 = {floor:g}, "
                f"got {p_tilde:g}"
            )
        s_tilde = book.d / p_tilde - 1.0
        values = np.array([sobolev_norm(w, s_tilde, p_tilde) for w in fluctuations])
        if not np.isfinite(values).all():
            raise DataError(f"non-finite fluctuation values at p_tilde = {p_tilde:g}")
        p_values.append(p_tilde)
        smooth.append(s_tilde)
        sups.append(float(values.max()))
    return FluctuationReport(p_values, smooth, sups)
