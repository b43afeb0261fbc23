"""Config-driven experiments: error scaling, SWAP-degradation sweep, coefficient scan.

Every (F, theta) cell draws its channel, input states and shots from
``SeedSequence(seed, spawn_key=(iF, itheta, purpose))`` so results do not
depend on worker count or scheduling order.

All methods in a cell read one shared shot corpus over the 15 (for n=1)
circuit variants of the two-design plan: ``direct`` uses only the
untwirled channel circuit, ``no_twirl`` adds the measure-and-prepare
circuits, ``pauli_mixing`` uses the mixing-only subset and ``two_design``
uses all of them. A method at ``N`` shots reads the first ``floor(p_i N)``
shots of each variant's stream, so comparisons are not artifacts of
independent sampling.

The corpus stores, per variant stream, the number of +1 outcomes in each
prefix that any (method, N, c) combination reads. These prefix counts are
drawn as successive binomial increments, which has exactly the law of
storing every single shot and counting afterwards.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import calibrate
from .channels import vec
from .noise import random_channel_targeting, swap_degraded_resource, teleportation_channel
from .pauli import PauliOperator
from .qpd import QpdPlan, allocate, build_plan
from .states import haar_pure_state
from .twirling import two_design

SCHEMA_VERSION = 1
KINDS = ("error_scaling", "swap_sweep", "coeff_scan", "verify")
METHODS = ("direct", "no_twirl", "pauli_mixing", "two_design")

# spawn-key purposes
_SETUP, _SHOTS, _CALIB = 0, 1, 2


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    n: int = 1
    fidelities: list[float] = field(default_factory=lambda: [0.55, 0.7, 0.9])
    thetas: list[float] = field(default_factory=lambda: [0.0, 0.15, 0.3])
    num_states: int = 100
    observables: list[str] = field(default_factory=lambda: ["X", "Z"])
    shot_grid: list[int] = field(default_factory=lambda: [10**k for k in range(2, 7)])
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    calibration_shots: int | None = None
    output: str | None = None
    workers: int = 1
    # swap sweep
    per_swap_noise: float = 0.02
    max_swaps: int = 60
    # coefficient scan
    coeff_shots: int = 4000
    c_grid_points: int = 101
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not isinstance(self.seed, int):
            raise ValueError("seed must be an integer")
        for name in ("fidelities", "thetas", "observables", "shot_grid", "methods"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if any(b <= a for a, b in zip(self.shot_grid, self.shot_grid[1:])):
            raise ValueError("shot_grid must be strictly increasing")
        if self.shot_grid[0] < 1:
            raise ValueError("shot_grid entries must be positive")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ValueError(f"unknown methods {sorted(unknown)}")
        for label in self.observables:
            op = PauliOperator.from_label(label)
            if op.n != self.n or not op.is_hermitian:
                raise ValueError(f"observable {label!r} is not a Hermitian {self.n}-qubit Pauli")
        if self.num_states < 1 or self.workers < 1:
            raise ValueError("num_states and workers must be >= 1")
        if self.calibration_shots is not None and self.calibration_shots < 1:
            raise ValueError("calibration_shots must be >= 1 or null")
        if self.c_grid_points < 2:
            raise ValueError("c_grid_points must be >= 2")

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def c_grid(self) -> np.ndarray:
        return np.linspace(1.0, 2.0, self.c_grid_points)


@dataclass(frozen=True)
class ResultRow:
    method: str
    F_target: float
    theta: float
    N: int
    observable: str
    mean_abs_error: float
    stderr_of_mean: float
    num_states: int
    seed: int


RESULT_FIELDS = tuple(f.name for f in dataclasses.fields(ResultRow))


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_csv(rows, fields=None) -> str:
    rows = list(rows)
    if fields is None:
        fields = tuple(f.name for f in dataclasses.fields(rows[0])) if rows else RESULT_FIELDS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in rows:
        w.writerow([_fmt(getattr(r, k)) for k in fields])
    return buf.getvalue()


def write_rows(rows, path, fields=None) -> None:
    Path(path).write_text(rows_to_csv(rows, fields))


def read_result_rows(path) -> list[ResultRow]:
    types = {f.name: f.type for f in dataclasses.fields(ResultRow)}
    conv = {"float": float, "int": int, "str": str}
    with open(path, newline="") as fh:
        return [ResultRow(**{k: conv[types[k]](v) for k, v in row.items()}) for row in csv.DictReader(fh)]


# -- methods as weightings of the shared variant set ----------------------------------


@dataclass(frozen=True)
class MethodWeights:
    probs: np.ndarray
    signs: np.ndarray
    kappa: float


def method_weights(method: str, n: int, num_channel: int, F_coef: float, c: float | None = None) -> MethodWeights:
    """Variant probabilities of ``method`` over the shared two-design variant list.

    Variants ``0 .. num_channel - 1`` are two-design channel circuits (index
    ``4**n * a + b``, mixing element ``a`` times Pauli ``b``) followed by the
    ``2**n + 1`` measure-and-prepare circuits. ``c`` overrides the QPD
    coefficient ``c1 = 1/F_coef``.
    """
    nv = num_channel + 2**n + 1
    probs = np.zeros(nv)
    signs = np.ones(nv, dtype=np.int64)
    if method == "direct":
        probs[0] = 1.0
        return MethodWeights(probs, signs, 1.0)
    chosen = {
        "two_design": list(range(num_channel)),
        "pauli_mixing": list(range(0, num_channel, 4**n)),
        "no_twirl": [0],
    }.get(method)
    if chosen is None:
        raise ValueError(f"unknown method {method!r}")
    c1 = 1 / F_coef if c is None else float(c)
    c2 = 1 - c1
    kappa = abs(c1) + abs(c2)
    signs[:num_channel] = 1 if c1 >= 0 else -1
    signs[num_channel:] = 1 if c2 > 0 else -1
    probs[chosen] = abs(c1) / kappa / len(chosen)
    probs[num_channel:] = abs(c2) / kappa / (2**n + 1)
    return MethodWeights(probs, signs, kappa)


# -- shot corpus -----------------------------------------------------------------------


@dataclass
class CellCorpus:
    """Prefix tallies for one (F, theta) cell.

    ``plus[v]`` has shape ``(num_states, num_observables, len(lengths[v]))``
    and counts +1 outcomes among the first ``lengths[v][j]`` shots of the
    stream for variant ``v``.
    """

    F_target: float
    theta: float
    F_coef: float
    ideal: np.ndarray  # (num_states, num_observables)
    lengths: list[np.ndarray]
    plus: list[np.ndarray]
    n: int = 1
    channel_params: dict = field(default_factory=dict)

    def prefix_plus(self, v: int, shots: int) -> np.ndarray:
        j = int(np.searchsorted(self.lengths[v], shots))
        if j >= len(self.lengths[v]) or self.lengths[v][j] != shots:
            raise KeyError(f"variant {v} has no stored prefix of length {shots}")
        return self.plus[v][:, :, j]


def _cell_seed(seed: int, i: int, j: int, purpose: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(i, j, purpose))


def cell_channel(cfg: ExperimentConfig, i: int, j: int):
    """The random noise channel of cell ``(i, j)`` and the generator that drew it."""
    rng = np.random.default_rng(_cell_seed(cfg.seed, i, j, _SETUP))
    channel, params = random_channel_targeting(cfg.fidelities[i], cfg.thetas[j], rng)
    return channel, params, rng


def cell_calibration(cfg: ExperimentConfig, i: int, j: int, channel, shots: int):
    return calibrate(channel, two_design(cfg.n), shots, _cell_seed(cfg.seed, i, j, _CALIB))


def _cell_plan(cfg: ExperimentConfig, i: int, j: int):
    channel, params, rng = cell_channel(cfg, i, j)
    states = [haar_pure_state(cfg.n, rng) for _ in range(cfg.num_states)]
    ensemble = two_design(cfg.n)
    if cfg.calibration_shots is None:
        F_coef = channel.entanglement_fidelity()
    else:
        F_coef = cell_calibration(cfg, i, j, channel, cfg.calibration_shots).F_hat
    plan = build_plan(channel, ensemble, F_coef)
    return plan, states, params


def _required_lengths(cfg: ExperimentConfig, plan: QpdPlan, shot_counts, coefficients) -> list[np.ndarray]:
    need = [{0} for _ in plan.variants]
    for method in cfg.methods:
        for c in coefficients:
            w = method_weights(method, plan.n, len(plan.ensemble), plan.F, c)
            for N in shot_counts:
                for v, k in enumerate(allocate(w.probs, N)):
                    need[v].add(int(k))
    return [np.array(sorted(s), dtype=np.int64) for s in need]


def build_cell_corpus(cfg: ExperimentConfig, i: int, j: int, shot_counts, coefficients=(None,)) -> CellCorpus:
    plan, states, params = _cell_plan(cfg, i, j)
    obs = [PauliOperator.from_label(o).matrix() for o in cfg.observables]
    rho_vecs = np.array([vec(s.mat) for s in states])  # (S, d^2)
    # e[s, o, v] = tr[O_o sigma_v(rho_s)]
    W = np.array([plan.observable_weights(O) for O in obs])  # (O, V, d^2)
    e = np.clip(np.real(np.einsum("ovk,sk->sov", W, rho_vecs)), -1.0, 1.0)
    ideal = np.real(np.einsum("oij,sji->so", np.array(obs), np.array([s.mat for s in states])))
    p_plus = np.clip((1 + e) / 2, 0.0, 1.0)
    lengths = _required_lengths(cfg, plan, shot_counts, coefficients)
    rng = np.random.default_rng(_cell_seed(cfg.seed, i, j, _SHOTS))
    plus = []
    for v, L in enumerate(lengths):
        steps = np.diff(L)
        counts = np.zeros((len(states), len(obs), len(L)), dtype=np.int64)
        for k, step in enumerate(steps):
            counts[:, :, k + 1] = counts[:, :, k] + rng.binomial(int(step), p_plus[:, :, v])
        plus.append(counts)
    return CellCorpus(
        cfg.fidelities[i],
        cfg.thetas[j],
        float(plan.F),
        ideal,
        lengths,
        plus,
        cfg.n,
        params.to_dict(),
    )


def _cells(cfg: ExperimentConfig):
    return [(i, j) for i in range(len(cfg.fidelities)) for j in range(len(cfg.thetas))]


def _corpus_job(args):
    cfg_dict, i, j, shot_counts, coefficients = args
    return build_cell_corpus(ExperimentConfig.from_dict(cfg_dict), i, j, shot_counts, coefficients)


def build_corpus(cfg: ExperimentConfig, shot_counts, coefficients=(None,)) -> list[CellCorpus]:
    jobs = [(cfg.to_dict(), i, j, list(shot_counts), list(coefficients)) for i, j in _cells(cfg)]
    if cfg.workers == 1:
        return [_corpus_job(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(_corpus_job, jobs))


def save_corpus(cells: list[CellCorpus], path) -> None:
    arrays = {}
    meta = []
    for c, cell in enumerate(cells):
        meta.append(
            {
                "F_target": cell.F_target,
                "theta": cell.theta,
                "F_coef": cell.F_coef,
                "n": cell.n,
                "channel_params": cell.channel_params,
                "num_variants": len(cell.lengths),
            }
        )
        arrays[f"c{c}_ideal"] = cell.ideal
        for v, (L, P) in enumerate(zip(cell.lengths, cell.plus)):
            arrays[f"c{c}_v{v}_lengths"] = L
            arrays[f"c{c}_v{v}_plus"] = P
    arrays["meta"] = np.array(json.dumps(meta))
    with open(path, "wb") as fh:
        np.savez_compressed(fh, **arrays)


def load_corpus(path) -> list[CellCorpus]:
    with np.load(path) as data:
        meta = json.loads(str(data["meta"]))
        cells = []
        for c, m in enumerate(meta):
            nv = m["num_variants"]
            cells.append(
                CellCorpus(
                    m["F_target"],
                    m["theta"],
                    m["F_coef"],
                    data[f"c{c}_ideal"],
                    [data[f"c{c}_v{v}_lengths"] for v in range(nv)],
                    [data[f"c{c}_v{v}_plus"] for v in range(nv)],
                    m["n"],
                    m["channel_params"],
                )
            )
    return cells


def corpus_estimates(cell: CellCorpus, method: str, N: int, c: float | None = None) -> np.ndarray:
    """Estimates for every (state, observable) from stored prefix tallies."""
    n_ch = len(cell.lengths) - (2**cell.n + 1)
    w = method_weights(method, cell.n, n_ch, cell.F_coef, c)
    counts = allocate(w.probs, N)
    total = np.zeros(cell.ideal.shape)
    for v, k in enumerate(counts):
        if k:
            total += w.signs[v] * (2 * cell.prefix_plus(v, int(k)) - k)
    used = counts.sum()
    if used == 0:
        return np.full(cell.ideal.shape, np.nan)
    return w.kappa * total / used


def _summarize(method, cell, N, label, err, seed) -> ResultRow:
    S = err.shape[0]
    se = float(err.std(ddof=1) / np.sqrt(S)) if S > 1 else 0.0
    return ResultRow(method, float(cell.F_target), float(cell.theta), int(N), label, float(err.mean()), se, S, seed)


def postprocess_error_scaling(cells: list[CellCorpus], cfg: ExperimentConfig) -> list[ResultRow]:
    """ResultRows from the corpus alone: one row per observable plus an ``all`` row
    averaging each state's error over the observables."""
    rows = []
    for cell in cells:
        for method in cfg.methods:
            for N in cfg.shot_grid:
                err = np.abs(corpus_estimates(cell, method, N) - cell.ideal)
                for o, label in enumerate(cfg.observables):
                    rows.append(_summarize(method, cell, N, label, err[:, o], cfg.seed))
                rows.append(_summarize(method, cell, N, "all", err.mean(axis=1), cfg.seed))
    return rows


def run_error_scaling(cfg: ExperimentConfig, corpus_path=None) -> list[ResultRow]:
    cells = build_corpus(cfg, cfg.shot_grid)
    if corpus_path is not None:
        save_corpus(cells, corpus_path)
    return postprocess_error_scaling(cells, cfg)


# -- coefficient scan --------------------------------------------------------------------


@dataclass(frozen=True)
class CoeffScanRow:
    method: str
    F_target: float
    theta: float
    observable: str
    c: float
    mean_abs_error: float
    F_coef: float


@dataclass(frozen=True)
class CoeffSummary:
    method: str
    F_target: float
    theta: float
    observable: str
    c_opt: float
    c_com: float
    min_error: float


def run_coeff_scan(cfg: ExperimentConfig, corpus_path=None) -> list[CoeffScanRow]:
    grid = cfg.c_grid()
    qpd_methods = [m for m in cfg.methods if m != "direct"]
    scan_cfg = dataclasses.replace(cfg, methods=qpd_methods)
    cells = build_corpus(scan_cfg, [cfg.coeff_shots], list(grid))
    if corpus_path is not None:
        save_corpus(cells, corpus_path)
    rows = []
    for cell in cells:
        for method in qpd_methods:
            errs = np.array(
                [np.abs(corpus_estimates(cell, method, cfg.coeff_shots, c) - cell.ideal) for c in grid]
            )  # (C, S, O)
            labels = list(cfg.observables) + ["all"]
            per_label = [errs[:, :, o].mean(axis=1) for o in range(len(cfg.observables))]
            per_label.append(errs.mean(axis=(1, 2)))
            for label, curve in zip(labels, per_label):
                for c, m in zip(grid, curve):
                    rows.append(CoeffScanRow(method, cell.F_target, cell.theta, label, float(c), float(m), cell.F_coef))
    return rows


def summarize_coeff_scan(rows: list[CoeffScanRow]) -> list[CoeffSummary]:
    groups: dict[tuple, list[CoeffScanRow]] = {}
    for r in rows:
        groups.setdefault((r.method, r.F_target, r.theta, r.observable), []).append(r)
    out = []
    for (method, F, theta, obs), rs in groups.items():
        best = min(rs, key=lambda r: r.mean_abs_error)  # first minimum in grid order
        out.append(CoeffSummary(method, F, theta, obs, best.c, 1 / rs[0].F_coef, best.mean_abs_error))
    return out


# -- swap sweep ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SwapRow:
    k: int
    F_exact: float
    F_hat: float
    stderr: float


def run_swap_sweep(cfg: ExperimentConfig) -> list[SwapRow]:
    """Fidelity of teleportation through a Bell pair after ``k`` noisy SWAPs.

    ``F_hat`` comes from two-design calibration with ``calibration_shots``
    shots, or equals the exact value when that field is null.
    """
    rows = []
    ensemble = two_design(1)
    for k in range(cfg.max_swaps + 1):
        T = teleportation_channel(swap_degraded_resource(k, cfg.per_swap_noise))
        F = T.entanglement_fidelity()
        if cfg.calibration_shots is None:
            rows.append(SwapRow(k, F, F, 0.0))
        else:
            res = calibrate(T, ensemble, cfg.calibration_shots, np.random.SeedSequence(cfg.seed, spawn_key=(k,)))
            rows.append(SwapRow(k, F, res.F_hat, res.stderr))
    return rows


def threshold_crossing(rows: list[SwapRow], threshold: float = 0.5) -> int | None:
    """Smallest ``k`` whose estimated fidelity falls below ``threshold``."""
    for r in rows:
        if r.F_hat < threshold:
            return r.k
    return None
