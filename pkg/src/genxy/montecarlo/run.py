"""Run plans, the measurement loop, and checkpoint files.

Checkpoint format (version 1): a NumPy ``.npz`` archive holding

* ``header``: UTF-8 JSON with ``format``, ``version``, ``plan_hash``,
  ``sweep_count``, per-chain ``rng_state`` / ``cached_energy`` / ``width``
  / ``tune_counts``,
  the exchange generator state and exchange counters;
* ``theta_k``, ``phi_k``, ``weights_k``: angles and site weights of
  chain ``k`` (slot order);
* ``records_k``: measurements accumulated so far for slot ``k``.

Files are written to a temporary name and renamed into place.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ..lattice import SiteGraph, build
from ..model import GeneralizedXY, ModelSpec, ObservableSample, SpinConfiguration, SquareDitch
from .chain import (
    RECORD_FIELDS,
    ChainState,
    MonteCarloError,
    advance,
    replica_exchange_step,
    tune_width,
)

CHECKPOINT_FORMAT = "genxy-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class RunPlan:
    """Everything that determines a sample stream.

    ``thetas`` (strictly increasing) switches on replica exchange, one
    chain per temperature; otherwise the single chain runs at
    ``spec.beta``.  ``checkpoint_every`` does not enter the plan hash.
    """

    d: int
    L: int
    spec: ModelSpec
    therm: int = 1000
    sweeps: int = 10000
    stride: int = 1
    seed: int = 0
    thetas: Optional[tuple[float, ...]] = None
    checkpoint_every: int = 0
    cluster_every: int = 0
    exchange_every: int = 1
    tune_every: int = 20

    def __post_init__(self):
        errors = self.validate()
        if errors:
            raise MonteCarloError("; ".join(errors))
        if self.thetas is not None:
            object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))

    def validate(self) -> list[str]:
        errors = []
        if self.d not in (2, 3):
            errors.append(f"d must be 2 or 3, got {self.d}")
        if int(self.L) != self.L or self.L < 3:
            errors.append(f"L must be an integer >= 3, got {self.L}")
        for name in ("therm", "checkpoint_every", "cluster_every"):
            if getattr(self, name) < 0:
                errors.append(f"{name} must be >= 0")
        for name in ("sweeps", "stride", "exchange_every", "tune_every"):
            if getattr(self, name) < 1:
                errors.append(f"{name} must be >= 1")
        if self.thetas is not None:
            t = np.asarray(self.thetas, dtype=float)
            if t.size == 0 or np.any(t <= 0) or np.any(np.diff(t) <= 0):
                errors.append("temperature grid must be positive and strictly increasing")
        elif self.spec.beta <= 0:
            errors.append("beta must be > 0 without a temperature grid")
        return errors

    @property
    def betas(self) -> tuple[float, ...]:
        if self.thetas is None:
            return (self.spec.beta,)
        return tuple(1.0 / t for t in self.thetas)

    def geometry(self) -> SiteGraph:
        return build(self.d, self.L)

    def to_dict(self) -> dict:
        v = self.spec.variant
        out = asdict(self)
        out["spec"] = {
            "variant": type(v).__name__,
            "param": v.p if isinstance(v, GeneralizedXY) else v.epsilon,
            "beta": self.spec.beta,
        }
        out["thetas"] = list(self.thetas) if self.thetas is not None else None
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunPlan":
        data = dict(data)
        s = data.pop("spec")
        variant = GeneralizedXY(int(s["param"])) if s["variant"] == "GeneralizedXY" else SquareDitch(float(s["param"]))
        if data.get("thetas") is not None:
            data["thetas"] = tuple(data["thetas"])
        return cls(spec=ModelSpec(variant, float(s["beta"])), **data)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("checkpoint_every")
        blob = json.dumps(d, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass
class RunResult:
    plan: RunPlan
    betas: tuple[float, ...]
    samples: list[dict[str, np.ndarray]]
    sweep_count: int
    complete: bool
    exchange_attempts: np.ndarray = field(default_factory=lambda: np.zeros(0))
    exchange_accepts: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def series(self, name: str, k: int = 0) -> np.ndarray:
        return self.samples[k][name]

    def iter_samples(self, k: int = 0) -> Iterator[ObservableSample]:
        s = self.samples[k]
        ditch = isinstance(self.plan.spec.variant, SquareDitch)
        for i in range(s["u"].size):
            yield ObservableSample(
                u=float(s["u"][i]),
                m_xy=float(s["m_xy"][i]),
                m_p=float(s["m_p"][i]),
                rho=float(s["rho"][i]) if ditch else None,
            )


class _Runner:
    def __init__(self, plan: RunPlan):
        self.plan = plan
        geom = plan.geometry()
        seqs = np.random.SeedSequence(plan.seed).spawn(len(plan.betas) + 1)
        self.states = [
            ChainState.create(plan.spec.with_beta(b), geom, np.random.default_rng(sq))
            for b, sq in zip(plan.betas, seqs[:-1])
        ]
        self.ex_rng = np.random.default_rng(seqs[-1])
        n = len(self.states)
        self.records = [[] for _ in range(n)]
        self.ex_attempts = np.zeros(max(n - 1, 0), dtype=np.int64)
        self.ex_accepts = np.zeros(max(n - 1, 0), dtype=np.int64)
        self.tune_counts = np.zeros((n, 2), dtype=np.int64)
        self.sweep_count = 0

    def _next_stop(self, limit: int) -> int:
        p = self.plan
        sc = self.sweep_count
        stops = [limit]

        def nxt(every):
            return (sc // every + 1) * every

        if sc < p.therm:
            stops += [p.therm, nxt(p.tune_every)]
        if len(self.states) > 1:
            stops.append(nxt(p.exchange_every))
        if p.checkpoint_every:
            stops.append(nxt(p.checkpoint_every))
        return min(stops)

    def step(self, stop: int):
        p = self.plan
        chunk = stop - self.sweep_count
        first = self.sweep_count + 1
        measuring = self.sweep_count >= p.therm
        for k, st in enumerate(self.states):
            blk = advance(st, chunk, p.cluster_every)
            if measuring:
                idx = np.arange(first, stop + 1) - p.therm - 1
                self.records[k].append(blk.records[idx % p.stride == 0])
            else:
                # window statistics survive chunking, so checkpoints never alter tuning
                self.tune_counts[k] += (blk.accepted, blk.tried)
                if stop % p.tune_every == 0 or stop == p.therm:
                    tune_width(st, *self.tune_counts[k])
                    self.tune_counts[k] = 0
        self.sweep_count = stop
        if len(self.states) > 1 and stop % p.exchange_every == 0:
            parity = (stop // p.exchange_every) % 2
            acc = replica_exchange_step(self.states, self.ex_rng, parity)
            pairs = np.arange(parity, len(self.states) - 1, 2)
            self.ex_attempts[pairs] += 1
            self.ex_accepts[pairs] += np.asarray(acc, dtype=np.int64)

    def collected(self, k: int) -> np.ndarray:
        if not self.records[k]:
            return np.zeros((0, len(RECORD_FIELDS)))
        return np.concatenate(self.records[k], axis=0)

    def result(self, complete: bool) -> RunResult:
        samples = []
        for k in range(len(self.states)):
            arr = self.collected(k)
            samples.append({name: arr[:, c].copy() for c, name in enumerate(RECORD_FIELDS)})
        return RunResult(
            self.plan, self.plan.betas, samples, self.sweep_count, complete,
            self.ex_attempts.copy(), self.ex_accepts.copy(),
        )

    # checkpoints

    def save(self, path: Path):
        header = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "plan_hash": self.plan.hash(),
            "plan": self.plan.to_dict(),
            "sweep_count": self.sweep_count,
            "chains": [
                {
                    "rng_state": st.rng_state,
                    "cached_energy": st.cached_energy,
                    "width": st.width,
                    "tune_counts": self.tune_counts[k].tolist(),
                }
                for k, st in enumerate(self.states)
            ],
            "exchange_rng_state": self.ex_rng.bit_generator.state,
            "exchange_attempts": self.ex_attempts.tolist(),
            "exchange_accepts": self.ex_accepts.tolist(),
        }
        arrays = {"header": np.frombuffer(json.dumps(header).encode(), dtype=np.uint8)}
        for k, st in enumerate(self.states):
            arrays[f"theta_{k}"] = st.cfg.theta
            arrays[f"phi_{k}"] = st.cfg.phi
            arrays[f"weights_{k}"] = st.weights
            arrays[f"records_{k}"] = self.collected(k)
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=path.name, suffix=".tmp", dir=path.parent)
        try:
            with os.fdopen(fd, "wb") as fh:
                np.savez(fh, **arrays)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def load(self, path: Path):
        with np.load(path) as data:
            header = json.loads(bytes(data["header"]).decode())
            if header.get("format") != CHECKPOINT_FORMAT or header.get("version") != CHECKPOINT_VERSION:
                raise MonteCarloError(f"{path}: unsupported checkpoint format")
            if header["plan_hash"] != self.plan.hash():
                raise MonteCarloError(f"{path}: checkpoint belongs to a different plan")
            geom = self.states[0].geom
            for k, (st, info) in enumerate(zip(self.states, header["chains"])):
                st.cfg = SpinConfiguration(data[f"theta_{k}"], data[f"phi_{k}"], geom)
                # stored, not recomputed: numpy and the kernels may round differently
                st.weights = np.array(data[f"weights_{k}"])
                st.cached_energy = float(info["cached_energy"])
                st.width = float(info["width"])
                self.tune_counts[k] = info["tune_counts"]
                st.rng.bit_generator.state = info["rng_state"]
                st.sweep_count = header["sweep_count"]
                rec = data[f"records_{k}"]
                self.records[k] = [rec] if rec.size else []
        self.ex_rng.bit_generator.state = header["exchange_rng_state"]
        self.ex_attempts = np.asarray(header["exchange_attempts"], dtype=np.int64)
        self.ex_accepts = np.asarray(header["exchange_accepts"], dtype=np.int64)
        self.sweep_count = header["sweep_count"]


def read_checkpoint_header(path) -> dict:
    with np.load(path) as data:
        return json.loads(bytes(data["header"]).decode())


def run(
    plan: RunPlan,
    checkpoint: Optional[os.PathLike] = None,
    resume: bool = True,
    max_sweeps: Optional[int] = None,
) -> RunResult:
    """Execute ``plan``; deterministic in ``plan.seed``.

    With ``checkpoint`` set, state is written every ``plan.checkpoint_every``
    sweeps (and when stopping early), and an existing file is resumed from
    when ``resume`` is true.  ``max_sweeps`` stops after that many total
    sweeps and returns a partial result.
    """
    runner = _Runner(plan)
    path = Path(checkpoint) if checkpoint is not None else None
    if path is not None and resume and path.exists():
        runner.load(path)
    total = plan.therm + plan.sweeps
    limit = total if max_sweeps is None else min(total, max_sweeps)
    while runner.sweep_count < limit:
        stop = runner._next_stop(limit)
        runner.step(stop)
        if path is not None and plan.checkpoint_every and stop % plan.checkpoint_every == 0:
            runner.save(path)
    complete = runner.sweep_count >= total
    if path is not None and (not complete or plan.checkpoint_every):
        runner.save(path)
    return runner.result(complete)


def default_theta_grid(lo: float, hi: float, n: int) -> tuple[float, ...]:
    """Temperatures whose inverses are geometrically spaced."""
    if n == 1:
        return (float(lo),)
    betas = np.geomspace(1.0 / hi, 1.0 / lo, n)[::-1]
    return tuple(float(1.0 / b) for b in betas)


def record_stream_digest(result: RunResult) -> str:
    h = hashlib.sha256()
    for s in result.samples:
        for name in RECORD_FIELDS:
            h.update(np.ascontiguousarray(s[name]).tobytes())
    return h.hexdigest()


