"""Pivot-chain driver: configuration, sampling clock, checkpoints.

A chain is single-threaded and owns its walk, occupancy table and RNG
counter.  The logical state is (walk, rng draw counter, attempt counters,
sampling phase); the occupancy table is a rebuildable cache and is not part
of it.  Two engines exist: the jitted kernel (default) and the pure-Python
reference; both consume the same RNG stream and produce identical chains.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels as K
from .rng import MASK64, SplitMix64
from .walk import FULL_PLANE, HALF_PLANE, LatticeWalk, make_rod, pivot_once

# attempts per block while equilibrating adaptively; fixed so that both
# engines stop at the same attempt count
_EQ_BLOCK = 256


class CheckpointError(Exception):
    """Raised for corrupted, truncated or version-mismatched checkpoints."""


@dataclass(frozen=True)
class ChainConfig:
    n_steps: int
    constraint: str = FULL_PLANE
    sample_interval: int = 100  # attempted pivots between retained samples
    equilibration: Optional[int] = None  # attempts; None = until 10*N accepted
    seed: int = 0

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.sample_interval < 1:
            raise ValueError("sample_interval must be >= 1")
        if self.equilibration is not None and self.equilibration < 0:
            raise ValueError("equilibration must be >= 0")
        if self.constraint not in (FULL_PLANE, HALF_PLANE):
            raise ValueError(f"unknown constraint {self.constraint!r}")


@dataclass
class ChainStats:
    attempted: int = 0
    accepted: int = 0
    samples: int = 0

    @property
    def acceptance_fraction(self) -> float:
        return self.accepted / self.attempted if self.attempted else 0.0


class PivotChain:
    """A running pivot chain with a deterministic counter-based RNG."""

    def __init__(self, config: ChainConfig, engine: str = "kernel"):
        if engine not in ("kernel", "python"):
            raise ValueError(f"unknown engine {engine!r}")
        self.config = config
        self.engine = engine
        n = config.n_steps
        direction = (0, 1) if config.constraint == HALF_PLANE else (1, 0)
        rod = make_rod(n, direction)
        self.xs = rod.xs.copy()
        self.ys = rod.ys.copy()
        self.rng = SplitMix64(config.seed)
        self.attempted = 0
        self.accepted = 0
        self.samples_emitted = 0
        self.phase = 0  # attempts since the last sample tick
        self.equilibrated = config.equilibration == 0
        self.eq_attempts = 0
        self._halfplane = config.constraint == HALF_PLANE
        self._scratch_x = np.empty(n + 1, dtype=np.int64)
        self._scratch_y = np.empty(n + 1, dtype=np.int64)
        self._keys, self._idxs = K.new_table(n)
        self._mask = len(self._keys) - 1
        self._inserted = K._rebuild_table(self._keys, self._idxs, self._mask, self.xs, self.ys)
        self._pywalk = LatticeWalk(self.xs, self.ys, validate=False) if engine == "python" else None

    # -- state access -----------------------------------------------------

    def walk(self) -> LatticeWalk:
        return LatticeWalk(self.xs.copy(), self.ys.copy(), validate=False)

    def stats(self) -> ChainStats:
        return ChainStats(self.attempted, self.accepted, self.samples_emitted)

    # -- advancing ---------------------------------------------------------

    def advance(self, n_attempts: int) -> int:
        """Run attempts without sampling.  Returns accepted count."""
        if n_attempts <= 0:
            return 0
        if self.engine == "python":
            acc = 0
            for _ in range(n_attempts):
                acc += pivot_once(self._pywalk, self.rng, self.config.constraint)
            self.xs = self._pywalk.xs
            self.ys = self._pywalk.ys
        else:
            acc, draws, self._inserted = K.advance(
                self.xs, self.ys, self._keys, self._idxs, self._mask,
                self._inserted, self._halfplane,
                np.uint64(self.rng.seed), self.rng.draws, n_attempts,
                self._scratch_x, self._scratch_y,
            )
            acc = int(acc)
            self.rng.jump_to(int(draws))
        self.attempted += n_attempts
        self.accepted += acc
        return acc

    def equilibrate(self) -> int:
        """Discard the warm-up phase.  Returns attempts consumed.

        With an explicit ``equilibration`` the warm-up is that many attempts;
        otherwise it runs in fixed blocks until 10*N pivots were accepted,
        which is deterministic given the seed.
        """
        if self.equilibrated:
            return self.eq_attempts
        if self.attempted != 0:
            raise RuntimeError("equilibrate() must come before sampling")
        if self.config.equilibration is not None:
            self.advance(self.config.equilibration)
        else:
            target = 10 * self.config.n_steps
            while self.accepted < target:
                self.advance(_EQ_BLOCK)
        self.eq_attempts = self.attempted
        self.equilibrated = True
        return self.eq_attempts

    def run(self, attempts: int, visitor: Optional[Callable] = None) -> ChainStats:
        """Equilibrate if needed, then sample every ``sample_interval``
        attempts, invoking ``visitor(chain)`` on each retained sample.

        ``attempts`` counts every attempted pivot including equilibration.
        """
        self.equilibrate()
        interval = self.config.sample_interval
        remaining = attempts - self.attempted
        while remaining > 0:
            step = min(interval - self.phase, remaining)
            self.advance(step)
            self.phase += step
            remaining -= step
            if self.phase == interval:
                self.phase = 0
                self.samples_emitted += 1
                if visitor is not None:
                    visitor(self)
        return self.stats()

    # -- bulk kernel paths (kernel engine only) -----------------------------

    def _require_kernel(self):
        if self.engine != "kernel":
            raise RuntimeError("bulk collection requires the kernel engine")

    def collect_filtered(self, dcode: int, ip: np.ndarray, fp: np.ndarray,
                         n_attempts: int, out_ord, out_x, out_y, out_lam) -> tuple:
        """Advance ``n_attempts``, keeping samples passing the domain filter.

        Returns (n_pass, n_samples).  Buffers must hold n_attempts /
        sample_interval entries.
        """
        self._require_kernel()
        if not self.equilibrated:
            raise RuntimeError("equilibrate() first")
        npass, nsamp, acc, draws, self._inserted, self.phase = K.collect_samples(
            self.xs, self.ys, self._keys, self._idxs, self._mask,
            self._inserted, self._halfplane,
            np.uint64(self.rng.seed), self.rng.draws,
            n_attempts, self.config.sample_interval, self.phase,
            self.samples_emitted, dcode, ip, fp,
            out_ord, out_x, out_y, out_lam,
            self._scratch_x, self._scratch_y,
        )
        self.rng.jump_to(int(draws))
        self.attempted += n_attempts
        self.accepted += int(acc)
        self.samples_emitted += int(nsamp)
        return int(npass), int(nsamp)

    def count_one_side(self, n_attempts: int, *, tangent=None, theta_deg=None) -> tuple:
        """Advance ``n_attempts`` counting samples strictly above the line.

        Returns (hits, n_samples).  ``tangent=(p, q)`` selects the exact
        integer side test; otherwise the float test at ``theta_deg`` is used.
        """
        self._require_kernel()
        if not self.equilibrated:
            raise RuntimeError("equilibrate() first")
        if tangent is not None:
            exact, p, q = True, int(tangent[0]), int(tangent[1])
            sin_t = cos_t = 0.0
        else:
            exact, p, q = False, 0, 0
            th = np.radians(theta_deg)
            sin_t, cos_t = float(np.sin(th)), float(np.cos(th))
        hits, nsamp, acc, draws, self._inserted, self.phase = K.count_one_side(
            self.xs, self.ys, self._keys, self._idxs, self._mask,
            self._inserted, self._halfplane,
            np.uint64(self.rng.seed), self.rng.draws,
            n_attempts, self.config.sample_interval, self.phase,
            exact, p, q, sin_t, cos_t,
            self._scratch_x, self._scratch_y,
        )
        self.rng.jump_to(int(draws))
        self.attempted += n_attempts
        self.accepted += int(acc)
        self.samples_emitted += int(nsamp)
        return int(hits), int(nsamp)

    # -- checkpointing -------------------------------------------------------

    CHECKPOINT_FORMAT = "sawdilate-chain-checkpoint"
    CHECKPOINT_VERSION = 1

    def state_dict(self) -> dict:
        return {
            "format": self.CHECKPOINT_FORMAT,
            "version": self.CHECKPOINT_VERSION,
            "n_steps": self.config.n_steps,
            "constraint": self.config.constraint,
            "sample_interval": self.config.sample_interval,
            "equilibration": self.config.equilibration,
            "seed": self.config.seed & MASK64,
            "rng_draws": self.rng.draws,
            "attempted": self.attempted,
            "accepted": self.accepted,
            "samples_emitted": self.samples_emitted,
            "phase": self.phase,
            "equilibrated": self.equilibrated,
            "eq_attempts": self.eq_attempts,
            "xs": self.xs.tolist(),
            "ys": self.ys.tolist(),
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.state_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_state_dict(cls, state: dict, engine: str = "kernel") -> "PivotChain":
        try:
            if state["format"] != cls.CHECKPOINT_FORMAT:
                raise CheckpointError(f"not a chain checkpoint: {state['format']!r}")
            if state["version"] != cls.CHECKPOINT_VERSION:
                raise CheckpointError(f"unsupported checkpoint version {state['version']}")
            config = ChainConfig(
                n_steps=state["n_steps"],
                constraint=state["constraint"],
                sample_interval=state["sample_interval"],
                equilibration=state["equilibration"],
                seed=state["seed"],
            )
            chain = cls(config, engine=engine)
            xs = np.asarray(state["xs"], dtype=np.int64)
            ys = np.asarray(state["ys"], dtype=np.int64)
            if len(xs) != config.n_steps + 1 or len(ys) != config.n_steps + 1:
                raise CheckpointError("site arrays do not match n_steps")
            walk = LatticeWalk(xs, ys)  # validates self-avoidance and anchor
            chain.xs = walk.xs
            chain.ys = walk.ys
            chain._inserted = K._rebuild_table(chain._keys, chain._idxs, chain._mask, chain.xs, chain.ys)
            if chain._pywalk is not None:
                chain._pywalk = LatticeWalk(chain.xs, chain.ys, validate=False)
            chain.rng.jump_to(state["rng_draws"])
            chain.attempted = state["attempted"]
            chain.accepted = state["accepted"]
            chain.samples_emitted = state["samples_emitted"]
            chain.phase = state["phase"]
            chain.equilibrated = state["equilibrated"]
            chain.eq_attempts = state["eq_attempts"]
        except CheckpointError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from exc
        return chain

    @classmethod
    def load(cls, path, engine: str = "kernel") -> "PivotChain":
        try:
            with open(path) as fh:
                state = json.load(fh)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
        if not isinstance(state, dict):
            raise CheckpointError(f"unreadable checkpoint {path}: not a mapping")
        return cls.from_state_dict(state, engine=engine)


def run_chain(config: ChainConfig, visitor: Optional[Callable], attempts: int,
              engine: str = "kernel") -> ChainStats:
    """Convenience wrapper: fresh chain, equilibrate, sample, return stats."""
    chain = PivotChain(config, engine=engine)
    return chain.run(attempts, visitor)
