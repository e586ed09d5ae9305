"""Synthetic pipeline-performance surfaces with tunable slot interaction.

A surface scores a pipeline as the sum of per-slot base values, pairwise
slot interactions scaled by ``interaction_scale`` and quadratic penalties for
real parameters away from their optimum. With zero interaction the surface is
additively separable, which is exactly the regime where slot-wise search is
sound.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .core import BLANK_ID, Catalog, ComponentSpec, ParamSpec, Pipeline, Slot, SlotRole
from .evaluation import EvalResult

ROLES_BY_DEPTH = {
    1: [SlotRole.PREDICTOR],
    2: [SlotRole.DATA_PREPROCESSOR, SlotRole.PREDICTOR],
    3: [SlotRole.DATA_PREPROCESSOR, SlotRole.FEATURE_PREPROCESSOR, SlotRole.PREDICTOR],
}


@dataclass(frozen=True)
class Bowl:
    optimum: float
    amplitude: float
    lo: float
    hi: float
    default: float

    def penalty(self, value: float) -> float:
        span = self.hi - self.lo
        if span <= 0:
            return 0.0
        return self.amplitude * ((value - self.optimum) / span) ** 2


@dataclass(frozen=True, eq=False)
class SurrogateSurface:
    roles: tuple  # SlotRole per slot, predictor last
    candidates: tuple  # per slot: tuple of candidate ids, BLANK_ID first for pre-processor slots
    base: dict  # (slot, candidate) -> value
    interactions: dict  # (slot_i, cand_i, slot_j, cand_j), i < j -> unscaled value
    bowls: dict = field(default_factory=dict)  # (candidate, param) -> Bowl
    interaction_scale: float = 1.0
    noise_sd: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "_noise", np.random.default_rng(self.seed))

    def interaction(self, i, ci, j, cj) -> float:
        """Effective (scaled) interaction between two slot choices."""
        if i > j:
            i, ci, j, cj = j, cj, i, ci
        return self.interaction_scale * self.interactions.get((i, ci, j, cj), 0.0)

    def value(self, pipeline: Pipeline) -> float:
        """Noise-free surface value of ``pipeline``."""
        if len(pipeline.slots) != len(self.candidates):
            raise ValueError(f"pipeline has {len(pipeline.slots)} slots, surface has {len(self.candidates)}")
        chosen = []
        for s, choice in enumerate(pipeline.slots):
            cand = BLANK_ID if choice is None else choice.component
            if cand not in self.candidates[s]:
                raise KeyError(f"unknown candidate {cand!r} in slot {s}")
            chosen.append(cand)
        total = sum(self.base[(s, c)] for s, c in enumerate(chosen))
        for i, j in itertools.combinations(range(len(chosen)), 2):
            total += self.interaction(i, chosen[i], j, chosen[j])
        for choice in pipeline.slots:
            if choice is None:
                continue
            explicit = {} if choice.uses_defaults else dict(choice.params)
            for (cand, name), bowl in self.bowls.items():
                if cand == choice.component:
                    total -= bowl.penalty(explicit.get(name, bowl.default))
        return float(total)

    def catalog(self, standard_predictor: str | None = None) -> Catalog:
        """The catalog whose pipelines this surface scores."""
        bowls_of: dict = {}
        for (cand, name), b in self.bowls.items():
            bowls_of.setdefault(cand, []).append(
                ParamSpec(name, "real", lo=b.lo, hi=b.hi, default=b.default))
        slots = []
        for role, cands in zip(self.roles, self.candidates):
            specs = tuple(ComponentSpec(c, role, "surrogate", tuple(bowls_of.get(c, ())))
                          for c in cands if c != BLANK_ID)
            slots.append(Slot(role, specs))
        return Catalog(tuple(slots), standard_predictor or self.candidates[-1][0])

    def to_dict(self) -> dict:
        return {
            "roles": [r.value for r in self.roles],
            "candidates": [list(c) for c in self.candidates],
            "base": [[s, c, v] for (s, c), v in self.base.items()],
            "interactions": [[i, ci, j, cj, v] for (i, ci, j, cj), v in self.interactions.items()],
            "bowls": [[c, n, b.optimum, b.amplitude, b.lo, b.hi, b.default] for (c, n), b in self.bowls.items()],
            "interaction_scale": self.interaction_scale,
            "noise_sd": self.noise_sd,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc) -> "SurrogateSurface":
        return cls(
            roles=tuple(SlotRole(r) for r in doc["roles"]),
            candidates=tuple(tuple(c) for c in doc["candidates"]),
            base={(int(s), c): float(v) for s, c, v in doc["base"]},
            interactions={(int(i), ci, int(j), cj): float(v) for i, ci, j, cj, v in doc["interactions"]},
            bowls={(c, n): Bowl(*map(float, rest)) for c, n, *rest in doc.get("bowls", [])},
            interaction_scale=float(doc.get("interaction_scale", 1.0)),
            noise_sd=float(doc.get("noise_sd", 0.0)),
            seed=int(doc.get("seed", 0)),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "SurrogateSurface":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _roles_for(n_slots: int) -> list:
    if n_slots in ROLES_BY_DEPTH:
        return ROLES_BY_DEPTH[n_slots]
    # longer chains repeat the feature pre-processor role
    return ([SlotRole.DATA_PREPROCESSOR] + [SlotRole.FEATURE_PREPROCESSOR] * (n_slots - 2)
            + [SlotRole.PREDICTOR])


def make_surface(slot_sizes, interaction_scale: float = 0.0, amplitude_range=(0.0, 0.0),
                 seed: int = 0, params_per_candidate: int = 0, noise_sd: float = 0.0) -> SurrogateSurface:
    """Random surface for the given number of real candidates per slot (predictor last).

    Pre-processor slots also get a blank option. Base values are uniform on
    [0, 1], interactions uniform on [-1, 1], and every candidate carries
    ``params_per_candidate`` real parameters on [0, 1] with a bowl whose
    amplitude is drawn from ``amplitude_range``.
    """
    sizes = [int(s) for s in slot_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("every slot needs at least one candidate")
    if interaction_scale < 0:
        raise ValueError("interaction scale must be non-negative")
    rng = np.random.default_rng(seed)
    roles = _roles_for(len(sizes))
    candidates = []
    for s, (role, size) in enumerate(zip(roles, sizes)):
        prefix = "p" if role == SlotRole.PREDICTOR else f"t{s}_"
        names = [f"{prefix}{i}" for i in range(size)]
        candidates.append(tuple(names if role == SlotRole.PREDICTOR else [BLANK_ID] + names))
    base = {(s, c): float(rng.uniform(0, 1)) for s, cands in enumerate(candidates) for c in cands}
    interactions = {}
    for i, j in itertools.combinations(range(len(candidates)), 2):
        for ci in candidates[i]:
            for cj in candidates[j]:
                interactions[(i, ci, j, cj)] = float(rng.uniform(-1, 1))
    bowls = {}
    lo_amp, hi_amp = amplitude_range
    for cands in candidates:
        for c in cands:
            if c == BLANK_ID:
                continue
            for k in range(params_per_candidate):
                bowls[(c, f"x{k}")] = Bowl(float(rng.uniform(0, 1)), float(rng.uniform(lo_amp, hi_amp)),
                                           0.0, 1.0, 0.5)
    return SurrogateSurface(tuple(roles), tuple(candidates), base, interactions, bowls,
                            float(interaction_scale), float(noise_sd), seed)


def surrogate_eval(surface: SurrogateSurface, pipeline: Pipeline) -> EvalResult:
    value = surface.value(pipeline)
    if surface.noise_sd > 0:
        value += float(surface._noise.normal(0.0, surface.noise_sd))
    return EvalResult("ok", value, (value,), 0.0)


def evaluator(surface: SurrogateSurface):
    """``evaluate_fn`` closure over ``surface`` for the optimizers."""
    return lambda pipeline: surrogate_eval(surface, pipeline)


def table_surface(scores: dict, pre_candidates, predictors) -> SurrogateSurface:
    """Two-slot surface reproducing an explicit table ``{(pre, predictor): value}``.

    ``pre`` entries use ``BLANK_ID`` for the empty slot. The table is encoded as
    predictor base values plus one interaction per cell.
    """
    pre = tuple([BLANK_ID] + [c for c in pre_candidates if c != BLANK_ID])
    preds = tuple(predictors)
    base = {(0, c): 0.0 for c in pre}
    base.update({(1, p): float(scores[(BLANK_ID, p)]) for p in preds})
    interactions = {(0, t, 1, p): float(scores[(t, p)] - scores[(BLANK_ID, p)]) for t in pre for p in preds}
    return SurrogateSurface((SlotRole.DATA_PREPROCESSOR, SlotRole.PREDICTOR), (pre, preds),
                            base, interactions, {}, 1.0, 0.0, 0)
