"""Datasets, the slot/candidate search space, pipelines and parameter sampling."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

BLANK_ID = "blank"


class SlotRole(str, enum.Enum):
    DATA_PREPROCESSOR = "data_preprocessor"
    FEATURE_PREPROCESSOR = "feature_preprocessor"
    PREDICTOR = "predictor"


class TaskKind(str, enum.Enum):
    BINARY = "binary"
    MULTICLASS = "multiclass"


# --------------------------------------------------------------------------
# datasets


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int
    attribute_names: tuple = ()
    class_names: tuple = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=float, copy=True)
        y = np.array(self.labels, dtype=int, copy=True)
        if X.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if y.ndim != 1 or len(y) != X.shape[0]:
            raise ValueError("row count of features must equal the number of labels")
        if self.class_count < 1:
            raise ValueError("class_count must be positive")
        if len(y) and (y.min() < 0 or y.max() >= self.class_count):
            raise ValueError("label indices must lie in [0, class_count)")
        if not np.all(np.isfinite(X)):
            raise ValueError("features contain missing or non-finite values")
        names = tuple(self.attribute_names) or tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError("one attribute name per feature column required")
        classes = tuple(self.class_names) or tuple(str(c) for c in range(self.class_count))
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "attribute_names", names)
        object.__setattr__(self, "class_names", classes)

    @property
    def task_kind(self) -> TaskKind:
        return TaskKind.BINARY if self.class_count == 2 else TaskKind.MULTICLASS

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.features[rows], self.labels[rows], self.class_count,
                       self.attribute_names, self.class_names)


def _is_missing(value) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return isinstance(value, str) and value.strip() in ("", "?")


def _is_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def encode_and_impute(raw_table, label_column: str) -> Dataset:
    """Turn a column-oriented mixed table into a numeric :class:`Dataset`.

    ``raw_table`` maps column names to equally long value lists (a pandas
    DataFrame works too). A column is numeric when every observed value is a
    number; any other column is one-hot encoded with one indicator per observed
    category, in lexicographic order. Missing numeric cells become 0.0 and
    missing categorical cells become all-zero indicator rows.
    """
    if hasattr(raw_table, "to_dict") and hasattr(raw_table, "columns"):
        raw_table = {c: list(raw_table[c]) for c in raw_table.columns}
    columns = {str(k): list(v) for k, v in raw_table.items()}
    if label_column not in columns:
        raise KeyError(f"label column {label_column!r} not found")
    n = len(columns[label_column])
    for name, values in columns.items():
        if len(values) != n:
            raise ValueError(f"column {name!r} has {len(values)} rows, expected {n}")

    class_names: list = []
    index_of: dict = {}
    labels = np.empty(n, dtype=int)
    for i, value in enumerate(columns[label_column]):
        if _is_missing(value):
            raise ValueError(f"missing label in row {i}")
        if value not in index_of:
            index_of[value] = len(class_names)
            class_names.append(value)
        labels[i] = index_of[value]
    if len(class_names) < 2:
        raise ValueError("at least two distinct labels are required")

    blocks, names = [], []
    for name, values in columns.items():
        if name == label_column:
            continue
        observed = [v for v in values if not _is_missing(v)]
        if all(_is_number(v) for v in observed):
            col = np.array([0.0 if _is_missing(v) else float(v) for v in values])
            blocks.append(col[:, None])
            names.append(name)
        else:
            categories = sorted({str(v) for v in observed})
            pos = {c: j for j, c in enumerate(categories)}
            block = np.zeros((n, len(categories)))
            for i, v in enumerate(values):
                if not _is_missing(v):
                    block[i, pos[str(v)]] = 1.0
            blocks.append(block)
            names.extend(f"{name}={c}" for c in categories)
    X = np.hstack(blocks) if blocks else np.zeros((n, 0))
    return Dataset(X, labels, len(class_names), tuple(names), tuple(str(c) for c in class_names))


# --------------------------------------------------------------------------
# search space


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "real" | "integer" | "categorical"
    lo: float | None = None
    hi: float | None = None
    log_scale: bool = False
    choices: tuple = ()
    default: Any = None

    def contains(self, value) -> bool:
        if self.kind == "categorical":
            return value in self.choices
        if not _is_number(value) or self.lo is None or self.hi is None:
            return False
        if self.kind == "integer" and float(value) != int(value):
            return False
        return self.lo <= value <= self.hi


@dataclass(frozen=True)
class ComponentSpec:
    id: str
    role: SlotRole
    implementation_key: str
    params: tuple = ()

    def param(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(f"{self.id} has no parameter {name!r}")


@dataclass(frozen=True)
class Slot:
    role: SlotRole
    candidates: tuple

    @property
    def is_predictor(self) -> bool:
        return self.role == SlotRole.PREDICTOR


@dataclass(frozen=True)
class Catalog:
    slots: tuple
    standard_predictor: str

    @property
    def predictor_index(self) -> int:
        for i, slot in enumerate(self.slots):
            if slot.is_predictor:
                return i
        raise ValueError("catalog has no predictor slot")

    @property
    def preprocessor_indices(self) -> list:
        return [i for i, s in enumerate(self.slots) if not s.is_predictor]

    def slot_name(self, index: int) -> str:
        role = self.slots[index].role
        if sum(s.role == role for s in self.slots) == 1:
            return role.value
        return f"{role.value}[{index}]"

    def component(self, component_id: str, slot: int | None = None) -> ComponentSpec:
        slots = self.slots if slot is None else [self.slots[slot]]
        for s in slots:
            for c in s.candidates:
                if c.id == component_id:
                    return c
        where = "catalog" if slot is None else f"slot {self.slot_name(slot)}"
        raise KeyError(f"component {component_id!r} not in {where}")

    def space_size(self) -> int:
        size = 1
        for s in self.slots:
            size *= len(s.candidates) + (0 if s.is_predictor else 1)
        return size


class _Defaults:
    """Marker for the unconfigured (all-defaults) assignment."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "DEFAULTS"

    def __reduce__(self):
        return (_Defaults, ())


DEFAULTS = _Defaults()


@dataclass(frozen=True)
class Choice:
    """One filled slot: a component id and either concrete values or ``DEFAULTS``."""

    component: str
    params: Any = DEFAULTS  # DEFAULTS or a tuple of (name, value) pairs sorted by name

    def __post_init__(self):
        if self.params is not DEFAULTS and not isinstance(self.params, tuple):
            object.__setattr__(self, "params", tuple(sorted(dict(self.params).items())))

    @property
    def uses_defaults(self) -> bool:
        return self.params is DEFAULTS

    def values(self, spec: ComponentSpec) -> dict:
        """Concrete parameter values, filling anything unset with declared defaults."""
        resolved = default_params(spec)
        if not self.uses_defaults:
            resolved.update(dict(self.params))
        return resolved

    def explicit(self) -> dict | None:
        return None if self.uses_defaults else dict(self.params)


@dataclass(frozen=True)
class Pipeline:
    """Slot assignments in catalog order; ``None`` marks a Blank (identity) slot."""

    slots: tuple

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(self.slots))

    def replace(self, index: int, choice: Choice | None) -> "Pipeline":
        slots = list(self.slots)
        slots[index] = choice
        return Pipeline(tuple(slots))

    def describe(self) -> str:
        parts = []
        for c in self.slots:
            if c is None:
                parts.append(BLANK_ID)
            elif c.uses_defaults:
                parts.append(c.component)
            else:
                args = ",".join(f"{k}={v!r}" for k, v in c.params)
                parts.append(f"{c.component}({args})")
        return " -> ".join(parts)

    def to_json(self) -> list:
        return [None if c is None else {"component": c.component, "params": c.explicit()}
                for c in self.slots]

    @classmethod
    def from_json(cls, items) -> "Pipeline":
        return cls(tuple(None if it is None else Choice(it["component"], DEFAULTS if it["params"] is None else it["params"])
                         for it in items))


def check_pipeline(pipeline: Pipeline, catalog: Catalog) -> list:
    """Pipeline invariant violations against ``catalog`` (empty when valid)."""
    problems = []
    if len(pipeline.slots) != len(catalog.slots):
        return [f"pipeline has {len(pipeline.slots)} slots, catalog has {len(catalog.slots)}"]
    for i, (choice, slot) in enumerate(zip(pipeline.slots, catalog.slots)):
        name = catalog.slot_name(i)
        if choice is None:
            if slot.is_predictor:
                problems.append(f"{name}: predictor slot may not be blank")
            continue
        ids = [c.id for c in slot.candidates]
        if choice.component not in ids:
            problems.append(f"{name}: {choice.component!r} is not a candidate")
            continue
        spec = slot.candidates[ids.index(choice.component)]
        if not choice.uses_defaults:
            for key, value in choice.params:
                try:
                    p = spec.param(key)
                except KeyError:
                    problems.append(f"{name}.{choice.component}: unknown parameter {key!r}")
                    continue
                if not p.contains(value):
                    problems.append(f"{name}.{choice.component}.{key}: {value!r} outside domain")
    return problems


def validate_catalog(catalog: Catalog) -> list:
    """Every invariant violation of ``catalog`` as a path-prefixed message."""
    problems = []
    predictor_slots = [i for i, s in enumerate(catalog.slots) if s.role == SlotRole.PREDICTOR]
    if not predictor_slots:
        problems.append("slots: no predictor slot")
    elif len(predictor_slots) > 1:
        problems.append(f"slots: {len(predictor_slots)} predictor slots, expected exactly one")
    elif predictor_slots[0] != len(catalog.slots) - 1:
        problems.append(f"slots[{predictor_slots[0]}](predictor): predictor slot must be last")
    seen_ids = set()
    for i, slot in enumerate(catalog.slots):
        where = f"slots[{i}]({slot.role.value})"
        if not slot.candidates:
            problems.append(f"{where}: empty candidate list")
        for j, comp in enumerate(slot.candidates):
            cwhere = f"{where}.candidates[{j}]({comp.id})"
            if comp.id in seen_ids:
                problems.append(f"{cwhere}: duplicate component id")
            if comp.id == BLANK_ID:
                problems.append(f"{cwhere}: id {BLANK_ID!r} is reserved for empty slots")
            seen_ids.add(comp.id)
            if comp.role != slot.role:
                problems.append(f"{cwhere}: role {comp.role.value} does not match slot")
            names = set()
            for k, p in enumerate(comp.params):
                problems.extend(f"{cwhere}.params[{k}]({p.name}): {msg}" for msg in _param_problems(p))
                if p.name in names:
                    problems.append(f"{cwhere}.params[{k}]({p.name}): duplicate parameter name")
                names.add(p.name)

    if predictor_slots:
        ids = [c.id for c in catalog.slots[predictor_slots[0]].candidates]
        if catalog.standard_predictor not in ids:
            problems.append(f"standard_predictor: {catalog.standard_predictor!r} is not a predictor candidate")
    return problems


def _param_problems(p: ParamSpec) -> list:
    if p.kind not in ("real", "integer", "categorical"):
        return [f"unknown kind {p.kind!r}"]
    if p.default is None:
        return ["no default declared"]
    if p.kind == "categorical":
        if not p.choices:
            return ["categorical parameter without choices"]
        return [] if p.default in p.choices else [f"default {p.default!r} not among choices"]
    out = []
    if p.lo is None or p.hi is None:
        return ["numeric parameter needs lo and hi"]
    if p.lo > p.hi:
        out.append(f"lo {p.lo} > hi {p.hi}")
    if p.log_scale and p.kind != "real":
        out.append("log_scale only applies to real parameters")
    if p.log_scale and p.lo <= 0:
        out.append("log_scale requires lo > 0")
    if p.kind == "integer" and (p.lo != int(p.lo) or p.hi != int(p.hi)):
        out.append("integer bounds must be integral")
    if not p.contains(p.default):
        out.append(f"default {p.default!r} outside [{p.lo}, {p.hi}]")
    return out


def default_params(component: ComponentSpec) -> dict:
    return {p.name: p.default for p in component.params}


def sample_params(component: ComponentSpec, rng: np.random.Generator) -> dict:
    """Draw one random assignment; parameters are drawn in declaration order."""
    out = {}
    for p in component.params:
        if p.kind == "categorical":
            out[p.name] = p.choices[int(rng.integers(len(p.choices)))]
        elif p.kind == "integer":
            out[p.name] = int(rng.integers(int(p.lo), int(p.hi) + 1))
        elif p.log_scale:
            value = math.exp(rng.uniform(math.log(p.lo), math.log(p.hi)))
            out[p.name] = min(max(value, p.lo), p.hi)
        else:
            out[p.name] = float(rng.uniform(p.lo, p.hi))
    return out


# --------------------------------------------------------------------------
# catalog files

_SLOT_FIELDS = {"role", "candidates"}
_CANDIDATE_FIELDS = {"id", "implementation_key", "params"}
_PARAM_FIELDS = {"name", "kind", "lo", "hi", "log_scale", "choices", "default"}


class CatalogFormatError(ValueError):
    pass


def _check_fields(obj, allowed, required, where):
    if not isinstance(obj, dict):
        raise CatalogFormatError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise CatalogFormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise CatalogFormatError(f"{where}: missing field(s) {sorted(missing)}")


def catalog_from_dict(doc: Mapping) -> Catalog:
    _check_fields(doc, {"slots", "standard_predictor"}, {"slots", "standard_predictor"}, "catalog")
    slots = []
    for i, s in enumerate(doc["slots"]):
        _check_fields(s, _SLOT_FIELDS, _SLOT_FIELDS, f"slots[{i}]")
        try:
            role = SlotRole(s["role"])
        except ValueError:
            raise CatalogFormatError(f"slots[{i}]: unknown role {s['role']!r}") from None
        candidates = []
        for j, c in enumerate(s["candidates"]):
            _check_fields(c, _CANDIDATE_FIELDS, {"id", "implementation_key"}, f"slots[{i}].candidates[{j}]")
            params = []
            for k, p in enumerate(c.get("params", [])):
                _check_fields(p, _PARAM_FIELDS, {"name", "kind"}, f"slots[{i}].candidates[{j}].params[{k}]")
                params.append(ParamSpec(
                    name=p["name"], kind=p["kind"], lo=p.get("lo"), hi=p.get("hi"),
                    log_scale=bool(p.get("log_scale") or False),
                    choices=tuple(p.get("choices") or ()), default=p.get("default")))
            candidates.append(ComponentSpec(c["id"], role, c["implementation_key"], tuple(params)))
        slots.append(Slot(role, tuple(candidates)))
    return Catalog(tuple(slots), doc["standard_predictor"])


def catalog_to_dict(catalog: Catalog) -> dict:
    def param(p: ParamSpec):
        d = {"name": p.name, "kind": p.kind, "default": p.default}
        if p.kind == "categorical":
            d["choices"] = list(p.choices)
        else:
            d.update(lo=p.lo, hi=p.hi, log_scale=p.log_scale)
        return d

    return {
        "slots": [{"role": s.role.value,
                   "candidates": [{"id": c.id, "implementation_key": c.implementation_key,
                                   "params": [param(p) for p in c.params]} for c in s.candidates]}
                  for s in catalog.slots],
        "standard_predictor": catalog.standard_predictor,
    }


def load_catalog(path) -> Catalog:
    with open(path) as fh:
        return catalog_from_dict(json.load(fh))


def save_catalog(catalog: Catalog, path) -> None:
    with open(path, "w") as fh:
        json.dump(catalog_to_dict(catalog), fh, indent=2)


def make_catalog(slots: Iterable[tuple], standard_predictor: str) -> Catalog:
    """Convenience builder: ``slots`` is a sequence of ``(role, [ComponentSpec, ...])``."""
    return Catalog(tuple(Slot(SlotRole(role), tuple(cands)) for role, cands in slots), standard_predictor)


def default_pipeline(catalog: Catalog, choices: Sequence[str | None]) -> Pipeline:
    return Pipeline(tuple(None if c is None else Choice(c) for c in choices))
