"""Reading and writing kernel specification documents (JSON).

Layout::

    {"dim": 2,
     "components": [
        {"name": "F1", "order": 1, "coeffs": [{"idx": [0], "value": 1.0}]},
        {"name": "F2", "order": 2, "coeffs": [{"idx": [0, 1], "value": 0.5}]}]}

Coefficients are given at sorted index tuples; the value is the kernel value
at any arrangement of the tuple.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .chaos_algebra import ChaosVector
from .tensor_core import SymmetricKernel

__all__ = ["KernelSpec", "SpecError", "dump_spec", "load_spec", "parse_spec"]


class SpecError(ValueError):
    """Malformed kernel specification."""


@dataclass(frozen=True)
class KernelSpec:
    dim: int
    names: tuple[str, ...]
    kernels: tuple[SymmetricKernel, ...]

    def vector(self) -> ChaosVector:
        return ChaosVector.from_kernels(self.kernels)


def _is_int(x: Any) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def parse_spec(doc: Any) -> KernelSpec:
    if not isinstance(doc, dict):
        raise SpecError("spec must be an object")
    dim = doc.get("dim")
    if not _is_int(dim) or dim < 1:
        raise SpecError(f"'dim' must be a positive integer, got {dim!r}")
    comps = doc.get("components")
    if not isinstance(comps, list) or not comps:
        raise SpecError("'components' must be a nonempty list")
    names, kernels = [], []
    for n, comp in enumerate(comps):
        where = f"component {n}"
        if not isinstance(comp, dict):
            raise SpecError(f"{where} must be an object")
        name = comp.get("name", f"F{n + 1}")
        if not isinstance(name, str):
            raise SpecError(f"{where}: name must be a string")
        order = comp.get("order")
        if not _is_int(order) or order < 1:
            raise SpecError(f"{where}: order must be an integer >= 1, got {order!r}")
        coeffs = comp.get("coeffs")
        if not isinstance(coeffs, list):
            raise SpecError(f"{where}: coeffs must be a list")
        table: dict[tuple[int, ...], float] = {}
        for entry in coeffs:
            if not isinstance(entry, dict) or "idx" not in entry or "value" not in entry:
                raise SpecError(f"{where}: each coefficient needs 'idx' and 'value'")
            idx = entry["idx"]
            value = entry["value"]
            if not isinstance(idx, list) or not all(_is_int(k) for k in idx):
                raise SpecError(f"{where}: idx must be a list of integers, got {idx!r}")
            idx = tuple(idx)
            if len(idx) != order:
                raise SpecError(f"{where}: idx {list(idx)} has length {len(idx)}, expected {order}")
            if any(a > b for a, b in zip(idx, idx[1:])):
                raise SpecError(f"{where}: idx {list(idx)} is not sorted")
            if any(k < 0 or k >= dim for k in idx):
                raise SpecError(f"{where}: idx {list(idx)} out of range for dim {dim}")
            if idx in table:
                raise SpecError(f"{where}: duplicate idx {list(idx)}")
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise SpecError(f"{where}: value must be a finite number, got {value!r}")
            table[idx] = float(value)
        names.append(name)
        kernels.append(SymmetricKernel(dim, order, table))
    return KernelSpec(dim, tuple(names), tuple(kernels))


def load_spec(path: str | Path) -> KernelSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError(f"cannot read spec {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec {path} is not valid JSON: {exc}") from exc
    return parse_spec(doc)


def dump_spec(spec: KernelSpec) -> dict:
    return {
        "dim": spec.dim,
        "components": [
            {
                "name": name,
                "order": f.order,
                "coeffs": [{"idx": list(idx), "value": value} for idx, value in f.coeffs.items()],
            }
            for name, f in zip(spec.names, spec.kernels)
        ],
    }
