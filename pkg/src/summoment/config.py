"""Declarative process configurations (JSON documents, schema ``v1``)."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np

from .errors import SpecValidationError
from .processes import (
    MarkovParams,
    as_samples,
    gen_correlated_pair,
    gen_gaussian_vector,
    gen_markov2_arma,
    gen_markov_ar,
    gen_shifted_pair,
    gen_white,
    kernel_to_cov,
    ma_filter,
    solve_pair_spec,
)

SCHEMA_VERSION = "v1"
KINDS = ("white", "markov1", "markov2", "cov", "pair", "shifted")
METHODS = {
    "markov1": ("ar", "exact"),
    "markov2": ("arma", "ar", "exact"),
}
BASES = ("markov1", "markov2")


@dataclass(frozen=True)
class ProcessSpec:
    """One generator configuration.

    ``cov`` is a row-major ``n*n`` list for ``kind="cov"``.  For
    ``kind="pair"`` either ``blocks`` (row-major ``c_x1``, ``c_x2``,
    ``c_x1x2`` with sizes ``n1``, ``n2``) is given, or the blocks are built
    from the ``base`` kernel with cross-covariance ``rho * C(j - i)``.
    ``taps`` applies a unit-tap moving sum and still returns ``n`` samples.
    """

    kind: str
    n: int = 0
    alpha: float | None = None
    sigma2: float = 1.0
    seed: int = 0
    taps: int | None = None
    method: str | None = None
    delay: int = 0
    noise_var: float = 0.0
    base: str | None = None
    rho: float = 0.5
    mean: list | None = None
    cov: list | None = None
    blocks: dict | None = None

    @classmethod
    def from_dict(cls, doc: dict) -> "ProcessSpec":
        if not isinstance(doc, dict):
            raise SpecValidationError("<root>", "process spec must be a JSON object")
        doc = dict(doc)
        version = doc.pop("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise SpecValidationError("schema_version", f"unsupported version {version!r}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise SpecValidationError(unknown[0], "unknown field")
        if "kind" not in doc:
            raise SpecValidationError("kind", "required field missing")
        spec = cls(**doc)
        spec.validate()
        return spec

    def to_dict(self) -> dict:
        out = {"schema_version": SCHEMA_VERSION}
        out.update({k: v for k, v in asdict(self).items() if v is not None})
        return out

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise SpecValidationError("kind", f"must be one of {KINDS}, got {self.kind!r}")
        _int_field("seed", self.seed, lo=0)
        if self.seed >= 2**64:
            raise SpecValidationError("seed", "must be < 2**64")
        _num_field("sigma2", self.sigma2, lo=0.0)
        _num_field("noise_var", self.noise_var, lo=0.0)
        if self.taps is not None:
            _int_field("taps", self.taps, lo=1)
            if self.kind in ("cov", "pair"):
                raise SpecValidationError("taps", f"not supported for kind {self.kind!r}")
        if self.kind in ("white", "markov1", "markov2", "shifted"):
            _int_field("n", self.n, lo=1)
        if self.kind in ("markov1", "markov2", "shifted") or (self.kind == "pair" and self.blocks is None):
            if self.alpha is None:
                raise SpecValidationError("alpha", f"required for kind {self.kind!r}")
            _num_field("alpha", self.alpha, lo=0.0, strict=True)
            if self.sigma2 == 0:
                raise SpecValidationError("sigma2", "must be > 0 for Markov processes")
        if self.kind in METHODS:
            if self.method is not None and self.method not in METHODS[self.kind]:
                raise SpecValidationError("method", f"must be one of {METHODS[self.kind]}, got {self.method!r}")
        elif self.method is not None:
            raise SpecValidationError("method", f"not applicable to kind {self.kind!r}")
        if self.base is not None and self.base not in BASES:
            raise SpecValidationError("base", f"must be one of {BASES}, got {self.base!r}")
        if self.kind == "shifted":
            _int_field("delay", self.delay)
        if self.kind == "cov":
            _int_field("n", self.n, lo=1)
            _matrix_field("cov", self.cov, self.n, self.n)
            if self.mean is not None:
                _vector_field("mean", self.mean, self.n)
        if self.kind == "pair":
            if self.blocks is None:
                _int_field("n", self.n, lo=1)
                _num_field("rho", self.rho)
                if abs(self.rho) > 1:
                    raise SpecValidationError("rho", "must satisfy |rho| <= 1")
            else:
                self._validate_blocks()

    def _validate_blocks(self):
        b = self.blocks
        if not isinstance(b, dict):
            raise SpecValidationError("blocks", "must be an object")
        extra = sorted(set(b) - {"n1", "n2", "c_x1", "c_x2", "c_x1x2"})
        if extra:
            raise SpecValidationError(f"blocks.{extra[0]}", "unknown field")
        for key in ("n1", "n2", "c_x1", "c_x2", "c_x1x2"):
            if key not in b:
                raise SpecValidationError(f"blocks.{key}", "required field missing")
        _int_field("blocks.n1", b["n1"], lo=1)
        _int_field("blocks.n2", b["n2"], lo=1)
        _matrix_field("blocks.c_x1", b["c_x1"], b["n1"], b["n1"])
        _matrix_field("blocks.c_x2", b["c_x2"], b["n2"], b["n2"])
        _matrix_field("blocks.c_x1x2", b["c_x1x2"], b["n1"], b["n2"])

    def markov_params(self, order: int) -> MarkovParams:
        return MarkovParams(float(self.alpha), float(self.sigma2), order)

    def pair_blocks(self):
        """``(c_x1, c_x2, c_x1x2)`` as dense arrays."""
        if self.blocks is not None:
            b = self.blocks
            n1, n2 = b["n1"], b["n2"]
            return (np.asarray(b["c_x1"], float).reshape(n1, n1),
                    np.asarray(b["c_x2"], float).reshape(n2, n2),
                    np.asarray(b["c_x1x2"], float).reshape(n1, n2))
        order = 2 if self.base == "markov2" else 1
        c = kernel_to_cov(self.markov_params(order).kernel(), self.n).entries
        return c, c.copy(), self.rho * c


def _int_field(name, value, lo=None):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise SpecValidationError(name, f"must be an integer, got {value!r}")
    if lo is not None and value < lo:
        raise SpecValidationError(name, f"must be >= {lo}, got {value}")


def _num_field(name, value, lo=None, strict=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SpecValidationError(name, f"must be a finite number, got {value!r}")
    if lo is not None and (value < lo or (strict and value == lo)):
        raise SpecValidationError(name, f"must be {'>' if strict else '>='} {lo}, got {value}")


def _vector_field(name, value, n):
    if not isinstance(value, list) or len(value) != n:
        raise SpecValidationError(name, f"must be a list of {n} numbers")
    for i, v in enumerate(value):
        _num_field(f"{name}[{i}]", v)


def _matrix_field(name, value, rows, cols):
    _vector_field(name, value, rows * cols)


def generate(spec: ProcessSpec):
    """Realize ``spec``: returns a list of one or two sample arrays."""
    n_raw = spec.n + (spec.taps - 1 if spec.taps else 0)
    kind = spec.kind
    if kind == "white":
        out = [gen_white(n_raw, spec.sigma2, seed=spec.seed).samples]
    elif kind in ("markov1", "markov2"):
        order = 1 if kind == "markov1" else 2
        params = spec.markov_params(order)
        method = spec.method or METHODS[kind][0]
        if method == "exact":
            out = [gen_gaussian_vector(kernel_to_cov(params.kernel(), n_raw), seed=spec.seed).samples]
        elif method == "arma":
            out = [gen_markov2_arma(params, n_raw, seed=spec.seed).samples]
        else:
            out = [gen_markov_ar(params, n_raw, seed=spec.seed).samples]
    elif kind == "cov":
        c = np.asarray(spec.cov, float).reshape(spec.n, spec.n)
        out = [gen_gaussian_vector(c, mean=spec.mean, seed=spec.seed).samples]
    elif kind == "pair":
        pair = solve_pair_spec(*spec.pair_blocks())
        out = [np.asarray(s) for s in gen_correlated_pair(pair, seed=spec.seed)]
    else:
        params = spec.markov_params(1 if spec.base == "markov1" else 2)
        out = [np.asarray(s) for s in gen_shifted_pair(params, n_raw, spec.delay, seed=spec.seed,
                                                        noise_var=spec.noise_var)]
    if spec.taps:
        out = [as_samples(ma_filter(s, spec.taps)) for s in out]
    return out


def parse_scalar(text: str) -> Any:
    """Parse a ``key=value`` override value as JSON, falling back to a string."""
    try:
        return json.loads(text)
    except ValueError:
        return text
