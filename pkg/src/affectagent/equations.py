"""Impression-formation equation sets and affective dictionaries.

An equation set couples a coefficient matrix ``M`` (9 rows, one per
post-event transient component) with a feature-term list describing how the
previous transients ``tau`` and the incoming behaviour ``f_b`` combine.  Each
feature term is a product of factors drawn from tau or from the behaviour
block; the shipped default is the standard 29-term list.  Coefficients are
stored in the acting-agent orientation; the client turn is obtained by
swapping actor and object everywhere.
"""

from __future__ import annotations

import csv
import importlib.resources
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .epa import D_DIMENSION, D_OBJECT

DATA_ENV_VAR = "AFFECTAGENT_DATA"

# Factor sources: "tau" references the pre-event transients (any object),
# "f" references the post-event fundamentals (behaviour block only).
Factor = tuple[str, str, str]  # (source, object, dimension)


def _validate_factor(factor: Factor) -> Factor:
    source, obj, dim = factor
    if source not in ("tau", "f"):
        raise ValueError(f"unknown factor source {source!r}")
    if obj not in D_OBJECT or dim not in D_DIMENSION:
        raise ValueError(f"bad factor reference ({obj!r}, {dim!r})")
    if source == "f" and obj != "b":
        raise ValueError("fundamental factors may only reference the behaviour block")
    return factor


@dataclass(frozen=True)
class GTermSpec:
    """Ordered list of feature terms; term 0 must be the constant 1."""

    terms: tuple[tuple[Factor, ...], ...]

    def __post_init__(self):
        if not self.terms or self.terms[0] != ():
            raise ValueError("term 0 must be the constant term")
        for term in self.terms:
            n_f = 0
            for factor in term:
                _validate_factor(factor)
                n_f += factor[0] == "f"
            if n_f > 1:
                raise ValueError(
                    "terms must be linear in the behaviour fundamentals "
                    "(at most one f-factor per term)"
                )

    def __len__(self) -> int:
        return len(self.terms)


def _t(obj: str, dim: str) -> Factor:
    return ("tau", obj, dim)


def _f(dim: str) -> Factor:
    return ("f", "b", dim)


# The default 29 feature terms, acting-agent orientation.
DEFAULT_TERMS = GTermSpec(
    terms=(
        (),
        (_t("a", "e"),),
        (_t("a", "p"),),
        (_t("a", "a"),),
        (_f("e"),),
        (_f("p"),),
        (_f("a"),),
        (_t("c", "e"),),
        (_t("c", "p"),),
        (_t("c", "a"),),
        (_t("a", "e"), _f("e")),
        (_t("a", "e"), _f("p")),
        (_t("a", "e"), _t("c", "e")),
        (_t("a", "e"), _t("c", "p")),
        (_t("a", "p"), _f("e")),
        (_t("a", "p"), _f("p")),
        (_t("a", "p"), _t("c", "p")),
        (_t("a", "p"), _t("c", "a")),
        (_t("a", "a"), _f("a")),
        (_t("c", "e"), _f("e")),
        (_t("c", "p"), _f("e")),
        (_t("c", "e"), _f("p")),
        (_t("c", "p"), _f("p")),
        (_t("c", "a"), _f("p")),
        (_t("c", "p"), _f("a")),
        (_t("a", "e"), _t("c", "e"), _f("e")),
        (_t("a", "e"), _t("c", "p"), _f("p")),
        (_t("a", "p"), _t("c", "p"), _f("p")),
        (_t("a", "p"), _t("c", "a"), _f("p")),
    )
)


@dataclass
class EquationSet:
    """Coefficient matrix plus its feature-term structure.

    ``m`` has shape (9, n_terms) and is stored for the agent-turn
    orientation.  ``culture`` and ``source`` are bookkeeping only.
    """

    m: np.ndarray
    terms: GTermSpec = field(default_factory=lambda: DEFAULT_TERMS)
    culture: str = "sample"
    source: str = ""

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=float)
        if self.m.ndim != 2 or self.m.shape[0] != 9:
            raise ValueError("coefficient matrix must have 9 rows")
        if self.m.shape[1] != len(self.terms):
            raise ValueError(
                f"coefficient columns ({self.m.shape[1]}) do not match "
                f"term count ({len(self.terms)})"
            )
        if not np.all(np.isfinite(self.m)):
            raise ValueError("coefficient matrix has non-finite entries")


def _descriptor_to_term(descriptor: str) -> tuple[Factor, ...]:
    """Parse a product code like ``1``, ``Tae`` or ``FbeTce`` into factors."""
    text = descriptor.strip()
    if text == "1":
        return ()
    if len(text) % 3 != 0:
        raise ValueError(f"malformed term descriptor {descriptor!r}")
    factors = []
    for i in range(0, len(text), 3):
        code = text[i : i + 3].lower()
        source = {"t": "tau", "f": "f"}.get(code[0])
        if source is None or code[1] not in D_OBJECT or code[2] not in D_DIMENSION:
            raise ValueError(f"malformed term descriptor {descriptor!r}")
        factors.append((source, code[1], code[2]))
    return tuple(factors)


def _term_to_descriptor(term: tuple[Factor, ...]) -> str:
    if not term:
        return "1"
    return "".join(
        ("T" if source == "tau" else "F") + obj + dim for source, obj, dim in term
    )


def load_equations(path, culture: str | None = None) -> EquationSet:
    """Read an equation file: one row per term, nine coefficients followed by
    the term descriptor."""
    path = Path(path)
    columns = []
    terms = []
    with open(path) as handle:
        for raw in handle:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 10:
                raise ValueError(
                    f"{path.name}: expected 9 coefficients + descriptor, got {len(parts)} fields"
                )
            columns.append([float(v) for v in parts[:9]])
            terms.append(_descriptor_to_term(parts[9]))
    if not columns:
        raise ValueError(f"{path.name}: empty equation file")
    m = np.asarray(columns, dtype=float).T
    return EquationSet(
        m=m,
        terms=GTermSpec(terms=tuple(terms)),
        culture=culture or path.stem,
        source=str(path),
    )


def save_equations(eq: EquationSet, path) -> None:
    with open(path, "w") as handle:
        for j, term in enumerate(eq.terms.terms):
            coeffs = " ".join(f"{v: .6f}" for v in eq.m[:, j])
            handle.write(f"{coeffs}  {_term_to_descriptor(term)}\n")


@dataclass(frozen=True)
class LexiconEntry:
    label: str
    epa: np.ndarray
    kind: str = "identity"


class Lexicon:
    """Label -> EPA dictionary with nearest-neighbour lookup."""

    def __init__(self, entries: list[LexiconEntry]):
        if not entries:
            raise ValueError("empty dictionary")
        self.entries = list(entries)
        self._by_label = {e.label: e for e in self.entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, label: str) -> bool:
        return label in self._by_label

    def epa(self, label: str) -> np.ndarray:
        try:
            return self._by_label[label].epa.copy()
        except KeyError:
            raise KeyError(f"no dictionary entry for {label!r}") from None

    def of_kind(self, kind: str) -> list[LexiconEntry]:
        return [e for e in self.entries if e.kind == kind]

    def nearest(self, epa, kind: str | None = None) -> LexiconEntry:
        point = np.asarray(epa, dtype=float)
        pool = self.entries if kind is None else self.of_kind(kind)
        if not pool:
            raise ValueError(f"no entries of kind {kind!r}")
        dists = [float(np.sum((e.epa - point) ** 2)) for e in pool]
        return pool[int(np.argmin(dists))]

    def mean(self, kind: str = "identity") -> np.ndarray:
        pool = self.of_kind(kind)
        return np.mean([e.epa for e in pool], axis=0)

    def variance(self, kind: str = "identity") -> np.ndarray:
        pool = self.of_kind(kind)
        return np.var([e.epa for e in pool], axis=0)


def load_lexicon(path) -> Lexicon:
    """Read a dictionary CSV with columns label,E,P,A[,type]."""
    entries = []
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header and header[0].strip().lower() != "label":
            handle.seek(0)
            reader = csv.reader(handle)
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            label = row[0].strip()
            epa = np.array([float(row[1]), float(row[2]), float(row[3])])
            kind = row[4].strip() if len(row) > 4 and row[4].strip() else "identity"
            entries.append(LexiconEntry(label=label, epa=epa, kind=kind))
    return Lexicon(entries)


def data_path(name: str) -> Path:
    """Resolve a data file: the AFFECTAGENT_DATA directory wins over the
    bundled samples."""
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        candidate = Path(override) / name
        if candidate.exists():
            return candidate
    return Path(str(importlib.resources.files("affectagent") / "data" / name))


def load_sample_equations() -> EquationSet:
    return load_equations(data_path("sample_equations.txt"), culture="sample")


def load_sample_lexicon() -> Lexicon:
    return load_lexicon(data_path("sample_identities.csv"))
