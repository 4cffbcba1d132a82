"""Configuration file format and the canonical JSON encoding shared by all artifacts."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from .errors import ConfigurationError
from .fuzzify import LinguisticVariable, Term, TriangularMF, default_dengue_config


def dumps(obj: Any) -> str:
    """Canonical JSON text: fixed key order as built, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def variable_to_dict(var: LinguisticVariable) -> dict:
    return {
        "name": var.name,
        "unit": var.unit,
        "terms": [
            {
                "name": t.name,
                "mf": {
                    "left": t.mf.left,
                    "apex_lo": t.mf.apex_lo,
                    "apex_hi": t.mf.apex_hi,
                    "right": t.mf.right,
                },
                "levels": list(t.levels),
            }
            for t in var.terms
        ],
    }


def variable_from_dict(d: dict) -> LinguisticVariable:
    try:
        terms = []
        for t in d["terms"]:
            mf = t["mf"]
            if isinstance(mf, (list, tuple)):
                mf = TriangularMF.triangle(*mf) if len(mf) == 3 else TriangularMF(*map(float, mf))
            else:
                mf = TriangularMF(
                    float(mf["left"]), float(mf["apex_lo"]), float(mf["apex_hi"]), float(mf["right"])
                )
            terms.append(Term(str(t["name"]), mf, tuple(t["levels"])))
        return LinguisticVariable(str(d["name"]), str(d.get("unit", "")), tuple(terms))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed variable definition: {exc!r}") from None


@dataclass(frozen=True)
class DatasetConfig:
    variables: tuple[LinguisticVariable, ...]
    label_column: str | None = "label"
    corpus_name: str = "unnamed"
    id_column: str = "id"

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"duplicate variable names: {names}")
        if self.label_column is not None and self.label_column in names:
            raise ConfigurationError(f"label column {self.label_column!r} collides with a variable")
        if self.id_column in names or self.id_column == self.label_column:
            raise ConfigurationError(f"id column {self.id_column!r} collides with another column")

    @property
    def variable_names(self) -> list[str]:
        return [v.name for v in self.variables]

    def to_dict(self) -> dict:
        return {
            "corpus_name": self.corpus_name,
            "id_column": self.id_column,
            "label_column": self.label_column,
            "variables": [variable_to_dict(v) for v in self.variables],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetConfig":
        if not isinstance(d, dict) or "variables" not in d:
            raise ConfigurationError("configuration must be an object with a 'variables' list")
        return cls(
            tuple(variable_from_dict(v) for v in d["variables"]),
            d.get("label_column", "label"),
            d.get("corpus_name", "unnamed"),
            d.get("id_column", "id"),
        )

    @property
    def digest(self) -> str:
        return config_digest(self.variables)


def default_dataset_config() -> DatasetConfig:
    return DatasetConfig(tuple(default_dengue_config()), "label", "dengue30")


def config_digest(variables: Sequence[LinguisticVariable]) -> str:
    """Fingerprint of the membership curves and alpha grids."""
    text = dumps([variable_to_dict(v) for v in variables])
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_config(path: str | Path) -> DatasetConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: not valid JSON ({exc})") from None
    return DatasetConfig.from_dict(data)


def save_config(config: DatasetConfig, path: str | Path) -> None:
    Path(path).write_text(dumps(config.to_dict()), encoding="utf-8")
