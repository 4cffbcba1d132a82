"""Figures written next to the text report."""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.cm import ScalarMappable  # noqa: E402
from matplotlib.colors import Normalize  # noqa: E402
from matplotlib.lines import Line2D  # noqa: E402
from matplotlib.patches import Patch  # noqa: E402

from .fuzzify import LinguisticVariable, mf_eval  # noqa: E402
from .rules import Diagnosis, RiskModel  # noqa: E402

# Fixed metadata keeps PNG bytes identical between runs.
_PNG_META = {"Software": None}

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_memberships(variables: Sequence[LinguisticVariable], path: str | Path) -> Path:
    """One panel per variable with every term's membership curve."""
    n = max(len(variables), 1)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(n, 1, figsize=(7, 1.9 * n), squeeze=False)
        for ax, var in zip(axes[:, 0], variables):
            lo = min(t.mf.left for t in var.terms)
            hi = max(t.mf.right for t in var.terms)
            pad = 0.05 * (hi - lo or 1.0)
            breaks = [p for t in var.terms for p in (t.mf.left, t.mf.apex_lo, t.mf.apex_hi, t.mf.right)]
            xs = np.union1d(np.linspace(lo - pad, hi + pad, 600), breaks)
            for t in var.terms:
                ax.plot(xs, [mf_eval(t.mf, x) for x in xs], label=t.name)
            ax.set_ylim(-0.05, 1.05)
            ax.set_ylabel("membership")
            ax.set_title(f"{var.name} ({var.unit})" if var.unit else var.name, loc="left")
            ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_rule_risks(model: RiskModel, path: str | Path) -> Path:
    """Risk of every kept rule, coloured by support."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(8.5, 3))
        ids = [sr.id for sr in model.rules]
        risks = [sr.risk for sr in model.rules]
        support = np.array([sr.support for sr in model.rules], dtype=float)
        pos = np.arange(len(ids))
        norm = Normalize(0, support.max() if len(support) else 1)
        ax.bar(pos, risks, color=plt.cm.viridis(norm(support)))
        fig.colorbar(ScalarMappable(norm=norm, cmap="viridis"), ax=ax, label="support (patients)", pad=0.01)
        ax.set_xticks(pos)
        ax.set_xticklabels([str(i) for i in ids], rotation=90, fontsize=6)
        ax.set_ylim(0, 105)
        ax.set_xlabel("rule id")
        ax.set_ylabel("risk (%)")
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_patient_risks(diagnoses: Sequence[Diagnosis], threshold: float, path: str | Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(8.5, 3))
        pos = np.arange(len(diagnoses))
        risks = [d.risk if d.risk is not None else 0.0 for d in diagnoses]
        colours = ["#c0392b" if d.risk is not None and d.risk >= threshold else "#2e86c1" for d in diagnoses]
        ax.bar(pos, risks, color=colours)
        # A patient no rule matches has no risk at all; keep it distinct from 0%.
        unmatched = [i for i, d in enumerate(diagnoses) if d.risk is None]
        ax.plot(unmatched, [2.0] * len(unmatched), ls="none", marker="x", color="#888888")
        ax.axhline(threshold, color="black", lw=0.8, ls="--")
        handles = [Patch(color="#c0392b", label=f">= {threshold:g}%"),
                   Patch(color="#2e86c1", label=f"< {threshold:g}%"),
                   Line2D([], [], ls="none", marker="x", color="#888888", label="no matching rule")]
        ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1, 1), frameon=False)
        ax.set_xticks(pos)
        ax.set_xticklabels([d.record_id for d in diagnoses], rotation=90)
        ax.set_ylim(0, 105)
        ax.set_ylabel("best rule risk (%)")
        fig.tight_layout()
        return _save(fig, Path(path))
