"""Figure rendering for the report-producing commands.

Each renderer takes already-computed rows and writes a PNG next to the
delimited output.  Uses the Agg backend so rendering works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .circuit import Execution  # noqa: E402
from .delay import MisDelayCurve  # noqa: E402

__all__ = ["plot_curve", "plot_continuity", "plot_trace"]


def plot_curve(curve: MisDelayCurve, path) -> None:
    """Delay vs input separation, both computation routes overlaid."""
    deltas = [s[0] * 1e12 for s in curve.samples]
    asym = [s[1] * 1e12 for s in curve.samples]
    exact = [s[2] * 1e12 for s in curve.samples]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(deltas, exact, lw=1.8, label="exact crossing")
    ax.plot(deltas, asym, lw=1.2, ls="--", label="pasted formula")
    ax.set_xlabel("input separation [ps]")
    ax.set_ylabel("delay [ps]")
    edge = "falling" if curve.edge == "fall" else "rising"
    ax.set_title(f"{edge}-output switching delay")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_continuity(rows, path) -> None:
    """Perturbation size against the measured response distances."""
    eps = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.loglog(eps, [max(r[2], 1e-300) for r in rows], "o-", label="output distance")
    ax.loglog(eps, [max(r[3], 1e-300) for r in rows], "s-", label="analog sup distance")
    ax.loglog(eps, [r[4] for r in rows], ":", label="a-priori bound")
    ax.set_xlabel("perturbation [s]")
    ax.set_ylabel("distance")
    ax.set_title("response distance under input perturbation")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trace(execution: Execution, path) -> None:
    """Stacked digital waveforms of every vertex."""
    names = sorted(execution.signals)
    fig, ax = plt.subplots(figsize=(7.0, 0.6 * len(names) + 1.2))
    for lane, name in enumerate(names):
        sig = execution.signals[name]
        ts, vs = [0.0], [sig.value_at(0.0)]
        for tr in sig.transitions:
            ts.extend([tr.time, tr.time])
            vs.extend([vs[-1], tr.value])
        ts.append(execution.horizon)
        vs.append(vs[-1])
        offset = (len(names) - 1 - lane) * 1.5
        ax.plot([t * 1e12 for t in ts], [v * 0.8 + offset for v in vs], lw=1.4)
        ax.text(-0.01 * execution.horizon * 1e12, offset + 0.4, name,
                ha="right", va="center", fontsize=9)
    ax.set_xlabel("time [ps]")
    ax.set_yticks([])
    ax.set_xlim(0.0, execution.horizon * 1e12)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
