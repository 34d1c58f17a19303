"""Figures for experiment results, rendered off-screen with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_fano(result, path) -> Path:
    """Empirical error with its Wilson interval against both Fano floors.

    PNG metadata is stripped so identical results give identical bytes.
    """
    rows = result.rows
    n = [r.n for r in rows]
    p_hat = [r.p_hat for r in rows]
    err = [[r.p_hat - r.ci_low for r in rows], [r.ci_high - r.p_hat for r in rows]]
    with plt.style.context("default"):
        fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
        ax.errorbar(n, p_hat, yerr=err, fmt="o-", capsize=3,
                    label=f"ML error ({result.metric}, 95% {result.ci_method})")
        ax.plot(n, [max(r.fano_floor_exact, 0.0) for r in rows], "s--",
                label="Fano floor, exact rho")
        ax.plot(n, [max(r.fano_floor_certified, 0.0) for r in rows], "^:",
                label="Fano floor, certified rho")
        ax.set_xlabel("samples n")
        ax.set_ylabel("probability of error")
        ax.set_ylim(-0.02, 1.02)
        ax.set_title(f"|T| = {result.hypothesis_count}")
        ax.legend(loc="upper right", fontsize="small")
        fig.tight_layout()
        out = Path(path)
        fig.savefig(out, format="png", metadata={"Software": None})
        plt.close(fig)
    return out
