"""PNG figure for the experiment: measured error against the fitted curve."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["plot_experiment"]


def plot_experiment(result, path: str) -> None:
    """Log-log plot of ``eps_hat(m)`` and ``c sqrt(n ln n / m)``.

    PNG metadata is stripped of the software version so reruns are
    byte-identical.
    """
    ms = np.array(list(result.eps_hat), dtype=float)
    eps = np.array(list(result.eps_hat.values()), dtype=float)
    grid = np.geomspace(ms.min(), ms.max(), 200) if len(ms) > 1 else ms
    n = result.config.n
    ref = result.c * np.sqrt(n * np.log(n) / grid)

    fig, ax = plt.subplots(figsize=(6.0, 4.0), dpi=100)
    ax.plot(ms, eps, "o-", label="measured error")
    ax.plot(grid, ref, "--", label=f"{result.c:.4f} sqrt(n ln n / m)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("samples m")
    ax.set_ylabel("estimated TV error")
    ax.set_title(f"n = {n}, {result.config.instances} instances, {result.config.runs} runs")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="png", metadata={"Software": None})
    plt.close(fig)
