# bench.py
# Timings of the transform and counting kernels across group sizes, reported as a pandas
# table with Student-t confidence intervals and optionally drawn to an SVG.
import time
from dataclasses import dataclass
from math import sqrt
from typing import Callable, Dict, List

import numpy as np
import pandas as pd
from scipy import stats

from src.constructions import random_set
from src.counting import lambda_family, lambda_fourier, lambda_naive
from src.group_core import Z2Set, fibre_decompose
from src.harmonic import dft4, indicator_transform

KERNELS = ("wht", "dft4", "lambda_naive", "lambda_fourier", "lambda_family")


@dataclass
class KernelTiming:
    """Repeated wall-clock timings of one kernel at one size."""

    kernel: str
    n: int
    durations: List[float]

    @property
    def n_repeats(self) -> int:
        return len(self.durations)

    @property
    def mean(self) -> float:
        return float(np.mean(self.durations))

    @property
    def stddev(self) -> float:
        return float(np.std(self.durations, ddof=1)) if self.n_repeats > 1 else 0.0

    def confidence_interval(self, confidence_level: float = 0.95):
        """
        Returns the confidence interval of the mean as (lower_bound, upper_bound) using
        Student's t-distribution.
        """
        if self.n_repeats < 2:
            raise ValueError("At least two measurements are required for confidence interval calculation.")
        sem = self.stddev / sqrt(self.n_repeats)
        if sem == 0:
            return self.mean, self.mean
        return stats.t.interval(confidence_level, self.n_repeats - 1, loc=self.mean, scale=sem)

    def __str__(self):
        return f"{self.kernel} (n={self.n}): {self.mean:.6f} s, StdDev: {self.stddev:.6f} s, n_repeats: {self.n_repeats}"


def time_call(fn: Callable[[], object], repeats: int) -> List[float]:
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        durations.append(time.perf_counter() - start)
    return durations


def _kernel_calls(n: int, seed: int) -> Dict[str, Callable[[], object]]:
    A = random_set(n, max(1, 4**n // 4), seed)
    F = fibre_decompose(A)
    # the WHT is timed on a set in Z_2^{2n}, a group of the same order as Z_4^n
    rng = np.random.default_rng(seed)
    B = Z2Set(2 * n, np.flatnonzero(rng.integers(0, 2, size=4**n)).tolist())
    return {
        "wht": lambda: indicator_transform(B),
        "dft4": lambda: dft4(A),
        "lambda_naive": lambda: lambda_naive(A),
        "lambda_fourier": lambda: lambda_fourier(A),
        "lambda_family": lambda: lambda_family(F),
    }


def run_bench(max_n: int = 3, repeats: int = 5, seed: int = 0, verbose: bool = False) -> pd.DataFrame:
    """
    Time every kernel for n = 1..max_n.

    Returns:
    - pd.DataFrame: one row per (kernel, n) with mean, stddev and 95% interval in seconds
    """
    if max_n < 1 or repeats < 2:
        raise ValueError("bench needs max_n >= 1 and at least two repeats.")
    rows = []
    for n in range(1, max_n + 1):
        for kernel, call in _kernel_calls(n, seed).items():
            timing = KernelTiming(kernel, n, time_call(call, repeats))
            low, high = timing.confidence_interval()
            if verbose:
                print(timing)
            rows.append(
                {
                    "kernel": kernel,
                    "n": n,
                    "group_order": 4**n,
                    "mean_s": timing.mean,
                    "std_s": timing.stddev,
                    "ci_low_s": low,
                    "ci_high_s": high,
                    "repeats": timing.n_repeats,
                }
            )
    return pd.DataFrame(rows)


def format_table(df: pd.DataFrame) -> str:
    return df.to_string(index=False, float_format=lambda v: f"{v:.6f}")


def plot_bench(df: pd.DataFrame, path: str) -> None:
    """Mean time per kernel against group order, log-log, written as SVG."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for kernel, group in df.groupby("kernel", sort=True):
        ax.errorbar(
            group["group_order"],
            group["mean_s"],
            yerr=[group["mean_s"] - group["ci_low_s"], group["ci_high_s"] - group["mean_s"]],
            marker="o",
            capsize=3,
            label=kernel,
        )
    ax.set_xscale("log", base=4)
    ax.set_yscale("log")
    ax.set_xlabel("|G|")
    ax.set_ylabel("time (s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
