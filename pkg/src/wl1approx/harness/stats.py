"""Box-plot statistics and gnuplot-friendly tables.

Quartiles use linear interpolation between order statistics (numpy's default
``percentile`` method). Whiskers follow Tukey: they reach the most extreme
observations within 1.5 IQR of the box; anything beyond is an outlier.
Non-finite values count as failures and are excluded.
"""
from __future__ import annotations

import math

import numpy as np

WHISKER_IQR = 1.5


def box_stats(values) -> dict:
    arr = np.asarray(values, dtype=float)
    ok = arr[np.isfinite(arr)]
    out = {"count": int(ok.size), "failures": int(arr.size - ok.size)}
    if ok.size == 0:
        nan = math.nan
        out.update(mean=nan, median=nan, q1=nan, q3=nan, whisker_low=nan, whisker_high=nan, outliers=[])
        return out
    q1, med, q3 = np.percentile(ok, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr
    inside = ok[(ok >= lo_fence) & (ok <= hi_fence)]
    out.update(
        mean=float(ok.mean()),
        median=float(med),
        q1=float(q1),
        q3=float(q3),
        whisker_low=float(inside.min()),
        whisker_high=float(inside.max()),
        outliers=sorted(float(v) for v in ok[(ok < lo_fence) | (ok > hi_fence)]),
    )
    return out


def gnuplot_blocks(cells: list[dict], group_keys=("decoder", "beta"), x_key="param") -> str:
    """One data block per group (separated by two blank lines, addressable with ``index``).

    Columns: x, whisker_low, q1, median, q3, whisker_high, mean.
    """
    groups: dict = {}
    for c in cells:
        groups.setdefault(tuple(c[k] for k in group_keys), []).append(c)
    chunks = []
    for key, rows in groups.items():
        lines = ["# " + " ".join(f"{k}={v}" for k, v in zip(group_keys, key))]
        lines.append("# x whisker_low q1 median q3 whisker_high mean")
        for c in sorted(rows, key=lambda r: r[x_key]):
            lines.append(
                " ".join(
                    f"{c[k]:.10g}"
                    for k in (x_key, "whisker_low", "q1", "median", "q3", "whisker_high", "mean")
                )
            )
        chunks.append("\n".join(lines))
    return "\n\n\n".join(chunks) + "\n"
