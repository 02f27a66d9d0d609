"""Published absolute errors for the Gaussian wave packet (test2, N = 25, h = 1/20) and comparison helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .solver import SAMPLE_TIMES, RunConfig, error_table

# t: (max_re, max_im, avg_re, avg_im)
PUBLISHED_ERRORS = {
    0.10: (5.5837e-05, 7.2420e-05, 5.2562e-06, 6.5224e-06),
    0.25: (1.1025e-04, 1.6687e-04, 1.3543e-05, 1.2252e-05),
    0.50: (6.4010e-05, 6.5695e-05, 1.8633e-05, 1.8118e-05),
    0.75: (6.6335e-05, 8.7873e-05, 1.8833e-05, 1.8476e-05),
    1.00: (8.9998e-05, 9.2257e-05, 1.4600e-05, 1.6865e-05),
}
PUBLISHED_N = 25
PUBLISHED_H = 1.0 / 20


@dataclass(frozen=True)
class PublishedComparison:
    k0: float
    reports: tuple
    worst_log10_ratio: float  # max over entries of |log10(ours / published)|

    @property
    def within_one_order(self):
        return self.worst_log10_ratio <= 1.0


def compare_to_published(reports):
    worst = 0.0
    for rep in reports:
        ours = (rep.max_re, rep.max_im, rep.avg_re, rep.avg_im)
        for a, b in zip(ours, PUBLISHED_ERRORS[round(rep.t, 2)]):
            ratio = math.inf if a <= 0 else abs(math.log10(a / b))
            worst = max(worst, ratio)
    return worst


def published_sweep(k0s=(1.0, 2.0), config=None):
    """Run the published configuration (test2, N = 25, h = 1/20) for each k0; return comparisons, best first."""
    base = config or RunConfig(problem="test2", N=PUBLISHED_N, h=PUBLISHED_H)
    out = []
    for k0 in k0s:
        reports = tuple(error_table(replace(base, problem="test2", k0=float(k0)), SAMPLE_TIMES))
        out.append(PublishedComparison(float(k0), reports, compare_to_published(reports)))
    return sorted(out, key=lambda c: c.worst_log10_ratio)
