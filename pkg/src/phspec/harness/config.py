"""Run configuration: one JSON object drives one experiment."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .. import metric as metric_mod
from ..metric import Metric

EXPERIMENTS = (
    "real_density",
    "real_fraction_sweep",
    "complex_scatter",
    "uniformity",
    "gap_grid",
    "verify",
    "semicircle",
)


@dataclass
class RunConfig:
    experiment: str
    metric: Metric
    n: int = 256
    m: float = 1.0
    seed: int = 1
    samples: int = 100
    bins: int = 101
    hist_range: tuple | None = None      # 1d histogram range, default band-fitted
    grid_points: int = 101               # per axis, gap_grid
    grid_extent: float | None = None     # half-width, default 1.2/m
    lambdas: tuple = ()                  # real_fraction_sweep points
    out_dir: str = "out"
    threads: int = 1
    dump_samples: bool = False

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; pick one of {EXPERIMENTS}")
        if self.n < 2 or self.samples < 1 or not self.m > 0 or self.threads < 1:
            raise ValueError("n >= 2, samples >= 1, m > 0, threads >= 1 required")
        if self.experiment == "real_fraction_sweep" and not self.lambdas:
            raise ValueError("real_fraction_sweep needs a nonempty 'lambdas' list")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if self.experiment != "real_fraction_sweep":
            metric_mod.realize(self.metric, self.n)   # realizability check up front

    def to_dict(self) -> dict:
        d = {
            "experiment": self.experiment,
            "metric": metric_mod.to_config(self.metric),
            "n": self.n,
            "m": self.m,
            "seed": self.seed,
            "samples": self.samples,
            "bins": self.bins,
            "grid_points": self.grid_points,
            "out_dir": self.out_dir,
            "threads": self.threads,
            "dump_samples": self.dump_samples,
        }
        if self.hist_range is not None:
            d["hist_range"] = list(self.hist_range)
        if self.grid_extent is not None:
            d["grid_extent"] = self.grid_extent
        if self.lambdas:
            d["lambdas"] = list(self.lambdas)
        return d

    def content_hash(self) -> str:
        """Git-style sha1 of the canonical JSON form."""
        blob = json.dumps(self.to_dict(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha1(b"blob %d\0" % len(blob) + blob).hexdigest()


def from_dict(d: dict, **overrides) -> RunConfig:
    d = dict(d)
    d.update({k: v for k, v in overrides.items() if v is not None})
    metric = metric_mod.from_config(d["metric"])
    return RunConfig(
        experiment=d["experiment"],
        metric=metric,
        n=int(d.get("n", 256)),
        m=float(d.get("m", 1.0)),
        seed=int(d.get("seed", 1)),
        samples=int(d.get("samples", 100)),
        bins=int(d.get("bins", 101)),
        hist_range=tuple(d["hist_range"]) if "hist_range" in d else None,
        grid_points=int(d.get("grid_points", 101)),
        grid_extent=float(d["grid_extent"]) if "grid_extent" in d else None,
        lambdas=tuple(d.get("lambdas", ())),
        out_dir=str(d.get("out_dir", "out")),
        threads=int(d.get("threads", 1)),
        dump_samples=bool(d.get("dump_samples", False)),
    )


def load(path, **overrides) -> RunConfig:
    with open(path) as fh:
        return from_dict(json.load(fh), **overrides)
