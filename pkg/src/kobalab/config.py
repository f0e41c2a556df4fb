"""Experiment configuration: one JSON document, validated on load."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from .domains import get_domain
from .errors import ConfigError
from .rates import RateFunction


def parse_point(text):
    """Flat real coordinates ``re1,im1,re2,im2,...`` to a complex vector."""
    vals = [float(x) for x in (text.split(",") if isinstance(text, str) else text)]
    if not vals or len(vals) % 2:
        raise ValueError("need an even, nonzero number of real coordinates")
    return np.array(vals[0::2]) + 1j * np.array(vals[1::2])


def flatten(z):
    return [float(v) for c in np.asarray(z, complex) for v in (c.real, c.imag)]


@dataclass
class Ray:
    """``z(delta) = base + delta * approach`` with metric direction ``vector``."""

    base: np.ndarray
    vector: np.ndarray
    deltas: list
    approach: np.ndarray | None = None

    def point(self, domain, delta):
        a = -domain.normal(self.base) if self.approach is None else self.approach
        return self.base + delta * a / np.linalg.norm(a)


@dataclass
class ExperimentConfig:
    domain: str = "ball"
    rate: object = None
    budget: int = 1000
    seed: int = 0
    rays: list = field(default_factory=list)
    output: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    @property
    def rate_function(self):
        return None if self.rate is None else RateFunction.from_spec(self.rate)

    @classmethod
    def from_dict(cls, doc):
        try:
            jsonschema.validate(doc, load_schema("config"))
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"invalid config: {exc.message}", path=list(exc.absolute_path)) from exc
        rays = []
        for r in doc.get("rays", []):
            d = [float(x) for x in r["deltas"]]
            if any(b >= a for a, b in zip(d, d[1:])):
                raise ConfigError("ray deltas must be strictly decreasing", deltas=d)
            rays.append(Ray(parse_point(r["base"]), parse_point(r["vector"]), d,
                            parse_point(r["approach"]) if "approach" in r else None))
        cfg = cls(doc.get("domain", "ball"), doc.get("rate"), int(doc.get("budget", 1000)),
                  int(doc.get("seed", 0)), rays, dict(doc.get("output", {})), dict(doc.get("tolerances", {})))
        # resolve names eagerly so a bad document fails at load time
        if cfg.rate is not None:
            RateFunction.from_spec(cfg.rate)
        dom = get_domain(cfg.domain)
        for r in rays:
            if len(r.base) != dom.dimension or len(r.vector) != dom.dimension:
                raise ConfigError("ray coordinates do not match the domain dimension")
        return cfg

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def load_schema(kind):
    text = resources.files("kobalab").joinpath(f"schemas/{kind}.schema.json").read_text(encoding="utf-8")
    return json.loads(text)
