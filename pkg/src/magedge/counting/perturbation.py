"""Non-negative, compactly supported perturbations built from weighted rectangles."""

from dataclasses import dataclass
import itertools
import math

import numpy as np


@dataclass(frozen=True)
class Rectangle:
    x0: float
    x1: float
    y0: float
    y1: float
    amplitude: float = 1.0

    def __post_init__(self):
        vals = (self.x0, self.x1, self.y0, self.y1, self.amplitude)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("rectangle bounds and amplitude must be finite")
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle [{self.x0}, {self.x1}] x [{self.y0}, {self.y1}]")
        if self.amplitude <= 0:
            raise ValueError("rectangle amplitude must be positive")

    @property
    def width(self):
        return self.x1 - self.x0

    @property
    def height(self):
        return self.y1 - self.y0

    @property
    def x_interval(self):
        return (self.x0, self.x1)

    def contains(self, x, y):
        return (self.x0 < x) & (x < self.x1) & (self.y0 < y) & (y < self.y1)

    def corners(self):
        return list(itertools.product((self.x0, self.x1), (self.y0, self.y1)))

    def scaled(self, factor):
        return Rectangle(self.x0, self.x1, self.y0, self.y1, self.amplitude * factor)


@dataclass(frozen=True)
class Envelope:
    """Decay envelope C0 (1 + |x|)^-m1 (1 + |y|)^-m2."""

    c0: float
    m1: float
    m2: float

    def __call__(self, x, y):
        return self.c0 * (1.0 + np.abs(x)) ** -self.m1 * (1.0 + np.abs(y)) ** -self.m2


@dataclass(frozen=True)
class PerturbationV:
    """V = sum_r C_r chi_{R_r}; overlapping rectangles add."""

    rectangles: tuple
    envelope: Envelope = None

    def __post_init__(self):
        object.__setattr__(self, "rectangles", tuple(self.rectangles))
        if self.envelope is not None:
            self.check_envelope()

    @classmethod
    def box(cls, x0, x1, y0, y1, amplitude=1.0, envelope=None):
        return cls((Rectangle(x0, x1, y0, y1, amplitude),), envelope)

    @property
    def is_zero(self):
        return not self.rectangles

    def __call__(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        out = np.zeros(np.broadcast(x, y).shape)
        for r in self.rectangles:
            out = out + r.amplitude * r.contains(x, y)
        return out

    def _cells(self):
        """Sample points, one per cell of the grid spanned by all rectangle edges."""
        xs = sorted({v for r in self.rectangles for v in (r.x0, r.x1)})
        ys = sorted({v for r in self.rectangles for v in (r.y0, r.y1)})
        xc = [(a + b) / 2 for a, b in zip(xs, xs[1:])]
        yc = [(a + b) / 2 for a, b in zip(ys, ys[1:])]
        return [(x, y) for x in xc for y in yc]

    def sup(self):
        """Smallest C_+ with V <= C_+ on its support."""
        if self.is_zero:
            return 0.0
        return max(float(self(x, y)) for x, y in self._cells())

    def bounding_box(self):
        """Rectangle R_+ = I_+ x J_+ containing the support, amplitude C_+."""
        if self.is_zero:
            raise ValueError("zero perturbation has no support")
        return Rectangle(
            min(r.x0 for r in self.rectangles),
            max(r.x1 for r in self.rectangles),
            min(r.y0 for r in self.rectangles),
            max(r.y1 for r in self.rectangles),
            self.sup(),
        )

    def check_envelope(self):
        """V <= envelope on the support; the envelope is smallest at the far corners."""
        env = self.envelope
        for r in self.rectangles:
            level = float(self(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1)))
            edge_pts = r.corners() + [
                (0.5 * (r.x0 + r.x1), r.y0),
                (0.5 * (r.x0 + r.x1), r.y1),
                (r.x0, 0.5 * (r.y0 + r.y1)),
                (r.x1, 0.5 * (r.y0 + r.y1)),
            ]
            for x, y in edge_pts:
                if max(level, r.amplitude) > env(x, y) * (1 + 1e-12):
                    raise ValueError(
                        f"V exceeds the envelope C0 (1+|x|)^-m1 (1+|y|)^-m2 at ({x}, {y})"
                    )

    def scaled(self, factor):
        return PerturbationV(tuple(r.scaled(factor) for r in self.rectangles), None)
