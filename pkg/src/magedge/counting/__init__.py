"""Eigenvalue counting in the gap above a band: effective operators, oracle, fit."""

from .effective import (
    EffectiveModel,
    M1Operator,
    NuTables,
    capacity,
    count_G2,
    count_G2_many,
    ent,
    gram_G2,
    m1_nystrom,
    nu_bounds,
    sandwich_bounds,
    stable_G2_counts,
)
from .fit import CountingReport, GaussianFit, gaussian_fit
from .oracle import BirmanSchwinger, bs_oracle
from .perturbation import Envelope, PerturbationV, Rectangle
from .pipeline import run_counting

__all__ = [
    "BirmanSchwinger",
    "CountingReport",
    "EffectiveModel",
    "Envelope",
    "GaussianFit",
    "M1Operator",
    "NuTables",
    "PerturbationV",
    "Rectangle",
    "bs_oracle",
    "capacity",
    "count_G2",
    "count_G2_many",
    "ent",
    "gaussian_fit",
    "gram_G2",
    "m1_nystrom",
    "nu_bounds",
    "run_counting",
    "sandwich_bounds",
    "stable_G2_counts",
]
