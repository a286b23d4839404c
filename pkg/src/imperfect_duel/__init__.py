"""Simulation lab for continuous dueling bandits under corrupted
comparative feedback."""

from .corruption import (
    BudgetLedger,
    FlipFirstC,
    GeneralizedLearnability,
    LearnabilityState,
    NoCorruption,
    RhoImperfect,
    adversarial_signed_corruption,
)
from .geometry import Ball, DiscreteEmbeddingSet, HalfspacePolytope, sample_unit_sphere
from .mirror import BallBarrier, MirrorState, inv_sqrt_psd
from .preference import (
    DuelOutcome,
    Linear,
    LinearLink,
    Logistic,
    QuadraticConcave,
    RescaledCosine,
    duel,
)

__version__ = "0.1.0"
