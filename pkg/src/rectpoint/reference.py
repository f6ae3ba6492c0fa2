"""Published 3-variable sigma models for the two task designs."""

from .core import SigmaModel

EXP1_SIGMA_X = SigmaModel("x", "3var", 0.8407, 0.1698, 0.01698, 0.3949)
EXP1_SIGMA_Y = SigmaModel("y", "3var", -1.037, 0.1508, 0.02911, 1.398)
EXP2_SIGMA_X = SigmaModel("x", "3var", 0.8713, 0.1614, 0.01273, 0.3162)
EXP2_SIGMA_Y = SigmaModel("y", "3var", 0.7221, 0.1309, 0.02284, 0.4282)

PUBLISHED = {
    "exp1": (EXP1_SIGMA_X, EXP1_SIGMA_Y),
    "exp2": (EXP2_SIGMA_X, EXP2_SIGMA_Y),
}
