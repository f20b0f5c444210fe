"""stabilis: repair almost-actions of amalgams and HNN extensions over
finite groups into genuine ones, with certified closeness bounds."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    CapExceeded,
    NotIsomorphic,
    SpecError,
    StabilisError,
    VerificationError,
)
from .perm import Perm, Word, GenMap, hamming, coproduct, restrict, evaluate_word
from .groups import (
    BurnsideVector,
    FiniteGroup,
    GroupAction,
    Subgroup,
    classify,
    coset_action,
    realize,
)
from .restriction import Inclusion, compute_restriction_data, extension_property
from .conjugator import ConjugacyCertificate, conjugate_close
from .oracle import AlmostAction, repair, reshape
from .engine import (
    AmalgamSpec,
    HNNSpec,
    StabilizationResult,
    stabilize,
    verify,
)
