"""Exact finite-dimensional models of level-one equivariant KK-morphisms and their fusion."""
from .algebra import Algebra, AlgebraError, AlgebraHom, check_algebra
from .equivariance import GAction, M2Space, SemigroupG, check_action, classify_speciality
from .fusion import FusionRefused, dispatch
from .product import product_khom_ktheory
from .scalar import Scalar
from .sequences import L1Element, SplitExactSeq, validate_l1
from .words import MorphismWord, normalize

__version__ = "0.1.0"

__all__ = ["Algebra", "AlgebraError", "AlgebraHom", "FusionRefused", "GAction", "L1Element",
           "M2Space", "MorphismWord", "Scalar", "SemigroupG", "SplitExactSeq", "check_action",
           "check_algebra", "classify_speciality", "dispatch", "normalize", "product_khom_ktheory",
           "validate_l1"]
