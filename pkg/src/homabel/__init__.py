"""homabel: exact graded-coalgebra and pre-Lie bracket computations with
homotopy-abelianity certification at a finite truncation arity.

All arithmetic is over the rationals and exact.  The main entry points are
the :mod:`homabel.prelie` tower builder, the :mod:`homabel.linfty`
certification operations, and the ``homabel`` command line tool.
"""

from .graded import (
    AltMap,
    Fraction,
    GradedSpace,
    SymMap,
    TensorMap,
    decalage,
    koszul_sign,
    unshuffles,
)
from .coalgebra import (
    CoalgebraMorphism,
    Coderivation,
    TensorCoderivation,
    bracket_with_sigma,
    compose_morphisms,
    conjugate,
    corestrict,
    ev1,
    expand,
    expand_morphism,
    gerstenhaber_bracket,
    gerstenhaber_product,
    identity_morphism,
    invert_morphism,
    nr_bracket,
    nr_product,
    sigma,
)

__all__ = [
    "AltMap",
    "CoalgebraMorphism",
    "Coderivation",
    "Fraction",
    "GradedSpace",
    "SymMap",
    "TensorCoderivation",
    "TensorMap",
    "bracket_with_sigma",
    "compose_morphisms",
    "conjugate",
    "corestrict",
    "decalage",
    "ev1",
    "expand",
    "expand_morphism",
    "gerstenhaber_bracket",
    "gerstenhaber_product",
    "identity_morphism",
    "invert_morphism",
    "koszul_sign",
    "nr_bracket",
    "nr_product",
    "sigma",
    "unshuffles",
]

__version__ = "0.1.0"
