"""Exact Burnside-ring specialization: snc models, equivariant classes, toric fans and pairs."""

from .core import (
    Atom,
    AtomTable,
    BirClass,
    BurnElement,
    BurnsideError,
    FactsRegistry,
    FieldLabel,
    FieldMorphism,
    TPolynomial,
    base_change,
    eval_T1,
    is_affine_divisible,
)
from .equivariant import EquivBurnElement, TorsorClass, TorsorFacts, TorsorFactor, chi, equiv_mul, psi, rho_mu
from .scheme import (
    Morphism,
    SchemeBurnElement,
    SncPair,
    SupportPoint,
    SupportScheme,
    blowup_pair,
    boundary,
    is_B_rational,
    pushforward,
    singular_specialization,
)
from .snc import BlowupSpec, CenterPiece, DualComplex, Stratum, blowup, rho, rho_d, rho_hat, specialize_rational_check
from .toric import (
    ConeSpec,
    Fan,
    build_fan,
    build_fan_alt,
    certify,
    euler_interior,
    product_model,
    verify_multiplicativity,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
