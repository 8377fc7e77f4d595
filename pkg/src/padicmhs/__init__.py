"""padicmhs: exact p-adic expansion of prime-indexed quantities into
truncated series of multiple harmonic sums, with an algebraic prover for
supercongruences and an exact-rational numeric cross-check."""

__version__ = "0.1.0"

from .arith import (
    INFINITY,
    bernoulli,
    binomial,
    laurent_expand,
    padic_valuation,
    power_sum_poly,
)
from .compositions import (
    enumerate_compositions,
    format_comp,
    parse_comp,
    shuffle,
    stuffle,
    weight,
)
from .expansions import (
    canonicalize,
    expand_alternating,
    expand_apery,
    expand_binomial_poly,
    expand_binomial_pp,
    expand_curious,
    expand_half_harmonic,
    expand_power_sum,
    expand_quantity,
    expand_rational,
    expand_restricted_harmonic,
    expand_sum_poly_mhs,
    expand_zeta_p,
    factorial_ratio,
)
from .oracle import (
    DEFAULT_WORK_BUDGET,
    NumericReport,
    PrimeWindow,
    WorkBudgetExceeded,
    check_numeric,
    eval_mhs,
    eval_polylog_sum,
    eval_quantity,
    eval_series_terms,
    primes_in,
)
from .powersums import full_sum, poly_sum, valuation_bound
from .prover import (
    ProofCertificate,
    RelationBasis,
    dump_certificates,
    generate_relations,
    jarossay_relation,
    provable_valuation,
    prove_mixed,
    prove_supercongruence,
    prove_weighted,
    replay_certificate,
    verify_certificate_text,
)
from .quantities import QuantitySpec, format_quantity, parse_quantity
from .series import CongruenceStatement, MhsSeries

__all__ = [
    "INFINITY",
    "CongruenceStatement",
    "DEFAULT_WORK_BUDGET",
    "MhsSeries",
    "NumericReport",
    "PrimeWindow",
    "ProofCertificate",
    "QuantitySpec",
    "RelationBasis",
    "WorkBudgetExceeded",
    "__version__",
    "bernoulli",
    "binomial",
    "canonicalize",
    "check_numeric",
    "dump_certificates",
    "enumerate_compositions",
    "eval_mhs",
    "eval_polylog_sum",
    "eval_quantity",
    "eval_series_terms",
    "expand_alternating",
    "expand_apery",
    "expand_binomial_poly",
    "expand_binomial_pp",
    "expand_curious",
    "expand_half_harmonic",
    "expand_power_sum",
    "expand_quantity",
    "expand_rational",
    "expand_restricted_harmonic",
    "expand_sum_poly_mhs",
    "expand_zeta_p",
    "factorial_ratio",
    "format_comp",
    "format_quantity",
    "full_sum",
    "generate_relations",
    "jarossay_relation",
    "laurent_expand",
    "padic_valuation",
    "parse_comp",
    "parse_quantity",
    "poly_sum",
    "power_sum_poly",
    "primes_in",
    "provable_valuation",
    "prove_mixed",
    "prove_supercongruence",
    "prove_weighted",
    "replay_certificate",
    "shuffle",
    "stuffle",
    "valuation_bound",
    "verify_certificate_text",
    "weight",
]
