"""Classical non-associative non-commutative linear logic with
subexponentials: formulas, structured sequents, proof search, proof
checking, cut elimination, and the embedding of the intuitionistic systems.
"""

from .formulas import (  # noqa: F401
    Signature,
    SignatureError,
    UndefinedCounter,
    DEFAULT_SIGNATURE,
    atom,
    bang,
    counter,
    dual,
    limp,
    load_signature,
    negatom,
    par,
    plus,
    quest,
    rimp,
    tensor,
    translate,
    with_,
    ONE,
    BOT,
    TOP,
    ZERO,
)
from .structures import (  # noqa: F401
    EMPTY,
    Context,
    counter_structure,
    designate,
    equivalence_class,
    equivalent,
    hollow,
    leaf,
    neg_translate,
    pair,
    reverse,
    upset,
)
from .calculus import (  # noqa: F401
    CalculusConfig,
    CheckResult,
    MalformedProof,
    OneSided,
    Proof,
    Step,
    TwoSided,
    check,
    endsequent,
    expand_identity,
    one_sided,
    two_sided,
)
from .syntax import (  # noqa: F401
    ParseError,
    fmt_formula,
    fmt_sequent,
    fmt_structure,
    parse_formula,
    parse_sequent,
    parse_structure,
)

__version__ = "0.1.0"
