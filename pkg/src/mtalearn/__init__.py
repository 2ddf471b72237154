"""Multiplicity tree automata over exact fields: evaluation on trees and DAGs,
equivalence with small counterexamples, exact learning from queries, and
reductions to and from arithmetic circuit identity testing."""

from .algebra import GF, QQ, Matrix, field_from_tag
from .automaton import Mta, direct_sum, format_mta, parse_mta, product, zero_automaton
from .circuits import Circuit, acit_random_test, acit_to_mta, equiv_to_acit, eval_circuit, normalize_circuit
from .equivalence import brute_force_equiv, check_equiv, forward_basis, hankel_rank
from .errors import FormatError
from .learner import SimulatedTeacher, TeacherInconsistency, lmta, minimize
from .trees import Dag, DagPool, RankedAlphabet, Tree, canonicalize, format_dag, parse_dag, unfold

__version__ = "0.1.0"

__all__ = [
    "GF", "QQ", "Matrix", "field_from_tag",
    "Mta", "direct_sum", "format_mta", "parse_mta", "product", "zero_automaton",
    "Circuit", "acit_random_test", "acit_to_mta", "equiv_to_acit", "eval_circuit", "normalize_circuit",
    "brute_force_equiv", "check_equiv", "forward_basis", "hankel_rank",
    "FormatError",
    "SimulatedTeacher", "TeacherInconsistency", "lmta", "minimize",
    "Dag", "DagPool", "RankedAlphabet", "Tree", "canonicalize", "format_dag", "parse_dag", "unfold",
]
