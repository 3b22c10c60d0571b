"""Probabilistic constraint logic programming with log-linear models over
proof trees, estimated from unparsed queries."""

from loglinclp.derivation import ProofNode, ProofTree, answer, enumerate_proof_trees, solve
from loglinclp.estimator import (IMConfig, IMTrace, auxiliary, closed_form_update, estimate,
                                 im_step, solve_update)
from loglinclp.hierarchy import BOTTOM, TypeHierarchy, glb
from loglinclp.model import (LogLinearModel, TrainingSample, dump_model, log_likelihood,
                             parse_model)
from loglinclp.patterns import (PropertyPattern, count_occurrences, generate_candidates,
                                parse_pattern, property_vector)
from loglinclp.program import Atom, Clause, Constraint, Goal, Program, load_corpus, load_program, parse_goal
from loglinclp.selector import GainReport, gain, gain_alpha, select_property
from loglinclp.trainer import InduceConfig, fit, induce, rank

__version__ = "0.1.0"
