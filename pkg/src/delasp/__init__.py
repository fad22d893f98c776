"""DEL[ASP]: epistemic logic programs as action descriptions for dynamic epistemic logic.

The main entry points are re-exported here; see the submodules for details.
"""

from .delcheck import EvaluationRegistry, del_models, del_satisfies, entails_over
from .errors import CapExceeded, DelAspError, LayerError, NonClassicalInitialState, ParseError, UnboundObject
from .htcore import BeliefHTModel, EpistemicModel, HTModel, bisimilar, ht_satisfies, is_equilibrium, preceq
from .plan import Action, IfK, PlanningTask, Seq, Skip, is_solution, search, translate
from .syntax import Atom, Literal, Theory
from .textio import (
    export_dot,
    format_formula,
    format_model,
    format_plan,
    load_event_model,
    load_model,
    load_plan,
    load_program,
    load_task,
    parse_event_model,
    parse_formula,
    parse_model,
    parse_plan,
    parse_program,
    parse_task,
)
from .update import EventModel, UpdateResult, asp_update, event_product_update
from .worldview import UNDEFINED, WorldView, answer_sets, mod, world_views

__version__ = "0.1.0"
