from .chain_robust import chain_robust, local_certificate
from .con import NotACore, build_G, canonical_no, con_reduce
from .linear import (LinearError, LinearSystem, count_solutions, linear_chain, linear_solution_space,
                     rank_dimension, regroup_to_width3, regroup_to_width4, triple_variables)
from .output import EXISTENTIAL, OPEN, ReductionOutput
from .pp import pp_reduce, sat3_to_one_in_three
from .sat import (ClauseError, SignedClauseInstance, arrow_diagram, chain_definitions, chain_families, dimacs_export,
                  dimacs_import, gottlob_amplify, reduce_to_3sat, reduce_width)
