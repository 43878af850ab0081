"""
Package for capacitated middlebox placement
"""

from middlebox_placer.core import Network
from middlebox_placer.core import PlacementInstance
from middlebox_placer.core import build_feasibility
from middlebox_placer.core import compute_apsp
from middlebox_placer.core import init
from middlebox_placer.core import print_progress
from middlebox_placer.placement import greedy_place
from middlebox_placer.placement import incremental_extend
from middlebox_placer.placement import Request
from middlebox_placer.placement import WeightedInstance
from middlebox_placer.placement import solve_weighted
from middlebox_placer.placement import exact_min_middleboxes
from middlebox_placer.core.io_wrapper import ScenarioConfig
from middlebox_placer.core.io_wrapper import read_instance
from middlebox_placer.core.io_wrapper import write_instance

name = "middlebox_placer"
