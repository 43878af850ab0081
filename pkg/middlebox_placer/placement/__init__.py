"""
The placement algorithms
"""

from middlebox_placer.placement.matching import Assignment
from middlebox_placer.placement.matching import phi
from middlebox_placer.placement.greedy import GreedyTrace
from middlebox_placer.placement.greedy import greedy_place
from middlebox_placer.placement.greedy import incremental_extend
from middlebox_placer.placement.weighted import Request
from middlebox_placer.placement.weighted import WeightedInstance
from middlebox_placer.placement.weighted import solve_weighted
from middlebox_placer.placement.oracle import exact_min_middleboxes
from middlebox_placer.placement.oracle import max_assignment_for_n
from middlebox_placer.placement.oracle import exact_weighted_min_middleboxes
from middlebox_placer.placement.report import RunReport
