"""
Greedy incremental deployment: repeatedly deploy the candidate with the largest marginal gain of phi until every
pair is served. Since phi is monotone and submodular, the number of deployed middleboxes is within a factor
1 + ln(min(capacity, |P|)) of the optimum, and since the matching engine only augments, deployed middleboxes never
move and served pairs are never dropped.
"""
import logging

from middlebox_placer.core import errors
from middlebox_placer.placement import matching

logger = logging.getLogger(__name__)


class GreedyStep:
    """
    :ivar int iteration: 1 based index of the step
    :ivar int chosen: deployed middlebox
    :ivar int phi_after: number of served pairs after the step
    :ivar int gain: pairs gained by the step
    """

    def __init__(self, iteration, chosen, phi_after, gain):  # type: (int, int, int, int) -> None
        self.iteration = iteration
        self.chosen = chosen
        self.phi_after = phi_after
        self.gain = gain

    def __repr__(self):
        return "GreedyStep({}, chosen={}, phi={}, gain={})".format(self.iteration, self.chosen, self.phi_after,
                                                                   self.gain)

    def __eq__(self, other):
        return isinstance(other, GreedyStep) and self.as_row() == other.as_row()

    def as_row(self):
        return self.iteration, self.chosen, self.phi_after, self.gain


class GreedyTrace:
    """
    Record of a greedy run, which can be continued by :func:`incremental_extend`. Start a fresh one like this::

        trace = GreedyTrace.start(sets, capacity=4)

    :ivar list steps: GreedyStep per deployed middlebox
    :ivar Assignment state: assignment after the last step
    """

    def __init__(self, steps, state):  # type: (list, matching.Assignment) -> None
        self.steps = list(steps)
        self.state = state

    def __repr__(self):
        return "GreedyTrace(middleboxes={}, served={}/{})".format(
            self.middleboxes, self.state.assigned_count, len(self.state.owner))

    @staticmethod
    def start(sets, capacity):
        return GreedyTrace([], matching.Assignment(sets, capacity))

    @property
    def middleboxes(self):
        return list(self.state.active)

    @property
    def complete(self):
        return self.state.free_count == 0

    def phi_series(self):
        """
        :return: served pairs after 0, 1, 2, ... deployed middleboxes
        """
        return [0] + [step.phi_after for step in self.steps]

    def prefix(self, k):
        """
        Middleboxes deployed by the first k steps.
        """
        return [step.chosen for step in self.steps[:k]]


def _gain_bound(state, m, free):
    # the gain equals the final load of m, so it is bounded by the capacity and by |S_m|
    return min(state.capacity, len(state.sets.by_candidate[m]), free)


def scan_candidates(state, candidates, strategy=matching.BFS):
    """
    Best candidate of the given ones on a snapshot of the state, skipping candidates whose gain bound cannot beat
    the best gain found so far.

    :return: tuple (best gain, best candidate); the candidate is None when the list is empty
    """
    free = state.free_count
    best_gain, best = -1, None
    for m in sorted(candidates):
        if _gain_bound(state, m, free) <= best_gain:
            continue
        gain = matching.marginal_gain(state, m, strategy)
        if gain > best_gain:
            best_gain, best = gain, m
            if best_gain == min(state.capacity, free):
                break
    return best_gain, best


_scan_task = None


def _remote_scan():
    global _scan_task
    if _scan_task is None:
        import ray
        _scan_task = ray.remote(num_cpus=1)(scan_candidates)
    return _scan_task


def _parallel_scan(state, candidates, threads, strategy):
    import ray
    scan = _remote_scan()
    snapshot = ray.put(state)
    chunks = [candidates[i::threads] for i in range(threads)]
    results = ray.get([scan.remote(snapshot, chunk, strategy) for chunk in chunks if chunk])
    # ties resolve to the smallest node id regardless of how the candidates were split
    return max(results, key=lambda result: (result[0], -result[1]))


def greedy_step(state, threads=1, strategy=matching.BFS):  # type: (matching.Assignment, int, str) -> tuple
    """
    One iteration of the greedy algorithm: finds the inactive candidate with the largest marginal gain (smallest
    node id on ties) and deploys it on the state.

    :param Assignment state: maximum assignment with free pairs left, updated in place
    :param int threads: parallel workers for the candidate scan, ray must be initialized when greater than 1
    :return: tuple (chosen, gain)
    :raises Stalled: when no candidate increases the number of served pairs
    """
    candidates = [m for m in state.sets.candidates if not state.is_active(m)]
    if threads > 1 and len(candidates) > 1:
        best_gain, chosen = _parallel_scan(state, candidates, threads, strategy)
    else:
        best_gain, chosen = scan_candidates(state, candidates, strategy)

    if chosen is None or best_gain <= 0:
        raise errors.Stalled(
            "No candidate serves any of the {} free pairs".format(state.free_count),
            free_pairs=state.free_pairs(),
            deployed=list(state.active)
        )
    _, gained = matching.add_middlebox(state, chosen, strategy)
    assert gained == best_gain, "Replayed gain {} differs from the scanned gain {}".format(gained, best_gain)
    return chosen, gained


def incremental_extend(trace, budget=None, threads=1, strategy=matching.BFS):
    # type: (GreedyTrace, int, int, str) -> GreedyTrace
    """
    Continues a trace by budget greedy steps, or until all pairs are served. The given trace is not modified.

    :param GreedyTrace trace: trace to continue
    :param int budget: number of steps, unlimited when None
    :return: new GreedyTrace
    """
    if budget is not None and budget < 1:
        raise errors.DomainError("The budget must be at least 1, got {}".format(budget))
    state = trace.state.copy()
    steps = list(trace.steps)
    taken = 0
    while state.free_count > 0 and (budget is None or taken < budget):
        chosen, gain = greedy_step(state, threads, strategy)
        steps.append(GreedyStep(len(steps) + 1, chosen, state.assigned_count, gain))
        logger.info("Step %d: middlebox at node %d serves %d more pairs (%d/%d served)",
                    len(steps), chosen, gain, state.assigned_count, len(state.owner))
        taken += 1
    return GreedyTrace(steps, state)


def greedy_place(instance, sets, threads=1, strategy=matching.BFS):
    # type: (PlacementInstance, FeasibilitySets, int, str) -> GreedyTrace
    """
    Runs the greedy deployment until every pair is served::

        trace = greedy_place(instance, build_feasibility(instance))
        trace.middleboxes  # deployed locations in order of deployment

    :param PlacementInstance instance: the instance, provides the capacity
    :param FeasibilitySets sets: its feasibility sets, every pair must have a feasible candidate
    :param int threads: parallel workers for the candidate scans
    :param str strategy: augmentation strategy of the matching engine
    :return: GreedyTrace of the complete run
    :raises Stalled: when the instance turns out infeasible
    """
    trace = incremental_extend(GreedyTrace.start(sets, instance.capacity), None, threads, strategy)
    logger.info("Greedy placement finished with %d middleboxes", len(trace.steps))
    return trace
