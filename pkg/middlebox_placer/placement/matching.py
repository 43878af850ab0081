"""
Capacitated assignment of pairs to deployed middleboxes. The bipartite graph has the active middleboxes on one side
and the pairs on the other, a middlebox m is adjacent to the pairs of its feasibility set S_m. An
:class:`Assignment` is kept maximum while middleboxes are added one by one: a new middlebox only ever starts
augmenting paths, so already served pairs stay served (possibly handed over to another middlebox) and no middlebox
is ever moved.
"""
import collections
import logging

from middlebox_placer.core import errors

logger = logging.getLogger(__name__)

BFS = "bfs"
LAYERED = "layered"


class Assignment:
    """
    Partial assignment of pairs to active middleboxes. The state is mutated by :func:`add_middlebox` and
    :func:`apply_augmenting_path` only; use :meth:`copy` for an independent snapshot.

    :param FeasibilitySets sets: feasibility sets of the instance
    :param int capacity: maximal number of pairs per middlebox

    :ivar list owner: pair index -> serving middlebox, None for a free pair
    :ivar dict load: active middlebox -> number of served pairs
    :ivar list active: active middleboxes in order of deployment
    """

    def __init__(self, sets, capacity):  # type: (FeasibilitySets, int) -> None
        assert capacity >= 1, "Capacity must be positive, got {}".format(capacity)
        self.sets = sets
        self.capacity = capacity
        self.owner = [None] * sets.pair_count
        self.load = {}
        self.active = []

    def __repr__(self):
        return "Assignment(active={}, assigned={}/{})".format(self.active, self.assigned_count, len(self.owner))

    def copy(self):  # type: () -> Assignment
        snapshot = Assignment.__new__(Assignment)
        snapshot.sets = self.sets
        snapshot.capacity = self.capacity
        snapshot.owner = list(self.owner)
        snapshot.load = dict(self.load)
        snapshot.active = list(self.active)
        return snapshot

    def is_active(self, m):  # type: (int) -> bool
        return m in self.load

    @property
    def assigned_count(self):
        return sum(1 for m in self.owner if m is not None)

    @property
    def free_count(self):
        return len(self.owner) - self.assigned_count

    def assigned_pairs(self):
        return {p for p, m in enumerate(self.owner) if m is not None}

    def free_pairs(self):
        return [p for p, m in enumerate(self.owner) if m is None]

    def free_capacity(self, m):  # type: (int) -> int
        return self.capacity - self.load[m]

    def served_by(self, m):
        """
        :return: sorted pair indices currently assigned to middlebox m
        """
        return [p for p, owner in enumerate(self.owner) if owner == m]

    def restricted_count(self, middleboxes):
        """
        Number of pairs the assignment routes through the given middleboxes.
        """
        middleboxes = set(middleboxes)
        return sum(1 for m in self.owner if m in middleboxes)

    def as_dict(self):
        """
        :return: dict pair index -> middlebox for the assigned pairs
        """
        return {p: m for p, m in enumerate(self.owner) if m is not None}

    def check(self):
        """
        Asserts the assignment invariants: capacities, feasibility and only active middleboxes serving pairs.
        """
        counted = collections.Counter(m for m in self.owner if m is not None)
        for p, m in enumerate(self.owner):
            if m is None:
                continue
            assert m in self.load, "Pair {} is assigned to inactive middlebox {}".format(p, m)
            assert p in self.sets.by_candidate[m], "Pair {} is not feasible at middlebox {}".format(p, m)
        for m in self.active:
            assert counted[m] == self.load[m], "Load of {} is {} but {} pairs are assigned".format(
                m, self.load[m], counted[m])
            assert self.load[m] <= self.capacity, "Middlebox {} exceeds the capacity".format(m)


class AugmentingPath:
    """
    Alternating path m_1, p_1, m_2, p_2, ..., m_k, p_k. The edge (m_i, p_i) is a non-assignment edge, the edge
    (p_i, m_{i+1}) is an assignment edge, m_1 has free capacity and p_k is a free pair.

    :ivar tuple middleboxes: m_1..m_k
    :ivar tuple pairs: p_1..p_k
    """

    def __init__(self, middleboxes, pairs):
        assert len(middleboxes) == len(pairs) and pairs, "Malformed augmenting path"
        self.middleboxes = tuple(middleboxes)
        self.pairs = tuple(pairs)

    def __repr__(self):
        return "AugmentingPath({})".format(" ".join("m{} p{}".format(m, p) for m, p in self))

    def __iter__(self):
        return iter(zip(self.middleboxes, self.pairs))

    def __eq__(self, other):
        return isinstance(other, AugmentingPath) and tuple(self) == tuple(other)

    def __len__(self):
        """
        Number of edges of the path.
        """
        return 2 * len(self.pairs) - 1

    @property
    def start(self):
        return self.middleboxes[0]

    @property
    def end(self):
        return self.pairs[-1]


def find_augmenting_path(state, start):  # type: (Assignment, int) -> AugmentingPath
    """
    Breadth first search for a shortest augmenting path starting at the middlebox start. Pairs are explored in
    ascending index order which makes the result deterministic.

    :param Assignment state: current assignment
    :param int start: active middlebox with free capacity
    :return: AugmentingPath or None if there is none
    """
    assert state.is_active(start), "Middlebox {} is not active".format(start)
    if state.free_capacity(start) <= 0:
        return None
    owner = state.owner
    by_candidate = state.sets.by_candidate

    reached_from = {}
    entered_by = {}
    seen_boxes = {start}
    queue = collections.deque([start])
    while queue:
        box = queue.popleft()
        for p in by_candidate[box]:
            if p in reached_from or owner[p] == box:
                continue
            reached_from[p] = box
            holder = owner[p]
            if holder is None:
                return _trace_back(p, start, reached_from, entered_by)
            if holder not in seen_boxes:
                seen_boxes.add(holder)
                entered_by[holder] = p
                queue.append(holder)
    return None


def _trace_back(free_pair, start, reached_from, entered_by):
    pairs = [free_pair]
    boxes = [reached_from[free_pair]]
    while boxes[-1] != start:
        pair = entered_by[boxes[-1]]
        pairs.append(pair)
        boxes.append(reached_from[pair])
    return AugmentingPath(list(reversed(boxes)), list(reversed(pairs)))


def validate_path(state, path):  # type: (Assignment, AugmentingPath) -> None
    """
    :raises InvalidPath: when the path does not alternate properly relative to the assignment
    """
    def fail(reason):
        raise errors.InvalidPath("{} is not augmenting: {}".format(path, reason))

    if not state.is_active(path.start) or state.free_capacity(path.start) <= 0:
        fail("middlebox {} has no free capacity".format(path.start))
    if len(set(path.pairs)) != len(path.pairs):
        fail("a pair is visited twice")
    steps = list(path)
    for i, (m, p) in enumerate(steps):
        if not state.is_active(m):
            fail("middlebox {} is not active".format(m))
        if p not in state.sets.by_candidate[m]:
            fail("pair {} is not feasible at middlebox {}".format(p, m))
        if state.owner[p] == m:
            fail("edge ({}, {}) is already an assignment edge".format(m, p))
        if i + 1 < len(steps):
            if state.owner[p] != steps[i + 1][0]:
                fail("pair {} is not assigned to middlebox {}".format(p, steps[i + 1][0]))
        elif state.owner[p] is not None:
            fail("pair {} is not free".format(p))


def apply_augmenting_path(state, path):  # type: (Assignment, AugmentingPath) -> Assignment
    """
    Replaces the assignment by its symmetric difference with the path. The number of assigned pairs grows by one,
    the start middlebox gains one pair and the loads of the inner middleboxes stay the same.

    :return: the same, updated, Assignment instance
    """
    validate_path(state, path)
    for m, p in path:
        state.owner[p] = m
    state.load[path.start] += 1
    logger.debug("Applied %r", path)
    return state


def activate(state, m):  # type: (Assignment, int) -> None
    if state.is_active(m):
        raise errors.AlreadyActive("Middlebox {} is already deployed".format(m), middlebox=m)
    if m not in state.sets.by_candidate:
        raise errors.DomainError("Node {} is not a candidate location".format(m), middlebox=m)
    state.load[m] = 0
    state.active.append(m)


def add_middlebox(state, m, strategy=BFS):  # type: (Assignment, int, str) -> tuple
    """
    Deploys a middlebox at m and restores a maximum assignment by augmenting paths starting at m, at most
    min(capacity, free pairs) of them. Previously assigned pairs stay assigned.

    :param Assignment state: a maximum assignment for the active middleboxes, updated in place
    :param int m: inactive candidate location
    :param str strategy: "bfs" (one breadth first search per path) or "layered" (Hopcroft-Karp like phases)
    :return: tuple (state, gained) where gained is the number of newly assigned pairs
    """
    activate(state, m)
    if strategy == BFS:
        gained = 0
        while state.free_capacity(m) > 0:
            path = find_augmenting_path(state, m)
            if path is None:
                break
            apply_augmenting_path(state, path)
            gained += 1
    elif strategy == LAYERED:
        gained = _augment_in_phases(state, m)
    else:
        raise errors.DomainError("Unknown augmentation strategy {}".format(strategy))
    logger.debug("Middlebox %d deployed, %d pairs gained", m, gained)
    return state, gained


def _augment_in_phases(state, start):
    owner = state.owner
    by_candidate = state.sets.by_candidate
    gained = 0
    while state.free_capacity(start) > 0:
        box_level = {start: 0}
        pair_level = {}
        frontier = [start]
        level = 0
        found = False
        while frontier and not found:
            following = []
            for box in frontier:
                for p in by_candidate[box]:
                    if p in pair_level or owner[p] == box:
                        continue
                    pair_level[p] = level
                    holder = owner[p]
                    if holder is None:
                        found = True
                    elif holder not in box_level:
                        box_level[holder] = level + 1
                        following.append(holder)
            frontier = following
            level += 1
        if not found:
            break

        used = set()
        phase_gain = 0
        while state.free_capacity(start) > 0:
            steps = _layered_search(start, 0, owner, by_candidate, box_level, pair_level, used)
            if steps is None:
                break
            apply_augmenting_path(state, AugmentingPath([m for m, _ in steps], [p for _, p in steps]))
            phase_gain += 1
        if phase_gain == 0:
            break
        gained += phase_gain
    return gained


def _layered_search(box, level, owner, by_candidate, box_level, pair_level, used):
    for p in by_candidate[box]:
        if p in used or pair_level.get(p) != level or owner[p] == box:
            continue
        used.add(p)
        holder = owner[p]
        if holder is None:
            return [(box, p)]
        if box_level.get(holder) == level + 1:
            rest = _layered_search(holder, level + 1, owner, by_candidate, box_level, pair_level, used)
            if rest is not None:
                return [(box, p)] + rest
    return None


def new_assignment(sets, capacity, middleboxes=(), strategy=BFS):
    """
    Maximum assignment for the given middleboxes, deployed in ascending order.
    """
    state = Assignment(sets, capacity)
    for m in sorted(middleboxes):
        add_middlebox(state, m, strategy)
    return state


def phi(middleboxes, sets, capacity):  # type: (..., FeasibilitySets, int) -> int
    """
    Maximum number of pairs that can be assigned to the given middleboxes without exceeding capacities or route
    constraints. Stateless: nothing outside the call is modified.
    """
    return new_assignment(sets, capacity, middleboxes).assigned_count


def marginal_gain(state, m, strategy=BFS):  # type: (Assignment, int, str) -> int
    """
    phi(M + {m}) - phi(M) evaluated on a snapshot of the state, which stays untouched.
    """
    _, gained = add_middlebox(state.copy(), m, strategy)
    return gained
