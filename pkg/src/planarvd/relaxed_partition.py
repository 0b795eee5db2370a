"""Relaxed partitions of separator paths among additively weighted hole sites.

Given the enhanced multi-source structure over a decomposition, a separator
path P and a set H of weighted sites on the hole, this module computes for one
side of P an ordered list of intervals, one per site, with the guarantee that
whenever the true nearest site of a path vertex reaches it by a path entering
P from that side, the vertex lies inside that site's interval.  Every vertex
is covered by at most two intervals, so downstream consumers only ever compare
two candidate sites per vertex.

All distance comparisons use lifted values: weights[s] already carries the
site weight shifted left by SITE_SHIFT with a unique low tag, and path
distances are shifted the same way before adding, so ties never occur.
"""

import math

from .enhanced_mssp import (
    LEFT,
    RIGHT,
    SIDE_BELOW,
    SIDE_LEFT,
    SIDE_ON,
    SIDE_RIGHT,
)
from .planar_core import SITE_SHIFT

FLAG_PLAIN = "N"
FLAG_X_SWIRL = "X"
FLAG_Y_SWIRL = "Y"

# depth allowance for the two-site interval recursion: each step halves one
# of the two per-site counts, so 2*log2(L) plus slack for the constant tail
DEPTH_SLACK = 8


class PartitionError(Exception):
    pass


class NoWinner(PartitionError):
    """Raised when no winner check fires; indicates a broken precondition."""


class AllDominated:
    """Marker result: the site loses to an endpoint site at every vertex it
    reaches from the partition side, so it owes no interval."""

    def __repr__(self):
        return "AllDominated"


ALL_DOMINATED = AllDominated()


class PartitionInput:
    """Bundle of everything partition_H needs.

    msp is the enhanced multi-source structure, path one of its registered
    separator paths, sites a list of hole vertices and weights a dict mapping
    each site to its lifted additive weight.  trace, when a list, receives one
    JSON-friendly dict per algorithm step.  debug_winner, when set, is called
    with a dict after every winner resolution (used by tests to cross-check
    discarded halves against brute force).
    """

    def __init__(self, msp, path, sites, weights, side=LEFT, trace=None,
                 debug_winner=None):
        if side not in (LEFT, RIGHT):
            raise PartitionError("side must be %r or %r" % (LEFT, RIGHT))
        self.msp = msp
        self.path = path
        self.sites = list(sites)
        self.weights = weights
        self.side = side
        self.trace = trace
        self.debug_winner = debug_winner


class RelaxedPartition:
    """Ordered (site, lo, hi) interval entries over path positions.

    Intervals are inclusive; hi < lo marks a site kept in the ordering with an
    empty share.  A site may appear twice when a later insertion split its
    interval or when one site owns both path endpoints.
    """

    def __init__(self, side, length, s_x, s_y, entries, trimmed):
        self.side = side
        self.length = length
        self.s_x = s_x
        self.s_y = s_y
        self.entries = entries
        self.trimmed = trimmed

    def nonempty(self):
        return [(s, lo, hi) for (s, lo, hi) in self.entries if lo <= hi]

    def sites_at(self, t):
        """Sites whose interval covers position t (at most two)."""
        return [s for (s, lo, hi) in self.entries if lo <= t <= hi]

    def to_dict(self):
        return {
            "side": self.side,
            "length": self.length,
            "s_x": self.s_x,
            "s_y": self.s_y,
            "trimmed": list(self.trimmed),
            "entries": [[s, lo, hi] for (s, lo, hi) in self.entries],
        }


class IntervalClassification:
    """Up to two flagged parts [(lo, hi, flag)] for one site's left reach."""

    def __init__(self, parts):
        self.parts = list(parts)

    def flagged(self, flag):
        return [p for p in self.parts if p[2] == flag]

    def __repr__(self):
        return "IntervalClassification(%r)" % (self.parts,)


# ---------------------------------------------------------------------------
# context
# ---------------------------------------------------------------------------


class PartitionContext:
    """Derived state shared by the partition operations for one (path, H)."""

    def __init__(self, inp):
        self.msp = inp.msp
        self.path = inp.path
        self.side = inp.side
        self.weights = inp.weights
        self.trace = inp.trace
        self.debug_winner = inp.debug_winner
        self.verts = inp.path.vertices
        self.L = len(self.verts)
        # the swirl arguments orient the endpoint tree path tip-to-root (the
        # direction the enclosing cycle traverses it), while tree_side labels
        # are root-to-tip, so the labels cross over; the right partition runs
        # in the mirrored embedding, which swaps them back
        self.paper_right = SIDE_LEFT if inp.side == LEFT else SIDE_RIGHT
        self.paper_left = SIDE_RIGHT if inp.side == LEFT else SIDE_LEFT
        seen = set()
        uniq = []
        for s in inp.sites:
            if s not in seen:
                seen.add(s)
                uniq.append(s)
        self.onpath = sorted((s for s in uniq if s in inp.path.pos),
                             key=lambda s: inp.path.pos[s])
        self.offpath = [s for s in uniq if s not in inp.path.pos]
        self.s_x = None
        self.s_y = None
        self.degenerate = False
        self.lo = 0
        self.hi = self.L - 1
        self._xy_cut = None
        self._one_site = {}
        if self.offpath:
            self.s_x, self.s_y = endpoint_sites(
                self.msp, self.path, self.offpath, self.weights)
            self.degenerate = self.s_x == self.s_y
            self.lo, self.hi = self._trim_bounds()

    # -- basic queries ------------------------------------------------------

    def addw(self, s, v):
        return self.weights[s] + (self.msp.dist(s, v) << SITE_SHIFT)

    def addw_at(self, s, t):
        return self.addw(s, self.verts[t])

    def enters(self, s, t):
        return self.msp.direction(s, self.verts[t], self.path) == self.side

    def count(self, s, a, b):
        if a > b:
            return 0
        return self.msp.count(s, self.path, a, b, side=self.side)

    def sel(self, s, a, b, rank):
        v = self.msp.select(s, self.path, a, b, rank, side=self.side)
        return self.path.pos[v]

    def rel(self, s, v, r):
        return self.msp.tree_side(s, v, r)

    def emit(self, event, **fields):
        if self.trace is not None:
            rec = {"event": event}
            rec.update(fields)
            self.trace.append(rec)

    # -- trimming -----------------------------------------------------------

    def _trim_bounds(self):
        msp, verts = self.msp, self.verts
        x_v, y_v = verts[0], verts[-1]
        lo = _last_true(0, self.L - 1,
                        lambda t: msp.is_tree_ancestor(self.s_x, verts[t], x_v))
        hi = _first_true(0, self.L - 1,
                         lambda t: msp.is_tree_ancestor(self.s_y, verts[t], y_v))
        if not self.degenerate and lo >= hi:
            raise PartitionError(
                "endpoint shortest paths overlap on the separator path")
        return lo, hi

    @property
    def xy_cut(self):
        if self._xy_cut is None:
            self._xy_cut = _compute_xy_cut(self)
        return self._xy_cut


# ---------------------------------------------------------------------------
# binary search helpers
# ---------------------------------------------------------------------------


def _last_true(lo, hi, pred):
    """Largest t in [lo, hi] with pred(t), for pred true on a prefix.

    pred(lo) must hold."""
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid - 1
    return lo


def _first_true(lo, hi, pred):
    """Smallest t in [lo, hi] with pred(t), for pred true on a suffix.

    pred(hi) must hold."""
    while lo < hi:
        mid = (lo + hi) // 2
        if pred(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


# ---------------------------------------------------------------------------
# endpoint sites and trimming
# ---------------------------------------------------------------------------


def endpoint_sites(msp, path, sites, weights):
    """Sites owning the two path endpoints under lifted additive weights."""
    if not sites:
        raise PartitionError("no sites given")
    x_v, y_v = path.vertices[0], path.vertices[-1]

    def owner(v):
        return min(sites,
                   key=lambda s: weights[s] + (msp.dist(s, v) << SITE_SHIFT))

    return owner(x_v), owner(y_v)


def trim(ctx):
    """Middle bounds plus the endpoint-site prefix and suffix assignments.

    Every path vertex on the shortest path from an endpoint site to its
    endpoint belongs to that site outright, so the partition machinery only
    has to resolve the remaining middle stretch.
    """
    pre = (ctx.s_x, 0, ctx.lo - 1)
    suf = (ctx.s_y, ctx.hi + 1, ctx.L - 1)
    return (ctx.lo, ctx.hi), [pre, suf]


# ---------------------------------------------------------------------------
# two sites, no swirly paths
# ---------------------------------------------------------------------------


def _direct_checks(ctx, s1, s2, t1, t2):
    """First (w, t) whose entry-side and beat tests both pass, else None."""
    pair = (s1, s2)
    pos = (t1, t2)
    for w, t in ((1, 1), (2, 2), (2, 1), (1, 2)):
        sw, other = pair[w - 1], pair[2 - w]
        tv = pos[t - 1]
        if not ctx.enters(sw, tv):
            continue
        if ctx.addw_at(sw, tv) >= ctx.addw_at(other, tv):
            continue
        return w, t
    return None


def winner_ordered(ctx, s1, s2, t1, t2):
    """Winner pair for medians with t1 <= t2; one direct check always fires."""
    assert t1 <= t2
    hit = _direct_checks(ctx, s1, s2, t1, t2)
    if hit is None:
        raise NoWinner("no direct check fired for ordered medians "
                       "%d, %d" % (t1, t2))
    return hit


def winner_crossed(ctx, s1, s2, t1, t2):
    """Winner pair for medians with t2 < t1.

    When no direct check fires, the first vertex w along the shortest path
    from s1 to the t1 vertex where s2 takes over is located by binary search
    on depth, and its position relative to s2's path to the t2 vertex decides
    the winner.
    """
    assert t2 < t1
    hit = _direct_checks(ctx, s1, s2, t1, t2)
    if hit is not None:
        return hit
    v1 = ctx.verts[t1]
    v2 = ctx.verts[t2]
    if ctx.addw(s2, v1) >= ctx.addw(s1, v1):
        raise NoWinner("crossed medians without takeover at %d" % t1)
    msp = ctx.msp
    depth = msp.depth(s1, v1)

    def taken(d):
        u = msp.ancestor(s1, v1, d)
        return ctx.addw(s2, u) < ctx.addw(s1, u)

    if taken(0):
        raise NoWinner("site %d does not own itself" % s1)
    d_star = _first_true(1, depth, taken)
    w_vertex = msp.ancestor(s1, v1, d_star)
    rel = ctx.rel(s2, w_vertex, v2)
    if rel == SIDE_ON:
        verdict = (2, 1)
    elif rel == ctx.paper_right:
        verdict = (1, 2)
    elif rel == ctx.paper_left:
        verdict = (2, 1)
    else:
        raise NoWinner("takeover vertex below the crossed median")
    ctx.emit("takeover", s1=s1, s2=s2, w_vertex=int(w_vertex), rel=rel,
             verdict=list(verdict))
    return verdict


def _cut_nonswirly(ctx, s1, s2, a, b):
    """First position of s2's interval for two sites with no swirly paths.

    Returns c in [a, b+1]; s1 keeps [a, c-1] and s2 keeps [c, b].
    """
    if s1 == s2:
        return ctx.hi + 1
    lo0, hi0 = a, b
    c1_all = ctx.count(s1, a, b)
    c2_all = ctx.count(s2, a, b)
    budget = (math.ceil(math.log2(max(2, c1_all + 1)))
              + math.ceil(math.log2(max(2, c2_all + 1))) + DEPTH_SLACK)
    steps = 0
    while True:
        if a > b:
            return a
        c1 = ctx.count(s1, a, b)
        if c1 == 0:
            return a
        c2 = ctx.count(s2, a, b)
        if c2 == 0:
            return b + 1
        steps += 1
        assert steps <= budget, (
            "two-site recursion exceeded its depth budget on [%d, %d]"
            % (lo0, hi0))
        t1 = ctx.sel(s1, a, b, (c1 + 1) // 2)
        t2 = ctx.sel(s2, a, b, (c2 + 1) // 2)
        if t1 <= t2:
            w, t = winner_ordered(ctx, s1, s2, t1, t2)
        else:
            w, t = winner_crossed(ctx, s1, s2, t1, t2)
        tv = (t1, t2)[t - 1]
        ctx.emit("winner", s1=s1, s2=s2, a=a, b=b, t1=t1, t2=t2,
                 w=w, t=t, tv=tv)
        if ctx.debug_winner is not None:
            ctx.debug_winner({"s1": s1, "s2": s2, "a": a, "b": b,
                              "t1": t1, "t2": t2, "w": w, "tv": tv})
        if w == 1:
            a = tv + 1
        else:
            b = tv - 1


def partition_two_nonswirly(ctx, s1, s2, a, b):
    """Interval pair for two sites whose left reach on [a, b] is swirl-free."""
    cut = _cut_nonswirly(ctx, s1, s2, a, b)
    return (a, cut - 1), (cut, b)


# ---------------------------------------------------------------------------
# the two endpoint sites
# ---------------------------------------------------------------------------


def swirl_split_xy(ctx, which):
    """Breakpoint position where an endpoint site's tree sweeps past its tip.

    For which == "y": the first position reached from the partition side by
    s_y whose tree relation to the path tip y stops being "right of the
    root-to-y path"; defaults to the trimmed end when there is none.  For
    which == "x" the mirror statement holds with last/left/x.
    """
    a, b = ctx.lo, ctx.hi
    if which == "y":
        s = ctx.s_y
        tip = ctx.verts[ctx.hi]
        c = ctx.count(s, a, b)
        if c == 0:
            return ctx.hi

        def past(rank):
            v = ctx.msp.select(s, ctx.path, a, b, rank, side=ctx.side)
            return ctx.rel(s, v, tip) != ctx.paper_right

        if not past(c):
            return ctx.hi
        first = _first_true(1, c, past)
        return ctx.sel(s, a, b, first)
    if which == "x":
        s = ctx.s_x
        tip = ctx.verts[ctx.lo]
        c = ctx.count(s, a, b)
        if c == 0:
            return ctx.lo

        def past(rank):
            v = ctx.msp.select(s, ctx.path, a, b, rank, side=ctx.side)
            return ctx.rel(s, v, tip) != ctx.paper_left

        if not past(1):
            return ctx.lo
        last = _last_true(1, c, past)
        return ctx.sel(s, a, b, last)
    raise PartitionError("which must be 'x' or 'y'")


def _compute_xy_cut(ctx):
    a = swirl_split_xy(ctx, "y")
    b = swirl_split_xy(ctx, "x")
    if a > b:
        cut = a
    else:
        cut = _cut_nonswirly(ctx, ctx.s_x, ctx.s_y, a, b)
    ctx.emit("xy_cut", v_y=a, v_x=b, cut=cut)
    return cut


def partition_xy(ctx):
    """Interval pair assigning the trimmed path to the two endpoint sites."""
    cut = ctx.xy_cut
    return (ctx.lo, cut - 1), (cut, ctx.hi)


# ---------------------------------------------------------------------------
# one site against the endpoint sites
# ---------------------------------------------------------------------------


def split_by_tree_side(ctx, s):
    """At most two position intervals covering s's reach from the side.

    The split point is where later reached vertices start passing the first
    one on its far side in s's shortest path tree; each returned interval is
    then side-homogeneous enough to classify with one probe.
    """
    a, b = ctx.lo, ctx.hi
    c = ctx.count(s, a, b)
    if c == 0:
        return []
    v_top = ctx.msp.select(s, ctx.path, a, b, 1, side=ctx.side)
    t_top = ctx.path.pos[v_top]
    t_bot = ctx.sel(s, a, b, c)
    if c == 1 or ctx.rel(s, ctx.verts[t_bot], v_top) != ctx.paper_left:
        return [(t_top, t_bot)]

    def not_past(rank):
        v = ctx.msp.select(s, ctx.path, a, b, rank, side=ctx.side)
        return ctx.rel(s, v, v_top) != ctx.paper_left

    last = _last_true(1, c - 1, not_past)
    return [(t_top, ctx.sel(s, a, b, last)),
            (ctx.sel(s, a, b, last + 1), t_bot)]


def classify_interval(ctx, s, a, b):
    """FLAG_PLAIN when [a, b] is provably swirl-free for s, else "DOM".

    "DOM" means every vertex s reaches from the side on [a, b] is closer to
    an endpoint site, so s owes nothing there.
    """
    cut = ctx.xy_cut
    in_x = b < cut
    in_y = a >= cut
    if not in_x and not in_y:
        return FLAG_PLAIN
    if in_x:
        anchor, probe = ctx.s_x, b
    else:
        anchor, probe = ctx.s_y, a
    if not ctx.enters(anchor, probe):
        return FLAG_PLAIN
    if ctx.addw_at(s, probe) < ctx.addw_at(anchor, probe):
        return FLAG_PLAIN
    return "DOM"


def partition_one_site(ctx, s):
    """Classify s's reach from the side into flagged parts, with caching.

    Returns ALL_DOMINATED when s owes no interval, otherwise an
    IntervalClassification whose parts carry FLAG_PLAIN for swirl-free
    stretches and FLAG_X_SWIRL / FLAG_Y_SWIRL for stretches whose paths cross
    an endpoint site's shortest path.
    """
    if s in ctx._one_site:
        return ctx._one_site[s]
    res = _one_site_uncached(ctx, s)
    ctx._one_site[s] = res
    ctx.emit("one_site", site=s,
             result=("dominated" if res is ALL_DOMINATED else res.parts))
    return res


def _one_site_uncached(ctx, s):
    parts = split_by_tree_side(ctx, s)
    if not parts:
        return IntervalClassification([])
    labels = [classify_interval(ctx, s, a, b) for (a, b) in parts]
    if all(lab == "DOM" for lab in labels):
        return ALL_DOMINATED
    if len(parts) == 1:
        (a, b), = parts
        return IntervalClassification([(a, b, FLAG_PLAIN)])
    if labels[0] == FLAG_PLAIN and labels[1] == FLAG_PLAIN:
        raise PartitionError(
            "both split parts probe as swirl-free; tree-side split and "
            "probe classification disagree for site %d" % s)
    plain = 0 if labels[0] == FLAG_PLAIN else 1
    swirl = 1 - plain
    a_s, b_s = parts[swirl]
    flag = FLAG_Y_SWIRL if b_s < ctx.xy_cut else FLAG_X_SWIRL
    out = [None, None]
    out[plain] = (parts[plain][0], parts[plain][1], FLAG_PLAIN)
    out[swirl] = (a_s, b_s, flag)
    return IntervalClassification(out)


# ---------------------------------------------------------------------------
# two arbitrary sites
# ---------------------------------------------------------------------------


def _unflagged_part(cls):
    plain = cls.flagged(FLAG_PLAIN)
    if len(plain) != 1:
        raise PartitionError("expected exactly one swirl-free part")
    return plain[0]


def _pair_cut(ctx, s1, s2, role_x, role_y, win_lo=None):
    """First position of s2's interval for the ordered pair (s1, s2).

    role_x / role_y say whether s1 / s2 occupy the arc's endpoint-site
    positions; identity comparison is not enough because one site may fill
    both roles.  win_lo floors the search when s1's interval is already
    known to start there.
    """
    if s1 == s2:
        return ctx.hi + 1
    if ctx.degenerate:
        return _degenerate_pair_cut(
            ctx, s1, s2, ctx.lo if win_lo is None else win_lo)
    if role_x and role_y:
        return ctx.xy_cut
    if role_x:
        cls = partition_one_site(ctx, s2)
        if cls is ALL_DOMINATED or not cls.parts:
            return ctx.hi + 1
        a_i = _unflagged_part(cls)[0]
        cut = ctx.xy_cut
        if a_i >= cut:
            return cut
        return _cut_nonswirly(ctx, s1, s2, a_i, cut - 1)
    if role_y:
        cls = partition_one_site(ctx, s1)
        if cls is ALL_DOMINATED or not cls.parts:
            return ctx.lo
        b_i = _unflagged_part(cls)[1]
        cut = ctx.xy_cut
        if b_i < cut:
            return cut
        return _cut_nonswirly(ctx, s1, s2, cut, b_i)
    cls1 = partition_one_site(ctx, s1)
    if cls1 is ALL_DOMINATED or not cls1.parts:
        return ctx.lo
    cls2 = partition_one_site(ctx, s2)
    if cls2 is ALL_DOMINATED or not cls2.parts:
        return ctx.hi + 1
    y_ends = [p[1] for p in cls1.flagged(FLAG_Y_SWIRL)]
    y_ends += [p[1] for p in cls2.flagged(FLAG_Y_SWIRL)]
    x_starts = [p[0] for p in cls1.flagged(FLAG_X_SWIRL)]
    x_starts += [p[0] for p in cls2.flagged(FLAG_X_SWIRL)]
    a = max(y_ends) + 1 if y_ends else ctx.lo
    b = min(x_starts) - 1 if x_starts else ctx.hi
    if a > b:
        return a
    return _cut_nonswirly(ctx, s1, s2, a, b)


def partition_two_sites(ctx, s1, s2):
    """Interval pair for two sites in arc order, swirly paths included."""
    role_x = not ctx.degenerate and s1 == ctx.s_x
    role_y = not ctx.degenerate and s2 == ctx.s_y
    cut = _pair_cut(ctx, s1, s2, role_x, role_y)
    return (ctx.lo, cut - 1), (cut, ctx.hi)


# ---------------------------------------------------------------------------
# degenerate mode: one site owns both path endpoints
# ---------------------------------------------------------------------------


def _degenerate_pair_cut(ctx, s1, s2, win_lo):
    """Pair cut when one site owns both endpoints of the path.

    The swirl machinery assumes distinct endpoint sites, and the endpoint
    owner wins on both a prefix and a suffix of the path, so binary searches
    against it are not single-crossing.  A direct scan keeps the cut tight on
    both sides instead: above the last position s1 truly claims and at or
    below the first position s2 does.  Tight cuts are what lets the caller
    floor later searches at an earlier survivor's cut.  The scan stays sound
    because obligations of arc-ordered sites never interleave; the endpoint
    owner is exempt from the claim tests since its own copies close both ends.
    """
    star = ctx.s_x
    ctx.emit("degenerate_scan", s1=s1, s2=s2)
    last1 = None
    first2 = None
    for t in range(win_lo, ctx.hi + 1):
        for idx, s in ((1, s1), (2, s2)):
            if s == star:
                continue
            other = s2 if idx == 1 else s1
            if not ctx.enters(s, t):
                continue
            val = ctx.addw_at(s, t)
            if val >= ctx.addw_at(star, t) or val >= ctx.addw_at(other, t):
                continue
            if idx == 1:
                last1 = t
            elif first2 is None:
                first2 = t
    if last1 is not None and first2 is not None and first2 <= last1:
        raise PartitionError(
            "interleaved obligations for arc-ordered sites %d, %d"
            % (s1, s2))
    if last1 is not None:
        return last1 + 1
    if first2 is not None:
        return first2
    return ctx.hi + 1


# ---------------------------------------------------------------------------
# the full partition
# ---------------------------------------------------------------------------


def _arc_order(ctx):
    """Hole sites restricted to the arc between the endpoint sites, ordered
    from the x owner to the y owner, plus the leftover sites in walk order."""
    msp = ctx.msp
    cycle = msp.sources
    n_cyc = len(cycle)
    members = set(ctx.offpath)
    step = -1 if ctx.side == LEFT else 1
    i_x = msp.src_index[ctx.s_x]
    if ctx.degenerate:
        order = [ctx.s_x]
        rest = []
        j = (i_x + step) % n_cyc
        while j != i_x:
            v = cycle[j]
            if v in members:
                order.append(v)
            j = (j + step) % n_cyc
        order.append(ctx.s_y)
        return order, rest
    i_y = msp.src_index[ctx.s_y]
    order = [ctx.s_x]
    j = (i_x + step) % n_cyc
    while j != i_y:
        v = cycle[j]
        if v in members:
            order.append(v)
        j = (j + step) % n_cyc
    order.append(ctx.s_y)
    rest = []
    j = (i_y + step) % n_cyc
    while j != i_x:
        v = cycle[j]
        if v in members:
            rest.append(v)
        j = (j + step) % n_cyc
    return order, rest


def _stack_entries(ctx, order):
    """Run the monotone cut stack over the arc sites and assemble entries."""
    k = len(order)
    last = k - 1
    cuts = {0: ctx.lo}
    stack = [0]
    for i in range(1, k):
        c = None
        while True:
            top = stack[-1]
            c = _pair_cut(ctx, order[top], order[i],
                          role_x=(top == 0), role_y=(i == last),
                          win_lo=cuts[top])
            ctx.emit("pair_cut", s1=order[top], s2=order[i], cut=c)
            if c > cuts[top]:
                break
            stack.pop()
            ctx.emit("drop", site=order[top])
            if not stack:
                c = ctx.lo
                break
        stack.append(i)
        cuts[i] = c
    surviving = set(stack)
    # each dropped site sits, empty, at the start of the next survivor
    next_start = [0] * k
    upcoming = ctx.hi + 1
    for i in range(k - 1, -1, -1):
        next_start[i] = upcoming
        if i in surviving:
            upcoming = cuts[i]
    entries = []
    for i in range(k):
        start = cuts[i] if i in surviving else next_start[i]
        end = next_start[i] - 1
        if i == 0:
            start = 0
        if i == last:
            end = ctx.L - 1
        entries.append((order[i], start, end))
    return entries


def _insert_on_path_site(ctx, entries, s):
    """Claim for a site lying on the path itself the stretch it truly owns.

    The true cell of an on-path site restricted to the path is contiguous
    around the site: path distance is additive along a shortest path, so once
    any other site gets closer it stays closer further out.  Two binary
    searches against the full comparator set bound the claim exactly; the
    claim then splits or shrinks the overlapped entries.  Claiming only truly
    owned vertices can never hide another site's entry obligations.
    """
    t_s = ctx.path.pos[s]
    prefix = ctx.path.prefix
    rivals_off = [c for c in ctx.offpath]
    rivals_on = [(c, ctx.path.pos[c]) for c in ctx.onpath if c != s]

    def pathw(t):
        return ctx.weights[s] + (abs(prefix[t] - prefix[t_s]) << SITE_SHIFT)

    def beats(t):
        mine = pathw(t)
        for c, t_c in rivals_on:
            if ctx.weights[c] + (abs(prefix[t] - prefix[t_c]) << SITE_SHIFT) < mine:
                return False
        for c in rivals_off:
            if ctx.addw_at(c, t) < mine:
                return False
        return True

    if not beats(t_s):
        _place_entry(entries, (s, t_s, t_s - 1))
        ctx.emit("onpath", site=s, claim=None)
        return
    c_lo = _first_true(0, t_s, lambda t: beats(t))
    c_hi = _last_true(t_s, ctx.L - 1, lambda t: beats(t))
    out = []
    for site, lo, hi in entries:
        if hi < lo or hi < c_lo or lo > c_hi:
            out.append((site, lo, hi))
            continue
        kept = False
        if lo < c_lo:
            out.append((site, lo, c_lo - 1))
            kept = True
        if hi > c_hi:
            out.append((site, c_hi + 1, hi))
            kept = True
        if not kept:
            out.append((site, c_lo, c_lo - 1))
    entries[:] = out
    _place_entry(entries, (s, c_lo, c_hi))
    ctx.emit("onpath", site=s, claim=[c_lo, c_hi])


def _place_entry(entries, entry):
    """Insert an entry keeping nonempty intervals in position order."""
    _, lo, _ = entry
    at = len(entries)
    for i, (_, elo, ehi) in enumerate(entries):
        if ehi >= elo and elo > lo:
            at = i
            break
    entries.insert(at, entry)


def partition_H(inp):
    """Relaxed partition of a separator path among weighted hole sites."""
    ctx = PartitionContext(inp)
    L = ctx.L
    if not ctx.offpath and not ctx.onpath:
        raise PartitionError("no sites given")
    if not ctx.offpath:
        base = ctx.onpath[0]
        entries = [(base, 0, L - 1)]
        for s in ctx.onpath[1:]:
            _insert_on_path_site(ctx, entries, s)
        return RelaxedPartition(inp.side, L, None, None, entries, (0, L - 1))
    ctx.emit("endpoints", s_x=ctx.s_x, s_y=ctx.s_y,
             degenerate=ctx.degenerate, lo=ctx.lo, hi=ctx.hi)
    if len(ctx.offpath) == 1:
        entries = [(ctx.s_x, 0, L - 1)]
    else:
        order, rest = _arc_order(ctx)
        entries = _stack_entries(ctx, order)
        anchor = L
        for s in rest:
            entries.append((s, anchor, anchor - 1))
    for s in ctx.onpath:
        _insert_on_path_site(ctx, entries, s)
    ctx.emit("assembled", entries=[[s, lo, hi] for (s, lo, hi) in entries])
    return RelaxedPartition(inp.side, L, ctx.s_x, ctx.s_y, entries,
                            (ctx.lo, ctx.hi))
