"""Deterministic user equilibrium for the two-link, two-class network.

The solver exploits the structure of the game: OTHER-Vs care only about
time, so in equilibrium they either split across both links (equal times)
or pile onto the faster one.  DWPT-EVs sort by state of charge around a
threshold: below it the charging gain outweighs the toll plus any time
penalty of the ERS link.

Three regimes cover every equilibrium:

* Interior: OTHER-Vs on both links, t1 = t2, total flow split at the
  balanced point x_eq.
* CornerOtherOn2: the ERS link is so attractive to DWPT-EVs that t1 > t2
  and every OTHER-V avoids it; the DWPT flow on link 1 is a fixed point
  of a monotone threshold map, found by bisection.
* CornerOtherOn1: mirror image (heavy tolls push DWPT-EVs off the ERS
  link and OTHER-Vs fill it).

A brute-force better-response oracle over discrete agents provides an
independent check of the same equilibrium definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    INDIFFERENCE_EPS,
    DiscreteAgents,
    LinkParams,
    Preferences,
    Scenario,
    bpr_time,
    charging_utility,
)

# Bisection controls (see LinkParams smoothness: BPR is monotone, so the
# brackets below always contain exactly one sign change).
MAX_BISECT_ITER = 200
FLOW_TOL_FACTOR = 1e-9  # corner fixed point, fraction of N
BALANCE_TOL_FACTOR = 1e-12  # balanced-flow root, fraction of N


class ConvergenceError(RuntimeError):
    """A numerical routine failed to meet its tolerance."""


class RegimeTag(Enum):
    INTERIOR = "interior"
    CORNER_OTHER_ON_2 = "corner_other_on_2"
    CORNER_OTHER_ON_1 = "corner_other_on_1"


@dataclass(frozen=True)
class EquilibriumResult:
    """Class-level link flows and times at a user equilibrium.

    s_thres is the threshold SoC at the equilibrium travel times; the
    value 1.0 is a sentinel meaning "every DWPT-EV prefers the ERS link".
    """

    x1_d: float
    x2_d: float
    x1_o: float
    x2_o: float
    t1: float
    t2: float
    s_thres: float

    @property
    def x1(self) -> float:
        return self.x1_d + self.x1_o

    @property
    def x2(self) -> float:
        return self.x2_d + self.x2_o

    @property
    def n_thres(self) -> float:
        """Mass of DWPT-EVs charging on the ERS link."""
        return self.x1_d


def threshold_soc(
    prefs: Preferences, toll_price: float, t1: float, t2: float
) -> float:
    """SoC below which a DWPT-EV prefers the ERS link at the given times.

    Solves voe*(1/s - 1) = toll_price + vot*(t1 - t2).  When the right
    side is <= 0 the ERS link dominates for every SoC in (0,1); the
    sentinel 1.0 is returned.
    """
    gap = toll_price + prefs.vot * (t1 - t2)
    if gap <= 0.0:
        return 1.0
    return prefs.voe / (prefs.voe + gap)


def _bisect_root(f, lo: float, hi: float, xtol: float, what: str) -> float:
    """Root of a non-decreasing f with f(lo) <= 0 <= f(hi).

    Also spot-checks monotonicity on the initial bracket, which guards
    against a mis-specified fixed-point map.
    """
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0 or f_hi < 0:
        raise ConvergenceError(
            f"{what}: bracket [{lo}, {hi}] does not sign-change "
            f"(f(lo)={f_lo}, f(hi)={f_hi})"
        )
    f_mid0 = f(0.5 * (lo + hi))
    slack = 1e-9 * (1.0 + abs(f_lo) + abs(f_hi))
    if not (f_lo <= f_mid0 + slack and f_mid0 <= f_hi + slack):
        raise ConvergenceError(f"{what}: map is not monotone on the bracket")
    for _ in range(MAX_BISECT_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol:
            return mid
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(
        f"{what}: no convergence to xtol={xtol} after {MAX_BISECT_ITER} "
        f"iterations (bracket [{lo}, {hi}])"
    )


def _balanced_flow(link1: LinkParams, link2: LinkParams, total: float) -> float:
    """Link-1 flow equalizing travel times, clamped to [0, total]."""
    if link1.same_bpr(link2):
        return 0.5 * total

    def gap(x: float) -> float:
        return bpr_time(link1, x) - bpr_time(link2, total - x)

    if gap(0.0) >= 0.0:
        return 0.0
    if gap(total) <= 0.0:
        return total
    return _bisect_root(
        gap, 0.0, total, BALANCE_TOL_FACTOR * total, "balanced flow"
    )


def solve(scenario: Scenario) -> tuple[EquilibriumResult, RegimeTag]:
    """User equilibrium of the scenario: class flows, times, regime.

    Dispatch: compute the balanced split x_eq; if the DWPT demand for the
    ERS link at equal times fits beside enough OTHER flow to reach x_eq,
    the equilibrium is interior.  Too much DWPT demand pushes every
    OTHER-V to link 2; too little (with a hefty toll) leaves the ERS link
    to OTHER-Vs alone.  The corner fixed points are roots of
    n - count_below(threshold(n)), which is non-decreasing in n.
    """
    net = scenario.network
    prefs = scenario.prefs
    soc = scenario.soc
    price = scenario.toll.dwpt_link1_charge
    n_total = scenario.total_vehicles
    n_dwpt = scenario.n_dwpt
    n_other = scenario.n_other

    x_eq = _balanced_flow(net.link1, net.link2, n_total)
    t1_eq = bpr_time(net.link1, x_eq)
    t2_eq = bpr_time(net.link2, n_total - x_eq)
    s_eq = threshold_soc(prefs, price, t1_eq, t2_eq)
    n_star = soc.count_below(s_eq)

    if n_star <= x_eq and x_eq - n_star <= n_other:
        x1_d = n_star
        x1_o = x_eq - n_star
        result = EquilibriumResult(
            x1_d=x1_d,
            x2_d=n_dwpt - x1_d,
            x1_o=x1_o,
            x2_o=n_other - x1_o,
            t1=t1_eq,
            t2=t2_eq,
            s_thres=s_eq,
        )
        return result, RegimeTag.INTERIOR

    if n_star > x_eq:
        # All OTHER-Vs on link 2; link-1 flow is DWPT only.
        def excess(n: float) -> float:
            t1 = bpr_time(net.link1, n)
            t2 = bpr_time(net.link2, n_total - n)
            return n - soc.count_below(threshold_soc(prefs, price, t1, t2))

        if excess(n_dwpt) <= 0.0:
            x1_d = n_dwpt  # every DWPT-EV charges
        else:
            x1_d = _bisect_root(
                excess,
                x_eq,
                n_dwpt,
                FLOW_TOL_FACTOR * n_total,
                "corner fixed point (OTHER on link 2)",
            )
        t1 = bpr_time(net.link1, x1_d)
        t2 = bpr_time(net.link2, n_total - x1_d)
        result = EquilibriumResult(
            x1_d=x1_d,
            x2_d=n_dwpt - x1_d,
            x1_o=0.0,
            x2_o=n_other,
            t1=t1,
            t2=t2,
            s_thres=threshold_soc(prefs, price, t1, t2),
        )
        return result, RegimeTag.CORNER_OTHER_ON_2

    # x_eq - n_star > n_other: all OTHER-Vs on link 1, which still runs
    # faster than link 2; only the lowest-SoC DWPT-EVs join them.
    def excess(n: float) -> float:
        t1 = bpr_time(net.link1, n_other + n)
        t2 = bpr_time(net.link2, n_dwpt - n)
        return n - soc.count_below(threshold_soc(prefs, price, t1, t2))

    if excess(0.0) >= 0.0:
        x1_d = 0.0  # no DWPT-EV charges
    else:
        x1_d = _bisect_root(
            excess,
            0.0,
            x_eq - n_other,
            FLOW_TOL_FACTOR * n_total,
            "corner fixed point (OTHER on link 1)",
        )
    t1 = bpr_time(net.link1, n_other + x1_d)
    t2 = bpr_time(net.link2, n_dwpt - x1_d)
    result = EquilibriumResult(
        x1_d=x1_d,
        x2_d=n_dwpt - x1_d,
        x1_o=n_other,
        x2_o=0.0,
        t1=t1,
        t2=t2,
        s_thres=threshold_soc(prefs, price, t1, t2),
    )
    return result, RegimeTag.CORNER_OTHER_ON_1


def verify_equilibrium(
    scenario: Scenario,
    result: EquilibriumResult,
    mass_tol: float | None = None,
    time_tol: float = 1e-6,
) -> list[str]:
    """Check the no-improving-switch conditions; return violations.

    mass_tol defaults to 1e-5 * N, comfortably above the bisection
    residual but far below one vehicle at the scales of interest.
    """
    n_total = scenario.total_vehicles
    if mass_tol is None:
        mass_tol = 1e-5 * n_total
    problems: list[str] = []

    for name, value in (
        ("x1_d", result.x1_d),
        ("x2_d", result.x2_d),
        ("x1_o", result.x1_o),
        ("x2_o", result.x2_o),
    ):
        if value < -mass_tol:
            problems.append(f"negative flow {name} = {value}")
    if abs(result.x1_d + result.x2_d - scenario.n_dwpt) > mass_tol:
        problems.append("DWPT flows do not sum to the class total")
    if abs(result.x1_o + result.x2_o - scenario.n_other) > mass_tol:
        problems.append("OTHER flows do not sum to the class total")

    t1 = bpr_time(scenario.network.link1, result.x1)
    t2 = bpr_time(scenario.network.link2, result.x2)
    if abs(t1 - result.t1) > time_tol or abs(t2 - result.t2) > time_tol:
        problems.append("stored travel times do not match BPR at stored flows")

    # OTHER-Vs: Wardrop conditions.
    if result.x1_o > mass_tol and result.x2_o > mass_tol:
        if abs(t1 - t2) * scenario.prefs.vot > 1e-3:
            problems.append(f"OTHER on both links but t1 - t2 = {t1 - t2}")
    elif result.x1_o <= mass_tol:
        if t1 < t2 - time_tol:
            problems.append("no OTHER on link 1 although it is faster")
    elif t2 < t1 - time_tol:
        problems.append("no OTHER on link 2 although it is faster")

    # DWPT-EVs: threshold consistency.
    price = scenario.toll.dwpt_link1_charge
    s_star = threshold_soc(scenario.prefs, price, t1, t2)
    below = scenario.soc.count_below(s_star - 1e-9)
    at_or_above = scenario.soc.total_mass - scenario.soc.count_below(
        s_star + 1e-9
    )
    if result.x1_d < below - mass_tol:
        problems.append(
            f"only {result.x1_d} DWPT on link 1 but {below} are below threshold"
        )
    if result.x2_d < at_or_above - mass_tol:
        problems.append(
            f"only {result.x2_d} DWPT on link 2 but {at_or_above} are above threshold"
        )
    return problems


# ---------------------------------------------------------------------------
# Brute-force oracle over discrete agents


def rosenthal_potential(
    link1: LinkParams,
    link2: LinkParams,
    prefs: Preferences,
    toll_price: float,
    x1: int,
    x2: int,
    link1_dwpt_soc: np.ndarray,
) -> float:
    """Exact potential of the atomic game in money units.

    Unilateral deviations change this by exactly the deviator's utility
    loss, so better-response paths strictly decrease it.
    """
    ks1 = np.arange(1, x1 + 1, dtype=float)
    ks2 = np.arange(1, x2 + 1, dtype=float)
    time_part = prefs.vot * (
        float(np.sum(_bpr_vec(link1, ks1))) + float(np.sum(_bpr_vec(link2, ks2)))
    )
    offset_part = sum(
        toll_price - prefs.voe * charging_utility(float(s))
        for s in link1_dwpt_soc
    )
    return time_part + offset_part


def _bpr_vec(link: LinkParams, flows: np.ndarray) -> np.ndarray:
    return link.free_flow_time * (
        1.0 + link.bpr_alpha * (flows / link.capacity) ** link.bpr_beta
    )


def _oracle_result(
    scenario: Scenario, on_link1: np.ndarray, n_dwpt: int
) -> EquilibriumResult:
    x1_d = int(np.count_nonzero(on_link1[:n_dwpt]))
    x1_o = int(np.count_nonzero(on_link1[n_dwpt:]))
    x2_d = n_dwpt - x1_d
    x2_o = (len(on_link1) - n_dwpt) - x1_o
    t1 = bpr_time(scenario.network.link1, x1_d + x1_o)
    t2 = bpr_time(scenario.network.link2, x2_d + x2_o)
    return EquilibriumResult(
        x1_d=float(x1_d),
        x2_d=float(x2_d),
        x1_o=float(x1_o),
        x2_o=float(x2_o),
        t1=t1,
        t2=t2,
        s_thres=threshold_soc(
            scenario.prefs, scenario.toll.dwpt_link1_charge, t1, t2
        ),
    )


def brute_force_equilibrium(
    scenario: Scenario,
    exhaustive: bool = False,
    max_switches: int = 10_000_000,
    seed: int | None = None,
) -> EquilibriumResult:
    """Atomic better-response oracle; requires a DiscreteAgents SoC pool.

    Agents start on link 2 and are scanned round-robin; any agent whose
    switch strictly improves its utility (by more than INDIFFERENCE_EPS)
    moves at once.  Termination is guaranteed by the exact potential.
    With exhaustive=True (at most 20 agents) every profile is enumerated
    to confirm the endpoint is a true equilibrium and that the potential
    minimum is one as well.
    """
    if not isinstance(scenario.soc, DiscreteAgents):
        raise ValueError("brute_force_equilibrium needs DiscreteAgents SoC")
    n_dwpt = len(scenario.soc.soc_values)
    n_other_f = scenario.n_other
    n_other = round(n_other_f)
    if abs(n_other_f - n_other) > 1e-9:
        raise ValueError(
            f"OTHER count {n_other_f} is not integral; the oracle is atomic"
        )
    n_agents = n_dwpt + n_other
    if n_agents > 10_000:
        raise ValueError(f"{n_agents} agents exceed the oracle limit of 10000")
    if exhaustive and n_agents > 20:
        raise ValueError("exhaustive mode supports at most 20 agents")

    link1 = scenario.network.link1
    link2 = scenario.network.link2
    prefs = scenario.prefs
    price = scenario.toll.dwpt_link1_charge
    socs = np.asarray(scenario.soc.soc_values, dtype=float)
    gains = prefs.voe * (1.0 / socs - 1.0) - price  # DWPT link-1 bonus

    order = np.arange(n_agents)
    if seed is not None:
        order = np.random.default_rng(seed).permutation(n_agents)

    on_link1 = np.zeros(n_agents, dtype=bool)
    x1, x2 = 0, n_agents
    switches = 0
    while True:
        moved = False
        for idx in order:
            if on_link1[idx]:
                # own contribution moved: t2 at x2 + 1 vs t1 at x1
                gain = prefs.vot * (
                    bpr_time(link1, x1) - bpr_time(link2, x2 + 1)
                )
                if idx < n_dwpt:
                    gain -= gains[idx]
            else:
                gain = prefs.vot * (
                    bpr_time(link2, x2) - bpr_time(link1, x1 + 1)
                )
                if idx < n_dwpt:
                    gain += gains[idx]
            if gain > INDIFFERENCE_EPS:
                if on_link1[idx]:
                    on_link1[idx] = False
                    x1 -= 1
                    x2 += 1
                else:
                    on_link1[idx] = True
                    x1 += 1
                    x2 -= 1
                moved = True
                switches += 1
                if switches > max_switches:
                    raise ConvergenceError(
                        f"oracle exceeded {max_switches} switches; "
                        "the finite-improvement property is violated"
                    )
        if not moved:
            break

    if exhaustive:
        _exhaustive_check(scenario, on_link1, socs, gains, n_dwpt, n_agents)
    return _oracle_result(scenario, on_link1, n_dwpt)


def _profile_is_nash(
    link1: LinkParams,
    link2: LinkParams,
    prefs: Preferences,
    gains: np.ndarray,
    n_dwpt: int,
    profile: tuple[int, ...],
) -> bool:
    x1 = sum(profile)
    x2 = len(profile) - x1
    t1_stay = bpr_time(link1, x1)
    t2_stay = bpr_time(link2, x2)
    t1_join = bpr_time(link1, x1 + 1)
    t2_join = bpr_time(link2, x2 + 1)
    for idx, on1 in enumerate(profile):
        bonus = gains[idx] if idx < n_dwpt else 0.0
        if on1:
            gain = prefs.vot * (t1_stay - t2_join) - bonus
        else:
            gain = prefs.vot * (t2_stay - t1_join) + bonus
        if gain > INDIFFERENCE_EPS:
            return False
    return True


def _exhaustive_check(scenario, on_link1, socs, gains, n_dwpt, n_agents):
    """Enumerate all 2^n profiles (vectorized in chunks): the endpoint
    must be Nash, and so must the potential minimizer; misalignment of
    the two would flag a utility/potential bug."""
    link1 = scenario.network.link1
    link2 = scenario.network.link2
    prefs = scenario.prefs
    price = scenario.toll.dwpt_link1_charge

    endpoint = tuple(int(v) for v in on_link1)
    if not _profile_is_nash(link1, link2, prefs, gains, n_dwpt, endpoint):
        raise ConvergenceError("oracle endpoint is not a Nash profile")

    # cumulative per-vehicle times for the potential, indexed by link flow
    counts = np.arange(0, n_agents + 1, dtype=float)
    cum1 = np.concatenate(([0.0], np.cumsum(_bpr_vec(link1, counts[1:]))))
    cum2 = np.concatenate(([0.0], np.cumsum(_bpr_vec(link2, counts[1:]))))
    offsets = price - prefs.voe * (1.0 / socs - 1.0)  # per DWPT on link 1

    best_phi = np.inf
    best_profile = None
    chunk = 1 << 16
    for start in range(0, 1 << n_agents, chunk):
        codes = np.arange(start, min(start + chunk, 1 << n_agents))
        bits = (codes[:, None] >> np.arange(n_agents)) & 1
        x1 = bits.sum(axis=1)
        phi = prefs.vot * (cum1[x1] + cum2[n_agents - x1])
        if n_dwpt:
            phi = phi + bits[:, :n_dwpt].astype(float) @ offsets
        k = int(np.argmin(phi))
        if phi[k] < best_phi:
            best_phi = float(phi[k])
            best_profile = tuple(int(b) for b in bits[k])
    if not _profile_is_nash(link1, link2, prefs, gains, n_dwpt, best_profile):
        raise ConvergenceError("potential minimizer is not a Nash profile")
