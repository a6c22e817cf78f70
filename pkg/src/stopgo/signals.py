"""Fixed-time signal evaluation and the movement-permission predicate."""

from __future__ import annotations

from dataclasses import dataclass

from .netmodel import Network, SignalPlan, SIGNALIZED


@dataclass(frozen=True)
class PhaseState:
    intersection_id: str
    phase_index: int
    time_into_phase: float


def phase_at(plan: SignalPlan, t: float, intersection_id: str = "") -> PhaseState:
    """Locate the phase containing time t mod cycle_length.

    Phase boundaries belong to the later phase, so t = cycle_length wraps
    to phase 0 at offset 0.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    cycle = plan.cycle_length
    offset = t % cycle
    for index, phase in enumerate(plan.phases):
        if offset < phase.duration:
            return PhaseState(intersection_id, index, offset)
        offset -= phase.duration
    # Float roundoff at the very end of the cycle lands here.
    return PhaseState(intersection_id, 0, 0.0)


def movement_permitted(net: Network, movement_id: str, t: float) -> bool:
    """True iff the movement may enter its intersection at time t.

    Signalized: the movement must be in the current phase's permitted set.
    Unsignalized: always true; permission is delegated to RV decisions and
    HV gap acceptance in the engine.
    """
    if movement_id not in net.movement_by_id:
        raise KeyError(f"unknown movement {movement_id!r}")
    iid = net.intersection_of_movement(movement_id)
    intersection = net.intersection_by_id[iid]
    if intersection.control != SIGNALIZED:
        return True
    plan = intersection.plan
    state = phase_at(plan, t, iid)
    return movement_id in plan.phases[state.phase_index].permitted_movements
