"""Car-following dynamics: IDM acceleration law and kinematic integration.

All human-driven vehicles, and robot vehicles outside their control zones,
follow the Intelligent Driver Model. Braking for red signals and for Stop
decisions is expressed through the same law by feeding it a virtual standing
leader at the stop line, so every deceleration goes through one code path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

HV = "HV"
RV = "RV"

NO_LEADER_GAP = math.inf  # sentinel: free road ahead

# Hard physical deceleration cap. Deliberately finite so that bad policy
# decisions can still produce collisions; the engine must not be able to
# brake its way out of every conflict.
B_EMERGENCY = 6.0

STOP_SPEED = 0.1  # below this a vehicle counts as stopped/queued


@dataclass(frozen=True)
class IdmParams:
    desired_speed: float = 13.9   # v0, urban 50 km/h
    time_headway: float = 1.5     # T
    min_gap: float = 2.0          # s0
    max_accel: float = 1.0        # a
    comfort_decel: float = 1.5    # b
    accel_exponent: float = 4.0   # delta

    def __post_init__(self):
        for name in ("desired_speed", "time_headway", "min_gap",
                     "max_accel", "comfort_decel"):
            if getattr(self, name) <= 0:
                raise ValueError(f"IdmParams.{name} must be > 0")
        if self.accel_exponent < 1:
            raise ValueError("IdmParams.accel_exponent must be >= 1")


DEFAULT_IDM = IdmParams()


def idm_acceleration(speed: float, approach_rate: float, gap: float,
                     params: IdmParams = DEFAULT_IDM) -> float:
    """IDM acceleration a*[1 - (v/v0)^delta - (s*/s)^2].

    speed: current speed (>= 0). approach_rate: own speed minus leader
    speed. gap: bumper-to-bumper distance (> 0; math.inf when no leader).
    Result is clamped to [-B_EMERGENCY, max_accel]. With gap = inf the
    interaction term is exactly 0, so free-flow equilibrium at v0 returns
    exactly 0 and a standing start returns exactly max_accel.
    """
    p = params
    free = (speed / p.desired_speed) ** p.accel_exponent
    if gap == math.inf:
        interaction = 0.0
    elif gap <= 0.0:
        raise ValueError(f"gap must be > 0, got {gap!r}")
    else:
        s_star = p.min_gap + speed * p.time_headway \
            + speed * approach_rate / (2.0 * math.sqrt(p.max_accel * p.comfort_decel))
        if s_star < p.min_gap:
            s_star = p.min_gap
        interaction = (s_star / gap) ** 2
    accel = p.max_accel * (1.0 - free - interaction)
    if accel > p.max_accel:
        return p.max_accel
    if accel < -B_EMERGENCY:
        return -B_EMERGENCY
    return accel


@dataclass
class VehicleState:
    """One vehicle's kinematic and routing state.

    position is measured from the lane start; route_index points into the
    route's lane chain at the current lane. waiting_time accumulates seconds
    spent below STOP_SPEED since entering the current lane (it resets on
    lane change) and feeds the delay observable.
    """
    id: str
    kind: str                      # HV or RV
    lane: str
    position: float
    speed: float
    route_id: str
    route_index: int
    idm: IdmParams = field(default=DEFAULT_IDM)
    length: float = 5.0
    controlled: bool = False       # RV currently under the learned policy
    waiting_time: float = 0.0
    current_action: str | None = None   # last Stop/Go decision while controlled
    collided_at: float | None = None    # set when involved in a collision


def advance_vehicle(vehicle: VehicleState, accel: float, dt: float) -> None:
    """Semi-implicit Euler update in place: speed first, then position.

    Speed is floored at 0; lane handoff (position past lane end) is the
    engine's job since it needs the route and network.
    """
    v = vehicle.speed + accel * dt
    if v < 0.0:
        v = 0.0
    vehicle.speed = v
    vehicle.position += v * dt
    if v < STOP_SPEED:
        vehicle.waiting_time += dt
