"""Deterministic discrete-time traffic world.

One rollout is a pure function of (network, demand, policy, seed): a fixed
0.1 s step advances signals, Stop/Go decisions, IDM accelerations,
positions, conflict-zone occupancy, collision detection, and departures in
a fixed order, so identical inputs give byte-identical event logs.

Geometry convention: a vehicle's `position` is its front bumper's distance
from the lane start. The last `zone_length` meters of every lane feeding an
intersection form that intersection's interior (the conflict zone); the
stop line sits at lane.length - zone_length. A vehicle occupies the zone
from the moment its front passes the stop line until its rear has fully
entered the movement's exit lane.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .agent import (GO, ACTION_NAMES, CONTROL_ZONE, DECISION_PERIOD,
                    RewardWeights, build_observation, compute_reward)
from .idm import (B_EMERGENCY, DEFAULT_IDM, HV, RV, STOP_SPEED, IdmParams,
                  VehicleState, advance_vehicle, idm_acceleration)
from .netmodel import Network, Movement, SIGNALIZED, UNSIGNALIZED
from .signals import phase_at

REAR_END = "RearEnd"
CROSSING = "Crossing"

EVENT_COLUMNS = ("time", "event_type", "vehicle_ids", "location", "extra")


@dataclass(frozen=True)
class EngineConfig:
    dt: float = 0.1
    zone_length: float = 12.0       # interior depth of an intersection box
    vehicle_length: float = 5.0
    gap_accept_tta: float = 4.0     # HV critical time-to-arrival at unsignalized
    engage_range: float = 50.0      # distance at which stop-line rules kick in
    collision_dwell: float = 5.0    # wreck blocks the road this long
    all_red: float = 0.0            # clearance tail carved out of each phase
    control_zone: float = CONTROL_ZONE
    decision_period: float = DECISION_PERIOD

    @property
    def decision_steps(self) -> int:
        return max(1, round(self.decision_period / self.dt))


@dataclass(frozen=True)
class DemandSchedule:
    """Spawn plan: total_vehicles arrive uniformly over the horizon, routed
    by an origin-weighted draw (the east-west axis is weighted axis_bias : 1
    to give the demand a dominant direction), with a deterministic quota
    making exactly round(rv_penetration * total) of them RVs."""
    total_vehicles: int
    horizon: float = 1000.0
    rv_penetration: float = 0.0
    axis_bias: float = 2.0

    def __post_init__(self):
        if self.total_vehicles <= 0:
            raise ValueError("total_vehicles must be > 0")
        if not 0.0 <= self.rv_penetration <= 1.0:
            raise ValueError("rv_penetration must be in [0, 1]")

    def arrival_time(self, k: int) -> float:
        return (k + 0.5) * self.horizon / self.total_vehicles

    def is_rv(self, k: int) -> bool:
        p = self.rv_penetration
        return math.floor(p * (k + 1) + 0.5) - math.floor(p * k + 0.5) == 1


@dataclass(frozen=True)
class Event:
    time: float
    event_type: str   # Spawn | Departure | Collision | Decision
    vehicle_ids: tuple[str, ...]
    location: str
    extra: str = ""


@dataclass(frozen=True)
class CollisionEvent:
    time: float
    kind: str                      # RearEnd | Crossing
    vehicle_ids: tuple[str, str]
    location: str


@dataclass
class RolloutSummary:
    spawned: int = 0
    departed: int = 0
    collided: int = 0              # distinct vehicles over all collision events
    collision_events: int = 0
    rv_spawned: int = 0
    duration: float = 0.0

    def as_text(self) -> str:
        lines = [f"{k} = {v}" for k, v in vars(self).items()]
        if self.departed > 0:
            lines.append(f"collision_rate = {self.collided / self.departed:.6f}")
        else:
            lines.append("collision_rate = undefined")
        return "\n".join(lines) + "\n"


class RandomPolicy:
    """Uniform Stop/Go baseline."""

    def decide(self, obs, rng) -> int:
        return int(rng.integers(2))


class AlwaysGoPolicy:
    def decide(self, obs, rng) -> int:
        return GO


@dataclass
class _Pending:
    """An RV decision whose transition is not yet complete."""
    obs: np.ndarray
    action: int
    delay: float
    collided: bool = False


class Simulation:
    """Single-rollout world. Step with step(); query events/summary after.

    transition_sink, when set, receives (obs, action, reward, next_obs,
    terminal) for every completed RV decision; terminal marks the end of
    one control-zone passage (zone cleared, collision, or horizon flush).
    """

    def __init__(self, net: Network, schedule: DemandSchedule, policy,
                 seed: int, config: EngineConfig = EngineConfig(),
                 idm_params: IdmParams = DEFAULT_IDM,
                 weights: RewardWeights = RewardWeights(),
                 transition_sink=None, log_decisions: bool = True):
        self.net = net
        self.schedule = schedule
        self.policy = policy
        self.config = config
        self.idm_params = idm_params
        self.weights = weights
        self.transition_sink = transition_sink
        self.log_decisions = log_decisions
        self.rng = np.random.default_rng(seed)

        self.step_count = 0
        self.vehicles: dict[str, VehicleState] = {}
        self.lane_vehicles: dict[str, list[VehicleState]] = {}
        self.zone_occupancy: dict[str, dict[str, str]] = {
            i.id: {} for i in net.intersections}
        self.zone_of: dict[str, tuple[str, str]] = {}
        self.next_move: dict[str, Movement | None] = {}
        self.pending: dict[str, _Pending] = {}
        self.contacts: set[tuple[str, str]] = set()
        self.events: list[Event] = []
        self.collision_log: list[CollisionEvent] = []
        self.collided_ids: set[str] = set()
        self.spawned = 0
        self.rv_spawned = 0
        self.departed = 0
        self.collision_removed = 0

        self._next_arrival = 0
        self._spawn_queues: dict[str, deque] = {}
        self._route_ids, self._route_probs = self._route_table()
        self._params_cache: dict[tuple[IdmParams, float], IdmParams] = {}
        self._signalized = [i for i in net.intersections if i.control == SIGNALIZED]
        self._stop_line: dict[str, float] = {
            l.id: l.length - config.zone_length
            for l in net.lanes if l.downstream_intersection is not None}

    # -- setup ---------------------------------------------------------------

    def _route_table(self):
        ids, weights = [], []
        for r in self.net.routes:
            origin = r.lane_chain[0]
            source = origin.split("_")[1]
            axis = source[1] if source.startswith("B") else "N"
            weights.append(self.schedule.axis_bias if axis in ("E", "W") else 1.0)
            ids.append(r.id)
        if not ids:
            raise ValueError("network has no routes to spawn on")
        probs = np.array(weights, dtype=np.float64)
        return ids, probs / probs.sum()

    @property
    def clock(self) -> float:
        return self.step_count * self.config.dt

    def zone_entry_lanes(self, intersection_id: str) -> set[str]:
        return {self.net.movement_by_id[mid].from_lane
                for mid in self.zone_occupancy[intersection_id].values()}

    def _effective_params(self, params: IdmParams, limit: float) -> IdmParams:
        if params.desired_speed <= limit:
            return params
        key = (params, limit)
        if key not in self._params_cache:
            self._params_cache[key] = replace(params, desired_speed=limit)
        return self._params_cache[key]

    def _movement_after(self, v: VehicleState) -> Movement | None:
        chain = self.net.route_by_id[v.route_id].lane_chain
        if v.route_index + 1 >= len(chain):
            return None
        return self.net.movement_by_lanes[(chain[v.route_index],
                                           chain[v.route_index + 1])]

    # -- spawning ------------------------------------------------------------

    def _spawn_step(self):
        t = self.clock
        total = self.schedule.total_vehicles
        while (self._next_arrival < total
               and t >= self.schedule.arrival_time(self._next_arrival)):
            k = self._next_arrival
            route_id = self._route_ids[
                int(self.rng.choice(len(self._route_ids), p=self._route_probs))]
            kind = RV if self.schedule.is_rv(k) else HV
            origin = self.net.route_by_id[route_id].lane_chain[0]
            self._spawn_queues.setdefault(origin, deque()).append((k, route_id, kind))
            self._next_arrival += 1

        cfg = self.config
        for origin in sorted(self._spawn_queues):
            queue = self._spawn_queues[origin]
            while queue:
                tail = self.lane_vehicles.get(origin)
                tail = tail[-1] if tail else None
                if tail is not None and tail.position - tail.length \
                        < self.idm_params.min_gap + cfg.vehicle_length:
                    break
                k, route_id, kind = queue.popleft()
                lane = self.net.lane_by_id[origin]
                speed = min(lane.speed_limit, self.idm_params.desired_speed)
                if tail is not None:
                    speed = min(speed, tail.speed)
                v = VehicleState(
                    id=f"V{k:06d}", kind=kind, lane=origin,
                    position=cfg.vehicle_length, speed=speed,
                    route_id=route_id, route_index=0, idm=self.idm_params,
                    length=cfg.vehicle_length)
                self.vehicles[v.id] = v
                self.lane_vehicles.setdefault(origin, []).append(v)
                self.next_move[v.id] = self._movement_after(v)
                self.spawned += 1
                if kind == RV:
                    self.rv_spawned += 1
                self.events.append(Event(t, "Spawn", (v.id,), origin,
                                         f"kind={kind};route={route_id}"))

    # -- per-step caches -----------------------------------------------------

    def _permitted_now(self) -> dict[str, frozenset[str]]:
        t = self.clock
        out = {}
        for inter in self._signalized:
            state = phase_at(inter.plan, t, inter.id)
            phase = inter.plan.phases[state.phase_index]
            if self.config.all_red > 0.0 and \
                    state.time_into_phase >= phase.duration - self.config.all_red:
                out[inter.id] = frozenset()
            else:
                out[inter.id] = phase.permitted_movements
        return out

    def _refresh_control(self):
        for v in self.vehicles.values():
            if v.kind != RV or v.collided_at is not None:
                v.controlled = False
                continue
            lane = self.net.lane_by_id[v.lane]
            iid = lane.downstream_intersection
            controlled = False
            if iid is not None and \
                    self.net.intersection_by_id[iid].control == UNSIGNALIZED:
                dist = self._stop_line[v.lane] - v.position
                if 0.0 <= dist <= self.config.control_zone \
                        and self.next_move.get(v.id) is not None:
                    controlled = True
            if controlled and not v.controlled:
                v.current_action = None   # brake until the first decision
            v.controlled = controlled

    # -- decisions -----------------------------------------------------------

    def _close_pending(self, rv_id: str, next_obs, terminal: bool):
        pend = self.pending.pop(rv_id, None)
        if pend is None:
            return
        reward = compute_reward(pend.delay, pend.action, pend.collided,
                                self.weights)
        if self.transition_sink is not None:
            nxt = pend.obs * 0.0 if next_obs is None else next_obs
            self.transition_sink(pend.obs, pend.action, reward, nxt, terminal)

    def _decision_step(self):
        t = self.clock
        controlled = sorted(v.id for v in self.vehicles.values() if v.controlled)
        for rv_id in controlled:
            v = self.vehicles[rv_id]
            obs = build_observation(self, self.net, rv_id)
            self._close_pending(rv_id, obs, terminal=False)
            action = self.policy.decide(obs, self.rng)
            v.current_action = action
            self.pending[rv_id] = _Pending(obs=obs, action=action,
                                           delay=float(obs[1]))
            if self.log_decisions:
                self.events.append(Event(
                    t, "Decision", (rv_id,), v.lane,
                    f"action={ACTION_NAMES[action]}"))

    # -- acceleration rules ----------------------------------------------------

    def _zone_conflict_occupied(self, iid: str, movement: Movement) -> bool:
        conflicts = self.net.conflict_sets[movement.id]
        for mid in self.zone_occupancy[iid].values():
            if mid in conflicts:
                return True
        return False

    def _front_before_line(self, lane_id: str):
        """First vehicle on the lane whose front has not passed the stop
        line, or None."""
        stop_line = self._stop_line[lane_id]
        for v in self.lane_vehicles.get(lane_id, ()):
            if v.position <= stop_line:
                return v
        return None

    def _committed_runner(self, iid: str, movement: Movement) -> bool:
        """True when some conflicting vehicle can no longer stop before its
        own stop line even at the emergency limit, so it will sweep through
        the zone regardless of its signal."""
        for mid in self.net.conflict_sets[movement.id]:
            other = self.net.movement_by_id[mid]
            w = self._front_before_line(other.from_lane)
            if w is None or w.collided_at is not None:
                continue
            if w.speed < STOP_SPEED:
                continue
            if self.next_move.get(w.id) is not other:
                continue
            dist = self._stop_line[other.from_lane] - w.position
            if w.speed * w.speed / (2.0 * B_EMERGENCY) > dist:
                return True
        return False

    def _hv_cleared(self, iid: str, movement: Movement, claims) -> bool:
        """Gap acceptance at an unsignalized intersection: enter only when
        the zone holds no conflicting vehicle, no conflicting approach has a
        moving vehicle within gap_accept_tta of its stop line, and no
        earlier-processed vehicle claimed a conflicting entry this step.
        Standing vehicles are not treated as threats, which keeps opposing
        queues from deadlocking."""
        if self._zone_conflict_occupied(iid, movement):
            return False
        claimed = claims.get(iid)
        conflicts = self.net.conflict_sets[movement.id]
        if claimed and any(mid in conflicts for mid in claimed):
            return False
        seen_lanes = set()
        for mid in conflicts:
            other = self.net.movement_by_id[mid]
            if other.from_lane in seen_lanes:
                continue
            seen_lanes.add(other.from_lane)
            w = self._front_before_line(other.from_lane)
            if w is None or w.collided_at is not None or w.speed < STOP_SPEED:
                continue
            w_move = self.next_move.get(w.id)
            if w_move is None or w_move.id not in conflicts:
                continue
            tta = (self._stop_line[other.from_lane] - w.position) / w.speed
            if tta < self.config.gap_accept_tta:
                return False
        return True

    def _compute_accelerations(self, permitted) -> dict[str, float]:
        accel: dict[str, float] = {}
        claims: dict[str, list[str]] = {}
        cfg = self.config
        for lane_id in sorted(self.lane_vehicles):
            vehicles = self.lane_vehicles[lane_id]
            if not vehicles:
                continue
            lane = self.net.lane_by_id[lane_id]
            iid = lane.downstream_intersection
            stop_line = self._stop_line.get(lane_id)
            control = (self.net.intersection_by_id[iid].control
                       if iid is not None else None)
            for i, v in enumerate(vehicles):
                if v.collided_at is not None:
                    accel[v.id] = 0.0
                    continue
                params = self._effective_params(v.idm, lane.speed_limit)
                # Real leader: same lane, else the tail of the next route lane.
                if i > 0:
                    lead = vehicles[i - 1]
                    gap = lead.position - lead.length - v.position
                    dv = v.speed - lead.speed
                else:
                    gap, dv = math.inf, 0.0
                    nxt = self.next_move.get(v.id)
                    if nxt is not None:
                        queue = self.lane_vehicles.get(nxt.to_lane)
                        if queue:
                            tail = queue[-1]
                            gap = (lane.length - v.position) \
                                + tail.position - tail.length
                            dv = v.speed - tail.speed
                a = idm_acceleration(v.speed, dv, max(gap, 1e-3), params)

                # Stop-line constraints apply only before the line.
                if stop_line is not None and v.position <= stop_line:
                    d_stop = stop_line - v.position
                    movement = self.next_move.get(v.id)
                    hold = False
                    if movement is None:
                        hold = False
                    elif control == SIGNALIZED:
                        if movement.id not in permitted[iid]:
                            hold = True
                        elif d_stop <= cfg.engage_range:
                            hold = (self._zone_conflict_occupied(iid, movement)
                                    or self._committed_runner(iid, movement))
                    elif control == UNSIGNALIZED:
                        if v.kind == RV:
                            if v.controlled and v.current_action != GO:
                                hold = True
                        elif d_stop <= cfg.engage_range \
                                and self._front_before_line(lane_id) is v:
                            if self._hv_cleared(iid, movement, claims):
                                claims.setdefault(iid, []).append(movement.id)
                            else:
                                hold = True
                    if hold:
                        a_line = idm_acceleration(
                            v.speed, v.speed, max(d_stop, 1e-3), params)
                        a = min(a, a_line)
                accel[v.id] = a
        return accel

    # -- integration, occupancy, collisions ----------------------------------

    def _integrate(self, accel):
        arrived = []
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            if v.collided_at is not None:
                continue
            advance_vehicle(v, accel[vid], self.config.dt)
            lane = self.net.lane_by_id[v.lane]
            if v.position > lane.length:
                movement = self.next_move.get(vid)
                if movement is None:
                    arrived.append(vid)
                else:
                    v.position -= lane.length
                    v.lane = movement.to_lane
                    v.route_index += 1
                    v.waiting_time = 0.0
                    v.current_action = None
                    v.controlled = False
                    self.next_move[vid] = self._movement_after(v)
        return arrived

    def _rebuild_lanes(self):
        lanes: dict[str, list[VehicleState]] = {}
        for vid in sorted(self.vehicles):
            lanes.setdefault(self.vehicles[vid].lane, []).append(self.vehicles[vid])
        for vs in lanes.values():
            vs.sort(key=lambda v: (-v.position, v.id))
        self.lane_vehicles = lanes

    def _update_occupancy(self):
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            zone = self.zone_of.get(vid)
            if zone is None:
                stop_line = self._stop_line.get(v.lane)
                if stop_line is not None and v.position > stop_line:
                    movement = self.next_move.get(vid)
                    if movement is not None:
                        iid = self.net.lane_by_id[v.lane].downstream_intersection
                        self.zone_occupancy[iid][vid] = movement.id
                        self.zone_of[vid] = (iid, movement.id)
            else:
                iid, mid = zone
                movement = self.net.movement_by_id[mid]
                cleared = (v.lane == movement.to_lane
                           and v.position >= v.length)
                if cleared:
                    del self.zone_occupancy[iid][vid]
                    del self.zone_of[vid]
                    if vid in self.pending:
                        # Passage complete: the Go that entered the zone
                        # resolves with no collision.
                        self._close_pending(vid, None, terminal=True)

    def _record_collision(self, t, kind, v1, v2, location):
        pair = (v1.id, v2.id) if v1.id < v2.id else (v2.id, v1.id)
        if pair in self.contacts:
            return
        self.contacts.add(pair)
        self.collision_log.append(CollisionEvent(t, kind, pair, location))
        self.events.append(Event(t, "Collision", pair, location, f"kind={kind}"))
        for v in (v1, v2):
            self.collided_ids.add(v.id)
            if v.collided_at is None:
                v.collided_at = t
                v.speed = 0.0
                v.controlled = False
            if v.id in self.pending:
                self.pending[v.id].collided = True
                self._close_pending(v.id, None, terminal=True)

    def _detect_collisions(self):
        t = self.clock
        for lane_id in sorted(self.lane_vehicles):
            vehicles = self.lane_vehicles[lane_id]
            for i in range(1, len(vehicles)):
                lead, follower = vehicles[i - 1], vehicles[i]
                if lead.position - lead.length - follower.position <= 0.0:
                    self._record_collision(t, REAR_END, lead, follower, lane_id)
        for inter in self.net.intersections:
            occupancy = self.zone_occupancy[inter.id]
            if len(occupancy) < 2:
                continue
            entries = sorted(occupancy.items())
            for i in range(len(entries)):
                for j in range(i + 1, len(entries)):
                    vid1, m1 = entries[i]
                    vid2, m2 = entries[j]
                    if self.net.conflicts(m1, m2):
                        self._record_collision(
                            t, CROSSING, self.vehicles[vid1],
                            self.vehicles[vid2], inter.conflict_zone_id)

    def _remove_vehicle(self, vid: str):
        v = self.vehicles.pop(vid)
        zone = self.zone_of.pop(vid, None)
        if zone is not None:
            self.zone_occupancy[zone[0]].pop(vid, None)
        self.next_move.pop(vid, None)
        self.contacts = {p for p in self.contacts if vid not in p}
        lane_list = self.lane_vehicles.get(v.lane)
        if lane_list is not None and v in lane_list:
            lane_list.remove(v)
        return v

    def _departures(self, arrived):
        t = self.clock
        for vid in arrived:
            v = self.vehicles.get(vid)
            if v is None or v.collided_at is not None:
                continue
            self.events.append(Event(t, "Departure", (vid,), v.lane))
            self._remove_vehicle(vid)
            self.departed += 1
        for vid in sorted(self.vehicles):
            v = self.vehicles[vid]
            if v.collided_at is not None and \
                    t - v.collided_at >= self.config.collision_dwell:
                self._remove_vehicle(vid)
                self.collision_removed += 1

    # -- public stepping -------------------------------------------------------

    def step(self):
        # Arrival times are bounded by the horizon; this also retries spawns
        # queued behind a full entry lane, which are never dropped.
        self._spawn_step()
        permitted = self._permitted_now()
        self._refresh_control()
        if self.step_count % self.config.decision_steps == 0:
            self._decision_step()
        accel = self._compute_accelerations(permitted)
        arrived = self._integrate(accel)
        self._rebuild_lanes()
        self._update_occupancy()
        self._detect_collisions()
        self._departures(arrived)
        self.step_count += 1

    def flush_pending(self):
        """Close every open RV transition at episode end."""
        for rv_id in sorted(self.pending):
            self._close_pending(rv_id, None, terminal=True)

    def summary(self) -> RolloutSummary:
        return RolloutSummary(
            spawned=self.spawned, departed=self.departed,
            collided=len(self.collided_ids),
            collision_events=len(self.collision_log),
            rv_spawned=self.rv_spawned, duration=self.clock)


def run_rollout(net: Network, schedule: DemandSchedule, policy, seed: int,
                duration: float, config: EngineConfig = EngineConfig(),
                weights: RewardWeights = RewardWeights(),
                transition_sink=None, log_decisions: bool = True):
    """Run one complete rollout; returns (events, summary)."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    sim = Simulation(net, schedule, policy, seed, config,
                     weights=weights, transition_sink=transition_sink,
                     log_decisions=log_decisions)
    steps = round(duration / config.dt)
    for _ in range(steps):
        sim.step()
    sim.flush_pending()
    return sim.events, sim.summary()


def format_event(event: Event) -> str:
    return ",".join((f"{event.time:.1f}", event.event_type,
                     "|".join(event.vehicle_ids), event.location, event.extra))


def write_events_csv(events, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(EVENT_COLUMNS) + "\n")
        for event in events:
            f.write(format_event(event) + "\n")
