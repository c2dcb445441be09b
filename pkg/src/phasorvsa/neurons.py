"""Spike-timing neuron models over piecewise-linear integrator state.

Every model fires at most once per global cycle and encodes its result in
the offset of that spike within the cycle (t/T = phi/2pi).  Integrators are
normalized to cycle units: a slope of 1 means "one full cycle per period".

Each population class implements the same dynamics twice:

* fixed-step methods (`fs_*`): advance every integrator by its slope each
  dt and check the spike condition once per step (the reference semantics);
* event methods (`ev_*`): update state lazily at event times and compute
  the next threshold crossing in closed form (the performance path).

Models:

* source  - spikes once per cycle at a fixed phase.
* relay   - re-emits arriving spikes during an active cycle window (used to
            gate the seed input of a clean-up memory).
* sum     - phase addition (binding): counts up to the first spike, holds,
            counts down after the second; the countdown may cross into the
            next cycle when the phase sum exceeds one period.
* sub     - phase subtraction (unbinding): measures the b->a interval into
            a threshold, then fires when the cycle timer reaches it; inputs
            arrive on distinguished ports a and b.
* mult    - phase scaling (fractional binding): threshold alpha*x_hat over
            a centered cycle integrator; inputs are read in (-pi, pi].
* avg     - circular midpoint of two spike trains (bundling): fires when
            p >= 1-q with p <= 1/4, or q >= 1-p with q <= 1/4.
* rf      - resonate-and-fire: a decaying oscillator accumulates weighted,
            delay-shifted kicks and spikes at its phase when the amplitude
            reaches threshold; negative weights subtract amplitude
            (inhibition).  Used for clean-up memories.
"""

from __future__ import annotations

import math

import numpy as np

TWO_PI = 2.0 * math.pi

# Comparisons against thresholds use this slack (in cycle units) so that
# grid-exact crossings are detected on time despite float accumulation.
ZTOL = 1e-9

# Input separations within this many radians of pi are treated as antipodal
# by the phase-averaging model (no meaningful midpoint).
ANTIPODAL_TOL_RAD = 1e-6


class Anomaly:
    """One flagged irregularity: the run continues, the record remembers."""

    __slots__ = ("gid", "time", "kind")

    def __init__(self, gid: int, time: float, kind: str):
        self.gid = gid
        self.time = time
        self.kind = kind

    def __repr__(self):
        return f"Anomaly(gid={self.gid}, time={self.time:.6f}, kind={self.kind!r})"


class Population:
    """Base: holds SoA state for `size` neurons starting at global id `offset`."""

    kind = "?"

    def __init__(self, name: str, size: int, offset: int, params: dict, period: float):
        self.name = name
        self.size = size
        self.offset = offset
        self.params = params
        self.T = period
        self.gen = np.zeros(size, dtype=np.int64)
        self.last = np.zeros(size)  # last sync time, event mode
        self.anomalies: list[Anomaly] = []

    # -- common -----------------------------------------------------------
    def reset(self):
        self.gen[:] = 0
        self.last[:] = 0.0
        self.anomalies = []

    def check_finite(self):
        for arr in self._state_arrays():
            if not np.all(np.isfinite(arr[~np.isnan(arr)])):
                bad = int(np.nonzero(~np.isfinite(arr) & ~np.isnan(arr))[0][0])
                return bad
        return None

    def _state_arrays(self):
        return ()

    def flag(self, i: int, t: float, kind: str):
        self.anomalies.append(Anomaly(self.offset + i, t, kind))

    # -- event mode --------------------------------------------------------
    def ev_sync(self, i: int, t: float):
        self.last[i] = t

    def ev_boundary(self, t: float, cycle: int):
        """Cycle-start handling; returns local indices needing rescheduling."""
        return ()

    def ev_deliver(self, i: int, t: float, weight: float, port, src_gid: int):
        """Handle an arriving spike; returns (emit_now: bool, reschedule: bool)."""
        return False, False

    def ev_crossing(self, i: int, t: float):
        """Next self-generated spike time (time, order_key) or None."""
        return None

    def ev_fire(self, i: int, t: float):
        """Validate and apply a scheduled crossing; returns True if it spikes."""
        return False

    # -- fixed-step mode ----------------------------------------------------
    def fs_boundary(self, cycle: int):
        pass

    def fs_deliver(self, i: int, t: float, weight: float, port):
        """Returns True if the arrival itself emits a spike at time t."""
        return False

    def fs_integrate(self, dt: float):
        pass

    def fs_test(self, t_next: float):
        """Spike indices for this step (time t_next), in ascending order."""
        return ()


class SourcePopulation(Population):
    """Phasor sources: neuron k spikes every cycle at its stored phase."""

    kind = "source"

    def __init__(self, *args):
        super().__init__(*args)
        phases = np.asarray(self.params["phases"], dtype=np.float64)
        if phases.shape != (self.size,):
            raise ValueError(f"source {self.name!r} needs one phase per neuron")
        self.frac = np.mod(phases, TWO_PI) / TWO_PI
        # a phase-0 source fires exactly on the boundary: in fixed-step that
        # is the test slot at the end of the previous cycle (x reaches 1)
        self.fire_level = np.where(self.frac <= ZTOL, 1.0, self.frac)
        self.next_time = np.zeros(self.size)
        self.x = np.zeros(self.size)
        self.armed = np.ones(self.size, dtype=bool)

    def _state_arrays(self):
        return (self.x,)

    def reset(self):
        super().reset()
        self.next_time = self.frac * self.T
        self.x[:] = 0.0
        self.armed[:] = True

    # event mode: self-scheduled periodic spikes
    def ev_crossing(self, i, t):
        return self.next_time[i], 0.0

    def ev_fire(self, i, t):
        self.next_time[i] = t + self.T
        return True

    # fixed-step: integrate the local cycle position and test once per step
    def fs_boundary(self, cycle):
        self.x[:] = 0.0
        self.armed[:] = True

    def fs_integrate(self, dt):
        self.x += dt / self.T

    def fs_test(self, t_next):
        fired = np.nonzero(self.armed & (self.x >= self.fire_level - ZTOL))[0]
        self.armed[fired] = False
        return fired


class RelayPopulation(Population):
    """Pass-through gate: re-emits arrivals while the cycle window is open."""

    kind = "relay"

    def __init__(self, *args):
        super().__init__(*args)
        self.window = (
            float(self.params.get("window_start_cycle", 0.0)),
            float(self.params.get("window_end_cycle", math.inf)),
        )

    def _in_window(self, t):
        lo, hi = self.window
        return lo * self.T - ZTOL * self.T <= t < hi * self.T - ZTOL * self.T

    def ev_deliver(self, i, t, weight, port, src_gid):
        return self._in_window(t), False

    def fs_deliver(self, i, t, weight, port):
        return self._in_window(t)


class PhaseSumPopulation(Population):
    """Binding: output spike at (phi_a + phi_b) mod 2pi.

    p counts up from each cycle start; a computation window's first arrival
    copies p into q, the second starts q counting down, and the spike fires
    when q reaches 0, possibly in the following cycle.  The window counter
    qd is 1 awaiting the first spike, 0 awaiting the second, and <= -1
    while counting down.  An arrival landing mid-countdown (a third spike
    in the window, which happens while a pipeline's inputs are still
    staggered) is flagged and absorbed: the countdown finishes undisturbed
    and the spike resets the counter, so the very next arrival starts a
    clean window.  Simultaneous arrivals are handled as first-then-second
    within one delivery, which keeps the sum exact.
    """

    kind = "sum"

    def __init__(self, *args):
        super().__init__(*args)
        self.p = np.zeros(self.size)
        self.q = np.zeros(self.size)
        self.qd = np.ones(self.size, dtype=np.int64)

    def _state_arrays(self):
        return (self.p, self.q)

    def reset(self):
        super().reset()
        self.p[:] = 0.0
        self.q[:] = 0.0
        self.qd[:] = 1

    def _counting(self, i):
        return self.qd[i] <= -1

    def _arrive(self, i, t):
        """Shared window bookkeeping; returns True when the arrival itself
        completes a countdown that is due at exactly this instant."""
        emit = False
        if self._counting(i):
            if self.q[i] <= ZTOL:
                emit = True
                self.q[i] = 0.0
                self.qd[i] = 1
            else:
                self.flag(i, t, "sum-overlap")
                self.qd[i] -= 1
                return False
        if self.qd[i] == 1:
            self.q[i] = self.p[i]
            self.qd[i] = 0
        elif self.qd[i] == 0:
            self.qd[i] = -1
        return emit

    # event mode
    def ev_sync(self, i, t):
        dt_c = (t - self.last[i]) / self.T
        self.p[i] += dt_c
        if self._counting(i):
            self.q[i] -= dt_c
        self.last[i] = t

    def ev_boundary(self, t, cycle):
        dt_c = (t - self.last) / self.T
        self.p += dt_c
        counting = self.qd <= -1
        self.q[counting] -= dt_c[counting]
        self.last[:] = t
        self.p[:] = 0.0
        return ()

    def ev_deliver(self, i, t, weight, port, src_gid):
        self.ev_sync(i, t)
        emit = self._arrive(i, t)
        self.gen[i] += 1
        return emit, True

    def ev_crossing(self, i, t):
        if self._counting(i):
            return t + max(self.q[i], 0.0) * self.T, 0.0
        return None

    def ev_fire(self, i, t):
        self.ev_sync(i, t)
        if not self._counting(i) or self.q[i] > ZTOL:
            return False
        self.q[i] = 0.0
        self.qd[i] = 1
        self.gen[i] += 1
        return True

    # fixed-step
    def fs_boundary(self, cycle):
        self.p[:] = 0.0

    def fs_deliver(self, i, t, weight, port):
        return self._arrive(i, t)

    def fs_integrate(self, dt):
        d = dt / self.T
        self.p += d
        self.q[self.qd <= -1] -= d

    def fs_test(self, t_next):
        fired = np.nonzero((self.qd <= -1) & (self.q <= ZTOL))[0]
        self.q[fired] = 0.0
        self.qd[fired] = 1
        return fired


class PhaseSubPopulation(Population):
    """Unbinding: output spike at (phi_a - phi_b) mod 2pi.

    A port-b arrival restarts the elapsed timer p (which may span adjacent
    cycles); a port-a arrival freezes it into the threshold theta.  The
    cycle timer q restarts at every cycle boundary and the neuron fires when
    q reaches theta.  No output until a full (b, a) pair has been seen.
    """

    kind = "sub"

    def __init__(self, *args):
        super().__init__(*args)
        self.p = np.zeros(self.size)
        self.prun = np.zeros(self.size, dtype=bool)
        self.theta = np.full(self.size, np.nan)
        self.q = np.zeros(self.size)
        self.armed = np.zeros(self.size, dtype=bool)
        # a spike exactly on a cycle boundary belongs to the new cycle, so
        # the immediately following re-arm must be skipped (fixed-step only;
        # the event kernel orders the boundary ahead of the crossing)
        self.skip_arm = np.zeros(self.size, dtype=bool)

    def _state_arrays(self):
        return (self.p, self.q)

    def reset(self):
        super().reset()
        self.p[:] = 0.0
        self.prun[:] = False
        self.theta[:] = np.nan
        self.q[:] = 0.0
        self.armed[:] = False
        self.skip_arm[:] = False

    # event mode
    def ev_sync(self, i, t):
        dt_c = (t - self.last[i]) / self.T
        if self.prun[i]:
            self.p[i] += dt_c
        self.q[i] += dt_c
        self.last[i] = t

    def ev_boundary(self, t, cycle):
        dt_c = (t - self.last) / self.T
        self.p[self.prun] += dt_c[self.prun]
        self.q += dt_c
        self.last[:] = t
        self.q[:] = 0.0
        self.armed[:] = True
        self.gen += 1
        return range(self.size)

    def ev_deliver(self, i, t, weight, port, src_gid):
        self.ev_sync(i, t)
        if port == "b":
            self.p[i] = 0.0
            self.prun[i] = True
            return False, False
        if self.prun[i]:
            # phase difference: elapsed time reduced to one cycle
            self.theta[i] = math.fmod(self.p[i], 1.0)
            self.gen[i] += 1
            return False, True
        return False, False

    def ev_crossing(self, i, t):
        th = self.theta[i]
        if not self.armed[i] or math.isnan(th):
            return None
        if self.q[i] > th + ZTOL:
            return None  # already past: wait for the next cycle's re-arm
        return t + max(th - self.q[i], 0.0) * self.T, 0.0

    def ev_fire(self, i, t):
        self.ev_sync(i, t)
        th = self.theta[i]
        if not self.armed[i] or math.isnan(th) or self.q[i] < th - ZTOL:
            return False
        self.armed[i] = False
        self.gen[i] += 1
        return True

    # fixed-step
    def fs_boundary(self, cycle):
        self.q[:] = 0.0
        self.armed[:] = True
        self.armed[self.skip_arm] = False
        self.skip_arm[:] = False

    def fs_deliver(self, i, t, weight, port):
        if port == "b":
            self.p[i] = 0.0
            self.prun[i] = True
        elif self.prun[i]:
            self.theta[i] = math.fmod(self.p[i], 1.0)
        return False

    def fs_integrate(self, dt):
        d = dt / self.T
        self.p[self.prun] += d
        self.q += d

    def fs_test(self, t_next):
        fired = np.nonzero(self.armed & (self.q >= self.theta - ZTOL))[0]
        self.armed[fired] = False
        frac = math.fmod(t_next / self.T, 1.0)
        if min(frac, 1.0 - frac) <= ZTOL:
            self.skip_arm[fired] = True
        return fired


class PhaseMultPopulation(Population):
    """Fractional binding: output spike at (alpha * phi) mod 2pi, phi in (-pi, pi].

    The centered cycle integrator x_hat runs from -1/2 to 1/2, crossing 0
    exactly at the global cycle start.  An arrival sets the threshold to
    alpha * x_hat (wrapped back into the centered interval); the neuron
    fires when x_hat next reaches the threshold, possibly in the following
    cycle.  The centered reading makes the arrival time itself the input.
    """

    kind = "mult"

    def __init__(self, *args):
        super().__init__(*args)
        self.alpha = float(self.params["alpha"])
        self.u = np.zeros(self.size)  # unwrapped cycle position, x_hat = wrap(u)
        self.fire_u = np.full(self.size, np.nan)  # unwrapped position of next spike
        # one spike per cycle: an output phase within a step of the cycle
        # boundary would otherwise fire twice there in fixed-step mode (the
        # standing crossing and the freshly recomputed one straddle it)
        self.last_fire_cycle = np.full(self.size, -1, dtype=np.int64)

    def _state_arrays(self):
        return (self.u,)

    def reset(self):
        super().reset()
        self.u[:] = 0.0
        self.fire_u[:] = np.nan
        self.last_fire_cycle[:] = -1

    def _cycle_of(self, t):
        return int(math.floor((t + 1e-9 * self.T) / self.T))

    def _xhat(self, i):
        # centered representative in (-1/2, 1/2]: an arrival exactly at the
        # half-cycle point reads as +1/2, matching the (-pi, pi] convention
        return 0.5 - (0.5 - self.u[i] + ZTOL) % 1.0 + ZTOL

    # event mode
    def ev_sync(self, i, t):
        self.u[i] += (t - self.last[i]) / self.T
        self.last[i] = t

    def ev_boundary(self, t, cycle):
        self.u += (t - self.last) / self.T
        self.last[:] = t
        return ()

    def _crossing_offset(self, xh):
        # only the crossing offset matters; the threshold wrap is implicit.
        # float dust on a zero offset must not postpone the spike a cycle.
        offset = (self.alpha * xh - xh) % 1.0
        return 0.0 if offset >= 1.0 - ZTOL else offset

    def ev_deliver(self, i, t, weight, port, src_gid):
        self.ev_sync(i, t)
        self.fire_u[i] = self.u[i] + self._crossing_offset(self._xhat(i))
        self.gen[i] += 1
        return False, True

    def ev_crossing(self, i, t):
        if math.isnan(self.fire_u[i]):
            return None
        return t + max(self.fire_u[i] - self.u[i], 0.0) * self.T, 0.0

    def ev_fire(self, i, t):
        self.ev_sync(i, t)
        if math.isnan(self.fire_u[i]) or self.u[i] < self.fire_u[i] - ZTOL:
            return False
        self.fire_u[i] += 1.0  # steady input phases repeat every cycle
        self.gen[i] += 1
        cycle = self._cycle_of(t)
        if cycle <= self.last_fire_cycle[i]:
            return False  # surplus crossing postponed to the next cycle
        self.last_fire_cycle[i] = cycle
        return True

    # fixed-step
    def fs_deliver(self, i, t, weight, port):
        self.fire_u[i] = self.u[i] + self._crossing_offset(self._xhat(i))
        return False

    def fs_integrate(self, dt):
        self.u += dt / self.T

    def fs_test(self, t_next):
        due = np.nonzero(~np.isnan(self.fire_u) & (self.u >= self.fire_u - ZTOL))[0]
        self.fire_u[due] += 1.0
        cycle = self._cycle_of(t_next)
        fired = due[self.last_fire_cycle[due] < cycle]
        self.last_fire_cycle[fired] = cycle
        return fired


class PhaseAvgPopulation(Population):
    """Bundling: output spike at the circular midpoint of the two input phases.

    p and q time the interval since each input's latest spike and reach 1 a
    full period later; the neuron fires when p >= 1-q with p <= 1/4 or
    q >= 1-p with q <= 1/4, which selects the midpoint of the short arc.
    Antipodal inputs have no meaningful midpoint and are flagged instead.
    """

    kind = "avg"

    def __init__(self, *args):
        super().__init__(*args)
        self.timers = np.full((2, self.size), np.nan)
        self.reset_at = np.full((2, self.size), np.nan)
        self.armed = np.zeros(self.size, dtype=bool)

    def _state_arrays(self):
        return (self.timers[0], self.timers[1])

    def reset(self):
        super().reset()
        self.timers[:] = np.nan
        self.reset_at[:] = np.nan
        self.armed[:] = False

    @staticmethod
    def _antipodal(pa, pb):
        sep = abs(pa - pb)
        return abs(sep - 0.5) <= ANTIPODAL_TOL_RAD / TWO_PI

    def _deliver(self, i, t, slot):
        other = 1 - slot
        self.timers[slot, i] = 0.0
        self.reset_at[slot, i] = t
        if self.reset_at[other, i] == t:
            # coincident arrivals: the midpoint is this very instant
            self.armed[i] = False
            return True
        self.armed[i] = True
        return False

    # event mode
    def ev_sync(self, i, t):
        dt_c = (t - self.last[i]) / self.T
        self.timers[:, i] += dt_c
        self.last[i] = t

    def ev_boundary(self, t, cycle):
        dt_c = (t - self.last) / self.T
        self.timers += dt_c
        self.last[:] = t
        return ()

    def ev_deliver(self, i, t, weight, slot, src_gid):
        self.ev_sync(i, t)
        self.gen[i] += 1
        return self._deliver(i, t, slot), True

    def ev_crossing(self, i, t):
        pa, pb = self.timers[0, i], self.timers[1, i]
        if not self.armed[i] or math.isnan(pa) or math.isnan(pb):
            return None
        s = pa + pb
        if s > 1.0 + ZTOL:
            return None
        gap = (1.0 - s) / 2.0
        if min(pa, pb) + gap > 0.25 + ZTOL:
            return None  # this crossing is the far-arc midpoint
        return t + gap * self.T, 0.0

    def ev_fire(self, i, t):
        self.ev_sync(i, t)
        pa, pb = self.timers[0, i], self.timers[1, i]
        if not self.armed[i] or math.isnan(pa) or math.isnan(pb):
            return False
        if pa + pb < 1.0 - ZTOL or min(pa, pb) > 0.25 + ZTOL:
            return False
        self.armed[i] = False
        self.gen[i] += 1
        if self._antipodal(pa, pb):
            self.flag(i, t, "avg-antipodal")
            return False
        return True

    # fixed-step
    def fs_deliver(self, i, t, weight, slot):
        return self._deliver(i, t, slot)

    def fs_integrate(self, dt):
        self.timers += dt / self.T

    def fs_test(self, t_next):
        pa, pb = self.timers
        ready = (
            self.armed
            & ~np.isnan(pa)
            & ~np.isnan(pb)
            & (pa + pb >= 1.0 - ZTOL)
            & (np.minimum(pa, pb) <= 0.25 + ZTOL)
        )
        idx = np.nonzero(ready)[0]
        out = []
        for i in idx:
            self.armed[i] = False
            if self._antipodal(pa[i], pb[i]):
                self.flag(i, t_next, "avg-antipodal")
            else:
                out.append(i)
        return np.array(out, dtype=np.int64)


class RFPopulation(Population):
    """Resonate-and-fire: decaying oscillator, phase-preserving spikes.

    In the frame co-rotating with the base frequency the oscillator is a
    complex accumulator: it decays exponentially, each arriving spike adds
    weight * e^{i * arrival_phase}, and inhibitory (negative-weight) events
    subtract |weight| from the amplitude.  The neuron spikes when the global
    cycle next sweeps past the oscillator's phase with the amplitude at or
    above threshold, at most once per global cycle (tracked per cycle index
    rather than by a fixed dead time: while the oscillator phase is still
    converging it can retreat by more than a tenth of a cycle between
    spikes, and a 0.9 T refractory would then swallow the following cycle's
    legitimate spike).

    Parameters (all exposed through the network description):
      threshold            absolute spike threshold
      decay_half_life      cycles for the amplitude to halve (default 3)
      saturation_factor    amplitude cap, x threshold (default 10)
      reset_factor         post-spike amplitude clamp, x threshold; the
                           default 2 keeps a just-fired neuron above
                           threshold for one input-free cycle while bounding
                           how much history the oscillator can hoard
      phase_locked         fire at cycle phase 0 instead of the oscillator
                           phase (used by clean-up label units, whose
                           identity rather than timing carries the answer)
    """

    kind = "rf"

    def __init__(self, *args):
        super().__init__(*args)
        p = self.params
        self.threshold = float(p["threshold"])
        half_life = float(p.get("decay_half_life", 3.0))
        self.gamma = math.log(2.0) / (half_life * self.T)
        self.sat = float(p.get("saturation_factor", 10.0)) * self.threshold
        self.reset_amp = float(p.get("reset_factor", 2.0)) * self.threshold
        self.locked = bool(p.get("phase_locked", False))
        self.zr = np.zeros(self.size)
        self.zi = np.zeros(self.size)
        self.last_fire_cycle = np.full(self.size, -1, dtype=np.int64)
        self.align_base = np.zeros(self.size)  # crossings already consumed (fs)
        # amplitude as of just before any kicks delivered at the current
        # instant: a crossing due now validates against this, mirroring the
        # fixed-step order (texts precede same-time deliveries)
        self.kick_time = np.full(self.size, -math.inf)
        self.pre_kick_amp = np.zeros(self.size)

    def _state_arrays(self):
        return (self.zr, self.zi)

    def reset(self):
        super().reset()
        self.zr[:] = 0.0
        self.zi[:] = 0.0
        self.last_fire_cycle[:] = -1
        self.align_base[:] = 0.0
        self.kick_time[:] = -math.inf
        self.pre_kick_amp[:] = 0.0

    def _amp(self, i):
        return math.hypot(self.zr[i], self.zi[i])

    def _psi(self, i):
        """Firing phase as a cycle fraction in [0, 1)."""
        if self.locked:
            return 0.0
        if self.zr[i] == 0.0 and self.zi[i] == 0.0:
            return 0.0
        return math.atan2(self.zi[i], self.zr[i]) / TWO_PI % 1.0

    def _apply_kick(self, i, t, weight):
        if weight < 0:
            a = self._amp(i)
            if a > 0:
                scale = max(a - (-weight), 0.0) / a
                self.zr[i] *= scale
                self.zi[i] *= scale
        else:
            frac = math.fmod(t / self.T, 1.0)
            self.zr[i] += weight * math.cos(TWO_PI * frac)
            self.zi[i] += weight * math.sin(TWO_PI * frac)
            a = self._amp(i)
            if a > self.sat:
                self.zr[i] *= self.sat / a
                self.zi[i] *= self.sat / a

    def _clamp_after_spike(self, i):
        a = self._amp(i)
        if a > self.reset_amp and a > 0:
            self.zr[i] *= self.reset_amp / a
            self.zi[i] *= self.reset_amp / a

    # event mode
    def ev_sync(self, i, t):
        f = math.exp(-self.gamma * (t - self.last[i]))
        self.zr[i] *= f
        self.zi[i] *= f
        self.last[i] = t

    def ev_deliver(self, i, t, weight, port, src_gid):
        self.ev_sync(i, t)
        if weight >= 0 and self.kick_time[i] != t:
            self.kick_time[i] = t
            self.pre_kick_amp[i] = self._amp(i)
        self._apply_kick(i, t, weight)
        # An excitatory kick must not cancel a crossing due at this same
        # instant (the spike validates against the pre-kick state); it only
        # adds a rescheduled candidate, and whichever crossing fires first
        # invalidates the rest.  Inhibition preempts pending crossings.
        if weight < 0:
            self.gen[i] += 1
        return False, True

    def _cycle_of(self, t):
        return int(math.floor((t + 1e-9 * self.T) / self.T))

    def ev_crossing(self, i, t):
        amp = self._amp(i)
        if amp < self.threshold * (1 - 1e-12):
            return None
        psi = self._psi(i)
        # next time strictly after t at which the cycle fraction equals psi
        n = math.floor(t / self.T - psi + 1e-9)
        tc = (n + 1 + psi) * self.T
        if self._cycle_of(tc) <= self.last_fire_cycle[i]:
            tc += self.T  # one spike per cycle: wait for the next alignment
        amp_c = amp * math.exp(-self.gamma * (tc - t))
        if amp_c < self.threshold * (1 - 1e-12):
            return None
        return tc, (-amp_c if self.locked else 0.0)

    def ev_fire(self, i, t):
        self.ev_sync(i, t)
        amp = self.pre_kick_amp[i] if self.kick_time[i] == t else self._amp(i)
        if amp < self.threshold * (1 - 1e-12):
            return False
        if self._cycle_of(t) <= self.last_fire_cycle[i]:
            return False
        self.last_fire_cycle[i] = self._cycle_of(t)
        self._clamp_after_spike(i)
        self.gen[i] += 1
        return True

    # fixed-step
    def fs_deliver(self, i, t, weight, port):
        self._apply_kick(i, t, weight)
        # the next alignment is the first one strictly after this kick
        self.align_base[i] = math.floor(t / self.T - self._psi(i) + 1e-9)
        return False

    def fs_integrate(self, dt):
        f = math.exp(-self.gamma * dt)
        self.zr *= f
        self.zi *= f

    def fs_test(self, t_next):
        amp = np.hypot(self.zr, self.zi)
        if self.locked:
            psi = np.zeros(self.size)
        else:
            psi = np.mod(np.arctan2(self.zi, self.zr) / TWO_PI, 1.0)
        count = np.floor(t_next / self.T - psi + 1e-9)
        cycle = math.floor((t_next + 1e-9 * self.T) / self.T)
        ready = (
            (count > self.align_base)
            & (amp >= self.threshold * (1 - 1e-12))
            & (cycle > self.last_fire_cycle)
        )
        self.align_base = np.maximum(self.align_base, count)
        idx = np.nonzero(ready)[0]
        if len(idx) == 0:
            return idx
        # Simultaneous crossings resolve by amplitude: the strongest
        # oscillator peaks first.  Zero-delay inhibition inside this
        # population preempts weaker candidates within the same step (the
        # engine applies it through fs_inhibit_now during arbitration).
        order = np.argsort(amp[idx], kind="stable")[::-1]
        return idx[order]

    def fs_confirm_fire(self, i, t):
        """Re-check a candidate after in-step inhibition; apply spike effects."""
        if self._amp(i) < self.threshold * (1 - 1e-12):
            return False
        self.last_fire_cycle[i] = self._cycle_of(t)
        self._clamp_after_spike(i)
        return True

    def fs_inhibit_now(self, i, weight):
        self._apply_kick(i, 0.0, weight)  # negative weight: time-independent


MODEL_CLASSES = {
    cls.kind: cls
    for cls in (
        SourcePopulation,
        RelayPopulation,
        PhaseSumPopulation,
        PhaseSubPopulation,
        PhaseMultPopulation,
        PhaseAvgPopulation,
        RFPopulation,
    )
}
