"""Pulse-sequence engine and calibration protocols."""

import math

import numpy as np
import pytest

from drivenspin import (
    AcquireEcho,
    AcquireFID,
    Burst,
    DensityState,
    DriveConfig,
    EnsembleSpec,
    Environment,
    HardPulse,
    PHASE_FOR_AXIS,
    Prepare,
    SequenceError,
    Wait,
    cpmg,
    hahn_echo_decay,
    inversion_recovery,
    protected_drive,
    resonant_drive,
    run_sequence,
)

FREE = Environment()
NO_SPREAD = EnsembleSpec(sigma_mhz=0.0)


def _cfg(delta=10.0, h_d=None, h_i=0.0, phi=0.0, theta=0.0):
    if h_d is None:
        h_d = delta * math.sqrt(3.0)
    return DriveConfig(f0=9600.0, delta=delta, h_d=h_d, h_i=h_i, phi=phi, theta=theta)


# ------------------------------------------------------------ segments


def test_segment_validation():
    with pytest.raises(ValueError):
        Prepare("+Q")
    with pytest.raises(ValueError):
        Prepare("-Z")  # preparation axes are the three + axes only
    with pytest.raises(ValueError):
        Burst(-1.0)
    with pytest.raises(ValueError):
        Wait(-0.1)
    with pytest.raises(ValueError):
        HardPulse(math.pi, axis="z")  # only in-plane rotation axes
    with pytest.raises(ValueError):
        AcquireEcho(tau_free=-0.2)
    with pytest.raises(ValueError):
        AcquireEcho(readout="diagonal")


def test_acquire_must_be_last():
    cfg = _cfg()
    with pytest.raises(SequenceError):
        run_sequence([AcquireEcho(), Wait(1.0)], cfg, FREE)
    with pytest.raises(SequenceError):
        run_sequence([Prepare(), AcquireFID(), AcquireEcho()], cfg, FREE)


def test_prepare_sets_the_state():
    cfg = _cfg()
    for axis, vec in (("+X", [0.5, 0, 0]), ("+Y", [0, 0.5, 0]), ("+Z", [0, 0, 0.5])):
        r = run_sequence([Prepare(axis)], cfg, FREE)
        assert np.allclose(r.final_state.bloch, vec, atol=1e-12)
        assert r.signal is None  # no Acquire segment


def test_double_pi_flip_returns_home():
    cfg = _cfg()
    r = run_sequence(
        [Prepare("+Z"), HardPulse(math.pi, "y"), HardPulse(math.pi, "y")], cfg, FREE
    )
    assert r.final_state.bloch[2] == pytest.approx(0.5, abs=1e-6)
    assert r.final_state.purity == pytest.approx(1.0, abs=1e-6)


def test_wait_relaxes_without_precession():
    cfg = _cfg()
    env = Environment(T1=5.0, T2=10.0)
    to_minus_z = [Prepare("+Z"), HardPulse(math.pi, "y")]
    r = run_sequence(to_minus_z + [Wait(5.0)], cfg, env, ensemble=NO_SPREAD)
    assert r.final_state.bloch[2] == pytest.approx(0.5 - math.exp(-1.0), abs=1e-9)
    r = run_sequence([Prepare("+X"), Wait(4.0)], cfg, env, ensemble=NO_SPREAD)
    sx, sy, _ = r.final_state.bloch
    assert sx == pytest.approx(0.5 * math.exp(-0.4), abs=1e-9)
    assert abs(sy) < 1e-12  # fields off: no precession during Wait


def test_short_pre_readout_wait_warns():
    cfg = _cfg()
    env = Environment(T1=15.0, T2=0.69)
    with pytest.warns(UserWarning, match="pre-readout wait"):
        run_sequence([Prepare("+Z"), Wait(0.5), AcquireEcho(0.3)], cfg, env)


# ------------------------------------------------------------ readout


def test_echo_readout_is_linear_in_the_prepared_state():
    cfg = _cfg()
    sz_pre, signals = [], []
    for ang in np.linspace(0.0, math.pi, 9):
        r = run_sequence([Prepare("+Z"), HardPulse(ang, "y"), AcquireEcho(0.25)], cfg, FREE)
        sz_pre.append(0.5 * math.cos(ang))
        signals.append(r.signal)
    slope, intercept = np.polyfit(sz_pre, signals, 1)
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert abs(intercept) < 1e-9
    assert np.abs(np.polyval([slope, intercept], sz_pre) - signals).max() < 1e-9


def test_inverted_state_reads_minus_one():
    cfg = _cfg()
    r = run_sequence([Prepare("+Z"), HardPulse(math.pi, "y"), AcquireEcho(0.3)], cfg, FREE)
    assert r.signal == pytest.approx(-1.0, abs=1e-9)


def test_finite_pulses_approximate_ideal_rotations():
    cfg = _cfg()
    r = run_sequence(
        [Prepare("+Z"), HardPulse(math.pi, "y"), AcquireEcho(0.3)],
        cfg,
        FREE,
        finite_pulses=True,
    )
    assert r.signal == pytest.approx(-1.0, abs=1e-6)


def test_transverse_readout_axes():
    cfg = _cfg()
    for axis in ("+X", "+Y"):
        r = run_sequence([Prepare(axis), AcquireEcho(0.2, readout=axis)], cfg, FREE)
        assert r.signal == pytest.approx(1.0, abs=1e-9)


# ------------------------------------------------------------ bursts


def test_burst_trace_covers_the_window():
    cfg = _cfg(h_i=2.0)
    r = run_sequence([Prepare("+Z"), Burst(2.0)], cfg, Environment(T1=15.0, T2=3.0))
    tr = r.trace
    assert tr is not None
    assert tr.t[0] == 0.0  # t = 0 at burst start
    assert 1.9 < tr.t[-1] <= 2.0
    assert len(tr) > 200
    dt = np.diff(tr.t)
    assert np.allclose(dt, dt[0])


def test_sequences_are_deterministic():
    cfg = _cfg(h_i=2.0)
    env = Environment(T1=15.0, T2=0.69)
    segs = [Prepare("+X"), Burst(2.0), AcquireEcho(0.3, readout="+X")]
    a = run_sequence(segs, cfg, env)
    b = run_sequence(segs, cfg, env)
    assert a.signal == b.signal
    assert np.array_equal(a.trace.vectors, b.trace.vectors)
    assert np.array_equal(a.trace.t, b.trace.t)


def test_protected_burst_outlives_unprotected():
    # 15 us burst against a 0.69 us inhomogeneous T2; the weak image tone
    # locks the oscillation, without it the ensemble dephases in ~1 us
    env = Environment(T1=math.inf, T2=0.69)
    cfg = protected_drive(10.0, 15.0, axis="+Z")
    segs = lambda on: [Prepare("+Z"), Burst(15.0, image_on=on), AcquireEcho(0.3)]
    protected = run_sequence(segs(True), cfg, env).signal
    unprotected = run_sequence(segs(False), cfg, env).signal
    assert abs(protected) >= 0.5  # measured 0.821
    assert abs(unprotected) <= 0.1  # measured 0.000


# ------------------------------------------------------------ helpers


def test_protected_drive_places_h_d_on_the_crossing():
    for n in (2, 3):
        cfg = protected_drive(8.0, 10.0, n=n)
        assert cfg.h_d == pytest.approx(resonant_drive(n, 8.0))
        assert math.hypot(cfg.delta, cfg.h_d) == pytest.approx(n * 8.0)


def test_protected_drive_beat_is_commensurate():
    cfg = protected_drive(10.0, 15.0)
    cycles = 0.75 * cfg.h_i * 15.0
    assert cycles == pytest.approx(round(cycles), abs=1e-9)
    assert cfg.h_i == pytest.approx(0.12 * cfg.h_d, rel=0.05)


def test_protected_drive_axis_phases():
    assert PHASE_FOR_AXIS["+X"] == (0.0, 1.5 * math.pi)
    assert PHASE_FOR_AXIS["+Y"] == (0.5 * math.pi, 0.5 * math.pi)
    assert PHASE_FOR_AXIS["+Z"] == (0.0, 0.0)
    for axis in ("+X", "+Y", "+Z"):
        cfg = protected_drive(10.0, 10.0, axis=axis)
        assert (cfg.phi, cfg.theta) == PHASE_FOR_AXIS[axis]
    with pytest.raises(ValueError):
        protected_drive(10.0, 10.0, axis="-Z")
    with pytest.raises(ValueError):
        protected_drive(10.0, 0.0)


def test_ensemble_spec_defaults():
    offs, wts = EnsembleSpec().resolve(Environment(T1=15.0, T2=3.0))
    sigma = 1.0 / (math.pi * 3.0)
    assert offs.size == 512
    assert np.allclose(wts, 1.0 / 512)
    assert abs(offs.mean()) < 1e-12  # symmetric quantile nodes
    assert offs.std() == pytest.approx(sigma, rel=0.02)
    # infinite T2: no spread, single node
    offs, wts = EnsembleSpec().resolve(FREE)
    assert offs.size == 1 and offs[0] == 0.0 and wts[0] == 1.0
    offs, _ = EnsembleSpec(sigma_mhz=2.0, n_nodes=64).resolve(FREE)
    assert offs.size == 64
    with pytest.raises(ValueError):
        EnsembleSpec(sigma_mhz=-1.0).resolve(FREE)
    with pytest.raises(ValueError):
        EnsembleSpec(n_nodes=0).resolve(Environment(T1=15.0, T2=3.0))


# ------------------------------------------------------------ protocols


def test_hahn_echo_matches_exponential():
    env = Environment(T1=math.inf, T2=4.0)
    taus = np.linspace(0.05, 2.0, 20)
    points = hahn_echo_decay(env, taus)
    t = np.array([p[0] for p in points])
    amp = np.array([p[1] for p in points])
    assert np.abs(amp - np.exp(-t / 4.0)).max() < 1e-9  # static spread refocused
    t2_fit = -1.0 / np.polyfit(t, np.log(amp), 1)[0]
    assert t2_fit == pytest.approx(4.0, rel=0.01)
    with pytest.raises(ValueError):
        hahn_echo_decay(env, [-0.1])


@pytest.mark.parametrize("t2", [0.69, 4.0])
def test_cpmg_recovers_t2(t2):
    env = Environment(T1=math.inf, T2=t2)
    train = cpmg(env, n_pulses=24, tau=t2 / 16.0, inhomogeneity=1.0)
    t2_fit = -1.0 / np.polyfit(train.t, np.log(train.amplitude), 1)[0]
    assert t2_fit == pytest.approx(t2, rel=0.10)


def test_cpmg_alternating_axes_equivalent_for_ideal_pulses():
    env = Environment(T1=math.inf, T2=2.0)
    plain = cpmg(env, n_pulses=16, tau=0.1, inhomogeneity=0.5)
    alt = cpmg(env, n_pulses=16, tau=0.1, inhomogeneity=0.5, alternate_axes=True)
    assert np.abs(plain.amplitude - alt.amplitude).max() < 0.02
    with pytest.raises(ValueError):
        cpmg(env, n_pulses=0, tau=0.1)
    with pytest.raises(ValueError):
        cpmg(env, n_pulses=4, tau=0.0)


def test_inversion_recovery_closed_form():
    env = Environment(T1=15.0, T2=3.0)
    delays = [0.0, 5.0, 15.0, 45.0]
    for d, sz in inversion_recovery(env, delays):
        assert sz == pytest.approx(0.5 - math.exp(-d / 15.0), abs=1e-12)
    with pytest.raises(ValueError):
        inversion_recovery(env, [-1.0])


def test_tls_scaling_shortens_the_pi_time():
    # a transition matrix element of 3 (the strong Mn line) triples the
    # effective drive, so a burst of 1/(2*h_d) on resonance overshoots
    from drivenspin import material, reduce_to_tls

    sys_mn = material("MnMgO", cubic_a=55.5)
    tls = reduce_to_tls(sys_mn, 353.7, (17, 18))
    assert tls.drive_scale == pytest.approx(3.0, abs=0.01)
    h_d = 5.0
    cfg = DriveConfig(f0=9600.0, delta=0.0, h_d=h_d)
    segs = [Prepare("+Z"), Burst(1.0 / (2.0 * h_d * 3.0), image_on=False)]
    r = run_sequence(segs, cfg, FREE, tls=tls)
    assert r.final_state.bloch[2] == pytest.approx(-0.5, abs=1e-6)
