"""Standard calibration protocols: inversion recovery, Hahn echo, CPMG.

These are the measurements one runs before any protected-drive
experiment, to pin down T1 and T2 of the sample.  All three are
simulated over a Gaussian inhomogeneous line and fitted with the same
`fit_exp_decay` used on real data; the recovered times should match the
environment they were generated with.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from drivenspin import Environment, cpmg, fit_exp_decay, hahn_echo_decay, inversion_recovery

env = Environment(T1=15.0, T2=3.0)
print(f"ground truth: T1 = {env.T1} us, T2 = {env.T2} us\n")

fig, axes = plt.subplots(1, 3, figsize=(11, 3.6))

def _fit_and_plot(ax, t, y, title):
    t_decay, p, _ = fit_exp_decay(t, y, model="plain_exp")
    ax.plot(t, y, "o", ms=3)
    ax.plot(t, p["c"] + p["A"] * np.exp(-t / p["T"]), "-", lw=0.8)
    ax.set_title(f"{title}: {t_decay:.2f} us")
    return t_decay


# --- inversion recovery -> T1
delays = np.linspace(0.3, 60.0, 28)
d, sz = np.transpose(inversion_recovery(env, delays))
t1 = _fit_and_plot(axes[0], d, sz, "inversion recovery, T1")
axes[0].set_xlabel("delay (us)")
axes[0].set_ylabel(r"$\langle S_z \rangle$")
print(f"inversion recovery : T1 = {t1:6.2f} us")

# --- Hahn echo -> T2 (the pi pulse removes the static spread)
taus = np.linspace(0.05, 4.0, 24)
t2e, amp = np.transpose(hahn_echo_decay(env, taus, sigma_mhz=1.0))
t2 = _fit_and_plot(axes[1], t2e, amp, "Hahn echo, T2")
axes[1].set_xlabel("2*tau (us)")
print(f"Hahn echo          : T2 = {t2:6.2f} us")

# --- CPMG train, 1 MHz FWHM static line
train = cpmg(env, n_pulses=24, tau=env.T2 / 16, inhomogeneity=1.0)
t2c = _fit_and_plot(axes[2], train.t, train.amplitude, "CPMG (24 pulses), T2")
axes[2].set_xlabel("echo time (us)")
print(f"CPMG               : T2 = {t2c:6.2f} us")

out = pathlib.Path(__file__).with_suffix(".png")
fig.tight_layout()
fig.savefig(out, dpi=120)
print(f"wrote {out}")
