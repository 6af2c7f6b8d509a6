import pytest

from rrcif.preprocess import Beat
from rrcif.signal_io import ModDepths, SynthSpec, synthesize


def make_synth(rr=20.0, hr=80.0, duration=480.0, fs=100.0, depths=(0.1,) * 5, noise=0.02, seed=1):
    spec = SynthSpec(
        rr=rr, hr=hr, duration_s=duration, fs=fs,
        depths=ModDepths(*depths), noise_sd=noise, seed=seed,
    )
    return synthesize(spec)


def make_beats(n=40, period=0.75, v_peak=1.0, amp=1.0, width=0.19, rise=0.075, t0=0.5):
    """A clean uniform beat train for unit tests on beat-level operations."""
    beats = []
    for i in range(n):
        t_pk = t0 + i * period
        beats.append(
            Beat(
                t_foot=t_pk - 0.2,
                v_foot=v_peak - amp,
                t_peak=t_pk,
                v_peak=v_peak,
                width50=width,
                rise25_75=rise,
                period=None if i == 0 else period,
                artifact=False,
            )
        )
    return beats


@pytest.fixture(scope="session")
def clean_synth():
    return make_synth()
