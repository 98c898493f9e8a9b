"""Power spectra of single-ion coordinate time series.

Frequencies are in cycles per unit dimensionless time, so the axial trap
frequency sits at 1/(2 pi).  Power is |FFT|^2 / S of the mean-subtracted
series, one-sided with interior bins doubled; the absolute scale is
arbitrary but Parseval-consistent: the powers sum to the summed squared
deviation of the (windowed) series.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError

MIN_SAMPLES = 16


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectrum with its provenance metadata."""

    frequencies: np.ndarray
    power: np.ndarray
    ion: int
    axis: str
    n_samples: int
    sample_interval: float
    hann: bool

    @property
    def bin_width(self):
        return 1.0 / (self.n_samples * self.sample_interval)


def power_spectrum(series, sample_interval, hann=False, ion=-1, axis=""):
    """One-sided power spectrum of a mean-subtracted, uniformly sampled series.

    ion and axis are carried as metadata only; the defaults mark a spectrum
    that does not belong to a specific chain coordinate.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < MIN_SAMPLES:
        raise InvalidParameterError(f"need a 1-D series of >= {MIN_SAMPLES} samples")
    x = x - x.mean()
    if hann:
        x = x * np.hanning(x.size)
    s = x.size
    amp = np.fft.rfft(x)
    power = np.abs(amp) ** 2 / s
    # double interior bins so the one-sided powers obey Parseval
    power[1:] *= 2.0
    if s % 2 == 0:
        power[-1] /= 2.0
    freqs = np.fft.rfftfreq(s, d=sample_interval)
    return Spectrum(
        frequencies=freqs,
        power=power,
        ion=ion,
        axis=axis,
        n_samples=s,
        sample_interval=float(sample_interval),
        hann=hann,
    )


def motion_spectrum(record, ion, axis, window=None, hann=False):
    """Spectrum of one ion coordinate over a time window of a trajectory."""
    from .thermostat import AXES

    if axis not in AXES:
        raise InvalidParameterError(f"axis must be one of {AXES}")
    if not 0 <= ion < record.n_ions:
        raise InvalidParameterError("ion index out of range")
    times = record.times
    if times.size < 2:
        raise InvalidParameterError("record too short for a spectrum")
    mask = np.ones(times.size, dtype=bool) if window is None else (
        (times >= window[0]) & (times <= window[1]))
    series = record.positions()[mask, ion, AXES.index(axis)]
    if series.size < MIN_SAMPLES:
        raise InvalidParameterError("window holds too few samples for a spectrum")
    interval = record.schedule.dt * record.schedule.sample_stride
    return power_spectrum(series, interval, hann=hann, ion=ion, axis=axis)


def dominant_peak(spectrum):
    """(frequency, power) of the strongest non-DC bin; ties resolve to the
    lowest frequency."""
    if spectrum.power.size < 2:
        raise InvalidParameterError("spectrum has no non-DC bins")
    k = 1 + int(np.argmax(spectrum.power[1:]))
    return float(spectrum.frequencies[k]), float(spectrum.power[k])


def spectral_entropy(spectrum):
    """Shannon entropy (nats) of the normalized non-DC power distribution.

    0 for a single-line spectrum, ln(M) for a flat one over M non-DC bins;
    higher values flag the band-like structure of zigzag-phase motion.
    """
    power = spectrum.power[1:]
    total = float(np.sum(power))
    if total <= 0:
        raise InvalidParameterError("zero total power")
    p = power / total
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def save_spectrum(spectrum, path):
    """Two-column text serialization with metadata in header comments."""
    header = (
        f"ion={spectrum.ion} axis={spectrum.axis} samples={spectrum.n_samples} "
        f"sample_interval={spectrum.sample_interval:.12g} hann={spectrum.hann}\n"
        "frequency[cycles/t~] power[arb]"
    )
    np.savetxt(path, np.column_stack((spectrum.frequencies, spectrum.power)),
               header=header)
