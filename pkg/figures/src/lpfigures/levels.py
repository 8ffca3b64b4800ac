"""Closed-form energy and Casimir expressions for the shipped presets.

The trajectory files carry only sample values, so drawing a level surface
needs the scalar fields themselves. They are restated here from the preset
definitions, keyed by the preset name and parameter echo in summary.json;
anything else is rejected rather than guessed.

Every function accepts broadcasting arrays (mu1, mu2, mu3) so a whole
meshgrid evaluates in one call.
"""

import numpy as np

PI8 = np.pi / 8.0


def _kida_fields(params):
    eps = float(params["eps"])
    omega = float(params["omega"])

    def h(m1, m2, m3):
        arg = PI8 - m3
        # outside the domain wall the energy is undefined; NaN keeps the
        # isosurface away without poisoning the rest of the grid
        out = np.where(arg > 0, eps * m2 + omega * m3, np.nan)
        return out - PI8 * np.log(np.where(arg > 0, arg, 1.0))

    def f1(m1, m2, m3):
        return m1**2 + m2**2 - m3**2

    return {"h": h, "f1": f1}


def _rattleback_fields(params):
    lam = float(params["lam"])

    def h(m1, m2, m3):
        return 0.5 * (m1**2 + m2**2 + m3**2)

    def f1(m1, m2, m3):
        base = np.where(m2 > 0, m2, np.nan) if lam != round(lam) else m2
        return m1 * base**lam

    return {"h": h, "f1": f1}


_FIELDS = {"kida": _kida_fields, "rattleback": _rattleback_fields}


def level_functions(preset: str, params: dict) -> dict:
    """Return {'h': fn, 'f1': fn} for a known 3-component preset."""
    try:
        factory = _FIELDS[preset]
    except KeyError:
        raise ValueError(
            f"no closed-form level sets for preset {preset!r}; "
            f"supported: {sorted(_FIELDS)}"
        ) from None
    return factory(params)
