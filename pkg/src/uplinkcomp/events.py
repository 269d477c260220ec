"""Per-realisation decoding events and the UE1 outcome of every decoding scheme.

Notation (UE ``i`` at BS ``j``, other UE ``i'``):

* ``E_ij``  -- UE i decodable at BS j treating UE i' as noise.
* ``A_ij``  -- ``E_ij`` or (``E_i'j`` and the interference-free SNR of UE i
  at BS j clears its threshold), i.e. decodable with one SIC stage.

External interference ``I_j`` at BS j is folded in by replacing ``P`` with the
per-BS effective power ``P / (1 + P I_j)``; both in-cluster UEs seen at BS j
use the same effective power.

Every function accepts scalar draws or arrays of draws; fading arrays are
indexed ``[ue, bs, ...]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

import numpy as np

from .channel import FadingDraw


class Scheme(str, Enum):
    MARP = "MARP"
    DIS = "DIS"
    MIS = "MIS"
    MMSE_SIC = "MMSE-SIC"
    AW_SIC = "AW+SIC"
    AW_DIS = "AW+DIS"

    @classmethod
    def parse(cls, name) -> "Scheme":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("_", "-")
        for s in cls:
            if key in (s.value, s.name.replace("_", "-")):
                return s
        raise ValueError(f"unknown scheme {name!r}")


class Site(IntEnum):
    NONE = 0
    BS1 = 1
    BS2 = 2
    JOINT = 3  # two-antenna joint receiver (MMSE-SIC)


@dataclass(frozen=True)
class DecodeOutcome:
    ue1_decoded: np.ndarray
    ue2_decoded: np.ndarray
    sinr1: np.ndarray
    site1: np.ndarray

    @property
    def outage1(self):
        return ~np.asarray(self.ue1_decoded)


def effective_powers(P, I1=0.0, I2=0.0) -> np.ndarray:
    """Per-BS effective power ``P / (1 + P I_j)``, stacked as ``[bs, ...]``."""
    i1, i2 = np.broadcast_arrays(np.asarray(I1, float), np.asarray(I2, float))
    return np.stack([P / (1.0 + P * i1), P / (1.0 + P * i2)])


def _hsq(draw) -> np.ndarray:
    return draw.hsq if isinstance(draw, FadingDraw) else np.asarray(draw, dtype=float)


def _powers(powers, hsq) -> np.ndarray:
    pe = np.asarray(powers, dtype=float)
    if pe.ndim == 0:
        pe = np.full((2,) + hsq.shape[2:], float(pe))
    elif pe.ndim < hsq.ndim - 1:
        # one power per BS shared by every draw
        pe = pe.reshape(pe.shape + (1,) * (hsq.ndim - 1 - pe.ndim))
    return pe


class LinkState:
    """All interference-limited and clean SINRs plus the E/A events of one draw set.

    ``il[i, j]``    SINR of UE i at BS j treating the other UE as noise.
    ``clean[i, j]`` SNR of UE i at BS j after the other UE is cancelled.
    """

    def __init__(self, hsq, powers, thetas):
        hsq = np.asarray(hsq, dtype=float)
        pe = _powers(powers, hsq)
        th = np.asarray(thetas, dtype=float)
        self.hsq, self.pe, self.thetas = hsq, pe, th
        # rx[i, j] = P_eff[j] * |h_ij|^2
        rx = hsq * pe[np.newaxis]
        self.clean = rx
        self.il = rx / (1.0 + rx[::-1])
        thr = th.reshape((2, 1) + (1,) * (hsq.ndim - 2))
        self.E = self.il >= thr
        self.C = rx >= thr
        self.A = self.E | (self.E[::-1] & self.C)

    @classmethod
    def from_draw(cls, draw, powers, thetas) -> "LinkState":
        return cls(_hsq(draw), powers, thetas)

    def mirrored(self) -> "LinkState":
        return LinkState(self.hsq[::-1, ::-1], self.pe[::-1], self.thetas[::-1])


def event_E(i: int, j: int, draw, powers, thetas):
    """``E_ij`` for 1-based UE ``i`` and BS ``j``."""
    return LinkState.from_draw(draw, powers, thetas).E[i - 1, j - 1]


def event_A(i: int, j: int, draw, powers, thetas):
    """``A_ij`` for 1-based UE ``i`` and BS ``j``."""
    return LinkState.from_draw(draw, powers, thetas).A[i - 1, j - 1]


def clean_decode(i: int, j: int, draw, powers, thetas):
    """Interference-free decode of UE i at BS j (after SIC or forwarding)."""
    return LinkState.from_draw(draw, powers, thetas).C[i - 1, j - 1]


# -- UE1 side of each scheme, given a LinkState ------------------------------

def _sic_sinr(st: LinkState, j: int):
    # UE1 SINR at BS j with one SIC attempt on UE2
    return np.where(st.E[1, j], st.clean[0, j], st.il[0, j])


def _marp(st):
    sinr = _sic_sinr(st, 0)
    dec = st.A[0, 0]
    return dec, sinr, np.where(dec, Site.BS1, Site.NONE)


def _dis(st):
    # UE2's message is available at BS1 if BS1 decodes it itself or BS2 forwards it
    known = st.E[1, 0] | st.A[1, 1]
    sinr = np.where(known, st.clean[0, 0], st.il[0, 0])
    dec = st.A[0, 0] | (st.A[1, 1] & st.C[0, 0])
    return dec, sinr, np.where(dec, Site.BS1, Site.NONE)


def _mis(st):
    at_bs1 = st.il[0, 0] >= st.il[0, 1]  # ties go to BS1
    sinr = np.where(at_bs1, _sic_sinr(st, 0), _sic_sinr(st, 1))
    dec = np.where(at_bs1, st.A[0, 0], st.A[0, 1])
    site = np.where(dec, np.where(at_bs1, Site.BS1, Site.BS2), Site.NONE)
    return dec, sinr, site


def _aw_sic(st):
    s1, s2 = _sic_sinr(st, 0), _sic_sinr(st, 1)
    sinr = np.maximum(s1, s2)
    dec = st.A[0, 0] | st.A[0, 1]
    site = np.where(dec, np.where(s1 >= s2, Site.BS1, Site.BS2), Site.NONE)
    return dec, sinr, site


def _aw_dis(st):
    # once UE2 is decoded anywhere (treating UE1 as noise) its message is
    # shared, and UE1 gets an interference-free attempt at both BSs
    ue2_free = st.E[1, 0] | st.E[1, 1]
    s1 = np.where(ue2_free, st.clean[0, 0], st.il[0, 0])
    s2 = np.where(ue2_free, st.clean[0, 1], st.il[0, 1])
    sinr = np.maximum(s1, s2)
    dec = st.A[0, 0] | st.A[0, 1] | (ue2_free & (st.C[0, 0] | st.C[0, 1]))
    site = np.where(dec, np.where(s1 >= s2, Site.BS1, Site.BS2), Site.NONE)
    return dec, sinr, site


def aw_dis_home_forwarding_decoded(st: LinkState):
    """UE1 success when only UE2's home BS forwards UE2's message.

    Narrower than the full AW+DIS controller: it ignores the path where BS1
    decodes UE2, forwards it to BS2, and BS2 then decodes UE1 cleanly.
    """
    return st.A[0, 0] | st.A[0, 1] | (st.A[1, 1] & st.C[0, 0])


_UE1 = {
    Scheme.MARP: _marp,
    Scheme.DIS: _dis,
    Scheme.MIS: _mis,
    Scheme.AW_SIC: _aw_sic,
    Scheme.AW_DIS: _aw_dis,
}


def outcome_from_state(scheme, st: LinkState) -> DecodeOutcome:
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.MMSE_SIC:
        raise ValueError("MMSE-SIC needs complex gains; use outcome_mmse_sic")
    rule = _UE1[scheme]
    dec1, sinr1, site1 = rule(st)
    dec2 = rule(st.mirrored())[0]
    return DecodeOutcome(dec1, dec2, sinr1, site1)


def ue1_decoded(scheme, st: LinkState):
    """UE1 success indicator only (skips the mirrored UE2 evaluation)."""
    scheme = Scheme.parse(scheme)
    return _UE1[scheme](st)[0]


def outcome_marp(draw, powers, thetas) -> DecodeOutcome:
    return outcome_from_state(Scheme.MARP, LinkState.from_draw(draw, powers, thetas))


def outcome_dis(draw, powers, thetas) -> DecodeOutcome:
    return outcome_from_state(Scheme.DIS, LinkState.from_draw(draw, powers, thetas))


def outcome_mis(draw, powers, thetas) -> DecodeOutcome:
    return outcome_from_state(Scheme.MIS, LinkState.from_draw(draw, powers, thetas))


def outcome_aw_sic(draw, powers, thetas) -> DecodeOutcome:
    return outcome_from_state(Scheme.AW_SIC, LinkState.from_draw(draw, powers, thetas))


def outcome_aw_dis(draw, powers, thetas) -> DecodeOutcome:
    return outcome_from_state(Scheme.AW_DIS, LinkState.from_draw(draw, powers, thetas))


# -- MMSE-SIC -----------------------------------------------------------------

def mmse_sic_sinr(h, P, theta2):
    """UE1 SINR of the joint two-antenna MMSE-SIC receiver.

    ``h`` is the complex channel array ``[ue, bs, ...]``. Uses the rank-one
    inverse ``(I + P u u^H)^-1 = I - P u u^H / (1 + P |u|^2)`` and the 2x2
    identity ``|a|^2 |b|^2 - |a^H b|^2 = |a1 b2 - a2 b1|^2``.
    """
    h11, h12, h21, h22 = h[0, 0], h[0, 1], h[1, 0], h[1, 1]
    n1 = np.abs(h11) ** 2 + np.abs(h12) ** 2
    n2 = np.abs(h21) ** 2 + np.abs(h22) ** 2
    det = np.abs(h11 * h22 - h12 * h21) ** 2
    # P h2^H (I + P h1 h1^H)^-1 h2, and the same with roles swapped
    ue2_first = P * (n2 + P * det) / (1.0 + P * n1)
    ue1_mmse = P * (n1 + P * det) / (1.0 + P * n2)
    return np.where(ue2_first > theta2, P * n1, ue1_mmse)


def outcome_mmse_sic(draw: FadingDraw, P, thetas, interference=(0.0, 0.0)) -> DecodeOutcome:
    if np.any(np.asarray(interference[0]) != 0) or np.any(np.asarray(interference[1]) != 0):
        raise ValueError("MMSE-SIC is only defined without external interference")
    if np.ndim(P) != 0:
        raise ValueError("MMSE-SIC takes a single common power")
    th1, th2 = thetas
    h = draw.h
    sinr1 = mmse_sic_sinr(h, P, th2)
    sinr2 = mmse_sic_sinr(h[::-1, ::-1], P, th1)
    dec1 = sinr1 >= th1
    site = np.where(dec1, Site.JOINT, Site.NONE)
    return DecodeOutcome(dec1, sinr2 >= th2, sinr1, site)


def outcome(scheme, draw, powers, thetas) -> DecodeOutcome:
    """Dispatch on ``scheme``; MMSE-SIC requires a scalar ``powers``."""
    scheme = Scheme.parse(scheme)
    if scheme is Scheme.MMSE_SIC:
        return outcome_mmse_sic(draw, powers, thetas)
    return outcome_from_state(scheme, LinkState.from_draw(draw, powers, thetas))
