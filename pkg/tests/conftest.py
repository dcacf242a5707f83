"""Shared fixtures: cached contexts, band data, and gap certificates.

Band computations and certificates are memoized per session so the
module tests and the acceptance suite can share the expensive spectra.
"""

import numpy as np
import pytest

from nctorus.algebra import RationalTheta, hofstadter_element
from nctorus.arithmetic import make_weyl_context
from nctorus.chern import gap_certificates
from nctorus.representations import reference_fibered_rep, weyl_fibered_rep
from nctorus.spectral import bands_on_grid, detect_gaps_refined

_BANDS = {}
_CERTS = {}
_REPORTS = {}


def ctx_of(M, N, q, r):
    return make_weyl_context(RationalTheta(M, N), q, r)


def bands_of(M, N, q, r, kind, G):
    key = (M, N, q, r, kind, G)
    if key not in _BANDS:
        ctx = ctx_of(M, N, q, r)
        rep = weyl_fibered_rep(ctx) if kind == "weyl" else reference_fibered_rep(ctx)
        _BANDS[key] = bands_on_grid(rep, hofstadter_element(ctx.theta), G)
    return _BANDS[key]


def report_of(M, N, q, r, G, tol=1e-8):
    key = (M, N, q, r, G, tol)
    if key not in _REPORTS:
        ctx = ctx_of(M, N, q, r)
        rep = weyl_fibered_rep(ctx)
        report, _ = detect_gaps_refined(rep, hofstadter_element(ctx.theta), G, tol)
        _REPORTS[key] = report
    return _REPORTS[key]


def certs_of(M, N, q, r, G):
    key = (M, N, q, r, G)
    if key not in _CERTS:
        _CERTS[key] = gap_certificates(ctx_of(M, N, q, r), G)
    return _CERTS[key]


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
