import math

import numpy as np
import pytest
from scipy import special

from prekopa_lab import bergman as B
from prekopa_lab import mep
from prekopa_lab import weights as W
from prekopa_lab.errors import DomainError
from prekopa_lab.marginal import marginal_at, marginal_lift


def radial(name):
    return W.planar_weight(W.lookup(name))


def test_mep_check_examples():
    cert = mep.mep_check(W.constant_weight(0.0), 0, 1)
    assert abs(cert.minimal_norm - math.pi) < 1e-10 and cert.passed
    cert = mep.mep_check(radial("radial:abs2"), 0, 1)
    assert abs(cert.minimal_norm - 1.9858653037988714) < 1e-9 and cert.passed
    cert = mep.mep_check(radial("radial:minus-abs2"), 0, 1)
    assert abs(cert.minimal_norm - math.pi * (math.e - 1)) < 1e-7
    assert not cert.passed and cert.stabilized


@pytest.mark.parametrize("c,a,r", [(0.0, 0, 0.25), (1.5, 2 - 1j, 1.0), (-3.0, 5j, 2.5)])
def test_constant_weight_equality(c, a, r):
    cert = mep.mep_check(W.constant_weight(c), a, r)
    exact = math.pi * r * r * math.exp(-c)
    assert abs(cert.minimal_norm - exact) < 1e-10 * exact
    assert abs(cert.bound - exact) < 1e-14 * exact
    assert cert.passed


def test_domain_checks():
    boxed = W.PlanarWeight("disk-only", lambda t: np.abs(t) ** 2, True, (0j, 1.0))
    with pytest.raises(DomainError):
        mep.mep_check(boxed, 0.5, 0.6)
    assert mep.mep_check(boxed, 0.2, 0.5).passed
    pole = W.PlanarWeight("pole", lambda t: np.where(t == 0, np.inf, 0.0))
    with pytest.raises(DomainError):
        mep.mep_check(pole, 0, 1)


def test_sweep_psh_weight_all_pass():
    sweep = mep.mep_sweep(radial("radial:abs2"), [0, 0.5, 1j], [0.5, 1.0])
    assert sweep.overall == "all-pass"
    assert len(list(sweep.cells())) == 6


def test_sweep_flags_non_psh():
    sweep = mep.mep_sweep(radial("radial:minus-abs2"), [0], [1.0])
    assert sweep.overall == "violations"
    (a, r, reason) = sweep.violations[0]
    assert (a, r) == (0j, 1.0) and "minimal_norm" in reason


def test_sweep_empty_radii():
    sweep = mep.mep_sweep(radial("radial:abs2"), [0, 1j], [])
    assert sweep.overall == "all-pass" and list(sweep.cells()) == []


def test_sweep_records_domain_errors():
    boxed = W.PlanarWeight("disk-only", lambda t: np.abs(t) ** 2, True, (0j, 1.0))
    sweep = mep.mep_sweep(boxed, [0, 0.9], [0.5])
    assert sweep.overall == "violations"
    assert sweep.violations[0][2].startswith("DomainError")
    assert sweep.certificates[0][0].passed and sweep.certificates[1][0] is None


def test_sweep_is_thread_independent():
    w = radial("radial:abs4")
    a = mep.mep_sweep(w, mep.default_centers()[:6], [0.5, 1.0], workers=1).to_dict()
    b = mep.mep_sweep(w, mep.default_centers()[:6], [0.5, 1.0], workers=8).to_dict()
    assert a == b


@pytest.mark.parametrize("name", ["radial:abs2", "radial:abs4"])
def test_soundness_by_reintegration(name):
    w = radial(name)
    for a in (0, 0.5 - 0.5j):
        for r in (0.25, 1.0):
            cert = mep.mep_check(w, a, r)
            assert cert.passed
            again = B.extension_norm(w, cert)
            assert again <= cert.bound * (1 + 1e-8)
            assert abs(again - cert.minimal_norm) < 1e-8 * cert.minimal_norm


@pytest.mark.parametrize("name,psh", [("radial:abs2", True), ("radial:abs4", True),
                                      ("radial:minus-abs2", False)])
def test_contrapositive_on_default_grid(name, psh):
    sweep = mep.mep_sweep(radial(name), mep.default_centers(), mep.DEFAULT_RADII)
    assert (sweep.overall == "all-pass") == psh


def test_mean_value_examples():
    rep = mep.mean_value_check(radial("radial:abs2"), mep.mep_check(radial("radial:abs2"), 0, 1))
    assert abs(rep.area_mean - 0.5) < 1e-12
    assert rep.value_at_center == 0.0
    assert all(s >= -1e-8 for s in rep.slacks)

    rep = mep.mean_value_check(W.constant_weight(0.0), mep.mep_check(W.constant_weight(0.0), 0, 1))
    assert max(abs(s) for s in rep.slacks) < 1e-9

    a = 0.5 + 0.5j
    rep = mep.mean_value_check(W.real_part_weight(), mep.mep_check(W.real_part_weight(), a, 0.5))
    # harmonic weight: every link is an equality
    assert abs(rep.area_mean - a.real) < 1e-12
    assert max(abs(s) for s in rep.slacks) < 1e-8


def test_mean_value_needs_passing_certificate():
    w = radial("radial:minus-abs2")
    with pytest.raises(DomainError):
        mep.mean_value_check(w, mep.mep_check(w, 0, 1))


def test_tube_box_quadratic():
    spec = W.lookup("tube:t2+x2-box")
    cert = mep.tube_certificate(spec, 0, 1)
    exact = math.pi * math.sqrt(math.pi) * special.erf(1.0)
    assert abs(cert.bound - exact) < 1e-9 * exact
    assert abs(cert.bound / math.pi - 1.4936482656248538) < 1e-9
    assert cert.passed


def test_tube_equality_for_t_free_weight():
    spec = W.quadratic("x2-box", [[0, 0], [0, 1]], fiber=W.DomainSpec.box((-1, 1)))
    cert = mep.tube_certificate(spec, 0.3 + 0.1j, 1.0)
    assert abs(cert.minimal_norm - cert.bound) < 1e-8
    assert cert.passed


def test_tube_coupled_gaussian():
    assert mep.tube_certificate(W.lookup("tube:coupled-gaussian"), 0, 0.5).passed


def test_tube_reduction_is_exact():
    spec = W.lookup("tube:coupled-gaussian")
    lift = marginal_lift(spec)
    a = 0.2 - 0.4j
    direct = mep.mep_check(lift, a, 0.5)
    tube = mep.tube_certificate(spec, a, 0.5)
    assert direct.minimal_norm == tube.minimal_norm
    assert abs(tube.bound - math.pi * 0.25 * math.exp(-marginal_at(spec, a.real))) < 1e-15


@pytest.mark.parametrize("c", [-1.0, 2.0])
def test_radius_scaling_for_constants(c):
    w = W.constant_weight(c)
    m1 = mep.mep_check(w, 0, 0.5).minimal_norm
    m2 = mep.mep_check(w, 0, 1.0).minimal_norm
    assert abs(m2 / m1 - 4.0) < 1e-12


def test_sweep_csv(tmp_path):
    sweep = mep.mep_sweep(radial("radial:abs2"), [0], [0.5, 1.0])
    path = tmp_path / "s.csv"
    mep.write_sweep_csv(path, [c for _, _, c in sweep.cells()])
    rows = path.read_text().splitlines()
    assert rows[0] == "a_re,a_im,r,minimal_norm,bound,verdict"
    assert len(rows) == 3 and rows[1].endswith(",pass")
