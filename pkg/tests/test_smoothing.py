import math

import numpy as np
import pytest
from scipy import integrate, optimize

from prekopa_lab import smoothing as S
from prekopa_lab.errors import AuditError, CoverageError, DomainError


def ones(pts):
    return np.ones(len(pts))


def test_unit_ball_volume():
    assert S.unit_ball_volume(1) == 2.0
    assert S.unit_ball_volume(2) == math.pi
    assert abs(S.unit_ball_volume(3) - 4 * math.pi / 3) < 1e-15
    for n in range(1, 12):
        gamma = math.pi ** (n / 2) / math.gamma(n / 2 + 1)
        assert abs(S.unit_ball_volume(n) - gamma) < 1e-14 * gamma
    with pytest.raises(DomainError):
        S.unit_ball_volume(0)


def test_profile_endpoints():
    u = np.linspace(-2, 3, 501)
    vals = S.psi(u)
    assert np.all((vals >= 0) & (vals <= 1))
    assert np.all(vals[u <= 0] == 1.0) and np.all(vals[u >= 1] == 0.0)
    assert np.all(np.diff(vals) <= 0)


def test_c_psi_is_measured_sup():
    res = optimize.minimize_scalar(lambda u: -abs(float(S.psi_prime(u))), bounds=(0, 1),
                                   method="bounded", options={"xatol": 1e-12})
    assert abs(-res.fun - S.C_PSI) < 1e-12
    assert abs(res.x - 0.5) < 1e-6


def test_profile_derivatives_match_finite_differences():
    u = np.linspace(0.02, 0.98, 97)
    d = 1e-6
    fd1 = (S.psi(u + d) - S.psi(u - d)) / (2 * d)
    fd2 = (S.psi_prime(u + d) - S.psi_prime(u - d)) / (2 * d)
    assert np.abs(fd1 - S.psi_prime(u)).max() < 1e-7
    assert np.abs(fd2 - S.psi_second(u)).max() < 1e-5


def test_profile_smoothness_proxy():
    # no jumps in psi or psi' on a fine grid spanning both flat pieces
    u = np.linspace(-0.5, 1.5, 10001)
    step = u[1] - u[0]
    sup2 = np.abs(S.psi_second(u)).max()
    assert np.abs(np.diff(S.psi(u))).max() <= step * S.C_PSI * (1 + 1e-9)
    assert np.abs(np.diff(S.psi_prime(u))).max() <= step * sup2 * (1 + 1e-9)


def test_make_bump_examples():
    b = S.make_bump(100, 1)
    assert 160 <= b.mass <= 180
    assert b.mass_bounds == (160.0, 180.0)
    b2 = S.make_bump(100, 2)
    assert 20106.19 <= b2.mass <= 25446.90
    for R in (100, 400, 1e4):
        bump = S.make_bump(R, 2)
        assert bump([[0.0, 0.0]])[0] == 1.0
        assert bump([[R - math.sqrt(R), 0.0]])[0] == 0.0
        assert bump([[0.0, R - 2 * math.sqrt(R)]])[0] == 1.0
    with pytest.raises(DomainError):
        S.make_bump(4, 1)
    with pytest.raises(DomainError):
        S.make_bump(8, 1)


@pytest.mark.parametrize("R", [100, 400, 1e4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_mass_against_quad_and_bounds(R, n):
    bump = S.make_bump(R, n)
    sigma = S.unit_ball_volume(n)
    inner, outer = bump.inner, bump.outer
    shell, _ = integrate.quad(lambda p: float(S.psi((p - inner) / math.sqrt(R))) * p ** (n - 1),
                              inner, outer, epsabs=0, epsrel=1e-13)
    oracle = sigma * inner ** n + n * sigma * shell
    assert abs(bump.mass - oracle) < 1e-10 * oracle
    lo, hi = bump.mass_bounds
    assert lo <= bump.mass <= hi


@pytest.mark.parametrize("R", [100, 400, 1e4])
def test_gradient_bound(R):
    bump = S.make_bump(R, 1)
    rho = np.linspace(bump.inner, bump.outer, 20001)
    slope = np.abs(np.diff(bump.radial(rho)) / np.diff(rho)).max()
    assert slope <= S.C_PSI / math.sqrt(R) * (1 + 1e-6)
    assert bump.grad_sup <= S.C_PSI / math.sqrt(R)
    assert abs(bump.grad_sup * math.sqrt(R) - S.C_PSI) < 1e-12


def test_ratio_ladder_decreases():
    ratios = [S.norm_ratio(R, 1) for R in (100, 200, 400, 800)]
    assert all(a > b for a, b in zip(ratios, ratios[1:]))


def test_audit_examples():
    rec = S.constants_audit(100, 1)
    assert rec.ratio == 1.5625 and rec.cap == 1.5625
    assert rec.ratio == (100 / 80) ** 2
    rec = S.constants_audit(400, 1)
    assert abs(rec.ratio - (400 / 360) ** 2) < 1e-15 and round(rec.ratio, 4) == 1.2346
    rec = S.constants_audit(100, 3)
    assert rec.cap == 1.25 ** 6 and round(rec.cap, 4) == 3.8147
    assert abs(rec.grad_factor - S.C_PSI ** 2 / 100) < 1e-15
    with pytest.raises(DomainError):
        S.constants_audit(4, 1)


def test_audit_below_100_skips_cap():
    # at R = 25 the ratio exceeds the cap; the cap only applies for R >= 100
    rec = S.constants_audit(25, 1)
    assert rec.ratio > rec.cap


def test_audit_catches_regression(monkeypatch):
    monkeypatch.setattr(S, "norm_ratio", lambda R, n: 2.0)
    with pytest.raises(AuditError):
        S.constants_audit(100, 1)


def test_convolve_examples():
    R = 100.0
    bump = S.make_bump(R, 1)
    field = S.sample_field(ones, 1, R)
    assert abs(S.convolve(field, bump, [0.0]) - 1.0) < 1e-10
    zero = S.sample_field(lambda p: np.zeros(len(p)), 1, R)
    assert S.convolve(zero, bump, [0.0]) == 0.0
    for y in np.linspace(-5.0, 5.0, 11):
        assert abs(S.convolve(field, bump, [y]) - 1.0) < 1e-10


def test_convolve_two_dimensional():
    R = 100.0
    bump = S.make_bump(R, 2)
    field = S.sample_field(ones, 2, R)
    assert abs(S.convolve(field, bump, [0.0, 0.0]) - 1.0) < 1e-10
    assert abs(S.convolve(field, bump, [3.0, -2.0]) - 1.0) < 1e-10


def test_convolve_complex_field():
    R = 100.0
    bump = S.make_bump(R, 1)
    field = S.sample_field(lambda p: np.full(len(p), 2 - 1j), 1, R)
    assert abs(S.convolve(field, bump, [0.0]) - (2 - 1j)) < 1e-10


def test_coverage_error():
    bump = S.make_bump(100, 1)
    short = S.sample_field(ones, 1, 100.0, extent=50.0)
    with pytest.raises(CoverageError):
        S.convolve(short, bump, [0.0])
    with pytest.raises(CoverageError):
        S.convolve(S.sample_field(ones, 2, 100.0, step=1.0), bump, [0.0])


def test_young_examples():
    bump = S.make_bump(100, 1)
    lhs, rhs = S.young_bound_check(S.sample_field(ones, 1, 100.0), bump, [0.0])
    assert abs(lhs - 1.0) < 1e-9
    assert abs(rhs - 40000 / bump.mass ** 2) < 1e-9 and 1.235 <= rhs <= 1.563
    ind = S.sample_field(lambda p: (np.abs(p[:, 0]) <= 1.0).astype(float), 1, 100.0)
    lhs, rhs = S.young_bound_check(ind, bump, [0.0])
    # lhs = (2 / a_R)^2 and rhs = sigma_1 R * 2 / a_R^2, a factor R apart
    assert lhs < 0.02 * rhs
    assert S.young_bound_check(S.sample_field(lambda p: np.zeros(len(p)), 1, 100.0),
                               bump, [0.0]) == (0.0, 0.0)


def test_audit_csv(tmp_path):
    path = tmp_path / "a.csv"
    S.write_audit_csv(path, [S.constants_audit(100, 1)])
    rows = path.read_text().splitlines()
    assert rows[0] == ",".join(S.AUDIT_COLUMNS)
    assert rows[1].split(",")[5:7] == ["1.5625", "1.5625"]
