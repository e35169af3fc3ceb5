from __future__ import annotations

import json
from fractions import Fraction

import pytest

from drcycles.graphs import StableGraph
from drcycles.strata import TautClass, psi_class
from drcycles.verify import compare_hain, compare_pixton_zvonkine, verify_dr_vanishing, verify_relation

LOOP_12 = StableGraph((0,), ((1, 2, 3, 4),), ((3, 4),))
SEP_12 = StableGraph((1, 0), ((3,), (1, 2, 4)), ((3, 4),))


def test_known_relation_certified():
    rel = psi_class(1, 2, 1) - TautClass.from_generator(LOOP_12).scale(Fraction(1, 24)) \
        - TautClass.from_generator(SEP_12)
    cert = verify_relation(rel, 1)
    assert cert.holds and cert.verdict == "holds"
    assert len(cert.pairings) == 5


def test_negative_control():
    cert = verify_relation(psi_class(1, 1, 1), 1)
    assert not cert.holds
    assert [v for _, v in cert.nonzero()] == [Fraction(1, 24)]
    data = cert.to_json()
    assert data["verdict"] == "fails"
    assert data["pairings"][0]["pairing"] == "1/24"
    json.dumps(data)


def test_inhomogeneous_class_rejected():
    with pytest.raises(ValueError):
        verify_relation(TautClass.fundamental(1, 1) + psi_class(1, 1, 1), 1)


def test_vanishing_above_genus_and_degree_guard():
    omega_1 = verify_dr_vanishing(1, (1, -1), 0, [2])
    assert all(c.holds for c in omega_1)
    with pytest.raises(ValueError):
        verify_dr_vanishing(1, (1, -1), 0, [1])


def test_comparisons_report():
    res = compare_pixton_zvonkine(1, (1, -1), 0, 1)
    assert res.equal and res.report["differences"] == []
    res = compare_hain(1, (2, -2), 1)
    assert res.equal
    json.dumps(res.to_json())
