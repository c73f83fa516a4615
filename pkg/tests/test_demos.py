"""Every named demo's computed-vs-expected table must pass all rows."""

import json

import pytest

from sloccflow.demos import (
    demo_bipartite,
    demo_bosons,
    demo_dicke,
    demo_fermions,
    demo_four_qubit_families,
    demo_three_qubit,
)


@pytest.mark.parametrize("N", [2, 4])
def test_bipartite_demo(N):
    table = demo_bipartite(N)
    assert table.all_ok, table.to_text()


def test_three_qubit_demo():
    table = demo_three_qubit()
    assert table.all_ok, table.to_text()
    assert len(table.rows) == 6


def test_four_qubit_demo():
    table = demo_four_qubit_families()
    assert table.all_ok, table.to_text()


@pytest.mark.parametrize("N", [3, 5])
def test_boson_demo(N):
    table = demo_bosons(N)
    assert table.all_ok, table.to_text()


@pytest.mark.parametrize("N", [4, 5])
def test_fermion_demo(N):
    table = demo_fermions(N)
    assert table.all_ok, table.to_text()


@pytest.mark.parametrize("L", [3, 6])
def test_dicke_demo(L):
    table = demo_dicke(L)
    assert table.all_ok, table.to_text()


def test_tables_serialize(capsys):
    table = demo_dicke(3)
    doc = json.loads(json.dumps(table.to_json()))
    assert doc["all_ok"] is True
    assert table.to_csv().splitlines()[0].startswith("k,")
