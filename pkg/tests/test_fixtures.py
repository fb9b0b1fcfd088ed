"""Generated catalog/inventory pairs: determinism, shape bounds, coverage."""

from __future__ import annotations

import pytest

from kmodsim.catalog import parse_catalog, topo_levels
from kmodsim.errors import ConfigError
from kmodsim.fixtures import generate_fixture
from kmodsim.hardware import check_hardware_support, parse_inventory


def test_same_seed_is_byte_identical():
    assert generate_fixture(5, 2, 1, 1.0) == generate_fixture(5, 2, 1, 1.0)


def test_different_seeds_differ():
    assert generate_fixture(5, 2, 1, 1.0) != generate_fixture(5, 2, 2, 1.0)


def test_generated_catalog_parses_within_depth_bound():
    catalog_text, inventory_text = generate_fixture(50, 5, 7, 0.5)
    catalog = parse_catalog(catalog_text)
    parse_inventory(inventory_text)
    assert len(catalog) == 50
    assert max(topo_levels(catalog).values()) <= 5


def test_smallest_fixture_is_gated_with_no_matching_device():
    catalog_text, inventory_text = generate_fixture(1, 1, 0, 0.0)
    catalog = parse_catalog(catalog_text)
    inventory = parse_inventory(inventory_text)
    (rec,) = catalog.records
    assert rec.hw_tags  # hardware-gated
    assert not check_hardware_support(rec, inventory)


def test_full_coverage_matches_every_module():
    catalog_text, inventory_text = generate_fixture(5, 2, 1, 1.0)
    catalog = parse_catalog(catalog_text)
    inventory = parse_inventory(inventory_text)
    assert all(check_hardware_support(rec, inventory) for rec in catalog.records)


def test_partial_coverage_is_roughly_honored():
    catalog_text, inventory_text = generate_fixture(200, 4, 3, 0.5)
    catalog = parse_catalog(catalog_text)
    inventory = parse_inventory(inventory_text)
    matched = sum(1 for rec in catalog.records if check_hardware_support(rec, inventory))
    assert 60 <= matched <= 140

def test_symbols_decoys_present_in_text_but_filtered_by_parse():
    catalog_text, _ = generate_fixture(10, 3, 9, 1.0)
    assert ".symbols|" in catalog_text
    catalog = parse_catalog(catalog_text)
    assert len(catalog) == 10
    assert not any(name.endswith(".symbols") for name in catalog.names)


@pytest.mark.parametrize(
    "args", [(0, 1, 0, 1.0), (1, 0, 0, 1.0), (1, 1, 0, -0.1), (1, 1, 0, 1.5)]
)
def test_bad_shapes_rejected(args):
    with pytest.raises(ConfigError):
        generate_fixture(*args)
