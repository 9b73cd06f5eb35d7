"""Every registered property check, at the quick profile."""

import pytest

from normdens.verify import DEFAULT_SEED, PROFILES, PROPERTIES


@pytest.mark.parametrize("index, name", list(enumerate(PROPERTIES)))
def test_property(index, name):
    ok, detail = PROPERTIES[name](PROFILES["quick"], DEFAULT_SEED + 1000 * index)
    assert ok, detail
