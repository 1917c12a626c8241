import glob
import os

import pytest

from conceptkit.catalog_types import DomainSpec
from conceptkit.corpus import DATA_ROOT, catalog_by_name
from conceptkit.lang import SourceFile, parse_app

CART_DOMAIN = DomainSpec((("Item", ("a", "b")), ("User", ("u1",))),
                         nat=(1, 2), money=(300, 450))


@pytest.fixture(scope="session")
def catalog():
    return catalog_by_name()


@pytest.fixture(scope="session")
def cartcatalog_app():
    return parse_app(SourceFile.load(
        os.path.join(DATA_ROOT, "apps", "cartcatalog.app")))


def all_corpus_files():
    """Every shipped source file, for round-trip and validation sweeps."""
    patterns = ("entries/*.catalog", "concepts/*.concept", "apps/*.app",
                "extensions/*.app", "uis/*.ui", "scenarios/*.scenario",
                "extras/*.scenario")
    files = []
    for pattern in patterns:
        files.extend(sorted(glob.glob(os.path.join(DATA_ROOT, pattern))))
    return files
