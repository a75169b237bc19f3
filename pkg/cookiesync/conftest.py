from doctest import ELLIPSIS, NORMALIZE_WHITESPACE
from pathlib import Path

import jax
import matplotlib
import numpy as np
import pytest
from matplotlib import pyplot as plt
from sybil import Sybil
from sybil.parsers.doctest import DocTestParser
from sybil.parsers.markdown import PythonCodeBlockParser

import cookiesync


def sybil_setup(namespace):
    namespace['cs'] = cookiesync
    namespace['np'] = np
    namespace['plt'] = plt
    namespace['jax'] = jax


# doctest fixture
@pytest.fixture(scope='session', autouse=True)
def _mplstyle():
    cookiesync.plots.utils.mplstyle()


@pytest.fixture(scope='session', autouse=True)
def _mpl_backend():
    # use a non-interactive backend for matplotlib, to avoid opening a display window
    matplotlib.use('Agg')


# doctest fixture
@pytest.fixture()
def renderfig():
    def savefig_code(figname):
        directory = Path('docs/figs-code')
        directory.mkdir(parents=True, exist_ok=True)
        plt.gcf().savefig(directory / f'{figname}.png', bbox_inches='tight', dpi=150)
        plt.close()

    return savefig_code


# sybil configuration
pytest_collect_file = Sybil(
    parsers=[
        DocTestParser(optionflags=ELLIPSIS | NORMALIZE_WHITESPACE),
        PythonCodeBlockParser(),
    ],
    patterns=['*.py'],
    setup=sybil_setup,
    fixtures=['renderfig'],
).pytest()
