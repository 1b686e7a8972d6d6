"""
Shared pytest fixtures.
"""

import logging

import pytest


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Undo handlers installed by setup_logger so caplog sees every record."""
    yield
    logger = logging.getLogger("borninfeld")
    logger.handlers.clear()
    logger.setLevel(logging.NOTSET)
    logger.propagate = True
