"""
Provides a version string for the code that produced a result, based on the Git
repository the package is run from.
"""

import logging
import os.path
import sys

from . import __version__

logger = logging.getLogger(__name__)


def git_version(path=None):
    """Commit id of the repository containing `path` (this package by default), with "*" if dirty.

    Returns None when GitPython is not installed or the package is not in a repository.
    """
    try:
        import git
    except ImportError:
        logger.debug("GitPython not installed: no commit id in the run manifest")
        return None
    if path is None:
        path = os.path.dirname(os.path.realpath(sys.modules[__name__].__file__))
    try:
        repo = git.Repo(path, search_parent_directories=True)
        version = repo.head.commit.hexsha
    except (git.InvalidGitRepositoryError, git.NoSuchPathError, ValueError):
        return None
    if repo.is_dirty():
        version += "*"
    return version


def code_version():
    """Package version, followed by the commit id when available."""
    commit = git_version()
    if commit is None:
        return __version__
    return f"{__version__}+{commit}"
