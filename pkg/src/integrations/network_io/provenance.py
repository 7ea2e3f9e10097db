"""
provenance.py
-------------
Git-style provenance string stamped into run metadata.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

PACKAGE = "rbn-sensitivity"
VERSION = "0.1.0"


def git_revision(search_from: Optional[Path] = None) -> Optional[str]:
    """Short commit hash (+dirty) of the enclosing repository, or None."""
    try:
        # GitPython raises ImportError when no git executable is installed
        import git
    except ImportError:
        return None
    try:
        repo = git.Repo(search_from or Path(__file__).resolve().parent, search_parent_directories=True)
        sha = repo.head.commit.hexsha[:12]
        return f"{sha}+dirty" if repo.is_dirty() else sha
    except (git.InvalidGitRepositoryError, git.NoSuchPathError, git.GitCommandError, ValueError):
        return None


def provenance_string() -> str:
    rev = git_revision()
    return f"{PACKAGE} {VERSION} git:{rev}" if rev else f"{PACKAGE} {VERSION} unversioned"
