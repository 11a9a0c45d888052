# -*- coding: utf-8 -*-
"""bic-explore command-line entrypoint."""

from __future__ import annotations

if __name__ == "__main__":
    from bic_explore.app import main

    raise SystemExit(main())
