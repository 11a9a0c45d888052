from __future__ import annotations

KIND_EXPLOIT_KNOWN = "exploit_known"
KIND_EXPLOIT_UNKNOWN = "exploit_unknown"
KIND_EXPLORE = "explore"
KIND_TERMINAL = "terminal"
RECOMMENDATION_KINDS = (KIND_EXPLOIT_KNOWN, KIND_EXPLOIT_UNKNOWN, KIND_EXPLORE, KIND_TERMINAL)

UNKNOWN_MARK = "*"
REWARD_PLUS = 1.0
REWARD_ZERO = 0.0
REWARD_MINUS = -1.0

MAX_ENUMERATION_ACTIONS = 5
MAX_ENUMERATION_HORIZON = 256
BREAKPOINT_MERGE_TOLERANCE = 1e-12
