#!/usr/bin/env python3
"""prof-reward-v1 child: reward = obs[0] + 2*next[-1] - sum(act)."""
import json
import sys


def main():
    hello = json.loads(sys.stdin.readline())
    if hello.get("hello") != "prof-reward-v1":
        sys.stdout.write(json.dumps({"ready": False}) + "\n")
        sys.stdout.flush()
        return 1
    obs_dim = hello["obs_dim"]
    act_dim = hello["act_dim"]
    sys.stdout.write(json.dumps({"ready": True}) + "\n")
    sys.stdout.flush()
    for line in sys.stdin:
        req = json.loads(line)
        obs, act, nxt = req["obs"], req["act"], req["next"]
        assert len(obs) == obs_dim and len(nxt) == obs_dim
        assert len(act) == act_dim
        reward = obs[0] + 2.0 * nxt[-1] - sum(act)
        sys.stdout.write(json.dumps({"reward": reward}) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
