#!/usr/bin/env python3
"""prof-reward-v1 child that answers every request with a NaN reward."""
import sys

sys.stdin.readline()
sys.stdout.write('{"ready": true}\n')
sys.stdout.flush()
for _ in sys.stdin:
    sys.stdout.write('{"reward": NaN}\n')
    sys.stdout.flush()
