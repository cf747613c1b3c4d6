#!/usr/bin/env python3
# Copyright 2026 The SANAC Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Prints the STOI score of an estimate against a reference.

Usage: stoi_adapter.py REFERENCE.wav ESTIMATE.wav

Both files must be mono PCM16 at the same rate. Requires pystoi.
"""

import sys
import wave

import numpy as np
from pystoi import stoi


def read(path):
  with wave.open(path, "rb") as w:
    if w.getnchannels() != 1 or w.getsampwidth() != 2:
      raise ValueError(f"{path}: expected mono PCM16")
    data = np.frombuffer(w.readframes(w.getnframes()), dtype="<i2")
    return data.astype(np.float64) / 32768.0, w.getframerate()


def main(argv):
  if len(argv) != 3:
    print(__doc__, file=sys.stderr)
    return 1
  ref, rate = read(argv[1])
  est, est_rate = read(argv[2])
  if rate != est_rate or len(ref) != len(est):
    print("reference and estimate differ in rate or length", file=sys.stderr)
    return 1
  print(f"{stoi(ref, est, rate, extended=False):.6f}")
  return 0


if __name__ == "__main__":
  sys.exit(main(sys.argv))
