# Copyright 2026 The OccuKit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Scalar forward pass of the radar height self-attention block for the
C=1, H=W=Z=2 fixture used in tests/test_fusion.cpp. Prints the frozen
values pasted into the test."""

import math

H = W = Z = 2
bev = [[0.5, -1.0], [2.0, 0.25]]
pos_h = [0.1, -0.2]

# layer: (taps {(dh, dw, dz): weight}, bias); offsets are relative to the
# output cell.
gate0 = ({(0, 0, 0): 0.8, (0, 0, 1): 0.3}, 0.05)
gate1 = ({(0, 0, 0): 1.5, (-1, 0, 0): 0.2}, -0.1)
att = ({(0, 0, 0): 0.9, (0, 1, 0): -0.4}, 0.02)
enc0 = ({(0, 0, 0): 1.1, (1, 0, 0): 0.25}, -0.05)
enc1 = ({(0, 0, 0): 0.7, (0, 0, -1): 0.35}, 0.01)


def conv(x, layer):
    taps, bias = layer
    out = {}
    for h in range(H):
        for w in range(W):
            for z in range(Z):
                acc = bias
                for (dh, dw, dz), k in taps.items():
                    hh, ww, zz = h + dh, w + dw, z + dz
                    if 0 <= hh < H and 0 <= ww < W and 0 <= zz < Z:
                        acc += k * x[(hh, ww, zz)]
                out[(h, w, z)] = acc
    return out


def each(x, fn):
    return {k: fn(v) for k, v in x.items()}


def sigmoid(v):
    return 1.0 / (1.0 + math.exp(-v))


def softplus(v):
    return math.log1p(math.exp(v))


def relu(v):
    return max(v, 0.0)


cells = [(h, w, z) for h in range(H) for w in range(W) for z in range(Z)]
initial = {(h, w, z): bev[h][w] for h, w, z in cells}
encoded = {(h, w, z): bev[h][w] + pos_h[z] for h, w, z in cells}
gate = each(conv(each(conv(encoded, gate0), relu), gate1), sigmoid)
modulated = {k: initial[k] * gate[k] for k in cells}
attention = conv(modulated, att)
summed = {k: initial[k] + attention[k] for k in cells}
out = each(conv(each(conv(summed, enc0), softplus), enc1), softplus)

for name, t in (("gate", gate), ("attention", attention), ("output", out)):
    print(name, ", ".join(repr(t[k]) for k in cells))
