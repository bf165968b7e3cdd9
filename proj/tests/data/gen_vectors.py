# Independent reference for the packed wire format and bin arithmetic.
import json, math
M, N, b_psi = 4, 2, 5
b_phi = b_psi + 2
labels = []
for i in range(1, min(N, M - 1) + 1):
    labels += [("phi", l, i) for l in range(i, M)]
    labels += [("psi", l, i) for l in range(i + 1, M + 1)]
vals = []
for j, (kind, r, c) in enumerate(labels):
    frac = ((j * 0.6180339887498949) % 1.0)
    vals.append(frac * 2 * math.pi if kind == "phi" else frac * math.pi / 2)
codes = []
for (kind, r, c), v in zip(labels, vals):
    if kind == "phi":
        codes.append(min(int(math.floor(v * 2**b_phi / (2 * math.pi))), 2**b_phi - 1))
    else:
        codes.append(min(int(math.floor(v * 2**(b_psi + 1) / math.pi)), 2**b_psi - 1))
bits = []
for (kind, r, c), code in zip(labels, codes):
    w = b_phi if kind == "phi" else b_psi
    bits += [(code >> b) & 1 for b in range(w)]
while len(bits) % 8:
    bits.append(0)
payload = bytes(sum(bits[8 * i + b] << b for b in range(8)) for i in range(len(bits) // 8))
packed = bytes([b_psi, 0]) + payload
json.dump({"n_rx": N, "m_tx": M, "b_psi": b_psi,
           "elements": [{"kind": k, "row": r, "col": c, "value": v} for (k, r, c), v in zip(labels, vals)],
           "codes": codes, "packed_hex": packed.hex()}, open("packed_4x2_bpsi5.json", "w"), indent=1)
# diag(2, 1) CSI, 2x2, half-wavelength spacing at 5.825 GHz.
lam = 299792458.0 / 5.825e9
json.dump({"geometry": {"n_rx": 2, "n_tx": 2, "rx_spacing": lam / 2, "tx_spacing": lam / 2},
           "grid": {"center_frequency": 5.825e9, "spacing": 312500.0, "n_subcarriers": 1}, "k": 1,
           "matrix": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]}, open("csi_diag21.json", "w"), indent=1)
print(packed.hex(), codes)
