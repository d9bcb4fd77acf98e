"""Settle which reading of the squeezed-vacuum QFI formula is right.

The closed form has a term in the derivative of the image squeezing
parameter.  Read literally it is linear in that derivative; dimensional
analysis suggests it should be squared.  The Fock-space oracle decides.
"""
from rqfi import ImagingSystem
from rqfi.oracle import adjudicate_tmsv

report = adjudicate_tmsv(0.3, ImagingSystem(0.4), [0.5, 1.0, 2.0])
for s, o, a, b in zip(report.s, report.oracle, report.as_printed, report.squared_derivative):
    print(f"s={s:4.2f}  oracle={o:.8f}  linear={a:.8f}  squared={b:.8f}")
print("max relative deviation:", report.max_rel_dev)
print("verdict:", report.verdict)
