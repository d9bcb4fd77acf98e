"""Brute-force Fock-space oracle for the analytic QFI formulas."""
from .sld import SldResult, TmsvAdjudication, adjudicate_tmsv, qfi_sld
from .state import TruncatedState, build_image_state

__all__ = ["SldResult", "TmsvAdjudication", "TruncatedState", "adjudicate_tmsv",
           "build_image_state", "qfi_sld"]
